use crate::cluster::ExcitationVector;
use crate::linalg::{quadratic_form, CVector};
use crate::radmatrix::{ClusterDefinition, RadiationMatrix};
use crate::touchstone::Network;

use super::EvalError;

/// Where the power fed into one cluster ends up, as fractions of the input.
#[derive(Debug, Clone, PartialEq)]
pub struct LossBreakdown {
    pub frequency_hz: f64,
    /// Power reflected back into the fed cluster's own ports.
    pub mismatch: f64,
    /// Power coupled into each other cluster, in cluster order.
    pub coupling_by_cluster: Vec<(String, f64)>,
    /// Dissipated power; only known when far-field data is supplied.
    pub ohmic: Option<f64>,
    pub radiated: f64,
}

impl LossBreakdown {
    pub fn total_coupling(&self) -> f64 {
        self.coupling_by_cluster.iter().map(|(_, p)| p).sum()
    }

    pub fn sum(&self) -> f64 {
        self.mismatch + self.total_coupling() + self.ohmic.unwrap_or(0.0) + self.radiated
    }
}

/// Every device port belongs to exactly one cluster.
pub fn check_partition(net: &Network, clusters: &[ClusterDefinition]) -> Result<(), EvalError> {
    let n = net.n_ports();
    let mut owner: Vec<Option<&str>> = vec![None; n];
    for cl in clusters {
        if cl.all_ports() != n {
            return Err(EvalError::NotPartition(format!(
                "cluster `{}` declares {} device ports, network has {n}",
                cl.id(),
                cl.all_ports()
            )));
        }
        for p in cl.indices() {
            if let Some(other) = owner[p] {
                return Err(EvalError::NotPartition(format!(
                    "port {} is in both `{other}` and `{}`",
                    p + 1,
                    cl.id()
                )));
            }
            owner[p] = Some(cl.id());
        }
    }
    if let Some(p) = owner.iter().position(Option::is_none) {
        return Err(EvalError::NotPartition(format!("port {} belongs to no cluster", p + 1)));
    }
    Ok(())
}

/// Feeds `fed_cluster` with `a` (zero on every other port) and splits the
/// input power into reflection, coupling per cluster, radiation and, when
/// `d_ff` (far-field radiation matrix of the fed ports) is present, ohmic
/// loss.
pub fn loss_decomposition(
    net: &Network,
    clusters: &[ClusterDefinition],
    fed_cluster: &str,
    a: &ExcitationVector,
    d_ff: Option<&RadiationMatrix>,
    freq_index: usize,
) -> Result<LossBreakdown, EvalError> {
    check_partition(net, clusters)?;
    let fed = clusters
        .iter()
        .find(|c| c.id() == fed_cluster)
        .ok_or_else(|| EvalError::UnknownCluster(fed_cluster.to_string()))?;
    if a.len() != fed.len() {
        return Err(EvalError::Dimension {
            expected: fed.len(),
            found: a.len(),
        });
    }
    let s = net.s(freq_index).ok_or(EvalError::FrequencyIndex {
        index: freq_index,
        len: net.len(),
    })?;

    let mut a_full = CVector::zeros(net.n_ports());
    for (w, p) in a.weights().iter().zip(fed.indices()) {
        a_full[p] = *w;
    }
    let b = s * a_full;
    let power = |cl: &ClusterDefinition| cl.indices().map(|p| b[p].norm_sqr()).sum::<f64>();

    let mismatch = power(fed);
    let coupling_by_cluster: Vec<(String, f64)> = clusters
        .iter()
        .filter(|c| c.id() != fed_cluster)
        .map(|c| (c.id().to_string(), power(c)))
        .collect();
    let returned = b.norm_squared();

    let (radiated, ohmic) = match d_ff {
        Some(d) => {
            if d.dim() != fed.len() {
                return Err(EvalError::Dimension {
                    expected: fed.len(),
                    found: d.dim(),
                });
            }
            let radiated = quadratic_form(d.matrix(), a.weights());
            let ohmic = 1.0 - radiated - returned;
            if ohmic < -1e-6 {
                return Err(EvalError::InconsistentFieldData(ohmic));
            }
            (radiated, Some(ohmic))
        }
        None => (1.0 - returned, None),
    };

    Ok(LossBreakdown {
        frequency_hz: net.frequencies_hz()[freq_index],
        mismatch,
        coupling_by_cluster,
        ohmic,
        radiated,
    })
}

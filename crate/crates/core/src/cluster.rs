//! Eigen-optimal cluster excitation, efficiency, TARC and weighted patterns.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::ffpattern::{FarFieldPattern, PatternError, PatternSet};
use crate::linalg::{hermitian_defect, quadratic_form, CMatrix, CVector};
use crate::radmatrix::{
    radiation_matrix_from_fields, radiation_matrix_from_s, ClusterDefinition, MatrixSource, RadMatrixError,
    RadiationMatrix, Scope, HERMITIAN_TOL,
};
use crate::touchstone::Network;

/// Top eigenvalues closer than this are treated as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum ClusterError {
    #[error("excitation has {found} entries, expected {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("excitation vector has zero norm")]
    ZeroExcitation,
    #[error("matrix is not Hermitian (max |d - dᴴ| = {0:e})")]
    NotHermitian(f64),
    #[error("no pattern for port {port} at {freq_hz} Hz")]
    MissingPattern { port: usize, freq_hz: f64 },
    #[error("expected {expected} pattern sets (one per cluster port), got {found}")]
    PatternCount { expected: usize, found: usize },
    #[error(transparent)]
    RadMatrix(#[from] RadMatrixError),
    #[error(transparent)]
    Pattern(#[from] PatternError),
}

/// Unit-norm complex feed weights. The largest-magnitude entry (first one on
/// ties) is real and non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationVector {
    a: CVector,
    frequency_hz: f64,
}

impl ExcitationVector {
    pub fn new(weights: Vec<Complex64>, frequency_hz: f64) -> Result<Self, ClusterError> {
        Self::normalized(CVector::from_vec(weights), frequency_hz)
    }

    fn normalized(mut a: CVector, frequency_hz: f64) -> Result<Self, ClusterError> {
        let norm = a.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(ClusterError::ZeroExcitation);
        }
        a.unscale_mut(norm);
        let max_mag = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let pivot = a
            .iter()
            .position(|z| z.norm() >= max_mag - 1e-12)
            .expect("non-empty vector");
        let rotation = a[pivot].conj() / a[pivot].norm();
        a *= rotation;
        a[pivot] = Complex64::new(a[pivot].norm(), 0.0);
        Ok(Self { a, frequency_hz })
    }

    /// Unit basis vector `e_index` (0-based).
    pub fn unit(len: usize, index: usize, frequency_hz: f64) -> Self {
        let mut a = CVector::zeros(len);
        a[index] = Complex64::new(1.0, 0.0);
        Self { a, frequency_hz }
    }

    pub fn weights(&self) -> &CVector {
        &self.a
    }

    pub fn frequency_hz(&self) -> f64 {
        self.frequency_hz
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn amplitudes(&self) -> Vec<f64> {
        self.a.iter().map(|z| z.norm()).collect()
    }

    /// Phases in degrees, in `(-180, 180]`.
    pub fn phases_deg(&self) -> Vec<f64> {
        self.a
            .iter()
            .map(|z| {
                let p = z.arg().to_degrees();
                if p <= -180.0 {
                    p + 360.0
                } else {
                    p
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterOperatingPoint {
    pub frequency_hz: f64,
    pub excitation: ExcitationVector,
    /// Largest eigenvalue of the radiation matrix, clamped to `[0, 1]`.
    pub efficiency: f64,
    /// TARC under `excitation`. From [`frequency_sweep`] this is always the
    /// classical value from the cluster's own scattering rows.
    pub tarc: f64,
}

/// The excitation maximizing `aᴴ D a / aᴴ a`; `tarc` is `sqrt(1 - eff)` for
/// the same matrix.
///
/// With a degenerate top eigenvalue the eigenspace vector maximizing `|a_1|`,
/// then `|a_2|`, and so on is chosen.
pub fn optimal_excitation(d: &RadiationMatrix) -> Result<ClusterOperatingPoint, ClusterError> {
    let defect = hermitian_defect(d.matrix());
    if defect >= HERMITIAN_TOL {
        return Err(ClusterError::NotHermitian(defect));
    }
    let eig = d.eigen();
    let top = eig.max();
    let k = d.dim();
    let span: Vec<usize> = (0..k).filter(|&i| eig.values[i] >= top - DEGENERACY_GAP).collect();
    let a = if span.len() == 1 {
        eig.vectors.column(0).into_owned()
    } else {
        let basis = CMatrix::from_fn(k, span.len(), |r, c| eig.vectors[(r, span[c])]);
        let projector = &basis * basis.adjoint();
        (0..k)
            .map(|i| projector.column(i).into_owned())
            .find(|p| p.norm() > 1e-8)
            .expect("non-trivial eigenspace")
    };
    let excitation = ExcitationVector::normalized(a, d.frequency_hz())?;
    Ok(ClusterOperatingPoint {
        frequency_hz: d.frequency_hz(),
        excitation,
        efficiency: top.clamp(0.0, 1.0),
        tarc: (1.0 - top).max(0.0).sqrt(),
    })
}

/// `aᴴ D a / aᴴ a`.
pub fn cluster_efficiency(d: &RadiationMatrix, a: &ExcitationVector) -> Result<f64, ClusterError> {
    if a.len() != d.dim() {
        return Err(ClusterError::Dimension {
            expected: d.dim(),
            found: a.len(),
        });
    }
    Ok(quadratic_form(d.matrix(), &a.a) / a.a.norm_squared())
}

/// `sqrt(1 - aᴴ D a)` with `D` from scattering data in the given scope.
pub fn tarc(
    net: &Network,
    cluster: &ClusterDefinition,
    a: &ExcitationVector,
    freq_index: usize,
    scope: Scope,
) -> Result<f64, ClusterError> {
    let d = radiation_matrix_from_s(net, cluster, freq_index, scope)?;
    tarc_from_matrix(&d, a)
}

fn tarc_from_matrix(d: &RadiationMatrix, a: &ExcitationVector) -> Result<f64, ClusterError> {
    Ok((1.0 - cluster_efficiency(d, a)?).max(0.0).sqrt())
}

/// `sum_i a_i F_i`: the cluster seen as a single antenna.
pub fn weighted_pattern(patterns: &[&FarFieldPattern], a: &ExcitationVector) -> Result<FarFieldPattern, ClusterError> {
    if patterns.len() != a.len() {
        return Err(ClusterError::Dimension {
            expected: patterns.len(),
            found: a.len(),
        });
    }
    Ok(FarFieldPattern::combine(patterns, a.a.as_slice())?)
}

/// Looks up the cluster's port patterns at one frequency.
pub fn patterns_at<'a>(
    sets: &'a [PatternSet],
    cluster: &ClusterDefinition,
    freq_hz: f64,
) -> Result<Vec<&'a FarFieldPattern>, ClusterError> {
    if sets.len() != cluster.len() {
        return Err(ClusterError::PatternCount {
            expected: cluster.len(),
            found: sets.len(),
        });
    }
    sets.iter()
        .zip(cluster.active_ports())
        .map(|(set, &port)| set.get(freq_hz).ok_or(ClusterError::MissingPattern { port, freq_hz }))
        .collect()
}

/// Radiation matrix for one frequency point from the selected source.
pub fn radiation_matrix(
    net: &Network,
    patterns: Option<&[PatternSet]>,
    cluster: &ClusterDefinition,
    freq_index: usize,
    source: MatrixSource,
) -> Result<RadiationMatrix, ClusterError> {
    match source {
        MatrixSource::Scattering(scope) => Ok(radiation_matrix_from_s(net, cluster, freq_index, scope)?),
        MatrixSource::FarField => {
            let f = net.frequencies_hz().get(freq_index).copied().ok_or(RadMatrixError::FrequencyIndex {
                index: freq_index,
                len: net.len(),
            })?;
            let sets = patterns.unwrap_or(&[]);
            let at = patterns_at(sets, cluster, f)?;
            Ok(radiation_matrix_from_fields(&at)?)
        }
    }
}

/// Solves every frequency point of `net` independently.
///
/// `patterns` holds one [`PatternSet`] per cluster port (in `active_ports`
/// order) and is only consulted for [`MatrixSource::FarField`]. TARC is
/// always the classical one from the cluster's own scattering rows.
pub fn frequency_sweep(
    net: &Network,
    patterns: Option<&[PatternSet]>,
    cluster: &ClusterDefinition,
    source: MatrixSource,
) -> Result<Vec<ClusterOperatingPoint>, ClusterError> {
    (0..net.len())
        .into_par_iter()
        .map(|fi| {
            let d = radiation_matrix(net, patterns, cluster, fi, source)?;
            let mut point = optimal_excitation(&d)?;
            let matching = radiation_matrix_from_s(net, cluster, fi, Scope::ClusterOnly)?;
            point.tarc = tarc_from_matrix(&matching, &point.excitation)?;
            Ok(point)
        })
        .collect()
}

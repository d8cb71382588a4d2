use nalgebra::DMatrix;

use crate::radmatrix::RadiationMatrix;

use super::EvalError;

/// Correlation level conventionally considered adequate for MIMO.
pub const ECC_ADEQUATE: f64 = 0.5;

const MIN_EFFICIENCY: f64 = 1e-12;

/// Envelope correlation coefficients between cluster-level antennas.
#[derive(Debug, Clone, PartialEq)]
pub struct EccMatrix {
    pub frequency_hz: f64,
    pub rho: DMatrix<f64>,
}

impl EccMatrix {
    /// Upper-triangle pairs `(i, j, rho_ij)` with `i < j`, zero-based.
    pub fn pairs(&self) -> Vec<(usize, usize, f64)> {
        let m = self.rho.nrows();
        (0..m)
            .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, self.rho[(i, j)]))
            .collect()
    }

    pub fn pairs_above(&self, threshold: f64) -> Vec<(usize, usize, f64)> {
        self.pairs().into_iter().filter(|&(_, _, r)| r > threshold).collect()
    }
}

/// `rho_ij = |D_ij|^2 / (D_ii D_jj)` from a radiation matrix whose entries are
/// pattern overlaps of the cluster-level antennas.
pub fn ecc(d: &RadiationMatrix) -> Result<EccMatrix, EvalError> {
    let m = d.matrix();
    let n = d.dim();
    for i in 0..n {
        let efficiency = m[(i, i)].re;
        if efficiency.is_nan() || efficiency <= MIN_EFFICIENCY {
            return Err(EvalError::UndefinedCorrelation { index: i, efficiency });
        }
    }
    let rho = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else {
            m[(i, j)].norm_sqr() / (m[(i, i)].re * m[(j, j)].re)
        }
    });
    Ok(EccMatrix {
        frequency_hz: d.frequency_hz(),
        rho,
    })
}

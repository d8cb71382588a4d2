//! Ergodic capacity of a Rayleigh-fading channel seen through the receive
//! antennas' radiation matrix (receive-side Kronecker model).
//!
//! Each Monte Carlo sample draws its channel from a ChaCha stream selected by
//! the sample index, and the per-sample values are summed in index order, so
//! the result is bit-identical for any thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::linalg::{hermitian_defect, log2_det_hpd, psd_sqrt, symmetrize, CMatrix, HermitianEigen};
use crate::radmatrix::RadiationMatrix;

use super::EvalError;
use num_complex::Complex64;

const PSD_TOL: f64 = 1e-9;
const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityConfig {
    pub snr_db: f64,
    /// Number of base-station (transmit) antennas.
    pub n_tx: usize,
    pub n_samples: usize,
    pub seed: u64,
}

impl CapacityConfig {
    pub const DEFAULT_SAMPLES: usize = 10_000;

    pub fn snr_linear(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }

    fn validate(&self) -> Result<(), EvalError> {
        if self.n_samples == 0 {
            return Err(EvalError::InvalidConfig("n_samples must be at least 1".into()));
        }
        if self.n_tx == 0 {
            return Err(EvalError::InvalidConfig("n_tx must be at least 1".into()));
        }
        if !self.snr_db.is_finite() {
            return Err(EvalError::InvalidConfig(format!("snr_db must be finite, got {}", self.snr_db)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityResult {
    pub frequency_hz: f64,
    pub ergodic_capacity_bps_hz: f64,
    pub sample_std_error: f64,
}

/// Hermitian PSD receive correlation matrix `R` with `H = R^(1/2) H_w`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiveMatrix {
    frequency_hz: f64,
    r: CMatrix,
}

impl ReceiveMatrix {
    pub fn new(frequency_hz: f64, r: CMatrix) -> Result<Self, EvalError> {
        if r.nrows() != r.ncols() {
            return Err(EvalError::NotSquare(r.nrows(), r.ncols()));
        }
        let defect = hermitian_defect(&r);
        if defect >= HERMITIAN_TOL {
            return Err(EvalError::NotHermitian(defect));
        }
        let min = HermitianEigen::new(&symmetrize(&r)).min();
        if min < -PSD_TOL {
            return Err(EvalError::NotPositive(min));
        }
        Ok(Self { frequency_hz, r })
    }

    /// Ideal uncorrelated, lossless `m`-antenna receiver.
    pub fn identity(m: usize) -> Self {
        Self {
            frequency_hz: 0.0,
            r: CMatrix::identity(m, m),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.r
    }

    pub fn dim(&self) -> usize {
        self.r.nrows()
    }
}

/// The cluster-level radiation matrix is used verbatim: its diagonal carries
/// the total efficiencies and its off-diagonal entries the pattern overlaps.
pub fn build_receive_matrix(d_cluster_level: &RadiationMatrix) -> Result<ReceiveMatrix, EvalError> {
    ReceiveMatrix::new(d_cluster_level.frequency_hz(), d_cluster_level.matrix().clone())
}

fn sample_channel(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * scale, im * scale)
    })
}

/// Mean of `log2 det(I + (snr / n_tx) H Hᴴ)` over `cfg.n_samples` channels.
pub fn ergodic_capacity(r_rx: &ReceiveMatrix, cfg: &CapacityConfig) -> Result<CapacityResult, EvalError> {
    cfg.validate()?;
    let m = r_rx.dim();
    let root = psd_sqrt(&r_rx.r);
    let gain = cfg.snr_linear() / cfg.n_tx as f64;
    let identity = CMatrix::identity(m, m);

    let samples: Vec<f64> = (0..cfg.n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            let h = &root * sample_channel(&mut rng, m, cfg.n_tx);
            let g = &identity + (&h * h.adjoint()).scale(gain);
            log2_det_hpd(symmetrize(&g)).ok_or(EvalError::NotPositive(f64::NAN))
        })
        .collect::<Result<_, _>>()?;

    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let std_error = if samples.len() > 1 {
        let var = samples.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(CapacityResult {
        frequency_hz: r_rx.frequency_hz,
        ergodic_capacity_bps_hz: mean,
        sample_std_error: std_error,
    })
}

/// Capacity of the ideal `m x m` system: `R = I`, `n_tx = m`.
pub fn ideal_capacity(m: usize, snr_db: f64, n_samples: usize, seed: u64) -> Result<CapacityResult, EvalError> {
    let cfg = CapacityConfig {
        snr_db,
        n_tx: m,
        n_samples,
        seed,
    };
    ergodic_capacity(&ReceiveMatrix::identity(m), &cfg)
}

//! Analytic and randomized antenna systems used as ground truth.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::ffpattern::{integrate_overlap, write_pattern_file, FarFieldPattern, PatternError, PatternSet, SphericalGrid};
use crate::linalg::{max_singular_value, psd_sqrt, symmetrize, CMatrix};
use crate::radmatrix::ClusterDefinition;
use crate::touchstone::{write_touchstone, DataFormat, Network, NetworkError};

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("dipole orientation must be a unit vector (norm {0})")]
    Orientation(f64),
    #[error("efficiency must lie in [0, 1], got {0}")]
    Efficiency(f64),
    #[error("maximum singular value must lie in [0, 1], got {0}")]
    SingularValue(f64),
    #[error("need at least one port")]
    NoPorts,
    #[error("cluster `{cluster}` is defined for {declared} ports, system has {n_ports}")]
    ClusterSize {
        cluster: String,
        declared: usize,
        n_ports: usize,
    },
    #[error("grid too coarse to hold {0} orthonormal radiation modes")]
    TooFewModes(usize),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Pattern(#[from] PatternError),
}

/// Short dipole with a given orientation, efficiency and displacement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleSpec {
    orientation: [f64; 3],
    efficiency: f64,
    position_wavelengths: [f64; 3],
}

impl DipoleSpec {
    pub fn new(orientation: [f64; 3], efficiency: f64, position_wavelengths: [f64; 3]) -> Result<Self, SynthError> {
        let norm = orientation.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(SynthError::Orientation(norm));
        }
        if !(0.0..=1.0).contains(&efficiency) {
            return Err(SynthError::Efficiency(efficiency));
        }
        Ok(Self {
            orientation,
            efficiency,
            position_wavelengths,
        })
    }

    pub fn along(axis: usize) -> Self {
        let mut orientation = [0.0; 3];
        orientation[axis] = 1.0;
        Self {
            orientation,
            efficiency: 1.0,
            position_wavelengths: [0.0; 3],
        }
    }

    pub fn with_efficiency(mut self, efficiency: f64) -> Result<Self, SynthError> {
        if !(0.0..=1.0).contains(&efficiency) {
            return Err(SynthError::Efficiency(efficiency));
        }
        self.efficiency = efficiency;
        Ok(self)
    }

    pub fn at(mut self, position_wavelengths: [f64; 3]) -> Self {
        self.position_wavelengths = position_wavelengths;
        self
    }
}

/// Closed-form Hertzian dipole far field, normalized analytically so the
/// self-overlap equals the efficiency. A z dipole gives `E_theta = sqrt(1.5) sin(theta)`.
pub fn hertzian_dipole_pattern(
    spec: &DipoleSpec,
    grid: &SphericalGrid,
    frequency_hz: f64,
) -> Result<FarFieldPattern, SynthError> {
    // (1/4pi) * oint |p_t|^2 dOmega = 2/3 for a unit dipole.
    let amplitude = (1.5 * spec.efficiency).sqrt();
    let [px, py, pz] = spec.orientation;
    let [dx, dy, dz] = spec.position_wavelengths;
    Ok(FarFieldPattern::from_fn(frequency_hz, grid.clone(), |t, p| {
        let (st, ct, sp, cp) = (t.sin(), t.cos(), p.sin(), p.cos());
        let p_theta = px * ct * cp + py * ct * sp - pz * st;
        let p_phi = -px * sp + py * cp;
        let r_dot_d = dx * st * cp + dy * st * sp + dz * ct;
        let phase = Complex64::from_polar(amplitude, 2.0 * PI * r_dot_d);
        (phase * -p_theta, phase * -p_phi)
    })?)
}

/// ECC of two z dipoles displaced by `separation_wavelengths` along x, from
/// a direct midpoint-rule quadrature at 0.25 deg.
pub fn parallel_dipole_correlation_oracle(separation_wavelengths: f64) -> f64 {
    let n_theta = 720;
    let n_phi = 1440;
    let h_theta = PI / n_theta as f64;
    let h_phi = 2.0 * PI / n_phi as f64;
    let mut self_power = 0.0;
    let mut cross = Complex64::default();
    for i in 0..n_theta {
        let theta = (i as f64 + 0.5) * h_theta;
        let st = theta.sin();
        // |E_theta|^2 of both dipoles, times the solid-angle weight.
        let w = 1.5 * st * st * st * h_theta * h_phi;
        for j in 0..n_phi {
            let phi = (j as f64 + 0.5) * h_phi;
            let path = 2.0 * PI * separation_wavelengths * st * phi.cos();
            self_power += w;
            cross += Complex64::from_polar(w, path);
        }
    }
    cross.norm_sqr() / (self_power * self_power)
}

/// Random complex matrices with largest singular value `max_singular_value`
/// at every frequency. Deterministic per seed.
pub fn random_passive_network(
    n_ports: usize,
    max_singular_value: f64,
    frequencies_hz: &[f64],
    seed: u64,
) -> Result<Network, SynthError> {
    if n_ports == 0 {
        return Err(SynthError::NoPorts);
    }
    if !(0.0..=1.0).contains(&max_singular_value) {
        return Err(SynthError::SingularValue(max_singular_value));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let matrices = frequencies_hz
        .iter()
        .map(|_| {
            let g = random_gaussian(&mut rng, n_ports, n_ports);
            let top = max_singular_value_of(&g);
            g.scale(max_singular_value / top)
        })
        .collect();
    Ok(Network::new(frequencies_hz.to_vec(), matrices, 50.0)?)
}

fn max_singular_value_of(g: &CMatrix) -> f64 {
    max_singular_value(g).max(f64::MIN_POSITIVE)
}

pub(crate) fn random_gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    })
}

/// Network plus one embedded pattern set per device port, built so that the
/// pattern power equals exactly the power neither reflected nor coupled.
#[derive(Debug, Clone)]
pub struct LosslessSystem {
    pub network: Network,
    /// Indexed by zero-based device port.
    pub patterns: Vec<PatternSet>,
}

impl LosslessSystem {
    /// Pattern sets of the cluster's active ports, in cluster order.
    pub fn cluster_patterns(&self, cluster: &ClusterDefinition) -> Vec<PatternSet> {
        cluster.indices().map(|p| self.patterns[p].clone()).collect()
    }

    /// Writes `device.sNp`, `patterns/port<N>.csv` and `config.toml` into
    /// `dir` and returns the config path.
    pub fn emit_files(&self, dir: &Path, clusters: &[ClusterDefinition]) -> io::Result<PathBuf> {
        let n = self.network.n_ports();
        fs::create_dir_all(dir.join("patterns"))?;
        let ts_name = format!("device.s{n}p");
        fs::write(dir.join(&ts_name), write_touchstone(&self.network, DataFormat::Ri))?;
        for (p, set) in self.patterns.iter().enumerate() {
            fs::write(
                dir.join("patterns").join(format!("port{}.csv", p + 1)),
                write_pattern_file(set.iter()),
            )?;
        }
        let mut cfg = format!("touchstone = \"{ts_name}\"\npattern_dir = \"patterns\"\n");
        for cl in clusters {
            let ports: Vec<String> = cl.active_ports().iter().map(|p| p.to_string()).collect();
            let files: Vec<String> = cl.active_ports().iter().map(|p| format!("\"port{p}.csv\"")).collect();
            let _ = write!(
                cfg,
                "\n[[cluster]]\nid = \"{}\"\nports = [{}]\npatterns = [{}]\n",
                cl.id(),
                ports.join(", "),
                files.join(", ")
            );
        }
        let path = dir.join("config.toml");
        fs::write(&path, cfg)?;
        Ok(path)
    }
}

/// Random passive network (largest singular value 0.95) on two frequency
/// points, with consistent lossless patterns on a 1 deg grid.
pub fn lossless_consistent_system(
    n_ports: usize,
    cluster: &ClusterDefinition,
    seed: u64,
) -> Result<LosslessSystem, SynthError> {
    if cluster.all_ports() != n_ports {
        return Err(SynthError::ClusterSize {
            cluster: cluster.id().to_string(),
            declared: cluster.all_ports(),
            n_ports,
        });
    }
    let net = random_passive_network(n_ports, 0.95, &[2.0e9, 3.5e9], seed)?;
    lossless_system_for(net, &SphericalGrid::with_steps(1.0, 1.0)?)
}

/// Builds embedded patterns `F_i = sum_m C_mi Y_m` over orthonormal modes
/// `Y_m`, with `Cᴴ C = I - Sᴴ S` at every frequency.
pub fn lossless_system_for(network: Network, grid: &SphericalGrid) -> Result<LosslessSystem, SynthError> {
    let n = network.n_ports();
    let mut patterns = vec![PatternSet::new(); n];
    for (&f, s) in network.frequencies_hz().iter().zip(network.matrices()) {
        let modes = orthonormal_modes(n, grid, f)?;
        let d = symmetrize(&(CMatrix::identity(n, n) - s.adjoint() * s));
        // C = D^(1/2) is Hermitian, so Cᴴ C = D.
        let c = psd_sqrt(&d);
        for (i, set) in patterns.iter_mut().enumerate() {
            let refs: Vec<&FarFieldPattern> = modes.iter().collect();
            let weights: Vec<Complex64> = (0..n).map(|m| c[(m, i)]).collect();
            let combined = FarFieldPattern::combine(&refs, &weights)?;
            let pattern = FarFieldPattern::new(
                f,
                grid.clone(),
                combined.e_theta().to_vec(),
                combined.e_phi().to_vec(),
            )?;
            set.insert(pattern)?;
        }
    }
    Ok(LosslessSystem { network, patterns })
}

/// `count` patterns orthonormal under the grid's quadrature, built from
/// low-order trigonometric products by Gram-Schmidt (two passes).
fn orthonormal_modes(count: usize, grid: &SphericalGrid, frequency_hz: f64) -> Result<Vec<FarFieldPattern>, SynthError> {
    let mut modes: Vec<FarFieldPattern> = Vec::with_capacity(count);
    'candidates: for component in 0..2 {
        for order in 0..=3u32 {
            for use_sin in [false, true] {
                for power in 0..=2i32 {
                    if modes.len() == count {
                        break 'candidates;
                    }
                    let raw = FarFieldPattern::from_fn(frequency_hz, grid.clone(), |t, p| {
                        let ang = order as f64 * p;
                        let az = if use_sin { ang.sin() } else { ang.cos() };
                        let v = Complex64::new(0.1 * t.sin() * t.cos().powi(power) * az, 0.0);
                        if component == 0 {
                            (v, Complex64::default())
                        } else {
                            (Complex64::default(), v)
                        }
                    })?;
                    if let Some(mode) = orthonormalize(raw, &modes)? {
                        modes.push(mode);
                    }
                }
            }
        }
    }
    if modes.len() < count {
        return Err(SynthError::TooFewModes(count));
    }
    Ok(modes)
}

fn orthonormalize(mut v: FarFieldPattern, basis: &[FarFieldPattern]) -> Result<Option<FarFieldPattern>, SynthError> {
    let start = v.efficiency().sqrt();
    for _ in 0..2 {
        let mut weights = vec![Complex64::new(1.0, 0.0)];
        let mut refs = vec![&v];
        for b in basis {
            weights.push(-integrate_overlap(&v, b)?);
            refs.push(b);
        }
        v = FarFieldPattern::combine(&refs, &weights)?;
    }
    let norm = v.efficiency().sqrt();
    if norm.is_nan() || norm <= 1e-6 * start.max(1e-300) {
        return Ok(None);
    }
    let refs = [&v];
    Ok(Some(FarFieldPattern::combine(&refs, &[Complex64::new(1.0 / norm, 0.0)])?))
}

//! Radiation matrices from scattering parameters and from far-field patterns.
//!
//! For a cluster driven through its active ports, the radiation matrix `D`
//! gives the delivered power fraction as the quadratic form `aᴴ D a`. From
//! scattering data `D = I - S_subᴴ S_sub`, where `S_sub` keeps only the
//! active-port columns. Keeping every row also charges power coupled into
//! the device's other ports; keeping only the cluster rows yields the
//! matching efficiency alone.

use num_complex::Complex64;
use thiserror::Error;

use crate::ffpattern::{integrate_overlap, FarFieldPattern, PatternError};
use crate::linalg::{hermitian_defect, symmetrize, CMatrix, HermitianEigen};
use crate::touchstone::Network;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const EIGEN_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum RadMatrixError {
    #[error("frequency index {index} out of range ({len} points)")]
    FrequencyIndex { index: usize, len: usize },
    #[error("cluster `{cluster}` references port {port}, device has {n_ports}")]
    PortOutOfRange {
        cluster: String,
        port: usize,
        n_ports: usize,
    },
    #[error("cluster `{0}` has no active ports")]
    EmptyCluster(String),
    #[error("cluster `{cluster}` lists port {port} twice")]
    DuplicatePort { cluster: String, port: usize },
    #[error("cluster `{cluster}` declares {declared} device ports, network has {actual}")]
    DeviceSize {
        cluster: String,
        declared: usize,
        actual: usize,
    },
    #[error("non-finite matrix entry")]
    NonFinite,
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("matrix is not Hermitian (max |d - dᴴ| = {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not positive semidefinite (smallest eigenvalue {0:e})")]
    NotPositive(f64),
    #[error("matrix has an eigenvalue above one ({0}); the data is not passive")]
    NotPassive(f64),
    #[error("no patterns supplied")]
    NoPatterns,
    #[error(transparent)]
    Pattern(#[from] PatternError),
}

/// Which rows of the scattering matrix enter `D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scope {
    /// Rows of the cluster's own ports only: matching efficiency.
    ClusterOnly,
    /// Every device row: mismatch and coupling to other antennas.
    AllRows,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixSource {
    Scattering(Scope),
    FarField,
}

/// Hermitian PSD matrix whose quadratic form gives cluster efficiency.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiationMatrix {
    frequency_hz: f64,
    d: CMatrix,
    source: MatrixSource,
}

impl RadiationMatrix {
    /// Validates the Hermitian and PSD invariants, plus `eig <= 1` for
    /// scattering-derived matrices. Field-derived matrices may exceed one when
    /// the patterns are not physically consistent (for example two copies of
    /// the same unit-efficiency pattern); see [`RadiationMatrix::is_passive`].
    pub fn new(frequency_hz: f64, d: CMatrix, source: MatrixSource) -> Result<Self, RadMatrixError> {
        if d.nrows() != d.ncols() {
            return Err(RadMatrixError::NotSquare(d.nrows(), d.ncols()));
        }
        if d.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(RadMatrixError::NonFinite);
        }
        let defect = hermitian_defect(&d);
        if defect >= HERMITIAN_TOL {
            return Err(RadMatrixError::NotHermitian(defect));
        }
        let eig = HermitianEigen::new(&symmetrize(&d));
        if eig.min() < -EIGEN_TOL {
            return Err(RadMatrixError::NotPositive(eig.min()));
        }
        if matches!(source, MatrixSource::Scattering(_)) && eig.max() > 1.0 + EIGEN_TOL {
            return Err(RadMatrixError::NotPassive(eig.max()));
        }
        Ok(Self {
            frequency_hz,
            d,
            source,
        })
    }

    pub fn frequency_hz(&self) -> f64 {
        self.frequency_hz
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.d
    }

    pub fn source(&self) -> MatrixSource {
        self.source
    }

    pub fn dim(&self) -> usize {
        self.d.nrows()
    }

    /// Matching-only matrices come from cluster-row scattering data.
    pub fn is_matching_only(&self) -> bool {
        self.source == MatrixSource::Scattering(Scope::ClusterOnly)
    }

    /// All eigenvalues are at most `1 + 1e-9`.
    pub fn is_passive(&self) -> bool {
        self.eigen().max() <= 1.0 + EIGEN_TOL
    }

    pub fn eigen(&self) -> HermitianEigen {
        HermitianEigen::new(&self.d)
    }
}

/// Ports driven together as one cluster. Port numbers are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterDefinition {
    id: String,
    active_ports: Vec<usize>,
    all_ports: usize,
}

impl ClusterDefinition {
    pub fn new(id: impl Into<String>, active_ports: Vec<usize>, all_ports: usize) -> Result<Self, RadMatrixError> {
        let id = id.into();
        if active_ports.is_empty() {
            return Err(RadMatrixError::EmptyCluster(id));
        }
        for (i, &p) in active_ports.iter().enumerate() {
            if p == 0 || p > all_ports {
                return Err(RadMatrixError::PortOutOfRange {
                    cluster: id,
                    port: p,
                    n_ports: all_ports,
                });
            }
            if active_ports[..i].contains(&p) {
                return Err(RadMatrixError::DuplicatePort { cluster: id, port: p });
            }
        }
        Ok(Self {
            id,
            active_ports,
            all_ports,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn active_ports(&self) -> &[usize] {
        &self.active_ports
    }

    pub fn all_ports(&self) -> usize {
        self.all_ports
    }

    pub fn len(&self) -> usize {
        self.active_ports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active_ports.is_empty()
    }

    /// Zero-based port indices.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.active_ports.iter().map(|p| p - 1)
    }

    pub(crate) fn check_network(&self, net: &Network) -> Result<(), RadMatrixError> {
        if self.all_ports != net.n_ports() {
            return Err(RadMatrixError::DeviceSize {
                cluster: self.id.clone(),
                declared: self.all_ports,
                actual: net.n_ports(),
            });
        }
        Ok(())
    }
}

/// `D = I_k - S_subᴴ S_sub` for the cluster's active columns.
pub fn radiation_matrix_from_s(
    net: &Network,
    cluster: &ClusterDefinition,
    freq_index: usize,
    scope: Scope,
) -> Result<RadiationMatrix, RadMatrixError> {
    cluster.check_network(net)?;
    let s = net.s(freq_index).ok_or(RadMatrixError::FrequencyIndex {
        index: freq_index,
        len: net.len(),
    })?;
    let cols: Vec<usize> = cluster.indices().collect();
    let rows: Vec<usize> = match scope {
        Scope::AllRows => (0..net.n_ports()).collect(),
        Scope::ClusterOnly => cols.clone(),
    };
    let sub = CMatrix::from_fn(rows.len(), cols.len(), |r, c| s[(rows[r], cols[c])]);
    let k = cols.len();
    let d = symmetrize(&(CMatrix::identity(k, k) - sub.adjoint() * sub));
    RadiationMatrix::new(net.frequencies_hz()[freq_index], d, MatrixSource::Scattering(scope))
}

/// `D_ij = (1/4pi) iint conj(F_i) . F_j dOmega`, Hermitian-symmetrized.
///
/// The conjugate sits on the first index so that the field `sum_i a_i F_i`
/// radiates `aᴴ D a`, the same quadratic form as the scattering route.
pub fn radiation_matrix_from_fields(patterns: &[&FarFieldPattern]) -> Result<RadiationMatrix, RadMatrixError> {
    let first = patterns.first().ok_or(RadMatrixError::NoPatterns)?;
    let k = patterns.len();
    let mut d = CMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let v: Complex64 = integrate_overlap(patterns[j], patterns[i])?;
            d[(i, j)] = v;
            d[(j, i)] = v.conj();
        }
    }
    let d = symmetrize(&d);
    RadiationMatrix::new(first.frequency_hz(), d, MatrixSource::FarField)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffpattern::SphericalGrid;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn one_freq(s: CMatrix) -> Network {
        Network::new(vec![1e9], vec![s], 50.0).unwrap()
    }

    #[test]
    fn zero_network_gives_identity() {
        let net = one_freq(CMatrix::zeros(4, 4));
        let cl = ClusterDefinition::new("a", vec![2, 3], 4).unwrap();
        for scope in [Scope::AllRows, Scope::ClusterOnly] {
            let d = radiation_matrix_from_s(&net, &cl, 0, scope).unwrap();
            assert_eq!(d.matrix(), &CMatrix::identity(2, 2));
        }
    }

    #[test]
    fn partial_columns_keep_all_rows() {
        let mut s = CMatrix::zeros(2, 2);
        s[(0, 0)] = c(0.5);
        s[(1, 0)] = c(0.5);
        let net = one_freq(s);
        let cl = ClusterDefinition::new("a", vec![1], 2).unwrap();
        let all = radiation_matrix_from_s(&net, &cl, 0, Scope::AllRows).unwrap();
        assert!((all.matrix()[(0, 0)] - c(0.5)).norm() < 1e-15);
        let own = radiation_matrix_from_s(&net, &cl, 0, Scope::ClusterOnly).unwrap();
        assert!((own.matrix()[(0, 0)] - c(0.75)).norm() < 1e-15);
        assert!(own.is_matching_only());
        assert!(!all.is_matching_only());
    }

    #[test]
    fn full_reflection_gives_zero() {
        let net = one_freq(CMatrix::identity(3, 3));
        let cl = ClusterDefinition::new("a", vec![1, 2, 3], 3).unwrap();
        let d = radiation_matrix_from_s(&net, &cl, 0, Scope::AllRows).unwrap();
        assert!(d.matrix().norm() < 1e-15);
    }

    #[test]
    fn errors() {
        let net = one_freq(CMatrix::zeros(2, 2));
        let cl = ClusterDefinition::new("a", vec![1], 2).unwrap();
        assert_eq!(
            radiation_matrix_from_s(&net, &cl, 3, Scope::AllRows),
            Err(RadMatrixError::FrequencyIndex { index: 3, len: 1 })
        );
        let wrong = ClusterDefinition::new("b", vec![1], 3).unwrap();
        assert!(matches!(
            radiation_matrix_from_s(&net, &wrong, 0, Scope::AllRows),
            Err(RadMatrixError::DeviceSize { .. })
        ));
        assert!(ClusterDefinition::new("c", vec![], 2).is_err());
        assert!(ClusterDefinition::new("c", vec![0], 2).is_err());
        assert!(ClusterDefinition::new("c", vec![1, 1], 2).is_err());
        assert!(ClusterDefinition::new("c", vec![3], 2).is_err());

        let active = one_freq(CMatrix::from_element(1, 1, c(1.5)));
        let one = ClusterDefinition::new("d", vec![1], 1).unwrap();
        assert!(matches!(
            radiation_matrix_from_s(&active, &one, 0, Scope::AllRows),
            Err(RadMatrixError::NotPositive(_))
        ));
    }

    #[test]
    fn invariant_checks() {
        let mut d = CMatrix::identity(2, 2);
        d[(0, 1)] = Complex64::new(0.0, 0.1);
        assert!(matches!(
            RadiationMatrix::new(1.0, d, MatrixSource::FarField),
            Err(RadMatrixError::NotHermitian(_))
        ));
        let hot = CMatrix::identity(2, 2).scale(1.01);
        assert!(matches!(
            RadiationMatrix::new(1.0, hot.clone(), MatrixSource::Scattering(Scope::AllRows)),
            Err(RadMatrixError::NotPassive(_))
        ));
        assert!(!RadiationMatrix::new(1.0, hot, MatrixSource::FarField).unwrap().is_passive());
    }

    #[test]
    fn scaled_pattern_efficiency() {
        let grid = SphericalGrid::with_steps(5.0, 5.0).unwrap();
        let p = FarFieldPattern::from_fn(1e9, grid, |_, _| (c(0.6f64.sqrt()), Complex64::default())).unwrap();
        let d = radiation_matrix_from_fields(&[&p]).unwrap();
        assert!((d.matrix()[(0, 0)] - c(0.6)).norm() < 1e-12);
        assert_eq!(d.source(), MatrixSource::FarField);
    }

    #[test]
    fn identical_patterns_fully_overlap() {
        let grid = SphericalGrid::with_steps(5.0, 5.0).unwrap();
        let p = FarFieldPattern::from_fn(1e9, grid, |t, _| (c(1.5f64.sqrt() * t.sin()), Complex64::default()))
            .unwrap();
        let d = radiation_matrix_from_fields(&[&p, &p]).unwrap();
        for z in d.matrix().iter() {
            assert!((z - c(1.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn field_matrix_conjugation_order() {
        // F_2 = i F_1: D_12 = <conj F_1, F_2> = i
        let grid = SphericalGrid::with_steps(10.0, 10.0).unwrap();
        let one = FarFieldPattern::from_fn(1e9, grid.clone(), |_, _| (c(0.5), Complex64::default())).unwrap();
        let two = FarFieldPattern::from_fn(1e9, grid, |_, _| (Complex64::new(0.0, 0.5), Complex64::default()))
            .unwrap();
        let d = radiation_matrix_from_fields(&[&one, &two]).unwrap();
        assert!((d.matrix()[(0, 1)] - Complex64::new(0.0, 0.25)).norm() < 1e-14);
    }
}

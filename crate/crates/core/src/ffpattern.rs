//! Far-field radiation patterns on a regular spherical grid.
//!
//! A pattern stores the complex tangential field components `(E_theta, E_phi)`
//! at every `(theta, phi)` node, normalized so that its overlap with itself
//! equals the antenna's total efficiency. The overlap integral
//!
//! ```text
//! <f_i, f_j> = 1/(4 pi) * iint (E_theta_i conj(E_theta_j) + E_phi_i conj(E_phi_j)) sin(theta) dtheta dphi
//! ```
//!
//! uses the trapezoidal rule in `phi` (periodic) and Clenshaw-Curtis weights in
//! `cos(theta)` for the polar direction. The equispaced polar nodes including
//! both poles are exactly the Chebyshev extreme points in `cos(theta)`, so the
//! polar rule integrates any band-limited pattern without truncation error.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use thiserror::Error;

/// Upper bound on a pattern's self-overlap (its total efficiency).
pub const EFFICIENCY_TOL: f64 = 1e-6;

const GRID_TOL_DEG: f64 = 1e-6;

pub const CSV_HEADER: &str = "freq_hz,theta_deg,phi_deg,re_etheta,im_etheta,re_ephi,im_ephi";

#[derive(Debug, Error, PartialEq)]
pub enum PatternError {
    #[error("grid needs at least 2 theta nodes and 1 phi node")]
    GridTooSmall,
    #[error("grid step {step_deg} deg does not divide {span_deg} deg")]
    GridStep { step_deg: f64, span_deg: f64 },
    #[error("patterns are sampled on different grids")]
    GridMismatch,
    #[error("patterns are at different frequencies ({0} Hz vs {1} Hz)")]
    FrequencyMismatch(f64, f64),
    #[error("expected {expected} field values, got {found}")]
    FieldLength { expected: usize, found: usize },
    #[error("pattern contains non-finite field values")]
    NonFinite,
    #[error("frequency must be positive and finite, got {0}")]
    Frequency(f64),
    #[error("self-overlap {0} exceeds unit efficiency")]
    NotNormalized(f64),
    #[error("mirroring needs a phi step that divides 180 deg (got {n_phi} phi nodes)")]
    MirrorAlignment { n_phi: usize },
    #[error("line {line}: {reason}")]
    Csv { line: usize, reason: String },
    #[error("line {line}: duplicate node theta={theta_deg} phi={phi_deg}")]
    DuplicateNode {
        line: usize,
        theta_deg: f64,
        phi_deg: f64,
    },
    #[error("incomplete grid at {freq_hz} Hz: missing node theta={theta_deg} phi={phi_deg}")]
    IncompleteGrid {
        freq_hz: f64,
        theta_deg: f64,
        phi_deg: f64,
    },
    #[error("non-uniform {axis} step at {freq_hz} Hz")]
    NonUniformStep { axis: &'static str, freq_hz: f64 },
    #[error("expected a single frequency, file holds {0}")]
    MultipleFrequencies(usize),
    #[error("duplicate pattern for {0} Hz")]
    DuplicateFrequency(f64),
    #[error("file holds no pattern data")]
    Empty,
}

/// Regular spherical sampling: `theta` from 0 to 180 deg inclusive, `phi`
/// from 0 up to (not including) 360 deg.
#[derive(Debug, Clone)]
pub struct SphericalGrid {
    n_theta: usize,
    n_phi: usize,
    theta_weights: Vec<f64>,
}

impl PartialEq for SphericalGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n_theta == other.n_theta && self.n_phi == other.n_phi
    }
}

impl SphericalGrid {
    pub fn with_counts(n_theta: usize, n_phi: usize) -> Result<Self, PatternError> {
        if n_theta < 2 || n_phi < 1 {
            return Err(PatternError::GridTooSmall);
        }
        Ok(Self {
            n_theta,
            n_phi,
            theta_weights: clenshaw_curtis_weights(n_theta - 1),
        })
    }

    /// Grid from angular steps in degrees; each must divide its span.
    pub fn with_steps(theta_step_deg: f64, phi_step_deg: f64) -> Result<Self, PatternError> {
        let n_theta = intervals(180.0, theta_step_deg)? + 1;
        let n_phi = intervals(360.0, phi_step_deg)?;
        Self::with_counts(n_theta, n_phi)
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn theta_step_deg(&self) -> f64 {
        180.0 / (self.n_theta - 1) as f64
    }

    pub fn phi_step_deg(&self) -> f64 {
        360.0 / self.n_phi as f64
    }

    pub fn theta_deg(&self, i: usize) -> f64 {
        180.0 * i as f64 / (self.n_theta - 1) as f64
    }

    pub fn phi_deg(&self, j: usize) -> f64 {
        360.0 * j as f64 / self.n_phi as f64
    }

    pub fn theta_rad(&self, i: usize) -> f64 {
        PI * i as f64 / (self.n_theta - 1) as f64
    }

    pub fn phi_rad(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_phi as f64
    }

    /// Flat index of node `(theta_i, phi_j)` (theta-major).
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n_phi + j
    }

    /// Polar weights for `int_0^pi f(theta) sin(theta) dtheta`.
    pub fn theta_weights(&self) -> &[f64] {
        &self.theta_weights
    }
}

fn intervals(span_deg: f64, step_deg: f64) -> Result<usize, PatternError> {
    let err = PatternError::GridStep { step_deg, span_deg };
    if !(step_deg.is_finite() && step_deg > 0.0) {
        return Err(err);
    }
    let n = span_deg / step_deg;
    let rounded = n.round();
    if rounded < 1.0 || (n - rounded).abs() > 1e-9 * n.max(1.0) {
        return Err(err);
    }
    Ok(rounded as usize)
}

/// Clenshaw-Curtis weights on the nodes `x_j = cos(j pi / n)`, `j = 0..=n`.
fn clenshaw_curtis_weights(n: usize) -> Vec<f64> {
    let nf = n as f64;
    (0..=n)
        .map(|j| {
            let c = if j == 0 || j == n { 1.0 } else { 2.0 };
            let mut acc = 1.0;
            for k in 1..=n / 2 {
                let b = if 2 * k == n { 1.0 } else { 2.0 };
                let kf = k as f64;
                acc -= b / (4.0 * kf * kf - 1.0) * (2.0 * kf * j as f64 * PI / nf).cos();
            }
            c / nf * acc
        })
        .collect()
}

/// Mirror planes of the chassis frame: long axis `x`, short axis `y`,
/// normal `z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize)]
pub enum SymmetryPlane {
    /// Reflection `y -> -y`.
    XZ,
    /// Reflection `x -> -x`.
    YZ,
}

/// Complex vector far field at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldPattern {
    frequency_hz: f64,
    grid: SphericalGrid,
    e_theta: Vec<Complex64>,
    e_phi: Vec<Complex64>,
}

impl FarFieldPattern {
    pub fn new(
        frequency_hz: f64,
        grid: SphericalGrid,
        e_theta: Vec<Complex64>,
        e_phi: Vec<Complex64>,
    ) -> Result<Self, PatternError> {
        let pattern = Self::new_unchecked(frequency_hz, grid, e_theta, e_phi)?;
        let power = integrate_overlap(&pattern, &pattern)?.re;
        if power > 1.0 + EFFICIENCY_TOL {
            return Err(PatternError::NotNormalized(power));
        }
        Ok(pattern)
    }

    /// Validates shape and finiteness but not normalization.
    fn new_unchecked(
        frequency_hz: f64,
        grid: SphericalGrid,
        e_theta: Vec<Complex64>,
        e_phi: Vec<Complex64>,
    ) -> Result<Self, PatternError> {
        if !(frequency_hz.is_finite() && frequency_hz > 0.0) {
            return Err(PatternError::Frequency(frequency_hz));
        }
        for v in [&e_theta, &e_phi] {
            if v.len() != grid.len() {
                return Err(PatternError::FieldLength {
                    expected: grid.len(),
                    found: v.len(),
                });
            }
            if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(PatternError::NonFinite);
            }
        }
        Ok(Self {
            frequency_hz,
            grid,
            e_theta,
            e_phi,
        })
    }

    /// Samples `field(theta_rad, phi_rad) -> (E_theta, E_phi)` on `grid`.
    pub fn from_fn<F>(frequency_hz: f64, grid: SphericalGrid, mut field: F) -> Result<Self, PatternError>
    where
        F: FnMut(f64, f64) -> (Complex64, Complex64),
    {
        let mut e_theta = Vec::with_capacity(grid.len());
        let mut e_phi = Vec::with_capacity(grid.len());
        for i in 0..grid.n_theta() {
            for j in 0..grid.n_phi() {
                let (et, ep) = field(grid.theta_rad(i), grid.phi_rad(j));
                e_theta.push(et);
                e_phi.push(ep);
            }
        }
        Self::new(frequency_hz, grid, e_theta, e_phi)
    }

    pub fn zeros(frequency_hz: f64, grid: SphericalGrid) -> Result<Self, PatternError> {
        let n = grid.len();
        Self::new(frequency_hz, grid, vec![Complex64::default(); n], vec![Complex64::default(); n])
    }

    pub fn frequency_hz(&self) -> f64 {
        self.frequency_hz
    }

    pub fn grid(&self) -> &SphericalGrid {
        &self.grid
    }

    pub fn e_theta(&self) -> &[Complex64] {
        &self.e_theta
    }

    pub fn e_phi(&self) -> &[Complex64] {
        &self.e_phi
    }

    /// Total efficiency: the pattern's overlap with itself.
    pub fn efficiency(&self) -> f64 {
        overlap_sum(self, self).re
    }

    /// Linear combination `sum_i w_i * patterns_i`. All patterns must share
    /// grid and frequency.
    pub fn combine(patterns: &[&FarFieldPattern], weights: &[Complex64]) -> Result<Self, PatternError> {
        let first = patterns.first().ok_or(PatternError::Empty)?;
        if weights.len() != patterns.len() {
            return Err(PatternError::FieldLength {
                expected: patterns.len(),
                found: weights.len(),
            });
        }
        let n = first.grid.len();
        let mut e_theta = vec![Complex64::default(); n];
        let mut e_phi = vec![Complex64::default(); n];
        for (p, &w) in patterns.iter().zip(weights) {
            check_compatible(first, p)?;
            for k in 0..n {
                e_theta[k] += w * p.e_theta[k];
                e_phi[k] += w * p.e_phi[k];
            }
        }
        Self::new_unchecked(first.frequency_hz, first.grid.clone(), e_theta, e_phi)
    }
}

fn check_compatible(a: &FarFieldPattern, b: &FarFieldPattern) -> Result<(), PatternError> {
    if a.grid != b.grid {
        return Err(PatternError::GridMismatch);
    }
    if a.frequency_hz != b.frequency_hz {
        return Err(PatternError::FrequencyMismatch(a.frequency_hz, b.frequency_hz));
    }
    Ok(())
}

fn overlap_sum(a: &FarFieldPattern, b: &FarFieldPattern) -> Complex64 {
    let grid = &a.grid;
    let n_phi = grid.n_phi();
    let mut total = Complex64::default();
    for (i, &w) in grid.theta_weights().iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let mut ring = Complex64::default();
        let start = i * n_phi;
        for k in start..start + n_phi {
            ring += a.e_theta[k] * b.e_theta[k].conj() + a.e_phi[k] * b.e_phi[k].conj();
        }
        total += ring * w;
    }
    // (1 / 4 pi) * (2 pi / n_phi)
    total / (2.0 * n_phi as f64)
}

/// `(1/4pi) iint f_i . conj(f_j) dOmega` over the full sphere.
pub fn integrate_overlap(f_i: &FarFieldPattern, f_j: &FarFieldPattern) -> Result<Complex64, PatternError> {
    check_compatible(f_i, f_j)?;
    Ok(overlap_sum(f_i, f_j))
}

/// Reflects a pattern through a chassis symmetry plane. The `E_phi`
/// component changes sign because `phi_hat` reverses under the reflection.
pub fn mirror_pattern(f: &FarFieldPattern, plane: SymmetryPlane) -> Result<FarFieldPattern, PatternError> {
    let grid = &f.grid;
    let n_phi = grid.n_phi();
    if !n_phi.is_multiple_of(2) {
        return Err(PatternError::MirrorAlignment { n_phi });
    }
    let source_phi = |j: usize| match plane {
        SymmetryPlane::XZ => (n_phi - j) % n_phi,
        SymmetryPlane::YZ => (n_phi / 2 + n_phi - j) % n_phi,
    };
    let mut e_theta = Vec::with_capacity(grid.len());
    let mut e_phi = Vec::with_capacity(grid.len());
    for i in 0..grid.n_theta() {
        for j in 0..n_phi {
            let k = grid.index(i, source_phi(j));
            e_theta.push(f.e_theta[k]);
            e_phi.push(-f.e_phi[k]);
        }
    }
    FarFieldPattern::new_unchecked(f.frequency_hz, grid.clone(), e_theta, e_phi)
}

/// Patterns of one antenna port at several frequencies, keyed by exact
/// frequency.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PatternSet {
    patterns: Vec<FarFieldPattern>,
}

impl PatternSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, pattern: FarFieldPattern) -> Result<(), PatternError> {
        let f = pattern.frequency_hz;
        match self.patterns.binary_search_by(|p| p.frequency_hz.total_cmp(&f)) {
            Ok(_) => Err(PatternError::DuplicateFrequency(f)),
            Err(pos) => {
                self.patterns.insert(pos, pattern);
                Ok(())
            }
        }
    }

    /// Exact-match lookup; no interpolation.
    pub fn get(&self, frequency_hz: f64) -> Option<&FarFieldPattern> {
        self.patterns
            .binary_search_by(|p| p.frequency_hz.total_cmp(&frequency_hz))
            .ok()
            .map(|i| &self.patterns[i])
    }

    pub fn frequencies_hz(&self) -> Vec<f64> {
        self.patterns.iter().map(|p| p.frequency_hz).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &FarFieldPattern> {
        self.patterns.iter()
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn mirrored(&self, plane: SymmetryPlane) -> Result<Self, PatternError> {
        Ok(Self {
            patterns: self
                .patterns
                .iter()
                .map(|p| mirror_pattern(p, plane))
                .collect::<Result<_, _>>()?,
        })
    }
}

impl FromIterator<FarFieldPattern> for Result<PatternSet, PatternError> {
    fn from_iter<I: IntoIterator<Item = FarFieldPattern>>(iter: I) -> Self {
        let mut set = PatternSet::new();
        for p in iter {
            set.insert(p)?;
        }
        Ok(set)
    }
}

struct CsvRow {
    line: usize,
    theta: f64,
    phi: f64,
    e_theta: Complex64,
    e_phi: Complex64,
}

/// Parses a pattern CSV that may hold several frequencies.
pub fn parse_pattern_set(text: &str) -> Result<PatternSet, PatternError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    match lines.next() {
        Some((_, header)) if header.replace(' ', "") == CSV_HEADER => {}
        Some((line, _)) => {
            return Err(PatternError::Csv {
                line,
                reason: format!("expected header `{CSV_HEADER}`"),
            })
        }
        None => return Err(PatternError::Empty),
    }

    let mut groups: Vec<(f64, Vec<CsvRow>)> = Vec::new();
    for (line, content) in lines {
        let fields: Vec<&str> = content.split(',').map(str::trim).collect();
        if fields.len() != 7 {
            return Err(PatternError::Csv {
                line,
                reason: format!("expected 7 fields, found {}", fields.len()),
            });
        }
        let mut v = [0.0; 7];
        for (slot, field) in v.iter_mut().zip(&fields) {
            *slot = field.parse().map_err(|_| PatternError::Csv {
                line,
                reason: format!("invalid number `{field}`"),
            })?;
        }
        let row = CsvRow {
            line,
            theta: v[1],
            phi: v[2],
            e_theta: Complex64::new(v[3], v[4]),
            e_phi: Complex64::new(v[5], v[6]),
        };
        match groups.iter_mut().find(|(f, _)| *f == v[0]) {
            Some((_, rows)) => rows.push(row),
            None => groups.push((v[0], vec![row])),
        }
    }
    if groups.is_empty() {
        return Err(PatternError::Empty);
    }
    groups
        .into_iter()
        .map(|(f, rows)| assemble(f, rows))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .collect()
}

/// Parses a pattern CSV holding exactly one frequency.
pub fn parse_pattern_file(text: &str) -> Result<FarFieldPattern, PatternError> {
    let set = parse_pattern_set(text)?;
    if set.len() != 1 {
        return Err(PatternError::MultipleFrequencies(set.len()));
    }
    Ok(set.patterns.into_iter().next().expect("one pattern"))
}

fn distinct_sorted(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() < GRID_TOL_DEG);
    v
}

fn assemble(freq_hz: f64, rows: Vec<CsvRow>) -> Result<FarFieldPattern, PatternError> {
    let thetas = distinct_sorted(rows.iter().map(|r| r.theta));
    let phis = distinct_sorted(rows.iter().map(|r| r.phi));
    let n_theta = thetas.len();
    let n_phi = phis.len();
    if n_theta < 2 {
        return Err(PatternError::NonUniformStep { axis: "theta", freq_hz });
    }
    let grid = SphericalGrid::with_counts(n_theta, n_phi)?;
    if thetas
        .iter()
        .enumerate()
        .any(|(i, &t)| (t - grid.theta_deg(i)).abs() > GRID_TOL_DEG)
    {
        return Err(PatternError::NonUniformStep { axis: "theta", freq_hz });
    }
    if phis
        .iter()
        .enumerate()
        .any(|(j, &p)| (p - grid.phi_deg(j)).abs() > GRID_TOL_DEG)
    {
        return Err(PatternError::NonUniformStep { axis: "phi", freq_hz });
    }

    let mut filled = vec![false; grid.len()];
    let mut e_theta = vec![Complex64::default(); grid.len()];
    let mut e_phi = vec![Complex64::default(); grid.len()];
    for row in rows {
        let i = (row.theta / grid.theta_step_deg()).round() as usize;
        let j = (row.phi / grid.phi_step_deg()).round() as usize;
        let k = grid.index(i, j);
        if filled[k] {
            return Err(PatternError::DuplicateNode {
                line: row.line,
                theta_deg: row.theta,
                phi_deg: row.phi,
            });
        }
        filled[k] = true;
        e_theta[k] = row.e_theta;
        e_phi[k] = row.e_phi;
    }
    if let Some(k) = filled.iter().position(|&f| !f) {
        return Err(PatternError::IncompleteGrid {
            freq_hz,
            theta_deg: grid.theta_deg(k / n_phi),
            phi_deg: grid.phi_deg(k % n_phi),
        });
    }
    FarFieldPattern::new(freq_hz, grid, e_theta, e_phi)
}

/// Writes one or more patterns as CSV rows in theta-major order.
pub fn write_pattern_file<'a>(patterns: impl IntoIterator<Item = &'a FarFieldPattern>) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for p in patterns {
        let grid = &p.grid;
        for i in 0..grid.n_theta() {
            for j in 0..grid.n_phi() {
                let k = grid.index(i, j);
                let (et, ep) = (p.e_theta[k], p.e_phi[k]);
                let _ = writeln!(
                    out,
                    "{:e},{},{},{:e},{:e},{:e},{:e}",
                    p.frequency_hz,
                    grid.theta_deg(i),
                    grid.phi_deg(j),
                    et.re,
                    et.im,
                    ep.re,
                    ep.im
                );
            }
        }
    }
    out
}

//! Touchstone v1.x scattering-parameter files and the in-memory [`Network`].
//!
//! Supported: `# <unit> S <RI|MA|DB> R <z0>` option lines, `!` comments, the
//! 2-port `S11 S21 S12 S22` column order, and row-wrapped data for 3 or more
//! ports (each matrix row begins on a new line, at most four pairs per line).

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{max_singular_value, CMatrix};

/// Tolerance on the largest singular value when flagging a network as passive.
pub const PASSIVITY_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum TouchstoneError {
    #[error("line {line}: malformed option line: {reason}")]
    MalformedOption { line: usize, reason: String },
    #[error("line {line}: unsupported parameter type `{param}` (only S parameters are supported)")]
    UnsupportedParameter { line: usize, param: String },
    #[error("line {line}: Touchstone v2 keyword `{keyword}` is not supported")]
    UnsupportedVersion { line: usize, keyword: String },
    #[error("line {line}: noise-parameter data is not supported")]
    NoiseData { line: usize },
    #[error("line {line}: expected {expected} values for this frequency, found {found}")]
    ValueCount {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: frequency {freq_hz} Hz does not increase over the previous point")]
    NonMonotonicFrequency { line: usize, freq_hz: f64 },
    #[error("line {line}: frequency must be positive, got {freq_hz} Hz")]
    NonPositiveFrequency { line: usize, freq_hz: f64 },
    #[error("line {line}: invalid number `{token}`")]
    InvalidNumber { line: usize, token: String },
    #[error("line {line}: non-finite scattering parameter")]
    NonFinite { line: usize },
    #[error("cannot determine port count from the data")]
    PortCount,
    #[error("file contains no frequency data")]
    NoData,
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Error, PartialEq)]
pub enum NetworkError {
    #[error("network needs at least one port")]
    NoPorts,
    #[error("reference impedance must be positive and finite, got {0}")]
    Impedance(f64),
    #[error("{frequencies} frequencies but {matrices} matrices")]
    Length { frequencies: usize, matrices: usize },
    #[error("frequency index {index}: expected {expected}x{expected} matrix, got {rows}x{cols}")]
    Shape {
        index: usize,
        expected: usize,
        rows: usize,
        cols: usize,
    },
    #[error("frequency index {0}: non-finite entry")]
    NonFinite(usize),
    #[error("frequency index {0}: frequencies must be positive and strictly increasing")]
    Frequency(usize),
}

/// Frequency-indexed scattering matrices of an n-port.
///
/// `s[f][(row, col)]` is the wave observed at port `row + 1` when port
/// `col + 1` is excited.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    frequencies_hz: Vec<f64>,
    s: Vec<CMatrix>,
    z0_ohm: f64,
    n_ports: usize,
}

impl Network {
    pub fn new(frequencies_hz: Vec<f64>, s: Vec<CMatrix>, z0_ohm: f64) -> Result<Self, NetworkError> {
        if frequencies_hz.len() != s.len() {
            return Err(NetworkError::Length {
                frequencies: frequencies_hz.len(),
                matrices: s.len(),
            });
        }
        if !(z0_ohm.is_finite() && z0_ohm > 0.0) {
            return Err(NetworkError::Impedance(z0_ohm));
        }
        let n_ports = s.first().map(|m| m.nrows()).unwrap_or(0);
        if n_ports == 0 {
            return Err(NetworkError::NoPorts);
        }
        let mut previous = 0.0;
        for (index, (&f, m)) in frequencies_hz.iter().zip(&s).enumerate() {
            if !(f.is_finite() && f > previous) {
                return Err(NetworkError::Frequency(index));
            }
            previous = f;
            if m.nrows() != n_ports || m.ncols() != n_ports {
                return Err(NetworkError::Shape {
                    index,
                    expected: n_ports,
                    rows: m.nrows(),
                    cols: m.ncols(),
                });
            }
            if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(NetworkError::NonFinite(index));
            }
        }
        Ok(Self {
            frequencies_hz,
            s,
            z0_ohm,
            n_ports,
        })
    }

    pub fn frequencies_hz(&self) -> &[f64] {
        &self.frequencies_hz
    }

    pub fn s(&self, freq_index: usize) -> Option<&CMatrix> {
        self.s.get(freq_index)
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.s
    }

    pub fn z0_ohm(&self) -> f64 {
        self.z0_ohm
    }

    pub fn n_ports(&self) -> usize {
        self.n_ports
    }

    pub fn len(&self) -> usize {
        self.frequencies_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies_hz.is_empty()
    }

    /// True when every matrix has largest singular value `<= 1 + 1e-9`.
    pub fn is_passive(&self) -> bool {
        self.s
            .iter()
            .all(|m| max_singular_value(m) <= 1.0 + PASSIVITY_TOL)
    }
}

/// Complex number encoding used on Touchstone data lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    /// Real, imaginary.
    Ri,
    /// Linear magnitude, angle in degrees.
    Ma,
    /// Magnitude in dB (`20 log10`), angle in degrees.
    Db,
}

impl DataFormat {
    fn keyword(self) -> &'static str {
        match self {
            DataFormat::Ri => "RI",
            DataFormat::Ma => "MA",
            DataFormat::Db => "DB",
        }
    }

    fn decode(self, a: f64, b: f64) -> Complex64 {
        match self {
            DataFormat::Ri => Complex64::new(a, b),
            DataFormat::Ma => Complex64::from_polar(a, b.to_radians()),
            DataFormat::Db => Complex64::from_polar(10f64.powf(a / 20.0), b.to_radians()),
        }
    }

    fn encode(self, z: Complex64) -> (f64, f64) {
        match self {
            DataFormat::Ri => (z.re, z.im),
            DataFormat::Ma => (z.norm(), z.arg().to_degrees()),
            DataFormat::Db => (20.0 * z.norm().log10(), z.arg().to_degrees()),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct OptionLine {
    exponent: i32,
    format: DataFormat,
    z0: f64,
}

impl Default for OptionLine {
    fn default() -> Self {
        Self {
            exponent: 9,
            format: DataFormat::Ma,
            z0: 50.0,
        }
    }
}

fn parse_option_line(body: &str, line: usize) -> Result<OptionLine, TouchstoneError> {
    let malformed = |reason: String| TouchstoneError::MalformedOption { line, reason };
    let mut opt = OptionLine::default();
    let mut tokens = body.split_whitespace();
    while let Some(tok) = tokens.next() {
        match tok.to_ascii_uppercase().as_str() {
            "HZ" => opt.exponent = 0,
            "KHZ" => opt.exponent = 3,
            "MHZ" => opt.exponent = 6,
            "GHZ" => opt.exponent = 9,
            "S" => {}
            p @ ("Y" | "Z" | "H" | "G") => {
                return Err(TouchstoneError::UnsupportedParameter {
                    line,
                    param: p.to_string(),
                })
            }
            "RI" => opt.format = DataFormat::Ri,
            "MA" => opt.format = DataFormat::Ma,
            "DB" => opt.format = DataFormat::Db,
            "R" => {
                let value = tokens
                    .next()
                    .ok_or_else(|| malformed("`R` without a resistance value".into()))?;
                let z0: f64 = value
                    .parse()
                    .map_err(|_| malformed(format!("invalid reference resistance `{value}`")))?;
                if !(z0.is_finite() && z0 > 0.0) {
                    return Err(malformed(format!("reference resistance must be positive, got {z0}")));
                }
                opt.z0 = z0;
            }
            _ => return Err(malformed(format!("unknown token `{tok}`"))),
        }
    }
    Ok(opt)
}

/// Parses a decimal literal scaled by `10^exponent` without an intermediate
/// multiplication, so `2.4 GHz` and `2400000000 Hz` give the same `f64`.
fn parse_scaled(token: &str, exponent: i32) -> Option<f64> {
    if exponent == 0 {
        return token.parse().ok();
    }
    let (mantissa, exp) = match token.find(['e', 'E']) {
        Some(pos) => (&token[..pos], token[pos + 1..].parse::<i32>().ok()?),
        None => (token, 0),
    };
    mantissa.parse::<f64>().ok()?;
    format!("{mantissa}e{}", exp + exponent).parse().ok()
}

struct DataLine {
    line: usize,
    tokens: Vec<String>,
}

/// Resolves the port count from a file name such as `device.s8p`.
pub fn port_count_from_path(path: &Path) -> Option<usize> {
    let ext = path.extension()?.to_str()?.to_ascii_lowercase();
    let digits = ext.strip_prefix('s')?.strip_suffix('p')?;
    digits.parse().ok().filter(|&n| n > 0)
}

/// Parses Touchstone v1.x text. Port count comes from `n_ports_hint` when
/// given, otherwise from the arity of the first frequency block.
pub fn parse_touchstone(text: &str, n_ports_hint: Option<usize>) -> Result<Network, TouchstoneError> {
    let mut option: Option<OptionLine> = None;
    let mut data: Vec<DataLine> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('!').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('[') {
            let keyword = content.split(']').next().unwrap_or(content).to_string() + "]";
            return Err(TouchstoneError::UnsupportedVersion { line, keyword });
        }
        if let Some(body) = content.strip_prefix('#') {
            if !data.is_empty() {
                return Err(TouchstoneError::MalformedOption {
                    line,
                    reason: "option line after data".into(),
                });
            }
            // Only the first option line counts.
            if option.is_none() {
                option = Some(parse_option_line(body, line)?);
            }
            continue;
        }
        data.push(DataLine {
            line,
            tokens: content.split_whitespace().map(str::to_string).collect(),
        });
    }

    let opt = option.unwrap_or_default();
    if data.is_empty() {
        return Err(TouchstoneError::NoData);
    }
    let n_ports = match n_ports_hint {
        Some(0) => return Err(TouchstoneError::PortCount),
        Some(n) => n,
        None => infer_port_count(&data)?,
    };
    let expected = 2 * n_ports * n_ports;

    let mut frequencies = Vec::new();
    let mut matrices = Vec::new();
    let mut cursor = 0;
    while cursor < data.len() {
        let head = &data[cursor];
        if n_ports == 2 && head.tokens.len() == 5 {
            return Err(TouchstoneError::NoiseData { line: head.line });
        }
        let freq_tok = &head.tokens[0];
        let freq_hz = parse_scaled(freq_tok, opt.exponent).ok_or_else(|| TouchstoneError::InvalidNumber {
            line: head.line,
            token: freq_tok.clone(),
        })?;
        let mut values: Vec<f64> = Vec::with_capacity(expected);
        push_numbers(&mut values, &head.tokens[1..], head.line)?;
        cursor += 1;
        while values.len() < expected && cursor < data.len() {
            let next = &data[cursor];
            // An odd token count marks a new frequency line.
            if next.tokens.len() % 2 == 1 {
                break;
            }
            push_numbers(&mut values, &next.tokens, next.line)?;
            cursor += 1;
        }
        if values.len() != expected {
            return Err(TouchstoneError::ValueCount {
                line: head.line,
                expected,
                found: values.len(),
            });
        }
        if freq_hz.is_nan() || freq_hz <= 0.0 {
            return Err(TouchstoneError::NonPositiveFrequency { line: head.line, freq_hz });
        }
        if let Some(&prev) = frequencies.last() {
            if freq_hz <= prev {
                return Err(TouchstoneError::NonMonotonicFrequency { line: head.line, freq_hz });
            }
        }

        let mut m = CMatrix::zeros(n_ports, n_ports);
        for (k, pair) in values.chunks_exact(2).enumerate() {
            let (row, col) = if n_ports == 2 {
                // S11 S21 S12 S22
                (k % 2, k / 2)
            } else {
                (k / n_ports, k % n_ports)
            };
            let z = opt.format.decode(pair[0], pair[1]);
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(TouchstoneError::NonFinite { line: head.line });
            }
            m[(row, col)] = z;
        }
        frequencies.push(freq_hz);
        matrices.push(m);
    }

    Ok(Network::new(frequencies, matrices, opt.z0)?)
}

fn push_numbers(values: &mut Vec<f64>, tokens: &[String], line: usize) -> Result<(), TouchstoneError> {
    for tok in tokens {
        let v = tok.parse::<f64>().map_err(|_| TouchstoneError::InvalidNumber {
            line,
            token: tok.clone(),
        })?;
        values.push(v);
    }
    Ok(())
}

fn infer_port_count(data: &[DataLine]) -> Result<usize, TouchstoneError> {
    let first = &data[0];
    let mut count = first.tokens.len() - 1;
    for next in &data[1..] {
        if next.tokens.len() % 2 == 1 {
            break;
        }
        count += next.tokens.len();
    }
    let n = ((count / 2) as f64).sqrt().round() as usize;
    if n == 0 || 2 * n * n != count {
        return Err(TouchstoneError::PortCount);
    }
    Ok(n)
}

/// Reads a Touchstone file, taking the port count from its `.sNp` extension.
pub fn read_touchstone(path: &Path) -> std::io::Result<Result<Network, TouchstoneError>> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_touchstone(&text, port_count_from_path(path)))
}

/// Serializes a network with frequencies in Hz. Numbers use the shortest
/// representation that parses back to the same `f64`.
pub fn write_touchstone(net: &Network, format: DataFormat) -> String {
    let n = net.n_ports();
    let mut out = String::new();
    let _ = writeln!(out, "! {n}-port S-parameters");
    let _ = writeln!(out, "# HZ S {} R {}", format.keyword(), net.z0_ohm());
    for (f, m) in net.frequencies_hz().iter().zip(net.matrices()) {
        let mut line = format!("{f:e}");
        let push = |line: &mut String, z: Complex64| {
            let (a, b) = format.encode(z);
            let _ = write!(line, " {a:e} {b:e}");
        };
        match n {
            1 => push(&mut line, m[(0, 0)]),
            2 => {
                for (r, c) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                    push(&mut line, m[(r, c)]);
                }
            }
            _ => {
                for r in 0..n {
                    for c in 0..n {
                        if c > 0 && c % 4 == 0 || c == 0 && r > 0 {
                            out.push_str(&line);
                            out.push('\n');
                            line = String::from(" ");
                        }
                        push(&mut line, m[(r, c)]);
                    }
                }
            }
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
}

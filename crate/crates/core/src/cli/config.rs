//! Analysis configuration: a TOML file naming the Touchstone data, the
//! cluster layout and, optionally, the far-field pattern files.
//!
//! ```toml
//! touchstone = "device.s8p"
//! pattern_dir = "patterns"
//! scope = "all-rows"          # or "cluster-only"
//! source = "farfield"         # or "scattering"
//!
//! [capacity]
//! snr_db = 20.0
//! n_samples = 10000
//! seed = 1
//! ideal_mimo = [1, 2, 4, 8]
//!
//! [[cluster]]
//! id = "top"
//! ports = [1, 2, 3, 4]
//! patterns = ["p1.csv", "p2.csv", "p3.csv", "p4.csv"]
//!
//! [[cluster]]
//! id = "bottom"
//! ports = [5, 6, 7, 8]
//! mirror_of = "top"
//! mirror = ["YZ"]
//! ```
//!
//! Relative paths are resolved against the directory holding the config.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::ffpattern::{parse_pattern_set, PatternSet, SymmetryPlane};
use crate::mimoeval::{check_partition, CapacityConfig};
use crate::radmatrix::{ClusterDefinition, MatrixSource, Scope};
use crate::touchstone::{read_touchstone, Network};

use super::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    touchstone: PathBuf,
    pattern_dir: Option<PathBuf>,
    scope: Option<Scope>,
    source: Option<RawSource>,
    #[serde(default)]
    capacity: RawCapacity,
    #[serde(rename = "cluster", default)]
    clusters: Vec<RawCluster>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawSource {
    Scattering,
    Farfield,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCapacity {
    snr_db: Option<f64>,
    n_samples: Option<usize>,
    seed: Option<u64>,
    n_tx: Option<usize>,
    ideal_mimo: Option<Vec<usize>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCluster {
    id: String,
    ports: Vec<usize>,
    patterns: Option<Vec<PathBuf>>,
    mirror_of: Option<String>,
    #[serde(default)]
    mirror: Vec<SymmetryPlane>,
}

/// Capacity settings before the cluster count is known.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacitySettings {
    pub snr_db: f64,
    pub n_samples: usize,
    pub seed: u64,
    /// Defaults to the number of clusters.
    pub n_tx: Option<usize>,
    pub ideal_mimo: Vec<usize>,
}

impl CapacitySettings {
    pub fn config(&self, n_clusters: usize) -> CapacityConfig {
        CapacityConfig {
            snr_db: self.snr_db,
            n_tx: self.n_tx.unwrap_or(n_clusters),
            n_samples: self.n_samples,
            seed: self.seed,
        }
    }
}

/// Fully loaded and validated analysis inputs.
#[derive(Debug, Clone)]
pub struct AnalysisConfig {
    pub network: Network,
    pub clusters: Vec<ClusterDefinition>,
    /// Per cluster, one pattern set per active port. `None` when the config
    /// has no field data.
    pub patterns: Option<Vec<Vec<PatternSet>>>,
    pub scope: Scope,
    /// Radiation matrix used to compute the feed weights.
    pub source: MatrixSource,
    pub capacity: CapacitySettings,
}

impl AnalysisConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let raw: RawConfig =
            toml::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_raw(raw, base)
    }

    pub fn cluster_index(&self, id: &str) -> Option<usize> {
        self.clusters.iter().position(|c| c.id() == id)
    }

    pub fn has_field_data(&self) -> bool {
        self.patterns.is_some()
    }

    fn from_raw(raw: RawConfig, base: &Path) -> Result<Self, CliError> {
        let ts_path = base.join(&raw.touchstone);
        let network = read_touchstone(&ts_path)
            .map_err(|e| CliError::io(&ts_path, e))?
            .map_err(|e| CliError::Validation(format!("{}: {e}", ts_path.display())))?;

        if raw.clusters.is_empty() {
            return Err(CliError::Validation("config defines no [[cluster]]".into()));
        }
        let mut clusters = Vec::with_capacity(raw.clusters.len());
        for rc in &raw.clusters {
            if clusters.iter().any(|c: &ClusterDefinition| c.id() == rc.id) {
                return Err(CliError::Validation(format!("duplicate cluster id `{}`", rc.id)));
            }
            clusters.push(ClusterDefinition::new(rc.id.clone(), rc.ports.clone(), network.n_ports())?);
        }
        check_partition(&network, &clusters)?;

        let pattern_dir = base.join(raw.pattern_dir.as_deref().unwrap_or(Path::new(".")));
        let patterns = resolve_patterns(&raw.clusters, &pattern_dir)?;

        let source = match (raw.source, patterns.is_some()) {
            (Some(RawSource::Farfield), false) => {
                return Err(CliError::Validation("source = \"farfield\" needs pattern files".into()))
            }
            (Some(RawSource::Farfield), true) | (None, true) => MatrixSource::FarField,
            (Some(RawSource::Scattering), _) | (None, false) => {
                MatrixSource::Scattering(raw.scope.unwrap_or(Scope::AllRows))
            }
        };

        let cap = raw.capacity;
        let capacity = CapacitySettings {
            snr_db: cap.snr_db.unwrap_or(20.0),
            n_samples: cap.n_samples.unwrap_or(CapacityConfig::DEFAULT_SAMPLES),
            seed: cap.seed.unwrap_or(0),
            n_tx: cap.n_tx,
            ideal_mimo: cap.ideal_mimo.unwrap_or_default(),
        };

        Ok(Self {
            network,
            clusters,
            patterns,
            scope: raw.scope.unwrap_or(Scope::AllRows),
            source,
            capacity,
        })
    }

    /// Re-derives the weight source after a scope override.
    pub fn set_scope(&mut self, scope: Scope) {
        self.scope = scope;
        if let MatrixSource::Scattering(_) = self.source {
            self.source = MatrixSource::Scattering(scope);
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Visit {
    Active,
    Done,
}

/// Loads measured clusters and derives mirrored ones, following `mirror_of`
/// chains depth-first.
fn resolve_patterns(raw: &[RawCluster], dir: &Path) -> Result<Option<Vec<Vec<PatternSet>>>, CliError> {
    let with_data = raw.iter().filter(|c| c.patterns.is_some() || c.mirror_of.is_some()).count();
    if with_data == 0 {
        return Ok(None);
    }
    if with_data != raw.len() {
        return Err(CliError::Validation(
            "pattern data must be given for every cluster or for none".into(),
        ));
    }

    let mut files: HashMap<PathBuf, PatternSet> = HashMap::new();
    let mut state: Vec<Option<Visit>> = vec![None; raw.len()];
    let mut resolved: Vec<Option<Vec<PatternSet>>> = vec![None; raw.len()];
    for i in 0..raw.len() {
        resolve_one(i, raw, dir, &mut files, &mut state, &mut resolved)?;
    }
    Ok(Some(resolved.into_iter().map(|r| r.expect("every cluster resolved")).collect()))
}

fn resolve_one(
    i: usize,
    raw: &[RawCluster],
    dir: &Path,
    files: &mut HashMap<PathBuf, PatternSet>,
    state: &mut [Option<Visit>],
    resolved: &mut [Option<Vec<PatternSet>>],
) -> Result<(), CliError> {
    match state[i] {
        Some(Visit::Done) => return Ok(()),
        Some(Visit::Active) => {
            return Err(CliError::Validation(format!(
                "cluster `{}` is part of a mirror_of cycle",
                raw[i].id
            )))
        }
        None => state[i] = Some(Visit::Active),
    }
    let rc = &raw[i];
    let sets = match (&rc.patterns, &rc.mirror_of) {
        (Some(_), Some(_)) => {
            return Err(CliError::Validation(format!(
                "cluster `{}` sets both patterns and mirror_of",
                rc.id
            )))
        }
        (Some(names), None) => {
            if !rc.mirror.is_empty() {
                return Err(CliError::Validation(format!(
                    "cluster `{}` lists mirror planes without mirror_of",
                    rc.id
                )));
            }
            if names.len() != rc.ports.len() {
                return Err(CliError::Validation(format!(
                    "cluster `{}` has {} ports but {} pattern files",
                    rc.id,
                    rc.ports.len(),
                    names.len()
                )));
            }
            names
                .iter()
                .map(|name| load_pattern_file(&dir.join(name), files))
                .collect::<Result<Vec<_>, _>>()?
        }
        (None, Some(src_id)) => {
            let j = raw
                .iter()
                .position(|c| &c.id == src_id)
                .ok_or_else(|| CliError::Validation(format!("cluster `{}`: unknown mirror_of `{src_id}`", rc.id)))?;
            if raw[j].ports.len() != rc.ports.len() {
                return Err(CliError::Validation(format!(
                    "cluster `{}` has {} ports, its mirror source `{src_id}` has {}",
                    rc.id,
                    rc.ports.len(),
                    raw[j].ports.len()
                )));
            }
            resolve_one(j, raw, dir, files, state, resolved)?;
            let mut sets = resolved[j].clone().expect("source resolved");
            for &plane in &rc.mirror {
                sets = sets
                    .iter()
                    .map(|s| s.mirrored(plane))
                    .collect::<Result<_, _>>()
                    .map_err(|e| CliError::Validation(format!("cluster `{}`: {e}", rc.id)))?;
            }
            sets
        }
        (None, None) => unreachable!("checked by caller"),
    };
    resolved[i] = Some(sets);
    state[i] = Some(Visit::Done);
    Ok(())
}

fn load_pattern_file(path: &Path, cache: &mut HashMap<PathBuf, PatternSet>) -> Result<PatternSet, CliError> {
    if let Some(set) = cache.get(path) {
        return Ok(set.clone());
    }
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let set = parse_pattern_set(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    cache.insert(path.to_path_buf(), set.clone());
    Ok(set)
}

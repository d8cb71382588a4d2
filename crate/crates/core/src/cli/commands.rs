//! The analysis commands. Each returns its report as CSV text.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::cluster::{frequency_sweep, patterns_at, weighted_pattern, ClusterOperatingPoint};
use crate::linalg::{symmetrize, CMatrix};
use crate::mimoeval::{
    build_receive_matrix, ecc, ergodic_capacity, ideal_capacity, loss_decomposition, CapacityResult, ECC_ADEQUATE,
};
use crate::radmatrix::{radiation_matrix_from_fields, MatrixSource, RadiationMatrix, Scope};

use super::config::AnalysisConfig;
use super::CliError;

/// Operating points of every cluster at one frequency, plus the radiation
/// matrix of the clusters seen as single antennas.
#[derive(Debug, Clone)]
pub struct FrequencySolution {
    pub frequency_hz: f64,
    /// In config cluster order.
    pub points: Vec<ClusterOperatingPoint>,
    /// `m x m`, one row per cluster. From the weighted patterns when field
    /// data is present, otherwise `Aᴴ (I - Sᴴ S) A` with the weights stacked
    /// in `A` (which assumes a lossless structure).
    pub cluster_level: RadiationMatrix,
}

pub fn solve(cfg: &AnalysisConfig) -> Result<Vec<FrequencySolution>, CliError> {
    let net = &cfg.network;
    let sweeps: Vec<Vec<ClusterOperatingPoint>> = cfg
        .clusters
        .iter()
        .enumerate()
        .map(|(c, cl)| {
            let sets = cfg.patterns.as_ref().map(|p| p[c].as_slice());
            frequency_sweep(net, sets, cl, cfg.source)
        })
        .collect::<Result<_, _>>()?;

    (0..net.len())
        .into_par_iter()
        .map(|fi| {
            let f = net.frequencies_hz()[fi];
            let points: Vec<ClusterOperatingPoint> = sweeps.iter().map(|s| s[fi].clone()).collect();
            let cluster_level = match &cfg.patterns {
                Some(all) => {
                    let combined = cfg
                        .clusters
                        .iter()
                        .zip(all)
                        .zip(&points)
                        .map(|((cl, sets), p)| weighted_pattern(&patterns_at(sets, cl, f)?, &p.excitation))
                        .collect::<Result<Vec<_>, _>>()?;
                    radiation_matrix_from_fields(&combined.iter().collect::<Vec<_>>())?
                }
                None => {
                    let n = net.n_ports();
                    let mut a = CMatrix::zeros(n, points.len());
                    for (c, (cl, p)) in cfg.clusters.iter().zip(&points).enumerate() {
                        for (w, port) in p.excitation.weights().iter().zip(cl.indices()) {
                            a[(port, c)] = *w;
                        }
                    }
                    let s = net.s(fi).expect("index in range");
                    let d = a.adjoint() * (CMatrix::identity(n, n) - s.adjoint() * s) * &a;
                    RadiationMatrix::new(f, symmetrize(&d), MatrixSource::Scattering(Scope::AllRows))?
                }
            };
            Ok(FrequencySolution {
                frequency_hz: f,
                points,
                cluster_level,
            })
        })
        .collect()
}

/// `freq_hz,cluster,port,amplitude,phase_deg,efficiency,tarc`, one row per
/// frequency and port.
pub fn cmd_weights(cfg: &AnalysisConfig) -> Result<String, CliError> {
    let mut out = String::from("freq_hz,cluster,port,amplitude,phase_deg,efficiency,tarc\n");
    for sol in solve(cfg)? {
        for (cl, p) in cfg.clusters.iter().zip(&sol.points) {
            let amps = p.excitation.amplitudes();
            let phases = p.excitation.phases_deg();
            for (k, port) in cl.active_ports().iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    sol.frequency_hz,
                    cl.id(),
                    port,
                    amps[k],
                    phases[k],
                    p.efficiency,
                    p.tarc
                );
            }
        }
    }
    Ok(out)
}

/// `freq_hz,cluster,efficiency`: total efficiency of each optimally fed
/// cluster.
pub fn cmd_efficiency(cfg: &AnalysisConfig) -> Result<String, CliError> {
    let mut out = String::from("freq_hz,cluster,efficiency\n");
    for sol in solve(cfg)? {
        let d = sol.cluster_level.matrix();
        for (c, cl) in cfg.clusters.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", sol.frequency_hz, cl.id(), d[(c, c)].re);
        }
    }
    Ok(out)
}

/// `freq_hz,mismatch,coupling_<id>...,[ohmic,]radiated` for the fed cluster
/// under its optimal weights. The ohmic column needs field data.
pub fn cmd_losses(cfg: &AnalysisConfig, fed_cluster: Option<&str>) -> Result<String, CliError> {
    let fed_id = fed_cluster.unwrap_or_else(|| cfg.clusters[0].id());
    let fed = cfg
        .cluster_index(fed_id)
        .ok_or_else(|| CliError::Validation(format!("unknown cluster `{fed_id}`")))?;

    let mut out = String::from("freq_hz,mismatch");
    for cl in cfg.clusters.iter().filter(|c| c.id() != fed_id) {
        let _ = write!(out, ",coupling_{}", cl.id());
    }
    if cfg.has_field_data() {
        out.push_str(",ohmic");
    }
    out.push_str(",radiated\n");

    for (fi, sol) in solve(cfg)?.iter().enumerate() {
        let d_ff = match &cfg.patterns {
            Some(all) => Some(radiation_matrix_from_fields(&patterns_at(
                &all[fed],
                &cfg.clusters[fed],
                sol.frequency_hz,
            )?)?),
            None => None,
        };
        let lb = loss_decomposition(
            &cfg.network,
            &cfg.clusters,
            fed_id,
            &sol.points[fed].excitation,
            d_ff.as_ref(),
            fi,
        )?;
        let _ = write!(out, "{},{}", lb.frequency_hz, lb.mismatch);
        for (_, p) in &lb.coupling_by_cluster {
            let _ = write!(out, ",{p}");
        }
        if let Some(ohmic) = lb.ohmic {
            let _ = write!(out, ",{ohmic}");
        }
        let _ = writeln!(out, ",{}", lb.radiated);
    }
    Ok(out)
}

/// `freq_hz,cluster_i,cluster_j,rho,exceeds_0_5` for every cluster pair.
pub fn cmd_ecc(cfg: &AnalysisConfig) -> Result<String, CliError> {
    let mut out = String::from("freq_hz,cluster_i,cluster_j,rho,exceeds_0_5\n");
    for sol in solve(cfg)? {
        let rho = ecc(&sol.cluster_level)?;
        for (i, j, r) in rho.pairs() {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                sol.frequency_hz,
                cfg.clusters[i].id(),
                cfg.clusters[j].id(),
                r,
                r > ECC_ADEQUATE
            );
        }
    }
    Ok(out)
}

/// `freq_hz,capacity_bps_hz,std_error[,ideal_MxM...]`. Every frequency uses
/// the same seed, so differences between rows are not sampling noise.
pub fn cmd_capacity(cfg: &AnalysisConfig) -> Result<String, CliError> {
    let cap = cfg.capacity.config(cfg.clusters.len());
    let ideals: Vec<CapacityResult> = cfg
        .capacity
        .ideal_mimo
        .iter()
        .map(|&m| {
            if m == 0 {
                return Err(CliError::Validation("ideal MIMO size must be at least 1".into()));
            }
            Ok(ideal_capacity(m, cap.snr_db, cap.n_samples, cap.seed)?)
        })
        .collect::<Result<_, _>>()?;

    let mut out = String::from("freq_hz,capacity_bps_hz,std_error");
    for m in &cfg.capacity.ideal_mimo {
        let _ = write!(out, ",ideal_{m}x{m}");
    }
    out.push('\n');
    for sol in solve(cfg)? {
        let r = build_receive_matrix(&sol.cluster_level)?;
        let c = ergodic_capacity(&r, &cap)?;
        let _ = write!(out, "{},{},{}", sol.frequency_hz, c.ergodic_capacity_bps_hz, c.sample_std_error);
        for ideal in &ideals {
            let _ = write!(out, ",{}", ideal.ergodic_capacity_bps_hz);
        }
        out.push('\n');
    }
    Ok(out)
}

pub const REPORT_FILES: [&str; 5] = ["weights.csv", "efficiency.csv", "losses.csv", "ecc.csv", "capacity.csv"];

/// Writes every report into `dir`.
pub fn report(cfg: &AnalysisConfig, fed_cluster: Option<&str>, dir: &Path) -> Result<(), CliError> {
    let reports = [
        cmd_weights(cfg)?,
        cmd_efficiency(cfg)?,
        cmd_losses(cfg, fed_cluster)?,
        cmd_ecc(cfg)?,
        cmd_capacity(cfg)?,
    ];
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    for (name, csv) in REPORT_FILES.iter().zip(reports) {
        let path = dir.join(name);
        fs::write(&path, csv).map_err(|e| CliError::io(&path, e))?;
    }
    Ok(())
}

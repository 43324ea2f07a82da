//! Campaign orchestration: simulate scenes into archives and process
//! archives into per-snapshot stats, stationarity reports, and
//! path-loss fits.
//!
//! Processing one snapshot is pure; a campaign run is deterministic in
//! (scene, config, seed) regardless of thread count, because noise
//! comes from per-pair counter streams and no cross-thread reductions
//! are performed.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::calib::calibrate;
use crate::config::SounderConfig;
use crate::error::{Error, Result};
use crate::io::{self, ArchiveHeader, ArchiveReader, ArchiveWriter};
use crate::params::{
    self, fit_path_loss, CorrelationMode, KappaValue, Normalization, PathLossFit, PdpKind, Side,
    SnapshotStats, StationarityReport,
};
use crate::pdp::{
    directional_pdp, max_dir, synthesize_omni, threshold_and_gate, MaxDirPdp, OmniPdp,
    ProcessingOptions,
};
use crate::scene::Scene;
use crate::sounder::{capture_snapshot, system_response, MimoSnapshot};

/// Knobs of the processing stage beyond the per-PDP thresholding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProcessOptions {
    pub pdp: ProcessingOptions,
    /// Correlation thresholds for the stationarity segmentation.
    pub alphas: Vec<f64>,
    pub correlation_mode: CorrelationMode,
    /// Override of the archive's oversampling factor, if set.
    pub oversampling: Option<usize>,
}

impl Default for ProcessOptions {
    fn default() -> Self {
        Self {
            pdp: ProcessingOptions::default(),
            alphas: vec![0.7, 0.9],
            correlation_mode: CorrelationMode::Consecutive,
            oversampling: None,
        }
    }
}

impl ProcessOptions {
    pub fn validate(&self) -> Result<()> {
        self.pdp.validate()?;
        if self.alphas.is_empty() {
            return Err(Error::Config("at least one alpha is required".into()));
        }
        for &a in &self.alphas {
            if !(0.0 < a && a < 1.0) {
                return Err(Error::Config(format!("alpha must be in (0, 1), got {a}")));
            }
        }
        if let Some(ov) = self.oversampling {
            if ov == 0 || !ov.is_power_of_two() {
                return Err(Error::Config(format!(
                    "oversampling must be a power of two >= 1, got {ov}"
                )));
            }
        }
        Ok(())
    }
}

/// Everything extracted from one snapshot.
#[derive(Debug, Clone)]
pub struct ProcessedSnapshot {
    pub stats: SnapshotStats,
    pub omni: OmniPdp,
    pub maxdir: MaxDirPdp,
}

/// Run the full per-snapshot chain: calibrate, transform, threshold,
/// synthesize omni and max-dir PDPs, extract condensed parameters.
///
/// A snapshot that thresholds to all-zero yields `-inf` path gains, NaN
/// spreads, and a single-peak kappa rather than failing the campaign.
pub fn process_snapshot(
    snapshot: &MimoSnapshot,
    header_config: &SounderConfig,
    system: &[num_complex::Complex64],
    opts: &ProcessOptions,
) -> Result<ProcessedSnapshot> {
    let mut config = header_config.clone();
    if let Some(ov) = opts.oversampling {
        config.oversampling_factor = ov;
    }
    let calibrated = calibrate(snapshot, system)?;
    let raw = directional_pdp(&calibrated, &config);
    let gated = threshold_and_gate(&raw, &opts.pdp);
    let omni = synthesize_omni(&gated);
    let maxdir = match max_dir(&gated, &config) {
        Ok(m) => m,
        Err(Error::NoSignal(_)) => MaxDirPdp {
            p_maxdir: vec![0.0; gated.n_bins],
            tx_index: 0,
            rx_index: 0,
            phi_tx_max_deg: config.tx_grid().angle_deg(0),
            phi_rx_max_deg: config.rx_grid().angle_deg(0),
            bin_m: gated.bin_m,
            oversampling: gated.oversampling,
        },
        Err(e) => return Err(e),
    };

    let aps_tx = params::angular_power_spectrum(&omni, Side::Tx, config.m_tx);
    let aps_rx = params::angular_power_spectrum(&omni, Side::Rx, config.m_rx);
    let stats = SnapshotStats {
        index: snapshot.index,
        start_time_s: snapshot.start_time_s,
        distance_m: snapshot.distance_m(),
        pg_omni_db: params::path_gain_db(&omni.p_omni),
        pg_maxdir_db: params::path_gain_db(&maxdir.p_maxdir),
        s_tau_omni_ns: params::rms_delay_spread_ns(&omni.p_omni, omni.bin_seconds())
            .unwrap_or(f64::NAN),
        s_tau_maxdir_ns: params::rms_delay_spread_ns(&maxdir.p_maxdir, maxdir.bin_seconds())
            .unwrap_or(f64::NAN),
        s_phi_tx: params::fleury_angular_spread(&aps_tx, &config.tx_grid()).unwrap_or(f64::NAN),
        s_phi_rx: params::fleury_angular_spread(&aps_rx, &config.rx_grid()).unwrap_or(f64::NAN),
        kappa: params::kappa(&omni).unwrap_or(KappaValue::SinglePeak),
        aps_tx,
        aps_rx,
    };
    Ok(ProcessedSnapshot { stats, omni, maxdir })
}

/// Campaign-level processing output.
#[derive(Debug, Clone)]
pub struct CampaignResults {
    pub config: SounderConfig,
    pub t_mimo_s: f64,
    pub stats: Vec<SnapshotStats>,
    /// One report per (alpha, PDP kind, normalization) combination.
    pub stationarity: Vec<StationarityReport>,
    pub fit_omni: Option<PathLossFit>,
    pub fit_maxdir: Option<PathLossFit>,
    /// Omni PDP per snapshot in dB (rows: snapshots, cols: delay bins);
    /// all-zero bins are `-inf`.
    pub dynamic_pdp_db: Vec<Vec<f64>>,
    pub warnings: Vec<String>,
}

/// Simulate a campaign and stream it into an archive file.
pub fn simulate_to_archive(
    scene: &Scene,
    header: &ArchiveHeader,
    path: impl AsRef<Path>,
) -> Result<()> {
    let config = &header.config;
    config.validate()?;
    header.system.validate()?;
    let opts = header.capture_options();

    // The campaign clock starts at the beginning of the common span.
    let t0 = scene.span().map_or(0.0, |(start, _)| start);
    let needed = header.n_snapshots as f64 * config.t_mimo_s;
    if let Some((start, end)) = scene.span() {
        if end - start < needed {
            return Err(Error::Config(format!(
                "scene '{}' covers {:.1} s but {} snapshots need {:.1} s",
                scene.name,
                end - start,
                header.n_snapshots,
                needed
            )));
        }
    }

    let mut writer = ArchiveWriter::create(&path, header)?;
    for index in 0..header.n_snapshots as usize {
        let snap = capture_snapshot(scene, config, t0, index, header.seed, &opts)?;
        writer.append(&snap)?;
    }
    writer.finish()
}

/// Process an archive end to end.
pub fn process_archive(path: impl AsRef<Path>, opts: &ProcessOptions) -> Result<CampaignResults> {
    opts.validate()?;
    let mut reader = ArchiveReader::open(&path)?;
    let header = reader.header().clone();
    let system = system_response(&header.config, &header.system);

    let mut stats = Vec::new();
    let mut omni_raw = Vec::new();
    let mut maxdir_raw = Vec::new();
    let mut omni_norm = Vec::new();
    let mut maxdir_norm = Vec::new();
    let mut dynamic_pdp_db = Vec::new();
    let mut warnings = Vec::new();

    while let Some(snapshot) = reader.next_snapshot()? {
        let processed = process_snapshot(&snapshot, &header.config, &system, opts)?;
        if !processed.stats.pg_omni_db.is_finite() {
            warnings.push(format!("snapshot {}: thresholded to all-noise", snapshot.index));
        }
        dynamic_pdp_db
            .push(processed.omni.p_omni.iter().map(|&p| 10.0 * p.log10()).collect());
        // TOA-normalized variants; an all-zero PDP keeps its raw form.
        omni_norm.push(
            processed.omni.toa_normalized().map(|o| o.p_omni).unwrap_or_else(|_| {
                processed.omni.p_omni.clone()
            }),
        );
        maxdir_norm.push(
            processed
                .maxdir
                .toa_normalized()
                .map(|m| m.p_maxdir)
                .unwrap_or_else(|_| processed.maxdir.p_maxdir.clone()),
        );
        omni_raw.push(processed.omni.p_omni);
        maxdir_raw.push(processed.maxdir.p_maxdir);
        stats.push(processed.stats);
    }

    let mut stationarity = Vec::new();
    if stats.len() >= 2 {
        let sequences: [(&Vec<Vec<f64>>, PdpKind, Normalization); 4] = [
            (&omni_raw, PdpKind::Omni, Normalization::Raw),
            (&omni_norm, PdpKind::Omni, Normalization::ToaNormalized),
            (&maxdir_raw, PdpKind::MaxDir, Normalization::Raw),
            (&maxdir_norm, PdpKind::MaxDir, Normalization::ToaNormalized),
        ];
        for &alpha in &opts.alphas {
            for (seq, kind, norm) in &sequences {
                stationarity.push(params::stationarity_regions(
                    seq,
                    alpha,
                    header.config.t_mimo_s,
                    *kind,
                    *norm,
                    opts.correlation_mode,
                )?);
            }
        }
    } else {
        warnings.push("fewer than 2 snapshots: stationarity skipped".into());
    }

    let fit_omni = match fit_path_loss(&stats, PdpKind::Omni) {
        Ok(f) => Some(f),
        Err(e) => {
            warnings.push(format!("omni path-loss fit skipped: {e}"));
            None
        }
    };
    let fit_maxdir = match fit_path_loss(&stats, PdpKind::MaxDir) {
        Ok(f) => Some(f),
        Err(e) => {
            warnings.push(format!("max-dir path-loss fit skipped: {e}"));
            None
        }
    };

    Ok(CampaignResults {
        config: header.config.clone(),
        t_mimo_s: header.config.t_mimo_s,
        stats,
        stationarity,
        fit_omni,
        fit_maxdir,
        dynamic_pdp_db,
        warnings,
    })
}

/// Export campaign results into `dir`: per-snapshot stats, stationarity
/// regions, path-loss fits, and the heatmap matrices (dynamic omni PDP
/// in dB, dynamic TX/RX APS in linear power).
pub fn export_results(results: &CampaignResults, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let mut fits = Vec::new();
    if let Some(f) = results.fit_omni {
        fits.push((PdpKind::Omni, f));
    }
    if let Some(f) = results.fit_maxdir {
        fits.push((PdpKind::MaxDir, f));
    }
    io::export_stats(&results.stats, &results.stationarity, &fits, dir, io::StatsFormat::Csv)?;

    io::write_matrix_csv(dir.join("dynamic_pdp_db.csv"), "bin", &results.dynamic_pdp_db)?;
    let aps_tx: Vec<Vec<f64>> = results.stats.iter().map(|s| s.aps_tx.clone()).collect();
    let aps_rx: Vec<Vec<f64>> = results.stats.iter().map(|s| s.aps_rx.clone()).collect();
    io::write_matrix_csv(dir.join("dynamic_aps_tx.csv"), "beam", &aps_tx)?;
    io::write_matrix_csv(dir.join("dynamic_aps_rx.csv"), "beam", &aps_rx)?;
    Ok(())
}

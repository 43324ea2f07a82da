//! Bit-exact persistence: snapshot archives and stats export.
//!
//! # Archive layout
//!
//! All multi-byte integers are little-endian.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "RRMA"
//! 4       4     format_version: u32 (currently 1)
//! 8       4     header_len: u32
//! 12      n     header: TOML (sounder config, system response spec,
//!               scene reference, seed, snapshot count, capture options)
//! 12+n    ...   payload: snapshot records
//! ```
//!
//! Each snapshot record is
//!
//! ```text
//! index: u64, start_time: f64 seconds,
//! tx_pos: 2 x f64 metres, rx_pos: 2 x f64 metres,
//! tensor: n_subcarriers * m_tx * m_rx samples of (f32 re, f32 im),
//!         frequency fastest, then TX, then RX
//! ```
//!
//! Complex samples are stored as f32 pairs (half the size of the f64
//! in-memory representation); writing quantizes, so bit-exact round
//! trips are guaranteed at the file level: `write(read(f)) == f`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::SounderConfig;
use crate::error::{Error, Result};
use crate::params::{KappaValue, PathLossFit, PdpKind, SnapshotStats, StationarityReport};
use crate::sounder::{CaptureOptions, MimoSnapshot, SystemResponseSpec};
use crate::tensor::ComplexTensor;

pub const ARCHIVE_MAGIC: [u8; 4] = *b"RRMA";
pub const ARCHIVE_VERSION: u32 = 1;

/// Structured-text archive header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveHeader {
    /// Scene reference as given on the command line (preset name or
    /// file path); informational.
    pub scene: String,
    pub seed: u64,
    pub n_snapshots: u64,
    pub noise: bool,
    pub frozen_snapshot: bool,
    pub config: SounderConfig,
    pub system: SystemResponseSpec,
}

impl ArchiveHeader {
    pub fn capture_options(&self) -> CaptureOptions {
        CaptureOptions { noise: self.noise, frozen_snapshot: self.frozen_snapshot, system: self.system }
    }

    /// Payload bytes of one snapshot record for this configuration.
    pub fn record_size(&self) -> u64 {
        let samples = self.config.n_subcarriers * self.config.m_tx * self.config.m_rx;
        8 + 8 + 32 + samples as u64 * 8
    }
}

/// Incremental archive writer; snapshots are appended in index order.
pub struct ArchiveWriter {
    out: BufWriter<File>,
    path: PathBuf,
    header: ArchiveHeader,
    written: u64,
}

impl ArchiveWriter {
    pub fn create(path: impl AsRef<Path>, header: &ArchiveHeader) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        header.config.validate()?;
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut out = BufWriter::new(file);
        let header_toml = toml::to_string(header).expect("header serialization cannot fail");
        let io_err = |e| Error::io(&path, e);
        out.write_all(&ARCHIVE_MAGIC).map_err(io_err)?;
        out.write_all(&ARCHIVE_VERSION.to_le_bytes()).map_err(io_err)?;
        out.write_all(&(header_toml.len() as u32).to_le_bytes()).map_err(io_err)?;
        out.write_all(header_toml.as_bytes()).map_err(io_err)?;
        Ok(Self { out, path, header: header.clone(), written: 0 })
    }

    pub fn append(&mut self, snapshot: &MimoSnapshot) -> Result<()> {
        let cfg = &self.header.config;
        let t = &snapshot.h_meas;
        if t.n_freq() != cfg.n_subcarriers || t.n_tx() != cfg.m_tx || t.n_rx() != cfg.m_rx {
            return Err(Error::Config(format!(
                "snapshot tensor dims {}x{}x{} do not match archive config {}x{}x{}",
                t.n_freq(),
                t.n_tx(),
                t.n_rx(),
                cfg.n_subcarriers,
                cfg.m_tx,
                cfg.m_rx
            )));
        }
        let io_err = |e| Error::io(&self.path, e);
        self.out.write_all(&(snapshot.index as u64).to_le_bytes()).map_err(io_err)?;
        self.out.write_all(&snapshot.start_time_s.to_le_bytes()).map_err(io_err)?;
        for v in snapshot.tx_pos_m.iter().chain(&snapshot.rx_pos_m) {
            self.out.write_all(&v.to_le_bytes()).map_err(io_err)?;
        }
        let mut buf = Vec::with_capacity(t.data().len() * 8);
        for c in t.data() {
            buf.extend_from_slice(&(c.re as f32).to_le_bytes());
            buf.extend_from_slice(&(c.im as f32).to_le_bytes());
        }
        self.out.write_all(&buf).map_err(io_err)?;
        self.written += 1;
        Ok(())
    }

    /// Flush, fsync, and verify the promised snapshot count.
    pub fn finish(mut self) -> Result<()> {
        if self.written != self.header.n_snapshots {
            return Err(Error::Config(format!(
                "archive header promises {} snapshots but {} were written",
                self.header.n_snapshots, self.written
            )));
        }
        self.out.flush().map_err(|e| Error::io(&self.path, e))?;
        self.out
            .get_ref()
            .sync_all()
            .map_err(|e| Error::io(&self.path, e))?;
        Ok(())
    }
}

/// Streaming archive reader.
pub struct ArchiveReader {
    input: BufReader<File>,
    path: PathBuf,
    header: ArchiveHeader,
    remaining: u64,
}

impl ArchiveReader {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
        let file_len = file.metadata().map_err(|e| Error::io(&path, e))?.len();
        let mut input = BufReader::new(file);

        let mut magic = [0u8; 4];
        read_exact(&mut input, &mut magic, &path)?;
        if magic != ARCHIVE_MAGIC {
            return Err(Error::BadMagic { path });
        }
        let mut word = [0u8; 4];
        read_exact(&mut input, &mut word, &path)?;
        let version = u32::from_le_bytes(word);
        if version != ARCHIVE_VERSION {
            return Err(Error::VersionMismatch { path, found: version, expected: ARCHIVE_VERSION });
        }
        read_exact(&mut input, &mut word, &path)?;
        let header_len = u32::from_le_bytes(word) as usize;
        let mut header_bytes = vec![0u8; header_len];
        read_exact(&mut input, &mut header_bytes, &path)?;
        let header_text = String::from_utf8(header_bytes)
            .map_err(|e| Error::Malformed { path: path.clone(), reason: e.to_string() })?;
        let header: ArchiveHeader = toml::from_str(&header_text)
            .map_err(|e| Error::Malformed { path: path.clone(), reason: e.to_string() })?;
        header.config.validate()?;

        let payload = file_len - (12 + header_len as u64);
        let expected = header.n_snapshots * header.record_size();
        if payload != expected {
            return Err(Error::TruncatedPayload { path, expected, actual: payload });
        }
        Ok(Self { input, path, remaining: header.n_snapshots, header })
    }

    pub fn header(&self) -> &ArchiveHeader {
        &self.header
    }

    /// Read the next snapshot, or `None` past the end.
    pub fn next_snapshot(&mut self) -> Result<Option<MimoSnapshot>> {
        if self.remaining == 0 {
            return Ok(None);
        }
        self.remaining -= 1;
        let cfg = &self.header.config;
        let mut word8 = [0u8; 8];
        read_exact(&mut self.input, &mut word8, &self.path)?;
        let index = u64::from_le_bytes(word8) as usize;
        read_exact(&mut self.input, &mut word8, &self.path)?;
        let start_time_s = f64::from_le_bytes(word8);
        let mut pos = [0.0f64; 4];
        for v in pos.iter_mut() {
            read_exact(&mut self.input, &mut word8, &self.path)?;
            *v = f64::from_le_bytes(word8);
        }
        let samples = cfg.n_subcarriers * cfg.m_tx * cfg.m_rx;
        let mut buf = vec![0u8; samples * 8];
        read_exact(&mut self.input, &mut buf, &self.path)?;
        let mut data = Vec::with_capacity(samples);
        for chunk in buf.chunks_exact(8) {
            let re = f32::from_le_bytes(chunk[0..4].try_into().unwrap());
            let im = f32::from_le_bytes(chunk[4..8].try_into().unwrap());
            data.push(Complex64::new(re as f64, im as f64));
        }
        let h_meas = ComplexTensor::from_data(cfg.n_subcarriers, cfg.m_tx, cfg.m_rx, data)?;
        Ok(Some(MimoSnapshot {
            index,
            start_time_s,
            h_meas,
            tx_pos_m: [pos[0], pos[1]],
            rx_pos_m: [pos[2], pos[3]],
        }))
    }
}

fn read_exact(input: &mut impl Read, buf: &mut [u8], path: &Path) -> Result<()> {
    input.read_exact(buf).map_err(|e| Error::io(path, e))
}

/// Write a whole archive in one call; fsyncs before returning.
pub fn write_archive(
    path: impl AsRef<Path>,
    header: &ArchiveHeader,
    snapshots: &[MimoSnapshot],
) -> Result<()> {
    let mut w = ArchiveWriter::create(&path, header)?;
    for s in snapshots {
        w.append(s)?;
    }
    w.finish()
}

/// Read a whole archive into memory (exact inverse of
/// [`write_archive`] at the file level).
pub fn read_archive(path: impl AsRef<Path>) -> Result<(ArchiveHeader, Vec<MimoSnapshot>)> {
    let mut r = ArchiveReader::open(&path)?;
    let mut out = Vec::with_capacity(r.header.n_snapshots as usize);
    while let Some(s) = r.next_snapshot()? {
        out.push(s);
    }
    Ok((r.header.clone(), out))
}

// ---------------------------------------------------------------------------
// Stats export
// ---------------------------------------------------------------------------

/// Output format of [`export_stats`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatsFormat {
    Csv,
    /// TOML document carrying the same content.
    StructuredText,
}

/// Fixed column set of `snapshot_stats.csv`; frozen by a golden-file
/// test and documented in the README.
pub const STATS_CSV_HEADER: &str = "index,start_time_s,distance_m,pg_omni_db,pg_maxdir_db,\
s_tau_omni_ns,s_tau_maxdir_ns,s_phi_tx,s_phi_rx,kappa_db";

fn kappa_field(k: &KappaValue) -> String {
    match k {
        KappaValue::Db(v) => format!("{v}"),
        KappaValue::SinglePeak => "single-peak".to_string(),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Per-snapshot stats table (one data row per snapshot).
pub fn write_snapshot_stats_csv(path: impl AsRef<Path>, stats: &[SnapshotStats]) -> Result<()> {
    let mut text = String::from(STATS_CSV_HEADER);
    text.push('\n');
    for s in stats {
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            s.index,
            s.start_time_s,
            s.distance_m,
            s.pg_omni_db,
            s.pg_maxdir_db,
            s.s_tau_omni_ns,
            s.s_tau_maxdir_ns,
            s.s_phi_tx,
            s.s_phi_rx,
            kappa_field(&s.kappa)
        ));
    }
    write_text(path.as_ref(), &text)
}

/// Long-format CDF table: values sorted ascending with cumulative
/// fractions `(i+1)/n`, ending at exactly 1.0.
pub fn write_cdf_csv(path: impl AsRef<Path>, metric: &str, values: &[f64]) -> Result<()> {
    let mut sorted: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    let mut text = String::from("metric,value,cdf\n");
    for (i, v) in sorted.iter().enumerate() {
        text.push_str(&format!("{},{},{}\n", metric, v, (i + 1) as f64 / n as f64));
    }
    write_text(path.as_ref(), &text)
}

/// Row-per-snapshot matrix (dynamic PDP or APS grid) for heatmap
/// rendering by external tools. `col_prefix` names the columns
/// (`<prefix>0, <prefix>1, ...`).
pub fn write_matrix_csv(
    path: impl AsRef<Path>,
    col_prefix: &str,
    rows: &[Vec<f64>],
) -> Result<()> {
    let n_cols = rows.first().map_or(0, Vec::len);
    let mut text = String::from("index");
    for c in 0..n_cols {
        text.push_str(&format!(",{col_prefix}{c}"));
    }
    text.push('\n');
    for (i, row) in rows.iter().enumerate() {
        debug_assert_eq!(row.len(), n_cols);
        text.push_str(&i.to_string());
        for v in row {
            text.push_str(&format!(",{v}"));
        }
        text.push('\n');
    }
    write_text(path.as_ref(), &text)
}

/// Stationarity regions, one row per region.
pub fn write_stationarity_csv(
    path: impl AsRef<Path>,
    reports: &[StationarityReport],
) -> Result<()> {
    let mut text = String::from("alpha,pdp,normalization,region_index,length_snapshots,length_seconds\n");
    for r in reports {
        for (i, (&n, &s)) in r.region_snapshots.iter().zip(&r.region_seconds).enumerate() {
            text.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.alpha,
                r.kind.label(),
                r.normalization.label(),
                i,
                n,
                s
            ));
        }
    }
    write_text(path.as_ref(), &text)
}

/// Path-loss fits as structured text.
pub fn write_path_loss_toml(
    path: impl AsRef<Path>,
    omni: &PathLossFit,
    maxdir: &PathLossFit,
) -> Result<()> {
    #[derive(Serialize)]
    struct Doc<'a> {
        omni: &'a PathLossFit,
        max_dir: &'a PathLossFit,
    }
    let text = toml::to_string_pretty(&Doc { omni, max_dir: maxdir })
        .expect("fit serialization cannot fail");
    write_text(path.as_ref(), &text)
}

/// TOML document mirroring the CSV exports.
#[derive(Debug, Serialize, Deserialize)]
pub struct StatsDocument {
    pub snapshots: Vec<SnapshotStats>,
    pub stationarity: Vec<StationarityReport>,
    pub path_loss_omni: Option<PathLossFit>,
    pub path_loss_maxdir: Option<PathLossFit>,
}

/// Export per-snapshot stats, stationarity reports, and path-loss fits
/// to `dir` in the chosen format. Returns the files written.
pub fn export_stats(
    stats: &[SnapshotStats],
    reports: &[StationarityReport],
    fits: &[(PdpKind, PathLossFit)],
    dir: impl AsRef<Path>,
    format: StatsFormat,
) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    match format {
        StatsFormat::Csv => {
            let p = dir.join("snapshot_stats.csv");
            write_snapshot_stats_csv(&p, stats)?;
            written.push(p);
            let p = dir.join("stationarity.csv");
            write_stationarity_csv(&p, reports)?;
            written.push(p);
            let omni = fits.iter().find(|(k, _)| *k == PdpKind::Omni).map(|(_, f)| *f);
            let maxdir = fits.iter().find(|(k, _)| *k == PdpKind::MaxDir).map(|(_, f)| *f);
            if let (Some(o), Some(m)) = (omni, maxdir) {
                let p = dir.join("path_loss.toml");
                write_path_loss_toml(&p, &o, &m)?;
                written.push(p);
            }
        }
        StatsFormat::StructuredText => {
            let doc = StatsDocument {
                snapshots: stats.to_vec(),
                stationarity: reports.to_vec(),
                path_loss_omni: fits.iter().find(|(k, _)| *k == PdpKind::Omni).map(|(_, f)| *f),
                path_loss_maxdir: fits.iter().find(|(k, _)| *k == PdpKind::MaxDir).map(|(_, f)| *f),
            };
            let p = dir.join("stats.toml");
            write_text(&p, &toml::to_string_pretty(&doc).expect("stats serialization cannot fail"))?;
            written.push(p);
        }
    }
    Ok(written)
}

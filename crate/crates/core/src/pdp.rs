//! Power delay profiles: windowed delay-domain transform, noise
//! thresholding and delay gating, omnidirectional and max-dir synthesis.
//!
//! For each direction pair the calibrated spectrum is multiplied by a
//! symmetric Hann window (normalized to unit RMS so total power is
//! preserved in the Parseval sense), zero-padded by the oversampling
//! factor, inverse-transformed, and magnitude-squared:
//!
//! ```text
//! P_direc(tau, i, j) = | IFFT_f { H(f, i, j) W_hann(f) } |^2
//! ```
//!
//! The scaling is chosen so that `sum_tau P = sum_f |H w|^2 / N` per
//! pair; for a boresight-aligned path this makes the thresholded path
//! gain equal the path's linear power.
//!
//! Thresholding zeroes every bin that is either later than the delay
//! gate (an excess-runlength window behind the strongest peak) or below
//! the noise threshold (a fixed offset above the mean noise power,
//! estimated per direction pair from the tail of the delay axis).

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::calib::CalibratedSnapshot;
use crate::config::SounderConfig;
use crate::error::{Error, Result};

/// Symmetric Hann window over `n` points, scaled to unit RMS
/// (`sum w^2 = n`).
pub fn hann_unit_rms(n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let raw: Vec<f64> = (0..n)
        .map(|k| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * k as f64 / (n as f64 - 1.0)).cos()))
        .collect();
    let rms = (raw.iter().map(|w| w * w).sum::<f64>() / n as f64).sqrt();
    raw.into_iter().map(|w| w / rms).collect()
}

/// Knobs of the thresholding/gating stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProcessingOptions {
    /// Delay gate as excess runlength past the strongest peak, metres.
    pub gate_excess_m: f64,
    /// Noise threshold offset above the mean noise power, dB.
    pub threshold_offset_db: f64,
    /// Fraction of the delay axis (from the far end) used for the
    /// per-pair noise estimate.
    pub noise_tail_fraction: f64,
}

impl Default for ProcessingOptions {
    fn default() -> Self {
        Self { gate_excess_m: 350.0, threshold_offset_db: 9.0, noise_tail_fraction: 0.1 }
    }
}

impl ProcessingOptions {
    pub fn validate(&self) -> Result<()> {
        if self.gate_excess_m <= 0.0 {
            return Err(Error::Config(format!(
                "gate_excess_m must be > 0, got {}",
                self.gate_excess_m
            )));
        }
        if !self.threshold_offset_db.is_finite() {
            return Err(Error::Config("threshold_offset_db must be finite".into()));
        }
        if !(0.0 < self.noise_tail_fraction && self.noise_tail_fraction < 0.5) {
            return Err(Error::Config(format!(
                "noise_tail_fraction must be in (0, 0.5), got {}",
                self.noise_tail_fraction
            )));
        }
        Ok(())
    }
}

/// Directional PDP tensor: linear power over (delay bin, TX, RX).
///
/// Storage is delay-fastest, mirroring [`crate::tensor::ComplexTensor`]:
/// `index(bin, tx, rx) = (rx * n_tx + tx) * n_bins + bin`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalPdp {
    pub p: Vec<f64>,
    pub n_bins: usize,
    pub n_tx: usize,
    pub n_rx: usize,
    /// Delay bin size in metres (pre-oversampling bin / oversampling).
    pub bin_m: f64,
    pub oversampling: usize,
    /// Mean linear power of the delay-axis tail across all pairs;
    /// a campaign-level noise-floor diagnostic.
    pub noise_floor_est: f64,
    /// Set when thresholding zeroed the entire tensor.
    pub all_noise: bool,
}

impl DirectionalPdp {
    #[inline]
    pub fn index(&self, bin: usize, tx: usize, rx: usize) -> usize {
        (rx * self.n_tx + tx) * self.n_bins + bin
    }

    pub fn pair(&self, tx: usize, rx: usize) -> &[f64] {
        let base = (rx * self.n_tx + tx) * self.n_bins;
        &self.p[base..base + self.n_bins]
    }

    /// Delay of `bin` in metres.
    pub fn delay_m(&self, bin: usize) -> f64 {
        bin as f64 * self.bin_m
    }

    /// Delay bin size in seconds.
    pub fn bin_seconds(&self) -> f64 {
        self.bin_m / crate::config::SPEED_OF_LIGHT
    }
}

/// Omnidirectional PDP synthesized per delay bin from the strongest
/// direction pair, with the selected pair recorded per bin.
#[derive(Debug, Clone, PartialEq)]
pub struct OmniPdp {
    pub p_omni: Vec<f64>,
    /// Selected TX beam per bin (valid where `p_omni > 0`).
    pub sel_tx: Vec<u16>,
    /// Selected RX beam per bin (valid where `p_omni > 0`).
    pub sel_rx: Vec<u16>,
    pub bin_m: f64,
    pub oversampling: usize,
}

impl OmniPdp {
    pub fn bin_seconds(&self) -> f64 {
        self.bin_m / crate::config::SPEED_OF_LIGHT
    }

    /// Cyclically shift the delay axis so the strongest peak sits at
    /// bin 0. Errors on an all-zero PDP.
    pub fn toa_normalized(&self) -> Result<OmniPdp> {
        let shift = strongest_bin(&self.p_omni)?;
        Ok(OmniPdp {
            p_omni: rotate_left(&self.p_omni, shift),
            sel_tx: rotate_left(&self.sel_tx, shift),
            sel_rx: rotate_left(&self.sel_rx, shift),
            bin_m: self.bin_m,
            oversampling: self.oversampling,
        })
    }
}

/// PDP of the direction pair with the largest path gain.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxDirPdp {
    pub p_maxdir: Vec<f64>,
    pub tx_index: usize,
    pub rx_index: usize,
    /// Beam rotation angle of the selected TX direction, degrees.
    pub phi_tx_max_deg: f64,
    /// Beam rotation angle of the selected RX direction, degrees.
    pub phi_rx_max_deg: f64,
    pub bin_m: f64,
    pub oversampling: usize,
}

impl MaxDirPdp {
    pub fn bin_seconds(&self) -> f64 {
        self.bin_m / crate::config::SPEED_OF_LIGHT
    }

    /// Cyclically shift the delay axis so the strongest peak sits at
    /// bin 0. Errors on an all-zero PDP.
    pub fn toa_normalized(&self) -> Result<MaxDirPdp> {
        let shift = strongest_bin(&self.p_maxdir)?;
        Ok(MaxDirPdp { p_maxdir: rotate_left(&self.p_maxdir, shift), ..self.clone() })
    }
}

fn rotate_left<T: Clone>(v: &[T], shift: usize) -> Vec<T> {
    let mut out = v.to_vec();
    out.rotate_left(shift);
    out
}

/// Index of the strongest bin; first on ties. Errors on all-zero.
pub fn strongest_bin(p: &[f64]) -> Result<usize> {
    let mut best = 0;
    let mut best_p = 0.0;
    for (i, &v) in p.iter().enumerate() {
        if v > best_p {
            best_p = v;
            best = i;
        }
    }
    if best_p <= 0.0 {
        return Err(Error::NoSignal("all-zero PDP"));
    }
    Ok(best)
}

/// Compute the directional PDP of a calibrated snapshot (Hann window,
/// zero-padded inverse transform, magnitude-square).
pub fn directional_pdp(snapshot: &CalibratedSnapshot, config: &SounderConfig) -> DirectionalPdp {
    let n = config.n_subcarriers;
    assert_eq!(snapshot.h.n_freq(), n, "tensor dims must match config");
    assert_eq!(snapshot.h.n_tx(), config.m_tx);
    assert_eq!(snapshot.h.n_rx(), config.m_rx);
    let m = config.n_delay_bins();
    let window = hann_unit_rms(n);
    // Scale so that sum_tau P = sum_f |H w|^2 / N (Parseval with a
    // unit-RMS window).
    let scale = 1.0 / ((m as f64 * n as f64).sqrt());

    let fft = FftPlanner::new().plan_fft_inverse(m);
    let n_pairs = config.m_tx * config.m_rx;
    let slices: Vec<Vec<f64>> = (0..n_pairs)
        .into_par_iter()
        .map(|pair_idx| {
            let rx = pair_idx / config.m_tx;
            let tx = pair_idx % config.m_tx;
            let h = snapshot.h.pair(tx, rx);
            let mut buf = vec![Complex64::new(0.0, 0.0); m];
            for k in 0..n {
                buf[k] = h[k] * window[k] * scale;
            }
            fft.process(&mut buf);
            buf.into_iter().map(|c| c.norm_sqr()).collect()
        })
        .collect();

    let mut p = Vec::with_capacity(n_pairs * m);
    for s in slices {
        p.extend_from_slice(&s);
    }

    let mut pdp = DirectionalPdp {
        p,
        n_bins: m,
        n_tx: config.m_tx,
        n_rx: config.m_rx,
        bin_m: config.oversampled_bin_m(),
        oversampling: config.oversampling_factor,
        noise_floor_est: 0.0,
        all_noise: false,
    };
    pdp.noise_floor_est = global_tail_mean(&pdp, ProcessingOptions::default().noise_tail_fraction);
    pdp
}

fn tail_bins(n_bins: usize, fraction: f64) -> usize {
    ((n_bins as f64 * fraction).ceil() as usize).clamp(1, n_bins)
}

fn global_tail_mean(pdp: &DirectionalPdp, fraction: f64) -> f64 {
    let k = tail_bins(pdp.n_bins, fraction);
    let mut sum = 0.0;
    for rx in 0..pdp.n_rx {
        for tx in 0..pdp.n_tx {
            let s = pdp.pair(tx, rx);
            sum += s[pdp.n_bins - k..].iter().sum::<f64>();
        }
    }
    sum / (k * pdp.n_tx * pdp.n_rx) as f64
}

/// Apply noise thresholding and delay gating.
///
/// Per direction pair, the mean noise power is estimated from the last
/// `noise_tail_fraction` of the delay axis; bins below
/// `noise + threshold_offset_db` are zeroed. The delay gate is then
/// anchored to the strongest surviving bin (the detected LOS peak) and
/// bins more than `gate_excess_m` past it are zeroed too. Idempotent:
/// reapplying never changes the result.
pub fn threshold_and_gate(pdp: &DirectionalPdp, opts: &ProcessingOptions) -> DirectionalPdp {
    let k = tail_bins(pdp.n_bins, opts.noise_tail_fraction);
    let offset = 10f64.powf(opts.threshold_offset_db / 10.0);

    let mut out = pdp.clone();
    for rx in 0..pdp.n_rx {
        for tx in 0..pdp.n_tx {
            let base = (rx * pdp.n_tx + tx) * pdp.n_bins;
            let raw = &pdp.p[base..base + pdp.n_bins];
            let noise_mean = raw[pdp.n_bins - k..].iter().sum::<f64>() / k as f64;
            let threshold = noise_mean * offset;
            let slice = &mut out.p[base..base + pdp.n_bins];
            for v in slice.iter_mut() {
                if *v < threshold {
                    *v = 0.0;
                }
            }
        }
    }

    // Delay gate anchored to the strongest surviving bin.
    let peak_bin = match strongest_bin(&out.p) {
        Ok(flat) => flat % out.n_bins,
        Err(_) => {
            out.all_noise = true;
            return out;
        }
    };
    let gate_m = out.delay_m(peak_bin) + opts.gate_excess_m;
    for rx in 0..out.n_rx {
        for tx in 0..out.n_tx {
            let base = (rx * out.n_tx + tx) * out.n_bins;
            for bin in 0..out.n_bins {
                if bin as f64 * out.bin_m > gate_m {
                    out.p[base + bin] = 0.0;
                }
            }
        }
    }
    out.all_noise = out.p.iter().all(|&v| v == 0.0);
    out
}

/// Synthesize the omnidirectional PDP: per delay bin, the maximum over
/// all direction pairs, recording which pair was selected. Ties go to
/// the lowest (tx, rx) pair.
pub fn synthesize_omni(pdp: &DirectionalPdp) -> OmniPdp {
    let mut p_omni = vec![0.0; pdp.n_bins];
    let mut sel_tx = vec![0u16; pdp.n_bins];
    let mut sel_rx = vec![0u16; pdp.n_bins];
    for tx in 0..pdp.n_tx {
        for rx in 0..pdp.n_rx {
            let s = pdp.pair(tx, rx);
            for bin in 0..pdp.n_bins {
                if s[bin] > p_omni[bin] {
                    p_omni[bin] = s[bin];
                    sel_tx[bin] = tx as u16;
                    sel_rx[bin] = rx as u16;
                }
            }
        }
    }
    OmniPdp { p_omni, sel_tx, sel_rx, bin_m: pdp.bin_m, oversampling: pdp.oversampling }
}

/// Pick the direction pair with the largest total power (path gain).
/// Ties go to the lowest (tx, rx) pair; errors when nothing survived
/// thresholding.
pub fn max_dir(pdp: &DirectionalPdp, config: &SounderConfig) -> Result<MaxDirPdp> {
    let mut best = None;
    let mut best_pg = 0.0;
    for tx in 0..pdp.n_tx {
        for rx in 0..pdp.n_rx {
            let pg: f64 = pdp.pair(tx, rx).iter().sum();
            if pg > best_pg {
                best_pg = pg;
                best = Some((tx, rx));
            }
        }
    }
    let (tx, rx) = best.ok_or(Error::NoSignal("no direction pair carries power"))?;
    Ok(MaxDirPdp {
        p_maxdir: pdp.pair(tx, rx).to_vec(),
        tx_index: tx,
        rx_index: rx,
        phi_tx_max_deg: config.tx_grid().angle_deg(tx),
        phi_rx_max_deg: config.rx_grid().angle_deg(rx),
        bin_m: pdp.bin_m,
        oversampling: pdp.oversampling,
    })
}

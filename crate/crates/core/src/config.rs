//! Sounder configuration and derived quantities.

use serde::{Deserialize, Serialize};

use crate::angle::AngleGrid;
use crate::error::{Error, Result};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Parameters of the rotating-beam sounder.
///
/// The defaults describe a 60 GHz sounder with a 200 MHz multitone
/// waveform (400 subcarriers at 500 kHz spacing), a mechanically rotated
/// 25° TX horn stepping in 36 × 10° positions and a 9° RX horn stepping
/// in 72 × 5° positions. One SIMO sweep (all RX directions for one TX
/// direction) takes 28 ms; a full MIMO snapshot takes 1.038 s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SounderConfig {
    /// Number of subcarriers across the measured bandwidth.
    pub n_subcarriers: usize,
    /// Measured bandwidth in Hz.
    pub bandwidth_hz: f64,
    /// Lowest RF frequency in Hz.
    pub f_start_hz: f64,
    /// Highest RF frequency in Hz (`f_start + bandwidth`).
    pub f_end_hz: f64,
    /// TX antenna 3 dB beamwidth in degrees.
    pub tx_beamwidth_deg: f64,
    /// RX antenna 3 dB beamwidth in degrees.
    pub rx_beamwidth_deg: f64,
    /// TX rotation resolution in degrees.
    pub tx_step_deg: f64,
    /// RX rotation resolution in degrees.
    pub rx_step_deg: f64,
    /// Number of TX beam positions (`m_tx * tx_step = 360`).
    pub m_tx: usize,
    /// Number of RX beam positions (`m_rx * rx_step = 360`).
    pub m_rx: usize,
    /// Capture trigger period in seconds.
    pub trigger_period_s: f64,
    /// SIMO snapshot duration in seconds (one full RX rotation).
    pub t_simo_s: f64,
    /// MIMO snapshot duration in seconds (one full TX rotation).
    pub t_mimo_s: f64,
    /// Usable dynamic range in dB: the delay-domain gap between the
    /// strongest path's PDP peak and the mean noise floor.
    pub dynamic_range_db: f64,
    /// Delay-domain oversampling factor (zero-padding before the
    /// inverse transform). Power of two, >= 1.
    pub oversampling_factor: usize,
}

impl Default for SounderConfig {
    fn default() -> Self {
        Self {
            n_subcarriers: 400,
            bandwidth_hz: 200e6,
            f_start_hz: 60.3e9,
            f_end_hz: 60.5e9,
            tx_beamwidth_deg: 25.0,
            rx_beamwidth_deg: 9.0,
            tx_step_deg: 10.0,
            rx_step_deg: 5.0,
            m_tx: 36,
            m_rx: 72,
            trigger_period_s: 200e-6,
            t_simo_s: 28e-3,
            t_mimo_s: 1.038,
            dynamic_range_db: 45.0,
            oversampling_factor: 4,
        }
    }
}

impl SounderConfig {
    /// Check all structural invariants, returning a field-level message
    /// on the first violation.
    pub fn validate(&self) -> Result<()> {
        fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::Config(msg()))
            }
        }
        let rel = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b.abs().max(1.0);

        check(self.n_subcarriers >= 2, || {
            format!("n_subcarriers must be >= 2, got {}", self.n_subcarriers)
        })?;
        check(self.bandwidth_hz > 0.0, || {
            format!("bandwidth_hz must be > 0, got {}", self.bandwidth_hz)
        })?;
        check(self.f_end_hz > self.f_start_hz && self.f_start_hz > 0.0, || {
            format!(
                "frequency range [{}, {}] Hz must be positive and increasing",
                self.f_start_hz, self.f_end_hz
            )
        })?;
        check(rel(self.f_end_hz - self.f_start_hz, self.bandwidth_hz), || {
            format!(
                "f_end - f_start = {} Hz must equal bandwidth_hz = {} Hz",
                self.f_end_hz - self.f_start_hz,
                self.bandwidth_hz
            )
        })?;
        check(self.m_tx >= 1 && rel(self.m_tx as f64 * self.tx_step_deg, 360.0), || {
            format!(
                "m_tx ({}) x tx_step_deg ({}) must cover 360 degrees",
                self.m_tx, self.tx_step_deg
            )
        })?;
        check(self.m_rx >= 1 && rel(self.m_rx as f64 * self.rx_step_deg, 360.0), || {
            format!(
                "m_rx ({}) x rx_step_deg ({}) must cover 360 degrees",
                self.m_rx, self.rx_step_deg
            )
        })?;
        check(self.tx_beamwidth_deg > 0.0 && self.rx_beamwidth_deg > 0.0, || {
            "beamwidths must be > 0".to_string()
        })?;
        check(
            self.oversampling_factor >= 1 && self.oversampling_factor.is_power_of_two(),
            || {
                format!(
                    "oversampling_factor must be a power of two >= 1, got {}",
                    self.oversampling_factor
                )
            },
        )?;
        check(self.trigger_period_s > 0.0 && self.t_simo_s > 0.0 && self.t_mimo_s > 0.0, || {
            "timing parameters must be > 0".to_string()
        })?;
        check(self.t_simo_s * self.m_tx as f64 <= self.t_mimo_s, || {
            format!(
                "m_tx SIMO sweeps ({} s) must fit within t_mimo_s ({} s)",
                self.t_simo_s * self.m_tx as f64,
                self.t_mimo_s
            )
        })?;
        check(self.dynamic_range_db > 0.0, || {
            format!("dynamic_range_db must be > 0, got {}", self.dynamic_range_db)
        })?;
        Ok(())
    }

    /// Subcarrier spacing in Hz (500 kHz for defaults).
    pub fn subcarrier_spacing_hz(&self) -> f64 {
        self.bandwidth_hz / self.n_subcarriers as f64
    }

    /// RF frequency of subcarrier `k` in Hz: `f_start + k * spacing`.
    /// The grid spans `[f_start, f_end)`, one DFT period.
    pub fn frequency_hz(&self, k: usize) -> f64 {
        self.f_start_hz + k as f64 * self.subcarrier_spacing_hz()
    }

    /// Carrier (band-center) frequency in Hz.
    pub fn carrier_hz(&self) -> f64 {
        0.5 * (self.f_start_hz + self.f_end_hz)
    }

    /// Carrier wavelength in metres.
    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz()
    }

    /// Maximum unambiguous propagation distance in metres
    /// (`c / subcarrier spacing`, about 600 m for defaults).
    pub fn max_range_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.subcarrier_spacing_hz()
    }

    /// Maximum unambiguous delay in seconds.
    pub fn max_delay_s(&self) -> f64 {
        1.0 / self.subcarrier_spacing_hz()
    }

    /// Pre-oversampling delay bin size in metres (`c / bandwidth`,
    /// 1.5 m for defaults).
    pub fn delay_bin_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.bandwidth_hz
    }

    /// Delay bin size of the oversampled PDP in metres.
    pub fn oversampled_bin_m(&self) -> f64 {
        self.delay_bin_m() / self.oversampling_factor as f64
    }

    /// Number of delay bins in the oversampled PDP.
    pub fn n_delay_bins(&self) -> usize {
        self.n_subcarriers * self.oversampling_factor
    }

    /// TX beam rotation grid (degrees relative to vehicle heading).
    pub fn tx_grid(&self) -> AngleGrid {
        AngleGrid::new(-180.0, self.tx_step_deg, self.m_tx)
    }

    /// RX beam rotation grid (degrees relative to vehicle heading).
    pub fn rx_grid(&self) -> AngleGrid {
        AngleGrid::new(-180.0, self.rx_step_deg, self.m_rx)
    }

    /// Capture time of direction pair `(tx_idx, rx_idx)` relative to the
    /// snapshot start: the TX advances once per SIMO sweep and the RX
    /// steps uniformly within it.
    pub fn capture_offset_s(&self, tx_idx: usize, rx_idx: usize) -> f64 {
        tx_idx as f64 * self.t_simo_s + rx_idx as f64 * self.t_simo_s / self.m_rx as f64
    }
}

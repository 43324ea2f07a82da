//! Rotating-beam sounder emulation.
//!
//! A capture turns the scene's multipath components into the measured
//! tensor `H_meas(f, phi_TX, phi_RX)`. For each of the `m_tx x m_rx`
//! direction pairs the channel is evaluated at that pair's capture time
//! (the TX advances once per SIMO sweep, the RX steps uniformly within
//! it), each MPC is weighted by both antenna patterns at its departure
//! and arrival offsets, and the delay enters as a linear phase across
//! the RF frequency grid:
//!
//! ```text
//! H(f, i, j) = sum_mpcs gain * g_tx(aod - beam_i) * g_rx(aoa - beam_j)
//!              * exp(-j 2 pi f tau)
//! ```
//!
//! Circular complex white noise is added per frequency sample and the
//! result is multiplied by the synthetic system transfer function, which
//! the calibration stage later removes.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angle::wrap_degrees;
use crate::config::SounderConfig;
use crate::error::Result;
use crate::pdp::hann_unit_rms;
use crate::scene::{generate_mpcs, MpcSet, Scene};
use crate::tensor::ComplexTensor;

/// Gaussian-in-dB antenna pattern parameterized by its 3 dB beamwidth.
///
/// The power gain is 1 at boresight, exactly -3 dB at +/- half the
/// beamwidth, and floors at -30 dB far off axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamPattern {
    pub beamwidth_3db_deg: f64,
}

/// Off-axis power floor of the pattern in dB.
pub const BEAM_FLOOR_DB: f64 = -30.0;

impl BeamPattern {
    pub fn new(beamwidth_3db_deg: f64) -> Self {
        assert!(beamwidth_3db_deg > 0.0);
        Self { beamwidth_3db_deg }
    }

    /// Power gain in dB at `offset_deg` from boresight.
    pub fn gain_db(&self, offset_deg: f64) -> f64 {
        let u = 2.0 * wrap_degrees(offset_deg) / self.beamwidth_3db_deg;
        (-3.0 * u * u).max(BEAM_FLOOR_DB)
    }

    /// Linear power gain.
    pub fn power_gain(&self, offset_deg: f64) -> f64 {
        10f64.powf(self.gain_db(offset_deg) / 10.0)
    }

    /// Linear amplitude gain (square root of the power gain).
    pub fn amplitude_gain(&self, offset_deg: f64) -> f64 {
        10f64.powf(self.gain_db(offset_deg) / 20.0)
    }
}

/// Parameters of the synthetic back-to-back system response.
///
/// The magnitude ripples sinusoidally across the band with the given
/// peak-to-peak depth and the phase carries a constant group delay.
/// All-zero parameters give the identity response.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemResponseSpec {
    /// Peak-to-peak magnitude ripple in dB (0 to 3).
    pub ripple_db: f64,
    /// Number of ripple periods across the band.
    pub ripple_cycles: f64,
    /// Group-delay offset in nanoseconds.
    pub group_delay_ns: f64,
}

impl Default for SystemResponseSpec {
    fn default() -> Self {
        Self { ripple_db: 0.0, ripple_cycles: 2.0, group_delay_ns: 0.0 }
    }
}

impl SystemResponseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=3.0).contains(&self.ripple_db) {
            return Err(crate::error::Error::Config(format!(
                "system ripple_db must be in [0, 3], got {}",
                self.ripple_db
            )));
        }
        if !self.group_delay_ns.is_finite() || !self.ripple_cycles.is_finite() {
            return Err(crate::error::Error::Config("non-finite system response spec".into()));
        }
        Ok(())
    }
}

/// Deterministic synthetic system transfer function, one sample per
/// subcarrier. Identical across direction pairs; used both when
/// generating measurements and when calibrating them.
pub fn system_response(config: &SounderConfig, spec: &SystemResponseSpec) -> Vec<Complex64> {
    let n = config.n_subcarriers;
    let tau_g = spec.group_delay_ns * 1e-9;
    (0..n)
        .map(|k| {
            let mag_db = 0.5
                * spec.ripple_db
                * (2.0 * std::f64::consts::PI * spec.ripple_cycles * k as f64 / n as f64).sin();
            let mag = 10f64.powf(mag_db / 20.0);
            let phase =
                -2.0 * std::f64::consts::PI * (config.frequency_hz(k) - config.f_start_hz) * tau_g;
            Complex64::from_polar(mag, phase)
        })
        .collect()
}

/// One captured MIMO snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct MimoSnapshot {
    pub index: usize,
    /// Capture start time in seconds (campaign clock).
    pub start_time_s: f64,
    /// Measured tensor, including noise and the system response.
    pub h_meas: ComplexTensor,
    /// Vehicle positions at the instant the snapshot represents: the
    /// temporal midpoint of the sweep (the start, in frozen mode).
    pub tx_pos_m: [f64; 2],
    pub rx_pos_m: [f64; 2],
}

impl MimoSnapshot {
    /// TX-RX distance in metres.
    pub fn distance_m(&self) -> f64 {
        let dx = self.rx_pos_m[0] - self.tx_pos_m[0];
        let dy = self.rx_pos_m[1] - self.tx_pos_m[1];
        (dx * dx + dy * dy).sqrt()
    }
}

/// Capture behaviour switches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CaptureOptions {
    /// Add receiver noise (floor set by `dynamic_range_db`).
    pub noise: bool,
    /// Evaluate all direction pairs at the snapshot start instead of at
    /// their rotation times. Used by oracle tests.
    pub frozen_snapshot: bool,
    pub system: SystemResponseSpec,
}

impl Default for CaptureOptions {
    fn default() -> Self {
        Self { noise: true, frozen_snapshot: false, system: SystemResponseSpec::default() }
    }
}

/// Synthesize the frequency response seen by one direction pair.
///
/// `tx_beam_deg` and `rx_beam_deg` are rotation angles in the vehicle
/// frame. MPC angles are converted through the headings in `mpcs`.
pub fn pair_transfer(
    mpcs: &MpcSet,
    config: &SounderConfig,
    tx_pattern: &BeamPattern,
    rx_pattern: &BeamPattern,
    tx_beam_deg: f64,
    rx_beam_deg: f64,
) -> Vec<Complex64> {
    let n = config.n_subcarriers;
    let df = config.subcarrier_spacing_hz();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for mpc in &mpcs.mpcs {
        let g_tx = tx_pattern.amplitude_gain(mpcs.aod_local_deg(mpc) - tx_beam_deg);
        let g_rx = rx_pattern.amplitude_gain(mpcs.aoa_local_deg(mpc) - rx_beam_deg);
        let amp = mpc.gain * g_tx * g_rx;
        // exp(-j 2 pi f_k tau) as a phasor recurrence over the grid.
        let phase0 = -2.0 * std::f64::consts::PI * config.f_start_hz * mpc.delay_s;
        let dphase = -2.0 * std::f64::consts::PI * df * mpc.delay_s;
        let mut c = amp * Complex64::from_polar(1.0, phase0);
        let step = Complex64::from_polar(1.0, dphase);
        for v in out.iter_mut() {
            *v += c;
            c *= step;
        }
    }
    out
}

/// Per-sample noise variance that places the mean delay-domain noise
/// floor `dynamic_range_db` below the PDP peak of a path with linear
/// power `peak_power`.
///
/// With the unit-RMS Hann window `w`, an on-grid path of amplitude `a`
/// peaks at `|a|^2 (sum w)^2 / (M N)` in the PDP while white noise of
/// variance `s^2` averages `s^2 / M` per bin, so the ratio is
/// `|a|^2 (sum w)^2 / (N s^2)`.
fn noise_variance(config: &SounderConfig, peak_power: f64) -> f64 {
    let n = config.n_subcarriers;
    let w = hann_unit_rms(n);
    let sum_w: f64 = w.iter().sum();
    peak_power * sum_w * sum_w / (n as f64 * 10f64.powf(config.dynamic_range_db / 10.0))
}

/// Capture one MIMO snapshot of the scene.
///
/// The snapshot starts at `campaign_t0 + index * t_mimo`. Noise draws
/// come from a per-pair ChaCha stream derived from `seed`, so results
/// are deterministic regardless of thread count or execution order.
pub fn capture_snapshot(
    scene: &Scene,
    config: &SounderConfig,
    campaign_t0: f64,
    index: usize,
    seed: u64,
    opts: &CaptureOptions,
) -> Result<MimoSnapshot> {
    let start = campaign_t0 + index as f64 * config.t_mimo_s;
    let tx_pattern = BeamPattern::new(config.tx_beamwidth_deg);
    let rx_pattern = BeamPattern::new(config.rx_beamwidth_deg);
    let tx_grid = config.tx_grid();
    let rx_grid = config.rx_grid();
    let n = config.n_subcarriers;

    // Reference power for the noise floor: strongest MPC at the snapshot
    // start (the LOS in LOS scenes).
    let start_set = generate_mpcs(scene, start, config)?;
    let sigma2 = if opts.noise { noise_variance(config, start_set.peak_power()) } else { 0.0 };
    let sigma = (sigma2 / 2.0).sqrt();

    let sys = system_response(config, &opts.system);
    let n_pairs = config.m_tx * config.m_rx;

    // Pair layout matches ComplexTensor: frequency fastest, then TX,
    // then RX.
    let pairs: Vec<Vec<Complex64>> = (0..n_pairs)
        .into_par_iter()
        .map(|pair_idx| -> Result<Vec<Complex64>> {
            let rx_idx = pair_idx / config.m_tx;
            let tx_idx = pair_idx % config.m_tx;
            let t = if opts.frozen_snapshot {
                start
            } else {
                start + config.capture_offset_s(tx_idx, rx_idx)
            };
            let mpcs = generate_mpcs(scene, t, config)?;
            let mut h = pair_transfer(
                &mpcs,
                config,
                &tx_pattern,
                &rx_pattern,
                tx_grid.angle_deg(tx_idx),
                rx_grid.angle_deg(rx_idx),
            );
            if opts.noise {
                let global_pair = index as u64 * n_pairs as u64 + pair_idx as u64;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(global_pair);
                for v in h.iter_mut() {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    *v += Complex64::new(sigma * re, sigma * im);
                }
            }
            for (v, s) in h.iter_mut().zip(&sys) {
                *v *= s;
            }
            Ok(h)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut data = Vec::with_capacity(n_pairs * n);
    for h in pairs {
        data.extend_from_slice(&h);
    }
    let h_meas = ComplexTensor::from_data(n, config.m_tx, config.m_rx, data)?;

    // Positions at the instant the snapshot represents.
    let pos_time = if opts.frozen_snapshot { start } else { start + 0.5 * config.t_mimo_s };
    let pos_set = generate_mpcs(scene, pos_time, config)?;

    Ok(MimoSnapshot {
        index,
        start_time_s: start,
        h_meas,
        tx_pos_m: pos_set.tx_pos_m,
        rx_pos_m: pos_set.rx_pos_m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{Mpc, MpcKind, Scatterer, Trajectory};

    fn cfg() -> SounderConfig {
        SounderConfig::default()
    }

    fn los_scene(rx_x: f64) -> Scene {
        Scene {
            name: "los".into(),
            los: true,
            tx: Trajectory::stationary([0.0, 0.0], 0.0),
            rx: Trajectory::stationary([rx_x, 0.0], 0.0),
            scatterers: vec![],
        }
    }

    fn noiseless() -> CaptureOptions {
        CaptureOptions { noise: false, frozen_snapshot: true, system: SystemResponseSpec::default() }
    }

    #[test]
    fn beam_pattern_boresight_and_3db_points() {
        let p = BeamPattern::new(25.0);
        assert_eq!(p.power_gain(0.0), 1.0);
        let edge = p.power_gain(12.5);
        assert!((edge - 10f64.powf(-0.3)).abs() < 1e-15);
        assert!((p.gain_db(12.5) + 3.0).abs() < 1e-12);
        assert!((p.gain_db(-12.5) + 3.0).abs() < 1e-12);
        // Far off axis the pattern floors at -30 dB.
        assert_eq!(p.gain_db(180.0), BEAM_FLOOR_DB);
    }

    #[test]
    fn boresight_pair_collects_maximum_power() {
        let cfg = cfg();
        let snap = capture_snapshot(&los_scene(10.0), &cfg, 0.0, 0, 0, &noiseless()).unwrap();
        let mut best = (0, 0);
        let mut best_p = -1.0;
        for tx in 0..cfg.m_tx {
            for rx in 0..cfg.m_rx {
                let p: f64 = snap.h_meas.pair(tx, rx).iter().map(|c| c.norm_sqr()).sum();
                if p > best_p {
                    best_p = p;
                    best = (tx, rx);
                }
            }
        }
        // AoD 0 (TX beam index 18), AoA -180 local (RX beam index 0).
        assert_eq!(best, (18, 0));
    }

    #[test]
    fn single_path_flat_magnitude_and_phase_slope() {
        let cfg = cfg();
        let tau = 85.0e-9;
        let mpcs = MpcSet {
            time_s: 0.0,
            tx_pos_m: [0.0, 0.0],
            rx_pos_m: [1.0, 0.0],
            tx_heading_deg: 0.0,
            rx_heading_deg: 0.0,
            mpcs: vec![Mpc {
                delay_s: tau,
                aod_deg: 0.0,
                aoa_deg: 180.0,
                gain: num_complex::Complex64::new(1e-4, 0.0),
                kind: MpcKind::Los,
            }],
        };
        let h = pair_transfer(
            &mpcs,
            &cfg,
            &BeamPattern::new(cfg.tx_beamwidth_deg),
            &BeamPattern::new(cfg.rx_beamwidth_deg),
            0.0,
            -180.0,
        );
        // Magnitude constant over frequency.
        for v in &h {
            assert!((v.norm() - 1e-4).abs() < 1e-12);
        }
        // Unwrapped phase slope = -2 pi tau per Hz; oracle evaluates the
        // expected per-subcarrier increment directly.
        let expected_step = -2.0 * std::f64::consts::PI * cfg.subcarrier_spacing_hz() * tau;
        let expected_step = (expected_step + std::f64::consts::PI)
            .rem_euclid(2.0 * std::f64::consts::PI)
            - std::f64::consts::PI;
        for pair in h.windows(2) {
            let d = (pair[1] / pair[0]).arg();
            assert!((d - expected_step).abs() < 1e-9);
        }
    }

    #[test]
    fn tx_gain_drops_3db_at_half_beamwidth_offset() {
        let cfg = cfg();
        let mpcs = MpcSet {
            time_s: 0.0,
            tx_pos_m: [0.0, 0.0],
            rx_pos_m: [1.0, 0.0],
            tx_heading_deg: 0.0,
            rx_heading_deg: 0.0,
            mpcs: vec![Mpc {
                delay_s: 50e-9,
                aod_deg: 12.5, // exactly half the 25-degree TX beamwidth
                aoa_deg: 180.0,
                gain: num_complex::Complex64::new(1.0, 0.0),
                kind: MpcKind::Los,
            }],
        };
        let tx_p = BeamPattern::new(cfg.tx_beamwidth_deg);
        let rx_p = BeamPattern::new(cfg.rx_beamwidth_deg);
        let on = pair_transfer(&mpcs, &cfg, &tx_p, &rx_p, 12.5, -180.0);
        let off = pair_transfer(&mpcs, &cfg, &tx_p, &rx_p, 0.0, -180.0);
        let ratio_db = 10.0 * (power(&off) / power(&on)).log10();
        assert!((ratio_db + 3.0).abs() < 1e-9, "got {ratio_db} dB");
    }

    fn power(h: &[num_complex::Complex64]) -> f64 {
        h.iter().map(|c| c.norm_sqr()).sum()
    }

    #[test]
    fn system_response_identity() {
        let sys = system_response(&cfg(), &SystemResponseSpec::default());
        for v in &sys {
            assert!((v - num_complex::Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn system_response_group_delay_phase_slope() {
        let cfg = cfg();
        let spec = SystemResponseSpec { group_delay_ns: 100.0, ..Default::default() };
        let sys = system_response(&cfg, &spec);
        // Unwrap the phase and fit its slope against frequency.
        let mut phase = 0.0;
        let mut prev = sys[0].arg();
        let mut slopes = Vec::new();
        for v in &sys[1..] {
            let mut d = v.arg() - prev;
            while d > std::f64::consts::PI {
                d -= 2.0 * std::f64::consts::PI;
            }
            while d < -std::f64::consts::PI {
                d += 2.0 * std::f64::consts::PI;
            }
            phase += d;
            prev = v.arg();
            slopes.push(phase);
        }
        let total_span = (cfg.n_subcarriers - 1) as f64 * cfg.subcarrier_spacing_hz();
        let tau = -slopes.last().unwrap() / (2.0 * std::f64::consts::PI * total_span);
        assert!((tau - 100e-9).abs() < 1e-15, "recovered {tau} s");
    }

    #[test]
    fn system_response_ripple_ratio() {
        let spec = SystemResponseSpec { ripple_db: 3.0, ..Default::default() };
        let sys = system_response(&cfg(), &spec);
        let max = sys.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let min = sys.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
        assert!((20.0 * (max / min).log10() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn doubling_gains_doubles_every_modulus() {
        let cfg = cfg();
        let scene = Scene {
            name: "two".into(),
            los: true,
            tx: Trajectory::stationary([0.0, 0.0], 0.0),
            rx: Trajectory::stationary([12.0, 0.0], 0.0),
            scatterers: vec![Scatterer::new([6.0, 7.0], 6.0, "wall")],
        };
        let mut base = generate_mpcs(&scene, 0.0, &cfg).unwrap();
        let tx_p = BeamPattern::new(cfg.tx_beamwidth_deg);
        let rx_p = BeamPattern::new(cfg.rx_beamwidth_deg);
        let h1 = pair_transfer(&base, &cfg, &tx_p, &rx_p, 40.0, -120.0);
        for m in &mut base.mpcs {
            m.gain *= 2.0;
        }
        let h2 = pair_transfer(&base, &cfg, &tx_p, &rx_p, 40.0, -120.0);
        for (a, b) in h1.iter().zip(&h2) {
            assert!((b.norm() - 2.0 * a.norm()).abs() < 1e-15 * b.norm().max(1e-300));
        }
    }

    #[test]
    fn capture_is_deterministic_for_fixed_seed() {
        let cfg = cfg();
        let opts = CaptureOptions::default();
        let a = capture_snapshot(&los_scene(15.0), &cfg, 0.0, 3, 42, &opts).unwrap();
        let b = capture_snapshot(&los_scene(15.0), &cfg, 0.0, 3, 42, &opts).unwrap();
        assert_eq!(a.h_meas, b.h_meas);
        let c = capture_snapshot(&los_scene(15.0), &cfg, 0.0, 3, 43, &opts).unwrap();
        assert_ne!(a.h_meas, c.h_meas);
    }

    #[test]
    fn snapshot_positions_at_sweep_midpoint() {
        let cfg = cfg();
        let scene = Scene {
            name: "drift".into(),
            los: true,
            tx: Trajectory::stationary([0.0, 0.0], 0.0),
            rx: Trajectory::new(vec![
                super::super::scene::Waypoint { time_s: 0.0, pos_m: [10.0, 0.0], heading_deg: 0.0 },
                super::super::scene::Waypoint {
                    time_s: 10.0,
                    pos_m: [30.0, 0.0],
                    heading_deg: 0.0,
                },
            ])
            .unwrap(),
            scatterers: vec![],
        };
        let snap = capture_snapshot(&scene, &cfg, 0.0, 0, 0, &noiseless()).unwrap();
        // Frozen mode: positions at the start.
        assert!((snap.rx_pos_m[0] - 10.0).abs() < 1e-12);
        let opts = CaptureOptions { noise: false, ..Default::default() };
        let snap = capture_snapshot(&scene, &cfg, 0.0, 0, 0, &opts).unwrap();
        assert!((snap.rx_pos_m[0] - (10.0 + 2.0 * 0.5 * cfg.t_mimo_s)).abs() < 1e-9);
    }
}

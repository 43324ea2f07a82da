//! System-response removal.
//!
//! Divides every direction pair's measured spectrum by the back-to-back
//! system transfer function, yielding the calibrated directional channel
//! transfer function H(f, phi_TX, phi_RX).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sounder::MimoSnapshot;
use crate::tensor::ComplexTensor;

/// A snapshot after system-response removal.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibratedSnapshot {
    pub index: usize,
    pub start_time_s: f64,
    /// Calibrated channel transfer function.
    pub h: ComplexTensor,
    pub tx_pos_m: [f64; 2],
    pub rx_pos_m: [f64; 2],
}

impl CalibratedSnapshot {
    pub fn distance_m(&self) -> f64 {
        let dx = self.rx_pos_m[0] - self.tx_pos_m[0];
        let dy = self.rx_pos_m[1] - self.tx_pos_m[1];
        (dx * dx + dy * dy).sqrt()
    }
}

/// Guard level: samples more than 60 dB below the median magnitude are
/// considered degenerate and rejected rather than divided by.
const ZERO_GUARD_DB: f64 = -60.0;

/// Elementwise frequency-domain division by the system response.
///
/// `sys` must have one sample per subcarrier and no degenerate samples.
pub fn calibrate(snapshot: &MimoSnapshot, sys: &[Complex64]) -> Result<CalibratedSnapshot> {
    let n = snapshot.h_meas.n_freq();
    if sys.len() != n {
        return Err(Error::Config(format!(
            "system response has {} samples, tensor has {} subcarriers",
            sys.len(),
            n
        )));
    }
    let mut mags: Vec<f64> = sys.iter().map(|v| v.norm()).collect();
    mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = mags[mags.len() / 2];
    let guard = median * 10f64.powf(ZERO_GUARD_DB / 20.0);
    for (k, v) in sys.iter().enumerate() {
        let m = v.norm();
        if m <= guard {
            return Err(Error::DegenerateSystemResponse {
                index: k,
                magnitude_db: 20.0 * (m / median.max(f64::MIN_POSITIVE)).log10(),
            });
        }
    }

    let mut h = snapshot.h_meas.clone();
    let n_tx = h.n_tx();
    let n_rx = h.n_rx();
    for rx in 0..n_rx {
        for tx in 0..n_tx {
            for (v, s) in h.pair_mut(tx, rx).iter_mut().zip(sys) {
                *v /= s;
            }
        }
    }
    Ok(CalibratedSnapshot {
        index: snapshot.index,
        start_time_s: snapshot.start_time_s,
        h,
        tx_pos_m: snapshot.tx_pos_m,
        rx_pos_m: snapshot.rx_pos_m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SounderConfig;
    use crate::scene::{Scene, Trajectory};
    use crate::sounder::{capture_snapshot, system_response, CaptureOptions, SystemResponseSpec};

    fn small_snapshot() -> MimoSnapshot {
        let mut t = ComplexTensor::zeros(4, 2, 2);
        for (i, v) in t.data_mut().iter_mut().enumerate() {
            *v = Complex64::new(i as f64 + 1.0, -(i as f64));
        }
        MimoSnapshot {
            index: 0,
            start_time_s: 0.0,
            h_meas: t,
            tx_pos_m: [0.0, 0.0],
            rx_pos_m: [1.0, 0.0],
        }
    }

    #[test]
    fn identity_response_is_a_no_op() {
        let snap = small_snapshot();
        let sys = vec![Complex64::new(1.0, 0.0); 4];
        let out = calibrate(&snap, &sys).unwrap();
        assert_eq!(out.h, snap.h_meas);
    }

    #[test]
    fn scalar_response_divides_exactly() {
        let snap = small_snapshot();
        let sys = vec![Complex64::new(2.0, 0.0); 4];
        let out = calibrate(&snap, &sys).unwrap();
        for (a, b) in out.h.data().iter().zip(snap.h_meas.data()) {
            assert_eq!(*a, b / 2.0);
        }
    }

    #[test]
    fn rejects_near_zero_samples() {
        let snap = small_snapshot();
        let mut sys = vec![Complex64::new(1.0, 0.0); 4];
        sys[2] = Complex64::new(1e-7, 0.0);
        match calibrate(&snap, &sys) {
            Err(Error::DegenerateSystemResponse { index, .. }) => assert_eq!(index, 2),
            other => panic!("expected degenerate-response error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_length_mismatch() {
        let snap = small_snapshot();
        let sys = vec![Complex64::new(1.0, 0.0); 3];
        assert!(calibrate(&snap, &sys).is_err());
    }

    #[test]
    fn round_trip_through_system_response_is_exact_without_noise() {
        let cfg = SounderConfig::default();
        let scene = Scene {
            name: "rt".into(),
            los: true,
            tx: Trajectory::stationary([0.0, 0.0], 0.0),
            rx: Trajectory::stationary([14.0, 3.0], 0.0),
            scatterers: vec![],
        };
        let spec = SystemResponseSpec { ripple_db: 3.0, group_delay_ns: 40.0, ripple_cycles: 2.0 };
        let with_sys = CaptureOptions { noise: false, frozen_snapshot: true, system: spec };
        let identity = CaptureOptions {
            noise: false,
            frozen_snapshot: true,
            system: SystemResponseSpec::default(),
        };
        let measured = capture_snapshot(&scene, &cfg, 0.0, 0, 0, &with_sys).unwrap();
        let reference = capture_snapshot(&scene, &cfg, 0.0, 0, 0, &identity).unwrap();
        let sys = system_response(&cfg, &spec);
        let calibrated = calibrate(&measured, &sys).unwrap();
        for (a, b) in calibrated.h.data().iter().zip(reference.h_meas.data()) {
            assert!((a - b).norm() <= 1e-12 * b.norm().max(1e-30), "{a} vs {b}");
        }
    }
}

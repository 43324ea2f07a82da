//! Geometric ground truth: vehicle trajectories and point scatterers
//! produce a time-indexed list of multipath components (MPCs).
//!
//! Geometry is 2D (azimuth plane only). Azimuths follow the convention
//! in [`crate::angle`]: degrees counterclockwise from +x. The angle of
//! departure (AoD) is the azimuth of the first interaction point as seen
//! from the TX; the angle of arrival (AoA) is the azimuth of the last
//! interaction point as seen from the RX, i.e. the direction a beam must
//! point to receive the path. Both are stored in the global frame and
//! converted to the vehicle-local frame with the headings carried by the
//! [`MpcSet`].
//!
//! Amplitudes follow the free-space (Friis) relation at the carrier:
//! `|gain| = lambda / (4 pi d_total)`, with single-bounce paths further
//! attenuated by the scatterer's reflection loss. Only the line-of-sight
//! and single-bounce mechanisms are modelled, which reproduces the
//! qualitative structure of street scenes (lamp-posts, facades, parked
//! vehicles) without diffraction or occlusion.

pub mod presets;

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::angle::wrap_degrees;
use crate::config::{SounderConfig, SPEED_OF_LIGHT};
use crate::error::{Error, Result};

/// One trajectory sample: time, 2D position, vehicle heading.
///
/// Headings may be given unwrapped (e.g. 0 -> 90 -> 270 -> 450 through a
/// full turn) so that piecewise-linear interpolation sweeps the intended
/// arc; they are wrapped to `[-180, 180)` only at evaluation time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Waypoint {
    pub time_s: f64,
    pub pos_m: [f64; 2],
    pub heading_deg: f64,
}

/// Piecewise-linear vehicle trajectory.
///
/// A single-waypoint trajectory is stationary and covers all of time;
/// otherwise queries outside `[first, last]` are errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trajectory {
    pub waypoints: Vec<Waypoint>,
}

impl Trajectory {
    pub fn new(waypoints: Vec<Waypoint>) -> Result<Self> {
        let t = Self { waypoints };
        t.validate()?;
        Ok(t)
    }

    /// A vehicle parked at `pos_m` with the given heading.
    pub fn stationary(pos_m: [f64; 2], heading_deg: f64) -> Self {
        Self { waypoints: vec![Waypoint { time_s: 0.0, pos_m, heading_deg }] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.waypoints.is_empty() {
            return Err(Error::Config("trajectory has no waypoints".into()));
        }
        for w in &self.waypoints {
            let finite = w.time_s.is_finite()
                && w.pos_m.iter().all(|v| v.is_finite())
                && w.heading_deg.is_finite();
            if !finite {
                return Err(Error::Config(format!("non-finite waypoint: {w:?}")));
            }
        }
        for pair in self.waypoints.windows(2) {
            if pair[1].time_s <= pair[0].time_s {
                return Err(Error::Config(format!(
                    "waypoint times must be strictly increasing: {} then {}",
                    pair[0].time_s, pair[1].time_s
                )));
            }
        }
        Ok(())
    }

    /// Covered time span, or `None` for a stationary trajectory
    /// (which covers all of time).
    pub fn span(&self) -> Option<(f64, f64)> {
        if self.waypoints.len() == 1 {
            None
        } else {
            Some((self.waypoints[0].time_s, self.waypoints.last().unwrap().time_s))
        }
    }

    /// Interpolated state at `time_s`.
    pub fn sample(&self, time_s: f64) -> Result<Waypoint> {
        if self.waypoints.len() == 1 {
            let mut w = self.waypoints[0];
            w.time_s = time_s;
            return Ok(w);
        }
        let (start, end) = self.span().unwrap();
        if time_s < start || time_s > end {
            return Err(Error::TimeOutsideTrajectory { time_s, start_s: start, end_s: end });
        }
        let seg = self
            .waypoints
            .windows(2)
            .position(|p| time_s <= p[1].time_s)
            .unwrap_or(self.waypoints.len() - 2);
        let a = self.waypoints[seg];
        let b = self.waypoints[seg + 1];
        let u = (time_s - a.time_s) / (b.time_s - a.time_s);
        Ok(Waypoint {
            time_s,
            pos_m: [
                a.pos_m[0] + u * (b.pos_m[0] - a.pos_m[0]),
                a.pos_m[1] + u * (b.pos_m[1] - a.pos_m[1]),
            ],
            heading_deg: a.heading_deg + u * (b.heading_deg - a.heading_deg),
        })
    }
}

/// A point scatterer producing one single-bounce path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scatterer {
    pub pos_m: [f64; 2],
    /// Reflection loss in dB (>= 0), applied on top of the free-space
    /// loss of the full bounce path.
    pub reflection_loss_db: f64,
    pub label: String,
}

impl Scatterer {
    pub fn new(pos_m: [f64; 2], reflection_loss_db: f64, label: impl Into<String>) -> Self {
        Self { pos_m, reflection_loss_db, label: label.into() }
    }

    /// Building facade with the default 10 dB reflection loss.
    pub fn facade(pos_m: [f64; 2]) -> Self {
        Self::new(pos_m, 10.0, "building facade")
    }

    /// Metallic lamp-post with the default 20 dB reflection loss.
    pub fn lamp_post(pos_m: [f64; 2]) -> Self {
        Self::new(pos_m, 20.0, "lamp-post")
    }

    /// Parked truck with the default 12 dB reflection loss.
    pub fn truck(pos_m: [f64; 2]) -> Self {
        Self::new(pos_m, 12.0, "parked truck")
    }
}

/// Propagation mechanism of an MPC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MpcKind {
    Los,
    SingleBounce,
}

/// One multipath component at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Mpc {
    /// Propagation delay in seconds (> 0).
    pub delay_s: f64,
    /// Angle of departure in the global frame, degrees.
    pub aod_deg: f64,
    /// Angle of arrival in the global frame, degrees.
    pub aoa_deg: f64,
    /// Complex linear amplitude (Friis magnitude, zero phase at tau = 0;
    /// the carrier-frequency delay term supplies the phase rotation).
    pub gain: Complex64,
    pub kind: MpcKind,
}

impl Mpc {
    /// Path length in metres.
    pub fn path_length_m(&self) -> f64 {
        self.delay_s * SPEED_OF_LIGHT
    }
}

/// All MPCs at one instant, with the link geometry they belong to.
#[derive(Debug, Clone, PartialEq)]
pub struct MpcSet {
    pub time_s: f64,
    pub tx_pos_m: [f64; 2],
    pub rx_pos_m: [f64; 2],
    pub tx_heading_deg: f64,
    pub rx_heading_deg: f64,
    pub mpcs: Vec<Mpc>,
}

impl MpcSet {
    /// TX-RX Euclidean distance in metres.
    pub fn distance_m(&self) -> f64 {
        let dx = self.rx_pos_m[0] - self.tx_pos_m[0];
        let dy = self.rx_pos_m[1] - self.tx_pos_m[1];
        (dx * dx + dy * dy).sqrt()
    }

    /// AoD of `mpc` in the TX vehicle frame (0 = vehicle heading).
    pub fn aod_local_deg(&self, mpc: &Mpc) -> f64 {
        wrap_degrees(mpc.aod_deg - self.tx_heading_deg)
    }

    /// AoA of `mpc` in the RX vehicle frame (0 = vehicle heading).
    pub fn aoa_local_deg(&self, mpc: &Mpc) -> f64 {
        wrap_degrees(mpc.aoa_deg - self.rx_heading_deg)
    }

    /// Strongest MPC power, linear. 0.0 for an empty set.
    pub fn peak_power(&self) -> f64 {
        self.mpcs.iter().map(|m| m.gain.norm_sqr()).fold(0.0, f64::max)
    }
}

/// A full scene: two trajectories, scatterers, and the LOS flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    pub name: String,
    /// Whether the direct path exists (all shipped presets keep it).
    pub los: bool,
    pub tx: Trajectory,
    pub rx: Trajectory,
    #[serde(default)]
    pub scatterers: Vec<Scatterer>,
}

impl Scene {
    pub fn validate(&self) -> Result<()> {
        self.tx.validate()?;
        self.rx.validate()?;
        for s in &self.scatterers {
            if s.reflection_loss_db < 0.0 {
                return Err(Error::Config(format!(
                    "scatterer '{}' has negative reflection loss {}",
                    s.label, s.reflection_loss_db
                )));
            }
            if !s.pos_m.iter().all(|v| v.is_finite()) {
                return Err(Error::Config(format!("scatterer '{}' has non-finite position", s.label)));
            }
        }
        Ok(())
    }

    /// Intersection of the two trajectory spans, if either is bounded.
    pub fn span(&self) -> Option<(f64, f64)> {
        match (self.tx.span(), self.rx.span()) {
            (None, None) => None,
            (Some(s), None) | (None, Some(s)) => Some(s),
            (Some((a0, a1)), Some((b0, b1))) => Some((a0.max(b0), a1.min(b1))),
        }
    }

    /// Parse a scene description file (TOML).
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let scene: Scene = toml::from_str(&text)
            .map_err(|e| Error::Malformed { path: path.into(), reason: e.to_string() })?;
        scene.validate()?;
        Ok(scene)
    }

    /// Serialize to the scene description format (TOML).
    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("scene serialization cannot fail")
    }

    pub fn write_to(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_toml_string()).map_err(|e| Error::io(path, e))
    }
}

fn azimuth_deg(from: [f64; 2], to: [f64; 2]) -> f64 {
    (to[1] - from[1]).atan2(to[0] - from[0]).to_degrees()
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
}

/// Evaluate the scene's multipath components at one instant.
///
/// The LOS component (when enabled) carries the Friis amplitude at the
/// carrier; each scatterer contributes one single-bounce path of length
/// `d(tx, s) + d(s, rx)` with the Friis amplitude of the full path,
/// further attenuated by the scatterer's reflection loss. Components
/// beyond the sounder's unambiguous range are dropped, as are bounces
/// through a scatterer that coincides with either vehicle.
pub fn generate_mpcs(scene: &Scene, time_s: f64, config: &SounderConfig) -> Result<MpcSet> {
    let tx = scene.tx.sample(time_s)?;
    let rx = scene.rx.sample(time_s)?;
    let d_los = dist(tx.pos_m, rx.pos_m);
    if d_los < 1e-9 {
        return Err(Error::CoincidentPositions { x: tx.pos_m[0], y: tx.pos_m[1] });
    }

    let lambda = config.wavelength_m();
    let max_delay = config.max_delay_s();
    let friis = |d: f64| lambda / (4.0 * std::f64::consts::PI * d);

    let mut mpcs = Vec::with_capacity(1 + scene.scatterers.len());
    if scene.los {
        let delay = d_los / SPEED_OF_LIGHT;
        if delay <= max_delay {
            mpcs.push(Mpc {
                delay_s: delay,
                aod_deg: azimuth_deg(tx.pos_m, rx.pos_m),
                aoa_deg: azimuth_deg(rx.pos_m, tx.pos_m),
                gain: Complex64::new(friis(d_los), 0.0),
                kind: MpcKind::Los,
            });
        }
    }
    for s in &scene.scatterers {
        let d1 = dist(tx.pos_m, s.pos_m);
        let d2 = dist(s.pos_m, rx.pos_m);
        if d1 < 1e-9 || d2 < 1e-9 {
            continue;
        }
        let total = d1 + d2;
        let delay = total / SPEED_OF_LIGHT;
        if delay > max_delay {
            continue;
        }
        let amp = friis(total) * 10f64.powf(-s.reflection_loss_db / 20.0);
        mpcs.push(Mpc {
            delay_s: delay,
            aod_deg: azimuth_deg(tx.pos_m, s.pos_m),
            aoa_deg: azimuth_deg(rx.pos_m, s.pos_m),
            gain: Complex64::new(amp, 0.0),
            kind: MpcKind::SingleBounce,
        });
    }

    Ok(MpcSet {
        time_s,
        tx_pos_m: tx.pos_m,
        rx_pos_m: rx.pos_m,
        tx_heading_deg: wrap_degrees(tx.heading_deg),
        rx_heading_deg: wrap_degrees(rx.heading_deg),
        mpcs,
    })
}

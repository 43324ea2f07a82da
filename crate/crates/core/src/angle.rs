//! Azimuth angle arithmetic and the beam rotation grid.
//!
//! Azimuths are measured in degrees counterclockwise from the +x axis
//! and wrapped to `[-180, 180)`.

use serde::{Deserialize, Serialize};

/// Wrap an angle in degrees to `[-180, 180)`.
pub fn wrap_degrees(angle_deg: f64) -> f64 {
    let w = (angle_deg + 180.0).rem_euclid(360.0) - 180.0;
    // rem_euclid can return exactly 360 for tiny negative inputs
    // (e.g. -1e-14 + 180 rounds to 180, 180 rem 360 = 180).
    if w >= 180.0 {
        w - 360.0
    } else {
        w
    }
}

/// Absolute angular distance between two azimuths, in `[0, 180]` degrees.
pub fn angular_distance_deg(a_deg: f64, b_deg: f64) -> f64 {
    wrap_degrees(a_deg - b_deg).abs()
}

/// A uniform beam rotation grid covering `[-180, 180)` exactly once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleGrid {
    /// First beam angle in degrees (always -180 for the sounder).
    pub start_deg: f64,
    /// Step between beams in degrees.
    pub step_deg: f64,
    /// Number of beams (`step * count = 360`).
    pub count: usize,
}

impl AngleGrid {
    /// Build a grid. Panics if `step * count != 360`; grids come from a
    /// validated `SounderConfig` or from test code.
    pub fn new(start_deg: f64, step_deg: f64, count: usize) -> Self {
        assert!(count >= 1, "grid needs at least one beam");
        assert!(
            (step_deg * count as f64 - 360.0).abs() < 1e-9,
            "grid must cover 360 degrees: step {step_deg} x count {count}"
        );
        Self { start_deg, step_deg, count }
    }

    /// Angle of beam `index` in degrees, wrapped to `[-180, 180)`.
    pub fn angle_deg(&self, index: usize) -> f64 {
        wrap_degrees(self.start_deg + index as f64 * self.step_deg)
    }

    /// All beam angles in index order.
    pub fn angles_deg(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.angle_deg(i)).collect()
    }
}

/// Nearest grid index to `angle_deg` with modulo-360 wrap.
///
/// Ties (an angle exactly halfway between two beams) go to the lower
/// index. Total function: any finite angle maps to a valid index.
pub fn angle_index(angle_deg: f64, grid: &AngleGrid) -> usize {
    let mut best = 0;
    let mut best_dist = f64::INFINITY;
    for k in 0..grid.count {
        let d = angular_distance_deg(angle_deg, grid.angle_deg(k));
        if d < best_dist {
            best_dist = d;
            best = k;
        }
    }
    best
}

//! Shipped scene presets: convoy, opposite lanes, overtaking.
//!
//! All three place two vehicles on a straight urban street segment with
//! regularly spaced roadside scatterers. The convoy preset keeps a
//! 10.5-14.5 m separation at ~4 m/s and is tuned so that, with default
//! sounder settings, the omni RMS delay spread falls in the tens of
//! nanoseconds and the strongest-peak power ratio lands around 13 dB.
//! The other two presets share a wider six-lane street where the
//! vehicles approach from a few hundred metres, pass, and recede.
//!
//! The same definitions ship as scene files under `scenes/`; a test
//! keeps files and code in sync.

use super::{Scatterer, Scene, Trajectory, Waypoint};

/// A named built-in scene.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Convoy,
    Opposite,
    Overtaking,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Convoy, Preset::Opposite, Preset::Overtaking];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Convoy => "convoy",
            Preset::Opposite => "opposite",
            Preset::Overtaking => "overtaking",
        }
    }

    /// Look up a preset by name.
    pub fn by_name(name: &str) -> Option<Preset> {
        Preset::ALL.iter().copied().find(|p| p.name() == name)
    }

    pub fn scene(self) -> Scene {
        match self {
            Preset::Convoy => convoy(),
            Preset::Opposite => opposite(),
            Preset::Overtaking => overtaking(),
        }
    }
}

const DRIVING_SPEED_MPS: f64 = 4.0;

/// Road furniture shared by the wide-street scenarios: lamp-posts on
/// both sidewalks plus a sparse row of building facades.
fn wide_street_furniture(x_min: f64, x_max: f64) -> Vec<Scatterer> {
    let mut out = Vec::new();
    let mut x = x_min;
    while x <= x_max {
        out.push(Scatterer::lamp_post([x, 14.0]));
        out.push(Scatterer::lamp_post([x + 12.5, -14.0]));
        x += 25.0;
    }
    let mut x = x_min + 20.0;
    while x <= x_max {
        out.push(Scatterer::facade([x, 30.0]));
        out.push(Scatterer::facade([x + 30.0, -30.0]));
        x += 60.0;
    }
    // Large building at the far intersection, a strong specular wall.
    out.push(Scatterer::new([150.0, 26.0], 3.0, "postal building"));
    out
}

/// Two trucks in convoy on a narrower campus street. Separation
/// oscillates between 10.5 m and 14.5 m around 12.5 m while both drive
/// at ~4 m/s. Strong facades and metal containers line both sides at
/// ~22-26 m lateral offset; lamp-posts sit closer to the kerb.
pub fn convoy() -> Scene {
    let duration_s = 130.0;
    let step_s = 1.0;
    let n = (duration_s / step_s) as usize;

    let tx = Trajectory {
        waypoints: vec![
            Waypoint { time_s: 0.0, pos_m: [0.0, 0.0], heading_deg: 0.0 },
            Waypoint {
                time_s: duration_s,
                pos_m: [DRIVING_SPEED_MPS * duration_s, 0.0],
                heading_deg: 0.0,
            },
        ],
    };
    // Leading truck: same speed plus a slow separation oscillation.
    let rx = Trajectory {
        waypoints: (0..=n)
            .map(|i| {
                let t = i as f64 * step_s;
                let sep = 12.5 + 2.0 * (2.0 * std::f64::consts::PI * t / 45.0).sin();
                Waypoint { time_s: t, pos_m: [DRIVING_SPEED_MPS * t + sep, 0.0], heading_deg: 0.0 }
            })
            .collect(),
    };

    let road_end = DRIVING_SPEED_MPS * duration_s + 60.0;
    let mut scatterers = Vec::new();
    // Strong reflectors: facades and metal containers set back from the
    // street. These carry most of the echo power and sit 30-70 m of
    // excess path behind the LOS.
    let mut x = -30.0;
    let mut flip = false;
    while x <= road_end {
        let loss = if flip { 4.0 } else { 5.0 };
        scatterers.push(Scatterer::new([x, 22.0], loss, "building facade"));
        scatterers.push(Scatterer::new([x + 15.0, -26.0], loss + 1.0, "metal container"));
        flip = !flip;
        x += 30.0;
    }
    // Kerb-side lamp-posts, weak individually.
    let mut x = -25.0;
    while x <= road_end {
        scatterers.push(Scatterer::lamp_post([x, 8.0]));
        scatterers.push(Scatterer::lamp_post([x + 12.5, -8.0]));
        x += 25.0;
    }
    // Occasional parked trucks near the kerb.
    let mut x = 10.0;
    while x <= road_end {
        scatterers.push(Scatterer::truck([x, -6.0]));
        x += 90.0;
    }

    Scene { name: "convoy".into(), los: true, tx, rx, scatterers }
}

/// Two trucks on opposite lanes of a six-lane street: they start 460 m
/// apart, pass each other at 12 m lateral offset around t = 57.5 s, and
/// recede again.
pub fn opposite() -> Scene {
    let duration_s = 120.0;
    let tx = Trajectory {
        waypoints: vec![
            Waypoint { time_s: 0.0, pos_m: [0.0, -6.0], heading_deg: 0.0 },
            Waypoint {
                time_s: duration_s,
                pos_m: [DRIVING_SPEED_MPS * duration_s, -6.0],
                heading_deg: 0.0,
            },
        ],
    };
    let rx = Trajectory {
        waypoints: vec![
            Waypoint { time_s: 0.0, pos_m: [460.0, 6.0], heading_deg: 180.0 },
            Waypoint {
                time_s: duration_s,
                pos_m: [460.0 - DRIVING_SPEED_MPS * duration_s, 6.0],
                heading_deg: 180.0,
            },
        ],
    };
    Scene {
        name: "opposite".into(),
        los: true,
        tx,
        rx,
        scatterers: wide_street_furniture(-40.0, 500.0),
    }
}

/// Overtaking on the same street: the TX truck is parked mid-segment
/// while the RX drives the full length past it.
pub fn overtaking() -> Scene {
    let duration_s = 120.0;
    let tx = Trajectory::stationary([240.0, -6.0], 0.0);
    let rx = Trajectory {
        waypoints: vec![
            Waypoint { time_s: 0.0, pos_m: [0.0, 6.0], heading_deg: 0.0 },
            Waypoint {
                time_s: duration_s,
                pos_m: [DRIVING_SPEED_MPS * duration_s, 6.0],
                heading_deg: 0.0,
            },
        ],
    };
    Scene {
        name: "overtaking".into(),
        los: true,
        tx,
        rx,
        scatterers: wide_street_furniture(-40.0, 500.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SounderConfig;
    use crate::scene::generate_mpcs;

    #[test]
    fn all_presets_validate() {
        for p in Preset::ALL {
            let scene = p.scene();
            scene.validate().unwrap();
            assert_eq!(scene.name, p.name());
            assert!(Preset::by_name(p.name()).is_some());
        }
        assert!(Preset::by_name("motorway").is_none());
    }

    #[test]
    fn convoy_separation_stays_in_band() {
        let scene = convoy();
        let cfg = SounderConfig::default();
        let (t0, t1) = scene.span().unwrap();
        let mut t = t0;
        while t <= t1 {
            let set = generate_mpcs(&scene, t, &cfg).unwrap();
            let d = set.distance_m();
            assert!((4.0..=18.0).contains(&d), "separation {d} m at t={t} outside 4-18 m");
            t += 0.5;
        }
    }

    #[test]
    fn presets_keep_los_within_range() {
        let cfg = SounderConfig::default();
        for p in Preset::ALL {
            let scene = p.scene();
            let (t0, t1) = scene.span().unwrap();
            for frac in [0.0, 0.25, 0.5, 0.75, 1.0] {
                let t = t0 + frac * (t1 - t0);
                let set = generate_mpcs(&scene, t, &cfg).unwrap();
                assert!(
                    set.mpcs.iter().any(|m| m.kind == crate::scene::MpcKind::Los),
                    "{} lost LOS at t={t}",
                    p.name()
                );
            }
        }
    }

    #[test]
    fn presets_cover_at_least_100_snapshots() {
        let cfg = SounderConfig::default();
        for p in Preset::ALL {
            let (t0, t1) = p.scene().span().unwrap();
            assert!(t1 - t0 >= 100.0 * cfg.t_mimo_s + cfg.t_mimo_s, "{} span too short", p.name());
        }
    }
}

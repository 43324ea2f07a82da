//! Desk-scale laboratory for double-directional mm-wave V2V channel sounding.
//!
//! The crate simulates geometric propagation scenes between two moving
//! vehicles, emulates a rotating-beam channel sounder that sweeps a full
//! 360° azimuth grid at both link ends, and runs the complete
//! parameter-extraction pipeline on the captured data: calibration,
//! windowed delay-domain transform, noise thresholding and delay gating,
//! omnidirectional / max-dir PDP synthesis, and condensed channel
//! parameters (path gain, RMS delay spread, angular spreads, MPC power
//! ratio, stationarity regions, path-loss fit).
//!
//! Pipeline overview:
//!
//! ```text
//! scene ──► capture ──► calibrate ──► directional PDP ──► threshold/gate
//!                                                            │
//!                 stats ◄── params ◄── omni / max-dir PDP ◄──┘
//! ```
//!
//! All angles are degrees at module boundaries (radians only inside the
//! circular-moment arithmetic), delays are seconds or metres as named,
//! and powers are linear unless a name carries a `_db` suffix.

pub mod angle;
pub mod calib;
pub mod config;
pub mod error;
pub mod io;
pub mod params;
pub mod pdp;
pub mod pipeline;
pub mod scene;
pub mod sounder;
pub mod tensor;

pub use angle::{angle_index, wrap_degrees, AngleGrid};
pub use config::{SounderConfig, SPEED_OF_LIGHT};
pub use error::{Error, Result};
pub use tensor::ComplexTensor;

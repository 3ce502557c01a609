//! Time-to-transit steering for a planar constant-speed vehicle.
//!
//! This crate is `no_std` (it needs `alloc`) and holds every pure
//! computation of the toolkit:
//!
//! * [`sensing`]: geometric and image-plane time-to-transit for a
//!   side-looking pinhole camera.
//! * [`control`]: the circling, distance-keeping and passing steering laws
//!   plus closed-form heading results for the distance-keeping law.
//! * [`sim`]: fixed-step integration of the unicycle model.
//! * [`protocol`]: guarded switching between steering laws.
//! * [`trajproc`]: smoothing splines, arc-length resampling, side
//!   classification and mean paths for recorded tracks.
//!
//! File formats, CSV/SVG output and the command-line front end live in the
//! `taunav` crate.
#![cfg_attr(not(test), no_std)]
// Negated comparisons below deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::result_large_err)]

extern crate alloc;

pub mod control;
pub mod error;
pub mod geom;
pub mod protocol;
pub mod scene;
pub mod sensing;
pub mod sim;
pub mod trajproc;

pub use error::{Error, Result};
pub use geom::{normalize_angle, Vec2};
pub use scene::{Bounds, Feature, Scene};
pub use sensing::{Camera, CameraSide, ImageObservation, Pose};

//! File formats, CSV and SVG output, and the `taunav` command set on top of
//! [`taunav_core`].

pub mod cli;
pub mod csvio;
pub mod format;
pub mod svg;

pub use format::{parse_protocol, parse_scene, print_protocol, print_scene, ParseError, SceneFile};

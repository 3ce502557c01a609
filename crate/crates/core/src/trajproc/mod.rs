//! Processing of recorded tracks: smoothing, arc-length resampling,
//! truncation, side classification, class means and curve distances.

mod analysis;
mod arc;
mod spline;
mod track;

pub use analysis::{
    classify_side, curve_distance, mean_trajectory, polyline_signed_offset, woods_excursion_after, CurveDistance, Side,
    SideLabel,
};
pub use arc::{
    arc_length, arc_param_at, arc_reparam, truncate_common, truncate_common_with, ArcCurve, PlanarCurve, Rejection,
};
pub use spline::{solve_pentadiagonal_spd, NaturalCubic};
pub use track::{chord_abscissae, fit_smoothing_spline, Projection, RawTrack, SmoothingSpline, TrackPoint};

//! Time-to-transit from geometry and from image flow of a side-looking
//! pinhole camera.
//!
//! Body frame: `x` along the heading, `y` to the left. The camera's image
//! line is the body `x` axis and its focal point sits at `(0, -f)` for a
//! right-facing camera (`(0, f)` when facing left). A feature at longitudinal
//! offset `x` and lateral distance `d` from the image line images at
//!
//! ```text
//! d / (x - d_i) = -f / d_i   =>   d_i = -f x / (d - f)
//! ```
//!
//! so features ahead image at negative `d_i` and move toward `0` as the
//! vehicle approaches transit. Only features farther than `f` from the image
//! line, on the camera's side, form a real image.

use crate::geom::{normalize_angle, Vec2};
use crate::scene::Feature;
use crate::{Error, Result};

/// Flow magnitude below which [`image_tau`] refuses to divide.
pub const DEFAULT_FLOW_EPS: f64 = 1e-12;

/// Planar configuration `(x, y, theta)`, heading kept in `(-PI, PI]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta: normalize_angle(theta) }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn heading(&self) -> Vec2 {
        Vec2::from_angle(self.theta)
    }

    /// World point expressed in the body frame: (longitudinal, lateral-left).
    pub fn to_body(&self, p: Vec2) -> (f64, f64) {
        let (s, c) = libm::sincos(self.theta);
        let dx = p.x - self.x;
        let dy = p.y - self.y;
        (c * dx + s * dy, -s * dx + c * dy)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CameraSide {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    focal_length: f64,
    side: CameraSide,
}

impl Camera {
    pub fn new(focal_length: f64, side: CameraSide) -> Result<Self> {
        if !(focal_length > 0.0 && focal_length.is_finite()) {
            return Err(Error::Domain("focal length must be positive"));
        }
        Ok(Self { focal_length, side })
    }

    pub fn focal_length(&self) -> f64 {
        self.focal_length
    }

    pub fn side(&self) -> CameraSide {
        self.side
    }

    /// Distance from the image line to a point at body lateral offset `lateral`,
    /// positive on the side the camera faces.
    fn depth(&self, lateral: f64) -> f64 {
        match self.side {
            CameraSide::Left => lateral,
            CameraSide::Right => -lateral,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageObservation {
    pub d_i: f64,
    pub d_i_dot: f64,
}

fn check_speed(v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain("speed must be positive"))
    }
}

/// Time until the line through `feature` perpendicular to the heading is
/// crossed. Negative once the feature is behind.
pub fn tau_geometric(pose: &Pose, feature: &Feature, v: f64) -> Result<f64> {
    check_speed(v)?;
    let (s, c) = libm::sincos(pose.theta);
    Ok((c * (feature.x - pose.x) + s * (feature.y - pose.y)) / v)
}

/// Partial derivative of [`tau_geometric`] with respect to the heading.
pub fn tau_dtheta(pose: &Pose, feature: &Feature, v: f64) -> Result<f64> {
    check_speed(v)?;
    let (s, c) = libm::sincos(pose.theta);
    Ok((-s * (feature.x - pose.x) + c * (feature.y - pose.y)) / v)
}

/// Image coordinate of `feature` on the camera's image line.
pub fn project_feature(pose: &Pose, feature: &Feature, camera: &Camera) -> Result<f64> {
    let (along, lateral) = pose.to_body(feature.pos());
    let d = camera.depth(lateral);
    let f = camera.focal_length;
    if !(d > f) {
        return Err(Error::NotVisible);
    }
    Ok(-f * along / (d - f))
}

/// Image coordinate and its rate under the unicycle kinematics with speed
/// `v` and turn rate `u`.
pub fn image_flow(pose: &Pose, v: f64, u: f64, feature: &Feature, camera: &Camera) -> Result<ImageObservation> {
    check_speed(v)?;
    if !u.is_finite() {
        return Err(Error::NonFinite("turn rate"));
    }
    let d_i = project_feature(pose, feature, camera)?;
    let (along, lateral) = pose.to_body(feature.pos());
    let f = camera.focal_length;
    let d = camera.depth(lateral);
    // Body-frame rates of a fixed world point.
    let along_dot = u * lateral - v;
    let lateral_dot = -u * along;
    let d_dot = camera.depth(lateral_dot);
    let gap = d - f;
    let d_i_dot = -f * (along_dot * gap - along * d_dot) / (gap * gap);
    Ok(ImageObservation { d_i, d_i_dot })
}

/// Time-to-transit recovered from the image alone, with the default flow threshold.
pub fn image_tau(obs: &ImageObservation) -> Result<f64> {
    image_tau_with(obs, DEFAULT_FLOW_EPS)
}

/// Time-to-transit recovered from the image.
///
/// Images of features ahead flow toward the focal point, so `d_i` and its
/// rate have opposite signs before transit; the remaining time is
/// `-d_i / d_i_dot`.
pub fn image_tau_with(obs: &ImageObservation, flow_eps: f64) -> Result<f64> {
    if !(obs.d_i.is_finite() && obs.d_i_dot.is_finite()) {
        return Err(Error::NonFinite("image observation"));
    }
    if obs.d_i_dot.abs() <= flow_eps {
        return Err(Error::IndeterminateFlow);
    }
    Ok(-obs.d_i / obs.d_i_dot)
}

/// Heading that points straight at `feature` from `pose`.
pub fn bearing_to(pose: &Pose, feature: &Feature) -> f64 {
    normalize_angle(libm::atan2(feature.y - pose.y, feature.x - pose.x))
}

/// `tau_2 - tau_1` written as a function of heading alone:
/// `|O1 O2| cos(phi) / v` where `phi` is the angle between heading and O1->O2.
pub fn tau_pair_difference(theta: f64, f1: &Feature, f2: &Feature, v: f64) -> Result<f64> {
    check_speed(v)?;
    let seg = f2.pos() - f1.pos();
    let phi = theta - libm::atan2(seg.y, seg.x);
    Ok(seg.norm() * libm::cos(phi) / v)
}

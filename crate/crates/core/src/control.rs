//! Steering primitives driven by time-to-transit.
//!
//! * circling `u_c[O]`: hold the feature abeam, which traces a circle about it;
//! * distance keeping `u_d[O1, O2]`: maximise `tau_2 - tau_1`, aligning the
//!   heading with the segment `O1 -> O2`;
//! * passing `u_p[O1, O2]`: balance the two times-to-transit so the path
//!   crosses between the features.

use core::f64::consts::PI;

use crate::scene::Feature;
use crate::sensing::{tau_dtheta, tau_geometric, Pose};
use crate::{Error, Result};

/// Closest approach to a circled feature before the law gives up.
pub const DEFAULT_R_MIN: f64 = 1e-6;

/// Steering gain `k` and constant forward speed `v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gains {
    k: f64,
    v: f64,
}

impl Gains {
    pub fn new(k: f64, v: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::Domain("gain k must be positive"));
        }
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Domain("speed must be positive"));
        }
        Ok(Self { k, v })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn v(&self) -> f64 {
        self.v
    }
}

impl Default for Gains {
    fn default() -> Self {
        Self { k: 1.0, v: 1.0 }
    }
}

fn distinct(f1: &Feature, f2: &Feature) -> Result<()> {
    if f1.x == f2.x && f1.y == f2.y {
        Err(Error::DegeneratePair)
    } else {
        Ok(())
    }
}

/// `u = k [tau_2'(theta) - tau_1'(theta)]`.
pub fn u_distance(pose: &Pose, f1: &Feature, f2: &Feature, g: &Gains) -> Result<f64> {
    distinct(f1, f2)?;
    Ok(g.k * (tau_dtheta(pose, f2, g.v)? - tau_dtheta(pose, f1, g.v)?))
}

/// Circling law with circling gain equal to the steering gain.
pub fn u_circle(pose: &Pose, f: &Feature, g: &Gains) -> Result<f64> {
    circle_law(pose, f, g.v, g.k, DEFAULT_R_MIN)
}

/// Hold `tau_f` at zero.
///
/// With `r` the distance to the feature and `s = +1` when it lies to the left
/// (`-1` to the right), the law is
///
/// ```text
/// u = s (v / r) (1 - k_c tau_f)
/// ```
///
/// On `tau_f = 0` this is the exact circling curvature `v / r`. Off it,
/// `d tau / dt = -k_c tau` for a feature abeam, so `k_c` is the convergence
/// rate regardless of range.
pub fn circle_law(pose: &Pose, f: &Feature, v: f64, k_c: f64, r_min: f64) -> Result<f64> {
    let (along, lateral) = pose.to_body(f.pos());
    let r = libm::hypot(along, lateral);
    if !(r >= r_min) {
        return Err(Error::SingularCircle { distance: r });
    }
    let side = if lateral >= 0.0 { 1.0 } else { -1.0 };
    let tau = tau_geometric(pose, f, v)?;
    Ok(side * (v / r) * (1.0 - k_c * tau))
}

/// Passing law: `u = k (tau_right - tau_left)`, where left/right is the side
/// of the vehicle each feature is on. The argument order does not matter.
///
/// `tau_left - tau_right` depends on the heading only, so the law settles the
/// heading perpendicular to the line joining the features, crossing between
/// them.
pub fn u_pass(pose: &Pose, f1: &Feature, f2: &Feature, g: &Gains) -> Result<f64> {
    distinct(f1, f2)?;
    let (_, lat1) = pose.to_body(f1.pos());
    let (_, lat2) = pose.to_body(f2.pos());
    let (left, right) = if lat1 >= lat2 { (f1, f2) } else { (f2, f1) };
    Ok(g.k * (tau_geometric(pose, right, g.v)? - tau_geometric(pose, left, g.v)?))
}

/// Solution of `theta' = -k sin(theta)`: `2 atan(tan(theta0 / 2) e^{-k t})`.
pub fn theta_closed_form(theta0: f64, k: f64, t: f64) -> Result<f64> {
    if !(theta0.is_finite() && k.is_finite() && t.is_finite()) {
        return Err(Error::NonFinite("closed-form heading"));
    }
    if theta0.abs() == PI {
        return Err(Error::SingularHeading);
    }
    if theta0.abs() > PI {
        return Err(Error::Domain("initial heading must lie in (-pi, pi)"));
    }
    Ok(2.0 * libm::atan(libm::tan(0.5 * theta0) * libm::exp(-k * t)))
}

/// Time at which `|u| = k |sin theta(t)|` falls to `alpha` under `u = -k sin(theta)`:
///
/// ```text
/// T = (1/k) [ ln tan(|theta0| / 2) - ln tan( asin(alpha / k) / 2 ) ]
/// ```
pub fn time_to_curvature(theta0: f64, k: f64, alpha: f64) -> Result<f64> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::Domain("gain k must be positive"));
    }
    if !(theta0.is_finite() && theta0.abs() < PI) {
        return Err(Error::Domain("initial heading must lie in (-pi, pi)"));
    }
    if !(alpha > 0.0 && alpha < k * libm::sin(theta0).abs()) {
        return Err(Error::Domain("threshold must satisfy 0 < alpha < k |sin theta0|"));
    }
    let a = theta0.abs();
    Ok((libm::log(libm::tan(0.5 * a)) - libm::log(libm::tan(0.5 * libm::asin(alpha / k)))) / k)
}

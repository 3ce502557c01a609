use alloc::string::String;
use alloc::vec::Vec;

use super::arc::PlanarCurve;
use super::spline::NaturalCubic;
use crate::geom::Vec2;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackPoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: Option<f64>,
}

impl TrackPoint {
    pub fn planar(t: f64, x: f64, y: f64) -> Self {
        Self { t, x, y, z: None }
    }
}

/// A reconstructed track, as recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTrack {
    pub id: String,
    pub points: Vec<TrackPoint>,
}

impl RawTrack {
    pub fn new(id: impl Into<String>, points: Vec<TrackPoint>) -> Result<Self> {
        let track = Self { id: id.into(), points };
        track.validate()?;
        Ok(track)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.len() < 4 {
            return Err(Error::Domain("a track needs at least four points"));
        }
        let finite = self
            .points
            .iter()
            .all(|p| p.t.is_finite() && p.x.is_finite() && p.y.is_finite() && p.z.is_none_or(f64::is_finite));
        if !finite {
            return Err(Error::NonFinite("track sample"));
        }
        if self.points.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(Error::Domain("track times must be strictly increasing"));
        }
        Ok(())
    }
}

/// Which coordinate pair of a 3-D sample is kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Projection {
    #[default]
    DropZ,
    DropY,
    DropX,
}

impl Projection {
    pub fn apply(self, p: &TrackPoint) -> Vec2 {
        let z = p.z.unwrap_or(0.0);
        match self {
            Projection::DropZ => Vec2::new(p.x, p.y),
            Projection::DropY => Vec2::new(p.x, z),
            Projection::DropX => Vec2::new(p.y, z),
        }
    }
}

/// Cumulative chord length along `pts`, starting at zero.
pub fn chord_abscissae(pts: &[Vec2]) -> Vec<f64> {
    let mut s = Vec::with_capacity(pts.len());
    let mut acc = 0.0;
    for (i, p) in pts.iter().enumerate() {
        if i > 0 {
            acc += p.distance(pts[i - 1]);
        }
        s.push(acc);
    }
    s
}

/// Planar curve whose coordinates are independent smoothing splines over a
/// shared abscissa.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingSpline {
    lambda: f64,
    x: NaturalCubic,
    y: NaturalCubic,
}

impl SmoothingSpline {
    /// Fit both coordinates of `pts` against abscissae `s`.
    pub fn fit_points(s: &[f64], pts: &[Vec2], lambda: f64) -> Result<Self> {
        let xs: Vec<f64> = pts.iter().map(|p| p.x).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.y).collect();
        Ok(Self { lambda, x: NaturalCubic::fit(s, &xs, lambda)?, y: NaturalCubic::fit(s, &ys, lambda)? })
    }

    /// Interpolating spline through `pts`, parameterised by chord length.
    pub fn through(pts: &[Vec2]) -> Result<Self> {
        Self::fit_points(&chord_abscissae(pts), pts, 1.0)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn knots(&self) -> &[f64] {
        self.x.knots()
    }

    pub fn x(&self) -> &NaturalCubic {
        &self.x
    }

    pub fn y(&self) -> &NaturalCubic {
        &self.y
    }

    /// Fitted positions at the knots.
    pub fn fitted(&self) -> Vec<Vec2> {
        self.x.values_at_knots().into_iter().zip(self.y.values_at_knots()).map(|(x, y)| Vec2::new(x, y)).collect()
    }
}

impl PlanarCurve for SmoothingSpline {
    fn domain(&self) -> (f64, f64) {
        let k = self.x.knots();
        (k[0], k[k.len() - 1])
    }

    fn point(&self, u: f64) -> Vec2 {
        Vec2::new(self.x.eval(u), self.y.eval(u))
    }

    fn velocity(&self, u: f64) -> Vec2 {
        Vec2::new(self.x.deriv(u), self.y.deriv(u))
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.x.knots().to_vec()
    }
}

/// Smooth a track: project it to the plane, take cumulative chord length
/// as the abscissa and fit each coordinate with smoothing factor `lambda`.
pub fn fit_smoothing_spline(track: &RawTrack, lambda: f64, projection: Projection) -> Result<SmoothingSpline> {
    track.validate()?;
    let pts: Vec<Vec2> = track.points.iter().map(|p| projection.apply(p)).collect();
    let s = chord_abscissae(&pts);
    if s.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("consecutive track positions coincide"));
    }
    SmoothingSpline::fit_points(&s, &pts, lambda)
}

use alloc::vec::Vec;

use super::arc::ArcCurve;
use crate::geom::Vec2;
use crate::scene::Feature;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    LeftOfVine,
    RightOfVine,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::LeftOfVine => "left",
            Side::RightOfVine => "right",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SideLabel {
    pub side: Side,
    /// Deepest excursion past the woods edge, toward the woods; never negative.
    pub penetration_depth: f64,
}

fn closest_on_segment(a: Vec2, b: Vec2, p: Vec2) -> (Vec2, f64) {
    let d = b - a;
    let len2 = d.dot(d);
    let w = if len2 > 0.0 { ((p - a).dot(d) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (a + d * w, w)
}

/// Signed distance from `p` to the polyline `poly`, positive on its left.
/// At a vertex the side is taken from the bisector of the adjacent edges.
pub fn polyline_signed_offset(poly: &[Vec2], p: Vec2) -> Option<f64> {
    if poly.len() < 2 {
        return None;
    }
    let mut best: Option<(f64, usize, f64)> = None;
    for (i, w) in poly.windows(2).enumerate() {
        let (q, s) = closest_on_segment(w[0], w[1], p);
        let d = q.distance(p);
        if best.is_none_or(|(bd, _, _)| d < bd) {
            best = Some((d, i, s));
        }
    }
    let (dist, i, s) = best?;
    let dir = |j: usize| (poly[j + 1] - poly[j]).normalized().unwrap_or(Vec2::new(0.0, 0.0));
    let tangent = if s <= 0.0 && i > 0 {
        dir(i - 1) + dir(i)
    } else if s >= 1.0 && i + 2 < poly.len() {
        dir(i) + dir(i + 1)
    } else {
        dir(i)
    };
    let anchor = if s <= 0.0 {
        poly[i]
    } else if s >= 1.0 {
        poly[i + 1]
    } else {
        poly[i]
    };
    let sign = if tangent.cross(p - anchor) >= 0.0 { 1.0 } else { -1.0 };
    Some(sign * dist)
}

/// Which side of the vine a curve passed, judged at closest approach
/// relative to `heading`, together with its penetration past `woods_edge`.
pub fn classify_side(curve: &ArcCurve, vine: &Feature, heading: Vec2, woods_edge: &[Vec2]) -> Result<SideLabel> {
    let h = heading.normalized().ok_or(Error::Domain("reference heading is zero"))?;
    if curve.samples.len() < 2 {
        return Err(Error::Unclassifiable);
    }
    let v = vine.pos();
    let along: Vec<f64> = curve.samples.iter().map(|p| (*p - v).dot(h)).collect();
    let before = along.iter().any(|a| *a <= 0.0);
    let after = along.iter().any(|a| *a >= 0.0);
    if !(before && after) {
        return Err(Error::Unclassifiable);
    }
    let mut closest = (f64::INFINITY, curve.samples[0]);
    for w in curve.samples.windows(2) {
        let (q, _) = closest_on_segment(w[0], w[1], v);
        let d = q.distance(v);
        if d < closest.0 {
            closest = (d, q);
        }
    }
    let lateral = h.cross(closest.1 - v);
    let side = if lateral > 0.0 {
        Side::LeftOfVine
    } else if lateral < 0.0 {
        Side::RightOfVine
    } else {
        return Err(Error::Unclassifiable);
    };
    let depth = curve.samples.iter().filter_map(|p| polyline_signed_offset(woods_edge, *p)).fold(0.0f64, f64::max);
    Ok(SideLabel { side, penetration_depth: depth })
}

/// Largest signed offset (left positive) from the line `anchor -> end`
/// over the points that lie past `anchor` along that line.
pub fn woods_excursion_after(points: &[Vec2], anchor: Vec2, end: Vec2) -> Option<f64> {
    let d = (end - anchor).normalized()?;
    points.iter().filter(|p| (**p - anchor).dot(d) >= 0.0).map(|p| d.cross(*p - anchor)).reduce(f64::max)
}

/// Pointwise mean of curves sharing a grid. The samples are the exact
/// means at each index; `total_length` is the length of the mean polyline.
pub fn mean_trajectory(curves: &[ArcCurve]) -> Result<ArcCurve> {
    let first = curves.first().ok_or(Error::Domain("no curves to average"))?;
    let n = first.samples.len();
    if n == 0 {
        return Err(Error::Domain("no curves to average"));
    }
    let tol = 1e-6 * first.total_length.abs().max(1.0);
    for c in curves {
        if c.samples.len() != n || (c.total_length - first.total_length).abs() > tol {
            return Err(Error::GridMismatch);
        }
    }
    let m = curves.len() as f64;
    let samples: Vec<Vec2> = (0..n)
        .map(|j| {
            let (sx, sy) = curves.iter().fold((0.0, 0.0), |(x, y), c| (x + c.samples[j].x, y + c.samples[j].y));
            Vec2::new(sx / m, sy / m)
        })
        .collect();
    let mean = ArcCurve { samples, total_length: 0.0 };
    let total_length = mean.polyline_length();
    Ok(ArcCurve { total_length, ..mean })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveDistance {
    pub rms: f64,
    pub max: f64,
}

/// RMS and maximum distance between matched samples. Curves with different
/// sample counts are both resampled to the larger count by polyline
/// length fraction.
pub fn curve_distance(a: &ArcCurve, b: &ArcCurve) -> Result<CurveDistance> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Domain("cannot compare empty curves"));
    }
    let (pa, pb) = if a.len() == b.len() {
        (a.samples.clone(), b.samples.clone())
    } else {
        let n = a.len().max(b.len());
        (a.resample_polyline(n)?, b.resample_polyline(n)?)
    };
    let mut sum = 0.0;
    let mut max = 0.0f64;
    for (p, q) in pa.iter().zip(&pb) {
        let d = p.distance(*q);
        sum += d * d;
        max = max.max(d);
    }
    Ok(CurveDistance { rms: libm::sqrt(sum / pa.len() as f64), max })
}

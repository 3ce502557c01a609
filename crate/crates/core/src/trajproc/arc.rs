use alloc::vec::Vec;

use super::track::{chord_abscissae, SmoothingSpline};
use crate::geom::Vec2;
use crate::{Error, Result};

/// A regular parametric curve in the plane.
pub trait PlanarCurve {
    fn domain(&self) -> (f64, f64);
    fn point(&self, u: f64) -> Vec2;
    fn velocity(&self, u: f64) -> Vec2;
    /// Parameters where the curve may lose smoothness; quadrature never
    /// straddles them. Must include both ends of the domain.
    fn breakpoints(&self) -> Vec<f64> {
        let (a, b) = self.domain();
        alloc::vec![a, b]
    }
}

/// Samples spaced by equal chords along a curve.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcCurve {
    pub samples: Vec<Vec2>,
    /// Arc length of the underlying curve.
    pub total_length: f64,
}

impl ArcCurve {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn chords(&self) -> Vec<f64> {
        self.samples.windows(2).map(|w| w[0].distance(w[1])).collect()
    }

    pub fn polyline_length(&self) -> f64 {
        self.chords().iter().sum()
    }

    /// Interpolating spline through the samples.
    pub fn spline(&self) -> Result<SmoothingSpline> {
        SmoothingSpline::through(&self.samples)
    }

    /// `n` points at equal fractions of the polyline length.
    pub fn resample_polyline(&self, n: usize) -> Result<Vec<Vec2>> {
        if self.samples.is_empty() || n == 0 {
            return Err(Error::Domain("cannot resample an empty curve"));
        }
        if self.samples.len() == 1 || n == 1 {
            return Ok(alloc::vec![self.samples[0]; n]);
        }
        let s = chord_abscissae(&self.samples);
        let total = s[s.len() - 1];
        let mut out = Vec::with_capacity(n);
        let mut seg = 0;
        for j in 0..n {
            let target = total * j as f64 / (n - 1) as f64;
            while seg + 2 < s.len() && s[seg + 1] < target {
                seg += 1;
            }
            let h = s[seg + 1] - s[seg];
            let w = if h > 0.0 { ((target - s[seg]) / h).clamp(0.0, 1.0) } else { 0.0 };
            out.push(self.samples[seg].lerp(self.samples[seg + 1], w));
        }
        Ok(out)
    }
}

const GL_NODES: [f64; 4] =
    [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
const GL_WEIGHTS: [f64; 4] =
    [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];

fn gauss8<C: PlanarCurve + ?Sized>(c: &C, a: f64, b: f64) -> f64 {
    let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
    let mut acc = 0.0;
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
        acc += w * (c.velocity(m - r * x).norm() + c.velocity(m + r * x).norm());
    }
    acc * r
}

fn adaptive<C: PlanarCurve + ?Sized>(c: &C, a: f64, b: f64, whole: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (l, r) = (gauss8(c, a, m), gauss8(c, m, b));
    let halves = l + r;
    if depth == 0 || (halves - whole).abs() <= 1e-14 * halves.abs().max(1e-300) {
        return halves;
    }
    adaptive(c, a, m, l, depth - 1) + adaptive(c, m, b, r, depth - 1)
}

fn piece_length<C: PlanarCurve + ?Sized>(c: &C, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    adaptive(c, a, b, gauss8(c, a, b), 30)
}

/// Arc length of `c` between parameters `a` and `b`.
pub fn arc_length<C: PlanarCurve + ?Sized>(c: &C, a: f64, b: f64) -> f64 {
    let mut bps: Vec<f64> = c.breakpoints().into_iter().filter(|u| *u > a && *u < b).collect();
    bps.insert(0, a);
    bps.push(b);
    bps.windows(2).map(|w| piece_length(c, w[0], w[1])).sum()
}

struct ArcIndex<'a, C: ?Sized> {
    curve: &'a C,
    bps: Vec<f64>,
    cum: Vec<f64>,
}

impl<'a, C: PlanarCurve + ?Sized> ArcIndex<'a, C> {
    fn new(curve: &'a C) -> Self {
        let (a, b) = curve.domain();
        let mut bps: Vec<f64> = curve.breakpoints().into_iter().filter(|u| *u > a && *u < b).collect();
        bps.insert(0, a);
        bps.push(b);
        let mut cum = alloc::vec![0.0];
        for w in bps.windows(2) {
            let last = cum[cum.len() - 1];
            cum.push(last + piece_length(curve, w[0], w[1]));
        }
        Self { curve, bps, cum }
    }

    fn total(&self) -> f64 {
        self.cum[self.cum.len() - 1]
    }

    fn param_at(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, self.total());
        let i = self.cum.partition_point(|c| *c <= s).clamp(1, self.bps.len() - 1) - 1;
        let (mut lo, mut hi) = (self.bps[i], self.bps[i + 1]);
        let target = s - self.cum[i];
        let span = self.cum[i + 1] - self.cum[i];
        if span <= 0.0 {
            return lo;
        }
        let start = lo;
        let mut u = lo + (hi - lo) * (target / span);
        for _ in 0..100 {
            let f = piece_length(self.curve, start, u) - target;
            if f.abs() <= 1e-15 * self.total().max(1.0) {
                break;
            }
            if f > 0.0 {
                hi = u;
            } else {
                lo = u;
            }
            let speed = self.curve.velocity(u).norm();
            let mut next = if speed > 0.0 { u - f / speed } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if next == u || hi - lo <= 1e-16 * (hi.abs() + lo.abs()) {
                break;
            }
            u = next;
        }
        u
    }
}

/// Parameter at which the arc length from the start of `c` reaches `s`.
pub fn arc_param_at<C: PlanarCurve + ?Sized>(c: &C, s: f64) -> f64 {
    ArcIndex::new(c).param_at(s)
}

/// Smallest `u > from` (up to `end`) with `|c(u) - origin| = chord`.
fn chord_step<C: PlanarCurve + ?Sized>(c: &C, origin: Vec2, from: f64, end: f64, chord: f64) -> Option<f64> {
    let phi = |u: f64| c.point(u).distance(origin) - chord;
    let speed = c.velocity(from).norm().max(1e-300);
    let (mut lo, mut flo) = (from, -chord);
    let mut step = 1.05 * chord / speed;
    let (mut hi, mut fhi);
    loop {
        hi = (lo + step).min(end);
        fhi = phi(hi);
        if fhi >= 0.0 {
            break;
        }
        if hi >= end {
            return None;
        }
        lo = hi;
        flo = fhi;
        step *= 2.0;
    }
    let mut side = 0i8;
    for _ in 0..200 {
        if fhi == 0.0 || hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs()).max(1e-300) {
            break;
        }
        let mut u = (lo * fhi - hi * flo) / (fhi - flo);
        if !(u > lo && u < hi) {
            u = 0.5 * (lo + hi);
        }
        let fu = phi(u);
        if fu == 0.0 {
            return Some(u);
        }
        if fu < 0.0 {
            lo = u;
            flo = fu;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = u;
            fhi = fu;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
    }
    Some(hi)
}

/// March `n - 2` chords of length `chord` from the start of `[a, b]`.
/// Returns the points and the residual `|c(b) - last| - chord`.
fn march<C: PlanarCurve + ?Sized>(c: &C, a: f64, b: f64, n: usize, chord: f64) -> Option<(Vec<Vec2>, f64)> {
    let mut pts = Vec::with_capacity(n);
    pts.push(c.point(a));
    let mut u = a;
    for _ in 0..n - 2 {
        u = chord_step(c, pts[pts.len() - 1], u, b, chord)?;
        pts.push(c.point(u));
    }
    let end = c.point(b);
    let gap = end.distance(pts[pts.len() - 1]) - chord;
    pts.push(end);
    Some((pts, gap))
}

fn equal_chords<C: PlanarCurve + ?Sized>(c: &C, a: f64, b: f64, n: usize, length: f64) -> Result<Vec<Vec2>> {
    if n == 2 {
        return Ok(alloc::vec![c.point(a), c.point(b)]);
    }
    // The residual falls as the chord grows; a chord that cannot be
    // marched n - 2 times counts as overshooting.
    let nominal = length / (n - 1) as f64;
    let mut hi = nominal * (1.0 + 1e-9);
    let mut g_hi = match march(c, a, b, n, hi) {
        Some((pts, gap)) if gap >= 0.0 => return Ok(pts),
        Some((_, gap)) => Some(gap),
        None => None,
    };
    let mut lo = 0.5 * nominal;
    let mut low = None;
    for _ in 0..64 {
        match march(c, a, b, n, lo) {
            Some(r) if r.1 > 0.0 => {
                low = Some(r);
                break;
            }
            r => {
                hi = lo;
                g_hi = r.map(|r| r.1);
                lo *= 0.5;
            }
        }
    }
    let (mut pts, mut g_lo) = low.ok_or(Error::Domain("equal-chord sampling failed to bracket"))?;
    let mut side = 0i8;
    for _ in 0..200 {
        let mut ch = match g_hi {
            Some(gh) => (lo * gh - hi * g_lo) / (gh - g_lo),
            None => 0.5 * (lo + hi),
        };
        if !(ch > lo && ch < hi) {
            ch = 0.5 * (lo + hi);
        }
        match march(c, a, b, n, ch) {
            Some(r) if r.1.abs() <= 1e-14 * ch => return Ok(r.0),
            Some(r) if r.1 > 0.0 => {
                lo = ch;
                g_lo = r.1;
                pts = r.0;
                if side == 1 {
                    g_hi = g_hi.map(|g| 0.5 * g);
                }
                side = 1;
            }
            Some(r) => {
                hi = ch;
                g_hi = Some(r.1);
                if side == -1 {
                    g_lo *= 0.5;
                }
                side = -1;
            }
            None => {
                hi = ch;
                g_hi = None;
                side = 0;
            }
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(pts)
}

/// Resample `c` at `n` points with equal chords between neighbours. The
/// first and last samples are the curve's end points and `total_length`
/// is the curve's arc length.
pub fn arc_reparam<C: PlanarCurve + ?Sized>(c: &C, n: usize) -> Result<ArcCurve> {
    if n < 2 {
        return Err(Error::Domain("need at least two samples"));
    }
    let (a, b) = c.domain();
    let index = ArcIndex::new(c);
    let length = index.total();
    if !(length > 1e-12) || !length.is_finite() {
        return Err(Error::Domain("curve has zero length"));
    }
    let samples = equal_chords(c, a, b, n, length)?;
    Ok(ArcCurve { samples, total_length: length })
}

struct Window<'a, C: ?Sized> {
    inner: &'a C,
    a: f64,
    b: f64,
}

impl<C: PlanarCurve + ?Sized> PlanarCurve for Window<'_, C> {
    fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    fn point(&self, u: f64) -> Vec2 {
        self.inner.point(u)
    }

    fn velocity(&self, u: f64) -> Vec2 {
        self.inner.velocity(u)
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.inner.breakpoints().into_iter().filter(|u| *u > self.a && *u < self.b).collect();
        v.insert(0, self.a);
        v.push(self.b);
        v
    }
}

/// A curve left out of a common-length truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rejection {
    /// Position in the input list.
    pub index: usize,
    pub length: f64,
    pub filtered: bool,
}

/// Cut every curve at arc length `length` from its first sample and
/// resample it with `n` equal chords. Curves shorter than `length` are
/// reported in the rejection list.
pub fn truncate_common(curves: &[ArcCurve], length: f64, n: usize) -> Result<(Vec<ArcCurve>, Vec<Rejection>)> {
    truncate_common_with(curves, length, n, |_| true)
}

/// As [`truncate_common`], additionally rejecting curves for which `keep`
/// returns false.
pub fn truncate_common_with<F>(
    curves: &[ArcCurve],
    length: f64,
    n: usize,
    mut keep: F,
) -> Result<(Vec<ArcCurve>, Vec<Rejection>)>
where
    F: FnMut(&ArcCurve) -> bool,
{
    if !(length > 0.0) || !length.is_finite() {
        return Err(Error::Domain("truncation length must be positive"));
    }
    if n < 2 {
        return Err(Error::Domain("need at least two samples"));
    }
    let mut kept = Vec::new();
    let mut rejected = Vec::new();
    for (index, curve) in curves.iter().enumerate() {
        if !keep(curve) {
            rejected.push(Rejection { index, length: curve.total_length, filtered: true });
            continue;
        }
        let spline = curve.spline()?;
        let arc = ArcIndex::new(&spline);
        let total = arc.total();
        // The refit can be marginally shorter than the curve it came from.
        let declared = curve.total_length.max(total);
        if declared < length * (1.0 - 1e-9) {
            rejected.push(Rejection { index, length: declared, filtered: false });
            continue;
        }
        let (a, b) = spline.domain();
        let end = if total <= length { b } else { arc.param_at(length) };
        let window = Window { inner: &spline, a, b: end };
        let samples = equal_chords(&window, a, end, n, length)?;
        kept.push(ArcCurve { samples, total_length: length });
    }
    Ok((kept, rejected))
}

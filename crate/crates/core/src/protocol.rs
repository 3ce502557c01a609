//! Guarded sequencing of the steering laws.
//!
//! A protocol is an ordered list of segments, each pairing a law with the
//! guard that ends it. Optionally, a trailing rule chains distance laws
//! along the remaining woods-edge features.

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::control::{u_circle, u_distance, u_pass, Gains};
use crate::scene::{HalfPlane, Scene};
use crate::sensing::{tau_geometric, Pose};
use crate::sim::{integrate, Sample, SimConfig, SimState, Trajectory, TrajectoryMeta};
use crate::{Error, Result};

/// Below this magnitude a guard signal counts as touching zero.
pub const ZERO_TOUCH: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LawKind {
    Circle(String),
    Distance(String, String),
    Pass(String, String),
}

impl LawKind {
    pub fn features(&self) -> Vec<&str> {
        match self {
            LawKind::Circle(f) => vec![f.as_str()],
            LawKind::Distance(a, b) | LawKind::Pass(a, b) => vec![a.as_str(), b.as_str()],
        }
    }
}

impl fmt::Display for LawKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LawKind::Circle(a) => write!(f, "u_c({a})"),
            LawKind::Distance(a, b) => write!(f, "u_d({a}, {b})"),
            LawKind::Pass(a, b) => write!(f, "u_p({a}, {b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Guard {
    /// First sign change or zero touch of the feature's time-to-transit.
    TauZero(String),
    /// First local maximum of `tau_next - tau_current`.
    TauDiffMax {
        next: String,
        current: String,
    },
    Immediate,
    /// Entering `{ (p - point) . normal >= 0 }`.
    PositionHalfPlane(HalfPlane),
    /// Entering the scene's exit region.
    SceneExit,
}

impl Guard {
    pub fn features(&self) -> Vec<&str> {
        match self {
            Guard::TauZero(f) => vec![f.as_str()],
            Guard::TauDiffMax { next, current } => vec![next.as_str(), current.as_str()],
            _ => Vec::new(),
        }
    }

    /// Guards whose signal crosses zero continuously.
    pub fn is_crossing(&self) -> bool {
        matches!(self, Guard::TauZero(_) | Guard::PositionHalfPlane(_) | Guard::SceneExit)
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Guard::TauZero(a) => write!(f, "tau_zero({a})"),
            Guard::TauDiffMax { next, current } => write!(f, "tau_diff_max({next}, {current})"),
            Guard::Immediate => f.write_str("immediate"),
            Guard::PositionHalfPlane(h) => {
                write!(f, "half_plane({:?}, {:?}, {:?}, {:?})", h.point.x, h.point.y, h.normal.x, h.normal.y)
            }
            Guard::SceneExit => f.write_str("exit"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlSegment {
    pub law: LawKind,
    pub exit: Guard,
    pub label: String,
}

impl ControlSegment {
    pub fn new(law: LawKind, exit: Guard) -> Self {
        let label = format!("{law}");
        Self { law, exit, label }
    }
}

/// Chains `u_d` segments over consecutive features, starting at the second
/// feature of the last explicit `u_d` segment. Every chained segment ends
/// when its second feature is transited; the final one ends on `exit`.
#[derive(Debug, Clone, PartialEq)]
pub struct RemainingRule {
    /// Feature chain; `None` uses the scene's woods edge.
    pub features: Option<Vec<String>>,
    pub exit: Guard,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Protocol {
    pub name: String,
    pub segments: Vec<ControlSegment>,
    pub remaining: Option<RemainingRule>,
}

impl Protocol {
    pub fn new(name: impl Into<String>, segments: Vec<ControlSegment>) -> Self {
        Self { name: name.into(), segments, remaining: None }
    }

    pub fn with_remaining(mut self, rule: RemainingRule) -> Self {
        self.remaining = Some(rule);
        self
    }

    /// The explicit segments followed by those generated by the remaining rule.
    pub fn expand(&self, scene: &Scene) -> Result<Vec<ControlSegment>> {
        if self.segments.is_empty() {
            return Err(Error::InvalidProtocol("protocol has no segments".to_owned()));
        }
        let mut out = self.segments.clone();
        let Some(rule) = &self.remaining else {
            return Ok(out);
        };
        let chain: Vec<String> = rule.features.clone().unwrap_or_else(|| scene.woods_edge.clone());
        for (i, a) in chain.iter().enumerate() {
            if chain[..i].iter().any(|b| scene.index_of(b) == scene.index_of(a)) {
                return Err(Error::InvalidProtocol(format!("feature `{a}` repeats in the remaining chain")));
            }
        }
        let start = self
            .segments
            .iter()
            .rev()
            .find_map(|s| match &s.law {
                LawKind::Distance(_, b) => Some(b.clone()),
                _ => None,
            })
            .ok_or_else(|| Error::InvalidProtocol("remaining rule needs an explicit u_d segment".to_owned()))?;
        let pos = chain
            .iter()
            .position(|f| scene.index_of(f).is_some() && scene.index_of(f) == scene.index_of(&start))
            .ok_or_else(|| Error::InvalidProtocol(format!("feature `{start}` is not in the remaining chain")))?;
        let pairs: Vec<(&String, &String)> = chain[pos..].windows(2).map(|w| (&w[0], &w[1])).collect();
        for (j, (a, b)) in pairs.iter().enumerate() {
            let exit = if j + 1 == pairs.len() { rule.exit.clone() } else { Guard::TauZero((*b).clone()) };
            out.push(ControlSegment::new(LawKind::Distance((*a).clone(), (*b).clone()), exit));
        }
        Ok(out)
    }

    /// Check every reference against `scene`.
    pub fn validate(&self, scene: &Scene) -> Result<()> {
        for seg in self.expand(scene)? {
            let refs = seg.law.features();
            for r in refs.iter().chain(seg.exit.features().iter()) {
                scene.index_of(r).ok_or_else(|| Error::UnknownFeature((*r).to_owned()))?;
            }
            if refs.len() == 2 && scene.index_of(refs[0]) == scene.index_of(refs[1]) {
                return Err(Error::InvalidProtocol(format!("{} pairs a feature with itself", seg.law)));
            }
            if let Guard::TauDiffMax { next, current } = &seg.exit {
                if scene.index_of(next) == scene.index_of(current) {
                    return Err(Error::InvalidProtocol(format!("{} compares a feature with itself", seg.exit)));
                }
            }
            if let Guard::PositionHalfPlane(h) = &seg.exit {
                if !(h.point.is_finite() && h.normal.is_finite()) || h.normal.norm() == 0.0 {
                    return Err(Error::InvalidProtocol("half-plane needs a finite nonzero normal".to_owned()));
                }
            }
        }
        Ok(())
    }
}

/// Recent values of one guard signal since its segment was entered.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GuardHistory {
    window: [f64; 3],
    len: usize,
    min: f64,
}

impl GuardHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, value: f64) {
        self.window = [self.window[1], self.window[2], value];
        self.min = if self.len == 0 { value } else { self.min.min(value) };
        self.len += 1;
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn last(&self) -> Option<f64> {
        (self.len >= 1).then_some(self.window[2])
    }

    pub fn previous(&self) -> Option<f64> {
        (self.len >= 2).then_some(self.window[1])
    }

    /// Smallest value seen since the segment was entered.
    pub fn min(&self) -> Option<f64> {
        (self.len >= 1).then_some(self.min)
    }
}

/// Value of a guard's signal at `pose`.
pub fn guard_signal(guard: &Guard, scene: &Scene, pose: &Pose, v: f64) -> Result<f64> {
    let tau = |id: &str| {
        let f = scene.feature(id).ok_or_else(|| Error::UnknownFeature(id.to_owned()))?;
        tau_geometric(pose, f, v)
    };
    match guard {
        Guard::TauZero(f) => tau(f),
        Guard::TauDiffMax { next, current } => Ok(tau(next)? - tau(current)?),
        Guard::Immediate => Ok(0.0),
        Guard::PositionHalfPlane(h) => Ok(h.signed_distance(pose.position())),
        Guard::SceneExit => Ok(scene.exit_region().signed_distance(pose.position())),
    }
}

/// Whether `guard` fires given the signal history of its segment.
/// Missing history means "not yet".
pub fn eval_guard(guard: &Guard, history: &GuardHistory, hysteresis: f64) -> bool {
    match guard {
        Guard::Immediate => true,
        Guard::TauZero(_) => match (history.previous(), history.last()) {
            (_, Some(l)) if l.abs() <= ZERO_TOUCH => true,
            (Some(p), Some(l)) => (p > 0.0 && l < 0.0) || (p < 0.0 && l > 0.0),
            _ => false,
        },
        Guard::TauDiffMax { .. } => {
            if history.len() < 3 {
                return false;
            }
            let [a, b, c] = history.window;
            b > a && c <= b && b - history.min > hysteresis
        }
        Guard::PositionHalfPlane(_) | Guard::SceneExit => history.last().is_some_and(|l| l >= -ZERO_TOUCH),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunError {
    /// The scene, protocol, initial pose, gains or configuration is invalid.
    Invalid(Error),
    /// `t_max` passed before the final guard fired.
    Timeout { partial: Trajectory },
    /// A law failed in segment `segment`.
    Law { segment: usize, label: String, error: Error, partial: Trajectory },
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Invalid(e) => write!(f, "{e}"),
            RunError::Timeout { partial } => write!(
                f,
                "time limit reached before the final guard fired (t = {})",
                partial.samples.last().map_or(0.0, |s| s.t)
            ),
            RunError::Law { segment, label, error, .. } => write!(f, "segment {segment} ({label}): {error}"),
        }
    }
}

impl core::error::Error for RunError {}

struct Engine<'a> {
    scene: &'a Scene,
    segments: Vec<ControlSegment>,
    gains: Gains,
    cfg: SimConfig,
    tau_ids: Vec<usize>,
}

impl Engine<'_> {
    fn law(&self, i: usize, pose: &Pose) -> Result<f64> {
        let f = |id: &str| self.scene.feature(id).ok_or_else(|| Error::UnknownFeature(id.to_owned()));
        match &self.segments[i].law {
            LawKind::Circle(a) => u_circle(pose, f(a)?, &self.gains),
            LawKind::Distance(a, b) => u_distance(pose, f(a)?, f(b)?, &self.gains),
            LawKind::Pass(a, b) => u_pass(pose, f(a)?, f(b)?, &self.gains),
        }
    }

    fn signal(&self, i: usize, pose: &Pose) -> Result<f64> {
        guard_signal(&self.segments[i].exit, self.scene, pose, self.gains.v())
    }

    fn taus(&self, pose: &Pose) -> Result<Vec<f64>> {
        self.tau_ids.iter().map(|&j| tau_geometric(pose, &self.scene.features[j], self.gains.v())).collect()
    }

    /// Step fraction in `(0, h]` at which segment `i`'s guard signal crosses zero.
    fn locate(&self, i: usize, from: &Pose, u: f64, h: f64, s0: f64, s1: f64) -> Result<f64> {
        let at = |x: f64| self.signal(i, &integrate(from, u, self.gains.v(), x, self.cfg.integrator));
        let (mut lo, mut hi, mut flo, mut fhi) = (0.0, h, s0, s1);
        if fhi.abs() <= ZERO_TOUCH && (flo > 0.0) == (fhi > 0.0) {
            return Ok(h);
        }
        let mut side = 0i8;
        for _ in 0..100 {
            let mut x = (lo * fhi - hi * flo) / (fhi - flo);
            if !(x > lo && x < hi) {
                x = 0.5 * (lo + hi);
            }
            let fx = at(x)?;
            if fx == 0.0 || hi - lo <= 4.0 * f64::EPSILON * h {
                return Ok(x);
            }
            if (fx > 0.0) == (flo > 0.0) {
                lo = x;
                flo = fx;
                if side == -1 {
                    fhi *= 0.5;
                }
                side = -1;
            } else {
                hi = x;
                fhi = fx;
                if side == 1 {
                    flo *= 0.5;
                }
                side = 1;
            }
        }
        Ok(hi)
    }

    fn crossed(guard: &Guard, s0: f64, s1: f64) -> bool {
        match guard {
            Guard::TauZero(_) => s1.abs() <= ZERO_TOUCH || (s0 > 0.0 && s1 < 0.0) || (s0 < 0.0 && s1 > 0.0),
            Guard::PositionHalfPlane(_) | Guard::SceneExit => s0 < -ZERO_TOUCH && s1 >= -ZERO_TOUCH,
            _ => false,
        }
    }
}

/// Simulate `protocol` over `scene` from `init`.
///
/// The law of the active segment is sampled at every step and held over it.
/// Guards are checked at every step on the signal history of the active
/// segment; several guards may fire at the same sample. With
/// `cfg.locate_events`, a zero crossing of a `tau_zero` or half-plane guard
/// that is followed by another segment is located inside the step, and the
/// next law takes over from that instant; sample times stay on the
/// `k * dt` grid. The run ends when the last segment's guard fires.
pub fn run_protocol(
    scene: &Scene,
    protocol: &Protocol,
    init: Pose,
    gains: &Gains,
    cfg: &SimConfig,
) -> core::result::Result<Trajectory, RunError> {
    scene.validate().map_err(RunError::Invalid)?;
    protocol.validate(scene).map_err(RunError::Invalid)?;
    cfg.validate().map_err(RunError::Invalid)?;
    if !init.is_finite() {
        return Err(RunError::Invalid(Error::NonFinite("initial pose")));
    }
    let segments = protocol.expand(scene).map_err(RunError::Invalid)?;
    let mut tau_ids: Vec<usize> = Vec::new();
    for seg in &segments {
        for r in seg.law.features().into_iter().chain(seg.exit.features()) {
            let j = scene.index_of(r).ok_or_else(|| RunError::Invalid(Error::UnknownFeature(r.to_owned())))?;
            if !tau_ids.contains(&j) {
                tau_ids.push(j);
            }
        }
    }
    let mut traj = Trajectory::new(TrajectoryMeta { gains: *gains, config: *cfg, scene_id: scene.id.clone() });
    traj.segment_labels = segments.iter().map(|s| s.label.clone()).collect();
    traj.tau_features = tau_ids.iter().map(|&j| scene.features[j].id.clone()).collect();
    let engine = Engine { scene, segments, gains: *gains, cfg: *cfg, tau_ids };
    let last = engine.segments.len() - 1;
    let v = gains.v();

    let mut seg = 0usize;
    let mut history = GuardHistory::new();
    let mut state = SimState { t: 0.0, pose: Pose::new(init.x, init.y, init.theta) };
    let n = cfg.step_count();
    let mut k = 0usize;

    macro_rules! fail {
        ($e:expr) => {
            return Err(RunError::Law {
                segment: seg,
                label: engine.segments[seg].label.clone(),
                error: $e,
                partial: traj,
            })
        };
    }

    loop {
        let mut finished = false;
        loop {
            let s = match engine.signal(seg, &state.pose) {
                Ok(s) => s,
                Err(e) => fail!(e),
            };
            history.push(s);
            if !eval_guard(&engine.segments[seg].exit, &history, cfg.guard_hysteresis) {
                break;
            }
            if seg == last {
                finished = true;
                break;
            }
            seg += 1;
            history = GuardHistory::new();
        }
        let u = match engine.law(seg, &state.pose) {
            Ok(u) => u,
            Err(e) => fail!(e),
        };
        let taus = match engine.taus(&state.pose) {
            Ok(t) => t,
            Err(e) => fail!(e),
        };
        let timeout = !finished && k == n;
        if finished || timeout || k.is_multiple_of(cfg.record_stride) {
            traj.samples.push(Sample { t: state.t, pose: state.pose, u, segment: seg, taus });
        }
        if finished {
            return Ok(traj);
        }
        if timeout {
            return Err(RunError::Timeout { partial: traj });
        }
        if !(u.is_finite()) {
            fail!(Error::NonFinite("turn rate"));
        }
        let mut next = integrate(&state.pose, u, v, cfg.dt, cfg.integrator);
        let guard = &engine.segments[seg].exit;
        if cfg.locate_events && seg < last && guard.is_crossing() {
            let s0 = history.last().unwrap_or(0.0);
            let s1 = match engine.signal(seg, &next) {
                Ok(s) => s,
                Err(e) => fail!(e),
            };
            if Engine::crossed(guard, s0, s1) {
                let h = match engine.locate(seg, &state.pose, u, cfg.dt, s0, s1) {
                    Ok(h) => h,
                    Err(e) => fail!(e),
                };
                let mid = integrate(&state.pose, u, v, h, cfg.integrator);
                seg += 1;
                history = GuardHistory::new();
                // Chain guards that already hold at the crossing.
                while seg < last {
                    let mut probe = GuardHistory::new();
                    match engine.signal(seg, &mid) {
                        Ok(s) => probe.push(s),
                        Err(e) => fail!(e),
                    }
                    if !eval_guard(&engine.segments[seg].exit, &probe, cfg.guard_hysteresis) {
                        break;
                    }
                    seg += 1;
                }
                let u2 = match engine.law(seg, &mid) {
                    Ok(u) => u,
                    Err(e) => fail!(e),
                };
                next = integrate(&mid, u2, v, cfg.dt - h, cfg.integrator);
            }
        }
        k += 1;
        state = SimState { t: k as f64 * cfg.dt, pose: next };
    }
}

fn seg(law: LawKind, exit: Guard) -> ControlSegment {
    ControlSegment::new(law, exit)
}

fn s(x: &str) -> String {
    x.to_owned()
}

fn tz(x: &str) -> Guard {
    Guard::TauZero(s(x))
}

fn tdm(next: &str, current: &str) -> Guard {
    Guard::TauDiffMax { next: s(next), current: s(current) }
}

fn ud(a: &str, b: &str) -> LawKind {
    LawKind::Distance(s(a), s(b))
}

fn uc(a: &str) -> LawKind {
    LawKind::Circle(s(a))
}

fn until_exit() -> RemainingRule {
    RemainingRule { features: None, exit: Guard::SceneExit }
}

/// The four named field protocols. Red routes pass between feature `A` and
/// the vine; blue routes circle the vine. "Squares" use the pole as a
/// remembered landmark and cut across to `E`; "circles" follow the woods
/// edge feature by feature.
///
/// Guards: `u_c` is entered when the circled feature is transited and left
/// at the maximum of the next pair's tau difference; consecutive `u_d`
/// segments hand over when the shared feature is transited.
pub fn builtin_sequences() -> Vec<(String, Protocol)> {
    let red_squares = Protocol::new(
        "red-squares",
        vec![
            seg(LawKind::Pass(s("A"), s("vine")), tz("vine")),
            seg(ud("A", "B"), tz("B")),
            seg(ud("B", "C"), tz("pole")),
            seg(uc("pole"), tdm("F", "E")),
            seg(ud("E", "F"), tz("F")),
        ],
    )
    .with_remaining(until_exit());
    let blue_squares = Protocol::new(
        "blue-squares",
        vec![
            seg(uc("vine"), tdm("C", "B")),
            seg(ud("B", "C"), tz("pole")),
            seg(uc("pole"), tdm("F", "E")),
            seg(ud("E", "F"), tz("F")),
        ],
    )
    .with_remaining(until_exit());
    let red_circles = Protocol::new(
        "red-circles",
        vec![
            seg(LawKind::Pass(s("A"), s("vine")), tz("vine")),
            seg(ud("A", "B"), tz("B")),
            seg(ud("B", "C"), tz("C")),
            seg(uc("C"), tdm("D", "C")),
            seg(ud("C", "D"), tz("D")),
        ],
    )
    .with_remaining(until_exit());
    let blue_circles = Protocol::new(
        "blue-circles",
        vec![
            seg(uc("vine"), tdm("C", "B")),
            seg(ud("B", "C"), tz("C")),
            seg(uc("C"), tdm("D", "C")),
            seg(ud("C", "D"), tz("D")),
        ],
    )
    .with_remaining(until_exit());
    vec![
        (s("red-squares"), red_squares),
        (s("blue-squares"), blue_squares),
        (s("red-circles"), red_circles),
        (s("blue-circles"), blue_circles),
    ]
}

pub fn builtin(name: &str) -> Option<Protocol> {
    builtin_sequences().into_iter().find(|(n, _)| n == name).map(|(_, p)| p)
}

/// Distance keeping around three features `A`, `B`, `C`: follow `A -> B`,
/// circle `B` from its transit until aligned with `B -> C`, then follow
/// `B -> C` into the exit region.
pub fn triangle_protocol() -> Protocol {
    Protocol::new(
        "triangle",
        vec![seg(ud("A", "B"), tz("B")), seg(uc("B"), tdm("C", "B")), seg(ud("B", "C"), Guard::SceneExit)],
    )
}

//! Fixed-step integration of the unicycle model
//! `x' = v cos(theta), y' = v sin(theta), theta' = u`.
//!
//! The turn rate is sampled once per step at the step's initial state and
//! held over the step.

use alloc::string::String;
use alloc::vec::Vec;

use crate::control::Gains;
use crate::geom::normalize_angle;
use crate::sensing::Pose;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    #[default]
    Rk4,
    Euler,
}

/// How the closed-loop turn rate is sampled inside a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Hold {
    /// Once at the start of the step and held (zero-order hold).
    #[default]
    Step,
    /// At every integrator stage, integrating the closed loop as one ODE.
    Stage,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub t_max: f64,
    pub integrator: Integrator,
    /// Used by [`simulate`]; protocol runs always hold per step.
    pub hold: Hold,
    /// Record every `record_stride`-th step; the final state is always recorded.
    pub record_stride: usize,
    /// Locate zero crossings of continuous guard signals inside a step.
    pub locate_events: bool,
    /// Minimum rise before a tau-difference maximum counts.
    pub guard_hysteresis: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_max: 60.0,
            integrator: Integrator::Rk4,
            hold: Hold::Step,
            record_stride: 1,
            locate_events: true,
            guard_hysteresis: 1e-6,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Domain("dt must be positive"));
        }
        if !(self.t_max > self.dt && self.t_max.is_finite()) {
            return Err(Error::Domain("t_max must exceed dt"));
        }
        if self.record_stride == 0 {
            return Err(Error::Domain("record stride must be at least 1"));
        }
        if !(self.guard_hysteresis >= 0.0) {
            return Err(Error::Domain("guard hysteresis must be non-negative"));
        }
        Ok(())
    }

    /// Number of steps covering `t_max`, i.e. `ceil(t_max / dt)`.
    pub fn step_count(&self) -> usize {
        let r = self.t_max / self.dt;
        let n = libm::ceil(r - 1e-9 * r.max(1.0));
        n.max(1.0) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub pose: Pose,
}

/// Advance `pose` by `h` (which may be negative) with constant `u` and `v`.
pub fn integrate(pose: &Pose, u: f64, v: f64, h: f64, integrator: Integrator) -> Pose {
    let f = |theta: f64| -> (f64, f64) {
        let (s, c) = libm::sincos(theta);
        (v * c, v * s)
    };
    let (dx, dy, dtheta) = match integrator {
        Integrator::Euler => {
            let (vx, vy) = f(pose.theta);
            (h * vx, h * vy, h * u)
        }
        Integrator::Rk4 => {
            let (k1x, k1y) = f(pose.theta);
            let (k2x, k2y) = f(pose.theta + 0.5 * h * u);
            let (k4x, k4y) = f(pose.theta + h * u);
            // theta is linear in time, so stages two and three coincide.
            (h / 6.0 * (k1x + 4.0 * k2x + k4x), h / 6.0 * (k1y + 4.0 * k2y + k4y), h * u)
        }
    };
    Pose { x: pose.x + dx, y: pose.y + dy, theta: normalize_angle(pose.theta + dtheta) }
}

/// One integrator step of length `cfg.dt`.
pub fn step(state: &SimState, u: f64, v: f64, cfg: &SimConfig) -> Result<SimState> {
    if !(u.is_finite() && state.pose.is_finite() && state.t.is_finite()) {
        return Err(Error::NonFinite("step input"));
    }
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::Domain("speed must be positive"));
    }
    Ok(SimState { t: state.t + cfg.dt, pose: integrate(&state.pose, u, v, cfg.dt, cfg.integrator) })
}

/// One step of the closed loop `theta' = law(state)` with the law sampled
/// at every stage.
fn closed_loop_step<L>(state: &SimState, v: f64, cfg: &SimConfig, law: &mut L) -> Result<SimState>
where
    L: FnMut(&SimState) -> Result<f64>,
{
    let h = cfg.dt;
    let rate = |p: &Pose, u: f64| {
        let (s, c) = libm::sincos(p.theta);
        [v * c, v * s, u]
    };
    let shift =
        |p: &Pose, k: &[f64; 3], a: f64| Pose { x: p.x + a * k[0], y: p.y + a * k[1], theta: p.theta + a * k[2] };
    let p0 = state.pose;
    let mut eval = |t: f64, p: Pose| -> Result<[f64; 3]> {
        let u = law(&SimState { t, pose: p })?;
        if !u.is_finite() {
            return Err(Error::NonFinite("turn rate"));
        }
        Ok(rate(&p, u))
    };
    let k1 = eval(state.t, p0)?;
    if cfg.integrator == Integrator::Euler {
        let p = shift(&p0, &k1, h);
        return Ok(SimState { t: state.t + h, pose: Pose::new(p.x, p.y, p.theta) });
    }
    let k2 = eval(state.t + 0.5 * h, shift(&p0, &k1, 0.5 * h))?;
    let k3 = eval(state.t + 0.5 * h, shift(&p0, &k2, 0.5 * h))?;
    let k4 = eval(state.t + h, shift(&p0, &k3, h))?;
    let mut out = p0;
    out.x += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
    out.y += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
    out.theta = normalize_angle(p0.theta + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]));
    Ok(SimState { t: state.t + h, pose: out })
}

/// One recorded point of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub pose: Pose,
    /// Turn rate applied from this sample on.
    pub u: f64,
    /// Index into [`Trajectory::segment_labels`].
    pub segment: usize,
    /// Time-to-transit of each feature in [`Trajectory::tau_features`].
    pub taus: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMeta {
    pub gains: Gains,
    pub config: SimConfig,
    pub scene_id: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub segment_labels: Vec<String>,
    pub tau_features: Vec<String>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn new(meta: TrajectoryMeta) -> Self {
        Self { samples: Vec::new(), segment_labels: Vec::new(), tau_features: Vec::new(), meta }
    }

    pub fn last_pose(&self) -> Option<Pose> {
        self.samples.last().map(|s| s.pose)
    }

    /// Sample indices at which the active segment changes.
    pub fn switch_indices(&self) -> Vec<usize> {
        self.samples.windows(2).enumerate().filter(|(_, w)| w[0].segment != w[1].segment).map(|(i, _)| i + 1).collect()
    }
}

/// A closed-loop run that stopped on a law error.
#[derive(Debug, Clone, PartialEq)]
pub struct SimFailure {
    pub error: Error,
    pub state: SimState,
    pub partial: Trajectory,
}

/// Closed-loop run of `law` from `init` for `ceil(t_max / dt)` steps or until
/// `stop` returns true. Every recorded sample carries the law's value at
/// that sample.
pub fn simulate<L, S>(
    mut law: L,
    init: Pose,
    gains: &Gains,
    cfg: &SimConfig,
    mut stop: S,
) -> core::result::Result<Trajectory, SimFailure>
where
    L: FnMut(&SimState) -> Result<f64>,
    S: FnMut(&SimState) -> bool,
{
    let mut traj = Trajectory::new(TrajectoryMeta { gains: *gains, config: *cfg, scene_id: String::new() });
    traj.segment_labels.push(String::from("law"));
    let mut state = SimState { t: 0.0, pose: Pose::new(init.x, init.y, init.theta) };
    if let Err(error) = cfg.validate() {
        return Err(SimFailure { error, state, partial: traj });
    }
    let n = cfg.step_count();
    let mut k = 0usize;
    loop {
        let u = match law(&state) {
            Ok(u) => u,
            Err(error) => return Err(SimFailure { error, state, partial: traj }),
        };
        let done = k == n || stop(&state);
        if done || k.is_multiple_of(cfg.record_stride) {
            traj.samples.push(Sample { t: state.t, pose: state.pose, u, segment: 0, taus: Vec::new() });
        }
        if done {
            return Ok(traj);
        }
        let next = match cfg.hold {
            Hold::Step => step(&state, u, gains.v(), cfg),
            Hold::Stage => closed_loop_step(&state, gains.v(), cfg, &mut law),
        };
        match next {
            Ok(mut next) => {
                k += 1;
                next.t = k as f64 * cfg.dt;
                state = next;
            }
            Err(error) => return Err(SimFailure { error, state, partial: traj }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn straight_step() {
        let cfg = SimConfig { dt: 0.1, ..SimConfig::default() };
        let s = step(&SimState { t: 0.0, pose: Pose::new(0.0, 0.0, 0.0) }, 0.0, 1.0, &cfg).unwrap();
        assert!((s.pose.x - 0.1).abs() < 1e-15);
        assert_eq!(s.pose.y, 0.0);
        assert_eq!(s.pose.theta, 0.0);
    }

    #[test]
    fn step_rejects_bad_input() {
        let cfg = SimConfig::default();
        let s = SimState { t: 0.0, pose: Pose::new(0.0, 0.0, 0.0) };
        assert!(step(&s, f64::NAN, 1.0, &cfg).is_err());
        assert!(step(&s, 0.0, 0.0, &cfg).is_err());
    }

    #[test]
    fn heading_stays_normalized() {
        let cfg = SimConfig { dt: 0.5, ..SimConfig::default() };
        let mut s = SimState { t: 0.0, pose: Pose::new(0.0, 0.0, 3.0) };
        for _ in 0..20 {
            s = step(&s, 1.0, 1.0, &cfg).unwrap();
            assert!(s.pose.theta > -PI && s.pose.theta <= PI);
        }
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig { dt: 0.0, ..SimConfig::default() }.validate().is_err());
        assert!(SimConfig { t_max: 1e-4, ..SimConfig::default() }.validate().is_err());
        assert!(SimConfig { record_stride: 0, ..SimConfig::default() }.validate().is_err());
        assert_eq!(SimConfig { dt: 0.1, t_max: 1.0, ..SimConfig::default() }.step_count(), 10);
        assert_eq!(SimConfig { dt: 0.3, t_max: 1.0, ..SimConfig::default() }.step_count(), 4);
    }

    #[test]
    fn zero_law_flies_straight_for_t_max() {
        let g = Gains::default();
        let cfg = SimConfig { dt: 0.01, t_max: 2.0, ..SimConfig::default() };
        let tr = simulate(|_| Ok(0.0), Pose::new(0.0, 0.0, 0.0), &g, &cfg, |_| false).unwrap();
        assert_eq!(tr.samples.len(), 201);
        assert!((tr.last_pose().unwrap().x - 2.0).abs() < 1e-12);
    }

    #[test]
    fn stop_predicate_ends_run() {
        let g = Gains::default();
        let cfg = SimConfig { dt: 1e-3, t_max: 20.0, ..SimConfig::default() };
        let tr = simulate(|_| Ok(0.0), Pose::new(0.0, 0.0, 0.0), &g, &cfg, |s| s.pose.x >= 5.0).unwrap();
        let t_end = tr.samples.last().unwrap().t;
        assert!((t_end - 5.0).abs() <= cfg.dt);
    }

    #[test]
    fn law_error_returns_partial() {
        let g = Gains::default();
        let cfg = SimConfig { dt: 0.1, t_max: 5.0, ..SimConfig::default() };
        let err = simulate(
            |s| if s.t > 1.0 { Err(Error::DegeneratePair) } else { Ok(0.0) },
            Pose::new(0.0, 0.0, 0.0),
            &g,
            &cfg,
            |_| false,
        )
        .unwrap_err();
        assert_eq!(err.error, Error::DegeneratePair);
        assert_eq!(err.partial.samples.len(), 11);
        assert!(err.state.t > 1.0);
    }

    #[test]
    fn stride_keeps_final_sample() {
        let g = Gains::default();
        let cfg = SimConfig { dt: 0.1, t_max: 1.0, record_stride: 3, ..SimConfig::default() };
        let tr = simulate(|_| Ok(0.0), Pose::new(0.0, 0.0, 0.0), &g, &cfg, |_| false).unwrap();
        let ts: Vec<f64> = tr.samples.iter().map(|s| s.t).collect();
        assert_eq!(ts.len(), 5); // steps 0, 3, 6, 9, 10
        assert!((ts[4] - 1.0).abs() < 1e-12);
    }
}

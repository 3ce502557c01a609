//! One PASS/FAIL line per acceptance criterion. Exits nonzero on any failure.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use taunav::cli::{load_protocols, load_scene, run_one};
use taunav::csvio::write_trajectory;
use taunav_core::control::{theta_closed_form, time_to_curvature, u_distance, Gains};
use taunav_core::protocol::{run_protocol, triangle_protocol};
use taunav_core::sensing::{image_flow, image_tau, tau_geometric};
use taunav_core::sim::{simulate, Hold, SimConfig};
use taunav_core::trajproc::{
    arc_reparam, chord_abscissae, mean_trajectory, truncate_common, woods_excursion_after, ArcCurve, NaturalCubic,
    PlanarCurve, SmoothingSpline,
};
use taunav_core::{normalize_angle, Camera, CameraSide, Feature, Pose, Vec2};
use taunav_oracle::{bisect, ls_line, rk4, smoothing_qp};

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(name: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    if let Some(limit) = limit {
        o.detail.push_str(&format!("; runtime {:.3} s (limit {} s)", took.as_secs_f64(), limit.as_secs_f64()));
        o.pass &= took < limit;
    }
    println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    o.pass
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn sensor_equivalence() -> Outcome {
    let mut r = rng(1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let pose = Pose::new(r.gen_range(-50.0..50.0), r.gen_range(-50.0..50.0), r.gen_range(-PI..PI));
        let side = if r.gen_bool(0.5) { CameraSide::Left } else { CameraSide::Right };
        let f = r.gen_range(1e-3..0.1);
        let v = r.gen_range(0.1..10.0);
        let along = r.gen_range(-20.0..20.0);
        let depth = r.gen_range(f + 0.05..30.0);
        let lateral = if side == CameraSide::Left { depth } else { -depth };
        let (s, c) = pose.theta.sin_cos();
        let feature = Feature::new("f", pose.x + c * along - s * lateral, pose.y + s * along + c * lateral);
        let cam = Camera::new(f, side).unwrap();
        let geo = tau_geometric(&pose, &feature, v).unwrap();
        let img = image_tau(&image_flow(&pose, v, 0.0, &feature, &cam).unwrap()).unwrap();
        worst = worst.max((img - geo).abs() / (1.0 + geo.abs()));
    }
    Outcome {
        pass: worst <= 1e-9,
        detail: format!("1000 configurations, max |diff|/(1+|tau|) = {worst:.2e} (tol 1e-9)"),
    }
}

fn alignment() -> Outcome {
    let mut r = rng(2);
    let g = Gains::default();
    let cfg = SimConfig { dt: 1e-3, t_max: 10.0, ..SimConfig::default() };
    let mut worst_heading = 0.0f64;
    let mut lyapunov_ok = true;
    for _ in 0..100 {
        let phi = r.gen_range(-PI..PI);
        let f1 = Feature::new("1", r.gen_range(-5.0..5.0), r.gen_range(-5.0..5.0));
        let f2 = Feature::new("2", f1.x + phi.cos(), f1.y + phi.sin());
        // tau_2 > tau_1 means the heading is within a right angle of f1 -> f2
        let th0 = phi + r.gen_range(-FRAC_PI_2 + 1e-3..FRAC_PI_2 - 1e-3);
        let init = Pose::new(r.gen_range(-10.0..10.0), r.gen_range(-10.0..10.0), th0);
        assert!(tau_geometric(&init, &f2, 1.0).unwrap() > tau_geometric(&init, &f1, 1.0).unwrap());
        let traj = simulate(|s| u_distance(&s.pose, &f1, &f2, &g), init, &g, &cfg, |_| false).unwrap();
        let v: Vec<f64> = traj.samples.iter().map(|s| 1.0 - (s.pose.theta - phi).cos()).collect();
        lyapunov_ok &= v.windows(2).all(|w| w[1] <= w[0]);
        let end = traj.samples.last().unwrap();
        assert!((end.t - 10.0).abs() < 1e-9);
        worst_heading = worst_heading.max(normalize_angle(end.pose.theta - phi).abs());
    }
    Outcome {
        pass: worst_heading < 1e-3 && lyapunov_ok,
        detail: format!(
            "100 poses, max heading error at t=10 = {worst_heading:.2e} rad (tol 1e-3), V non-increasing: {lyapunov_ok}"
        ),
    }
}

fn closed_form() -> Outcome {
    let g = Gains::default();
    let cfg = SimConfig { dt: 1e-3, t_max: 10.0, hold: Hold::Stage, ..SimConfig::default() };
    let mut worst = 0.0f64;
    for th0 in [3.0, 2.0, FRAC_PI_2, 0.5, -1.0, -2.8] {
        let traj = simulate(|s| Ok(-s.pose.theta.sin()), Pose::new(0.0, 0.0, th0), &g, &cfg, |_| false).unwrap();
        for s in &traj.samples {
            worst = worst.max((s.pose.theta - theta_closed_form(th0, 1.0, s.t).unwrap()).abs());
        }
    }
    let mut r = rng(3);
    let mut worst_t = 0.0f64;
    for _ in 0..50 {
        let th0 = r.gen_range(0.05..3.1) * if r.gen_bool(0.5) { 1.0 } else { -1.0 };
        let k = r.gen_range(0.1..5.0);
        let alpha = r.gen_range(0.01..0.99) * k * f64::sin(th0).abs();
        let t = time_to_curvature(th0, k, alpha).unwrap();
        let u = k * theta_closed_form(th0, k, t).unwrap().sin();
        worst_t = worst_t.max((u.abs() - alpha).abs());
    }
    let reference = time_to_curvature(FRAC_PI_2, 1.0, 0.5).unwrap();
    let dt = 1e-4;
    let ode = rk4(|_, y: &[f64; 1]| [-y[0].sin()], [FRAC_PI_2], dt, 30_000);
    let u_at = |s: f64| {
        let i = ((s / dt) as usize).min(ode.len() - 2);
        let w = s / dt - i as f64;
        (ode[i][0] * (1.0 - w) + ode[i + 1][0] * w).sin().abs() - 0.5
    };
    let bisected = bisect(u_at, 0.0, 3.0, 1e-12);
    let ref_ok = (reference - 1.316958).abs() < 1e-6 && (bisected - reference).abs() < 1e-6;
    Outcome {
        pass: worst <= 1e-8 && worst_t <= 1e-6 && ref_ok,
        detail: format!(
            "RK4 vs closed form max {worst:.2e} (tol 1e-8); 50 thresholds max ||u(T)|-alpha| {worst_t:.2e} (tol 1e-6); \
             T(pi/2, 1, 0.5) = {reference:.6} (bisection {bisected:.6})"
        ),
    }
}

fn fixture(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn line_offset(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let d = b - a;
    d.cross(p - a).abs() / d.norm()
}

fn triangle() -> Outcome {
    let file = load_scene(&fixture("triangle.scene")).unwrap();
    let scene = &file.scene;
    let init = file.start.unwrap();
    let pt = |n: &str| scene.feature(n).unwrap().pos();
    let (a, b, c) = (pt("A"), pt("B"), pt("C"));
    let traj = run_protocol(scene, &triangle_protocol(), init, &Gains::default(), &SimConfig::default()).unwrap();
    let end = traj.samples.last().unwrap();
    let bc = c - b;
    let heading_err = normalize_angle(end.pose.theta - bc.y.atan2(bc.x)).abs();
    let start_offset = line_offset(init.position(), a, b);
    let end_offset = line_offset(end.pose.position(), b, c);
    let offset_err = (end_offset - start_offset).abs() / start_offset;
    let circling: Vec<f64> =
        traj.samples.iter().filter(|s| s.segment == 1).map(|s| s.pose.position().distance(b)).collect();
    let r0 = circling[0];
    let drift = circling.iter().map(|r| (r - r0).abs() / r0).fold(0.0, f64::max);
    Outcome {
        pass: heading_err < 1e-3 && offset_err < 0.01 && drift < 1e-6,
        detail: format!(
            "heading error vs B->C {heading_err:.2e} rad (tol 1e-3), offset {end_offset:.6} vs {start_offset:.6} \
             ({:.3}% , tol 1%), circling drift {drift:.2e} (tol 1e-6)",
            offset_err * 100.0
        ),
    }
}

fn instance(r: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0f64];
    for _ in 1..n {
        let last = xs[xs.len() - 1];
        xs.push(last + r.gen_range(0.2..1.2));
    }
    let ys = xs.iter().map(|x| (1.3 * x).sin() + r.gen_range(-0.3..0.3)).collect();
    (xs, ys)
}

fn spline() -> Outcome {
    let mut r = rng(5);
    let mut interp = 0.0f64;
    let mut line = 0.0f64;
    let mut qp = 0.0f64;
    for _ in 0..20 {
        let (xs, ys) = instance(&mut r, 9);
        let s = NaturalCubic::fit(&xs, &ys, 1.0).unwrap();
        interp = xs.iter().zip(&ys).map(|(x, y)| (s.eval(*x) - y).abs()).fold(interp, f64::max);
        let (m, c) = ls_line(&xs, &ys);
        let s0 = NaturalCubic::fit(&xs, &ys, 0.0).unwrap();
        line = xs.iter().map(|x| (s0.eval(*x) - (m * x + c)).abs()).fold(line, f64::max);
        let (xs, ys) = instance(&mut r, 7);
        let ours = NaturalCubic::fit(&xs, &ys, 0.85).unwrap().objective(&ys, 0.85);
        let (_, best) = smoothing_qp(&xs, &ys, 0.85);
        qp = qp.max((ours - best).abs() / best.abs());
    }
    Outcome {
        pass: interp <= 1e-9 && line <= 1e-9 && qp <= 1e-8,
        detail: format!(
            "lambda=1 residual {interp:.2e} (tol 1e-9), lambda=0 vs LS line {line:.2e} (tol 1e-9), \
             lambda=0.85 objective vs QP {qp:.2e} relative over 20 instances (tol 1e-8)"
        ),
    }
}

struct Quarter;

impl PlanarCurve for Quarter {
    fn domain(&self) -> (f64, f64) {
        (0.0, 1.0)
    }
    // uneven speed along the unit circle
    fn point(&self, u: f64) -> Vec2 {
        let w = FRAC_PI_2 * u * u;
        Vec2::new(w.cos(), w.sin())
    }
    fn velocity(&self, u: f64) -> Vec2 {
        let w = FRAC_PI_2 * u * u;
        let dw = PI * u;
        Vec2::new(-w.sin() * dw, w.cos() * dw)
    }
}

fn in_hull(points: &[Vec2], p: Vec2) -> bool {
    (0..72).all(|k| {
        let d = Vec2::from_angle(k as f64 * PI / 36.0);
        points.iter().map(|q| q.dot(d)).fold(f64::NEG_INFINITY, f64::max) >= p.dot(d) - 1e-12
    })
}

fn pipeline() -> Outcome {
    let mut r = rng(6);
    let mut spacing = 0.0f64;
    let mut curves = Vec::new();
    for _ in 0..12 {
        let phase = r.gen_range(0.0..6.0);
        let pts: Vec<Vec2> = (0..25)
            .map(|i| {
                let t = i as f64 * 0.5;
                Vec2::new(t + 0.2 * (t + phase).sin(), 1.5 * (0.7 * t + phase).sin() + r.gen_range(-0.1..0.1))
            })
            .collect();
        let s = SmoothingSpline::fit_points(&chord_abscissae(&pts), &pts, 0.85).unwrap();
        let a = arc_reparam(&s, 80).unwrap();
        let ch = a.chords();
        spacing = ch.iter().map(|c| (c - ch[0]).abs() / ch[0]).fold(spacing, f64::max);
        curves.push(a);
    }
    let quarter = arc_reparam(&Quarter, 50).unwrap().total_length;
    let l = curves.iter().map(|c| c.total_length).fold(f64::INFINITY, f64::min);
    let (common, _) = truncate_common(&curves, l, 60).unwrap();
    let mean = mean_trajectory(&common).unwrap();
    let hull = (0..60).all(|j| in_hull(&common.iter().map(|c| c.samples[j]).collect::<Vec<_>>(), mean.samples[j]));
    let mirrored = ArcCurve {
        samples: common[0].samples.iter().map(|p| Vec2::new(p.x, -p.y)).collect(),
        total_length: common[0].total_length,
    };
    let pair = mean_trajectory(&[common[0].clone(), mirrored]).unwrap();
    let symmetric = pair.samples.iter().zip(&common[0].samples).all(|(m, p)| m.y == 0.0 && m.x == p.x);
    Outcome {
        pass: spacing <= 1e-9 && (quarter - FRAC_PI_2).abs() <= 1e-6 && hull && symmetric,
        detail: format!(
            "chord spread {spacing:.2e} (tol 1e-9), quarter circle {quarter:.12} (pi/2 +- 1e-6), \
             mean in convex hull: {hull}, mirror-pair mean on axis: {symmetric}"
        ),
    }
}

fn end_to_end() -> Outcome {
    let file = load_scene(&fixture("example.scene")).unwrap();
    let scene = &file.scene;
    let init = file.start.unwrap();
    let cfg = SimConfig::default();
    let protocols = load_protocols(&["all".to_owned()]).unwrap();
    let c = scene.feature("C").unwrap().pos();
    let h = scene.feature("H").unwrap().pos();
    let mut excursions = Vec::new();
    let mut completed = true;
    let mut identical = true;
    for p in &protocols {
        let a = run_one(scene, p, init, &Gains::default(), &cfg).unwrap();
        let b = run_one(scene, p, init, &Gains::default(), &cfg).unwrap();
        completed &= a.error.is_none();
        identical &= write_trajectory(&a.trajectory, None) == write_trajectory(&b.trajectory, None);
        let pts: Vec<Vec2> = a.trajectory.samples.iter().map(|s| s.pose.position()).collect();
        excursions.push((p.name.clone(), woods_excursion_after(&pts, c, h).unwrap_or(f64::INFINITY)));
    }
    let integrated =
        excursions.iter().filter(|e| e.0.ends_with("squares")).map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
    let cue = excursions.iter().filter(|e| e.0.ends_with("circles")).map(|e| e.1).fold(f64::INFINITY, f64::min);
    let list: Vec<String> = excursions.iter().map(|(n, e)| format!("{n} {e:.3}")).collect();
    Outcome {
        pass: completed && integrated < cue && identical,
        detail: format!(
            "all four complete: {completed}; excursion past C [{}]; max integrated {integrated:.3} < min cue-directed {cue:.3}; \
             byte-identical reruns: {identical}",
            list.join(", ")
        ),
    }
}

fn main() {
    let results = [
        check("sensor equivalence", Some(Duration::from_secs(1)), sensor_equivalence),
        check("distance-law alignment", Some(Duration::from_secs(10)), alignment),
        check("closed-form heading", None, closed_form),
        check("triangle protocol", Some(Duration::from_secs(5)), triangle),
        check("smoothing spline", None, spline),
        check("arc-length pipeline", None, pipeline),
        check("field protocols end to end", None, end_to_end),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

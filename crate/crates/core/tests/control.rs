use std::f64::consts::{FRAC_PI_2, PI};

use proptest::prelude::*;
use taunav_core::control::*;
use taunav_core::sensing::{tau_geometric, Pose};
use taunav_core::sim::{simulate, Hold, SimConfig};
use taunav_core::{Error, Feature, Vec2};
use taunav_oracle::{bisect, rk4};

fn feat(id: &str, x: f64, y: f64) -> Feature {
    Feature::new(id, x, y)
}

#[test]
fn gains_validate() {
    assert!(Gains::new(0.0, 1.0).is_err());
    assert!(Gains::new(1.0, -1.0).is_err());
    let g = Gains::new(2.0, 3.0).unwrap();
    assert_eq!((g.k(), g.v()), (2.0, 3.0));
}

#[test]
fn distance_law_examples() {
    let (a, b) = (feat("a", 0.0, 0.0), feat("b", 1.0, 0.0));
    let g = Gains::default();
    assert!((u_distance(&Pose::new(0.0, 0.0, FRAC_PI_2), &a, &b, &g).unwrap() + 1.0).abs() < 1e-15);
    assert_eq!(u_distance(&Pose::new(3.0, 2.0, 0.0), &a, &b, &g).unwrap(), 0.0);
    assert_eq!(u_distance(&Pose::new(3.0, 2.0, 0.0), &a, &a.clone(), &g), Err(Error::DegeneratePair));
}

proptest! {
    #[test]
    fn distance_law_is_scaled_pair_derivative(x in -5.0..5.0f64, y in -5.0..5.0f64, th in -3.0..3.0f64,
                                              x1 in -5.0..5.0f64, y1 in -5.0..5.0f64, x2 in -5.0..5.0f64,
                                              y2 in -5.0..5.0f64, k in 0.1..3.0f64, v in 0.2..3.0f64) {
        prop_assume!((x1 - x2).abs() + (y1 - y2).abs() > 1e-3);
        let (f1, f2) = (feat("1", x1, y1), feat("2", x2, y2));
        let g = Gains::new(k, v).unwrap();
        let u = u_distance(&Pose::new(x, y, th), &f1, &f2, &g).unwrap();
        let diff = |t: f64| {
            let p = Pose::new(x, y, t);
            tau_geometric(&p, &f2, v).unwrap() - tau_geometric(&p, &f1, v).unwrap()
        };
        let h = 1e-6;
        let fd = k * (diff(th + h) - diff(th - h)) / (2.0 * h);
        prop_assert!((u - fd).abs() <= 1e-6 * (1.0 + u.abs()));
        // global form
        let global = k / v * (-th.sin() * (x2 - x1) + th.cos() * (y2 - y1));
        prop_assert!((u - global).abs() <= 1e-12 * (1.0 + u.abs()));
    }
}

#[test]
fn circle_law_on_the_manifold() {
    let g = Gains::default();
    // Feature abeam at distance 2 and 10.
    let u2 = u_circle(&Pose::new(0.0, 0.0, 0.0), &feat("f", 0.0, 2.0), &g).unwrap();
    assert!((u2.abs() - 0.5).abs() < 1e-15);
    assert!(u2 > 0.0, "feature on the left means turning left");
    let u10 = u_circle(&Pose::new(0.0, 0.0, 0.0), &feat("f", 0.0, -10.0), &g).unwrap();
    assert!((u10 + 0.1).abs() < 1e-15);
    let r = u_circle(&Pose::new(1.0, 1.0, 0.0), &feat("f", 1.0, 1.0 + 1e-7), &g);
    assert!(matches!(r, Err(Error::SingularCircle { .. })));
}

#[test]
fn circling_keeps_range_over_half_a_revolution() {
    let f = feat("f", 0.0, 3.0);
    let g = Gains::default();
    let cfg = SimConfig { dt: 1e-3, t_max: PI * 3.0, ..SimConfig::default() };
    let traj = simulate(|s| u_circle(&s.pose, &f, &g), Pose::new(0.0, 0.0, 0.0), &g, &cfg, |_| false).unwrap();
    for s in &traj.samples {
        let r = s.pose.position().distance(f.pos());
        assert!((r - 3.0).abs() / 3.0 < 1e-6, "r = {r} at t = {}", s.t);
    }
    let last = traj.samples.last().unwrap();
    let phase = last.t / 3.0;
    let expected = Vec2::new(3.0 * phase.sin(), 3.0 - 3.0 * phase.cos());
    assert!(last.pose.position().distance(expected) < 1e-6);
}

#[test]
fn circling_converges_from_off_the_manifold() {
    let f = feat("f", 4.0, -2.0);
    let g = Gains::new(1.5, 1.0).unwrap();
    let cfg = SimConfig { dt: 1e-3, t_max: 20.0, ..SimConfig::default() };
    let traj = simulate(|s| u_circle(&s.pose, &f, &g), Pose::new(0.0, 0.0, 0.3), &g, &cfg, |_| false).unwrap();
    let last = traj.last_pose().unwrap();
    assert!(tau_geometric(&last, &f, 1.0).unwrap().abs() < 1e-6);
}

#[test]
fn pass_law_symmetry_and_sign() {
    let g = Gains::default();
    let (l, r) = (feat("l", 5.0, 1.0), feat("r", 5.0, -1.0));
    assert_eq!(u_pass(&Pose::new(0.0, 0.0, 0.0), &l, &r, &g).unwrap(), 0.0);
    assert_eq!(u_pass(&Pose::new(0.0, 0.0, 0.0), &l, &l.clone(), &g), Err(Error::DegeneratePair));
    // Left feature further ahead: turn right, square to the gap.
    let (l2, r2) = (feat("l", 6.0, 1.0), feat("r", 5.0, -1.0));
    assert!(u_pass(&Pose::new(0.0, 0.0, 0.0), &l2, &r2, &g).unwrap() < 0.0);
    assert_eq!(
        u_pass(&Pose::new(0.0, 0.0, 0.2), &l2, &r2, &g).unwrap(),
        u_pass(&Pose::new(0.0, 0.0, 0.2), &r2, &l2, &g).unwrap()
    );
}

#[test]
fn pass_law_crosses_between_the_features() {
    let (f1, f2) = (feat("1", 10.0, 1.0), feat("2", 10.0, -1.0));
    let g = Gains::default();
    let cfg = SimConfig { dt: 1e-2, t_max: 30.0, ..SimConfig::default() };
    let mut crossed = 0;
    for i in 0..10 {
        for j in 0..10 {
            // approach cone: start within 0.5 m of the axis, heading within 0.5 rad
            let y0 = -0.5 + (i as f64 + 0.5) / 10.0;
            let th0 = -0.5 + (j as f64 + 0.5) / 10.0;
            let traj =
                simulate(|s| u_pass(&s.pose, &f1, &f2, &g), Pose::new(0.0, y0, th0), &g, &cfg, |s| s.pose.x >= 10.0)
                    .unwrap();
            let w =
                traj.samples.windows(2).find(|w| w[0].pose.x < 10.0 && w[1].pose.x >= 10.0).expect("reaches the pair");
            let s = (10.0 - w[0].pose.x) / (w[1].pose.x - w[0].pose.x);
            let y = w[0].pose.y + s * (w[1].pose.y - w[0].pose.y);
            assert!(y > -1.0 && y < 1.0, "crossed at y = {y} from ({y0}, {th0})");
            crossed += 1;
        }
    }
    assert_eq!(crossed, 100);
}

#[test]
fn closed_form_examples() {
    assert_eq!(theta_closed_form(0.0, 1.0, 5.0).unwrap(), 0.0);
    let t1 = theta_closed_form(FRAC_PI_2, 1.0, 1.0).unwrap();
    assert!((t1 - 2.0 * (-1f64).exp().atan()).abs() < 1e-15);
    assert!((t1 - 0.705_026).abs() < 1e-6);
    let ode = rk4(|_, y: &[f64; 1]| [-y[0].sin()], [FRAC_PI_2], 1e-3, 1000);
    assert!((ode[1000][0] - t1).abs() < 1e-8);
    assert_eq!(theta_closed_form(PI, 1.0, 1.0), Err(Error::SingularHeading));
    assert_eq!(theta_closed_form(-PI, 1.0, 1.0), Err(Error::SingularHeading));
    let mut prev = FRAC_PI_2;
    for i in 1..100 {
        let th = theta_closed_form(FRAC_PI_2, 1.0, i as f64 * 0.2).unwrap();
        assert!(th < prev && th > 0.0);
        prev = th;
    }
}

#[test]
fn closed_form_matches_ode_over_ten_time_constants() {
    for (th0, k) in [(2.5, 1.0), (-1.0, 0.5), (0.3, 2.0), (-3.0, 1.0)] {
        let dt = 1e-3;
        let steps = (10.0f64 / k / dt).round() as usize;
        let ode = rk4(|_, y: &[f64; 1]| [-k * y[0].sin()], [th0], dt, steps);
        for (i, y) in ode.iter().enumerate().step_by(97) {
            let cf = theta_closed_form(th0, k, i as f64 * dt).unwrap();
            assert!((cf - y[0]).abs() < 1e-8, "theta0 {th0} k {k} step {i}");
        }
    }
}

#[test]
fn stage_sampled_simulation_follows_closed_form() {
    let g = Gains::default();
    let cfg = SimConfig { dt: 1e-3, t_max: 10.0, hold: Hold::Stage, ..SimConfig::default() };
    let traj = simulate(|s| Ok(-s.pose.theta.sin()), Pose::new(0.0, 0.0, 2.0), &g, &cfg, |_| false).unwrap();
    for s in traj.samples.iter().step_by(50) {
        assert!((s.pose.theta - theta_closed_form(2.0, 1.0, s.t).unwrap()).abs() < 1e-8);
    }
}

#[test]
fn held_simulation_is_first_order_in_dt() {
    let g = Gains::default();
    let err = |dt: f64| {
        let cfg = SimConfig { dt, t_max: 5.0, ..SimConfig::default() };
        let traj = simulate(|s| Ok(-s.pose.theta.sin()), Pose::new(0.0, 0.0, 2.0), &g, &cfg, |_| false).unwrap();
        (traj.last_pose().unwrap().theta - theta_closed_form(2.0, 1.0, 5.0).unwrap()).abs()
    };
    let ratio = err(2e-3) / err(1e-3);
    assert!((ratio - 2.0).abs() < 0.05, "ratio {ratio}");
}

#[test]
fn time_to_curvature_reference_case() {
    let t = time_to_curvature(FRAC_PI_2, 1.0, 0.5).unwrap();
    assert!((t - (1.0 / (PI / 12.0).tan()).ln()).abs() < 1e-12);
    assert!((t - 1.316_958).abs() < 1e-6);
    // bisection on |u(t)| = alpha along an RK4 solution of the heading ODE
    let dt = 1e-4;
    let ode = rk4(|_, y: &[f64; 1]| [-y[0].sin()], [FRAC_PI_2], dt, 30_000);
    let u_at = |s: f64| {
        let i = ((s / dt) as usize).min(ode.len() - 2);
        let w = s / dt - i as f64;
        let th = ode[i][0] * (1.0 - w) + ode[i + 1][0] * w;
        th.sin().abs() - 0.5
    };
    let tb = bisect(u_at, 0.0, 3.0, 1e-12);
    assert!((tb - t).abs() < 1e-6, "{tb} vs {t}");
}

#[test]
fn time_to_curvature_domain() {
    assert!(time_to_curvature(FRAC_PI_2, 1.0, 1.0).is_err());
    assert!(time_to_curvature(FRAC_PI_2, 1.0, 0.0).is_err());
    assert!(time_to_curvature(FRAC_PI_2, 0.0, 0.5).is_err());
    assert!(time_to_curvature(0.0, 1.0, 0.1).is_err());
    let near = time_to_curvature(1.0, 2.0, 2.0 * 1f64.sin() * (1.0 - 1e-12)).unwrap();
    assert!(near.abs() < 1e-6);
}

proptest! {
    #[test]
    fn time_to_curvature_hits_the_threshold(th0 in -3.1..3.1f64, k in 0.1..5.0f64, frac in 0.01..0.99f64) {
        prop_assume!(th0.abs() > 1e-3);
        let alpha = frac * k * th0.sin().abs();
        let t = time_to_curvature(th0, k, alpha).unwrap();
        let th = theta_closed_form(th0, k, t).unwrap();
        prop_assert!(((k * th.sin()).abs() - alpha).abs() <= 1e-6);
        prop_assert!(t >= 0.0);
    }

    #[test]
    fn curvature_profile(th0 in -3.1..3.1f64, k in 0.2..3.0f64) {
        prop_assume!(th0.abs() > 1e-2);
        let u = |t: f64| (k * theta_closed_form(th0, k, t).unwrap().sin()).abs();
        let samples: Vec<f64> = (0..400).map(|i| u(i as f64 * 0.025 / k)).collect();
        // Decreasing once |theta| <= pi/2; before that it can only rise.
        let peak = samples.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        if th0.abs() <= FRAC_PI_2 {
            prop_assert_eq!(peak, 0);
        }
        for w in samples[..=peak].windows(2) {
            prop_assert!(w[1] >= w[0]);
        }
        for w in samples[peak..].windows(2) {
            prop_assert!(w[1] < w[0] || w[1] < 1e-12);
        }
    }
}

fn lyapunov(theta: f64, dir: Vec2) -> f64 {
    1.0 - theta.cos() * dir.x - theta.sin() * dir.y
}

#[test]
fn distance_law_aligns_and_decreases_lyapunov() {
    let (f1, f2) = (feat("1", 0.0, 0.0), feat("2", 1.0, 0.0));
    let dir = Vec2::new(1.0, 0.0);
    let g = Gains::default();
    let cfg = SimConfig { dt: 1e-3, t_max: 10.0, ..SimConfig::default() };
    for th0 in [1.5, -1.2, 0.4, -0.05] {
        let traj =
            simulate(|s| u_distance(&s.pose, &f1, &f2, &g), Pose::new(0.0, -1.0, th0), &g, &cfg, |_| false).unwrap();
        let v: Vec<f64> = traj.samples.iter().map(|s| lyapunov(s.pose.theta, dir)).collect();
        assert!(v.windows(2).all(|w| w[1] <= w[0]));
        // Lie derivative -k rho (-sin th v_x + cos th v_y)^2 (rho = 1 here)
        for w in traj.samples.windows(2).step_by(500) {
            let th = w[0].pose.theta;
            let expected = -(-(th.sin()) * dir.x + th.cos() * dir.y).powi(2);
            let measured = (lyapunov(w[1].pose.theta, dir) - lyapunov(th, dir)) / cfg.dt;
            assert!((measured - expected).abs() < 2e-3, "{measured} vs {expected}");
        }
        assert!(traj.last_pose().unwrap().theta.abs() < 1e-3);
    }
}

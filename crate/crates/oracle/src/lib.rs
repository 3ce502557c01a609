//! Slow, independent reference computations used by the test suites.
//!
//! Nothing here shares code with `taunav-core`; the point is to check the
//! fast paths against plain dense or brute-force evaluations.

/// Solve a dense square system by Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let m = a[row][col] / a[col][col];
            if m != 0.0 {
                for c in col..n {
                    a[row][c] -= m * a[col][c];
                }
                b[row] -= m * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for c in row + 1..n {
            acc -= a[row][c] * x[c];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Second derivatives at the knots of the natural cubic interpolant of
/// `(xs, ys)`, from the dense continuity system.
pub fn natural_second_derivatives(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut a = vec![vec![0.0; n]; n];
    let mut b = vec![0.0; n];
    a[0][0] = 1.0;
    a[n - 1][n - 1] = 1.0;
    for i in 1..n - 1 {
        let h0 = xs[i] - xs[i - 1];
        let h1 = xs[i + 1] - xs[i];
        a[i][i - 1] = h0 / 6.0;
        a[i][i] = (h0 + h1) / 3.0;
        a[i][i + 1] = h1 / 6.0;
        b[i] = (ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0;
    }
    dense_solve(a, b).expect("natural spline system is nonsingular")
}

/// Gram matrix `K` with `g^T K g = integral of s_g''^2`, where `s_g` is the
/// natural cubic interpolant of values `g` at `xs`.
pub fn roughness_matrix(xs: &[f64]) -> Vec<Vec<f64>> {
    let n = xs.len();
    let basis: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let e: Vec<f64> = (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect();
            natural_second_derivatives(xs, &e)
        })
        .collect();
    let mut k = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let (p, q) = (&basis[i], &basis[j]);
            let mut acc = 0.0;
            for m in 0..n - 1 {
                let h = xs[m + 1] - xs[m];
                // exact integral of the product of two linear functions
                acc += h * (2.0 * p[m] * q[m] + p[m] * q[m + 1] + p[m + 1] * q[m] + 2.0 * p[m + 1] * q[m + 1]) / 6.0;
            }
            k[i][j] = acc;
        }
    }
    k
}

/// Natural-spline smoothing by brute force over the spline values:
/// minimise `lambda |y - g|^2 + (1 - lambda) g^T K g`. Returns the optimal
/// knot values and the optimal objective. Needs `lambda > 0`.
pub fn smoothing_qp(xs: &[f64], ys: &[f64], lambda: f64) -> (Vec<f64>, f64) {
    let k = roughness_matrix(xs);
    let mut a = k.clone();
    for (i, row) in a.iter_mut().enumerate() {
        for v in row.iter_mut() {
            *v *= 1.0 - lambda;
        }
        row[i] += lambda;
    }
    let b: Vec<f64> = ys.iter().map(|y| lambda * y).collect();
    let g = dense_solve(a, b).expect("smoothing system is nonsingular");
    (g.clone(), smoothing_objective(xs, ys, &g, lambda))
}

/// Objective of the natural spline through values `g`.
pub fn smoothing_objective(xs: &[f64], ys: &[f64], g: &[f64], lambda: f64) -> f64 {
    let k = roughness_matrix(xs);
    let n = xs.len();
    let mut rough = 0.0;
    for i in 0..n {
        for j in 0..n {
            rough += g[i] * k[i][j] * g[j];
        }
    }
    let fid: f64 = ys.iter().zip(g).map(|(y, v)| (y - v) * (y - v)).sum();
    lambda * fid + (1.0 - lambda) * rough
}

/// Ordinary least-squares line `y = slope x + intercept`.
pub fn ls_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Classical four-stage Runge-Kutta for `y' = f(t, y)` with fixed step,
/// returning the state at every step.
pub fn rk4<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    y0: [f64; N],
    dt: f64,
    steps: usize,
) -> Vec<[f64; N]> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut y = y0;
    out.push(y);
    let axpy = |y: &[f64; N], k: &[f64; N], s: f64| {
        let mut r = *y;
        for i in 0..N {
            r[i] += s * k[i];
        }
        r
    };
    for i in 0..steps {
        let t = i as f64 * dt;
        let k1 = f(t, &y);
        let k2 = f(t + 0.5 * dt, &axpy(&y, &k1, 0.5 * dt));
        let k3 = f(t + 0.5 * dt, &axpy(&y, &k2, 0.5 * dt));
        let k4 = f(t + dt, &axpy(&y, &k3, dt));
        for j in 0..N {
            y[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        out.push(y);
    }
    out
}

/// Root of `f` on a sign-changing bracket by plain bisection.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    assert!(fa * f(b) <= 0.0, "bisection needs a sign change");
    while b - a > tol {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Maximiser of a unimodal `f` on `[a, b]` by golden-section search.
pub fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    while b - a > tol {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

/// Image coordinate of a point by tracing the ray from the point through
/// the pinhole to the image line, all in world coordinates.
///
/// The image line passes through `pos` along `heading`; the pinhole sits at
/// distance `f` from it on the viewing side (`left` or right of the
/// heading). Returns `None` when the ray does not reach the image line
/// beyond the pinhole.
pub fn ray_trace_image(pos: (f64, f64), heading: f64, left: bool, f: f64, point: (f64, f64)) -> Option<f64> {
    let e = (heading.cos(), heading.sin());
    let side = if left { (-e.1, e.0) } else { (e.1, -e.0) };
    let pin = (pos.0 + f * side.0, pos.1 + f * side.1);
    let dir = (pin.0 - point.0, pin.1 - point.1);
    // point + s dir = pos + a e
    let m = vec![vec![dir.0, -e.0], vec![dir.1, -e.1]];
    let rhs = vec![pos.0 - point.0, pos.1 - point.1];
    let det = dir.0 * (-e.1) - (-e.0) * dir.1;
    if det.abs() < 1e-14 {
        return None;
    }
    let sol = dense_solve(m, rhs)?;
    (sol[0] > 1.0).then_some(sol[1])
}

/// `n` points at equal fractions of the length of polyline `pts`, by
/// walking it at a fine uniform step and interpolating.
pub fn dense_resample(pts: &[(f64, f64)], n: usize) -> Vec<(f64, f64)> {
    let seg: Vec<f64> =
        pts.windows(2).map(|w| ((w[1].0 - w[0].0).powi(2) + (w[1].1 - w[0].1).powi(2)).sqrt()).collect();
    let total: f64 = seg.iter().sum();
    (0..n)
        .map(|j| {
            let mut target = total * j as f64 / (n - 1) as f64;
            for (i, l) in seg.iter().enumerate() {
                if target <= *l || i + 1 == seg.len() {
                    let w = if *l > 0.0 { (target / l).min(1.0) } else { 0.0 };
                    return (pts[i].0 + w * (pts[i + 1].0 - pts[i].0), pts[i].1 + w * (pts[i + 1].1 - pts[i].1));
                }
                target -= l;
            }
            pts[pts.len() - 1]
        })
        .collect()
}

/// Length of a parametric curve from its velocity by composite Simpson
/// with `m` (even) panels.
pub fn simpson_length(speed: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / m as f64;
    let mut acc = speed(a) + speed(b);
    for i in 1..m {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * speed(a + i as f64 * h);
    }
    acc * h / 3.0
}

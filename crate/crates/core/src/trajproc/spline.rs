use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Solve `A x = b` for a symmetric positive definite pentadiagonal `A`
/// given by its diagonal and first two superdiagonals, using a banded
/// `L D L^T` factorisation.
pub fn solve_pentadiagonal_spd(diag: &[f64], off1: &[f64], off2: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let m = diag.len();
    if rhs.len() != m || off1.len() + 1 < m || off2.len() + 2 < m {
        return Err(Error::Domain("banded system dimensions disagree"));
    }
    // l1[j] = L[j][j-1], l2[j] = L[j][j-2]
    let mut d = vec![0.0; m];
    let mut l1 = vec![0.0; m];
    let mut l2 = vec![0.0; m];
    for j in 0..m {
        if j >= 2 {
            l2[j] = off2[j - 2] / d[j - 2];
        }
        if j >= 1 {
            let mut a = off1[j - 1];
            if j >= 2 {
                a -= l2[j] * l1[j - 1] * d[j - 2];
            }
            l1[j] = a / d[j - 1];
        }
        let mut dj = diag[j];
        if j >= 1 {
            dj -= l1[j] * l1[j] * d[j - 1];
        }
        if j >= 2 {
            dj -= l2[j] * l2[j] * d[j - 2];
        }
        if !(dj > 0.0) || !dj.is_finite() {
            return Err(Error::Domain("banded system is not positive definite"));
        }
        d[j] = dj;
    }
    let mut z = rhs.to_vec();
    for j in 0..m {
        if j >= 1 {
            z[j] -= l1[j] * z[j - 1];
        }
        if j >= 2 {
            z[j] -= l2[j] * z[j - 2];
        }
    }
    for j in 0..m {
        z[j] /= d[j];
    }
    for j in (0..m).rev() {
        if j + 1 < m {
            z[j] -= l1[j + 1] * z[j + 1];
        }
        if j + 2 < m {
            z[j] -= l2[j + 2] * z[j + 2];
        }
    }
    Ok(z)
}

/// Natural cubic spline stored as per-interval polynomials
/// `a + b t + c t^2 + d t^3`, `t = x - knots[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NaturalCubic {
    knots: Vec<f64>,
    coeffs: Vec<[f64; 4]>,
}

impl NaturalCubic {
    /// Minimiser over natural cubic splines of
    ///
    /// ```text
    /// lambda * sum_i (y_i - g(x_i))^2 + (1 - lambda) * integral g''(x)^2 dx
    /// ```
    ///
    /// `lambda` weights fidelity: `0` gives the least-squares line and `1`
    /// the interpolating spline.
    ///
    /// With `Q`, `R` the usual tridiagonal spline matrices and `h_i` the knot
    /// gaps, the fitted values and second derivatives are
    ///
    /// ```text
    /// (lambda R + (1 - lambda) Q^T Q) delta = Q^T y
    /// g = y - (1 - lambda) Q delta,   gamma = lambda delta
    /// ```
    ///
    /// which stays well-posed at both ends of the range. The pentadiagonal
    /// system is solved in `O(n)`.
    pub fn fit(xs: &[f64], ys: &[f64], lambda: f64) -> Result<Self> {
        let n = xs.len();
        if ys.len() != n {
            return Err(Error::Domain("abscissae and ordinates differ in length"));
        }
        if n < 2 {
            return Err(Error::Domain("need at least two points"));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::Domain("smoothing factor must lie in [0, 1]"));
        }
        if xs.iter().chain(ys).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("spline data"));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("abscissae must be strictly increasing"));
        }
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let m = n - 2;
        if m == 0 {
            return Ok(Self::from_knot_values(xs.to_vec(), ys.to_vec(), vec![0.0; n]));
        }
        // Column j of Q holds (a, b, c) at rows j, j+1, j+2.
        let cols: Vec<[f64; 3]> = (0..m)
            .map(|j| {
                let (hl, hr) = (h[j], h[j + 1]);
                [1.0 / hl, -1.0 / hl - 1.0 / hr, 1.0 / hr]
            })
            .collect();
        let mu = 1.0 - lambda;
        let mut diag = vec![0.0; m];
        let mut off1 = vec![0.0; m.saturating_sub(1)];
        let mut off2 = vec![0.0; m.saturating_sub(2)];
        let mut rhs = vec![0.0; m];
        for j in 0..m {
            let [a, b, c] = cols[j];
            diag[j] = lambda * (h[j] + h[j + 1]) / 3.0 + mu * (a * a + b * b + c * c);
            if j + 1 < m {
                let [a1, b1, _] = cols[j + 1];
                off1[j] = lambda * h[j + 1] / 6.0 + mu * (b * a1 + c * b1);
            }
            if j + 2 < m {
                off2[j] = mu * c * cols[j + 2][0];
            }
            rhs[j] = a * ys[j] + b * ys[j + 1] + c * ys[j + 2];
        }
        let delta = solve_pentadiagonal_spd(&diag, &off1, &off2, &rhs)?;
        let mut g = ys.to_vec();
        if mu != 0.0 {
            for (j, dj) in delta.iter().enumerate() {
                let [a, b, c] = cols[j];
                g[j] -= mu * a * dj;
                g[j + 1] -= mu * b * dj;
                g[j + 2] -= mu * c * dj;
            }
        }
        let mut gamma = vec![0.0; n];
        for (j, dj) in delta.iter().enumerate() {
            gamma[j + 1] = lambda * dj;
        }
        Ok(Self::from_knot_values(xs.to_vec(), g, gamma))
    }

    pub fn interpolate(xs: &[f64], ys: &[f64]) -> Result<Self> {
        Self::fit(xs, ys, 1.0)
    }

    /// Spline through `values` with second derivatives `second` at the knots.
    pub fn from_knot_values(knots: Vec<f64>, values: Vec<f64>, second: Vec<f64>) -> Self {
        let coeffs = knots
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let h = w[1] - w[0];
                let (g0, g1) = (values[i], values[i + 1]);
                let (m0, m1) = (second[i], second[i + 1]);
                [g0, (g1 - g0) / h - h * (2.0 * m0 + m1) / 6.0, 0.5 * m0, (m1 - m0) / (6.0 * h)]
            })
            .collect();
        let mut coeffs: Vec<[f64; 4]> = coeffs;
        // Keep the right end value exact for evaluation at the last knot.
        if coeffs.is_empty() {
            coeffs.push([values[0], 0.0, 0.0, 0.0]);
        }
        Self { knots, coeffs }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn coeffs(&self) -> &[[f64; 4]] {
        &self.coeffs
    }

    fn locate(&self, x: f64) -> usize {
        let last = self.coeffs.len() - 1;
        let i = self.knots.partition_point(|k| *k <= x);
        i.saturating_sub(1).min(last)
    }

    /// Value, first and second derivative at `x`. Natural splines continue
    /// linearly beyond the end knots.
    pub fn eval_all(&self, x: f64) -> (f64, f64, f64) {
        let first = self.knots[0];
        let last = *self.knots.last().unwrap();
        if x < first || x > last {
            let edge = if x < first { first } else { last };
            let (v, d, _) = self.eval_all(edge);
            return (v + d * (x - edge), d, 0.0);
        }
        let i = self.locate(x);
        let t = x - self.knots[i];
        let [a, b, c, d] = self.coeffs[i];
        (a + t * (b + t * (c + t * d)), b + t * (2.0 * c + 3.0 * t * d), 2.0 * c + 6.0 * t * d)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_all(x).0
    }

    pub fn deriv(&self, x: f64) -> f64 {
        self.eval_all(x).1
    }

    pub fn second_deriv(&self, x: f64) -> f64 {
        self.eval_all(x).2
    }

    pub fn values_at_knots(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.coeffs.iter().map(|c| c[0]).collect();
        v.push(self.eval(*self.knots.last().unwrap()));
        v.truncate(self.knots.len());
        v
    }

    pub fn second_derivs_at_knots(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.coeffs.iter().map(|c| 2.0 * c[2]).collect();
        if self.knots.len() > 1 {
            v.push(0.0);
        }
        v
    }

    /// `integral g''(x)^2 dx` over the knot range (exact: `g''` is piecewise linear).
    pub fn roughness(&self) -> f64 {
        let m = self.second_derivs_at_knots();
        self.knots
            .windows(2)
            .enumerate()
            .map(|(i, w)| (w[1] - w[0]) * (m[i] * m[i] + m[i] * m[i + 1] + m[i + 1] * m[i + 1]) / 3.0)
            .sum()
    }

    /// Sum of squared residuals at the knots.
    pub fn fidelity(&self, ys: &[f64]) -> f64 {
        self.values_at_knots().iter().zip(ys).map(|(g, y)| (y - g) * (y - g)).sum()
    }

    /// The penalised objective minimised by [`NaturalCubic::fit`].
    pub fn objective(&self, ys: &[f64], lambda: f64) -> f64 {
        lambda * self.fidelity(ys) + (1.0 - lambda) * self.roughness()
    }
}

//! Independent oracles shared by the integration tests: a dense
//! finite-difference discretization of the frozen-argument operator and a
//! fixed-step RK4 shooting evaluation of the characteristic function.

#![allow(dead_code)]

use std::f64::consts::PI;

use frozen_sl::Complex64 as C;

pub fn c(re: f64) -> C {
    C::new(re, 0.0)
}

pub fn rel(a: C, b: C) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

/// `−y″ + p y + q(x) y(a)` with `y^{(α)}(0) = y^{(β)}(π) = 0`, second-order
/// differences on `m` intervals. Neumann ends use a reflected ghost node; the
/// point value `y(a)` is cubic Lagrange interpolation from the four nearest nodes.
pub struct FdOperator {
    first: usize,
    lower: Vec<C>,
    diag: Vec<C>,
    upper: Vec<C>,
    q: Vec<C>,
    w: Vec<(usize, f64)>,
}

impl FdOperator {
    pub fn new(alpha: u8, beta: u8, a: f64, m: usize, p: &dyn Fn(f64) -> C, q: &dyn Fn(f64) -> C) -> Self {
        let h = PI / m as f64;
        let ih2 = 1.0 / (h * h);
        let first = if alpha == 1 { 0 } else { 1 };
        let last = if beta == 1 { m } else { m - 1 };
        let mut lower = Vec::new();
        let mut diag = Vec::new();
        let mut upper = Vec::new();
        let mut qv = Vec::new();
        for j in first..=last {
            let x = j as f64 * h;
            let (mut lo, mut up) = (c(-ih2), c(-ih2));
            if j == 0 {
                up = c(-2.0 * ih2);
            }
            if j == m {
                lo = c(-2.0 * ih2);
            }
            lower.push(lo);
            upper.push(up);
            diag.push(c(2.0 * ih2) + p(x));
            qv.push(q(x));
        }
        let base = ((a / h).floor() as i64 - 1).clamp(0, m as i64 - 3) as usize;
        let w = (base..base + 4)
            .map(|j| {
                let xj = j as f64 * h;
                let wt: f64 = (base..base + 4)
                    .filter(|&k| k != j)
                    .map(|k| (a - k as f64 * h) / (xj - k as f64 * h))
                    .product();
                (j, wt)
            })
            .filter(|&(j, _)| j >= first && j <= last)
            .map(|(j, wt)| (j - first, wt))
            .collect();
        Self {
            first,
            lower,
            diag,
            upper,
            q: qv,
            w,
        }
    }

    fn len(&self) -> usize {
        self.diag.len()
    }

    /// `(T − σ I)^{-1} b` for the tridiagonal part.
    fn tri_solve(&self, sigma: C, b: &[C]) -> Vec<C> {
        let n = self.len();
        let mut cp = vec![C::new(0.0, 0.0); n];
        let mut dp = vec![C::new(0.0, 0.0); n];
        let mut piv = self.diag[0] - sigma;
        cp[0] = self.upper[0] / piv;
        dp[0] = b[0] / piv;
        for i in 1..n {
            piv = self.diag[i] - sigma - self.lower[i] * cp[i - 1];
            cp[i] = self.upper[i] / piv;
            dp[i] = (b[i] - self.lower[i] * dp[i - 1]) / piv;
        }
        for i in (0..n - 1).rev() {
            let next = dp[i + 1];
            dp[i] -= cp[i] * next;
        }
        dp
    }

    fn dot_w(&self, x: &[C]) -> C {
        self.w.iter().map(|&(j, wt)| x[j] * wt).sum()
    }

    /// `(T + q wᵀ − σ I)^{-1} b` by Sherman–Morrison.
    fn solve(&self, sigma: C, b: &[C]) -> Vec<C> {
        let x = self.tri_solve(sigma, b);
        let z = self.tri_solve(sigma, &self.q);
        let f = self.dot_w(&x) / (C::new(1.0, 0.0) + self.dot_w(&z));
        x.iter().zip(&z).map(|(xi, zi)| xi - zi * f).collect()
    }

    /// Eigenvalue nearest `seed` by shifted inverse iteration with shift updates.
    pub fn eigenvalue_near(&self, seed: C) -> C {
        let n = self.len();
        let mut x: Vec<C> = (0..n).map(|i| C::new(1.0 + (i as f64 * 0.37).sin(), 0.3)).collect();
        let mut sigma = seed + C::new(1e-7, 1e-7) * (1.0 + seed.norm());
        let mut lambda = sigma;
        for it in 0..60 {
            let y = self.solve(sigma, &x);
            let num: C = x.iter().zip(&y).map(|(a, b)| b.conj() * a).sum();
            let den: C = y.iter().map(|b| b.norm_sqr()).sum::<f64>().into();
            let next = sigma + num / den;
            let norm = den.re.sqrt();
            x = y.iter().map(|v| v / norm).collect();
            let moved = (next - lambda).norm();
            lambda = next;
            if moved < 1e-13 * (1.0 + lambda.norm()) {
                break;
            }
            // keep the first few iterations at the seed shift to lock on the nearest eigenvalue
            if it >= 2 {
                sigma = lambda;
            }
        }
        lambda
    }
}

/// Eigenvalues near `seeds`, Richardson-extrapolated from `m` and `2m` intervals.
pub fn fd_eigenvalues(
    alpha: u8,
    beta: u8,
    a: f64,
    m: usize,
    p: &dyn Fn(f64) -> C,
    q: &dyn Fn(f64) -> C,
    seeds: &[C],
) -> Vec<C> {
    let coarse = FdOperator::new(alpha, beta, a, m, p, q);
    let fine = FdOperator::new(alpha, beta, a, 2 * m, p, q);
    seeds
        .iter()
        .map(|&s| {
            let lc = coarse.eigenvalue_near(s);
            let lf = fine.eigenvalue_near(lc);
            (lf * 4.0 - lc) / 3.0
        })
        .collect()
}

/// Classical RK4 for `y″ = (p − λ) y + f` from `x0` to `x1`, returning `(y, y′)`.
fn rk4(p: &dyn Fn(f64) -> C, f: &dyn Fn(f64) -> C, lambda: C, x0: f64, x1: f64, y: (C, C), steps: usize) -> (C, C) {
    let h = (x1 - x0) / steps as f64;
    let rhs = |x: f64, (u, du): (C, C)| (du, (p(x) - lambda) * u + f(x));
    let (mut u, mut du) = y;
    for k in 0..steps {
        let x = x0 + k as f64 * h;
        let k1 = rhs(x, (u, du));
        let k2 = rhs(x + h / 2.0, (u + k1.0 * (h / 2.0), du + k1.1 * (h / 2.0)));
        let k3 = rhs(x + h / 2.0, (u + k2.0 * (h / 2.0), du + k2.1 * (h / 2.0)));
        let k4 = rhs(x + h, (u + k3.0 * h, du + k3.1 * h));
        u += (k1.0 + k2.0 * 2.0 + k3.0 * 2.0 + k4.0) * (h / 6.0);
        du += (k1.1 + k2.1 * 2.0 + k3.1 * 2.0 + k4.1) * (h / 6.0);
    }
    (u, du)
}

/// Solution of `−y″ + p y = λ y` with data `y0` at `x0`, evaluated at `x1`.
pub fn rk4_solution(p: &dyn Fn(f64) -> C, lambda: C, x0: f64, x1: f64, y0: (C, C), steps: usize) -> (C, C) {
    rk4(p, &|_| C::new(0.0, 0.0), lambda, x0, x1, y0, steps)
}

/// `Δ(λ)` by shooting: with `u` the homogeneous solution satisfying the left
/// condition and `v″ = (p − λ) v + q`, `v(0) = v′(0) = 0`,
/// `Δ = u^{(β)}(π)(1 − v(a)) + u(a) v^{(β)}(π)`.
pub fn rk4_delta(
    alpha: u8,
    beta: u8,
    a: f64,
    p: &dyn Fn(f64) -> C,
    q: &dyn Fn(f64) -> C,
    lambda: C,
    steps: usize,
) -> C {
    let u0 = if alpha == 0 { (c(0.0), c(1.0)) } else { (c(-1.0), c(0.0)) };
    let zero = (c(0.0), c(0.0));
    let left = ((steps as f64 * a / PI).ceil() as usize).max(1);
    let right = (steps - left.min(steps)).max(1);
    let ua = rk4(p, &|_| c(0.0), lambda, 0.0, a, u0, left);
    let va = rk4(p, q, lambda, 0.0, a, zero, left);
    let upi = rk4(p, &|_| c(0.0), lambda, a, PI, ua, right);
    let vpi = rk4(p, q, lambda, a, PI, va, right);
    let pick = |s: (C, C)| if beta == 0 { s.0 } else { s.1 };
    pick(upi) * (c(1.0) - va.0) + ua.0 * pick(vpi)
}

/// The three principal potentials of the test matrix.
pub type Potential = fn(f64) -> C;

pub fn p_matrix() -> Vec<(&'static str, Potential)> {
    vec![
        ("zero", |_| c(0.0)),
        ("exp", |t| C::from_polar(10.0, t)),
        ("parabola", |t| c(t * (PI - t))),
    ]
}

pub const BOUNDARY_PAIRS: [(u8, u8); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

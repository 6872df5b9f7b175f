//! Solutions `S_a`, `C_a` of `−y″ + p y = λ y` launched at the frozen point,
//! together with their λ-derivative chains.
//!
//! The ν-th Taylor coefficient `z_ν = ∂_λ^ν y / ν!` solves
//! `z_ν″ = (p − λ) z_ν − z_{ν−1}` with zero data at the launch point, so the
//! whole chain is integrated as one first-order complex system with an
//! embedded Dormand–Prince 5(4) pair. Integration stops at every grid node,
//! which keeps each step inside one piece of the cubic interpolant of `p`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::function_space::{CubicInterp, Grid, ProblemConfig};
use crate::jet::Jet;

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-11,
            atol: 1e-13,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solution {
    S,
    C,
}

/// Values of `S_a`, `C_a`, their x-derivatives and λ-derivatives at one point.
#[derive(Debug, Clone)]
pub struct SolutionJet {
    pub x: f64,
    pub lambda: C,
    pub order: usize,
    s: Jet,
    ds: Jet,
    c: Jet,
    dc: Jet,
}

impl SolutionJet {
    fn from_state(x: f64, lambda: C, order: usize, y: &[C]) -> Self {
        let m = order + 1;
        let take = |b: usize| Jet(y[b * m..(b + 1) * m].to_vec());
        Self {
            x,
            lambda,
            order,
            s: take(0),
            ds: take(1),
            c: take(2),
            dc: take(3),
        }
    }

    /// Raw derivative `∂_λ^ν ∂_x^{x_derivative}` of the chosen solution.
    pub fn get(&self, which: Solution, x_derivative: u8, nu: usize) -> C {
        self.jet(which, x_derivative).derivative(nu)
    }

    /// Taylor jet in λ of `y^{(x_derivative)}(x, ·)`.
    pub fn jet(&self, which: Solution, x_derivative: u8) -> &Jet {
        match (which, x_derivative) {
            (Solution::S, 0) => &self.s,
            (Solution::S, _) => &self.ds,
            (Solution::C, 0) => &self.c,
            (Solution::C, _) => &self.dc,
        }
    }

    /// `C·S′ − C′·S`, identically 1.
    pub fn wronskian(&self) -> C {
        self.c.value() * self.ds.value() - self.dc.value() * self.s.value()
    }
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Chain<'a> {
    interp: &'a CubicInterp,
    lambda: C,
    m: usize,
}

impl Chain<'_> {
    #[inline]
    fn rhs(&self, piece: usize, x: f64, y: &[C], dy: &mut [C]) {
        let q = self.interp.eval_in(piece, x) - self.lambda;
        let m = self.m;
        for b in [0, 2] {
            let (val, der) = (b * m, (b + 1) * m);
            for nu in 0..m {
                dy[val + nu] = y[der + nu];
                let lower = if nu > 0 { y[val + nu - 1] } else { C::new(0.0, 0.0) };
                dy[der + nu] = q * y[val + nu] - lower;
            }
        }
    }
}

struct Stepper {
    k: [Vec<C>; 7],
    tmp: Vec<C>,
    ynew: Vec<C>,
    h: f64,
    /// Abscissa at which `k[0]` holds the derivative of the current state.
    k1_at: Option<f64>,
    opts: IntegratorOptions,
}

impl Stepper {
    fn new(dim: usize, opts: IntegratorOptions) -> Self {
        let z = vec![C::new(0.0, 0.0); dim];
        Self {
            k: std::array::from_fn(|_| z.clone()),
            tmp: z.clone(),
            ynew: z,
            h: 0.0,
            k1_at: None,
            opts,
        }
    }

    /// Advances `y` from `x0` to `x1` with `p` taken from interpolation piece `piece`.
    fn advance(&mut self, sys: &Chain, piece: usize, x0: f64, x1: f64, y: &mut [C]) -> Result<()> {
        let span = x1 - x0;
        if span == 0.0 {
            return Ok(());
        }
        let dir = span.signum();
        let mut x = x0;
        let mut h = if self.h > 0.0 { self.h.min(span.abs()) } else { span.abs() };
        let dim = y.len();
        let mut worst = 0.0f64;
        let mut steps = 0usize;
        if self.k1_at != Some(x0) {
            sys.rhs(piece, x, y, &mut self.k[0]);
        }
        loop {
            let remaining = (x1 - x) * dir;
            if remaining <= 1e-15 * (1.0 + x1.abs()) {
                break;
            }
            let h_full = h;
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            let hs = h * dir;
            let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
            let tmp = &mut self.tmp;
            for i in 0..dim {
                tmp[i] = y[i] + k1[i] * (hs * A21);
            }
            sys.rhs(piece, x + C2 * hs, tmp, k2);
            for i in 0..dim {
                tmp[i] = y[i] + (k1[i] * A31 + k2[i] * A32) * hs;
            }
            sys.rhs(piece, x + C3 * hs, tmp, k3);
            for i in 0..dim {
                tmp[i] = y[i] + (k1[i] * A41 + k2[i] * A42 + k3[i] * A43) * hs;
            }
            sys.rhs(piece, x + C4 * hs, tmp, k4);
            for i in 0..dim {
                tmp[i] = y[i] + (k1[i] * A51 + k2[i] * A52 + k3[i] * A53 + k4[i] * A54) * hs;
            }
            sys.rhs(piece, x + C5 * hs, tmp, k5);
            for i in 0..dim {
                tmp[i] = y[i]
                    + (k1[i] * A61 + k2[i] * A62 + k3[i] * A63 + k4[i] * A64 + k5[i] * A65) * hs;
            }
            sys.rhs(piece, x + hs, tmp, k6);
            let ynew = &mut self.ynew;
            for i in 0..dim {
                ynew[i] = y[i]
                    + (k1[i] * B1 + k3[i] * B3 + k4[i] * B4 + k5[i] * B5 + k6[i] * B6) * hs;
            }
            sys.rhs(piece, x + hs, ynew, k7);
            let mut err = 0.0f64;
            for i in 0..dim {
                let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6
                    + k7[i] * E7)
                    * hs;
                let sc = self.opts.atol + self.opts.rtol * y[i].l1_norm().max(ynew[i].l1_norm());
                err = err.max(e.l1_norm() / sc);
            }
            steps += 1;
            if !err.is_finite() {
                return Err(Error::Integrator { x, worst_error: err });
            }
            worst = worst.max(err);
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                x = if last { x1 } else { x + hs };
                y.copy_from_slice(ynew);
                std::mem::swap(k1, k7);
                self.k1_at = Some(x);
                self.h = if last { h_full.max(h * fac) } else { h * fac };
                h = self.h;
            } else {
                h *= fac.min(1.0);
                if h < 1e-14 * (1.0 + x.abs()) || steps > 5_000_000 {
                    return Err(Error::Integrator { x, worst_error: worst });
                }
            }
        }
        Ok(())
    }
}

/// Initial state at the launch point: `S = 0, S′ = 1, C = 1, C′ = 0`.
fn initial_state(m: usize) -> Vec<C> {
    let mut y = vec![C::new(0.0, 0.0); 4 * m];
    y[m] = C::new(1.0, 0.0);
    y[2 * m] = C::new(1.0, 0.0);
    y
}

/// Integrates from `launch` through all grid nodes and the requested stops,
/// returning the state at every stop (in the order given).
fn sweep(
    grid: &Grid,
    interp: &CubicInterp,
    lambda: C,
    order: usize,
    launch: f64,
    stops: &[f64],
    opts: IntegratorOptions,
) -> Result<Vec<Vec<C>>> {
    let m = order + 1;
    let sys = Chain { interp, lambda, m };
    let y0 = initial_state(m);
    let mut out: Vec<Option<Vec<C>>> = vec![None; stops.len()];
    for (i, &s) in stops.iter().enumerate() {
        if s == launch {
            out[i] = Some(y0.clone());
        }
    }
    for dir in [1.0f64, -1.0] {
        // waypoints strictly beyond the launch in this direction, tagged with stop indices
        let mut pts: Vec<(f64, Option<usize>)> = grid
            .nodes()
            .iter()
            .filter(|&&x| (x - launch) * dir > 0.0)
            .map(|&x| (x, None))
            .collect();
        for (i, &s) in stops.iter().enumerate() {
            if (s - launch) * dir > 0.0 {
                pts.push((s, Some(i)));
            }
        }
        if pts.iter().all(|p| p.1.is_none()) {
            continue;
        }
        pts.sort_by(|u, v| ((u.0 - v.0) * dir).partial_cmp(&0.0).unwrap());
        let last_needed = pts.iter().rposition(|p| p.1.is_some()).unwrap();
        pts.truncate(last_needed + 1);
        let mut stepper = Stepper::new(4 * m, opts);
        let mut y = y0.clone();
        let mut x = launch;
        for (xn, tag) in pts {
            if xn != x {
                let piece = grid.interval_of(0.5 * (x + xn));
                stepper.advance(&sys, piece, x, xn, &mut y)?;
                x = xn;
            }
            if let Some(i) = tag {
                out[i] = Some(y.clone());
            }
        }
    }
    Ok(out.into_iter().map(|s| s.expect("every stop visited")).collect())
}

/// Jets of `S_a`, `C_a` at each target point.
pub fn solve_jet(
    cfg: &ProblemConfig,
    lambda: C,
    x_targets: &[f64],
    order: usize,
) -> Result<Vec<SolutionJet>> {
    solve_jet_from(cfg, cfg.a(), lambda, x_targets, order, IntegratorOptions::default())
}

/// As [`solve_jet`], launched at an arbitrary point of `[0, π]`.
pub fn solve_jet_from(
    cfg: &ProblemConfig,
    launch: f64,
    lambda: C,
    x_targets: &[f64],
    order: usize,
    opts: IntegratorOptions,
) -> Result<Vec<SolutionJet>> {
    let pi = std::f64::consts::PI;
    if x_targets.iter().any(|x| !(0.0..=pi).contains(x)) || !(0.0..=pi).contains(&launch) {
        return Err(Error::Structural("target outside [0, π]".into()));
    }
    let states = sweep(cfg.grid(), cfg.p_interp(), lambda, order, launch, x_targets, opts)?;
    Ok(x_targets
        .iter()
        .zip(states)
        .map(|(&x, y)| SolutionJet::from_state(x, lambda, order, &y))
        .collect())
}

/// Endpoint jets `(x = 0, x = π)` for the solutions launched at `a`.
pub fn endpoint_jets(
    cfg: &ProblemConfig,
    lambda: C,
    order: usize,
    opts: IntegratorOptions,
) -> Result<(SolutionJet, SolutionJet)> {
    let mut v = solve_jet_from(cfg, cfg.a(), lambda, &[0.0, std::f64::consts::PI], order, opts)?;
    let right = v.pop().unwrap();
    let left = v.pop().unwrap();
    Ok((left, right))
}

/// `Δ_0 = C_a^{(α)}(0) S_a^{(β)}(π) − S_a^{(α)}(0) C_a^{(β)}(π)` from endpoint jets.
pub fn delta0_from_endpoints(
    alpha: u8,
    beta: u8,
    left: &SolutionJet,
    right: &SolutionJet,
) -> Jet {
    let c_left = left.jet(Solution::C, alpha);
    let s_left = left.jet(Solution::S, alpha);
    let c_right = right.jet(Solution::C, beta);
    let s_right = right.jet(Solution::S, beta);
    &(c_left * s_right) - &(s_left * c_right)
}

/// Taylor jet of `Δ_0` at `λ`, read off as `g^{(β)}(π)` where `g` is the
/// solution launched at 0 (`S_0` for α = 0, `−C_0` for α = 1).
pub fn delta0_jet(
    cfg: &ProblemConfig,
    lambda: C,
    order: usize,
    opts: IntegratorOptions,
) -> Result<Jet> {
    let end = solve_jet_from(cfg, 0.0, lambda, &[std::f64::consts::PI], order, opts)?;
    Ok(match cfg.alpha() {
        0 => end[0].jet(Solution::S, cfg.beta()).clone(),
        _ => -end[0].jet(Solution::C, cfg.beta()),
    })
}

/// `[Δ_0(λ), Δ_0′(λ), …, Δ_0^{(order)}(λ)]`.
pub fn delta0(cfg: &ProblemConfig, lambda: C, order: usize) -> Result<Vec<C>> {
    Ok(delta0_jet(cfg, lambda, order, IntegratorOptions::default())?.derivatives())
}

/// Jets of `S`, `C` (values only) at a run of grid nodes, plus full jets at
/// the first and last node of the run.
#[derive(Debug, Clone)]
pub struct GridJets {
    pub lambda: C,
    pub order: usize,
    m: usize,
    first: usize,
    s: Vec<C>,
    c: Vec<C>,
    pub left: SolutionJet,
    pub right: SolutionJet,
}

impl GridJets {
    /// Taylor coefficient `ν` of `S(t_i, ·)`.
    #[inline]
    pub fn s(&self, node: usize, nu: usize) -> C {
        self.s[(node - self.first) * self.m + nu]
    }

    #[inline]
    pub fn c(&self, node: usize, nu: usize) -> C {
        self.c[(node - self.first) * self.m + nu]
    }

    /// Taylor jet of `S(t_i, ·)` or `C(t_i, ·)`.
    pub fn jet_at(&self, which: Solution, node: usize) -> Jet {
        let src = match which {
            Solution::S => &self.s,
            Solution::C => &self.c,
        };
        let i = node - self.first;
        Jet(src[i * self.m..(i + 1) * self.m].to_vec())
    }
}

/// Solutions launched at `launch`, sampled at every node of the working grid.
pub fn grid_jets(
    cfg: &ProblemConfig,
    launch: f64,
    lambda: C,
    order: usize,
    opts: IntegratorOptions,
) -> Result<GridJets> {
    grid_jets_on(cfg, launch, lambda, order, 0..cfg.grid().len(), opts)
}

/// As [`grid_jets`], restricted to the nodes with indices in `nodes`.
pub fn grid_jets_on(
    cfg: &ProblemConfig,
    launch: f64,
    lambda: C,
    order: usize,
    nodes: std::ops::Range<usize>,
    opts: IntegratorOptions,
) -> Result<GridJets> {
    let grid = cfg.grid();
    let xs = &grid.nodes()[nodes.clone()];
    if xs.is_empty() {
        return Err(Error::Structural("empty node range".into()));
    }
    let states = sweep(grid, cfg.p_interp(), lambda, order, launch, xs, opts)?;
    let m = order + 1;
    let mut s = Vec::with_capacity(xs.len() * m);
    let mut c = Vec::with_capacity(xs.len() * m);
    for y in &states {
        s.extend_from_slice(&y[0..m]);
        c.extend_from_slice(&y[2 * m..3 * m]);
    }
    let left = SolutionJet::from_state(xs[0], lambda, order, &states[0]);
    let right = SolutionJet::from_state(xs[xs.len() - 1], lambda, order, &states[xs.len() - 1]);
    Ok(GridJets {
        lambda,
        order,
        m,
        first: nodes.start,
        s,
        c,
        left,
        right,
    })
}

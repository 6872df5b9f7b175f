//! Known objects of the unperturbed problem: the coefficients `a_n`, `b_n`,
//! the functions `g_n`, the degeneracy counts and the biorthogonal synthesis.

use std::f64::consts::PI;

use log::warn;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::contour::{self, Analytic};
use crate::error::{Error, Result};
use crate::function_space::{pair, GridFunction, ProblemConfig};
use crate::jet::Jet;
use crate::ode_core::{grid_jets, solve_jet_from, Solution};
use crate::par::*;
use crate::unperturbed::UnperturbedSpectralData;

type C = Complex64;

/// Multiplicity of `μ_n` as a zero of `S_a^{(β)}(π, ·)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroOrder {
    Finite(usize),
    /// `S_a^{(β)}(π, ·)` vanishes identically (`β = 0`, `a = π`).
    Infinite,
}

impl ZeroOrder {
    pub fn min_with(self, m: usize) -> usize {
        match self {
            ZeroOrder::Finite(r) => r.min(m),
            ZeroOrder::Infinite => m,
        }
    }
}

impl Serialize for ZeroOrder {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ZeroOrder::Finite(r) => s.serialize_u64(*r as u64),
            ZeroOrder::Infinite => s.serialize_str("inf"),
        }
    }
}

/// Per-chain data for a head `n ∈ S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainInfo {
    pub n: usize,
    pub m: usize,
    pub r: ZeroOrder,
    pub k: usize,
    pub p: usize,
}

#[derive(Debug, Clone)]
pub struct BasisSystem {
    unp: UnperturbedSpectralData,
    a: Vec<C>,
    b: Vec<C>,
    g: Vec<GridFunction>,
    chains: Vec<ChainInfo>,
    omega_set: Vec<usize>,
    gram: DMatrix<C>,
    gram_cond: f64,
}

impl BasisSystem {
    pub fn unperturbed(&self) -> &UnperturbedSpectralData {
        &self.unp
    }

    pub fn config(&self) -> &ProblemConfig {
        self.unp.config()
    }

    pub fn count(&self) -> usize {
        self.a.len()
    }

    pub fn a_coeff(&self) -> &[C] {
        &self.a
    }

    pub fn b_coeff(&self) -> &[C] {
        &self.b
    }

    /// `a_j`, 1-based.
    pub fn a_at(&self, j: usize) -> C {
        self.a[j - 1]
    }

    pub fn b_at(&self, j: usize) -> C {
        self.b[j - 1]
    }

    pub fn g_funcs(&self) -> &[GridFunction] {
        &self.g
    }

    /// `g_j`, 1-based.
    pub fn g_at(&self, j: usize) -> &GridFunction {
        &self.g[j - 1]
    }

    /// Chain data for every `n ∈ S`, in increasing `n`.
    pub fn chains(&self) -> &[ChainInfo] {
        &self.chains
    }

    pub fn chain(&self, n: usize) -> Option<&ChainInfo> {
        self.chains.iter().find(|c| c.n == n)
    }

    /// `Ω ∩ {1..N}`, increasing.
    pub fn omega_set(&self) -> &[usize] {
        &self.omega_set
    }

    pub fn in_omega(&self, j: usize) -> bool {
        self.omega_set.binary_search(&j).is_ok()
    }

    pub fn gram(&self) -> &DMatrix<C> {
        &self.gram
    }

    pub fn gram_condition(&self) -> f64 {
        self.gram_cond
    }

    /// Rows `{n, a_n, b_n, in_omega, r_n, k_n}`.
    pub fn diagnostics(&self) -> Vec<BasisRow> {
        (1..=self.count())
            .map(|j| {
                let head = self.unp.head_of(j);
                let ch = self.chain(head).expect("every index has a chain head");
                BasisRow {
                    n: j,
                    a_n: self.a_at(j),
                    b_n: self.b_at(j),
                    in_omega: self.in_omega(j),
                    r_n: ch.r,
                    k_n: ch.k,
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BasisRow {
    pub n: usize,
    pub a_n: C,
    pub b_n: C,
    pub in_omega: bool,
    pub r_n: ZeroOrder,
    pub k_n: usize,
}

struct ChainBuild {
    info: ChainInfo,
    a: Vec<C>,
    g: Vec<GridFunction>,
}

fn endpoint_s_beta(cfg: &ProblemConfig, lambda: C, order: usize, unp: &UnperturbedSpectralData) -> Result<Jet> {
    let right = solve_jet_from(cfg, cfg.a(), lambda, &[PI], order, unp.tolerances().integrator())?;
    Ok(right[0].jet(Solution::S, cfg.beta()).clone())
}

/// Order of `μ` as a zero of `S_a^{(β)}(π, ·)` by a winding number on a circle
/// of the snap radius, scaled by `scale`.
fn zero_order(cfg: &ProblemConfig, unp: &UnperturbedSpectralData, mu: C, nearest: f64, scale: f64) -> Result<ZeroOrder> {
    if cfg.beta() == 0 && cfg.a() == PI {
        return Ok(ZeroOrder::Infinite);
    }
    let f = |z: C| -> Result<(C, C)> {
        let j = endpoint_s_beta(cfg, z, 1, unp)?;
        Ok((j.value(), j.derivative(1)))
    };
    let r = zero_order_radius(unp, mu, nearest) * scale;
    let count = contour::winding_number(&f as &dyn Analytic, mu, r, unp.tolerances().winding_nodes)?;
    Ok(ZeroOrder::Finite(count))
}

/// Zeros of `S_a^{(β)}(π, ·)` closer to `μ` than this coincide with it.
fn zero_order_radius(unp: &UnperturbedSpectralData, mu: C, nearest: f64) -> f64 {
    let snap = unp.tolerances().snap * (1.0 + mu.norm());
    contour::local_radius(mu, nearest).min(snap)
}

pub fn build_basis(unp: &UnperturbedSpectralData) -> Result<BasisSystem> {
    let cfg = unp.config();
    let big_n = unp.count();
    let heads = unp.distinct_index_set().to_vec();
    let alpha = cfg.alpha();
    let integ = unp.tolerances().integrator();
    let distinct_mu: Vec<C> = heads.iter().map(|&n| unp.mu_at(n)).collect();

    let built: Vec<ChainBuild> = heads
        .par_iter()
        .enumerate()
        .map(|(h, &n)| -> Result<ChainBuild> {
            let m = unp.mult_at(n);
            let mu = unp.mu_at(n);
            let len = m.min(big_n + 1 - n);
            let nearest = distinct_mu
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != h)
                .map(|(_, v)| (v - mu).norm())
                .fold(f64::INFINITY, f64::min);

            let nf = n as f64;
            let s_beta = endpoint_s_beta(cfg, mu, m - 1, unp)?;
            let a: Vec<C> = (0..len)
                .map(|nu| s_beta.coeff(nu) * nf.powi(1 - cfg.beta() as i32))
                .collect();

            let jets = grid_jets(cfg, 0.0, mu, m - 1, integ)?;
            let scale = nf.powi(1 - alpha as i32);
            let g: Vec<GridFunction> = (0..len)
                .map(|nu| {
                    let d = m - nu - 1;
                    let vals: Vec<C> = (0..cfg.grid().len())
                        .map(|i| {
                            if alpha == 0 {
                                jets.s(i, d) * scale
                            } else {
                                -jets.c(i, d) * scale
                            }
                        })
                        .collect();
                    GridFunction::new(cfg.grid().clone(), vals)
                })
                .collect::<Result<Vec<_>>>()?;

            let r = zero_order(cfg, unp, mu, nearest, 1.0)?;
            let k = r.min_with(m);
            Ok(ChainBuild {
                info: ChainInfo {
                    n,
                    m,
                    r,
                    k,
                    p: k.max(1),
                },
                a,
                g,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut a = Vec::with_capacity(big_n);
    let mut g = Vec::with_capacity(big_n);
    let mut chains = Vec::with_capacity(built.len());
    for cb in built {
        a.extend(cb.a);
        g.extend(cb.g);
        chains.push(cb.info);
    }

    let amax = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let tol_zero = unp.tolerances().tol_zero;
    // where the head value and the contour disagree, the count must not depend on the radius
    for (h, ch) in chains.iter().enumerate() {
        let ZeroOrder::Finite(r) = ch.r else { continue };
        if (r > 0) == (a[ch.n - 1].norm() <= tol_zero * amax) {
            continue;
        }
        let mu = unp.mu_at(ch.n);
        let nearest = distinct_mu
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != h)
            .map(|(_, v)| (v - mu).norm())
            .fold(f64::INFINITY, f64::min);
        for scale in [0.25, 2.0] {
            if zero_order(cfg, unp, mu, nearest, scale)? != ch.r {
                return Err(Error::IllConditionedContour {
                    center: mu,
                    radius: zero_order_radius(unp, mu, nearest),
                });
            }
        }
    }
    let mut b = vec![C::new(0.0, 0.0); big_n];
    let mut omega_set = Vec::new();
    for ch in &chains {
        for nu in 0..ch.m {
            let j = ch.n + nu;
            if j > big_n {
                break;
            }
            let value_zero = a[j - 1].norm() <= tol_zero * amax;
            if nu < ch.k {
                omega_set.push(j);
                if !value_zero {
                    warn!("a_{j} = {} is not small although the contour places {j} in Ω", a[j - 1]);
                }
            } else if value_zero && nu < ch.p {
                warn!("a_{j} = {} is numerically zero but the contour count gives r_n = 0", a[j - 1]);
            }
            b[j - 1] = if nu < ch.k {
                C::new(0.0, 0.0)
            } else if nu < ch.p {
                a[j - 1]
            } else {
                C::new(1.0, 0.0)
            };
        }
    }

    let gram = gram_matrix(&g)?;
    let gram_cond = condition_number(&gram);
    if gram_cond > 1e8 {
        warn!("Gram matrix condition number {gram_cond:e} exceeds 1e8");
    }

    Ok(BasisSystem {
        unp: unp.clone(),
        a,
        b,
        g,
        chains,
        omega_set,
        gram,
        gram_cond,
    })
}

fn gram_matrix(g: &[GridFunction]) -> Result<DMatrix<C>> {
    let n = g.len();
    let rows: Vec<Vec<C>> = (0..n)
        .into_par_iter()
        .map(|i| (0..=i).map(|k| pair(&g[i], &g[k])).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let mut m = DMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        for (k, v) in row.iter().enumerate() {
            m[(i, k)] = *v;
            m[(k, i)] = *v;
        }
    }
    Ok(m)
}

fn condition_number(m: &DMatrix<C>) -> f64 {
    if m.is_empty() {
        return 1.0;
    }
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Residual of `∂^ν[C_a^{(α)}(0)S_a^{(β)}(π)] = ∂^ν[S_a^{(α)}(0)C_a^{(β)}(π)]` at `μ_n`.
pub fn det_relation_residual(unp: &UnperturbedSpectralData, n: usize, nu: usize) -> Result<f64> {
    let cfg = unp.config();
    let mu = unp.mu_at(n);
    let integ = unp.tolerances().integrator();
    let v = solve_jet_from(cfg, cfg.a(), mu, &[0.0, PI], nu, integ)?;
    let (l, r) = (&v[0], &v[1]);
    let lhs = l.jet(Solution::C, cfg.alpha()) * r.jet(Solution::S, cfg.beta());
    let rhs = l.jet(Solution::S, cfg.alpha()) * r.jet(Solution::C, cfg.beta());
    Ok((lhs.derivative(nu) - rhs.derivative(nu)).norm())
}

/// `q_N = Σ c_k g_k` with `G c = ξ`, so that `pair(g_m, q_N) = ξ_m` for `m ≤ N`.
pub fn synthesize_from_coefficients(basis: &BasisSystem, xi: &[C]) -> Result<GridFunction> {
    let n = basis.count();
    if xi.len() != n {
        return Err(Error::Structural(format!(
            "expected {n} coefficients, got {}",
            xi.len()
        )));
    }
    let grid = basis.config().grid().clone();
    if n == 0 {
        return Ok(GridFunction::zeros(grid));
    }
    let rhs = nalgebra::DVector::from_column_slice(xi);
    let c = basis
        .gram
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::BasisDegeneracy("Gram matrix is singular".into()))?;
    let mut values = vec![C::new(0.0, 0.0); grid.len()];
    for (ck, gk) in c.iter().zip(&basis.g) {
        for (v, x) in values.iter_mut().zip(gk.values()) {
            *v += ck * x;
        }
    }
    GridFunction::new(grid, values)
}

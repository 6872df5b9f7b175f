//! Characteristic function of the frozen-argument problem, its spectrum and
//! the coefficients `ξ_k = ∫ g_k q`.

use std::f64::consts::PI;

use log::warn;
use num_complex::Complex64;
use serde::Serialize;

use crate::basis_system::BasisSystem;
use crate::contour::{self, Analytic, Cluster};
use crate::error::{Error, Result};
use crate::function_space::{pair, GridFunction, ProblemConfig};
use crate::jet::{factorial, Jet};
use crate::ode_core::{grid_jets, grid_jets_on, IntegratorOptions, Solution};
use crate::par::*;
use crate::tolerances::Tolerances;

type C = Complex64;

fn check_grid(cfg: &ProblemConfig, q: &GridFunction) -> Result<()> {
    if q.grid().as_ref() != cfg.grid().as_ref() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

fn weighted_sum(jets: impl Fn(usize, usize) -> C, w: &[f64], offset: usize, q: &[C], m: usize) -> Jet {
    let mut out = Jet::zero(m - 1);
    for (i, wi) in w.iter().enumerate() {
        let node = offset + i;
        let wq = q[node] * *wi;
        for nu in 0..m {
            out.0[nu] += jets(node, nu) * wq;
        }
    }
    out
}

/// Taylor jet of `Δ` at `λ` up to `order`.
///
/// With `g = −W^{(α)}(0, ·)` launched at 0 and `h = W^{(β)}(π, ·)` launched at π,
/// `Δ = g^{(β)}(π) + h(a) ∫_0^a g q + g(a) ∫_a^π h q`. Every factor is a solution
/// evaluated directly, so nothing cancels when `|Im ρ|` is large.
pub fn delta_jet(
    cfg: &ProblemConfig,
    q: &GridFunction,
    lambda: C,
    order: usize,
    opts: IntegratorOptions,
) -> Result<Jet> {
    check_grid(cfg, q)?;
    let grid = cfg.grid();
    let split = grid.split();
    let n = grid.len();
    let m = order + 1;
    let qv = q.values();
    let (alpha, beta) = (cfg.alpha(), cfg.beta());

    let from0 = grid_jets(cfg, 0.0, lambda, order, opts)?;
    let from_pi = grid_jets_on(cfg, PI, lambda, order, split..n, opts)?;

    // g = S_0 or −C_0, h = −S_π or C_π
    let g_sign = if alpha == 0 { 1.0 } else { -1.0 };
    let h_sign = if beta == 0 { -1.0 } else { 1.0 };
    let g = |i: usize, nu: usize| g_sign * if alpha == 0 { from0.s(i, nu) } else { from0.c(i, nu) };
    let h = |i: usize, nu: usize| h_sign * if beta == 0 { from_pi.s(i, nu) } else { from_pi.c(i, nu) };

    let d0 = match alpha {
        0 => from0.right.jet(Solution::S, beta).clone(),
        _ => -from0.right.jet(Solution::C, beta),
    };
    let g_a = Jet((0..m).map(|nu| g(split, nu)).collect());
    let h_a = Jet((0..m).map(|nu| h(split, nu)).collect());
    let gq = weighted_sum(g, grid.left_weights(), 0, qv, m);
    let hq = weighted_sum(h, grid.right_weights(), split, qv, m);
    Ok(&(&d0 + &(&h_a * &gq)) + &(&g_a * &hq))
}

pub fn delta(cfg: &ProblemConfig, q: &GridFunction, lambda: C) -> Result<C> {
    Ok(delta_jet(cfg, q, lambda, 0, IntegratorOptions::default())?.value())
}

fn delta_fn<'a>(cfg: &'a ProblemConfig, q: &'a GridFunction, opts: IntegratorOptions) -> impl Analytic + 'a {
    move |z: C| {
        let j = delta_jet(cfg, q, z, 1, opts)?;
        Ok((j.value(), j.derivative(1)))
    }
}

/// `λ_1..λ_N` numbered by the chain convention.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralSequence {
    pub lambda: Vec<C>,
    pub rho: Vec<C>,
    /// Runs of equal values as `(first index, length)`, 1-based.
    pub clusters: Vec<(usize, usize)>,
}

impl SpectralSequence {
    pub fn from_values(lambda: Vec<C>) -> Self {
        let rho = lambda.iter().map(|l| contour::sqrt_branch(*l)).collect();
        let mut clusters: Vec<(usize, usize)> = Vec::new();
        for (i, v) in lambda.iter().enumerate() {
            match clusters.last_mut() {
                Some((start, len)) if lambda[*start - 1] == *v => *len += 1,
                _ => clusters.push((i + 1, 1)),
            }
        }
        Self {
            lambda,
            rho,
            clusters,
        }
    }

    pub fn count(&self) -> usize {
        self.lambda.len()
    }

    /// `λ_n`, 1-based.
    pub fn at(&self, n: usize) -> C {
        self.lambda[n - 1]
    }

    /// Spectrum-file markers: run length at the first index of a run, 0 after.
    pub fn markers(&self) -> Vec<usize> {
        let mut out = vec![0; self.count()];
        for &(start, len) in &self.clusters {
            out[start - 1] = len;
        }
        out
    }
}

/// Spectrum of `(cfg, q)` with `N` terms; builds the unperturbed data internally.
pub fn spectrum(cfg: &ProblemConfig, q: &GridFunction, n: usize) -> Result<SpectralSequence> {
    let unp = crate::unperturbed::compute_unperturbed(cfg, n)?;
    let basis = crate::basis_system::build_basis(&unp)?;
    spectrum_with(&basis, q)
}

/// Spectrum with `N = basis.count()` terms, snapped and aligned to the chains of `basis`.
pub fn spectrum_with(basis: &BasisSystem, q: &GridFunction) -> Result<SpectralSequence> {
    let cfg = basis.config();
    let tol = *basis.unperturbed().tolerances();
    check_grid(cfg, q)?;
    let n = basis.count();
    let f = delta_fn(cfg, q, tol.integrator());
    // two spare zeros absorb reordering at the truncation edge
    let found = contour::first_zeros(&f, n + 2, cfg.shift(), cfg.omega(), basis.unperturbed().mu(), &tol.search())?;
    let snapped = snap_to_mu(basis, &found, &tol)?;
    align_chains(basis, &snapped, n).map(SpectralSequence::from_values)
}

/// Identifies found clusters with degenerate unperturbed eigenvalues (`k_n > 0`)
/// within the snap tolerance. Other eigenvalues keep their computed values,
/// however close to `μ_n`.
fn snap_to_mu(basis: &BasisSystem, found: &[Cluster], tol: &Tolerances) -> Result<Vec<(Cluster, Option<usize>)>> {
    let unp = basis.unperturbed();
    found
        .iter()
        .map(|c| {
            let hits: Vec<usize> = unp
                .distinct_index_set()
                .iter()
                .copied()
                .filter(|&h| basis.chain(h).is_some_and(|ch| ch.k > 0))
                .filter(|&h| {
                    let mu = unp.mu_at(h);
                    (c.value - mu).norm() <= tol.snap * (1.0 + mu.norm())
                })
                .collect();
            match hits.as_slice() {
                [] => Ok((*c, None)),
                [h] => Ok((
                    Cluster {
                        value: unp.mu_at(*h),
                        mult: c.mult,
                    },
                    Some(*h),
                )),
                _ => Err(Error::NumberingAmbiguity(format!(
                    "eigenvalue {} lies within the snap tolerance of several μ",
                    c.value
                ))),
            }
        })
        .collect()
}

/// Places `μ_n` on slots `n..n+k_n−1` and fills the rest in numbering order.
fn align_chains(basis: &BasisSystem, found: &[(Cluster, Option<usize>)], n: usize) -> Result<Vec<C>> {
    let mut slots: Vec<Option<C>> = vec![None; n];
    let mut pool: Vec<C> = Vec::new();
    let mut reserved_used = vec![false; basis.chains().len()];
    for (c, head) in found {
        let mut left = c.mult;
        if let Some(h) = head {
            let (ci, ch) = basis
                .chains()
                .iter()
                .enumerate()
                .find(|(_, ch)| ch.n == *h)
                .expect("snapped to a chain head");
            if ch.k > 0 {
                if c.mult < ch.k.min(n + 1 - ch.n) {
                    return Err(Error::NumberingAmbiguity(format!(
                        "μ_{h} = {} occurs {} times but degeneration requires {}",
                        c.value, c.mult, ch.k
                    )));
                }
                for slot in slots.iter_mut().skip(ch.n - 1).take(ch.k) {
                    *slot = Some(c.value);
                }
                reserved_used[ci] = true;
                left = left.saturating_sub(ch.k);
            }
        }
        pool.extend(std::iter::repeat_n(c.value, left));
    }
    for (ch, used) in basis.chains().iter().zip(&reserved_used) {
        if ch.k > 0 && ch.n <= n && !used {
            return Err(Error::NumberingAmbiguity(format!(
                "degenerate eigenvalue μ_{} = {} not found in the spectrum",
                ch.n,
                basis.unperturbed().mu_at(ch.n)
            )));
        }
    }
    pool.sort_by(contour::numbering_order);
    let mut it = pool.into_iter();
    for slot in slots.iter_mut().filter(|s| s.is_none()) {
        *slot = Some(it.next().ok_or(Error::IncompleteSpectrum {
            found: n - 1,
            counted: n,
        })?);
    }
    let out: Vec<C> = slots.into_iter().map(|s| s.unwrap()).collect();
    for w in out.windows(3) {
        if w[0] == w[2] && w[0] != w[1] {
            warn!("equal eigenvalues {} are not adjacent after chain alignment", w[0]);
        }
    }
    Ok(out)
}

/// `ξ_k = ∫_0^π g_k q` for `k ≤ N`.
pub fn extract_xi(basis: &BasisSystem, q: &GridFunction) -> Result<Vec<C>> {
    basis
        .g_funcs()
        .par_iter()
        .map(|g| pair(g, q))
        .collect()
}

/// Radius in `λ` for Cauchy integrals at `μ_n`: `ρ`-radius `min(0.3, half the
/// distance to the nearest other eigenvalue)`, mapped through `λ = ρ²`.
pub fn cauchy_radius(theta: C, others: impl IntoIterator<Item = C>) -> f64 {
    let half = others
        .into_iter()
        .map(|t| (t - theta).norm())
        .filter(|&d| d > 0.0)
        .fold(f64::INFINITY, f64::min)
        * 0.5;
    let r_rho = half.min(0.3);
    r_rho * (2.0 * theta.norm()).max(1.0)
}

/// `[Δ(μ_n), …, Δ^{(order)}(μ_n)]` by Cauchy integrals.
pub fn delta_derivatives_at_mu(basis: &BasisSystem, q: &GridFunction, n: usize, order: usize) -> Result<Vec<C>> {
    let unp = basis.unperturbed();
    let tol = unp.tolerances();
    let cfg = basis.config();
    let mu = unp.mu_at(n);
    let theta = unp.theta()[n - 1];
    let others = unp
        .distinct_index_set()
        .iter()
        .filter(|&&h| h != n)
        .map(|&h| unp.theta()[h - 1]);
    let r = cauchy_radius(theta, others);
    let opts = tol.integrator();
    let f = move |z: C| delta_jet(cfg, q, z, 0, opts).map(|j| j.value());
    contour::cauchy_derivatives(&f, mu, r, tol.cauchy_nodes, order)
}

/// `|n^{2−α−β} Δ^{(ν)}(μ_n)/ν! − Σ_{η≤ν} a_{n+ν−η} ξ_{n+m_n−1−η}|`.
pub fn main_equation_residual(basis: &BasisSystem, q: &GridFunction, n: usize, nu: usize) -> Result<f64> {
    let unp = basis.unperturbed();
    let cfg = basis.config();
    let m = unp.mult_at(n);
    if nu >= m || n + m - 1 > basis.count() {
        return Err(Error::Structural(format!(
            "ν = {nu} needs the chain of μ_{n} (multiplicity {m}) inside the truncation"
        )));
    }
    let d = delta_derivatives_at_mu(basis, q, n, nu)?;
    let scale = (n as f64).powi(2 - cfg.alpha() as i32 - cfg.beta() as i32);
    let lhs = d[nu] * scale / factorial(nu);
    let mut rhs = C::new(0.0, 0.0);
    for eta in 0..=nu {
        let xi = pair(basis.g_at(n + m - 1 - eta), q)?;
        rhs += basis.a_at(n + nu - eta) * xi;
    }
    Ok((lhs - rhs).norm())
}

/// Normalized residuals `n(ρ_n − n + (α+β)/2 − ω/(πn))`.
pub fn rho_residuals(seq: &SpectralSequence, cfg: &ProblemConfig) -> Vec<C> {
    seq.rho
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let n = (i + 1) as f64;
            (r - n + cfg.shift() - cfg.omega() / (PI * n)) * n
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis_system::build_basis;
    use crate::ode_core::delta0;
    use crate::unperturbed::compute_unperturbed;
    use std::f64::consts::FRAC_PI_2;

    fn free(a: f64) -> ProblemConfig {
        ProblemConfig::from_fn(0, 0, a, 512, |_| C::new(0.0, 0.0)).unwrap()
    }

    #[test]
    fn zero_q_gives_delta0() {
        let cfg = ProblemConfig::from_fn(1, 0, 1.0, 256, |t| C::new(t.cos(), 0.5)).unwrap();
        let q = GridFunction::zeros(cfg.grid().clone());
        for l in [C::new(2.0, 0.0), C::new(-3.0, 1.0)] {
            let d = delta(&cfg, &q, l).unwrap();
            assert!((d - delta0(&cfg, l, 0).unwrap()[0]).norm() < 1e-12);
        }
    }

    #[test]
    fn even_eigenvalues_degenerate_for_midpoint() {
        let cfg = free(FRAC_PI_2);
        let q = cfg.sample(|t| C::new(t.sin(), 0.0));
        let unp = compute_unperturbed(&cfg, 6).unwrap();
        let seq = spectrum_with(&build_basis(&unp).unwrap(), &q).unwrap();
        for j in [2usize, 4, 6] {
            assert_eq!(seq.at(j), unp.mu_at(j));
            assert!((seq.at(j) - (j * j) as f64).norm() < 1e-8);
        }
    }

    #[test]
    fn orthogonality_of_xi() {
        let cfg = free(1.0);
        let unp = compute_unperturbed(&cfg, 5).unwrap();
        let basis = build_basis(&unp).unwrap();
        let q = cfg.sample(|t| C::new((3.0 * t).sin(), 0.0));
        let xi = extract_xi(&basis, &q).unwrap();
        for (k, x) in xi.iter().enumerate() {
            let e = if k == 2 { FRAC_PI_2 } else { 0.0 };
            assert!((x - e).norm() < 1e-10, "{k}: {x}");
        }
    }

    #[test]
    fn main_equation_for_free_problem() {
        let cfg = free(FRAC_PI_2);
        let unp = compute_unperturbed(&cfg, 8).unwrap();
        let basis = build_basis(&unp).unwrap();
        let q = cfg.sample(|t| C::new(t.sin(), 0.0));
        for n in 1..=8 {
            let r = main_equation_residual(&basis, &q, n, 0).unwrap();
            assert!(r < 1e-7, "n = {n}: {r}");
        }
        let zero = GridFunction::zeros(cfg.grid().clone());
        assert!(main_equation_residual(&basis, &zero, 3, 0).unwrap() < 1e-9);
    }

    #[test]
    fn sequence_markers() {
        let s = SpectralSequence::from_values(vec![
            C::new(1.0, 0.0),
            C::new(4.0, 0.0),
            C::new(4.0, 0.0),
            C::new(9.0, 0.0),
        ]);
        assert_eq!(s.markers(), vec![1, 2, 0, 1]);
        assert_eq!(s.clusters, vec![(1, 1), (2, 2), (4, 1)]);
    }
}

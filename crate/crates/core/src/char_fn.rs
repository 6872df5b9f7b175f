//! Characteristic function rebuilt from a spectrum, and the admissibility
//! check of a candidate spectrum.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::basis_system::BasisSystem;
use crate::contour;
use crate::error::{Error, Result};
use crate::forward::{cauchy_radius, SpectralSequence};
use crate::jet::Jet;
use crate::ode_core::{delta0_jet, IntegratorOptions};
use crate::par::*;
use crate::unperturbed::UnperturbedSpectralData;

type C = Complex64;

/// Closed form of the characteristic function for `p = q = 0`.
pub fn closed_form(alpha: u8, beta: u8, lambda: C) -> C {
    let rho = lambda.sqrt();
    let x = rho * PI;
    match (alpha, beta) {
        (0, 0) => PI * sinc(x),
        (1, 1) => rho * x.sin(),
        (1, 0) => -x.cos(),
        _ => x.cos(),
    }
}

fn sinc(x: C) -> C {
    if x.norm() < 1e-4 {
        let x2 = x * x;
        C::new(1.0, 0.0) - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// `ℓ_k = (k − (α+β)/2)²`.
pub fn free_level(k: usize, shift: f64) -> f64 {
    (k as f64 - shift).powi(2)
}

/// `E(λ)/(ℓ_j − λ)` without cancellation near `ℓ_j`.
fn closed_form_over(alpha: u8, beta: u8, j: usize, lambda: C) -> C {
    let shift = (alpha + beta) as f64 / 2.0;
    let rho_j = j as f64 - shift;
    let mut rho = lambda.sqrt();
    if rho.re < 0.0 {
        rho = -rho;
    }
    let d = lambda - rho_j * rho_j;
    if d.norm() > 0.25 * (1.0 + rho_j) {
        // far from ℓ_j: nothing cancels
        return closed_form(alpha, beta, lambda) / -d;
    }
    let sum = rho + rho_j;
    // E = F(ρ)·sin(π(ρ − ρ_j)); with ρ − ρ_j = d/(ρ + ρ_j)
    let sign_j = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
    let f = match (alpha, beta) {
        (0, 0) => C::new(sign_j, 0.0) / rho,
        (1, 1) => rho * -sign_j,
        (1, 0) => C::new(-sign_j, 0.0),
        _ => C::new(sign_j, 0.0),
    };
    if sum.norm() == 0.0 {
        // α = β = 1, j = 1, λ = 0
        return C::new(-PI, 0.0);
    }
    let delta_rho = d / sum;
    -f * PI * sinc(delta_rho * PI) / sum
}

/// What the finite product is divided against.
#[derive(Debug, Clone)]
pub enum Reference {
    /// `E(λ)` with zeros `ℓ_k`; eigenvalues beyond `N` are modelled as
    /// `(k − (α+β)/2 + ω/(πk))²`.
    ClosedForm { omega: C },
    /// `Δ_0(λ)` of a known `p`, with zeros `μ_k`.
    Unperturbed(Box<UnperturbedSpectralData>),
}

#[derive(Debug, Clone)]
pub struct ReconstructedDelta {
    alpha: u8,
    beta: u8,
    lambda: Vec<C>,
    zeta: Vec<f64>,
    prefactor: f64,
    reference: Reference,
    /// For the unperturbed reference: distinct `μ`, copies within `N`, `Δ_0` jet.
    clusters: Vec<(C, usize, Jet)>,
    integ: IntegratorOptions,
    tail_end: usize,
}

const JET_EXTRA: usize = 6;

/// Product normalizers `ζ_k` of `λ_k − λ`.
pub fn zeta(alpha: u8, beta: u8, n: usize) -> Vec<f64> {
    let shift = (alpha + beta) as f64 / 2.0;
    (1..=n)
        .map(|k| {
            if k == 1 && alpha == 1 && beta == 1 {
                1.0
            } else {
                free_level(k, shift)
            }
        })
        .collect()
}

/// Estimate of `ω` from the last quarter of a spectrum: `λ_k − ℓ_k → 2ω/π`.
pub fn estimate_omega(alpha: u8, beta: u8, spec: &SpectralSequence) -> C {
    let n = spec.count();
    if n == 0 {
        return C::new(0.0, 0.0);
    }
    let shift = (alpha + beta) as f64 / 2.0;
    let from = n - (n / 4).max(1);
    let diffs: Vec<C> = (from..n)
        .map(|i| spec.lambda[i] - free_level(i + 1, shift))
        .collect();
    diffs.iter().sum::<C>() / diffs.len() as f64 * (PI / 2.0)
}

/// Rebuilds `Δ` against the closed form with `ω` estimated from the spectrum.
pub fn reconstruct(spec: &SpectralSequence, alpha: u8, beta: u8) -> ReconstructedDelta {
    let omega = estimate_omega(alpha, beta, spec);
    reconstruct_with(spec, alpha, beta, Reference::ClosedForm { omega })
        .expect("closed-form reference needs no integration")
}

pub fn reconstruct_with(
    spec: &SpectralSequence,
    alpha: u8,
    beta: u8,
    reference: Reference,
) -> Result<ReconstructedDelta> {
    let n = spec.count();
    let mut clusters = Vec::new();
    let mut integ = IntegratorOptions::default();
    if let Reference::Unperturbed(unp) = &reference {
        if unp.count() != n {
            return Err(Error::Structural(format!(
                "spectrum has {n} terms but the reference has {}",
                unp.count()
            )));
        }
        if unp.config().alpha() != alpha || unp.config().beta() != beta {
            return Err(Error::Structural("reference boundary conditions differ".into()));
        }
        integ = unp.tolerances().integrator();
        let heads = unp.distinct_index_set();
        clusters = heads
            .par_iter()
            .map(|&h| {
                let copies = (h..=n).take_while(|&j| unp.mu_at(j) == unp.mu_at(h)).count();
                let jet = delta0_jet(unp.config(), unp.mu_at(h), copies + JET_EXTRA, integ)?;
                Ok((unp.mu_at(h), copies, jet))
            })
            .collect::<Result<Vec<_>>>()?;
    }
    Ok(ReconstructedDelta {
        alpha,
        beta,
        lambda: spec.lambda.clone(),
        zeta: zeta(alpha, beta, n),
        prefactor: if alpha == 1 { -1.0 } else { 1.0 } * if alpha == beta { PI } else { 1.0 },
        reference,
        clusters,
        integ,
        tail_end: (64 * n).max(4096),
    })
}

impl ReconstructedDelta {
    pub fn zeta(&self) -> &[f64] {
        &self.zeta
    }

    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    pub fn count(&self) -> usize {
        self.lambda.len()
    }

    pub fn reference(&self) -> &Reference {
        &self.reference
    }

    fn shift(&self) -> f64 {
        (self.alpha + self.beta) as f64 / 2.0
    }

    /// Zeros of the reference function, `ℓ_k` or `μ_k`, for `k ≤ N`.
    pub fn reference_zeros(&self) -> Vec<C> {
        match &self.reference {
            Reference::ClosedForm { .. } => (1..=self.count())
                .map(|k| C::new(free_level(k, self.shift()), 0.0))
                .collect(),
            Reference::Unperturbed(unp) => unp.mu().to_vec(),
        }
    }

    /// The truncated product `(−1)^α π^{δ_{αβ}} ∏_{k≤N} (λ_k − λ)/ζ_k`.
    pub fn raw_product(&self, lambda: C) -> C {
        self.lambda
            .iter()
            .zip(&self.zeta)
            .fold(C::new(self.prefactor, 0.0), |acc, (l, z)| acc * (l - lambda) / z)
    }

    pub fn eval(&self, lambda: C) -> Result<C> {
        match &self.reference {
            Reference::ClosedForm { omega } => self.eval_closed(lambda, *omega),
            Reference::Unperturbed(_) => self.eval_unperturbed(lambda),
        }
    }

    fn eval_closed(&self, lambda: C, omega: C) -> Result<C> {
        let shift = self.shift();
        let n = self.count();
        let mut rho = lambda.sqrt();
        if rho.re < 0.0 {
            rho = -rho;
        }
        let nearest = ((rho.re + shift).round().max(1.0)) as usize;
        if nearest <= n {
            let l = free_level(nearest, shift);
            if (lambda - l).norm() < 1e-12 && self.lambda[nearest - 1] != C::new(l, 0.0) {
                return Err(Error::Singularity { lambda });
            }
        }
        let model = |k: usize| {
            let t = C::new(k as f64 - shift, 0.0) + omega / (PI * k as f64);
            t * t
        };
        let numerator = |k: usize| if k <= n { self.lambda[k - 1] } else { model(k) };
        let mut value = if nearest <= self.tail_end {
            closed_form_over(self.alpha, self.beta, nearest, lambda) * (numerator(nearest) - lambda)
        } else {
            closed_form(self.alpha, self.beta, lambda)
        };
        for k in 1..=self.tail_end {
            if k == nearest {
                continue;
            }
            value *= (numerator(k) - lambda) / (free_level(k, shift) - lambda);
        }
        // Σ_{k>K} (model_k − ℓ_k)/(ℓ_k − λ) ≈ (2ω/π) / K
        let k_end = self.tail_end as f64;
        value *= (omega * (2.0 / PI) / k_end).exp();
        Ok(value)
    }

    fn eval_unperturbed(&self, lambda: C) -> Result<C> {
        let Reference::Unperturbed(unp) = &self.reference else {
            unreachable!()
        };
        // nearest distinct reference zero
        let (ci, dist) = self
            .clusters
            .iter()
            .enumerate()
            .map(|(i, (mu, _, _))| (i, (mu - lambda).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap_or((usize::MAX, f64::INFINITY));
        let mut skip = None;
        let mut value;
        if ci != usize::MAX {
            let (mu, copies, jet) = &self.clusters[ci];
            let theta = contour::sqrt_branch(*mu);
            if dist <= 1e-3 * (1.0 + theta.norm()) {
                // Δ_0(λ)/(μ − λ)^c from the Taylor jet at μ
                let d = lambda - mu;
                let mut s = C::new(0.0, 0.0);
                for i in (*copies..jet.0.len()).rev() {
                    s = s * d + jet.0[i];
                }
                value = if copies % 2 == 0 { s } else { -s };
                skip = Some(*mu);
            } else {
                value = delta0_jet(unp.config(), lambda, 0, self.integ)?.value();
            }
        } else {
            value = delta0_jet(unp.config(), lambda, 0, self.integ)?.value();
        }
        for (l, mu) in self.lambda.iter().zip(unp.mu()) {
            if Some(*mu) == skip {
                value *= l - lambda;
            } else {
                value *= (l - lambda) / (mu - lambda);
            }
        }
        Ok(value)
    }
}

/// `[Δ(μ), …, Δ^{(max_order)}(μ)]` of the reconstruction by Cauchy integrals on a
/// circle around `μ` that keeps clear of the `exclusion` points.
pub fn delta_derivatives_at(
    rec: &ReconstructedDelta,
    mu: C,
    max_order: usize,
    exclusion: &[C],
    nodes: usize,
) -> Result<Vec<C>> {
    if max_order == 0 {
        match rec.eval(mu) {
            Ok(v) => return Ok(vec![v]),
            Err(Error::Singularity { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    let theta = contour::sqrt_branch(mu);
    let others = exclusion
        .iter()
        .filter(|e| (*e - mu).norm() > 1e-12 * (1.0 + mu.norm()))
        .map(|e| contour::sqrt_branch(*e));
    let r = cauchy_radius(theta, others);
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Contour { center: mu });
    }
    let f = |z: C| rec.eval(z);
    contour::cauchy_derivatives(&f, mu, r, nodes, max_order)
}

/// Admissibility verdicts for a candidate spectrum.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub admissible: bool,
    pub degeneration: bool,
    pub chain_numbering: bool,
    pub tail: bool,
    /// `|λ_n − μ_n|` for `n ∈ Ω`.
    pub degeneration_residuals: Vec<(usize, f64)>,
    /// Indices where equal values are separated or a chain is broken.
    pub chain_violations: Vec<usize>,
    /// `ϰ̂_n = (λ_n − μ_n)/b_n`, `None` where `b_n` is treated as zero.
    pub kappa: Vec<Option<C>>,
    pub tail_energy_previous: f64,
    pub tail_energy_last: f64,
    pub noise_floor: f64,
}

/// Checks degeneration on `Ω`, the chain numbering and the `ℓ₂` tail proxy.
pub fn validate_spectrum(candidate: &SpectralSequence, basis: &BasisSystem) -> Result<ValidationReport> {
    let unp = basis.unperturbed();
    let n = basis.count();
    if candidate.count() != n {
        return Err(Error::Structural(format!(
            "candidate has {} terms, the unperturbed data {n}",
            candidate.count()
        )));
    }
    let tol = unp.tolerances();
    let same = |u: C, v: C| (u - v).norm() <= tol.snap * (1.0 + v.norm());

    let degeneration_residuals: Vec<(usize, f64)> = basis
        .omega_set()
        .iter()
        .map(|&j| (j, (candidate.at(j) - unp.mu_at(j)).norm()))
        .collect();
    let degeneration = basis
        .omega_set()
        .iter()
        .all(|&j| same(candidate.at(j), unp.mu_at(j)));

    let mut chain_violations = Vec::new();
    for j in 1..=n {
        let v = candidate.at(j);
        // a later equal value with something different in between
        let mut broken = false;
        let mut i = j + 1;
        while i <= n && same(candidate.at(i), v) {
            i += 1;
        }
        if (i + 1..=n).any(|k| same(candidate.at(k), v)) {
            broken = true;
        }
        if broken && !chain_violations.contains(&j) {
            chain_violations.push(j);
        }
    }
    for ch in basis.chains() {
        for nu in 1..ch.k {
            let j = ch.n + nu;
            if j <= n && !same(candidate.at(j), candidate.at(ch.n)) && !chain_violations.contains(&j) {
                chain_violations.push(j);
            }
        }
    }
    chain_violations.sort_unstable();
    let chain_numbering = chain_violations.is_empty();

    let bmax = basis.b_coeff().iter().map(|b| b.norm()).fold(0.0, f64::max);
    let kappa: Vec<Option<C>> = (1..=n)
        .map(|j| {
            let b = basis.b_at(j);
            (b.norm() > tol.tol_zero * bmax).then(|| (candidate.at(j) - unp.mu_at(j)) / b)
        })
        .collect();
    let quarter = (n / 4).max(1);
    let energy = |range: std::ops::Range<usize>| -> f64 {
        range
            .filter_map(|i| kappa.get(i).copied().flatten())
            .map(|k| k.norm_sqr())
            .sum()
    };
    let last = energy(n.saturating_sub(quarter)..n);
    let previous = energy(n.saturating_sub(2 * quarter)..n.saturating_sub(quarter));
    // rounding in λ_n − μ_n, relative 1e-10, propagated through 1/b_n
    let noise_floor: f64 = (n.saturating_sub(quarter)..n)
        .filter_map(|i| {
            let b = basis.b_coeff()[i].norm();
            (b > tol.tol_zero * bmax).then(|| (1e-10 * (1.0 + unp.mu()[i].norm()) / b).powi(2))
        })
        .sum();
    let tail = last <= previous + noise_floor;

    Ok(ValidationReport {
        admissible: degeneration && chain_numbering && tail,
        degeneration,
        chain_numbering,
        tail,
        degeneration_residuals,
        chain_violations,
        kappa,
        tail_energy_previous: previous,
        tail_energy_last: last,
        noise_floor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn free_spectrum(alpha: u8, beta: u8, n: usize) -> SpectralSequence {
        let shift = (alpha + beta) as f64 / 2.0;
        SpectralSequence::from_values((1..=n).map(|k| C::new(free_level(k, shift), 0.0)).collect())
    }

    #[test]
    fn closed_forms_match_stable_ratio() {
        for (a, b) in [(0, 0), (1, 1), (1, 0), (0, 1)] {
            let shift = (a + b) as f64 / 2.0;
            for j in 1..6 {
                let l = free_level(j, shift);
                let z = C::new(l + 0.37, 0.21);
                let direct = closed_form(a, b, z) / (l - z);
                let stable = closed_form_over(a, b, j, z);
                assert!((direct - stable).norm() < 1e-12 * (1.0 + direct.norm()), "{a}{b} j={j}");
            }
        }
    }

    #[test]
    fn sine_product() {
        let rec = reconstruct(&free_spectrum(0, 0, 200), 0, 0);
        let v = rec.eval(C::new(-1.0, 0.0)).unwrap();
        assert!((v.re - PI.sinh()).abs() < 1e-6);
        let d = delta_derivatives_at(&rec, C::new(4.0, 0.0), 1, &rec.reference_zeros(), 64).unwrap();
        assert!(d[0].norm() < 1e-10);
        // (πρ cos ρπ − sin ρπ)/(2ρ³) at ρ = 2
        assert!((d[1] - PI / 8.0).norm() < 1e-7, "{}", d[1]);
        let direct = rec.eval(C::new(2.5, 0.0)).unwrap();
        let d0 = delta_derivatives_at(&rec, C::new(2.5, 0.0), 0, &[], 64).unwrap();
        assert!((d0[0] - direct).norm() < 1e-9);
    }

    #[test]
    fn cosine_product() {
        let rec = reconstruct(&free_spectrum(1, 0, 50), 1, 0);
        assert!((rec.eval(C::new(0.0, 0.0)).unwrap() + 1.0).norm() < 1e-6);
    }

    #[test]
    fn normalizers() {
        assert_eq!(zeta(1, 1, 3), vec![1.0, 1.0, 4.0]);
        assert_eq!(zeta(0, 0, 2), vec![1.0, 4.0]);
        assert_eq!(zeta(1, 0, 2), vec![0.25, 2.25]);
    }

    #[test]
    fn singular_point_is_reported() {
        let mut s = free_spectrum(0, 0, 5);
        s.lambda[1] = C::new(4.5, 0.0);
        let rec = reconstruct_with(&s, 0, 0, Reference::ClosedForm { omega: C::new(0.0, 0.0) }).unwrap();
        assert!(matches!(rec.eval(C::new(4.0, 0.0)), Err(Error::Singularity { .. })));
        // removable when the zero is kept
        let rec = reconstruct(&free_spectrum(0, 0, 5), 0, 0);
        assert!(rec.eval(C::new(4.0, 0.0)).unwrap().norm() < 1e-14);
    }
}

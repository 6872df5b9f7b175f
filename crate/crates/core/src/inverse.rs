//! Recovery of `q` from the spectrum and the coefficients `{ξ_n}_{n∈Ω}`.

use std::collections::BTreeMap;

use log::warn;
use num_complex::Complex64;
use serde::Serialize;

use crate::basis_system::{synthesize_from_coefficients, BasisSystem};
use crate::char_fn::{delta_derivatives_at, reconstruct_with, validate_spectrum, ReconstructedDelta, Reference, ValidationReport};
use crate::error::{Error, Result};
use crate::forward::SpectralSequence;
use crate::function_space::{pair, GridFunction};
use crate::input::InverseInput;
use crate::jet::factorial;
use crate::par::*;

type C = Complex64;

/// `Δ^{(ν)}(μ_n)/ν!`, `ν < m_n`, for every chain head `n`.
#[derive(Debug, Clone)]
pub struct DerivativeTable {
    rows: BTreeMap<usize, Vec<C>>,
}

impl DerivativeTable {
    pub fn compute(rec: &ReconstructedDelta, basis: &BasisSystem) -> Result<Self> {
        let unp = basis.unperturbed();
        let heads: Vec<usize> = unp.distinct_index_set().to_vec();
        let distinct: Vec<C> = heads.iter().map(|&h| unp.mu_at(h)).collect();
        let nodes = unp.tolerances().cauchy_nodes;
        let rows = heads
            .par_iter()
            .enumerate()
            .map(|(i, &n)| {
                let m = unp.mult_at(n);
                let exclusion: Vec<C> = distinct
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, v)| *v)
                    .collect();
                let d = delta_derivatives_at(rec, unp.mu_at(n), m - 1, &exclusion, nodes)?;
                let taylor: Vec<C> = d.iter().enumerate().map(|(nu, v)| v / factorial(nu)).collect();
                Ok((n, taylor))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            rows: rows.into_iter().collect(),
        })
    }

    /// `Δ^{(ν)}(μ_n)/ν!`.
    pub fn get(&self, n: usize, nu: usize) -> C {
        self.rows[&n][nu]
    }
}

/// Solves the triangular system for `ξ_1..ξ_N`, taking `ξ` on `Ω` from `extra_xi`.
pub fn solve_xi_system(
    table: &DerivativeTable,
    basis: &BasisSystem,
    extra_xi: &BTreeMap<usize, C>,
) -> Result<Vec<C>> {
    let unp = basis.unperturbed();
    let cfg = basis.config();
    let big_n = basis.count();
    let amax = basis.a_coeff().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let tol_zero = unp.tolerances().tol_zero;
    let mut xi = vec![C::new(0.0, 0.0); big_n];
    for ch in basis.chains() {
        let (n, m, k) = (ch.n, ch.m, ch.k);
        for nu in 0..k {
            let j = n + nu;
            if j <= big_n {
                xi[j - 1] = *extra_xi.get(&j).ok_or(Error::InputIncomplete(j))?;
            }
        }
        if k >= m {
            continue;
        }
        if n + m - 1 > big_n {
            warn!("chain of μ_{n} is cut by the truncation; its ξ are left at zero");
            continue;
        }
        let lead = basis.a_at(n + k);
        if lead.norm() <= tol_zero * amax {
            return Err(Error::Contradiction { n, index: n + k });
        }
        let scale = (n as f64).powi(2 - cfg.alpha() as i32 - cfg.beta() as i32);
        // row ν = k + j determines ξ_{n+m−1−j}
        for j in 0..m - k {
            let mut rhs = table.get(n, k + j) * scale;
            for eta in 0..j {
                rhs -= basis.a_at(n + k + j - eta) * xi[n + m - 2 - eta];
            }
            xi[n + m - 2 - j] = rhs / lead;
        }
    }
    Ok(xi)
}

/// The outcome of a recovery: the potential, its coefficients and the
/// admissibility report of the input spectrum.
#[derive(Debug, Clone)]
pub struct Recovery {
    pub q: GridFunction,
    pub xi: Vec<C>,
    pub validation: ValidationReport,
}

fn check_input(input: &InverseInput, basis: &BasisSystem) -> Result<()> {
    if input.n != basis.count() || input.spectrum.count() != basis.count() {
        return Err(Error::Structural(format!(
            "truncation mismatch: input N = {}, spectrum {}, basis {}",
            input.n,
            input.spectrum.count(),
            basis.count()
        )));
    }
    for &j in basis.omega_set() {
        if !input.extra_xi.contains_key(&j) {
            return Err(Error::InputIncomplete(j));
        }
    }
    if let Some(bad) = input.extra_xi.keys().find(|j| !basis.in_omega(**j)) {
        return Err(Error::Structural(format!("extra_xi given for {bad}, which is not in Ω")));
    }
    Ok(())
}

/// `Δ` rebuilt from the spectrum against the unperturbed characteristic function.
pub fn reconstruct_for(spectrum: &SpectralSequence, basis: &BasisSystem) -> Result<ReconstructedDelta> {
    let cfg = basis.config();
    reconstruct_with(
        spectrum,
        cfg.alpha(),
        cfg.beta(),
        Reference::Unperturbed(Box::new(basis.unperturbed().clone())),
    )
}

/// Runs the recovery. An inadmissible spectrum is an error unless `force` is set.
pub fn recover_potential(input: &InverseInput, basis: &BasisSystem, force: bool) -> Result<Recovery> {
    check_input(input, basis)?;
    let validation = validate_spectrum(&input.spectrum, basis)?;
    if !validation.admissible && !force {
        return Err(Error::Inadmissible(verdict_summary(&validation)));
    }
    let rec = reconstruct_for(&input.spectrum, basis)?;
    let table = DerivativeTable::compute(&rec, basis)?;
    let xi = solve_xi_system(&table, basis, &input.extra_xi)?;
    let q = synthesize_from_coefficients(basis, &xi)?;
    Ok(Recovery { q, xi, validation })
}

pub fn verdict_summary(v: &ValidationReport) -> String {
    let mut failed = Vec::new();
    if !v.degeneration {
        failed.push("degeneration");
    }
    if !v.chain_numbering {
        failed.push("chain numbering");
    }
    if !v.tail {
        failed.push("tail decay");
    }
    format!("failed checks: {}", failed.join(", "))
}

/// One potential per variant of `{ξ_n}_{n∈Ω}`, all sharing the spectrum.
pub fn isospectral_family(
    input: &InverseInput,
    basis: &BasisSystem,
    variants: &[BTreeMap<usize, C>],
) -> Result<Vec<Recovery>> {
    check_input(input, basis)?;
    let validation = validate_spectrum(&input.spectrum, basis)?;
    let rec = reconstruct_for(&input.spectrum, basis)?;
    let table = DerivativeTable::compute(&rec, basis)?;
    variants
        .iter()
        .map(|extra| {
            let xi = solve_xi_system(&table, basis, extra)?;
            let q = synthesize_from_coefficients(basis, &xi)?;
            Ok(Recovery {
                q,
                xi,
                validation: validation.clone(),
            })
        })
        .collect()
}

/// One residual of the main equation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MainResidual {
    pub n: usize,
    pub nu: usize,
    pub residual: f64,
}

/// `|n^{2−α−β} Δ^{(ν)}(μ_n)/ν! − Σ_η a_{n+ν−η} ξ_{n+m_n−1−η}|` for every `n ∈ S`, `ν < m_n`,
/// with the derivatives from `table` and `ξ_k = pair(g_k, q)`.
pub fn main_equation_residuals(table: &DerivativeTable, basis: &BasisSystem, q: &GridFunction) -> Result<Vec<MainResidual>> {
    let cfg = basis.config();
    let xi: Vec<C> = basis
        .g_funcs()
        .iter()
        .map(|g| pair(g, q))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for ch in basis.chains() {
        let (n, m) = (ch.n, ch.m);
        if n + m - 1 > basis.count() {
            continue;
        }
        let scale = (n as f64).powi(2 - cfg.alpha() as i32 - cfg.beta() as i32);
        for nu in 0..m {
            let lhs = table.get(n, nu) * scale;
            let rhs: C = (0..=nu)
                .map(|eta| basis.a_at(n + nu - eta) * xi[n + m - 2 - eta])
                .sum();
            out.push(MainResidual {
                n,
                nu,
                residual: (lhs - rhs).norm(),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis_system::build_basis;
    use crate::forward::{extract_xi, spectrum_with};
    use crate::function_space::ProblemConfig;
    use crate::unperturbed::compute_unperturbed;
    use std::f64::consts::FRAC_PI_2;

    fn setup(n: usize) -> BasisSystem {
        let cfg = ProblemConfig::from_fn(0, 0, FRAC_PI_2, 512, |_| C::new(0.0, 0.0)).unwrap();
        build_basis(&compute_unperturbed(&cfg, n).unwrap()).unwrap()
    }

    fn input(basis: &BasisSystem, spectrum: SpectralSequence, extra: BTreeMap<usize, C>) -> InverseInput {
        InverseInput {
            config: basis.config().clone(),
            spectrum,
            extra_xi: extra,
            n: basis.count(),
        }
    }

    #[test]
    fn unperturbed_spectrum_gives_zero() {
        let basis = setup(8);
        let spec = SpectralSequence::from_values(basis.unperturbed().mu().to_vec());
        let extra = basis.omega_set().iter().map(|&j| (j, C::new(0.0, 0.0))).collect();
        let r = recover_potential(&input(&basis, spec, extra), &basis, false).unwrap();
        assert!(r.xi.iter().all(|x| x.norm() < 1e-10));
        assert!(r.q.norm_l2() < 1e-8);
    }

    #[test]
    fn sine_roundtrip_recovers_coefficients() {
        let basis = setup(8);
        let cfg = basis.config().clone();
        let q = cfg.sample(|t| C::new(t.sin(), 0.0));
        let spec = spectrum_with(&basis, &q).unwrap();
        let xi_true = extract_xi(&basis, &q).unwrap();
        let extra = basis.omega_set().iter().map(|&j| (j, xi_true[j - 1])).collect();
        let r = recover_potential(&input(&basis, spec, extra), &basis, false).unwrap();
        for (a, b) in r.xi.iter().zip(&xi_true) {
            assert!((a - b).norm() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn missing_extra_data_is_reported() {
        let basis = setup(4);
        let spec = SpectralSequence::from_values(basis.unperturbed().mu().to_vec());
        let extra = BTreeMap::from([(2, C::new(0.0, 0.0))]);
        assert!(matches!(
            recover_potential(&input(&basis, spec, extra), &basis, false),
            Err(Error::InputIncomplete(4))
        ));
    }

    #[test]
    fn inadmissible_without_force() {
        let basis = setup(4);
        let mut values = basis.unperturbed().mu().to_vec();
        values[1] += 0.1;
        let spec = SpectralSequence::from_values(values);
        let extra: BTreeMap<usize, C> = basis.omega_set().iter().map(|&j| (j, C::new(0.0, 0.0))).collect();
        let inp = input(&basis, spec, extra);
        assert!(matches!(recover_potential(&inp, &basis, false), Err(Error::Inadmissible(_))));
        let forced = recover_potential(&inp, &basis, true).unwrap();
        assert!(!forced.validation.degeneration);
    }
}

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::LazyLock;

use frozen_sl::basis_system::{build_basis, synthesize_from_coefficients, BasisSystem};
use frozen_sl::forward::extract_xi;
use frozen_sl::function_space::ProblemConfig;
use frozen_sl::unperturbed::compute_unperturbed;
use frozen_sl::Complex64 as C;
use proptest::prelude::*;

fn basis(alpha: u8, beta: u8, a: f64, p: impl Fn(f64) -> C, n: usize) -> BasisSystem {
    let cfg = ProblemConfig::from_fn(alpha, beta, a, 1024, p).unwrap();
    build_basis(&compute_unperturbed(&cfg, n).unwrap()).unwrap()
}

static EXP_BASIS: LazyLock<BasisSystem> = LazyLock::new(|| basis(0, 1, 1.0, |t| C::from_polar(10.0, t), 12));

#[test]
fn symmetric_split_degenerates_on_even_indices() {
    // with p = 0 and a = π/2, sin(2kt) vanishes at a, so μ = 4k² survives any q
    let b = basis(0, 0, FRAC_PI_2, |_| C::new(0.0, 0.0), 12);
    assert_eq!(b.omega_set(), &[2, 4, 6, 8, 10, 12]);
    for j in 1..=12 {
        assert_eq!(b.in_omega(j), j % 2 == 0);
        let an = b.a_at(j).norm();
        if j % 2 == 0 {
            assert!(an < 1e-10, "a_{j} = {an}");
        } else {
            assert!(an > 1e-3, "a_{j} = {an}");
        }
    }
}

#[test]
fn generic_split_has_empty_omega() {
    let b = basis(0, 0, 1.0, |_| C::new(0.0, 0.0), 12);
    assert!(b.omega_set().is_empty());
    assert!(b.gram_condition() < 1e3);
}

#[test]
fn diagnostics_cover_every_index() {
    let rows = EXP_BASIS.diagnostics();
    assert_eq!(rows.len(), EXP_BASIS.count());
    assert_eq!(EXP_BASIS.g_funcs().len(), 12);
}

#[test]
fn wrong_coefficient_count_is_rejected() {
    assert!(synthesize_from_coefficients(&EXP_BASIS, &[C::new(1.0, 0.0); 3]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn synthesis_reproduces_coefficients(coeffs in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 12)) {
        let xi: Vec<C> = coeffs.iter().map(|(r, i)| C::new(*r, *i)).collect();
        let q = synthesize_from_coefficients(&EXP_BASIS, &xi).unwrap();
        let back = extract_xi(&EXP_BASIS, &q).unwrap();
        for (x, y) in xi.iter().zip(&back) {
            prop_assert!((x - y).norm() < 1e-9 * (1.0 + x.norm()));
        }
    }

    #[test]
    fn coefficient_extraction_is_linear(s in -2.0f64..2.0, w in 0.5f64..5.0) {
        let cfg = EXP_BASIS.config();
        let u = cfg.sample(|t| C::new(t.sin(), 0.0));
        let v = cfg.sample(|t| C::new((w * t).cos(), t / PI));
        let k = C::new(s, 1.0 - s);
        let combo = extract_xi(&EXP_BASIS, &u.axpy(k, &v).unwrap()).unwrap();
        let (xu, xv) = (extract_xi(&EXP_BASIS, &u).unwrap(), extract_xi(&EXP_BASIS, &v).unwrap());
        for j in 0..12 {
            let expect = xu[j] + k * xv[j];
            prop_assert!((combo[j] - expect).norm() < 1e-11 * (1.0 + expect.norm()));
        }
    }
}

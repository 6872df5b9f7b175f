mod support;

use std::f64::consts::FRAC_PI_2;

use frozen_sl::function_space::ProblemConfig;
use frozen_sl::unperturbed::{compute_unperturbed, read_spectrum_csv, write_spectrum_csv};
use frozen_sl::Complex64 as C;
use proptest::prelude::*;
use support::*;

#[test]
fn free_operator_levels() {
    for (alpha, beta) in BOUNDARY_PAIRS {
        let cfg = ProblemConfig::from_fn(alpha, beta, 1.0, 1024, |_| c(0.0)).unwrap();
        let unp = compute_unperturbed(&cfg, 12).unwrap();
        let shift = if alpha + beta == 2 { 1.0 } else { (alpha + beta) as f64 / 2.0 };
        for (k, mu) in unp.mu().iter().enumerate() {
            let exact = ((k + 1) as f64 - shift).powi(2);
            assert!((mu - exact).norm() < 1e-9, "({alpha},{beta}) μ_{} = {mu}", k + 1);
            assert_eq!(unp.mult_at(k + 1), 1);
        }
    }
}

#[test]
fn complex_potential_levels_match_fd_oracle() {
    let p = |t: f64| C::from_polar(10.0, t);
    for (alpha, beta) in [(0, 0), (1, 1)] {
        let cfg = ProblemConfig::from_fn(alpha, beta, FRAC_PI_2, 1024, p).unwrap();
        let unp = compute_unperturbed(&cfg, 6).unwrap();
        let oracle = fd_eigenvalues(alpha, beta, FRAC_PI_2, 2048, &p, &|_| c(0.0), unp.mu());
        for (mu, o) in unp.mu().iter().zip(&oracle) {
            assert!(rel(*mu, *o) < 1e-6, "({alpha},{beta}) {mu} vs {o}");
        }
    }
}

#[test]
fn chain_heads_cover_every_index() {
    let cfg = ProblemConfig::from_fn(0, 0, FRAC_PI_2, 1024, |t| c(t * (std::f64::consts::PI - t))).unwrap();
    let unp = compute_unperturbed(&cfg, 10).unwrap();
    let total: usize = unp.distinct_index_set().iter().map(|&h| unp.mult_at(h)).sum();
    assert_eq!(total, 10);
    for j in 1..=10 {
        let h = unp.head_of(j);
        assert!(h <= j && j < h + unp.mult_at(h));
        assert_eq!(unp.mu_at(j), unp.mu_at(h));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn spectrum_csv_roundtrip(values in proptest::collection::vec((-1e4f64..1e4, -1e2f64..1e2, 1usize..4), 1..20)) {
        let lam: Vec<C> = values.iter().map(|(r, i, _)| C::new(*r, *i)).collect();
        let markers: Vec<usize> = values.iter().map(|v| v.2).collect();
        let mut buf = Vec::new();
        write_spectrum_csv(&lam, &markers, &mut buf).unwrap();
        let (back, back_markers) = read_spectrum_csv(buf.as_slice(), "mem").unwrap();
        prop_assert_eq!(back, lam);
        prop_assert_eq!(back_markers, markers);
    }
}

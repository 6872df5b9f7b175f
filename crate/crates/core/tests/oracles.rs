mod support;

use std::f64::consts::{FRAC_PI_2, PI};

use frozen_sl::forward::{delta, spectrum};
use frozen_sl::function_space::ProblemConfig;
use frozen_sl::Complex64 as C;
use support::*;

#[test]
fn shooting_oracle_matches_delta() {
    let q = |t: f64| C::new(t.cos(), 0.5 * t);
    for (name, p) in p_matrix() {
        for (alpha, beta) in BOUNDARY_PAIRS {
            for a in [0.0, 1.0, FRAC_PI_2, PI] {
                let cfg = ProblemConfig::from_fn(alpha, beta, a, 1024, p).unwrap();
                let qs = cfg.sample(q);
                for lam in [C::new(3.3, 0.4), C::new(-20.0, 5.0), C::new(50.0, -2.0)] {
                    let ours = delta(&cfg, &qs, lam).unwrap();
                    let oracle = rk4_delta(alpha, beta, a, &p, &q, lam, 20_000);
                    let scale = ours.norm().max(oracle.norm());
                    assert!((ours - oracle).norm() < 1e-7 * scale, "{name} ({alpha},{beta}) a={a} λ={lam}: {ours} vs {oracle}");
                }
            }
        }
    }
}

#[test]
fn fd_oracle_reproduces_free_spectrum() {
    for (alpha, beta) in BOUNDARY_PAIRS {
        let shift = if alpha + beta == 2 { 1.0 } else { (alpha + beta) as f64 / 2.0 };
        let exact: Vec<C> = (1..=6).map(|n| c((n as f64 - shift).powi(2))).collect();
        let seeds: Vec<C> = exact.iter().map(|v| v + 0.01).collect();
        let got = fd_eigenvalues(alpha, beta, 1.0, 1024, &|_| c(0.0), &|_| c(0.0), &seeds);
        for (g, e) in got.iter().zip(&exact) {
            assert!((g - e).norm() < 1e-6, "({alpha},{beta}) {g} vs {e}");
        }
    }
}

#[test]
fn forward_spectrum_matches_fd_oracle() {
    let cases: [(Potential, Potential, f64); 2] = [
        (|_| c(0.0), |t| c(t.sin()), FRAC_PI_2),
        (|t| C::from_polar(10.0, t), |t| c(t * (PI - t)), 1.0),
    ];
    for (p, q, a) in cases {
        let cfg = ProblemConfig::from_fn(0, 0, a, 1024, p).unwrap();
        let spec = spectrum(&cfg, &cfg.sample(q), 8).unwrap();
        let oracle = fd_eigenvalues(0, 0, a, 2048, &p, &q, &spec.lambda);
        for (ours, fd) in spec.lambda.iter().zip(&oracle) {
            assert!(rel(*ours, *fd) < 1e-6, "{ours} vs {fd}");
        }
    }
}

mod support;

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::sync::LazyLock;

use frozen_sl::basis_system::{build_basis, synthesize_from_coefficients, BasisSystem};
use frozen_sl::forward::{extract_xi, spectrum_with};
use frozen_sl::function_space::ProblemConfig;
use frozen_sl::input::InverseInput;
use frozen_sl::inverse::{isospectral_family, recover_potential};
use frozen_sl::unperturbed::compute_unperturbed;
use frozen_sl::Complex64 as C;
use proptest::prelude::*;
use support::*;

const N: usize = 8;

static SYMMETRIC: LazyLock<BasisSystem> = LazyLock::new(|| {
    let cfg = ProblemConfig::from_fn(0, 0, FRAC_PI_2, 1024, |_| c(0.0)).unwrap();
    build_basis(&compute_unperturbed(&cfg, N).unwrap()).unwrap()
});

fn input(basis: &BasisSystem, q_xi: &[C], extra: BTreeMap<usize, C>) -> InverseInput {
    let q = synthesize_from_coefficients(basis, q_xi).unwrap();
    InverseInput {
        config: basis.config().clone(),
        spectrum: spectrum_with(basis, &q).unwrap(),
        extra_xi: extra,
        n: N,
    }
}

#[test]
fn family_members_share_the_spectrum() {
    let basis = &*SYMMETRIC;
    let xi: Vec<C> = (1..=N).map(|j| C::new(1.0 / j as f64, 0.1)).collect();
    let variants: Vec<BTreeMap<usize, C>> = [0.0, 0.5, -2.0]
        .iter()
        .map(|s| basis.omega_set().iter().map(|&j| (j, C::new(*s, 1.0))).collect())
        .collect();
    let inp = input(basis, &xi, variants[0].clone());
    let family = isospectral_family(&inp, basis, &variants).unwrap();
    for (member, extra) in family.iter().zip(&variants) {
        let spec = spectrum_with(basis, &member.q).unwrap();
        for n in 1..=N / 2 {
            assert!(rel(spec.at(n), inp.spectrum.at(n)) < 1e-8);
        }
        let got = extract_xi(basis, &member.q).unwrap();
        for (&j, v) in extra {
            assert!((got[j - 1] - v).norm() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn potentials_in_the_span_are_recovered(phases in proptest::collection::vec(0.0f64..std::f64::consts::TAU, N)) {
        let basis = &*SYMMETRIC;
        let xi: Vec<C> = phases.iter().enumerate().map(|(j, t)| C::from_polar(0.5f64.powi(j as i32), *t)).collect();
        let extra = basis.omega_set().iter().map(|&j| (j, xi[j - 1])).collect();
        let inp = input(basis, &xi, extra);
        let rec = recover_potential(&inp, basis, false).unwrap();
        let truth = synthesize_from_coefficients(basis, &xi).unwrap();
        prop_assert!(rec.q.distance_l2(&truth).unwrap() < 1e-8);
    }
}

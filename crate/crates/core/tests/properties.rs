//! Property tests: functional equations of the special functions,
//! permutation invariance of the weights, cone enumeration, the partition of
//! the ordered simplex into interleaving domains, and error-bar calibration.

use itertools::Itertools;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use selberg_core::chains::{
    domain_membership, enumerate_maps, integrate_chain, integrate_domain, Chain, ChainIntegrand, Interval, OrderMap,
    Polynomial, QuadSpec,
};
use selberg_core::closed_forms::{sl3_discrete_rhs, ParamSet};
use selberg_core::identity_suite::{run_identity, Budget};
use selberg_core::integrands::*;
use selberg_core::lattice_series::{enumerate_cone, ConeSpec};
use selberg_core::numerics::{log_gamma_signed, sin_ratio};
use selberg_core::IdentityId;

fn non_integer() -> impl Strategy<Value = f64> {
    (-6.0f64..8.0).prop_filter("away from poles", |x| (x - x.round()).abs() > 1e-3)
}

fn distinct(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..5.0, n).prop_filter("separated", |v| {
        v.iter().tuple_combinations().all(|(a, b)| (a - b).abs() > 0.05)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gamma_recurrence(x in non_integer()) {
        let a = log_gamma_signed(x + 1.0).unwrap();
        let b = log_gamma_signed(x).unwrap();
        prop_assert_eq!(a.sign as f64, b.sign as f64 * x.signum());
        prop_assert!((a.logmag - b.logmag - x.abs().ln()).abs() < 1e-12 * (1.0 + a.logmag.abs()));
    }

    #[test]
    fn gamma_reflection(x in non_integer()) {
        let prod = log_gamma_signed(x).unwrap() * log_gamma_signed(1.0 - x).unwrap();
        let want = std::f64::consts::PI / (std::f64::consts::PI * x).sin();
        prop_assert!((prod.to_real() - want).abs() < 1e-10 * want.abs());
    }

    #[test]
    fn sine_ratio_matches_quotient(p in 0.01f64..0.49, q in 0.01f64..0.49) {
        let want = (std::f64::consts::PI * p).sin() / (std::f64::consts::PI * q).sin();
        prop_assert!((sin_ratio(p, q).unwrap() - want).abs() < 1e-12 * want.abs());
    }

    #[test]
    fn weight_w_symmetric(u in distinct(3), v in distinct(2), gamma in -0.3f64..-0.02, rot in 0usize..6) {
        let base = weight_w(&u, &v, gamma).unwrap();
        let perm = (0..3).permutations(3).nth(rot).unwrap();
        let pu: Vec<f64> = perm.iter().map(|&i| u[i]).collect();
        let pv = vec![v[1], v[0]];
        let moved = weight_w(&pu, &pv, gamma).unwrap();
        prop_assert!((base - moved).abs() <= 1e-11 * base.abs().max(1e-300));
    }

    #[test]
    fn weight_g_forms_agree(t in distinct(3), s in distinct(2)) {
        let t: Vec<f64> = t.iter().map(|x| x / 5.0).collect();
        let s: Vec<f64> = s.iter().map(|x| x / 5.0).collect();
        prop_assume!(t.iter().all(|a| s.iter().all(|b| (a - b).abs() > 1e-2)));
        let pt = ContinuousPoint::new(t, s);
        let a = weight_g_with(&pt, GForm::Shifted).unwrap();
        let b = weight_g_with(&pt, GForm::Diagonal).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        let rev = ContinuousPoint::new(pt.t.iter().rev().copied().collect(), pt.s.iter().rev().copied().collect());
        prop_assert!((weight_g(&rev).unwrap() - b).abs() <= 1e-9 * b.abs().max(1.0));
    }

    #[test]
    fn cone_enumeration_is_brute_force_filter(k1 in 1usize..=3, k2 in 0usize..=2, bound in 0usize..=3) {
        prop_assume!(k2 <= k1);
        let got: Vec<(Vec<i64>, Vec<i64>)> = enumerate_cone(&ConeSpec { k1, k2, gamma: -0.1, bound })
            .unwrap()
            .into_iter()
            .map(|p| (p.nu, p.nv))
            .sorted()
            .collect();
        let want: Vec<(Vec<i64>, Vec<i64>)> = (0..k1 + k2)
            .map(|_| 0..=bound as i64)
            .multi_cartesian_product()
            .map(|x| (x[..k1].to_vec(), x[k1..].to_vec()))
            .filter(|(nu, nv)| cone_contains(nu, nv))
            .sorted()
            .collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn discrete_closed_form_is_positive(z1 in 0.05f64..0.9, z2 in 0.05f64..0.9, gamma in -0.3f64..-0.02) {
        let p = ParamSet::series(2, 1, 1.3, gamma, z1, z2);
        prop_assert!(sl3_discrete_rhs(&p).unwrap().to_real() > 0.0);
    }
}

#[test]
fn registry_is_complete() {
    for id in IdentityId::ALL {
        let info = id.info();
        assert_eq!(info.id, id);
        assert!(info.default_tolerance > 0.0 && info.default_tolerance < 1.0);
        assert!(!info.title.is_empty() && !info.predicate.is_empty());
        assert_eq!(id.as_str().parse::<IdentityId>().unwrap(), id);
    }
    assert_eq!(
        IdentityId::ALL.iter().map(|i| i.as_str()).unique().count(),
        IdentityId::ALL.len()
    );
}

fn random_simplex_point(rng: &mut ChaCha8Rng, k1: usize, k2: usize) -> ContinuousPoint {
    let d = k1 - k2;
    loop {
        let mut t: Vec<f64> = (0..k1).map(|_| rng.random()).collect();
        let mut s: Vec<f64> = (0..k2).map(|_| rng.random()).collect();
        t.sort_by(|a, b| b.total_cmp(a));
        s.sort_by(|a, b| b.total_cmp(a));
        if (0..k2).all(|b| s[b] >= t[d + b]) {
            return ContinuousPoint::new(t, s);
        }
    }
}

#[test]
fn interleaving_domains_partition_the_simplex() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let maps = enumerate_maps(3, 2).unwrap();
    for _ in 0..100_000 {
        let pt = random_simplex_point(&mut rng, 3, 2);
        let hits = maps.iter().filter(|m| domain_membership(m, &pt, 0.0, 1.0)).count();
        assert_eq!(hits, 1, "{pt:?}");
    }
}

#[test]
fn domain_integrals_sum_to_simplex_integral() {
    let poly = Polynomial::random(2, 1, 5, 3, 4);
    let f = |t: &[f64], s: &[f64]| poly.eval(t, s);
    let g = ChainIntegrand::smooth(2, 1, &f);
    let q = QuadSpec::deterministic(8);
    let parts: f64 = enumerate_maps(2, 1)
        .unwrap()
        .iter()
        .map(|m| integrate_domain(&g, m, Interval::Unit, &q).unwrap().0)
        .sum();
    let whole = integrate_chain(&g, &Chain::simplex(2, 1).unwrap(), Interval::Unit, &q)
        .unwrap()
        .0;
    assert!((parts - whole).abs() < 1e-12);
}

/// At least 17 of 20 independent estimates land within three error bars.
#[test]
fn monte_carlo_error_bars_are_calibrated() {
    let p = ParamSet::sl2(2, 1.0, 1.0, 1.0);
    let f = ChainIntegrand::for_identity(Assembled::Selberg, &p).unwrap();
    let covered = (0..20)
        .filter(|&seed| {
            let q = QuadSpec::monte_carlo(20_000, seed);
            let (v, e) = integrate_domain(&f, &OrderMap { m: vec![] }, Interval::Unit, &q).unwrap();
            assert!(e > 0.0);
            (v - 1.0 / 12.0).abs() <= 3.0 * e
        })
        .count();
    assert!(covered >= 17, "{covered}/20");
}

#[test]
fn monte_carlo_records_are_reproducible() {
    let p = ParamSet::sl3(1, 1, 1.5, 1.2, 1.4, -0.1);
    let b = Budget {
        mc_samples: 200_000,
        ..Budget::default()
    };
    let a = run_identity(IdentityId::Exp3, &p, &b, 42).unwrap();
    let c = run_identity(IdentityId::Exp3, &p, &b, 42).unwrap();
    assert_eq!((a.lhs, a.lhs_err, a.rhs, a.passed), (c.lhs, c.lhs_err, c.rhs, c.passed));
    let d = run_identity(IdentityId::Exp3, &p, &b, 43).unwrap();
    assert_ne!(a.lhs, d.lhs);
}

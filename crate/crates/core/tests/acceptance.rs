//! Acceptance suite: one PASS/FAIL line per criterion, followed by a single
//! assertion that every criterion passed. Run with `--nocapture` to see the
//! report.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use selberg_core::chains::{integrate_chain, Chain, ChainIntegrand, Interval, Polynomial, QuadSpec};
use selberg_core::closed_forms::*;
use selberg_core::identity_suite::{run_grid, run_identity, Axis, Budget, GridSpec, VerificationRecord};
use selberg_core::integrands::{
    classify, f_directional, probe_directions, Assembled, LatticePoint, LimitConfig, PointClass,
};
use selberg_core::lattice_series::pde_residual;
use selberg_core::numerics::{log_gamma_signed, sin_ratio};
use selberg_core::recursions::{admissible_triples, aomoto_suite, jjl_shift_check, solve_j_closed};
use selberg_core::{IdentityId, ParamSet};

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

const SEED: u64 = 20_240_601;

fn record(id: IdentityId, p: &ParamSet, budget: &Budget) -> VerificationRecord {
    run_identity(id, p, budget, SEED).unwrap_or_else(|e| panic!("{id} at {p:?}: {e}"))
}

/// Relative standard error and deviation of a Monte Carlo record.
fn mc_stats(r: &VerificationRecord) -> (f64, f64) {
    (r.lhs_err / r.lhs.abs(), r.rel_dev)
}

fn c1_selberg() -> Verdict {
    let triples = [(2.5, 1.5, -0.1), (1.2, 2.2, -0.25), (1.0, 1.0, 1.0)];
    let mut worst = [0.0f64; 3];
    let mut slowest = Duration::ZERO;
    for k in 1..=3 {
        for &(a, b, c) in &triples {
            let start = Instant::now();
            let r = record(IdentityId::Selb, &ParamSet::sl2(k, a, b, c), &Budget::default());
            slowest = slowest.max(start.elapsed());
            worst[k - 1] = worst[k - 1].max(r.rel_dev);
        }
    }
    let twelfth = record(IdentityId::Selb, &ParamSet::sl2(2, 1.0, 1.0, 1.0), &Budget::default());
    let exact = rel(twelfth.lhs, 1.0 / 12.0);
    verdict(
        worst[0] <= 1e-6 && worst[1] <= 1e-6 && worst[2] <= 1e-4 && exact <= 1e-6 && slowest <= Duration::from_secs(30),
        format!(
            "max dev k=1 {:.1e}, k=2 {:.1e}, k=3 {:.1e}; 1/12 case {exact:.1e}; slowest run {slowest:.1?}",
            worst[0], worst[1], worst[2]
        ),
    )
}

fn c2_exponential() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for k in 1..=2 {
        let r = record(IdentityId::Exp, &ParamSet::sl2(k, 1.5, 1.0, -0.1), &Budget::default());
        let (sigma, dev) = mc_stats(&r);
        ok &= sigma <= 1e-3 && dev <= 3.0 * sigma;
        parts.push(format!("k={k} dev {dev:.1e} sigma {sigma:.1e}"));
    }
    verdict(ok, parts.join("; "))
}

fn c3_discrete() -> Verdict {
    let mut worst = 0.0f64;
    for k in 1..=3 {
        for z in [0.3, 0.6] {
            let r = record(
                IdentityId::Dexp,
                &ParamSet::series(k, 0, 1.3, -0.2, z, 0.5),
                &Budget::default(),
            );
            worst = worst.max(r.rel_dev);
        }
    }
    verdict(worst <= 1e-8, format!("max dev {worst:.1e} over 6 runs"))
}

fn c4_sl3_discrete() -> Verdict {
    let mut worst = 0.0f64;
    let mut n = 0;
    for (k1, k2) in [(1, 1), (2, 1), (2, 2), (3, 1)] {
        for z1 in [0.2, 0.4] {
            for z2 in [0.2, 0.4] {
                let r = record(
                    IdentityId::Dexp3,
                    &ParamSet::series(k1, k2, 1.3, -0.15, z1, z2),
                    &Budget::default(),
                );
                worst = worst.max(r.rel_dev);
                n += 1;
            }
        }
    }
    verdict(worst <= 1e-8, format!("max dev {worst:.1e} over {n} runs"))
}

fn c5_sl3_exponential() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for (k1, k2) in [(1, 1), (2, 1)] {
        let r = record(
            IdentityId::Exp3,
            &ParamSet::sl3(k1, k2, 1.5, 1.2, 1.4, -0.1),
            &Budget::default(),
        );
        let (sigma, dev) = mc_stats(&r);
        ok &= sigma <= 2e-3 && dev <= 3.0 * sigma;
        parts.push(format!("({k1},{k2}) dev {dev:.1e} sigma {sigma:.1e}"));
    }
    verdict(ok, parts.join("; "))
}

fn c6_sl3_selberg() -> Verdict {
    let mut worst = 0.0f64;
    for id in [IdentityId::Selb3, IdentityId::Selb30] {
        for (k1, k2) in [(1, 1), (2, 1)] {
            let r = record(id, &ParamSet::sl3(k1, k2, 1.3, 0.7, 0.9, -0.1), &Budget::default());
            worst = worst.max(r.rel_dev);
        }
    }
    verdict(worst <= 1e-5, format!("max dev {worst:.1e} over 4 deterministic runs"))
}

fn c7_support() -> Verdict {
    let r = record(
        IdentityId::FvalSupport,
        &ParamSet::series(2, 1, 1.3, -0.15, 0.3, 0.3),
        &Budget::default(),
    );
    verdict(
        r.rel_dev <= 1e-8,
        format!("max off-cone |F| {:.1e}, median in-cone |F| {:.2e}", r.lhs, r.rhs),
    )
}

fn c8_direction_independence() -> Verdict {
    let p = ParamSet::series(2, 1, 1.3, -0.15, 0.3, 0.3);
    let cfg = LimitConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    let mut found = 0;
    let mut singular = 0;
    while found < 20 {
        let mut nu: Vec<i64> = (0..2).map(|_| rng.random_range(0..=4)).collect();
        let mut nv: Vec<i64> = vec![rng.random_range(0..=4)];
        nu.sort_unstable_by(|a, b| b.cmp(a));
        nv.sort_unstable_by(|a, b| b.cmp(a));
        let pt = LatticePoint::from_integer_parts(nu, nv, p.gamma);
        if !pt.in_cone {
            continue;
        }
        found += 1;
        singular += usize::from(classify(&pt, &p) == PointClass::Singular);
        let (d1, d2) = probe_directions(&pt, SEED);
        let a = f_directional(&pt, &p, &d1, &cfg).unwrap();
        let b = f_directional(&pt, &p, &d2, &cfg).unwrap();
        worst = worst.max((a - b).abs() / a.abs().max(b.abs()));
    }
    verdict(
        worst <= 1e-6,
        format!("max two-direction disagreement {worst:.1e} at 20 points ({singular} on removable singularities)"),
    )
}

fn c9_pde() -> Verdict {
    let r = pde_residual(&ParamSet::series(2, 1, 1.3, -0.15, 0.3, 0.3), 1e-4).unwrap();
    // The two candidate z2 coefficients coincide on the diagonal; separate them off it.
    let off = pde_residual(&ParamSet::series(2, 2, 1.3, -0.15, 0.2, 0.4), 1e-4).unwrap();
    verdict(
        r.z1 <= 1e-6 && r.z2 <= 1e-6,
        format!(
            "z1 eq {:.1e}, z2 eq {:.1e}; at (2,2), z = (0.2, 0.4) the z2 eq gives {:.1e} with a z2 denominator, {:.1e} with z1",
            r.z1, r.z2, off.z2, off.z2_printed
        ),
    )
}

fn c10_eps_link() -> Verdict {
    let r = record(
        IdentityId::EpsLimitLink,
        &ParamSet::sl3(2, 1, 1.5, 1.2, 1.4, -0.1),
        &Budget::default(),
    );
    verdict(r.rel_dev <= 5e-2, format!("deviation {:.2e} at eps = 1e-3", r.rel_dev))
}

fn c11_aomoto() -> Verdict {
    let p = |k| ParamSet::sl2(k, 1.5, 1.2, -0.1);
    let mut exact = 0.0f64;
    for k in 1..=5 {
        let rep = aomoto_suite(k, &p(k), None).unwrap();
        exact = rep
            .ratio_residuals
            .iter()
            .chain(&rep.boundary_residuals)
            .fold(exact, |m, &x| m.max(x));
    }
    let rep = aomoto_suite(2, &p(2), Some(&QuadSpec::deterministic(16))).unwrap();
    let quad = rep.quadrature.iter().map(|q| q.3).fold(0.0f64, f64::max);
    verdict(
        exact <= 1e-12 && quad <= 1e-4 && rep.quadrature.len() == 3,
        format!("relations max {exact:.1e} for k <= 5; quadrature k=2 max dev {quad:.1e}"),
    )
}

fn c12_recursions() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    let ranges = vec![
        (Axis::Alpha, 0.8, 2.0),
        (Axis::Beta1, 0.6, 1.6),
        (Axis::Beta2, 0.6, 1.6),
        (Axis::Gamma, -0.3, -0.02),
    ];
    for (k1, k2) in [(2, 1), (2, 2), (3, 2)] {
        let grid = GridSpec::Random {
            base: ParamSet::sl3(k1, k2, 1.3, 0.8, 1.1, -0.15),
            draws: 50,
            ranges: ranges.clone(),
            seed: SEED,
        };
        let out = run_grid(IdentityId::JjjRelations, &grid, &Budget::default(), SEED, None);
        let worst = out.records.iter().map(|r| r.lhs).fold(0.0f64, f64::max);
        ok &= out.errors.is_empty() && out.records.len() == 50 && worst <= 1e-10;
        parts.push(format!("({k1},{k2}) residual {worst:.1e}"));
    }

    let p = ParamSet::sl3(2, 1, 1.3, 0.8, 1.1, -0.15);
    let (j, jt) = solve_j_closed(&p).unwrap();
    let chain = Chain::selberg(2, 1, p.gamma).unwrap();
    let mut cases = Vec::new();
    for t in admissible_triples(2, 1) {
        let (l1, l2, m) = (t.l1, t.l2, t.m);
        cases.push((Assembled::J { l1, l2, m }, j.get(l1, l2, m).unwrap().to_real()));
        cases.push((Assembled::JTilde { l1, l2, m }, jt.get(l1, l2, m).unwrap().to_real()));
    }
    let grounded: Vec<(f64, f64)> = cases
        .par_iter()
        .enumerate()
        .map(|(i, &(which, want))| {
            let f = ChainIntegrand::for_identity(which, &p).unwrap();
            let q = QuadSpec::monte_carlo(1_000_000, SEED + i as u64);
            let (v, e) = integrate_chain(&f, &chain, Interval::Unit, &q).unwrap();
            ((v - want).abs() / e, e / want.abs())
        })
        .collect();
    let z = grounded.iter().map(|g| g.0).fold(0.0f64, f64::max);
    let sigma = grounded.iter().map(|g| g.1).fold(0.0f64, f64::max);
    ok &= z <= 3.0;
    parts.push(format!(
        "table vs MC over {} entries: max {z:.2} sigma (rel sigma <= {sigma:.1e})",
        cases.len()
    ));

    let mut closed = 0.0f64;
    for (k1, k2) in [(1, 1), (2, 1), (2, 2), (3, 2)] {
        let p = ParamSet::sl3(k1, k2, 1.3, 0.8, 1.1, -0.15);
        let (j, jt) = solve_j_closed(&p).unwrap();
        closed = closed.max(rel(
            j.get(0, k2, 0).unwrap().to_real(),
            j_closed_forms(JForm::J0k, &p).unwrap().to_real(),
        ));
        closed = closed.max(rel(
            j.get(k1, k2, 0).unwrap().to_real(),
            j_closed_forms(JForm::JK0, &p).unwrap().to_real(),
        ));
        for m in 0..=k2 {
            let want = j_closed_forms(JForm::JTildeK(m), &p).unwrap().to_real();
            closed = closed.max(rel(jt.get(k1, k2, m).unwrap().to_real(), want));
        }
        for l in 0..=k2 {
            closed = closed.max(jjl_shift_check(&p, l).unwrap());
        }
    }
    ok &= closed <= 1e-8;
    parts.push(format!("closed forms and shift identity max {closed:.1e}"));
    verdict(ok, parts.join("; "))
}

/// Rejection sampling of the ordered domain inside the unit cube.
fn rejection_oracle(poly: &Polynomial, samples: usize, seed: u64) -> (f64, f64) {
    let (k1, k2) = (poly.k1, poly.k2);
    let d = k1 - k2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sum, mut sum2) = (0.0, 0.0);
    let mut t = vec![0.0; k1];
    let mut s = vec![0.0; k2];
    for _ in 0..samples {
        t.iter_mut().for_each(|x| *x = rng.random());
        s.iter_mut().for_each(|x| *x = rng.random());
        let inside = t.windows(2).all(|w| w[0] >= w[1])
            && s.windows(2).all(|w| w[0] >= w[1])
            && (0..k2).all(|b| s[b] >= t[d + b]);
        if inside {
            let v = poly.eval(&t, &s);
            sum += v;
            sum2 += v * v;
        }
    }
    let n = samples as f64;
    let mean = sum / n;
    (mean, ((sum2 / n - mean * mean) / (n - 1.0)).sqrt())
}

fn c13_chain_decomposition() -> Verdict {
    let ranks = [(1, 1), (2, 1), (2, 2), (3, 1), (3, 2)];
    let results: Vec<(f64, f64)> = (0..20u64)
        .into_par_iter()
        .map(|i| {
            let (k1, k2) = ranks[i as usize % ranks.len()];
            let poly = Polynomial::random(k1, k2, 6, 4, SEED + i);
            let f = |t: &[f64], s: &[f64]| poly.eval(t, s);
            let g = ChainIntegrand::smooth(k1, k2, &f);
            let chain = Chain::simplex(k1, k2).unwrap();
            let (v, _) = integrate_chain(&g, &chain, Interval::Unit, &QuadSpec::deterministic(8)).unwrap();
            let exact = rel(v, poly.simplex_integral());
            let (mc, sigma) = rejection_oracle(&poly, 2_000_000, SEED + 100 + i);
            (exact, (v - mc).abs() / sigma)
        })
        .collect();
    let exact = results.iter().map(|r| r.0).fold(0.0f64, f64::max);
    let z = results.iter().map(|r| r.1).fold(0.0f64, f64::max);
    verdict(
        exact <= 1e-6 && z <= 3.0,
        format!("20 polynomials: max dev vs exact {exact:.1e}; max distance to rejection oracle {z:.2} sigma"),
    )
}

fn c14_structural() -> Verdict {
    let mut ok = true;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for _ in 0..1000 {
        let x: f64 = rng.random_range(-6.0..8.0);
        if (x - x.round()).abs() < 1e-3 {
            continue;
        }
        let a = log_gamma_signed(x + 1.0).unwrap().to_real();
        let b = log_gamma_signed(x).unwrap().to_real();
        ok &= rel(a, x * b) < 1e-11;
        let refl = b * log_gamma_signed(1.0 - x).unwrap().to_real();
        ok &= rel(refl, std::f64::consts::PI / (std::f64::consts::PI * x).sin()) < 1e-10;
    }
    ok &= (sin_ratio(0.2, 0.4).unwrap() - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-14;
    for id in IdentityId::ALL {
        ok &= id.info().default_tolerance > 0.0 && id.as_str().parse::<IdentityId>().ok() == Some(id);
    }
    let r = record(
        IdentityId::Dexp3,
        &ParamSet::series(2, 1, 1.3, -0.15, 0.3, 0.3),
        &Budget::default(),
    );
    let back: VerificationRecord = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    ok &= back == r;
    verdict(
        ok,
        "gamma recurrence and reflection, sine ratio, registry, record round trip; see the property and CLI suites",
    )
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Verdict, u64); 14] = [
        ("1 classic Selberg quadrature", c1_selberg, 270),
        ("2 exponential Selberg Monte Carlo", c2_exponential, 60),
        ("3 discrete exponential series", c3_discrete, 10),
        ("4 sl3 discrete series", c4_sl3_discrete, 120),
        ("5 sl3 exponential Monte Carlo", c5_sl3_exponential, 120),
        ("6 sl3 Selberg chain quadrature", c6_sl3_selberg, 180),
        ("7 summand support", c7_support, 30),
        ("8 direction independence", c8_direction_independence, 30),
        ("9 dynamical equations", c9_pde, 60),
        ("10 epsilon limit link", c10_eps_link, 10),
        ("11 Aomoto relations", c11_aomoto, 60),
        ("12 J recursions", c12_recursions, 300),
        ("13 chain decomposition", c13_chain_decomposition, 120),
        ("14 structural suites", c14_structural, 60),
    ];
    let mut failed = Vec::new();
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let v = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(limit);
        let passed = v.passed && in_time;
        println!(
            "{} criterion {name}: {} [{elapsed:.1?}, limit {limit} s]",
            if passed { "PASS" } else { "FAIL" },
            v.detail
        );
        if !passed {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

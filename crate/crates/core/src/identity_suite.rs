//! Registry binding each identity to its left-hand-side engine, closed form,
//! validity predicate and tolerance policy.

use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chains::{
    integrate_chain, Chain, ChainIntegrand, Interval, Polynomial, QuadSpec, Scheme, MAX_DETERMINISTIC_DIM,
};
use crate::closed_forms::{
    discrete_exp_rhs, exp_selberg_rhs, j_closed_forms, selberg_rhs, sl3_discrete_rhs, sl3_exp_rhs, sl3_selberg0_rhs,
    sl3_selberg_rhs, JForm, ParamSet,
};
use crate::error::{Error, Result};
use crate::integrands::{f_limit_with, Assembled, LatticePoint, LimitConfig, SymTable};
use crate::lattice_series::{default_max_bound, epsilon_link, pde_residual, sum_discrete, SeriesKind};
use crate::numerics::log_gamma_signed;
use crate::recursions::{aomoto_suite, jjl_shift_check, solve_j_closed, verify_relations, AOMOTO_QUAD_MAX_K};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityId {
    Selb,
    Exp,
    Dexp,
    Dexp3,
    Exp3,
    Selb3,
    Selb30,
    Aomoto,
    JjjRelations,
    JjlShift,
    J0k,
    ChainDecomp,
    FvalSupport,
    PdeResidual,
    StirlingRatio,
    EpsLimitLink,
}

impl IdentityId {
    pub const ALL: [IdentityId; 16] = [
        IdentityId::Selb,
        IdentityId::Exp,
        IdentityId::Dexp,
        IdentityId::Dexp3,
        IdentityId::Exp3,
        IdentityId::Selb3,
        IdentityId::Selb30,
        IdentityId::Aomoto,
        IdentityId::JjjRelations,
        IdentityId::JjlShift,
        IdentityId::J0k,
        IdentityId::ChainDecomp,
        IdentityId::FvalSupport,
        IdentityId::PdeResidual,
        IdentityId::StirlingRatio,
        IdentityId::EpsLimitLink,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            IdentityId::Selb => "selb",
            IdentityId::Exp => "exp",
            IdentityId::Dexp => "dexp",
            IdentityId::Dexp3 => "dexp3",
            IdentityId::Exp3 => "exp3",
            IdentityId::Selb3 => "selb3",
            IdentityId::Selb30 => "selb30",
            IdentityId::Aomoto => "aomoto",
            IdentityId::JjjRelations => "jjj_relations",
            IdentityId::JjlShift => "jjl_shift",
            IdentityId::J0k => "j0k",
            IdentityId::ChainDecomp => "chain_decomp",
            IdentityId::FvalSupport => "fval_support",
            IdentityId::PdeResidual => "pde_residual",
            IdentityId::StirlingRatio => "stirling_ratio",
            IdentityId::EpsLimitLink => "eps_limit_link",
        }
    }

    /// Registry entry of this identity.
    pub fn info(self) -> IdentityInfo {
        let (title, predicate, engine) = match self {
            IdentityId::Selb => (
                "Selberg integral over the ordered simplex in [0,1]",
                "alpha > 0, beta > 0, gamma != 0, gamma > -min(1/k, alpha/(k-1), beta/(k-1))",
                Engine::Quadrature,
            ),
            IdentityId::Exp => (
                "Exponential Selberg integral over [0,+inf)",
                "alpha > 0, gamma != 0, gamma > -min(1/k, alpha/(k-1))",
                Engine::MonteCarlo,
            ),
            IdentityId::Dexp => (
                "Discrete exponential Selberg series over the lattice cone",
                "0 < z < 1, gamma != 0",
                Engine::Series,
            ),
            IdentityId::Dexp3 => (
                "Discrete exponential Selberg series, sl3 case",
                "k1 >= k2, 0 < z1 < 1, 0 < z2 < 1, gamma != 0",
                Engine::Series,
            ),
            IdentityId::Exp3 => (
                "Exponential Selberg integral over the chain on [0,+inf), sl3 case",
                "k1 >= k2 >= 1, alpha > 0, beta1 > 0, beta2 > 0, gamma < 0",
                Engine::MonteCarlo,
            ),
            IdentityId::Selb3 => (
                "Selberg integral over the chain on [0,1] with the rational weight, sl3 case",
                "k1 >= k2, alpha > 0, beta1 > 0, beta2 > 0, gamma < 0",
                Engine::Quadrature,
            ),
            IdentityId::Selb30 => (
                "Selberg integral over the chain on [0,1] without rational weight, sl3 case",
                "k1 >= k2, alpha > 0, beta1 > 0, beta2 > 0, gamma < 0",
                Engine::Quadrature,
            ),
            IdentityId::Aomoto => (
                "Aomoto integrals: ratio relations, boundary values and quadrature",
                "alpha > 0, beta > 0, gamma != 0",
                Engine::Quadrature,
            ),
            IdentityId::JjjRelations => (
                "Linear relations among the J and J~ integrals",
                "k1 >= k2, generic parameters (pivots >= 1e-6)",
                Engine::Recursion,
            ),
            IdentityId::JjlShift => (
                "Parameter-shift identity between J(alpha+1) and J(beta1+1)",
                "k1 >= k2, generic parameters",
                Engine::Recursion,
            ),
            IdentityId::J0k => (
                "Closed form of J_{0,k2,0} reached through the relations",
                "k1 >= k2, generic parameters",
                Engine::Recursion,
            ),
            IdentityId::ChainDecomp => (
                "The simplex Delta^{k1,k2} equals the sum of the interleaving domains D_M",
                "k1 >= k2, k1 + k2 <= 5",
                Engine::Quadrature,
            ),
            IdentityId::FvalSupport => (
                "Summand vanishes at lattice points outside the cone",
                "k1 >= k2, 0 < z1, z2 < 1, gamma != 0",
                Engine::Series,
            ),
            IdentityId::PdeResidual => (
                "Series satisfies the dynamical differential equations",
                "k1 >= k2, 0 < z1, z2 < 1",
                Engine::Series,
            ),
            IdentityId::StirlingRatio => (
                "Gamma(x+c)/Gamma(x+d) ~ x^(c-d) as x -> +inf (c = alpha, d = beta1)",
                "alpha, beta1 finite",
                Engine::Closed,
            ),
            IdentityId::EpsLimitLink => (
                "Discrete sl3 product tends to the exponential one as z_i = exp(-eps beta_i)",
                "alpha > 0, beta1 > 0, beta2 > 0",
                Engine::Closed,
            ),
        };
        IdentityInfo {
            id: self,
            title,
            predicate,
            engine,
            default_tolerance: match engine {
                Engine::Series if self == IdentityId::PdeResidual => PDE_TOL,
                Engine::Series => SERIES_TOL,
                Engine::Quadrature => QUADRATURE_TOL,
                Engine::MonteCarlo => MC_TOL_FLOOR,
                Engine::Recursion => match self {
                    IdentityId::JjjRelations => 1e-10,
                    _ => SERIES_TOL,
                },
                Engine::Closed => match self {
                    IdentityId::EpsLimitLink => 5e-2,
                    _ => QUADRATURE_TOL,
                },
            },
        }
    }
}

impl std::fmt::Display for IdentityId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IdentityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IdentityId::ALL
            .iter()
            .copied()
            .find(|i| i.as_str() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown identity '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Engine {
    Series,
    Quadrature,
    MonteCarlo,
    Recursion,
    Closed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityInfo {
    pub id: IdentityId,
    pub title: &'static str,
    pub predicate: &'static str,
    pub engine: Engine,
    pub default_tolerance: f64,
}

/// Tolerance of series identities.
pub const SERIES_TOL: f64 = 1e-8;
/// Tolerance of deterministic quadrature.
pub const QUADRATURE_TOL: f64 = 1e-6;
/// Floor of the Monte Carlo tolerance, which is otherwise three standard errors.
pub const MC_TOL_FLOOR: f64 = 1e-3;
/// Range of `gamma` in which quadrature targets are calibrated.
pub const GAMMA_WORKING_RANGE: (f64, f64) = (-0.3, -0.02);

/// Work limits of one verification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub nodes_per_axis: usize,
    pub mc_samples: usize,
    pub series_rel_tol: f64,
    /// Overrides the default largest shell.
    pub max_bound: Option<usize>,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            nodes_per_axis: 16,
            mc_samples: 4_000_000,
            series_rel_tol: 1e-12,
            max_bound: None,
        }
    }
}

/// One verification outcome. `lhs_err` is an absolute error bar; precision
/// is sufficient when `lhs_err / |lhs| <= tolerance / 3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationRecord {
    pub identity_id: IdentityId,
    pub params: ParamSet,
    pub lhs: f64,
    pub lhs_err: f64,
    pub rhs: f64,
    pub rel_dev: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub reason: Option<String>,
    pub seed: u64,
    pub runtime_ms: u64,
}

struct Outcome {
    lhs: f64,
    lhs_err: f64,
    rhs: f64,
    rel_dev: f64,
    /// Tolerance computed by the engine (Monte Carlo); otherwise the default.
    tolerance: Option<f64>,
    note: Option<String>,
}

impl Outcome {
    fn compare(lhs: f64, lhs_err: f64, rhs: f64) -> Self {
        Outcome {
            lhs,
            lhs_err,
            rhs,
            rel_dev: rel(lhs, rhs),
            tolerance: None,
            note: None,
        }
    }

    /// A residual-type check whose target value is zero.
    fn residual(value: f64) -> Self {
        Outcome {
            lhs: value,
            lhs_err: 0.0,
            rhs: 0.0,
            rel_dev: value,
            tolerance: None,
            note: None,
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

fn invalid(id: IdentityId, what: &str) -> Error {
    Error::InvalidParams(format!("{id}: {what}"))
}

fn require(cond: bool, id: IdentityId, what: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(invalid(id, what))
    }
}

fn check_selberg_region(id: IdentityId, k: usize, alpha: f64, beta: Option<f64>, gamma: f64) -> Result<()> {
    require(k >= 1, id, "k >= 1")?;
    require(alpha > 0.0, id, "alpha > 0")?;
    if let Some(b) = beta {
        require(b > 0.0, id, "beta > 0")?;
    }
    require(gamma != 0.0, id, "gamma != 0 (pole of Gamma(gamma))")?;
    let mut bound = 1.0 / k as f64;
    if k > 1 {
        let km = (k - 1) as f64;
        bound = bound.min(alpha / km);
        if let Some(b) = beta {
            bound = bound.min(b / km);
        }
    }
    require(gamma > -bound, id, "gamma > -min(1/k, alpha/(k-1), beta/(k-1))")
}

fn check_sl3_region(id: IdentityId, p: &ParamSet, need_k2: bool) -> Result<()> {
    require(p.k1 >= p.k2, id, "k1 >= k2")?;
    require(p.k1 >= 1, id, "k1 >= 1")?;
    if need_k2 {
        require(p.k2 >= 1, id, "k2 >= 1")?;
    }
    require(p.alpha > 0.0, id, "alpha > 0")?;
    require(p.beta1 > 0.0, id, "beta1 > 0")?;
    require(p.beta2 > 0.0, id, "beta2 > 0")?;
    require(p.gamma < 0.0, id, "gamma < 0")
}

fn check_series_region(id: IdentityId, p: &ParamSet, sl2: bool) -> Result<()> {
    require(p.k1 >= 1, id, "k1 >= 1")?;
    require(sl2 || p.k1 >= p.k2, id, "k1 >= k2")?;
    require(p.z1 > 0.0 && p.z1 < 1.0, id, "0 < z1 < 1")?;
    if !sl2 && p.k2 > 0 {
        require(p.z2 > 0.0 && p.z2 < 1.0, id, "0 < z2 < 1")?;
    }
    require(p.gamma != 0.0, id, "gamma != 0")
}

fn gamma_note(p: &ParamSet) -> Option<String> {
    let (lo, hi) = GAMMA_WORKING_RANGE;
    if p.gamma < lo || p.gamma > hi {
        Some(format!("gamma = {} outside the calibrated range [{lo}, {hi}]", p.gamma))
    } else {
        None
    }
}

fn quad_spec(dim: usize, budget: &Budget, seed: u64) -> QuadSpec {
    if dim <= MAX_DETERMINISTIC_DIM {
        QuadSpec::deterministic(budget.nodes_per_axis)
    } else {
        QuadSpec::monte_carlo(budget.mc_samples, seed)
    }
}

fn chain_outcome(
    which: Assembled,
    p: &ParamSet,
    chain: &Chain,
    interval: Interval,
    q: &QuadSpec,
    rhs: f64,
) -> Result<Outcome> {
    let f = ChainIntegrand::for_identity(which, p)?;
    let (v, e) = integrate_chain(&f, chain, interval, q)?;
    let mut out = Outcome::compare(v, e, rhs);
    if q.scheme == Scheme::MonteCarlo {
        out.tolerance = Some((3.0 * e / v.abs()).max(MC_TOL_FLOOR));
    }
    Ok(out)
}

fn run_selb(p: &ParamSet, budget: &Budget, seed: u64) -> Result<Outcome> {
    let id = IdentityId::Selb;
    check_selberg_region(id, p.k1, p.alpha, Some(p.beta1), p.gamma)?;
    let q = ParamSet { k2: 0, ..*p };
    let rhs = selberg_rhs(&q)?.to_real();
    let spec = quad_spec(q.k1, budget, seed);
    chain_outcome(
        Assembled::Selberg,
        &q,
        &Chain::simplex(q.k1, 0)?,
        Interval::Unit,
        &spec,
        rhs,
    )
}

fn run_exp(p: &ParamSet, budget: &Budget, seed: u64) -> Result<Outcome> {
    let id = IdentityId::Exp;
    check_selberg_region(id, p.k1, p.alpha, None, p.gamma)?;
    let q = ParamSet { k2: 0, ..*p };
    let rhs = exp_selberg_rhs(&q)?.to_real();
    let spec = QuadSpec::monte_carlo(budget.mc_samples, seed);
    chain_outcome(
        Assembled::Exp,
        &q,
        &Chain::simplex(q.k1, 0)?,
        Interval::HalfLine,
        &spec,
        rhs,
    )
}

fn series_outcome(kind: SeriesKind, p: &ParamSet, budget: &Budget, rhs: f64) -> Result<Outcome> {
    let max_bound = budget.max_bound.unwrap_or_else(|| default_max_bound(p.k1, p.k2));
    let r = sum_discrete(kind, p, budget.series_rel_tol, max_bound)?;
    let mut out = Outcome::compare(r.partial_sum, r.last_shell.abs(), rhs);
    if !r.converged {
        out.note = Some(format!("series not converged at bound {}", r.bound));
    }
    Ok(out)
}

fn run_dexp(p: &ParamSet, budget: &Budget) -> Result<Outcome> {
    check_series_region(IdentityId::Dexp, p, true)?;
    let q = ParamSet { k2: 0, ..*p };
    series_outcome(SeriesKind::Dexp, &q, budget, discrete_exp_rhs(&q)?.to_real())
}

fn run_dexp3(p: &ParamSet, budget: &Budget) -> Result<Outcome> {
    check_series_region(IdentityId::Dexp3, p, false)?;
    series_outcome(SeriesKind::Dexp3, p, budget, sl3_discrete_rhs(p)?.to_real())
}

fn run_exp3(p: &ParamSet, budget: &Budget, seed: u64) -> Result<Outcome> {
    check_sl3_region(IdentityId::Exp3, p, false)?;
    let rhs = sl3_exp_rhs(p)?.to_real();
    let spec = QuadSpec::monte_carlo(budget.mc_samples, seed);
    let chain = Chain::selberg(p.k1, p.k2, p.gamma)?;
    let mut out = chain_outcome(Assembled::Exp3, p, &chain, Interval::HalfLine, &spec, rhs)?;
    out.note = gamma_note(p);
    Ok(out)
}

fn run_selb3(id: IdentityId, p: &ParamSet, budget: &Budget, seed: u64) -> Result<Outcome> {
    check_sl3_region(id, p, false)?;
    let (which, rhs) = if id == IdentityId::Selb3 {
        (Assembled::Selb3, sl3_selberg_rhs(p)?)
    } else {
        (Assembled::Selb30, sl3_selberg0_rhs(p)?)
    };
    let spec = quad_spec(p.k1 + p.k2, budget, seed);
    let chain = Chain::selberg(p.k1, p.k2, p.gamma)?;
    let mut out = chain_outcome(which, p, &chain, Interval::Unit, &spec, rhs.to_real())?;
    out.note = gamma_note(p);
    Ok(out)
}

fn run_aomoto(p: &ParamSet, budget: &Budget, seed: u64) -> Result<Outcome> {
    let id = IdentityId::Aomoto;
    check_selberg_region(id, p.k1, p.alpha, Some(p.beta1), p.gamma)?;
    let quad = quad_spec(p.k1, budget, seed);
    let use_quad = p.k1 <= AOMOTO_QUAD_MAX_K;
    let report = aomoto_suite(p.k1, p, use_quad.then_some(&quad))?;
    let exact = report
        .ratio_residuals
        .iter()
        .chain(report.boundary_residuals.iter())
        .fold(0.0f64, |m, &x| m.max(x));
    let worst = report.quadrature.iter().max_by(|a, b| a.3.total_cmp(&b.3)).copied();
    let mut out = match worst {
        Some((_, v, e, dev)) => Outcome {
            lhs: v,
            lhs_err: e,
            rhs: v / (1.0 + dev),
            rel_dev: dev.max(exact),
            tolerance: None,
            note: None,
        },
        None => Outcome::residual(exact),
    };
    if let Some((l, v, _, _)) = worst {
        let want = crate::closed_forms::aomoto_rhs(
            p.k1,
            l,
            &ParamSet { k2: 0, ..*p },
            crate::closed_forms::AomotoForm::Mixed,
        )?;
        out.rhs = want.to_real();
        out.rel_dev = rel(v, out.rhs).max(exact);
        out.note = Some(format!("worst l = {l}; exact relations max residual {exact:.3e}"));
    }
    Ok(out)
}

fn run_jjj(p: &ParamSet) -> Result<Outcome> {
    require(p.k1 >= p.k2, IdentityId::JjjRelations, "k1 >= k2")?;
    let (j, jt) = solve_j_closed(p)?;
    let worst = verify_relations(&j, p)
        .into_iter()
        .chain(verify_relations(&jt, p))
        .max_by(|a, b| a.residual.total_cmp(&b.residual))
        .map(|r| (r.residual, format!("{:?} {}", r.family, r.relation)));
    let mut out = Outcome::residual(worst.as_ref().map_or(0.0, |w| w.0));
    out.note = worst.map(|w| format!("largest residual at {}", w.1));
    Ok(out)
}

fn run_jjl(p: &ParamSet) -> Result<Outcome> {
    require(p.k1 >= p.k2, IdentityId::JjlShift, "k1 >= k2")?;
    let mut worst = 0.0f64;
    for l in 0..=p.k2 {
        worst = worst.max(jjl_shift_check(p, l)?);
    }
    Ok(Outcome::residual(worst))
}

fn run_j0k(p: &ParamSet) -> Result<Outcome> {
    require(p.k1 >= p.k2, IdentityId::J0k, "k1 >= k2")?;
    let (j, _) = solve_j_closed(p)?;
    let lhs = j.get(0, p.k2, 0)?.to_real();
    let rhs = j_closed_forms(JForm::J0k, p)?.to_real();
    Ok(Outcome::compare(lhs, 0.0, rhs))
}

fn run_chain_decomp(p: &ParamSet, budget: &Budget, seed: u64) -> Result<Outcome> {
    let id = IdentityId::ChainDecomp;
    require(p.k1 >= p.k2, id, "k1 >= k2")?;
    require(p.k1 + p.k2 <= MAX_DETERMINISTIC_DIM, id, "k1 + k2 <= 5")?;
    require(p.k1 + p.k2 >= 1, id, "k1 + k2 >= 1")?;
    let poly = Polynomial::random(p.k1, p.k2, 6, 4, seed);
    let f = |t: &[f64], s: &[f64]| poly.eval(t, s);
    let integrand = ChainIntegrand::smooth(p.k1, p.k2, &f);
    let nodes = budget.nodes_per_axis.min(8);
    let (v, e) = integrate_chain(
        &integrand,
        &Chain::simplex(p.k1, p.k2)?,
        Interval::Unit,
        &QuadSpec::deterministic(nodes),
    )?;
    Ok(Outcome::compare(v, e, poly.simplex_integral()))
}

fn random_off_cone(rng: &mut ChaCha8Rng, k1: usize, k2: usize, gamma: f64) -> LatticePoint {
    loop {
        let nu = (0..k1).map(|_| rng.random_range(-6..=6)).collect();
        let nv = (0..k2).map(|_| rng.random_range(-6..=6)).collect();
        let pt = LatticePoint::from_integer_parts(nu, nv, gamma);
        if !pt.in_cone {
            return pt;
        }
    }
}

fn random_in_cone(rng: &mut ChaCha8Rng, k1: usize, k2: usize, gamma: f64) -> LatticePoint {
    loop {
        let mut nu: Vec<i64> = (0..k1).map(|_| rng.random_range(0..=6)).collect();
        let mut nv: Vec<i64> = (0..k2).map(|_| rng.random_range(0..=6)).collect();
        nu.sort_unstable_by(|a, b| b.cmp(a));
        nv.sort_unstable_by(|a, b| b.cmp(a));
        let pt = LatticePoint::from_integer_parts(nu, nv, gamma);
        if pt.in_cone {
            return pt;
        }
    }
}

/// Number of random points on each side of the support check.
pub const SUPPORT_POINTS: usize = 50;

fn run_support(p: &ParamSet, seed: u64) -> Result<Outcome> {
    let id = IdentityId::FvalSupport;
    check_series_region(id, p, false)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sym = SymTable::new(p.k1, p.k2)?;
    let cfg = LimitConfig {
        seed,
        ..LimitConfig::default()
    };
    let off: Vec<LatticePoint> = (0..SUPPORT_POINTS)
        .map(|_| random_off_cone(&mut rng, p.k1, p.k2, p.gamma))
        .collect();
    let inside: Vec<LatticePoint> = (0..SUPPORT_POINTS)
        .map(|_| random_in_cone(&mut rng, p.k1, p.k2, p.gamma))
        .collect();
    let eval = |pts: &[LatticePoint]| -> Result<Vec<f64>> {
        pts.par_iter()
            .map(|pt| f_limit_with(pt, p, &cfg, &sym).map(f64::abs))
            .collect()
    };
    let off_max = eval(&off)?.into_iter().fold(0.0f64, f64::max);
    let mut mags = eval(&inside)?;
    mags.sort_by(f64::total_cmp);
    let median = mags[mags.len() / 2];
    Ok(Outcome {
        lhs: off_max,
        lhs_err: 0.0,
        rhs: median,
        rel_dev: off_max / median,
        tolerance: None,
        note: None,
    })
}

/// Tolerance of the finite-difference PDE residuals.
pub const PDE_TOL: f64 = 1e-6;
/// Finite-difference step of the PDE check.
pub const PDE_STEP: f64 = 1e-4;

fn run_pde(p: &ParamSet) -> Result<Outcome> {
    check_series_region(IdentityId::PdeResidual, p, false)?;
    let r = pde_residual(p, PDE_STEP)?;
    let mut out = Outcome::residual(r.z1.max(r.z2));
    out.note = Some(format!(
        "z1 eq {:.3e}; z2 eq {:.3e}; z2 eq with printed z1 denominator {:.3e}",
        r.z1, r.z2, r.z2_printed
    ));
    Ok(out)
}

/// Point at which the asymptotic gamma ratio is evaluated.
pub const STIRLING_X: f64 = 1e8;

fn run_stirling(p: &ParamSet) -> Result<Outcome> {
    require(
        p.alpha.is_finite() && p.beta1.is_finite(),
        IdentityId::StirlingRatio,
        "finite alpha, beta1",
    )?;
    let (c, d, x) = (p.alpha, p.beta1, STIRLING_X);
    let ratio = log_gamma_signed(x + c)? / log_gamma_signed(x + d)?;
    let log_rel = ratio.logmag - (c - d) * x.ln();
    Ok(Outcome {
        lhs: log_rel.exp(),
        lhs_err: 0.0,
        rhs: 1.0,
        rel_dev: log_rel.exp_m1().abs(),
        tolerance: None,
        note: Some(format!("x = {x:e}")),
    })
}

/// The `eps` of the limit-link check.
pub const EPS_LINK: f64 = 1e-3;

fn run_eps(p: &ParamSet) -> Result<Outcome> {
    check_sl3_region(IdentityId::EpsLimitLink, p, false).or_else(|e| if p.gamma >= 0.0 { Ok(()) } else { Err(e) })?;
    let dev = epsilon_link(p, EPS_LINK)?;
    let mut out = Outcome::residual(dev);
    out.note = Some(format!("eps = {EPS_LINK:e}"));
    Ok(out)
}

/// Runs one identity at one parameter point.
pub fn run_identity(id: IdentityId, p: &ParamSet, budget: &Budget, seed: u64) -> Result<VerificationRecord> {
    run_identity_with_tol(id, p, budget, seed, None)
}

/// As [`run_identity`] with an optional tolerance override.
pub fn run_identity_with_tol(
    id: IdentityId,
    p: &ParamSet,
    budget: &Budget,
    seed: u64,
    tol: Option<f64>,
) -> Result<VerificationRecord> {
    let start = Instant::now();
    let out = match id {
        IdentityId::Selb => run_selb(p, budget, seed),
        IdentityId::Exp => run_exp(p, budget, seed),
        IdentityId::Dexp => run_dexp(p, budget),
        IdentityId::Dexp3 => run_dexp3(p, budget),
        IdentityId::Exp3 => run_exp3(p, budget, seed),
        IdentityId::Selb3 | IdentityId::Selb30 => run_selb3(id, p, budget, seed),
        IdentityId::Aomoto => run_aomoto(p, budget, seed),
        IdentityId::JjjRelations => run_jjj(p),
        IdentityId::JjlShift => run_jjl(p),
        IdentityId::J0k => run_j0k(p),
        IdentityId::ChainDecomp => run_chain_decomp(p, budget, seed),
        IdentityId::FvalSupport => run_support(p, seed),
        IdentityId::PdeResidual => run_pde(p),
        IdentityId::StirlingRatio => run_stirling(p),
        IdentityId::EpsLimitLink => run_eps(p),
    }?;
    let tolerance = tol.or(out.tolerance).unwrap_or_else(|| id.info().default_tolerance);
    let rel_err = if out.lhs_err == 0.0 {
        0.0
    } else {
        out.lhs_err / out.lhs.abs()
    };
    let precise = rel_err <= tolerance / 3.0 * (1.0 + 1e-9);
    let passed = precise && out.rel_dev <= tolerance;
    let reason = if !precise {
        Some(match &out.note {
            Some(n) => format!("insufficient precision ({n})"),
            None => "insufficient precision".to_string(),
        })
    } else {
        out.note
    };
    Ok(VerificationRecord {
        identity_id: id,
        params: *p,
        lhs: out.lhs,
        lhs_err: out.lhs_err,
        rhs: out.rhs,
        rel_dev: out.rel_dev,
        tolerance,
        passed,
        reason,
        seed,
        runtime_ms: start.elapsed().as_millis() as u64,
    })
}

/// Parameters that a grid can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Alpha,
    Beta1,
    Beta2,
    Gamma,
    Z1,
    Z2,
}

impl Axis {
    fn set(self, p: &mut ParamSet, v: f64) {
        match self {
            Axis::Alpha => p.alpha = v,
            Axis::Beta1 => p.beta1 = v,
            Axis::Beta2 => p.beta2 = v,
            Axis::Gamma => p.gamma = v,
            Axis::Z1 => p.z1 = v,
            Axis::Z2 => p.z2 = v,
        }
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "alpha" => Axis::Alpha,
            "beta" | "beta1" => Axis::Beta1,
            "beta2" => Axis::Beta2,
            "gamma" => Axis::Gamma,
            "z" | "z1" => Axis::Z1,
            "z2" => Axis::Z2,
            _ => return Err(Error::InvalidParams(format!("unknown grid axis '{s}'"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GridSpec {
    Points(Vec<ParamSet>),
    /// Cartesian product of the listed axis values around a base point.
    Cartesian {
        base: ParamSet,
        axes: Vec<(Axis, Vec<f64>)>,
    },
    /// Uniform draws in the listed ranges around a base point.
    Random {
        base: ParamSet,
        draws: usize,
        ranges: Vec<(Axis, f64, f64)>,
        seed: u64,
    },
}

impl GridSpec {
    pub fn expand(&self) -> Vec<ParamSet> {
        match self {
            GridSpec::Points(v) => v.clone(),
            GridSpec::Cartesian { base, axes } => {
                let mut out = vec![*base];
                for (axis, values) in axes {
                    out = out
                        .iter()
                        .flat_map(|p| {
                            values.iter().map(move |&v| {
                                let mut q = *p;
                                axis.set(&mut q, v);
                                q
                            })
                        })
                        .collect();
                }
                out
            }
            GridSpec::Random {
                base,
                draws,
                ranges,
                seed,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..*draws)
                    .map(|_| {
                        let mut q = *base;
                        for (axis, lo, hi) in ranges {
                            axis.set(&mut q, rng.random_range(*lo..*hi));
                        }
                        q
                    })
                    .collect()
            }
        }
    }
}

/// Records of every grid point, with the failures to run collected apart.
#[derive(Debug, Clone, PartialEq)]
pub struct GridOutcome {
    pub records: Vec<VerificationRecord>,
    pub errors: Vec<(ParamSet, Error)>,
}

/// Runs an identity over a grid in parallel; point `i` uses seed `seed + i`.
pub fn run_grid(id: IdentityId, grid: &GridSpec, budget: &Budget, seed: u64, tol: Option<f64>) -> GridOutcome {
    let points = grid.expand();
    let results: Vec<(ParamSet, Result<VerificationRecord>)> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            (
                *p,
                run_identity_with_tol(id, p, budget, seed.wrapping_add(i as u64), tol),
            )
        })
        .collect();
    let mut out = GridOutcome {
        records: Vec::new(),
        errors: Vec::new(),
    };
    for (p, r) in results {
        match r {
            Ok(rec) => out.records.push(rec),
            Err(e) => out.errors.push((p, e)),
        }
    }
    out
}

//! Interleaving domains `D_M`, chain coefficients and chain integrals.
//!
//! A domain `D_M` fixes a total order of the `k1 + k2` coordinates, so it is
//! an ordered simplex with labelled points. Every integrand handled here is a
//! product of powers of coordinates, of `1 - coordinate` and of pairwise
//! distances, times a smooth factor; the powers become block exponents for
//! the sector engine in [`crate::quadrature`].
//!
//! On `[0, +inf)` the integrands are homogeneous up to the exponential
//! factor, so the radial direction (the largest coordinate) is integrated in
//! closed form and the remaining ratios live on an ordered simplex again.

use std::collections::BTreeMap;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::closed_forms::ParamSet;
use crate::error::{Error, Result};
use crate::integrands::{Assembled, ContinuousPoint, GForm, PointView, SymTable, Weight};
use crate::numerics::{log_gamma_signed, sin_ratio};
use crate::quadrature::{integrate_simplex, integrate_simplex_mc, Block, GapCoords, SimplexIntegrand};

/// Nondecreasing map `{1..k2} -> {1..k1}` with `M(b) <= k1 - k2 + b`.
/// Values are stored 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OrderMap {
    pub m: Vec<usize>,
}

impl OrderMap {
    pub fn new(m: Vec<usize>, k1: usize) -> Result<Self> {
        let k2 = m.len();
        if k1 < k2 {
            return Err(Error::InvalidParams(format!("k1={k1} < k2={k2}")));
        }
        for (b, &x) in m.iter().enumerate() {
            if x < 1 || x > k1 - k2 + b + 1 || (b > 0 && m[b - 1] > x) {
                return Err(Error::InvalidParams(format!("invalid order map {m:?} for k1={k1}")));
            }
        }
        Ok(OrderMap { m })
    }
}

/// Formal linear combination of domains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    pub k1: usize,
    pub k2: usize,
    pub terms: Vec<(OrderMap, f64)>,
}

impl Chain {
    /// The plain product of simplices: every coefficient is one.
    pub fn simplex(k1: usize, k2: usize) -> Result<Self> {
        let terms = enumerate_maps(k1, k2)?.into_iter().map(|m| (m, 1.0)).collect();
        Ok(Chain { k1, k2, terms })
    }

    /// The chain with coefficients `X_{M,gamma}`.
    pub fn selberg(k1: usize, k2: usize, gamma: f64) -> Result<Self> {
        let terms = enumerate_maps(k1, k2)?
            .into_iter()
            .map(|m| {
                let x = coefficient_x(&m, k1, k2, gamma)?;
                Ok((m, x))
            })
            .collect::<Result<_>>()?;
        Ok(Chain { k1, k2, terms })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    Deterministic,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Interval {
    Unit,
    HalfLine,
}

/// Largest `k1 + k2` for the tensor-product scheme.
pub const MAX_DETERMINISTIC_DIM: usize = 5;
/// Largest `k1 + k2` for any scheme.
pub const MAX_DIM: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadSpec {
    pub scheme: Scheme,
    pub nodes_per_axis: usize,
    pub sample_count: usize,
    pub seed: u64,
    /// Fail with `NotConverged` when the error estimate exceeds this.
    pub tol: Option<f64>,
}

impl QuadSpec {
    pub fn deterministic(nodes_per_axis: usize) -> Self {
        QuadSpec {
            scheme: Scheme::Deterministic,
            nodes_per_axis,
            sample_count: 1,
            seed: 0,
            tol: None,
        }
    }

    pub fn monte_carlo(sample_count: usize, seed: u64) -> Self {
        QuadSpec {
            scheme: Scheme::MonteCarlo,
            nodes_per_axis: 0,
            sample_count,
            seed,
            tol: None,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = Some(tol);
        self
    }

    fn check(&self, dim: usize) -> Result<()> {
        if dim > MAX_DIM {
            return Err(Error::InvalidParams(format!("dimension {dim} exceeds {MAX_DIM}")));
        }
        match self.scheme {
            Scheme::Deterministic => {
                if dim > MAX_DETERMINISTIC_DIM {
                    return Err(Error::InvalidParams(format!(
                        "deterministic quadrature supports k1+k2 <= {MAX_DETERMINISTIC_DIM}, got {dim}"
                    )));
                }
                if self.nodes_per_axis < 2 {
                    return Err(Error::InvalidParams("nodes_per_axis >= 2 required".into()));
                }
            }
            Scheme::MonteCarlo => {
                if self.sample_count < 1 {
                    return Err(Error::InvalidParams("sample_count >= 1 required".into()));
                }
            }
        }
        Ok(())
    }
}

/// Smooth extra factor `f(t, s)` multiplying a chain integrand.
pub type SmoothFactor<'a> = &'a (dyn Fn(&[f64], &[f64]) -> f64 + Sync);

/// Integrand of product form
/// `prod t^a0 (1-t)^a1 prod s^b0 (1-s)^b1 prod |t-t'|^tt |s-s'|^ss |t-s|^ts
///  * exp(-rate_t sum t - rate_s sum s) * weight(t, s) * extra(t, s)`.
#[derive(Clone, Copy)]
pub struct ChainIntegrand<'a> {
    pub k1: usize,
    pub k2: usize,
    pub t_zero: f64,
    pub t_one: f64,
    pub s_zero: f64,
    pub s_one: f64,
    pub tt: f64,
    pub ss: f64,
    pub ts: f64,
    pub rate_t: f64,
    pub rate_s: f64,
    pub weight: Weight,
    pub extra: Option<SmoothFactor<'a>>,
}

impl std::fmt::Debug for ChainIntegrand<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChainIntegrand")
            .field("k1", &self.k1)
            .field("k2", &self.k2)
            .field("weight", &self.weight)
            .field("extra", &self.extra.is_some())
            .finish()
    }
}

impl<'a> ChainIntegrand<'a> {
    /// A bare smooth function on `k1 + k2` coordinates.
    pub fn smooth(k1: usize, k2: usize, f: SmoothFactor<'a>) -> Self {
        ChainIntegrand {
            k1,
            k2,
            t_zero: 0.0,
            t_one: 0.0,
            s_zero: 0.0,
            s_one: 0.0,
            tt: 0.0,
            ss: 0.0,
            ts: 0.0,
            rate_t: 0.0,
            rate_s: 0.0,
            weight: Weight::One,
            extra: Some(f),
        }
    }

    /// The left-hand-side integrand of an identity.
    pub fn for_identity(which: Assembled, p: &ParamSet) -> Result<Self> {
        let sl2 = matches!(which, Assembled::Selberg | Assembled::Exp | Assembled::Aomoto(_));
        let k2 = if sl2 { 0 } else { p.k2 };
        let mut out = ChainIntegrand {
            k1: p.k1,
            k2,
            t_zero: p.alpha - 1.0,
            t_one: p.beta1 - 1.0,
            s_zero: 0.0,
            s_one: p.beta2 - 1.0,
            tt: 2.0 * p.gamma,
            ss: 2.0 * p.gamma,
            ts: -p.gamma,
            rate_t: 0.0,
            rate_s: 0.0,
            weight: Weight::One,
            extra: None,
        };
        match which {
            Assembled::Selberg | Assembled::Selb30 => {}
            Assembled::Aomoto(l) => out.weight = Weight::AomotoMixed(l),
            Assembled::Selb3 => out.weight = Weight::G(GForm::Diagonal),
            Assembled::J { l1, l2, m } => out.weight = Weight::H { l1, l2, m },
            Assembled::JTilde { l1, l2, m } => out.weight = Weight::HTilde { l1, l2, m },
            Assembled::Exp => {
                out.t_one = 0.0;
                out.s_one = 0.0;
                out.rate_t = 1.0;
            }
            Assembled::Exp3 => {
                out.t_one = 0.0;
                out.s_one = 0.0;
                out.rate_t = p.beta1;
                out.rate_s = p.beta2;
                out.weight = Weight::G(GForm::Diagonal);
            }
        }
        Ok(out)
    }

    /// Total homogeneity degree of the weight, when it is homogeneous.
    fn weight_degree(&self) -> Option<f64> {
        match self.weight {
            Weight::One => Some(0.0),
            Weight::G(_) => Some(-(self.k2 as f64)),
            Weight::AomotoPlain(l) => Some(l as f64),
            _ => None,
        }
    }
}

/// All valid maps in lexicographic order.
pub fn enumerate_maps(k1: usize, k2: usize) -> Result<Vec<OrderMap>> {
    if k1 < k2 {
        return Err(Error::InvalidParams(format!("k1={k1} < k2={k2}")));
    }
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k2);
    fn rec(b: usize, k1: usize, k2: usize, cur: &mut Vec<usize>, out: &mut Vec<OrderMap>) {
        if b == k2 {
            out.push(OrderMap { m: cur.clone() });
            return;
        }
        let lo = cur.last().copied().unwrap_or(1);
        for x in lo..=(k1 - k2 + b + 1) {
            cur.push(x);
            rec(b + 1, k1, k2, cur, out);
            cur.pop();
        }
    }
    rec(0, k1, k2, &mut cur, &mut out);
    Ok(out)
}

/// `X_{M,gamma} = prod_b sin(pi (k1-k2-M(b)+b+1) gamma) / sin(pi (k1-k2+b) gamma)`
/// with `b` 1-based.
pub fn coefficient_x(m: &OrderMap, k1: usize, k2: usize, gamma: f64) -> Result<f64> {
    let d = k1 as f64 - k2 as f64;
    let mut out = 1.0;
    for (i, &mb) in m.m.iter().enumerate() {
        let b = (i + 1) as f64;
        out *= sin_ratio((d - mb as f64 + b + 1.0) * gamma, (d + b) * gamma)?;
    }
    Ok(out)
}

/// Whether a point lies in `D_M[x, y]`.
pub fn domain_membership(m: &OrderMap, pt: &ContinuousPoint, x: f64, y: f64) -> bool {
    let (t, s) = (&pt.t, &pt.s);
    if s.len() != m.m.len() {
        return false;
    }
    let sorted = |v: &[f64]| v.windows(2).all(|w| w[1] <= w[0]) && v.iter().all(|&c| x <= c && c <= y);
    if !sorted(t) || !sorted(s) {
        return false;
    }
    m.m.iter().zip(s).all(|(&mb, &sb)| {
        let lower = t.get(mb - 1).copied().unwrap_or(x);
        let upper = if mb >= 2 { t[mb - 2] } else { y };
        lower <= sb && sb <= upper
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Label {
    T(usize),
    S(usize),
}

/// Labels in descending order of coordinate value within `D_M`.
fn descending_labels(m: &OrderMap, k1: usize) -> Vec<Label> {
    let mut out = Vec::with_capacity(k1 + m.m.len());
    for a in 0..=k1 {
        for (b, &mb) in m.m.iter().enumerate() {
            if mb == a + 1 {
                out.push(Label::S(b));
            }
        }
        if a < k1 {
            out.push(Label::T(a));
        }
    }
    out
}

struct Layout {
    /// Engine position of each t and s.
    pos_t: Vec<usize>,
    pos_s: Vec<usize>,
    blocks: Vec<Block>,
    /// Engine point count.
    n: usize,
}

fn add_block(map: &mut BTreeMap<(usize, usize), f64>, lo: usize, hi: usize, exp: f64) {
    *map.entry((lo, hi)).or_insert(0.0) += exp;
}

fn layout(f: &ChainIntegrand<'_>, m: &OrderMap, interval: Interval) -> Layout {
    let labels = descending_labels(m, f.k1);
    let total = labels.len();
    // Unit interval: labels at positions 1..=total. Half line: the largest
    // label is the radial variable and sits at position 0.
    let shift = match interval {
        Interval::Unit => 1,
        Interval::HalfLine => 0,
    };
    let n = match interval {
        Interval::Unit => total,
        Interval::HalfLine => total - 1,
    };
    let mut pos_t = vec![0; f.k1];
    let mut pos_s = vec![0; f.k2];
    for (i, l) in labels.iter().enumerate() {
        match *l {
            Label::T(a) => pos_t[a] = i + shift,
            Label::S(b) => pos_s[b] = i + shift,
        }
    }
    let ts = if f.weight.has_ts_poles() { f.ts - 1.0 } else { f.ts };
    let mut map = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        let p = i + shift;
        let (zero, one) = match l {
            Label::T(_) => (f.t_zero, f.t_one),
            Label::S(_) => (f.s_zero, f.s_one),
        };
        if p > 0 {
            add_block(&mut map, p, n, zero);
        }
        if interval == Interval::Unit {
            add_block(&mut map, 0, p - 1, one);
        }
        for (j, l2) in labels.iter().enumerate().skip(i + 1) {
            let q = j + shift;
            let e = match (l, l2) {
                (Label::T(_), Label::T(_)) => f.tt,
                (Label::S(_), Label::S(_)) => f.ss,
                _ => ts,
            };
            add_block(&mut map, p, q - 1, e);
        }
    }
    let blocks = map
        .into_iter()
        .filter(|(_, e)| *e != 0.0)
        .map(|((lo, hi), exp)| Block { lo, hi, exp })
        .collect();
    Layout {
        pos_t,
        pos_s,
        blocks,
        n,
    }
}

fn point_view(lay: &Layout, c: &GapCoords) -> PointView {
    let k2 = lay.pos_s.len();
    let t: Vec<f64> = lay.pos_t.iter().map(|&p| c.x(p)).collect();
    let s: Vec<f64> = lay.pos_s.iter().map(|&p| c.x(p)).collect();
    let omt = lay.pos_t.iter().map(|&p| c.one_minus(p)).collect();
    let oms = lay.pos_s.iter().map(|&p| c.one_minus(p)).collect();
    let mut st = vec![0.0; lay.pos_t.len() * k2];
    for (a, &pt) in lay.pos_t.iter().enumerate() {
        for (b, &ps) in lay.pos_s.iter().enumerate() {
            st[a * k2 + b] = c.signed(ps, pt);
        }
    }
    PointView { t, s, omt, oms, st }
}

/// Integral over one domain `D_M`; returns `(value, error estimate)`.
pub fn integrate_domain(f: &ChainIntegrand<'_>, m: &OrderMap, interval: Interval, q: &QuadSpec) -> Result<(f64, f64)> {
    let dim = f.k1 + f.k2;
    if m.m.len() != f.k2 {
        return Err(Error::InvalidParams("order map length differs from k2".into()));
    }
    OrderMap::new(m.m.clone(), f.k1)?;
    q.check(dim)?;
    if dim == 0 {
        return Err(Error::InvalidParams("empty integration domain".into()));
    }
    let sym = SymTable::new(f.k1, f.k2)?;
    let lay = layout(f, m, interval);
    let poles = f.weight.has_ts_poles();
    let (radial_exp, gamma_factor) = match interval {
        Interval::Unit => (0.0, 1.0),
        Interval::HalfLine => {
            if f.extra.is_some() || f.t_one != 0.0 || f.s_one != 0.0 {
                return Err(Error::InvalidParams(
                    "half-line integrands must be homogeneous times the exponential".into(),
                ));
            }
            if !(f.rate_t > 0.0) || (f.k2 > 0 && !(f.rate_s > 0.0)) {
                return Err(Error::InvalidParams("half-line integrands need positive rates".into()));
            }
            let deg = f
                .weight_degree()
                .ok_or_else(|| Error::InvalidParams(format!("weight {:?} is not homogeneous", f.weight)))?;
            let (k1, k2) = (f.k1 as f64, f.k2 as f64);
            let total = (dim - 1) as f64
                + k1 * f.t_zero
                + k2 * f.s_zero
                + k1 * (k1 - 1.0) / 2.0 * f.tt
                + k2 * (k2 - 1.0) / 2.0 * f.ss
                + k1 * k2 * f.ts
                + deg;
            if !(total + 1.0 > 0.0) {
                return Err(Error::IntegrandSingular(format!(
                    "radial exponent {total} not integrable"
                )));
            }
            (total + 1.0, log_gamma_signed(total + 1.0)?.to_real())
        }
    };
    let smooth = |c: &GapCoords| -> f64 {
        let view = point_view(&lay, c);
        let mut v = f.weight.eval_view(&view, &sym);
        if poles {
            v *= view.st.iter().map(|x| x.abs()).product::<f64>();
        }
        if let Some(extra) = f.extra {
            v *= extra(&view.t, &view.s);
        }
        if interval == Interval::HalfLine {
            let ell: f64 = f.rate_t * view.t.iter().sum::<f64>() + f.rate_s * view.s.iter().sum::<f64>();
            v *= ell.powf(-radial_exp);
        }
        v
    };
    let prob = SimplexIntegrand {
        n: lay.n,
        blocks: lay.blocks.clone(),
        smooth: &smooth,
    };
    let (value, err) = match q.scheme {
        Scheme::Deterministic => {
            let n = q.nodes_per_axis;
            let fine = integrate_simplex(&prob, n)?;
            let coarse = integrate_simplex(&prob, (n * 3 / 4).max(n.saturating_sub(4)).max(1))?;
            (fine, (fine - coarse).abs())
        }
        Scheme::MonteCarlo => integrate_simplex_mc(&prob, q.sample_count, q.seed)?,
    };
    let (value, err) = (value * gamma_factor, err * gamma_factor.abs());
    if !value.is_finite() {
        return Err(Error::IntegrandSingular("non-finite quadrature sum".into()));
    }
    if let Some(tol) = q.tol {
        if err > tol * value.abs().max(f64::MIN_POSITIVE) {
            return Err(Error::NotConverged(format!(
                "error estimate {err:e} for value {value:e}"
            )));
        }
    }
    Ok((value, err))
}

/// Coefficient-weighted sum of domain integrals, errors added in quadrature.
pub fn integrate_chain(f: &ChainIntegrand<'_>, chain: &Chain, interval: Interval, q: &QuadSpec) -> Result<(f64, f64)> {
    if chain.k1 != f.k1 || chain.k2 != f.k2 {
        return Err(Error::InvalidParams("chain and integrand ranks differ".into()));
    }
    let inner = QuadSpec { tol: None, ..*q };
    let mut value = 0.0;
    let mut var = 0.0;
    for (i, (m, c)) in chain.terms.iter().enumerate() {
        let qi = QuadSpec {
            seed: inner.seed.wrapping_add((i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
            ..inner
        };
        let (v, e) = integrate_domain(f, m, interval, &qi)?;
        value += c * v;
        var += (c * e).powi(2);
    }
    let err = var.sqrt();
    if let Some(tol) = q.tol {
        if err > tol * value.abs() {
            return Err(Error::NotConverged(format!(
                "error estimate {err:e} for value {value:e}"
            )));
        }
    }
    Ok((value, err))
}

/// Polynomial in `(t, s)` used as a smooth test function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub k1: usize,
    pub k2: usize,
    /// `(coefficient, exponents of t_1..t_k1 then s_1..s_k2)`.
    pub terms: Vec<(f64, Vec<u32>)>,
}

impl Polynomial {
    /// Random polynomial with `terms` monomials of total degree at most `degree`.
    pub fn random(k1: usize, k2: usize, terms: usize, degree: u32, seed: u64) -> Self {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let dim = k1 + k2;
        let terms = (0..terms)
            .map(|_| {
                let mut e = vec![0u32; dim];
                let deg = rng.random_range(0..=degree);
                for _ in 0..deg {
                    if dim > 0 {
                        e[rng.random_range(0..dim)] += 1;
                    }
                }
                (rng.random_range(-1.0..1.0), e)
            })
            .collect();
        Polynomial { k1, k2, terms }
    }

    pub fn eval(&self, t: &[f64], s: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| {
                let (et, es) = e.split_at(self.k1);
                c * t.iter().zip(et).map(|(x, &k)| x.powi(k as i32)).product::<f64>()
                    * s.iter().zip(es).map(|(x, &k)| x.powi(k as i32)).product::<f64>()
            })
            .sum()
    }

    /// Exact integral over `Delta^{k1,k2}[0,1]`, summed over the total orders
    /// compatible with its inequalities; each order is an ordered simplex.
    pub fn simplex_integral(&self) -> f64 {
        let (k1, k2) = (self.k1, self.k2);
        let d = k1 - k2;
        // Labels 0..k1 are t, k1.. are s; a permutation lists them descending.
        let compatible = |perm: &[usize]| {
            let mut rank = vec![0usize; k1 + k2];
            for (r, &l) in perm.iter().enumerate() {
                rank[l] = r;
            }
            (1..k1).all(|a| rank[a - 1] < rank[a])
                && (1..k2).all(|b| rank[k1 + b - 1] < rank[k1 + b])
                && (0..k2).all(|b| rank[k1 + b] < rank[d + b])
        };
        let orders: Vec<Vec<usize>> = (0..k1 + k2).permutations(k1 + k2).filter(|p| compatible(p)).collect();
        self.terms
            .iter()
            .map(|(c, e)| {
                let total: f64 = orders
                    .iter()
                    .map(|perm| {
                        let mut acc = 0.0;
                        let mut out = 1.0;
                        for (i, &l) in perm.iter().enumerate().rev() {
                            acc += e[l] as f64;
                            out /= acc + (perm.len() - i) as f64;
                        }
                        out
                    })
                    .sum();
                c * total
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_enumeration() {
        assert_eq!(enumerate_maps(3, 0).unwrap(), vec![OrderMap { m: vec![] }]);
        let m = enumerate_maps(2, 1).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(enumerate_maps(3, 2).unwrap().len(), 5);
    }

    #[test]
    fn x_examples() {
        let g = -0.17;
        let m = OrderMap { m: vec![2] };
        let x = coefficient_x(&m, 2, 1, g).unwrap();
        assert!((x - 1.0 / (2.0 * (std::f64::consts::PI * g).cos())).abs() < 1e-14);
    }

    #[test]
    fn euler_beta() {
        let p = ParamSet::sl2(1, 2.5, 1.5, -0.1);
        let f = ChainIntegrand::for_identity(Assembled::Selberg, &p).unwrap();
        let (v, _) = integrate_domain(
            &f,
            &OrderMap { m: vec![] },
            Interval::Unit,
            &QuadSpec::deterministic(10),
        )
        .unwrap();
        let want = crate::closed_forms::selberg_value(1, 2.5, 1.5, -0.1).unwrap().to_real();
        assert!((v / want - 1.0).abs() < 1e-8, "{v} {want}");
    }
}

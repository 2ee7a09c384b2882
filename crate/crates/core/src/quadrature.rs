//! Gauss-Jacobi rules and sector decomposition of the ordered simplex.
//!
//! Points `1 = x_0 >= x_1 >= ... >= x_n >= x_{n+1} = 0` are described by the
//! `m = n + 1` gaps `g_i = x_i - x_{i+1}`, which sum to one. Every singular
//! factor of the integrands handled here is a power of a *block*, a sum of
//! consecutive gaps: `x_i - x_j` is the block `[i, j-1]`, `x_i` is `[i, n]`
//! and `1 - x_j` is `[0, j-1]`.
//!
//! The simplex is split into Catalan(m) sectors by recursively ordering the
//! gaps: at the top the largest gap is fixed to one (projectively), and
//! inside each remaining run of gaps the largest element gets a scale
//! variable `lambda` that multiplies the whole run. In these coordinates every
//! block is a product of scale variables times a factor bounded away from
//! zero, so the integrand is a monomial in the `lambda`s times a smooth
//! function. Each axis is then integrated with the Gauss-Jacobi rule for its
//! monomial weight, or sampled from the matching power density.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Nodes and weights of a rule on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// `n`-point Gauss rule for the weight `x^p` on `[0, 1]` (Golub-Welsch).
pub fn gauss_jacobi01(n: usize, p: f64) -> Result<GaussRule> {
    if n == 0 || !(p > -1.0) {
        return Err(Error::Domain(format!(
            "Gauss-Jacobi rule needs n >= 1 and p > -1, got n={n} p={p}"
        )));
    }
    // Monic recurrence of the Jacobi weight (1-y)^0 (1+y)^p on [-1,1],
    // mapped to x = (1+y)/2.
    let (a, b) = (0.0f64, p);
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    for (k, d) in diag.iter_mut().enumerate() {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        let alpha = if k == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        };
        *d = 0.5 * (1.0 + alpha);
    }
    for (k, o) in off.iter_mut().enumerate() {
        let kf = (k + 1) as f64;
        let s = 2.0 * kf + a + b;
        let beta = 4.0 * kf * (kf + a) * (kf + b) * (kf + a + b) / (s * s * (s + 1.0) * (s - 1.0));
        *o = (beta / 4.0).sqrt();
    }
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        jac[(i, i)] = diag[i];
        if i + 1 < n {
            jac[(i, i + 1)] = off[i];
            jac[(i + 1, i)] = off[i];
        }
    }
    let eig = SymmetricEigen::new(jac);
    let mu0 = 1.0 / (p + 1.0);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i].clamp(0.0, 1.0), mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(GaussRule {
        nodes: pairs.iter().map(|x| x.0).collect(),
        weights: pairs.iter().map(|x| x.1).collect(),
    })
}

type RuleCache = Mutex<HashMap<(usize, u64), Arc<GaussRule>>>;

/// Cached Gauss-Jacobi rule.
pub fn cached_rule(n: usize, p: f64) -> Result<Arc<GaussRule>> {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (n, p.to_bits());
    if let Some(r) = cache.lock().expect("rule cache poisoned").get(&key) {
        return Ok(r.clone());
    }
    let rule = Arc::new(gauss_jacobi01(n, p)?);
    cache.lock().expect("rule cache poisoned").insert(key, rule.clone());
    Ok(rule)
}

/// A power of a sum of consecutive gaps `g_lo + ... + g_hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block {
    pub lo: usize,
    pub hi: usize,
    pub exp: f64,
}

/// Positions of a simplex point with accurate pairwise differences.
#[derive(Debug, Clone)]
pub struct GapCoords {
    n: usize,
    /// `x_i - x_j` for `i < j`, row-major over `(n+2) x (n+2)`.
    diffs: Vec<f64>,
}

impl GapCoords {
    fn from_gaps(gaps: &[f64]) -> Self {
        let size = gaps.len() + 1;
        let mut diffs = vec![0.0; size * size];
        for i in 0..size {
            let mut acc = 0.0;
            for j in i + 1..size {
                acc += gaps[j - 1];
                diffs[i * size + j] = acc;
            }
        }
        GapCoords {
            n: gaps.len() - 1,
            diffs,
        }
    }

    /// Number of free points.
    pub fn n(&self) -> usize {
        self.n
    }

    /// `x_i - x_j` for position indices `i < j` in `0..=n+1`.
    pub fn diff(&self, i: usize, j: usize) -> f64 {
        self.diffs[i * (self.n + 2) + j]
    }

    /// Signed `x_i - x_j` for any pair of positions.
    pub fn signed(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.diff(i, j),
            std::cmp::Ordering::Greater => -self.diff(j, i),
            std::cmp::Ordering::Equal => 0.0,
        }
    }

    /// Coordinate of position `i` (with `x_0 = 1`, `x_{n+1} = 0`).
    pub fn x(&self, i: usize) -> f64 {
        if i == self.n + 1 {
            0.0
        } else {
            self.diff(i, self.n + 1)
        }
    }

    /// `1 - x_i`.
    pub fn one_minus(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.diff(0, i)
        }
    }
}

/// `int_{simplex} prod blocks^exp * smooth(x) dx` over `n` ordered points.
pub struct SimplexIntegrand<'a> {
    pub n: usize,
    pub blocks: Vec<Block>,
    pub smooth: &'a (dyn Fn(&GapCoords) -> f64 + Sync),
}

#[derive(Debug, Clone)]
struct Node {
    lo: usize,
    hi: usize,
    max: usize,
    parent: Option<usize>,
}

#[derive(Debug, Clone)]
struct Sector {
    top: usize,
    /// Parents precede children.
    nodes: Vec<Node>,
}

fn cube_trees(lo: usize, hi: usize) -> Vec<Vec<Node>> {
    // Runs of gaps lo..hi (exclusive hi); each tree lists its nodes with
    // parent indices local to the returned vector.
    if lo >= hi {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for max in lo..hi {
        for left in cube_trees(lo, max) {
            for right in cube_trees(max + 1, hi) {
                let mut nodes = vec![Node {
                    lo,
                    hi: hi - 1,
                    max,
                    parent: None,
                }];
                for sub in [&left, &right] {
                    let off = nodes.len();
                    for nd in sub.iter() {
                        nodes.push(Node {
                            parent: Some(nd.parent.map_or(0, |p| p + off)),
                            ..nd.clone()
                        });
                    }
                }
                out.push(nodes);
            }
        }
    }
    out
}

fn sectors(m: usize) -> Vec<Sector> {
    let mut out = Vec::new();
    for top in 0..m {
        for left in cube_trees(0, top) {
            for right in cube_trees(top + 1, m) {
                let mut nodes: Vec<Node> = left.clone();
                let off = nodes.len();
                for nd in &right {
                    nodes.push(Node {
                        parent: nd.parent.map(|p| p + off),
                        ..nd.clone()
                    });
                }
                out.push(Sector { top, nodes });
            }
        }
    }
    out
}

/// Number of sectors for `m` gaps (the Catalan number `C_m`).
pub fn sector_count(m: usize) -> usize {
    sectors(m).len()
}

/// Threshold separating integrable exponents from those needing a zero of
/// the smooth factor.
const EXP_SLACK: f64 = 1e-9;

struct Prepared {
    sector: Sector,
    /// Exponent of the monomial weight of each node.
    weight_exp: Vec<f64>,
    /// Jacobian exponent `|L_v| - 1` of each node.
    jac_exp: Vec<usize>,
}

fn prepare(prob: &SimplexIntegrand<'_>) -> Vec<Prepared> {
    let m = prob.n + 1;
    sectors(m)
        .into_iter()
        .map(|sector| {
            let mut weight_exp = Vec::with_capacity(sector.nodes.len());
            let mut jac_exp = Vec::with_capacity(sector.nodes.len());
            for nd in &sector.nodes {
                let size = nd.hi - nd.lo + 1;
                let inner: f64 = prob
                    .blocks
                    .iter()
                    .filter(|b| b.lo >= nd.lo && b.hi <= nd.hi)
                    .map(|b| b.exp)
                    .sum();
                let p = (size - 1) as f64 + inner;
                let nu = if p > -1.0 + EXP_SLACK {
                    0.0
                } else {
                    (-1.0 + EXP_SLACK - p).floor() + 1.0
                };
                weight_exp.push(p + nu);
                jac_exp.push(size - 1);
            }
            Prepared {
                sector,
                weight_exp,
                jac_exp,
            }
        })
        .collect()
}

/// Integrand value divided by the monomial weight, at scale variables `lam`.
fn reduced_value(prob: &SimplexIntegrand<'_>, prep: &Prepared, lam: &[f64], gaps: &mut [f64]) -> f64 {
    let m = prob.n + 1;
    let nodes = &prep.sector.nodes;
    let mut scale = vec![1.0; nodes.len()];
    for (v, nd) in nodes.iter().enumerate() {
        let parent = nd.parent.map_or(1.0, |p| scale[p]);
        scale[v] = parent * lam[v];
        gaps[nd.max] = scale[v];
    }
    gaps[prep.sector.top] = 1.0;
    let total: f64 = gaps.iter().sum();
    for g in gaps.iter_mut() {
        *g /= total;
    }
    let coords = GapCoords::from_gaps(gaps);
    let smooth = (prob.smooth)(&coords);
    if smooth == 0.0 {
        return 0.0;
    }
    let mut log = -(m as f64) * total.ln() + smooth.abs().ln();
    for (v, &l) in lam.iter().enumerate() {
        log += (prep.jac_exp[v] as f64 - prep.weight_exp[v]) * l.ln();
    }
    for b in &prob.blocks {
        let sum = coords.diff(b.lo, b.hi + 1);
        log += b.exp * sum.ln();
    }
    smooth.signum() * log.exp()
}

fn check_problem(prob: &SimplexIntegrand<'_>) -> Result<()> {
    let m = prob.n + 1;
    for b in &prob.blocks {
        if b.lo > b.hi || b.hi >= m {
            return Err(Error::Domain(format!("block [{}, {}] outside {m} gaps", b.lo, b.hi)));
        }
    }
    Ok(())
}

/// Deterministic tensor-product Gauss-Jacobi integration over all sectors.
pub fn integrate_simplex(prob: &SimplexIntegrand<'_>, nodes_per_axis: usize) -> Result<f64> {
    check_problem(prob)?;
    let m = prob.n + 1;
    if prob.n == 0 {
        let coords = GapCoords::from_gaps(&[1.0]);
        return Ok((prob.smooth)(&coords));
    }
    if prob.blocks.iter().all(|b| b.exp == 0.0) {
        return integrate_nested(prob, nodes_per_axis);
    }
    let prepared = prepare(prob);
    let mut jobs = Vec::new();
    for (si, prep) in prepared.iter().enumerate() {
        let rules: Vec<Arc<GaussRule>> = prep
            .weight_exp
            .iter()
            .map(|&p| cached_rule(nodes_per_axis, p))
            .collect::<Result<_>>()?;
        for first in 0..nodes_per_axis {
            jobs.push((si, first, rules.clone()));
        }
    }
    let partials: Vec<f64> = jobs
        .par_iter()
        .map(|(si, first, rules)| {
            let prep = &prepared[*si];
            let dim = rules.len();
            let mut idx = vec![0usize; dim];
            idx[0] = *first;
            let mut lam = vec![0.0; dim];
            let mut gaps = vec![0.0; m];
            let mut acc = 0.0;
            loop {
                let mut w = 1.0;
                for d in 0..dim {
                    lam[d] = rules[d].nodes[idx[d]];
                    w *= rules[d].weights[idx[d]];
                }
                acc += w * reduced_value(prob, prep, &lam, &mut gaps);
                // advance the odometer over axes 1..dim
                let mut d = dim;
                loop {
                    if d == 1 {
                        return acc;
                    }
                    d -= 1;
                    idx[d] += 1;
                    if idx[d] < nodes_per_axis {
                        break;
                    }
                    idx[d] = 0;
                }
            }
        })
        .collect();
    Ok(partials.iter().sum())
}

/// Nested-ratio map `x_i = x_{i-1} u_i` for integrands without singular
/// facets; polynomials stay polynomial in every `u_i`.
fn integrate_nested(prob: &SimplexIntegrand<'_>, nodes_per_axis: usize) -> Result<f64> {
    let n = prob.n;
    let rules: Vec<Arc<GaussRule>> = (1..=n)
        .map(|i| cached_rule(nodes_per_axis, (n - i) as f64))
        .collect::<Result<_>>()?;
    let partials: Vec<f64> = (0..nodes_per_axis)
        .into_par_iter()
        .map(|first| {
            let mut idx = vec![0usize; n];
            idx[0] = first;
            let mut gaps = vec![0.0; n + 1];
            let mut acc = 0.0;
            loop {
                let mut w = 1.0;
                let mut x = 1.0;
                for d in 0..n {
                    let u = rules[d].nodes[idx[d]];
                    w *= rules[d].weights[idx[d]];
                    gaps[d] = x * (1.0 - u);
                    x *= u;
                }
                gaps[n] = x;
                acc += w * (prob.smooth)(&GapCoords::from_gaps(&gaps));
                let mut d = n;
                loop {
                    if d == 1 {
                        return acc;
                    }
                    d -= 1;
                    idx[d] += 1;
                    if idx[d] < nodes_per_axis {
                        break;
                    }
                    idx[d] = 0;
                }
            }
        })
        .collect();
    Ok(partials.iter().sum())
}

/// Size of one Monte Carlo chunk; each chunk has its own generator stream.
pub const MC_CHUNK: usize = 4096;

/// Estimate and standard error from Monte Carlo sampling of every sector.
pub fn integrate_simplex_mc(prob: &SimplexIntegrand<'_>, samples: usize, seed: u64) -> Result<(f64, f64)> {
    check_problem(prob)?;
    let m = prob.n + 1;
    if prob.n == 0 {
        let coords = GapCoords::from_gaps(&[1.0]);
        return Ok(((prob.smooth)(&coords), 0.0));
    }
    let prepared = prepare(prob);
    let per_sector = samples.div_ceil(prepared.len()).max(2);
    let chunks = per_sector.div_ceil(MC_CHUNK);
    let jobs: Vec<(usize, usize)> = (0..prepared.len())
        .flat_map(|s| (0..chunks).map(move |c| (s, c)))
        .collect();
    let partials: Vec<(f64, f64, usize)> = jobs
        .par_iter()
        .map(|&(si, ci)| {
            let prep = &prepared[si];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream((si * chunks + ci) as u64);
            let count = MC_CHUNK.min(per_sector - ci * MC_CHUNK);
            let dim = prep.weight_exp.len();
            let norm: f64 = prep.weight_exp.iter().map(|p| 1.0 / (p + 1.0)).product();
            let mut lam = vec![0.0; dim];
            let mut gaps = vec![0.0; m];
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                for d in 0..dim {
                    let u: f64 = 1.0 - rng.random::<f64>();
                    lam[d] = u.powf(1.0 / (prep.weight_exp[d] + 1.0));
                }
                let y = norm * reduced_value(prob, prep, &lam, &mut gaps);
                s1 += y;
                s2 += y * y;
            }
            (s1, s2, count)
        })
        .collect();
    let mut value = 0.0;
    let mut var = 0.0;
    for si in 0..prepared.len() {
        let (mut s1, mut s2, mut n) = (0.0, 0.0, 0usize);
        for ci in 0..chunks {
            let (a, b, c) = partials[si * chunks + ci];
            s1 += a;
            s2 += b;
            n += c;
        }
        let nf = n as f64;
        let mean = s1 / nf;
        value += mean;
        var += ((s2 / nf - mean * mean).max(0.0)) * nf / (nf - 1.0) / nf;
    }
    Ok((value, var.sqrt()))
}

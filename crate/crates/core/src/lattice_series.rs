//! Lattice cones and truncated discrete Selberg series.
//!
//! Points are grouped into shells by their largest integer part, which
//! drives the geometric decay `z^{max}`. Shells are summed in enumeration
//! order after a parallel map, so results do not depend on the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_forms::{sl3_discrete_rhs, sl3_exp_rhs, ParamSet};
use crate::error::{Error, Result};
use crate::integrands::{cone_contains, f_limit_with, LatticePoint, LimitConfig, SymTable};
use crate::numerics::LogSigned;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeSpec {
    pub k1: usize,
    pub k2: usize,
    pub gamma: f64,
    pub bound: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesResult {
    pub partial_sum: f64,
    /// Total contribution of the outermost shell.
    pub last_shell: f64,
    pub bound: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeriesKind {
    /// The sl2 series in `z`; reads `k1`, `alpha`, `gamma`, `z1`.
    Dexp,
    /// The sl3 series in `z1`, `z2`.
    Dexp3,
}

pub const DEFAULT_REL_TOL: f64 = 1e-10;

/// Default largest shell: 200 for one or two variables, 60 beyond.
pub fn default_max_bound(k1: usize, k2: usize) -> usize {
    if k1 + k2 >= 3 {
        60
    } else {
        200
    }
}

/// Weakly decreasing sequences of length `len` with entries in `[lo_i, hi]`,
/// where `lo_i` comes from `lower`.
fn decreasing(len: usize, hi: i64, lower: &dyn Fn(usize) -> i64, out: &mut Vec<Vec<i64>>) {
    fn rec(i: usize, len: usize, cap: i64, lower: &dyn Fn(usize) -> i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if i == len {
            out.push(cur.clone());
            return;
        }
        for x in lower(i)..=cap {
            cur.push(x);
            rec(i + 1, len, x, lower, cur, out);
            cur.pop();
        }
    }
    rec(0, len, hi, lower, &mut Vec::with_capacity(len), out);
}

/// Integer parts of all cone points with every part at most `bound`.
fn cone_parts(k1: usize, k2: usize, bound: usize) -> Vec<(Vec<i64>, Vec<i64>)> {
    let d = k1 - k2;
    let mut us = Vec::new();
    decreasing(k1, bound as i64, &|_| 0, &mut us);
    let mut out = Vec::new();
    for nu in us {
        let mut vs = Vec::new();
        decreasing(k2, bound as i64, &|b| nu[b + d], &mut vs);
        for nv in vs {
            out.push((nu.clone(), nv));
        }
    }
    out
}

/// Every cone point with integer parts in `[0, bound]`.
pub fn enumerate_cone(spec: &ConeSpec) -> Result<Vec<LatticePoint>> {
    if spec.k1 < spec.k2 {
        return Err(Error::InvalidParams(format!("k1={} < k2={}", spec.k1, spec.k2)));
    }
    Ok(cone_parts(spec.k1, spec.k2, spec.bound)
        .into_iter()
        .map(|(nu, nv)| LatticePoint::from_integer_parts(nu, nv, spec.gamma))
        .collect())
}

/// Cone points whose largest integer part equals `shell`.
pub fn shell_points(k1: usize, k2: usize, gamma: f64, shell: usize) -> Vec<LatticePoint> {
    let s = shell as i64;
    cone_parts(k1, k2, shell)
        .into_iter()
        .filter(|(nu, nv)| nu.first().copied().unwrap_or(0).max(nv.first().copied().unwrap_or(0)) == s)
        .map(|(nu, nv)| LatticePoint::from_integer_parts(nu, nv, gamma))
        .collect()
}

fn series_params(which: SeriesKind, p: &ParamSet) -> Result<ParamSet> {
    let q = match which {
        SeriesKind::Dexp => ParamSet { k2: 0, ..*p },
        SeriesKind::Dexp3 => *p,
    };
    q.check_series()?;
    Ok(q)
}

fn shell_sum(points: &[LatticePoint], p: &ParamSet, cfg: &LimitConfig, sym: &SymTable) -> Result<f64> {
    let vals: Vec<f64> = points
        .par_iter()
        .map(|pt| f_limit_with(pt, p, cfg, sym))
        .collect::<Result<_>>()?;
    Ok(vals.iter().sum())
}

/// Sum of shells `0..=bound` without a stopping rule.
pub fn sum_fixed(which: SeriesKind, p: &ParamSet, bound: usize, cfg: &LimitConfig) -> Result<SeriesResult> {
    let q = series_params(which, p)?;
    let sym = SymTable::new(q.k1, q.k2)?;
    let mut total = 0.0;
    let mut last = 0.0;
    for s in 0..=bound {
        last = shell_sum(&shell_points(q.k1, q.k2, q.gamma, s), &q, cfg, &sym)?;
        total += last;
    }
    Ok(SeriesResult {
        partial_sum: total,
        last_shell: last,
        bound,
        converged: last.abs() <= DEFAULT_REL_TOL * total.abs(),
    })
}

/// Shells are added until two consecutive ones fall below `rel_tol` relative
/// to the running sum, or `max_bound` is reached.
pub fn sum_discrete_with(
    which: SeriesKind,
    p: &ParamSet,
    rel_tol: f64,
    max_bound: usize,
    cfg: &LimitConfig,
) -> Result<SeriesResult> {
    let q = series_params(which, p)?;
    let sym = SymTable::new(q.k1, q.k2)?;
    let mut total = 0.0;
    let mut last = 0.0;
    let mut small = 0;
    for s in 0..=max_bound {
        last = shell_sum(&shell_points(q.k1, q.k2, q.gamma, s), &q, cfg, &sym)?;
        total += last;
        if last.abs() <= rel_tol * total.abs() {
            small += 1;
            if small >= 2 && s >= 3 {
                return Ok(SeriesResult {
                    partial_sum: total,
                    last_shell: last,
                    bound: s,
                    converged: true,
                });
            }
        } else {
            small = 0;
        }
    }
    Ok(SeriesResult {
        partial_sum: total,
        last_shell: last,
        bound: max_bound,
        converged: last.abs() <= rel_tol * total.abs(),
    })
}

pub fn sum_discrete(which: SeriesKind, p: &ParamSet, rel_tol: f64, max_bound: usize) -> Result<SeriesResult> {
    sum_discrete_with(which, p, rel_tol, max_bound, &LimitConfig::default())
}

/// Breakdown of a sum over the full box `[-bound, bound]^{k1+k2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TotalLatticeSum {
    pub total: SeriesResult,
    pub cone_sum: f64,
    pub off_cone_sum: f64,
    /// Largest `|F|` over the off-cone points.
    pub off_cone_max: f64,
}

/// Sums `F` over every shifted-lattice point with integer parts in
/// `[-bound, bound]`, cone or not.
pub fn sum_over_total_lattice(p: &ParamSet, bound: usize) -> Result<TotalLatticeSum> {
    p.check_series()?;
    let (k1, k2) = (p.k1, p.k2);
    let dim = k1 + k2;
    let b = bound as i64;
    let width = (2 * b + 1) as usize;
    let count = width
        .checked_pow(dim as u32)
        .ok_or_else(|| Error::InvalidParams("box too large".into()))?;
    let sym = SymTable::new(k1, k2)?;
    let cfg = LimitConfig::default();
    let vals: Vec<(bool, f64)> = (0..count)
        .into_par_iter()
        .map(|mut idx| {
            let mut parts = Vec::with_capacity(dim);
            for _ in 0..dim {
                parts.push((idx % width) as i64 - b);
                idx /= width;
            }
            let nv = parts.split_off(k1);
            let pt = LatticePoint::from_integer_parts(parts, nv, p.gamma);
            Ok((pt.in_cone, f_limit_with(&pt, p, &cfg, &sym)?))
        })
        .collect::<Result<_>>()?;
    let (mut cone, mut off, mut off_max) = (0.0, 0.0, 0.0f64);
    for (inside, v) in &vals {
        if *inside {
            cone += v;
        } else {
            off += v;
            off_max = off_max.max(v.abs());
        }
    }
    let total = cone + off;
    Ok(TotalLatticeSum {
        total: SeriesResult {
            partial_sum: total,
            last_shell: f64::NAN,
            bound,
            converged: true,
        },
        cone_sum: cone,
        off_cone_sum: off,
        off_cone_max: off_max,
    })
}

/// Which reading of the first coefficient of the `z2` equation to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Z2Variant {
    /// `k2(k2-1)gamma / (2 z2)`.
    Z2,
    /// `k2(k2-1)gamma / (2 z1)`, as printed.
    Printed,
}

/// Coefficients `(c1, c2)` of `dPsi/dz_i = c_i Psi`.
pub fn pde_coefficients(p: &ParamSet, variant: Z2Variant) -> (f64, f64) {
    let (k1, k2) = (p.k1 as f64, p.k2 as f64);
    let (z1, z2, g) = (p.z1, p.z2, p.gamma);
    let e = p.alpha - g + k1 * g;
    let c1 = k1 * (k1 - 1.0) * g / (2.0 * z1) + (k1 - k2) * e / (1.0 - z1) + z2 * k2 * e / (1.0 - z1 * z2);
    let zd = match variant {
        Z2Variant::Z2 => z2,
        Z2Variant::Printed => z1,
    };
    let c2 = k2 * (k2 - 1.0) * g / (2.0 * zd) - k2 * (k1 - k2 + 1.0) * g / (1.0 - z2) + z1 * k2 * e / (1.0 - z1 * z2);
    (c1, c2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdeResidual {
    pub z1: f64,
    pub z2: f64,
    /// Residual of the `z2` equation with the printed `z1` denominator.
    pub z2_printed: f64,
}

fn residuals(psi: impl Fn(f64, f64) -> Result<f64>, p: &ParamSet, step: f64) -> Result<PdeResidual> {
    let (z1, z2) = (p.z1, p.z2);
    let centre = psi(z1, z2)?;
    let diff = |f: &dyn Fn(f64) -> Result<f64>| -> Result<f64> {
        Ok((8.0 * (f(step)? - f(-step)?) - (f(2.0 * step)? - f(-2.0 * step)?)) / (12.0 * step))
    };
    let d1 = diff(&|h| psi(z1 + h, z2))?;
    let (c1, c2) = pde_coefficients(p, Z2Variant::Z2);
    let (_, c2p) = pde_coefficients(p, Z2Variant::Printed);
    let rel = |d: f64, c: f64| (d - c * centre).abs() / (c * centre).abs();
    let (r2, r2p) = if p.k2 > 0 {
        let d2 = diff(&|h| psi(z1, z2 + h))?;
        (rel(d2, c2), rel(d2, c2p))
    } else {
        (0.0, 0.0)
    };
    Ok(PdeResidual {
        z1: rel(d1, c1),
        z2: r2,
        z2_printed: r2p,
    })
}

/// Five-point central-difference residuals of the series. The truncation is fixed once,
/// at the outer corner of the stencil, so every evaluation sums the same
/// points.
pub fn pde_residual(p: &ParamSet, step: f64) -> Result<PdeResidual> {
    p.check_series()?;
    let cfg = LimitConfig::default();
    let corner = ParamSet {
        z1: p.z1 + 2.0 * step,
        z2: p.z2 + 2.0 * step,
        ..*p
    };
    let probe = sum_discrete_with(SeriesKind::Dexp3, &corner, 1e-14, default_max_bound(p.k1, p.k2), &cfg)?;
    if !probe.converged {
        return Err(Error::NotConverged(format!(
            "series not converged at bound {}",
            probe.bound
        )));
    }
    let bound = probe.bound + 2;
    residuals(
        |z1, z2| Ok(sum_fixed(SeriesKind::Dexp3, &ParamSet { z1, z2, ..*p }, bound, &cfg)?.partial_sum),
        p,
        step,
    )
}

/// The same residuals for the closed-form right-hand side.
pub fn pde_residual_closed_form(p: &ParamSet, step: f64) -> Result<PdeResidual> {
    residuals(
        |z1, z2| Ok(sl3_discrete_rhs(&ParamSet { z1, z2, ..*p })?.to_real()),
        p,
        step,
    )
}

/// The power of `eps` relating the two sl3 products under
/// `z_i = exp(-eps beta_i)`.
pub fn epsilon_power(p: &ParamSet) -> f64 {
    let (k1, k2, g) = (p.k1 as f64, p.k2 as f64, p.gamma);
    k1 * (g - p.alpha - k1 * g) + k2 * (k1 - k2 + 1.0) * g
}

/// `|discrete(z(eps)) / (eps^E * exp) - 1|` with `z_i = exp(-eps beta_i)`.
pub fn epsilon_link(p: &ParamSet, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("eps = {eps} must be positive")));
    }
    let q = ParamSet {
        z1: (-eps * p.beta1).exp(),
        z2: (-eps * p.beta2).exp(),
        ..*p
    };
    let lhs = sl3_discrete_rhs(&q)?;
    let rhs = sl3_exp_rhs(p)? * LogSigned::from_log(epsilon_power(p) * eps.ln());
    Ok(lhs.rel_diff(rhs))
}

/// Brute-force cone membership over the integer box, for testing.
pub fn brute_force_cone(k1: usize, k2: usize, bound: usize) -> Vec<(Vec<i64>, Vec<i64>)> {
    let dim = k1 + k2;
    let width = bound + 1;
    let mut out = Vec::new();
    for mut idx in 0..width.pow(dim as u32) {
        let mut parts = Vec::with_capacity(dim);
        for _ in 0..dim {
            parts.push((idx % width) as i64);
            idx /= width;
        }
        let nv = parts.split_off(k1);
        if cone_contains(&parts, &nv) {
            out.push((parts, nv));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_series() {
        let p = ParamSet::series(1, 0, 1.0, -0.2, 0.5, 0.5);
        let r = sum_discrete(SeriesKind::Dexp, &p, 1e-12, 200).unwrap();
        assert!(r.converged);
        assert!((r.partial_sum - 2.0).abs() < 1e-10);
    }

    #[test]
    fn small_cone_counts() {
        assert_eq!(
            enumerate_cone(&ConeSpec {
                k1: 1,
                k2: 0,
                gamma: -0.1,
                bound: 3
            })
            .unwrap()
            .len(),
            4
        );
        assert_eq!(
            enumerate_cone(&ConeSpec {
                k1: 2,
                k2: 0,
                gamma: -0.1,
                bound: 2
            })
            .unwrap()
            .len(),
            6
        );
    }
}

//! The linear system relating the integrals `J_{l1,l2,m}` and `J~_{l1,l2,m}`.
//!
//! Two relation families connect neighbouring admissible triples:
//!
//! - first: `(a + (k1-l1-1)c) J_{l1,l2,m} = (b1 + (l1-l2+m)c) J_{l1+1,l2,m}
//!   - (l2-m)c J_{l1+1,l2,m+1}`, for `l1 < k1-k2+l2`;
//! - second: `(k2-k1+l1-l2)c J_{l1,l2-1,m} = (b2 + (l2-m-1)c) J_{l1,l2,m}
//!   + (l1-m)c J_{l1,l2,m+1}`, for `m < l2`.
//!
//! The tilde family replaces `b1 + (l1-l2+m)c` by `b1 + (l1-m)c` and
//! `b2 + (l2-m-1)c` by `b2 + (l2-l1+m-1)c`. Terms with inadmissible indices
//! are dropped. Starting from `J_{0,0,0}` the relations are eliminated in the
//! order `l2`, then `l1`, then `m`, first family before second; a relation
//! enters the pivot set only if it raises the rank, the rest are checks.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::chains::{integrate_chain, Chain, ChainIntegrand, Interval, QuadSpec};
use crate::closed_forms::{aomoto_rhs, j_closed_forms, selberg_value, AomotoForm, JForm, ParamSet};
use crate::error::{Error, Result};
use crate::integrands::{is_admissible, Assembled};
use crate::numerics::LogSigned;

/// Smallest acceptable pivot after elimination, relative to the row scale.
pub const PIVOT_GUARD: f64 = 1e-6;
/// Largest acceptable relative residual of a check relation.
pub const CHECK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AdmissibleTriple {
    pub l1: usize,
    pub l2: usize,
    pub m: usize,
}

impl AdmissibleTriple {
    pub fn new(l1: usize, l2: usize, m: usize, k1: usize, k2: usize) -> Result<Self> {
        if is_admissible(l1, l2, m, k1, k2) {
            Ok(AdmissibleTriple { l1, l2, m })
        } else {
            Err(Error::InadmissibleTriple { l1, l2, m, k1, k2 })
        }
    }
}

impl std::fmt::Display for AdmissibleTriple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.l1, self.l2, self.m)
    }
}

/// All admissible triples in elimination order (`l2`, then `l1`, then `m`).
pub fn admissible_triples(k1: usize, k2: usize) -> Vec<AdmissibleTriple> {
    let mut out = Vec::new();
    if k1 < k2 {
        return out;
    }
    for l2 in 0..=k2 {
        for l1 in 0..=(k1 - k2 + l2) {
            for m in 0..=l1.min(l2) {
                out.push(AdmissibleTriple { l1, l2, m });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    J,
    JTilde,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RelationKind {
    First,
    Second,
}

/// One instantiated relation `sum_i coeff_i J_{triple_i} = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Relation {
    pub kind: RelationKind,
    pub at: AdmissibleTriple,
    pub terms: Vec<(AdmissibleTriple, f64)>,
}

impl Relation {
    pub fn name(&self) -> String {
        let k = match self.kind {
            RelationKind::First => "first",
            RelationKind::Second => "second",
        };
        format!("{k}{}", self.at)
    }

    /// `|sum c J| / sum |c J|` for the given values.
    pub fn residual(&self, value: impl Fn(&AdmissibleTriple) -> f64) -> f64 {
        let (mut sum, mut scale) = (0.0, 0.0);
        for (t, c) in &self.terms {
            let x = c * value(t);
            sum += x;
            scale += x.abs();
        }
        if scale == 0.0 {
            0.0
        } else {
            sum.abs() / scale
        }
    }
}

/// Every relation of one family in elimination order.
pub fn relations(family: Family, p: &ParamSet) -> Vec<Relation> {
    let (k1, k2) = (p.k1, p.k2);
    let (a, b1, b2, c) = (p.alpha, p.beta1, p.beta2, p.gamma);
    let tilde = family == Family::JTilde;
    let adm = |l1: i64, l2: i64, m: i64| {
        l1 >= 0 && l2 >= 0 && m >= 0 && is_admissible(l1 as usize, l2 as usize, m as usize, k1, k2)
    };
    let trip = |l1: i64, l2: i64, m: i64| AdmissibleTriple {
        l1: l1 as usize,
        l2: l2 as usize,
        m: m as usize,
    };
    let (k1i, k2i) = (k1 as i64, k2 as i64);
    let mut out = Vec::new();
    for at in admissible_triples(k1, k2) {
        let (l1, l2, m) = (at.l1 as i64, at.l2 as i64, at.m as i64);
        let f = |x: i64| x as f64;
        if l1 < k1i - k2i + l2 {
            let shift = if tilde { f(l1 - m) } else { f(l1 - l2 + m) };
            let mut terms = vec![(at, a + f(k1i - l1 - 1) * c)];
            if adm(l1 + 1, l2, m) {
                terms.push((trip(l1 + 1, l2, m), -(b1 + shift * c)));
            }
            if adm(l1 + 1, l2, m + 1) {
                terms.push((trip(l1 + 1, l2, m + 1), f(l2 - m) * c));
            }
            out.push(Relation {
                kind: RelationKind::First,
                at,
                terms,
            });
        }
        if m < l2 {
            let shift = if tilde { f(l2 - l1 + m - 1) } else { f(l2 - m - 1) };
            let mut terms = Vec::new();
            if adm(l1, l2 - 1, m) {
                terms.push((trip(l1, l2 - 1, m), f(k2i - k1i + l1 - l2) * c));
            }
            terms.push((at, -(b2 + shift * c)));
            if adm(l1, l2, m + 1) {
                terms.push((trip(l1, l2, m + 1), -f(l1 - m) * c));
            }
            out.push(Relation {
                kind: RelationKind::Second,
                at,
                terms,
            });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Seed,
    RelationDerived,
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JEntry {
    pub value: LogSigned,
    pub provenance: Provenance,
}

/// Solved values of one family with the elimination record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JTable {
    pub family: Family,
    pub k1: usize,
    pub k2: usize,
    pub entries: BTreeMap<AdmissibleTriple, JEntry>,
    /// Pivot relations with the unknown each one determined, in order.
    pub pivots: Vec<(String, AdmissibleTriple)>,
    /// Relations not used as pivots.
    pub checks: Vec<String>,
}

impl JTable {
    pub fn get(&self, l1: usize, l2: usize, m: usize) -> Result<LogSigned> {
        self.entries
            .get(&AdmissibleTriple { l1, l2, m })
            .map(|e| e.value)
            .ok_or(Error::InadmissibleTriple {
                l1,
                l2,
                m,
                k1: self.k1,
                k2: self.k2,
            })
    }
}

/// Selects pivot relations by rank-increasing elimination and solves the
/// system relative to `J_{0,0,0} = 1`.
fn solve_unit(
    family: Family,
    p: &ParamSet,
) -> Result<(
    BTreeMap<AdmissibleTriple, f64>,
    Vec<(String, AdmissibleTriple)>,
    Vec<Relation>,
)> {
    let triples = admissible_triples(p.k1, p.k2);
    let seed = AdmissibleTriple { l1: 0, l2: 0, m: 0 };
    let unknowns: Vec<AdmissibleTriple> = triples.iter().copied().filter(|t| *t != seed).collect();
    let col: BTreeMap<AdmissibleTriple, usize> = unknowns.iter().enumerate().map(|(i, t)| (*t, i)).collect();
    let u = unknowns.len();
    let rels = relations(family, p);

    // Echelon basis: (reduced row, pivot column).
    let mut basis: Vec<(Vec<f64>, usize)> = Vec::new();
    let mut chosen: Vec<usize> = Vec::new();
    let mut pivots = Vec::new();
    let mut checks = Vec::new();
    let mut smallest = f64::INFINITY;
    for (ri, rel) in rels.iter().enumerate() {
        let mut row = vec![0.0; u];
        for (t, c) in &rel.terms {
            if let Some(&j) = col.get(t) {
                row[j] += c;
            }
        }
        let scale = row.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (b, pc) in &basis {
            let f = row[*pc] / b[*pc];
            if f != 0.0 {
                for (x, y) in row.iter_mut().zip(b) {
                    *x -= f * y;
                }
            }
        }
        let (pc, pv) = row.iter().enumerate().fold(
            (0, 0.0f64),
            |acc, (j, x)| if x.abs() > acc.1 { (j, x.abs()) } else { acc },
        );
        if scale > 0.0 && pv > PIVOT_GUARD * scale {
            smallest = smallest.min(pv / scale);
            basis.push((row, pc));
            chosen.push(ri);
            pivots.push((rel.name(), unknowns[pc]));
        } else {
            checks.push(rel.clone());
        }
        if basis.len() == u {
            checks.extend(rels[ri + 1..].iter().cloned());
            break;
        }
    }
    if basis.len() < u {
        let covered: Vec<usize> = basis.iter().map(|b| b.1).collect();
        let missing = (0..u).find(|j| !covered.contains(j)).map(|j| unknowns[j]);
        return Err(Error::PivotZero {
            relation: format!("no pivot for J{}", missing.map_or(String::new(), |t| t.to_string())),
            value: if smallest.is_finite() { 0.0 } else { f64::NAN },
        });
    }
    let mut a = DMatrix::<f64>::zeros(u, u);
    let mut rhs = DVector::<f64>::zeros(u);
    for (i, &ri) in chosen.iter().enumerate() {
        for (t, c) in &rels[ri].terms {
            match col.get(t) {
                Some(&j) => a[(i, j)] += c,
                None => rhs[i] -= c,
            }
        }
    }
    let sol = a.full_piv_lu().solve(&rhs).ok_or_else(|| Error::PivotZero {
        relation: "pivot system".into(),
        value: 0.0,
    })?;
    let mut values = BTreeMap::new();
    values.insert(seed, 1.0);
    for (j, t) in unknowns.iter().enumerate() {
        values.insert(*t, sol[j]);
    }
    Ok((values, pivots, checks))
}

/// Solves one family from the seed `J_{0,0,0}`.
pub fn solve_family(family: Family, p: &ParamSet, seed_value: LogSigned) -> Result<JTable> {
    p.check_ranks()?;
    let (values, pivots, checks) = solve_unit(family, p)?;
    for rel in &checks {
        let r = rel.residual(|t| values[t]);
        if r > CHECK_TOL {
            return Err(Error::InconsistentSystem {
                relation: rel.name(),
                residual: r,
            });
        }
    }
    let entries = values
        .into_iter()
        .map(|(t, v)| {
            let provenance = if t == (AdmissibleTriple { l1: 0, l2: 0, m: 0 }) {
                Provenance::Seed
            } else {
                Provenance::RelationDerived
            };
            (
                t,
                JEntry {
                    value: seed_value * LogSigned::from_real(v),
                    provenance,
                },
            )
        })
        .collect();
    Ok(JTable {
        family,
        k1: p.k1,
        k2: p.k2,
        entries,
        pivots,
        checks: checks.iter().map(|r| r.name()).collect(),
    })
}

/// Solves both families from the common seed `J_{0,0,0} = J~_{0,0,0}`.
pub fn solve_j(p: &ParamSet, seed_value: LogSigned) -> Result<(JTable, JTable)> {
    Ok((
        solve_family(Family::J, p, seed_value)?,
        solve_family(Family::JTilde, p, seed_value)?,
    ))
}

/// Solves both families seeded with the closed form of `J_{0,0,0}`.
pub fn solve_j_closed(p: &ParamSet) -> Result<(JTable, JTable)> {
    solve_j(p, j_closed_forms(JForm::J000, p)?)
}

/// The order in which the solver determines each unknown.
pub fn schedule(family: Family, p: &ParamSet) -> Result<Vec<(String, AdmissibleTriple)>> {
    Ok(solve_unit(family, p)?.1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationResidual {
    pub family: Family,
    pub relation: String,
    pub residual: f64,
}

/// Relative residual of every instantiated relation of the table's family.
pub fn verify_relations(table: &JTable, p: &ParamSet) -> Vec<RelationResidual> {
    relations(table.family, p)
        .iter()
        .map(|rel| RelationResidual {
            family: table.family,
            relation: rel.name(),
            residual: rel.residual(|t| table.entries.get(t).map_or(f64::NAN, |e| e.value.to_real())),
        })
        .collect()
}

/// Ratio relations, boundary identities and quadrature of the sl2 family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AomotoReport {
    pub k: usize,
    /// Relative residual of `(a+(k-l-1)c) I_l = (b+lc) I_{l+1}`, per `l < k`.
    pub ratio_residuals: Vec<f64>,
    /// Relative errors of `I_0 = S(a, b+1)` and `I_k = S(a+1, b)`.
    pub boundary_residuals: [f64; 2],
    /// `(l, quadrature value, error estimate, relative deviation)`.
    pub quadrature: Vec<(usize, f64, f64, f64)>,
}

/// Largest `k` for the quadrature arm of [`aomoto_suite`].
pub const AOMOTO_QUAD_MAX_K: usize = 4;

pub fn aomoto_suite(k: usize, p: &ParamSet, quad: Option<&QuadSpec>) -> Result<AomotoReport> {
    let (a, b, c) = (p.alpha, p.beta1, p.gamma);
    let q = ParamSet { k1: k, k2: 0, ..*p };
    let vals: Vec<f64> = (0..=k)
        .map(|l| aomoto_rhs(k, l, &q, AomotoForm::Mixed).map(|v| v.to_real()))
        .collect::<Result<_>>()?;
    let ratio_residuals = (0..k)
        .map(|l| {
            let lf = l as f64;
            let lhs = (a + (k as f64 - lf - 1.0) * c) * vals[l];
            let rhs = (b + lf * c) * vals[l + 1];
            (lhs - rhs).abs() / lhs.abs().max(rhs.abs())
        })
        .collect();
    let s0 = selberg_value(k, a, b + 1.0, c)?.to_real();
    let sk = selberg_value(k, a + 1.0, b, c)?.to_real();
    let boundary_residuals = [(vals[0] / s0 - 1.0).abs(), (vals[k] / sk - 1.0).abs()];
    let mut quadrature = Vec::new();
    if let Some(spec) = quad {
        if k > AOMOTO_QUAD_MAX_K {
            return Err(Error::InvalidParams(format!(
                "quadrature arm supports k <= {AOMOTO_QUAD_MAX_K}"
            )));
        }
        let chain = Chain::simplex(k, 0)?;
        for (l, &want) in vals.iter().enumerate() {
            let f = ChainIntegrand::for_identity(Assembled::Aomoto(l), &q)?;
            let (v, e) = integrate_chain(&f, &chain, Interval::Unit, spec)?;
            quadrature.push((l, v, e, (v / want - 1.0).abs()));
        }
    }
    Ok(AomotoReport {
        k,
        ratio_residuals,
        boundary_residuals,
        quadrature,
    })
}

/// Relative difference between `J_{0,l,0}(a+1, b1, b2)` and
/// `J_{k1,k2,k2-l}(a, b1+1, b2)`, each from its own solved table.
pub fn jjl_shift_check(p: &ParamSet, l: usize) -> Result<f64> {
    if l > p.k2 {
        return Err(Error::Domain(format!("l = {l} exceeds k2 = {}", p.k2)));
    }
    let left_p = p.with_alpha(p.alpha + 1.0);
    let right_p = p.with_betas(p.beta1 + 1.0, p.beta2);
    let (left, _) = solve_j_closed(&left_p)?;
    let (right, _) = solve_j_closed(&right_p)?;
    let x = left.get(0, l, 0)?;
    let y = right.get(p.k1, p.k2, p.k2 - l)?;
    Ok(x.rel_diff(y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sl2_chain_matches_aomoto() {
        let p = ParamSet::sl3(3, 0, 1.4, 1.1, 1.0, -0.13);
        let (t, _) = solve_j_closed(&p).unwrap();
        for l in 0..=3 {
            let want = aomoto_rhs(3, l, &p, AomotoForm::Mixed).unwrap();
            assert!(t.get(l, 0, 0).unwrap().rel_diff(want) < 1e-12);
        }
    }

    #[test]
    fn inadmissible_two_zero_zero() {
        assert!(AdmissibleTriple::new(2, 0, 0, 2, 1).is_err());
    }
}

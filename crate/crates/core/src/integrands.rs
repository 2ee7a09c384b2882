//! Summands of the discrete series and integrands of the continuous ones.
//!
//! Lattice coordinates are handled in structured form `n + c*gamma + e`
//! (integer part, gamma-shift coefficient, small real offset). Differences of
//! such coordinates are then exact in their integer and shift parts, so the
//! offset that drives a gamma argument into a pole is never lost to
//! cancellation. This is what makes the directional limits of `F` at lattice
//! points numerically stable.

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::closed_forms::ParamSet;
use crate::error::{Error, Result};
use crate::numerics::{log_gamma_split, near_pole, pow_pos, recip_gamma_split, LogSigned, POLE_TOL};

/// Distance to a pole hyperplane below which evaluation is refused.
pub const NEAR_SINGULAR_TOL: f64 = 1e-9;

/// Upper bound on `k1! * k2!` for explicit symmetrisation.
pub const SYM_CAP: usize = 40_320;

/// Permutation tables for the symmetrisation over `S_k1 x S_k2`.
#[derive(Debug, Clone)]
pub struct SymTable {
    pub k1: usize,
    pub k2: usize,
    pub tperms: Vec<Vec<usize>>,
    pub sperms: Vec<Vec<usize>>,
}

impl SymTable {
    pub fn new(k1: usize, k2: usize) -> Result<Self> {
        let fact = |k: usize| (1..=k).product::<usize>();
        let cost = fact(k1).saturating_mul(fact(k2));
        if cost > SYM_CAP {
            return Err(Error::Domain(format!(
                "symmetrisation over S_{k1} x S_{k2} has {cost} terms, cap is {SYM_CAP}"
            )));
        }
        Ok(SymTable {
            k1,
            k2,
            tperms: (0..k1).permutations(k1).collect(),
            sperms: (0..k2).permutations(k2).collect(),
        })
    }

    pub fn count(&self) -> f64 {
        (self.tperms.len() * self.sperms.len()) as f64
    }
}

/// A point of the shifted lattice `Z^{k1}_gamma x Z^{k2}_gamma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticePoint {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// Integer parts `u_a - (k1 - a) gamma`.
    pub nu: Vec<i64>,
    /// Integer parts `v_b - (k2 - b) gamma`.
    pub nv: Vec<i64>,
    pub in_cone: bool,
}

impl LatticePoint {
    pub fn from_integer_parts(nu: Vec<i64>, nv: Vec<i64>, gamma: f64) -> Self {
        let (k1, k2) = (nu.len(), nv.len());
        let u = nu
            .iter()
            .enumerate()
            .map(|(a, &n)| n as f64 + (k1 - 1 - a) as f64 * gamma)
            .collect();
        let v = nv
            .iter()
            .enumerate()
            .map(|(b, &n)| n as f64 + (k2 - 1 - b) as f64 * gamma)
            .collect();
        let in_cone = cone_contains(&nu, &nv);
        LatticePoint { u, v, nu, nv, in_cone }
    }

    /// Recovers the integer parts from real coordinates on the lattice.
    pub fn from_coordinates(u: Vec<f64>, v: Vec<f64>, gamma: f64) -> Result<Self> {
        let split = |x: &[f64]| -> Result<Vec<i64>> {
            let k = x.len();
            x.iter()
                .enumerate()
                .map(|(i, &xi)| {
                    let n = xi - (k - 1 - i) as f64 * gamma;
                    if (n - n.round()).abs() > 1e-9 {
                        Err(Error::Domain(format!("{xi} is not on the shifted lattice")))
                    } else {
                        Ok(n.round() as i64)
                    }
                })
                .collect()
        };
        Ok(Self::from_integer_parts(split(&u)?, split(&v)?, gamma))
    }

    fn coords(&self) -> (Vec<Coord>, Vec<Coord>) {
        let (k1, k2) = (self.nu.len(), self.nv.len());
        let u = self
            .nu
            .iter()
            .enumerate()
            .map(|(a, &n)| Coord {
                n,
                c: (k1 - 1 - a) as i64,
                e: 0.0,
            })
            .collect();
        let v = self
            .nv
            .iter()
            .enumerate()
            .map(|(b, &n)| Coord {
                n,
                c: (k2 - 1 - b) as i64,
                e: 0.0,
            })
            .collect();
        (u, v)
    }
}

/// Membership of integer parts in the lattice cone: both blocks weakly
/// decreasing, nonnegative, and `nv[b] >= nu[b + k1 - k2]`.
pub fn cone_contains(nu: &[i64], nv: &[i64]) -> bool {
    let (k1, k2) = (nu.len(), nv.len());
    if k2 > k1 {
        return false;
    }
    let ordered = |x: &[i64]| x.windows(2).all(|w| w[0] >= w[1]) && x.iter().all(|&n| n >= 0);
    ordered(nu) && ordered(nv) && (0..k2).all(|b| nv[b] >= nu[b + k1 - k2])
}

/// A point of the continuous integration domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousPoint {
    pub t: Vec<f64>,
    pub s: Vec<f64>,
}

impl ContinuousPoint {
    pub fn new(t: Vec<f64>, s: Vec<f64>) -> Self {
        ContinuousPoint { t, s }
    }
}

/// Structured coordinate `n + c*gamma + e`.
#[derive(Debug, Clone, Copy)]
struct Coord {
    n: i64,
    c: i64,
    e: f64,
}

/// Structured gamma argument `n + frac` with `|frac| <= 1/2`.
#[derive(Debug, Clone, Copy)]
struct Arg {
    n: i64,
    frac: f64,
}

impl Arg {
    fn new(n: i64, frac: f64) -> Self {
        let r = frac.round();
        Arg {
            n: n + r as i64,
            frac: frac - r,
        }
    }

    fn value(self) -> f64 {
        self.n as f64 + self.frac
    }

    fn at_pole(self) -> bool {
        self.n <= 0 && self.frac.abs() < POLE_TOL
    }
}

fn lin(n: i64, c: i64, e: f64, gamma: f64, shift: f64) -> Arg {
    Arg::new(n, c as f64 * gamma + e + shift)
}

/// Structured value of `x - y + k*gamma + shift`.
fn dif(x: Coord, y: Coord, k: i64, shift: f64, gamma: f64) -> Arg {
    lin(x.n - y.n, x.c - y.c + k, x.e - y.e, gamma, shift)
}

fn one(x: Coord, shift: f64, gamma: f64) -> Arg {
    lin(x.n, x.c, x.e, gamma, shift)
}

/// Every gamma factor of the master function, as (argument, in numerator).
fn phi_gamma_args(u: &[Coord], v: &[Coord], p: &ParamSet) -> Vec<(Arg, bool)> {
    let g = p.gamma;
    let mut out = Vec::new();
    for &x in u {
        out.push((one(x, p.alpha, g), true));
        out.push((one(x, 1.0, g), false));
    }
    for &x in u {
        for &y in v {
            out.push((dif(y, x, -1, 1.0, g), true));
            out.push((dif(y, x, 0, 1.0, g), false));
        }
    }
    for block in [u, v] {
        for a in 0..block.len() {
            for b in a + 1..block.len() {
                out.push((dif(block[a], block[b], 1, 0.0, g), true));
                out.push((dif(block[a], block[b], -1, 1.0, g), false));
            }
        }
    }
    out
}

fn phi_structured(u: &[Coord], v: &[Coord], p: &ParamSet) -> Result<LogSigned> {
    let g = p.gamma;
    let su: f64 = u.iter().map(|x| one(*x, 0.0, g).value()).sum();
    let mut out = pow_pos(p.z1, su)?;
    if !v.is_empty() {
        let sv: f64 = v.iter().map(|x| one(*x, 0.0, g).value()).sum();
        out = out * pow_pos(p.z2, sv)?;
    }
    for (arg, num) in phi_gamma_args(u, v, p) {
        out = out
            * if num {
                log_gamma_split(arg.n, arg.frac)?
            } else {
                recip_gamma_split(arg.n, arg.frac)
            };
    }
    for block in [u, v] {
        for a in 0..block.len() {
            for b in a + 1..block.len() {
                out = out * LogSigned::from_real(dif(block[a], block[b], 0, 0.0, g).value());
            }
        }
    }
    Ok(out)
}

fn checked_den(x: f64, what: &str) -> Result<f64> {
    if x.abs() < NEAR_SINGULAR_TOL {
        Err(Error::NearSingular {
            what: what.to_string(),
            tol: NEAR_SINGULAR_TOL,
        })
    } else {
        Ok(x)
    }
}

fn w_structured(u: &[Coord], v: &[Coord], gamma: f64, sym: &SymTable) -> Result<f64> {
    let (k1, k2) = (u.len(), v.len());
    let d = k1 - k2;
    let g = gamma;
    let mut total = 0.0;
    for tp in &sym.tperms {
        for sp in &sym.sperms {
            let uu = |i: usize| u[tp[i]];
            let vv = |j: usize| v[sp[j]];
            let mut term = 1.0;
            for b in 0..k2 {
                term /= checked_den(dif(vv(b), uu(b + d), -1, 0.0, g).value(), "v_b - u_a = gamma")?;
            }
            for a in 0..k2 {
                for b in 0..a {
                    let num = dif(vv(b), uu(a + d), 0, 0.0, g).value();
                    let den = checked_den(dif(vv(b), uu(a + d), -1, 0.0, g).value(), "v_b - u_a = gamma")?;
                    term *= num / den;
                }
            }
            for a in 0..k1 {
                for b in a + 1..k1 {
                    let num = dif(uu(a), uu(b), -1, 0.0, g).value();
                    let den = checked_den(dif(uu(a), uu(b), 0, 0.0, g).value(), "u_a = u_b")?;
                    term *= num / den;
                }
            }
            for a in 0..k2 {
                for b in a + 1..k2 {
                    let num = dif(vv(a), vv(b), -1, 0.0, g).value();
                    let den = checked_den(dif(vv(a), vv(b), 0, 0.0, g).value(), "v_a = v_b")?;
                    term *= num / den;
                }
            }
            total += term;
        }
    }
    Ok(total / sym.count())
}

fn real_coords(x: &[f64]) -> Vec<Coord> {
    x.iter().map(|&e| Coord { n: 0, c: 0, e }).collect()
}

/// The master function at an arbitrary real point (off the pole set).
pub fn master_phi(u: &[f64], v: &[f64], p: &ParamSet) -> Result<LogSigned> {
    let (cu, cv) = (real_coords(u), real_coords(v));
    for (arg, num) in phi_gamma_args(&cu, &cv, p) {
        if num && near_pole(arg.value(), POLE_TOL) {
            return Err(Error::Pole(arg.value()));
        }
    }
    phi_structured(&cu, &cv, p)
}

/// The weight function `w` at a real point off its pole hyperplanes.
pub fn weight_w(u: &[f64], v: &[f64], gamma: f64) -> Result<f64> {
    let sym = SymTable::new(u.len(), v.len())?;
    w_structured(&real_coords(u), &real_coords(v), gamma, &sym)
}

/// `F = Phi * w` at a real point off all singular hyperplanes.
pub fn f_value(u: &[f64], v: &[f64], p: &ParamSet) -> Result<f64> {
    Ok((master_phi(u, v, p)? * LogSigned::from_real(weight_w(u, v, p.gamma)?)).to_real())
}

/// How `F` behaves at a lattice point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointClass {
    /// No gamma factor at a pole and no weight pole: direct evaluation.
    Regular,
    /// More vanishing factors than singular ones: the limit is zero.
    Vanishing,
    /// Zeros and poles compete: the limit is found by directional probing.
    Singular,
}

/// Counts zeros and poles of the factors of `F` at a lattice point.
pub fn classify(pt: &LatticePoint, p: &ParamSet) -> PointClass {
    let (u, v) = pt.coords();
    let mut zeros = 0i64;
    let mut poles = 0i64;
    for (arg, num) in phi_gamma_args(&u, &v, p) {
        if arg.at_pole() {
            if num {
                poles += 1;
            } else {
                zeros += 1;
            }
        }
    }
    for &x in &u {
        for &y in &v {
            if dif(y, x, -1, 0.0, p.gamma).value().abs() < POLE_TOL {
                poles += 1;
            }
        }
    }
    if zeros == 0 && poles == 0 {
        PointClass::Regular
    } else if zeros > poles {
        PointClass::Vanishing
    } else {
        PointClass::Singular
    }
}

/// Probe schedule for limits of `F` at lattice points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitConfig {
    /// Probe distances in units of `min(1, |gamma|)`.
    pub eps: [f64; 3],
    /// Relative agreement required between two directions.
    pub tol: f64,
    pub seed: u64,
}

impl Default for LimitConfig {
    fn default() -> Self {
        LimitConfig {
            eps: [1e-2, 1e-3, 1e-4],
            tol: 1e-6,
            seed: 0x5e1b_e29a,
        }
    }
}

fn probe(pt: &LatticePoint, p: &ParamSet, dir: &[f64], eps: f64, sym: &SymTable) -> Result<f64> {
    let (mut u, mut v) = pt.coords();
    let k1 = u.len();
    for (i, x) in u.iter_mut().enumerate() {
        x.e = eps * dir[i];
    }
    for (j, x) in v.iter_mut().enumerate() {
        x.e = eps * dir[k1 + j];
    }
    let phi = phi_structured(&u, &v, p)?;
    let w = w_structured(&u, &v, p.gamma, sym)?;
    Ok((phi * LogSigned::from_real(w)).to_real())
}

/// Richardson extrapolation of symmetric probes along one direction.
pub fn f_directional(pt: &LatticePoint, p: &ParamSet, dir: &[f64], cfg: &LimitConfig) -> Result<f64> {
    let sym = SymTable::new(pt.nu.len(), pt.nv.len())?;
    directional_with(pt, p, dir, cfg, &sym)
}

fn directional_with(pt: &LatticePoint, p: &ParamSet, dir: &[f64], cfg: &LimitConfig, sym: &SymTable) -> Result<f64> {
    let scale = p.gamma.abs().min(1.0);
    let mut h = [0.0; 3];
    let mut t = [0.0; 3];
    for (i, &e) in cfg.eps.iter().enumerate() {
        let eps = e * scale;
        let plus = probe(pt, p, dir, eps, sym)?;
        let minus = probe(pt, p, dir, -eps, sym)?;
        h[i] = eps * eps;
        t[i] = 0.5 * (plus + minus);
    }
    for m in 1..3 {
        for i in 0..3 - m {
            t[i] = (h[i] * t[i + 1] - h[i + m] * t[i]) / (h[i] - h[i + m]);
        }
    }
    Ok(t[0])
}

fn point_rng(seed: u64, pt: &LatticePoint) -> ChaCha8Rng {
    let mut hsh = seed ^ 0x9e37_79b9_7f4a_7c15;
    for &n in pt.nu.iter().chain(pt.nv.iter()) {
        hsh = (hsh ^ n as u64).wrapping_mul(0x1000_0000_01b3);
        hsh ^= hsh >> 29;
    }
    ChaCha8Rng::seed_from_u64(hsh)
}

fn random_direction(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let d: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.1 {
            return d.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Two seeded directions for probing the limit at `pt`.
pub fn probe_directions(pt: &LatticePoint, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = point_rng(seed, pt);
    let dim = pt.nu.len() + pt.nv.len();
    (random_direction(&mut rng, dim), random_direction(&mut rng, dim))
}

fn probed_limit(pt: &LatticePoint, p: &ParamSet, cfg: &LimitConfig, sym: &SymTable) -> Result<f64> {
    let mut rng = point_rng(cfg.seed, pt);
    let dim = pt.nu.len() + pt.nv.len();
    let mut values = Vec::with_capacity(2);
    let mut attempts = 0;
    while values.len() < 2 {
        attempts += 1;
        let dir = random_direction(&mut rng, dim);
        match directional_with(pt, p, &dir, cfg, sym) {
            Ok(x) => values.push(x),
            Err(Error::Pole(_)) | Err(Error::NearSingular { .. }) if attempts < 8 => continue,
            Err(e) => return Err(e),
        }
    }
    let (a, b) = (values[0], values[1]);
    let scale = a.abs().max(b.abs());
    if (a - b).abs() > cfg.tol * scale && scale > 0.0 {
        return Err(Error::LimitDisagreement { first: a, second: b });
    }
    Ok(0.5 * (a + b))
}

/// Value of `F` at a lattice point, defined as its directional limit.
pub fn f_limit_with(pt: &LatticePoint, p: &ParamSet, cfg: &LimitConfig, sym: &SymTable) -> Result<f64> {
    match classify(pt, p) {
        PointClass::Vanishing => Ok(0.0),
        PointClass::Regular => {
            let (u, v) = pt.coords();
            let phi = phi_structured(&u, &v, p)?;
            let w = w_structured(&u, &v, p.gamma, sym)?;
            Ok((phi * LogSigned::from_real(w)).to_real())
        }
        PointClass::Singular => probed_limit(pt, p, cfg, sym),
    }
}

pub fn f_limit(pt: &LatticePoint, p: &ParamSet) -> Result<f64> {
    let sym = SymTable::new(pt.nu.len(), pt.nv.len())?;
    f_limit_with(pt, p, &LimitConfig::default(), &sym)
}

/// Accurate coordinates of a continuous point: the values and all the
/// differences the weights need, each computed without cancellation by the
/// caller when it can.
#[derive(Debug, Clone, Default)]
pub struct PointView {
    pub t: Vec<f64>,
    pub s: Vec<f64>,
    /// `1 - t_a`.
    pub omt: Vec<f64>,
    /// `1 - s_b`.
    pub oms: Vec<f64>,
    /// `s_b - t_a` stored at `a * k2 + b`.
    pub st: Vec<f64>,
}

impl PointView {
    pub fn from_point(pt: &ContinuousPoint) -> Self {
        let k2 = pt.s.len();
        let mut st = vec![0.0; pt.t.len() * k2];
        for (a, &t) in pt.t.iter().enumerate() {
            for (b, &s) in pt.s.iter().enumerate() {
                st[a * k2 + b] = s - t;
            }
        }
        PointView {
            t: pt.t.clone(),
            s: pt.s.clone(),
            omt: pt.t.iter().map(|x| 1.0 - x).collect(),
            oms: pt.s.iter().map(|x| 1.0 - x).collect(),
            st,
        }
    }

    fn st(&self, a: usize, b: usize) -> f64 {
        self.st[a * self.s.len() + b]
    }
}

/// The two equivalent expressions of the weight `g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GForm {
    /// `prod_b 1/(s_b - t_{b+k1-k2})`.
    Shifted,
    /// `prod_b 1/(s_b - t_b)`.
    Diagonal,
}

/// Rational weights multiplying the continuous master function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Weight {
    One,
    G(GForm),
    H {
        l1: usize,
        l2: usize,
        m: usize,
    },
    HTilde {
        l1: usize,
        l2: usize,
        m: usize,
    },
    /// `Sym(t_1..t_l (1-t_{l+1})..(1-t_k))`.
    AomotoMixed(usize),
    /// `Sym(t_1..t_l)`.
    AomotoPlain(usize),
}

impl Weight {
    /// Whether the weight has poles on the hyperplanes `t_a = s_b`.
    pub fn has_ts_poles(&self) -> bool {
        matches!(self, Weight::G(_) | Weight::H { .. } | Weight::HTilde { .. })
    }

    /// Evaluates the symmetrised weight without singularity checks.
    pub fn eval_view(&self, view: &PointView, sym: &SymTable) -> f64 {
        let (k1, k2) = (sym.k1, sym.k2);
        let d = k1 - k2;
        let mut total = 0.0;
        for tp in &sym.tperms {
            for sp in &sym.sperms {
                let term = match *self {
                    Weight::One => 1.0,
                    Weight::G(form) => {
                        let mut x = 1.0;
                        for b in 0..k2 {
                            let a = match form {
                                GForm::Shifted => b + d,
                                GForm::Diagonal => b,
                            };
                            x /= view.st(tp[a], sp[b]);
                        }
                        x
                    }
                    Weight::H { l1, l2, m } | Weight::HTilde { l1, l2, m } => {
                        let tilde = matches!(self, Weight::HTilde { .. });
                        let mut x = 1.0;
                        for a in 0..k1 {
                            x *= if a < l1 { view.t[tp[a]] } else { view.omt[tp[a]] };
                        }
                        for b in 0..m {
                            let num = if tilde { view.omt[tp[b]] } else { view.oms[sp[b]] };
                            x *= num / view.st(tp[b], sp[b]);
                        }
                        for b in l2..k2 {
                            x *= view.oms[sp[b]] / view.st(tp[b + d], sp[b]);
                        }
                        x
                    }
                    Weight::AomotoMixed(l) => (0..k1)
                        .map(|a| if a < l { view.t[tp[a]] } else { view.omt[tp[a]] })
                        .product(),
                    Weight::AomotoPlain(l) => (0..l).map(|a| view.t[tp[a]]).product(),
                };
                total += term;
            }
        }
        total / sym.count()
    }
}

fn check_ts(pt: &ContinuousPoint) -> Result<()> {
    for &t in &pt.t {
        for &s in &pt.s {
            checked_den(s - t, "t_a = s_b")?;
        }
    }
    Ok(())
}

/// The weight `g` in the requested form.
pub fn weight_g_with(pt: &ContinuousPoint, form: GForm) -> Result<f64> {
    check_ts(pt)?;
    let sym = SymTable::new(pt.t.len(), pt.s.len())?;
    Ok(Weight::G(form).eval_view(&PointView::from_point(pt), &sym))
}

pub fn weight_g(pt: &ContinuousPoint) -> Result<f64> {
    weight_g_with(pt, GForm::Diagonal)
}

pub fn is_admissible(l1: usize, l2: usize, m: usize, k1: usize, k2: usize) -> bool {
    k1 >= k2 && l1 + k2 <= k1 + l2 && l2 <= k2 && m <= l1.min(l2)
}

fn check_triple(l1: usize, l2: usize, m: usize, k1: usize, k2: usize) -> Result<()> {
    if is_admissible(l1, l2, m, k1, k2) {
        Ok(())
    } else {
        Err(Error::InadmissibleTriple { l1, l2, m, k1, k2 })
    }
}

pub fn h_func(l1: usize, l2: usize, m: usize, pt: &ContinuousPoint) -> Result<f64> {
    let (k1, k2) = (pt.t.len(), pt.s.len());
    check_triple(l1, l2, m, k1, k2)?;
    check_ts(pt)?;
    let sym = SymTable::new(k1, k2)?;
    Ok(Weight::H { l1, l2, m }.eval_view(&PointView::from_point(pt), &sym))
}

pub fn h_tilde_func(l1: usize, l2: usize, m: usize, pt: &ContinuousPoint) -> Result<f64> {
    let (k1, k2) = (pt.t.len(), pt.s.len());
    check_triple(l1, l2, m, k1, k2)?;
    check_ts(pt)?;
    let sym = SymTable::new(k1, k2)?;
    Ok(Weight::HTilde { l1, l2, m }.eval_view(&PointView::from_point(pt), &sym))
}

fn check_coincidences(pt: &ContinuousPoint) -> Result<()> {
    check_ts(pt)?;
    for x in [&pt.t, &pt.s] {
        for a in 0..x.len() {
            for b in a + 1..x.len() {
                checked_den(x[a] - x[b], "coinciding coordinates")?;
            }
        }
    }
    Ok(())
}

/// Products of pairwise distances shared by all master functions.
fn pair_part(pt: &ContinuousPoint, gamma: f64) -> Result<LogSigned> {
    let mut out = LogSigned::ONE;
    for &t in &pt.t {
        for &s in &pt.s {
            out = out * pow_pos((t - s).abs(), -gamma)?;
        }
    }
    for x in [&pt.t, &pt.s] {
        for a in 0..x.len() {
            for b in a + 1..x.len() {
                out = out * pow_pos((x[a] - x[b]).abs(), 2.0 * gamma)?;
            }
        }
    }
    Ok(out)
}

/// The continuous master function on `(0,1)^{k1+k2}`.
pub fn omega(pt: &ContinuousPoint, p: &ParamSet) -> Result<f64> {
    if pt.t.iter().chain(pt.s.iter()).any(|&x| !(x > 0.0 && x < 1.0)) {
        return Err(Error::Domain("omega needs every coordinate in (0,1)".into()));
    }
    check_coincidences(pt)?;
    let mut out = pair_part(pt, p.gamma)?;
    for &t in &pt.t {
        out = out * pow_pos(t, p.alpha - 1.0)? * pow_pos(1.0 - t, p.beta1 - 1.0)?;
    }
    for &s in &pt.s {
        out = out * pow_pos(1.0 - s, p.beta2 - 1.0)?;
    }
    Ok(out.to_real())
}

/// Identities with a pointwise integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Assembled {
    Selberg,
    Exp,
    Exp3,
    Selb3,
    Selb30,
    J { l1: usize, l2: usize, m: usize },
    JTilde { l1: usize, l2: usize, m: usize },
    Aomoto(usize),
}

/// The full left-hand-side integrand of an identity at one point.
pub fn assembled_integrand(which: Assembled, pt: &ContinuousPoint, p: &ParamSet) -> Result<f64> {
    match which {
        Assembled::Selberg | Assembled::Aomoto(_) => {
            let sl2 = ContinuousPoint::new(pt.t.clone(), Vec::new());
            let q = ParamSet { k2: 0, ..*p };
            let base = omega(&sl2, &q)?;
            let wt = match which {
                Assembled::Aomoto(l) => {
                    let sym = SymTable::new(pt.t.len(), 0)?;
                    Weight::AomotoMixed(l).eval_view(&PointView::from_point(&sl2), &sym)
                }
                _ => 1.0,
            };
            Ok(base * wt)
        }
        Assembled::Exp | Assembled::Exp3 => {
            if pt.t.iter().chain(pt.s.iter()).any(|&x| !(x > 0.0)) {
                return Err(Error::Domain("exponential integrands need positive coordinates".into()));
            }
            check_coincidences(pt)?;
            let (b1, b2) = if which == Assembled::Exp {
                (1.0, 0.0)
            } else {
                (p.beta1, p.beta2)
            };
            let mut out = pair_part(pt, p.gamma)?;
            for &t in &pt.t {
                out = out * LogSigned::from_log(-b1 * t) * pow_pos(t, p.alpha - 1.0)?;
            }
            for &s in &pt.s {
                out = out * LogSigned::from_log(-b2 * s);
            }
            let wt = if which == Assembled::Exp3 { weight_g(pt)? } else { 1.0 };
            Ok(out.to_real() * wt)
        }
        Assembled::Selb3 => Ok(omega(pt, p)? * weight_g(pt)?),
        Assembled::Selb30 => omega(pt, p),
        Assembled::J { l1, l2, m } => Ok(omega(pt, p)? * h_func(l1, l2, m, pt)?),
        Assembled::JTilde { l1, l2, m } => Ok(omega(pt, p)? * h_tilde_func(l1, l2, m, pt)?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_w_small_cases() {
        assert_eq!(weight_w(&[0.4], &[], -0.3).unwrap(), 1.0);
        let w = weight_w(&[0.4], &[1.7], -0.3).unwrap();
        assert!((w - 1.0 / (1.7 - 0.4 + 0.3)).abs() < 1e-15);
    }

    #[test]
    fn g_small_cases() {
        let p = ContinuousPoint::new(vec![0.8, 0.2], vec![0.5]);
        let want = 0.5 / (0.5 - 0.2) + 0.5 / (0.5 - 0.8);
        assert!((weight_g(&p).unwrap() - want).abs() < 1e-14);
        assert!((weight_g_with(&p, GForm::Shifted).unwrap() - want).abs() < 1e-14);
        let q = ContinuousPoint::new(vec![0.3], vec![]);
        assert_eq!(weight_g(&q).unwrap(), 1.0);
    }

    #[test]
    fn omega_example() {
        let p = ParamSet::sl3(1, 1, 2.0, 1.0, 1.0, -0.5);
        let pt = ContinuousPoint::new(vec![0.25], vec![0.75]);
        assert!((omega(&pt, &p).unwrap() - 0.25 * 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn regular_point_is_direct() {
        let p = ParamSet::series(1, 0, 1.3, -0.2, 0.5, 0.5);
        let pt = LatticePoint::from_integer_parts(vec![0], vec![], p.gamma);
        assert_eq!(classify(&pt, &p), PointClass::Regular);
        let g = crate::numerics::log_gamma_signed(1.3).unwrap().to_real();
        assert!((f_limit(&pt, &p).unwrap() - g).abs() < 1e-14);
    }

    #[test]
    fn negative_k1_point_vanishes() {
        let p = ParamSet::series(1, 0, 1.3, -0.2, 0.5, 0.5);
        let pt = LatticePoint::from_integer_parts(vec![-2], vec![], p.gamma);
        assert_eq!(classify(&pt, &p), PointClass::Vanishing);
        assert_eq!(f_limit(&pt, &p).unwrap(), 0.0);
    }
}

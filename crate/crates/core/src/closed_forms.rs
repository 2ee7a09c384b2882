//! Closed gamma-product forms of every identity, as log-signed values.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{log_gamma_signed, pow_pos, sinpi, LogSigned, SINE_TOL};

/// Scalar parameters shared by all identities.
///
/// The sl2 identities read `k := k1`, `beta := beta1` and `z := z1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    pub k1: usize,
    pub k2: usize,
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub gamma: f64,
    pub z1: f64,
    pub z2: f64,
}

impl Default for ParamSet {
    fn default() -> Self {
        ParamSet {
            k1: 1,
            k2: 0,
            alpha: 1.5,
            beta1: 1.2,
            beta2: 1.4,
            gamma: -0.1,
            z1: 0.3,
            z2: 0.3,
        }
    }
}

impl ParamSet {
    /// An sl2 parameter set with `k`, `alpha`, `beta`, `gamma`.
    pub fn sl2(k: usize, alpha: f64, beta: f64, gamma: f64) -> Self {
        ParamSet {
            k1: k,
            k2: 0,
            alpha,
            beta1: beta,
            gamma,
            ..Default::default()
        }
    }

    /// An sl3 parameter set for the integral identities.
    pub fn sl3(k1: usize, k2: usize, alpha: f64, beta1: f64, beta2: f64, gamma: f64) -> Self {
        ParamSet {
            k1,
            k2,
            alpha,
            beta1,
            beta2,
            gamma,
            ..Default::default()
        }
    }

    /// An sl3 parameter set for the discrete series.
    pub fn series(k1: usize, k2: usize, alpha: f64, gamma: f64, z1: f64, z2: f64) -> Self {
        ParamSet {
            k1,
            k2,
            alpha,
            gamma,
            z1,
            z2,
            ..Default::default()
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_betas(mut self, beta1: f64, beta2: f64) -> Self {
        self.beta1 = beta1;
        self.beta2 = beta2;
        self
    }

    pub fn check_ranks(&self) -> Result<()> {
        if self.k1 < self.k2 {
            return Err(Error::InvalidParams(format!(
                "k1 >= k2 required, got k1={} k2={}",
                self.k1, self.k2
            )));
        }
        Ok(())
    }

    /// Convergence region of the continuous integrals.
    pub fn check_continuous(&self, uses_beta2: bool) -> Result<()> {
        self.check_ranks()?;
        if !(self.alpha > 0.0) {
            return Err(Error::InvalidParams(format!("alpha > 0 required, got {}", self.alpha)));
        }
        if !(self.beta1 > 0.0) {
            return Err(Error::InvalidParams(format!("beta1 > 0 required, got {}", self.beta1)));
        }
        if uses_beta2 && self.k2 > 0 && !(self.beta2 > 0.0) {
            return Err(Error::InvalidParams(format!("beta2 > 0 required, got {}", self.beta2)));
        }
        Ok(())
    }

    /// Convergence region of the discrete series.
    pub fn check_series(&self) -> Result<()> {
        self.check_ranks()?;
        if !(self.z1 > 0.0 && self.z1 < 1.0) {
            return Err(Error::InvalidParams(format!("z1 in (0,1) required, got {}", self.z1)));
        }
        if self.k2 > 0 && !(self.z2 > 0.0 && self.z2 < 1.0) {
            return Err(Error::InvalidParams(format!("z2 in (0,1) required, got {}", self.z2)));
        }
        Ok(())
    }
}

fn g(x: f64) -> Result<LogSigned> {
    log_gamma_signed(x)
}

/// `prod_{j<k} Gamma(a + j c) Gamma(c + j c) / Gamma(c)`.
fn alpha_gamma_product(k: usize, a: f64, c: f64) -> Result<LogSigned> {
    let mut out = LogSigned::ONE;
    for j in 0..k {
        let jf = j as f64;
        out = out * g(a + jf * c)? * g(c + jf * c)? / g(c)?;
    }
    Ok(out)
}

/// Classic Selberg product.
pub fn selberg_value(k: usize, alpha: f64, beta: f64, gamma: f64) -> Result<LogSigned> {
    let mut out = LogSigned::ONE;
    for j in 0..k {
        let jf = j as f64;
        let kk = (2 * k) as f64 - 2.0 - jf;
        out = out * g(alpha + jf * gamma)? * g(beta + jf * gamma)? * g(gamma + jf * gamma)?
            / (g(alpha + beta + kk * gamma)? * g(gamma)?);
    }
    Ok(out)
}

pub fn selberg_rhs(p: &ParamSet) -> Result<LogSigned> {
    selberg_value(p.k1, p.alpha, p.beta1, p.gamma)
}

pub fn exp_selberg_rhs(p: &ParamSet) -> Result<LogSigned> {
    alpha_gamma_product(p.k1, p.alpha, p.gamma)
}

fn check_unit(name: &str, z: f64) -> Result<()> {
    if z > 0.0 && z < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {z} outside (0,1)")))
    }
}

pub fn discrete_exp_rhs(p: &ParamSet) -> Result<LogSigned> {
    check_unit("z", p.z1)?;
    let k = p.k1 as f64;
    let pre =
        pow_pos(p.z1, k * (k - 1.0) * p.gamma / 2.0)? * pow_pos(1.0 - p.z1, -k * p.alpha - k * (k - 1.0) * p.gamma)?;
    Ok(pre * exp_selberg_rhs(p)?)
}

/// The common exponent `gamma - alpha - k1 gamma`.
fn sl3_shift(p: &ParamSet) -> f64 {
    p.gamma - p.alpha - p.k1 as f64 * p.gamma
}

fn sl3_gamma_products(p: &ParamSet) -> Result<LogSigned> {
    Ok(alpha_gamma_product(p.k1, p.alpha, p.gamma)? * alpha_gamma_product(p.k2, -(p.k1 as f64) * p.gamma, p.gamma)?)
}

pub fn sl3_discrete_rhs(p: &ParamSet) -> Result<LogSigned> {
    check_unit("z1", p.z1)?;
    if p.k2 > 0 {
        check_unit("z2", p.z2)?;
    }
    let (k1, k2) = (p.k1 as f64, p.k2 as f64);
    let e = sl3_shift(p);
    let mut pre = pow_pos(p.z1, k1 * (k1 - 1.0) * p.gamma / 2.0)? * pow_pos(1.0 - p.z1, (k1 - k2) * e)?;
    if p.k2 > 0 {
        pre = pre
            * pow_pos(p.z2, k2 * (k2 - 1.0) * p.gamma / 2.0)?
            * pow_pos(1.0 - p.z2, k2 * (k1 - k2 + 1.0) * p.gamma)?
            * pow_pos(1.0 - p.z1 * p.z2, k2 * e)?;
    }
    Ok(pre * sl3_gamma_products(p)?)
}

pub fn sl3_exp_rhs(p: &ParamSet) -> Result<LogSigned> {
    let (k1, k2) = (p.k1 as f64, p.k2 as f64);
    let e = sl3_shift(p);
    let mut pre = pow_pos(p.beta1, (k1 - k2) * e)?;
    if p.k2 > 0 {
        pre = pre * pow_pos(p.beta2, k2 * (k1 - k2 + 1.0) * p.gamma)? * pow_pos(p.beta1 + p.beta2, k2 * e)?;
    }
    Ok(pre * sl3_gamma_products(p)?)
}

/// Shared structure of the two sl3 Selberg products; `zero` selects the
/// variant without the rational weight.
fn sl3_selberg_family(k1: usize, k2: usize, alpha: f64, b1: f64, b2: f64, c: f64, zero: bool) -> Result<LogSigned> {
    let (k1f, k2f) = (k1 as f64, k2 as f64);
    let mut out = alpha_gamma_product(k1, alpha, c)?;
    for j in 0..k1 - k2 {
        let jf = j as f64;
        out = out * g(b1 + jf * c)? / g(alpha + b1 + (2.0 * k1f - k2f - 2.0 - jf) * c)?;
    }
    let (s, t, u) = if zero { (0.0, 1.0, 1.0) } else { (-1.0, 0.0, 0.0) };
    for j in 0..k2 {
        let jf = j as f64;
        let num = g(b2 + jf * c)? * g(b1 + b2 + s - c + jf * c)? * g(t - k1f * c + jf * c)? * g(c + jf * c)?;
        let den = g(b2 + u + (2.0 * k2f - k1f - 2.0 - jf) * c)?
            * g(alpha + b1 + b2 + s + (k1f + k2f - 3.0 - jf) * c)?
            * g(c)?;
        out = out * num / den;
    }
    Ok(out)
}

/// The sl3 Selberg integral `R(alpha, beta1, beta2)` with the weight `g`.
pub fn r_value(k1: usize, k2: usize, alpha: f64, b1: f64, b2: f64, gamma: f64) -> Result<LogSigned> {
    sl3_selberg_family(k1, k2, alpha, b1, b2, gamma, false)
}

/// The sl3 Selberg integral without rational weight.
pub fn r0_value(k1: usize, k2: usize, alpha: f64, b1: f64, b2: f64, gamma: f64) -> Result<LogSigned> {
    sl3_selberg_family(k1, k2, alpha, b1, b2, gamma, true)
}

pub fn sl3_selberg_rhs(p: &ParamSet) -> Result<LogSigned> {
    p.check_ranks()?;
    r_value(p.k1, p.k2, p.alpha, p.beta1, p.beta2, p.gamma)
}

pub fn sl3_selberg0_rhs(p: &ParamSet) -> Result<LogSigned> {
    p.check_ranks()?;
    r0_value(p.k1, p.k2, p.alpha, p.beta1, p.beta2, p.gamma)
}

/// Which closed form of the integrals `I_l` to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AomotoForm {
    /// Weight `Sym(t_1..t_l (1-t_{l+1})..(1-t_k))`, shifted Selberg product.
    Mixed,
    /// Weight `Sym(t_1..t_l)`, Aomoto's original prefactor.
    Original,
}

pub fn aomoto_rhs(k: usize, l: usize, p: &ParamSet, form: AomotoForm) -> Result<LogSigned> {
    if l > k {
        return Err(Error::Domain(format!("l = {l} exceeds k = {k}")));
    }
    let (a, b, c) = (p.alpha, p.beta1, p.gamma);
    let kf = k as f64;
    let mut pre = LogSigned::ONE;
    for i in 0..l {
        let fi = i as f64;
        let den = match form {
            AomotoForm::Mixed => b + fi * c,
            AomotoForm::Original => a + b + (2.0 * kf - 2.0 - fi) * c,
        };
        pre = pre * LogSigned::from_real(a + (kf - 1.0 - fi) * c) / LogSigned::from_real(den);
    }
    let base = match form {
        AomotoForm::Mixed => selberg_value(k, a, b + 1.0, c)?,
        AomotoForm::Original => selberg_value(k, a, b, c)?,
    };
    Ok(pre * base)
}

/// Closed forms available for the integrals `J` and `J~`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JForm {
    /// `J_{0,0,0} = J~_{0,0,0}`.
    J000,
    /// `J_{0,l,0}` from the chain of second-family relations.
    J0l(usize),
    /// `J_{0,k2,0}`, the integral of the master function alone.
    J0k,
    /// `J_{k1,k2,0}`.
    JK0,
    /// `J~_{k1,k2,m}`.
    JTildeK(usize),
}

pub fn j_closed_forms(which: JForm, p: &ParamSet) -> Result<LogSigned> {
    p.check_ranks()?;
    let (k1, k2) = (p.k1, p.k2);
    let (a, b1, b2, c) = (p.alpha, p.beta1, p.beta2, p.gamma);
    let j000 = || r_value(k1, k2, a, b1 + 1.0, b2 + 1.0, c);
    match which {
        JForm::J000 => j000(),
        JForm::J0l(l) => {
            if l > k2 {
                return Err(Error::Domain(format!("l = {l} exceeds k2 = {k2}")));
            }
            let mut pre = LogSigned::ONE;
            for i in 0..l {
                let fi = i as f64;
                pre =
                    pre * LogSigned::from_real(-((k1 - k2) as f64 + 1.0 + fi) * c) / LogSigned::from_real(b2 + fi * c);
            }
            Ok(pre * j000()?)
        }
        JForm::J0k => r0_value(k1, k2, a, b1 + 1.0, b2, c),
        JForm::JK0 => r0_value(k1, k2, a + 1.0, b1, b2, c),
        JForm::JTildeK(m) => {
            if m > k2 {
                return Err(Error::Domain(format!("m = {m} exceeds k2 = {k2}")));
            }
            let mut pre = LogSigned::ONE;
            for i in 0..m {
                let fi = i as f64;
                pre = pre * LogSigned::from_real(-(b2 + (k2 as f64 - k1 as f64 - 1.0 + fi) * c))
                    / LogSigned::from_real((k1 as f64 - fi) * c);
            }
            Ok(pre * r0_value(k1, k2, a + 1.0, b1, b2, c)?)
        }
    }
}

/// A complex number as log-signed magnitude and phase in `(-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NkConstant {
    pub magnitude: LogSigned,
    pub phase: f64,
}

impl NkConstant {
    pub fn re(&self) -> f64 {
        self.magnitude.to_real() * self.phase.cos()
    }

    pub fn im(&self) -> f64 {
        self.magnitude.to_real() * self.phase.sin()
    }
}

fn wrap_phase(x: f64) -> f64 {
    let r = x.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// `prod_{j<k} 2i e^{i pi alpha} sin(pi(alpha + j gamma)) sin(pi(gamma + j gamma)) / sin(pi gamma)`.
pub fn nk_constant(k: usize, alpha: f64, gamma: f64) -> Result<NkConstant> {
    let den = sinpi(gamma);
    if den.abs() < SINE_TOL {
        return Err(Error::Degenerate(gamma));
    }
    let mut mag = LogSigned::ONE;
    let mut phase = 0.0;
    for j in 0..k {
        let jf = j as f64;
        let real = 2.0 * sinpi(alpha + jf * gamma) * sinpi(gamma + jf * gamma) / den;
        mag = mag * LogSigned::from_real(real);
        phase += PI / 2.0 + PI * alpha;
    }
    if mag.sign < 0 {
        phase += PI;
    }
    Ok(NkConstant {
        magnitude: mag.abs(),
        phase: wrap_phase(phase),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn selberg_small_cases() {
        assert!(close(
            selberg_rhs(&ParamSet::sl2(1, 1.0, 1.0, 0.3)).unwrap().to_real(),
            1.0,
            1e-14
        ));
        assert!(close(
            selberg_rhs(&ParamSet::sl2(2, 1.0, 1.0, 1.0)).unwrap().to_real(),
            1.0 / 12.0,
            1e-13
        ));
    }

    #[test]
    fn empty_products_are_one() {
        let p = ParamSet::series(0, 0, 1.3, -0.2, 0.4, 0.4).with_betas(1.1, 1.2);
        for v in [
            selberg_rhs(&p),
            exp_selberg_rhs(&p),
            discrete_exp_rhs(&p),
            sl3_discrete_rhs(&p),
            sl3_exp_rhs(&p),
            sl3_selberg_rhs(&p),
            sl3_selberg0_rhs(&p),
        ] {
            assert_eq!(v.unwrap(), LogSigned::ONE);
        }
    }

    #[test]
    fn nk_examples() {
        let n0 = nk_constant(0, 0.3, -0.2).unwrap();
        assert_eq!(n0.magnitude, LogSigned::ONE);
        let n1 = nk_constant(1, 0.5, -0.2).unwrap();
        assert!(close(n1.magnitude.to_real(), 2.0, 1e-15));
        assert!(close(n1.phase, PI, 1e-15));
        assert!(matches!(nk_constant(2, 0.3, 1.0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn j0l_example() {
        let p = ParamSet::sl3(2, 1, 1.5, 1.2, 1.4, -0.1);
        let r = j_closed_forms(JForm::J0l(1), &p).unwrap().to_real();
        let j0 = j_closed_forms(JForm::J000, &p).unwrap().to_real();
        assert!(close(r, -(2.0 * -0.1 / 1.4) * j0, 1e-13));
    }

    #[test]
    fn discrete_domain_error() {
        let p = ParamSet::series(1, 0, 1.0, -0.1, 1.2, 0.3);
        assert!(matches!(discrete_exp_rhs(&p), Err(Error::Domain(_))));
    }
}

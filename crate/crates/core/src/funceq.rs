//! The functional-equation factor `F(s) = 2^s π^{s−1} sin(πs/2) Γ(1−s)`, the
//! derivatives of `f = log F`, the ratios `F^(k)/F` as complete Bell
//! polynomials in those derivatives, the normalized derivative `G_k`, the
//! logarithmic integral from 2, and the derivative form of the functional
//! equation.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::context::{EvalContext, MAX_ORDER};
use crate::error::{Error, Result};
use crate::gamma::{ln_one_minus, log_gamma, polygamma};
use crate::quad;
use crate::zeta::{zeta_derivs, zeta_derivs_series};
use crate::Complex;

const LN_PI: f64 = 1.144_729_885_849_400_2;
const LN_2PI: f64 = LN_2 + LN_PI;

/// `log sin(πs/2)`.
///
/// For `t > 0` this is the branch `−πis/2 − log 2 + πi/2 − Σ e^{πins}/n`,
/// summed in closed form as `log(1 − e^{πis})`; it is analytic in the whole
/// upper half-plane. Lower half-plane by conjugation, principal log on the
/// real axis.
pub fn log_sin_half_pi(s: Complex) -> Complex {
    if s.im < 0.0 {
        return log_sin_half_pi(s.conj()).conj();
    }
    if s.im == 0.0 {
        return (s * (PI / 2.0)).sin().ln();
    }
    let i = Complex::i();
    let e = (i * s * PI).exp();
    -i * s * (PI / 2.0) - LN_2 + i * (PI / 2.0) + ln_one_minus(e)
}

/// `log F(s)` on the branch built from [`log_sin_half_pi`] and the analytic
/// `log Γ`.
pub fn log_f(s: Complex) -> Result<Complex> {
    Ok(s * LN_2 + (s - 1.0) * LN_PI + log_sin_half_pi(s) + log_gamma(Complex::new(1.0, 0.0) - s)?)
}

/// `F(s) = 2^s π^{s−1} sin(πs/2) Γ(1 − s)`, so that `ζ(s) = F(s) ζ(1 − s)`.
pub fn f_eval(s: Complex) -> Result<Complex> {
    if !(s.re.is_finite() && s.im.is_finite()) {
        return Err(Error::Domain(format!("F of non-finite {s}")));
    }
    if s.im == 0.0 && s.re >= 1.0 {
        // 2^{s−1} π^s / (cos(πs/2) Γ(s)); removable at even integers.
        let x = s.re;
        if x == x.round() && (x as i64) % 2 == 1 {
            return Err(Error::PoleOfF(s));
        }
        let lg = log_gamma(s)?.re;
        let value = ((x - 1.0) * LN_2 + x * LN_PI - lg).exp() / (PI * x / 2.0).cos();
        return Ok(Complex::new(value, 0.0));
    }
    if s.im == 0.0 && s.re <= 0.0 && s.re == s.re.round() && (s.re as i64) % 2 == 0 {
        // Trivial zeros of ζ: sin(πs/2) = 0 with Γ(1−s) finite.
        return Ok(Complex::new(0.0, 0.0));
    }
    let exponent = log_f(s)?;
    if exponent.re > 709.0 {
        return Err(Error::Overflow(exponent.re));
    }
    if exponent.re < -745.0 {
        return Err(Error::Underflow(exponent.re));
    }
    Ok(exponent.exp())
}

/// Derivatives `f′, …, f^(k)` of `f = log F`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogFDerivs {
    pub k: usize,
    /// `values[j − 1] = f^(j)(s)`.
    pub values: Vec<Complex>,
}

/// `cot(u)`, stable for large `|Im u|`.
fn cot(u: Complex) -> Complex {
    let i = Complex::i();
    if u.im >= 0.0 {
        let e = (i * u * 2.0).exp();
        i * (e + 1.0) / (e - 1.0)
    } else {
        let e = (-i * u * 2.0).exp();
        i * (e + 1.0) / (Complex::new(1.0, 0.0) - e)
    }
}

/// Coefficients of `P_n` with `d^n/du^n cot u = P_n(cot u)`, from
/// `P_{n+1} = −(1 + c²) P_n′(c)`.
fn cot_derivative_polys(max: usize) -> Vec<Vec<f64>> {
    let mut polys = vec![vec![0.0, 1.0]];
    for n in 0..max {
        let p = &polys[n];
        let deriv: Vec<f64> = (1..p.len()).map(|i| p[i] * i as f64).collect();
        let mut next = vec![0.0; deriv.len() + 2];
        for (i, d) in deriv.iter().enumerate() {
            next[i] -= d;
            next[i + 2] -= d;
        }
        polys.push(next);
    }
    polys
}

fn eval_poly(coeffs: &[f64], x: Complex) -> Complex {
    coeffs.iter().rev().fold(Complex::new(0.0, 0.0), |acc, &c| acc * x + c)
}

/// `f^(j)(s)` for `j = 1..=k`, `f = log F`, in closed form:
/// `f′(s) = log 2π + (π/2) cot(πs/2) − ψ(1−s)` and, for `j ≥ 2`,
/// `f^(j)(s) = (π/2)^j P_{j−1}(cot(πs/2)) + (−1)^j ψ^(j−1)(1−s)`.
pub fn log_f_derivs(s: Complex, k: usize) -> Result<LogFDerivs> {
    if k > MAX_ORDER {
        return Err(Error::Domain(format!("order {k} exceeds {MAX_ORDER}")));
    }
    let real_negative = s.im == 0.0 && s.re < 0.0;
    if !(s.im.abs() >= 2.0 || real_negative) {
        return Err(Error::Domain(format!("log F derivatives need |t| ≥ 2 or real s < 0, got {s}")));
    }
    let u = s * (PI / 2.0);
    if u.sin().norm() < 1e-12 {
        return Err(Error::NearPole(s));
    }
    let one_minus = Complex::new(1.0, 0.0) - s;
    if one_minus.im.abs() < 1e-12 && one_minus.re <= 0.0 && (one_minus.re - one_minus.re.round()).abs() < 1e-12 {
        return Err(Error::NearPole(s));
    }
    let c = cot(u);
    let polys = cot_derivative_polys(k.saturating_sub(1));
    let mut values = Vec::with_capacity(k);
    let mut half_pi_pow = PI / 2.0;
    for j in 1..=k {
        let cot_part = eval_poly(&polys[j - 1], c) * half_pi_pow;
        let psi = polygamma(j - 1, one_minus)?;
        let v = if j == 1 {
            cot_part + LN_2PI - psi
        } else {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            cot_part + psi * sign
        };
        values.push(v);
        half_pi_pow *= PI / 2.0;
    }
    Ok(LogFDerivs { k, values })
}

/// Complete Bell polynomials `B_0, …, B_n` evaluated at `x_1, …, x_n`.
pub fn bell_values(x: &[Complex]) -> Vec<Complex> {
    let n = x.len();
    let mut b = Vec::with_capacity(n + 1);
    b.push(Complex::new(1.0, 0.0));
    for m in 0..n {
        // B_{m+1} = Σ_{i=0}^{m} C(m, i) B_{m−i} x_{i+1}
        let mut acc = Complex::new(0.0, 0.0);
        let mut binom = 1.0;
        for i in 0..=m {
            acc += b[m - i] * x[i] * binom;
            binom = binom * (m - i) as f64 / (i + 1) as f64;
        }
        b.push(acc);
    }
    b
}

/// `[F/F, F′/F, …, F^(k)/F]` at `s`.
pub fn fk_over_f_all(s: Complex, k: usize) -> Result<Vec<Complex>> {
    let d = log_f_derivs(s, k)?;
    Ok(bell_values(&d.values))
}

/// `F^(k)(s)/F(s)`, exactly, as the complete Bell polynomial in the
/// derivatives of `log F`.
pub fn fk_over_f(s: Complex, k: usize) -> Result<Complex> {
    Ok(fk_over_f_all(s, k)?[k])
}

/// `F^(k)(s)/F^(k−j)(s)` as the ratio of Bell values.
pub fn fk_over_fkj(s: Complex, k: usize, j: usize) -> Result<Complex> {
    if j > k {
        return Err(Error::Domain(format!("j = {j} exceeds k = {k}")));
    }
    let b = fk_over_f_all(s, k)?;
    if b[k - j].norm() < 1e-12 * b[k].norm() {
        return Err(Error::NearZeroDenominator { what: "F^(k)/F^(k-j)", s });
    }
    Ok(b[k] / b[k - j])
}

/// `G_k(s) = (−1)^k 2^s ζ^(k)(s) / (log 2)^k`.
pub fn g_k(s: Complex, k: usize, ctx: &EvalContext) -> Result<Complex> {
    let d = zeta_derivs(s, k, ctx)?;
    Ok(g_k_from(s, k, d[k]))
}

pub(crate) fn g_k_from(s: Complex, k: usize, zeta_k: Complex) -> Complex {
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    (s * LN_2).exp() * zeta_k * (sign / LN_2.powi(k as i32))
}

/// `Li(x) = ∫_2^x dt / log t`, by adaptive Gauss–Legendre quadrature.
pub fn li_from_2(x: f64) -> Result<f64> {
    if !(x >= 2.0) || !x.is_finite() {
        return Err(Error::Domain(format!("Li requires x ≥ 2, got {x}")));
    }
    Ok(quad::integrate(|t| 1.0 / t.ln(), 2.0, x, 1e-13))
}

/// Both sides of
/// `ζ^(k)(s) / (ζ(s) F^(k)/F(s)) = 1 − Σ_{j=1}^k C(k,j) (−1)^{j−1} (F^(k−j)/F^(k))(s) (ζ^(j)/ζ)(1−s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeResidual {
    pub s: Complex,
    pub k: usize,
    pub lhs: Complex,
    pub rhs: Complex,
    pub abs_gap: f64,
}

/// Right-hand side alone: `1 − Σ_{j=1}^k C(k,j) (−1)^{j−1} (B_{k−j}/B_k)(s) (ζ^(j)/ζ)(1−s)`.
pub fn fe2_rhs(s: Complex, k: usize, ctx: &EvalContext) -> Result<Complex> {
    Ok(fe2_rhs_parts(s, k, ctx)?.0)
}

/// The right side together with the bare sum (whose size is the subject of
/// the far-left bound `|Σ| ≤ 2^σ`).
pub fn fe2_rhs_parts(s: Complex, k: usize, ctx: &EvalContext) -> Result<(Complex, Complex)> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    let bell = fk_over_f_all(s, k)?;
    if bell[k].norm() < 1e-300 {
        return Err(Error::NearZeroDenominator { what: "F^(k)/F", s });
    }
    let reflected = Complex::new(1.0, 0.0) - s;
    let zr = reflected_derivs(reflected, k, ctx)?;
    if zr[0].norm() < 100.0 * ctx.abs_tol {
        return Err(Error::NearZeroDenominator { what: "zeta(1-s)", s });
    }
    let mut sum = Complex::new(0.0, 0.0);
    let mut binom = 1.0;
    for j in 1..=k {
        binom = binom * (k - j + 1) as f64 / j as f64;
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        sum += bell[k - j] / bell[k] * (zr[j] / zr[0]) * (binom * sign);
    }
    Ok((Complex::new(1.0, 0.0) - sum, sum))
}

/// Far to the right the Euler–Maclaurin series derivatives are exact enough
/// and avoid differentiating values that are all close to 1.
fn reflected_derivs(z: Complex, k: usize, ctx: &EvalContext) -> Result<Vec<Complex>> {
    if z.re >= 12.0 {
        zeta_derivs_series(z, k, ctx)
    } else {
        zeta_derivs(z, k, ctx)
    }
}

/// Evaluates both sides of the derivative functional equation at `s`.
pub fn fe2_residual(s: Complex, k: usize, ctx: &EvalContext) -> Result<FeResidual> {
    let rhs = fe2_rhs(s, k, ctx)?;
    let d = zeta_derivs(s, k, ctx)?;
    if d[0].norm() < 100.0 * ctx.abs_tol {
        return Err(Error::NearZeroDenominator { what: "zeta(s)", s });
    }
    let lhs = d[k] / (d[0] * fk_over_f(s, k)?);
    Ok(FeResidual { s, k, lhs, rhs, abs_gap: (lhs - rhs).norm() })
}

//! Complex log-gamma and polygamma functions.

use std::f64::consts::{LN_2, PI};

use crate::bernoulli::BERNOULLI;
use crate::error::{Error, Result};
use crate::Complex;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const LN_PI: f64 = 1.144_729_885_849_400_2;

/// Below this modulus the argument is shifted upward before the Stirling
/// series is applied.
const STIRLING_MIN_MODULUS: f64 = 15.0;
const STIRLING_TERMS: usize = 20;

fn is_nonpositive_integer(z: Complex) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// `log Γ(z)` on the branch that is analytic off the negative real axis and
/// real on the positive real axis.
///
/// Uses the Stirling series with upward argument shifts, and reflection for
/// `Re(z) < ½`.
pub fn log_gamma(z: Complex) -> Result<Complex> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("log_gamma of non-finite {z}")));
    }
    if is_nonpositive_integer(z) {
        return Err(Error::PoleAtNonPositiveInteger(z));
    }
    if z.re < 0.5 {
        if z.im < 0.0 {
            return log_gamma(z.conj()).map(|v| v.conj());
        }
        // log Γ(z) = log π − log sin(πz) − log Γ(1 − z), with log sin taken
        // on the branch continuous in the closed upper half-plane.
        let w = z * PI;
        let i = Complex::i();
        let e2 = (i * w * 2.0).exp();
        let log_sin = -i * w + ln_one_minus(e2) - LN_2 + i * (PI / 2.0);
        return Ok(Complex::new(LN_PI, 0.0) - log_sin - log_gamma(Complex::new(1.0, 0.0) - z)?);
    }
    let mut w = z;
    let mut shift = Complex::new(0.0, 0.0);
    while w.norm() < STIRLING_MIN_MODULUS {
        shift += w.ln();
        w += 1.0;
    }
    Ok(stirling(w) - shift)
}

fn stirling(w: Complex) -> Complex {
    let mut series = Complex::new(0.0, 0.0);
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut pow = inv;
    for m in 1..=STIRLING_TERMS {
        let coeff = BERNOULLI[2 * m] / ((2 * m) as f64 * (2 * m - 1) as f64);
        let term = pow * coeff;
        series += term;
        if term.norm() < 1e-18 * series.norm().max(1e-300) {
            break;
        }
        pow *= inv2;
    }
    (w - 0.5) * w.ln() - w + LN_SQRT_2PI + series
}

/// `log(1 − w)` accurate for small `|w|`.
pub(crate) fn ln_one_minus(w: Complex) -> Complex {
    if w.norm() < 1e-4 {
        // −(w + w²/2 + w³/3 + w⁴/4)
        -(w + w * w / 2.0 + w * w * w / 3.0 + w * w * w * w / 4.0)
    } else {
        (Complex::new(1.0, 0.0) - w).ln()
    }
}

/// `ψ^(m)(z)`, the m-th derivative of the digamma function.
pub fn polygamma(m: usize, z: Complex) -> Result<Complex> {
    if m > 14 {
        return Err(Error::Domain(format!("polygamma order {m} exceeds 14")));
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("polygamma of non-finite {z}")));
    }
    if is_nonpositive_integer(z) {
        return Err(Error::PoleAtNonPositiveInteger(z));
    }
    // ψ^(m)(z) = ψ^(m)(z + 1) − (−1)^m m! / z^{m+1}
    let m_fact = factorial(m);
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let mut w = z;
    let mut shift = Complex::new(0.0, 0.0);
    while w.re < 20.0 || w.norm() < 20.0 + m as f64 {
        shift += w.powi(-(m as i32 + 1)) * (sign * m_fact);
        w += 1.0;
    }
    Ok(polygamma_asymptotic(m, w) - shift)
}

fn polygamma_asymptotic(m: usize, w: Complex) -> Complex {
    let inv = w.inv();
    let inv2 = inv * inv;
    if m == 0 {
        let mut sum = w.ln() - inv * 0.5;
        let mut pow = inv2;
        for j in 1..=STIRLING_TERMS {
            let term = pow * (BERNOULLI[2 * j] / (2 * j) as f64);
            sum -= term;
            if term.norm() < 1e-18 * sum.norm() {
                break;
            }
            pow *= inv2;
        }
        return sum;
    }
    let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
    let inv_m = inv.powi(m as i32);
    let mut sum = inv_m * factorial(m - 1) + inv_m * inv * (factorial(m) / 2.0);
    let mut pow = inv_m * inv2;
    for j in 1..=STIRLING_TERMS {
        // B_{2j} (2j+m−1)! / (2j)!
        let coeff = BERNOULLI[2 * j] * falling_ratio(2 * j + m - 1, 2 * j);
        let term = pow * coeff;
        sum += term;
        if term.norm() < 1e-18 * sum.norm() {
            break;
        }
        pow *= inv2;
    }
    sum * sign
}

/// `a! / b!` for `a ≥ b`.
fn falling_ratio(a: usize, b: usize) -> f64 {
    ((b + 1)..=a).map(|x| x as f64).product()
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|x| x as f64).product()
}

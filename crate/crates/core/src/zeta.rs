//! The Riemann zeta function and its derivatives.
//!
//! Two evaluators are provided for the derivatives. [`zeta_derivs`] applies
//! the trapezoid rule to Cauchy's integral over a circle around `s`;
//! [`zeta_derivs_series`] differentiates the Euler–Maclaurin formula term by
//! term. They share nothing beyond the summation length, so each serves as
//! an accuracy check on the other.

use std::f64::consts::PI;
use std::sync::LazyLock;

use crate::bernoulli;
use crate::context::{EvalContext, MAX_ORDER};
use crate::error::{Error, Result};
use crate::funceq;
use crate::jet::Jet;
use crate::Complex;

/// Left edge of the domain of the term-differentiated series evaluator.
pub const EM_MIN_SIGMA: f64 = -10.0;

/// [`zeta`] reflects through the functional equation left of this abscissa
/// (away from `s = 0`): Euler–Maclaurin there sums terms of size
/// `N^{1−σ}` to a much smaller result.
pub const REFLECT_SIGMA: f64 = 0.0;

/// [`Evaluator::Series`] defers to the ring left of this abscissa, where
/// cancellation costs the series more than the ring's reflected nodes.
pub const SERIES_MIN_SIGMA: f64 = -2.5;

const MIN_TERMS: usize = 8;
const LOG_TABLE_LEN: usize = 4096;

static LOG_TABLE: LazyLock<Vec<f64>> =
    LazyLock::new(|| (0..LOG_TABLE_LEN).map(|n| if n == 0 { 0.0 } else { (n as f64).ln() }).collect());

fn ln_n(n: usize) -> f64 {
    if n < LOG_TABLE_LEN {
        LOG_TABLE[n]
    } else {
        (n as f64).ln()
    }
}

/// Compensated (Neumaier) accumulator for complex sums.
#[derive(Default, Clone, Copy)]
struct CompensatedSum {
    re: f64,
    re_c: f64,
    im: f64,
    im_c: f64,
}

impl CompensatedSum {
    fn add(&mut self, z: Complex) {
        neumaier(&mut self.re, &mut self.re_c, z.re);
        neumaier(&mut self.im, &mut self.im_c, z.im);
    }

    fn value(&self) -> Complex {
        Complex::new(self.re + self.re_c, self.im + self.im_c)
    }
}

fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

/// Summation length for the Euler–Maclaurin formula at `s`: the larger of
/// `em_terms_factor·max(|t|, 10)` and `(|s| + 2M)/π`. The second bound keeps
/// the ratio of consecutive Bernoulli corrections below ¼, so all `M` of
/// them can be used before the asymptotic series turns.
pub fn em_terms(s: Complex, ctx: &EvalContext) -> usize {
    let by_height = (ctx.em_terms_factor * s.im.abs().max(10.0)).ceil() as usize;
    let by_order = ((s.norm() + 2.0 * ctx.em_correction_order as f64) / PI).ceil() as usize;
    by_height.max(by_order).max(MIN_TERMS)
}

/// `n^{-s}`.
#[inline]
fn pow_neg(n: usize, s: Complex) -> Complex {
    let l = ln_n(n);
    let mag = (-s.re * l).exp();
    let (sin, cos) = (s.im * l).sin_cos();
    Complex::new(mag * cos, -mag * sin)
}

/// `(e^w − 1)/w`, accurate near `w = 0`.
fn expm1_over(w: Complex) -> Complex {
    if w.norm() < 1e-3 {
        let mut sum = Complex::new(1.0, 0.0);
        let mut term = Complex::new(1.0, 0.0);
        for i in 2..=8 {
            term = term * w / i as f64;
            sum += term;
        }
        sum
    } else {
        (w.exp() - 1.0) / w
    }
}

/// `ζ(s) − 1 − 1/(s − 1)` by Euler–Maclaurin, with an error estimate equal
/// to the magnitude of the last correction term kept. Leaving out the leading
/// 1 keeps ring derivatives relatively accurate for large `σ`.
fn em_regular(s: Complex, ctx: &EvalContext) -> Result<(Complex, f64)> {
    let n = em_terms(s, ctx);
    let mut acc = CompensatedSum::default();
    for j in 2..n {
        acc.add(pow_neg(j, s));
    }
    let ln_big = ln_n(n);
    let n_pow = pow_neg(n, s); // N^{-s}
    // (N^{1−s} − 1)/(s − 1) = −ln N · (e^w − 1)/w, w = (1 − s) ln N
    let w = (Complex::new(1.0, 0.0) - s) * ln_big;
    acc.add(-expm1_over(w) * ln_big);
    acc.add(n_pow * 0.5);

    let nf = n as f64;
    let inv_n2 = 1.0 / (nf * nf);
    // s (s+1) ... (s+2m−2) N^{−s−2m+1}
    let mut factor = s * n_pow / nf;
    let mut last = f64::INFINITY;
    let mut estimate = f64::INFINITY;
    let mut value = acc.value();
    for m in 1..=ctx.em_correction_order {
        let term = factor * bernoulli::scaled_even(m);
        let mag = term.norm();
        if mag > last && m > 2 {
            // The asymptotic series has started to diverge.
            break;
        }
        acc.add(term);
        value = acc.value();
        estimate = mag;
        last = mag;
        let full = (value + 1.0 + (s - 1.0).inv()).norm();
        if mag <= 1e-3 * (ctx.abs_tol + ctx.rel_tol * full) {
            break;
        }
        let a = s + (2 * m - 1) as f64;
        let b = s + (2 * m) as f64;
        factor = factor * a * b * inv_n2;
    }
    Ok((value, estimate))
}

fn check_pole(s: Complex, ctx: &EvalContext) -> Result<()> {
    if !(s.re.is_finite() && s.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite argument {s}")));
    }
    if (s - 1.0).norm() < 10.0 * ctx.abs_tol {
        return Err(Error::PoleAtOne(s));
    }
    Ok(())
}

/// `ζ(s) − 1 − 1/(s−1)`, entire; evaluated without touching the pole.
fn zeta_regular(s: Complex, ctx: &EvalContext) -> Result<Complex> {
    if s.re >= REFLECT_SIGMA || s.norm() < 1.0 {
        let (value, estimate) = em_regular(s, ctx)?;
        let tolerance = ctx.abs_tol + ctx.rel_tol * (value + 1.0 + (s - 1.0).inv()).norm();
        if estimate > tolerance {
            return Err(Error::PrecisionLoss { op: "zeta", s, estimate, tolerance });
        }
        Ok(value)
    } else {
        let reflected = Complex::new(1.0, 0.0) - s;
        let z = funceq::f_eval(s)? * zeta_with_ctx(reflected, ctx)?;
        Ok(z - 1.0 - (s - 1.0).inv())
    }
}

fn zeta_with_ctx(s: Complex, ctx: &EvalContext) -> Result<Complex> {
    check_pole(s, ctx)?;
    Ok(zeta_regular(s, ctx)? + 1.0 + (s - 1.0).inv())
}

/// `ζ(s)`.
///
/// Euler–Maclaurin summation for `σ ≥ 0`: the Dirichlet sum up to
/// `N − 1`, the tail `N^{1−s}/(s−1)`, the half term `N^{−s}/2` and up to
/// `ctx.em_correction_order` Bernoulli corrections. Further left the
/// functional equation is applied. Fails with [`Error::PrecisionLoss`] when
/// the last retained correction exceeds `abs_tol + rel_tol·|ζ(s)|`.
pub fn zeta(s: Complex, ctx: &EvalContext) -> Result<Complex> {
    ctx.validate()?;
    zeta_with_ctx(s, ctx)
}

/// `[ζ(s), ζ'(s), …, ζ^(k)(s)]` by Cauchy-integral differentiation.
///
/// The pole part `1/(s−1)` and the constant 1 are split off and
/// differentiated exactly; only the entire remainder is sampled at `ctx.ring_nodes` equispaced nodes on
/// `|z − s| = ctx.ring_radius`, so the ring may safely enclose `s = 1`.
/// Entry 0 is computed by [`zeta`] itself and is bit-identical to it.
pub fn zeta_derivs(s: Complex, k: usize, ctx: &EvalContext) -> Result<Vec<Complex>> {
    ctx.validate_for_order(k)?;
    if k > MAX_ORDER + 2 {
        return Err(Error::Domain(format!("order {k} too large")));
    }
    check_pole(s, ctx)?;
    let mut out = Vec::with_capacity(k + 1);
    out.push(zeta_with_ctx(s, ctx)?);
    if k == 0 {
        return Ok(out);
    }
    let nodes = ctx.ring_nodes;
    let r = ctx.ring_radius;
    let mut values = Vec::with_capacity(nodes);
    let mut roots = Vec::with_capacity(nodes);
    for j in 0..nodes {
        let theta = 2.0 * PI * j as f64 / nodes as f64;
        let unit = Complex::from_polar(1.0, theta);
        roots.push(unit);
        values.push(zeta_regular(s + unit * r, ctx)?);
    }
    let pole = (s - 1.0).inv();
    let mut pole_pow = pole;
    let mut r_pow = 1.0;
    let mut fact = 1.0;
    for m in 1..=k {
        r_pow *= r;
        fact *= m as f64;
        pole_pow *= -pole;
        let mut acc = CompensatedSum::default();
        for (j, v) in values.iter().enumerate() {
            // e^{−iθ_j m} = conj(unit_j)^m = conj(unit_{(j m) mod nodes})
            acc.add(*v * roots[(j * m) % nodes].conj());
        }
        let coeff = acc.value() / nodes as f64 / r_pow;
        // d^m/ds^m 1/(s−1) = (−1)^m m!/(s−1)^{m+1}
        out.push(coeff * fact + pole_pow * fact);
    }
    Ok(out)
}

/// `[ζ(s), …, ζ^(k)(s)]` by term-wise differentiation of the Euler–Maclaurin
/// formula: `Σ (−log n)^j n^{−s}` plus the differentiated tail, half term
/// and corrections. Valid for `σ ≥ −10`.
pub fn zeta_derivs_series(s: Complex, k: usize, ctx: &EvalContext) -> Result<Vec<Complex>> {
    ctx.validate()?;
    check_pole(s, ctx)?;
    if s.re < EM_MIN_SIGMA {
        return Err(Error::Domain(format!("series evaluator requires σ ≥ {EM_MIN_SIGMA}, got {s}")));
    }
    let n = em_terms(s, ctx);
    let mut acc: Vec<CompensatedSum> = vec![CompensatedSum::default(); k + 1];
    for j in 1..n {
        let mut term = pow_neg(j, s);
        let l = -ln_n(j);
        for a in acc.iter_mut() {
            a.add(term);
            term *= l;
        }
    }
    let ln_big = ln_n(n);
    let n_pow = pow_neg(n, s);
    let rate = Complex::new(-ln_big, 0.0);
    // N^{−(s+ε)}
    let n_pow_jet = Jet::exp_linear(n_pow, rate, k);
    // N^{1−s}/(s−1)
    let tail = &n_pow_jet.clone().scale(Complex::new(n as f64, 0.0))
        * &Jet::reciprocal_linear(s - 1.0, k);
    let mut total = tail + &n_pow_jet.clone().scale(Complex::new(0.5, 0.0));

    let nf = n as f64;
    // (s+ε)(s+1+ε)…(s+2m−2+ε) N^{−(s+ε)−2m+1}
    let mut poly = Jet::variable(s, k);
    let mut scale = 1.0 / nf;
    let mut last = f64::INFINITY;
    for m in 1..=ctx.em_correction_order {
        let term = (&poly * &n_pow_jet).scale(Complex::new(bernoulli::scaled_even(m) * scale, 0.0));
        let mag = term.0.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if mag > last && m > 2 {
            break;
        }
        last = mag;
        total = total + &term;
        if mag < 1e-18 * total.0[0].norm().max(1e-300) {
            break;
        }
        poly = &(&poly * &Jet::variable(s + (2 * m - 1) as f64, k)) * &Jet::variable(s + (2 * m) as f64, k);
        scale /= nf * nf;
    }
    Ok((0..=k).map(|j| acc[j].value() + total.derivative(j)).collect())
}

/// Which evaluator supplies `ζ^(j)` to path tracking and root polishing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Evaluator {
    /// Cauchy-ring differentiation ([`zeta_derivs`]).
    #[default]
    Ring,
    /// Term-differentiated Euler–Maclaurin ([`zeta_derivs_series`]); falls
    /// back to the ring for `σ < SERIES_MIN_SIGMA`.
    Series,
}

impl Evaluator {
    pub fn derivs(self, s: Complex, k: usize, ctx: &EvalContext) -> Result<Vec<Complex>> {
        match self {
            Evaluator::Series if s.re >= SERIES_MIN_SIGMA => zeta_derivs_series(s, k, ctx),
            _ => zeta_derivs(s, k, ctx),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn ctx() -> EvalContext {
        EvalContext::default()
    }

    #[test]
    fn classical_values() {
        let z2 = zeta(c(2.0, 0.0), &ctx()).unwrap();
        assert!((z2.re - PI * PI / 6.0).abs() < 1e-14 && z2.im == 0.0);
        let z0 = zeta(c(0.0, 0.0), &ctx()).unwrap();
        assert!((z0.re + 0.5).abs() < 1e-14);
        let zm1 = zeta(c(-1.0, 0.0), &ctx()).unwrap();
        assert!((zm1.re + 1.0 / 12.0).abs() < 1e-12);
        let z4 = zeta(c(4.0, 0.0), &ctx()).unwrap();
        assert!((z4.re - PI.powi(4) / 90.0).abs() < 1e-14);
    }

    #[test]
    fn first_nontrivial_zero() {
        let z = zeta(c(0.5, 14.134_725_141_7), &ctx()).unwrap();
        assert!(z.norm() < 1e-9, "{z}");
    }

    #[test]
    fn pole_is_rejected() {
        assert!(matches!(zeta(c(1.0, 0.0), &ctx()), Err(Error::PoleAtOne(_))));
        assert!(matches!(zeta_derivs(c(1.0, 0.0), 2, &ctx()), Err(Error::PoleAtOne(_))));
        // Close to the pole is fine: the ring only samples the entire part.
        let d = zeta_derivs(c(1.0, 1e-3), 2, &ctx()).unwrap();
        let s = c(1.0, 1e-3);
        let approx = 2.0 / (s - 1.0).powi(3);
        assert!((d[2] - approx).norm() / approx.norm() < 1e-6);
    }

    #[test]
    fn order_zero_is_zeta() {
        let s = c(0.3, 77.0);
        assert_eq!(zeta_derivs(s, 0, &ctx()).unwrap(), vec![zeta(s, &ctx()).unwrap()]);
        assert_eq!(zeta_derivs(s, 3, &ctx()).unwrap()[0], zeta(s, &ctx()).unwrap());
    }

    #[test]
    fn derivative_at_origin() {
        let d = zeta_derivs(c(0.0, 0.0), 1, &ctx()).unwrap();
        assert!((d[1].re + 0.918_938_533_204_672_8).abs() < 1e-12);
        let o = zeta_derivs_series(c(0.0, 0.0), 1, &ctx()).unwrap();
        assert!((o[1].re + 0.918_938_533_204_672_8).abs() < 1e-12);
    }

    #[test]
    fn two_evaluators_agree_at_3_plus_5i() {
        let s = c(3.0, 5.0);
        let ring = zeta_derivs(s, 4, &ctx()).unwrap();
        let series = zeta_derivs_series(s, 4, &ctx()).unwrap();
        // mpmath: zeta(3+5i, derivative=j)
        let reference = [
            c(0.912_526_588_998_971_3, 0.050_842_871_074_571_36),
            c(0.049_010_703_918_440_91, -0.035_306_275_596_881_01),
            c(-0.022_942_477_742_632_76, 0.022_189_848_949_206_94),
            c(0.006_766_943_268_114_518, -0.010_639_369_180_030_9),
            c(0.000_938_919_129_369_089_5, 0.000_866_289_886_094_856_8),
        ];
        for j in 0..=4 {
            let rel = (ring[j] - series[j]).norm() / series[j].norm();
            assert!(rel < 1e-8, "j = {j}: rel = {rel:e}");
            assert!((series[j] - reference[j]).norm() / reference[j].norm() < 1e-11);
        }
    }

    #[test]
    fn left_of_em_range_uses_functional_equation() {
        let s = c(-12.0, 30.0);
        let direct = zeta(s, &ctx()).unwrap();
        let via = funceq::f_eval(s).unwrap() * zeta(c(13.0, -30.0), &ctx()).unwrap();
        assert!((direct - via).norm() <= 1e-13 * via.norm());
        assert!(zeta_derivs_series(s, 1, &ctx()).is_err());
    }

    #[test]
    fn em_converges_at_height() {
        // |ζ(½ + 1000i)| and the conjugate value
        let s = c(0.5, 1000.0);
        let z = zeta(s, &ctx()).unwrap();
        let zc = zeta(s.conj(), &ctx()).unwrap();
        assert!((z.conj() - zc).norm() < 1e-12);
        let finer = zeta(s, &ctx().with_em_terms_factor(0.6)).unwrap();
        assert!((z - finer).norm() < 1e-11);
    }
}

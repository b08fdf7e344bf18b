//! Truncated Taylor series in one complex variable, used to differentiate
//! closed-form expressions term by term.

use std::ops::{Add, Mul};

use crate::Complex;

/// Coefficients `a_0 ..= a_d` of `Σ a_i ε^i`, truncated at degree `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet(pub Vec<Complex>);

impl Jet {
    pub fn constant(value: Complex, degree: usize) -> Jet {
        let mut c = vec![Complex::new(0.0, 0.0); degree + 1];
        c[0] = value;
        Jet(c)
    }

    /// `value + ε`.
    pub fn variable(value: Complex, degree: usize) -> Jet {
        let mut j = Jet::constant(value, degree);
        if degree >= 1 {
            j.0[1] = Complex::new(1.0, 0.0);
        }
        j
    }

    /// `exp(rate·(value + ε))` expanded around `value`, given `exp(rate·value)`.
    pub fn exp_linear(base: Complex, rate: Complex, degree: usize) -> Jet {
        let mut c = Vec::with_capacity(degree + 1);
        let mut term = base;
        for i in 0..=degree {
            c.push(term);
            term = term * rate / (i + 1) as f64;
        }
        Jet(c)
    }

    /// `1 / (value + ε)`.
    pub fn reciprocal_linear(value: Complex, degree: usize) -> Jet {
        let inv = value.inv();
        let mut c = Vec::with_capacity(degree + 1);
        let mut term = inv;
        for _ in 0..=degree {
            c.push(term);
            term = -term * inv;
        }
        Jet(c)
    }

    pub fn degree(&self) -> usize {
        self.0.len() - 1
    }

    pub fn scale(mut self, factor: Complex) -> Jet {
        for c in &mut self.0 {
            *c *= factor;
        }
        self
    }

    /// `j`-th derivative at the expansion point.
    pub fn derivative(&self, j: usize) -> Complex {
        self.0[j] * crate::gamma::factorial(j)
    }
}

impl Add<&Jet> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: &Jet) -> Jet {
        for (a, b) in self.0.iter_mut().zip(&rhs.0) {
            *a += *b;
        }
        self
    }
}

impl Mul<&Jet> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        let d = self.degree().min(rhs.degree());
        let mut out = vec![Complex::new(0.0, 0.0); d + 1];
        for i in 0..=d {
            for j in 0..=(d - i) {
                out[i + j] += self.0[i] * rhs.0[j];
            }
        }
        Jet(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule() {
        // (x + ε)² at x = 3: 9 + 6ε + ε²
        let x = Jet::variable(Complex::new(3.0, 0.0), 3);
        let sq = &x * &x;
        assert_eq!(sq.0[0], Complex::new(9.0, 0.0));
        assert_eq!(sq.derivative(1), Complex::new(6.0, 0.0));
        assert_eq!(sq.derivative(2), Complex::new(2.0, 0.0));
        assert_eq!(sq.derivative(3), Complex::new(0.0, 0.0));
    }

    #[test]
    fn reciprocal_derivatives() {
        let z = Complex::new(0.5, 2.0);
        let r = Jet::reciprocal_linear(z, 4);
        // d^j/dz^j 1/z = (−1)^j j! / z^{j+1}
        for j in 0..=4 {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let expect = z.powi(-(j as i32 + 1)) * (sign * crate::gamma::factorial(j));
            assert!((r.derivative(j) - expect).norm() < 1e-14);
        }
    }
}

//! Polynomials in the patch ratio `r` with exact rational coefficients.
//!
//! Every coefficient of the edge-derivative expansion is such a polynomial
//! (for example `1/30 - r^2/8 + r^4/24`), so one symbolic expansion serves
//! every patch geometry; numbers appear only when a concrete `r` is
//! substituted.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Zero;

use super::rational::{rat_int, Rational};

/// Dense polynomial in `r`; `coeffs[k]` multiplies `r^k`. Trailing zero
/// coefficients are always stripped, so `coeffs` is empty iff the polynomial
/// is zero.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RPoly {
    coeffs: Vec<Rational>,
}

impl RPoly {
    pub fn zero() -> Self {
        RPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        RPoly::constant(rat_int(1))
    }

    pub fn constant(c: Rational) -> Self {
        RPoly::from_coeffs(vec![c])
    }

    /// `c · r^power`.
    pub fn monomial(power: usize, c: Rational) -> Self {
        let mut coeffs = vec![Rational::zero(); power + 1];
        coeffs[power] = c;
        RPoly::from_coeffs(coeffs)
    }

    pub fn from_coeffs(coeffs: Vec<Rational>) -> Self {
        let mut p = RPoly { coeffs };
        p.normalize();
        p
    }

    fn normalize(&mut self) {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree of the polynomial, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Coefficient of `r^k` (zero beyond the stored degree).
    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return RPoly::zero();
        }
        RPoly {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Exact evaluation at `r` by Horner's rule.
    pub fn eval(&self, r: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * r + c)
    }
}

impl Add for &RPoly {
    type Output = RPoly;

    fn add(self, rhs: &RPoly) -> RPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect();
        RPoly::from_coeffs(coeffs)
    }
}

impl Sub for &RPoly {
    type Output = RPoly;

    fn sub(self, rhs: &RPoly) -> RPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect();
        RPoly::from_coeffs(coeffs)
    }
}

impl Neg for &RPoly {
    type Output = RPoly;

    fn neg(self) -> RPoly {
        RPoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Mul for &RPoly {
    type Output = RPoly;

    fn mul(self, rhs: &RPoly) -> RPoly {
        if self.is_zero() || rhs.is_zero() {
            return RPoly::zero();
        }
        let mut coeffs = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        RPoly::from_coeffs(coeffs)
    }
}

impl fmt::Display for RPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if first {
                first = false;
            } else {
                write!(f, " + ")?;
            }
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c} r")?,
                _ => write!(f, "{c} r^{k}")?,
            }
        }
        Ok(())
    }
}

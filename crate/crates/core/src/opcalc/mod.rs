//! Exact formal-series calculus over the centred mean `μ` and centred
//! difference `δ` on the macroscopic grid.
//!
//! Working identities, with `E` the one-grid-step shift:
//!
//! ```text
//! μ  = (E^{1/2} + E^{-1/2}) / 2
//! δ  = E^{1/2} - E^{-1/2}
//! E  = 1 + μδ + δ²/2
//! H∂x = 2 asinh(δ/2)
//! μ² = 1 + δ²/4
//! ```
//!
//! A [`DeltaSeries`] is a truncated series in `δ` whose coefficients are
//! exact polynomials in the patch ratio `r`, with each term carrying at most
//! one factor of `μ` (the `μ²` identity is applied during every product, so
//! the representation stays canonical). The centrepiece is
//! [`DeltaSeries::expand_edge_derivative`], which produces the operator
//! mapping macroscopic grid values to the field gradient on a patch edge at
//! `x = X_j ± rH`, to any truncation order.

mod rational;
mod rpoly;

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

pub use rational::{factorial, fmt_ratio, parse_ratio, rat, rat_int, to_f64, ParseRatioError, Rational};
pub use rpoly::RPoly;

/// Which patch edge an operator addresses: `Plus` is `x = X_j + rH`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeSign {
    Plus,
    Minus,
}

impl EdgeSign {
    pub fn flip(self) -> Self {
        match self {
            EdgeSign::Plus => EdgeSign::Minus,
            EdgeSign::Minus => EdgeSign::Plus,
        }
    }

    /// +1 or -1.
    pub fn factor(self) -> i64 {
        match self {
            EdgeSign::Plus => 1,
            EdgeSign::Minus => -1,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            EdgeSign::Plus => "+",
            EdgeSign::Minus => "-",
        }
    }
}

impl fmt::Display for EdgeSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("truncation orders differ: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },
    #[error("binomial base must have zero constant term")]
    ConstantTerm,
    #[error("gamma truncation order p={p} out of range 1..={max} for series of order {order}")]
    TruncationOutOfRange { p: usize, max: usize, order: usize },
}

/// Truncated series `Σ_k plain[k]·δ^k + Σ_k mu[k]·μδ^k` with `RPoly`
/// coefficients, truncated after `δ^order`.
///
/// No `μ²` ever appears: products reduce it through `μ² = 1 + δ²/4` on the
/// fly, which keeps the two coefficient arrays a canonical representation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaSeries {
    order: usize,
    plain: Vec<RPoly>,
    mu: Vec<RPoly>,
}

impl DeltaSeries {
    pub fn zero(order: usize) -> Self {
        DeltaSeries {
            order,
            plain: vec![RPoly::zero(); order + 1],
            mu: vec![RPoly::zero(); order + 1],
        }
    }

    /// The multiplicative identity.
    pub fn one(order: usize) -> Self {
        DeltaSeries::term(order, 0, false, RPoly::one())
    }

    /// Single term `coeff · δ^delta_power`, with a `μ` factor if `has_mu`.
    ///
    /// Panics if `delta_power > order`; this is a construction bug, not a
    /// runtime condition.
    pub fn term(order: usize, delta_power: usize, has_mu: bool, coeff: RPoly) -> Self {
        assert!(
            delta_power <= order,
            "term δ^{delta_power} exceeds truncation order {order}"
        );
        let mut s = DeltaSeries::zero(order);
        if has_mu {
            s.mu[delta_power] = coeff;
        } else {
            s.plain[delta_power] = coeff;
        }
        s
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Coefficient of `δ^k`.
    pub fn plain_coeff(&self, k: usize) -> &RPoly {
        &self.plain[k]
    }

    /// Coefficient of `μδ^k`.
    pub fn mu_coeff(&self, k: usize) -> &RPoly {
        &self.mu[k]
    }

    pub fn is_zero(&self) -> bool {
        self.plain.iter().all(RPoly::is_zero) && self.mu.iter().all(RPoly::is_zero)
    }

    /// True when every plain term has even δ-power and every μ term has odd
    /// δ-power — the structure that expands into integer grid offsets only.
    pub fn is_parity_canonical(&self) -> bool {
        self.plain.iter().enumerate().all(|(k, c)| k % 2 == 0 || c.is_zero())
            && self.mu.iter().enumerate().all(|(k, c)| k % 2 == 1 || c.is_zero())
    }

    fn check_order(&self, rhs: &Self) -> Result<(), SeriesError> {
        if self.order != rhs.order {
            return Err(SeriesError::OrderMismatch {
                left: self.order,
                right: rhs.order,
            });
        }
        Ok(())
    }

    /// Term-wise sum. Fails on mismatched truncation orders.
    pub fn add(&self, rhs: &Self) -> Result<Self, SeriesError> {
        self.check_order(rhs)?;
        Ok(DeltaSeries {
            order: self.order,
            plain: zip_polys(&self.plain, &rhs.plain, |a, b| a + b),
            mu: zip_polys(&self.mu, &rhs.mu, |a, b| a + b),
        })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self, SeriesError> {
        self.check_order(rhs)?;
        Ok(DeltaSeries {
            order: self.order,
            plain: zip_polys(&self.plain, &rhs.plain, |a, b| a - b),
            mu: zip_polys(&self.mu, &rhs.mu, |a, b| a - b),
        })
    }

    pub fn neg(&self) -> Self {
        DeltaSeries {
            order: self.order,
            plain: self.plain.iter().map(|c| -c).collect(),
            mu: self.mu.iter().map(|c| -c).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let c = RPoly::constant(c.clone());
        self.scale_poly(&c)
    }

    pub fn scale_poly(&self, c: &RPoly) -> Self {
        DeltaSeries {
            order: self.order,
            plain: self.plain.iter().map(|a| a * c).collect(),
            mu: self.mu.iter().map(|a| a * c).collect(),
        }
    }

    /// Product truncated at `δ^order`, reducing `μ²` to `1 + δ²/4`.
    ///
    /// Writing each factor as `p(δ) + μ·q(δ)`:
    ///
    /// ```text
    /// (p₁ + μq₁)(p₂ + μq₂) = p₁p₂ + (1 + δ²/4)q₁q₂  +  μ(p₁q₂ + q₁p₂)
    /// ```
    pub fn mul(&self, rhs: &Self) -> Result<Self, SeriesError> {
        self.check_order(rhs)?;
        let order = self.order;
        let pp = convolve(&self.plain, &rhs.plain, order);
        let qq = convolve(&self.mu, &rhs.mu, order);
        let quarter = rat(1, 4);
        let mut plain = pp;
        for (k, c) in qq.iter().enumerate() {
            plain[k] = &plain[k] + c;
            if k + 2 <= order {
                plain[k + 2] = &plain[k + 2] + &c.scale(&quarter);
            }
        }
        let pq = convolve(&self.plain, &rhs.mu, order);
        let qp = convolve(&self.mu, &rhs.plain, order);
        let mu = zip_polys(&pq, &qp, |a, b| a + b);
        Ok(DeltaSeries { order, plain, mu })
    }

    /// The derivative operator `H∂x = 2 asinh(δ/2)` truncated at `δ^order`:
    /// `Σ_k (-1)^k (2k)! / (16^k (k!)² (2k+1)) δ^{2k+1}`.
    pub fn asinh_series(order: usize) -> Self {
        let mut s = DeltaSeries::zero(order);
        let mut k = 0usize;
        while 2 * k < order {
            let two_k = factorial(2 * k as u32);
            let k_fact = factorial(k as u32);
            let mut denom = BigInt::from(16).pow(k as u32) * &k_fact * &k_fact;
            denom *= BigInt::from(2 * k as i64 + 1);
            let mut c = Rational::new(two_k, denom);
            if k % 2 == 1 {
                c = -c;
            }
            s.plain[2 * k + 1] = RPoly::constant(c);
            k += 1;
        }
        s
    }

    /// `(1 + base)^exponent` for a numeric rational exponent, truncated at
    /// `δ^order`. `base` must have zero constant term so the binomial sum
    /// terminates at the truncation order.
    pub fn binomial_series(base: &Self, exponent: &Rational, order: usize) -> Result<Self, SeriesError> {
        if !base.plain[0].is_zero() || !base.mu[0].is_zero() {
            return Err(SeriesError::ConstantTerm);
        }
        let mut acc = DeltaSeries::one(order);
        let mut power = DeltaSeries::one(order);
        let mut coeff = rat_int(1);
        for k in 1..=order {
            power = power.mul(base)?;
            coeff = coeff * (exponent - rat_int(k as i64 - 1)) / rat_int(k as i64);
            if coeff.is_zero() {
                break;
            }
            acc = acc.add(&power.scale(&coeff))?;
        }
        Ok(acc)
    }

    /// `(1 + base)^{±r}` with the exponent kept symbolic: the binomial
    /// coefficient of the k-th term is the degree-k polynomial
    /// `C(±r, k) = (±r)(±r-1)⋯(±r-k+1)/k!`.
    pub fn binomial_power(base: &Self, sign: EdgeSign, order: usize) -> Result<Self, SeriesError> {
        if !base.plain[0].is_zero() || !base.mu[0].is_zero() {
            return Err(SeriesError::ConstantTerm);
        }
        let x = RPoly::monomial(1, rat_int(sign.factor()));
        let mut acc = DeltaSeries::one(order);
        let mut power = DeltaSeries::one(order);
        let mut coeff = RPoly::one();
        for k in 1..=order {
            power = power.mul(base)?;
            let factor = &x - &RPoly::constant(rat_int(k as i64 - 1));
            coeff = (&coeff * &factor).scale(&rat(1, k as i64));
            acc = acc.add(&power.scale_poly(&coeff))?;
        }
        Ok(acc)
    }

    /// Expansion of the edge-derivative operator `E^{±r} H∂x` in canonical
    /// parity form (μ on odd δ-powers, plain even δ-powers):
    ///
    /// ```text
    /// E^{±r} H∂x = μ(1 + δ²/4)^{-1/2} · (1 + μδ + δ²/2)^{±r} · 2 asinh(δ/2)
    /// ```
    ///
    /// The leading factor is the identity rewritten through `μ² = 1 + δ²/4`;
    /// it is what turns the raw expansion into integer-offset form. At
    /// order 8 the plus-edge series is
    ///
    /// ```text
    /// μδ + rδ² - (1/6 - r²/2)μδ³ - r(1/12 - r²/6)δ⁴
    ///    + (1/30 - r²/8 + r⁴/24)μδ⁵ + r(1/90 - r²/36 + r⁴/120)δ⁶
    ///    - (1/140 - 7r²/240 + r⁴/72 - r⁶/720)μδ⁷
    ///    - r(1/560 - 7r²/1440 + r⁴/480 - r⁶/5040)δ⁸
    /// ```
    ///
    /// The order-2 truncation is the quadratic-interpolation gradient:
    ///
    /// ```
    /// use gaptooth_core::opcalc::{DeltaSeries, EdgeSign, RPoly, rat_int};
    ///
    /// let s = DeltaSeries::expand_edge_derivative(EdgeSign::Plus, 2);
    /// assert_eq!(s.mu_coeff(1), &RPoly::one());                      // μδ
    /// assert_eq!(s.plain_coeff(2), &RPoly::monomial(1, rat_int(1))); // rδ²
    /// ```
    pub fn expand_edge_derivative(sign: EdgeSign, order: usize) -> Self {
        let w = {
            // μδ + δ²/2, i.e. E - 1
            let mut s = DeltaSeries::zero(order);
            if order >= 1 {
                s.mu[1] = RPoly::one();
            }
            if order >= 2 {
                s.plain[2] = RPoly::constant(rat(1, 2));
            }
            s
        };
        let quarter_delta_sq = {
            let mut s = DeltaSeries::zero(order);
            if order >= 2 {
                s.plain[2] = RPoly::constant(rat(1, 4));
            }
            s
        };
        let prefactor = DeltaSeries::binomial_series(&quarter_delta_sq, &rat(-1, 2), order)
            .expect("zero constant term");
        let shift_pow = DeltaSeries::binomial_power(&w, sign, order).expect("zero constant term");
        let mu = DeltaSeries::term(order, 0, true, RPoly::one());
        mu.mul(&prefactor)
            .and_then(|s| s.mul(&shift_pow))
            .and_then(|s| s.mul(&DeltaSeries::asinh_series(order)))
            .expect("orders match by construction")
    }

    /// Keeps the δ-powers `≤ 2p` — the order-`2p` patch boundary condition
    /// (coupling orders `1..=p` with the coupling parameter set to one).
    /// The returned series has truncation order `2p`.
    pub fn gamma_truncate(&self, p: usize) -> Result<Self, SeriesError> {
        let max = self.order / 2;
        if p < 1 || p > max {
            return Err(SeriesError::TruncationOutOfRange {
                p,
                max,
                order: self.order,
            });
        }
        Ok(DeltaSeries {
            order: 2 * p,
            plain: self.plain[..=2 * p].to_vec(),
            mu: self.mu[..=2 * p].to_vec(),
        })
    }

    /// JSON-facing view: one entry per nonzero term, coefficients as exact
    /// `num/den` strings paired with their power of `r`.
    pub fn to_json(&self) -> SeriesJson {
        let mut terms = Vec::new();
        for k in 0..=self.order {
            for (has_mu, poly) in [(false, &self.plain[k]), (true, &self.mu[k])] {
                if poly.is_zero() {
                    continue;
                }
                let coeff = poly
                    .coeffs()
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(pow, c)| (fmt_ratio(c), pow))
                    .collect();
                terms.push(SeriesTermJson {
                    delta_power: k,
                    has_mu,
                    coeff,
                });
            }
        }
        SeriesJson {
            order: self.order,
            terms,
        }
    }
}

/// Serialization schema:
/// `{order, terms: [{delta_power, has_mu, coeff: [["num/den", r_power], …]}]}`.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct SeriesJson {
    pub order: usize,
    pub terms: Vec<SeriesTermJson>,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct SeriesTermJson {
    pub delta_power: usize,
    pub has_mu: bool,
    pub coeff: Vec<(String, usize)>,
}

impl fmt::Display for DeltaSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for k in 0..=self.order {
            for (tag, poly) in [("", &self.plain[k]), ("μ", &self.mu[k])] {
                if poly.is_zero() {
                    continue;
                }
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                match k {
                    0 => write!(f, "({poly}){tag}")?,
                    1 => write!(f, "({poly}){tag}δ")?,
                    _ => write!(f, "({poly}){tag}δ^{k}")?,
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

fn zip_polys(a: &[RPoly], b: &[RPoly], op: impl Fn(&RPoly, &RPoly) -> RPoly) -> Vec<RPoly> {
    a.iter().zip(b).map(|(x, y)| op(x, y)).collect()
}

/// Polynomial product of two δ-coefficient arrays, truncated at `δ^order`.
fn convolve(a: &[RPoly], b: &[RPoly], order: usize) -> Vec<RPoly> {
    let mut out = vec![RPoly::zero(); order + 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if i + j > order {
                break;
            }
            if y.is_zero() {
                continue;
            }
            out[i + j] = &out[i + j] + &(x * y);
        }
    }
    out
}

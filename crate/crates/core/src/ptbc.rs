//! Patch boundary condition stencils: numeric weights over macroscopic grid
//! offsets that estimate `H·∂x` of the field at a patch edge `x = X_j ± rH`.
//!
//! A parity-canonical [`DeltaSeries`] expands into integer shifts only
//! (`δ² = E - 2 + E⁻¹`, `μδ = (E - E⁻¹)/2`), so an order-`2p` operator
//! becomes `2p+1` weights over offsets `-p..=p`. Weights are accumulated in
//! exact rational arithmetic and converted to floating point once, at
//! construction.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::opcalc::{rat, to_f64, DeltaSeries, EdgeSign, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StencilError {
    #[error("series has mixed parity terms; expansion would need half-integer offsets")]
    MixedParity,
    #[error("patch ratio r={0} outside (0, 1/2]")]
    RatioOutOfRange(String),
    #[error("patch boundary condition order {0} must be even and at least 2")]
    BadPtbcOrder(usize),
    #[error("macroscopic grid needs at least 2 points, got {0}")]
    DegenerateGrid(usize),
}

/// Shift-operator expansion of a parity-canonical series at a concrete patch
/// ratio: map from integer grid offset to exact weight.
pub fn exact_weights(
    series: &DeltaSeries,
    r: &Rational,
) -> Result<BTreeMap<i64, Rational>, StencilError> {
    if !series.is_parity_canonical() {
        return Err(StencilError::MixedParity);
    }
    // δ² and μδ in integer shifts; higher powers by convolution.
    let delta_sq = BTreeMap::from([(-1, rat(1, 1)), (0, rat(-2, 1)), (1, rat(1, 1))]);
    let mu_delta = BTreeMap::from([(-1, rat(-1, 2)), (1, rat(1, 2))]);

    let mut weights: BTreeMap<i64, Rational> = BTreeMap::new();
    let mut even_power = BTreeMap::from([(0, rat(1, 1))]); // (δ²)^q, q = 0,1,...
    for q in 0..=series.order() / 2 {
        if q > 0 {
            even_power = shift_mul(&even_power, &delta_sq);
        }
        let k_even = 2 * q;
        let c = series.plain_coeff(k_even).eval(r);
        if !c.is_zero() {
            accumulate(&mut weights, &even_power, &c);
        }
        let k_odd = 2 * q + 1;
        if k_odd <= series.order() {
            let c = series.mu_coeff(k_odd).eval(r);
            if !c.is_zero() {
                let odd_power = shift_mul(&even_power, &mu_delta);
                accumulate(&mut weights, &odd_power, &c);
            }
        }
    }
    weights.retain(|_, w| !w.is_zero());
    Ok(weights)
}

fn shift_mul(a: &BTreeMap<i64, Rational>, b: &BTreeMap<i64, Rational>) -> BTreeMap<i64, Rational> {
    let mut out: BTreeMap<i64, Rational> = BTreeMap::new();
    for (ka, wa) in a {
        for (kb, wb) in b {
            let entry = out.entry(ka + kb).or_insert_with(Rational::zero);
            *entry += wa * wb;
        }
    }
    out
}

fn accumulate(into: &mut BTreeMap<i64, Rational>, from: &BTreeMap<i64, Rational>, scale: &Rational) {
    for (k, w) in from {
        let entry = into.entry(*k).or_insert_with(Rational::zero);
        *entry += w * scale;
    }
}

/// Immutable boundary-condition stencil for one patch edge.
///
/// `weights[p + k]` multiplies the macroscopic value at offset `k ∈ -p..=p`
/// from the patch; the weighted sum estimates `H·∂x` of the field at
/// `x = X_j ± rH`. Weights always sum to zero (a derivative annihilates
/// constants) and minus-edge weights are the plus-edge weights reversed and
/// negated.
#[derive(Clone, Debug, PartialEq)]
pub struct PtbcStencil {
    p: usize,
    r: Rational,
    sign: EdgeSign,
    weights: Vec<f64>,
}

impl PtbcStencil {
    /// Realizes a parity-canonical series as a numeric stencil at patch
    /// ratio `r ∈ (0, 1/2]`.
    pub fn from_series(
        series: &DeltaSeries,
        r: &Rational,
        sign: EdgeSign,
    ) -> Result<Self, StencilError> {
        if r <= &Rational::zero() || r > &rat(1, 2) {
            return Err(StencilError::RatioOutOfRange(r.to_string()));
        }
        let exact = exact_weights(series, r)?;
        let p = series.order().div_ceil(2);
        let mut weights = vec![0.0; 2 * p + 1];
        for (k, w) in &exact {
            weights[(k + p as i64) as usize] = to_f64(w);
        }
        Ok(PtbcStencil {
            p,
            r: r.clone(),
            sign,
            weights,
        })
    }

    /// Order-`p` stencil (δ-powers up to `2p`) from the edge-derivative
    /// expansion itself.
    ///
    /// At `r = 1/2` the patches touch and the order-1 stencil collapses to
    /// the one-sided difference:
    ///
    /// ```
    /// use gaptooth_core::opcalc::{rat, EdgeSign};
    /// use gaptooth_core::ptbc::PtbcStencil;
    ///
    /// let st = PtbcStencil::build(1, &rat(1, 2), EdgeSign::Plus)?;
    /// assert_eq!(st.weights(), &[0.0, -1.0, 1.0]);
    /// # Ok::<(), gaptooth_core::ptbc::StencilError>(())
    /// ```
    pub fn build(p: usize, r: &Rational, sign: EdgeSign) -> Result<Self, StencilError> {
        if p == 0 {
            return Err(StencilError::BadPtbcOrder(0));
        }
        let series = DeltaSeries::expand_edge_derivative(sign, 2 * p);
        PtbcStencil::from_series(&series, r, sign)
    }

    /// Stencil half-width `p`; `2p` is the highest δ-power kept.
    pub fn order(&self) -> usize {
        self.p
    }

    pub fn r(&self) -> &Rational {
        &self.r
    }

    pub fn sign(&self) -> EdgeSign {
        self.sign
    }

    /// Weight at offset `k ∈ -p..=p` (zero outside).
    pub fn weight(&self, k: i64) -> f64 {
        let idx = k + self.p as i64;
        if idx < 0 || idx as usize >= self.weights.len() {
            0.0
        } else {
            self.weights[idx as usize]
        }
    }

    /// All weights in offset order `-p..=p`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Applies the stencil to a window of `2p+1` samples taken at offsets
    /// `-p..=p` (non-periodic; used for exactness checks).
    pub fn apply_window(&self, window: &[f64]) -> f64 {
        assert_eq!(window.len(), self.weights.len(), "window/stencil size mismatch");
        self.weights.iter().zip(window).map(|(w, u)| w * u).sum()
    }

    /// `H·∂x` of the macroscopic field at the patch edge `X_j ± rH`, from
    /// periodic grid values `u`. Offsets wrap around; for very small grids
    /// (`m < 2p+1`) opposite offsets alias onto the same point, matching the
    /// periodic geometry.
    pub fn eval_edge_gradient(&self, u: &[f64], j: usize) -> Result<f64, StencilError> {
        let m = u.len() as i64;
        if m < 2 {
            return Err(StencilError::DegenerateGrid(u.len()));
        }
        let p = self.p as i64;
        let mut acc = 0.0;
        for (idx, w) in self.weights.iter().enumerate() {
            let k = idx as i64 - p;
            let col = (j as i64 + k).rem_euclid(m) as usize;
            acc += w * u[col];
        }
        Ok(acc)
    }

    /// Largest polynomial degree the stencil differentiates exactly: for
    /// every monomial `ξ^e` with `e` up to the returned degree, applying the
    /// weights to samples at offsets `-p..=p` reproduces the derivative at
    /// `ξ = ±r` to within `100·ε·scale`. An order-`p` stencil yields at
    /// least `2p`. The search is capped at `2p + 8`.
    pub fn exactness_order(&self) -> usize {
        let p = self.p as i64;
        let target = self.sign.factor() as f64 * to_f64(&self.r);
        let cap = 2 * self.p + 8;
        for degree in 0..=cap {
            let samples: Vec<f64> = (-p..=p).map(|k| powi(k as f64, degree)).collect();
            let applied = self.apply_window(&samples);
            let expected = if degree == 0 {
                0.0
            } else {
                degree as f64 * powi(target, degree - 1)
            };
            let scale = self
                .weights
                .iter()
                .zip(&samples)
                .map(|(w, s)| (w * s).abs())
                .sum::<f64>()
                + expected.abs()
                + 1.0;
            if (applied - expected).abs() > 100.0 * f64::EPSILON * scale {
                return degree.saturating_sub(1);
            }
        }
        cap
    }

    /// CLI-facing JSON view: `{p, r, sign, weights: {"-2": …, …}}`.
    pub fn to_json(&self) -> StencilJson {
        let weights = (-(self.p as i64)..=self.p as i64)
            .map(|k| (k.to_string(), self.weight(k)))
            .collect();
        StencilJson {
            p: self.p,
            r: to_f64(&self.r),
            sign: self.sign.symbol().to_owned(),
            weights,
        }
    }
}

fn powi(x: f64, e: usize) -> f64 {
    if e == 0 {
        1.0
    } else {
        x.powi(e as i32)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StencilJson {
    pub p: usize,
    pub r: f64,
    pub sign: String,
    pub weights: BTreeMap<String, f64>,
}

/// The plus/minus edge stencils used together by the microscale solver.
#[derive(Clone, Debug)]
pub struct StencilPair {
    pub plus: PtbcStencil,
    pub minus: PtbcStencil,
}

impl StencilPair {
    /// Builds both edge stencils of order `p` at ratio `r`.
    pub fn build(p: usize, r: &Rational) -> Result<Self, StencilError> {
        Ok(StencilPair {
            plus: PtbcStencil::build(p, r, EdgeSign::Plus)?,
            minus: PtbcStencil::build(p, r, EdgeSign::Minus)?,
        })
    }

    /// Builds from the user-facing even boundary-condition order
    /// (2, 4, 6, 8 → p = order/2).
    pub fn of_ptbc_order(order: usize, r: &Rational) -> Result<Self, StencilError> {
        if order == 0 || !order.is_multiple_of(2) {
            return Err(StencilError::BadPtbcOrder(order));
        }
        StencilPair::build(order / 2, r)
    }

    /// Stencil half-width `p`.
    pub fn order(&self) -> usize {
        self.plus.order()
    }
}

//! Classical high-order macroscale discretisation on the `m`-point periodic
//! grid, used as an independent consistency oracle for the slow spectrum.
//!
//! The operator discretises `u_t = u_xx - c u_x - b u_xxx - a u_xxxx` with
//! the graded brackets
//!
//! ```text
//! (δ² - δ⁴/12 + δ⁶/90)/H²  -  c(μδ - μδ³/6 + μδ⁵/30)/H
//!   - b(μδ³ - μδ⁵/4)/H³   -  a(δ⁴ - δ⁶/6)/H⁴
//! ```
//!
//! where truncation order `p ∈ {1,2,3}` keeps the first `p` grading levels
//! (`p = 1` is the standard second-order three-point scheme). The matrix is
//! circulant, so eigenvalues come in closed form from the symbol; the dense
//! eigensolve is kept alongside as a cross-check.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::opcalc::{rat, rat_int, to_f64, DeltaSeries, RPoly};
use crate::ptbc;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RefmodelError {
    #[error("truncation order p={0} outside 1..=3")]
    BadTruncation(usize),
    #[error("m={m} too small for the stencil bandwidth (needs at least {need})")]
    TooFewPoints { m: usize, need: usize },
    #[error("eigensolver failed to converge")]
    EigenFailed,
}

/// Periodic macroscale operator with exact-rational band weights scaled by
/// the PDE coefficients.
#[derive(Clone, Debug)]
pub struct MacroOperator {
    matrix: DMatrix<f64>,
    bands: BTreeMap<i64, f64>,
    truncation: usize,
    coeff_a: f64,
    coeff_b: f64,
    coeff_c: f64,
    spacing: f64,
    m: usize,
}

/// Builds the order-`p` periodic discretisation of
/// `u_t = u_xx - c u_x - b u_xxx - a u_xxxx` on `m` points with spacing `H`.
pub fn macro_stencil(
    p: usize,
    a: f64,
    b: f64,
    c: f64,
    spacing: f64,
    m: usize,
) -> Result<MacroOperator, RefmodelError> {
    if !(1..=3).contains(&p) {
        return Err(RefmodelError::BadTruncation(p));
    }
    let need = 2 * p + 1;
    if m < need {
        return Err(RefmodelError::TooFewPoints { m, need });
    }

    // graded brackets: entries are (delta power, numer, denom, grading level)
    type Bracket = &'static [(usize, i64, i64, usize)];
    let terms: [(Bracket, f64); 4] = [
        // diffusion / H²
        (
            &[(2, 1, 1, 1), (4, -1, 12, 2), (6, 1, 90, 3)],
            1.0 / (spacing * spacing),
        ),
        // advection: -c/H · (μδ - μδ³/6 + μδ⁵/30)
        (
            &[(1, 1, 1, 1), (3, -1, 6, 2), (5, 1, 30, 3)],
            -c / spacing,
        ),
        // dispersion: -b/H³ · (μδ³ - μδ⁵/4)
        (
            &[(3, 1, 1, 2), (5, -1, 4, 3)],
            -b / spacing.powi(3),
        ),
        // fourth-order dissipation: -a/H⁴ · (δ⁴ - δ⁶/6)
        (
            &[(4, 1, 1, 2), (6, -1, 6, 3)],
            -a / spacing.powi(4),
        ),
    ];

    let mut bands: BTreeMap<i64, f64> = BTreeMap::new();
    for (bracket, scale) in terms {
        if scale == 0.0 {
            continue;
        }
        let mut series = DeltaSeries::zero(6);
        for &(power, num, den, level) in bracket {
            if level > p {
                continue;
            }
            let has_mu = power % 2 == 1;
            let term = DeltaSeries::term(6, power, has_mu, RPoly::constant(rat(num, den)));
            series = series.add(&term).expect("equal orders");
        }
        if series.is_zero() {
            continue;
        }
        let exact = ptbc::exact_weights(&series, &rat_int(0)).expect("brackets are parity canonical");
        for (offset, w) in exact {
            *bands.entry(offset).or_insert(0.0) += scale * to_f64(&w);
        }
    }
    bands.retain(|_, w| *w != 0.0);

    let mut matrix = DMatrix::zeros(m, m);
    for row in 0..m {
        for (&offset, &w) in &bands {
            let col = (row as i64 + offset).rem_euclid(m as i64) as usize;
            matrix[(row, col)] += w;
        }
    }
    Ok(MacroOperator {
        matrix,
        bands,
        truncation: p,
        coeff_a: a,
        coeff_b: b,
        coeff_c: c,
        spacing,
        m,
    })
}

impl MacroOperator {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Band weights by grid offset.
    pub fn bands(&self) -> &BTreeMap<i64, f64> {
        &self.bands
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn coefficients(&self) -> (f64, f64, f64) {
        (self.coeff_a, self.coeff_b, self.coeff_c)
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let x = nalgebra::DVector::from_column_slice(u);
        (&self.matrix * x).iter().copied().collect()
    }

    /// Circulant symbol at angle `θ`: `Σ_k w_k e^{ikθ}`.
    pub fn symbol(&self, theta: f64) -> Complex64 {
        self.bands
            .iter()
            .map(|(&k, &w)| Complex64::from_polar(1.0, k as f64 * theta) * w)
            .sum()
    }

    /// All `m` eigenvalues from the circulant symbol at the grid
    /// wavenumbers `θ_q = 2πq/m`, sorted by descending real part.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        let mut eigs: Vec<Complex64> = (0..self.m)
            .map(|q| self.symbol(std::f64::consts::TAU * q as f64 / self.m as f64))
            .collect();
        sort_desc(&mut eigs);
        eigs
    }

    /// All eigenvalues by dense Hessenberg-QR reduction; must agree with the
    /// symbol route to roundoff.
    pub fn eigenvalues_dense(&self) -> Result<Vec<Complex64>, RefmodelError> {
        let mut eigs =
            crate::eig::eigenvalues(&self.matrix).map_err(|_| RefmodelError::EigenFailed)?;
        sort_desc(&mut eigs);
        Ok(eigs)
    }
}

fn sort_desc(eigs: &mut [Complex64]) {
    eigs.sort_by(|a, b| b.re.total_cmp(&a.re).then_with(|| b.im.total_cmp(&a.im)));
}

//! Eigenvalue analysis of the coupled patch dynamics.
//!
//! The linear one-microstep map is assembled column by column: perturb each
//! of the `m·n` microscopic values from zero by a unit, take one time step,
//! and read the column off the stepped state. Eigenvalues `μ` of the map
//! convert to growth rates `λ = log(μ)/Δt`; sorted by descending real part
//! they fall into `n` groups of `m` — the slow macroscopic modes first, then
//! the fast internal patch modes.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::microsim::{self, MicroState, ModelSpec, PatchConfig, SimError, TimeScheme};
use crate::opcalc::Rational;
use crate::ptbc::{StencilError, StencilPair};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectraError {
    #[error("one-step map assembly requires a linear model; {0} is nonlinear")]
    NonlinearModel(String),
    #[error("eigensolver failed to converge")]
    EigenFailed,
    #[error("convergence fit needs at least {need} data points, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("convergence data sits at the error floor; fit is degenerate")]
    DegenerateFit,
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Stencil(#[from] StencilError),
}

/// Where a one-step map came from.
#[derive(Clone, Debug)]
pub struct MapProvenance {
    pub model: ModelSpec,
    pub cfg: PatchConfig,
    pub ptbc_order: usize,
    pub scheme: TimeScheme,
}

/// Dense linear map of one microscopic time step over all `m·n` unknowns.
#[derive(Clone, Debug)]
pub struct OneStepMap {
    matrix: DMatrix<f64>,
    dt: f64,
    provenance: MapProvenance,
}

impl OneStepMap {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn provenance(&self) -> &MapProvenance {
        &self.provenance
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Applies the map to a flat state vector.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let x = nalgebra::DVector::from_column_slice(v);
        (&self.matrix * x).iter().copied().collect()
    }
}

/// Assembles the one-step map by stepping every unit basis state.
///
/// Only linear models are accepted: for them the column-by-column probe
/// reproduces the integrator's action exactly, with no linearization.
pub fn assemble_map(
    cfg: &PatchConfig,
    model: &ModelSpec,
    pair: &StencilPair,
    dt: f64,
    scheme: TimeScheme,
) -> Result<OneStepMap, SpectraError> {
    if !model.is_linear() {
        return Err(SpectraError::NonlinearModel(model.name().to_owned()));
    }
    let dof = cfg.dof();
    let mut data = Vec::with_capacity(dof * dof);
    for i in 0..dof {
        let mut v = vec![0.0; dof];
        v[i] = 1.0;
        let basis = MicroState::from_flat(cfg, 0.0, v);
        let stepped = microsim::step(&basis, cfg, model, pair, dt, scheme)?;
        if !stepped.all_finite() {
            return Err(SpectraError::Sim(SimError::NonFinite(dt)));
        }
        data.extend_from_slice(stepped.values());
    }
    Ok(OneStepMap {
        matrix: DMatrix::from_vec(dof, dof, data),
        dt,
        provenance: MapProvenance {
            model: *model,
            cfg: cfg.clone(),
            ptbc_order: 2 * pair.order(),
            scheme,
        },
    })
}

/// Full spectrum of a one-step map: eigenvalues `μ`, growth rates
/// `λ = log(μ)/Δt`, sorted by descending real part of `λ`, grouped into the
/// slow family (the top `m`) and `n-1` internal families of `m` modes each.
#[derive(Clone, Debug)]
pub struct Spectrum {
    group_size: usize,
    groups: usize,
    eigenvalues: Vec<Complex64>,
    growth_rates: Vec<Complex64>,
    dt: f64,
}

impl Spectrum {
    /// Eigenvalues `μ` of the one-step map (sorted alongside the rates).
    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    /// Growth rates `λ = log(μ)/Δt`, descending real part.
    pub fn growth_rates(&self) -> &[Complex64] {
        &self.growth_rates
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Slow (macroscopic) family: the `m` rates of largest real part.
    pub fn slow(&self) -> &[Complex64] {
        &self.growth_rates[..self.group_size]
    }

    /// Internal family `l ∈ 1..n`: modes `l·m..(l+1)·m` in sorted order.
    pub fn internal(&self, l: usize) -> &[Complex64] {
        assert!(l >= 1 && l < self.groups, "internal group {l} out of range");
        &self.growth_rates[l * self.group_size..(l + 1) * self.group_size]
    }

    pub fn group_size(&self) -> usize {
        self.group_size
    }

    pub fn groups(&self) -> usize {
        self.groups
    }

    /// Group label for the sorted index: `slow` or `internal<l>`.
    pub fn group_label(&self, idx: usize) -> String {
        let l = idx / self.group_size;
        if l == 0 {
            "slow".to_owned()
        } else {
            format!("internal{l}")
        }
    }

    pub fn max_abs_mu(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0f64, |acc, mu| acc.max(mu.norm()))
    }
}

/// Computes all eigenvalues of the map (dense Hessenberg-QR reduction) and
/// transforms them to growth rates.
pub fn eigen_growth(map: &OneStepMap) -> Result<Spectrum, SpectraError> {
    let mu = crate::eig::eigenvalues(&map.matrix).map_err(|_| SpectraError::EigenFailed)?;
    let dt = map.dt;
    let mut pairs: Vec<(Complex64, Complex64)> =
        mu.iter().map(|&m| (m, m.ln() / dt)).collect();
    pairs.sort_by(|a, b| {
        b.1.re
            .total_cmp(&a.1.re)
            .then_with(|| b.1.im.total_cmp(&a.1.im))
    });
    let cfg = &map.provenance.cfg;
    Ok(Spectrum {
        group_size: cfg.patches(),
        groups: cfg.fine_points(),
        eigenvalues: pairs.iter().map(|p| p.0).collect(),
        growth_rates: pairs.iter().map(|p| p.1).collect(),
        dt,
    })
}

/// Convenience: spectrum of the patch dynamics for one geometry.
pub fn spectrum_for(
    cfg: &PatchConfig,
    ptbc_order: usize,
    model: &ModelSpec,
    dt: f64,
    scheme: TimeScheme,
) -> Result<Spectrum, SpectraError> {
    let pair = StencilPair::of_ptbc_order(ptbc_order, cfg.ratio())?;
    let map = assemble_map(cfg, model, &pair, dt, scheme)?;
    eigen_growth(&map)
}

/// One row of the growth-rate tables: leading rate, the three following
/// conjugate pairs (reported as their common real part) and a representative
/// internal rate (mean of the first internal family).
#[derive(Clone, Debug, PartialEq)]
pub struct TableRow {
    pub m: usize,
    pub lambda1: f64,
    pub pair23: Option<f64>,
    pub pair45: Option<f64>,
    pub pair67: Option<f64>,
    pub internal: f64,
}

impl TableRow {
    pub fn from_spectrum(spectrum: &Spectrum) -> Self {
        let m = spectrum.group_size();
        let slow = spectrum.slow();
        let mean_re = |range: std::ops::Range<usize>| -> Option<f64> {
            let hi = range.end.min(m);
            if range.start >= hi {
                return None;
            }
            let count = (hi - range.start) as f64;
            Some(slow[range.start..hi].iter().map(|z| z.re).sum::<f64>() / count)
        };
        let internal = spectrum.internal(1);
        TableRow {
            m,
            lambda1: slow[0].re,
            pair23: mean_re(1..3),
            pair45: mean_re(3..5),
            pair67: mean_re(5..7),
            internal: internal.iter().map(|z| z.re).sum::<f64>() / internal.len() as f64,
        }
    }
}

/// Growth-rate table over a list of patch counts on the `2π`-periodic
/// domain, for the diffusion model.
pub fn table_report(
    m_list: &[usize],
    n: usize,
    r: &Rational,
    ptbc_order: usize,
    dt: f64,
    scheme: TimeScheme,
) -> Result<Vec<TableRow>, SpectraError> {
    m_list
        .iter()
        .map(|&m| {
            let cfg = PatchConfig::new(std::f64::consts::TAU, m, r.clone(), n)?;
            let spectrum = spectrum_for(&cfg, ptbc_order, &ModelSpec::Diffusion, dt, scheme)?;
            Ok(TableRow::from_spectrum(&spectrum))
        })
        .collect()
}

/// Least-squares slope of `log err` against `log H`.
///
/// `samples` are `(H, err)` pairs from a doubling sequence of patch counts;
/// points at or below `floor` (when given) are excluded as roundoff-floored.
pub fn convergence_order(samples: &[(f64, f64)], floor: Option<f64>) -> Result<f64, SpectraError> {
    if samples.len() < 3 {
        return Err(SpectraError::TooFewPoints {
            need: 3,
            got: samples.len(),
        });
    }
    let cut = floor.unwrap_or(0.0).max(1e-14);
    let kept: Vec<(f64, f64)> = samples
        .iter()
        .copied()
        .filter(|&(_, err)| err > cut)
        .collect();
    if kept.len() < 2 {
        return Err(SpectraError::DegenerateFit);
    }
    let xs: Vec<f64> = kept.iter().map(|&(h, _)| h.ln()).collect();
    let ys: Vec<f64> = kept.iter().map(|&(_, e)| e.ln()).collect();
    let xbar = xs.iter().sum::<f64>() / xs.len() as f64;
    let ybar = ys.iter().sum::<f64>() / ys.len() as f64;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    if sxx == 0.0 {
        return Err(SpectraError::DegenerateFit);
    }
    Ok(sxy / sxx)
}

/// Error sample for one patch count: `err = |Re λ₂,₃ + 1|`, the deviation of
/// the gravest non-conserved diffusive mode from the exact rate `-1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceSample {
    pub m: usize,
    pub h: f64,
    pub err: f64,
}

/// Result of a convergence study of the slow diffusive mode.
#[derive(Clone, Debug)]
pub struct ConvergenceFit {
    pub samples: Vec<ConvergenceSample>,
    pub floor: Option<f64>,
    pub fitted_order: f64,
}

/// Estimates the time-discretisation error floor on `|Re λ₂,₃ + 1|` by a
/// Δt-halving probe at the largest patch count.
pub fn dt_floor_probe(
    m: usize,
    n: usize,
    r: &Rational,
    ptbc_order: usize,
    dt: f64,
    scheme: TimeScheme,
) -> Result<f64, SpectraError> {
    let probe = |dt: f64| -> Result<f64, SpectraError> {
        let cfg = PatchConfig::new(std::f64::consts::TAU, m, r.clone(), n)?;
        let spectrum = spectrum_for(&cfg, ptbc_order, &ModelSpec::Diffusion, dt, scheme)?;
        Ok(TableRow::from_spectrum(&spectrum).pair23.unwrap_or(0.0))
    };
    let a = probe(dt)?;
    let b = probe(dt / 2.0)?;
    Ok(10.0 * (a - b).abs())
}

/// Runs the diffusion convergence study over a sequence of patch counts and
/// fits the order, optionally estimating and applying the Δt error floor.
pub fn convergence_fit(
    m_list: &[usize],
    n: usize,
    r: &Rational,
    ptbc_order: usize,
    dt: f64,
    scheme: TimeScheme,
    probe_floor: bool,
) -> Result<ConvergenceFit, SpectraError> {
    let rows = table_report(m_list, n, r, ptbc_order, dt, scheme)?;
    let samples: Vec<ConvergenceSample> = rows
        .iter()
        .map(|row| ConvergenceSample {
            m: row.m,
            h: std::f64::consts::TAU / row.m as f64,
            err: (row.pair23.unwrap_or(f64::NAN) + 1.0).abs(),
        })
        .collect();
    let floor = if probe_floor {
        let &m_max = m_list.iter().max().ok_or(SpectraError::TooFewPoints { need: 3, got: 0 })?;
        Some(dt_floor_probe(m_max, n, r, ptbc_order, dt, scheme)?)
    } else {
        None
    };
    let fitted_order = convergence_order(
        &samples.iter().map(|s| (s.h, s.err)).collect::<Vec<_>>(),
        floor,
    )?;
    Ok(ConvergenceFit {
        samples,
        floor,
        fitted_order,
    })
}

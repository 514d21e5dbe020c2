//! Method-of-lines microscale solver on the patch array.
//!
//! Each of the `m` patches carries `n` fine grid points spanning
//! `[X_j - h/2, X_j + h/2]` with spacing `Δx = h/(n-1)`. The flux boundary
//! condition is imposed through one ghost point per edge: the ghost value is
//! chosen so the centred difference across the edge point equals the
//! gradient supplied by the patch boundary condition stencils. Ghosts are
//! recomputed from the current state every stage, which makes the coupled
//! system a plain autonomous ODE in all `m·n` unknowns.

use thiserror::Error;

use crate::opcalc::{rat, to_f64, Rational};
use crate::ptbc::{StencilError, StencilPair};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("patch count m={0} must be at least 2")]
    TooFewPatches(usize),
    #[error("fine grid size n={0} must be odd and at least 3")]
    BadFineGrid(usize),
    #[error("patch ratio r={0} outside (0, 1/2]")]
    RatioOutOfRange(String),
    #[error("domain length must be positive and finite, got {0}")]
    BadLength(f64),
    #[error("time step must be positive and finite, got {0}")]
    BadTimeStep(f64),
    #[error(
        "time step {dt:.3e} exceeds the diffusive stability bound {bound:.3e}; \
         reduce dt or opt into instability"
    )]
    UnstableTimeStep { dt: f64, bound: f64 },
    #[error("non-finite field value at t={0}")]
    NonFinite(f64),
    #[error("blow-up: |v| reached {max:.3e} (cap {cap:.3e}) at t={t:.6}")]
    BlowUp { t: f64, max: f64, cap: f64 },
    #[error(transparent)]
    Stencil(#[from] StencilError),
}

/// Geometry of the patch array.
#[derive(Clone, Debug, PartialEq)]
pub struct PatchConfig {
    length: f64,
    patches: usize,
    ratio: Rational,
    fine_points: usize,
    // derived, precomputed
    macro_spacing: f64,
    patch_width: f64,
    fine_dx: f64,
}

impl PatchConfig {
    /// Builds a consistent geometry: domain length `L`, `m` patches of `n`
    /// odd fine points each, patch ratio `r = h/(2H)` in `(0, 1/2]`.
    pub fn new(length: f64, patches: usize, ratio: Rational, fine_points: usize) -> Result<Self, SimError> {
        if !(length.is_finite() && length > 0.0) {
            return Err(SimError::BadLength(length));
        }
        if patches < 2 {
            return Err(SimError::TooFewPatches(patches));
        }
        if fine_points < 3 || fine_points.is_multiple_of(2) {
            return Err(SimError::BadFineGrid(fine_points));
        }
        if ratio <= rat(0, 1) || ratio > rat(1, 2) {
            return Err(SimError::RatioOutOfRange(ratio.to_string()));
        }
        let macro_spacing = length / patches as f64;
        let patch_width = 2.0 * to_f64(&ratio) * macro_spacing;
        let fine_dx = patch_width / (fine_points - 1) as f64;
        Ok(PatchConfig {
            length,
            patches,
            ratio,
            fine_points,
            macro_spacing,
            patch_width,
            fine_dx,
        })
    }

    /// The stock demonstration geometry: `L = 2π`, `m = 8`, `r = 1/10`, `n = 11`.
    pub fn default_demo() -> Self {
        PatchConfig::new(std::f64::consts::TAU, 8, rat(1, 10), 11).expect("valid defaults")
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Number of patches `m`.
    pub fn patches(&self) -> usize {
        self.patches
    }

    /// Fine points per patch `n`.
    pub fn fine_points(&self) -> usize {
        self.fine_points
    }

    /// Patch ratio `r = h/(2H)`.
    pub fn ratio(&self) -> &Rational {
        &self.ratio
    }

    /// Macroscopic grid spacing `H = L/m`.
    pub fn macro_spacing(&self) -> f64 {
        self.macro_spacing
    }

    /// Patch width `h = 2rH`.
    pub fn patch_width(&self) -> f64 {
        self.patch_width
    }

    /// Fine grid spacing `Δx = h/(n-1)`.
    pub fn fine_dx(&self) -> f64 {
        self.fine_dx
    }

    /// Patch centre `X_j = jH`.
    pub fn centre(&self, j: usize) -> f64 {
        j as f64 * self.macro_spacing
    }

    /// Position of fine point `i` in patch `j`.
    pub fn fine_x(&self, j: usize, i: usize) -> f64 {
        self.centre(j) - 0.5 * self.patch_width + i as f64 * self.fine_dx
    }

    /// Total degrees of freedom `m·n`.
    pub fn dof(&self) -> usize {
        self.patches * self.fine_points
    }
}

/// Microscale field on all patches at one instant, stored patch-major.
#[derive(Clone, Debug, PartialEq)]
pub struct MicroState {
    t: f64,
    patches: usize,
    fine_points: usize,
    v: Vec<f64>,
}

impl MicroState {
    /// Samples `f(x)` pointwise on every fine grid point at `t = 0`.
    pub fn sample(cfg: &PatchConfig, f: impl Fn(f64) -> f64) -> Self {
        let mut v = Vec::with_capacity(cfg.dof());
        for j in 0..cfg.patches() {
            for i in 0..cfg.fine_points() {
                v.push(f(cfg.fine_x(j, i)));
            }
        }
        MicroState {
            t: 0.0,
            patches: cfg.patches(),
            fine_points: cfg.fine_points(),
            v,
        }
    }

    pub fn zeros(cfg: &PatchConfig) -> Self {
        MicroState::sample(cfg, |_| 0.0)
    }

    /// Wraps a flat patch-major vector of length `m·n`.
    pub fn from_flat(cfg: &PatchConfig, t: f64, v: Vec<f64>) -> Self {
        assert_eq!(v.len(), cfg.dof(), "flat state length mismatch");
        MicroState {
            t,
            patches: cfg.patches(),
            fine_points: cfg.fine_points(),
            v,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn value(&self, j: usize, i: usize) -> f64 {
        self.v[j * self.fine_points + i]
    }

    pub fn values(&self) -> &[f64] {
        &self.v
    }

    /// Macroscopic grid values: the centre fine value of each patch.
    pub fn extract_macro(&self) -> Vec<f64> {
        let mid = (self.fine_points - 1) / 2;
        (0..self.patches).map(|j| self.value(j, mid)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.v.iter().all(|x| x.is_finite())
    }
}

/// Which dynamics the microscale solver integrates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ModelSpec {
    /// `u_t = u_xx`
    Diffusion,
    /// `u_t = u_xx - c u_x`
    AdvectionDiffusion { c: f64 },
    /// `u_t = u_xx - a·u·u_x` (non-conservative form)
    Burgers { advection: f64 },
}

impl ModelSpec {
    pub const BURGERS_DEFAULT_ADVECTION: f64 = 100.0;

    /// Burgers' dynamics with the default advection strength 100.
    pub fn burgers() -> Self {
        ModelSpec::Burgers {
            advection: Self::BURGERS_DEFAULT_ADVECTION,
        }
    }

    pub fn is_linear(&self) -> bool {
        !matches!(self, ModelSpec::Burgers { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Diffusion => "diffusion",
            ModelSpec::AdvectionDiffusion { .. } => "advection-diffusion",
            ModelSpec::Burgers { .. } => "burgers",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeScheme {
    Euler,
    Rk4,
}

impl TimeScheme {
    /// Diffusive stability limit as a multiple of `Δx²` (unit diffusivity):
    /// `Δt ≤ factor·Δx²`.
    pub fn diffusive_stability_factor(self) -> f64 {
        match self {
            // λ_max ≈ -4/Δx²; Euler needs |1 + Δtλ| ≤ 1, RK4 reaches -2.785.
            TimeScheme::Euler => 0.5,
            TimeScheme::Rk4 => 2.785 / 4.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TimeScheme::Euler => "euler",
            TimeScheme::Rk4 => "rk4",
        }
    }
}

/// Ghost values just outside each patch edge, `(g_left, g_right)` per patch.
///
/// With `G± = H∂x v` at the edge from the stencils, the ghost one fine
/// spacing outside satisfies the centred-difference flux condition at the
/// edge point: `g_right = v[n-2] + 2Δx·G⁺/H`, `g_left = v[1] - 2Δx·G⁻/H`.
pub fn ghost_values(
    state: &MicroState,
    cfg: &PatchConfig,
    pair: &StencilPair,
    macro_u: &[f64],
) -> Result<Vec<(f64, f64)>, SimError> {
    let n = cfg.fine_points();
    let scale = 2.0 * cfg.fine_dx() / cfg.macro_spacing();
    let mut out = Vec::with_capacity(cfg.patches());
    for j in 0..cfg.patches() {
        let g_plus = pair.plus.eval_edge_gradient(macro_u, j)?;
        let g_minus = pair.minus.eval_edge_gradient(macro_u, j)?;
        let right = state.value(j, n - 2) + scale * g_plus;
        let left = state.value(j, 1) - scale * g_minus;
        out.push((left, right));
    }
    Ok(out)
}

/// Time derivative of the full microscale field.
///
/// Interior points use centred second/first differences; the edge points use
/// the ghost closure. Fails on non-finite state values.
pub fn rhs(
    state: &MicroState,
    cfg: &PatchConfig,
    model: &ModelSpec,
    pair: &StencilPair,
) -> Result<Vec<f64>, SimError> {
    if !state.all_finite() {
        return Err(SimError::NonFinite(state.t()));
    }
    let macro_u = state.extract_macro();
    let ghosts = ghost_values(state, cfg, pair, &macro_u)?;
    let n = cfg.fine_points();
    let inv_dx2 = 1.0 / (cfg.fine_dx() * cfg.fine_dx());
    let inv_2dx = 0.5 / cfg.fine_dx();
    let mut out = vec![0.0; cfg.dof()];
    for j in 0..cfg.patches() {
        let (g_left, g_right) = ghosts[j];
        for i in 0..n {
            let centre = state.value(j, i);
            let left = if i == 0 { g_left } else { state.value(j, i - 1) };
            let right = if i == n - 1 { g_right } else { state.value(j, i + 1) };
            let uxx = (right - 2.0 * centre + left) * inv_dx2;
            let ux = (right - left) * inv_2dx;
            out[j * n + i] = match model {
                ModelSpec::Diffusion => uxx,
                ModelSpec::AdvectionDiffusion { c } => uxx - c * ux,
                ModelSpec::Burgers { advection } => uxx - advection * centre * ux,
            };
        }
    }
    Ok(out)
}

/// One explicit time step; the state is consumed only by value semantics
/// (pure in, pure out).
pub fn step(
    state: &MicroState,
    cfg: &PatchConfig,
    model: &ModelSpec,
    pair: &StencilPair,
    dt: f64,
    scheme: TimeScheme,
) -> Result<MicroState, SimError> {
    let advanced = |base: &MicroState, k: &[f64], factor: f64| -> MicroState {
        let v = base
            .values()
            .iter()
            .zip(k)
            .map(|(x, dx)| x + factor * dx)
            .collect();
        MicroState::from_flat(cfg, base.t(), v)
    };
    let mut next = match scheme {
        TimeScheme::Euler => {
            let k1 = rhs(state, cfg, model, pair)?;
            advanced(state, &k1, dt)
        }
        TimeScheme::Rk4 => {
            let k1 = rhs(state, cfg, model, pair)?;
            let s2 = advanced(state, &k1, 0.5 * dt);
            let k2 = rhs(&s2, cfg, model, pair)?;
            let s3 = advanced(state, &k2, 0.5 * dt);
            let k3 = rhs(&s3, cfg, model, pair)?;
            let s4 = advanced(state, &k3, dt);
            let k4 = rhs(&s4, cfg, model, pair)?;
            let v = state
                .values()
                .iter()
                .enumerate()
                .map(|(idx, x)| x + dt / 6.0 * (k1[idx] + 2.0 * k2[idx] + 2.0 * k3[idx] + k4[idx]))
                .collect();
            MicroState::from_flat(cfg, state.t(), v)
        }
    };
    next.t = state.t() + dt;
    Ok(next)
}

#[derive(Clone, Copy, Debug)]
pub struct IntegrateOptions {
    /// Abort when `max|v|` exceeds this cap.
    pub blowup_cap: f64,
    /// Skip the diffusive CFL precondition check.
    pub allow_unstable: bool,
    /// Number of states recorded, evenly spread over `[0, t_end]` including
    /// both endpoints (minimum 2 whenever at least one step is taken).
    pub snapshots: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            blowup_cap: 1e6,
            allow_unstable: false,
            snapshots: 5,
        }
    }
}

/// Recorded states at the requested output times.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub snapshots: Vec<MicroState>,
}

impl Trajectory {
    pub fn last(&self) -> &MicroState {
        self.snapshots.last().expect("trajectory holds at least the initial state")
    }
}

/// Integrates from `state0` to `t_end` in steps of `dt` (the horizon is
/// rounded to a whole number of steps).
#[allow(clippy::too_many_arguments)]
pub fn integrate(
    state0: &MicroState,
    cfg: &PatchConfig,
    model: &ModelSpec,
    pair: &StencilPair,
    dt: f64,
    t_end: f64,
    scheme: TimeScheme,
    opts: &IntegrateOptions,
) -> Result<Trajectory, SimError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(SimError::BadTimeStep(dt));
    }
    let bound = scheme.diffusive_stability_factor() * cfg.fine_dx() * cfg.fine_dx();
    if dt > bound && !opts.allow_unstable {
        return Err(SimError::UnstableTimeStep { dt, bound });
    }
    let steps = (t_end / dt).round().max(0.0) as usize;
    let wanted = opts.snapshots.max(1);
    let snapshot_step = |k: usize| -> usize {
        if wanted <= 1 || steps == 0 {
            steps
        } else {
            ((k as f64 / (wanted - 1) as f64) * steps as f64).round() as usize
        }
    };
    let mut record: Vec<usize> = (0..wanted).map(snapshot_step).collect();
    record.dedup();

    let mut snapshots = Vec::with_capacity(record.len());
    let mut state = state0.clone();
    let mut next_record = 0;
    for s in 0..=steps {
        if next_record < record.len() && record[next_record] == s {
            snapshots.push(state.clone());
            next_record += 1;
        }
        if s == steps {
            break;
        }
        state = step(&state, cfg, model, pair, dt, scheme)?;
        if !state.all_finite() {
            return Err(SimError::NonFinite(state.t()));
        }
        let max = state.max_abs();
        if max > opts.blowup_cap {
            return Err(SimError::BlowUp {
                t: state.t(),
                max,
                cap: opts.blowup_cap,
            });
        }
    }
    Ok(Trajectory { snapshots })
}

/// Stock initial conditions shared by the CLI and the test suites.
pub mod initial {
    /// Burgers demonstration field: a broad hump near `x = 4` and a short
    /// ripple near `x = 1` riding a positive mean flow. Gentle enough that
    /// the strong advection does not sharpen it below what the macroscopic
    /// grid can represent over the demonstration horizon.
    pub fn burgers_demo(x: f64) -> f64 {
        0.35 + 0.05 * (x - 4.0).cos() + 0.02 * (2.0 * (x - 1.0)).cos()
    }

    /// Steeper field whose fronts outrun the macroscopic resolution under
    /// strong advection; exercises the blow-up diagnostics.
    pub fn steep_front(x: f64) -> f64 {
        0.3 + 0.25 * x.sin() + 0.2 * (2.0 * x).cos()
    }

    pub fn cosine(x: f64) -> f64 {
        x.cos()
    }

    pub fn sine(x: f64) -> f64 {
        x.sin()
    }

    pub fn zero(_x: f64) -> f64 {
        0.0
    }
}

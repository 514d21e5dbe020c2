//! Gap-tooth multiscale simulation on coupled patches.
//!
//! A macroscopic field on a periodic domain is simulated by running a
//! microscale solver only inside `m` small patches ("teeth") of width `h`
//! centred on macroscopic grid points spaced `H` apart. The patches are
//! coupled through flux boundary conditions interpolated from the
//! macroscopic grid values, derived here to arbitrary even order by exact
//! operator calculus.
//!
//! Module map:
//!
//! * [`opcalc`] — exact series calculus over the discrete mean/difference
//!   operators; derives the edge-derivative expansion symbolically.
//! * [`ptbc`] — numeric boundary-condition stencils obtained from the
//!   symbolic series, with polynomial-exactness validation.
//! * [`microsim`] — method-of-lines solver on the patch array (diffusion,
//!   advection–diffusion, Burgers).
//! * [`spectra`] — one-microstep map assembly, eigenvalue/growth-rate
//!   analysis and convergence fits.
//! * [`refmodel`] — classical high-order periodic discretisation used as an
//!   independent oracle for the slow spectrum.

pub mod eig;
pub mod microsim;
pub mod opcalc;
pub mod ptbc;
pub mod refmodel;
pub mod spectra;

pub use num_complex::Complex64;

pub use microsim::{IntegrateOptions, MicroState, ModelSpec, PatchConfig, SimError, TimeScheme, Trajectory};
pub use opcalc::{DeltaSeries, EdgeSign, RPoly, Rational, SeriesError};
pub use ptbc::{PtbcStencil, StencilError, StencilPair};
pub use refmodel::{MacroOperator, RefmodelError};
pub use spectra::{OneStepMap, Spectrum, SpectraError, TableRow};

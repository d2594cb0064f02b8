//! Spectral theory of rank-one perturbations of self-adjoint operators.
//!
//! A cyclic self-adjoint operator with spectral measure `μ` and its rank-one
//! perturbations `A + λ(·, φ)φ` are studied entirely through analytic
//! transforms of finite atomic measures:
//!
//! * [`measures`]: finite atomic measures on the extended real line.
//! * [`transforms`]: Cauchy / Poisson / conjugate-Poisson transforms,
//!   vertical boundary limits, principal values and Stieltjes inversion.
//! * [`rank_one`]: the resolvent formula, the coupling ↔ circle map, the
//!   characteristic function and the Clark-family atom test.
//! * [`phase_shift`]: the Krein spectral shift, its exact inversion into a
//!   pair of measures, and the pointwise atom / singular-support criteria.
//! * [`constructions`]: well-mixed spectra, the two-spectra examples, porous
//!   sets, the staged refinement producing continuous spectrum, and the
//!   Cantor family without mixed spectrum.
//! * [`matrix_oracle`]: a dense-matrix ground truth for all of the above.
//!
//! The `cli` module backs the `spectral-shift` binary; see `examples/` for
//! one runnable program per capability.

pub mod cli;
pub mod constructions;
pub mod error;
pub mod io;
pub mod matrix_oracle;
pub mod measures;
pub mod phase_shift;
mod piecewise;
pub mod rank_one;
pub mod roots;
pub mod transforms;

pub use error::{Error, Result};
pub use measures::{Atom, AtomicMeasure, ExtendedReal, Interval, IntervalSet};
pub use phase_shift::{MeasurePair, PhaseShift, ShiftSign};
pub use rank_one::{CharFunction, CircleParam, Coupling, SpectralVerdict};
pub use transforms::{BoundaryLimitResult, LimitConfig, LimitKind, PvResult, UpperHalfPlanePoint};

/// Complex numbers used throughout.
pub type C64 = num_complex::Complex64;

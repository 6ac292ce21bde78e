//! Fourier pseudospectral computation of solitary-wave profiles of the
//! Rosenau and generalized BBM equations via the Petviashvili stabilized
//! fixed-point iteration.
//!
//! A traveling wave `u(x, t) = phi(x - ct)` of either equation satisfies
//! `L phi = g(phi)`, where `L` is a positive Fourier multiplier for wave
//! speeds `c > 1` and `g` is a power nonlinearity. The [`solver`] module
//! iterates this relation in Fourier space with a stabilizing factor that
//! pins the amplitude; [`models`] holds the dispersion symbols and
//! nonlinearities (plus closed-form reference objects), [`guesses`] the
//! starting functions, [`analysis`] the experiment drivers, and [`io`] the
//! plain-text persistence used by the command-line front end.
//!
//! ```no_run
//! use std::sync::Arc;
//! use solwave::{
//!     solve, sample_guess, DispersionSymbol, EquationSpec, Grid, GuessSpec,
//!     Nonlinearity, SolverConfig, SymbolKind,
//! };
//!
//! let grid = Arc::new(Grid::new(15.0, 0.05)?);
//! let guess = sample_guess(&GuessSpec::Gaussian, &grid)?;
//! let eq = EquationSpec::new(
//!     DispersionSymbol::new(SymbolKind::Rosenau, 1.8)?,
//!     Nonlinearity::SinglePower { p: 1 },
//! );
//! let result = solve(&eq, &guess, &SolverConfig::default())?;
//! assert!(result.converged());
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod analysis;
pub mod guesses;
pub mod io;
pub mod models;
pub mod solver;
pub mod spectral;

pub use analysis::{
    align_to_peak, amplitude, bbm_closed_form_amplitude, find_gamma_threshold, sweep_gamma,
    sweep_p, tail_analysis, AnalysisError, SweepResult, TailAnalysis,
};
pub use guesses::{sample_guess, GuessError, GuessSpec};
pub use models::{
    rosenau_kernel, DispersionSymbol, EquationSpec, ExactBbmWave, ModelError, Nonlinearity,
    SymbolKind,
};
pub use solver::{
    petviashvili_step_double, petviashvili_step_single, residual_error, residual_from_modal,
    solve, IterationRecord, SolveResult, SolveStatus, SolverConfig, SolverError,
};
pub use spectral::{
    forward, forward_with, inner_product, inverse, trapezoid, Field, Grid, GridError, ModalField,
    TransformConvention,
};

pub use rustfft::num_complex::Complex64;

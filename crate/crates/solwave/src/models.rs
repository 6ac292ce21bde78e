//! Equation catalog: dispersion symbols, nonlinearities, and closed-form
//! reference objects (the exact BBM solitary wave and the Green's-function
//! kernel of `1 + d^4/dx^4`).
//!
//! A traveling-wave profile `phi(x - ct)` of either equation satisfies
//! `L phi = g(phi)` with `L` the Fourier multiplier `l(xi)`:
//!
//! * Rosenau: `l(xi) = c xi^4 + c - 1`
//! * BBM:     `l(xi) = c xi^2 + c - 1`
//!
//! Both require `c > 1`, which makes `l` strictly positive and `L`
//! invertible.

use std::sync::Arc;

use thiserror::Error;

use crate::spectral::{Field, Grid, GridError};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("wave speed must exceed 1 for an invertible operator, got c = {c}")]
    InvalidSpeed { c: f64 },
    #[error("single-power nonlinearity needs p >= 1, got p = {p}")]
    InvalidPower { p: u32 },
    #[error("cubic-quintic coefficient must be finite, got gamma = {gamma}")]
    InvalidGamma { gamma: f64 },
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Which linear dispersion operator the profile equation carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    /// Fifth-order mixed dispersion, symbol `c xi^4 + c - 1`.
    Rosenau,
    /// Regularized long-wave dispersion, symbol `c xi^2 + c - 1`.
    Bbm,
}

/// Dispersion symbol `l(xi)` for a fixed wave speed `c > 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionSymbol {
    kind: SymbolKind,
    wave_speed: f64,
}

impl DispersionSymbol {
    pub fn new(kind: SymbolKind, wave_speed: f64) -> Result<Self, ModelError> {
        // l(0) = c - 1 is the minimum over all xi for both kinds.
        if wave_speed <= 1.0 || wave_speed.is_nan() {
            return Err(ModelError::InvalidSpeed { c: wave_speed });
        }
        Ok(Self { kind, wave_speed })
    }

    pub fn kind(&self) -> SymbolKind {
        self.kind
    }

    pub fn wave_speed(&self) -> f64 {
        self.wave_speed
    }

    pub fn evaluate(&self, xi: f64) -> f64 {
        let c = self.wave_speed;
        match self.kind {
            SymbolKind::Rosenau => c * xi.powi(4) + c - 1.0,
            SymbolKind::Bbm => c * xi * xi + c - 1.0,
        }
    }

    /// `l(xi_k)` for every grid wavenumber, in modal order. All entries are
    /// at least `c - 1 > 0`.
    pub fn values(&self, grid: &Grid) -> Vec<f64> {
        grid.wavenumbers().iter().map(|&xi| self.evaluate(xi)).collect()
    }
}

/// Right-hand side `g(u)` of the profile equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Nonlinearity {
    /// `g(u) = u^{p+1} / (p+1)`.
    SinglePower { p: u32 },
    /// `g(u) = u^3/3 + gamma u^5/5`.
    CubicQuintic { gamma: f64 },
}

impl Nonlinearity {
    pub fn validate(&self) -> Result<(), ModelError> {
        match *self {
            Nonlinearity::SinglePower { p } if p < 1 => Err(ModelError::InvalidPower { p }),
            Nonlinearity::CubicQuintic { gamma } if !gamma.is_finite() => {
                Err(ModelError::InvalidGamma { gamma })
            }
            _ => Ok(()),
        }
    }

    pub fn evaluate(&self, u: f64) -> f64 {
        match *self {
            Nonlinearity::SinglePower { p } => u.powi(p as i32 + 1) / (p as f64 + 1.0),
            Nonlinearity::CubicQuintic { gamma } => {
                let u3 = u * u * u;
                u3 / 3.0 + gamma * u3 * u * u / 5.0
            }
        }
    }

    /// Pointwise `g(f)`.
    pub fn apply(&self, f: &Field) -> Field {
        let values = f.values().iter().map(|&v| self.evaluate(v)).collect();
        Field::new(Arc::clone(f.grid()), values)
            .expect("pointwise map of a finite field stays well-formed")
    }
}

/// A dispersion symbol paired with a nonlinearity; the full profile
/// equation `L phi = g(phi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquationSpec {
    pub dispersion: DispersionSymbol,
    pub nonlinearity: Nonlinearity,
}

impl EquationSpec {
    pub fn new(dispersion: DispersionSymbol, nonlinearity: Nonlinearity) -> Self {
        Self {
            dispersion,
            nonlinearity,
        }
    }
}

/// The closed-form BBM solitary wave
/// `A (sech^2(B (x - x0)))^{1/p}` at `t = 0`, with
/// `A = ((p+1)(p+2)(c-1)/2)^{1/p}` and `B = (p/2) sqrt(1 - 1/c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactBbmWave {
    amplitude: f64,
    width: f64,
    wave_speed: f64,
    center: f64,
    power: u32,
}

impl ExactBbmWave {
    pub fn new(p: u32, c: f64, center: f64) -> Result<Self, ModelError> {
        if c <= 1.0 || c.is_nan() {
            return Err(ModelError::InvalidSpeed { c });
        }
        if p < 1 {
            return Err(ModelError::InvalidPower { p });
        }
        let pf = p as f64;
        let amplitude = ((pf + 1.0) * (pf + 2.0) * (c - 1.0) / 2.0).powf(1.0 / pf);
        let width = pf / 2.0 * (1.0 - 1.0 / c).sqrt();
        Ok(Self {
            amplitude,
            width,
            wave_speed: c,
            center,
            power: p,
        })
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn wave_speed(&self) -> f64 {
        self.wave_speed
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        let sech = 1.0 / (self.width * (x - self.center)).cosh();
        self.amplitude * (sech * sech).powf(1.0 / self.power as f64)
    }

    pub fn sample(&self, grid: Arc<Grid>) -> Field {
        Field::sample(grid, |x| self.evaluate(x))
            .expect("closed-form wave is finite everywhere")
    }
}

/// Green's function of `1 + d^4/dx^4`:
/// `beta(x) = e^{-|x|/sqrt(2)} (cos(|x|/sqrt(2)) + sin(|x|/sqrt(2))) / (2 sqrt(2))`.
pub fn rosenau_kernel(x: f64) -> f64 {
    let s = x.abs() / std::f64::consts::SQRT_2;
    (-s).exp() * (s.cos() + s.sin()) / (2.0 * std::f64::consts::SQRT_2)
}

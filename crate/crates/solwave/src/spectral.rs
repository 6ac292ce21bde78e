//! Uniform periodic grid, discrete Fourier transforms, and modal quadrature.
//!
//! Everything downstream (equation symbols, the iteration engine, the
//! experiment drivers) runs on top of this module. The domain is the
//! symmetric interval `[-L, L)` discretized by `2N` equally spaced points
//! `x_j = (j - N) h` with `h = L/N`. Wavenumbers are the physical ones,
//! `xi_k = (pi/L) m_k`, where `m_k` runs through the standard FFT modal
//! ordering `0, 1, ..., N, -(N-1), ..., -1` (the Nyquist mode appears once,
//! with positive sign).
//!
//! Transform convention: the forward transform is the plain unnormalized
//! DFT sum and the inverse carries the `1/2N` factor. All solver-level
//! quantities are ratios of modal integrals, so any global rescaling of
//! this convention cancels; [`TransformConvention::ContinuumScaled`] exposes
//! a second convention so that tests can assert that invariance.

use std::cell::RefCell;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use thiserror::Error;

/// Absolute bound on the imaginary residue tolerated when an inverse
/// transform is collapsed to a real field.
pub const IMAG_RESIDUE_LIMIT: f64 = 1e-8;

/// Relative tolerance for the `L/h` divisibility check in [`Grid::new`].
const DIVISIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("half-length {half_length} is not an integer multiple of spacing {spacing}")]
    NonDivisible { half_length: f64, spacing: f64 },
    #[error("grid needs at least 2 intervals per half-domain, got N = {n}")]
    TooFewPoints { n: usize },
    #[error("array length {got} does not match the grid's {expected} points")]
    LengthMismatch { expected: usize, got: usize },
    #[error("imaginary residue {residue:e} after inverse transform exceeds {IMAG_RESIDUE_LIMIT:e}")]
    ImaginaryResidueTooLarge { residue: f64 },
    #[error("field contains a non-finite value at index {index}")]
    NonFiniteValue { index: usize },
    #[error("grids do not match (different discretizations)")]
    GridMismatch,
}

/// Uniform discretization of `[-L, L)` together with its wavenumbers.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    half_length: f64,
    spacing: f64,
    points: Vec<f64>,
    wavenumbers: Vec<f64>,
}

impl Grid {
    /// Builds the grid for half-length `L` and spacing `h`. `L/h` must be an
    /// integer `N >= 2` within a relative tolerance of `1e-9`.
    pub fn new(half_length: f64, spacing: f64) -> Result<Self, GridError> {
        if !half_length.is_finite() || !spacing.is_finite() || half_length <= 0.0 || spacing <= 0.0 {
            return Err(GridError::NonDivisible {
                half_length,
                spacing,
            });
        }
        let ratio = half_length / spacing;
        let n = ratio.round();
        if (ratio - n).abs() > DIVISIBILITY_TOL * n.max(1.0) {
            return Err(GridError::NonDivisible {
                half_length,
                spacing,
            });
        }
        let n = n as usize;
        if n < 2 {
            return Err(GridError::TooFewPoints { n });
        }
        let points: Vec<f64> = (0..2 * n)
            .map(|j| (j as f64 - n as f64) * spacing)
            .collect();
        // Modal ordering 0..N, -(N-1)..-1 scaled to physical wavenumbers.
        let scale = std::f64::consts::PI / half_length;
        let wavenumbers: Vec<f64> = (0..2 * n)
            .map(|k| {
                let m = if k <= n { k as i64 } else { k as i64 - 2 * n as i64 };
                scale * m as f64
            })
            .collect();
        Ok(Self {
            half_length,
            spacing,
            points,
            wavenumbers,
        })
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Number of grid points, `2N`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Wavenumbers in FFT modal order (matching [`forward`] output).
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Index of the grid point at `x = 0`.
    pub fn origin_index(&self) -> usize {
        self.points.len() / 2
    }

    /// Wavenumber spacing `pi/L`.
    pub fn wavenumber_spacing(&self) -> f64 {
        std::f64::consts::PI / self.half_length
    }
}

/// Real-valued samples of a function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl Field {
    /// Wraps sample values; the length must match the grid and every value
    /// must be finite.
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFiniteValue { index });
        }
        Ok(Self { grid, values })
    }

    /// Samples `f(x)` at every grid point.
    pub fn sample<F: Fn(f64) -> f64>(grid: Arc<Grid>, f: F) -> Result<Self, GridError> {
        let values = grid.points().iter().map(|&x| f(x)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Which global scaling the transform pair uses. The two conventions are
/// related by the constant factor `h`; every solver observable is invariant
/// under the choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TransformConvention {
    /// Unnormalized forward DFT, `1/2N` on the inverse.
    #[default]
    Standard,
    /// Forward scaled by `h` (approximates the line Fourier transform),
    /// inverse scaled by `1/h`.
    ContinuumScaled,
}

/// Complex modal coefficients of a [`Field`], tagged with the convention
/// that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalField {
    grid: Arc<Grid>,
    coeffs: Vec<Complex64>,
    convention: TransformConvention,
}

impl ModalField {
    pub fn new(
        grid: Arc<Grid>,
        coeffs: Vec<Complex64>,
        convention: TransformConvention,
    ) -> Result<Self, GridError> {
        if coeffs.len() != grid.len() {
            return Err(GridError::LengthMismatch {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        Ok(Self {
            grid,
            coeffs,
            convention,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn convention(&self) -> TransformConvention {
        self.convention
    }

    /// Multiplies each coefficient by the matching entry of a real symbol
    /// array (a Fourier multiplier).
    pub fn multiplied_by(&self, symbol: &[f64]) -> Result<ModalField, GridError> {
        if symbol.len() != self.coeffs.len() {
            return Err(GridError::LengthMismatch {
                expected: self.coeffs.len(),
                got: symbol.len(),
            });
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(symbol)
            .map(|(c, &s)| c * s)
            .collect();
        Ok(ModalField {
            grid: Arc::clone(&self.grid),
            coeffs,
            convention: self.convention,
        })
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_forward(buf: &mut [Complex64]) {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()).process(buf));
}

fn fft_inverse(buf: &mut [Complex64]) {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()).process(buf));
}

/// Forward transform under the default convention.
pub fn forward(field: &Field) -> ModalField {
    forward_with(field, TransformConvention::Standard)
}

/// Forward transform under an explicit convention.
pub fn forward_with(field: &Field, convention: TransformConvention) -> ModalField {
    let mut buf: Vec<Complex64> = field
        .values()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    fft_forward(&mut buf);
    if convention == TransformConvention::ContinuumScaled {
        let h = field.grid().spacing();
        for c in &mut buf {
            *c *= h;
        }
    }
    ModalField {
        grid: Arc::clone(field.grid()),
        coeffs: buf,
        convention,
    }
}

/// Inverse transform back to a real field. The imaginary residue left after
/// the inverse DFT must stay below [`IMAG_RESIDUE_LIMIT`] in magnitude; a
/// larger residue signals a non-conjugate-symmetric input (or a bug) and is
/// reported instead of silently discarded.
pub fn inverse(modal: &ModalField) -> Result<Field, GridError> {
    let mut buf = modal.coeffs.clone();
    fft_inverse(&mut buf);
    let mut scale = 1.0 / modal.grid.len() as f64;
    if modal.convention == TransformConvention::ContinuumScaled {
        scale /= modal.grid.spacing();
    }
    let mut residue = 0.0f64;
    let mut values = Vec::with_capacity(buf.len());
    for c in &buf {
        let v = c * scale;
        residue = residue.max(v.im.abs());
        values.push(v.re);
    }
    if residue > IMAG_RESIDUE_LIMIT {
        return Err(GridError::ImaginaryResidueTooLarge { residue });
    }
    Field::new(Arc::clone(&modal.grid), values)
}

/// Composite trapezoid of sampled values over a line segment:
/// `spacing * (y_0/2 + y_1 + ... + y_{M-1} + y_M/2)`.
pub fn trapezoid(values: &[Complex64], spacing: f64) -> Complex64 {
    match values {
        [] => Complex64::new(0.0, 0.0),
        [only] => *only * spacing,
        [first, mid @ .., last] => {
            let inner: Complex64 = mid.iter().sum();
            (inner + 0.5 * (first + last)) * spacing
        }
    }
}

/// Modal inner product `integral a(xi) conj(b(xi)) dxi`, approximated by the
/// trapezoid rule over the periodic wavenumber circle (uniform weights
/// `pi/L`). The periodic form keeps the discrete Parseval identity exact,
/// which in turn makes stabilizing-factor ratios independent of the
/// transform convention.
pub fn inner_product(a: &ModalField, b: &ModalField) -> Result<Complex64, GridError> {
    if a.grid.len() != b.grid.len() {
        return Err(GridError::LengthMismatch {
            expected: a.grid.len(),
            got: b.grid.len(),
        });
    }
    Ok(inner_product_slices(
        &a.coeffs,
        &b.coeffs,
        a.grid.wavenumber_spacing(),
    ))
}

/// Slice-level form of [`inner_product`] for callers that already hold raw
/// coefficient arrays with a known wavenumber spacing.
pub fn inner_product_slices(a: &[Complex64], b: &[Complex64], dxi: f64) -> Complex64 {
    let sum: Complex64 = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
    sum * dxi
}

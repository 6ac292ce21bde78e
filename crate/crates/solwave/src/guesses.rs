//! Starting functions for the iteration.
//!
//! Three analytic guesses (a Gaussian, a nonsmooth symmetric exponential,
//! and an asymmetric triangle) plus a file-backed guess for warm-starting
//! parameter sweeps from a previously saved profile.

use std::path::PathBuf;
use std::sync::Arc;

use thiserror::Error;

use crate::io::{read_profile, ProfileError};
use crate::spectral::{Field, Grid};

#[derive(Debug, Error)]
pub enum GuessError {
    #[error("profile file has {got} samples but the grid has {expected}")]
    FileLengthMismatch { expected: usize, got: usize },
    #[error("could not read guess profile: {0}")]
    FileUnreadable(#[from] ProfileError),
}

/// Catalog of starting functions.
#[derive(Debug, Clone, PartialEq)]
pub enum GuessSpec {
    /// `exp(-x^2)`.
    Gaussian,
    /// `exp(-|x|)`; continuous but not differentiable at the origin.
    NonsmoothExponential,
    /// `x/3 + 2` on `[-6, -3]`, `-x/9 + 2/3` on `(-3, 6]`, zero elsewhere.
    AsymmetricTriangle,
    /// Values loaded from a saved profile; the sample count must match the
    /// target grid.
    FromFile(PathBuf),
}

fn triangle(x: f64) -> f64 {
    if (-6.0..=-3.0).contains(&x) {
        x / 3.0 + 2.0
    } else if x > -3.0 && x <= 6.0 {
        -x / 9.0 + 2.0 / 3.0
    } else {
        0.0
    }
}

/// Samples the chosen guess on `grid`.
pub fn sample_guess(spec: &GuessSpec, grid: &Arc<Grid>) -> Result<Field, GuessError> {
    let field = match spec {
        GuessSpec::Gaussian => Field::sample(Arc::clone(grid), |x| (-x * x).exp()),
        GuessSpec::NonsmoothExponential => Field::sample(Arc::clone(grid), |x| (-x.abs()).exp()),
        GuessSpec::AsymmetricTriangle => Field::sample(Arc::clone(grid), triangle),
        GuessSpec::FromFile(path) => {
            let loaded = read_profile(path)?;
            if loaded.values().len() != grid.len() {
                return Err(GuessError::FileLengthMismatch {
                    expected: grid.len(),
                    got: loaded.values().len(),
                });
            }
            return Ok(Field::new(Arc::clone(grid), loaded.values().to_vec())
                .expect("length checked above, values finite by construction"));
        }
    };
    Ok(field.expect("analytic guesses are finite"))
}

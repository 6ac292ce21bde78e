//! Experiment drivers: amplitude sweeps, cross-guess comparisons, tail
//! structure measurement, and the convergence-threshold search in the
//! cubic-quintic coefficient.

use std::sync::Arc;

use thiserror::Error;

use crate::models::{
    DispersionSymbol, EquationSpec, ExactBbmWave, ModelError, Nonlinearity, SymbolKind,
};
use crate::solver::{solve, SolveResult, SolveStatus, SolverConfig, SolverError};
use crate::spectral::Field;

/// Samples with absolute value below this are treated as being at the
/// roundoff floor of a converged profile and excluded from tail fits.
pub const TAIL_FLOOR: f64 = 1e-13;
/// Width of the zone next to the periodic boundary excluded from tail
/// fits; the wrap of the opposite tail flattens the profile there.
const SEAM_MARGIN: f64 = 1.0;
/// Minimum number of grid points required beyond `tail_start`.
const MIN_TAIL_POINTS: usize = 40;
/// Final bracket width for the threshold bisection.
const THRESHOLD_RESOLUTION: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("profile has no usable peak (maximum attained at {count} points)")]
    FlatField { count: usize },
    #[error("bracket [{lo}, {hi}] does not split the convergence predicate: {detail}")]
    BadBracket { lo: f64, hi: f64, detail: String },
    #[error("tail region beyond {tail_start} holds only {points} grid points (need {MIN_TAIL_POINTS})")]
    TailTooShort { tail_start: f64, points: usize },
    #[error("every tail sample sits below {TAIL_FLOOR:e}; choose a smaller tail start")]
    TailBelowFloor,
    #[error("empty parameter list")]
    EmptySweep,
    #[error("closed-form amplitudes exist only for the BBM family")]
    ClosedFormUnavailable,
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Outcome of a one-parameter sweep. Amplitudes are present only for
/// converged points.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub parameters: Vec<f64>,
    pub amplitudes: Vec<Option<f64>>,
    pub statuses: Vec<SolveStatus>,
    pub iterations: Vec<usize>,
}

/// Peak value of a profile (its maximum over grid points). Agrees with the
/// value at the origin for centered profiles and is robust to shifts.
pub fn amplitude(profile: &Field) -> f64 {
    profile.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

/// Circularly shifts a profile by whole grid cells so that its peak sample
/// sits at `x = 0`. Ties are broken toward the smallest `x`; more than two
/// points at the exact maximum means there is no usable peak.
///
/// The shift is cell-quantized on purpose: no interpolation is invented,
/// so a residual sub-cell offset of up to half a spacing can remain.
pub fn align_to_peak(profile: &Field) -> Result<Field, AnalysisError> {
    let values = profile.values();
    let max = amplitude(profile);
    let ties = values.iter().filter(|&&v| v == max).count();
    if ties > 2 {
        return Err(AnalysisError::FlatField { count: ties });
    }
    let peak = values
        .iter()
        .position(|&v| v == max)
        .expect("max exists in a nonempty field");
    let n = values.len();
    let origin = profile.grid().origin_index();
    let shift = (peak + n - origin) % n;
    let mut rotated = values.to_vec();
    rotated.rotate_left(shift);
    Ok(Field::new(Arc::clone(profile.grid()), rotated)
        .expect("rotation preserves length and finiteness"))
}

/// Closed-form amplitude of the exact BBM solitary wave.
pub fn bbm_closed_form_amplitude(p: u32, c: f64) -> Result<f64, ModelError> {
    Ok(ExactBbmWave::new(p, c, 0.0)?.amplitude())
}

/// Amplitude of the solitary wave as a function of the nonlinearity degree
/// `p`. Each point is an independent solve from `guess`; a point that fails
/// to converge is recorded, never fatal. With `use_closed_form` (BBM only)
/// the amplitudes come from the exact formula instead of solves.
pub fn sweep_p(
    family: SymbolKind,
    p_values: &[u32],
    c: f64,
    config: &SolverConfig,
    guess: &Field,
    use_closed_form: bool,
) -> Result<SweepResult, AnalysisError> {
    if p_values.is_empty() {
        return Err(AnalysisError::EmptySweep);
    }
    if use_closed_form && family != SymbolKind::Bbm {
        return Err(AnalysisError::ClosedFormUnavailable);
    }
    let mut out = SweepResult {
        parameters: Vec::new(),
        amplitudes: Vec::new(),
        statuses: Vec::new(),
        iterations: Vec::new(),
    };
    for &p in p_values {
        out.parameters.push(p as f64);
        if use_closed_form {
            out.amplitudes.push(Some(bbm_closed_form_amplitude(p, c)?));
            out.statuses.push(SolveStatus::Converged);
            out.iterations.push(0);
            continue;
        }
        let eq = EquationSpec::new(
            DispersionSymbol::new(family, c)?,
            Nonlinearity::SinglePower { p },
        );
        let res = solve(&eq, guess, config)?;
        push_point(&mut out, &res);
    }
    Ok(out)
}

/// Amplitude of the cubic-quintic solitary wave as a function of `gamma`.
/// Points are independent cold-started solves; `gamma = 0` degenerates to
/// the single-power `p = 2` equation and is handled by the solver's
/// routing.
pub fn sweep_gamma(
    gamma_values: &[f64],
    c: f64,
    config: &SolverConfig,
    guess: &Field,
) -> Result<SweepResult, AnalysisError> {
    if gamma_values.is_empty() {
        return Err(AnalysisError::EmptySweep);
    }
    let mut out = SweepResult {
        parameters: Vec::new(),
        amplitudes: Vec::new(),
        statuses: Vec::new(),
        iterations: Vec::new(),
    };
    for &gamma in gamma_values {
        out.parameters.push(gamma);
        let eq = EquationSpec::new(
            DispersionSymbol::new(SymbolKind::Rosenau, c)?,
            Nonlinearity::CubicQuintic { gamma },
        );
        let res = solve(&eq, guess, config)?;
        push_point(&mut out, &res);
    }
    Ok(out)
}

fn push_point(out: &mut SweepResult, res: &SolveResult) {
    out.statuses.push(res.status);
    out.iterations.push(res.iterations());
    out.amplitudes.push(if res.converged() {
        Some(amplitude(&res.profile))
    } else {
        None
    });
}

/// Locates the cubic-quintic convergence threshold in `gamma` by bisecting
/// the convergence predicate over `bracket = (lo, hi)`. The solve must fail
/// at `lo` and converge at `hi` (both checked cold from `guess`).
///
/// Probes are warm-started from the profile of the nearest converged
/// probe above: near the threshold the solution amplitude grows and the
/// cold Gaussian basin shrinks to nothing, so continuation in `gamma` is
/// what makes the predicate track the actual solution branch rather than
/// the reach of one fixed guess.
pub fn find_gamma_threshold(
    c: f64,
    config: &SolverConfig,
    guess: &Field,
    bracket: (f64, f64),
) -> Result<f64, AnalysisError> {
    let (mut lo, mut hi) = bracket;
    if lo >= hi || lo.is_nan() || hi.is_nan() {
        return Err(AnalysisError::BadBracket {
            lo,
            hi,
            detail: "bracket is empty or reversed".into(),
        });
    }
    if hi - lo <= THRESHOLD_RESOLUTION {
        return Ok(0.5 * (lo + hi));
    }

    let solve_at = |gamma: f64, start: &Field| -> Result<SolveResult, AnalysisError> {
        let eq = EquationSpec::new(
            DispersionSymbol::new(SymbolKind::Rosenau, c)?,
            Nonlinearity::CubicQuintic { gamma },
        );
        Ok(solve(&eq, start, config)?)
    };

    let hi_res = solve_at(hi, guess)?;
    if !hi_res.converged() {
        return Err(AnalysisError::BadBracket {
            lo,
            hi,
            detail: format!("solve does not converge at the upper end ({})", hi_res.status),
        });
    }
    let lo_res = solve_at(lo, guess)?;
    if lo_res.converged() {
        return Err(AnalysisError::BadBracket {
            lo,
            hi,
            detail: "solve converges at the lower end as well".into(),
        });
    }

    let mut warm = hi_res.profile;
    while hi - lo > THRESHOLD_RESOLUTION {
        let mid = 0.5 * (lo + hi);
        let res = solve_at(mid, &warm)?;
        if res.converged() {
            hi = mid;
            warm = res.profile;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Measured structure of a profile's right tail.
#[derive(Debug, Clone, Copy)]
pub struct TailAnalysis {
    /// Exponential decay rate of the envelope, fitted by least squares on
    /// `log |psi|`.
    pub decay_rate: f64,
    /// Oscillation wavenumber estimated from the spacing of zero crossings;
    /// zero when the tail is monotone.
    pub oscillation_wavenumber: f64,
    /// `((c-1)/c)^{1/4}`, the magnitude scale of the characteristic roots
    /// `c0 (+-1 +- i)/sqrt(2)` of `c k^4 + c - 1 = 0`. Oscillatory tails
    /// decay like `exp(-c0 x / sqrt(2))` and oscillate at `c0 / sqrt(2)`.
    pub c0: f64,
    /// Number of sign changes beyond `tail_start`.
    pub sign_changes: usize,
}

/// Fits the tail of a converged localized profile over `x > tail_start`.
///
/// The envelope fit uses the local maxima of `|psi|` (the oscillation
/// crests) when at least two are available, and falls back to all samples
/// above the roundoff floor for monotone tails. The outermost
/// [`SEAM_MARGIN`] of the domain never enters the fit: the periodic wrap
/// of the opposite tail flattens the profile there.
pub fn tail_analysis(
    profile: &Field,
    c: f64,
    tail_start: f64,
) -> Result<TailAnalysis, AnalysisError> {
    let grid = profile.grid();
    let points = grid.points();
    let values = profile.values();

    let tail: Vec<(f64, f64)> = points
        .iter()
        .zip(values)
        .filter(|(&x, _)| x > tail_start)
        .map(|(&x, &v)| (x, v))
        .collect();
    if tail.len() < MIN_TAIL_POINTS {
        return Err(AnalysisError::TailTooShort {
            tail_start,
            points: tail.len(),
        });
    }

    let sign_changes = tail
        .windows(2)
        .filter(|w| w[0].1 * w[1].1 < 0.0)
        .count();

    // Zero-crossing spacing -> half period -> wavenumber.
    let crossings: Vec<f64> = tail
        .windows(2)
        .filter(|w| w[0].1 * w[1].1 < 0.0)
        .map(|w| 0.5 * (w[0].0 + w[1].0))
        .collect();
    let oscillation_wavenumber = if crossings.len() >= 2 {
        let gaps: f64 = crossings.windows(2).map(|w| w[1] - w[0]).sum();
        let mean_gap = gaps / (crossings.len() - 1) as f64;
        std::f64::consts::PI / mean_gap
    } else {
        0.0
    };

    let cutoff = grid.half_length() - SEAM_MARGIN;
    let fit_zone: Vec<(f64, f64)> = tail
        .iter()
        .filter(|(x, _)| *x <= cutoff)
        .map(|&(x, v)| (x, v.abs()))
        .collect();

    let crests: Vec<(f64, f64)> = fit_zone
        .windows(3)
        .filter(|w| w[1].1 > w[0].1 && w[1].1 > w[2].1 && w[1].1 > TAIL_FLOOR)
        .map(|w| w[1])
        .collect();
    let fit_points: Vec<(f64, f64)> = if crests.len() >= 2 {
        crests
    } else {
        fit_zone.into_iter().filter(|(_, a)| *a > TAIL_FLOOR).collect()
    };
    if fit_points.len() < 2 {
        return Err(AnalysisError::TailBelowFloor);
    }

    // Least-squares slope of log|psi| against x.
    let n = fit_points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, a) in &fit_points {
        let y = a.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);

    Ok(TailAnalysis {
        decay_rate: -slope,
        oscillation_wavenumber,
        c0: ((c - 1.0) / c).powf(0.25),
        sign_changes,
    })
}

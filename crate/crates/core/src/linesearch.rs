//! Armijo backtracking with safeguarded quadratic interpolation.

use thiserror::Error;

/// Sufficient decrease: `f_trial - f0 <= sigma1 * alpha * gtd`.
pub fn armijo_ok(f0: f64, f_trial: f64, alpha: f64, gtd: f64, sigma1: f64) -> bool {
    f_trial - f0 <= sigma1 * alpha * gtd
}

/// Curvature test with the step length on the right-hand side:
/// `g(x + alpha d)^T d >= sigma2 * alpha * g^T d`.
///
/// Only a predicate; the solvers use Armijo backtracking alone.
pub fn wolfe_ok(g_trial_td: f64, gtd: f64, alpha: f64, sigma2: f64) -> bool {
    g_trial_td >= sigma2 * alpha * gtd
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchResult {
    pub alpha: f64,
    pub f_new: f64,
    /// Objective evaluations spent, including the accepted one.
    pub evals: usize,
    pub backtracks: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum LineSearchError {
    #[error("not a descent direction (g'd = {gtd:e})")]
    NotDescent { gtd: f64 },
    #[error("no acceptable step after {backtracks} backtracks (alpha = {alpha:e})")]
    Exhausted { alpha: f64, evals: usize, backtracks: usize },
}

impl LineSearchError {
    pub fn evals(&self) -> usize {
        match self {
            LineSearchError::NotDescent { .. } => 0,
            LineSearchError::Exhausted { evals, .. } => *evals,
        }
    }
}

pub const MAX_BACKTRACKS: usize = 60;
pub const MIN_STEP: f64 = 1e-20;
/// Bounds on the interpolated step as fractions of the previous trial.
pub const SHRINK_LO: f64 = 0.1;
pub const SHRINK_HI: f64 = 0.5;

/// Minimizer of the quadratic through `(0, f0)` with slope `gtd` and
/// `(alpha, f_alpha)`, clamped to `[0.1, 0.5] * alpha`. A non-finite trial
/// value shrinks by the lower factor.
pub fn interpolate(f0: f64, gtd: f64, alpha: f64, f_alpha: f64) -> f64 {
    let lo = SHRINK_LO * alpha;
    let hi = SHRINK_HI * alpha;
    if !f_alpha.is_finite() {
        return lo;
    }
    let denom = 2.0 * (f_alpha - f0 - gtd * alpha);
    if !(denom > 0.0) {
        return hi;
    }
    let a = -gtd * alpha * alpha / denom;
    if a.is_nan() {
        lo
    } else {
        a.clamp(lo, hi)
    }
}

/// Backtracks from `alpha0` until the Armijo condition holds.
///
/// `phi(alpha)` evaluates `f(x + alpha d)`; it may return a non-finite value
/// for points outside the domain, which is treated as a rejected trial.
pub fn backtrack(
    mut phi: impl FnMut(f64) -> f64,
    f0: f64,
    gtd: f64,
    sigma1: f64,
    alpha0: f64,
) -> Result<LineSearchResult, LineSearchError> {
    if !(gtd < 0.0) {
        return Err(LineSearchError::NotDescent { gtd });
    }
    let mut alpha = alpha0;
    let mut evals = 0;
    let mut backtracks = 0;
    loop {
        let f = phi(alpha);
        evals += 1;
        if f.is_finite() && armijo_ok(f0, f, alpha, gtd, sigma1) {
            return Ok(LineSearchResult { alpha, f_new: f, evals, backtracks });
        }
        if backtracks == MAX_BACKTRACKS {
            return Err(LineSearchError::Exhausted { alpha, evals, backtracks });
        }
        let next = interpolate(f0, gtd, alpha, f);
        if next < MIN_STEP {
            return Err(LineSearchError::Exhausted { alpha: next, evals, backtracks });
        }
        alpha = next;
        backtracks += 1;
    }
}

//! Finite-difference gradient checks over the corpus and a logistic instance.

use std::sync::Arc;

use sdg_core::problems::{self, default_fd_step, fd_gradient_check, logistic_objective, probe_points, SharedObjective};

use crate::synth::{gaussian_clouds, SynthParams};
use crate::BenchError;

pub const GRADIENT_TOL: f64 = 1e-4;
pub const PROBE_COUNT: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeCheck {
    pub problem: String,
    /// Largest relative error over the default start and the probe points.
    pub max_error: f64,
    pub points: usize,
    pub passed: bool,
}

/// The corpus plus a small synthetic logistic problem.
pub fn checked_objectives() -> Vec<SharedObjective> {
    let mut out = problems::corpus();
    let data = gaussian_clouds(&SynthParams { rows: 60, features: 8, ..SynthParams::default() }, 7);
    out.push(Arc::new(logistic_objective(data, 1.0 / 60.0)));
    out
}

pub fn check_objective(obj: &SharedObjective, seed: u64) -> DerivativeCheck {
    let mut points = vec![obj.default_start()];
    points.extend(probe_points(obj.as_ref(), seed, PROBE_COUNT));
    let mut max_error = 0.0f64;
    let mut ok = true;
    for x in &points {
        match fd_gradient_check(obj.as_ref(), x.as_slice(), default_fd_step()) {
            Ok(e) if e.is_finite() => max_error = max_error.max(e),
            _ => ok = false,
        }
    }
    DerivativeCheck { problem: obj.name().to_string(), max_error, points: points.len(), passed: ok && max_error <= GRADIENT_TOL }
}

/// Checks every objective, or only the named one.
pub fn check_derivatives(only: Option<&str>, seed: u64) -> Result<Vec<DerivativeCheck>, BenchError> {
    let objs: Vec<SharedObjective> = checked_objectives().into_iter().filter(|o| only.is_none_or(|n| o.name() == n)).collect();
    if objs.is_empty() {
        return Err(BenchError::Config(format!("unknown problem {:?}", only.unwrap_or_default())));
    }
    Ok(objs.iter().map(|o| check_objective(o, seed)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_objectives_pass() {
        let res = check_derivatives(None, 42).unwrap();
        assert_eq!(res.len(), problems::corpus().len() + 1);
        for r in &res {
            assert!(r.passed, "{r:?}");
            assert_eq!(r.points, 6);
        }
    }

    #[test]
    fn single_and_unknown() {
        assert_eq!(check_derivatives(Some("logistic"), 1).unwrap().len(), 1);
        assert!(matches!(check_derivatives(Some("nope"), 1), Err(BenchError::Config(_))));
    }
}

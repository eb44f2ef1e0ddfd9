//! The ω-sweep on the scaled Brown badly scaled function.

use sdg_core::directions::EngineKind;
use sdg_core::problems::{brown_badly_scaled, scale_objective, ProblemInstance};
use sdg_core::sdg::{sdg_run, BetaRule, EpsilonSchedule, RunRecord, SolverOptions, Status, XiMode};

pub const OMEGAS: [f64; 7] = [1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3];

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Table1Row {
    pub omega: f64,
    pub its_bb2: usize,
    pub evals_bb2: usize,
    pub its_shi: usize,
    pub evals_shi: usize,
    pub bb2_converged: bool,
    pub shi_converged: bool,
}

/// Fixed angle threshold, exact β, no pure steepest-descent branch and no
/// clamping of the BB2 step. The gradient tolerance is `1e-5 * omega`.
pub fn table1_options(eps: f64, omega: f64, xi_mode: XiMode) -> SolverOptions {
    SolverOptions {
        eps0: eps,
        schedule: EpsilonSchedule::Fixed,
        beta_rule: BetaRule::Exact,
        xi_mode,
        pure_sd_on_ascent: false,
        nu1: f64::MIN_POSITIVE,
        nu2: f64::MAX,
        gtol_abs: Some(1e-5 * omega),
        engine: EngineKind::Newton,
        ..SolverOptions::default()
    }
}

pub fn table1_run(eps: f64, omega: f64, xi_mode: XiMode) -> RunRecord {
    let obj = scale_objective(brown_badly_scaled(), omega);
    sdg_run(&ProblemInstance::at_default_start(obj), &table1_options(eps, omega, xi_mode))
}

pub fn run_table1(eps: f64) -> Vec<Table1Row> {
    OMEGAS
        .iter()
        .map(|&omega| {
            let b = table1_run(eps, omega, XiMode::Bb2);
            let s = table1_run(eps, omega, XiMode::UnitShi);
            Table1Row {
                omega,
                its_bb2: b.iterations,
                evals_bb2: b.f_evals,
                its_shi: s.iterations,
                evals_shi: s.f_evals,
                bb2_converged: b.status == Status::Converged,
                shi_converged: s.status == Status::Converged,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Counts with the BB2 step are identical across ω and small.
pub fn check_invariance(rows: &[Table1Row]) -> Check {
    let first = rows[0];
    let same = rows.iter().all(|r| r.its_bb2 == first.its_bb2 && r.evals_bb2 == first.evals_bb2);
    let small = first.its_bb2 <= 20 && first.evals_bb2 <= 60;
    let conv = rows.iter().all(|r| r.bb2_converged);
    let counts: Vec<String> = rows.iter().map(|r| format!("{}/{}", r.its_bb2, r.evals_bb2)).collect();
    Check { name: "bb2 scale invariance", passed: same && small && conv, detail: format!("its/evals {}", counts.join(" ")) }
}

/// With `xi = 1` the work grows with ω: at least threefold between the
/// ends of the sweep, nondecreasing from ω = 1 with one inversion allowed.
pub fn check_shi_degradation(rows: &[Table1Row]) -> Check {
    let its: Vec<usize> = rows.iter().map(|r| r.its_shi).collect();
    let ratio_ok = its[its.len() - 1] >= 3 * its[0];
    let from_one: Vec<usize> = rows.iter().filter(|r| r.omega >= 1.0).map(|r| r.its_shi).collect();
    let inversions = from_one.windows(2).filter(|w| w[1] < w[0]).count();
    Check {
        name: "unit-xi degradation",
        passed: ratio_ok && inversions <= 1,
        detail: format!("its {its:?}, inversions from omega = 1: {inversions}"),
    }
}

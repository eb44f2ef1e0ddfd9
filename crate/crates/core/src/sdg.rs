//! The SDG driver: angle gate, combination coefficient and the main loop.

use alloc::vec::Vec;

use thiserror::Error;

use crate::directions::{bb2_safeguarded, Bb2State, DirectionEngine, EngineKind, StepContext, NU1, NU2};
use crate::linesearch::{backtrack, LineSearchError};
use crate::numerics::{cos_angle, dot, norm2, Vector};
use crate::problems::ProblemInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BetaRule {
    /// Smallest root of the angle polynomial.
    Exact,
    /// Closed-form lower bound `rho / (rho + pi)`.
    LowerBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XiMode {
    Bb2,
    /// `xi = 1` throughout (Shi's direction).
    UnitShi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpsilonSchedule {
    /// Shrink on every rejected NT direction, pure SD steps included.
    Shrinking,
    /// Shrink only after a combined step.
    ShrinkingCombinedOnly,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub eps0: f64,
    pub zeta: f64,
    pub eps_bar: f64,
    pub sigma1: f64,
    pub tau_g: f64,
    /// Absolute gradient threshold replacing `tau_g * ||g0||` when set.
    pub gtol_abs: Option<f64>,
    pub k_max: usize,
    pub nu1: f64,
    pub nu2: f64,
    pub beta_rule: BetaRule,
    pub xi_mode: XiMode,
    pub schedule: EpsilonSchedule,
    /// Take `-xi g` outright when the NT direction is not a descent
    /// direction; otherwise such directions are combined like any other.
    pub pure_sd_on_ascent: bool,
    pub engine: EngineKind,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            eps0: 0.5,
            zeta: 0.95,
            eps_bar: 10.0 * f64::EPSILON,
            sigma1: 1e-4,
            tau_g: 1e-5,
            gtol_abs: None,
            k_max: 2000,
            nu1: NU1,
            nu2: NU2,
            beta_rule: BetaRule::LowerBound,
            xi_mode: XiMode::Bb2,
            schedule: EpsilonSchedule::Shrinking,
            pure_sd_on_ascent: true,
            engine: EngineKind::Newton,
            seed: 0,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<(), &'static str> {
        if !(self.eps0 > 0.0 && self.eps0 < 1.0) {
            return Err("eps0 must lie in (0, 1)");
        }
        if !(self.zeta > 0.0 && self.zeta < 1.0) {
            return Err("zeta must lie in (0, 1)");
        }
        if !(self.sigma1 > 0.0 && self.sigma1 < 0.5) {
            return Err("sigma1 must lie in (0, 1/2)");
        }
        if !(self.eps_bar > 0.0 && self.eps_bar <= self.eps0) {
            return Err("eps_bar must lie in (0, eps0]");
        }
        if !(self.tau_g > 0.0 && self.tau_g < 1.0) {
            return Err("tau_g must lie in (0, 1)");
        }
        if !(self.nu1 > 0.0 && self.nu1 <= self.nu2) {
            return Err("need 0 < nu1 <= nu2");
        }
        if matches!(self.gtol_abs, Some(t) if !(t > 0.0)) {
            return Err("gtol_abs must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    MaxIter,
    Stuck,
    LineSearchFailed,
    SolveFailed,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Converged => "Converged",
            Status::MaxIter => "MaxIter",
            Status::Stuck => "Stuck",
            Status::LineSearchFailed => "LineSearchFailed",
            Status::SolveFailed => "SolveFailed",
        }
    }

    pub fn parse(s: &str) -> Option<Status> {
        [Status::Converged, Status::MaxIter, Status::Stuck, Status::LineSearchFailed, Status::SolveFailed]
            .into_iter()
            .find(|st| st.as_str() == s)
    }
}

impl core::fmt::Display for Status {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Nt,
    Combined,
    PureSd,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    /// 1 for NT, 0 for pure SD, the coefficient otherwise.
    pub beta: f64,
    pub kind: StepKind,
    pub eps: f64,
    pub alpha: f64,
    /// Objective and gradient norm at the start of the iteration.
    pub f: f64,
    pub gnorm: f64,
    /// `cos<d, -g>` of the direction actually used.
    pub cos: f64,
    pub xi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub iterations: usize,
    pub f_evals: usize,
    pub final_f: f64,
    pub final_gnorm: f64,
    pub g0_norm: f64,
    pub status: Status,
    pub final_x: Vector,
    pub trace: Vec<TraceEntry>,
    pub skipped_updates: usize,
    pub bb2_fallbacks: usize,
    /// Whether `eps` ever reached `eps_bar`.
    pub eps_floor_hit: bool,
}

impl RunRecord {
    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }
}

/// Inputs to the combination-coefficient formulas.
#[derive(Debug, Clone, Copy)]
pub struct BetaInputs<'a> {
    pub g: &'a [f64],
    pub d_nt: &'a [f64],
    pub xi: f64,
    pub eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum BetaError {
    #[error("NT direction already satisfies the angle criterion or inputs are degenerate")]
    ContractViolation,
}

/// Bisection tolerance on `beta`.
pub const BISECTION_TOL: f64 = 1e-12;
/// Accepted deviation `|phi(beta) - eps|` for the closed-form root.
pub const ROOT_CHECK_TOL: f64 = 1e-10;

struct Normalized {
    /// `cos<g, d>`, that is `g'd / (||g|| ||d||)`.
    c: f64,
    /// `xi ||g|| / ||d||`
    t: f64,
    eps: f64,
}

impl<'a> BetaInputs<'a> {
    fn check(&self) -> Result<Normalized, BetaError> {
        let gn = norm2(self.g);
        let dn = norm2(self.d_nt);
        let ok = gn > 0.0
            && dn > 0.0
            && gn.is_finite()
            && dn.is_finite()
            && self.xi > 0.0
            && self.eps > 0.0
            && self.eps < 1.0
            && -dot(self.g, self.d_nt) < self.eps * gn * dn;
        if !ok {
            return Err(BetaError::ContractViolation);
        }
        let c = cos_angle(self.g, self.d_nt).map_err(|_| BetaError::ContractViolation)?;
        Ok(Normalized { c, t: self.xi * gn / dn, eps: self.eps })
    }

    /// `cos<beta d - (1 - beta) xi g, -g>`.
    pub fn phi(&self, beta: f64) -> f64 {
        self.check().map(|n| n.phi(beta)).unwrap_or(f64::NAN)
    }
}

impl Normalized {
    // With unit g and d: w = beta d - (1 - beta) t g.
    fn phi(&self, beta: f64) -> f64 {
        let b = beta;
        let u = 1.0 - beta;
        let num = -b * self.c + u * self.t;
        let nrm2 = b * b + u * u * self.t * self.t - 2.0 * b * u * self.t * self.c;
        if nrm2 <= 0.0 {
            return 1.0;
        }
        (num / libm::sqrt(nrm2)).clamp(-1.0, 1.0)
    }

    fn coefficients(&self) -> (f64, f64, f64) {
        let (a, t, e2) = (self.c, self.t, self.eps * self.eps);
        let c = (1.0 - e2) * t * t;
        let b = -2.0 * (1.0 - e2) * t * (t + a);
        let aa = a * a - e2 - b - c;
        (aa, b, c)
    }

    // Runs past BISECTION_TOL down to adjacent floats: phi can be steep
    // near the root when d is almost parallel to g.
    fn bisect(&self) -> f64 {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.phi(mid) >= self.eps {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        debug_assert!(hi - lo <= BISECTION_TOL);
        if libm::fabs(self.phi(hi) - self.eps) < libm::fabs(self.phi(lo) - self.eps) {
            hi
        } else {
            lo
        }
    }
}

/// Coefficients `(A, B, C)` of the angle polynomial `P(beta)`.
pub fn angle_polynomial(inp: &BetaInputs<'_>) -> (f64, f64, f64) {
    let gn2 = dot(inp.g, inp.g);
    let dn2 = dot(inp.d_nt, inp.d_nt);
    let a = dot(inp.g, inp.d_nt);
    let e2 = inp.eps * inp.eps;
    let c = (1.0 - e2) * inp.xi * inp.xi * gn2 * gn2;
    let b = -2.0 * (1.0 - e2) * inp.xi * gn2 * (inp.xi * gn2 + a);
    let aa = a * a - e2 * gn2 * dn2 - b - c;
    (aa, b, c)
}

/// Largest `beta` for which the combined direction still satisfies the
/// angle criterion: the smallest root of `P` in `(0, 1)`.
pub fn beta_eps(inp: &BetaInputs<'_>) -> Result<f64, BetaError> {
    let n = inp.check()?;
    let (a, b, c) = n.coefficients();
    let disc = b * b - 4.0 * a * c;
    let mut best = f64::INFINITY;
    if disc >= 0.0 {
        let q = -0.5 * (b + libm::copysign(libm::sqrt(disc), b));
        let mut consider = |r: f64| {
            if r > 0.0 && r < 1.0 && r < best {
                best = r;
            }
        };
        if a != 0.0 {
            consider(q / a);
        }
        if q != 0.0 {
            consider(c / q);
        }
    }
    if best.is_finite() && libm::fabs(n.phi(best) - n.eps) <= ROOT_CHECK_TOL {
        Ok(best)
    } else {
        Ok(n.bisect())
    }
}

/// Closed-form lower bound `rho / (rho + pi)` on [`beta_eps`].
pub fn beta_hat(inp: &BetaInputs<'_>) -> Result<f64, BetaError> {
    inp.check()?;
    let gn = norm2(inp.g);
    let dn = norm2(inp.d_nt);
    let rho = inp.xi * (1.0 - inp.eps);
    let pi = dot(inp.g, inp.d_nt) / (gn * gn) + inp.eps * dn / gn;
    if !(pi > 0.0) {
        return Err(BetaError::ContractViolation);
    }
    Ok(rho / (rho + pi))
}

/// `beta * d_nt - (1 - beta) * xi * g`.
pub fn combine_direction(g: &[f64], d_nt: &[f64], xi: f64, beta: f64) -> Vector {
    assert!((0.0..=1.0).contains(&beta) && xi > 0.0);
    if beta == 1.0 {
        return Vector::from(d_nt);
    }
    Vector::from_fn(g.len(), |i| beta * d_nt[i] - (1.0 - beta) * xi * g[i])
}

/// `eps` for the next iteration.
pub fn epsilon_update(eps: f64, nt_accepted: bool, zeta: f64, eps_bar: f64) -> f64 {
    if nt_accepted {
        eps
    } else {
        f64::max(eps_bar, zeta * eps)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Gated,
    Plain,
}

/// SDG with the engine selected in `opts`.
pub fn sdg_run(instance: &ProblemInstance, opts: &SolverOptions) -> RunRecord {
    let mut engine = opts.engine.build(instance.start.len());
    drive(instance, engine.as_mut(), opts, Mode::Gated)
}

/// The same loop with the angle gate disabled: the engine's direction is
/// always used.
pub fn plain_run(instance: &ProblemInstance, engine: EngineKind, opts: &SolverOptions) -> RunRecord {
    let mut eng = engine.build(instance.start.len());
    drive(instance, eng.as_mut(), opts, Mode::Plain)
}

/// Runs either loop with a caller-supplied engine.
pub fn run_with_engine(instance: &ProblemInstance, engine: &mut dyn DirectionEngine, opts: &SolverOptions, gated: bool) -> RunRecord {
    drive(instance, engine, opts, if gated { Mode::Gated } else { Mode::Plain })
}

fn drive(instance: &ProblemInstance, engine: &mut dyn DirectionEngine, opts: &SolverOptions, mode: Mode) -> RunRecord {
    let obj = instance.objective.as_ref();
    let mut x = instance.start.clone();
    let mut trace = Vec::new();
    let mut evals = 1;
    let rec = |x: Vector, f: f64, gnorm: f64, g0: f64, its: usize, evals: usize, status: Status, trace: Vec<TraceEntry>| RunRecord {
        iterations: its,
        f_evals: evals,
        final_f: f,
        final_gnorm: gnorm,
        g0_norm: g0,
        status,
        final_x: x,
        trace,
        skipped_updates: 0,
        bb2_fallbacks: 0,
        eps_floor_hit: false,
    };

    let (mut f, mut g) = match (obj.value(&x), obj.gradient(&x)) {
        (Ok(f), Ok(g)) if f.is_finite() && g.is_finite() => (f, g),
        _ => return rec(x, f64::NAN, f64::NAN, f64::NAN, 0, evals, Status::LineSearchFailed, trace),
    };
    let g0 = g.norm();
    let gtol = opts.gtol_abs.unwrap_or(opts.tau_g * g0);
    if g0 == 0.0 {
        return rec(x, f, 0.0, 0.0, 0, evals, Status::Converged, trace);
    }

    let mut bb2 = Bb2State::start(g0);
    let mut last_pair: Option<(Vector, Vector)> = None;
    let mut eps = opts.eps0;
    let mut floor_hit = false;
    let mut k = 0;
    let mut gnorm = g0;

    let status = loop {
        if gnorm < gtol {
            break Status::Converged;
        }
        let xi = {
            let (xi, next) = bb2_safeguarded(
                &bb2,
                last_pair.as_ref().map(|(s, y)| (s.as_slice(), y.as_slice())),
                g0,
                opts.nu1,
                opts.nu2,
            );
            bb2 = next;
            match opts.xi_mode {
                XiMode::Bb2 => xi,
                XiMode::UnitShi => 1.0,
            }
        };
        let ctx = StepContext { objective: obj, x: x.as_slice(), g: &g, xi };
        let d_nt = engine.direction(&ctx).ok().filter(|d| d.is_finite() && d.norm() > 0.0);

        let (d, beta, kind) = match mode {
            Mode::Plain => match d_nt {
                Some(d) => (d, 1.0, StepKind::Nt),
                None => break Status::SolveFailed,
            },
            Mode::Gated => {
                let cos = d_nt.as_ref().and_then(|d| cos_angle(d, &g.scaled(-1.0)).ok());
                match (d_nt, cos) {
                    (Some(d), Some(c)) if c >= eps => (d, 1.0, StepKind::Nt),
                    (Some(d), Some(c)) if c > 0.0 || (!opts.pure_sd_on_ascent && c > -1.0) => {
                        let inp = BetaInputs { g: &g, d_nt: &d, xi, eps };
                        let beta = match opts.beta_rule {
                            BetaRule::Exact => beta_eps(&inp),
                            BetaRule::LowerBound => beta_hat(&inp),
                        };
                        match beta {
                            Ok(b) => (combine_direction(&g, &d, xi, b), b, StepKind::Combined),
                            Err(_) => (g.scaled(-xi), 0.0, StepKind::PureSd),
                        }
                    }
                    _ => (g.scaled(-xi), 0.0, StepKind::PureSd),
                }
            }
        };
        let cos_used = cos_angle(&d, &g.scaled(-1.0)).unwrap_or(f64::NAN);
        let eps_used = eps;
        if mode == Mode::Gated {
            let shrink = match opts.schedule {
                EpsilonSchedule::Fixed => false,
                EpsilonSchedule::Shrinking => kind != StepKind::Nt,
                EpsilonSchedule::ShrinkingCombinedOnly => kind == StepKind::Combined,
            };
            eps = epsilon_update(eps, !shrink, opts.zeta, opts.eps_bar);
            floor_hit |= eps <= opts.eps_bar;
        }

        let gtd = dot(&g, &d);
        let phi = |a: f64| {
            let xt = x.add_scaled(a, &d);
            obj.value(&xt).unwrap_or(f64::NAN)
        };
        let ls = backtrack(phi, f, gtd, opts.sigma1, 1.0);
        let (alpha, f_new) = match ls {
            Ok(r) => {
                evals += r.evals;
                (r.alpha, r.f_new)
            }
            Err(e) => {
                evals += e.evals();
                if let LineSearchError::NotDescent { .. } = e {
                    trace.push(TraceEntry { beta, kind, eps: eps_used, alpha: 0.0, f, gnorm, cos: cos_used, xi });
                }
                break Status::LineSearchFailed;
            }
        };
        trace.push(TraceEntry { beta, kind, eps: eps_used, alpha, f, gnorm, cos: cos_used, xi });

        let x_new = x.add_scaled(alpha, &d);
        let g_new = match obj.gradient(&x_new) {
            Ok(g) if g.is_finite() => g,
            _ => break Status::LineSearchFailed,
        };
        let s = x_new.sub(&x);
        let y = g_new.sub(&g);
        engine.update(&s, &y, &g);
        last_pair = Some((s, y));

        let f_old = f;
        x = x_new;
        g = g_new;
        f = f_new;
        gnorm = g.norm();
        k += 1;

        if gnorm < gtol {
            break Status::Converged;
        }
        if k > opts.k_max {
            break Status::MaxIter;
        }
        if libm::fabs(f_old - f) < opts.eps_bar * libm::fabs(f_old) {
            break Status::Stuck;
        }
    };

    let mut r = rec(x, f, gnorm, g0, k, evals, status, trace);
    r.skipped_updates = engine.skipped_updates();
    r.bb2_fallbacks = bb2.fallbacks;
    r.eps_floor_hit = floor_hit;
    r
}

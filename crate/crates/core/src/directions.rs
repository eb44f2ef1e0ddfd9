//! Newton-type directions and the BB2 step length.
//!
//! Free functions implement the individual formulas; the
//! [`DirectionEngine`] implementations wrap them with per-run state so a
//! solver can ask for "the next NT direction" without knowing which
//! method produces it.

use alloc::boxed::Box;

use thiserror::Error;

use crate::numerics::{cholesky, solve_symmetric, NumericsError, SymMatrix, Vector};
use crate::problems::{Objective, ProblemError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DirectionError {
    #[error("linear system is singular")]
    Singular,
    #[error("diagonal shift overflowed ({lambda:e})")]
    ShiftOverflow { lambda: f64 },
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

impl From<NumericsError> for DirectionError {
    fn from(_: NumericsError) -> Self {
        DirectionError::Singular
    }
}

/// Solves `H d = -g` with no positivity requirement on `H`.
pub fn newton_direction(h: &SymMatrix, g: &[f64]) -> Result<Vector, DirectionError> {
    let d = solve_symmetric(h, g)?.scaled(-1.0);
    if !d.is_finite() || d.norm() == 0.0 {
        return Err(DirectionError::Singular);
    }
    Ok(d)
}

/// Largest shift tried before giving up, relative to `||H||_F`.
pub const MAX_SHIFT_RATIO: f64 = 1e16;

/// `d = -(H + lambda I)^{-1} g` for the smallest `lambda` in
/// `{0, tau ||H||_F 2^m}` that makes the shifted matrix positive definite.
pub fn modified_newton_direction(h: &SymMatrix, g: &[f64], tau: f64) -> Result<(Vector, f64), DirectionError> {
    assert!(tau > 0.0);
    let fro = h.frobenius_norm();
    let base = if fro > 0.0 { fro } else { 1.0 };
    let mut lambda = 0.0;
    loop {
        if let Ok(f) = cholesky(&h.add_diagonal(lambda)) {
            let d = f.solve(g).scaled(-1.0);
            if d.is_finite() {
                return Ok((d, lambda));
            }
        }
        lambda = if lambda == 0.0 { tau * base } else { 2.0 * lambda };
        if lambda > MAX_SHIFT_RATIO * base {
            return Err(DirectionError::ShiftOverflow { lambda });
        }
    }
}

/// Dense BFGS approximation `B_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct BfgsState {
    pub b: SymMatrix,
    pub initialized: bool,
    pub skipped: usize,
}

/// Curvature below this fraction of `||s|| ||y||` skips the plain update.
pub const BFGS_SKIP_TOL: f64 = 1e-12;

impl BfgsState {
    pub fn new(n: usize) -> Self {
        BfgsState { b: SymMatrix::identity(n), initialized: false, skipped: 0 }
    }

    /// Replaces `B` by `(y'y / y's) I` ahead of the first update. With
    /// `y's <= 0` only the flag changes.
    pub fn init_rescale(&mut self, s: &[f64], y: &[f64]) {
        let ys = crate::numerics::dot(y, s);
        if ys > 0.0 {
            let yy = crate::numerics::dot(y, y);
            self.b = SymMatrix::scaled_identity(self.b.dim(), yy / ys);
        }
        self.initialized = true;
    }

    /// `B+ = B - B s s'B / s'B s + y y' / y's`; returns whether it was applied.
    pub fn update(&mut self, s: &[f64], y: &[f64]) -> bool {
        let ys = crate::numerics::dot(y, s);
        let ns = crate::numerics::norm2(s);
        let ny = crate::numerics::norm2(y);
        let bs = self.b.mul_vec(s);
        let sbs = crate::numerics::dot(s, &bs);
        if !(ys > BFGS_SKIP_TOL * ns * ny) || !(sbs > 0.0) {
            self.skipped += 1;
            return false;
        }
        let mut b = self.b.clone();
        b.add_outer(-1.0 / sbs, &bs);
        b.add_outer(1.0 / ys, y);
        if !b.is_finite() {
            self.skipped += 1;
            return false;
        }
        self.b = b;
        true
    }

    /// Applies [`update`](Self::update) only when
    /// `y's / ||s||^2 > chi * g_norm^upsilon`.
    pub fn cautious_update(&mut self, s: &[f64], y: &[f64], g_norm: f64, chi: f64, upsilon: f64) -> bool {
        assert!(chi > 0.0 && upsilon > 0.0);
        let ss = crate::numerics::dot(s, s);
        let ys = crate::numerics::dot(y, s);
        if ss > 0.0 && ys / ss > chi * libm::pow(g_norm, upsilon) {
            self.update(s, y)
        } else {
            self.skipped += 1;
            false
        }
    }
}

/// Modified secant vector `y + gamma ||g|| s` with
/// `gamma = 1 + max(-y's / ||s||^2, 0)`.
pub fn mbfgs_ybar(g: &[f64], y: &[f64], s: &[f64]) -> Vector {
    let ss = crate::numerics::dot(s, s);
    assert!(ss > 0.0, "zero step");
    let gamma = 1.0 + f64::max(-crate::numerics::dot(y, s) / ss, 0.0);
    let gn = crate::numerics::norm2(g);
    Vector::from_fn(y.len(), |i| y[i] + gamma * gn * s[i])
}

/// BB2 step length `s'y / y'y`; may be nonpositive on nonconvex data.
pub fn bb2_raw(s: &[f64], y: &[f64]) -> Result<f64, NumericsError> {
    let yy = crate::numerics::dot(y, y);
    if yy == 0.0 {
        return Err(NumericsError::ZeroVector);
    }
    Ok(crate::numerics::dot(s, y) / yy)
}

pub const NU1: f64 = 1e-5;
pub const NU2: f64 = 1e5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bb2State {
    /// Last safeguarded step length.
    pub last_xi: f64,
    /// Last raw BB2 value, if one has been computed.
    pub last_raw: Option<f64>,
    /// Times the nonpositive-curvature rule had no positive raw value to
    /// build on and reused `last_xi`.
    pub fallbacks: usize,
}

impl Bb2State {
    /// State at `k = 0`, where `xi_0 = 1 / ||g_0||`.
    pub fn start(g0_norm: f64) -> Self {
        assert!(g0_norm > 0.0);
        Bb2State { last_xi: 1.0 / g0_norm, last_raw: None, fallbacks: 0 }
    }
}

/// Safeguarded BB2 step.
///
/// With `pair = None` (first iteration) returns `1 / g0_norm`. Otherwise
/// `max(raw, nu1)` for positive `raw`, `min(10 * previous raw, nu2)` when
/// the previous raw value was positive, and the previous step otherwise;
/// always within `[nu1, nu2]`.
pub fn bb2_safeguarded(state: &Bb2State, pair: Option<(&[f64], &[f64])>, g0_norm: f64, nu1: f64, nu2: f64) -> (f64, Bb2State) {
    let Some((s, y)) = pair else {
        let xi = 1.0 / g0_norm;
        return (xi, Bb2State { last_xi: xi, last_raw: None, fallbacks: state.fallbacks });
    };
    let raw = bb2_raw(s, y).ok().filter(|r| r.is_finite());
    let mut next = *state;
    let xi = match (raw, state.last_raw) {
        (Some(r), _) if r > 0.0 => f64::max(r, nu1),
        (_, Some(prev)) if prev > 0.0 => f64::min(10.0 * prev, nu2),
        _ => {
            next.fallbacks += 1;
            state.last_xi
        }
    };
    let xi = xi.clamp(nu1, nu2);
    next.last_xi = xi;
    next.last_raw = raw;
    (xi, next)
}

/// What an engine sees when asked for a direction.
pub struct StepContext<'a> {
    pub objective: &'a dyn Objective,
    pub x: &'a [f64],
    pub g: &'a Vector,
    /// Current scaled-gradient step length.
    pub xi: f64,
}

/// Producer of Newton-type directions `d = -S^{-1} g`.
pub trait DirectionEngine: Send {
    fn name(&self) -> &'static str;
    fn direction(&mut self, ctx: &StepContext<'_>) -> Result<Vector, DirectionError>;
    /// Called after every accepted step with `s = x+ - x`, `y = g+ - g`.
    fn update(&mut self, _s: &Vector, _y: &Vector, _g_old: &Vector) {}
    /// Number of quasi-Newton updates that were skipped.
    fn skipped_updates(&self) -> usize {
        0
    }
}

pub struct Newton;

impl DirectionEngine for Newton {
    fn name(&self) -> &'static str {
        "newton"
    }
    fn direction(&mut self, ctx: &StepContext<'_>) -> Result<Vector, DirectionError> {
        let h = ctx.objective.hessian(ctx.x)?;
        newton_direction(&h, ctx.g)
    }
}

pub struct ModifiedNewton {
    pub tau: f64,
    pub last_shift: f64,
}

impl DirectionEngine for ModifiedNewton {
    fn name(&self) -> &'static str {
        "modified_newton"
    }
    fn direction(&mut self, ctx: &StepContext<'_>) -> Result<Vector, DirectionError> {
        let h = ctx.objective.hessian(ctx.x)?;
        let (d, lambda) = modified_newton_direction(&h, ctx.g, self.tau)?;
        self.last_shift = lambda;
        Ok(d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BfgsVariant {
    Plain,
    Cautious { chi: f64, upsilon: f64 },
    Modified,
}

pub struct Bfgs {
    pub variant: BfgsVariant,
    pub state: BfgsState,
}

impl Bfgs {
    pub fn new(n: usize, variant: BfgsVariant) -> Self {
        Bfgs { variant, state: BfgsState::new(n) }
    }
}

impl DirectionEngine for Bfgs {
    fn name(&self) -> &'static str {
        match self.variant {
            BfgsVariant::Plain => "bfgs",
            BfgsVariant::Cautious { .. } => "cbfgs",
            BfgsVariant::Modified => "mbfgs",
        }
    }

    fn direction(&mut self, ctx: &StepContext<'_>) -> Result<Vector, DirectionError> {
        newton_direction(&self.state.b, ctx.g)
    }

    fn update(&mut self, s: &Vector, y: &Vector, g_old: &Vector) {
        if s.norm() == 0.0 {
            return;
        }
        let y = match self.variant {
            BfgsVariant::Modified => mbfgs_ybar(g_old, y, s),
            _ => y.clone(),
        };
        if !self.state.initialized {
            self.state.init_rescale(s, &y);
        }
        match self.variant {
            BfgsVariant::Cautious { chi, upsilon } => {
                self.state.cautious_update(s, &y, g_old.norm(), chi, upsilon);
            }
            _ => {
                self.state.update(s, &y);
            }
        }
    }

    fn skipped_updates(&self) -> usize {
        self.state.skipped
    }
}

/// Steepest descent scaled by the current BB2 step: `d = -xi g`.
pub struct SteepestBb2;

impl DirectionEngine for SteepestBb2 {
    fn name(&self) -> &'static str {
        "sd_bb2"
    }
    fn direction(&mut self, ctx: &StepContext<'_>) -> Result<Vector, DirectionError> {
        Ok(ctx.g.scaled(-ctx.xi))
    }
}

/// Default cautious-update constants.
pub const CBFGS_CHI: f64 = 1e-2;
pub const CBFGS_UPSILON: f64 = 1.0;
/// Default initial shift fraction for the modified Newton engine.
pub const MN_TAU: f64 = 1e-3;

/// Engine selector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EngineKind {
    Newton,
    ModifiedNewton { tau: f64 },
    Bfgs,
    Cbfgs { chi: f64, upsilon: f64 },
    Mbfgs,
    SdBb2,
}

impl EngineKind {
    pub fn build(&self, n: usize) -> Box<dyn DirectionEngine> {
        match *self {
            EngineKind::Newton => Box::new(Newton),
            EngineKind::ModifiedNewton { tau } => Box::new(ModifiedNewton { tau, last_shift: 0.0 }),
            EngineKind::Bfgs => Box::new(Bfgs::new(n, BfgsVariant::Plain)),
            EngineKind::Cbfgs { chi, upsilon } => Box::new(Bfgs::new(n, BfgsVariant::Cautious { chi, upsilon })),
            EngineKind::Mbfgs => Box::new(Bfgs::new(n, BfgsVariant::Modified)),
            EngineKind::SdBb2 => Box::new(SteepestBb2),
        }
    }

    pub fn cbfgs_default() -> Self {
        EngineKind::Cbfgs { chi: CBFGS_CHI, upsilon: CBFGS_UPSILON }
    }

    pub fn modified_newton_default() -> Self {
        EngineKind::ModifiedNewton { tau: MN_TAU }
    }
}

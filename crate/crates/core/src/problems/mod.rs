//! Objective functions, the nonconvex test corpus, the logistic-regression
//! objective and finite-difference derivative checks.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::numerics::{SymMatrix, Vector};

mod logistic;
mod mgh;

pub use logistic::{cv_folds, logistic_objective, CvSplit, Dataset, Logistic, Row, NUM_FOLDS};
pub use mgh::{
    beale, box_3d, broyden_tridiagonal, brown_badly_scaled, corpus, discrete_boundary_value,
    extended_powell_singular, extended_rosenbrock, freudenstein_roth, goldstein_price, gulf_rd,
    helical_valley, powell_badly_scaled, trigonometric, variably_dimensioned, wood, CORPUS_DIM,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("{problem}: point outside the domain ({reason})")]
    Domain { problem: &'static str, reason: &'static str },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// A smooth objective `f: R^n -> R` with its gradient.
///
/// The Hessian defaults to central differences of the gradient; problems
/// that override it report `has_hessian() == true`.
pub trait Objective: Send + Sync {
    fn name(&self) -> &str;
    fn dim(&self) -> usize;
    fn default_start(&self) -> Vector;
    fn value(&self, x: &[f64]) -> Result<f64, ProblemError>;
    fn gradient(&self, x: &[f64]) -> Result<Vector, ProblemError>;

    fn has_hessian(&self) -> bool {
        false
    }

    fn hessian(&self, x: &[f64]) -> Result<SymMatrix, ProblemError> {
        fd_hessian(self, x)
    }
}

pub type SharedObjective = Arc<dyn Objective>;

/// Base step for central differences; scaled per coordinate by `max(1, |x_i|)`.
pub fn default_fd_step() -> f64 {
    libm::cbrt(f64::EPSILON)
}

fn fd_step(h: f64, xi: f64) -> f64 {
    // keep x + step exactly representable
    let t = xi + h * f64::max(1.0, xi.abs());
    t - xi
}

/// Central-difference gradient.
pub fn fd_gradient<O: Objective + ?Sized>(obj: &O, x: &[f64], h: f64) -> Result<Vector, ProblemError> {
    let mut xp = x.to_vec();
    let mut g = Vector::zeros(x.len());
    for i in 0..x.len() {
        let step = fd_step(h, x[i]);
        xp[i] = x[i] + step;
        let fp = obj.value(&xp)?;
        xp[i] = x[i] - step;
        let fm = obj.value(&xp)?;
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * step);
    }
    Ok(g)
}

/// Hessian by central differences of the analytic gradient, symmetrized.
pub fn fd_hessian<O: Objective + ?Sized>(obj: &O, x: &[f64]) -> Result<SymMatrix, ProblemError> {
    let n = x.len();
    let h = default_fd_step();
    let mut rows = alloc::vec![0.0; n * n];
    let mut xp = x.to_vec();
    for j in 0..n {
        let step = fd_step(h, x[j]);
        xp[j] = x[j] + step;
        let gp = obj.gradient(&xp)?;
        xp[j] = x[j] - step;
        let gm = obj.gradient(&xp)?;
        xp[j] = x[j];
        for i in 0..n {
            rows[i * n + j] = (gp[i] - gm[i]) / (2.0 * step);
        }
    }
    Ok(SymMatrix::from_rows_symmetrized(n, &rows))
}

/// Worst relative disagreement between the analytic gradient and central
/// differences, relative to `max(1, ||g||_inf)`.
pub fn fd_gradient_check<O: Objective + ?Sized>(obj: &O, x: &[f64], h: f64) -> Result<f64, ProblemError> {
    let g = obj.gradient(x)?;
    let fd = fd_gradient(obj, x, h)?;
    let denom = f64::max(1.0, g.norm_inf());
    Ok(g.iter().zip(fd.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / denom)
}

/// Compares `H v` against the central difference of the gradient along `v`,
/// relative to `max(1, ||H v||_inf)`.
pub fn hessian_vector_check<O: Objective + ?Sized>(obj: &O, x: &[f64], v: &[f64]) -> Result<f64, ProblemError> {
    let hv = obj.hessian(x)?.mul_vec(v);
    let vn = v.iter().fold(0.0, |m: f64, a| m.max(a.abs()));
    let xn = x.iter().fold(0.0, |m: f64, a| m.max(a.abs()));
    let t = default_fd_step() * f64::max(1.0, xn) / f64::max(vn, 1e-300);
    let xp: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + t * b).collect();
    let xm: Vec<f64> = x.iter().zip(v).map(|(a, b)| a - t * b).collect();
    let gp = obj.gradient(&xp)?;
    let gm = obj.gradient(&xm)?;
    let fd = Vector::from_fn(x.len(), |i| (gp[i] - gm[i]) / (2.0 * t));
    let denom = f64::max(1.0, hv.norm_inf());
    Ok(hv.iter().zip(fd.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / denom)
}

/// `omega * f`, with gradient and Hessian scaled alike.
pub struct Scaled {
    inner: SharedObjective,
    omega: f64,
    name: String,
}

impl Scaled {
    pub fn omega(&self) -> f64 {
        self.omega
    }
}

pub fn scale_objective(inner: SharedObjective, omega: f64) -> SharedObjective {
    assert!(omega > 0.0 && omega.is_finite(), "scale factor must be positive");
    let name = format!("{}@{:e}", inner.name(), omega);
    Arc::new(Scaled { inner, omega, name })
}

impl Objective for Scaled {
    fn name(&self) -> &str {
        &self.name
    }
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn default_start(&self) -> Vector {
        self.inner.default_start()
    }
    fn value(&self, x: &[f64]) -> Result<f64, ProblemError> {
        Ok(self.omega * self.inner.value(x)?)
    }
    fn gradient(&self, x: &[f64]) -> Result<Vector, ProblemError> {
        Ok(self.inner.gradient(x)?.scaled(self.omega))
    }
    fn has_hessian(&self) -> bool {
        self.inner.has_hessian()
    }
    fn hessian(&self, x: &[f64]) -> Result<SymMatrix, ProblemError> {
        Ok(self.inner.hessian(x)?.scaled(self.omega))
    }
}

/// An objective paired with a starting point.
#[derive(Clone)]
pub struct ProblemInstance {
    pub objective: SharedObjective,
    pub start: Vector,
    pub instance_id: String,
}

impl ProblemInstance {
    pub fn new(objective: SharedObjective, start: Vector, instance_id: impl Into<String>) -> Self {
        assert_eq!(start.len(), objective.dim(), "start has wrong dimension");
        ProblemInstance { objective, start, instance_id: instance_id.into() }
    }

    pub fn at_default_start(objective: SharedObjective) -> Self {
        let start = objective.default_start();
        let id = format!("{}#0", objective.name());
        Self::new(objective, start, id)
    }
}

impl core::fmt::Debug for ProblemInstance {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ProblemInstance")
            .field("instance_id", &self.instance_id)
            .field("n", &self.start.len())
            .finish()
    }
}

/// Seeded points near the default start: each coordinate moves by up to
/// `0.5 * max(1, 0.2 |x0_i|)`.
pub fn probe_points(obj: &dyn Objective, seed: u64, count: usize) -> Vec<Vector> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let x0 = obj.default_start();
    (0..count)
        .map(|_| Vector::from_fn(x0.len(), |i| x0[i] + r.random_range(-0.5..0.5) * f64::max(1.0, 0.2 * x0[i].abs())))
        .collect()
}

/// Number of starting points generated per problem.
pub const NUM_STARTS: usize = 10;

/// Perturbation radii `eta_s`, s = 1..9, log-spaced over `[1e-2, 1e-1]`
/// with both ends included.
pub fn perturbation_radii() -> [f64; NUM_STARTS - 1] {
    let mut eta = [0.0; NUM_STARTS - 1];
    for (s, e) in eta.iter_mut().enumerate() {
        *e = libm::pow(10.0, -2.0 + s as f64 / (NUM_STARTS - 2) as f64);
    }
    eta[0] = 1e-2;
    eta[NUM_STARTS - 2] = 1e-1;
    eta
}

/// Ten instances: the default start, then nine relative perturbations of
/// it with component-wise radius `eta_s * |x0_i|`.
pub fn perturb_starts(obj: &SharedObjective, seed: u64) -> Vec<ProblemInstance> {
    let x0 = obj.default_start();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(NUM_STARTS);
    out.push(ProblemInstance::new(obj.clone(), x0.clone(), format!("{}#0", obj.name())));
    for (s, eta) in perturbation_radii().iter().enumerate() {
        let start = Vector::from_fn(x0.len(), |i| {
            let a = x0[i].abs();
            if a == 0.0 {
                x0[i]
            } else {
                x0[i] + rng.random_range(-eta * a..=eta * a)
            }
        });
        out.push(ProblemInstance::new(obj.clone(), start, format!("{}#{}", obj.name(), s + 1)));
    }
    out
}

//! Nonconvex test problems in the Moré–Garbow–Hillstrom style.
//!
//! Most members are sums of squared residuals `f = sum r_i^2`; they share
//! the [`LeastSquares`] adapter, which builds `g = 2 J^T r` and, when the
//! residual curvature is known, `H = 2 (J^T J + sum r_i hess(r_i))`.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::{Objective, ProblemError, SharedObjective};
use crate::numerics::{SymMatrix, Vector};

/// Dimension used for every corpus member whose size is selectable.
pub const CORPUS_DIM: usize = 100;

trait Residuals: Send + Sync {
    fn name(&self) -> &'static str;
    fn n(&self) -> usize;
    fn m(&self) -> usize;
    fn start(&self) -> Vector;
    fn residuals(&self, x: &[f64], r: &mut [f64]) -> Result<(), ProblemError>;
    /// Fills the zero-initialized row-major `m x n` Jacobian.
    fn jacobian(&self, x: &[f64], jac: &mut [f64]) -> Result<(), ProblemError>;
    /// Adds `sum_i w_i hess(r_i)` to `h`; `false` if not available.
    fn curvature(&self, _x: &[f64], _w: &[f64], _h: &mut SymMatrix) -> bool {
        false
    }
    fn has_curvature(&self) -> bool {
        false
    }
}

struct LeastSquares<R>(R);

impl<R: Residuals> LeastSquares<R> {
    fn check_dim(&self, x: &[f64]) -> Result<(), ProblemError> {
        if x.len() != self.0.n() {
            return Err(ProblemError::DimensionMismatch { expected: self.0.n(), got: x.len() });
        }
        Ok(())
    }

    fn res_and_jac(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>), ProblemError> {
        self.check_dim(x)?;
        let (m, n) = (self.0.m(), self.0.n());
        let mut r = vec![0.0; m];
        self.0.residuals(x, &mut r)?;
        let mut jac = vec![0.0; m * n];
        self.0.jacobian(x, &mut jac)?;
        Ok((r, jac))
    }
}

impl<R: Residuals> Objective for LeastSquares<R> {
    fn name(&self) -> &str {
        self.0.name()
    }
    fn dim(&self) -> usize {
        self.0.n()
    }
    fn default_start(&self) -> Vector {
        self.0.start()
    }
    fn value(&self, x: &[f64]) -> Result<f64, ProblemError> {
        self.check_dim(x)?;
        let mut r = vec![0.0; self.0.m()];
        self.0.residuals(x, &mut r)?;
        Ok(r.iter().map(|v| v * v).sum())
    }
    fn gradient(&self, x: &[f64]) -> Result<Vector, ProblemError> {
        let (r, jac) = self.res_and_jac(x)?;
        let n = self.0.n();
        let mut g = Vector::zeros(n);
        for (i, ri) in r.iter().enumerate() {
            for (j, jij) in jac[i * n..(i + 1) * n].iter().enumerate() {
                g[j] += 2.0 * jij * ri;
            }
        }
        Ok(g)
    }
    fn has_hessian(&self) -> bool {
        self.0.has_curvature()
    }
    fn hessian(&self, x: &[f64]) -> Result<SymMatrix, ProblemError> {
        if !self.0.has_curvature() {
            return super::fd_hessian(self, x);
        }
        let (r, jac) = self.res_and_jac(x)?;
        let n = self.0.n();
        let mut h = SymMatrix::zeros(n);
        let mut nz = Vec::with_capacity(n);
        for i in 0..r.len() {
            let row = &jac[i * n..(i + 1) * n];
            nz.clear();
            nz.extend((0..n).filter(|&j| row[j] != 0.0));
            for (a, &j) in nz.iter().enumerate() {
                for &k in &nz[..=a] {
                    h.add_to(j, k, row[j] * row[k]);
                }
            }
        }
        self.0.curvature(x, &r, &mut h);
        Ok(h.scaled(2.0))
    }
}

fn shared<R: Residuals + 'static>(r: R) -> SharedObjective {
    Arc::new(LeastSquares(r))
}

struct BrownBadlyScaled;

impl Residuals for BrownBadlyScaled {
    fn name(&self) -> &'static str {
        "brown_badly_scaled"
    }
    fn n(&self) -> usize {
        2
    }
    fn m(&self) -> usize {
        3
    }
    fn start(&self) -> Vector {
        Vector::from([1.0, 1.0])
    }
    fn residuals(&self, x: &[f64], r: &mut [f64]) -> Result<(), ProblemError> {
        r[0] = x[0] - 1e6;
        r[1] = x[1] - 2e-6;
        r[2] = x[0] * x[1] - 2.0;
        Ok(())
    }
    fn jacobian(&self, x: &[f64], j: &mut [f64]) -> Result<(), ProblemError> {
        j[0] = 1.0;
        j[3] = 1.0;
        j[4] = x[1];
        j[5] = x[0];
        Ok(())
    }
    fn has_curvature(&self) -> bool {
        true
    }
    fn curvature(&self, _x: &[f64], w: &[f64], h: &mut SymMatrix) -> bool {
        h.add_to(0, 1, w[2]);
        true
    }
}

/// Brown badly scaled function, `n = 2`.
pub fn brown_badly_scaled() -> SharedObjective {
    shared(BrownBadlyScaled)
}

struct GulfRd {
    y: [f64; 99],
}

impl GulfRd {
    fn new() -> Self {
        let mut y = [0.0; 99];
        for (i, yi) in y.iter_mut().enumerate() {
            let t = (i + 1) as f64 / 100.0;
            *yi = 25.0 + libm::pow(-50.0 * libm::log(t), 2.0 / 3.0);
        }
        GulfRd { y }
    }

    fn guard(x: &[f64]) -> Result<(), ProblemError> {
        if x[0] == 0.0 {
            return Err(ProblemError::Domain { problem: "gulf_rd", reason: "x1 = 0" });
        }
        Ok(())
    }
}

impl Residuals for GulfRd {
    fn name(&self) -> &'static str {
        "gulf_rd"
    }
    fn n(&self) -> usize {
        3
    }
    fn m(&self) -> usize {
        99
    }
    fn start(&self) -> Vector {
        Vector::from([40.0, 20.0, 1.2])
    }
    fn residuals(&self, x: &[f64], r: &mut [f64]) -> Result<(), ProblemError> {
        Self::guard(x)?;
        for (i, ri) in r.iter_mut().enumerate() {
            let u = libm::pow((self.y[i] - x[1]).abs(), x[2]);
            *ri = libm::exp(-u / x[0]) - (i + 1) as f64 / 100.0;
        }
        Ok(())
    }
    fn jacobian(&self, x: &[f64], j: &mut [f64]) -> Result<(), ProblemError> {
        Self::guard(x)?;
        for i in 0..99 {
            let diff = self.y[i] - x[1];
            let a = diff.abs();
            let u = libm::pow(a, x[2]);
            let e = libm::exp(-u / x[0]);
            j[3 * i] = e * u / (x[0] * x[0]);
            if a > 0.0 {
                j[3 * i + 1] = e * x[2] * libm::pow(a, x[2] - 1.0) * diff.signum() / x[0];
                j[3 * i + 2] = -e * u * libm::log(a) / x[0];
            }
        }
        Ok(())
    }
}

/// Gulf research and development function, `n = 3`, started at `(40, 20, 1.2)`.
pub fn gulf_rd() -> SharedObjective {
    shared(GulfRd::new())
}

struct ExtendedRosenbrock(usize);

impl Residuals for ExtendedRosenbrock {
    fn name(&self) -> &'static str {
        "extended_rosenbrock"
    }
    fn n(&self) -> usize {
        self.0
    }
    fn m(&self) -> usize {
        self.0
    }
    fn start(&self) -> Vector {
        Vector::from_fn(self.0, |i| if i % 2 == 0 { -1.2 } else { 1.0 })
    }
    fn residuals(&self, x: &[f64], r: &mut [f64]) -> Result<(), ProblemError> {
        for k in 0..self.0 / 2 {
            let (a, b) = (x[2 * k], x[2 * k + 1]);
            r[2 * k] = 10.0 * (b - a * a);
            r[2 * k + 1] = 1.0 - a;
        }
        Ok(())
    }
    fn jacobian(&self, x: &[f64], j: &mut [f64]) -> Result<(), ProblemError> {
        let n = self.0;
        for k in 0..n / 2 {
            j[2 * k * n + 2 * k] = -20.0 * x[2 * k];
            j[2 * k * n + 2 * k + 1] = 10.0;
            j[(2 * k + 1) * n + 2 * k] = -1.0;
        }
        Ok(())
    }
    fn has_curvature(&self) -> bool {
        true
    }
    fn curvature(&self, _x: &[f64], w: &[f64], h: &mut SymMatrix) -> bool {
        for k in 0..self.0 / 2 {
            h.add_to(2 * k, 2 * k, -20.0 * w[2 * k]);
        }
        true
    }
}

/// Extended Rosenbrock function; `n` must be even.
pub fn extended_rosenbrock(n: usize) -> SharedObjective {
    assert!(n >= 2 && n.is_multiple_of(2), "extended Rosenbrock needs an even dimension");
    shared(ExtendedRosenbrock(n))
}

struct FreudensteinRoth;

impl Residuals for FreudensteinRoth {
    fn name(&self) -> &'static str {
        "freudenstein_roth"
    }
    fn n(&self) -> usize {
        2
    }
    fn m(&self) -> usize {
        2
    }
    fn start(&self) -> Vector {
        Vector::from([0.5, -2.0])
    }
    fn residuals(&self, x: &[f64], r: &mut [f64]) -> Result<(), ProblemError> {
        let t = x[1];
        r[0] = -13.0 + x[0] + ((5.0 - t) * t - 2.0) * t;
        r[1] = -29.0 + x[0] + ((t + 1.0) * t - 14.0) * t;
        Ok(())
    }
    fn jacobian(&self, x: &[f64], j: &mut [f64]) -> Result<(), ProblemError> {
        let t = x[1];
        j[0] = 1.0;
        j[1] = 10.0 * t - 3.0 * t * t - 2.0;
        j[2] = 1.0;
        j[3] = 3.0 * t * t + 2.0 * t - 14.0;
        Ok(())
    }
    fn has_curvature(&self) -> bool {
        true
    }
    fn curvature(&self, x: &[f64], w: &[f64], h: &mut SymMatrix) -> bool {
        let t = x[1];
        h.add_to(1, 1, w[0] * (10.0 - 6.0 * t) + w[1] * (6.0 * t + 2.0));
        true
    }
}

/// Freudenstein and Roth function, `n = 2`.
pub fn freudenstein_roth() -> SharedObjective {
    shared(FreudensteinRoth)
}

struct PowellBadlyScaled;

impl Residuals for PowellBadlyScaled {
    fn name(&self) -> &'static str {
        "powell_badly_scaled"
    }
    fn n(&self) -> usize {
        2
    }
    fn m(&self) -> usize {
        2
    }
    fn start(&self) -> Vector {
        Vector::from([0.0, 1.0])
    }
    fn residuals(&self, x: &[f64], r: &mut [f64]) -> Result<(), ProblemError> {
        r[0] = 1e4 * x[0] * x[1] - 1.0;
        r[1] = libm::exp(-x[0]) + libm::exp(-x[1]) - 1.0001;
        Ok(())
    }
    fn jacobian(&self, x: &[f64], j: &mut [f64]) -> Result<(), ProblemError> {
        j[0] = 1e4 * x[1];
        j[1] = 1e4 * x[0];
        j[2] = -libm::exp(-x[0]);
        j[3] = -libm::exp(-x[1]);
        Ok(())
    }
    fn has_curvature(&self) -> bool {
        true
    }
    fn curvature(&self, x: &[f64], w: &[f64], h: &mut SymMatrix) -> bool {
        h.add_to(0, 1, 1e4 * w[0]);
        h.add_to(0, 0, w[1] * libm::exp(-x[0]));
        h.add_to(1, 1, w[1] * libm::exp(-x[1]));
        true
    }
}

/// Powell badly scaled function, `n = 2`.
pub fn powell_badly_scaled() -> SharedObjective {
    shared(PowellBadlyScaled)
}

struct Beale;

const BEALE_Y: [f64; 3] = [1.5, 2.25, 2.625];

impl Residuals for Beale {
    fn name(&self) -> &'static str {
        "beale"
    }
    fn n(&self) -> usize {
        2
    }
    fn m(&self) -> usize {
        3
    }
    fn start(&self) -> Vector {
        Vector::from([1.0, 1.0])
    }
    fn residuals(&self, x: &[f64], r: &mut [f64]) -> Result<(), ProblemError> {
        for (i, ri) in r.iter_mut().enumerate() {
            *ri = BEALE_Y[i] - x[0] * (1.0 - libm::pow(x[1], (i + 1) as f64));
        }
        Ok(())
    }
    fn jacobian(&self, x: &[f64], j: &mut [f64]) -> Result<(), ProblemError> {
        for i in 0..3 {
            let p = (i + 1) as f64;
            j[2 * i] = -(1.0 - libm::pow(x[1], p));
            j[2 * i + 1] = x[0] * p * libm::pow(x[1], p - 1.0);
        }
        Ok(())
    }
    fn has_curvature(&self) -> bool {
        true
    }
    fn curvature(&self, x: &[f64], w: &[f64], h: &mut SymMatrix) -> bool {
        for i in 0..3 {
            let p = (i + 1) as f64;
            h.add_to(0, 1, w[i] * p * libm::pow(x[1], p - 1.0));
            if i > 0 {
                h.add_to(1, 1, w[i] * x[0] * p * (p - 1.0) * libm::pow(x[1], p - 2.0));
            }
        }
        true
    }
}

/// Beale function, `n = 2`.
pub fn beale() -> SharedObjective {
    shared(Beale)
}

struct HelicalValley;

impl HelicalValley {
    fn theta(x: &[f64]) -> Result<f64, ProblemError> {
        if x[0] == 0.0 && x[1] == 0.0 {
            return Err(ProblemError::Domain { problem: "helical_valley", reason: "x1 = x2 = 0" });
        }
        let mut t = libm::atan2(x[1], x[0]) / (2.0 * PI);
        if t < -0.25 {
            t += 1.0;
        }
        Ok(t)
    }
}

impl Residuals for HelicalValley {
    fn name(&self) -> &'static str {
        "helical_valley"
    }
    fn n(&self) -> usize {
        3
    }
    fn m(&self) -> usize {
        3
    }
    fn start(&self) -> Vector {
        Vector::from([-1.0, 0.0, 0.0])
    }
    fn residuals(&self, x: &[f64], r: &mut [f64]) -> Result<(), ProblemError> {
        let t = Self::theta(x)?;
        r[0] = 10.0 * (x[2] - 10.0 * t);
        r[1] = 10.0 * (libm::hypot(x[0], x[1]) - 1.0);
        r[2] = x[2];
        Ok(())
    }
    fn jacobian(&self, x: &[f64], j: &mut [f64]) -> Result<(), ProblemError> {
        Self::theta(x)?;
        let rr = x[0] * x[0] + x[1] * x[1];
        let rad = libm::sqrt(rr);
        j[0] = 100.0 * x[1] / (2.0 * PI * rr);
        j[1] = -100.0 * x[0] / (2.0 * PI * rr);
        j[2] = 10.0;
        j[3] = 10.0 * x[0] / rad;
        j[4] = 10.0 * x[1] / rad;
        j[8] = 1.0;
        Ok(())
    }
}

/// Helical valley function, `n = 3`.
pub fn helical_valley() -> SharedObjective {
    shared(HelicalValley)
}

struct Box3d;

const BOX_M: usize = 10;

impl Residuals for Box3d {
    fn name(&self) -> &'static str {
        "box_3d"
    }
    fn n(&self) -> usize {
        3
    }
    fn m(&self) -> usize {
        BOX_M
    }
    fn start(&self) -> Vector {
        Vector::from([0.0, 10.0, 20.0])
    }
    fn residuals(&self, x: &[f64], r: &mut [f64]) -> Result<(), ProblemError> {
        for (i, ri) in r.iter_mut().enumerate() {
            let t = 0.1 * (i + 1) as f64;
            *ri = libm::exp(-t * x[0]) - libm::exp(-t * x[1]) - x[2] * (libm::exp(-t) - libm::exp(-10.0 * t));
        }
        Ok(())
    }
    fn jacobian(&self, x: &[f64], j: &mut [f64]) -> Result<(), ProblemError> {
        for i in 0..BOX_M {
            let t = 0.1 * (i + 1) as f64;
            j[3 * i] = -t * libm::exp(-t * x[0]);
            j[3 * i + 1] = t * libm::exp(-t * x[1]);
            j[3 * i + 2] = -(libm::exp(-t) - libm::exp(-10.0 * t));
        }
        Ok(())
    }
    fn has_curvature(&self) -> bool {
        true
    }
    fn curvature(&self, x: &[f64], w: &[f64], h: &mut SymMatrix) -> bool {
        for i in 0..BOX_M {
            let t = 0.1 * (i + 1) as f64;
            h.add_to(0, 0, w[i] * t * t * libm::exp(-t * x[0]));
            h.add_to(1, 1, -w[i] * t * t * libm::exp(-t * x[1]));
        }
        true
    }
}

/// Box three-dimensional function with ten residuals.
pub fn box_3d() -> SharedObjective {
    shared(Box3d)
}

struct Wood;

impl Residuals for Wood {
    fn name(&self) -> &'static str {
        "wood"
    }
    fn n(&self) -> usize {
        4
    }
    fn m(&self) -> usize {
        6
    }
    fn start(&self) -> Vector {
        Vector::from([-3.0, -1.0, -3.0, -1.0])
    }
    fn residuals(&self, x: &[f64], r: &mut [f64]) -> Result<(), ProblemError> {
        let s90 = libm::sqrt(90.0);
        let s10 = libm::sqrt(10.0);
        r[0] = 10.0 * (x[1] - x[0] * x[0]);
        r[1] = 1.0 - x[0];
        r[2] = s90 * (x[3] - x[2] * x[2]);
        r[3] = 1.0 - x[2];
        r[4] = s10 * (x[1] + x[3] - 2.0);
        r[5] = (x[1] - x[3]) / s10;
        Ok(())
    }
    fn jacobian(&self, x: &[f64], j: &mut [f64]) -> Result<(), ProblemError> {
        let s90 = libm::sqrt(90.0);
        let s10 = libm::sqrt(10.0);
        j[0] = -20.0 * x[0];
        j[1] = 10.0;
        j[4] = -1.0;
        j[2 * 4 + 2] = -2.0 * s90 * x[2];
        j[2 * 4 + 3] = s90;
        j[3 * 4 + 2] = -1.0;
        j[4 * 4 + 1] = s10;
        j[4 * 4 + 3] = s10;
        j[5 * 4 + 1] = 1.0 / s10;
        j[5 * 4 + 3] = -1.0 / s10;
        Ok(())
    }
    fn has_curvature(&self) -> bool {
        true
    }
    fn curvature(&self, _x: &[f64], w: &[f64], h: &mut SymMatrix) -> bool {
        h.add_to(0, 0, -20.0 * w[0]);
        h.add_to(2, 2, -2.0 * libm::sqrt(90.0) * w[2]);
        true
    }
}

/// Wood function, `n = 4`.
pub fn wood() -> SharedObjective {
    shared(Wood)
}

struct PowellSingular(usize);

impl Residuals for PowellSingular {
    fn name(&self) -> &'static str {
        "extended_powell_singular"
    }
    fn n(&self) -> usize {
        self.0
    }
    fn m(&self) -> usize {
        self.0
    }
    fn start(&self) -> Vector {
        const S: [f64; 4] = [3.0, -1.0, 0.0, 1.0];
        Vector::from_fn(self.0, |i| S[i % 4])
    }
    fn residuals(&self, x: &[f64], r: &mut [f64]) -> Result<(), ProblemError> {
        let (s5, s10) = (libm::sqrt(5.0), libm::sqrt(10.0));
        for k in (0..self.0).step_by(4) {
            let (a, b, c, d) = (x[k], x[k + 1], x[k + 2], x[k + 3]);
            r[k] = a + 10.0 * b;
            r[k + 1] = s5 * (c - d);
            r[k + 2] = (b - 2.0 * c) * (b - 2.0 * c);
            r[k + 3] = s10 * (a - d) * (a - d);
        }
        Ok(())
    }
    fn jacobian(&self, x: &[f64], j: &mut [f64]) -> Result<(), ProblemError> {
        let n = self.0;
        let (s5, s10) = (libm::sqrt(5.0), libm::sqrt(10.0));
        for k in (0..n).step_by(4) {
            let (a, b, c, d) = (x[k], x[k + 1], x[k + 2], x[k + 3]);
            j[k * n + k] = 1.0;
            j[k * n + k + 1] = 10.0;
            j[(k + 1) * n + k + 2] = s5;
            j[(k + 1) * n + k + 3] = -s5;
            j[(k + 2) * n + k + 1] = 2.0 * (b - 2.0 * c);
            j[(k + 2) * n + k + 2] = -4.0 * (b - 2.0 * c);
            j[(k + 3) * n + k] = 2.0 * s10 * (a - d);
            j[(k + 3) * n + k + 3] = -2.0 * s10 * (a - d);
        }
        Ok(())
    }
    fn has_curvature(&self) -> bool {
        true
    }
    fn curvature(&self, _x: &[f64], w: &[f64], h: &mut SymMatrix) -> bool {
        let s10 = libm::sqrt(10.0);
        for k in (0..self.0).step_by(4) {
            let w3 = w[k + 2];
            h.add_to(k + 1, k + 1, 2.0 * w3);
            h.add_to(k + 1, k + 2, -4.0 * w3);
            h.add_to(k + 2, k + 2, 8.0 * w3);
            let w4 = 2.0 * s10 * w[k + 3];
            h.add_to(k, k, w4);
            h.add_to(k, k + 3, -w4);
            h.add_to(k + 3, k + 3, w4);
        }
        true
    }
}

/// Extended Powell singular function; `n` must be a multiple of 4.
pub fn extended_powell_singular(n: usize) -> SharedObjective {
    assert!(n >= 4 && n % 4 == 0, "extended Powell singular needs n divisible by 4");
    shared(PowellSingular(n))
}

struct VariablyDimensioned(usize);

impl VariablyDimensioned {
    fn weighted_sum(x: &[f64]) -> f64 {
        x.iter().enumerate().map(|(j, v)| (j + 1) as f64 * (v - 1.0)).sum()
    }
}

impl Residuals for VariablyDimensioned {
    fn name(&self) -> &'static str {
        "variably_dimensioned"
    }
    fn n(&self) -> usize {
        self.0
    }
    fn m(&self) -> usize {
        self.0 + 2
    }
    fn start(&self) -> Vector {
        let n = self.0 as f64;
        Vector::from_fn(self.0, |j| 1.0 - (j + 1) as f64 / n)
    }
    fn residuals(&self, x: &[f64], r: &mut [f64]) -> Result<(), ProblemError> {
        let n = self.0;
        for i in 0..n {
            r[i] = x[i] - 1.0;
        }
        let s = Self::weighted_sum(x);
        r[n] = s;
        r[n + 1] = s * s;
        Ok(())
    }
    fn jacobian(&self, x: &[f64], j: &mut [f64]) -> Result<(), ProblemError> {
        let n = self.0;
        let s = Self::weighted_sum(x);
        for i in 0..n {
            j[i * n + i] = 1.0;
            j[n * n + i] = (i + 1) as f64;
            j[(n + 1) * n + i] = 2.0 * s * (i + 1) as f64;
        }
        Ok(())
    }
    fn has_curvature(&self) -> bool {
        true
    }
    fn curvature(&self, _x: &[f64], w: &[f64], h: &mut SymMatrix) -> bool {
        let n = self.0;
        let idx: Vec<f64> = (1..=n).map(|j| j as f64).collect();
        h.add_outer(2.0 * w[n + 1], &idx);
        true
    }
}

/// Variably dimensioned function.
pub fn variably_dimensioned(n: usize) -> SharedObjective {
    shared(VariablyDimensioned(n))
}

struct Trigonometric(usize);

impl Residuals for Trigonometric {
    fn name(&self) -> &'static str {
        "trigonometric"
    }
    fn n(&self) -> usize {
        self.0
    }
    fn m(&self) -> usize {
        self.0
    }
    fn start(&self) -> Vector {
        let n = self.0;
        Vector::from_fn(n, |_| 1.0 / n as f64)
    }
    fn residuals(&self, x: &[f64], r: &mut [f64]) -> Result<(), ProblemError> {
        let n = self.0;
        let sum_cos: f64 = x.iter().map(|v| libm::cos(*v)).sum();
        for i in 0..n {
            let p = (i + 1) as f64;
            r[i] = n as f64 - sum_cos + p * (1.0 - libm::cos(x[i])) - libm::sin(x[i]);
        }
        Ok(())
    }
    fn jacobian(&self, x: &[f64], j: &mut [f64]) -> Result<(), ProblemError> {
        let n = self.0;
        for i in 0..n {
            for k in 0..n {
                j[i * n + k] = libm::sin(x[k]);
            }
            let p = (i + 1) as f64;
            j[i * n + i] += p * libm::sin(x[i]) - libm::cos(x[i]);
        }
        Ok(())
    }
    fn has_curvature(&self) -> bool {
        true
    }
    fn curvature(&self, x: &[f64], w: &[f64], h: &mut SymMatrix) -> bool {
        let total: f64 = w.iter().sum();
        for k in 0..self.0 {
            let p = (k + 1) as f64;
            let (s, c) = (libm::sin(x[k]), libm::cos(x[k]));
            h.add_to(k, k, c * total + w[k] * (p * c + s));
        }
        true
    }
}

/// Trigonometric function.
pub fn trigonometric(n: usize) -> SharedObjective {
    shared(Trigonometric(n))
}

struct BroydenTridiagonal(usize);

impl Residuals for BroydenTridiagonal {
    fn name(&self) -> &'static str {
        "broyden_tridiagonal"
    }
    fn n(&self) -> usize {
        self.0
    }
    fn m(&self) -> usize {
        self.0
    }
    fn start(&self) -> Vector {
        Vector::from_fn(self.0, |_| -1.0)
    }
    fn residuals(&self, x: &[f64], r: &mut [f64]) -> Result<(), ProblemError> {
        let n = self.0;
        for i in 0..n {
            let prev = if i > 0 { x[i - 1] } else { 0.0 };
            let next = if i + 1 < n { x[i + 1] } else { 0.0 };
            r[i] = (3.0 - 2.0 * x[i]) * x[i] - prev - 2.0 * next + 1.0;
        }
        Ok(())
    }
    fn jacobian(&self, x: &[f64], j: &mut [f64]) -> Result<(), ProblemError> {
        let n = self.0;
        for i in 0..n {
            j[i * n + i] = 3.0 - 4.0 * x[i];
            if i > 0 {
                j[i * n + i - 1] = -1.0;
            }
            if i + 1 < n {
                j[i * n + i + 1] = -2.0;
            }
        }
        Ok(())
    }
    fn has_curvature(&self) -> bool {
        true
    }
    fn curvature(&self, _x: &[f64], w: &[f64], h: &mut SymMatrix) -> bool {
        for i in 0..self.0 {
            h.add_to(i, i, -4.0 * w[i]);
        }
        true
    }
}

/// Broyden tridiagonal function.
pub fn broyden_tridiagonal(n: usize) -> SharedObjective {
    shared(BroydenTridiagonal(n))
}

struct DiscreteBoundaryValue(usize);

impl DiscreteBoundaryValue {
    fn h(&self) -> f64 {
        1.0 / (self.0 + 1) as f64
    }
}

impl Residuals for DiscreteBoundaryValue {
    fn name(&self) -> &'static str {
        "discrete_boundary_value"
    }
    fn n(&self) -> usize {
        self.0
    }
    fn m(&self) -> usize {
        self.0
    }
    fn start(&self) -> Vector {
        let h = self.h();
        Vector::from_fn(self.0, |i| {
            let t = (i + 1) as f64 * h;
            t * (t - 1.0)
        })
    }
    fn residuals(&self, x: &[f64], r: &mut [f64]) -> Result<(), ProblemError> {
        let n = self.0;
        let h = self.h();
        for i in 0..n {
            let t = (i + 1) as f64 * h;
            let prev = if i > 0 { x[i - 1] } else { 0.0 };
            let next = if i + 1 < n { x[i + 1] } else { 0.0 };
            let c = x[i] + t + 1.0;
            r[i] = 2.0 * x[i] - prev - next + h * h * c * c * c / 2.0;
        }
        Ok(())
    }
    fn jacobian(&self, x: &[f64], j: &mut [f64]) -> Result<(), ProblemError> {
        let n = self.0;
        let h = self.h();
        for i in 0..n {
            let t = (i + 1) as f64 * h;
            let c = x[i] + t + 1.0;
            j[i * n + i] = 2.0 + 1.5 * h * h * c * c;
            if i > 0 {
                j[i * n + i - 1] = -1.0;
            }
            if i + 1 < n {
                j[i * n + i + 1] = -1.0;
            }
        }
        Ok(())
    }
    fn has_curvature(&self) -> bool {
        true
    }
    fn curvature(&self, x: &[f64], w: &[f64], hm: &mut SymMatrix) -> bool {
        let h = self.h();
        for i in 0..self.0 {
            let t = (i + 1) as f64 * h;
            hm.add_to(i, i, w[i] * 3.0 * h * h * (x[i] + t + 1.0));
        }
        true
    }
}

/// Discrete boundary value function.
pub fn discrete_boundary_value(n: usize) -> SharedObjective {
    shared(DiscreteBoundaryValue(n))
}

struct GoldsteinPrice;

impl GoldsteinPrice {
    /// Returns `(A, dA/dx, dA/dy, B, dB/dx, dB/dy)` for `f = A * B`.
    fn factors(x: f64, y: f64) -> [f64; 6] {
        let a = x + y + 1.0;
        let p = 19.0 - 14.0 * x + 3.0 * x * x - 14.0 * y + 6.0 * x * y + 3.0 * y * y;
        let dp = -14.0 + 6.0 * x + 6.0 * y; // same in x and y
        let fa = 1.0 + a * a * p;
        let fa_d = 2.0 * a * p + a * a * dp;
        let b = 2.0 * x - 3.0 * y;
        let q = 18.0 - 32.0 * x + 12.0 * x * x + 48.0 * y - 36.0 * x * y + 27.0 * y * y;
        let fb = 30.0 + b * b * q;
        let fb_x = 4.0 * b * q + b * b * (-32.0 + 24.0 * x - 36.0 * y);
        let fb_y = -6.0 * b * q + b * b * (48.0 - 36.0 * x + 54.0 * y);
        [fa, fa_d, fa_d, fb, fb_x, fb_y]
    }
}

impl Objective for GoldsteinPrice {
    fn name(&self) -> &str {
        "goldstein_price"
    }
    fn dim(&self) -> usize {
        2
    }
    fn default_start(&self) -> Vector {
        Vector::from([-0.5, 0.25])
    }
    fn value(&self, x: &[f64]) -> Result<f64, ProblemError> {
        let f = Self::factors(x[0], x[1]);
        Ok(f[0] * f[3])
    }
    fn gradient(&self, x: &[f64]) -> Result<Vector, ProblemError> {
        let [a, ax, ay, b, bx, by] = Self::factors(x[0], x[1]);
        Ok(Vector::from([ax * b + a * bx, ay * b + a * by]))
    }
}

/// Goldstein–Price polynomial, `n = 2`.
pub fn goldstein_price() -> SharedObjective {
    Arc::new(GoldsteinPrice)
}

/// The nonconvex corpus, with selectable dimensions set to [`CORPUS_DIM`].
pub fn corpus() -> Vec<SharedObjective> {
    let n = CORPUS_DIM;
    vec![
        brown_badly_scaled(),
        gulf_rd(),
        extended_rosenbrock(n),
        goldstein_price(),
        freudenstein_roth(),
        powell_badly_scaled(),
        beale(),
        helical_valley(),
        box_3d(),
        wood(),
        extended_powell_singular(n),
        variably_dimensioned(n),
        trigonometric(n),
        broyden_tridiagonal(n),
        discrete_boundary_value(n),
    ]
}

//! Dense vectors, symmetric matrices and small symmetric solves.
//!
//! Everything here is sized for problems with a few hundred unknowns at
//! most. Matrices are stored densely with both triangles mirrored.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Deref, Index, IndexMut};

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum NumericsError {
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("matrix is not positive definite (pivot {pivot} is {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("system is numerically singular (pivot {pivot})")]
    Singular { pivot: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// A dense real vector.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn zeros(n: usize) -> Self {
        Vector(vec![0.0; n])
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize) -> f64) -> Self {
        Vector((0..n).map(f).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn norm(&self) -> f64 {
        norm2(&self.0)
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| f64::max(m, v.abs()))
    }

    pub fn scaled(&self, a: f64) -> Vector {
        Vector(self.0.iter().map(|v| a * v).collect())
    }

    /// `self + a * other`
    pub fn add_scaled(&self, a: f64, other: &Vector) -> Vector {
        debug_assert_eq!(self.len(), other.len());
        Vector(self.0.iter().zip(&other.0).map(|(x, y)| x + a * y).collect())
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        self.add_scaled(-1.0, other)
    }

    /// `a * self + b * other`
    pub fn lin_comb(a: f64, u: &Vector, b: f64, v: &Vector) -> Vector {
        debug_assert_eq!(u.len(), v.len());
        Vector(u.0.iter().zip(&v.0).map(|(x, y)| a * x + b * y).collect())
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Vector(v)
    }
}

impl From<&[f64]> for Vector {
    fn from(v: &[f64]) -> Self {
        Vector(v.to_vec())
    }
}

impl<const N: usize> From<[f64; N]> for Vector {
    fn from(v: [f64; N]) -> Self {
        Vector(v.to_vec())
    }
}

impl Deref for Vector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Euclidean norm, rescaled so that very large or very small entries do not
/// overflow or underflow.
pub fn norm2(u: &[f64]) -> f64 {
    let scale = u.iter().fold(0.0, |m, v| f64::max(m, v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let ss: f64 = u.iter().map(|v| (v / scale) * (v / scale)).sum();
    scale * libm::sqrt(ss)
}

/// Cosine of the angle between `u` and `v`, clamped to `[-1, 1]`.
pub fn cos_angle(u: &[f64], v: &[f64]) -> Result<f64, NumericsError> {
    let nu = norm2(u);
    let nv = norm2(v);
    if nu == 0.0 || nv == 0.0 {
        return Err(NumericsError::ZeroVector);
    }
    // Normalizing first keeps the dot product in range for badly scaled data.
    let c: f64 = u.iter().zip(v).map(|(a, b)| (a / nu) * (b / nv)).sum();
    Ok(c.clamp(-1.0, 1.0))
}

/// Dense symmetric matrix. Both triangles are stored and every write is
/// mirrored, so symmetry is exact.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, 1.0)
    }

    pub fn scaled_identity(n: usize, a: f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = a;
        }
        m
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, v) in d.iter().enumerate() {
            m.set(i, i, *v);
        }
        m
    }

    /// Builds a matrix from the lower triangle `f(i, j)` with `j <= i`.
    pub fn from_lower(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Symmetrizes an arbitrary row-major square matrix as `(A + A^T) / 2`.
    pub fn from_rows_symmetrized(n: usize, rows: &[f64]) -> Self {
        assert_eq!(rows.len(), n * n);
        Self::from_lower(n, |i, j| 0.5 * (rows[i * n + j] + rows[j * n + i]))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        let cur = self.get(i, j);
        self.set(i, j, cur + v);
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vector {
        assert_eq!(v.len(), self.n);
        Vector::from_fn(self.n, |i| dot(self.row(i), v))
    }

    pub fn quad_form(&self, v: &[f64]) -> f64 {
        dot(v, &self.mul_vec(v))
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn scaled(&self, a: f64) -> SymMatrix {
        SymMatrix { n: self.n, data: self.data.iter().map(|v| a * v).collect() }
    }

    pub fn add_diagonal(&self, lambda: f64) -> SymMatrix {
        let mut m = self.clone();
        for i in 0..self.n {
            m.data[i * self.n + i] += lambda;
        }
        m
    }

    /// `self += a * u u^T`
    pub fn add_outer(&mut self, a: f64, u: &[f64]) {
        assert_eq!(u.len(), self.n);
        let n = self.n;
        for i in 0..n {
            let ai = a * u[i];
            for j in 0..n {
                self.data[i * n + j] += ai * u[j];
            }
        }
    }

    pub fn add_matrix(&mut self, other: &SymMatrix) {
        assert_eq!(self.n, other.n);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }
}

/// Lower-triangular factor `L` with `S = L L^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor {
    n: usize,
    /// Row-major, upper part is zero.
    l: Vec<f64>,
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.l[i * self.n + j]
    }

    pub fn min_diagonal(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).fold(f64::INFINITY, f64::min)
    }

    /// Solves `L L^T x = b`.
    pub fn solve(&self, b: &[f64]) -> Vector {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut y = b.to_vec();
        for i in 0..n {
            let s = dot(&self.l[i * n..i * n + i], &y[..i]);
            y[i] = (y[i] - s) / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = 0.0;
            for k in i + 1..n {
                s += self.l[k * n + i] * y[k];
            }
            y[i] = (y[i] - s) / self.l[i * n + i];
        }
        Vector(y)
    }

    /// Reassembles `L L^T`.
    pub fn reconstruct(&self) -> SymMatrix {
        let n = self.n;
        SymMatrix::from_lower(n, |i, j| dot(&self.l[i * n..i * n + j + 1], &self.l[j * n..j * n + j + 1]))
    }
}

/// Cholesky factorization. `NotPositiveDefinite::pivot` is the zero-based
/// column at which a nonpositive pivot appeared.
pub fn cholesky(s: &SymMatrix) -> Result<CholeskyFactor, NumericsError> {
    let n = s.n;
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = s.get(j, j);
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !(d > 0.0) {
            return Err(NumericsError::NotPositiveDefinite { pivot: j, value: d });
        }
        let ljj = libm::sqrt(d);
        l[j * n + j] = ljj;
        for i in j + 1..n {
            let mut v = s.get(i, j);
            for k in 0..j {
                v -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = v / ljj;
        }
    }
    Ok(CholeskyFactor { n, l })
}

/// Relative pivot threshold below which a system is declared singular.
pub const SINGULAR_TOL: f64 = 1e-14;

/// Solves `S d = b`. Tries Cholesky first and falls back to Gaussian
/// elimination with partial pivoting for indefinite `S`.
pub fn solve_symmetric(s: &SymMatrix, b: &[f64]) -> Result<Vector, NumericsError> {
    let n = s.dim();
    if b.len() != n {
        return Err(NumericsError::DimensionMismatch { expected: n, got: b.len() });
    }
    let fro = s.frobenius_norm();
    let tol = SINGULAR_TOL * fro;
    if fro == 0.0 {
        return Err(NumericsError::Singular { pivot: 0 });
    }
    match cholesky(s) {
        Ok(f) => {
            // squared diagonal of L = elimination pivots
            for i in 0..n {
                let p = f.get(i, i) * f.get(i, i);
                if p < tol {
                    return Err(NumericsError::Singular { pivot: i });
                }
            }
            let mut x = f.solve(b);
            let r = residual(s, &x, b);
            let dx = f.solve(&r);
            x = x.add_scaled(1.0, &dx);
            Ok(x)
        }
        Err(_) => {
            let lu = LuFactor::new(s, tol)?;
            let mut x = lu.solve(b);
            let r = residual(s, &x, b);
            let dx = lu.solve(&r);
            x = x.add_scaled(1.0, &dx);
            Ok(x)
        }
    }
}

fn residual(s: &SymMatrix, x: &[f64], b: &[f64]) -> Vector {
    let sx = s.mul_vec(x);
    Vector::from_fn(b.len(), |i| b[i] - sx[i])
}

struct LuFactor {
    n: usize,
    a: Vec<f64>,
    perm: Vec<usize>,
}

impl LuFactor {
    fn new(s: &SymMatrix, tol: f64) -> Result<Self, NumericsError> {
        let n = s.dim();
        let mut a = s.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, a[i * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pmax >= tol) || pmax == 0.0 {
                return Err(NumericsError::Singular { pivot: k });
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let piv = a[k * n + k];
            for i in k + 1..n {
                let m = a[i * n + k] / piv;
                a[i * n + k] = m;
                if m != 0.0 {
                    for j in k + 1..n {
                        a[i * n + j] -= m * a[k * n + j];
                    }
                }
            }
        }
        Ok(LuFactor { n, a, perm })
    }

    fn solve(&self, b: &[f64]) -> Vector {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s = dot(&self.a[i * n..i * n + i], &y[..i]);
            y[i] -= s;
        }
        for i in (0..n).rev() {
            let s = dot(&self.a[i * n + i + 1..(i + 1) * n], &y[i + 1..]);
            y[i] = (y[i] - s) / self.a[i * n + i];
        }
        Vector(y)
    }
}


#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn rel_residual(s: &SymMatrix, d: &[f64], b: &[f64]) -> f64 {
        let r = residual(s, d, b);
        r.norm() / f64::max(norm2(b), 1e-300)
    }

    #[test]
    fn cos_angle_basic_cases() {
        assert_eq!(cos_angle(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(cos_angle(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(cos_angle(&[0.0, 0.0], &[0.0, 1.0]), Err(NumericsError::ZeroVector));
    }

    #[test]
    fn cos_angle_matches_plain_formula() {
        // u.v = -2 + 2 + 1.5 = 1.5, |u| = sqrt(14), |v| = sqrt(5.25)
        let expected = 1.5 / (14.0f64.sqrt() * 5.25f64.sqrt());
        let c = cos_angle(&[1.0, 2.0, 3.0], &[-2.0, 1.0, 0.5]).unwrap();
        assert!((c - expected).abs() < 1e-15);
        assert!((c - 0.17496355305594).abs() < 1e-13);
    }

    #[test]
    fn cholesky_identity_and_hand_factor() {
        let f = cholesky(&SymMatrix::identity(3)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(f.get(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }
        let s = SymMatrix::from_lower(2, |i, j| [[4.0, 0.0], [2.0, 10.0]][i][j]);
        let f = cholesky(&s).unwrap();
        assert_eq!(f.get(0, 0), 2.0);
        assert_eq!(f.get(1, 0), 1.0);
        assert_eq!(f.get(1, 1), 3.0);
        assert_eq!(f.get(0, 1), 0.0);
    }

    #[test]
    fn cholesky_rejects_indefinite_at_second_pivot() {
        let s = SymMatrix::from_lower(2, |i, j| [[1.0, 0.0], [2.0, 1.0]][i][j]);
        match cholesky(&s) {
            Err(NumericsError::NotPositiveDefinite { pivot, value }) => {
                assert_eq!(pivot, 1);
                assert_eq!(value, -3.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cholesky_reconstruction_error_is_small() {
        let mut r = rng(7);
        for n in [1, 3, 10, 40] {
            let s = random_spd(&mut r, n);
            let f = cholesky(&s).unwrap();
            let mut diff = f.reconstruct();
            diff.add_matrix(&s.scaled(-1.0));
            assert!(diff.frobenius_norm() <= 1e-10 * (1.0 + s.frobenius_norm()));
            assert!(f.min_diagonal() > 0.0);
        }
    }

    #[test]
    fn cholesky_agrees_with_jacobi_eigenvalues() {
        let mut r = rng(11);
        let mut seen = [0usize; 2];
        for trial in 0..400 {
            let n = 1 + trial % 8;
            let s = random_sym(&mut r, n).add_diagonal(r.random_range(-0.5..2.0));
            let eig = jacobi_eigenvalues(&s);
            let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
            if min.abs() < 1e-9 {
                continue;
            }
            assert_eq!(cholesky(&s).is_ok(), min > 0.0, "n={n} min eig={min}");
            seen[(min > 0.0) as usize] += 1;
        }
        assert!(seen[0] > 20 && seen[1] > 20, "{seen:?}");
    }

    #[test]
    fn solve_trivial_systems() {
        let g = [3.0, -1.0, 2.5];
        assert_eq!(solve_symmetric(&SymMatrix::identity(3), &g).unwrap().as_slice(), &g);
        let d = solve_symmetric(&SymMatrix::diagonal(&[2.0, 4.0]), &[2.0, 8.0]).unwrap();
        assert_eq!(d.as_slice(), &[1.0, 2.0]);
    }

    #[test]
    fn solve_random_spd_residual() {
        let mut r = rng(3);
        let s = random_spd(&mut r, 10);
        let b: Vec<f64> = (0..10).map(|_| r.random_range(-1.0..1.0)).collect();
        let d = solve_symmetric(&s, &b).unwrap();
        assert!(rel_residual(&s, &d, &b) <= 1e-8);
    }

    #[test]
    fn solve_indefinite_uses_pivoting() {
        let mut r = rng(5);
        for _ in 0..200 {
            let n = 2 + r.random_range(0..12usize);
            let s = random_sym(&mut r, n);
            let b: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
            if let Ok(d) = solve_symmetric(&s, &b) {
                assert!(rel_residual(&s, &d, &b) <= 1e-8);
            }
        }
        // zero leading pivot that Cholesky cannot handle
        let s = SymMatrix::from_lower(2, |i, j| [[0.0, 0.0], [1.0, 0.0]][i][j]);
        let d = solve_symmetric(&s, &[2.0, 3.0]).unwrap();
        assert_eq!(d.as_slice(), &[3.0, 2.0]);
    }

    #[test]
    fn solve_reports_singular() {
        let s = SymMatrix::from_lower(2, |i, j| [[1.0, 0.0], [1.0, 1.0]][i][j]);
        assert!(matches!(solve_symmetric(&s, &[1.0, 1.0]), Err(NumericsError::Singular { .. })));
        let s = SymMatrix::diagonal(&[1.0, 0.0]);
        assert!(matches!(solve_symmetric(&s, &[1.0, 1.0]), Err(NumericsError::Singular { .. })));
        assert!(matches!(solve_symmetric(&SymMatrix::zeros(2), &[1.0, 1.0]), Err(NumericsError::Singular { .. })));
        assert!(matches!(
            solve_symmetric(&SymMatrix::identity(2), &[1.0]),
            Err(NumericsError::DimensionMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn cos_angle_of_parallel_vectors(u in proptest::collection::vec(-1e3..1e3f64, 1..8), c in 1e-3..1e3f64) {
            prop_assume!(norm2(&u) > 1e-6);
            let pos: Vec<f64> = u.iter().map(|v| c * v).collect();
            let neg: Vec<f64> = u.iter().map(|v| -c * v).collect();
            prop_assert!((cos_angle(&u, &pos).unwrap() - 1.0).abs() <= 2.0 * f64::EPSILON);
            prop_assert!((cos_angle(&u, &neg).unwrap() + 1.0).abs() <= 2.0 * f64::EPSILON);
        }

        #[test]
        fn spd_solve_residual_bound(seed in 0u64..1000, n in 1usize..30) {
            let mut r = rng(seed);
            let s = random_spd(&mut r, n);
            let b: Vec<f64> = (0..n).map(|_| r.random_range(-10.0..10.0)).collect();
            let d = solve_symmetric(&s, &b).unwrap();
            prop_assert!(rel_residual(&s, &d, &b) <= 1e-8);
        }
    }
}

//! L2-regularized logistic regression over a sparse labelled dataset.

use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Objective, ProblemError};
use crate::numerics::{SymMatrix, Vector};

/// One labelled example. Feature indices are 1-based as in LIBSVM files.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub features: Vec<(u32, f64)>,
    pub label: f64,
}

impl Row {
    fn dot(&self, x: &[f64]) -> f64 {
        self.features.iter().map(|&(j, v)| v * x[j as usize - 1]).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub rows: Vec<Row>,
    pub n_features: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Checks labels are +-1 and indices lie in `1..=n_features`.
    pub fn validate(&self) -> bool {
        self.rows.iter().all(|r| {
            (r.label == 1.0 || r.label == -1.0)
                && r.features.iter().all(|&(j, _)| j >= 1 && j as usize <= self.n_features)
        })
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset { rows: idx.iter().map(|&i| self.rows[i].clone()).collect(), n_features: self.n_features }
    }
}

/// `log(1 + exp(t))` without overflow.
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + libm::log1p(libm::exp(-t))
    } else {
        libm::log1p(libm::exp(t))
    }
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + libm::exp(-t))
    } else {
        let e = libm::exp(t);
        e / (1.0 + e)
    }
}

/// `f(x) = (1/N) sum log(1 + exp(-b_i a_i^T x)) + (mu/2) ||x||^2`.
pub struct Logistic {
    data: Dataset,
    mu: f64,
    name: String,
}

impl Logistic {
    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    fn check(&self, x: &[f64]) -> Result<(), ProblemError> {
        if x.len() != self.data.n_features {
            return Err(ProblemError::DimensionMismatch { expected: self.data.n_features, got: x.len() });
        }
        Ok(())
    }
}

pub fn logistic_objective(data: Dataset, mu: f64) -> Logistic {
    assert!(mu >= 0.0, "regularization must be nonnegative");
    assert!(!data.is_empty(), "empty dataset");
    Logistic { data, mu, name: String::from("logistic") }
}

impl Objective for Logistic {
    fn name(&self) -> &str {
        &self.name
    }
    fn dim(&self) -> usize {
        self.data.n_features
    }
    fn default_start(&self) -> Vector {
        Vector::zeros(self.data.n_features)
    }
    fn value(&self, x: &[f64]) -> Result<f64, ProblemError> {
        self.check(x)?;
        let n = self.data.len() as f64;
        let loss: f64 = self.data.rows.iter().map(|r| softplus(-r.label * r.dot(x))).sum();
        Ok(loss / n + 0.5 * self.mu * x.iter().map(|v| v * v).sum::<f64>())
    }
    fn gradient(&self, x: &[f64]) -> Result<Vector, ProblemError> {
        self.check(x)?;
        let n = self.data.len() as f64;
        let mut g = Vector::from_fn(x.len(), |j| self.mu * x[j]);
        for r in &self.data.rows {
            let w = -r.label * sigmoid(-r.label * r.dot(x)) / n;
            for &(j, v) in &r.features {
                g[j as usize - 1] += w * v;
            }
        }
        Ok(g)
    }
    fn has_hessian(&self) -> bool {
        true
    }
    fn hessian(&self, x: &[f64]) -> Result<SymMatrix, ProblemError> {
        self.check(x)?;
        let n = self.data.len() as f64;
        let mut h = SymMatrix::scaled_identity(x.len(), self.mu);
        for r in &self.data.rows {
            let z = r.dot(x);
            let w = sigmoid(z) * sigmoid(-z) / n;
            for (a, &(j, vj)) in r.features.iter().enumerate() {
                for (b, &(k, vk)) in r.features[..=a].iter().enumerate() {
                    // a repeated index contributes to its diagonal from both (a, b) and (b, a)
                    let c = if j == k && a != b { 2.0 } else { 1.0 };
                    h.add_to(j as usize - 1, k as usize - 1, c * w * vj * vk);
                }
            }
        }
        Ok(h)
    }
}

pub const NUM_FOLDS: usize = 10;

/// Assignment of rows to cross-validation folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CvSplit {
    pub fold_of: Vec<usize>,
}

impl CvSplit {
    pub fn fold_sizes(&self) -> [usize; NUM_FOLDS] {
        let mut s = [0; NUM_FOLDS];
        for &f in &self.fold_of {
            s[f] += 1;
        }
        s
    }

    pub fn test_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len()).filter(|&i| self.fold_of[i] == fold).collect()
    }

    /// Every row outside `fold`.
    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len()).filter(|&i| self.fold_of[i] != fold).collect()
    }
}

/// Shuffled, balanced 10-fold assignment of `n_rows` rows.
pub fn cv_folds(n_rows: usize, seed: u64) -> CvSplit {
    assert!(n_rows >= NUM_FOLDS, "need at least {NUM_FOLDS} rows");
    let mut order: Vec<usize> = (0..n_rows).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..n_rows).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    let mut fold_of = alloc::vec![0; n_rows];
    for (pos, &row) in order.iter().enumerate() {
        fold_of[row] = pos % NUM_FOLDS;
    }
    CvSplit { fold_of }
}

#[cfg(test)]
mod tests {
    use super::super::{default_fd_step, fd_gradient_check, hessian_vector_check};
    use super::*;
    use crate::numerics::cholesky;
    use crate::numerics::testutil::rng;
    use alloc::vec;

    fn synthetic(seed: u64, n_rows: usize, n_feat: usize) -> Dataset {
        let mut r = rng(seed);
        let rows = (0..n_rows)
            .map(|_| {
                let label = if r.random_bool(0.5) { 1.0 } else { -1.0 };
                let features = (1..=n_feat as u32)
                    .filter_map(|j| r.random_bool(0.7).then(|| (j, r.random_range(-1.0..1.0) + 0.5 * label)))
                    .collect();
                Row { features, label }
            })
            .collect();
        Dataset { rows, n_features: n_feat }
    }

    #[test]
    fn value_and_gradient_at_zero() {
        let d = synthetic(1, 20, 5);
        let n = d.len() as f64;
        let mut expected = vec![0.0; 5];
        for r in &d.rows {
            for &(j, v) in &r.features {
                expected[j as usize - 1] -= r.label * v / (2.0 * n);
            }
        }
        let obj = logistic_objective(d, 0.3);
        let x = [0.0; 5];
        assert!((obj.value(&x).unwrap() - core::f64::consts::LN_2).abs() < 1e-15);
        let g = obj.gradient(&x).unwrap();
        for j in 0..5 {
            assert!((g[j] - expected[j]).abs() < 1e-15);
        }
    }

    #[test]
    fn gradient_and_hessian_match_fd() {
        let obj = logistic_objective(synthetic(2, 20, 5), 0.05);
        let mut r = rng(3);
        for _ in 0..6 {
            let x: Vec<f64> = (0..5).map(|_| r.random_range(-2.0..2.0)).collect();
            assert!(fd_gradient_check(&obj, &x, default_fd_step()).unwrap() <= 1e-6);
            let v: Vec<f64> = (0..5).map(|_| r.random_range(-1.0..1.0)).collect();
            assert!(hessian_vector_check(&obj, &x, &v).unwrap() <= 1e-6);
        }
    }

    #[test]
    fn stable_for_large_margins() {
        let d = Dataset { rows: vec![Row { features: vec![(1, 1.0)], label: 1.0 }], n_features: 1 };
        let obj = logistic_objective(d, 0.0);
        assert!((obj.value(&[-1000.0]).unwrap() - 1000.0).abs() < 1e-9);
        assert!(obj.value(&[1000.0]).unwrap() >= 0.0);
        assert!(obj.gradient(&[-1000.0]).unwrap()[0].is_finite());
    }

    #[test]
    fn hessian_is_spd_with_regularization() {
        let obj = logistic_objective(synthetic(4, 30, 8), 1.0 / 30.0);
        let mut r = rng(5);
        for _ in 0..20 {
            let x: Vec<f64> = (0..8).map(|_| r.random_range(-3.0..3.0)).collect();
            assert!(cholesky(&obj.hessian(&x).unwrap()).is_ok());
        }
    }

    #[test]
    fn folds_are_balanced_and_deterministic() {
        let s = cv_folds(20, 1);
        assert!(s.fold_sizes().iter().all(|&k| k == 2));
        let s = cv_folds(23, 1);
        let sizes = s.fold_sizes();
        assert!(sizes.iter().all(|&k| k == 2 || k == 3));
        assert_eq!(sizes.iter().sum::<usize>(), 23);
        assert_eq!(cv_folds(23, 9), cv_folds(23, 9));
        assert_ne!(cv_folds(100, 9), cv_folds(100, 10));
        let train = s.train_rows(4);
        let test = s.test_rows(4);
        assert_eq!(train.len() + test.len(), 23);
        assert!(test.iter().all(|t| !train.contains(t)));
    }
}

//! Seeded two-class Gaussian clouds standing in for downloaded datasets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use sdg_core::problems::{Dataset, Row};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthParams {
    pub rows: usize,
    pub features: usize,
    /// Distance between the class means in units of the noise level.
    pub separation: f64,
    /// Probability that a feature is stored for a row.
    pub density: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams { rows: 500, features: 30, separation: 1.0, density: 1.0 }
    }
}

/// Class `+-1` with equal probability; features `label * (sep / 2) * u + N(0, I)`
/// with `u` a random unit vector shared by all rows.
pub fn gaussian_clouds(p: &SynthParams, seed: u64) -> Dataset {
    assert!(p.rows > 0 && p.features > 0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u: Vec<f64> = (0..p.features).map(|_| StandardNormal.sample(&mut rng)).collect();
    let nu = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    u.iter_mut().for_each(|v| *v /= nu);
    let rows = (0..p.rows)
        .map(|_| {
            let label = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let mut features = Vec::with_capacity(p.features);
            for (j, uj) in u.iter().enumerate() {
                let noise: f64 = StandardNormal.sample(&mut rng);
                let keep = p.density >= 1.0 || rng.random_bool(p.density.max(0.0));
                if keep {
                    features.push((j as u32 + 1, label * 0.5 * p.separation * uj + noise));
                }
            }
            Row { features, label }
        })
        .collect();
    Dataset { rows, n_features: p.features }
}

//! Shot-noise model for quantum measurements.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Gaussian noise of standard deviation `epsilon` on measured expectations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    pub epsilon: f64,
    /// Perturb loss and gradient evaluations during VQE.
    #[serde(default = "yes")]
    pub vqe: bool,
    /// Perturb each Pauli expectation during tomography.
    #[serde(default = "yes")]
    pub tomography: bool,
    #[serde(default)]
    pub seed: u64,
}

fn yes() -> bool {
    true
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self {
            epsilon: 0.0,
            vqe: false,
            tomography: false,
            seed: 0,
        }
    }

    pub fn both(epsilon: f64, seed: u64) -> Self {
        Self {
            epsilon,
            vqe: true,
            tomography: true,
            seed,
        }
    }

    pub fn vqe_active(&self) -> bool {
        self.vqe && self.epsilon > 0.0
    }

    pub fn tomography_active(&self) -> bool {
        self.tomography && self.epsilon > 0.0
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::noiseless()
    }
}

/// Noise source plus counters for the measurements a network performs.
#[derive(Clone, Debug)]
pub struct Meter {
    pub noise: NoiseModel,
    rng: ChaCha8Rng,
    /// Measurement settings used by tomography so far.
    pub tomography_settings: u64,
    /// Loss evaluations performed by VQE so far.
    pub vqe_evaluations: u64,
}

impl Meter {
    pub fn new(noise: NoiseModel) -> Self {
        Self {
            noise,
            rng: ChaCha8Rng::seed_from_u64(noise.seed),
            tomography_settings: 0,
            vqe_evaluations: 0,
        }
    }

    /// One `N(0, (epsilon * scale)^2)` draw.
    pub fn draw(&mut self, scale: f64) -> f64 {
        let z: f64 = StandardNormal.sample(&mut self.rng);
        z * self.noise.epsilon * scale
    }
}

impl Default for Meter {
    fn default() -> Self {
        Self::new(NoiseModel::noiseless())
    }
}

/// `exact` plus one `N(0, epsilon^2)` draw; the draw is skipped when
/// `epsilon` is zero.
pub fn noisy_expectation(exact: f64, epsilon: f64, rng: &mut impl rand::Rng) -> f64 {
    if epsilon == 0.0 {
        return exact;
    }
    let z: f64 = StandardNormal.sample(rng);
    exact + epsilon * z
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 20000;
        let eps = 0.1;
        let xs: Vec<f64> = (0..n).map(|_| noisy_expectation(1.0, eps, &mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 1.0).abs() < 4.0 * eps / (n as f64).sqrt());
        assert!((var.sqrt() - eps).abs() < 0.02 * eps);
    }

    #[test]
    fn seeded_meter_is_reproducible() {
        let mut a = Meter::new(NoiseModel::both(0.5, 9));
        let mut b = Meter::new(NoiseModel::both(0.5, 9));
        for _ in 0..10 {
            assert_eq!(a.draw(1.0), b.draw(1.0));
        }
    }
}

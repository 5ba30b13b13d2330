//! One-dimensional Gaussian mixtures.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::DensityError;
use crate::math::{exp, ln, sqrt};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component {
    pub weight: f64,
    pub mean: f64,
    pub variance: f64,
}

/// `Σ wᵢ N(x; mᵢ, vᵢ)` with weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureDensity {
    components: Vec<Component>,
}

impl MixtureDensity {
    pub fn new(weights: &[f64], means: &[f64], variances: &[f64]) -> Result<Self, DensityError> {
        if weights.len() != means.len() || weights.len() != variances.len() {
            return Err(DensityError::LengthMismatch {
                weights: weights.len(),
                means: means.len(),
                variances: variances.len(),
            });
        }
        if weights.is_empty() {
            return Err(DensityError::Empty);
        }
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|w| !(*w >= 0.0)) || (sum - 1.0).abs() > 1e-12 {
            return Err(DensityError::BadWeights(sum));
        }
        let mut components = Vec::with_capacity(weights.len());
        for ((&weight, &mean), &variance) in weights.iter().zip(means).zip(variances) {
            if !mean.is_finite() {
                return Err(DensityError::BadMean(mean));
            }
            if !(variance > 0.0 && variance.is_finite()) {
                return Err(DensityError::BadVariance(variance));
            }
            components.push(Component {
                weight,
                mean,
                variance,
            });
        }
        Ok(MixtureDensity { components })
    }

    /// Single Gaussian with the given mean and standard deviation.
    pub fn gaussian(mean: f64, std: f64) -> Result<Self, DensityError> {
        Self::new(&[1.0], &[mean], &[std * std])
    }

    /// `0.33 N(-1, 0.0625) + 0.67 N(2, 2)`, the mixture of the univariate experiment.
    pub fn reference_mixture() -> Self {
        Self::new(&[0.33, 0.67], &[-1.0, 2.0], &[0.0625, 2.0]).expect("valid preset")
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.components
            .iter()
            .map(|c| {
                let d = x - c.mean;
                c.weight * exp(-0.5 * d * d / c.variance) / sqrt(2.0 * core::f64::consts::PI * c.variance)
            })
            .sum()
    }

    /// `ln p(x)` by log-sum-exp, finite far into the tails.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        let terms = self.components.iter().filter(|c| c.weight > 0.0).map(|c| {
            let d = x - c.mean;
            ln(c.weight) - 0.5 * d * d / c.variance - 0.5 * ln(c.variance) - LN_SQRT_2PI
        });
        let max = terms.clone().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return max;
        }
        max + ln(terms.map(|t| exp(t - max)).sum::<f64>())
    }

    pub fn mean(&self) -> f64 {
        self.components.iter().map(|c| c.weight * c.mean).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.components
            .iter()
            .map(|c| c.weight * (c.variance + (c.mean - m) * (c.mean - m)))
            .sum()
    }

    pub fn std(&self) -> f64 {
        sqrt(self.variance())
    }

    /// Largest component standard deviation.
    pub fn max_component_std(&self) -> f64 {
        self.components
            .iter()
            .map(|c| sqrt(c.variance))
            .fold(0.0, f64::max)
    }

    /// `[min mᵢ - k σ_max, max mᵢ + k σ_max]`.
    pub fn span(&self, k: f64) -> (f64, f64) {
        let s = self.max_component_std();
        let lo = self.components.iter().map(|c| c.mean).fold(f64::INFINITY, f64::min);
        let hi = self.components.iter().map(|c| c.mean).fold(f64::NEG_INFINITY, f64::max);
        (lo - k * s, hi + k * s)
    }

    /// `n` i.i.d. draws, reproducible from `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = alloc::vec![0.0; n];
        self.sample_into(&mut rng, &mut out);
        out
    }

    /// Fill `out` with draws: pick a component by weight, then a Gaussian.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let single = self.components.len() == 1;
        for x in out.iter_mut() {
            let c = if single {
                &self.components[0]
            } else {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut chosen = self.components.last().expect("non-empty");
                for c in &self.components {
                    acc += c.weight;
                    if u < acc {
                        chosen = c;
                        break;
                    }
                }
                chosen
            };
            let z: f64 = rng.sample(StandardNormal);
            *x = c.mean + sqrt(c.variance) * z;
        }
    }
}

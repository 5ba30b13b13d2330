//! First-order update rules over flat parameter blocks.

use alloc::vec::Vec;

use crate::math::{powf, sqrt};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamParams {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        AdamParams {
            alpha: 0.0002,
            beta1: 0.5,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Euclidean norm, accumulated left to right.
pub fn l2_norm(v: &[f64]) -> f64 {
    sqrt(v.iter().map(|x| x * x).sum())
}

/// Rescale `grad` in place to norm `max` if it is longer. Shorter gradients
/// are not touched at all.
pub fn clip_by_norm(grad: &mut [f64], max: f64) -> bool {
    let norm = l2_norm(grad);
    if norm > max {
        let scale = max / norm;
        for g in grad.iter_mut() {
            *g *= scale;
        }
        true
    } else {
        false
    }
}

/// Optimizer state for one parameter block. `step` always moves against the
/// gradient it is given, so ascent callers pass the negated gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimizer {
    kind: OptimizerKind,
    lr: f64,
    adam: AdamParams,
    clip: Option<f64>,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Optimizer {
    pub fn sgd(lr: f64) -> Self {
        Optimizer {
            kind: OptimizerKind::Sgd,
            lr,
            adam: AdamParams::default(),
            clip: None,
            m: Vec::new(),
            v: Vec::new(),
            t: 0,
        }
    }

    /// Adam with learning rate `adam.alpha`.
    pub fn adam(adam: AdamParams) -> Self {
        Optimizer {
            kind: OptimizerKind::Adam,
            lr: adam.alpha,
            adam,
            clip: None,
            m: Vec::new(),
            v: Vec::new(),
            t: 0,
        }
    }

    pub fn with_clip(mut self, clip: Option<f64>) -> Self {
        self.clip = clip;
        self
    }

    pub fn kind(&self) -> OptimizerKind {
        self.kind
    }

    /// `params ← params − update(grad)`.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        let mut clipped;
        let grad = match self.clip {
            Some(max) => {
                clipped = grad.to_vec();
                if clip_by_norm(&mut clipped, max) {
                    &clipped[..]
                } else {
                    grad
                }
            }
            None => grad,
        };
        match self.kind {
            OptimizerKind::Sgd => {
                for (p, g) in params.iter_mut().zip(grad) {
                    *p -= self.lr * g;
                }
            }
            OptimizerKind::Adam => {
                if self.m.len() != params.len() {
                    self.m = alloc::vec![0.0; params.len()];
                    self.v = alloc::vec![0.0; params.len()];
                    self.t = 0;
                }
                self.t += 1;
                let AdamParams { beta1, beta2, eps, .. } = self.adam;
                let c1 = 1.0 - powf(beta1, self.t as f64);
                let c2 = 1.0 - powf(beta2, self.t as f64);
                for ((p, g), (m, v)) in params.iter_mut().zip(grad).zip(self.m.iter_mut().zip(self.v.iter_mut())) {
                    *m = beta1 * *m + (1.0 - beta1) * g;
                    *v = beta2 * *v + (1.0 - beta2) * g * g;
                    *p -= self.lr * (*m / c1) / (sqrt(*v / c2) + eps);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sgd_step() {
        let mut p = [1.0, -2.0];
        Optimizer::sgd(0.1).step(&mut p, &[2.0, -1.0]);
        assert_eq!(p, [0.8, -1.9]);
    }

    #[test]
    fn adam_first_step_is_lr_sized() {
        // With bias correction the first update is lr · g/|g|.
        let mut p = [0.0, 0.0];
        let mut opt = Optimizer::adam(AdamParams::default());
        opt.step(&mut p, &[3.0, -0.01]);
        assert!((p[0] + 0.0002).abs() < 1e-9);
        assert!((p[1] - 0.0002).abs() < 1e-9);
    }

    #[test]
    fn adam_minimizes_quadratic() {
        let mut p = [3.0];
        let mut opt = Optimizer::adam(AdamParams {
            alpha: 0.05,
            ..Default::default()
        });
        for _ in 0..2000 {
            let g = [2.0 * (p[0] - 1.0)];
            opt.step(&mut p, &g);
        }
        assert!((p[0] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn clipping_below_threshold_is_bitwise_noop() {
        let g = [0.3, -0.4000000000000001, 1e-17];
        let mut a = [0.123456789, 2.5, -7.0];
        let mut b = a;
        Optimizer::sgd(0.01).step(&mut a, &g);
        Optimizer::sgd(0.01).with_clip(Some(0.5000001)).step(&mut b, &g);
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));

        let mut a = [0.1; 3];
        let mut b = a;
        let mut oa = Optimizer::adam(AdamParams::default());
        let mut ob = Optimizer::adam(AdamParams::default()).with_clip(Some(10.0));
        for _ in 0..5 {
            oa.step(&mut a, &g);
            ob.step(&mut b, &g);
        }
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn clipping_above_threshold_rescales() {
        let mut g = [3.0, 4.0];
        assert!(clip_by_norm(&mut g, 1.0));
        assert!((l2_norm(&g) - 1.0).abs() < 1e-15);
        assert!((g[0] - 0.6).abs() < 1e-15);
    }
}

//! Convergence certificate for the single-step method on quadratic saddles.
//!
//! `F(θ, ω) = ½θᵀAθ − ½ωᵀBω + θᵀCω` has the symmetric Hessian
//! `H = [[A, C], [Cᵀ, −B]]`, so with `π = (θ, ω)` the gradient is `Hπ`,
//! `J(π) = ½‖Hπ‖²` and the smoothness constant of `J` is `λ_max(H²)`.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::SaddleError;
use crate::math::sqrt;
use crate::trainer::SaddleObjective;

/// Relative slack on the geometric envelope.
pub const RATE_SLACK: f64 = 1e-9;
/// Slack on the sufficient-decrease inner product.
pub const DECREASE_SLACK: f64 = 1e-9;
/// Relative tolerance of the power iteration for `L`.
pub const POWER_TOL: f64 = 1e-10;
/// Per-step ratios are only reported while `J` stays above this; below it
/// the iterates approach the subnormal range.
const RATIO_FLOOR: f64 = 1e-200;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticSaddle {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 1 {
        return m[(0, 0)];
    }
    SymmetricEigen::new(m.clone()).eigenvalues.min()
}

fn is_symmetric(m: &DMatrix<f64>) -> bool {
    let scale = m.amax().max(1.0);
    (m - m.transpose()).amax() <= 1e-12 * scale
}

impl QuadraticSaddle {
    /// `A` is `n×n`, `B` is `m×m`, `C` is `n×m`; `A` and `B` must be symmetric
    /// positive definite.
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>) -> Result<Self, SaddleError> {
        if !a.is_square() || !b.is_square() || a.nrows() == 0 || b.nrows() == 0 {
            return Err(SaddleError::Dimension("A and B must be non-empty and square"));
        }
        if c.nrows() != a.nrows() || c.ncols() != b.nrows() {
            return Err(SaddleError::Dimension("C must be dim(θ) × dim(ω)"));
        }
        if !is_symmetric(&a) || min_eigenvalue(&a) <= 0.0 {
            return Err(SaddleError::NotPositiveDefinite("A"));
        }
        if !is_symmetric(&b) || min_eigenvalue(&b) <= 0.0 {
            return Err(SaddleError::NotPositiveDefinite("B"));
        }
        Ok(QuadraticSaddle { a, b, c })
    }

    /// One-dimensional instance.
    pub fn scalar(a: f64, b: f64, c: f64) -> Result<Self, SaddleError> {
        QuadraticSaddle::new(
            DMatrix::from_element(1, 1, a),
            DMatrix::from_element(1, 1, b),
            DMatrix::from_element(1, 1, c),
        )
    }

    /// Random instance with `A = QΛQᵀ`, `B` likewise, `Λ` uniform in
    /// `[δ, 4δ]` with one eigenvalue pinned at `δ`, and `‖C‖₂ ≤ δ`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, dim_theta: usize, dim_omega: usize, delta: f64) -> Result<Self, SaddleError> {
        if dim_theta == 0 || dim_omega == 0 {
            return Err(SaddleError::Dimension("dimensions must be positive"));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(SaddleError::NotPositiveDefinite("δ must be positive"));
        }
        let a = random_spd(rng, dim_theta, delta);
        let b = random_spd(rng, dim_omega, delta);
        let c = gaussian_matrix(rng, dim_theta, dim_omega);
        let norm = spectral_norm(&c);
        let target = delta * rng.random_range(0.0..=1.0);
        let c = if norm > 0.0 { c * (target / norm) } else { c };
        QuadraticSaddle::new(a, b, c)
    }

    pub fn dim_theta(&self) -> usize {
        self.a.nrows()
    }

    pub fn dim_omega(&self) -> usize {
        self.b.nrows()
    }

    pub fn dim(&self) -> usize {
        self.dim_theta() + self.dim_omega()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    /// Same instance with every block multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self, SaddleError> {
        QuadraticSaddle::new(&self.a * factor, &self.b * factor, &self.c * factor)
    }

    /// Strong convexity/concavity constant: the smaller of `λ_min(A)` and `λ_min(B)`.
    pub fn delta(&self) -> f64 {
        min_eigenvalue(&self.a).min(min_eigenvalue(&self.b))
    }

    /// Full Hessian `[[A, C], [Cᵀ, −B]]`.
    pub fn hessian(&self) -> DMatrix<f64> {
        let (n, m) = (self.dim_theta(), self.dim_omega());
        let mut h = DMatrix::zeros(n + m, n + m);
        h.view_mut((0, 0), (n, n)).copy_from(&self.a);
        h.view_mut((0, n), (n, m)).copy_from(&self.c);
        h.view_mut((n, 0), (m, n)).copy_from(&self.c.transpose());
        h.view_mut((n, n), (m, m)).copy_from(&(-&self.b));
        h
    }

    pub fn value(&self, pi: &DVector<f64>) -> Result<f64, SaddleError> {
        let (theta, omega) = self.split(pi)?;
        let quad_t = theta.dot(&(&self.a * &theta));
        let quad_w = omega.dot(&(&self.b * &omega));
        let cross = theta.dot(&(&self.c * &omega));
        Ok(0.5 * quad_t - 0.5 * quad_w + cross)
    }

    /// `(∇F, ∇̃F)` with `∇̃F = (−∇_θF, ∇_ωF)`.
    pub fn grad_field(&self, pi: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>), SaddleError> {
        let (theta, omega) = self.split(pi)?;
        let gt = &self.a * &theta + &self.c * &omega;
        let gw = self.c.transpose() * &theta - &self.b * &omega;
        let n = self.dim_theta();
        let mut grad = DVector::zeros(self.dim());
        grad.rows_mut(0, n).copy_from(&gt);
        grad.rows_mut(n, self.dim_omega()).copy_from(&gw);
        let mut tilde = grad.clone();
        tilde.rows_mut(0, n).neg_mut();
        Ok((grad, tilde))
    }

    /// `J(π) = ½‖∇F(π)‖²`.
    pub fn j_value(&self, pi: &DVector<f64>) -> Result<f64, SaddleError> {
        let (g, _) = self.grad_field(pi)?;
        Ok(0.5 * g.norm_squared())
    }

    /// `∇J(π) = H ∇F(π)`.
    pub fn grad_j(&self, pi: &DVector<f64>) -> Result<DVector<f64>, SaddleError> {
        let (g, _) = self.grad_field(pi)?;
        Ok(self.hessian() * g)
    }

    /// Lipschitz constant of `∇J`, the top eigenvalue of `HᵀH`, by power
    /// iteration to relative residual `POWER_TOL`.
    pub fn smoothness_constant(&self) -> f64 {
        let h = self.hessian();
        let m = h.transpose() * &h;
        power_iteration(&m)
    }

    /// `L` from a full symmetric eigendecomposition, as a cross-check.
    pub fn smoothness_constant_eigen(&self) -> f64 {
        let h = self.hessian();
        SymmetricEigen::new(h.transpose() * &h).eigenvalues.max()
    }

    /// `⟨∇̃F(π), ∇J(π)⟩ + δ‖∇F(π)‖²`, which is `≤ 0` when the sufficient
    /// decrease inequality holds.
    pub fn sufficient_decrease_gap(&self, pi: &DVector<f64>, delta: f64) -> Result<f64, SaddleError> {
        let (g, tilde) = self.grad_field(pi)?;
        let gj = self.hessian() * &g;
        Ok(tilde.dot(&gj) + delta * g.norm_squared())
    }

    /// Runs `π ← π + η∇̃F` for `steps` steps with `η = δ/L` and records `J`.
    pub fn simulate(&self, pi0: &DVector<f64>, steps: usize) -> Result<SaddleRun, SaddleError> {
        let delta = self.delta();
        let l = self.smoothness_constant();
        let eta = delta / l;
        let rate = 1.0 - delta * delta / (2.0 * l);
        let mut pi = pi0.clone();
        let mut trajectory = Vec::with_capacity(steps + 1);
        let mut j = Vec::with_capacity(steps + 1);
        j.push(self.j_value(&pi)?);
        trajectory.push(pi.clone());
        for _ in 0..steps {
            let (_, tilde) = self.grad_field(&pi)?;
            pi.axpy(eta, &tilde, 1.0);
            j.push(self.j_value(&pi)?);
            trajectory.push(pi.clone());
        }
        Ok(SaddleRun {
            trajectory,
            j,
            delta,
            l,
            eta,
            rate,
        })
    }

    /// Simulates and checks `J(πᵗ) ≤ (1 − δ²/2L)ᵗ J(π⁰)(1 + 1e−9)` and
    /// `J(πᵗ⁺¹) ≤ J(πᵗ)` at every step.
    pub fn verify_rate(&self, pi0: &DVector<f64>, steps: usize) -> Result<SaddleRun, SaddleError> {
        let run = self.simulate(pi0, steps)?;
        run.check()?;
        Ok(run)
    }

    fn split(&self, pi: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>), SaddleError> {
        if pi.len() != self.dim() {
            return Err(SaddleError::Dimension("π must have dim(θ) + dim(ω) entries"));
        }
        let n = self.dim_theta();
        Ok((pi.rows(0, n).into_owned(), pi.rows(n, self.dim_omega()).into_owned()))
    }
}

impl SaddleObjective for QuadraticSaddle {
    fn value(&self, theta: &[f64], omega: &[f64]) -> f64 {
        let pi = DVector::from_iterator(theta.len() + omega.len(), theta.iter().chain(omega).copied());
        QuadraticSaddle::value(self, &pi).expect("block sizes match the instance")
    }

    fn gradients(&self, theta: &[f64], omega: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let pi = DVector::from_iterator(theta.len() + omega.len(), theta.iter().chain(omega).copied());
        let (g, _) = self.grad_field(&pi).expect("block sizes match the instance");
        let n = self.dim_theta();
        (g.as_slice()[..n].to_vec(), g.as_slice()[n..].to_vec())
    }
}

/// Trajectory of the single-step method on a quadratic saddle.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleRun {
    pub trajectory: Vec<DVector<f64>>,
    /// `J(πᵗ)` for `t = 0..=steps`.
    pub j: Vec<f64>,
    pub delta: f64,
    pub l: f64,
    pub eta: f64,
    /// Guaranteed per-step contraction `1 − δ²/2L`.
    pub rate: f64,
}

impl SaddleRun {
    pub fn steps(&self) -> usize {
        self.j.len() - 1
    }

    /// Envelope `(1 − δ²/2L)ᵗ J(π⁰)` at step `t`.
    pub fn bound(&self, t: usize) -> f64 {
        libm::pow(self.rate, t as f64) * self.j[0]
    }

    /// Largest `J(πᵗ⁺¹)/J(πᵗ)` over steps where `J(πᵗ)` is well inside the
    /// normal range; 0 if there are none.
    pub fn worst_ratio(&self) -> f64 {
        self.j
            .windows(2)
            .filter(|w| w[0] > RATIO_FLOOR)
            .map(|w| w[1] / w[0])
            .fold(0.0, f64::max)
    }

    pub fn check(&self) -> Result<(), SaddleError> {
        for (t, &value) in self.j.iter().enumerate() {
            let bound = self.bound(t) * (1.0 + RATE_SLACK);
            if !(value <= bound) {
                return Err(SaddleError::RateViolation { step: t, value, bound });
            }
        }
        for (t, w) in self.j.windows(2).enumerate() {
            if w[1] > w[0] {
                return Err(SaddleError::NotMonotone {
                    step: t + 1,
                    before: w[0],
                    after: w[1],
                });
            }
        }
        Ok(())
    }
}

/// Summary of the certificate over a batch of random instances.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub instances: usize,
    pub rate_failures: usize,
    pub decrease_failures: usize,
    /// Largest `worst_ratio − (1 − δ²/2L)` seen; negative when every run
    /// beats its envelope.
    pub worst_ratio_excess: f64,
    /// Largest sufficient-decrease gap seen.
    pub worst_decrease_gap: f64,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.rate_failures == 0 && self.decrease_failures == 0 && self.worst_ratio_excess <= RATE_SLACK
    }
}

/// Random instances with `dim(θ), dim(ω)` drawn from `1..=5`, `δ` log-uniform
/// in `[0.1, 10]`, a Gaussian start and `steps` steps each, plus `points`
/// Gaussian probes of the sufficient-decrease inequality per instance.
pub fn certify<R: Rng + ?Sized>(rng: &mut R, instances: usize, points: usize, steps: usize) -> Result<Certificate, SaddleError> {
    let mut cert = Certificate {
        instances,
        rate_failures: 0,
        decrease_failures: 0,
        worst_ratio_excess: f64::NEG_INFINITY,
        worst_decrease_gap: f64::NEG_INFINITY,
    };
    for _ in 0..instances {
        let n = rng.random_range(1..=5);
        let m = rng.random_range(1..=5);
        let delta = libm::pow(10.0, rng.random_range(-1.0..=1.0));
        let s = QuadraticSaddle::random(rng, n, m, delta)?;
        let pi0 = gaussian_vector(rng, s.dim());
        let run = s.simulate(&pi0, steps)?;
        if run.check().is_err() {
            cert.rate_failures += 1;
        }
        cert.worst_ratio_excess = cert.worst_ratio_excess.max(run.worst_ratio() - run.rate);
        let d = s.delta();
        for _ in 0..points {
            let pi = gaussian_vector(rng, s.dim());
            let gap = s.sufficient_decrease_gap(&pi, d)?;
            cert.worst_decrease_gap = cert.worst_decrease_gap.max(gap);
            if gap > DECREASE_SLACK {
                cert.decrease_failures += 1;
            }
        }
    }
    Ok(cert)
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = rng.sample(StandardNormal);
        }
    }
    m
}

fn random_spd<R: Rng + ?Sized>(rng: &mut R, n: usize, delta: f64) -> DMatrix<f64> {
    let q = gaussian_matrix(rng, n, n).qr().q();
    let mut lambda: Vec<f64> = (0..n).map(|_| rng.random_range(delta..=4.0 * delta)).collect();
    let pinned = rng.random_range(0..n);
    lambda[pinned] = delta;
    let spd = &q * DMatrix::from_diagonal(&DVector::from_vec(lambda)) * q.transpose();
    (&spd + spd.transpose()) * 0.5
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    sqrt(power_iteration(&(m.transpose() * m)))
}

/// Top eigenvalue of a symmetric positive semi-definite matrix. Stops once
/// the eigen-residual `‖Mv − λv‖` is below `POWER_TOL·λ`.
fn power_iteration(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    // Irregular start so it is not orthogonal to the top eigenvector by symmetry.
    let mut v = DVector::from_fn(n, |i, _| 1.0 + 0.1 * sqrt(i as f64 + 1.0));
    v.normalize_mut();
    let mut lambda = 0.0;
    for _ in 0..1_000_000 {
        let w = m * &v;
        lambda = v.dot(&w) / v.norm_squared();
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        if (&w - &v * lambda).norm() <= POWER_TOL * lambda.abs() {
            return lambda;
        }
        v = w / norm;
    }
    lambda
}

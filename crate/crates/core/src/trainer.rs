//! Saddle-point training of a Gaussian sampler against a variational network.
//!
//! The objective is
//! `F(θ, ω) = E_P[g_f(V_ω(x))] − E_{Q_θ}[f*(g_f(V_ω(x)))]`,
//! maximized over the network parameters `ω` and minimized over the sampler
//! parameters `θ = (μ, σ)`. Each step draws fresh batches from `P` and from
//! the noise distribution, runs one forward pass over both, and updates both
//! blocks from gradients taken at the same point.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::density::MixtureDensity;
use crate::divergence::{DivergenceSpec, Family};
use crate::error::{NetError, TrainError};
use crate::math::{sigmoid, softplus, sqrt};
use crate::net::{LinearGenerator, Mlp, Tape};
use crate::optim::{l2_norm, AdamParams, Optimizer, OptimizerKind};

/// Magnitude of the objective estimate beyond which a run is aborted.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

/// How the sampler is updated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorUpdate {
    /// Descend `F` itself.
    Standard,
    /// Ascend `E_Q[g_f(V(x))]` instead of descending the conjugate term.
    Heuristic,
    /// GAN variants of the `(α, β)` objective; need the `gan` divergence.
    Gan1,
    Gan2,
    Gan3,
}

impl GeneratorUpdate {
    pub fn name(&self) -> &'static str {
        match self {
            GeneratorUpdate::Standard => "standard",
            GeneratorUpdate::Heuristic => "heuristic",
            GeneratorUpdate::Gan1 => "gan1",
            GeneratorUpdate::Gan2 => "gan2",
            GeneratorUpdate::Gan3 => "gan3",
        }
    }

    /// `(α, β)` of the sampler's minimization for the GAN variants.
    pub fn gan_coefficients(&self) -> Option<(f64, f64)> {
        match self {
            GeneratorUpdate::Gan1 => Some((1.0, 0.0)),
            GeneratorUpdate::Gan2 => Some((0.0, 1.0)),
            GeneratorUpdate::Gan3 => Some((1.0, 1.0)),
            _ => None,
        }
    }
}

impl FromStr for GeneratorUpdate {
    type Err = TrainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "standard" => Ok(GeneratorUpdate::Standard),
            "heuristic" => Ok(GeneratorUpdate::Heuristic),
            "gan1" => Ok(GeneratorUpdate::Gan1),
            "gan2" => Ok(GeneratorUpdate::Gan2),
            "gan3" => Ok(GeneratorUpdate::Gan3),
            other => Err(TrainError::Config(alloc::format!("unknown generator update `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    /// SGD step size; Adam uses `adam.alpha`.
    pub step_size: f64,
    pub steps: usize,
    pub optimizer: OptimizerKind,
    pub adam: AdamParams,
    pub clip_norm: Option<f64>,
    pub generator_update: GeneratorUpdate,
    pub seed: u64,
    pub init_mu: f64,
    pub init_sigma: f64,
    /// Samples per side for the final objective estimate.
    pub eval_batch: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 1024,
            step_size: 0.01,
            steps: 20_000,
            optimizer: OptimizerKind::Sgd,
            adam: AdamParams::default(),
            clip_norm: None,
            generator_update: GeneratorUpdate::Standard,
            seed: 0,
            init_mu: 0.0,
            init_sigma: 1.0,
            eval_batch: 65_536,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |msg: &str| Err(TrainError::Config(msg.to_string()));
        if self.batch_size == 0 {
            return bad("batch size must be at least 1");
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return bad("step size must be positive");
        }
        let AdamParams { alpha, beta1, beta2, eps } = self.adam;
        if !(alpha > 0.0) || !(eps > 0.0) {
            return bad("Adam learning rate and epsilon must be positive");
        }
        if !(0.0..1.0).contains(&beta1) || !(0.0..1.0).contains(&beta2) {
            return bad("Adam betas must lie in [0, 1)");
        }
        if let Some(c) = self.clip_norm {
            if !(c > 0.0) {
                return bad("clip norm must be positive");
            }
        }
        if !(self.init_sigma > 0.0 && self.init_sigma.is_finite()) || !self.init_mu.is_finite() {
            return bad("initial sampler must have finite mean and positive sigma");
        }
        if self.eval_batch == 0 {
            return bad("evaluation batch must be at least 1");
        }
        Ok(())
    }

    fn optimizer(&self) -> Optimizer {
        let opt = match self.optimizer {
            OptimizerKind::Sgd => Optimizer::sgd(self.step_size),
            OptimizerKind::Adam => Optimizer::adam(self.adam),
        };
        opt.with_clip(self.clip_norm)
    }
}

/// State before the update at `step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub step: usize,
    pub objective: f64,
    pub mu: f64,
    pub sigma: f64,
    pub grad_w_norm: f64,
    pub grad_t_norm: f64,
    pub tpr: f64,
    pub tnr: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainTrace {
    pub records: Vec<TraceRecord>,
}

impl TrainTrace {
    pub const HEADER: [&'static str; 8] = ["step", "F", "mu", "sigma", "grad_w_norm", "grad_t_norm", "tpr", "tnr"];

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }
}

/// A Monte Carlo objective value with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

fn mean_and_var(xs: impl Iterator<Item = f64>) -> (f64, f64, usize) {
    // Welford, in input order.
    let (mut n, mut mean, mut m2) = (0usize, 0.0, 0.0);
    for x in xs {
        n += 1;
        let d = x - mean;
        mean += d / n as f64;
        m2 += d * (x - mean);
    }
    let var = if n > 1 { m2 / (n - 1) as f64 } else { 0.0 };
    (mean, var, n)
}

/// Objective from network outputs on real and generated samples.
pub fn objective_from_outputs(spec: &DivergenceSpec, v_real: &[f64], v_fake: &[f64]) -> f64 {
    let real: f64 = v_real.iter().map(|&v| spec.activation(v)).sum::<f64>() / v_real.len() as f64;
    let fake: f64 = v_fake.iter().map(|&v| spec.fused_second_term(v)).sum::<f64>() / v_fake.len() as f64;
    real - fake
}

/// Minibatch estimate of `F` at the current network and sampler.
pub fn objective_estimate(
    spec: &DivergenceSpec,
    net: &Mlp,
    gen: &LinearGenerator,
    x_p: &[f64],
    z: &[f64],
) -> Result<f64, NetError> {
    if x_p.is_empty() || z.is_empty() {
        return Err(NetError::EmptyBatch);
    }
    let v_real = net.eval(x_p)?;
    let v_fake = net.eval(&gen.forward(z))?;
    Ok(objective_from_outputs(spec, &v_real, &v_fake))
}

/// Estimate of `F` with its standard error.
pub fn objective_with_error(
    spec: &DivergenceSpec,
    net: &Mlp,
    gen: &LinearGenerator,
    x_p: &[f64],
    z: &[f64],
) -> Result<Estimate, NetError> {
    if x_p.is_empty() || z.is_empty() {
        return Err(NetError::EmptyBatch);
    }
    let v_real = net.eval(x_p)?;
    let v_fake = net.eval(&gen.forward(z))?;
    let (a, va, na) = mean_and_var(v_real.iter().map(|&v| spec.activation(v)));
    let (b, vb, nb) = mean_and_var(v_fake.iter().map(|&v| spec.fused_second_term(v)));
    Ok(Estimate {
        value: a - b,
        stderr: sqrt(va / na as f64 + vb / nb as f64),
    })
}

/// True-positive and true-negative rates at threshold `f'(1)`; a tie counts as fake.
pub fn rates_from_outputs(spec: &DivergenceSpec, v_real: &[f64], v_fake: &[f64]) -> (f64, f64) {
    let c = spec.critical_value();
    let tp = v_real.iter().filter(|&&v| spec.activation(v) > c).count();
    let tn = v_fake.iter().filter(|&&v| spec.activation(v) <= c).count();
    (tp as f64 / v_real.len() as f64, tn as f64 / v_fake.len() as f64)
}

pub fn real_fake_stats(spec: &DivergenceSpec, net: &Mlp, x_p: &[f64], x_q: &[f64]) -> Result<(f64, f64), NetError> {
    if x_p.is_empty() || x_q.is_empty() {
        return Err(NetError::EmptyBatch);
    }
    Ok(rates_from_outputs(spec, &net.eval(x_p)?, &net.eval(x_q)?))
}

/// Both gradient blocks of `F` at one point, from one forward and one backward pass.
#[derive(Debug, Clone)]
pub struct SaddleGradients {
    pub objective: f64,
    /// `∇_ω F`.
    pub omega: Vec<f64>,
    /// `(∂F/∂μ, ∂F/∂σ)`.
    pub theta: [f64; 2],
    pub tpr: f64,
    pub tnr: f64,
    /// Network outputs on the generated half of the batch.
    pub fake_outputs: Vec<f64>,
    tape: Tape,
}

/// Forward `[x_p; G(z)]` through the network and differentiate `F` once.
pub fn saddle_gradients(
    spec: &DivergenceSpec,
    net: &Mlp,
    gen: &LinearGenerator,
    x_p: &[f64],
    z: &[f64],
) -> Result<SaddleGradients, NetError> {
    if x_p.is_empty() || z.is_empty() {
        return Err(NetError::EmptyBatch);
    }
    if net.input_width() != 1 || net.output_width() != 1 {
        return Err(NetError::InputWidth(net.input_width()));
    }
    let (n_real, n_fake) = (x_p.len(), z.len());
    let mut x = Vec::with_capacity(n_real + n_fake);
    x.extend_from_slice(x_p);
    x.extend(gen.forward(z));
    let (v, tape) = net.forward(&x)?;
    let (v_real, v_fake) = v.split_at(n_real);
    let objective = objective_from_outputs(spec, v_real, v_fake);
    let (tpr, tnr) = rates_from_outputs(spec, v_real, v_fake);

    let mut upstream = Vec::with_capacity(v.len());
    upstream.extend(v_real.iter().map(|&v| spec.activation_derivative(v) / n_real as f64));
    upstream.extend(v_fake.iter().map(|&v| -spec.fused_second_term_derivative(v) / n_fake as f64));
    let grads = net.backward(&tape, &upstream)?;
    let (dmu, dsigma) = gen.backward(z, &grads.inputs[n_real..]);
    Ok(SaddleGradients {
        objective,
        omega: grads.params,
        theta: [dmu, dsigma],
        tpr,
        tnr,
        fake_outputs: v_fake.to_vec(),
        tape,
    })
}

/// Gradient `(∂/∂μ, ∂/∂σ)` of `Σ_j w(V_j)` over the generated half of a recorded pass.
fn generator_pullback<W: Fn(f64) -> f64>(
    net: &Mlp,
    gen: &LinearGenerator,
    z: &[f64],
    g: &SaddleGradients,
    weight: W,
) -> Result<[f64; 2], NetError> {
    let n_real = g.tape.batch() - z.len();
    let mut upstream = alloc::vec![0.0; n_real];
    upstream.extend(g.fake_outputs.iter().map(|&v| weight(v)));
    let grads = net.backward(&g.tape, &upstream)?;
    let (dmu, dsigma) = gen.backward(z, &grads.inputs[n_real..]);
    Ok([dmu, dsigma])
}

/// `∇_θ E_Q[g_f(V(G(z)))]`, the ascent direction of the heuristic update.
pub fn heuristic_generator_gradient(
    spec: &DivergenceSpec,
    net: &Mlp,
    gen: &LinearGenerator,
    x_p: &[f64],
    z: &[f64],
) -> Result<[f64; 2], NetError> {
    let g = saddle_gradients(spec, net, gen, x_p, z)?;
    let n = z.len() as f64;
    generator_pullback(net, gen, z, &g, |v| spec.activation_derivative(v) / n)
}

/// The two parts of the `(α, β)` GAN objective, with `D = sigmoid(V)`:
/// `E_P[ln D]` and `α E_Q[ln(1−D)] − β E_Q[ln D]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GanAbValue {
    pub real_term: f64,
    pub fake_term: f64,
}

impl GanAbValue {
    pub fn total(&self) -> f64 {
        self.real_term + self.fake_term
    }
}

pub fn gan_ab_objective(
    net: &Mlp,
    gen: &LinearGenerator,
    alpha: f64,
    beta: f64,
    x_p: &[f64],
    z: &[f64],
) -> Result<GanAbValue, NetError> {
    if x_p.is_empty() || z.is_empty() {
        return Err(NetError::EmptyBatch);
    }
    let v_real = net.eval(x_p)?;
    let v_fake = net.eval(&gen.forward(z))?;
    let real_term = -v_real.iter().map(|&v| softplus(-v)).sum::<f64>() / v_real.len() as f64;
    let fake_term = v_fake
        .iter()
        .map(|&v| -alpha * softplus(v) + beta * softplus(-v))
        .sum::<f64>()
        / v_fake.len() as f64;
    Ok(GanAbValue { real_term, fake_term })
}

/// `∇_θ` of the fake term of the `(α, β)` objective.
pub fn gan_ab_generator_gradient(
    net: &Mlp,
    gen: &LinearGenerator,
    alpha: f64,
    beta: f64,
    z: &[f64],
) -> Result<[f64; 2], NetError> {
    if z.is_empty() {
        return Err(NetError::EmptyBatch);
    }
    let x = gen.forward(z);
    let (v, tape) = net.forward(&x)?;
    let n = z.len() as f64;
    let upstream: Vec<f64> = v.iter().map(|&v| (-alpha * sigmoid(v) - beta * sigmoid(-v)) / n).collect();
    let grads = net.backward(&tape, &upstream)?;
    let (dmu, dsigma) = gen.backward(z, &grads.inputs);
    Ok([dmu, dsigma])
}

/// A min-max objective over two flat parameter blocks.
pub trait SaddleObjective {
    fn value(&self, theta: &[f64], omega: &[f64]) -> f64;
    /// `(∇_θ F, ∇_ω F)` at `(θ, ω)`.
    fn gradients(&self, theta: &[f64], omega: &[f64]) -> (Vec<f64>, Vec<f64>);
}

/// One simultaneous step: `θ ← θ − η ∇_θ F`, `ω ← ω + η ∇_ω F`, both gradients
/// taken before either block moves.
pub fn simultaneous_step<S: SaddleObjective + ?Sized>(obj: &S, theta: &mut [f64], omega: &mut [f64], eta: f64) {
    let (gt, gw) = obj.gradients(theta, omega);
    for (t, g) in theta.iter_mut().zip(&gt) {
        *t -= eta * g;
    }
    for (w, g) in omega.iter_mut().zip(&gw) {
        *w += eta * g;
    }
}

/// Result of a training run.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub net: Mlp,
    pub gen: LinearGenerator,
    pub trace: TrainTrace,
    /// `F` at the final models on a fresh evaluation batch.
    pub objective: Estimate,
}

/// Stateful training loop: models, optimizer state and the sampling stream.
#[derive(Debug, Clone)]
pub struct Trainer {
    spec: DivergenceSpec,
    target: MixtureDensity,
    cfg: TrainConfig,
    net: Mlp,
    gen: LinearGenerator,
    net_opt: Optimizer,
    gen_opt: Optimizer,
    rng: ChaCha8Rng,
    step: usize,
    x_p: Vec<f64>,
    z: Vec<f64>,
}

impl Trainer {
    /// Fresh Glorot-initialized 1→64→64→1 tanh network and `N(init_mu, init_sigma²)` sampler.
    pub fn new(spec: DivergenceSpec, target: MixtureDensity, cfg: TrainConfig) -> Result<Self, TrainError> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let net = Mlp::glorot(&[1, 64, 64, 1], crate::net::Activation::Tanh, &mut rng)?;
        let gen = LinearGenerator::new(cfg.init_mu, cfg.init_sigma);
        Self::assemble(spec, target, cfg, net, gen, rng)
    }

    /// Start from given models; sampling is seeded from `cfg.seed`.
    pub fn with_models(
        spec: DivergenceSpec,
        target: MixtureDensity,
        cfg: TrainConfig,
        net: Mlp,
        gen: LinearGenerator,
    ) -> Result<Self, TrainError> {
        cfg.validate()?;
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        Self::assemble(spec, target, cfg, net, gen, rng)
    }

    fn assemble(
        spec: DivergenceSpec,
        target: MixtureDensity,
        cfg: TrainConfig,
        net: Mlp,
        gen: LinearGenerator,
        rng: ChaCha8Rng,
    ) -> Result<Self, TrainError> {
        if net.input_width() != 1 || net.output_width() != 1 {
            return Err(NetError::InputWidth(net.input_width()).into());
        }
        if cfg.generator_update.gan_coefficients().is_some() && !matches!(spec.family(), Family::Gan) {
            return Err(TrainError::Config(String::from(
                "gan1/gan2/gan3 updates require the gan divergence",
            )));
        }
        Ok(Trainer {
            spec,
            target,
            net_opt: cfg.optimizer(),
            gen_opt: cfg.optimizer(),
            x_p: alloc::vec![0.0; cfg.batch_size],
            z: alloc::vec![0.0; cfg.batch_size],
            cfg,
            net,
            gen,
            rng,
            step: 0,
        })
    }

    pub fn net(&self) -> &Mlp {
        &self.net
    }

    pub fn generator(&self) -> &LinearGenerator {
        &self.gen
    }

    pub fn steps_taken(&self) -> usize {
        self.step
    }

    fn draw(&mut self) {
        self.target.sample_into(&mut self.rng, &mut self.x_p);
        for z in self.z.iter_mut() {
            *z = self.rng.sample(StandardNormal);
        }
    }

    /// Draw fresh batches and update both the network and the sampler.
    pub fn single_step(&mut self) -> Result<TraceRecord, TrainError> {
        self.draw();
        let g = saddle_gradients(&self.spec, &self.net, &self.gen, &self.x_p, &self.z)?;
        let sigma = self.gen.sigma();
        let record = TraceRecord {
            step: self.step,
            objective: g.objective,
            mu: self.gen.mu,
            sigma,
            grad_w_norm: l2_norm(&g.omega),
            grad_t_norm: l2_norm(&g.theta),
            tpr: g.tpr,
            tnr: g.tnr,
        };
        if !g.objective.is_finite() || g.objective.abs() > DIVERGENCE_LIMIT {
            return Err(TrainError::Diverged {
                step: self.step,
                reason: "objective estimate out of range",
            });
        }

        // Gradient of the sampler's loss, which it descends.
        let n = self.z.len() as f64;
        let descent = match self.cfg.generator_update {
            GeneratorUpdate::Standard => g.theta,
            GeneratorUpdate::Heuristic => {
                let spec = self.spec;
                let up = generator_pullback(&self.net, &self.gen, &self.z, &g, |v| spec.activation_derivative(v) / n)?;
                [-up[0], -up[1]]
            }
            other => {
                let (a, b) = other.gan_coefficients().expect("gan variant");
                generator_pullback(&self.net, &self.gen, &self.z, &g, |v| (-a * sigmoid(v) - b * sigmoid(-v)) / n)?
            }
        };

        let ascent: Vec<f64> = g.omega.iter().map(|x| -x).collect();
        self.net_opt.step(self.net.params_mut(), &ascent);
        let mut theta = [self.gen.mu, self.gen.log_sigma];
        self.gen_opt.step(&mut theta, &[descent[0], descent[1] * sigma]);
        self.gen = LinearGenerator {
            mu: theta[0],
            log_sigma: theta[1],
        };
        self.step += 1;
        if !theta.iter().all(|t| t.is_finite()) || !self.net.params().iter().all(|p| p.is_finite()) {
            return Err(TrainError::Diverged {
                step: self.step - 1,
                reason: "non-finite parameters",
            });
        }
        Ok(record)
    }

    /// Ascend in the network parameters only; the sampler stays fixed.
    pub fn variational_step(&mut self) -> Result<f64, TrainError> {
        self.draw();
        let g = saddle_gradients(&self.spec, &self.net, &self.gen, &self.x_p, &self.z)?;
        if !g.objective.is_finite() || g.objective.abs() > DIVERGENCE_LIMIT {
            return Err(TrainError::Diverged {
                step: self.step,
                reason: "objective estimate out of range",
            });
        }
        let ascent: Vec<f64> = g.omega.iter().map(|x| -x).collect();
        self.net_opt.step(self.net.params_mut(), &ascent);
        self.step += 1;
        if !self.net.params().iter().all(|p| p.is_finite()) {
            return Err(TrainError::Diverged {
                step: self.step - 1,
                reason: "non-finite parameters",
            });
        }
        Ok(g.objective)
    }

    /// `F` on `cfg.eval_batch` fresh samples per side.
    pub fn evaluate(&mut self) -> Result<Estimate, TrainError> {
        let n = self.cfg.eval_batch;
        let mut x_p = alloc::vec![0.0; n];
        self.target.sample_into(&mut self.rng, &mut x_p);
        let z: Vec<f64> = (0..n).map(|_| self.rng.sample(StandardNormal)).collect();
        Ok(objective_with_error(&self.spec, &self.net, &self.gen, &x_p, &z)?)
    }

    /// Run the configured number of steps and evaluate.
    pub fn run(mut self) -> Result<TrainOutcome, TrainError> {
        let mut trace = TrainTrace {
            records: Vec::with_capacity(self.cfg.steps),
        };
        for _ in 0..self.cfg.steps {
            trace.records.push(self.single_step()?);
        }
        let objective = self.evaluate()?;
        Ok(TrainOutcome {
            net: self.net,
            gen: self.gen,
            trace,
            objective,
        })
    }
}

/// Train a sampler for `p` under `spec`.
pub fn train(spec: &DivergenceSpec, p: &MixtureDensity, cfg: &TrainConfig) -> Result<TrainOutcome, TrainError> {
    Trainer::new(*spec, p.clone(), *cfg)?.run()
}

/// Maximize `F` over the network only, with `gen` frozen, then evaluate.
pub fn refit_variational(
    spec: &DivergenceSpec,
    net_init: &Mlp,
    gen: &LinearGenerator,
    p: &MixtureDensity,
    cfg: &TrainConfig,
) -> Result<(Mlp, Estimate), TrainError> {
    let mut t = Trainer::with_models(*spec, p.clone(), *cfg, net_init.clone(), *gen)?;
    for _ in 0..cfg.steps {
        t.variational_step()?;
    }
    let estimate = t.evaluate()?;
    Ok((t.net, estimate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::{make_spec, ShapeParams};
    use crate::net::Activation;

    fn spec(name: &str) -> DivergenceSpec {
        make_spec(name, ShapeParams::default()).unwrap()
    }

    /// Network whose output is the constant `c`.
    fn constant_net(c: f64) -> Mlp {
        let mut p = alloc::vec![0.0; crate::net::param_count(&[1, 4, 1])];
        *p.last_mut().unwrap() = c;
        Mlp::from_params(&[1, 4, 1], Activation::Tanh, p).unwrap()
    }

    #[test]
    fn constant_critic_gives_zero() {
        let x = [0.1, 2.0, -1.0];
        let z = [0.5, -0.2];
        let gen = LinearGenerator::new(0.0, 1.0);
        for s in crate::divergence::all_specs().into_iter().filter(|s| s.is_normalized()) {
            // Invert the activation at f'(1) by bisection.
            let c = s.critical_value();
            let (mut lo, mut hi) = (-50.0, 50.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if s.activation(mid) < c {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let net = constant_net(0.5 * (lo + hi));
            let f = objective_estimate(&s, &net, &gen, &x, &z).unwrap();
            assert!(f.abs() < 1e-9, "{}: {f}", s.label());
        }
    }

    #[test]
    fn gan_constant_half() {
        let net = constant_net(0.0);
        let gen = LinearGenerator::new(1.0, 2.0);
        let f = objective_estimate(&spec("gan"), &net, &gen, &[0.3, 0.4], &[1.0]).unwrap();
        assert!((f + 4f64.ln()).abs() < 1e-12);
        let ab = gan_ab_objective(&net, &gen, 0.0, 1.0, &[0.3], &[1.0]).unwrap();
        assert!((ab.real_term - 0.5f64.ln()).abs() < 1e-15);
        assert!((ab.fake_term - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn tie_counts_as_fake() {
        let s = spec("kl");
        let net = constant_net(1.0);
        assert_eq!(real_fake_stats(&s, &net, &[0.0, 1.0], &[2.0]).unwrap(), (0.0, 1.0));
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        let bad = TrainConfig {
            batch_size: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = TrainConfig {
            adam: AdamParams {
                beta2: 1.0,
                ..Default::default()
            },
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let gan_only = TrainConfig {
            generator_update: GeneratorUpdate::Gan3,
            ..Default::default()
        };
        assert!(Trainer::new(spec("kl"), MixtureDensity::reference_mixture(), gan_only).is_err());
        assert!(Trainer::new(spec("gan"), MixtureDensity::reference_mixture(), gan_only).is_ok());
        assert_eq!("gan2".parse::<GeneratorUpdate>().unwrap(), GeneratorUpdate::Gan2);
    }

    struct Quadratic;

    impl SaddleObjective for Quadratic {
        // F = θ²/2 − ω²/2 + θω
        fn value(&self, t: &[f64], w: &[f64]) -> f64 {
            0.5 * t[0] * t[0] - 0.5 * w[0] * w[0] + t[0] * w[0]
        }
        fn gradients(&self, t: &[f64], w: &[f64]) -> (Vec<f64>, Vec<f64>) {
            (alloc::vec![t[0] + w[0]], alloc::vec![t[0] - w[0]])
        }
    }

    #[test]
    fn simultaneous_step_uses_old_iterate() {
        let (mut t, mut w) = ([1.0], [2.0]);
        simultaneous_step(&Quadratic, &mut t, &mut w, 0.1);
        // ∇θ = 3, ∇ω = −1, both at (1, 2).
        assert!((t[0] - 0.7).abs() < 1e-12);
        assert!((w[0] - 1.9).abs() < 1e-12);
        let (mut t, mut w) = ([0.0], [0.0]);
        simultaneous_step(&Quadratic, &mut t, &mut w, 0.1);
        assert_eq!((t[0], w[0]), (0.0, 0.0));
    }
}

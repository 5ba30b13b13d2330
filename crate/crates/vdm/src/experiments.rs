//! The univariate mixture experiment, the cross-evaluation matrix, curve
//! sampling and the saddle demo.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use vdm_core::net::{LinearGenerator, Mlp};
use vdm_core::optim::OptimizerKind;
use vdm_core::saddle::{gaussian_vector, QuadraticSaddle, SaddleRun};
use vdm_core::trainer::{refit_variational, train, Estimate, TrainConfig, TrainOutcome};
use vdm_core::{best_fit, exact_divergence, make_spec, BestFit, DivergenceSpec, MixtureDensity, QuadratureConfig, ShapeParams};

use crate::error::VdmError;

/// The five divergences of the mixture experiment, in table order.
pub const GMM_DIVERGENCES: [&str; 5] = ["kl", "reverse-kl", "jensen-shannon", "jeffrey", "pearson-chi2"];

pub fn gmm_specs() -> Vec<DivergenceSpec> {
    GMM_DIVERGENCES
        .iter()
        .map(|n| make_spec(n, ShapeParams::default()).expect("registered name"))
        .collect()
}

/// A trained sampler next to the exact best fit.
#[derive(Debug, Clone)]
pub struct GmmReport {
    pub spec: DivergenceSpec,
    pub outcome: TrainOutcome,
    /// `D_f(P‖Q_learned)` by quadrature.
    pub learned_divergence: f64,
    pub best: BestFit,
}

impl GmmReport {
    /// Two-column summary with four decimals.
    pub fn summary(&self) -> String {
        let g = &self.outcome.gen;
        let last = self.outcome.trace.last();
        let mut s = String::new();
        s.push_str(&format!("divergence  {}\n", self.spec.label()));
        s.push_str(&format!("steps       {}\n", self.outcome.trace.len()));
        s.push_str(&format!("{:<12}{:>10}{:>10}\n", "", "learned", "best fit"));
        s.push_str(&format!(
            "{:<12}{:>10.4}{:>10.4}\n",
            "objective", self.outcome.objective.value, self.best.value
        ));
        s.push_str(&format!("{:<12}{:>10.4}{:>10.4}\n", "mu", g.mu, self.best.mean));
        s.push_str(&format!("{:<12}{:>10.4}{:>10.4}\n", "sigma", g.sigma(), self.best.std));
        s.push_str(&format!("{:<12}{:>10.4}\n", "D_f(P||Q)", self.learned_divergence));
        s.push_str(&format!("{:<12}{:>10.4}\n", "F stderr", self.outcome.objective.stderr));
        if let Some(r) = last {
            s.push_str(&format!("{:<12}{:>10.4}\n", "tpr", r.tpr));
            s.push_str(&format!("{:<12}{:>10.4}\n", "tnr", r.tnr));
        }
        s
    }
}

pub fn gaussian_of(gen: &LinearGenerator) -> Result<MixtureDensity, VdmError> {
    Ok(MixtureDensity::gaussian(gen.mu, gen.sigma())?)
}

/// Train on `p` and compare with the exact best Gaussian fit.
pub fn run_gmm(spec: &DivergenceSpec, p: &MixtureDensity, cfg: &TrainConfig) -> Result<GmmReport, VdmError> {
    let quad = QuadratureConfig::default();
    let outcome = train(spec, p, cfg)?;
    let learned_divergence = exact_divergence(spec, p, &gaussian_of(&outcome.gen)?, &quad)?;
    let best = best_fit(spec, p, &quad)?;
    Ok(GmmReport {
        spec: *spec,
        outcome,
        learned_divergence,
        best,
    })
}

/// Network-only refit settings: Adam with the usual first-moment decay,
/// which reaches the supremum in a few thousand steps where plain SGD at the
/// training step size does not, and a large final evaluation batch since
/// neighbouring matrix cells differ by less than 0.01.
pub fn refit_config(seed: u64, steps: usize, eta: f64, batch_size: usize) -> TrainConfig {
    let mut cfg = TrainConfig {
        seed,
        steps,
        batch_size,
        optimizer: OptimizerKind::Adam,
        ..TrainConfig::default()
    };
    cfg.adam.alpha = eta;
    cfg.adam.beta1 = 0.9;
    cfg.eval_batch = 1 << 18;
    cfg
}

pub const DEFAULT_REFIT_STEPS: usize = 4000;
pub const DEFAULT_REFIT_ETA: f64 = 1e-3;

/// Seed for the refit of cell `(row, col)`.
pub fn cell_seed(seed: u64, row: usize, col: usize) -> u64 {
    seed ^ (((row * 16 + col) as u64 + 1) << 40)
}

/// Rows are trained samplers, columns are the divergences they are scored in.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossMatrix {
    pub names: Vec<String>,
    pub generators: Vec<LinearGenerator>,
    /// Refit variational estimates, `estimates[row][col]`.
    pub estimates: Vec<Vec<Estimate>>,
    /// Exact divergences of each row's sampler, same layout.
    pub exact: Vec<Vec<f64>>,
}

impl CrossMatrix {
    /// Row index of the smallest estimate in each column.
    pub fn column_minima(&self) -> Vec<usize> {
        (0..self.names.len())
            .map(|c| {
                (0..self.generators.len())
                    .min_by(|&a, &b| self.estimates[a][c].value.total_cmp(&self.estimates[b][c].value))
                    .expect("non-empty matrix")
            })
            .collect()
    }

    /// Each divergence is smallest for the sampler trained on it.
    pub fn diagonal_dominant(&self) -> bool {
        self.column_minima().iter().enumerate().all(|(c, &r)| r == c)
    }

    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.names
            .iter()
            .zip(&self.estimates)
            .map(|(name, row)| {
                let mut out = vec![name.clone()];
                out.extend(row.iter().map(|e| format!("{:.6}", e.value)));
                out
            })
            .collect()
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = vec![String::from("train\\test")];
        h.extend(self.names.iter().cloned());
        h
    }

    /// Fixed-width table of the estimates, exact values in parentheses.
    pub fn summary(&self) -> String {
        let mut s = format!("{:<16}", "train \\ test");
        for n in &self.names {
            s.push_str(&format!("{n:>22}"));
        }
        s.push('\n');
        for (r, name) in self.names.iter().enumerate() {
            s.push_str(&format!("{name:<16}"));
            for c in 0..self.names.len() {
                let cell = format!("{:.4} ({:.4})", self.estimates[r][c].value, self.exact[r][c]);
                s.push_str(&format!("{cell:>22}"));
            }
            s.push('\n');
        }
        s
    }
}

/// Train one sampler per spec, in parallel, with the same config.
pub fn train_rows(specs: &[DivergenceSpec], p: &MixtureDensity, cfg: &TrainConfig) -> Result<Vec<TrainOutcome>, VdmError> {
    specs.par_iter().map(|s| train(s, p, cfg).map_err(VdmError::from)).collect()
}

/// Score fixed samplers in every divergence by refitting a fresh network per cell.
pub fn cross_matrix_from(
    specs: &[DivergenceSpec],
    generators: &[LinearGenerator],
    p: &MixtureDensity,
    refit: &TrainConfig,
) -> Result<CrossMatrix, VdmError> {
    if specs.len() != generators.len() {
        return Err(VdmError::Config(String::from("need one sampler per divergence")));
    }
    let n = specs.len();
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|r| (0..n).map(move |c| (r, c))).collect();
    let quad = QuadratureConfig::default();
    let results: Vec<(Estimate, f64)> = cells
        .par_iter()
        .map(|&(r, c)| {
            let cfg = TrainConfig {
                seed: cell_seed(refit.seed, r, c),
                ..*refit
            };
            let net = Mlp::variational(cfg.seed);
            let (_, est) = refit_variational(&specs[c], &net, &generators[r], p, &cfg)?;
            let exact = exact_divergence(&specs[c], p, &gaussian_of(&generators[r])?, &quad)?;
            Ok((est, exact))
        })
        .collect::<Result<_, VdmError>>()?;
    let mut estimates = vec![Vec::with_capacity(n); n];
    let mut exact = vec![Vec::with_capacity(n); n];
    for (&(r, _), (e, x)) in cells.iter().zip(results) {
        estimates[r].push(e);
        exact[r].push(x);
    }
    Ok(CrossMatrix {
        names: specs.iter().map(|s| s.label()).collect(),
        generators: generators.to_vec(),
        estimates,
        exact,
    })
}

/// Train the five samplers and build their cross matrix.
pub fn cross_matrix(p: &MixtureDensity, train_cfg: &TrainConfig, refit: &TrainConfig) -> Result<CrossMatrix, VdmError> {
    let specs = gmm_specs();
    let rows = train_rows(&specs, p, train_cfg)?;
    let gens: Vec<LinearGenerator> = rows.iter().map(|o| o.gen).collect();
    cross_matrix_from(&specs, &gens, p, refit)
}

/// `n` samples of `(v, g_f(v), −f*(g_f(v)))` on `[lo, hi]`.
pub fn curves(spec: &DivergenceSpec, lo: f64, hi: f64, n: usize) -> Result<Vec<[f64; 3]>, VdmError> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) || n < 2 {
        return Err(VdmError::Config(format!("invalid curve range [{lo}, {hi}] with {n} points")));
    }
    Ok((0..n)
        .map(|k| {
            let v = lo + (hi - lo) * k as f64 / (n - 1) as f64;
            [v, spec.activation(v), -spec.fused_second_term(v)]
        })
        .collect())
}

/// A seeded random quadratic saddle run from a Gaussian start.
pub fn saddle_demo(seed: u64, dim_theta: usize, dim_omega: usize, delta: f64, steps: usize) -> Result<SaddleRun, VdmError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = QuadraticSaddle::random(&mut rng, dim_theta, dim_omega, delta)?;
    let pi0 = gaussian_vector(&mut rng, s.dim());
    Ok(s.simulate(&pi0, steps)?)
}

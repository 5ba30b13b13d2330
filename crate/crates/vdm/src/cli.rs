//! Argument parsing and command dispatch for the `vdm` binary.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vdm_core::divergence::{listing, ListingRow};
use vdm_core::optim::OptimizerKind;
use vdm_core::trainer::{GeneratorUpdate, TrainConfig};
use vdm_core::verify::Suite;
use vdm_core::{make_spec, DivergenceSpec, ShapeParams};

use crate::error::VdmError;
use crate::experiments::{cross_matrix, curves, refit_config, run_gmm, saddle_demo, DEFAULT_REFIT_ETA, DEFAULT_REFIT_STEPS};
use crate::io::{create, write_csv, write_trace, Checkpoint};
use crate::mixture;

#[derive(Debug, Parser)]
#[command(name = "vdm", version, about = "Variational divergence minimization experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One line per divergence: name, f'(1), conjugate domain, shape.
    List,
    /// Fit a Gaussian sampler to a mixture and compare with the exact best fit.
    Gmm(GmmArgs),
    /// Train the five mixture samplers and score each in every divergence.
    GmmMatrix(MatrixArgs),
    /// Sample the two saddle-objective terms as functions of the network output.
    Curves(CurveArgs),
    /// Run property suites; exits 1 if any check fails.
    Verify(VerifyArgs),
    /// Single-step gradient method on a random quadratic saddle.
    SaddleDemo(SaddleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OptimizerArg {
    Sgd,
    Adam,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UpdateArg {
    Standard,
    Heuristic,
    Gan1,
    Gan2,
    Gan3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Conjugates,
    Gradients,
    Bounds,
    Saddle,
    All,
}

#[derive(Debug, Clone, Args)]
pub struct ShapeArgs {
    /// Shape of the alpha family.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// Weight of the weighted Jensen-Shannon family.
    #[arg(long)]
    pub pi: Option<f64>,
}

impl ShapeArgs {
    fn params(&self) -> ShapeParams {
        ShapeParams {
            alpha: self.alpha,
            pi: self.pi,
        }
    }

    pub fn spec(&self, name: &str) -> Result<DivergenceSpec, VdmError> {
        Ok(make_spec(name, self.params())?)
    }
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20_000)]
    pub steps: usize,
    #[arg(long, default_value_t = 1024)]
    pub batch: usize,
    /// Step size; also the Adam learning rate when given with `--optimizer adam`.
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, value_enum, default_value_t = OptimizerArg::Sgd)]
    pub optimizer: OptimizerArg,
    /// Gradient norm clip, per model.
    #[arg(long)]
    pub clip: Option<f64>,
    /// Preset name or path to a mixture JSON file.
    #[arg(long, default_value = "paper-gmm")]
    pub mixture: String,
}

impl TrainArgs {
    pub fn config(&self) -> TrainConfig {
        let mut cfg = TrainConfig {
            seed: self.seed,
            steps: self.steps,
            batch_size: self.batch,
            clip_norm: self.clip,
            optimizer: match self.optimizer {
                OptimizerArg::Sgd => OptimizerKind::Sgd,
                OptimizerArg::Adam => OptimizerKind::Adam,
            },
            ..TrainConfig::default()
        };
        if let Some(eta) = self.eta {
            cfg.step_size = eta;
            cfg.adam.alpha = eta;
        }
        cfg
    }
}

#[derive(Debug, Clone, Args)]
pub struct GmmArgs {
    #[arg(long, default_value = "kl")]
    pub divergence: String,
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[command(flatten)]
    pub train: TrainArgs,
    #[arg(long, value_enum, default_value_t = UpdateArg::Standard)]
    pub update: UpdateArg,
    /// Trace CSV destination; stdout when absent, with the summary on stderr.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the final network and sampler parameters as JSON.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct MatrixArgs {
    #[command(flatten)]
    pub train: TrainArgs,
    /// Network-only Adam steps per matrix cell.
    #[arg(long, default_value_t = DEFAULT_REFIT_STEPS)]
    pub refit_steps: usize,
    /// Adam learning rate of the refits.
    #[arg(long, default_value_t = DEFAULT_REFIT_ETA)]
    pub refit_eta: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CurveArgs {
    #[arg(long, default_value = "gan")]
    pub divergence: String,
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[arg(long, default_value_t = -6.0, allow_hyphen_values = true)]
    pub vmin: f64,
    #[arg(long, default_value_t = 6.0, allow_hyphen_values = true)]
    pub vmax: f64,
    #[arg(long, default_value_t = 1000)]
    pub points: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(value_enum, default_value_t = SuiteArg::All)]
    pub suite: SuiteArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct SaddleArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 3)]
    pub dim_theta: usize,
    #[arg(long, default_value_t = 2)]
    pub dim_omega: usize,
    /// Lower bound on the eigenvalues of both diagonal blocks.
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Process exit status of a completed command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    VerificationFailed,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Success => 0,
            Status::VerificationFailed => 1,
        }
    }
}

/// Write CSV to `out` if given, else to `stdout`.
fn emit_csv<S: AsRef<str>>(
    out: Option<&PathBuf>,
    stdout: &mut dyn Write,
    header: &[S],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<(), VdmError> {
    let header: Vec<&str> = header.iter().map(AsRef::as_ref).collect();
    match out {
        Some(path) => write_csv(create(path)?, &header, rows),
        None => write_csv(stdout, &header, rows),
    }
}

fn say(sink: &mut dyn Write, text: &str) -> Result<(), VdmError> {
    sink.write_all(text.as_bytes()).map_err(|e| VdmError::io("<output>", e))
}

/// Run one command. Tables and CSV go to `stdout`, human summaries to
/// `stdout` when CSV goes to a file and to `stderr` otherwise.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<Status, VdmError> {
    match &cli.command {
        Command::List => {
            let mut text = String::from(ListingRow::HEADER);
            text.push('\n');
            for row in listing() {
                text.push_str(&row.to_line());
                text.push('\n');
            }
            say(stdout, &text)?;
        }
        Command::Gmm(a) => {
            let spec = a.shape.spec(&a.divergence)?;
            let p = mixture::load(&a.train.mixture)?;
            let mut cfg = a.train.config();
            cfg.generator_update = match a.update {
                UpdateArg::Standard => GeneratorUpdate::Standard,
                UpdateArg::Heuristic => GeneratorUpdate::Heuristic,
                UpdateArg::Gan1 => GeneratorUpdate::Gan1,
                UpdateArg::Gan2 => GeneratorUpdate::Gan2,
                UpdateArg::Gan3 => GeneratorUpdate::Gan3,
            };
            let report = run_gmm(&spec, &p, &cfg)?;
            match &a.out {
                Some(path) => {
                    write_trace(create(path)?, &report.outcome.trace)?;
                    say(stdout, &report.summary())?;
                }
                None => {
                    write_trace(&mut *stdout, &report.outcome.trace)?;
                    say(stderr, &report.summary())?;
                }
            }
            if let Some(path) = &a.checkpoint {
                Checkpoint::new(spec.name(), &report.outcome.net, &report.outcome.gen).save(path)?;
            }
        }
        Command::GmmMatrix(a) => {
            let p = mixture::load(&a.train.mixture)?;
            let cfg = a.train.config();
            let refit = refit_config(cfg.seed, a.refit_steps, a.refit_eta, cfg.batch_size);
            let m = cross_matrix(&p, &cfg, &refit)?;
            let mut summary = m.summary();
            summary.push_str(&format!(
                "each divergence smallest for its own sampler: {}\n",
                if m.diagonal_dominant() { "yes" } else { "no" }
            ));
            emit_csv(a.out.as_ref(), stdout, &m.header(), m.csv_rows())?;
            say(if a.out.is_some() { stdout } else { stderr }, &summary)?;
        }
        Command::Curves(a) => {
            let spec = a.shape.spec(&a.divergence)?;
            let pts = curves(&spec, a.vmin, a.vmax, a.points)?;
            let rows = pts.iter().map(|r| r.iter().map(|x| x.to_string()).collect());
            emit_csv(a.out.as_ref(), stdout, &["v", "activation", "neg_conjugate"], rows)?;
        }
        Command::Verify(a) => {
            let suites: Vec<Suite> = match a.suite {
                SuiteArg::Conjugates => vec![Suite::Conjugates],
                SuiteArg::Gradients => vec![Suite::Gradients],
                SuiteArg::Bounds => vec![Suite::Bounds],
                SuiteArg::Saddle => vec![Suite::Saddle],
                SuiteArg::All => Suite::ALL.to_vec(),
            };
            let mut all_passed = true;
            for suite in suites {
                let start = Instant::now();
                let report = suite.run(a.seed);
                let secs = start.elapsed().as_secs_f64();
                let mut text = String::new();
                for c in &report.checks {
                    text.push_str(&format!(
                        "{} {}/{}: worst {:.3e} (tol {:.1e}) {}\n",
                        if c.passed { "PASS" } else { "FAIL" },
                        suite,
                        c.name,
                        c.worst,
                        c.tolerance,
                        c.detail
                    ));
                }
                let failed = report.checks.iter().filter(|c| !c.passed).count();
                text.push_str(&format!(
                    "{suite}: {} ({} checks, {failed} failed, {secs:.2} s)\n",
                    if report.passed() { "ok" } else { "FAILED" },
                    report.checks.len()
                ));
                say(stdout, &text)?;
                all_passed &= report.passed();
            }
            if !all_passed {
                return Ok(Status::VerificationFailed);
            }
        }
        Command::SaddleDemo(a) => {
            let run = saddle_demo(a.seed, a.dim_theta, a.dim_omega, a.delta, a.steps)?;
            let rows = (0..run.j.len()).map(|t| vec![t.to_string(), run.j[t].to_string(), run.bound(t).to_string()]);
            emit_csv(a.out.as_ref(), stdout, &["t", "J", "bound"], rows)?;
            let ok = run.check().is_ok();
            let text = format!(
                "delta {:.4}  L {:.4}  eta {:.4}  rate {:.6}  worst ratio {:.6}  bound {}\n",
                run.delta,
                run.l,
                run.eta,
                run.rate,
                run.worst_ratio(),
                if ok { "holds" } else { "VIOLATED" }
            );
            say(if a.out.is_some() { stdout } else { stderr }, &text)?;
            if !ok {
                return Ok(Status::VerificationFailed);
            }
        }
    }
    Ok(Status::Success)
}

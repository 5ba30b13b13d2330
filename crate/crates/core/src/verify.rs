//! Numerical property suites for the divergence family, the network
//! gradients, the variational bound and the saddle certificate.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::density::MixtureDensity;
use crate::divergence::{all_specs, make_spec, DivergenceSpec, Family, ShapeParams};
use crate::math::{exp, ln, LN_2};
use crate::net::{Activation, LinearGenerator, Mlp};
use crate::quadrature::{integrate, QuadratureConfig};
use crate::saddle::{certify, QuadraticSaddle};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Conjugates,
    Gradients,
    Bounds,
    Saddle,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Conjugates, Suite::Gradients, Suite::Bounds, Suite::Saddle];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Conjugates => "conjugates",
            Suite::Gradients => "gradients",
            Suite::Bounds => "bounds",
            Suite::Saddle => "saddle",
        }
    }

    pub fn run(&self, seed: u64) -> SuiteReport {
        let checks = match self {
            Suite::Conjugates => conjugate_checks(),
            Suite::Gradients => gradient_checks(seed),
            Suite::Bounds => bound_checks(),
            Suite::Saddle => saddle_checks(seed),
        };
        SuiteReport { suite: *self, checks }
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .iter()
            .copied()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite `{s}`"))
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One named property with its worst observed violation.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Worst observed error (or slack use) in the check's own units.
    pub worst: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, worst: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed: worst <= tolerance,
            worst,
            tolerance,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Every family with its default shape plus a second shape for the two
/// shaped families, so both α branches are covered.
pub fn verification_specs() -> Vec<DivergenceSpec> {
    let mut specs = all_specs();
    specs.push(make_spec("alpha", ShapeParams::alpha(0.5)).expect("valid alpha"));
    specs.push(make_spec("jensen-shannon-weighted", ShapeParams::pi(0.3)).expect("valid pi"));
    specs
}

/// Tracks the worst value of a per-point error and where it happened.
struct Worst {
    value: f64,
    at: String,
}

impl Worst {
    fn new() -> Self {
        Worst {
            value: 0.0,
            at: String::new(),
        }
    }

    fn see(&mut self, value: f64, at: impl FnOnce() -> String) {
        let value = if value.is_nan() { f64::INFINITY } else { value };
        if value > self.value {
            self.value = value;
            self.at = at();
        }
    }

    fn into_check(self, name: &str, tolerance: f64) -> Check {
        Check::new(name, self.value, tolerance, self.at)
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (ln(lo), ln(hi));
    (0..n).map(|k| exp(a + (b - a) * k as f64 / (n - 1) as f64)).collect()
}

fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

/// Maximizer of a concave function on `[lo, hi]` by golden-section search.
fn golden_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let r = 0.5 * (libm::sqrt(5.0) - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol * (1.0 + lo.abs().max(hi.abs())) {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        }
    }
    f1.max(f2)
}

/// `sup_t {t u − f*(t)}` over the conjugate domain, with infinite ends
/// replaced by `±200`.
pub fn biconjugate(spec: &DivergenceSpec, u: f64) -> f64 {
    let dom = spec.conjugate_domain();
    let lo = if dom.lower.is_finite() { dom.lower } else { dom.upper.min(0.0) - 200.0 };
    let hi = if dom.upper.is_finite() { dom.upper } else { dom.lower.max(0.0) + 200.0 };
    let objective = |t: f64| match spec.conjugate(t) {
        Ok(c) => t * u - c,
        Err(_) => f64::NEG_INFINITY,
    };
    golden_max(objective, lo, hi, 1e-13)
}

fn numeric_derivative(spec: &DivergenceSpec, u: f64) -> f64 {
    let h = 1e-5 * u;
    (spec.generator_unchecked(u + h) - spec.generator_unchecked(u - h)) / (2.0 * h)
}

/// Pointwise exact GAN-JS relation for the tabulated generators:
/// `f_gan(u) = f_js(u) − (1 + u) log 2`.
pub fn gan_js_pointwise_error(u: f64) -> f64 {
    let gan = DivergenceSpec::new(Family::Gan).generator_unchecked(u);
    let js = DivergenceSpec::new(Family::JensenShannon).generator_unchecked(u);
    (gan - (js - (1.0 + u) * LN_2)).abs()
}

/// The relation as commonly quoted, `f_gan(u) = 2 f_js(u) − log 4`; it only
/// holds at `u = 1`.
pub fn gan_js_quoted_error(u: f64) -> f64 {
    let gan = DivergenceSpec::new(Family::Gan).generator_unchecked(u);
    let js = DivergenceSpec::new(Family::JensenShannon).generator_unchecked(u);
    (gan - (2.0 * js - 2.0 * LN_2)).abs()
}

/// Per-family checks on generators, conjugates, activations and fused forms.
pub fn conjugate_checks() -> Vec<Check> {
    let specs = verification_specs();
    let u_grid = log_grid(1e-2, 1e2, 20);
    let mut checks = Vec::new();

    let mut w = Worst::new();
    for s in &specs {
        let target = if s.is_normalized() { 0.0 } else { -2.0 * LN_2 };
        w.see((s.generator_unchecked(1.0) - target).abs(), || s.label());
    }
    checks.push(w.into_check("generator at one", 1e-12));

    let mut w = Worst::new();
    for s in &specs {
        for t in s.conjugate_domain().interior_grid(20, 20.0) {
            let c = s.conjugate(t).unwrap_or(f64::NAN);
            for &u in &u_grid {
                let excess = t * u - s.generator_unchecked(u) - c;
                w.see(excess, || format!("{} u={u:.4} t={t:.4}", s.label()));
            }
        }
    }
    checks.push(w.into_check("fenchel-young", 1e-9));

    let mut w = Worst::new();
    for s in &specs {
        for u in log_grid(0.1, 10.0, 25) {
            let err = (biconjugate(s, u) - s.generator_unchecked(u)).abs();
            w.see(err, || format!("{} u={u:.4}", s.label()));
        }
    }
    checks.push(w.into_check("biconjugation", 1e-5));

    let mut w = Worst::new();
    let mut witness = Worst::new();
    for s in &specs {
        for &u in &u_grid {
            let t = numeric_derivative(s, u);
            let exact = s.witness(u).unwrap_or(f64::NAN);
            witness.see((t - exact).abs() / (1.0 + exact.abs()), || format!("{} u={u:.4}", s.label()));
            // The derivative of a piecewise-linear f can round just past a closed end.
            let dom = s.conjugate_domain();
            let t = t.clamp(dom.lower, dom.upper);
            let c = s.conjugate(t).unwrap_or(f64::NAN);
            let gap = (t * u - c - s.generator_unchecked(u)).abs();
            w.see(gap, || format!("{} u={u:.4}", s.label()));
        }
    }
    checks.push(w.into_check("young equality at f'(u)", 1e-6));
    checks.push(witness.into_check("witness equals f'", 1e-6));

    let mut w = Worst::new();
    for s in &specs {
        let t = s.witness(1.0).unwrap_or(f64::NAN);
        w.see((t - s.critical_value()).abs(), || s.label());
    }
    checks.push(w.into_check("witness(1) = f'(1)", 1e-12));

    let v_grid = linear_grid(-20.0, 20.0, 1000);
    let mut mono = Worst::new();
    let mut range = Worst::new();
    for s in &specs {
        let dom = s.conjugate_domain();
        let g: Vec<f64> = v_grid.iter().map(|&v| s.activation(v)).collect();
        let dv = v_grid[1] - v_grid[0];
        for (k, pair) in g.windows(2).enumerate() {
            // Ties are allowed only where the true increment is below the spacing of floats at g.
            let step = s.activation_derivative(v_grid[k]) * dv;
            let unresolved = pair[1] == pair[0] && step < 2.0 * f64::EPSILON * pair[0].abs();
            if !(pair[1] > pair[0] || unresolved) {
                mono.see(1.0, || format!("{} v={:.4}", s.label(), v_grid[k]));
            }
        }
        for (&v, &t) in v_grid.iter().zip(&g) {
            if !dom.contains(t) {
                range.see(1.0, || format!("{} v={v:.4} g={t}", s.label()));
            }
        }
    }
    checks.push(mono.into_check("activation monotone", 0.0));
    checks.push(range.into_check("activation in domain", 0.0));

    let mut w = Worst::new();
    for s in &specs {
        let dom = s.conjugate_domain();
        for v in linear_grid(-30.0, 30.0, 601) {
            let t = s.activation(v);
            if !composition_is_safe(dom.lower, dom.upper, t) {
                continue;
            }
            let composed = match s.conjugate(t) {
                Ok(c) => c,
                Err(_) => continue,
            };
            let fused = s.fused_second_term(v);
            let err = (fused - composed).abs() / fused.abs().max(1.0);
            w.see(err, || format!("{} v={v:.2}", s.label()));
        }
    }
    checks.push(w.into_check("fused form agrees with composition", 1e-8));

    let mut w = Worst::new();
    for s in &specs {
        for v in [-700.0, -300.0, 300.0, 700.0] {
            if !s.fused_second_term(v).is_finite() {
                w.see(1.0, || format!("{} v={v}", s.label()));
            }
        }
    }
    checks.push(w.into_check("fused form finite at |v| = 700", 0.0));

    let mut w = Worst::new();
    for &u in &u_grid {
        w.see(gan_js_pointwise_error(u), || format!("u={u:.4}"));
    }
    checks.push(w.into_check("gan-js pointwise relation", 1e-12));

    let wjs = DivergenceSpec::new(Family::JensenShannonWeighted { pi: 0.5 });
    let js = DivergenceSpec::new(Family::JensenShannon);
    let mut w = Worst::new();
    for &u in &u_grid {
        let err = (wjs.generator_unchecked(u) - 0.5 * js.generator_unchecked(u)).abs();
        w.see(err, || format!("u={u:.4}"));
    }
    checks.push(w.into_check("weighted-js midpoint is half of js", 1e-12));

    checks
}

/// The composition `f*(g_f(v))` is only trusted while `g_f(v)` keeps at least
/// six significant digits of distance from a finite non-zero end.
pub fn composition_is_safe(lower: f64, upper: f64, t: f64) -> bool {
    let near = |end: f64| end.is_finite() && end != 0.0 && (t - end).abs() < 1e-6 * end.abs().max(1.0);
    !(near(lower) || near(upper))
}

fn random_net(dims: &[usize], act: Activation, rng: &mut ChaCha8Rng) -> Mlp {
    let mut net = Mlp::glorot(dims, act, rng).expect("valid dims");
    for p in net.params_mut().iter_mut() {
        *p += rng.random_range(-0.3..0.3);
    }
    net
}

fn weighted_output(net: &Mlp, x: &[f64], up: &[f64]) -> f64 {
    net.eval(x).expect("non-empty batch").iter().zip(up).map(|(y, u)| y * u).sum()
}

/// Reverse-mode gradients against central differences on random networks.
pub fn gradient_checks(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let acts = [Activation::Tanh, Activation::Elu, Activation::Relu];
    let batches = [1usize, 7, 64];
    let mut params = Worst::new();
    let mut inputs = Worst::new();
    for k in 0..20 {
        let act = acts[k % 3];
        let batch = batches[(k / 3) % 3];
        let net = random_net(&[1, 6, 5, 1], act, &mut rng);
        let x: Vec<f64> = (0..batch).map(|_| rng.random_range(-2.0..2.0)).collect();
        let up: Vec<f64> = (0..batch).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (_, tape) = net.forward(&x).expect("non-empty batch");
        let g = net.backward(&tape, &up).expect("matching tape");
        let h = 1e-6;
        let mut work = net.clone();
        for i in 0..net.params().len() {
            let orig = work.params()[i];
            work.params_mut()[i] = orig + h;
            let plus = weighted_output(&work, &x, &up);
            work.params_mut()[i] = orig - h;
            let minus = weighted_output(&work, &x, &up);
            work.params_mut()[i] = orig;
            let fd = (plus - minus) / (2.0 * h);
            let err = relative_excess(g.params[i], fd);
            params.see(err, || format!("net {k} ({act:?}, batch {batch}) param {i}"));
        }
        for i in 0..batch {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = (weighted_output(&net, &xp, &up) - weighted_output(&net, &xm, &up)) / (2.0 * h);
            inputs.see(relative_excess(g.inputs[i], fd), || format!("net {k} input {i}"));
        }
    }
    let mut checks = vec![
        params.into_check("parameter gradients vs central differences", 1.0),
        inputs.into_check("input gradients vs central differences", 1.0),
    ];

    let net = random_net(&[1, 8, 8, 1], Activation::Tanh, &mut rng);
    let z: Vec<f64> = (0..9).map(|_| rng.random_range(-2.0..2.0)).collect();
    let gen = LinearGenerator::new(0.3, 1.4);
    let total = |g: &LinearGenerator| net.eval(&g.forward(&z)).expect("batch").iter().sum::<f64>();
    let (_, tape) = net.forward(&gen.forward(&z)).expect("batch");
    let grads = net.backward(&tape, &vec![1.0; z.len()]).expect("tape");
    let (dmu, dsigma) = gen.backward(&z, &grads.inputs);
    let h = 1e-6;
    let fd_mu = (total(&LinearGenerator::new(0.3 + h, 1.4)) - total(&LinearGenerator::new(0.3 - h, 1.4))) / (2.0 * h);
    let fd_sigma = (total(&LinearGenerator::new(0.3, 1.4 + h)) - total(&LinearGenerator::new(0.3, 1.4 - h))) / (2.0 * h);
    let worst = relative_excess(dmu, fd_mu).max(relative_excess(dsigma, fd_sigma));
    checks.push(Check::new(
        "generator chain vs central differences",
        worst,
        1.0,
        format!("dmu {dmu:.6e} vs {fd_mu:.6e}, dsigma {dsigma:.6e} vs {fd_sigma:.6e}"),
    ));

    let net = Mlp::variational(seed);
    let a: Vec<f64> = (0..50).map(|_| rng.random_range(-3.0..3.0)).collect();
    let b: Vec<f64> = (0..40).map(|_| rng.random_range(-3.0..3.0)).collect();
    let ua: Vec<f64> = (0..50).map(|_| rng.random_range(-1.0..1.0)).collect();
    let ub: Vec<f64> = (0..40).map(|_| rng.random_range(-1.0..1.0)).collect();
    let joint_x: Vec<f64> = a.iter().chain(&b).copied().collect();
    let joint_u: Vec<f64> = ua.iter().chain(&ub).copied().collect();
    let (_, tj) = net.forward(&joint_x).expect("batch");
    let gj = net.backward(&tj, &joint_u).expect("tape");
    let (_, ta) = net.forward(&a).expect("batch");
    let (_, tb) = net.forward(&b).expect("batch");
    let ga = net.backward(&ta, &ua).expect("tape");
    let gb = net.backward(&tb, &ub).expect("tape");
    let worst = gj
        .params
        .iter()
        .zip(ga.params.iter().zip(&gb.params))
        .map(|(j, (x, y))| (j - (x + y)).abs() / (1.0 + j.abs()))
        .fold(0.0, f64::max);
    checks.push(Check::new("joint pass equals separate passes", worst, 1e-12, ""));
    checks
}

/// Error against the finite-difference value in units of the `1e−5`
/// relative tolerance with a `1e−7` absolute floor; `≤ 1` passes.
fn relative_excess(analytic: f64, fd: f64) -> f64 {
    (analytic - fd).abs() / (1e-5 * analytic.abs().max(fd.abs()) + 1e-7)
}

/// Variational representation: with `T = T*(p/q)` the objective equals the
/// divergence, and any other in-domain `T` stays below it.
pub fn bound_checks() -> Vec<Check> {
    let p = MixtureDensity::reference_mixture();
    let q = MixtureDensity::gaussian(1.0, 1.8).expect("valid gaussian");
    let (lo, hi) = (-6.0, 8.0);
    let cfg = QuadratureConfig::default();
    let mut tight = Worst::new();
    let mut below = Worst::new();
    for s in verification_specs() {
        let d = integrate(|x| s.perspective(p.pdf(x), q.pdf(x)), lo, hi, &cfg).unwrap_or(f64::NAN);
        let c = s.critical_value();
        for lambda in [0.0, 0.1, 0.3, 0.6, 1.0] {
            let value = integrate(
                |x| {
                    let (px, qx) = (p.pdf(x), q.pdf(x));
                    let t = (1.0 - lambda) * s.witness(px / qx).unwrap_or(f64::NAN) + lambda * c;
                    px * t - qx * s.conjugate(t).unwrap_or(f64::NAN)
                },
                lo,
                hi,
                &cfg,
            )
            .unwrap_or(f64::NAN);
            if lambda == 0.0 {
                tight.see((value - d).abs() / (1.0 + d.abs()), || s.label());
            } else {
                below.see(value - d, || format!("{} lambda={lambda}", s.label()));
            }
        }
    }
    vec![
        tight.into_check("bound is tight at the witness", 1e-7),
        below.into_check("bound holds away from the witness", 1e-9),
    ]
}

/// Convergence-rate certificate on random quadratic saddles plus the worked
/// scalar instances.
pub fn saddle_checks(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    match certify(&mut rng, 20, 100, 300) {
        Ok(cert) => {
            checks.push(Check::new(
                "rate envelope on 20 random saddles",
                cert.rate_failures as f64,
                0.0,
                format!("worst ratio excess {:.3e}", cert.worst_ratio_excess),
            ));
            checks.push(Check::new(
                "worst per-step ratio within 1 - delta^2/2L",
                cert.worst_ratio_excess,
                crate::saddle::RATE_SLACK,
                "",
            ));
            checks.push(Check::new(
                "sufficient decrease at 100 points per saddle",
                cert.worst_decrease_gap.max(0.0),
                crate::saddle::DECREASE_SLACK,
                format!("{} failures", cert.decrease_failures),
            ));
        }
        Err(e) => checks.push(Check::new("random saddles", f64::INFINITY, 0.0, format!("{e}"))),
    }
    let scalar = QuadraticSaddle::scalar(0.5, 0.5, 0.4)
        .and_then(|s| s.verify_rate(&nalgebra::DVector::from_column_slice(&[1.0, 1.0]), 200));
    let (worst, detail) = match scalar {
        Ok(run) => ((run.worst_ratio() - run.rate).max(0.0), format!("L = {:.6}, worst ratio {:.6}", run.l, run.worst_ratio())),
        Err(e) => (f64::INFINITY, format!("{e}")),
    };
    checks.push(Check::new("scalar saddle (0.5, 0.5, 0.4)", worst, 0.0, detail));
    checks
}

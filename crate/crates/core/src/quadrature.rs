//! Numerical integration on a finite interval.
//!
//! Two rules: panel-wise adaptive Simpson with Richardson correction (the
//! default), and fixed composite Gauss–Legendre used as an independent
//! cross-check.

use alloc::vec::Vec;

use crate::error::DensityError;
use crate::math::cos;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rule {
    AdaptiveSimpson,
    GaussLegendre { order: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub rule: Rule,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Integration interval; `None` lets the caller derive one from the densities.
    pub support: Option<(f64, f64)>,
    /// Initial equal-width panels (so narrow peaks are not stepped over).
    pub panels: usize,
    /// Maximum number of subintervals the adaptive rule may create.
    pub budget: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rule: Rule::AdaptiveSimpson,
            abs_tol: 1e-9,
            rel_tol: 1e-12,
            support: None,
            panels: 64,
            budget: 2_000_000,
        }
    }
}

impl QuadratureConfig {
    pub fn gauss_legendre(order: usize, panels: usize) -> Self {
        QuadratureConfig {
            rule: Rule::GaussLegendre { order },
            panels,
            ..Self::default()
        }
    }

    pub fn with_support(mut self, lo: f64, hi: f64) -> Self {
        self.support = Some((lo, hi));
        self
    }

    pub fn validate(&self) -> Result<(), DensityError> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(DensityError::BadQuadrature("tolerances must be positive"));
        }
        if self.panels == 0 {
            return Err(DensityError::BadQuadrature("need at least one panel"));
        }
        if let Some((lo, hi)) = self.support {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(DensityError::BadQuadrature("support must be finite with lo < hi"));
            }
        }
        if let Rule::GaussLegendre { order } = self.rule {
            if order == 0 {
                return Err(DensityError::BadQuadrature("Gauss-Legendre order must be positive"));
            }
        }
        Ok(())
    }
}

/// Integrate `f` over `[lo, hi]` with the configured rule.
///
/// Returns `+∞` as soon as the integrand does; a NaN integrand is an error.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    cfg: &QuadratureConfig,
) -> Result<f64, DensityError> {
    cfg.validate()?;
    if !(lo < hi) {
        return Err(DensityError::BadQuadrature("empty interval"));
    }
    match cfg.rule {
        Rule::AdaptiveSimpson => adaptive_simpson(&mut f, lo, hi, cfg),
        Rule::GaussLegendre { order } => {
            let (nodes, weights) = gauss_legendre_nodes(order);
            let width = (hi - lo) / cfg.panels as f64;
            let mut total = 0.0;
            for k in 0..cfg.panels {
                let a = lo + width * k as f64;
                let mid = a + 0.5 * width;
                for (x, w) in nodes.iter().zip(&weights) {
                    let pt = mid + 0.5 * width * x;
                    let y = checked(f(pt), pt)?;
                    total += w * y * 0.5 * width;
                }
            }
            Ok(total)
        }
    }
}

fn checked(y: f64, x: f64) -> Result<f64, DensityError> {
    if y.is_nan() || y == f64::NEG_INFINITY {
        Err(DensityError::NonFinite(x))
    } else {
        Ok(y)
    }
}

struct Segment {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
}

const MAX_DEPTH: u32 = 48;

fn adaptive_simpson<F: FnMut(f64) -> f64>(
    f: &mut F,
    lo: f64,
    hi: f64,
    cfg: &QuadratureConfig,
) -> Result<f64, DensityError> {
    let n = cfg.panels;
    let width = (hi - lo) / n as f64;
    let mut stack: Vec<Segment> = Vec::with_capacity(n + 64);
    let mut coarse = 0.0;
    let mut f_left = checked(f(lo), lo)?;
    for k in 0..n {
        let a = lo + width * k as f64;
        let b = if k + 1 == n { hi } else { a + width };
        let m = 0.5 * (a + b);
        let fm = checked(f(m), m)?;
        let fb = checked(f(b), b)?;
        let whole = (b - a) / 6.0 * (f_left + 4.0 * fm + fb);
        coarse += whole;
        stack.push(Segment {
            a,
            b,
            fa: f_left,
            fm,
            fb,
            whole,
            tol: 0.0,
            depth: 0,
        });
        f_left = fb;
    }
    if coarse == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    let tol = cfg.abs_tol.max(cfg.rel_tol * coarse.abs());
    for s in stack.iter_mut() {
        s.tol = tol * (s.b - s.a) / (hi - lo);
    }

    let mut total = 0.0;
    let mut created = n;
    while let Some(s) = stack.pop() {
        let m = 0.5 * (s.a + s.b);
        let lm = 0.5 * (s.a + m);
        let rm = 0.5 * (m + s.b);
        let flm = checked(f(lm), lm)?;
        let frm = checked(f(rm), rm)?;
        let left = (m - s.a) / 6.0 * (s.fa + 4.0 * flm + s.fm);
        let right = (s.b - m) / 6.0 * (s.fm + 4.0 * frm + s.fb);
        let refined = left + right;
        if refined == f64::INFINITY {
            return Ok(f64::INFINITY);
        }
        let err = refined - s.whole;
        if err.abs() <= 15.0 * s.tol || s.depth >= MAX_DEPTH {
            total += refined + err / 15.0;
            continue;
        }
        created += 2;
        if created > cfg.budget {
            return Err(DensityError::QuadratureBudget(cfg.budget));
        }
        stack.push(Segment {
            a: s.a,
            b: m,
            fa: s.fa,
            fm: flm,
            fb: s.fm,
            whole: left,
            tol: 0.5 * s.tol,
            depth: s.depth + 1,
        });
        stack.push(Segment {
            a: m,
            b: s.b,
            fa: s.fm,
            fm: frm,
            fb: s.fb,
            whole: right,
            tol: 0.5 * s.tol,
            depth: s.depth + 1,
        });
    }
    Ok(total)
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    let pi = core::f64::consts::PI;
    for i in 0..(n + 1) / 2 {
        let mut x = cos(pi * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            // Three-term recurrence for P_n(x) and its derivative.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pnm1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

//! The f-divergence family.
//!
//! Every member is described by a [`DivergenceSpec`]: the generator `f`, its
//! Fenchel conjugate `f*` together with the conjugate's domain, the output
//! activation `g_f` mapping ℝ into that domain, the critical value `f'(1)`,
//! and the optimal variational function `T*` written as a function of the
//! density ratio `r = p/q`.
//!
//! | name | f(u) | g_f(v) | dom f* | f'(1) |
//! |------|------|--------|--------|-------|
//! | total-variation | ½\|u−1\| | ½ tanh v | [−½, ½] | 0 |
//! | kl | u ln u | v | ℝ | 1 |
//! | reverse-kl | −ln u | −e^{−v} | (−∞, 0) | −1 |
//! | pearson-chi2 | (u−1)² | v | ℝ | 0 |
//! | neyman-chi2 | (1−u)²/u | 1 − e^{−v} | (−∞, 1) | 0 |
//! | squared-hellinger | (√u−1)² | 1 − e^{−v} | (−∞, 1) | 0 |
//! | jeffrey | (u−1) ln u | v | ℝ | 0 |
//! | jensen-shannon | u ln u − (u+1) ln((1+u)/2) | ln 2 − softplus(−v) | (−∞, ln 2) | 0 |
//! | jensen-shannon-weighted(π) | πu ln u − (1−π+πu) ln(1−π+πu) | −π ln π − softplus(−v) | (−∞, −π ln π) | 0 |
//! | gan | u ln u − (u+1) ln(u+1) | −softplus(−v) | (−∞, 0) | −ln 2 |
//! | alpha(α) | (u^α − 1 − α(u−1)) / (α(α−1)) | α<1: 1/(1−α) − softplus(−v); α>1: v | α<1: (−∞, 1/(1−α)); α>1: ℝ | 0 |
//!
//! All activations are monotone increasing, so a large network output means
//! "looks like a sample from P".

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::DivergenceError;
use crate::lambert::{lambert_w, wright_omega};
use crate::math::{
    exp, exp_m1, ln, ln_1p, log1mexp, log_softplus, powf, sigmoid, softplus, sqrt, tanh, xlogx,
    LN_2,
};

/// Canonical family names, in listing order.
pub const FAMILY_NAMES: [&str; 11] = [
    "total-variation",
    "kl",
    "reverse-kl",
    "pearson-chi2",
    "neyman-chi2",
    "squared-hellinger",
    "jeffrey",
    "jensen-shannon",
    "jensen-shannon-weighted",
    "gan",
    "alpha",
];

/// The five divergences of the Gaussian-mixture experiment, in table order.
pub const GMM_DIVERGENCES: [&str; 5] = ["kl", "reverse-kl", "jensen-shannon", "jeffrey", "pearson-chi2"];

pub const DEFAULT_ALPHA: f64 = 0.5;
pub const DEFAULT_PI: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    TotalVariation,
    Kl,
    ReverseKl,
    PearsonChi2,
    NeymanChi2,
    SquaredHellinger,
    Jeffrey,
    JensenShannon,
    JensenShannonWeighted { pi: f64 },
    Gan,
    Alpha { alpha: f64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::TotalVariation => "total-variation",
            Family::Kl => "kl",
            Family::ReverseKl => "reverse-kl",
            Family::PearsonChi2 => "pearson-chi2",
            Family::NeymanChi2 => "neyman-chi2",
            Family::SquaredHellinger => "squared-hellinger",
            Family::Jeffrey => "jeffrey",
            Family::JensenShannon => "jensen-shannon",
            Family::JensenShannonWeighted { .. } => "jensen-shannon-weighted",
            Family::Gan => "gan",
            Family::Alpha { .. } => "alpha",
        }
    }
}

/// Optional shape parameters; absent values fall back to the defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ShapeParams {
    pub alpha: Option<f64>,
    pub pi: Option<f64>,
}

impl ShapeParams {
    pub fn alpha(alpha: f64) -> Self {
        ShapeParams {
            alpha: Some(alpha),
            pi: None,
        }
    }

    pub fn pi(pi: f64) -> Self {
        ShapeParams {
            alpha: None,
            pi: Some(pi),
        }
    }
}

/// A real interval whose ends may be infinite, each open or closed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
    pub lower_closed: bool,
    pub upper_closed: bool,
}

/// Where a point sits relative to an [`Interval`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    Interior,
    /// Equal to an end that the interval excludes.
    OpenBoundary,
    Outside,
}

impl Interval {
    pub const REALS: Interval = Interval {
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
        lower_closed: false,
        upper_closed: false,
    };

    pub fn below(upper: f64) -> Self {
        Interval {
            lower: f64::NEG_INFINITY,
            upper,
            lower_closed: false,
            upper_closed: false,
        }
    }

    pub fn closed(lower: f64, upper: f64) -> Self {
        Interval {
            lower,
            upper,
            lower_closed: true,
            upper_closed: true,
        }
    }

    pub fn classify(&self, t: f64) -> Membership {
        if t.is_nan() {
            return Membership::Outside;
        }
        let below = t < self.lower || (t == self.lower && !self.lower_closed);
        let above = t > self.upper || (t == self.upper && !self.upper_closed);
        if !below && !above {
            Membership::Interior
        } else if (t == self.lower && t.is_finite()) || (t == self.upper && t.is_finite()) {
            Membership::OpenBoundary
        } else {
            Membership::Outside
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        self.classify(t) == Membership::Interior
    }

    /// `n` points strictly inside the interval, ascending.
    ///
    /// Infinite ends are replaced by a window of width `span` next to the
    /// finite end (or around zero for the whole line).
    pub fn interior_grid(&self, n: usize, span: f64) -> Vec<f64> {
        let (lo, hi) = match (self.lower.is_finite(), self.upper.is_finite()) {
            (true, true) => (self.lower, self.upper),
            (false, true) => (self.upper - span, self.upper),
            (true, false) => (self.lower, self.lower + span),
            (false, false) => (-0.5 * span, 0.5 * span),
        };
        (1..=n)
            .map(|k| lo + (hi - lo) * k as f64 / (n + 1) as f64)
            .collect()
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lower_closed { '[' } else { '(' };
        let close = if self.upper_closed { ']' } else { ')' };
        write!(f, "{open}{}, {}{close}", fmt_bound(self.lower), fmt_bound(self.upper))
    }
}

fn fmt_bound(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".to_string()
    } else if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{}", x)
    }
}

/// One member of the f-divergence family. Immutable once built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceSpec {
    family: Family,
    domain: Interval,
    critical_value: f64,
}

/// Build the spec for a named family.
///
/// Accepts the canonical names in [`FAMILY_NAMES`] plus a few short aliases
/// (`rkl`, `kl-rev`, `pearson`, `neyman`, `hellinger`, `js`, `wjs`, `tv`).
pub fn make_spec(name: &str, shape: ShapeParams) -> Result<DivergenceSpec, DivergenceError> {
    let family = match name {
        "total-variation" | "tv" => Family::TotalVariation,
        "kl" => Family::Kl,
        "reverse-kl" | "kl-rev" | "rkl" => Family::ReverseKl,
        "pearson-chi2" | "pearson" => Family::PearsonChi2,
        "neyman-chi2" | "neyman" => Family::NeymanChi2,
        "squared-hellinger" | "hellinger" => Family::SquaredHellinger,
        "jeffrey" => Family::Jeffrey,
        "jensen-shannon" | "js" => Family::JensenShannon,
        "jensen-shannon-weighted" | "wjs" => {
            let pi = shape.pi.unwrap_or(DEFAULT_PI);
            if !(pi > 0.0 && pi < 1.0) {
                return Err(DivergenceError::ShapeOutOfDomain {
                    name: "pi",
                    value: pi,
                    allowed: "(0, 1)",
                });
            }
            Family::JensenShannonWeighted { pi }
        }
        "gan" => Family::Gan,
        "alpha" => {
            let alpha = shape.alpha.unwrap_or(DEFAULT_ALPHA);
            if !alpha.is_finite() || alpha == 0.0 || alpha == 1.0 {
                return Err(DivergenceError::ShapeOutOfDomain {
                    name: "alpha",
                    value: alpha,
                    allowed: "ℝ \\ {0, 1}",
                });
            }
            Family::Alpha { alpha }
        }
        other => return Err(DivergenceError::UnknownName(other.to_string())),
    };
    Ok(DivergenceSpec::new(family))
}

/// Every family with default shape parameters, in listing order.
pub fn all_specs() -> Vec<DivergenceSpec> {
    FAMILY_NAMES
        .iter()
        .map(|n| make_spec(n, ShapeParams::default()).expect("registered name"))
        .collect()
}

impl DivergenceSpec {
    pub fn new(family: Family) -> Self {
        let domain = match family {
            Family::TotalVariation => Interval::closed(-0.5, 0.5),
            Family::Kl | Family::PearsonChi2 | Family::Jeffrey => Interval::REALS,
            Family::ReverseKl | Family::Gan => Interval::below(0.0),
            Family::NeymanChi2 | Family::SquaredHellinger => Interval::below(1.0),
            Family::JensenShannon => Interval::below(LN_2),
            Family::JensenShannonWeighted { pi } => Interval::below(-pi * ln(pi)),
            Family::Alpha { alpha } if alpha < 1.0 => Interval::below(1.0 / (1.0 - alpha)),
            Family::Alpha { .. } => Interval::REALS,
        };
        let critical_value = match family {
            Family::Kl => 1.0,
            Family::ReverseKl => -1.0,
            Family::Gan => -LN_2,
            _ => 0.0,
        };
        DivergenceSpec {
            family,
            domain,
            critical_value,
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn name(&self) -> &'static str {
        self.family.name()
    }

    /// Name with shape parameters, e.g. `alpha(0.5)`.
    pub fn label(&self) -> String {
        match self.family {
            Family::JensenShannonWeighted { pi } => format!("{}({})", self.name(), pi),
            Family::Alpha { alpha } => format!("{}({})", self.name(), alpha),
            _ => self.name().to_string(),
        }
    }

    pub fn shape_params(&self) -> ShapeParams {
        match self.family {
            Family::JensenShannonWeighted { pi } => ShapeParams::pi(pi),
            Family::Alpha { alpha } => ShapeParams::alpha(alpha),
            _ => ShapeParams::default(),
        }
    }

    pub fn conjugate_domain(&self) -> Interval {
        self.domain
    }

    /// `f'(1)`, the classification threshold on `T(x)`.
    pub fn critical_value(&self) -> f64 {
        self.critical_value
    }

    /// Whether `f(1) = 0` (every member except `gan`).
    pub fn is_normalized(&self) -> bool {
        !matches!(self.family, Family::Gan)
    }

    /// Generator `f(u)` for `u > 0`. May return `+∞` where `f` overflows.
    pub fn generator(&self, u: f64) -> Result<f64, DivergenceError> {
        if !(u > 0.0) {
            return Err(DivergenceError::NonPositive(u));
        }
        Ok(self.generator_unchecked(u))
    }

    /// Generator without the positivity check; `u = 0` gives the limit value.
    pub fn generator_unchecked(&self, u: f64) -> f64 {
        match self.family {
            Family::TotalVariation => 0.5 * (u - 1.0).abs(),
            Family::Kl => xlogx(u),
            Family::ReverseKl => -ln(u),
            Family::PearsonChi2 => (u - 1.0) * (u - 1.0),
            Family::NeymanChi2 => (1.0 - u) * (1.0 - u) / u,
            Family::SquaredHellinger => {
                let s = sqrt(u) - 1.0;
                s * s
            }
            Family::Jeffrey => {
                if u == 0.0 {
                    f64::INFINITY
                } else {
                    (u - 1.0) * ln(u)
                }
            }
            Family::JensenShannon => xlogx(u) - (u + 1.0) * (ln_1p(u) - LN_2),
            Family::JensenShannonWeighted { pi } => pi * xlogx(u) - xlogx(1.0 - pi + pi * u),
            Family::Gan => xlogx(u) - xlogx(u + 1.0),
            Family::Alpha { alpha } => {
                (powf(u, alpha) - 1.0 - alpha * (u - 1.0)) / (alpha * (alpha - 1.0))
            }
        }
    }

    /// Fenchel conjugate `f*(t)` for `t` in the conjugate domain.
    pub fn conjugate(&self, t: f64) -> Result<f64, DivergenceError> {
        match self.domain.classify(t) {
            Membership::Interior => Ok(self.conjugate_unchecked(t)),
            Membership::OpenBoundary => Err(DivergenceError::OnBoundary {
                t,
                domain: self.domain,
            }),
            Membership::Outside => Err(DivergenceError::OutsideDomain {
                t,
                domain: self.domain,
            }),
        }
    }

    fn conjugate_unchecked(&self, t: f64) -> f64 {
        match self.family {
            Family::TotalVariation => t,
            Family::Kl => exp(t - 1.0),
            Family::ReverseKl => -1.0 - ln(-t),
            Family::PearsonChi2 => 0.25 * t * t + t,
            Family::NeymanChi2 => 2.0 - 2.0 * sqrt(1.0 - t),
            Family::SquaredHellinger => t / (1.0 - t),
            Family::Jeffrey => {
                let arg = exp(1.0 - t);
                let w = if arg.is_finite() {
                    lambert_w(arg).unwrap_or_else(|_| wright_omega(1.0 - t))
                } else {
                    wright_omega(1.0 - t)
                };
                w + 1.0 / w + t - 2.0
            }
            Family::JensenShannon => -ln(2.0 - exp(t)),
            Family::JensenShannonWeighted { pi } => {
                (1.0 - pi) * ln((1.0 - pi) / (1.0 - pi * exp(t / pi)))
            }
            Family::Gan => -ln(-exp_m1(t)),
            Family::Alpha { alpha } => {
                let base = t * (alpha - 1.0) + 1.0;
                let base = if alpha > 1.0 { base.max(0.0) } else { base };
                powf(base, alpha / (alpha - 1.0)) / alpha - 1.0 / alpha
            }
        }
    }

    /// Output activation `g_f(v)`, mapping ℝ into the conjugate domain.
    pub fn activation(&self, v: f64) -> f64 {
        match self.family {
            Family::TotalVariation => 0.5 * tanh(v),
            Family::Kl | Family::PearsonChi2 | Family::Jeffrey => v,
            Family::ReverseKl => -exp(-v),
            Family::NeymanChi2 | Family::SquaredHellinger => -exp_m1(-v),
            Family::JensenShannon => LN_2 - softplus(-v),
            Family::JensenShannonWeighted { pi } => -pi * ln(pi) - softplus(-v),
            Family::Gan => -softplus(-v),
            Family::Alpha { alpha } if alpha < 1.0 => 1.0 / (1.0 - alpha) - softplus(-v),
            Family::Alpha { .. } => v,
        }
    }

    /// `d g_f / dv`.
    pub fn activation_derivative(&self, v: f64) -> f64 {
        match self.family {
            Family::TotalVariation => {
                let t = tanh(v);
                0.5 * (1.0 - t * t)
            }
            Family::Kl | Family::PearsonChi2 | Family::Jeffrey => 1.0,
            Family::ReverseKl | Family::NeymanChi2 | Family::SquaredHellinger => exp(-v),
            Family::JensenShannon | Family::JensenShannonWeighted { .. } | Family::Gan => sigmoid(-v),
            Family::Alpha { alpha } if alpha < 1.0 => sigmoid(-v),
            Family::Alpha { .. } => 1.0,
        }
    }

    /// `f*(g_f(v))` from a closed form simplified per family.
    ///
    /// Never composes [`Self::conjugate`] with [`Self::activation`], so it
    /// stays finite and accurate where the composition loses all precision
    /// (for example near an open end of the conjugate domain).
    pub fn fused_second_term(&self, v: f64) -> f64 {
        match self.family {
            Family::TotalVariation => 0.5 * tanh(v),
            Family::Kl => exp(v - 1.0),
            Family::ReverseKl => v - 1.0,
            Family::PearsonChi2 => 0.25 * v * v + v,
            Family::NeymanChi2 => 2.0 - 2.0 * exp(-0.5 * v),
            Family::SquaredHellinger => exp_m1(v),
            Family::Jeffrey => {
                let w = wright_omega(1.0 - v);
                w + 1.0 / w + v - 2.0
            }
            Family::JensenShannon => softplus(v) - LN_2,
            Family::JensenShannonWeighted { pi } => {
                let a = softplus(-v) / pi;
                (1.0 - pi) * (ln(1.0 - pi) - log1mexp(a))
            }
            Family::Gan => softplus(v),
            Family::Alpha { alpha } if alpha < 1.0 => {
                let log_base = ln(1.0 - alpha) + log_softplus(-v);
                exp(alpha / (alpha - 1.0) * log_base) / alpha - 1.0 / alpha
            }
            Family::Alpha { alpha } => {
                let base = (v * (alpha - 1.0) + 1.0).max(0.0);
                powf(base, alpha / (alpha - 1.0)) / alpha - 1.0 / alpha
            }
        }
    }

    /// `d/dv f*(g_f(v))`.
    pub fn fused_second_term_derivative(&self, v: f64) -> f64 {
        match self.family {
            Family::TotalVariation => {
                let t = tanh(v);
                0.5 * (1.0 - t * t)
            }
            Family::Kl => exp(v - 1.0),
            Family::ReverseKl => 1.0,
            Family::PearsonChi2 => 0.5 * v + 1.0,
            Family::NeymanChi2 => exp(-0.5 * v),
            Family::SquaredHellinger => exp(v),
            Family::Jeffrey => 1.0 / wright_omega(1.0 - v),
            Family::JensenShannon | Family::Gan => sigmoid(v),
            Family::JensenShannonWeighted { pi } => {
                let a = softplus(-v) / pi;
                (1.0 - pi) * sigmoid(-v) / (pi * exp_m1(a))
            }
            Family::Alpha { alpha } if alpha < 1.0 => {
                let log_base = ln(1.0 - alpha) + log_softplus(-v);
                sigmoid(-v) * exp(log_base / (alpha - 1.0))
            }
            Family::Alpha { alpha } => {
                let base = (v * (alpha - 1.0) + 1.0).max(0.0);
                powf(base, 1.0 / (alpha - 1.0))
            }
        }
    }

    /// Optimal variational function `T* = f'(r)` at density ratio `r = p/q`.
    pub fn witness(&self, ratio: f64) -> Result<f64, DivergenceError> {
        if !(ratio > 0.0) {
            return Err(DivergenceError::NonPositive(ratio));
        }
        let r = ratio;
        Ok(match self.family {
            Family::TotalVariation => {
                if r > 1.0 {
                    0.5
                } else if r < 1.0 {
                    -0.5
                } else {
                    0.0
                }
            }
            Family::Kl => 1.0 + ln(r),
            Family::ReverseKl => -1.0 / r,
            Family::PearsonChi2 => 2.0 * (r - 1.0),
            Family::NeymanChi2 => 1.0 - 1.0 / (r * r),
            Family::SquaredHellinger => 1.0 - 1.0 / sqrt(r),
            Family::Jeffrey => 1.0 + ln(r) - 1.0 / r,
            Family::JensenShannon => LN_2 + ln(r) - ln_1p(r),
            Family::JensenShannonWeighted { pi } => pi * (ln(r) - ln(1.0 - pi + pi * r)),
            Family::Gan => ln(r) - ln_1p(r),
            Family::Alpha { alpha } => (powf(r, alpha - 1.0) - 1.0) / (alpha - 1.0),
        })
    }

    /// Perspective `q f(p/q)` with the limit `p · sup dom f*` as `q → 0`.
    pub fn perspective(&self, p: f64, q: f64) -> f64 {
        if q > 0.0 {
            let r = p / q;
            if r.is_finite() {
                return q * self.generator_unchecked(r);
            }
        }
        if p == 0.0 {
            0.0
        } else {
            p * self.domain.upper
        }
    }

    /// `q f(p/q)` from `ln p` and `ln q`.
    ///
    /// Each family is rewritten so that no ratio is formed explicitly, which
    /// keeps far-tail integrands free of `0·∞` and spurious overflow.
    pub fn perspective_ln(&self, lp: f64, lq: f64) -> f64 {
        if lp == f64::NEG_INFINITY && lq == f64::NEG_INFINITY {
            return 0.0;
        }
        let (p, q) = (exp(lp), exp(lq));
        let d = lp - lq;
        match self.family {
            Family::TotalVariation => 0.5 * (p - q).abs(),
            Family::Kl => {
                if p == 0.0 {
                    0.0
                } else {
                    p * d
                }
            }
            Family::ReverseKl => {
                if q == 0.0 {
                    0.0
                } else {
                    -q * d
                }
            }
            Family::PearsonChi2 => {
                let s = exp(lp - 0.5 * lq) - exp(0.5 * lq);
                s * s
            }
            Family::NeymanChi2 => {
                let s = exp(lq - 0.5 * lp) - exp(0.5 * lp);
                s * s
            }
            Family::SquaredHellinger => {
                let s = exp(0.5 * lp) - exp(0.5 * lq);
                s * s
            }
            Family::Jeffrey => {
                if p == q {
                    0.0
                } else {
                    (p - q) * d
                }
            }
            Family::JensenShannon => {
                let a = if p == 0.0 { 0.0 } else { p * softplus(-d) };
                let b = if q == 0.0 { 0.0 } else { q * softplus(d) };
                (p + q) * LN_2 - a - b
            }
            Family::Gan => {
                let a = if p == 0.0 { 0.0 } else { p * softplus(-d) };
                let b = if q == 0.0 { 0.0 } else { q * softplus(d) };
                -a - b
            }
            Family::JensenShannonWeighted { pi } => {
                // q f = π p d − m ln(m/q) with m = (1−π) q + π p.
                let m = (1.0 - pi) * q + pi * p;
                if m == 0.0 {
                    return 0.0;
                }
                if q == 0.0 {
                    return -pi * ln(pi) * p;
                }
                let log_mq = ln(1.0 - pi) + softplus(d + ln(pi) - ln(1.0 - pi));
                let a = if p == 0.0 { 0.0 } else { pi * p * d };
                a - m * log_mq
            }
            Family::Alpha { alpha } => {
                let mixed = exp(alpha * lp + (1.0 - alpha) * lq);
                (mixed - q - alpha * (p - q)) / (alpha * (alpha - 1.0))
            }
        }
    }
}

/// One row of the machine-readable family listing.
#[derive(Debug, Clone, PartialEq)]
pub struct ListingRow {
    pub name: &'static str,
    pub critical_value: f64,
    pub domain: Interval,
    pub shape: ShapeParams,
}

impl ListingRow {
    pub const HEADER: &'static str = "name\tcritical_value\tdomain\tshape";

    /// Tab-separated line: name, `f'(1)` to six decimals, domain, shape.
    pub fn to_line(&self) -> String {
        let shape = match (self.shape.alpha, self.shape.pi) {
            (Some(a), _) => format!("alpha={a}"),
            (_, Some(p)) => format!("pi={p}"),
            _ => "-".to_string(),
        };
        format!(
            "{}\t{:.6}\t{}\t{}",
            self.name, self.critical_value, self.domain, shape
        )
    }
}

/// One [`ListingRow`] per family, default shapes for the shaped ones.
pub fn listing() -> Vec<ListingRow> {
    all_specs()
        .into_iter()
        .map(|s| ListingRow {
            name: s.name(),
            critical_value: s.critical_value(),
            domain: s.conjugate_domain(),
            shape: s.shape_params(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(name: &str) -> DivergenceSpec {
        make_spec(name, ShapeParams::default()).unwrap()
    }

    #[test]
    fn kl_spec_fields() {
        let kl = spec("kl");
        assert_eq!(kl.generator(1.0).unwrap(), 0.0);
        assert!((kl.generator(2.0).unwrap() - 2.0 * ln(2.0)).abs() < 1e-15);
        assert_eq!(kl.conjugate(1.0).unwrap(), 1.0);
        assert_eq!(kl.activation(3.7), 3.7);
        assert_eq!(kl.critical_value(), 1.0);
        assert_eq!(kl.witness(1.0).unwrap(), 1.0);
        assert_eq!(kl.fused_second_term(1.0), 1.0);
    }

    #[test]
    fn gan_values() {
        let gan = spec("gan");
        assert!((gan.critical_value() + 0.693_147).abs() < 1e-6);
        assert!((gan.generator(1.0).unwrap() + ln(4.0)).abs() < 1e-15);
        assert!((gan.activation(0.0) + LN_2).abs() < 1e-16);
        assert!((gan.fused_second_term(0.0) - LN_2).abs() < 1e-16);
        assert!((gan.fused_second_term(500.0) - 500.0).abs() < 1e-9);
    }

    #[test]
    fn alpha_two_generator() {
        let a = make_spec("alpha", ShapeParams::alpha(2.0)).unwrap();
        for &u in &[0.1, 0.5, 1.0, 2.0, 7.0] {
            let expect = 0.5 * (u * u - 1.0 - 2.0 * (u - 1.0));
            assert!((a.generator(u).unwrap() - expect).abs() < 1e-14);
        }
        assert_eq!(a.generator(1.0).unwrap(), 0.0);
    }

    #[test]
    fn table_examples() {
        assert_eq!(spec("pearson-chi2").generator(3.0).unwrap(), 4.0);
        assert_eq!(spec("pearson-chi2").conjugate(2.0).unwrap(), 3.0);
        assert_eq!(spec("jensen-shannon").activation(0.0), 0.0);
        assert_eq!(spec("reverse-kl").witness(2.0).unwrap(), -0.5);
        assert!((spec("neyman-chi2").witness(2.0).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(spec("kl").generator_unchecked(0.0), 0.0);
    }

    #[test]
    fn jeffrey_conjugate_at_one() {
        // W(1) = Ω from an independent Newton solve of w e^w = 1.
        let mut w: f64 = 1.0;
        for _ in 0..60 {
            w -= (w * w.exp() - 1.0) / ((w + 1.0) * w.exp());
        }
        let expect = w + 1.0 / w + 1.0 - 2.0;
        let got = spec("jeffrey").conjugate(1.0).unwrap();
        assert!((got - expect).abs() < 1e-14);
        assert!((got - 1.330_366).abs() < 1e-6);
    }

    #[test]
    fn neyman_witness_matches_numeric_derivative() {
        let n = spec("neyman-chi2");
        let h = 1e-6;
        let d = (n.generator(2.0 + h).unwrap() - n.generator(2.0 - h).unwrap()) / (2.0 * h);
        assert!((d - n.witness(2.0).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            make_spec("hinge", ShapeParams::default()),
            Err(DivergenceError::UnknownName(_))
        ));
        assert!(make_spec("alpha", ShapeParams::alpha(1.0)).is_err());
        assert!(make_spec("alpha", ShapeParams::alpha(0.0)).is_err());
        assert!(make_spec("jensen-shannon-weighted", ShapeParams::pi(1.0)).is_err());
        assert!(make_spec("jensen-shannon-weighted", ShapeParams::pi(0.0)).is_err());
        assert!(matches!(spec("kl").generator(0.0), Err(DivergenceError::NonPositive(_))));
        assert!(spec("kl").generator(-1.0).is_err());
        assert!(spec("kl").witness(0.0).is_err());
        let js = spec("jensen-shannon");
        assert!(matches!(js.conjugate(LN_2), Err(DivergenceError::OnBoundary { .. })));
        assert!(matches!(js.conjugate(5.0), Err(DivergenceError::OutsideDomain { .. })));
        assert!(matches!(spec("gan").conjugate(0.0), Err(DivergenceError::OnBoundary { .. })));
        // Closed ends are valid points.
        assert_eq!(spec("total-variation").conjugate(0.5).unwrap(), 0.5);
        assert!(spec("total-variation").conjugate(0.51).is_err());
    }

    #[test]
    fn activation_derivatives_match_finite_differences() {
        let mut specs = all_specs();
        specs.push(make_spec("alpha", ShapeParams::alpha(3.0)).unwrap());
        specs.push(make_spec("alpha", ShapeParams::alpha(-1.5)).unwrap());
        specs.push(make_spec("jensen-shannon-weighted", ShapeParams::pi(0.2)).unwrap());
        for s in &specs {
            for k in -40..=40 {
                let v = k as f64 * 0.2 + 0.013;
                let h = 1e-6;
                let dg = (s.activation(v + h) - s.activation(v - h)) / (2.0 * h);
                let dphi = (s.fused_second_term(v + h) - s.fused_second_term(v - h)) / (2.0 * h);
                let a = s.activation_derivative(v);
                let b = s.fused_second_term_derivative(v);
                assert!((dg - a).abs() <= 1e-6 * (1.0 + a.abs()), "{} g' at {v}", s.label());
                assert!((dphi - b).abs() <= 1e-6 * (1.0 + b.abs()), "{} phi' at {v}", s.label());
            }
        }
    }

    #[test]
    fn listing_rows() {
        let rows = listing();
        assert_eq!(rows.len(), 11);
        let gan = rows.iter().find(|r| r.name == "gan").unwrap().to_line();
        assert_eq!(gan, "gan\t-0.693147\t(-inf, 0)\t-");
        let kl = rows.iter().find(|r| r.name == "kl").unwrap().to_line();
        assert_eq!(kl, "kl\t1.000000\t(-inf, inf)\t-");
        let alpha = rows.iter().find(|r| r.name == "alpha").unwrap().to_line();
        assert!(alpha.ends_with("alpha=0.5"));
    }

    #[test]
    fn perspective_limits() {
        let kl = spec("kl");
        assert_eq!(kl.perspective(0.0, 0.0), 0.0);
        assert_eq!(kl.perspective(1.0, 0.0), f64::INFINITY);
        let rkl = spec("reverse-kl");
        assert_eq!(rkl.perspective(1.0, 0.0), 0.0);
        assert!((kl.perspective(0.2, 0.4) - 0.4 * 0.5 * ln(0.5)).abs() < 1e-16);
    }

    #[test]
    fn log_perspective_matches_direct() {
        let mut specs = all_specs();
        specs.push(make_spec("alpha", ShapeParams::alpha(3.0)).unwrap());
        specs.push(make_spec("alpha", ShapeParams::alpha(-1.5)).unwrap());
        specs.push(make_spec("jensen-shannon-weighted", ShapeParams::pi(0.2)).unwrap());
        for s in &specs {
            for &p in &[1e-6, 0.01, 0.3, 1.0, 2.5] {
                for &q in &[1e-5, 0.02, 0.3, 0.9, 4.0] {
                    let direct = q * s.generator_unchecked(p / q);
                    let logged = s.perspective_ln(ln(p), ln(q));
                    assert!(
                        (direct - logged).abs() <= 1e-12 * (1.0 + direct.abs()),
                        "{} p={p} q={q}: {direct} vs {logged}",
                        s.label()
                    );
                }
            }
            assert!(!s.perspective_ln(-1000.0, -1100.0).is_nan(), "{}", s.label());
            assert!(!s.perspective_ln(-2000.0, -1000.0).is_nan(), "{}", s.label());
            assert!(!s.perspective_ln(-5.0, f64::NEG_INFINITY).is_nan(), "{}", s.label());
        }
        // Both densities underflow, yet q²/p = 1.
        let neyman = spec("neyman-chi2");
        assert!((neyman.perspective_ln(-2000.0, -1000.0) - 1.0).abs() < 1e-12);
        assert!((spec("kl").perspective_ln(-800.0, -1000.0)) == 0.0);
    }
}

//! Scalar math shims.
//!
//! With the `std` feature the inherent `f64` methods are used (they call the
//! platform libm); without it the pure-Rust `libm` crate stands in.

#[cfg(feature = "std")]
mod imp {
    #[inline]
    pub fn exp(x: f64) -> f64 {
        x.exp()
    }
    #[inline]
    pub fn exp_m1(x: f64) -> f64 {
        x.exp_m1()
    }
    #[inline]
    pub fn ln(x: f64) -> f64 {
        x.ln()
    }
    #[inline]
    pub fn ln_1p(x: f64) -> f64 {
        x.ln_1p()
    }
    #[inline]
    pub fn sqrt(x: f64) -> f64 {
        x.sqrt()
    }
    #[inline]
    pub fn tanh(x: f64) -> f64 {
        x.tanh()
    }
    #[inline]
    pub fn powf(x: f64, y: f64) -> f64 {
        x.powf(y)
    }
    #[inline]
    pub fn cos(x: f64) -> f64 {
        x.cos()
    }
}

#[cfg(not(feature = "std"))]
mod imp {
    #[inline]
    pub fn exp(x: f64) -> f64 {
        libm::exp(x)
    }
    #[inline]
    pub fn exp_m1(x: f64) -> f64 {
        libm::expm1(x)
    }
    #[inline]
    pub fn ln(x: f64) -> f64 {
        libm::log(x)
    }
    #[inline]
    pub fn ln_1p(x: f64) -> f64 {
        libm::log1p(x)
    }
    #[inline]
    pub fn sqrt(x: f64) -> f64 {
        libm::sqrt(x)
    }
    #[inline]
    pub fn tanh(x: f64) -> f64 {
        libm::tanh(x)
    }
    #[inline]
    pub fn powf(x: f64, y: f64) -> f64 {
        libm::pow(x, y)
    }
    #[inline]
    pub fn cos(x: f64) -> f64 {
        libm::cos(x)
    }
}

pub use imp::*;

pub const LN_2: f64 = core::f64::consts::LN_2;

/// `ln(1 + e^x)` without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + ln_1p(exp(-x))
    } else {
        ln_1p(exp(x))
    }
}

/// `ln(softplus(x))`, accurate when `softplus(x)` underflows towards `e^x`.
#[inline]
pub fn log_softplus(x: f64) -> f64 {
    if x < -36.0 {
        // softplus(x) = e^x (1 - e^x/2 + ...) and the correction is below 1 ulp.
        x
    } else {
        ln(softplus(x))
    }
}

/// Logistic sigmoid `1 / (1 + e^{-x})`.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + exp(-x))
    } else {
        let e = exp(x);
        e / (1.0 + e)
    }
}

/// `ln(1 - e^{-a})` for `a > 0`.
#[inline]
pub fn log1mexp(a: f64) -> f64 {
    if a < LN_2 {
        ln(-exp_m1(-a))
    } else {
        ln_1p(-exp(-a))
    }
}

/// `u ln u` with the continuous extension `0 ln 0 = 0`.
#[inline]
pub fn xlogx(u: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        u * ln(u)
    }
}

/// `e^x` by range reduction and a degree-13 polynomial, without libm.
///
/// Branch-free so that loops over slices vectorize. Inputs are clamped to
/// `[-700, 700]`; relative error is a few ulps.
#[inline(always)]
pub fn exp_poly(x: f64) -> f64 {
    const LOG2E: f64 = core::f64::consts::LOG2_E;
    const LN2_HI: f64 = 6.931_471_803_691_238_164_9e-1;
    const LN2_LO: f64 = 1.908_214_929_270_587_700_02e-10;
    // 1.5 · 2^52: adding it rounds to an integer held in the low mantissa bits.
    const SHIFT: f64 = 6_755_399_441_055_744.0;
    let x = x.max(-700.0).min(700.0);
    let y = x * LOG2E + SHIFT;
    let k = y - SHIFT;
    let r = (x - k * LN2_HI) - k * LN2_LO;
    // Taylor coefficients to degree 13, combined by Estrin's scheme to keep
    // the dependency chain short.
    let r2 = r * r;
    let r4 = r2 * r2;
    let r8 = r4 * r4;
    let c01 = 1.0 + r;
    let c23 = 0.5 + r * (1.0 / 6.0);
    let c45 = 1.0 / 24.0 + r * (1.0 / 120.0);
    let c67 = 1.0 / 720.0 + r * (1.0 / 5_040.0);
    let c89 = 1.0 / 40_320.0 + r * (1.0 / 362_880.0);
    let c1011 = 1.0 / 3_628_800.0 + r * (1.0 / 39_916_800.0);
    let c1213 = 1.0 / 479_001_600.0 + r * (1.0 / 6_227_020_800.0);
    let lo = (c01 + r2 * c23) + r4 * (c45 + r2 * c67);
    let hi = (c89 + r2 * c1011) + r4 * c1213;
    let p = lo + r8 * hi;
    // Low bits of `y` hold k; shifting them into the exponent field builds 2^k.
    let scale = f64::from_bits(y.to_bits().wrapping_add(1023) << 52);
    p * scale
}

/// Hyperbolic tangent without libm calls, used on hot paths.
///
/// A rational approximation near zero, `(e^{2|x|} − 1)/(e^{2|x|} + 1)` elsewhere.
/// Both branches are computed and one is selected, so slice loops vectorize.
#[inline(always)]
pub fn fast_tanh(x: f64) -> f64 {
    const P0: f64 = -9.643_991_794_250_522_386_28e-1;
    const P1: f64 = -9.928_772_310_019_185_865_64e1;
    const P2: f64 = -1.614_687_684_417_084_479_52e3;
    const Q0: f64 = 1.128_116_784_916_329_314_02e2;
    const Q1: f64 = 2.235_488_390_601_004_485_83e3;
    const Q2: f64 = 4.844_063_053_251_254_860_48e3;
    let a = x.abs();
    let z = x * x;
    let q = ((z + Q0) * z + Q1) * z + Q2;
    let small_num = x * q + x * z * ((P0 * z + P1) * z + P2);
    let e = exp_poly(2.0 * a.min(20.0));
    // Select numerator and denominator first so only one division remains.
    let (num, den) = if a < 0.625 {
        (small_num, q)
    } else {
        ((e - 1.0).copysign(x), e + 1.0)
    };
    num / den
}

/// `fast_tanh` over a slice, in place.
///
/// With `std` on x86-64 the loop is compiled a second and third time for
/// AVX2 and AVX-512 and picked at runtime. Only the vector width changes
/// (no contraction into FMA), so every path gives bitwise-identical results.
pub fn tanh_in_place(xs: &mut [f64]) {
    #[cfg(all(feature = "std", target_arch = "x86_64"))]
    {
        if std::is_x86_feature_detected!("avx512f") {
            // Safety: the feature was just detected.
            unsafe { tanh_avx512(xs) };
            return;
        }
        if std::is_x86_feature_detected!("avx2") {
            // Safety: as above.
            unsafe { tanh_avx2(xs) };
            return;
        }
    }
    tanh_loop(xs)
}

#[inline(always)]
fn tanh_loop(xs: &mut [f64]) {
    for x in xs.iter_mut() {
        *x = fast_tanh(*x);
    }
}

#[cfg(all(feature = "std", target_arch = "x86_64"))]
#[target_feature(enable = "avx2")]
unsafe fn tanh_avx2(xs: &mut [f64]) {
    tanh_loop(xs)
}

#[cfg(all(feature = "std", target_arch = "x86_64"))]
#[target_feature(enable = "avx512f")]
unsafe fn tanh_avx512(xs: &mut [f64]) {
    tanh_loop(xs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softplus_extremes() {
        assert_eq!(softplus(800.0), 800.0);
        assert!(softplus(-800.0) >= 0.0);
        assert!((softplus(0.0) - LN_2).abs() < 1e-16);
        assert!((log_softplus(-700.0) + 700.0).abs() < 1e-12);
        assert!((log_softplus(-30.0) - ln(ln_1p(exp(-30.0)))).abs() < 1e-14);
    }

    #[test]
    fn log1mexp_branches_agree() {
        for &a in &[1e-8, 0.1, 0.69, 0.7, 3.0] {
            let direct = ln(1.0 - exp(-a));
            let rel = ((log1mexp(a) - direct) / direct).abs();
            assert!(rel < 1e-7, "a={a}");
        }
        let series = -exp(-40.0) - 0.5 * exp(-80.0);
        assert!(((log1mexp(40.0) - series) / series).abs() < 1e-15);
    }

    #[test]
    fn fast_tanh_matches_tanh() {
        let mut x = -25.0;
        while x < 25.0 {
            let d = (fast_tanh(x) - tanh(x)).abs();
            assert!(d <= 4.0 * f64::EPSILON * tanh(x).abs().max(1e-300), "x={x}");
            x += 0.001_37;
        }
        assert_eq!(fast_tanh(1e-20), 1e-20);
        assert_eq!(fast_tanh(-400.0), -1.0);
        assert_eq!(fast_tanh(0.0), 0.0);
    }

    #[test]
    fn exp_poly_matches_exp() {
        let mut x = -700.0;
        while x < 700.0 {
            let rel = ((exp_poly(x) - exp(x)) / exp(x)).abs();
            assert!(rel <= 4.0 * f64::EPSILON, "x={x}: {rel}");
            x += 0.0731;
        }
        assert_eq!(exp_poly(0.0), 1.0);
    }

    #[test]
    fn slice_tanh_is_bitwise_scalar_tanh() {
        let mut xs: alloc::vec::Vec<f64> = (0..10_007).map(|i| (i as f64 - 5000.0) * 0.004_3).collect();
        let expect: alloc::vec::Vec<u64> = xs.iter().map(|&x| fast_tanh(x).to_bits()).collect();
        tanh_in_place(&mut xs);
        assert!(xs.iter().map(|x| x.to_bits()).eq(expect));
    }
}

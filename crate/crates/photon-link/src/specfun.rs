//! Log-domain Poisson statistics and special functions.
//!
//! Every analytical error-rate formula in this crate reduces to Poisson
//! point-mass terms, Poisson tail sums, the modified Bessel function I₀,
//! and the first-order Marcum Q function. This module evaluates all of them
//! with the conventions the rest of the crate relies on:
//!
//! - probability masses are computed in log space (`k·ln λ − λ − ln k!`) so
//!   that λⁿ and e^(−λ) never overflow or underflow separately;
//! - tail probabilities come from the regularized incomplete gamma function
//!   rather than term-by-term pmf summation, so powers of tails do not
//!   amplify cancellation error;
//! - infinite series are truncated adaptively: summation stops once the
//!   remaining Poisson mass (itself bounded via the gamma relation) drops
//!   below `SERIES_TOL`, with a hard cap of `SERIES_TERM_CAP` terms.
//!
//! All functions are pure and reentrant.

use crate::{Error, Result};

/// Default adaptive-truncation tolerance for series evaluation.
pub const SERIES_TOL: f64 = 1e-15;

/// Hard cap on the number of series terms, as a backstop for the adaptive
/// truncation rule.
pub const SERIES_TERM_CAP: u64 = 100_000;

const GAMMA_ITMAX: usize = 10_000;
const GAMMA_EPS: f64 = f64::EPSILON;
const GAMMA_FPMIN: f64 = f64::MIN_POSITIVE / f64::EPSILON;

// ---------------------------------------------------------------------------
// LogProb
// ---------------------------------------------------------------------------

/// A probability stored in the natural-log domain.
///
/// `value ≤ 0` for any probability; `−∞` represents probability exactly 0.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogProb {
    value: f64,
}

impl LogProb {
    /// Wrap a log-domain probability. `value` must not be NaN and must not
    /// exceed 0 by more than rounding noise.
    pub fn new(value: f64) -> LogProb {
        debug_assert!(!value.is_nan());
        debug_assert!(value <= 1e-9, "log-probability must be <= 0, got {value}");
        LogProb { value }
    }

    /// Probability exactly 0 (log value −∞).
    pub fn impossible() -> LogProb {
        LogProb {
            value: f64::NEG_INFINITY,
        }
    }

    /// The natural-log value.
    pub fn value(self) -> f64 {
        self.value
    }

    /// Back to the linear domain; always lands in [0, 1].
    pub fn prob(self) -> f64 {
        self.value.exp().min(1.0)
    }
}

// ---------------------------------------------------------------------------
// Factorials and the log-gamma function
// ---------------------------------------------------------------------------

/// ln(n!): exact integer product for n ≤ 20, log-gamma beyond.
pub fn log_factorial(n: u64) -> f64 {
    if n <= 20 {
        // 20! = 2432902008176640000 still fits in u64.
        ((1..=n).product::<u64>().max(1) as f64).ln()
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// Lanczos approximation of ln Γ(x) for x > 0 (g = 7, 9 coefficients).
pub fn ln_gamma(x: f64) -> f64 {
    #[allow(clippy::excessive_precision)]
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    debug_assert!(x > 0.0);
    let z = x - 1.0;
    let mut ag = COEFFS[0];
    for (i, &c) in COEFFS.iter().enumerate().skip(1) {
        ag += c / (z + i as f64);
    }
    let t = z + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + ag.ln()
}

// ---------------------------------------------------------------------------
// Poisson pmf and tails
// ---------------------------------------------------------------------------

fn check_lambda(lambda: f64) -> Result<()> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::Domain(format!(
            "Poisson mean must be finite and >= 0, got {lambda}"
        )));
    }
    Ok(())
}

/// Log-pmf of a Poisson(λ) count: `k·ln λ − λ − ln k!`.
///
/// For λ = 0 the distribution is degenerate at 0: the log-pmf is 0 for k = 0
/// and −∞ otherwise.
pub fn poisson_log_pmf(k: u64, lambda: f64) -> Result<LogProb> {
    check_lambda(lambda)?;
    if lambda == 0.0 {
        return Ok(if k == 0 {
            LogProb::new(0.0)
        } else {
            LogProb::impossible()
        });
    }
    Ok(LogProb::new(
        k as f64 * lambda.ln() - lambda - log_factorial(k),
    ))
}

/// P(X ≥ k) for X ~ Poisson(λ), via the regularized incomplete gamma
/// relation P(X ≥ k) = P(k, λ). Decreasing in k, 1 at k = 0.
pub fn poisson_tail_geq(k: u64, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    if k == 0 {
        return Ok(1.0);
    }
    Ok(gamma_reg_lower(k as f64, lambda))
}

/// P(X < k) for X ~ Poisson(λ), the complement of [`poisson_tail_geq`]:
/// P(X < k) = Q(k, λ). Returns 0 for k = 0 (empty sum).
pub fn poisson_cdf_below(k: u64, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    if k == 0 {
        return Ok(0.0);
    }
    Ok(gamma_reg_upper(k as f64, lambda))
}

/// Regularized lower incomplete gamma P(a, x) = γ(a, x)/Γ(a), a > 0, x ≥ 0.
fn gamma_reg_lower(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < a + 1.0 {
        gamma_series(a, x)
    } else {
        1.0 - gamma_contfrac(a, x)
    }
}

/// Regularized upper incomplete gamma Q(a, x) = Γ(a, x)/Γ(a) = 1 − P(a, x).
fn gamma_reg_upper(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x < a + 1.0 {
        1.0 - gamma_series(a, x)
    } else {
        gamma_contfrac(a, x)
    }
}

/// Series representation of P(a, x); converges fast for x < a + 1.
fn gamma_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..GAMMA_ITMAX {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * GAMMA_EPS {
            break;
        }
    }
    (sum * (a * x.ln() - x - ln_gamma(a)).exp()).clamp(0.0, 1.0)
}

/// Continued-fraction representation of Q(a, x) by modified Lentz;
/// converges fast for x ≥ a + 1.
fn gamma_contfrac(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / GAMMA_FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..GAMMA_ITMAX {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < GAMMA_FPMIN {
            d = GAMMA_FPMIN;
        }
        c = b + an / c;
        if c.abs() < GAMMA_FPMIN {
            c = GAMMA_FPMIN;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < GAMMA_EPS {
            break;
        }
    }
    (h * (a * x.ln() - x - ln_gamma(a)).exp()).clamp(0.0, 1.0)
}

// ---------------------------------------------------------------------------
// Modified Bessel function I0 (log scale)
// ---------------------------------------------------------------------------

// Chebyshev expansions of exp(−x)·I0(x) (Cephes). A covers 0 ≤ x ≤ 8 in the
// variable x/2 − 2, B covers x > 8 in the variable 32/x − 2.
#[allow(clippy::excessive_precision)]
const BESSI0_COEFFS_A: [f64; 30] = [
    -4.415_341_646_479_339_5e-18,
    3.330_794_518_822_238_4e-17,
    -2.431_279_846_547_955e-16,
    1.715_391_285_555_133e-15,
    -1.168_533_287_799_345_1e-14,
    7.676_185_498_604_936e-14,
    -4.856_446_783_111_929e-13,
    2.955_052_663_129_64e-12,
    -1.726_826_291_441_556e-11,
    9.675_809_035_373_237e-11,
    -5.189_795_601_635_263e-10,
    2.659_823_724_682_386_6e-9,
    -1.300_025_009_986_248e-8,
    6.046_995_022_541_919e-8,
    -2.670_793_853_940_612e-7,
    1.117_387_539_120_103_7e-6,
    -4.416_738_358_458_750_5e-6,
    1.644_844_807_072_889_6e-5,
    -5.754_195_010_082_104e-5,
    1.885_028_850_958_416_5e-4,
    -5.763_755_745_385_824e-4,
    1.639_475_616_941_335_7e-3,
    -4.324_309_995_050_576e-3,
    1.054_646_039_459_499_8e-2,
    -2.373_741_480_589_947e-2,
    4.930_528_423_967_071e-2,
    -9.490_109_704_804_764e-2,
    1.716_209_015_222_087_7e-1,
    -3.046_826_723_431_984e-1,
    6.767_952_744_094_761e-1,
];

#[allow(clippy::excessive_precision)]
const BESSI0_COEFFS_B: [f64; 25] = [
    -7.233_180_487_874_754e-18,
    -4.830_504_485_944_182e-18,
    4.465_621_420_296_76e-17,
    3.461_222_867_697_461e-17,
    -2.827_623_980_516_583_6e-16,
    -3.425_485_619_677_219e-16,
    1.772_560_133_056_526_3e-15,
    3.811_680_669_352_622_4e-15,
    -9.554_846_698_828_307e-15,
    -4.150_569_347_287_222e-14,
    1.540_086_217_521_41e-14,
    3.852_778_382_742_142_6e-13,
    7.180_124_451_383_666e-13,
    -1.794_178_531_506_806_2e-12,
    -1.321_581_184_044_771_3e-11,
    -3.149_916_527_963_241_6e-11,
    1.188_914_710_784_643_9e-11,
    4.940_602_388_224_97e-10,
    3.396_232_025_708_386_5e-9,
    2.266_668_990_498_178e-8,
    2.048_918_589_469_063_8e-7,
    2.891_370_520_834_756_7e-6,
    6.889_758_346_916_825e-5,
    3.369_116_478_255_694_3e-3,
    8.044_904_110_141_088e-1,
];

fn chbevl(x: f64, coeffs: &[f64]) -> f64 {
    let mut b0 = coeffs[0];
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &c in coeffs.iter().skip(1) {
        b2 = b1;
        b1 = b0;
        b0 = x.mul_add(b1, c) - b2;
    }
    0.5 * (b0 - b2)
}

/// ln I₀(z) for z ≥ 0, safe at arguments where I₀ itself would overflow.
///
/// ln I₀(z) − (z − ½·ln(2πz)) → 0 as z → ∞.
pub fn bessel_i0_log(z: f64) -> Result<f64> {
    if !z.is_finite() || z < 0.0 {
        return Err(Error::Domain(format!(
            "Bessel I0 argument must be finite and >= 0, got {z}"
        )));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    // i0e(z) = exp(−z)·I0(z), so ln I0(z) = z + ln(i0e(z)).
    let i0e = if z <= 8.0 {
        chbevl(z.mul_add(0.5, -2.0), &BESSI0_COEFFS_A)
    } else {
        chbevl(32.0f64.mul_add(z.recip(), -2.0), &BESSI0_COEFFS_B) / z.sqrt()
    };
    Ok(z + i0e.ln())
}

// ---------------------------------------------------------------------------
// Marcum Q function (first order)
// ---------------------------------------------------------------------------

/// First-order Marcum Q function Q₁(a, b).
///
/// Evaluated through the Poisson double-series identity
/// Q₁(a, b) = Σ_{k≥0} pmf(k; b²/2) · P(Poisson(a²/2) ≥ k),
/// with each factor in log space and the outer sum truncated once the
/// remaining Poisson(b²/2) mass falls below [`SERIES_TOL`]. The cases a = 0
/// (Rayleigh tail) and b = 0 (full support) are handled analytically.
pub fn marcum_q1(a: f64, b: f64) -> Result<f64> {
    if !a.is_finite() || a < 0.0 || !b.is_finite() || b < 0.0 {
        return Err(Error::Domain(format!(
            "Marcum Q arguments must be finite and >= 0, got ({a}, {b})"
        )));
    }
    if b == 0.0 {
        return Ok(1.0);
    }
    if a == 0.0 {
        return Ok((-0.5 * b * b).exp());
    }
    let x = 0.5 * a * a;
    let y = 0.5 * b * b;
    let mut q = 0.0;
    let mut k = 0u64;
    loop {
        let w = poisson_log_pmf(k, y)?.prob();
        if w > 0.0 {
            q += w * poisson_tail_geq(k, x)?;
        }
        if poisson_tail_geq(k + 1, y)? < SERIES_TOL || k >= SERIES_TERM_CAP {
            break;
        }
        k += 1;
    }
    Ok(q.min(1.0))
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

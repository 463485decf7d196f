//! Analytical SER/BER for M-ary photon-counting PPM.
//!
//! A PPM symbol places one laser pulse in one of M time slots; the receiver
//! counts photons per slot and picks the largest count, breaking ties
//! uniformly at random. With mean signal count `K_s` in the pulsed slot and
//! mean background count `K_b` in every slot, the slot counts are
//! independent Poisson variables and the error rate is exactly computable.
//!
//! Provided here:
//! - quantum-limit SER/BER (no background, errors only from missed pulses),
//! - the 2-ary closed form `Q₁(√(2K_b), √(2(K_s+K_b))) − ½·e^(−(K_s+2K_b))·I₀(2√((K_s+K_b)K_b))`,
//! - the exact M-ary SER with randomized tie-breaking,
//! - the orthogonal-signalling upper bound `1 − (1 − PE₂)^M`,
//! - the SER → BER conversion factor `M / (2(M−1))`.

use crate::specfun::{
    bessel_i0_log, log_factorial, marcum_q1, poisson_cdf_below, poisson_log_pmf,
    poisson_tail_geq, SERIES_TERM_CAP,
};
use crate::{Error, Result};

/// A photon-counting PPM channel: modulation order M (power of 2), mean
/// signal count per pulsed slot, and mean background count per slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PpmChannel {
    order: u32,
    signal_counts: f64,
    background_counts: f64,
}

impl PpmChannel {
    /// Build a channel, enforcing M ≥ 2 power of two and nonnegative counts.
    pub fn new(order: u32, signal_counts: f64, background_counts: f64) -> Result<PpmChannel> {
        validate_order(order)?;
        for (name, v) in [("K_s", signal_counts), ("K_b", background_counts)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Domain(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(PpmChannel {
            order,
            signal_counts,
            background_counts,
        })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Bits per symbol, log2(M).
    pub fn bits_per_symbol(&self) -> u32 {
        self.order.trailing_zeros()
    }

    pub fn signal_counts(&self) -> f64 {
        self.signal_counts
    }

    pub fn background_counts(&self) -> f64 {
        self.background_counts
    }
}

/// SER, BER, upper bound, and the mass ignored by series truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRates {
    pub ser: f64,
    pub ber: f64,
    pub bound_ser: f64,
    pub truncation_residual: f64,
}

/// An adaptively truncated SER value together with the (upper bound on the)
/// probability mass the truncation ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedSer {
    pub ser: f64,
    pub residual: f64,
}

fn validate_order(order: u32) -> Result<()> {
    if order < 2 || !order.is_power_of_two() {
        return Err(Error::Domain(format!(
            "PPM order must be a power of 2 and >= 2, got {order}"
        )));
    }
    Ok(())
}

fn validate_photons(n_ph: f64) -> Result<()> {
    if !n_ph.is_finite() || n_ph < 0.0 {
        return Err(Error::Domain(format!(
            "photon count must be finite and >= 0, got {n_ph}"
        )));
    }
    Ok(())
}

/// Quantum-limit SER: (M−1)/M · e^(−n_ph).
///
/// With zero background the only error mechanism is detecting no photons at
/// all (probability e^(−n_ph)), after which the receiver guesses among the
/// M slots and is wrong with probability (M−1)/M.
pub fn quantum_ser(order: u32, n_ph: f64) -> Result<f64> {
    validate_order(order)?;
    validate_photons(n_ph)?;
    let m = order as f64;
    Ok((m - 1.0) / m * (-n_ph).exp())
}

/// Quantum-limit BER: the SER→BER conversion collapses the M dependence and
/// leaves ½·e^(−n_ph) for every order.
pub fn quantum_ber(order: u32, n_ph: f64) -> Result<f64> {
    ser_to_ber(order, quantum_ser(order, n_ph)?)
}

/// Exact 2-ary PPM symbol error probability in closed form:
///
/// PE₂ = Q₁(√(2K_b), √(2(K_s+K_b))) − ½·e^(−(K_s+2K_b))·I₀(2√((K_s+K_b)·K_b))
///
/// The Bessel term is evaluated as exp(ln I₀ − (K_s+2K_b)) so it cannot
/// overflow. The result lies in [0, ½]; at K_b = 0 it reduces to the
/// quantum limit ½·e^(−K_s).
pub fn pe2_closed(k_s: f64, k_b: f64) -> Result<f64> {
    validate_photons(k_s)?;
    validate_photons(k_b)?;
    let q = marcum_q1((2.0 * k_b).sqrt(), (2.0 * (k_s + k_b)).sqrt())?;
    let ln_i0 = bessel_i0_log(2.0 * ((k_s + k_b) * k_b).sqrt())?;
    let bessel_term = 0.5 * (ln_i0 - (k_s + 2.0 * k_b)).exp();
    Ok((q - bessel_term).clamp(0.0, 0.5))
}

/// Exact M-ary PPM SER.
///
/// Conditioning on the pulsed slot's count k₁, a symbol error occurs in two
/// disjoint ways:
/// 1. at least one of the M−1 background slots counts strictly more than k₁
///    (certain error), or
/// 2. no slot exceeds k₁ but m of them tie it, in which case the uniform
///    tie-break fails with probability m/(m+1); the remaining M−1−m slots
///    count strictly less.
///
/// The outer sum over k₁ is weighted by pmf(k₁; K_s+K_b) and truncated once
/// the remaining Poisson weight mass drops below `tol`; that mass bounds the
/// ignored contribution and is reported as the residual. Inner powers are
/// formed as exp(m·ln p) with 0⁰ = 1 for the empty-factor cases.
pub fn ser_mppm_exact(ch: &PpmChannel, tol: f64) -> Result<TruncatedSer> {
    if !tol.is_finite() || tol <= 0.0 || tol > 1e-6 {
        return Err(Error::Domain(format!(
            "truncation tolerance must lie in (0, 1e-6], got {tol}"
        )));
    }
    let lambda_on = ch.signal_counts + ch.background_counts;
    let k_b = ch.background_counts;
    let mut ser = 0.0;
    let mut k1 = 0u64;
    let residual = loop {
        let weight = poisson_log_pmf(k1, lambda_on)?.prob();
        if weight > 0.0 {
            let p_gt = poisson_tail_geq(k1 + 1, k_b)?;
            let p_lt = poisson_cdf_below(k1, k_b)?;
            let ln_p_eq = poisson_log_pmf(k1, k_b)?.value();
            ser += weight * error_given_on_count(ch.order, p_gt, ln_p_eq, p_lt);
        }
        let remaining = poisson_tail_geq(k1 + 1, lambda_on)?;
        if remaining < tol || k1 >= SERIES_TERM_CAP {
            break remaining;
        }
        k1 += 1;
    };
    Ok(TruncatedSer {
        ser: ser.min(1.0),
        residual,
    })
}

/// P(symbol error | pulsed slot counted k₁), with p_gt = P(X > k₁),
/// ln_p_eq = ln P(X = k₁), p_lt = P(X < k₁) for one background slot.
fn error_given_on_count(order: u32, p_gt: f64, ln_p_eq: f64, p_lt: f64) -> f64 {
    let n_off = order - 1;
    // 1 − (1 − p_gt)^(M−1), stable when p_gt is tiny
    let any_greater = if p_gt >= 1.0 {
        1.0
    } else {
        -(n_off as f64 * (-p_gt).ln_1p()).exp_m1()
    };
    let mut tie = 0.0;
    if ln_p_eq > f64::NEG_INFINITY {
        let ln_p_lt = p_lt.ln();
        for m in 1..=n_off {
            let rest = n_off - m;
            if rest > 0 && p_lt == 0.0 {
                continue;
            }
            let mut ln_term = ln_choose(n_off, m) + m as f64 * ln_p_eq;
            if rest > 0 {
                ln_term += rest as f64 * ln_p_lt;
            }
            tie += m as f64 / (m as f64 + 1.0) * ln_term.exp();
        }
    }
    (any_greater + tie).min(1.0)
}

fn ln_choose(n: u32, k: u32) -> f64 {
    log_factorial(n as u64) - log_factorial(k as u64) - log_factorial((n - k) as u64)
}

/// Upper bound on the M-ary SER from pairwise 2-ary errors:
/// 1 − (1 − PE₂(K_s, K_b))^M, clamped to [0, 1].
pub fn hughes_bound(ch: &PpmChannel) -> Result<f64> {
    let pe2 = pe2_closed(ch.signal_counts, ch.background_counts)?;
    let bound = -(ch.order as f64 * (-pe2).ln_1p()).exp_m1();
    Ok(bound.clamp(0.0, 1.0))
}

/// Convert SER to BER: a wrong symbol picks one of the M−1 other slots
/// uniformly, flipping on average b·2^(b−1)/(2^b−1) of the b bits, so
/// BER = M/(2(M−1)) · SER. The factor lies in (½, 1].
pub fn ser_to_ber(order: u32, ser: f64) -> Result<f64> {
    validate_order(order)?;
    if !ser.is_finite() || !(0.0..=1.0).contains(&ser) {
        return Err(Error::Domain(format!(
            "SER must lie in [0, 1], got {ser}"
        )));
    }
    let m = order as f64;
    Ok(ser * m / (2.0 * (m - 1.0)))
}

/// Exact SER, converted BER, upper bound, and truncation residual in one
/// record.
pub fn ber_mppm(ch: &PpmChannel, tol: f64) -> Result<ErrorRates> {
    let TruncatedSer { ser, residual } = ser_mppm_exact(ch, tol)?;
    Ok(ErrorRates {
        ser,
        ber: ser_to_ber(ch.order, ser)?,
        bound_ser: hughes_bound(ch)?,
        truncation_residual: residual,
    })
}

#[cfg(test)]
#[allow(clippy::excessive_precision)] // frozen reference digits kept as computed
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    fn assert_rel(got: f64, want: f64, rel: f64) {
        let scale = want.abs().max(f64::MIN_POSITIVE);
        assert!(
            (got - want).abs() <= rel * scale,
            "got {got:e}, want {want:e} (rel tol {rel:e})"
        );
    }

    /// Naive 2-ary double sum with recurrence pmf terms: an independent
    /// route that never touches the gamma-function tails.
    fn pe2_double_sum(k_s: f64, k_b: f64) -> f64 {
        let lam = k_s + k_b;
        let kmax = (lam + 40.0 * lam.sqrt() + 60.0) as u64;
        let mut pmf_on = (-lam).exp();
        let mut pmf_off = (-k_b).exp();
        let mut cdf_off_below = 0.0;
        let mut pe = 0.0;
        for k in 0..=kmax {
            if k > 0 {
                pmf_on *= lam / k as f64;
                cdf_off_below += pmf_off;
                pmf_off *= k_b / k as f64;
            }
            let tail_gt = 1.0 - cdf_off_below - pmf_off; // P(X > k)
            pe += pmf_on * (tail_gt.max(0.0) + 0.5 * pmf_off);
        }
        pe
    }

    // -- channel construction -------------------------------------------------

    #[test]
    fn channel_validates_inputs() {
        assert!(PpmChannel::new(2, 1.0, 0.0).is_ok());
        assert!(PpmChannel::new(1, 1.0, 0.0).is_err());
        assert!(PpmChannel::new(3, 1.0, 0.0).is_err());
        assert!(PpmChannel::new(0, 1.0, 0.0).is_err());
        assert!(PpmChannel::new(4, -1.0, 0.0).is_err());
        assert!(PpmChannel::new(4, 1.0, f64::NAN).is_err());
        assert_eq!(PpmChannel::new(16, 1.0, 0.0).unwrap().bits_per_symbol(), 4);
    }

    // -- quantum limits ---------------------------------------------------------

    #[test]
    fn quantum_ser_values() {
        assert_eq!(quantum_ser(2, 0.0).unwrap(), 0.5);
        for &n in &[0.5, 3.0, 20.0] {
            assert_rel(quantum_ser(2, n).unwrap(), 0.5 * (-n).exp(), 1e-15);
        }
        assert_rel(
            quantum_ser(4, std::f64::consts::LN_2).unwrap(),
            0.375,
            1e-15,
        );
        assert!(quantum_ser(1, 1.0).is_err());
    }

    #[test]
    fn quantum_ber_independent_of_order() {
        assert_eq!(quantum_ber(8, 0.0).unwrap(), 0.5);
        for &n in &[0.0, 1.0, 7.0, 20.0, 50.0] {
            let b2 = quantum_ber(2, n).unwrap();
            let b32 = quantum_ber(32, n).unwrap();
            assert_rel(b32, b2, 1e-14);
            assert_rel(b2, 0.5 * (-n).exp(), 1e-14);
        }
        assert_rel(quantum_ber(16, 20.0).unwrap(), 1.0305768112192789e-9, 1e-12);
    }

    // -- 2-ary closed form --------------------------------------------------------

    #[test]
    fn pe2_reduces_to_quantum_limit_without_background() {
        for &ks in &[0.5, 2.0, 20.0, 50.0] {
            assert_rel(pe2_closed(ks, 0.0).unwrap(), 0.5 * (-ks).exp(), 1e-13);
        }
    }

    #[test]
    fn pe2_is_half_without_signal() {
        for &kb in &[0.0, 0.3, 1.0, 5.0] {
            let pe = pe2_closed(0.0, kb).unwrap();
            assert!((pe - 0.5).abs() < 1e-13, "pe2(0,{kb}) = {pe}");
        }
    }

    #[test]
    fn pe2_known_value() {
        // extended-precision reference
        assert_rel(pe2_closed(20.0, 2.0).unwrap(), 2.1524039242613246e-6, 1e-10);
    }

    #[test]
    fn pe2_closed_form_equals_double_sum_on_grid() {
        for &ks in &[0.0, 1.0, 5.0, 20.0, 50.0] {
            for &kb in &[0.0, 0.1, 1.0, 2.0, 5.0] {
                let closed = pe2_closed(ks, kb).unwrap();
                let dsum = pe2_double_sum(ks, kb);
                assert!(
                    (closed - dsum).abs() < 1e-10,
                    "closed {closed:e} vs double sum {dsum:e} at ({ks},{kb})"
                );
            }
        }
    }

    #[test]
    fn pe2_stays_in_half_interval() {
        for &ks in &[0.0, 0.1, 1.0, 10.0, 80.0] {
            for &kb in &[0.0, 0.5, 2.0, 10.0] {
                let pe = pe2_closed(ks, kb).unwrap();
                assert!((0.0..=0.5).contains(&pe), "pe2({ks},{kb}) = {pe}");
            }
        }
    }

    // -- exact M-ary SER ------------------------------------------------------------

    #[test]
    fn ser_mppm_collapses_to_pe2_at_order_two() {
        for &ks in &[0.0, 1.0, 5.0, 20.0] {
            for &kb in &[0.0, 0.25, 1.0, 2.0] {
                let ch = PpmChannel::new(2, ks, kb).unwrap();
                let got = ser_mppm_exact(&ch, 1e-12).unwrap().ser;
                let want = pe2_closed(ks, kb).unwrap();
                assert!(
                    (got - want).abs() < 1e-10,
                    "M=2 SER {got:e} vs PE2 {want:e} at ({ks},{kb})"
                );
            }
        }
    }

    #[test]
    fn ser_mppm_reduces_to_quantum_limit_without_background() {
        for &order in &[2u32, 4, 8, 16, 32] {
            for &ks in &[0.0, 2.0, 20.0] {
                let ch = PpmChannel::new(order, ks, 0.0).unwrap();
                let got = ser_mppm_exact(&ch, 1e-12).unwrap().ser;
                let want = quantum_ser(order, ks).unwrap();
                assert_rel(got, want, 1e-12);
            }
        }
    }

    #[test]
    fn ser_mppm_known_values() {
        // frozen against the exhaustive joint-enumeration oracle
        let ch = PpmChannel::new(4, 2.0, 0.5).unwrap();
        assert_rel(ser_mppm_exact(&ch, 1e-12).unwrap().ser, 0.2330655772545584, 1e-10);
        let ch = PpmChannel::new(8, 20.0, 0.5).unwrap();
        assert_rel(ser_mppm_exact(&ch, 1e-12).unwrap().ser, 2.957092838294542e-7, 1e-9);
        // pure-guess symmetry: no signal, M-way coin flip
        let ch = PpmChannel::new(4, 0.0, 1.0).unwrap();
        assert_rel(ser_mppm_exact(&ch, 1e-12).unwrap().ser, 0.75, 1e-12);
    }

    #[test]
    fn ser_mppm_residual_respects_tolerance() {
        for &tol in &[1e-8, 1e-10, 1e-12] {
            let ch = PpmChannel::new(16, 20.0, 1.0).unwrap();
            let out = ser_mppm_exact(&ch, tol).unwrap();
            assert!(out.residual < tol, "residual {} >= tol {}", out.residual, tol);
        }
    }

    #[test]
    fn ser_mppm_rejects_bad_tolerance() {
        let ch = PpmChannel::new(4, 1.0, 0.5).unwrap();
        assert!(ser_mppm_exact(&ch, 0.0).is_err());
        assert!(ser_mppm_exact(&ch, 1e-3).is_err());
        assert!(ser_mppm_exact(&ch, -1e-9).is_err());
    }

    #[test]
    fn ser_mppm_monotone_in_signal() {
        for &order in &[2u32, 4, 8, 16, 32] {
            for &kb in &[0.0, 0.25, 1.0, 2.35, 4.7] {
                let mut prev = 1.0;
                for ks in 1..=50u32 {
                    let ch = PpmChannel::new(order, ks as f64, kb).unwrap();
                    let ser = ser_mppm_exact(&ch, 1e-10).unwrap().ser;
                    assert!(
                        ser <= prev + 1e-12,
                        "SER increased in K_s at M={order}, K_s={ks}, K_b={kb}"
                    );
                    prev = ser;
                }
            }
        }
    }

    #[test]
    fn ser_mppm_monotone_in_background() {
        for &order in &[2u32, 4, 8, 16, 32] {
            for &ks in &[1.0, 5.0, 20.0, 50.0] {
                let mut prev = 0.0;
                for &kb in &[0.0, 0.25, 1.0, 2.35, 4.7] {
                    let ch = PpmChannel::new(order, ks, kb).unwrap();
                    let ser = ser_mppm_exact(&ch, 1e-10).unwrap().ser;
                    assert!(
                        ser >= prev - 1e-12,
                        "SER decreased in K_b at M={order}, K_s={ks}, K_b={kb}"
                    );
                    prev = ser;
                }
            }
        }
    }

    // -- bound and conversion ----------------------------------------------------------

    #[test]
    fn hughes_bound_known_values() {
        let ch = PpmChannel::new(2, std::f64::consts::LN_2, 0.0).unwrap();
        assert_rel(hughes_bound(&ch).unwrap(), 0.4375, 1e-12);
        for &order in &[2u32, 8, 64] {
            let ch = PpmChannel::new(order, 0.0, 1.0).unwrap();
            assert_rel(
                hughes_bound(&ch).unwrap(),
                1.0 - 0.5f64.powi(order as i32),
                1e-12,
            );
        }
    }

    #[test]
    fn hughes_bound_dominates_exact_ser() {
        for &order in &[2u32, 4, 16, 32] {
            for &ks in &[0.0, 1.0, 5.0, 20.0] {
                for &kb in &[0.0, 0.25, 1.0, 2.0] {
                    let ch = PpmChannel::new(order, ks, kb).unwrap();
                    let bound = hughes_bound(&ch).unwrap();
                    let exact = ser_mppm_exact(&ch, TOL).unwrap().ser;
                    assert!(
                        bound >= exact,
                        "bound {bound:e} < exact {exact:e} at (M={order},{ks},{kb})"
                    );
                }
            }
        }
    }

    #[test]
    fn ser_to_ber_factor() {
        assert_eq!(ser_to_ber(2, 0.37).unwrap(), 0.37);
        assert_rel(ser_to_ber(4, 0.3).unwrap(), 0.2, 1e-15);
        assert_rel(ser_to_ber(128, 0.5).unwrap(), 0.5 * 64.0 / 127.0, 1e-15);
        for &order in &[2u32, 4, 8, 16, 32, 64, 128] {
            let f = ser_to_ber(order, 1.0).unwrap();
            assert!(f > 0.5 && f <= 1.0, "factor {f} out of (1/2, 1] at M={order}");
        }
        assert!(ser_to_ber(4, 1.5).is_err());
        assert!(ser_to_ber(4, -0.1).is_err());
        assert!(ser_to_ber(3, 0.5).is_err());
    }

    #[test]
    fn ber_mppm_composes_consistently() {
        let ch = PpmChannel::new(2, 20.0, 0.0).unwrap();
        let rates = ber_mppm(&ch, TOL).unwrap();
        assert_rel(rates.ber, 0.5 * (-20.0f64).exp(), 1e-12);

        let ch = PpmChannel::new(2, 0.0, 1.0).unwrap();
        let rates = ber_mppm(&ch, TOL).unwrap();
        assert!((rates.ser - 0.5).abs() < 1e-10);
        assert!((rates.ber - 0.5).abs() < 1e-10);

        let ch = PpmChannel::new(8, 20.0, 0.5).unwrap();
        let rates = ber_mppm(&ch, TOL).unwrap();
        assert_rel(rates.ber / rates.ser, 8.0 / 14.0, 1e-13);
        assert!(rates.ber <= rates.ser && rates.ser <= rates.bound_ser);
        assert!(rates.truncation_residual < TOL);
    }
}

//! Seeded Poisson Monte Carlo simulation of M-ary PPM, plus a small-instance
//! exhaustive enumeration oracle.
//!
//! Reproducibility model: every symbol gets its own ChaCha8 stream, keyed by
//! the master seed and the symbol's global index. Tallies are therefore
//! bit-identical for a fixed seed regardless of chunk size or how many
//! worker threads rayon distributes the chunks over; chunking is purely a
//! work-partitioning knob.
//!
//! Poisson counts are drawn by CDF inversion for λ < 10 and by Hörmann's
//! PTRS transformed-rejection method for λ ≥ 10 — both sample the exact
//! distribution; no Gaussian approximation anywhere.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::ppm::PpmChannel;
use crate::specfun::log_factorial;
use crate::{Error, Result};

/// Configuration for one simulation run.
#[derive(Debug, Clone, Copy)]
pub struct SimConfig {
    pub channel: PpmChannel,
    /// Total symbols to simulate (≥ 1).
    pub n_symbols: u64,
    /// Master seed; together with a symbol index it determines that
    /// symbol's RNG stream.
    pub seed: u64,
    /// Symbols per parallel work unit (≥ 1); does not affect results.
    pub chunk_size: u64,
}

/// Tallies and derived estimates from one simulation run.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SimReport {
    pub symbols_run: u64,
    pub symbol_errors: u64,
    pub bit_errors: u64,
    pub ser_hat: f64,
    pub ber_hat: f64,
    /// Wilson 95% confidence interval on the SER estimate.
    pub ser_ci95: (f64, f64),
    /// Wall-clock seconds for the simulation loop.
    pub wall_time: f64,
    pub seed: u64,
}

#[derive(Debug, Default, Clone, Copy)]
struct Tally {
    symbol_errors: u64,
    bit_errors: u64,
}

impl Tally {
    fn merge(self, other: Tally) -> Tally {
        Tally {
            symbol_errors: self.symbol_errors + other.symbol_errors,
            bit_errors: self.bit_errors + other.bit_errors,
        }
    }
}

/// Run the Poisson Monte Carlo: per symbol, draw the pulsed slot's count
/// from Poisson(K_s + K_b) and each other slot from Poisson(K_b), decide by
/// argmax with a uniform choice among tied slots, and count symbol and bit
/// errors under the natural binary slot-index-to-bits mapping.
pub fn simulate_ppm(cfg: &SimConfig) -> Result<SimReport> {
    if cfg.n_symbols == 0 {
        return Err(Error::Domain("n_symbols must be >= 1".into()));
    }
    if cfg.chunk_size == 0 {
        return Err(Error::Domain("chunk_size must be >= 1".into()));
    }
    let start = Instant::now();
    let ch = cfg.channel;
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n_chunks = cfg.n_symbols.div_ceil(cfg.chunk_size);

    let tally = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * cfg.chunk_size;
            let hi = (lo + cfg.chunk_size).min(cfg.n_symbols);
            simulate_span(&base, &ch, lo, hi)
        })
        .reduce(Tally::default, Tally::merge);

    let bits = ch.bits_per_symbol() as u64;
    let n = cfg.n_symbols as f64;
    Ok(SimReport {
        symbols_run: cfg.n_symbols,
        symbol_errors: tally.symbol_errors,
        bit_errors: tally.bit_errors,
        ser_hat: tally.symbol_errors as f64 / n,
        ber_hat: tally.bit_errors as f64 / (n * bits as f64),
        ser_ci95: binomial_ci95(tally.symbol_errors, cfg.n_symbols),
        wall_time: start.elapsed().as_secs_f64(),
        seed: cfg.seed,
    })
}

fn simulate_span(base: &ChaCha8Rng, ch: &PpmChannel, lo: u64, hi: u64) -> Tally {
    let m = ch.order();
    let lambda_on = ch.signal_counts() + ch.background_counts();
    let lambda_off = ch.background_counts();
    let mut counts: Vec<u64> = Vec::with_capacity(m as usize);
    let mut tied: Vec<u32> = Vec::with_capacity(m as usize);
    let mut tally = Tally::default();

    for index in lo..hi {
        let mut rng = base.clone();
        rng.set_stream(index);

        let tx = rng.gen_range(0..m);
        counts.clear();
        for slot in 0..m {
            let lambda = if slot == tx { lambda_on } else { lambda_off };
            counts.push(sample_poisson(&mut rng, lambda));
        }
        let best = *counts.iter().max().expect("m >= 2");
        tied.clear();
        for (slot, &c) in counts.iter().enumerate() {
            if c == best {
                tied.push(slot as u32);
            }
        }
        let decided = if tied.len() == 1 {
            tied[0]
        } else {
            tied[rng.gen_range(0..tied.len())]
        };
        if decided != tx {
            tally.symbol_errors += 1;
            tally.bit_errors += (decided ^ tx).count_ones() as u64;
        }
    }
    tally
}

/// Draw one Poisson(λ) count.
pub fn sample_poisson<R: Rng>(rng: &mut R, lambda: f64) -> u64 {
    if lambda <= 0.0 {
        0
    } else if lambda < 10.0 {
        poisson_inversion(rng, lambda)
    } else {
        poisson_ptrs(rng, lambda)
    }
}

/// Sequential CDF inversion; one uniform per draw, O(λ) expected work.
fn poisson_inversion<R: Rng>(rng: &mut R, lambda: f64) -> u64 {
    let u: f64 = rng.gen();
    let mut pmf = (-lambda).exp();
    let mut cdf = pmf;
    let mut k = 0u64;
    while u > cdf {
        k += 1;
        pmf *= lambda / k as f64;
        cdf += pmf;
        if pmf < 1e-300 {
            // CDF has saturated within f64 resolution
            break;
        }
    }
    k
}

/// Hörmann's PTRS transformed-rejection sampler, valid for λ ≥ 10.
fn poisson_ptrs<R: Rng>(rng: &mut R, lambda: f64) -> u64 {
    let log_lambda = lambda.ln();
    let b = 0.931 + 2.53 * lambda.sqrt();
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let v_r = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = rng.gen::<f64>() - 0.5;
        let v = rng.gen::<f64>();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + lambda + 0.43).floor();
        if us >= 0.07 && v <= v_r {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
        if lhs <= k * log_lambda - lambda - log_factorial(k as u64) {
            return k as u64;
        }
    }
}

/// Exhaustive small-instance oracle: enumerate every slot-count tuple with
/// all counts ≤ `count_cap`, weight by the product of Poisson pmfs, and
/// accumulate the argmax error probability with the exact m/(m+1) tie
/// expectation. Returns (ser, residual) where the residual bounds the
/// probability mass with any count above the cap.
///
/// The pmf tables use the multiplicative recurrence, so this path shares no
/// numerics with the analytical formulas it cross-checks.
pub fn enumerate_exact(ch: &PpmChannel, count_cap: u32) -> Result<(f64, f64)> {
    let m = ch.order();
    if m != 2 && m != 4 {
        return Err(Error::Domain(format!(
            "enumeration oracle supports M = 2 or 4, got {m}"
        )));
    }
    if count_cap > 60 {
        return Err(Error::Domain(format!(
            "count cap must be <= 60 to keep the state space tractable, got {count_cap}"
        )));
    }
    let pmf_on = pmf_table(ch.signal_counts() + ch.background_counts(), count_cap);
    let pmf_off = pmf_table(ch.background_counts(), count_cap);

    let mut ser = 0.0;
    match m {
        2 => {
            for (k0, &w0) in pmf_on.iter().enumerate() {
                for (k1, &w1) in pmf_off.iter().enumerate() {
                    if k1 > k0 {
                        ser += w0 * w1;
                    } else if k1 == k0 {
                        ser += 0.5 * w0 * w1;
                    }
                }
            }
        }
        4 => {
            for (k0, &w0) in pmf_on.iter().enumerate() {
                for (ka, &wa) in pmf_off.iter().enumerate() {
                    let w0a = w0 * wa;
                    for (kb, &wb) in pmf_off.iter().enumerate() {
                        let w0ab = w0a * wb;
                        let max_ab = ka.max(kb);
                        for (kc, &wc) in pmf_off.iter().enumerate() {
                            let off_max = max_ab.max(kc);
                            if off_max > k0 {
                                ser += w0ab * wc;
                            } else if off_max == k0 {
                                let ties = (ka == k0) as u32 + (kb == k0) as u32 + (kc == k0) as u32;
                                if ties > 0 {
                                    ser += w0ab * wc * ties as f64 / (ties + 1) as f64;
                                }
                            }
                        }
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    let mass_on: f64 = pmf_on.iter().sum();
    let mass_off: f64 = pmf_off.iter().sum();
    let residual = (1.0 - mass_on * mass_off.powi(m as i32 - 1)).max(0.0);
    Ok((ser, residual))
}

fn pmf_table(lambda: f64, cap: u32) -> Vec<f64> {
    let mut table = Vec::with_capacity(cap as usize + 1);
    let mut pmf = (-lambda).exp();
    table.push(pmf);
    for k in 1..=cap as u64 {
        pmf *= lambda / k as f64;
        table.push(pmf);
    }
    table
}

/// Wilson 95% score interval for a binomial proportion.
pub fn binomial_ci95(errors: u64, trials: u64) -> (f64, f64) {
    assert!(trials >= 1, "trials must be >= 1");
    assert!(errors <= trials, "errors cannot exceed trials");
    const Z: f64 = 1.959963984540054; // 97.5th percentile of the standard normal
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let low = if errors == 0 { 0.0 } else { (center - half).max(0.0) };
    let high = if errors == trials {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (low, high)
}

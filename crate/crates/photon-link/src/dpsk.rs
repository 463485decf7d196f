//! Analytical BER for optically pre-amplified direct-detection DPSK and the
//! heterodyne-detection counterpart.
//!
//! Pre-amplified direct detection: the dominant noise is amplified
//! spontaneous emission, and with a Mach-Zehnder delay demodulator the bit
//! decisions reduce to comparing a Rician against a Rayleigh envelope,
//! giving
//!
//! P_e = ½ · exp(−G·N_ph / ((G−1)·n_sp + G·N_b))
//!
//! where N_ph is the mean signal photons per bit, G the amplifier gain,
//! n_sp ≥ 1 the spontaneous emission factor, and N_b the in-band,
//! in-polarization background photons per bit. At N_b = 0 this is the
//! classical ASE-limited result; as G → ∞ it tends to
//! ½·exp(−N_ph/(n_sp+N_b)), and with n_sp = 1 it recovers the quantum limit
//! ½·e^(−N_ph). Shot noise is neglected (ASE dominates at high gain).

use crate::{Error, Result};

/// A pre-amplified DPSK link: photons per bit, amplifier gain, spontaneous
/// emission factor, and background photons per bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpskChannel {
    photons_per_bit: f64,
    gain: f64,
    n_sp: f64,
    background_per_bit: f64,
}

impl DpskChannel {
    /// Build a channel, enforcing N_ph ≥ 0, N_b ≥ 0, G > 1, n_sp ≥ 1.
    pub fn new(photons_per_bit: f64, gain: f64, n_sp: f64, background_per_bit: f64) -> Result<DpskChannel> {
        if !photons_per_bit.is_finite() || photons_per_bit < 0.0 {
            return Err(Error::Domain(format!(
                "photons_per_bit must be finite and >= 0, got {photons_per_bit}"
            )));
        }
        if !background_per_bit.is_finite() || background_per_bit < 0.0 {
            return Err(Error::Domain(format!(
                "background_per_bit must be finite and >= 0, got {background_per_bit}"
            )));
        }
        if !gain.is_finite() || gain <= 1.0 {
            return Err(Error::Domain(format!(
                "amplifier gain must be finite and > 1, got {gain}"
            )));
        }
        if !n_sp.is_finite() || n_sp < 1.0 {
            return Err(Error::Domain(format!(
                "spontaneous emission factor must be finite and >= 1, got {n_sp}"
            )));
        }
        Ok(DpskChannel {
            photons_per_bit,
            gain,
            n_sp,
            background_per_bit,
        })
    }

    pub fn photons_per_bit(&self) -> f64 {
        self.photons_per_bit
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn n_sp(&self) -> f64 {
        self.n_sp
    }

    pub fn background_per_bit(&self) -> f64 {
        self.background_per_bit
    }
}

/// BER of pre-amplified direct-detection DPSK at finite gain.
pub fn ber_dpsk_preamp(ch: &DpskChannel) -> f64 {
    let g = ch.gain;
    0.5 * (-g * ch.photons_per_bit / ((g - 1.0) * ch.n_sp + g * ch.background_per_bit)).exp()
}

/// The G → ∞ limit of [`ber_dpsk_preamp`]: ½·exp(−n_ph/(n_sp + n_b)).
///
/// Used for idealized comparisons instead of passing a huge finite gain.
pub fn ber_dpsk_preamp_limit(n_ph: f64, n_sp: f64, n_b: f64) -> Result<f64> {
    if !n_ph.is_finite() || n_ph < 0.0 || !n_b.is_finite() || n_b < 0.0 {
        return Err(Error::Domain(format!(
            "photon counts must be finite and >= 0, got ({n_ph}, {n_b})"
        )));
    }
    if !n_sp.is_finite() || n_sp < 1.0 {
        return Err(Error::Domain(format!(
            "spontaneous emission factor must be finite and >= 1, got {n_sp}"
        )));
    }
    Ok(0.5 * (-n_ph / (n_sp + n_b)).exp())
}

/// BER of heterodyne-detection DPSK with detector quantum efficiency η:
/// ½·e^(−η·n_ph).
pub fn ber_dpsk_heterodyne(n_ph: f64, eta: f64) -> Result<f64> {
    if !n_ph.is_finite() || n_ph < 0.0 {
        return Err(Error::Domain(format!(
            "photons_per_bit must be finite and >= 0, got {n_ph}"
        )));
    }
    if !eta.is_finite() || eta <= 0.0 || eta > 1.0 {
        return Err(Error::Domain(format!(
            "quantum efficiency must lie in (0, 1], got {eta}"
        )));
    }
    Ok(0.5 * (-eta * n_ph).exp())
}

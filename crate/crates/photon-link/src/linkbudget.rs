//! Sky-background link-budget arithmetic.
//!
//! Converts telescope/sky/detector parameters into the photon-count
//! quantities the error-rate formulas consume: the solid angle subtended by
//! the telescope's field of view, the background photon rate collected at
//! the aperture, per-symbol and per-slot background counts for each
//! modulation, and the efficiency-corrected (K_s, K_b) pair for a PPM
//! receiver.
//!
//! Unit conventions are carried by the [`LinkScenario`] fields (spectral
//! radiance in µW·cm⁻²·sr⁻¹·µm⁻¹, aperture in cm, filter bandwidth in µm,
//! field of view in degrees, wavelength in nm, data rate in bit/s) and are
//! documented on each field; all outputs are photons/second or expected
//! counts.

use std::fmt;

use crate::{Error, Result};

/// CODATA Planck constant, J·s.
pub const PLANCK_CONSTANT: f64 = 6.626_070_15e-34;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

/// Receiving-telescope, sky, and detector parameters for one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkScenario {
    /// Sky spectral radiance, µW·cm⁻²·sr⁻¹·µm⁻¹.
    pub spectral_radiance: f64,
    /// Telescope aperture diameter, cm.
    pub aperture_diameter: f64,
    /// Optical filter bandwidth, µm.
    pub filter_bandwidth: f64,
    /// Full angular diameter of the telescope view, degrees.
    pub fov_full_angle: f64,
    /// Operating wavelength, nm.
    pub wavelength: f64,
    /// Link data rate, bit/s.
    pub data_rate: f64,
    /// Whether a polarization filter halves the collected background.
    pub polarization_filtered: bool,
    /// Photon-counting efficiency η of the PPM detector, in (0, 1].
    pub counter_efficiency: f64,
    /// Detector dark-count rate, counts/s.
    pub dark_count_rate: f64,
    /// Q-switch power efficiency applied to PPM signal photons, in (0, 1].
    pub qswitch_efficiency: f64,
    /// DPSK pre-amplifier linear gain.
    pub amplifier_gain: f64,
    /// DPSK pre-amplifier spontaneous emission factor, ≥ 1.
    pub n_sp: f64,
}

impl LinkScenario {
    /// Check the scenario invariants: nonnegative physical quantities,
    /// efficiencies in (0, 1], gain > 1, n_sp ≥ 1.
    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("spectral_radiance", self.spectral_radiance),
            ("aperture_diameter", self.aperture_diameter),
            ("filter_bandwidth", self.filter_bandwidth),
            ("wavelength", self.wavelength),
            ("data_rate", self.data_rate),
            ("dark_count_rate", self.dark_count_rate),
        ];
        for (name, v) in nonneg {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Config(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        for (name, v) in [
            ("counter_efficiency", self.counter_efficiency),
            ("qswitch_efficiency", self.qswitch_efficiency),
        ] {
            if !v.is_finite() || v <= 0.0 || v > 1.0 {
                return Err(Error::Config(format!(
                    "{name} must lie in (0, 1], got {v}"
                )));
            }
        }
        if !self.fov_full_angle.is_finite()
            || !(0.0..=180.0).contains(&self.fov_full_angle)
        {
            return Err(Error::Config(format!(
                "fov_full_angle must lie in [0, 180] degrees, got {}",
                self.fov_full_angle
            )));
        }
        if !self.amplifier_gain.is_finite() || self.amplifier_gain <= 1.0 {
            return Err(Error::Config(format!(
                "amplifier_gain must be finite and > 1, got {}",
                self.amplifier_gain
            )));
        }
        if !self.n_sp.is_finite() || self.n_sp < 1.0 {
            return Err(Error::Config(format!(
                "n_sp must be finite and >= 1, got {}",
                self.n_sp
            )));
        }
        Ok(())
    }
}

/// A modulation label as it appears in breakdown tables and curve output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modulation {
    Dpsk,
    Ppm(u32),
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modulation::Dpsk => write!(f, "DPSK"),
            Modulation::Ppm(m) => write!(f, "{m}"),
        }
    }
}

/// One row of a background-photon breakdown table.
#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundBreakdown {
    pub modulation: Modulation,
    /// Symbols per second: data_rate / log2(M) for PPM, data_rate for DPSK.
    pub symbol_rate: f64,
    /// Expected background photons per symbol after polarization filtering.
    pub photons_per_symbol_in_pol: f64,
    /// Expected background photons per slot (per-symbol / M for PPM; the
    /// DPSK "slot" is the whole bit period).
    pub photons_per_slot: f64,
}

/// Solid angle of a cone whose *full* angular diameter is `fov_full_angle`
/// degrees: Ω = 2π(1 − cos(θ/2)) steradians.
pub fn solid_angle(fov_full_angle: f64) -> Result<f64> {
    if !fov_full_angle.is_finite() || !(0.0..=180.0).contains(&fov_full_angle) {
        return Err(Error::Domain(format!(
            "field of view must lie in [0, 180] degrees, got {fov_full_angle}"
        )));
    }
    let half_angle = (fov_full_angle / 2.0).to_radians();
    Ok(2.0 * std::f64::consts::PI * (1.0 - half_angle.cos()))
}

/// Background photons per second collected at the aperture:
/// radiance × π(d/2)² × Ω × Δλ, divided by the photon energy hc/λ.
pub fn noise_photon_rate(sc: &LinkScenario) -> f64 {
    let omega = solid_angle(sc.fov_full_angle).unwrap_or(0.0);
    let area_cm2 = std::f64::consts::PI * (sc.aperture_diameter / 2.0).powi(2);
    let power_uw = sc.spectral_radiance * area_cm2 * omega * sc.filter_bandwidth;
    let photon_energy = PLANCK_CONSTANT * SPEED_OF_LIGHT / (sc.wavelength * 1e-9);
    power_uw * 1e-6 / photon_energy
}

/// Background photons per DPSK bit (in polarization when filtered); the
/// pre-amplified receiver has no photon counter, so no η is applied.
pub fn dpsk_background_per_bit(sc: &LinkScenario) -> f64 {
    let pol = if sc.polarization_filtered { 0.5 } else { 1.0 };
    noise_photon_rate(sc) * pol / sc.data_rate
}

/// Per-symbol and per-slot background counts for DPSK and each requested
/// PPM order, in table order (DPSK row first, then ascending M).
pub fn background_breakdown(
    sc: &LinkScenario,
    orders: &[u32],
) -> Result<Vec<BackgroundBreakdown>> {
    if !sc.data_rate.is_finite() || sc.data_rate <= 0.0 {
        return Err(Error::Domain(format!(
            "data_rate must be positive, got {}",
            sc.data_rate
        )));
    }
    let rate = noise_photon_rate(sc);
    let pol = if sc.polarization_filtered { 0.5 } else { 1.0 };

    let mut rows = Vec::with_capacity(orders.len() + 1);
    let per_bit = rate * pol / sc.data_rate;
    rows.push(BackgroundBreakdown {
        modulation: Modulation::Dpsk,
        symbol_rate: sc.data_rate,
        photons_per_symbol_in_pol: per_bit,
        photons_per_slot: per_bit,
    });
    for &m in orders {
        if m < 2 || !m.is_power_of_two() {
            return Err(Error::Domain(format!(
                "PPM order must be a power of 2 and >= 2, got {m}"
            )));
        }
        let bits = m.trailing_zeros() as f64;
        let symbol_rate = sc.data_rate / bits;
        let per_symbol = rate * pol / symbol_rate;
        rows.push(BackgroundBreakdown {
            modulation: Modulation::Ppm(m),
            symbol_rate,
            photons_per_symbol_in_pol: per_symbol,
            photons_per_slot: per_symbol / m as f64,
        });
    }
    Ok(rows)
}

/// Efficiency-corrected mean counts for an M-ary PPM receiver at a given
/// average received signal photons per bit:
///
/// - N_signal = photons_per_bit · log2(M) · qswitch_efficiency, and
///   K_s = N_signal · η;
/// - K_b = (N_noise_per_symbol · η + N_dark_per_symbol) / M, with dark
///   counts taken at the symbol rate.
pub fn effective_counts(
    sc: &LinkScenario,
    photons_per_bit: f64,
    order: u32,
) -> Result<(f64, f64)> {
    if order < 2 || !order.is_power_of_two() {
        return Err(Error::Domain(format!(
            "PPM order must be a power of 2 and >= 2, got {order}"
        )));
    }
    if !photons_per_bit.is_finite() || photons_per_bit < 0.0 {
        return Err(Error::Domain(format!(
            "photons_per_bit must be finite and >= 0, got {photons_per_bit}"
        )));
    }
    if !sc.data_rate.is_finite() || sc.data_rate <= 0.0 {
        return Err(Error::Domain(format!(
            "data_rate must be positive, got {}",
            sc.data_rate
        )));
    }
    let bits = order.trailing_zeros() as f64;
    let symbol_rate = sc.data_rate / bits;
    let pol = if sc.polarization_filtered { 0.5 } else { 1.0 };

    let n_signal = photons_per_bit * bits * sc.qswitch_efficiency;
    let k_s = n_signal * sc.counter_efficiency;

    let n_noise_per_symbol = noise_photon_rate(sc) * pol / symbol_rate;
    let n_dark_per_symbol = sc.dark_count_rate / symbol_rate;
    let k_b = (n_noise_per_symbol * sc.counter_efficiency + n_dark_per_symbol) / order as f64;
    Ok((k_s, k_b))
}

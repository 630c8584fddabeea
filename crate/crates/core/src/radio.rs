//! Line-of-sight link budget: free-space gain, Shannon rates and the
//! minimum downlink power meeting a rate floor.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::model::Position;

/// Air-to-ground geometry between a UAV hovering at `altitude_m` and a
/// ground point `horizontal_distance_m` away.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkGeometry {
    pub horizontal_distance_m: f64,
    pub altitude_m: f64,
}

impl LinkGeometry {
    pub fn between(uav: &Position, ground: &Position, altitude_m: f64) -> Self {
        Self {
            horizontal_distance_m: uav.distance(ground),
            altitude_m,
        }
    }

    pub fn slant_distance(&self) -> f64 {
        self.slant_distance_sq().sqrt()
    }

    pub fn slant_distance_sq(&self) -> f64 {
        self.horizontal_distance_m * self.horizontal_distance_m + self.altitude_m * self.altitude_m
    }
}

/// Shared channel constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub bandwidth_hz: f64,
    pub channel_gain_ref: f64,
    pub noise_power_w: f64,
    pub rate_efficiency: f64,
}

impl ChannelParams {
    /// `γW`, the effective bandwidth.
    pub fn effective_bandwidth(&self) -> f64 {
        self.rate_efficiency * self.bandwidth_hz
    }

    /// Transmit power per unit SNR at slant distance `d`: `N₀d²/g₀`.
    pub fn noise_floor_power(&self, d: f64) -> f64 {
        self.noise_power_w * d * d / self.channel_gain_ref
    }

    fn check(&self) -> Result<()> {
        if !(self.bandwidth_hz > 0.0) {
            return Err(domain("bandwidth must be > 0"));
        }
        if !(self.channel_gain_ref > 0.0) {
            return Err(domain("reference gain must be > 0"));
        }
        if !(self.noise_power_w > 0.0) {
            return Err(domain("noise power must be > 0"));
        }
        if !(self.rate_efficiency > 0.0 && self.rate_efficiency < 1.0) {
            return Err(domain("rate efficiency must lie in (0,1)"));
        }
        Ok(())
    }
}

/// Free-space channel power gain `g₀·d⁻²`.
pub fn path_gain(g0: f64, d: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(domain(format!("distance must be > 0, got {d}")));
    }
    Ok(g0 / (d * d))
}

/// Effective uplink rate `γ·W·log₂(1 + P·h/N₀)` in bit/s.
pub fn uplink_rate(
    tx_power_w: f64,
    gain: f64,
    noise_w: f64,
    bandwidth_hz: f64,
    gamma: f64,
) -> Result<f64> {
    if !(tx_power_w > 0.0 && gain > 0.0 && noise_w > 0.0 && bandwidth_hz > 0.0) {
        return Err(domain("uplink inputs must all be > 0"));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(domain(format!("gamma must lie in (0,1), got {gamma}")));
    }
    Ok(gamma * bandwidth_hz * (tx_power_w * gain / noise_w).ln_1p() / std::f64::consts::LN_2)
}

/// Whole slots needed to push `input_bits` through the uplink, at least one.
///
/// Returns `None` when the rate is zero (the transfer never completes).
pub fn upload_delay_slots(input_bits: f64, uplink_rate_bps: f64, slot_length_s: f64) -> Option<u64> {
    if !(uplink_rate_bps > 0.0) || !(slot_length_s > 0.0) {
        return None;
    }
    let slots = (input_bits / (uplink_rate_bps * slot_length_s)).ceil();
    if !slots.is_finite() || slots > u64::MAX as f64 {
        return None;
    }
    Some((slots as u64).max(1))
}

/// Downlink rate delivered with `power_w` at slant distance `d`.
///
/// `power_w = 0` yields a zero rate.
pub fn downlink_rate(power_w: f64, d: f64, ch: &ChannelParams) -> Result<f64> {
    ch.check()?;
    if !(power_w >= 0.0) {
        return Err(domain("downlink power must be >= 0"));
    }
    if !(d > 0.0) {
        return Err(domain("distance must be > 0"));
    }
    let snr = power_w / ch.noise_floor_power(d);
    Ok(ch.effective_bandwidth() * snr.ln_1p() / std::f64::consts::LN_2)
}

/// Smallest downlink power reaching `rate_bps` at slant distance `d`:
/// `(2^{λ/γW} − 1)·N₀d²/g₀`. Exactly 0 for a zero rate.
pub fn min_downlink_power(rate_bps: f64, d: f64, ch: &ChannelParams) -> Result<f64> {
    ch.check()?;
    if !(rate_bps >= 0.0) {
        return Err(domain("rate must be >= 0"));
    }
    if !(d > 0.0) {
        return Err(domain("distance must be > 0"));
    }
    let x = rate_bps / ch.effective_bandwidth() * std::f64::consts::LN_2;
    Ok(x.exp_m1() * ch.noise_floor_power(d))
}

//! Battery virtual queue and the drift-minus-reward weights.
//!
//! Each UAV keeps its battery near a target `θ`; the deficit `Q = θ − E`
//! acts as a queue whose quadratic drift is traded against reward through
//! the control parameter `V`. Minimizing the drift bound slot by slot reduces
//! to a max-weight assignment with per-pair weight `V·p − Q·E_service`.

use serde::{Deserialize, Serialize};

use crate::assignment::MASKED_WEIGHT;
use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatteryQueue {
    pub theta_j: f64,
    pub energy_j: f64,
}

impl BatteryQueue {
    /// A full battery.
    pub fn full(theta_j: f64) -> Self {
        Self {
            theta_j,
            energy_j: theta_j,
        }
    }

    /// Deficit `Q = θ − E`.
    pub fn queue_j(&self) -> f64 {
        self.theta_j - self.energy_j
    }
}

/// Battery target that makes the per-slot energy constraint redundant:
/// `θ = V·p_max/E_min + c·E_max`.
pub fn size_theta(v: f64, p_max: f64, e_min_j: f64, e_max_j: f64, channels: u32) -> Result<f64> {
    if !(e_min_j > 0.0) {
        return Err(domain(format!("E_min must be > 0, got {e_min_j}")));
    }
    if !(e_max_j >= e_min_j) {
        return Err(domain("E_max must be >= E_min"));
    }
    if channels == 0 {
        return Err(domain("channel count must be >= 1"));
    }
    if !(v >= 0.0 && p_max >= 0.0) {
        return Err(domain("V and p_max must be >= 0"));
    }
    Ok(v * p_max / e_min_j + f64::from(channels) * e_max_j)
}

/// `V·p − Q·E`.
pub fn weight(v: f64, payment: f64, queue_j: f64, energy_j: f64) -> f64 {
    if queue_j == 0.0 {
        return v * payment;
    }
    v * payment - queue_j * energy_j
}

/// Weight of a plan, masked when the plan cannot be served.
pub fn plan_weight(v: f64, payment: f64, queue_j: f64, energy_j: f64, feasible: bool) -> f64 {
    if feasible && energy_j.is_finite() {
        weight(v, payment, queue_j, energy_j)
    } else {
        MASKED_WEIGHT
    }
}

/// Energy actually stored this slot, `min(θ − E, η)`.
pub fn harvest_clip(theta_j: f64, energy_j: f64, harvested_j: f64) -> f64 {
    (theta_j - energy_j).min(harvested_j).max(0.0)
}

/// Outcome of one battery update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatteryStep {
    pub next: BatteryQueue,
    pub credited_j: f64,
    pub debited_j: f64,
}

/// `E(t+1) = E(t) + min(θ − E(t), η) − consumed`.
///
/// Fails when `consumed_j` exceeds the stored energy.
pub fn battery_step(queue: BatteryQueue, harvested_j: f64, consumed_j: f64) -> Result<BatteryStep> {
    if consumed_j > queue.energy_j {
        return Err(Error::Contract(format!(
            "consumption {consumed_j} J exceeds stored {} J",
            queue.energy_j
        )));
    }
    let credited = harvest_clip(queue.theta_j, queue.energy_j, harvested_j);
    let energy = (queue.energy_j + credited - consumed_j).clamp(0.0, queue.theta_j);
    Ok(BatteryStep {
        next: BatteryQueue {
            theta_j: queue.theta_j,
            energy_j: energy,
        },
        credited_j: credited,
        debited_j: consumed_j,
    })
}

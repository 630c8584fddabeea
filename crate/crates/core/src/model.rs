//! Shared value types: plane geometry, task requests and service plans.
//!
//! Units used throughout the crate:
//!
//! | quantity        | unit            |
//! |-----------------|-----------------|
//! | distance        | m               |
//! | time            | s (slot = `τ`)  |
//! | data size       | bit             |
//! | CPU speed       | Gcycles/s       |
//! | CPU work        | Gcycles         |
//! | power / energy  | W / J           |

use serde::{Deserialize, Serialize};

/// Index of a discrete time slot, starting at 0.
pub type SlotIndex = u64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn distance_sq(&self, other: &Position) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Velocity {
    pub vx: f64,
    pub vy: f64,
}

impl Velocity {
    pub const fn new(vx: f64, vy: f64) -> Self {
        Self { vx, vy }
    }

    pub fn speed(&self) -> f64 {
        self.vx.hypot(self.vy)
    }
}

/// Closed axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectRegion {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl RectRegion {
    pub const fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Self {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Position {
        Position::new(
            0.5 * (self.x_min + self.x_max),
            0.5 * (self.y_min + self.y_max),
        )
    }

    /// Boundary-inclusive membership.
    pub fn contains(&self, p: &Position) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    pub fn contains_region(&self, other: &RectRegion) -> bool {
        other.x_min >= self.x_min
            && other.x_max <= self.x_max
            && other.y_min >= self.y_min
            && other.y_max <= self.y_max
    }

    /// Area of the intersection with `other` (0 when disjoint).
    pub fn overlap_area(&self, other: &RectRegion) -> f64 {
        let w = self.x_max.min(other.x_max) - self.x_min.max(other.x_min);
        let h = self.y_max.min(other.y_max) - self.y_min.max(other.y_min);
        if w <= 0.0 || h <= 0.0 {
            0.0
        } else {
            w * h
        }
    }

    /// Length of the diagonal, the largest distance between two points inside.
    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn is_well_formed(&self) -> bool {
        self.x_min.is_finite()
            && self.x_max.is_finite()
            && self.y_min.is_finite()
            && self.y_max.is_finite()
            && self.x_min < self.x_max
            && self.y_min < self.y_max
    }
}

/// Closed interval `[lo, hi]`, serialized as a two-element array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval(pub f64, pub f64);

impl Interval {
    pub fn lo(&self) -> f64 {
        self.0
    }

    pub fn hi(&self) -> f64 {
        self.1
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.0 && v <= self.1
    }
}

/// A computation task announced by a vehicle at the start of a slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRequest {
    pub task_id: usize,
    /// Vehicle that generated the task.
    pub vehicle_id: usize,
    pub slot: SlotIndex,
    pub input_bits: f64,
    pub output_bits: f64,
    pub cycles_gc: f64,
    pub payment: f64,
    pub qos_bps: f64,
    pub position: Position,
    pub velocity: Velocity,
}

/// Optimized per-(UAV, task) service parameters and their Lyapunov weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServicePlan {
    pub uav_id: usize,
    pub task_id: usize,
    pub cpu_speed_gcps: f64,
    pub downlink_power_w: f64,
    /// Downlink rate achieved with `downlink_power_w` at the delivery distance.
    pub downlink_rate_bps: f64,
    pub upload_delay_slots: u64,
    pub energy_j: f64,
    pub weight: f64,
    pub feasible: bool,
}

impl ServicePlan {
    pub fn infeasible(uav_id: usize, task_id: usize, upload_delay_slots: u64) -> Self {
        Self {
            uav_id,
            task_id,
            cpu_speed_gcps: 0.0,
            downlink_power_w: 0.0,
            downlink_rate_bps: 0.0,
            upload_delay_slots,
            energy_j: f64::INFINITY,
            weight: crate::assignment::MASKED_WEIGHT,
            feasible: false,
        }
    }
}

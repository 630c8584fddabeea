//! Vehicle kinematics, coverage membership and the UAV speed limit.

use serde::{Deserialize, Serialize};

use crate::model::{Position, RectRegion, Velocity};

/// A vehicle driving a straight line at constant speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub id: usize,
    pub position: Position,
    pub velocity: Velocity,
}

impl VehicleState {
    pub fn advance(&mut self, slot_length_s: f64) {
        self.position = predict_position(self.position, self.velocity, slot_length_s, 1);
    }
}

/// Position after `delay_slots` whole slots of straight-line motion.
pub fn predict_position(pos: Position, vel: Velocity, slot_length_s: f64, delay_slots: u64) -> Position {
    let dt = slot_length_s * delay_slots as f64;
    Position::new(pos.x + vel.vx * dt, pos.y + vel.vy * dt)
}

/// True when the vehicle is inside `coverage` now and still inside once the
/// upload of `delay_slots` slots completes.
pub fn coverage_feasible(
    coverage: &RectRegion,
    pos: Position,
    vel: Velocity,
    slot_length_s: f64,
    delay_slots: u64,
) -> bool {
    coverage.contains(&pos) && coverage.contains(&predict_position(pos, vel, slot_length_s, delay_slots))
}

/// Moves toward `target`, covering at most `v_max·τ` in one slot.
pub fn clamp_uav_move(current: Position, target: Position, v_max: f64, slot_length_s: f64) -> Position {
    let reach = v_max * slot_length_s;
    let dist = current.distance(&target);
    if dist <= reach {
        return target;
    }
    let k = reach / dist;
    Position::new(
        current.x + k * (target.x - current.x),
        current.y + k * (target.y - current.y),
    )
}

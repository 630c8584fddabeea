//! Channel bookkeeping and the per-slot task-to-UAV matching.
//!
//! A UAV with `c` channels can serve `c` tasks at once. A task accepted in
//! slot `t` with an upload of `d` slots holds its channel for slots
//! `t..=t+d` (upload, then one slot of compute and downlink).
//!
//! The matching maximizes the total weight of selected pairs, each task at
//! most once and each UAV at most its free channel count. Capacity is
//! handled by repeating every UAV column once per free channel; pairs with
//! non-positive weight are never selected.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ServicePlan, SlotIndex};

/// Weight of a pair that must not be matched.
pub const MASKED_WEIGHT: f64 = -1e300;

pub fn is_masked(w: f64) -> bool {
    w <= MASKED_WEIGHT
}

/// Per-UAV list of busy-until slots for channels in use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelLedger {
    capacity: Vec<u32>,
    busy_until: Vec<Vec<SlotIndex>>,
}

impl ChannelLedger {
    pub fn new(capacity: Vec<u32>) -> Self {
        let busy_until = vec![Vec::new(); capacity.len()];
        Self {
            capacity,
            busy_until,
        }
    }

    pub fn capacity(&self, uav: usize) -> u32 {
        self.capacity[uav]
    }

    /// Channels held during `slot`.
    pub fn busy(&self, uav: usize, slot: SlotIndex) -> u32 {
        self.busy_until[uav].iter().filter(|&&b| b >= slot).count() as u32
    }

    pub fn free_channels(&self, uav: usize, slot: SlotIndex) -> u32 {
        self.capacity[uav].saturating_sub(self.busy(uav, slot))
    }

    /// Records a service accepted at `slot` with an upload of `delay_slots`.
    pub fn occupy(&mut self, uav: usize, slot: SlotIndex, delay_slots: u64) -> Result<()> {
        if self.free_channels(uav, slot) == 0 {
            return Err(Error::Invariant {
                slot,
                detail: format!("UAV {uav} has no free channel"),
            });
        }
        self.busy_until[uav].push(slot + delay_slots);
        Ok(())
    }

    /// Drops entries released before `slot`.
    pub fn release_before(&mut self, slot: SlotIndex) {
        for list in &mut self.busy_until {
            list.retain(|&b| b >= slot);
        }
    }
}

/// Free-standing form of [`ChannelLedger::free_channels`].
pub fn free_channels(ledger: &ChannelLedger, uav_id: usize, slot: SlotIndex) -> u32 {
    ledger.free_channels(uav_id, slot)
}

/// Task-by-UAV weights. `plans[task][uav]` must carry final weights.
///
/// Infeasible pairs and UAVs without a free channel are masked.
pub fn build_weight_matrix(plans: &[Vec<ServicePlan>], free_channels: &[u32]) -> Vec<Vec<f64>> {
    plans
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(u, plan)| {
                    if plan.feasible && free_channels[u] > 0 && plan.weight.is_finite() {
                        plan.weight
                    } else {
                        MASKED_WEIGHT
                    }
                })
                .collect()
        })
        .collect()
}

/// A selected `(task, uav)` pair and its weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Match {
    pub task: usize,
    pub uav: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Matching {
    /// Sorted by task index.
    pub matches: Vec<Match>,
    pub objective: f64,
}

/// Max-weight capacitated matching of tasks (rows) to UAVs (columns).
pub fn solve_assignment(matrix: &[Vec<f64>], capacities: &[u32]) -> Matching {
    let n_tasks = matrix.len();
    if n_tasks == 0 {
        return Matching::default();
    }
    // One column per usable channel, then one "unassigned" column per task.
    let mut column_uav: Vec<Option<usize>> = Vec::new();
    for (u, &cap) in capacities.iter().enumerate() {
        let copies = (cap as usize).min(n_tasks);
        column_uav.extend(std::iter::repeat_n(Some(u), copies));
    }
    column_uav.extend(std::iter::repeat_n(None, n_tasks));

    let cost: Vec<Vec<f64>> = matrix
        .iter()
        .map(|row| {
            column_uav
                .iter()
                .map(|col| match col {
                    Some(u) if row[*u] > 0.0 => -row[*u],
                    _ => 0.0,
                })
                .collect()
        })
        .collect();

    let row_to_col = hungarian_min_cost(&cost);
    let mut matches: Vec<Match> = row_to_col
        .iter()
        .enumerate()
        .filter_map(|(task, &col)| {
            let uav = column_uav[col]?;
            let w = matrix[task][uav];
            (w > 0.0).then_some(Match { task, uav, weight: w })
        })
        .collect();
    matches.sort_by_key(|m| m.task);
    let objective = matches.iter().map(|m| m.weight).sum();
    Matching { matches, objective }
}

/// Minimum-cost assignment of every row to a distinct column (`rows ≤ cols`),
/// shortest augmenting path with row/column potentials.
fn hungarian_min_cost(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let m = cost[0].len();
    debug_assert!(n <= m);
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    // col_owner[j] = row (1-based) holding column j, 0 if none
    let mut col_owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];

    for i in 1..=n {
        col_owner[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = col_owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[col_owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_owner[j0] = col_owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![0usize; n];
    for j in 1..=m {
        if col_owner[j] != 0 {
            row_to_col[col_owner[j] - 1] = j - 1;
        }
    }
    row_to_col
}

/// Selected services with their plans.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AssignmentResult {
    pub matches: Vec<(usize, usize, ServicePlan)>,
    pub objective: f64,
}

/// Weight matrix, masking and matching in one step.
pub fn assign(plans: &[Vec<ServicePlan>], free: &[u32]) -> AssignmentResult {
    let matrix = build_weight_matrix(plans, free);
    let m = solve_assignment(&matrix, free);
    AssignmentResult {
        matches: m
            .matches
            .iter()
            .map(|x| (x.uav, x.task, plans[x.task][x.uav].clone()))
            .collect(),
        objective: m.objective,
    }
}

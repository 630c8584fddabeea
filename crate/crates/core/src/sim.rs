//! Slot-by-slot simulation of the UAV edge-computing system.
//!
//! Every slot: place UAVs on the deployment plan, move vehicles, draw tasks,
//! solve the energy problem for each (task, UAV) pair, pick services, debit
//! batteries and occupy channels, then harvest.
//!
//! Three independent RNG substreams (tasks, mobility, harvest) derive from
//! the master seed. None of them depends on the allocation policy, so two
//! algorithms run on the same seed see the same vehicles, tasks and harvests.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::assignment::{self, ChannelLedger};
use crate::config::{DensityModel, PlannerMode, ScenarioConfig, UavConfig};
use crate::deployment::{plan_trajectory, DensityGrid, DeploymentPlan};
use crate::energy::{solve_p3, ServiceProblem};
use crate::error::{domain, Error, Result};
use crate::lyapunov::{battery_step, plan_weight, size_theta, BatteryQueue};
use crate::mobility::{coverage_feasible, predict_position, VehicleState};
use crate::model::{Position, RectRegion, ServicePlan, SlotIndex, TaskRequest, Velocity};
use crate::radio::{path_gain, upload_delay_slots, uplink_rate, ChannelParams, LinkGeometry};

const STREAM_TASKS: u64 = 1;
const STREAM_MOBILITY: u64 = 2;
const STREAM_HARVEST: u64 = 3;
const STREAM_HISTORY_BASE: u64 = 1 << 32;

/// Slack allowed on the per-slot flight distance.
const MOVE_TOL_M: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    /// Lyapunov weights + matching, UAVs follow the deployment plan.
    Joaodr,
    /// Highest payment first, UAVs follow the deployment plan.
    Greedy,
    /// Lyapunov weights + matching, UAVs parked at their coverage centers.
    FixedDeploy,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Joaodr, Algorithm::Greedy, Algorithm::FixedDeploy];

    pub fn tag(&self) -> &'static str {
        match self {
            Algorithm::Joaodr => "joaodr",
            Algorithm::Greedy => "greedy",
            Algorithm::FixedDeploy => "fixed-deploy",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.tag() == s)
            .ok_or_else(|| Error::Parse(format!("unknown algorithm '{s}' (joaodr, greedy, fixed-deploy)")))
    }
}

/// A task accepted for service, with everything needed to audit it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServedTask {
    pub uav_id: usize,
    pub task: TaskRequest,
    pub plan: ServicePlan,
    /// Predicted vehicle position when the upload completes.
    pub delivery_position: Position,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotMetrics {
    pub slot: SlotIndex,
    /// Payments collected this slot.
    pub remuneration: f64,
    /// Sum of drift-minus-reward weights of the accepted services.
    pub utility: f64,
    pub uav_positions: Vec<Position>,
    /// Battery at the start of the slot, before any debit.
    pub battery_start_j: Vec<f64>,
    /// Battery at the end of the slot.
    pub battery_j: Vec<f64>,
    pub queue_j: Vec<f64>,
    pub consumed_j: Vec<f64>,
    pub harvested_j: Vec<f64>,
    /// Channels in use during the slot after this slot's assignments.
    pub busy_channels: Vec<u32>,
    pub free_channels: Vec<u32>,
    pub tasks_generated: usize,
    pub tasks_served: usize,
    /// Tasks no UAV could serve at all.
    pub tasks_infeasible: usize,
    pub served: Vec<ServedTask>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub config: ScenarioConfig,
    pub theta_j: Vec<f64>,
    pub slots: Vec<SlotMetrics>,
}

impl RunSummary {
    pub fn cumulative_remuneration(&self) -> Vec<f64> {
        cumulative(self.slots.iter().map(|m| m.remuneration))
    }

    pub fn cumulative_utility(&self) -> Vec<f64> {
        cumulative(self.slots.iter().map(|m| m.utility))
    }

    pub fn total_remuneration(&self) -> f64 {
        self.slots.iter().map(|m| m.remuneration).sum()
    }

    /// Long-run profit estimate: payments collected per slot, on average.
    pub fn time_average_utility(&self) -> f64 {
        if self.slots.is_empty() {
            return 0.0;
        }
        self.total_remuneration() / self.slots.len() as f64
    }

    /// Mean per-slot drift-minus-reward objective.
    pub fn time_average_weight(&self) -> f64 {
        if self.slots.is_empty() {
            return 0.0;
        }
        self.slots.iter().map(|m| m.utility).sum::<f64>() / self.slots.len() as f64
    }

    pub fn tasks_served(&self) -> usize {
        self.slots.iter().map(|m| m.tasks_served).sum()
    }
}

fn cumulative(it: impl Iterator<Item = f64>) -> Vec<f64> {
    it.scan(0.0, |acc, x| {
        *acc += x;
        Some(*acc)
    })
    .collect()
}

pub fn channel_params(cfg: &ScenarioConfig) -> ChannelParams {
    ChannelParams {
        bandwidth_hz: cfg.bandwidth_hz,
        channel_gain_ref: cfg.channel_gain_ref,
        noise_power_w: cfg.noise_power_w,
        rate_efficiency: cfg.rate_efficiency,
    }
}

fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

/// Minimum and maximum single-service energy of `uav` over the configured
/// task ranges: smallest task straight below the UAV, and largest task
/// across the coverage diagonal.
pub fn service_energy_bounds(cfg: &ScenarioConfig, uav: &UavConfig) -> Result<(f64, f64)> {
    let ch = channel_params(cfg);
    let corner = |input: f64, output: f64, qos: f64, horizontal: f64| ServiceProblem {
        input_bits: input,
        output_bits: output,
        cycles_gc: cfg.cycles_per_bit * input,
        qos_bps: qos,
        slot_length_s: cfg.slot_length_s,
        delivery_distance_m: horizontal.hypot(uav.altitude_m),
        alpha: uav.alpha,
        beta: uav.beta,
        cpu_max_gcps: uav.cpu_max_gcps,
        recv_energy_j_per_bit: uav.recv_energy_j_per_bit,
        channel: ch,
    };
    let lo = corner(cfg.input_bits_range.lo(), cfg.output_bits_range.lo(), cfg.qos_range_bps.lo(), 0.0);
    let hi = corner(
        cfg.input_bits_range.hi(),
        cfg.output_bits_range.hi(),
        cfg.qos_range_bps.hi(),
        uav.coverage.diagonal(),
    );
    let e_min = lo
        .solve()
        .ok_or_else(|| domain(format!("UAV {}: even the smallest task is unservable", uav.id)))?
        .energy
        .total_j;
    let e_max = hi
        .solve()
        .ok_or_else(|| {
            domain(format!(
                "UAV {}: largest task is unservable, set battery_target_j explicitly",
                uav.id
            ))
        })?
        .energy
        .total_j;
    Ok((e_min, e_max))
}

/// Battery targets: configured values, or sized so the per-slot energy
/// constraint can never bind.
pub fn battery_targets(cfg: &ScenarioConfig) -> Result<Vec<f64>> {
    cfg.uav_configs
        .iter()
        .map(|u| match u.battery_target_j {
            Some(theta) => Ok(theta),
            None => {
                let (e_min, e_max) = service_energy_bounds(cfg, u)?;
                size_theta(cfg.control_v, cfg.max_payment(), e_min, e_max, u.channels)
            }
        })
        .collect()
}

/// Draws a point from the scenario density at `slot` by rejection.
fn sample_position(cfg: &ScenarioConfig, slot: SlotIndex, rng: &mut ChaCha8Rng) -> Position {
    let r = &cfg.region;
    for _ in 0..10_000 {
        let p = Position::new(uniform(rng, r.x_min, r.x_max), uniform(rng, r.y_min, r.y_max));
        match cfg.density {
            DensityModel::Uniform => return p,
            DensityModel::Hotspot { .. } => {
                if rng.random::<f64>() < cfg.density.value(&p, slot) {
                    return p;
                }
            }
        }
    }
    r.center()
}

fn sample_velocity(cfg: &ScenarioConfig, rng: &mut ChaCha8Rng) -> Velocity {
    let speed = uniform(rng, cfg.vehicle_speed_range_mps.lo(), cfg.vehicle_speed_range_mps.hi());
    let heading = rng.random_range(0.0..std::f64::consts::TAU);
    Velocity::new(speed * heading.cos(), speed * heading.sin())
}

fn spawn_vehicle(cfg: &ScenarioConfig, id: usize, slot: SlotIndex, rng: &mut ChaCha8Rng) -> VehicleState {
    VehicleState {
        id,
        position: sample_position(cfg, slot, rng),
        velocity: sample_velocity(cfg, rng),
    }
}

/// Vehicle population, held at a constant size.
#[derive(Debug, Clone)]
pub struct Traffic {
    pub vehicles: Vec<VehicleState>,
    rng: ChaCha8Rng,
}

impl Traffic {
    fn with_rng(cfg: &ScenarioConfig, mut rng: ChaCha8Rng) -> Self {
        let vehicles = (0..cfg.vehicle_count).map(|id| spawn_vehicle(cfg, id, 0, &mut rng)).collect();
        Self { vehicles, rng }
    }

    pub fn new(cfg: &ScenarioConfig, seed: u64) -> Self {
        Self::with_rng(cfg, substream(seed, STREAM_MOBILITY))
    }

    /// One slot of motion; vehicles that leave the region respawn inside it.
    pub fn advance(&mut self, cfg: &ScenarioConfig, slot: SlotIndex) {
        for v in &mut self.vehicles {
            v.advance(cfg.slot_length_s);
            if !cfg.region.contains(&v.position) {
                *v = spawn_vehicle(cfg, v.id, slot, &mut self.rng);
            }
        }
    }
}

/// Each vehicle independently announces one task with `task_gen_prob`.
pub fn sample_tasks(vehicles: &[VehicleState], cfg: &ScenarioConfig, slot: SlotIndex, rng: &mut ChaCha8Rng) -> Vec<TaskRequest> {
    let mut tasks = Vec::new();
    for v in vehicles {
        if !(rng.random::<f64>() < cfg.task_gen_prob) {
            continue;
        }
        let input_bits = uniform(rng, cfg.input_bits_range.lo(), cfg.input_bits_range.hi());
        let output_bits = uniform(rng, cfg.output_bits_range.lo(), cfg.output_bits_range.hi());
        let qos_bps = uniform(rng, cfg.qos_range_bps.lo(), cfg.qos_range_bps.hi());
        let payment = uniform(rng, cfg.payment_range.lo(), cfg.payment_range.hi());
        tasks.push(TaskRequest {
            task_id: tasks.len(),
            vehicle_id: v.id,
            slot,
            input_bits,
            output_bits,
            cycles_gc: cfg.cycles_per_bit * input_bits,
            payment,
            qos_bps,
            position: v.position,
            velocity: v.velocity,
        });
    }
    tasks
}

/// RNG for task sampling, as used by [`run`].
pub fn task_rng(seed: u64) -> ChaCha8Rng {
    substream(seed, STREAM_TASKS)
}

/// Per-slot density grids the planner works from.
pub fn planning_grids(cfg: &ScenarioConfig, seed: u64) -> Box<dyn Iterator<Item = DensityGrid> + '_> {
    let (nx, ny) = (cfg.planner.grid_nx, cfg.planner.grid_ny);
    let region: RectRegion = cfg.region;
    let slots = cfg.num_slots;
    match cfg.planner.mode {
        PlannerMode::Oracle => match cfg.density {
            DensityModel::Uniform => {
                let g = DensityGrid::uniform(region, nx, ny);
                Box::new((0..slots).map(move |_| g.clone()))
            }
            DensityModel::Hotspot { .. } => Box::new(
                (0..slots).map(move |t| DensityGrid::from_fn(region, nx, ny, |p| cfg.density.value(p, t))),
            ),
        },
        PlannerMode::Empirical => {
            let mut histories: Vec<Traffic> = (0..cfg.planner.history_runs as u64)
                .map(|k| Traffic::with_rng(cfg, substream(seed, STREAM_HISTORY_BASE + k)))
                .collect();
            Box::new((0..slots).map(move |t| {
                if t > 0 {
                    for h in &mut histories {
                        h.advance(cfg, t);
                    }
                }
                let points = histories.iter().flat_map(|h| h.vehicles.iter().map(|v| &v.position));
                DensityGrid::from_points(region, nx, ny, points, 1.0)
            }))
        }
    }
}

/// Deployment used by `algorithm` over the configured horizon.
pub fn deployment_plan(cfg: &ScenarioConfig, algorithm: Algorithm, seed: u64) -> DeploymentPlan {
    match algorithm {
        Algorithm::FixedDeploy => DeploymentPlan::fixed_centers(&cfg.uav_configs, cfg.num_slots as usize),
        Algorithm::Joaodr | Algorithm::Greedy => {
            plan_trajectory(planning_grids(cfg, seed), &cfg.uav_configs, cfg.slot_length_s)
        }
    }
}

/// Service plan for one (task, UAV) pair, with the coverage check applied.
///
/// The uplink runs at the distance of slot `t`; the downlink at the
/// distance between the predicted vehicle position and the UAV's planned
/// position once the upload finishes.
pub fn plan_pair(
    cfg: &ScenarioConfig,
    uav: &UavConfig,
    plan: &DeploymentPlan,
    task: &TaskRequest,
) -> (ServicePlan, Position) {
    let ch = channel_params(cfg);
    let now = plan.position(task.slot, uav.id);
    let d_up = LinkGeometry::between(&now, &task.position, uav.altitude_m).slant_distance();
    let delay = path_gain(cfg.channel_gain_ref, d_up)
        .and_then(|g| uplink_rate(cfg.vehicle_tx_power_w, g, cfg.noise_power_w, cfg.bandwidth_hz, cfg.rate_efficiency))
        .ok()
        .and_then(|rate| upload_delay_slots(task.input_bits, rate, cfg.slot_length_s));
    let Some(delay) = delay else {
        return (ServicePlan::infeasible(uav.id, task.task_id, u64::MAX), task.position);
    };
    let delivery = predict_position(task.position, task.velocity, cfg.slot_length_s, delay);
    if !coverage_feasible(&uav.coverage, task.position, task.velocity, cfg.slot_length_s, delay) {
        return (ServicePlan::infeasible(uav.id, task.task_id, delay), delivery);
    }
    let uav_then = plan.position(task.slot.saturating_add(delay), uav.id);
    let d_down = LinkGeometry::between(&uav_then, &delivery, uav.altitude_m).slant_distance();
    (solve_p3(task, uav, ch, cfg.slot_length_s, delay, d_down), delivery)
}

/// Highest payment first. A task is accepted when it fits on some UAV
/// with a free channel, possibly after moving earlier picks to other UAVs
/// along an augmenting path, and every UAV still covers its picks from
/// stored energy. UAVs are tried in index order.
fn greedy_select(tasks: &[TaskRequest], plans: &[Vec<ServicePlan>], free: &[u32], battery: &[f64]) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..tasks.len()).collect();
    order.sort_by(|&a, &b| tasks[b].payment.total_cmp(&tasks[a].payment).then(a.cmp(&b)));
    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); free.len()];
    for m in order {
        let before = holders.clone();
        let mut visited = vec![false; free.len()];
        if !augment(m, plans, free, &mut holders, &mut visited) {
            continue;
        }
        let within_budget = holders.iter().enumerate().all(|(u, held)| {
            held.iter().map(|&k| plans[k][u].energy_j).sum::<f64>() <= battery[u]
        });
        if !within_budget {
            holders = before;
        }
    }
    let mut picks: Vec<(usize, usize)> = holders
        .iter()
        .enumerate()
        .flat_map(|(u, held)| held.iter().map(move |&m| (u, m)))
        .collect();
    picks.sort_by_key(|&(_, m)| m);
    picks
}

fn augment(m: usize, plans: &[Vec<ServicePlan>], free: &[u32], holders: &mut [Vec<usize>], visited: &mut [bool]) -> bool {
    for u in 0..free.len() {
        if visited[u] || !plans[m][u].feasible || free[u] == 0 {
            continue;
        }
        visited[u] = true;
        if holders[u].len() < free[u] as usize {
            holders[u].push(m);
            return true;
        }
        for slot in 0..holders[u].len() {
            let k = holders[u][slot];
            if augment(k, plans, free, holders, visited) {
                holders[u][slot] = m;
                return true;
            }
        }
    }
    false
}

/// Simulates `cfg.num_slots` slots under `algorithm`, seeded by `cfg.rng_seed`.
pub fn run(cfg: &ScenarioConfig, algorithm: Algorithm) -> Result<RunSummary> {
    let violations = cfg.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidConfig(violations));
    }
    let seed = cfg.rng_seed;
    let theta = battery_targets(cfg)?;
    let plan = deployment_plan(cfg, algorithm, seed);
    let uavs = &cfg.uav_configs;
    let n_uav = uavs.len();

    let mut traffic = Traffic::new(cfg, seed);
    let mut task_rng = task_rng(seed);
    let mut harvest_rng = substream(seed, STREAM_HARVEST);
    let mut batteries: Vec<BatteryQueue> = theta.iter().map(|&t| BatteryQueue::full(t)).collect();
    let mut ledger = ChannelLedger::new(uavs.iter().map(|u| u.channels).collect());
    let mut prev_pos: Vec<Position> = uavs.iter().map(|u| u.start_position()).collect();
    let mut slots = Vec::with_capacity(cfg.num_slots as usize);

    for t in 0..cfg.num_slots {
        let positions: Vec<Position> = (0..n_uav).map(|i| plan.position(t, i)).collect();
        for (i, (p, q)) in positions.iter().zip(&prev_pos).enumerate() {
            if p.distance(q) > uavs[i].max_speed_mps * cfg.slot_length_s + MOVE_TOL_M {
                return Err(Error::Invariant {
                    slot: t,
                    detail: format!("UAV {i} moved {} m in one slot", p.distance(q)),
                });
            }
        }
        prev_pos.clone_from(&positions);

        if t > 0 {
            traffic.advance(cfg, t);
        }
        let tasks = sample_tasks(&traffic.vehicles, cfg, t, &mut task_rng);

        let queues: Vec<f64> = batteries.iter().map(|b| b.queue_j()).collect();
        let mut deliveries = Vec::with_capacity(tasks.len());
        let plans: Vec<Vec<ServicePlan>> = tasks
            .iter()
            .map(|task| {
                let (row, del): (Vec<ServicePlan>, Vec<Position>) = uavs
                    .iter()
                    .map(|u| {
                        let (mut p, d) = plan_pair(cfg, u, &plan, task);
                        p.weight = plan_weight(cfg.control_v, task.payment, queues[u.id], p.energy_j, p.feasible);
                        (p, d)
                    })
                    .unzip();
                deliveries.push(del);
                row
            })
            .collect();
        let tasks_infeasible = plans.iter().filter(|row| row.iter().all(|p| !p.feasible)).count();

        ledger.release_before(t);
        let free: Vec<u32> = (0..n_uav).map(|i| ledger.free_channels(i, t)).collect();
        let battery_start: Vec<f64> = batteries.iter().map(|b| b.energy_j).collect();

        let picks: Vec<(usize, usize)> = match algorithm {
            Algorithm::Joaodr | Algorithm::FixedDeploy => assignment::assign(&plans, &free)
                .matches
                .into_iter()
                .map(|(u, m, _)| (u, m))
                .collect(),
            Algorithm::Greedy => greedy_select(&tasks, &plans, &free, &battery_start),
        };

        let mut consumed = vec![0.0; n_uav];
        let mut served = Vec::with_capacity(picks.len());
        let (mut remuneration, mut utility) = (0.0, 0.0);
        for (u, m) in picks {
            let p = &plans[m][u];
            ledger.occupy(u, t, p.upload_delay_slots)?;
            consumed[u] += p.energy_j;
            remuneration += tasks[m].payment;
            utility += p.weight;
            served.push(ServedTask {
                uav_id: u,
                task: tasks[m].clone(),
                plan: p.clone(),
                delivery_position: deliveries[m][u],
            });
        }
        for i in 0..n_uav {
            if consumed[i] > batteries[i].energy_j {
                return Err(Error::Invariant {
                    slot: t,
                    detail: format!(
                        "UAV {i} scheduled {} J with only {} J stored",
                        consumed[i], batteries[i].energy_j
                    ),
                });
            }
        }

        let mut harvested = vec![0.0; n_uav];
        for (i, u) in uavs.iter().enumerate() {
            let draw = uniform(&mut harvest_rng, 0.0, 2.0 * u.harvest_mean_w * cfg.slot_length_s)
                .min(u.harvest_max_w * cfg.slot_length_s);
            let step = battery_step(batteries[i], draw, consumed[i]).map_err(|e| Error::Invariant {
                slot: t,
                detail: e.to_string(),
            })?;
            harvested[i] = step.credited_j;
            batteries[i] = step.next;
        }

        let busy: Vec<u32> = (0..n_uav).map(|i| ledger.busy(i, t)).collect();
        for (i, &b) in busy.iter().enumerate() {
            if b > uavs[i].channels {
                return Err(Error::Invariant {
                    slot: t,
                    detail: format!("UAV {i} holds {b} channels of {}", uavs[i].channels),
                });
            }
        }

        slots.push(SlotMetrics {
            slot: t,
            remuneration,
            utility,
            uav_positions: positions,
            battery_start_j: battery_start,
            battery_j: batteries.iter().map(|b| b.energy_j).collect(),
            queue_j: queues,
            consumed_j: consumed,
            harvested_j: harvested,
            free_channels: busy.iter().zip(uavs).map(|(&b, u)| u.channels - b).collect(),
            busy_channels: busy,
            tasks_generated: tasks.len(),
            tasks_served: served.len(),
            tasks_infeasible,
            served,
        });
    }

    Ok(RunSummary {
        algorithm,
        seed,
        config: cfg.clone(),
        theta_j: theta,
        slots,
    })
}

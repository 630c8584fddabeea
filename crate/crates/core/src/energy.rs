//! Minimum-energy service of a single task by a single UAV.
//!
//! The UAV receives `I` bits, runs `φ` Gcycles at speed `s` and returns
//! `O` bits at downlink power `P`. Total energy
//!
//! ```text
//! E(s, P) = C_r·I + (α s³ + β)·φ/s + P·O/r(P)
//! ```
//!
//! is minimized subject to `r(P) ≥ λ`, `φ/s + O/r(P) ≤ τ` and `s ≤ s_max`.
//! Without the deadline the two variables separate: `s = ∛(β/2α)` (clamped)
//! and `P` sits on the QoS floor. When that pair misses the deadline the
//! optimum lies on the deadline boundary, which leaves a 1-D search over `s`
//! with the rate pinned to `max(λ, O/(τ − φ/s))`.

use serde::{Deserialize, Serialize};

use crate::config::UavConfig;
use crate::error::{domain, Error, Result};
use crate::model::{ServicePlan, TaskRequest};
use crate::radio::{downlink_rate, min_downlink_power, ChannelParams};

/// Relative tolerance used for continuous constraint comparisons.
pub const REL_TOL: f64 = 1e-9;
/// Absolute floor under [`REL_TOL`].
pub const ABS_TOL: f64 = 1e-12;

const SCAN_POINTS: usize = 64;
const GOLDEN_ITERS: usize = 200;

/// `a ≤ b` up to the crate-wide tolerance.
pub fn approx_le(a: f64, b: f64) -> bool {
    a <= b + (REL_TOL * b.abs()).max(ABS_TOL)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub recv_j: f64,
    pub cpu_j: f64,
    pub send_j: f64,
    pub total_j: f64,
}

impl EnergyBreakdown {
    fn new(recv_j: f64, cpu_j: f64, send_j: f64) -> Self {
        Self {
            recv_j,
            cpu_j,
            send_j,
            total_j: recv_j + cpu_j + send_j,
        }
    }
}

/// CPU power draw `α·s³ + β` in watts.
pub fn cpu_power(alpha: f64, beta: f64, s_gcps: f64) -> Result<f64> {
    if !(s_gcps > 0.0) {
        return Err(domain(format!("cpu speed must be > 0, got {s_gcps}")));
    }
    Ok(alpha * s_gcps.powi(3) + beta)
}

/// Energy to run `cycles_gc` at speed `s`.
pub fn cpu_energy(alpha: f64, beta: f64, s_gcps: f64, cycles_gc: f64) -> Result<f64> {
    Ok(cpu_power(alpha, beta, s_gcps)? * cycles_gc / s_gcps)
}

/// Speed minimizing CPU energy per cycle, `min(∛(β/2α), s_max)`.
///
/// With `β = 0` there is no interior optimum (energy grows with speed) and
/// the result is 0; callers then bind the speed to the deadline instead.
pub fn optimal_cpu_speed(alpha: f64, beta: f64, s_max: f64) -> f64 {
    (beta / (2.0 * alpha)).cbrt().min(s_max)
}

/// Which part of the solution procedure produced the optimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// Separable closed form meets the deadline.
    ClosedForm,
    /// Deadline binds; found by the boundary search.
    DeadlineBound,
}

/// One minimum-energy service problem, everything resolved to numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServiceProblem {
    pub input_bits: f64,
    pub output_bits: f64,
    pub cycles_gc: f64,
    pub qos_bps: f64,
    pub slot_length_s: f64,
    /// Slant distance at the delivery slot.
    pub delivery_distance_m: f64,
    pub alpha: f64,
    pub beta: f64,
    pub cpu_max_gcps: f64,
    pub recv_energy_j_per_bit: f64,
    pub channel: ChannelParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServiceSolution {
    pub cpu_speed_gcps: f64,
    pub downlink_power_w: f64,
    pub downlink_rate_bps: f64,
    pub energy: EnergyBreakdown,
    pub branch: Branch,
}

impl ServiceProblem {
    pub fn new(
        task: &TaskRequest,
        uav: &UavConfig,
        channel: ChannelParams,
        slot_length_s: f64,
        delivery_distance_m: f64,
    ) -> Self {
        Self {
            input_bits: task.input_bits,
            output_bits: task.output_bits,
            cycles_gc: task.cycles_gc,
            qos_bps: task.qos_bps,
            slot_length_s,
            delivery_distance_m,
            alpha: uav.alpha,
            beta: uav.beta,
            cpu_max_gcps: uav.cpu_max_gcps,
            recv_energy_j_per_bit: uav.recv_energy_j_per_bit,
            channel,
        }
    }

    fn recv_energy(&self) -> f64 {
        self.recv_energy_j_per_bit * self.input_bits
    }

    /// Downlink rate needed at speed `s`: the QoS floor or the rate that
    /// finishes the output in the time left after computing.
    fn required_rate(&self, s: f64) -> f64 {
        let left = self.slot_length_s - self.cycles_gc / s;
        if left <= 0.0 {
            return f64::INFINITY;
        }
        (self.output_bits / left).max(self.qos_bps)
    }

    fn send_energy_at_rate(&self, rate: f64) -> f64 {
        if !rate.is_finite() {
            return f64::INFINITY;
        }
        match min_downlink_power(rate, self.delivery_distance_m, &self.channel) {
            Ok(p) if rate > 0.0 => p * self.output_bits / rate,
            _ => f64::INFINITY,
        }
    }

    /// Energy (without the receive term) with the rate pinned at `s`.
    fn boundary_objective(&self, s: f64) -> f64 {
        let cpu = self.alpha * s * s * self.cycles_gc + self.beta * self.cycles_gc / s;
        cpu + self.send_energy_at_rate(self.required_rate(s))
    }

    fn finish(&self, s: f64, rate_target: f64, branch: Branch) -> Option<ServiceSolution> {
        let p = min_downlink_power(rate_target, self.delivery_distance_m, &self.channel).ok()?;
        let r = downlink_rate(p, self.delivery_distance_m, &self.channel).ok()?;
        if !(p.is_finite() && r > 0.0) {
            return None;
        }
        let cpu = cpu_energy(self.alpha, self.beta, s, self.cycles_gc).ok()?;
        let send = p * self.output_bits / r;
        let sol = ServiceSolution {
            cpu_speed_gcps: s,
            downlink_power_w: p,
            downlink_rate_bps: r,
            energy: EnergyBreakdown::new(self.recv_energy(), cpu, send),
            branch,
        };
        self.satisfied_by(&sol).then_some(sol)
    }

    /// QoS, deadline and speed-cap check at the crate tolerance.
    pub fn satisfied_by(&self, sol: &ServiceSolution) -> bool {
        let s = sol.cpu_speed_gcps;
        let r = sol.downlink_rate_bps;
        s > 0.0
            && approx_le(s, self.cpu_max_gcps)
            && approx_le(self.qos_bps, r)
            && approx_le(self.cycles_gc / s + self.output_bits / r, self.slot_length_s)
    }

    /// Minimum-energy `(s, P)`, or `None` when no pair meets every constraint.
    pub fn solve(&self) -> Option<ServiceSolution> {
        if !(self.cycles_gc > 0.0 && self.output_bits > 0.0 && self.slot_length_s > 0.0) {
            return None;
        }
        // Computing alone must leave time for the downlink.
        if self.cycles_gc >= self.slot_length_s * self.cpu_max_gcps {
            return None;
        }

        let s_free = optimal_cpu_speed(self.alpha, self.beta, self.cpu_max_gcps);
        if s_free > 0.0
            && self.cycles_gc / s_free + self.output_bits / self.qos_bps <= self.slot_length_s
        {
            if let Some(sol) = self.finish(s_free, self.qos_bps, Branch::ClosedForm) {
                return Some(sol);
            }
        }
        self.solve_on_boundary()
    }

    fn solve_on_boundary(&self) -> Option<ServiceSolution> {
        let lo = self.cycles_gc / self.slot_length_s * (1.0 + REL_TOL);
        let hi = self.cpu_max_gcps;
        if !(lo < hi) {
            return None;
        }
        let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
        let grid: Vec<f64> = (0..SCAN_POINTS)
            .map(|k| if k == SCAN_POINTS - 1 { hi } else { lo + step * k as f64 })
            .collect();
        let (best_k, best_val) = grid
            .iter()
            .map(|&s| self.boundary_objective(s))
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (k, v)| if v < acc.1 { (k, v) } else { acc });
        if !best_val.is_finite() {
            return None;
        }

        let a = grid[best_k.saturating_sub(1)];
        let b = grid[(best_k + 1).min(SCAN_POINTS - 1)];
        let s_refined = golden_section_min(|s| self.boundary_objective(s), a, b);
        let s = if self.boundary_objective(s_refined) <= best_val {
            s_refined
        } else {
            grid[best_k]
        };
        self.finish(s, self.required_rate(s), Branch::DeadlineBound)
    }
}

/// Minimizer of `f` on `[a, b]`, assuming unimodality on the bracket.
fn golden_section_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..GOLDEN_ITERS {
        if (b - a).abs() <= 1e-14 * (a.abs() + b.abs()) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        c
    } else {
        d
    }
}

/// Solves the per-pair energy problem and packages it as a [`ServicePlan`].
///
/// The weight is left at zero; the Lyapunov controller fills it in.
pub fn solve_p3(
    task: &TaskRequest,
    uav: &UavConfig,
    channel: ChannelParams,
    slot_length_s: f64,
    upload_delay_slots: u64,
    delivery_distance_m: f64,
) -> ServicePlan {
    let problem = ServiceProblem::new(task, uav, channel, slot_length_s, delivery_distance_m);
    match problem.solve() {
        Some(sol) => ServicePlan {
            uav_id: uav.id,
            task_id: task.task_id,
            cpu_speed_gcps: sol.cpu_speed_gcps,
            downlink_power_w: sol.downlink_power_w,
            downlink_rate_bps: sol.downlink_rate_bps,
            upload_delay_slots,
            energy_j: sol.energy.total_j,
            weight: 0.0,
            feasible: true,
        },
        None => ServicePlan::infeasible(uav.id, task.task_id, upload_delay_slots),
    }
}

/// Breaks a feasible plan's energy into receive, compute and transmit parts.
pub fn service_energy(task: &TaskRequest, plan: &ServicePlan, uav: &UavConfig) -> Result<EnergyBreakdown> {
    if !plan.feasible {
        return Err(Error::Contract(format!(
            "energy of infeasible plan (uav {}, task {})",
            plan.uav_id, plan.task_id
        )));
    }
    let recv = uav.recv_energy_j_per_bit * task.input_bits;
    let cpu = cpu_energy(uav.alpha, uav.beta, plan.cpu_speed_gcps, task.cycles_gc)?;
    let send = plan.downlink_power_w * task.output_bits / plan.downlink_rate_bps;
    Ok(EnergyBreakdown::new(recv, cpu, send))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Position, Velocity};

    fn channel(noise: f64) -> ChannelParams {
        ChannelParams {
            bandwidth_hz: 1e6,
            channel_gain_ref: 1e-5,
            noise_power_w: noise,
            rate_efficiency: 0.95,
        }
    }

    fn problem(cycles: f64, out_bits: f64) -> ServiceProblem {
        ServiceProblem {
            input_bits: 4e6,
            output_bits: out_bits,
            cycles_gc: cycles,
            qos_bps: 2.56e5,
            slot_length_s: 5.0,
            delivery_distance_m: 300.0,
            alpha: 0.05,
            beta: 0.9,
            cpu_max_gcps: 10.0,
            recv_energy_j_per_bit: 1e-8,
            channel: channel(1e-11),
        }
    }

    #[test]
    fn cpu_power_examples() {
        assert!(cpu_power(0.05, 0.9, 0.0).is_err());
        assert_eq!(cpu_power(0.0, 0.9, 5.0).unwrap(), 0.9);
        assert!((cpu_power(0.05, 0.9, 2.08008).unwrap() - 1.35).abs() < 1e-4);
    }

    #[test]
    fn optimal_cpu_speed_examples() {
        // ∛9 = 2.080083823051904
        assert!((optimal_cpu_speed(0.05, 0.9, 10.0) - 2.080_083_823_051_904).abs() < 1e-12);
        assert_eq!(optimal_cpu_speed(0.05, 0.9, 1.5), 1.5);
        assert_eq!(optimal_cpu_speed(0.05, 0.0, 10.0), 0.0);
    }

    #[test]
    fn closed_form_branch_when_deadline_is_slack() {
        // φ/s* = 1.923 s, O/λ = 1.953 s: fits in 5 s.
        let p = problem(4.0, 5e5);
        let sol = p.solve().unwrap();
        assert_eq!(sol.branch, Branch::ClosedForm);
        assert!((sol.cpu_speed_gcps - 9f64.cbrt()).abs() < 1e-12);
        let p_floor = min_downlink_power(2.56e5, 300.0, &p.channel).unwrap();
        assert_eq!(sol.downlink_power_w, p_floor);
        // mpmath: 1.35 * 4 / ∛9 = 2.596049226553335
        assert!((sol.energy.cpu_j - 2.596_049_226_553_335).abs() < 1e-9);
        assert!((sol.energy.recv_j - 0.04).abs() < 1e-15);
    }

    #[test]
    fn boundary_branch_binds_the_deadline() {
        let p = problem(4.0, 2e6);
        assert!(4.0 / 9f64.cbrt() + 2e6 / 2.56e5 > 5.0);
        let sol = p.solve().unwrap();
        assert_eq!(sol.branch, Branch::DeadlineBound);
        let used = 4.0 / sol.cpu_speed_gcps + 2e6 / sol.downlink_rate_bps;
        assert!((used - 5.0).abs() < 1e-6, "{used}");
        assert!(sol.downlink_rate_bps >= 2.56e5);
        assert!(sol.cpu_speed_gcps <= 10.0);
    }

    #[test]
    fn cpu_alone_over_the_slot_is_infeasible() {
        let mut p = problem(60.0, 1e5);
        p.cpu_max_gcps = 10.0;
        assert!(p.solve().is_none());
    }

    #[test]
    fn zero_static_power_goes_straight_to_the_boundary() {
        let mut p = problem(4.0, 5e5);
        p.beta = 0.0;
        let sol = p.solve().unwrap();
        assert_eq!(sol.branch, Branch::DeadlineBound);
        let used = 4.0 / sol.cpu_speed_gcps + 5e5 / sol.downlink_rate_bps;
        assert!((used - 5.0).abs() < 1e-6);
    }

    #[test]
    fn service_energy_examples() {
        let uav = crate::config::ScenarioConfig::reference().uav_configs[0].clone();
        let task = TaskRequest {
            task_id: 0,
            vehicle_id: 0,
            slot: 0,
            input_bits: 4e6,
            output_bits: 2e6,
            cycles_gc: 4.0,
            payment: 5.0,
            qos_bps: 2.56e5,
            position: Position::new(0.0, 0.0),
            velocity: Velocity::new(0.0, 0.0),
        };
        let plan = ServicePlan {
            uav_id: 0,
            task_id: 0,
            cpu_speed_gcps: 2.08008,
            downlink_power_w: 0.01849,
            downlink_rate_bps: 2.56e5,
            upload_delay_slots: 1,
            energy_j: 0.0,
            weight: 0.0,
            feasible: true,
        };
        let e = service_energy(&task, &plan, &uav).unwrap();
        assert!((e.recv_j - 0.04).abs() < 1e-12);
        assert!((e.cpu_j - 2.596).abs() < 1e-3);
        assert!((e.send_j - 0.1445).abs() < 1e-3);
        assert_eq!(e.total_j, e.recv_j + e.cpu_j + e.send_j);

        let bad = ServicePlan::infeasible(0, 0, 1);
        assert!(matches!(service_energy(&task, &bad, &uav), Err(Error::Contract(_))));
    }

    #[test]
    fn golden_section_finds_parabola_vertex() {
        let x = golden_section_min(|x| (x - 1.3).powi(2), 0.0, 4.0);
        assert!((x - 1.3).abs() < 1e-7);
    }
}

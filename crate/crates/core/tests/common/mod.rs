//! Brute-force oracles shared by the integration and acceptance tests.
//!
//! Each oracle recomputes its answer from the raw formulas by exhaustive
//! search, without calling the library routine it checks.

#![allow(dead_code)]

use uavmec::energy::ServiceProblem;

/// Downlink rate `γW·log2(1 + P·g0/(N0·d²))`, straight from the link budget.
pub fn link_rate(p: &ServiceProblem, power_w: f64) -> f64 {
    let ch = &p.channel;
    let snr = power_w * ch.channel_gain_ref / (ch.noise_power_w * p.delivery_distance_m.powi(2));
    ch.rate_efficiency * ch.bandwidth_hz * (1.0 + snr).log2()
}

/// Power that reaches `rate` exactly.
pub fn link_power(p: &ServiceProblem, rate: f64) -> f64 {
    let ch = &p.channel;
    (2f64.powf(rate / (ch.rate_efficiency * ch.bandwidth_hz)) - 1.0) * ch.noise_power_w
        * p.delivery_distance_m.powi(2)
        / ch.channel_gain_ref
}

/// Total service energy at `(s, P)`.
pub fn service_energy(p: &ServiceProblem, s: f64, power_w: f64) -> f64 {
    let r = link_rate(p, power_w);
    p.recv_energy_j_per_bit * p.input_bits
        + (p.alpha * s.powi(3) + p.beta) * p.cycles_gc / s
        + power_w * p.output_bits / r
}

/// Exact feasibility of `(s, P)`: speed cap, QoS floor and deadline.
pub fn feasible(p: &ServiceProblem, s: f64, power_w: f64) -> bool {
    let r = link_rate(p, power_w);
    power_w.is_finite()
        && s > 0.0
        && s <= p.cpu_max_gcps
        && r >= p.qos_bps
        && p.cycles_gc / s + p.output_bits / r <= p.slot_length_s
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub energy_j: f64,
    pub cpu_speed_gcps: f64,
    pub power_w: f64,
    pub t_cpu_s: f64,
    pub t_send_s: f64,
}

/// Box in (compute time, transmit time) seconds.
#[derive(Debug, Clone, Copy)]
pub struct GridBox {
    pub cpu_lo: f64,
    pub cpu_hi: f64,
    pub send_lo: f64,
    pub send_hi: f64,
}

/// Slack on the deadline for nodes placed exactly on it.
const DEADLINE_ULP: f64 = 1e-12;

fn node(lo: f64, hi: f64, k: usize, n: usize) -> f64 {
    if k + 1 == n {
        hi
    } else {
        lo + (hi - lo) * k as f64 / (n - 1) as f64
    }
}

/// Exhaustive scan of `n` compute-time rows against the transmit-time
/// columns: `n` evenly spaced nodes, plus every node on the deadline line
/// `t_cpu + t_send = τ` and the QoS line `t_send = O/λ` that falls inside
/// the box. Returns the best feasible node.
///
/// Row terms (receive + CPU energy) and column terms (power, transmit
/// energy) are tabulated once, so each node costs a sum and a comparison.
pub fn p3_grid_scan(p: &ServiceProblem, bx: GridBox, n: usize) -> Option<GridPoint> {
    let recv = p.recv_energy_j_per_bit * p.input_bits;
    let rows: Vec<(f64, f64, f64)> = (0..n)
        .map(|i| node(bx.cpu_lo, bx.cpu_hi, i, n))
        .map(|a| {
            let s = p.cycles_gc / a;
            (a, s, recv + (p.alpha * s.powi(3) + p.beta) * a)
        })
        .filter(|&(_, s, _)| s <= p.cpu_max_gcps)
        .collect();
    let mut send: Vec<f64> = (0..n).map(|j| node(bx.send_lo, bx.send_hi, j, n)).collect();
    send.extend(rows.iter().map(|r| p.slot_length_s - r.0));
    send.push(p.output_bits / p.qos_bps);
    let cols: Vec<(f64, f64, f64)> = send
        .into_iter()
        .filter(|&b| b > 0.0 && bx.send_lo <= b && b <= bx.send_hi && p.output_bits / b >= p.qos_bps)
        .map(|b| {
            let power = link_power(p, p.output_bits / b);
            (b, power, power * b)
        })
        .collect();
    let limit = p.slot_length_s * (1.0 + DEADLINE_ULP);
    let mut best: Option<GridPoint> = None;
    for &(a, s, e_row) in &rows {
        for &(b, power, e_col) in &cols {
            let e = e_row + e_col;
            if a + b <= limit && best.is_none_or(|x| e < x.energy_j) {
                best = Some(GridPoint {
                    energy_j: e,
                    cpu_speed_gcps: s,
                    power_w: power,
                    t_cpu_s: a,
                    t_send_s: b,
                });
            }
        }
    }
    best
}

/// All feasible (compute time, transmit time) pairs, or `None` when even
/// the fastest CPU leaves no time for the downlink.
pub fn p3_search_box(p: &ServiceProblem) -> Option<GridBox> {
    let cpu_lo = p.cycles_gc / p.cpu_max_gcps;
    let send_hi = (p.slot_length_s - cpu_lo).min(p.output_bits / p.qos_bps);
    if !(cpu_lo < p.slot_length_s && send_hi > 0.0) {
        return None;
    }
    Some(GridBox {
        cpu_lo,
        cpu_hi: p.slot_length_s,
        send_lo: 0.0,
        send_hi,
    })
}

/// Minimum service energy by exhaustive grid scans, refined around the
/// best node. Each level scans a `grid_n`-row grid over a box `MARGIN`
/// cells either side of the previous best node.
pub fn p3_grid_oracle(p: &ServiceProblem, grid_n: usize) -> Option<GridPoint> {
    assert!(grid_n >= 100, "grid_n must be at least 100");
    const MARGIN: f64 = 8.0;
    const LEVELS: usize = 12;
    let full = p3_search_box(p)?;
    let mut best = p3_grid_scan(p, full, grid_n)?;
    let mut bx = full;
    let mut center = best;
    for _ in 0..LEVELS {
        let da = (bx.cpu_hi - bx.cpu_lo) / (grid_n - 1) as f64;
        let db = (bx.send_hi - bx.send_lo) / (grid_n - 1) as f64;
        let (a, b) = (center.t_cpu_s, center.t_send_s);
        bx = GridBox {
            cpu_lo: (a - MARGIN * da).max(full.cpu_lo),
            cpu_hi: (a + MARGIN * da).min(full.cpu_hi),
            send_lo: (b - MARGIN * db).max(full.send_lo),
            send_hi: (b + MARGIN * db).min(full.send_hi),
        };
        if bx.cpu_hi - bx.cpu_lo <= 1e-15 * bx.cpu_hi {
            break;
        }
        let Some(level_best) = p3_grid_scan(p, bx, grid_n) else {
            break;
        };
        center = level_best;
        if level_best.energy_j < best.energy_j {
            best = level_best;
        }
    }
    Some(best)
}

/// Largest total positive weight over all capacity-respecting partial
/// matchings, by enumeration. Refuses more than 8 tasks or 3 UAVs.
pub fn assignment_brute_force(matrix: &[Vec<f64>], capacities: &[u32]) -> Option<f64> {
    if matrix.len() > 8 || capacities.len() > 3 {
        return None;
    }
    fn go(m: usize, matrix: &[Vec<f64>], left: &mut [u32]) -> f64 {
        if m == matrix.len() {
            return 0.0;
        }
        let mut best = go(m + 1, matrix, left);
        for u in 0..left.len() {
            let w = matrix[m][u];
            if left[u] > 0 && w > 0.0 {
                left[u] -= 1;
                best = best.max(w + go(m + 1, matrix, left));
                left[u] += 1;
            }
        }
        best
    }
    Some(go(0, matrix, &mut capacities.to_vec()))
}

/// Channels busy at `slot` by direct summation over every accepted service
/// `(start_slot, upload_delay)`: a service holds its channel from its start
/// through `start + delay`.
pub fn occupancy_by_sum(services: &[(u64, u64)], slot: u64) -> u32 {
    services
        .iter()
        .filter(|&&(t0, d)| t0 <= slot && slot <= t0 + d)
        .count() as u32
}

/// Central finite difference.
pub fn derivative(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = 1e-6 * x.abs().max(1e-3);
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// A random service problem. Ranges straddle the point where the deadline
/// starts to bind, so both solver branches show up.
pub fn random_problem(rng: &mut rand_chacha::ChaCha8Rng) -> ServiceProblem {
    use rand::Rng;
    let input_bits = rng.random_range(4.0e6..1.0e7);
    let noise = [1e-13, 1e-12, 3e-12][rng.random_range(0..3)];
    ServiceProblem {
        input_bits,
        output_bits: rng.random_range(2.0e5..1.0e7),
        cycles_gc: input_bits * rng.random_range(0.2e-6..2.0e-6),
        qos_bps: rng.random_range(256.0e3..768.0e3),
        slot_length_s: 5.0,
        delivery_distance_m: rng.random_range(300.0..1600.0),
        alpha: rng.random_range(0.01..0.1),
        beta: rng.random_range(0.1..1.5),
        cpu_max_gcps: rng.random_range(2.0..6.0),
        recv_energy_j_per_bit: 1e-8,
        channel: uavmec::ChannelParams {
            bandwidth_hz: 1.0e6,
            channel_gain_ref: 1.0e-5,
            noise_power_w: noise,
            rate_efficiency: 0.95,
        },
    }
}

/// Relative gap `|a − b| / |b|`.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

//! Scenario configuration, validation and the TOML scenario file format.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Interval, Position, RectRegion};

pub const SCHEMA_VERSION: &str = "v1";

/// Static capabilities of one UAV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UavConfig {
    pub id: usize,
    pub coverage: RectRegion,
    pub altitude_m: f64,
    pub max_speed_mps: f64,
    pub channels: u32,
    pub cpu_max_gcps: f64,
    /// Cubic CPU power coefficient, W per (Gcycles/s)^3.
    pub alpha: f64,
    /// Static CPU power, W.
    pub beta: f64,
    pub recv_energy_j_per_bit: f64,
    /// Battery target `θ`. Sized automatically when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub battery_target_j: Option<f64>,
    pub harvest_max_w: f64,
    pub harvest_mean_w: f64,
    /// Initial horizontal position; the coverage center when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<Position>,
}

impl UavConfig {
    pub fn start_position(&self) -> Position {
        self.start.unwrap_or_else(|| self.coverage.center())
    }
}

/// Spatial distribution of vehicles over the service region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensityModel {
    Uniform,
    /// Truncated isotropic Gaussian whose center sweeps back and forth
    /// between `start` and `end` with the given period.
    Hotspot {
        start: Position,
        end: Position,
        period_slots: f64,
        sigma_m: f64,
    },
}

impl DensityModel {
    pub fn hotspot_center(&self, slot: u64) -> Option<Position> {
        match self {
            DensityModel::Uniform => None,
            DensityModel::Hotspot {
                start,
                end,
                period_slots,
                ..
            } => {
                let phase = 2.0 * std::f64::consts::PI * slot as f64 / period_slots;
                let frac = 0.5 * (1.0 - phase.cos());
                Some(Position::new(
                    start.x + frac * (end.x - start.x),
                    start.y + frac * (end.y - start.y),
                ))
            }
        }
    }

    /// Unnormalized density at `p` during `slot`.
    pub fn value(&self, p: &Position, slot: u64) -> f64 {
        match self {
            DensityModel::Uniform => 1.0,
            DensityModel::Hotspot { sigma_m, .. } => {
                let c = self.hotspot_center(slot).expect("hotspot has a center");
                (-p.distance_sq(&c) / (2.0 * sigma_m * sigma_m)).exp()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerMode {
    /// Use the generator's true density.
    Oracle,
    /// Use histograms of vehicle positions from independent prior runs.
    Empirical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerConfig {
    pub mode: PlannerMode,
    pub grid_nx: usize,
    pub grid_ny: usize,
    /// Number of prior mobility realizations feeding the empirical histogram.
    pub history_runs: usize,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            mode: PlannerMode::Oracle,
            grid_nx: 50,
            grid_ny: 50,
            history_runs: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub schema: String,
    pub slot_length_s: f64,
    pub num_slots: u64,
    pub vehicle_count: usize,
    pub vehicle_speed_range_mps: Interval,
    pub task_gen_prob: f64,
    pub input_bits_range: Interval,
    pub output_bits_range: Interval,
    pub qos_range_bps: Interval,
    pub payment_range: Interval,
    /// Gcycles per input bit.
    pub cycles_per_bit: f64,
    pub vehicle_tx_power_w: f64,
    pub bandwidth_hz: f64,
    /// Linear channel power gain at 1 m.
    pub channel_gain_ref: f64,
    pub noise_power_w: f64,
    pub rate_efficiency: f64,
    pub control_v: f64,
    pub rng_seed: u64,
    pub region: RectRegion,
    #[serde(default = "default_density")]
    pub density: DensityModel,
    #[serde(default)]
    pub planner: PlannerConfig,
    pub uav_configs: Vec<UavConfig>,
}

fn default_density() -> DensityModel {
    DensityModel::Uniform
}

/// A single broken invariant, reported as data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub rule: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.field, self.rule)
    }
}

struct Checker(Vec<Violation>);

impl Checker {
    fn fail(&mut self, field: impl Into<String>, rule: impl Into<String>) {
        self.0.push(Violation {
            field: field.into(),
            rule: rule.into(),
        });
    }

    fn positive(&mut self, field: &str, v: f64) {
        if !(v.is_finite() && v > 0.0) {
            self.fail(field, "must be > 0");
        }
    }

    fn non_negative(&mut self, field: &str, v: f64) {
        if !(v.is_finite() && v >= 0.0) {
            self.fail(field, "must be >= 0");
        }
    }

    fn positive_interval(&mut self, field: &str, iv: &Interval) {
        if !(iv.lo().is_finite() && iv.hi().is_finite()) || iv.lo() > iv.hi() {
            self.fail(field, "lower bound exceeds upper bound");
        } else if iv.lo() <= 0.0 {
            self.fail(field, "must be > 0");
        }
    }
}

impl ScenarioConfig {
    /// The evaluation setup: two partially overlapping UAV service areas
    /// over a rural road grid, with the published channel and CPU values.
    pub fn reference() -> Self {
        let uav = |id: usize, coverage: RectRegion| UavConfig {
            id,
            coverage,
            altitude_m: 300.0,
            max_speed_mps: 5.0,
            channels: 3,
            cpu_max_gcps: 5.0,
            alpha: 0.05,
            beta: 0.9,
            recv_energy_j_per_bit: 1e-8,
            battery_target_j: None,
            harvest_max_w: 0.4,
            harvest_mean_w: 0.2,
            start: None,
        };
        Self {
            schema: SCHEMA_VERSION.to_string(),
            slot_length_s: 5.0,
            num_slots: 300,
            vehicle_count: 15,
            vehicle_speed_range_mps: Interval(10.0, 20.0),
            task_gen_prob: 0.5,
            input_bits_range: Interval(4.0e6, 1.0e7),
            output_bits_range: Interval(2.0e6, 1.0e7),
            qos_range_bps: Interval(256.0e3, 768.0e3),
            payment_range: Interval(1.0, 10.0),
            cycles_per_bit: 1.0e-6,
            vehicle_tx_power_w: 0.01,
            bandwidth_hz: 1.0e6,
            channel_gain_ref: 1.0e-5,
            noise_power_w: 1.0e-13,
            rate_efficiency: 0.95,
            control_v: 2.0,
            rng_seed: 1,
            region: RectRegion::new(0.0, 2000.0, 0.0, 1000.0),
            density: DensityModel::Uniform,
            planner: PlannerConfig::default(),
            uav_configs: vec![
                uav(0, RectRegion::new(0.0, 1200.0, 0.0, 1000.0)),
                uav(1, RectRegion::new(800.0, 2000.0, 0.0, 1000.0)),
            ],
        }
    }

    /// Checks every invariant of the configuration. Empty means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut c = Checker(Vec::new());
        if self.schema != SCHEMA_VERSION {
            c.fail("schema", format!("must be \"{SCHEMA_VERSION}\""));
        }
        c.positive("slot_length_s", self.slot_length_s);
        if !self.region.is_well_formed() {
            c.fail("region", "requires x_min < x_max and y_min < y_max");
        }
        c.positive_interval("vehicle_speed_range_mps", &self.vehicle_speed_range_mps);
        if !(0.0..=1.0).contains(&self.task_gen_prob) {
            c.fail("task_gen_prob", "not in [0,1]");
        }
        c.positive_interval("input_bits_range", &self.input_bits_range);
        c.positive_interval("output_bits_range", &self.output_bits_range);
        c.positive_interval("qos_range_bps", &self.qos_range_bps);
        c.positive_interval("payment_range", &self.payment_range);
        c.positive("cycles_per_bit", self.cycles_per_bit);
        c.positive("vehicle_tx_power_w", self.vehicle_tx_power_w);
        c.positive("bandwidth_hz", self.bandwidth_hz);
        c.positive("channel_gain_ref", self.channel_gain_ref);
        c.positive("noise_power_w", self.noise_power_w);
        if !(self.rate_efficiency > 0.0 && self.rate_efficiency < 1.0) {
            c.fail("rate_efficiency", "not in (0,1)");
        }
        c.non_negative("control_v", self.control_v);

        if let DensityModel::Hotspot {
            period_slots,
            sigma_m,
            ..
        } = &self.density
        {
            c.positive("density.period_slots", *period_slots);
            c.positive("density.sigma_m", *sigma_m);
        }
        if self.planner.grid_nx == 0 || self.planner.grid_ny == 0 {
            c.fail("planner.grid", "needs at least one cell per axis");
        }
        if self.planner.mode == PlannerMode::Empirical && self.planner.history_runs == 0 {
            c.fail("planner.history_runs", "must be >= 1 in empirical mode");
        }

        if self.uav_configs.is_empty() {
            c.fail("uav_configs", "must list at least one UAV");
        }
        for (k, u) in self.uav_configs.iter().enumerate() {
            let f = |name: &str| format!("uav_configs[{k}].{name}");
            if u.id != k {
                c.fail(f("id"), format!("must equal its list index {k}"));
            }
            if !u.coverage.is_well_formed() {
                c.fail(f("coverage"), "requires x_min < x_max and y_min < y_max");
            } else if !self.region.contains_region(&u.coverage) {
                c.fail(f("coverage"), "not contained in region");
            }
            c.positive(&f("altitude_m"), u.altitude_m);
            c.positive(&f("max_speed_mps"), u.max_speed_mps);
            if u.channels < 1 {
                c.fail(f("channels"), "must be >= 1");
            }
            c.positive(&f("cpu_max_gcps"), u.cpu_max_gcps);
            c.positive(&f("alpha"), u.alpha);
            c.non_negative(&f("beta"), u.beta);
            c.non_negative(&f("recv_energy_j_per_bit"), u.recv_energy_j_per_bit);
            if let Some(theta) = u.battery_target_j {
                c.positive(&f("battery_target_j"), theta);
            }
            c.non_negative(&f("harvest_max_w"), u.harvest_max_w);
            c.non_negative(&f("harvest_mean_w"), u.harvest_mean_w);
            if let Some(s) = &u.start {
                if !u.coverage.contains(s) {
                    c.fail(f("start"), "not inside coverage");
                }
            }
        }
        c.0
    }

    /// Returns the config back, or all violations joined into one error.
    pub fn validated(self) -> Result<Self> {
        let v = self.validate();
        if v.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidConfig(v))
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Reads and validates a scenario file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_toml_str(&text)?.validated()
    }

    pub fn max_payment(&self) -> f64 {
        self.payment_range.hi()
    }
}

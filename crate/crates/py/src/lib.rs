//! Python bindings: scenarios, simulation runs and the core numeric kernels.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use uavmec::energy::ServiceProblem;
use uavmec::export;
use uavmec::radio::{self, ChannelParams};
use uavmec::sim::{self, Algorithm, RunSummary};
use uavmec::{lyapunov, Error, ScenarioConfig};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidConfig(_) | Error::Parse(_) | Error::Domain(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// A simulation scenario.
#[pyclass(name = "Scenario", from_py_object)]
#[derive(Clone)]
struct PyScenario {
    inner: ScenarioConfig,
}

#[pymethods]
impl PyScenario {
    /// The built-in two-UAV reference scenario.
    #[staticmethod]
    fn reference() -> Self {
        Self {
            inner: ScenarioConfig::reference(),
        }
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        ScenarioConfig::from_toml_str(text).map(|inner| Self { inner }).map_err(to_py)
    }

    fn to_toml(&self) -> PyResult<String> {
        self.inner.to_toml_string().map_err(to_py)
    }

    /// Violations as "field rule" strings; empty when valid.
    fn validate(&self) -> Vec<String> {
        self.inner.validate().iter().map(|v| v.to_string()).collect()
    }

    #[getter]
    fn num_slots(&self) -> u64 {
        self.inner.num_slots
    }

    #[setter]
    fn set_num_slots(&mut self, v: u64) {
        self.inner.num_slots = v;
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.rng_seed
    }

    #[setter]
    fn set_seed(&mut self, v: u64) {
        self.inner.rng_seed = v;
    }

    #[getter]
    fn control_v(&self) -> f64 {
        self.inner.control_v
    }

    #[setter]
    fn set_control_v(&mut self, v: f64) {
        self.inner.control_v = v;
    }

    #[getter]
    fn vehicle_count(&self) -> usize {
        self.inner.vehicle_count
    }

    #[setter]
    fn set_vehicle_count(&mut self, v: usize) {
        self.inner.vehicle_count = v;
    }

    #[getter]
    fn uav_count(&self) -> usize {
        self.inner.uav_configs.len()
    }

    /// Battery targets per UAV.
    fn battery_targets(&self) -> PyResult<Vec<f64>> {
        sim::battery_targets(&self.inner).map_err(to_py)
    }

    /// Planned `(x, y)` per slot and UAV.
    #[pyo3(signature = (algorithm="joaodr"))]
    fn plan(&self, algorithm: &str) -> PyResult<Vec<Vec<(f64, f64)>>> {
        let algo: Algorithm = algorithm.parse().map_err(to_py)?;
        let plan = sim::deployment_plan(&self.inner, algo, self.inner.rng_seed);
        Ok(plan
            .positions
            .iter()
            .map(|row| row.iter().map(|p| (p.x, p.y)).collect())
            .collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario(uavs={}, vehicles={}, slots={}, V={}, seed={})",
            self.inner.uav_configs.len(),
            self.inner.vehicle_count,
            self.inner.num_slots,
            self.inner.control_v,
            self.inner.rng_seed
        )
    }
}

/// Result of one simulation run.
#[pyclass(name = "RunResult")]
struct PyRunResult {
    inner: RunSummary,
}

#[pymethods]
impl PyRunResult {
    #[getter]
    fn algorithm(&self) -> String {
        self.inner.algorithm.to_string()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn theta(&self) -> Vec<f64> {
        self.inner.theta_j.clone()
    }

    fn cumulative_remuneration(&self) -> Vec<f64> {
        self.inner.cumulative_remuneration()
    }

    fn cumulative_utility(&self) -> Vec<f64> {
        self.inner.cumulative_utility()
    }

    fn time_average_utility(&self) -> f64 {
        self.inner.time_average_utility()
    }

    fn tasks_served(&self) -> usize {
        self.inner.tasks_served()
    }

    /// Battery level per slot and UAV at the end of each slot.
    fn battery(&self) -> Vec<Vec<f64>> {
        self.inner.slots.iter().map(|m| m.battery_j.clone()).collect()
    }

    fn metrics_csv(&self) -> String {
        export::metrics_csv(&self.inner)
    }

    fn __len__(&self) -> usize {
        self.inner.slots.len()
    }
}

/// Simulates `scenario` under `algorithm` (joaodr, greedy or fixed-deploy).
#[pyfunction]
#[pyo3(signature = (scenario, algorithm="joaodr"))]
fn run(py: Python<'_>, scenario: &PyScenario, algorithm: &str) -> PyResult<PyRunResult> {
    let algo: Algorithm = algorithm.parse().map_err(to_py)?;
    let cfg = scenario.inner.clone();
    let inner = py.detach(move || sim::run(&cfg, algo)).map_err(to_py)?;
    Ok(PyRunResult { inner })
}

#[pyfunction]
fn size_theta(v: f64, p_max: f64, e_min_j: f64, e_max_j: f64, channels: u32) -> PyResult<f64> {
    lyapunov::size_theta(v, p_max, e_min_j, e_max_j, channels).map_err(to_py)
}

#[pyfunction]
fn uplink_rate(tx_power_w: f64, gain: f64, noise_w: f64, bandwidth_hz: f64, rate_efficiency: f64) -> PyResult<f64> {
    radio::uplink_rate(tx_power_w, gain, noise_w, bandwidth_hz, rate_efficiency).map_err(to_py)
}

fn channel(bandwidth_hz: f64, channel_gain_ref: f64, noise_power_w: f64, rate_efficiency: f64) -> ChannelParams {
    ChannelParams {
        bandwidth_hz,
        channel_gain_ref,
        noise_power_w,
        rate_efficiency,
    }
}

#[pyfunction]
fn downlink_rate(
    power_w: f64,
    distance_m: f64,
    bandwidth_hz: f64,
    channel_gain_ref: f64,
    noise_power_w: f64,
    rate_efficiency: f64,
) -> PyResult<f64> {
    let ch = channel(bandwidth_hz, channel_gain_ref, noise_power_w, rate_efficiency);
    radio::downlink_rate(power_w, distance_m, &ch).map_err(to_py)
}

#[pyfunction]
fn min_downlink_power(
    rate_bps: f64,
    distance_m: f64,
    bandwidth_hz: f64,
    channel_gain_ref: f64,
    noise_power_w: f64,
    rate_efficiency: f64,
) -> PyResult<f64> {
    let ch = channel(bandwidth_hz, channel_gain_ref, noise_power_w, rate_efficiency);
    radio::min_downlink_power(rate_bps, distance_m, &ch).map_err(to_py)
}

/// Minimum-energy service of one task on the reference UAV and channel.
///
/// Returns `(cpu_speed_gcps, downlink_power_w, downlink_rate_bps, energy_j)`,
/// or `None` when no speed meets the deadline.
#[pyfunction]
#[pyo3(signature = (input_bits, output_bits, cycles_gc, qos_bps, distance_m, scenario=None))]
fn solve_service(
    input_bits: f64,
    output_bits: f64,
    cycles_gc: f64,
    qos_bps: f64,
    distance_m: f64,
    scenario: Option<&PyScenario>,
) -> Option<(f64, f64, f64, f64)> {
    let cfg = scenario.map_or_else(ScenarioConfig::reference, |s| s.inner.clone());
    let uav = &cfg.uav_configs[0];
    let problem = ServiceProblem {
        input_bits,
        output_bits,
        cycles_gc,
        qos_bps,
        slot_length_s: cfg.slot_length_s,
        delivery_distance_m: distance_m,
        alpha: uav.alpha,
        beta: uav.beta,
        cpu_max_gcps: uav.cpu_max_gcps,
        recv_energy_j_per_bit: uav.recv_energy_j_per_bit,
        channel: sim::channel_params(&cfg),
    };
    problem
        .solve()
        .map(|s| (s.cpu_speed_gcps, s.downlink_power_w, s.downlink_rate_bps, s.energy.total_j))
}

/// Max-weight matching of tasks (rows) to UAVs (columns) under channel
/// capacities. Returns `([(task, uav), ...], objective)`.
#[pyfunction]
fn solve_assignment(matrix: Vec<Vec<f64>>, capacities: Vec<u32>) -> PyResult<(Vec<(usize, usize)>, f64)> {
    if matrix.iter().any(|row| row.len() != capacities.len()) {
        return Err(PyValueError::new_err("every row needs one weight per UAV"));
    }
    let m = uavmec::solve_assignment(&matrix, &capacities);
    Ok((m.matches.iter().map(|x| (x.task, x.uav)).collect(), m.objective))
}

#[pymodule]
pub fn uavmec_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenario>()?;
    m.add_class::<PyRunResult>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(size_theta, m)?)?;
    m.add_function(wrap_pyfunction!(uplink_rate, m)?)?;
    m.add_function(wrap_pyfunction!(downlink_rate, m)?)?;
    m.add_function(wrap_pyfunction!(min_downlink_power, m)?)?;
    m.add_function(wrap_pyfunction!(solve_service, m)?)?;
    m.add_function(wrap_pyfunction!(solve_assignment, m)?)?;
    Ok(())
}

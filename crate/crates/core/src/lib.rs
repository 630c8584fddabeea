//! Joint UAV deployment and task allocation for vehicular edge computing.
//!
//! UAVs with limited channels, CPUs and harvested energy serve computation
//! tasks from moving vehicles. Each slot the controller places the UAVs,
//! solves a per-task energy problem, and picks services by a Lyapunov
//! drift-minus-reward rule that keeps every battery near its target.

// Negated comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assignment;
pub mod config;
pub mod deployment;
pub mod energy;
pub mod error;
pub mod export;
pub mod lyapunov;
pub mod mobility;
pub mod model;
pub mod radio;
pub mod sim;

pub use assignment::{assign, solve_assignment, ChannelLedger, Matching};
pub use config::{DensityModel, PlannerMode, ScenarioConfig, UavConfig, Violation};
pub use deployment::{centroid_target, plan_trajectory, DensityGrid, DeploymentPlan};
pub use energy::{solve_p3, EnergyBreakdown, ServiceProblem, ServiceSolution};
pub use error::{Error, Result};
pub use lyapunov::{battery_step, size_theta, BatteryQueue};
pub use model::{Interval, Position, RectRegion, ServicePlan, SlotIndex, TaskRequest, Velocity};
pub use radio::ChannelParams;
pub use sim::{run, Algorithm, RunSummary, SlotMetrics};

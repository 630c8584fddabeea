//! Comma-separated exports with fixed 9-significant-digit numbers.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::deployment::DeploymentPlan;
use crate::error::Result;
use crate::sim::RunSummary;

/// Formats like C's `%.9g`: 9 significant digits, trailing zeros dropped,
/// scientific notation outside `[1e-4, 1e9)`.
pub fn fmt_g9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    // Rounding to 9 digits may bump the exponent, so read it back.
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

pub fn run_id(summary: &RunSummary) -> String {
    format!("{}-s{}", summary.algorithm, summary.seed)
}

pub fn metrics_header(n_uav: usize) -> String {
    let mut cols: Vec<String> = ["run_id", "algorithm", "seed", "slot", "remuneration_cum", "utility_cum"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    cols.extend((0..n_uav).map(|i| format!("battery_j_{i}")));
    cols.extend((0..n_uav).map(|i| format!("free_channels_{i}")));
    cols.push("tasks_served_cum".into());
    cols.join(",")
}

/// One header line plus one line per slot.
pub fn metrics_csv(summary: &RunSummary) -> String {
    let n_uav = summary.config.uav_configs.len();
    let id = run_id(summary);
    let mut out = metrics_header(n_uav);
    out.push('\n');
    let (mut rem, mut util, mut served) = (0.0, 0.0, 0usize);
    for m in &summary.slots {
        rem += m.remuneration;
        util += m.utility;
        served += m.tasks_served;
        let mut cols = vec![
            id.clone(),
            summary.algorithm.to_string(),
            summary.seed.to_string(),
            m.slot.to_string(),
            fmt_g9(rem),
            fmt_g9(util),
        ];
        cols.extend(m.battery_j.iter().map(|&b| fmt_g9(b)));
        cols.extend(m.free_channels.iter().map(|c| c.to_string()));
        cols.push(served.to_string());
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    out
}

pub fn export_metrics(summary: &RunSummary, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, metrics_csv(summary))?;
    Ok(())
}

pub fn plan_csv(plan: &DeploymentPlan) -> String {
    let mut out = String::from("slot,uav_id,x,y\n");
    for (t, row) in plan.positions.iter().enumerate() {
        for (u, p) in row.iter().enumerate() {
            out.push_str(&format!("{t},{u},{},{}\n", fmt_g9(p.x), fmt_g9(p.y)));
        }
    }
    out
}

pub fn export_plan(plan: &DeploymentPlan, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, plan_csv(plan))?;
    Ok(())
}

/// One row of a sweep or comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub algorithm: String,
    pub control_v: f64,
    pub vehicles: usize,
    pub seeds: usize,
    pub time_average_utility: f64,
    pub remuneration: f64,
    pub tasks_served: f64,
}

pub const SUMMARY_HEADER: &str = "algorithm,control_v,vehicles,seeds,time_average_utility,remuneration,tasks_served";

pub fn write_summary(rows: &[SummaryRow], mut w: impl Write) -> Result<()> {
    writeln!(w, "{SUMMARY_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.algorithm,
            fmt_g9(r.control_v),
            r.vehicles,
            r.seeds,
            fmt_g9(r.time_average_utility),
            fmt_g9(r.remuneration),
            fmt_g9(r.tasks_served)
        )?;
    }
    Ok(())
}

/// Averages a batch of runs that share one configuration.
pub fn averaged_row(runs: &[RunSummary]) -> SummaryRow {
    let n = runs.len().max(1) as f64;
    let first = &runs[0];
    SummaryRow {
        algorithm: first.algorithm.to_string(),
        control_v: first.config.control_v,
        vehicles: first.config.vehicle_count,
        seeds: runs.len(),
        time_average_utility: runs.iter().map(|r| r.time_average_utility()).sum::<f64>() / n,
        remuneration: runs.iter().map(|r| r.total_remuneration()).sum::<f64>() / n,
        tasks_served: runs.iter().map(|r| r.tasks_served() as f64).sum::<f64>() / n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g9_matches_printf() {
        assert_eq!(fmt_g9(0.0), "0");
        assert_eq!(fmt_g9(1.0), "1");
        assert_eq!(fmt_g9(-2.5), "-2.5");
        assert_eq!(fmt_g9(1.0 / 3.0), "0.333333333");
        assert_eq!(fmt_g9(123456789.0), "123456789");
        assert_eq!(fmt_g9(1234567890.0), "1.23456789e+09");
        assert_eq!(fmt_g9(0.0001), "0.0001");
        assert_eq!(fmt_g9(0.00001234), "1.234e-05");
        assert_eq!(fmt_g9(999999999.6), "1e+09");
        assert_eq!(fmt_g9(2.0 / 3.0 * 100.0), "66.6666667");
    }

    #[test]
    fn header_lists_per_uav_columns() {
        assert_eq!(
            metrics_header(2),
            "run_id,algorithm,seed,slot,remuneration_cum,utility_cum,battery_j_0,battery_j_1,free_channels_0,free_channels_1,tasks_served_cum"
        );
    }
}

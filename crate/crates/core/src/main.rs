use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use uavmec::export::{self, SummaryRow};
use uavmec::sim::{self, Algorithm, RunSummary};
use uavmec::{Error, Result, ScenarioConfig};

#[derive(Parser)]
#[command(name = "uavmec", version, about = "UAV edge-computing deployment and task allocation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML); the built-in reference scenario when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the scenario horizon.
    #[arg(long)]
    slots: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one run and write DIR/metrics.csv and DIR/plan.csv.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "joaodr")]
        algo: Algorithm,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time-average utility against the control parameter V.
    SweepV {
        #[command(flatten)]
        common: Common,
        /// Comma-separated V values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Comma-separated vehicle counts; the scenario count when omitted.
        #[arg(long, value_delimiter = ',')]
        users: Vec<usize>,
        /// Number of consecutive seeds averaged per row.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[arg(long, default_value = "joaodr")]
        algo: Algorithm,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Averaged totals for several algorithms on the same workloads.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "joaodr,greedy,fixed-deploy")]
        algos: Vec<Algorithm>,
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Deployment trajectory only, as slot,uav_id,x,y.
    Plan {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "joaodr")]
        algo: Algorithm,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn scenario(common: &Common) -> Result<ScenarioConfig> {
    let mut cfg = match &common.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::reference(),
    };
    if let Some(seed) = common.seed {
        cfg.rng_seed = seed;
    }
    if let Some(slots) = common.slots {
        cfg.num_slots = slots;
    }
    cfg.validated()
}

fn batch(cfg: &ScenarioConfig, algo: Algorithm, seeds: u64) -> Result<Vec<RunSummary>> {
    (0..seeds.max(1))
        .map(|k| {
            let mut c = cfg.clone();
            c.rng_seed = cfg.rng_seed + k;
            sim::run(&c, algo)
        })
        .collect()
}

fn emit(text: &[u8], out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().lock().write_all(text)?,
    }
    Ok(())
}

fn summary_bytes(rows: &[SummaryRow]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    export::write_summary(rows, &mut buf)?;
    Ok(buf)
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { common, algo, out } => {
            let cfg = scenario(&common)?;
            let summary = sim::run(&cfg, algo)?;
            fs::create_dir_all(&out)?;
            export::export_metrics(&summary, out.join("metrics.csv"))?;
            export::export_plan(&sim::deployment_plan(&cfg, algo, cfg.rng_seed), out.join("plan.csv"))
        }
        Command::SweepV { common, values, users, seeds, algo, out } => {
            let base = scenario(&common)?;
            let users = if users.is_empty() { vec![base.vehicle_count] } else { users };
            let mut rows = Vec::new();
            for &n in &users {
                for &v in &values {
                    let mut cfg = base.clone();
                    cfg.vehicle_count = n;
                    cfg.control_v = v;
                    let cfg = cfg.validated()?;
                    rows.push(export::averaged_row(&batch(&cfg, algo, seeds)?));
                }
            }
            emit(&summary_bytes(&rows)?, out.as_ref())
        }
        Command::Compare { common, algos, seeds, out } => {
            let cfg = scenario(&common)?;
            let rows = algos
                .iter()
                .map(|&a| batch(&cfg, a, seeds).map(|runs| export::averaged_row(&runs)))
                .collect::<Result<Vec<_>>>()?;
            emit(&summary_bytes(&rows)?, out.as_ref())
        }
        Command::Plan { common, algo, out } => {
            let cfg = scenario(&common)?;
            let plan = sim::deployment_plan(&cfg, algo, cfg.rng_seed);
            emit(export::plan_csv(&plan).as_bytes(), out.as_ref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidConfig(_) | Error::Parse(_) | Error::Domain(_) => ExitCode::from(1),
                Error::Invariant { .. } | Error::Contract(_) | Error::Io(_) => ExitCode::from(2),
            }
        }
    }
}

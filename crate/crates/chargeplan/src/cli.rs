//! Command-line interface: argument parsing, verb dispatch, and the
//! error-to-exit-code mapping. Verbs are independent so each stage can be
//! exercised on its own.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::pipeline::{self, SiteSource};
use crate::queueing::{self, ChargerType, CostParams, SizingPolicy};
use crate::{fixture, io};

#[derive(Debug, Parser)]
#[command(
    name = "chargeplan",
    version,
    about = "Plan, size, and stage EV charging stations from gridded demand data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the configuration and input files without planning anything.
    Validate(ConfigArgs),
    /// Execute the full pipeline and write the plan artifacts.
    Run(RunArgs),
    /// Size a single station for a given arrival rate.
    Queue(QueueArgs),
    /// Run demand coverage selection alone and print the chosen sites.
    Mclp(MclpArgs),
    /// Recompute coverage and equity metrics for an existing plan.
    Report(ReportArgs),
    /// Generate the synthetic demo dataset.
    Fixture(FixtureArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Configuration file (JSON).
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Override one configuration value, e.g. --set mclp.radius_m=4000.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Shorthand for --set seed=INT.
    #[arg(long, value_name = "INT")]
    pub seed: Option<u64>,
}

impl ConfigArgs {
    fn overrides(&self) -> Result<Vec<(String, String)>> {
        let mut pairs = parse_overrides(&self.set)?;
        if let Some(seed) = self.seed {
            pairs.push(("seed".into(), seed.to_string()));
        }
        Ok(pairs)
    }

    fn load(&self) -> Result<PipelineConfig> {
        PipelineConfig::load(&self.config, &self.overrides()?)
    }
}

fn parse_overrides(set: &[String]) -> Result<Vec<(String, String)>> {
    set.iter()
        .map(|entry| {
            entry
                .split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| {
                    Error::InvalidParameter(format!("--set {entry}: expected KEY=VALUE"))
                })
        })
        .collect()
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Output directory for the plan artifacts.
    #[arg(long, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// Also write per-stage intermediate tables.
    #[arg(long)]
    pub debug: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChargerKind {
    Dcfc,
    L2,
}

impl From<ChargerKind> for ChargerType {
    fn from(kind: ChargerKind) -> ChargerType {
        match kind {
            ChargerKind::Dcfc => ChargerType::Dcfc,
            ChargerKind::L2 => ChargerType::L2,
        }
    }
}

#[derive(Debug, Args)]
pub struct QueueArgs {
    /// Optional configuration file for costs and sizing policy.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override one configuration value.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Design-hour arrival rate, vehicles per hour.
    #[arg(long, value_name = "VPH")]
    pub lambda: f64,
    /// Fraction of time ports are unavailable, in [0, 1).
    #[arg(long, value_name = "FRACTION", default_value_t = 0.0)]
    pub outage: f64,
    /// Charger type to size.
    #[arg(long, value_enum, default_value = "dcfc")]
    pub charger: ChargerKind,
    /// Value of one vehicle-hour of waiting, for the cost objective.
    #[arg(long, value_name = "PER_HOUR", default_value_t = 30.0)]
    pub wage: f64,
}

#[derive(Debug, Args)]
pub struct MclpArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Optional directory for selection.csv; stdout only when omitted.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Directory holding plan.geojson; report.json is written beside it.
    #[arg(long, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FixtureArgs {
    /// Directory to write the dataset and its config into.
    #[arg(long, value_name = "DIR", default_value = "fixture")]
    pub out: PathBuf,
    /// Generator seed.
    #[arg(long, value_name = "INT", default_value_t = 42)]
    pub seed: u64,
}

/// Run a parsed command, printing human output to stdout and errors to
/// stderr. Returns the process exit code.
pub fn dispatch(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Validate(args) => cmd_validate(args),
        Command::Run(args) => cmd_run(args),
        Command::Queue(args) => cmd_queue(args),
        Command::Mclp(args) => cmd_mclp(args),
        Command::Report(args) => cmd_report(args),
        Command::Fixture(args) => cmd_fixture(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn cmd_validate(args: ConfigArgs) -> Result<i32> {
    let config = args.load()?;
    config.validate()?;
    let inputs = match pipeline::load_inputs(&config) {
        Ok(inputs) => inputs,
        // A file that cannot be parsed is itself a fatal finding.
        Err(e @ (Error::Csv { .. } | Error::Format { .. } | Error::UnknownPoiClass(_))) => {
            println!("fatal: {e}");
            println!("1 fatal, 0 warning(s)");
            return Ok(2);
        }
        Err(e) => return Err(e),
    };
    let report = pipeline::validate_inputs(&config, &inputs);
    println!("{report}");
    Ok(if report.has_fatal() { 2 } else { 0 })
}

fn cmd_run(args: RunArgs) -> Result<i32> {
    let config = args.config.load()?;
    let plan = pipeline::run(&config, &args.out, args.debug)?;
    let selected = plan
        .sites
        .iter()
        .filter(|s| s.source == SiteSource::Selected)
        .count();
    let repair = plan.sites.len() - selected;
    let capital: f64 = plan.yearly_capital.iter().sum();
    println!(
        "{} sites ({selected} selected, {repair} repair), coverage {:.1}% of {:.1} demand",
        plan.sites.len(),
        100.0 * plan.coverage_fraction,
        plan.total_demand
    );
    println!(
        "capital {capital:.2} across {} years, max assignment distance {:.0} m",
        config.forecast.years, plan.reachability.max_distance_m
    );
    println!("wrote {}", args.out.display());
    Ok(0)
}

fn cmd_queue(args: QueueArgs) -> Result<i32> {
    let overrides = parse_overrides(&args.set)?;
    let config = match &args.config {
        Some(path) => PipelineConfig::load(path, &overrides)?,
        None => PipelineConfig::from_overrides(&overrides)?,
    };
    let charger: ChargerType = args.charger.into();
    let q = &config.queueing;
    let costs = &q.costs;
    let (unit, install) = match charger {
        ChargerType::Dcfc => (costs.dcfc_unit, costs.dcfc_install),
        ChargerType::L2 => (costs.l2_unit, costs.l2_install),
    };
    let cost = CostParams {
        charger_type: charger,
        service_rate: match charger {
            ChargerType::Dcfc => q.mu_dcfc,
            ChargerType::L2 => q.mu_l2,
        },
        c_port: unit,
        c_install: install * q.area_multipliers.multiplier(q.area_class),
        c_salary: args.wage,
    };
    let policy = SizingPolicy {
        utilisation_cap: q.utilisation_cap,
        waiting_spaces: q.waiting_spaces,
        min_ports: q.min_ports,
        max_ports: q.max_ports,
    };
    let plan = queueing::optimize_ports(
        0,
        args.lambda,
        args.outage,
        &cost,
        &policy,
        q.effective_ports,
    )?;
    let doc = json!({
        "charger_type": plan.charger_type.as_str(),
        "ports": plan.c,
        "c_eff": plan.metrics.c_eff,
        "rho_eff": plan.metrics.rho_eff,
        "p0": plan.metrics.p0,
        "lq": plan.metrics.lq,
        "wq_hours": plan.metrics.wq,
        "block_probability": plan.metrics.pi_block,
        "c_station": plan.c_station,
        "c_waiting": plan.c_waiting,
        "objective": plan.objective,
    });
    println!("{}", io::json_to_string_sorted(&doc).trim_end());
    Ok(0)
}

fn cmd_mclp(args: MclpArgs) -> Result<i32> {
    let config = args.config.load()?;
    let output = pipeline::run_selection(&config)?;
    let csv = io::selection_csv(&output.selection);
    if let Some(dir) = &args.out {
        io::write_text(&dir.join("selection.csv"), &csv)?;
        println!("wrote {}", dir.join("selection.csv").display());
    } else {
        print!("{csv}");
    }
    println!(
        "covered {:.1}% of {:.1} demand with {} sites",
        100.0 * output.coverage_fraction,
        output.total_demand,
        output.selection.len()
    );
    Ok(0)
}

fn cmd_report(args: ReportArgs) -> Result<i32> {
    let config = args.config.load()?;
    let sites = io::read_site_locations(&args.out.join("plan.geojson"))?;
    let output = pipeline::recompute_reports(&config, &sites)?;
    let coverage: Vec<_> = output
        .coverage
        .iter()
        .map(|c| {
            json!({
                "radius_m": c.radius_m,
                "tile_coverage": c.tile_coverage,
                "area_coverage": c.area_coverage,
            })
        })
        .collect();
    let doc = json!({
        "coverage": coverage,
        "equity": {
            "low_income_mean_m": output.equity.low_income_mean_m,
            "mid_income_mean_m": output.equity.mid_income_mean_m,
            "high_income_mean_m": output.equity.high_income_mean_m,
            "gap_m": output.equity.gap_m,
        },
        "sites": output.sites,
    });
    let text = io::json_to_string_sorted(&doc);
    io::write_text(&args.out.join("report.json"), &text)?;
    print!("{text}");
    Ok(0)
}

fn cmd_fixture(args: FixtureArgs) -> Result<i32> {
    let data = fixture::generate(args.seed)?;
    let config_path = fixture::write(&data, &args.out)?;
    println!("wrote {}", config_path.display());
    Ok(0)
}

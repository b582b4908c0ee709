//! Command-line front end: build topologies, print convergence curves, run
//! simulations and regenerate every experiment table.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fleetgan::config::{load_config, ScenarioConfig};
use fleetgan::experiment::{
    chart_from_csv, curve_csv, experiment_fig3, experiment_fig4, experiment_jsd, experiment_overhead, experiment_rate,
    simulate, worker_pool,
};
use fleetgan::protocol::SchemeRegistry;
use fleetgan::scenario::Scenario;
use fleetgan::topology::{write_edges_csv, write_summary_json, TopologySummary};
use fleetgan::Error;
use serde_json::json;

#[derive(Parser)]
#[command(name = "fleetgan", version, about = "Distributed GAN channel modeling for UAV fleets")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario TOML file; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding `seeds.master`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory receiving every output file.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Worker threads for per-node training.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Sharing topology.
    Topology {
        #[command(subcommand)]
        action: TopologyAction,
    },
    /// Closed-form convergence probability.
    Convergence {
        #[command(subcommand)]
        action: ConvergenceAction,
    },
    /// Train the fleet with sample sharing and write all run artifacts.
    Simulate,
    /// Regenerate one experiment table and its chart.
    Experiment {
        #[command(subcommand)]
        which: Experiment,
    },
}

#[derive(Subcommand)]
enum TopologyAction {
    /// Build the ring plus budgeted chords; writes `topology.csv` and `topology_summary.json`.
    Build,
}

#[derive(Subcommand)]
enum ConvergenceAction {
    /// Write `convergence.csv` (`iteration,probability`) for the built topology.
    Curve,
}

#[derive(Subcommand)]
enum Experiment {
    /// Convergence curves for several resource budgets.
    Fig3 {
        #[arg(long, value_delimiter = ',', default_values_t = [5, 10, 15])]
        blocks: Vec<usize>,
    },
    /// Convergence curves for several fleet sizes at a fixed budget.
    Fig4 {
        #[arg(long, value_delimiter = ',', default_values_t = [5, 10, 15])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 15)]
        blocks: usize,
    },
    /// Average JSD per round for each training scheme.
    Jsd {
        #[arg(long, value_delimiter = ',', default_values_t = ["distributed".to_string(), "standalone".to_string(), "centralized".to_string()])]
        schemes: Vec<String>,
    },
    /// Communication load against resource budget.
    Overhead {
        #[arg(long, value_delimiter = ',', default_values_t = [5, 10, 15])]
        blocks: Vec<usize>,
    },
    /// Learned versus genie beam-selection rate for several fleet sizes.
    Rate {
        #[arg(long, value_delimiter = ',', default_values_t = [5])]
        sizes: Vec<usize>,
    },
}

fn load(common: &Common) -> Result<(ScenarioConfig, u64), Error> {
    let config = match &common.config {
        Some(path) => load_config(path)?,
        None => ScenarioConfig::default(),
    };
    let seed = common.seed.unwrap_or(config.seeds.master);
    Ok((config, seed))
}

fn write(dir: &Path, name: &str, text: &str) -> Result<PathBuf, Error> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, text)?;
    Ok(path)
}

fn snapshot(dir: &Path, config: &ScenarioConfig, seed: u64) -> Result<(), Error> {
    let mut c = config.clone();
    c.seeds.master = seed;
    write(dir, "config.snapshot", &c.to_toml_string()?)?;
    Ok(())
}

/// Write `<name>.csv` and its derived `<name>.svg`.
fn table(dir: &Path, name: &str, csv: &str, title: &str, key: Option<&str>, x: &str, y: &str) -> Result<serde_json::Value, Error> {
    let csv_path = write(dir, &format!("{name}.csv"), csv)?;
    let svg_path = write(dir, &format!("{name}.svg"), &chart_from_csv(csv, title, key, x, y)?)?;
    Ok(json!({ "csv": csv_path, "svg": svg_path }))
}

fn run(cli: Cli) -> Result<serde_json::Value, Error> {
    let (config, seed) = load(&cli.common)?;
    let out = cli.common.out_dir.as_path();
    match cli.command {
        Command::Topology { action: TopologyAction::Build } => {
            let graph = Scenario::new(&config, seed)?.topology()?;
            fs::create_dir_all(out)?;
            write_edges_csv(&graph, fs::File::create(out.join("topology.csv"))?)?;
            write_summary_json(&graph, fs::File::create(out.join("topology_summary.json"))?)?;
            Ok(serde_json::to_value(TopologySummary::of(&graph)?)?)
        }
        Command::Convergence { action: ConvergenceAction::Curve } => {
            let graph = Scenario::new(&config, seed)?.topology()?;
            let csv = curve_csv(&config, &graph)?;
            table(out, "convergence", &csv, "Convergence probability", None, "iteration", "probability")
        }
        Command::Simulate => {
            let pool = worker_pool(cli.common.workers)?;
            let s = simulate(&config, seed, out, &pool)?;
            Ok(json!({
                "rounds": s.rounds,
                "final_jsd": s.final_jsd,
                "shared_samples": s.shared_samples,
                "load": s.load,
                "out_dir": out,
            }))
        }
        Command::Experiment { which } => {
            snapshot(out, &config, seed)?;
            let parts = out.join("parts");
            match which {
                Experiment::Fig3 { blocks } => {
                    let csv = experiment_fig3(&config, seed, &blocks)?;
                    table(out, "fig3", &csv, "Convergence vs resource blocks", Some("blocks"), "iteration", "probability")
                }
                Experiment::Fig4 { sizes, blocks } => {
                    let csv = experiment_fig4(&config, seed, &sizes, blocks)?;
                    table(out, "fig4", &csv, "Convergence vs fleet size", Some("fleet_size"), "iteration", "probability")
                }
                Experiment::Jsd { schemes } => {
                    let registry = SchemeRegistry::standard();
                    for s in &schemes {
                        registry.get(s)?;
                    }
                    let names: Vec<&str> = schemes.iter().map(String::as_str).collect();
                    let pool = worker_pool(cli.common.workers)?;
                    let csv = experiment_jsd(&config, seed, &names, &pool, Some(&parts))?;
                    table(out, "jsd", &csv, "Average JSD", Some("scheme"), "round", "jsd")
                }
                Experiment::Overhead { blocks } => {
                    let csv = experiment_overhead(&config, seed, &blocks)?;
                    table(out, "overhead", &csv, "Load until target", None, "blocks", "load_to_target")
                }
                Experiment::Rate { sizes } => {
                    let pool = worker_pool(cli.common.workers)?;
                    let csv = experiment_rate(&config, seed, &sizes, &pool, Some(&parts))?;
                    table(out, "rate", &csv, "Beam-selection rate", None, "fleet_size", "ratio")
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": "Usage", "message": e.to_string().trim() }));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(report) => {
            println!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": e.kind(), "message": e.to_string() }));
            ExitCode::FAILURE
        }
    }
}

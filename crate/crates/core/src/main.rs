use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use coalsim::sim::{run_batch, run_scenario, Method, Preset, ScenarioConfig, ScenarioResult, SCHEMA_VERSION};
use coalsim::{Error, Result};

#[derive(Parser)]
#[command(name = "coalsim", version, about = "UAV coalition formation for wildfire monitoring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a scenario config together with its fire zone and fleet.
    Generate(Common),
    /// Run one scenario and print the coalition table.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = MethodArg::Both)]
        method: MethodArg,
    },
    /// Run both methods over consecutive seeds.
    Batch {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long, default_value_t = 1)]
        parallel: usize,
        /// Also write per-position means as a two-series table.
        #[arg(long)]
        emit_plot_data: bool,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_preset)]
    preset: Option<Preset>,
    /// Overridden by COALSIM_SEED when set.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Distributed,
    Central,
    Both,
}

fn parse_preset(s: &str) -> std::result::Result<Preset, String> {
    Preset::parse(s).ok_or_else(|| format!("unknown preset '{s}' (expected paper-fig3 or paper-fig4)"))
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cmd: Command) -> std::result::Result<(), Failure> {
    match cmd {
        Command::Generate(common) => generate(&common),
        Command::Run { common, method } => run(&common, method),
        Command::Batch { common, runs, parallel, emit_plot_data } => batch(&common, runs, parallel, emit_plot_data),
    }
}

fn env_seed() -> std::result::Result<Option<u64>, Failure> {
    match std::env::var("COALSIM_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Failure::Usage(format!("COALSIM_SEED must be an unsigned integer, got '{v}'"))),
        Err(_) => Ok(None),
    }
}

/// Config from file or preset, with the seed resolved as
/// COALSIM_SEED > --seed > config file > preset default.
fn resolve(common: &Common) -> std::result::Result<ScenarioConfig, Failure> {
    let seed = env_seed()?.or(common.seed);
    let mut cfg = match (&common.config, common.preset) {
        (Some(path), _) => ScenarioConfig::load(path)?,
        (None, Some(p)) => ScenarioConfig::preset(p),
        (None, None) => match seed {
            Some(_) => ScenarioConfig::default(),
            None => return Err(Failure::Usage("--seed is required without --preset or --config".into())),
        },
    };
    if let Some(s) = seed {
        cfg.rng_seed = s;
    }
    cfg.validate()?;
    for w in cfg.warnings() {
        eprintln!("warning: {w}");
    }
    Ok(cfg)
}

fn write(dir: &Path, name: &str, body: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, body).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let mut body = serde_json::to_string_pretty(value)?;
    body.push('\n');
    write(dir, name, &body)
}

fn generate(common: &Common) -> std::result::Result<(), Failure> {
    let cfg = resolve(common)?;
    let zone = coalsim::geometry::generate_fire_zone(cfg.field_side, cfg.rng_seed, cfg.zone_complexity)?;
    let fleet = coalsim::sim::generate_fleet(&cfg);
    for p in [
        write_json(&common.out, "config.json", &cfg)?,
        write_json(&common.out, "zone.json", &json!({ "schema_version": SCHEMA_VERSION, "zone": zone }))?,
        write_json(&common.out, "fleet.json", &json!({ "schema_version": SCHEMA_VERSION, "fleet": fleet }))?,
    ] {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn run(common: &Common, method: MethodArg) -> std::result::Result<(), Failure> {
    let cfg = resolve(common)?;
    let methods: &[Method] = match method {
        MethodArg::Distributed => &[Method::Distributed],
        MethodArg::Central => &[Method::Central],
        MethodArg::Both => &Method::ALL,
    };
    let mut results = Vec::new();
    for &m in methods {
        let res = run_scenario(&cfg, m)?;
        write_json(&common.out, &format!("result_{m}.json"), &res)?;
        write(&common.out, &format!("events_{m}.jsonl"), &res.events_jsonl())?;
        print_table(&res);
        results.push(res);
    }
    if let [d, c] = results.as_slice() {
        println!(
            "comparison: distributed value {} / {:.1} m, central value {} / {:.1} m",
            d.total_value, d.mean_distance_m, c.total_value, c.mean_distance_m
        );
    }
    Ok(())
}

fn print_table(res: &ScenarioResult) {
    println!("method {} seed {} rounds {}", res.method, res.seed, res.negotiation_rounds);
    println!("{:>9} {:>6} {:>6} {:>6} {:>12} {:>14}", "coalition", "leader", "member", "sector", "distance_m", "value");
    for (c, co) in res.coalitions.iter().enumerate() {
        for (id, sector) in &co.sector_map {
            let d = res
                .members
                .iter()
                .rev()
                .find(|m| m.uav_id == *id && m.coalition == c)
                .map_or(0.0, |m| m.distance_m);
            println!("{c:>9} {:>6} {id:>6} {sector:>6} {d:>12.1} {:>14}", co.leader_id, res.values[c]);
        }
        if co.sector_map.is_empty() {
            println!("{c:>9} {:>6} {:>6} {:>6} {:>12} {:>14}", co.leader_id, "-", "-", "-", res.values[c]);
        }
    }
}

fn batch(common: &Common, runs: Option<usize>, parallel: usize, plot: bool) -> std::result::Result<(), Failure> {
    if parallel == 0 {
        return Err(Failure::Usage("--parallel must be at least 1".into()));
    }
    let mut cfg = resolve(common)?;
    if let Some(r) = runs {
        cfg.runs = r;
    }
    cfg.validate()?;
    let result = run_batch(&cfg, cfg.runs, parallel)?;
    write(&common.out, "batch.csv", &result.to_csv())?;
    write_json(&common.out, "summary.json", &result.metrics)?;
    if plot {
        write(&common.out, "plot_data.csv", &result.plot_data())?;
    }
    let m = &result.metrics;
    println!("runs {} base seed {}", m.runs, m.base_seed);
    println!("{:>8} {:>15} {:>12}", "position", "distributed_m", "central_m");
    for p in &m.positions {
        let f = |v: Option<f64>| v.map_or("-".to_string(), |d| format!("{d:.1}"));
        println!("{:>8} {:>15} {:>12}", p.position, f(p.distributed_mean_m), f(p.central_mean_m));
    }
    println!(
        "mean distance: distributed {:.1} m, central {:.1} m, relative gap {:.4}",
        m.mean_distance_distributed_m, m.mean_distance_central_m, m.relative_gap
    );
    Ok(())
}

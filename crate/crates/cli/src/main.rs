use std::path::{Path, PathBuf};
use std::process::ExitCode;

use asv_planner::io::{format_map, load_map};
use asv_planner::pipeline::{
    archipelago, emit_artifacts, run_benchmark, run_pipeline, ArchipelagoParams, BenchSpec, Method, PlannerConfig,
    Pose, RunStatus,
};
use asv_planner::Error;
use clap::{Parser, Subcommand, ValueEnum};

const EXIT_PLANNER: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(name = "asv-plan", version, about = "Trajectory planning for autonomous surface vehicles")]
struct Cli {
    /// Seed for generated maps (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Voronoi,
    Uniform,
}

#[derive(Subcommand)]
enum Command {
    /// Plan one trajectory and write its artifacts.
    Plan {
        #[arg(long)]
        map: PathBuf,
        /// Start pose `X,Y,PSI` (m, m, rad).
        #[arg(long, value_parser = parse_pose, allow_hyphen_values = true)]
        start: Pose,
        /// Goal pose `X,Y,PSI`.
        #[arg(long, value_parser = parse_pose, allow_hyphen_values = true)]
        goal: Pose,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        /// Roadmap spacing in metres.
        #[arg(long)]
        delta_d: Option<f64>,
        /// Planner configuration (TOML).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the cases of a benchmark file and write a comparison table.
    Bench {
        #[arg(long)]
        map: PathBuf,
        /// Benchmark file (TOML) with start, goal and cases.
        #[arg(long)]
        configs: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the seeded synthetic archipelago map.
    Archipelago {
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_pose(s: &str) -> Result<Pose, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [x, y, psi] if parts.iter().all(|v| v.is_finite()) => Ok(Pose::new(x, y, psi)),
        _ => Err(format!("expected X,Y,PSI with finite numbers, got `{s}`")),
    }
}

fn exit_for(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_input_error() { EXIT_INPUT } else { EXIT_PLANNER })
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
    }
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

#[allow(clippy::too_many_arguments)]
fn plan(
    map: &Path,
    start: Pose,
    goal: Pose,
    method: Option<MethodArg>,
    delta_d: Option<f64>,
    config: Option<&Path>,
    seed: Option<u64>,
    out: &Path,
) -> Result<ExitCode, Error> {
    let mut cfg = match config {
        Some(p) => PlannerConfig::load(p)?,
        None => PlannerConfig::default(),
    };
    if let Some(m) = method {
        cfg.method = match m {
            MethodArg::Voronoi => Method::Voronoi,
            MethodArg::Uniform => Method::Uniform,
        };
    }
    if let Some(d) = delta_d {
        cfg.delta_d = d;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    let map = load_map(map)?;
    let result = run_pipeline(&map, start, goal, &cfg)?;
    let files = emit_artifacts(&result, &map, out)?;
    let r = &result.report;
    println!(
        "{:?}: cost {:.6e} J, {} nodes, step times {:.3}/{:.3}/{:.3} s, {} solver iterations",
        r.status, r.objective, r.node_count, r.times.step1, r.times.step2, r.times.step3, r.iterations
    );
    println!("wrote {}", files.report_json.parent().unwrap_or(out).display());
    Ok(match r.status {
        RunStatus::Converged => ExitCode::SUCCESS,
        RunStatus::BestEffort => ExitCode::from(EXIT_PLANNER),
    })
}

fn bench(map: &Path, configs: &Path, seed: Option<u64>, out: &Path) -> Result<ExitCode, Error> {
    let mut spec = BenchSpec::load(configs)?;
    if let Some(s) = seed {
        for case in &mut spec.cases {
            case.config.seed = s;
        }
    }
    let map = load_map(map)?;
    let table = run_benchmark(&map, spec.start, spec.goal, &spec.cases, Some(out))?;
    let md = table.to_markdown();
    write_text(&out.join("table.md"), &md)?;
    let json = serde_json::to_string_pretty(&table).expect("table fields are finite");
    write_text(&out.join("table.json"), &(json + "\n"))?;
    print!("{md}");
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_INPUT) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Plan {
            map,
            start,
            goal,
            method,
            delta_d,
            config,
            out,
        } => plan(&map, start, goal, method, delta_d, config.as_deref(), cli.seed, &out),
        Command::Bench { map, configs, out } => bench(&map, &configs, cli.seed, &out),
        Command::Archipelago { out } => archipelago(cli.seed.unwrap_or(1), &ArchipelagoParams::default())
            .and_then(|s| {
                let header = format!(
                    "# synthetic archipelago, seed {}\n# start {} {} {}\n# goal {} {} {}\n",
                    cli.seed.unwrap_or(1),
                    s.start.x,
                    s.start.y,
                    s.start.psi,
                    s.goal.x,
                    s.goal.y,
                    s.goal.psi
                );
                write_text(&out, &(header + &format_map(&s.map)))
            })
            .map(|_| ExitCode::SUCCESS),
    };
    result.unwrap_or_else(|e| exit_for(&e))
}

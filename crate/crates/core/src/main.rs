use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use posesync::harness::{
    rows_from_reports, run_experiment, run_sweep, summarize, trial_graph, write_rows_to_path, ExperimentConfig,
    Format, Method, SweepSpec,
};
use posesync::{icm_synchronize, ConsistencyConfig, Error, NodeModel, PoseGraph, Result};

#[derive(Parser)]
#[command(name = "posesync", version, about = "Multi-agent SE(2) pose synchronization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the trials of one experiment configuration.
    Run(RunArgs),
    /// Run every cell of a sweep specification.
    Sweep(RunArgs),
    /// Print the simulated graph of one trial as JSON.
    GenScene {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 0)]
        trial: usize,
    },
    /// Synchronize a graph read from JSON and print the estimates.
    Sync {
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = ModelArg::StudentT)]
        model: ModelArg,
        #[arg(long)]
        no_reweight: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated method names.
    #[arg(long)]
    method: Option<String>,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    StudentT,
    Gaussian,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn apply_overrides(cfg: &mut ExperimentConfig, args: &RunArgs) -> Result<()> {
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(m) = &args.method {
        cfg.methods = Method::parse_list(m)?;
    }
    Ok(())
}

fn output_path(args: &RunArgs) -> Result<PathBuf> {
    fs::create_dir_all(&args.out).map_err(|source| Error::Io {
        path: args.out.clone(),
        source,
    })?;
    Ok(args.out.join(format!("results.{}", Format::from(args.format).extension())))
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::from_json(&read(p)?)?,
        None => ExperimentConfig::default(),
    };
    apply_overrides(&mut cfg, &args)?;
    let reports = run_experiment(&cfg)?;
    let path = output_path(&args)?;
    write_rows_to_path(&rows_from_reports(&reports), &path, args.format.into())?;
    let summary: serde_json::Map<_, _> = summarize(&reports)
        .into_iter()
        .map(|(m, s)| (m.name().to_string(), json!(s)))
        .collect();
    println!("{}", json!({ "output": path, "summary": summary }));
    Ok(())
}

fn cmd_sweep(args: RunArgs) -> Result<()> {
    let config = args
        .config
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("sweep needs --config".into()))?;
    let mut spec = SweepSpec::from_json(&read(config)?)?;
    apply_overrides(&mut spec.base, &args)?;
    let outcome = run_sweep(&spec)?;
    let path = output_path(&args)?;
    write_rows_to_path(&outcome.rows(), &path, args.format.into())?;
    println!("{}", json!({ "output": path, "failures": outcome.failures }));
    Ok(())
}

fn cmd_gen_scene(config: Option<PathBuf>, seed: Option<u64>, trial: usize) -> Result<()> {
    let mut cfg = match &config {
        Some(p) => ExperimentConfig::from_json(&read(p)?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    println!("{}", trial_graph(&cfg, 0, trial)?.to_json()?);
    Ok(())
}

fn cmd_sync(path: &Path, model: ModelArg, no_reweight: bool) -> Result<()> {
    let graph = PoseGraph::from_json(&read(path)?)?;
    let cfg = ConsistencyConfig {
        node_model: match model {
            ModelArg::StudentT => NodeModel::StudentT,
            ModelArg::Gaussian => NodeModel::Gaussian,
        },
        reweighting: !no_reweight,
        ..Default::default()
    };
    let out = icm_synchronize(&graph, &cfg)?;
    let poses: Vec<_> = out
        .poses
        .iter()
        .map(|(id, p)| json!({ "id": id, "pose": [p.x, p.y, p.theta_degrees()] }))
        .collect();
    let weights: Vec<_> = out
        .weights
        .iter()
        .map(|((from, to), w)| json!({ "from": from, "to": to, "weight": w }))
        .collect();
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "poses": poses,
            "weights": weights,
            "clamp_events": out.clamp_events,
        }))?
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::GenScene { config, seed, trial } => cmd_gen_scene(config, seed, trial),
        Command::Sync {
            graph,
            model,
            no_reweight,
        } => cmd_sync(&graph, model, no_reweight),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", json!({ "error": { "kind": e.kind(), "message": e.to_string() } }));
            ExitCode::FAILURE
        }
    }
}

use clap::{Args, Parser, Subcommand};
use relief_cli::{CliError, CommandOutcome, DEFAULT_THRESHOLDS, EXIT_INPUT, EXIT_OK};
use relief_core::eval::{SceneKind, SceneSpec};
use std::path::PathBuf;
use std::process::ExitCode;

/// Plan, terrain-refine and evaluate multi-drone survey missions.
#[derive(Debug, Parser)]
#[command(name = "relief", version)]
struct Cli {
    /// Worker threads (defaults to available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Configuration file.
    #[arg(long, global = true, env = "MISSION_CONFIG")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fixed-altitude lawnmower paths over the configured roi.
    Plan {
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Terrain-follow, densify and annotate a path file against a point cloud.
    Refine {
        /// Path or mission JSON.
        #[arg(long)]
        paths: PathBuf,
        /// Prior model of the site (.ply, .xyz).
        #[arg(long)]
        cloud: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Precision, recall and F1 of a reconstructed cloud against ground truth.
    Eval {
        #[arg(long)]
        reconstructed: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        /// Distance thresholds in metres.
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_THRESHOLDS)]
        thresholds: Vec<f64>,
        /// Row label in the printed table.
        #[arg(long, default_value = "reconstruction")]
        label: String,
        /// JSON report destination; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate a synthetic point cloud as PLY.
    Scene(SceneArgs),
    /// Configuration utilities.
    Config {
        #[command(subcommand)]
        action: ConfigAction,
    },
}

#[derive(Debug, Subcommand)]
enum ConfigAction {
    /// Print the effective configuration with defaults filled in.
    Show,
}

#[derive(Debug, Args)]
struct SceneArgs {
    /// plane, ramp, box-on-plane, pile or staircase.
    #[arg(long)]
    kind: String,
    #[arg(long, default_value_t = 60.0)]
    width: f64,
    #[arg(long, default_value_t = 60.0)]
    depth: f64,
    #[arg(long, default_value_t = 10.0)]
    height: f64,
    /// Points per square metre.
    #[arg(long, default_value_t = 4.0)]
    density: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// In-surface jitter as a fraction of the sampling cell.
    #[arg(long, default_value_t = 0.0)]
    jitter: f64,
    #[arg(long, default_value_t = 4)]
    steps: usize,
    /// Write ASCII instead of binary PLY.
    #[arg(long)]
    ascii: bool,
    #[arg(short, long)]
    output: PathBuf,
}

fn require_config(cfg: Option<PathBuf>) -> Result<PathBuf, CliError> {
    cfg.ok_or_else(|| CliError::Input("no configuration: pass --config or set MISSION_CONFIG".into()))
}

fn run(cli: Cli) -> Result<CommandOutcome, CliError> {
    match cli.command {
        Command::Plan { output } => relief_cli::cmd_plan(&require_config(cli.config)?, &output),
        Command::Refine { paths, cloud, output } => {
            relief_cli::cmd_refine(&paths, &cloud, &require_config(cli.config)?, &output)
        }
        Command::Eval { reconstructed, truth, thresholds, label, output } => {
            let (outcome, json) = relief_cli::cmd_eval(&reconstructed, &truth, &thresholds, &label, output.as_deref())?;
            if let Some(json) = json {
                print!("{json}");
            }
            Ok(outcome)
        }
        Command::Scene(a) => {
            let kind: SceneKind = a.kind.parse().map_err(|e: relief_core::EvalError| CliError::Input(e.to_string()))?;
            let spec = SceneSpec {
                kind,
                width: a.width,
                depth: a.depth,
                height: a.height,
                density: a.density,
                seed: a.seed,
                jitter: a.jitter,
                steps: a.steps,
            };
            relief_cli::cmd_scene(&spec, a.ascii, &a.output)
        }
        Command::Config { action: ConfigAction::Show } => {
            print!("{}", relief_cli::cmd_config_show(&require_config(cli.config)?)?);
            Ok(CommandOutcome::default())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT as u8 } else { EXIT_OK as u8 });
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(EXIT_INPUT as u8);
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return ExitCode::from(EXIT_INPUT as u8);
        }
    };
    match pool.install(|| run(cli)) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            if !outcome.summary.is_empty() {
                eprintln!("{}", outcome.summary.trim_end());
            }
            ExitCode::from(EXIT_OK as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

//! Argument parsing and the exit-code contract: 0 converged, 2 converged with
//! warnings, 1 failed. Every run that gets as far as creating its run directory
//! leaves a `run.json` there, also on failure.

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use crate::commands::*;
use crate::manifest::{RunDir, RunManifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_WARNINGS: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "maxarea", version, about = "Area-maximizing weakly spacelike graphs on planar grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct CommonArgs {
    /// JSON config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Parent directory for the run directory
    #[arg(long, default_value = "runs")]
    out: PathBuf,
    /// Grid size, overriding the config
    #[arg(long)]
    h: Option<f64>,
    /// Only print the run directory and errors
    #[arg(long)]
    quiet: bool,
}

impl From<CommonArgs> for Common {
    fn from(a: CommonArgs) -> Self {
        Common { config: a.config, out: a.out, h: a.h, quiet: a.quiet }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one Dirichlet problem
    Solve(CommonArgs),
    /// Build the entire solution w by exhaustion over punctured balls
    ExampleW {
        #[command(flatten)]
        common: CommonArgs,
        /// Also write the finest field on its whole ball
        #[arg(long)]
        dump_fields: bool,
    },
    /// Solve an exterior problem with cone or hyperplane barriers
    Exterior(CommonArgs),
    /// Classify a field as an entire or exterior solution
    Classify(CommonArgs),
    /// Enumerate light segments of boundary data and check linearity along them
    Singular(CommonArgs),
    /// Rescaled circle samples and model fits
    Blowdown(CommonArgs),
    /// The three solutions vanishing on {0, e2}
    Multiplicity(CommonArgs),
}

/// `MAXAREA_THREADS`, if set to a positive integer.
fn threads() -> Result<Option<usize>> {
    match std::env::var("MAXAREA_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => anyhow::bail!("MAXAREA_THREADS must be a positive integer, got {v:?}"),
        },
        Err(_) => Ok(None),
    }
}

type Runner = Box<dyn FnOnce(&mut Session, &Common) -> Result<()>>;

fn execute(name: &str, common: Common, run: Runner) -> i32 {
    let start = Instant::now();
    let dir = match RunDir::create(&common.out, name) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_FAILED;
        }
    };
    println!("{}", dir.path().display());
    let mut session = Session::new(dir, &common);
    let threads = threads();
    let result = threads.as_ref().map_err(|e| anyhow::anyhow!("{e}")).and_then(|_| run(&mut session, &common));
    let (status, error) = match &result {
        Ok(()) if session.warnings.is_empty() => (EXIT_OK, None),
        Ok(()) => (EXIT_WARNINGS, None),
        Err(e) => {
            eprintln!("error: {e:#}");
            (EXIT_FAILED, Some(format!("{e:#}")))
        }
    };
    let mut metrics = std::mem::take(&mut session.metrics);
    metrics.insert("warnings".into(), serde_json::to_value(&session.warnings).unwrap());
    let manifest = RunManifest {
        command: name.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: std::mem::take(&mut session.config),
        metrics: metrics.into(),
        outputs: session.dir.outputs().to_vec(),
        exit_status: status,
        error,
        threads: threads.ok().flatten(),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    if let Err(e) = session.dir.finish(&manifest) {
        eprintln!("error: writing the manifest: {e:#}");
        return EXIT_FAILED;
    }
    status
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_FAILED } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Solve(c) => execute("solve", c.into(), Box::new(solve_cmd)),
        Command::ExampleW { common, dump_fields } => {
            execute("example-w", common.into(), Box::new(move |s, c| example_w_cmd(s, c, dump_fields)))
        }
        Command::Exterior(c) => execute("exterior", c.into(), Box::new(exterior_cmd)),
        Command::Classify(c) => execute("classify", c.into(), Box::new(classify_cmd)),
        Command::Singular(c) => execute("singular", c.into(), Box::new(singular_cmd)),
        Command::Blowdown(c) => execute("blowdown", c.into(), Box::new(blowdown_cmd)),
        Command::Multiplicity(c) => execute("multiplicity", c.into(), Box::new(multiplicity_cmd)),
    }
}

mod offline;
mod remote;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::Context;
use brickmake_core::brickfile::{load_shape_library, LibraryConfig, ShapeLibrary};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "brickmake", version, about = "Break-and-Make brick assembly simulator")]
struct Cli {
    /// Library configuration (JSON); the built-in core set otherwise.
    #[arg(long, global = true)]
    library: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Records,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one random scene, or a dataset when --count is given.
    Gen(offline::GenArgs),
    /// Cut a model into connected slices of at most --size bricks.
    Slice(offline::SliceArgs),
    /// Compute the symmetry table of every library shape.
    Symtable {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a predicted model against a target.
    Eval { predicted: PathBuf, target: PathBuf },
    /// Plan and validate demonstrations for a dataset or one random scene.
    Demo(offline::DemoArgs),
    /// Re-execute an episode directory and check it reproduces bit for bit.
    Replay { dir: PathBuf },
    /// Shape and colour frequencies over a dataset manifest.
    Stats { manifest: PathBuf },
    /// Run the HTTP session service.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
        /// Dataset directory to expose; repeatable.
        #[arg(long = "dataset")]
        datasets: Vec<PathBuf>,
        #[arg(long, default_value_t = 1800)]
        idle_timeout_secs: u64,
    },
    /// Talk to a running session service.
    Session(remote::SessionArgs),
}

fn library(path: Option<&PathBuf>) -> anyhow::Result<Arc<ShapeLibrary>> {
    let config = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => LibraryConfig::default(),
    };
    Ok(Arc::new(load_shape_library(&config)?))
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let fmt = cli.format;
    match cli.command {
        Command::Session(args) => remote::run(args, fmt),
        Command::Serve { bind, datasets, idle_timeout_secs } => {
            let lib = library(cli.library.as_ref())?;
            remote::serve(lib, &bind, datasets, idle_timeout_secs)
        }
        cmd => {
            let lib = library(cli.library.as_ref())?;
            match cmd {
                Command::Gen(a) => offline::gen(&lib, a, fmt),
                Command::Slice(a) => offline::slice(&lib, a),
                Command::Symtable { out } => offline::symtable(&lib, out),
                Command::Eval { predicted, target } => offline::eval(&lib, &predicted, &target, fmt),
                Command::Demo(a) => offline::demo(lib, a, fmt),
                Command::Replay { dir } => offline::replay(lib, &dir, fmt),
                Command::Stats { manifest } => offline::stats(&lib, &manifest, fmt),
                Command::Session(_) | Command::Serve { .. } => unreachable!(),
            }
        }
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

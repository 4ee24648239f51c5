use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context};
use brickmake_client::Client;
use brickmake_core::api::{ActionRequest, CreateSession};
use brickmake_core::brickfile::{Polarity, ShapeLibrary};
use brickmake_core::env::Workspace;
use brickmake_server::{AppState, ServerConfig};
use clap::{Args, Subcommand};

use crate::Format;

#[derive(Args)]
pub struct SessionArgs {
    #[arg(long, default_value = "http://127.0.0.1:8080", env = "BRICKMAKE_SERVER")]
    server: String,
    #[command(subcommand)]
    command: SessionCommand,
}

#[derive(Subcommand)]
enum SessionCommand {
    /// Start an episode; prints the session id.
    New {
        #[arg(long)]
        size: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Target model file.
        #[arg(long)]
        ldr: Option<PathBuf>,
        #[arg(long)]
        dataset: Option<String>,
        #[arg(long)]
        scene: Option<String>,
    },
    Info { id: String },
    /// Send an action: an integer code or an action record in JSON.
    Act { id: String, action: String },
    Score { id: String },
    Frame {
        id: String,
        #[arg(value_parser = parse_workspace)]
        workspace: Workspace,
        #[arg(long)]
        out: PathBuf,
    },
    Snaps {
        id: String,
        #[arg(value_parser = parse_workspace)]
        workspace: Workspace,
        #[arg(long, value_parser = parse_polarity, default_value = "+")]
        polarity: Polarity,
    },
    Delete { id: String },
    Shapes,
    Colors,
}

fn parse_workspace(s: &str) -> Result<Workspace, String> {
    match s {
        "table" => Ok(Workspace::Table),
        "hand" => Ok(Workspace::Hand),
        _ => Err(format!("expected table or hand, got {s}")),
    }
}

fn parse_polarity(s: &str) -> Result<Polarity, String> {
    match s {
        "+" | "positive" => Ok(Polarity::Positive),
        "-" | "negative" => Ok(Polarity::Negative),
        _ => Err(format!("expected + or -, got {s}")),
    }
}

fn runtime() -> anyhow::Result<tokio::runtime::Runtime> {
    Ok(tokio::runtime::Builder::new_multi_thread().enable_all().build()?)
}

fn print_json(v: &impl serde::Serialize) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

pub fn run(args: SessionArgs, fmt: Format) -> anyhow::Result<bool> {
    let client = Client::new(&args.server);
    runtime()?.block_on(async move {
        match args.command {
            SessionCommand::New { size, seed, ldr, dataset, scene } => {
                let ldraw = match ldr {
                    Some(p) => Some(std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?),
                    None => None,
                };
                let req = CreateSession { dataset, scene, seed, size, ldraw, config: None };
                let info = client.create_session(&req).await?;
                match fmt {
                    Format::Records => println!("session {}", info.session_id),
                    Format::Text => println!("{}", info.session_id),
                }
            }
            SessionCommand::Info { id } => print_json(&client.session(&id).await?)?,
            SessionCommand::Act { id, action } => {
                let req = match action.trim().parse::<u64>() {
                    Ok(code) => ActionRequest::Code { code },
                    Err(_) => ActionRequest::Record {
                        action: serde_json::from_str(&action).context("action is neither a code nor a JSON record")?,
                    },
                };
                let r = client.act(&id, req).await?;
                match fmt {
                    Format::Records => println!(
                        "step {} success {} terminal {}",
                        r.observation.step_count, r.success, r.terminal
                    ),
                    Format::Text => print_json(&r)?,
                }
            }
            SessionCommand::Score { id } => {
                let s = client.score(&id).await?;
                match fmt {
                    Format::Records => print!("{}", s.to_records()),
                    Format::Text => println!("F1_b {:.4}  F1_e {:.4}  F1_a {:.4}  AED {}", s.f1_b, s.f1_e, s.f1_a, s.aed),
                }
            }
            SessionCommand::Frame { id, workspace, out } => {
                std::fs::write(&out, client.frame(&id, workspace).await?)?;
            }
            SessionCommand::Snaps { id, workspace, polarity } => {
                print!("{}", client.snaps(&id, workspace, polarity).await?.to_records());
            }
            SessionCommand::Delete { id } => client.delete(&id).await?,
            SessionCommand::Shapes => print_json(&client.shapes().await?)?,
            SessionCommand::Colors => print_json(&client.colors().await?)?,
        }
        Ok(true)
    })
}

pub fn serve(library: Arc<ShapeLibrary>, bind: &str, datasets: Vec<PathBuf>, idle_timeout_secs: u64) -> anyhow::Result<bool> {
    if idle_timeout_secs == 0 {
        bail!("--idle-timeout-secs must be positive");
    }
    let config = ServerConfig { library, datasets, idle_timeout: Duration::from_secs(idle_timeout_secs) };
    let state = Arc::new(AppState::new(config)?);
    runtime()?.block_on(async move {
        let listener = tokio::net::TcpListener::bind(bind).await.with_context(|| format!("binding {bind}"))?;
        println!("listening on http://{}", listener.local_addr()?);
        brickmake_server::serve(listener, state).await?;
        Ok(true)
    })
}

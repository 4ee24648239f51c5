//! Episode logs: one directory per episode.
//!
//! ```text
//! meta.json      seed, environment config, target file, action-space layout
//! target.ldr     the target assembly
//! steps.jsonl    one record per step (step 0 is the reset observation)
//! frames/        NNNNN_table.png, NNNNN_hand.png
//! score.txt      final metric records, when the episode ended
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::assembly::Assembly;
use crate::brickfile::{write_ldraw, ShapeLibrary};
use crate::env::action::{Action, Segment};
use crate::env::{Env, EnvConfig, EnvError, Phase};
use crate::metrics::ScoreReport;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMeta {
    pub seed: u64,
    pub config: EnvConfig,
    pub target_file: String,
    pub target_bricks: usize,
    pub max_steps: u32,
    pub action_space_size: u64,
    pub action_segments: Vec<Segment>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u32,
    /// `None` for the reset record.
    pub code: Option<u64>,
    pub action: Option<Action>,
    pub success: bool,
    pub failure: Option<String>,
    pub phase: Phase,
    pub terminal: bool,
    pub table_frame: String,
    pub hand_frame: String,
    pub table_digest: String,
    pub hand_digest: String,
}

#[derive(Debug, thiserror::Error)]
pub enum LogError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("step {step}: {message}")]
    Encode { step: usize, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

/// Everything produced by replaying an action sequence.
pub struct Replay {
    pub env: Env,
    pub meta: EpisodeMeta,
    pub records: Vec<StepRecord>,
    /// `(table png, hand png)` per record.
    pub frames: Vec<(Vec<u8>, Vec<u8>)>,
}

impl Replay {
    pub fn score(&self) -> Option<&ScoreReport> {
        self.env.score()
    }
}

fn frame_names(step: u32) -> (String, String) {
    (format!("frames/{step:05}_table.png"), format!("frames/{step:05}_hand.png"))
}

/// Reset on `target` and apply `actions` in order, recording every step.
/// Stops early if the episode ends.
pub fn replay(library: Arc<ShapeLibrary>, target: Assembly, config: EnvConfig, actions: &[Action]) -> Result<Replay, LogError> {
    let mut env = Env::reset(library, target, config.clone())?;
    let space = env.action_space().clone();
    let meta = EpisodeMeta {
        seed: config.seed,
        config,
        target_file: "target.ldr".into(),
        target_bricks: env.state().target.len(),
        max_steps: env.state().max_steps,
        action_space_size: space.size(),
        action_segments: space.segments(),
    };
    let mut records = Vec::new();
    let mut frames = Vec::new();
    let mut push = |env: &Env, action: Option<(u64, Action)>, success: bool, failure: Option<String>| {
        let obs = env.observation();
        let (tf, hf) = frame_names(obs.step_count);
        records.push(StepRecord {
            step: obs.step_count,
            code: action.map(|a| a.0),
            action: action.map(|a| a.1),
            success,
            failure,
            phase: obs.phase,
            terminal: env.is_done(),
            table_frame: tf,
            hand_frame: hf,
            table_digest: obs.table_frame.digest(),
            hand_digest: obs.hand_frame.digest(),
        });
        frames.push((obs.table_frame.to_png(), obs.hand_frame.to_png()));
    };
    push(&env, None, true, None);
    for (i, a) in actions.iter().enumerate() {
        if env.is_done() {
            break;
        }
        let code = space.encode(a).map_err(|e| LogError::Encode { step: i + 1, message: e.to_string() })?;
        let r = env.step(a)?;
        push(&env, Some((code, *a)), r.success, r.failure);
    }
    Ok(Replay { env, meta, records, frames })
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> LogError + '_ {
    move |e| LogError::Io { path: path.display().to_string(), message: e.to_string() }
}

/// Every file of an episode directory as `(relative path, bytes)`.
pub fn episode_files(replay: &Replay) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let meta = serde_json::to_string_pretty(&replay.meta).expect("meta serializes") + "\n";
    files.push(("meta.json".to_string(), meta.into_bytes()));
    files.push((replay.meta.target_file.clone(), write_ldraw(&replay.env.state().target, replay.env.library()).into_bytes()));
    let mut steps = String::new();
    for r in &replay.records {
        steps.push_str(&serde_json::to_string(r).expect("record serializes"));
        steps.push('\n');
    }
    files.push(("steps.jsonl".to_string(), steps.into_bytes()));
    for (r, (t, h)) in replay.records.iter().zip(&replay.frames) {
        files.push((r.table_frame.clone(), t.clone()));
        files.push((r.hand_frame.clone(), h.clone()));
    }
    if let Some(score) = replay.score() {
        files.push(("score.txt".to_string(), score.to_records().into_bytes()));
    }
    files
}

/// Write a replay to `dir` (created if missing).
pub fn write_episode_dir(dir: &Path, replay: &Replay) -> Result<Vec<PathBuf>, LogError> {
    std::fs::create_dir_all(dir.join("frames")).map_err(io_err(dir))?;
    let mut written = Vec::new();
    for (name, bytes) in episode_files(replay) {
        let p = dir.join(name);
        std::fs::write(&p, bytes).map_err(io_err(&p))?;
        written.push(p);
    }
    Ok(written)
}

/// Read the action list back from a `steps.jsonl` file.
pub fn read_actions(steps_jsonl: &str) -> Result<Vec<Action>, serde_json::Error> {
    let mut out = Vec::new();
    for line in steps_jsonl.lines().filter(|l| !l.trim().is_empty()) {
        let rec: StepRecord = serde_json::from_str(line)?;
        if let Some(a) = rec.action {
            out.push(a);
        }
    }
    Ok(out)
}

/// What re-executing an episode directory found.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verification {
    pub steps: usize,
    /// Files whose regenerated bytes differ, relative to the directory.
    pub mismatches: Vec<String>,
}

impl Verification {
    pub fn identical(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Replay the actions recorded in `dir` from its target and config, and
/// compare every regenerated file with the one on disk.
pub fn verify_episode_dir(dir: &Path, library: Arc<ShapeLibrary>) -> Result<Verification, LogError> {
    let read = |name: &str| -> Result<Vec<u8>, LogError> {
        let p = dir.join(name);
        std::fs::read(&p).map_err(io_err(&p))
    };
    let text = |name: &str| -> Result<String, LogError> {
        String::from_utf8(read(name)?).map_err(|e| LogError::Io { path: dir.join(name).display().to_string(), message: e.to_string() })
    };
    let bad = |name: &str, e: &dyn std::fmt::Display| LogError::Io { path: dir.join(name).display().to_string(), message: e.to_string() };
    let meta: EpisodeMeta = serde_json::from_str(&text("meta.json")?).map_err(|e| bad("meta.json", &e))?;
    let target = crate::brickfile::parse_ldraw(&text(&meta.target_file)?)
        .map_err(|e| bad(&meta.target_file, &e))
        .and_then(|d| crate::brickfile::flatten(&d, &library).map_err(|e| bad(&meta.target_file, &e)))?;
    let actions = read_actions(&text("steps.jsonl")?).map_err(|e| bad("steps.jsonl", &e))?;
    let rep = replay(library, target, meta.config.clone(), &actions)?;
    let mismatches = episode_files(&rep)
        .into_iter()
        .filter(|(name, bytes)| std::fs::read(dir.join(name)).ok().as_deref() != Some(bytes.as_slice()))
        .map(|(name, _)| name)
        .collect();
    Ok(Verification { steps: actions.len(), mismatches })
}

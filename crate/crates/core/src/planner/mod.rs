//! Expert planner: privileged-state Break and Make scripts that only use
//! connection points visible in rendered snap grids.
//!
//! Plans are produced by driving a live [`Env`](crate::env::Env), so every
//! cursor is read off the frame the agent would actually see.

mod break_plan;
mod demo;
mod make_plan;
mod view;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::brickfile::shape::Polarity;
use crate::env::{Action, Env, EnvError, Workspace};

pub use break_plan::{plan_break, BreakPlan};
pub use demo::{generate_demonstration, run_oracle, write_demonstration, DemoMeta, Demonstration, Validation};
pub use make_plan::plan_make;
pub use view::{camera_options, CameraOption};

pub const PLANNER_VERSION: &str = "1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlannerConfig {
    /// Snap cells a point must occupy to count as visible.
    pub visibility_cells: usize,
    /// Camera states tried beyond the current one.
    pub camera_search: usize,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig { visibility_cells: 1, camera_search: 16 }
    }
}

/// The point a cursor action is expected to hit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedSnap {
    pub workspace: Workspace,
    pub instance_id: u32,
    pub point: u32,
    pub polarity: Polarity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanStep {
    pub action: Action,
    pub expected: Vec<ExpectedSnap>,
    pub note: String,
    /// Frame digests observed right after the action; filled in on execution.
    #[serde(default)]
    pub table_digest: String,
    #[serde(default)]
    pub hand_digest: String,
}

impl PlanStep {
    fn new(action: Action, expected: Vec<ExpectedSnap>, note: impl Into<String>) -> Self {
        PlanStep { action, expected, note: note.into(), table_digest: String::new(), hand_digest: String::new() }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("no removable brick is visible from any searched camera ({remaining} bricks left)")]
    NothingVisible { remaining: usize },
    #[error("no removable brick remains ({remaining} bricks left)")]
    Stuck { remaining: usize },
    #[error("brick {0} does not touch any placed brick")]
    Unattached(u32),
    #[error("no visible point pair places brick {0}")]
    NoPlacement(u32),
    #[error("planned action failed at step {step}: {reason}")]
    ActionFailed { step: u32, reason: String },
    #[error("step budget ran out at step {0}")]
    OutOfSteps(u32),
    #[error("final score is not a perfect reconstruction (aed {aed}, f1_a {f1_a})")]
    Imperfect { aed: f64, f1_a: f64 },
    #[error("replay diverged at record {0}")]
    ReplayDiverged(usize),
    #[error("{0}")]
    Log(String),
}

/// Apply one planned action to the live env, insisting that it succeeds.
fn execute(env: &mut Env, steps: &mut Vec<PlanStep>, mut step: PlanStep) -> Result<(), PlanError> {
    let r = env.step(&step.action)?;
    if !r.success {
        return Err(PlanError::ActionFailed { step: r.observation.step_count, reason: r.failure.unwrap_or_default() });
    }
    if r.terminal && step.action != Action::End {
        return Err(PlanError::OutOfSteps(r.observation.step_count));
    }
    step.table_digest = r.observation.table_frame.digest();
    step.hand_digest = r.observation.hand_frame.digest();
    steps.push(step);
    Ok(())
}

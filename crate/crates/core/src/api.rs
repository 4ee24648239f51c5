//! JSON bodies exchanged with the session service.
//!
//! Actions travel either as the integer code of [`ActionSpace`] or as the
//! tagged [`Action`] record; both name the same action.

use serde::{Deserialize, Serialize};

use crate::brickfile::ShapeLibrary;
use crate::env::action::Segment;
use crate::env::{Action, ActionSpace, Env, EnvConfig, Phase};
use crate::metrics::ScoreReport;

/// Target selection: inline LDraw text, a dataset scene, or a random scene.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CreateSession {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
    /// Manifest path of the scene within `dataset`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scene: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ldraw: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<EnvConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationMeta {
    pub phase: Phase,
    pub step_count: u32,
    pub max_steps: u32,
    pub last_action_success: bool,
    pub terminal: bool,
    pub table_digest: String,
    pub hand_digest: String,
    /// `(shape_id, color_id)` of the held brick.
    pub hand_brick: Option<(u32, u32)>,
}

impl ObservationMeta {
    pub fn of(env: &Env) -> Self {
        let obs = env.observation();
        ObservationMeta {
            phase: obs.phase,
            step_count: obs.step_count,
            max_steps: env.state().max_steps,
            last_action_success: obs.last_action_success,
            terminal: env.is_done(),
            table_digest: obs.table_frame.digest(),
            hand_digest: obs.hand_frame.digest(),
            hand_brick: env.state().hand_brick().map(|b| (b.shape_id, b.color_id)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionInfo {
    pub session_id: String,
    pub target_bricks: usize,
    pub observation: ObservationMeta,
    pub action_space: ActionSpace,
    pub segments: Vec<Segment>,
}

impl SessionInfo {
    pub fn of(session_id: &str, env: &Env) -> Self {
        SessionInfo {
            session_id: session_id.to_string(),
            target_bricks: env.state().target.len(),
            observation: ObservationMeta::of(env),
            action_space: env.action_space().clone(),
            segments: env.action_space().segments(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ActionRequest {
    Code { code: u64 },
    Record { action: Action },
}

impl From<Action> for ActionRequest {
    fn from(action: Action) -> Self {
        ActionRequest::Record { action }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepResponse {
    pub success: bool,
    pub failure: Option<String>,
    pub terminal: bool,
    pub score: Option<ScoreReport>,
    pub observation: ObservationMeta,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapeInfo {
    pub shape_id: u32,
    pub name: String,
    pub description: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorInfo {
    pub color_id: u32,
    pub name: String,
    pub rgb: [u8; 3],
}

pub fn shape_listing(library: &ShapeLibrary) -> Vec<ShapeInfo> {
    library
        .shapes()
        .map(|s| ShapeInfo { shape_id: s.shape_id, name: s.canonical_name.clone(), description: s.description.clone() })
        .collect()
}

pub fn color_listing(library: &ShapeLibrary) -> Vec<ColorInfo> {
    library
        .colors
        .entries
        .iter()
        .map(|(id, c)| ColorInfo { color_id: *id, name: c.name.clone(), rgb: c.rgb })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}

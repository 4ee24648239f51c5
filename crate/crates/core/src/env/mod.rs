//! The two-phase Break-and-Make episode: workspaces, cameras, actions,
//! observations and terminal scoring.

pub mod action;
pub mod log;
pub mod placement;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::assembly::{collides, removable, Assembly, AssemblyError, BrickInstance, PointRef};
use crate::brickfile::ShapeLibrary;
use crate::math::{Mat3, Vec3};
use crate::metrics::{score_all, MetricConfig, ScoreReport};
use crate::raster::{frame_scene, render, CameraState, Frame, HAND_SIZE, TABLE_SIZE};

pub use action::{Action, ActionSpace, CameraMove, Cursor, EncodeError, Workspace};
pub use placement::{assemble_pose, mating_pose, mating_rotation, observed_orientation, rotated_about_point};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub table_size: usize,
    pub hand_size: usize,
    /// Defaults to `32 + 16·n` for an `n`-brick target.
    pub max_steps: Option<u32>,
    pub seed: u64,
    pub metric: MetricConfig,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig { table_size: TABLE_SIZE, hand_size: HAND_SIZE, max_steps: None, seed: 0, metric: MetricConfig::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Break,
    Make,
    Done,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeState {
    pub phase: Phase,
    pub table: Assembly,
    pub hand: Assembly,
    pub table_camera: CameraState,
    pub hand_camera: CameraState,
    pub target: Assembly,
    pub step_count: u32,
    pub max_steps: u32,
    pub rng_seed: u64,
}

impl EpisodeState {
    /// Hash of everything an action can change except the step counter.
    pub fn world_hash(&self) -> String {
        let view = (&self.phase, &self.table, &self.hand, &self.table_camera, &self.hand_camera, &self.target, self.max_steps);
        let bytes = serde_json::to_vec(&view).expect("state serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn hand_brick(&self) -> Option<&BrickInstance> {
        self.hand.instances().next()
    }
}

#[derive(Clone, Debug)]
pub struct Observation {
    pub table_frame: Arc<Frame>,
    pub hand_frame: Arc<Frame>,
    pub phase: Phase,
    pub last_action_success: bool,
    pub step_count: u32,
}

#[derive(Clone, Debug)]
pub struct StepResult {
    pub observation: Observation,
    pub success: bool,
    /// Why the action did nothing, when it failed.
    pub failure: Option<String>,
    pub terminal: bool,
    pub score: Option<ScoreReport>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnvError {
    #[error("target assembly is empty")]
    EmptyTarget,
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error("episode is over")]
    EpisodeDone,
}

#[derive(Clone)]
pub struct Env {
    library: Arc<ShapeLibrary>,
    config: EnvConfig,
    space: ActionSpace,
    state: EpisodeState,
    obs: Observation,
    score: Option<ScoreReport>,
}

type Outcome = Result<(), String>;

fn fail<T>(msg: impl Into<String>) -> Result<T, String> {
    Err(msg.into())
}

impl Env {
    pub fn reset(library: Arc<ShapeLibrary>, target: Assembly, config: EnvConfig) -> Result<Env, EnvError> {
        if target.is_empty() {
            return Err(EnvError::EmptyTarget);
        }
        target.check_shapes(&library)?;
        let max_steps = config.max_steps.unwrap_or(32 + 16 * target.len() as u32);
        let state = EpisodeState {
            phase: Phase::Break,
            table: target.clone(),
            hand: Assembly::new(),
            table_camera: frame_scene(&target, &library, &CameraState::default()),
            hand_camera: CameraState::default(),
            target,
            step_count: 0,
            max_steps,
            rng_seed: config.seed,
        };
        let grid = |s: usize| ((s / 4) as u32, (s / 4) as u32);
        let space = ActionSpace::new(grid(config.table_size), grid(config.hand_size), &library);
        let obs = Self::observe(&library, &config, &state, true);
        Ok(Env { library, config, space, state, obs, score: None })
    }

    fn observe(library: &ShapeLibrary, config: &EnvConfig, state: &EpisodeState, success: bool) -> Observation {
        Observation {
            table_frame: Arc::new(render(&state.table, library, &state.table_camera, config.table_size, config.table_size)),
            hand_frame: Arc::new(render(&state.hand, library, &state.hand_camera, config.hand_size, config.hand_size)),
            phase: state.phase,
            last_action_success: success,
            step_count: state.step_count,
        }
    }

    pub fn library(&self) -> &Arc<ShapeLibrary> {
        &self.library
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn state(&self) -> &EpisodeState {
        &self.state
    }

    pub fn observation(&self) -> &Observation {
        &self.obs
    }

    pub fn action_space(&self) -> &ActionSpace {
        &self.space
    }

    pub fn score(&self) -> Option<&ScoreReport> {
        self.score.as_ref()
    }

    pub fn is_done(&self) -> bool {
        self.state.phase == Phase::Done
    }

    pub fn step(&mut self, action: &Action) -> Result<StepResult, EnvError> {
        if self.state.phase == Phase::Done {
            return Err(EnvError::EpisodeDone);
        }
        let mut next = self.state.clone();
        let outcome = self.apply(&mut next, action);
        if outcome.is_ok() {
            self.state = next;
        }
        self.state.step_count += 1;
        let phase = self.state.phase;
        if phase != Phase::Done && self.state.step_count >= self.state.max_steps {
            self.state.phase = Phase::Done;
        }
        if self.state.phase == Phase::Done {
            // The Break table is never a reconstruction, so an episode that
            // runs out in Break is scored as an empty prediction.
            let predicted = if phase == Phase::Break { Assembly::new() } else { self.state.table.clone() };
            self.score = Some(score_all(&predicted, &self.state.target, &self.library, &self.config.metric));
        }
        let success = outcome.is_ok();
        self.obs = Self::observe(&self.library, &self.config, &self.state, success);
        Ok(StepResult {
            observation: self.obs.clone(),
            success,
            failure: outcome.err(),
            terminal: self.state.phase == Phase::Done,
            score: self.score.clone(),
        })
    }

    fn table_ref(&self, c: &Cursor) -> Result<PointRef, String> {
        self.obs
            .table_frame
            .snaps(c.polarity)
            .get(c.row as usize, c.col as usize)
            .ok_or_else(|| format!("no {} connection point at table cell ({}, {})", c.polarity.symbol(), c.row, c.col))
    }

    fn hand_ref(&self, c: &Cursor) -> Result<PointRef, String> {
        self.obs
            .hand_frame
            .snaps(c.polarity)
            .get(c.row as usize, c.col as usize)
            .ok_or_else(|| format!("no {} connection point at hand cell ({}, {})", c.polarity.symbol(), c.row, c.col))
    }

    fn apply(&self, s: &mut EpisodeState, action: &Action) -> Outcome {
        let lib = &*self.library;
        match *action {
            Action::Disassemble { cursor } => {
                let r = self.table_ref(&cursor)?;
                if !removable(&s.table, r.instance_id, r.point, lib).map_err(|e| e.to_string())? {
                    return fail("brick is blocked along that connection point's axis");
                }
                let inst = s.table.remove(r.instance_id).expect("snap refers to a table brick");
                self.put_in_hand(s, inst.shape_id, inst.color_id);
                Ok(())
            }
            Action::Pick { shape_id, color_id } => {
                if s.phase != Phase::Make {
                    return fail("pick is only allowed in the make phase");
                }
                if lib.shape(shape_id).is_none() {
                    return fail(format!("unknown shape {shape_id}"));
                }
                if lib.colors.get(color_id).is_none() {
                    return fail(format!("unknown color {color_id}"));
                }
                self.put_in_hand(s, shape_id, color_id);
                Ok(())
            }
            Action::Assemble { hand, table } => {
                if s.phase != Phase::Make {
                    return fail("assemble is only allowed in the make phase");
                }
                let hr = self.hand_ref(&hand)?;
                let tr = self.table_ref(&table)?;
                let h = s.hand.get(hr.instance_id).expect("snap refers to the hand brick");
                let t = s.table.get(tr.instance_id).expect("snap refers to a table brick");
                let hp = lib.shape(h.shape_id).and_then(|x| x.point(hr.point)).expect("valid point");
                let tp = lib.shape(t.shape_id).and_then(|x| x.point(tr.point)).expect("valid point");
                if hp.polarity == tp.polarity || hp.kind != tp.kind {
                    return fail("connection points are not compatible");
                }
                let cand = assemble_pose(h, hp, t, tp, &s.table_camera, &s.hand_camera);
                if collides(&s.table, &cand, lib, &[]) {
                    return fail("placement collides");
                }
                s.table.insert(cand);
                s.hand = Assembly::new();
                Ok(())
            }
            Action::AssembleHandOnly { hand } => {
                if s.phase != Phase::Make {
                    return fail("assemble is only allowed in the make phase");
                }
                if !s.table.is_empty() {
                    return fail("hand-only assemble needs an empty table");
                }
                let hr = self.hand_ref(&hand)?;
                let h = s.hand.get(hr.instance_id).expect("snap refers to the hand brick");
                let p = lib.shape(h.shape_id).and_then(|x| x.point(hr.point)).expect("valid point");
                s.table.insert(BrickInstance::new(0, h.shape_id, h.color_id, Mat3::identity(), -p.local_position));
                s.hand = Assembly::new();
                Ok(())
            }
            Action::RotateBrick { cursor, angle } => {
                if ![90, 180, 270].contains(&angle) {
                    return fail("angle must be 90, 180 or 270");
                }
                let r = self.table_ref(&cursor)?;
                let inst = s.table.get(r.instance_id).expect("snap refers to a table brick").clone();
                let p = lib.shape(inst.shape_id).and_then(|x| x.point(r.point)).expect("valid point");
                let moved = rotated_about_point(&inst, p, angle);
                if collides(&s.table, &moved, lib, &[inst.instance_id]) {
                    return fail("rotation collides");
                }
                s.table.set_pose(inst.instance_id, moved.rotation, moved.translation).expect("brick exists");
                Ok(())
            }
            Action::RotateCamera { workspace, direction } => {
                let (cam, scene) = match workspace {
                    Workspace::Table => (&mut s.table_camera, &s.table),
                    Workspace::Hand => (&mut s.hand_camera, &s.hand),
                };
                *cam = match direction {
                    CameraMove::Left => cam.orbit(-1),
                    CameraMove::Right => cam.orbit(1),
                    CameraMove::Up => cam.with_elevation(1),
                    CameraMove::Down => cam.with_elevation(-1),
                    CameraMove::Frame => frame_scene(scene, lib, cam),
                };
                Ok(())
            }
            Action::SwitchPhase => {
                if s.phase != Phase::Break {
                    return fail("switch phase is only allowed in the break phase");
                }
                s.phase = Phase::Make;
                s.table = Assembly::new();
                s.hand = Assembly::new();
                s.table_camera = CameraState::default();
                s.hand_camera = CameraState::default();
                Ok(())
            }
            Action::End => {
                if s.phase != Phase::Make {
                    return fail("end is only allowed in the make phase");
                }
                s.phase = Phase::Done;
                Ok(())
            }
        }
    }

    fn put_in_hand(&self, s: &mut EpisodeState, shape_id: u32, color_id: u32) {
        let mut hand = Assembly::new();
        hand.insert(BrickInstance::new(0, shape_id, color_id, Mat3::identity(), Vec3::zeros()));
        s.hand_camera = frame_scene(&hand, &self.library, &s.hand_camera);
        s.hand = hand;
    }
}

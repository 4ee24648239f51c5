use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::assembly::{detect_connections, Assembly};
use crate::assembly::connections::instance_edges;
use crate::brickfile::ShapeLibrary;
use crate::env::log::{replay, write_episode_dir, Replay};
use crate::env::{Action, Env, EnvConfig};
use crate::planner::{execute, plan_break, plan_make, PlanError, PlanStep, PlannerConfig, PLANNER_VERSION};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Validation {
    pub all_steps_succeeded: bool,
    pub replay_identical: bool,
    pub aed: f64,
    pub f1_a: f64,
}

/// Contents of `demo_meta.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemoMeta {
    pub planner_version: String,
    /// Planner demonstrations are not guaranteed to be visually sufficient.
    pub noisy: bool,
    pub planner: PlannerConfig,
    pub removal_order: Vec<u32>,
    pub validation: Validation,
    pub plan: Vec<PlanStep>,
}

pub struct Demonstration {
    pub steps: Vec<PlanStep>,
    pub removal_order: Vec<u32>,
    pub replay: Replay,
    pub validation: Validation,
}

impl Demonstration {
    pub fn actions(&self) -> Vec<Action> {
        self.steps.iter().map(|s| s.action).collect()
    }

    pub fn meta(&self, planner: &PlannerConfig) -> DemoMeta {
        DemoMeta {
            planner_version: PLANNER_VERSION.to_string(),
            noisy: true,
            planner: planner.clone(),
            removal_order: self.removal_order.clone(),
            validation: self.validation.clone(),
            plan: self.steps.clone(),
        }
    }
}

/// Plan Break, switch, plan Make, then check the result and that a fresh
/// replay of the actions reproduces every observation.
pub fn generate_demonstration(
    library: Arc<ShapeLibrary>,
    target: &Assembly,
    config: &EnvConfig,
    planner: &PlannerConfig,
) -> Result<Demonstration, PlanError> {
    let mut env = Env::reset(Arc::clone(&library), target.clone(), config.clone())?;
    let reset = (env.observation().table_frame.digest(), env.observation().hand_frame.digest());
    let broken = plan_break(&mut env, planner)?;
    let mut steps = broken.steps;
    execute(&mut env, &mut steps, PlanStep::new(Action::SwitchPhase, Vec::new(), "switch to make"))?;
    steps.extend(plan_make(&mut env, &broken.removal_order, planner)?);

    let score = env.score().expect("plan ends the episode").clone();
    if score.aed != 0.0 || score.f1_a != 1.0 {
        return Err(PlanError::Imperfect { aed: score.aed, f1_a: score.f1_a });
    }
    let actions: Vec<Action> = steps.iter().map(|s| s.action).collect();
    let rep = replay(library, target.clone(), config.clone(), &actions).map_err(|e| PlanError::Log(e.to_string()))?;
    let live = std::iter::once(reset).chain(steps.iter().map(|s| (s.table_digest.clone(), s.hand_digest.clone())));
    for (i, (want, rec)) in live.zip(rep.records.iter().map(|r| (r.table_digest.clone(), r.hand_digest.clone()))).enumerate() {
        if want != rec {
            return Err(PlanError::ReplayDiverged(i));
        }
    }
    if rep.records.len() != steps.len() + 1 || !rep.records.iter().all(|r| r.success) {
        return Err(PlanError::ReplayDiverged(rep.records.len().min(steps.len() + 1)));
    }
    let validation = Validation { all_steps_succeeded: true, replay_identical: true, aed: score.aed, f1_a: score.f1_a };
    Ok(Demonstration { steps, removal_order: broken.removal_order, replay: rep, validation })
}

/// Episode log plus `demo_meta.json`.
pub fn write_demonstration(dir: &Path, demo: &Demonstration, planner: &PlannerConfig) -> Result<Vec<PathBuf>, PlanError> {
    let mut written = write_episode_dir(dir, &demo.replay).map_err(|e| PlanError::Log(e.to_string()))?;
    let p = dir.join("demo_meta.json");
    let body = serde_json::to_string_pretty(&demo.meta(planner)).expect("meta serializes") + "\n";
    std::fs::write(&p, body).map_err(|e| PlanError::Log(format!("{}: {e}", p.display())))?;
    written.push(p);
    Ok(written)
}

/// An agent with privileged access to the target that skips Break and builds
/// straight away, acting only through `env.step`.
pub fn run_oracle(env: &mut Env, planner: &PlannerConfig) -> Result<Vec<PlanStep>, PlanError> {
    let target = env.state().target.clone();
    let mut steps = Vec::new();
    execute(env, &mut steps, PlanStep::new(Action::SwitchPhase, Vec::new(), "switch to make"))?;
    let order = build_order(&target, env.library());
    // plan_make places in reverse removal order.
    let removal: Vec<u32> = order.into_iter().rev().collect();
    steps.extend(plan_make(env, &removal, planner)?);
    Ok(steps)
}

/// Breadth-first over the connection graph from the lowest brick, so every
/// brick after the first touches one placed earlier.
fn build_order(target: &Assembly, library: &ShapeLibrary) -> Vec<u32> {
    let mut adj: BTreeMap<u32, BTreeSet<u32>> = target.ids().into_iter().map(|i| (i, BTreeSet::new())).collect();
    for (a, b) in instance_edges(&detect_connections(target, library)) {
        adj.entry(a).or_default().insert(b);
        adj.entry(b).or_default().insert(a);
    }
    let bottom = |id: &u32| -> f64 { target.subset(&[*id]).world_bounds(library).max.y };
    let mut order = Vec::new();
    let mut seen = BTreeSet::new();
    let mut ids = target.ids();
    ids.sort_by(|a, b| bottom(b).total_cmp(&bottom(a)).then(a.cmp(b)));
    for start in ids {
        if !seen.insert(start) {
            continue;
        }
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            order.push(x);
            for &y in &adj[&x] {
                if seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
    }
    order
}

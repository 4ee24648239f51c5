use std::sync::Arc;

use crate::assembly::{connected_components, removable, Assembly, PointRef};
use crate::brickfile::shape::Polarity;
use crate::brickfile::ShapeLibrary;
use crate::env::{Action, Env, Workspace};
use crate::planner::view::{camera_options, visible_cell};
use crate::planner::{execute, ExpectedSnap, PlanError, PlanStep, PlannerConfig};
use crate::raster::render;

#[derive(Clone, Debug, PartialEq)]
pub struct BreakPlan {
    pub steps: Vec<PlanStep>,
    /// Instance ids in the order they left the table.
    pub removal_order: Vec<u32>,
}

struct Candidate {
    id: u32,
    points: Vec<(u32, Polarity)>,
}

/// Removable bricks, highest first (ties by id). Bricks whose removal keeps
/// the rest of the table in one piece come before all others, so that the
/// reversed order always attaches each brick to what is already built.
fn candidates(table: &Assembly, library: &ShapeLibrary) -> Vec<Vec<Candidate>> {
    let mut tiers: [Vec<(f64, Candidate)>; 2] = [Vec::new(), Vec::new()];
    for inst in table.instances() {
        let Some(shape) = library.shape(inst.shape_id) else { continue };
        let points: Vec<(u32, Polarity)> = shape
            .connection_points
            .iter()
            .filter(|p| removable(table, inst.instance_id, p.index, library).unwrap_or(false))
            .map(|p| (p.index, p.polarity))
            .collect();
        if points.is_empty() {
            continue;
        }
        let mut rest = table.clone();
        rest.remove(inst.instance_id);
        let tier = usize::from(connected_components(&rest, library).len() > 1);
        let top = table.subset(&[inst.instance_id]).world_bounds(library).min.y;
        tiers[tier].push((top, Candidate { id: inst.instance_id, points }));
    }
    tiers
        .into_iter()
        .map(|mut t| {
            t.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.id.cmp(&b.1.id)));
            t.into_iter().map(|(_, c)| c).collect()
        })
        .collect()
}

/// Empty the table one visible, removable brick at a time.
pub fn plan_break(env: &mut Env, cfg: &PlannerConfig) -> Result<BreakPlan, PlanError> {
    let mut plan = BreakPlan { steps: Vec::new(), removal_order: Vec::new() };
    let library = Arc::clone(env.library());
    while !env.state().table.is_empty() {
        let table = env.state().table.clone();
        let remaining = table.len();
        let tiers = candidates(&table, &library);
        if tiers.iter().all(Vec::is_empty) {
            return Err(PlanError::Stuck { remaining });
        }
        let options = camera_options(&env.state().table_camera, &table, &library, cfg.camera_search + 1);
        let size = env.config().table_size;
        let mut frames = Vec::with_capacity(options.len());
        for o in &options {
            frames.push(if o.moves.is_empty() {
                Arc::clone(&env.observation().table_frame)
            } else {
                Arc::new(render(&table, &library, &o.camera, size, size))
            });
        }
        let chosen = tiers.iter().find_map(|tier| {
            options.iter().zip(&frames).find_map(|(o, f)| {
                tier.iter().find_map(|c| {
                    c.points.iter().find_map(|&(point, pol)| {
                        let r = PointRef { instance_id: c.id, point };
                        visible_cell(f, r, pol, cfg.visibility_cells).map(|_| (o, r, pol))
                    })
                })
            })
        });
        let Some((option, r, pol)) = chosen else {
            return Err(PlanError::NothingVisible { remaining });
        };
        for a in option.actions(Workspace::Table).collect::<Vec<_>>() {
            execute(env, &mut plan.steps, PlanStep::new(a, Vec::new(), format!("look for brick {}", r.instance_id)))?;
        }
        let cursor = visible_cell(&env.observation().table_frame, r, pol, 1).expect("planned view shows the point");
        let expected = vec![ExpectedSnap { workspace: Workspace::Table, instance_id: r.instance_id, point: r.point, polarity: pol }];
        let note = format!("remove brick {} by point {}", r.instance_id, r.point);
        execute(env, &mut plan.steps, PlanStep::new(Action::Disassemble { cursor }, expected, note))?;
        plan.removal_order.push(r.instance_id);
    }
    Ok(plan)
}

use std::sync::Arc;

use crate::assembly::{collides, connections_of, min_symmetric_distance, BrickInstance, PointRef};
use crate::brickfile::shape::Polarity;
use crate::brickfile::ShapeLibrary;
use crate::env::{assemble_pose, rotated_about_point, Action, Cursor, Env, Workspace};
use crate::math::{Mat3, Vec3};
use crate::planner::view::{camera_options, visible_cell, CameraOption};
use crate::planner::{execute, ExpectedSnap, PlanError, PlanStep, PlannerConfig};
use crate::raster::{render, Frame};

const POSE_TOLERANCE: f64 = 1e-6;
const PROBE_ID: u32 = u32::MAX;

fn same_pose(a: &BrickInstance, b: &BrickInstance, library: &ShapeLibrary) -> bool {
    (a.translation - b.translation).norm() < POSE_TOLERANCE
        && min_symmetric_distance(a.shape_id, &a.rotation, &b.rotation, library.symmetries()) < POSE_TOLERANCE
}

fn snap(workspace: Workspace, r: PointRef, polarity: Polarity) -> ExpectedSnap {
    ExpectedSnap { workspace, instance_id: r.instance_id, point: r.point, polarity }
}

/// Camera options with their frames, rendered on demand.
struct Views {
    options: Vec<CameraOption>,
    frames: Vec<Arc<Frame>>,
}

impl Views {
    fn table(env: &Env, cfg: &PlannerConfig) -> Views {
        let s = env.state();
        Views::build(env, &s.table, &s.table_camera, &env.observation().table_frame, env.config().table_size, cfg)
    }

    fn hand(env: &Env, cfg: &PlannerConfig) -> Views {
        let s = env.state();
        Views::build(env, &s.hand, &s.hand_camera, &env.observation().hand_frame, env.config().hand_size, cfg)
    }

    fn build(
        env: &Env,
        scene: &crate::assembly::Assembly,
        camera: &crate::raster::CameraState,
        current: &Arc<Frame>,
        size: usize,
        cfg: &PlannerConfig,
    ) -> Views {
        let lib = env.library();
        let options = camera_options(camera, scene, lib, cfg.camera_search + 1);
        let frames = options
            .iter()
            .map(|o| if o.moves.is_empty() { Arc::clone(current) } else { Arc::new(render(scene, lib, &o.camera, size, size)) })
            .collect();
        Views { options, frames }
    }
}

/// A planned Assemble and, if needed, the follow-up RotateBrick.
struct Placement {
    cost: usize,
    table_view: usize,
    hand_view: usize,
    table_ref: PointRef,
    table_pol: Polarity,
    hand_ref: PointRef,
    hand_pol: Polarity,
    /// Angle of the corrective rotation.
    fix: Option<u32>,
}

/// Build the target on the table, placing bricks in reverse removal order.
/// Ends the episode.
pub fn plan_make(env: &mut Env, removal_order: &[u32], cfg: &PlannerConfig) -> Result<Vec<PlanStep>, PlanError> {
    let mut steps = Vec::new();
    let library = Arc::clone(env.library());
    let target = env.state().target.clone();
    let order: Vec<u32> = removal_order.iter().rev().copied().collect();
    let Some((&first, rest)) = order.split_first() else {
        execute(env, &mut steps, PlanStep::new(Action::End, Vec::new(), "nothing to build"))?;
        return Ok(steps);
    };

    let first_target = target.get(first).expect("order names target bricks").clone();
    pick(env, &mut steps, &first_target)?;
    place_first(env, &mut steps, first, cfg, &library)?;
    let placed = env.state().table.instances().next().expect("first brick placed").clone();
    // Rigid map from target coordinates to the built frame.
    let rt: Mat3 = placed.rotation * first_target.rotation.transpose();
    let tt: Vec3 = placed.translation - rt * first_target.translation;

    for &b in rest {
        let want = target.get(b).expect("order names target bricks").transformed(&rt, &tt);
        pick(env, &mut steps, &want)?;
        place(env, &mut steps, b, &want, cfg, &library)?;
    }
    execute(env, &mut steps, PlanStep::new(Action::End, Vec::new(), "done"))?;
    Ok(steps)
}

fn pick(env: &mut Env, steps: &mut Vec<PlanStep>, inst: &BrickInstance) -> Result<(), PlanError> {
    let action = Action::Pick { shape_id: inst.shape_id, color_id: inst.color_id };
    execute(env, steps, PlanStep::new(action, Vec::new(), format!("pick {} colour {}", inst.shape_id, inst.color_id)))
}

fn place_first(env: &mut Env, steps: &mut Vec<PlanStep>, b: u32, cfg: &PlannerConfig, lib: &ShapeLibrary) -> Result<(), PlanError> {
    let hand = env.state().hand_brick().expect("picked").clone();
    let shape = lib.shape(hand.shape_id).expect("known shape");
    let mut points: Vec<_> = shape.connection_points.iter().collect();
    // Lowest point first (largest y, since -Y is up).
    points.sort_by(|a, c| c.local_position.y.total_cmp(&a.local_position.y).then(a.index.cmp(&c.index)));
    let views = Views::hand(env, cfg);
    let found = points.iter().find_map(|p| {
        let r = PointRef { instance_id: hand.instance_id, point: p.index };
        views.options.iter().zip(&views.frames).find_map(|(o, f)| visible_cell(f, r, p.polarity, cfg.visibility_cells).map(|_| (o.clone(), r, p.polarity)))
    });
    let Some((option, r, pol)) = found else { return Err(PlanError::NoPlacement(b)) };
    for a in option.actions(Workspace::Hand).collect::<Vec<_>>() {
        execute(env, steps, PlanStep::new(a, Vec::new(), "turn the hand brick"))?;
    }
    let hand_cursor = visible_cell(&env.observation().hand_frame, r, pol, 1).expect("planned view shows the point");
    let action = Action::AssembleHandOnly { hand: hand_cursor };
    execute(env, steps, PlanStep::new(action, vec![snap(Workspace::Hand, r, pol)], format!("start with brick {b}")))
}

fn place(
    env: &mut Env,
    steps: &mut Vec<PlanStep>,
    b: u32,
    want: &BrickInstance,
    cfg: &PlannerConfig,
    lib: &ShapeLibrary,
) -> Result<(), PlanError> {
    let table = env.state().table.clone();
    let hand = env.state().hand_brick().expect("picked").clone();
    let probe = BrickInstance { instance_id: PROBE_ID, ..want.clone() };
    let mates = connections_of(&table, &probe, lib, &[]);
    if mates.is_empty() {
        return Err(PlanError::Unattached(b));
    }
    // Table-side point of each mate.
    let table_points: Vec<PointRef> =
        mates.iter().map(|c| if c.a.instance_id == PROBE_ID { c.b } else { c.a }).collect();
    let tviews = Views::table(env, cfg);
    let hviews = Views::hand(env, cfg);
    let hand_shape = lib.shape(hand.shape_id).expect("known shape");

    let mut table_vis: Vec<Vec<(PointRef, Polarity)>> = Vec::new();
    for f in &tviews.frames {
        table_vis.push(
            table_points
                .iter()
                .filter_map(|r| {
                    let inst = table.get(r.instance_id)?;
                    let pol = lib.shape(inst.shape_id)?.point(r.point)?.polarity;
                    visible_cell(f, *r, pol, cfg.visibility_cells).map(|_| (*r, pol))
                })
                .collect(),
        );
    }
    let mut hand_vis: Vec<Vec<(PointRef, Polarity)>> = Vec::new();
    for f in &hviews.frames {
        hand_vis.push(
            hand_shape
                .connection_points
                .iter()
                .map(|p| (PointRef { instance_id: hand.instance_id, point: p.index }, p.polarity))
                .filter(|&(r, pol)| visible_cell(f, r, pol, cfg.visibility_cells).is_some())
                .collect(),
        );
    }

    let mut best: Option<Placement> = None;
    for fixing in [false, true] {
        for (ti, topt) in tviews.options.iter().enumerate() {
            for (hi, hopt) in hviews.options.iter().enumerate() {
                let cost = topt.moves.len() + hopt.moves.len() + usize::from(fixing);
                if best.as_ref().is_some_and(|p| p.cost <= cost) {
                    continue;
                }
                'pairs: for &(tr, tpol) in &table_vis[ti] {
                    let t_inst = table.get(tr.instance_id).expect("table brick");
                    let tp = lib.shape(t_inst.shape_id).and_then(|s| s.point(tr.point)).expect("valid point");
                    for &(hr, hpol) in &hand_vis[hi] {
                        let hp = hand_shape.point(hr.point).expect("valid point");
                        if hpol == tpol || hp.kind != tp.kind {
                            continue;
                        }
                        let pose = assemble_pose(&hand, hp, t_inst, tp, &topt.camera, &hopt.camera);
                        if collides(&table, &pose, lib, &[]) {
                            continue;
                        }
                        let fix = if !fixing {
                            if !same_pose(&pose, want, lib) {
                                continue;
                            }
                            None
                        } else {
                            let turned = [90, 180, 270].into_iter().find(|&angle| {
                                hand_shape.connection_points.iter().any(|k| same_pose(&rotated_about_point(&pose, k, angle), want, lib))
                            });
                            match turned {
                                Some(a) => Some(a),
                                None => continue,
                            }
                        };
                        best = Some(Placement {
                            cost,
                            table_view: ti,
                            hand_view: hi,
                            table_ref: tr,
                            table_pol: tpol,
                            hand_ref: hr,
                            hand_pol: hpol,
                            fix,
                        });
                        break 'pairs;
                    }
                }
            }
        }
        if best.is_some() {
            break;
        }
    }
    let Some(p) = best else { return Err(PlanError::NoPlacement(b)) };

    let note = format!("line up brick {b}");
    for a in tviews.options[p.table_view].actions(Workspace::Table).collect::<Vec<_>>() {
        execute(env, steps, PlanStep::new(a, Vec::new(), note.clone()))?;
    }
    for a in hviews.options[p.hand_view].actions(Workspace::Hand).collect::<Vec<_>>() {
        execute(env, steps, PlanStep::new(a, Vec::new(), note.clone()))?;
    }
    let obs = env.observation().clone();
    let hand_cursor = visible_cell(&obs.hand_frame, p.hand_ref, p.hand_pol, 1).expect("planned view shows the point");
    let table_cursor = visible_cell(&obs.table_frame, p.table_ref, p.table_pol, 1).expect("planned view shows the point");
    let new_id = env.state().table.next_id().max(1);
    let expected = vec![snap(Workspace::Hand, p.hand_ref, p.hand_pol), snap(Workspace::Table, p.table_ref, p.table_pol)];
    let action = Action::Assemble { hand: hand_cursor, table: table_cursor };
    execute(env, steps, PlanStep::new(action, expected, format!("attach brick {b}")))?;
    if let Some(angle) = p.fix {
        rotate_into_place(env, steps, b, new_id, angle, want, cfg, lib)?;
    }
    Ok(())
}

/// Turn the just-placed brick `id` by `angle` about whichever of its points
/// is visible and lands it on `want`.
#[allow(clippy::too_many_arguments)]
fn rotate_into_place(
    env: &mut Env,
    steps: &mut Vec<PlanStep>,
    b: u32,
    id: u32,
    angle: u32,
    want: &BrickInstance,
    cfg: &PlannerConfig,
    lib: &ShapeLibrary,
) -> Result<(), PlanError> {
    let inst = env.state().table.get(id).expect("brick was just placed").clone();
    let shape = lib.shape(inst.shape_id).expect("known shape");
    let pivots: Vec<_> =
        shape.connection_points.iter().filter(|k| same_pose(&rotated_about_point(&inst, k, angle), want, lib)).collect();
    let views = Views::table(env, cfg);
    let found = views.options.iter().zip(&views.frames).find_map(|(o, f)| {
        pivots.iter().find_map(|k| {
            let r = PointRef { instance_id: id, point: k.index };
            visible_cell(f, r, k.polarity, cfg.visibility_cells).map(|_| (o.clone(), r, k.polarity))
        })
    });
    let Some((option, r, pol)) = found else { return Err(PlanError::NoPlacement(b)) };
    for a in option.actions(Workspace::Table).collect::<Vec<_>>() {
        execute(env, steps, PlanStep::new(a, Vec::new(), format!("find a pivot on brick {b}")))?;
    }
    let cursor: Cursor = visible_cell(&env.observation().table_frame, r, pol, 1).expect("planned view shows the point");
    execute(
        env,
        steps,
        PlanStep::new(Action::RotateBrick { cursor, angle }, vec![snap(Workspace::Table, r, pol)], format!("turn brick {b} by {angle}")),
    )
}

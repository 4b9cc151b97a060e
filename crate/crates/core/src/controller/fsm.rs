use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{
    candidate_update, free_cell_near, plan_viewpoints, CandidateBelief, ControlCommand, ControllerParams, Mode,
};
use crate::belief::{normalize_label, ObservationEvent, ObservationMode};
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::planner::{ActionKind, GlobalAction};
use crate::scene_graph::{LayeredSceneGraph, NodeId};
use crate::world::{Cell, Detection, OccupancyGrid, RobotState};

/// How far from a location node's position its grid cell may be snapped.
const NODE_SNAP_M: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub enum StepOutcome {
    Command(ControlCommand),
    /// The current global action is finished (or none was given); the caller
    /// should supply the next one via [`LocalController::begin_action`].
    ActionDone,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub tick: u64,
    pub mode: Mode,
    pub position: Point2,
    pub action: Option<String>,
    pub command: Option<ControlCommand>,
    pub detections: Vec<Detection>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Dwell {
    samples: u32,
    seen: bool,
}

#[derive(Debug, Clone)]
pub struct LocalController {
    params: ControllerParams,
    target: String,
    mode: Mode,
    action: Option<GlobalAction>,
    waypoints: VecDeque<NodeId>,
    path: VecDeque<Cell>,
    path_goal: Option<Cell>,
    candidate: Option<CandidateBelief>,
    viewpoints: VecDeque<Cell>,
    dwell: Option<Dwell>,
    inspect_goal: Option<Cell>,
    suppressed: Vec<Point2>,
    promotions: usize,
    events: Vec<ObservationEvent>,
    action_log: Vec<GlobalAction>,
}

impl LocalController {
    pub fn new(target_class: &str, params: ControllerParams) -> Self {
        Self {
            params,
            target: normalize_label(target_class),
            mode: Mode::Nav,
            action: None,
            waypoints: VecDeque::new(),
            path: VecDeque::new(),
            path_goal: None,
            candidate: None,
            viewpoints: VecDeque::new(),
            dwell: None,
            inspect_goal: None,
            suppressed: Vec::new(),
            promotions: 0,
            events: Vec::new(),
            action_log: Vec::new(),
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn params(&self) -> &ControllerParams {
        &self.params
    }

    pub fn current_action(&self) -> Option<GlobalAction> {
        self.action
    }

    pub fn candidate(&self) -> Option<&CandidateBelief> {
        self.candidate.as_ref()
    }

    pub fn action_log(&self) -> &[GlobalAction] {
        &self.action_log
    }

    /// Positions of discarded candidates; never re-promoted.
    pub fn suppressed(&self) -> &[Point2] {
        &self.suppressed
    }

    pub fn promotions(&self) -> usize {
        self.promotions
    }

    /// Observation events produced since the last call.
    pub fn take_events(&mut self) -> Vec<ObservationEvent> {
        std::mem::take(&mut self.events)
    }

    /// True when the controller is idle in navigation and wants a global action.
    pub fn needs_action(&self) -> bool {
        self.mode == Mode::Nav && self.action.is_none()
    }

    /// Plans the waypoint queue for `action`: the location-graph path to the
    /// room anchor for a move, the room's coverage tour for a search.
    pub fn begin_action(&mut self, action: GlobalAction, robot: &RobotState, graph: &LayeredSceneGraph) -> Result<()> {
        if graph.room(action.room).is_none() {
            return Err(Error::input("action", format!("unknown room {}", action.room)));
        }
        let waypoints = match action.kind {
            ActionKind::Move => {
                let anchor = graph
                    .room_anchor(action.room)
                    .ok_or_else(|| Error::State(format!("room {} has no location nodes", action.room)))?;
                let start = graph
                    .nearest_location(robot.position)
                    .ok_or_else(|| Error::State("graph has no location nodes".into()))?;
                graph.shortest_path(start, anchor)?.0
            }
            ActionKind::Search => {
                let nodes = graph.room_location_nodes(action.room);
                let start = nodes
                    .iter()
                    .copied()
                    .min_by(|&a, &b| {
                        let da = graph.nodes()[a].position.distance_sq(&robot.position);
                        let db = graph.nodes()[b].position.distance_sq(&robot.position);
                        da.total_cmp(&db).then(a.cmp(&b))
                    })
                    .ok_or_else(|| Error::State(format!("room {} has no location nodes", action.room)))?;
                super::plan_coverage_tour(graph, action.room, start)
            }
        };
        self.action = Some(action);
        self.action_log.push(action);
        self.waypoints = waypoints.into();
        self.path.clear();
        self.path_goal = None;
        Ok(())
    }

    /// Consumes the detections sensed after the previous command and returns
    /// the next command.
    pub fn step(
        &mut self,
        detections: &[Detection],
        robot: &RobotState,
        graph: &LayeredSceneGraph,
        grid: &OccupancyGrid,
    ) -> Result<StepOutcome> {
        match self.mode {
            Mode::Nav => {
                if let Some(det) = self.pick_promotion(detections) {
                    self.promote(det.position, robot, grid);
                    if self.params.initial_existence >= self.params.c_inspect {
                        // Already confident enough: no views needed.
                        self.confirm(graph);
                    }
                }
            }
            Mode::ActiveSearch => self.observe_candidate(detections, robot),
            Mode::Inspect | Mode::Done => {}
        }
        loop {
            match self.mode {
                Mode::Nav => return self.nav_step(robot, graph, grid),
                Mode::ActiveSearch => {
                    if let Some(cmd) = self.active_step(robot, graph, grid) {
                        return Ok(StepOutcome::Command(cmd));
                    }
                }
                Mode::Inspect => return self.inspect_step(robot, grid).map(StepOutcome::Command),
                Mode::Done => {
                    return Ok(StepOutcome::Command(ControlCommand::Finish {
                        position: robot.position,
                    }))
                }
            }
        }
    }

    fn pick_promotion<'a>(&self, detections: &'a [Detection]) -> Option<&'a Detection> {
        detections
            .iter()
            .filter(|d| d.class == self.target && d.confidence >= self.params.c_promote)
            .filter(|d| {
                !self
                    .suppressed
                    .iter()
                    .any(|s| s.distance(&d.position) <= self.params.r_suppress)
            })
            .fold(None, |best: Option<&Detection>, d| match best {
                Some(b) if b.confidence >= d.confidence => Some(b),
                _ => Some(d),
            })
    }

    fn promote(&mut self, at: Point2, robot: &RobotState, grid: &OccupancyGrid) {
        let cand = CandidateBelief::new(at, self.params.initial_existence);
        log::debug!("promoting candidate at ({:.2}, {:.2})", at.x, at.y);
        self.viewpoints = plan_viewpoints(&cand, grid, robot, &self.params).into();
        self.candidate = Some(cand);
        self.dwell = None;
        self.promotions += 1;
        self.mode = Mode::ActiveSearch;
        self.path.clear();
        self.path_goal = None;
    }

    fn observe_candidate(&mut self, detections: &[Detection], robot: &RobotState) {
        let Some(cand) = self.candidate.as_mut() else {
            return;
        };
        let mut seen = false;
        for d in detections.iter().filter(|d| d.class == self.target) {
            if d.position.distance(&cand.estimate) <= self.params.view_gate_m {
                cand.add_observation(d.position);
                seen = true;
            }
        }
        if self.viewpoints.front() == Some(&robot.cell) {
            let dwell = self.dwell.get_or_insert(Dwell {
                samples: 0,
                seen: false,
            });
            dwell.samples += 1;
            dwell.seen |= seen;
        }
    }

    /// Drives the viewpoint loop. Returns `None` after a mode change.
    fn active_step(
        &mut self,
        robot: &RobotState,
        graph: &LayeredSceneGraph,
        grid: &OccupancyGrid,
    ) -> Option<ControlCommand> {
        loop {
            let cand = self.candidate.clone().expect("active search has a candidate");
            if let Some(dwell) = self.dwell {
                if dwell.samples < self.params.dwell_ticks {
                    return Some(ControlCommand::Hold);
                }
                let updated = candidate_update(&cand, dwell.seen);
                log::debug!(
                    "view {} at {:?}: seen={} existence {:.3} -> {:.3}",
                    updated.views_taken,
                    robot.cell,
                    dwell.seen,
                    cand.existence,
                    updated.existence
                );
                self.dwell = None;
                self.viewpoints.pop_front();
                let existence = updated.existence;
                let views = updated.views_taken;
                self.candidate = Some(updated);
                if existence >= self.params.c_inspect {
                    self.confirm(graph);
                    return None;
                }
                if existence <= self.params.c_drop || views >= self.params.max_views {
                    self.drop_candidate();
                    return None;
                }
                if self.viewpoints.is_empty() {
                    let c = self.candidate.as_ref().expect("candidate");
                    self.viewpoints = plan_viewpoints(c, grid, robot, &self.params).into();
                }
                continue;
            }
            let vp = *self.viewpoints.front().expect("viewpoint queue refilled before use");
            if robot.cell == vp {
                self.dwell = Some(Dwell {
                    samples: 0,
                    seen: false,
                });
                return Some(ControlCommand::Hold);
            }
            match self.follow(vp, robot, grid) {
                Some(cmd) => return Some(cmd),
                None => {
                    // Unreachable viewpoint: observe from here instead.
                    self.viewpoints[0] = robot.cell;
                }
            }
        }
    }

    fn confirm(&mut self, graph: &LayeredSceneGraph) {
        let cand = self.candidate.as_ref().expect("candidate");
        let room = graph.room_at(cand.estimate).expect("graph has rooms");
        self.events.push(ObservationEvent::hit(
            room,
            ObservationMode::Search,
            cand.estimate,
            cand.existence,
        ));
        self.mode = Mode::Inspect;
        self.action = None;
        self.waypoints.clear();
        self.path.clear();
        self.path_goal = None;
    }

    fn drop_candidate(&mut self) {
        let cand = self.candidate.take().expect("candidate");
        log::debug!("dropping candidate at ({:.2}, {:.2})", cand.estimate.x, cand.estimate.y);
        self.suppressed.push(cand.estimate);
        self.viewpoints.clear();
        self.dwell = None;
        self.mode = Mode::Nav;
        self.path.clear();
        self.path_goal = None;
    }

    fn nav_step(&mut self, robot: &RobotState, graph: &LayeredSceneGraph, grid: &OccupancyGrid) -> Result<StepOutcome> {
        let Some(action) = self.action else {
            return Ok(StepOutcome::ActionDone);
        };
        loop {
            if self.path.is_empty() && action.kind == ActionKind::Move {
                // Line-of-sight shortcut over intermediate waypoints.
                while self.waypoints.len() >= 2 {
                    let next = node_cell(graph, grid, self.waypoints[1]);
                    if next.is_some_and(|c| grid.line_of_sight(robot.cell, c)) {
                        self.waypoints.pop_front();
                    } else {
                        break;
                    }
                }
            }
            let Some(&wp) = self.waypoints.front() else {
                let mode = match action.kind {
                    ActionKind::Move => ObservationMode::Entry,
                    ActionKind::Search => ObservationMode::Search,
                };
                self.events.push(ObservationEvent::miss(action.room, mode));
                self.action = None;
                return Ok(StepOutcome::ActionDone);
            };
            let Some(goal) = node_cell(graph, grid, wp) else {
                log::warn!("location node {wp} has no free cell nearby; skipping");
                self.waypoints.pop_front();
                continue;
            };
            match self.follow(goal, robot, grid) {
                Some(cmd) => return Ok(StepOutcome::Command(cmd)),
                None => {
                    if robot.cell != goal {
                        log::warn!("location node {wp} unreachable on the grid; skipping");
                    }
                    self.waypoints.pop_front();
                    self.path.clear();
                    self.path_goal = None;
                }
            }
        }
    }

    fn inspect_step(&mut self, robot: &RobotState, grid: &OccupancyGrid) -> Result<ControlCommand> {
        let goal = match self.inspect_goal {
            Some(g) => g,
            None => {
                let est = self.candidate.as_ref().expect("inspect has a candidate").estimate;
                let eps = self.params.epsilon;
                let dist = grid.distances_from(robot.cell, f64::INFINITY);
                let reachable: Vec<Cell> = grid
                    .free_cells_within(est, eps)
                    .into_iter()
                    .filter(|c| dist.get(*c).is_finite())
                    .collect();
                let inner: Vec<Cell> = reachable
                    .iter()
                    .copied()
                    .filter(|c| grid.center(*c).distance(&est) < self.params.inspect_margin * eps)
                    .collect();
                let pool = if inner.is_empty() { &reachable } else { &inner };
                let goal = pool
                    .iter()
                    .copied()
                    .min_by(|a, b| dist.get(*a).total_cmp(&dist.get(*b)).then(a.cmp(b)))
                    .ok_or(Error::InspectUnreachable {
                        x: est.x,
                        y: est.y,
                        epsilon: eps,
                    })?;
                self.inspect_goal = Some(goal);
                goal
            }
        };
        match self.follow(goal, robot, grid) {
            Some(cmd) => Ok(cmd),
            None if robot.cell == goal => {
                self.mode = Mode::Done;
                Ok(ControlCommand::Finish {
                    position: robot.position,
                })
            }
            None => {
                let est = self.candidate.as_ref().expect("candidate").estimate;
                Err(Error::InspectUnreachable {
                    x: est.x,
                    y: est.y,
                    epsilon: self.params.epsilon,
                })
            }
        }
    }

    /// Next grid step toward `goal`, or `None` when already there or unreachable.
    fn follow(&mut self, goal: Cell, robot: &RobotState, grid: &OccupancyGrid) -> Option<ControlCommand> {
        if robot.cell == goal {
            self.path.clear();
            self.path_goal = None;
            return None;
        }
        let stale = self.path_goal != Some(goal) || self.path.front().is_none_or(|c| !c.is_adjacent(&robot.cell));
        if stale {
            self.path = grid.find_path(robot.cell, goal)?.into();
            self.path_goal = Some(goal);
        }
        self.path.pop_front().map(|cell| ControlCommand::StepTo { cell })
    }
}

fn node_cell(graph: &LayeredSceneGraph, grid: &OccupancyGrid, node: NodeId) -> Option<Cell> {
    free_cell_near(grid, graph.nodes()[node].position, NODE_SNAP_M)
}

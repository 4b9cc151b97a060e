//! Finite-state local controller: executes global actions on the grid,
//! confirms tentative detections with a short viewpoint loop, and inspects
//! confirmed targets.

mod fsm;

use serde::{Deserialize, Serialize};

use crate::geometry::Point2;
use crate::scene_graph::{LayeredSceneGraph, NodeId, RoomId};
use crate::world::{Cell, OccupancyGrid, RobotState};

pub use crate::world::ControlCommand;
pub use fsm::{LocalController, StepOutcome, TraceRecord};

/// P(a view detects the candidate | it is real).
pub const VIEW_TRUE_POSITIVE: f64 = 0.9;
/// P(a view detects the candidate | it is spurious).
pub const VIEW_FALSE_POSITIVE: f64 = 0.1;
/// Viewpoint headings around the estimate, degrees.
pub const VIEW_HEADINGS_DEG: [f64; 3] = [0.0, 120.0, 240.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerParams {
    /// Raw detection confidence that opens a candidate.
    pub c_promote: f64,
    /// Candidate existence that triggers inspection.
    pub c_inspect: f64,
    /// Candidate existence below which it is discarded.
    pub c_drop: f64,
    /// Inspect radius, meters.
    pub epsilon: f64,
    pub r_view: f64,
    pub r_suppress: f64,
    /// Existence assigned to a freshly promoted candidate.
    pub initial_existence: f64,
    /// Sensing ticks per view.
    pub dwell_ticks: u32,
    /// A detection counts toward the candidate when within this distance of the estimate.
    pub view_gate_m: f64,
    /// Views before an undecided candidate is abandoned.
    pub max_views: u32,
    /// Inspection aims for cells within this fraction of `epsilon` of the estimate when reachable.
    pub inspect_margin: f64,
}

impl Default for ControllerParams {
    fn default() -> Self {
        Self {
            c_promote: 0.3,
            c_inspect: 0.9,
            c_drop: 0.05,
            epsilon: 1.0,
            r_view: 2.0,
            r_suppress: 1.0,
            initial_existence: 0.4,
            dwell_ticks: 5,
            view_gate_m: 1.0,
            max_views: 9,
            inspect_margin: 0.5,
        }
    }
}

impl ControllerParams {
    pub fn validate(&self) -> crate::Result<()> {
        let err = |f: &str, m: &str| Err(crate::Error::input(format!("controller.{f}"), m));
        for (f, v) in [
            ("c_promote", self.c_promote),
            ("c_inspect", self.c_inspect),
            ("c_drop", self.c_drop),
            ("initial_existence", self.initial_existence),
            ("inspect_margin", self.inspect_margin),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return err(f, "must lie in [0, 1]");
            }
        }
        if self.c_drop >= self.c_inspect {
            return err("c_drop", "must be below c_inspect");
        }
        for (f, v) in [
            ("epsilon", self.epsilon),
            ("r_view", self.r_view),
            ("view_gate_m", self.view_gate_m),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return err(f, "must be positive");
            }
        }
        if self.r_suppress.is_nan() || self.r_suppress < 0.0 {
            return err("r_suppress", "must be nonnegative");
        }
        if self.dwell_ticks == 0 || self.max_views == 0 {
            return err("dwell_ticks", "dwell_ticks and max_views must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Nav,
    ActiveSearch,
    Inspect,
    Done,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateBelief {
    /// Running mean of the detections attributed to the candidate.
    pub estimate: Point2,
    pub existence: f64,
    pub views_taken: u32,
    pub observations: u32,
}

impl CandidateBelief {
    pub fn new(first: Point2, existence: f64) -> Self {
        Self {
            estimate: first,
            existence,
            views_taken: 0,
            observations: 1,
        }
    }

    pub fn add_observation(&mut self, p: Point2) {
        self.observations += 1;
        let n = self.observations as f64;
        self.estimate = Point2::new(
            self.estimate.x + (p.x - self.estimate.x) / n,
            self.estimate.y + (p.y - self.estimate.y) / n,
        );
    }
}

/// Bayes update of candidate existence after one view.
pub fn candidate_update(c: &CandidateBelief, viewed: bool) -> CandidateBelief {
    let (l_real, l_spurious) = if viewed {
        (VIEW_TRUE_POSITIVE, VIEW_FALSE_POSITIVE)
    } else {
        (1.0 - VIEW_TRUE_POSITIVE, 1.0 - VIEW_FALSE_POSITIVE)
    };
    let num = l_real * c.existence;
    let denom = num + l_spurious * (1.0 - c.existence);
    CandidateBelief {
        existence: if denom > 0.0 { num / denom } else { c.existence },
        views_taken: c.views_taken + 1,
        ..c.clone()
    }
}

/// Greedy coverage order over a room's location nodes from `start`.
pub fn plan_coverage_tour(graph: &LayeredSceneGraph, room: RoomId, start: NodeId) -> Vec<NodeId> {
    graph.coverage_tour(room, start)
}

/// The free cell nearest to `p` within `radius`, if any (ties to the lowest cell).
pub fn free_cell_near(grid: &OccupancyGrid, p: Point2, radius: f64) -> Option<Cell> {
    let c = grid.cell_of(p);
    if grid.is_free(c) {
        return Some(c);
    }
    grid.free_cells_within(p, radius).into_iter().min_by(|a, b| {
        grid.center(*a)
            .distance(&p)
            .total_cmp(&grid.center(*b).distance(&p))
            .then(a.cmp(b))
    })
}

/// Up to three viewpoints around the candidate, one per heading: the
/// reachable free cell with line of sight to the estimate that lies nearest
/// the ideal ring point, sorted by path cost from the robot. Falls back to
/// three views from the robot's cell.
pub fn plan_viewpoints(
    candidate: &CandidateBelief,
    grid: &OccupancyGrid,
    robot: &RobotState,
    params: &ControllerParams,
) -> Vec<Cell> {
    let fallback = vec![robot.cell; VIEW_HEADINGS_DEG.len()];
    let est = candidate.estimate;
    let Some(target) = free_cell_near(grid, est, params.view_gate_m) else {
        return fallback;
    };
    let reach = 3.0 * (robot.position.distance(&est) + params.r_view) + 5.0;
    let dist = grid.distances_from(robot.cell, reach);
    let mut picks: Vec<(f64, Cell)> = Vec::new();
    for deg in VIEW_HEADINGS_DEG {
        let th = deg.to_radians();
        let ideal = Point2::new(est.x + params.r_view * th.cos(), est.y + params.r_view * th.sin());
        let best = grid
            .free_cells_within(ideal, params.r_view)
            .into_iter()
            .filter(|c| dist.get(*c).is_finite() && grid.line_of_sight(*c, target))
            .min_by(|a, b| {
                grid.center(*a)
                    .distance(&ideal)
                    .total_cmp(&grid.center(*b).distance(&ideal))
                    .then(a.cmp(b))
            });
        if let Some(c) = best {
            if !picks.iter().any(|(_, p)| *p == c) {
                picks.push((dist.get(c), c));
            }
        }
    }
    if picks.is_empty() {
        return fallback;
    }
    picks.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    picks.into_iter().map(|(_, c)| c).collect()
}

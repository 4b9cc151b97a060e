//! Room-level search MDP and its value-iteration solution.
//!
//! States are rooms plus an absorbing goal. From room `i` the robot may
//! search `i` (stay in `i` unless the object turns up) or move to any other
//! room `j` (land in `j` unless the object is spotted on entry). Costs are
//! meters, so the value function is expected remaining travel distance.

mod solve;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::belief::{RoomBelief, D_SEARCH};
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::scene_graph::{CostMatrix, LayeredSceneGraph, RoomId};

pub use solve::{value_iteration, Policy, ValueFunction, DEFAULT_MAX_ITER, DEFAULT_TOL};

/// Floor and ceiling margin on goal-transition probabilities.
pub const PROB_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Search,
    Move,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GlobalAction {
    pub kind: ActionKind,
    pub room: RoomId,
}

impl GlobalAction {
    pub fn search(room: RoomId) -> Self {
        Self {
            kind: ActionKind::Search,
            room,
        }
    }

    pub fn move_to(room: RoomId) -> Self {
        Self {
            kind: ActionKind::Move,
            room,
        }
    }
}

impl fmt::Display for GlobalAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ActionKind::Search => write!(f, "{}(S)", self.room),
            ActionKind::Move => write!(f, "{}", self.room),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MdpModel {
    room_ids: Vec<RoomId>,
    move_cost: Vec<Vec<f64>>,
    search_cost: Vec<f64>,
    /// P(goal | move into room j), indexed by destination.
    goal_move: Vec<f64>,
    /// P(goal | search room i).
    goal_search: Vec<f64>,
}

impl MdpModel {
    /// Assembles a model from explicit parts. Probabilities are taken as given
    /// (no flooring); `build_mdp` is the usual entry point.
    pub fn from_parts(
        room_ids: Vec<RoomId>,
        move_cost: Vec<Vec<f64>>,
        search_cost: Vec<f64>,
        goal_move: Vec<f64>,
        goal_search: Vec<f64>,
    ) -> Result<Self> {
        let n = room_ids.len();
        if n == 0 {
            return Err(Error::input("rooms", "the model needs at least one room"));
        }
        if move_cost.len() != n || move_cost.iter().any(|row| row.len() != n) {
            return Err(Error::input("move_cost", format!("expected a {n}x{n} matrix")));
        }
        for (name, v) in [
            ("search_cost", &search_cost),
            ("goal_move", &goal_move),
            ("goal_search", &goal_search),
        ] {
            if v.len() != n {
                return Err(Error::input(name, format!("expected {n} entries, got {}", v.len())));
            }
        }
        let bad_cost = |c: &f64| !(c.is_finite() && *c >= 0.0);
        if move_cost.iter().flatten().any(bad_cost) || search_cost.iter().any(bad_cost) {
            return Err(Error::input("costs", "costs must be finite and nonnegative"));
        }
        let bad_prob = |p: &f64| !(0.0..=1.0).contains(p);
        if goal_move.iter().chain(&goal_search).any(bad_prob) {
            return Err(Error::input("goal_prob", "probabilities must lie in [0, 1]"));
        }
        Ok(Self {
            room_ids,
            move_cost,
            search_cost,
            goal_move,
            goal_search,
        })
    }

    pub fn len(&self) -> usize {
        self.room_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.room_ids.is_empty()
    }

    pub fn room_ids(&self) -> &[RoomId] {
        &self.room_ids
    }

    pub fn move_cost(&self, from: usize, to: usize) -> f64 {
        self.move_cost[from][to]
    }

    pub fn search_cost(&self, room: usize) -> f64 {
        self.search_cost[room]
    }

    pub fn goal_prob_move(&self, dest: usize) -> f64 {
        self.goal_move[dest]
    }

    pub fn goal_prob_search(&self, room: usize) -> f64 {
        self.goal_search[room]
    }

    /// Actions available in room index `i`, in tie-break order: search
    /// first, then moves by ascending room index.
    pub fn actions(&self, i: usize) -> impl Iterator<Item = (ActionKind, usize)> + '_ {
        std::iter::once((ActionKind::Search, i))
            .chain((0..self.len()).filter(move |&j| j != i).map(|j| (ActionKind::Move, j)))
    }

    /// Expected cost of taking `(kind, target)` from room `i` and then
    /// following `values`.
    pub fn q_value(&self, i: usize, kind: ActionKind, target: usize, values: &[f64]) -> f64 {
        match kind {
            ActionKind::Search => self.search_cost[i] + (1.0 - self.goal_search[i]) * values[i],
            ActionKind::Move => self.move_cost[i][target] + (1.0 - self.goal_move[target]) * values[target],
        }
    }

    pub fn to_action(&self, kind: ActionKind, target: usize) -> GlobalAction {
        GlobalAction {
            kind,
            room: self.room_ids[target],
        }
    }
}

/// Builds the room MDP: entering room `j` finds the object with probability
/// `p_easy * P(j)`, searching room `i` with `P(i) * D_SEARCH`, both clamped to
/// `[PROB_FLOOR, 1 - PROB_FLOOR]`.
pub fn build_mdp(costs: &CostMatrix, belief: &RoomBelief, p_easy: f64) -> Result<MdpModel> {
    if costs.is_empty() {
        return Err(Error::input("rooms", "the cost matrix has no rooms"));
    }
    if !(0.0..=1.0).contains(&p_easy) {
        return Err(Error::input("p_easy", format!("{p_easy} outside [0, 1]")));
    }
    let clamp = |p: f64| p.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR);
    let mut goal_move = Vec::with_capacity(costs.len());
    let mut goal_search = Vec::with_capacity(costs.len());
    for &room in &costs.room_ids {
        let p = belief
            .prob(room)
            .ok_or_else(|| Error::input("belief", format!("belief has no entry for room {room}")))?;
        goal_move.push(clamp(p_easy * p));
        goal_search.push(clamp(p * D_SEARCH));
    }
    MdpModel::from_parts(
        costs.room_ids.clone(),
        costs.move_cost.clone(),
        costs.search_cost.clone(),
        goal_move,
        goal_search,
    )
}

/// What a global planner may look at when choosing the next action.
pub struct PlanContext<'a> {
    pub graph: &'a LayeredSceneGraph,
    pub costs: &'a CostMatrix,
    pub belief: &'a RoomBelief,
    pub robot: Point2,
}

impl PlanContext<'_> {
    /// Room the robot is considered to be in.
    pub fn current_room(&self) -> Result<RoomId> {
        self.graph
            .nearest_room(self.robot)
            .ok_or_else(|| Error::State("graph has no location nodes".into()))
    }
}

pub trait GlobalPlanner {
    fn name(&self) -> &'static str;

    fn next_action(&mut self, ctx: &PlanContext<'_>) -> Result<GlobalAction>;
}

/// Receding-horizon MDP planner: re-solves the room MDP on the current
/// belief at every call.
#[derive(Debug, Clone)]
pub struct SeekPlanner {
    pub p_easy: f64,
    pub tol: f64,
    pub max_iter: usize,
    last: Option<(ValueFunction, Policy)>,
}

impl SeekPlanner {
    pub fn new(p_easy: f64) -> Self {
        Self {
            p_easy,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            last: None,
        }
    }

    /// The most recent solution, if any.
    pub fn last_solution(&self) -> Option<&(ValueFunction, Policy)> {
        self.last.as_ref()
    }
}

impl GlobalPlanner for SeekPlanner {
    fn name(&self) -> &'static str {
        "seek"
    }

    fn next_action(&mut self, ctx: &PlanContext<'_>) -> Result<GlobalAction> {
        let model = build_mdp(ctx.costs, ctx.belief, self.p_easy)?;
        let (values, policy) = value_iteration(&model, self.tol, self.max_iter)?;
        let action = policy.next_action(ctx.graph, ctx.robot)?;
        self.last = Some((values, policy));
        Ok(action)
    }
}

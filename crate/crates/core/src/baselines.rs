//! Reference room-selection planners: semantic utility, greedy coverage and
//! random order. Each selects a room, moves there, then searches it.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::belief::{normalize_label, PriorTable};
use crate::error::{Error, Result};
use crate::planner::{GlobalAction, GlobalPlanner, PlanContext};
use crate::scene_graph::{CostMatrix, LayeredSceneGraph, RoomId};

pub const SEMDIST_SCHEMA: &str = "seek-semdist/1";
/// Lower bound on semantic distance.
pub const SEMDIST_FLOOR: f64 = 0.05;
/// Used when the table has no entry for a room type.
pub const SEMDIST_MISSING: f64 = 1.0;
/// Lower bound on travel distance in the utility, so the current room has finite utility.
pub const UTILITY_DIST_FLOOR_M: f64 = 0.5;

/// Semantic distance between one object class and each room type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticDistance {
    pub schema: String,
    pub object: String,
    pub room_types: BTreeMap<String, f64>,
}

impl SemanticDistance {
    /// `1 - P(object | room type)` for every room type of the table.
    pub fn from_prior(table: &PriorTable, object_class: &str) -> Self {
        let room_types = table
            .room_types()
            .iter()
            .map(|t| (t.clone(), (1.0 - table.room_prob(object_class, t)).max(SEMDIST_FLOOR)))
            .collect();
        Self {
            schema: SEMDIST_SCHEMA.into(),
            object: normalize_label(object_class),
            room_types,
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text).map_err(|e| Error::json(Path::new("<semdist>"), e))?;
        doc.validated()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let doc: Self = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        doc.validated()
    }

    fn validated(mut self) -> Result<Self> {
        if self.schema != SEMDIST_SCHEMA {
            return Err(Error::input(
                "schema",
                format!("expected '{SEMDIST_SCHEMA}', got '{}'", self.schema),
            ));
        }
        for (t, d) in &self.room_types {
            if !(d.is_finite() && *d >= 0.0) {
                return Err(Error::input(
                    format!("room_types.{t}"),
                    "distance must be finite and nonnegative",
                ));
            }
        }
        self.object = normalize_label(&self.object);
        self.room_types = self
            .room_types
            .into_iter()
            .map(|(k, v)| (normalize_label(&k), v))
            .collect();
        Ok(self)
    }

    /// Floored distance for a room label, or `None` when the table lacks it.
    pub fn get(&self, room_label: &str) -> Option<f64> {
        self.room_types
            .get(&normalize_label(room_label))
            .map(|d| d.max(SEMDIST_FLOOR))
    }
}

/// Tracks which rooms have been selected; resets once every room has been.
#[derive(Debug, Clone, Default)]
pub struct BaselineState {
    pub selected: BTreeSet<RoomId>,
    pending_search: Option<RoomId>,
}

impl BaselineState {
    fn unselected(&mut self, costs: &CostMatrix) -> Vec<RoomId> {
        if costs.room_ids.iter().all(|r| self.selected.contains(r)) {
            self.selected.clear();
        }
        costs
            .room_ids
            .iter()
            .copied()
            .filter(|r| !self.selected.contains(r))
            .collect()
    }

    /// Emits the pending search, or selects `room` and emits a move to it
    /// (or its search directly when the robot is already there).
    fn emit(&mut self, room: RoomId, current: RoomId) -> GlobalAction {
        self.selected.insert(room);
        if room == current {
            GlobalAction::search(room)
        } else {
            self.pending_search = Some(room);
            GlobalAction::move_to(room)
        }
    }
}

fn move_cost(costs: &CostMatrix, from: RoomId, to: RoomId) -> Result<f64> {
    let i = costs
        .index_of(from)
        .ok_or_else(|| Error::State(format!("room {from} missing from cost matrix")))?;
    let j = costs
        .index_of(to)
        .ok_or_else(|| Error::State(format!("room {to} missing from cost matrix")))?;
    Ok(costs.move_cost[i][j])
}

/// `1 / (dist_sem * dist)` with both factors floored.
pub fn semantic_utility(dist_sem: f64, dist_m: f64) -> f64 {
    1.0 / (dist_sem.max(SEMDIST_FLOOR) * dist_m.max(UTILITY_DIST_FLOOR_M))
}

#[derive(Debug, Clone)]
pub struct SemanticUtilityPlanner {
    pub table: SemanticDistance,
    pub state: BaselineState,
    warned: BTreeSet<String>,
}

impl SemanticUtilityPlanner {
    pub fn new(table: SemanticDistance) -> Self {
        Self {
            table,
            state: BaselineState::default(),
            warned: BTreeSet::new(),
        }
    }

    fn dist_sem(&mut self, graph: &LayeredSceneGraph, room: RoomId) -> f64 {
        let label = graph.room(room).map(|r| r.label.clone()).unwrap_or_default();
        match self.table.get(&label) {
            Some(d) => d,
            None => {
                if self.warned.insert(label.clone()) {
                    log::warn!("no semantic distance for room type '{label}'; using {SEMDIST_MISSING}");
                }
                SEMDIST_MISSING
            }
        }
    }
}

impl GlobalPlanner for SemanticUtilityPlanner {
    fn name(&self) -> &'static str {
        "semantic_utility"
    }

    fn next_action(&mut self, ctx: &PlanContext<'_>) -> Result<GlobalAction> {
        if let Some(r) = self.state.pending_search.take() {
            return Ok(GlobalAction::search(r));
        }
        let current = ctx.current_room()?;
        let mut best: Option<(f64, RoomId)> = None;
        for room in self.state.unselected(ctx.costs) {
            let u = semantic_utility(self.dist_sem(ctx.graph, room), move_cost(ctx.costs, current, room)?);
            if best.is_none_or(|(bu, _)| u > bu) {
                best = Some((u, room));
            }
        }
        let (_, room) = best.ok_or_else(|| Error::State("no rooms to select".into()))?;
        Ok(self.state.emit(room, current))
    }
}

#[derive(Debug, Clone, Default)]
pub struct CoveragePlanner {
    pub state: BaselineState,
}

impl GlobalPlanner for CoveragePlanner {
    fn name(&self) -> &'static str {
        "coverage"
    }

    fn next_action(&mut self, ctx: &PlanContext<'_>) -> Result<GlobalAction> {
        if let Some(r) = self.state.pending_search.take() {
            return Ok(GlobalAction::search(r));
        }
        let current = ctx.current_room()?;
        let mut best: Option<(f64, RoomId)> = None;
        for room in self.state.unselected(ctx.costs) {
            let d = move_cost(ctx.costs, current, room)?;
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, room));
            }
        }
        let (_, room) = best.ok_or_else(|| Error::State("no rooms to select".into()))?;
        Ok(self.state.emit(room, current))
    }
}

/// Visits rooms in a permutation drawn once at construction.
#[derive(Debug, Clone)]
pub struct RandomPlanner {
    order: Vec<RoomId>,
    next: usize,
    pending_search: Option<RoomId>,
}

impl RandomPlanner {
    pub fn new<R: Rng + ?Sized>(room_ids: &[RoomId], rng: &mut R) -> Self {
        let mut order = room_ids.to_vec();
        order.shuffle(rng);
        Self {
            order,
            next: 0,
            pending_search: None,
        }
    }

    pub fn order(&self) -> &[RoomId] {
        &self.order
    }
}

impl GlobalPlanner for RandomPlanner {
    fn name(&self) -> &'static str {
        "random"
    }

    fn next_action(&mut self, ctx: &PlanContext<'_>) -> Result<GlobalAction> {
        if let Some(r) = self.pending_search.take() {
            return Ok(GlobalAction::search(r));
        }
        if self.order.is_empty() {
            return Err(Error::State("no rooms to select".into()));
        }
        let room = self.order[self.next % self.order.len()];
        self.next += 1;
        if room == ctx.current_room()? {
            Ok(GlobalAction::search(room))
        } else {
            self.pending_search = Some(room);
            Ok(GlobalAction::move_to(room))
        }
    }
}

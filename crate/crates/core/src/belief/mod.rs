//! Relational semantic knowledge and the per-room target belief.
//!
//! Each room carries an independent Bernoulli probability of yielding the
//! target; entries are never renormalized against each other.

mod prior;
mod store;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::geometry::Point2;
use crate::scene_graph::{LayeredSceneGraph, RoomId};

pub use prior::{normalize_label, ObjectPrior, PriorTable, UNKNOWN};
pub use store::{Counts, PriorStore};

/// Pseudo-count weighting the prior table against observed counts.
pub const PRIOR_PSEUDO_COUNT: f64 = 5.0;
/// P(object seen during a full coverage search | object in room).
pub const D_SEARCH: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationMode {
    /// Passing into the room while executing a move.
    Entry,
    /// After a coverage search of the room.
    Search,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationEvent {
    pub room: RoomId,
    pub mode: ObservationMode,
    pub detected: bool,
    /// Set iff `detected`.
    pub position: Option<Point2>,
    /// Set iff `detected`.
    pub confidence: Option<f64>,
}

impl ObservationEvent {
    pub fn miss(room: RoomId, mode: ObservationMode) -> Self {
        Self {
            room,
            mode,
            detected: false,
            position: None,
            confidence: None,
        }
    }

    pub fn hit(room: RoomId, mode: ObservationMode, position: Point2, confidence: f64) -> Self {
        Self {
            room,
            mode,
            detected: true,
            position: Some(position),
            confidence: Some(confidence),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoomBelief {
    pub object_class: String,
    pub room_ids: Vec<RoomId>,
    pub probs: Vec<f64>,
    /// The object had no row in the prior table; the "unknown" row was used.
    pub low_confidence: bool,
}

impl RoomBelief {
    /// Count-blended prior for every room of `graph`.
    pub fn init(table: &PriorTable, graph: &LayeredSceneGraph, store: &PriorStore, object_class: &str) -> Self {
        let low_confidence = !table.knows(object_class);
        if low_confidence {
            log::warn!("object '{object_class}' not in prior table; using the unknown row");
        }
        let room_ids = graph.room_ids();
        let probs = graph
            .rooms()
            .iter()
            .map(|room| {
                let prior = table.room_prob(object_class, &room.label);
                let c = store.counts(object_class, room.id);
                (c.found as f64 + PRIOR_PSEUDO_COUNT * prior) / (c.searched as f64 + PRIOR_PSEUDO_COUNT)
            })
            .collect();
        Self {
            object_class: object_class.to_string(),
            room_ids,
            probs,
            low_confidence,
        }
    }

    pub fn prob(&self, room: RoomId) -> Option<f64> {
        self.index_of(room).map(|i| self.probs[i])
    }

    pub fn index_of(&self, room: RoomId) -> Option<usize> {
        self.room_ids.iter().position(|&r| r == room)
    }

    /// Naive-Bayes update of the observed room only. Unknown rooms are ignored.
    pub fn update(&mut self, event: &ObservationEvent, table: &PriorTable) {
        let Some(i) = self.index_of(event.room) else {
            log::warn!("observation for unknown room {}", event.room);
            return;
        };
        let d = match event.mode {
            ObservationMode::Search => D_SEARCH,
            ObservationMode::Entry => table.p_easy(&self.object_class),
        };
        self.probs[i] = posterior(self.probs[i], d, event.detected);
    }

    /// Mean squared error against the indicator of rooms holding an instance.
    pub fn brier_score(&self, truth: &BTreeSet<RoomId>) -> f64 {
        let n = self.probs.len();
        if n == 0 {
            return 0.0;
        }
        let sum: f64 = self
            .room_ids
            .iter()
            .zip(&self.probs)
            .map(|(r, p)| {
                let y = if truth.contains(r) { 1.0 } else { 0.0 };
                (p - y) * (p - y)
            })
            .sum();
        sum / n as f64
    }
}

/// Posterior room probability after one observation with detection
/// likelihood `d` and zero false-positive rate.
pub fn posterior(p: f64, d: f64, detected: bool) -> f64 {
    if detected {
        return 1.0;
    }
    let miss = p * (1.0 - d);
    let denom = miss + (1.0 - p);
    if denom <= 0.0 {
        // p = 1 and d = 1: the observation contradicts certainty; keep the prior.
        return p;
    }
    miss / denom
}

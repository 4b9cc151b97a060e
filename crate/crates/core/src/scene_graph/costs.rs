use serde::{Deserialize, Serialize};

use super::{LayeredSceneGraph, NodeId, RoomId};
use crate::error::{Error, Result};

/// Room-level cost look-up table, meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostMatrix {
    pub room_ids: Vec<RoomId>,
    /// Shortest travel between room anchors.
    pub move_cost: Vec<Vec<f64>>,
    /// Greedy coverage-tour length inside each room.
    pub search_cost: Vec<f64>,
}

impl CostMatrix {
    pub fn len(&self) -> usize {
        self.room_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.room_ids.is_empty()
    }

    pub fn index_of(&self, room: RoomId) -> Option<usize> {
        self.room_ids.iter().position(|&r| r == room)
    }
}

/// Greedy nearest-neighbor ordering of `nodes` from `start` (Euclidean legs,
/// ties to the lowest id). `start` is always first.
pub fn greedy_tour(graph: &LayeredSceneGraph, start: NodeId, nodes: &[NodeId]) -> Vec<NodeId> {
    let mut remaining: Vec<NodeId> = nodes.iter().copied().filter(|&n| n != start).collect();
    remaining.sort_unstable();
    remaining.dedup();
    let mut tour = Vec::with_capacity(remaining.len() + 1);
    tour.push(start);
    let mut cur = start;
    while !remaining.is_empty() {
        let here = graph.nodes[cur].position;
        let (k, _) = remaining
            .iter()
            .enumerate()
            .map(|(k, &n)| (k, graph.nodes[n].position.distance(&here)))
            .fold(
                (usize::MAX, f64::INFINITY),
                |best, cand| if cand.1 < best.1 { cand } else { best },
            );
        cur = remaining.remove(k);
        tour.push(cur);
    }
    tour
}

/// Sum of Euclidean legs along a tour.
pub fn tour_length(graph: &LayeredSceneGraph, tour: &[NodeId]) -> f64 {
    tour.windows(2)
        .map(|w| graph.nodes[w[0]].position.distance(&graph.nodes[w[1]].position))
        .sum()
}

impl LayeredSceneGraph {
    /// Coverage tour of a room starting at its location node `start`.
    pub fn coverage_tour(&self, room: RoomId, start: NodeId) -> Vec<NodeId> {
        greedy_tour(self, start, &self.room_location_nodes(room))
    }

    pub fn room_cost_matrix(&self) -> Result<CostMatrix> {
        if self.spacing.is_none() {
            return Err(Error::State("room costs need sampled locations".into()));
        }
        let room_ids = self.room_ids();
        let n = room_ids.len();
        let anchors: Vec<NodeId> = room_ids
            .iter()
            .map(|&r| {
                self.room_anchor(r)
                    .ok_or_else(|| Error::geometry(format!("room {r} has no location nodes")))
            })
            .collect::<Result<_>>()?;
        let mut move_cost = vec![vec![0.0; n]; n];
        let mut unreachable = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                match self.shortest_path(anchors[i], anchors[j]) {
                    Ok((_, len)) => {
                        move_cost[i][j] = len;
                        move_cost[j][i] = len;
                    }
                    Err(Error::NoPath { .. }) => unreachable.push((room_ids[i], room_ids[j])),
                    Err(e) => return Err(e),
                }
            }
        }
        if !unreachable.is_empty() {
            let pairs: Vec<String> = unreachable.iter().map(|(a, b)| format!("{a}-{b}")).collect();
            return Err(Error::no_path(format!("unreachable room pairs: {}", pairs.join(", "))));
        }
        let search_cost = room_ids
            .iter()
            .zip(&anchors)
            .map(|(&r, &a)| tour_length(self, &self.coverage_tour(r, a)))
            .collect();
        Ok(CostMatrix {
            room_ids,
            move_cost,
            search_cost,
        })
    }
}

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{LayeredSceneGraph, NodeId, LAYER_LOCATION};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
struct Frontier {
    f: f64,
    g: f64,
    node: NodeId,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    // Min-heap on f, then lower node id.
    fn cmp(&self, other: &Self) -> Ordering {
        other.f.total_cmp(&self.f).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl LayeredSceneGraph {
    /// A* over the layer-1 graph with a straight-line heuristic.
    /// Returns the node sequence and the summed edge length.
    pub fn shortest_path(&self, from: NodeId, to: NodeId) -> Result<(Vec<NodeId>, f64)> {
        for (name, id) in [("from", from), ("to", to)] {
            match self.nodes.get(id) {
                Some(n) if n.layer == LAYER_LOCATION => {}
                _ => return Err(Error::input(name, format!("node {id} is not a layer-1 node"))),
            }
        }
        if from == to {
            return Ok((vec![from], 0.0));
        }
        let goal = self.nodes[to].position;
        let h = |n: NodeId| self.nodes[n].position.distance(&goal);
        let mut best = vec![f64::INFINITY; self.nodes.len()];
        let mut came_from = vec![usize::MAX; self.nodes.len()];
        let mut closed = vec![false; self.nodes.len()];
        let mut open = BinaryHeap::new();
        best[from] = 0.0;
        open.push(Frontier {
            f: h(from),
            g: 0.0,
            node: from,
        });
        while let Some(Frontier { g, node, .. }) = open.pop() {
            if closed[node] {
                continue;
            }
            closed[node] = true;
            if node == to {
                let mut path = vec![to];
                let mut cur = to;
                while cur != from {
                    cur = came_from[cur];
                    path.push(cur);
                }
                path.reverse();
                let length = path
                    .windows(2)
                    .map(|w| self.edge_length(w[0], w[1]).expect("path follows edges"))
                    .sum();
                return Ok((path, length));
            }
            for &(next, len) in &self.adjacency[node] {
                if self.nodes[next].layer != LAYER_LOCATION || closed[next] {
                    continue;
                }
                let g2 = g + len;
                if g2 < best[next] {
                    best[next] = g2;
                    came_from[next] = node;
                    open.push(Frontier {
                        f: g2 + h(next),
                        g: g2,
                        node: next,
                    });
                }
            }
        }
        Err(Error::no_path(format!("node {to} is unreachable from node {from}")))
    }

    /// Length of the shortest intra-layer edge joining `a` and `b`.
    pub fn edge_length(&self, a: NodeId, b: NodeId) -> Option<f64> {
        self.adjacency
            .get(a)?
            .iter()
            .filter(|(m, _)| *m == b)
            .map(|&(_, l)| l)
            .min_by(f64::total_cmp)
    }
}

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ActionKind, GlobalAction, MdpModel};
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::scene_graph::{LayeredSceneGraph, RoomId};

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// Expected cost-to-go per room; the goal state is implicitly zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueFunction {
    pub room_ids: Vec<RoomId>,
    pub values: Vec<f64>,
}

impl ValueFunction {
    pub fn get(&self, room: RoomId) -> Option<f64> {
        self.room_ids.iter().position(|&r| r == room).map(|i| self.values[i])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub room_ids: Vec<RoomId>,
    pub actions: Vec<GlobalAction>,
    pub iterations: usize,
    pub residual: f64,
}

impl Policy {
    pub fn action(&self, room: RoomId) -> Option<GlobalAction> {
        self.room_ids.iter().position(|&r| r == room).map(|i| self.actions[i])
    }

    /// The stored action of the room nearest to the robot.
    pub fn next_action(&self, graph: &LayeredSceneGraph, robot: Point2) -> Result<GlobalAction> {
        let room = graph
            .nearest_room(robot)
            .ok_or_else(|| Error::State("graph has no location nodes".into()))?;
        self.action(room)
            .ok_or_else(|| Error::State(format!("policy has no entry for room {room}")))
    }

    /// Diagnostic dump keyed by room id.
    pub fn to_json(&self, values: &ValueFunction) -> serde_json::Value {
        let rooms: BTreeMap<String, serde_json::Value> = self
            .room_ids
            .iter()
            .zip(&self.actions)
            .map(|(r, a)| {
                (
                    r.to_string(),
                    serde_json::json!({
                        "value_m": values.get(*r),
                        "action": a.kind,
                        "target": a.room,
                    }),
                )
            })
            .collect();
        serde_json::json!({
            "iterations": self.iterations,
            "residual": self.residual,
            "rooms": rooms,
        })
    }
}

/// Greedy action and its Bellman value for room `i`. Ties keep the earlier
/// action in [`MdpModel::actions`] order.
fn greedy(model: &MdpModel, values: &[f64], i: usize) -> (f64, ActionKind, usize) {
    let mut best = (f64::INFINITY, ActionKind::Search, i);
    for (kind, target) in model.actions(i) {
        let q = model.q_value(i, kind, target, values);
        if q < best.0 {
            best = (q, kind, target);
        }
    }
    best
}

/// Undiscounted stochastic-shortest-path value iteration from `J = 0`,
/// stopping once the sup-norm change drops below `tol`.
pub fn value_iteration(model: &MdpModel, tol: f64, max_iter: usize) -> Result<(ValueFunction, Policy)> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::input("tol", "tolerance must be positive"));
    }
    if let Some(i) = (0..model.len()).find(|&i| model.goal_prob_search(i) <= 0.0) {
        return Err(Error::input(
            format!("goal_prob_search[{}]", model.room_ids()[i]),
            "every room needs a positive search success probability",
        ));
    }
    let n = model.len();
    let mut values = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        residual = 0.0;
        for (i, slot) in next.iter_mut().enumerate() {
            *slot = greedy(model, &values, i).0;
            residual = f64::max(residual, (*slot - values[i]).abs());
        }
        std::mem::swap(&mut values, &mut next);
        if residual < tol {
            break;
        }
    }
    if residual >= tol {
        return Err(Error::NonConvergence { iterations, residual });
    }
    let actions = (0..n)
        .map(|i| {
            let (_, kind, target) = greedy(model, &values, i);
            model.to_action(kind, target)
        })
        .collect();
    let room_ids = model.room_ids().to_vec();
    Ok((
        ValueFunction {
            room_ids: room_ids.clone(),
            values,
        },
        Policy {
            room_ids,
            actions,
            iterations,
            residual,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_room_worked_example() {
        let m = MdpModel::from_parts(
            vec![0, 1],
            vec![vec![0.0, 5.0], vec![5.0, 0.0]],
            vec![10.0, 10.0],
            vec![0.0, 0.0],
            vec![0.5, 1.0],
        )
        .unwrap();
        let (v, p) = value_iteration(&m, 1e-9, 10_000).unwrap();
        assert_eq!(v.values, vec![15.0, 10.0]);
        assert_eq!(p.actions, vec![GlobalAction::move_to(1), GlobalAction::search(1)]);
    }

    #[test]
    fn non_convergence_reports_residual() {
        let m = MdpModel::from_parts(vec![0], vec![vec![0.0]], vec![1.0], vec![0.0], vec![0.001]).unwrap();
        match value_iteration(&m, 1e-9, 10) {
            Err(Error::NonConvergence { iterations, residual }) => {
                assert_eq!(iterations, 10);
                assert!(residual > 0.9);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_search_probability_rejected() {
        let m = MdpModel::from_parts(vec![0], vec![vec![0.0]], vec![1.0], vec![0.0], vec![0.0]).unwrap();
        assert!(matches!(value_iteration(&m, 1e-6, 10), Err(Error::Input { .. })));
    }
}

#![allow(dead_code)]

use std::path::PathBuf;

use proptest::prelude::*;
use seek_core::scene_graph::FloorPlanDoc;
use serde_json::json;

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> serde_json::Value {
    json!([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
}

/// A rows x cols block of rectangular rooms. Every room has a door to its
/// right-hand neighbor; `vertical[c]` puts doors between all rows in column
/// `c` (column 0 always gets them so the plan is connected).
#[derive(Debug, Clone)]
pub struct BlockPlan {
    pub widths: Vec<f64>,
    pub heights: Vec<f64>,
    pub vertical: Vec<bool>,
}

impl BlockPlan {
    pub fn room_id(&self, row: usize, col: usize) -> u32 {
        (row * self.widths.len() + col + 1) as u32
    }

    pub fn doc(&self) -> FloorPlanDoc {
        let xs: Vec<f64> = std::iter::once(0.0)
            .chain(self.widths.iter().scan(0.0, |s, w| {
                *s += w;
                Some(*s)
            }))
            .collect();
        let ys: Vec<f64> = std::iter::once(0.0)
            .chain(self.heights.iter().scan(0.0, |s, h| {
                *s += h;
                Some(*s)
            }))
            .collect();
        let labels = ["office", "kitchen", "storage_room", "meeting_room"];
        let mut rooms = vec![];
        let mut doors = vec![];
        for r in 0..self.heights.len() {
            for c in 0..self.widths.len() {
                let id = self.room_id(r, c);
                rooms.push(json!({
                    "id": id,
                    "label": labels[id as usize % labels.len()],
                    "polygon": rect(xs[c], ys[r], xs[c + 1], ys[r + 1]),
                }));
                if c + 1 < self.widths.len() {
                    doors.push(json!({
                        "rooms": [id, self.room_id(r, c + 1)],
                        "position": [xs[c + 1], (ys[r] + ys[r + 1]) / 2.0],
                        "width_m": 1.0,
                    }));
                }
                if r + 1 < self.heights.len() && (c == 0 || self.vertical[c]) {
                    doors.push(json!({
                        "rooms": [id, self.room_id(r + 1, c)],
                        "position": [(xs[c] + xs[c + 1]) / 2.0, ys[r + 1]],
                        "width_m": 1.0,
                    }));
                }
            }
        }
        let doc = json!({ "name": "block", "rooms": rooms, "doors": doors });
        FloorPlanDoc::from_json_str(&doc.to_string()).unwrap()
    }
}

pub fn block_plan(max_side: usize) -> impl Strategy<Value = BlockPlan> {
    (1..=max_side, 1..=max_side).prop_flat_map(|(cols, rows)| {
        (
            proptest::collection::vec(2.5f64..6.0, cols),
            proptest::collection::vec(2.5f64..6.0, rows),
            proptest::collection::vec(any::<bool>(), cols),
        )
            .prop_map(|(widths, heights, vertical)| BlockPlan {
                widths,
                heights,
                vertical,
            })
    })
}

/// A single room `w` x `h` meters with its corner at the origin.
pub fn one_room(w: f64, h: f64) -> FloorPlanDoc {
    let doc = json!({
        "name": "one",
        "rooms": [{ "id": 1, "label": "office", "polygon": rect(0.0, 0.0, w, h) }],
    });
    FloorPlanDoc::from_json_str(&doc.to_string()).unwrap()
}

//! Floor-plan and persisted scene-graph documents.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;

pub const DSG_SCHEMA: &str = "seek-dsg/1";

/// A coordinate as written in input files: `[x, y]` or `[x, y, z]` (z ignored).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RawPoint(pub Vec<f64>);

impl RawPoint {
    pub(crate) fn to_point(&self, field: &str) -> Result<Point2> {
        match self.0.as_slice() {
            [x, y] | [x, y, _] if x.is_finite() && y.is_finite() => Ok(Point2::new(*x, *y)),
            [_, _] | [_, _, _] => Err(Error::input(field, "coordinates must be finite")),
            other => Err(Error::input(
                field,
                format!("expected [x, y] or [x, y, z], got {} values", other.len()),
            )),
        }
    }
}

impl From<Point2> for RawPoint {
    fn from(p: Point2) -> Self {
        RawPoint(vec![p.x, p.y])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoomDoc {
    pub id: u32,
    pub label: String,
    pub polygon: Vec<RawPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoorDoc {
    pub rooms: [u32; 2],
    pub position: RawPoint,
    pub width_m: f64,
}

/// The floor-plan input document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloorPlanDoc {
    pub name: String,
    pub rooms: Vec<RoomDoc>,
    #[serde(default)]
    pub doors: Vec<DoorDoc>,
}

impl FloorPlanDoc {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::json(Path::new("<floor plan>"), e))
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocationNodeDoc {
    pub id: usize,
    pub position: Point2,
    #[serde(default)]
    pub heading: f64,
    pub room: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocationsDoc {
    pub spacing: f64,
    pub nodes: Vec<LocationNodeDoc>,
    /// `[from, to, length_m]`
    pub edges: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectNodeDoc {
    pub id: usize,
    pub class: String,
    pub position: Point2,
    #[serde(default)]
    pub heading: f64,
    pub room: u32,
    /// Location node the object hangs off.
    pub anchor: usize,
    pub anchor_length: f64,
}

/// Persisted scene graph: the floor plan plus sampled locations and objects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DsgDoc {
    pub schema: String,
    pub name: String,
    pub rooms: Vec<RoomDoc>,
    #[serde(default)]
    pub doors: Vec<DoorDoc>,
    #[serde(default)]
    pub locations: Option<LocationsDoc>,
    #[serde(default)]
    pub objects: Vec<ObjectNodeDoc>,
}

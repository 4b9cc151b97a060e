//! Seeded 2D grid world: geometry, object placements, robot kinematics and
//! the semantic detection model.

mod grid;
mod sensor;

use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::scene_graph::{FloorPlanDoc, LayeredSceneGraph};

pub use grid::{Cell, GridDistances, OccupancyGrid, WALL_HALF_M};
pub use sensor::{Detection, ObjectInstance, SensorParams, NOISE_CLIP_SIGMAS};

pub const WORLD_SCHEMA: &str = "seek-world/1";
pub const DEFAULT_CELL_M: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ControlCommand {
    StepTo {
        cell: Cell,
    },
    /// Stay in place for one tick and sense.
    Hold,
    Finish {
        position: Point2,
    },
}

impl Serialize for Cell {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.col, self.row].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Cell {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [col, row] = <[i32; 2]>::deserialize(d)?;
        Ok(Cell::new(col, row))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub cell: Cell,
    pub position: Point2,
    pub straight_steps: u64,
    pub diagonal_steps: u64,
    pub ticks: u64,
    cell_m: f64,
}

impl RobotState {
    /// Distance traveled, computed from the step counts so it never drifts.
    pub fn traveled_m(&self) -> f64 {
        self.straight_steps as f64 * self.cell_m + self.diagonal_steps as f64 * self.cell_m * std::f64::consts::SQRT_2
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WorldDoc {
    schema: String,
    floor_plan: PathBuf,
    #[serde(default = "default_cell")]
    cell_m: f64,
    #[serde(default)]
    objects: Vec<ObjectDoc>,
    #[serde(default)]
    sensor: SensorParams,
}

fn default_cell() -> f64 {
    DEFAULT_CELL_M
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectDoc {
    class: String,
    position: crate::scene_graph::io::RawPoint,
}

#[derive(Debug, Clone)]
pub struct WorldModel {
    floor_plan: FloorPlanDoc,
    floor_plan_path: Option<PathBuf>,
    grid: OccupancyGrid,
    objects: Vec<ObjectInstance>,
    sensor: SensorParams,
}

/// Reads a world file; the floor-plan path is resolved against the file's directory.
pub fn load_world(path: impl AsRef<Path>) -> Result<WorldModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let doc: WorldDoc = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
    if doc.schema != WORLD_SCHEMA {
        return Err(Error::input(
            "schema",
            format!("expected '{WORLD_SCHEMA}', got '{}'", doc.schema),
        ));
    }
    let fp_path = path.parent().unwrap_or(Path::new(".")).join(&doc.floor_plan);
    let floor_plan = FloorPlanDoc::from_path(&fp_path)?;
    let objects = doc
        .objects
        .iter()
        .enumerate()
        .map(|(i, o)| {
            Ok(ObjectInstance {
                class: crate::belief::normalize_label(&o.class),
                position: o.position.to_point(&format!("objects[{i}].position"))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut world = WorldModel::new(floor_plan, doc.cell_m, objects, doc.sensor)?;
    world.floor_plan_path = Some(fp_path);
    Ok(world)
}

impl WorldModel {
    pub fn new(
        floor_plan: FloorPlanDoc,
        cell_m: f64,
        objects: Vec<ObjectInstance>,
        sensor: SensorParams,
    ) -> Result<Self> {
        if !(cell_m > 0.0 && cell_m.is_finite()) {
            return Err(Error::input("cell_m", "cell size must be positive"));
        }
        sensor.validate()?;
        LayeredSceneGraph::from_floor_plan(&floor_plan)?;
        let grid = OccupancyGrid::from_floor_plan_doc(&floor_plan, cell_m)?;
        let mut world = Self {
            floor_plan,
            floor_plan_path: None,
            grid,
            objects: Vec::new(),
            sensor,
        };
        world.set_objects(objects)?;
        Ok(world)
    }

    /// Replaces the object placements, validating each against the grid.
    pub fn set_objects(&mut self, objects: Vec<ObjectInstance>) -> Result<()> {
        for (i, o) in objects.iter().enumerate() {
            if !o.position.is_finite() || !self.grid.is_free(self.grid.cell_of(o.position)) {
                return Err(Error::input(
                    format!("objects[{i}]"),
                    format!(
                        "'{}' at ({}, {}) is not in free space",
                        o.class, o.position.x, o.position.y
                    ),
                ));
            }
        }
        self.objects = objects;
        Ok(())
    }

    pub fn floor_plan(&self) -> &FloorPlanDoc {
        &self.floor_plan
    }

    pub fn floor_plan_path(&self) -> Option<&Path> {
        self.floor_plan_path.as_deref()
    }

    pub fn grid(&self) -> &OccupancyGrid {
        &self.grid
    }

    pub fn objects(&self) -> &[ObjectInstance] {
        &self.objects
    }

    pub fn sensor(&self) -> &SensorParams {
        &self.sensor
    }

    pub fn instances_of<'a>(&'a self, class: &str) -> impl Iterator<Item = &'a ObjectInstance> + 'a {
        let class = crate::belief::normalize_label(class);
        self.objects.iter().filter(move |o| o.class == class)
    }

    /// Robot at rest in the cell containing `start`.
    pub fn spawn(&self, start: Point2) -> Result<RobotState> {
        let cell = self.grid.cell_of(start);
        if !self.grid.is_free(cell) {
            return Err(Error::input(
                "start",
                format!("({}, {}) is not in free space", start.x, start.y),
            ));
        }
        Ok(RobotState {
            cell,
            position: self.grid.center(cell),
            straight_steps: 0,
            diagonal_steps: 0,
            ticks: 0,
            cell_m: self.grid.cell_m(),
        })
    }

    /// Sensing pass without moving (used once before the first tick).
    pub fn sense<R: Rng + ?Sized>(&self, robot: &RobotState, target_class: &str, rng: &mut R) -> Vec<Detection> {
        sensor::sense(&self.grid, &self.sensor, &self.objects, robot.cell, target_class, rng)
    }

    /// Applies one command then senses. `Finish` leaves the robot untouched
    /// and senses nothing.
    pub fn step<R: Rng + ?Sized>(
        &self,
        robot: &RobotState,
        command: &ControlCommand,
        target_class: &str,
        rng: &mut R,
    ) -> Result<(RobotState, Vec<Detection>)> {
        let mut next = robot.clone();
        match *command {
            ControlCommand::Finish { .. } => return Ok((next, Vec::new())),
            ControlCommand::Hold => {}
            ControlCommand::StepTo { cell } => {
                if !robot.cell.is_adjacent(&cell) {
                    return Err(Error::SimContract(format!(
                        "step from {:?} to non-adjacent cell {:?}",
                        robot.cell, cell
                    )));
                }
                if !self.grid.is_free(cell) {
                    return Err(Error::SimContract(format!("step into occupied cell {cell:?}")));
                }
                if robot.cell.is_diagonal_to(&cell) {
                    next.diagonal_steps += 1;
                } else {
                    next.straight_steps += 1;
                }
                next.cell = cell;
                next.position = self.grid.center(cell);
            }
        }
        next.ticks += 1;
        let detections = self.sense(&next, target_class, rng);
        Ok((next, detections))
    }

    /// True when `p` lies strictly within `epsilon` of an instance of `class`.
    pub fn near_instance(&self, p: Point2, class: &str, epsilon: f64) -> bool {
        self.instances_of(class).any(|o| o.position.distance(&p) < epsilon)
    }

    /// Grid shortest-path length from `start` to the nearest free cell lying
    /// strictly within `epsilon` of any instance of `class`.
    pub fn oracle_shortest_length(&self, start: Point2, class: &str, epsilon: f64) -> Result<f64> {
        let instances: Vec<&ObjectInstance> = self.instances_of(class).collect();
        if instances.is_empty() {
            return Err(Error::NoInstance(class.to_string()));
        }
        let start_cell = self.grid.cell_of(start);
        if !self.grid.is_free(start_cell) {
            return Err(Error::input(
                "start",
                format!("({}, {}) is not in free space", start.x, start.y),
            ));
        }
        let dist = self.grid.distances_from(start_cell, f64::INFINITY);
        let best = instances
            .iter()
            .flat_map(|o| self.grid.free_cells_within(o.position, epsilon))
            .map(|c| dist.get(c))
            .fold(f64::INFINITY, f64::min);
        if best.is_finite() {
            Ok(best)
        } else {
            Err(Error::no_path(format!(
                "no reachable cell within {epsilon} m of any '{class}'"
            )))
        }
    }
}

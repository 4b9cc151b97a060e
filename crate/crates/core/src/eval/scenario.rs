use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize};

use crate::baselines::SemanticDistance;
use crate::belief::{normalize_label, PriorStore, PriorTable};
use crate::controller::ControllerParams;
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::scene_graph::{CostMatrix, LayeredSceneGraph, DEFAULT_SPACING_M};
use crate::world::{load_world, WorldModel};

pub const DEFAULT_T_MAX: u64 = 20_000;
pub const DEFAULT_EPSILON_M: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerKind {
    Seek,
    SemanticUtility,
    Coverage,
    Random,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 4] = [
        PlannerKind::Seek,
        PlannerKind::SemanticUtility,
        PlannerKind::Coverage,
        PlannerKind::Random,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PlannerKind::Seek => "seek",
            PlannerKind::SemanticUtility => "semantic_utility",
            PlannerKind::Coverage => "coverage",
            PlannerKind::Random => "random",
        }
    }
}

impl fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PlannerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PlannerKind::ALL
            .into_iter()
            .find(|k| k.as_str() == normalize_label(s))
            .ok_or_else(|| Error::input("planner", format!("unknown planner '{s}'")))
    }
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<PlannerKind>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(PlannerKind),
        Many(Vec<PlannerKind>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(k) => vec![k],
        OneOrMany::Many(v) => v,
    })
}

/// Scenario file contents. Relative paths resolve against the file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub world: PathBuf,
    pub prior: PathBuf,
    #[serde(default)]
    pub store: Option<PathBuf>,
    #[serde(default)]
    pub semdist: Option<PathBuf>,
    pub target: String,
    pub starts: Vec<Point2>,
    #[serde(alias = "planner", deserialize_with = "one_or_many")]
    pub planners: Vec<PlannerKind>,
    #[serde(default = "one")]
    pub episodes_per_start: usize,
    #[serde(default)]
    pub suite_seed: u64,
    #[serde(default = "default_t_max")]
    pub t_max: u64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_spacing")]
    pub spacing: f64,
    #[serde(default)]
    pub carry_over: bool,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub controller: Option<ControllerParams>,
}

fn one() -> usize {
    1
}

fn default_t_max() -> u64 {
    DEFAULT_T_MAX
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON_M
}

fn default_spacing() -> f64 {
    DEFAULT_SPACING_M
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.t_max == 0 {
            return Err(Error::input("t_max", "must be positive"));
        }
        if self.starts.is_empty() {
            return Err(Error::input("starts", "at least one start position is required"));
        }
        if self.planners.is_empty() {
            return Err(Error::input("planner", "at least one planner is required"));
        }
        if self.episodes_per_start == 0 {
            return Err(Error::input("episodes_per_start", "must be positive"));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::input("epsilon", "must be positive"));
        }
        if let Some(c) = &self.controller {
            c.validate()?;
        }
        Ok(())
    }

    pub fn episode_count(&self) -> usize {
        self.starts.len() * self.episodes_per_start
    }

    /// Controller parameters with `epsilon` taken from the scenario.
    pub fn controller_params(&self) -> ControllerParams {
        ControllerParams {
            epsilon: self.epsilon,
            ..self.controller.unwrap_or_default()
        }
    }
}

/// A scenario with every referenced input loaded.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub world: WorldModel,
    pub graph: LayeredSceneGraph,
    pub costs: CostMatrix,
    pub prior: PriorTable,
    pub store: PriorStore,
    pub semdist: SemanticDistance,
}

impl Scenario {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: ScenarioConfig = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
        config.world = resolve(&config.world);
        config.prior = resolve(&config.prior);
        config.store = config.store.as_deref().map(resolve);
        config.semdist = config.semdist.as_deref().map(resolve);
        config.output = config.output.as_deref().map(resolve);
        config.validate()?;
        let world = load_world(&config.world)?;
        let prior = PriorTable::load(&config.prior)?;
        let store = match &config.store {
            Some(p) if p.exists() => PriorStore::load(p)?,
            _ => PriorStore::new(),
        };
        let semdist = match &config.semdist {
            Some(p) => SemanticDistance::load(p)?,
            None => SemanticDistance::from_prior(&prior, &config.target),
        };
        Self::from_parts(config, world, prior, store, semdist)
    }

    /// Builds the scene graph and cost table from already-loaded inputs.
    pub fn from_parts(
        config: ScenarioConfig,
        world: WorldModel,
        prior: PriorTable,
        store: PriorStore,
        semdist: SemanticDistance,
    ) -> Result<Self> {
        config.validate()?;
        let mut graph = LayeredSceneGraph::from_floor_plan(world.floor_plan())?;
        graph.sample_locations(config.spacing)?;
        let costs = graph.room_cost_matrix()?;
        for (i, s) in config.starts.iter().enumerate() {
            world.spawn(*s).map_err(|_| {
                Error::input(
                    format!("starts[{i}]"),
                    format!("({}, {}) is not in free space", s.x, s.y),
                )
            })?;
        }
        Ok(Self {
            config,
            world,
            graph,
            costs,
            prior,
            store,
            semdist,
        })
    }
}

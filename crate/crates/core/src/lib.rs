pub mod baselines;
pub mod belief;
pub mod controller;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod planner;
pub mod scene_graph;
pub mod world;

pub use error::{Error, Result};
pub use geometry::Point2;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::grid::{Cell, OccupancyGrid};
use crate::geometry::Point2;

/// Observation-model parameters. Missing fields take the defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorParams {
    pub r_max: f64,
    pub p0: f64,
    pub sigma_pos: f64,
    pub p_fp: f64,
    pub sigma_conf: f64,
    pub fp_conf_lo: f64,
    pub fp_conf_hi: f64,
}

impl Default for SensorParams {
    fn default() -> Self {
        Self {
            r_max: 5.0,
            p0: 0.9,
            sigma_pos: 0.2,
            p_fp: 0.01,
            sigma_conf: 0.1,
            fp_conf_lo: 0.3,
            fp_conf_hi: 0.6,
        }
    }
}

/// Position noise is clipped to this many standard deviations.
pub const NOISE_CLIP_SIGMAS: f64 = 4.0;
const FP_TRIES: usize = 64;

impl SensorParams {
    pub fn validate(&self) -> crate::Result<()> {
        let err = |f: &str, m: &str| Err(crate::Error::input(format!("sensor.{f}"), m));
        if !(self.r_max > 0.0 && self.r_max.is_finite()) {
            return err("r_max", "must be positive");
        }
        for (f, v) in [("p0", self.p0), ("p_fp", self.p_fp)] {
            if !(0.0..=1.0).contains(&v) {
                return err(f, "must lie in [0, 1]");
            }
        }
        for (f, v) in [("sigma_pos", self.sigma_pos), ("sigma_conf", self.sigma_conf)] {
            if !(v >= 0.0 && v.is_finite()) {
                return err(f, "must be nonnegative");
            }
        }
        if !(0.0 <= self.fp_conf_lo && self.fp_conf_lo <= self.fp_conf_hi && self.fp_conf_hi <= 1.0) {
            return err("fp_conf_lo", "need 0 <= fp_conf_lo <= fp_conf_hi <= 1");
        }
        Ok(())
    }

    /// True-positive probability at range `d`.
    pub fn detection_prob(&self, d: f64) -> f64 {
        if d >= self.r_max {
            0.0
        } else {
            self.p0 * (1.0 - d / self.r_max)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub position: Point2,
    pub class: String,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectInstance {
    pub class: String,
    pub position: Point2,
}

/// One sensing pass from `cell`. Random draws happen in a fixed order so the
/// stream is reproducible for a given seed.
pub(crate) fn sense<R: Rng + ?Sized>(
    grid: &OccupancyGrid,
    params: &SensorParams,
    objects: &[ObjectInstance],
    cell: Cell,
    target_class: &str,
    rng: &mut R,
) -> Vec<Detection> {
    let here = grid.center(cell);
    let mut out = Vec::new();
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    for obj in objects {
        let d = here.distance(&obj.position);
        if d > params.r_max || !grid.line_of_sight(cell, grid.cell_of(obj.position)) {
            continue;
        }
        if rng.random::<f64>() >= params.detection_prob(d) {
            continue;
        }
        let (mut nx, mut ny) = (unit.sample(rng) * params.sigma_pos, unit.sample(rng) * params.sigma_pos);
        let norm = nx.hypot(ny);
        let clip = NOISE_CLIP_SIGMAS * params.sigma_pos;
        if norm > clip {
            nx *= clip / norm;
            ny *= clip / norm;
        }
        let confidence = (1.0 - d / params.r_max + unit.sample(rng) * params.sigma_conf).clamp(0.0, 1.0);
        out.push(Detection {
            position: Point2::new(obj.position.x + nx, obj.position.y + ny),
            class: obj.class.clone(),
            confidence,
        });
    }
    if rng.random::<f64>() < params.p_fp {
        for _ in 0..FP_TRIES {
            let r = params.r_max * rng.random::<f64>().sqrt();
            let theta = std::f64::consts::TAU * rng.random::<f64>();
            let p = Point2::new(here.x + r * theta.cos(), here.y + r * theta.sin());
            let c = grid.cell_of(p);
            if grid.is_free(c) && grid.line_of_sight(cell, c) {
                out.push(Detection {
                    position: grid.center(c),
                    class: target_class.to_string(),
                    confidence: rng.random_range(params.fp_conf_lo..=params.fp_conf_hi),
                });
                break;
            }
        }
    }
    out
}

//! Episode and suite runner: wires planner, controller, simulator and belief
//! updates together and scores runs with SPL and Brier.

mod scenario;

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::{CoveragePlanner, RandomPlanner, SemanticUtilityPlanner};
use crate::belief::{ObservationEvent, PriorStore, RoomBelief};
use crate::controller::{ControlCommand, LocalController, StepOutcome, TraceRecord};
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::planner::{GlobalPlanner, PlanContext, SeekPlanner};
use crate::scene_graph::RoomId;

pub use scenario::{PlannerKind, Scenario, ScenarioConfig, DEFAULT_EPSILON_M, DEFAULT_T_MAX};

/// Guard against planners that keep returning actions which finish instantly.
const MAX_IDLE_REPLANS: usize = 1_000;

/// Per-episode seed derived from the suite seed.
pub fn episode_seed(suite_seed: u64, index: usize) -> u64 {
    suite_seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// SPL contribution of one run: `S * l / max(p, l)`, equal to `S` when both lengths are zero.
pub fn spl_contribution(success: bool, path_len: f64, shortest_len: f64) -> f64 {
    if !success {
        return 0.0;
    }
    let denom = path_len.max(shortest_len);
    if denom <= 0.0 {
        1.0
    } else {
        shortest_len / denom
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub episode: usize,
    pub seed: u64,
    pub start_index: usize,
    pub planner: PlannerKind,
    pub success: bool,
    pub path_len_m: f64,
    pub shortest_len_m: f64,
    pub spl: f64,
    pub ticks: u64,
    pub actions: Vec<String>,
    /// Brier score of the room belief before each global planning step, then at the end.
    pub brier: Vec<f64>,
    pub events: Vec<ObservationEvent>,
    pub promotions: usize,
    pub failure: Option<String>,
}

impl EpisodeResult {
    pub fn brier_first(&self) -> f64 {
        self.brier.first().copied().unwrap_or(f64::NAN)
    }

    pub fn brier_last(&self) -> f64 {
        self.brier.last().copied().unwrap_or(f64::NAN)
    }

    fn failed(episode: usize, seed: u64, start_index: usize, planner: PlannerKind, reason: String) -> Self {
        Self {
            episode,
            seed,
            start_index,
            planner,
            success: false,
            path_len_m: 0.0,
            shortest_len_m: 0.0,
            spl: 0.0,
            ticks: 0,
            actions: Vec::new(),
            brier: Vec::new(),
            events: Vec::new(),
            promotions: 0,
            failure: Some(reason),
        }
    }
}

/// Mean SPL contribution.
pub fn spl(results: &[EpisodeResult]) -> Result<f64> {
    if results.is_empty() {
        return Err(Error::input("results", "SPL needs at least one episode"));
    }
    Ok(results.iter().map(|r| r.spl).sum::<f64>() / results.len() as f64)
}

/// Mean and sample standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn make_planner(kind: PlannerKind, scn: &Scenario, seed: u64) -> Box<dyn GlobalPlanner> {
    match kind {
        PlannerKind::Seek => Box::new(SeekPlanner::new(scn.prior.p_easy(&scn.config.target))),
        PlannerKind::SemanticUtility => Box::new(SemanticUtilityPlanner::new(scn.semdist.clone())),
        PlannerKind::Coverage => Box::new(CoveragePlanner::default()),
        PlannerKind::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(1);
            Box::new(RandomPlanner::new(&scn.costs.room_ids, &mut rng))
        }
    }
}

/// Rooms holding at least one instance of the target class.
pub fn truth_rooms(scn: &Scenario) -> BTreeSet<RoomId> {
    scn.world
        .instances_of(&scn.config.target)
        .filter_map(|o| scn.graph.room_at(o.position))
        .collect()
}

/// Runs one episode from `start`. The seed drives the simulator; the random
/// baseline draws its room order from a separate stream of the same seed.
pub fn run_episode(
    scn: &Scenario,
    kind: PlannerKind,
    store: &PriorStore,
    start: Point2,
    seed: u64,
    mut trace: Option<&mut Vec<TraceRecord>>,
) -> Result<EpisodeResult> {
    let cfg = &scn.config;
    let target = cfg.target.as_str();
    let world = &scn.world;
    let grid = world.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut robot = world.spawn(start)?;
    let (shortest, mut failure) = match world.oracle_shortest_length(robot.position, target, cfg.epsilon) {
        Ok(l) => (l, None),
        Err(e @ (Error::NoInstance(_) | Error::NoPath { .. })) => (0.0, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    let truth = truth_rooms(scn);
    let mut belief = RoomBelief::init(&scn.prior, &scn.graph, store, target);
    let mut brier = vec![];
    let mut planner = make_planner(kind, scn, seed);
    let mut controller = LocalController::new(target, cfg.controller_params());
    let mut events = Vec::new();
    let mut actions = Vec::new();
    let mut detections = world.sense(&robot, target, &mut rng);
    let mut success = false;
    let mut idle_replans = 0;
    loop {
        if robot.ticks >= cfg.t_max {
            failure.get_or_insert_with(|| format!("timeout after {} ticks", robot.ticks));
            break;
        }
        if controller.needs_action() {
            idle_replans += 1;
            if idle_replans > MAX_IDLE_REPLANS {
                return Err(Error::State("planner makes no progress".into()));
            }
            brier.push(belief.brier_score(&truth));
            let ctx = PlanContext {
                graph: &scn.graph,
                costs: &scn.costs,
                belief: &belief,
                robot: robot.position,
            };
            let action = planner.next_action(&ctx)?;
            log::debug!("tick {}: global action {action}", robot.ticks);
            actions.push(action.to_string());
            controller.begin_action(action, &robot, &scn.graph)?;
        }
        let outcome = match controller.step(&detections, &robot, &scn.graph, grid) {
            Ok(o) => o,
            Err(e @ Error::InspectUnreachable { .. }) => {
                failure = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        };
        for e in controller.take_events() {
            belief.update(&e, &scn.prior);
            events.push(e);
        }
        let command = match outcome {
            StepOutcome::ActionDone => {
                detections.clear();
                continue;
            }
            StepOutcome::Command(c) => c,
        };
        if let Some(t) = trace.as_deref_mut() {
            t.push(TraceRecord {
                tick: robot.ticks,
                mode: controller.mode(),
                position: robot.position,
                action: controller.current_action().map(|a| a.to_string()),
                command: Some(command),
                detections: std::mem::take(&mut detections),
            });
        }
        if let ControlCommand::Finish { position } = command {
            success = world.near_instance(position, target, cfg.epsilon);
            if !success {
                failure = Some(format!(
                    "finished at ({:.2}, {:.2}) away from any instance",
                    position.x, position.y
                ));
            }
            break;
        }
        idle_replans = 0;
        let (next, dets) = world.step(&robot, &command, target, &mut rng)?;
        robot = next;
        detections = dets;
    }
    brier.push(belief.brier_score(&truth));
    let path = robot.traveled_m();
    Ok(EpisodeResult {
        episode: 0,
        seed,
        start_index: 0,
        planner: kind,
        success,
        path_len_m: path,
        shortest_len_m: shortest,
        spl: spl_contribution(success, path, shortest),
        ticks: robot.ticks,
        actions,
        brier,
        events,
        promotions: controller.promotions(),
        failure: if success { None } else { failure },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerSummary {
    pub planner: PlannerKind,
    pub episodes: usize,
    pub successes: usize,
    pub mean_spl: f64,
    pub std_spl: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub config: ScenarioConfig,
    pub summary: Vec<PlannerSummary>,
    pub rows: Vec<EpisodeResult>,
    /// Final prior store per planner when `carry_over` is on.
    #[serde(skip)]
    pub stores: Vec<(PlannerKind, PriorStore)>,
}

impl SuiteReport {
    pub fn summary_for(&self, kind: PlannerKind) -> Option<&PlannerSummary> {
        self.summary.iter().find(|s| s.planner == kind)
    }

    pub fn rows_for(&self, kind: PlannerKind) -> impl Iterator<Item = &EpisodeResult> {
        self.rows.iter().filter(move |r| r.planner == kind)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::State(format!("csv: {e}"));
        w.write_record([
            "episode",
            "seed",
            "start_index",
            "planner",
            "success",
            "path_len_m",
            "shortest_len_m",
            "spl",
            "ticks",
            "brier_first",
            "brier_last",
        ])
        .map_err(csv_err)?;
        for r in &self.rows {
            w.write_record([
                r.episode.to_string(),
                r.seed.to_string(),
                r.start_index.to_string(),
                r.planner.to_string(),
                u8::from(r.success).to_string(),
                format!("{:.4}", r.path_len_m),
                format!("{:.4}", r.shortest_len_m),
                format!("{:.6}", r.spl),
                r.ticks.to_string(),
                format!("{:.6}", r.brier_first()),
                format!("{:.6}", r.brier_last()),
            ])
            .map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::State(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Writes `results.csv` and `report.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let csv_path = dir.join("results.csv");
        std::fs::write(&csv_path, self.to_csv()?).map_err(|e| Error::io(&csv_path, e))?;
        let json_path = dir.join("report.json");
        let mut f = std::fs::File::create(&json_path).map_err(|e| Error::io(&json_path, e))?;
        serde_json::to_writer_pretty(&mut f, self).map_err(|e| Error::State(format!("report: {e}")))?;
        f.write_all(b"\n").map_err(|e| Error::io(&json_path, e))?;
        Ok(())
    }
}

/// Runs starts x repeats episodes per planner (episode `i` uses start
/// `i % starts`). With `carry_over` each planner's store evolves across its
/// episodes in order; otherwise every episode sees the initial store.
/// Episode errors are recorded in the row and the suite continues.
pub fn run_suite(scn: &Scenario) -> Result<SuiteReport> {
    let cfg = &scn.config;
    let n = cfg.episode_count();
    let mut rows = Vec::with_capacity(n * cfg.planners.len());
    let mut summary = Vec::new();
    let mut stores = Vec::new();
    for &kind in &cfg.planners {
        let mut store = scn.store.clone();
        let mut spls = Vec::with_capacity(n);
        let mut successes = 0;
        for i in 0..n {
            let start_index = i % cfg.starts.len();
            let seed = episode_seed(cfg.suite_seed, i);
            let mut row = match run_episode(scn, kind, &store, cfg.starts[start_index], seed, None) {
                Ok(r) => r,
                Err(e) => {
                    log::error!("{kind} episode {i}: {e}");
                    EpisodeResult::failed(i, seed, start_index, kind, e.to_string())
                }
            };
            row.episode = i;
            row.start_index = start_index;
            if cfg.carry_over {
                store.commit_episode(&row.events, &cfg.target);
            }
            log::info!(
                "{kind} episode {i}: success={} spl={:.3} path={:.1} m shortest={:.1} m ticks={}",
                row.success,
                row.spl,
                row.path_len_m,
                row.shortest_len_m,
                row.ticks
            );
            successes += usize::from(row.success);
            spls.push(row.spl);
            rows.push(row);
        }
        let (mean_spl, std_spl) = mean_std(&spls);
        summary.push(PlannerSummary {
            planner: kind,
            episodes: n,
            successes,
            mean_spl,
            std_spl,
        });
        if cfg.carry_over {
            stores.push((kind, store));
        }
    }
    Ok(SuiteReport {
        config: cfg.clone(),
        summary,
        rows,
        stores,
    })
}

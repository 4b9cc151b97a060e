use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use seek_core::belief::{PriorStore, PriorTable, RoomBelief};
use seek_core::eval::{episode_seed, run_episode, run_suite, PlannerKind, Scenario};
use seek_core::planner::{build_mdp, value_iteration, DEFAULT_MAX_ITER, DEFAULT_TOL};
use seek_core::scene_graph::{LayeredSceneGraph, DEFAULT_SPACING_M};
use seek_core::{Error, Result};

#[derive(Parser)]
#[command(name = "seek", version, about = "Semantic object search on layered scene graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scene-graph construction.
    Graph {
        #[command(subcommand)]
        command: GraphCommand,
    },
    /// Solve the room MDP for an object and write the policy.
    Plan {
        dsg: PathBuf,
        prior: PathBuf,
        #[arg(long)]
        object: String,
        #[arg(long)]
        store: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run one episode of a scenario.
    Simulate {
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Defaults to the scenario's first planner.
        #[arg(long)]
        planner: Option<String>,
        #[arg(long, default_value_t = 0)]
        start_index: usize,
    },
    /// Run the full suite of a scenario and write results.csv and report.json.
    Eval {
        scenario: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Room-belief inspection.
    Belief {
        #[command(subcommand)]
        command: BeliefCommand,
    },
}

#[derive(Subcommand)]
enum GraphCommand {
    Build {
        floor_plan: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SPACING_M)]
        spacing: f64,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Subcommand)]
enum BeliefCommand {
    Show {
        prior: PathBuf,
        dsg: PathBuf,
        #[arg(long)]
        object: String,
        #[arg(long)]
        store: Option<PathBuf>,
    },
}

fn load_store(path: Option<&Path>) -> Result<PriorStore> {
    match path {
        Some(p) => PriorStore::load(p),
        None => Ok(PriorStore::new()),
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io {
            path: p.to_path_buf(),
            source: e,
        }),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Graph {
            command:
                GraphCommand::Build {
                    floor_plan,
                    spacing,
                    output,
                },
        } => {
            let mut graph = LayeredSceneGraph::from_floor_plan_path(&floor_plan)?;
            graph.sample_locations(spacing)?;
            graph.save(&output)?;
            println!(
                "{}: {} rooms, {} location nodes -> {}",
                graph.name(),
                graph.rooms().len(),
                graph.location_nodes().count(),
                output.display()
            );
        }
        Command::Plan {
            dsg,
            prior,
            object,
            store,
            tol,
            max_iter,
            output,
        } => {
            let graph = LayeredSceneGraph::load(&dsg)?;
            let table = PriorTable::load(&prior)?;
            let store = load_store(store.as_deref())?;
            let belief = RoomBelief::init(&table, &graph, &store, &object);
            let costs = graph.room_cost_matrix()?;
            let model = build_mdp(&costs, &belief, table.p_easy(&object))?;
            let (values, policy) = value_iteration(&model, tol, max_iter)?;
            let text = serde_json::to_string_pretty(&policy.to_json(&values)).expect("policy serializes");
            write_output(output.as_deref(), &text)?;
        }
        Command::Simulate {
            scenario,
            seed,
            trace,
            planner,
            start_index,
        } => {
            let scn = Scenario::load(&scenario)?;
            let kind = match planner {
                Some(p) => p.parse::<PlannerKind>()?,
                None => scn.config.planners[0],
            };
            let start = *scn.config.starts.get(start_index).ok_or_else(|| {
                Error::input(
                    "start_index",
                    format!("scenario has {} starts", scn.config.starts.len()),
                )
            })?;
            let seed = seed.unwrap_or_else(|| episode_seed(scn.config.suite_seed, 0));
            let mut records = Vec::new();
            let result = run_episode(
                &scn,
                kind,
                &scn.store,
                start,
                seed,
                trace.as_ref().map(|_| &mut records),
            )?;
            if let Some(path) = trace {
                let mut out = Vec::new();
                for r in &records {
                    serde_json::to_writer(&mut out, r).expect("trace serializes");
                    out.push(b'\n');
                }
                std::fs::write(&path, out).map_err(|e| Error::Io {
                    path: path.clone(),
                    source: e,
                })?;
            }
            println!("{}", serde_json::to_string_pretty(&result).expect("result serializes"));
        }
        Command::Eval { scenario, output } => {
            let scn = Scenario::load(&scenario)?;
            let dir = output
                .or_else(|| scn.config.output.clone())
                .ok_or_else(|| Error::input("output", "no output directory given"))?;
            let report = run_suite(&scn)?;
            report.write(&dir)?;
            for (kind, store) in &report.stores {
                let path = dir.join(format!("store_{kind}.json"));
                store.save(&path)?;
            }
            let mut stdout = std::io::stdout().lock();
            for s in &report.summary {
                let _ = writeln!(
                    stdout,
                    "{:<17} episodes={:<3} success={:<3} spl={:.3} +- {:.3}",
                    s.planner.as_str(),
                    s.episodes,
                    s.successes,
                    s.mean_spl,
                    s.std_spl
                );
            }
            let _ = writeln!(stdout, "wrote {}", dir.display());
        }
        Command::Belief {
            command:
                BeliefCommand::Show {
                    prior,
                    dsg,
                    object,
                    store,
                },
        } => {
            let graph = LayeredSceneGraph::load(&dsg)?;
            let table = PriorTable::load(&prior)?;
            let store = load_store(store.as_deref())?;
            let belief = RoomBelief::init(&table, &graph, &store, &object);
            if belief.low_confidence {
                println!("# '{object}' not in the prior table; unknown-object row used");
            }
            println!("{:>5}  {:<16} {:>7}", "room", "label", "p");
            for room in graph.rooms() {
                let p = belief.prob(room.id).unwrap_or(f64::NAN);
                println!("{:>5}  {:<16} {:>7.4}", room.id, room.label, p);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SEEK_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}

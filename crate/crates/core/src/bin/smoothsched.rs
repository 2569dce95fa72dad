use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use smoothsched::algorithms::{
    find_near_list_order, is_jump_optimal, is_lex_jump_optimal, is_near_list, list_schedule, local_search,
    lpt_schedule, Neighborhood, Pivot, DEFAULT_ORDER_SEARCH_LIMIT,
};
use smoothsched::classification::{classify_with, validate_nl_structure, OptMode};
use smoothsched::constructions::{build_by_name, Mode};
use smoothsched::harness::{estimate_smoothed_ratio, sweep_to_path, EstimateConfig, Family, Grid, Method, SweepConfig};
use smoothsched::json::{self, InstanceJson, ScheduleJson};
use smoothsched::model::{critical_machines, loads, makespan, validate_schedule};
use smoothsched::oracle::{optimal_makespan_exact, DEFAULT_BUDGET};
use smoothsched::smoothing::{sample_instance, SmoothedInstanceSpec};
use smoothsched::{Error, Instance, Result, Schedule, EPS};

/// Makespan scheduling experiments on related and restricted machines.
#[derive(Parser)]
#[command(name = "smoothsched", version)]
struct Cli {
    /// Base seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Absolute tolerance for load comparisons.
    #[arg(long, global = true, default_value_t = EPS)]
    eps: f64,
    /// Largest number of schedules the exact solver may enumerate.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Accept construction parameters outside the proven regime, with warnings.
    #[arg(long, global = true)]
    lenient: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample an instance from a smoothed spec or a built-in family.
    Gen {
        #[command(flatten)]
        source: SpecSource,
        /// Output file; stdout when absent.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Build a schedule for an instance.
    Solve {
        #[arg(long, short)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Algo::Lpt)]
        algo: Algo,
        /// One-based job order for `list`; identity when absent.
        #[arg(long, value_delimiter = ',')]
        order: Option<Vec<usize>>,
        /// Starting schedule for `local-search`; LPT when absent.
        #[arg(long)]
        start: Option<PathBuf>,
        #[arg(long, default_value = "jump")]
        neighborhood: Neighborhood,
        #[arg(long, default_value = "first")]
        pivot: Pivot,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Check optimality predicates and report the machine classification.
    Verify {
        #[arg(long, short)]
        instance: PathBuf,
        #[arg(long, short)]
        schedule: PathBuf,
        /// One-based job indexing for the near-list check; searched when absent.
        #[arg(long, value_delimiter = ',')]
        order: Option<Vec<usize>>,
        /// Upper bound to use instead of the exact optimum.
        #[arg(long)]
        opt_upper_bound: Option<f64>,
    },
    /// Sample a lower-bound construction and write instance, schedules and metadata.
    Construct {
        /// jump-related, lexlist, restricted-jump or restricted-lex.
        name: String,
        /// Parameters as a JSON object, e.g. '{"phi": 10}'.
        #[arg(long, default_value = "{}")]
        params: String,
        /// Directory for instance.json, bad.json, good.json and meta.json.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Estimate the expected ratio of the worst local optimum.
    Estimate {
        #[command(flatten)]
        source: SpecSource,
        #[arg(long, default_value = "jump")]
        neighborhood: Neighborhood,
        #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
        method: MethodArg,
        /// Local searches per trial for `multistart`.
        #[arg(long, default_value_t = 16)]
        starts: usize,
        #[arg(long, default_value = "random")]
        pivot: Pivot,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Confidence interval failure probability.
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        /// Include per-trial outcomes.
        #[arg(long)]
        per_trial: bool,
    },
    /// Run a parameter grid and write one CSV row per grid point.
    Sweep {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct SpecSource {
    /// Smoothed instance spec JSON.
    #[arg(long, conflicts_with = "family")]
    spec: Option<PathBuf>,
    /// Built-in family: jump-lb or identical.
    #[arg(long)]
    family: Option<Family>,
    #[arg(long, default_value_t = 2.0)]
    phi: f64,
    #[arg(long, short, default_value_t = 6)]
    n: usize,
    /// Machines; defaults to n.
    #[arg(long, short)]
    m: Option<usize>,
}

impl SpecSource {
    fn load(&self) -> Result<SmoothedInstanceSpec> {
        match (&self.spec, self.family) {
            (Some(path), _) => json::read_spec(path),
            (None, Some(family)) => family.spec(self.phi, self.n, self.m.unwrap_or(self.n)),
            (None, None) => Err(Error::InvalidParameter("give --spec or --family".into())),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    List,
    Lpt,
    LocalSearch,
    Optimal,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Exact,
    Multistart,
}

fn threads() -> Option<usize> {
    std::env::var("SMOOTHSCHED_THREADS").ok()?.parse().ok().filter(|&t| t > 0)
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, format!("{text}\n"))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn zero_based(order: &[usize]) -> Result<Vec<usize>> {
    order
        .iter()
        .map(|&j| j.checked_sub(1).ok_or_else(|| Error::InvalidParameter("job indices are one-based".into())))
        .collect()
}

fn solve(
    cli: &Cli,
    instance: &Instance,
    algo: Algo,
    order: Option<&[usize]>,
    start: Option<&Path>,
    neighborhood: Neighborhood,
    pivot: Pivot,
) -> Result<(Schedule, Value)> {
    Ok(match algo {
        Algo::List => {
            let order = match order {
                Some(o) => zero_based(o)?,
                None => (0..instance.num_jobs()).collect(),
            };
            (list_schedule(instance, &order, None)?, json!({}))
        }
        Algo::Lpt => (lpt_schedule(instance, None)?, json!({})),
        Algo::LocalSearch => {
            let start = match start {
                Some(path) => json::read_schedule(path)?,
                None => lpt_schedule(instance, None)?,
            };
            let run = local_search(instance, &start, neighborhood, pivot, cli.eps)?;
            let info = json!({ "steps": run.steps, "strictly_decreasing": run.is_strictly_decreasing() });
            (run.schedule, info)
        }
        Algo::Optimal => {
            let opt = optimal_makespan_exact(instance, cli.budget)?;
            (opt.schedule, json!({ "optimal": true }))
        }
    })
}

fn verify(
    cli: &Cli,
    instance: &Instance,
    schedule: &Schedule,
    order: Option<&[usize]>,
    upper: Option<f64>,
) -> Result<Value> {
    let validation = validate_schedule(instance, schedule);
    if !validation.is_ok() {
        return Ok(json!({ "feasible": false, "validation": validation }));
    }
    let c = makespan(instance, schedule)?;
    let critical: Vec<usize> = critical_machines(instance, schedule, cli.eps)?.iter().map(|i| i + 1).collect();
    let mut report = json!({
        "feasible": true,
        "makespan": c,
        "loads": loads(instance, schedule)?,
        "critical_machines": critical,
        "jump_optimal": is_jump_optimal(instance, schedule, cli.eps)?,
        "lex_jump_optimal": is_lex_jump_optimal(instance, schedule, cli.eps)?,
    });

    let order = match order {
        Some(o) => {
            let o = zero_based(o)?;
            is_near_list(instance, schedule, &o)?.then_some(o)
        }
        None => match find_near_list_order(instance, schedule, DEFAULT_ORDER_SEARCH_LIMIT) {
            Ok(found) => found,
            Err(Error::LimitExceeded { .. }) => None,
            Err(e) => return Err(e),
        },
    };
    report["near_list"] = json!(order.is_some());
    if let Some(o) = &order {
        report["near_list_order"] = json!(o.iter().map(|j| j + 1).collect::<Vec<_>>());
    }

    let (opt_value, mode, optimal) = match upper {
        Some(ub) => (ub, OptMode::UpperBound, None),
        None => match optimal_makespan_exact(instance, cli.budget) {
            Ok(opt) => (opt.makespan, OptMode::Exact, Some(opt.schedule)),
            Err(Error::BudgetExceeded { .. }) => {
                report["classification"] = Value::Null;
                report["note"] = json!("optimum out of budget; pass --opt-upper-bound");
                return Ok(report);
            }
            Err(e) => return Err(e),
        },
    };
    report["opt_makespan"] = json!(opt_value);
    report["opt_mode"] = json!(mode);
    match (&order, instance.is_restricted()) {
        (Some(o), false) => {
            let nl = validate_nl_structure(instance, schedule, o, opt_value, mode, optimal.as_ref(), cli.eps)?;
            report["classification"] = serde_json::to_value(&nl)?;
        }
        _ => {
            let cl = classify_with(instance, schedule, opt_value, mode, cli.eps)?;
            report["classification"] = json!({ "classification": cl });
        }
    }
    Ok(report)
}

fn run(cli: &Cli) -> Result<()> {
    let mode = if cli.lenient { Mode::Lenient } else { Mode::Strict };
    match &cli.command {
        Command::Gen { source, out } => {
            let instance = sample_instance(&source.load()?, cli.seed)?;
            emit(&json::instance_to_string(&instance), out.as_deref())
        }
        Command::Solve {
            instance,
            algo,
            order,
            start,
            neighborhood,
            pivot,
            out,
        } => {
            let inst = json::read_instance(instance)?;
            let (schedule, info) =
                solve(cli, &inst, *algo, order.as_deref(), start.as_deref(), *neighborhood, *pivot)?;
            emit(&json::schedule_to_string(&schedule), out.as_deref())?;
            if out.is_some() {
                let summary = json!({ "makespan": makespan(&inst, &schedule)?, "info": info });
                println!("{}", json::to_pretty(&summary));
            }
            Ok(())
        }
        Command::Verify {
            instance,
            schedule,
            order,
            opt_upper_bound,
        } => {
            let inst = json::read_instance(instance)?;
            let sched = json::read_schedule(schedule)?;
            let report = verify(cli, &inst, &sched, order.as_deref(), *opt_upper_bound)?;
            println!("{}", json::to_pretty(&report));
            Ok(())
        }
        Command::Construct { name, params, out_dir } => {
            let params: Value = serde_json::from_str(params)?;
            let c = build_by_name(name, &params, mode)?;
            for w in &c.warnings {
                log::warn!("{w}");
            }
            let sample = c.sample(cli.seed)?;
            let checks = c.validate(&sample, cli.eps);
            let meta = json!({ "construction": c.meta(), "sample": sample, "checks": checks });
            if let Some(dir) = out_dir {
                std::fs::create_dir_all(dir)?;
                let write = |file: &str, text: String| std::fs::write(dir.join(file), text + "\n");
                write("instance.json", json::to_pretty(&InstanceJson::from_instance(&sample.instance)))?;
                write("bad.json", json::to_pretty(&ScheduleJson::from_schedule(&sample.bad)))?;
                write("good.json", json::to_pretty(&ScheduleJson::from_schedule(&sample.good)))?;
                write("meta.json", json::to_pretty(&meta))?;
            }
            println!("{}", json::to_pretty(&meta));
            Ok(())
        }
        Command::Estimate {
            source,
            neighborhood,
            method,
            starts,
            pivot,
            trials,
            delta,
            per_trial,
        } => {
            let spec = source.load()?;
            let method = match method {
                MethodArg::Exact => Method::Exact,
                MethodArg::Multistart => Method::Multistart {
                    starts: *starts,
                    pivot: *pivot,
                },
            };
            let cfg = EstimateConfig {
                neighborhood: *neighborhood,
                method,
                trials: *trials,
                seed: cli.seed,
                delta: *delta,
                budget: cli.budget,
                eps: cli.eps,
                threads: threads(),
            };
            let est = estimate_smoothed_ratio(&spec, &cfg)?;
            let e = &est.estimate;
            let mut out = json!({
                "estimator": est.estimator,
                "lower_bound": est.lower_bound,
                "trials": e.count,
                "mean": e.mean,
                "ci_low": e.ci_low,
                "ci_high": e.ci_high,
                "delta": e.delta,
                "range": e.range,
                "phi": spec.phi(),
                "all_denominators_exact": est.trials.iter().all(|t| t.denominator_exact),
            });
            if *per_trial {
                out["per_trial"] = serde_json::to_value(&est.trials)?;
            }
            println!("{}", json::to_pretty(&out));
            Ok(())
        }
        Command::Sweep { grid, out } => {
            let grid: Grid = json::read_json(grid)?;
            let cfg = SweepConfig {
                seed: cli.seed,
                eps: cli.eps,
                budget: cli.budget,
                mode,
                threads: threads(),
            };
            let rows = sweep_to_path(&grid, &cfg, out)?;
            log::info!("wrote {} rows to {}", rows.len(), out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

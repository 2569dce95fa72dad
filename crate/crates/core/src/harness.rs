//! Monte-Carlo estimation of smoothed ratios and parameter sweeps.
//!
//! Trials run on a rayon pool and are merged in trial order, so the thread
//! count never changes results.
//!
//! Sweep CSV columns, in order:
//!
//! | column | meaning |
//! |---|---|
//! | `kind` | `smoothed` or `construction` |
//! | `name` | instance family or construction name |
//! | `neighborhood` | `jump` or `lex-jump` |
//! | `estimator` | `exact`, `multistart-lower-bound` or `bad-vs-benchmark` |
//! | `phi` | smoothness parameter |
//! | `n`, `m` | jobs and machines |
//! | `trials` | samples per row |
//! | `mean_ratio`, `ci_low`, `ci_high` | mean ratio and Hoeffding interval |
//! | `theory_bound`, `theory_bound_kind` | applicable upper bound on the mean, if any |
//! | `predicted_lb` | ratio the construction guarantees under its events |
//! | `event_freq` | fraction of samples whose events hold |
//!
//! Floats are written with 12 significant digits; absent values are empty.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::list::lpt_schedule;
use crate::algorithms::local_search::{local_search, Pivot};
use crate::algorithms::optimality::Neighborhood;
use crate::constructions::{build_by_name, ConstructionKind, Mode};
use crate::error::{Error, Result};
use crate::model::{makespan, Instance, Schedule};
use crate::oracle::{
    cho_sahni_bound, jump_quality_bound, jump_smoothed_bound, nl_expectation_bound, optimal_makespan_exact,
    worst_local_optimum_exact,
};
use crate::rng::{derive_seed, stream};
use crate::smoothing::{sample_instance, uniform_spec, RatioEstimate, SmoothedInstanceSpec};

pub const DEFAULT_DELTA: f64 = 0.05;

/// How the worst local optimum of a trial is found.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Enumerate all schedules.
    Exact,
    /// Worst end point of local search from LPT and random starts; a lower
    /// bound on the true worst.
    Multistart { starts: usize, pivot: Pivot },
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Multistart { .. } => "multistart-lower-bound",
        }
    }
}

#[derive(Clone, Debug)]
pub struct EstimateConfig {
    pub neighborhood: Neighborhood,
    pub method: Method,
    pub trials: usize,
    pub seed: u64,
    pub delta: f64,
    pub budget: u64,
    pub eps: f64,
    /// Worker cap; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl EstimateConfig {
    pub fn new(neighborhood: Neighborhood, method: Method, trials: usize, seed: u64) -> Self {
        EstimateConfig {
            neighborhood,
            method,
            trials,
            seed,
            delta: DEFAULT_DELTA,
            budget: crate::oracle::DEFAULT_BUDGET,
            eps: crate::model::EPS,
            threads: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub seed: u64,
    pub ratio: f64,
    pub makespan: f64,
    /// Optimal makespan, or the best makespan found when the optimum is
    /// out of budget.
    pub denominator: f64,
    pub denominator_exact: bool,
    /// `1 + (n - 1) / Q` when it applies to the sample.
    pub quality_bound: Option<f64>,
    /// Local optima seen (exact) or local searches run (multistart).
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmoothedEstimate {
    pub estimator: &'static str,
    /// The reported ratios may underestimate the worst local optimum.
    pub lower_bound: bool,
    pub estimate: RatioEstimate,
    pub trials: Vec<TrialOutcome>,
}

/// Run `f` for `0..count` on a pool of at most `threads` workers and return
/// the results in index order; the first error by index wins.
pub fn run_indexed<T, F>(count: usize, threads: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let work = || (0..count).into_par_iter().map(&f).collect::<Vec<_>>();
    let results = match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    results.into_iter().collect()
}

/// Largest ratio any schedule sampled from a smoothed instance spec can
/// have: makespans are at most `n p_max / s_min` and optima at least
/// `p_max / s_max`. Jump optima of
/// unrestricted instances are also capped by the related-machines bound.
pub fn ratio_ceiling(spec: &SmoothedInstanceSpec) -> f64 {
    let speeds = spec.speeds();
    let generic = spec.num_jobs().max(1) as f64 * speeds[0] / speeds[speeds.len() - 1];
    if spec.allowed().iter().all(Option::is_none) {
        generic.min(cho_sahni_bound(spec.num_machines(), spec.num_jobs()))
    } else {
        generic
    }
}

fn random_schedule(instance: &Instance, rng: &mut impl Rng) -> Schedule {
    let assignment = (0..instance.num_jobs())
        .map(|j| {
            let k = rng.random_range(0..instance.num_eligible(j));
            instance.eligible(j).nth(k).expect("eligible machine")
        })
        .collect();
    Schedule::new(assignment)
}

fn multistart(
    instance: &Instance,
    neighborhood: Neighborhood,
    starts: usize,
    pivot: Pivot,
    seed: u64,
    eps: f64,
) -> Result<(f64, f64)> {
    let mut rng = stream(derive_seed(seed, u64::MAX), 0);
    let mut worst: f64 = 0.0;
    let mut best = f64::INFINITY;
    for s in 0..starts.max(1) {
        let start = if s == 0 {
            lpt_schedule(instance, None)?
        } else {
            random_schedule(instance, &mut rng)
        };
        best = best.min(makespan(instance, &start)?);
        let pivot = match pivot {
            Pivot::Random(p) => Pivot::Random(derive_seed(p, s as u64)),
            other => other,
        };
        let run = local_search(instance, &start, neighborhood, pivot, eps)?;
        let c = makespan(instance, &run.schedule)?;
        worst = worst.max(c);
        best = best.min(c);
    }
    Ok((worst, best))
}

fn run_trial(spec: &SmoothedInstanceSpec, cfg: &EstimateConfig, trial: usize) -> Result<TrialOutcome> {
    let seed = derive_seed(cfg.seed, trial as u64);
    let instance = sample_instance(spec, seed)?;
    let quality_bound = match cfg.neighborhood {
        Neighborhood::Jump | Neighborhood::LexJump if instance.num_machines() <= instance.num_jobs() => {
            jump_quality_bound(&instance).ok()
        }
        _ => None,
    };
    let (makespan, denominator, denominator_exact, count) = match cfg.method {
        Method::Exact => {
            let w = worst_local_optimum_exact(&instance, cfg.neighborhood, cfg.budget, cfg.eps)?;
            (w.makespan, w.optimal_makespan, true, w.local_optima)
        }
        Method::Multistart { starts, pivot } => {
            let (worst, best) = multistart(&instance, cfg.neighborhood, starts, pivot, seed, cfg.eps)?;
            match optimal_makespan_exact(&instance, cfg.budget) {
                Ok(opt) => (worst, opt.makespan, true, starts as u64),
                Err(Error::BudgetExceeded { .. }) => (worst, best, false, starts as u64),
                Err(e) => return Err(e),
            }
        }
    };
    Ok(TrialOutcome {
        trial,
        seed,
        ratio: makespan / denominator,
        makespan,
        denominator,
        denominator_exact,
        quality_bound,
        count,
    })
}

/// Estimate the expected ratio of the worst local optimum to the optimum
/// over instances drawn from `spec`.
pub fn estimate_smoothed_ratio(spec: &SmoothedInstanceSpec, cfg: &EstimateConfig) -> Result<SmoothedEstimate> {
    if cfg.trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let trials = run_indexed(cfg.trials, cfg.threads, |t| run_trial(spec, cfg, t))?;
    let samples = trials.iter().map(|t| t.ratio).collect();
    let range = (ratio_ceiling(spec) - 1.0).max(f64::MIN_POSITIVE);
    let estimate = RatioEstimate::from_samples(samples, range, cfg.delta)?;
    Ok(SmoothedEstimate {
        estimator: cfg.method.label(),
        lower_bound: matches!(cfg.method, Method::Multistart { .. }),
        estimate,
        trials,
    })
}

/// Smoothed instance families addressable from sweeps and the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// One fast machine of speed `max(1, (n-1)/(4 phi))`, the rest unit
    /// speed; job 0 on `[1 - 1/phi, 1]`, the others on `[0, 1/phi]`.
    JumpLb,
    /// Unit speeds, every job on `[1 - 1/phi, 1]`.
    Identical,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::JumpLb => "jump-lb",
            Family::Identical => "identical",
        }
    }

    pub fn spec(self, phi: f64, n: usize, m: usize) -> Result<SmoothedInstanceSpec> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidParameter("need at least one job and one machine".into()));
        }
        if !(phi.is_finite() && phi >= 1.0) {
            return Err(Error::InvalidParameter(format!("phi must be at least 1, got {phi}")));
        }
        let high = uniform_spec(1.0 - 1.0 / phi, 1.0)?;
        match self {
            Family::JumpLb => {
                let mut speeds = vec![1.0; m];
                speeds[0] = ((n - 1) as f64 / (4.0 * phi)).max(1.0);
                let mut densities = vec![uniform_spec(0.0, 1.0 / phi)?; n];
                densities[0] = high;
                SmoothedInstanceSpec::new(speeds, densities)
            }
            Family::Identical => SmoothedInstanceSpec::new(vec![1.0; m], vec![high; n]),
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jump-lb" => Ok(Family::JumpLb),
            "identical" => Ok(Family::Identical),
            other => Err(Error::InvalidParameter(format!("unknown instance family '{other}'"))),
        }
    }
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

fn default_starts() -> usize {
    16
}

/// One block of a sweep grid; rows are generated in the listed order, with
/// `phi` varying slowest.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GridEntry {
    Smoothed {
        family: Family,
        neighborhood: Neighborhood,
        #[serde(default)]
        multistart: bool,
        #[serde(default = "default_starts")]
        starts: usize,
        #[serde(default)]
        pivot: Pivot,
        phi: Vec<f64>,
        n: Vec<usize>,
        /// Defaults to `m = n`.
        #[serde(default)]
        m: Option<Vec<usize>>,
        trials: usize,
        #[serde(default = "default_delta")]
        delta: f64,
    },
    Construction {
        name: String,
        params: Vec<serde_json::Value>,
        samples: usize,
        #[serde(default = "default_delta")]
        delta: f64,
    },
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub entries: Vec<GridEntry>,
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub seed: u64,
    pub eps: f64,
    pub budget: u64,
    pub mode: Mode,
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub kind: &'static str,
    pub name: String,
    pub neighborhood: Neighborhood,
    pub estimator: &'static str,
    pub phi: f64,
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    pub mean_ratio: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub theory_bound: Option<f64>,
    pub theory_bound_kind: Option<&'static str>,
    pub predicted_lb: Option<f64>,
    pub event_freq: Option<f64>,
}

pub const CSV_COLUMNS: [&str; 15] = [
    "kind",
    "name",
    "neighborhood",
    "estimator",
    "phi",
    "n",
    "m",
    "trials",
    "mean_ratio",
    "ci_low",
    "ci_high",
    "theory_bound",
    "theory_bound_kind",
    "predicted_lb",
    "event_freq",
];

fn theory_bound(neighborhood: Neighborhood, phi: f64, restricted: bool) -> (Option<f64>, Option<&'static str>) {
    if restricted {
        return (None, None);
    }
    match neighborhood {
        Neighborhood::LexJump if phi >= 2.0 => (nl_expectation_bound(phi).ok(), Some("near-list-expectation")),
        _ => (Some(jump_smoothed_bound(phi)), Some("jump-smoothed")),
    }
}

fn smoothed_rows(entry: &GridEntry, cfg: &SweepConfig, next_seed: &mut impl FnMut() -> u64) -> Result<Vec<SweepRow>> {
    let GridEntry::Smoothed {
        family,
        neighborhood,
        multistart,
        starts,
        pivot,
        phi,
        n,
        m,
        trials,
        delta,
    } = entry
    else {
        unreachable!()
    };
    let method = if *multistart {
        Method::Multistart {
            starts: *starts,
            pivot: *pivot,
        }
    } else {
        Method::Exact
    };
    let mut rows = Vec::new();
    for &phi in phi {
        for &n in n {
            let ms = m.clone().unwrap_or_else(|| vec![n]);
            for m in ms {
                let spec = family.spec(phi, n, m)?;
                let est = estimate_smoothed_ratio(
                    &spec,
                    &EstimateConfig {
                        neighborhood: *neighborhood,
                        method,
                        trials: *trials,
                        seed: next_seed(),
                        delta: *delta,
                        budget: cfg.budget,
                        eps: cfg.eps,
                        threads: cfg.threads,
                    },
                )?;
                let (bound, kind) = theory_bound(*neighborhood, phi, false);
                rows.push(SweepRow {
                    kind: "smoothed",
                    name: family.name().into(),
                    neighborhood: *neighborhood,
                    estimator: est.estimator,
                    phi,
                    n,
                    m,
                    trials: *trials,
                    mean_ratio: est.estimate.mean,
                    ci_low: est.estimate.ci_low,
                    ci_high: est.estimate.ci_high,
                    theory_bound: bound,
                    theory_bound_kind: kind,
                    predicted_lb: None,
                    event_freq: None,
                });
            }
        }
    }
    Ok(rows)
}

fn construction_rows(
    entry: &GridEntry,
    cfg: &SweepConfig,
    next_seed: &mut impl FnMut() -> u64,
) -> Result<Vec<SweepRow>> {
    let GridEntry::Construction {
        name,
        params,
        samples,
        delta,
    } = entry
    else {
        unreachable!()
    };
    if *samples == 0 {
        return Err(Error::InvalidParameter("samples must be positive".into()));
    }
    let kind: ConstructionKind = name.parse()?;
    let neighborhood = match kind {
        ConstructionKind::JumpRelated | ConstructionKind::RestrictedJump => Neighborhood::Jump,
        ConstructionKind::Lexlist | ConstructionKind::RestrictedLex => Neighborhood::LexJump,
    };
    let mut rows = Vec::new();
    for p in params {
        let c = build_by_name(name, p, cfg.mode)?;
        let seed = next_seed();
        let drawn = run_indexed(*samples, cfg.threads, |t| {
            let s = c.sample(derive_seed(seed, t as u64))?;
            Ok((s.ratio, s.event))
        })?;
        let ratios: Vec<f64> = drawn.iter().map(|d| d.0).collect();
        let events = drawn.iter().filter(|d| d.1).count();
        let range = (ratio_ceiling(&c.spec) - 1.0).max(f64::MIN_POSITIVE);
        let est = RatioEstimate::from_samples(ratios, range, *delta)?;
        let phi = c.spec.phi();
        let restricted = c.spec.allowed().iter().any(Option::is_some);
        let (bound, bound_kind) = theory_bound(neighborhood, phi, restricted);
        rows.push(SweepRow {
            kind: "construction",
            name: kind.name().into(),
            neighborhood,
            estimator: "bad-vs-benchmark",
            phi,
            n: c.spec.num_jobs(),
            m: c.spec.num_machines(),
            trials: *samples,
            mean_ratio: est.mean,
            ci_low: est.ci_low,
            ci_high: est.ci_high,
            theory_bound: bound,
            theory_bound_kind: bound_kind,
            predicted_lb: Some(c.predicted_ratio),
            event_freq: Some(events as f64 / *samples as f64),
        });
    }
    Ok(rows)
}

/// Evaluate every grid point. Row `r` uses seed `derive_seed(seed, r)`.
pub fn sweep(grid: &Grid, cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    let mut counter = 0u64;
    let mut next_seed = || {
        let s = derive_seed(cfg.seed, counter);
        counter += 1;
        s
    };
    let mut rows = Vec::new();
    for entry in &grid.entries {
        match entry {
            GridEntry::Smoothed { .. } => rows.extend(smoothed_rows(entry, cfg, &mut next_seed)?),
            GridEntry::Construction { .. } => rows.extend(construction_rows(entry, cfg, &mut next_seed)?),
        }
    }
    Ok(rows)
}

/// `x` rounded to 12 significant digits, shortest form.
pub fn fmt_float(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    rounded.to_string()
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(CSV_COLUMNS).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.kind.to_string(),
            r.name.clone(),
            r.neighborhood.to_string(),
            r.estimator.to_string(),
            fmt_float(r.phi),
            r.n.to_string(),
            r.m.to_string(),
            r.trials.to_string(),
            fmt_float(r.mean_ratio),
            fmt_float(r.ci_low),
            fmt_float(r.ci_high),
            opt(r.theory_bound),
            r.theory_bound_kind.unwrap_or_default().to_string(),
            opt(r.predicted_lb),
            opt(r.event_freq),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn sweep_to_path(grid: &Grid, cfg: &SweepConfig, path: &Path) -> Result<Vec<SweepRow>> {
    let rows = sweep(grid, cfg)?;
    let file = std::fs::File::create(path)?;
    write_csv(&rows, std::io::BufWriter::new(file))?;
    Ok(rows)
}

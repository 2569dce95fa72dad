//! Machine classification of a schedule relative to the optimum, and
//! structural diagnostics for near list schedules.
//!
//! With `C*` the optimal makespan and `c = floor(C_max / C*) - 1`, the prefix
//! `H_k` holds the fastest machines whose loads are all at least `k C*`, and
//! `R_k = H_k \ H_{k+1}` (`R_c = H_c`). Loads within `eps` of a threshold
//! count as reaching it.

use serde::Serialize;

use crate::algorithms::near_list::is_near_list_eps;
use crate::error::{Error, Result};
use crate::model::{ensure_feasible, loads_of, Instance, Schedule};

/// Whether the optimum passed in is exact or only an upper bound on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptMode {
    Exact,
    UpperBound,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub c: usize,
    /// `thresholds[k]` is `i_k`, the size of `H_k`, for `k = 0..=c`.
    pub thresholds: Vec<usize>,
    /// Class `k` of every machine, i.e. the `k` with machine in `R_k`.
    pub class_of: Vec<usize>,
    /// `classes[k]` lists `R_k`.
    pub classes: Vec<Vec<usize>>,
    pub opt_makespan: f64,
    pub makespan: f64,
    pub mode: OptMode,
    #[serde(skip)]
    loads: Vec<f64>,
    #[serde(skip)]
    eps: f64,
}

impl Classification {
    /// `|H_k|` for any integer `k`; `H_k = M` for `k <= 0`.
    pub fn h_len(&self, k: i64) -> usize {
        if k <= 0 {
            return self.class_of.len();
        }
        let k = k as usize;
        if k <= self.c {
            self.thresholds[k]
        } else {
            prefix_len(&self.loads, k as f64 * self.opt_makespan, self.eps)
        }
    }

    pub fn in_h(&self, k: i64, machine: usize) -> bool {
        machine < self.h_len(k)
    }

    pub fn loads(&self) -> &[f64] {
        &self.loads
    }
}

fn prefix_len(loads: &[f64], threshold: f64, eps: f64) -> usize {
    loads.iter().take_while(|&&l| l >= threshold - eps).count()
}

pub fn classify(instance: &Instance, schedule: &Schedule, opt_makespan: f64) -> Result<Classification> {
    classify_with(instance, schedule, opt_makespan, OptMode::Exact, crate::model::EPS)
}

pub fn classify_with(
    instance: &Instance,
    schedule: &Schedule,
    opt_makespan: f64,
    mode: OptMode,
    eps: f64,
) -> Result<Classification> {
    if !(opt_makespan.is_finite() && opt_makespan > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "optimal makespan must be positive, got {opt_makespan}"
        )));
    }
    ensure_feasible(instance, schedule)?;
    let loads = loads_of(instance, schedule.assignment());
    let makespan = loads.iter().copied().fold(0.0, f64::max);
    if makespan < opt_makespan - eps {
        return Err(Error::Precondition(format!(
            "makespan {makespan} is below the optimum {opt_makespan}"
        )));
    }
    let c = (((makespan + eps) / opt_makespan).floor() as usize).saturating_sub(1);
    let m = loads.len();
    let mut thresholds = vec![m];
    for k in 1..=c {
        thresholds.push(prefix_len(&loads, k as f64 * opt_makespan, eps));
    }
    let mut class_of = vec![0; m];
    let mut classes = vec![Vec::new(); c + 1];
    for (i, class) in class_of.iter_mut().enumerate() {
        *class = (0..=c).rev().find(|&k| i < thresholds[k]).unwrap_or(0);
        classes[*class].push(i);
    }
    let cl = Classification {
        c,
        thresholds,
        class_of,
        classes,
        opt_makespan,
        makespan,
        mode,
        loads,
        eps,
    };
    debug_assert!(cl.properties_hold());
    Ok(cl)
}

impl Classification {
    fn properties_hold(&self) -> bool {
        let opt = self.opt_makespan;
        let nested = self.thresholds.windows(2).all(|w| w[1] <= w[0]);
        let minimum = (0..=self.c).all(|k| {
            self.loads[..self.thresholds[k]]
                .iter()
                .all(|&l| l >= k as f64 * opt - self.eps)
        });
        let maximum = (1..=self.c).all(|k| {
            self.loads
                .get(self.thresholds[k])
                .is_none_or(|&l| l < k as f64 * opt)
        });
        let top = self.loads.first().is_none_or(|&l| l < (self.c + 2) as f64 * opt + self.eps);
        nested && minimum && maximum && top
    }
}

/// The shortest prefix, in `job_order`, of the jobs on `machine` whose load
/// reaches `t C*`.
pub fn prefix_set(
    instance: &Instance,
    schedule: &Schedule,
    job_order: &[usize],
    machine: usize,
    t: usize,
    opt_makespan: f64,
) -> Result<Vec<usize>> {
    prefix_set_eps(instance, schedule, job_order, machine, t, opt_makespan, crate::model::EPS)
}

pub fn prefix_set_eps(
    instance: &Instance,
    schedule: &Schedule,
    job_order: &[usize],
    machine: usize,
    t: usize,
    opt_makespan: f64,
    eps: f64,
) -> Result<Vec<usize>> {
    if t == 0 {
        return Err(Error::InvalidParameter("t must be at least 1".into()));
    }
    if machine >= instance.num_machines() {
        return Err(Error::MachineOutOfRange {
            index: machine,
            machines: instance.num_machines(),
        });
    }
    let target = t as f64 * opt_makespan - eps;
    let s = instance.speed(machine);
    let mut sum = 0.0;
    let mut out = Vec::new();
    for &j in job_order.iter().filter(|&&j| schedule.machine_of(j) == machine) {
        out.push(j);
        sum += instance.p(j) / s;
        if sum >= target {
            return Ok(out);
        }
    }
    Err(Error::InsufficientLoad { machine, t })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NlStatus {
    Pass,
    Fail,
    /// Nothing to check, e.g. `c` too small.
    Vacuous,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NlCheck {
    pub name: String,
    pub status: NlStatus,
    /// Offending machine or job indices (zero-based).
    pub witnesses: Vec<usize>,
    pub detail: String,
}

impl NlCheck {
    fn new(name: &str, status: NlStatus, witnesses: Vec<usize>, detail: String) -> Self {
        NlCheck {
            name: name.into(),
            status,
            witnesses,
            detail,
        }
    }

    fn from_witnesses(name: &str, vacuous: bool, witnesses: Vec<usize>, detail: String) -> Self {
        let status = if vacuous {
            NlStatus::Vacuous
        } else if witnesses.is_empty() {
            NlStatus::Pass
        } else {
            NlStatus::Fail
        };
        NlCheck::new(name, status, witnesses, detail)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NlReport {
    pub classification: Classification,
    /// Checks only bind when the optimum is exact; otherwise they are
    /// advisory.
    pub advisory: bool,
    pub checks: Vec<NlCheck>,
}

impl NlReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != NlStatus::Fail)
    }

    pub fn check(&self, name: &str) -> Option<&NlCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Run the structural checks on a near list schedule.
///
/// Fails with [`Error::Precondition`] when the instance is restricted or the
/// schedule is not near list under `job_order`. Passing an optimal schedule
/// adds the cross-check that every job of `J_{i,>=t}` with `i` in `H_k` sits
/// on `H_{k-t-1}` there.
pub fn validate_nl_structure(
    instance: &Instance,
    schedule: &Schedule,
    job_order: &[usize],
    opt_makespan: f64,
    mode: OptMode,
    optimal: Option<&Schedule>,
    eps: f64,
) -> Result<NlReport> {
    if instance.is_restricted() {
        return Err(Error::Precondition("structure checks need an unrestricted instance".into()));
    }
    if !is_near_list_eps(instance, schedule, job_order, eps)? {
        return Err(Error::Precondition("schedule is not near list under the given order".into()));
    }
    if let Some(opt) = optimal {
        ensure_feasible(instance, opt)?;
    }
    let cl = classify_with(instance, schedule, opt_makespan, mode, eps)?;
    let c = cl.c;
    let m = instance.num_machines();
    let speeds = instance.speeds();
    let mut checks = Vec::new();

    let top = cl.class_of.first().copied().unwrap_or(0);
    checks.push(NlCheck::from_witnesses(
        "fastest_machine_in_top_class",
        false,
        if top == c { vec![] } else { vec![0] },
        format!("machine 0 in R_{top}, c = {c}"),
    ));

    // H_{k-2} \ H_k is non-empty for 1 <= k <= c-1
    let gaps: Vec<usize> = (1..c)
        .filter(|&k| cl.h_len(k as i64 - 2) <= cl.h_len(k as i64))
        .collect();
    checks.push(NlCheck::from_witnesses(
        "no_two_adjacent_empty_classes",
        c < 2,
        gaps.clone(),
        if gaps.is_empty() { String::new() } else { format!("empty H_(k-2) \\ H_k for k in {gaps:?}") },
    ));

    // speeds in H_k at least twice those outside H_{k-4}, k = 5..=c
    let mut halving = Vec::new();
    let mut halving_pairs = 0;
    for k in 5..=c {
        let inner = cl.h_len(k as i64);
        let outer = cl.h_len(k as i64 - 4);
        if inner == 0 || outer == m {
            continue;
        }
        halving_pairs += 1;
        // slowest of H_k against fastest outside H_{k-4}
        if speeds[inner - 1] < 2.0 * speeds[outer] * (1.0 - 1e-12) {
            halving.push(k);
        }
    }
    checks.push(NlCheck::from_witnesses(
        "speed_halving_four_classes_down",
        halving_pairs == 0,
        halving,
        format!("{halving_pairs} non-vacuous class pairs"),
    ));

    // s_{i1} >= s_{i2} 2^floor((k1-k2)/6) for i1 in R_k1, i2 in R_k2
    let mut doubling = Vec::new();
    let mut doubling_pairs = 0;
    for k1 in 0..=c {
        let Some(&slow) = cl.classes[k1].last() else { continue };
        for k2 in 0..=k1 {
            let Some(&fast) = cl.classes[k2].first() else { continue };
            let delta = (k1 - k2) / 6;
            if delta == 0 {
                continue;
            }
            doubling_pairs += 1;
            let want = speeds[fast] * 2f64.powi(delta as i32);
            if speeds[slow] < want * (1.0 - 1e-12) {
                doubling.push(slow);
                doubling.push(fast);
            }
        }
    }
    checks.push(NlCheck::from_witnesses(
        "speed_doubling_every_six_classes",
        doubling_pairs == 0,
        doubling,
        format!("{doubling_pairs} non-vacuous class pairs"),
    ));

    // at least n/2 jobs of size <= 2^(2 - c/6), sizes relative to p_max
    let n = instance.num_jobs();
    let pmax = instance.max_processing();
    let cutoff = 2f64.powf(2.0 - c as f64 / 6.0);
    let large: Vec<usize> = (0..n).filter(|&j| instance.p(j) / pmax > cutoff + eps).collect();
    let small = n - large.len();
    checks.push(NlCheck::from_witnesses(
        "half_of_jobs_small",
        false,
        if 2 * small >= n { vec![] } else { large },
        format!("{small} of {n} jobs at most {cutoff} p_max"),
    ));

    if let Some(opt) = optimal {
        let mut bad = Vec::new();
        let mut cases = 0;
        for k in 1..=c {
            for i in 0..cl.h_len(k as i64) {
                for t in 1..=k {
                    let home = k as i64 - t as i64 - 1;
                    if home <= 0 {
                        continue;
                    }
                    let prefix = prefix_set_eps(instance, schedule, job_order, i, t, opt_makespan, eps)?;
                    cases += prefix.len();
                    bad.extend(prefix.into_iter().filter(|&j| !cl.in_h(home, opt.machine_of(j))));
                }
            }
        }
        bad.sort_unstable();
        bad.dedup();
        checks.push(NlCheck::from_witnesses(
            "optimal_keeps_prefix_jobs_high",
            cases == 0,
            bad,
            format!("{cases} job placements checked"),
        ));
    }

    Ok(NlReport {
        advisory: mode == OptMode::UpperBound,
        classification: cl,
        checks,
    })
}

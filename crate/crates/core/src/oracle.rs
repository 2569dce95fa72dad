//! Exact optima, worst local optima and closed-form quality bounds.

use serde::Serialize;

use crate::algorithms::list::lpt_schedule;
use crate::algorithms::optimality::{has_improving_move, Neighborhood};
use crate::error::{Error, Result};
use crate::model::{loads_of, max_load, Instance, Schedule};

pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Number of feasible assignments, saturating at `u128::MAX`.
pub fn assignment_space(instance: &Instance) -> u128 {
    (0..instance.num_jobs())
        .map(|j| instance.num_eligible(j) as u128)
        .fold(1u128, |acc, k| acc.saturating_mul(k))
}

fn check_budget(instance: &Instance, budget: u64) -> Result<()> {
    let size = assignment_space(instance);
    if size == 0 {
        return Err(Error::NoFeasibleAssignment);
    }
    if size > budget as u128 {
        return Err(Error::BudgetExceeded { size, budget });
    }
    Ok(())
}

fn eligible_lists(instance: &Instance) -> Vec<Vec<usize>> {
    (0..instance.num_jobs()).map(|j| instance.eligible(j).collect()).collect()
}

/// Visit every feasible assignment; job 0 varies fastest.
pub fn for_each_assignment(
    instance: &Instance,
    budget: u64,
    mut visit: impl FnMut(&[usize]),
) -> Result<()> {
    check_budget(instance, budget)?;
    let choices = eligible_lists(instance);
    let n = choices.len();
    let mut digit = vec![0usize; n];
    let mut assignment: Vec<usize> = choices.iter().map(|c| c[0]).collect();
    loop {
        visit(&assignment);
        let mut j = 0;
        loop {
            if j == n {
                return Ok(());
            }
            digit[j] += 1;
            if digit[j] < choices[j].len() {
                assignment[j] = choices[j][digit[j]];
                break;
            }
            digit[j] = 0;
            assignment[j] = choices[j][0];
            j += 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Optimum {
    pub makespan: f64,
    pub schedule: Schedule,
}

/// `max(Q / sum s_i, max_j min_{i in M_j} p_j / s_i)`.
pub fn makespan_lower_bound(instance: &Instance) -> f64 {
    let volume = instance.total_processing() / instance.total_speed();
    let single = (0..instance.num_jobs())
        .map(|j| {
            instance
                .eligible(j)
                .map(|i| instance.p(j) / instance.speed(i))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0_f64, f64::max);
    volume.max(single)
}

/// Optimum by plain enumeration of all assignments.
pub fn optimal_makespan_enumerate(instance: &Instance, budget: u64) -> Result<Optimum> {
    let mut best: Option<(f64, Vec<usize>)> = None;
    for_each_assignment(instance, budget, |a| {
        let c = max_load(&loads_of(instance, a));
        if best.as_ref().is_none_or(|(b, _)| c < *b) {
            best = Some((c, a.to_vec()));
        }
    })?;
    let (makespan, assignment) = best.ok_or(Error::NoFeasibleAssignment)?;
    Ok(Optimum {
        makespan,
        schedule: Schedule::new(assignment),
    })
}

struct Search<'a> {
    instance: &'a Instance,
    order: Vec<usize>,
    choices: Vec<Vec<usize>>,
    /// `max_{k >= d} min_i p_{order[k]} / s_i`
    suffix_single: Vec<f64>,
    /// remaining processing volume from depth `d` on
    suffix_work: Vec<f64>,
    total_speed: f64,
    symmetric: bool,
    loads: Vec<f64>,
    counts: Vec<usize>,
    assignment: Vec<usize>,
    best: f64,
    best_assignment: Vec<usize>,
}

impl Search<'_> {
    fn bound(&self, depth: usize) -> f64 {
        let done: f64 = self
            .loads
            .iter()
            .zip(self.instance.speeds())
            .map(|(l, s)| l * s)
            .sum();
        max_load(&self.loads)
            .max((done + self.suffix_work[depth]) / self.total_speed)
            .max(self.suffix_single[depth])
    }

    fn run(&mut self, depth: usize) {
        if depth == self.order.len() {
            let c = max_load(&loads_of(self.instance, &self.assignment));
            if c < self.best {
                self.best = c;
                self.best_assignment.clone_from(&self.assignment);
            }
            return;
        }
        if self.bound(depth) > self.best * (1.0 + 1e-12) {
            return;
        }
        let j = self.order[depth];
        let p = self.instance.p(j);
        for k in 0..self.choices[depth].len() {
            let i = self.choices[depth][k];
            if self.symmetric && self.counts[i] == 0 {
                // an empty machine of equal speed with a lower index was already tried
                let s = self.instance.speed(i);
                if (0..i).any(|h| self.counts[h] == 0 && self.instance.speed(h) == s) {
                    continue;
                }
            }
            let before = self.loads[i];
            self.loads[i] += p / self.instance.speed(i);
            self.counts[i] += 1;
            self.assignment[j] = i;
            self.run(depth + 1);
            self.counts[i] -= 1;
            self.loads[i] = before;
        }
    }
}

/// Exact optimum by depth-first branch-and-bound.
///
/// Jobs are branched largest first, the LPT schedule seeds the incumbent and
/// empty machines of equal speed are interchangeable in unrestricted
/// instances. Leaf makespans use the canonical load sums, so the value equals
/// the one found by [`optimal_makespan_enumerate`] bit for bit.
pub fn optimal_makespan_exact(instance: &Instance, budget: u64) -> Result<Optimum> {
    check_budget(instance, budget)?;
    let n = instance.num_jobs();
    let seed = lpt_schedule(instance, None)?;
    let seed_makespan = max_load(&loads_of(instance, seed.assignment()));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| instance.p(b).total_cmp(&instance.p(a)).then(a.cmp(&b)));
    let choices: Vec<Vec<usize>> = order.iter().map(|&j| instance.eligible(j).collect()).collect();
    let mut suffix_single = vec![0.0_f64; n + 1];
    let mut suffix_work = vec![0.0; n + 1];
    for d in (0..n).rev() {
        let j = order[d];
        let single = choices[d]
            .iter()
            .map(|&i| instance.p(j) / instance.speed(i))
            .fold(f64::INFINITY, f64::min);
        suffix_single[d] = suffix_single[d + 1].max(single);
        suffix_work[d] = suffix_work[d + 1] + instance.p(j);
    }
    let mut search = Search {
        instance,
        order,
        choices,
        suffix_single,
        suffix_work,
        total_speed: instance.total_speed(),
        symmetric: !instance.is_restricted(),
        loads: vec![0.0; instance.num_machines()],
        counts: vec![0; instance.num_machines()],
        assignment: seed.assignment().to_vec(),
        best: seed_makespan,
        best_assignment: seed.assignment().to_vec(),
    };
    search.run(0);
    Ok(Optimum {
        makespan: search.best,
        schedule: Schedule::new(search.best_assignment),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WorstLocalOptimum {
    pub ratio: f64,
    pub makespan: f64,
    pub optimal_makespan: f64,
    pub witness: Schedule,
    /// Number of local optima seen during enumeration.
    pub local_optima: u64,
}

/// Worst local optimum over all feasible assignments, relative to the
/// optimum of the same enumeration.
pub fn worst_local_optimum_exact(
    instance: &Instance,
    neighborhood: Neighborhood,
    budget: u64,
    eps: f64,
) -> Result<WorstLocalOptimum> {
    let mut opt = f64::INFINITY;
    let mut worst: Option<(f64, Vec<usize>)> = None;
    let mut count = 0u64;
    for_each_assignment(instance, budget, |a| {
        let loads = loads_of(instance, a);
        let c = max_load(&loads);
        opt = opt.min(c);
        if !has_improving_move(instance, a, &loads, neighborhood, eps) {
            count += 1;
            if worst.as_ref().is_none_or(|(w, _)| c > *w) {
                worst = Some((c, a.to_vec()));
            }
        }
    })?;
    // every optimum is a local optimum, so `worst` is set
    let (makespan, witness) = worst.ok_or(Error::NoFeasibleAssignment)?;
    if opt <= 0.0 {
        return Err(Error::InvalidInstance("optimal makespan is zero".into()));
    }
    Ok(WorstLocalOptimum {
        ratio: makespan / opt,
        makespan,
        optimal_makespan: opt,
        witness: Schedule::new(witness),
        local_optima: count,
    })
}

/// Worst-case ratio of jump optima on related machines,
/// `(1 + sqrt(4 min(m, n) - 3)) / 2`.
pub fn cho_sahni_bound(m: usize, n: usize) -> f64 {
    let k = m.min(n).max(1) as f64;
    (1.0 + (4.0 * k - 3.0).sqrt()) / 2.0
}

/// `1 + (n - 1) / Q`, bounding the ratio of every jump optimum of an
/// unrestricted instance with `p_j <= 1`.
pub fn jump_quality_bound(instance: &Instance) -> Result<f64> {
    if instance.num_jobs() == 0 {
        return Err(Error::InvalidInstance("no jobs".into()));
    }
    if instance.is_restricted() {
        return Err(Error::Precondition("jump quality bound needs an unrestricted instance".into()));
    }
    if instance.max_processing() > 1.0 {
        return Err(Error::Precondition(format!(
            "jump quality bound needs p_j <= 1, got {}",
            instance.max_processing()
        )));
    }
    Ok(1.0 + (instance.num_jobs() - 1) as f64 / instance.total_processing())
}

/// Expected worst jump ratio on smoothed related instances is below
/// `5.1 phi + 2.5`.
pub fn jump_smoothed_bound(phi: f64) -> f64 {
    5.1 * phi + 2.5
}

fn check_phi(phi: f64) -> Result<()> {
    if phi.is_finite() && phi >= 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("phi must be at least 2, got {phi}")))
    }
}

/// Tail bound `(32 phi / 2^(alpha/6))^(n/2)` on the near-list ratio
/// exceeding `alpha`, clamped to `[0, 1]`.
pub fn nl_tail_bound(phi: f64, alpha: f64, n: usize) -> Result<f64> {
    check_phi(phi)?;
    let base = 32.0 * phi / 2f64.powf(alpha / 6.0);
    let value = base.powf(n as f64 / 2.0);
    Ok(if value.is_nan() { 1.0 } else { value.clamp(0.0, 1.0) })
}

/// `18 log2(phi) + 30`, bounding the expected near-list ratio.
pub fn nl_expectation_bound(phi: f64) -> Result<f64> {
    check_phi(phi)?;
    Ok(18.0 * phi.log2() + 30.0)
}

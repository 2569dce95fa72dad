//! Near list schedules.
//!
//! A schedule is near list under a job indexing when every job `j` on machine
//! `i` satisfies, for each other eligible machine `i'`,
//!
//! ```text
//! L_i' + p_j / s_i'  >=  L_i - (sum of p_l / s_i over jobs l on i indexed before j)
//! ```
//!
//! List schedules are near list under the reversed list, lex-jump optima under
//! every indexing.

use itertools::Itertools;

use super::list::check_permutation;
use crate::error::{Error, Result};
use crate::model::{ensure_feasible, loads_of, Instance, Schedule, EPS};

pub const DEFAULT_ORDER_SEARCH_LIMIT: usize = 8;

fn holds(instance: &Instance, assignment: &[usize], loads: &[f64], order: &[usize], eps: f64) -> bool {
    let mut before = vec![0.0; instance.num_machines()];
    for &j in order {
        let i = assignment[j];
        let threshold = loads[i] - before[i] - eps;
        let p = instance.p(j);
        for t in instance.eligible(j) {
            if t != i && loads[t] + p / instance.speed(t) < threshold {
                return false;
            }
        }
        before[i] += p / instance.speed(i);
    }
    true
}

/// Check the near-list inequality with indices taken as positions in
/// `job_order`.
pub fn is_near_list(instance: &Instance, schedule: &Schedule, job_order: &[usize]) -> Result<bool> {
    is_near_list_eps(instance, schedule, job_order, EPS)
}

pub fn is_near_list_eps(
    instance: &Instance,
    schedule: &Schedule,
    job_order: &[usize],
    eps: f64,
) -> Result<bool> {
    ensure_feasible(instance, schedule)?;
    check_permutation(job_order, instance.num_jobs())?;
    let loads = loads_of(instance, schedule.assignment());
    Ok(holds(instance, schedule.assignment(), &loads, job_order, eps))
}

/// Exhaustive search for a job order witnessing the near-list property,
/// identity first.
pub fn find_near_list_order(
    instance: &Instance,
    schedule: &Schedule,
    limit: usize,
) -> Result<Option<Vec<usize>>> {
    ensure_feasible(instance, schedule)?;
    let n = instance.num_jobs();
    if n > limit {
        return Err(Error::LimitExceeded {
            what: "near-list order search",
            size: n,
            limit,
        });
    }
    let loads = loads_of(instance, schedule.assignment());
    Ok((0..n)
        .permutations(n)
        .find(|order| holds(instance, schedule.assignment(), &loads, order, EPS)))
}

//! List schedules and lex-jump optima with ratio `Omega(log phi)` on
//! unrestricted related machines.
//!
//! With `r = floor(log_4 phi)`, machine class `M_k` (`k = 0..=r`) holds
//! `r!/k!` machines of speed `2^k` and job class `J_l` (`l = 1..=r`) holds
//! `r!/(l-1)!` jobs drawn from `[2^l, 2^l + 2^(r+1)/phi)`. Processing
//! requirements live on `[0, 2^(r+1)]`. Machines are ordered fastest class
//! first, jobs by class `J_1, J_2, ...`.

use serde_json::json;

use super::{Check, ClassLayout, Construction, ConstructionKind, ConstructionSample, Event, Family, NamedRange};
use crate::algorithms::list::list_schedule;
use crate::algorithms::optimality::is_lex_jump_optimal;
use crate::error::{Error, Result};
use crate::model::{Instance, Schedule};
use crate::smoothing::{DensitySpec, SmoothedInstanceSpec};

/// Refuse to build more jobs than this.
const MAX_JOBS: u128 = 5_000_000;

struct Lexlist {
    r: usize,
    /// `M_k` as a machine range, indexed by `k`.
    machine_class: Vec<std::ops::Range<usize>>,
    /// `J_l` as a job range, indexed by `l` (entry 0 unused).
    job_class: Vec<std::ops::Range<usize>>,
    order: Vec<usize>,
}

fn falling(r: usize, k: usize) -> u128 {
    // r! / k!
    ((k + 1)..=r).map(|x| x as u128).product()
}

/// Requires `phi >= 4`.
pub fn build_lexlist_lb(phi: f64) -> Result<Construction> {
    if !(phi.is_finite() && phi >= 4.0) {
        return Err(Error::InvalidParameter(format!("phi must be at least 4, got {phi}")));
    }
    let mut r = 1usize;
    while 4f64.powi(r as i32 + 1) <= phi {
        r += 1;
    }
    let jobs_total: u128 = (1..=r).map(|l| falling(r, l - 1)).sum();
    if jobs_total > MAX_JOBS {
        return Err(Error::TooLarge {
            jobs: jobs_total,
            cap: MAX_JOBS as usize,
        });
    }
    let scale = 2f64.powi(r as i32 + 1);

    let mut speeds = Vec::new();
    let mut machine_class = vec![0..0; r + 1];
    for k in (0..=r).rev() {
        let start = speeds.len();
        speeds.extend(std::iter::repeat_n(2f64.powi(k as i32), falling(r, k) as usize));
        machine_class[k] = start..speeds.len();
    }
    let mut densities = Vec::new();
    let mut job_class = vec![0..0; r + 1];
    for l in 1..=r {
        let start = densities.len();
        let a = 2f64.powi(l as i32);
        let d = DensitySpec::uniform(a, a + scale / phi, scale)?;
        densities.extend(std::iter::repeat_n(d, falling(r, l - 1) as usize));
        job_class[l] = start..densities.len();
    }
    let spec = SmoothedInstanceSpec::new(speeds, densities)?;

    // Algorithm 1: for k = 1..=r, for l = r down to k, the next r!/l! jobs of J_l
    let mut next: Vec<usize> = job_class.iter().map(|c| c.start).collect();
    let mut order = Vec::with_capacity(spec.num_jobs());
    for k in 1..=r {
        for l in (k..=r).rev() {
            let take = falling(r, l) as usize;
            order.extend(next[l]..next[l] + take);
            next[l] += take;
        }
    }

    let layout = ClassLayout {
        machine_classes: (0..=r)
            .rev()
            .map(|k| NamedRange::new(format!("M_{k}"), machine_class[k].clone()))
            .collect(),
        job_classes: (1..=r)
            .map(|l| NamedRange::new(format!("J_{l}"), job_class[l].clone()))
            .collect(),
    };
    Ok(Construction {
        kind: ConstructionKind::Lexlist,
        params: json!({ "phi": phi, "r": r }),
        spec,
        layout,
        warnings: Vec::new(),
        predicted_ratio: r as f64 / 3.0,
        family: Box::new(Lexlist {
            r,
            machine_class,
            job_class,
            order,
        }),
    })
}

impl Family for Lexlist {
    fn schedules(&self, instance: &Instance) -> Result<(Schedule, Schedule)> {
        let bad = list_schedule(instance, &self.order, None)?;
        let mut good = vec![usize::MAX; instance.num_jobs()];
        // q-th machine of M_l gets the q-th job of J_{l+1}
        for l in 0..self.r {
            for (i, j) in self.machine_class[l].clone().zip(self.job_class[l + 1].clone()) {
                good[j] = i;
            }
        }
        Ok((bad, Schedule::new(good)))
    }

    fn events(&self, _instance: &Instance) -> Vec<Event> {
        Vec::new()
    }

    fn list_order(&self) -> Option<&[usize]> {
        Some(&self.order)
    }

    fn checks(&self, sample: &ConstructionSample, eps: f64) -> Vec<Check> {
        let bad = &sample.bad;
        let mut structure = true;
        let mut detail = String::new();
        let mut counts = vec![0usize; sample.instance.num_machines()];
        for (j, &i) in bad.assignment().iter().enumerate() {
            counts[i] += 1;
            let l = (1..=self.r).find(|&l| self.job_class[l].contains(&j)).unwrap_or(0);
            if !self.machine_class[l].contains(&i) {
                structure = false;
                detail = format!("job {j} of J_{l} on machine {i}");
            }
        }
        for k in 0..=self.r {
            for i in self.machine_class[k].clone() {
                if counts[i] != k {
                    structure = false;
                    detail = format!("machine {i} of M_{k} carries {} jobs", counts[i]);
                }
            }
        }
        let relisted = list_schedule(&sample.instance, &self.order, None)
            .map(|s| &s == bad)
            .unwrap_or(false);
        vec![
            Check::new("class_structure", structure, detail),
            Check::new(
                "bad_is_lex_jump_optimal",
                is_lex_jump_optimal(&sample.instance, bad, eps).unwrap_or(false),
                String::new(),
            ),
            Check::new("bad_is_algorithm_list_schedule", relisted, String::new()),
            Check::new(
                "benchmark_below_3",
                sample.good_makespan < 3.0,
                format!("C_max(sigma') = {}", sample.good_makespan),
            ),
            Check::new(
                "bad_at_least_r",
                sample.bad_makespan >= self.r as f64 - eps,
                format!("C_max(sigma) = {}", sample.bad_makespan),
            ),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{load, EPS};

    #[test]
    fn sizes() {
        let c = build_lexlist_lb(256.0).unwrap();
        assert_eq!(c.spec.num_machines(), 65);
        assert_eq!(c.spec.num_jobs(), 64);
        assert_eq!(c.params["r"], 4);
        let c = build_lexlist_lb(4.0).unwrap();
        assert_eq!(c.spec.speeds(), &[2.0, 1.0]);
        assert_eq!(c.spec.num_jobs(), 1);
        let d = &c.spec.densities()[0];
        assert_eq!(d.pieces()[0].a, 2.0);
        assert_eq!(d.pieces()[0].b, 3.0);
        assert_eq!(d.scale(), 4.0);
        assert!(build_lexlist_lb(3.9).is_err());
    }

    #[test]
    fn predicted_ratios() {
        for (phi, r) in [(4.0, 1.0), (16.0, 2.0), (64.0, 3.0), (256.0, 4.0)] {
            assert_eq!(build_lexlist_lb(phi).unwrap().predicted_ratio, r / 3.0);
        }
    }

    #[test]
    fn algorithm_order_is_a_permutation() {
        let c = build_lexlist_lb(64.0).unwrap();
        let mut order = c.list_order().unwrap().to_vec();
        order.sort_unstable();
        assert_eq!(order, (0..c.spec.num_jobs()).collect::<Vec<_>>());
    }

    #[test]
    fn samples_pass_checks() {
        for phi in [4.0, 16.0, 64.0, 256.0] {
            let c = build_lexlist_lb(phi).unwrap();
            for seed in 0..3 {
                let s = c.sample(seed).unwrap();
                for check in c.validate(&s, EPS) {
                    assert!(check.passed(), "phi {phi}: {check:?}");
                }
            }
        }
        let c = build_lexlist_lb(256.0).unwrap();
        let s = c.sample(1).unwrap();
        let top = load(&s.instance, &s.bad, 0).unwrap();
        assert!((4.0..5.0).contains(&top));
    }
}

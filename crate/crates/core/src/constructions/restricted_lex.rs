//! Lex-jump optima on restricted identical machines with ratio
//! `Omega(log m / log log m)`.
//!
//! Machine class `M_h` (`h = 1..=z`) holds `m_h = a_{h-1}` unit-speed
//! machines. Job class `J_h` splits into `a_h` type-A jobs on `[7/8, 1]`
//! allowed on `M_h` and `M_{h+1}`, and `b_h = 17 m_h` type-B jobs on
//! `[0, 1/8]` allowed on `M_h` only. The bad schedule runs LPT inside every
//! class; the benchmark shifts the type-A jobs one class up.

use num_traits::ToPrimitive;
use serde_json::json;

use super::recurrence::recurrence_a;
use super::{Check, ClassLayout, Construction, ConstructionKind, ConstructionSample, Event, Family, Mode, NamedRange};
use crate::algorithms::list::ListScheduler;
use crate::algorithms::optimality::is_lex_jump_optimal;
use crate::error::{Error, Result};
use crate::model::{loads, Instance, MachineSet, Schedule};
use crate::smoothing::{uniform_spec, SmoothedInstanceSpec};

/// Default limit on the number of jobs a build may allocate.
pub const DEFAULT_JOB_CAP: usize = 5_000_000;

struct Class {
    machines: std::ops::Range<usize>,
    a_jobs: std::ops::Range<usize>,
    b_jobs: std::ops::Range<usize>,
}

struct RestrictedLex {
    k: u64,
    classes: Vec<Class>,
}

pub fn build_restricted_lex_lb(k: u64, mode: Mode) -> Result<Construction> {
    build_restricted_lex_lb_with_cap(k, mode, DEFAULT_JOB_CAP)
}

/// Requires `k >= 2`; strict mode requires `k >= 68`. Fails with
/// [`Error::TooLarge`] when the instance would have more than `cap` jobs.
pub fn build_restricted_lex_lb_with_cap(k: u64, mode: Mode, cap: usize) -> Result<Construction> {
    let rec = recurrence_a(k)?;
    let mut warnings = Vec::new();
    mode.premise(k >= 68, format!("k = {k} is below 68"), &mut warnings)?;
    let jobs = rec.job_count();
    if jobs > cap.into() {
        return Err(Error::TooLarge {
            jobs: jobs.to_u128().unwrap_or(u128::MAX),
            cap,
        });
    }
    let a: Vec<usize> = rec.a.iter().map(|x| x.to_usize().expect("bounded by cap")).collect();
    let z = rec.z;

    let mut machine_ranges = Vec::with_capacity(z);
    let mut start = 0;
    for h in 1..=z {
        machine_ranges.push(start..start + a[h - 1]);
        start += a[h - 1];
    }
    let m = start;
    let speeds = vec![1.0; m];

    let dens_a = uniform_spec(7.0 / 8.0, 1.0)?;
    let dens_b = uniform_spec(0.0, 1.0 / 8.0)?;
    let mut densities = Vec::new();
    let mut allowed = Vec::new();
    let mut classes = Vec::with_capacity(z);
    for h in 1..=z {
        let own = machine_ranges[h - 1].clone();
        let upper = if h < z { machine_ranges[h].end } else { own.end };
        let set_a = MachineSet::range(own.start..upper);
        let set_b = MachineSet::range(own.clone());
        let a_start = densities.len();
        densities.extend(std::iter::repeat_n(dens_a.clone(), a[h]));
        allowed.extend(std::iter::repeat_n(Some(set_a), a[h]));
        let b_start = densities.len();
        let b_h = 17 * a[h - 1];
        densities.extend(std::iter::repeat_n(dens_b.clone(), b_h));
        allowed.extend(std::iter::repeat_n(Some(set_b), b_h));
        classes.push(Class {
            machines: own,
            a_jobs: a_start..b_start,
            b_jobs: b_start..densities.len(),
        });
    }
    let spec = SmoothedInstanceSpec::with_allowed(speeds, densities, allowed)?;

    let layout = ClassLayout {
        machine_classes: classes
            .iter()
            .enumerate()
            .map(|(h, c)| NamedRange::new(format!("M_{}", h + 1), c.machines.clone()))
            .collect(),
        job_classes: classes
            .iter()
            .enumerate()
            .flat_map(|(h, c)| {
                [
                    NamedRange::new(format!("J_{}^A", h + 1), c.a_jobs.clone()),
                    NamedRange::new(format!("J_{}^B", h + 1), c.b_jobs.clone()),
                ]
            })
            .collect(),
    };
    let kf = k as f64;
    Ok(Construction {
        kind: ConstructionKind::RestrictedLex,
        params: json!({ "k": k, "z": z, "a": a }),
        spec,
        layout,
        warnings,
        predicted_ratio: (15.0 * kf / 16.0) / 5.0,
        family: Box::new(RestrictedLex { k, classes }),
    })
}

impl RestrictedLex {
    fn expected_class_load(&self, c: &Class) -> f64 {
        let m_h = c.machines.len() as f64;
        (15.0 / 16.0 * c.a_jobs.len() as f64 + c.b_jobs.len() as f64 / 16.0) / m_h
    }
}

impl Family for RestrictedLex {
    fn schedules(&self, instance: &Instance) -> Result<(Schedule, Schedule)> {
        let p = instance.jobs();
        let mut bad = ListScheduler::new(instance);
        for c in &self.classes {
            let mut order: Vec<usize> = (c.a_jobs.start..c.b_jobs.end).collect();
            order.sort_by(|&x, &y| p[y].total_cmp(&p[x]).then(x.cmp(&y)));
            let machines: Vec<usize> = c.machines.clone().collect();
            bad.schedule_all(&order, Some(&machines))?;
        }

        let z = self.classes.len();
        let mut good = vec![usize::MAX; instance.num_jobs()];
        for (h, c) in self.classes.iter().enumerate() {
            let target = if h + 1 < z { &self.classes[h + 1].machines } else { &c.machines };
            for (q, j) in c.a_jobs.clone().enumerate() {
                good[j] = target.start + q;
            }
            for (q, j) in c.b_jobs.clone().enumerate() {
                good[j] = c.machines.start + q / 17;
            }
        }
        Ok((bad.into_schedule()?, Schedule::new(good)))
    }

    fn events(&self, instance: &Instance) -> Vec<Event> {
        let p = instance.jobs();
        let mut events = Vec::with_capacity(2 * self.classes.len());
        for (h, c) in self.classes.iter().enumerate() {
            let m_h = c.machines.len() as f64;
            let qa: f64 = p[c.a_jobs.clone()].iter().sum();
            let qb: f64 = p[c.b_jobs.clone()].iter().sum();
            let ea = 15.0 / 16.0 * c.a_jobs.len() as f64;
            let eb = c.b_jobs.len() as f64 / 16.0;
            events.push(Event {
                name: format!("E_{}^A", h + 1),
                holds: (qa - ea).abs() <= m_h / 16.0,
            });
            events.push(Event {
                name: format!("E_{}^B", h + 1),
                holds: (qb - eb).abs() <= m_h / 32.0,
            });
        }
        events
    }

    fn checks(&self, sample: &ConstructionSample, eps: f64) -> Vec<Check> {
        let event = sample.event;
        let l = loads(&sample.instance, &sample.bad).unwrap_or_default();
        let mut checks = vec![Check::new(
            "benchmark_at_most_5",
            sample.good_makespan <= 5.0 + eps,
            format!("C_max(sigma') = {}", sample.good_makespan),
        )];
        checks.push(Check::given(event, "within_class_spread", || {
            let mut worst: f64 = 0.0;
            for c in &self.classes {
                let class = &l[c.machines.clone()];
                let hi = class.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let lo = class.iter().copied().fold(f64::INFINITY, f64::min);
                worst = worst.max(hi - lo);
            }
            (worst <= 1.0 / 8.0 + eps, format!("largest spread {worst}"))
        }));
        checks.push(Check::given(event, "load_near_class_mean", || {
            let mut worst: f64 = 0.0;
            for c in &self.classes {
                let mean = self.expected_class_load(c);
                for &load in &l[c.machines.clone()] {
                    worst = worst.max((load - mean).abs());
                }
            }
            (worst <= 7.0 / 32.0 + eps, format!("largest deviation {worst}"))
        }));
        checks.push(Check::given(event, "bad_is_lex_jump_optimal", || {
            let ok = is_lex_jump_optimal(&sample.instance, &sample.bad, eps).unwrap_or(false);
            (ok, String::new())
        }));
        checks.push(Check::given(event, "bad_at_least_15k/16", || {
            let want = 15.0 * self.k as f64 / 16.0;
            (
                sample.bad_makespan >= want - eps,
                format!("C_max(sigma) = {} vs {want}", sample.bad_makespan),
            )
        }));
        checks
    }
}

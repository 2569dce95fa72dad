//! Instances, schedules and load arithmetic.
//!
//! Machines and jobs are indexed from zero inside the library. The JSON
//! formats in [`crate::json`] use one-based machine indices.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

/// Absolute tolerance used by every optimality comparison.
pub const EPS: f64 = 1e-9;

/// Sorted, duplicate-free set of machine indices.
///
/// Cloning is cheap; constructions hand the same set to thousands of jobs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MachineSet(Arc<[usize]>);

impl MachineSet {
    pub fn new(mut machines: Vec<usize>) -> Self {
        machines.sort_unstable();
        machines.dedup();
        MachineSet(machines.into())
    }

    pub fn range(range: std::ops::Range<usize>) -> Self {
        MachineSet(range.collect::<Vec<_>>().into())
    }

    pub fn contains(&self, machine: usize) -> bool {
        self.0.binary_search(&machine).is_ok()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_superset_of(&self, other: &[usize]) -> bool {
        other.iter().all(|&i| self.contains(i))
    }

    /// Identity of the shared allocation, used to group jobs with the same set.
    pub(crate) fn key(&self) -> usize {
        self.0.as_ptr() as usize
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    speeds: Vec<f64>,
    jobs: Vec<f64>,
    allowed: Vec<Option<MachineSet>>,
    normalized: bool,
}

impl Instance {
    /// Unrestricted instance. Speeds must be positive and non-increasing.
    pub fn new(speeds: Vec<f64>, jobs: Vec<f64>) -> Result<Self> {
        let n = jobs.len();
        Self::with_allowed(speeds, jobs, vec![None; n])
    }

    pub fn with_allowed(
        speeds: Vec<f64>,
        jobs: Vec<f64>,
        allowed: Vec<Option<MachineSet>>,
    ) -> Result<Self> {
        let inst = Instance {
            speeds,
            jobs,
            allowed,
            normalized: false,
        };
        inst.check()?;
        Ok(inst)
    }

    fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInstance(msg));
        if self.speeds.is_empty() {
            return bad("no machines".into());
        }
        for (i, &s) in self.speeds.iter().enumerate() {
            if !(s.is_finite() && s > 0.0) {
                return bad(format!("speed of machine {i} is not a positive number"));
            }
        }
        if let Some(i) = self.speeds.windows(2).position(|w| w[0] < w[1]) {
            return bad(format!(
                "speeds must be non-increasing (machine {} is slower than machine {})",
                i,
                i + 1
            ));
        }
        for (j, &p) in self.jobs.iter().enumerate() {
            if !(p.is_finite() && p > 0.0) {
                return bad(format!("processing requirement of job {j} is not positive"));
            }
        }
        if self.allowed.len() != self.jobs.len() {
            return bad("one allowed-set entry per job required".into());
        }
        let m = self.speeds.len();
        for (j, set) in self.allowed.iter().enumerate() {
            if let Some(set) = set {
                if set.is_empty() {
                    return bad(format!("allowed set of job {j} is empty"));
                }
                if set.as_slice().last().is_some_and(|&i| i >= m) {
                    return bad(format!("allowed set of job {j} names a missing machine"));
                }
            }
        }
        if self.normalized {
            let p_max = self.jobs.iter().copied().fold(0.0, f64::max);
            if self.speeds[m - 1] != 1.0 || p_max > 1.0 {
                return bad("normalized flag set on an unnormalized instance".into());
            }
        }
        Ok(())
    }

    pub fn num_machines(&self) -> usize {
        self.speeds.len()
    }

    pub fn num_jobs(&self) -> usize {
        self.jobs.len()
    }

    pub fn speeds(&self) -> &[f64] {
        &self.speeds
    }

    pub fn speed(&self, machine: usize) -> f64 {
        self.speeds[machine]
    }

    /// Processing requirements.
    pub fn jobs(&self) -> &[f64] {
        &self.jobs
    }

    pub fn p(&self, job: usize) -> f64 {
        self.jobs[job]
    }

    pub fn allowed(&self, job: usize) -> Option<&MachineSet> {
        self.allowed[job].as_ref()
    }

    pub fn allowed_sets(&self) -> &[Option<MachineSet>] {
        &self.allowed
    }

    pub fn is_restricted(&self) -> bool {
        self.allowed.iter().any(Option::is_some)
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn is_allowed(&self, job: usize, machine: usize) -> bool {
        match &self.allowed[job] {
            None => machine < self.speeds.len(),
            Some(set) => set.contains(machine),
        }
    }

    /// Machines the job may run on, in index order.
    pub fn eligible(&self, job: usize) -> Box<dyn Iterator<Item = usize> + '_> {
        match &self.allowed[job] {
            None => Box::new(0..self.speeds.len()),
            Some(set) => Box::new(set.as_slice().iter().copied()),
        }
    }

    pub fn num_eligible(&self, job: usize) -> usize {
        self.allowed[job]
            .as_ref()
            .map_or(self.speeds.len(), MachineSet::len)
    }

    /// Q, the total processing requirement.
    pub fn total_processing(&self) -> f64 {
        self.jobs.iter().sum()
    }

    pub fn total_speed(&self) -> f64 {
        self.speeds.iter().sum()
    }

    pub fn max_processing(&self) -> f64 {
        self.jobs.iter().copied().fold(0.0, f64::max)
    }

    /// Groups of machines with identical speed, as contiguous index ranges.
    pub fn speed_classes(&self) -> Vec<std::ops::Range<usize>> {
        let mut classes = Vec::new();
        let mut start = 0;
        for i in 1..=self.speeds.len() {
            if i == self.speeds.len() || self.speeds[i] != self.speeds[start] {
                classes.push(start..i);
                start = i;
            }
        }
        classes
    }

    /// Sort machines by non-increasing speed (ties by original index).
    ///
    /// Returns the sorted speeds and, for each new position, the original index.
    pub fn sort_speeds(speeds: &[f64]) -> (Vec<f64>, Vec<usize>) {
        let mut perm: Vec<usize> = (0..speeds.len()).collect();
        perm.sort_by(|&a, &b| speeds[b].total_cmp(&speeds[a]).then(a.cmp(&b)));
        (perm.iter().map(|&i| speeds[i]).collect(), perm)
    }
}

/// Scale speeds by the slowest machine and requirements by the largest job.
///
/// Ratios between makespans of any two schedules are unchanged.
pub fn normalize(instance: &Instance) -> Result<Instance> {
    if instance.jobs.is_empty() {
        return Err(Error::InvalidInstance("cannot normalize an instance without jobs".into()));
    }
    let s_min = instance.speeds[instance.speeds.len() - 1];
    let p_max = instance.max_processing();
    let out = Instance {
        speeds: instance.speeds.iter().map(|s| s / s_min).collect(),
        jobs: instance.jobs.iter().map(|p| p / p_max).collect(),
        allowed: instance.allowed.clone(),
        normalized: true,
    };
    out.check()?;
    Ok(out)
}

/// Zero-based job-to-machine assignment.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Schedule {
    assignment: Vec<usize>,
}

impl Schedule {
    pub fn new(assignment: Vec<usize>) -> Self {
        Schedule { assignment }
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn machine_of(&self, job: usize) -> usize {
        self.assignment[job]
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Jobs assigned to `machine`, in index order.
    pub fn jobs_on(&self, machine: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|&(_, &i)| i == machine)
            .map(|(j, _)| j)
            .collect()
    }

    pub(crate) fn set(&mut self, job: usize, machine: usize) {
        self.assignment[job] = machine;
    }
}

/// Outcome of [`validate_schedule`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    /// `(expected, actual)` number of entries when they differ.
    pub length_mismatch: Option<(usize, usize)>,
    /// Jobs assigned to a machine index that does not exist.
    pub out_of_range: Vec<usize>,
    /// Jobs assigned outside their allowed set.
    pub disallowed: Vec<usize>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.length_mismatch.is_none() && self.out_of_range.is_empty() && self.disallowed.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        let mut parts = Vec::new();
        if let Some((want, got)) = self.length_mismatch {
            parts.push(format!("{got} assignments for {want} jobs"));
        }
        if !self.out_of_range.is_empty() {
            parts.push(format!("jobs on missing machines: {:?}", self.out_of_range));
        }
        if !self.disallowed.is_empty() {
            parts.push(format!("jobs outside their allowed sets: {:?}", self.disallowed));
        }
        write!(f, "{}", parts.join("; "))
    }
}

pub fn validate_schedule(instance: &Instance, schedule: &Schedule) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = instance.num_jobs();
    if schedule.len() != n {
        report.length_mismatch = Some((n, schedule.len()));
    }
    let m = instance.num_machines();
    for (j, &i) in schedule.assignment.iter().enumerate().take(n) {
        if i >= m {
            report.out_of_range.push(j);
        } else if !instance.is_allowed(j, i) {
            report.disallowed.push(j);
        }
    }
    report
}

pub(crate) fn ensure_feasible(instance: &Instance, schedule: &Schedule) -> Result<()> {
    let report = validate_schedule(instance, schedule);
    if report.is_ok() {
        Ok(())
    } else {
        Err(Error::InfeasibleSchedule(report.to_string()))
    }
}

/// Loads of all machines, summing `p_j / s_i` in job-index order.
///
/// Every routine that compares loads goes through this function, so the same
/// assignment always yields bit-identical loads.
pub(crate) fn loads_of(instance: &Instance, assignment: &[usize]) -> Vec<f64> {
    let mut loads = vec![0.0; instance.num_machines()];
    for (j, &i) in assignment.iter().enumerate() {
        loads[i] += instance.jobs[j] / instance.speeds[i];
    }
    loads
}

pub(crate) fn max_load(loads: &[f64]) -> f64 {
    loads.iter().copied().fold(0.0, f64::max)
}

pub fn loads(instance: &Instance, schedule: &Schedule) -> Result<Vec<f64>> {
    ensure_feasible(instance, schedule)?;
    Ok(loads_of(instance, &schedule.assignment))
}

pub fn load(instance: &Instance, schedule: &Schedule, machine: usize) -> Result<f64> {
    if machine >= instance.num_machines() {
        return Err(Error::MachineOutOfRange {
            index: machine,
            machines: instance.num_machines(),
        });
    }
    Ok(loads(instance, schedule)?[machine])
}

pub fn makespan(instance: &Instance, schedule: &Schedule) -> Result<f64> {
    Ok(max_load(&loads(instance, schedule)?))
}

/// Machines whose load is within `eps` of the makespan.
pub fn critical_machines(instance: &Instance, schedule: &Schedule, eps: f64) -> Result<Vec<usize>> {
    let loads = loads(instance, schedule)?;
    Ok(critical_of(&loads, eps))
}

pub(crate) fn critical_of(loads: &[f64], eps: f64) -> Vec<usize> {
    let cmax = max_load(loads);
    (0..loads.len()).filter(|&i| loads[i] >= cmax - eps).collect()
}

/// Load vector sorted non-increasingly; local search moves decrease it
/// lexicographically.
pub fn sorted_loads(loads: &[f64]) -> Vec<f64> {
    let mut sorted = loads.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    sorted
}

/// True when `after` is lexicographically smaller than `before`.
pub fn lex_smaller(after: &[f64], before: &[f64]) -> bool {
    for (a, b) in after.iter().zip(before) {
        if a < b {
            return true;
        }
        if a > b {
            return false;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(speeds: &[f64], p: &[f64]) -> Instance {
        Instance::new(speeds.to_vec(), p.to_vec()).unwrap()
    }

    #[test]
    fn load_examples() {
        let a = inst(&[1.0, 1.0], &[0.5, 0.5, 0.5]);
        let s = Schedule::new(vec![0, 1, 0]);
        assert_eq!(load(&a, &s, 0).unwrap(), 1.0);

        let b = inst(&[2.0, 1.0], &[0.9, 0.8, 0.7]);
        let s = Schedule::new(vec![1, 0, 0]);
        // brute-force sum over jobs on machine 0
        let oracle: f64 = [0.8, 0.7].iter().map(|p| p / 2.0).sum();
        assert!((load(&b, &s, 0).unwrap() - oracle).abs() < 1e-15);
        assert!((load(&b, &s, 0).unwrap() - 0.75).abs() < 1e-12);

        let c = inst(&[1.0, 1.0, 1.0], &[0.3]);
        assert_eq!(load(&c, &Schedule::new(vec![0]), 2).unwrap(), 0.0);
        assert!(matches!(
            load(&c, &Schedule::new(vec![0]), 3),
            Err(Error::MachineOutOfRange { .. })
        ));
    }

    #[test]
    fn makespan_and_critical() {
        let b = inst(&[2.0, 1.0], &[0.9, 0.8, 0.7]);
        let s = Schedule::new(vec![1, 0, 0]);
        assert!((makespan(&b, &s).unwrap() - 0.9).abs() < 1e-12);
        assert_eq!(critical_machines(&b, &s, EPS).unwrap(), vec![1]);

        let tie = inst(&[1.0, 1.0], &[0.8, 0.8]);
        let s = Schedule::new(vec![0, 1]);
        assert_eq!(makespan(&tie, &s).unwrap(), 0.8);
        assert_eq!(critical_machines(&tie, &s, EPS).unwrap(), vec![0, 1]);

        let one = inst(&[1.0, 1.0], &[1.0, 0.5]);
        let s = Schedule::new(vec![0, 1]);
        assert_eq!(makespan(&one, &s).unwrap(), 1.0);
        assert_eq!(critical_machines(&one, &s, EPS).unwrap(), vec![0]);
    }

    #[test]
    fn normalize_examples() {
        let n = normalize(&inst(&[4.0, 2.0], &[2.0, 1.0])).unwrap();
        assert_eq!(n.speeds(), &[2.0, 1.0]);
        assert_eq!(n.jobs(), &[1.0, 0.5]);
        assert!(n.is_normalized());
        assert_eq!(normalize(&n).unwrap(), n);

        let n = normalize(&inst(&[3.0, 1.0], &[0.2, 0.4])).unwrap();
        assert_eq!(n.speeds(), &[3.0, 1.0]);
        assert_eq!(n.jobs(), &[0.5, 1.0]);

        assert!(normalize(&inst(&[1.0], &[])).is_err());
    }

    #[test]
    fn validation_reports() {
        let restricted = Instance::with_allowed(
            vec![1.0, 1.0],
            vec![0.5, 0.5],
            vec![None, Some(MachineSet::new(vec![1]))],
        )
        .unwrap();
        assert!(validate_schedule(&restricted, &Schedule::new(vec![0, 1])).is_ok());
        let r = validate_schedule(&restricted, &Schedule::new(vec![1, 0]));
        assert_eq!(r.disallowed, vec![1]);
        let r = validate_schedule(&restricted, &Schedule::new(vec![2]));
        assert_eq!(r.length_mismatch, Some((2, 1)));
        assert_eq!(r.out_of_range, vec![0]);

        let free = inst(&[2.0, 1.0, 1.0], &[0.1, 0.2, 0.3]);
        for a in 0..3 {
            for b in 0..3 {
                assert!(validate_schedule(&free, &Schedule::new(vec![a, b, 2])).is_ok());
            }
        }
    }

    #[test]
    fn rejects_bad_instances() {
        assert!(Instance::new(vec![1.0, 2.0], vec![0.5]).is_err());
        assert!(Instance::new(vec![], vec![0.5]).is_err());
        assert!(Instance::new(vec![1.0], vec![0.0]).is_err());
        assert!(Instance::with_allowed(vec![1.0], vec![0.5], vec![Some(MachineSet::new(vec![]))]).is_err());
        assert!(Instance::with_allowed(vec![1.0], vec![0.5], vec![Some(MachineSet::new(vec![1]))]).is_err());
    }

    #[test]
    fn speed_classes_are_contiguous() {
        let a = inst(&[4.0, 2.0, 2.0, 1.0], &[0.5]);
        assert_eq!(a.speed_classes(), vec![0..1, 1..3, 3..4]);
        let (sorted, perm) = Instance::sort_speeds(&[1.0, 3.0, 1.0, 3.0]);
        assert_eq!(sorted, vec![3.0, 3.0, 1.0, 1.0]);
        assert_eq!(perm, vec![1, 3, 0, 2]);
    }

    #[test]
    fn lex_order() {
        assert!(lex_smaller(&[1.0, 0.5], &[1.0, 0.6]));
        assert!(!lex_smaller(&[1.0, 0.6], &[1.0, 0.6]));
        assert!(!lex_smaller(&[1.1, 0.0], &[1.0, 0.6]));
    }
}

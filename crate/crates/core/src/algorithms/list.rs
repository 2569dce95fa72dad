//! Greedy list scheduling and LPT.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};

use crate::error::{Error, Result};
use crate::model::{Instance, MachineSet, Schedule};

#[derive(Clone, Copy, Debug, PartialEq)]
struct LoadKey(f64, usize);

impl Eq for LoadKey {}

impl Ord for LoadKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

impl PartialOrd for LoadKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum EligibleKey {
    Filter,
    All,
    Set(usize),
}

/// Incremental list scheduler.
///
/// Jobs may be pinned to machines with [`place`](Self::place) before the
/// greedy phase, and several batches with different machine filters can be
/// scheduled one after another.
pub struct ListScheduler<'a> {
    instance: &'a Instance,
    loads: Vec<f64>,
    assignment: Vec<Option<usize>>,
    superset_memo: HashMap<usize, bool>,
}

impl<'a> ListScheduler<'a> {
    pub fn new(instance: &'a Instance) -> Self {
        ListScheduler {
            instance,
            loads: vec![0.0; instance.num_machines()],
            assignment: vec![None; instance.num_jobs()],
            superset_memo: HashMap::new(),
        }
    }

    /// Current loads, accumulated in assignment order.
    pub fn loads(&self) -> &[f64] {
        &self.loads
    }

    pub fn load(&self, machine: usize) -> f64 {
        self.loads[machine]
    }

    pub fn is_assigned(&self, job: usize) -> bool {
        self.assignment[job].is_some()
    }

    /// Assign a job to a fixed machine, bypassing the greedy rule.
    pub fn place(&mut self, job: usize, machine: usize) -> Result<()> {
        if machine >= self.instance.num_machines() {
            return Err(Error::MachineOutOfRange {
                index: machine,
                machines: self.instance.num_machines(),
            });
        }
        if !self.instance.is_allowed(job, machine) {
            return Err(Error::InfeasibleSchedule(format!(
                "job {job} is not allowed on machine {machine}"
            )));
        }
        self.commit(job, machine);
        Ok(())
    }

    fn commit(&mut self, job: usize, machine: usize) {
        debug_assert!(self.assignment[job].is_none(), "job {job} assigned twice");
        self.assignment[job] = Some(machine);
        self.loads[machine] += self.instance.p(job) / self.instance.speed(machine);
    }

    /// Assign one job to the eligible machine where it completes earliest.
    pub fn schedule_job(&mut self, job: usize, filter: Option<&[usize]>) -> Result<usize> {
        let p = self.instance.p(job);
        let mut best: Option<(f64, usize)> = None;
        let mut consider = |i: usize, loads: &[f64], speeds: &[f64]| {
            let completion = loads[i] + p / speeds[i];
            if best.is_none_or(|(c, bi)| completion < c || (completion == c && i < bi)) {
                best = Some((completion, i));
            }
        };
        let speeds = self.instance.speeds();
        match filter {
            Some(filter) => {
                for &i in filter {
                    if self.instance.is_allowed(job, i) {
                        consider(i, &self.loads, speeds);
                    }
                }
            }
            None => {
                for i in self.instance.eligible(job) {
                    consider(i, &self.loads, speeds);
                }
            }
        }
        let (_, machine) = best.ok_or(Error::NoEligibleMachine { job })?;
        self.commit(job, machine);
        Ok(machine)
    }

    fn eligible_key(&mut self, job: usize, filter: Option<&[usize]>) -> EligibleKey {
        match (self.instance.allowed(job), filter) {
            (None, Some(_)) => EligibleKey::Filter,
            (None, None) => EligibleKey::All,
            (Some(set), None) => EligibleKey::Set(set.key()),
            (Some(set), Some(filter)) => {
                let covers = *self
                    .superset_memo
                    .entry(set.key())
                    .or_insert_with(|| set.is_superset_of(filter));
                if covers {
                    EligibleKey::Filter
                } else {
                    EligibleKey::Set(usize::MAX)
                }
            }
        }
    }

    /// Schedule jobs in list order.
    ///
    /// When every job of the batch shares one eligible machine set, a heap per
    /// speed class replaces the linear scan; both paths pick the same machine.
    pub fn schedule_all(&mut self, order: &[usize], filter: Option<&[usize]>) -> Result<()> {
        if order.is_empty() {
            return Ok(());
        }
        let first = self.eligible_key(order[0], filter);
        let uniform = first != EligibleKey::Set(usize::MAX)
            && order.iter().all(|&j| self.eligible_key(j, filter) == first);
        if !uniform || order.len() < 16 {
            for &j in order {
                self.schedule_job(j, filter)?;
            }
            return Ok(());
        }
        let mut machines: Vec<usize> = match first {
            EligibleKey::Filter => filter.unwrap_or(&[]).to_vec(),
            EligibleKey::All => (0..self.instance.num_machines()).collect(),
            EligibleKey::Set(_) => self
                .instance
                .allowed(order[0])
                .map(|s| s.as_slice().to_vec())
                .unwrap_or_default(),
        };
        machines.sort_unstable();
        machines.dedup();
        if machines.is_empty() {
            return Err(Error::NoEligibleMachine { job: order[0] });
        }
        if let Some(&bad) = machines.iter().find(|&&i| i >= self.instance.num_machines()) {
            return Err(Error::MachineOutOfRange {
                index: bad,
                machines: self.instance.num_machines(),
            });
        }
        // one min-heap of (load, index) per distinct speed
        let mut classes: Vec<(f64, BinaryHeap<Reverse<LoadKey>>)> = Vec::new();
        for &i in &machines {
            let s = self.instance.speed(i);
            let pos = match classes.iter().position(|(cs, _)| *cs == s) {
                Some(pos) => pos,
                None => {
                    classes.push((s, BinaryHeap::new()));
                    classes.len() - 1
                }
            };
            classes[pos].1.push(Reverse(LoadKey(self.loads[i], i)));
        }
        for &j in order {
            let p = self.instance.p(j);
            let mut best: Option<(f64, usize, usize)> = None;
            for (c, (s, heap)) in classes.iter().enumerate() {
                let Reverse(LoadKey(load, i)) = *heap.peek().expect("speed class is never empty");
                let completion = load + p / s;
                let better = match best {
                    None => true,
                    Some((bc, bi, _)) => completion < bc || (completion == bc && i < bi),
                };
                if better {
                    best = Some((completion, i, c));
                }
            }
            let (_, i, c) = best.expect("at least one machine");
            classes[c].1.pop();
            self.commit(j, i);
            classes[c].1.push(Reverse(LoadKey(self.loads[i], i)));
        }
        Ok(())
    }

    /// Finish; every job must have been assigned.
    pub fn into_schedule(self) -> Result<Schedule> {
        let mut assignment = Vec::with_capacity(self.assignment.len());
        for (j, a) in self.assignment.into_iter().enumerate() {
            match a {
                Some(i) => assignment.push(i),
                None => {
                    return Err(Error::InfeasibleSchedule(format!("job {j} was never assigned")))
                }
            }
        }
        Ok(Schedule::new(assignment))
    }
}

pub(crate) fn check_permutation(order: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(Error::NotAPermutation { jobs: n });
    }
    for &j in order {
        if j >= n || seen[j] {
            return Err(Error::NotAPermutation { jobs: n });
        }
        seen[j] = true;
    }
    Ok(())
}

/// List scheduling: each job, in list order, goes to the eligible machine
/// minimizing its completion time, ties to the lowest machine index.
pub fn list_schedule(
    instance: &Instance,
    order: &[usize],
    machine_filter: Option<&MachineSet>,
) -> Result<Schedule> {
    check_permutation(order, instance.num_jobs())?;
    let mut scheduler = ListScheduler::new(instance);
    scheduler.schedule_all(order, machine_filter.map(MachineSet::as_slice))?;
    scheduler.into_schedule()
}

/// Jobs by non-increasing processing requirement, ties by index.
pub fn lpt_order(instance: &Instance) -> Vec<usize> {
    let p = instance.jobs();
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| p[b].total_cmp(&p[a]).then(a.cmp(&b)));
    order
}

pub fn lpt_schedule(instance: &Instance, machine_filter: Option<&MachineSet>) -> Result<Schedule> {
    list_schedule(instance, &lpt_order(instance), machine_filter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::makespan;
    use rand::{Rng, SeedableRng};

    fn inst(speeds: &[f64], p: &[f64]) -> Instance {
        Instance::new(speeds.to_vec(), p.to_vec()).unwrap()
    }

    #[test]
    fn identical_machines_alternate() {
        let a = inst(&[1.0, 1.0], &[0.5, 0.5, 0.5]);
        let s = list_schedule(&a, &[0, 1, 2], None).unwrap();
        assert_eq!(s.assignment(), &[0, 1, 0]);
        assert_eq!(makespan(&a, &s).unwrap(), 1.0);
    }

    #[test]
    fn tie_goes_to_fast_machine() {
        // completions 0.5 vs 1.0, then 1.0 vs 1.0
        let a = inst(&[2.0, 1.0], &[1.0, 1.0]);
        let s = list_schedule(&a, &[0, 1], None).unwrap();
        assert_eq!(s.assignment(), &[0, 0]);
        assert_eq!(makespan(&a, &s).unwrap(), 1.0);
    }

    #[test]
    fn single_machine() {
        let a = inst(&[3.0], &[0.2, 0.9, 0.4]);
        let s = list_schedule(&a, &[2, 0, 1], None).unwrap();
        assert_eq!(s.assignment(), &[0, 0, 0]);
    }

    #[test]
    fn lpt_examples() {
        assert_eq!(lpt_order(&inst(&[1.0], &[0.3, 0.9, 0.5])), vec![1, 2, 0]);
        assert_eq!(lpt_order(&inst(&[1.0], &[0.5, 0.5, 0.5])), vec![0, 1, 2]);
        let a = inst(&[1.0, 1.0], &[0.9, 0.8, 0.7]);
        let s = lpt_schedule(&a, None).unwrap();
        assert_eq!(s.assignment(), &[0, 1, 1]);
        assert!((makespan(&a, &s).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_permutations() {
        let a = inst(&[1.0], &[0.5, 0.5]);
        assert!(matches!(list_schedule(&a, &[0, 0], None), Err(Error::NotAPermutation { .. })));
        assert!(list_schedule(&a, &[0], None).is_err());
        assert!(list_schedule(&a, &[0, 2], None).is_err());
    }

    #[test]
    fn empty_eligible_set_errors() {
        let a = Instance::with_allowed(
            vec![1.0, 1.0],
            vec![0.5],
            vec![Some(MachineSet::new(vec![0]))],
        )
        .unwrap();
        let filter = MachineSet::new(vec![1]);
        assert!(matches!(
            list_schedule(&a, &[0], Some(&filter)),
            Err(Error::NoEligibleMachine { job: 0 })
        ));
    }

    #[test]
    fn heap_path_matches_scan() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let m = rng.random_range(1..8);
            let n = rng.random_range(16..80);
            let mut speeds: Vec<f64> = (0..m).map(|_| [1.0, 2.0, 3.0][rng.random_range(0..3)]).collect();
            speeds.sort_by(|a, b| b.total_cmp(a));
            let p: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
            let a = Instance::new(speeds, p).unwrap();
            let order: Vec<usize> = (0..n).rev().collect();
            let fast = list_schedule(&a, &order, None).unwrap();
            let mut slow = ListScheduler::new(&a);
            for &j in &order {
                slow.schedule_job(j, None).unwrap();
            }
            assert_eq!(fast, slow.into_schedule().unwrap());
        }
    }

    #[test]
    fn deterministic() {
        let a = inst(&[2.0, 1.5, 1.0], &[0.3, 0.9, 0.5, 0.2, 0.7]);
        let order = [4, 2, 0, 3, 1];
        assert_eq!(
            list_schedule(&a, &order, None).unwrap(),
            list_schedule(&a, &order, None).unwrap()
        );
    }
}

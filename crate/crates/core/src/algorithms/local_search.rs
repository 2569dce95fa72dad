//! Jump and lex-jump local search.

use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::optimality::{improving_moves, Neighborhood};
use crate::error::{Error, Result};
use crate::model::{ensure_feasible, lex_smaller, loads_of, sorted_loads, Instance, Schedule};
use crate::rng::{derive_seed, stream};

/// Rule for picking one of several improving moves.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Pivot {
    /// Smallest job index, then smallest target machine.
    #[default]
    First,
    MaxGain,
    MinGain,
    /// Uniform choice; the seed is re-derived at every step of a search.
    Random(u64),
}

impl FromStr for Pivot {
    type Err = Error;

    /// Accepts `first`, `max-gain`, `min-gain`, `random` and `random:<seed>`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first" => Ok(Pivot::First),
            "max-gain" => Ok(Pivot::MaxGain),
            "min-gain" => Ok(Pivot::MinGain),
            "random" => Ok(Pivot::Random(0)),
            other => match other.strip_prefix("random:").map(str::parse::<u64>) {
                Some(Ok(seed)) => Ok(Pivot::Random(seed)),
                _ => Err(Error::InvalidParameter(format!("unknown pivot rule '{other}'"))),
            },
        }
    }
}

impl From<Pivot> for String {
    fn from(p: Pivot) -> String {
        p.to_string()
    }
}

impl TryFrom<String> for Pivot {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl std::fmt::Display for Pivot {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Pivot::First => f.write_str("first"),
            Pivot::MaxGain => f.write_str("max-gain"),
            Pivot::MinGain => f.write_str("min-gain"),
            Pivot::Random(seed) => write!(f, "random:{seed}"),
        }
    }
}

fn pick(moves: &[(usize, usize, usize, f64)], pivot: Pivot) -> Option<(usize, usize)> {
    let chosen = match pivot {
        Pivot::First => moves.first(),
        // ties keep the earliest move in (job, target) order
        Pivot::MaxGain => moves.iter().reduce(|a, b| if b.3 > a.3 { b } else { a }),
        Pivot::MinGain => moves.iter().reduce(|a, b| if b.3 < a.3 { b } else { a }),
        Pivot::Random(seed) => {
            if moves.is_empty() {
                None
            } else {
                let k = stream(seed, 0).random_range(0..moves.len());
                moves.get(k)
            }
        }
    };
    chosen.map(|&(j, _, t, _)| (j, t))
}

/// An improving move `(job, target machine)`, or `None` at a local optimum.
pub fn find_improving_move(
    instance: &Instance,
    schedule: &Schedule,
    neighborhood: Neighborhood,
    pivot: Pivot,
    eps: f64,
) -> Result<Option<(usize, usize)>> {
    ensure_feasible(instance, schedule)?;
    let loads = loads_of(instance, schedule.assignment());
    let moves = improving_moves(instance, schedule.assignment(), &loads, neighborhood, eps);
    Ok(pick(&moves, pivot))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MoveRecord {
    pub job: usize,
    pub from: usize,
    pub to: usize,
    /// Sorted (non-increasing) load vector after the move.
    pub sorted_loads: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalSearchResult {
    pub schedule: Schedule,
    pub steps: usize,
    pub initial_sorted_loads: Vec<f64>,
    pub log: Vec<MoveRecord>,
}

impl LocalSearchResult {
    /// True when every logged load vector is lexicographically smaller than
    /// its predecessor.
    pub fn is_strictly_decreasing(&self) -> bool {
        let mut prev = &self.initial_sorted_loads;
        for rec in &self.log {
            if !lex_smaller(&rec.sorted_loads, prev) {
                return false;
            }
            prev = &rec.sorted_loads;
        }
        true
    }
}

/// Apply improving moves until none is left.
///
/// # Panics
///
/// Panics if an accepted move fails to decrease the sorted load vector
/// lexicographically, which would break the termination argument.
pub fn local_search(
    instance: &Instance,
    start: &Schedule,
    neighborhood: Neighborhood,
    pivot: Pivot,
    eps: f64,
) -> Result<LocalSearchResult> {
    ensure_feasible(instance, start)?;
    let mut schedule = start.clone();
    let mut loads = loads_of(instance, schedule.assignment());
    let initial_sorted_loads = sorted_loads(&loads);
    let mut prev = initial_sorted_loads.clone();
    let mut log = Vec::new();
    loop {
        let step_pivot = match pivot {
            Pivot::Random(seed) => Pivot::Random(derive_seed(seed, log.len() as u64)),
            other => other,
        };
        let moves = improving_moves(instance, schedule.assignment(), &loads, neighborhood, eps);
        let Some((job, to)) = pick(&moves, step_pivot) else {
            break;
        };
        let from = schedule.machine_of(job);
        schedule.set(job, to);
        loads = loads_of(instance, schedule.assignment());
        let sorted = sorted_loads(&loads);
        assert!(
            lex_smaller(&sorted, &prev),
            "move of job {job} from {from} to {to} did not decrease the sorted load vector"
        );
        log::trace!("move job {job}: {from} -> {to}, makespan {}", sorted[0]);
        prev = sorted.clone();
        log.push(MoveRecord {
            job,
            from,
            to,
            sorted_loads: sorted,
        });
    }
    Ok(LocalSearchResult {
        schedule,
        steps: log.len(),
        initial_sorted_loads,
        log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::optimality::is_locally_optimal;
    use crate::model::{makespan, MachineSet, EPS};
    use proptest::prelude::*;

    #[test]
    fn first_pivot_moves_first_job() {
        let a = Instance::new(vec![1.0, 1.0], vec![1.0, 1.0]).unwrap();
        let s = Schedule::new(vec![0, 0]);
        for nb in [Neighborhood::Jump, Neighborhood::LexJump] {
            assert_eq!(find_improving_move(&a, &s, nb, Pivot::First, EPS).unwrap(), Some((0, 1)));
        }
        let r = local_search(&a, &s, Neighborhood::Jump, Pivot::First, EPS).unwrap();
        assert_eq!(r.steps, 1);
        assert_eq!(crate::model::loads(&a, &r.schedule).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn no_move_at_optimum() {
        let a = Instance::new(vec![2.0, 1.0], vec![0.9, 0.8, 0.7]).unwrap();
        let s = Schedule::new(vec![1, 0, 0]);
        assert_eq!(find_improving_move(&a, &s, Neighborhood::LexJump, Pivot::First, EPS).unwrap(), None);
        let r = local_search(&a, &s, Neighborhood::LexJump, Pivot::MaxGain, EPS).unwrap();
        assert_eq!(r.steps, 0);
        assert_eq!(r.schedule, s);
        let single = Instance::new(vec![1.0], vec![0.3, 0.3]).unwrap();
        let s = Schedule::new(vec![0, 0]);
        assert_eq!(find_improving_move(&single, &s, Neighborhood::Jump, Pivot::First, EPS).unwrap(), None);
    }

    #[test]
    fn reaches_one_of_the_enumerated_lex_optima() {
        let a = Instance::new(vec![2.0, 1.0], vec![0.9, 0.8, 0.7]).unwrap();
        let r = local_search(&a, &Schedule::new(vec![1, 1, 1]), Neighborhood::LexJump, Pivot::First, EPS).unwrap();
        assert!(is_locally_optimal(&a, &r.schedule, Neighborhood::LexJump, EPS).unwrap());
        let c = makespan(&a, &r.schedule).unwrap();
        assert!([0.8, 0.85, 0.9].iter().any(|v| (c - v).abs() < 1e-12), "makespan {c}");
        assert!(r.is_strictly_decreasing());
    }

    #[test]
    fn pivot_parsing() {
        assert_eq!("first".parse::<Pivot>().unwrap(), Pivot::First);
        assert_eq!("max-gain".parse::<Pivot>().unwrap(), Pivot::MaxGain);
        assert_eq!("min-gain".parse::<Pivot>().unwrap(), Pivot::MinGain);
        assert_eq!("random:9".parse::<Pivot>().unwrap(), Pivot::Random(9));
        assert!("steepest".parse::<Pivot>().is_err());
        assert!("random:x".parse::<Pivot>().is_err());
    }

    #[test]
    fn gain_pivots() {
        // job 0 (p=1) gains 2-1=1, job 1 (p=0.5) gains 2-0.5=1.5
        let a = Instance::new(vec![1.0, 1.0], vec![1.0, 0.5, 0.5]).unwrap();
        let s = Schedule::new(vec![0, 0, 0]);
        assert_eq!(find_improving_move(&a, &s, Neighborhood::Jump, Pivot::MaxGain, EPS).unwrap(), Some((1, 1)));
        assert_eq!(find_improving_move(&a, &s, Neighborhood::Jump, Pivot::MinGain, EPS).unwrap(), Some((0, 1)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn search_ends_locally_optimal(
            speeds in proptest::collection::vec(1.0f64..4.0, 1..=4),
            p in proptest::collection::vec(0.01f64..1.0, 1..=10),
            seed in any::<u64>(),
            restrict in any::<bool>(),
        ) {
            let mut speeds = speeds;
            speeds.sort_by(|a, b| b.total_cmp(a));
            let m = speeds.len();
            let allowed = (0..p.len())
                .map(|j| (restrict && j % 2 == 1).then(|| MachineSet::new(vec![0, m - 1])))
                .collect();
            let a = Instance::with_allowed(speeds, p.clone(), allowed).unwrap();
            let start = Schedule::new(vec![0; p.len()]);
            for nb in [Neighborhood::Jump, Neighborhood::LexJump] {
                for pivot in [Pivot::First, Pivot::MaxGain, Pivot::MinGain, Pivot::Random(seed)] {
                    let r = local_search(&a, &start, nb, pivot, EPS).unwrap();
                    prop_assert!(is_locally_optimal(&a, &r.schedule, nb, EPS).unwrap());
                    prop_assert!(r.is_strictly_decreasing());
                    prop_assert_eq!(r.steps, r.log.len());
                }
            }
        }
    }
}

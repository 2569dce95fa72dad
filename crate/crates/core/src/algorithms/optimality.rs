//! Jump and lex-jump local optimality.
//!
//! A move of job `j` from machine `i` to `i'` is improving when
//! `L_i' + p_j / s_i' < L_i - eps`. Jump moves only leave critical machines;
//! lex-jump moves may leave any machine.

use std::collections::HashMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{critical_of, ensure_feasible, loads_of, Instance, Schedule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Neighborhood {
    Jump,
    LexJump,
}

impl FromStr for Neighborhood {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jump" => Ok(Neighborhood::Jump),
            "lex-jump" | "lexjump" | "lex" => Ok(Neighborhood::LexJump),
            other => Err(Error::InvalidParameter(format!("unknown neighborhood '{other}'"))),
        }
    }
}

impl std::fmt::Display for Neighborhood {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Neighborhood::Jump => "jump",
            Neighborhood::LexJump => "lex-jump",
        })
    }
}

/// Best `(load, machine)` pair and runner-up of one speed class inside one
/// eligible set.
type ClassMins = [Option<(f64, usize)>; 2];

fn class_minima(
    machines: &mut dyn Iterator<Item = usize>,
    loads: &[f64],
    class_of: &[usize],
    classes: usize,
) -> Vec<ClassMins> {
    let mut mins: Vec<ClassMins> = vec![[None, None]; classes];
    for i in machines {
        let entry = &mut mins[class_of[i]];
        let cand = (loads[i], i);
        let less = |a: (f64, usize), b: (f64, usize)| a.0 < b.0 || (a.0 == b.0 && a.1 < b.1);
        match entry[0] {
            None => entry[0] = Some(cand),
            Some(first) if less(cand, first) => {
                entry[1] = entry[0];
                entry[0] = Some(cand);
            }
            _ => match entry[1] {
                Some(second) if !less(cand, second) => {}
                _ => entry[1] = Some(cand),
            },
        }
    }
    mins
}

/// Shortcut test for an improving move, given canonical loads.
///
/// For every source machine only its smallest job per eligible set matters,
/// and per speed class only the least-loaded eligible machine other than the
/// source.
pub(crate) fn has_improving_move(
    instance: &Instance,
    assignment: &[usize],
    loads: &[f64],
    neighborhood: Neighborhood,
    eps: f64,
) -> bool {
    let m = instance.num_machines();
    if m < 2 {
        return false;
    }
    let source_ok: Vec<bool> = match neighborhood {
        Neighborhood::LexJump => vec![true; m],
        Neighborhood::Jump => {
            let mut ok = vec![false; m];
            for i in critical_of(loads, eps) {
                ok[i] = true;
            }
            ok
        }
    };
    let classes = instance.speed_classes();
    let mut class_of = vec![0; m];
    for (c, r) in classes.iter().enumerate() {
        for i in r.clone() {
            class_of[i] = c;
        }
    }
    // smallest job per (machine, eligible-set group)
    const ALL: usize = usize::MAX;
    let mut smallest: HashMap<(usize, usize), usize> = HashMap::new();
    for (j, &i) in assignment.iter().enumerate() {
        if !source_ok[i] {
            continue;
        }
        let group = instance.allowed(j).map_or(ALL, |s| s.key());
        smallest
            .entry((i, group))
            .and_modify(|best| {
                if instance.p(j) < instance.p(*best) {
                    *best = j;
                }
            })
            .or_insert(j);
    }
    let mut minima: HashMap<usize, Vec<ClassMins>> = HashMap::new();
    let mut entries: Vec<_> = smallest.into_iter().collect();
    entries.sort_unstable();
    for ((i, group), j) in entries {
        let mins = minima.entry(group).or_insert_with(|| {
            let mut it: Box<dyn Iterator<Item = usize>> = match instance.allowed(j) {
                None => Box::new(0..m),
                Some(set) => Box::new(set.as_slice().iter().copied()),
            };
            class_minima(&mut it, loads, &class_of, classes.len())
        });
        let p = instance.p(j);
        for (c, entry) in mins.iter().enumerate() {
            let target = match entry {
                [Some((_, a)), second] if *a == i => *second,
                [first, _] => *first,
            };
            if let Some((load, _)) = target {
                let speed = instance.speed(classes[c].start);
                if load + p / speed < loads[i] - eps {
                    return true;
                }
            }
        }
    }
    false
}

/// All improving moves `(job, from, to, gain)`, ordered by job then target.
pub(crate) fn improving_moves(
    instance: &Instance,
    assignment: &[usize],
    loads: &[f64],
    neighborhood: Neighborhood,
    eps: f64,
) -> Vec<(usize, usize, usize, f64)> {
    let critical = critical_of(loads, eps);
    let mut moves = Vec::new();
    for (j, &i) in assignment.iter().enumerate() {
        if neighborhood == Neighborhood::Jump && !critical.contains(&i) {
            continue;
        }
        for t in instance.eligible(j) {
            if t == i {
                continue;
            }
            let completion = loads[t] + instance.p(j) / instance.speed(t);
            if completion < loads[i] - eps {
                moves.push((j, i, t, loads[i] - completion));
            }
        }
    }
    moves
}

pub fn is_jump_optimal(instance: &Instance, schedule: &Schedule, eps: f64) -> Result<bool> {
    is_locally_optimal(instance, schedule, Neighborhood::Jump, eps)
}

pub fn is_lex_jump_optimal(instance: &Instance, schedule: &Schedule, eps: f64) -> Result<bool> {
    is_locally_optimal(instance, schedule, Neighborhood::LexJump, eps)
}

pub fn is_locally_optimal(
    instance: &Instance,
    schedule: &Schedule,
    neighborhood: Neighborhood,
    eps: f64,
) -> Result<bool> {
    ensure_feasible(instance, schedule)?;
    let loads = loads_of(instance, schedule.assignment());
    Ok(!has_improving_move(instance, schedule.assignment(), &loads, neighborhood, eps))
}

/// All-pairs scan; reference implementation for the shortcut predicates.
pub fn is_locally_optimal_naive(
    instance: &Instance,
    schedule: &Schedule,
    neighborhood: Neighborhood,
    eps: f64,
) -> Result<bool> {
    ensure_feasible(instance, schedule)?;
    let loads = loads_of(instance, schedule.assignment());
    Ok(improving_moves(instance, schedule.assignment(), &loads, neighborhood, eps).is_empty())
}

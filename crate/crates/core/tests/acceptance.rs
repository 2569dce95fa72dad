//! Acceptance suite. Each test prints one `PASS`/`FAIL` line to stderr,
//! bypassing output capture, and fails when its criterion does.

use std::io::Write;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use smoothsched::algorithms::{
    is_jump_optimal, is_lex_jump_optimal, is_near_list, list_schedule, local_search, lpt_order, Neighborhood, Pivot,
};
use smoothsched::classification::{validate_nl_structure, OptMode};
use smoothsched::constructions::{
    build_jump_related_lb, build_lexlist_lb, build_restricted_jump_lb, build_restricted_lex_lb, recurrence_a,
    CheckStatus, Construction, ConstructionSample, Mode,
};
use smoothsched::harness::{estimate_smoothed_ratio, sweep, write_csv, EstimateConfig, Family, Grid, Method, SweepConfig};
use smoothsched::oracle::{
    cho_sahni_bound, for_each_assignment, jump_smoothed_bound, nl_tail_bound, optimal_makespan_enumerate,
    optimal_makespan_exact, worst_local_optimum_exact, DEFAULT_BUDGET,
};
use smoothsched::smoothing::check_sum_lower_tail;
use smoothsched::{Instance, Schedule, EPS};

fn report(id: u32, title: &str, pass: bool, detail: &str) {
    let line = format!(
        "acceptance criterion {id:>2} [{title}]: {} - {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

/// Unrestricted related instance with `n <= max_n`, `m <= max_m`, speeds in
/// `[1, 4]` and uniform processing requirements.
fn random_related(rng: &mut ChaCha8Rng, max_n: usize, max_m: usize) -> Instance {
    let n = rng.random_range(1..=max_n);
    let m = rng.random_range(1..=max_m);
    let mut speeds: Vec<f64> = (0..m).map(|_| rng.random_range(1.0..=4.0)).collect();
    speeds.sort_by(|a, b| b.total_cmp(a));
    let p = (0..n).map(|_| rng.random_range(f64::MIN_POSITIVE..=1.0)).collect();
    Instance::new(speeds, p).unwrap()
}

fn oracle_instances() -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0AC1E);
    (0..500).map(|_| random_related(&mut rng, 7, 3)).collect()
}

fn failing_checks(c: &Construction, s: &ConstructionSample) -> Vec<String> {
    c.validate(s, EPS)
        .into_iter()
        .filter(|ch| ch.status == CheckStatus::Fail)
        .map(|ch| format!("seed {}: {} ({})", s.seed, ch.name, ch.detail))
        .collect()
}

#[test]
fn criterion_01_oracle_soundness() {
    let start = Instant::now();
    let mut mismatches = Vec::new();
    for (k, inst) in oracle_instances().iter().enumerate() {
        let bb = optimal_makespan_exact(inst, DEFAULT_BUDGET).unwrap().makespan;
        let brute = optimal_makespan_enumerate(inst, DEFAULT_BUDGET).unwrap().makespan;
        if bb != brute {
            mismatches.push(format!("instance {k}: {bb} vs {brute}"));
        }
    }
    let elapsed = start.elapsed();
    let pass = mismatches.is_empty() && elapsed < Duration::from_secs(60);
    report(
        1,
        "oracle soundness",
        pass,
        &format!("500 instances, {} mismatches, {} (limit 60s)", mismatches.len(), secs(elapsed)),
    );
    assert!(pass, "{mismatches:?}");
}

#[test]
fn criterion_02_related_jump_worst_case_guard() {
    let mut worst_slack = f64::INFINITY;
    let mut violations = Vec::new();
    for (k, inst) in oracle_instances().iter().enumerate() {
        let w = worst_local_optimum_exact(inst, Neighborhood::Jump, DEFAULT_BUDGET, EPS).unwrap();
        let bound = cho_sahni_bound(inst.num_machines(), inst.num_jobs());
        worst_slack = worst_slack.min(bound - w.ratio);
        if w.ratio > bound + 1e-9 {
            violations.push(format!("instance {k}: ratio {} > {bound}", w.ratio));
        }
    }
    let pass = violations.is_empty();
    report(
        2,
        "worst jump optimum within (1+sqrt(4min(m,n)-3))/2",
        pass,
        &format!("500 instances, smallest slack {worst_slack:.3e}, {} violations", violations.len()),
    );
    assert!(pass, "{violations:?}");
}

#[test]
fn criterion_03_smoothed_jump_bound() {
    let start = Instant::now();
    let mut problems = Vec::new();
    let mut summary = Vec::new();
    for phi in [1.0, 2.0, 4.0, 8.0] {
        let spec = Family::JumpLb.spec(phi, 6, 6).unwrap();
        let cfg = EstimateConfig::new(Neighborhood::Jump, Method::Exact, 100, 0xC3 + phi as u64);
        let est = estimate_smoothed_ratio(&spec, &cfg).unwrap();
        let bound = jump_smoothed_bound(phi);
        summary.push(format!("phi {phi}: mean {:.4} <= {bound}", est.estimate.mean));
        if est.estimate.mean > bound {
            problems.push(format!("phi {phi}: mean {} above {bound}", est.estimate.mean));
        }
        for t in &est.trials {
            match t.quality_bound {
                Some(q) if t.ratio <= q + 1e-9 => {}
                Some(q) => problems.push(format!("phi {phi} trial {}: ratio {} > {q}", t.trial, t.ratio)),
                None => problems.push(format!("phi {phi} trial {}: no per-sample bound", t.trial)),
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = problems.is_empty() && elapsed < Duration::from_secs(300);
    report(
        3,
        "smoothed jump ratio below 5.1 phi + 2.5",
        pass,
        &format!("{}; {} (limit 300s)", summary.join(", "), secs(elapsed)),
    );
    assert!(pass, "{problems:?}");
}

#[test]
fn criterion_04_jump_related_lower_bound() {
    let start = Instant::now();
    let phi = 10.0;
    let c = build_jump_related_lb(phi).unwrap();
    let samples: Vec<ConstructionSample> = (0..50).map(|s| c.sample(s).unwrap()).collect();
    let events = samples.iter().filter(|s| s.event).count();
    let mut problems = Vec::new();
    for s in samples.iter().filter(|s| s.event) {
        if !is_jump_optimal(&s.instance, &s.bad, EPS).unwrap() {
            problems.push(format!("seed {}: not jump optimal", s.seed));
        }
        let r = s.bad_makespan / (1.0 / phi);
        if r <= phi - 1.0 {
            problems.push(format!("seed {}: C_max * phi = {r}", s.seed));
        }
        problems.extend(failing_checks(&c, s));
    }
    let elapsed = start.elapsed();
    let pass = events >= 49 && problems.is_empty() && elapsed < Duration::from_secs(60);
    report(
        4,
        "jump optima on related machines, ratio above phi - 1",
        pass,
        &format!("event {events}/50, {} problems, {} (limit 60s)", problems.len(), secs(elapsed)),
    );
    assert!(pass, "{problems:?}");
}

#[test]
fn criterion_05_lexlist_lower_bound() {
    let start = Instant::now();
    let c = build_lexlist_lb(256.0).unwrap();
    let r = c.params["r"].as_u64().unwrap() as f64;
    let mut problems = Vec::new();
    if (c.spec.num_machines(), c.spec.num_jobs()) != (65, 64) || r != 4.0 {
        problems.push("unexpected size".to_string());
    }
    let order = c.list_order().unwrap().to_vec();
    let mut ok = 0;
    for seed in 0..20 {
        let s = c.sample(seed).unwrap();
        let before = problems.len();
        problems.extend(failing_checks(&c, &s));
        if !is_lex_jump_optimal(&s.instance, &s.bad, EPS).unwrap() {
            problems.push(format!("seed {seed}: not lex-jump optimal"));
        }
        if list_schedule(&s.instance, &order, None).unwrap() != s.bad {
            problems.push(format!("seed {seed}: not the list schedule"));
        }
        if s.good_makespan >= 3.0 || s.ratio < r / 3.0 {
            problems.push(format!("seed {seed}: benchmark {} ratio {}", s.good_makespan, s.ratio));
        }
        if problems.len() == before {
            ok += 1;
        }
    }
    let elapsed = start.elapsed();
    let pass = ok == 20 && problems.is_empty() && elapsed < Duration::from_secs(10);
    report(
        5,
        "lex-jump list schedules with ratio r/3 at phi = 256",
        pass,
        &format!("{ok}/20 seeds, {} (limit 10s)", secs(elapsed)),
    );
    assert!(pass, "{problems:?}");
}

#[test]
fn criterion_06_restricted_jump_lower_bound() {
    let start = Instant::now();
    let c = build_restricted_jump_lb(39, 8.0, 3, Mode::Lenient).unwrap();
    let z = 3.0;
    let s_k = 8.0 * c.params["k_prime"].as_f64().unwrap();
    let predicted = (z * s_k - 1.0) / (17.0 * z);
    let samples: Vec<ConstructionSample> = (0..20).map(|s| c.sample(s).unwrap()).collect();
    let events = samples.iter().filter(|s| s.event).count();
    let mut problems = Vec::new();
    for s in samples.iter().filter(|s| s.event) {
        if !is_jump_optimal(&s.instance, &s.bad, EPS).unwrap() {
            problems.push(format!("seed {}: not jump optimal", s.seed));
        }
        if s.good_makespan > 17.0 * z + EPS {
            problems.push(format!("seed {}: benchmark {}", s.seed, s.good_makespan));
        }
        if s.ratio < predicted - EPS {
            problems.push(format!("seed {}: ratio {} < {predicted}", s.seed, s.ratio));
        }
        problems.extend(failing_checks(&c, s));
    }
    let elapsed = start.elapsed();
    let pass = events == 20 && problems.is_empty() && elapsed < Duration::from_secs(120);
    report(
        6,
        "restricted jump optima, m = 39, s = 8, z = 3",
        pass,
        &format!(
            "event {events}/20, predicted ratio {predicted:.4}, {} problems, {} (limit 120s)",
            problems.len(),
            secs(elapsed)
        ),
    );
    assert!(pass, "{problems:?}");
}

/// Supplementary run at a buildable size: conditional checks on E-samples.
fn restricted_lex_supplement(k: u64, seeds: u64) -> (usize, Vec<String>) {
    let c = build_restricted_lex_lb(k, Mode::Lenient).unwrap();
    let mut events = 0;
    let mut problems = Vec::new();
    for seed in 0..seeds {
        let s = c.sample(seed).unwrap();
        if s.event {
            events += 1;
            problems.extend(failing_checks(&c, &s));
        }
    }
    (events, problems)
}

#[test]
fn criterion_07_restricted_lex_structure() {
    let mut problems = Vec::new();
    let mut decay_failures = Vec::new();
    for k in 2..=20 {
        let rec = recurrence_a(k).unwrap();
        if !rec.ratio_decay_holds() {
            decay_failures.push(k);
            let a: Vec<String> = rec.a.iter().take(4).map(|x| x.to_string()).collect();
            problems.push(format!("k = {k}: a_h/a_(h-1) <= k - 2(h-1)/5 fails, a = {}..", a.join(", ")));
        }
        if !rec.length_bound_holds() {
            problems.push(format!("k = {k}: z = {} not below 5k/2", rec.z));
        }
        if !rec.gamma_bound_holds() {
            let (lhs, rhs) = rec.machine_count_vs_gamma();
            problems.push(format!("k = {k}: ln m = {lhs} above ln Gamma = {rhs}"));
        }
    }

    let mut events = 0;
    match build_restricted_lex_lb(12, Mode::Lenient) {
        Ok(c) => {
            for seed in 0..10 {
                let s = c.sample(seed).unwrap();
                if s.event {
                    events += 1;
                    problems.extend(failing_checks(&c, &s));
                    if s.good_makespan > 5.0 + EPS || s.ratio < (15.0 * 12.0 / 16.0) / 5.0 - EPS {
                        problems.push(format!("seed {seed}: benchmark {} ratio {}", s.good_makespan, s.ratio));
                    }
                }
            }
            if events < 8 {
                problems.push(format!("k = 12: event frequency {events}/10"));
            }
        }
        Err(e) => problems.push(format!("k = 12 not buildable: {e}")),
    }

    let (sup_events, sup_problems) = restricted_lex_supplement(4, 3);
    let supplement = format!(
        "supplementary k = 4: event {sup_events}/3, {} check failures",
        sup_problems.len()
    );
    let pass = problems.is_empty();
    report(
        7,
        "restricted lex-jump recurrence and k = 12 samples",
        pass,
        &format!(
            "ratio decay fails for k in {decay_failures:?}; {}; {supplement}",
            problems.last().cloned().unwrap_or_else(|| "all checks hold".into())
        ),
    );
    assert!(sup_problems.is_empty(), "{sup_problems:?}");
    assert!(pass, "{problems:?}");
}

#[test]
fn criterion_08_near_list_diagnostics() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x8E8);
    let mut problems = Vec::new();
    let (mut lists, mut optima) = (0usize, 0usize);
    for k in 0..200 {
        let inst = random_related(&mut rng, 10, 4);
        let n = inst.num_jobs();
        let opt = optimal_makespan_exact(&inst, DEFAULT_BUDGET).unwrap();
        let mut check = |what: String, s: &Schedule, order: &[usize]| {
            if !is_near_list(&inst, s, order).unwrap() {
                problems.push(format!("instance {k}: {what} not near list"));
                return;
            }
            match validate_nl_structure(&inst, s, order, opt.makespan, OptMode::Exact, Some(&opt.schedule), EPS) {
                Ok(r) if r.all_passed() => {}
                Ok(r) => problems.push(format!("instance {k}: {what}: {:?}", r.checks)),
                Err(e) => problems.push(format!("instance {k}: {what}: {e}")),
            }
        };

        let mut orders = vec![(0..n).collect::<Vec<_>>(), lpt_order(&inst)];
        for _ in 0..8 {
            let mut o: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                o.swap(i, rng.random_range(0..=i));
            }
            orders.push(o);
        }
        for order in &orders {
            let s = list_schedule(&inst, order, None).unwrap();
            let rev: Vec<usize> = order.iter().rev().copied().collect();
            check(format!("list schedule {order:?}"), &s, &rev);
            lists += 1;
        }

        let identity: Vec<usize> = (0..n).collect();
        let mut lex = Vec::new();
        for_each_assignment(&inst, DEFAULT_BUDGET, |a| {
            let s = Schedule::new(a.to_vec());
            if is_lex_jump_optimal(&inst, &s, EPS).unwrap() {
                lex.push(s);
            }
        })
        .unwrap();
        for s in &lex {
            check(format!("lex-jump optimum {:?}", s.assignment()), s, &identity);
        }
        optima += lex.len();
    }
    let pass = problems.is_empty();
    report(
        8,
        "near-list structure of list schedules and lex-jump optima",
        pass,
        &format!(
            "200 instances, {lists} list schedules, {optima} lex-jump optima, {} problems",
            problems.len()
        ),
    );
    assert!(pass, "{:?}", &problems[..problems.len().min(5)]);
}

#[test]
fn criterion_09_tail_bounds() {
    let freq = check_sum_lower_tail(100, 2.0, 10_000, 0x7A11).unwrap();
    let at36 = nl_tail_bound(2.0, 36.0, 2).unwrap();
    let values: Vec<f64> = (0..=400).map(|a| nl_tail_bound(2.0, a as f64 * 0.5, 2).unwrap()).collect();
    let monotone = values.windows(2).all(|w| w[1] <= w[0]);
    let decreasing_past_36 = values[73..].windows(2).all(|w| w[1] < w[0]);
    let pass = freq <= 0.1 && at36 == 1.0 && monotone && decreasing_past_36;
    report(
        9,
        "tail bounds",
        pass,
        &format!("lower-tail frequency {freq} <= 0.1, bound(phi=2, alpha=36, n=2) = {at36}, monotone {monotone}"),
    );
    assert!(pass);
}

#[test]
fn criterion_10_determinism_and_termination() {
    let grid: Grid = serde_json::from_str(
        r#"{"entries":[
            {"kind":"smoothed","family":"jump-lb","neighborhood":"jump","phi":[1,2,4,8],"n":[5],"m":[3],"trials":20},
            {"kind":"smoothed","family":"identical","neighborhood":"lex-jump","multistart":true,"starts":4,
             "pivot":"random:9","phi":[2],"n":[6],"trials":10},
            {"kind":"construction","name":"lexlist","params":[{"phi":4},{"phi":16},{"phi":64},{"phi":256}],"samples":5}
        ]}"#,
    )
    .unwrap();
    let csv = |threads| {
        let cfg = SweepConfig {
            seed: 2024,
            eps: EPS,
            budget: DEFAULT_BUDGET,
            mode: Mode::Lenient,
            threads: Some(threads),
        };
        let mut buf = Vec::new();
        write_csv(&sweep(&grid, &cfg).unwrap(), &mut buf).unwrap();
        buf
    };
    let a = csv(1);
    let identical = a == csv(1) && a == csv(4);

    let mut rng = ChaCha8Rng::seed_from_u64(0x10);
    let mut runs = 0;
    let mut bad_runs = Vec::new();
    for k in 0..300 {
        let inst = random_related(&mut rng, 12, 5);
        let start = Schedule::new((0..inst.num_jobs()).map(|_| rng.random_range(0..inst.num_machines())).collect());
        for nb in [Neighborhood::Jump, Neighborhood::LexJump] {
            for pivot in [Pivot::First, Pivot::MaxGain, Pivot::MinGain, Pivot::Random(k)] {
                let run = local_search(&inst, &start, nb, pivot, EPS).unwrap();
                runs += 1;
                let optimal = match nb {
                    Neighborhood::Jump => is_jump_optimal(&inst, &run.schedule, EPS).unwrap(),
                    Neighborhood::LexJump => is_lex_jump_optimal(&inst, &run.schedule, EPS).unwrap(),
                };
                if !run.is_strictly_decreasing() || run.steps != run.log.len() || !optimal {
                    bad_runs.push(format!("instance {k} {nb} {pivot}"));
                }
            }
        }
    }
    let pass = identical && bad_runs.is_empty();
    report(
        10,
        "determinism and termination",
        pass,
        &format!(
            "sweep CSV byte-identical across runs and thread counts: {identical}; {runs} local searches, {} not strictly decreasing",
            bad_runs.len()
        ),
    );
    assert!(pass, "{bad_runs:?}");
}

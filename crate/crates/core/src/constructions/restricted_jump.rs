//! Jump optima on restricted related machines with ratio
//! `Omega(sqrt(m s_max))`.
//!
//! Machines, fastest first: `M_3` (`m' - (k - 1)` machines of speed `s`),
//! `M_2` (`k` machines of speed `s' = max(1, s k'/k)`) and the unit-speed
//! machine `M_1`, where `m' = m - 2`, `k' = sqrt(m'/s)`, `k = ceil(k')`.
//! Big jobs `J_1` on `[1/2, 1]` may only run on `M_1` and `M_2`; small jobs
//! `J_2` on `[0, 1/2]` may run anywhere.

use serde_json::json;

use super::{Check, ClassLayout, Construction, ConstructionKind, ConstructionSample, Event, Family, Mode, NamedRange};
use crate::algorithms::list::ListScheduler;
use crate::algorithms::optimality::is_jump_optimal;
use crate::error::{Error, Result};
use crate::model::{critical_machines, Instance, MachineSet, Schedule};
use crate::smoothing::{uniform_spec, SmoothedInstanceSpec};

struct RestrictedJump {
    z: f64,
    s: f64,
    k_prime: f64,
    s_prime: f64,
    m3: std::ops::Range<usize>,
    m2: std::ops::Range<usize>,
    m1: usize,
    j1: std::ops::Range<usize>,
    j2: std::ops::Range<usize>,
}

/// Requires `m >= 3`, `s >= 1` and an integer `z >= 3`. Strict mode also
/// requires `sqrt((m-2) s) >= 17` and `k' >= 1`.
pub fn build_restricted_jump_lb(m: usize, s: f64, z: u64, mode: Mode) -> Result<Construction> {
    if m < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 machines, got {m}")));
    }
    if !(s.is_finite() && s >= 1.0) {
        return Err(Error::InvalidParameter(format!("s must be at least 1, got {s}")));
    }
    if z <= 2 {
        return Err(Error::InvalidParameter(format!("z must be an integer above 2, got {z}")));
    }
    let mut warnings = Vec::new();
    let m_prime = (m - 2) as f64;
    mode.premise(
        (m_prime * s).sqrt() >= 17.0,
        format!("sqrt(m' s) = {} is below 17", (m_prime * s).sqrt()),
        &mut warnings,
    )?;
    let k_prime = (m_prime / s).sqrt();
    mode.premise(k_prime >= 1.0, format!("k' = {k_prime} is below 1 because s > m'"), &mut warnings)?;
    let k = k_prime.ceil() as usize;
    let s_prime = (s * k_prime / k as f64).max(1.0);
    let zf = z as f64;

    let n3 = (m - 2) - (k - 1);
    let m3 = 0..n3;
    let m2 = n3..n3 + k;
    let m1 = n3 + k;
    let mut speeds = vec![s; n3];
    speeds.extend(std::iter::repeat_n(s_prime, k));
    speeds.push(1.0);

    let n1 = (2.0 * zf * s * k_prime).floor() as usize;
    let n2 = (32.0 * zf * s * (m_prime - k_prime)).ceil() as usize;
    let big = uniform_spec(0.5, 1.0)?;
    let small = uniform_spec(0.0, 0.5)?;
    let mut densities = vec![big; n1];
    densities.extend(std::iter::repeat_n(small, n2));
    let big_set = MachineSet::range(m2.start..m1 + 1);
    let mut allowed = vec![Some(big_set); n1];
    allowed.extend(std::iter::repeat_n(None, n2));
    let spec = SmoothedInstanceSpec::with_allowed(speeds, densities, allowed)?;

    let layout = ClassLayout {
        machine_classes: vec![
            NamedRange::new("M_3", m3.clone()),
            NamedRange::new("M_2", m2.clone()),
            NamedRange::new("M_1", m1..m1 + 1),
        ],
        job_classes: vec![NamedRange::new("J_1", 0..n1), NamedRange::new("J_2", n1..n1 + n2)],
    };
    Ok(Construction {
        kind: ConstructionKind::RestrictedJump,
        params: json!({
            "m": m, "s": s, "z": z,
            "m_prime": m - 2, "k_prime": k_prime, "k": k, "s_prime": s_prime,
        }),
        spec,
        layout,
        warnings,
        predicted_ratio: (zf * s * k_prime - 1.0) / (17.0 * zf),
        family: Box::new(RestrictedJump {
            z: zf,
            s,
            k_prime,
            s_prime,
            m3,
            m2,
            m1,
            j1: 0..n1,
            j2: n1..n1 + n2,
        }),
    })
}

impl Family for RestrictedJump {
    fn schedules(&self, instance: &Instance) -> Result<(Schedule, Schedule)> {
        let m2: Vec<usize> = self.m2.clone().collect();
        let m3: Vec<usize> = self.m3.clone().collect();
        let j1: Vec<usize> = self.j1.clone().collect();
        let j2: Vec<usize> = self.j2.clone().collect();

        let mut bad = ListScheduler::new(instance);
        for &j in &j1 {
            bad.place(j, self.m1)?;
        }
        let threshold = bad.load(self.m1) - 1.0 / (2.0 * self.s_prime);
        let mut next = 0;
        while next < j2.len() && m2.iter().any(|&i| bad.load(i) < threshold) {
            bad.schedule_job(j2[next], Some(&m2))?;
            next += 1;
        }
        bad.schedule_all(&j2[next..], Some(&m3))?;

        let mut good = ListScheduler::new(instance);
        good.schedule_all(&j1, Some(&m2))?;
        good.schedule_all(&j2, Some(&m3))?;
        Ok((bad.into_schedule()?, good.into_schedule()?))
    }

    fn events(&self, instance: &Instance) -> Vec<Event> {
        let q: f64 = self.j2.clone().map(|j| instance.p(j)).sum();
        let sk = self.s * self.k_prime;
        vec![Event {
            name: "small_volume_exceeds_4z(sk')^2".into(),
            holds: q > 4.0 * self.z * sk * sk,
        }]
    }

    fn checks(&self, sample: &ConstructionSample, eps: f64) -> Vec<Check> {
        let bound = 17.0 * self.z;
        vec![
            Check::new(
                "benchmark_below_17z",
                sample.good_makespan <= bound + eps,
                format!("C_max(sigma') = {} vs {bound}", sample.good_makespan),
            ),
            Check::given(sample.event, "bad_is_jump_optimal", || {
                let ok = is_jump_optimal(&sample.instance, &sample.bad, eps).unwrap_or(false);
                (ok, String::new())
            }),
            Check::given(sample.event, "unit_machine_uniquely_critical", || {
                let crit = critical_machines(&sample.instance, &sample.bad, eps).unwrap_or_default();
                (crit == [self.m1], format!("critical machines {crit:?}"))
            }),
            Check::given(sample.event, "bad_at_least_zsk'-1", || {
                let want = self.z * self.s * self.k_prime - 1.0;
                (
                    sample.bad_makespan >= want - eps,
                    format!("C_max(sigma) = {} vs {want}", sample.bad_makespan),
                )
            }),
        ]
    }
}

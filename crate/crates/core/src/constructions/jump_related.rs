//! Jump optima on unrestricted related machines whose ratio grows linearly
//! in `phi`.
//!
//! One fast machine of speed `(n-1)/(4 phi)` and `n-1` unit-speed machines;
//! a big job on `[1 - 1/phi, 1]` and `n-1` small jobs on `[0, 1/phi]`. The bad
//! schedule parks the big job alone on a slow machine and balances the fast
//! machine just below it.

use serde_json::json;

use super::{Check, ClassLayout, Construction, ConstructionKind, Event, Family, NamedRange};
use crate::algorithms::optimality::is_jump_optimal;
use crate::error::{Error, Result};
use crate::model::{Instance, Schedule};
use crate::smoothing::{uniform_spec, SmoothedInstanceSpec};

struct JumpRelated {
    phi: f64,
    n: usize,
    s1: f64,
}

/// Requires `phi > 2`.
pub fn build_jump_related_lb(phi: f64) -> Result<Construction> {
    if !(phi.is_finite() && phi > 2.0) {
        return Err(Error::InvalidParameter(format!("phi must exceed 2, got {phi}")));
    }
    let n = (4.0 * phi * phi + 1.0).ceil() as usize;
    let s1 = (n - 1) as f64 / (4.0 * phi);
    let mut speeds = vec![1.0; n];
    speeds[0] = s1;
    let big = uniform_spec(1.0 - 1.0 / phi, 1.0)?;
    let small = uniform_spec(0.0, 1.0 / phi)?;
    let mut densities = vec![small; n];
    densities[0] = big;
    let spec = SmoothedInstanceSpec::new(speeds, densities)?;
    let layout = ClassLayout {
        machine_classes: vec![NamedRange::new("fast", 0..1), NamedRange::new("unit", 1..n)],
        job_classes: vec![NamedRange::new("big", 0..1), NamedRange::new("small", 1..n)],
    };
    Ok(Construction {
        kind: ConstructionKind::JumpRelated,
        params: json!({ "phi": phi }),
        spec,
        layout,
        warnings: Vec::new(),
        predicted_ratio: phi - 1.0,
        family: Box::new(JumpRelated { phi, n, s1 }),
    })
}

impl Family for JumpRelated {
    fn schedules(&self, instance: &Instance) -> Result<(Schedule, Schedule)> {
        let n = self.n;
        let p = instance.jobs();
        let mut bad = vec![usize::MAX; n];
        bad[0] = 1;
        let target = p[0] - 1.0 / (self.phi * self.s1);
        let mut fast_load = 0.0;
        let mut next = 1;
        while next < n && fast_load < target {
            bad[next] = 0;
            fast_load += p[next] / self.s1;
            next += 1;
        }
        // leftovers one per empty unit machine
        for (slot, j) in (next..n).enumerate() {
            bad[j] = 2 + slot;
        }
        let good: Vec<usize> = (0..n).collect();
        Ok((Schedule::new(bad), Schedule::new(good)))
    }

    fn events(&self, instance: &Instance) -> Vec<Event> {
        let q: f64 = instance.jobs()[1..].iter().sum();
        vec![Event {
            name: "small_volume_covers_fast_speed".into(),
            holds: q >= self.s1,
        }]
    }

    fn checks(&self, sample: &super::ConstructionSample, eps: f64) -> Vec<Check> {
        let inv_phi = 1.0 / self.phi;
        vec![
            Check::new(
                "benchmark_below_inverse_phi",
                sample.good_makespan <= inv_phi + eps,
                format!("C_max(sigma') = {} vs 1/phi = {inv_phi}", sample.good_makespan),
            ),
            Check::given(sample.event, "bad_is_jump_optimal", || {
                let ok = is_jump_optimal(&sample.instance, &sample.bad, eps).unwrap_or(false);
                (ok, String::new())
            }),
            Check::given(sample.event, "ratio_vs_inverse_phi", || {
                let r = sample.bad_makespan * self.phi;
                (r > self.phi - 1.0, format!("C_max(sigma) * phi = {r}"))
            }),
        ]
    }
}

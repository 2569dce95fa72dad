//! JSON file formats. Machine indices are one-based on disk and zero-based in
//! memory.
//!
//! ```text
//! instance:  {"speeds": [2, 1], "jobs": [{"p": 0.5, "allowed": [1, 2]}, {"p": 0.3}]}
//! schedule:  {"assignment": [1, 2]}
//! spec:      {"speeds": [1], "jobs": [{"density": {"pieces": [{"a": 0.9, "b": 1.0, "h": 10.0}],
//!                                                  "scale": 1.0}}]}
//! ```

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Instance, MachineSet, Schedule};
use crate::smoothing::{DensitySpec, Piece, SmoothedInstanceSpec};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobJson {
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allowed: Option<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceJson {
    pub speeds: Vec<f64>,
    pub jobs: Vec<JobJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleJson {
    pub assignment: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityJson {
    pub pieces: Vec<Piece>,
    #[serde(default = "one")]
    pub scale: f64,
    /// Defaults to the smallest admissible value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecJobJson {
    pub density: DensityJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allowed: Option<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecJson {
    pub speeds: Vec<f64>,
    pub jobs: Vec<SpecJobJson>,
}

fn allowed_from_json(job: usize, allowed: &Option<Vec<usize>>) -> Result<Option<MachineSet>> {
    let Some(list) = allowed else { return Ok(None) };
    let mut set = Vec::with_capacity(list.len());
    for &i in list {
        if i == 0 {
            return Err(Error::InvalidInstance(format!(
                "allowed set of job {} uses machine 0; indices are one-based",
                job + 1
            )));
        }
        set.push(i - 1);
    }
    Ok(Some(MachineSet::new(set)))
}

fn allowed_to_json(set: Option<&MachineSet>) -> Option<Vec<usize>> {
    set.map(|s| s.as_slice().iter().map(|i| i + 1).collect())
}

impl InstanceJson {
    pub fn from_instance(instance: &Instance) -> Self {
        InstanceJson {
            speeds: instance.speeds().to_vec(),
            jobs: (0..instance.num_jobs())
                .map(|j| JobJson {
                    p: instance.p(j),
                    allowed: allowed_to_json(instance.allowed(j)),
                })
                .collect(),
        }
    }

    pub fn to_instance(&self) -> Result<Instance> {
        let jobs = self.jobs.iter().map(|j| j.p).collect();
        let allowed = self
            .jobs
            .iter()
            .enumerate()
            .map(|(j, job)| allowed_from_json(j, &job.allowed))
            .collect::<Result<_>>()?;
        Instance::with_allowed(self.speeds.clone(), jobs, allowed)
    }
}

impl ScheduleJson {
    pub fn from_schedule(schedule: &Schedule) -> Self {
        ScheduleJson {
            assignment: schedule.assignment().iter().map(|i| i + 1).collect(),
        }
    }

    pub fn to_schedule(&self) -> Result<Schedule> {
        let assignment = self
            .assignment
            .iter()
            .enumerate()
            .map(|(j, &i)| {
                i.checked_sub(1).ok_or_else(|| {
                    Error::InfeasibleSchedule(format!("job {} assigned to machine 0; indices are one-based", j + 1))
                })
            })
            .collect::<Result<_>>()?;
        Ok(Schedule::new(assignment))
    }
}

impl DensityJson {
    pub fn from_density(d: &DensitySpec) -> Self {
        DensityJson {
            pieces: d.pieces().to_vec(),
            scale: d.scale(),
            phi: Some(d.phi()),
        }
    }

    pub fn to_density(&self) -> Result<DensitySpec> {
        let phi = match self.phi {
            Some(phi) => phi,
            None => {
                let sup = self.pieces.iter().map(|p| p.h).fold(0.0, f64::max);
                (sup * self.scale).max(1.0)
            }
        };
        DensitySpec::new(self.pieces.clone(), phi, self.scale)
    }
}

impl SpecJson {
    pub fn from_spec(spec: &SmoothedInstanceSpec) -> Self {
        SpecJson {
            speeds: spec.speeds().to_vec(),
            jobs: spec
                .densities()
                .iter()
                .zip(spec.allowed())
                .map(|(d, a)| SpecJobJson {
                    density: DensityJson::from_density(d),
                    allowed: allowed_to_json(a.as_ref()),
                })
                .collect(),
        }
    }

    pub fn to_spec(&self) -> Result<SmoothedInstanceSpec> {
        let densities = self
            .jobs
            .iter()
            .map(|j| j.density.to_density())
            .collect::<Result<_>>()?;
        let allowed = self
            .jobs
            .iter()
            .enumerate()
            .map(|(j, job)| allowed_from_json(j, &job.allowed))
            .collect::<Result<_>>()?;
        SmoothedInstanceSpec::with_allowed(self.speeds.clone(), densities, allowed)
    }
}

pub fn instance_from_str(s: &str) -> Result<Instance> {
    serde_json::from_str::<InstanceJson>(s)?.to_instance()
}

pub fn instance_to_string(instance: &Instance) -> String {
    to_pretty(&InstanceJson::from_instance(instance))
}

pub fn schedule_from_str(s: &str) -> Result<Schedule> {
    serde_json::from_str::<ScheduleJson>(s)?.to_schedule()
}

pub fn schedule_to_string(schedule: &Schedule) -> String {
    to_pretty(&ScheduleJson::from_schedule(schedule))
}

pub fn spec_from_str(s: &str) -> Result<SmoothedInstanceSpec> {
    serde_json::from_str::<SpecJson>(s)?.to_spec()
}

pub fn spec_to_string(spec: &SmoothedInstanceSpec) -> String {
    to_pretty(&SpecJson::from_spec(spec))
}

pub fn to_pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes")
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    read_json::<InstanceJson>(path)?.to_instance()
}

pub fn read_schedule(path: &Path) -> Result<Schedule> {
    read_json::<ScheduleJson>(path)?.to_schedule()
}

pub fn read_spec(path: &Path) -> Result<SmoothedInstanceSpec> {
    read_json::<SpecJson>(path)?.to_spec()
}

//! Lower-bound instance families.
//!
//! Every family produces a smoothed instance specification together with a
//! recipe for a bad local optimum `sigma` and a cheap benchmark schedule
//! `sigma'` whose makespan bounds the optimum from above. Sampling draws the
//! processing requirements, builds both schedules and evaluates the
//! probabilistic events that make `sigma` locally optimal.

mod jump_related;
mod lexlist;
pub mod recurrence;
mod restricted_jump;
mod restricted_lex;

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{makespan, validate_schedule, Instance, Schedule};
use crate::smoothing::{sample_instance, SmoothedInstanceSpec};

pub use jump_related::build_jump_related_lb;
pub use lexlist::build_lexlist_lb;
pub use recurrence::{recurrence_a, Recurrence};
pub use restricted_jump::build_restricted_jump_lb;
pub use restricted_lex::{build_restricted_lex_lb, build_restricted_lex_lb_with_cap, DEFAULT_JOB_CAP};

/// How to treat parameters outside the range the lower-bound argument
/// assumes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Strict,
    /// Accept the parameters, record a warning and evaluate everything
    /// honestly.
    Lenient,
}

impl Mode {
    fn premise(self, ok: bool, message: String, warnings: &mut Vec<String>) -> Result<()> {
        if ok {
            return Ok(());
        }
        match self {
            Mode::Strict => Err(Error::InvalidParameter(message)),
            Mode::Lenient => {
                log::warn!("{message}");
                warnings.push(message);
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NamedRange {
    pub name: String,
    pub start: usize,
    pub end: usize,
}

impl NamedRange {
    fn new(name: impl Into<String>, range: Range<usize>) -> Self {
        NamedRange {
            name: name.into(),
            start: range.start,
            end: range.end,
        }
    }

    pub fn range(&self) -> Range<usize> {
        self.start..self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

/// Zero-based, contiguous machine and job classes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ClassLayout {
    pub machine_classes: Vec<NamedRange>,
    pub job_classes: Vec<NamedRange>,
}

impl ClassLayout {
    pub fn machine_class(&self, name: &str) -> Option<&NamedRange> {
        self.machine_classes.iter().find(|c| c.name == name)
    }

    pub fn job_class(&self, name: &str) -> Option<&NamedRange> {
        self.job_classes.iter().find(|c| c.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Event {
    pub name: String,
    pub holds: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// The check only applies when the sample's events hold.
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Check {
            name: name.into(),
            status: if passed { CheckStatus::Pass } else { CheckStatus::Fail },
            detail,
        }
    }

    /// A check that is only evaluated when `event` holds.
    fn given(event: bool, name: &str, eval: impl FnOnce() -> (bool, String)) -> Self {
        if !event {
            return Check {
                name: name.into(),
                status: CheckStatus::Skipped,
                detail: "event does not hold".into(),
            };
        }
        let (passed, detail) = eval();
        Check::new(name, passed, detail)
    }

    pub fn passed(&self) -> bool {
        self.status != CheckStatus::Fail
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstructionSample {
    pub seed: u64,
    #[serde(skip)]
    pub instance: Instance,
    #[serde(skip)]
    pub bad: Schedule,
    #[serde(skip)]
    pub good: Schedule,
    pub events: Vec<Event>,
    /// All events hold.
    pub event: bool,
    pub bad_makespan: f64,
    pub good_makespan: f64,
    /// `C_max(sigma) / C_max(sigma')`, a lower bound on the ratio of the
    /// worst local optimum.
    pub ratio: f64,
}

pub(crate) trait Family: Send + Sync {
    fn schedules(&self, instance: &Instance) -> Result<(Schedule, Schedule)>;
    fn events(&self, instance: &Instance) -> Vec<Event>;
    fn checks(&self, sample: &ConstructionSample, eps: f64) -> Vec<Check>;

    fn list_order(&self) -> Option<&[usize]> {
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstructionKind {
    JumpRelated,
    Lexlist,
    RestrictedJump,
    RestrictedLex,
}

impl ConstructionKind {
    pub fn name(self) -> &'static str {
        match self {
            ConstructionKind::JumpRelated => "jump-related",
            ConstructionKind::Lexlist => "lexlist",
            ConstructionKind::RestrictedJump => "restricted-jump",
            ConstructionKind::RestrictedLex => "restricted-lex",
        }
    }
}

impl fmt::Display for ConstructionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConstructionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jump-related" => Ok(ConstructionKind::JumpRelated),
            "lexlist" => Ok(ConstructionKind::Lexlist),
            "restricted-jump" => Ok(ConstructionKind::RestrictedJump),
            "restricted-lex" => Ok(ConstructionKind::RestrictedLex),
            other => Err(Error::InvalidParameter(format!("unknown construction '{other}'"))),
        }
    }
}

/// A lower-bound family instantiated with concrete parameters.
pub struct Construction {
    pub kind: ConstructionKind,
    pub params: serde_json::Value,
    pub spec: SmoothedInstanceSpec,
    pub layout: ClassLayout,
    /// Premises of the lower-bound argument that the parameters violate.
    pub warnings: Vec<String>,
    /// Lower bound on `C_max(sigma) / C_max(sigma')` whenever the events hold.
    pub predicted_ratio: f64,
    family: Box<dyn Family>,
}

impl fmt::Debug for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Construction")
            .field("kind", &self.kind)
            .field("params", &self.params)
            .field("machines", &self.spec.num_machines())
            .field("jobs", &self.spec.num_jobs())
            .field("predicted_ratio", &self.predicted_ratio)
            .finish()
    }
}

#[derive(Serialize)]
pub struct ConstructionMeta<'a> {
    pub construction: ConstructionKind,
    pub params: &'a serde_json::Value,
    pub machines: usize,
    pub jobs: usize,
    pub phi: f64,
    pub layout: &'a ClassLayout,
    pub warnings: &'a [String],
    pub predicted_ratio: f64,
}

impl Construction {
    pub fn meta(&self) -> ConstructionMeta<'_> {
        ConstructionMeta {
            construction: self.kind,
            params: &self.params,
            machines: self.spec.num_machines(),
            jobs: self.spec.num_jobs(),
            phi: self.spec.phi(),
            layout: &self.layout,
            warnings: &self.warnings,
            predicted_ratio: self.predicted_ratio,
        }
    }

    /// Job order whose list schedule is the bad schedule, for families built
    /// that way.
    pub fn list_order(&self) -> Option<&[usize]> {
        self.family.list_order()
    }

    /// Sample processing requirements and build `sigma`, `sigma'` and the
    /// event flags.
    pub fn sample(&self, seed: u64) -> Result<ConstructionSample> {
        let instance = sample_instance(&self.spec, seed)?;
        self.sample_from(instance, seed)
    }

    /// As [`sample`](Self::sample) for given processing requirements.
    pub fn sample_from(&self, instance: Instance, seed: u64) -> Result<ConstructionSample> {
        let (bad, good) = self.family.schedules(&instance)?;
        for (name, s) in [("bad", &bad), ("benchmark", &good)] {
            let report = validate_schedule(&instance, s);
            if !report.is_ok() {
                return Err(Error::InfeasibleSchedule(format!("{name} schedule: {report}")));
            }
        }
        let events = self.family.events(&instance);
        let event = events.iter().all(|e| e.holds);
        let bad_makespan = makespan(&instance, &bad)?;
        let good_makespan = makespan(&instance, &good)?;
        Ok(ConstructionSample {
            seed,
            instance,
            bad,
            good,
            events,
            event,
            bad_makespan,
            good_makespan,
            ratio: bad_makespan / good_makespan,
        })
    }

    /// Structural checks the lower-bound argument guarantees; event-dependent
    /// checks are skipped on samples whose events fail.
    pub fn validate(&self, sample: &ConstructionSample, eps: f64) -> Vec<Check> {
        let mut checks = self.family.checks(sample, eps);
        checks.push(Check::given(sample.event, "predicted_ratio", || {
            (
                sample.ratio >= self.predicted_ratio - eps,
                format!("ratio {} vs predicted {}", sample.ratio, self.predicted_ratio),
            )
        }));
        checks
    }
}

/// Build a family by name from a JSON parameter object.
pub fn build_by_name(name: &str, params: &serde_json::Value, mode: Mode) -> Result<Construction> {
    let num = |key: &str| -> Result<f64> {
        params
            .get(key)
            .and_then(serde_json::Value::as_f64)
            .ok_or_else(|| Error::InvalidParameter(format!("{name} needs numeric parameter '{key}'")))
    };
    let int = |key: &str| -> Result<u64> {
        let v = num(key)?;
        if v >= 0.0 && v.fract() == 0.0 {
            Ok(v as u64)
        } else {
            Err(Error::InvalidParameter(format!("parameter '{key}' must be a non-negative integer")))
        }
    };
    match name.parse::<ConstructionKind>()? {
        ConstructionKind::JumpRelated => build_jump_related_lb(num("phi")?),
        ConstructionKind::Lexlist => build_lexlist_lb(num("phi")?),
        ConstructionKind::RestrictedJump => {
            build_restricted_jump_lb(int("m")? as usize, num("s")?, int("z")?, mode)
        }
        ConstructionKind::RestrictedLex => build_restricted_lex_lb(int("k")?, mode),
    }
}

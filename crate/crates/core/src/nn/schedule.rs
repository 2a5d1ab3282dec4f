use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    Constant,
    ExpDecay,
}

impl FromStr for ScheduleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(ScheduleKind::Constant),
            "exp-decay" => Ok(ScheduleKind::ExpDecay),
            other => Err(Error::Config(format!("unknown schedule `{other}`"))),
        }
    }
}

impl fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScheduleKind::Constant => "constant",
            ScheduleKind::ExpDecay => "exp-decay",
        })
    }
}

/// Learning rate as a function of the update index.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LrSchedule {
    pub kind: ScheduleKind,
    pub start: f64,
    pub end: f64,
    pub total: u64,
}

impl LrSchedule {
    pub fn constant(lr: f64) -> Self {
        Self { kind: ScheduleKind::Constant, start: lr, end: lr, total: 1 }
    }

    /// `start (end / start)^{t / total}`.
    pub fn exp_decay(start: f64, end: f64, total: u64) -> Self {
        Self { kind: ScheduleKind::ExpDecay, start, end, total: total.max(1) }
    }

    pub fn lr(&self, t: u64) -> f64 {
        match self.kind {
            ScheduleKind::Constant => self.start,
            ScheduleKind::ExpDecay => {
                let frac = t.min(self.total) as f64 / self.total as f64;
                self.start * (self.end / self.start).powf(frac)
            }
        }
    }
}

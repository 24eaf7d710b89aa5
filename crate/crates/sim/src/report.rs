use serde::Serialize;

use crate::SimConfig;

/// One estimated quantity next to its closed-form value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Statistic {
    pub name: String,
    pub estimate: f64,
    pub se: f64,
    pub oracle: f64,
    /// `(estimate − oracle) / se`.
    pub z: f64,
    /// Whether `|z| ≤ 3` is required.
    pub gated: bool,
    /// Number of trials that contributed.
    pub samples: u64,
}

impl Statistic {
    pub(crate) fn new(name: impl Into<String>, estimate: f64, se: f64, oracle: f64, samples: u64) -> Self {
        let z = if se > 0.0 {
            (estimate - oracle) / se
        } else if estimate == oracle {
            0.0
        } else {
            (estimate - oracle).signum() * f64::INFINITY
        };
        Self {
            name: name.into(),
            estimate,
            se,
            oracle,
            z,
            gated: true,
            samples,
        }
    }

    pub fn passes(&self) -> bool {
        !self.gated || self.z.abs() <= 3.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Requirement {
    /// Must hold on every sampled path.
    Every,
    /// Must hold on at least one sampled path.
    Some,
}

/// Path-wise property counted over the sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathCheck {
    pub name: String,
    pub passed: u64,
    pub total: u64,
    pub requirement: Requirement,
}

impl PathCheck {
    pub fn fraction(&self) -> f64 {
        self.passed as f64 / self.total as f64
    }

    pub fn passes(&self) -> bool {
        match self.requirement {
            Requirement::Every => self.passed == self.total,
            Requirement::Some => self.passed > 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MCReport {
    pub config: SimConfig,
    pub statistics: Vec<Statistic>,
    pub path_checks: Vec<PathCheck>,
}

impl MCReport {
    /// All gated statistics within 3 standard errors and all path checks met.
    pub fn passes(&self) -> bool {
        self.statistics.iter().all(Statistic::passes) && self.path_checks.iter().all(PathCheck::passes)
    }

    pub fn statistic(&self, name: &str) -> Option<&Statistic> {
        self.statistics.iter().find(|s| s.name == name)
    }

    pub fn path_check(&self, name: &str) -> Option<&PathCheck> {
        self.path_checks.iter().find(|s| s.name == name)
    }

    /// Columns `statistic,estimate,se,oracle,z`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("statistic,estimate,se,oracle,z\n");
        for s in &self.statistics {
            out.push_str(&format!("{},{},{},{},{}\n", s.name, s.estimate, s.se, s.oracle, s.z));
        }
        out
    }
}

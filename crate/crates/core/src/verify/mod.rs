//! Seeded verification harness.
//!
//! Every trial draws its inputs from its own ChaCha stream, keyed by the
//! configured seed and the trial index, so trials run in parallel and any one
//! of them can be replayed alone with [`run_trial`]. Reports are identical
//! for identical configurations apart from the optional elapsed time.

pub mod draw;
mod suites;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::tolerance;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("n_max must be at least 1")]
    NoTerms,
    #[error("amplitude range must satisfy 0 < lo <= hi (got [{0}, {1}])")]
    BadRange(f64, f64),
    #[error("tolerance must be positive and finite (got {0})")]
    BadTolerance(f64),
    #[error("unknown suite `{0}` (expected one of: oracle, crossform, permutation, cyclic, field, conservation, period, branch)")]
    UnknownSuite(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub trials: usize,
    pub n_max: usize,
    pub r_range: (f64, f64),
    /// Multiplier on `Σ r_j` for the checks measured against the amplitude
    /// scale (oracle, cross-form and permutation checks).
    pub tol_abs_scale: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 1000,
            n_max: 12,
            r_range: (1e-3, 1e3),
            tol_abs_scale: tolerance::ORACLE_ABS_SCALE,
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.trials == 0 {
            return Err(ConfigError::NoTrials);
        }
        if self.n_max == 0 {
            return Err(ConfigError::NoTerms);
        }
        let (lo, hi) = self.r_range;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(ConfigError::BadRange(lo, hi));
        }
        if !(self.tol_abs_scale > 0.0 && self.tol_abs_scale.is_finite()) {
            return Err(ConfigError::BadTolerance(self.tol_abs_scale));
        }
        Ok(())
    }

    /// The RNG for trial `index`.
    pub fn trial_rng(&self, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Oracle,
    Crossform,
    Permutation,
    Cyclic,
    Field,
    Conservation,
    Period,
    Branch,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Oracle,
        Suite::Crossform,
        Suite::Permutation,
        Suite::Cyclic,
        Suite::Field,
        Suite::Conservation,
        Suite::Period,
        Suite::Branch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Oracle => "oracle",
            Suite::Crossform => "crossform",
            Suite::Permutation => "permutation",
            Suite::Cyclic => "cyclic",
            Suite::Field => "field",
            Suite::Conservation => "conservation",
            Suite::Period => "period",
            Suite::Branch => "branch",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| ConfigError::UnknownSuite(s.to_string()))
    }
}

/// How a check's observations decide pass or fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Requirement {
    /// Every observation must have `error ≤ tolerance`.
    AllWithin,
    /// Every observation must have `error > tolerance`; used to show that a
    /// wrong formula is rejected.
    AllExceed,
    /// At least one observation must have `error > tolerance`.
    SomeExceed,
}

impl Requirement {
    fn holds(self, error: f64, tolerance: f64) -> bool {
        match self {
            Requirement::AllWithin => error <= tolerance,
            Requirement::AllExceed | Requirement::SomeExceed => error > tolerance,
        }
    }

    /// Whether `a` is a more telling observation than `b`.
    fn worse(self, a: f64, b: f64) -> bool {
        match self {
            Requirement::AllWithin | Requirement::SomeExceed => a > b || a.is_nan(),
            Requirement::AllExceed => a < b || a.is_nan(),
        }
    }
}

/// The most telling observation of a check, with what is needed to replay it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Worst {
    pub trial: usize,
    pub error: f64,
    pub input: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: &'static str,
    pub requirement: Requirement,
    pub tolerance: f64,
    /// Observations satisfying the requirement's per-observation condition.
    pub passed: u64,
    pub failed: u64,
    /// Observations skipped as poles or near-cancellations.
    pub excluded: u64,
    /// Largest error (smallest for `all_exceed` checks) over all observations.
    pub max_error: Option<f64>,
    pub worst: Option<Worst>,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub config: VerifyConfig,
    pub passed: bool,
    pub checks: Vec<CheckReport>,
    /// Suite-specific counters, such as root-of-unity indices.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub notes: BTreeMap<String, u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u128>,
}

impl VerifyReport {
    pub fn check(&self, name: &str) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone)]
struct Entry {
    name: &'static str,
    requirement: Requirement,
    tolerance: f64,
    passed: u64,
    failed: u64,
    excluded: u64,
    worst: Option<Worst>,
}

/// Observations from one trial, reduced per check.
#[derive(Debug, Clone, Default)]
pub struct TrialLog {
    trial: usize,
    entries: Vec<Entry>,
    notes: BTreeMap<String, u64>,
}

impl TrialLog {
    fn new(trial: usize) -> Self {
        Self {
            trial,
            ..Self::default()
        }
    }

    fn entry(
        &mut self,
        name: &'static str,
        requirement: Requirement,
        tolerance: f64,
    ) -> &mut Entry {
        let at = match self.entries.iter().position(|e| e.name == name) {
            Some(at) => at,
            None => {
                self.entries.push(Entry {
                    name,
                    requirement,
                    tolerance,
                    passed: 0,
                    failed: 0,
                    excluded: 0,
                    worst: None,
                });
                self.entries.len() - 1
            }
        };
        &mut self.entries[at]
    }

    /// Records one observation. `input` is only built when the observation
    /// becomes the trial's worst for this check.
    pub(crate) fn observe(
        &mut self,
        name: &'static str,
        requirement: Requirement,
        tolerance: f64,
        error: f64,
        input: impl FnOnce() -> Value,
    ) {
        let trial = self.trial;
        let e = self.entry(name, requirement, tolerance);
        if requirement.holds(error, tolerance) {
            e.passed += 1;
        } else {
            e.failed += 1;
        }
        if e.worst
            .as_ref()
            .is_none_or(|w| requirement.worse(error, w.error))
        {
            e.worst = Some(Worst {
                trial,
                error,
                input: input(),
            });
        }
    }

    pub(crate) fn exclude(&mut self, name: &'static str, requirement: Requirement, tolerance: f64) {
        self.entry(name, requirement, tolerance).excluded += 1;
    }

    pub(crate) fn note(&mut self, key: String) {
        *self.notes.entry(key).or_insert(0) += 1;
    }

    /// Worst error recorded for `name` in this trial.
    pub fn error(&self, name: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.name == name)
            .and_then(|e| e.worst.as_ref().map(|w| w.error))
    }
}

/// Runs a single trial of `suite`; [`run`] is the ordered merge of these.
pub fn run_trial(suite: Suite, config: &VerifyConfig, trial: usize) -> TrialLog {
    let mut log = TrialLog::new(trial);
    let mut rng = config.trial_rng(trial);
    suites::run(suite, config, &mut rng, &mut log);
    log
}

pub fn run(
    suite: Suite,
    config: &VerifyConfig,
    timestamp: bool,
) -> Result<VerifyReport, ConfigError> {
    config.validate()?;
    let start = Instant::now();
    let logs: Vec<TrialLog> = (0..config.trials)
        .into_par_iter()
        .map(|trial| run_trial(suite, config, trial))
        .collect();

    let mut merged: Vec<Entry> = Vec::new();
    let mut notes = BTreeMap::new();
    for log in logs {
        for e in log.entries {
            let slot = match merged.iter().position(|m| m.name == e.name) {
                Some(at) => &mut merged[at],
                None => {
                    merged.push(Entry {
                        worst: None,
                        passed: 0,
                        failed: 0,
                        excluded: 0,
                        ..e.clone()
                    });
                    merged.last_mut().expect("just pushed")
                }
            };
            slot.passed += e.passed;
            slot.failed += e.failed;
            slot.excluded += e.excluded;
            if let Some(w) = e.worst {
                if slot
                    .worst
                    .as_ref()
                    .is_none_or(|cur| slot.requirement.worse(w.error, cur.error))
                {
                    slot.worst = Some(w);
                }
            }
        }
        for (k, v) in log.notes {
            *notes.entry(k).or_insert(0) += v;
        }
    }

    let checks: Vec<CheckReport> = merged
        .into_iter()
        .map(|e| {
            let ok = match e.requirement {
                Requirement::AllWithin | Requirement::AllExceed => e.failed == 0,
                Requirement::SomeExceed => e.passed > 0,
            };
            CheckReport {
                name: e.name,
                requirement: e.requirement,
                tolerance: e.tolerance,
                passed: e.passed,
                failed: e.failed,
                excluded: e.excluded,
                max_error: e.worst.as_ref().map(|w| w.error),
                worst: e.worst,
                ok,
            }
        })
        .collect();

    Ok(VerifyReport {
        suite,
        config: config.clone(),
        passed: !checks.is_empty() && checks.iter().all(|c| c.ok),
        checks,
        notes,
        elapsed_ms: timestamp.then(|| start.elapsed().as_millis()),
    })
}

//! Named verification suites with deterministic, machine-readable reports.
//!
//! A suite draws its samples from per-trial counter-based streams, so the
//! report depends only on the configuration and not on thread scheduling.
//! `runtime_ms` is the one field that varies between runs; compare reports
//! with [`SuiteReport::canonical_json`].

mod suites;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::error::GeomError;
use crate::sampling::{trial_rng, SeededRng};

pub const DEFAULT_SEED: u64 = 0x5eed_2024;

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error("unknown suite `{0}`; run `verify list` for the catalog")]
    UnknownSuite(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("cannot write report: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot serialize report: {0}")]
    Json(#[from] serde_json::Error),
}

impl VerifyError {
    pub fn exit_code(&self) -> i32 {
        match self {
            VerifyError::UnknownSuite(_) | VerifyError::InvalidConfig(_) => 2,
            VerifyError::Io(_) | VerifyError::Json(_) => 3,
        }
    }
}

/// Dimension overrides; unset entries take the suite defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Dims {
    pub n: Option<usize>,
    pub p: Option<usize>,
    pub k: Option<usize>,
    pub window_radius: Option<usize>,
}

/// A requested run. Unset fields fall back to the suite defaults.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub suite_name: String,
    pub dims: Dims,
    pub trials: Option<u64>,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    pub output_path: Option<PathBuf>,
}

impl SuiteConfig {
    pub fn new(suite_name: impl Into<String>) -> Self {
        Self {
            suite_name: suite_name.into(),
            dims: Dims::default(),
            trials: None,
            seed: DEFAULT_SEED,
            tolerances: BTreeMap::new(),
            output_path: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_trials(mut self, trials: u64) -> Self {
        self.trials = Some(trials);
        self
    }

    pub fn with_tolerance(mut self, name: &str, value: f64) -> Self {
        self.tolerances.insert(name.to_string(), value);
        self
    }
}

/// The configuration a suite actually ran with, echoed in its report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolvedConfig {
    pub suite_name: String,
    pub dims: BTreeMap<String, usize>,
    pub trials: u64,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
}

impl ResolvedConfig {
    pub(crate) fn dim(&self, name: &str) -> usize {
        self.dims[name]
    }

    pub(crate) fn dim_override(&self, name: &str) -> Option<usize> {
        self.dims.get(name).copied()
    }

    pub(crate) fn tol(&self, name: &str) -> f64 {
        self.tolerances[name]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// Passes when `value ≤ bound`.
    AtMost,
    /// Passes when `value ≥ bound`.
    AtLeast,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub id: String,
    pub relation: Relation,
    /// Worst value over all trials.
    pub value: f64,
    pub bound: f64,
    /// Distance to the bound, positive when the check passes.
    pub margin: f64,
    pub passed: bool,
    /// Trial that produced `value`, when the check is sampled.
    pub worst_trial: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub check_id: String,
    pub trial: Option<u64>,
    pub inputs: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite_name: String,
    pub config: ResolvedConfig,
    pub passed: bool,
    pub checks: Vec<CheckRecord>,
    /// Inputs of the check with the smallest margin.
    pub witness: Option<Witness>,
    /// Set when the suite aborted on a solver failure.
    pub error: Option<String>,
    pub runtime_ms: u64,
}

impl SuiteReport {
    /// JSON with `runtime_ms` zeroed, identical across repeated runs.
    pub fn canonical_json(&self) -> String {
        let mut copy = self.clone();
        copy.runtime_ms = 0;
        serde_json::to_string(&copy).expect("report serializes")
    }

    pub fn exit_code(&self) -> i32 {
        if self.error.is_some() {
            3
        } else if self.passed {
            0
        } else {
            1
        }
    }
}

/// Catalog entry.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteInfo {
    pub name: &'static str,
    /// The property the suite certifies.
    pub anchor: &'static str,
    #[serde(skip)]
    pub(crate) dims: &'static [(&'static str, usize)],
    pub(crate) trials: u64,
    #[serde(skip)]
    pub(crate) tolerances: &'static [(&'static str, f64)],
    #[serde(skip)]
    pub(crate) run: fn(&ResolvedConfig) -> crate::Result<SuiteOutcome>,
}

impl SuiteInfo {
    pub fn default_trials(&self) -> u64 {
        self.trials
    }

    pub fn tolerance_names(&self) -> Vec<&'static str> {
        self.tolerances.iter().map(|(n, _)| *n).collect()
    }

    pub fn dim_names(&self) -> Vec<&'static str> {
        self.dims.iter().map(|(n, _)| *n).collect()
    }
}

pub fn list_suites() -> &'static [SuiteInfo] {
    suites::REGISTRY
}

pub fn find_suite(name: &str) -> Result<&'static SuiteInfo, VerifyError> {
    suites::REGISTRY
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| VerifyError::UnknownSuite(name.to_string()))
}

/// Merges the request with the suite defaults and validates it.
pub fn resolve(info: &SuiteInfo, config: &SuiteConfig) -> Result<ResolvedConfig, VerifyError> {
    let mut dims = BTreeMap::new();
    for &(name, default) in info.dims {
        let value = match name {
            "n" => config.dims.n,
            "p" => config.dims.p,
            "k" => config.dims.k,
            "window_radius" => config.dims.window_radius,
            _ => None,
        }
        .unwrap_or(default);
        if value == 0 {
            return Err(VerifyError::InvalidConfig(format!("{name} must be positive")));
        }
        // swept dimensions stay out of the echo unless overridden
        if value != suites::SWEEP {
            dims.insert(name.to_string(), value);
        }
    }
    if let (Some(&n), Some(&p)) = (dims.get("n"), dims.get("p")) {
        if p >= n {
            return Err(VerifyError::InvalidConfig(format!("need p < n, got p = {p}, n = {n}")));
        }
    }
    if let (Some(&n), Some(&k)) = (dims.get("n"), dims.get("k")) {
        if k > n {
            return Err(VerifyError::InvalidConfig(format!("need k ≤ n, got k = {k}, n = {n}")));
        }
    }
    if dims.get("window_radius").is_some_and(|&r| r < 2) {
        return Err(VerifyError::InvalidConfig("window radius must be at least 2".into()));
    }
    let trials = config.trials.unwrap_or(info.trials);
    if trials == 0 {
        return Err(VerifyError::InvalidConfig("trials must be at least 1".into()));
    }
    let mut tolerances: BTreeMap<String, f64> =
        info.tolerances.iter().map(|(n, v)| (n.to_string(), *v)).collect();
    for (name, &value) in &config.tolerances {
        if !(value.is_finite() && value > 0.0) {
            return Err(VerifyError::InvalidConfig(format!("tolerance {name} must be positive")));
        }
        if let Some(slot) = tolerances.get_mut(name) {
            *slot = value;
        }
    }
    Ok(ResolvedConfig {
        suite_name: info.name.to_string(),
        dims,
        trials,
        seed: config.seed,
        tolerances,
    })
}

/// Rejects tolerance names that no selected suite understands.
pub fn check_tolerance_names(suites: &[&SuiteInfo], config: &SuiteConfig) -> Result<(), VerifyError> {
    for name in config.tolerances.keys() {
        if !suites.iter().any(|s| s.tolerances.iter().any(|(n, _)| n == name)) {
            return Err(VerifyError::InvalidConfig(format!("unknown tolerance `{name}`")));
        }
    }
    Ok(())
}

/// Runs one suite. Solver failures are reported inside the report.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport, VerifyError> {
    let info = find_suite(&config.suite_name)?;
    check_tolerance_names(&[info], config)?;
    let resolved = resolve(info, config)?;
    Ok(run_resolved(info, resolved))
}

pub(crate) fn run_resolved(info: &SuiteInfo, resolved: ResolvedConfig) -> SuiteReport {
    let start = Instant::now();
    let outcome = (info.run)(&resolved);
    let runtime_ms = start.elapsed().as_millis() as u64;
    match outcome {
        Ok(SuiteOutcome { checks, witness }) => SuiteReport {
            suite_name: info.name.to_string(),
            passed: checks.iter().all(|c| c.passed),
            config: resolved,
            checks,
            witness,
            error: None,
            runtime_ms,
        },
        Err(e) => SuiteReport {
            suite_name: info.name.to_string(),
            config: resolved,
            passed: false,
            checks: Vec::new(),
            witness: Some(Witness {
                check_id: "internal".into(),
                trial: None,
                inputs: Value::String(e.to_string()),
            }),
            error: Some(e.to_string()),
            runtime_ms,
        },
    }
}

/// Runs every registered suite with the shared overrides.
pub fn run_all(config: &SuiteConfig) -> Result<Vec<SuiteReport>, VerifyError> {
    let all: Vec<&SuiteInfo> = suites::REGISTRY.iter().collect();
    check_tolerance_names(&all, config)?;
    let resolved = all
        .iter()
        .map(|info| resolve(info, config))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(all
        .into_iter()
        .zip(resolved)
        .map(|(info, r)| run_resolved(info, r))
        .collect())
}

/// One row per check: `suite,check_id,value,bound,margin`.
pub fn write_csv(path: &Path, reports: &[SuiteReport]) -> Result<(), VerifyError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "suite,check_id,value,bound,margin")?;
    for r in reports {
        for c in &r.checks {
            writeln!(out, "{},{},{:?},{:?},{:?}", r.suite_name, c.id, c.value, c.bound, c.margin)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// A single report is written as an object, several as an array.
pub fn write_json(path: &Path, reports: &[SuiteReport]) -> Result<(), VerifyError> {
    let text = match reports {
        [single] => serde_json::to_string_pretty(single)?,
        many => serde_json::to_string_pretty(many)?,
    };
    std::fs::write(path, text + "\n")?;
    Ok(())
}

pub(crate) struct SuiteOutcome {
    pub checks: Vec<CheckRecord>,
    pub witness: Option<Witness>,
}

/// Running worst case of one check.
#[derive(Clone, Debug)]
pub(crate) struct Tracker {
    id: String,
    relation: Relation,
    bound: f64,
    worst: Option<(f64, Option<u64>)>,
}

impl Tracker {
    pub fn at_most(id: impl Into<String>, bound: f64) -> Self {
        Self {
            id: id.into(),
            relation: Relation::AtMost,
            bound,
            worst: None,
        }
    }

    pub fn at_least(id: impl Into<String>, bound: f64) -> Self {
        Self {
            id: id.into(),
            relation: Relation::AtLeast,
            bound,
            worst: None,
        }
    }

    pub fn observe(&mut self, value: f64, trial: Option<u64>) {
        let replace = match self.worst {
            None => true,
            Some((w, _)) if w.is_nan() => false,
            Some((w, _)) => {
                value.is_nan()
                    || match self.relation {
                        Relation::AtMost => value > w,
                        Relation::AtLeast => value < w,
                    }
            }
        };
        if replace {
            self.worst = Some((value, trial));
        }
    }

    pub fn observe_all(&mut self, values: impl IntoIterator<Item = f64>) {
        for (i, v) in values.into_iter().enumerate() {
            self.observe(v, Some(i as u64));
        }
    }

    pub fn record(&self) -> CheckRecord {
        let (value, worst_trial) = self.worst.unwrap_or((f64::NAN, None));
        let margin = match self.relation {
            Relation::AtMost => self.bound - value,
            Relation::AtLeast => value - self.bound,
        };
        CheckRecord {
            id: self.id.clone(),
            relation: self.relation,
            value,
            bound: self.bound,
            passed: margin >= 0.0,
            margin,
            worst_trial,
        }
    }
}

/// Collects check records and attaches the witness of the tightest one.
pub(crate) fn finish<F>(trackers: &[Tracker], describe: F) -> SuiteOutcome
where
    F: Fn(&str, Option<u64>) -> Value,
{
    let checks: Vec<CheckRecord> = trackers.iter().map(Tracker::record).collect();
    let tightest = checks
        .iter()
        .min_by(|a, b| {
            let key = |c: &CheckRecord| if c.margin.is_nan() { f64::NEG_INFINITY } else { c.margin };
            key(a).total_cmp(&key(b))
        });
    let witness = tightest.map(|c| Witness {
        check_id: c.id.clone(),
        trial: c.worst_trial,
        inputs: describe(&c.id, c.worst_trial),
    });
    SuiteOutcome { checks, witness }
}

/// Stream for trial `trial` of sub-experiment `stream`.
pub(crate) fn stream_rng(seed: u64, stream: u64, trial: u64) -> SeededRng {
    trial_rng(seed, (stream << 40) | trial)
}

/// Evaluates `f` on every trial in parallel; results come back in trial order.
pub(crate) fn par_trials<T, F>(seed: u64, stream: u64, trials: u64, f: F) -> crate::Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut SeededRng) -> crate::Result<T> + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|t| f(&mut stream_rng(seed, stream, t)))
        .collect::<Result<Vec<_>, GeomError>>()
}

pub(crate) fn matrix_json(m: &nalgebra::DMatrix<f64>) -> Value {
    Value::Array(
        m.row_iter()
            .map(|r| Value::Array(r.iter().map(|&x| serde_json::json!(x)).collect()))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_has_sixteen_anchored_entries() {
        let suites = list_suites();
        assert_eq!(suites.len(), 16);
        assert!(suites.iter().all(|s| !s.anchor.is_empty()));
        let mut names: Vec<_> = suites.iter().map(|s| s.name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 16);
    }

    #[test]
    fn tracker_semantics() {
        let mut t = Tracker::at_most("x", 1.0);
        t.observe_all([0.2, 0.7, 0.5]);
        let r = t.record();
        assert!(r.passed && r.worst_trial == Some(1) && (r.margin - 0.3).abs() < 1e-15);
        let mut t = Tracker::at_least("y", 0.0);
        t.observe(1.0, None);
        t.observe(f64::NAN, Some(3));
        t.observe(-1.0, Some(4));
        let r = t.record();
        assert!(!r.passed && r.worst_trial == Some(3));
    }

    #[test]
    fn config_validation() {
        assert!(matches!(run_suite(&SuiteConfig::new("nope")), Err(VerifyError::UnknownSuite(_))));
        let bad = SuiteConfig::new("metric-bounds").with_trials(0);
        assert!(matches!(run_suite(&bad), Err(VerifyError::InvalidConfig(_))));
        let bad = SuiteConfig::new("metric-bounds").with_tolerance("bound", -1.0);
        assert!(matches!(run_suite(&bad), Err(VerifyError::InvalidConfig(_))));
        let bad = SuiteConfig::new("metric-bounds").with_tolerance("nonsense", 1.0);
        assert!(matches!(run_suite(&bad), Err(VerifyError::InvalidConfig(_))));
        let mut bad = SuiteConfig::new("metric-bounds");
        bad.dims.p = Some(10);
        assert!(matches!(run_suite(&bad), Err(VerifyError::InvalidConfig(_))));
        let mut bad = SuiteConfig::new("flat-quotient");
        bad.dims.k = Some(5);
        assert!(matches!(run_suite(&bad), Err(VerifyError::InvalidConfig(_))));
        let mut bad = SuiteConfig::new("orbit-divergence");
        bad.dims.window_radius = Some(1);
        assert!(matches!(run_suite(&bad), Err(VerifyError::InvalidConfig(_))));
    }

    fn always_fails(_: &ResolvedConfig) -> crate::Result<SuiteOutcome> {
        Err(GeomError::NonConvergence {
            iterations: 3,
            residual: 1.0,
            best_length: 2.0,
        })
    }

    #[test]
    fn solver_failure_still_produces_a_report() {
        let info = SuiteInfo {
            name: "broken",
            anchor: "test fixture",
            dims: &[],
            trials: 1,
            tolerances: &[],
            run: always_fails,
        };
        let resolved = resolve(&info, &SuiteConfig::new("broken")).unwrap();
        let report = run_resolved(&info, resolved);
        assert_eq!(report.exit_code(), 3);
        assert!(!report.passed && report.error.is_some() && report.witness.is_some());
    }

    #[test]
    fn reports_are_deterministic() {
        let config = SuiteConfig::new("metric-bounds").with_trials(200).with_seed(7);
        let a = run_suite(&config).unwrap();
        let b = run_suite(&config).unwrap();
        assert!(a.passed);
        assert_eq!(a.canonical_json(), b.canonical_json());
        let c = run_suite(&config.clone().with_seed(8)).unwrap();
        assert_ne!(a.canonical_json(), c.canonical_json());
    }

    #[test]
    fn failing_report_carries_witness() {
        let config = SuiteConfig::new("metric-bounds")
            .with_trials(50)
            .with_tolerance("identity", 1e-300);
        let r = run_suite(&config).unwrap();
        if !r.passed {
            assert!(r.witness.is_some());
            assert_eq!(r.exit_code(), 1);
        }
        let strict = SuiteConfig::new("geodesic-crossval")
            .with_trials(5)
            .with_tolerance("crossval", 1e-300);
        let r = run_suite(&strict).unwrap();
        assert!(!r.passed);
        let w = r.witness.unwrap();
        assert!(w.check_id.ends_with("gap"));
        assert!(w.inputs.get("frame").is_some());
    }
}

//! Parameter sweeps over a configuration template.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::commands::run_experiment;
use crate::config::ExperimentConfig;
use crate::failure::Failure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Experiment template.
    pub base: Value,
    /// JSON pointer into `base` (e.g. `/graph/n`) mapped to the values it takes.
    pub vary: BTreeMap<String, Vec<Value>>,
    /// Seeds per grid point; replicate `r` uses `seed + r`.
    #[serde(default = "one")]
    pub replicates: u64,
}

fn one() -> u64 {
    1
}

/// One grid point with one seed.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub index: usize,
    pub params: Vec<Value>,
    pub seed: u64,
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        let c: Self = serde_json::from_str(text).map_err(|e| Failure::config(format!("invalid sweep config: {e}")))?;
        if c.vary.is_empty() || c.vary.values().any(Vec::is_empty) || c.replicates == 0 {
            return Err(Failure::config("sweep grid is empty"));
        }
        Ok(c)
    }

    /// Cartesian product of the grid in key order, replicates innermost.
    pub fn runs(&self, seed: u64) -> Vec<RunSpec> {
        let mut points: Vec<Vec<Value>> = vec![vec![]];
        for values in self.vary.values() {
            points = points.into_iter().flat_map(|p| values.iter().map(move |v| [p.clone(), vec![v.clone()]].concat())).collect();
        }
        let mut out = Vec::new();
        for p in points {
            for r in 0..self.replicates {
                out.push(RunSpec { index: out.len(), params: p.clone(), seed: seed.wrapping_add(r) });
            }
        }
        out
    }

    /// The template with one grid point substituted.
    pub fn instantiate(&self, run: &RunSpec) -> Result<ExperimentConfig, Failure> {
        let mut v = self.base.clone();
        for (path, value) in self.vary.keys().zip(&run.params) {
            set_pointer(&mut v, path, value.clone())?;
        }
        set_pointer(&mut v, "/seed", Value::from(run.seed))?;
        serde_json::from_value(v).map_err(|e| Failure::config(format!("invalid sweep instance: {e}")))
    }

    pub fn base_seed(&self) -> u64 {
        self.base.get("seed").and_then(Value::as_u64).unwrap_or(0)
    }
}

/// Sets the value at a JSON pointer, creating the last key if it is missing.
fn set_pointer(v: &mut Value, path: &str, value: Value) -> Result<(), Failure> {
    let (parent, key) = path.rsplit_once('/').ok_or_else(|| Failure::config(format!("`{path}` is not a JSON pointer")))?;
    let target = if parent.is_empty() { Some(&mut *v) } else { v.pointer_mut(parent) };
    match target {
        Some(Value::Object(map)) => {
            map.insert(key.replace("~1", "/").replace("~0", "~"), value);
            Ok(())
        }
        Some(Value::Array(items)) => {
            let slot = key.parse::<usize>().ok().and_then(|i| items.get_mut(i));
            let slot = slot.ok_or_else(|| Failure::config(format!("`{path}` is not an array element")))?;
            *slot = value;
            Ok(())
        }
        _ => Err(Failure::config(format!("`{path}` does not name a location in the template"))),
    }
}

const COLUMNS: [&str; 13] = [
    "seed",
    "status",
    "outcome",
    "n_agents",
    "initial_potential",
    "final_potential",
    "final_grad_norm",
    "steps",
    "winding_start",
    "winding_end",
    "winding_conserved",
    "threshold_pass",
    "error",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// Strings unquoted, everything else as JSON.
fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn row(sweep: &SweepConfig, run: &RunSpec) -> Vec<String> {
    let mut r: Vec<String> = std::iter::once(run.index.to_string()).chain(run.params.iter().map(cell)).collect();
    r.push(run.seed.to_string());
    let result = sweep.instantiate(run).and_then(|cfg| run_experiment(&cfg).map_err(Failure::from));
    match result {
        Ok(res) => {
            let s = res.summary;
            r.extend([
                "ok".to_string(),
                s.outcome.kind.to_string(),
                s.n_agents.to_string(),
                format!("{:.17e}", s.initial_potential),
                format!("{:.17e}", s.final_potential),
                format!("{:.17e}", s.final_grad_norm),
                s.steps.to_string(),
                opt(s.winding_start),
                opt(s.winding_end),
                opt(s.winding_conserved),
                opt(s.threshold.map(|t| t.pass)),
                String::new(),
            ]);
        }
        Err(e) => {
            log::warn!("sweep run {} failed: {e}", run.index);
            r.push("failed".to_string());
            r.extend(std::iter::repeat_n(String::new(), COLUMNS.len() - 3));
            r.push(e.message);
        }
    }
    r
}

/// Runs every grid point on up to `jobs` threads and writes one CSV row per
/// run, in run order. Returns the number of failed runs.
pub fn sweep(sweep: &SweepConfig, seed: u64, jobs: usize, out: &Path) -> Result<usize, Failure> {
    let runs = sweep.runs(seed);
    let rows: Mutex<Vec<Option<Vec<String>>>> = Mutex::new(vec![None; runs.len()]);
    let next = AtomicUsize::new(0);
    let workers = jobs.clamp(1, runs.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(run) = runs.get(i) else { break };
                let r = row(sweep, run);
                rows.lock().expect("no worker panics while holding the lock")[i] = Some(r);
            });
        }
    });
    std::fs::create_dir_all(out)?;
    let mut w = csv::Writer::from_path(out.join("sweep.csv"))?;
    let header: Vec<String> = std::iter::once("run".to_string())
        .chain(sweep.vary.keys().cloned())
        .chain(COLUMNS.iter().map(|c| c.to_string()))
        .collect();
    w.write_record(&header)?;
    let mut failed = 0;
    for r in rows.into_inner().expect("workers finished").into_iter().flatten() {
        if r[header.len() - COLUMNS.len() + 1] == "failed" {
            failed += 1;
        }
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(failed)
}

//! Timing runs over generated instance sets.

use std::fmt::Write as _;

use anyhow::{Context, Result};
use sag_core::gen::{generate_instance, Deadlines, GenSpec, Priorities};
use sag_core::sag::{generate, AnalysisOptions, Mode};
use sag_core::{AnalysisError, PolicyKind, ProblemInstance, Time};
use serde::{Deserialize, Serialize};

pub const CSV_HEADER: &str = "instance,jobs,policy,mode,vertices,arcs,wall_ms,verdict";

/// One generated instance and the configurations to time on it.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchEntry {
    pub spec: GenSpec,
    pub policies: Vec<PolicyKind>,
    pub modes: Vec<Mode>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSpec {
    pub entries: Vec<BenchEntry>,
    /// Timings per configuration; the median is reported.
    pub repetitions: u32,
}

/// On-disk form: each entry expands to one instance per seed.
///
/// ```json
/// {"repetitions": 3, "entries": [
///   {"tasks": 5, "utilization": 0.3, "rj": 0.3, "rc": 0.3,
///    "seeds": [1, 2, 3], "policies": ["edf"], "modes": ["me", "se"]}
/// ]}
/// ```
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    #[serde(default = "default_repetitions")]
    repetitions: u32,
    #[serde(default)]
    entries: Vec<FileEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileEntry {
    tasks: usize,
    utilization: f64,
    rj: f64,
    rc: f64,
    #[serde(default)]
    periods: Option<Vec<Time>>,
    #[serde(default)]
    priorities: Priorities,
    #[serde(default)]
    deadlines: Deadlines,
    seeds: Vec<u64>,
    #[serde(default = "default_policies")]
    policies: Vec<PolicyKind>,
    #[serde(default = "default_modes")]
    modes: Vec<Mode>,
}

fn default_repetitions() -> u32 {
    3
}

fn default_policies() -> Vec<PolicyKind> {
    vec![PolicyKind::Edf]
}

fn default_modes() -> Vec<Mode> {
    vec![Mode::Me]
}

impl BenchSpec {
    /// Parses a spec file. Blank input is the empty spec.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Ok(Self {
                entries: Vec::new(),
                repetitions: default_repetitions(),
            });
        }
        let file: SpecFile = serde_json::from_str(text).context("invalid bench spec")?;
        anyhow::ensure!(file.repetitions > 0, "repetitions must be at least 1");
        let mut entries = Vec::new();
        for e in file.entries {
            for &seed in &e.seeds {
                let mut spec = GenSpec::new(e.tasks, e.utilization, e.rj, e.rc, seed);
                if let Some(p) = &e.periods {
                    spec.periods = p.clone();
                }
                spec.priorities = e.priorities;
                spec.deadlines = e.deadlines;
                entries.push(BenchEntry {
                    spec,
                    policies: e.policies.clone(),
                    modes: e.modes.clone(),
                });
            }
        }
        Ok(Self {
            entries,
            repetitions: file.repetitions,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub instance: String,
    pub jobs: usize,
    pub policy: PolicyKind,
    pub mode: Mode,
    pub vertices: usize,
    pub arcs: usize,
    pub wall_ms: f64,
    pub verdict: &'static str,
}

pub fn instance_name(spec: &GenSpec) -> String {
    format!(
        "n{}-u{}-rj{}-rc{}-s{}",
        spec.tasks, spec.utilization, spec.rj, spec.rc, spec.seed
    )
}

fn measure(name: &str, instance: &ProblemInstance, policy: PolicyKind, mode: Mode, repetitions: u32) -> BenchRow {
    let mut times = Vec::with_capacity(repetitions as usize);
    let mut row = BenchRow {
        instance: name.to_string(),
        jobs: instance.job_count(),
        policy,
        mode,
        vertices: 0,
        arcs: 0,
        wall_ms: 0.0,
        verdict: "",
    };
    for _ in 0..repetitions {
        match generate(instance, policy, AnalysisOptions::with_mode(mode)) {
            Ok((graph, result)) => {
                times.push(result.stats.wall_ms);
                row.vertices = graph.vertex_count();
                row.arcs = graph.arcs().len();
                row.verdict = if result.schedulable {
                    "schedulable"
                } else {
                    "unschedulable"
                };
            }
            Err(AnalysisError::Stuck { .. }) => {
                row.verdict = "stuck";
                break;
            }
        }
    }
    times.sort_by(f64::total_cmp);
    row.wall_ms = times.get(times.len() / 2).copied().unwrap_or(0.0);
    row
}

/// Generates every instance and times every configuration. Rows follow the
/// spec order regardless of `jobs`.
pub fn run_bench(spec: &BenchSpec, jobs: usize) -> Result<Vec<BenchRow>> {
    let mut work = Vec::new();
    for entry in &spec.entries {
        let instance =
            generate_instance(&entry.spec).with_context(|| format!("generating {}", instance_name(&entry.spec)))?;
        let name = instance_name(&entry.spec);
        for &policy in &entry.policies {
            for &mode in &entry.modes {
                work.push((name.clone(), instance.clone(), policy, mode));
            }
        }
    }
    let run = |w: &(String, ProblemInstance, PolicyKind, Mode)| measure(&w.0, &w.1, w.2, w.3, spec.repetitions);
    Ok(crate::map_ordered(&work, jobs, run))
}

pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{:.3},{}",
            r.instance, r.jobs, r.policy, r.mode, r.vertices, r.arcs, r.wall_ms, r.verdict
        );
    }
    out
}

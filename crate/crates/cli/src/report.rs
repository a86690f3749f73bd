//! Text and JSON renderings of analysis, simulation and oracle results.

use std::fmt::Write as _;

use sag_core::oracle::{OracleReport, SimulationTrace};
use sag_core::sag::{AnalysisResult, LevelStats};
use sag_core::{JobId, PolicyKind, ProblemInstance, Time};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct JobRef {
    pub task: u32,
    pub job: u32,
}

impl JobRef {
    pub fn new(instance: &ProblemInstance, id: JobId) -> Self {
        let j = instance.job(id);
        Self {
            task: j.task_id,
            job: j.index,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct WitnessJson {
    pub vertex: u32,
    pub task: u32,
    pub job: u32,
    pub lft: Time,
    pub deadline: Time,
}

#[derive(Debug, Serialize)]
pub struct BoundJson {
    pub task: u32,
    pub job: u32,
    pub eft_min: Time,
    pub lft_max: Time,
}

#[derive(Debug, Serialize)]
pub struct StatsJson {
    pub levels: Vec<LevelStats>,
    pub vertices: usize,
    pub arcs: usize,
    pub wall_ms: f64,
}

#[derive(Debug, Serialize)]
pub struct AnalysisJson {
    pub policy: PolicyKind,
    pub mode: sag_core::Mode,
    pub schedulable: bool,
    pub witness: Option<WitnessJson>,
    pub misses: Vec<WitnessJson>,
    pub bounds_complete: bool,
    pub bounds: Vec<BoundJson>,
    pub stats: StatsJson,
}

pub fn analysis_json(instance: &ProblemInstance, r: &AnalysisResult) -> AnalysisJson {
    let witness = |w: &sag_core::sag::MissWitness| {
        let j = JobRef::new(instance, w.job);
        WitnessJson {
            vertex: w.vertex.0,
            task: j.task,
            job: j.job,
            lft: w.lft,
            deadline: w.deadline,
        }
    };
    AnalysisJson {
        policy: r.policy,
        mode: r.mode,
        schedulable: r.schedulable,
        witness: r.witness.as_ref().map(witness),
        misses: r.misses.iter().map(witness).collect(),
        bounds_complete: r.bounds_complete,
        bounds: instance
            .job_ids()
            .filter_map(|id| {
                let b = r.bounds[id.0]?;
                let j = JobRef::new(instance, id);
                Some(BoundJson {
                    task: j.task,
                    job: j.job,
                    eft_min: b.eft_min,
                    lft_max: b.lft_max,
                })
            })
            .collect(),
        stats: StatsJson {
            levels: r.stats.levels.clone(),
            vertices: r.stats.vertices(),
            arcs: r.stats.arcs(),
            wall_ms: r.stats.wall_ms,
        },
    }
}

pub fn analysis_text(instance: &ProblemInstance, r: &AnalysisResult) -> String {
    let mut out = String::new();
    let verdict = if r.schedulable {
        "schedulable"
    } else {
        "NOT schedulable"
    };
    let _ = writeln!(out, "policy {}, mode {}: {verdict}", r.policy, r.mode);
    for w in &r.misses {
        let _ = writeln!(
            out,
            "deadline miss: {} may finish at {} > deadline {} (vertex v{})",
            instance.job(w.job),
            w.lft,
            w.deadline,
            w.vertex.0
        );
    }
    let _ = writeln!(
        out,
        "{} levels, {} vertices, {} arcs, {:.3} ms",
        r.stats.levels.len(),
        r.stats.vertices(),
        r.stats.arcs(),
        r.stats.wall_ms
    );
    if !r.bounds_complete {
        out.push_str("generation stopped at the first miss; bounds below are partial\n");
    }
    let _ = writeln!(out, "{:<10} {:>8} {:>8} {:>8}", "job", "eft_min", "lft_max", "deadline");
    for id in instance.job_ids() {
        let j = instance.job(id);
        match r.bounds[id.0] {
            Some(b) => {
                let _ = writeln!(
                    out,
                    "{:<10} {:>8} {:>8} {:>8}",
                    j.to_string(),
                    b.eft_min,
                    b.lft_max,
                    j.deadline
                );
            }
            None => {
                let _ = writeln!(out, "{:<10} {:>8} {:>8} {:>8}", j.to_string(), "-", "-", j.deadline);
            }
        }
    }
    out
}

#[derive(Debug, Serialize)]
pub struct DispatchJson {
    pub task: u32,
    pub job: u32,
    pub start: Time,
    pub finish: Time,
    pub deadline: Time,
    pub missed: bool,
}

#[derive(Debug, Serialize)]
pub struct TraceJson {
    pub policy: PolicyKind,
    pub misses: usize,
    pub dispatches: Vec<DispatchJson>,
    pub idle: Vec<(Time, Time)>,
}

pub fn trace_json(instance: &ProblemInstance, kind: PolicyKind, t: &SimulationTrace) -> TraceJson {
    TraceJson {
        policy: kind,
        misses: t.misses.len(),
        dispatches: t
            .dispatches
            .iter()
            .map(|d| {
                let j = JobRef::new(instance, d.job);
                DispatchJson {
                    task: j.task,
                    job: j.job,
                    start: d.start,
                    finish: d.finish,
                    deadline: instance.job(d.job).deadline,
                    missed: t.misses.contains(&d.job),
                }
            })
            .collect(),
        idle: t.idle.clone(),
    }
}

pub fn trace_text(instance: &ProblemInstance, kind: PolicyKind, t: &SimulationTrace) -> String {
    let mut out = format!("policy {kind}: {} deadline misses\n", t.misses.len());
    for d in &t.dispatches {
        let j = instance.job(d.job);
        let flag = if t.misses.contains(&d.job) { "  MISS" } else { "" };
        let _ = writeln!(
            out,
            "{:<10} start {:>5} finish {:>5} deadline {:>5}{flag}",
            j.to_string(),
            d.start,
            d.finish,
            j.deadline
        );
    }
    for (a, b) in &t.idle {
        let _ = writeln!(out, "idle [{a}, {b})");
    }
    out
}

#[derive(Debug, Serialize)]
pub struct FinishJson {
    pub task: u32,
    pub job: u32,
    pub min: Time,
    pub max: Time,
}

#[derive(Debug, Serialize)]
pub struct FailingJson {
    pub index: String,
    pub releases: Vec<Time>,
    pub executions: Vec<Time>,
    pub trace: TraceJson,
}

#[derive(Debug, Serialize)]
pub struct OracleJson {
    pub policy: PolicyKind,
    pub schedulable: bool,
    /// Decimal strings: the counts may exceed what JSON numbers hold exactly.
    pub total_scenarios: String,
    pub scenarios_checked: String,
    pub finish: Vec<FinishJson>,
    pub failing: Option<FailingJson>,
}

pub fn oracle_json(instance: &ProblemInstance, r: &OracleReport) -> OracleJson {
    OracleJson {
        policy: r.policy,
        schedulable: r.schedulable,
        total_scenarios: r.total_scenarios.to_string(),
        scenarios_checked: r.scenarios_checked.to_string(),
        finish: instance
            .job_ids()
            .filter(|_| r.scenarios_checked > 0)
            .map(|id| {
                let j = JobRef::new(instance, id);
                FinishJson {
                    task: j.task,
                    job: j.job,
                    min: r.finish[id.0].min,
                    max: r.finish[id.0].max,
                }
            })
            .collect(),
        failing: r.failing.as_ref().map(|f| FailingJson {
            index: f.index.to_string(),
            releases: f.scenario.release.clone(),
            executions: f.scenario.execution.clone(),
            trace: trace_json(instance, r.policy, &f.trace),
        }),
    }
}

pub fn oracle_text(instance: &ProblemInstance, r: &OracleReport) -> String {
    let mut out = String::new();
    let verdict = if r.schedulable {
        "schedulable"
    } else {
        "NOT schedulable"
    };
    let _ = writeln!(
        out,
        "policy {}: {verdict} ({} of {} scenarios checked)",
        r.policy, r.scenarios_checked, r.total_scenarios
    );
    if let Some(f) = &r.failing {
        let _ = writeln!(out, "first failing scenario #{}:", f.index);
        out.push_str(&sag_core::format::write_scenario(&f.scenario, instance));
        out.push_str(&trace_text(instance, r.policy, &f.trace));
    }
    if r.scenarios_checked > 0 {
        let _ = writeln!(out, "{:<10} {:>8} {:>8}", "job", "min", "max");
        for id in instance.job_ids() {
            let f = r.finish[id.0];
            let _ = writeln!(out, "{:<10} {:>8} {:>8}", instance.job(id).to_string(), f.min, f.max);
        }
    }
    out
}

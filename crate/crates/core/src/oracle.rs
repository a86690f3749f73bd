//! Exhaustive simulation of every execution scenario, used as ground truth.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::OracleError;
use crate::model::{ExecutionScenario, JobId, ProblemInstance, Time};
use crate::policy::{critical_context, pick_with, PolicyKind};

/// Default cap on the number of scenarios [`enumerate`] accepts.
pub const DEFAULT_MAX_SCENARIOS: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dispatch {
    pub job: JobId,
    pub start: Time,
    pub finish: Time,
}

/// Everything that happened in one simulated scenario.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationTrace {
    /// Dispatches in time order.
    pub dispatches: Vec<Dispatch>,
    /// Half-open intervals `[from, to)` during which the processor idled.
    pub idle: Vec<(Time, Time)>,
    /// Jobs that finished after their deadline, in dispatch order. Missing
    /// jobs still run to completion.
    pub misses: Vec<JobId>,
}

impl SimulationTrace {
    pub fn finish_of(&self, job: JobId) -> Option<Time> {
        self.dispatches.iter().find(|d| d.job == job).map(|d| d.finish)
    }
}

/// Simulates the policy on one concrete scenario.
pub fn simulate(
    instance: &ProblemInstance,
    kind: PolicyKind,
    scenario: &ExecutionScenario,
) -> Result<SimulationTrace, OracleError> {
    scenario.validate(instance)?;
    let mut sim = Simulator::new(instance, kind);
    let mut trace = SimulationTrace::default();
    sim.run(&scenario.release, &scenario.execution, Some(&mut trace))?;
    Ok(trace)
}

/// Reusable simulation state. `finish` holds the finish time of every job
/// after [`Simulator::run`].
struct Simulator<'a> {
    instance: &'a ProblemInstance,
    kind: PolicyKind,
    next: Vec<usize>,
    applicable: Vec<JobId>,
    finish: Vec<Time>,
}

impl<'a> Simulator<'a> {
    fn new(instance: &'a ProblemInstance, kind: PolicyKind) -> Self {
        Self {
            instance,
            kind,
            next: Vec::with_capacity(instance.tasks().len()),
            applicable: Vec::with_capacity(instance.tasks().len()),
            finish: vec![0; instance.job_count()],
        }
    }

    /// Returns whether some job missed its deadline.
    fn run(
        &mut self,
        release: &[Time],
        execution: &[Time],
        mut trace: Option<&mut SimulationTrace>,
    ) -> Result<bool, OracleError> {
        let instance = self.instance;
        let ranges = instance.task_ranges();
        self.next.clear();
        self.next.extend(ranges.iter().map(|r| r.start));
        let mut missed = false;
        let mut t: Time = 0;

        loop {
            self.applicable.clear();
            for (k, r) in ranges.iter().enumerate() {
                if self.next[k] < r.end {
                    self.applicable.push(JobId(self.next[k]));
                }
            }
            if self.applicable.is_empty() {
                return Ok(missed);
            }
            let critical = critical_context(self.kind, instance, &self.applicable);
            match pick_with(self.kind, instance, t, &self.applicable, release, critical.as_ref()) {
                Some(id) => {
                    let finish = t + execution[id.0];
                    let late = finish > instance.job(id).deadline;
                    missed |= late;
                    self.finish[id.0] = finish;
                    if let Some(tr) = trace.as_deref_mut() {
                        tr.dispatches.push(Dispatch {
                            job: id,
                            start: t,
                            finish,
                        });
                        if late {
                            tr.misses.push(id);
                        }
                    }
                    let k = ranges.partition_point(|r| r.end <= id.0);
                    self.next[k] += 1;
                    t = finish;
                }
                None => {
                    // Without a new release the eligible set can only shrink.
                    let wake = self
                        .applicable
                        .iter()
                        .map(|id| release[id.0])
                        .filter(|&r| r > t)
                        .min()
                        .ok_or(OracleError::Stuck {
                            time: t,
                            pending: self.applicable.len(),
                        })?;
                    if let Some(tr) = trace.as_deref_mut() {
                        tr.idle.push((t, wake));
                    }
                    t = wake;
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerateOptions {
    pub max_scenarios: u128,
    pub stop_at_first_miss: bool,
    pub parallel: bool,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        Self {
            max_scenarios: DEFAULT_MAX_SCENARIOS,
            stop_at_first_miss: true,
            parallel: true,
        }
    }
}

/// Smallest and largest finish time of a job over the checked scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinishRange {
    pub min: Time,
    pub max: Time,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailingScenario {
    /// Position in enumeration order.
    pub index: u128,
    pub scenario: ExecutionScenario,
    pub trace: SimulationTrace,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleReport {
    pub policy: PolicyKind,
    pub schedulable: bool,
    pub total_scenarios: u128,
    pub scenarios_checked: u128,
    /// Indexed by job id.
    pub finish: Vec<FinishRange>,
    /// First failing scenario in enumeration order.
    pub failing: Option<FailingScenario>,
}

/// Number of distinct scenarios, saturating at `u128::MAX`.
pub fn scenario_count(instance: &ProblemInstance) -> u128 {
    instance
        .jobs()
        .iter()
        .map(|j| (j.r_max - j.r_min + 1) as u128 * (j.c_max - j.c_min + 1) as u128)
        .fold(1u128, |acc, k| acc.saturating_mul(k))
}

/// The scenario at position `index` of the enumeration order. Jobs vary
/// in (task, job) order, release before execution time, the last digit
/// varying fastest.
pub fn scenario_at(instance: &ProblemInstance, mut index: u128) -> ExecutionScenario {
    let mut s = ExecutionScenario::worst_case(instance);
    for (i, j) in instance.jobs().iter().enumerate().rev() {
        let ce = (j.c_max - j.c_min + 1) as u128;
        s.execution[i] = j.c_min + (index % ce) as Time;
        index /= ce;
        let re = (j.r_max - j.r_min + 1) as u128;
        s.release[i] = j.r_min + (index % re) as Time;
        index /= re;
    }
    s
}

/// Advances `s` to the next scenario in enumeration order.
fn advance(instance: &ProblemInstance, s: &mut ExecutionScenario) {
    for (i, j) in instance.jobs().iter().enumerate().rev() {
        if s.execution[i] < j.c_max {
            s.execution[i] += 1;
            return;
        }
        s.execution[i] = j.c_min;
        if s.release[i] < j.r_max {
            s.release[i] += 1;
            return;
        }
        s.release[i] = j.r_min;
    }
}

/// Result of one contiguous block of scenarios.
struct Block {
    checked: u128,
    finish: Vec<FinishRange>,
    first_miss: Option<u128>,
}

fn run_block(
    instance: &ProblemInstance,
    kind: PolicyKind,
    from: u128,
    to: u128,
    stop_at_first_miss: bool,
) -> Result<Block, OracleError> {
    let mut sim = Simulator::new(instance, kind);
    let mut s = scenario_at(instance, from);
    let mut finish = vec![FinishRange { min: Time::MAX, max: 0 }; instance.job_count()];
    let mut first_miss = None;
    let mut checked = 0;
    for index in from..to {
        let missed = sim.run(&s.release, &s.execution, None)?;
        checked += 1;
        for (r, &f) in finish.iter_mut().zip(&sim.finish) {
            r.min = r.min.min(f);
            r.max = r.max.max(f);
        }
        if missed && first_miss.is_none() {
            first_miss = Some(index);
            if stop_at_first_miss {
                break;
            }
        }
        advance(instance, &mut s);
    }
    Ok(Block {
        checked,
        finish,
        first_miss,
    })
}

const BLOCK: u128 = 4096;

/// Simulates every scenario (or up to the first miss) and aggregates the
/// outcome. The result does not depend on `parallel`.
pub fn enumerate(
    instance: &ProblemInstance,
    kind: PolicyKind,
    options: EnumerateOptions,
) -> Result<OracleReport, OracleError> {
    let total = scenario_count(instance);
    if total > options.max_scenarios {
        return Err(OracleError::TooManyScenarios {
            count: total,
            cap: options.max_scenarios,
        });
    }
    let blocks = total.div_ceil(BLOCK);
    let wave = if options.parallel { wave_size() } else { 1 };

    let mut finish = vec![FinishRange { min: Time::MAX, max: 0 }; instance.job_count()];
    let mut checked = 0;
    let mut first_miss = None;
    let mut b = 0;
    while b < blocks {
        let end = (b + wave).min(blocks);
        let run = |k: u128| {
            run_block(
                instance,
                kind,
                k * BLOCK,
                ((k + 1) * BLOCK).min(total),
                options.stop_at_first_miss,
            )
        };
        let results: Vec<Result<Block, OracleError>> = map_blocks(b..end, options.parallel, run);
        for r in results {
            let block = r?;
            checked += block.checked;
            for (acc, r) in finish.iter_mut().zip(&block.finish) {
                acc.min = acc.min.min(r.min);
                acc.max = acc.max.max(r.max);
            }
            if first_miss.is_none() {
                first_miss = block.first_miss;
            }
            if first_miss.is_some() && options.stop_at_first_miss {
                break;
            }
        }
        if first_miss.is_some() && options.stop_at_first_miss {
            break;
        }
        b = end;
    }

    let failing = match first_miss {
        Some(index) => {
            let scenario = scenario_at(instance, index);
            let trace = simulate(instance, kind, &scenario)?;
            Some(FailingScenario { index, scenario, trace })
        }
        None => None,
    };
    Ok(OracleReport {
        policy: kind,
        schedulable: failing.is_none(),
        total_scenarios: total,
        scenarios_checked: checked,
        finish,
        failing,
    })
}

#[cfg(feature = "parallel")]
fn wave_size() -> u128 {
    4 * rayon::current_num_threads() as u128
}

#[cfg(not(feature = "parallel"))]
fn wave_size() -> u128 {
    1
}

#[cfg(feature = "parallel")]
fn map_blocks<T: Send>(range: std::ops::Range<u128>, parallel: bool, f: impl Fn(u128) -> T + Sync + Send) -> Vec<T> {
    if parallel {
        let ks: Vec<u128> = range.collect();
        ks.into_par_iter().map(f).collect()
    } else {
        range.map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
fn map_blocks<T>(range: std::ops::Range<u128>, _parallel: bool, f: impl Fn(u128) -> T) -> Vec<T> {
    range.map(f).collect()
}

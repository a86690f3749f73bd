//! Vertex expansion: which job may be dispatched next, and when.

use serde::{Deserialize, Serialize};

use super::eligibility::EligibilityContext;
use crate::model::{JobId, Time, TIME_LIMIT};

/// Eligibility semantics used during expansion.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// A job may become eligible several times within one vertex.
    #[default]
    Me,
    /// A job is only considered at `max(eft, rmin)` and contributes at most
    /// one arc per vertex.
    Se,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "me" => Ok(Mode::Me),
            "se" => Ok(Mode::Se),
            _ => Err(format!("unknown mode {s:?} (expected me or se)")),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Me => "me",
            Mode::Se => "se",
        })
    }
}

/// One dispatch decision out of a vertex: `job` starts somewhere in
/// `[est, lst]` and the processor becomes free again in `[eft, lft]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Expansion {
    pub job: JobId,
    pub est: Time,
    pub lst: Time,
    pub eft: Time,
    pub lft: Time,
}

/// Finish-time window of `job` started within `[est, lst]`.
pub fn expand(ctx: &EligibilityContext<'_>, job: JobId, est: Time, lst: Time) -> Expansion {
    debug_assert!(est <= lst);
    let j = ctx.instance().job(job);
    Expansion {
        job,
        est,
        lst,
        eft: est + j.c_min,
        lft: lst + j.c_max,
    }
}

/// No job can be dispatched next from this vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoEligibleJob;

/// Expansions of a vertex, visiting only the times at which the eligible
/// set can change.
pub fn next_nodes(ctx: &EligibilityContext<'_>, mode: Mode) -> Result<Vec<Expansion>, NoEligibleJob> {
    next_nodes_impl(ctx, mode, Probe::Boundaries)
}

/// Same result as [`next_nodes`], probing every integer time of the
/// exploration interval.
pub fn next_nodes_naive(ctx: &EligibilityContext<'_>, mode: Mode) -> Result<Vec<Expansion>, NoEligibleJob> {
    next_nodes_impl(ctx, mode, Probe::EveryTime)
}

#[derive(Clone, Copy)]
enum Probe {
    Boundaries,
    EveryTime,
}

fn next_nodes_impl(ctx: &EligibilityContext<'_>, mode: Mode, probe: Probe) -> Result<Vec<Expansion>, NoEligibleJob> {
    if ctx.applicable().is_empty() {
        return Ok(Vec::new());
    }
    let bound = match mode {
        Mode::Me => ctx.exploration_bound(),
        Mode::Se => single_eligibility_bound(ctx),
    }
    .ok_or(NoEligibleJob)?;

    let runs = match probe {
        Probe::Boundaries => eligibility_runs(ctx, ctx.boundary_times(ctx.eft(), bound), bound),
        Probe::EveryTime => eligibility_runs(ctx, ctx.eft()..=bound, bound),
    };

    let mut out: Vec<Expansion> = runs
        .into_iter()
        .filter(|&(job, est, _)| match mode {
            Mode::Me => true,
            Mode::Se => est == first_probe_time(ctx, job),
        })
        .map(|(job, est, lst)| expand(ctx, job, est, lst))
        .collect();
    out.sort_unstable();

    if ctx.kind().is_work_conserving() {
        debug_assert!(
            out.windows(2).all(|w| w[0].job != w[1].job),
            "work-conserving policy produced several ranges for one job"
        );
        debug_assert!(
            out.iter().all(|e| e.est == first_probe_time(ctx, e.job)),
            "work-conserving range does not start at max(eft, rmin)"
        );
    }
    Ok(out)
}

/// `max(eft, rmin)`: the only time single eligibility looks at a job.
fn first_probe_time(ctx: &EligibilityContext<'_>, job: JobId) -> Time {
    ctx.eft().max(ctx.instance().job(job).r_min)
}

/// Collects maximal eligibility runs `(job, start, end)` given the ascending
/// probe times at which the eligible set may change, up to `end`.
fn eligibility_runs(
    ctx: &EligibilityContext<'_>,
    probes: impl IntoIterator<Item = Time>,
    end: Time,
) -> Vec<(JobId, Time, Time)> {
    let applicable = ctx.applicable();
    let mut open: Vec<Option<Time>> = vec![None; applicable.len()];
    let mut eligible = Vec::with_capacity(applicable.len());
    let mut runs = Vec::new();

    for t in probes {
        ctx.eligible_into(t, &mut eligible);
        for (pos, &job) in applicable.iter().enumerate() {
            let now = eligible.contains(&job);
            match (open[pos], now) {
                (Some(start), false) => {
                    runs.push((job, start, t - 1));
                    open[pos] = None;
                }
                (None, true) => open[pos] = Some(t),
                _ => {}
            }
        }
    }
    for (pos, start) in open.into_iter().enumerate() {
        if let Some(start) = start {
            runs.push((applicable[pos], start, end));
        }
    }
    runs
}

/// Exploration bound under single eligibility: the first `t >= lft` whose
/// certainly-eligible job has been eligible without interruption since its
/// first probe time.
fn single_eligibility_bound(ctx: &EligibilityContext<'_>) -> Option<Time> {
    let boundaries = ctx.boundary_times(ctx.eft(), TIME_LIMIT);
    let candidates = std::iter::once(ctx.lft()).chain(boundaries.into_iter().filter(|&b| b > ctx.lft()));
    for t in candidates {
        let Some(ce) = ctx.certainly_eligible(t) else {
            continue;
        };
        let first = first_probe_time(ctx, ce);
        if first <= t && ctx.boundary_times(first, t).into_iter().all(|b| ctx.is_eligible(ce, b)) {
            return Some(t);
        }
    }
    None
}

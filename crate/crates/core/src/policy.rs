//! Scheduling policies.
//!
//! A policy maps a time `t` and the set of applicable jobs to the job that
//! the online scheduler dispatches next, or to `None` when it idles. Each
//! policy induces a strict total order on jobs (its "Π-priority") used by
//! the graph analysis; the non-work-conserving policies additionally
//! protect a critical job by refusing to start jobs that could still be
//! running at the critical time.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::{Job, JobId, ProblemInstance, Time};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PolicyKind {
    /// Earliest deadline first.
    #[serde(rename = "edf")]
    Edf,
    /// Fixed priority, ties broken by earliest deadline.
    #[serde(rename = "fp-edf")]
    FpEdf,
    /// FP-EDF that never endangers the earliest-released priority-0 job.
    #[serde(rename = "p-fp-edf")]
    PFpEdf,
    /// Critical point: protects the applicable job with the earliest deadline.
    #[serde(rename = "cp")]
    Cp,
    /// Critical window: protects a latest start time folded over all
    /// applicable jobs.
    #[serde(rename = "cw")]
    Cw,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 5] = [
        PolicyKind::Edf,
        PolicyKind::FpEdf,
        PolicyKind::PFpEdf,
        PolicyKind::Cp,
        PolicyKind::Cw,
    ];

    pub fn is_work_conserving(self) -> bool {
        matches!(self, PolicyKind::Edf | PolicyKind::FpEdf)
    }

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Edf => "edf",
            PolicyKind::FpEdf => "fp-edf",
            PolicyKind::PFpEdf => "p-fp-edf",
            PolicyKind::Cp => "cp",
            PolicyKind::Cw => "cw",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown policy {s:?} (expected edf, fp-edf, p-fp-edf, cp or cw)"))
    }
}

/// Sort key of the Π-priority order; smaller is higher priority.
#[inline]
pub fn priority_key(kind: PolicyKind, job: &Job) -> (u32, Time, u32) {
    match kind {
        PolicyKind::Edf => (0, job.deadline, job.task_id),
        _ => (job.priority, job.deadline, job.task_id),
    }
}

/// Compares two jobs by Π-priority; `Less` means `a` is picked over `b`.
#[inline]
pub fn pi_cmp(kind: PolicyKind, a: &Job, b: &Job) -> Ordering {
    priority_key(kind, a).cmp(&priority_key(kind, b))
}

/// Whether `a` has higher Π-priority than `b`. A job beats no job.
#[inline]
pub fn pi_higher(kind: PolicyKind, a: &Job, b: Option<&Job>) -> bool {
    match b {
        None => true,
        Some(b) => pi_cmp(kind, a, b) == Ordering::Less,
    }
}

/// The job a non-work-conserving policy protects and the latest time it
/// may start without missing its deadline. May be negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriticalContext {
    pub job: JobId,
    pub time: i64,
}

impl CriticalContext {
    /// A job is viable at `t` unless it is not the critical job and could
    /// still be running after the critical time.
    #[inline]
    pub fn admits(&self, id: JobId, job: &Job, t: Time) -> bool {
        id == self.job || (t + job.c_max) as i64 <= self.time
    }
}

/// Viability under an optional critical context.
#[inline]
pub fn is_viable(critical: Option<&CriticalContext>, id: JobId, job: &Job, t: Time) -> bool {
    critical.is_none_or(|c| c.admits(id, job, t))
}

/// Critical job and critical time for the applicable set, if the policy
/// defines one.
pub fn critical_context(kind: PolicyKind, instance: &ProblemInstance, applicable: &[JobId]) -> Option<CriticalContext> {
    let job = |id: &JobId| instance.job(*id);
    match kind {
        PolicyKind::Edf | PolicyKind::FpEdf => None,
        PolicyKind::PFpEdf => applicable
            .iter()
            .filter(|id| job(id).priority == 0)
            .min_by_key(|id| (job(id).r_max, job(id).task_id))
            .map(|&id| CriticalContext {
                job: id,
                time: latest_start(job(&id)),
            }),
        PolicyKind::Cp => applicable
            .iter()
            .min_by_key(|id| (job(id).deadline, job(id).task_id))
            .map(|&id| CriticalContext {
                job: id,
                time: latest_start(job(&id)),
            }),
        PolicyKind::Cw => {
            if applicable.is_empty() {
                return None;
            }
            let mut sorted = applicable.to_vec();
            sorted.sort_by_key(|id| std::cmp::Reverse((job(id).deadline, job(id).task_id)));
            // Every step takes the min with a finite deadline, so the
            // sentinel never survives the fold.
            let time = sorted.iter().fold(i64::MAX, |tc, id| {
                let j = job(id);
                tc.min(j.deadline as i64) - j.c_max as i64
            });
            Some(CriticalContext {
                job: *sorted.last().expect("non-empty"),
                time,
            })
        }
    }
}

fn latest_start(job: &Job) -> i64 {
    job.deadline as i64 - job.c_max as i64
}

/// The online scheduling decision at time `t`.
///
/// `releases` holds the concrete release time of every job, indexed by
/// [`JobId`]; only jobs released by `t` are candidates. Non-work-conserving
/// policies further drop jobs that are not viable.
pub fn pick(
    kind: PolicyKind,
    instance: &ProblemInstance,
    t: Time,
    applicable: &[JobId],
    releases: &[Time],
) -> Option<JobId> {
    let critical = critical_context(kind, instance, applicable);
    pick_with(kind, instance, t, applicable, releases, critical.as_ref())
}

/// [`pick`] with a precomputed critical context.
pub fn pick_with(
    kind: PolicyKind,
    instance: &ProblemInstance,
    t: Time,
    applicable: &[JobId],
    releases: &[Time],
    critical: Option<&CriticalContext>,
) -> Option<JobId> {
    applicable
        .iter()
        .copied()
        .filter(|id| releases[id.0] <= t)
        .filter(|&id| is_viable(critical, id, instance.job(id), t))
        .min_by_key(|&id| priority_key(kind, instance.job(id)))
}

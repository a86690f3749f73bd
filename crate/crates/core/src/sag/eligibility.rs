//! Certainly- and possibly-eligible jobs of a single vertex.

use fixedbitset::FixedBitSet;

use crate::model::{JobId, ProblemInstance, Time};
use crate::policy::{critical_context, is_viable, priority_key, CriticalContext, PolicyKind};

/// First unfinished job of every task.
///
/// # Panics
///
/// If `finished` is not prefix-closed per task, which means the graph
/// construction is broken.
pub fn applicable_jobs(instance: &ProblemInstance, finished: &FixedBitSet) -> Vec<JobId> {
    let mut out = Vec::with_capacity(instance.tasks().len());
    for range in instance.task_ranges() {
        let done = finished.count_ones(range.clone());
        assert!(
            finished.count_ones(range.start..range.start + done) == done,
            "finished set is not prefix-closed for jobs {range:?}"
        );
        if done < range.len() {
            out.push(JobId(range.start + done));
        }
    }
    out
}

/// Everything needed to evaluate the eligibility rules of one vertex.
#[derive(Debug, Clone)]
pub struct EligibilityContext<'a> {
    instance: &'a ProblemInstance,
    kind: PolicyKind,
    eft: Time,
    lft: Time,
    /// Applicable jobs, highest Π-priority first.
    applicable: Vec<JobId>,
    critical: Option<CriticalContext>,
}

impl<'a> EligibilityContext<'a> {
    pub fn new(instance: &'a ProblemInstance, kind: PolicyKind, eft: Time, lft: Time, finished: &FixedBitSet) -> Self {
        Self::with_applicable(instance, kind, eft, lft, applicable_jobs(instance, finished))
    }

    pub fn with_applicable(
        instance: &'a ProblemInstance,
        kind: PolicyKind,
        eft: Time,
        lft: Time,
        mut applicable: Vec<JobId>,
    ) -> Self {
        debug_assert!(eft <= lft);
        applicable.sort_by_key(|&id| priority_key(kind, instance.job(id)));
        let critical = critical_context(kind, instance, &applicable);
        Self {
            instance,
            kind,
            eft,
            lft,
            applicable,
            critical,
        }
    }

    pub fn instance(&self) -> &'a ProblemInstance {
        self.instance
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn eft(&self) -> Time {
        self.eft
    }

    pub fn lft(&self) -> Time {
        self.lft
    }

    /// Applicable jobs in Π-priority order.
    pub fn applicable(&self) -> &[JobId] {
        &self.applicable
    }

    pub fn critical(&self) -> Option<&CriticalContext> {
        self.critical.as_ref()
    }

    #[inline]
    fn viable(&self, id: JobId, t: Time) -> bool {
        is_viable(self.critical.as_ref(), id, self.instance.job(id), t)
    }

    #[inline]
    fn certainly_released_viable(&self, id: JobId, t: Time) -> bool {
        self.instance.job(id).r_max <= t && self.viable(id, t)
    }

    /// The certainly-eligible job at `t`: the highest-priority applicable
    /// job that is certainly released and viable.
    pub fn certainly_eligible(&self, t: Time) -> Option<JobId> {
        let ce = self
            .applicable
            .iter()
            .copied()
            .find(|&id| self.certainly_released_viable(id, t));
        debug_assert!(
            self.certainly_eligible_by_definition(t).len() <= usize::from(ce.is_some()),
            "more than one certainly-eligible job at t={t}"
        );
        ce
    }

    /// Every job satisfying the certainly-eligible definition literally,
    /// checked pairwise against all other applicable jobs. At most one job
    /// can qualify.
    pub fn certainly_eligible_by_definition(&self, t: Time) -> Vec<JobId> {
        let job = |id: JobId| self.instance.job(id);
        self.applicable
            .iter()
            .copied()
            .filter(|&ce| self.certainly_released_viable(ce, t))
            .filter(|&ce| {
                !self.applicable.iter().copied().any(|other| {
                    other != ce
                        && self.certainly_released_viable(other, t)
                        && priority_key(self.kind, job(other)) < priority_key(self.kind, job(ce))
                })
            })
            .collect()
    }

    fn possibly_eligible_given(&self, id: JobId, t: Time, ce: Option<JobId>) -> bool {
        let job = self.instance.job(id);
        job.r_min <= t
            && t < job.r_max
            && self.viable(id, t)
            && ce.is_none_or(|ce| priority_key(self.kind, job) < priority_key(self.kind, self.instance.job(ce)))
    }

    /// Possibly released viable jobs that outrank the certainly-eligible job.
    pub fn possibly_eligible(&self, t: Time) -> Vec<JobId> {
        let ce = self.certainly_eligible(t);
        self.applicable
            .iter()
            .copied()
            .filter(|&id| self.possibly_eligible_given(id, t, ce))
            .collect()
    }

    /// Certainly- and possibly-eligible jobs at `t`, in priority order.
    pub fn eligible_at(&self, t: Time) -> Vec<JobId> {
        let mut out = Vec::new();
        self.eligible_into(t, &mut out);
        out
    }

    pub(crate) fn eligible_into(&self, t: Time, out: &mut Vec<JobId>) {
        out.clear();
        let ce = self.certainly_eligible(t);
        for &id in &self.applicable {
            if Some(id) == ce || self.possibly_eligible_given(id, t, ce) {
                out.push(id);
            }
        }
    }

    pub fn is_eligible(&self, id: JobId, t: Time) -> bool {
        let ce = self.certainly_eligible(t);
        ce == Some(id) || self.possibly_eligible_given(id, t, ce)
    }

    /// Smallest `t >= lft` at which a certainly-eligible job exists, or
    /// `None` if there is none at any time.
    ///
    /// Certain release only switches on at some `rmax` and viability only
    /// switches off as time advances, so `lft` and the later `rmax` values
    /// are the only candidates.
    pub fn exploration_bound(&self) -> Option<Time> {
        if self.applicable.is_empty() {
            return None;
        }
        if self.certainly_eligible(self.lft).is_some() {
            return Some(self.lft);
        }
        let mut candidates: Vec<Time> = self
            .applicable
            .iter()
            .map(|&id| self.instance.job(id).r_max)
            .filter(|&r| r > self.lft)
            .collect();
        candidates.sort_unstable();
        candidates.dedup();
        candidates.into_iter().find(|&t| self.certainly_eligible(t).is_some())
    }

    /// Times in `(from, to]` at which the eligible set may change, plus
    /// `from` itself, ascending. Between two consecutive returned times the
    /// eligible set is constant.
    pub fn boundary_times(&self, from: Time, to: Time) -> Vec<Time> {
        let mut times = vec![from];
        let mut push = |t: Time| {
            if t > from && t <= to {
                times.push(t);
            }
        };
        for &id in &self.applicable {
            let job = self.instance.job(id);
            push(job.r_min);
            push(job.r_max);
            if let Some(c) = &self.critical {
                // First time at which the job stops being viable.
                if id != c.job {
                    let off = c.time - job.c_max as i64 + 1;
                    if off > 0 {
                        push(off as Time);
                    }
                }
            }
        }
        times.sort_unstable();
        times.dedup();
        times
    }

    /// Maximal runs of consecutive times in `[from, to]` at which `id` is
    /// eligible, probing every integer time.
    pub fn eligibility_ranges(&self, id: JobId, from: Time, to: Time) -> Vec<(Time, Time)> {
        to_ranges((from..=to).filter(|&t| self.is_eligible(id, t)))
    }
}

/// Groups an ascending sequence of integers into maximal runs.
pub fn to_ranges(times: impl IntoIterator<Item = Time>) -> Vec<(Time, Time)> {
    let mut out: Vec<(Time, Time)> = Vec::new();
    for t in times {
        match out.last_mut() {
            Some((_, end)) if *end + 1 == t => *end = t,
            _ => out.push((t, t)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{self, task};

    fn set(inst: &ProblemInstance, jobs: &[(u32, u32)]) -> FixedBitSet {
        let mut s = FixedBitSet::with_capacity(inst.job_count());
        for &(t, j) in jobs {
            s.insert(inst.find_job(t, j).unwrap().0);
        }
        s
    }

    fn id(inst: &ProblemInstance, t: u32, j: u32) -> JobId {
        inst.find_job(t, j).unwrap()
    }

    #[test]
    fn applicable_sets() {
        let inst = fixtures::small_edf();
        let none = FixedBitSet::with_capacity(inst.job_count());
        assert_eq!(
            applicable_jobs(&inst, &none),
            vec![id(&inst, 1, 1), id(&inst, 2, 1), id(&inst, 3, 1)]
        );
        assert_eq!(
            applicable_jobs(&inst, &set(&inst, &[(2, 1)])),
            vec![id(&inst, 1, 1), id(&inst, 2, 2), id(&inst, 3, 1)]
        );
        let mut all = none.clone();
        all.insert_range(..);
        assert!(applicable_jobs(&inst, &all).is_empty());
    }

    #[test]
    #[should_panic(expected = "prefix-closed")]
    fn non_prefix_closed_panics() {
        let inst = fixtures::small_edf();
        applicable_jobs(&inst, &set(&inst, &[(2, 2)]));
    }

    #[test]
    fn root_of_small_edf() {
        let inst = fixtures::small_edf();
        let ctx = EligibilityContext::new(&inst, PolicyKind::Edf, 0, 0, &set(&inst, &[]));
        assert_eq!(ctx.certainly_eligible(0), Some(id(&inst, 2, 1)));
        assert!(ctx.possibly_eligible(0).is_empty());
        assert_eq!(ctx.exploration_bound(), Some(0));
    }

    #[test]
    fn small_edf_v1_possibly_eligible() {
        let inst = fixtures::small_edf();
        let ctx = EligibilityContext::new(&inst, PolicyKind::Edf, 1, 1, &set(&inst, &[(2, 1)]));
        assert_eq!(ctx.certainly_eligible(1), Some(id(&inst, 1, 1)));
        assert_eq!(ctx.possibly_eligible(1), vec![id(&inst, 3, 1)]);
    }

    #[test]
    fn small_edf_v3_bound() {
        // v3 = [4, 5] after J2,1 and J3,1.
        let inst = fixtures::small_edf();
        let ctx = EligibilityContext::new(&inst, PolicyKind::Edf, 4, 5, &set(&inst, &[(2, 1), (3, 1)]));
        assert_eq!(ctx.certainly_eligible(4), Some(id(&inst, 1, 1)));
        assert_eq!(ctx.certainly_eligible(5), Some(id(&inst, 2, 2)));
        assert_eq!(ctx.exploration_bound(), Some(5));
    }

    #[test]
    fn bound_waits_for_certain_release() {
        let inst = ProblemInstance::new(vec![task(1, (4, 10), (1, 1), 20, 20, 0)], None).unwrap();
        let ctx = EligibilityContext::new(&inst, PolicyKind::Edf, 6, 8, &FixedBitSet::with_capacity(1));
        assert_eq!(ctx.certainly_eligible(8), None);
        assert_eq!(ctx.exploration_bound(), Some(10));
        assert_eq!(ctx.certainly_eligible(3), None);
        assert!(ctx.possibly_eligible(3).is_empty());
        assert_eq!(ctx.eligibility_ranges(JobId(0), 6, 10), vec![(6, 10)]);
    }

    #[test]
    fn se_false_alarm_v1_precautious() {
        let inst = fixtures::se_false_alarm();
        let ctx = EligibilityContext::new(&inst, PolicyKind::PFpEdf, 1, 8, &set(&inst, &[(2, 1)]));
        assert_eq!(ctx.critical().map(|c| (c.job, c.time)), Some((id(&inst, 1, 1), 10)));
        assert_eq!(ctx.certainly_eligible(7), Some(id(&inst, 3, 1)));
        assert_eq!(ctx.exploration_bound(), Some(8));
        assert_eq!(ctx.eligibility_ranges(id(&inst, 3, 1), 1, 8), vec![(1, 2), (7, 8)]);
        assert_eq!(ctx.eligibility_ranges(id(&inst, 4, 1), 1, 8), vec![(3, 6)]);
        assert!(ctx.eligibility_ranges(id(&inst, 1, 1), 1, 8).is_empty());
    }

    #[test]
    fn paper_ordering_example_of_possibly_eligible() {
        // Seven applicable jobs with fixed priorities 0..=6 and release
        // status: possibly, not, possibly, certainly, certainly, not, possibly.
        let t = 10;
        let status = [(5, 15), (11, 12), (5, 15), (0, 0), (0, 0), (11, 12), (5, 15)];
        let tasks = status
            .iter()
            .enumerate()
            .map(|(i, &(lo, hi))| task(i as u32 + 1, (lo, hi), (1, 1), 50, 50, i as u32))
            .collect();
        let inst = ProblemInstance::new(tasks, None).unwrap();
        let ctx = EligibilityContext::new(&inst, PolicyKind::FpEdf, t, t, &FixedBitSet::with_capacity(7));
        assert_eq!(ctx.certainly_eligible(t), Some(JobId(3)));
        assert_eq!(ctx.possibly_eligible(t), vec![JobId(0), JobId(2)]);
    }

    #[test]
    fn possibly_eligible_empty_when_all_certain() {
        let inst = fixtures::small_edf();
        let ctx = EligibilityContext::new(&inst, PolicyKind::Edf, 3, 3, &set(&inst, &[(2, 1)]));
        assert!(ctx.possibly_eligible(3).is_empty());
    }

    #[test]
    fn integer_runs() {
        assert_eq!(
            to_ranges([2, 3, 4, 5, 7, 8, 10, 14, 15, 16]),
            vec![(2, 5), (7, 8), (10, 10), (14, 16)]
        );
        assert!(to_ranges([]).is_empty());
    }
}

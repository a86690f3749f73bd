//! Tasks, jobs and problem instances.
//!
//! A [`ProblemInstance`] is built once from a task list and an observation
//! interval and is immutable afterwards. Every job is addressed by a dense
//! [`JobId`] that indexes [`ProblemInstance::jobs`]; jobs are ordered by
//! `(task id, job index)`.

use std::fmt;
use std::ops::Range;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Integer time. All timing parameters are non-negative integers.
pub type Time = u64;

/// Upper bound on any time value reachable during analysis or simulation.
/// Keeping every instance below it lets the analysis mix in signed
/// critical times without overflow checks in the hot loops.
pub const TIME_LIMIT: Time = 1 << 60;

/// Dense index of a job within a [`ProblemInstance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct JobId(pub usize);

impl JobId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

/// A periodic task with release jitter and execution-time variation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    pub id: u32,
    pub period: Time,
    pub r_min: Time,
    pub r_max: Time,
    pub c_min: Time,
    pub c_max: Time,
    pub deadline: Time,
    /// 0 is the highest priority.
    #[serde(default)]
    pub priority: u32,
}

impl Task {
    /// Checks the invariants that hold for every task, hand-authored or not.
    pub fn validate(&self) -> Result<(), ModelError> {
        let fail = |reason: &str| {
            Err(ModelError::InvalidTask {
                id: self.id,
                reason: reason.to_string(),
            })
        };
        if self.period == 0 {
            return fail("period must be at least 1");
        }
        if self.r_max < self.r_min {
            return fail("rmax must not be below rmin");
        }
        if self.c_min == 0 {
            return fail("cmin must be at least 1");
        }
        if self.c_max < self.c_min {
            return fail("cmax must not be below cmin");
        }
        if self.deadline == 0 {
            return fail("deadline must be at least 1");
        }
        Ok(())
    }

    /// The stricter constraint `rmax + cmax <= d <= T` that generated
    /// instances satisfy and that makes the hyperperiod a valid
    /// observation interval.
    pub fn is_constrained(&self) -> bool {
        self.r_max.saturating_add(self.c_max) <= self.deadline && self.deadline <= self.period
    }
}

/// The `index`-th job (1-based) of task `task_id`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Job {
    pub task_id: u32,
    pub index: u32,
    pub r_min: Time,
    pub r_max: Time,
    pub c_min: Time,
    pub c_max: Time,
    pub deadline: Time,
    pub priority: u32,
}

impl fmt::Display for Job {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "J{},{}", self.task_id, self.index)
    }
}

/// Least common multiple of all periods.
pub fn hyperperiod(tasks: &[Task]) -> Result<Time, ModelError> {
    if tasks.is_empty() {
        return Err(ModelError::EmptyInstance);
    }
    tasks.iter().try_fold(1, |acc: Time, task| {
        if task.period == 0 {
            return Err(ModelError::InvalidTask {
                id: task.id,
                reason: "period must be at least 1".into(),
            });
        }
        let g = gcd(acc, task.period);
        (acc / g)
            .checked_mul(task.period)
            .ok_or(ModelError::Overflow("hyperperiod"))
    })
}

fn gcd(mut a: Time, mut b: Time) -> Time {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Exact total utilization `sum(cmax / T)`.
pub fn utilization(tasks: &[Task]) -> Ratio<u128> {
    tasks.iter().fold(Ratio::from_integer(0), |acc, task| {
        acc + Ratio::new(task.c_max as u128, task.period.max(1) as u128)
    })
}

/// Expands every task into its jobs over the observation interval
/// `[0, horizon)`. A task contributes one job per release whose earliest
/// release time lies strictly before `horizon`.
pub fn expand_jobs(tasks: &[Task], horizon: Time) -> Result<Vec<Job>, ModelError> {
    if tasks.is_empty() {
        return Err(ModelError::EmptyInstance);
    }
    if horizon == 0 {
        return Err(ModelError::InvalidHorizon);
    }
    let mut jobs = Vec::new();
    for task in tasks {
        task.validate()?;
        if task.r_min >= horizon {
            continue;
        }
        let count = (horizon - task.r_min - 1) / task.period + 1;
        let count = u32::try_from(count).map_err(|_| ModelError::Overflow("job count"))?;
        for j in 1..=count {
            let offset = Time::from(j - 1)
                .checked_mul(task.period)
                .ok_or(ModelError::Overflow("job offset"))?;
            let shift = |v: Time| v.checked_add(offset).ok_or(ModelError::Overflow("job time"));
            jobs.push(Job {
                task_id: task.id,
                index: j,
                r_min: shift(task.r_min)?,
                r_max: shift(task.r_max)?,
                c_min: task.c_min,
                c_max: task.c_max,
                deadline: shift(task.deadline)?,
                priority: task.priority,
            });
        }
    }
    Ok(jobs)
}

/// A validated task set together with its expanded jobs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemInstance {
    tasks: Vec<Task>,
    horizon: Time,
    jobs: Vec<Job>,
    task_jobs: Vec<Range<usize>>,
}

impl ProblemInstance {
    /// Builds an instance. Tasks are sorted by id; `horizon` defaults to the
    /// hyperperiod.
    pub fn new(mut tasks: Vec<Task>, horizon: Option<Time>) -> Result<Self, ModelError> {
        if tasks.is_empty() {
            return Err(ModelError::EmptyInstance);
        }
        for task in &tasks {
            task.validate()?;
        }
        tasks.sort_by_key(|t| t.id);
        if let Some(w) = tasks.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(ModelError::DuplicateTaskId(w[0].id));
        }
        let horizon = match horizon {
            Some(h) => h,
            None => hyperperiod(&tasks)?,
        };
        let jobs = expand_jobs(&tasks, horizon)?;

        // Every reachable time is bounded by the latest release plus the
        // sum of all execution times.
        let latest = jobs.iter().map(|j| j.r_max.max(j.deadline)).max().unwrap_or(0);
        let work = jobs
            .iter()
            .try_fold(0 as Time, |acc, j| acc.checked_add(j.c_max))
            .ok_or(ModelError::Overflow("total execution time"))?;
        match latest.checked_add(work) {
            Some(v) if v < TIME_LIMIT => {}
            _ => return Err(ModelError::Overflow("time range")),
        }

        let mut task_jobs = Vec::with_capacity(tasks.len());
        let mut start = 0;
        for task in &tasks {
            let len = jobs[start..].iter().take_while(|j| j.task_id == task.id).count();
            task_jobs.push(start..start + len);
            start += len;
        }
        Ok(Self {
            tasks,
            horizon,
            jobs,
            task_jobs,
        })
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn horizon(&self) -> Time {
        self.horizon
    }

    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }

    pub fn job(&self, id: JobId) -> &Job {
        &self.jobs[id.0]
    }

    pub fn job_count(&self) -> usize {
        self.jobs.len()
    }

    /// Job ids of the task at position `task_pos` (not task id), in index order.
    pub fn jobs_of_task(&self, task_pos: usize) -> Range<usize> {
        self.task_jobs[task_pos].clone()
    }

    pub fn task_ranges(&self) -> &[Range<usize>] {
        &self.task_jobs
    }

    /// Looks up a job by task id and 1-based index.
    pub fn find_job(&self, task_id: u32, index: u32) -> Option<JobId> {
        let pos = self.tasks.binary_search_by_key(&task_id, |t| t.id).ok()?;
        let range = self.task_jobs[pos].clone();
        let offset = usize::try_from(index.checked_sub(1)?).ok()?;
        (offset < range.len()).then(|| JobId(range.start + offset))
    }

    pub fn job_ids(&self) -> impl Iterator<Item = JobId> + '_ {
        (0..self.jobs.len()).map(JobId)
    }

    pub fn utilization(&self) -> Ratio<u128> {
        utilization(&self.tasks)
    }
}

/// One concrete assignment of release and execution times to every job,
/// indexed by [`JobId`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionScenario {
    pub release: Vec<Time>,
    pub execution: Vec<Time>,
}

impl ExecutionScenario {
    /// Latest releases and largest execution times.
    pub fn worst_case(instance: &ProblemInstance) -> Self {
        Self {
            release: instance.jobs().iter().map(|j| j.r_max).collect(),
            execution: instance.jobs().iter().map(|j| j.c_max).collect(),
        }
    }

    pub fn validate(&self, instance: &ProblemInstance) -> Result<(), ModelError> {
        let n = instance.job_count();
        if self.release.len() != n || self.execution.len() != n {
            return Err(ModelError::InvalidScenario(format!(
                "scenario covers {} releases and {} execution times, instance has {n} jobs",
                self.release.len(),
                self.execution.len()
            )));
        }
        for (i, job) in instance.jobs().iter().enumerate() {
            let (r, c) = (self.release[i], self.execution[i]);
            if r < job.r_min || r > job.r_max {
                return Err(ModelError::InvalidScenario(format!(
                    "{job}: release {r} outside [{}, {}]",
                    job.r_min, job.r_max
                )));
            }
            if c < job.c_min || c > job.c_max {
                return Err(ModelError::InvalidScenario(format!(
                    "{job}: execution time {c} outside [{}, {}]",
                    job.c_min, job.c_max
                )));
            }
        }
        Ok(())
    }
}

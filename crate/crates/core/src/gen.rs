//! Seeded random task-set generator.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::GenError;
use crate::model::{hyperperiod, ProblemInstance, Task, Time};

/// Allowed distance between the requested and the generated utilization.
pub const UTILIZATION_TOLERANCE: f64 = 0.01;

/// Periods used when none are given.
pub const DEFAULT_PERIODS: [Time; 4] = [5, 10, 20, 40];

const MAX_ATTEMPTS: u32 = 10_000;
const MAX_HYPERPERIOD: Time = 1 << 32;

/// How task priorities are assigned. Priorities only matter for FP-EDF and
/// P-FP-EDF.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Priorities {
    /// Every task gets priority 0.
    #[default]
    AllZero,
    /// Uniform in `0..levels`.
    Random { levels: u32 },
}

/// How relative deadlines are drawn once `rmax` and `cmax` are known.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Deadlines {
    /// Uniform in `[rmax + cmax, T]`.
    #[default]
    Random,
    /// Equal to the period.
    Implicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub tasks: usize,
    pub utilization: f64,
    /// Release jitter ratio.
    pub rj: f64,
    /// Execution time variation ratio.
    pub rc: f64,
    #[serde(default = "default_periods")]
    pub periods: Vec<Time>,
    #[serde(default)]
    pub priorities: Priorities,
    #[serde(default)]
    pub deadlines: Deadlines,
    pub seed: u64,
}

fn default_periods() -> Vec<Time> {
    DEFAULT_PERIODS.to_vec()
}

impl GenSpec {
    pub fn new(tasks: usize, utilization: f64, rj: f64, rc: f64, seed: u64) -> Self {
        Self {
            tasks,
            utilization,
            rj,
            rc,
            periods: default_periods(),
            priorities: Priorities::AllZero,
            deadlines: Deadlines::Random,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |m: &str| Err(GenError::InvalidSpec(m.to_string()));
        if self.tasks == 0 {
            return bad("at least one task is required");
        }
        if !(self.utilization > 0.0 && self.utilization <= 1.0) {
            return bad("utilization must be in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.rj) || !(0.0..=1.0).contains(&self.rc) {
            return bad("ratios must be in [0, 1]");
        }
        if self.periods.is_empty() || self.periods.contains(&0) {
            return bad("period set must be non-empty and positive");
        }
        if let Priorities::Random { levels: 0 } = self.priorities {
            return bad("random priorities need at least one level");
        }
        let probes: Vec<Task> = self
            .periods
            .iter()
            .map(|&p| Task {
                id: 0,
                period: p,
                r_min: 0,
                r_max: 0,
                c_min: 1,
                c_max: 1,
                deadline: p,
                priority: 0,
            })
            .collect();
        match hyperperiod(&probes) {
            Ok(h) if h <= MAX_HYPERPERIOD => Ok(()),
            _ => bad("period set has an unbounded hyperperiod"),
        }
    }
}

/// `round(x)` with halves rounded up.
pub fn round_half_up(x: f64) -> Time {
    (x + 0.5).floor().max(0.0) as Time
}

/// Uniform draw from the simplex scaled to `total`.
fn uunifast(rng: &mut impl Rng, n: usize, total: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut sum = total;
    for i in 1..n {
        let next = sum * rng.gen::<f64>().powf(1.0 / (n - i) as f64);
        out.push(sum - next);
        sum = next;
    }
    out.push(sum);
    out
}

pub fn generate_instance(spec: &GenSpec) -> Result<ProblemInstance, GenError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for _ in 0..MAX_ATTEMPTS {
        let periods: Vec<Time> = (0..spec.tasks)
            .map(|_| *spec.periods.choose(&mut rng).expect("non-empty"))
            .collect();
        let shares = uunifast(&mut rng, spec.tasks, spec.utilization);
        let c_max: Vec<Time> = shares
            .iter()
            .zip(&periods)
            .map(|(&u, &t)| round_half_up(u * t as f64).max(1))
            .collect();
        if c_max.iter().zip(&periods).any(|(c, t)| c > t) {
            continue;
        }
        let total: f64 = c_max.iter().zip(&periods).map(|(&c, &t)| c as f64 / t as f64).sum();
        if (total - spec.utilization).abs() > UTILIZATION_TOLERANCE {
            continue;
        }

        let mut tasks = Vec::with_capacity(spec.tasks);
        for (i, (&c_max, &period)) in c_max.iter().zip(&periods).enumerate() {
            let r_max = rng.gen_range(0..=period - c_max);
            let deadline = match spec.deadlines {
                Deadlines::Random => rng.gen_range(r_max + c_max..=period),
                Deadlines::Implicit => period,
            };
            let r_min = round_half_up(r_max as f64 * (1.0 - spec.rj)).min(r_max);
            let c_min = round_half_up(c_max as f64 - spec.rc * (c_max - 1) as f64).clamp(1, c_max);
            let priority = match spec.priorities {
                Priorities::AllZero => 0,
                Priorities::Random { levels } => rng.gen_range(0..levels),
            };
            tasks.push(Task {
                id: i as u32 + 1,
                period,
                r_min,
                r_max,
                c_min,
                c_max,
                deadline,
                priority,
            });
        }
        return Ok(ProblemInstance::new(tasks, None)?);
    }
    Err(GenError::Infeasible { attempts: MAX_ATTEMPTS })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskRatios {
    pub task: u32,
    pub rj: f64,
    pub rc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ratios {
    pub tasks: Vec<TaskRatios>,
    pub utilization: f64,
}

/// Jitter and variation ratio of every task, and the total utilization.
pub fn measure_ratios(instance: &ProblemInstance) -> Ratios {
    let tasks = instance
        .tasks()
        .iter()
        .map(|t| TaskRatios {
            task: t.id,
            rj: if t.r_max > 0 {
                (t.r_max - t.r_min) as f64 / t.r_max as f64
            } else {
                0.0
            },
            rc: if t.c_max > 1 {
                (t.c_max - t.c_min) as f64 / (t.c_max - 1) as f64
            } else {
                0.0
            },
        })
        .collect();
    let utilization = instance.tasks().iter().map(|t| t.c_max as f64 / t.period as f64).sum();
    Ratios { tasks, utilization }
}

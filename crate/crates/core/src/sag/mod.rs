//! Schedule-abstraction graph generation.

mod dot;
mod eligibility;
mod graph;
mod merge;
mod sweep;

use std::time::Instant;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use dot::export_dot;
pub use eligibility::{applicable_jobs, to_ranges, EligibilityContext};
pub use graph::{Arc, ArcId, ScheduleGraph, Vertex, VertexId};
pub use merge::{merge_phase, LevelCandidate, MergedVertex};
pub use sweep::{expand, next_nodes, next_nodes_naive, Expansion, Mode, NoEligibleJob};

use crate::error::AnalysisError;
use crate::model::{JobId, ProblemInstance, Time};
use crate::policy::PolicyKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub mode: Mode,
    /// Keep exploring after the first deadline miss and report all of them.
    pub exhaustive_misses: bool,
    /// Expand the vertices of a level in parallel. Ignored without the
    /// `parallel` feature.
    pub parallel: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            mode: Mode::Me,
            exhaustive_misses: false,
            parallel: true,
        }
    }
}

impl AnalysisOptions {
    pub fn with_mode(mode: Mode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }
}

/// A dispatch whose latest finish time exceeds the job's deadline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissWitness {
    /// Vertex produced by the dispatch.
    pub vertex: VertexId,
    pub job: JobId,
    pub lft: Time,
    pub deadline: Time,
}

/// Earliest and latest absolute finish time of a job over all explored
/// dispatches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinishBounds {
    pub eft_min: Time,
    pub lft_max: Time,
}

impl FinishBounds {
    fn widen(this: &mut Option<Self>, eft: Time, lft: Time) {
        match this {
            Some(b) => {
                b.eft_min = b.eft_min.min(eft);
                b.lft_max = b.lft_max.max(lft);
            }
            None => {
                *this = Some(Self {
                    eft_min: eft,
                    lft_max: lft,
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelStats {
    pub vertices: usize,
    pub arcs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub levels: Vec<LevelStats>,
    pub wall_ms: f64,
}

impl GraphStats {
    pub fn vertices(&self) -> usize {
        self.levels.iter().map(|l| l.vertices).sum()
    }

    pub fn arcs(&self) -> usize {
        self.levels.iter().map(|l| l.arcs).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisResult {
    pub policy: PolicyKind,
    pub mode: Mode,
    pub schedulable: bool,
    /// First miss found, in level order.
    pub witness: Option<MissWitness>,
    /// All misses found. Only the first is guaranteed unless
    /// `exhaustive_misses` was set.
    pub misses: Vec<MissWitness>,
    /// Finish bounds indexed by job id; `None` for jobs never dispatched.
    pub bounds: Vec<Option<FinishBounds>>,
    /// False when generation stopped early, so some bounds are partial.
    pub bounds_complete: bool,
    pub stats: GraphStats,
}

/// Builds the schedule-abstraction graph of `instance` under `kind`.
pub fn generate(
    instance: &ProblemInstance,
    kind: PolicyKind,
    options: AnalysisOptions,
) -> Result<(ScheduleGraph, AnalysisResult), AnalysisError> {
    let start = Instant::now();
    let n = instance.job_count();
    let mut graph = ScheduleGraph::with_root(n);
    let mut bounds: Vec<Option<FinishBounds>> = vec![None; n];
    let mut misses: Vec<MissWitness> = Vec::new();
    let mut levels = vec![LevelStats { vertices: 1, arcs: 0 }];
    let mut aborted = false;

    for level in 1..=n {
        let expansions = expand_level(instance, kind, options, &graph, level - 1)?;
        let total: usize = expansions.iter().map(|(_, e)| e.len()).sum();
        if total == 0 {
            break;
        }

        let first_id = graph.next_id();
        graph.reserve_ids(total);
        let mut candidates = Vec::with_capacity(total);
        for (source, exps) in &expansions {
            let parent = &graph.vertex(*source).finished;
            for e in exps {
                let mut finished = parent.clone();
                finished.insert(e.job.0);
                candidates.push(LevelCandidate {
                    id: VertexId(first_id + candidates.len() as u32),
                    source: *source,
                    job: e.job,
                    est: e.est,
                    lst: e.lst,
                    eft: e.eft,
                    lft: e.lft,
                    finished,
                });
            }
        }

        for c in &candidates {
            FinishBounds::widen(&mut bounds[c.job.0], c.eft, c.lft);
            let deadline = instance.job(c.job).deadline;
            if c.lft > deadline {
                misses.push(MissWitness {
                    vertex: c.id,
                    job: c.job,
                    lft: c.lft,
                    deadline,
                });
            }
        }

        graph.push_level();
        if !misses.is_empty() && !options.exhaustive_misses {
            // Keep the offending vertices visible; no need to merge.
            for c in candidates {
                insert_candidate_vertex(&mut graph, level, &c);
            }
            levels.push(LevelStats {
                vertices: total,
                arcs: total,
            });
            aborted = true;
            break;
        }

        let merged = merge_phase(&candidates);
        let mut arcs = 0;
        for m in &merged {
            graph.insert_vertex(Vertex {
                id: m.id,
                eft: m.eft,
                lft: m.lft,
                finished: m.finished.clone(),
                level: level as u32,
                in_arcs: Vec::new(),
                out_arcs: Vec::new(),
            });
            for &p in &m.incoming {
                let c = &candidates[p];
                graph.insert_arc(c.source, m.id, c.job, c.est, c.lst);
                arcs += 1;
            }
        }
        // Misses found during exhaustive exploration point at the vertex
        // their candidate was merged into.
        if options.exhaustive_misses {
            let mut owner = vec![VertexId(0); candidates.len()];
            for m in &merged {
                for &p in &m.members {
                    owner[p] = m.id;
                }
            }
            for w in misses.iter_mut().filter(|w| w.vertex.0 >= first_id) {
                w.vertex = owner[(w.vertex.0 - first_id) as usize];
            }
        }
        graph.mark_level_merged();
        levels.push(LevelStats {
            vertices: merged.len(),
            arcs,
        });
    }

    let schedulable = misses.is_empty();
    let result = AnalysisResult {
        policy: kind,
        mode: options.mode,
        schedulable,
        witness: misses.first().copied(),
        misses,
        bounds,
        bounds_complete: !aborted,
        stats: GraphStats {
            levels,
            wall_ms: start.elapsed().as_secs_f64() * 1000.0,
        },
    };
    Ok((graph, result))
}

fn insert_candidate_vertex(graph: &mut ScheduleGraph, level: usize, c: &LevelCandidate) {
    graph.insert_vertex(Vertex {
        id: c.id,
        eft: c.eft,
        lft: c.lft,
        finished: c.finished.clone(),
        level: level as u32,
        in_arcs: Vec::new(),
        out_arcs: Vec::new(),
    });
    graph.insert_arc(c.source, c.id, c.job, c.est, c.lst);
}

type LevelExpansions = Vec<(VertexId, Vec<Expansion>)>;

fn expand_level(
    instance: &ProblemInstance,
    kind: PolicyKind,
    options: AnalysisOptions,
    graph: &ScheduleGraph,
    level: usize,
) -> Result<LevelExpansions, AnalysisError> {
    let expand_one = |&id: &VertexId| -> Result<(VertexId, Vec<Expansion>), AnalysisError> {
        let v = graph.vertex(id);
        let ctx = EligibilityContext::new(instance, kind, v.eft, v.lft, &v.finished);
        next_nodes(&ctx, options.mode)
            .map(|e| (id, e))
            .map_err(|NoEligibleJob| AnalysisError::Stuck {
                vertex: id.0,
                eft: v.eft,
                lft: v.lft,
            })
    };
    let ids = &graph.levels()[level];
    #[cfg(feature = "parallel")]
    if options.parallel {
        return ids.par_iter().map(expand_one).collect();
    }
    ids.iter().map(expand_one).collect()
}

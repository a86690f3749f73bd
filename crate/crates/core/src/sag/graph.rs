use std::collections::{HashMap, HashSet};

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::model::{JobId, ProblemInstance, Time};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ArcId(pub u32);

/// System state after a set of jobs has finished: the processor becomes
/// free somewhere in `[eft, lft]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub id: VertexId,
    pub eft: Time,
    pub lft: Time,
    pub finished: FixedBitSet,
    pub level: u32,
    pub in_arcs: Vec<ArcId>,
    pub out_arcs: Vec<ArcId>,
}

/// Dispatch of `job` out of `source`, started within `[est, lst]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arc {
    pub id: ArcId,
    pub source: VertexId,
    pub target: VertexId,
    pub job: JobId,
    pub est: Time,
    pub lst: Time,
}

/// Level-structured DAG of vertices. Vertex ids are assigned in creation
/// order; ids of vertices removed by merging are never reused.
#[derive(Debug, Clone, Default)]
pub struct ScheduleGraph {
    slots: Vec<Option<Vertex>>,
    arcs: Vec<Arc>,
    levels: Vec<Vec<VertexId>>,
    merged_levels: usize,
}

impl ScheduleGraph {
    pub(crate) fn with_root(job_count: usize) -> Self {
        let root = Vertex {
            id: VertexId(0),
            eft: 0,
            lft: 0,
            finished: FixedBitSet::with_capacity(job_count),
            level: 0,
            in_arcs: Vec::new(),
            out_arcs: Vec::new(),
        };
        Self {
            slots: vec![Some(root)],
            arcs: Vec::new(),
            levels: vec![vec![VertexId(0)]],
            merged_levels: 1,
        }
    }

    pub fn root(&self) -> VertexId {
        VertexId(0)
    }

    /// Next id to hand out.
    pub(crate) fn next_id(&self) -> u32 {
        self.slots.len() as u32
    }

    /// Reserves `count` ids; slots stay empty until vertices are inserted.
    pub(crate) fn reserve_ids(&mut self, count: usize) {
        self.slots.resize(self.slots.len() + count, None);
    }

    pub(crate) fn push_level(&mut self) {
        self.levels.push(Vec::new());
    }

    pub(crate) fn mark_level_merged(&mut self) {
        self.merged_levels = self.levels.len();
    }

    /// Number of leading levels that went through the merge phase. Only the
    /// level on which a deadline miss aborted generation is left unmerged.
    pub fn merged_levels(&self) -> usize {
        self.merged_levels
    }

    pub(crate) fn insert_vertex(&mut self, v: Vertex) {
        let level = v.level as usize;
        let id = v.id;
        debug_assert!(self.slots[id.0 as usize].is_none());
        self.slots[id.0 as usize] = Some(v);
        self.levels[level].push(id);
    }

    pub(crate) fn insert_arc(&mut self, source: VertexId, target: VertexId, job: JobId, est: Time, lst: Time) {
        let id = ArcId(self.arcs.len() as u32);
        self.arcs.push(Arc {
            id,
            source,
            target,
            job,
            est,
            lst,
        });
        self.vertex_mut(source).out_arcs.push(id);
        self.vertex_mut(target).in_arcs.push(id);
    }

    pub fn vertex(&self, id: VertexId) -> &Vertex {
        self.slots[id.0 as usize].as_ref().expect("live vertex")
    }

    fn vertex_mut(&mut self, id: VertexId) -> &mut Vertex {
        self.slots[id.0 as usize].as_mut().expect("live vertex")
    }

    pub fn try_vertex(&self, id: VertexId) -> Option<&Vertex> {
        self.slots.get(id.0 as usize)?.as_ref()
    }

    /// Live vertices in id order.
    pub fn vertices(&self) -> impl Iterator<Item = &Vertex> {
        self.slots.iter().flatten()
    }

    pub fn vertex_count(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, id: ArcId) -> &Arc {
        &self.arcs[id.0 as usize]
    }

    pub fn levels(&self) -> &[Vec<VertexId>] {
        &self.levels
    }

    pub fn level(&self, i: usize) -> impl Iterator<Item = &Vertex> {
        self.levels[i].iter().map(|&id| self.vertex(id))
    }

    /// `[eft, lft]` of every vertex on level `i`, sorted.
    pub fn level_intervals(&self, i: usize) -> Vec<(Time, Time)> {
        let mut v: Vec<_> = self.level(i).map(|v| (v.eft, v.lft)).collect();
        v.sort_unstable();
        v
    }

    /// Checks the structural invariants of the graph and returns every
    /// violation found.
    pub fn check_invariants(&self, instance: &ProblemInstance) -> Vec<String> {
        let merged_levels = self.merged_levels;
        let mut errors = Vec::new();
        match self.levels.first().map(Vec::as_slice) {
            Some([root]) => {
                let v = self.vertex(*root);
                if (v.eft, v.lft) != (0, 0) || v.finished.count_ones(..) != 0 {
                    errors.push("root is not [0,0] with no finished jobs".to_string());
                }
            }
            _ => errors.push("level 0 must contain exactly the root".to_string()),
        }
        for (i, level) in self.levels.iter().enumerate() {
            for &id in level {
                let v = self.vertex(id);
                if v.level as usize != i || v.finished.count_ones(..) != i {
                    errors.push(format!(
                        "v{}: level {} but {} finished jobs",
                        id.0,
                        i,
                        v.finished.count_ones(..)
                    ));
                }
                if v.eft > v.lft {
                    errors.push(format!("v{}: eft {} > lft {}", id.0, v.eft, v.lft));
                }
                if v.finished.len() != instance.job_count() {
                    errors.push(format!("v{}: finished set has wrong width", id.0));
                }
            }
            if i < merged_levels {
                let mut by_set: HashMap<&FixedBitSet, Vec<&Vertex>> = HashMap::new();
                for &id in level {
                    let v = self.vertex(id);
                    by_set.entry(&v.finished).or_default().push(v);
                }
                for group in by_set.values() {
                    for (a, va) in group.iter().enumerate() {
                        for vb in &group[a + 1..] {
                            if va.eft <= vb.lft && vb.eft <= va.lft {
                                errors.push(format!(
                                    "level {i}: v{} and v{} should have been merged",
                                    va.id.0, vb.id.0
                                ));
                            }
                        }
                    }
                }
            }
        }
        let mut pairs = HashSet::new();
        for arc in &self.arcs {
            if !pairs.insert((arc.source, arc.target)) {
                errors.push(format!("parallel arcs v{} -> v{}", arc.source.0, arc.target.0));
            }
            let (Some(s), Some(t)) = (self.try_vertex(arc.source), self.try_vertex(arc.target)) else {
                errors.push(format!("arc {} has a dangling endpoint", arc.id.0));
                continue;
            };
            let mut expected = s.finished.clone();
            if expected.contains(arc.job.0) {
                errors.push(format!("arc {} re-dispatches a finished job", arc.id.0));
            }
            expected.insert(arc.job.0);
            if expected != t.finished || t.level != s.level + 1 {
                errors.push(format!("arc {} does not add exactly its job", arc.id.0));
            }
            if arc.est > arc.lst {
                errors.push(format!("arc {} has an empty start window", arc.id.0));
            }
        }
        errors
    }
}

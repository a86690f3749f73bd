//! Merging same-level vertices that share a finished set and whose
//! finish-time intervals intersect.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;

use super::graph::VertexId;
use crate::model::{JobId, Time};

/// A vertex produced by the expansion phase, before merging. It has
/// exactly one incoming arc.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelCandidate {
    pub id: VertexId,
    pub source: VertexId,
    pub job: JobId,
    pub est: Time,
    pub lst: Time,
    pub eft: Time,
    pub lft: Time,
    pub finished: FixedBitSet,
}

/// A vertex surviving the merge phase. `members` lists every candidate (by
/// position in the input) fused into it; `incoming` is the subset whose arcs
/// are kept, at most one per source vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergedVertex {
    pub id: VertexId,
    pub eft: Time,
    pub lft: Time,
    pub finished: FixedBitSet,
    pub members: Vec<usize>,
    pub incoming: Vec<usize>,
}

/// Merges candidates until no two of them have equal finished sets and
/// intersecting intervals. The survivor of each merged group keeps the
/// smallest id. Output is ordered by id.
pub fn merge_phase(candidates: &[LevelCandidate]) -> Vec<MergedVertex> {
    let mut buckets: HashMap<&FixedBitSet, Vec<usize>> = HashMap::new();
    for (pos, c) in candidates.iter().enumerate() {
        buckets.entry(&c.finished).or_default().push(pos);
    }

    let mut out = Vec::with_capacity(candidates.len());
    for (_, mut members) in buckets {
        // Sweeping by eft joins exactly the chains of pairwise
        // intersecting intervals.
        members.sort_by_key(|&p| (candidates[p].eft, candidates[p].id));
        let mut group: Vec<usize> = Vec::new();
        let mut reach = 0;
        for p in members {
            let c = &candidates[p];
            if !group.is_empty() && c.eft > reach {
                out.push(fuse(candidates, &group));
                group.clear();
            }
            reach = if group.is_empty() { c.lft } else { reach.max(c.lft) };
            group.push(p);
        }
        if !group.is_empty() {
            out.push(fuse(candidates, &group));
        }
    }
    out.sort_by_key(|v| v.id);
    out
}

fn fuse(candidates: &[LevelCandidate], group: &[usize]) -> MergedVertex {
    let mut group = group.to_vec();
    group.sort_by_key(|&p| candidates[p].id);
    let first = &candidates[group[0]];
    let mut incoming: Vec<usize> = Vec::with_capacity(group.len());
    for &p in &group {
        // Keep the graph simple: one arc per source.
        if !incoming.iter().any(|&q| candidates[q].source == candidates[p].source) {
            incoming.push(p);
        }
    }
    MergedVertex {
        id: first.id,
        eft: group.iter().map(|&p| candidates[p].eft).min().unwrap_or(first.eft),
        lft: group.iter().map(|&p| candidates[p].lft).max().unwrap_or(first.lft),
        finished: first.finished.clone(),
        members: group,
        incoming,
    }
}

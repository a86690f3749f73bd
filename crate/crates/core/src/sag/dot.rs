use std::fmt::Write;

use super::graph::ScheduleGraph;
use super::MissWitness;
use crate::model::ProblemInstance;

/// Renders the graph in Graphviz DOT. Vertices reached by a deadline miss
/// are drawn red. Output depends only on the graph.
pub fn export_dot(graph: &ScheduleGraph, instance: &ProblemInstance, misses: &[MissWitness]) -> String {
    let mut out = String::from("digraph sag {\n    rankdir=LR;\n    node [shape=box];\n");
    for v in graph.vertices() {
        let missed = misses.iter().any(|m| m.vertex == v.id);
        let style = if missed { ", color=red, fontcolor=red" } else { "" };
        let _ = writeln!(
            out,
            "    v{0} [label=\"v{0}: [{1},{2}]\"{3}];",
            v.id.0, v.eft, v.lft, style
        );
    }
    for a in graph.arcs() {
        let missed = misses.iter().any(|m| m.vertex == a.target && m.job == a.job);
        let style = if missed { ", color=red, fontcolor=red" } else { "" };
        let _ = writeln!(
            out,
            "    v{} -> v{} [label=\"{}\"{}];",
            a.source.0,
            a.target.0,
            instance.job(a.job),
            style
        );
    }
    out.push_str("}\n");
    out
}

use sag_core::format::parse_instance;
use sag_core::policy::PolicyKind;
use sag_core::sag::{export_dot, generate, AnalysisOptions, Mode, VertexId};
use sag_core::{JobId, ProblemInstance};

fn example(name: &str) -> ProblemInstance {
    let text = match name {
        "anomaly" => include_str!("../../../instances/anomaly.txt"),
        "small_edf" => include_str!("../../../instances/small_edf.txt"),
        "se_false_alarm" => include_str!("../../../instances/se_false_alarm.txt"),
        _ => unreachable!(),
    };
    parse_instance(text).unwrap()
}

fn sequential(mode: Mode) -> AnalysisOptions {
    AnalysisOptions {
        mode,
        exhaustive_misses: false,
        parallel: false,
    }
}

#[test]
fn small_edf_vertex_numbering_follows_creation_order() {
    let inst = example("small_edf");
    let (g, _) = generate(&inst, PolicyKind::Edf, AnalysisOptions::default()).unwrap();
    let ids: Vec<(u32, u64, u64)> = g.vertices().map(|v| (v.id.0, v.eft, v.lft)).collect();
    assert_eq!(
        ids,
        vec![
            (0, 0, 0),
            (1, 1, 1),
            (2, 2, 3),
            (3, 4, 5),
            (4, 5, 7),
            (6, 6, 6),
            (7, 6, 8)
        ]
    );
    assert_eq!(g.arcs().len(), 8);
    // v5 [5,6] was merged into v4 [5,7]; both arcs now end there.
    assert_eq!(g.vertex(VertexId(4)).in_arcs.len(), 2);
    assert!(g.try_vertex(VertexId(5)).is_none());
    assert!(g.check_invariants(&inst).is_empty());
}

#[test]
fn small_edf_finish_bounds() {
    let inst = example("small_edf");
    let (_, r) = generate(&inst, PolicyKind::Edf, AnalysisOptions::default()).unwrap();
    assert!(r.bounds_complete);
    let b = |t, j| {
        let b = r.bounds[inst.find_job(t, j).unwrap().0].unwrap();
        (b.eft_min, b.lft_max)
    };
    assert_eq!(b(2, 1), (1, 1));
    assert_eq!(b(1, 1), (2, 8));
    assert_eq!(b(3, 1), (4, 7));
    assert_eq!(b(2, 2), (6, 8));
    assert_eq!(r.stats.levels.len(), 5);
    assert_eq!(r.stats.vertices(), 7);
    assert_eq!(r.stats.arcs(), 8);
}

#[test]
fn parallel_and_sequential_graphs_are_identical() {
    for name in ["anomaly", "small_edf", "se_false_alarm"] {
        let inst = example(name);
        for kind in PolicyKind::ALL {
            for mode in [Mode::Me, Mode::Se] {
                let (a, ra) = generate(&inst, kind, sequential(mode)).unwrap();
                let (b, rb) = generate(&inst, kind, AnalysisOptions::with_mode(mode)).unwrap();
                assert_eq!(a.vertices().collect::<Vec<_>>(), b.vertices().collect::<Vec<_>>());
                assert_eq!(a.arcs(), b.arcs());
                assert_eq!((ra.witness, ra.bounds), (rb.witness, rb.bounds));
            }
        }
    }
}

#[test]
fn early_abort_keeps_the_offending_level_unmerged() {
    let inst = example("anomaly");
    let (g, r) = generate(&inst, PolicyKind::Edf, AnalysisOptions::default()).unwrap();
    assert!(!r.schedulable);
    assert!(!r.bounds_complete);
    let w = r.witness.unwrap();
    assert!(w.lft > w.deadline);
    assert_eq!(g.levels().len(), g.merged_levels() + 1);
    assert_eq!(g.vertex(w.vertex).lft, w.lft);
    assert!(g.check_invariants(&inst).is_empty());
}

#[test]
fn exhaustive_misses_explores_every_level() {
    let inst = example("anomaly");
    let options = AnalysisOptions {
        exhaustive_misses: true,
        ..AnalysisOptions::default()
    };
    let (g, r) = generate(&inst, PolicyKind::Edf, options).unwrap();
    assert!(!r.schedulable);
    assert!(r.bounds_complete);
    assert_eq!(g.levels().len(), inst.job_count() + 1);
    assert_eq!(g.merged_levels(), g.levels().len());
    assert_eq!(r.witness, r.misses.first().copied());
    for m in &r.misses {
        let v = g.vertex(m.vertex);
        assert!(v.finished.contains(m.job.0));
        assert!(v.lft >= m.lft);
    }
    let j32 = inst.find_job(3, 2).unwrap();
    assert!(r.misses.iter().any(|m| m.job == j32));
}

#[test]
fn se_false_alarm_se_witness() {
    let inst = example("se_false_alarm");
    let (g, r) = generate(&inst, PolicyKind::PFpEdf, AnalysisOptions::with_mode(Mode::Se)).unwrap();
    let w = r.witness.unwrap();
    assert_eq!(w.job, inst.find_job(3, 1).unwrap());
    assert_eq!((w.lft, w.deadline), (18, 14));
    let v = g.vertex(w.vertex);
    assert_eq!((v.eft, v.lft), (18, 18));
    assert_eq!(v.level, 4);
}

#[test]
fn dot_export() {
    let inst = example("small_edf");
    let (g, r) = generate(&inst, PolicyKind::Edf, AnalysisOptions::default()).unwrap();
    let dot = export_dot(&g, &inst, &r.misses);
    assert!(dot.starts_with("digraph"));
    assert_eq!(dot.matches(" -> ").count(), 8);
    assert_eq!(dot.matches("[label=\"v").count(), 7);
    assert!(dot.contains("v4 [label=\"v4: [5,7]\"]"));
    assert!(dot.contains("v0 -> v1 [label=\"J2,1\"]"));
    assert!(!dot.contains("red"));
    assert_eq!(dot, export_dot(&g, &inst, &r.misses));

    let inst = example("se_false_alarm");
    let (g, r) = generate(&inst, PolicyKind::PFpEdf, AnalysisOptions::with_mode(Mode::Se)).unwrap();
    let dot = export_dot(&g, &inst, &r.misses);
    let id = r.witness.unwrap().vertex.0;
    assert!(dot.contains(&format!("v{id} [label=\"v{id}: [18,18]\", color=red")));
}

#[test]
fn instance_without_jobs_has_only_the_root() {
    let inst = parse_instance("H 5\ntask 1 T=10 rmin=6 rmax=6 cmin=1 cmax=1 d=10\n").unwrap();
    assert_eq!(inst.job_count(), 0);
    let (g, r) = generate(&inst, PolicyKind::Edf, AnalysisOptions::default()).unwrap();
    assert!(r.schedulable);
    assert_eq!(g.vertex_count(), 1);
    assert!(g.arcs().is_empty());
    let dot = export_dot(&g, &inst, &r.misses);
    assert!(dot.contains("v0 [label=\"v0: [0,0]\"]"));
    assert!(!dot.contains("->"));
}

#[test]
fn jobs_of_one_task_run_in_order() {
    let inst = example("anomaly");
    let options = AnalysisOptions {
        exhaustive_misses: true,
        ..AnalysisOptions::default()
    };
    let (g, _) = generate(&inst, PolicyKind::Cw, options).unwrap();
    for a in g.arcs() {
        let j = inst.job(a.job);
        if j.index > 1 {
            let prev: JobId = inst.find_job(j.task_id, j.index - 1).unwrap();
            assert!(g.vertex(a.source).finished.contains(prev.0));
        }
    }
}

use std::sync::Arc;

use nasenc_core::benchmark::TabularBenchmark;
use nasenc_core::encodings::{EncodingFamily, EncodingKind, Truncation};
use nasenc_core::search_space::{Architecture, SearchSpaceSpec};
use nasenc_core::Error;

fn spec(nodes: usize, max_edges: usize, num_ops: usize) -> Arc<SearchSpaceSpec> {
    Arc::new(SearchSpaceSpec::new(nodes, max_edges, num_ops).unwrap())
}

#[test]
fn synthetic_tables_are_seed_deterministic() {
    let s = spec(5, 10, 2);
    let a = TabularBenchmark::synthetic(Arc::clone(&s), 7).unwrap();
    let b = TabularBenchmark::synthetic(Arc::clone(&s), 7).unwrap();
    let c = TabularBenchmark::synthetic(Arc::clone(&s), 8).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a.digest(), b.digest());
    assert_ne!(a.digest(), c.digest());

    for (_, r) in a.records() {
        assert!((2.0..=95.0).contains(&r.val_error));
        assert!((0.0..=100.0).contains(&r.test_error));
        assert!((60.0..=600.0).contains(&r.train_time));
    }
}

#[test]
fn equivalent_architectures_share_a_record() {
    let s = spec(4, 6, 2);
    let bench = TabularBenchmark::synthetic(Arc::clone(&s), 3).unwrap();
    let edges = [(0, 1), (0, 2), (1, 3), (2, 3)];
    let a = Architecture::from_edge_list(4, &edges, vec![0, 1]).unwrap();
    let b = Architecture::from_edge_list(4, &edges, vec![1, 0]).unwrap();
    let ra = bench.lookup_arch(&a).unwrap().copied().unwrap();
    let rb = bench.lookup_arch(&b).unwrap().copied().unwrap();
    assert_eq!(ra, rb);
}

#[test]
fn complete_mode_scores_operation_assignments() {
    let s = spec(5, 10, 3);
    let bench = TabularBenchmark::synthetic_complete(Arc::clone(&s), 4).unwrap();
    assert_eq!(bench.len(), 27);
    assert!(bench.meta().complete_only);
}

#[test]
fn jsonl_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bench.jsonl");
    let s = spec(4, 6, 2);
    let bench = TabularBenchmark::synthetic(Arc::clone(&s), 11).unwrap();
    bench.to_jsonl(&path).unwrap();

    let loaded = TabularBenchmark::from_jsonl(Arc::clone(&s), &path, "loaded").unwrap();
    assert_eq!(loaded.len(), bench.len());
    assert_eq!(loaded.digest(), bench.digest());
}

#[test]
fn loader_reports_offending_lines() {
    let dir = tempfile::tempdir().unwrap();
    let s = spec(4, 6, 2);
    let good = r#"{"arch":"4;110011;0,1","val_error":10.0,"test_error":11.0,"train_time":100.0}"#;

    let path = dir.path().join("bad-json.jsonl");
    std::fs::write(&path, format!("{good}\nnot json\n")).unwrap();
    match TabularBenchmark::from_jsonl(Arc::clone(&s), &path, "t").unwrap_err() {
        Error::Parse { line, .. } => assert_eq!(line, 2),
        other => panic!("unexpected {other}"),
    }

    // No input-output path: not a member.
    let path = dir.path().join("non-member.jsonl");
    std::fs::write(
        &path,
        r#"{"arch":"4;010010;0,1","val_error":1.0,"test_error":1.0,"train_time":60.0}"#,
    )
    .unwrap();
    assert!(matches!(
        TabularBenchmark::from_jsonl(Arc::clone(&s), &path, "t"),
        Err(Error::Parse { line: 1, .. })
    ));

    // The same class twice with different values conflicts even though the
    // serialized architectures differ.
    let relabeled = r#"{"arch":"4;110011;1,0","val_error":9.0,"test_error":11.0,"train_time":100.0}"#;
    let path = dir.path().join("conflict.jsonl");
    std::fs::write(&path, format!("{good}\n{relabeled}\n")).unwrap();
    match TabularBenchmark::from_jsonl(Arc::clone(&s), &path, "t").unwrap_err() {
        Error::DuplicateRecord { line, .. } => assert_eq!(line, 2),
        other => panic!("unexpected {other}"),
    }

    // Exact repeats collapse silently.
    let path = dir.path().join("repeat.jsonl");
    std::fs::write(&path, format!("{good}\n{good}\n")).unwrap();
    let loaded = TabularBenchmark::from_jsonl(Arc::clone(&s), &path, "t").unwrap();
    assert_eq!(loaded.len(), 1);
}

#[test]
fn lossless_encodings_separate_all_records() {
    let s = spec(4, 6, 2);
    let bench = TabularBenchmark::synthetic(Arc::clone(&s), 2).unwrap();

    let full = EncodingKind::new(
        Arc::clone(&s),
        EncodingFamily::AdjacencyOneHot,
        Truncation::Full,
    )
    .unwrap();
    let stats = bench.equivalence_class_stats(&full).unwrap();
    assert_eq!(stats.class_count, bench.len());
    assert_eq!(stats.largest_class, 1);
    assert_eq!(stats.mean_within_class_std, 0.0);
    assert!(stats.population_std > 0.0);

    // Zero bits see nothing: one class containing everything.
    let blind = EncodingKind::new(
        Arc::clone(&s),
        EncodingFamily::AdjacencyOneHot,
        Truncation::Bits(0),
    )
    .unwrap();
    let stats = bench.equivalence_class_stats(&blind).unwrap();
    assert_eq!(stats.class_count, 1);
    assert_eq!(stats.largest_class, bench.len());
    assert!((stats.mean_within_class_std - stats.population_std).abs() < 1e-12);
}

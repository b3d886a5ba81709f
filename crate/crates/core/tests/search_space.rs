use nasenc_core::search_space::{
    canonical_representative, enumerate_space, Architecture, CanonicalKey, Enumeration,
    SearchSpaceSpec,
};

fn complete(nodes: usize, ops: Vec<u8>) -> Architecture {
    let edges: Vec<(usize, usize)> = (0..nodes)
        .flat_map(|i| (i + 1..nodes).map(move |j| (i, j)))
        .collect();
    Architecture::from_edge_list(nodes, &edges, ops).unwrap()
}

// Hand enumeration of the 3-node single-op space: of the 8 edge sets, five
// contain an input-output path, and they collapse into three classes (direct
// edge only, chain through the interior, chain plus skip edge).
#[test]
fn three_node_space_by_hand() {
    let spec = SearchSpaceSpec::new(3, 3, 1).unwrap();
    let members = enumerate_space(&spec, Enumeration::Members).unwrap();
    assert_eq!(members.len(), 5);

    let classes = enumerate_space(&spec, Enumeration::Classes).unwrap();
    let keys: Vec<String> = classes
        .iter()
        .map(|a| a.canonical_key().unwrap().into_string())
        .collect();
    assert_eq!(keys, ["2;1;", "3;101;0", "3;111;0"]);
}

#[test]
fn complete_graph_paths_by_hand() {
    // Paths in the complete 4-node graph: direct, through either interior,
    // through both.
    let arch = complete(4, vec![0, 0]);
    assert_eq!(
        arch.extract_paths(),
        vec![vec![], vec![0], vec![0], vec![0, 0]]
    );
    assert_eq!(arch.path_count(), 4);

    let spec = SearchSpaceSpec::new(7, 21, 3).unwrap();
    assert_eq!(spec.max_paths(), 32);
}

// Swapping the two interior nodes of a diamond maps edges onto edges, so the
// two op orderings are the same class.
#[test]
fn interior_relabeling_collapses_diamond() {
    let edges = [(0, 1), (0, 2), (1, 3), (2, 3)];
    let a = Architecture::from_edge_list(4, &edges, vec![0, 1]).unwrap();
    let b = Architecture::from_edge_list(4, &edges, vec![1, 0]).unwrap();
    let ka = a.canonical_key().unwrap();
    let kb = b.canonical_key().unwrap();
    assert_eq!(ka, kb);
    assert_eq!(ka.as_str(), "4;110011;0,1");
    assert_eq!(ka.pruned_node_count(), 4);
    assert_eq!(ka.pruned_edge_count(), 4);
}

#[test]
fn dead_nodes_do_not_affect_the_class() {
    // Node 2 feeds nothing and node 3 is unreachable; both prune away,
    // leaving the chain through node 1.
    let cluttered = Architecture::from_edge_list(
        5,
        &[(0, 1), (1, 4), (0, 2), (3, 4)],
        vec![2, 0, 1],
    )
    .unwrap();
    let bare = Architecture::from_edge_list(3, &[(0, 1), (1, 2)], vec![2]).unwrap();
    assert_eq!(
        cluttered.canonical_key().unwrap(),
        bare.canonical_key().unwrap()
    );
}

#[test]
fn representatives_round_trip_every_class() {
    let spec = SearchSpaceSpec::new(4, 6, 2).unwrap();
    let classes = enumerate_space(&spec, Enumeration::Classes).unwrap();
    assert!(!classes.is_empty());
    for rep in &classes {
        assert!(spec.contains(rep));
        let key = rep.canonical_key().unwrap();
        let again = canonical_representative(&spec, &key).unwrap();
        assert_eq!(*rep, again);
    }
    // Classes are pairwise distinct.
    let mut keys: Vec<_> = classes
        .iter()
        .map(|a| a.canonical_key().unwrap())
        .collect();
    keys.dedup();
    assert_eq!(keys.len(), classes.len());
}

#[test]
fn invalid_class_representative_is_edgeless() {
    let spec = SearchSpaceSpec::new(5, 10, 3).unwrap();
    let rep = canonical_representative(&spec, &CanonicalKey::invalid()).unwrap();
    assert_eq!(rep.edge_count(), 0);
    assert!(!rep.is_valid());
    assert!(!spec.contains(&rep));
}

#[test]
fn path_count_agrees_with_extraction() {
    let spec = SearchSpaceSpec::new(4, 6, 2).unwrap();
    for arch in enumerate_space(&spec, Enumeration::Members).unwrap() {
        assert_eq!(arch.path_count(), arch.extract_paths().len() as u128);
    }
    let big = complete(6, vec![0, 1, 0, 1]);
    assert_eq!(big.path_count(), 16);
    assert_eq!(big.extract_paths().len(), 16);
}

#[test]
fn text_form_round_trips() {
    let spec = SearchSpaceSpec::new(4, 6, 3).unwrap();
    for arch in enumerate_space(&spec, Enumeration::Members).unwrap() {
        let text = arch.to_text();
        assert_eq!(Architecture::from_text(&text).unwrap(), arch);
    }
    assert!(Architecture::from_text("4;101;0").is_err());
    assert!(Architecture::from_text("4;1010101;0,0").is_err());
    assert!(Architecture::from_text("4;101010;0").is_err());
    assert!(Architecture::from_text("1;;").is_err());
    assert!(Architecture::from_text("4;10x010;0,0").is_err());
}

#[test]
fn complete_edge_enumeration_varies_ops_only() {
    let spec = SearchSpaceSpec::new(4, 6, 3).unwrap();
    let members = enumerate_space(&spec, Enumeration::CompleteEdgeOps).unwrap();
    assert_eq!(members.len(), 9);
    let mut keys: Vec<_> = members
        .iter()
        .map(|a| {
            assert_eq!(a.edge_count(), 6);
            a.canonical_key().unwrap()
        })
        .collect();
    keys.sort();
    keys.dedup();
    assert_eq!(keys.len(), 9);

    // A space capped below the complete edge count cannot host this mode.
    let capped = SearchSpaceSpec::new(4, 5, 3).unwrap();
    assert!(enumerate_space(&capped, Enumeration::CompleteEdgeOps).is_err());
}

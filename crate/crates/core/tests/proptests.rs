//! Randomized invariant checks over the encoding layer and the canonical
//! form: sequence indexing is a bijection, feature classes only produce what
//! they admit, encode/decode round-trips hold for every family, edit distance
//! is a metric, and the canonical key ignores interior relabelings.

use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;

use nasenc_core::encodings::{
    path_index, path_sequence, sequence_slot_count, EncodingFamily, EncodingKind, FeatureClass,
    Truncation,
};
use nasenc_core::search_space::{
    edge_endpoints, edge_index, edge_slot_count, Architecture, EdgeSet, SearchSpaceSpec,
};
use nasenc_core::subroutines::perturb;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A search space of 4 to 6 nodes with full edge capacity, plus one member
/// architecture built from arbitrary edge bits and operation labels.
fn space_member() -> impl Strategy<Value = (Arc<SearchSpaceSpec>, Architecture)> {
    (4usize..=6, 2usize..=3)
        .prop_flat_map(|(n, q)| {
            let slots = edge_slot_count(n);
            (
                Just((n, q)),
                0u64..(1u64 << slots),
                proptest::collection::vec(0..q as u8, n - 2),
            )
        })
        .prop_map(|((n, q), bits, ops)| {
            let spec = Arc::new(SearchSpaceSpec::new(n, edge_slot_count(n), q).unwrap());
            (spec, build_arch(n, bits, ops))
        })
}

fn build_arch(n: usize, bits: u64, ops: Vec<u8>) -> Architecture {
    let mut edges = EdgeSet::empty(edge_slot_count(n));
    for slot in 0..edge_slot_count(n) {
        if bits >> slot & 1 == 1 {
            edges.insert(slot);
        }
    }
    Architecture::new(n, edges, ops).unwrap()
}

fn feature_class() -> impl Strategy<Value = FeatureClass> {
    prop_oneof![
        Just(FeatureClass::Binary),
        (2usize..=6).prop_map(|cardinality| FeatureClass::Categorical { cardinality }),
        (0usize..=3, 0usize..=4)
            .prop_map(|(min, width)| FeatureClass::Count { min, max: min + width }),
        Just(FeatureClass::Continuous),
        (-15i32..=15).prop_map(|tenths| FeatureClass::Constant(tenths as f64 / 10.0)),
    ]
}

fn path_set(arch: &Architecture) -> BTreeSet<Vec<u8>> {
    arch.extract_paths().into_iter().collect()
}

fn op_sequence() -> impl Strategy<Value = (usize, Vec<u8>)> {
    (2usize..=4)
        .prop_flat_map(|q| (Just(q), proptest::collection::vec(0..q as u8, 0..=6)))
}

proptest! {
    #[test]
    fn sequence_indexing_round_trips((q, seq) in op_sequence()) {
        let idx = path_index(&seq, q);
        prop_assert_eq!(path_sequence(idx, q), seq);
    }

    #[test]
    fn sequence_indexing_is_dense_below_the_slot_count(
        q in 2usize..=4,
        max_len in 0usize..=5,
    ) {
        let count = sequence_slot_count(q, max_len).unwrap();
        for idx in 0..count {
            let seq = path_sequence(idx, q);
            prop_assert!(seq.len() <= max_len);
            prop_assert_eq!(path_index(&seq, q), idx);
        }
    }

    #[test]
    fn feature_classes_stay_inside_their_own_support(
        class in feature_class(),
        seed in proptest::num::u64::ANY,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let drawn = class.sample(&mut rng);
        prop_assert!(class.admits(drawn));
        prop_assert!(class.admits(class.default_value()));
        for alt in class.alternates(drawn) {
            prop_assert!(class.admits(alt));
            prop_assert_ne!(alt, drawn);
        }
        let (a, b, c) = (
            class.sample(&mut rng),
            class.sample(&mut rng),
            class.sample(&mut rng),
        );
        prop_assert_eq!(class.distance(a, a), 0.0);
        prop_assert_eq!(class.distance(a, b), class.distance(b, a));
        prop_assert!(class.distance(a, b) <= class.distance(a, c) + class.distance(c, b) + 1e-12);
    }

    #[test]
    fn every_family_encodes_members_within_its_layout((spec, arch) in space_member()) {
        prop_assume!(spec.contains(&arch));
        for family in EncodingFamily::ALL {
            let kind = EncodingKind::new(spec.clone(), family, Truncation::Full).unwrap();
            let features = kind.encode(&arch).unwrap();
            prop_assert_eq!(features.len(), kind.dim());
            for (class, &value) in kind.feature_classes().iter().zip(&features) {
                prop_assert!(
                    class.admits(value),
                    "{:?} rejects {} from {}",
                    class,
                    value,
                    family.name(),
                );
            }
        }
    }

    #[test]
    fn adjacency_encodings_reproduce_the_architecture((spec, arch) in space_member()) {
        prop_assume!(spec.contains(&arch));
        for family in [
            EncodingFamily::AdjacencyOneHot,
            EncodingFamily::AdjacencyCategorical,
            EncodingFamily::AdjacencyContinuous,
        ] {
            let kind = EncodingKind::new(spec.clone(), family, Truncation::Full).unwrap();
            let decoded = kind.decode(&kind.encode(&arch).unwrap()).unwrap();
            prop_assert_eq!(&decoded, &arch, "{} changed the member", family.name());
        }
    }

    #[test]
    fn path_encodings_preserve_the_path_set((spec, arch) in space_member()) {
        prop_assume!(spec.contains(&arch));
        for family in [
            EncodingFamily::PathOneHot,
            EncodingFamily::PathCategorical,
            EncodingFamily::PathContinuous,
        ] {
            let kind = EncodingKind::new(spec.clone(), family, Truncation::Full).unwrap();
            let decoded = kind.decode(&kind.encode(&arch).unwrap()).unwrap();
            prop_assert_eq!(
                path_set(&decoded),
                path_set(&arch),
                "{} changed the path set",
                family.name(),
            );
        }
    }

    #[test]
    fn edit_distance_is_a_metric(
        (spec, a) in space_member(),
        bits_b in proptest::num::u64::ANY,
        bits_c in proptest::num::u64::ANY,
        seed in proptest::num::u64::ANY,
    ) {
        let n = spec.nodes();
        let slots = edge_slot_count(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut random_ops = || {
            (0..n - 2)
                .map(|_| rand::Rng::random_range(&mut rng, 0..spec.num_ops() as u8))
                .collect::<Vec<_>>()
        };
        let b = build_arch(n, bits_b & ((1u64 << slots) - 1), random_ops());
        let c = build_arch(n, bits_c & ((1u64 << slots) - 1), random_ops());
        for family in EncodingFamily::ALL {
            let kind = EncodingKind::new(spec.clone(), family, Truncation::Full).unwrap();
            let (va, vb, vc) = (
                kind.encode(&a).unwrap(),
                kind.encode(&b).unwrap(),
                kind.encode(&c).unwrap(),
            );
            let d = |x: &[f64], y: &[f64]| kind.edit_distance(x, y).unwrap();
            prop_assert_eq!(d(&va, &va), 0.0);
            prop_assert!(d(&va, &vb) >= 0.0);
            prop_assert_eq!(d(&va, &vb), d(&vb, &va));
            prop_assert!(d(&va, &vb) <= d(&va, &vc) + d(&vc, &vb) + 1e-12);
        }
    }

    #[test]
    fn canonical_key_ignores_interior_relabelings(
        (_spec, arch) in space_member(),
        choices in proptest::collection::vec(0usize..8, 8),
    ) {
        let relabeled = relabel_interiors(&arch, &choices);
        prop_assert_eq!(
            arch.canonical_key().unwrap(),
            relabeled.canonical_key().unwrap(),
        );
    }

    #[test]
    fn canonical_representatives_round_trip((spec, arch) in space_member()) {
        prop_assume!(spec.contains(&arch));
        let key = arch.canonical_key().unwrap();
        let rep = nasenc_core::search_space::canonical_representative(&spec, &key).unwrap();
        prop_assert_eq!(rep.canonical_key().unwrap(), key);
    }

    #[test]
    fn zero_magnitude_perturbation_is_identity(
        (spec, arch) in space_member(),
        seed in proptest::num::u64::ANY,
    ) {
        prop_assume!(spec.contains(&arch));
        let kind =
            EncodingKind::new(spec.clone(), EncodingFamily::AdjacencyOneHot, Truncation::Full)
                .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let out = perturb(&kind, &arch, 0.0, &mut rng).unwrap();
        prop_assert!(!out.exhausted);
        prop_assert_eq!(out.arch, arch);
    }
}

/// Relabels the interior nodes along a topological order of the interior
/// subgraph, tie-broken by `choices`, so every edge stays ascending while the
/// labels move around.
fn relabel_interiors(arch: &Architecture, choices: &[usize]) -> Architecture {
    let n = arch.nodes();
    let interiors: Vec<usize> = (1..n - 1).collect();
    let mut indegree = vec![0usize; n];
    for slot in arch.edges().iter() {
        let (i, j) = edge_endpoints(n, slot);
        if i >= 1 && j <= n - 2 {
            indegree[j] += 1;
        }
    }
    let mut ready: Vec<usize> = interiors
        .iter()
        .copied()
        .filter(|&v| indegree[v] == 0)
        .collect();
    let mut label = vec![0usize; n];
    label[n - 1] = n - 1;
    let mut next = 1usize;
    let mut step = 0usize;
    while let Some(&pick) = ready.get(choices[step % choices.len()] % ready.len().max(1)) {
        ready.remove(ready.iter().position(|&v| v == pick).unwrap());
        label[pick] = next;
        next += 1;
        step += 1;
        for slot in arch.edges().iter() {
            let (i, j) = edge_endpoints(n, slot);
            if i == pick && j <= n - 2 {
                indegree[j] -= 1;
                if indegree[j] == 0 {
                    ready.push(j);
                }
            }
        }
    }
    let mut edges = EdgeSet::empty(edge_slot_count(n));
    for slot in arch.edges().iter() {
        let (i, j) = edge_endpoints(n, slot);
        edges.insert(edge_index(n, label[i], label[j]));
    }
    let mut ops = vec![0u8; n - 2];
    for v in 1..n - 1 {
        ops[label[v] - 1] = arch.ops()[v - 1];
    }
    Architecture::new(n, edges, ops).unwrap()
}

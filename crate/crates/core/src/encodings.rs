//! Feature-vector encodings of architectures.
//!
//! Six families, each mapping an architecture to a fixed-length `Vec<f64>`
//! whose per-position meaning is given by a [`FeatureClass`] layout:
//!
//! - [`EncodingFamily::AdjacencyOneHot`]: one binary feature per edge slot,
//!   then one operation feature per node.
//! - [`EncodingFamily::AdjacencyCategorical`]: `max_edges` slots holding
//!   occupied edge indices in ascending order (padded with the slot count),
//!   then the operation features.
//! - [`EncodingFamily::AdjacencyContinuous`]: one score in `[0, 1]` per edge
//!   slot, the operation features, and a trailing edge count; decoding keeps
//!   the count's highest-scoring slots.
//! - [`EncodingFamily::PathOneHot`]: one binary feature per possible
//!   operation sequence along an input-output path, ordered by length and
//!   then lexicographically.
//! - [`EncodingFamily::PathCategorical`]: one slot per possible path holding
//!   present sequence indices in ascending order, padded.
//! - [`EncodingFamily::PathContinuous`]: one score per possible sequence plus
//!   a trailing count; decoding keeps the count's highest-scoring sequences.
//!
//! A [`Truncation`] shortens the vector: `PathLength(x)` restricts path
//! families to sequences of at most `x` operations, and `Bits(b)` keeps the
//! first `b` features of a one-hot family (legal there because both one-hot
//! layouts put coarser structure first). Decoding a truncated vector reads
//! the missing positions as their defaults: absent edges, absent paths,
//! operation 0.
//!
//! Adjacency decoding is exact. Path decoding sees only the set of operation
//! sequences, so it reconstructs some architecture realizing exactly that
//! set ([`realize_path_set`]) or reports [`Error::NotRealizable`].

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::Rng;

use crate::search_space::{edge_index, Architecture, EdgeSet, SearchSpaceSpec};
use crate::{Error, Result};

/// Raw `(edge set, op assignment)` combination bound for the exhaustive
/// realization fallback; larger spaces report [`Error::NotRealizable`] when
/// the merge construction fails.
const EXHAUSTIVE_REALIZATION_LIMIT: u128 = 500_000;

/// Meaning of one feature position.
#[derive(Clone, Copy, PartialEq, Debug)]
pub enum FeatureClass {
    /// 0 or 1.
    Binary,
    /// Integer in `0..cardinality`.
    Categorical { cardinality: usize },
    /// Integer in `min..=max`.
    Count { min: usize, max: usize },
    /// Any value in `[0, 1]`.
    Continuous,
    /// Fixed marker value.
    Constant(f64),
}

impl FeatureClass {
    /// Whether `value` is admissible for this position.
    pub fn admits(&self, value: f64) -> bool {
        match *self {
            FeatureClass::Binary => value == 0.0 || value == 1.0,
            FeatureClass::Categorical { cardinality } => {
                value.fract() == 0.0 && value >= 0.0 && (value as usize) < cardinality
            }
            FeatureClass::Count { min, max } => {
                value.fract() == 0.0 && value >= min as f64 && value <= max as f64
            }
            FeatureClass::Continuous => value.is_finite() && (0.0..=1.0).contains(&value),
            FeatureClass::Constant(c) => value == c,
        }
    }

    /// Value a truncated-away position decodes to.
    pub fn default_value(&self) -> f64 {
        match *self {
            FeatureClass::Binary => 0.0,
            FeatureClass::Categorical { .. } => 0.0,
            FeatureClass::Count { min, .. } => min as f64,
            FeatureClass::Continuous => 0.0,
            FeatureClass::Constant(c) => c,
        }
    }

    /// Uniform draw over the admissible values (over `[0, 1)` for
    /// `Continuous`).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            FeatureClass::Binary => rng.random_range(0..2u8) as f64,
            FeatureClass::Categorical { cardinality } => {
                rng.random_range(0..cardinality) as f64
            }
            FeatureClass::Count { min, max } => rng.random_range(min..=max) as f64,
            FeatureClass::Continuous => rng.random::<f64>(),
            FeatureClass::Constant(c) => c,
        }
    }

    /// Per-position distance: absolute difference for `Continuous`, equality
    /// indicator otherwise.
    pub fn distance(&self, a: f64, b: f64) -> f64 {
        match self {
            FeatureClass::Continuous => (a - b).abs(),
            _ => {
                if a == b {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }

    /// Admissible values other than `current`, for single-feature moves.
    /// `Continuous` offers its extremes; `Constant` offers nothing.
    pub fn alternates(&self, current: f64) -> Vec<f64> {
        let all: Vec<f64> = match *self {
            FeatureClass::Binary => vec![0.0, 1.0],
            FeatureClass::Categorical { cardinality } => {
                (0..cardinality).map(|v| v as f64).collect()
            }
            FeatureClass::Count { min, max } => (min..=max).map(|v| v as f64).collect(),
            FeatureClass::Continuous => vec![0.0, 1.0],
            FeatureClass::Constant(_) => Vec::new(),
        };
        all.into_iter().filter(|&v| v != current).collect()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum EncodingFamily {
    AdjacencyOneHot,
    AdjacencyCategorical,
    AdjacencyContinuous,
    PathOneHot,
    PathCategorical,
    PathContinuous,
}

impl EncodingFamily {
    pub const ALL: [EncodingFamily; 6] = [
        EncodingFamily::AdjacencyOneHot,
        EncodingFamily::AdjacencyCategorical,
        EncodingFamily::AdjacencyContinuous,
        EncodingFamily::PathOneHot,
        EncodingFamily::PathCategorical,
        EncodingFamily::PathContinuous,
    ];

    pub fn is_path_based(self) -> bool {
        matches!(
            self,
            EncodingFamily::PathOneHot
                | EncodingFamily::PathCategorical
                | EncodingFamily::PathContinuous
        )
    }

    pub fn is_one_hot(self) -> bool {
        matches!(
            self,
            EncodingFamily::AdjacencyOneHot | EncodingFamily::PathOneHot
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            EncodingFamily::AdjacencyOneHot => "adjacency-one-hot",
            EncodingFamily::AdjacencyCategorical => "adjacency-categorical",
            EncodingFamily::AdjacencyContinuous => "adjacency-continuous",
            EncodingFamily::PathOneHot => "path-one-hot",
            EncodingFamily::PathCategorical => "path-categorical",
            EncodingFamily::PathContinuous => "path-continuous",
        }
    }
}

/// How much of the full feature vector an encoding keeps.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Truncation {
    Full,
    /// Path families only: drop sequences longer than this many operations.
    PathLength(usize),
    /// One-hot families only: keep this many leading features.
    Bits(usize),
}

/// One concrete encoding: family, truncation, and the space it addresses.
#[derive(Clone, Debug)]
pub struct EncodingKind {
    spec: Arc<SearchSpaceSpec>,
    family: EncodingFamily,
    truncation: Truncation,
    classes: Vec<FeatureClass>,
    /// Longest operation sequence the encoding can express.
    path_cutoff: usize,
}

impl EncodingKind {
    pub fn new(
        spec: Arc<SearchSpaceSpec>,
        family: EncodingFamily,
        truncation: Truncation,
    ) -> Result<Self> {
        let interior = spec.interior_nodes();
        let cutoff = match truncation {
            Truncation::Full | Truncation::Bits(_) => interior,
            Truncation::PathLength(x) => {
                if !family.is_path_based() {
                    return Err(Error::InvalidParameter(format!(
                        "length truncation does not apply to {}",
                        family.name()
                    )));
                }
                if x > interior {
                    return Err(Error::InvalidParameter(format!(
                        "path length cutoff {x} exceeds the {interior} interior nodes"
                    )));
                }
                x
            }
        };
        if matches!(truncation, Truncation::Bits(_)) && !family.is_one_hot() {
            return Err(Error::InvalidParameter(format!(
                "bit truncation only applies to one-hot families, not {}",
                family.name()
            )));
        }

        let full = full_layout(&spec, family, cutoff)?;
        let classes = match truncation {
            Truncation::Bits(b) => {
                if b > full.len() {
                    return Err(Error::InvalidParameter(format!(
                        "bit truncation {b} exceeds the full width {}",
                        full.len()
                    )));
                }
                full[..b].to_vec()
            }
            _ => full,
        };
        Ok(Self {
            spec,
            family,
            truncation,
            classes,
            path_cutoff: cutoff,
        })
    }

    pub fn spec(&self) -> &Arc<SearchSpaceSpec> {
        &self.spec
    }

    pub fn family(&self) -> EncodingFamily {
        self.family
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    /// Feature vector width.
    pub fn dim(&self) -> usize {
        self.classes.len()
    }

    pub fn feature_classes(&self) -> &[FeatureClass] {
        &self.classes
    }

    /// Longest operation sequence expressible, `interior_nodes` unless
    /// length-truncated.
    pub fn path_cutoff(&self) -> usize {
        self.path_cutoff
    }

    /// Checks width and per-position admissibility.
    pub fn validate_features(&self, features: &[f64]) -> Result<()> {
        if features.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} features, encoding has {}",
                features.len(),
                self.dim()
            )));
        }
        for (idx, (&value, class)) in features.iter().zip(&self.classes).enumerate() {
            if !class.admits(value) {
                return Err(Error::MalformedFeatures(format!(
                    "value {value} at position {idx} violates {class:?}"
                )));
            }
        }
        Ok(())
    }

    /// Distance between two valid feature vectors: sum of per-position
    /// distances (equality indicators, absolute differences for continuous
    /// positions).
    pub fn edit_distance(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        if a.len() != self.dim() || b.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} and {} features, encoding has {}",
                a.len(),
                b.len(),
                self.dim()
            )));
        }
        Ok(self
            .classes
            .iter()
            .zip(a.iter().zip(b))
            .map(|(class, (&x, &y))| class.distance(x, y))
            .sum())
    }

    /// Encodes an architecture of the right shape (validity and edge bound
    /// are not required).
    pub fn encode(&self, arch: &Architecture) -> Result<Vec<f64>> {
        let spec = &self.spec;
        if arch.nodes() != spec.nodes() {
            return Err(Error::SpecMismatch(format!(
                "architecture has {} nodes, space has {}",
                arch.nodes(),
                spec.nodes()
            )));
        }
        if let Some(&op) = arch.ops().iter().find(|&&o| (o as usize) >= spec.num_ops()) {
            return Err(Error::SpecMismatch(format!(
                "operation {op} out of range for {} labels",
                spec.num_ops()
            )));
        }
        let full = self.encode_full(arch)?;
        Ok(match self.truncation {
            Truncation::Bits(b) => full[..b].to_vec(),
            _ => full,
        })
    }

    fn encode_full(&self, arch: &Architecture) -> Result<Vec<f64>> {
        let spec = &self.spec;
        let slots = spec.edge_slots();
        let q = spec.num_ops();
        match self.family {
            EncodingFamily::AdjacencyOneHot => {
                let mut v = Vec::with_capacity(slots + spec.nodes());
                for idx in 0..slots {
                    v.push(if arch.edges().contains(idx) { 1.0 } else { 0.0 });
                }
                push_op_block(&mut v, arch, q);
                Ok(v)
            }
            EncodingFamily::AdjacencyCategorical => {
                let occupied: Vec<usize> = arch.edges().iter().collect();
                if occupied.len() > spec.max_edges() {
                    return Err(Error::InvalidArchitecture(format!(
                        "{} edges exceed the {}-slot layout",
                        occupied.len(),
                        spec.max_edges()
                    )));
                }
                let mut v = Vec::with_capacity(spec.max_edges() + spec.nodes());
                for slot in 0..spec.max_edges() {
                    v.push(occupied.get(slot).copied().unwrap_or(slots) as f64);
                }
                push_op_block(&mut v, arch, q);
                Ok(v)
            }
            EncodingFamily::AdjacencyContinuous => {
                let mut v = Vec::with_capacity(slots + spec.nodes() + 1);
                for idx in 0..slots {
                    v.push(if arch.edges().contains(idx) { 1.0 } else { 0.0 });
                }
                push_op_block(&mut v, arch, q);
                v.push(arch.edge_count() as f64);
                Ok(v)
            }
            EncodingFamily::PathOneHot => {
                let width = sequence_slot_count(q, self.path_cutoff)?;
                let mut v = vec![0.0; width];
                for seq in self.present_sequences(arch) {
                    v[path_index(&seq, q)] = 1.0;
                }
                Ok(v)
            }
            EncodingFamily::PathCategorical => {
                let absent = sequence_slot_count(q, self.path_cutoff)?;
                let present: Vec<usize> = self
                    .present_sequences(arch)
                    .iter()
                    .map(|seq| path_index(seq, q))
                    .collect();
                let slots = path_slot_count(spec.interior_nodes(), self.path_cutoff);
                debug_assert!(present.len() <= slots);
                let mut v = Vec::with_capacity(slots);
                for slot in 0..slots {
                    v.push(present.get(slot).copied().unwrap_or(absent) as f64);
                }
                Ok(v)
            }
            EncodingFamily::PathContinuous => {
                let width = sequence_slot_count(q, self.path_cutoff)?;
                let present = self.present_sequences(arch);
                let mut v = vec![0.0; width + 1];
                for seq in &present {
                    v[path_index(seq, q)] = 1.0;
                }
                v[width] = present.len() as f64;
                Ok(v)
            }
        }
    }

    /// Distinct operation sequences of paths within the cutoff, ascending.
    fn present_sequences(&self, arch: &Architecture) -> BTreeSet<Vec<u8>> {
        arch.extract_paths()
            .into_iter()
            .filter(|seq| seq.len() <= self.path_cutoff)
            .collect()
    }

    /// Decodes a feature vector into an architecture of the space's shape.
    ///
    /// Adjacency families reconstruct the structure literally; the result may
    /// still fall outside the space (no input-output path, too many edges),
    /// which callers check with [`SearchSpaceSpec::contains`]. Path families
    /// go through [`realize_path_set`].
    pub fn decode(&self, features: &[f64]) -> Result<Architecture> {
        self.validate_features(features)?;
        let full: Vec<f64> = match self.truncation {
            Truncation::Bits(_) => {
                let layout = full_layout(&self.spec, self.family, self.path_cutoff)?;
                features
                    .iter()
                    .copied()
                    .chain(layout[features.len()..].iter().map(|c| c.default_value()))
                    .collect()
            }
            _ => features.to_vec(),
        };
        self.decode_full(&full)
    }

    fn decode_full(&self, features: &[f64]) -> Result<Architecture> {
        let spec = &self.spec;
        let n = spec.nodes();
        let slots = spec.edge_slots();
        let q = spec.num_ops();
        match self.family {
            EncodingFamily::AdjacencyOneHot => {
                let mut edges = EdgeSet::empty(slots);
                for idx in 0..slots {
                    if features[idx] == 1.0 {
                        edges.insert(idx);
                    }
                }
                Architecture::new(n, edges, read_op_block(&features[slots..], n))
            }
            EncodingFamily::AdjacencyCategorical => {
                let mut edges = EdgeSet::empty(slots);
                for &value in &features[..spec.max_edges()] {
                    let idx = value as usize;
                    if idx < slots {
                        edges.insert(idx);
                    }
                }
                Architecture::new(n, edges, read_op_block(&features[spec.max_edges()..], n))
            }
            EncodingFamily::AdjacencyContinuous => {
                let count = features[slots + n] as usize;
                let mut edges = EdgeSet::empty(slots);
                for idx in top_scoring(&features[..slots], count) {
                    edges.insert(idx);
                }
                Architecture::new(n, edges, read_op_block(&features[slots..slots + n], n))
            }
            EncodingFamily::PathOneHot => {
                let set: BTreeSet<Vec<u8>> = features
                    .iter()
                    .enumerate()
                    .filter(|&(_, &v)| v == 1.0)
                    .map(|(idx, _)| path_sequence(idx, q))
                    .collect();
                realize_path_set(spec, &set)
            }
            EncodingFamily::PathCategorical => {
                let absent = sequence_slot_count(q, self.path_cutoff)?;
                let set: BTreeSet<Vec<u8>> = features
                    .iter()
                    .map(|&v| v as usize)
                    .filter(|&idx| idx < absent)
                    .map(|idx| path_sequence(idx, q))
                    .collect();
                realize_path_set(spec, &set)
            }
            EncodingFamily::PathContinuous => {
                let width = features.len() - 1;
                let count = features[width] as usize;
                let set: BTreeSet<Vec<u8>> = top_scoring(&features[..width], count)
                    .into_iter()
                    .map(|idx| path_sequence(idx, q))
                    .collect();
                realize_path_set(spec, &set)
            }
        }
    }
}

/// Operation features: input marker `q`, interior labels, output marker
/// `q + 1`.
fn push_op_block(v: &mut Vec<f64>, arch: &Architecture, q: usize) {
    v.push(q as f64);
    v.extend(arch.ops().iter().map(|&o| o as f64));
    v.push((q + 1) as f64);
}

fn read_op_block(block: &[f64], nodes: usize) -> Vec<u8> {
    block[1..nodes - 1].iter().map(|&v| v as u8).collect()
}

/// Indices of the `count` highest scores; ties break toward the lower index.
fn top_scoring(scores: &[f64], count: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .expect("scores are finite")
            .then(a.cmp(&b))
    });
    order.truncate(count.min(scores.len()));
    order
}

fn full_layout(
    spec: &SearchSpaceSpec,
    family: EncodingFamily,
    cutoff: usize,
) -> Result<Vec<FeatureClass>> {
    let slots = spec.edge_slots();
    let n = spec.nodes();
    let q = spec.num_ops();
    let op_block = |v: &mut Vec<FeatureClass>| {
        v.push(FeatureClass::Constant(q as f64));
        v.extend(
            std::iter::repeat(FeatureClass::Categorical { cardinality: q }).take(n - 2),
        );
        v.push(FeatureClass::Constant((q + 1) as f64));
    };
    let mut v = Vec::new();
    match family {
        EncodingFamily::AdjacencyOneHot => {
            v.extend(std::iter::repeat(FeatureClass::Binary).take(slots));
            op_block(&mut v);
        }
        EncodingFamily::AdjacencyCategorical => {
            v.extend(
                std::iter::repeat(FeatureClass::Categorical {
                    cardinality: slots + 1,
                })
                .take(spec.max_edges()),
            );
            op_block(&mut v);
        }
        EncodingFamily::AdjacencyContinuous => {
            v.extend(std::iter::repeat(FeatureClass::Continuous).take(slots));
            op_block(&mut v);
            v.push(FeatureClass::Count {
                min: 1,
                max: spec.max_edges(),
            });
        }
        EncodingFamily::PathOneHot => {
            let width = sequence_slot_count(q, cutoff)?;
            v.extend(std::iter::repeat(FeatureClass::Binary).take(width));
        }
        EncodingFamily::PathCategorical => {
            let width = sequence_slot_count(q, cutoff)?;
            let slots = path_slot_count(spec.interior_nodes(), cutoff);
            v.extend(
                std::iter::repeat(FeatureClass::Categorical {
                    cardinality: width + 1,
                })
                .take(slots),
            );
        }
        EncodingFamily::PathContinuous => {
            let width = sequence_slot_count(q, cutoff)?;
            let paths = path_slot_count(spec.interior_nodes(), cutoff);
            v.extend(std::iter::repeat(FeatureClass::Continuous).take(width));
            v.push(FeatureClass::Count {
                min: 0,
                max: paths.min(width),
            });
        }
    }
    Ok(v)
}

/// Number of operation sequences of length at most `max_len` over `num_ops`
/// labels: `sum of num_ops^i for i in 0..=max_len`.
pub fn sequence_slot_count(num_ops: usize, max_len: usize) -> Result<usize> {
    let mut total: u128 = 0;
    let mut term: u128 = 1;
    for _ in 0..=max_len {
        total += term;
        term = term
            .checked_mul(num_ops as u128)
            .ok_or_else(|| Error::InvalidParameter("sequence count overflows".into()))?;
        if total > 1 << 32 {
            return Err(Error::InvalidParameter(format!(
                "{total} sequence slots is beyond any usable width"
            )));
        }
    }
    Ok(total as usize)
}

/// Maximum number of input-output paths with at most `max_len` interior
/// operations: `sum over j <= max_len of C(interior, j)`. Ascending edges
/// make a path's interior set determine it, so paths of length `j` inject
/// into `j`-subsets.
pub fn path_slot_count(interior: usize, max_len: usize) -> usize {
    (0..=max_len.min(interior))
        .map(|j| binomial(interior, j))
        .sum::<u128>() as usize
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Position of an operation sequence in the length-major, lexicographic
/// order. Inverse of [`path_sequence`]; bijective over sequences of values
/// below `num_ops`.
pub fn path_index(seq: &[u8], num_ops: usize) -> usize {
    let mut idx = 0usize;
    // Skip all shorter sequences, then rank within the length block.
    let mut block = 1usize;
    for _ in 0..seq.len() {
        idx += block;
        block *= num_ops;
    }
    let mut rank = 0usize;
    for &op in seq {
        rank = rank * num_ops + op as usize;
    }
    idx + rank
}

/// Sequence at `index` in the length-major, lexicographic order.
pub fn path_sequence(index: usize, num_ops: usize) -> Vec<u8> {
    let mut rest = index;
    let mut len = 0usize;
    let mut block = 1usize;
    while rest >= block {
        rest -= block;
        block *= num_ops;
        len += 1;
    }
    let mut seq = vec![0u8; len];
    for pos in (0..len).rev() {
        seq[pos] = (rest % num_ops) as u8;
        rest /= num_ops;
    }
    seq
}

/// Builds an architecture in `spec` whose input-output paths carry exactly
/// the operation sequences in `set` (as a set; multiplicity is free).
///
/// An empty set yields the edgeless architecture. Otherwise each sequence
/// starts as its own chain and same-operation node pairs are merged greedily
/// whenever the merge keeps the graph acyclic and the sequence set unchanged.
/// If the merged graph does not fit the space, small spaces fall back to an
/// exhaustive scan; everything else is [`Error::NotRealizable`].
pub fn realize_path_set(spec: &SearchSpaceSpec, set: &BTreeSet<Vec<u8>>) -> Result<Architecture> {
    let n = spec.nodes();
    let interior = spec.interior_nodes();
    if set.is_empty() {
        return Architecture::new(
            n,
            EdgeSet::empty(spec.edge_slots()),
            vec![0; interior],
        );
    }
    for seq in set {
        if seq.len() > interior {
            return Err(Error::NotRealizable(format!(
                "a {}-operation sequence cannot fit {} interior nodes",
                seq.len(),
                interior
            )));
        }
        if let Some(&op) = seq.iter().find(|&&o| (o as usize) >= spec.num_ops()) {
            return Err(Error::NotRealizable(format!(
                "operation {op} out of range for {} labels",
                spec.num_ops()
            )));
        }
    }
    // Sequences of length j need pairwise-distinct interior subsets of size
    // j, so more than C(interior, j) of one length can never coexist.
    for len in 1..=interior {
        let count = set.iter().filter(|s| s.len() == len).count() as u128;
        if count > binomial(interior, len) {
            return Err(Error::NotRealizable(format!(
                "{count} distinct sequences of length {len} exceed the space's capacity"
            )));
        }
    }

    let mut graph = SequenceGraph::chains(set);
    graph.merge_to_fixpoint(set);
    if let Some(arch) = graph.embed(spec)? {
        return Ok(arch);
    }
    exhaustive_realization(spec, set)
}

/// Working graph for path realization: explicit input and output plus
/// labeled interior nodes.
struct SequenceGraph {
    /// Operation per interior node; freed slots stay but drop out of `alive`.
    ops: Vec<u8>,
    alive: Vec<bool>,
    /// `edges[u]` holds successors of interior `u`.
    edges: Vec<BTreeSet<Target>>,
    /// Interiors fed directly by the input.
    from_input: BTreeSet<usize>,
    /// Present when the direct input-output edge exists (the empty sequence).
    direct: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
enum Target {
    Interior(usize),
    Output,
}

impl SequenceGraph {
    fn chains(set: &BTreeSet<Vec<u8>>) -> Self {
        let mut g = SequenceGraph {
            ops: Vec::new(),
            alive: Vec::new(),
            edges: Vec::new(),
            from_input: BTreeSet::new(),
            direct: false,
        };
        for seq in set {
            if seq.is_empty() {
                g.direct = true;
                continue;
            }
            let start = g.ops.len();
            for (offset, &op) in seq.iter().enumerate() {
                g.ops.push(op);
                g.alive.push(true);
                let mut out = BTreeSet::new();
                if offset + 1 == seq.len() {
                    out.insert(Target::Output);
                } else {
                    out.insert(Target::Interior(start + offset + 1));
                }
                g.edges.push(out);
            }
            g.from_input.insert(start);
        }
        g
    }

    fn live_interiors(&self) -> Vec<usize> {
        (0..self.ops.len()).filter(|&u| self.alive[u]).collect()
    }

    /// Distinct operation sequences over all input-output paths, or `None`
    /// when a cycle makes them unbounded.
    fn sequence_set(&self) -> Option<BTreeSet<Vec<u8>>> {
        if self.has_cycle() {
            return None;
        }
        let mut out = BTreeSet::new();
        if self.direct {
            out.insert(Vec::new());
        }
        let mut acc = Vec::new();
        for &start in &self.from_input {
            self.walk(start, &mut acc, &mut out);
        }
        Some(out)
    }

    fn walk(&self, u: usize, acc: &mut Vec<u8>, out: &mut BTreeSet<Vec<u8>>) {
        acc.push(self.ops[u]);
        for &t in &self.edges[u] {
            match t {
                Target::Output => {
                    out.insert(acc.clone());
                }
                Target::Interior(v) => self.walk(v, acc, out),
            }
        }
        acc.pop();
    }

    fn has_cycle(&self) -> bool {
        // 0 = unseen, 1 = on stack, 2 = done.
        let mut state = vec![0u8; self.ops.len()];
        fn visit(g: &SequenceGraph, u: usize, state: &mut [u8]) -> bool {
            if state[u] == 1 {
                return true;
            }
            if state[u] == 2 {
                return false;
            }
            state[u] = 1;
            for &t in &g.edges[u] {
                if let Target::Interior(v) = t {
                    if visit(g, v, state) {
                        return true;
                    }
                }
            }
            state[u] = 2;
            false
        }
        self.live_interiors()
            .into_iter()
            .any(|u| state[u] == 0 && visit(self, u, &mut state))
    }

    /// Folds `v` into `u` (same operation), rewiring every edge. Fails and
    /// leaves `self` untouched when the fold introduces a cycle or changes
    /// the sequence set.
    fn try_merge(&mut self, u: usize, v: usize, target: &BTreeSet<Vec<u8>>) -> bool {
        // Folding adjacent nodes erases the edge between them, which always
        // shortens some path.
        if self.edges[u].contains(&Target::Interior(v))
            || self.edges[v].contains(&Target::Interior(u))
        {
            return false;
        }
        let saved_edges = self.edges.clone();
        let saved_from_input = self.from_input.clone();

        let vs_out: Vec<Target> = self.edges[v].iter().copied().collect();
        self.edges[u].extend(vs_out);
        self.edges[v].clear();
        for w in 0..self.edges.len() {
            if self.edges[w].remove(&Target::Interior(v)) {
                self.edges[w].insert(Target::Interior(u));
            }
        }
        if self.from_input.remove(&v) {
            self.from_input.insert(u);
        }
        self.alive[v] = false;

        let ok = self.sequence_set().is_some_and(|s| s == *target);
        if !ok {
            self.edges = saved_edges;
            self.from_input = saved_from_input;
            self.alive[v] = true;
        }
        ok
    }

    fn merge_to_fixpoint(&mut self, target: &BTreeSet<Vec<u8>>) {
        loop {
            let live = self.live_interiors();
            let mut merged = false;
            'outer: for (a, &u) in live.iter().enumerate() {
                for &v in &live[a + 1..] {
                    if self.ops[u] == self.ops[v] && self.try_merge(u, v, target) {
                        merged = true;
                        break 'outer;
                    }
                }
            }
            if !merged {
                return;
            }
        }
    }

    /// Relabels into ascending node order inside `spec`. `Ok(None)` when the
    /// graph needs more interiors or edges than the space allows.
    fn embed(&self, spec: &SearchSpaceSpec) -> Result<Option<Architecture>> {
        let live = self.live_interiors();
        if live.len() > spec.interior_nodes() {
            return Ok(None);
        }
        // Kahn's order, smallest original index first, keeps the embedding
        // deterministic.
        let mut indegree: std::collections::BTreeMap<usize, usize> =
            live.iter().map(|&u| (u, 0)).collect();
        for &u in &live {
            for &t in &self.edges[u] {
                if let Target::Interior(v) = t {
                    *indegree.get_mut(&v).expect("live successor") += 1;
                }
            }
        }
        let mut order = Vec::with_capacity(live.len());
        let mut ready: BTreeSet<usize> = indegree
            .iter()
            .filter(|&(_, &d)| d == 0)
            .map(|(&u, _)| u)
            .collect();
        while let Some(&u) = ready.iter().next() {
            ready.remove(&u);
            order.push(u);
            for &t in &self.edges[u] {
                if let Target::Interior(v) = t {
                    let d = indegree.get_mut(&v).expect("live successor");
                    *d -= 1;
                    if *d == 0 {
                        ready.insert(v);
                    }
                }
            }
        }
        debug_assert_eq!(order.len(), live.len(), "merge keeps the graph acyclic");

        let n = spec.nodes();
        let mut label = std::collections::BTreeMap::new();
        for (pos, &u) in order.iter().enumerate() {
            label.insert(u, pos + 1);
        }
        let mut edges = EdgeSet::empty(spec.edge_slots());
        if self.direct {
            edges.insert(edge_index(n, 0, n - 1));
        }
        for &u in &self.from_input {
            edges.insert(edge_index(n, 0, label[&u]));
        }
        for &u in &live {
            for &t in &self.edges[u] {
                let j = match t {
                    Target::Output => n - 1,
                    Target::Interior(v) => label[&v],
                };
                edges.insert(edge_index(n, label[&u], j));
            }
        }
        if edges.len() > spec.max_edges() {
            return Ok(None);
        }
        let mut ops = vec![0u8; spec.interior_nodes()];
        for &u in &live {
            ops[label[&u] - 1] = self.ops[u];
        }
        Ok(Some(Architecture::new(n, edges, ops)?))
    }
}

/// Scans the whole space in enumeration order for a member realizing `set`.
/// Only runs when the raw combination count is small.
fn exhaustive_realization(
    spec: &SearchSpaceSpec,
    set: &BTreeSet<Vec<u8>>,
) -> Result<Architecture> {
    let slots = spec.edge_slots();
    let combos = if slots < 64 {
        (1u128 << slots).saturating_mul(
            (spec.num_ops() as u128).saturating_pow(spec.interior_nodes() as u32),
        )
    } else {
        u128::MAX
    };
    if combos > EXHAUSTIVE_REALIZATION_LIMIT {
        return Err(Error::NotRealizable(format!(
            "merge construction failed and the space is too large to scan ({combos} combinations)"
        )));
    }
    for arch in crate::search_space::enumerate_space(spec, crate::search_space::Enumeration::Members)? {
        let present: BTreeSet<Vec<u8>> = arch.extract_paths().into_iter().collect();
        if present == *set {
            return Ok(arch);
        }
    }
    Err(Error::NotRealizable(
        "no member carries exactly this sequence set".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequence_indexing_matches_hand_table() {
        // num_ops = 3: empty, length-1, length-2, then length-3 blocks.
        let table: [(&[u8], usize); 8] = [
            (&[], 0),
            (&[0], 1),
            (&[1], 2),
            (&[2], 3),
            (&[0, 0], 4),
            (&[2, 2], 12),
            (&[0, 0, 0], 13),
            (&[2, 2, 2], 39),
        ];
        for (seq, idx) in table {
            assert_eq!(path_index(seq, 3), idx, "{seq:?}");
            assert_eq!(path_sequence(idx, 3), seq);
        }
    }

    #[test]
    fn sequence_indexing_is_bijective() {
        for num_ops in 1..5usize {
            let width = sequence_slot_count(num_ops, 3).unwrap();
            for idx in 0..width {
                let seq = path_sequence(idx, num_ops);
                assert!(seq.len() <= 3);
                assert_eq!(path_index(&seq, num_ops), idx);
            }
        }
    }

    #[test]
    fn slot_counts_by_hand() {
        assert_eq!(sequence_slot_count(3, 0).unwrap(), 1);
        assert_eq!(sequence_slot_count(3, 1).unwrap(), 4);
        assert_eq!(sequence_slot_count(3, 3).unwrap(), 40);
        assert_eq!(sequence_slot_count(3, 5).unwrap(), 364);
        assert_eq!(sequence_slot_count(1, 4).unwrap(), 5);
        assert_eq!(path_slot_count(5, 2), 16);
        assert_eq!(path_slot_count(5, 5), 32);
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(3, 5), 0);
    }

    #[test]
    fn realization_reuses_shared_prefixes() {
        let spec = SearchSpaceSpec::new(5, 10, 3).unwrap();
        let set: BTreeSet<Vec<u8>> = [vec![], vec![0], vec![0, 0]].into_iter().collect();
        let arch = realize_path_set(&spec, &set).unwrap();
        assert!(spec.contains(&arch));
        let realized: BTreeSet<Vec<u8>> = arch.extract_paths().into_iter().collect();
        assert_eq!(realized, set);
    }

    #[test]
    fn realization_shares_nodes_across_sequences() {
        // Three sequences fit into two interiors: an op-0 node feeding both
        // the output and an op-1 node.
        let spec = SearchSpaceSpec::new(4, 6, 2).unwrap();
        let set: BTreeSet<Vec<u8>> = [vec![0], vec![1], vec![0, 1]].into_iter().collect();
        let arch = realize_path_set(&spec, &set).unwrap();
        assert!(spec.contains(&arch));
        let realized: BTreeSet<Vec<u8>> = arch.extract_paths().into_iter().collect();
        assert_eq!(realized, set);
    }

    #[test]
    fn realization_rejects_impossible_sets() {
        let spec = SearchSpaceSpec::new(4, 6, 2).unwrap();
        // Both orderings of the two labels cannot coexist: the two interiors
        // pass any length-2 path in index order.
        let set: BTreeSet<Vec<u8>> = [vec![0, 1], vec![1, 0]].into_iter().collect();
        assert!(matches!(
            realize_path_set(&spec, &set),
            Err(Error::NotRealizable(_))
        ));
        let too_long: BTreeSet<Vec<u8>> = [vec![0, 1, 0]].into_iter().collect();
        assert!(realize_path_set(&spec, &too_long).is_err());
    }

    #[test]
    fn empty_set_realizes_the_edgeless_graph() {
        let spec = SearchSpaceSpec::new(5, 10, 3).unwrap();
        let arch = realize_path_set(&spec, &BTreeSet::new()).unwrap();
        assert_eq!(arch.edge_count(), 0);
        assert!(!arch.is_valid());
    }

    #[test]
    fn top_scoring_breaks_ties_low() {
        assert_eq!(top_scoring(&[0.5, 0.9, 0.5, 0.1], 2), vec![1, 0]);
        assert_eq!(top_scoring(&[1.0, 1.0, 1.0], 2), vec![0, 1]);
        assert_eq!(top_scoring(&[0.2], 5), vec![0]);
    }
}

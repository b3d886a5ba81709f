//! Labeled-DAG search spaces: architectures, validity, path extraction, and
//! canonical equivalence classes.
//!
//! An architecture on `n` ordered nodes may contain a directed edge `i -> j`
//! only when `i < j`. Node 0 is the input, node `n - 1` the output, and each
//! interior node `1..n-1` carries one operation label. The graph computes
//! something only if a directed input-to-output path exists; nodes off every
//! such path are dead weight. Two architectures are equivalent when pruning
//! dead nodes and relabeling the surviving interiors gives the same labeled
//! graph. [`Architecture::canonical_key`] assigns every class a unique string
//! key, and [`canonical_representative`] maps a key back to one fixed member
//! of the class inside a given space.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;

use crate::{Error, Result};

/// Interior-node limit for the brute-force relabeling search inside
/// [`Architecture::canonical_key`] (8! = 40320 candidate orders).
const MAX_CANONICAL_INTERIORS: usize = 8;

/// Upper bound on raw `(edge set, op assignment)` combinations that
/// [`enumerate_space`] will walk.
const MAX_ENUMERATION: u128 = 20_000_000;

/// Number of upper-triangle edge slots for `nodes` nodes.
pub fn edge_slot_count(nodes: usize) -> usize {
    nodes * (nodes - 1) / 2
}

/// Row-major upper-triangle index of edge `i -> j`. Requires `i < j < nodes`.
pub fn edge_index(nodes: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < nodes);
    i * (2 * nodes - i - 1) / 2 + (j - i - 1)
}

/// Endpoints `(i, j)` of the edge slot at `index`. Inverse of [`edge_index`].
pub fn edge_endpoints(nodes: usize, index: usize) -> (usize, usize) {
    debug_assert!(index < edge_slot_count(nodes));
    let mut rest = index;
    for i in 0..nodes - 1 {
        let row = nodes - 1 - i;
        if rest < row {
            return (i, i + 1 + rest);
        }
        rest -= row;
    }
    unreachable!("edge index out of range")
}

/// Shape of a search space: node count, an upper bound on edges per member,
/// and the number of operation labels.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SearchSpaceSpec {
    nodes: usize,
    max_edges: usize,
    num_ops: usize,
}

impl SearchSpaceSpec {
    pub fn new(nodes: usize, max_edges: usize, num_ops: usize) -> Result<Self> {
        if nodes < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 nodes, got {nodes}"
            )));
        }
        let slots = edge_slot_count(nodes);
        if max_edges == 0 || max_edges > slots {
            return Err(Error::InvalidParameter(format!(
                "max_edges must be in 1..={slots} for {nodes} nodes, got {max_edges}"
            )));
        }
        if num_ops == 0 || num_ops > 255 {
            return Err(Error::InvalidParameter(format!(
                "num_ops must be in 1..=255, got {num_ops}"
            )));
        }
        Ok(Self {
            nodes,
            max_edges,
            num_ops,
        })
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn max_edges(&self) -> usize {
        self.max_edges
    }

    pub fn num_ops(&self) -> usize {
        self.num_ops
    }

    /// Number of interior nodes, `nodes - 2`.
    pub fn interior_nodes(&self) -> usize {
        self.nodes - 2
    }

    /// Number of upper-triangle edge slots, `nodes * (nodes - 1) / 2`.
    pub fn edge_slots(&self) -> usize {
        edge_slot_count(self.nodes)
    }

    /// Largest possible number of interior operations on a single path.
    pub fn max_path_ops(&self) -> usize {
        self.nodes - 2
    }

    /// Number of input-output paths in the complete graph on `nodes` nodes,
    /// the maximum over all members. Counted by dynamic programming; equals
    /// `2^(nodes - 2)`.
    pub fn max_paths(&self) -> u128 {
        let mut dp = vec![0u128; self.nodes];
        dp[0] = 1;
        for j in 1..self.nodes {
            dp[j] = dp[..j].iter().sum();
        }
        dp[self.nodes - 1]
    }

    /// Whether `arch` is a member: matching shape, operation labels in range,
    /// edge count within bound, and a directed input-output path present.
    pub fn contains(&self, arch: &Architecture) -> bool {
        arch.nodes == self.nodes
            && arch.ops.iter().all(|&o| (o as usize) < self.num_ops)
            && arch.edge_count() <= self.max_edges
            && arch.is_valid()
    }
}

/// Set of occupied upper-triangle edge slots, packed into 64-bit words.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct EdgeSet {
    slots: usize,
    words: Vec<u64>,
}

impl EdgeSet {
    pub fn empty(slots: usize) -> Self {
        Self {
            slots,
            words: vec![0; slots.div_ceil(64)],
        }
    }

    /// All `slots` edges present.
    pub fn complete(slots: usize) -> Self {
        let mut set = Self::empty(slots);
        for idx in 0..slots {
            set.insert(idx);
        }
        set
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn contains(&self, index: usize) -> bool {
        debug_assert!(index < self.slots);
        self.words[index / 64] >> (index % 64) & 1 == 1
    }

    pub fn insert(&mut self, index: usize) {
        debug_assert!(index < self.slots);
        self.words[index / 64] |= 1 << (index % 64);
    }

    pub fn remove(&mut self, index: usize) {
        debug_assert!(index < self.slots);
        self.words[index / 64] &= !(1 << (index % 64));
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Occupied slot indices in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let tz = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(w * 64 + tz)
            })
        })
    }
}

/// One architecture: ordered nodes, ascending directed edges, and an
/// operation label per interior node.
///
/// The text form is `nodes;edge-bits;op-csv`, where `edge-bits` lists the
/// upper-triangle slots in row-major order ('1' = present) and `op-csv` holds
/// the interior labels. `4;110011;0,1` is the 4-node graph with edges
/// `0->1, 0->2, 1->3, 2->3` and operations 0 and 1.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Architecture {
    nodes: usize,
    edges: EdgeSet,
    ops: Vec<u8>,
}

impl Architecture {
    pub fn new(nodes: usize, edges: EdgeSet, ops: Vec<u8>) -> Result<Self> {
        if nodes < 2 {
            return Err(Error::InvalidArchitecture(format!(
                "need at least 2 nodes, got {nodes}"
            )));
        }
        if edges.slots() != edge_slot_count(nodes) {
            return Err(Error::InvalidArchitecture(format!(
                "edge set has {} slots, {} nodes need {}",
                edges.slots(),
                nodes,
                edge_slot_count(nodes)
            )));
        }
        if ops.len() != nodes - 2 {
            return Err(Error::InvalidArchitecture(format!(
                "{} operation labels for {} interior nodes",
                ops.len(),
                nodes - 2
            )));
        }
        Ok(Self { nodes, edges, ops })
    }

    pub fn from_edge_list(nodes: usize, edges: &[(usize, usize)], ops: Vec<u8>) -> Result<Self> {
        let mut set = EdgeSet::empty(edge_slot_count(nodes));
        for &(i, j) in edges {
            if i >= j || j >= nodes {
                return Err(Error::InvalidArchitecture(format!(
                    "edge {i} -> {j} is not ascending within {nodes} nodes"
                )));
            }
            set.insert(edge_index(nodes, i, j));
        }
        Self::new(nodes, set, ops)
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn edges(&self) -> &EdgeSet {
        &self.edges
    }

    pub fn ops(&self) -> &[u8] {
        &self.ops
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.contains(edge_index(self.nodes, i, j))
    }

    /// Whether a directed path connects the input to the output.
    pub fn is_valid(&self) -> bool {
        self.reach_from_input()[self.nodes - 1]
    }

    /// Number of directed input-output paths, counted by dynamic programming.
    pub fn path_count(&self) -> u128 {
        let mut dp = vec![0u128; self.nodes];
        dp[0] = 1;
        for j in 1..self.nodes {
            dp[j] = (0..j).filter(|&i| self.has_edge(i, j)).map(|i| dp[i]).sum();
        }
        dp[self.nodes - 1]
    }

    /// Operation sequences along every input-output path, sorted by length
    /// and then lexicographically. One entry per path, so two paths through
    /// distinct nodes with equal labels both appear. The direct edge, if
    /// present, contributes an empty sequence.
    pub fn extract_paths(&self) -> Vec<Vec<u8>> {
        let mut out = Vec::new();
        let mut acc = Vec::new();
        self.walk_paths(0, &mut acc, &mut out);
        out.sort_unstable_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out
    }

    fn walk_paths(&self, v: usize, acc: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if v == self.nodes - 1 {
            out.push(acc.clone());
            return;
        }
        if v > 0 {
            acc.push(self.ops[v - 1]);
        }
        for j in v + 1..self.nodes {
            if self.has_edge(v, j) {
                self.walk_paths(j, acc, out);
            }
        }
        if v > 0 {
            acc.pop();
        }
    }

    fn reach_from_input(&self) -> Vec<bool> {
        let mut fwd = vec![false; self.nodes];
        fwd[0] = true;
        for j in 1..self.nodes {
            fwd[j] = (0..j).any(|i| fwd[i] && self.has_edge(i, j));
        }
        fwd
    }

    fn reach_to_output(&self) -> Vec<bool> {
        let n = self.nodes;
        let mut bwd = vec![false; n];
        bwd[n - 1] = true;
        for i in (0..n - 1).rev() {
            bwd[i] = (i + 1..n).any(|j| bwd[j] && self.has_edge(i, j));
        }
        bwd
    }

    /// Canonical key of this architecture's equivalence class.
    ///
    /// Nodes off every input-output path are pruned, the survivors are
    /// compacted, and the lexicographically smallest `(edge bits, ops)` over
    /// all ascending-edge relabelings of the pruned interiors is rendered in
    /// the text form. Every architecture without an input-output path maps to
    /// the single key `2;0;`.
    ///
    /// Fails with [`Error::SpaceTooLarge`] when more than
    /// `MAX_CANONICAL_INTERIORS` interior nodes survive pruning.
    pub fn canonical_key(&self) -> Result<CanonicalKey> {
        let n = self.nodes;
        let fwd = self.reach_from_input();
        if !fwd[n - 1] {
            return Ok(CanonicalKey::invalid());
        }
        let bwd = self.reach_to_output();
        let kept: Vec<usize> = (0..n).filter(|&v| fwd[v] && bwd[v]).collect();
        let m = kept.len();
        let interior = m - 2;
        if interior > MAX_CANONICAL_INTERIORS {
            return Err(Error::SpaceTooLarge(format!(
                "{interior} interior nodes survive pruning, relabeling search handles at most {MAX_CANONICAL_INTERIORS}"
            )));
        }

        // Compact relabeling preserves order, so every surviving edge stays
        // ascending. Edges between surviving nodes always lie on some
        // input-output path.
        let mut rank = vec![usize::MAX; n];
        for (r, &v) in kept.iter().enumerate() {
            rank[v] = r;
        }
        let mut edges = Vec::new();
        for idx in self.edges.iter() {
            let (i, j) = edge_endpoints(n, idx);
            if rank[i] != usize::MAX && rank[j] != usize::MAX {
                edges.push((rank[i], rank[j]));
            }
        }
        let ops: Vec<u8> = kept[1..m - 1].iter().map(|&v| self.ops[v - 1]).collect();

        let slots = edge_slot_count(m);
        let mut best: Option<(Vec<bool>, Vec<u8>)> = None;
        'perms: for perm in (1..=interior).permutations(interior) {
            // perm[p - 1] is the new label of the interior currently at p.
            let relabel = |v: usize| {
                if v == 0 || v == m - 1 {
                    v
                } else {
                    perm[v - 1]
                }
            };
            let mut bits = vec![false; slots];
            for &(i, j) in &edges {
                let (a, b) = (relabel(i), relabel(j));
                if a >= b {
                    continue 'perms;
                }
                bits[edge_index(m, a, b)] = true;
            }
            let mut relabeled_ops = vec![0u8; interior];
            for (p, &op) in ops.iter().enumerate() {
                relabeled_ops[perm[p] - 1] = op;
            }
            let candidate = (bits, relabeled_ops);
            if best.as_ref().is_none_or(|b| candidate < *b) {
                best = Some(candidate);
            }
        }
        // The identity relabeling always qualifies.
        let (bits, ops) = best.expect("identity relabeling keeps edges ascending");
        Ok(CanonicalKey(render_text(m, &bits, &ops)))
    }

    /// Text form `nodes;edge-bits;op-csv`.
    pub fn to_text(&self) -> String {
        let bits: Vec<bool> = (0..self.edges.slots())
            .map(|idx| self.edges.contains(idx))
            .collect();
        render_text(self.nodes, &bits, &self.ops)
    }

    /// Parses the text form. Shape errors surface as
    /// [`Error::InvalidArchitecture`]; membership in a particular space is
    /// not checked here.
    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidArchitecture(format!("{msg} in {text:?}"));
        let mut parts = text.split(';');
        let (Some(head), Some(bits), Some(ops), None) =
            (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(bad("expected nodes;edge-bits;op-csv"));
        };
        let nodes: usize = head.parse().map_err(|_| bad("unreadable node count"))?;
        if nodes < 2 {
            return Err(bad("need at least 2 nodes"));
        }
        let slots = edge_slot_count(nodes);
        if bits.len() != slots {
            return Err(bad(&format!("expected {slots} edge bits")));
        }
        let mut edges = EdgeSet::empty(slots);
        for (idx, c) in bits.chars().enumerate() {
            match c {
                '1' => edges.insert(idx),
                '0' => {}
                _ => return Err(bad("edge bits must be 0 or 1")),
            }
        }
        let ops = if ops.is_empty() {
            Vec::new()
        } else {
            ops.split(',')
                .map(|s| s.parse::<u8>())
                .collect::<std::result::Result<Vec<u8>, _>>()
                .map_err(|_| bad("unreadable operation label"))?
        };
        if ops.len() != nodes - 2 {
            return Err(bad(&format!("expected {} operation labels", nodes - 2)));
        }
        Self::new(nodes, edges, ops)
    }
}

fn render_text(nodes: usize, bits: &[bool], ops: &[u8]) -> String {
    let bit_str: String = bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
    let op_str = ops.iter().map(u8::to_string).join(",");
    format!("{nodes};{bit_str};{op_str}")
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_text(s)
    }
}

/// Key identifying one equivalence class: the text form of the pruned,
/// minimally relabeled graph.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct CanonicalKey(String);

impl CanonicalKey {
    /// The class of every architecture without an input-output path.
    pub fn invalid() -> Self {
        CanonicalKey("2;0;".to_string())
    }

    pub fn is_invalid_class(&self) -> bool {
        self.0 == "2;0;"
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }

    /// Parses a key from its text form, normalizing through the pruned
    /// graph's own canonical key so that equal classes compare equal.
    pub fn parse(text: &str) -> Result<Self> {
        Architecture::from_text(text)?.canonical_key()
    }

    /// Nodes surviving pruning, including input and output.
    pub fn pruned_node_count(&self) -> usize {
        self.0
            .split(';')
            .next()
            .and_then(|h| h.parse().ok())
            .expect("canonical keys start with a node count")
    }

    /// Edges surviving pruning.
    pub fn pruned_edge_count(&self) -> usize {
        self.0
            .split(';')
            .nth(1)
            .map(|bits| bits.bytes().filter(|&b| b == b'1').count())
            .expect("canonical keys carry an edge segment")
    }
}

impl fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Fixed class member inside `spec` for a canonical `key`: pruned interiors
/// keep their labels, the output moves to node `nodes - 1`, and left-over
/// interiors sit isolated with operation 0.
///
/// The key for the invalid class yields the edgeless (hence invalid) member.
/// Keys needing more nodes, more edges, or more operation labels than `spec`
/// offers fail with [`Error::SpecMismatch`].
pub fn canonical_representative(
    spec: &SearchSpaceSpec,
    key: &CanonicalKey,
) -> Result<Architecture> {
    let pruned = Architecture::from_text(key.as_str())?;
    let n = spec.nodes();
    let m = pruned.nodes();
    if m > n {
        return Err(Error::SpecMismatch(format!(
            "key {key} spans {m} nodes, space has {n}"
        )));
    }
    if pruned.edge_count() > spec.max_edges() {
        return Err(Error::SpecMismatch(format!(
            "key {key} has {} edges, space allows {}",
            pruned.edge_count(),
            spec.max_edges()
        )));
    }
    if let Some(&op) = pruned.ops().iter().find(|&&o| o as usize >= spec.num_ops()) {
        return Err(Error::SpecMismatch(format!(
            "key {key} uses operation {op}, space has {}",
            spec.num_ops()
        )));
    }
    let embed = |v: usize| if v == m - 1 { n - 1 } else { v };
    let mut edges = EdgeSet::empty(spec.edge_slots());
    for idx in pruned.edges().iter() {
        let (i, j) = edge_endpoints(m, idx);
        edges.insert(edge_index(n, embed(i), embed(j)));
    }
    let mut ops = vec![0u8; n - 2];
    ops[..m - 2].copy_from_slice(pruned.ops());
    Architecture::new(n, edges, ops)
}

/// What [`enumerate_space`] walks and returns.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Enumeration {
    /// Every valid member, in edge-mask-major then op-lexicographic order.
    Members,
    /// One canonical representative per equivalence class, ordered by key.
    Classes,
    /// Members whose edge set is complete, varying operations only. Each is
    /// its own class because only the identity relabeling keeps a complete
    /// edge set ascending.
    CompleteEdgeOps,
}

/// Walks the whole space. Fails with [`Error::SpaceTooLarge`] when the raw
/// combination count exceeds an internal bound (about 2e7).
pub fn enumerate_space(spec: &SearchSpaceSpec, mode: Enumeration) -> Result<Vec<Architecture>> {
    let n = spec.nodes();
    let slots = spec.edge_slots();
    let interior = spec.interior_nodes();
    let ops_combos = (spec.num_ops() as u128)
        .checked_pow(interior as u32)
        .ok_or_else(|| Error::SpaceTooLarge("operation assignments overflow u128".into()))?;

    if mode == Enumeration::CompleteEdgeOps {
        if spec.max_edges() < slots {
            return Err(Error::InvalidParameter(format!(
                "complete edge set needs max_edges {} but space allows {}",
                slots,
                spec.max_edges()
            )));
        }
        if ops_combos > MAX_ENUMERATION {
            return Err(Error::SpaceTooLarge(format!(
                "{ops_combos} operation assignments"
            )));
        }
        let edges = EdgeSet::complete(slots);
        return Ok(op_assignments(spec)
            .map(|ops| Architecture::new(n, edges.clone(), ops).expect("enumerated shape"))
            .collect());
    }

    if slots >= 64 {
        return Err(Error::SpaceTooLarge(format!("{slots} edge slots")));
    }
    let combos = (1u128 << slots).saturating_mul(ops_combos);
    if combos > MAX_ENUMERATION {
        return Err(Error::SpaceTooLarge(format!("{combos} raw combinations")));
    }

    let mut members = Vec::new();
    for mask in 0u64..1 << slots {
        if (mask.count_ones() as usize) > spec.max_edges() {
            continue;
        }
        let mut edges = EdgeSet::empty(slots);
        for idx in 0..slots {
            if mask >> idx & 1 == 1 {
                edges.insert(idx);
            }
        }
        for ops in op_assignments(spec) {
            let arch = Architecture::new(n, edges.clone(), ops).expect("enumerated shape");
            if arch.is_valid() {
                members.push(arch);
            }
        }
    }

    match mode {
        Enumeration::Members => Ok(members),
        Enumeration::Classes => {
            let mut classes = std::collections::BTreeMap::new();
            for arch in members {
                let key = arch.canonical_key()?;
                classes.entry(key).or_insert(());
            }
            classes
                .into_keys()
                .map(|key| canonical_representative(spec, &key))
                .collect()
        }
        Enumeration::CompleteEdgeOps => unreachable!("handled above"),
    }
}

/// All interior operation assignments in lexicographic order.
fn op_assignments(spec: &SearchSpaceSpec) -> impl Iterator<Item = Vec<u8>> + '_ {
    let interior = spec.interior_nodes();
    let q = spec.num_ops() as u8;
    let mut current = Some(vec![0u8; interior]);
    std::iter::from_fn(move || {
        let out = current.clone()?;
        let next = current.as_mut().unwrap();
        let mut pos = interior;
        loop {
            if pos == 0 {
                current = None;
                break;
            }
            pos -= 1;
            if next[pos] + 1 < q {
                next[pos] += 1;
                next[pos + 1..].fill(0);
                break;
            }
        }
        Some(out)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_indexing_round_trips() {
        for n in 2..10 {
            let mut next = 0;
            for i in 0..n {
                for j in i + 1..n {
                    assert_eq!(edge_index(n, i, j), next);
                    assert_eq!(edge_endpoints(n, next), (i, j));
                    next += 1;
                }
            }
            assert_eq!(next, edge_slot_count(n));
        }
    }

    #[test]
    fn validity_needs_a_through_path() {
        let a = Architecture::from_edge_list(4, &[(0, 1), (1, 3)], vec![0, 0]).unwrap();
        assert!(a.is_valid());
        let b = Architecture::from_edge_list(4, &[(0, 1), (2, 3)], vec![0, 0]).unwrap();
        assert!(!b.is_valid());
        let c = Architecture::from_edge_list(4, &[], vec![0, 0]).unwrap();
        assert!(!c.is_valid());
    }

    #[test]
    fn invalid_members_share_one_class() {
        let b = Architecture::from_edge_list(4, &[(0, 1), (2, 3)], vec![1, 1]).unwrap();
        let c = Architecture::from_edge_list(5, &[(1, 2)], vec![0, 1, 2]).unwrap();
        assert_eq!(b.canonical_key().unwrap(), CanonicalKey::invalid());
        assert_eq!(c.canonical_key().unwrap(), CanonicalKey::invalid());
        assert!(CanonicalKey::invalid().is_invalid_class());
    }

    #[test]
    fn op_assignments_cover_lexicographically() {
        let spec = SearchSpaceSpec::new(4, 6, 3).unwrap();
        let all: Vec<Vec<u8>> = op_assignments(&spec).collect();
        assert_eq!(all.len(), 9);
        assert_eq!(all[0], vec![0, 0]);
        assert_eq!(all[1], vec![0, 1]);
        assert_eq!(all[8], vec![2, 2]);
    }

    #[test]
    fn key_invariants() {
        let key = CanonicalKey::parse("4;110011;1,0").unwrap();
        assert_eq!(key.pruned_node_count(), 4);
        assert_eq!(key.pruned_edge_count(), 4);
    }
}

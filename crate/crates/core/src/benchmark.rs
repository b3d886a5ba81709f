//! Tabular benchmarks: a lookup table from canonical architecture classes to
//! recorded validation error, test error, and training time.
//!
//! Records are keyed by [`CanonicalKey`], so any two equivalent
//! architectures resolve to the same entry. Benchmarks come from a JSONL
//! file or from the deterministic synthetic generator, which scores every
//! class of a space from a seed: short paths carry seeded quality weights,
//! depth and edge count carry small penalties, and the test error adds
//! seeded observation noise. Identical spec and seed always rebuild the
//! identical table.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::encodings::{path_index, EncodingKind};
use crate::exec::{self, derive_seed};
use crate::search_space::{
    canonical_representative, enumerate_space, Architecture, CanonicalKey, Enumeration,
    SearchSpaceSpec,
};
use crate::{Error, Result};

const BASE_ERROR: f64 = 65.0;
/// Paths with more interior operations than this contribute no quality
/// weight, so edges serving only deep routes are pure cost.
const PATH_WEIGHT_MAX_LEN: usize = 2;
/// Quality multiplier by interior-operation count; the direct edge (no
/// operations) carries the most weight.
const LENGTH_GAIN: [f64; PATH_WEIGHT_MAX_LEN + 1] = [3.5, 2.5, 1.75];
/// Scale of the per-sequence ruggedness on top of the positional table.
/// Kept well under the table-driven move gains so greedy single-feature
/// improvement chains are not trapped by noise.
const PATH_JITTER: f64 = 0.2;
const DEPTH_PENALTY: f64 = 2.0;
/// Scaled by edge count over capacity, so an edge earns its keep only by
/// carrying short-path quality. Redundant edges then leave strictly
/// improving single-edge moves open.
const EDGE_PENALTY: f64 = 15.0;
const VAL_ERROR_RANGE: (f64, f64) = (2.0, 95.0);
const TEST_NOISE_SD: f64 = 0.5;
const ERROR_RANGE: (f64, f64) = (0.0, 100.0);
const TRAIN_TIME_RANGE: (f64, f64) = (60.0, 600.0);
/// Seed-stream index for record noise, clear of the per-sequence weight
/// streams (which use small sequence positions).
const NOISE_STREAM: u64 = u64::MAX;
/// Base of the seed streams for the positional operation-quality table,
/// clear of both the sequence streams and the noise stream.
const OP_TABLE_STREAM: u64 = 1 << 40;

#[derive(Clone, Copy, PartialEq, Debug)]
pub struct BenchRecord {
    pub val_error: f64,
    pub test_error: f64,
    pub train_time: f64,
}

#[derive(Clone, Debug)]
pub struct BenchmarkMeta {
    pub name: String,
    pub source: String,
    /// Every class has the complete edge set (operations are the only
    /// degree of freedom).
    pub complete_only: bool,
}

/// JSONL line shape: one record per line.
#[derive(Serialize, Deserialize)]
struct RecordLine {
    arch: String,
    val_error: f64,
    test_error: f64,
    train_time: f64,
}

#[derive(Clone, Debug)]
pub struct TabularBenchmark {
    spec: Arc<SearchSpaceSpec>,
    records: BTreeMap<CanonicalKey, BenchRecord>,
    meta: BenchmarkMeta,
}

impl TabularBenchmark {
    /// Scores every equivalence class of `spec` deterministically from
    /// `seed`.
    pub fn synthetic(spec: Arc<SearchSpaceSpec>, seed: u64) -> Result<Self> {
        Self::synthetic_with(spec, seed, Enumeration::Classes)
    }

    /// Scores only complete-edge-set classes, the fixed-wiring variant.
    pub fn synthetic_complete(spec: Arc<SearchSpaceSpec>, seed: u64) -> Result<Self> {
        Self::synthetic_with(spec, seed, Enumeration::CompleteEdgeOps)
    }

    fn synthetic_with(spec: Arc<SearchSpaceSpec>, seed: u64, mode: Enumeration) -> Result<Self> {
        let complete_only = mode == Enumeration::CompleteEdgeOps;
        let mut entries: Vec<(CanonicalKey, Architecture)> = enumerate_space(&spec, mode)?
            .into_iter()
            .map(|rep| Ok((rep.canonical_key()?, rep)))
            .collect::<Result<_>>()?;
        entries.sort_by(|a, b| a.0.cmp(&b.0));

        let spec_ref = &spec;
        let scored: Vec<(CanonicalKey, f64)> = exec::map(entries, |(key, rep)| {
            let val = class_value(spec_ref, &rep, seed);
            (key, val)
        });

        // Noise follows key order, so the records do not depend on how the
        // scoring pass was scheduled.
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, NOISE_STREAM));
        let noise = Normal::new(0.0, TEST_NOISE_SD).expect("positive standard deviation");
        let mut records = BTreeMap::new();
        for (key, val_error) in scored {
            let test_error =
                (val_error + noise.sample(&mut rng)).clamp(ERROR_RANGE.0, ERROR_RANGE.1);
            let train_time = rng
                .random_range(TRAIN_TIME_RANGE.0.ln()..TRAIN_TIME_RANGE.1.ln())
                .exp();
            records.insert(
                key,
                BenchRecord {
                    val_error,
                    test_error,
                    train_time,
                },
            );
        }

        let name = format!(
            "synthetic-n{}e{}o{}{}-seed{}",
            spec.nodes(),
            spec.max_edges(),
            spec.num_ops(),
            if complete_only { "-complete" } else { "" },
            seed
        );
        Ok(Self {
            spec,
            records,
            meta: BenchmarkMeta {
                name: name.clone(),
                source: name,
                complete_only,
            },
        })
    }

    /// Loads a JSONL table, canonicalizing each line's architecture within
    /// `spec`. Lines that repeat a class must agree exactly; non-members and
    /// unreadable lines fail with their line number.
    pub fn from_jsonl(spec: Arc<SearchSpaceSpec>, path: &Path, name: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut records = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let parsed: RecordLine = serde_json::from_str(raw).map_err(|e| Error::Parse {
                line,
                msg: e.to_string(),
            })?;
            let arch = Architecture::from_text(&parsed.arch).map_err(|e| Error::Parse {
                line,
                msg: e.to_string(),
            })?;
            if !spec.contains(&arch) {
                return Err(Error::Parse {
                    line,
                    msg: format!("{} is not a member of the space", parsed.arch),
                });
            }
            for (field, value) in [
                ("val_error", parsed.val_error),
                ("test_error", parsed.test_error),
                ("train_time", parsed.train_time),
            ] {
                if !value.is_finite() {
                    return Err(Error::Parse {
                        line,
                        msg: format!("{field} is not finite"),
                    });
                }
            }
            let key = arch.canonical_key().map_err(|e| Error::Parse {
                line,
                msg: e.to_string(),
            })?;
            let record = BenchRecord {
                val_error: parsed.val_error,
                test_error: parsed.test_error,
                train_time: parsed.train_time,
            };
            if let Some(existing) = records.get(&key) {
                if *existing != record {
                    return Err(Error::DuplicateRecord {
                        line,
                        key: key.into_string(),
                    });
                }
            } else {
                records.insert(key, record);
            }
        }
        Ok(Self {
            spec,
            records,
            meta: BenchmarkMeta {
                name: name.to_string(),
                source: path.display().to_string(),
                complete_only: false,
            },
        })
    }

    /// Writes the table as JSONL, one canonical representative per line, in
    /// key order, replacing `path` atomically.
    pub fn to_jsonl(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for (key, record) in &self.records {
            let rep = canonical_representative(&self.spec, key)?;
            let line = RecordLine {
                arch: rep.to_text(),
                val_error: record.val_error,
                test_error: record.test_error,
                train_time: record.train_time,
            };
            out.push_str(&serde_json::to_string(&line)?);
            out.push('\n');
        }
        exec::replace_file(path, &out)?;
        Ok(())
    }

    pub fn spec(&self) -> &Arc<SearchSpaceSpec> {
        &self.spec
    }

    pub fn meta(&self) -> &BenchmarkMeta {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &CanonicalKey> {
        self.records.keys()
    }

    pub fn records(&self) -> impl Iterator<Item = (&CanonicalKey, &BenchRecord)> {
        self.records.iter()
    }

    pub fn lookup(&self, key: &CanonicalKey) -> Option<&BenchRecord> {
        self.records.get(key)
    }

    /// Canonicalizes and looks up; equivalent architectures share a record.
    pub fn lookup_arch(&self, arch: &Architecture) -> Result<Option<&BenchRecord>> {
        Ok(self.records.get(&arch.canonical_key()?))
    }

    /// Content fingerprint over the spec and every record, for telling two
    /// tables apart regardless of how they were built.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(format!(
            "spec {} {} {}\n",
            self.spec.nodes(),
            self.spec.max_edges(),
            self.spec.num_ops()
        ));
        for (key, r) in &self.records {
            hasher.update(format!(
                "{key}\t{:?}\t{:?}\t{:?}\n",
                r.val_error, r.test_error, r.train_time
            ));
        }
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Groups records by the bit pattern their representative encodes to
    /// under `kind` and summarizes the validation-error spread within and
    /// across groups. A lossy encoding sends several records to one group.
    pub fn equivalence_class_stats(&self, kind: &EncodingKind) -> Result<ClassStats> {
        if **kind.spec() != *self.spec {
            return Err(Error::SpecMismatch(
                "encoding addresses a different space than the benchmark".into(),
            ));
        }
        let mut groups: BTreeMap<Vec<u64>, Vec<f64>> = BTreeMap::new();
        for (key, record) in &self.records {
            let rep = canonical_representative(&self.spec, key)?;
            let pattern: Vec<u64> = kind.encode(&rep)?.iter().map(|v| v.to_bits()).collect();
            groups.entry(pattern).or_default().push(record.val_error);
        }
        let all: Vec<f64> = self.records.values().map(|r| r.val_error).collect();
        let largest_class = groups.values().map(Vec::len).max().unwrap_or(0);
        let mean_within_class_std = if groups.is_empty() {
            0.0
        } else {
            groups.values().map(|v| population_std(v)).sum::<f64>() / groups.len() as f64
        };
        Ok(ClassStats {
            class_count: groups.len(),
            largest_class,
            population_std: population_std(&all),
            mean_within_class_std,
        })
    }
}

/// Spread summary from [`TabularBenchmark::equivalence_class_stats`].
#[derive(Clone, Copy, Debug)]
pub struct ClassStats {
    pub class_count: usize,
    pub largest_class: usize,
    /// Spread of validation error over all records.
    pub population_std: f64,
    /// Mean over encoding classes of the within-class spread; zero when the
    /// encoding separates every record.
    pub mean_within_class_std: f64,
}

/// Deterministic class score: seeded quality per short path minus depth and
/// edge penalties, computed from the canonical representative so equivalent
/// architectures always score identically.
fn class_value(spec: &SearchSpaceSpec, rep: &Architecture, seed: u64) -> f64 {
    let q = spec.num_ops();
    let draw = |stream: u64| -> f64 {
        ChaCha8Rng::seed_from_u64(derive_seed(seed, OP_TABLE_STREAM + stream)).random::<f64>()
    };
    // How well each operation performs at each position of a short path: a
    // dominant per-operation quality plus a positional refinement. Changing
    // one node's operation therefore shifts every path through that node in
    // the same direction, regardless of where the node sits on each path.
    let table = |position: usize, op: u8| -> f64 {
        0.7 * draw(op as u64) + 0.3 * draw((q + position * q + op as usize) as u64)
    };
    let paths = rep.extract_paths();
    let depth = paths.iter().map(Vec::len).max().unwrap_or(0) as f64;
    let interior = spec.interior_nodes().max(1) as f64;
    let mut quality = 0.0;
    for seq in &paths {
        if seq.len() <= PATH_WEIGHT_MAX_LEN {
            let fit = match seq.len() {
                0 => 1.0,
                len => {
                    seq.iter()
                        .enumerate()
                        .map(|(position, &op)| table(position, op))
                        .sum::<f64>()
                        / len as f64
                }
            };
            let stream = path_index(seq, q) as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, stream));
            quality += LENGTH_GAIN[seq.len()] * fit + PATH_JITTER * rng.random::<f64>();
        }
    }
    let val = BASE_ERROR
        - quality
        - DEPTH_PENALTY * depth / interior
        - EDGE_PENALTY * rep.edge_count() as f64 / spec.max_edges() as f64;
    val.clamp(VAL_ERROR_RANGE.0, VAL_ERROR_RANGE.1)
}

fn population_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
}

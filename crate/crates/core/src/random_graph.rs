//! Random ascending-edge graphs and the truncation theory built on them.
//!
//! [`RandomGraphModel`] draws each of the `n(n-1)/2` ascending edge slots
//! independently with probability `p = 2k / (n(n-1))`, so `k` is the expected
//! edge count. The expected number of input-output paths with `len` edges is
//! `C(n-2, len-1) * p^len`; everything here works with its logarithm to stay
//! finite at both extremes.
//!
//! [`RandomGraphModel::short_path_fraction`] is the expected share of paths
//! at most a cutoff long, the quantity that says how much a truncated path
//! encoding sees. [`RandomGraphModel::truncation_bounds`] evaluates the two
//! regimes where that share is provably near 1 or near 0, and the Monte
//! Carlo routines measure the same quantities from actual draws.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::ln_gamma;

use crate::exec::{self, derive_seed};
use crate::search_space::{edge_index, edge_slot_count};
use crate::{Error, Result};

/// Draws per work chunk; chunking fixes the reduction order and gives the
/// bootstrap its resampling unit.
const CHUNK: u64 = 4096;

const BOOTSTRAP_RESAMPLES: usize = 200;

/// One-sided 99% normal quantile.
pub const ONE_SIDED_99: f64 = 2.326347874040841;

/// Ascending-edge random graph with independent edges.
#[derive(Clone, Debug)]
pub struct RandomGraphModel {
    nodes: usize,
    expected_edges: f64,
    edge_probability: f64,
}

impl RandomGraphModel {
    pub fn new(nodes: usize, expected_edges: f64) -> Result<Self> {
        if nodes < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 nodes, got {nodes}"
            )));
        }
        let slots = edge_slot_count(nodes) as f64;
        let p = expected_edges / slots;
        if !(0.0..=1.0).contains(&p) || p == 0.0 {
            return Err(Error::InvalidParameter(format!(
                "{expected_edges} expected edges over {slots} slots leaves no probability in (0, 1]"
            )));
        }
        Ok(Self {
            nodes,
            expected_edges,
            edge_probability: p,
        })
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn expected_edges(&self) -> f64 {
        self.expected_edges
    }

    pub fn edge_probability(&self) -> f64 {
        self.edge_probability
    }

    /// Natural log of the expected number of input-output paths with `len`
    /// edges. Negative infinity outside `1..=nodes-1`.
    pub fn log_expected_path_count(&self, len: usize) -> f64 {
        if len == 0 || len > self.nodes - 1 {
            return f64::NEG_INFINITY;
        }
        let interior = (self.nodes - 2) as f64;
        let chosen = (len - 1) as f64;
        ln_binomial(interior, chosen) + len as f64 * self.edge_probability.ln()
    }

    pub fn expected_path_count(&self, len: usize) -> f64 {
        self.log_expected_path_count(len).exp()
    }

    /// Sandwich on [`Self::log_expected_path_count`] from
    /// `(m/j)^j <= C(m, j) <= (em/j)^j`.
    pub fn log_expected_path_count_bounds(&self, len: usize) -> (f64, f64) {
        if len == 0 || len > self.nodes - 1 {
            return (f64::NEG_INFINITY, f64::NEG_INFINITY);
        }
        let edge_term = len as f64 * self.edge_probability.ln();
        let j = (len - 1) as f64;
        if j == 0.0 {
            return (edge_term, edge_term);
        }
        let m = (self.nodes - 2) as f64;
        let lower = j * (m / j).ln() + edge_term;
        let upper = j * (1.0 + (m / j).ln()) + edge_term;
        (lower, upper)
    }

    fn log_sum_over(&self, lens: impl Iterator<Item = usize>) -> f64 {
        log_sum_exp(lens.map(|len| self.log_expected_path_count(len)))
    }

    /// Expected fraction of input-output paths with at most `cutoff` edges.
    /// Exactly 1 once the cutoff reaches the longest possible path.
    pub fn short_path_fraction(&self, cutoff: usize) -> f64 {
        if cutoff >= self.nodes - 1 {
            return 1.0;
        }
        (self.log_short_fraction(cutoff)).exp()
    }

    /// Natural log of [`Self::short_path_fraction`].
    pub fn log_short_fraction(&self, cutoff: usize) -> f64 {
        if cutoff >= self.nodes - 1 {
            return 0.0;
        }
        let head = self.log_sum_over(1..=cutoff);
        head - self.total_log_mass()
    }

    /// Natural log of the complementary fraction (paths longer than
    /// `cutoff`).
    pub fn log_long_fraction(&self, cutoff: usize) -> f64 {
        if cutoff >= self.nodes - 1 {
            return f64::NEG_INFINITY;
        }
        let tail = self.log_sum_over(cutoff + 1..self.nodes);
        tail - self.total_log_mass()
    }

    fn total_log_mass(&self) -> f64 {
        self.log_sum_over(1..self.nodes)
    }

    /// Evaluates both provable regimes of the short-path fraction for one
    /// cutoff and geometric base greater than 1.
    pub fn truncation_bounds(&self, cutoff: usize, base: f64) -> TruncationBounds {
        debug_assert!(base > 1.0);
        let n = self.nodes as f64;
        let k = self.expected_edges;
        let e = std::f64::consts::E;
        let x = cutoff as f64;
        TruncationBounds {
            cutoff,
            base,
            in_long_regime: x > 2.0 * e * base * k / n,
            log_long_fraction: self.log_long_fraction(cutoff),
            long_limit_log: (1.0 - x) * base.ln(),
            in_short_regime: x < k / (2.0 * e * base * n),
            log_short_fraction: self.log_short_fraction(cutoff),
            short_limit_log: -(k / (2.0 * n)) * std::f64::consts::LN_2,
        }
    }

    /// Monte Carlo estimate of [`Self::short_path_fraction`]: the ratio of
    /// summed short-path counts to summed path counts over independent
    /// draws, with a chunk-level bootstrap standard error. Fails with
    /// [`Error::NoPathsObserved`] when no draw contains any path.
    pub fn monte_carlo_short_fraction(
        &self,
        cutoff: usize,
        draws: u64,
        seed: u64,
    ) -> Result<ShortFractionEstimate> {
        if draws == 0 {
            return Err(Error::InvalidParameter("zero draws".into()));
        }
        let chunk_ids: Vec<u64> = (0..draws.div_ceil(CHUNK)).collect();
        let pairs: Vec<(f64, f64)> = exec::map(chunk_ids, |c| {
            let todo = CHUNK.min(draws - c * CHUNK);
            self.chunk_path_counts(cutoff, todo, derive_seed(seed, c))
        });
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        if total == 0.0 {
            return Err(Error::NoPathsObserved);
        }
        let short: f64 = pairs.iter().map(|p| p.0).sum();

        // Resampling whole chunks keeps the bootstrap independent of the
        // worker count.
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, u64::MAX));
        let mut ratios = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
        for _ in 0..BOOTSTRAP_RESAMPLES {
            let (mut s, mut t) = (0.0f64, 0.0f64);
            for _ in 0..pairs.len() {
                let (ps, pt) = pairs[rng.random_range(0..pairs.len())];
                s += ps;
                t += pt;
            }
            if t > 0.0 {
                ratios.push(s / t);
            }
        }
        Ok(ShortFractionEstimate {
            value: short / total,
            stderr: sample_std(&ratios),
            draws,
        })
    }

    fn chunk_path_counts(&self, cutoff: usize, todo: u64, seed: u64) -> (f64, f64) {
        let n = self.nodes;
        let slots = edge_slot_count(n);
        let p = self.edge_probability;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut present = vec![false; slots];
        // dist[j][l] counts paths from the input to j with l edges; f64
        // because counts overflow integers long before they lose precision.
        let mut dist = vec![vec![0.0f64; n]; n];
        let (mut sum_short, mut sum_total) = (0.0, 0.0);
        for _ in 0..todo {
            for slot in present.iter_mut() {
                *slot = rng.random::<f64>() < p;
            }
            for row in dist.iter_mut() {
                row.fill(0.0);
            }
            dist[0][0] = 1.0;
            for j in 1..n {
                for i in 0..j {
                    if present[edge_index(n, i, j)] {
                        for l in 0..j {
                            let c = dist[i][l];
                            if c != 0.0 {
                                dist[j][l + 1] += c;
                            }
                        }
                    }
                }
            }
            sum_total += dist[n - 1].iter().sum::<f64>();
            sum_short += dist[n - 1][..=cutoff.min(n - 1)].iter().sum::<f64>();
        }
        (sum_short, sum_total)
    }

    /// Per-edge containment frequencies over `draws` graphs, both
    /// unconditioned and conditioned on a path existing, with a one-sided
    /// 99% lower confidence bound on the conditional frequency. Fails with
    /// [`Error::AcceptanceTooLow`] when no draw is valid.
    pub fn conditional_edge_containment(&self, draws: u64, seed: u64) -> Result<ContainmentCheck> {
        if draws == 0 {
            return Err(Error::InvalidParameter("zero draws".into()));
        }
        let n = self.nodes;
        let slots = edge_slot_count(n);
        let chunk_ids: Vec<u64> = (0..draws.div_ceil(CHUNK)).collect();
        let chunks: Vec<(u64, Vec<u64>, Vec<u64>)> = exec::map(chunk_ids, |c| {
            let todo = CHUNK.min(draws - c * CHUNK);
            self.chunk_containment(todo, derive_seed(seed, c))
        });

        let mut valid_draws = 0u64;
        let mut present = vec![0u64; slots];
        let mut present_valid = vec![0u64; slots];
        for (valid, all, cond) in chunks {
            valid_draws += valid;
            for idx in 0..slots {
                present[idx] += all[idx];
                present_valid[idx] += cond[idx];
            }
        }
        if valid_draws == 0 {
            return Err(Error::AcceptanceTooLow(draws));
        }
        let edges = (0..slots)
            .map(|idx| {
                let (i, j) = crate::search_space::edge_endpoints(n, idx);
                EdgeContainment {
                    edge: (i, j),
                    unconditional: present[idx] as f64 / draws as f64,
                    conditional: present_valid[idx] as f64 / valid_draws as f64,
                    wilson_lower: wilson_lower_bound(present_valid[idx], valid_draws, ONE_SIDED_99),
                }
            })
            .collect();
        Ok(ContainmentCheck {
            edge_probability: self.edge_probability,
            total_draws: draws,
            valid_draws,
            edges,
        })
    }

    /// Like [`Self::conditional_edge_containment`], but keeps drawing until
    /// `target_valid` graphs with an input-output path have accumulated, so
    /// the conditional estimates rest on a fixed sample size. Gives up with
    /// [`Error::AcceptanceTooLow`] once `max_draws` total draws pass without
    /// reaching the target. Chunks are consumed in a fixed order, so the
    /// result is deterministic in `seed`.
    pub fn conditional_edge_containment_until(
        &self,
        target_valid: u64,
        max_draws: u64,
        seed: u64,
    ) -> Result<ContainmentCheck> {
        if target_valid == 0 {
            return Err(Error::InvalidParameter("zero target draws".into()));
        }
        let n = self.nodes;
        let slots = edge_slot_count(n);
        let mut total_draws = 0u64;
        let mut valid_draws = 0u64;
        let mut present = vec![0u64; slots];
        let mut present_valid = vec![0u64; slots];
        let mut chunk = 0u64;
        while valid_draws < target_valid {
            if total_draws >= max_draws {
                return Err(Error::AcceptanceTooLow(total_draws));
            }
            let todo = CHUNK.min(max_draws - total_draws);
            let (valid, all, cond) = self.chunk_containment(todo, derive_seed(seed, chunk));
            total_draws += todo;
            valid_draws += valid;
            for idx in 0..slots {
                present[idx] += all[idx];
                present_valid[idx] += cond[idx];
            }
            chunk += 1;
        }
        let edges = (0..slots)
            .map(|idx| {
                let (i, j) = crate::search_space::edge_endpoints(n, idx);
                EdgeContainment {
                    edge: (i, j),
                    unconditional: present[idx] as f64 / total_draws as f64,
                    conditional: present_valid[idx] as f64 / valid_draws as f64,
                    wilson_lower: wilson_lower_bound(present_valid[idx], valid_draws, ONE_SIDED_99),
                }
            })
            .collect();
        Ok(ContainmentCheck {
            edge_probability: self.edge_probability,
            total_draws,
            valid_draws,
            edges,
        })
    }

    fn chunk_containment(&self, todo: u64, seed: u64) -> (u64, Vec<u64>, Vec<u64>) {
        let n = self.nodes;
        let slots = edge_slot_count(n);
        let p = self.edge_probability;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut present = vec![false; slots];
        let mut reach = vec![false; n];
        let mut valid_draws = 0u64;
        let mut count_all = vec![0u64; slots];
        let mut count_valid = vec![0u64; slots];
        for _ in 0..todo {
            for slot in present.iter_mut() {
                *slot = rng.random::<f64>() < p;
            }
            reach.fill(false);
            reach[0] = true;
            for j in 1..n {
                reach[j] = (0..j).any(|i| reach[i] && present[edge_index(n, i, j)]);
            }
            let valid = reach[n - 1];
            if valid {
                valid_draws += 1;
            }
            for idx in 0..slots {
                if present[idx] {
                    count_all[idx] += 1;
                    if valid {
                        count_valid[idx] += 1;
                    }
                }
            }
        }
        (valid_draws, count_all, count_valid)
    }
}

/// Both regime checks of the short-path fraction at one cutoff.
///
/// In the long regime (cutoff above `2 e base k / n`) the fraction of long
/// paths must fall below `base^(1 - cutoff)`; in the short regime (cutoff
/// below `k / (2 e base n)`) the short fraction must fall below
/// `2^(-k / 2n)`. Out-of-regime cutoffs satisfy their implication vacuously.
#[derive(Clone, Copy, Debug)]
pub struct TruncationBounds {
    pub cutoff: usize,
    pub base: f64,
    pub in_long_regime: bool,
    pub log_long_fraction: f64,
    pub long_limit_log: f64,
    pub in_short_regime: bool,
    pub log_short_fraction: f64,
    pub short_limit_log: f64,
}

impl TruncationBounds {
    pub fn satisfied(&self) -> bool {
        (!self.in_long_regime || self.log_long_fraction < self.long_limit_log)
            && (!self.in_short_regime || self.log_short_fraction < self.short_limit_log)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ShortFractionEstimate {
    pub value: f64,
    pub stderr: f64,
    pub draws: u64,
}

/// Containment frequencies for every edge slot.
#[derive(Clone, Debug)]
pub struct ContainmentCheck {
    pub edge_probability: f64,
    pub total_draws: u64,
    pub valid_draws: u64,
    pub edges: Vec<EdgeContainment>,
}

impl ContainmentCheck {
    /// Whether every conditional lower bound clears the unconditioned edge
    /// probability.
    pub fn all_exceed_base(&self) -> bool {
        self.edges
            .iter()
            .all(|e| e.wilson_lower > self.edge_probability)
    }

    pub fn weakest(&self) -> &EdgeContainment {
        self.edges
            .iter()
            .min_by(|a, b| a.wilson_lower.total_cmp(&b.wilson_lower))
            .expect("every graph has at least one edge slot")
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EdgeContainment {
    pub edge: (usize, usize),
    /// Presence frequency over all draws.
    pub unconditional: f64,
    /// Presence frequency over draws with an input-output path.
    pub conditional: f64,
    /// One-sided 99% lower confidence bound on the conditional frequency.
    pub wilson_lower: f64,
}

/// Wilson lower confidence bound for a binomial proportion at normal
/// quantile `z`.
pub fn wilson_lower_bound(successes: u64, trials: u64, z: f64) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let center = phat + z2 / (2.0 * n);
    let margin = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - margin) / (1.0 + z2 / n)).max(0.0)
}

fn ln_binomial(m: f64, j: f64) -> f64 {
    ln_gamma(m + 1.0) - ln_gamma(j + 1.0) - ln_gamma(m - j + 1.0)
}

fn log_sum_exp(values: impl Iterator<Item = f64>) -> f64 {
    let values: Vec<f64> = values.collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return f64::INFINITY;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

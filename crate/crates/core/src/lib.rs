//! Study harness for graph encodings in neural architecture search.
//!
//! A cell search space is a set of labeled DAGs: `n` ordered nodes, edges only
//! from lower to higher index, node 0 the input, node n-1 the output, and an
//! operation label on every interior node. This crate provides
//!
//! * the adjacency and path encoding families (one-hot, categorical,
//!   continuous, each with optional truncation) and their decoders,
//! * a random-graph model over the same DAGs with exact and Monte Carlo
//!   estimates of the fraction of short paths, plus checkers for the
//!   truncation phase-transition and edge-containment bounds,
//! * the encoding-dependent subroutines query-based search is built from
//!   (random sampling, perturbation, GP and neural-ensemble predictors),
//! * five search algorithms (random search, regularized evolution, local
//!   search, Bayesian optimization, BANANAS-style ensemble search) driven by
//!   tabular benchmarks with a query cache and simulated-time budgets,
//! * synthetic tabular benchmarks and reproducible experiment runners behind
//!   the `nasenc` CLI.
//!
//! Everything stochastic is seeded; runs are byte-for-byte reproducible for a
//! given (config, seed), independent of worker count. The `parallel` feature
//! (default on) maps trial- and chunk-level work across a rayon pool; without
//! it the same code runs sequentially.

pub mod algorithms;
pub mod benchmark;
pub mod encodings;
mod error;
pub mod exec;
pub mod experiments;
pub mod random_graph;
pub mod search_space;
pub mod subroutines;

pub use error::{Error, Result};

//! Parallel execution helpers with a sequential fallback.
//!
//! `map` fans work across the rayon pool when the `parallel` feature is on and
//! degrades to a plain loop otherwise; `map_seq` is always sequential (used by
//! the benches to compare the two paths in one build). Outputs preserve input
//! order, so reductions downstream are deterministic regardless of worker
//! count. Seeds for independent work items come from `derive_seed`, never from
//! splitting one RNG across threads.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, in parallel when the `parallel` feature is enabled.
/// Result order matches input order.
pub fn map<T, R, F>(items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.into_iter().map(f).collect()
    }
}

/// Sequential counterpart of [`map`], available in every build.
pub fn map_seq<T, R, F>(items: Vec<T>, f: F) -> Vec<R>
where
    F: Fn(T) -> R,
{
    items.into_iter().map(f).collect()
}

/// Runs `f` inside a rayon pool of `workers` threads. With the sequential
/// build, or `workers == None`, runs `f` directly in the global context.
pub fn with_workers<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        match workers {
            Some(w) if w > 0 => rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .expect("thread pool")
                .install(f),
            _ => f(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        f()
    }
}

/// Atomically replaces `path`: writes a sibling temp file and renames it
/// over the target, so readers never observe a half-written file.
pub(crate) fn replace_file(path: &std::path::Path, contents: &str) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}

/// Derives an independent seed for work item `index` from a master seed
/// (SplitMix64 over the combined value). Distinct indices give uncorrelated
/// streams; the mapping is fixed, so results do not depend on scheduling.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

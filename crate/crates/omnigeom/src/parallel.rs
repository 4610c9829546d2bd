use rayon::prelude::*;
use rayon::ThreadPool;

use omnigeom_core::polygon_repr::{instance_iou, summarize, InstanceMask, KindSummary, ReprKind};

use crate::error::{CliError, Result};

pub const THREADS_ENV: &str = "OMNIGEOM_THREADS";

/// Worker count from `OMNIGEOM_THREADS`; unset or 0 lets rayon decide.
pub fn thread_count() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(0),
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::input(format!("{THREADS_ENV}='{v}' is not a thread count"))),
    }
}

pub fn pool() -> Result<ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count()?)
        .build()
        .map_err(|e| CliError::input(format!("thread pool: {e}")))
}

/// Corpus evaluation fanned out over instances. Results are gathered in
/// input order, so the means match the sequential evaluation bit for bit.
pub fn evaluate_corpus(masks: &[InstanceMask], kinds: &[ReprKind]) -> Result<Vec<KindSummary>> {
    if masks.is_empty() {
        return Err(CliError::input("empty corpus"));
    }
    let pool = pool()?;
    Ok(pool.install(|| {
        kinds
            .iter()
            .map(|&kind| {
                let results: Vec<_> = masks.par_iter().map(|m| instance_iou(m, kind)).collect();
                summarize(kind, &results)
            })
            .collect()
    }))
}

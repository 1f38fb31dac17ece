//! Rayon driver for ensembles. Each path comes from its own substream and
//! results are collected in path order, so the worker count never changes
//! the output.

use flowgrowth_core::ibf::IbfModel;
use flowgrowth_core::sim::{
    derivative_path, rho_path, EnsembleKind, ModelRef, PathEnsemble, SimConfig,
};
use rayon::prelude::*;

use crate::error::{CliError, CliResult};

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

pub fn simulate(
    kind: EnsembleKind,
    model: &IbfModel,
    cfg: &SimConfig,
    workers: usize,
) -> CliResult<PathEnsemble> {
    if workers == 0 {
        return Err(CliError::validation("workers", "must be >= 1"));
    }
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::validation("workers", e.to_string()))?;
    let n = cfg.n_paths as u64;
    let rows = pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| match kind {
                EnsembleKind::Rho => rho_path(model, cfg, i),
                EnsembleKind::LogDerivativeNorm => derivative_path(model, cfg, i),
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    let ids = (0..n).collect();
    Ok(PathEnsemble::new(
        kind,
        cfg.recorded_times(),
        rows,
        ids,
        ModelRef::of(model),
        *cfg,
    )?)
}

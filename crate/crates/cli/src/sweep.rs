//! Worker pool for convergence sweeps. Cells are pure functions of
//! (epsilon, N), so the assembled table is identical regardless of
//! which worker computes which cell; one thread falls back to the
//! sequential path.

use std::thread;

use spdd_core::analysis::{
    compute_cell, run_sweep, AnalysisError, CellResult, ConvergenceTable, SweepConfig,
};

pub fn run(cfg: &SweepConfig, threads: usize) -> Result<ConvergenceTable, AnalysisError> {
    let threads = if threads == 0 {
        thread::available_parallelism()
            .map(usize::from)
            .unwrap_or(1)
    } else {
        threads
    };
    let jobs: Vec<(f64, usize)> = cfg
        .eps_list
        .iter()
        .flat_map(|&eps| cfg.n_list.iter().map(move |&n| (eps, n)))
        .collect();
    if threads <= 1 || jobs.len() <= 1 {
        return run_sweep(cfg);
    }

    let workers = threads.min(jobs.len());
    let per_worker: Vec<Vec<Result<CellResult, AnalysisError>>> = thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let jobs = &jobs;
                scope.spawn(move || {
                    let mut out = Vec::new();
                    let mut i = w;
                    while i < jobs.len() {
                        let (epsilon, n) = jobs[i];
                        out.push(compute_cell(cfg, epsilon, n).map_err(|source| {
                            AnalysisError::Cell {
                                epsilon,
                                n,
                                source: Box::new(source),
                            }
                        }));
                        i += workers;
                    }
                    out
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });

    let mut cells = Vec::with_capacity(jobs.len());
    for batch in per_worker {
        for cell in batch {
            cells.push(cell?);
        }
    }
    ConvergenceTable::from_cells(
        cfg.scheme,
        cfg.extrapolate,
        cfg.eps_list.clone(),
        cfg.n_list.clone(),
        cells,
    )
}

//! Evaluation of sweep grids.

use rayon::prelude::*;
use sps_core::dynamics::{solve_adaptive_with, AdaptiveOptions, SystemConfig};
use sps_core::observables::ObservableRecord;

use crate::config::SweepPlan;

/// Outcome at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub param1: f64,
    pub param2: Option<f64>,
    pub outcome: Result<ObservableRecord, String>,
}

pub fn evaluate(config: &SystemConfig, options: AdaptiveOptions) -> Result<ObservableRecord, String> {
    solve_adaptive_with(config, options)
        .and_then(|sol| ObservableRecord::from_solution(&sol))
        .map_err(|e| e.to_string())
}

/// Evaluates every grid point, row-major, on `jobs` worker threads (0 picks
/// the rayon default). A failing point is recorded and the sweep goes on.
pub fn run_sweep(plan: &SweepPlan, jobs: usize, options: AdaptiveOptions) -> Result<Vec<SweepPoint>, String> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| format!("cannot start worker pool: {e}"))?;
    let points = plan.points();
    Ok(pool.install(|| {
        points
            .par_iter()
            .map(|&(p1, p2)| SweepPoint {
                param1: p1,
                param2: p2,
                outcome: evaluate(&plan.config_at((p1, p2)), options),
            })
            .collect()
    }))
}

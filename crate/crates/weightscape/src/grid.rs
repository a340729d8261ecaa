//! Parallel execution of the scenario grid.
//!
//! Replications run on a rayon pool; each has its own seeded stream, and
//! results are reassembled in (scenario, replication) order so the output
//! does not depend on scheduling.

use rayon::prelude::*;
use serde::Serialize;
use weightscape_core::simulation::{
    aggregate, ordering_violations, run_replication, CellSummary, Column, ReplicationResult,
    ScenarioSpec,
};

/// Caps the worker count when set to a positive integer.
pub const THREADS_ENV: &str = "WEIGHTSCAPE_THREADS";

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioOutcome {
    pub spec: ScenarioSpec,
    #[serde(skip)]
    pub replications: Vec<ReplicationResult>,
    pub summary: Vec<CellSummary>,
    pub violations: Vec<String>,
}

pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
}

pub fn run_grid(
    specs: &[ScenarioSpec],
    columns: &[Column],
    threads: Option<usize>,
) -> weightscape_core::Result<Vec<ScenarioOutcome>> {
    for spec in specs {
        spec.validate()?;
    }
    let jobs: Vec<(usize, usize)> = specs
        .iter()
        .enumerate()
        .flat_map(|(i, s)| (0..s.replications).map(move |r| (i, r)))
        .collect();
    let run = || {
        jobs.par_iter()
            .map(|&(i, r)| run_replication(&specs[i], r, columns))
            .collect::<weightscape_core::Result<Vec<_>>>()
    };
    let results = match threads.or_else(thread_cap) {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool construction")
            .install(run)?,
        None => run()?,
    };

    let mut results = results.into_iter();
    Ok(specs
        .iter()
        .map(|spec| {
            let reps: Vec<ReplicationResult> = results.by_ref().take(spec.replications).collect();
            let violations = reps
                .iter()
                .flat_map(|r| ordering_violations(r, columns))
                .collect();
            ScenarioOutcome {
                spec: spec.clone(),
                summary: aggregate(&reps, columns),
                replications: reps,
                violations,
            }
        })
        .collect())
}

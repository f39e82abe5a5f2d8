//! Scenario files, record emission and sweep helpers for the pipe crawler
//! simulator in `pipecrawler-core`.

pub mod output;
pub mod scenario;

use std::fs;
use std::path::Path;
use std::thread;

use pipecrawler_core::simulator::OrientationRun;
use pipecrawler_core::{run, DimensionTable, Scenario, SimError};

pub use output::{format_sig, render_summary, summary_json, write_records, Format, IoError, RECORD_COLUMNS};
pub use scenario::{parse_scenario, parse_scenario_str, ScenarioError, ScenarioFile};

/// Runs `scenario` once per orientation on separate threads. Results come
/// back in the order of `thetas` and match a sequential sweep exactly.
pub fn parallel_sweep(scenario: &Scenario, thetas: &[f64]) -> Result<Vec<OrientationRun>, SimError> {
    if thetas.is_empty() {
        return Err(SimError::EmptySweep);
    }
    Ok(thread::scope(|scope| {
        let handles: Vec<_> = thetas
            .iter()
            .map(|&theta| {
                let sc = scenario.with_orientation(theta);
                scope.spawn(move || OrientationRun { orientation_deg: theta, outcome: run(&sc) })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    }))
}

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Malformed { path: String, source: pipecrawler_core::DimensionError },
}

/// Loads a dimension table in the `designator, schedule, OD mm, wall mm` format.
pub fn load_dimension_table(path: impl AsRef<Path>) -> Result<DimensionTable, TableError> {
    let path = path.as_ref();
    let shown = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| TableError::Io { path: shown.clone(), source })?;
    DimensionTable::parse(&text).map_err(|source| TableError::Malformed { path: shown, source })
}

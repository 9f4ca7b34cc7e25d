mod compare;
mod fk;
mod statics;
mod workspace;

pub use compare::{read_markers, run_compare, write_markers, CompareRow, CompareSummary};
pub use fk::{run_fk, CENTERLINE_POINTS};
pub use statics::{run_statics, StaticsSummary};
pub use workspace::{bounding_box, run_workspace, LoadSummary, WorkspacePoint, WorkspaceSummary};

use crate::error::{CliError, CliResult};

/// Runs `f` on a pool of `workers` threads (all cores when `None`).
pub(crate) fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        if n == 0 {
            return Err(CliError::invalid("--workers must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Failed(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// File-name friendly version of a scenario name.
pub(crate) fn slug(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    if s.is_empty() {
        "scenario".into()
    } else {
        s
    }
}

/// Norm of the residual restricted to the coordinates the model can move.
pub(crate) fn free_residual(state: &pac_core::RobotState, problem: &pac_core::StaticsProblem) -> CliResult<f64> {
    let r = pac_core::static_residual(state, problem)?.values;
    Ok(problem
        .free_coordinates()
        .iter()
        .map(|&i| r[i] * r[i])
        .sum::<f64>()
        .sqrt())
}

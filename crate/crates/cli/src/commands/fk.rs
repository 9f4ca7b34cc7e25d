use std::path::Path;

use pac_core::kinematics::{Chain, ModelKind};
use pac_core::{RigidTransform, RobotState};

use crate::error::{CliError, CliResult};
use crate::files::Robot;
use crate::format::{fmt, CsvOut};

pub const CENTERLINE_POINTS: usize = 101;

/// Writes `centerline.csv` under `out` and returns the tip pose.
pub fn run_fk(robot: &Robot, state: &RobotState, model: ModelKind, out: &Path) -> CliResult<RigidTransform> {
    state
        .validate(&robot.params, model)
        .map_err(|e| CliError::invalid(format!("state: {e}")))?;
    let chain = Chain::new(state, &robot.params)?;
    let mut csv = CsvOut::create(&out.join("centerline.csv"), &["segment", "s", "x", "y", "z"])?;
    for i in 0..robot.params.len() {
        for k in 0..CENTERLINE_POINTS {
            let s = k as f64 / (CENTERLINE_POINTS - 1) as f64;
            let p = chain.point(i, s)?.translation;
            csv.row([(i + 1).to_string(), fmt(s), fmt(p.x), fmt(p.y), fmt(p.z)])?;
        }
    }
    Ok(*chain.tip())
}

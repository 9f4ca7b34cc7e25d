use std::path::Path;

use pac_core::kinematics::{Chain, ModelKind};
use pac_core::{solve_statics, Error, RobotState, SolverReport};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::files::{Robot, ScenarioFile};
use crate::format::{fmt, write_json, CsvOut};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StaticsSummary {
    pub scenario: String,
    pub model: ModelKind,
    pub converged: bool,
    pub iterations: usize,
    pub rejected_steps: usize,
    pub residual_norm: f64,
    pub tip_position: [f64; 3],
    pub tip_rotation: [[f64; 3]; 3],
    #[serde(skip)]
    pub state: RobotState,
}

/// Solves the scenario and writes `state.csv`, `report.json` and, on success,
/// `equilibrium.json` (the scenario with the equilibrium as initial guess).
/// On failure the best state and `residual_history.csv` are written and a
/// solver failure is returned.
pub fn run_statics(
    robot: &Robot,
    file: &ScenarioFile,
    model: Option<ModelKind>,
    out: &Path,
) -> CliResult<StaticsSummary> {
    let scenario = file.resolve(robot, model)?;
    let problem = &scenario.problem;
    let (state, report, failure) = match solve_statics(problem, &scenario.options) {
        Ok((q, r)) => (q, r, None),
        Err(Error::NotConverged(nc)) => {
            let report = SolverReport {
                iterations: nc.steps,
                rejected_steps: 0,
                residual_norm: nc.best_residual,
                residual_history: nc.residual_history.clone(),
                time: 0.0,
                trajectory: Vec::new(),
            };
            let msg = format!(
                "scenario '{}': no equilibrium after {} steps, best residual {:.3e}",
                scenario.name, nc.steps, nc.best_residual
            );
            (nc.best_state, report, Some(msg))
        }
        Err(e) => return Err(e.into()),
    };
    let chain = Chain::new(&state, &problem.params)?;
    let tip = chain.tip();
    let summary = StaticsSummary {
        scenario: scenario.name.clone(),
        model: problem.model,
        converged: failure.is_none(),
        iterations: report.iterations,
        rejected_steps: report.rejected_steps,
        residual_norm: report.residual_norm,
        tip_position: tip.translation.into(),
        tip_rotation: std::array::from_fn(|r| std::array::from_fn(|c| tip.rotation[(r, c)])),
        state: state.clone(),
    };

    let mut csv = CsvOut::create(&out.join("state.csv"), &["segment", "c0", "c1", "phi", "delta_l"])?;
    for (i, q) in state.segments.iter().enumerate() {
        csv.row([(i + 1).to_string(), fmt(q.c0), fmt(q.c1), fmt(q.phi), fmt(q.delta_l)])?;
    }
    write_json(&out.join("report.json"), &summary)?;
    match failure {
        None => {
            let mut eq = file.normalized();
            eq.model = Some(problem.model);
            eq.initial = Some(state.segments.iter().map(|q| q.as_array()).collect());
            write_json(&out.join("equilibrium.json"), &eq)?;
            Ok(summary)
        }
        Some(msg) => {
            let mut h = CsvOut::create(&out.join("residual_history.csv"), &["step", "residual"])?;
            for (k, r) in report.residual_history.iter().enumerate() {
                h.row([k.to_string(), fmt(*r)])?;
            }
            Err(CliError::Failed(msg))
        }
    }
}

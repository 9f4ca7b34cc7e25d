use std::path::Path;

use log::{info, warn};
use pac_core::kinematics::{Chain, ModelKind};
use pac_core::{solve_statics, Error};
use rayon::prelude::*;
use serde::Serialize;

use super::{free_residual, with_workers};
use crate::error::CliResult;
use crate::files::{Robot, SweepFile};
use crate::format::{fmt, write_text, CsvOut};
use crate::svg::{side_view, Plot, Series, Style};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkspacePoint {
    pub load: usize,
    pub point: usize,
    pub contractions: Vec<f64>,
    pub tip: [f64; 3],
    pub residual: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadSummary {
    pub tip_mass: f64,
    pub points: usize,
    pub converged: usize,
    pub extent: [f64; 3],
    pub bbox_volume: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkspaceSummary {
    pub loads: Vec<LoadSummary>,
    pub points: Vec<WorkspacePoint>,
}

/// Axis-aligned extent of a point cloud.
pub fn bounding_box(points: &[[f64; 3]]) -> [f64; 3] {
    if points.is_empty() {
        return [0.0; 3];
    }
    std::array::from_fn(|k| {
        let lo = points.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
        let hi = points.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    })
}

/// Solves every grid point under every tip mass, then writes
/// `workspace.csv`, `summary.csv` and `workspace.svg`. Points that fail to
/// converge are recorded and do not stop the sweep.
pub fn run_workspace(
    robot: &Robot,
    sweep_file: &SweepFile,
    model: Option<ModelKind>,
    out: &Path,
    workers: Option<usize>,
) -> CliResult<WorkspaceSummary> {
    let sweep = sweep_file.resolve(robot, model)?;
    let rest = robot.rest_tendon_lengths();
    let tasks: Vec<(usize, usize)> = (0..sweep.loads.len())
        .flat_map(|l| (0..sweep.grid.len()).map(move |p| (l, p)))
        .collect();
    info!(
        "workspace sweep: {} points × {} loads",
        sweep.grid.len(),
        sweep.loads.len()
    );
    let points: Vec<CliResult<WorkspacePoint>> = with_workers(workers, || {
        tasks
            .par_iter()
            .map(|&(l, p)| {
                let scenario = &sweep.loads[l];
                let mut problem = scenario.problem.clone();
                let contractions = &sweep.grid[p];
                if let Some(cmd) = &mut problem.command {
                    cmd.target_lengths = rest.iter().zip(contractions).map(|(r, c)| r - c).collect();
                }
                let (state, converged) = match solve_statics(&problem, &scenario.options) {
                    Ok((q, _)) => (q, true),
                    Err(Error::NotConverged(nc)) => {
                        warn!(
                            "load {} point {}: no equilibrium (residual {:.3e})",
                            l + 1,
                            p + 1,
                            nc.best_residual
                        );
                        (nc.best_state, false)
                    }
                    Err(e) => return Err(e.into()),
                };
                let tip = Chain::new(&state, &problem.params)?.tip().translation;
                Ok(WorkspacePoint {
                    load: l,
                    point: p,
                    contractions: contractions.clone(),
                    tip: tip.into(),
                    residual: free_residual(&state, &problem)?,
                    converged,
                })
            })
            .collect()
    })?;
    let points = points.into_iter().collect::<CliResult<Vec<_>>>()?;

    let m = robot.tendons.len();
    let mut header = vec!["tip_mass".to_string(), "point".to_string()];
    header.extend((1..=m).map(|j| format!("contraction_{j}")));
    header.extend(["x", "y", "z", "residual", "converged"].map(String::from));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut csv = CsvOut::create(&out.join("workspace.csv"), &header_refs)?;
    for pt in &points {
        let mut row = vec![fmt(sweep.masses[pt.load]), (pt.point + 1).to_string()];
        row.extend(pt.contractions.iter().map(|&c| fmt(c)));
        row.extend(pt.tip.iter().map(|&v| fmt(v)));
        row.push(fmt(pt.residual));
        row.push(u8::from(pt.converged).to_string());
        csv.row(row)?;
    }

    let mut loads = Vec::new();
    let mut summary = CsvOut::create(
        &out.join("summary.csv"),
        &[
            "tip_mass",
            "points",
            "converged",
            "x_extent",
            "y_extent",
            "z_extent",
            "bbox_volume",
        ],
    )?;
    let all: Vec<[f64; 3]> = points.iter().map(|p| p.tip).collect();
    let (axis, axis_label) = side_view(&all);
    let mut plot = Plot::new("Tip workspace", axis_label, "z (m)");
    for (l, &tip_mass) in sweep.masses.iter().enumerate() {
        let cloud: Vec<[f64; 3]> = points
            .iter()
            .filter(|p| p.load == l && p.converged)
            .map(|p| p.tip)
            .collect();
        let extent = bounding_box(&cloud);
        let s = LoadSummary {
            tip_mass,
            points: sweep.grid.len(),
            converged: cloud.len(),
            extent,
            bbox_volume: extent.iter().product(),
        };
        summary.row([
            fmt(s.tip_mass),
            s.points.to_string(),
            s.converged.to_string(),
            fmt(extent[0]),
            fmt(extent[1]),
            fmt(extent[2]),
            fmt(s.bbox_volume),
        ])?;
        plot.push(Series::new(
            format!("{} kg", fmt(s.tip_mass)),
            Style::Points,
            cloud.iter().map(|p| (p[axis], p[2])).collect(),
        ));
        loads.push(s);
    }
    write_text(&out.join("workspace.svg"), &plot.render())?;
    Ok(WorkspaceSummary { loads, points })
}

//! Reconstruction error of the reduced-order models against a reference shape.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::equilibrium::{dense_equilibrium_with, OracleOptions, RodLoads, RodTendon, TendonDrive};
use super::fit::CurveSample;
use super::rod::DenseRod;
use crate::error::{Error, Result};
use crate::geometry::transform::geodesic_angle;
use crate::kinematics::{Chain, ModelKind, RobotState};
use crate::solver::{solve_statics, SolverOptions, SolverReport, StaticsProblem};

/// Reference shape: an oracle rod or measured markers.
#[derive(Debug, Clone, PartialEq)]
pub enum GroundTruth {
    Rod(DenseRod),
    Markers(Vec<CurveSample>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkerError {
    pub segment: usize,
    pub s: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub model: ModelKind,
    /// Tip position error (m).
    pub tip_position: f64,
    /// Geodesic angle between tip frames (rad); unknown for marker data.
    pub tip_orientation_geodesic: Option<f64>,
    /// `‖R_model − R_truth‖_F`; unknown for marker data.
    pub tip_orientation_frobenius: Option<f64>,
    pub markers: Vec<MarkerError>,
}

impl ErrorReport {
    pub fn mean_marker_error(&self) -> f64 {
        if self.markers.is_empty() {
            return 0.0;
        }
        self.markers.iter().map(|m| m.error).sum::<f64>() / self.markers.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelComparison {
    pub pac: ErrorReport,
    pub pcc: ErrorReport,
    pub pac_state: RobotState,
    pub pcc_state: RobotState,
    pub pac_solver: SolverReport,
    pub pcc_solver: SolverReport,
}

impl ModelComparison {
    /// PAC tip error over PCC tip error.
    pub fn tip_ratio(&self) -> f64 {
        self.pac.tip_position / self.pcc.tip_position
    }
}

/// Rod loads equivalent to a reduced-order problem: same gravity and point
/// loads, and the same servo commands on the rod's tendon model.
pub fn rod_loads(problem: &StaticsProblem) -> RodLoads {
    let tendons = match &problem.command {
        Some(cmd) => problem
            .tendons
            .iter()
            .zip(&cmd.target_lengths)
            .map(|(routing, &target)| RodTendon {
                routing: routing.clone(),
                drive: TendonDrive::Servo { target, kp: cmd.kp },
            })
            .collect(),
        None => Vec::new(),
    };
    RodLoads {
        gravity: problem.gravity,
        point_loads: problem.loads.clone(),
        tendons,
    }
}

/// Solves the oracle rod for `problem` with `elements_per_segment` elements.
pub fn oracle_truth(problem: &StaticsProblem, elements_per_segment: usize) -> Result<DenseRod> {
    let rod = DenseRod::new(&problem.params, elements_per_segment)?;
    let (rod, _) = dense_equilibrium_with(&rod, &rod_loads(problem), &OracleOptions::default())?;
    Ok(rod)
}

/// Marker locations used for rod ground truth: mid-span and tip of every segment.
pub fn default_marker_points(segments: usize) -> Vec<(usize, f64)> {
    (0..segments).flat_map(|i| [(i, 0.5), (i, 1.0)]).collect()
}

/// Errors of one reduced-order state against the reference.
pub fn error_report(
    state: &RobotState,
    problem: &StaticsProblem,
    truth: &GroundTruth,
    model: ModelKind,
) -> Result<ErrorReport> {
    let chain = Chain::new(state, &problem.params)?;
    let n = problem.params.len();
    let (markers, tip_truth) = match truth {
        GroundTruth::Rod(rod) => {
            if rod.segments() != n {
                return Err(Error::LengthMismatch {
                    what: "rod segments",
                    expected: n,
                    actual: rod.segments(),
                });
            }
            (rod.markers(&default_marker_points(n))?, Some(rod.tip_pose()))
        }
        GroundTruth::Markers(m) => (m.clone(), None),
    };
    if markers.is_empty() {
        return Err(Error::InvalidParameter("ground truth has no markers".into()));
    }
    let mut errors = Vec::with_capacity(markers.len());
    for m in &markers {
        let p = chain.point(m.segment, m.s)?.translation;
        errors.push(MarkerError {
            segment: m.segment,
            s: m.s,
            error: (p - m.position).norm(),
        });
    }
    let tip = chain.tip();
    let (tip_position, geodesic, frobenius) = match tip_truth {
        Some(t) => (
            (tip.translation - t.translation).norm(),
            Some(geodesic_angle(&tip.rotation, &t.rotation)),
            Some((tip.rotation - t.rotation).norm()),
        ),
        None => {
            let distal = markers
                .iter()
                .max_by(|a, b| (a.segment, a.s).partial_cmp(&(b.segment, b.s)).expect("finite s"))
                .expect("non-empty");
            let p = chain.point(distal.segment, distal.s)?.translation;
            ((p - distal.position).norm(), None, None)
        }
    };
    Ok(ErrorReport {
        model,
        tip_position,
        tip_orientation_geodesic: geodesic,
        tip_orientation_frobenius: frobenius,
        markers: errors,
    })
}

/// Solves `problem` under both models and scores each against `truth`.
pub fn compare_models(
    problem: &StaticsProblem,
    truth: &GroundTruth,
    options: &SolverOptions,
) -> Result<ModelComparison> {
    let solve = |model: ModelKind| -> Result<(RobotState, SolverReport)> {
        let mut p = problem.clone();
        p.model = model;
        if model == ModelKind::Pcc {
            for s in &mut p.initial.segments {
                s.c1 = 0.0;
            }
        }
        solve_statics(&p, options)
    };
    let (pac_state, pac_solver) = solve(ModelKind::Pac)?;
    let (pcc_state, pcc_solver) = solve(ModelKind::Pcc)?;
    Ok(ModelComparison {
        pac: error_report(&pac_state, problem, truth, ModelKind::Pac)?,
        pcc: error_report(&pcc_state, problem, truth, ModelKind::Pcc)?,
        pac_state,
        pcc_state,
        pac_solver,
        pcc_solver,
    })
}

/// Centerline of a state sampled at `points` values of `s` per segment.
pub fn sample_centerline(
    state: &RobotState,
    params: &[crate::kinematics::SegmentParams],
    points: usize,
) -> Result<Vec<CurveSample>> {
    let chain = Chain::new(state, params)?;
    let mut out = Vec::with_capacity(points * params.len());
    for i in 0..params.len() {
        for k in 0..points {
            let s = k as f64 / (points.max(2) - 1) as f64;
            out.push(CurveSample::new(i, s, chain.point(i, s)?.translation));
        }
    }
    Ok(out)
}

/// Tip position of a state.
pub fn tip_position(state: &RobotState, params: &[crate::kinematics::SegmentParams]) -> Result<Vector3<f64>> {
    Ok(Chain::new(state, params)?.tip().translation)
}

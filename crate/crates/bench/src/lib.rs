//! Shared fixtures for the benchmarks.

use nalgebra::Vector3;
use pac_core::actuation::{symmetric_routing, tendon_lengths};
use pac_core::kinematics::{RobotState, SegmentParams, SegmentState};
use pac_core::{PointLoad, StaticsProblem, TendonCommand};

/// One module of the shipped arm, in SI units.
pub fn module() -> SegmentParams {
    SegmentParams {
        rest_length: 0.1354,
        radius: 0.04,
        mass: 0.08,
        k_bending: 0.1,
        k_torsion: 0.1,
        k_axial: 1078.0,
    }
}

pub fn arm(segments: usize) -> Vec<SegmentParams> {
    vec![module(); segments]
}

pub fn bent(segments: usize) -> RobotState {
    RobotState::new(
        (0..segments)
            .map(|i| SegmentState::new(0.8 - 0.3 * i as f64, 0.5, 0.4 * i as f64, -0.002))
            .collect(),
    )
}

/// Hanging arm, three tendons per segment, first tendon shortened by 10 mm,
/// mass at the tip.
pub fn loaded_problem(segments: usize, tip_mass: f64) -> StaticsProblem {
    let params = arm(segments);
    let mut p = StaticsProblem::new(params.clone());
    p.gravity = Vector3::new(0.0, 0.0, 9.81);
    p.tendons = symmetric_routing(segments, 3, 0.03, 10);
    let mut targets: Vec<f64> = tendon_lengths(&RobotState::zeros(segments), &p.tendons, &params)
        .expect("straight lengths")
        .iter()
        .copied()
        .collect();
    targets[0] -= 0.01;
    p.command = Some(TendonCommand::hold(targets).with_gains(1000.0, 1000.0));
    p.loads.push(PointLoad::tip_mass(segments - 1, tip_mass, &p.gravity));
    p
}

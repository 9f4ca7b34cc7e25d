use nalgebra::{DVector, Vector3};
use pac_core::actuation::{actuation_matrix, symmetric_routing, tendon_force, tendon_length_jacobian, tendon_lengths};
use pac_core::geometry::arc::arc_integral;
use pac_core::geometry::transform::geodesic_angle;
use pac_core::kinematics::{point_pose, SegmentParams, SegmentState};
use pac_core::mechanics::{elastic_energy, elastic_force, gravity_force, gravity_potential};
use pac_core::numdiff::{gradient, point_jacobian_fd};
use pac_core::*;
use proptest::prelude::*;

fn params(n: usize) -> Vec<SegmentParams> {
    (0..n)
        .map(|i| SegmentParams {
            rest_length: 0.12 + 0.02 * i as f64,
            radius: 0.03,
            mass: 0.08,
            k_bending: 0.7 + 0.1 * i as f64,
            k_torsion: 0.5,
            k_axial: 900.0,
        })
        .collect()
}

fn segment_state() -> impl Strategy<Value = SegmentState> {
    (-3.0..3.0f64, -5.0..5.0f64, -3.1..3.1f64, -0.02..0.02f64)
        .prop_map(|(c0, c1, phi, dl)| SegmentState::new(c0, c1, phi, dl))
}

fn robot_state(n: usize) -> impl Strategy<Value = RobotState> {
    prop::collection::vec(segment_state(), n).prop_map(RobotState::new)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn frames_stay_orthonormal(state in robot_state(3), s in 0.0..=1.0f64, seg in 0usize..3) {
        let pose = point_pose(&state, &params(3), seg, s).unwrap();
        prop_assert!(pose.orthonormality_defect() < 1e-12);
        prop_assert!((pose.rotation.determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pose_at_segment_base_is_identity(q in segment_state()) {
        let pose = segment_pose(&q, &params(1)[0], 0.0).unwrap();
        prop_assert!(pose.translation.norm() == 0.0);
        prop_assert!((pose.rotation - nalgebra::Matrix3::identity()).norm() < 1e-15);
    }

    #[test]
    fn arc_integral_matches_quadrature(c0 in -12.0..12.0f64, c1 in -12.0..12.0f64) {
        let closed = arc_integral(c0, c1, 1.0);
        let re = adaptive_quadrature(|v| (c0 * v + 0.5 * c1 * v * v).cos(), 0.0, 1.0, 1e-12).unwrap();
        let im = adaptive_quadrature(|v| (c0 * v + 0.5 * c1 * v * v).sin(), 0.0, 1.0, 1e-12).unwrap();
        prop_assert!((closed.re - re).abs() < 1e-10);
        prop_assert!((closed.im - im).abs() < 1e-10);
    }

    #[test]
    fn point_jacobian_matches_finite_differences(state in robot_state(3), s in 0.0..=1.0f64, seg in 0usize..3) {
        let p = params(3);
        let analytic = point_jacobian(&state, &p, seg, s).unwrap();
        let fd = point_jacobian_fd(&state, &p, seg, s, 1e-6).unwrap();
        let scale = fd.amax().max(1.0);
        prop_assert!((analytic - fd).amax() / scale < 1e-6);
    }

    #[test]
    fn elastic_force_is_energy_gradient(state in robot_state(2), stiffening in 0.0..20.0f64) {
        let model = StiffnessModel::from_params(&params(2)).with_contraction_stiffening(stiffening);
        let f = elastic_force(&state, &model).unwrap().values;
        let fd = gradient(
            |x| elastic_energy(&RobotState::from_vector(x).unwrap(), &model).unwrap(),
            &state.to_vector(),
            1e-6,
        );
        for k in 0..f.len() {
            prop_assert!(rel(f[k], fd[k]) < 1e-6, "k={} {} {}", k, f[k], fd[k]);
        }
    }

    #[test]
    fn gravity_force_is_potential_gradient(state in robot_state(2), gx in -10.0..10.0f64, gz in -10.0..10.0f64) {
        let p = params(2);
        let g = Vector3::new(gx, 1.0, gz);
        let f = gravity_force(&state, &p, &g).unwrap().values;
        let fd = gradient(
            |x| gravity_potential(&RobotState::from_vector(x).unwrap(), &p, &g).unwrap(),
            &state.to_vector(),
            1e-6,
        );
        for k in 0..f.len() {
            prop_assert!(rel(f[k], fd[k]) < 1e-6, "k={} {} {}", k, f[k], fd[k]);
        }
    }

    #[test]
    fn actuation_obeys_virtual_work(
        state in robot_state(2),
        tensions in prop::collection::vec(0.0..30.0f64, 6),
        dq in prop::collection::vec(-1.0..1.0f64, 8),
    ) {
        let p = params(2);
        let routing = symmetric_routing(2, 3, 0.02, 6);
        let a = actuation_matrix(&state, &routing, &p).unwrap();
        let (_, dl) = tendon_length_jacobian(&state, &routing, &p).unwrap();
        let f = DVector::from_vec(tensions);
        let dq = DVector::from_vec(dq);
        let lhs = (&a * &f).dot(&dq);
        let rhs = -f.dot(&(&dl * &dq));
        prop_assert!((lhs - rhs).abs() < 1e-8 * (1.0 + rhs.abs()));
    }

    #[test]
    fn tendon_length_jacobian_matches_finite_differences(state in robot_state(2)) {
        let p = params(2);
        let routing = symmetric_routing(2, 3, 0.02, 6);
        let (_, jac) = tendon_length_jacobian(&state, &routing, &p).unwrap();
        let q = state.to_vector();
        for j in 0..routing.len() {
            let fd = gradient(
                |x| tendon_lengths(&RobotState::from_vector(x).unwrap(), &routing, &p).unwrap()[j],
                &q,
                1e-6,
            );
            for k in 0..q.len() {
                prop_assert!((jac[(j, k)] - fd[k]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn tensions_are_never_negative(
        l in prop::collection::vec(0.05..0.2f64, 3),
        target in prop::collection::vec(0.05..0.2f64, 3),
        rate in prop::collection::vec(-1.0..1.0f64, 3),
        kp in 0.0..100.0f64,
        kd in 0.0..100.0f64,
    ) {
        let cmd = TendonCommand::hold(target).with_gains(kp, kd);
        let t = tendon_force(&DVector::from_vec(l), &DVector::from_vec(rate), &cmd).unwrap();
        prop_assert!(t.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn zero_gain_commands_exert_nothing(state in robot_state(2), target in prop::collection::vec(0.05..0.2f64, 6)) {
        let p = params(2);
        let mut problem = StaticsProblem::new(p.clone());
        problem.tendons = symmetric_routing(2, 3, 0.02, 6);
        problem.command = Some(TendonCommand::hold(target).with_gains(0.0, 0.0));
        let f = solver::actuation_force(&state, &problem).unwrap();
        prop_assert!(f.values.amax() == 0.0);
    }

    #[test]
    fn frobenius_tracks_geodesic(a in robot_state(1), b in robot_state(1)) {
        let p = params(1);
        let ra = point_pose(&a, &p, 0, 1.0).unwrap().rotation;
        let rb = point_pose(&b, &p, 0, 1.0).unwrap().rotation;
        let theta = geodesic_angle(&ra, &rb);
        let expected = 2.0 * std::f64::consts::SQRT_2 * (theta / 2.0).sin().abs();
        prop_assert!(((ra - rb).norm() - expected).abs() < 1e-9);
    }

    #[test]
    fn canonical_form_preserves_shape(q in segment_state(), s in 0.0..=1.0f64) {
        let p = &params(1)[0];
        let a = segment_pose(&q, p, s).unwrap();
        let b = segment_pose(&q.canonical(), p, s).unwrap();
        prop_assert!((a.translation - b.translation).norm() < 1e-12);
        prop_assert!((a.rotation - b.rotation).norm() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn pac_fit_never_worse_than_pcc(state in robot_state(2)) {
        let p = params(2);
        let samples = oracle::sample_centerline(&state, &p, 11).unwrap();
        let pac = oracle::fit_model(&samples, ModelKind::Pac, &p).unwrap();
        let pcc = oracle::fit_model(&samples, ModelKind::Pcc, &p).unwrap();
        prop_assert!(pac.rms <= pcc.rms + 1e-12);
    }

    #[test]
    fn solver_energy_never_increases(c0 in -1.0..1.0f64, fx in -1.0..1.0f64, fy in -1.0..1.0f64) {
        let p = params(2);
        let mut problem = StaticsProblem::new(p);
        problem.initial.segments[0].c0 = c0;
        problem.gravity = Vector3::new(0.0, 0.0, -9.81);
        problem.loads.push(PointLoad::force(1, 1.0, Vector3::new(fx, fy, -0.5)));
        let options = SolverOptions { record_trajectory: true, ..SolverOptions::default() };
        let (_, report) = solve_statics(&problem, &options).unwrap();
        let energies: Vec<f64> = report
            .trajectory
            .iter()
            .map(|q| solver::total_potential(q, &problem).unwrap())
            .collect();
        for w in energies.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9 * w[0].abs().max(1e-3));
        }
    }
}

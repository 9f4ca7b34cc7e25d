//! Elastic and gravitational potentials and their generalized forces.

use nalgebra::{DVector, Matrix2, Matrix4, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::quadrature::adaptive_quadrature_vec;
use crate::kinematics::{check_lengths, Chain, RobotState, SegmentParams, SegmentState, DOF_PER_SEGMENT};

/// Absolute tolerance of the centroid quadratures (dimensionless, per unit length).
const CENTROID_TOLERANCE: f64 = 1e-13;

/// A vector in configuration space, four entries per segment ordered like
/// `[c0, c1, φ, δL]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedForce {
    pub values: DVector<f64>,
}

impl GeneralizedForce {
    pub fn zeros(segments: usize) -> Self {
        Self {
            values: DVector::zeros(DOF_PER_SEGMENT * segments),
        }
    }

    pub fn segment(&self, i: usize) -> [f64; 4] {
        let v = &self.values;
        let o = DOF_PER_SEGMENT * i;
        [v[o], v[o + 1], v[o + 2], v[o + 3]]
    }

    pub fn norm(&self) -> f64 {
        self.values.norm()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

impl From<DVector<f64>> for GeneralizedForce {
    fn from(values: DVector<f64>) -> Self {
        Self { values }
    }
}

/// The 2×2 Gram matrix of `{1, s}` on `[0, 1]`.
pub fn hankel() -> Matrix2<f64> {
    Matrix2::new(1.0, 0.5, 0.5, 1.0 / 3.0)
}

/// Per-segment stiffness with optional stiffening under axial deformation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StiffnessModel {
    pub k_bending: Vec<f64>,
    pub k_torsion: Vec<f64>,
    pub k_axial: Vec<f64>,
    /// `κ_c` in `k_bending·(1 + κ_c·|δL|)`, per meter. Zero disables stiffening.
    pub contraction_stiffening: f64,
}

impl StiffnessModel {
    pub fn from_params(params: &[SegmentParams]) -> Self {
        Self {
            k_bending: params.iter().map(|p| p.k_bending).collect(),
            k_torsion: params.iter().map(|p| p.k_torsion).collect(),
            k_axial: params.iter().map(|p| p.k_axial).collect(),
            contraction_stiffening: 0.0,
        }
    }

    pub fn with_contraction_stiffening(mut self, kappa: f64) -> Self {
        self.contraction_stiffening = kappa;
        self
    }

    pub fn len(&self) -> usize {
        self.k_bending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k_bending.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        if self.k_torsion.len() != n || self.k_axial.len() != n {
            return Err(Error::InvalidParameter("stiffness lists have different lengths".into()));
        }
        let all = self.k_bending.iter().chain(&self.k_torsion).chain(&self.k_axial);
        if all.clone().any(|k| !(*k > 0.0 && k.is_finite())) {
            return Err(Error::InvalidParameter("stiffnesses must be positive".into()));
        }
        if !(self.contraction_stiffening >= 0.0 && self.contraction_stiffening.is_finite()) {
            return Err(Error::InvalidParameter(
                "contraction stiffening must be non-negative".into(),
            ));
        }
        Ok(())
    }

    fn bending_at(&self, i: usize, delta_l: f64) -> f64 {
        self.k_bending[i] * (1.0 + self.contraction_stiffening * delta_l.abs())
    }

    /// Stiffness block of segment `i` at the given axial deformation.
    pub fn block(&self, i: usize, delta_l: f64) -> Matrix4<f64> {
        let mut k = Matrix4::zeros();
        k.fixed_view_mut::<2, 2>(0, 0)
            .copy_from(&(hankel() * self.bending_at(i, delta_l)));
        k[(2, 2)] = self.k_torsion[i];
        k[(3, 3)] = self.k_axial[i];
        k
    }

    /// Block of segment `i` in the undeformed state.
    pub fn rest_block(&self, i: usize) -> Matrix4<f64> {
        self.block(i, 0.0)
    }

    fn check(&self, state: &RobotState) -> Result<()> {
        if self.len() != state.len() {
            return Err(Error::LengthMismatch {
                what: "stiffness records",
                expected: state.len(),
                actual: self.len(),
            });
        }
        Ok(())
    }
}

fn curvature_quadratic(q: &SegmentState) -> f64 {
    let c = nalgebra::Vector2::new(q.c0, q.c1);
    c.dot(&(hankel() * c))
}

/// `½ Σ qᵢᵀ Kᵢ qᵢ`.
pub fn elastic_energy(state: &RobotState, model: &StiffnessModel) -> Result<f64> {
    model.check(state)?;
    Ok(state
        .segments
        .iter()
        .enumerate()
        .map(|(i, q)| {
            0.5 * (model.bending_at(i, q.delta_l) * curvature_quadratic(q)
                + model.k_torsion[i] * q.phi * q.phi
                + model.k_axial[i] * q.delta_l * q.delta_l)
        })
        .sum())
}

/// Restoring force `∇ elastic_energy`; equals `Kᵢ qᵢ` per segment without stiffening.
pub fn elastic_force(state: &RobotState, model: &StiffnessModel) -> Result<GeneralizedForce> {
    model.check(state)?;
    let mut out = GeneralizedForce::zeros(state.len());
    for (i, q) in state.segments.iter().enumerate() {
        let kb = model.bending_at(i, q.delta_l);
        let hc = hankel() * nalgebra::Vector2::new(q.c0, q.c1);
        let o = DOF_PER_SEGMENT * i;
        out.values[o] = kb * hc[0];
        out.values[o + 1] = kb * hc[1];
        out.values[o + 2] = model.k_torsion[i] * q.phi;
        let stiffening =
            0.5 * model.k_bending[i] * model.contraction_stiffening * q.delta_l.signum() * curvature_quadratic(q);
        out.values[o + 3] = model.k_axial[i] * q.delta_l + if q.delta_l == 0.0 { 0.0 } else { stiffening };
    }
    Ok(out)
}

/// Mean over `s ∈ [0,1]` of a segment's local centerline position, and of its
/// sensitivities to `[c0, c1, φ, δL]`.
pub(crate) fn segment_centroid(q: &SegmentState, p: &SegmentParams) -> Result<(Vector3<f64>, [Vector3<f64>; 4])> {
    // ∫₀¹ ∫₀ˢ g(v) dv ds = ∫₀¹ (1 − v) g(v) dv.
    let weighted = adaptive_quadrature_vec(
        |v| {
            let e = Complex64::from_polar(1.0 - v, q.alpha(v));
            let e1 = e * v;
            let e2 = e1 * (0.5 * v);
            DVector::from_column_slice(&[e.re, e.im, e1.re, e1.im, e2.re, e2.im])
        },
        0.0,
        1.0,
        CENTROID_TOLERANCE,
    )?;
    let w0 = Complex64::new(weighted[0], weighted[1]);
    let w1 = Complex64::new(weighted[2], weighted[3]);
    let w2 = Complex64::new(weighted[4], weighted[5]);
    let length = p.rest_length + q.delta_l;
    let (sp, cp) = q.phi.sin_cos();
    let unit = Vector3::new(cp * w0.im, sp * w0.im, w0.re);
    let d_coeff = |m: Complex64| Vector3::new(length * cp * m.re, length * sp * m.re, -length * m.im);
    Ok((
        unit * length,
        [
            d_coeff(w1),
            d_coeff(w2),
            Vector3::new(-length * sp * w0.im, length * cp * w0.im, 0.0),
            unit,
        ],
    ))
}

/// `U = Σ mᵢ ∫₀¹ (−g)·pᵢ(s) ds` with mass spread uniformly along each centerline.
pub fn gravity_potential(state: &RobotState, params: &[SegmentParams], gravity: &Vector3<f64>) -> Result<f64> {
    check_lengths(state, params)?;
    if gravity.norm() == 0.0 {
        return Ok(0.0);
    }
    let chain = Chain::new(state, params)?;
    let mut total = 0.0;
    for (i, (q, p)) in state.segments.iter().zip(params).enumerate() {
        if p.mass == 0.0 {
            continue;
        }
        let (mean, _) = segment_centroid(q, p)?;
        total -= p.mass * gravity.dot(&chain.world_position(i, &mean));
    }
    Ok(total)
}

/// `G = ∇ gravity_potential`, assembled from centroid Jacobians.
pub fn gravity_force(state: &RobotState, params: &[SegmentParams], gravity: &Vector3<f64>) -> Result<GeneralizedForce> {
    check_lengths(state, params)?;
    let mut out = GeneralizedForce::zeros(state.len());
    if gravity.norm() == 0.0 {
        return Ok(out);
    }
    let chain = Chain::new(state, params)?;
    for (i, (q, p)) in state.segments.iter().zip(params).enumerate() {
        if p.mass == 0.0 {
            continue;
        }
        let (mean, d_mean) = segment_centroid(q, p)?;
        let jac = chain.position_jacobian(i, &mean, &d_mean);
        out.values -= jac.tr_mul(gravity) * p.mass;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::quadrature::adaptive_quadrature;
    use crate::kinematics::point_pose;
    use crate::numdiff::gradient;
    use approx::assert_abs_diff_eq;

    fn params(mass: f64) -> SegmentParams {
        SegmentParams {
            rest_length: 0.1354,
            radius: 0.04,
            mass,
            k_bending: 1.0,
            k_torsion: 1.0,
            k_axial: 1078.0,
        }
    }

    fn one(q: [f64; 4]) -> RobotState {
        RobotState::new(vec![SegmentState::from_array(q)])
    }

    #[test]
    fn hankel_rows() {
        let model = StiffnessModel::from_params(&[params(0.0)]);
        let f = elastic_force(&one([1.0, 0.0, 0.0, 0.0]), &model).unwrap();
        assert_eq!(f.segment(0), [1.0, 0.5, 0.0, 0.0]);
        let f = elastic_force(&one([1.0, -2.0, 0.0, 0.0]), &model).unwrap();
        assert_abs_diff_eq!(f.values[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f.values[1], -1.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn axial_entry_uses_measured_stiffness() {
        let model = StiffnessModel::from_params(&[params(0.0)]);
        let f = elastic_force(&one([0.0, 0.0, 0.0, 0.01]), &model).unwrap();
        assert_abs_diff_eq!(f.values[3], 10.78, epsilon = 1e-12);
    }

    #[test]
    fn energy_values_and_scaling() {
        let model = StiffnessModel::from_params(&[params(0.0)]);
        assert_eq!(elastic_energy(&RobotState::zeros(1), &model).unwrap(), 0.0);
        assert_abs_diff_eq!(elastic_energy(&one([1.0, 0.0, 0.0, 0.0]), &model).unwrap(), 0.5);
        let q = [0.3, -0.7, 0.2, 0.004];
        let q2 = q.map(|v| 2.0 * v);
        let e1 = elastic_energy(&one(q), &model).unwrap();
        let e2 = elastic_energy(&one(q2), &model).unwrap();
        assert_abs_diff_eq!(e2, 4.0 * e1, epsilon = 1e-14);
        let f1 = elastic_force(&one(q), &model).unwrap().values;
        let f2 = elastic_force(&one(q2), &model).unwrap().values;
        assert_abs_diff_eq!(f2, f1 * 2.0, epsilon = 1e-14);
    }

    #[test]
    fn stiffening_force_is_energy_gradient() {
        let model = StiffnessModel::from_params(&[params(0.0)]).with_contraction_stiffening(25.0);
        let state = one([0.8, -1.1, 0.3, -0.012]);
        let g = gradient(
            |x| elastic_energy(&RobotState::from_vector(x).unwrap(), &model).unwrap(),
            &state.to_vector(),
            1e-6,
        );
        let f = elastic_force(&state, &model).unwrap().values;
        assert!((f - g).amax() < 1e-8);
    }

    #[test]
    fn vertical_rod_potential_and_force() {
        let (m, g) = (0.08, 9.81);
        let gravity = Vector3::new(0.0, 0.0, -g);
        let p = [params(m)];
        let state = one([0.0, 0.0, 0.0, 0.01]);
        let u = gravity_potential(&state, &p, &gravity).unwrap();
        assert_abs_diff_eq!(u, m * g * (0.1354 + 0.01) / 2.0, epsilon = 1e-14);
        let f = gravity_force(&state, &p, &gravity).unwrap();
        assert_abs_diff_eq!(f.values[3], m * g / 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f.values[0], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn zero_gravity_is_inert() {
        let state = one([0.4, 0.2, 0.1, 0.0]);
        let p = [params(0.1)];
        assert_eq!(gravity_potential(&state, &p, &Vector3::zeros()).unwrap(), 0.0);
        assert_eq!(gravity_force(&state, &p, &Vector3::zeros()).unwrap().norm(), 0.0);
    }

    #[test]
    fn horizontal_segment_ignores_extension() {
        let p = vec![params(0.1), params(0.1)];
        let gravity = Vector3::new(0.0, 0.0, -9.81);
        let bend = SegmentState::new(std::f64::consts::FRAC_PI_2, 0.0, 0.0, 0.0);
        let u = |dl: f64| {
            let state = RobotState::new(vec![bend, SegmentState::new(0.0, 0.0, 0.0, dl)]);
            gravity_potential(&state, &p, &gravity).unwrap()
        };
        assert_abs_diff_eq!(u(0.0), u(0.02), epsilon = 1e-14);
    }

    #[test]
    fn potential_matches_pointwise_quadrature() {
        let state = RobotState::new(vec![
            SegmentState::new(1.1, -0.6, 0.4, 0.003),
            SegmentState::new(-0.5, 2.0, -1.0, -0.01),
        ]);
        let p = vec![params(0.07), params(0.05)];
        let gravity = Vector3::new(1.0, -3.0, -9.0);
        let mut expected = 0.0;
        for (i, pi) in p.iter().enumerate() {
            expected += pi.mass
                * adaptive_quadrature(
                    |s| -gravity.dot(&point_pose(&state, &p, i, s).unwrap().translation),
                    0.0,
                    1.0,
                    1e-13,
                )
                .unwrap();
        }
        assert_abs_diff_eq!(
            gravity_potential(&state, &p, &gravity).unwrap(),
            expected,
            epsilon = 1e-12
        );
    }

    #[test]
    fn gravity_force_is_potential_gradient() {
        let state = RobotState::new(vec![
            SegmentState::new(1.4, -0.9, 0.7, 0.01),
            SegmentState::new(-2.2, 1.5, 2.0, -0.02),
            SegmentState::new(0.3, 0.4, -0.3, 0.0),
        ]);
        let p = vec![params(0.08); 3];
        let gravity = Vector3::new(-9.81, 0.0, 0.0);
        let g = gradient(
            |x| gravity_potential(&RobotState::from_vector(x).unwrap(), &p, &gravity).unwrap(),
            &state.to_vector(),
            1e-6,
        );
        let f = gravity_force(&state, &p, &gravity).unwrap().values;
        assert!((f - &g).amax() / g.amax() < 1e-7);
    }

    #[test]
    fn stiffness_block_structure() {
        let model = StiffnessModel::from_params(&[params(0.0)]);
        let k = model.rest_block(0);
        assert_eq!(k, k.transpose());
        assert!(k.symmetric_eigenvalues().iter().all(|&e| e > 0.0));
        assert_eq!(k[(0, 1)], 0.5);
        assert_eq!(k[(1, 1)], 1.0 / 3.0);
    }
}

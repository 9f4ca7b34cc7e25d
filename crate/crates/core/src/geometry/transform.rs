use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

/// Rotation + translation pair mapping child-frame coordinates into the parent frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidTransform {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl RigidTransform {
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Self {
        Self { rotation, translation }
    }

    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn from_translation(translation: Vector3<f64>) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation,
        }
    }

    /// `self ∘ child`: rotation `R_p R_c`, translation `R_p t_c + t_p`.
    pub fn compose(&self, child: &RigidTransform) -> RigidTransform {
        compose(self, child)
    }

    pub fn inverse(&self) -> RigidTransform {
        let rt = self.rotation.transpose();
        RigidTransform {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    /// Largest deviation of `RᵀR` from the identity and of `det R` from one.
    pub fn orthonormality_defect(&self) -> f64 {
        let r = &self.rotation;
        let gram = (r.transpose() * r - Matrix3::identity()).abs().max();
        gram.max((r.determinant() - 1.0).abs())
    }
}

pub fn compose(parent: &RigidTransform, child: &RigidTransform) -> RigidTransform {
    RigidTransform {
        rotation: parent.rotation * child.rotation,
        translation: parent.rotation * child.translation + parent.translation,
    }
}

/// Rotation of the frame attached at a centerline point whose tangent has
/// turned by `alpha` inside the bending plane selected by `phi`:
///
/// ```text
/// ⎡ cα·cφ  −sφ  sα·cφ ⎤
/// ⎢ cα·sφ   cφ  sα·sφ ⎥
/// ⎣  −sα     0    cα  ⎦
/// ```
///
/// i.e. `Rz(φ)·Ry(α)`.
pub fn rotation_from_alpha_phi(alpha: f64, phi: f64) -> Matrix3<f64> {
    let (sa, ca) = alpha.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Matrix3::new(
        ca * cp,
        -sp,
        sa * cp, //
        ca * sp,
        cp,
        sa * sp, //
        -sa,
        0.0,
        ca,
    )
}

pub fn rot_z(angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Inverse of [`skew`] applied to the antisymmetric part of `m`.
pub fn vee(m: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(
        0.5 * (m[(2, 1)] - m[(1, 2)]),
        0.5 * (m[(0, 2)] - m[(2, 0)]),
        0.5 * (m[(1, 0)] - m[(0, 1)]),
    )
}

/// Rotation by `angle` about the unit `axis` (Rodrigues).
pub fn axis_angle(axis: &Vector3<f64>, angle: f64) -> Matrix3<f64> {
    let k = skew(axis);
    Matrix3::identity() + k * angle.sin() + k * k * (1.0 - angle.cos())
}

/// Minimal rotation carrying unit vector `from` onto unit vector `to`.
pub fn align(from: &Vector3<f64>, to: &Vector3<f64>) -> Matrix3<f64> {
    let axis = from.cross(to);
    let s = axis.norm();
    let c = from.dot(to);
    if s < 1e-15 {
        if c > 0.0 {
            return Matrix3::identity();
        }
        // Antiparallel: rotate by π about any axis orthogonal to `from`.
        let helper = if from.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
        let ortho = from.cross(&helper).normalize();
        return axis_angle(&ortho, std::f64::consts::PI);
    }
    axis_angle(&(axis / s), s.atan2(c))
}

/// Geodesic angle between two rotations, computed from the Frobenius distance
/// through `‖R₁ − R₂‖_F = 2√2·|sin(θ/2)|`.
pub fn geodesic_angle(a: &Matrix3<f64>, b: &Matrix3<f64>) -> f64 {
    let frob = (a - b).norm();
    2.0 * (frob / (2.0 * std::f64::consts::SQRT_2)).min(1.0).asin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn zero_angles_give_identity() {
        assert_eq!(rotation_from_alpha_phi(0.0, 0.0), Matrix3::identity());
    }

    #[test]
    fn quarter_bend_in_xz_plane() {
        let r = rotation_from_alpha_phi(FRAC_PI_2, 0.0);
        let expected = Matrix3::new(0.0, 0.0, 1.0, 0.0, 1.0, 0.0, -1.0, 0.0, 0.0);
        assert_abs_diff_eq!(r, expected, epsilon = 1e-15);
    }

    #[test]
    fn matches_rz_ry_product() {
        let (a, p): (f64, f64) = (0.3, 1.1);
        let ry = Matrix3::new(a.cos(), 0.0, a.sin(), 0.0, 1.0, 0.0, -a.sin(), 0.0, a.cos());
        assert_abs_diff_eq!(rotation_from_alpha_phi(a, p), rot_z(p) * ry, epsilon = 1e-15);
        let t = RigidTransform::new(rotation_from_alpha_phi(a, p), Vector3::zeros());
        assert!(t.orthonormality_defect() < 1e-12);
    }

    #[test]
    fn compose_identities_and_translations() {
        let t = RigidTransform::new(rotation_from_alpha_phi(0.7, -0.2), Vector3::new(1.0, 2.0, 3.0));
        assert_eq!(compose(&RigidTransform::identity(), &t), t);
        assert_eq!(compose(&t, &RigidTransform::identity()), t);
        let up = RigidTransform::from_translation(Vector3::z());
        assert_eq!(compose(&up, &up).translation, Vector3::new(0.0, 0.0, 2.0));
    }

    #[test]
    fn inverse_roundtrip() {
        let t = RigidTransform::new(rotation_from_alpha_phi(0.4, 2.0), Vector3::new(-1.0, 0.5, 0.25));
        let id = t.compose(&t.inverse());
        assert_abs_diff_eq!(id.rotation, Matrix3::identity(), epsilon = 1e-14);
        assert_abs_diff_eq!(id.translation, Vector3::zeros(), epsilon = 1e-14);
    }

    #[test]
    fn align_handles_parallel_and_antiparallel() {
        let z = Vector3::z();
        assert_eq!(align(&z, &z), Matrix3::identity());
        let flipped = align(&z, &-z) * z;
        assert_abs_diff_eq!(flipped, -z, epsilon = 1e-15);
        let to = Vector3::new(1.0, 1.0, 0.0).normalize();
        assert_abs_diff_eq!(align(&z, &to) * z, to, epsilon = 1e-15);
    }

    #[test]
    fn geodesic_matches_rotation_angle() {
        for &theta in &[0.0, 1e-6, 0.3, 2.0, 3.1] {
            let r = axis_angle(&Vector3::new(0.0, 0.6, 0.8), theta);
            assert_abs_diff_eq!(geodesic_angle(&Matrix3::identity(), &r), theta, epsilon = 1e-9);
        }
    }

    #[test]
    fn vee_inverts_skew() {
        let v = Vector3::new(0.1, -2.0, 3.5);
        assert_eq!(vee(&skew(&v)), v);
    }
}

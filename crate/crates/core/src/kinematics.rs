//! Forward kinematics of the piecewise affine curvature model and its
//! configuration-space Jacobians.
//!
//! A segment is described by `q = [c0, c1, φ, δL]`. The tangent angle inside
//! the bending plane is `α(s) = c0·s + c1·s²/2` for the normalized coordinate
//! `s ∈ [0, 1]`, the bending plane is rotated by `φ` about the base tangent, and
//! the centerline length is `L + δL`. Constant curvature is the `c1 = 0` case.
//!
//! Frames carry no twist: the rotation at `s` is `Rz(φ)·Ry(α)·Rz(−φ)`, so the
//! frame at `s = 0` is the identity and `φ` drops out of a straight segment.

use nalgebra::{DMatrix, DVector, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::arc::{arc_integral, arc_moments};
use crate::geometry::transform::{rot_z, rotation_from_alpha_phi, RigidTransform};

/// Coordinates per segment.
pub const DOF_PER_SEGMENT: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Piecewise affine curvature.
    #[default]
    Pac,
    /// Piecewise constant curvature (`c1 ≡ 0`).
    Pcc,
}

impl ModelKind {
    /// Whether coordinate `k` of a segment (`0..4`) is free under this model.
    pub fn is_free(self, k: usize) -> bool {
        !(self == ModelKind::Pcc && k == 1)
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelKind::Pac => "pac",
            ModelKind::Pcc => "pcc",
        })
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pac" => Ok(ModelKind::Pac),
            "pcc" => Ok(ModelKind::Pcc),
            other => Err(Error::InvalidParameter(format!(
                "unknown model kind `{other}` (expected pac or pcc)"
            ))),
        }
    }
}

/// Lagrangian coordinates of one segment.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SegmentState {
    /// Zero-order curvature coefficient (rad).
    pub c0: f64,
    /// First-order curvature coefficient (rad).
    pub c1: f64,
    /// Bending-plane angle (rad).
    pub phi: f64,
    /// Axial length change (m).
    pub delta_l: f64,
}

impl SegmentState {
    pub fn new(c0: f64, c1: f64, phi: f64, delta_l: f64) -> Self {
        Self { c0, c1, phi, delta_l }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.c0, self.c1, self.phi, self.delta_l]
    }

    pub fn from_array(q: [f64; 4]) -> Self {
        Self::new(q[0], q[1], q[2], q[3])
    }

    /// Tangent angle `α(s)`.
    pub fn alpha(&self, s: f64) -> f64 {
        self.c0 * s + 0.5 * self.c1 * s * s
    }

    /// Same centerline, written with tip angle `α(1) ≥ 0` and `φ ∈ (−π, π]`.
    /// `(c0, c1, φ)` and `(−c0, −c1, φ + π)` describe identical shapes.
    pub fn canonical(&self) -> SegmentState {
        use std::f64::consts::PI;
        let tip = self.alpha(1.0);
        let flip = tip < 0.0 || (tip == 0.0 && self.c0 < 0.0);
        let (c0, c1, mut phi) = if flip {
            (-self.c0, -self.c1, self.phi + PI)
        } else {
            (self.c0, self.c1, self.phi)
        };
        phi = (phi + PI).rem_euclid(2.0 * PI) - PI;
        if phi <= -PI {
            phi += 2.0 * PI;
        }
        SegmentState::new(c0, c1, phi, self.delta_l)
    }
}

/// Geometry and material of one segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentParams {
    /// Rest length `L` (m).
    pub rest_length: f64,
    /// Cross-section radius (m), constant along the segment.
    pub radius: f64,
    /// Segment mass (kg), uniformly distributed along the centerline.
    pub mass: f64,
    /// Bending stiffness (N·m per rad² of normalized curvature).
    pub k_bending: f64,
    /// Stiffness on the bending-plane angle (N·m/rad²).
    pub k_torsion: f64,
    /// Axial stiffness (N/m).
    pub k_axial: f64,
}

impl SegmentParams {
    pub fn validate(&self, index: usize) -> Result<()> {
        let bad = |what: &str, v: f64| {
            Err(Error::InvalidParameter(format!(
                "segment {}: {what} must be positive, got {v}",
                index + 1
            )))
        };
        let checks = [
            ("rest_length", self.rest_length),
            ("radius", self.radius),
            ("k_bending", self.k_bending),
            ("k_torsion", self.k_torsion),
            ("k_axial", self.k_axial),
        ];
        for (what, v) in checks {
            if !(v > 0.0 && v.is_finite()) {
                return bad(what, v);
            }
        }
        if !(self.mass >= 0.0 && self.mass.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "segment {}: mass must be non-negative, got {}",
                index + 1,
                self.mass
            )));
        }
        Ok(())
    }
}

/// Configuration of the whole manipulator, base to tip.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RobotState {
    pub segments: Vec<SegmentState>,
}

impl RobotState {
    pub fn new(segments: Vec<SegmentState>) -> Self {
        Self { segments }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            segments: vec![SegmentState::default(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn dof(&self) -> usize {
        DOF_PER_SEGMENT * self.segments.len()
    }

    /// Flattens to `[c0, c1, φ, δL]` per segment.
    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_iterator(self.dof(), self.segments.iter().flat_map(|s| s.as_array()))
    }

    pub fn from_vector(q: &DVector<f64>) -> Result<Self> {
        if !q.len().is_multiple_of(DOF_PER_SEGMENT) || q.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "configuration vector length {} is not a positive multiple of {DOF_PER_SEGMENT}",
                q.len()
            )));
        }
        Ok(Self {
            segments: q
                .as_slice()
                .chunks_exact(DOF_PER_SEGMENT)
                .map(|c| SegmentState::new(c[0], c[1], c[2], c[3]))
                .collect(),
        })
    }

    /// Checks the model contract and segment lengths against `params`.
    pub fn validate(&self, params: &[SegmentParams], model: ModelKind) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::InvalidParameter("robot has no segments".into()));
        }
        check_lengths(self, params)?;
        for (i, (q, p)) in self.segments.iter().zip(params).enumerate() {
            if q.as_array().iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "segment {}: non-finite coordinate",
                    i + 1
                )));
            }
            if p.rest_length + q.delta_l <= 0.0 {
                return Err(Error::Collapsed {
                    index: i + 1,
                    length: p.rest_length + q.delta_l,
                });
            }
            if model == ModelKind::Pcc && q.c1 != 0.0 {
                return Err(Error::PccCurvatureSlope {
                    segment: i + 1,
                    c1: q.c1,
                });
            }
        }
        Ok(())
    }
}

pub(crate) fn check_lengths(state: &RobotState, params: &[SegmentParams]) -> Result<()> {
    if state.len() != params.len() {
        return Err(Error::LengthMismatch {
            what: "segment parameter records",
            expected: state.len(),
            actual: params.len(),
        });
    }
    Ok(())
}

pub(crate) fn check_s(s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::CoordinateOutOfRange(s));
    }
    Ok(())
}

/// Pose of the frame at `s` relative to the segment base, with its first-order
/// sensitivities to `[c0, c1, φ, δL]`.
#[derive(Debug, Clone, Copy)]
pub struct LocalPose {
    pub pose: RigidTransform,
    /// `∂t/∂q_k`.
    pub d_translation: [Vector3<f64>; 4],
    /// Angular velocity of the frame per unit `q̇_k`, in segment-base coordinates.
    pub d_rotation: [Vector3<f64>; 4],
}

/// Pose of the frame at `s` together with its derivatives. No range checks.
pub fn local_pose(state: &SegmentState, params: &SegmentParams, s: f64) -> LocalPose {
    let SegmentState { c0, c1, phi, delta_l } = *state;
    let length = params.rest_length + delta_l;
    let alpha = state.alpha(s);
    let (sp, cp) = phi.sin_cos();

    let arc = arc_integral(c0, c1, s);
    let (i_sin, i_cos) = (arc.im, arc.re);
    let rotation = rotation_from_alpha_phi(alpha, phi) * rot_z(-phi);
    let translation = Vector3::new(length * cp * i_sin, length * sp * i_sin, length * i_cos);

    let (m1, m2) = arc_moments(c0, c1, s);
    let d_coeff = |m: num_complex::Complex64| {
        // ∂(I_sin, I_cos)/∂c = (Re m, −Im m)
        Vector3::new(length * cp * m.re, length * sp * m.re, -length * m.im)
    };
    let d_translation = [
        d_coeff(m1),
        d_coeff(m2),
        Vector3::new(-length * sp * i_sin, length * cp * i_sin, 0.0),
        Vector3::new(cp * i_sin, sp * i_sin, i_cos),
    ];

    let bend_axis = Vector3::new(-sp, cp, 0.0);
    let z = Vector3::z();
    let d_rotation = [
        bend_axis * s,
        bend_axis * (0.5 * s * s),
        z - rotation * z,
        Vector3::zeros(),
    ];

    LocalPose {
        pose: RigidTransform::new(rotation, translation),
        d_translation,
        d_rotation,
    }
}

/// Transform from the segment base frame to the frame at `s`.
pub fn segment_pose(state: &SegmentState, params: &SegmentParams, s: f64) -> Result<RigidTransform> {
    check_s(s)?;
    Ok(local_pose(state, params, s).pose)
}

/// Base-frame transforms of every segment tip, `T_0^1 … T_0^n`.
pub fn robot_fk(state: &RobotState, params: &[SegmentParams]) -> Result<Vec<RigidTransform>> {
    let chain = Chain::new(state, params)?;
    Ok(chain.bases[1..].to_vec())
}

/// Base-frame pose of the material point `(segment, s)`; `segment` is 0-based.
pub fn point_pose(state: &RobotState, params: &[SegmentParams], segment: usize, s: f64) -> Result<RigidTransform> {
    Chain::new(state, params)?.point(segment, s)
}

/// 6×4n Jacobian of the material point `(segment, s)`: rows 0–2 base-frame
/// position, rows 3–5 body angular velocity.
pub fn point_jacobian(state: &RobotState, params: &[SegmentParams], segment: usize, s: f64) -> Result<DMatrix<f64>> {
    Chain::new(state, params)?.point_jacobian(segment, s)
}

/// Precomputed tip transforms and sensitivities of every segment for one state.
#[derive(Debug, Clone)]
pub struct Chain<'a> {
    state: &'a RobotState,
    params: &'a [SegmentParams],
    /// `bases[i]` maps segment `i` base coordinates to the robot base;
    /// `bases[n]` is the tip.
    bases: Vec<RigidTransform>,
    tips: Vec<LocalPose>,
}

impl<'a> Chain<'a> {
    pub fn new(state: &'a RobotState, params: &'a [SegmentParams]) -> Result<Self> {
        check_lengths(state, params)?;
        if state.is_empty() {
            return Err(Error::InvalidParameter("robot has no segments".into()));
        }
        let mut bases = Vec::with_capacity(state.len() + 1);
        let mut tips = Vec::with_capacity(state.len());
        bases.push(RigidTransform::identity());
        for (i, (q, p)) in state.segments.iter().zip(params).enumerate() {
            if p.rest_length + q.delta_l <= 0.0 {
                return Err(Error::Collapsed {
                    index: i + 1,
                    length: p.rest_length + q.delta_l,
                });
            }
            let tip = local_pose(q, p, 1.0);
            bases.push(bases[i].compose(&tip.pose));
            tips.push(tip);
        }
        Ok(Self {
            state,
            params,
            bases,
            tips,
        })
    }

    pub fn len(&self) -> usize {
        self.tips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tips.is_empty()
    }

    pub fn dof(&self) -> usize {
        DOF_PER_SEGMENT * self.len()
    }

    pub fn state(&self) -> &RobotState {
        self.state
    }

    pub fn params(&self) -> &[SegmentParams] {
        self.params
    }

    /// Base-frame transform of segment `i`'s base.
    pub fn base(&self, i: usize) -> &RigidTransform {
        &self.bases[i]
    }

    pub fn tip(&self) -> &RigidTransform {
        self.bases.last().expect("chain is non-empty")
    }

    fn check_segment(&self, segment: usize) -> Result<()> {
        if segment >= self.len() {
            return Err(Error::SegmentIndex {
                index: segment,
                count: self.len(),
            });
        }
        Ok(())
    }

    pub fn local(&self, segment: usize, s: f64) -> Result<LocalPose> {
        self.check_segment(segment)?;
        check_s(s)?;
        Ok(local_pose(&self.state.segments[segment], &self.params[segment], s))
    }

    pub fn point(&self, segment: usize, s: f64) -> Result<RigidTransform> {
        let local = self.local(segment, s)?;
        Ok(self.bases[segment].compose(&local.pose))
    }

    /// Base-frame position of a point expressed in segment-local coordinates.
    pub fn world_position(&self, segment: usize, local: &Vector3<f64>) -> Vector3<f64> {
        self.bases[segment].transform_point(local)
    }

    /// 3×4n position Jacobian of a point attached to `segment`'s local
    /// frame at `t_local`, whose own sensitivities to that segment's
    /// coordinates are `dt_local`. Linear in `(t_local, dt_local)`, so
    /// integrating the inputs along `s` integrates the Jacobian.
    pub fn position_jacobian(
        &self,
        segment: usize,
        t_local: &Vector3<f64>,
        dt_local: &[Vector3<f64>; 4],
    ) -> DMatrix<f64> {
        let mut jac = DMatrix::zeros(3, self.dof());
        let p = self.world_position(segment, t_local);
        for j in 0..segment {
            let rot = &self.bases[j].rotation;
            let lever = p - self.bases[j + 1].translation;
            for k in 0..DOF_PER_SEGMENT {
                let col = rot * self.tips[j].d_translation[k] + (rot * self.tips[j].d_rotation[k]).cross(&lever);
                jac.fixed_view_mut::<3, 1>(0, DOF_PER_SEGMENT * j + k).copy_from(&col);
            }
        }
        let rot = &self.bases[segment].rotation;
        for (k, dt) in dt_local.iter().enumerate() {
            jac.fixed_view_mut::<3, 1>(0, DOF_PER_SEGMENT * segment + k)
                .copy_from(&(rot * dt));
        }
        jac
    }

    /// Base-frame angular velocity Jacobian (3×4n) of a frame on `segment`.
    pub fn spatial_rotation_jacobian(&self, segment: usize, local: &LocalPose) -> DMatrix<f64> {
        let mut jac = DMatrix::zeros(3, self.dof());
        for j in 0..=segment {
            let rot = &self.bases[j].rotation;
            let omegas = if j == segment {
                &local.d_rotation
            } else {
                &self.tips[j].d_rotation
            };
            for (k, w) in omegas.iter().enumerate() {
                jac.fixed_view_mut::<3, 1>(0, DOF_PER_SEGMENT * j + k)
                    .copy_from(&(rot * w));
            }
        }
        jac
    }

    /// 6×4n point Jacobian, see [`point_jacobian`].
    pub fn point_jacobian(&self, segment: usize, s: f64) -> Result<DMatrix<f64>> {
        let local = self.local(segment, s)?;
        let world = self.bases[segment].compose(&local.pose);
        let jp = self.position_jacobian(segment, &local.pose.translation, &local.d_translation);
        let jw = world.rotation.transpose() * self.spatial_rotation_jacobian(segment, &local);
        let mut jac = DMatrix::zeros(6, self.dof());
        jac.rows_mut(0, 3).copy_from(&jp);
        jac.rows_mut(3, 3).copy_from(&jw);
        Ok(jac)
    }
}

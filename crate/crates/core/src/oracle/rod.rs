//! Discrete elastic rod: nodes joined by extensible elements, bending energy
//! concentrated at the vertices. The base node is clamped with its tangent
//! along `+z`.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::fit::CurveSample;
use crate::error::{Error, Result};
use crate::geometry::transform::{align, axis_angle, RigidTransform};
use crate::kinematics::{check_s, point_pose, RobotState, SegmentParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseRod {
    /// Node positions in the base frame, base to tip.
    pub nodes: Vec<Vector3<f64>>,
    /// Parallel-transported frame at every node.
    pub frames: Vec<Matrix3<f64>>,
    /// Rest length of each element (m).
    pub rest_lengths: Vec<f64>,
    /// `EI` of each element (N·m²).
    pub bending_stiffness: Vec<f64>,
    /// `EA` of each element (N).
    pub axial_stiffness: Vec<f64>,
    /// Mass of each element (kg).
    pub element_mass: Vec<f64>,
    /// Number of elements in each segment.
    pub segment_elements: Vec<usize>,
}

impl DenseRod {
    /// Straight rod at rest, `elements_per_segment` equal elements per segment.
    pub fn new(params: &[SegmentParams], elements_per_segment: usize) -> Result<Self> {
        if params.is_empty() {
            return Err(Error::InvalidParameter("rod needs at least one segment".into()));
        }
        if elements_per_segment < 2 {
            return Err(Error::InvalidParameter(
                "rod needs at least two elements per segment".into(),
            ));
        }
        let mut rod = DenseRod {
            nodes: vec![Vector3::zeros()],
            frames: Vec::new(),
            rest_lengths: Vec::new(),
            bending_stiffness: Vec::new(),
            axial_stiffness: Vec::new(),
            element_mass: Vec::new(),
            segment_elements: vec![elements_per_segment; params.len()],
        };
        let mut z = 0.0;
        for (i, p) in params.iter().enumerate() {
            p.validate(i)?;
            let delta = p.rest_length / elements_per_segment as f64;
            for _ in 0..elements_per_segment {
                rod.rest_lengths.push(delta);
                rod.bending_stiffness.push(p.k_bending * p.rest_length);
                rod.axial_stiffness.push(p.k_axial * p.rest_length);
                rod.element_mass.push(p.mass / elements_per_segment as f64);
                z += delta;
                rod.nodes.push(Vector3::new(0.0, 0.0, z));
            }
        }
        rod.refresh_frames();
        Ok(rod)
    }

    /// Rod whose nodes sit on the centerline of a reduced-order state.
    pub fn from_state(state: &RobotState, params: &[SegmentParams], elements_per_segment: usize) -> Result<Self> {
        let mut rod = Self::new(params, elements_per_segment)?;
        let mut k = 1;
        for i in 0..params.len() {
            for e in 1..=elements_per_segment {
                let s = e as f64 / elements_per_segment as f64;
                rod.nodes[k] = point_pose(state, params, i, s)?.translation;
                k += 1;
            }
        }
        rod.refresh_frames();
        Ok(rod)
    }

    pub fn elements(&self) -> usize {
        self.rest_lengths.len()
    }

    pub fn segments(&self) -> usize {
        self.segment_elements.len()
    }

    /// Index of the first element of segment `i`.
    pub fn segment_offset(&self, i: usize) -> usize {
        self.segment_elements[..i].iter().sum()
    }

    /// Node index and fractional position for `(segment, s)`.
    pub fn locate(&self, segment: usize, s: f64) -> Result<(usize, f64)> {
        if segment >= self.segments() {
            return Err(Error::SegmentIndex {
                index: segment,
                count: self.segments(),
            });
        }
        check_s(s)?;
        let u = self.segment_offset(segment) as f64 + s * self.segment_elements[segment] as f64;
        let k = u.floor() as usize;
        let frac = u - k as f64;
        if k >= self.elements() || frac < 1e-12 {
            Ok((k.min(self.elements()), 0.0))
        } else if frac > 1.0 - 1e-12 {
            Ok((k + 1, 0.0))
        } else {
            Ok((k, frac))
        }
    }

    /// Centerline position at `(segment, s)`, linear between nodes.
    pub fn position(&self, segment: usize, s: f64) -> Result<Vector3<f64>> {
        let (k, frac) = self.locate(segment, s)?;
        if frac == 0.0 {
            Ok(self.nodes[k])
        } else {
            Ok(self.nodes[k] * (1.0 - frac) + self.nodes[k + 1] * frac)
        }
    }

    pub fn tip_pose(&self) -> RigidTransform {
        RigidTransform::new(
            *self.frames.last().expect("rod has nodes"),
            *self.nodes.last().expect("rod has nodes"),
        )
    }

    /// Every node as a labelled sample; joint nodes are reported once, as the
    /// tip of the proximal segment.
    pub fn samples(&self) -> Vec<CurveSample> {
        let mut out = vec![CurveSample::new(0, 0.0, self.nodes[0])];
        let mut k = 1;
        for (i, &n) in self.segment_elements.iter().enumerate() {
            for e in 1..=n {
                out.push(CurveSample::new(i, e as f64 / n as f64, self.nodes[k]));
                k += 1;
            }
        }
        out
    }

    pub fn markers(&self, points: &[(usize, f64)]) -> Result<Vec<CurveSample>> {
        points
            .iter()
            .map(|&(i, s)| Ok(CurveSample::new(i, s, self.position(i, s)?)))
            .collect()
    }

    /// Deformed length of segment `i`.
    pub fn segment_length(&self, i: usize) -> f64 {
        let o = self.segment_offset(i);
        (o..o + self.segment_elements[i])
            .map(|e| (self.nodes[e + 1] - self.nodes[e]).norm())
            .sum()
    }

    /// Curvature at every vertex: turning angle over Voronoi length.
    pub fn vertex_curvatures(&self) -> Vec<f64> {
        (0..self.elements())
            .map(|v| {
                let a = self.incoming_edge(v, &self.nodes);
                let b = self.nodes[v + 1] - self.nodes[v];
                let angle = a.cross(&b).norm().atan2(a.dot(&b));
                let voronoi = if v == 0 {
                    0.5 * b.norm()
                } else {
                    0.5 * (a.norm() + b.norm())
                };
                angle / voronoi
            })
            .collect()
    }

    /// Edge entering vertex `v`; a fixed ghost edge along `+z` at the base.
    pub(crate) fn incoming_edge(&self, v: usize, x: &[Vector3<f64>]) -> Vector3<f64> {
        if v == 0 {
            Vector3::new(0.0, 0.0, self.rest_lengths[0])
        } else {
            x[v] - x[v - 1]
        }
    }

    /// Recomputes node frames from the current node positions.
    pub fn refresh_frames(&mut self) {
        self.frames = transport_frames(&self.nodes);
    }
}

/// Parallel-transported frames at every node of a polyline starting with
/// tangent `+z` and identity frame. Interior nodes take the frame halfway
/// between their two edges; the last node extrapolates half a turn.
pub(crate) fn vertex_frames(nodes: &[Vector3<f64>]) -> Vec<Matrix3<f64>> {
    transport_frames(nodes)
}

fn transport_frames(nodes: &[Vector3<f64>]) -> Vec<Matrix3<f64>> {
    let n = nodes.len() - 1;
    let mut frames = Vec::with_capacity(n + 1);
    let mut edge_frame = Matrix3::identity();
    let mut prev_t = Vector3::z();
    let mut last_half = Matrix3::identity();
    for e in 0..n {
        let t = (nodes[e + 1] - nodes[e]).normalize();
        let (half, full) = half_and_full(&prev_t, &t);
        frames.push(half * edge_frame);
        edge_frame = full * edge_frame;
        last_half = half;
        prev_t = t;
    }
    frames.push(last_half * edge_frame);
    frames
}

fn half_and_full(a: &Vector3<f64>, b: &Vector3<f64>) -> (Matrix3<f64>, Matrix3<f64>) {
    let axis = a.cross(b);
    let s = axis.norm();
    if s < 1e-300 {
        let full = align(a, b);
        return (full, full);
    }
    let angle = s.atan2(a.dot(b));
    let k = axis / s;
    (axis_angle(&k, 0.5 * angle), axis_angle(&k, angle))
}

//! Tendon routing geometry, the servo tension law and the tension-to-force map.
//!
//! Each tendon runs through guides on a single segment and reaches that
//! segment's base through a sheathed cable, so its length depends only on the
//! owning segment's coordinates. Guides are offset from the centerline by the
//! attachment radius `d` at azimuth `ψ` in the cross-section plane.

use nalgebra::{DMatrix, DVector, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{check_lengths, local_pose, RobotState, SegmentParams, DOF_PER_SEGMENT};

/// Proportional and derivative gain used when a command leaves them unset (N/m, N·s/m).
pub const DEFAULT_GAIN: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TendonRouting {
    /// Owning segment, 0-based.
    pub segment: usize,
    /// Attachment radius `d` (m).
    pub radius: f64,
    /// Angular position around the cross-section (rad).
    pub azimuth: f64,
    /// Normalized guide positions, strictly increasing and ending at 1.
    /// The path always starts at `s = 0`.
    pub stations: Vec<f64>,
}

impl TendonRouting {
    pub fn new(segment: usize, radius: f64, azimuth: f64, stations: Vec<f64>) -> Self {
        Self {
            segment,
            radius,
            azimuth,
            stations,
        }
    }

    /// `count` evenly spaced guides on `(0, 1]`.
    pub fn evenly_spaced(segment: usize, radius: f64, azimuth: f64, count: usize) -> Self {
        let stations = (1..=count.max(1)).map(|k| k as f64 / count.max(1) as f64).collect();
        Self::new(segment, radius, azimuth, stations)
    }

    pub fn validate(&self, params: &[SegmentParams]) -> Result<()> {
        let p = params.get(self.segment).ok_or(Error::SegmentIndex {
            index: self.segment,
            count: params.len(),
        })?;
        if !(self.radius >= 0.0 && self.radius <= p.radius) {
            return Err(Error::InvalidParameter(format!(
                "tendon radius {} m must lie in [0, {}] m",
                self.radius, p.radius
            )));
        }
        if !self.azimuth.is_finite() {
            return Err(Error::InvalidParameter("tendon azimuth must be finite".into()));
        }
        let ordered = self.stations.windows(2).all(|w| w[0] < w[1]);
        let in_range = self.stations.iter().all(|s| (0.0..=1.0).contains(s));
        if self.stations.last() != Some(&1.0) || !ordered || !in_range {
            return Err(Error::InvalidParameter(
                "guide stations must be strictly increasing in [0, 1] and end at 1".into(),
            ));
        }
        Ok(())
    }

    fn path(&self) -> impl Iterator<Item = f64> + '_ {
        let start = (self.stations.first() != Some(&0.0)).then_some(0.0);
        start.into_iter().chain(self.stations.iter().copied())
    }

    fn offset(&self) -> Vector3<f64> {
        let (s, c) = self.azimuth.sin_cos();
        Vector3::new(self.radius * c, self.radius * s, 0.0)
    }
}

/// Servo command: target lengths, target rates and PD gains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TendonCommand {
    pub target_lengths: Vec<f64>,
    pub target_rates: Vec<f64>,
    pub kp: f64,
    pub kd: f64,
}

impl TendonCommand {
    /// Static command with default gains.
    pub fn hold(target_lengths: Vec<f64>) -> Self {
        let n = target_lengths.len();
        Self {
            target_lengths,
            target_rates: vec![0.0; n],
            kp: DEFAULT_GAIN,
            kd: DEFAULT_GAIN,
        }
    }

    pub fn with_gains(mut self, kp: f64, kd: f64) -> Self {
        self.kp = kp;
        self.kd = kd;
        self
    }

    pub fn len(&self) -> usize {
        self.target_lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.target_lengths.is_empty()
    }

    pub fn validate(&self, tendons: usize) -> Result<()> {
        if self.target_lengths.len() != tendons {
            return Err(Error::LengthMismatch {
                what: "tendon target lengths",
                expected: tendons,
                actual: self.target_lengths.len(),
            });
        }
        if self.target_rates.len() != tendons {
            return Err(Error::LengthMismatch {
                what: "tendon target rates",
                expected: tendons,
                actual: self.target_rates.len(),
            });
        }
        if !(self.kp >= 0.0 && self.kd >= 0.0) {
            return Err(Error::InvalidParameter("tendon gains must be non-negative".into()));
        }
        Ok(())
    }
}

struct Guide {
    point: Vector3<f64>,
    d_point: [Vector3<f64>; 4],
}

fn guides(state: &RobotState, params: &[SegmentParams], tendon: &TendonRouting) -> Result<Vec<Guide>> {
    let q = state.segments.get(tendon.segment).ok_or(Error::SegmentIndex {
        index: tendon.segment,
        count: state.len(),
    })?;
    let p = &params[tendon.segment];
    let offset = tendon.offset();
    Ok(tendon
        .path()
        .map(|s| {
            let local = local_pose(q, p, s);
            let arm = local.pose.rotation * offset;
            let mut d_point = local.d_translation;
            for (d, w) in d_point.iter_mut().zip(&local.d_rotation) {
                *d += w.cross(&arm);
            }
            Guide {
                point: local.pose.translation + arm,
                d_point,
            }
        })
        .collect())
}

/// Length of every tendon: the polyline through its guide points.
pub fn tendon_lengths(state: &RobotState, routing: &[TendonRouting], params: &[SegmentParams]) -> Result<DVector<f64>> {
    check_lengths(state, params)?;
    let mut out = DVector::zeros(routing.len());
    for (j, tendon) in routing.iter().enumerate() {
        let g = guides(state, params, tendon)?;
        out[j] = g.windows(2).map(|w| (w[1].point - w[0].point).norm()).sum();
    }
    Ok(out)
}

/// Tendon lengths and their m×4n Jacobian `∂l/∂q`.
pub fn tendon_length_jacobian(
    state: &RobotState,
    routing: &[TendonRouting],
    params: &[SegmentParams],
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    check_lengths(state, params)?;
    let mut lengths = DVector::zeros(routing.len());
    let mut jac = DMatrix::zeros(routing.len(), state.dof());
    for (j, tendon) in routing.iter().enumerate() {
        let g = guides(state, params, tendon)?;
        for w in g.windows(2) {
            let chord = w[1].point - w[0].point;
            let len = chord.norm();
            lengths[j] += len;
            if len == 0.0 {
                continue;
            }
            let dir = chord / len;
            for k in 0..DOF_PER_SEGMENT {
                jac[(j, DOF_PER_SEGMENT * tendon.segment + k)] += dir.dot(&(w[1].d_point[k] - w[0].d_point[k]));
            }
        }
    }
    Ok((lengths, jac))
}

/// The PD law as commonly written, `κ_D(l̄̇ − l̇) + κ_P(l̄ − l)`, unclamped.
pub fn pd_law(l: f64, l_dot: f64, target: f64, target_rate: f64, kp: f64, kd: f64) -> f64 {
    kd * (target_rate - l_dot) + kp * (target - l)
}

/// Tension of every tendon. The servo pulls while the tendon is longer than
/// its target, `T = max(0, κ_P(l − l̄) + κ_D(l̇ − l̄̇))`.
pub fn tendon_force(l: &DVector<f64>, l_dot: &DVector<f64>, command: &TendonCommand) -> Result<DVector<f64>> {
    command.validate(l.len())?;
    if l_dot.len() != l.len() {
        return Err(Error::LengthMismatch {
            what: "tendon rates",
            expected: l.len(),
            actual: l_dot.len(),
        });
    }
    Ok(DVector::from_iterator(
        l.len(),
        (0..l.len()).map(|j| {
            let pull = -pd_law(
                l[j],
                l_dot[j],
                command.target_lengths[j],
                command.target_rates[j],
                command.kp,
                command.kd,
            );
            pull.max(0.0)
        }),
    ))
}

/// `A(q) = −(∂l/∂q)ᵀ`, 4n×m.
pub fn actuation_matrix(
    state: &RobotState,
    routing: &[TendonRouting],
    params: &[SegmentParams],
) -> Result<DMatrix<f64>> {
    let (_, jac) = tendon_length_jacobian(state, routing, params)?;
    Ok(-jac.transpose())
}

/// The symmetric layout used by the shipped robots: `count` tendons per segment
/// at equally spaced azimuths.
pub fn symmetric_routing(segments: usize, count: usize, radius: f64, stations: usize) -> Vec<TendonRouting> {
    (0..segments)
        .flat_map(|i| {
            (0..count).map(move |k| {
                let azimuth = std::f64::consts::TAU * k as f64 / count as f64;
                TendonRouting::evenly_spaced(i, radius, azimuth, stations)
            })
        })
        .collect()
}

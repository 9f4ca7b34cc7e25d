//! Least-squares fit of reduced-order states to sampled centerlines.

use nalgebra::{DMatrix, DVector, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{check_s, Chain, ModelKind, RobotState, SegmentParams, SegmentState, DOF_PER_SEGMENT};

/// Fewest samples a segment needs to be fitted.
pub const MIN_SAMPLES_PER_SEGMENT: usize = 4;

/// A measured centerline point with its material label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    /// 0-based segment index.
    pub segment: usize,
    pub s: f64,
    pub position: Vector3<f64>,
}

impl CurveSample {
    pub fn new(segment: usize, s: f64, position: Vector3<f64>) -> Self {
        Self { segment, s, position }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub state: RobotState,
    /// Root-mean-square point distance (m).
    pub rms: f64,
    pub model: ModelKind,
}

/// Fits `model` to `samples`. Constant-curvature fits come first; an affine fit
/// starts from the constant-curvature optimum and can only improve on it.
pub fn fit_model(samples: &[CurveSample], model: ModelKind, params: &[SegmentParams]) -> Result<FitResult> {
    check_samples(samples, params)?;
    let pcc = fit_pcc(samples, params)?;
    let result = match model {
        ModelKind::Pcc => pcc,
        ModelKind::Pac => {
            let state = refine(samples, params, pcc.state.clone(), ModelKind::Pac, None)?;
            let rms = rms(samples, params, &state)?;
            if rms <= pcc.rms {
                FitResult {
                    state,
                    rms,
                    model: ModelKind::Pac,
                }
            } else {
                FitResult {
                    model: ModelKind::Pac,
                    ..pcc
                }
            }
        }
    };
    Ok(FitResult {
        state: canonical(&result.state),
        ..result
    })
}

/// Root-mean-square distance between the samples and the centerline of `state`.
pub fn rms(samples: &[CurveSample], params: &[SegmentParams], state: &RobotState) -> Result<f64> {
    let r = residuals(samples, params, state)?;
    Ok((r.norm_squared() / samples.len() as f64).sqrt())
}

fn canonical(state: &RobotState) -> RobotState {
    RobotState::new(state.segments.iter().map(|s| s.canonical()).collect())
}

fn check_samples(samples: &[CurveSample], params: &[SegmentParams]) -> Result<()> {
    if params.is_empty() {
        return Err(Error::InvalidParameter("robot has no segments".into()));
    }
    let mut counts = vec![0usize; params.len()];
    for sample in samples {
        if sample.segment >= params.len() {
            return Err(Error::SegmentIndex {
                index: sample.segment,
                count: params.len(),
            });
        }
        check_s(sample.s)?;
        if !sample.position.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("sample position must be finite".into()));
        }
        counts[sample.segment] += 1;
    }
    for (i, &c) in counts.iter().enumerate() {
        if c < MIN_SAMPLES_PER_SEGMENT {
            return Err(Error::DegenerateCurve {
                segment: i + 1,
                points: c,
                required: MIN_SAMPLES_PER_SEGMENT,
            });
        }
    }
    Ok(())
}

fn residuals(samples: &[CurveSample], params: &[SegmentParams], state: &RobotState) -> Result<DVector<f64>> {
    let chain = Chain::new(state, params)?;
    let mut r = DVector::zeros(3 * samples.len());
    for (k, sample) in samples.iter().enumerate() {
        let p = chain.point(sample.segment, sample.s)?.translation;
        r.fixed_rows_mut::<3>(3 * k).copy_from(&(p - sample.position));
    }
    Ok(r)
}

/// Residuals and their Jacobian with respect to the coordinates in `columns`.
fn linearize(
    samples: &[CurveSample],
    params: &[SegmentParams],
    state: &RobotState,
    columns: &[usize],
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let chain = Chain::new(state, params)?;
    let mut r = DVector::zeros(3 * samples.len());
    let mut jac = DMatrix::zeros(3 * samples.len(), columns.len());
    for (k, sample) in samples.iter().enumerate() {
        let local = chain.local(sample.segment, sample.s)?;
        let p = chain.world_position(sample.segment, &local.pose.translation);
        r.fixed_rows_mut::<3>(3 * k).copy_from(&(p - sample.position));
        let jp = chain.position_jacobian(sample.segment, &local.pose.translation, &local.d_translation);
        for (c, &col) in columns.iter().enumerate() {
            jac.fixed_view_mut::<3, 1>(3 * k, c).copy_from(&jp.column(col));
        }
    }
    Ok((r, jac))
}

fn free_columns(n: usize, model: ModelKind, only: Option<usize>) -> Vec<usize> {
    (0..DOF_PER_SEGMENT * n)
        .filter(|&k| model.is_free(k % DOF_PER_SEGMENT))
        .filter(|&k| only.is_none_or(|i| k / DOF_PER_SEGMENT == i))
        .collect()
}

/// Levenberg–Marquardt on the selected coordinates.
fn refine(
    samples: &[CurveSample],
    params: &[SegmentParams],
    start: RobotState,
    model: ModelKind,
    only: Option<usize>,
) -> Result<RobotState> {
    const MAX_ITERATIONS: usize = 500;
    let columns = free_columns(params.len(), model, only);
    let mut q = start.to_vector();
    let mut state = start;
    let (mut r, mut jac) = linearize(samples, params, &state, &columns)?;
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    for _ in 0..MAX_ITERATIONS {
        let jtj = jac.tr_mul(&jac);
        let grad = jac.tr_mul(&r);
        if grad.amax() < 1e-30 || cost < 1e-30 {
            break;
        }
        let scale = jtj.diagonal().amax().max(1e-300);
        let mut improved = false;
        while lambda < 1e12 {
            let mut a = jtj.clone();
            for i in 0..a.nrows() {
                a[(i, i)] += lambda * (jtj[(i, i)] + 1e-9 * scale);
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&(-&grad))) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial_q = q.clone();
            for (c, &col) in columns.iter().enumerate() {
                trial_q[col] += step[c];
            }
            let trial = RobotState::from_vector(&trial_q)?;
            if trial
                .segments
                .iter()
                .zip(params)
                .any(|(s, p)| p.rest_length + s.delta_l <= 0.0)
            {
                lambda *= 10.0;
                continue;
            }
            let (tr, tj) = linearize(samples, params, &trial, &columns)?;
            let trial_cost = tr.norm_squared();
            if trial_cost < cost {
                let gain = (cost - trial_cost) / cost.max(1e-300);
                q = trial_q;
                state = trial;
                r = tr;
                jac = tj;
                cost = trial_cost;
                lambda = (lambda * 0.2).max(1e-15);
                improved = gain > 1e-15 || step.amax() > 1e-14;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    Ok(state)
}

/// Initial coordinates of segment `i` from its samples, with the proximal
/// segments already fixed in `state`.
fn initial_guesses(
    samples: &[CurveSample],
    params: &[SegmentParams],
    state: &RobotState,
    i: usize,
) -> Result<Vec<SegmentState>> {
    let chain = Chain::new(state, params)?;
    let base = chain.base(i).inverse();
    let far = samples
        .iter()
        .filter(|s| s.segment == i && s.s > 0.0)
        .max_by(|a, b| a.s.total_cmp(&b.s))
        .copied()
        .ok_or(Error::DegenerateCurve {
            segment: i + 1,
            points: 0,
            required: MIN_SAMPLES_PER_SEGMENT,
        })?;
    let p = base.transform_point(&far.position);
    let length = p.norm();
    let phi = p.y.atan2(p.x);
    let chord = if length > 0.0 {
        (p.z / length).clamp(-1.0, 1.0).acos()
    } else {
        0.0
    };
    let c0 = 2.0 * chord / far.s;
    let half = 0.5 * c0 * far.s;
    let sinc = if half.abs() < 1e-8 { 1.0 } else { half.sin() / half };
    let delta_l = (length / (far.s * sinc) - params[i].rest_length).max(-0.5 * params[i].rest_length);
    let mut out = Vec::new();
    for dphi in [0.0, 0.5, -0.5, 1.0, -1.0] {
        for scale in [1.0, 0.5] {
            out.push(SegmentState::new(
                c0 * scale,
                0.0,
                phi + dphi * std::f64::consts::FRAC_PI_2,
                delta_l,
            ));
        }
    }
    Ok(out)
}

fn fit_pcc(samples: &[CurveSample], params: &[SegmentParams]) -> Result<FitResult> {
    let n = params.len();
    let mut state = RobotState::zeros(n);
    for i in 0..n {
        // Only samples up to this segment constrain it.
        let local: Vec<CurveSample> = samples.iter().filter(|s| s.segment == i).copied().collect();
        let mut best: Option<(f64, RobotState)> = None;
        for guess in initial_guesses(samples, params, &state, i)? {
            let mut trial = state.clone();
            trial.segments[i] = guess;
            let trial = refine(&local, params, trial, ModelKind::Pcc, Some(i))?;
            let cost = residuals(&local, params, &trial)?.norm_squared();
            if best.as_ref().is_none_or(|(c, _)| cost < *c) {
                best = Some((cost, trial));
            }
        }
        state = best.expect("at least one start").1;
    }
    let state = refine(samples, params, state, ModelKind::Pcc, None)?;
    Ok(FitResult {
        rms: rms(samples, params, &state)?,
        state,
        model: ModelKind::Pcc,
    })
}

//! Central finite differences, used as independent checks of the analytic
//! derivatives elsewhere in the crate.

use nalgebra::{DMatrix, DVector, Matrix3};

use crate::error::Result;
use crate::geometry::transform::vee;
use crate::kinematics::{point_pose, RobotState, SegmentParams};

/// Step `h·max(1, |x|)`.
pub fn scaled_step(h: f64, x: f64) -> f64 {
    h * x.abs().max(1.0)
}

/// Gradient of a scalar function.
pub fn gradient<F>(mut f: F, x: &DVector<f64>, h: f64) -> DVector<f64>
where
    F: FnMut(&DVector<f64>) -> f64,
{
    let mut g = DVector::zeros(x.len());
    let mut probe = x.clone();
    for i in 0..x.len() {
        let step = scaled_step(h, x[i]);
        probe[i] = x[i] + step;
        let plus = f(&probe);
        probe[i] = x[i] - step;
        let minus = f(&probe);
        probe[i] = x[i];
        g[i] = (plus - minus) / (2.0 * step);
    }
    g
}

/// Jacobian of a vector function; one column per input coordinate.
pub fn jacobian<F>(mut f: F, x: &DVector<f64>, h: f64) -> DMatrix<f64>
where
    F: FnMut(&DVector<f64>) -> DVector<f64>,
{
    let mut probe = x.clone();
    let mut columns = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let step = scaled_step(h, x[i]);
        probe[i] = x[i] + step;
        let plus = f(&probe);
        probe[i] = x[i] - step;
        let minus = f(&probe);
        probe[i] = x[i];
        columns.push((plus - minus) / (2.0 * step));
    }
    DMatrix::from_columns(&columns)
}

/// 6×4n point Jacobian by central differences of [`point_pose`]. Orientation
/// rows are `vee(Rᵀ·∂R/∂q)`.
pub fn point_jacobian_fd(
    state: &RobotState,
    params: &[SegmentParams],
    segment: usize,
    s: f64,
    h: f64,
) -> Result<DMatrix<f64>> {
    let center = point_pose(state, params, segment, s)?;
    let q = state.to_vector();
    let mut jac = DMatrix::zeros(6, q.len());
    let mut probe = q.clone();
    for i in 0..q.len() {
        let step = scaled_step(h, q[i]);
        probe[i] = q[i] + step;
        let plus = point_pose(&RobotState::from_vector(&probe)?, params, segment, s)?;
        probe[i] = q[i] - step;
        let minus = point_pose(&RobotState::from_vector(&probe)?, params, segment, s)?;
        probe[i] = q[i];
        let dt = (plus.translation - minus.translation) / (2.0 * step);
        let dr: Matrix3<f64> = (plus.rotation - minus.rotation) / (2.0 * step);
        let w = vee(&(center.rotation.transpose() * dr));
        jac.fixed_view_mut::<3, 1>(0, i).copy_from(&dt);
        jac.fixed_view_mut::<3, 1>(3, i).copy_from(&w);
    }
    Ok(jac)
}

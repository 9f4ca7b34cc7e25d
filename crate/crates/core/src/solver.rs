//! Static equilibrium by integrating the damped flow `D·q̇ = r(q)` until the
//! residual vanishes.
//!
//! The integrator is the Dormand–Prince 5(4) pair with the usual
//! error-per-step controller. Constant-curvature solves freeze every `c1`
//! and integrate the remaining coordinates with the matching block of `D`.

use log::{debug, trace};
use nalgebra::{Cholesky, DMatrix, DVector, Dyn, Vector3};
use serde::{Deserialize, Serialize};

use crate::actuation::{actuation_matrix, tendon_force, tendon_length_jacobian, TendonCommand, TendonRouting};
use crate::error::{Error, NonConvergence, Result};
use crate::kinematics::{check_s, Chain, ModelKind, RobotState, SegmentParams, DOF_PER_SEGMENT};
use crate::mechanics::{
    elastic_energy, elastic_force, gravity_force, gravity_potential, GeneralizedForce, StiffnessModel,
};

/// Standard gravity (m/s²).
pub const STANDARD_GRAVITY: f64 = 9.81;

/// A dead load applied at a material point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointLoad {
    /// 0-based segment index.
    pub segment: usize,
    pub s: f64,
    /// Force in the base frame (N).
    pub force: Vector3<f64>,
    /// Moment in the base frame (N·m).
    #[serde(default)]
    pub moment: Option<Vector3<f64>>,
}

impl PointLoad {
    pub fn force(segment: usize, s: f64, force: Vector3<f64>) -> Self {
        Self {
            segment,
            s,
            force,
            moment: None,
        }
    }

    /// Weight of a mass hanging from the tip of segment `segment`.
    pub fn tip_mass(segment: usize, mass: f64, gravity: &Vector3<f64>) -> Self {
        Self::force(segment, 1.0, gravity * mass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticsProblem {
    pub initial: RobotState,
    pub params: Vec<SegmentParams>,
    pub stiffness: StiffnessModel,
    #[serde(default)]
    pub tendons: Vec<TendonRouting>,
    #[serde(default)]
    pub command: Option<TendonCommand>,
    pub gravity: Vector3<f64>,
    #[serde(default)]
    pub loads: Vec<PointLoad>,
    #[serde(default)]
    pub model: ModelKind,
}

impl StaticsProblem {
    /// Unactuated, unloaded problem in zero gravity starting from the rest state.
    pub fn new(params: Vec<SegmentParams>) -> Self {
        let n = params.len();
        Self {
            initial: RobotState::zeros(n),
            stiffness: StiffnessModel::from_params(&params),
            params,
            tendons: Vec::new(),
            command: None,
            gravity: Vector3::zeros(),
            loads: Vec::new(),
            model: ModelKind::Pac,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.params.len();
        for (i, p) in self.params.iter().enumerate() {
            p.validate(i)?;
        }
        self.stiffness.validate()?;
        if self.stiffness.len() != n {
            return Err(Error::LengthMismatch {
                what: "stiffness records",
                expected: n,
                actual: self.stiffness.len(),
            });
        }
        self.initial.validate(&self.params, self.model)?;
        for t in &self.tendons {
            t.validate(&self.params)?;
        }
        if let Some(cmd) = &self.command {
            cmd.validate(self.tendons.len())?;
        }
        for load in &self.loads {
            if load.segment >= n {
                return Err(Error::SegmentIndex {
                    index: load.segment,
                    count: n,
                });
            }
            check_s(load.s)?;
            let finite = load
                .force
                .iter()
                .chain(load.moment.iter().flatten())
                .all(|v| v.is_finite());
            if !finite {
                return Err(Error::InvalidParameter("load components must be finite".into()));
            }
        }
        if !self.gravity.iter().all(|g| g.is_finite()) {
            return Err(Error::InvalidParameter("gravity must be finite".into()));
        }
        Ok(())
    }

    /// Indices of the coordinates the solver may move.
    pub fn free_coordinates(&self) -> Vec<usize> {
        (0..DOF_PER_SEGMENT * self.params.len())
            .filter(|&k| self.model.is_free(k % DOF_PER_SEGMENT))
            .collect()
    }

    /// Current tendon tensions at `state` (zero rates).
    pub fn tensions(&self, state: &RobotState) -> Result<DVector<f64>> {
        match &self.command {
            Some(cmd) if !self.tendons.is_empty() => {
                let (l, _) = tendon_length_jacobian(state, &self.tendons, &self.params)?;
                tendon_force(&l, &DVector::zeros(l.len()), cmd)
            }
            _ => Ok(DVector::zeros(self.tendons.len())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// 4n×4n damping matrix; `None` selects the stiffness-proportional default.
    #[serde(default)]
    pub damping: Option<DMatrix<f64>>,
    /// Seconds of flow time per unit of stiffness in the default damping.
    pub damping_time: f64,
    pub initial_step: f64,
    pub max_step: f64,
    /// Local error tolerance of the step controller.
    pub step_tolerance: f64,
    /// Convergence threshold on the 2-norm of the (free) residual.
    pub residual_tolerance: f64,
    /// Maximum accepted steps.
    pub max_steps: usize,
    /// Keep every accepted state in the report.
    #[serde(default)]
    pub record_trajectory: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            damping: None,
            damping_time: 1.0,
            initial_step: 0.05,
            max_step: 10.0,
            step_tolerance: 1e-8,
            residual_tolerance: 1e-6,
            max_steps: 100_000,
            record_trajectory: false,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self, dof: usize) -> Result<()> {
        let positive = [
            ("damping_time", self.damping_time),
            ("initial_step", self.initial_step),
            ("max_step", self.max_step),
            ("step_tolerance", self.step_tolerance),
            ("residual_tolerance", self.residual_tolerance),
        ];
        for (what, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{what} must be positive")));
            }
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidParameter("max_steps must be positive".into()));
        }
        if let Some(d) = &self.damping {
            if d.nrows() != dof || d.ncols() != dof {
                return Err(Error::InvalidParameter(format!(
                    "damping matrix must be {dof}×{dof}, got {}×{}",
                    d.nrows(),
                    d.ncols()
                )));
            }
            let asym = (d - d.transpose()).amax();
            if asym > 1e-12 * d.amax().max(1.0) || Cholesky::new(d.clone()).is_none() {
                return Err(Error::InvalidParameter(
                    "damping matrix must be symmetric positive definite".into(),
                ));
            }
        }
        Ok(())
    }

    /// Damping matrix used for `problem`: the explicit one if given, else
    /// `damping_time` times the rest stiffness plus the servo stiffness
    /// `κ_P·(∂l/∂q)ᵀ(∂l/∂q)` at the initial state.
    pub fn damping_matrix(&self, problem: &StaticsProblem) -> DMatrix<f64> {
        if let Some(d) = &self.damping {
            return d.clone();
        }
        let n = problem.params.len();
        let mut d = DMatrix::zeros(DOF_PER_SEGMENT * n, DOF_PER_SEGMENT * n);
        for i in 0..n {
            let o = DOF_PER_SEGMENT * i;
            d.fixed_view_mut::<4, 4>(o, o)
                .copy_from(&problem.stiffness.rest_block(i));
        }
        if let Some(cmd) = &problem.command {
            if !problem.tendons.is_empty() && cmd.kp > 0.0 {
                if let Ok((_, jac)) = tendon_length_jacobian(&problem.initial, &problem.tendons, &problem.params) {
                    d += jac.tr_mul(&jac) * cmd.kp;
                }
            }
        }
        d * self.damping_time
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    /// Accepted integration steps.
    pub iterations: usize,
    pub rejected_steps: usize,
    pub residual_norm: f64,
    /// Residual norm at the initial state and after each accepted step.
    pub residual_history: Vec<f64>,
    /// Flow time reached.
    pub time: f64,
    #[serde(default)]
    pub trajectory: Vec<RobotState>,
}

/// `J_pᵀ·[F; Rᵀ·M]` for a load at `(segment, s)`; `M` in the base frame.
pub fn apply_point_force(
    state: &RobotState,
    params: &[SegmentParams],
    segment: usize,
    s: f64,
    force: &Vector3<f64>,
    moment: Option<&Vector3<f64>>,
) -> Result<GeneralizedForce> {
    let chain = Chain::new(state, params)?;
    point_force_on(&chain, segment, s, force, moment)
}

fn point_force_on(
    chain: &Chain<'_>,
    segment: usize,
    s: f64,
    force: &Vector3<f64>,
    moment: Option<&Vector3<f64>>,
) -> Result<GeneralizedForce> {
    let jac = chain.point_jacobian(segment, s)?;
    let mut out = jac.rows(0, 3).tr_mul(force);
    if let Some(m) = moment {
        let body = chain.point(segment, s)?.rotation.tr_mul(m);
        out += jac.rows(3, 3).tr_mul(&body);
    }
    Ok(out.into())
}

/// `r(q) = A(q)·T(q) + Σ Jᵀ w − G(q) − K(q)`.
pub fn static_residual(state: &RobotState, problem: &StaticsProblem) -> Result<GeneralizedForce> {
    let chain = Chain::new(state, &problem.params)?;
    let mut r = -elastic_force(state, &problem.stiffness)?.values;
    r -= gravity_force(state, &problem.params, &problem.gravity)?.values;
    for load in &problem.loads {
        r += point_force_on(&chain, load.segment, load.s, &load.force, load.moment.as_ref())?.values;
    }
    if let Some(cmd) = &problem.command {
        if !problem.tendons.is_empty() {
            let (l, jac) = tendon_length_jacobian(state, &problem.tendons, &problem.params)?;
            let tension = tendon_force(&l, &DVector::zeros(l.len()), cmd)?;
            r -= jac.tr_mul(&tension);
        }
    }
    Ok(r.into())
}

/// Elastic plus gravity energy minus the work of the dead forces. Moments and
/// tendon tensions are not included.
pub fn total_potential(state: &RobotState, problem: &StaticsProblem) -> Result<f64> {
    let chain = Chain::new(state, &problem.params)?;
    let mut v =
        elastic_energy(state, &problem.stiffness)? + gravity_potential(state, &problem.params, &problem.gravity)?;
    for load in &problem.loads {
        v -= load.force.dot(&chain.point(load.segment, load.s)?.translation);
    }
    Ok(v)
}

/// Actuation generalized force `A(q)·T(q)` at `state`.
pub fn actuation_force(state: &RobotState, problem: &StaticsProblem) -> Result<GeneralizedForce> {
    let tension = problem.tensions(state)?;
    if problem.tendons.is_empty() {
        return Ok(GeneralizedForce::zeros(state.len()));
    }
    Ok((actuation_matrix(state, &problem.tendons, &problem.params)? * tension).into())
}

// Dormand–Prince 5(4) tableau.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// Fifth-order weights minus fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Flow<'a> {
    problem: &'a StaticsProblem,
    free: Vec<usize>,
    base: DVector<f64>,
    damping: Cholesky<f64, Dyn>,
}

impl Flow<'_> {
    fn state(&self, y: &DVector<f64>) -> Result<RobotState> {
        let mut q = self.base.clone();
        for (k, &i) in self.free.iter().enumerate() {
            q[i] = y[k];
        }
        RobotState::from_vector(&q)
    }

    /// Free residual and velocity at `y`.
    fn eval(&self, y: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
        let r = static_residual(&self.state(y)?, self.problem)?.values;
        let rf = DVector::from_iterator(self.free.len(), self.free.iter().map(|&i| r[i]));
        let v = self.damping.solve(&rf);
        Ok((rf, v))
    }
}

/// At a straight segment the bending plane angle has no first-order effect, so
/// the flow cannot rotate it. Each exactly straight segment instead starts in
/// the plane where the residual pulls its curvature hardest.
fn seed_bending_planes(problem: &StaticsProblem, options: &SolverOptions) -> Result<RobotState> {
    let mut state = problem.initial.clone();
    for i in 0..state.len() {
        let q = state.segments[i];
        if q.c0 != 0.0 || q.c1 != 0.0 {
            continue;
        }
        let mut pull = [0.0; 2];
        for (k, phi) in [0.0, std::f64::consts::FRAC_PI_2].into_iter().enumerate() {
            state.segments[i].phi = phi;
            pull[k] = static_residual(&state, problem)?.values[DOF_PER_SEGMENT * i];
        }
        state.segments[i].phi = if pull[0].hypot(pull[1]) > 1e-3 * options.residual_tolerance {
            pull[1].atan2(pull[0])
        } else {
            q.phi
        };
    }
    Ok(state)
}

/// Integrates the damped flow from `problem.initial` to equilibrium.
pub fn solve_statics(problem: &StaticsProblem, options: &SolverOptions) -> Result<(RobotState, SolverReport)> {
    problem.validate()?;
    let dof = DOF_PER_SEGMENT * problem.params.len();
    options.validate(dof)?;

    let free = problem.free_coordinates();
    let d_full = options.damping_matrix(problem);
    let d_free = DMatrix::from_fn(free.len(), free.len(), |a, b| d_full[(free[a], free[b])]);
    // Absolute error floor per coordinate: the displacement whose restoring
    // force is a tenth of the residual tolerance.
    let atol: Vec<f64> = (0..free.len())
        .map(|k| {
            options
                .step_tolerance
                .min(0.1 * options.residual_tolerance / d_free[(k, k)])
        })
        .collect();
    let damping = Cholesky::new(d_free)
        .ok_or_else(|| Error::InvalidParameter("damping matrix must be symmetric positive definite".into()))?;
    let base = seed_bending_planes(problem, options)?.to_vector();
    let flow = Flow {
        problem,
        free: free.clone(),
        base: base.clone(),
        damping,
    };
    let mut y = DVector::from_iterator(free.len(), free.iter().map(|&i| base[i]));

    let (mut r, mut k1) = flow.eval(&y)?;
    let mut report = SolverReport {
        iterations: 0,
        rejected_steps: 0,
        residual_norm: r.norm(),
        residual_history: vec![r.norm()],
        time: 0.0,
        trajectory: Vec::new(),
    };
    if options.record_trajectory {
        report.trajectory.push(flow.state(&y)?);
    }
    let mut best = (report.residual_norm, y.clone());
    let mut h = options.initial_step.min(options.max_step);

    while report.residual_norm >= options.residual_tolerance {
        if report.iterations >= options.max_steps || h < 1e-14 {
            debug!(
                "flow stopped after {} steps, residual {:.3e}, step {h:.3e}",
                report.iterations, report.residual_norm
            );
            return Err(Error::NotConverged(Box::new(NonConvergence {
                best_state: flow.state(&best.1)?,
                best_residual: best.0,
                steps: report.iterations,
                residual_history: report.residual_history,
            })));
        }
        let mut k = Vec::with_capacity(7);
        k.push(k1.clone());
        let mut stage_residual = r.clone();
        let mut failed = false;
        for stage in 1..7 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate() {
                if A[stage][j] != 0.0 {
                    ys.axpy(h * A[stage][j], kj, 1.0);
                }
            }
            match flow.eval(&ys) {
                Ok((rs, ks)) if ks.iter().all(|v| v.is_finite()) => {
                    stage_residual = rs;
                    k.push(ks);
                }
                _ => {
                    failed = true;
                    break;
                }
            }
        }
        if failed {
            trace!("stage evaluation failed at h = {h:.3e}");
            report.rejected_steps += 1;
            h *= 0.25;
            continue;
        }
        // Stage 7 is evaluated at the fifth-order solution.
        let mut y_new = y.clone();
        for (j, kj) in k.iter().enumerate().take(6) {
            if A[6][j] != 0.0 {
                y_new.axpy(h * A[6][j], kj, 1.0);
            }
        }
        let mut err = 0.0_f64;
        for i in 0..y.len() {
            let e: f64 = (0..7).map(|j| E[j] * k[j][i]).sum::<f64>() * h;
            let scale = atol[i] + options.step_tolerance * y[i].abs().max(y_new[i].abs());
            err = err.max((e / scale).abs());
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        if err <= 1.0 {
            report.time += h;
            y = y_new;
            r = stage_residual;
            k1 = k.pop().expect("seven stages");
            report.iterations += 1;
            report.residual_norm = r.norm();
            report.residual_history.push(report.residual_norm);
            if options.record_trajectory {
                report.trajectory.push(flow.state(&y)?);
            }
            if report.residual_norm < best.0 {
                best = (report.residual_norm, y.clone());
            }
            h = (h * factor).min(options.max_step);
        } else {
            report.rejected_steps += 1;
            h *= factor.min(1.0);
        }
    }
    debug!(
        "equilibrium after {} steps ({} rejected), residual {:.3e}",
        report.iterations, report.rejected_steps, report.residual_norm
    );
    Ok((flow.state(&y)?, report))
}

//! Static equilibrium of a [`DenseRod`] by damped Newton iteration.
//!
//! Each node force depends only on nodes at most two positions away, so the
//! stiffness matrix is banded and is assembled from central differences of
//! the analytic forces with five interleaved probes. Servo tendons couple a
//! whole segment through their tension; that part enters as a low-rank update.

use log::{debug, trace};
use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::banded::{BandCholesky, BandMatrix};
use super::rod::{vertex_frames, DenseRod};
use crate::actuation::TendonRouting;
use crate::error::{Error, Result};
use crate::solver::PointLoad;

const COLORS: usize = 5;
const BANDWIDTH: usize = 3 * 2 + 2;
/// Smallest Levenberg shift, relative to the largest stiffness diagonal.
const LAMBDA_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TendonDrive {
    /// Constant tension (N).
    Tension(f64),
    /// Tension `κ_P·max(0, l − l̄)`.
    Servo { target: f64, kp: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RodTendon {
    pub routing: TendonRouting,
    pub drive: TendonDrive,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RodLoads {
    pub gravity: Vector3<f64>,
    #[serde(default)]
    pub point_loads: Vec<PointLoad>,
    #[serde(default)]
    pub tendons: Vec<RodTendon>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleOptions {
    /// Convergence threshold on the largest nodal force, relative to the
    /// characteristic force of the problem.
    pub tolerance: f64,
    /// Newton iterations per load stage.
    pub max_iterations: usize,
    /// Largest number of load stages tried.
    pub max_stages: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 100,
            max_stages: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub iterations: usize,
    pub stages: usize,
    /// Largest nodal force at the solution (N).
    pub residual: f64,
    pub characteristic_force: f64,
}

/// Equilibrium with default options.
pub fn dense_equilibrium(rod: &DenseRod, loads: &RodLoads) -> Result<DenseRod> {
    dense_equilibrium_with(rod, loads, &OracleOptions::default()).map(|(r, _)| r)
}

pub fn dense_equilibrium_with(
    rod: &DenseRod,
    loads: &RodLoads,
    options: &OracleOptions,
) -> Result<(DenseRod, OracleReport)> {
    let system = System::new(rod, loads)?;
    let tol = options.tolerance * system.characteristic_force();
    let mut total_iterations = 0;
    let mut last_residual = f64::INFINITY;
    let mut stages = 1;
    while stages <= options.max_stages {
        let mut x = rod.nodes.clone();
        let mut ok = true;
        for k in 1..=stages {
            let factor = k as f64 / stages as f64;
            match system.newton(&mut x, factor, tol, options.max_iterations) {
                Ok((iterations, residual)) => {
                    total_iterations += iterations;
                    last_residual = residual;
                }
                Err((iterations, residual)) => {
                    total_iterations += iterations;
                    last_residual = residual;
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            let mut out = rod.clone();
            out.nodes = x;
            out.refresh_frames();
            debug!(
                "rod equilibrium in {total_iterations} iterations over {stages} stage(s), residual {last_residual:.3e} N"
            );
            return Ok((
                out,
                OracleReport {
                    iterations: total_iterations,
                    stages,
                    residual: last_residual,
                    characteristic_force: system.characteristic_force(),
                },
            ));
        }
        trace!("rod solve failed with {stages} stage(s), residual {last_residual:.3e}");
        stages *= 2;
    }
    Err(Error::OracleNotConverged {
        iterations: total_iterations,
        residual: last_residual,
    })
}

/// Tendon lengths of a rod configuration under the rod's tendon model.
pub fn rod_tendon_lengths(rod: &DenseRod, tendons: &[TendonRouting]) -> Result<Vec<f64>> {
    let loads = RodLoads {
        tendons: tendons
            .iter()
            .map(|r| RodTendon {
                routing: r.clone(),
                drive: TendonDrive::Tension(0.0),
            })
            .collect(),
        ..RodLoads::default()
    };
    let system = System::new(rod, &loads)?;
    let normals = system.normals(&rod.nodes);
    Ok((0..tendons.len())
        .map(|j| system.tendon_length(j, &rod.nodes, &normals[j]))
        .collect())
}

enum Tensions<'a> {
    Current,
    Fixed(&'a [f64]),
}

struct NodeLoad {
    node: usize,
    weight: f64,
    force: Vector3<f64>,
}

struct Couple {
    node: usize,
    moment: Vector3<f64>,
}

struct System<'a> {
    rod: &'a DenseRod,
    loads: &'a RodLoads,
    node_mass: Vec<f64>,
    node_loads: Vec<NodeLoad>,
    couples: Vec<Couple>,
    vertex_bending: Vec<(f64, f64)>,
}

impl<'a> System<'a> {
    fn new(rod: &'a DenseRod, loads: &'a RodLoads) -> Result<Self> {
        let n = rod.elements();
        let mut node_mass = vec![0.0; n + 1];
        for (e, m) in rod.element_mass.iter().enumerate() {
            node_mass[e] += 0.5 * m;
            node_mass[e + 1] += 0.5 * m;
        }
        let mut node_loads = Vec::new();
        let mut couples = Vec::new();
        for load in &loads.point_loads {
            let (k, frac) = rod.locate(load.segment, load.s)?;
            node_loads.push(NodeLoad {
                node: k,
                weight: 1.0 - frac,
                force: load.force,
            });
            if frac > 0.0 {
                node_loads.push(NodeLoad {
                    node: k + 1,
                    weight: frac,
                    force: load.force,
                });
            }
            if let Some(m) = load.moment {
                let node = if frac > 0.0 { k + 1 } else { k };
                if node > 0 {
                    couples.push(Couple { node, moment: m });
                }
            }
        }
        for t in &loads.tendons {
            if t.routing.segment >= rod.segments() {
                return Err(Error::SegmentIndex {
                    index: t.routing.segment,
                    count: rod.segments(),
                });
            }
        }
        let vertex_bending = (0..n)
            .map(|v| {
                if v == 0 {
                    (rod.bending_stiffness[0], 0.5 * rod.rest_lengths[0])
                } else {
                    (
                        0.5 * (rod.bending_stiffness[v - 1] + rod.bending_stiffness[v]),
                        0.5 * (rod.rest_lengths[v - 1] + rod.rest_lengths[v]),
                    )
                }
            })
            .collect();
        Ok(Self {
            rod,
            loads,
            node_mass,
            node_loads,
            couples,
            vertex_bending,
        })
    }

    fn characteristic_force(&self) -> f64 {
        let length: f64 = self.rod.rest_lengths.iter().sum();
        let ei = self.rod.bending_stiffness.iter().copied().fold(0.0, f64::max);
        let mut scale = ei / (length * length);
        let weight: f64 = self.node_mass.iter().sum::<f64>() * self.loads.gravity.norm();
        scale = scale.max(weight);
        for l in &self.loads.point_loads {
            scale = scale.max(l.force.norm());
            if let Some(m) = l.moment {
                scale = scale.max(m.norm() / length);
            }
        }
        for t in &self.loads.tendons {
            let tension = match t.drive {
                TendonDrive::Tension(v) => v.abs(),
                TendonDrive::Servo { kp, .. } => kp * length * 0.01,
            };
            scale = scale.max(tension);
        }
        scale
    }

    /// Tendon direction at every vertex for each tendon, from the frames of `x`.
    fn normals(&self, x: &[Vector3<f64>]) -> Vec<Vec<Vector3<f64>>> {
        if self.loads.tendons.is_empty() {
            return Vec::new();
        }
        let frames: Vec<Matrix3<f64>> = vertex_frames(x);
        self.loads
            .tendons
            .iter()
            .map(|t| {
                let (s, c) = t.routing.azimuth.sin_cos();
                let local = Vector3::new(-s, c, 0.0);
                frames.iter().map(|f| f * local).collect()
            })
            .collect()
    }

    /// Edges and weighted vertices of a tendon's segment.
    fn tendon_span(&self, j: usize) -> (std::ops::Range<usize>, Vec<(usize, f64)>) {
        let seg = self.loads.tendons[j].routing.segment;
        let o = self.rod.segment_offset(seg);
        let n = self.rod.segment_elements[seg];
        let last = self.rod.segments() - 1;
        let mut vertices = Vec::with_capacity(n + 1);
        vertices.push((o, if seg == 0 { 1.0 } else { 0.5 }));
        for v in o + 1..o + n {
            vertices.push((v, 1.0));
        }
        if seg < last {
            vertices.push((o + n, 0.5));
        }
        (o..o + n, vertices)
    }

    fn tendon_length(&self, j: usize, x: &[Vector3<f64>], normals: &[Vector3<f64>]) -> f64 {
        let d = self.loads.tendons[j].routing.radius;
        let (edges, vertices) = self.tendon_span(j);
        let mut l: f64 = edges.map(|e| (x[e + 1] - x[e]).norm()).sum();
        for (v, w) in vertices {
            let a = self.rod.incoming_edge(v, x);
            let b = x[v + 1] - x[v];
            let p = a.norm() * b.norm();
            l -= d * w * 2.0 * a.dot(&b.cross(&normals[v])) / (p + a.dot(&b));
        }
        l
    }

    /// Adds `scale·∇l_j` to `out`.
    fn add_tendon_gradient(
        &self,
        j: usize,
        x: &[Vector3<f64>],
        normals: &[Vector3<f64>],
        scale: f64,
        out: &mut [Vector3<f64>],
    ) {
        let d = self.loads.tendons[j].routing.radius;
        let (edges, vertices) = self.tendon_span(j);
        for e in edges {
            let t = (x[e + 1] - x[e]).normalize() * scale;
            out[e + 1] += t;
            out[e] -= t;
        }
        for (v, w) in vertices {
            let n = &normals[v];
            let a = self.rod.incoming_edge(v, x);
            let b = x[v + 1] - x[v];
            let (na, nb) = (a.norm(), b.norm());
            let q = na * nb + a.dot(&b);
            let triple = a.dot(&b.cross(n));
            let da = (b.cross(n) * q - (a * (nb / na) + b) * triple) * (2.0 / (q * q));
            let db = (n.cross(&a) * q - (b * (na / nb) + a) * triple) * (2.0 / (q * q));
            let k = -d * w * scale;
            if v > 0 {
                out[v] += da * k;
                out[v - 1] -= da * k;
            }
            out[v + 1] += db * k;
            out[v] -= db * k;
        }
    }

    fn tension(&self, j: usize, length: f64, factor: f64) -> f64 {
        match self.loads.tendons[j].drive {
            TendonDrive::Tension(t) => factor * t,
            TendonDrive::Servo { target, kp } => factor * kp * (length - target).max(0.0),
        }
    }

    /// Net force imbalance at every node (entry 0 unused): gradient of the
    /// potential minus the non-conservative couples.
    fn residual(
        &self,
        x: &[Vector3<f64>],
        factor: f64,
        normals: &[Vec<Vector3<f64>>],
        tensions: Tensions<'_>,
    ) -> Vec<Vector3<f64>> {
        let rod = self.rod;
        let n = rod.elements();
        let mut g = vec![Vector3::zeros(); n + 1];
        for e in 0..n {
            let edge = x[e + 1] - x[e];
            let len = edge.norm();
            let k = rod.axial_stiffness[e] / rod.rest_lengths[e];
            let f = edge * (k * (len - rod.rest_lengths[e]) / len);
            g[e + 1] += f;
            g[e] -= f;
        }
        for v in 0..n {
            let (ei, lv) = self.vertex_bending[v];
            let a = rod.incoming_edge(v, x);
            let b = x[v + 1] - x[v];
            let (na, nb) = (a.norm(), b.norm());
            let q = na * nb + a.dot(&b);
            // Curvature binormal; energy ei/(2·lv)·|κb|².
            let kb = a.cross(&b) * (2.0 / q);
            let k2 = kb.norm_squared();
            let coef = ei / (lv * q);
            let da = (b.cross(&kb) * 2.0 - (a * (nb / na) + b) * k2) * coef;
            let db = (kb.cross(&a) * 2.0 - (b * (na / nb) + a) * k2) * coef;
            if v > 0 {
                g[v] += da;
                g[v - 1] -= da;
            }
            g[v + 1] += db;
            g[v] -= db;
        }
        let gravity = self.loads.gravity * factor;
        if gravity.norm() > 0.0 {
            for (k, m) in self.node_mass.iter().enumerate() {
                g[k] -= gravity * *m;
            }
        }
        for l in &self.node_loads {
            g[l.node] -= l.force * (l.weight * factor);
        }
        for c in &self.couples {
            let e = x[c.node] - x[c.node - 1];
            let f = c.moment.cross(&e) * (factor / e.norm_squared());
            g[c.node] -= f;
            g[c.node - 1] += f;
        }
        for j in 0..self.loads.tendons.len() {
            let t = match tensions {
                Tensions::Current => self.tension(j, self.tendon_length(j, x, &normals[j]), factor),
                Tensions::Fixed(v) => v[j],
            };
            if t != 0.0 {
                self.add_tendon_gradient(j, x, &normals[j], t, &mut g);
            }
        }
        g
    }

    /// Applies a nodal step edge by edge: the transverse part of each edge
    /// increment rotates the edge and the axial part stretches it. Agrees with
    /// `x + step` to first order without the second-order stretch.
    fn displaced(x: &[Vector3<f64>], step: &[f64]) -> Vec<Vector3<f64>> {
        let delta = |k: usize| {
            if k == 0 {
                Vector3::zeros()
            } else {
                let o = 3 * (k - 1);
                Vector3::new(step[o], step[o + 1], step[o + 2])
            }
        };
        let mut out = Vec::with_capacity(x.len());
        out.push(x[0]);
        for k in 1..x.len() {
            let e = x[k] - x[k - 1];
            let len = e.norm();
            let t = e / len;
            let de = delta(k) - delta(k - 1);
            let along = de.dot(&t);
            let turned = (e + (de - t * along)).normalize();
            let next = out[k - 1] + turned * (len + along);
            out.push(next);
        }
        out
    }

    fn flatten(g: &[Vector3<f64>]) -> Vec<f64> {
        g[1..].iter().flat_map(|v| [v.x, v.y, v.z]).collect()
    }

    fn max_norm(g: &[Vector3<f64>]) -> f64 {
        g[1..].iter().flat_map(|v| v.iter()).fold(0.0, |m, v| m.max(v.abs()))
    }

    fn two_norm(g: &[Vector3<f64>]) -> f64 {
        g[1..].iter().map(|v| v.norm_squared()).sum::<f64>().sqrt()
    }

    /// Symmetric part of the banded stiffness at `x`, tensions frozen.
    fn stiffness(
        &self,
        x: &[Vector3<f64>],
        factor: f64,
        normals: &[Vec<Vector3<f64>>],
        tensions: &[f64],
    ) -> BandMatrix {
        let n = self.rod.elements();
        let dim = 3 * n;
        let h = 1e-6 * self.rod.rest_lengths.iter().copied().fold(f64::INFINITY, f64::min);
        // raw[(row, col − row + BANDWIDTH)]
        let width = 2 * BANDWIDTH + 1;
        let mut raw = vec![0.0; dim * width];
        let mut probe = x.to_vec();
        for color in 0..COLORS {
            let nodes: Vec<usize> = (1..=n).filter(|k| k % COLORS == color).collect();
            if nodes.is_empty() {
                continue;
            }
            for d in 0..3 {
                for &k in &nodes {
                    probe[k][d] = x[k][d] + h;
                }
                let plus = self.residual(&probe, factor, normals, Tensions::Fixed(tensions));
                for &k in &nodes {
                    probe[k][d] = x[k][d] - h;
                }
                let minus = self.residual(&probe, factor, normals, Tensions::Fixed(tensions));
                for &k in &nodes {
                    probe[k][d] = x[k][d];
                }
                for &k in &nodes {
                    let col = 3 * (k - 1) + d;
                    for j in k.saturating_sub(2).max(1)..=(k + 2).min(n) {
                        for dd in 0..3 {
                            let row = 3 * (j - 1) + dd;
                            let v = (plus[j][dd] - minus[j][dd]) / (2.0 * h);
                            raw[row * width + col + BANDWIDTH - row] = v;
                        }
                    }
                }
            }
        }
        let mut band = BandMatrix::zeros(dim, BANDWIDTH);
        for row in 0..dim {
            for col in row.saturating_sub(BANDWIDTH)..=row {
                let lower = raw[row * width + col + BANDWIDTH - row];
                let upper = raw[col * width + row + BANDWIDTH - col];
                band.add_lower(row, col, 0.5 * (lower + upper));
            }
        }
        band
    }

    /// Newton iteration at a fixed load factor. Returns iterations and the
    /// final max-norm residual, or the same pair on failure.
    fn newton(
        &self,
        x: &mut Vec<Vector3<f64>>,
        factor: f64,
        tol: f64,
        max_iterations: usize,
    ) -> std::result::Result<(usize, f64), (usize, f64)> {
        let mut normals = self.normals(x);
        let mut g = self.residual(x, factor, &normals, Tensions::Current);
        let mut lambda = 0.0;
        for iteration in 0..max_iterations {
            let residual = Self::max_norm(&g);
            if !residual.is_finite() {
                return Err((iteration, residual));
            }
            if residual < tol {
                return Ok((iteration, residual));
            }
            trace!("factor {factor:.3}, iteration {iteration}: residual {residual:.3e}, lambda {lambda:.3e}");
            let lengths: Vec<f64> = (0..self.loads.tendons.len())
                .map(|j| self.tendon_length(j, x, &normals[j]))
                .collect();
            let tensions: Vec<f64> = lengths
                .iter()
                .enumerate()
                .map(|(j, &l)| self.tension(j, l, factor))
                .collect();
            let hessian = self.stiffness(x, factor, &normals, &tensions);
            let low_rank = self.servo_terms(x, factor, &normals, &lengths);
            let rhs: Vec<f64> = Self::flatten(&g).iter().map(|v| -v).collect();
            let merit = Self::two_norm(&g);
            let diag = hessian.max_diagonal().max(1e-300);
            let mut accepted = false;
            for _ in 0..40 {
                let mut m = hessian.clone();
                if lambda > 0.0 {
                    m.add_diagonal(lambda);
                }
                let Some(chol) = m.cholesky() else {
                    lambda = (lambda * 10.0).max(LAMBDA_FLOOR * diag);
                    continue;
                };
                let step = solve_with_updates(&chol, &low_rank, &rhs);
                let trial = Self::displaced(x, &step);
                let trial_normals = self.normals(&trial);
                let trial_g = self.residual(&trial, factor, &trial_normals, Tensions::Current);
                let trial_merit = Self::two_norm(&trial_g);
                if trial_merit.is_finite() && trial_merit < merit {
                    *x = trial;
                    normals = trial_normals;
                    g = trial_g;
                    lambda = if lambda < 10.0 * LAMBDA_FLOOR * diag {
                        0.0
                    } else {
                        lambda * 0.1
                    };
                    accepted = true;
                    break;
                }
                lambda = (lambda * 10.0).max(LAMBDA_FLOOR * diag);
            }
            if !accepted {
                let residual = Self::max_norm(&g);
                if residual < 1e3 * tol {
                    // Round-off floor reached just above tolerance.
                    return Ok((iteration + 1, residual));
                }
                return Err((iteration + 1, residual));
            }
        }
        let residual = Self::max_norm(&g);
        if residual < tol {
            Ok((max_iterations, residual))
        } else {
            Err((max_iterations, residual))
        }
    }

    /// `√(∂T/∂l)·∇l` for every servo tendon with positive tension.
    fn servo_terms(
        &self,
        x: &[Vector3<f64>],
        factor: f64,
        normals: &[Vec<Vector3<f64>>],
        lengths: &[f64],
    ) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        for (j, t) in self.loads.tendons.iter().enumerate() {
            if let TendonDrive::Servo { target, kp } = t.drive {
                if lengths[j] > target - 1e-3 * target && kp > 0.0 {
                    let mut grad = vec![Vector3::zeros(); x.len()];
                    self.add_tendon_gradient(j, x, &normals[j], (factor * kp).sqrt(), &mut grad);
                    out.push(Self::flatten(&grad));
                }
            }
        }
        out
    }
}

/// Solves `(L·Lᵀ + Σ u·uᵀ)·x = b` by the Woodbury identity.
fn solve_with_updates(chol: &BandCholesky, updates: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let x0 = chol.solve(b);
    if updates.is_empty() {
        return x0;
    }
    let m = updates.len();
    let z: Vec<Vec<f64>> = updates.iter().map(|u| chol.solve(u)).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let small = DMatrix::from_fn(m, m, |i, j| dot(&updates[i], &z[j]) + if i == j { 1.0 } else { 0.0 });
    let proj = DVector::from_iterator(m, updates.iter().map(|u| dot(u, &x0)));
    let coef = small.lu().solve(&proj).unwrap_or_else(|| DVector::zeros(m));
    let mut x = x0;
    for (k, zk) in z.iter().enumerate() {
        for (xi, zi) in x.iter_mut().zip(zk) {
            *xi -= coef[k] * zi;
        }
    }
    x
}

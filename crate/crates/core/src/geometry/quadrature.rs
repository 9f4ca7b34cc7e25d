//! Adaptive 7/15-point Gauss–Kronrod quadrature and fixed Gauss–Legendre rules.
//!
//! The adaptive driver bisects the subinterval with the largest embedded error
//! estimate until the summed estimate falls below the absolute tolerance. The
//! tolerance is floored at the round-off level of the integral
//! (`50·ε·∫|f|`), below which no rule can make progress.

use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use nalgebra::DVector;

use crate::error::QuadratureError;

/// Default absolute tolerance.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;
/// Maximum number of subintervals before giving up.
pub const MAX_INTERVALS: usize = 2000;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_3,
    0.949_107_912_342_758_524_526_189_684_047_9,
    0.864_864_423_359_769_072_789_712_788_640_9,
    0.741_531_185_599_394_439_863_864_773_280_8,
    0.586_087_235_467_691_130_294_144_845_693_0,
    0.405_845_151_377_397_166_906_606_412_076_9,
    0.207_784_955_007_898_467_600_689_403_773_2,
    0.000_000_000_000_000_000_000_000_000_000_0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_20,
    0.104_790_010_322_250_183_839_876_322_541_5,
    0.140_653_259_715_525_918_745_189_590_510_2,
    0.169_004_726_639_267_902_826_583_426_598_6,
    0.190_350_578_064_785_409_913_256_402_421_0,
    0.204_432_940_075_298_892_414_161_999_234_6,
    0.209_482_141_084_727_828_012_999_174_891_7,
];

// Gauss weights for the odd-indexed Kronrod abscissae (the 7-point rule).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_1,
    0.279_705_391_489_276_667_901_467_771_423_8,
    0.381_830_050_505_118_944_950_369_775_488_98,
    0.417_959_183_673_469_387_755_102_040_816_3,
];

/// Values that can be integrated: scalars and fixed-length vectors.
pub trait Integrand: Clone + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero_like(&self) -> Self;
    /// Largest absolute component.
    fn max_abs(&self) -> f64;
    /// Componentwise absolute value.
    fn abs(&self) -> Self;
    fn is_finite(&self) -> bool;
}

impl Integrand for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn max_abs(&self) -> f64 {
        f64::abs(*self)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

impl Integrand for DVector<f64> {
    fn zero_like(&self) -> Self {
        DVector::zeros(self.len())
    }
    fn max_abs(&self) -> f64 {
        self.amax()
    }
    fn abs(&self) -> Self {
        DVector::abs(self)
    }
    fn is_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
    abs_value: T,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod_panel<T, F>(f: &mut F, a: f64, b: f64) -> Result<Panel<T>, QuadratureError>
where
    T: Integrand,
    F: FnMut(f64) -> T,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |f: &mut F, x: f64| -> Result<T, QuadratureError> {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(QuadratureError::NonFinite(x))
        }
    };

    let fc = eval(f, center)?;
    let mut kronrod = fc.clone() * WGK[7];
    let mut gauss = fc.clone() * WG[3];
    let mut abs_sum = fc.abs() * WGK[7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = eval(f, center - dx)?;
        let f2 = eval(f, center + dx)?;
        abs_sum = abs_sum + (f1.abs() + f2.abs()) * WGK[j];
        let pair = f1 + f2;
        kronrod = kronrod + pair.clone() * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let error = ((kronrod.clone() - gauss) * half).max_abs();
    Ok(Panel {
        a,
        b,
        value: kronrod * half,
        error,
        abs_value: abs_sum * half.abs(),
    })
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol` (floored at round-off).
pub fn adaptive_quadrature<F>(f: F, a: f64, b: f64, tol: f64) -> Result<f64, QuadratureError>
where
    F: FnMut(f64) -> f64,
{
    integrate(f, a, b, tol)
}

/// Vector-valued variant of [`adaptive_quadrature`]; the error is measured in the max norm.
pub fn adaptive_quadrature_vec<F>(f: F, a: f64, b: f64, tol: f64) -> Result<DVector<f64>, QuadratureError>
where
    F: FnMut(f64) -> DVector<f64>,
{
    integrate(f, a, b, tol)
}

pub fn integrate<T, F>(mut f: F, a: f64, b: f64, tol: f64) -> Result<T, QuadratureError>
where
    T: Integrand,
    F: FnMut(f64) -> T,
{
    assert!(tol > 0.0, "quadrature tolerance must be positive");
    let first = kronrod_panel(&mut f, a, b)?;
    if a == b {
        return Ok(first.value);
    }
    let mut total = first.value.clone();
    let mut total_error = first.error;
    let mut total_abs = first.abs_value.clone();
    let mut heap = BinaryHeap::new();
    heap.push(first);

    loop {
        let floor = 50.0 * f64::EPSILON * total_abs.max_abs();
        if total_error <= tol.max(floor) {
            return Ok(total);
        }
        if heap.len() >= MAX_INTERVALS {
            break;
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval cannot be split further in floating point.
            heap.push(worst);
            break;
        }
        let left = kronrod_panel(&mut f, worst.a, mid)?;
        let right = kronrod_panel(&mut f, mid, worst.b)?;
        total = total - worst.value + left.value.clone() + right.value.clone();
        total_abs = total_abs - worst.abs_value + left.abs_value.clone() + right.abs_value.clone();
        // Re-summing the errors avoids drift from repeated subtraction.
        heap.push(left);
        heap.push(right);
        total_error = heap.iter().map(|p| p.error).sum();
    }

    Err(QuadratureError::NonConvergence {
        a,
        b,
        tolerance: tol,
        estimate: total.max_abs(),
        error: total_error,
        intervals: heap.len(),
    })
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `n`-point rule by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Shared 32-point rule.
    pub fn order32() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(32))
    }

    /// Applies the rule on `[a, b]` split into `panels` equal pieces.
    pub fn integrate<T, F>(&self, mut f: F, a: f64, b: f64, panels: usize) -> T
    where
        T: Integrand,
        F: FnMut(f64) -> T,
    {
        let panels = panels.max(1);
        let width = (b - a) / panels as f64;
        let half = 0.5 * width;
        let mut acc: Option<T> = None;
        for p in 0..panels {
            let center = a + (p as f64 + 0.5) * width;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                let term = f(center + half * x) * (w * half);
                acc = Some(match acc {
                    Some(sum) => sum + term,
                    None => term,
                });
            }
        }
        acc.expect("at least one node")
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { p0 } else { p1 };
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, dp)
}

//! Centerline integrals of a segment whose tangent angle is quadratic in `s`:
//! `α(v) = c0·v + c1·v²/2`.
//!
//! The translation of the frame at `s` needs `∫₀ˢ sin α` and `∫₀ˢ cos α`,
//! i.e. the real and imaginary parts of `I = ∫₀ˢ exp(iα(v)) dv`.
//!
//! For `c1 > 0`, completing the square with `u(v) = (c0 + c1·v)/√(π·c1)` gives
//!
//! ```text
//! I = √(π/c1) · exp(−i·c0²/(2c1)) · [F(u(s)) − F(u(0))],   F = C + i·S
//! ```
//!
//! For `|u| > 1.5` the Fresnel term is written as `±((1+i)/2 − G(|u|)·e^{iπu²/2})`
//! and the phase `πu²/2 − c0²/(2c1)` collapses to `α(v)` exactly, so the large
//! and nearly equal phases never get evaluated separately. Negative `c1` uses
//! `I(c0, c1) = conj(I(−c0, −c1))`. Below `|c1| = 1e-4` the prefactor blows up,
//! and a Taylor expansion in `c1` around the constant-curvature arc takes over.

use num_complex::Complex64;

use super::fresnel::{auxiliary, series, SERIES_LIMIT};
use super::quadrature::GaussLegendre;

/// Below this `|c1|` the small-slope expansion replaces the Fresnel form.
pub const SLOPE_SWITCH: f64 = 1e-4;

/// Returns `(scale·∫₀ˢ sin α, scale·∫₀ˢ cos α)`.
pub fn affine_arc_integrals(c0: f64, c1: f64, scale: f64, s: f64) -> (f64, f64) {
    let i = arc_integral(c0, c1, s);
    (scale * i.im, scale * i.re)
}

/// `∫₀ˢ exp(i(c0·v + c1·v²/2)) dv`.
pub fn arc_integral(c0: f64, c1: f64, s: f64) -> Complex64 {
    if c1.abs() < SLOPE_SWITCH {
        small_slope(c0, c1, s)
    } else {
        fresnel_form(c0, c1, s)
    }
}

/// Closed form through Fresnel integrals; valid for any nonzero `c1`.
pub fn fresnel_form(c0: f64, c1: f64, s: f64) -> Complex64 {
    if c1 < 0.0 {
        return fresnel_form(-c0, -c1, s).conj();
    }
    debug_assert!(c1 > 0.0);
    let root = (std::f64::consts::PI * c1).sqrt();
    let u0 = c0 / root;
    let u1 = (c0 + c1 * s) / root;
    let alpha_end = c0 * s + 0.5 * c1 * s * s;

    // Each endpoint contributes sgn·((1+i)/2·e^{-iK} − G·e^{iα}) when large,
    // or F_series(u)·e^{-iK} when small.
    let mut constant_count = 0.0;
    let mut oscillatory = Complex64::new(0.0, 0.0);
    let mut small_part = Complex64::new(0.0, 0.0);
    for (u, alpha, sign) in [(u1, alpha_end, 1.0), (u0, 0.0, -1.0)] {
        let au = u.abs();
        let su = u.signum();
        if au <= SERIES_LIMIT {
            small_part += series(au) * (sign * su);
        } else {
            constant_count += sign * su;
            oscillatory -= auxiliary(au) * Complex64::from_polar(1.0, alpha) * (sign * su);
        }
    }
    let mut total = oscillatory;
    if constant_count != 0.0 || small_part != Complex64::new(0.0, 0.0) {
        let k = c0 * c0 / (2.0 * c1);
        let phase = Complex64::from_polar(1.0, -k);
        total += (Complex64::new(0.5, 0.5) * constant_count + small_part) * phase;
    }
    total * (std::f64::consts::PI / c1).sqrt()
}

/// Expansion `Σ_k (i·c1/2)^k / k! · ∫₀ˢ v^{2k} e^{i·c0·v} dv`, five terms.
pub fn small_slope(c0: f64, c1: f64, s: f64) -> Complex64 {
    const TERMS: usize = 5;
    let w = c0 * s;
    let moments = unit_moments(w, 2 * (TERMS - 1));
    let step = Complex64::new(0.0, 0.5 * c1 * s * s);
    let mut coeff = Complex64::new(s, 0.0);
    let mut total = Complex64::new(0.0, 0.0);
    for k in 0..TERMS {
        total += coeff * moments[2 * k];
        coeff *= step / (k + 1) as f64;
    }
    total
}

/// `m_n(w) = ∫₀¹ tⁿ e^{iwt} dt` for `n = 0..=max_n`.
fn unit_moments(w: f64, max_n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); max_n + 1];
    if w.abs() <= 8.0 {
        // m_n = Σ_j (iw)^j / (j! (n + j + 1))
        for (n, slot) in out.iter_mut().enumerate() {
            let mut term = Complex64::new(1.0, 0.0);
            let mut sum = Complex64::new(0.0, 0.0);
            for j in 0..120 {
                let add = term / (n + j + 1) as f64;
                sum += add;
                if add.norm() < 1e-18 {
                    break;
                }
                term *= Complex64::new(0.0, w) / (j + 1) as f64;
            }
            *slot = sum;
        }
    } else {
        // Upward recurrence, stable while n < |w|.
        let e = Complex64::from_polar(1.0, w);
        let iw = Complex64::new(0.0, w);
        out[0] = (e - 1.0) / iw;
        for n in 1..=max_n {
            out[n] = (e - out[n - 1] * n as f64) / iw;
        }
    }
    out
}

/// `(∫₀ˢ v·e^{iα} dv, ∫₀ˢ (v²/2)·e^{iα} dv)`, the sensitivities of the arc
/// integral to `c0` and `c1` (up to a factor `i`). Composite 32-point
/// Gauss–Legendre, with panels sized to the accumulated phase.
pub fn arc_moments(c0: f64, c1: f64, s: f64) -> (Complex64, Complex64) {
    if s == 0.0 {
        return (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    }
    let rate = c0.abs().max((c0 + c1 * s).abs());
    let panels = ((rate * s) / 12.0).ceil().max(1.0) as usize;
    let rule = GaussLegendre::order32();
    let mut m1 = Complex64::new(0.0, 0.0);
    let mut m2 = Complex64::new(0.0, 0.0);
    let width = s / panels as f64;
    let half = 0.5 * width;
    for p in 0..panels {
        let center = (p as f64 + 0.5) * width;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let v = center + half * x;
            let e = Complex64::from_polar(w * half, c0 * v + 0.5 * c1 * v * v);
            m1 += e * v;
            m2 += e * (0.5 * v * v);
        }
    }
    (m1, m2)
}

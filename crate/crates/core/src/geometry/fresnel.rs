//! Fresnel integrals `S(x) = ∫₀ˣ sin(πt²/2) dt`, `C(x) = ∫₀ˣ cos(πt²/2) dt`.
//!
//! Power series below `|x| = 1.5`, Lentz continued fraction for the
//! complementary error function above. The continued-fraction branch also
//! exposes the auxiliary amplitude `G(x)` in
//!
//! ```text
//! C(x) + i·S(x) = (1 + i)/2 − G(x)·exp(iπx²/2),   x > 0
//! ```
//!
//! which lets callers combine the oscillatory phase with their own,
//! better-conditioned phase instead of evaluating `πx²/2` for large `x`.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

/// Below this magnitude the power series is used.
pub const SERIES_LIMIT: f64 = 1.5;

const MAX_ITER: usize = 200;
const TINY: f64 = 1e-300;

/// Returns `(S(x), C(x))`.
pub fn fresnel(x: f64) -> (f64, f64) {
    let cs = fresnel_complex(x);
    (cs.im, cs.re)
}

/// `C(x) + i·S(x)`.
pub fn fresnel_complex(x: f64) -> Complex64 {
    let ax = x.abs();
    let value = if ax <= SERIES_LIMIT {
        series(ax)
    } else {
        let theta = FRAC_PI_2 * ax * ax;
        Complex64::new(0.5, 0.5) - auxiliary(ax) * Complex64::from_polar(1.0, theta)
    };
    if x < 0.0 {
        -value
    } else {
        value
    }
}

/// Power series, accurate to a few ulps for `x ≤ 1.5`.
pub fn series(x: f64) -> Complex64 {
    if x < 1e-150 {
        return Complex64::new(x, 0.0);
    }
    // C(x) = Σ (-1)^k (π/2)^{2k} x^{4k+1} / ((2k)! (4k+1))
    // S(x) = Σ (-1)^k (π/2)^{2k+1} x^{4k+3} / ((2k+1)! (4k+3))
    let fact = FRAC_PI_2 * x * x;
    let mut term = x; // fact^n x / n!
    let mut c = x;
    let mut s = 0.0;
    for n in 1..MAX_ITER {
        term *= fact / n as f64;
        let contribution = term / (2 * n + 1) as f64;
        match n % 4 {
            0 => c += contribution,
            1 => s += contribution,
            2 => c -= contribution,
            _ => s -= contribution,
        }
        if contribution < 1e-17 * (c.abs() + s.abs()) {
            break;
        }
    }
    Complex64::new(c, s)
}

/// Amplitude `G(x)` for `x > SERIES_LIMIT`, from the continued fraction of
/// `erfc(√π (1 − i) x / 2)`.
pub fn auxiliary(x: f64) -> Complex64 {
    debug_assert!(x > 0.0);
    let pix2 = PI * x * x;
    let mut b = Complex64::new(1.0, -pix2);
    let mut cc = Complex64::new(1.0 / TINY, 0.0);
    let mut d = b.inv();
    let mut h = d;
    let mut n = -1.0_f64;
    for _ in 2..MAX_ITER {
        n += 2.0;
        let a = -n * (n + 1.0);
        b += 4.0;
        d = (d * a + b).inv();
        cc = b + cc.inv() * a;
        let del = cc * d;
        h *= del;
        if (del.re - 1.0).abs() + del.im.abs() < 1e-16 {
            break;
        }
    }
    h *= Complex64::new(x, -x);
    Complex64::new(0.5, 0.5) * h
}

//! Bessel functions of the first kind (J0, J1) and modified Bessel functions of
//! the second kind (K0, K1) for real positive arguments.
//!
//! The LP01 characteristic equation is differentiated twice by finite
//! differences downstream, so these must be smooth to machine precision, not
//! just accurate: piecewise rational fits are avoided. J uses its power series
//! for small arguments and the periodic Bessel integral otherwise; K uses the
//! trapezoid rule on `K_n(x) = ∫₀^∞ exp(-x cosh t) cosh(n t) dt`, which converges
//! geometrically in the step because the integrand is analytic in a strip.

use std::f64::consts::PI;

const J_SERIES_LIMIT: f64 = 4.0;
const K_STEP: f64 = 0.125;

/// Bessel function of the first kind, order 0.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= J_SERIES_LIMIT {
        j_series(0, x)
    } else {
        j_integral(0, x)
    }
}

/// Bessel function of the first kind, order 1.
pub fn bessel_j1(x: f64) -> f64 {
    let s = x.signum();
    let x = x.abs();
    s * if x <= J_SERIES_LIMIT {
        j_series(1, x)
    } else {
        j_integral(1, x)
    }
}

fn j_series(n: u32, x: f64) -> f64 {
    let q = -0.25 * x * x;
    // k = 0 term: (x/2)^n / n!
    let mut term = if n == 0 { 1.0 } else { 0.5 * x };
    let mut sum = term;
    for k in 1..60 {
        term *= q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

fn j_integral(n: u32, x: f64) -> f64 {
    // Trapezoid on a full period is spectrally accurate; the integrand is
    // symmetric so half the period with halved end weights is enough.
    let m = 2 * ((x as usize) + 40);
    let h = PI / m as f64;
    let f = |th: f64| (n as f64 * th - x * th.sin()).cos();
    let mut sum = 0.5 * (f(0.0) + f(PI));
    for k in 1..m {
        sum += f(k as f64 * h);
    }
    sum * h / PI
}

/// Returns `(K0(x), K1(x))` for `x > 0`.
pub fn bessel_k01(x: f64) -> (f64, f64) {
    debug_assert!(x > 0.0);
    // f(0) carries half weight
    let mut k0 = 0.5 * (-x).exp();
    let mut k1 = k0;
    let mut j = 1usize;
    loop {
        let t = j as f64 * K_STEP;
        let ch = t.cosh();
        let e = (-x * ch).exp();
        k0 += e;
        k1 += e * ch;
        if e * ch < 1e-18 * k1 || j > 4000 {
            break;
        }
        j += 1;
    }
    (k0 * K_STEP, k1 * K_STEP)
}

pub fn bessel_k0(x: f64) -> f64 {
    bessel_k01(x).0
}

pub fn bessel_k1(x: f64) -> f64 {
    bessel_k01(x).1
}

/// First zero of J0, the LP11 cutoff V-number.
pub const J0_FIRST_ZERO: f64 = 2.404_825_557_695_773;

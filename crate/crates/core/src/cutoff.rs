//! Fixed smooth cutoff used by the analytic test-function families.
//!
//! `bump(s)` equals 1 on `[0, 1]`, decays through a quintic smoothstep on
//! `[1, 2]` and vanishes for `s >= 2`; it is `C²` and piecewise polynomial.
//! The same profile plays the role of every cutoff (`φ`, `φ₁`, `φ₂`).

use crate::quadrature::integrate;

/// Value of the cutoff at `s >= 0` (negative arguments are reflected).
pub fn bump(s: f64) -> f64 {
    let s = s.abs();
    if s <= 1.0 {
        1.0
    } else if s >= 2.0 {
        0.0
    } else {
        let u = 2.0 - s;
        u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
    }
}

/// Derivative of [`bump`] with respect to `s >= 0`.
pub fn bump_derivative(s: f64) -> f64 {
    let a = s.abs();
    if a <= 1.0 || a >= 2.0 {
        return 0.0;
    }
    let u = a - 1.0;
    let d = -30.0 * u * u * (1.0 - u) * (1.0 - u);
    if s < 0.0 {
        -d
    } else {
        d
    }
}

/// `‖φ(|·|)‖²` over the real line.
pub fn bump_norm_sq() -> f64 {
    2.0 * (1.0 + integrate(|s| bump(s) * bump(s), 1.0, 2.0, 1, 8))
}

/// `‖φ′(|·|)‖²` over the real line (equals 20/7).
pub fn bump_derivative_norm_sq() -> f64 {
    2.0 * integrate(|s| bump_derivative(s).powi(2), 1.0, 2.0, 1, 8)
}

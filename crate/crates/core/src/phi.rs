//! φ-functions `φ₀(z) = eᶻ`, `φₖ(z) = ∫₀¹ e^{z(1−t)} t^{k−1} dt`, so `φₖ(0) = 1/k`.

use num_complex::Complex64;

/// Largest supported index.
pub const KMAX: usize = 12;

/// Radius below which every index uses the power series.
pub const SWITCH_RADIUS: f64 = 1.0;

/// Power series `φₖ(z) = Σₙ (k−1)! zⁿ / (n+k)!`, valid for all `z` but used
/// only where its terms shrink geometrically.
pub fn phi_series(k: usize, z: Complex64) -> Complex64 {
    if k == 0 {
        return z.exp();
    }
    let mut term = Complex64::new(1.0 / k as f64, 0.0);
    let mut sum = term;
    for n in 1..400 {
        term *= z / (n + k) as f64;
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    sum
}

/// Upward recurrence from `eᶻ`: `φ₁ = (φ₀ − 1)/z`, `φₖ₊₁ = (k φₖ − 1)/z`.
pub fn phi_recurrence(k: usize, z: Complex64) -> Complex64 {
    let mut p = z.exp();
    for j in 0..k {
        p = if j == 0 { (p - 1.0) / z } else { (p * j as f64 - 1.0) / z };
    }
    p
}

/// `[φ₀(z), …, φ_kmax(z)]`.
///
/// Index `k` is taken from the series when `|z| < max(1, k)` and from one
/// recurrence step otherwise; the step multiplies errors by `(k−1)/|z| < 1`.
pub fn phi_row(kmax: usize, z: Complex64) -> Vec<Complex64> {
    assert!(kmax <= KMAX, "phi index {kmax} exceeds {KMAX}");
    let r = z.norm();
    let mut out = Vec::with_capacity(kmax + 1);
    out.push(z.exp());
    for k in 1..=kmax {
        let v = if r < SWITCH_RADIUS.max(k as f64) {
            phi_series(k, z)
        } else if k == 1 {
            (out[0] - 1.0) / z
        } else {
            (out[k - 1] * (k - 1) as f64 - 1.0) / z
        };
        out.push(v);
    }
    out
}

pub fn phi(k: usize, z: Complex64) -> Complex64 {
    phi_row(k, z)[k]
}

/// Real-argument convenience.
pub fn phi_real(k: usize, x: f64) -> f64 {
    phi(k, Complex64::new(x, 0.0)).re
}

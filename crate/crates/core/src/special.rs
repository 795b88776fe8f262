//! Real gamma function with explicit pole handling.

use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Tolerance for deciding that an argument sits on a pole of `Γ`.
pub const POLE_TOL: f64 = 1e-9;

/// `Some(k)` when `x` is within [`POLE_TOL`] of the non-positive integer `-k`.
pub fn pole_index(x: f64) -> Option<u64> {
    let r = x.round();
    if r <= 0.0 && (x - r).abs() <= POLE_TOL {
        Some((-r) as u64)
    } else {
        None
    }
}

/// `(ln|Γ(x)|, sign Γ(x))` away from the poles.
pub fn ln_gamma_signed(x: f64) -> (f64, f64) {
    if x < 0.5 {
        // Γ(x) Γ(1−x) = π / sin(πx)
        let s = (PI * x).sin();
        let (lg, sg) = ln_gamma_signed(1.0 - x);
        return ((PI / s.abs()).ln() - lg, s.signum() * sg);
    }
    if x == x.round() && x <= 171.0 {
        return (factorial_ln(x as u64 - 1), 1.0);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    (
        0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln(),
        1.0,
    )
}

fn factorial_ln(n: u64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `Γ(x)`; infinite at the poles.
pub fn gamma(x: f64) -> f64 {
    if pole_index(x).is_some() {
        return f64::INFINITY;
    }
    if x == x.round() && (1.0..=171.0).contains(&x) {
        return (1..x as u64).fold(1.0, |a, k| a * k as f64);
    }
    let (l, s) = ln_gamma_signed(x);
    s * l.exp()
}

/// Residue of `Γ` at `-k`: `(-1)^k / k!`.
pub fn gamma_residue(k: u64) -> f64 {
    let f: f64 = (1..=k).fold(1.0, |a, j| a * j as f64);
    if k % 2 == 0 {
        1.0 / f
    } else {
        -1.0 / f
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert_eq!(gamma(5.0), 24.0);
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-14);
        assert!((gamma(-0.5) + 2.0 * PI.sqrt()).abs() < 1e-13);
        assert!((gamma(-1.5) - 4.0 / 3.0 * PI.sqrt()).abs() < 1e-13);
        assert!((gamma(7.3) / 1_271.423_633_663_908_5 - 1.0).abs() < 1e-12);
        assert!(gamma(-2.0).is_infinite());
        assert_eq!(pole_index(-3.0 + 1e-12), Some(3));
        assert_eq!(pole_index(0.5), None);
        assert_eq!(gamma_residue(3), -1.0 / 6.0);
    }

    #[test]
    fn recurrence_holds() {
        for i in 0..40 {
            let x = -7.7 + 0.37 * i as f64;
            if pole_index(x).is_some() || pole_index(x + 1.0).is_some() {
                continue;
            }
            let lhs = gamma(x + 1.0);
            let rhs = x * gamma(x);
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0), "x = {x}");
        }
    }
}

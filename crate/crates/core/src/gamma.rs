//! Gamma function by the Lanczos approximation (g = 7, nine terms).

use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(x) for real x, using the reflection formula below 1/2.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
}

/// Surface measure of the unit k-sphere in ℝ^{k+1}.
pub fn unit_sphere_measure(k: u32) -> f64 {
    let half = (k as f64 + 1.0) / 2.0;
    2.0 * PI.powf(half) / gamma(half)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(k: u32) -> f64 {
        (1..=k).map(f64::from).product()
    }

    #[test]
    fn integers_match_factorials() {
        for k in 1..15u32 {
            let rel = (gamma(k as f64) - factorial(k - 1)).abs() / factorial(k - 1);
            assert!(rel < 1e-13, "Γ({k}) rel err {rel:e}");
        }
    }

    #[test]
    fn half_integers_match_double_factorial_form() {
        // Γ(k + 1/2) = (2k)! √π / (4^k k!)
        for k in 0..10u32 {
            let exact = factorial(2 * k) * PI.sqrt() / (4f64.powi(k as i32) * factorial(k));
            let rel = (gamma(k as f64 + 0.5) - exact).abs() / exact;
            assert!(rel < 1e-13, "Γ({k}.5) rel err {rel:e}");
        }
    }

    #[test]
    fn sphere_measures() {
        assert!((unit_sphere_measure(1) - 2.0 * PI).abs() < 1e-13);
        assert!((unit_sphere_measure(2) - 4.0 * PI).abs() < 1e-13);
        assert!((unit_sphere_measure(4) - 8.0 * PI * PI / 3.0).abs() < 1e-12);
        assert!((unit_sphere_measure(5) - PI.powi(3)).abs() < 1e-12);
    }
}

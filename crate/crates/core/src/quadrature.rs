//! Adaptive Gauss–Kronrod (7/15) quadrature and the periodic trapezoid rule.

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Integrate `f` over [a, b] to the absolute tolerance `tol` by recursive
/// bisection of the Gauss–Kronrod estimate.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "quadrature tolerance {tol} must be > 0"
        )));
    }
    const MAX_DEPTH: u32 = 40;
    let mut total = 0.0;
    let mut stack = vec![(a, b, tol, 0u32)];
    while let Some((lo, hi, local_tol, depth)) = stack.pop() {
        let (value, err) = gk15(&f, lo, hi);
        if err <= local_tol || (err <= 1e3 * f64::EPSILON * value.abs()) {
            total += value;
        } else if depth >= MAX_DEPTH {
            return Err(Error::QuadratureFailure(format!(
                "interval [{lo}, {hi}] unresolved, error estimate {err:e}"
            )));
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, 0.5 * local_tol, depth + 1));
            stack.push((mid, hi, 0.5 * local_tol, depth + 1));
        }
    }
    Ok(total)
}

/// Trapezoid rule for uniform samples of a T-periodic function (endpoint
/// excluded).
pub fn periodic_trapezoid(samples: &[f64], period: f64) -> f64 {
    samples.iter().sum::<f64>() * period / samples.len() as f64
}

/// Periodic trapezoid with a Richardson-style check against the rule on every
/// other sample. Fails when the two disagree by more than `rel_tol`.
pub fn periodic_trapezoid_checked(samples: &[f64], period: f64, rel_tol: f64) -> Result<f64> {
    let fine = periodic_trapezoid(samples, period);
    if samples.len() < 8 || !samples.len().is_multiple_of(2) {
        return Err(Error::QuadratureFailure(format!(
            "need an even number (>= 8) of periodic samples, got {}",
            samples.len()
        )));
    }
    let coarse: Vec<f64> = samples.iter().step_by(2).copied().collect();
    let coarse = periodic_trapezoid(&coarse, period);
    let scale = fine.abs().max(f64::MIN_POSITIVE);
    if (fine - coarse).abs() > rel_tol * scale {
        return Err(Error::QuadratureFailure(format!(
            "periodic trapezoid unresolved: halved grid differs by {:e} (relative)",
            (fine - coarse).abs() / scale
        )));
    }
    Ok(fine)
}

//! Fourier tools on uniform periodic grids.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// Angular wavenumber of FFT bin `m` on a grid of `n` points over `period`.
/// Bins above n/2 are negative frequencies; the Nyquist bin is reported
/// positive.
pub fn wavenumber(m: usize, n: usize, period: f64) -> f64 {
    let k = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
    2.0 * PI * k / period
}

fn forward(values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

fn inverse_real(mut buf: Vec<Complex64>) -> Vec<f64> {
    let n = buf.len();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|c| c.re / n as f64).collect()
}

/// Multiply the spectrum by a real even symbol σ(ξ).
pub fn apply_symbol(values: &[f64], period: f64, symbol: impl Fn(f64) -> f64) -> Vec<f64> {
    let n = values.len();
    let mut hat = forward(values);
    for (m, c) in hat.iter_mut().enumerate() {
        *c *= symbol(wavenumber(m, n, period));
    }
    inverse_real(hat)
}

/// k-th derivative by trigonometric interpolation. For odd k the Nyquist
/// mode is dropped (its derivative is not real on the grid).
pub fn derivative(values: &[f64], period: f64, k: u32) -> Vec<f64> {
    let n = values.len();
    let mut hat = forward(values);
    let i_pow = Complex64::new(0.0, 1.0).powu(k);
    for (m, c) in hat.iter_mut().enumerate() {
        if k % 2 == 1 && n.is_multiple_of(2) && m == n / 2 {
            *c = Complex64::new(0.0, 0.0);
            continue;
        }
        *c *= i_pow * wavenumber(m, n, period).powi(k as i32);
    }
    inverse_real(hat)
}

/// First row of the circulant matrix representing σ(−i d/dt) on the grid:
/// row[d] = (1/N) Σ_m σ(ξ_m) cos(2π m d / N).
pub fn circulant_row(n: usize, period: f64, symbol: impl Fn(f64) -> f64) -> Vec<f64> {
    let hat: Vec<Complex64> = (0..n)
        .map(|m| Complex64::new(symbol(wavenumber(m, n, period)), 0.0))
        .collect();
    inverse_real(hat)
}

/// Band-limited trigonometric interpolant evaluated off-grid.
pub fn interpolate(values: &[f64], period: f64, t: f64) -> f64 {
    let n = values.len();
    let hat = forward(values);
    let mut acc = 0.0;
    for (m, c) in hat.iter().enumerate() {
        let xi = wavenumber(m, n, period);
        // the Nyquist term split evenly between ±ξ is real: cos only
        if n.is_multiple_of(2) && m == n / 2 {
            acc += c.re * (xi * t).cos();
        } else {
            acc += (c * Complex64::from_polar(1.0, xi * t)).re;
        }
    }
    acc / n as f64
}

//! Second-variation diagnostics: nodal arcs of v̇ on l-fold covers, negative
//! modes of the cylinder from its symbol, and spectra of the discretized
//! linearization L w = w⁗ − c2·ẅ + (c0 − p·r·v^{p−1})·w.

use serde::Serialize;

use crate::dynamics::{symbol_cyl, vector_field, CylinderState};
use crate::eigen::{jacobi, SymMatrix};
use crate::error::{Error, Result};
use crate::params::DimensionParams;
use crate::solver::{DelaunayOrbit, SERIES_TOL};
use crate::spectral::circulant_row;
use crate::taylor::propagate_linearized;

/// Jacobi stopping threshold relative to ‖A‖_F.
pub const JACOBI_TOL: f64 = 1e-12;

/// Eigenvalues within this fraction of the largest reported magnitude are
/// kernel, neither negative nor positive.
pub const KERNEL_REL: f64 = 1e-4;

/// Connected arcs of {v̇ > 0} on the circle of length l·T_a. Samples with
/// |v̇| below 1e−8·max|v̇| are treated as zeros and skipped.
pub fn nodal_arcs(orbit: &DelaunayOrbit, l: usize) -> usize {
    if l == 0 {
        return 0;
    }
    let vmax = orbit.samples.iter().fold(0.0f64, |m, s| m.max(s.v1.abs()));
    let thr = 1e-8 * vmax;
    let signs: Vec<i8> = orbit
        .samples
        .iter()
        .filter(|s| s.v1.abs() > thr)
        .map(|s| if s.v1 > 0.0 { 1 } else { -1 })
        .collect();
    if signs.is_empty() {
        return 0;
    }
    let cover: Vec<i8> = signs.iter().cycle().take(signs.len() * l).copied().collect();
    let m = cover.len();
    let rises = (0..m).filter(|&i| cover[i] < 0 && cover[(i + 1) % m] > 0).count();
    if rises == 0 && cover[0] > 0 {
        1
    } else {
        rises
    }
}

/// #{m ∈ ℤ : σ(2πm/T) < 0} by enumeration.
pub fn cylinder_negative_modes(params: &DimensionParams, period: f64) -> Result<usize> {
    if !(period > 0.0) || !period.is_finite() {
        return Err(Error::InvalidParameter(format!("circumference {period} must be > 0")));
    }
    let mut count = 0;
    let mut m: i64 = 0;
    loop {
        let xi = 2.0 * std::f64::consts::PI * m as f64 / period;
        if symbol_cyl(params, xi) >= 0.0 {
            // σ increases in |ξ|
            break;
        }
        count += if m == 0 { 1 } else { 2 };
        m += 1;
    }
    Ok(count)
}

/// 2⌊T/t_cyl⌋ + 1.
pub fn cylinder_negative_modes_closed_form(params: &DimensionParams, period: f64) -> usize {
    2 * (period / params.t_cyl).floor() as usize + 1
}

#[derive(Debug, Clone)]
pub enum Operator<'a> {
    Cylinder { period: f64 },
    Delaunay { orbit: &'a DelaunayOrbit, l: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub circumference: f64,
    pub operator: String,
    pub l: usize,
    pub grid: usize,
    /// The lowest 2l + 3 eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Eigenvalues of the full discretized operator below −KERNEL_REL·scale.
    pub negative_count: usize,
    /// Eigenvalue of smallest magnitude.
    pub near_zero: f64,
    /// |cos| of the angle between that eigenvector and v̇ on the grid.
    pub translation_correlation: Option<f64>,
    pub jacobi_sweeps: usize,
}

impl SpectrumReport {
    /// Largest magnitude among the reported eigenvalues.
    pub fn reported_scale(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn has_kernel(&self, rel: f64) -> bool {
        self.near_zero.abs() <= rel * self.reported_scale()
    }
}

pub fn discretized_spectrum(params: &DimensionParams, op: &Operator<'_>, grid: usize) -> Result<SpectrumReport> {
    if grid < 128 || !grid.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "grid {grid} must be a power of two >= 128"
        )));
    }
    let (circ, l, tag) = match op {
        Operator::Cylinder { period } => {
            if !(*period > 0.0) {
                return Err(Error::InvalidParameter(format!("circumference {period} must be > 0")));
            }
            (*period, 1, "cylinder".to_string())
        }
        Operator::Delaunay { orbit, l } => {
            if *l == 0 {
                return Err(Error::InvalidParameter("l must be >= 1".into()));
            }
            (*l as f64 * orbit.t_a, *l, format!("delaunay(a={}, l={l})", orbit.a))
        }
    };
    let ts: Vec<f64> = (0..grid).map(|j| circ * j as f64 / grid as f64).collect();
    let states: Vec<CylinderState> = match op {
        Operator::Cylinder { .. } => ts
            .iter()
            .map(|&t| CylinderState {
                t,
                ..CylinderState::cylinder(params)
            })
            .collect(),
        Operator::Delaunay { orbit, .. } => ts.iter().map(|&t| orbit.state_at(t)).collect(),
    };
    let row = circulant_row(grid, circ, |x| x.powi(4) + params.c2 * x * x);
    let mut a = SymMatrix::zeros(grid);
    for i in 0..grid {
        for j in 0..grid {
            a.set(i, j, row[(i + grid - j) % grid]);
        }
        let v = states[i].v;
        let pot = params.c0 - params.p * params.r * v.powf(params.p - 1.0);
        a.set(i, i, a.get(i, i) + pot);
    }
    let eig = jacobi(a, JACOBI_TOL)?;
    let m = (2 * l + 3).min(grid);
    let scale = eig.values[..m].iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let negative_count = eig.values.iter().filter(|&&x| x < -KERNEL_REL * scale).count();
    let k0 = (0..grid)
        .min_by(|&i, &j| eig.values[i].abs().total_cmp(&eig.values[j].abs()))
        .unwrap();
    let translation_correlation = match op {
        Operator::Cylinder { .. } => None,
        Operator::Delaunay { .. } => {
            let e = &eig.vectors[k0];
            let d: Vec<f64> = states.iter().map(|s| s.v1).collect();
            let dot: f64 = e.iter().zip(&d).map(|(x, y)| x * y).sum();
            let ne = e.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nd = d.iter().map(|x| x * x).sum::<f64>().sqrt();
            Some(dot.abs() / (ne * nd))
        }
    };
    Ok(SpectrumReport {
        circumference: circ,
        operator: tag,
        l,
        grid,
        eigenvalues: eig.values[..m].to_vec(),
        negative_count,
        near_zero: eig.values[k0],
        translation_correlation,
        jacobi_sweeps: eig.sweeps,
    })
}

/// Propagate the solution from `s0` together with the linearization started
/// at (v̇, v̈, v⃛, v⁗)(0) and return max_t ‖w − (v̇, v̈, v⃛, v⁗)‖∞ over one
/// period. Both series share the step, so the residual measures how well the
/// linearized recurrence reproduces differentiation of the flow.
pub fn variational_residual_from(params: &DimensionParams, s0: &CylinderState, period: f64) -> Result<f64> {
    let f0 = vector_field(params, s0)?;
    let samples = propagate_linearized(params, s0, f0, s0.t + period, SERIES_TOL, 4)?;
    let mut worst = 0.0f64;
    for smp in &samples {
        let [v, v1, v2, v3] = smp.state;
        let f = vector_field(params, &CylinderState::new(smp.t, v, v1, v2, v3))?;
        for (w, fk) in smp.w.iter().zip(f) {
            worst = worst.max((w - fk).abs());
        }
    }
    Ok(worst)
}

pub fn variational_residual(params: &DimensionParams, orbit: &DelaunayOrbit) -> Result<f64> {
    let s0 = CylinderState::new(0.0, orbit.a, 0.0, orbit.b, 0.0);
    variational_residual_from(params, &s0, orbit.t_a)
}

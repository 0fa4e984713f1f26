//! The radial equation as a first-order system on (v, v', v'', v'''), its
//! conserved energy and the linearization symbols.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::DimensionParams;

/// Smallest admissible value of the conformal factor.
pub const V_FLOOR: f64 = 1e-12;

/// A point of the first-order system.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct CylinderState {
    pub t: f64,
    pub v: f64,
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
}

impl CylinderState {
    pub fn new(t: f64, v: f64, v1: f64, v2: f64, v3: f64) -> Self {
        Self { t, v, v1, v2, v3 }
    }

    /// The constant cylindrical solution.
    pub fn cylinder(params: &DimensionParams) -> Self {
        Self::new(0.0, params.v_cyl, 0.0, 0.0, 0.0)
    }

    /// The spherical solution at its maximum, t = 0.
    pub fn sphere_peak(params: &DimensionParams) -> Self {
        Self::new(0.0, 1.0, 0.0, -params.sph_exponent(), 0.0)
    }

    pub fn components(&self) -> [f64; 4] {
        [self.v, self.v1, self.v2, self.v3]
    }

    pub fn from_components(t: f64, y: &[f64]) -> Self {
        Self::new(t, y[0], y[1], y[2], y[3])
    }
}

/// v^e for v above the floor, computed as exp(e·ln v).
pub fn guarded_pow(v: f64, e: f64, t: f64) -> Result<f64> {
    if !(v >= V_FLOOR) {
        return Err(Error::NonPositiveV { t, v });
    }
    Ok((e * v.ln()).exp())
}

/// r·v^p − c0·v, written as c0·v·((v/v_cyl)^{p−1} − 1) so that it vanishes
/// exactly at the cylinder value (r·v_cyl^{p−1} = c0).
pub fn potential_force(params: &DimensionParams, v: f64, t: f64) -> Result<f64> {
    if !(v >= V_FLOOR) {
        return Err(Error::NonPositiveV { t, v });
    }
    let ratio = guarded_pow(v / params.v_cyl, params.p - 1.0, t)?;
    Ok(params.c0 * v * (ratio - 1.0))
}

/// Right-hand side of the system: (v1, v2, v3, c2·v2 − c0·v + r·v^p).
pub fn vector_field(params: &DimensionParams, s: &CylinderState) -> Result<[f64; 4]> {
    let force = potential_force(params, s.v, s.t)?;
    Ok([s.v1, s.v2, s.v3, params.c2 * s.v2 + force])
}

/// Conserved energy
/// `−v1·v3 + v2²/2 + (c2/2)·v1² − (c0/2)·v² + (r/p♯)·v^{p♯}`.
pub fn hamiltonian(params: &DimensionParams, s: &CylinderState) -> Result<f64> {
    let vps = guarded_pow(s.v, params.p_sharp, s.t)?;
    Ok(
        -s.v1 * s.v3 + 0.5 * s.v2 * s.v2 + 0.5 * params.c2 * s.v1 * s.v1 - 0.5 * params.c0 * s.v * s.v
            + params.potential_coeff() * vps,
    )
}

/// Gradient of [`hamiltonian`] with respect to (v, v1, v2, v3).
pub fn hamiltonian_gradient(params: &DimensionParams, s: &CylinderState) -> Result<[f64; 4]> {
    Ok([
        potential_force(params, s.v, s.t)?,
        -s.v3 + params.c2 * s.v1,
        s.v2,
        -s.v1,
    ])
}

/// Exact derivative of the energy along the vector field, with the scale of
/// the largest cancelling term (for relative comparisons).
pub fn energy_rate(params: &DimensionParams, s: &CylinderState) -> Result<(f64, f64)> {
    let grad = hamiltonian_gradient(params, s)?;
    let field = vector_field(params, s)?;
    let terms: Vec<f64> = grad.iter().zip(field.iter()).map(|(g, f)| g * f).collect();
    let scale = terms.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok((terms.iter().sum(), scale))
}

/// A function supplying v and its first four derivatives.
pub trait Profile {
    fn derivatives(&self, t: f64) -> [f64; 5];
}

/// The constant cylindrical solution.
#[derive(Debug, Clone, Copy)]
pub struct CylinderProfile {
    pub value: f64,
}

impl Profile for CylinderProfile {
    fn derivatives(&self, _t: f64) -> [f64; 5] {
        [self.value, 0.0, 0.0, 0.0, 0.0]
    }
}

/// cosh(t)^{−m} with exact derivatives.
///
/// Writing d^k/dt^k cosh^{−m} = cosh^{−m}·P_k(tanh t) gives
/// P_{k+1}(s) = −m·s·P_k(s) + (1 − s²)·P_k'(s), P_0 = 1.
#[derive(Debug, Clone)]
pub struct SphericalProfile {
    exponent: f64,
    polys: Vec<Vec<f64>>,
}

impl SphericalProfile {
    pub fn new(params: &DimensionParams) -> Self {
        Self::with_exponent(params.sph_exponent())
    }

    pub fn with_exponent(m: f64) -> Self {
        let mut polys = vec![vec![1.0]];
        for _ in 0..4 {
            let prev = polys.last().unwrap();
            let mut next = vec![0.0; prev.len() + 2];
            for (i, &c) in prev.iter().enumerate() {
                next[i + 1] -= m * c;
                if i >= 1 {
                    next[i - 1] += i as f64 * c;
                    next[i + 1] -= i as f64 * c;
                }
            }
            polys.push(next);
        }
        Self { exponent: m, polys }
    }
}

impl Profile for SphericalProfile {
    fn derivatives(&self, t: f64) -> [f64; 5] {
        let base = (-self.exponent * t.cosh().ln()).exp();
        let s = t.tanh();
        let mut out = [0.0; 5];
        for (k, poly) in self.polys.iter().enumerate() {
            let val = poly.iter().rev().fold(0.0, |acc, c| acc * s + c);
            out[k] = base * val;
        }
        out
    }
}

/// λ·(inner profile).
#[derive(Debug, Clone)]
pub struct ScaledProfile<P> {
    pub factor: f64,
    pub inner: P,
}

impl<P: Profile> Profile for ScaledProfile<P> {
    fn derivatives(&self, t: f64) -> [f64; 5] {
        self.inner.derivatives(t).map(|x| self.factor * x)
    }
}

/// Pointwise residual v'''' − c2·v'' + c0·v − r·v^p of a profile at time t.
pub fn pointwise_residual(params: &DimensionParams, d: &[f64; 5], t: f64) -> Result<f64> {
    let vp = guarded_pow(d[0], params.p, t)?;
    Ok(d[4] - params.c2 * d[2] + params.c0 * d[0] - params.r * vp)
}

/// Max over `ts` of the absolute ODE residual of `profile`.
pub fn ode_residual<P: Profile + ?Sized>(params: &DimensionParams, profile: &P, ts: &[f64]) -> Result<f64> {
    ts.iter().try_fold(0.0f64, |worst, &t| {
        let d = profile.derivatives(t);
        Ok(worst.max(pointwise_residual(params, &d, t)?.abs()))
    })
}

/// Zeroth-order coefficient c0 − p·r·v0^{p−1} of the linearization about v0.
pub fn linearized_coefficient(params: &DimensionParams, v0: f64) -> Result<f64> {
    if !(v0 > 0.0) {
        return Err(Error::NonPositiveV { t: 0.0, v: v0 });
    }
    let vp1 = if v0 < V_FLOOR {
        0.0
    } else {
        guarded_pow(v0, params.p - 1.0, 0.0)?
    };
    Ok(params.c0 - params.p * params.r * vp1)
}

/// Action ξ⁴ + c2·ξ² + (c0 − k_lin) of the cylinder linearization on cos(ξt).
pub fn symbol_cyl(params: &DimensionParams, xi: f64) -> f64 {
    let x2 = xi * xi;
    x2 * x2 + params.c2 * x2 + (params.c0 - params.k_lin)
}

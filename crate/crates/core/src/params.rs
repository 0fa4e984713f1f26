//! Dimension-dependent constants of the radial constant Q-curvature equation
//!
//! ```text
//! v'''' − c2·v'' + c0·v = r·v^p,   p = (n+4)/(n−4)
//! ```
//!
//! together with the cylinder and sphere reference values.

use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gamma::{gamma, unit_sphere_measure};
use crate::quadrature::integrate_adaptive;

/// Every n-dependent constant used by the ODE, the energies, the cylinder
/// period and the round-sphere invariant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DimensionParams {
    pub n: u32,
    pub c2: f64,
    pub c0: f64,
    pub r: f64,
    pub p: f64,
    pub p_sharp: f64,
    pub q_bar: f64,
    pub v_cyl: f64,
    pub k_lin: f64,
    pub h_cyl: f64,
    pub mu: f64,
    pub t_cyl: f64,
    pub area_s: f64,
    pub vol_s: f64,
    pub y_sph: f64,
}

impl DimensionParams {
    pub fn new(n: u32) -> Result<Self> {
        if n < 5 {
            return Err(Error::InvalidParameter(format!("dimension n = {n} must be >= 5")));
        }
        let nf = n as f64;
        let m = nf - 4.0;
        let c2 = (nf * m + 8.0) / 2.0;
        let c0 = nf * nf * m * m / 16.0;
        let r = nf * m * (nf * nf - 4.0) / 16.0;
        let p = (nf + 4.0) / m;
        let p_sharp = 2.0 * nf / m;
        let q_bar = nf * (nf * nf - 4.0) / 8.0;
        let base = nf * m / (nf * nf - 4.0);
        let v_cyl = base.powf(m / 8.0);
        let k_lin = p * r * v_cyl.powf(p - 1.0);
        let h_cyl = -(nf * m * m / 8.0) * base.powf(m / 4.0);

        // μ² is the positive root of x² + c2·x + (c0 − k_lin) = 0. The
        // rationalized form avoids cancellation against c2.
        let constant = c0 - k_lin;
        let disc = (c2 * c2 - 4.0 * constant).sqrt();
        let mu_sq = -2.0 * constant / (c2 + disc);
        let mu = mu_sq.sqrt();
        let t_cyl = 2.0 * PI / mu;

        let area_s = unit_sphere_measure(n - 1);
        let vol_s = unit_sphere_measure(n);
        let y_sph = q_bar * vol_s.powf(4.0 / nf);

        Ok(Self {
            n,
            c2,
            c0,
            r,
            p,
            p_sharp,
            q_bar,
            v_cyl,
            k_lin,
            h_cyl,
            mu,
            t_cyl,
            area_s,
            vol_s,
            y_sph,
        })
    }

    /// Coefficient of v^{p♯} in the conserved energy, (n−4)²(n²−4)/32.
    pub fn potential_coeff(&self) -> f64 {
        self.r / self.p_sharp
    }

    /// Decay exponent (n−4)/2 of the spherical profile.
    pub fn sph_exponent(&self) -> f64 {
        (self.n as f64 - 4.0) / 2.0
    }

    /// μ⁴ + c2·μ² + (c0 − k_lin); zero up to rounding.
    pub fn quartic_residual(&self) -> f64 {
        let m2 = self.mu * self.mu;
        m2 * m2 + self.c2 * m2 + (self.c0 - self.k_lin)
    }

    /// The cylinder frequency with the constant under the outer root taken
    /// as `−n(n−4) + sign·8`. `sign = −1` is what linearizing the ODE gives;
    /// `sign = +1` is the competing variant. Returns NaN when the
    /// radicand is negative.
    pub fn mu_variant(&self, sign: f64) -> f64 {
        let nf = self.n as f64;
        let inner = (nf.powi(4) - 64.0 * nf + 64.0).sqrt();
        0.5 * (inner - nf * (nf - 4.0) + sign * 8.0).sqrt()
    }
}

/// Shorthand for [`DimensionParams::new`].
pub fn make_params(n: u32) -> Result<DimensionParams> {
    DimensionParams::new(n)
}

/// The spherical solution cosh(t)^{−(n−4)/2}.
pub fn v_sph_profile(params: &DimensionParams, t: f64) -> f64 {
    (-params.sph_exponent() * t.cosh().ln()).exp()
}

/// Closed form √π·Γ(n/2)/Γ((n+1)/2) of ∫ℝ cosh(t)^{−n} dt.
pub fn cosh_power_integral(n: u32) -> f64 {
    let nf = n as f64;
    PI.sqrt() * gamma(nf / 2.0) / gamma((nf + 1.0) / 2.0)
}

/// Outcome of [`sphere_closure_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SphereClosure {
    pub integral: f64,
    pub closed_form: f64,
    pub truncation: f64,
    pub volume_rel_err: f64,
    pub closed_form_rel_err: f64,
}

impl SphereClosure {
    pub fn worst(&self) -> f64 {
        self.volume_rel_err.max(self.closed_form_rel_err)
    }
}

/// Compute ∫ℝ cosh^{−n} by adaptive quadrature and compare area_s times it
/// against vol_s and against the Gamma closed form.
pub fn sphere_closure(params: &DimensionParams, quad_tol: f64) -> Result<SphereClosure> {
    if !(quad_tol > 0.0) {
        return Err(Error::InvalidParameter(format!("quad_tol = {quad_tol} must be > 0")));
    }
    let nf = params.n as f64;
    // Both tails together are below 2^{n+1} e^{−nL} / n.
    let tail_budget = 1e-3 * quad_tol;
    let truncation = ((2f64.powf(nf + 1.0) / (nf * tail_budget)).ln() / nf).max(1.0);
    let half = integrate_adaptive(|t| (-nf * t.cosh().ln()).exp(), 0.0, truncation, 0.25 * quad_tol)?;
    let integral = 2.0 * half;
    let closed_form = cosh_power_integral(params.n);
    let volume_rel_err = (params.area_s * integral - params.vol_s).abs() / params.vol_s;
    let closed_form_rel_err = (integral - closed_form).abs() / closed_form;
    Ok(SphereClosure {
        integral,
        closed_form,
        truncation,
        volume_rel_err,
        closed_form_rel_err,
    })
}

/// Worst relative error of the sphere-volume identity; see [`sphere_closure`].
pub fn sphere_closure_check(params: &DimensionParams, quad_tol: f64) -> Result<f64> {
    sphere_closure(params, quad_tol).map(|c| c.worst())
}

//! The a → 1 limit: Y(a_k) for a_k = 1 − 10^{−k} against the sphere value.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::invariant_value;
use crate::params::{v_sph_profile, DimensionParams};
use crate::solver::{shoot, DelaunayOrbit};

pub const MAX_K: u32 = 4;
const STUDY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub k: u32,
    pub a: f64,
    pub t_a: Option<f64>,
    pub i_a: Option<f64>,
    pub y: Option<f64>,
    pub y_over_ysph: Option<f64>,
    pub defect: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub n: u32,
    pub y_sph: f64,
    pub rows: Vec<ConvergenceRow>,
    /// Y/y_sph strictly increasing over the successful rows.
    pub increasing: bool,
    pub below_one: bool,
    pub final_ratio: Option<f64>,
}

impl ConvergenceReport {
    pub fn verdict(&self) -> bool {
        self.increasing && self.below_one && self.rows.iter().all(|r| r.error.is_none())
    }
}

pub fn study_parameter(k: u32) -> f64 {
    1.0 - 10f64.powi(-(k as i32))
}

pub fn convergence_study(params: &DimensionParams, k_max: u32) -> Result<ConvergenceReport> {
    if k_max == 0 || k_max > MAX_K {
        return Err(Error::InvalidParameter(format!(
            "k_max = {k_max} must lie in 1..={MAX_K}"
        )));
    }
    let rows: Vec<ConvergenceRow> = (1..=k_max)
        .into_par_iter()
        .map(|k| {
            let a = study_parameter(k);
            match shoot(params, a, STUDY_TOL) {
                Ok(o) => {
                    let y = invariant_value(params, &o);
                    ConvergenceRow {
                        k,
                        a,
                        t_a: Some(o.t_a),
                        i_a: Some(o.i_a),
                        y: Some(y),
                        y_over_ysph: Some(y / params.y_sph),
                        defect: Some(o.defect),
                        error: None,
                    }
                }
                Err(e) => ConvergenceRow {
                    k,
                    a,
                    t_a: None,
                    i_a: None,
                    y: None,
                    y_over_ysph: None,
                    defect: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.y_over_ysph).collect();
    Ok(ConvergenceReport {
        n: params.n,
        y_sph: params.y_sph,
        increasing: ratios.windows(2).all(|w| w[1] > w[0]),
        below_one: ratios.iter().all(|&r| r < 1.0),
        final_ratio: rows.last().and_then(|r| r.y_over_ysph),
        rows,
    })
}

/// max |v_a(t) − v_sph(t)| over [−half_width, half_width].
pub fn sphere_distance(params: &DimensionParams, orbit: &DelaunayOrbit, half_width: f64) -> f64 {
    let m = 400;
    (0..=m)
        .map(|j| {
            let t = -half_width + 2.0 * half_width * j as f64 / m as f64;
            (orbit.state_at(t).v - v_sph_profile(params, t)).abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::make_params;

    #[test]
    fn ratios_climb_toward_one() {
        let p = make_params(5).unwrap();
        let r = convergence_study(&p, 3).unwrap();
        let ratios: Vec<f64> = r.rows.iter().map(|x| x.y_over_ysph.unwrap()).collect();
        // independent prototype values
        for (got, want) in ratios.iter().zip([0.78337, 0.96272, 0.99613]) {
            assert!((got - want).abs() < 2e-5, "{got} vs {want}");
        }
        assert!(r.verdict());
        assert!(r.final_ratio.unwrap() > 0.98);
    }

    #[test]
    fn n6_qualitative() {
        let p = make_params(6).unwrap();
        let r = convergence_study(&p, 2).unwrap();
        assert!(r.verdict());
    }

    #[test]
    fn bad_k() {
        let p = make_params(5).unwrap();
        assert!(convergence_study(&p, 0).is_err());
        assert!(convergence_study(&p, 5).is_err());
    }

    #[test]
    fn uniform_convergence_on_compacts() {
        let p = make_params(5).unwrap();
        let d: Vec<f64> = (2..=4)
            .map(|k| sphere_distance(&p, &shoot(&p, study_parameter(k), 1e-9).unwrap(), 2.0))
            .collect();
        assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
    }
}

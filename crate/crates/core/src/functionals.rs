//! The conformal Q-energy restricted to radial periodic conformal factors.
//!
//! For u(t) on the circle of length T (times the round S^{n−1}),
//!
//!   E(u) = area_s ∫ (ü² + c2·u̇² + c0·u²) dt,
//!   ‖u‖ = (area_s ∫ u^{p♯} dt)^{1/p♯},
//!   Q(u) = 2/(n−4) · E(u) / ‖u‖².
//!
//! On a solution of the radial equation E(v) = r·Vol, which gives the closed
//! form Q(v) = q̄·Vol^{4/n}.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dynamics::V_FLOOR;
use crate::error::{Error, Result};
use crate::params::DimensionParams;
use crate::quadrature::periodic_trapezoid_checked;
use crate::solver::DelaunayOrbit;
use crate::spectral;

/// Relative agreement required between the trapezoid rule on all samples
/// and on every other sample.
pub const QUAD_CHECK_TOL: f64 = 1e-9;

/// Periodic samples of (u, u̇, ü) on a uniform grid over [0, period).
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub period: f64,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub ddu: Vec<f64>,
}

impl RadialProfile {
    /// Derivatives by trigonometric interpolation.
    pub fn from_samples(period: f64, u: Vec<f64>) -> Result<Self> {
        if !(period > 0.0) || u.len() < 8 || !u.len().is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "profile needs period > 0 and an even number >= 8 of samples (period {period}, {} samples)",
                u.len()
            )));
        }
        let du = spectral::derivative(&u, period, 1);
        let ddu = spectral::derivative(&u, period, 2);
        Ok(Self { period, u, du, ddu })
    }

    pub fn from_orbit(orbit: &DelaunayOrbit) -> Self {
        Self {
            period: orbit.t_a,
            u: orbit.samples.iter().map(|s| s.v).collect(),
            du: orbit.samples.iter().map(|s| s.v1).collect(),
            ddu: orbit.samples.iter().map(|s| s.v2).collect(),
        }
    }

    pub fn constant(period: f64, value: f64, samples: usize) -> Self {
        Self {
            period,
            u: vec![value; samples],
            du: vec![0.0; samples],
            ddu: vec![0.0; samples],
        }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        let n = self.len();
        (0..n).map(|j| self.period * j as f64 / n as f64).collect()
    }

    pub fn is_positive(&self) -> bool {
        self.u.iter().all(|&x| x >= V_FLOOR)
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        let s = |v: &Vec<f64>| v.iter().map(|x| lambda * x).collect();
        Self {
            period: self.period,
            u: s(&self.u),
            du: s(&self.du),
            ddu: s(&self.ddu),
        }
    }

    /// self + eps·other on the same grid.
    pub fn add_scaled(&self, other: &Self, eps: f64) -> Result<Self> {
        if other.len() != self.len() || other.period != self.period {
            return Err(Error::InvalidParameter("profiles live on different grids".into()));
        }
        let c = |a: &Vec<f64>, b: &Vec<f64>| a.iter().zip(b).map(|(x, y)| x + eps * y).collect();
        Ok(Self {
            period: self.period,
            u: c(&self.u, &other.u),
            du: c(&self.du, &other.du),
            ddu: c(&self.ddu, &other.ddu),
        })
    }

    fn check_positive(&self) -> Result<()> {
        match self.u.iter().enumerate().find(|(_, &x)| !(x >= V_FLOOR)) {
            Some((j, &v)) => Err(Error::NonPositiveV {
                t: self.period * j as f64 / self.len() as f64,
                v,
            }),
            None => Ok(()),
        }
    }
}

/// E(u) and the volume area_s·∫u^{p♯}.
pub fn q_energy_parts(params: &DimensionParams, u: &RadialProfile) -> Result<(f64, f64)> {
    u.check_positive()?;
    let dens: Vec<f64> = (0..u.len())
        .map(|j| u.ddu[j] * u.ddu[j] + params.c2 * u.du[j] * u.du[j] + params.c0 * u.u[j] * u.u[j])
        .collect();
    let vol: Vec<f64> = u.u.iter().map(|x| x.powf(params.p_sharp)).collect();
    let e = params.area_s * periodic_trapezoid_checked(&dens, u.period, QUAD_CHECK_TOL)?;
    let v = params.area_s * periodic_trapezoid_checked(&vol, u.period, QUAD_CHECK_TOL)?;
    Ok((e, v))
}

pub fn q_energy_radial(params: &DimensionParams, u: &RadialProfile) -> Result<f64> {
    let (e, vol) = q_energy_parts(params, u)?;
    let norm2 = vol.powf(2.0 / params.p_sharp);
    Ok(2.0 / (params.n as f64 - 4.0) * e / norm2)
}

/// L²(dt) representative of the derivative of Q at u:
/// 4/((n−4)‖u‖²)·area_s·(P u − ‖u‖^{−p♯}·E(u)·u^p), P = d⁴ − c2·d² + c0.
pub fn q_gradient_density(params: &DimensionParams, u: &RadialProfile) -> Result<Vec<f64>> {
    let (e, vol) = q_energy_parts(params, u)?;
    let norm2 = vol.powf(2.0 / params.p_sharp);
    let pu = spectral::apply_symbol(&u.u, u.period, |x| x.powi(4) + params.c2 * x * x + params.c0);
    let scale = 4.0 / ((params.n as f64 - 4.0) * norm2) * params.area_s;
    Ok(pu
        .iter()
        .zip(&u.u)
        .map(|(p, x)| scale * (p - e / vol * x.powf(params.p)))
        .collect())
}

/// Directional derivative of Q at u along the periodic samples `w`.
pub fn q_gradient_radial(params: &DimensionParams, u: &RadialProfile, w: &[f64]) -> Result<f64> {
    if w.len() != u.len() {
        return Err(Error::InvalidParameter(format!(
            "perturbation has {} samples, profile has {}",
            w.len(),
            u.len()
        )));
    }
    let g = q_gradient_density(params, u)?;
    let prod: Vec<f64> = g.iter().zip(w).map(|(a, b)| a * b).collect();
    Ok(prod.iter().sum::<f64>() * u.period / u.len() as f64)
}

/// Y(a) = q̄·(area_s·I_a)^{4/n}.
pub fn invariant_value(params: &DimensionParams, orbit: &DelaunayOrbit) -> f64 {
    volume_invariant(params, params.area_s * orbit.i_a)
}

/// q̄·Vol^{4/n} for a solution with total volume `vol`.
pub fn volume_invariant(params: &DimensionParams, vol: f64) -> f64 {
    params.q_bar * vol.powf(4.0 / params.n as f64)
}

/// The constant solution on a circle of length `period`.
pub fn cylinder_invariant(params: &DimensionParams, period: f64) -> f64 {
    volume_invariant(params, params.area_s * period * params.v_cyl.powf(params.p_sharp))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricCount {
    pub k: usize,
    /// Periods T/l of the Delaunay solutions realizing the other metrics.
    pub delaunay_periods: Vec<f64>,
}

/// Constant-Q metrics on the circle of length T: the cylinder plus one
/// Delaunay solution of period T/l for every l with T/l > t_cyl. A ratio
/// within 1e−9 of an integer counts as that integer.
pub fn count_constant_q_metrics(params: &DimensionParams, period: f64) -> Result<MetricCount> {
    if !(period > 0.0) || !period.is_finite() {
        return Err(Error::InvalidParameter(format!("circumference {period} must be > 0")));
    }
    let ratio = period / params.t_cyl;
    let snapped = if (ratio - ratio.round()).abs() <= 1e-9 {
        ratio.round()
    } else {
        ratio
    };
    if snapped <= 1.0 {
        return Ok(MetricCount {
            k: 1,
            delaunay_periods: Vec::new(),
        });
    }
    let k = snapped.ceil() as usize;
    Ok(MetricCount {
        k,
        delaunay_periods: (1..k).map(|l| period / l as f64).collect(),
    })
}

/// Random real trigonometric polynomial with modes 1..=max_mode, amplitude
/// of mode m drawn from ±amp/m.
pub fn band_limited<R: Rng>(rng: &mut R, period: f64, samples: usize, max_mode: usize, amp: f64) -> Vec<f64> {
    let coeffs: Vec<(f64, f64)> = (1..=max_mode)
        .map(|m| {
            let s = amp / m as f64;
            (rng.gen_range(-s..s), rng.gen_range(-s..s))
        })
        .collect();
    (0..samples)
        .map(|j| {
            let t = period * j as f64 / samples as f64;
            coeffs
                .iter()
                .enumerate()
                .map(|(i, (a, b))| {
                    let x = 2.0 * PI * (i + 1) as f64 * t / period;
                    a * x.cos() + b * x.sin()
                })
                .sum::<f64>()
        })
        .collect()
}

/// Positive random profile base + band-limited wiggle, reproducible by seed.
pub fn random_profile(seed: u64, period: f64, samples: usize, base: f64) -> Result<RadialProfile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let wiggle = band_limited(&mut rng, period, samples, 8, 0.1 * base);
    RadialProfile::from_samples(period, wiggle.iter().map(|w| base + w).collect())
}

/// Seeded band-limited perturbations with |m| ≤ 8, normalized to max |w| = 1.
pub fn random_perturbations(seed: u64, period: f64, samples: usize, count: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut w = band_limited(&mut rng, period, samples, 8, 1.0);
            let c: f64 = rng.gen_range(-1.0..1.0);
            w.iter_mut().for_each(|x| *x += c);
            let m = w.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            w.iter().map(|x| x / m).collect()
        })
        .collect()
}

/// Central finite difference of Q along w with step eps.
pub fn q_finite_difference(params: &DimensionParams, u: &RadialProfile, w: &[f64], eps: f64) -> Result<f64> {
    let wp = RadialProfile::from_samples(u.period, w.to_vec())?;
    let plus = q_energy_radial(params, &u.add_scaled(&wp, eps)?)?;
    let minus = q_energy_radial(params, &u.add_scaled(&wp, -eps)?)?;
    Ok((plus - minus) / (2.0 * eps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::make_params;
    use crate::solver::shoot;

    #[test]
    fn constant_profile_closed_form() {
        let p = make_params(5).unwrap();
        let t = 2.0 * p.t_cyl;
        let u = RadialProfile::constant(t, p.v_cyl, 64);
        let q = q_energy_radial(&p, &u).unwrap();
        let vol = p.area_s * t * p.v_cyl.powf(p.p_sharp);
        let direct = 2.0 * p.area_s * t * p.c0 * p.v_cyl * p.v_cyl / vol.powf(2.0 / p.p_sharp);
        assert!((q / direct - 1.0).abs() < 1e-13);
        assert!((q / cylinder_invariant(&p, t) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_path_identity_on_an_orbit() {
        let p = make_params(5).unwrap();
        let o = shoot(&p, 0.9, 1e-9).unwrap();
        let q = q_energy_radial(&p, &RadialProfile::from_orbit(&o)).unwrap();
        let y = invariant_value(&p, &o);
        assert!((q / y - 1.0).abs() < 1e-6, "{q} vs {y}");
        assert!(y < p.y_sph);
    }

    #[test]
    fn homogeneous_of_degree_zero() {
        let p = make_params(6).unwrap();
        let u = random_profile(7, 9.0, 256, 0.8).unwrap();
        let q = q_energy_radial(&p, &u).unwrap();
        for l in [0.5, 2.0, 10.0] {
            let ql = q_energy_radial(&p, &u.scaled(l)).unwrap();
            assert!((ql / q - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let p = make_params(5).unwrap();
        let t = 3.0 * p.t_cyl;
        let m = 512;
        let u: Vec<f64> = (0..m)
            .map(|j| p.v_cyl * (1.0 + 0.05 * (2.0 * PI * j as f64 / m as f64).cos()))
            .collect();
        let u = RadialProfile::from_samples(t, u).unwrap();
        let w: Vec<f64> = (0..m).map(|j| (2.0 * PI * j as f64 / m as f64).cos()).collect();
        let g = q_gradient_radial(&p, &u, &w).unwrap();
        let fd = q_finite_difference(&p, &u, &w, 1e-4).unwrap();
        assert!((g - fd).abs() <= 1e-5 * g.abs(), "{g} vs {fd}");
    }

    #[test]
    fn critical_points() {
        let p = make_params(5).unwrap();
        let c = RadialProfile::constant(4.0, p.v_cyl, 64);
        assert!(q_gradient_radial(&p, &c, &[1.0; 64]).unwrap().abs() < 1e-12);
        let o = shoot(&p, 0.9, 1e-9).unwrap();
        let u = RadialProfile::from_orbit(&o);
        for w in random_perturbations(3, o.t_a, u.len(), 5) {
            assert!(q_gradient_radial(&p, &u, &w).unwrap().abs() < 1e-5);
        }
    }

    #[test]
    fn metric_counts() {
        let p = make_params(5).unwrap();
        let k = |r: f64| count_constant_q_metrics(&p, r * p.t_cyl).unwrap().k;
        assert_eq!([k(0.5), k(1.0), k(1.5), k(2.5), k(3.0)], [1, 1, 2, 3, 3]);
        let c = count_constant_q_metrics(&p, 2.5 * p.t_cyl).unwrap();
        assert!(c.delaunay_periods.iter().all(|&x| x > p.t_cyl));
        assert_eq!(c.delaunay_periods.len(), 2);
        assert!(count_constant_q_metrics(&p, 0.0).is_err());
    }

    #[test]
    fn non_positive_profile_is_rejected() {
        let p = make_params(5).unwrap();
        let u = RadialProfile::constant(1.0, -0.1, 16);
        assert!(matches!(q_energy_radial(&p, &u), Err(Error::NonPositiveV { .. })));
    }
}

//! High-order Taylor series propagation of the radial equation.
//!
//! The nonlinearity is a pure power, so the Taylor coefficients of v^p and
//! v^{p♯} follow from the recurrence `k·v0·w_k = Σ ((α+1)i − k)·v_i·w_{k−i}`
//! and the equation itself gives v_{k+4}. Each step is a polynomial that
//! doubles as exact dense output, and the per-step truncation error sits at
//! the roundoff level. Used where the shooting map is ill-conditioned.

use crate::dynamics::{guarded_pow, hamiltonian, potential_force, CylinderState, V_FLOOR};
use crate::error::{Error, Result};
use crate::params::DimensionParams;

/// Series order used by default.
pub const ORDER: usize = 30;

/// One step: local Taylor coefficients of v and of the volume z.
#[derive(Debug, Clone)]
pub struct Segment {
    pub t0: f64,
    pub h: f64,
    v: Vec<f64>,
    z: Vec<f64>,
}

impl Segment {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// (v, v', v'', v''', z) at local offset tau.
    pub fn eval_local(&self, tau: f64) -> [f64; 5] {
        let mut out = [0.0; 5];
        out[0] = horner_shift(&self.v, tau, 0);
        out[1] = horner_shift(&self.v, tau, 1);
        out[2] = horner_shift(&self.v, tau, 2);
        out[3] = horner_shift(&self.v, tau, 3);
        out[4] = self.z.iter().rev().fold(0.0, |acc, &c| acc * tau + c);
        out
    }

    pub fn eval(&self, t: f64) -> [f64; 5] {
        self.eval_local(t - self.t0)
    }

    pub fn state(&self, t: f64) -> CylinderState {
        let y = self.eval(t);
        CylinderState::new(t, y[0], y[1], y[2], y[3])
    }
}

/// d-th derivative of Σ c_k τ^k.
fn horner_shift(c: &[f64], tau: f64, d: usize) -> f64 {
    let mut acc = 0.0;
    for k in (d..c.len()).rev() {
        let mut f = 1.0;
        for j in 0..d {
            f *= (k - j) as f64;
        }
        acc = acc * tau + f * c[k];
    }
    acc
}

/// Taylor coefficients of v and z about a state.
pub fn expand(params: &DimensionParams, y: &[f64; 5], order: usize, t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut v = vec![0.0; order + 1];
    v[0] = y[0];
    v[1] = y[1];
    v[2] = y[2] / 2.0;
    v[3] = y[3] / 6.0;
    let v0 = y[0];
    let mut w = vec![0.0; order + 1];
    let mut u = vec![0.0; order + 1];
    w[0] = guarded_pow(v0, params.p, t)?;
    u[0] = guarded_pow(v0, params.p_sharp, t)?;
    let (ap, aq) = (params.p + 1.0, params.p_sharp + 1.0);
    for k in 0..=order {
        if k >= 1 {
            let (mut sw, mut su) = (0.0, 0.0);
            for i in 1..=k {
                let f = i as f64;
                sw += (ap * f - k as f64) * v[i] * w[k - i];
                su += (aq * f - k as f64) * v[i] * u[k - i];
            }
            w[k] = sw / (k as f64 * v0);
            u[k] = su / (k as f64 * v0);
        }
        if k + 4 <= order {
            let kf = k as f64;
            // the zeroth term uses the force form that vanishes exactly at v_cyl
            let force = if k == 0 {
                potential_force(params, v0, t)?
            } else {
                params.r * w[k] - params.c0 * v[k]
            };
            let rhs = params.c2 * (kf + 2.0) * (kf + 1.0) * v[k + 2] + force;
            v[k + 4] = rhs / ((kf + 1.0) * (kf + 2.0) * (kf + 3.0) * (kf + 4.0));
        }
    }
    let mut z = vec![0.0; order + 1];
    z[0] = y[4];
    for k in 0..order {
        z[k + 1] = u[k] / (k + 1) as f64;
    }
    Ok((v, z))
}

/// Step length keeping the last two terms (with derivative weights) below
/// `tol` relative to the state size.
fn step_size(v: &[f64], tol: f64) -> f64 {
    let n = v.len() - 1;
    let scale = v[..4].iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let mut h = f64::INFINITY;
    for k in [n - 1, n] {
        let c = v[k].abs() * (k * k * k) as f64;
        if c > 0.0 {
            h = h.min((tol * scale / c).powf(1.0 / (k - 3) as f64));
        }
    }
    h.min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stop {
    End,
    Turn,
    Floor,
    Ceiling,
}

#[derive(Debug, Clone)]
pub struct Path {
    pub segments: Vec<Segment>,
    pub stop: Stop,
    pub h0: f64,
    pub max_drift: f64,
}

impl Path {
    pub fn t_start(&self) -> f64 {
        self.segments.first().map_or(0.0, |s| s.t0)
    }

    pub fn t_final(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.t1())
    }

    pub fn last(&self) -> CylinderState {
        self.state_at(self.t_final())
    }

    pub fn last_volume(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.eval_local(s.h)[4])
    }

    fn segment(&self, t: f64) -> &Segment {
        let idx = self.segments.partition_point(|s| s.t1() < t);
        &self.segments[idx.min(self.segments.len() - 1)]
    }

    pub fn state_at(&self, t: f64) -> CylinderState {
        self.segment(t).state(t)
    }

    pub fn volume_at(&self, t: f64) -> f64 {
        self.segment(t).eval(t)[4]
    }

    pub fn steps(&self) -> usize {
        self.segments.len()
    }
}

/// What ends a forward propagation besides t_end.
#[derive(Debug, Clone, Copy, Default)]
pub struct Stops {
    /// Stop at v' = 0 crossing upward, once v' < −arm has been seen.
    pub turning_arm: Option<f64>,
    pub floor: Option<f64>,
    pub ceiling: Option<f64>,
}

/// Root of a polynomial quantity on [0, h] with f(0) and f(h) of opposite
/// signs: bisection then Newton-free secant to full precision.
fn locate(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, h);
    let f_lo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (f_lo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if f(hi).abs() < f(lo).abs() {
        hi
    } else {
        lo
    }
}

/// Propagate forward from `s0` (with volume z = 0) to `t_end` or the first stop.
pub fn propagate(params: &DimensionParams, s0: &CylinderState, t_end: f64, tol: f64, stops: Stops) -> Result<Path> {
    if !(tol > 0.0) || !(t_end > s0.t) {
        return Err(Error::InvalidParameter(format!(
            "propagate needs tol > 0 and t_end > t0 (tol = {tol}, t_end = {t_end})"
        )));
    }
    let h0 = hamiltonian(params, s0)?;
    let mut path = Path {
        segments: Vec::new(),
        stop: Stop::End,
        h0,
        max_drift: 0.0,
    };
    let mut t = s0.t;
    let mut y = [s0.v, s0.v1, s0.v2, s0.v3, 0.0];
    let mut armed = stops.turning_arm.is_some_and(|arm| y[1] < -arm);
    for _ in 0..10_000_000usize {
        let (v, z) = expand(params, &y, ORDER, t)?;
        let mut h = step_size(&v, tol);
        let mut last = false;
        if t + h >= t_end {
            h = t_end - t;
            last = true;
        }
        let mut seg = Segment { t0: t, h, v, z };
        let end = seg.eval_local(h);
        // earliest stop inside this step
        let mut hit: Option<(f64, Stop)> = None;
        let consider = |tau: f64, kind: Stop, hit: &mut Option<(f64, Stop)>| {
            if hit.is_none_or(|(t0, _)| tau < t0) {
                *hit = Some((tau, kind));
            }
        };
        if let Some(fl) = stops.floor {
            if end[0] <= fl {
                let tau = locate(|s| seg.eval_local(s)[0] - fl, h);
                consider(tau, Stop::Floor, &mut hit);
            }
        }
        if let Some(ce) = stops.ceiling {
            if end[0] >= ce {
                let tau = locate(|s| seg.eval_local(s)[0] - ce, h);
                consider(tau, Stop::Ceiling, &mut hit);
            }
        }
        if armed && end[1] >= 0.0 && y[1] < 0.0 {
            let tau = locate(|s| horner_shift(&seg.v, s, 1), h);
            consider(tau, Stop::Turn, &mut hit);
        }
        if stops.floor.is_none() && end[0] < V_FLOOR {
            return Err(Error::NonPositiveV { t: t + h, v: end[0] });
        }
        if let Some((tau, kind)) = hit {
            seg.h = tau;
            path.stop = kind;
            let s = seg.state(t + tau);
            path.max_drift = path.max_drift.max((hamiltonian(params, &s)? - h0).abs());
            path.segments.push(seg);
            return Ok(path);
        }
        let s = CylinderState::new(t + h, end[0], end[1], end[2], end[3]);
        path.max_drift = path.max_drift.max((hamiltonian(params, &s)? - h0).abs());
        path.segments.push(seg);
        t = if last { t_end } else { t + h };
        y = end;
        if let Some(arm) = stops.turning_arm {
            armed = armed || y[1] < -arm;
        }
        if last {
            return Ok(path);
        }
    }
    Err(Error::MaxSteps { t, steps: 10_000_000 })
}

/// Taylor coefficients of a solution w of the linearization
/// w⁗ = c2·ẅ + (p·r·v^{p−1} − c0)·w along the series `v`.
pub fn expand_linearized(params: &DimensionParams, v: &[f64], w0: &[f64; 4], t: f64) -> Result<Vec<f64>> {
    let order = v.len() - 1;
    let mut s = vec![0.0; order + 1];
    s[0] = guarded_pow(v[0], params.p - 1.0, t)?;
    let a1 = params.p;
    for k in 1..=order {
        let mut acc = 0.0;
        for i in 1..=k {
            acc += (a1 * i as f64 - k as f64) * v[i] * s[k - i];
        }
        s[k] = acc / (k as f64 * v[0]);
    }
    let mut w = vec![0.0; order + 1];
    w[0] = w0[0];
    w[1] = w0[1];
    w[2] = w0[2] / 2.0;
    w[3] = w0[3] / 6.0;
    let pr = params.p * params.r;
    for k in 0..=order.saturating_sub(4) {
        let conv: f64 = (0..=k).map(|i| s[i] * w[k - i]).sum();
        let kf = k as f64;
        let rhs = params.c2 * (kf + 2.0) * (kf + 1.0) * w[k + 2] - params.c0 * w[k] + pr * conv;
        w[k + 4] = rhs / ((kf + 1.0) * (kf + 2.0) * (kf + 3.0) * (kf + 4.0));
    }
    Ok(w)
}

/// Solution and linearized solution at one time.
#[derive(Debug, Clone, Copy)]
pub struct LinearizedSample {
    pub t: f64,
    pub state: [f64; 4],
    pub w: [f64; 4],
}

/// Propagate v from `s0` and a linearized solution from `w0` over
/// [s0.t, t_end], reporting `per_step` evenly spaced points in every step.
pub fn propagate_linearized(
    params: &DimensionParams,
    s0: &CylinderState,
    w0: [f64; 4],
    t_end: f64,
    tol: f64,
    per_step: usize,
) -> Result<Vec<LinearizedSample>> {
    if !(tol > 0.0) || !(t_end > s0.t) || per_step == 0 {
        return Err(Error::InvalidParameter("bad linearized propagation request".into()));
    }
    let mut out = Vec::new();
    let mut t = s0.t;
    let mut y = [s0.v, s0.v1, s0.v2, s0.v3, 0.0];
    let mut wy = w0;
    let derivs = |c: &[f64], tau: f64| -> [f64; 4] { std::array::from_fn(|d| horner_shift(c, tau, d)) };
    out.push(LinearizedSample {
        t,
        state: [y[0], y[1], y[2], y[3]],
        w: wy,
    });
    while t < t_end {
        let (v, _) = expand(params, &y, ORDER, t)?;
        let w = expand_linearized(params, &v, &wy, t)?;
        let h = step_size(&v, tol).min(step_size(&w, tol)).min(t_end - t);
        for j in 1..=per_step {
            let tau = h * j as f64 / per_step as f64;
            out.push(LinearizedSample {
                t: t + tau,
                state: derivs(&v, tau),
                w: derivs(&w, tau),
            });
        }
        let sv = derivs(&v, h);
        y = [sv[0], sv[1], sv[2], sv[3], 0.0];
        wy = derivs(&w, h);
        t = if t_end - t <= h { t_end } else { t + h };
        if y[0] < V_FLOOR {
            return Err(Error::NonPositiveV { t, v: y[0] });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{make_params, v_sph_profile};

    #[test]
    fn sphere_to_roundoff() {
        for n in [5, 6, 8] {
            let p = make_params(n).unwrap();
            let s0 = CylinderState::sphere_peak(&p);
            let path = propagate(&p, &s0, 3.0, 1e-16, Stops::default()).unwrap();
            let v = path.last().v;
            let exact = v_sph_profile(&p, 3.0);
            // the homoclinic amplifies roundoff like e^{n t / 2}
            let bound = 1e-15 * (1.5 * n as f64).exp();
            assert!((v - exact).abs() < bound, "n={n}: {v} vs {exact}");
            assert!(path.max_drift < 1e-13);
        }
    }

    #[test]
    fn turning_point_of_a_near_cylinder_state() {
        let p = make_params(5).unwrap();
        let d = 1e-6;
        let s0 = CylinderState::new(0.0, p.v_cyl + d, 0.0, -d * p.mu * p.mu, 0.0);
        let stops = Stops {
            turning_arm: Some(1e-12),
            ..Stops::default()
        };
        let path = propagate(&p, &s0, 20.0, 1e-16, stops).unwrap();
        assert_eq!(path.stop, Stop::Turn);
        assert!(path.last().v1.abs() < 1e-15);
        assert!((path.t_final() / (0.5 * p.t_cyl) - 1.0).abs() < 2e-3);
    }

    #[test]
    fn derivative_columns_are_consistent() {
        let p = make_params(5).unwrap();
        let y = [0.9, 0.01, -0.2, 0.03, 0.0];
        let (v, z) = expand(&p, &y, ORDER, 0.0).unwrap();
        let seg = Segment { t0: 0.0, h: 0.1, v, z };
        let e = 1e-5;
        let (a, b) = (seg.eval_local(0.05 - e), seg.eval_local(0.05 + e));
        let m = seg.eval_local(0.05);
        for k in 0..3 {
            assert!(((b[k] - a[k]) / (2.0 * e) - m[k + 1]).abs() < 1e-8);
        }
        assert!(((b[4] - a[4]) / (2.0 * e) - m[0].powf(p.p_sharp)).abs() < 1e-8);
    }
}

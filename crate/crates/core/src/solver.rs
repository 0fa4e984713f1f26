//! Periodic Delaunay solutions by symmetric shooting.
//!
//! From a maximum `(a, 0, b, 0)` the trajectory descends to its first
//! turning point t*. The orbit is periodic and even about both critical
//! points exactly when `v'''(t*) = 0`; the unknown `b = v''(0)` is found by
//! bracketing on the qualitative outcome of the shot (crash to zero, escape
//! above one, or a turn with the sign of `v'''(t*)`) followed by bisection
//! and a bracketed secant on `v'''(t*)`. Shots are propagated with the
//! Taylor series integrator: the map b ↦ state(T_a) amplifies errors by
//! about 1e5 per unit of v'''(t*) near a = 0.99, so step errors must sit at
//! the roundoff level for the periodicity audit to mean anything.

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{hamiltonian, CylinderState};
use crate::error::{Error, Result};
use crate::integrator::{arm_threshold, CRASH_LEVEL};
use crate::params::DimensionParams;
use crate::taylor::{propagate, Path, Stop, Stops};

/// Shots rising above this level are not Delaunay candidates.
pub const V_CEILING: f64 = 1.0 + 1e-3;

/// Per-step truncation target, at the roundoff level.
pub const SERIES_TOL: f64 = 1e-16;

/// Enforced periodicity defect.
pub const DEFECT_TOL: f64 = 1e-6;

/// Largest a at which the periodicity defect is enforced by default.
pub const AUDIT_LIMIT: f64 = 0.99;

/// Smallest admissible distance of a from v_cyl and from 1.
pub const A_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootConfig {
    /// Root tolerance on v'''(t*).
    pub tol: f64,
    /// Largest accepted ‖state(T_a) − state(0)‖∞.
    pub defect_tol: f64,
    /// Dense samples stored per period.
    pub samples: usize,
    /// Coarse scan points over the b range.
    pub scan_points: usize,
}

impl Default for ShootConfig {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            defect_tol: DEFECT_TOL,
            samples: 512,
            scan_points: 64,
        }
    }
}

impl ShootConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    /// Default configuration for a given a. Past `AUDIT_LIMIT` the shot map
    /// amplifies the one-ulp spacing of b beyond 1e−6 at t = T_a, so the
    /// defect is measured and stored but not enforced there.
    pub fn for_a(a: f64, tol: f64) -> Self {
        let defect_tol = if a <= AUDIT_LIMIT { DEFECT_TOL } else { f64::INFINITY };
        Self {
            tol,
            defect_tol,
            ..Self::default()
        }
    }

    /// Truncation tolerance of the series propagation.
    pub fn series_tol(&self) -> f64 {
        SERIES_TOL
    }
}

/// One periodic Delaunay solution.
#[derive(Debug, Clone, Serialize)]
pub struct DelaunayOrbit {
    pub n: u32,
    pub a: f64,
    pub b: f64,
    pub t_a: f64,
    pub eps_a: f64,
    pub h: f64,
    pub i_a: f64,
    pub defect: f64,
    /// |v'''(t*)| at the accepted root.
    pub g_residual: f64,
    /// Energy drift over the half-period and full-period integrations.
    pub max_drift: f64,
    /// Number of crash/turn sign changes seen on the coarse scan.
    pub brackets_seen: usize,
    pub samples: Vec<CylinderState>,
    #[serde(skip)]
    half: Path,
}

impl DelaunayOrbit {
    pub fn t_star(&self) -> f64 {
        0.5 * self.t_a
    }

    /// State at any t, using the evenness about t = 0 and t = T_a/2.
    pub fn state_at(&self, t: f64) -> CylinderState {
        let tau = t.rem_euclid(self.t_a);
        let t_star = self.half.t_final();
        let mut s = if tau <= t_star {
            self.half.state_at(tau)
        } else {
            let mut m = self.half.state_at(self.t_a - tau);
            m.v1 = -m.v1;
            m.v3 = -m.v3;
            m
        };
        s.t = t;
        s
    }

    /// Half-period trajectory from the maximum to the minimum.
    pub fn half_trajectory(&self) -> &Path {
        &self.half
    }

    pub fn sup_v(&self) -> f64 {
        self.samples.iter().map(|s| s.v).fold(f64::MIN, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Outcome {
    Crash,
    Escape,
    Turn { g: f64 },
    Undetermined,
}

impl Outcome {
    /// −1 below the periodic b, +1 above, 0 on the root, None if unknown.
    fn side(self) -> Option<i8> {
        match self {
            Outcome::Crash => Some(-1),
            Outcome::Escape => Some(1),
            Outcome::Turn { g } if g < 0.0 => Some(-1),
            Outcome::Turn { g } if g > 0.0 => Some(1),
            Outcome::Turn { .. } => Some(0),
            Outcome::Undetermined => None,
        }
    }
}

struct Shot {
    b: f64,
    outcome: Outcome,
    traj: Option<Path>,
}

fn shot_horizon(params: &DimensionParams) -> f64 {
    20.0 * params.t_cyl
}

fn fire(params: &DimensionParams, a: f64, b: f64, cfg: &ShootConfig) -> Shot {
    let s0 = CylinderState::new(0.0, a, 0.0, b, 0.0);
    let stops = Stops {
        turning_arm: Some(arm_threshold(params, b)),
        floor: Some(CRASH_LEVEL),
        ceiling: Some(V_CEILING),
    };
    let (outcome, traj) = match propagate(params, &s0, shot_horizon(params), cfg.series_tol(), stops) {
        Ok(path) => match path.stop {
            Stop::Turn => (Outcome::Turn { g: path.last().v3 }, Some(path)),
            Stop::Floor => (Outcome::Crash, None),
            Stop::Ceiling => (Outcome::Escape, None),
            Stop::End => (Outcome::Undetermined, None),
        },
        Err(Error::NonPositiveV { .. }) => (Outcome::Crash, None),
        Err(_) => (Outcome::Undetermined, None),
    };
    Shot { b, outcome, traj }
}

/// Best turning shot among the few representable b around a root.
fn nearest_ulps(params: &DimensionParams, a: f64, shot: Shot, cfg: &ShootConfig) -> Shot {
    let mut best = shot;
    let base = best.b.to_bits() as i64;
    for k in [-3i64, -2, -1, 1, 2, 3] {
        let b = f64::from_bits((base + k) as u64);
        let cand = fire(params, a, b, cfg);
        if let (Outcome::Turn { g }, Outcome::Turn { g: g_best }) = (cand.outcome, best.outcome) {
            if g.abs() < g_best.abs() {
                best = cand;
            }
        }
    }
    best
}

fn check_a(params: &DimensionParams, a: f64) -> Result<()> {
    if !(a >= params.v_cyl + A_MARGIN && a <= 1.0 - A_MARGIN) {
        return Err(Error::InvalidParameter(format!(
            "Delaunay parameter a = {a} outside [v_cyl + {A_MARGIN:e}, 1 − {A_MARGIN:e}] = [{}, {}]",
            params.v_cyl + A_MARGIN,
            1.0 - A_MARGIN
        )));
    }
    Ok(())
}

/// Shoot for the Delaunay orbit with maximum `a`, default configuration
/// apart from the root tolerance.
pub fn shoot(params: &DimensionParams, a: f64, tol: f64) -> Result<DelaunayOrbit> {
    shoot_with(params, a, &ShootConfig::for_a(a, tol))
}

pub fn shoot_with(params: &DimensionParams, a: f64, cfg: &ShootConfig) -> Result<DelaunayOrbit> {
    check_a(params, a)?;
    if !(cfg.tol > 0.0) || cfg.scan_points < 2 || cfg.samples < 8 {
        return Err(Error::InvalidParameter(format!("bad shooting configuration {cfg:?}")));
    }
    let half_range = params.sph_exponent();
    let lo = -1.5 * half_range;
    let hi = -1e-9;
    let m = cfg.scan_points;
    let scan: Vec<Shot> = (0..m)
        .into_par_iter()
        .map(|k| fire(params, a, lo + (hi - lo) * k as f64 / (m - 1) as f64, cfg))
        .collect();

    // direct hits on the scan grid
    if let Some(idx) = scan
        .iter()
        .position(|s| matches!(s.outcome, Outcome::Turn { g } if g == 0.0))
    {
        let s = scan.into_iter().nth(idx).unwrap();
        let s = nearest_ulps(params, a, s, cfg);
        return assemble(params, a, s, 1, cfg);
    }

    let determined: Vec<&Shot> = scan.iter().filter(|s| s.outcome.side().is_some()).collect();
    let brackets: Vec<(usize, usize)> = determined
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0].outcome.side() == Some(-1) && w[1].outcome.side() == Some(1))
        .map(|(i, _)| (i, i + 1))
        .collect();
    let Some(&(i0, i1)) = brackets.first() else {
        return Err(Error::BracketFailure {
            a,
            detail: format!("no crash/turn sign change among {} scan points in b ∈ [{lo}, {hi}]", m),
        });
    };
    let (b_lo, b_hi) = (determined[i0].b, determined[i1].b);
    let (out_lo, out_hi) = (determined[i0].outcome, determined[i1].outcome);
    let count = brackets.len();
    drop(determined);
    let root = refine(params, a, (b_lo, out_lo), (b_hi, out_hi), cfg)?;
    let root = nearest_ulps(params, a, root, cfg);
    assemble(params, a, root, count, cfg)
}

/// Bisection on the classification, then Illinois steps on g once both
/// ends turn. Runs to the resolution of b; `tol` is checked afterwards.
fn refine(params: &DimensionParams, a: f64, lo: (f64, Outcome), hi: (f64, Outcome), cfg: &ShootConfig) -> Result<Shot> {
    let (mut b_lo, mut o_lo) = lo;
    let (mut b_hi, mut o_hi) = hi;
    let mut best: Option<Shot> = None;
    let keep_best = |s: Shot, best: &mut Option<Shot>| {
        if let Outcome::Turn { g } = s.outcome {
            let better = match best {
                Some(Shot {
                    outcome: Outcome::Turn { g: gb },
                    ..
                }) => g.abs() < gb.abs(),
                _ => true,
            };
            if better {
                *best = Some(s);
            }
        }
    };
    let mut stale: i8 = 0;
    for _ in 0..400 {
        if b_hi - b_lo <= 4.0 * f64::EPSILON * b_lo.abs() {
            break;
        }
        let b = match (o_lo, o_hi) {
            (Outcome::Turn { g: g_lo }, Outcome::Turn { g: g_hi }) => {
                let (mut wl, mut wh) = (g_lo, g_hi);
                if stale <= -2 {
                    wh *= 0.5f64.powi(-stale as i32 - 1);
                } else if stale >= 2 {
                    wl *= 0.5f64.powi(stale as i32 - 1);
                }
                let x = b_lo - wl * (b_hi - b_lo) / (wh - wl);
                if x > b_lo && x < b_hi {
                    x
                } else {
                    0.5 * (b_lo + b_hi)
                }
            }
            _ => 0.5 * (b_lo + b_hi),
        };
        if !(b > b_lo && b < b_hi) {
            break;
        }
        let shot = fire(params, a, b, cfg);
        match shot.outcome.side() {
            Some(0) => return Ok(shot),
            Some(-1) => {
                b_lo = b;
                o_lo = shot.outcome;
                stale = if stale < 0 { stale.saturating_sub(1) } else { -1 };
            }
            Some(1) => {
                b_hi = b;
                o_hi = shot.outcome;
                stale = if stale > 0 { stale.saturating_add(1) } else { 1 };
            }
            _ => {
                return Err(Error::NoConvergence(format!(
                    "shot at a = {a}, b = {b} could not be classified inside the bracket"
                )))
            }
        }
        stale = stale.clamp(-40, 40);
        keep_best(shot, &mut best);
    }
    // A bracket collapsed onto neighbouring doubles is a root to the
    // resolution of b even when |g| there exceeds tol.
    let collapsed = b_hi - b_lo <= 4.0 * f64::EPSILON * b_lo.abs();
    match best {
        Some(s) if collapsed || matches!(s.outcome, Outcome::Turn { g } if g.abs() <= cfg.tol) => Ok(s),
        Some(Shot {
            b,
            outcome: Outcome::Turn { g },
            ..
        }) => Err(Error::NoConvergence(format!(
            "shooting at a = {a} reached |v'''(t*)| = {:e} at b = {b}, above tol {:e}",
            g.abs(),
            cfg.tol
        ))),
        _ => Err(Error::NoConvergence(format!(
            "shooting at a = {a} found no turning shot in [{b_lo}, {b_hi}]"
        ))),
    }
}

fn assemble(
    params: &DimensionParams,
    a: f64,
    shot: Shot,
    brackets_seen: usize,
    cfg: &ShootConfig,
) -> Result<DelaunayOrbit> {
    let half = shot.traj.expect("turning shots carry their trajectory");
    let b = shot.b;
    let Outcome::Turn { g } = shot.outcome else {
        unreachable!()
    };
    let s0 = CylinderState::new(0.0, a, 0.0, b, 0.0);
    let t_star = half.t_final();
    let t_a = 2.0 * t_star;
    let eps_a = half.last().v;
    let h = hamiltonian(params, &s0)?;
    let i_a = 2.0 * half.last_volume();

    let stops = Stops {
        floor: Some(CRASH_LEVEL),
        ..Stops::default()
    };
    // an audit run that crashes or overflows counts as an infinite defect
    let (defect, full_drift) = match propagate(params, &s0, t_a, cfg.series_tol(), stops) {
        Ok(full) if full.stop == Stop::End => {
            let end = full.last();
            let d = [end.v - a, end.v1, end.v2 - b, end.v3]
                .iter()
                .fold(0.0f64, |m, x| m.max(x.abs()));
            (if d.is_nan() { f64::INFINITY } else { d }, full.max_drift)
        }
        _ => (f64::INFINITY, 0.0),
    };
    if !(defect <= cfg.defect_tol) {
        return Err(Error::NoConvergence(format!(
            "orbit a = {a} has periodicity defect {defect:e} > {:e}",
            cfg.defect_tol
        )));
    }
    let max_drift = half.max_drift.max(full_drift);

    let mut orbit = DelaunayOrbit {
        n: params.n,
        a,
        b,
        t_a,
        eps_a,
        h,
        i_a,
        defect,
        g_residual: g.abs(),
        max_drift,
        brackets_seen,
        samples: Vec::new(),
        half,
    };
    let m = cfg.samples;
    orbit.samples = (0..m).map(|j| orbit.state_at(t_a * j as f64 / m as f64)).collect();
    Ok(orbit)
}

/// Invariant checks of a single orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrbitAudit {
    pub defect_ok: bool,
    pub drift_ok: bool,
    pub sup_ok: bool,
    pub energy_ok: bool,
    pub ordering_ok: bool,
}

impl OrbitAudit {
    pub fn passed(&self) -> bool {
        self.defect_ok && self.drift_ok && self.sup_ok && self.energy_ok && self.ordering_ok
    }
}

pub fn audit_orbit(params: &DimensionParams, orbit: &DelaunayOrbit) -> OrbitAudit {
    OrbitAudit {
        defect_ok: orbit.defect <= 1e-6,
        drift_ok: orbit.max_drift <= 1e-8 * orbit.h.abs().max(1.0),
        sup_ok: orbit.sup_v() <= 1.0 + 1e-8,
        energy_ok: params.h_cyl < orbit.h && orbit.h < 0.0,
        ordering_ok: 0.0 < orbit.eps_a && orbit.eps_a < params.v_cyl && params.v_cyl < orbit.a,
    }
}

/// Orbit whose period equals `period`, found by bracketed secant iteration
/// on a ↦ T_a (increasing from t_cyl at v_cyl to ∞ at 1).
///
/// `tol` is relative to `period`. T_a itself is only as sharp as the
/// shooting root allows: about 1e−9 relative up to 2.5·t_cyl, 1e−8 at
/// 3·t_cyl and 1e−7 at 3.5·t_cyl for n = 5.
pub fn orbit_for_period(params: &DimensionParams, period: f64, tol: f64) -> Result<DelaunayOrbit> {
    if !(period > params.t_cyl) {
        return Err(Error::InvalidParameter(format!(
            "period {period} must exceed the cylinder period {}",
            params.t_cyl
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be > 0")));
    }
    let shoot_tol = 1e-9;
    let target = |o: &DelaunayOrbit| o.t_a - period;
    // the lower end is the cylinder limit
    let mut a_lo = params.v_cyl;
    let mut f_lo = params.t_cyl - period;
    let mut hi: Option<DelaunayOrbit> = None;
    for k in 1..=6 {
        let a = 1.0 - 10f64.powi(-k);
        if a <= params.v_cyl + A_MARGIN {
            continue;
        }
        let o = shoot(params, a, shoot_tol)?;
        if target(&o) >= 0.0 {
            hi = Some(o);
            break;
        }
        a_lo = a;
        f_lo = target(&o);
    }
    let Some(hi_orbit) = hi else {
        return Err(Error::NoConvergence(format!(
            "period {period} exceeds the largest reachable Delaunay period"
        )));
    };
    let mut a_hi = hi_orbit.a;
    let mut f_hi = target(&hi_orbit);
    if f_hi.abs() <= tol * period {
        return Ok(hi_orbit);
    }
    let mut best = f_hi.abs();
    let mut side = 0i8;
    for _ in 0..200 {
        let (mut wl, mut wh) = (f_lo, f_hi);
        if side == -2 {
            wh *= 0.5;
        } else if side == 2 {
            wl *= 0.5;
        }
        let mut a = a_lo - wl * (a_hi - a_lo) / (wh - wl);
        if !(a > a_lo && a < a_hi) {
            a = 0.5 * (a_lo + a_hi);
        }
        let a = a.max(params.v_cyl + A_MARGIN);
        let o = shoot(params, a, shoot_tol)?;
        let f = target(&o);
        if f.abs() <= tol * period {
            return Ok(o);
        }
        best = best.min(f.abs());
        if f < 0.0 {
            a_lo = a;
            f_lo = f;
            side = if side < 0 { side - 1 } else { -1 };
        } else {
            a_hi = a;
            f_hi = f;
            side = if side > 0 { side + 1 } else { 1 };
        }
        if a_hi - a_lo <= 1e-15 {
            break;
        }
    }
    Err(Error::NoConvergence(format!(
        "no Delaunay parameter found with period {period} to relative tolerance {tol:e} (closest {:.1e}; T_a is resolved to about 1e-8 relative near a = 1 - 1e-4)",
        best / period
    )))
}

/// One grid point of a sweep.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub a: f64,
    pub result: Result<DelaunayOrbit>,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub n: u32,
    pub points: Vec<SweepPoint>,
    pub t_increasing: bool,
    pub eps_decreasing: bool,
    pub h_in_range: bool,
    pub audits_passed: bool,
}

impl SweepReport {
    pub fn orbits(&self) -> impl Iterator<Item = &DelaunayOrbit> {
        self.points.iter().filter_map(|p| p.result.as_ref().ok())
    }

    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.result.is_err()).count()
    }
}

/// Shoot at every grid point (in parallel); failures are kept per point.
pub fn sweep(params: &DimensionParams, a_grid: &[f64], tol: f64) -> Result<SweepReport> {
    if a_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("a grid must be strictly increasing".into()));
    }
    let points: Vec<SweepPoint> = a_grid
        .par_iter()
        .map(|&a| SweepPoint {
            a,
            result: shoot(params, a, tol),
        })
        .collect();
    let orbits: Vec<&DelaunayOrbit> = points.iter().filter_map(|p| p.result.as_ref().ok()).collect();
    let t_increasing = orbits.windows(2).all(|w| w[1].t_a > w[0].t_a);
    let eps_decreasing = orbits.windows(2).all(|w| w[1].eps_a < w[0].eps_a);
    let h_in_range = orbits.iter().all(|o| params.h_cyl < o.h && o.h < 0.0);
    let audits_passed = orbits.iter().all(|o| audit_orbit(params, o).passed());
    Ok(SweepReport {
        n: params.n,
        points,
        t_increasing,
        eps_decreasing,
        h_in_range,
        audits_passed,
    })
}

/// `count` equally spaced values from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::make_params;

    #[test]
    fn matches_reference_orbit_n5() {
        let p = make_params(5).unwrap();
        let o = shoot(&p, 0.9, 1e-9).unwrap();
        assert!((o.b + 0.130296040189).abs() < 1e-8, "b = {}", o.b);
        assert!((o.t_a - 5.22932).abs() < 1e-4, "T = {}", o.t_a);
        assert!((o.eps_a - 0.74636).abs() < 1e-4, "eps = {}", o.eps_a);
        assert!(o.g_residual <= 1e-9);
        assert!(audit_orbit(&p, &o).passed(), "{:?}", audit_orbit(&p, &o));
        assert_eq!(o.samples.len(), 512);
        assert_eq!(o.brackets_seen, 1);
    }

    #[test]
    fn orbit_is_even_about_both_critical_points() {
        let p = make_params(5).unwrap();
        let o = shoot(&p, 0.95, 1e-9).unwrap();
        for k in 1..10 {
            let t = o.t_a * k as f64 / 23.0;
            let (l, r) = (o.state_at(-t), o.state_at(t));
            assert!((l.v - r.v).abs() < 1e-12);
            assert!((l.v1 + r.v1).abs() < 1e-12);
            let (l, r) = (o.state_at(o.t_star() - t), o.state_at(o.t_star() + t));
            assert!((l.v - r.v).abs() < 1e-12);
        }
        // dense evaluation agrees with an independent integration
        let s0 = CylinderState::new(0.0, o.a, 0.0, o.b, 0.0);
        let tr = crate::integrate(&p, s0, 0.8 * o.t_a, 1e-12, 1e-12, &[]).unwrap();
        assert!((tr.last().v - o.state_at(0.8 * o.t_a).v).abs() < 1e-7);
    }

    #[test]
    fn invalid_a_is_rejected() {
        let p = make_params(5).unwrap();
        for a in [0.5, p.v_cyl, 1.0, 1.2, f64::NAN] {
            assert!(matches!(shoot(&p, a, 1e-9), Err(Error::InvalidParameter(_))), "{a}");
        }
    }

    #[test]
    fn period_inversion() {
        let p = make_params(5).unwrap();
        let target = 2.5 * p.t_cyl;
        let o = orbit_for_period(&p, target, 1e-7).unwrap();
        assert!((o.t_a - target).abs() <= 1e-7 * target);
        assert!(matches!(
            orbit_for_period(&p, 0.9 * p.t_cyl, 1e-7),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn sweep_is_monotone_and_ordered() {
        let p = make_params(6).unwrap();
        let grid = linear_grid(p.v_cyl + 0.02, 0.98, 6);
        let rep = sweep(&p, &grid, 1e-9).unwrap();
        assert_eq!(rep.failures(), 0);
        assert!(rep.t_increasing && rep.eps_decreasing && rep.h_in_range && rep.audits_passed);
        let a: Vec<f64> = rep.points.iter().map(|q| q.a).collect();
        assert_eq!(a, grid);
        assert!(sweep(&p, &[0.9, 0.8], 1e-9).is_err());
    }

    #[test]
    fn linear_and_spherical_limits() {
        let p = make_params(5).unwrap();
        let near = shoot(&p, p.v_cyl + 1e-3, 1e-9).unwrap();
        assert!((near.t_a / p.t_cyl - 1.0).abs() < 5e-3);
        // b ≈ −(a − v_cyl)·μ² in the linear regime
        assert!((near.b / (-1e-3 * p.mu * p.mu) - 1.0).abs() < 1e-2);
        let far = shoot(&p, 1.0 - 1e-3, 1e-9).unwrap();
        let mid = shoot(&p, 0.9, 1e-9).unwrap();
        assert!((far.t_a - 13.3696).abs() < 1e-3, "{}", far.t_a);
        assert!(far.t_a > 2.5 * p.t_cyl);
        assert!(shoot(&p, 1.0 - 1e-4, 1e-9).unwrap().t_a > 3.0 * p.t_cyl);
        assert!(far.eps_a < mid.eps_a);
        assert!(mid.b > -p.sph_exponent() && mid.b < 0.0);
    }

    #[test]
    fn tighter_tolerance_agrees() {
        let p = make_params(5).unwrap();
        let o1 = shoot(&p, 0.9, 1e-9).unwrap();
        let o2 = shoot(&p, 0.9, 1e-10).unwrap();
        assert!((o1.t_a - o2.t_a).abs() < 1e-7);
        assert!(o1.defect <= 1e-6);
    }

    #[test]
    fn sweep_edge_cases() {
        let p = make_params(5).unwrap();
        let single = sweep(&p, &[0.9], 1e-9).unwrap();
        let o = shoot(&p, 0.9, 1e-9).unwrap();
        let s = single.points[0].result.as_ref().unwrap();
        assert_eq!((s.b, s.t_a), (o.b, o.t_a));
        let rep = sweep(&p, &[p.v_cyl, 0.86, 0.9], 1e-9).unwrap();
        assert!(matches!(rep.points[0].result, Err(Error::InvalidParameter(_))));
        assert_eq!(rep.failures(), 1);
        assert!(rep.t_increasing);
    }

    #[test]
    fn audit_window() {
        assert_eq!(ShootConfig::for_a(0.9, 1e-9).defect_tol, DEFECT_TOL);
        assert!(ShootConfig::for_a(0.999, 1e-9).defect_tol.is_infinite());
        let p = make_params(5).unwrap();
        let o = shoot(&p, 0.9999, 1e-9).unwrap();
        assert!((o.t_a - 17.970).abs() < 1e-3, "{}", o.t_a);
    }
}

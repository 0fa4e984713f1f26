//! Dormand–Prince 5(4) with PI step control, the free 4th-order dense output
//! and event location on the interpolant.

use crate::error::{Error, Result};

/// A first-order system y' = f(t, y) on ℝ^D.
pub trait OdeSystem<const D: usize> {
    fn rhs(&self, t: f64, y: &[f64; D]) -> Result<[f64; D]>;
}

/// Direction in which an event function must cross zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossing {
    Rising,
    Falling,
    Either,
}

impl Crossing {
    fn detects(self, g0: f64, g1: f64) -> bool {
        match self {
            Crossing::Rising => g0 < 0.0 && g1 >= 0.0,
            Crossing::Falling => g0 > 0.0 && g1 <= 0.0,
            Crossing::Either => (g0 < 0.0 && g1 >= 0.0) || (g0 > 0.0 && g1 <= 0.0),
        }
    }
}

type StateFn<'a, const D: usize, T> = Box<dyn Fn(&[f64; D]) -> T + 'a>;

/// A terminal event: integration stops at the first root of `value` crossing
/// in the given direction, once `armed_when` has held at an accepted point.
pub struct Event<'a, const D: usize> {
    pub value: StateFn<'a, D, f64>,
    pub crossing: Crossing,
    pub armed_when: Option<StateFn<'a, D, bool>>,
    pub root_tol: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub h_min: f64,
}

impl SolverOptions {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            max_steps: 10_000_000,
            h_min: 1e-13,
        }
    }
}

/// Interpolation data of one accepted step.
#[derive(Debug, Clone)]
pub struct DenseSegment<const D: usize> {
    pub t0: f64,
    pub h: f64,
    coeffs: [[f64; D]; 5],
}

impl<const D: usize> DenseSegment<D> {
    pub fn eval(&self, t: f64) -> [f64; D] {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        let c = &self.coeffs;
        std::array::from_fn(|i| c[0][i] + theta * (c[1][i] + theta1 * (c[2][i] + theta * (c[3][i] + theta1 * c[4][i]))))
    }

    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stop {
    ReachedEnd,
    Event(usize),
}

/// Accepted points plus dense output.
#[derive(Debug, Clone)]
pub struct Solution<const D: usize> {
    pub ts: Vec<f64>,
    pub ys: Vec<[f64; D]>,
    pub segments: Vec<DenseSegment<D>>,
    pub accepted: usize,
    pub rejected: usize,
    pub stop: Stop,
}

impl<const D: usize> Solution<D> {
    /// Dense state at t; clamps to the covered interval.
    pub fn eval(&self, t: f64) -> [f64; D] {
        if self.segments.is_empty() {
            return self.ys[0];
        }
        let forward = self.segments[0].h > 0.0;
        // first segment whose far end is at or beyond t
        let idx = self
            .segments
            .partition_point(|s| if forward { s.t1() < t } else { s.t1() > t });
        let seg = &self.segments[idx.min(self.segments.len() - 1)];
        if idx >= self.segments.len() {
            return *self.ys.last().unwrap();
        }
        seg.eval(t)
    }

    pub fn t_last(&self) -> f64 {
        *self.ts.last().unwrap()
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

struct Step<const D: usize> {
    y1: [f64; D],
    k: [[f64; D]; 7],
    err: [f64; D],
}

fn combine<const D: usize>(y: &[f64; D], h: f64, terms: &[(f64, &[f64; D])]) -> [f64; D] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

fn rk_step<const D: usize, S: OdeSystem<D>>(sys: &S, t: f64, y: &[f64; D], k1: &[f64; D], h: f64) -> Result<Step<D>> {
    let k2 = sys.rhs(t + C2 * h, &combine(y, h, &[(A21, k1)]))?;
    let k3 = sys.rhs(t + C3 * h, &combine(y, h, &[(A31, k1), (A32, &k2)]))?;
    let k4 = sys.rhs(t + C4 * h, &combine(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]))?;
    let k5 = sys.rhs(
        t + C5 * h,
        &combine(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    )?;
    let k6 = sys.rhs(
        t + h,
        &combine(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    )?;
    let y1 = combine(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = sys.rhs(t + h, &y1)?;
    let err =
        std::array::from_fn(|i| h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]));
    Ok(Step {
        y1,
        k: [*k1, k2, k3, k4, k5, k6, k7],
        err,
    })
}

fn dense_segment<const D: usize>(t: f64, h: f64, y0: &[f64; D], step: &Step<D>) -> DenseSegment<D> {
    let k = &step.k;
    let mut coeffs = [[0.0; D]; 5];
    for i in 0..D {
        let ydiff = step.y1[i] - y0[i];
        let bspl = h * k[0][i] - ydiff;
        coeffs[0][i] = y0[i];
        coeffs[1][i] = ydiff;
        coeffs[2][i] = bspl;
        coeffs[3][i] = ydiff - h * k[6][i] - bspl;
        coeffs[4][i] = h * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i] + D7 * k[6][i]);
    }
    DenseSegment { t0: t, h, coeffs }
}

fn scaled_norm<const D: usize>(v: &[f64; D], y0: &[f64; D], y1: &[f64; D], o: &SolverOptions) -> f64 {
    (0..D)
        .map(|i| {
            let sk = o.atol + o.rtol * y0[i].abs().max(y1[i].abs());
            (v[i] / sk).abs()
        })
        .fold(0.0, f64::max)
}

fn initial_step<const D: usize, S: OdeSystem<D>>(
    sys: &S,
    t: f64,
    y: &[f64; D],
    f0: &[f64; D],
    dir: f64,
    o: &SolverOptions,
) -> f64 {
    let d0 = scaled_norm(y, y, y, o);
    let d1 = scaled_norm(f0, y, y, o);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(1.0);
    let y1 = combine(y, dir * h0, &[(1.0, f0)]);
    let Ok(f1) = sys.rhs(t + dir * h0, &y1) else {
        return dir * h0;
    };
    let diff: [f64; D] = std::array::from_fn(|i| f1[i] - f0[i]);
    let d2 = scaled_norm(&diff, y, y, o) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    dir * (100.0 * h0).min(h1)
}

/// Integrate from (t0, y0) toward t_end, stopping early at the first event.
pub fn solve<const D: usize, S: OdeSystem<D>>(
    sys: &S,
    t0: f64,
    y0: [f64; D],
    t_end: f64,
    opts: &SolverOptions,
    events: &[Event<'_, D>],
) -> Result<Solution<D>> {
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut sol = Solution {
        ts: vec![t0],
        ys: vec![y0],
        segments: Vec::new(),
        accepted: 0,
        rejected: 0,
        stop: Stop::ReachedEnd,
    };
    if t_end == t0 {
        return Ok(sol);
    }
    let mut armed: Vec<bool> = events
        .iter()
        .map(|e| e.armed_when.as_ref().is_none_or(|f| f(&y0)))
        .collect();

    let mut t = t0;
    let mut y = y0;
    let mut k1 = sys.rhs(t, &y)?;
    let mut h = initial_step(sys, t, &y, &k1, dir, opts);
    let mut err_old = 1e-4f64;
    let mut last_rejected = false;
    const BETA: f64 = 0.04;
    const SAFE: f64 = 0.8;

    loop {
        if sol.accepted + sol.rejected >= opts.max_steps {
            return Err(Error::MaxSteps {
                t,
                steps: opts.max_steps,
            });
        }
        let remaining = t_end - t;
        let last = (t + h - t_end) * dir >= 0.0;
        if last {
            h = remaining;
        }
        let step = match rk_step(sys, t, &y, &k1, h) {
            Ok(s) => s,
            Err(e) => {
                if 0.25 * h.abs() < opts.h_min {
                    return Err(e);
                }
                h *= 0.25;
                sol.rejected += 1;
                last_rejected = true;
                continue;
            }
        };
        let err = scaled_norm(&step.err, &y, &step.y1, opts);
        if !err.is_finite() || err > 1.0 {
            let fac = if err.is_finite() {
                (SAFE * err.powf(-0.2)).max(0.2)
            } else {
                0.2
            };
            h *= fac;
            sol.rejected += 1;
            last_rejected = true;
            if h.abs() < opts.h_min {
                return Err(Error::StepFloor { t, h: h.abs() });
            }
            continue;
        }

        let t_new = if last { t_end } else { t + h };
        let seg = dense_segment(t, h, &y, &step);

        // earliest event root in this step
        let mut hit: Option<(usize, f64)> = None;
        for (i, ev) in events.iter().enumerate() {
            if !armed[i] {
                continue;
            }
            let g0 = (ev.value)(&y);
            let g1 = (ev.value)(&step.y1);
            if ev.crossing.detects(g0, g1) {
                let root = bisect_on_segment(ev, &seg, t, t_new, g0);
                if hit.is_none_or(|(_, tr)| (root - tr) * dir < 0.0) {
                    hit = Some((i, root));
                }
            }
        }
        if let Some((i, t_root)) = hit {
            let (t_ev, y_ev) = polish_event(sys, &events[i], t, &y, &k1, t_root, h)?;
            let seg_ev = rk_step(sys, t, &y, &k1, t_ev - t).map(|s| dense_segment(t, t_ev - t, &y, &s))?;
            sol.accepted += 1;
            if t_ev != t {
                sol.segments.push(seg_ev);
                sol.ts.push(t_ev);
                sol.ys.push(y_ev);
            } else {
                *sol.ys.last_mut().unwrap() = y_ev;
            }
            sol.stop = Stop::Event(i);
            return Ok(sol);
        }

        sol.accepted += 1;
        sol.segments.push(seg);
        sol.ts.push(t_new);
        sol.ys.push(step.y1);
        t = t_new;
        y = step.y1;
        k1 = step.k[6];
        for (i, ev) in events.iter().enumerate() {
            if !armed[i] {
                armed[i] = ev.armed_when.as_ref().is_none_or(|f| f(&y));
            }
        }
        if last {
            sol.stop = Stop::ReachedEnd;
            return Ok(sol);
        }

        // PI controller
        let fac11 = err.max(1e-300).powf(0.2 - BETA * 0.75);
        let mut fac = fac11 / err_old.powf(BETA);
        fac = (fac / SAFE).clamp(0.1, 5.0);
        let mut h_new = h / fac;
        if last_rejected && h_new.abs() > h.abs() {
            h_new = h;
        }
        err_old = err.max(1e-4);
        last_rejected = false;
        h = h_new;
        if h.abs() < opts.h_min {
            return Err(Error::StepFloor { t, h: h.abs() });
        }
    }
}

fn bisect_on_segment<const D: usize>(ev: &Event<'_, D>, seg: &DenseSegment<D>, ta: f64, tb: f64, g_a: f64) -> f64 {
    let (mut lo, mut hi) = (ta, tb);
    let sign_lo = g_a.signum();
    for _ in 0..200 {
        if (hi - lo).abs() <= ev.root_tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let g = (ev.value)(&seg.eval(mid));
        if g.signum() == sign_lo && g != 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Refine an event time by secant iteration on states recomputed with a
/// single Runge–Kutta step from the start of the step, so the returned state
/// carries the integrator's accuracy rather than the interpolant's.
fn polish_event<const D: usize, S: OdeSystem<D>>(
    sys: &S,
    ev: &Event<'_, D>,
    t: f64,
    y: &[f64; D],
    k1: &[f64; D],
    t_root: f64,
    h: f64,
) -> Result<(f64, [f64; D])> {
    let exact = |tt: f64| -> Result<[f64; D]> {
        if tt == t {
            Ok(*y)
        } else {
            rk_step(sys, t, y, k1, tt - t).map(|s| s.y1)
        }
    };
    let delta = ev.root_tol.max(1e-9 * h.abs());
    let mut ta = t_root;
    let mut ya = exact(ta)?;
    let mut ga = (ev.value)(&ya);
    let mut tb = if (t_root - delta - t) * h.signum() > 0.0 {
        t_root - delta
    } else {
        t_root + delta
    };
    let mut gb = (ev.value)(&exact(tb)?);
    for _ in 0..6 {
        if ga == 0.0 || gb == ga {
            break;
        }
        let tc = ta - ga * (ta - tb) / (ga - gb);
        if !tc.is_finite() || (tc - t_root).abs() > 10.0 * delta + ev.root_tol {
            break;
        }
        let yc = exact(tc)?;
        let gc = (ev.value)(&yc);
        tb = ta;
        gb = ga;
        ta = tc;
        ya = yc;
        ga = gc;
        if (ta - tb).abs() <= 1e-15 * (1.0 + ta.abs()) {
            break;
        }
    }
    Ok((ta, ya))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Oscillator;
    impl OdeSystem<2> for Oscillator {
        fn rhs(&self, _t: f64, y: &[f64; 2]) -> Result<[f64; 2]> {
            Ok([y[1], -y[0]])
        }
    }

    struct Decay;
    impl OdeSystem<1> for Decay {
        fn rhs(&self, _t: f64, y: &[f64; 1]) -> Result<[f64; 1]> {
            Ok([-y[0]])
        }
    }

    #[test]
    fn harmonic_oscillator_endpoint_and_dense_output() {
        let opts = SolverOptions::new(1e-11, 1e-11);
        let sol = solve(&Oscillator, 0.0, [1.0, 0.0], 10.0, &opts, &[]).unwrap();
        assert_eq!(sol.stop, Stop::ReachedEnd);
        assert_eq!(sol.t_last(), 10.0);
        let y = sol.ys.last().unwrap();
        assert!((y[0] - 10f64.cos()).abs() < 1e-9);
        for k in 0..100 {
            let t = 0.1 * k as f64 + 0.037;
            let y = sol.eval(t);
            assert!((y[0] - t.cos()).abs() < 1e-8, "dense at {t}");
        }
        assert!(sol.ts.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn backward_integration() {
        let opts = SolverOptions::new(1e-11, 1e-13);
        let sol = solve(&Decay, 0.0, [1.0], -3.0, &opts, &[]).unwrap();
        assert!((sol.ys.last().unwrap()[0] - 3f64.exp()).abs() < 1e-8);
        assert!((sol.eval(-1.5)[0] - 1.5f64.exp()).abs() < 1e-8);
        assert!(sol.ts.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn event_location_is_polished() {
        let opts = SolverOptions::new(1e-10, 1e-10);
        let ev = Event {
            value: Box::new(|y: &[f64; 2]| y[0]),
            crossing: Crossing::Falling,
            armed_when: None,
            root_tol: 1e-12,
        };
        let sol = solve(&Oscillator, 0.0, [1.0, 0.0], 10.0, &opts, &[ev]).unwrap();
        assert_eq!(sol.stop, Stop::Event(0));
        assert!((sol.t_last() - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
        assert!(sol.ys.last().unwrap()[0].abs() < 1e-13);
    }

    #[test]
    fn arming_skips_the_initial_root() {
        let opts = SolverOptions::new(1e-10, 1e-10);
        // y[1] = −sin t starts at zero; arm once it is clearly negative
        let ev = Event {
            value: Box::new(|y: &[f64; 2]| y[1]),
            crossing: Crossing::Rising,
            armed_when: Some(Box::new(|y: &[f64; 2]| y[1] < -1e-6)),
            root_tol: 1e-12,
        };
        let sol = solve(&Oscillator, 0.0, [1.0, 0.0], 10.0, &opts, &[ev]).unwrap();
        assert!((sol.t_last() - std::f64::consts::PI).abs() < 1e-9);
    }

    #[test]
    fn fifth_order_convergence() {
        let err_at = |tol: f64| {
            let o = SolverOptions::new(tol, tol);
            let sol = solve(&Oscillator, 0.0, [1.0, 0.0], 20.0, &o, &[]).unwrap();
            ((sol.ys.last().unwrap()[0] - 20f64.cos()).abs(), sol.accepted)
        };
        let (e1, n1) = err_at(1e-6);
        let (e2, n2) = err_at(1e-10);
        let order = (e1 / e2).ln() / (n2 as f64 / n1 as f64).ln();
        assert!(order > 4.0, "observed order {order}");
    }
}

//! (v, v̇) projections of orbits: Delaunay loops around the cylinder point
//! and the spherical homoclinic loop through (1, 0).

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::DimensionParams;
use crate::solver::{shoot, DelaunayOrbit};

/// Sphere loop ends where v drops below this level.
pub const SPHERE_END_LEVEL: f64 = 1e-3;
pub const SPHERE_POINTS: usize = 1025;
const PORTRAIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    pub label: String,
    pub a: Option<f64>,
    pub closed: bool,
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Marker {
    pub label: String,
    pub v: f64,
    pub v1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PortraitSet {
    pub n: u32,
    pub curves: Vec<Curve>,
    pub markers: Vec<Marker>,
}

/// Round to 9 significant digits.
pub fn round9(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.8e}").parse().unwrap()
}

pub fn orbit_curve(orbit: &DelaunayOrbit) -> Curve {
    let mut points: Vec<[f64; 2]> = orbit.samples.iter().map(|s| [round9(s.v), round9(s.v1)]).collect();
    points.push(points[0]);
    Curve {
        label: format!("delaunay a={}", orbit.a),
        a: Some(orbit.a),
        closed: true,
        points,
    }
}

/// Half-width T of the window on which cosh(t)^{−(n−4)/2} ≥ `level`.
pub fn sphere_span(params: &DimensionParams, level: f64) -> f64 {
    level.powf(-1.0 / params.sph_exponent()).acosh()
}

/// The spherical solution from its closed form on [−T, T], T = sphere_span.
pub fn sphere_curve(params: &DimensionParams) -> Curve {
    let m = params.sph_exponent();
    let span = sphere_span(params, SPHERE_END_LEVEL);
    let points = (0..SPHERE_POINTS)
        .map(|j| {
            let t = -span + 2.0 * span * j as f64 / (SPHERE_POINTS - 1) as f64;
            let v = t.cosh().powf(-m);
            [round9(v), round9(-m * t.tanh() * v)]
        })
        .collect();
    Curve {
        label: "sphere".into(),
        a: None,
        closed: false,
        points,
    }
}

pub fn build_portrait(params: &DimensionParams, a_list: &[f64], include_sphere: bool) -> Result<PortraitSet> {
    let orbits: Vec<Result<DelaunayOrbit>> = a_list.par_iter().map(|&a| shoot(params, a, PORTRAIT_TOL)).collect();
    let mut curves = Vec::with_capacity(a_list.len() + 1);
    for (a, o) in a_list.iter().zip(orbits) {
        let o = o.map_err(|e| match e {
            Error::InvalidParameter(m) => Error::InvalidParameter(format!("curve a = {a}: {m}")),
            other => other,
        })?;
        curves.push(orbit_curve(&o));
    }
    let mut markers = vec![Marker {
        label: "cylinder".into(),
        v: round9(params.v_cyl),
        v1: 0.0,
    }];
    if include_sphere {
        curves.push(sphere_curve(params));
        markers.push(Marker {
            label: "origin".into(),
            v: 0.0,
            v1: 0.0,
        });
    }
    Ok(PortraitSet {
        n: params.n,
        curves,
        markers,
    })
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Proper (transversal) intersection of two segments.
fn segments_cross(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Whether two polylines have a transversal intersection.
pub fn polylines_cross(a: &[[f64; 2]], b: &[[f64; 2]]) -> bool {
    for s in a.windows(2) {
        let (lo_x, hi_x) = (s[0][0].min(s[1][0]), s[0][0].max(s[1][0]));
        let (lo_y, hi_y) = (s[0][1].min(s[1][1]), s[0][1].max(s[1][1]));
        for r in b.windows(2) {
            if r[0][0].max(r[1][0]) < lo_x
                || r[0][0].min(r[1][0]) > hi_x
                || r[0][1].max(r[1][1]) < lo_y
                || r[0][1].min(r[1][1]) > hi_y
            {
                continue;
            }
            if segments_cross(s[0], s[1], r[0], r[1]) {
                return true;
            }
        }
    }
    false
}

/// Even-odd point-in-polygon test; the polygon is closed implicitly.
pub fn point_in_polygon(pt: [f64; 2], poly: &[[f64; 2]]) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a[1] > pt[1]) != (b[1] > pt[1]) {
            let x = a[0] + (pt[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if pt[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// v-range of a curve.
pub fn v_range(c: &Curve) -> (f64, f64) {
    c.points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        (lo.min(p[0]), hi.max(p[0]))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PortraitAudit {
    pub closed: bool,
    pub nested: bool,
    pub non_crossing: bool,
    pub inside_sphere: bool,
    pub symmetric: bool,
}

impl PortraitAudit {
    pub fn passed(&self) -> bool {
        self.closed && self.nested && self.non_crossing && self.inside_sphere && self.symmetric
    }
}

/// Check closure, nesting by a, non-crossing, containment in the sphere loop
/// and the v̇ → −v̇ symmetry.
pub fn audit_portrait(set: &PortraitSet) -> PortraitAudit {
    let mut loops: Vec<&Curve> = set.curves.iter().filter(|c| c.a.is_some()).collect();
    loops.sort_by(|x, y| x.a.unwrap().total_cmp(&y.a.unwrap()));
    let closed = loops.iter().all(|c| {
        let (f, l) = (c.points[0], c.points[c.points.len() - 1]);
        (f[0] - l[0]).abs() <= 1e-6 && (f[1] - l[1]).abs() <= 1e-6
    });
    let nested = loops.windows(2).all(|w| {
        let (lo1, hi1) = v_range(w[0]);
        let (lo2, hi2) = v_range(w[1]);
        lo2 < lo1 && hi1 < hi2
    });
    let mut non_crossing = true;
    for i in 0..loops.len() {
        for j in i + 1..loops.len() {
            non_crossing &= !polylines_cross(&loops[i].points, &loops[j].points);
        }
    }
    let sphere = set.curves.iter().find(|c| c.a.is_none());
    let inside_sphere = match sphere {
        Some(s) => {
            let mut poly = s.points.clone();
            poly.push([0.0, 0.0]);
            loops
                .iter()
                .all(|c| c.points.iter().all(|&p| point_in_polygon(p, &poly)))
        }
        None => true,
    };
    let symmetric = set.curves.iter().all(|c| {
        c.points.iter().all(|p| {
            c.points
                .iter()
                .any(|q| (q[0] - p[0]).abs() <= 1e-6 && (q[1] + p[1]).abs() <= 1e-6)
        })
    });
    PortraitAudit {
        closed,
        nested,
        non_crossing,
        inside_sphere,
        symmetric,
    }
}

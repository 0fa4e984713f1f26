//! Every module invariant in one pass, plus the two formula adjudications
//! (sign inside the cylinder frequency, exponent of the Delaunay invariant).

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dynamics::{hamiltonian, ode_residual, CylinderProfile, CylinderState, SphericalProfile};
use crate::error::Result;
use crate::functionals::{
    count_constant_q_metrics, invariant_value, q_energy_parts, q_energy_radial, q_gradient_radial,
    random_perturbations, volume_invariant, RadialProfile,
};
use crate::integrator::integrate;
use crate::params::{sphere_closure, DimensionParams};
use crate::portrait::{audit_portrait, build_portrait};
use crate::solver::{audit_orbit, linear_grid, shoot, sweep};
use crate::stability::{
    cylinder_negative_modes, cylinder_negative_modes_closed_form, discretized_spectrum, nodal_arcs,
    variational_residual, Operator, KERNEL_REL,
};
use crate::study::convergence_study;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Which of two candidate forms of a formula the computation supports.
#[derive(Debug, Clone, Serialize)]
pub struct Adjudication {
    pub question: String,
    pub verdict: String,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelfcheckReport {
    pub n: u32,
    pub checks: Vec<Check>,
    pub adjudications: Vec<Adjudication>,
    pub failures: Vec<String>,
}

impl SelfcheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Value at 0 of the quadratic through three points.
pub fn extrapolate_to_zero(xs: [f64; 3], ys: [f64; 3]) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        let mut w = 1.0;
        for j in 0..3 {
            if i != j {
                w *= (0.0 - xs[j]) / (xs[i] - xs[j]);
            }
        }
        acc += w * ys[i];
    }
    acc
}

/// Cylinder period limit of T_a from a − v_cyl ∈ {1e−2, 1e−3, 1e−4}.
pub fn period_limit(params: &DimensionParams) -> Result<f64> {
    let ds = [1e-2, 1e-3, 1e-4];
    let mut ts = [0.0; 3];
    for (t, d) in ts.iter_mut().zip(ds) {
        *t = shoot(params, params.v_cyl + d, 1e-10)?.t_a;
    }
    Ok(extrapolate_to_zero(ds, ts))
}

pub fn adjudicate_period_sign(params: &DimensionParams) -> Result<Adjudication> {
    let t0 = period_limit(params)?;
    let period = |sign: f64| 2.0 * std::f64::consts::PI / params.mu_variant(sign);
    let (tm, tp) = (period(-1.0), period(1.0));
    let (em, ep) = ((t0 / tm - 1.0).abs(), (t0 / tp - 1.0).abs());
    let verdict = if em <= 1e-3 && !(ep <= 1e-3) {
        "minus"
    } else if ep <= 1e-3 && !(em <= 1e-3) {
        "plus"
    } else {
        "undecided"
    };
    Ok(Adjudication {
        question: "constant under the outer root of the cylinder frequency: −n(n−4) − 8 or −n(n−4) + 8".into(),
        verdict: verdict.into(),
        detail: format!(
            "extrapolated period {t0:.9}; with −8: {tm:.9} (rel {em:.1e}); with +8: {tp:.9} (rel {ep:.1e})"
        ),
    })
}

pub fn adjudicate_invariant_exponent(params: &DimensionParams) -> Result<Adjudication> {
    let o = shoot(params, 0.9f64.max(params.v_cyl + 0.05), 1e-9)?;
    let q = q_energy_radial(params, &RadialProfile::from_orbit(&o))?;
    let vol = params.area_s * o.i_a;
    let nf = params.n as f64;
    let variants = [
        ("4/n", volume_invariant(params, vol)),
        ("n/4", params.q_bar * vol.powf(nf / 4.0)),
        (
            "4/n with extra 2/(n−4)",
            2.0 / (nf - 4.0) * volume_invariant(params, vol),
        ),
    ];
    let errs: Vec<(&str, f64)> = variants.iter().map(|(k, y)| (*k, (y / q - 1.0).abs())).collect();
    let best = errs.iter().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    Ok(Adjudication {
        question: "exponent of the volume in the Delaunay invariant".into(),
        verdict: if best.1 <= 1e-6 {
            best.0.to_string()
        } else {
            "undecided".into()
        },
        detail: errs
            .iter()
            .map(|(k, e)| format!("{k}: rel {e:.1e}"))
            .collect::<Vec<_>>()
            .join("; "),
    })
}

pub fn adjudicate_energy_exponent(params: &DimensionParams) -> Result<Adjudication> {
    let h = hamiltonian(params, &CylinderState::cylinder(params))?;
    let nf = params.n as f64;
    let base = nf * (nf - 4.0) / (nf * nf - 4.0);
    let pre = -(nf * (nf - 4.0).powi(2) / 8.0);
    let e4 = (pre * base.powf((nf - 4.0) / 4.0) / h - 1.0).abs();
    let e8 = (pre * base.powf((nf - 4.0) / 8.0) / h - 1.0).abs();
    Ok(Adjudication {
        question: "exponent of n(n−4)/(n²−4) in the cylinder energy: (n−4)/4 or (n−4)/8".into(),
        verdict: if e4 <= 1e-12 {
            "(n−4)/4"
        } else if e8 <= 1e-12 {
            "(n−4)/8"
        } else {
            "undecided"
        }
        .into(),
        detail: format!("(n−4)/4: rel {e4:.1e}; (n−4)/8: rel {e8:.1e}"),
    })
}

pub fn run_selfcheck(params: &DimensionParams) -> SelfcheckReport {
    let mut checks: Vec<Check> = Vec::new();
    let mut push = |name: &str, r: Result<(bool, String)>| {
        let (passed, detail) = r.unwrap_or_else(|e| (false, format!("error: {e}")));
        checks.push(Check {
            name: name.into(),
            passed,
            detail,
        });
    };
    let p = params;

    push(
        "closed-form solutions",
        (|| {
            let ts: Vec<f64> = (0..100).map(|j| -5.0 + 10.0 * j as f64 / 99.0).collect();
            let rs = ode_residual(p, &SphericalProfile::new(p), &ts)?;
            let rc = ode_residual(p, &CylinderProfile { value: p.v_cyl }, &ts)?;
            Ok((rs <= 1e-9 && rc <= 1e-9, format!("sphere {rs:.1e}, cylinder {rc:.1e}")))
        })(),
    );

    push(
        "energy values",
        (|| {
            let hc = hamiltonian(p, &CylinderState::cylinder(p))?;
            let hs = hamiltonian(p, &CylinderState::sphere_peak(p))?;
            let rel = (hc / p.h_cyl - 1.0).abs();
            Ok((
                rel <= 1e-12 && hs.abs() <= 1e-12,
                format!("H(cyl) rel {rel:.1e}, H(sph) {hs:.1e}"),
            ))
        })(),
    );

    push(
        "sphere closure",
        (|| {
            let c = sphere_closure(p, 1e-13)?;
            Ok((
                c.worst() <= 1e-10,
                format!(
                    "volume {:.1e}, closed form {:.1e}",
                    c.volume_rel_err, c.closed_form_rel_err
                ),
            ))
        })(),
    );

    push(
        "cylinder frequency root",
        Ok((
            p.quartic_residual().abs() <= 1e-10 * p.c0.max(1.0),
            format!("quartic residual {:.1e}", p.quartic_residual()),
        )),
    );

    // Delaunay family on a grid reaching a = 0.99
    let grid = linear_grid(p.v_cyl + 0.025 * (1.0 - p.v_cyl), 0.99, 20);
    let rep = sweep(p, &grid, 1e-9);
    push(
        "delaunay family",
        rep.as_ref().map_err(Clone::clone).map(|r| {
            let worst = r.orbits().map(|o| o.defect).fold(0.0, f64::max);
            let ok = r.failures() == 0 && r.t_increasing && r.eps_decreasing && r.h_in_range && r.audits_passed;
            (
                ok,
                format!(
                    "{} orbits, {} failed, worst defect {worst:.1e}, T increasing {}, eps decreasing {}, h in range {}",
                    r.points.len(),
                    r.failures(),
                    r.t_increasing,
                    r.eps_decreasing,
                    r.h_in_range
                ),
            )
        }),
    );

    if let Ok(r) = &rep {
        let orbits: Vec<_> = r.orbits().collect();
        push(
            "energy drift at rtol 1e-10",
            (|| {
                let mut worst = 0.0f64;
                let mut ok = true;
                for o in &orbits {
                    let tr = integrate(p, CylinderState::new(0.0, o.a, 0.0, o.b, 0.0), o.t_a, 1e-10, 1e-10, &[])?;
                    let rel = tr.max_drift / o.h.abs().max(1.0);
                    worst = worst.max(rel);
                    ok &= tr.max_drift <= 1e-8 * o.h.abs().max(1.0) && audit_orbit(p, o).drift_ok;
                }
                Ok((ok, format!("worst relative drift {worst:.1e}")))
            })(),
        );

        push(
            "two-path identity",
            (|| {
                let mut worst = 0.0f64;
                let mut below = true;
                for o in &orbits {
                    let q = q_energy_radial(p, &RadialProfile::from_orbit(o))?;
                    let y = invariant_value(p, o);
                    worst = worst.max((q / y - 1.0).abs());
                    below &= y < p.y_sph;
                }
                Ok((
                    worst <= 1e-6 && below,
                    format!("worst relative gap {worst:.1e}, all below sphere {below}"),
                ))
            })(),
        );

        push(
            "critical points",
            (|| {
                let mut worst = 0.0f64;
                for (i, o) in orbits.iter().enumerate().step_by(4) {
                    let u = RadialProfile::from_orbit(o);
                    for w in random_perturbations(100 + i as u64, o.t_a, u.len(), 4) {
                        worst = worst.max(q_gradient_radial(p, &u, &w)?.abs());
                    }
                }
                Ok((worst <= 1e-5, format!("largest directional derivative {worst:.1e}")))
            })(),
        );

        push(
            "nodal arcs",
            Ok({
                let bad: Vec<f64> = orbits
                    .iter()
                    .filter(|o| (1..=3).any(|l| nodal_arcs(o, l) != l))
                    .map(|o| o.a)
                    .collect();
                (bad.is_empty(), format!("mismatches at a = {bad:?}"))
            }),
        );

        push(
            "variational residual",
            (|| {
                let o = orbits[orbits.len() / 2];
                let r = variational_residual(p, o)?;
                Ok((r <= 1e-6, format!("a = {:.4}: {r:.1e}", o.a)))
            })(),
        );
    }

    push(
        "phase portrait",
        (|| {
            let a_list = [0.25, 0.5, 0.75].map(|f| p.v_cyl + f * (1.0 - p.v_cyl));
            let set = build_portrait(p, &a_list, true)?;
            let a = audit_portrait(&set);
            Ok((a.passed(), format!("{a:?}")))
        })(),
    );

    push(
        "cylinder mode counts",
        (|| {
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let mut bad = 0;
            for _ in 0..50 {
                let mut r: f64 = rng.gen_range(0.1..5.0);
                if (r - r.round()).abs() < 1e-6 {
                    r += 2e-6;
                }
                let t = r * p.t_cyl;
                if cylinder_negative_modes(p, t)? != cylinder_negative_modes_closed_form(p, t) {
                    bad += 1;
                }
            }
            Ok((bad == 0, format!("{bad} of 50 random circumferences disagree")))
        })(),
    );

    push(
        "cylinder spectrum",
        (|| {
            let period = 1.5 * p.t_cyl;
            let s128 = discretized_spectrum(p, &Operator::Cylinder { period }, 128)?;
            let lowest = crate::dynamics::symbol_cyl(p, 0.0);
            let rel = (s128.eigenvalues[0] / lowest - 1.0).abs();
            let want = cylinder_negative_modes(p, period)?;
            Ok((
                s128.negative_count == want && rel <= 1e-8,
                format!("negative {} (symbol {want}), lowest rel {rel:.1e}", s128.negative_count),
            ))
        })(),
    );

    push(
        "delaunay spectra",
        (|| {
            let o = shoot(p, p.v_cyl + 0.4 * (1.0 - p.v_cyl), 1e-9)?;
            let mut parts = Vec::new();
            let mut ok = true;
            for l in 1..=2 {
                let s = discretized_spectrum(p, &Operator::Delaunay { orbit: &o, l }, 128)?;
                let corr = s.translation_correlation.unwrap_or(0.0);
                ok &= s.negative_count >= l && s.has_kernel(KERNEL_REL) && corr > 0.99;
                parts.push(format!(
                    "l={l}: negative {}, kernel {:.1e}, corr {corr:.4}",
                    s.negative_count, s.near_zero
                ));
            }
            Ok((ok, parts.join("; ")))
        })(),
    );

    push(
        "metric counting",
        (|| {
            let got: Vec<usize> = [0.5, 1.5, 2.5, 3.0]
                .iter()
                .map(|r| count_constant_q_metrics(p, r * p.t_cyl).map(|c| c.k))
                .collect::<Result<_>>()?;
            Ok((got == [1, 2, 3, 3], format!("{got:?}")))
        })(),
    );

    push(
        "sphere limit",
        (|| {
            let r = convergence_study(p, 3)?;
            Ok((
                r.verdict(),
                format!("ratios {:?}", r.rows.iter().map(|x| x.y_over_ysph).collect::<Vec<_>>()),
            ))
        })(),
    );

    push(
        "q-energy homogeneity",
        (|| {
            let o = shoot(p, p.v_cyl + 0.5 * (1.0 - p.v_cyl), 1e-9)?;
            let u = RadialProfile::from_orbit(&o);
            let (e, _) = q_energy_parts(p, &u)?;
            let q = q_energy_radial(p, &u)?;
            let worst = [0.5, 2.0, 10.0]
                .iter()
                .map(|&l| q_energy_radial(p, &u.scaled(l)).map(|x| (x / q - 1.0).abs()))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            Ok((worst <= 1e-12 && e > 0.0, format!("worst {worst:.1e}")))
        })(),
    );

    let mut adjudications = Vec::new();
    let mut failures: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
    for (name, adj) in [
        ("cylinder period sign", adjudicate_period_sign(p)),
        ("invariant exponent", adjudicate_invariant_exponent(p)),
        ("cylinder energy exponent", adjudicate_energy_exponent(p)),
    ] {
        match adj {
            Ok(a) => {
                if a.verdict == "undecided" {
                    failures.push(name.into());
                }
                adjudications.push(a);
            }
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    SelfcheckReport {
        n: p.n,
        checks,
        adjudications,
        failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::make_params;

    #[test]
    fn quadratic_extrapolation_is_exact_on_quadratics() {
        let f = |x: f64| 3.0 - 2.0 * x + 0.5 * x * x;
        assert!((extrapolate_to_zero([0.1, 0.2, 0.4], [f(0.1), f(0.2), f(0.4)]) - 3.0).abs() < 1e-13);
    }

    #[test]
    fn adjudications_n5() {
        let p = make_params(5).unwrap();
        assert_eq!(adjudicate_period_sign(&p).unwrap().verdict, "minus");
        assert_eq!(adjudicate_invariant_exponent(&p).unwrap().verdict, "4/n");
        assert_eq!(adjudicate_energy_exponent(&p).unwrap().verdict, "(n−4)/4");
    }

    #[test]
    fn full_selfcheck_n5() {
        let p = make_params(5).unwrap();
        let r = run_selfcheck(&p);
        assert!(
            r.passed(),
            "{:#?}",
            r.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>()
        );
    }
}

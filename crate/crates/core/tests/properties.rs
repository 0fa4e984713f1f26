use proptest::prelude::*;

use qdelaunay::dynamics::hamiltonian;
use qdelaunay::functionals::{count_constant_q_metrics, q_energy_radial, random_profile};
use qdelaunay::solver::orbit_for_period;
use qdelaunay::stability::{cylinder_negative_modes, cylinder_negative_modes_closed_form};
use qdelaunay::{make_params, shoot, CylinderState};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn orbit_is_periodic_even_and_conservative(n in 5u32..=8, frac in 0.02f64..0.9) {
        let p = make_params(n).unwrap();
        let a = p.v_cyl + frac * (0.99 - p.v_cyl);
        let o = shoot(&p, a, 1e-9).unwrap();
        prop_assert!(o.b > -p.sph_exponent() && o.b < 0.0);
        prop_assert!(o.eps_a > 0.0 && o.eps_a < p.v_cyl && p.v_cyl < o.a);
        prop_assert!(o.h > p.h_cyl && o.h < 0.0);
        prop_assert!(o.t_a > p.t_cyl);
        prop_assert!(o.defect <= 1e-6);
        prop_assert!(o.max_drift <= 1e-8 * o.h.abs().max(1.0));
        prop_assert!(o.sup_v() <= o.a + 1e-8);
        for k in 1..8 {
            let t = o.t_a * k as f64 / 8.0;
            let (f, b) = (o.state_at(t), o.state_at(-t));
            prop_assert!((f.v - b.v).abs() <= 1e-9);
            prop_assert!((f.v1 + b.v1).abs() <= 1e-8);
            let h = hamiltonian(&p, &f).unwrap();
            prop_assert!((h - o.h).abs() <= 1e-8 * o.h.abs().max(1.0));
        }
    }

    #[test]
    fn period_and_minimum_are_monotone(lo in 0.05f64..0.9, gap in 0.01f64..0.1) {
        let p = make_params(5).unwrap();
        let span = 0.99 - p.v_cyl;
        let a1 = p.v_cyl + lo * span;
        let a2 = p.v_cyl + (lo + gap).min(1.0) * span;
        let (o1, o2) = (shoot(&p, a1, 1e-9).unwrap(), shoot(&p, a2, 1e-9).unwrap());
        prop_assert!(o2.t_a > o1.t_a);
        prop_assert!(o2.eps_a < o1.eps_a);
    }

    #[test]
    fn period_inversion_round_trips(ratio in 1.05f64..2.4) {
        let p = make_params(5).unwrap();
        let t = ratio * p.t_cyl;
        let o = orbit_for_period(&p, t, 1e-8).unwrap();
        prop_assert!((o.t_a / t - 1.0).abs() <= 1e-8);
        let again = shoot(&p, o.a, 1e-9).unwrap();
        prop_assert!((again.t_a / t - 1.0).abs() <= 1e-8);
    }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn q_energy_is_scale_invariant(seed in 0u64..1000, base in 0.3f64..1.0, lambda in 0.05f64..20.0) {
        let p = make_params(5).unwrap();
        let u = random_profile(seed, 2.0 * p.t_cyl, 128, base).unwrap();
        let q = q_energy_radial(&p, &u).unwrap();
        let qs = q_energy_radial(&p, &u.scaled(lambda)).unwrap();
        prop_assert!((qs / q - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn mode_and_metric_counts_follow_the_period(n in 5u32..=10, ratio in 0.01f64..8.0) {
        let p = make_params(n).unwrap();
        prop_assume!((ratio - ratio.round()).abs() > 1e-9);
        let t = ratio * p.t_cyl;
        prop_assert_eq!(cylinder_negative_modes(&p, t).unwrap(), cylinder_negative_modes_closed_form(&p, t));
        let c = count_constant_q_metrics(&p, t).unwrap();
        prop_assert_eq!(c.k, ratio.ceil() as usize);
        prop_assert_eq!(c.delaunay_periods.len(), c.k - 1);
        prop_assert!(c.delaunay_periods.iter().all(|&d| d > p.t_cyl));
    }

    #[test]
    fn time_reversal_preserves_energy(v in 0.1f64..1.5, v1 in -3.0f64..3.0, v2 in -3.0f64..3.0, v3 in -3.0f64..3.0) {
        let p = make_params(7).unwrap();
        let f = hamiltonian(&p, &CylinderState::new(0.0, v, v1, v2, v3)).unwrap();
        let b = hamiltonian(&p, &CylinderState::new(0.0, v, -v1, v2, -v3)).unwrap();
        prop_assert_eq!(f, b);
    }
}

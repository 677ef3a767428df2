//! Numerical variational formulas against the two-phase closed forms.

use tasep_core::twophase::{phi, profile, v_closed};
use tasep_core::variational::{gamma_q, hydro_v, hydro_v_path, rho_from_v, HydroOptions, InitialProfile};
use tasep_core::SpeedFunction;

#[test]
fn envelope_matches_closed_form_for_several_ratios() {
    for (c1, c2) in [(2.0, 1.0), (3.0, 0.5), (1.2, 1.0)] {
        let speed = SpeedFunction::two_phase(c1, c2).unwrap();
        for rho in [0.05, 0.2, 0.45, 0.5, 0.6, 0.9] {
            let p = InitialProfile::constant(rho).unwrap();
            for k in 0..=16 {
                let x = -2.0 + 0.25 * k as f64;
                let numeric = hydro_v(x, 1.0, &speed, &p).unwrap();
                let closed = v_closed(x, 1.0, rho, c1, c2).unwrap();
                assert!(
                    (numeric - closed).abs() < 1e-6,
                    "c1 {c1} c2 {c2} rho {rho} x {x}: {numeric} vs {closed}"
                );
            }
        }
    }
}

#[test]
fn path_form_matches_closed_form() {
    let speed = SpeedFunction::two_phase(2.0, 1.0).unwrap();
    for rho in [0.1, 0.3, 0.7] {
        let p = InitialProfile::constant(rho).unwrap();
        for x in [-1.5, -0.2, 0.0, 0.3, 1.2] {
            let (value, _) = hydro_v_path(x, 1.0, &speed, &p, &HydroOptions::default()).unwrap();
            let closed = v_closed(x, 1.0, rho, 2.0, 1.0).unwrap();
            assert!((value.v - closed).abs() < 1e-6, "rho {rho} x {x}: {} vs {closed}", value.v);
        }
    }
}

#[test]
fn finite_difference_density_matches_profile() {
    let speed = SpeedFunction::two_phase(2.0, 1.0).unwrap();
    for rho in [0.1, 0.3, 0.7] {
        let p = InitialProfile::constant(rho).unwrap();
        let (_, prof) = profile(rho, 2.0, 1.0, 1.0).unwrap();
        for x in [-1.0, -0.05, 0.1, 0.25, 1.0] {
            if prof.breakpoints().iter().any(|&e| (e - x).abs() < 0.02) {
                continue;
            }
            let v = |x: f64, t: f64| hydro_v(x, t, &speed, &p).unwrap();
            let d = rho_from_v(v, x, 1.0, 1e-3);
            assert!((d - prof.eval(x)).abs() < 1e-4, "rho {rho} x {x}: {d} vs {}", prof.eval(x));
        }
    }
}

#[test]
fn gamma_matches_transferred_phi() {
    let (c1, c2) = (2.0, 1.0);
    let speed = SpeedFunction::two_phase(c1, c2).unwrap();
    for (x, y) in [(-0.95, 1.0), (-0.5, 1.0), (-0.2, 1.0), (0.0, 1.0), (0.7, 0.4), (-0.99, 2.0)] {
        let g = gamma_q(x, y, &speed, 0.0).unwrap().value;
        let closed = phi(x + y, y, c1, c2).unwrap();
        assert!((g - closed).abs() < 1e-9 * closed, "({x}, {y}): {g} vs {closed}");
    }
}

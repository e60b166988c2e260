use std::f64::consts::PI;

use proptest::prelude::*;
use qbox_core::model::HBAR_SI;
use qbox_core::{
    analytic_box_state, assemble_hamiltonian, build_grid, characteristic_numbers,
    dimensional_energy, integrate, BoundaryKind, Error, PhysicalScales, Potential,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn reversed_field_is_the_mirrored_operator(alpha in -200.0..200.0f64, half in 10usize..40) {
        let g = build_grid(2 * half + 1, 8).unwrap();
        for bc in [BoundaryKind::Confinement, BoundaryKind::VanishingDerivative] {
            let a = assemble_hamiltonian(&g, &Potential::stark(alpha), bc).unwrap().to_dense();
            let b = assemble_hamiltonian(&g, &Potential::stark(-alpha), bc).unwrap().to_dense();
            let m = a.len();
            for i in 0..m {
                for j in 0..m {
                    prop_assert!((a[i][j] - b[m - 1 - i][m - 1 - j]).abs() < 1e-9 * (1.0 + a[i][j].abs()));
                }
            }
        }
    }

    #[test]
    fn power_counting(
        mass in 1e-31..1e-25f64,
        charge in -1e-18..1e-18f64,
        field in -1e6..1e6f64,
        half_length in 1e-10..1e-7f64,
        energy in 1e-22..1e-18f64,
    ) {
        let s = PhysicalScales::new(mass, charge, field, half_length).unwrap();
        let mut d = s;
        d.half_length *= 2.0;
        let (a1, b1) = characteristic_numbers(&s, energy).unwrap();
        let (a2, b2) = characteristic_numbers(&d, energy).unwrap();
        prop_assert!((a2 - 8.0 * a1).abs() <= 1e-12 * a1.abs().max(1e-300));
        prop_assert!((b2 / b1 - 4.0).abs() < 1e-12);
        let back = dimensional_energy(b1, &s).unwrap();
        prop_assert!((back / energy - 1.0).abs() < 1e-12);
    }
}

#[test]
fn ground_energy_in_si_units() {
    let s = PhysicalScales::new(9.109_383_7e-31, 1.0, 0.0, 1.0e-9).unwrap();
    let (alpha, _) = characteristic_numbers(&s, 1.0).unwrap();
    assert_eq!(alpha, 0.0);
    let e = dimensional_energy((PI / 2.0).powi(2), &s).unwrap();
    let h = 2.0 * PI * HBAR_SI;
    let want = h * h / (8.0 * s.mass * (2.0 * s.half_length).powi(2));
    assert!((e / want - 1.0).abs() < 1e-12);
}

#[test]
fn invalid_scales_are_rejected() {
    assert!(matches!(PhysicalScales::new(0.0, 1.0, 1.0, 1.0), Err(Error::InvalidScales(_))));
    assert!(matches!(PhysicalScales::new(1.0, 1.0, 1.0, 0.0), Err(Error::InvalidScales(_))));
}

#[test]
fn analytic_states_are_normalised() {
    let g = build_grid(1001, 8).unwrap();
    for k in 1..=6 {
        let a = analytic_box_state(k, &g).unwrap();
        let sq: Vec<f64> = a.psi.iter().map(|v| v * v).collect();
        assert!((0.5 * integrate(&g, &sq).unwrap() - 1.0).abs() < 1e-12);
    }
    let two = analytic_box_state(2, &g).unwrap();
    assert!(two.psi[500].abs() < 1e-15);
    assert!(analytic_box_state(0, &g).is_err());
}

#[test]
fn stark_values_and_derivative_are_exact() {
    let g = build_grid(101, 8).unwrap();
    let p = Potential::stark(7.5);
    let v = p.values(&g).unwrap();
    let dv = p.derivative(&g, BoundaryKind::Confinement).unwrap();
    for (i, x) in g.points().iter().enumerate() {
        assert_eq!(v[i], -7.5 * x);
        assert_eq!(dv[i], -7.5);
    }
    assert!(Potential::Uniform.values(&g).unwrap().iter().all(|v| *v == 0.0));
    assert!(matches!(
        Potential::tabulated(&g, &[(0.0, 1.0)]),
        Err(Error::LengthMismatch { .. })
    ));
}

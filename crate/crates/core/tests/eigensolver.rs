mod common;

use std::f64::consts::PI;

use common::{cached, confined, default_grid, periodic_potential};
use qbox_core::{
    alpha_reflection_check, analytic_box_state, assemble_hamiltonian, build_grid, integrate,
    solve, solve_lowest, BoundaryKind, EigenSolution, Error, Potential,
};

fn check_invariants(sol: &EigenSolution) {
    let g = sol.grid();
    let last = g.last();
    let states = sol.states();
    let h = assemble_hamiltonian(g, sol.potential(), sol.bc()).unwrap();
    for (i, s) in states.iter().enumerate() {
        assert_eq!(s.k, i + 1);
        let norm = 0.5 * integrate(g, &s.psi.iter().map(|v| v * v).collect::<Vec<_>>()).unwrap();
        assert!((norm - 1.0).abs() < 1e-10, "{:?} k={} norm {norm}", sol.bc(), s.k);
        assert!(norm > 0.0);
        for t in &states[..i] {
            assert!(g.inner_real(&s.psi, &t.psi).abs() < 1e-8, "{:?} overlap", sol.bc());
        }
        assert!(s.residual < 1e-6 * (1.0 + s.beta.abs()), "{:?} k={} residual", sol.bc(), s.k);
        assert!(h.residual(&h.restrict(&s.psi), s.beta) < 1e-6 * (1.0 + s.beta.abs()));
        match sol.bc() {
            BoundaryKind::Confinement => {
                assert!(s.psi[0].abs() < 1e-9 && s.psi[last].abs() < 1e-9);
                assert!(s.dpsi[0] > 0.0);
            }
            BoundaryKind::Periodic => {
                assert!((s.psi[0] - s.psi[last]).abs() < 1e-7);
                assert!((s.dpsi[0] - s.dpsi[last]).abs() < 1e-7);
            }
            BoundaryKind::VanishingDerivative => {
                assert!(s.dpsi[0].abs() < 1e-7 && s.dpsi[last].abs() < 1e-7);
            }
        }
        if sol.bc() != BoundaryKind::Confinement {
            let first = s.psi.iter().find(|v| v.abs() > 1e-6).unwrap();
            assert!(*first > 0.0);
        }
    }
    for w in states.windows(2) {
        let tol = 1e-6 * (1.0 + w[0].beta.abs());
        if sol.bc() == BoundaryKind::Periodic {
            assert!(w[1].beta > w[0].beta - tol);
        } else {
            assert!(w[1].beta > w[0].beta + tol);
        }
    }
}

#[test]
fn invariants_hold_for_every_family() {
    for bc in BoundaryKind::ALL {
        for alpha in [0.0, 10.0, 100.0] {
            check_invariants(&cached(bc, alpha));
        }
    }
}

#[test]
fn confined_box_spectrum() {
    let sol = confined(0.0);
    for k in 1..=4 {
        let st = sol.state(k).unwrap();
        let scaled = 4.0 * st.beta / (PI * PI);
        let exact = (k * k) as f64;
        assert!((scaled - exact).abs() < 1e-8 * exact, "k={k}: {scaled}");
        let a = analytic_box_state(k, default_grid()).unwrap();
        let err = st.psi.iter().zip(&a.psi).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(err < 1e-7, "k={k}: max-norm error {err}");
    }
}

#[test]
fn neumann_spectrum() {
    let sol = cached(BoundaryKind::VanishingDerivative, 0.0);
    let expected = [0.0, PI * PI / 4.0, PI * PI];
    for (b, e) in sol.betas().iter().zip(expected) {
        assert!((b - e).abs() < 1e-8 * (1.0 + e), "{b} vs {e}");
    }
    // constant mode √1 normalised: ψ = 1
    assert!(sol.states()[0].psi.iter().all(|v| (v - 1.0).abs() < 1e-8));
}

#[test]
fn periodic_spectrum_and_degenerate_pair() {
    let sol = cached(BoundaryKind::Periodic, 0.0);
    let expected = [0.0, PI * PI, PI * PI];
    for (b, e) in sol.betas().iter().zip(expected) {
        assert!((b - e).abs() < 1e-8 * (1.0 + e), "{b} vs {e}");
    }
    let g = default_grid();
    let (a, b) = (&sol.states()[1].psi, &sol.states()[2].psi);
    assert!(g.inner_real(a, b).abs() < 1e-8);
    assert!((g.inner_real(a, a) - 1.0).abs() < 1e-8);
    assert!((g.inner_real(b, b) - 1.0).abs() < 1e-8);
    // the first member of the pair is the even one: ±√2 cos(πξ)
    let n = a.len();
    let odd_part = (0..n).map(|i| (a[i] - a[n - 1 - i]).abs()).fold(0.0, f64::max);
    assert!(odd_part < 1e-7, "{odd_part}");
}

#[test]
fn reflection_of_the_field() {
    let g = default_grid();
    let plus = confined(10.0);
    let minus = solve(g, &Potential::stark(-10.0), BoundaryKind::Confinement, 4).unwrap();
    assert!(alpha_reflection_check(&minus, 1, &plus, 1, 1e-8).unwrap());
    assert!(!alpha_reflection_check(&minus, 1, &plus, 2, 1e-8).unwrap());
    let zero = confined(0.0);
    assert!(alpha_reflection_check(&zero, 1, &zero, 1, 1e-12).unwrap());
    let other = build_grid(501, 8).unwrap();
    let coarse = solve(&other, &Potential::stark(10.0), BoundaryKind::Confinement, 4).unwrap();
    assert!(alpha_reflection_check(&coarse, 1, &plus, 1, 1e-8).is_err());
}

#[test]
fn stark_rows_add_the_potential_diagonal() {
    let g = build_grid(101, 8).unwrap();
    let free = assemble_hamiltonian(&g, &Potential::Uniform, BoundaryKind::Confinement).unwrap();
    let stark = assemble_hamiltonian(&g, &Potential::stark(10.0), BoundaryKind::Confinement).unwrap();
    let (a, b) = (free.to_dense(), stark.to_dense());
    assert_eq!(a.len(), 99);
    for i in 0..a.len() {
        for j in 0..a.len() {
            let shift = if i == j { -10.0 * g.points()[i + 1] } else { 0.0 };
            assert!((b[i][j] - a[i][j] - shift).abs() < 1e-9);
        }
    }
}

#[test]
fn periodic_requires_periodic_potential() {
    let g = build_grid(101, 8).unwrap();
    let err = assemble_hamiltonian(&g, &Potential::stark(10.0), BoundaryKind::Periodic);
    assert!(matches!(err, Err(Error::NonPeriodicPotential { .. })));
    assert!(assemble_hamiltonian(&g, &periodic_potential(&g, 5.0), BoundaryKind::Periodic).is_ok());
}

#[test]
fn count_is_limited_to_a_tenth_of_the_dimension() {
    let g = build_grid(101, 8).unwrap();
    let h = assemble_hamiltonian(&g, &Potential::Uniform, BoundaryKind::Confinement).unwrap();
    assert!(solve_lowest(&h, 9).is_ok());
    assert!(matches!(solve_lowest(&h, 10), Err(Error::TooManyStates { .. })));
    assert!(solve_lowest(&h, 0).is_err());
}

#[test]
fn deterministic_repeat() {
    let g = build_grid(201, 8).unwrap();
    let a = solve(&g, &Potential::stark(10.0), BoundaryKind::VanishingDerivative, 4).unwrap();
    let b = solve(&g, &Potential::stark(10.0), BoundaryKind::VanishingDerivative, 4).unwrap();
    assert_eq!(a.states(), b.states());
}

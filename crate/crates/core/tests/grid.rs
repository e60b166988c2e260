use num_complex::Complex64;
use proptest::prelude::*;
use qbox_core::{build_grid, diff_matrix, integrate, Error};

fn f(x: f64) -> f64 {
    (1.3 * x + 0.4).sin()
}

fn df(x: f64) -> f64 {
    1.3 * (1.3 * x + 0.4).cos()
}

fn d2f(x: f64) -> f64 {
    -1.69 * f(x)
}

/// Least-squares slope of log(err) against log(h).
fn slope(hs: &[f64], errs: &[f64]) -> f64 {
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

fn measure(order: usize, sizes: &[usize]) -> (f64, f64, f64) {
    let mut hs = Vec::new();
    let (mut e1, mut e2, mut eq) = (Vec::new(), Vec::new(), Vec::new());
    for &n in sizes {
        let g = build_grid(n, order).unwrap();
        let v: Vec<f64> = g.points().iter().map(|&x| f(x)).collect();
        let max_err = |got: Vec<f64>, exact: fn(f64) -> f64| {
            got.iter()
                .zip(g.points())
                .map(|(a, &x)| (a - exact(x)).abs())
                .fold(0.0, f64::max)
        };
        hs.push(g.spacing());
        e1.push(max_err(diff_matrix(&g, 1).apply(&v), df));
        e2.push(max_err(diff_matrix(&g, 2).apply(&v), d2f));
        // ∫ f' = f(1) − f(−1)
        let d: Vec<f64> = g.points().iter().map(|&x| df(x)).collect();
        eq.push((integrate(&g, &d).unwrap() - (f(1.0) - f(-1.0))).abs());
    }
    (slope(&hs, &e1), slope(&hs, &e2), slope(&hs, &eq))
}

/// h halved twice; windows sit between the pre-asymptotic range and the
/// rounding floor (which grows like ε/h² for D2).
#[test]
fn convergence_orders() {
    for (order, sizes) in [(2, [41, 81, 161]), (4, [41, 81, 161]), (6, [21, 41, 81]), (8, [11, 21, 41])] {
        let (s1, s2, sq) = measure(order, &sizes);
        let p = order as f64;
        assert!((s1 - p).abs() <= 0.5, "order {order}: D1 slope {s1}");
        assert!((s2 - p).abs() <= 0.5, "order {order}: D2 slope {s2}");
        assert!(sq >= p - 0.5, "order {order}: quadrature slope {sq}");
    }
}

#[test]
fn invalid_grids_are_rejected() {
    assert!(matches!(build_grid(100, 8), Err(Error::EvenPointCount(100))));
    assert!(matches!(build_grid(101, 7), Err(Error::InvalidOrder(7))));
    assert!(matches!(build_grid(101, 0), Err(Error::InvalidOrder(0))));
    assert!(matches!(build_grid(7, 8), Err(Error::TooFewPoints { .. })));
}

#[test]
fn length_mismatch_is_an_error() {
    let g = build_grid(11, 4).unwrap();
    assert!(integrate(&g, &[1.0; 10]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn integration_commutes_with_conjugation(
        re in prop::collection::vec(-10.0..10.0f64, 51),
        im in prop::collection::vec(-10.0..10.0f64, 51),
    ) {
        let g = build_grid(51, 8).unwrap();
        let z: Vec<Complex64> = re.iter().zip(&im).map(|(a, b)| Complex64::new(*a, *b)).collect();
        let zc: Vec<Complex64> = z.iter().map(|v| v.conj()).collect();
        let a = integrate(&g, &z).unwrap();
        let b = integrate(&g, &zc).unwrap();
        prop_assert!((a.conj() - b).norm() < 1e-12);
    }

    #[test]
    fn derivative_rows_annihilate_constants(c in -1e3..1e3f64, n in 10usize..60, order in 1usize..5) {
        let g = build_grid(2 * n + 1, 2 * order).unwrap();
        let v = vec![c; g.n_points()];
        for d in [1, 2] {
            let out = diff_matrix(&g, d).apply(&v);
            prop_assert!(out.iter().all(|x| x.abs() < 1e-9 * (1.0 + c.abs())));
        }
    }

    #[test]
    fn linear_functionals_are_linear(
        a in prop::collection::vec(-1.0..1.0f64, 31),
        b in prop::collection::vec(-1.0..1.0f64, 31),
        s in -5.0..5.0f64,
    ) {
        let g = build_grid(31, 6).unwrap();
        let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + s * y).collect();
        let lhs = integrate(&g, &mix).unwrap();
        let rhs = integrate(&g, &a).unwrap() + s * integrate(&g, &b).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12);
        let d = diff_matrix(&g, 1);
        let dm = d.apply(&mix);
        let (da, db) = (d.apply(&a), d.apply(&b));
        for i in 0..31 {
            prop_assert!((dm[i] - da[i] - s * db[i]).abs() < 1e-9);
        }
    }
}

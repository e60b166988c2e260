//! Shared helpers for the integration tests, including an independent
//! shooting-method oracle for the confined linear Stark problem.

#![allow(dead_code)]

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use qbox_core::{build_grid, solve, BoundaryKind, EigenSolution, Grid, Potential};

/// Default (1001, 8) grid, built once per test binary.
pub fn default_grid() -> &'static Grid {
    static GRID: OnceLock<Grid> = OnceLock::new();
    GRID.get_or_init(|| build_grid(1001, 8).unwrap())
}

pub fn shared_default_grid() -> Arc<Grid> {
    Arc::new(default_grid().clone())
}

/// Number of states kept by the cached solves.
pub const CACHED_STATES: usize = 8;

/// Periodic test potential 5cos(πξ); linear Stark potentials are not periodic.
pub fn periodic_potential(grid: &Grid, amplitude: f64) -> Potential {
    let samples: Vec<(f64, f64)> = grid
        .points()
        .iter()
        .map(|&x| (x, amplitude * (PI * x).cos()))
        .collect();
    Potential::tabulated(grid, &samples).unwrap()
}

/// Potential for a boundary family at strength α: Stark for (c)/(v), the
/// cosine well with amplitude α/2 for (p).
pub fn potential_for(bc: BoundaryKind, alpha: f64) -> Potential {
    match bc {
        BoundaryKind::Periodic if alpha != 0.0 => periodic_potential(default_grid(), alpha / 2.0),
        _ => Potential::stark(alpha),
    }
}

/// Solve on the default grid, memoised per (bc, α) for the test binary.
pub fn cached(bc: BoundaryKind, alpha: f64) -> Arc<EigenSolution> {
    static CACHE: OnceLock<Mutex<HashMap<(char, u64), Arc<EigenSolution>>>> = OnceLock::new();
    let key = (bc.tag(), alpha.to_bits());
    let mut cache = CACHE
        .get_or_init(|| Mutex::new(HashMap::new()))
        .lock()
        .unwrap_or_else(|e| e.into_inner());
    cache
        .entry(key)
        .or_insert_with(|| {
            Arc::new(solve(default_grid(), &potential_for(bc, alpha), bc, CACHED_STATES).unwrap())
        })
        .clone()
}

/// Confined Stark solve on the default grid.
pub fn confined(alpha: f64) -> Arc<EigenSolution> {
    cached(BoundaryKind::Confinement, alpha)
}

/// Quantities of the k-th confined eigenstate of −ψ″ − αξψ = βψ.
#[derive(Debug, Clone, Copy)]
pub struct Shot {
    pub beta: f64,
    /// ψ′(−1) of the state normalised with ½∫ψ² = 1.
    pub slope_left: f64,
    pub slope_right: f64,
    pub mean_xi: f64,
}

/// RK4 integration of ψ″ = −(β + αξ)ψ from ψ(−1) = 0, ψ′(−1) = 1 with
/// `steps` uniform steps; Simpson moments ∫ψ² and ∫ξψ² along the way.
fn integrate(alpha: f64, beta: f64, steps: usize) -> (f64, f64, f64, f64) {
    let h = 2.0 / steps as f64;
    let f = |x: f64, y: [f64; 2]| [y[1], -(beta + alpha * x) * y[0]];
    let mut y = [0.0, 1.0];
    let mut m0 = 0.0;
    let mut m1 = 0.0;
    for j in 0..=steps {
        let x = -1.0 + j as f64 * h;
        let w = if j == 0 || j == steps {
            1.0
        } else if j % 2 == 1 {
            4.0
        } else {
            2.0
        };
        m0 += w * y[0] * y[0];
        m1 += w * x * y[0] * y[0];
        if j == steps {
            break;
        }
        let k1 = f(x, y);
        let k2 = f(x + h / 2.0, [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]]);
        let k3 = f(x + h / 2.0, [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]]);
        let k4 = f(x + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        for c in 0..2 {
            y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
    }
    (y[0], y[1], m0 * h / 3.0, m1 * h / 3.0)
}

fn shoot_once(alpha: f64, k: usize, steps: usize) -> Shot {
    let end = |b: f64| integrate(alpha, b, steps).0;
    let mut lo = -alpha.abs() - 1.0;
    let mut f_lo = end(lo);
    let mut found = 0;
    let step = 0.25;
    let (mut a, mut b) = (lo, lo);
    while found < k {
        let hi = lo + step;
        let f_hi = end(hi);
        if f_lo.signum() != f_hi.signum() {
            found += 1;
            a = lo;
            b = hi;
        }
        lo = hi;
        f_lo = f_hi;
    }
    let mut fa = end(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = end(m);
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    let beta = 0.5 * (a + b);
    let (_, slope, m0, m1) = integrate(alpha, beta, steps);
    // ½∫ψ² = 1 rescales the unit initial slope by 1/√(½ m0)
    let scale = 1.0 / (0.5 * m0).sqrt();
    Shot {
        beta,
        slope_left: scale,
        slope_right: slope * scale,
        mean_xi: m1 / m0,
    }
}

/// Richardson-extrapolated (fourth order) shooting values for state k.
pub fn shoot(alpha: f64, k: usize) -> Shot {
    let n = 4000;
    let coarse = shoot_once(alpha, k, n);
    let fine = shoot_once(alpha, k, 2 * n);
    let r = |c: f64, f: f64| (16.0 * f - c) / 15.0;
    Shot {
        beta: r(coarse.beta, fine.beta),
        slope_left: r(coarse.slope_left, fine.slope_left),
        slope_right: r(coarse.slope_right, fine.slope_right),
        mean_xi: r(coarse.mean_xi, fine.mean_xi),
    }
}

/// Golden values from `shoot`, frozen: (α, k, β, ψ′(−1), ψ′(+1), ⟨ξ⟩).
pub const GOLDEN: [(f64, usize, f64, f64, f64, f64); 8] = [
    (10.0, 1, 8.877128075734458e-1, 6.504022538037550e-1, -4.519183896651366e0, 2.882532492202035e-1),
    (10.0, 2, 1.022526409593541e1, 3.015664782223268e0, 5.393907125520608e0, -4.520980377096838e-2),
    (10.0, 3, 2.251062910077002e1, 5.766161177936917e0, -7.297164841905820e0, -5.908811571978185e-2),
    (10.0, 4, 3.966912538810185e1, 8.258101301081158e0, 9.391285167585940e0, -3.806712257615259e-2),
    (100.0, 1, -4.962700285867476e1, 9.220528352761605e-5, -1.414213562403151e1, 6.641800190861699e-1),
    (100.0, 2, -1.192779833863698e1, 5.539824918477063e-3, 1.414213670877431e1, 4.128520912231155e-1),
    (100.0, 3, 1.893712022448063e1, 9.739159402916744e-2, -1.414247096948017e1, 2.071174822454220e-1),
    (100.0, 4, 4.623552953085684e1, 7.685612073418295e-1, 1.416300414211030e1, 2.706542422572398e-2),
];


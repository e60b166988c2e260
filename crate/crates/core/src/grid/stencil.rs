//! Exact rational construction of finite-difference stencils and Gregory
//! end corrections. Everything is solved over `BigRational` and rounded to
//! `f64` once, so boundary stencils carry no elimination error.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Solves `a x = b` exactly by Gauss-Jordan elimination.
fn solve(mut a: Vec<Vec<BigRational>>, mut b: Vec<BigRational>) -> Vec<BigRational> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .expect("Vandermonde system with distinct nodes is nonsingular");
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].recip();
        for v in a[col].iter_mut() {
            *v = &*v * &inv;
        }
        b[col] = &b[col] * &inv;
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for c in col..n {
                let delta = &factor * &a[col][c];
                a[r][c] = &a[r][c] - delta;
            }
            let delta = &factor * &b[col];
            b[r] = &b[r] - delta;
        }
    }
    b
}

/// Transposed Vandermonde system `Σ_j x_j nodes_j^m = rhs_m`, m = 0..len.
fn vandermonde(nodes: &[i64], rhs: Vec<BigRational>) -> Vec<BigRational> {
    let a = (0..nodes.len())
        .map(|m| {
            nodes
                .iter()
                .map(|&o| {
                    let mut p = BigRational::one();
                    for _ in 0..m {
                        p *= int(o);
                    }
                    p
                })
                .collect()
        })
        .collect();
    solve(a, rhs)
}

fn factorial(k: usize) -> BigRational {
    (1..=k as i64).fold(BigRational::one(), |acc, v| acc * int(v))
}

/// Unit-spacing weights `c_j` such that `Σ_j c_j f(x + o_j) ≈ f^(d)(x)` with
/// the maximal polynomial exactness the offsets allow.
pub(crate) fn fd_weights(offsets: &[i64], derivative: usize) -> Vec<f64> {
    assert!(offsets.len() > derivative);
    let rhs = (0..offsets.len())
        .map(|m| {
            if m == derivative {
                factorial(derivative)
            } else {
                BigRational::zero()
            }
        })
        .collect();
    vandermonde(offsets, rhs)
        .iter()
        .map(|w| w.to_f64().expect("finite stencil weight"))
        .collect()
}

/// Bernoulli numbers B_0..=B_m (convention B_1 = -1/2).
fn bernoulli(m: usize) -> Vec<BigRational> {
    let mut b: Vec<BigRational> = Vec::with_capacity(m + 1);
    b.push(BigRational::one());
    for k in 1..=m {
        let mut acc = BigRational::zero();
        let mut binom = BigRational::one(); // C(k+1, j)
        for (j, bj) in b.iter().enumerate() {
            acc += &binom * bj;
            binom = binom * int((k + 1 - j) as i64) / int(j as i64 + 1);
        }
        b.push(-acc / int(k as i64 + 1));
    }
    b
}

/// End corrections `c_0..=c_degree` (unit spacing) added to trapezoid weights
/// at one end so that the composite rule integrates polynomials of degree
/// `≤ degree` exactly.
pub(crate) fn gregory_corrections(degree: usize) -> Vec<f64> {
    let bern = bernoulli(degree + 1);
    let nodes: Vec<i64> = (0..=degree as i64).collect();
    let rhs = (0..=degree)
        .map(|m| {
            if m % 2 == 1 {
                &bern[m + 1] / int(m as i64 + 1)
            } else {
                BigRational::zero()
            }
        })
        .collect();
    vandermonde(&nodes, rhs)
        .iter()
        .map(|w| w.to_f64().expect("finite quadrature weight"))
        .collect()
}

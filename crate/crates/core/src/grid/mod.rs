//! Uniform grid on ξ ∈ [-1, +1] with high-order differentiation operators and
//! a Gregory end-corrected trapezoid rule of matching order.

mod stencil;

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::model::BoundaryKind;

pub const DEFAULT_POINTS: usize = 1001;
pub const DEFAULT_ORDER: usize = 8;

/// Values a grid operator can act on: real or complex samples.
pub trait Sample:
    Copy + Zero + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
}

impl<T> Sample for T where
    T: Copy + Zero + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T> + Send + Sync
{
}

/// One row of a differentiation matrix, stored sparsely.
#[derive(Debug, Clone, PartialEq)]
pub struct StencilRow {
    pub cols: Vec<usize>,
    pub coeffs: Vec<f64>,
}

impl StencilRow {
    /// Rows sum to zero, so the stencil acts on differences from the sample
    /// with the dominant weight; the 1/h^d amplified roundoff then follows
    /// the local variation of `f` rather than its magnitude.
    fn apply<T: Sample>(&self, f: &[T]) -> T {
        let pivot = (0..self.coeffs.len())
            .max_by(|&a, &b| self.coeffs[a].abs().total_cmp(&self.coeffs[b].abs()))
            .unwrap_or(0);
        let anchor = f[self.cols[pivot]];
        self.cols
            .iter()
            .zip(&self.coeffs)
            .enumerate()
            .filter(|&(k, _)| k != pivot)
            .fold(T::zero(), |acc, (_, (&j, &c))| acc + (f[j] - anchor) * c)
    }
}

/// Differentiation matrix of derivative order 1 or 2.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffOperator {
    derivative: usize,
    rows: Vec<StencilRow>,
}

impl DiffOperator {
    pub fn derivative(&self) -> usize {
        self.derivative
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, i: usize) -> &StencilRow {
        &self.rows[i]
    }

    pub fn apply<T: Sample>(&self, f: &[T]) -> Vec<T> {
        assert_eq!(f.len(), self.rows.len(), "operator/vector size mismatch");
        self.rows.iter().map(|r| r.apply(f)).collect()
    }

    /// Derivative at a single node.
    pub fn apply_at<T: Sample>(&self, i: usize, f: &[T]) -> T {
        self.rows[i].apply(f)
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.rows.len();
        self.rows
            .iter()
            .map(|r| {
                let mut dense = vec![0.0; n];
                for (&j, &c) in r.cols.iter().zip(&r.coeffs) {
                    dense[j] += c;
                }
                dense
            })
            .collect()
    }
}

/// Quadrature weights on the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    weights: Vec<f64>,
}

impl Quadrature {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<T: Sample>(&self, f: &[T]) -> Result<T> {
        if f.len() != self.weights.len() {
            return Err(Error::LengthMismatch {
                expected: self.weights.len(),
                got: f.len(),
            });
        }
        Ok(self
            .weights
            .iter()
            .zip(f)
            .fold(T::zero(), |acc, (&w, &v)| acc + v * w))
    }
}

#[derive(Debug, Clone)]
pub struct Grid {
    n_points: usize,
    fd_order: usize,
    spacing: f64,
    points: Vec<f64>,
    quadrature: Quadrature,
    d1: DiffOperator,
    d2: DiffOperator,
    d1_periodic: DiffOperator,
    d2_periodic: DiffOperator,
}

/// Builds the grid and all of its operators. `n_points` must be odd and at
/// least `fd_order + 3`.
pub fn build_grid(n_points: usize, fd_order: usize) -> Result<Grid> {
    if fd_order == 0 || fd_order % 2 == 1 {
        return Err(Error::InvalidOrder(fd_order));
    }
    if n_points % 2 == 0 {
        return Err(Error::EvenPointCount(n_points));
    }
    let min = fd_order + 3;
    if n_points < min {
        return Err(Error::TooFewPoints {
            order: fd_order,
            n_points,
            min,
        });
    }

    let intervals = (n_points - 1) as f64;
    let spacing = 2.0 / intervals;
    // Symmetric construction: ξ_{n-1-i} = -ξ_i bit for bit.
    let points = (0..n_points)
        .map(|i| (2.0 * i as f64 - intervals) / intervals)
        .collect();

    Ok(Grid {
        n_points,
        fd_order,
        spacing,
        points,
        quadrature: gregory_quadrature(n_points, fd_order, spacing),
        d1: bounded_operator(n_points, fd_order, 1, spacing),
        d2: bounded_operator(n_points, fd_order, 2, spacing),
        d1_periodic: periodic_operator(n_points, fd_order, 1, spacing),
        d2_periodic: periodic_operator(n_points, fd_order, 2, spacing),
    })
}

/// Differentiation matrix with one-sided closures of full order at the ends.
pub fn diff_matrix(grid: &Grid, derivative: usize) -> DiffOperator {
    match derivative {
        1 => grid.d1.clone(),
        2 => grid.d2.clone(),
        other => panic!("only first and second derivatives are supported, got {other}"),
    }
}

/// `Σ w_i f_i` with the grid's quadrature rule.
pub fn integrate<T: Sample>(grid: &Grid, f: &[T]) -> Result<T> {
    grid.quadrature.integrate(f)
}

impl Grid {
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn fd_order(&self) -> usize {
        self.fd_order
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn quadrature(&self) -> &Quadrature {
        &self.quadrature
    }

    pub fn weights(&self) -> &[f64] {
        self.quadrature.weights()
    }

    pub fn last(&self) -> usize {
        self.n_points - 1
    }

    /// D1 with one-sided closures at both ends, whatever the boundary family.
    pub fn first_derivative(&self) -> &DiffOperator {
        &self.d1
    }

    /// D2 with one-sided closures at both ends.
    pub fn second_derivative(&self) -> &DiffOperator {
        &self.d2
    }

    /// First-derivative operator appropriate for the boundary family: the
    /// periodic variant wraps stencils modulo `n - 1`.
    pub fn d1(&self, bc: BoundaryKind) -> &DiffOperator {
        match bc {
            BoundaryKind::Periodic => &self.d1_periodic,
            _ => &self.d1,
        }
    }

    pub fn d2(&self, bc: BoundaryKind) -> &DiffOperator {
        match bc {
            BoundaryKind::Periodic => &self.d2_periodic,
            _ => &self.d2,
        }
    }

    /// ½-weighted inner product `½ Σ w_i conj(a_i) b_i`.
    pub fn inner(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        debug_assert_eq!(a.len(), self.n_points);
        self.weights()
            .iter()
            .zip(a.iter().zip(b))
            .fold(Complex64::zero(), |acc, (&w, (x, y))| acc + x.conj() * y * w)
            * 0.5
    }

    pub fn inner_real(&self, a: &[f64], b: &[f64]) -> f64 {
        0.5 * self
            .weights()
            .iter()
            .zip(a.iter().zip(b))
            .map(|(&w, (x, y))| w * x * y)
            .sum::<f64>()
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.n_points == other.n_points && self.fd_order == other.fd_order
    }

    pub fn check_same(&self, other: &Grid) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left: self.n_points,
                right: other.n_points,
                left_order: self.fd_order,
                right_order: other.fd_order,
            })
        }
    }
}

fn bounded_operator(n: usize, order: usize, derivative: usize, h: f64) -> DiffOperator {
    let half = order / 2;
    // Centred stencils reach `half` nodes each way; one-sided closures use
    // order + derivative nodes, the count needed for the same accuracy.
    let width = order + derivative;
    let scale = h.powi(derivative as i32);
    let centred: Vec<f64> = stencil::fd_weights(&offsets(-(half as i64), half as i64), derivative)
        .into_iter()
        .map(|w| w / scale)
        .collect();

    let mut rows = Vec::with_capacity(n);
    let mut left_cache: Vec<Vec<f64>> = Vec::new();
    for i in 0..half {
        let offs = offsets(-(i as i64), (width - 1 - i) as i64);
        left_cache.push(
            stencil::fd_weights(&offs, derivative)
                .into_iter()
                .map(|w| w / scale)
                .collect(),
        );
    }
    // Mirror image of the left closures: odd derivatives flip sign.
    let parity = if derivative % 2 == 0 { 1.0 } else { -1.0 };

    for i in 0..n {
        let row = if i < half {
            StencilRow {
                cols: (0..width).collect(),
                coeffs: left_cache[i].clone(),
            }
        } else if i + half >= n {
            let k = n - 1 - i;
            StencilRow {
                cols: (0..width).map(|j| n - 1 - j).collect(),
                coeffs: left_cache[k].iter().map(|c| parity * c).collect(),
            }
        } else {
            StencilRow {
                cols: (i - half..=i + half).collect(),
                coeffs: centred.clone(),
            }
        };
        rows.push(row);
    }
    DiffOperator { derivative, rows }
}

fn periodic_operator(n: usize, order: usize, derivative: usize, h: f64) -> DiffOperator {
    let half = order / 2;
    let period = n - 1;
    let scale = h.powi(derivative as i32);
    let centred: Vec<f64> = stencil::fd_weights(&offsets(-(half as i64), half as i64), derivative)
        .into_iter()
        .map(|w| w / scale)
        .collect();
    let rows = (0..n)
        .map(|i| {
            let base = i % period;
            StencilRow {
                cols: (0..=2 * half)
                    .map(|k| (base + period + k - half) % period)
                    .collect(),
                coeffs: centred.clone(),
            }
        })
        .collect();
    DiffOperator { derivative, rows }
}

fn offsets(lo: i64, hi: i64) -> Vec<i64> {
    (lo..=hi).collect()
}

fn gregory_quadrature(n: usize, order: usize, h: f64) -> Quadrature {
    let corrections = stencil::gregory_corrections(order);
    let mut weights = vec![h; n];
    weights[0] = 0.5 * h;
    weights[n - 1] = 0.5 * h;
    for (j, c) in corrections.iter().enumerate() {
        weights[j] += c * h;
        weights[n - 1 - j] += c * h;
    }
    Quadrature { weights }
}

//! Discretised Hamiltonian −∂²/∂ξ² + V(ξ) and its lowest eigenpairs.
//!
//! Each boundary family reduces the nodal unknowns differently:
//! (c) drops the two wall nodes, (p) identifies the last node with the first,
//! and (v) eliminates the wall nodes through the one-sided D1 rows. The reduced
//! operator is dense-diagonalised; eigenvectors of the nonsymmetric (c)/(v)
//! operators come from shifted inverse iteration on the band structure.

use faer::linalg::solvers::Solve;
use std::sync::Arc;

use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::banded::{bandwidths, BandLu};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::grid::Grid;
use crate::model::{BoundaryKind, Potential};

/// Relative imaginary part above which an eigenvalue counts as complex.
pub const REALITY_TOL: f64 = 1e-8;
/// Relative eigenvalue gap below which states are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-6;

const RESIDUAL_TOL: f64 = 1e-6;
const DIRICHLET_TOL: f64 = 1e-9;
const DERIVATIVE_TOL: f64 = 1e-7;
const SIGN_THRESHOLD: f64 = 1e-6;
const MAX_INVERSE_ITERATIONS: usize = 30;

/// Reduced matrix of −D2 + diag(V) for one boundary family.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    grid: Arc<Grid>,
    bc: BoundaryKind,
    potential: Potential,
    /// Grid index carried by each unknown.
    unknowns: Vec<usize>,
    /// Each grid value as a combination of unknowns.
    extension: Vec<Vec<(usize, f64)>>,
    rows: Vec<Vec<(usize, f64)>>,
}

pub fn assemble_hamiltonian(
    grid: &Grid,
    potential: &Potential,
    bc: BoundaryKind,
) -> Result<Hamiltonian> {
    if bc == BoundaryKind::Periodic {
        potential.check_periodic(grid)?;
    }
    let v = potential.values(grid)?;
    let n = grid.n_points();
    let last = grid.last();

    let (unknowns, extension): (Vec<usize>, Vec<Vec<(usize, f64)>>) = match bc {
        BoundaryKind::Confinement => (
            (1..last).collect(),
            (0..n)
                .map(|i| if i == 0 || i == last { vec![] } else { vec![(i - 1, 1.0)] })
                .collect(),
        ),
        BoundaryKind::Periodic => (
            (0..last).collect(),
            (0..n).map(|i| vec![(i % last, 1.0)]).collect(),
        ),
        BoundaryKind::VanishingDerivative => {
            let d1 = grid.d1(bc);
            let ghost = |i: usize| -> Vec<(usize, f64)> {
                let row = d1.row(i);
                let diag = row
                    .cols
                    .iter()
                    .zip(&row.coeffs)
                    .find(|(&c, _)| c == i)
                    .map(|(_, &w)| w)
                    .expect("boundary row touches its own node");
                row.cols
                    .iter()
                    .zip(&row.coeffs)
                    .filter(|(&c, _)| c != i)
                    .map(|(&c, &w)| (c - 1, -w / diag))
                    .collect()
            };
            (
                (1..last).collect(),
                (0..n)
                    .map(|i| if i == 0 || i == last { ghost(i) } else { vec![(i - 1, 1.0)] })
                    .collect(),
            )
        }
    };

    let d2 = grid.d2(bc);
    let rows = unknowns
        .iter()
        .map(|&i| {
            let mut dense: Vec<(usize, f64)> = Vec::new();
            let mut add = |j: usize, w: f64| match dense.iter_mut().find(|(c, _)| *c == j) {
                Some(e) => e.1 += w,
                None => dense.push((j, w)),
            };
            let stencil = d2.row(i);
            for (&j, &w) in stencil.cols.iter().zip(&stencil.coeffs) {
                for &(u, c) in &extension[j] {
                    add(u, -w * c);
                }
            }
            for &(u, c) in &extension[i] {
                add(u, v[i] * c);
            }
            dense.sort_by_key(|e| e.0);
            dense
        })
        .collect();

    Ok(Hamiltonian {
        grid: Arc::new(grid.clone()),
        bc,
        potential: potential.clone(),
        unknowns,
        extension,
        rows,
    })
}

impl Hamiltonian {
    pub fn dim(&self) -> usize {
        self.unknowns.len()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn bc(&self) -> BoundaryKind {
        self.bc
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    /// Grid index of each unknown.
    pub fn unknowns(&self) -> &[usize] {
        &self.unknowns
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|row| {
                let mut r = vec![0.0; self.dim()];
                for &(j, w) in row {
                    r[j] = w;
                }
                r
            })
            .collect()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(j, w)| w * x[j]).sum())
            .collect()
    }

    /// Grid values from the unknowns.
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        self.extension
            .iter()
            .map(|e| e.iter().map(|&(u, c)| c * x[u]).sum())
            .collect()
    }

    /// Unknowns from grid values.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.unknowns.iter().map(|&i| full[i]).collect()
    }

    /// max_i |(Hx)_i − βx_i| over the unknowns.
    pub fn residual(&self, x: &[f64], beta: f64) -> f64 {
        self.apply(x)
            .iter()
            .zip(x)
            .map(|(hx, xi)| (hx - beta * xi).abs())
            .fold(0.0, f64::max)
    }

    fn rayleigh(&self, x: &[f64]) -> f64 {
        let hx = self.apply(x);
        dot(x, &hx) / dot(x, x)
    }

    fn dense_matrix(&self) -> Mat<f64> {
        let mut m = Mat::<f64>::zeros(self.dim(), self.dim());
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, w) in row {
                m[(i, j)] = w;
            }
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenState {
    /// Index starting at 1.
    pub k: usize,
    pub beta: f64,
    pub psi: Vec<f64>,
    /// Full-order D1 applied to `psi`.
    pub dpsi: Vec<f64>,
    /// max |(Hψ)_i − βψ_i| on the unknowns after normalisation.
    pub residual: f64,
}

/// A real eigenvalue discarded because its eigenvector violated the boundary
/// conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedMode {
    pub beta: f64,
    pub boundary_residual: f64,
}

#[derive(Debug, Clone)]
pub struct EigenSolution {
    bc: BoundaryKind,
    potential: Potential,
    grid: Arc<Grid>,
    states: Vec<EigenState>,
    dropped: Vec<DroppedMode>,
}

impl EigenSolution {
    pub fn bc(&self) -> BoundaryKind {
        self.bc
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn shared_grid(&self) -> Arc<Grid> {
        Arc::clone(&self.grid)
    }

    pub fn states(&self) -> &[EigenState] {
        &self.states
    }

    pub fn dropped(&self) -> &[DroppedMode] {
        &self.dropped
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn betas(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.beta).collect()
    }

    /// State `k`, counting from 1.
    pub fn state(&self, k: usize) -> Result<&EigenState> {
        if k == 0 || k > self.states.len() {
            return Err(Error::InvalidStateIndex(k));
        }
        Ok(&self.states[k - 1])
    }
}

/// Boundary-condition residual of a grid function and its derivative.
pub fn boundary_residual(bc: BoundaryKind, psi: &[f64], dpsi: &[f64]) -> f64 {
    let last = psi.len() - 1;
    match bc {
        BoundaryKind::Confinement => psi[0].abs().max(psi[last].abs()),
        BoundaryKind::Periodic => (psi[last] - psi[0]).abs().max((dpsi[last] - dpsi[0]).abs()),
        BoundaryKind::VanishingDerivative => dpsi[0].abs().max(dpsi[last].abs()),
    }
}

fn boundary_tolerance(bc: BoundaryKind) -> f64 {
    match bc {
        BoundaryKind::Confinement => DIRICHLET_TOL,
        _ => DERIVATIVE_TOL,
    }
}

/// Lowest `count` eigenpairs of `h` ordered by eigenvalue.
pub fn solve_lowest(h: &Hamiltonian, count: usize) -> Result<EigenSolution> {
    if count == 0 {
        return Err(Error::InvalidStateIndex(0));
    }
    let max = h.dim() / 10;
    if count > max {
        return Err(Error::TooManyStates {
            requested: count,
            max,
        });
    }

    let dense = h.dense_matrix();
    let spectrum = if h.bc == BoundaryKind::Periodic {
        Spectrum::symmetric(&dense)?
    } else {
        Spectrum::general(&dense)?
    };
    let band = if h.bc == BoundaryKind::Periodic {
        None
    } else {
        Some(bandwidths(&h.rows))
    };

    let mut states: Vec<EigenState> = Vec::with_capacity(count);
    let mut dropped = Vec::new();
    let mut pos = 0;
    while states.len() < count {
        let Some(&(re, im)) = spectrum.values.get(pos) else {
            return Err(Error::Decomposition(format!(
                "only {} admissible eigenpairs found",
                states.len()
            )));
        };
        if im.abs() >= REALITY_TOL * (1.0 + re.abs()) {
            return Err(Error::ComplexPair { re, im: im.abs() });
        }
        // Collect the degenerate cluster starting here.
        let mut end = pos + 1;
        while let Some(&(r, i)) = spectrum.values.get(end) {
            if (r - re).abs() < DEGENERACY_TOL * (1.0 + re.abs())
                && i.abs() < REALITY_TOL * (1.0 + r.abs())
            {
                end += 1;
            } else {
                break;
            }
        }
        let vectors = match (&spectrum.vectors, band) {
            (Some(u), _) => {
                let start = (pos..end)
                    .map(|c| (0..h.dim()).map(|r| u[(r, c)]).collect())
                    .collect();
                refine_dense(&dense, spectrum.values[pos].0, start)
            }
            (None, Some((kl, ku))) => {
                let mean = spectrum.values[pos..end].iter().map(|v| v.0).sum::<f64>()
                    / (end - pos) as f64;
                inverse_iteration(h, kl, ku, mean, end - pos)?
            }
            (None, None) => unreachable!("nonsymmetric spectra are always banded"),
        };
        for candidate in finish_cluster(h, vectors)? {
            let boundary = boundary_residual(h.bc, &candidate.psi, &candidate.dpsi);
            if boundary > boundary_tolerance(h.bc) {
                dropped.push(DroppedMode {
                    beta: candidate.beta,
                    boundary_residual: boundary,
                });
                continue;
            }
            if candidate.residual > RESIDUAL_TOL * (1.0 + candidate.beta.abs()) {
                return Err(Error::NoConvergence {
                    eigenvalue: candidate.beta,
                    residual: candidate.residual,
                });
            }
            if states.len() < count {
                states.push(EigenState {
                    k: states.len() + 1,
                    ..candidate
                });
            }
        }
        pos = end;
    }

    Ok(EigenSolution {
        bc: h.bc,
        potential: h.potential.clone(),
        grid: h.grid.clone(),
        states,
        dropped,
    })
}

/// Assembles and solves in one step.
pub fn solve(
    grid: &Grid,
    potential: &Potential,
    bc: BoundaryKind,
    count: usize,
) -> Result<EigenSolution> {
    solve_lowest(&assemble_hamiltonian(grid, potential, bc)?, count)
}

/// Independent solves of the linear Stark problem for each α.
pub fn scan_alpha(
    grid: &Grid,
    alphas: &[f64],
    bc: BoundaryKind,
    count: usize,
    exec: Execution,
) -> Vec<Result<EigenSolution>> {
    exec.map(alphas, |&alpha| solve(grid, &Potential::stark(alpha), bc, count))
}

struct Spectrum {
    /// (re, im) sorted by real part.
    values: Vec<(f64, f64)>,
    /// Matching eigenvector columns when the solver produced them.
    vectors: Option<Mat<f64>>,
}

impl Spectrum {
    fn symmetric(m: &Mat<f64>) -> Result<Self> {
        let evd = m
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Decomposition(format!("{e:?}")))?;
        let s = evd.S().column_vector();
        Ok(Spectrum {
            values: (0..s.nrows()).map(|i| (s[i], 0.0)).collect(),
            vectors: Some(evd.U().to_owned()),
        })
    }

    fn general(m: &Mat<f64>) -> Result<Self> {
        let ev = m
            .eigenvalues()
            .map_err(|e| Error::Decomposition(format!("{e:?}")))?;
        let mut values: Vec<(f64, f64)> = ev.iter().map(|z| (z.re, z.im)).collect();
        values.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        Ok(Spectrum {
            values,
            vectors: None,
        })
    }
}

/// Block inverse iteration for a cluster of `size` eigenvalues near `beta`.
fn inverse_iteration(
    h: &Hamiltonian,
    kl: usize,
    ku: usize,
    beta: f64,
    size: usize,
) -> Result<Vec<Vec<f64>>> {
    let n = h.dim();
    let shift = beta - 1e-10 * (1.0 + beta.abs());
    let lu = BandLu::factor(&h.rows, kl, ku, shift);
    let mut block: Vec<Vec<f64>> = (0..size)
        .map(|j| {
            (0..n)
                .map(|i| 1.0 + (0.7 * (j + 1) as f64 * (i + 1) as f64).sin())
                .collect()
        })
        .collect();
    let tol = 1e-10 * (1.0 + beta.abs());
    let mut worst = f64::INFINITY;
    for _ in 0..MAX_INVERSE_ITERATIONS {
        for x in block.iter_mut() {
            lu.solve_in_place(x);
        }
        orthonormalize(&mut block, dot);
        worst = block
            .iter()
            .map(|x| h.residual(x, h.rayleigh(x)) / max_abs(x))
            .fold(0.0, f64::max);
        if worst < tol {
            return Ok(block);
        }
    }
    if worst < RESIDUAL_TOL * (1.0 + beta.abs()) {
        Ok(block)
    } else {
        Err(Error::NoConvergence {
            eigenvalue: beta,
            residual: worst,
        })
    }
}

/// Two steps of shifted inverse iteration with a dense LU, polishing
/// eigenvectors of operators without band structure.
fn refine_dense(dense: &Mat<f64>, beta: f64, mut block: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let n = dense.nrows();
    let shift = beta - 1e-10 * (1.0 + beta.abs());
    let shifted = Mat::<f64>::from_fn(n, n, |i, j| {
        dense[(i, j)] - if i == j { shift } else { 0.0 }
    });
    let lu = shifted.partial_piv_lu();
    for _ in 0..2 {
        let rhs = Mat::<f64>::from_fn(n, block.len(), |i, j| block[j][i]);
        let x = lu.solve(&rhs);
        for (j, col) in block.iter_mut().enumerate() {
            for (i, v) in col.iter_mut().enumerate() {
                *v = x[(i, j)];
            }
        }
        orthonormalize(&mut block, dot);
    }
    block
}

/// Normalises, orders and signs a cluster of reduced eigenvectors.
fn finish_cluster(h: &Hamiltonian, vectors: Vec<Vec<f64>>) -> Result<Vec<EigenState>> {
    let grid = &h.grid;
    let mut full: Vec<Vec<f64>> = vectors.iter().map(|x| h.expand(x)).collect();
    orthonormalize(&mut full, |a, b| grid.inner_real(a, b));
    if full.len() > 1 {
        full = most_even_first(grid, full);
    }
    full.into_iter()
        .map(|mut psi| {
            let norm = grid.inner_real(&psi, &psi).sqrt();
            if !(norm > 0.0) {
                return Err(Error::ZeroNorm(norm));
            }
            psi.iter_mut().for_each(|p| *p /= norm);
            let mut dpsi = grid.first_derivative().apply(&psi);
            if flip_sign(h.bc, &psi, &dpsi) {
                psi.iter_mut().for_each(|p| *p = -*p);
                dpsi.iter_mut().for_each(|p| *p = -*p);
            }
            let reduced = h.restrict(&psi);
            let beta = h.rayleigh(&reduced);
            let residual = h.residual(&reduced, beta);
            Ok(EigenState {
                k: 0,
                beta,
                psi,
                dpsi,
                residual,
            })
        })
        .collect()
}

fn flip_sign(bc: BoundaryKind, psi: &[f64], dpsi: &[f64]) -> bool {
    match bc {
        BoundaryKind::Confinement => dpsi[0] < 0.0,
        _ => psi
            .iter()
            .find(|p| p.abs() > SIGN_THRESHOLD)
            .is_some_and(|p| *p < 0.0),
    }
}

/// Rotates an orthonormal cluster so that its first member has the smallest
/// odd part under ξ → −ξ.
fn most_even_first(grid: &Grid, cluster: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let m = cluster.len();
    let odd: Vec<Vec<f64>> = cluster
        .iter()
        .map(|v| v.iter().zip(v.iter().rev()).map(|(a, b)| 0.5 * (a - b)).collect())
        .collect();
    let gram = Mat::<f64>::from_fn(m, m, |i, j| grid.inner_real(&odd[i], &odd[j]));
    let Ok(evd) = gram.self_adjoint_eigen(Side::Lower) else {
        return cluster;
    };
    let u = evd.U();
    (0..m)
        .map(|c| {
            (0..cluster[0].len())
                .map(|i| (0..m).map(|r| u[(r, c)] * cluster[r][i]).sum())
                .collect()
        })
        .collect()
}

/// Modified Gram–Schmidt under the given inner product.
fn orthonormalize(block: &mut [Vec<f64>], inner: impl Fn(&[f64], &[f64]) -> f64) {
    for j in 0..block.len() {
        let (done, rest) = block.split_at_mut(j);
        let x = &mut rest[0];
        for q in done.iter() {
            let c = inner(q, x);
            x.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
        }
        let norm = inner(x, x).sqrt();
        if norm > 0.0 {
            x.iter_mut().for_each(|a| *a /= norm);
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

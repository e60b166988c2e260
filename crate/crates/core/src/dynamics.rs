//! Spectral time evolution Ψ(τ) = Σ c_r e^{−iβ_r τ} ψ_r and the two
//! alternative forms of d⟨ξ⟩/dτ and d⟨p⟩/dτ.
//!
//! Matrix elements over the real basis, all ½-weighted:
//! X_sr = ½∫ψ_s ξ ψ_r, D_sr = ½∫ψ_s ψ_r′, F_sr = ½∫ψ_s(−V′)ψ_r.
//! Boundary pieces per pair: Bx_sr = I_ξ restricted to (s, r), and
//! Bp_sr = −iI_p restricted to (s, r) with ψ_r″ = (V − β_r)ψ_r.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigensolver::EigenSolution;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::BoundaryKind;
use crate::observables::{
    expectation, Evolving, Observable, StateVector,
};

const I: Complex64 = Complex64::new(0.0, 1.0);

type Table = Vec<Vec<f64>>;

/// An eigenbasis with its precomputed matrix elements.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    solution: EigenSolution,
    x: Table,
    d: Table,
    f: Table,
    bx: Table,
    bp: Table,
}

impl SpectralBasis {
    pub fn new(solution: EigenSolution) -> Result<Arc<Self>> {
        let grid = solution.grid();
        let n = grid.n_points();
        let last = n - 1;
        let dv = solution.potential().derivative(grid, solution.bc())?;
        let v = solution.potential().values(grid)?;
        let states = solution.states();
        let r = states.len();
        let pair = |g: &dyn Fn(usize, usize) -> f64| -> Table {
            (0..r).map(|s| (0..r).map(|q| g(s, q)).collect()).collect()
        };
        let x = pair(&|s, q| {
            let f: Vec<f64> = (0..n)
                .map(|i| states[s].psi[i] * grid.points()[i] * states[q].psi[i])
                .collect();
            0.5 * integrate_real(grid.weights(), &f)
        });
        let d = pair(&|s, q| grid.inner_real(&states[s].psi, &states[q].dpsi));
        let f = pair(&|s, q| {
            let g: Vec<f64> = (0..n)
                .map(|i| states[s].psi[i] * -dv[i] * states[q].psi[i])
                .collect();
            0.5 * integrate_real(grid.weights(), &g)
        });
        let bc = solution.bc();
        let bx = pair(&|s, q| {
            let (a, b) = (&states[s], &states[q]);
            match bc {
                BoundaryKind::Confinement => 0.0,
                BoundaryKind::Periodic => a.psi[last] * b.dpsi[last] - b.psi[0] * a.dpsi[0],
                BoundaryKind::VanishingDerivative => {
                    0.5 * (a.psi[last] * b.psi[last] - a.psi[0] * b.psi[0])
                }
            }
        });
        let bp = pair(&|s, q| {
            let (a, b) = (&states[s], &states[q]);
            match bc {
                BoundaryKind::Confinement => {
                    0.5 * (b.dpsi[last] * a.dpsi[last] - b.dpsi[0] * a.dpsi[0])
                }
                BoundaryKind::Periodic => 0.0,
                BoundaryKind::VanishingDerivative => {
                    let at = |i: usize| (b.beta - v[i]) * a.psi[i] * b.psi[i];
                    0.5 * (at(last) - at(0))
                }
            }
        });
        Ok(Arc::new(SpectralBasis {
            solution,
            x,
            d,
            f,
            bx,
            bp,
        }))
    }

    pub fn solution(&self) -> &EigenSolution {
        &self.solution
    }

    pub fn len(&self) -> usize {
        self.solution.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solution.is_empty()
    }

    fn beta(&self, r: usize) -> f64 {
        self.solution.states()[r].beta
    }

    /// X_sr for states counted from 1.
    pub fn position_element(&self, s: usize, r: usize) -> Result<f64> {
        self.check(s)?;
        self.check(r)?;
        Ok(self.x[s - 1][r - 1])
    }

    fn check(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.len() {
            Err(Error::InvalidStateIndex(k))
        } else {
            Ok(())
        }
    }
}

fn integrate_real(w: &[f64], f: &[f64]) -> f64 {
    w.iter().zip(f).map(|(a, b)| a * b).sum()
}

/// Coefficients over a basis at a reference time τ.
#[derive(Debug, Clone)]
pub struct StateExpansion {
    basis: Arc<SpectralBasis>,
    coefficients: Vec<Complex64>,
    time: f64,
    reconstruction_error: f64,
}

impl StateExpansion {
    /// Expansion with the given coefficients (c_1, c_2, …) at τ = 0.
    pub fn new(basis: Arc<SpectralBasis>, coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.is_empty() || coefficients.len() > basis.len() {
            return Err(Error::TooManyStates {
                requested: coefficients.len(),
                max: basis.len(),
            });
        }
        Ok(StateExpansion {
            basis,
            coefficients,
            time: 0.0,
            reconstruction_error: 0.0,
        })
    }

    pub fn basis(&self) -> &SpectralBasis {
        &self.basis
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Same coefficients, observed at τ = t.
    pub fn at_time(&self, t: f64) -> Self {
        StateExpansion {
            time: t,
            ..self.clone()
        }
    }

    /// Σ|c_r|².
    pub fn weight(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum()
    }

    /// √(½∫|f − Σc_rψ_r|²) of the projection that produced this expansion.
    pub fn reconstruction_error(&self) -> f64 {
        self.reconstruction_error
    }

    fn phased(&self) -> Vec<Complex64> {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(r, c)| c * Complex64::from_polar(1.0, -self.basis.beta(r) * self.time))
            .collect()
    }

    /// Σ_{s,r} a_s* a_r g(s, r) with a the phased coefficients.
    fn double_sum(&self, g: impl Fn(usize, usize) -> Complex64) -> Complex64 {
        let a = self.phased();
        let mut acc = Complex64::new(0.0, 0.0);
        for (s, cs) in a.iter().enumerate() {
            for (r, cr) in a.iter().enumerate() {
                acc += cs.conj() * cr * g(s, r);
            }
        }
        acc
    }

    fn gap(&self, s: usize, r: usize) -> f64 {
        self.basis.beta(s) - self.basis.beta(r)
    }
}

/// c_r = ½∫ψ_r f dξ over the first `count` basis states.
pub fn project(
    initial: &StateVector,
    basis: Arc<SpectralBasis>,
    count: usize,
) -> Result<StateExpansion> {
    let sol = basis.solution();
    if initial.bc() != sol.bc() {
        return Err(Error::BoundaryMismatch(format!(
            "initial state has {:?} boundary conditions, basis has {:?}",
            initial.bc(),
            sol.bc()
        )));
    }
    initial.grid().check_same(sol.grid())?;
    if count == 0 || count > basis.len() {
        return Err(Error::TooManyStates {
            requested: count,
            max: basis.len(),
        });
    }
    let grid = sol.grid();
    let f = initial.values();
    let coefficients: Vec<Complex64> = sol.states()[..count]
        .iter()
        .map(|st| {
            let psi: Vec<Complex64> = st.psi.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            grid.inner(&psi, f)
        })
        .collect();
    let mut rest: Vec<Complex64> = f.to_vec();
    for (c, st) in coefficients.iter().zip(sol.states()) {
        rest.iter_mut().zip(&st.psi).for_each(|(v, p)| *v -= c * p);
    }
    let err = grid.inner(&rest, &rest).re.max(0.0).sqrt();
    let mut e = StateExpansion::new(basis, coefficients)?;
    e.reconstruction_error = err;
    Ok(e)
}

/// Ψ(ξ, τ) and ∂τΨ at τ = t.
pub fn evaluate_at(expansion: &StateExpansion, t: f64) -> Result<StateVector> {
    let e = expansion.at_time(t);
    let sol = e.basis.solution();
    let n = sol.grid().n_points();
    let a = e.phased();
    let mut psi = vec![Complex64::new(0.0, 0.0); n];
    let mut dt = vec![Complex64::new(0.0, 0.0); n];
    for (r, ar) in a.iter().enumerate() {
        let st = &sol.states()[r];
        let rate = -I * st.beta * ar;
        for i in 0..n {
            psi[i] += ar * st.psi[i];
            dt[i] += rate * st.psi[i];
        }
    }
    StateVector::new(sol.shared_grid(), sol.bc(), psi)?.with_time_derivative(dt)
}

impl Evolving for StateExpansion {
    fn state_at(&self, t: f64) -> Result<StateVector> {
        evaluate_at(self, t)
    }
}

/// d⟨ξ⟩/dτ = Σ a_s* a_r i(β_s − β_r) X_sr, free of boundary terms.
pub fn td_x_direct(e: &StateExpansion) -> Complex64 {
    e.double_sum(|s, r| I * e.gap(s, r) * e.basis.x[s][r])
}

/// d⟨p⟩/dτ = Σ a_s* a_r (β_s − β_r) D_sr.
pub fn td_p_direct(e: &StateExpansion) -> Complex64 {
    e.double_sum(|s, r| Complex64::new(e.gap(s, r) * e.basis.d[s][r], 0.0))
}

/// 2⟨p⟩ + σ·i·Σ a_s* a_r Bx_sr.
pub fn td_x_ehrenfest(e: &StateExpansion, sigma: u8) -> Complex64 {
    let s = sigma_factor(sigma);
    e.double_sum(|a, b| -2.0 * I * e.basis.d[a][b] + s * I * e.basis.bx[a][b])
}

/// ⟨−V′⟩ − σ·Σ a_s* a_r Bp_sr. The potential is the basis potential.
pub fn td_p_ehrenfest(e: &StateExpansion, sigma: u8) -> Complex64 {
    let s = sigma_factor(sigma);
    e.double_sum(|a, b| Complex64::new(e.basis.f[a][b] - s * e.basis.bp[a][b], 0.0))
}

fn sigma_factor(sigma: u8) -> f64 {
    assert!(sigma <= 1, "sigma must be 0 or 1");
    sigma as f64
}

/// Both sides of a per-pair identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
}

impl IdentityCheck {
    fn new(lhs: Complex64, rhs: Complex64) -> Self {
        IdentityCheck {
            lhs,
            rhs,
            residual: (lhs - rhs).norm(),
        }
    }
}

/// i(β_s − β_r)X_sr = −2iD_sr + iBx_sr, states counted from 1.
pub fn identity_p_iv(r: usize, s: usize, basis: &SpectralBasis) -> Result<IdentityCheck> {
    basis.check(r)?;
    basis.check(s)?;
    let (r, s) = (r - 1, s - 1);
    let gap = basis.beta(s) - basis.beta(r);
    Ok(IdentityCheck::new(
        I * gap * basis.x[s][r],
        -2.0 * I * basis.d[s][r] + I * basis.bx[s][r],
    ))
}

/// F_sr = (β_s − β_r)D_sr + Bp_sr, states counted from 1.
pub fn identity_force(r: usize, s: usize, basis: &SpectralBasis) -> Result<IdentityCheck> {
    basis.check(r)?;
    basis.check(s)?;
    let (r, s) = (r - 1, s - 1);
    let gap = basis.beta(s) - basis.beta(r);
    Ok(IdentityCheck::new(
        Complex64::new(basis.f[s][r], 0.0),
        Complex64::new(gap * basis.d[s][r] + basis.bp[s][r], 0.0),
    ))
}

/// One row of the trajectory export.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub mean_x: f64,
    pub mean_p_re: f64,
    pub mean_p_im: f64,
    pub dxdt_direct: f64,
    pub dxdt_ehrenfest: f64,
    pub dpdt_direct: f64,
    pub dpdt_ehrenfest: f64,
    pub sigma: u8,
}

pub const TRAJECTORY_HEADER: [&str; 9] = [
    "t",
    "mean_x",
    "mean_p_re",
    "mean_p_im",
    "dxdt_direct",
    "dxdt_ehrenfest",
    "dpdt_direct",
    "dpdt_ehrenfest",
    "sigma",
];

pub fn trajectory(
    e: &StateExpansion,
    times: &[f64],
    sigma: u8,
    exec: Execution,
) -> Result<Vec<TrajectoryPoint>> {
    exec.map(times, |&t| {
        let at = e.at_time(t);
        let state = evaluate_at(e, t)?.normalized()?;
        let p = expectation(&state, Observable::Momentum)?;
        Ok(TrajectoryPoint {
            t,
            mean_x: expectation(&state, Observable::Position)?.re,
            mean_p_re: p.re,
            mean_p_im: p.im,
            dxdt_direct: td_x_direct(&at).re,
            dxdt_ehrenfest: td_x_ehrenfest(&at, sigma).re,
            dpdt_direct: td_p_direct(&at).re,
            dpdt_ehrenfest: td_p_ehrenfest(&at, sigma).re,
            sigma,
        })
    })
    .into_iter()
    .collect()
}

/// Writes the trajectory as CSV with 17 significant digits.
pub fn write_trajectory_csv<W: Write>(out: W, points: &[TrajectoryPoint]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_HEADER)?;
    for p in points {
        let mut rec: Vec<String> = [
            p.t,
            p.mean_x,
            p.mean_p_re,
            p.mean_p_im,
            p.dxdt_direct,
            p.dxdt_ehrenfest,
            p.dpdt_direct,
            p.dpdt_ehrenfest,
        ]
        .iter()
        .map(|v| crate::io::fmt_f64(*v))
        .collect();
        rec.push(p.sigma.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

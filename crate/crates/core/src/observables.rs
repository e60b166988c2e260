//! Expectation values, hermiticity defects, the boundary integrals I_Ω and
//! the Ehrenfest right-hand sides with the σ switch.
//!
//! Conventions: ⟨Ω⟩ = ½∫Ψ*ΩΨ dξ, p = −i∂ξ, i∂τΨ = HΨ with H = −∂ξ² + V, so
//! d⟨ξ⟩/dτ = 2⟨p⟩ + σ·iI_ξ and d⟨p⟩/dτ = ⟨−V′⟩ + σ·iI_p. Boundary values
//! of derivatives always come from the one-sided full-order rows.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigensolver::EigenSolution;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::model::{BoundaryKind, PhysicalScales, Potential};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Tolerance on ½∫|Ψ|² − 1 for a state used as normalised.
pub const NORM_TOL: f64 = 1e-9;
/// Agreement required between the two forms of the wall force.
pub const WALL_REWRITE_TOL: f64 = 1e-8;

/// A wavefunction sampled on the grid at one instant.
#[derive(Debug, Clone)]
pub struct StateVector {
    grid: Arc<Grid>,
    bc: BoundaryKind,
    values: Vec<Complex64>,
    time_derivative: Option<Vec<Complex64>>,
}

impl StateVector {
    pub fn new(grid: Arc<Grid>, bc: BoundaryKind, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::LengthMismatch {
                expected: grid.n_points(),
                got: values.len(),
            });
        }
        Ok(StateVector {
            grid,
            bc,
            values,
            time_derivative: None,
        })
    }

    pub fn from_real(grid: Arc<Grid>, bc: BoundaryKind, values: &[f64]) -> Result<Self> {
        Self::new(grid, bc, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// Pure eigenstate `k` at τ = 0, carrying ∂τψ = −iβψ.
    pub fn from_eigenstate(solution: &EigenSolution, k: usize) -> Result<Self> {
        let st = solution.state(k)?;
        let values: Vec<Complex64> = st.psi.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let dt = values.iter().map(|v| -I * st.beta * v).collect();
        Self::new(solution.shared_grid(), solution.bc(), values)?.with_time_derivative(dt)
    }

    pub fn with_time_derivative(mut self, dt: Vec<Complex64>) -> Result<Self> {
        if dt.len() != self.values.len() {
            return Err(Error::LengthMismatch {
                expected: self.values.len(),
                got: dt.len(),
            });
        }
        self.time_derivative = Some(dt);
        Ok(self)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn shared_grid(&self) -> Arc<Grid> {
        Arc::clone(&self.grid)
    }

    pub fn bc(&self) -> BoundaryKind {
        self.bc
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn time_derivative(&self) -> Option<&[Complex64]> {
        self.time_derivative.as_deref()
    }

    /// ½∫|Ψ|² dξ.
    pub fn norm(&self) -> f64 {
        self.grid.inner(&self.values, &self.values).re
    }

    pub fn require_normalized(&self) -> Result<()> {
        let n = self.norm();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n));
        }
        Ok(())
    }

    /// Copy scaled to unit norm.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !(n > 1e-24) {
            return Err(Error::ZeroNorm(n.sqrt()));
        }
        let s = 1.0 / n.sqrt();
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        if let Some(dt) = out.time_derivative.as_mut() {
            dt.iter_mut().for_each(|v| *v *= s);
        }
        Ok(out)
    }

    /// ∂ξΨ from the full-order D1 of the state's boundary family (one-sided
    /// closures, wrapped for (p)).
    pub fn derivative(&self) -> Vec<Complex64> {
        self.grid.d1(self.bc).apply(&self.values)
    }

    pub fn second_derivative(&self) -> Vec<Complex64> {
        self.grid.d2(self.bc).apply(&self.values)
    }

    /// ∂τΨ: the stored value, or −iHΨ evaluated with grid operators.
    pub fn time_derivative_or_apply(&self, potential: &Potential) -> Result<Vec<Complex64>> {
        if let Some(dt) = &self.time_derivative {
            return Ok(dt.clone());
        }
        let v = potential.values(&self.grid)?;
        Ok(self
            .second_derivative()
            .iter()
            .zip(&self.values)
            .zip(&v)
            .map(|((d2, psi), vi)| -I * (-d2 + psi * vi))
            .collect())
    }
}

/// Something that can be sampled as a state at any time.
pub trait Evolving {
    fn state_at(&self, t: f64) -> Result<StateVector>;
}

#[derive(Debug, Clone, Copy)]
pub enum Observable<'a> {
    Position,
    Momentum,
    Hamiltonian(&'a Potential),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Omega {
    Position,
    Momentum,
}

/// ⟨Ω⟩ = ½∫Ψ*(ΩΨ) dξ for a normalised state.
pub fn expectation(state: &StateVector, which: Observable) -> Result<Complex64> {
    state.require_normalized()?;
    let grid = state.grid();
    let psi = state.values();
    let applied: Vec<Complex64> = match which {
        Observable::Position => psi
            .iter()
            .zip(grid.points())
            .map(|(v, &x)| v * x)
            .collect(),
        Observable::Momentum => state.derivative().iter().map(|d| -I * d).collect(),
        Observable::Hamiltonian(potential) => {
            let v = potential.values(grid)?;
            state
                .second_derivative()
                .iter()
                .zip(psi)
                .zip(&v)
                .map(|((d2, p), vi)| -d2 + p * vi)
                .collect()
        }
    };
    Ok(grid.inner(psi, &applied))
}

fn bracket<T: std::ops::Sub<Output = T>>(left: T, right: T) -> T {
    right - left
}

/// ⟨H⟩* − ⟨H⟩ = ½[Ψ*Ψ′ − ΨΨ*′] from ξ = −1 to +1.
#[allow(non_snake_case)]
pub fn hermiticity_defect_H(state: &StateVector) -> Complex64 {
    let psi = state.values();
    let d = state.derivative();
    let at = |i: usize| psi[i].conj() * d[i] - psi[i] * d[i].conj();
    0.5 * bracket(at(0), at(psi.len() - 1))
}

/// ⟨p⟩* − ⟨p⟩ = (i/2)[|Ψ|²] from ξ = −1 to +1.
pub fn hermiticity_defect_p(state: &StateVector) -> Complex64 {
    let psi = state.values();
    0.5 * I * bracket(psi[0].norm_sqr(), psi[psi.len() - 1].norm_sqr())
}

/// I_Ω = ½∫[(HΨ)*(ΩΨ) − Ψ*H(ΩΨ)] dξ in the closed boundary form selected by
/// the state's boundary family. The Ehrenfest boundary term is iI_Ω.
#[allow(non_snake_case)]
pub fn I_omega(state: &StateVector, omega: Omega, potential: &Potential) -> Result<Complex64> {
    let psi = state.values();
    let last = psi.len() - 1;
    Ok(match (omega, state.bc()) {
        (Omega::Position, BoundaryKind::Confinement) => Complex64::new(0.0, 0.0),
        (Omega::Position, BoundaryKind::Periodic) => {
            let d = state.derivative();
            psi[last].conj() * d[last] - psi[0] * d[0].conj()
        }
        (Omega::Position, BoundaryKind::VanishingDerivative) => {
            Complex64::new(0.5 * bracket(psi[0].norm_sqr(), psi[last].norm_sqr()), 0.0)
        }
        (Omega::Momentum, BoundaryKind::Confinement) => {
            let d = state.derivative();
            0.5 * I * bracket(d[0].norm_sqr(), d[last].norm_sqr())
        }
        (Omega::Momentum, BoundaryKind::Periodic) => Complex64::new(0.0, 0.0),
        (Omega::Momentum, BoundaryKind::VanishingDerivative) => {
            // Ψ″ eliminated through the Schrödinger equation: Ψ″ = (V − i∂τ)Ψ.
            let v = potential.values(state.grid())?;
            let dt = state.time_derivative_or_apply(potential)?;
            let at = |i: usize| psi[i].conj() * (v[i] * psi[i] - I * dt[i]);
            -0.5 * I * bracket(at(0), at(last))
        }
    })
}

/// Right-hand sides of the Ehrenfest relations for one state.
#[derive(Debug, Clone, PartialEq)]
pub struct EhrenfestReport {
    pub mean_x: f64,
    pub mean_p: Complex64,
    pub mean_h: Complex64,
    /// ⟨−V′⟩ by quadrature.
    pub force: f64,
    /// α·½∫|Ψ|² for linear Stark potentials.
    pub force_exact: Option<f64>,
    pub d_mean_x_dt: Complex64,
    pub d_mean_p_dt: Complex64,
    pub boundary_term_x: Complex64,
    pub boundary_term_p: Complex64,
    /// −¼[(|Ψ|²)″] under (c), the density form of the wall term.
    pub wall_rewrite: Option<f64>,
    pub sigma: u8,
    /// d⟨p⟩/dτ from the right-hand side minus the value obtained directly
    /// from ∂τΨ.
    pub residual: Complex64,
    /// Set for quantities the theory leaves open (momentum under (v)).
    pub diagnostic_only: bool,
}

impl EhrenfestReport {
    pub fn wall_rewrite_consistent(&self) -> bool {
        self.wall_rewrite
            .is_none_or(|w| (w - self.boundary_term_p.re).abs() < WALL_REWRITE_TOL)
    }

    pub fn to_json(&self) -> EhrenfestJson {
        EhrenfestJson {
            mean_x: self.mean_x,
            mean_p_re: self.mean_p.re,
            mean_p_im: self.mean_p.im,
            dpdt: self.d_mean_p_dt.re,
            wall_term: self.boundary_term_p.re,
            sigma: self.sigma,
            residual: self.residual.re,
        }
    }
}

/// Serialised view with fixed field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EhrenfestJson {
    pub mean_x: f64,
    pub mean_p_re: f64,
    pub mean_p_im: f64,
    pub dpdt: f64,
    pub wall_term: f64,
    pub sigma: u8,
    pub residual: f64,
}

fn check_sigma(sigma: u8) -> f64 {
    assert!(sigma <= 1, "sigma must be 0 or 1");
    sigma as f64
}

/// ⟨−V′⟩ = ½∫(−V′)|Ψ|² dξ.
pub fn mean_force(state: &StateVector, potential: &Potential) -> Result<f64> {
    let dv = potential.derivative(state.grid(), state.bc())?;
    let dens: Vec<f64> = state
        .values()
        .iter()
        .zip(&dv)
        .map(|(p, d)| -d * p.norm_sqr())
        .collect();
    Ok(0.5 * state.grid().quadrature().integrate(&dens)?)
}

/// d⟨p⟩/dτ evaluated directly as ½∫[∂τΨ*(−iΨ′) + Ψ*(−i∂τΨ′)].
pub fn direct_momentum_rate(state: &StateVector, potential: &Potential) -> Result<Complex64> {
    let dt = state.time_derivative_or_apply(potential)?;
    let grid = state.grid();
    let d = state.derivative();
    let ddt = grid.d1(state.bc()).apply(&dt);
    let minus_i_d: Vec<Complex64> = d.iter().map(|v| -I * v).collect();
    let minus_i_ddt: Vec<Complex64> = ddt.iter().map(|v| -I * v).collect();
    Ok(grid.inner(&dt, &minus_i_d) + grid.inner(state.values(), &minus_i_ddt))
}

pub fn ehrenfest_rhs(
    state: &StateVector,
    potential: &Potential,
    sigma: u8,
) -> Result<EhrenfestReport> {
    let s = check_sigma(sigma);
    let mean_x = expectation(state, Observable::Position)?.re;
    let mean_p = expectation(state, Observable::Momentum)?;
    let mean_h = expectation(state, Observable::Hamiltonian(potential))?;
    let force = mean_force(state, potential)?;
    let force_exact = match potential {
        Potential::LinearStark { alpha } => Some(alpha * state.norm()),
        Potential::Uniform => Some(0.0),
        Potential::Tabulated(_) => None,
    };
    let boundary_term_x = I * I_omega(state, Omega::Position, potential)?;
    let boundary_term_p = I * I_omega(state, Omega::Momentum, potential)?;
    let d_mean_x_dt = 2.0 * mean_p + s * boundary_term_x;
    let d_mean_p_dt = force + s * boundary_term_p;

    let wall_rewrite = (state.bc() == BoundaryKind::Confinement).then(|| {
        let dens: Vec<f64> = state.values().iter().map(|v| v.norm_sqr()).collect();
        let d2 = state.grid().second_derivative();
        -0.25 * bracket(d2.apply_at(0, &dens), d2.apply_at(dens.len() - 1, &dens))
    });
    let residual = d_mean_p_dt - direct_momentum_rate(state, potential)?;

    Ok(EhrenfestReport {
        mean_x,
        mean_p,
        mean_h,
        force,
        force_exact,
        d_mean_x_dt,
        d_mean_p_dt,
        boundary_term_x,
        boundary_term_p,
        wall_rewrite,
        sigma,
        residual,
        diagnostic_only: state.bc() == BoundaryKind::VanishingDerivative,
    })
}

/// Statics of a pure confined eigenstate: ⟨−V′⟩ against the wall bracket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceBalance {
    /// d⟨p⟩/dτ of a stationary state.
    pub lhs: f64,
    /// ⟨−V′⟩ by quadrature.
    pub force: f64,
    /// ½[(ψ′)²] from ξ = −1 to +1.
    pub wall_term: f64,
    pub sigma: u8,
    /// force − σ·wall_term.
    pub residual: f64,
    /// Dimensional force of each wall (left, right) when scales are given.
    pub wall_forces: Option<(f64, f64)>,
}

pub fn stationary_force_balance(
    solution: &EigenSolution,
    k: usize,
    sigma: u8,
    scales: Option<&PhysicalScales>,
) -> Result<ForceBalance> {
    if solution.bc() != BoundaryKind::Confinement {
        return Err(Error::WrongBoundary {
            expected: BoundaryKind::Confinement,
            found: solution.bc(),
        });
    }
    let s = check_sigma(sigma);
    let state = StateVector::from_eigenstate(solution, k)?;
    let force = mean_force(&state, solution.potential())?;
    let st = solution.state(k)?;
    let (left, right) = (st.dpsi[0].powi(2), st.dpsi[st.dpsi.len() - 1].powi(2));
    let wall_term = 0.5 * bracket(left, right);
    let wall_forces = match scales {
        Some(sc) => {
            sc.validate()?;
            Some((sc.wall_force(left), sc.wall_force(right)))
        }
        None => None,
    };
    Ok(ForceBalance {
        lhs: 0.0,
        force,
        wall_term,
        sigma,
        residual: force - s * wall_term,
        wall_forces,
    })
}

/// Norm conservation and reality of ⟨E⟩ = ½∫Ψ*(i∂τΨ) over sampled times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReality {
    pub max_imag_energy: f64,
    pub norm_drift: f64,
}

impl EnergyReality {
    pub fn passes(&self) -> bool {
        self.norm_drift < 1e-10 && self.max_imag_energy < 1e-9
    }
}

pub fn energy_reality_check(state: &impl Evolving, times: &[f64]) -> Result<EnergyReality> {
    let mut norm0 = None;
    let mut drift: f64 = 0.0;
    let mut imag: f64 = 0.0;
    for &t in times {
        let s = state.state_at(t)?;
        let dt = s.time_derivative().ok_or(Error::MissingTimeDerivative)?;
        let i_dt: Vec<Complex64> = dt.iter().map(|v| I * v).collect();
        let energy = s.grid().inner(s.values(), &i_dt);
        imag = imag.max(energy.im.abs());
        let n = s.norm();
        let n0 = *norm0.get_or_insert(n);
        drift = drift.max((n - n0).abs());
    }
    Ok(EnergyReality {
        max_imag_energy: imag,
        norm_drift: drift,
    })
}

/// Hill's form of the periodic position rate, 2⟨p⟩ − i[ΨΨ*′ − Ψ*Ψ′](+1),
/// obtained by trading the ξ = −1 values for the ξ = +1 ones.
pub fn td_x_hill(state: &StateVector) -> Result<Complex64> {
    if state.bc() != BoundaryKind::Periodic {
        return Err(Error::WrongBoundary {
            expected: BoundaryKind::Periodic,
            found: state.bc(),
        });
    }
    let mean_p = expectation(state, Observable::Momentum)?;
    let psi = state.values();
    let d = state.derivative();
    let last = psi.len() - 1;
    Ok(2.0 * mean_p - I * (psi[last] * d[last].conj() - psi[last].conj() * d[last]))
}

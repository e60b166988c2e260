//! Problem definition: boundary-condition families, potentials, physical
//! scales and the closed-form field-free box states.
//!
//! Everything downstream works in nondimensional units on ξ ∈ [-1, 1] with
//! ħ = 1 and ħ²/2m = 1 (so the mass is ½), and with the ½-weighted inner
//! product ½∫ψ*φ dξ, which equals ∫ψ*φ dx after ψ → ψ/√(2L).

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::eigensolver::EigenSolution;
use crate::error::{Error, Result};
use crate::grid::Grid;

/// Reduced Planck constant in nondimensional units.
pub const HBAR: f64 = 1.0;
/// Particle mass in nondimensional units (ħ²/2m = 1).
pub const MASS: f64 = 0.5;

/// CODATA 2018 reduced Planck constant, J·s.
pub const HBAR_SI: f64 = 1.054_571_817e-34;

const PERIODIC_TOL: f64 = 1e-12;
const ABSCISSA_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryKind {
    /// ψ(±1) = 0
    Confinement,
    /// ψ(+1) = ψ(-1), ψ'(+1) = ψ'(-1)
    Periodic,
    /// ψ'(±1) = 0
    VanishingDerivative,
}

impl BoundaryKind {
    pub const ALL: [BoundaryKind; 3] = [
        BoundaryKind::Confinement,
        BoundaryKind::Periodic,
        BoundaryKind::VanishingDerivative,
    ];

    pub fn tag(self) -> char {
        match self {
            BoundaryKind::Confinement => 'c',
            BoundaryKind::Periodic => 'p',
            BoundaryKind::VanishingDerivative => 'v',
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "c" => Some(BoundaryKind::Confinement),
            "p" => Some(BoundaryKind::Periodic),
            "v" => Some(BoundaryKind::VanishingDerivative),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Potential {
    Uniform,
    /// V(ξ) = -αξ, the nondimensional charge in a uniform field.
    LinearStark { alpha: f64 },
    /// Samples on the grid nodes.
    Tabulated(Vec<f64>),
}

impl Potential {
    pub fn stark(alpha: f64) -> Self {
        if alpha == 0.0 {
            Potential::Uniform
        } else {
            Potential::LinearStark { alpha }
        }
    }

    /// Builds a tabulated potential from `(ξ, V)` pairs. The abscissae must
    /// coincide with the grid nodes; nothing is interpolated.
    pub fn tabulated(grid: &Grid, samples: &[(f64, f64)]) -> Result<Self> {
        if samples.len() != grid.n_points() {
            return Err(Error::LengthMismatch {
                expected: grid.n_points(),
                got: samples.len(),
            });
        }
        for (index, (&x, &(xi, _))) in grid.points().iter().zip(samples).enumerate() {
            if (x - xi).abs() > ABSCISSA_TOL {
                return Err(Error::AbscissaMismatch {
                    index,
                    expected: x,
                    found: xi,
                });
            }
        }
        Ok(Potential::Tabulated(samples.iter().map(|s| s.1).collect()))
    }

    pub fn alpha(&self) -> Option<f64> {
        match self {
            Potential::Uniform => Some(0.0),
            Potential::LinearStark { alpha } => Some(*alpha),
            Potential::Tabulated(_) => None,
        }
    }

    pub fn values(&self, grid: &Grid) -> Result<Vec<f64>> {
        match self {
            Potential::Uniform => Ok(vec![0.0; grid.n_points()]),
            Potential::LinearStark { alpha } => {
                Ok(grid.points().iter().map(|x| -alpha * x).collect())
            }
            Potential::Tabulated(v) => {
                if v.len() != grid.n_points() {
                    return Err(Error::LengthMismatch {
                        expected: grid.n_points(),
                        got: v.len(),
                    });
                }
                Ok(v.clone())
            }
        }
    }

    /// V'(ξ) on the grid. Tabulated potentials are differentiated with the
    /// grid operator matching the boundary family.
    pub fn derivative(&self, grid: &Grid, bc: BoundaryKind) -> Result<Vec<f64>> {
        match self {
            Potential::Uniform => Ok(vec![0.0; grid.n_points()]),
            Potential::LinearStark { alpha } => Ok(vec![-alpha; grid.n_points()]),
            Potential::Tabulated(_) => Ok(grid.d1(bc).apply(&self.values(grid)?)),
        }
    }

    /// Periodic boundary conditions only make sense when V(+1) = V(-1).
    pub fn check_periodic(&self, grid: &Grid) -> Result<()> {
        let v = self.values(grid)?;
        let (left, right) = (v[0], v[grid.last()]);
        if (left - right).abs() > PERIODIC_TOL {
            return Err(Error::NonPeriodicPotential { left, right });
        }
        Ok(())
    }
}

/// Dimensional inputs; only the CLI deals in these.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalScales {
    /// kg
    pub mass: f64,
    /// C
    pub charge: f64,
    /// V/m
    pub field: f64,
    /// half-length L of the box, m
    pub half_length: f64,
    /// J·s
    pub hbar: f64,
}

impl PhysicalScales {
    pub fn new(mass: f64, charge: f64, field: f64, half_length: f64) -> Result<Self> {
        let s = PhysicalScales {
            mass,
            charge,
            field,
            half_length,
            hbar: HBAR_SI,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0) {
            return Err(Error::InvalidScales("mass must be positive"));
        }
        if !(self.half_length > 0.0) {
            return Err(Error::InvalidScales("half-length must be positive"));
        }
        if !(self.hbar > 0.0) {
            return Err(Error::InvalidScales("hbar must be positive"));
        }
        if !self.charge.is_finite() || !self.field.is_finite() {
            return Err(Error::InvalidScales("charge and field must be finite"));
        }
        Ok(())
    }

    /// ħ²/(2mL²): the energy unit of β.
    pub fn energy_unit(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.mass * self.half_length * self.half_length)
    }

    pub fn alpha(&self) -> f64 {
        2.0 * self.mass * self.charge * self.field * self.half_length.powi(3)
            / (self.hbar * self.hbar)
    }

    /// Dimensional force exerted by one wall, (ħ²/2m)(ψ'ψ'*)(±L), from the
    /// nondimensional product of boundary slopes.
    pub fn wall_force(&self, slope_product: f64) -> f64 {
        self.hbar * self.hbar / (2.0 * self.mass) * slope_product
            / (2.0 * self.half_length.powi(3))
    }
}

/// Nondimensional field strength α = 2mqEL³/ħ² and energy β = 2mL²ε/ħ².
pub fn characteristic_numbers(scales: &PhysicalScales, energy: f64) -> Result<(f64, f64)> {
    scales.validate()?;
    Ok((scales.alpha(), energy / scales.energy_unit()))
}

/// Inverse of the β map: ε = βħ²/(2mL²).
pub fn dimensional_energy(beta: f64, scales: &PhysicalScales) -> Result<f64> {
    scales.validate()?;
    Ok(beta * scales.energy_unit())
}

/// Closed-form confined state at α = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticState {
    pub k: usize,
    pub beta: f64,
    pub psi: Vec<f64>,
    pub dpsi: Vec<f64>,
}

/// ψ_k(ξ) = √2 sin(kπ(ξ+1)/2), β_k = (kπ/2)², and its derivative.
pub fn analytic_box_state(k: usize, grid: &Grid) -> Result<AnalyticState> {
    if k < 1 {
        return Err(Error::InvalidStateIndex(k));
    }
    let wave = k as f64 * PI / 2.0;
    let psi = grid
        .points()
        .iter()
        .map(|x| SQRT_2 * (wave * (x + 1.0)).sin())
        .collect();
    let dpsi = grid
        .points()
        .iter()
        .map(|x| k as f64 * PI / SQRT_2 * (wave * (x + 1.0)).cos())
        .collect();
    Ok(AnalyticState {
        k,
        beta: wave * wave,
        psi,
        dpsi,
    })
}

/// Checks ψ(ξ, -α) = ±ψ(-ξ, α) for state `k_neg` of `neg` against state
/// `k_pos` of `pos`, together with equality of the eigenvalues.
pub fn alpha_reflection_check(
    neg: &EigenSolution,
    k_neg: usize,
    pos: &EigenSolution,
    k_pos: usize,
    tol: f64,
) -> Result<bool> {
    neg.grid().check_same(pos.grid())?;
    let a = neg.state(k_neg)?;
    let b = pos.state(k_pos)?;
    if (a.beta - b.beta).abs() > tol * (1.0 + a.beta.abs()) {
        return Ok(false);
    }
    let mirrored: Vec<f64> = b.psi.iter().rev().copied().collect();
    let dev = |sign: f64| {
        a.psi
            .iter()
            .zip(&mirrored)
            .map(|(x, y)| (x - sign * y).abs())
            .fold(0.0, f64::max)
    };
    Ok(dev(1.0).min(dev(-1.0)) < tol)
}

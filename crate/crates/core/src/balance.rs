//! Local balance laws ∂τ(density) + ∂ξ(flux) = production for probability,
//! position (Ω = mξ) and momentum, with densities ½-weighted so that
//! ∫density dξ = ⟨Ω⟩.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BoundaryKind, Potential, MASS};
use crate::observables::{I_omega, Omega, StateVector};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BalanceObservable {
    Probability,
    PositionMx,
    Momentum,
    MomentumSymmetrized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MomentumForm {
    Plain,
    Symmetrized,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalanceField {
    pub observable: BalanceObservable,
    pub bc: BoundaryKind,
    pub points: Vec<f64>,
    weights: Vec<f64>,
    pub density: Vec<Complex64>,
    pub flux: Vec<Complex64>,
    pub production: Vec<Complex64>,
    pub time_derivative_of_density: Vec<Complex64>,
    /// ∂τ density + D1·flux − production.
    pub residual: Vec<Complex64>,
    /// Set when the form is not backed by a hermitian momentum.
    pub warning: Option<String>,
}

impl BalanceField {
    fn assemble(
        observable: BalanceObservable,
        state: &StateVector,
        density: Vec<Complex64>,
        flux: Vec<Complex64>,
        production: Vec<Complex64>,
        time_derivative_of_density: Vec<Complex64>,
    ) -> Self {
        let grid = state.grid();
        let div = grid.d1(state.bc()).apply(&flux);
        let residual = (0..density.len())
            .map(|i| time_derivative_of_density[i] + div[i] - production[i])
            .collect();
        BalanceField {
            observable,
            bc: state.bc(),
            points: grid.points().to_vec(),
            weights: grid.weights().to_vec(),
            density,
            flux,
            production,
            time_derivative_of_density,
            residual,
            warning: None,
        }
    }

    /// S(+1) − S(−1).
    pub fn boundary_flux_difference(&self) -> Complex64 {
        self.flux[self.flux.len() - 1] - self.flux[0]
    }

    pub fn integrated_density(&self) -> Complex64 {
        integrate(&self.weights, &self.density)
    }

    pub fn integrated_production(&self) -> Complex64 {
        integrate(&self.weights, &self.production)
    }

    /// max |residual| over nodes at least `margin` away from either wall.
    pub fn max_interior_residual(&self, margin: usize) -> f64 {
        let n = self.residual.len();
        if 2 * margin >= n {
            return 0.0;
        }
        self.residual[margin..n - margin]
            .iter()
            .map(|r| r.norm())
            .fold(0.0, f64::max)
    }

    /// Field export: ξ, density, flux, production, residual (real parts).
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(FIELD_HEADER)?;
        for i in 0..self.points.len() {
            w.write_record([
                crate::io::fmt_f64(self.points[i]),
                crate::io::fmt_f64(self.density[i].re),
                crate::io::fmt_f64(self.flux[i].re),
                crate::io::fmt_f64(self.production[i].re),
                crate::io::fmt_f64(self.residual[i].re),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub const FIELD_HEADER: [&str; 5] = ["xi", "density", "flux", "production", "residual"];

fn integrate(w: &[f64], f: &[Complex64]) -> Complex64 {
    w.iter()
        .zip(f)
        .fold(Complex64::new(0.0, 0.0), |acc, (&wi, fi)| acc + fi * wi)
}

struct Pieces<'a> {
    psi: &'a [Complex64],
    d: Vec<Complex64>,
    d2: Vec<Complex64>,
    dt: &'a [Complex64],
    ddt: Vec<Complex64>,
}

fn pieces(state: &StateVector) -> Result<Pieces<'_>> {
    let dt = state.time_derivative().ok_or(Error::MissingTimeDerivative)?;
    Ok(Pieces {
        psi: state.values(),
        d: state.derivative(),
        d2: state.second_derivative(),
        dt,
        ddt: state.grid().d1(state.bc()).apply(dt),
    })
}

/// ρ = ½|Ψ|², S = Im(Ψ*Ψ′), production 0.
pub fn probability_balance(state: &StateVector) -> Result<BalanceField> {
    let p = pieces(state)?;
    let n = p.psi.len();
    let density = p.psi.iter().map(|v| Complex64::new(0.5 * v.norm_sqr(), 0.0)).collect();
    let flux = (0..n)
        .map(|i| Complex64::new((p.psi[i].conj() * p.d[i]).im, 0.0))
        .collect();
    let dt = (0..n)
        .map(|i| Complex64::new((p.psi[i].conj() * p.dt[i]).re, 0.0))
        .collect();
    Ok(BalanceField::assemble(
        BalanceObservable::Probability,
        state,
        density,
        flux,
        vec![Complex64::new(0.0, 0.0); n],
        dt,
    ))
}

/// Plain: density ½Ψ*(−iΨ′), flux ½(|Ψ′|² − Ψ*Ψ″).
/// Symmetrized: density ½Im(Ψ*Ψ′), flux ½(|Ψ′|² − Re Ψ*Ψ″).
/// Production ½(−V′)|Ψ|² in both.
pub fn momentum_balance(
    state: &StateVector,
    potential: &Potential,
    form: MomentumForm,
) -> Result<BalanceField> {
    let p = pieces(state)?;
    let n = p.psi.len();
    let dv = potential.derivative(state.grid(), state.bc())?;
    let production = (0..n)
        .map(|i| Complex64::new(-0.5 * dv[i] * p.psi[i].norm_sqr(), 0.0))
        .collect();
    // ∂τ(Ψ*(−iΨ′)) = ∂τΨ*·(−iΨ′) + Ψ*·(−i∂τΨ′)
    let rate: Vec<Complex64> = (0..n)
        .map(|i| 0.5 * (p.dt[i].conj() * (-I * p.d[i]) + p.psi[i].conj() * (-I * p.ddt[i])))
        .collect();
    let (observable, density, flux, dt) = match form {
        MomentumForm::Plain => (
            BalanceObservable::Momentum,
            (0..n).map(|i| 0.5 * p.psi[i].conj() * (-I * p.d[i])).collect(),
            (0..n)
                .map(|i| 0.5 * (p.d[i].norm_sqr() - p.psi[i].conj() * p.d2[i]))
                .collect(),
            rate,
        ),
        MomentumForm::Symmetrized => (
            BalanceObservable::MomentumSymmetrized,
            (0..n)
                .map(|i| Complex64::new(0.5 * (p.psi[i].conj() * p.d[i]).im, 0.0))
                .collect(),
            (0..n)
                .map(|i| {
                    Complex64::new(
                        0.5 * (p.d[i].norm_sqr() - (p.psi[i].conj() * p.d2[i]).re),
                        0.0,
                    )
                })
                .collect(),
            rate.iter().map(|r| Complex64::new(r.re, 0.0)).collect(),
        ),
    };
    let mut field = BalanceField::assemble(observable, state, density, flux, production, dt);
    if form == MomentumForm::Symmetrized && state.bc() == BoundaryKind::VanishingDerivative {
        field.warning = Some(
            "symmetrized momentum balance assumes a hermitian momentum, which fails under (v)"
                .to_string(),
        );
    }
    Ok(field)
}

/// Ω = mξ: density ½mξ|Ψ|², flux ½(m/i)[|Ψ|² + ξ(Ψ*Ψ′ − ΨΨ*′)],
/// production ½Ψ*(−iΨ′).
pub fn position_balance(state: &StateVector) -> Result<BalanceField> {
    let p = pieces(state)?;
    let x = state.grid().points();
    let n = p.psi.len();
    let density = (0..n)
        .map(|i| Complex64::new(0.5 * MASS * x[i] * p.psi[i].norm_sqr(), 0.0))
        .collect();
    let flux = (0..n)
        .map(|i| {
            let w = p.psi[i].conj() * p.d[i] - p.psi[i] * p.d[i].conj();
            -0.5 * I * MASS * (p.psi[i].norm_sqr() + x[i] * w)
        })
        .collect();
    let production = (0..n).map(|i| 0.5 * p.psi[i].conj() * (-I * p.d[i])).collect();
    let dt = (0..n)
        .map(|i| Complex64::new(MASS * x[i] * (p.psi[i].conj() * p.dt[i]).re, 0.0))
        .collect();
    Ok(BalanceField::assemble(
        BalanceObservable::PositionMx,
        state,
        density,
        flux,
        production,
        dt,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExchangeCheck {
    pub flux_difference: Complex64,
    /// I_Ω/i, with I_mξ = m·I_ξ.
    pub i_omega_value: Complex64,
    pub residual: f64,
}

/// S_Ω(+1) − S_Ω(−1) against I_Ω/i.
pub fn exchange_identity(
    state: &StateVector,
    omega: Omega,
    potential: &Potential,
) -> Result<ExchangeCheck> {
    let (field, scale) = match omega {
        Omega::Position => (position_balance(state)?, MASS),
        Omega::Momentum => (momentum_balance(state, potential, MomentumForm::Plain)?, 1.0),
    };
    let flux_difference = field.boundary_flux_difference();
    let i_omega_value = scale * I_omega(state, omega, potential)? / I;
    Ok(ExchangeCheck {
        flux_difference,
        i_omega_value,
        residual: (flux_difference - i_omega_value).norm(),
    })
}

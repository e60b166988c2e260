//! Particle in a one-dimensional box: high-order finite-difference
//! eigensolves, boundary-term corrected Ehrenfest relations and local balance
//! equations, in nondimensional units on ξ ∈ [-1, 1].

pub mod balance;
mod banded;
pub mod dynamics;
pub mod eigensolver;
pub mod error;
pub mod exec;
pub mod grid;
pub mod io;
pub mod model;
pub mod observables;

pub use eigensolver::{
    assemble_hamiltonian, scan_alpha, solve, solve_lowest, EigenSolution, EigenState, Hamiltonian,
};
pub use balance::{
    exchange_identity, momentum_balance, position_balance, probability_balance, BalanceField,
    MomentumForm,
};
pub use dynamics::{
    evaluate_at, identity_force, identity_p_iv, project, td_p_direct, td_p_ehrenfest,
    td_x_direct, td_x_ehrenfest, SpectralBasis, StateExpansion,
};
pub use error::{Error, Result};
pub use exec::Execution;
pub use grid::{build_grid, diff_matrix, integrate, Grid};
pub use model::{
    alpha_reflection_check, analytic_box_state, characteristic_numbers, dimensional_energy,
    BoundaryKind, PhysicalScales, Potential,
};
pub use observables::{
    ehrenfest_rhs, energy_reality_check, expectation, hermiticity_defect_H, hermiticity_defect_p,
    stationary_force_balance, EhrenfestReport, Observable, Omega, StateVector, I_omega,
};

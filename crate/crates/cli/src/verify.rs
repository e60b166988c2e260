//! The invariant suites behind `qbox verify`.

use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use num_complex::Complex64;
use qbox_core::{
    alpha_reflection_check, analytic_box_state, ehrenfest_rhs, evaluate_at, exchange_identity,
    expectation, hermiticity_defect_H, hermiticity_defect_p, identity_force, identity_p_iv,
    momentum_balance, probability_balance, solve, stationary_force_balance, td_p_direct,
    td_p_ehrenfest, td_x_direct, td_x_ehrenfest, BoundaryKind, EigenSolution, Grid, MomentumForm,
    Observable, Omega, Potential, SpectralBasis, StateExpansion, StateVector,
};
use qbox_core::observables::energy_reality_check;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::args::VerifyArgs;
use crate::commands::{core_error, grid, normalised};
use crate::output::{num, write_json};
use crate::{CmdResult, Outcome};

const STATES: usize = 4;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
    /// Known to fail: reported, never counted against the exit status.
    pub expected_fail: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, residual: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Check {
            name,
            residual,
            tolerance,
            expected_fail: false,
            detail: detail.into(),
        }
    }

    fn expected_fail(mut self) -> Self {
        self.expected_fail = true;
        self
    }

    pub fn passed(&self) -> bool {
        self.residual <= self.tolerance
    }

    fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "passed": self.passed(),
            "expected_fail": self.expected_fail,
            "residual": num(self.residual),
            "tolerance": num(self.tolerance),
            "detail": self.detail,
        })
    }
}

fn max(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

/// Cosine well used wherever a periodic potential is needed.
fn periodic_potential(g: &Grid, amplitude: f64) -> qbox_core::Result<Potential> {
    let samples: Vec<(f64, f64)> = g.points().iter().map(|&x| (x, amplitude * (PI * x).cos())).collect();
    Potential::tabulated(g, &samples)
}

fn random_expansion(basis: &Arc<SpectralBasis>, rng: &mut ChaCha8Rng) -> qbox_core::Result<StateExpansion> {
    let c: Vec<Complex64> = (0..basis.len())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    Ok(StateExpansion::new(basis.clone(), normalised(c))?.at_time(rng.gen_range(0.0..5.0)))
}

fn random_state(basis: &Arc<SpectralBasis>, rng: &mut ChaCha8Rng) -> qbox_core::Result<StateVector> {
    let e = random_expansion(basis, rng)?;
    evaluate_at(&e, e.time())?.normalized()
}

pub fn checks(g: &Grid, alpha: f64, samples: usize, seed: u64) -> qbox_core::Result<Vec<Check>> {
    let solve4 = |pot: &Potential, bc| solve(g, pot, bc, STATES);
    let box_sol = solve4(&Potential::Uniform, BoundaryKind::Confinement)?;
    let field = solve4(&Potential::stark(alpha), BoundaryKind::Confinement)?;
    let mirrored = solve4(&Potential::stark(-alpha), BoundaryKind::Confinement)?;
    let ring = solve4(&Potential::Uniform, BoundaryKind::Periodic)?;
    let ring_well = solve4(&periodic_potential(g, alpha / 2.0)?, BoundaryKind::Periodic)?;
    let neumann = solve4(&Potential::Uniform, BoundaryKind::VanishingDerivative)?;
    let neumann_field = solve4(&Potential::stark(alpha), BoundaryKind::VanishingDerivative)?;

    let mut out = Vec::new();
    let last = g.last();

    // spectrum and eigenfunctions of the free box
    let mut spec = 0.0f64;
    let mut shape = 0.0f64;
    let mut slopes = 0.0f64;
    for st in box_sol.states() {
        let exact = analytic_box_state(st.k, g)?;
        spec = spec.max((st.beta / exact.beta - 1.0).abs());
        shape = shape.max(max(st.psi.iter().zip(&exact.psi).map(|(a, b)| (a - b).abs())));
        let k = st.k as f64;
        slopes = slopes
            .max((st.dpsi[0] - k * PI / SQRT_2).abs())
            .max((st.dpsi[0].powi(2) - st.dpsi[last].powi(2)).abs());
    }
    out.push(Check::new("box_spectrum", spec, 1e-8, "relative error of 4β_k/π² against k², k = 1..4"));
    out.push(Check::new("box_eigenfunctions", shape, 1e-7, "max-norm error against √2 sin(kπ(ξ+1)/2)"));
    out.push(Check::new("box_boundary_slopes", slopes, 1e-7, "ψ′(−1) = kπ/√2 and equal squared slopes at both walls"));

    let all_solutions: [&EigenSolution; 7] = [&box_sol, &field, &mirrored, &ring, &ring_well, &neumann, &neumann_field];
    let mut ortho = 0.0f64;
    for sol in all_solutions {
        for a in sol.states() {
            for b in sol.states() {
                let want = if a.k == b.k { 1.0 } else { 0.0 };
                ortho = ortho.max((g.inner_real(&a.psi, &b.psi) - want).abs());
            }
        }
    }
    out.push(Check::new("orthonormality", ortho, 1e-8, "½Σwψ_sψ_r = δ_sr over every solved family"));

    let reflect = (1..=STATES)
        .map(|k| alpha_reflection_check(&mirrored, k, &field, k, 1e-8))
        .collect::<qbox_core::Result<Vec<bool>>>()?;
    let bad = reflect.iter().filter(|ok| !**ok).count();
    out.push(Check::new("field_reflection", bad as f64, 0.0, format!("ψ(ξ, −α) = ±ψ(−ξ, α) for k = 1..4 at α = {alpha}")));

    // statics of confined eigenstates
    let mut on = 0.0f64;
    let mut off = 0.0f64;
    let mut wall = 0.0f64;
    let mut p_static = 0.0f64;
    for k in 1..=STATES {
        on = on.max(stationary_force_balance(&field, k, 1, None)?.residual.abs());
        off = off.max(stationary_force_balance(&field, k, 0, None)?.residual.abs());
        for sol in [&box_sol, &field] {
            let s = StateVector::from_eigenstate(sol, k)?;
            let rep = ehrenfest_rhs(&s, sol.potential(), 1)?;
            wall = wall.max((rep.wall_rewrite.unwrap_or(f64::NAN) - rep.boundary_term_p.re).abs());
            p_static = p_static.max(rep.mean_p.norm());
        }
    }
    out.push(Check::new("force_balance", on, 1e-6, format!("α − ½[(ψ′)²] for k = 1..4 at α = {alpha}, σ = 1")));
    out.push(
        Check::new("force_balance_without_walls", off, 1e-6, format!("σ = 0 leaves the bare field: residual ≈ α = {alpha}"))
            .expected_fail(),
    );
    out.push(Check::new("wall_force_rewrite", wall, 1e-8, "−¼[(|ψ|²)″] against the slope form of the wall term"));
    out.push(Check::new("stationary_momentum", p_static, 1e-9, "|⟨p⟩| of confined eigenstates"));

    // random states per family
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = |s: &EigenSolution| SpectralBasis::new(s.clone());
    let bases = [
        basis(&box_sol)?,
        basis(&field)?,
        basis(&ring)?,
        basis(&ring_well)?,
        basis(&neumann)?,
        basis(&neumann_field)?,
    ];
    let mut herm_h = 0.0f64;
    let mut herm_p = 0.0f64;
    let mut exchange = 0.0f64;
    let mut forms = 0.0f64;
    let mut production = 0.0f64;
    for b in &bases {
        let bc = b.solution().bc();
        let pot = b.solution().potential();
        for _ in 0..5 {
            let s = random_state(b, &mut rng)?;
            herm_h = herm_h.max(hermiticity_defect_H(&s).norm());
            production = production.max(max(probability_balance(&s)?.production.iter().map(|p| p.norm())));
            if bc == BoundaryKind::VanishingDerivative {
                let x = exchange_identity(&s, Omega::Position, pot)?;
                exchange = exchange.max(x.residual);
                continue;
            }
            herm_p = herm_p.max(hermiticity_defect_p(&s).norm());
            for omega in [Omega::Position, Omega::Momentum] {
                exchange = exchange.max(exchange_identity(&s, omega, pot)?.residual);
            }
            let plain = momentum_balance(&s, pot, MomentumForm::Plain)?;
            let sym = momentum_balance(&s, pot, MomentumForm::Symmetrized)?;
            forms = forms.max((plain.boundary_flux_difference() - sym.boundary_flux_difference()).norm());
        }
    }
    out.push(Check::new("hermiticity_h", herm_h, 1e-8, "|⟨H⟩* − ⟨H⟩| for random states of every family"));
    out.push(Check::new("hermiticity_p", herm_p, 1e-9, "|⟨p⟩* − ⟨p⟩| for random (c) and (p) states"));

    let witness = {
        let b = SpectralBasis::new(neumann.clone())?;
        let c = vec![Complex64::new(1.0 / SQRT_2, 0.0); 2];
        let s = evaluate_at(&StateExpansion::new(b, c)?, 0.0)?;
        expectation(&s, Observable::Momentum)?.im.abs()
    };
    out.push(
        Check::new("hermiticity_p_neumann", witness, 1e-9, "|Im⟨p⟩| of (ψ_1 + ψ_2)/√2 under (v); momentum is not hermitian there")
            .expected_fail(),
    );
    out.push(Check::new("probability_production", production, 0.0, "probability production is identically zero"));
    out.push(Check::new("exchange_identity", exchange, 1e-8, "S(+1) − S(−1) against I_Ω/i; (v) position only"));
    out.push(Check::new("momentum_flux_forms", forms, 1e-9, "plain against symmetrized momentum flux difference under (c) and (p)"));

    // equivalence of the two time-derivative forms
    let mut dx = 0.0f64;
    let mut dp = 0.0f64;
    for b in &bases {
        for _ in 0..samples {
            let e = random_expansion(b, &mut rng)?;
            dx = dx.max((td_x_ehrenfest(&e, 1) - td_x_direct(&e)).norm());
            dp = dp.max((td_p_ehrenfest(&e, 1) - td_p_direct(&e)).norm());
        }
    }
    out.push(Check::new("ehrenfest_position", dx, 1e-7, format!("{samples} random expansions per basis")));
    out.push(Check::new("ehrenfest_momentum", dp, 1e-6, format!("{samples} random expansions per basis")));

    let mut piv = 0.0f64;
    let mut force = 0.0f64;
    for b in &bases {
        for r in 1..=STATES {
            for s in 1..=STATES {
                piv = piv.max(identity_p_iv(r, s, b)?.residual);
                force = force.max(identity_force(r, s, b)?.residual);
            }
        }
    }
    out.push(Check::new("pair_identity_position", piv, 1e-7, "i(β_s − β_r)X_sr against −2iD_sr + iBx_sr"));
    out.push(Check::new("pair_identity_force", force, 1e-6, "F_sr against (β_s − β_r)D_sr + Bp_sr"));

    let two = StateExpansion::new(
        bases[1].clone(),
        vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)],
    )?;
    let times: Vec<f64> = (0..=20).map(|i| 0.5 * i as f64).collect();
    let er = energy_reality_check(&two, &times)?;
    out.push(Check::new(
        "energy_reality",
        er.norm_drift.max(er.max_imag_energy),
        1e-10,
        "norm drift and |Im⟨E⟩| of a two-level state over τ ∈ [0, 10]",
    ));
    Ok(out)
}

pub fn run(a: &VerifyArgs) -> CmdResult {
    let g = grid(&a.grid)?;
    let list = checks(&g, a.alpha, a.samples, a.seed).map_err(|e| core_error(e, "verification".to_string()))?;
    let ok = list.iter().all(|c| c.passed() || c.expected_fail);
    let doc = json!({
        "command": "verify",
        "alpha": num(a.alpha),
        "n_points": g.n_points(),
        "fd_order": g.fd_order(),
        "samples": a.samples,
        "seed": a.seed,
        "all_passed": ok,
        "checks": list.iter().map(Check::to_json).collect::<Vec<_>>(),
    });
    write_json(a.out.as_deref(), &doc)?;
    for c in list.iter().filter(|c| !c.passed() && !c.expected_fail) {
        eprintln!("qbox: check {} failed: residual {:.3e} > {:.1e}", c.name, c.residual, c.tolerance);
    }
    Ok(if ok { Outcome::Ok } else { Outcome::ChecksFailed })
}

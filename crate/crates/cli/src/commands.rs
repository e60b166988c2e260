use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use anyhow::Context;
use num_complex::Complex64;
use qbox_core::dynamics::{trajectory, TrajectoryPoint, TRAJECTORY_HEADER};
use qbox_core::io::{fmt_f64, potential_from_rows, state_from_rows};
use qbox_core::{
    build_grid, expectation, project, solve as solve_states, stationary_force_balance,
    BoundaryKind, EigenSolution, Error, Execution, Grid, Observable, PhysicalScales, Potential,
    SpectralBasis, StateVector,
};
use serde_json::{json, Value};

use crate::args::{EvolveArgs, Format, GridArgs, OutputArgs, ScanArgs, SolveArgs, TableArgs};
use crate::output::{num, read_table, write_csv, write_json, write_text};
use crate::svg::{self, Chart, Series};
use crate::{CliError, CmdResult, FailureKind, Outcome};

/// Smallest norm ½∫|f|² accepted for an initial state, squared.
const MIN_NORM: f64 = 1e-24;

/// Configuration errors exit as usage errors; everything else as solver
/// failures.
pub(crate) fn core_error(e: Error, context: String) -> CliError {
    let kind = match e {
        Error::EvenPointCount(_)
        | Error::InvalidOrder(_)
        | Error::TooFewPoints { .. }
        | Error::TooManyStates { .. }
        | Error::InvalidStateIndex(_)
        | Error::InvalidScales(_) => FailureKind::Usage,
        _ => FailureKind::Solver,
    };
    CliError {
        kind,
        error: anyhow::Error::new(e).context(context),
    }
}

pub(crate) fn grid(args: &GridArgs) -> Result<Arc<Grid>, CliError> {
    build_grid(args.n, args.order)
        .map(Arc::new)
        .map_err(|e| core_error(e, format!("invalid grid (n = {}, order = {})", args.n, args.order)))
}

fn potential(grid: &Grid, alpha: f64, file: Option<&Path>) -> Result<Potential, CliError> {
    match file {
        Some(p) => {
            let rows = read_table(p, 2)?;
            potential_from_rows(grid, &rows)
                .map_err(|e| core_error(e, format!("potential {}", p.display())))
        }
        None => Ok(Potential::stark(alpha)),
    }
}

fn parse_scales(raw: &str) -> Result<PhysicalScales, CliError> {
    let v: Vec<f64> = raw
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::usage(format!("--scales: {e}")))?;
    let [mass, charge, field, half_length] = v[..] else {
        return Err(CliError::usage("--scales expects mass,charge,field,half_length"));
    };
    PhysicalScales::new(mass, charge, field, half_length)
        .map_err(|e| core_error(e, "--scales".to_string()))
}

fn check_states(states: usize) -> Result<(), CliError> {
    if states == 0 {
        return Err(CliError::usage("--states must be at least 1"));
    }
    Ok(())
}

fn eigen(grid: &Grid, pot: &Potential, bc: BoundaryKind, states: usize, what: &str) -> Result<EigenSolution, CliError> {
    solve_states(grid, pot, bc, states).map_err(|e| core_error(e, format!("solve failed {what}")))
}

fn mean_xi(sol: &EigenSolution, k: usize) -> Result<f64, Error> {
    let s = StateVector::from_eigenstate(sol, k)?;
    Ok(expectation(&s, Observable::Position)?.re)
}

fn scaled(beta: f64) -> f64 {
    4.0 * beta / (PI * PI)
}

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

fn reject_svg(out: &OutputArgs, command: &str) -> Result<(), CliError> {
    if out.format == Format::Svg {
        return Err(CliError::usage(format!("{command} has no SVG output")));
    }
    Ok(())
}

struct StateRow {
    k: usize,
    beta: f64,
    dpsi_left: f64,
    dpsi_right: f64,
    mean_xi: f64,
}

pub fn solve(a: &SolveArgs) -> CmdResult {
    check_states(a.states)?;
    let g = grid(&a.grid)?;
    let bc = BoundaryKind::from(a.bc);
    let pot = potential(&g, a.alpha, a.potential.as_deref())?;
    let scales = a.scales.as_deref().map(parse_scales).transpose()?;
    let sol = eigen(&g, &pot, bc, a.states, &format!("at α = {}", a.alpha))?;
    for d in sol.dropped() {
        eprintln!(
            "qbox: dropped spurious mode β = {} (boundary residual {:.3e})",
            fmt_f64(d.beta),
            d.boundary_residual
        );
    }
    let last = g.last();
    let rows: Vec<StateRow> = sol
        .states()
        .iter()
        .map(|st| {
            Ok(StateRow {
                k: st.k,
                beta: st.beta,
                dpsi_left: st.dpsi[0],
                dpsi_right: st.dpsi[last],
                mean_xi: mean_xi(&sol, st.k)?,
            })
        })
        .collect::<Result<_, Error>>()
        .map_err(|e| core_error(e, "observables".to_string()))?;
    let dimensional = |r: &StateRow| -> Result<[f64; 3], CliError> {
        let s = scales.as_ref().expect("scales present");
        let energy = qbox_core::dimensional_energy(r.beta, s)
            .map_err(|e| core_error(e, "--scales".to_string()))?;
        Ok([energy, s.wall_force(r.dpsi_left.powi(2)), s.wall_force(r.dpsi_right.powi(2))])
    };
    let out = a.output.out.as_deref();
    match a.output.format {
        Format::Csv => {
            let mut cols = header(&["k", "beta", "beta_scaled", "dpsi_left", "dpsi_right", "wall_left", "wall_right", "mean_xi"]);
            if scales.is_some() {
                cols.extend(header(&["energy", "wall_force_left", "wall_force_right"]));
            }
            let mut table = Vec::new();
            for r in &rows {
                let mut rec = vec![r.k.to_string()];
                let mut vals = vec![r.beta, scaled(r.beta), r.dpsi_left, r.dpsi_right, r.dpsi_left.powi(2), r.dpsi_right.powi(2), r.mean_xi];
                if scales.is_some() {
                    vals.extend(dimensional(r)?);
                }
                rec.extend(vals.into_iter().map(fmt_f64));
                table.push(rec);
            }
            write_csv(out, &cols, &table)?;
        }
        Format::Json => {
            let mut states = Vec::new();
            for r in &rows {
                let mut v = json!({
                    "k": r.k,
                    "beta": num(r.beta),
                    "beta_scaled": num(scaled(r.beta)),
                    "dpsi_left": num(r.dpsi_left),
                    "dpsi_right": num(r.dpsi_right),
                    "wall_left": num(r.dpsi_left.powi(2)),
                    "wall_right": num(r.dpsi_right.powi(2)),
                    "mean_xi": num(r.mean_xi),
                });
                if scales.is_some() {
                    let [e, l, rr] = dimensional(r)?;
                    v["energy"] = num(e);
                    v["wall_force_left"] = num(l);
                    v["wall_force_right"] = num(rr);
                }
                states.push(v);
            }
            let dropped: Vec<Value> = sol
                .dropped()
                .iter()
                .map(|d| json!({"beta": num(d.beta), "boundary_residual": num(d.boundary_residual)}))
                .collect();
            let doc = json!({
                "command": "solve",
                "alpha": num(a.alpha),
                "bc": bc.tag().to_string(),
                "n_points": g.n_points(),
                "fd_order": g.fd_order(),
                "states": states,
                "dropped": dropped,
            });
            write_json(out, &doc)?;
        }
        Format::Svg => {
            let xs = g.points();
            let series = |f: &dyn Fn(f64) -> f64| -> Vec<Series> {
                sol.states()
                    .iter()
                    .map(|st| Series {
                        label: format!("k = {}", st.k),
                        points: xs.iter().zip(&st.psi).map(|(&x, &p)| (x, f(p))).collect(),
                    })
                    .collect()
            };
            let charts = [
                Chart {
                    title: format!("Eigenfunctions, α = {}", a.alpha),
                    x_label: "ξ".into(),
                    y_label: "ψ_k(ξ)".into(),
                    series: series(&|p| p),
                },
                Chart {
                    title: format!("Probability densities, α = {}", a.alpha),
                    x_label: "ξ".into(),
                    y_label: "|ψ_k(ξ)|²".into(),
                    series: series(&|p| p * p),
                },
            ];
            write_text(out, &svg::render(&charts))?;
        }
    }
    Ok(Outcome::Ok)
}

pub fn scan(a: &ScanArgs) -> CmdResult {
    check_states(a.states)?;
    if a.steps < 2 {
        return Err(CliError::usage("--steps must be at least 2"));
    }
    if !(a.alpha_max > a.alpha_min) {
        return Err(CliError::usage("--alpha-max must exceed --alpha-min"));
    }
    let g = grid(&a.grid)?;
    let bc = BoundaryKind::from(a.bc);
    let alphas: Vec<f64> = (0..a.steps)
        .map(|i| a.alpha_min + (a.alpha_max - a.alpha_min) * i as f64 / (a.steps - 1) as f64)
        .collect();
    let rows = Execution::default().map(&alphas, |&alpha| -> Result<(Vec<f64>, Vec<f64>), Error> {
        let sol = solve_states(&g, &Potential::stark(alpha), bc, a.states)?;
        let means = (1..=a.states).map(|k| mean_xi(&sol, k)).collect::<Result<_, _>>()?;
        Ok((means, sol.betas().into_iter().map(scaled).collect()))
    });
    let mut table = Vec::with_capacity(rows.len());
    for (alpha, r) in alphas.iter().zip(rows) {
        table.push(r.map_err(|e| core_error(e, format!("solve failed at α = {}", fmt_f64(*alpha))))?);
    }
    let out = a.output.out.as_deref();
    let k_cols = |prefix: &'static str| (1..=a.states).map(move |k| format!("{prefix}_{k}"));
    match a.output.format {
        Format::Csv => {
            let cols: Vec<String> = std::iter::once("alpha".to_string())
                .chain(k_cols("mean_xi"))
                .chain(k_cols("beta_scaled"))
                .collect();
            let recs: Vec<Vec<String>> = alphas
                .iter()
                .zip(&table)
                .map(|(al, (m, b))| std::iter::once(al).chain(m).chain(b).map(|v| fmt_f64(*v)).collect())
                .collect();
            write_csv(out, &cols, &recs)?;
        }
        Format::Json => {
            let rows: Vec<Value> = alphas
                .iter()
                .zip(&table)
                .map(|(al, (m, b))| {
                    json!({
                        "alpha": num(*al),
                        "mean_xi": m.iter().map(|v| num(*v)).collect::<Vec<_>>(),
                        "beta_scaled": b.iter().map(|v| num(*v)).collect::<Vec<_>>(),
                    })
                })
                .collect();
            let doc = json!({
                "command": "scan",
                "bc": bc.tag().to_string(),
                "n_points": g.n_points(),
                "fd_order": g.fd_order(),
                "rows": rows,
            });
            write_json(out, &doc)?;
        }
        Format::Svg => {
            let series = |pick: &dyn Fn(&(Vec<f64>, Vec<f64>)) -> &Vec<f64>| -> Vec<Series> {
                (0..a.states)
                    .map(|k| Series {
                        label: format!("k = {}", k + 1),
                        points: alphas.iter().zip(&table).map(|(&al, r)| (al, pick(r)[k])).collect(),
                    })
                    .collect()
            };
            let charts = [
                Chart {
                    title: "Mean position".into(),
                    x_label: "α".into(),
                    y_label: "⟨ξ⟩_k".into(),
                    series: series(&|r| &r.0),
                },
                Chart {
                    title: "Scaled eigenvalues".into(),
                    x_label: "α".into(),
                    y_label: "4β_k/π²".into(),
                    series: series(&|r| &r.1),
                },
            ];
            write_text(out, &svg::render(&charts))?;
        }
    }
    Ok(Outcome::Ok)
}

pub fn table(a: &TableArgs) -> CmdResult {
    check_states(a.states)?;
    reject_svg(&a.output, "table")?;
    if a.alpha.is_empty() {
        return Err(CliError::usage("--alpha needs at least one value"));
    }
    let g = grid(&a.grid)?;
    let last = g.last();
    let mut rows = Vec::new();
    for &alpha in &a.alpha {
        let sol = eigen(&g, &Potential::stark(alpha), BoundaryKind::Confinement, a.states, &format!("at α = {alpha}"))?;
        for st in sol.states() {
            let fb = stationary_force_balance(&sol, st.k, a.sigma, None)
                .map_err(|e| core_error(e, format!("force balance at α = {alpha}")))?;
            rows.push((alpha, st.k, [
                st.beta,
                scaled(st.beta),
                st.dpsi[0],
                st.dpsi[last],
                st.dpsi[0].powi(2),
                st.dpsi[last].powi(2),
                fb.wall_term,
                fb.force,
                fb.residual,
            ]));
        }
    }
    const COLS: [&str; 9] = ["beta", "beta_scaled", "dpsi_left", "dpsi_right", "wall_left", "wall_right", "wall_term", "force", "residual"];
    let out = a.output.out.as_deref();
    if a.output.format == Format::Json {
        let recs: Vec<Value> = rows
            .iter()
            .map(|(alpha, k, vals)| {
                let mut v = json!({"alpha": num(*alpha), "k": k});
                for (c, x) in COLS.iter().zip(vals) {
                    v[*c] = num(*x);
                }
                v
            })
            .collect();
        write_json(out, &json!({"command": "table", "sigma": a.sigma, "rows": recs}))?;
    } else {
        let mut cols = header(&["alpha", "k"]);
        cols.extend(header(&COLS));
        cols.push("sigma".into());
        let recs: Vec<Vec<String>> = rows
            .iter()
            .map(|(alpha, k, vals)| {
                let mut r = vec![fmt_f64(*alpha), k.to_string()];
                r.extend(vals.iter().map(|v| fmt_f64(*v)));
                r.push(a.sigma.to_string());
                r
            })
            .collect();
        write_csv(out, &cols, &recs)?;
    }
    Ok(Outcome::Ok)
}

pub fn evolve(a: &EvolveArgs) -> CmdResult {
    check_states(a.states)?;
    if a.t_steps < 1 || !a.t_end.is_finite() {
        return Err(CliError::usage("--t-steps must be positive and --t-end finite"));
    }
    let g = grid(&a.grid)?;
    let bc = BoundaryKind::from(a.bc);
    let pot = potential(&g, a.alpha, a.potential.as_deref())?;
    let rows = read_table(&a.initial, 3)?;
    let initial = state_from_rows(g.clone(), bc, &rows)
        .map_err(|e| core_error(e, format!("initial state {}", a.initial.display())))?;
    let norm = initial.norm();
    if !(norm >= MIN_NORM) {
        return Err(anyhow::anyhow!("initial state is not normalisable (½∫|f|² = {norm:.3e})").into());
    }
    let initial = initial.normalized().context("normalising the initial state")?;
    let sol = eigen(&g, &pot, bc, a.states, "for the basis")?;
    let basis = SpectralBasis::new(sol).map_err(|e| core_error(e, "basis".to_string()))?;
    let e = project(&initial, basis, a.states).map_err(|e| core_error(e, "projection".to_string()))?;
    eprintln!(
        "qbox: projected onto {} states, reconstruction error {:.3e}",
        a.states,
        e.reconstruction_error()
    );
    let times: Vec<f64> = if a.t_steps == 1 {
        vec![0.0]
    } else {
        (0..a.t_steps).map(|i| a.t_end * i as f64 / (a.t_steps - 1) as f64).collect()
    };
    let points = trajectory(&e, &times, a.sigma, Execution::default())
        .map_err(|e| core_error(e, "trajectory".to_string()))?;
    let out = a.output.out.as_deref();
    match a.output.format {
        Format::Csv => {
            let mut w = crate::output::sink(out)?;
            qbox_core::dynamics::write_trajectory_csv(&mut w, &points)?;
        }
        Format::Json => {
            let recs: Vec<Value> = points.iter().map(trajectory_json).collect();
            write_json(out, &json!({"command": "evolve", "bc": bc.tag().to_string(), "trajectory": recs}))?;
        }
        Format::Svg => {
            let pick = |label: &str, f: fn(&TrajectoryPoint) -> f64| Series {
                label: label.into(),
                points: points.iter().map(|p| (p.t, f(p))).collect(),
            };
            let charts = [
                Chart {
                    title: "Mean position".into(),
                    x_label: "τ".into(),
                    y_label: "⟨ξ⟩".into(),
                    series: vec![pick("⟨ξ⟩", |p| p.mean_x)],
                },
                Chart {
                    title: "Momentum rate".into(),
                    x_label: "τ".into(),
                    y_label: "d⟨p⟩/dτ".into(),
                    series: vec![pick("direct", |p| p.dpdt_direct), pick("Ehrenfest", |p| p.dpdt_ehrenfest)],
                },
            ];
            write_text(out, &svg::render(&charts))?;
        }
    }
    Ok(Outcome::Ok)
}

fn trajectory_json(p: &TrajectoryPoint) -> Value {
    let vals = [p.t, p.mean_x, p.mean_p_re, p.mean_p_im, p.dxdt_direct, p.dxdt_ehrenfest, p.dpdt_direct, p.dpdt_ehrenfest];
    let mut v = json!({});
    for (c, x) in TRAJECTORY_HEADER.iter().zip(vals) {
        v[*c] = num(x);
    }
    v["sigma"] = json!(p.sigma);
    v
}

/// Unit-weight coefficients for a random expansion of `len` states.
pub(crate) fn normalised(c: Vec<Complex64>) -> Vec<Complex64> {
    let n = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    c.into_iter().map(|z| z / n).collect()
}

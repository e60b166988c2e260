//! CSV helpers shared by the exporters and the command-line front end.

use std::io::Read;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::model::{BoundaryKind, Potential};
use crate::observables::StateVector;

const ABSCISSA_TOL: f64 = 1e-12;

/// Fixed-width scientific notation with 17 significant digits, so that
/// outputs round-trip and are byte-stable.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Numeric rows of a headed CSV, each with exactly `columns` fields.
pub fn read_columns<R: Read>(input: R, columns: usize) -> std::result::Result<Vec<Vec<f64>>, String> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        if rec.len() != columns {
            return Err(format!(
                "row {} has {} fields, expected {columns}",
                line + 2,
                rec.len()
            ));
        }
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| format!("row {}: {e}: {f:?}", line + 2)))
            .collect::<std::result::Result<Vec<f64>, String>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Tabulated potential from `(ξ, V)` rows on the exact grid.
pub fn potential_from_rows(grid: &Grid, rows: &[Vec<f64>]) -> Result<Potential> {
    let samples: Vec<(f64, f64)> = rows.iter().map(|r| (r[0], r[1])).collect();
    Potential::tabulated(grid, &samples)
}

/// Initial wavefunction from `(ξ, Re f, Im f)` rows on the exact grid.
pub fn state_from_rows(grid: Arc<Grid>, bc: BoundaryKind, rows: &[Vec<f64>]) -> Result<StateVector> {
    if rows.len() != grid.n_points() {
        return Err(Error::LengthMismatch {
            expected: grid.n_points(),
            got: rows.len(),
        });
    }
    for (index, (r, &x)) in rows.iter().zip(grid.points()).enumerate() {
        if (r[0] - x).abs() > ABSCISSA_TOL {
            return Err(Error::AbscissaMismatch {
                index,
                expected: x,
                found: r[0],
            });
        }
    }
    let values = rows.iter().map(|r| Complex64::new(r[1], r[2])).collect();
    StateVector::new(grid, bc, values)
}

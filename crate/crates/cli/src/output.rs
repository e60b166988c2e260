use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use anyhow::Context;
use qbox_core::io::fmt_f64;
use serde_json::{Number, Value};

use crate::CliError;

pub fn sink(out: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// JSON number carrying exactly the CSV text of `v`; null when not finite.
pub fn num(v: f64) -> Value {
    if !v.is_finite() {
        return Value::Null;
    }
    Number::from_str(&fmt_f64(v)).map(Value::Number).unwrap_or(Value::Null)
}

/// Header plus rows of already formatted fields.
pub fn write_csv(out: Option<&Path>, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(sink(out)?);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(out: Option<&Path>, value: &Value) -> Result<(), CliError> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn write_text(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    let mut w = sink(out)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

/// Read a headed numeric CSV with a fixed number of columns.
pub fn read_table(path: &Path, columns: usize) -> Result<Vec<Vec<f64>>, CliError> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    qbox_core::io::read_columns(file, columns)
        .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()).into())
}

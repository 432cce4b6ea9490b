use std::fs;
use std::io::Write;

use serde_json::{json, Value};
use szego_lab::VERSION;

use crate::config::{Format, Resolved};
use crate::error::CliError;

/// Fixed-width scientific notation with 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Result of one operation, ready to be written as CSV or JSON.
#[derive(Debug, Default)]
pub struct Report {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    /// Key/value lines written as `# key: value` in CSV and under `summary` in JSON.
    pub meta: Vec<(String, String)>,
    pub result: Value,
    pub summary: String,
    pub nonconverged: usize,
}

impl Report {
    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }
}

fn render_csv(r: &Resolved, rep: &Report) -> Result<Vec<u8>, CliError> {
    let config = serde_json::to_string(r).map_err(|e| CliError::Io(e.to_string()))?;
    let mut buf = Vec::new();
    writeln!(buf, "# szego-lab {VERSION}")?;
    writeln!(buf, "# config: {config}")?;
    for (k, v) in &rep.meta {
        writeln!(buf, "# {k}: {v}")?;
    }
    let mut w = csv::Writer::from_writer(buf);
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(&rep.columns).map_err(io)?;
    for row in &rep.rows {
        w.write_record(row).map_err(io)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

fn render_json(r: &Resolved, rep: &Report) -> Result<Vec<u8>, CliError> {
    let summary: serde_json::Map<String, Value> = rep
        .meta
        .iter()
        .map(|(k, v)| (k.clone(), Value::String(v.clone())))
        .collect();
    let doc = json!({
        "version": VERSION,
        "operation": r.operation.name(),
        "config": r,
        "summary": summary,
        "result": rep.result,
    });
    let mut buf = serde_json::to_vec_pretty(&doc).map_err(|e| CliError::Io(e.to_string()))?;
    buf.push(b'\n');
    Ok(buf)
}

/// Writes to `--out` or stdout.
pub fn emit(r: &Resolved, rep: &Report) -> Result<(), CliError> {
    let bytes = match r.format {
        Format::Csv => render_csv(r, rep)?,
        Format::Json => render_json(r, rep)?,
    };
    match &r.out {
        Some(path) => fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(&bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_carry_seventeen_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(0.1).parse::<f64>().unwrap(), 0.1);
        assert_eq!(num(-2.0), "-2.0000000000000000e0");
    }
}

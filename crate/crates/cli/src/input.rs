use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::Path;

use crate::error::CliError;

fn open(path: &Path) -> Result<Box<dyn Read>, CliError> {
    if path.as_os_str() == "-" {
        return Ok(Box::new(io::stdin()));
    }
    File::open(path)
        .map(|f| Box::new(f) as Box<dyn Read>)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Reads sample values: one per line (blank and `#` lines skipped), or the
/// named column of a CSV file with a header row.
pub fn read_values(path: &Path, column: Option<&str>) -> Result<Vec<f64>, CliError> {
    let reader = open(path)?;
    match column {
        None => read_lines(reader, path),
        Some(name) => read_column(reader, path, name),
    }
}

fn read_lines(reader: impl Read, path: &Path) -> Result<Vec<f64>, CliError> {
    let mut values = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        values.push(parse_value(text, path, i + 1)?);
    }
    Ok(values)
}

fn read_column(reader: impl Read, path: &Path, name: &str) -> Result<Vec<f64>, CliError> {
    let mut csv = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let err = |e: csv::Error| CliError::Input(format!("{}: {e}", path.display()));
    let index = csv
        .headers()
        .map_err(err)?
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| CliError::Input(format!("{}: no column named `{name}`", path.display())))?;
    let mut values = Vec::new();
    for record in csv.records() {
        let record = record.map_err(err)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = record.get(index).unwrap_or("");
        values.push(parse_value(field, path, line)?);
    }
    Ok(values)
}

fn parse_value(text: &str, path: &Path, line: usize) -> Result<f64, CliError> {
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CliError::Input(format!(
            "{}: line {line}: `{text}` is not a finite number",
            path.display()
        ))),
    }
}

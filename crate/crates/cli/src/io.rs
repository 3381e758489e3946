use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use coalition_core::value_fns::{Dataset, GaussianSpec};
use coalition_core::Game;

use crate::error::{CliError, CliResult};

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn load_game(path: &Path) -> CliResult<Game> {
    let src = read_text(path)?;
    serde_json::from_str(&src).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn load_gaussian(path: &Path) -> CliResult<GaussianSpec> {
    GaussianSpec::from_json(&read_text(path)?).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn parse_number(field: &str, path: &Path, line: u64) -> CliResult<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| CliError::Data(format!("{}:{line}: not a number: {field:?}", path.display())))
}

/// Background samples from a CSV file with a header row.
pub fn load_dataset(path: &Path) -> CliResult<Dataset> {
    let data_err = |e: csv::Error| CliError::Data(format!("{}: {e}", path.display()));
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path).map_err(data_err)?;
    let names: Vec<String> = reader.headers().map_err(data_err)?.iter().map(|h| h.trim().to_string()).collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(data_err)?;
        let line = record.position().map_or(0, |p| p.line());
        let row = record.iter().map(|f| parse_number(f, path, line)).collect::<CliResult<Vec<_>>>()?;
        rows.push(row);
    }
    let data = Dataset::new(rows).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    data.with_columns(names).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// `--x` is either an inline list like `1,2.5` or a CSV file whose first
/// all-numeric row is the instance (a header row is skipped).
pub fn parse_instance(arg: &str) -> CliResult<Vec<f64>> {
    let inline: Result<Vec<f64>, _> = arg.split(',').map(|s| s.trim().parse::<f64>()).collect();
    if let Ok(x) = inline {
        return Ok(x);
    }
    let path = PathBuf::from(arg);
    if !path.exists() {
        return Err(CliError::Config(format!("--x {arg:?} is neither a number list nor an existing file")));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(&path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        if let Ok(x) = record.iter().map(|f| f.trim().parse::<f64>()).collect::<Result<Vec<_>, _>>() {
            return Ok(x);
        }
    }
    Err(CliError::Data(format!("{}: no numeric row", path.display())))
}

/// Writes to `path`, or to stdout when absent.
pub fn emit(path: Option<&Path>, body: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, body).map_err(|e| CliError::Data(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes()).and_then(|_| out.flush()).map_err(|e| CliError::Data(format!("stdout: {e}")))
        }
    }
}

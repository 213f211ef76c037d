use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use num_complex::Complex64;

use crate::{CliError, GlobalArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Everything a subcommand produces, rendered once the format is known.
pub struct Artifact {
    pub json: serde_json::Value,
    pub csv: String,
    pub plot: Vec<(f64, f64)>,
}

impl Artifact {
    pub fn new<T: serde::Serialize>(value: &T, csv: String, plot: Vec<(f64, f64)>) -> Result<Self, CliError> {
        let json = serde_json::to_value(value).map_err(|e| CliError::Io(e.into()))?;
        Ok(Self { json, csv, plot })
    }
}

pub fn num(x: f64) -> String {
    format!("{x:.17e}")
}

pub fn cplx(z: Complex64) -> String {
    format!("{},{}", num(z.re), num(z.im))
}

pub fn csv_table(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    out
}

/// Write via a sibling temporary file and rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, text: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(CliError::Io)?;
    tmp.write_all(text.as_bytes()).map_err(CliError::Io)?;
    tmp.flush().map_err(CliError::Io)?;
    tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
    Ok(())
}

pub fn render(artifact: &Artifact, format: Format) -> String {
    match format {
        Format::Csv => artifact.csv.clone(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&artifact.json).expect("JSON values serialize");
            s.push('\n');
            s
        }
    }
}

pub fn emit(artifact: &Artifact, g: &GlobalArgs) -> Result<(), CliError> {
    let text = render(artifact, g.format);
    if let Some(path) = &g.plot_data {
        let plot = csv_table("x,y", artifact.plot.iter().map(|(x, y)| format!("{},{}", num(*x), num(*y))));
        write_atomic(path, &plot)?;
    }
    match &g.output {
        Some(path) => write_atomic(path, &text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(CliError::Io)?;
            out.flush().map_err(CliError::Io)
        }
    }
}

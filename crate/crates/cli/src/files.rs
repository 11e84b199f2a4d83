//! File formats read and written by the CLI.

use std::io::Write;
use std::path::{Path, PathBuf};

use polyagg::loads::LoadSpec;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::bench::SCHEMA_VERSION;
use crate::error::CliError;

/// A population of loads. A bare JSON array of loads is accepted as well.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PopulationFile {
    pub schema_version: u32,
    pub loads: Vec<LoadSpec>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PopulationInput {
    File(PopulationFile),
    Bare(Vec<LoadSpec>),
}

/// Sidecar written next to an aggregate polytope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateMeta {
    pub schema_version: u32,
    pub loads: usize,
    pub dimension: usize,
    pub unique_rows: usize,
    pub lp_count: usize,
    pub wall_ms: f64,
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn read_population(path: &Path) -> Result<Vec<LoadSpec>, CliError> {
    match read_json::<PopulationInput>(path)? {
        PopulationInput::File(f) => {
            check_schema(path, f.schema_version)?;
            Ok(f.loads)
        }
        PopulationInput::Bare(loads) => Ok(loads),
    }
}

pub fn check_schema(path: &Path, version: u32) -> Result<(), CliError> {
    if version == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(CliError::Parse {
            path: path.to_path_buf(),
            message: format!("unsupported schema_version {version}, expected {SCHEMA_VERSION}"),
        })
    }
}

/// Writes to `path`, or to stdout when absent.
pub fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

/// Serializes records as CSV with a header row, even when empty.
pub fn to_csv<T: Serialize>(header: &[&str], rows: &[T]) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// `<path>.<suffix>` next to `path`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

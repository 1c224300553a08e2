//! Exit-code carrying errors, atomic file output, and the shared flag
//! parsers for column lists, coloring specs, and reference ranges.

use std::io::Write;
use std::path::{Path, PathBuf};

use ballmapper::color::ReferenceSpec;

/// Error with the exit code it maps to: 1 usage, 2 i/o, 3 data validation.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Data(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
            CliError::Data(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Data(m) => m,
        }
    }
}

impl From<ballmapper::Error> for CliError {
    fn from(e: ballmapper::Error) -> Self {
        match e {
            ballmapper::Error::Io(io) => CliError::Io(io.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Resolve a relative output path against `BALLMAPPER_OUT_DIR` when set.
pub fn resolve_out(path: &Path) -> PathBuf {
    if path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os("BALLMAPPER_OUT_DIR") {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir).join(path),
        _ => path.to_path_buf(),
    }
}

/// Write via a temp file in the target directory and rename on success,
/// so failures never leave partial output behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(parent)?;
    let mut tmp = tempfile::NamedTempFile::new_in(parent)?;
    tmp.write_all(bytes)?;
    tmp.persist(path)
        .map_err(|e| CliError::Io(format!("cannot write {}: {}", path.display(), e.error)))?;
    Ok(())
}

/// Write to the resolved path, or to stdout when no path is given.
pub fn emit(out: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match out {
        Some(path) => write_atomic(&resolve_out(path), bytes),
        None => {
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

pub fn split_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(String::from)
        .collect()
}

/// Which per-ball scalar to compute.
#[derive(Debug, Clone, PartialEq)]
pub enum ColorBy {
    Outcome(String),
    Axis(String),
    Year(String),
    Distance,
}

impl ColorBy {
    /// `outcome:COL`, `axis:COL`, `year:COL`, or `distance`.
    pub fn parse(s: &str) -> CliResult<ColorBy> {
        if s == "distance" {
            return Ok(ColorBy::Distance);
        }
        let (kind, col) = s
            .split_once(':')
            .ok_or_else(|| CliError::Usage(format!("bad coloring spec {s:?}")))?;
        if col.is_empty() {
            return Err(CliError::Usage(format!("bad coloring spec {s:?}")));
        }
        match kind {
            "outcome" => Ok(ColorBy::Outcome(col.to_string())),
            "axis" => Ok(ColorBy::Axis(col.to_string())),
            "year" => Ok(ColorBy::Year(col.to_string())),
            other => Err(CliError::Usage(format!(
                "unknown coloring kind {other:?} (expected outcome, axis, year, or distance)"
            ))),
        }
    }

    /// Column this spec reads, if any.
    pub fn column(&self) -> Option<&str> {
        match self {
            ColorBy::Outcome(c) | ColorBy::Axis(c) | ColorBy::Year(c) => Some(c),
            ColorBy::Distance => None,
        }
    }
}

/// `COL:LO..HI` selects rows by a numeric column band; `rows:1,5,9`
/// selects explicit original row ids.
pub fn parse_reference(s: &str) -> CliResult<ReferenceSpec> {
    if let Some(list) = s.strip_prefix("rows:") {
        let ids = list
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Usage(format!("bad row id {p:?} in reference")))
            })
            .collect::<CliResult<Vec<usize>>>()?;
        if ids.is_empty() {
            return Err(CliError::Usage("empty row list in reference".to_string()));
        }
        return Ok(ReferenceSpec::Rows(ids));
    }
    let (column, range) = s
        .split_once(':')
        .ok_or_else(|| CliError::Usage(format!("bad reference {s:?} (expected COL:LO..HI)")))?;
    let (lo, hi) = range
        .split_once("..")
        .ok_or_else(|| CliError::Usage(format!("bad reference range {range:?}")))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<f64>()
            .map_err(|_| CliError::Usage(format!("bad reference bound {v:?}")))
    };
    Ok(ReferenceSpec::Range {
        column: column.to_string(),
        lo: parse(lo)?,
        hi: parse(hi)?,
    })
}

/// Directory-safe version of a group value.
pub fn sanitize_group(name: &str) -> String {
    let cleaned: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    if cleaned.is_empty() {
        "_".to_string()
    } else {
        cleaned
    }
}

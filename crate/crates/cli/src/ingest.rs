//! CSV ingestion of a single numeric series.
//!
//! Accepted layouts: one numeric column, optionally preceded by a header
//! row and accompanied by a label column (dates, quarters) that is ignored.
//! Row numbers in errors are 1-based file line numbers.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{CliError, Result};

/// Picks a column by header name or by 1-based position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", from = "String")]
pub enum ColumnSelector {
    Index(usize),
    Name(String),
}

impl From<String> for ColumnSelector {
    fn from(s: String) -> Self {
        match s.trim().parse::<usize>() {
            Ok(i) => ColumnSelector::Index(i),
            Err(_) => ColumnSelector::Name(s.trim().to_string()),
        }
    }
}

impl From<ColumnSelector> for String {
    fn from(c: ColumnSelector) -> Self {
        c.to_string()
    }
}

impl FromStr for ColumnSelector {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(ColumnSelector::from(s.to_string()))
    }
}

impl fmt::Display for ColumnSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnSelector::Index(i) => write!(f, "{i}"),
            ColumnSelector::Name(n) => f.write_str(n),
        }
    }
}

struct Row {
    line: usize,
    cells: Vec<String>,
}

fn parse_cell(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok()
}

fn input_error(path: &Path, detail: impl Into<String>) -> CliError {
    CliError::Input {
        path: path.to_path_buf(),
        detail: detail.into(),
    }
}

fn read_rows(path: &Path) -> Result<Vec<Row>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(line.as_bytes());
        let cells = match reader.records().next() {
            Some(record) => record
                .map_err(|e| input_error(path, format!("row {}: {e}", i + 1)))?
                .iter()
                .map(|c| c.trim().to_string())
                .collect(),
            None => Vec::new(),
        };
        rows.push(Row { line: i + 1, cells });
    }
    // trailing blank lines are not data
    while rows.last().is_some_and(|r| r.cells.iter().all(|c| c.is_empty())) {
        rows.pop();
    }
    Ok(rows)
}

/// Reads one numeric series from `path`.
///
/// Blank or `NaN` entries in the chosen column are rejected with the rows
/// they occur on. With more than one numeric column a `column` must be
/// given.
pub fn ingest_csv(path: &Path, column: Option<&ColumnSelector>) -> Result<Vec<f64>> {
    let rows = read_rows(path)?;
    if rows.is_empty() {
        return Err(input_error(path, "file is empty"));
    }
    let width = rows.iter().map(|r| r.cells.len()).max().unwrap_or(0);
    let has_header = rows[0].cells.iter().any(|c| !c.is_empty() && parse_cell(c).is_none());
    let header: Vec<String> = if has_header { rows[0].cells.clone() } else { Vec::new() };
    let data = &rows[usize::from(has_header)..];
    if data.is_empty() {
        return Err(input_error(path, "no observations after the header"));
    }

    // a column is numeric when most of its non-blank cells parse
    let numeric: Vec<usize> = (0..width)
        .filter(|&c| {
            let (mut filled, mut parsed) = (0usize, 0usize);
            for r in data {
                if let Some(cell) = r.cells.get(c).filter(|s| !s.is_empty()) {
                    filled += 1;
                    parsed += usize::from(parse_cell(cell).is_some());
                }
            }
            filled > 0 && 2 * parsed > filled
        })
        .collect();

    let chosen = match column {
        Some(ColumnSelector::Index(i)) => {
            if *i == 0 || *i > width {
                return Err(input_error(path, format!("column {i} does not exist (the file has {width})")));
            }
            i - 1
        }
        Some(ColumnSelector::Name(name)) => header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| input_error(path, format!("no column named '{name}'")))?,
        None => match numeric.as_slice() {
            [only] => *only,
            [] => return Err(input_error(path, "no numeric column found")),
            many => {
                let names: Vec<String> = many
                    .iter()
                    .map(|&c| header.get(c).cloned().unwrap_or_else(|| format!("#{}", c + 1)))
                    .collect();
                return Err(input_error(
                    path,
                    format!(
                        "{} numeric columns ({}); select one with --column",
                        many.len(),
                        names.join(", ")
                    ),
                ));
            }
        },
    };

    let mut values = Vec::with_capacity(data.len());
    let mut missing = Vec::new();
    let mut unparsable = Vec::new();
    for r in data {
        match r.cells.get(chosen).map(String::as_str) {
            None | Some("") => missing.push(r.line),
            Some(cell) => match parse_cell(cell) {
                Some(v) if v.is_finite() => values.push(v),
                Some(_) => missing.push(r.line),
                None => unparsable.push(r.line),
            },
        }
    }
    let list = |rows: &[usize]| rows.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(", ");
    let mut problems = Vec::new();
    if !missing.is_empty() {
        problems.push(format!("blank or NaN values at row(s) {}", list(&missing)));
    }
    if !unparsable.is_empty() {
        problems.push(format!("unparsable values at row(s) {}", list(&unparsable)));
    }
    if !problems.is_empty() {
        return Err(input_error(path, problems.join("; ")));
    }
    Ok(values)
}

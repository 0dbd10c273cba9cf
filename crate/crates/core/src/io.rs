//! CSV ingestion and emission.
//!
//! Two formats are read:
//!
//! * table CSV — first row holds an empty corner cell then the column
//!   labels; every following row holds a row label then one non-negative
//!   decimal per column;
//! * counts CSV — fixed header `gender,generation,survey_year,n,x`.
//!
//! Both accept `#` comment lines and blank lines, use `.` as the decimal
//! mark, and are parsed strictly: no quoting, no locale handling, errors
//! report 1-based line and column. The writer emits a canonical form (LF
//! line endings, trailing newline, shortest round-trip number formatting);
//! loading a canonical file and writing it back is byte-identical.

use std::path::Path;

use thiserror::Error;

use crate::survey::{Gender, GroupCount, SurveyError};
use crate::table::{ContingencyTable, TableError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("parse error at line {line}, column {col}: {message}")]
    Parse {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("invalid table: {0}")]
    Table(#[from] TableError),
    #[error("invalid counts: {0}")]
    Counts(#[from] SurveyError),
    #[error("label {0:?} cannot be written to CSV")]
    UnwritableLabel(String),
    #[error("failed to read {path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn parse_err(line: usize, col: usize, message: impl Into<String>) -> IoError {
    IoError::Parse {
        line,
        col,
        message: message.into(),
    }
}

/// Data lines with their 1-based line numbers, comments and blanks skipped,
/// trailing `\r` tolerated.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, line)| (i + 1, line.strip_suffix('\r').unwrap_or(line)))
        .filter(|(_, line)| !line.is_empty() && !line.starts_with('#'))
}

fn parse_cell(line: usize, col: usize, field: &str) -> Result<f64, IoError> {
    let value: f64 = field
        .parse()
        .map_err(|_| parse_err(line, col, format!("expected a number, got {field:?}")))?;
    if !value.is_finite() {
        return Err(parse_err(line, col, format!("non-finite value {field:?}")));
    }
    Ok(value)
}

/// Parse a labelled table from CSV text.
pub fn parse_table_csv(text: &str) -> Result<ContingencyTable, IoError> {
    let mut lines = data_lines(text);
    let (header_no, header) = lines.next().ok_or_else(|| parse_err(1, 1, "empty input"))?;
    let mut fields = header.split(',');
    let corner = fields.next().unwrap_or_default();
    if !corner.is_empty() {
        return Err(parse_err(
            header_no,
            1,
            format!("first header field must be empty, got {corner:?}"),
        ));
    }
    let col_labels: Vec<String> = fields.map(str::to_owned).collect();
    if col_labels.is_empty() {
        return Err(parse_err(header_no, 2, "no column labels"));
    }

    let mut row_labels = Vec::new();
    let mut values = Vec::new();
    for (line_no, line) in lines {
        let mut fields = line.split(',');
        let label = fields.next().unwrap_or_default();
        row_labels.push(label.to_owned());
        let mut row = Vec::with_capacity(col_labels.len());
        for (k, field) in fields.enumerate() {
            if k >= col_labels.len() {
                return Err(parse_err(
                    line_no,
                    k + 2,
                    format!(
                        "row has more cells than the {} column labels",
                        col_labels.len()
                    ),
                ));
            }
            row.push(parse_cell(line_no, k + 2, field)?);
        }
        if row.len() != col_labels.len() {
            return Err(parse_err(
                line_no,
                row.len() + 2,
                format!("row has {} cells, expected {}", row.len(), col_labels.len()),
            ));
        }
        values.push(row);
    }
    Ok(ContingencyTable::new(values, row_labels, col_labels)?)
}

/// Load a labelled table from a CSV file.
pub fn load_table_csv(path: impl AsRef<Path>) -> Result<ContingencyTable, IoError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })?;
    parse_table_csv(&text)
}

fn writable_label(label: &str) -> Result<&str, IoError> {
    if label.contains(',') || label.contains('\n') || label.contains('\r') || label.starts_with('#')
    {
        return Err(IoError::UnwritableLabel(label.to_owned()));
    }
    Ok(label)
}

/// Canonical CSV form of a table.
pub fn write_table_csv(t: &ContingencyTable) -> Result<String, IoError> {
    let mut out = String::new();
    for label in t.col_labels() {
        out.push(',');
        out.push_str(writable_label(label)?);
    }
    out.push('\n');
    for r in 0..t.rows() {
        out.push_str(writable_label(&t.row_labels()[r])?);
        for c in 0..t.cols() {
            out.push(',');
            out.push_str(&format!("{}", t.get(r, c)));
        }
        out.push('\n');
    }
    Ok(out)
}

pub const COUNTS_HEADER: &str = "gender,generation,survey_year,n,x";

/// Parse survey counts from CSV text with the fixed header.
pub fn parse_counts_csv(text: &str) -> Result<Vec<GroupCount>, IoError> {
    let mut lines = data_lines(text);
    let (header_no, header) = lines.next().ok_or_else(|| parse_err(1, 1, "empty input"))?;
    if header != COUNTS_HEADER {
        return Err(parse_err(
            header_no,
            1,
            format!("header must be {COUNTS_HEADER:?}, got {header:?}"),
        ));
    }
    let mut counts = Vec::new();
    for (line_no, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(parse_err(
                line_no,
                fields.len().min(5),
                format!("expected 5 fields, got {}", fields.len()),
            ));
        }
        let gender = match fields[0] {
            "male" => Gender::Male,
            "female" => Gender::Female,
            other => {
                return Err(parse_err(
                    line_no,
                    1,
                    format!("gender must be male or female, got {other:?}"),
                ))
            }
        };
        let survey_year: i32 = fields[2]
            .parse()
            .map_err(|_| parse_err(line_no, 3, format!("bad survey year {:?}", fields[2])))?;
        let n: u64 = fields[3]
            .parse()
            .map_err(|_| parse_err(line_no, 4, format!("bad count {:?}", fields[3])))?;
        let x: u64 = fields[4]
            .parse()
            .map_err(|_| parse_err(line_no, 5, format!("bad count {:?}", fields[4])))?;
        counts.push(GroupCount::new(gender, fields[1], survey_year, n, x)?);
    }
    Ok(counts)
}

/// Load survey counts from a CSV file.
pub fn load_counts_csv(path: impl AsRef<Path>) -> Result<Vec<GroupCount>, IoError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })?;
    parse_counts_csv(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_a_table_with_comments() {
        let t = parse_table_csv("# worked example\n,L,H\nL,500,700\nH,100,700\n").unwrap();
        assert_eq!(t.values(), &[500.0, 700.0, 100.0, 700.0]);
        assert_eq!(t.row_labels(), &["L".to_string(), "H".to_string()]);
    }

    #[test]
    fn ragged_rows_are_parse_errors() {
        let err = parse_table_csv(",a,b\nr1,1,2\nr2,3\n").unwrap_err();
        match err {
            IoError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other}"),
        }
        assert!(parse_table_csv(",a,b\nr1,1,2,9\nr2,3,4\n").is_err());
    }

    #[test]
    fn negative_cells_are_validation_errors_naming_the_cell() {
        let err = parse_table_csv(",a,b\nr1,1,-2\nr2,3,4\n").unwrap_err();
        match err {
            IoError::Table(TableError::NegativeCell { row, col, .. }) => {
                assert_eq!((row, col), (0, 1));
            }
            other => panic!("expected negative-cell error, got {other}"),
        }
    }

    #[test]
    fn non_numeric_and_non_finite_cells_are_rejected() {
        assert!(matches!(
            parse_table_csv(",a,b\nr1,1,x\nr2,3,4\n").unwrap_err(),
            IoError::Parse {
                line: 2,
                col: 3,
                ..
            }
        ));
        assert!(matches!(
            parse_table_csv(",a,b\nr1,1,inf\nr2,3,4\n").unwrap_err(),
            IoError::Parse { .. }
        ));
    }

    #[test]
    fn counts_round_trip_and_validation() {
        let text = "gender,generation,survey_year,n,x\nmale,late_boomer,2010,75,25\n";
        let counts = parse_counts_csv(text).unwrap();
        assert_eq!(counts.len(), 1);
        assert_eq!(counts[0].n, 75);

        let bad = "gender,generation,survey_year,n,x\nmale,late_boomer,2010,5,6\n";
        assert!(matches!(
            parse_counts_csv(bad).unwrap_err(),
            IoError::Counts(SurveyError::InvalidCount { .. })
        ));

        let bad_header = "sex,generation,survey_year,n,x\n";
        assert!(matches!(
            parse_counts_csv(bad_header).unwrap_err(),
            IoError::Parse { .. }
        ));
    }

    #[test]
    fn canonical_write_is_stable() {
        let t = parse_table_csv(",L,H\nL,529.4117647058824,636.36\nH,70.59,763.64\n").unwrap();
        let written = write_table_csv(&t).unwrap();
        assert_eq!(
            written,
            ",L,H\nL,529.4117647058824,636.36\nH,70.59,763.64\n"
        );
        let reparsed = parse_table_csv(&written).unwrap();
        assert_eq!(write_table_csv(&reparsed).unwrap(), written);
    }

    proptest! {
        #[test]
        fn write_then_load_is_identity(
            rows in 2usize..5,
            cols in 2usize..5,
            cells in proptest::collection::vec(0.0f64..1e6, 25),
        ) {
            prop_assume!(cells.iter().take(rows * cols).sum::<f64>() > 0.0);
            let values: Vec<Vec<f64>> = (0..rows)
                .map(|r| (0..cols).map(|c| cells[r * cols + c]).collect())
                .collect();
            let labels = |n: usize, p: char| (0..n).map(|i| format!("{p}{i}")).collect::<Vec<_>>();
            let t = ContingencyTable::new(values, labels(rows, 'r'), labels(cols, 'c')).unwrap();
            let written = write_table_csv(&t).unwrap();
            let loaded = parse_table_csv(&written).unwrap();
            prop_assert_eq!(loaded.values(), t.values());
            // loading a canonical file and re-writing is byte-identical
            prop_assert_eq!(write_table_csv(&loaded).unwrap(), written);
        }

        #[test]
        fn table_parser_never_panics(text in "\\PC*") {
            let _ = parse_table_csv(&text);
        }

        #[test]
        fn counts_parser_never_panics(text in "\\PC*") {
            let _ = parse_counts_csv(&text);
        }
    }
}

//! Machine-readable result rows: flat CSV (default) or JSON lines. Column
//! sets are versioned by the golden-file tests; floats print with 17
//! significant digits so every value round-trips bit-exactly.

use crate::error::Result;
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    JsonLines,
}

impl OutputFormat {
    pub fn as_str(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::JsonLines => "json-lines",
        }
    }
}

/// 17 significant digits, round-trip safe.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// One cell of a result row.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    U64(u64),
    F64(f64),
    Str(String),
    Bool(bool),
    Empty,
}

impl Field {
    pub fn str(s: impl Into<String>) -> Field {
        Field::Str(s.into())
    }

    fn csv(&self) -> String {
        match self {
            Field::U64(v) => v.to_string(),
            Field::F64(v) => fmt_f64(*v),
            Field::Str(s) => s.to_string(),
            Field::Bool(b) => b.to_string(),
            Field::Empty => String::new(),
        }
    }

    fn json(&self) -> String {
        match self {
            Field::U64(v) => v.to_string(),
            Field::F64(v) => {
                if v.is_finite() {
                    fmt_f64(*v)
                } else {
                    format!("\"{}\"", fmt_special(*v))
                }
            }
            Field::Str(s) => format!("\"{s}\""),
            Field::Bool(b) => b.to_string(),
            Field::Empty => "null".to_string(),
        }
    }
}

fn fmt_special(v: f64) -> &'static str {
    if v.is_nan() {
        "nan"
    } else if v > 0.0 {
        "inf"
    } else {
        "-inf"
    }
}

/// Serializes rows of named fields in the chosen format. CSV gets one header
/// line; JSON lines repeat the keys per row.
pub struct RowWriter<W: Write> {
    out: W,
    format: OutputFormat,
    columns: Vec<String>,
    wrote_header: bool,
}

impl<W: Write> RowWriter<W> {
    pub fn new(out: W, format: OutputFormat, columns: Vec<String>) -> Self {
        RowWriter {
            out,
            format,
            columns,
            wrote_header: false,
        }
    }

    pub fn write_row(&mut self, fields: &[Field]) -> Result<()> {
        assert_eq!(fields.len(), self.columns.len(), "row/column arity mismatch");
        match self.format {
            OutputFormat::Csv => {
                if !self.wrote_header {
                    writeln!(self.out, "{}", self.columns.join(","))?;
                    self.wrote_header = true;
                }
                let cells: Vec<String> = fields.iter().map(Field::csv).collect();
                writeln!(self.out, "{}", cells.join(","))?;
            }
            OutputFormat::JsonLines => {
                let cells: Vec<String> = self
                    .columns
                    .iter()
                    .zip(fields)
                    .map(|(k, f)| format!("\"{k}\":{}", f.json()))
                    .collect();
                writeln!(self.out, "{{{}}}", cells.join(","))?;
            }
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

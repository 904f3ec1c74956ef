//! CSV emission. Floats are written with 17 significant digits in
//! scientific notation, records end with LF, and output depends only on the
//! table contents.

use std::io::Write;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row} has {got} fields, header has {expected}")]
    RaggedRow {
        row: usize,
        got: usize,
        expected: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Self::Float(v) => format_float(*v),
            Self::Int(v) => v.to_string(),
            Self::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Self::Float(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Self::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Self::Int(i64::from(v))
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Self::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Self::Text(v)
    }
}

/// 17 significant digits, enough to round-trip any f64.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }

    pub fn write_to<W: Write>(&self, out: W) -> Result<(), CsvError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(&self.header)?;
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.header.len() {
                return Err(CsvError::RaggedRow {
                    row: i + 1,
                    got: row.len(),
                    expected: self.header.len(),
                });
            }
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush().map_err(|source| CsvError::Io {
            path: "<writer>".into(),
            source,
        })?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String, CsvError> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

pub fn write_csv(table: &CsvTable, path: impl AsRef<Path>) -> Result<(), CsvError> {
    let path = path.as_ref();
    let io_err = |source| CsvError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io_err)?;
    let mut writer = std::io::BufWriter::new(file);
    table.write_to(&mut writer)?;
    writer.flush().map_err(io_err)
}

//! Tabular experiment results and their CSV / JSON emission.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::{Error, Result};

/// One table cell. `Empty` renders as an empty CSV field and JSON null.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Text(String),
    Int(u64),
    Float(f64),
    Empty,
}

/// Column-schema'd result rows plus run metadata.
///
/// The metadata block (config echo, seed, artifact version) travels only in
/// the JSON rendering; CSV is exactly one header row plus data rows, so its
/// bytes depend on nothing but the rows themselves. Text cells must stay free
/// of commas and newlines, which keeps the CSV quoting-free; scheme labels
/// use `;` as their internal separator for that reason.
#[derive(Clone, Debug)]
pub struct ResultTable {
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
    metadata: BTreeMap<String, String>,
}

impl ResultTable {
    pub fn new<S: Into<String>>(columns: Vec<S>) -> Self {
        ResultTable {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }

    pub fn insert_metadata(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.metadata.insert(key.into(), value.into());
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width {} does not match schema width {}",
            row.len(),
            self.columns.len()
        );
        for cell in &row {
            if let Cell::Text(text) = cell {
                assert!(
                    !text.contains(',') && !text.contains('\n') && !text.contains('"'),
                    "text cell {text:?} would require CSV quoting"
                );
            }
        }
        self.rows.push(row);
    }

    /// Cell at (row, column name), for tests and table consumers.
    pub fn cell(&self, row: usize, column: &str) -> Option<&Cell> {
        let idx = self.columns.iter().position(|c| c == column)?;
        self.rows.get(row)?.get(idx)
    }

    /// CSV rendering: header row plus one line per data row. Floats use
    /// scientific notation with the shortest digit string that parses back
    /// to the identical f64, so emit-then-parse is bit-exact.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                match cell {
                    Cell::Text(t) => out.push_str(t),
                    Cell::Int(v) => {
                        let _ = write!(out, "{v}");
                    }
                    Cell::Float(v) => {
                        let _ = write!(out, "{v:e}");
                    }
                    Cell::Empty => {}
                }
            }
            out.push('\n');
        }
        out
    }

    /// JSON rendering: `{ "metadata": {...}, "columns": [...], "rows": [...] }`.
    pub fn to_json(&self) -> Result<String> {
        let rows: Vec<Vec<serde_json::Value>> = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|cell| match cell {
                        Cell::Text(t) => serde_json::Value::from(t.as_str()),
                        Cell::Int(v) => serde_json::Value::from(*v),
                        Cell::Float(v) => serde_json::Value::from(*v),
                        Cell::Empty => serde_json::Value::Null,
                    })
                    .collect()
            })
            .collect();
        let doc = serde_json::json!({
            "metadata": self.metadata,
            "columns": self.columns,
            "rows": rows,
        });
        serde_json::to_string_pretty(&doc)
            .map_err(|e| Error::Config(format!("JSON rendering failed: {e}")))
    }

    /// Output format for [`ResultTable::render`] and [`ResultTable::write`].
    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Csv => Ok(self.to_csv()),
            OutputFormat::Json => self.to_json(),
        }
    }

    pub fn write(&self, path: &Path, format: OutputFormat) -> Result<()> {
        let body = self.render(format)?;
        std::fs::write(path, body).map_err(|e| Error::io(path, e))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!(
                "unknown output format {other:?}, expected csv or json"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_table() -> ResultTable {
        let mut t = ResultTable::new(vec!["x", "scheme", "value"]);
        t.push_row(vec![
            Cell::Float(0.5),
            Cell::Text("inf_total".into()),
            Cell::Float(1.25e-13),
        ]);
        t.push_row(vec![Cell::Float(-3.0), Cell::Text("one_bit(8)".into()), Cell::Empty]);
        t.insert_metadata("seed", "7");
        t
    }

    #[test]
    fn empty_table_renders_header_only() {
        let t = ResultTable::new(vec!["a", "b"]);
        assert_eq!(t.to_csv(), "a,b\n");
    }

    #[test]
    fn csv_floats_round_trip_bit_exactly() {
        let values = [
            0.1,
            1.0 / 3.0,
            std::f64::consts::PI,
            1e-300,
            -2.5e17,
            f64::MIN_POSITIVE,
            0.0,
        ];
        let mut t = ResultTable::new(vec!["v"]);
        for v in values {
            t.push_row(vec![Cell::Float(v)]);
        }
        let csv = t.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("v"));
        for (line, v) in lines.zip(values) {
            let parsed: f64 = line.parse().unwrap();
            assert_eq!(parsed.to_bits(), v.to_bits(), "line {line}");
        }
    }

    #[test]
    fn json_mirrors_schema_and_metadata() {
        let t = sample_table();
        let doc: serde_json::Value = serde_json::from_str(&t.to_json().unwrap()).unwrap();
        assert_eq!(doc["metadata"]["seed"], "7");
        assert_eq!(doc["columns"][2], "value");
        assert_eq!(doc["rows"][0][1], "inf_total");
        assert!(doc["rows"][1][2].is_null());
        let parsed = doc["rows"][0][2].as_f64().unwrap();
        assert_eq!(parsed.to_bits(), 1.25e-13f64.to_bits());
    }

    #[test]
    fn metadata_stays_out_of_csv() {
        let t = sample_table();
        let csv = t.to_csv();
        assert!(!csv.contains("seed"));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    #[should_panic(expected = "row width")]
    fn row_width_mismatch_panics() {
        let mut t = ResultTable::new(vec!["a", "b"]);
        t.push_row(vec![Cell::Int(1)]);
    }

    #[test]
    #[should_panic(expected = "CSV quoting")]
    fn comma_in_text_cell_panics() {
        let mut t = ResultTable::new(vec!["a"]);
        t.push_row(vec![Cell::Text("x,y".into())]);
    }

    #[test]
    fn cell_lookup_by_column_name() {
        let t = sample_table();
        assert_eq!(t.cell(1, "scheme"), Some(&Cell::Text("one_bit(8)".into())));
        assert_eq!(t.cell(0, "missing"), None);
    }
}

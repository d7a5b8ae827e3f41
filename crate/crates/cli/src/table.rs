use std::path::Path;

use crate::error::{CliError, Result};

/// The per-row results of one seed, persisted as `paths.csv`.
///
/// Cells are kept as text so a table read back from disk is judged on
/// exactly the numbers that were written.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

/// Shortest text that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn with_header(header: Vec<String>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn column(&self, name: &str) -> Result<usize> {
        self.header.iter().position(|h| h == name).ok_or_else(|| CliError::Table(format!("missing column `{name}`")))
    }

    pub fn texts(&self, name: &str) -> Result<Vec<&str>> {
        let c = self.column(name)?;
        Ok(self.rows.iter().map(|r| r[c].as_str()).collect())
    }

    pub fn nums(&self, name: &str) -> Result<Vec<f64>> {
        let c = self.column(name)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| r[c].trim().parse::<f64>().map_err(|_| CliError::Table(format!("row {}, column `{name}`: `{}` is not a number", i + 1, r[c]))))
            .collect()
    }

    /// Rows whose `name` cell equals `value`.
    pub fn select(&self, name: &str, value: &str) -> Result<Table> {
        let c = self.column(name)?;
        Ok(Table { header: self.header.clone(), rows: self.rows.iter().filter(|r| r[c] == value).cloned().collect() })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let csv_err = |e: csv::Error| CliError::Format { path: path.to_path_buf(), msg: e.to_string() };
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record(&self.header).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        w.flush().map_err(CliError::io(path))
    }

    pub fn read(path: &Path) -> Result<Table> {
        let file = std::fs::File::open(path).map_err(CliError::io(path))?;
        let csv_err = |e: csv::Error| CliError::Format { path: path.to_path_buf(), msg: e.to_string() };
        let mut r = csv::Reader::from_reader(file);
        let header = r.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
        let rows = r.records().map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect())).collect::<std::result::Result<_, _>>().map_err(csv_err)?;
        Ok(Table { header, rows })
    }
}

//! Plain-text table input and CSV output helpers.

use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

/// Formats a number with 17 significant digits, enough to round-trip an `f64`.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Builds a CSV document row by row.
#[derive(Debug, Clone)]
pub struct CsvTable {
    columns: usize,
    text: String,
}

impl CsvTable {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let names: Vec<&str> = header.iter().map(|s| s.as_ref()).collect();
        Self {
            columns: names.len(),
            text: format!("{}\n", names.join(",")),
        }
    }

    pub fn row(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.columns, "row width does not match header");
        let cells: Vec<String> = values.iter().map(|&v| fmt_num(v)).collect();
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    /// Appends a row whose first cell is a label rather than a number.
    pub fn labelled_row(&mut self, label: &str, values: &[f64]) {
        assert_eq!(values.len() + 1, self.columns, "row width does not match header");
        self.text.push_str(label);
        for &v in values {
            self.text.push(',');
            self.text.push_str(&fmt_num(v));
        }
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

/// Reads a numeric CSV with the exact `expected` header.
pub fn read_columns(path: &Path, expected: &[&str]) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path)?;
    parse_columns(&text, &path.display().to_string(), expected)
}

/// Parses a numeric CSV document with the exact `expected` header.
pub fn parse_columns(text: &str, source_name: &str, expected: &[&str]) -> Result<Vec<Vec<f64>>> {
    let err = |reason: String| Error::Table {
        source_name: source_name.to_string(),
        reason,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| err(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header != expected {
        return Err(err(format!("header {:?}, expected {:?}", header, expected)));
    }
    let mut cols = vec![Vec::new(); expected.len()];
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| err(e.to_string()))?;
        if record.len() != expected.len() {
            return Err(err(format!("row {} has {} fields", line + 1, record.len())));
        }
        for (c, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| err(format!("row {}: cannot parse `{field}`", line + 1)))?;
            cols[c].push(v);
        }
    }
    Ok(cols)
}

/// A function sampled on strictly increasing abscissae, interpolated linearly.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    x: Vec<f64>,
    y: Vec<f64>,
    name: String,
}

impl Table {
    pub fn new(x: Vec<f64>, y: Vec<f64>, name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        let err = |reason: String| Error::Table {
            source_name: name.clone(),
            reason,
        };
        if x.len() != y.len() {
            return Err(err("column lengths differ".into()));
        }
        if x.len() < 2 {
            return Err(err("need at least two rows".into()));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(err("non-finite entry".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(err("abscissae must be strictly increasing".into()));
        }
        Ok(Self { x, y, name })
    }

    /// Loads an `omega,value` CSV file.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut cols = read_columns(path, &["omega", "value"])?;
        let y = cols.pop().unwrap_or_default();
        let x = cols.pop().unwrap_or_default();
        Self::new(x, y, path.display().to_string())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    pub fn eval(&self, at: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        if !(at >= lo && at <= hi) {
            return Err(Error::Range(format!(
                "table {} queried at {at}, outside [{lo}, {hi}]",
                self.name
            )));
        }
        let k = match self.x.partition_point(|&v| v <= at) {
            0 => 0,
            p => (p - 1).min(self.x.len() - 2),
        };
        let f = (at - self.x[k]) / (self.x[k + 1] - self.x[k]);
        Ok(self.y[k] + f * (self.y[k + 1] - self.y[k]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_round_trips() {
        for x in [1.0, -0.1, std::f64::consts::PI, 1e-300, 6.02214076e23] {
            assert_eq!(fmt_num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn table_interpolates_and_refuses_extrapolation() {
        let t = Table::new(vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 6.0], "t").unwrap();
        assert_eq!(t.eval(0.5).unwrap(), 1.0);
        assert_eq!(t.eval(3.0).unwrap(), 6.0);
        assert!(matches!(t.eval(3.5), Err(Error::Range(_))));
    }

    #[test]
    fn parse_checks_header() {
        let ok = parse_columns("omega,value\n1,2\n3,4\n", "x", &["omega", "value"]).unwrap();
        assert_eq!(ok[1], vec![2.0, 4.0]);
        assert!(parse_columns("w,value\n1,2\n", "x", &["omega", "value"]).is_err());
        assert!(parse_columns("omega,value\n1,zz\n", "x", &["omega", "value"]).is_err());
    }
}

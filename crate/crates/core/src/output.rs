//! CSV tables with a header row and round-trip float formatting.

use crate::error::{Error, Result};

/// 17 significant digits in scientific notation; parses back to the same `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(Error::config(format!("row has {} columns, header has {}", row.len(), self.header.len())));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn extend(&mut self, rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
        rows.into_iter().try_for_each(|r| self.push(r))
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format_float(*v)))?;
        }
        w.into_inner().map_err(|e| Error::Io(e.into_error()))
    }

    /// Parses a table written by [`Table::to_csv_bytes`].
    pub fn from_csv_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = csv::Reader::from_reader(bytes);
        let mut table = Self::new(r.headers()?.iter().map(str::to_string).collect::<Vec<_>>());
        for record in r.records() {
            let row = record?
                .iter()
                .map(|s| s.parse::<f64>().map_err(|e| Error::config(format!("bad number {s:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            table.push(row)?;
        }
        Ok(table)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_and_format() {
        let mut t = Table::new(["t", "x"]);
        t.push(vec![0.5, -1.0]).unwrap();
        assert!(t.push(vec![1.0]).is_err());
        let text = String::from_utf8(t.to_csv_bytes().unwrap()).unwrap();
        assert_eq!(text, "t,x\n5.0000000000000000e-1,-1.0000000000000000e0\n");
    }

    #[test]
    fn column_lookup() {
        let mut t = Table::new(["a", "b"]);
        t.extend([vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(t.column("b"), Some(vec![2.0, 4.0]));
        assert_eq!(t.column("c"), None);
    }

    proptest! {
        #[test]
        fn floats_round_trip(v in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO) {
            prop_assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }

        #[test]
        fn tables_round_trip(rows in prop::collection::vec(prop::collection::vec(-1e300f64..1e300, 3), 0..20)) {
            let mut t = Table::new(["a", "b", "c"]);
            t.extend(rows).unwrap();
            let back = Table::from_csv_bytes(&t.to_csv_bytes().unwrap()).unwrap();
            prop_assert_eq!(back, t);
        }
    }
}

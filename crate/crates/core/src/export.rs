//! CSV and JSON emission shared by the solvers and the command line.
//!
//! CSV files use a header row, `,` separators, LF line endings and reals
//! printed with 17 significant digits.

use serde::Serialize;

/// Version stamped into every JSON document.
pub const SCHEMA_VERSION: u32 = 1;

/// Real number with 17 significant digits.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// In-memory CSV table.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self {
            header: header.iter().map(|h| h.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Appends a row; panics if the width differs from the header.
    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "csv row width mismatch");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv_string(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        let bytes = w.into_inner().expect("in-memory flush");
        String::from_utf8(bytes).expect("csv output is utf-8")
    }
}

/// Wraps a payload as `{"schema_version": 1, ...payload}` and pretty-prints it.
pub fn to_json_document<T: Serialize>(payload: &T) -> Result<String, serde_json::Error> {
    let mut value = serde_json::to_value(payload)?;
    let doc = match value {
        serde_json::Value::Object(ref mut map) => {
            let mut out = serde_json::Map::new();
            out.insert("schema_version".into(), SCHEMA_VERSION.into());
            out.append(map);
            serde_json::Value::Object(out)
        }
        other => serde_json::json!({ "schema_version": SCHEMA_VERSION, "data": other }),
    };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_have_seventeen_digits() {
        assert_eq!(fmt_real(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_real(-2.0), "-2.0000000000000000e0");
        let back: f64 = fmt_real(std::f64::consts::PI).parse().unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }

    #[test]
    fn csv_uses_lf_and_header() {
        let mut t = CsvTable::new(&["a", "b"]);
        t.push(vec!["1".into(), "x".into()]);
        assert_eq!(t.to_csv_string(), "a,b\n1,x\n");
    }

    #[test]
    fn json_carries_schema_version_first() {
        #[derive(Serialize)]
        struct P {
            z: u8,
        }
        let doc = to_json_document(&P { z: 3 }).unwrap();
        let v: serde_json::Value = serde_json::from_str(&doc).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["z"], 3);
        assert!(doc.find("schema_version").unwrap() < doc.find("\"z\"").unwrap());
    }
}

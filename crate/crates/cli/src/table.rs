//! Column-oriented result tables rendered to RFC-4180 CSV (CRLF line
//! endings, mandatory header) or JSON.

use serde_json::{json, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Str(String),
    Bool(bool),
    /// Masked / not-applicable entry; empty in CSV, null in JSON.
    Null,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map(Cell::Num).unwrap_or(Cell::Null)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Str(v.to_string())
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        s.push_str(&self.columns.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(","));
        s.push_str("\r\n");
        for row in &self.rows {
            let line: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(v) => format!("{v}"),
                    Cell::Int(v) => format!("{v}"),
                    Cell::Str(v) => csv_field(v),
                    Cell::Bool(v) => format!("{v}"),
                    Cell::Null => String::new(),
                })
                .collect();
            s.push_str(&line.join(","));
            s.push_str("\r\n");
        }
        s
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: serde_json::Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, cell)| {
                        let v = match cell {
                            Cell::Num(v) => json!(v),
                            Cell::Int(v) => json!(v),
                            Cell::Str(v) => json!(v),
                            Cell::Bool(v) => json!(v),
                            Cell::Null => Value::Null,
                        };
                        (c.clone(), v)
                    })
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&Value::Array(rows)).expect("json render");
        s.push('\n');
        s
    }
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\r') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_crlf_and_header() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![Cell::Num(1.5), Cell::Null]);
        assert_eq!(t.to_csv(), "a,b\r\n1.5,\r\n");
    }

    #[test]
    fn csv_quotes_special_fields() {
        let mut t = Table::new(&["a"]);
        t.push(vec![Cell::Str("x,\"y\"".into())]);
        assert_eq!(t.to_csv(), "a\r\n\"x,\"\"y\"\"\"\r\n");
    }

    #[test]
    fn json_nulls_masked_cells() {
        let mut t = Table::new(&["a", "ok"]);
        t.push(vec![Cell::Null, Cell::Bool(true)]);
        let v: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
        assert!(v[0]["a"].is_null());
        assert_eq!(v[0]["ok"], true);
    }
}

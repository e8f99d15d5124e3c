//! Tabular results and their deterministic CSV / JSON-lines encodings.

use std::io::Write;

use super::CliError;

/// One cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(i64),
    UInt(u64),
    Bool(bool),
    Text(String),
    Null,
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::UInt(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::UInt(v as u64)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(v: Option<T>) -> Self {
        v.map_or(Value::Null, Into::into)
    }
}

/// Float text with 17 significant digits (exact round trip).
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Csv,
    Jsonl,
}

/// Rectangular table with an ordered metadata block.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    pub metadata: Vec<(String, String)>,
}

impl ResultTable {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            metadata: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Value>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width must match the column count"
        );
        self.rows.push(row);
    }

    pub fn add_metadata(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.metadata.push((key.into(), value.into()));
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Float(x) => format_float(*x),
        Value::Int(i) => i.to_string(),
        Value::UInt(u) => u.to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Text(s) => s.clone(),
        Value::Null => String::new(),
    }
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

fn json_cell(v: &Value) -> String {
    match v {
        Value::Float(x) if x.is_finite() => format_float(*x),
        Value::Float(x) => json_string(&format_float(*x)),
        Value::Int(i) => i.to_string(),
        Value::UInt(u) => u.to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Text(s) => json_string(s),
        Value::Null => "null".to_string(),
    }
}

fn single_line(s: &str) -> String {
    s.replace('\r', "\\r").replace('\n', "\\n")
}

/// Encode the table. Identical tables always give identical bytes.
pub fn render(table: &ResultTable, format: OutputFormat) -> Vec<u8> {
    let mut out = Vec::new();
    match format {
        OutputFormat::Csv => {
            for (k, v) in &table.metadata {
                out.extend_from_slice(
                    format!("# {}: {}\n", single_line(k), single_line(v)).as_bytes(),
                );
            }
            let mut w = csv::WriterBuilder::new()
                .quote_style(csv::QuoteStyle::Necessary)
                .from_writer(Vec::new());
            w.write_record(&table.columns).expect("in-memory write");
            for row in &table.rows {
                w.write_record(row.iter().map(csv_cell))
                    .expect("in-memory write");
            }
            out.extend(w.into_inner().expect("in-memory flush"));
        }
        OutputFormat::Jsonl => {
            let meta: Vec<String> = table
                .metadata
                .iter()
                .map(|(k, v)| format!("{}:{}", json_string(k), json_string(v)))
                .collect();
            out.extend_from_slice(format!("{{\"metadata\":{{{}}}}}\n", meta.join(",")).as_bytes());
            for row in &table.rows {
                let fields: Vec<String> = table
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| format!("{}:{}", json_string(c), json_cell(v)))
                    .collect();
                out.extend_from_slice(format!("{{{}}}\n", fields.join(",")).as_bytes());
            }
        }
    }
    out
}

/// Write the encoded table to `dest`, returning the number of bytes written.
pub fn write_results(
    table: &ResultTable,
    format: OutputFormat,
    dest: &mut dyn Write,
) -> Result<usize, CliError> {
    let bytes = render(table, format);
    dest.write_all(&bytes)
        .and_then(|_| dest.flush())
        .map_err(|e| CliError::Io(e.to_string()))?;
    Ok(bytes.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ResultTable {
        let mut t = ResultTable::new(["name", "x", "n", "ok"]);
        t.add_metadata("seed", "7");
        t.push_row(vec!["a,b".into(), 0.1.into(), 3u64.into(), true.into()]);
        t.push_row(vec![
            "say \"hi\"".into(),
            (-0.25).into(),
            Value::Null,
            false.into(),
        ]);
        t
    }

    #[test]
    fn empty_table_has_header_and_metadata() {
        let mut t = ResultTable::new(["a", "b"]);
        t.add_metadata("k", "v");
        assert_eq!(
            String::from_utf8(render(&t, OutputFormat::Csv)).unwrap(),
            "# k: v\na,b\n"
        );
        assert_eq!(
            String::from_utf8(render(&t, OutputFormat::Jsonl)).unwrap(),
            "{\"metadata\":{\"k\":\"v\"}}\n"
        );
    }

    #[test]
    fn csv_quotes_when_needed() {
        let text = String::from_utf8(render(&sample(), OutputFormat::Csv)).unwrap();
        assert!(text.contains("\"a,b\",1.0000000000000001e-1,3,true"));
        assert!(text.contains("\"say \"\"hi\"\"\",-2.5000000000000000e-1,,false"));
    }

    #[test]
    fn jsonl_lines_are_valid_json() {
        let text = String::from_utf8(render(&sample(), OutputFormat::Jsonl)).unwrap();
        let lines: Vec<serde_json::Value> = text
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0]["metadata"]["seed"], "7");
        assert_eq!(lines[1]["x"].as_f64().unwrap(), 0.1);
        assert!(lines[2]["n"].is_null());
    }

    #[test]
    fn write_is_deterministic() {
        let t = sample();
        let mut a = Vec::new();
        let mut b = Vec::new();
        let n = write_results(&t, OutputFormat::Csv, &mut a).unwrap();
        write_results(&t, OutputFormat::Csv, &mut b).unwrap();
        assert_eq!(a, b);
        assert_eq!(n, a.len());
    }

    #[test]
    fn non_finite_floats_have_names() {
        assert_eq!(format_float(f64::NAN), "NaN");
        assert_eq!(format_float(f64::NEG_INFINITY), "-inf");
        assert_eq!(format_float(1.0), "1.0000000000000000e0");
    }
}

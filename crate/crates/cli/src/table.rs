use std::io::Write;

use serde_json::{Map, Value};

pub const SCHEMA_VERSION: u64 = 1;

pub type Row = Map<String, Value>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Builds a row from `(column, value)` pairs, keeping their order.
pub fn row<I, K>(cells: I) -> Row
where
    I: IntoIterator<Item = (K, Value)>,
    K: Into<String>,
{
    cells.into_iter().map(|(k, v)| (k.into(), v)).collect()
}

/// Flattens a serializable record into a row.
pub fn record<T: serde::Serialize>(value: &T) -> Row {
    match serde_json::to_value(value) {
        Ok(Value::Object(map)) => map,
        Ok(other) => row([("value", other)]),
        Err(e) => row([("error", Value::String(e.to_string()))]),
    }
}

/// Non-finite floats become `null`, which is what JSON can carry.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn emit(rows: &[Row], format: Format, out: &mut dyn Write) -> std::io::Result<()> {
    match format {
        Format::Json => {
            let doc = serde_json::json!({ "schema_version": SCHEMA_VERSION, "rows": rows });
            serde_json::to_writer_pretty(&mut *out, &doc)?;
            writeln!(out)
        }
        Format::Csv => write_csv(rows, out),
    }
}

/// Column set is the union over rows in first-seen order; absent cells are empty.
fn write_csv(rows: &[Row], out: &mut dyn Write) -> std::io::Result<()> {
    let mut header: Vec<&str> = Vec::new();
    for r in rows {
        for k in r.keys() {
            if !header.contains(&k.as_str()) {
                header.push(k);
            }
        }
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(out);
    w.write_record(&header)?;
    for r in rows {
        w.write_record(header.iter().map(|h| r.get(*h).map_or(String::new(), cell)))?;
    }
    w.flush()
}

/// Numbers are printed exactly as in the JSON output so both formats carry
/// identical digits.
pub fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn csv_quotes_and_unions_columns() {
        let rows = vec![
            row([("a", json!(1)), ("b", json!("x,y"))]),
            row([("a", json!(0.5)), ("c", json!("say \"hi\""))]),
        ];
        let mut buf = Vec::new();
        emit(&rows, Format::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "a,b,c\r\n1,\"x,y\",\r\n0.5,,\"say \"\"hi\"\"\"\r\n");
    }

    #[test]
    fn non_finite_is_null() {
        assert_eq!(num(f64::NAN), Value::Null);
        assert_eq!(num(f64::INFINITY), Value::Null);
        assert_eq!(num(0.25), json!(0.25));
    }
}

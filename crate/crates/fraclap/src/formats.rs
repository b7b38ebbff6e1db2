//! Dataset files: CSV (or JSON) data plus a JSON metadata sidecar.
//!
//! Data files are a pure function of the run parameters. The sidecar holds
//! the parameters, column descriptions, derived scalars and a timestamp.
//! Every file is written to a temporary in the target directory and renamed
//! into place.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

/// One cell of a dataset row.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

/// 17 significant digits, enough to round-trip any double.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

impl Cell {
    fn to_field(&self) -> String {
        match self {
            Cell::Num(v) => format_number(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Int(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

/// Column-documented table.
#[derive(Debug, Clone, Default)]
pub struct Table {
    columns: Vec<(String, String)>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    /// `columns` pairs each name with a one-line description.
    pub fn new(columns: &[(&str, &str)]) -> Self {
        Table {
            columns: columns
                .iter()
                .map(|(n, d)| (n.to_string(), d.to_string()))
                .collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn columns(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|(n, _)| n.as_str())
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    /// CSV with a `#` comment header naming and describing each column.
    pub fn to_csv(&self, title: &str) -> CliResult<Vec<u8>> {
        let mut buf = Vec::new();
        writeln!(buf, "# {title}").expect("in-memory write");
        for (name, desc) in &self.columns {
            writeln!(buf, "# {name}: {desc}").expect("in-memory write");
        }
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(self.columns())
            .map_err(|e| CliError::Format(e.to_string()))?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_field))
                .map_err(|e| CliError::Format(e.to_string()))?;
        }
        w.into_inner().map_err(|e| CliError::Format(e.to_string()))
    }

    /// Array of row objects.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .columns
                        .iter()
                        .zip(row)
                        .map(|((n, _), c)| (n.clone(), c.to_json()))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }

    fn column_docs(&self) -> Value {
        Value::Object(
            self.columns
                .iter()
                .map(|(n, d)| (n.clone(), Value::from(d.clone())))
                .collect(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    Csv,
    Json,
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// File stem encoding the experiment and its parameters, e.g.
/// `scaling_alpha1.5_h1_N64_M128`.
pub fn file_stem(experiment: &str, params: &[(&str, String)]) -> String {
    let mut stem = experiment.to_string();
    for (k, v) in params {
        stem.push('_');
        stem.push_str(k);
        stem.push_str(v);
    }
    stem
}

/// A dataset ready to be written.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub experiment: String,
    pub stem: String,
    pub table: Table,
    pub parameters: Map<String, Value>,
    /// Derived scalars (fitted slopes, bounds) and notes.
    pub summary: Map<String, Value>,
}

/// Paths of a written dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Written {
    pub data: PathBuf,
    pub sidecar: PathBuf,
}

impl Dataset {
    pub fn new(experiment: &str, stem: String, table: Table) -> Self {
        Dataset {
            experiment: experiment.into(),
            stem,
            table,
            parameters: Map::new(),
            summary: Map::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.parameters.insert(key.into(), value.into());
        self
    }

    pub fn note(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.summary.insert(key.into(), value.into());
        self
    }

    /// Writes the data file and `<stem>.meta.json`.
    pub fn write(&self, dir: &Path, format: DataFormat) -> CliResult<Written> {
        let (data, bytes) = match format {
            DataFormat::Csv => (
                dir.join(format!("{}.csv", self.stem)),
                self.table.to_csv(&self.experiment)?,
            ),
            DataFormat::Json => {
                let mut bytes = serde_json::to_vec_pretty(&self.table.to_json())
                    .map_err(|e| CliError::Format(e.to_string()))?;
                bytes.push(b'\n');
                (dir.join(format!("{}.json", self.stem)), bytes)
            }
        };
        write_atomic(&data, &bytes)?;

        let created = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let mut meta = Map::new();
        meta.insert("experiment".into(), Value::from(self.experiment.clone()));
        meta.insert(
            "data_file".into(),
            Value::from(data.file_name().unwrap().to_string_lossy().into_owned()),
        );
        meta.insert("format".into(), serde_json::to_value(format).unwrap());
        meta.insert("parameters".into(), Value::Object(self.parameters.clone()));
        meta.insert("columns".into(), self.table.column_docs());
        meta.insert("summary".into(), Value::Object(self.summary.clone()));
        meta.insert("rows".into(), Value::from(self.table.rows().len()));
        meta.insert("generator".into(), Value::from(concat!("fraclap ", env!("CARGO_PKG_VERSION"))));
        meta.insert("created_unix".into(), Value::from(created));
        let sidecar = dir.join(format!("{}.meta.json", self.stem));
        let mut bytes = serde_json::to_vec_pretty(&Value::Object(meta))
            .map_err(|e| CliError::Format(e.to_string()))?;
        bytes.push(b'\n');
        write_atomic(&sidecar, &bytes)?;
        Ok(Written { data, sidecar })
    }
}

/// Compact parameter rendering for file names: `1.5`, `0.5`, `1`.
pub fn short(v: f64) -> String {
    format!("{v}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [std::f64::consts::PI, -2.0 / std::f64::consts::PI, 1e-300, 0.1 + 0.2, 0.0] {
            let s = format_number(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(format_number(1.5), "1.5000000000000000e0");
    }

    #[test]
    fn csv_has_documented_header() {
        let mut t = Table::new(&[("m", "index"), ("value", "coefficient")]);
        t.push(vec![0usize.into(), 1.5.into()]);
        t.push(vec![1usize.into(), Cell::Empty]);
        let text = String::from_utf8(t.to_csv("demo").unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines, ["# demo", "# m: index", "# value: coefficient", "m,value", "0,1.5000000000000000e0", "1,"]);
    }

    #[test]
    fn json_rows_use_column_names() {
        let mut t = Table::new(&[("a", ""), ("b", "")]);
        t.push(vec![Cell::Int(3), Cell::Num(f64::NAN)]);
        assert_eq!(t.to_json(), serde_json::json!([{"a": 3, "b": null}]));
    }

    #[test]
    fn stems_encode_parameters() {
        let s = file_stem("scaling", &[("alpha", short(1.5)), ("N", "64".into())]);
        assert_eq!(s, "scaling_alpha1.5_N64");
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/x.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path().join("sub")).unwrap().count(), 1);
    }
}

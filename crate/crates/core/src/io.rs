//! File formats: density matrices as JSON, CSV emission, and schema checks for
//! every CSV the tools write.
//!
//! Density-matrix JSON: `{"n": 2, "data": [[re, im], …]}` with `4^n` entries in
//! row-major order.
//!
//! CSV: header line, `,` separators, `.` decimals, no quoting, LF line endings.

use crate::state::QuantumState;
use crate::{CMatrix, Result, VqsdError, C64};
use serde::{Deserialize, Serialize};

/// Tolerance for hermiticity, trace and positivity of loaded density matrices.
pub const LOAD_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityFile {
    pub n: usize,
    pub data: Vec<[f64; 2]>,
}

impl DensityFile {
    pub fn from_state(state: &QuantumState) -> Self {
        let m = state.matrix();
        let d = m.nrows();
        let mut data = Vec::with_capacity(d * d);
        for r in 0..d {
            for c in 0..d {
                let z = m[(r, c)];
                data.push([z.re, z.im]);
            }
        }
        DensityFile { n: state.n_qubits(), data }
    }

    pub fn to_state(&self) -> Result<QuantumState> {
        if self.n == 0 || self.n > crate::state::MAX_QUBITS {
            return Err(VqsdError::Parse(format!("unsupported qubit count {}", self.n)));
        }
        let d = 1usize << self.n;
        if self.data.len() != d * d {
            return Err(VqsdError::DimensionMismatch { expected: d * d, found: self.data.len() });
        }
        if self.data.iter().flatten().any(|x| !x.is_finite()) {
            return Err(VqsdError::Parse("non-finite matrix entry".into()));
        }
        let m = CMatrix::from_fn(d, d, |r, c| {
            let [re, im] = self.data[r * d + c];
            C64::new(re, im)
        });
        QuantumState::density_with_tol(m, LOAD_TOL)
    }
}

pub fn density_from_json(text: &str) -> Result<QuantumState> {
    let file: DensityFile = serde_json::from_str(text)?;
    file.to_state()
}

pub fn density_to_json(state: &QuantumState) -> Result<String> {
    Ok(serde_json::to_string_pretty(&DensityFile::from_state(state))?)
}

/// Shortest round-trip decimal form; never uses locale separators.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// Builds a CSV body line by line.
#[derive(Debug, Clone)]
pub struct CsvWriter {
    columns: usize,
    body: String,
}

impl CsvWriter {
    pub fn new(header: &[&str]) -> Self {
        let mut body = header.join(",");
        body.push('\n');
        CsvWriter { columns: header.len(), body }
    }

    pub fn row(&mut self, fields: &[String]) {
        debug_assert_eq!(fields.len(), self.columns);
        self.body.push_str(&fields.join(","));
        self.body.push('\n');
    }

    pub fn finish(self) -> String {
        self.body
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnType {
    Int,
    Float,
    Bool,
    Bitstring,
    Text,
}

#[derive(Debug, Clone, Copy)]
pub struct CsvSchema {
    pub name: &'static str,
    pub columns: &'static [(&'static str, ColumnType)],
}

use ColumnType::*;

pub const TRACE_SCHEMA: CsvSchema =
    CsvSchema { name: "trace", columns: &[("iteration", Int), ("cost", Float), ("D", Int), ("wall_time", Float)] };
pub const EIGENVALUE_SCHEMA: CsvSchema = CsvSchema {
    name: "eigenvalues",
    columns: &[("bitstring", Bitstring), ("frequency", Int), ("estimate", Float), ("rel_error", Float), ("accepted", Bool)],
};
pub const OBSERVABLE_SCHEMA: CsvSchema =
    CsvSchema { name: "observable", columns: &[("bitstring", Bitstring), ("estimate", Float), ("observable", Float)] };
pub const LANDSCAPE_SCHEMA: CsvSchema =
    CsvSchema { name: "landscape", columns: &[("angle", Float), ("cost", Float), ("std_error", Float)] };
pub const QPCA_SCHEMA: CsvSchema =
    CsvSchema { name: "qpca", columns: &[("t", Float), ("k", Int), ("noise", Bool), ("estimate", Float)] };
pub const QSWEEP_SCHEMA: CsvSchema = CsvSchema {
    name: "q_sweep",
    columns: &[("iteration", Int), ("cost", Float), ("c1", Float), ("evaluation", Int)],
};
pub const BENCH_SCHEMA: CsvSchema = CsvSchema {
    name: "bench",
    columns: &[
        ("method", Text),
        ("trial", Int),
        ("final_cost", Float),
        ("evaluations", Int),
        ("wall_time", Float),
        ("success", Bool),
    ],
};
pub const SPECTRUM_SCHEMA: CsvSchema = CsvSchema {
    name: "spectrum",
    columns: &[("p", Float), ("rank", Int), ("inferred", Float), ("exact", Float), ("delta_lambda", Float)],
};

pub const ALL_SCHEMAS: &[CsvSchema] = &[
    TRACE_SCHEMA,
    EIGENVALUE_SCHEMA,
    OBSERVABLE_SCHEMA,
    LANDSCAPE_SCHEMA,
    QPCA_SCHEMA,
    QSWEEP_SCHEMA,
    BENCH_SCHEMA,
    SPECTRUM_SCHEMA,
];

/// Schema whose header matches the first line of `text`.
pub fn detect_schema(text: &str) -> Option<CsvSchema> {
    let header = text.lines().next()?;
    ALL_SCHEMAS.iter().copied().find(|s| {
        let names: Vec<&str> = s.columns.iter().map(|c| c.0).collect();
        names.join(",") == header
    })
}

fn check_field(value: &str, ty: ColumnType) -> bool {
    match ty {
        Int => value.parse::<i64>().is_ok(),
        Float => value.parse::<f64>().map(|v| !v.is_nan()).unwrap_or(false) && !value.contains(['_', ' ']),
        Bool => value == "true" || value == "false",
        Bitstring => !value.is_empty() && value.bytes().all(|b| b == b'0' || b == b'1'),
        Text => !value.is_empty() && !value.contains([',', '"', '\r']),
    }
}

/// Checks the header, field count, field types and line endings. Returns the
/// number of data rows.
pub fn validate_csv(text: &str, schema: &CsvSchema) -> Result<usize> {
    if text.contains('\r') {
        return Err(VqsdError::Parse(format!("{}: CR line endings", schema.name)));
    }
    if !text.is_empty() && !text.ends_with('\n') {
        return Err(VqsdError::Parse(format!("{}: missing final newline", schema.name)));
    }
    let mut reader = csv::ReaderBuilder::new().has_headers(true).quoting(false).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| VqsdError::Parse(e.to_string()))?.clone();
    let expected: Vec<&str> = schema.columns.iter().map(|c| c.0).collect();
    if header.iter().collect::<Vec<_>>() != expected {
        return Err(VqsdError::Parse(format!("{}: header {:?}, expected {:?}", schema.name, header, expected)));
    }
    let mut rows = 0;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| VqsdError::Parse(format!("{}: row {}: {e}", schema.name, i + 1)))?;
        for ((value, (col, ty)), _) in record.iter().zip(schema.columns).zip(0..) {
            if !check_field(value, *ty) {
                return Err(VqsdError::Parse(format!("{}: row {}: bad {col} value {value:?}", schema.name, i + 1)));
            }
        }
        rows += 1;
    }
    Ok(rows)
}

/// Detects the schema from the header and validates against it.
pub fn validate_any_csv(text: &str) -> Result<(CsvSchema, usize)> {
    let schema = detect_schema(text).ok_or_else(|| VqsdError::Parse("unrecognized CSV header".into()))?;
    let rows = validate_csv(text, &schema)?;
    Ok((schema, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, seeded};

    #[test]
    fn density_round_trip() {
        let rho = random_density(2, 3, &mut seeded(1));
        let back = density_from_json(&density_to_json(&rho).unwrap()).unwrap();
        assert_eq!(back.matrix().into_owned(), rho.matrix().into_owned());
    }

    #[test]
    fn density_rejections() {
        assert!(density_from_json(r#"{"n":1,"data":[[1,0],[0,0],[0,0]]}"#).is_err());
        assert!(density_from_json(r#"{"n":1,"data":[[1,0],[0,0],[0,0],[1,0]]}"#).is_err());
        assert!(density_from_json(r#"{"n":1,"data":[[1,0],[0,1],[0,0],[0,0]]}"#).is_err());
        assert!(density_from_json(r#"{"n":0,"data":[]}"#).is_err());
        assert!(density_from_json(r#"{"n":1,"data":[[1,0],[0,0],[0,0],[0,0]],"x":1}"#).is_err());
        assert!(density_from_json(r#"{"n":1,"data":[[0.5,0],[0,0],[0,0],[0.5,0]]}"#).is_ok());
    }

    #[test]
    fn csv_round_trip_and_validation() {
        let mut w = CsvWriter::new(&["angle", "cost", "std_error"]);
        w.row(&[fmt_f64(0.5), fmt_f64(1e-12), fmt_f64(0.0)]);
        let text = w.finish();
        assert_eq!(text, "angle,cost,std_error\n0.5,1e-12,0.0\n");
        let (schema, rows) = validate_any_csv(&text).unwrap();
        assert_eq!(schema.name, "landscape");
        assert_eq!(rows, 1);
        assert!(validate_csv("angle,cost,std_error\n0,5,1,0\n", &LANDSCAPE_SCHEMA).is_err());
        assert!(validate_csv("angle,cost,std_error\r\n0.5,1,0\r\n", &LANDSCAPE_SCHEMA).is_err());
        assert!(validate_csv("angle,cost,std_error\nx,1,0\n", &LANDSCAPE_SCHEMA).is_err());
        assert!(validate_any_csv("foo,bar\n").is_err());
        assert!(validate_csv(
            "bitstring,frequency,estimate,rel_error,accepted\n012,1,0.1,1.0,true\n",
            &EIGENVALUE_SCHEMA
        )
        .is_err());
    }

    #[test]
    fn float_format_has_no_locale_artifacts() {
        for x in [1234567.25, -0.001, 1e300, 3.0] {
            let s = fmt_f64(x);
            assert!(!s.contains(',') && !s.contains(' '));
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }
}

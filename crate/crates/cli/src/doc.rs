//! State documents, canonical number formatting and CSV output.

use std::io::Write;

use gree_core::linalg::{asymmetry, SYMMETRY_TOL};
use gree_core::{CovarianceMatrix, Error, ExponentialMatrix};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Number, Value};

pub const ORDERING: &str = "qqpp";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Cm,
    Em,
}

/// A covariance or exponential matrix on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDocument {
    pub n: usize,
    pub ordering: String,
    pub kind: MatrixKind,
    /// Row-major, `2n × 2n`.
    pub matrix: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    pub metadata: Map<String, Value>,
}

impl StateDocument {
    pub fn from_matrix(kind: MatrixKind, m: &DMatrix<f64>) -> Self {
        Self {
            n: m.nrows() / 2,
            ordering: ORDERING.into(),
            kind,
            matrix: (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect(),
            metadata: Map::new(),
        }
    }

    pub fn cm(alpha: &CovarianceMatrix) -> Self {
        Self::from_matrix(MatrixKind::Cm, alpha.matrix())
    }

    pub fn em(m: &ExponentialMatrix) -> Self {
        Self::from_matrix(MatrixKind::Em, m.matrix())
    }

    pub fn with_tag(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.metadata.insert(key.into(), value.into());
        self
    }

    /// Checks the declared shape, ordering and symmetry and returns the matrix.
    pub fn validated_matrix(&self) -> Result<DMatrix<f64>, Error> {
        if self.ordering != ORDERING {
            return Err(Error::InvalidArgument(format!(
                "ordering must be `{ORDERING}`, found `{}`",
                self.ordering
            )));
        }
        let size = 2 * self.n;
        if self.n == 0 || self.matrix.len() != size || self.matrix.iter().any(|row| row.len() != size) {
            return Err(Error::Dimension(format!("n = {} needs a {size}×{size} matrix", self.n)));
        }
        let m = DMatrix::from_fn(size, size, |i, j| self.matrix[i][j]);
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("matrix entries must be finite".into()));
        }
        let asym = asymmetry(&m);
        if asym > SYMMETRY_TOL {
            return Err(Error::NotSymmetric(asym));
        }
        Ok(m)
    }

    pub fn covariance(&self) -> Result<CovarianceMatrix, Error> {
        self.expect_kind(MatrixKind::Cm)?;
        CovarianceMatrix::new(self.validated_matrix()?)
    }

    pub fn exponential(&self) -> Result<ExponentialMatrix, Error> {
        self.expect_kind(MatrixKind::Em)?;
        ExponentialMatrix::new(self.validated_matrix()?)
    }

    fn expect_kind(&self, kind: MatrixKind) -> Result<(), Error> {
        if self.kind != kind {
            return Err(Error::InvalidArgument(format!("expected a {kind:?} document, found {:?}", self.kind)));
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, Error> {
        serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("bad state document: {e}")))
    }

    pub fn render(&self) -> String {
        render_json(&serde_json::to_value(self).expect("documents serialize"))
    }
}

/// `x` at 17 significant digits; non-finite values as `nan`, `inf`, `-inf`.
pub fn fmt17(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

/// Rewrites every non-integer number with [`fmt17`]. Non-finite values were
/// already turned into `null` by serde.
pub fn canonical_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            Value::Number(fmt17(x).parse::<Number>().expect("scientific notation is valid JSON"))
        }
        Value::Array(a) => Value::Array(a.into_iter().map(canonical_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, canonical_floats(v))).collect()),
        other => other,
    }
}

/// Pretty JSON with canonical floats and a trailing newline.
pub fn render_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(&canonical_floats(v.clone())).expect("values serialize");
    s.push('\n');
    s
}

/// Comma-separated table with `#` header comments.
#[derive(Debug, Clone, Default)]
pub struct Csv {
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn comment(&mut self, line: impl Into<String>) {
        self.comments.push(line.into());
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write(&self, out: &mut impl Write) -> std::io::Result<()> {
        for c in &self.comments {
            writeln!(out, "# {c}")?;
        }
        writeln!(out, "{}", self.columns.join(","))?;
        for r in &self.rows {
            writeln!(out, "{}", r.join(","))?;
        }
        Ok(())
    }

    pub fn render(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("utf-8")
    }
}

/// CSV cell for an optional float.
pub fn cell(x: Option<f64>) -> String {
    x.map(fmt17).unwrap_or_default()
}

//! JSON encodings shared by the library and the command-line tool.
//!
//! Complex entries are `[re, im]` pairs, matrices are row-major arrays of rows.
//! Floats are written in shortest round-trip form, so output bytes are a pure
//! function of the values.

use serde::{Deserialize, Serialize};

use crate::cert::{Certificate, Deviations, Verdict};
use crate::linalg::c;
use crate::selfdual::{CovarianceMatrix, SystemShape};
use crate::wick::FieldVector;
use crate::{CMatrix, CVector, Error, Result};

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &CMatrix) -> JsonMatrix {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

pub fn matrix_from_json(rows: &JsonMatrix) -> Result<CMatrix> {
    let n = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != cols) {
        return Err(Error::InvalidInput(format!(
            "row {i} has {} entries, expected {cols}",
            row.len()
        )));
    }
    Ok(CMatrix::from_fn(n, cols, |i, j| {
        c(rows[i][j][0], rows[i][j][1])
    }))
}

fn vector_from_json(entries: &[[f64; 2]]) -> CVector {
    CVector::from_iterator(entries.len(), entries.iter().map(|z| c(z[0], z[1])))
}

/// The covariance file format; field order is fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovarianceJson {
    pub n_alice: usize,
    pub n_bob: usize,
    pub matrix: JsonMatrix,
}

impl From<&CovarianceMatrix> for CovarianceJson {
    fn from(s: &CovarianceMatrix) -> Self {
        Self {
            n_alice: s.shape().n_alice(),
            n_bob: s.shape().n_bob(),
            matrix: matrix_to_json(s.matrix()),
        }
    }
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("malformed {what}: {e}")))
}

/// Parse a covariance file without checking the covariance invariants.
pub fn parse_covariance(text: &str) -> Result<CovarianceMatrix> {
    let raw: CovarianceJson = parse(text, "covariance JSON")?;
    let shape = SystemShape::new(raw.n_alice, raw.n_bob)?;
    let m = matrix_from_json(&raw.matrix)?;
    shape.check_dim(m.nrows(), m.ncols())?;
    Ok(CovarianceMatrix::new_unchecked(shape, m))
}

pub fn covariance_to_json(s: &CovarianceMatrix) -> String {
    serde_json::to_string(&CovarianceJson::from(s)).expect("finite floats serialize")
}

/// A list of field vectors for `shape`.
pub fn parse_fields(text: &str, shape: SystemShape) -> Result<Vec<FieldVector>> {
    let raw: Vec<Vec<[f64; 2]>> = parse(text, "fields JSON")?;
    raw.iter()
        .map(|f| FieldVector::new(shape, vector_from_json(f)))
        .collect()
}

pub fn fields_to_json(fields: &[FieldVector]) -> String {
    let raw: Vec<Vec<[f64; 2]>> = fields
        .iter()
        .map(|f| f.coefficients().iter().map(|z| [z.re, z.im]).collect())
        .collect();
    serde_json::to_string(&raw).expect("finite floats serialize")
}

#[derive(Deserialize)]
#[serde(untagged)]
enum UnitaryJson {
    Bare(JsonMatrix),
    Wrapped { matrix: JsonMatrix },
}

/// A square matrix, either a bare matrix array or an object with a `matrix` key.
pub fn parse_matrix(text: &str) -> Result<CMatrix> {
    let raw: UnitaryJson = parse(text, "matrix JSON")?;
    let rows = match raw {
        UnitaryJson::Bare(m) | UnitaryJson::Wrapped { matrix: m } => m,
    };
    matrix_from_json(&rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateJson {
    pub verdict: Verdict,
    pub deviations: Deviations,
    pub witness: Option<JsonMatrix>,
}

impl From<&Certificate> for CertificateJson {
    fn from(cert: &Certificate) -> Self {
        Self {
            verdict: cert.verdict,
            deviations: cert.deviations,
            witness: cert.witness.as_ref().map(|u| matrix_to_json(u.matrix())),
        }
    }
}

pub fn certificate_to_json(cert: &Certificate) -> String {
    serde_json::to_string(&CertificateJson::from(cert)).expect("finite floats serialize")
}

//! JSON and CSV encodings of operators, algebras and results.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use wallkit::algebra::MatrixAlgebra;
use wallkit::blocks::BlockStructure;
use wallkit::dynamics::LightConeProfile;
use wallkit::kernel::linalg::c64;
use wallkit::kernel::pauli::parse_pauli;
use wallkit::observables::{MeasurementRecord, SffResult};
use wallkit::CMatrix;

/// Row-major matrix of `[re, im]` pairs.
pub type MatrixLiteral = Vec<Vec<[f64; 2]>>;

/// An operator written either as a Pauli string or as a matrix literal.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum OperatorLiteral {
    Pauli(String),
    Matrix(MatrixLiteral),
}

impl OperatorLiteral {
    /// `what` names the field for error messages.
    pub fn to_matrix(&self, what: &str) -> anyhow::Result<CMatrix> {
        match self {
            OperatorLiteral::Pauli(s) => parse_pauli(s).with_context(|| format!("{what}: bad Pauli string")),
            OperatorLiteral::Matrix(m) => matrix_from_literal(m, what),
        }
    }
}

pub fn matrix_from_literal(m: &MatrixLiteral, what: &str) -> anyhow::Result<CMatrix> {
    let n = m.len();
    if n == 0 {
        bail!("{what}: empty matrix");
    }
    for (i, row) in m.iter().enumerate() {
        if row.len() != n {
            bail!("{what}: row {i} has {} entries, expected {n}", row.len());
        }
        if let Some(j) = row.iter().position(|z| !z[0].is_finite() || !z[1].is_finite()) {
            bail!("{what}: entry ({i},{j}) is not finite");
        }
    }
    Ok(CMatrix::from_fn(n, n, |i, j| c64(m[i][j][0], m[i][j][1])))
}

pub fn matrix_to_json(m: &CMatrix) -> Value {
    let rows: Vec<Value> = (0..m.nrows())
        .map(|i| Value::Array((0..m.ncols()).map(|j| json!([m[(i, j)].re, m[(i, j)].im])).collect()))
        .collect();
    Value::Array(rows)
}

/// `{"layout": {"site_dims": …}, "dim": n, "basis": […]}`
pub fn algebra_to_json(alg: &MatrixAlgebra) -> Value {
    json!({
        "layout": {"site_dims": alg.site_dims()},
        "dim": alg.dim(),
        "basis": alg.basis().iter().map(matrix_to_json).collect::<Vec<_>>(),
    })
}

pub fn blocks_to_json(bs: &BlockStructure) -> Value {
    json!({
        "layout": {"site_dims": bs.site_dims()},
        "blocks": bs.blocks(),
        "signature": bs.signature(),
        "v": matrix_to_json(bs.v()),
    })
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// `t,site,residual,in_support`
pub fn lightcone_csv(p: &LightConeProfile) -> anyhow::Result<String> {
    let mut rows = Vec::new();
    for (k, &t) in p.times.iter().enumerate() {
        for (site, r) in p.residuals[k].iter().enumerate() {
            let inside = p.support_sets[k].contains(&site);
            rows.push(vec![t.to_string(), site.to_string(), r.to_string(), u8::from(inside).to_string()]);
        }
    }
    csv_string(&["t", "site", "residual", "in_support"], rows)
}

/// `t,K_mc,stderr,K_analytic`
pub fn sff_csv(r: &SffResult) -> anyhow::Result<String> {
    let rows = (0..r.times.len()).map(|k| {
        vec![
            r.times[k].to_string(),
            r.k_mc[k].to_string(),
            r.stderr[k].to_string(),
            r.k_analytic[k].to_string(),
        ]
    });
    csv_string(&["t", "K_mc", "stderr", "K_analytic"], rows)
}

/// `round,outcome,probability,schmidt_rank,entropy_bits`
pub fn protocol_csv(rec: &MeasurementRecord) -> anyhow::Result<String> {
    let rows = rec.rounds.iter().map(|r| {
        vec![
            r.round.to_string(),
            r.outcome.to_string(),
            r.probability.to_string(),
            r.schmidt_rank.to_string(),
            r.entropy_bits.to_string(),
        ]
    });
    csv_string(&["round", "outcome", "probability", "schmidt_rank", "entropy_bits"], rows)
}

pub fn write_output(path: &Path, contents: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip() {
        let m = parse_pauli("Y").unwrap();
        let v = matrix_to_json(&m);
        let lit: MatrixLiteral = serde_json::from_value(v).unwrap();
        assert_eq!(matrix_from_literal(&lit, "m").unwrap(), m);
    }

    #[test]
    fn ragged_matrix_names_the_row() {
        let lit: MatrixLiteral = serde_json::from_str("[[[1,0],[0,0]],[[0,0]]]").unwrap();
        let e = matrix_from_literal(&lit, "observable").unwrap_err().to_string();
        assert!(e.contains("observable") && e.contains("row 1"), "{e}");
    }

    #[test]
    fn operator_literal_accepts_both_forms() {
        let p: OperatorLiteral = serde_json::from_str("\"ZX\"").unwrap();
        assert_eq!(p.to_matrix("g").unwrap().nrows(), 4);
        let m: OperatorLiteral = serde_json::from_str("[[[0,0],[1,0]],[[1,0],[0,0]]]").unwrap();
        assert_eq!(m.to_matrix("g").unwrap(), parse_pauli("X").unwrap());
        let bad: OperatorLiteral = serde_json::from_str("\"XQ\"").unwrap();
        let e = format!("{:#}", bad.to_matrix("generators[0]").unwrap_err());
        assert!(e.contains("'Q'"), "{e}");
    }
}

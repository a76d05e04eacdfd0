//! On-disk formats: matrix JSON, trace CSV and decomposition JSON.
//!
//! A matrix is stored as `{"n": 3, "entries": [[re, im], ...]}` with the
//! `n * n` entries row-major. Floats in JSON use serde_json's shortest
//! round-trip form, so a write-read cycle is bit exact. Trace CSV rows are
//! `k,psi,residual` with floats at 17 significant digits and events appended
//! as `# event,<k>,<kind>` comment lines. All file writers go through
//! write-then-rename, so a failing write never leaves a truncated file at
//! the target path.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::matrix::UnitaryMatrix;
use crate::scale::ScaleTrace;
use crate::zxz::{XzxzxzDecomposition, ZxzDecomposition};

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    n: usize,
    entries: Vec<[f64; 2]>,
}

/// Serialize a matrix to the JSON wire form.
pub fn matrix_to_json(m: &UnitaryMatrix) -> String {
    let dto = MatrixJson {
        n: m.n(),
        entries: m.entries().iter().map(|z| [z.re, z.im]).collect(),
    };
    serde_json::to_string(&dto).expect("plain numbers always serialize")
}

/// Parse a matrix from the JSON wire form.
///
/// Malformed JSON, wrong entry counts and non-finite entries all surface as
/// distinct errors naming the problem.
pub fn matrix_from_json(text: &str) -> Result<UnitaryMatrix, Error> {
    let dto: MatrixJson = serde_json::from_str(text)?;
    let entries: Vec<Complex64> = dto
        .entries
        .iter()
        .map(|&[re, im]| Complex64::new(re, im))
        .collect();
    UnitaryMatrix::from_entries(dto.n, entries)
}

/// Render a trace as CSV: header, one `k,psi,residual` row per record, then
/// one `# event,<k>,<kind>` line per event.
pub fn trace_to_csv(trace: &ScaleTrace) -> String {
    let mut s = String::from("k,psi,residual\n");
    for r in &trace.records {
        s.push_str(&format!("{},{:.16e},{:.16e}\n", r.k, r.psi, r.residual));
    }
    for e in &trace.events {
        s.push_str(&format!("# event,{},{}\n", e.k, e.kind));
    }
    s
}

#[derive(Serialize)]
struct ZxzJson {
    alpha: f64,
    z1: Vec<f64>,
    x: MatrixJson,
    z2: Vec<f64>,
    residual: f64,
}

/// Serialize a ZXZ decomposition, embedding the reconstruction residual
/// against the original matrix.
pub fn zxz_to_json(d: &ZxzDecomposition, original: &UnitaryMatrix) -> String {
    let dto = ZxzJson {
        alpha: d.alpha,
        z1: d.z1.phases().to_vec(),
        x: MatrixJson {
            n: d.x.n(),
            entries: d.x.entries().iter().map(|z| [z.re, z.im]).collect(),
        },
        z2: d.z2.phases().to_vec(),
        residual: d.residual_against(original),
    };
    serde_json::to_string(&dto).expect("plain numbers always serialize")
}

#[derive(Serialize)]
struct XzxzxzJson {
    alpha: f64,
    x0: Vec<usize>,
    z0: Vec<f64>,
    z1p: Vec<f64>,
    x: MatrixJson,
    z2: Vec<f64>,
    residual: f64,
}

/// Serialize a six-factor decomposition. The permutation factor is stored
/// as the column index of the 1 in each row; `alpha` is the scalar phase of
/// the underlying three-factor form, already absorbed into `z0` and `z1p`.
pub fn xzxzxz_to_json(
    d: &XzxzxzDecomposition,
    alpha: f64,
    original: &UnitaryMatrix,
) -> String {
    let n = d.x0.n();
    let x0: Vec<usize> = (0..n)
        .map(|j| {
            (0..n)
                .find(|&k| (d.x0.get(j, k) - Complex64::new(1.0, 0.0)).norm() < 1e-9)
                .expect("permutation rows contain a unit entry")
        })
        .collect();
    let dto = XzxzxzJson {
        alpha,
        x0,
        z0: d.z0.phases().to_vec(),
        z1p: d.z1p.phases().to_vec(),
        x: MatrixJson {
            n: d.x.n(),
            entries: d.x.entries().iter().map(|z| [z.re, z.im]).collect(),
        },
        z2: d.z2.phases().to_vec(),
        residual: d.residual_against(original),
    };
    serde_json::to_string(&dto).expect("plain numbers always serialize")
}

/// Write `contents` to `path` atomically: the data lands in a temporary
/// file in the same directory and is renamed over the target.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), Error> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::Io(std::io::Error::other("output path has no file name")))?;
    let mut tmp_name = file_name.to_os_string();
    tmp_name.push(format!(".tmp.{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    std::fs::write(&tmp, contents)?;
    if let Err(e) = std::fs::rename(&tmp, path) {
        let _ = std::fs::remove_file(&tmp);
        return Err(Error::Io(e));
    }
    Ok(())
}

/// Read a matrix from a JSON file.
pub fn read_matrix(path: &Path) -> Result<UnitaryMatrix, Error> {
    let text = std::fs::read_to_string(path)?;
    matrix_from_json(&text)
}

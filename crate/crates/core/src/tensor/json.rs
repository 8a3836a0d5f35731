//! `{"dim": n, "entries": [...]}` with `entries` nested `n` deep per tensor
//! order. Each scalar is either a number (real) or `[re, im]`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Complex64, ComplexMatrix, SymTensor3};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TensorJson {
    pub dim: usize,
    pub entries: Value,
}

fn scalar_to_value(z: Complex64, real: bool) -> Value {
    if real {
        Value::from(z.re)
    } else {
        Value::from(vec![z.re, z.im])
    }
}

fn value_to_scalar(v: &Value) -> Result<Complex64> {
    match v {
        Value::Number(x) => Ok(Complex64::new(x.as_f64().unwrap_or(f64::NAN), 0.0)),
        Value::Array(parts) if parts.len() == 2 => {
            let re = parts[0].as_f64();
            let im = parts[1].as_f64();
            match (re, im) {
                (Some(re), Some(im)) => Ok(Complex64::new(re, im)),
                _ => Err(Error::InvalidInput(format!("complex scalar must be [re, im], got {v}"))),
            }
        }
        _ => Err(Error::InvalidInput(format!("expected a number or [re, im], got {v}"))),
    }
}

/// Flatten `depth` levels of length-`dim` arrays in row-major order.
fn flatten(v: &Value, dim: usize, depth: usize, out: &mut Vec<Complex64>) -> Result<()> {
    if depth == 0 {
        out.push(value_to_scalar(v)?);
        return Ok(());
    }
    let items = v.as_array().ok_or_else(|| Error::InvalidInput(format!("expected an array of length {dim}")))?;
    if items.len() != dim {
        return Err(Error::Shape(format!("expected {dim} entries at this level, found {}", items.len())));
    }
    for item in items {
        flatten(item, dim, depth - 1, out)?;
    }
    Ok(())
}

impl TensorJson {
    pub fn from_sym_tensor3(t: &SymTensor3) -> Self {
        let n = t.dim();
        let real = t.max_imag() == 0.0;
        let entries = (0..n)
            .map(|i| {
                Value::from(
                    (0..n)
                        .map(|j| Value::from((0..n).map(|k| scalar_to_value(t.get(i, j, k), real)).collect::<Vec<_>>()))
                        .collect::<Vec<_>>(),
                )
            })
            .collect::<Vec<_>>();
        Self { dim: n, entries: Value::from(entries) }
    }

    pub fn from_complex_matrix(m: &ComplexMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Shape(format!("matrix JSON is square, got {}×{}", m.nrows(), m.ncols())));
        }
        let n = m.nrows();
        let real = m.iter().all(|z| z.im == 0.0);
        let entries = (0..n)
            .map(|i| Value::from((0..n).map(|j| scalar_to_value(m[(i, j)], real)).collect::<Vec<_>>()))
            .collect::<Vec<_>>();
        Ok(Self { dim: n, entries: Value::from(entries) })
    }

    pub fn from_real_matrix(m: &DMatrix<f64>) -> Result<Self> {
        Self::from_complex_matrix(&super::to_complex_matrix(m))
    }

    pub fn to_sym_tensor3(&self) -> Result<SymTensor3> {
        let mut flat = Vec::with_capacity(self.dim.pow(3));
        flatten(&self.entries, self.dim, 3, &mut flat)?;
        Ok(SymTensor3::from_entries_symmetrized(self.dim, flat))
    }

    pub fn to_complex_matrix(&self) -> Result<ComplexMatrix> {
        let mut flat = Vec::with_capacity(self.dim.pow(2));
        flatten(&self.entries, self.dim, 2, &mut flat)?;
        Ok(ComplexMatrix::from_row_slice(self.dim, self.dim, &flat))
    }

    /// Real matrix; fails when any imaginary part is nonzero.
    pub fn to_real_matrix(&self) -> Result<DMatrix<f64>> {
        let m = self.to_complex_matrix()?;
        if m.iter().any(|z| z.im != 0.0) {
            return Err(Error::InvalidInput("expected a real matrix".into()));
        }
        Ok(m.map(|z| z.re))
    }

    pub fn from_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_string_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

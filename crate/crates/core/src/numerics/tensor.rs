use serde::{Deserialize, Serialize};

use crate::error::{CageError, Result};

/// A named, row-major 2-d parameter with a gradient accumulator of the same shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamTensor {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
    #[serde(skip)]
    pub grad: Vec<f64>,
}

impl ParamTensor {
    pub fn zeros(name: impl Into<String>, rows: usize, cols: usize) -> Self {
        ParamTensor {
            name: name.into(),
            rows,
            cols,
            values: vec![0.0; rows * cols],
            grad: vec![0.0; rows * cols],
        }
    }

    pub fn from_values(name: impl Into<String>, rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if values.len() != rows * cols {
            return Err(CageError::Shape(format!(
                "{name}: {} values for shape {rows}x{cols}",
                values.len()
            )));
        }
        Ok(ParamTensor {
            name,
            rows,
            cols,
            grad: vec![0.0; values.len()],
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.cols..(r + 1) * self.cols]
    }

    pub fn grad_row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.grad[r * self.cols..(r + 1) * self.cols]
    }

    pub fn zero_grad(&mut self) {
        self.grad.iter_mut().for_each(|g| *g = 0.0);
    }

    /// Restores the gradient buffer after deserialization.
    pub fn ensure_grad(&mut self) {
        if self.grad.len() != self.values.len() {
            self.grad = vec![0.0; self.values.len()];
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

//! Forward and backward passes of the differentiable building blocks.
//!
//! Backward functions accumulate parameter gradients into the tensors'
//! `grad` buffers and return the gradient with respect to the op's input.

use super::tensor::ParamTensor;
use crate::error::{CageError, Result};

macro_rules! debug_finite {
    ($v:expr, $what:expr) => {
        debug_assert!($v.iter().all(|x: &f64| x.is_finite()), "non-finite output from {}", $what)
    };
}

fn check_dense(w: &ParamTensor, b: &ParamTensor, x: &[f64]) -> Result<()> {
    if w.rows != x.len() {
        return Err(CageError::Shape(format!("{}: input of {} for {} rows", w.name, x.len(), w.rows)));
    }
    if b.len() != w.cols {
        return Err(CageError::Shape(format!("{}: bias of {} for {} outputs", b.name, b.len(), w.cols)));
    }
    Ok(())
}

/// `y = Wᵀx + b` with `W` of shape `(inputs, outputs)`.
pub fn dense_forward(w: &ParamTensor, b: &ParamTensor, x: &[f64]) -> Result<Vec<f64>> {
    check_dense(w, b, x)?;
    let mut y = b.values.clone();
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0.0 {
            continue;
        }
        for (yj, wij) in y.iter_mut().zip(w.row(i)) {
            *yj += wij * xi;
        }
    }
    debug_finite!(y, "dense_forward");
    Ok(y)
}

/// Accumulates `dW = x ⊗ upstream`, `db = upstream` and returns `dx = W·upstream`.
pub fn dense_backward(w: &mut ParamTensor, b: &mut ParamTensor, x: &[f64], upstream: &[f64]) -> Result<Vec<f64>> {
    check_dense(w, b, x)?;
    if upstream.len() != w.cols {
        return Err(CageError::Shape(format!("{}: upstream of {} for {} outputs", w.name, upstream.len(), w.cols)));
    }
    for (gb, u) in b.grad.iter_mut().zip(upstream) {
        *gb += u;
    }
    let cols = w.cols;
    let mut dx = vec![0.0; x.len()];
    for (i, &xi) in x.iter().enumerate() {
        let row = &w.values[i * cols..(i + 1) * cols];
        dx[i] = row.iter().zip(upstream).map(|(a, u)| a * u).sum();
        if xi != 0.0 {
            for (g, u) in w.grad[i * cols..(i + 1) * cols].iter_mut().zip(upstream) {
                *g += xi * u;
            }
        }
    }
    debug_finite!(dx, "dense_backward");
    Ok(dx)
}

pub fn relu(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| v.max(0.0)).collect()
}

/// Gradient through ReLU given the pre-activation.
pub fn relu_backward(pre: &[f64], upstream: &[f64]) -> Vec<f64> {
    pre.iter().zip(upstream).map(|(&p, &u)| if p > 0.0 { u } else { 0.0 }).collect()
}

pub fn embedding_lookup(table: &ParamTensor, index: usize) -> Result<&[f64]> {
    if index >= table.rows {
        return Err(CageError::IndexOutOfRange {
            what: "embedding table",
            index,
            len: table.rows,
        });
    }
    Ok(table.row(index))
}

/// Scatters `upstream` into row `index` of the table's gradient.
pub fn embedding_backward(table: &mut ParamTensor, index: usize, upstream: &[f64]) -> Result<()> {
    if index >= table.rows {
        return Err(CageError::IndexOutOfRange {
            what: "embedding table",
            index,
            len: table.rows,
        });
    }
    if upstream.len() != table.cols {
        return Err(CageError::Shape(format!("{}: upstream of {} for width {}", table.name, upstream.len(), table.cols)));
    }
    for (g, u) in table.grad_row_mut(index).iter_mut().zip(upstream) {
        *g += u;
    }
    Ok(())
}

/// Element-wise mean, summed left to right in the given order.
pub fn mean_pool(vectors: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = vectors.first().ok_or(CageError::Empty("mean_pool input"))?;
    let mut sum = vec![0.0; first.len()];
    for v in vectors {
        if v.len() != sum.len() {
            return Err(CageError::Shape(format!("mean_pool: length {} vs {}", v.len(), sum.len())));
        }
        for (s, x) in sum.iter_mut().zip(v) {
            *s += x;
        }
    }
    let n = vectors.len() as f64;
    sum.iter_mut().for_each(|s| *s /= n);
    debug_finite!(sum, "mean_pool");
    Ok(sum)
}

/// Each pooled input receives `upstream / count`.
pub fn mean_pool_backward(count: usize, upstream: &[f64]) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(CageError::Empty("mean_pool input"));
    }
    let n = count as f64;
    Ok(upstream.iter().map(|u| u / n).collect())
}

/// Max-shifted softmax.
pub fn softmax(logits: &[f64]) -> Result<Vec<f64>> {
    if logits.iter().any(|l| !l.is_finite()) {
        return Err(CageError::NonFinite("logits"));
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / total).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxCrossEntropy {
    pub loss: f64,
    pub probabilities: Vec<f64>,
    /// `p - onehot(true_class)`, the gradient of the loss w.r.t. the logits.
    pub grad: Vec<f64>,
}

pub fn softmax_cross_entropy(logits: &[f64], true_class: usize) -> Result<SoftmaxCrossEntropy> {
    if true_class >= logits.len() {
        return Err(CageError::IndexOutOfRange {
            what: "class",
            index: true_class,
            len: logits.len(),
        });
    }
    if logits.iter().any(|l| !l.is_finite()) {
        return Err(CageError::NonFinite("logits"));
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_total = logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
    let loss = -(logits[true_class] - max - log_total);
    let probabilities = softmax(logits)?;
    let mut grad = probabilities.clone();
    grad[true_class] -= 1.0;
    Ok(SoftmaxCrossEntropy {
        loss,
        probabilities,
        grad,
    })
}

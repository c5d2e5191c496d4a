use serde::{Deserialize, Serialize};

use super::tensor::ParamTensor;
use crate::error::{CageError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moment estimates for each parameter tensor, in parameter order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub config: AdamConfig,
    pub t: u64,
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new<'a>(config: AdamConfig, params: impl IntoIterator<Item = &'a ParamTensor>) -> Self {
        let (m, v) = params
            .into_iter()
            .map(|p| (vec![0.0; p.len()], vec![0.0; p.len()]))
            .unzip();
        AdamState { config, t: 0, m, v }
    }
}

/// One bias-corrected Adam update over `params`; gradients are zeroed afterwards.
pub fn adam_step(params: &mut [&mut ParamTensor], state: &mut AdamState) -> Result<()> {
    if params.len() != state.m.len() {
        return Err(CageError::Shape(format!(
            "optimizer tracks {} tensors, got {}",
            state.m.len(),
            params.len()
        )));
    }
    state.t = state.t.checked_add(1).ok_or(CageError::TimestepOverflow)?;
    let AdamConfig { lr, beta1, beta2, eps } = state.config;
    let t = state.t as f64;
    let c1 = 1.0 - beta1.powf(t);
    let c2 = 1.0 - beta2.powf(t);

    for ((p, m), v) in params.iter_mut().zip(&mut state.m).zip(&mut state.v) {
        if m.len() != p.len() {
            return Err(CageError::Shape(format!("{}: moment size {} vs {}", p.name, m.len(), p.len())));
        }
        for i in 0..p.values.len() {
            let g = p.grad[i];
            m[i] = beta1 * m[i] + (1.0 - beta1) * g;
            v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            p.values[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
        p.zero_grad();
    }
    Ok(())
}

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{CageError, Result};

/// p-value reported for differences with zero variance but a nonzero mean.
pub const DEGENERATE_P: f64 = 0.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedTTest {
    /// Mean of `a - b`.
    pub mean_difference: f64,
    pub t: f64,
    /// Two-sided p-value.
    pub p: f64,
    pub dof: usize,
    /// The differences had zero variance, so `t` is infinite or zero by convention.
    pub degenerate: bool,
}

/// Paired t-test on `a - b` with `n - 1` degrees of freedom.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<PairedTTest> {
    if a.len() != b.len() {
        return Err(CageError::Shape(format!("paired samples of {} and {}", a.len(), b.len())));
    }
    let n = a.len();
    if n < 2 {
        return Err(CageError::InsufficientData(format!("{n} pairs; need at least 2")));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    if d.iter().any(|v| !v.is_finite()) {
        return Err(CageError::NonFinite("paired differences"));
    }
    let nf = n as f64;
    let mean = d.iter().sum::<f64>() / nf;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let dof = n - 1;

    // spread below rounding noise of the mean counts as zero variance
    if var.sqrt() <= 1e-14 * mean.abs().max(f64::MIN_POSITIVE) || var == 0.0 {
        let (t, p) = if mean == 0.0 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY.copysign(mean), DEGENERATE_P)
        };
        return Ok(PairedTTest {
            mean_difference: mean,
            t,
            p,
            dof,
            degenerate: true,
        });
    }
    let t = mean / (var / nf).sqrt();
    let dist = StudentsT::new(0.0, 1.0, dof as f64).map_err(|e| CageError::Invariant(e.to_string()))?;
    let p = (2.0 * dist.sf(t.abs())).min(1.0);
    Ok(PairedTTest {
        mean_difference: mean,
        t,
        p,
        dof,
        degenerate: false,
    })
}

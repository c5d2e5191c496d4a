//! Central finite differences for checking analytic gradients.

/// Step used for central differences.
pub const STEP: f64 = 1e-6;

/// Denominator floor so that near-zero gradients compare by absolute error.
/// Central differences at `STEP` carry roundoff near 1e-10 for O(1) losses.
pub const RELATIVE_FLOOR: f64 = 1e-5;

/// Numerical gradient of `f` at `x`: `(f(x + h eᵢ) - f(x - h eᵢ)) / 2h` per coordinate.
pub fn central_difference(x: &[f64], f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + STEP;
            let plus = f(&probe);
            probe[i] = orig - STEP;
            let minus = f(&probe);
            probe[i] = orig;
            (plus - minus) / (2.0 * STEP)
        })
        .collect()
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(RELATIVE_FLOOR)
}

pub fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len(), "gradient length mismatch");
    analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &n)| relative_error(a, n))
        .fold(0.0, f64::max)
}

use crate::error::{Error, Result};

/// Gamma distribution fitted by matching the first two moments.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaFit {
    pub shape: f64,
    pub scale: f64,
}

/// `shape = mean² / var`, `scale = var / mean` with the population variance.
pub fn gamma_moments(values: &[f64]) -> Result<GammaFit> {
    let ones = vec![1u64; values.len()];
    gamma_moments_weighted(values, &ones)
}

/// As [`gamma_moments`], each value counted `weights[i]` times.
pub fn gamma_moments_weighted(values: &[f64], weights: &[u64]) -> Result<GammaFit> {
    if values.len() != weights.len() {
        return Err(Error::invalid("values and weights differ in length"));
    }
    let count: u64 = weights.iter().sum();
    if values.len() < 2 || count < 2 {
        return Err(Error::invalid("gamma fit needs at least two values"));
    }
    if values.iter().any(|&v| v.is_nan() || v < 0.0) {
        return Err(Error::Domain("gamma fit needs non-negative values".into()));
    }
    let w = count as f64;
    let mean = values.iter().zip(weights).map(|(&v, &k)| v * k as f64).sum::<f64>() / w;
    let var = values
        .iter()
        .zip(weights)
        .map(|(&v, &k)| k as f64 * (v - mean).powi(2))
        .sum::<f64>()
        / w;
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    let flat = !(var > 0.0);
    if flat || mean <= 0.0 {
        return Err(Error::Degenerate("sample has zero variance".into()));
    }
    Ok(GammaFit {
        shape: mean * mean / var,
        scale: var / mean,
    })
}

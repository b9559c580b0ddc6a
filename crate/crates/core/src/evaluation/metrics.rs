//! Scalar comparison metrics.

use crate::{Error, Result};

fn check_pair(predicted: &[f64], actual: &[f64]) -> Result<()> {
    if predicted.is_empty() {
        return Err(Error::Metric("empty input".into()));
    }
    if predicted.len() != actual.len() {
        return Err(Error::Metric(format!(
            "length mismatch: {} predicted vs {} actual",
            predicted.len(),
            actual.len()
        )));
    }
    for v in predicted.iter().chain(actual) {
        if !v.is_finite() {
            return Err(Error::Metric("non-finite value".into()));
        }
    }
    Ok(())
}

/// Root mean squared error between two equal-length vectors.
pub fn rmse(predicted: &[f64], actual: &[f64]) -> Result<f64> {
    check_pair(predicted, actual)?;
    let sum: f64 = predicted
        .iter()
        .zip(actual)
        .map(|(p, a)| (p - a) * (p - a))
        .sum();
    Ok((sum / predicted.len() as f64).sqrt())
}

/// RMSE normalized by the range (max - min) of the actual values.
///
/// A constant actual vector has no range, so normalization is undefined and
/// an error — callers that can tolerate that case should fall back to plain
/// RMSE explicitly rather than get a silently fabricated number.
pub fn nrmse(predicted: &[f64], actual: &[f64]) -> Result<f64> {
    check_pair(predicted, actual)?;
    let max = actual.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = actual.iter().cloned().fold(f64::INFINITY, f64::min);
    let range = max - min;
    if range <= 0.0 {
        return Err(Error::Metric(
            "actual values are constant; range normalization is undefined".into(),
        ));
    }
    Ok(rmse(predicted, actual)? / range)
}

/// Smoothed Kullback-Leibler divergence KL(p || q).
///
/// Inputs are treated as unnormalized weights: epsilon (1e-9) is added to
/// every entry of both vectors and each is renormalized to sum 1, which keeps
/// the result finite when either side has empty cells. Entries must be
/// non-negative and finite.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    const EPS: f64 = 1e-9;
    check_pair(p, q)?;
    if p.iter().chain(q).any(|&v| v < 0.0) {
        return Err(Error::Metric("negative mass in a distribution".into()));
    }
    let p_total: f64 = p.iter().map(|v| v + EPS).sum();
    let q_total: f64 = q.iter().map(|v| v + EPS).sum();
    if p_total <= 0.0 || q_total <= 0.0 {
        return Err(Error::Metric("distribution has no mass".into()));
    }
    let mut total = 0.0;
    for (pv, qv) in p.iter().zip(q) {
        let pi = (pv + EPS) / p_total;
        let qi = (qv + EPS) / q_total;
        total += pi * (pi / qi).ln();
    }
    Ok(total)
}

/// Fraction of positions where the two sequences agree.
pub fn accuracy<T: PartialEq>(predicted: &[T], actual: &[T]) -> Result<f64> {
    if predicted.is_empty() {
        return Err(Error::Metric("empty input".into()));
    }
    if predicted.len() != actual.len() {
        return Err(Error::Metric(format!(
            "length mismatch: {} predicted vs {} actual",
            predicted.len(),
            actual.len()
        )));
    }
    let hits = predicted
        .iter()
        .zip(actual)
        .filter(|(p, a)| p == a)
        .count();
    Ok(hits as f64 / predicted.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rmse_of_identical_vectors_is_zero() {
        assert_eq!(rmse(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
    }

    #[test]
    fn kl_is_zero_for_identical_distributions() {
        let kl = kl_divergence(&[0.2, 0.3, 0.5], &[0.2, 0.3, 0.5]).unwrap();
        assert!(kl.abs() < 1e-12);
    }

    #[test]
    fn kl_handles_zero_cells_via_smoothing() {
        let kl = kl_divergence(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!(kl.is_finite());
        assert!(kl > 1.0, "strongly divergent distributions score high: {kl}");
    }

    #[test]
    fn nrmse_rejects_non_finite_input() {
        assert!(nrmse(&[f64::NAN, 1.0], &[0.0, 1.0]).is_err());
    }
}

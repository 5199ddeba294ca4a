//! Offline Benjamini–Hochberg step-up procedure and its harmonic (arbitrary dependence) variant.

use crate::error::{invalid, Error, Result};
use crate::scalar::{harmonic, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct BhResult<T> {
    /// Largest `i` with `p_(i) <= alpha i / n`, 0 if none.
    pub i_bh: usize,
    /// `p_(i_bh)`, or 0 when nothing is rejected.
    pub threshold: T,
    pub reject_mask: Vec<bool>,
}

impl<T> BhResult<T> {
    pub fn rejections(&self) -> usize {
        self.reject_mask.iter().filter(|&&r| r).count()
    }
}

fn validate<T: Real>(pvalues: &[T], alpha: T) -> Result<()> {
    if pvalues.is_empty() {
        return invalid("pvalues", "[]", "need at least one p-value");
    }
    if !(alpha > T::zero() && alpha <= T::one()) {
        return invalid("alpha", alpha, "level must lie in (0, 1]");
    }
    for (index, &p) in pvalues.iter().enumerate() {
        if !(p >= T::zero() && p <= T::one()) {
            return Err(Error::InvalidPValue { index, value: p.to_f64().unwrap_or(f64::NAN) });
        }
    }
    Ok(())
}

fn step_up<T: Real>(pvalues: &[T], level: T) -> BhResult<T> {
    let n = pvalues.len();
    let mut sorted = pvalues.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("validated p-values"));
    let n_t = T::from_count(n as u64);
    let i_bh = (1..=n).rev().find(|&i| sorted[i - 1] <= level * T::from_count(i as u64) / n_t).unwrap_or(0);
    let threshold = if i_bh == 0 { T::zero() } else { sorted[i_bh - 1] };
    let reject_mask = pvalues.iter().map(|&p| i_bh > 0 && p <= threshold).collect();
    BhResult { i_bh, threshold, reject_mask }
}

/// BH at level `alpha`.
pub fn bh<T: Real>(pvalues: &[T], alpha: T) -> Result<BhResult<T>> {
    validate(pvalues, alpha)?;
    Ok(step_up(pvalues, alpha))
}

/// BH at level `alpha / H_n`.
pub fn bh_adjusted<T: Real>(pvalues: &[T], alpha: T) -> Result<BhResult<T>> {
    validate(pvalues, alpha)?;
    let h: T = harmonic(pvalues.len() as u64);
    Ok(step_up(pvalues, alpha / h))
}

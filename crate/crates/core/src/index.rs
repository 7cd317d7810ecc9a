//! The Compensation Index: a weighted mean of the four components after
//! fixed empirical scaling.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IndexError {
    #[error("separability is flagged as degenerate; index unavailable")]
    FlaggedComponent,
    #[error("invalid index config: {0}")]
    InvalidConfig(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IndexConfig {
    pub divisor_l: f64,
    pub divisor_a: f64,
    /// Weights for L, A, J and H.
    pub weights: [f64; 4],
}

impl Default for IndexConfig {
    fn default() -> Self {
        IndexConfig { divisor_l: 100.0, divisor_a: 10.0, weights: [0.25; 4] }
    }
}

impl IndexConfig {
    pub fn validate(&self) -> Result<(), IndexError> {
        if !(self.divisor_l > 0.0 && self.divisor_a > 0.0 && self.divisor_l.is_finite() && self.divisor_a.is_finite()) {
            return Err(IndexError::InvalidConfig("divisors must be positive".into()));
        }
        if self.weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(IndexError::InvalidConfig("weights must be non-negative".into()));
        }
        if (self.weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(IndexError::InvalidConfig("weights must sum to 1".into()));
        }
        Ok(())
    }
}

/// `w·(L/dL, A/dA, J, H)`; with the defaults `¼(L/100 + A/10 + J + H)`.
pub fn compensation_index<T: Scalar>(l: T, a: T, j: Option<T>, h: T, cfg: &IndexConfig) -> Result<T, IndexError> {
    let j = j.ok_or(IndexError::FlaggedComponent)?;
    let parts = [l / T::lit(cfg.divisor_l), a / T::lit(cfg.divisor_a), j, h];
    if cfg.weights.iter().all(|w| *w == cfg.weights[0]) {
        return Ok(parts.into_iter().sum::<T>() * T::lit(cfg.weights[0]));
    }
    Ok(parts.into_iter().zip(cfg.weights).fold(T::zero(), |acc, (p, w)| acc + p * T::lit(w)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn idx(l: f64, a: f64, j: f64, h: f64) -> f64 {
        compensation_index(l, a, Some(j), h, &IndexConfig::default()).unwrap()
    }

    #[test]
    fn reference_points() {
        assert_eq!(idx(0.0, 0.0, 0.0, 0.5), 0.125);
        assert_eq!(idx(100.0, 10.0, 1.0, 1.0), 1.0);
        assert!((idx(55.1, 10.6, 0.26, 0.65) - 0.63025).abs() < 1e-12);
    }

    #[test]
    fn flagged_separability() {
        assert_eq!(compensation_index(1.0, 1.0, None, 0.5, &IndexConfig::default()), Err(IndexError::FlaggedComponent));
    }

    #[test]
    fn config_validation() {
        assert!(IndexConfig::default().validate().is_ok());
        assert!(IndexConfig { divisor_l: 0.0, ..Default::default() }.validate().is_err());
        assert!(IndexConfig { weights: [0.5; 4], ..Default::default() }.validate().is_err());
        assert!(IndexConfig { weights: [1.0, 0.0, 0.0, 0.0], ..Default::default() }.validate().is_ok());
    }

    proptest! {
        #[test]
        fn strictly_monotone(l in 0.0..500.0f64, a in 0.0..50.0f64, j in 0.0..5.0f64, h in 0.5..1.0f64, bump in 1e-3..10.0f64) {
            let base = idx(l, a, j, h);
            prop_assert!(idx(l + bump, a, j, h) > base);
            prop_assert!(idx(l, a + bump, j, h) > base);
            prop_assert!(idx(l, a, j + bump, h) > base);
            prop_assert!(idx(l, a, j, h + bump) > base);
            prop_assert!(base >= 0.125);
        }

        #[test]
        fn dominance_survives_reweighting(
            x in prop::array::uniform4(0.0..10.0f64),
            d in prop::array::uniform4(0.0..10.0f64),
            w in prop::array::uniform4(0.0..1.0f64),
            dl in 1.0..1000.0f64,
            da in 1.0..100.0f64,
        ) {
            let total: f64 = w.iter().sum::<f64>().max(1e-9);
            let cfg = IndexConfig { divisor_l: dl, divisor_a: da, weights: w.map(|v| v / total) };
            let lo = compensation_index(x[0], x[1], Some(x[2]), x[3], &cfg).unwrap();
            let hi = compensation_index(x[0] + d[0], x[1] + d[1], Some(x[2] + d[2]), x[3] + d[3], &cfg).unwrap();
            prop_assert!(hi >= lo - 1e-12);
        }
    }
}

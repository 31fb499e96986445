//! Pooled two-proportion z-test.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Confidence levels every test reports a verdict for.
pub const CONFIDENCE_LEVELS: [f64; 2] = [0.95, 0.99];

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Upper tail `P(Z > z)`, computed directly so it keeps precision for large `z`.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Significance {
    pub confidence: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProportionTest {
    pub successes_a: u64,
    pub trials_a: u64,
    pub successes_b: u64,
    pub trials_b: u64,
    /// `None` when the pooled proportion is 0 or 1 and the standard error vanishes.
    pub z: Option<f64>,
    pub p_value_two_sided: Option<f64>,
    /// `P(Z >= z)`: evidence that group A's proportion exceeds group B's.
    pub p_value_one_sided: Option<f64>,
    pub significant_at: Vec<Significance>,
}

impl ProportionTest {
    pub fn computable(&self) -> bool {
        self.z.is_some()
    }

    pub fn proportion_a(&self) -> f64 {
        self.successes_a as f64 / self.trials_a as f64
    }

    pub fn proportion_b(&self) -> f64 {
        self.successes_b as f64 / self.trials_b as f64
    }

    /// Two-sided verdict at an arbitrary confidence level.
    pub fn significant(&self, confidence: f64) -> bool {
        self.p_value_two_sided.is_some_and(|p| p < 1.0 - confidence)
    }
}

pub fn two_proportion_z(
    successes_a: u64,
    trials_a: u64,
    successes_b: u64,
    trials_b: u64,
) -> Result<ProportionTest> {
    if trials_a == 0 || trials_b == 0 {
        return Err(Error::InvalidProportion(
            "trial counts must be positive".into(),
        ));
    }
    if successes_a > trials_a || successes_b > trials_b {
        return Err(Error::InvalidProportion(
            "successes cannot exceed trials".into(),
        ));
    }
    let (na, nb) = (trials_a as f64, trials_b as f64);
    let pa = successes_a as f64 / na;
    let pb = successes_b as f64 / nb;
    let pooled = (successes_a + successes_b) as f64 / (na + nb);
    let variance = pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb);

    let z = (variance > 0.0).then(|| (pa - pb) / variance.sqrt());
    let p_two = z.map(|z| libm::erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0));
    let mut test = ProportionTest {
        successes_a,
        trials_a,
        successes_b,
        trials_b,
        z,
        p_value_two_sided: p_two,
        p_value_one_sided: z.map(normal_sf),
        significant_at: Vec::new(),
    };
    test.significant_at = CONFIDENCE_LEVELS
        .iter()
        .map(|&confidence| Significance {
            confidence,
            significant: test.significant(confidence),
        })
        .collect();
    Ok(test)
}

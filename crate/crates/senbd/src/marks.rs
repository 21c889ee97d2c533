//! Event-size (mark) distribution.
//!
//! Sizes follow a logarithmic-series distribution with parameter
//! `q = omega / (omega + 1)`:
//!
//! ```text
//! rho(m) = q^m / (m ln(omega + 1)),   m = 1, 2, ...
//! ```
//!
//! `omega = 0` is the degenerate limit where every mark is one (the plain
//! Hawkes process); it is handled as an explicit branch rather than a limit
//! evaluation to avoid 0/0 in the moment formulas.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Logarithmic-series mark distribution parameterized by `omega >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct MarkDistribution {
    omega: f64,
    q: f64,
    ln1p_omega: f64,
}

#[derive(Debug, Error, PartialEq)]
#[error("mark parameter omega must be finite and >= 0, got {0}")]
pub struct MarkError(pub f64);

impl MarkDistribution {
    pub fn new(omega: f64) -> Result<Self, MarkError> {
        if !(omega.is_finite() && omega >= 0.0) {
            return Err(MarkError(omega));
        }
        Ok(MarkDistribution {
            omega,
            q: omega / (omega + 1.0),
            ln1p_omega: omega.ln_1p(),
        })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Probability of mark `m >= 1`.
    pub fn pmf(&self, m: u64) -> f64 {
        assert!(m >= 1, "marks are positive integers, got {m}");
        if self.omega == 0.0 {
            return if m == 1 { 1.0 } else { 0.0 };
        }
        self.q.powf(m as f64) / (m as f64 * self.ln1p_omega)
    }

    /// E[m] = omega / ln(omega + 1); 1 in the degenerate limit.
    pub fn mean(&self) -> f64 {
        if self.omega == 0.0 {
            1.0
        } else {
            self.omega / self.ln1p_omega
        }
    }

    /// E[m^2] = omega (omega + 1) / ln(omega + 1); 1 in the degenerate limit.
    pub fn second_moment(&self) -> f64 {
        if self.omega == 0.0 {
            1.0
        } else {
            self.omega * (self.omega + 1.0) / self.ln1p_omega
        }
    }

    /// Draws one mark by Kemp's sequential inversion: walk the CDF with the
    /// recurrence `pmf(m+1) = pmf(m) q m / (m+1)`. Expected cost O(E[m]),
    /// one uniform consumed per draw (none when `omega = 0`).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        if self.omega == 0.0 {
            return 1;
        }
        let u: f64 = rng.random();
        let mut m = 1u64;
        let mut pm = self.q / self.ln1p_omega;
        let mut cdf = pm;
        while u >= cdf {
            m += 1;
            pm *= self.q * (m - 1) as f64 / m as f64;
            cdf += pm;
            if pm < 1e-300 {
                // The CDF has saturated in f64; u was in the rounding gap.
                break;
            }
        }
        m
    }
}

impl TryFrom<f64> for MarkDistribution {
    type Error = MarkError;
    fn try_from(omega: f64) -> Result<Self, MarkError> {
        MarkDistribution::new(omega)
    }
}

impl From<MarkDistribution> for f64 {
    fn from(d: MarkDistribution) -> f64 {
        d.omega
    }
}

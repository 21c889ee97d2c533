//! Exponential-mixture memory kernels.
//!
//! The memory kernel is a weighted sum of K exponentials,
//! `n h(t) = sum_k (n_k / tau_k) exp(-t / tau_k)`, so the excess intensity
//! admits a K-dimensional Markovian state. The sum of the weights is the
//! branching ratio `n`; `alpha = sum_k n_k tau_k` is the first time moment
//! that controls the critical power-law exponent of the intensity
//! distribution.
//!
//! A power-law kernel is represented here by its discretization as a finite
//! mixture: the time constants are inverse-gamma quantiles at the midpoint
//! probabilities `(i - 1/2) / K` and the total weight is split equally.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::special::{gamma_q, ln_gamma};

/// One exponential term: weight `n` (dimensionless) and time constant `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelTerm {
    pub n: f64,
    pub tau: f64,
}

/// A memory kernel that is a finite weighted sum of exponentials.
///
/// Immutable after construction; construction checks every weight and time
/// constant is positive and finite. Stationarity (branching ratio below one)
/// is deliberately *not* enforced here: near-critical and critical kernels
/// are the interesting regime. Callers that need the subcritical guarantee
/// check [`ExponentialMixture::branching_ratio`] themselves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<KernelTerm>", into = "Vec<KernelTerm>")]
pub struct ExponentialMixture {
    terms: Vec<KernelTerm>,
}

#[derive(Debug, Error, PartialEq)]
pub enum KernelError {
    #[error("memory kernel needs at least one term")]
    Empty,
    #[error("kernel weight n[{index}] must be positive and finite, got {value}")]
    BadWeight { index: usize, value: f64 },
    #[error("kernel time constant tau[{index}] must be positive and finite, got {value}")]
    BadTimescale { index: usize, value: f64 },
    #[error("power-law shape must be finite and > 1 (finite mean), got {0}")]
    BadShape(f64),
    #[error("quantile probability must lie in (0, 1), got {0}")]
    BadProbability(f64),
    #[error("inverse-gamma shape must be positive and finite, got {0}")]
    BadQuantileShape(f64),
    #[error("quantile inversion did not converge for shape {shape}, p {p}")]
    QuantileNoConverge { shape: f64, p: f64 },
}

impl ExponentialMixture {
    pub fn new(terms: Vec<KernelTerm>) -> Result<Self, KernelError> {
        if terms.is_empty() {
            return Err(KernelError::Empty);
        }
        for (index, term) in terms.iter().enumerate() {
            if !(term.n.is_finite() && term.n > 0.0) {
                return Err(KernelError::BadWeight {
                    index,
                    value: term.n,
                });
            }
            if !(term.tau.is_finite() && term.tau > 0.0) {
                return Err(KernelError::BadTimescale {
                    index,
                    value: term.tau,
                });
            }
        }
        Ok(ExponentialMixture { terms })
    }

    /// Single-term kernel `(n / tau) exp(-t / tau)`.
    pub fn single(n: f64, tau: f64) -> Result<Self, KernelError> {
        Self::new(vec![KernelTerm { n, tau }])
    }

    /// Kernel from `(n, tau)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self, KernelError> {
        Self::new(pairs.iter().map(|&(n, tau)| KernelTerm { n, tau }).collect())
    }

    pub fn terms(&self) -> &[KernelTerm] {
        &self.terms
    }

    /// Number of exponential terms K.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees K >= 1
    }

    /// Branching ratio `n = sum_k n_k`: mean number of direct offspring per
    /// unit event size. `n = 1` is the critical point.
    pub fn branching_ratio(&self) -> f64 {
        self.terms.iter().map(|t| t.n).sum()
    }

    /// First time moment `alpha = sum_k n_k tau_k`.
    pub fn alpha(&self) -> f64 {
        self.terms.iter().map(|t| t.n * t.tau).sum()
    }

    /// Kernel value `sum_k (n_k / tau_k) exp(-t / tau_k)` at lag `t >= 0`.
    pub fn evaluate(&self, t: f64) -> f64 {
        assert!(t >= 0.0, "kernel lag must be non-negative, got {t}");
        self.terms
            .iter()
            .map(|term| term.n / term.tau * (-t / term.tau).exp())
            .sum()
    }

    /// True when the branching ratio is strictly below one.
    pub fn is_subcritical(&self) -> bool {
        self.branching_ratio() < 1.0
    }
}

impl TryFrom<Vec<KernelTerm>> for ExponentialMixture {
    type Error = KernelError;
    fn try_from(terms: Vec<KernelTerm>) -> Result<Self, KernelError> {
        ExponentialMixture::new(terms)
    }
}

impl From<ExponentialMixture> for Vec<KernelTerm> {
    fn from(kernel: ExponentialMixture) -> Self {
        kernel.terms
    }
}

/// CDF of the inverse-gamma distribution with the given shape and unit scale,
/// evaluated at `tau`: `Q(shape, 1/tau)` (upper regularized incomplete gamma).
pub fn inv_gamma_cdf(shape: f64, tau: f64) -> f64 {
    if tau <= 0.0 {
        return 0.0;
    }
    gamma_q(shape, 1.0 / tau)
}

/// Quantile of the inverse-gamma distribution with unit scale.
///
/// Solves `Q(shape, 1/tau) = p` for `tau` by bisection on a bracket,
/// refined with Newton steps clamped inside the bracket. The returned value
/// matches the CDF to a relative accuracy of about 1e-12 in `p`.
pub fn inv_gamma_quantile(shape: f64, p: f64) -> Result<f64, KernelError> {
    if !(shape.is_finite() && shape > 0.0) {
        return Err(KernelError::BadQuantileShape(shape));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(KernelError::BadProbability(p));
    }

    // Bracket the root. The CDF is strictly increasing in tau, from 0 to 1.
    let mut lo = 1.0 / (shape + 1.0);
    let mut expansions = 0;
    while inv_gamma_cdf(shape, lo) > p {
        lo *= 0.5;
        expansions += 1;
        if expansions > 4000 {
            return Err(KernelError::QuantileNoConverge { shape, p });
        }
    }
    let mut hi = 2.0 * lo.max(1.0 / (shape + 1.0));
    while inv_gamma_cdf(shape, hi) < p {
        hi *= 2.0;
        expansions += 1;
        if expansions > 4000 {
            return Err(KernelError::QuantileNoConverge { shape, p });
        }
    }

    let log_norm = ln_gamma(shape);
    let pdf = |tau: f64| (-(shape + 1.0) * tau.ln() - 1.0 / tau - log_norm).exp();

    let mut tau = 0.5 * (lo + hi);
    for _ in 0..200 {
        let err = inv_gamma_cdf(shape, tau) - p;
        if err.abs() <= 1e-12 * p || (hi - lo) <= 1e-15 * tau {
            return Ok(tau);
        }
        if err < 0.0 {
            lo = tau;
        } else {
            hi = tau;
        }
        let step = err / pdf(tau);
        let newton = tau - step;
        tau = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(KernelError::QuantileNoConverge { shape, p })
}

/// Discretizes the power-law kernel `gamma (1 + t)^-(gamma + 1)` as a K-term
/// exponential mixture.
///
/// The continuous kernel is an inverse-gamma superposition of exponentials,
/// so the time constants are taken at the quantile midpoints
/// `(i - 1/2) / K` of InvGamma(gamma, 1) and the branching ratio is split
/// equally, `n_i = n_total / K`. As K grows, `alpha()` of the result
/// converges to `n_total / (gamma - 1)`.
pub fn powerlaw_mixture(
    gamma: f64,
    n_total: f64,
    k: usize,
) -> Result<ExponentialMixture, KernelError> {
    if !(gamma.is_finite() && gamma > 1.0) {
        return Err(KernelError::BadShape(gamma));
    }
    if k == 0 {
        return Err(KernelError::Empty);
    }
    let weight = n_total / k as f64;
    let mut terms = Vec::with_capacity(k);
    for i in 1..=k {
        let p = (i as f64 - 0.5) / k as f64;
        let tau = inv_gamma_quantile(gamma, p)?;
        terms.push(KernelTerm { n: weight, tau });
    }
    ExponentialMixture::new(terms)
}

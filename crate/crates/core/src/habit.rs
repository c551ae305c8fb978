//! External-habit model with a surplus-consumption state. Log surplus
//! follows the heteroskedastic AR(1)
//!
//!   s_{t+1} = (1 - rho) s_bar + rho s_t + lambda(s_t) (dc_{t+1} - g)
//!
//! with sensitivity function
//!
//!   lambda(s) = (1/S_bar) sqrt(1 - 2(s - s_bar)) - 1,
//!   S_bar = sigma sqrt(alpha / (1 - rho))
//!
//! chosen so the riskless rate is constant:
//!
//!   r_f = -ln(beta) + alpha g - (alpha/2)(1 - rho).
//!
//! The discount-factor realization, the conditional Sharpe ratio and the
//! local curvature alpha / S_t follow from the same ingredients. The
//! central verification is that a quadrature expectation of the discount
//! factor reproduces the constant riskless rate at every admissible s.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HabitError {
    #[error("SurplusOutOfRange: steady-state surplus ratio is {0}, must lie in (0, 1) (zero is allowed only for a deterministic endowment)")]
    SurplusOutOfRange(f64),
    #[error("OutOfDomain: log surplus {s} exceeds the sensitivity domain bound {max}")]
    OutOfDomain { s: f64, max: f64 },
    #[error("InvalidSurplus: surplus ratio {0} must lie in (0, 1]")]
    InvalidSurplus(f64),
    #[error("BadParameter: {name} = {value} is outside its admissible range")]
    BadParameter { name: &'static str, value: f64 },
}

/// Habit-economy parameters. `s_bar`, `s_max` and the steady-state
/// surplus ratio are derived at construction and kept consistent.
///
/// Degenerate endowments (`alpha = 0` or `sigma = 0`) collapse the
/// steady-state surplus to zero; `s_bar` and `s_max` are then `-inf`,
/// the riskless-rate formula still applies, and the deterministic
/// surplus dynamics stay pinned at `s_bar`. A zero surplus with a
/// stochastic endowment (`alpha = 0`, `sigma > 0`) has no finite
/// sensitivity function and is rejected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HabitParams {
    pub alpha: f64,
    pub beta: f64,
    /// Mean log consumption growth per period.
    pub g: f64,
    /// Std of log consumption growth per period.
    pub sigma: f64,
    /// Surplus persistence.
    pub rho: f64,
    s_ratio: f64,
    s_bar: f64,
    s_max: f64,
}

impl HabitParams {
    pub fn new(alpha: f64, beta: f64, g: f64, sigma: f64, rho: f64) -> Result<Self, HabitError> {
        if !(alpha >= 0.0) {
            return Err(HabitError::BadParameter {
                name: "alpha",
                value: alpha,
            });
        }
        if !(beta > 0.0) {
            return Err(HabitError::BadParameter {
                name: "beta",
                value: beta,
            });
        }
        if !(sigma >= 0.0) {
            return Err(HabitError::BadParameter {
                name: "sigma",
                value: sigma,
            });
        }
        if !(0.0..1.0).contains(&rho) {
            return Err(HabitError::BadParameter {
                name: "rho",
                value: rho,
            });
        }
        let s_ratio = sigma * (alpha / (1.0 - rho)).sqrt();
        if s_ratio >= 1.0 || (s_ratio == 0.0 && sigma > 0.0) {
            return Err(HabitError::SurplusOutOfRange(s_ratio));
        }
        let s_bar = s_ratio.ln();
        let s_max = s_bar + (1.0 - s_ratio * s_ratio) / 2.0;
        Ok(HabitParams {
            alpha,
            beta,
            g,
            sigma,
            rho,
            s_ratio,
            s_bar,
            s_max,
        })
    }

    /// Steady-state surplus consumption ratio S_bar.
    pub fn steady_state_surplus(&self) -> f64 {
        self.s_ratio
    }

    /// Log of the steady-state surplus ratio.
    pub fn s_bar(&self) -> f64 {
        self.s_bar
    }

    /// Upper edge of the sensitivity domain, where lambda hits zero.
    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    /// Evenly spaced log-surplus grid over
    /// [s_bar - 5 sigma (1 + lambda(s_bar)), s_max], the region a
    /// simulated path effectively visits. Empty for degenerate params.
    pub fn s_grid(&self, points: usize) -> Vec<f64> {
        if !self.s_bar.is_finite() || points == 0 {
            return Vec::new();
        }
        if points == 1 {
            return vec![self.s_bar];
        }
        let lam_bar = 1.0 / self.s_ratio - 1.0;
        let lo = self.s_bar - 5.0 * self.sigma * (1.0 + lam_bar);
        let hi = self.s_max;
        (0..points)
            .map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64)
            .collect()
    }
}

/// Sensitivity function lambda(s). Errors only past the square-root
/// domain; between `s_max` and that bound lambda is clamped at zero
/// (the standard treatment for discrete-time overshoot).
pub fn sensitivity(s: f64, params: &HabitParams) -> Result<f64, HabitError> {
    let arg = 1.0 - 2.0 * (s - params.s_bar);
    if !(arg >= 0.0) {
        return Err(HabitError::OutOfDomain {
            s,
            max: params.s_bar + 0.5,
        });
    }
    if s >= params.s_max {
        return Ok(0.0);
    }
    Ok(arg.sqrt() / params.s_ratio - 1.0)
}

/// The constant riskless rate implied by the sensitivity construction.
pub fn risk_free_const(params: &HabitParams) -> f64 {
    -params.beta.ln() + params.alpha * params.g - 0.5 * params.alpha * (1.0 - params.rho)
}

/// One discount-factor realization M_{t+1} given the current log surplus
/// and the growth shock `theta = dc_{t+1} - g`.
pub fn sdf(s_t: f64, shock: f64, params: &HabitParams) -> Result<f64, HabitError> {
    let lambda = sensitivity(s_t, params)?;
    let exponent =
        -params.alpha * ((1.0 - params.rho) * (params.s_bar - s_t) + shock * (1.0 + lambda));
    Ok(params.beta * (-params.alpha * params.g).exp() * exponent.exp())
}

/// A simulated log-surplus path together with the shocks that drove it.
#[derive(Debug, Clone, PartialEq)]
pub struct SurplusPath {
    /// s_0 .. s_horizon (length horizon + 1), s_0 = s_bar.
    pub s_series: Vec<f64>,
    /// The N(0, sigma^2) growth shocks, one per step.
    pub shocks: Vec<f64>,
    pub seed: u64,
}

/// Simulate the surplus recursion from the steady state. Steps that
/// would overshoot `s_max` are capped there, so every element of the
/// path satisfies `s <= s_max`. Deterministic per seed.
pub fn simulate_surplus(params: &HabitParams, horizon: usize, seed: u64) -> SurplusPath {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = StandardNormal;
    let mut s_series = Vec::with_capacity(horizon + 1);
    let mut shocks = Vec::with_capacity(horizon);
    let mut s = params.s_bar;
    s_series.push(s);
    for _ in 0..horizon {
        let theta: f64 = if params.sigma > 0.0 {
            let z: f64 = normal.sample(&mut rng);
            z * params.sigma
        } else {
            0.0
        };
        shocks.push(theta);
        let gain = if theta == 0.0 {
            0.0
        } else {
            sensitivity(s, params).expect("path is capped at s_max, inside the domain") * theta
        };
        s = (1.0 - params.rho) * params.s_bar + params.rho * s + gain;
        if s > params.s_max {
            s = params.s_max;
        }
        s_series.push(s);
    }
    SurplusPath {
        s_series,
        shocks,
        seed,
    }
}

/// Conditional Sharpe ratio of a frontier asset at log surplus `s`:
/// exact lognormal bound and its linearization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SharpePoint {
    pub exact: f64,
    pub approx: f64,
}

pub fn conditional_sharpe(s: f64, params: &HabitParams) -> Result<SharpePoint, HabitError> {
    let lambda = sensitivity(s, params)?;
    let loading = params.alpha * params.sigma * (1.0 + lambda);
    Ok(SharpePoint {
        exact: (loading * loading).exp_m1().sqrt(),
        approx: loading,
    })
}

/// Local curvature alpha / S_t of the habit-adjusted utility.
pub fn local_curvature(surplus_ratio: f64, alpha: f64) -> Result<f64, HabitError> {
    if !(surplus_ratio > 0.0 && surplus_ratio <= 1.0) {
        return Err(HabitError::InvalidSurplus(surplus_ratio));
    }
    Ok(alpha / surplus_ratio)
}

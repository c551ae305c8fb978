//! Closed-form Hansen-Jagannathan analytics under lognormal consumption
//! growth, plus the two inverse problems that state the equity-premium
//! and risk-free-rate puzzles: the risk aversion implied by an observed
//! Sharpe ratio, and the subjective discount rate implied by a target
//! risk-free rate.
//!
//! For a power-utility discount factor m = beta * G^(-alpha) and log
//! growth x ~ N(mean, sigma^2):
//!
//!   sigma(m)/E(m) = sqrt(exp(alpha^2 sigma^2) - 1) ~= alpha * sigma
//!   ln R_f        = delta + alpha E(x) - (alpha^2 / 2) sigma^2
//!
//! The approximate forms drop the exponential (first identity) or the
//! variance term (second); both are kept because the headline magnitudes
//! of the puzzle are quoted from the approximate arithmetic.

use thiserror::Error;

use crate::types::{LogNormalGrowth, PreferenceParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LognormalError {
    #[error("NoSolution: Sharpe/correlation {0} exceeds every attainable bound for alpha in (0, 1e4]")]
    NoSolution(f64),
    #[error("InvalidCorrelation: correlation must lie in (0, 1], got {0}")]
    InvalidCorrelation(f64),
}

/// Volatility bound on the Sharpe ratio of a frontier asset, in exact and
/// linearized form. `relative_gap = (exact - approx) / exact` (zero when
/// the bound itself is zero).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HjResult {
    pub exact_ratio: f64,
    pub approx_ratio: f64,
    pub relative_gap: f64,
}

/// Risk aversion implied by an observed Sharpe ratio, under the linear
/// approximation and by inverting the exact bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpliedAlpha {
    pub approx: f64,
    pub exact: f64,
}

/// Whether the variance (Jensen) term enters the log risk-free-rate
/// arithmetic. `Off` reproduces the verbal approximation that quotes
/// 50-250% rates; `On` is the exact lognormal formula and the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Jensen {
    #[default]
    On,
    Off,
}

/// Sharpe-ratio bound for risk aversion `alpha` and growth volatility
/// `growth.sigma`. Requires `alpha >= 0` (checked by debug assertion
/// only: the domain is total there).
pub fn hj_bound(alpha: f64, growth: &LogNormalGrowth) -> HjResult {
    debug_assert!(alpha >= 0.0 && growth.sigma >= 0.0);
    let a2s2 = alpha * alpha * growth.sigma * growth.sigma;
    let exact = (a2s2.exp_m1()).sqrt();
    let approx = alpha * growth.sigma;
    let relative_gap = if exact > 0.0 {
        (exact - approx) / exact
    } else {
        0.0
    };
    HjResult {
        exact_ratio: exact,
        approx_ratio: approx,
        relative_gap,
    }
}

/// Log risk-free rate `delta + alpha E(x) - (alpha^2/2) sigma^2(x)`;
/// with `Jensen::Off` the variance term is dropped.
pub fn risk_free_rate(prefs: &PreferenceParams, growth: &LogNormalGrowth, jensen: Jensen) -> f64 {
    let alpha = prefs.alpha();
    let base = prefs.delta() + alpha * growth.mean;
    match jensen {
        Jensen::On => base - 0.5 * alpha * alpha * growth.sigma * growth.sigma,
        Jensen::Off => base,
    }
}

/// Search interval and tolerance for the exact-bound inversion.
const ALPHA_MAX: f64 = 1e4;
const BISECT_TOL: f64 = 1e-10;

/// Risk aversion needed for the volatility bound, scaled by the
/// return-growth correlation `rho`, to reach an observed Sharpe ratio.
///
/// `approx` solves `alpha * sigma * rho = sharpe`; `exact` inverts
/// `sqrt(exp(alpha^2 sigma^2) - 1) * rho = sharpe` by bisection over
/// `(0, 1e4]`. A zero Sharpe ratio needs no risk aversion at all.
pub fn implied_risk_aversion(
    sharpe: f64,
    growth: &LogNormalGrowth,
    correlation: f64,
) -> Result<ImpliedAlpha, LognormalError> {
    if !(correlation > 0.0 && correlation <= 1.0) {
        return Err(LognormalError::InvalidCorrelation(correlation));
    }
    if sharpe == 0.0 {
        return Ok(ImpliedAlpha {
            approx: 0.0,
            exact: 0.0,
        });
    }
    let target = sharpe / correlation;
    if growth.sigma <= 0.0 {
        return Err(LognormalError::NoSolution(target));
    }
    let approx = target / growth.sigma;

    let bound = |alpha: f64| {
        let a2s2 = alpha * alpha * growth.sigma * growth.sigma;
        a2s2.exp_m1().sqrt()
    };
    if bound(ALPHA_MAX) < target {
        return Err(LognormalError::NoSolution(target));
    }
    let (mut lo, mut hi) = (0.0, ALPHA_MAX);
    while hi - lo > BISECT_TOL {
        let mid = 0.5 * (lo + hi);
        if bound(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(ImpliedAlpha {
        approx,
        exact: 0.5 * (lo + hi),
    })
}

/// Subjective discount rate that delivers `target_rf` given risk
/// aversion and growth: `target_rf - alpha E(x) + (alpha^2/2) sigma^2`
/// (variance term dropped under `Jensen::Off`).
pub fn implied_subjective_discount(
    target_rf: f64,
    alpha: f64,
    growth: &LogNormalGrowth,
    jensen: Jensen,
) -> f64 {
    let base = target_rf - alpha * growth.mean;
    match jensen {
        Jensen::On => base + 0.5 * alpha * alpha * growth.sigma * growth.sigma,
        Jensen::Off => base,
    }
}

//! Method-of-moments calibration of the two-state growth chain and the
//! (alpha, beta) grid search for the largest equity premium consistent
//! with a risk-free-rate band.
//!
//! The two-state chain with
//!
//!   lambda_1 = 1 + mu + gamma,  lambda_2 = 1 + mu - gamma,
//!   phi_11 = phi_22 = phi,      phi_12 = phi_21 = 1 - phi
//!
//! has stationary moments mean = 1 + mu, variance = gamma^2 and lag-1
//! autocorrelation 2 phi - 1, so matching mean, variance and
//! autocorrelation of observed gross growth inverts in closed form.

use rayon::prelude::*;
use thiserror::Error;

use crate::markov::{self, MarkovError};
use crate::types::{CoreError, MarkovChain, MomentTargets, PreferenceParams, TimeSeries};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalibrationError {
    #[error("InvalidMoments: need variance >= 0 and |autocorr| < 1, got variance {variance}, autocorr {autocorr}")]
    InvalidMoments { variance: f64, autocorr: f64 },
    #[error("InvalidTwoState: need gamma >= 0, phi in [0,1] and positive growth states, got mu {mu}, gamma {gamma}, phi {phi}")]
    InvalidTwoState { mu: f64, gamma: f64, phi: f64 },
    #[error("TooShort: series yields {len} growth observations, need at least {min}")]
    TooShort { len: usize, min: usize },
    #[error("ZeroVariance: constant growth series has undefined autocorrelation")]
    ZeroVariance,
    #[error("EmptyFeasibleSet: no grid point satisfies the risk-free band [{lo}, {hi}]")]
    EmptyFeasibleSet { lo: f64, hi: f64 },
    #[error(transparent)]
    Chain(#[from] CoreError),
    #[error(transparent)]
    Markov(#[from] MarkovError),
}

/// Two-state chain parameters: mean offset, spread and persistence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoStateParams {
    pub mu: f64,
    pub gamma: f64,
    pub phi: f64,
}

impl TwoStateParams {
    pub fn new(mu: f64, gamma: f64, phi: f64) -> Result<Self, CalibrationError> {
        let p = TwoStateParams { mu, gamma, phi };
        if !(gamma >= 0.0) || !(0.0..=1.0).contains(&phi) || p.lambda1() <= 0.0 || p.lambda2() <= 0.0
        {
            return Err(CalibrationError::InvalidTwoState { mu, gamma, phi });
        }
        Ok(p)
    }

    pub fn lambda1(&self) -> f64 {
        1.0 + self.mu + self.gamma
    }

    pub fn lambda2(&self) -> f64 {
        1.0 + self.mu - self.gamma
    }

    /// Materialize the chain. Degenerate spreads (gamma = 0) collapse to
    /// a single state so the chain stays ergodic; phi = 1 with a spread
    /// is reducible and errors.
    pub fn to_chain(&self) -> Result<MarkovChain, CoreError> {
        if self.gamma == 0.0 {
            return MarkovChain::new(vec![1.0 + self.mu], vec![vec![1.0]]);
        }
        MarkovChain::new(
            vec![self.lambda1(), self.lambda2()],
            vec![
                vec![self.phi, 1.0 - self.phi],
                vec![1.0 - self.phi, self.phi],
            ],
        )
    }
}

/// Analytic stationary moments of the two-state chain.
pub fn two_state_moments(params: &TwoStateParams) -> MomentTargets {
    MomentTargets {
        mean_growth: 1.0 + params.mu,
        variance: params.gamma * params.gamma,
        autocorr: 2.0 * params.phi - 1.0,
    }
}

/// Exact method-of-moments inversion: mu = mean - 1, gamma = sqrt(var),
/// phi = (1 + autocorr) / 2.
pub fn calibrate_two_state(targets: &MomentTargets) -> Result<TwoStateParams, CalibrationError> {
    if targets.validate().is_err() {
        return Err(CalibrationError::InvalidMoments {
            variance: targets.variance,
            autocorr: targets.autocorr,
        });
    }
    TwoStateParams::new(
        targets.mean_growth - 1.0,
        targets.variance.sqrt(),
        (1.0 + targets.autocorr) / 2.0,
    )
}

/// How the observations in a series are to be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    /// Values are consumption levels; growth is the ratio of consecutive levels.
    Levels,
    /// Values are gross growth factors already.
    GrossGrowth,
    /// Values are log growth rates; gross growth is their exponential.
    LogGrowth,
}

/// Sample mean, unbiased variance and lag-1 autocorrelation of gross
/// growth extracted from a series.
pub fn sample_moments(
    series: &TimeSeries,
    kind: SeriesKind,
) -> Result<MomentTargets, CalibrationError> {
    let growth: Vec<f64> = match kind {
        SeriesKind::GrossGrowth => series.values().to_vec(),
        SeriesKind::Levels => series.values().windows(2).map(|w| w[1] / w[0]).collect(),
        SeriesKind::LogGrowth => series.values().iter().map(|v| v.exp()).collect(),
    };
    gross_growth_moments(&growth)
}

/// Moments of a gross-growth sample. Mean and variance use the standard
/// unbiased estimators; the autocorrelation is the centered lag-1
/// cross-product sum over the centered sum of squares.
pub fn gross_growth_moments(growth: &[f64]) -> Result<MomentTargets, CalibrationError> {
    let n = growth.len();
    if n < 2 {
        return Err(CalibrationError::TooShort { len: n, min: 2 });
    }
    let mean = growth.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = growth.iter().map(|x| x - mean).collect();
    let ss: f64 = centered.iter().map(|x| x * x).sum();
    let variance = ss / (n as f64 - 1.0);
    if ss == 0.0 {
        return Err(CalibrationError::ZeroVariance);
    }
    let cross: f64 = centered.windows(2).map(|w| w[0] * w[1]).sum();
    Ok(MomentTargets {
        mean_growth: mean,
        variance,
        autocorr: cross / ss,
    })
}

/// One point of the premium grid search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PremiumPoint {
    pub alpha: f64,
    pub beta: f64,
    pub premium: f64,
    pub risk_free: f64,
    pub equity: f64,
}

/// Grid-search report: the feasible maximum and how much of the grid
/// qualified.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxPremiumResult {
    pub best: PremiumPoint,
    pub n_feasible: usize,
    pub n_solved: usize,
    pub n_grid: usize,
}

pub const DEFAULT_GRID_POINTS: usize = 200;
/// Open interval endpoints are pulled in by this much before gridding.
pub const ENDPOINT_SHRINK: f64 = 1e-3;

/// Largest equilibrium equity premium over an (alpha, beta] grid, subject
/// to the unconditional risk-free rate lying inside `rf_band` (net
/// rates, inclusive). Grid points where no equilibrium exists are
/// skipped; ties prefer smaller alpha, then smaller beta.
pub fn max_premium_search(
    targets: &MomentTargets,
    alpha_range: (f64, f64),
    beta_range: (f64, f64),
    rf_band: (f64, f64),
    points: usize,
) -> Result<MaxPremiumResult, CalibrationError> {
    let params = calibrate_two_state(targets)?;
    let chain = params.to_chain()?;
    let alphas = open_grid(alpha_range, points);
    let betas = open_grid(beta_range, points);

    struct Partial {
        best: Option<PremiumPoint>,
        feasible: usize,
        solved: usize,
    }

    let merged = alphas
        .par_iter()
        .map(|&alpha| {
            let mut acc = Partial {
                best: None,
                feasible: 0,
                solved: 0,
            };
            for &beta in &betas {
                let Ok(prefs) = PreferenceParams::from_beta(alpha, beta) else {
                    continue;
                };
                let Ok(solution) = markov::solve_equilibrium(&chain, &prefs) else {
                    continue;
                };
                acc.solved += 1;
                if solution.unconditional_rf < rf_band.0 || solution.unconditional_rf > rf_band.1 {
                    continue;
                }
                acc.feasible += 1;
                let candidate = PremiumPoint {
                    alpha,
                    beta,
                    premium: solution.premium,
                    risk_free: solution.unconditional_rf,
                    equity: solution.unconditional_equity,
                };
                if better(&candidate, acc.best.as_ref()) {
                    acc.best = Some(candidate);
                }
            }
            acc
        })
        .reduce(
            || Partial {
                best: None,
                feasible: 0,
                solved: 0,
            },
            |a, b| {
                let best = match (a.best, b.best) {
                    (Some(x), y) if better(&x, y.as_ref()) => Some(x),
                    (_, y) => y,
                };
                Partial {
                    best,
                    feasible: a.feasible + b.feasible,
                    solved: a.solved + b.solved,
                }
            },
        );

    match merged.best {
        Some(best) => Ok(MaxPremiumResult {
            best,
            n_feasible: merged.feasible,
            n_solved: merged.solved,
            n_grid: alphas.len() * betas.len(),
        }),
        None => Err(CalibrationError::EmptyFeasibleSet {
            lo: rf_band.0,
            hi: rf_band.1,
        }),
    }
}

/// Deterministic order-independent comparison: higher premium wins, ties
/// go to smaller alpha, then smaller beta.
fn better(candidate: &PremiumPoint, current: Option<&PremiumPoint>) -> bool {
    match current {
        None => true,
        Some(c) => (candidate.premium, c.alpha, c.beta) > (c.premium, candidate.alpha, candidate.beta),
    }
}

fn open_grid((lo, hi): (f64, f64), points: usize) -> Vec<f64> {
    let lo = lo.max(ENDPOINT_SHRINK);
    let hi = if hi >= 1.0 && hi < 1.0 + ENDPOINT_SHRINK {
        // beta's open upper endpoint at 1.
        1.0 - ENDPOINT_SHRINK
    } else {
        hi
    };
    if points <= 1 {
        return vec![hi];
    }
    (0..points)
        .map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64)
        .collect()
}

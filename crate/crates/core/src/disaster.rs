//! Rietz three-state disaster extension of the exchange economy: the
//! usual good and bad growth states plus a rare "ugly" crash state in
//! which consumption drops to a fraction psi of trend. The transition
//! matrix is
//!
//!   | phi            1 - phi - eta   eta |
//!   | 1 - phi - eta  phi             eta |
//!   | 1/2            1/2             0   |
//!
//! so a crash only follows a normal state and never repeats. Pricing
//! reuses the Markov-economy solver; this module adds the chain
//! construction, the eta sweep and a grid search for calibrations that
//! reach a target premium under the classic constraints.

use rayon::prelude::*;
use thiserror::Error;

use crate::calibration::TwoStateParams;
use crate::markov::{self, MarkovError};
use crate::types::{CoreError, MarkovChain, PreferenceParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DisasterError {
    #[error("OrderingViolated: need lambda1 > lambda2 > lambda3 > 0, got {lambda1} / {lambda2} / {lambda3}")]
    OrderingViolated {
        lambda1: f64,
        lambda2: f64,
        lambda3: f64,
    },
    #[error("NonStochastic: need phi >= 0, eta >= 0 and phi + eta <= 1, got phi {phi}, eta {eta}")]
    NonStochastic { phi: f64, eta: f64 },
    #[error("NotFound: no grid point reaches premium {target} under the given constraints")]
    NotFound { target: f64 },
    #[error(transparent)]
    Chain(#[from] CoreError),
    #[error(transparent)]
    Markov(#[from] MarkovError),
}

/// Crash-probability calibration band from the classic study; flagged by
/// `DisasterSpec::in_calibration_band`, never enforced.
pub const ETA_BAND: (f64, f64) = (0.0001, 0.2);

/// Three-state disaster economy parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisasterSpec {
    /// Mean growth offset.
    pub mu: f64,
    /// Spread between the good and bad states.
    pub gamma: f64,
    /// Crash size: consumption falls to psi * (1 + mu).
    pub psi: f64,
    /// Persistence of the normal states.
    pub phi: f64,
    /// Crash probability.
    pub eta: f64,
}

impl DisasterSpec {
    pub fn new(mu: f64, gamma: f64, psi: f64, phi: f64, eta: f64) -> Result<Self, DisasterError> {
        let spec = DisasterSpec {
            mu,
            gamma,
            psi,
            phi,
            eta,
        };
        let (l1, l2, l3) = (spec.lambda1(), spec.lambda2(), spec.lambda3());
        if !(l1 > l2 && l2 > l3 && l3 > 0.0) {
            return Err(DisasterError::OrderingViolated {
                lambda1: l1,
                lambda2: l2,
                lambda3: l3,
            });
        }
        if !(phi >= 0.0 && eta >= 0.0 && phi + eta <= 1.0) {
            return Err(DisasterError::NonStochastic { phi, eta });
        }
        Ok(spec)
    }

    pub fn lambda1(&self) -> f64 {
        1.0 + self.mu + self.gamma
    }

    pub fn lambda2(&self) -> f64 {
        1.0 + self.mu - self.gamma
    }

    pub fn lambda3(&self) -> f64 {
        self.psi * (1.0 + self.mu)
    }

    pub fn in_calibration_band(&self) -> bool {
        self.eta >= ETA_BAND.0 && self.eta <= ETA_BAND.1
    }

    pub fn with_eta(&self, eta: f64) -> Result<Self, DisasterError> {
        DisasterSpec::new(self.mu, self.gamma, self.psi, self.phi, eta)
    }
}

/// Build the three-state chain. With `eta = 0` the crash state is
/// unreachable and the chain is reducible as a 3-state object, so the
/// construction falls back to the two-state subchain on the good and bad
/// states; the priced economy is then exactly the two-state one.
pub fn build_rietz_chain(spec: &DisasterSpec) -> Result<MarkovChain, DisasterError> {
    if spec.eta == 0.0 {
        let chain = MarkovChain::new(
            vec![spec.lambda1(), spec.lambda2()],
            vec![
                vec![spec.phi, 1.0 - spec.phi],
                vec![1.0 - spec.phi, spec.phi],
            ],
        )?;
        return Ok(chain);
    }
    let normal = 1.0 - spec.phi - spec.eta;
    let chain = MarkovChain::new(
        vec![spec.lambda1(), spec.lambda2(), spec.lambda3()],
        vec![
            vec![spec.phi, normal, spec.eta],
            vec![normal, spec.phi, spec.eta],
            vec![0.5, 0.5, 0.0],
        ],
    )?;
    Ok(chain)
}

/// One row of an eta sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub eta: f64,
    pub premium: f64,
    pub risk_free: f64,
}

/// Equilibrium premium and risk-free rate for each crash probability,
/// holding (mu, gamma, psi, phi) and preferences fixed.
pub fn premium_sweep(
    spec_base: &DisasterSpec,
    etas: &[f64],
    prefs: &PreferenceParams,
) -> Result<Vec<SweepPoint>, DisasterError> {
    etas.par_iter()
        .map(|&eta| {
            let spec = spec_base.with_eta(eta)?;
            let chain = build_rietz_chain(&spec)?;
            let solution = markov::solve_equilibrium(&chain, prefs)?;
            Ok(SweepPoint {
                eta,
                premium: solution.premium,
                risk_free: solution.unconditional_rf,
            })
        })
        .collect()
}

/// Search box for `find_disaster_calibration`. The base two-state
/// parameters (mu, gamma, phi) come from the usual moment calibration;
/// the search runs over (eta, alpha, beta, psi).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisasterSearch {
    pub base: TwoStateParams,
    pub eta: (f64, f64),
    pub alpha: (f64, f64),
    pub beta: (f64, f64),
    pub psi: (f64, f64),
    /// Admissible band for the unconditional net risk-free rate.
    pub rf_band: (f64, f64),
    /// Grid points per dimension.
    pub points: usize,
}

/// The crash size is a free parameter; this default box covers crashes
/// from mild (psi = 0.98) to catastrophic (psi = 0.3).
pub const DEFAULT_PSI_RANGE: (f64, f64) = (0.3, 0.98);
pub const DEFAULT_SEARCH_POINTS: usize = 50;

impl DisasterSearch {
    /// Classic constraint set: eta in the calibration band up to
    /// `eta_max`, alpha in (0, alpha_cap], beta in the unit interval,
    /// risk-free rate in [0, 4%].
    pub fn classic(base: TwoStateParams, alpha_cap: f64, eta_max: f64) -> Self {
        DisasterSearch {
            base,
            eta: (ETA_BAND.0, eta_max),
            alpha: (0.0, alpha_cap),
            beta: (0.0, 1.0),
            psi: DEFAULT_PSI_RANGE,
            rf_band: (0.0, 0.04),
            points: DEFAULT_SEARCH_POINTS,
        }
    }
}

/// A qualifying calibration together with what it prices to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisasterCalibration {
    pub spec: DisasterSpec,
    pub prefs: PreferenceParams,
    pub premium: f64,
    pub risk_free: f64,
}

/// Grid search for a parameter point with premium >= `target_premium`
/// and risk-free rate inside the band. Etas are scanned in ascending
/// order and the first qualifying slice wins; within a slice ties prefer
/// the smallest alpha, then beta, then psi, so the result is
/// deterministic for a fixed grid.
pub fn find_disaster_calibration(
    target_premium: f64,
    search: &DisasterSearch,
) -> Result<DisasterCalibration, DisasterError> {
    let etas = closed_grid(search.eta, search.points);
    let alphas = shrunk_grid(search.alpha, search.points);
    let betas = shrunk_grid((search.beta.0, search.beta.1.min(1.0)), search.points);
    let psis = closed_grid(search.psi, search.points);

    for &eta in &etas {
        let hit = alphas
            .par_iter()
            .enumerate()
            .filter_map(|(ai, &alpha)| {
                // First qualifying (beta, psi) for this alpha; scan order
                // makes it the lexicographic minimum.
                for &beta in &betas {
                    let Ok(prefs) = PreferenceParams::from_beta(alpha, beta) else {
                        continue;
                    };
                    for &psi in &psis {
                        let Ok(spec) = DisasterSpec::new(
                            search.base.mu,
                            search.base.gamma,
                            psi,
                            search.base.phi,
                            eta,
                        ) else {
                            continue;
                        };
                        let Ok(chain) = build_rietz_chain(&spec) else {
                            continue;
                        };
                        let Ok(solution) = markov::solve_equilibrium(&chain, &prefs) else {
                            continue;
                        };
                        if solution.premium >= target_premium
                            && solution.unconditional_rf >= search.rf_band.0
                            && solution.unconditional_rf <= search.rf_band.1
                        {
                            return Some((
                                ai,
                                DisasterCalibration {
                                    spec,
                                    prefs,
                                    premium: solution.premium,
                                    risk_free: solution.unconditional_rf,
                                },
                            ));
                        }
                    }
                }
                None
            })
            .min_by_key(|(ai, _)| *ai);
        if let Some((_, calibration)) = hit {
            return Ok(calibration);
        }
    }
    Err(DisasterError::NotFound {
        target: target_premium,
    })
}

fn closed_grid((lo, hi): (f64, f64), points: usize) -> Vec<f64> {
    if points <= 1 || hi <= lo {
        return vec![lo];
    }
    (0..points)
        .map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64)
        .collect()
}

/// Grid over a half-open interval (lo, hi]: the lower endpoint is pulled
/// in by 1e-3, an upper endpoint on the open unit boundary likewise.
fn shrunk_grid((lo, hi): (f64, f64), points: usize) -> Vec<f64> {
    let lo = lo.max(1e-3);
    let hi = if hi == 1.0 { 1.0 - 1e-3 } else { hi };
    closed_grid((lo, hi), points)
}

//! Shared domain records: preferences, growth processes, Markov chains,
//! moment targets and raw time series. Everything is validated at
//! construction and immutable afterwards, so values can be shared freely
//! across threads.

use thiserror::Error;

/// Validation failures for the shared domain types.
///
/// Display strings start with the variant name; the CLI prints them
/// verbatim as its domain-error contract.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error("NonPositiveAlpha: risk aversion must be > 0, got {0}")]
    NonPositiveAlpha(f64),
    #[error("NonPositiveBeta: subjective discount factor must be > 0, got {0}")]
    NonPositiveBeta(f64),
    #[error("NegativeSigma: growth volatility must be >= 0, got {0}")]
    NegativeSigma(f64),
    #[error("InvalidMoments: need variance >= 0 and |autocorr| < 1, got variance {variance}, autocorr {autocorr}")]
    InvalidMoments { variance: f64, autocorr: f64 },
    #[error("EmptyChain: at least one state is required")]
    EmptyChain,
    #[error("DimensionMismatch: {states} states but transition matrix is {rows}x{cols}")]
    DimensionMismatch {
        states: usize,
        rows: usize,
        cols: usize,
    },
    #[error("NonPositiveState: growth state {index} is {value}, must be > 0")]
    NonPositiveState { index: usize, value: f64 },
    #[error("NegativeEntry: transition probability at ({row},{col}) is {value}")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("NonStochasticRow: row {row} sums to {sum} (tolerance 1e-12, renormalization refused)")]
    NonStochasticRow { row: usize, sum: f64 },
    #[error("NonErgodic: chain does not have a single class reachable from every state")]
    NonErgodic,
    #[error("NonMonotonicTime: period at index {index} ({value}) does not increase")]
    NonMonotonicTime { index: usize, value: f64 },
    #[error("TooShort: series has {len} observations, need at least {min}")]
    TooShort { len: usize, min: usize },
}

/// CRRA preference block: risk aversion `alpha` and subjective discount
/// factor `beta`. The subjective discount rate `delta = -ln(beta)` is
/// always derived from `beta`, never stored separately.
///
/// `beta > 1` is admissible (equivalently `delta < 0`); `orthodox()`
/// flags the textbook range `beta` in (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreferenceParams {
    alpha: f64,
    beta: f64,
}

impl PreferenceParams {
    pub fn from_beta(alpha: f64, beta: f64) -> Result<Self, CoreError> {
        if !(alpha > 0.0) {
            return Err(CoreError::NonPositiveAlpha(alpha));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(CoreError::NonPositiveBeta(beta));
        }
        Ok(PreferenceParams { alpha, beta })
    }

    pub fn from_delta(alpha: f64, delta: f64) -> Result<Self, CoreError> {
        Self::from_beta(alpha, (-delta).exp())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Subjective discount rate, `-ln(beta)`.
    pub fn delta(&self) -> f64 {
        -self.beta.ln()
    }

    /// True when `beta` lies in the open unit interval.
    pub fn orthodox(&self) -> bool {
        self.beta > 0.0 && self.beta < 1.0
    }
}

/// Lognormal consumption growth: mean and standard deviation of the log
/// growth rate per period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogNormalGrowth {
    pub mean: f64,
    pub sigma: f64,
}

impl LogNormalGrowth {
    pub fn new(mean: f64, sigma: f64) -> Result<Self, CoreError> {
        if !(sigma >= 0.0) {
            return Err(CoreError::NegativeSigma(sigma));
        }
        Ok(LogNormalGrowth { mean, sigma })
    }
}

/// Calibration targets on gross consumption growth: mean, variance and
/// first-order autocorrelation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentTargets {
    pub mean_growth: f64,
    pub variance: f64,
    pub autocorr: f64,
}

impl MomentTargets {
    pub fn new(mean_growth: f64, variance: f64, autocorr: f64) -> Result<Self, CoreError> {
        let t = MomentTargets {
            mean_growth,
            variance,
            autocorr,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if !(self.variance >= 0.0) || !(self.autocorr.abs() < 1.0) {
            return Err(CoreError::InvalidMoments {
                variance: self.variance,
                autocorr: self.autocorr,
            });
        }
        Ok(())
    }
}

/// A raw observed series: numeric period labels and one value per period.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    timestamps: Vec<f64>,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(timestamps: Vec<f64>, values: Vec<f64>) -> Result<Self, CoreError> {
        if timestamps.len() < 2 {
            return Err(CoreError::TooShort {
                len: timestamps.len(),
                min: 2,
            });
        }
        if timestamps.len() != values.len() {
            return Err(CoreError::DimensionMismatch {
                states: timestamps.len(),
                rows: values.len(),
                cols: 1,
            });
        }
        for i in 1..timestamps.len() {
            if !(timestamps[i] > timestamps[i - 1]) {
                return Err(CoreError::NonMonotonicTime {
                    index: i,
                    value: timestamps[i],
                });
            }
        }
        Ok(TimeSeries { timestamps, values })
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// A finite-state consumption-growth chain: gross growth rates per state
/// and a row-stochastic transition matrix, checked to be irreducible
/// (one class reachable from every state) at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovChain {
    states: Vec<f64>,
    transition: Vec<Vec<f64>>,
}

/// Row sums may deviate from one by at most this much; anything worse is
/// an error, never silently renormalized.
pub const ROW_SUM_TOL: f64 = 1e-12;

impl MarkovChain {
    /// Validate growth states and transition matrix; see [`CoreError`]
    /// for the failure modes. Validation of an already-valid chain's
    /// parts reproduces the chain exactly (no renormalization happens).
    pub fn new(states: Vec<f64>, transition: Vec<Vec<f64>>) -> Result<Self, CoreError> {
        let n = states.len();
        if n == 0 {
            return Err(CoreError::EmptyChain);
        }
        if transition.len() != n || transition.iter().any(|row| row.len() != n) {
            return Err(CoreError::DimensionMismatch {
                states: n,
                rows: transition.len(),
                cols: transition.first().map_or(0, |r| r.len()),
            });
        }
        for (i, &s) in states.iter().enumerate() {
            if !(s > 0.0) || !s.is_finite() {
                return Err(CoreError::NonPositiveState { index: i, value: s });
            }
        }
        for (i, row) in transition.iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                if !(p >= 0.0) || !p.is_finite() {
                    return Err(CoreError::NegativeEntry {
                        row: i,
                        col: j,
                        value: p,
                    });
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(CoreError::NonStochasticRow { row: i, sum });
            }
        }
        if !is_irreducible(&transition) {
            return Err(CoreError::NonErgodic);
        }
        Ok(MarkovChain { states, transition })
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[f64] {
        &self.states
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }
}

/// Reachability test: (I + P)^(n-1) has all-positive entries iff the
/// chain is irreducible. Run on the boolean adjacency so magnitudes
/// cannot underflow.
fn is_irreducible(transition: &[Vec<f64>]) -> bool {
    let n = transition.len();
    let mut reach: Vec<Vec<bool>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| i == j || transition[i][j] > 0.0)
                .collect()
        })
        .collect();
    let mut power = 1;
    while power < n - 1 {
        // Repeated boolean squaring overshoots (n-1) harmlessly:
        // reachability in <= k steps is monotone in k.
        reach = bool_mat_mul(&reach, &reach);
        power *= 2;
    }
    reach.iter().all(|row| row.iter().all(|&x| x))
}

fn bool_mat_mul(a: &[Vec<bool>], b: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).any(|k| a[i][k] && b[k][j]))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preference_round_trip() {
        let p = PreferenceParams::from_beta(2.0, 0.96).unwrap();
        let q = PreferenceParams::from_delta(2.0, p.delta()).unwrap();
        assert!((q.beta() - 0.96).abs() < 1e-14);

        let r = PreferenceParams::from_delta(5.0, -0.7).unwrap();
        assert!((r.delta() + 0.7).abs() < 1e-14);
        assert!(r.beta() > 1.0);
        assert!(!r.orthodox());
        assert!(p.orthodox());
    }

    #[test]
    fn preference_rejects_bad_inputs() {
        assert!(matches!(
            PreferenceParams::from_beta(0.0, 0.9),
            Err(CoreError::NonPositiveAlpha(_))
        ));
        assert!(matches!(
            PreferenceParams::from_beta(2.0, -0.1),
            Err(CoreError::NonPositiveBeta(_))
        ));
    }

    #[test]
    fn single_state_chain_is_valid() {
        let chain = MarkovChain::new(vec![1.0], vec![vec![1.0]]).unwrap();
        assert_eq!(chain.n_states(), 1);
    }

    #[test]
    fn two_state_calibrated_chain_is_valid() {
        // From the 1889-1978 moment calibration: phi = 0.43.
        let chain = MarkovChain::new(
            vec![1.054, 0.982],
            vec![vec![0.43, 0.57], vec![0.57, 0.43]],
        )
        .unwrap();
        assert_eq!(chain.n_states(), 2);
    }

    #[test]
    fn row_sum_off_by_ten_percent_is_rejected() {
        let err = MarkovChain::new(
            vec![1.02, 0.98],
            vec![vec![0.5, 0.4], vec![0.5, 0.5]],
        )
        .unwrap_err();
        assert!(matches!(err, CoreError::NonStochasticRow { row: 0, .. }));
    }

    #[test]
    fn negative_entry_and_state_checks() {
        let err = MarkovChain::new(
            vec![1.02, 0.98],
            vec![vec![1.1, -0.1], vec![0.5, 0.5]],
        )
        .unwrap_err();
        assert!(matches!(err, CoreError::NegativeEntry { .. }));

        let err = MarkovChain::new(vec![1.02, -0.5], vec![vec![0.5, 0.5], vec![0.5, 0.5]])
            .unwrap_err();
        assert!(matches!(err, CoreError::NonPositiveState { index: 1, .. }));
    }

    #[test]
    fn unreachable_state_is_non_ergodic() {
        // State 2 never entered from states 0, 1.
        let err = MarkovChain::new(
            vec![1.05, 0.98, 0.5],
            vec![
                vec![0.4, 0.6, 0.0],
                vec![0.6, 0.4, 0.0],
                vec![0.5, 0.5, 0.0],
            ],
        )
        .unwrap_err();
        assert_eq!(err, CoreError::NonErgodic);
    }

    #[test]
    fn validation_is_idempotent() {
        let chain = MarkovChain::new(
            vec![1.054, 0.982],
            vec![vec![0.43, 0.57], vec![0.57, 0.43]],
        )
        .unwrap();
        let again =
            MarkovChain::new(chain.states().to_vec(), chain.transition().to_vec()).unwrap();
        assert_eq!(chain, again);
    }

    #[test]
    fn moment_targets_validation() {
        assert!(MomentTargets::new(1.018, 1.296e-3, -0.14).is_ok());
        assert!(matches!(
            MomentTargets::new(1.0, 1e-4, 1.2),
            Err(CoreError::InvalidMoments { .. })
        ));
        assert!(matches!(
            MomentTargets::new(1.0, -1e-9, 0.0),
            Err(CoreError::InvalidMoments { .. })
        ));
    }

    #[test]
    fn time_series_ordering() {
        assert!(TimeSeries::new(vec![1.0, 2.0, 3.0], vec![1.0, 1.1, 1.2]).is_ok());
        let err = TimeSeries::new(vec![1.0, 2.0, 2.0], vec![1.0, 1.1, 1.2]).unwrap_err();
        assert!(matches!(err, CoreError::NonMonotonicTime { index: 2, .. }));
    }
}

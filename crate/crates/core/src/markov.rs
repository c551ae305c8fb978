//! Mehra-Prescott pure-exchange equilibrium on a finite consumption-growth
//! chain. Price-dividend weights solve the linear system
//!
//!   w_i = beta * sum_j phi_ij * lambda_j^(1-alpha) * (w_j + 1)
//!
//! equity returns are r_ij = lambda_j (w_j + 1) / w_i - 1, the riskless
//! price per state is p_i = beta * sum_j phi_ij * lambda_j^(-alpha), and
//! unconditional returns weight the conditional ones by the stationary
//! distribution. Returns are net rates per period throughout.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::linalg;
use crate::types::{MarkovChain, PreferenceParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MarkovError {
    #[error("NoEquilibrium: spectral radius {0} >= 1, prices diverge")]
    NoEquilibrium(f64),
    #[error("SingularSystem: equilibrium system is numerically singular")]
    SingularSystem,
    #[error("InvalidHorizon: simulation horizon must be >= 1")]
    InvalidHorizon,
}

/// Everything the pricer produces for one (chain, preferences) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumSolution {
    /// Price-dividend ratio per state.
    pub weights: Vec<f64>,
    /// Realized equity return for the transition i -> j.
    pub equity_return_matrix: Vec<Vec<f64>>,
    /// Expected equity return conditional on the current state.
    pub conditional_equity: Vec<f64>,
    /// Price of the one-period riskless claim per state.
    pub rf_prices: Vec<f64>,
    /// Riskless return conditional on the current state.
    pub conditional_rf: Vec<f64>,
    /// Stationary distribution of the chain.
    pub stationary: Vec<f64>,
    pub unconditional_equity: f64,
    pub unconditional_rf: f64,
    /// Unconditional equity return minus unconditional riskless return.
    pub premium: f64,
}

/// Sample averages along one simulated path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulatedReturns {
    pub equity: f64,
    pub risk_free: f64,
    pub premium: f64,
    pub horizon: usize,
    pub seed: u64,
}

const POWER_TOL: f64 = 1e-10;
const POWER_CAP: usize = 10_000;

/// Stationary distribution `pi = Phi' pi`, normalized to sum to one.
/// The chain is irreducible by construction, so the solution is unique.
pub fn stationary_distribution(chain: &MarkovChain) -> Result<Vec<f64>, MarkovError> {
    let n = chain.n_states();
    let phi = chain.transition();
    // Rows of (Phi' - I), with the last equation replaced by the
    // normalization sum(pi) = 1.
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n - 1 {
        for j in 0..n {
            a[i][j] = phi[j][i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    a[n - 1] = vec![1.0; n];
    let mut b = vec![0.0; n];
    b[n - 1] = 1.0;
    let pi = linalg::solve(a, b).map_err(|_| MarkovError::SingularSystem)?;
    Ok(pi)
}

/// Solve the equilibrium. Fails with `NoEquilibrium` when the spectral
/// radius of `A_ij = beta * phi_ij * lambda_j^(1-alpha)` reaches one.
pub fn solve_equilibrium(
    chain: &MarkovChain,
    prefs: &PreferenceParams,
) -> Result<EquilibriumSolution, MarkovError> {
    let n = chain.n_states();
    let states = chain.states();
    let phi = chain.transition();
    let (alpha, beta) = (prefs.alpha(), prefs.beta());

    let a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| beta * phi[i][j] * states[j].powf(1.0 - alpha))
                .collect()
        })
        .collect();

    let radius = linalg::spectral_radius_nonneg(&a, POWER_TOL, POWER_CAP)
        .ok_or(MarkovError::NoEquilibrium(f64::NAN))?;
    if radius >= 1.0 {
        return Err(MarkovError::NoEquilibrium(radius));
    }

    // (I - A) w = A 1
    let rhs: Vec<f64> = a.iter().map(|row| row.iter().sum()).collect();
    let system: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { 1.0 - a[i][j] } else { -a[i][j] })
                .collect()
        })
        .collect();
    let weights = linalg::solve(system, rhs).map_err(|_| MarkovError::SingularSystem)?;

    let equity_return_matrix: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| states[j] * (weights[j] + 1.0) / weights[i] - 1.0)
                .collect()
        })
        .collect();
    let conditional_equity: Vec<f64> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| phi[i][j] * equity_return_matrix[i][j])
                .sum()
        })
        .collect();
    let rf_prices: Vec<f64> = (0..n)
        .map(|i| {
            beta * (0..n)
                .map(|j| phi[i][j] * states[j].powf(-alpha))
                .sum::<f64>()
        })
        .collect();
    let conditional_rf: Vec<f64> = rf_prices.iter().map(|p| 1.0 / p - 1.0).collect();

    let stationary = stationary_distribution(chain)?;
    let unconditional_equity = dot(&stationary, &conditional_equity);
    let unconditional_rf = dot(&stationary, &conditional_rf);

    Ok(EquilibriumSolution {
        weights,
        equity_return_matrix,
        conditional_equity,
        rf_prices,
        conditional_rf,
        stationary,
        unconditional_equity,
        unconditional_rf,
        premium: unconditional_equity - unconditional_rf,
    })
}

/// Monte Carlo counterpart of `solve_equilibrium`: averages realized
/// equity and riskless returns along one simulated state path. The
/// initial state is drawn from the stationary distribution so the path
/// is stationary from the first step. Deterministic per seed.
pub fn simulate_economy(
    chain: &MarkovChain,
    prefs: &PreferenceParams,
    horizon: usize,
    seed: u64,
) -> Result<SimulatedReturns, MarkovError> {
    if horizon == 0 {
        return Err(MarkovError::InvalidHorizon);
    }
    let solution = solve_equilibrium(chain, prefs)?;
    let phi = chain.transition();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut state = sample_index(&solution.stationary, rng.random::<f64>());
    let mut equity_sum = 0.0;
    let mut rf_sum = 0.0;
    for _ in 0..horizon {
        rf_sum += solution.conditional_rf[state];
        let next = sample_index(&phi[state], rng.random::<f64>());
        equity_sum += solution.equity_return_matrix[state][next];
        state = next;
    }
    let equity = equity_sum / horizon as f64;
    let risk_free = rf_sum / horizon as f64;
    Ok(SimulatedReturns {
        equity,
        risk_free,
        premium: equity - risk_free,
        horizon,
        seed,
    })
}

fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::MarkovChain;

    fn chain(states: Vec<f64>, phi: Vec<Vec<f64>>) -> MarkovChain {
        MarkovChain::new(states, phi).unwrap()
    }

    fn prefs(alpha: f64, beta: f64) -> PreferenceParams {
        PreferenceParams::from_beta(alpha, beta).unwrap()
    }

    #[test]
    fn stationary_of_symmetric_two_state_is_uniform() {
        let c = chain(
            vec![1.054, 0.982],
            vec![vec![0.43, 0.57], vec![0.57, 0.43]],
        );
        let pi = stationary_distribution(&c).unwrap();
        assert!((pi[0] - 0.5).abs() < 1e-14);
        assert!((pi[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn stationary_single_state() {
        let c = chain(vec![1.0], vec![vec![1.0]]);
        assert_eq!(stationary_distribution(&c).unwrap(), vec![1.0]);
    }

    #[test]
    fn stationary_asymmetric_hand_oracle() {
        // pi1 = 0.9 pi1 + 0.5 pi2  =>  pi = (5/6, 1/6).
        let c = chain(vec![1.02, 0.98], vec![vec![0.9, 0.1], vec![0.5, 0.5]]);
        let pi = stationary_distribution(&c).unwrap();
        assert!((pi[0] - 5.0 / 6.0).abs() < 1e-13);
        assert!((pi[1] - 1.0 / 6.0).abs() < 1e-13);
    }

    #[test]
    fn stationary_satisfies_fixed_point() {
        let c = chain(
            vec![1.054, 0.982, 0.55],
            vec![
                vec![0.43, 0.56, 0.01],
                vec![0.56, 0.43, 0.01],
                vec![0.5, 0.5, 0.0],
            ],
        );
        let pi = stationary_distribution(&c).unwrap();
        let phi = c.transition();
        assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for j in 0..3 {
            let image: f64 = (0..3).map(|i| pi[i] * phi[i][j]).sum();
            assert!((image - pi[j]).abs() < 1e-10);
            assert!(pi[j] >= 0.0);
        }
    }

    #[test]
    fn deterministic_single_state_economy() {
        let c = chain(vec![1.0], vec![vec![1.0]]);
        let s = solve_equilibrium(&c, &prefs(2.0, 0.96)).unwrap();
        assert!((s.weights[0] - 24.0).abs() < 1e-10);
        assert!((s.unconditional_equity - 1.0 / 24.0).abs() < 1e-12);
        assert!((s.unconditional_rf - 1.0 / 24.0).abs() < 1e-12);
        assert!(s.premium.abs() < 1e-13);
    }

    #[test]
    fn log_utility_flattens_price_dividend_ratio() {
        // alpha = 1 makes lambda^(1-alpha) = 1: w_i = beta / (1 - beta).
        let c = chain(
            vec![1.054, 0.982, 0.509],
            vec![
                vec![0.43, 0.55, 0.02],
                vec![0.55, 0.43, 0.02],
                vec![0.5, 0.5, 0.0],
            ],
        );
        let s = solve_equilibrium(&c, &prefs(1.0, 0.96)).unwrap();
        let expected = 0.96 / 0.04;
        for w in &s.weights {
            assert!((w - expected).abs() < 1e-12 * expected);
        }
    }

    #[test]
    fn no_equilibrium_when_prices_diverge() {
        // alpha = 1 gives A = beta * Phi with spectral radius beta.
        let c = chain(
            vec![1.054, 0.982],
            vec![vec![0.43, 0.57], vec![0.57, 0.43]],
        );
        let err = solve_equilibrium(&c, &prefs(1.0, 1.05)).unwrap_err();
        assert!(matches!(err, MarkovError::NoEquilibrium(r) if r > 1.0));
    }

    #[test]
    fn solution_internal_identities() {
        let c = chain(
            vec![1.054, 0.982],
            vec![vec![0.43, 0.57], vec![0.57, 0.43]],
        );
        let s = solve_equilibrium(&c, &prefs(2.0, 0.97)).unwrap();
        let (states, phi) = (c.states(), c.transition());
        for i in 0..2 {
            assert!(s.weights[i] > 0.0);
            assert!(s.rf_prices[i] > 0.0);
            let mut cond = 0.0;
            for j in 0..2 {
                let r = states[j] * (s.weights[j] + 1.0) / s.weights[i] - 1.0;
                assert!((r - s.equity_return_matrix[i][j]).abs() < 1e-12);
                cond += phi[i][j] * s.equity_return_matrix[i][j];
            }
            assert!((cond - s.conditional_equity[i]).abs() < 1e-12);
        }
        assert!(s.premium > 0.0);
    }

    #[test]
    fn fixed_point_equation_satisfied() {
        let c = chain(
            vec![1.054, 0.982],
            vec![vec![0.43, 0.57], vec![0.57, 0.43]],
        );
        let (alpha, beta) = (3.5, 0.95);
        let s = solve_equilibrium(&c, &prefs(alpha, beta)).unwrap();
        for i in 0..2 {
            let rhs: f64 = (0..2)
                .map(|j| {
                    beta * c.transition()[i][j]
                        * c.states()[j].powf(1.0 - alpha)
                        * (s.weights[j] + 1.0)
                })
                .sum();
            assert!((s.weights[i] - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn simulation_is_deterministic_per_seed() {
        let c = chain(
            vec![1.054, 0.982],
            vec![vec![0.43, 0.57], vec![0.57, 0.43]],
        );
        let p = prefs(2.0, 0.97);
        let a = simulate_economy(&c, &p, 5000, 7).unwrap();
        let b = simulate_economy(&c, &p, 5000, 7).unwrap();
        assert_eq!(a, b);
        let c2 = simulate_economy(&c, &p, 5000, 8).unwrap();
        assert_ne!(a.equity, c2.equity);
    }

    #[test]
    fn simulation_of_riskless_economy_has_zero_premium() {
        let c = chain(vec![1.0], vec![vec![1.0]]);
        let s = simulate_economy(&c, &prefs(2.0, 0.96), 1000, 1).unwrap();
        assert_eq!(s.premium, 0.0);
    }

    #[test]
    fn zero_horizon_is_rejected() {
        let c = chain(vec![1.0], vec![vec![1.0]]);
        assert_eq!(
            simulate_economy(&c, &prefs(2.0, 0.96), 0, 1).unwrap_err(),
            MarkovError::InvalidHorizon
        );
    }
}

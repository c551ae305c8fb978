//! Long-run-risks economy under recursive utility. Consumption and
//! dividend growth carry a small persistent component q_t and stochastic
//! variance sigma_t^2:
//!
//!   q_{t+1}       = rho q_t + phi_e sigma_t eps_{t+1}
//!   g_{t+1}       = mu + q_t + sigma_t eta_{t+1}
//!   g_d,{t+1}     = mu_d + phi_lev q_t + phi_d sigma_t u_{t+1}
//!   sigma_{t+1}^2 = sigma_bar^2 + nu1 (sigma_t^2 - sigma_bar^2) + sigma_w w_{t+1}
//!
//! with four independent standard normal shocks. The log discount factor
//! is
//!
//!   m_{t+1} = theta ln(beta) - (theta/ies) g_{t+1} + (theta - 1) r_a,{t+1},
//!   theta = (1 - alpha) / (1 - 1/ies)
//!
//! where r_a is the log return on the consumption claim, approximated
//! Campbell-Shiller style as r_a = a0 + a1 z_{t+1} - z_t + g_{t+1} with
//! z_t the log price-consumption ratio. Claims are solved by
//! undetermined coefficients on z_t = z0 + z_q q_t + z_s sigma_t^2,
//! imposing E_t[exp(m + r)] = 1 state by state, jointly with the
//! endogenous log-linearization constants. Verification is by
//! simulation: sample Euler residuals |E[e^(m+r)] - 1| for the riskless
//! bond, the consumption claim and the dividend claim.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LrrError {
    #[error("UnitIes: theta is undefined at ies = 1")]
    UnitIes,
    #[error("BadParameter: {name} = {value} is outside its admissible range")]
    BadParameter { name: &'static str, value: f64 },
    #[error("NoFixedPoint: claim solution did not converge ({iterations} iterations, last z_bar {last})")]
    NoFixedPoint { iterations: usize, last: f64 },
    #[error("TooShort: {len} observations, need at least {min}")]
    TooShort { len: usize, min: usize },
    #[error("LengthMismatch: discount-factor series has {m} entries, return series {r}")]
    LengthMismatch { m: usize, r: usize },
}

/// Conditional variances are floored at `min(1e-12, sigma2_bar)`;
/// Gaussian vol-of-vol can push them negative and the model is silent
/// about the boundary. Tying the floor to `sigma2_bar` keeps it from
/// binding on legitimately tiny calibrations. Activations are counted
/// on every simulated path.
pub const VARIANCE_FLOOR: f64 = 1e-12;

/// Recursive-utility economy parameters. `theta` is derived and kept
/// consistent with (alpha, ies).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrrParams {
    pub beta: f64,
    pub alpha: f64,
    /// Intertemporal elasticity of substitution (the text's phi; kept
    /// apart from the dividend leverage, which overloads the symbol).
    pub ies: f64,
    pub mu: f64,
    pub mu_d: f64,
    /// Persistence of the long-run component.
    pub rho: f64,
    /// Scale of long-run-component shocks.
    pub phi_e: f64,
    /// Dividend leverage on the long-run component.
    pub phi_lev: f64,
    /// Dividend volatility scale.
    pub phi_d: f64,
    /// Unconditional variance of short-run consumption shocks.
    pub sigma2_bar: f64,
    /// Variance persistence.
    pub nu1: f64,
    /// Vol of vol.
    pub sigma_w: f64,
    theta: f64,
}

#[allow(clippy::too_many_arguments)]
impl LrrParams {
    pub fn new(
        beta: f64,
        alpha: f64,
        ies: f64,
        mu: f64,
        mu_d: f64,
        rho: f64,
        phi_e: f64,
        phi_lev: f64,
        phi_d: f64,
        sigma2_bar: f64,
        nu1: f64,
        sigma_w: f64,
    ) -> Result<Self, LrrError> {
        if ies == 1.0 {
            return Err(LrrError::UnitIes);
        }
        for (name, value, ok) in [
            ("beta", beta, beta > 0.0),
            ("ies", ies, ies >= 0.0),
            ("rho", rho, rho.abs() < 1.0),
            ("sigma2_bar", sigma2_bar, sigma2_bar > 0.0),
            ("nu1", nu1, (0.0..1.0).contains(&nu1)),
            ("sigma_w", sigma_w, sigma_w >= 0.0),
            ("phi_d", phi_d, phi_d >= 0.0),
            ("phi_e", phi_e, phi_e >= 0.0),
        ] {
            if !ok {
                return Err(LrrError::BadParameter { name, value });
            }
        }
        let theta = (1.0 - alpha) / (1.0 - 1.0 / ies);
        Ok(LrrParams {
            beta,
            alpha,
            ies,
            mu,
            mu_d,
            rho,
            phi_e,
            phi_lev,
            phi_d,
            sigma2_bar,
            nu1,
            sigma_w,
            theta,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// Four independent standard-normal shock streams, one draw of each per
/// step, in the fixed order (eps, eta, u, w).
#[derive(Debug, Clone, PartialEq)]
pub struct LrrShocks {
    pub eps: Vec<f64>,
    pub eta: Vec<f64>,
    pub u: Vec<f64>,
    pub w: Vec<f64>,
}

/// A simulated state path: q and sigma^2 have horizon + 1 entries
/// (t = 0..T), the growth series and shocks have horizon entries
/// (steps t -> t+1).
#[derive(Debug, Clone, PartialEq)]
pub struct LrrStatePath {
    pub q: Vec<f64>,
    pub sigma2: Vec<f64>,
    pub g: Vec<f64>,
    pub g_d: Vec<f64>,
    pub shocks: LrrShocks,
    pub seed: u64,
    /// Steps on which the variance floor was applied.
    pub floor_hits: usize,
}

impl LrrStatePath {
    pub fn horizon(&self) -> usize {
        self.g.len()
    }
}

/// Simulate the state processes from q_0 = 0, sigma_0^2 = sigma_bar^2.
pub fn simulate_states(params: &LrrParams, horizon: usize, seed: u64) -> LrrStatePath {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = StandardNormal;
    let mut draw = |target: &mut Vec<f64>| {
        let z: f64 = normal.sample(&mut rng);
        target.push(z);
        z
    };

    let mut q = Vec::with_capacity(horizon + 1);
    let mut sigma2 = Vec::with_capacity(horizon + 1);
    let mut g = Vec::with_capacity(horizon);
    let mut g_d = Vec::with_capacity(horizon);
    let mut shocks = LrrShocks {
        eps: Vec::with_capacity(horizon),
        eta: Vec::with_capacity(horizon),
        u: Vec::with_capacity(horizon),
        w: Vec::with_capacity(horizon),
    };
    let mut floor_hits = 0;

    let floor = VARIANCE_FLOOR.min(params.sigma2_bar);
    q.push(0.0);
    sigma2.push(params.sigma2_bar);
    for t in 0..horizon {
        let sigma_t = sigma2[t].sqrt();
        let eps = draw(&mut shocks.eps);
        let eta = draw(&mut shocks.eta);
        let u = draw(&mut shocks.u);
        let w = draw(&mut shocks.w);

        g.push(params.mu + q[t] + sigma_t * eta);
        g_d.push(params.mu_d + params.phi_lev * q[t] + params.phi_d * sigma_t * u);
        q.push(params.rho * q[t] + params.phi_e * sigma_t * eps);
        let mut next_var = params.sigma2_bar
            + params.nu1 * (sigma2[t] - params.sigma2_bar)
            + params.sigma_w * w;
        if next_var < floor {
            next_var = floor;
            floor_hits += 1;
        }
        sigma2.push(next_var);
    }
    LrrStatePath {
        q,
        sigma2,
        g,
        g_d,
        shocks,
        seed,
        floor_hits,
    }
}

/// Solved log-linear claim: z_t = z0 + z_q q_t + z_s sigma_t^2, with the
/// endogenous linearization constants (a0, a1) and the mean valuation
/// ratio z_bar they were expanded around.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClaimSolution {
    pub a0: f64,
    pub a1: f64,
    pub z0: f64,
    pub z_q: f64,
    pub z_s: f64,
    pub z_bar: f64,
    pub iterations: usize,
    pub residual: f64,
}

impl ClaimSolution {
    /// z_t for one state.
    pub fn z(&self, q: f64, sigma2: f64) -> f64 {
        self.z0 + self.z_q * q + self.z_s * sigma2
    }
}

const FIXED_POINT_TOL: f64 = 1e-10;
const FIXED_POINT_CAP: usize = 10_000;
const FIXED_POINT_DAMPING: f64 = 0.5;

/// Solve the consumption claim by undetermined coefficients. The
/// exponent of E_t[exp(m + r_a)] = theta [ln beta + a0 + a1 z_{t+1} -
/// z_t + (1 - 1/ies) g_{t+1}] must have zero conditional log-mean for
/// every (q_t, sigma_t^2); matching the q, sigma^2 and constant terms
/// gives z_q, z_s, z0 in closed form given (a0, a1), and (a0, a1) are
/// pinned by z_bar = z0 + z_s sigma_bar^2 via damped iteration.
pub fn solve_consumption_claim(params: &LrrParams) -> Result<ClaimSolution, LrrError> {
    let growth_load = 1.0 - 1.0 / params.ies;
    solve_claim_fixed_point(|a0, a1| {
        let theta = params.theta;
        let z_q = growth_load / (1.0 - a1 * params.rho);
        let h_eps = a1 * z_q * params.phi_e;
        let z_s = theta * (growth_load * growth_load + h_eps * h_eps)
            / (2.0 * (1.0 - a1 * params.nu1));
        let h_w = a1 * z_s * params.sigma_w;
        let z0 = (params.beta.ln()
            + a0
            + a1 * z_s * params.sigma2_bar * (1.0 - params.nu1)
            + growth_load * params.mu
            + 0.5 * theta * h_w * h_w)
            / (1.0 - a1);
        (z0, z_q, z_s)
    }, params.sigma2_bar)
}

/// Solve the dividend claim given the consumption claim. Same recipe on
/// the exponent of E_t[exp(m + r_m)], which now mixes the discount
/// factor's loadings on the consumption claim with the dividend claim's
/// own coefficients.
pub fn solve_dividend_claim(
    params: &LrrParams,
    consumption: &ClaimSolution,
) -> Result<ClaimSolution, LrrError> {
    let theta = params.theta;
    let (ca0, ca1) = (consumption.a0, consumption.a1);
    let (cz0, cz_q, cz_s) = (consumption.z0, consumption.z_q, consumption.z_s);
    // m_{t+1} = theta ln beta + (theta-1) a0 + (theta-1) a1 z_{t+1}
    //           - (theta-1) z_t + (theta - 1 - theta/ies) g_{t+1}
    let g_load = theta - 1.0 - theta / params.ies;
    let m_const = theta * params.beta.ln() + (theta - 1.0) * ca0;
    let tm1a1 = (theta - 1.0) * ca1;

    solve_claim_fixed_point(|a0m, a1m| {
        // q_t coefficient: from m (z_{t+1}, z_t, g) and from r_m
        // (z_{m,t+1}, z_{m,t}, g_d).
        let m_q = tm1a1 * cz_q * params.rho - (theta - 1.0) * cz_q + g_load;
        let b_q = (m_q + params.phi_lev) / (1.0 - a1m * params.rho);

        // sigma^2_t coefficient plus half the sigma^2-scaled shock
        // variances (eta, eps, u loadings).
        let h_eta = g_load;
        let h_eps = (tm1a1 * cz_q + a1m * b_q) * params.phi_e;
        let h_u = params.phi_d;
        let m_s = tm1a1 * cz_s * params.nu1 - (theta - 1.0) * cz_s;
        let b_s = (m_s + 0.5 * (h_eta * h_eta + h_eps * h_eps + h_u * h_u))
            / (1.0 - a1m * params.nu1);

        // Constant term plus half the w-shock variance.
        let h_w = (tm1a1 * cz_s + a1m * b_s) * params.sigma_w;
        let m_0 = m_const
            + tm1a1 * (cz0 + cz_s * params.sigma2_bar * (1.0 - params.nu1))
            - (theta - 1.0) * cz0
            + g_load * params.mu;
        let b_0 = (m_0
            + a0m
            + a1m * b_s * params.sigma2_bar * (1.0 - params.nu1)
            + params.mu_d
            + 0.5 * h_w * h_w)
            / (1.0 - a1m);
        (b_0, b_q, b_s)
    }, params.sigma2_bar)
}

/// Damped iteration on z_bar: given (a0, a1) from z_bar, `coeffs`
/// delivers the claim coefficients, whose implied mean valuation then
/// updates z_bar.
fn solve_claim_fixed_point<F>(coeffs: F, sigma2_bar: f64) -> Result<ClaimSolution, LrrError>
where
    F: Fn(f64, f64) -> (f64, f64, f64),
{
    let mut z_bar = 5.0;
    for iterations in 1..=FIXED_POINT_CAP {
        let a1 = logistic(z_bar);
        let a0 = (1.0 + z_bar.exp()).ln() - a1 * z_bar;
        let (z0, z_q, z_s) = coeffs(a0, a1);
        let implied = z0 + z_s * sigma2_bar;
        if !implied.is_finite() {
            return Err(LrrError::NoFixedPoint {
                iterations,
                last: implied,
            });
        }
        let residual = (implied - z_bar).abs();
        if residual < FIXED_POINT_TOL {
            return Ok(ClaimSolution {
                a0,
                a1,
                z0,
                z_q,
                z_s,
                z_bar,
                iterations,
                residual,
            });
        }
        z_bar += FIXED_POINT_DAMPING * (implied - z_bar);
    }
    Err(LrrError::NoFixedPoint {
        iterations: FIXED_POINT_CAP,
        last: z_bar,
    })
}

fn logistic(x: f64) -> f64 {
    let e = x.exp();
    e / (1.0 + e)
}

/// Log valuation-ratio series z_t along a path (one entry per state,
/// horizon + 1 of them).
pub fn valuation_path(claim: &ClaimSolution, states: &LrrStatePath) -> Vec<f64> {
    states
        .q
        .iter()
        .zip(&states.sigma2)
        .map(|(&q, &s2)| claim.z(q, s2))
        .collect()
}

/// Log return series of the consumption claim: r_a = a0 + a1 z_{t+1} -
/// z_t + g_{t+1}.
pub fn consumption_return_path(
    claim: &ClaimSolution,
    states: &LrrStatePath,
) -> Vec<f64> {
    return_path(claim, states, &states.g)
}

/// Log return series of the dividend claim: same shape on g_d.
pub fn dividend_return_path(claim: &ClaimSolution, states: &LrrStatePath) -> Vec<f64> {
    return_path(claim, states, &states.g_d)
}

fn return_path(claim: &ClaimSolution, states: &LrrStatePath, growth: &[f64]) -> Vec<f64> {
    let z = valuation_path(claim, states);
    (0..growth.len())
        .map(|t| claim.a0 + claim.a1 * z[t + 1] - z[t] + growth[t])
        .collect()
}

/// Log discount-factor series m_{t+1} from the states and the solved
/// consumption claim.
pub fn sdf_path(params: &LrrParams, states: &LrrStatePath, claim: &ClaimSolution) -> Vec<f64> {
    let r_a = consumption_return_path(claim, states);
    let theta = params.theta;
    states
        .g
        .iter()
        .zip(&r_a)
        .map(|(&g, &ra)| theta * params.beta.ln() - theta / params.ies * g + (theta - 1.0) * ra)
        .collect()
}

/// Conditional riskless rate series r_f,t (the rate set at t for t+1;
/// horizon entries):
///
///   r_f,t = -theta ln beta + (theta/ies) E_t[g] + (1-theta) E_t[r_a]
///           - var_t[(theta/ies) g + (1-theta) r_a] / 2
///
/// evaluated with the linear-Gaussian conditional moments implied by the
/// solved claim.
pub fn risk_free_path(
    params: &LrrParams,
    states: &LrrStatePath,
    claim: &ClaimSolution,
) -> Vec<f64> {
    let theta = params.theta;
    let horizon = states.horizon();
    let mut out = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let (q, s2) = (states.q[t], states.sigma2[t]);
        let e_g = params.mu + q;
        let e_z_next = claim.z0
            + claim.z_q * params.rho * q
            + claim.z_s * (params.sigma2_bar * (1.0 - params.nu1) + params.nu1 * s2);
        let e_ra = claim.a0 + claim.a1 * e_z_next - claim.z(q, s2) + e_g;
        // Shock loadings of (theta/ies) g + (1-theta) r_a.
        let c_g = theta / params.ies + 1.0 - theta;
        let c_z = (1.0 - theta) * claim.a1;
        let var = c_g * c_g * s2
            + c_z * c_z
                * (claim.z_q * claim.z_q * params.phi_e * params.phi_e * s2
                    + claim.z_s * claim.z_s * params.sigma_w * params.sigma_w);
        out.push(
            -theta * params.beta.ln() + theta / params.ies * e_g + (1.0 - theta) * e_ra
                - 0.5 * var,
        );
    }
    out
}

/// Sample Euler residual for a (log SDF, log return) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerReport {
    /// |mean of e^(m + r) - 1|
    pub residual: f64,
    /// Standard error of the mean.
    pub se: f64,
    pub n: usize,
}

pub const EULER_MIN_LEN: usize = 10_000;

/// |E[e^(m+r)] - 1| over a simulated path, with the standard error of
/// the sample mean.
pub fn euler_residual(m_series: &[f64], r_series: &[f64]) -> Result<EulerReport, LrrError> {
    if m_series.len() != r_series.len() {
        return Err(LrrError::LengthMismatch {
            m: m_series.len(),
            r: r_series.len(),
        });
    }
    let n = m_series.len();
    if n < EULER_MIN_LEN {
        return Err(LrrError::TooShort {
            len: n,
            min: EULER_MIN_LEN,
        });
    }
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for (&m, &r) in m_series.iter().zip(r_series) {
        let x = (m + r).exp();
        sum += x;
        sum_sq += x * x;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = (sum_sq / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
    Ok(EulerReport {
        residual: (mean - 1.0).abs(),
        se: (var / nf).sqrt(),
        n,
    })
}

/// Which claim an equity-premium simulation prices. `Dividend` is the
/// market claim; `Consumption` exists for the CRRA reduction, where the
/// two coincide.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClaimKind {
    Dividend,
    Consumption,
}

/// Monte Carlo premium estimate plus the conditional Sharpe-ratio
/// diagnostics used to tell constant from time-varying uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PremiumEstimate {
    /// Mean of r_claim,{t+1} - r_f,t (log units).
    pub mean_excess: f64,
    /// Batch-means standard error of the mean.
    pub se: f64,
    pub mean_rf: f64,
    /// Time-average conditional Sharpe ratio (ln E_t R - ln R_f over
    /// conditional return volatility).
    pub sharpe_mean: f64,
    /// Time variation of the conditional Sharpe ratio.
    pub sharpe_std: f64,
    pub horizon: usize,
    pub seed: u64,
    pub floor_hits: usize,
}

/// Simulate the economy and measure the average excess return on the
/// chosen claim, with conditional-Sharpe diagnostics computed from the
/// model's conditional moments at every visited state.
pub fn premium_by_simulation(
    params: &LrrParams,
    horizon: usize,
    seed: u64,
    kind: ClaimKind,
) -> Result<PremiumEstimate, LrrError> {
    if horizon == 0 {
        return Err(LrrError::TooShort { len: 0, min: 1 });
    }
    let consumption = solve_consumption_claim(params)?;
    let (claim, growth_mean_load, growth_vol_load) = match kind {
        ClaimKind::Dividend => (
            solve_dividend_claim(params, &consumption)?,
            params.phi_lev,
            params.phi_d,
        ),
        ClaimKind::Consumption => (consumption, 1.0, 1.0),
    };
    let growth_base = match kind {
        ClaimKind::Dividend => params.mu_d,
        ClaimKind::Consumption => params.mu,
    };
    let states = simulate_states(params, horizon, seed);
    let r_claim = match kind {
        ClaimKind::Dividend => dividend_return_path(&claim, &states),
        ClaimKind::Consumption => consumption_return_path(&claim, &states),
    };
    let r_f = risk_free_path(params, &states, &consumption);

    let excess: Vec<f64> = r_claim.iter().zip(&r_f).map(|(r, f)| r - f).collect();
    let (mean_excess, se) = batch_mean_se(&excess);
    let mean_rf = r_f.iter().sum::<f64>() / r_f.len() as f64;

    // Conditional Sharpe per visited state, from the model's
    // conditional moments: (E_t r + var_t/2 - r_f) / sd_t(r).
    let mut sharpe_sum = 0.0;
    let mut sharpe_sq = 0.0;
    for t in 0..horizon {
        let (q, s2) = (states.q[t], states.sigma2[t]);
        let e_z_next = claim.z0
            + claim.z_q * params.rho * q
            + claim.z_s * (params.sigma2_bar * (1.0 - params.nu1) + params.nu1 * s2);
        let e_r = claim.a0 + claim.a1 * e_z_next - claim.z(q, s2)
            + growth_base
            + growth_mean_load * q;
        let var = claim.a1 * claim.a1
            * (claim.z_q * claim.z_q * params.phi_e * params.phi_e * s2
                + claim.z_s * claim.z_s * params.sigma_w * params.sigma_w)
            + growth_vol_load * growth_vol_load * s2;
        let sharpe = (e_r + 0.5 * var - r_f[t]) / var.sqrt();
        sharpe_sum += sharpe;
        sharpe_sq += sharpe * sharpe;
    }
    let nf = horizon as f64;
    let sharpe_mean = sharpe_sum / nf;
    let sharpe_std = (sharpe_sq / nf - sharpe_mean * sharpe_mean).max(0.0).sqrt();

    Ok(PremiumEstimate {
        mean_excess,
        se,
        mean_rf,
        sharpe_mean,
        sharpe_std,
        horizon,
        seed,
        floor_hits: states.floor_hits,
    })
}

/// Mean and batch-means standard error (robust to the serial dependence
/// the persistent states induce).
fn batch_mean_se(series: &[f64]) -> (f64, f64) {
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let batches = if n >= 10_000 { 100 } else { 10.min(n) };
    let batch_len = n / batches;
    if batch_len == 0 || batches < 2 {
        return (mean, f64::NAN);
    }
    let mut batch_means = Vec::with_capacity(batches);
    for b in 0..batches {
        let chunk = &series[b * batch_len..(b + 1) * batch_len];
        batch_means.push(chunk.iter().sum::<f64>() / chunk.len() as f64);
    }
    let bm = batch_means.iter().sum::<f64>() / batches as f64;
    let var = batch_means.iter().map(|x| (x - bm) * (x - bm)).sum::<f64>()
        / (batches as f64 - 1.0);
    (mean, (var / batches as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Monthly-frequency parameterization in the style of the standard
    /// long-run-risks calibration.
    pub(crate) fn by_like() -> LrrParams {
        LrrParams::new(
            0.998, 10.0, 1.5, 0.0015, 0.0015, 0.979, 0.044, 3.0, 4.5, 6.084e-5, 0.987, 2.3e-6,
        )
        .unwrap()
    }

    fn crra(alpha: f64, sigma2: f64) -> LrrParams {
        // theta = 1: alpha = 1/ies, long-run and vol shocks off.
        LrrParams::new(
            0.998,
            alpha,
            1.0 / alpha,
            0.0015,
            0.0015,
            0.0,
            0.0,
            1.0,
            1.0,
            sigma2,
            0.0,
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn theta_identity_on_random_draws() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let alpha = rng.random_range(0.5..20.0);
            let mut ies: f64 = rng.random_range(0.2..2.5);
            if (ies - 1.0).abs() < 1e-3 {
                ies = 1.1;
            }
            let p = LrrParams::new(
                0.998, alpha, ies, 0.0015, 0.0015, 0.97, 0.04, 3.0, 4.5, 6e-5, 0.98, 2e-6,
            )
            .unwrap();
            let direct = (1.0 - alpha) / (1.0 - 1.0 / ies);
            assert!((p.theta() - direct).abs() <= 1e-14 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn unit_ies_is_rejected() {
        let err = LrrParams::new(
            0.998, 10.0, 1.0, 0.0015, 0.0015, 0.979, 0.044, 3.0, 4.5, 6e-5, 0.987, 2.3e-6,
        )
        .unwrap_err();
        assert_eq!(err, LrrError::UnitIes);
    }

    #[test]
    fn shocks_off_reduces_to_iid_growth() {
        let p = LrrParams::new(
            0.998, 7.5, 1.5, 0.0015, 0.0015, 0.979, 0.0, 3.0, 4.5, 6.084e-5, 0.987, 0.0,
        )
        .unwrap();
        let path = simulate_states(&p, 50_000, 3);
        assert!(path.q.iter().all(|&q| q == 0.0));
        assert!(path.sigma2.iter().all(|&s| s == p.sigma2_bar));
        let mean = path.g.iter().sum::<f64>() / path.g.len() as f64;
        let var = path.g.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>()
            / (path.g.len() as f64 - 1.0);
        // 3 SE tolerances for 5e4 draws.
        assert!((mean - p.mu).abs() < 3.0 * (p.sigma2_bar / 50_000.0).sqrt());
        assert!((var - p.sigma2_bar).abs() < 3.0 * p.sigma2_bar * (2.0f64 / 50_000.0).sqrt());
        assert_eq!(path.floor_hits, 0);
    }

    #[test]
    fn variance_mean_reverts_to_unconditional_level() {
        let p = by_like();
        let path = simulate_states(&p, 1_000_000, 9);
        let mean = path.sigma2.iter().sum::<f64>() / path.sigma2.len() as f64;
        // sd of sigma^2 is sigma_w / sqrt(1 - nu1^2); the mean of 1e6
        // correlated draws has effective sample ~ T (1-nu1)/(1+nu1).
        let sd = p.sigma_w / (1.0 - p.nu1 * p.nu1).sqrt();
        let eff = 1_000_000.0 * (1.0 - p.nu1) / (1.0 + p.nu1);
        assert!(
            (mean - p.sigma2_bar).abs() < 3.0 * sd / eff.sqrt(),
            "mean {mean} vs {}",
            p.sigma2_bar
        );
        // Floor should essentially never bind at this calibration.
        assert!(path.floor_hits < 10_000, "floor hit {} times", path.floor_hits);
    }

    #[test]
    fn state_simulation_is_deterministic() {
        let p = by_like();
        let a = simulate_states(&p, 2000, 11);
        let b = simulate_states(&p, 2000, 11);
        assert_eq!(a, b);
        let c = simulate_states(&p, 2000, 12);
        assert_ne!(a.g, c.g);
    }

    #[test]
    fn consumption_claim_solves_and_is_sane() {
        let p = by_like();
        let c = solve_consumption_claim(&p).unwrap();
        assert!(c.a1 > 0.0 && c.a1 < 1.0);
        assert!(c.residual < 1e-10);
        // Good long-run news raises valuations when ies > 1.
        assert!(c.z_q > 0.0);
        // Higher uncertainty depresses valuations at this calibration.
        assert!(c.z_s < 0.0);
        // The linearization constants are mutually consistent.
        assert!((c.a1 - logistic(c.z_bar)).abs() < 1e-9);
        assert!((c.z_bar - (c.z0 + c.z_s * p.sigma2_bar)).abs() < 1e-9);
    }

    #[test]
    fn crra_reduction_collapses_the_recursion() {
        let p = crra(2.0, 4e-4);
        assert!((p.theta() - 1.0).abs() < 1e-12);
        let c = solve_consumption_claim(&p).unwrap();
        let states = simulate_states(&p, 20_000, 21);
        // z constant along the path (no state variation).
        let z = valuation_path(&c, &states);
        for &zt in &z {
            assert!((zt - z[0]).abs() < 1e-12);
        }
        // m = ln beta - (1/ies) g = ln beta - alpha g, pointwise.
        let m = sdf_path(&p, &states, &c);
        for (t, &mt) in m.iter().enumerate() {
            let want = p.beta.ln() - p.alpha * states.g[t];
            assert!((mt - want).abs() < 1e-12, "t={t}: {mt} vs {want}");
        }
    }

    #[test]
    fn nearly_deterministic_economy_has_constant_sdf_and_rate() {
        let p = crra(2.0, 1e-30);
        let c = solve_consumption_claim(&p).unwrap();
        let states = simulate_states(&p, 100, 1);
        let m = sdf_path(&p, &states, &c);
        let want = p.beta.ln() - p.alpha * p.mu;
        for &mt in &m {
            assert!((mt - want).abs() < 1e-12);
        }
        let rf = risk_free_path(&p, &states, &c);
        for &r in &rf {
            assert!((r + want).abs() < 1e-12);
        }
    }

    #[test]
    fn euler_residual_identity_and_guards() {
        let m: Vec<f64> = (0..20_000).map(|i| -0.001 * ((i % 7) as f64)).collect();
        let r: Vec<f64> = m.iter().map(|x| -x).collect();
        let report = euler_residual(&m, &r).unwrap();
        assert_eq!(report.residual, 0.0);
        assert_eq!(report.se, 0.0);

        assert!(matches!(
            euler_residual(&m[..100], &r[..100]),
            Err(LrrError::TooShort { .. })
        ));
        assert!(matches!(
            euler_residual(&m, &r[..19_999]),
            Err(LrrError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn euler_residuals_small_for_all_three_assets() {
        // Quick 1e5 check; the acceptance suite runs 1e6.
        let p = by_like();
        let consumption = solve_consumption_claim(&p).unwrap();
        let dividend = solve_dividend_claim(&p, &consumption).unwrap();
        let states = simulate_states(&p, 100_000, 17);
        let m = sdf_path(&p, &states, &consumption);

        let rf = risk_free_path(&p, &states, &consumption);
        let bond = euler_residual(&m, &rf).unwrap();
        assert!(bond.residual < 5e-3, "bond residual {}", bond.residual);

        let ra = consumption_return_path(&consumption, &states);
        let cons = euler_residual(&m, &ra).unwrap();
        assert!(cons.residual < 5e-3, "consumption residual {}", cons.residual);

        let r_m = dividend_return_path(&dividend, &states);
        let div = euler_residual(&m, &r_m).unwrap();
        assert!(div.residual < 5e-3, "dividend residual {}", div.residual);
    }

    #[test]
    fn risk_free_is_affine_in_q_under_constant_uncertainty() {
        let mut p = by_like();
        p = LrrParams::new(
            p.beta, p.alpha, p.ies, p.mu, p.mu_d, p.rho, p.phi_e, p.phi_lev, p.phi_d,
            p.sigma2_bar, p.nu1, 0.0,
        )
        .unwrap();
        let c = solve_consumption_claim(&p).unwrap();
        // Synthetic states at three q values, fixed variance.
        let mk = |q: f64| LrrStatePath {
            q: vec![q, q],
            sigma2: vec![p.sigma2_bar, p.sigma2_bar],
            g: vec![p.mu],
            g_d: vec![p.mu_d],
            shocks: LrrShocks {
                eps: vec![0.0],
                eta: vec![0.0],
                u: vec![0.0],
                w: vec![0.0],
            },
            seed: 0,
            floor_hits: 0,
        };
        let r0 = risk_free_path(&p, &mk(0.0), &c)[0];
        let r1 = risk_free_path(&p, &mk(1e-3), &c)[0];
        let r2 = risk_free_path(&p, &mk(2e-3), &c)[0];
        // Collinear in q.
        assert!((r2 - 2.0 * r1 + r0).abs() < 1e-12);
        // Slope equals the analytic loading.
        let theta = p.theta();
        let slope = theta / p.ies
            + (1.0 - theta) * (c.a1 * c.z_q * p.rho - c.z_q + 1.0);
        assert!(((r1 - r0) / 1e-3 - slope).abs() < 1e-9);
    }

    #[test]
    fn sharpe_constancy_diagnoses_uncertainty_mode() {
        let p = by_like();
        let est = premium_by_simulation(&p, 50_000, 4, ClaimKind::Dividend).unwrap();
        assert!(est.sharpe_std > 1e-5, "sigma_w > 0: {}", est.sharpe_std);

        let frozen = LrrParams::new(
            p.beta, p.alpha, p.ies, p.mu, p.mu_d, p.rho, p.phi_e, p.phi_lev, p.phi_d,
            p.sigma2_bar, p.nu1, 0.0,
        )
        .unwrap();
        let est0 = premium_by_simulation(&frozen, 50_000, 4, ClaimKind::Dividend).unwrap();
        assert!(
            est0.sharpe_std < 1e-12,
            "sigma_w = 0 should freeze the Sharpe ratio: {}",
            est0.sharpe_std
        );
    }

    #[test]
    fn crra_reduction_premium_matches_lognormal_analytics() {
        // theta = 1, dividends = consumption: the consumption claim's
        // log premium plus half its variance is alpha sigma^2, i.e. the
        // conditional Sharpe is the linearized volatility bound.
        let p = crra(5.0, 4e-4);
        let est = premium_by_simulation(&p, 400_000, 31, ClaimKind::Consumption).unwrap();
        let bound = crate::lognormal::hj_bound(
            p.alpha,
            &crate::types::LogNormalGrowth::new(p.mu, p.sigma2_bar.sqrt()).unwrap(),
        );
        assert!(
            (est.sharpe_mean - bound.approx_ratio).abs() < 1e-10,
            "conditional sharpe {} vs bound {}",
            est.sharpe_mean,
            bound.approx_ratio
        );
        // Realized mean excess matches alpha sigma^2 - sigma^2/2 within
        // 3 batch-means SEs.
        let want = p.alpha * p.sigma2_bar - 0.5 * p.sigma2_bar;
        assert!(
            (est.mean_excess - want).abs() < 3.0 * est.se,
            "excess {} vs {want} (se {})",
            est.mean_excess,
            est.se
        );
    }

    #[test]
    fn premium_estimate_is_seed_deterministic() {
        let p = by_like();
        let a = premium_by_simulation(&p, 20_000, 5, ClaimKind::Dividend).unwrap();
        let b = premium_by_simulation(&p, 20_000, 5, ClaimKind::Dividend).unwrap();
        assert_eq!(a, b);
    }
}

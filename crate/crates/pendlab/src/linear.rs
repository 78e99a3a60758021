//! Linearized chain model: decoupled small-angle accelerations, normal
//! frequencies, the ideal pseudo-period T0(N), and the amplitude-correction
//! series that turns it into the corrected period T(N, theta0).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::chain::{ChainState, PendulumChain};
use crate::error::{Error, Result};

/// Correction-series truncation used by the corrected-period helpers; the
/// series changes by < 1e-12 beyond this order for theta0 <= pi/4.
pub const DEFAULT_SERIES_ORDER: usize = 40;

/// Diagonal linearized model per link: inertia l_j * tail_mass(j) against
/// stiffness g * m_j.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    /// Diagonal inertia entries l_j * tail_mass(j) [kg m].
    pub inertia: Vec<f64>,
    /// Diagonal stiffness entries g * m_j [kg m s^-2 per rad].
    pub stiffness: Vec<f64>,
}

pub fn linear_system(chain: &PendulumChain) -> LinearSystem {
    let n = chain.n();
    let inertia = (0..n)
        .map(|j| chain.lengths()[j] * chain.tail_mass(j))
        .collect();
    let stiffness = (0..n).map(|j| chain.gravity() * chain.masses()[j]).collect();
    LinearSystem { inertia, stiffness }
}

/// Analytic pseudo-period model outputs for one chain and amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodModel {
    pub n: usize,
    /// Mean normal frequency [rad s^-1].
    pub omega_bar: f64,
    /// Ideal small-angle pseudo-period 2 pi / omega_bar [s].
    pub t0: f64,
    /// Amplitude correction Delta T / T0 (dimensionless, >= 0).
    pub correction: f64,
    /// Corrected period t0 * (1 + correction) [s].
    pub t_real: f64,
}

/// Decoupled small-angle accelerations:
/// thetadd_j = -(g m_j / (l_j * tail_mass(j))) * theta_j.
///
/// The quadratic velocity term is dropped entirely, matching the first-order
/// model; omegas in `state` are ignored.
pub fn linearized_accelerations(chain: &PendulumChain, state: &ChainState) -> Result<Vec<f64>> {
    state.check_chain(chain)?;
    let sys = linear_system(chain);
    Ok((0..chain.n())
        .map(|j| -(sys.stiffness[j] / sys.inertia[j]) * state.thetas[j])
        .collect())
}

/// Normal frequencies of the diagonal model with the total-mass approximation:
/// omega_j = sqrt(g m_j / (l_j M)), M the exact total mass.
pub fn normal_frequencies(chain: &PendulumChain) -> Vec<f64> {
    let total = chain.total_mass();
    (0..chain.n())
        .map(|j| (chain.gravity() * chain.masses()[j] / (chain.lengths()[j] * total)).sqrt())
        .collect()
}

/// Ideal pseudo-period T0(N) = 2 pi N / sum_j omega_j; reduces to
/// 2 pi sqrt(N l / g) for equal chains.
pub fn pseudo_period_ideal(chain: &PendulumChain) -> f64 {
    let omega_sum: f64 = normal_frequencies(chain).iter().sum();
    2.0 * PI * chain.n() as f64 / omega_sum
}

/// Amplitude-correction series
/// Delta T / T0 = sum_{n=1}^{order} [(2n)! / (2^{2n} (n!)^2)]^2 sin^{2n}(theta0/2),
/// evaluated with a multiplicative term recurrence.
pub fn correction_series(theta0: f64, order: usize) -> Result<f64> {
    if !(theta0.is_finite() && (0.0..PI).contains(&theta0)) {
        return Err(Error::AmplitudeOutOfRange { theta0 });
    }
    if order == 0 {
        return Err(Error::InvalidConfig("series order must be >= 1".into()));
    }
    let s = (theta0 / 2.0).sin().powi(2);
    // n = 1 term: (1/2)^2 s.
    let mut term = 0.25 * s;
    let mut sum = term;
    for n in 1..order {
        let ratio = (2 * n + 1) as f64 / (2 * n + 2) as f64;
        term *= ratio * ratio * s;
        sum += term;
    }
    Ok(sum)
}

/// Corrected pseudo-period T(N, theta0) = T0 * (1 + Delta T / T0).
pub fn pseudo_period_corrected(chain: &PendulumChain, theta0: f64) -> Result<PeriodModel> {
    let correction = correction_series(theta0, DEFAULT_SERIES_ORDER)?;
    let freqs = normal_frequencies(chain);
    let omega_bar = freqs.iter().sum::<f64>() / chain.n() as f64;
    let t0 = 2.0 * PI / omega_bar;
    Ok(PeriodModel {
        n: chain.n(),
        omega_bar,
        t0,
        correction,
        t_real: t0 * (1.0 + correction),
    })
}

/// Circular-error bound e = 1 / (1 + Delta T / T0); independent of N.
pub fn circular_error_bound(theta0: f64) -> Result<f64> {
    Ok(1.0 / (1.0 + correction_series(theta0, DEFAULT_SERIES_ORDER)?))
}

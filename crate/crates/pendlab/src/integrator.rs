//! Fixed-step classical RK4 over the packed first-order system, with
//! energy-drift bookkeeping, a Richardson order estimate, and the
//! leading-order local truncation diagnostic.

use serde::{Deserialize, Serialize};

use crate::chain::{total_energy, ChainState, PendulumChain};
use crate::dynamics;
use crate::error::{Error, Result};

/// Fixed-step integration parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationConfig {
    /// Step size tau [s].
    pub dt: f64,
    /// Integration duration [s].
    pub t_end: f64,
    /// Record every k-th step (>= 1).
    pub sample_stride: usize,
}

impl IntegrationConfig {
    pub fn new(dt: f64, t_end: f64, sample_stride: usize) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidConfig(format!("dt = {dt} must be > 0")));
        }
        if !(t_end.is_finite() && t_end >= dt) {
            return Err(Error::InvalidConfig(format!("t_end = {t_end} must be >= dt")));
        }
        if sample_stride == 0 {
            return Err(Error::InvalidConfig("sample_stride must be >= 1".into()));
        }
        Ok(Self {
            dt,
            t_end,
            sample_stride,
        })
    }

    /// Config recording about `frames` samples over `duration`: the stride is
    /// the nearest integer multiple of `dt` to the frame interval.
    pub fn from_frames(duration: f64, frames: usize, dt: f64) -> Result<Self> {
        if frames == 0 {
            return Err(Error::InvalidConfig("frames must be >= 1".into()));
        }
        let stride = ((duration / frames as f64) / dt).round().max(1.0) as usize;
        Self::new(dt, duration, stride)
    }

    pub(crate) fn step_count(&self) -> usize {
        ((self.t_end / self.dt).round() as usize).max(1)
    }
}

/// Time-ordered trajectory samples plus the observed relative energy drift.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    chain: PendulumChain,
    samples: Vec<ChainState>,
    energy_drift: f64,
}

impl Trajectory {
    pub fn chain(&self) -> &PendulumChain {
        &self.chain
    }

    pub fn samples(&self) -> &[ChainState] {
        &self.samples
    }

    /// Max |E(t) - E(0)| / |E(0)| over recorded samples.
    pub fn energy_drift(&self) -> f64 {
        self.energy_drift
    }

    /// Spacing between recorded samples [s].
    pub fn sample_dt(&self) -> f64 {
        if self.samples.len() < 2 {
            0.0
        } else {
            self.samples[1].time - self.samples[0].time
        }
    }

    /// Builds a trajectory from externally produced samples (synthetic signals
    /// in tests, replays). Energy drift is computed from the samples.
    pub fn from_samples(chain: PendulumChain, samples: Vec<ChainState>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidConfig("trajectory needs at least one sample".into()));
        }
        for s in &samples {
            s.check_chain(&chain)?;
        }
        let drift = energy_drift(&chain, &samples)?;
        Ok(Self {
            chain,
            samples,
            energy_drift: drift,
        })
    }
}

fn energy_drift(chain: &PendulumChain, samples: &[ChainState]) -> Result<f64> {
    let e0 = total_energy(chain, &samples[0])?;
    let scale = if e0.abs() > 1e-12 { e0.abs() } else { 1.0 };
    let mut worst: f64 = 0.0;
    for s in samples {
        let e = total_energy(chain, s)?;
        worst = worst.max((e - e0).abs() / scale);
    }
    Ok(worst)
}

/// One classical RK4 step of y' = f(t, y).
pub fn rk4_step_with<F>(f: &F, t: f64, y: &[f64], dt: f64) -> Result<Vec<f64>>
where
    F: Fn(f64, &[f64]) -> Result<Vec<f64>>,
{
    let combine = |y: &[f64], k: &[f64], scale: f64| -> Vec<f64> {
        y.iter().zip(k).map(|(a, b)| a + scale * b).collect()
    };
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * dt, &combine(y, &k1, 0.5 * dt))?;
    let k3 = f(t + 0.5 * dt, &combine(y, &k2, 0.5 * dt))?;
    let k4 = f(t + dt, &combine(y, &k3, dt))?;
    let next: Vec<f64> = (0..y.len())
        .map(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    if next.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { time: t });
    }
    Ok(next)
}

/// One RK4 step of the chain EOM; time advances by `dt`.
pub fn rk4_step(chain: &PendulumChain, state: &ChainState, dt: f64) -> Result<ChainState> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidConfig(format!("dt = {dt} must be > 0")));
    }
    state.check_chain(chain)?;
    let n = chain.n();
    let mut y = Vec::with_capacity(2 * n);
    y.extend_from_slice(&state.thetas);
    y.extend_from_slice(&state.omegas);
    let f = |t: f64, y: &[f64]| dynamics::packed_derivative(chain, t, y);
    let next = rk4_step_with(&f, state.time, &y, dt)?;
    Ok(ChainState {
        thetas: next[..n].to_vec(),
        omegas: next[n..].to_vec(),
        time: state.time + dt,
    })
}

/// Integrates from the initial state over `config`, recording every
/// `sample_stride`-th step (the initial state included). Deterministic for
/// identical inputs.
pub fn integrate(
    chain: &PendulumChain,
    initial: &ChainState,
    config: &IntegrationConfig,
) -> Result<Trajectory> {
    initial.check_chain(chain)?;
    let n = chain.n();
    let steps = config.step_count();
    let t0 = initial.time;

    let mut y = Vec::with_capacity(2 * n);
    y.extend_from_slice(&initial.thetas);
    y.extend_from_slice(&initial.omegas);

    let mut samples = Vec::with_capacity(steps / config.sample_stride + 1);
    samples.push(initial.clone());

    let f = |t: f64, y: &[f64]| dynamics::packed_derivative(chain, t, y);
    for step in 0..steps {
        let t = t0 + step as f64 * config.dt;
        y = rk4_step_with(&f, t, &y, config.dt).map_err(|err| match err {
            Error::NonFinite { .. } => Error::NonFinite { time: t },
            other => other,
        })?;
        if (step + 1) % config.sample_stride == 0 {
            samples.push(ChainState {
                thetas: y[..n].to_vec(),
                omegas: y[n..].to_vec(),
                time: t0 + (step + 1) as f64 * config.dt,
            });
        }
    }

    let drift = energy_drift(chain, &samples)?;
    Ok(Trajectory {
        chain: chain.clone(),
        samples,
        energy_drift: drift,
    })
}

/// Richardson estimate of the integrator's global convergence order: runs at
/// dt, dt/2, dt/4 to the same end time and returns
/// p = log2(|y_dt - y_dt/2| / |y_dt/2 - y_dt/4|).
pub fn convergence_order(
    chain: &PendulumChain,
    initial: &ChainState,
    dt_coarse: f64,
    t_end: f64,
) -> Result<f64> {
    if !(dt_coarse.is_finite() && dt_coarse > 0.0 && t_end >= dt_coarse) {
        return Err(Error::InvalidConfig(
            "need dt_coarse > 0 and t_end >= dt_coarse".into(),
        ));
    }
    // Snap to an integer number of coarse steps so all three runs share t_end.
    let coarse_steps = ((t_end / dt_coarse).round() as usize).max(1);
    let dt = t_end / coarse_steps as f64;

    let final_state = |dt: f64, steps: usize| -> Result<Vec<f64>> {
        let config = IntegrationConfig::new(dt, steps as f64 * dt, steps)?;
        let traj = integrate(chain, initial, &config)?;
        let last = traj.samples().last().expect("at least the initial sample");
        let mut y = last.thetas.clone();
        y.extend_from_slice(&last.omegas);
        Ok(y)
    };

    let y1 = final_state(dt, coarse_steps)?;
    let y2 = final_state(dt / 2.0, 2 * coarse_steps)?;
    let y4 = final_state(dt / 4.0, 4 * coarse_steps)?;

    let diff_norm = |a: &[f64], b: &[f64]| -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    };
    let d12 = diff_norm(&y1, &y2);
    let d24 = diff_norm(&y2, &y4);
    if d12 == 0.0 || d24 == 0.0 {
        return Err(Error::DegenerateConvergence);
    }
    Ok((d12 / d24).log2())
}

/// Leading-order Euler-step truncation bound 1/2 dt^2 |thetadd|_2, exposed as
/// a conservative per-step diagnostic (it is not RK4's actual local error).
pub fn local_truncation_estimate(
    chain: &PendulumChain,
    state: &ChainState,
    dt: f64,
) -> Result<f64> {
    let acc = dynamics::accelerations(chain, state)?;
    let norm = acc.iter().map(|a| a * a).sum::<f64>().sqrt();
    Ok(0.5 * dt * dt * norm)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_4;

    use approx::assert_relative_eq;

    use super::*;

    #[test]
    fn config_validation() {
        assert!(IntegrationConfig::new(0.0, 1.0, 1).is_err());
        assert!(IntegrationConfig::new(0.1, 0.05, 1).is_err());
        assert!(IntegrationConfig::new(0.1, 1.0, 0).is_err());
        let c = IntegrationConfig::from_frames(10.0, 1000, 1e-3).unwrap();
        assert_eq!(c.sample_stride, 10);
    }

    #[test]
    fn equilibrium_step_is_identity() {
        let chain = PendulumChain::unit(3);
        let state = ChainState::at_rest(vec![0.0; 3]).unwrap();
        let next = rk4_step(&chain, &state, 0.25).unwrap();
        assert_eq!(next.thetas, state.thetas);
        assert_eq!(next.omegas, state.omegas);
        assert_eq!(next.time, 0.25);
    }

    #[test]
    fn harmonic_oscillator_single_step() {
        // Injected derivative for y'' = -y.
        let f = |_t: f64, y: &[f64]| -> crate::error::Result<Vec<f64>> {
            Ok(vec![y[1], -y[0]])
        };
        let next = rk4_step_with(&f, 0.0, &[1.0, 0.0], 0.1).unwrap();
        assert!((next[0] - 0.1f64.cos()).abs() < 1e-8);
        // Velocity picks up the dt^5/120 term (position's dt^5 coefficient is zero).
        assert!((next[1] + 0.1f64.sin()).abs() < 1e-7);
    }

    #[test]
    fn small_angle_period_returns_to_start() {
        let chain = PendulumChain::unit(1);
        let period = 2.0 * std::f64::consts::PI / 9.8f64.sqrt();
        let mut state = ChainState::at_rest(vec![0.01]).unwrap();
        let steps = (period / 1e-3).round() as usize;
        let dt = period / steps as f64;
        for _ in 0..steps {
            state = rk4_step(&chain, &state, dt).unwrap();
        }
        assert!((state.thetas[0] - 0.01).abs() < 1e-6);
    }

    #[test]
    fn integrate_sample_layout() {
        let chain = PendulumChain::unit(5);
        let initial = ChainState::at_rest(vec![FRAC_PI_4; 5]).unwrap();
        let config = IntegrationConfig::from_frames(10.0, 1000, 1e-3).unwrap();
        let traj = integrate(&chain, &initial, &config).unwrap();
        assert_eq!(traj.samples().len(), 1001);
        assert_eq!(traj.samples()[0].time, 0.0);
        assert_relative_eq!(traj.samples()[1000].time, 10.0, max_relative = 1e-12);
        let dt = traj.sample_dt();
        for pair in traj.samples().windows(2) {
            assert!(((pair[1].time - pair[0].time) - dt).abs() < 1e-12);
            assert!(pair[1].thetas.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn tiny_amplitude_stays_bounded() {
        let chain = PendulumChain::unit(2);
        let theta0 = 1e-6;
        let initial = ChainState::at_rest(vec![theta0; 2]).unwrap();
        let config = IntegrationConfig::from_frames(10.0, 1000, 1e-3).unwrap();
        let traj = integrate(&chain, &initial, &config).unwrap();
        let max_theta = traj
            .samples()
            .iter()
            .flat_map(|s| s.thetas.iter())
            .fold(0.0f64, |acc, &v| acc.max(v.abs()));
        assert!(max_theta <= 1.01 * theta0 * 2.0, "max theta {max_theta}");
    }

    #[test]
    fn integration_is_deterministic() {
        let chain = PendulumChain::unit(3);
        let initial = ChainState::at_rest(vec![FRAC_PI_4; 3]).unwrap();
        let config = IntegrationConfig::new(1e-3, 2.0, 10).unwrap();
        let a = integrate(&chain, &initial, &config).unwrap();
        let b = integrate(&chain, &initial, &config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn time_reversal_small_angle() {
        let chain = PendulumChain::unit(1);
        let initial = ChainState::at_rest(vec![0.05]).unwrap();
        let config = IntegrationConfig::new(1e-3, 2.0, 2000).unwrap();
        let fwd = integrate(&chain, &initial, &config).unwrap();
        let end = fwd.samples().last().unwrap();
        let reversed = ChainState::new(
            end.thetas.clone(),
            end.omegas.iter().map(|w| -w).collect(),
            0.0,
        )
        .unwrap();
        let back = integrate(&chain, &reversed, &config).unwrap();
        let final_state = back.samples().last().unwrap();
        assert!((final_state.thetas[0] - 0.05).abs() < 1e-6);
        assert!(final_state.omegas[0].abs() < 1e-6);
    }

    #[test]
    fn convergence_order_single_link() {
        let chain = PendulumChain::unit(1);
        let initial = ChainState::at_rest(vec![0.5]).unwrap();
        let p = convergence_order(&chain, &initial, 1e-2, 1.0).unwrap();
        assert!((3.8..=4.2).contains(&p), "order {p}");
    }

    #[test]
    fn convergence_order_degenerate() {
        let chain = PendulumChain::unit(1);
        let initial = ChainState::at_rest(vec![0.0]).unwrap();
        assert!(matches!(
            convergence_order(&chain, &initial, 1e-2, 1.0),
            Err(Error::DegenerateConvergence)
        ));
    }

    #[test]
    fn truncation_estimate_examples() {
        let chain = PendulumChain::unit(1);
        let eq = ChainState::at_rest(vec![0.0]).unwrap();
        assert_eq!(local_truncation_estimate(&chain, &eq, 0.01).unwrap(), 0.0);

        let state = ChainState::at_rest(vec![0.1]).unwrap();
        let e = local_truncation_estimate(&chain, &state, 0.01).unwrap();
        assert_relative_eq!(e, 4.892e-5, max_relative = 1e-4);
        let e2 = local_truncation_estimate(&chain, &state, 0.02).unwrap();
        assert_relative_eq!(e2, 4.0 * e, max_relative = 1e-14);
    }

    #[test]
    fn energy_drift_tightens_with_dt() {
        let chain = PendulumChain::unit(3);
        let initial = ChainState::at_rest(vec![FRAC_PI_4; 3]).unwrap();
        let coarse = integrate(
            &chain,
            &initial,
            &IntegrationConfig::new(2e-3, 2.0, 20).unwrap(),
        )
        .unwrap();
        let fine = integrate(
            &chain,
            &initial,
            &IntegrationConfig::new(1e-3, 2.0, 10).unwrap(),
        )
        .unwrap();
        assert!(fine.energy_drift() < coarse.energy_drift());
    }
}

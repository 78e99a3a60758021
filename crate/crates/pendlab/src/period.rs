//! Pseudo-period measurement protocol: per-bob cycle extraction from
//! trajectories, trial perturbation, averaging, and the decimal-error metric.
//!
//! The primary detector watches the bob's angular velocity: a pseudo-complete
//! cycle spans two consecutive same-direction sign changes, with crossing
//! times refined by linear interpolation between samples. When fewer than two
//! such cycles exist, the estimator falls back to the first recurrence of the
//! bob's vertical height.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chain::{to_cartesian, ChainState, PendulumChain};
use crate::error::{Error, Result};
use crate::integrator::{integrate, IntegrationConfig, Trajectory};
use crate::linear::pseudo_period_corrected;

/// Width of the trial perturbation window [rad].
pub const PERTURBATION_RANGE: f64 = 0.017;

/// Height tolerance for the return-to-height fallback [m].
pub const HEIGHT_TOLERANCE: f64 = 1e-3;

/// How a bob's pseudo-period was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CycleMethod {
    /// Full cycles between consecutive same-direction velocity zero crossings.
    VelocitySignChange,
    /// Twice the spacing of consecutive (opposite-direction) velocity zero
    /// crossings; used when the window holds at least two crossings but no
    /// full same-direction cycle.
    HalfCycleDoubling,
    /// Twice the first recurrence time of the bob's initial height.
    ReturnToHeight,
}

/// Per-bob pseudo-period measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BobPeriodEstimate {
    /// Zero-based bob index.
    pub bob_index: usize,
    /// Individual cycle durations [s].
    pub crossing_periods: Vec<f64>,
    /// Mean over detected cycles [s].
    pub mean_period: f64,
    pub method: CycleMethod,
}

/// System-level measurement: the mean over bobs plus per-bob detail.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemPeriod {
    /// Arithmetic mean of per-bob mean periods [s].
    pub mean: f64,
    pub estimates: Vec<BobPeriodEstimate>,
    /// Zero-based indices of bobs with no detectable cycle.
    pub failed_bobs: Vec<usize>,
}

/// One simulated trial compared against the analytic period model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub n: usize,
    /// Perturbed amplitude actually simulated [rad].
    pub theta0_used: f64,
    /// Mean measured pseudo-period over bobs [s].
    pub measured_period: f64,
    /// Ideal model period T0 [s].
    pub model_t0: f64,
    /// Amplitude-corrected model period [s].
    pub model_t_real: f64,
    /// Mean |measured - model| / measured over bobs.
    pub decimal_error: f64,
    pub measured_bobs: usize,
    pub failed_bobs: usize,
}

/// Hysteresis fraction of a bob's peak |velocity| a swing must reach before
/// its sign change counts; rejects the fast jiggle modes of long chains that
/// would otherwise chop the dominant swing into spurious short cycles.
const HYSTERESIS_FRACTION: f64 = 0.2;

/// Sign changes of a sampled signal, confirmed by Schmitt-trigger hysteresis:
/// a crossing counts only once the signal has reached +/- threshold on the far
/// side. Crossing times are refined by linear interpolation at zero. Returns
/// (time, rising) pairs.
fn crossings(times: &[f64], values: &[f64]) -> Vec<(f64, bool)> {
    let peak = values.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
    let threshold = HYSTERESIS_FRACTION * peak;
    let mut out = Vec::new();
    // Phase the signal last saturated in: +1, -1, or 0 before the first transit.
    let mut phase = 0i8;
    let mut last_zero: Option<(f64, bool)> = None;
    for k in 0..values.len() {
        if k > 0 {
            let (a, b) = (values[k - 1], values[k]);
            if (a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0) {
                let frac = a / (a - b);
                last_zero = Some((times[k - 1] + frac * (times[k] - times[k - 1]), b > 0.0));
            }
        }
        let v = values[k];
        if v > threshold {
            if phase < 0 {
                if let Some((t, true)) = last_zero {
                    out.push((t, true));
                }
            }
            phase = 1;
        } else if v < -threshold {
            if phase > 0 {
                if let Some((t, false)) = last_zero {
                    out.push((t, false));
                }
            }
            phase = -1;
        }
    }
    out
}

/// Durations between consecutive same-direction crossings, ordered by cycle
/// start time.
fn cycle_durations(crossings: &[(f64, bool)]) -> Vec<f64> {
    let mut cycles: Vec<(f64, f64)> = Vec::new();
    for rising in [true, false] {
        let ts: Vec<f64> = crossings
            .iter()
            .filter(|(_, dir)| *dir == rising)
            .map(|(t, _)| *t)
            .collect();
        for pair in ts.windows(2) {
            cycles.push((pair[0], pair[1] - pair[0]));
        }
    }
    cycles.sort_by(|a, b| a.0.total_cmp(&b.0));
    cycles.into_iter().map(|(_, d)| d).collect()
}

/// Period estimate from the first recurrence of the bob's initial vertical
/// height after it has clearly departed from it. A swing released from rest
/// revisits its initial height after half a period (the mirrored turning
/// point is at the same height), so the period is twice the recurrence time.
fn return_to_height_period(times: &[f64], heights: &[f64]) -> Option<f64> {
    let y0 = heights[0];
    let departed = heights
        .iter()
        .position(|&y| (y - y0).abs() > HEIGHT_TOLERANCE)?;
    let back = heights[departed..]
        .iter()
        .position(|&y| (y - y0).abs() <= HEIGHT_TOLERANCE)?;
    Some(2.0 * (times[departed + back] - times[0]))
}

/// Extracts the pseudo-period of one bob from a trajectory.
pub fn estimate_bob_period(trajectory: &Trajectory, bob_index: usize) -> Result<BobPeriodEstimate> {
    let samples = trajectory.samples();
    if samples.len() < 3 {
        return Err(Error::InvalidConfig(
            "trajectory needs at least 3 samples for period estimation".into(),
        ));
    }
    let n = trajectory.chain().n();
    if bob_index >= n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: bob_index + 1,
        });
    }

    let times: Vec<f64> = samples.iter().map(|s| s.time).collect();
    let omegas: Vec<f64> = samples.iter().map(|s| s.omegas[bob_index]).collect();
    let cross = crossings(&times, &omegas);
    let cycles = cycle_durations(&cross);
    if !cycles.is_empty() {
        let mean = cycles.iter().sum::<f64>() / cycles.len() as f64;
        return Ok(BobPeriodEstimate {
            bob_index,
            crossing_periods: cycles,
            mean_period: mean,
            method: CycleMethod::VelocitySignChange,
        });
    }
    // Slow bobs may not complete a full same-direction cycle inside the
    // window; two confirmed crossings still pin the half period.
    if cross.len() >= 2 {
        let halves: Vec<f64> = cross.windows(2).map(|w| 2.0 * (w[1].0 - w[0].0)).collect();
        let mean = halves.iter().sum::<f64>() / halves.len() as f64;
        return Ok(BobPeriodEstimate {
            bob_index,
            crossing_periods: halves,
            mean_period: mean,
            method: CycleMethod::HalfCycleDoubling,
        });
    }

    // Fallback: first recurrence of the bob's vertical height.
    let mut heights = Vec::with_capacity(samples.len());
    for s in samples {
        heights.push(to_cartesian(trajectory.chain(), s)?.ys[bob_index]);
    }
    match return_to_height_period(&times, &heights) {
        Some(period) => Ok(BobPeriodEstimate {
            bob_index,
            crossing_periods: vec![period],
            mean_period: period,
            method: CycleMethod::ReturnToHeight,
        }),
        None => Err(Error::NoCycleDetected { bob_index }),
    }
}

/// Mean pseudo-period over all measurable bobs; bobs with no detectable cycle
/// are excluded and reported in `failed_bobs`.
pub fn system_period(trajectory: &Trajectory) -> Result<SystemPeriod> {
    let n = trajectory.chain().n();
    let mut estimates = Vec::new();
    let mut failed_bobs = Vec::new();
    for bob in 0..n {
        match estimate_bob_period(trajectory, bob) {
            Ok(est) => estimates.push(est),
            Err(Error::NoCycleDetected { .. }) => failed_bobs.push(bob),
            Err(other) => return Err(other),
        }
    }
    if estimates.is_empty() {
        return Err(Error::AllBobsFailed);
    }
    let mean = estimates.iter().map(|e| e.mean_period).sum::<f64>() / estimates.len() as f64;
    Ok(SystemPeriod {
        mean,
        estimates,
        failed_bobs,
    })
}

/// Perturbs an amplitude by u ~ Uniform[0, 0.017] rad from a seeded generator.
pub fn perturb_initial(theta0: f64, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    theta0 + rng.gen_range(0.0..PERTURBATION_RANGE)
}

/// Mean per-entry relative deviation e = (1/N) sum |S_i - T_i| / S_i of model
/// values `model` from measured values `measured`.
pub fn decimal_error(measured: &[f64], model: &[f64]) -> Result<f64> {
    if measured.is_empty() || measured.len() != model.len() {
        return Err(Error::DecimalErrorUndefined(format!(
            "need equal nonzero lengths, got {} and {}",
            measured.len(),
            model.len()
        )));
    }
    let mut sum = 0.0;
    for (i, (&s, &t)) in measured.iter().zip(model).enumerate() {
        if s == 0.0 {
            return Err(Error::DecimalErrorUndefined(format!(
                "measured[{i}] is zero"
            )));
        }
        sum += (s - t).abs() / s.abs();
    }
    Ok(sum / measured.len() as f64)
}

/// Runs one trial of the measurement protocol on an equal unit chain:
/// perturb the amplitude, release all bobs from rest, integrate, measure, and
/// compare against the corrected model at the perturbed amplitude.
pub fn run_trial(
    n: usize,
    theta0: f64,
    seed: u64,
    config: &IntegrationConfig,
) -> Result<TrialReport> {
    let (report, _trajectory) = run_trial_with_trajectory(n, theta0, seed, config)?;
    Ok(report)
}

/// Like [`run_trial`] but also returns the simulated trajectory (the campaign
/// layer exports it).
pub fn run_trial_with_trajectory(
    n: usize,
    theta0: f64,
    seed: u64,
    config: &IntegrationConfig,
) -> Result<(TrialReport, Trajectory)> {
    if n == 0 {
        return Err(Error::InvalidConfig("n must be >= 1".into()));
    }
    let chain = PendulumChain::unit(n);
    let theta0_used = perturb_initial(theta0, seed);
    let initial = ChainState::at_rest(vec![theta0_used; n])?;
    let trajectory = integrate(&chain, &initial, config)?;
    let system = system_period(&trajectory)?;
    let model = pseudo_period_corrected(&chain, theta0_used)?;
    let measured: Vec<f64> = system.estimates.iter().map(|e| e.mean_period).collect();
    let model_values = vec![model.t_real; measured.len()];
    let error = decimal_error(&measured, &model_values)?;
    let report = TrialReport {
        n,
        theta0_used,
        measured_period: system.mean,
        model_t0: model.t0,
        model_t_real: model.t_real,
        decimal_error: error,
        measured_bobs: system.estimates.len(),
        failed_bobs: system.failed_bobs.len(),
    };
    Ok((report, trajectory))
}

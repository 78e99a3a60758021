//! Experiment campaigns: fan-out over (N, trial) runs of the measurement
//! protocol with deterministic seeding, CSV/JSON artifacts, and the analytic
//! model table.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::chain::PendulumChain;
use crate::error::{Error, Result};
use crate::integrator::{IntegrationConfig, Trajectory};
use crate::linear::{correction_series, pseudo_period_ideal, DEFAULT_SERIES_ORDER};
use crate::period::{run_trial_with_trajectory, TrialReport};

/// Campaign parameters; defaults mirror the reference protocol
/// (N in {5, 10, 20, 100}, 3 trials, theta0 = pi/4, 10 s over 1000 frames).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub n_values: Vec<usize>,
    pub trials: usize,
    /// Nominal amplitude [rad]; each trial perturbs it.
    pub theta0: f64,
    /// Simulated duration per run [s].
    pub duration: f64,
    /// Recorded frames per run.
    pub frames: usize,
    /// Integration step [s].
    pub dt: f64,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Worker-thread bound for the run fan-out.
    pub jobs: usize,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            n_values: vec![5, 10, 20, 100],
            trials: 3,
            theta0: std::f64::consts::FRAC_PI_4,
            duration: 10.0,
            frames: 1000,
            dt: 1e-3,
            seed: 42,
            output_dir: PathBuf::from("pendlab-out"),
            jobs: 1,
        }
    }
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() || self.n_values.contains(&0) {
            return Err(Error::InvalidConfig("n_values must be nonzero counts".into()));
        }
        if self.trials == 0 || self.jobs == 0 {
            return Err(Error::InvalidConfig("trials and jobs must be >= 1".into()));
        }
        // Also checks duration/frames >= dt.
        self.integration()?;
        Ok(())
    }

    pub fn integration(&self) -> Result<IntegrationConfig> {
        let config = IntegrationConfig::from_frames(self.duration, self.frames, self.dt)?;
        if self.duration / (self.frames as f64) < self.dt {
            return Err(Error::InvalidConfig(
                "frame interval duration/frames must be >= dt".into(),
            ));
        }
        Ok(config)
    }
}

/// Analytic model-table row for one N.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRow {
    pub n: usize,
    pub t0: f64,
    pub delta_t: f64,
    pub t_low: f64,
    pub t_high: f64,
}

/// Outcome of one (n, trial) run; failures carry the error text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub n: usize,
    pub trial: usize,
    pub report: Option<TrialReport>,
    pub error: Option<String>,
}

/// Full campaign output: per-run outcomes keyed by (n, trial) plus the
/// seed-independent model table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignResult {
    pub runs: Vec<RunRecord>,
    pub model_table: Vec<ModelRow>,
}

impl CampaignResult {
    pub fn failed_runs(&self) -> usize {
        self.runs.iter().filter(|r| r.report.is_none()).count()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-run seed: deterministic in (campaign seed, n, trial) and independent of
/// execution order.
pub fn trial_seed(seed: u64, n: usize, trial: usize) -> u64 {
    splitmix64(splitmix64(seed ^ n as u64) ^ trial as u64)
}

/// 17-significant-digit decimal form; round-trips any f64 exactly.
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_text(path: &Path, contents: &str) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(io_err)?;
        }
    }
    let mut file = fs::File::create(path).map_err(io_err)?;
    file.write_all(contents.as_bytes()).map_err(io_err)
}

/// Writes a bob's phase-space trace as CSV: header `t,x,y,vx,vy`, one row per
/// sample, 17 significant digits.
pub fn emit_phase_space(
    chain: &PendulumChain,
    trajectory: &Trajectory,
    bob_index: usize,
    path: &Path,
) -> Result<()> {
    if bob_index >= chain.n() {
        return Err(Error::DimensionMismatch {
            expected: chain.n(),
            actual: bob_index + 1,
        });
    }
    let mut out = String::from("t,x,y,vx,vy\n");
    for state in trajectory.samples() {
        let cart = crate::chain::to_cartesian(chain, state)?;
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(state.time),
            fmt_f64(cart.xs[bob_index]),
            fmt_f64(cart.ys[bob_index]),
            fmt_f64(cart.vxs[bob_index]),
            fmt_f64(cart.vys[bob_index]),
        ));
    }
    write_text(path, &out)
}

/// Computes the analytic rows (N, T0, Delta T, T_low, T_high) for unit chains
/// at the given amplitude.
pub fn model_table(n_values: &[usize], theta0: f64) -> Result<Vec<ModelRow>> {
    let correction = correction_series(theta0, DEFAULT_SERIES_ORDER)?;
    n_values
        .iter()
        .map(|&n| {
            if n == 0 {
                return Err(Error::InvalidConfig("n must be >= 1".into()));
            }
            let t0 = pseudo_period_ideal(&PendulumChain::unit(n));
            let delta_t = correction * t0;
            Ok(ModelRow {
                n,
                t0,
                delta_t,
                t_low: t0 - delta_t,
                t_high: t0 + delta_t,
            })
        })
        .collect()
}

/// Writes the model table as CSV.
pub fn emit_model_table(n_values: &[usize], theta0: f64, path: &Path) -> Result<()> {
    let rows = model_table(n_values, theta0)?;
    let mut out = String::from("n,t0,delta_t,t_low,t_high\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.n,
            fmt_f64(row.t0),
            fmt_f64(row.delta_t),
            fmt_f64(row.t_low),
            fmt_f64(row.t_high),
        ));
    }
    write_text(path, &out)
}

fn trajectory_csv(trajectory: &Trajectory) -> String {
    let n = trajectory.chain().n();
    let mut out = String::from("t");
    for i in 1..=n {
        out.push_str(&format!(",theta_{i}"));
    }
    for i in 1..=n {
        out.push_str(&format!(",omega_{i}"));
    }
    out.push('\n');
    for state in trajectory.samples() {
        out.push_str(&fmt_f64(state.time));
        for v in state.thetas.iter().chain(state.omegas.iter()) {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

fn summary_csv(result: &CampaignResult) -> String {
    let mut out = String::from(
        "n,trial,status,theta0_used,measured_period,model_t0,model_t_real,decimal_error,measured_bobs,failed_bobs\n",
    );
    for run in &result.runs {
        match &run.report {
            Some(r) => out.push_str(&format!(
                "{},{},ok,{},{},{},{},{},{},{}\n",
                run.n,
                run.trial,
                fmt_f64(r.theta0_used),
                fmt_f64(r.measured_period),
                fmt_f64(r.model_t0),
                fmt_f64(r.model_t_real),
                fmt_f64(r.decimal_error),
                r.measured_bobs,
                r.failed_bobs,
            )),
            None => out.push_str(&format!(
                "{},{},error,,,,,,,\n",
                run.n, run.trial
            )),
        }
    }
    out
}

/// Runs the full campaign: `trials` runs for every N, bounded fan-out over
/// `jobs` workers, per-run trajectory CSVs, a summary CSV, a model-table CSV,
/// and a JSON result document under `config.output_dir`.
///
/// Individual run failures are recorded and the campaign continues; only I/O
/// failures abort.
pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignResult> {
    config.validate()?;
    let integration = config.integration()?;
    fs::create_dir_all(&config.output_dir).map_err(|source| Error::Io {
        path: config.output_dir.clone(),
        source,
    })?;

    let tasks: Vec<(usize, usize)> = config
        .n_values
        .iter()
        .flat_map(|&n| (0..config.trials).map(move |trial| (n, trial)))
        .collect();

    let slots: Mutex<Vec<Option<RunRecord>>> = Mutex::new(vec![None; tasks.len()]);
    let io_failure: Mutex<Option<Error>> = Mutex::new(None);
    let next = AtomicUsize::new(0);
    let workers = config.jobs.min(tasks.len());

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(n, trial)) = tasks.get(idx) else {
                    break;
                };
                let seed = trial_seed(config.seed, n, trial);
                let record = match run_trial_with_trajectory(n, config.theta0, seed, &integration)
                {
                    Ok((report, trajectory)) => {
                        let path = config
                            .output_dir
                            .join(format!("trajectory_n{n}_trial{trial}.csv"));
                        if let Err(err) = write_text(&path, &trajectory_csv(&trajectory)) {
                            *io_failure.lock().unwrap() = Some(err);
                            break;
                        }
                        RunRecord {
                            n,
                            trial,
                            report: Some(report),
                            error: None,
                        }
                    }
                    Err(err) => RunRecord {
                        n,
                        trial,
                        report: None,
                        error: Some(err.to_string()),
                    },
                };
                slots.lock().unwrap()[idx] = Some(record);
            });
        }
    });

    if let Some(err) = io_failure.into_inner().unwrap() {
        return Err(err);
    }
    let runs: Vec<RunRecord> = slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every task produces a record"))
        .collect();

    let result = CampaignResult {
        runs,
        model_table: model_table(&config.n_values, config.theta0)?,
    };

    write_text(&config.output_dir.join("summary.csv"), &summary_csv(&result))?;
    emit_model_table(
        &config.n_values,
        config.theta0,
        &config.output_dir.join("model_table.csv"),
    )?;
    let json = serde_json::to_string_pretty(&result)
        .expect("campaign result serializes") + "\n";
    write_text(&config.output_dir.join("result.json"), &json)?;

    Ok(result)
}

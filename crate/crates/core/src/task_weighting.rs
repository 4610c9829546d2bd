//! Multi-task loss weighting from per-epoch loss traces.
//!
//! Epoch `t` weights are computed from losses of epochs `< t` only.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use libm::{exp, log};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// History length for the variance window.
pub const VARNORM_WINDOW: usize = 5;
/// Guard added to the variance before inverting it.
pub const VARNORM_EPS: f64 = 1e-8;
pub const DWA_TEMPERATURE: f64 = 2.0;

/// Per-epoch losses of one task.
#[derive(Debug, Clone, PartialEq)]
pub struct LossTrace {
    pub task: String,
    losses: Vec<f64>,
}

impl LossTrace {
    pub fn new(task: impl Into<String>, losses: Vec<f64>) -> Result<Self> {
        if let Some((epoch, &value)) = losses
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::InvalidLoss {
                task: 0,
                epoch,
                value,
            });
        }
        Ok(Self {
            task: task.into(),
            losses,
        })
    }

    pub fn losses(&self) -> &[f64] {
        &self.losses
    }

    pub fn len(&self) -> usize {
        self.losses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.losses.is_empty()
    }
}

/// How the window dispersion is turned into a weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dispersion {
    /// `w = 1 / (var + eps)`.
    #[default]
    Variance,
    /// `w = 1 / (sqrt(var) + eps)`.
    StdDev,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarNormConfig {
    pub window: usize,
    pub eps: f64,
    pub dispersion: Dispersion,
}

impl Default for VarNormConfig {
    fn default() -> Self {
        Self {
            window: VARNORM_WINDOW,
            eps: VARNORM_EPS,
            dispersion: Dispersion::Variance,
        }
    }
}

/// Unbiased variance of `window` (divides by `n − 1`).
pub fn window_variance(window: &[f64]) -> f64 {
    let n = window.len() as f64;
    let mean = window.iter().sum::<f64>() / n;
    window.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
}

fn history(traces: &[LossTrace], epoch: usize) -> Result<()> {
    for (task, trace) in traces.iter().enumerate() {
        if trace.len() < epoch {
            return Err(Error::InvalidParameter(
                "trace shorter than the requested epoch",
            ));
        }
        if let Some((e, &value)) = trace.losses[..epoch]
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::InvalidLoss {
                task,
                epoch: e,
                value,
            });
        }
    }
    Ok(())
}

pub fn equal_weights(tasks: usize) -> Vec<f64> {
    vec![1.0; tasks]
}

/// Inverse dispersion of each task's losses over epochs `t−n .. t−1`.
/// Falls back to equal weights while `t < n`.
pub fn varnorm_weights(
    traces: &[LossTrace],
    epoch: usize,
    config: &VarNormConfig,
) -> Result<Vec<f64>> {
    if config.window < 2 {
        return Err(Error::InvalidParameter(
            "variance window needs at least 2 epochs",
        ));
    }
    history(traces, epoch)?;
    if epoch < config.window {
        return Ok(equal_weights(traces.len()));
    }
    Ok(traces
        .iter()
        .map(|trace| {
            let window = &trace.losses[epoch - config.window..epoch];
            let var = window_variance(window);
            let dispersion = match config.dispersion {
                Dispersion::Variance => var,
                Dispersion::StdDev => libm::sqrt(var),
            };
            1.0 / (dispersion + config.eps)
        })
        .collect())
}

/// Dynamic weight average: `K · softmax(r_i / T)` with `r_i = L_i(t−1) / L_i(t−2)`.
/// Equal weights for `t < 2`.
pub fn dwa_weights(traces: &[LossTrace], epoch: usize, temperature: f64) -> Result<Vec<f64>> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::InvalidParameter("temperature must be positive"));
    }
    history(traces, epoch)?;
    let k = traces.len();
    if epoch < 2 {
        return Ok(equal_weights(k));
    }
    let scores: Vec<f64> = traces
        .iter()
        .map(|t| t.losses[epoch - 1] / t.losses[epoch - 2] / temperature)
        .collect();
    let peak = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = scores.iter().map(|s| exp(s - peak)).collect();
    let total: f64 = e.iter().sum();
    Ok(e.iter().map(|v| k as f64 * v / total).collect())
}

/// `(∏ L_i)^{1/K}`, evaluated in log space.
pub fn geometric_total(losses: &[f64]) -> Result<f64> {
    if losses.is_empty() {
        return Err(Error::InvalidParameter("geometric total of zero losses"));
    }
    if let Some((task, &value)) = losses
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.is_finite() && **v > 0.0))
    {
        return Err(Error::InvalidLoss {
            task,
            epoch: 0,
            value,
        });
    }
    let mean_log = losses.iter().map(|&l| log(l)).sum::<f64>() / losses.len() as f64;
    Ok(exp(mean_log))
}

/// Effective per-task weights of the geometric total: `K · ∂G/∂L_i = G / L_i`
/// at the losses of epoch `t−1`. Equal weights at `t = 0`.
pub fn geometric_weights(traces: &[LossTrace], epoch: usize) -> Result<Vec<f64>> {
    history(traces, epoch)?;
    if epoch == 0 {
        return Ok(equal_weights(traces.len()));
    }
    let last: Vec<f64> = traces.iter().map(|t| t.losses[epoch - 1]).collect();
    let g = geometric_total(&last)?;
    Ok(last.iter().map(|l| g / l).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheduler {
    Equal,
    VarNorm(VarNormConfig),
    Dwa { temperature: f64 },
    Geometric,
}

impl Scheduler {
    pub fn name(&self) -> &'static str {
        match self {
            Scheduler::Equal => "equal",
            Scheduler::VarNorm(_) => "varnorm",
            Scheduler::Dwa { .. } => "dwa",
            Scheduler::Geometric => "geometric",
        }
    }

    pub fn weights(&self, traces: &[LossTrace], epoch: usize) -> Result<Vec<f64>> {
        match self {
            Scheduler::Equal => {
                history(traces, epoch)?;
                Ok(equal_weights(traces.len()))
            }
            Scheduler::VarNorm(config) => varnorm_weights(traces, epoch, config),
            Scheduler::Dwa { temperature } => dwa_weights(traces, epoch, *temperature),
            Scheduler::Geometric => geometric_weights(traces, epoch),
        }
    }
}

/// Synthetic loss curve `L(t) = (floor + amplitude · e^{−t/τ}) · e^{noise·ξ_t}`
/// with `ξ_t` standard normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayCurve {
    pub amplitude: f64,
    pub tau: f64,
    pub floor: f64,
    pub noise: f64,
}

impl DecayCurve {
    fn validate(&self) -> Result<()> {
        let ok = self.amplitude >= 0.0
            && self.tau > 0.0
            && self.floor >= 0.0
            && self.amplitude + self.floor > 0.0
            && self.noise >= 0.0
            && [self.amplitude, self.tau, self.floor, self.noise]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter("decay curve parameters"))
        }
    }

    pub fn mean_at(&self, epoch: usize) -> f64 {
        self.floor + self.amplitude * exp(-(epoch as f64) / self.tau)
    }
}

/// Default curves for `k` tasks: different scales, speeds and noise levels.
pub fn default_curves(k: usize, noise: f64) -> Vec<DecayCurve> {
    (0..k)
        .map(|i| DecayCurve {
            amplitude: 1.0 + i as f64,
            tau: 3.0 + 2.0 * i as f64,
            floor: 0.1 * (1 + i % 3) as f64,
            noise: noise * (1.0 + 0.5 * (i % 2) as f64),
        })
        .collect()
}

/// One simulated run: losses and weights for every (epoch, task).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSchedule {
    pub scheduler: &'static str,
    /// `losses[epoch][task]`.
    pub losses: Vec<Vec<f64>>,
    /// `weights[epoch][task]`.
    pub weights: Vec<Vec<f64>>,
}

impl WeightSchedule {
    pub fn epochs(&self) -> usize {
        self.losses.len()
    }

    /// Row-major `(epoch, task, loss, weight)` records.
    pub fn rows(&self) -> impl Iterator<Item = (usize, usize, f64, f64)> + '_ {
        self.losses
            .iter()
            .zip(&self.weights)
            .enumerate()
            .flat_map(|(e, (l, w))| {
                l.iter()
                    .zip(w)
                    .enumerate()
                    .map(move |(t, (&loss, &weight))| (e, t, loss, weight))
            })
    }
}

/// Samples every curve for `epochs` epochs and runs `scheduler` on the
/// resulting traces. Deterministic for a given `seed`.
pub fn simulate(
    curves: &[DecayCurve],
    scheduler: &Scheduler,
    epochs: usize,
    seed: u64,
) -> Result<WeightSchedule> {
    for c in curves {
        c.validate()?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut losses = Vec::with_capacity(epochs);
    for e in 0..epochs {
        let row: Vec<f64> = curves
            .iter()
            .map(|c| {
                let xi: f64 = StandardNormal.sample(&mut rng);
                c.mean_at(e) * exp(c.noise * xi)
            })
            .collect();
        losses.push(row);
    }
    let traces = (0..curves.len())
        .map(|t| {
            LossTrace::new(
                alloc::format!("task{t}"),
                losses.iter().map(|row| row[t]).collect(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let weights = (0..epochs)
        .map(|e| scheduler.weights(&traces, e))
        .collect::<Result<Vec<_>>>()?;
    Ok(WeightSchedule {
        scheduler: scheduler.name(),
        losses,
        weights,
    })
}

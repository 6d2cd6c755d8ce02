//! Monte Carlo simulation of the network, independent of the closed forms.
//!
//! Each trial draws an obstacle field with its losses, places the users, and
//! measures interference in two slots. Static users keep their positions and
//! only redraw activity and fading; i.i.d.-mobile users keep their count and
//! draw fresh uniform positions for the second slot. The obstacle field is
//! the same in both slots.
//!
//! Trial `t` uses a ChaCha8 stream keyed by the master seed with stream id
//! `t`, so results do not depend on how trials are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use rayon::prelude::*;

use crate::params::{MobilityMode, NetworkParams, ObservationPoint};
use crate::{Error, Result};

pub const MIN_TRIALS: usize = 1_000;

/// One draw of users and obstacles on `[-V, V]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub user_positions: Vec<f64>,
    /// Sorted ascending.
    pub obstacle_positions: Vec<f64>,
    /// Loss factor of the obstacle at the same index.
    pub obstacle_losses: Vec<f64>,
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let d = Poisson::new(mean).expect("positive finite Poisson mean");
    d.sample(rng) as usize
}

fn uniform_positions<R: Rng + ?Sized>(count: usize, half_length: f64, rng: &mut R) -> Vec<f64> {
    (0..count)
        .map(|_| half_length * (2.0 * rng.random::<f64>() - 1.0))
        .collect()
}

pub fn sample_realization<R: Rng + ?Sized>(p: &NetworkParams, rng: &mut R) -> Realization {
    let v = p.half_length;
    let n_users = poisson_count(2.0 * p.lambda * v, rng);
    let user_positions = uniform_positions(n_users, v, rng);
    let n_obstacles = poisson_count(2.0 * p.mu * v, rng);
    let mut obstacle_positions = uniform_positions(n_obstacles, v, rng);
    obstacle_positions.sort_by(f64::total_cmp);
    // Losses are independent of positions, so drawing them after sorting is
    // the same law.
    let obstacle_losses = (0..n_obstacles).map(|_| p.gamma * rng.random::<f64>()).collect();
    Realization {
        user_positions,
        obstacle_positions,
        obstacle_losses,
    }
}

/// Cumulative obstacle losses outward from an observation point.
#[derive(Debug, Clone)]
struct BlockageProfile {
    y: f64,
    right_dist: Vec<f64>,
    right_loss: Vec<f64>,
    left_dist: Vec<f64>,
    left_loss: Vec<f64>,
}

impl BlockageProfile {
    fn new(real: &Realization, y: f64) -> Self {
        let split = real.obstacle_positions.partition_point(|&o| o <= y);
        let cumulative = |iter: &mut dyn Iterator<Item = f64>| {
            let mut acc = 1.0;
            let mut out = vec![1.0];
            for loss in iter {
                acc *= loss;
                out.push(acc);
            }
            out
        };
        let right = split..real.obstacle_positions.len();
        let left = (0..split).rev().filter(|&i| real.obstacle_positions[i] < y);
        let left: Vec<usize> = left.collect();
        Self {
            y,
            right_dist: right.clone().map(|i| real.obstacle_positions[i] - y).collect(),
            right_loss: cumulative(&mut right.map(|i| real.obstacle_losses[i])),
            left_dist: left.iter().map(|&i| y - real.obstacle_positions[i]).collect(),
            left_loss: cumulative(&mut left.iter().map(|&i| real.obstacle_losses[i])),
        }
    }

    /// Product of the losses of obstacles strictly between `x` and the point.
    fn attenuation(&self, x: f64) -> f64 {
        let r = x - self.y;
        if r > 0.0 {
            self.right_loss[self.right_dist.partition_point(|&d| d < r)]
        } else if r < 0.0 {
            self.left_loss[self.left_dist.partition_point(|&d| d < -r)]
        } else {
            1.0
        }
    }
}

fn link_gains(real: &Realization, profile: &BlockageProfile, p: &NetworkParams) -> Vec<f64> {
    real.user_positions
        .iter()
        .map(|&x| p.tx_power * profile.attenuation(x) * p.pathloss((x - profile.y).abs()))
        .collect()
}

/// One slot: each user is active with probability `ξ` and fades with a
/// unit-mean exponential power.
fn slot<R: Rng + ?Sized>(gains: &[f64], xi: f64, rng: &mut R) -> f64 {
    gains
        .iter()
        .map(|&g| {
            let active = rng.random_bool(xi);
            let h: f64 = Exp1.sample(rng);
            if active {
                h * g
            } else {
                0.0
            }
        })
        .sum()
}

/// Interference at `point` in one slot, with fresh activity and fading.
pub fn interference_once<R: Rng + ?Sized>(
    real: &Realization,
    point: &ObservationPoint,
    p: &NetworkParams,
    rng: &mut R,
) -> f64 {
    let profile = BlockageProfile::new(real, point.y());
    slot(&link_gains(real, &profile, p), p.xi, rng)
}

/// Value with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    fn from_samples(samples: impl Iterator<Item = f64> + Clone, n: usize) -> Self {
        let nf = n as f64;
        let mean = samples.clone().sum::<f64>() / nf;
        let var = samples.map(|s| (s - mean).powi(2)).sum::<f64>() / (nf - 1.0);
        Self {
            value: mean,
            std_error: (var / nf).sqrt(),
        }
    }

    /// `(value - reference) / std_error`.
    pub fn z_score(&self, reference: f64) -> f64 {
        (self.value - reference) / self.std_error
    }
}

/// Monte Carlo moments and correlation for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    /// `E{I}`, from the per-trial slot average.
    pub mean: Estimate,
    /// `E{I²}`, from the per-trial average of the squared slots.
    pub second_moment: Estimate,
    /// `E{I(t) I(τ)}`.
    pub cross: Estimate,
    /// Pooled-variance Pearson coefficient; the error is the delta-method
    /// standard error.
    pub rho: Estimate,
    pub trials: usize,
    pub seed: u64,
    pub mode: MobilityMode,
}

/// Name of the correlation estimator, echoed into output metadata.
pub const ESTIMATOR: &str = "pooled-variance pearson";

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn trial_pair(p: &NetworkParams, y: f64, mode: MobilityMode, seed: u64, trial: usize) -> (f64, f64) {
    let mut rng = trial_rng(seed, trial);
    let mut real = sample_realization(p, &mut rng);
    let profile = BlockageProfile::new(&real, y);
    let gains = link_gains(&real, &profile, p);
    let first = slot(&gains, p.xi, &mut rng);
    let second = match mode {
        MobilityMode::Static => slot(&gains, p.xi, &mut rng),
        MobilityMode::IidMobility => {
            real.user_positions = uniform_positions(real.user_positions.len(), p.half_length, &mut rng);
            slot(&link_gains(&real, &profile, p), p.xi, &mut rng)
        }
    };
    (first, second)
}

/// Interference pairs `(I(t), I(τ))` for trials `0..trials`, in trial order.
pub fn sample_pairs(
    p: &NetworkParams,
    point: &ObservationPoint,
    mode: MobilityMode,
    trials: usize,
    seed: u64,
) -> Vec<(f64, f64)> {
    let y = point.y();
    (0..trials)
        .into_par_iter()
        .map(|t| trial_pair(p, y, mode, seed, t))
        .collect()
}

fn check_inputs(p: &NetworkParams, point: &ObservationPoint, trials: usize) -> Result<()> {
    p.validate()?;
    if trials < MIN_TRIALS {
        return Err(Error::InvalidParameter(format!(
            "trials must be at least {MIN_TRIALS} (got {trials})"
        )));
    }
    if point.y().abs() > p.half_length {
        return Err(Error::InvalidParameter(format!(
            "observation point {} lies outside the segment",
            point.y()
        )));
    }
    Ok(())
}

/// Monte Carlo estimate on the current rayon pool.
pub fn estimate(
    p: &NetworkParams,
    point: &ObservationPoint,
    mode: MobilityMode,
    trials: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_inputs(p, point, trials)?;
    let pairs = sample_pairs(p, point, mode, trials, seed);
    summarize(&pairs, mode, seed)
}

/// Monte Carlo estimate on a dedicated pool of `threads` workers.
pub fn estimate_with_threads(
    p: &NetworkParams,
    point: &ObservationPoint,
    mode: MobilityMode,
    trials: usize,
    seed: u64,
    threads: usize,
) -> Result<McEstimate> {
    check_inputs(p, point, trials)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot build thread pool: {e}")))?;
    let pairs = pool.install(|| sample_pairs(p, point, mode, trials, seed));
    summarize(&pairs, mode, seed)
}

/// Reduces trial pairs in order into moment and correlation estimates.
pub fn summarize(pairs: &[(f64, f64)], mode: MobilityMode, seed: u64) -> Result<McEstimate> {
    let n = pairs.len();
    if n < 2 {
        return Err(Error::InvalidParameter("need at least two trials".into()));
    }
    let nf = n as f64;
    let it = pairs.iter();
    let mean = Estimate::from_samples(it.clone().map(|&(x, y)| 0.5 * (x + y)), n);
    let second_moment = Estimate::from_samples(it.clone().map(|&(x, y)| 0.5 * (x * x + y * y)), n);
    let cross = Estimate::from_samples(it.clone().map(|&(x, y)| x * y), n);

    let m = mean.value;
    let cov = pairs.iter().map(|&(x, y)| (x - m) * (y - m)).sum::<f64>() / nf;
    let var = pairs
        .iter()
        .map(|&(x, y)| 0.5 * ((x - m).powi(2) + (y - m).powi(2)))
        .sum::<f64>()
        / nf;
    if !(var > 0.0 && var.is_finite()) {
        return Err(Error::InsufficientActivity(
            "interference has zero variance across trials".into(),
        ));
    }
    let r = cov / var;
    let influence = pairs
        .iter()
        .map(|&(x, y)| ((x - m) * (y - m) - 0.5 * r * ((x - m).powi(2) + (y - m).powi(2))) / var);
    let rho = Estimate {
        value: r,
        std_error: Estimate::from_samples(influence, n).std_error,
    };

    Ok(McEstimate {
        mean,
        second_moment,
        cross,
        rho,
        trials: n,
        seed,
        mode,
    })
}

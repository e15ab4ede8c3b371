//! Exact stochastic simulation (Gillespie direct method) and the empirical
//! statistics used to verify certificates.
//!
//! Sampling is time-grid thinning: after the burn-in, the state occupied at
//! each `Δt` tick is recorded, so plain sample averages estimate stationary
//! (time) averages without hold-time reweighting. Trajectories are
//! independent (trajectory `i` is seeded with `seed ^ i`) and merged in
//! index order, so results are identical whether they run in parallel
//! (default, rayon) or sequentially (`--no-default-features`).

use crate::network::ReactionNetwork;
use crate::quad::QuadraticForm;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use thiserror::Error;

/// Counts beyond this are reported as overflow rather than silently losing
/// integer precision in `f64` propensities.
const MAX_COUNT: i64 = 1 << 53;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SsaError {
    #[error("chain absorbed at state {state:?} at time {time}")]
    AbsorbedState { state: Vec<i64>, time: f64 },
    #[error("species count overflow at species {species}")]
    Overflow { species: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("empty sample set")]
    EmptySampleSet,
    #[error("state dimension {got} does not match network dimension {want}")]
    DimensionMismatch { got: usize, want: usize },
}

/// Simulation parameters with full provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub seed: u64,
    /// Time units discarded before sampling starts (per trajectory).
    pub burn_in: f64,
    /// Total number of recorded samples across all trajectories.
    pub samples: usize,
    /// Thinning interval in time units.
    pub dt: f64,
    pub trajectories: usize,
    /// Initial state; zeros if empty.
    #[serde(default)]
    pub initial_state: Vec<i64>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            burn_in: 100.0,
            samples: 100_000,
            dt: 1.0,
            trajectories: 8,
            initial_state: Vec::new(),
        }
    }
}

/// Stationary-regime states recorded at thinning ticks.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    n_species: usize,
    /// Flat row-major states, one row per sample.
    states: Vec<i64>,
    /// Tick time of each sample (relative to trajectory start).
    times: Vec<f64>,
    /// Sample count per trajectory, in trajectory order.
    trajectory_lengths: Vec<usize>,
    pub provenance: SimulationConfig,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn n_species(&self) -> usize {
        self.n_species
    }

    pub fn state(&self, i: usize) -> &[i64] {
        &self.states[i * self.n_species..(i + 1) * self.n_species]
    }

    pub fn iter_states(&self) -> impl Iterator<Item = &[i64]> {
        self.states.chunks_exact(self.n_species)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Write `t,x1,...,xn` CSV rows.
    pub fn write_csv<W: Write>(&self, names: &[String], mut w: W) -> std::io::Result<()> {
        write!(w, "t")?;
        for n in names {
            write!(w, ",{n}")?;
        }
        writeln!(w)?;
        for (i, t) in self.times.iter().enumerate() {
            write!(w, "{t}")?;
            for v in self.state(i) {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

struct TrajectoryPlan {
    seed: u64,
    samples: usize,
}

fn split_trajectories(config: &SimulationConfig) -> Vec<TrajectoryPlan> {
    let t = config.trajectories.max(1);
    let base = config.samples / t;
    let extra = config.samples % t;
    (0..t)
        .map(|i| TrajectoryPlan {
            seed: config.seed ^ i as u64,
            samples: base + usize::from(i < extra),
        })
        .filter(|p| p.samples > 0)
        .collect()
}

struct TrajectoryOut {
    states: Vec<i64>,
    times: Vec<f64>,
}

fn run_trajectory(
    network: &ReactionNetwork,
    plan: &TrajectoryPlan,
    burn_in: f64,
    dt: f64,
    initial: &[i64],
) -> Result<TrajectoryOut, SsaError> {
    let n = network.dim();
    let transitions = network.transitions();
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let mut state: Vec<i64> = initial.to_vec();
    let mut t = 0.0f64;
    let mut next_tick = burn_in;
    let mut recorded = 0usize;
    let mut states = Vec::with_capacity(plan.samples * n);
    let mut times = Vec::with_capacity(plan.samples);
    let mut propensities = vec![0.0f64; transitions.len()];

    while recorded < plan.samples {
        let mut total = 0.0;
        for (k, tr) in transitions.iter().enumerate() {
            let q = tr.rate.evaluate(&state);
            debug_assert!(q >= 0.0, "negative propensity");
            propensities[k] = q;
            total += q;
        }
        if total <= 0.0 {
            return Err(SsaError::AbsorbedState {
                state: state.clone(),
                time: t,
            });
        }
        let u: f64 = rng.random();
        let tau = -(1.0 - u).ln() / total;
        let t_next = t + tau;

        // Record the held state at every tick inside [t, t_next).
        while next_tick < t_next && recorded < plan.samples {
            states.extend_from_slice(&state);
            times.push(next_tick);
            recorded += 1;
            next_tick += dt;
        }
        if recorded >= plan.samples {
            break;
        }

        // Fire one reaction chosen proportionally to its propensity.
        let target: f64 = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = transitions.len() - 1;
        for (k, &q) in propensities.iter().enumerate() {
            acc += q;
            if target < acc {
                chosen = k;
                break;
            }
        }
        for (i, &d) in transitions[chosen].delta.iter().enumerate() {
            state[i] += d;
            if state[i] > MAX_COUNT {
                return Err(SsaError::Overflow { species: i });
            }
            debug_assert!(state[i] >= 0, "mass-action propensity fired below zero");
        }
        t = t_next;
    }

    Ok(TrajectoryOut { states, times })
}

/// Run the Gillespie direct method per the config and merge trajectories in
/// index order. Identical `(network, config)` yields an identical
/// [`SampleSet`] on every run and in both execution modes.
pub fn simulate(
    network: &ReactionNetwork,
    config: &SimulationConfig,
) -> Result<SampleSet, SsaError> {
    validate(network, config)?;
    let initial = if config.initial_state.is_empty() {
        vec![0i64; network.dim()]
    } else {
        config.initial_state.clone()
    };
    let plans = split_trajectories(config);

    #[cfg(feature = "parallel")]
    let results: Result<Vec<TrajectoryOut>, SsaError> = plans
        .par_iter()
        .map(|p| run_trajectory(network, p, config.burn_in, config.dt, &initial))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let results: Result<Vec<TrajectoryOut>, SsaError> = plans
        .iter()
        .map(|p| run_trajectory(network, p, config.burn_in, config.dt, &initial))
        .collect();

    Ok(merge(network.dim(), results?, config))
}

/// Sequential reference path; used by benches and the determinism tests.
pub fn simulate_serial(
    network: &ReactionNetwork,
    config: &SimulationConfig,
) -> Result<SampleSet, SsaError> {
    validate(network, config)?;
    let initial = if config.initial_state.is_empty() {
        vec![0i64; network.dim()]
    } else {
        config.initial_state.clone()
    };
    let plans = split_trajectories(config);
    let results: Result<Vec<TrajectoryOut>, SsaError> = plans
        .iter()
        .map(|p| run_trajectory(network, p, config.burn_in, config.dt, &initial))
        .collect();
    Ok(merge(network.dim(), results?, config))
}

fn validate(network: &ReactionNetwork, config: &SimulationConfig) -> Result<(), SsaError> {
    if config.dt <= 0.0 {
        return Err(SsaError::InvalidConfig("dt must be positive".into()));
    }
    if config.burn_in < 0.0 {
        return Err(SsaError::InvalidConfig("burn-in must be >= 0".into()));
    }
    if config.samples == 0 {
        return Err(SsaError::InvalidConfig("samples must be > 0".into()));
    }
    if !config.initial_state.is_empty() {
        if config.initial_state.len() != network.dim() {
            return Err(SsaError::DimensionMismatch {
                got: config.initial_state.len(),
                want: network.dim(),
            });
        }
        if config.initial_state.iter().any(|&v| v < 0) {
            return Err(SsaError::InvalidConfig(
                "initial state must be nonnegative".into(),
            ));
        }
    }
    Ok(())
}

fn merge(n: usize, outs: Vec<TrajectoryOut>, config: &SimulationConfig) -> SampleSet {
    let mut states = Vec::new();
    let mut times = Vec::new();
    let mut lengths = Vec::new();
    for o in outs {
        lengths.push(o.times.len());
        states.extend(o.states);
        times.extend(o.times);
    }
    SampleSet {
        n_species: n,
        states,
        times,
        trajectory_lengths: lengths,
        provenance: config.clone(),
    }
}

/// A batch-means moment estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

/// Sample mean of `f` with a batch-means standard error (⌈√N⌉ batches per
/// trajectory), which accounts for autocorrelation along each trajectory.
pub fn empirical_moments(
    samples: &SampleSet,
    f: &QuadraticForm,
) -> Result<MomentEstimate, SsaError> {
    if samples.is_empty() {
        return Err(SsaError::EmptySampleSet);
    }
    let values: Vec<f64> = samples.iter_states().map(|s| f.eval_state(s)).collect();
    let n = values.len();
    let estimate = values.iter().sum::<f64>() / n as f64;

    // Batch within trajectories so batches never straddle independent runs.
    let mut batch_means = Vec::new();
    let mut offset = 0usize;
    for &len in &samples.trajectory_lengths {
        if len == 0 {
            continue;
        }
        let b = (len as f64).sqrt().ceil() as usize;
        let size = len.div_ceil(b);
        let chunk = &values[offset..offset + len];
        for batch in chunk.chunks(size) {
            if !batch.is_empty() {
                batch_means.push(batch.iter().sum::<f64>() / batch.len() as f64);
            }
        }
        offset += len;
    }
    let nb = batch_means.len();
    let std_error = if nb < 2 {
        f64::INFINITY
    } else {
        let mean_b = batch_means.iter().sum::<f64>() / nb as f64;
        let var_b = batch_means
            .iter()
            .map(|m| (m - mean_b).powi(2))
            .sum::<f64>()
            / (nb - 1) as f64;
        (var_b / nb as f64).sqrt()
    };
    Ok(MomentEstimate {
        estimate,
        std_error,
    })
}

/// Fraction of sample states with `qv(x) ≥ threshold`.
pub fn empirical_mass(
    samples: &SampleSet,
    qv: &QuadraticForm,
    threshold: f64,
) -> Result<f64, SsaError> {
    if samples.is_empty() {
        return Err(SsaError::EmptySampleSet);
    }
    let hits = samples
        .iter_states()
        .filter(|s| qv.eval_state(s) >= threshold)
        .count();
    Ok(hits as f64 / samples.len() as f64)
}

//! Seeded Monte Carlo for the full walk.
//!
//! Replication `r` draws from ChaCha8 seeded with the plan's seed and set to
//! stream `r`, so each replication sees the same random numbers however the
//! work is split. Per-replication results are collected in index order and
//! pooled by a sequential fold, which makes the estimate bit-identical for
//! any worker count.

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::formulas::HittingQuery;
use crate::model::{Configuration, ModelParams, TARGET_URN};
use crate::{Error, Result};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.96;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationPlan {
    pub params: ModelParams,
    pub start: Configuration,
    pub target: Configuration,
    pub replications: u64,
    pub seed: u64,
    pub workers: usize,
    pub max_steps: u64,
}

/// `100 · n^M · M`, saturating at `u64::MAX`.
pub fn default_step_cap(params: ModelParams) -> u64 {
    (params.state_count() * 100u32 * params.balls()).to_u64().unwrap_or(u64::MAX)
}

impl SimulationPlan {
    /// One worker and the default step cap.
    pub fn new(
        params: ModelParams,
        start: Configuration,
        target: Configuration,
        replications: u64,
        seed: u64,
    ) -> Result<Self> {
        let plan = Self { params, start, target, replications, seed, workers: 1, max_steps: default_step_cap(params) };
        plan.validate()?;
        Ok(plan)
    }

    /// The canonical pair at Hamming distance `distance`: from `(1,…,1)` to
    /// the configuration whose last `distance` balls are in urn 2.
    pub fn for_hamming(params: ModelParams, distance: u32, replications: u64, seed: u64) -> Result<Self> {
        let (start, target) = HittingQuery::new(params, distance)?.canonical_pair();
        Self::new(params, start, target, replications, seed)
    }

    pub fn with_workers(self, workers: usize) -> Result<Self> {
        let plan = Self { workers, ..self };
        plan.validate()?;
        Ok(plan)
    }

    pub fn with_max_steps(self, max_steps: u64) -> Result<Self> {
        let plan = Self { max_steps, ..self };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        self.start.validate(self.params)?;
        self.target.validate(self.params)?;
        if self.start == self.target {
            return Err(Error::IdenticalConfigurations);
        }
        if self.replications == 0 {
            return Err(Error::InvalidPlan("replications must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidPlan("workers must be at least 1".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidPlan("step cap must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HittingEstimate {
    pub mean: f64,
    pub sample_variance: f64,
    pub std_error: f64,
    pub replications_completed: u64,
    pub truncated_count: u64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub seed: u64,
}

impl HittingEstimate {
    /// `(mean − exact) / std_error`. Infinite when the standard error is
    /// zero and the mean is off.
    pub fn standardized_error(&self, exact: f64) -> f64 {
        let diff = self.mean - exact;
        if diff == 0.0 {
            0.0
        } else {
            diff / self.std_error
        }
    }
}

/// Moves `ball` (0-based) to the `alt`-th other urn, `alt ∈ {1,…,n−1}`,
/// counting urns in order and skipping the ball's current one.
pub fn step_with_draws(c: &Configuration, params: ModelParams, ball: usize, alt: u32) -> Configuration {
    debug_assert!(ball < params.balls() as usize && (1..params.urns()).contains(&alt));
    let current = c.placement()[ball];
    c.with_ball_in(ball, skip_adjust(alt, current))
}

/// One step of the walk.
pub fn step<R: Rng + ?Sized>(c: &Configuration, params: ModelParams, rng: &mut R) -> Configuration {
    let (ball, alt) = draw(params, rng);
    step_with_draws(c, params, ball, alt)
}

fn skip_adjust(alt: u32, current: u32) -> u32 {
    if alt >= current {
        alt + 1
    } else {
        alt
    }
}

fn draw<R: Rng + ?Sized>(params: ModelParams, rng: &mut R) -> (usize, u32) {
    (rng.random_range(0..params.balls() as usize), rng.random_range(1..params.urns()))
}

fn replication_rng(seed: u64, replication: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication);
    rng
}

// Steps to reach the target, or None at the cap.
fn replicate(plan: &SimulationPlan, replication: u64) -> Option<u64> {
    let mut rng = replication_rng(plan.seed, replication);
    let mut state = plan.start.placement().to_vec();
    let target = plan.target.placement();
    let mut mismatched = state.iter().zip(target).filter(|(a, b)| a != b).count();
    for t in 1..=plan.max_steps {
        let (ball, alt) = draw(plan.params, &mut rng);
        let before = state[ball] == target[ball];
        state[ball] = skip_adjust(alt, state[ball]);
        let after = state[ball] == target[ball];
        match (before, after) {
            (true, false) => mismatched += 1,
            (false, true) => mismatched -= 1,
            _ => {}
        }
        if mismatched == 0 {
            return Some(t);
        }
    }
    None
}

fn in_order<T: Send>(replications: u64, workers: usize, f: impl Fn(u64) -> T + Sync + Send) -> Result<Vec<T>> {
    if workers == 1 {
        return Ok((0..replications).map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidPlan(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(|| (0..replications).into_par_iter().map(f).collect()))
}

/// Runs the plan and pools the completed replications.
pub fn run(plan: &SimulationPlan) -> Result<HittingEstimate> {
    plan.validate()?;
    let outcomes = in_order(plan.replications, plan.workers, |r| replicate(plan, r))?;

    // Welford, in replication order
    let (mut count, mut mean, mut m2) = (0u64, 0.0f64, 0.0f64);
    for &steps in outcomes.iter().flatten() {
        count += 1;
        let x = steps as f64;
        let delta = x - mean;
        mean += delta / count as f64;
        m2 += delta * (x - mean);
    }
    if count == 0 {
        return Err(Error::AllTruncated { replications: plan.replications, step_cap: plan.max_steps });
    }
    let sample_variance = if count > 1 { m2 / (count - 1) as f64 } else { 0.0 };
    let std_error = (sample_variance / count as f64).sqrt();
    Ok(HittingEstimate {
        mean,
        sample_variance,
        std_error,
        replications_completed: count,
        truncated_count: plan.replications - count,
        ci95_low: mean - Z95 * std_error,
        ci95_high: mean + Z95 * std_error,
        seed: plan.seed,
    })
}

/// [`run`] for an arbitrary pair; the name marks the Hamming-distance use.
pub fn estimate_general(plan: &SimulationPlan) -> Result<HittingEstimate> {
    run(plan)
}

/// Empirical proportion with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrequencyEstimate {
    pub successes: u64,
    pub trials: u64,
    pub proportion: f64,
    pub std_error: f64,
}

impl FrequencyEstimate {
    fn new(successes: u64, trials: u64) -> Self {
        let proportion = successes as f64 / trials as f64;
        let std_error = (proportion * (1.0 - proportion) / trials as f64).sqrt();
        Self { successes, trials, proportion, std_error }
    }

    /// Whether `p` lies within `sigmas` binomial standard errors, using the
    /// standard error under `p` itself so that `p ∈ {0, 1}` is handled.
    pub fn consistent_with(&self, p: f64, sigmas: f64) -> bool {
        let se = (p * (1.0 - p) / self.trials as f64).sqrt();
        (self.proportion - p).abs() <= sigmas * se
    }
}

/// How often the walk from `(1,…,1)` first enters the fiber of
/// configurations with balls `1..k−1` in urn 2 at `(2,…,2)`.
pub fn first_visit_frequency(params: ModelParams, trials: u64, seed: u64, workers: usize) -> Result<FrequencyEstimate> {
    if trials == 0 || workers == 0 {
        return Err(Error::InvalidPlan("trials and workers must be at least 1".into()));
    }
    let k = params.balls() as usize;
    let cap = default_step_cap(params);
    let outcomes = in_order(trials, workers, |r| {
        let mut rng = replication_rng(seed, r);
        let mut state = vec![1u32; k];
        // balls 1..k-1 outside urn 2
        let mut outside = k - 1;
        for _ in 0..cap {
            if outside == 0 {
                return Some(state[k - 1] == TARGET_URN);
            }
            let (ball, alt) = draw(params, &mut rng);
            let was = state[ball] == TARGET_URN;
            state[ball] = skip_adjust(alt, state[ball]);
            if ball < k - 1 {
                match (was, state[ball] == TARGET_URN) {
                    (true, false) => outside += 1,
                    (false, true) => outside -= 1,
                    _ => {}
                }
            }
        }
        None
    })?;
    let finished: Vec<bool> = outcomes.into_iter().flatten().collect();
    if finished.is_empty() {
        return Err(Error::AllTruncated { replications: trials, step_cap: cap });
    }
    let successes = finished.iter().filter(|&&s| s).count() as u64;
    Ok(FrequencyEstimate::new(successes, finished.len() as u64))
}

//! Sampling plans shared by every estimator: exact draws by coupling from
//! the past, or long heat-bath chains with burn-in, run as independent
//! replicas in parallel and reduced in replica order.

use rayon::prelude::*;

use super::{cftp_coupled, CoupledChains, HeatBath, ModelParams};
use crate::error::{Error, Result};
use crate::lattice::{Spin, SpinConfig, SquareBox};
use crate::seed::child_seed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    /// Independent exact draws; draw `i` of replica `r` uses seed
    /// `child_seed(child_seed(seed, r), i)`.
    Exact { max_sweeps: u64 },
    /// One chain per replica started all-plus on free sites; `burn_in`
    /// sweeps are discarded and a sample is taken every `thin` sweeps.
    Chain { burn_in: u64, thin: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingPlan {
    pub strategy: Strategy,
    /// Total samples over all replicas.
    pub samples: usize,
    /// Independent replicas (the unit of parallel work).
    pub replicas: usize,
    /// Batches per replica for batch-means error bars.
    pub batches: usize,
}

impl SamplingPlan {
    pub fn exact(samples: usize) -> Self {
        SamplingPlan {
            strategy: Strategy::Exact {
                max_sweeps: super::DEFAULT_MAX_SWEEPS,
            },
            samples,
            replicas: 1,
            batches: 50,
        }
    }

    pub fn chain(samples: usize, burn_in: u64) -> Self {
        SamplingPlan {
            strategy: Strategy::Chain { burn_in, thin: 1 },
            samples,
            replicas: 1,
            batches: 50,
        }
    }

    pub fn with_replicas(mut self, replicas: usize) -> Self {
        self.replicas = replicas.max(1);
        self
    }

    pub fn with_batches(mut self, batches: usize) -> Self {
        self.batches = batches.max(2);
        self
    }

    pub fn with_thin(mut self, thin: u64) -> Self {
        if let Strategy::Chain { burn_in, .. } = self.strategy {
            self.strategy = Strategy::Chain {
                burn_in,
                thin: thin.max(1),
            };
        }
        self
    }

    /// Samples handled by replica `r`.
    pub fn replica_samples(&self, r: usize) -> usize {
        let base = self.samples / self.replicas;
        base + usize::from(r < self.samples % self.replicas)
    }

    /// Batch size used inside one replica.
    pub fn batch_size(&self) -> usize {
        (self.samples / self.replicas / self.batches.max(1)).max(1)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.strategy, Strategy::Exact { .. })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunDiagnostics {
    pub samples: u64,
    /// Heat-bath sweeps performed (all chains of one coupled group count once).
    pub sweeps: u64,
    /// Deepest coalescence start time seen (exact strategy only).
    pub max_coalescence: u64,
    pub mean_coalescence: f64,
}

impl RunDiagnostics {
    fn merge(&mut self, o: &RunDiagnostics) {
        let n = self.samples + o.samples;
        if n > 0 {
            self.mean_coalescence = (self.mean_coalescence * self.samples as f64
                + o.mean_coalescence * o.samples as f64)
                / n as f64;
        }
        self.samples = n;
        self.sweeps += o.sweeps;
        self.max_coalescence = self.max_coalescence.max(o.max_coalescence);
    }
}

/// Run the templates under shared randomness and feed every joint sample to
/// `observe`.
///
/// Each replica owns an accumulator created by `init`; the accumulators come
/// back in replica order, so reductions do not depend on scheduling or on
/// the size of the thread pool.
pub fn run_coupled<A, I, F>(
    templates: &[SpinConfig],
    params: &ModelParams,
    plan: &SamplingPlan,
    seed: u64,
    init: I,
    observe: F,
) -> Result<(Vec<A>, RunDiagnostics)>
where
    A: Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut A, &[SpinConfig]) + Sync,
{
    if templates.is_empty() {
        return Err(Error::InvalidParameter("no templates".into()));
    }
    let geom = templates[0].geometry();
    if templates.iter().any(|t| t.geometry() != geom) {
        return Err(Error::Dimension("templates must share one box".into()));
    }
    if plan.samples == 0 || plan.replicas == 0 {
        return Err(Error::InvalidParameter("sampling plan needs samples and replicas".into()));
    }
    let kernel = HeatBath::new(params);
    let results: Vec<Result<(A, RunDiagnostics)>> = (0..plan.replicas)
        .into_par_iter()
        .map(|r| {
            let rseed = child_seed(seed, r as u64);
            let count = plan.replica_samples(r);
            let mut acc = init();
            let mut diag = RunDiagnostics::default();
            match plan.strategy {
                Strategy::Exact { max_sweeps } => {
                    let mut total_t = 0u64;
                    for i in 0..count {
                        let (out, t) =
                            cftp_coupled(templates, &kernel, child_seed(rseed, i as u64), max_sweeps)?;
                        observe(&mut acc, &out);
                        total_t += t;
                        diag.max_coalescence = diag.max_coalescence.max(t);
                        diag.sweeps += 2 * t;
                    }
                    diag.samples = count as u64;
                    diag.mean_coalescence = if count > 0 {
                        total_t as f64 / count as f64
                    } else {
                        0.0
                    };
                }
                Strategy::Chain { burn_in, thin } => {
                    let starts: Vec<SpinConfig> = templates
                        .iter()
                        .map(|t| {
                            let mut c = t.clone();
                            c.fill_free(Spin::Plus);
                            c
                        })
                        .collect();
                    let mut chains = CoupledChains::new(starts, rseed)?;
                    for _ in 0..burn_in {
                        chains.sweep(&kernel);
                    }
                    for _ in 0..count {
                        for _ in 0..thin {
                            chains.sweep(&kernel);
                        }
                        observe(&mut acc, chains.configs());
                    }
                    diag.samples = count as u64;
                    diag.sweeps = chains.sweeps();
                }
            }
            Ok((acc, diag))
        })
        .collect();
    let mut accs = Vec::with_capacity(results.len());
    let mut diag = RunDiagnostics::default();
    for r in results {
        let (a, d) = r?;
        diag.merge(&d);
        accs.push(a);
    }
    Ok((accs, diag))
}

/// Samples of the plus-boundary measure on `[-n, n]^2`, each passed to
/// `observe` (exact or chain, per `plan`).
pub fn sample_plus_phase<A, I, F>(
    n: usize,
    params: &ModelParams,
    plan: &SamplingPlan,
    seed: u64,
    init: I,
    observe: F,
) -> Result<(Vec<A>, RunDiagnostics)>
where
    A: Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut A, &SpinConfig) + Sync,
{
    let template = SpinConfig::uniform(SquareBox::new(n)?, Spin::Plus, Spin::Plus);
    run_coupled(&[template], params, plan, seed, init, |a, cs| observe(a, &cs[0]))
}

//! Monotone coupling from the past.
//!
//! Start times `-T` double (`T = 1, 2, 4, ...`). Time is cut into blocks:
//! block 0 is the sweep `[-1, 0)`, block `j >= 1` is `[-2^j, -2^(j-1))`.
//! The uniforms of block `j` come from the stream `child_seed(seed, j)`, so
//! a deeper restart replays exactly the randomness of the shallower ones.

use super::{fill_uniforms, HeatBath, ModelParams, SweepPlan};
use crate::error::{Error, Result};
use crate::lattice::{Spin, SpinConfig};
use crate::seed::{child_seed, rng_from_seed};

/// Deepest start time tried by default: `2^20` sweeps.
pub const DEFAULT_MAX_SWEEPS: u64 = 1 << 20;

#[derive(Debug, Clone)]
pub struct CftpSample {
    pub config: SpinConfig,
    /// Start time `T` at which the extremal chains had coalesced by time 0.
    pub start_sweeps: u64,
}

/// Exact draw from the (clamped) finite-volume measure of `template`.
pub fn cftp_sample(
    template: &SpinConfig,
    p: &ModelParams,
    seed: u64,
    max_sweeps: u64,
) -> Result<CftpSample> {
    let (mut configs, t) = cftp_coupled(std::slice::from_ref(template), &HeatBath::new(p), seed, max_sweeps)?;
    Ok(CftpSample {
        config: configs.pop().expect("one template"),
        start_sweeps: t,
    })
}

/// Joint exact draw for several templates on one box under shared
/// uniforms. The start time is the first one at which every template has
/// coalesced, so outputs of ordered templates are ordered.
pub fn cftp_coupled(
    templates: &[SpinConfig],
    kernel: &HeatBath,
    seed: u64,
    max_sweeps: u64,
) -> Result<(Vec<SpinConfig>, u64)> {
    let first = templates
        .first()
        .ok_or_else(|| Error::InvalidParameter("no templates".into()))?
        .geometry();
    if templates.iter().any(|t| t.geometry() != first) {
        return Err(Error::Dimension("templates must share one box".into()));
    }
    if templates.iter().all(|t| t.free_count() == 0) {
        return Ok((templates.to_vec(), 0));
    }
    let plans: Vec<SweepPlan> = templates.iter().map(SweepPlan::new).collect();
    let mut buf = vec![0.0; first.site_count()];
    let mut upper: Vec<SpinConfig> = templates.to_vec();
    let mut lower: Vec<SpinConfig> = templates.to_vec();
    let mut depth = 0u32; // T = 2^depth
    loop {
        let t = 1u64 << depth;
        for (u, l) in upper.iter_mut().zip(lower.iter_mut()) {
            u.fill_free(Spin::Plus);
            l.fill_free(Spin::Minus);
        }
        for block in (0..=depth).rev() {
            let len = if block == 0 { 1 } else { 1u64 << (block - 1) };
            let mut rng = rng_from_seed(child_seed(seed, block as u64));
            for _ in 0..len {
                fill_uniforms(&mut rng, &mut buf);
                for ((u, l), plan) in upper.iter_mut().zip(lower.iter_mut()).zip(&plans) {
                    plan.apply(u.cells_mut(), kernel, &buf);
                    plan.apply(l.cells_mut(), kernel, &buf);
                }
            }
        }
        if upper.iter().zip(&lower).all(|(u, l)| u == l) {
            return Ok((upper, t));
        }
        if t >= max_sweeps {
            return Err(Error::NonCoalescence { sweeps: t });
        }
        depth += 1;
    }
}

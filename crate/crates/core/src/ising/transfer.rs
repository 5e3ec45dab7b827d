//! Column transfer-matrix oracle for boxes too large to enumerate.
//!
//! A column state holds the `2n + 1` spins of one column, bit `j` standing
//! for `y = j - n` (set for `+`). The partition function is a product of
//! column weights and nearest-column couplings, accumulated left to right
//! with per-column normalisation.

use super::ModelParams;
use crate::error::{Error, Result};
use crate::lattice::{Site, SiteRole, Spin, SpinConfig};

/// Largest half-width handled (columns of 13 spins, 8192 states).
pub const TRANSFER_LIMIT: usize = 6;

#[derive(Debug, Clone)]
pub struct TransferOracle {
    template: SpinConfig,
    params: ModelParams,
    log_z: f64,
}

impl TransferOracle {
    /// Oracle for the measure of `template`: ring spins and clamps are taken
    /// from it. Masked sites are not supported.
    pub fn new(template: &SpinConfig, params: &ModelParams) -> Result<Self> {
        let g = template.geometry();
        if g.half_width() > TRANSFER_LIMIT {
            return Err(Error::Capacity {
                what: "transfer-matrix half-width",
                count: g.half_width(),
                limit: TRANSFER_LIMIT,
            });
        }
        if g.sites().any(|s| template.role(s) == Ok(SiteRole::Masked)) {
            return Err(Error::Unsupported(
                "transfer oracle does not support masked sites".into(),
            ));
        }
        let mut o = TransferOracle {
            template: template.clone(),
            params: *params,
            log_z: 0.0,
        };
        o.log_z = o.log_partition(&[]);
        if !o.log_z.is_finite() {
            return Err(Error::Precondition("clamps have zero weight".into()));
        }
        Ok(o)
    }

    pub fn template(&self) -> &SpinConfig {
        &self.template
    }

    /// Log of the (clamped) partition function, up to a constant common to
    /// every query.
    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    /// Probability that every listed interior site carries the listed spin.
    pub fn cylinder(&self, assignment: &[(Site, Spin)]) -> f64 {
        let g = self.template.geometry();
        let mut extra = Vec::with_capacity(assignment.len());
        for &(s, v) in assignment {
            if !g.contains(s) {
                if self.template.get(s).ok() != Some(v) {
                    return 0.0;
                }
                continue;
            }
            if self.template.is_frozen(s) {
                if self.template.spin(s) != v {
                    return 0.0;
                }
                continue;
            }
            extra.push((s, v));
        }
        if extra.is_empty() {
            return 1.0;
        }
        (self.log_partition(&extra) - self.log_z).exp()
    }

    pub fn plus_probability(&self, s: Site) -> f64 {
        self.cylinder(&[(s, Spin::Plus)])
    }

    fn log_partition(&self, extra: &[(Site, Spin)]) -> f64 {
        let c = &self.template;
        let g = c.geometry();
        let n = g.half_width() as i32;
        let h = g.side();
        let beta = self.params.beta;
        let fc = self.params.log_weight_field();
        let states = 1usize << h;
        let coupling: Vec<f64> = (0..=h)
            .map(|k| (beta * (h as f64 - 2.0 * k as f64)).exp())
            .collect();
        let spin_of = |state: usize, j: usize| if state >> j & 1 == 1 { 1.0 } else { -1.0 };

        let mut prev: Vec<(usize, f64)> = Vec::new();
        let mut log_scale = 0.0;
        for x in -n..=n {
            // Required bits for this column.
            let mut care = 0usize;
            let mut want = 0usize;
            for j in 0..h {
                let s = Site::new(x, j as i32 - n);
                let fixed = if c.is_frozen(s) {
                    Some(c.spin(s))
                } else {
                    extra.iter().rev().find(|(t, _)| *t == s).map(|&(_, v)| v)
                };
                if let Some(v) = fixed {
                    // Conflicting duplicate constraints give zero weight.
                    if extra.iter().any(|&(t, w)| t == s && w != v) {
                        return f64::NEG_INFINITY;
                    }
                    care |= 1 << j;
                    if v == Spin::Plus {
                        want |= 1 << j;
                    }
                }
            }
            let bottom = c.spin(Site::new(x, -n - 1)).value() as f64;
            let top = c.spin(Site::new(x, n + 1)).value() as f64;
            let side: Vec<f64> = (0..h)
                .map(|j| {
                    let y = j as i32 - n;
                    let mut v = 0.0;
                    if x == -n {
                        v += c.spin(Site::new(-n - 1, y)).value() as f64;
                    }
                    if x == n {
                        v += c.spin(Site::new(n + 1, y)).value() as f64;
                    }
                    v
                })
                .collect();
            let mut lws: Vec<(usize, f64)> = Vec::new();
            let mut max_lw = f64::NEG_INFINITY;
            for t in (0..states).filter(|t| t & care == want) {
                let mut lw = beta * (spin_of(t, 0) * bottom + spin_of(t, h - 1) * top);
                for (j, sd) in side.iter().enumerate() {
                    let sj = spin_of(t, j);
                    lw += sj * (fc + beta * sd);
                    if j + 1 < h {
                        lw += beta * sj * spin_of(t, j + 1);
                    }
                }
                max_lw = max_lw.max(lw);
                lws.push((t, lw));
            }
            let mut cur: Vec<(usize, f64)> = Vec::with_capacity(lws.len());
            let mut total = 0.0;
            for (t, lw) in lws {
                let incoming: f64 = if x == -n {
                    1.0
                } else {
                    prev.iter()
                        .map(|&(s, v)| v * coupling[(s ^ t).count_ones() as usize])
                        .sum()
                };
                let v = incoming * (lw - max_lw).exp();
                total += v;
                cur.push((t, v));
            }
            if total.is_nan() || total <= 0.0 {
                return f64::NEG_INFINITY;
            }
            cur.iter_mut().for_each(|(_, v)| *v /= total);
            log_scale += total.ln() + max_lw;
            prev = cur;
        }
        log_scale
    }
}

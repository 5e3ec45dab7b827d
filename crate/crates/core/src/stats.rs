//! Estimates with confidence intervals, batch-means error bars, and the
//! handful of classical tests the probes need.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Point estimate, standard error, normal-approximation 95% interval and
/// provenance. Every Monte Carlo estimator in the crate returns one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateWithCI {
    pub value: f64,
    pub stderr: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub samples: u64,
    pub seed: u64,
}

impl EstimateWithCI {
    pub fn new(value: f64, stderr: f64, samples: u64, seed: u64) -> Self {
        EstimateWithCI {
            value,
            stderr,
            ci_low: value - Z95 * stderr,
            ci_high: value + Z95 * stderr,
            samples,
            seed,
        }
    }

    /// An exactly known value (zero error).
    pub fn exact(value: f64, seed: u64) -> Self {
        Self::new(value, 0.0, 0, seed)
    }

    /// `1 - value`, same error bar.
    pub fn complement(&self) -> Self {
        Self::new(1.0 - self.value, self.stderr, self.samples, self.seed)
    }

    /// `|self - other| <= k * sqrt(se1^2 + se2^2)`.
    pub fn agrees_with(&self, other: &EstimateWithCI, k: f64) -> bool {
        (self.value - other.value).abs() <= k * pooled_se(self.stderr, other.stderr)
    }

    /// `|self - exact| <= k * se`.
    pub fn within(&self, exact: f64, k: f64) -> bool {
        (self.value - exact).abs() <= k * self.stderr
    }
}

pub fn pooled_se(a: f64, b: f64) -> f64 {
    (a * a + b * b).sqrt()
}

/// Batch-means accumulator for several channels observed along one chain.
///
/// Samples are grouped into consecutive batches of `batch_size`; the
/// standard error is the spread of complete batch means over
/// `sqrt(#batches)`. Accumulators of replicate chains are merged by
/// concatenating their batches.
#[derive(Debug, Clone)]
pub struct BatchMeans {
    channels: usize,
    batch_size: usize,
    totals: Vec<f64>,
    count: u64,
    current: Vec<f64>,
    in_batch: usize,
    batches: Vec<Vec<f64>>,
}

impl BatchMeans {
    pub fn new(channels: usize, batch_size: usize) -> Self {
        BatchMeans {
            channels,
            batch_size: batch_size.max(1),
            totals: vec![0.0; channels],
            count: 0,
            current: vec![0.0; channels],
            in_batch: 0,
            batches: Vec::new(),
        }
    }

    /// Batch size giving roughly `batches` batches out of `samples`.
    pub fn for_samples(channels: usize, samples: usize, batches: usize) -> Self {
        Self::new(channels, (samples / batches.max(1)).max(1))
    }

    pub fn push(&mut self, values: &[f64]) {
        debug_assert_eq!(values.len(), self.channels);
        for ((t, c), v) in self.totals.iter_mut().zip(&mut self.current).zip(values) {
            *t += v;
            *c += v;
        }
        self.count += 1;
        self.in_batch += 1;
        if self.in_batch == self.batch_size {
            let bs = self.batch_size as f64;
            self.batches.push(self.current.iter().map(|s| s / bs).collect());
            self.current.iter_mut().for_each(|c| *c = 0.0);
            self.in_batch = 0;
        }
    }

    pub fn push1(&mut self, value: f64) {
        self.push(std::slice::from_ref(&value));
    }

    pub fn merge(&mut self, other: BatchMeans) {
        assert_eq!(self.channels, other.channels);
        for (t, o) in self.totals.iter_mut().zip(&other.totals) {
            *t += o;
        }
        self.count += other.count;
        self.batches.extend(other.batches);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self, channel: usize) -> f64 {
        if self.count == 0 {
            return f64::NAN;
        }
        self.totals[channel] / self.count as f64
    }

    pub fn stderr(&self, channel: usize) -> f64 {
        self.stderr_of(|b| b[channel])
    }

    /// Standard error of an arbitrary function of the channel vector,
    /// evaluated batch by batch (used for differences and event sums).
    pub fn stderr_of(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        let nb = self.batches.len();
        if nb < 2 {
            return f64::NAN;
        }
        let vals: Vec<f64> = self.batches.iter().map(|b| f(b)).collect();
        let m = vals.iter().sum::<f64>() / nb as f64;
        let var = vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (nb - 1) as f64;
        (var / nb as f64).sqrt()
    }

    pub fn mean_of(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        if self.count == 0 {
            return f64::NAN;
        }
        let n = self.count as f64;
        let means: Vec<f64> = self.totals.iter().map(|t| t / n).collect();
        f(&means)
    }

    pub fn estimate(&self, channel: usize, seed: u64) -> EstimateWithCI {
        EstimateWithCI::new(self.mean(channel), self.stderr(channel), self.count, seed)
    }

    /// Estimate of a linear functional `f` of the channel means.
    pub fn estimate_of(&self, f: impl Fn(&[f64]) -> f64, seed: u64) -> EstimateWithCI {
        EstimateWithCI::new(self.mean_of(&f), self.stderr_of(&f), self.count, seed)
    }

    pub fn batch_count(&self) -> usize {
        self.batches.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Number of cells after pooling sparse cells.
    pub cells: usize,
}

impl ChiSquareTest {
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }
}

/// Pearson goodness-of-fit of `observed` counts against `probs`.
///
/// Cells whose expected count is below `min_expected` are grouped, in order
/// of increasing probability, into cells that reach the floor; a short
/// remainder joins the last group.
pub fn chi_square_gof(observed: &[u64], probs: &[f64], min_expected: f64) -> Result<ChiSquareTest> {
    if observed.len() != probs.len() {
        return Err(Error::Dimension(format!(
            "{} observed cells vs {} probabilities",
            observed.len(),
            probs.len()
        )));
    }
    let n = observed.iter().sum::<u64>() as f64;
    if observed.iter().zip(probs).any(|(&o, &p)| p <= 0.0 && o > 0) {
        // Observed an outcome of probability zero.
        return Ok(ChiSquareTest {
            statistic: f64::INFINITY,
            dof: 1,
            p_value: 0.0,
            cells: probs.len(),
        });
    }
    let mut stat = 0.0;
    let mut cells = 0usize;
    let mut small: Vec<usize> = Vec::new();
    for (i, (&o, &p)) in observed.iter().zip(probs).enumerate() {
        let e = p * n;
        if e >= min_expected {
            stat += (o as f64 - e).powi(2) / e;
            cells += 1;
        } else if p > 0.0 {
            small.push(i);
        }
    }
    // Small cells are grouped in order of probability, which depends only
    // on the null, until each group reaches the expected-count floor.
    small.sort_by(|&a, &b| probs[a].total_cmp(&probs[b]).then(a.cmp(&b)));
    let mut groups: Vec<(f64, f64)> = Vec::new();
    let (mut go, mut ge) = (0.0, 0.0);
    for &i in &small {
        go += observed[i] as f64;
        ge += probs[i] * n;
        if ge >= min_expected {
            groups.push((go, ge));
            go = 0.0;
            ge = 0.0;
        }
    }
    if ge > 0.0 {
        match groups.last_mut() {
            Some(last) => {
                last.0 += go;
                last.1 += ge;
            }
            None => groups.push((go, ge)),
        }
    }
    for (o, e) in groups {
        stat += (o - e).powi(2) / e;
        cells += 1;
    }
    let dof = cells.saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        ChiSquared::new(dof as f64)
            .expect("positive dof")
            .sf(stat)
    };
    Ok(ChiSquareTest {
        statistic: stat,
        dof,
        p_value,
        cells,
    })
}

/// Sparse variant: `observed` maps cell index to count, `probs` is dense.
pub fn chi_square_gof_sparse(
    observed: &std::collections::HashMap<usize, u64>,
    probs: &[f64],
    min_expected: f64,
) -> Result<ChiSquareTest> {
    let mut dense = vec![0u64; probs.len()];
    for (&k, &v) in observed {
        if k >= probs.len() {
            return Err(Error::Dimension(format!("cell {k} outside table")));
        }
        dense[k] = v;
    }
    chi_square_gof(&dense, probs, min_expected)
}

/// Upper tail `P(Z > z)` of the standard normal.
pub fn normal_sf(z: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("standard normal").sf(z)
}

/// One-sided z-test of `mean > 0` given its standard error.
/// Returns `(z, p_value)`; a zero error bar with positive mean gives `p = 0`.
pub fn z_test_positive(mean: f64, se: f64) -> (f64, f64) {
    if se > 0.0 {
        let z = mean / se;
        (z, normal_sf(z))
    } else if mean > 0.0 {
        (f64::INFINITY, 0.0)
    } else {
        (0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Residual-based standard error of the slope.
    pub slope_stderr: f64,
}

/// Ordinary least squares `y = intercept + slope * x`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    let n = xs.len();
    if n != ys.len() || n < 2 {
        return Err(Error::Fit { needed: 2, got: n.min(ys.len()) });
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("all abscissae equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let slope_stderr = if n > 2 {
        (sse / (nf - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
        slope_stderr,
    })
}

/// OLS slope weights: `slope = sum_i w_i * y_i` for fixed abscissae.
pub fn slope_weights(xs: &[f64]) -> Vec<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    xs.iter().map(|x| (x - mx) / sxx).collect()
}

//! The projection of a planar configuration onto the line `Z x {0}` and
//! one-sided conditional probabilities of the projected process.
//!
//! A conditional probability `P(eta_0 = + | past)` is estimated on a box
//! with plus boundary by clamping the line sites `-cond_len, ..., -1` to
//! the past (word plus tail) and sampling the origin. The estimator is the
//! conditional probability of `+` at the origin given its four neighbours,
//! averaged over samples; it has the same mean as the indicator and is
//! monotone in the configuration, so shared-uniform comparisons stay
//! ordered sample by sample.

use crate::error::{Error, Result};
use crate::ising::{
    run_coupled, ExactMeasure, HeatBath, ModelParams, SamplingPlan, TransferOracle,
    ENUMERATION_LIMIT, TRANSFER_LIMIT,
};
use crate::lattice::{PastWindow, Site, Spin, SpinConfig, SquareBox, Tail};
use crate::seed::child_seed;
use crate::stats::{BatchMeans, EstimateWithCI};

/// Spins on the line window `[a, a + len - 1] x {0}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineConfig {
    pub a: i32,
    pub spins: Vec<Spin>,
}

impl LineConfig {
    pub fn b(&self) -> i32 {
        self.a + self.spins.len() as i32 - 1
    }

    pub fn get(&self, x: i32) -> Option<Spin> {
        if x < self.a {
            return None;
        }
        self.spins.get((x - self.a) as usize).copied()
    }

    /// Restriction to a sub-window.
    pub fn restrict(&self, a: i32, b: i32) -> Result<LineConfig> {
        if a > b || a < self.a || b > self.b() {
            return Err(Error::Dimension(format!(
                "[{a}, {b}] is not inside [{}, {}]",
                self.a,
                self.b()
            )));
        }
        let lo = (a - self.a) as usize;
        let hi = (b - self.a) as usize;
        Ok(LineConfig {
            a,
            spins: self.spins[lo..=hi].to_vec(),
        })
    }
}

/// Copy the line spins on `[a, b] x {0}`.
pub fn project(c: &SpinConfig, a: i32, b: i32) -> Result<LineConfig> {
    let g = c.geometry();
    if a > b {
        return Err(Error::Dimension(format!("empty window [{a}, {b}]")));
    }
    if !g.contains(Site::line(a)) || !g.contains(Site::line(b)) {
        return Err(Error::Dimension(format!(
            "window [{a}, {b}] leaves box n={}",
            g.half_width()
        )));
    }
    Ok(LineConfig {
        a,
        spins: (a..=b).map(|x| c.spin(Site::line(x))).collect(),
    })
}

/// Keep the sites `x` with `x mod (k + l)` in `0..l`, indexed by `x`.
pub fn decimate(lc: &LineConfig, l: usize, k: usize) -> Result<Vec<(i32, Spin)>> {
    if l == 0 {
        return Err(Error::InvalidParameter("block length l must be at least 1".into()));
    }
    let period = (k + l) as i32;
    Ok(lc
        .spins
        .iter()
        .enumerate()
        .map(|(i, &v)| (lc.a + i as i32, v))
        .filter(|&(x, _)| x.rem_euclid(period) < l as i32)
        .collect())
}

/// Box with plus ring and the line sites `-cond_len..=-1` clamped to the
/// past.
pub fn conditioned_box(box_n: usize, past: &PastWindow, cond_len: usize) -> Result<SpinConfig> {
    if cond_len > box_n {
        return Err(Error::InvalidParameter(format!(
            "conditioning length {cond_len} exceeds box half-width {box_n}"
        )));
    }
    let mut c = SpinConfig::uniform(SquareBox::new(box_n)?, Spin::Plus, Spin::Plus);
    for (x, v) in past.assignments(cond_len)? {
        c.clamp(Site::line(x), v)?;
    }
    Ok(c)
}

/// `P(+ | neighbours)` at the origin: the smoothed observable.
#[inline]
pub fn origin_plus(c: &SpinConfig, kernel: &HeatBath) -> f64 {
    let s: i32 = Site::ORIGIN
        .neighbors()
        .iter()
        .map(|&t| c.spin(t).value() as i32)
        .sum();
    kernel.plus_probability(s)
}

/// Estimate of `P(eta_0 = + | past)`; the `-` probability is the complement.
#[derive(Debug, Clone, PartialEq)]
pub struct GEstimate {
    pub value: EstimateWithCI,
    pub past: PastWindow,
    pub box_n: usize,
    pub cond_len: usize,
    /// True when every sample was an exact (coalesced) draw.
    pub coalesced: bool,
}

impl GEstimate {
    pub fn p_plus(&self) -> f64 {
        self.value.value
    }

    pub fn p_minus(&self) -> EstimateWithCI {
        self.value.complement()
    }
}

fn merged(accs: Vec<BatchMeans>) -> BatchMeans {
    let mut it = accs.into_iter();
    let mut m = it.next().expect("one replica");
    for a in it {
        m.merge(a);
    }
    m
}

pub fn estimate_g(
    past: &PastWindow,
    params: &ModelParams,
    box_n: usize,
    cond_len: usize,
    plan: &SamplingPlan,
    seed: u64,
) -> Result<GEstimate> {
    let t = conditioned_box(box_n, past, cond_len)?;
    let kernel = HeatBath::new(params);
    let (accs, _) = run_coupled(
        std::slice::from_ref(&t),
        params,
        plan,
        seed,
        || BatchMeans::new(1, plan.batch_size()),
        |b, cs| b.push1(origin_plus(&cs[0], &kernel)),
    )?;
    let bm = merged(accs);
    Ok(GEstimate {
        value: bm.estimate(0, seed),
        past: past.clone(),
        box_n,
        cond_len,
        coalesced: plan.is_exact(),
    })
}

/// Plus-tail and minus-tail estimates for one word under shared uniforms.
#[derive(Debug, Clone, PartialEq)]
pub struct GapEstimate {
    pub word: Vec<Spin>,
    pub plus_tail: GEstimate,
    pub minus_tail: GEstimate,
    /// `P(+ | plus tail) - P(+ | minus tail)`, error bar from paired batches.
    pub gap: EstimateWithCI,
    /// Samples in which the minus-tail value exceeded the plus-tail value.
    pub violations: u64,
}

/// Plus/minus tail estimates for many words, all chains driven by one
/// stream of uniforms. Since the uniforms do not depend on which words are
/// run together, results for a word are the same in any batch of words.
pub fn estimate_gaps(
    words: &[Vec<Spin>],
    params: &ModelParams,
    box_n: usize,
    cond_len: usize,
    plan: &SamplingPlan,
    seed: u64,
) -> Result<Vec<GapEstimate>> {
    if words.is_empty() {
        return Ok(Vec::new());
    }
    let mut templates = Vec::with_capacity(2 * words.len());
    for w in words {
        for tail in [Tail::AllPlus, Tail::AllMinus] {
            templates.push(conditioned_box(box_n, &PastWindow::new(w.clone(), tail), cond_len)?);
        }
    }
    let kernel = HeatBath::new(params);
    let nw = words.len();
    let (accs, _) = run_coupled(
        &templates,
        params,
        plan,
        seed,
        || (BatchMeans::new(2 * nw, plan.batch_size()), vec![0u64; nw], vec![0.0; 2 * nw]),
        |(b, viol, buf), cs| {
            for i in 0..nw {
                let p = origin_plus(&cs[2 * i], &kernel);
                let m = origin_plus(&cs[2 * i + 1], &kernel);
                if m > p {
                    viol[i] += 1;
                }
                buf[2 * i] = p;
                buf[2 * i + 1] = m;
            }
            b.push(buf);
        },
    )?;
    let mut viol = vec![0u64; nw];
    let mut bms = Vec::with_capacity(accs.len());
    for (b, v, _) in accs {
        viol.iter_mut().zip(&v).for_each(|(a, x)| *a += x);
        bms.push(b);
    }
    let bm = merged(bms);
    Ok(words
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let mk = |ch: usize, tail: Tail| GEstimate {
                value: bm.estimate(ch, seed),
                past: PastWindow::new(w.clone(), tail),
                box_n,
                cond_len,
                coalesced: plan.is_exact(),
            };
            GapEstimate {
                word: w.clone(),
                plus_tail: mk(2 * i, Tail::AllPlus),
                minus_tail: mk(2 * i + 1, Tail::AllMinus),
                gap: bm.estimate_of(|m| m[2 * i] - m[2 * i + 1], seed),
                violations: viol[i],
            }
        })
        .collect())
}

/// All `2^k` words of length `k`, word `i` having bit `j` of `i` (plus if
/// set) at position `-k + j`.
pub fn all_words(k: usize) -> Result<Vec<Vec<Spin>>> {
    if k > 20 {
        return Err(Error::Capacity {
            what: "exhaustive word length",
            count: k,
            limit: 20,
        });
    }
    Ok((0..1usize << k)
        .map(|i| (0..k).map(|j| Spin::from_bool(i >> j & 1 == 1)).collect())
        .collect())
}

/// Words `eta_{-len} ... eta_{-1}` read from a plus-boundary chain on box
/// `box_n`, one every `thin` sweeps after `burn_in` sweeps.
pub fn sample_plus_words(
    params: &ModelParams,
    len: usize,
    count: usize,
    box_n: usize,
    burn_in: u64,
    thin: u64,
    seed: u64,
) -> Result<Vec<Vec<Spin>>> {
    if len > box_n {
        return Err(Error::InvalidParameter(format!(
            "word length {len} exceeds box half-width {box_n}"
        )));
    }
    let plan = SamplingPlan::chain(count, burn_in).with_thin(thin).with_batches(2);
    let t = SpinConfig::uniform(SquareBox::new(box_n)?, Spin::Plus, Spin::Plus);
    let (accs, _) = run_coupled(
        std::slice::from_ref(&t),
        params,
        &plan,
        seed,
        Vec::new,
        |v: &mut Vec<Vec<Spin>>, cs| {
            v.push((-(len as i32)..=-1).map(|x| cs[0].spin(Site::line(x))).collect());
        },
    )?;
    Ok(accs.into_iter().flatten().collect())
}

/// Where the words for a variation estimate come from.
#[derive(Debug, Clone, PartialEq)]
pub enum WordSource {
    /// Every word when `k <= 10`; otherwise `sample_count` words drawn from
    /// the plus-phase projection.
    Auto { sample_count: usize, box_n: usize },
    Given(Vec<Vec<Spin>>),
}

/// Largest examined `gap(word)` for words of length `k`: a lower bound on
/// `var_k` restricted to the box.
#[derive(Debug, Clone, PartialEq)]
pub struct VarkEstimate {
    pub k: usize,
    pub lower_bound: EstimateWithCI,
    pub argmax: Vec<Spin>,
    pub words_examined: usize,
    pub violations: u64,
}

pub fn estimate_vark(
    params: &ModelParams,
    k: usize,
    words: &WordSource,
    box_n: usize,
    cond_len: usize,
    plan: &SamplingPlan,
    seed: u64,
) -> Result<VarkEstimate> {
    if k >= cond_len {
        return Err(Error::InvalidParameter(format!(
            "word length {k} leaves no tail inside conditioning length {cond_len}"
        )));
    }
    let list = match words {
        WordSource::Given(v) => {
            if v.iter().any(|w| w.len() != k) {
                return Err(Error::InvalidParameter(format!("words must have length {k}")));
            }
            v.clone()
        }
        WordSource::Auto { sample_count, box_n: wb } => {
            if k <= 10 {
                all_words(k)?
            } else {
                let mut v = sample_plus_words(params, k, *sample_count, *wb, 1000, 10, child_seed(seed, 1))?;
                v.sort();
                v.dedup();
                v
            }
        }
    };
    let gaps = estimate_gaps(&list, params, box_n, cond_len, plan, seed)?;
    let best = gaps
        .iter()
        .max_by(|a, b| a.gap.value.total_cmp(&b.gap.value))
        .ok_or_else(|| Error::InvalidParameter("no words".into()))?;
    Ok(VarkEstimate {
        k,
        lower_bound: best.gap,
        argmax: best.word.clone(),
        words_examined: gaps.len(),
        violations: gaps.iter().map(|g| g.violations).sum(),
    })
}

/// Average gap over pasts drawn from the plus-phase projection.
#[derive(Debug, Clone, PartialEq)]
pub struct GapAverage {
    pub n: usize,
    pub l: usize,
    pub mean: f64,
    /// Standard error from the spread between words plus within-word noise.
    pub stderr: f64,
    pub gaps: Vec<GapEstimate>,
}

/// Mean of `P(+ | w, plus tail) - P(+ | w, minus tail)` over `words` words
/// of length `n` sampled from the plus phase, with tails of length `l` and
/// box half-width `n + l`.
pub fn average_gap(
    params: &ModelParams,
    n: usize,
    l: usize,
    words: usize,
    plan: &SamplingPlan,
    seed: u64,
) -> Result<GapAverage> {
    let box_n = n + l;
    let list = sample_plus_words(params, n, words, box_n, 500, 20, child_seed(seed, 0))?;
    let gaps = estimate_gaps(&list, params, box_n, n + l, plan, child_seed(seed, 1))?;
    let m = gaps.len() as f64;
    let mean = gaps.iter().map(|g| g.gap.value).sum::<f64>() / m;
    let between = if gaps.len() > 1 {
        gaps.iter().map(|g| (g.gap.value - mean).powi(2)).sum::<f64>() / (m - 1.0) / m
    } else {
        0.0
    };
    let within = gaps.iter().map(|g| g.gap.stderr.powi(2)).sum::<f64>() / (m * m);
    Ok(GapAverage {
        n,
        l,
        mean,
        stderr: (between + within).sqrt(),
        gaps,
    })
}

/// Exact probabilities on small volumes, by enumeration when the free sites
/// fit, else by transfer matrix.
#[derive(Debug, Clone)]
pub enum LineOracle {
    Enumeration(ExactMeasure),
    Transfer(TransferOracle),
}

impl LineOracle {
    pub fn new(template: &SpinConfig, params: &ModelParams) -> Result<Self> {
        if template.free_count() <= ENUMERATION_LIMIT {
            Ok(LineOracle::Enumeration(ExactMeasure::new(template, params)?))
        } else if template.geometry().half_width() <= TRANSFER_LIMIT {
            Ok(LineOracle::Transfer(TransferOracle::new(template, params)?))
        } else {
            Err(Error::Capacity {
                what: "exact oracle free sites",
                count: template.free_count(),
                limit: ENUMERATION_LIMIT,
            })
        }
    }

    pub fn cylinder(&self, assignment: &[(Site, Spin)]) -> f64 {
        match self {
            LineOracle::Enumeration(m) => m.cylinder(assignment),
            LineOracle::Transfer(t) => t.cylinder(assignment),
        }
    }

    /// Probability of a line cylinder `{eta_x = v for (x, v) in event}`.
    pub fn line_cylinder(&self, event: &[(i32, Spin)]) -> f64 {
        let a: Vec<(Site, Spin)> = event.iter().map(|&(x, v)| (Site::line(x), v)).collect();
        self.cylinder(&a)
    }
}

/// Exact probability of a line cylinder event under the measure of
/// `template`.
pub fn line_cylinder_oracle(
    template: &SpinConfig,
    params: &ModelParams,
    event: &[(i32, Spin)],
) -> Result<f64> {
    Ok(LineOracle::new(template, params)?.line_cylinder(event))
}

/// Exact `P(eta_0 = + | past)` on the conditioned box.
pub fn exact_g(
    past: &PastWindow,
    params: &ModelParams,
    box_n: usize,
    cond_len: usize,
) -> Result<f64> {
    let t = conditioned_box(box_n, past, cond_len)?;
    line_cylinder_oracle(&t, params, &[(0, Spin::Plus)])
}

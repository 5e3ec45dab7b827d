//! Run probabilities and their exponential rates, domination thresholds,
//! mixing coefficients under extremal pasts, and the one-sided versus
//! two-sided conditioning contrast.

use log::warn;

use crate::error::{Error, Result};
use crate::ising::{run_coupled, HeatBath, ModelParams, SamplingPlan, BETA_C};
use crate::line::LineOracle;
use crate::lattice::{region_sites, Region, Site, Spin, SpinConfig, SquareBox};
use crate::seed::child_seed;
use crate::stats::{
    linear_fit, normal_sf, pooled_se, slope_weights, BatchMeans, EstimateWithCI, Z95,
};

fn merged(accs: Vec<BatchMeans>) -> BatchMeans {
    let mut it = accs.into_iter();
    let mut m = it.next().expect("one replica");
    for a in it {
        m.merge(a);
    }
    m
}

/// `P(spin at s = v | neighbours)`: the smoothed indicator of `{s = v}`.
#[inline]
fn site_prob(c: &SpinConfig, s: Site, v: Spin, kernel: &HeatBath) -> f64 {
    let sum: i32 = s.neighbors().iter().map(|&t| c.spin(t).value() as i32).sum();
    let p = kernel.plus_probability(sum);
    if v == Spin::Plus {
        p
    } else {
        1.0 - p
    }
}

/// `nu(eta = sign on [-n, -1])` as a product of conditional factors.
#[derive(Debug, Clone, PartialEq)]
pub struct RunProbability {
    pub sign: Spin,
    pub boundary: Spin,
    pub box_n: usize,
    /// Factor `k` (from 1) is `P(eta_{-k} = sign | eta = sign on [-(k-1), -1])`.
    pub factors: Vec<EstimateWithCI>,
    /// Factors whose estimate was zero and got floored at `1/(samples+1)`.
    pub floored: Vec<bool>,
    pub probability: EstimateWithCI,
}

impl RunProbability {
    pub fn n(&self) -> usize {
        self.factors.len()
    }

    /// `(log nu(run of length m), delta-method standard error)`.
    pub fn cumulative_log(&self, m: usize) -> (f64, f64) {
        let mut lp = 0.0;
        let mut var = 0.0;
        for f in &self.factors[..m] {
            lp += f.value.ln();
            var += (f.stderr / f.value).powi(2);
        }
        (lp, var.sqrt())
    }

    pub fn log_prob(&self) -> f64 {
        self.cumulative_log(self.n()).0
    }
}

/// Telescoping estimate of the probability of a run of `sign` on
/// `[-n, -1] x {0}` under the measure with uniform `boundary`.
///
/// Factor `k` is sampled on its own stream `child_seed(seed, k)`, so the
/// factors are independent and the delta-method error adds up.
pub fn estimate_run_probability(
    params: &ModelParams,
    sign: Spin,
    n: usize,
    box_n: usize,
    boundary: Spin,
    plan: &SamplingPlan,
    seed: u64,
) -> Result<RunProbability> {
    if n == 0 {
        return Err(Error::InvalidParameter("run length must be at least 1".into()));
    }
    if box_n < 2 * n {
        return Err(Error::Precondition(format!(
            "box half-width {box_n} must be at least twice the run length {n}"
        )));
    }
    let geom = SquareBox::new(box_n)?;
    let kernel = HeatBath::new(params);
    let mut factors = Vec::with_capacity(n);
    let mut floored = Vec::with_capacity(n);
    for k in 1..=n {
        let mut t = SpinConfig::uniform(geom, boundary, boundary);
        for x in 1..k {
            t.clamp(Site::line(-(x as i32)), sign)?;
        }
        let target = Site::line(-(k as i32));
        let fseed = child_seed(seed, k as u64);
        let (accs, _) = run_coupled(
            std::slice::from_ref(&t),
            params,
            plan,
            fseed,
            || BatchMeans::new(1, plan.batch_size()),
            |b, cs| b.push1(site_prob(&cs[0], target, sign, &kernel)),
        )?;
        let bm = merged(accs);
        let mut e = bm.estimate(0, fseed);
        let zero = (e.value.is_nan() || e.value <= 0.0) && e.samples > 0;
        if zero {
            warn!("run factor {k} estimated as zero; flooring at 1/(samples+1)");
            e = EstimateWithCI::new(1.0 / (e.samples as f64 + 1.0), e.stderr, e.samples, fseed);
        }
        floored.push(zero);
        factors.push(e);
    }
    let mut out = RunProbability {
        sign,
        boundary,
        box_n,
        factors,
        floored,
        probability: EstimateWithCI::exact(0.0, seed),
    };
    let (lp, lse) = out.cumulative_log(n);
    let p = lp.exp();
    let samples = out.factors.iter().map(|f| f.samples).min().unwrap_or(0);
    out.probability = EstimateWithCI::new(p, p * lse, samples, seed);
    Ok(out)
}

/// Exponential rate fitted to `-log nu(n)` against `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateEstimate {
    pub theta: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: Vec<(f64, f64)>,
    pub residuals: Vec<f64>,
}

/// Least-squares rate `theta = -slope` of `(n, log nu(n))` points.
pub fn fit_theta(points: &[(f64, f64)]) -> Result<RateEstimate> {
    if points.len() < 4 {
        return Err(Error::Fit {
            needed: 4,
            got: points.len(),
        });
    }
    if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return Err(Error::InvalidParameter("log-probabilities must be finite".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let fit = linear_fit(&xs, &ys)?;
    let residuals = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| y - (fit.intercept + fit.slope * x))
        .collect();
    Ok(RateEstimate {
        theta: -fit.slope,
        stderr: fit.slope_stderr,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        points: points.to_vec(),
        residuals,
    })
}

/// Rate fitted over run lengths `n_min..=run.n()`, with the error bar
/// propagated from the factor errors (the cumulative points share factors,
/// so the regression residual alone would understate it).
pub fn theta_from_run(run: &RunProbability, n_min: usize) -> Result<RateEstimate> {
    let ns: Vec<usize> = (n_min.max(1)..=run.n()).collect();
    let points: Vec<(f64, f64)> = ns
        .iter()
        .map(|&m| (m as f64, run.cumulative_log(m).0))
        .collect();
    let mut est = fit_theta(&points)?;
    let xs: Vec<f64> = ns.iter().map(|&m| m as f64).collect();
    let w = slope_weights(&xs);
    let mut var = 0.0;
    for (k, f) in run.factors.iter().enumerate() {
        let k1 = k + 1;
        let c: f64 = ns
            .iter()
            .zip(&w)
            .filter(|(&m, _)| m >= k1)
            .map(|(_, wi)| wi)
            .sum();
        var += (c * f.stderr / f.value).powi(2);
    }
    est.stderr = var.sqrt();
    Ok(est)
}

/// Largest Bernoulli density dominated by a process with run rate `theta`.
pub fn rho_max(theta: f64) -> Result<f64> {
    if theta.is_nan() || theta < 0.0 {
        return Err(Error::InvalidParameter(format!("rate {theta} must be non-negative")));
    }
    Ok(-(-theta).exp_m1())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomiReport {
    pub beta: f64,
    /// Rate of minus runs under the plus phase.
    pub theta_plus: RateEstimate,
    /// Rate of plus runs under the plus phase.
    pub theta_minus: RateEstimate,
    /// Minus runs, which define `theta_plus`.
    pub runs_plus: RunProbability,
    /// Plus runs, which define `theta_minus`.
    pub runs_minus: RunProbability,
    /// `(theta_plus - theta_minus) / pooled stderr`.
    pub z: f64,
    /// One-sided p-value against `theta_minus >= theta_plus`.
    pub p_value: f64,
    pub rho_max_plus: f64,
    pub rho_max_minus: f64,
    /// Midpoint of `(rho_max_minus, rho_max_plus)` when that interval is
    /// non-empty.
    pub rho_witness: Option<f64>,
}

impl DomiReport {
    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// Compare the rates of minus runs and plus runs under the plus phase on
/// box `box_n`, run lengths `1..=n_max`, fit over `2..=n_max`.
pub fn check_prop_domi(
    params: &ModelParams,
    n_max: usize,
    box_n: usize,
    plan: &SamplingPlan,
    seed: u64,
) -> Result<DomiReport> {
    if params.beta <= BETA_C {
        return Err(Error::Precondition(format!(
            "beta = {} is not above the critical value {BETA_C}",
            params.beta
        )));
    }
    if n_max < 5 {
        return Err(Error::Fit { needed: 4, got: n_max.saturating_sub(1) });
    }
    let runs_plus =
        estimate_run_probability(params, Spin::Minus, n_max, box_n, Spin::Plus, plan, child_seed(seed, 0))?;
    let runs_minus =
        estimate_run_probability(params, Spin::Plus, n_max, box_n, Spin::Plus, plan, child_seed(seed, 1))?;
    let theta_plus = theta_from_run(&runs_plus, 2)?;
    let theta_minus = theta_from_run(&runs_minus, 2)?;
    let z = (theta_plus.theta - theta_minus.theta) / pooled_se(theta_plus.stderr, theta_minus.stderr);
    let rp = rho_max(theta_plus.theta.max(0.0))?;
    let rm = rho_max(theta_minus.theta.max(0.0))?;
    Ok(DomiReport {
        beta: params.beta,
        p_value: normal_sf(z),
        z,
        rho_max_plus: rp,
        rho_max_minus: rm,
        rho_witness: (rm < rp).then_some(0.5 * (rm + rp)),
        theta_plus,
        theta_minus,
        runs_plus,
        runs_minus,
    })
}

/// Number of up-sets of `{0,1}^w` (Dedekind numbers) is small for `w <= 4`.
pub const MAX_EVENT_WINDOW: usize = 4;

/// All increasing events on a window of `w` sites, each as a bitmask over
/// the `2^w` window states (state bit `j` set when site `j` is plus). The
/// empty and full events are included.
pub fn increasing_events(w: usize) -> Result<Vec<u32>> {
    if w == 0 || w > MAX_EVENT_WINDOW {
        return Err(Error::Capacity {
            what: "window width for exhaustive increasing events",
            count: w,
            limit: MAX_EVENT_WINDOW,
        });
    }
    let states = 1usize << w;
    let mut out = Vec::new();
    'sets: for mask in 0u64..(1u64 << states) {
        for s in 0..states {
            if mask >> s & 1 == 0 {
                continue;
            }
            for j in 0..w {
                let t = s | 1 << j;
                if mask >> t & 1 == 0 {
                    continue 'sets;
                }
            }
        }
        out.push(mask as u32);
    }
    Ok(out)
}

/// [`increasing_events`] without the empty and the full event, whose
/// coefficient is identically zero.
fn nontrivial_events(w: usize) -> Result<Vec<u32>> {
    let full = (1u64 << (1usize << w)) - 1;
    Ok(increasing_events(w)?
        .into_iter()
        .filter(|&m| m != 0 && u64::from(m) != full)
        .collect())
}

/// A family of increasing events evaluated on a pair of configurations.
#[derive(Debug, Clone)]
struct EventBank {
    /// Window sites for the exhaustive family.
    window: Vec<Site>,
    upsets: Vec<u32>,
    /// Extra 2D sites (cone): single-site, all-plus and count events.
    sites: Vec<Site>,
}

impl EventBank {
    fn channels(&self) -> usize {
        let extra = if self.sites.is_empty() {
            0
        } else {
            2 * self.sites.len() + 1
        };
        self.upsets.len() + extra + 1
    }

    fn label(&self, ch: usize) -> String {
        let u = self.upsets.len();
        let m = self.sites.len();
        if ch < u {
            format!("window-upset:{:#x}", self.upsets[ch])
        } else if ch < u + m {
            let s = self.sites[ch - u];
            format!("site:{},{}", s.x, s.y)
        } else if ch == u + m {
            "all-plus".to_string()
        } else if ch < u + 2 * m + 1 {
            format!("count>={}", ch - u - m)
        } else {
            "disagreement".to_string()
        }
    }

    fn state(c: &SpinConfig, window: &[Site]) -> usize {
        window
            .iter()
            .enumerate()
            .fold(0, |a, (j, &s)| a | (usize::from(c.spin(s) == Spin::Plus) << j))
    }

    /// Writes `1_B(hi) - 1_B(lo)` per event, then the disagreement flag.
    fn eval(&self, lo: &SpinConfig, hi: &SpinConfig, out: &mut [f64]) {
        let sl = Self::state(lo, &self.window);
        let sh = Self::state(hi, &self.window);
        let mut k = 0;
        for &m in &self.upsets {
            out[k] = f64::from((m >> sh) & 1) - f64::from((m >> sl) & 1);
            k += 1;
        }
        let mut differ = sl != sh;
        if !self.sites.is_empty() {
            let m = self.sites.len();
            let mut cl = 0usize;
            let mut ch = 0usize;
            for (i, &s) in self.sites.iter().enumerate() {
                let a = lo.spin(s) == Spin::Plus;
                let b = hi.spin(s) == Spin::Plus;
                cl += usize::from(a);
                ch += usize::from(b);
                differ |= a != b;
                out[k + i] = f64::from(u8::from(b)) - f64::from(u8::from(a));
            }
            k += m;
            out[k] = f64::from(u8::from(ch == m)) - f64::from(u8::from(cl == m));
            k += 1;
            for t in 1..=m {
                out[k] = f64::from(u8::from(ch >= t)) - f64::from(u8::from(cl >= t));
                k += 1;
            }
        }
        out[k] = f64::from(u8::from(differ));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixingPoint {
    pub gap: usize,
    /// Largest `nu(B | plus past) - nu(B | minus past)` over the class.
    pub coefficient: EstimateWithCI,
    pub event: String,
    /// `P(the coupled pair differs on the event sites)`: an upper bound for
    /// every event on those sites, monotone or not.
    pub disagreement: EstimateWithCI,
    pub events: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixingCurve {
    /// `line` or `cone`.
    pub region: &'static str,
    pub theta_cone: Option<f64>,
    pub w: usize,
    pub box_n: usize,
    /// Past clamped on `[-past_len, -1]`.
    pub past_len: usize,
    pub points: Vec<MixingPoint>,
}

impl MixingCurve {
    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.coefficient.value).collect()
    }
}

fn extremal_pasts(box_n: usize) -> Result<[SpinConfig; 2]> {
    let g = SquareBox::new(box_n)?;
    let mut lo = SpinConfig::uniform(g, Spin::Plus, Spin::Plus);
    let mut hi = lo.clone();
    for x in 1..=box_n as i32 {
        lo.clamp(Site::line(-x), Spin::Minus)?;
        hi.clamp(Site::line(-x), Spin::Plus)?;
    }
    Ok([lo, hi])
}

fn run_banks(
    banks: &[Option<EventBank>],
    params: &ModelParams,
    box_n: usize,
    plan: &SamplingPlan,
    seed: u64,
) -> Result<Vec<Option<(BatchMeans, usize)>>> {
    let templates = extremal_pasts(box_n)?;
    let offsets: Vec<usize> = banks
        .iter()
        .scan(0usize, |acc, b| {
            let o = *acc;
            *acc += b.as_ref().map(|b| b.channels()).unwrap_or(0);
            Some(o)
        })
        .collect();
    let total: usize = banks.iter().flatten().map(|b| b.channels()).sum();
    if total == 0 {
        return Ok(banks.iter().map(|_| None).collect());
    }
    let (accs, _) = run_coupled(
        &templates,
        params,
        plan,
        seed,
        || (BatchMeans::new(total, plan.batch_size()), vec![0.0; total]),
        |(bm, buf), cs| {
            for (b, &o) in banks.iter().zip(&offsets) {
                if let Some(b) = b {
                    b.eval(&cs[0], &cs[1], &mut buf[o..o + b.channels()]);
                }
            }
            bm.push(buf);
        },
    )?;
    let bm = merged(accs.into_iter().map(|a| a.0).collect());
    Ok(banks
        .iter()
        .zip(&offsets)
        .map(|(b, &o)| b.as_ref().map(|_| (bm.clone(), o)))
        .collect())
}

fn curve_points(
    banks: &[Option<EventBank>],
    gaps: &[usize],
    results: Vec<Option<(BatchMeans, usize)>>,
    seed: u64,
) -> Vec<MixingPoint> {
    gaps.iter()
        .zip(banks)
        .zip(results)
        .map(|((&gap, bank), res)| match (bank, res) {
            (Some(bank), Some((bm, o))) => {
                let nc = bank.channels();
                let mut best = (f64::NEG_INFINITY, 0usize);
                for ch in 0..nc - 1 {
                    let v = bm.mean(o + ch);
                    if v > best.0 {
                        best = (v, ch);
                    }
                }
                MixingPoint {
                    gap,
                    coefficient: bm.estimate(o + best.1, seed),
                    event: bank.label(best.1),
                    disagreement: bm.estimate(o + nc - 1, seed),
                    events: nc - 1,
                }
            }
            _ => MixingPoint {
                gap,
                coefficient: EstimateWithCI::exact(0.0, seed),
                event: "none".to_string(),
                disagreement: EstimateWithCI::exact(0.0, seed),
                events: 0,
            },
        })
        .collect()
}

/// Largest difference between the plus-past and minus-past probabilities
/// of an increasing event on the line window `[gap, gap + w - 1]`. The
/// pasts are clamped on `[-box_n, -1]`; windows leaving the box get 0.
pub fn estimate_phi_mixing(
    params: &ModelParams,
    gaps: &[usize],
    w: usize,
    box_n: usize,
    plan: &SamplingPlan,
    seed: u64,
) -> Result<MixingCurve> {
    let upsets = nontrivial_events(w)?;
    let banks: Vec<Option<EventBank>> = gaps
        .iter()
        .map(|&g| {
            (g + w - 1 <= box_n).then(|| EventBank {
                window: (g..g + w).map(|x| Site::line(x as i32)).collect(),
                upsets: upsets.clone(),
                sites: Vec::new(),
            })
        })
        .collect();
    let res = run_banks(&banks, params, box_n, plan, seed)?;
    Ok(MixingCurve {
        region: "line",
        theta_cone: None,
        w,
        box_n,
        past_len: box_n,
        points: curve_points(&banks, gaps, res, seed),
    })
}

/// As [`estimate_phi_mixing`], for increasing events on the cone
/// `{x >= gap, |y| <= e^(theta x)}` inside the box: the exhaustive family on
/// the first `w` line sites of the cone, every single-site event, the
/// all-plus event and every plus-count threshold.
pub fn estimate_cone_mixing(
    params: &ModelParams,
    theta: f64,
    gaps: &[usize],
    w: usize,
    box_n: usize,
    plan: &SamplingPlan,
    seed: u64,
) -> Result<MixingCurve> {
    let geom = SquareBox::new(box_n)?;
    let upsets = nontrivial_events(w)?;
    let mut banks = Vec::with_capacity(gaps.len());
    for &g in gaps {
        let sites = region_sites(
            &Region::Cone {
                theta,
                offset: g as i32,
            },
            &geom,
        )?;
        if sites.is_empty() {
            banks.push(None);
            continue;
        }
        let ww = w.min(box_n + 1 - g);
        banks.push(Some(EventBank {
            window: (g..g + ww).map(|x| Site::line(x as i32)).collect(),
            upsets: if ww == w { upsets.clone() } else { nontrivial_events(ww)? },
            sites,
        }));
    }
    if banks.iter().all(|b| b.is_none()) {
        return Err(Error::EmptyRegion);
    }
    let res = run_banks(&banks, params, box_n, plan, seed)?;
    Ok(MixingCurve {
        region: "cone",
        theta_cone: Some(theta),
        w,
        box_n,
        past_len: box_n,
        points: curve_points(&banks, gaps, res, seed),
    })
}

/// Checks that a curve decreases: every step rises by at most
/// `2 * pooled stderr`, and the last value is below the first by more than
/// `3 * pooled stderr`. Returns `(holds, margin in pooled stderr units)`.
pub fn curve_decreasing(points: &[MixingPoint]) -> (bool, f64) {
    if points.len() < 2 {
        return (false, 0.0);
    }
    let steps_ok = points.windows(2).all(|w| {
        let (a, b) = (&w[0].coefficient, &w[1].coefficient);
        b.value <= a.value + 2.0 * pooled_se(a.stderr, b.stderr)
    });
    let (f, l) = (&points[0].coefficient, &points[points.len() - 1].coefficient);
    let se = pooled_se(f.stderr, l.stderr);
    let margin = if se > 0.0 {
        (f.value - l.value) / se
    } else if f.value > l.value {
        f64::INFINITY
    } else {
        0.0
    };
    (steps_ok && margin > 3.0, margin)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoSidedRow {
    pub big_n: usize,
    pub one_sided: EstimateWithCI,
    pub two_sided: EstimateWithCI,
}

/// Paired decrease between consecutive ladder rungs.
#[derive(Debug, Clone, PartialEq)]
pub struct TrendStep {
    pub from: usize,
    pub to: usize,
    pub decrease: EstimateWithCI,
    pub z: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoSidedReport {
    pub beta: f64,
    pub n: usize,
    pub box_n: usize,
    pub unconditioned: EstimateWithCI,
    pub rows: Vec<TwoSidedRow>,
    pub two_sided_steps: Vec<TrendStep>,
    pub one_sided_steps: Vec<TrendStep>,
    /// Every paired two-sided step rejects "no decrease" at 0.05.
    pub two_sided_decreasing: bool,
    /// First and last one-sided values agree within the 95% interval of
    /// their difference (unpaired errors).
    pub one_sided_stable: bool,
}

/// Minus collars on the line at `x in [-N, -(n+1)]` (one-sided) and also
/// `[n+1, N]` (two-sided); the origin magnetisation under each, for every
/// `N` of the ladder, on one shared stream of uniforms.
pub fn two_sided_probe(
    params: &ModelParams,
    n: usize,
    ladder: &[usize],
    box_n: usize,
    plan: &SamplingPlan,
    seed: u64,
) -> Result<TwoSidedReport> {
    if params.beta <= BETA_C {
        return Err(Error::Precondition(format!(
            "beta = {} is not above the critical value {BETA_C}",
            params.beta
        )));
    }
    if n == 0 || ladder.is_empty() {
        return Err(Error::InvalidParameter("need n >= 1 and a non-empty ladder".into()));
    }
    if let Some(&bad) = ladder.iter().find(|&&big| big < n || big > box_n) {
        return Err(Error::Dimension(format!(
            "collar end {bad} must lie in [{n}, {box_n}]"
        )));
    }
    let g = SquareBox::new(box_n)?;
    let base = SpinConfig::uniform(g, Spin::Plus, Spin::Plus);
    let mut templates = vec![base.clone()];
    for &big in ladder {
        let mut one = base.clone();
        let mut two = base.clone();
        for x in (n + 1)..=big {
            let x = x as i32;
            one.clamp(Site::line(-x), Spin::Minus)?;
            two.clamp(Site::line(-x), Spin::Minus)?;
            two.clamp(Site::line(x), Spin::Minus)?;
        }
        templates.push(one);
        templates.push(two);
    }
    let kernel = HeatBath::new(params);
    let nt = templates.len();
    let (accs, _) = run_coupled(
        &templates,
        params,
        plan,
        seed,
        || (BatchMeans::new(nt, plan.batch_size()), vec![0.0; nt]),
        |(bm, buf), cs| {
            for (v, c) in buf.iter_mut().zip(cs) {
                *v = 2.0 * site_prob(c, Site::ORIGIN, Spin::Plus, &kernel) - 1.0;
            }
            bm.push(buf);
        },
    )?;
    let bm = merged(accs.into_iter().map(|a| a.0).collect());
    let rows: Vec<TwoSidedRow> = ladder
        .iter()
        .enumerate()
        .map(|(i, &big)| TwoSidedRow {
            big_n: big,
            one_sided: bm.estimate(1 + 2 * i, seed),
            two_sided: bm.estimate(2 + 2 * i, seed),
        })
        .collect();
    let steps = |offset: usize| -> Vec<TrendStep> {
        (0..ladder.len().saturating_sub(1))
            .map(|i| {
                let (a, b) = (offset + 2 * i, offset + 2 * (i + 1));
                let d = bm.estimate_of(|m| m[a] - m[b], seed);
                let z = if d.stderr > 0.0 {
                    d.value / d.stderr
                } else if d.value > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                };
                TrendStep {
                    from: ladder[i],
                    to: ladder[i + 1],
                    decrease: d,
                    z,
                    p_value: normal_sf(z),
                }
            })
            .collect()
    };
    let two_sided_steps = steps(2);
    let one_sided_steps = steps(1);
    let first = rows[0].one_sided;
    let last = rows[rows.len() - 1].one_sided;
    Ok(TwoSidedReport {
        beta: params.beta,
        n,
        box_n,
        unconditioned: bm.estimate(0, seed),
        two_sided_decreasing: !two_sided_steps.is_empty()
            && two_sided_steps.iter().all(|s| s.p_value < 0.05),
        one_sided_stable: (first.value - last.value).abs()
            <= Z95 * pooled_se(first.stderr, last.stderr),
        rows,
        two_sided_steps,
        one_sided_steps,
    })
}

/// Exact counterpart of one point of [`estimate_phi_mixing`] on a box small
/// enough for [`LineOracle`]: `(coefficient, maximising event mask)`.
pub fn exact_phi_coefficient(
    params: &ModelParams,
    gap: usize,
    w: usize,
    box_n: usize,
) -> Result<(f64, u32)> {
    if gap + w - 1 > box_n {
        return Ok((0.0, 0));
    }
    let [lo, hi] = extremal_pasts(box_n)?;
    let (lo, hi) = (LineOracle::new(&lo, params)?, LineOracle::new(&hi, params)?);
    let states = 1usize << w;
    let cyl = |o: &LineOracle, st: usize| {
        let ev: Vec<(i32, Spin)> = (0..w)
            .map(|j| ((gap + j) as i32, Spin::from_bool(st >> j & 1 == 1)))
            .collect();
        o.line_cylinder(&ev)
    };
    let diff: Vec<f64> = (0..states).map(|st| cyl(&hi, st) - cyl(&lo, st)).collect();
    let mut best = (f64::NEG_INFINITY, 0u32);
    for m in nontrivial_events(w)? {
        let v: f64 = (0..states).filter(|st| m >> st & 1 == 1).map(|st| diff[st]).sum();
        if v > best.0 {
            best = (v, m);
        }
    }
    Ok(best)
}

/// Exact origin magnetisation under the one-sided (`two_sided = false`) or
/// two-sided minus collar of [`two_sided_probe`].
pub fn exact_collar_magnetization(
    params: &ModelParams,
    n: usize,
    big_n: usize,
    box_n: usize,
    two_sided: bool,
) -> Result<f64> {
    if big_n > box_n {
        return Err(Error::Dimension(format!(
            "collar end {big_n} exceeds box half-width {box_n}"
        )));
    }
    let mut t = SpinConfig::uniform(SquareBox::new(box_n)?, Spin::Plus, Spin::Plus);
    for x in (n + 1)..=big_n {
        t.clamp(Site::line(-(x as i32)), Spin::Minus)?;
        if two_sided {
            t.clamp(Site::line(x as i32), Spin::Minus)?;
        }
    }
    let o = LineOracle::new(&t, params)?;
    Ok(2.0 * o.cylinder(&[(Site::ORIGIN, Spin::Plus)]) - 1.0)
}

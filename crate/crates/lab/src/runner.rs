//! One function per experiment. Each writes its CSV files into the output
//! directory and returns the statistical checks it performed.

use std::collections::HashMap;
use std::path::Path;
use std::time::Instant;

use serde_json::json;

use schonmann_core::cluster::{
    dual_beta, dual_p, es_bond_step, es_color_step, es_joint_key, es_joint_support, BondLattice,
};
use schonmann_core::ising::{
    run_coupled, stationarity_residual, uniform_config, ExactMeasure, ModelParams, RunDiagnostics,
    SamplingPlan, TransferOracle,
};
use schonmann_core::lattice::{format_word, SiteRole};
use schonmann_core::line::{
    average_gap, decimate, estimate_gaps, estimate_vark, exact_g, project, WordSource,
};
use schonmann_core::mixing::{
    check_prop_domi, curve_decreasing, estimate_cone_mixing, estimate_phi_mixing,
    estimate_run_probability, two_sided_probe, MixingCurve, RunProbability,
};
use schonmann_core::seed::{child_seed, rng_from_seed};
use schonmann_core::snapshot::IsingSnapshot;
use schonmann_core::stats::{chi_square_gof, linear_fit, normal_sf, pooled_se, BatchMeans};
use schonmann_core::{PastWindow, Site, Spin, SpinConfig, Tail, BETA_C};

use crate::config::{Experiment, RunConfig, Sampler};
use crate::error::LabError;
use crate::manifest::{Check, Manifest, OutputDir};

type Rows = Vec<Vec<String>>;

fn f(x: f64) -> String {
    format!("{x}")
}

fn s<T: ToString>(x: T) -> String {
    x.to_string()
}

/// Significance level of every statistical check.
pub const ALPHA: f64 = 0.05;
/// Significance level of the chi-square oracle checks.
pub const CHI_ALPHA: f64 = 0.01;
/// Largest |z| accepted when an estimate is compared with an exact value.
pub const ORACLE_Z: f64 = 3.5;

pub fn params(c: &RunConfig) -> Result<ModelParams, LabError> {
    Ok(ModelParams::new(c.beta, c.h)?.with_field_sign(c.field_sign))
}

pub fn plan(c: &RunConfig) -> SamplingPlan {
    let p = match c.sampler {
        Sampler::Exact => SamplingPlan::exact(c.samples),
        Sampler::Chain => SamplingPlan::chain(c.samples, c.burn_in).with_thin(c.thin),
    };
    p.with_replicas(c.chains).with_batches(c.batches)
}

struct Report {
    checks: Vec<Check>,
    diagnostics: Option<RunDiagnostics>,
    notes: Vec<(String, serde_json::Value)>,
}

impl Report {
    fn new() -> Self {
        Report {
            checks: Vec::new(),
            diagnostics: None,
            notes: Vec::new(),
        }
    }
}

/// Run the experiment of `c`, writing files and `manifest.json` into `dir`.
pub fn run(c: &RunConfig, dir: &Path) -> Result<Manifest, LabError> {
    let start = Instant::now();
    let mut out = OutputDir::create(dir)?;
    let r = match c.experiment {
        Experiment::OracleCheck => oracle_check(c, &mut out)?,
        Experiment::Sample => sample(c, &mut out)?,
        Experiment::GEstimate => g_estimate(c, &mut out)?,
        Experiment::Vark => vark(c, &mut out)?,
        Experiment::Theta => theta(c, &mut out)?,
        Experiment::PropDomi => prop_domi(c, &mut out)?,
        Experiment::PhiMixing => {
            let p = params(c)?;
            let curve = estimate_phi_mixing(&p, &c.gaps, c.w, c.box_n, &plan(c), c.seed)?;
            mixing(c, &curve, &mut out)?
        }
        Experiment::ConeMixing => {
            let p = params(c)?;
            let curve =
                estimate_cone_mixing(&p, c.theta_cone, &c.gaps, c.w, c.box_n, &plan(c), c.seed)?;
            mixing(c, &curve, &mut out)?
        }
        Experiment::TwoSidedProbe => collar(c, &mut out)?,
        Experiment::Duality => duality(c, &mut out)?,
        Experiment::Decimate => decimation(c, &mut out)?,
    };
    let m = Manifest {
        config: c.clone(),
        files: out.files().to_vec(),
        checks: r.checks,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        diagnostics: r.diagnostics,
        notes: r.notes,
    };
    m.write(dir)?;
    Ok(m)
}

/// Small configurations used by `oracle-check`, each with at most
/// `max_free` free sites.
pub fn oracle_cases(max_free: usize) -> Result<Vec<(&'static str, SpinConfig)>, LabError> {
    let mut v = Vec::new();
    v.push(("plus-ring", uniform_config(1, Spin::Plus, Spin::Plus)?));
    v.push(("minus-ring", uniform_config(1, Spin::Minus, Spin::Minus)?));
    let mut mixed = uniform_config(1, Spin::Plus, Spin::Plus)?;
    for s in [Site::new(-2, -1), Site::new(-2, 0), Site::new(2, 1), Site::new(0, -2)] {
        mixed.set(s, Spin::Minus)?;
    }
    v.push(("mixed-ring", mixed));
    let mut clamped = uniform_config(1, Spin::Plus, Spin::Plus)?;
    clamped.clamp(Site::ORIGIN, Spin::Minus)?;
    v.push(("origin-clamped", clamped));
    v.push(("region-2x3", region_2x3()?));
    v.retain(|(_, c)| c.free_count() <= max_free);
    Ok(v)
}

/// Free sites `{0, 1} x {-1, 0, 1}` inside box 2, everything else plus.
pub fn region_2x3() -> Result<SpinConfig, LabError> {
    let mut c = uniform_config(2, Spin::Plus, Spin::Plus)?;
    for s in c.geometry().sites().collect::<Vec<_>>() {
        if !((0..=1).contains(&s.x) && (-1..=1).contains(&s.y)) {
            c.mask(s, Spin::Plus)?;
        }
    }
    Ok(c)
}

/// Exact CFTP draws against enumeration: chi-square test.
pub fn cftp_chi_square(
    template: &SpinConfig,
    p: &ModelParams,
    draws: usize,
    batches: usize,
    seed: u64,
) -> Result<schonmann_core::stats::ChiSquareTest, LabError> {
    let m = ExactMeasure::new(template, p)?;
    let size = m.probabilities().len();
    let plan = SamplingPlan::exact(draws).with_batches(batches);
    let (accs, _) = run_coupled(
        std::slice::from_ref(template),
        p,
        &plan,
        seed,
        || vec![0u64; size],
        |v, cs| v[m.state_of(&cs[0])] += 1,
    )?;
    let mut counts = vec![0u64; size];
    for a in accs {
        counts.iter_mut().zip(a).for_each(|(x, y)| *x += y);
    }
    Ok(chi_square_gof(&counts, m.probabilities(), 5.0)?)
}

/// Edwards–Sokal chain on `template` against the exact joint law.
/// Recorded states are `thin` full steps apart after `burn_in` steps.
pub fn es_joint_chi_square(
    template: &SpinConfig,
    p: &ModelParams,
    draws: usize,
    thin: usize,
    seed: u64,
) -> Result<schonmann_core::stats::ChiSquareTest, LabError> {
    let lat = BondLattice::new(template)?;
    let pb = p.bond_probability();
    let support = es_joint_support(&lat, pb)?;
    let index: HashMap<u64, usize> = support.iter().enumerate().map(|(i, &(k, _))| (k, i)).collect();
    let probs: Vec<f64> = support.iter().map(|x| x.1).collect();
    let mut counts = vec![0u64; probs.len()];
    let mut rng = rng_from_seed(seed);
    let mut spins = template.clone();
    for _ in 0..100 {
        let b = es_bond_step(&lat, &spins, pb, &mut rng)?;
        spins = es_color_step(&b, &mut rng);
    }
    let mut outside = 0u64;
    for _ in 0..draws {
        for _ in 1..thin.max(1) {
            let b = es_bond_step(&lat, &spins, pb, &mut rng)?;
            spins = es_color_step(&b, &mut rng);
        }
        let b = es_bond_step(&lat, &spins, pb, &mut rng)?;
        match index.get(&es_joint_key(&spins, &b)) {
            Some(&i) => counts[i] += 1,
            None => outside += 1,
        }
        spins = es_color_step(&b, &mut rng);
    }
    let mut t = chi_square_gof(&counts, &probs, 5.0)?;
    if outside > 0 {
        // A state outside the support is an outright failure.
        t.p_value = 0.0;
    }
    Ok(t)
}

fn oracle_check(c: &RunConfig, out: &mut OutputDir) -> Result<Report, LabError> {
    let mut rep = Report::new();
    let mut rows: Rows = Vec::new();
    let cases = oracle_cases(c.max_free_sites)?;
    let mut task = 0u64;
    let mut next = || {
        task += 1;
        child_seed(c.seed, task)
    };
    for &beta in &c.betas {
        let p = ModelParams::new(beta, c.h)?.with_field_sign(c.field_sign);
        for (name, t) in &cases {
            let m = ExactMeasure::new(t, &p)?;
            let res = stationarity_residual(&m);
            let ok = res < 1e-10;
            rows.push(vec![
                s("stationarity"), f(beta), s(name), s(t.free_count()), f(res), s(0), s(""), s(ok), s(""),
            ]);
            rep.checks.push(Check::new(
                &format!("stationarity/{name}/beta={beta}"),
                ok,
                None,
                format!("residual {res:e}"),
            ));

            let sd = next();
            let chi = cftp_chi_square(t, &p, c.samples, c.batches, sd)?;
            let ok = chi.passes(CHI_ALPHA);
            rows.push(vec![
                s("cftp"), f(beta), s(name), s(t.free_count()), f(chi.statistic), s(chi.dof),
                f(chi.p_value), s(ok), s(sd),
            ]);
            rep.checks.push(Check::new(
                &format!("cftp/{name}/beta={beta}"),
                ok,
                Some(chi.p_value),
                format!("chi2 {} on {} dof", chi.statistic, chi.dof),
            ));

            if !t.geometry().sites().any(|s| t.role(s).ok() == Some(SiteRole::Masked)) {
                let tr = TransferOracle::new(t, &p)?;
                let diff = t
                    .free_sites()
                    .iter()
                    .map(|&s| (tr.plus_probability(s) - m.plus_probability(s)).abs())
                    .fold(0.0, f64::max);
                let ok = diff < 1e-12;
                rows.push(vec![
                    s("transfer"), f(beta), s(name), s(t.free_count()), f(diff), s(0), s(""), s(ok), s(""),
                ]);
                rep.checks.push(Check::new(
                    &format!("transfer/{name}/beta={beta}"),
                    ok,
                    None,
                    format!("max marginal difference {diff:e}"),
                ));
            }
        }

        let region = region_2x3()?;
        if region.free_count() <= c.max_free_sites {
            let sd = next();
            let chi = es_joint_chi_square(&region, &p, c.samples, 4, sd)?;
            let ok = chi.passes(CHI_ALPHA);
            rows.push(vec![
                s("es-joint"), f(beta), s("region-2x3"), s(region.free_count()), f(chi.statistic),
                s(chi.dof), f(chi.p_value), s(ok), s(sd),
            ]);
            rep.checks.push(Check::new(
                &format!("es-joint/region-2x3/beta={beta}"),
                ok,
                Some(chi.p_value),
                format!("chi2 {} on {} dof", chi.statistic, chi.dof),
            ));
        }

        // One-sided conditional probability against the transfer oracle.
        let past = PastWindow::new(vec![Spin::Minus, Spin::Plus], Tail::AllMinus);
        let exact = exact_g(&past, &p, 3, 3)?;
        let sd = next();
        let gap = estimate_gaps(
            std::slice::from_ref(&past.word),
            &p,
            3,
            3,
            &SamplingPlan::exact(c.samples.min(20_000)).with_batches(c.batches),
            sd,
        )?;
        let est = gap[0].minus_tail.value;
        let z = (est.value - exact) / est.stderr;
        let ok = z.abs() <= ORACLE_Z;
        rows.push(vec![
            s("line-g"), f(beta), s("box3-word-+tail-"), s(46), f(z), s(0),
            f(2.0 * normal_sf(z.abs())), s(ok), s(sd),
        ]);
        rep.checks.push(Check::new(
            &format!("line-g/beta={beta}"),
            ok,
            Some(2.0 * normal_sf(z.abs())),
            format!("estimate {} +- {} vs exact {exact}", est.value, est.stderr),
        ));
    }
    out.write_csv(
        "oracle_check.csv",
        &["suite", "beta", "case", "free_sites", "statistic", "dof", "p_value", "passed", "seed"],
        &rows,
    )?;
    Ok(rep)
}

fn sample(c: &RunConfig, out: &mut OutputDir) -> Result<Report, LabError> {
    let p = params(c)?;
    let mut pl = plan(c);
    pl.samples = c.snapshots;
    pl.batches = 2;
    let t = uniform_config(c.box_n, Spin::Plus, Spin::Plus)?;
    let (accs, diag) = run_coupled(
        std::slice::from_ref(&t),
        &p,
        &pl,
        c.seed,
        Vec::new,
        |v: &mut Vec<SpinConfig>, cs| v.push(cs[0].clone()),
    )?;
    let mut rows: Rows = Vec::new();
    for (i, cfg) in accs.into_iter().flatten().enumerate() {
        let snap = IsingSnapshot::from_config(&cfg, c.beta, c.h, c.seed);
        let name = format!("snapshot_{i:04}.txt");
        out.write(&name, snap.write().as_bytes())?;
        rows.push(vec![s(i), name, f(cfg.magnetization()), s(c.seed)]);
    }
    out.write_csv("samples.csv", &["index", "file", "magnetization", "seed"], &rows)?;
    let mut rep = Report::new();
    rep.diagnostics = Some(diag);
    Ok(rep)
}

fn g_estimate(c: &RunConfig, out: &mut OutputDir) -> Result<Report, LabError> {
    let p = params(c)?;
    let pl = plan(c);
    let mut rep = Report::new();
    let mut rows: Rows = Vec::new();
    let header = ["beta", "n", "l", "tail", "word", "p_plus", "stderr", "coalesced"];
    let push = |rows: &mut Rows, n: usize, l: usize, g: &schonmann_core::line::GapEstimate| {
        for (tail, e) in [("plus", &g.plus_tail), ("minus", &g.minus_tail)] {
            rows.push(vec![
                f(c.beta), s(n), s(l), s(tail), format_word(&g.word), f(e.value.value),
                f(e.value.stderr), s(e.coalesced),
            ]);
        }
    };
    let mut violations = 0;
    if let Some(word) = &c.word {
        let n = word.len();
        let gaps = estimate_gaps(std::slice::from_ref(word), &p, n + c.l, n + c.l, &pl, c.seed)?;
        push(&mut rows, n, c.l, &gaps[0]);
        violations += gaps[0].violations;
    } else {
        let mut trend: Rows = Vec::new();
        let mut means = Vec::new();
        for (i, &r) in c.ladder.iter().enumerate() {
            let sd = child_seed(c.seed, i as u64);
            let a = average_gap(&p, r, r, c.words, &pl, sd)?;
            for g in &a.gaps {
                push(&mut rows, r, r, g);
                violations += g.violations;
            }
            trend.push(vec![f(c.beta), s(r), s(r), f(a.mean), f(a.stderr), s(a.gaps.len()), s(sd)]);
            means.push((a.mean, a.stderr));
        }
        out.write_csv(
            "gap_trend.csv",
            &["beta", "n", "l", "mean_gap", "stderr", "words", "seed"],
            &trend,
        )?;
        if means.len() >= 2 {
            let (a, b) = (means[0], means[means.len() - 1]);
            let se = pooled_se(a.1, b.1);
            let drop = a.0 - b.0;
            let passed = se > 0.0 && drop > 2.0 * se;
            let pv = if se > 0.0 { Some(normal_sf(drop / se)) } else { None };
            rep.checks.push(Check::new(
                "gap-trend",
                passed,
                pv,
                format!("first - last = {drop:e}, pooled stderr {se:e}"),
            ));
        }
    }
    rep.checks.push(Check::new(
        "attractive-order",
        violations == 0,
        None,
        format!("{violations} samples with minus-tail value above plus-tail value"),
    ));
    out.write_csv("gfun.csv", &header, &rows)?;
    Ok(rep)
}

fn vark(c: &RunConfig, out: &mut OutputDir) -> Result<Report, LabError> {
    let p = params(c)?;
    let pl = plan(c);
    let mut rep = Report::new();
    let mut rows: Rows = Vec::new();
    let mut curve = Vec::new();
    let mut violations = 0;
    let src = WordSource::Auto {
        sample_count: c.words,
        box_n: c.box_n,
    };
    for k in c.k_min..=c.k_max {
        // One seed for every k: word sets are nested, so the curve is
        // non-increasing sample by sample.
        let v = estimate_vark(&p, k, &src, c.box_n, c.box_n, &pl, c.seed)?;
        rows.push(vec![
            f(c.beta), s(k), f(v.lower_bound.value), f(v.lower_bound.stderr), s(v.words_examined),
            s(c.seed),
        ]);
        violations += v.violations;
        curve.push((k, v.lower_bound.value));
    }
    out.write_csv(
        "vark.csv",
        &["beta", "k", "vark_lb", "stderr", "words_examined", "seed"],
        &rows,
    )?;
    rep.checks.push(Check::new(
        "attractive-order",
        violations == 0,
        None,
        format!("{violations} order violations"),
    ));
    let nested: Vec<&(usize, f64)> = curve.iter().filter(|(k, _)| *k <= 10).collect();
    let monotone = nested.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-12);
    rep.checks.push(Check::new(
        "non-increasing",
        monotone,
        None,
        "exhaustive word sets, shared seed".into(),
    ));
    if let Some(fit) = log_fit(&curve) {
        rep.notes.push((
            "log_linear_fit".into(),
            json!({"slope": fit.0, "r_squared": fit.1}),
        ));
    }
    Ok(rep)
}

/// `(slope, R^2)` of `ln var_k` against `k`, when every value is positive.
pub fn log_fit(curve: &[(usize, f64)]) -> Option<(f64, f64)> {
    if curve.len() < 2 || curve.iter().any(|&(_, v)| v.is_nan() || v <= 0.0) {
        return None;
    }
    let xs: Vec<f64> = curve.iter().map(|&(k, _)| k as f64).collect();
    let ys: Vec<f64> = curve.iter().map(|&(_, v)| v.ln()).collect();
    linear_fit(&xs, &ys).ok().map(|l| (l.slope, l.r_squared))
}

fn theta_rows(c: &RunConfig, label: &str, r: &RunProbability, rows: &mut Rows) {
    for m in 1..=r.n() {
        let (lp, se) = r.cumulative_log(m);
        rows.push(vec![f(c.beta), s(label), s(m), f(lp), f(se)]);
    }
}

/// Peierls-type bound `nu(minus run of length m) <= 2^-m` above `ln 3 / 2`.
fn peierls_check(r: &RunProbability) -> Check {
    let mut worst = f64::NEG_INFINITY;
    let mut ok = true;
    for m in 1..=r.n() {
        let (lp, lse) = r.cumulative_log(m);
        let prob = lp.exp();
        let z = (prob - 0.5f64.powi(m as i32)) / (prob * lse);
        worst = worst.max(z);
        ok &= z <= 3.0;
    }
    Check::new(
        "minus-run-bound",
        ok,
        None,
        format!("largest (estimate - 2^-n) / stderr = {worst}"),
    )
}

fn theta(c: &RunConfig, out: &mut OutputDir) -> Result<Report, LabError> {
    let p = params(c)?;
    let pl = plan(c);
    let minus = estimate_run_probability(&p, Spin::Minus, c.run_len, c.box_n, Spin::Plus, &pl, child_seed(c.seed, 0))?;
    let plus = estimate_run_probability(&p, Spin::Plus, c.run_len, c.box_n, Spin::Plus, &pl, child_seed(c.seed, 1))?;
    let mut rows = Vec::new();
    theta_rows(c, "minus", &minus, &mut rows);
    theta_rows(c, "plus", &plus, &mut rows);
    out.write_csv("theta.csv", &["beta", "sign", "n", "log_prob", "stderr"], &rows)?;
    let mut rep = Report::new();
    if c.beta > 3f64.ln() / 2.0 {
        rep.checks.push(peierls_check(&minus));
    }
    rep.notes.push((
        "floored_factors".into(),
        json!(minus.floored.iter().chain(&plus.floored).filter(|&&x| x).count()),
    ));
    Ok(rep)
}

fn prop_domi(c: &RunConfig, out: &mut OutputDir) -> Result<Report, LabError> {
    let p = params(c)?;
    let d = check_prop_domi(&p, c.run_len, c.box_n, &plan(c), c.seed)?;
    let mut rows = Vec::new();
    theta_rows(c, "minus", &d.runs_plus, &mut rows);
    theta_rows(c, "plus", &d.runs_minus, &mut rows);
    out.write_csv("theta.csv", &["beta", "sign", "n", "log_prob", "stderr"], &rows)?;
    out.write_csv(
        "rates.csv",
        &["beta", "theta_plus", "theta_minus", "rho_witness", "z", "p_value"],
        &[vec![
            f(c.beta),
            f(d.theta_plus.theta),
            f(d.theta_minus.theta),
            d.rho_witness.map(f).unwrap_or_default(),
            f(d.z),
            f(d.p_value),
        ]],
    )?;
    let mut rep = Report::new();
    rep.checks.push(Check::new(
        "rate-order",
        d.rejects(ALPHA),
        Some(d.p_value),
        format!(
            "theta_plus {} +- {}, theta_minus {} +- {}",
            d.theta_plus.theta, d.theta_plus.stderr, d.theta_minus.theta, d.theta_minus.stderr
        ),
    ));
    Ok(rep)
}

fn mixing(c: &RunConfig, curve: &MixingCurve, out: &mut OutputDir) -> Result<Report, LabError> {
    let rows: Rows = curve
        .points
        .iter()
        .map(|q| {
            vec![
                f(c.beta),
                s(curve.region),
                curve.theta_cone.map(f).unwrap_or_default(),
                s(q.gap),
                s(curve.w),
                f(q.coefficient.value),
                f(q.coefficient.stderr),
            ]
        })
        .collect();
    out.write_csv(
        "mixing.csv",
        &["beta", "region", "theta_cone", "gap", "w", "coefficient", "stderr"],
        &rows,
    )?;
    let (ok, margin) = curve_decreasing(&curve.points);
    let mut rep = Report::new();
    rep.checks.push(Check::new(
        "decreasing-curve",
        ok,
        Some(normal_sf(margin)),
        format!("first - last = {margin} pooled stderr"),
    ));
    rep.notes.push((
        "events".into(),
        json!(curve
            .points
            .iter()
            .map(|q| json!({"gap": q.gap, "argmax": q.event, "events": q.events, "disagreement": q.disagreement.value}))
            .collect::<Vec<_>>()),
    ));
    Ok(rep)
}

fn collar(c: &RunConfig, out: &mut OutputDir) -> Result<Report, LabError> {
    let p = params(c)?;
    let r = two_sided_probe(&p, c.n, &c.ladder, c.box_n, &plan(c), c.seed)?;
    let mut rows: Rows = vec![vec![
        f(c.beta), s(c.n), s(c.n), s("none"), f(r.unconditioned.value), f(r.unconditioned.stderr), s(c.seed),
    ]];
    for row in &r.rows {
        for (label, e) in [("one-sided", &row.one_sided), ("two-sided", &row.two_sided)] {
            rows.push(vec![f(c.beta), s(c.n), s(row.big_n), s(label), f(e.value), f(e.stderr), s(c.seed)]);
        }
    }
    out.write_csv(
        "collar.csv",
        &["beta", "n", "big_n", "conditioning", "magnetization", "stderr", "seed"],
        &rows,
    )?;
    let mut rep = Report::new();
    let worst = r.two_sided_steps.iter().map(|s| s.p_value).fold(0.0, f64::max);
    rep.checks.push(Check::new(
        "two-sided-decreasing",
        r.two_sided_decreasing,
        Some(worst),
        "largest p-value over consecutive rungs".into(),
    ));
    let (a, b) = (r.rows[0].one_sided, r.rows[r.rows.len() - 1].one_sided);
    rep.checks.push(Check::new(
        "one-sided-stable",
        r.one_sided_stable,
        None,
        format!(
            "first - last = {}, pooled stderr {}",
            a.value - b.value,
            pooled_se(a.stderr, b.stderr)
        ),
    ));
    rep.notes.push((
        "one_sided_paired_z".into(),
        json!(r.one_sided_steps.iter().map(|s| s.z).collect::<Vec<_>>()),
    ));
    Ok(rep)
}

/// Rows `(beta, dual_beta, p, dual_p)` for the configured temperatures and
/// the critical point.
pub fn duality_table(betas: &[f64]) -> Result<Vec<[f64; 4]>, LabError> {
    let mut v: Vec<f64> = betas.to_vec();
    v.push(BETA_C);
    v.iter()
        .map(|&b| {
            let p = -(-2.0 * b).exp_m1();
            Ok([b, dual_beta(b)?, p, dual_p(p)?])
        })
        .collect()
}

fn duality(c: &RunConfig, out: &mut OutputDir) -> Result<Report, LabError> {
    let table = duality_table(&c.betas)?;
    let rows: Rows = table.iter().map(|r| r.iter().map(|&x| f(x)).collect()).collect();
    out.write_csv("duality.csv", &["beta", "dual_beta", "p", "dual_p"], &rows)?;
    let mut rep = Report::new();
    let err = (dual_beta(BETA_C)? - BETA_C).abs();
    rep.checks.push(Check::new(
        "critical-self-dual",
        err < 1e-12,
        None,
        format!("|dual_beta(beta_c) - beta_c| = {err:e}"),
    ));
    Ok(rep)
}

fn decimation(c: &RunConfig, out: &mut OutputDir) -> Result<Report, LabError> {
    if c.l == 0 {
        return Err(LabError::Config {
            line: None,
            msg: "decimation needs l >= 1".into(),
        });
    }
    let p = params(c)?;
    let pl = plan(c);
    let n = c.box_n as i32;
    let probe = project(&uniform_config(c.box_n, Spin::Plus, Spin::Plus)?, -n, n)?;
    let kept: Vec<i32> = decimate(&probe, c.l, c.k)?.into_iter().map(|x| x.0).collect();
    let t = uniform_config(c.box_n, Spin::Plus, Spin::Plus)?;
    let nk = kept.len();
    let (accs, diag) = run_coupled(
        std::slice::from_ref(&t),
        &p,
        &pl,
        c.seed,
        || (BatchMeans::new(nk, pl.batch_size()), vec![0.0; nk]),
        |(bm, buf), cs| {
            let lc = project(&cs[0], -n, n).expect("line inside box");
            let d = decimate(&lc, c.l, c.k).expect("valid decimation");
            for (v, (_, s)) in buf.iter_mut().zip(d) {
                *v = f64::from(u8::from(s == Spin::Plus));
            }
            bm.push(buf);
        },
    )?;
    let mut it = accs.into_iter().map(|a| a.0);
    let mut bm = it.next().expect("one replica");
    it.for_each(|b| bm.merge(b));
    let rows: Rows = kept
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            vec![f(c.beta), s(c.l), s(c.k), s(x), f(bm.mean(i)), f(bm.stderr(i)), s(c.seed)]
        })
        .collect();
    out.write_csv("decimate.csv", &["beta", "l", "k", "x", "p_plus", "stderr", "seed"], &rows)?;
    let mut rep = Report::new();
    rep.diagnostics = Some(diag);
    Ok(rep)
}

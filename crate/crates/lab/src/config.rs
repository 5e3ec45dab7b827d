//! Flat `key = value` run configuration.
//!
//! Blank lines and everything after `#` are ignored. Keys may appear at most
//! once; unknown keys, malformed values and out-of-range values are errors
//! carrying the offending line number.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use schonmann_core::lattice::{format_word, parse_word};
use schonmann_core::{FieldSign, Spin};

use crate::error::LabError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    OracleCheck,
    Sample,
    GEstimate,
    Vark,
    Theta,
    PropDomi,
    PhiMixing,
    ConeMixing,
    TwoSidedProbe,
    Duality,
    Decimate,
}

impl Experiment {
    pub const ALL: [Experiment; 11] = [
        Experiment::OracleCheck,
        Experiment::Sample,
        Experiment::GEstimate,
        Experiment::Vark,
        Experiment::Theta,
        Experiment::PropDomi,
        Experiment::PhiMixing,
        Experiment::ConeMixing,
        Experiment::TwoSidedProbe,
        Experiment::Duality,
        Experiment::Decimate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::OracleCheck => "oracle-check",
            Experiment::Sample => "sample",
            Experiment::GEstimate => "g-estimate",
            Experiment::Vark => "vark",
            Experiment::Theta => "theta",
            Experiment::PropDomi => "prop-domi",
            Experiment::PhiMixing => "phi-mixing",
            Experiment::ConeMixing => "cone-mixing",
            Experiment::TwoSidedProbe => "two-sided-probe",
            Experiment::Duality => "duality",
            Experiment::Decimate => "decimate",
        }
    }

    /// Experiments that draw no random numbers.
    pub fn is_deterministic(self) -> bool {
        matches!(self, Experiment::Duality)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| format!("unknown experiment `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampler {
    Exact,
    Chain,
}

/// A validated run configuration. Defaults are listed in [`KEYS`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub beta: f64,
    pub h: f64,
    pub field_sign: FieldSign,
    pub box_n: usize,
    /// Ladder of sizes: `n = l` rungs for `g-estimate`, collar ends for
    /// `two-sided-probe`.
    pub ladder: Vec<usize>,
    pub samples: usize,
    pub burn_in: u64,
    pub thin: u64,
    pub batches: usize,
    pub chains: usize,
    pub sampler: Sampler,
    pub out: Option<PathBuf>,
    pub k_min: usize,
    pub k_max: usize,
    pub words: usize,
    pub word: Option<Vec<Spin>>,
    pub gaps: Vec<usize>,
    pub w: usize,
    pub theta_cone: f64,
    pub n: usize,
    pub l: usize,
    pub k: usize,
    /// Longest run for `theta` and `prop-domi`.
    pub run_len: usize,
    pub betas: Vec<f64>,
    pub max_free_sites: usize,
    pub snapshots: usize,
}

/// Accepted keys with their defaults, as shown by `--help`.
pub const KEYS: &[(&str, &str)] = &[
    ("experiment", "required; one of the subcommand names"),
    ("seed", "required 64-bit master seed (or --seed)"),
    ("beta", "0.6"),
    ("h", "0"),
    ("field_sign", "literal | conventional (default literal)"),
    ("box", "16 (box half-width)"),
    ("ladder", "8,16,32"),
    ("samples", "20000"),
    ("burn_in", "500"),
    ("thin", "1"),
    ("batches", "50"),
    ("chains", "1"),
    ("sampler", "chain | exact (default chain)"),
    ("out", "output directory (default: current directory)"),
    ("k_min", "1"),
    ("k_max", "8"),
    ("words", "20"),
    ("word", "explicit past word of + and - (oldest first)"),
    ("gaps", "2,4,8,16"),
    ("w", "2"),
    ("theta_cone", "0.2"),
    ("n", "2"),
    ("l", "8"),
    ("k", "1"),
    ("run_len", "8"),
    ("betas", "0.3,0.44,0.7"),
    ("max_free_sites", "9"),
    ("snapshots", "4"),
];

impl RunConfig {
    /// Defaults for `experiment` with the given seed.
    pub fn defaults(experiment: Experiment, seed: u64) -> Self {
        RunConfig {
            experiment,
            seed,
            beta: 0.6,
            h: 0.0,
            field_sign: FieldSign::Literal,
            box_n: 16,
            ladder: vec![8, 16, 32],
            samples: 20_000,
            burn_in: 500,
            thin: 1,
            batches: 50,
            chains: 1,
            sampler: Sampler::Chain,
            out: None,
            k_min: 1,
            k_max: 8,
            words: 20,
            word: None,
            gaps: vec![2, 4, 8, 16],
            w: 2,
            theta_cone: 0.2,
            n: 2,
            l: 8,
            k: 1,
            run_len: 8,
            betas: vec![0.3, 0.44, 0.7],
            max_free_sites: 9,
            snapshots: 4,
        }
    }

    /// Resolved values of every key, for the manifest.
    pub fn echo(&self) -> BTreeMap<&'static str, String> {
        let list = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let mut m = BTreeMap::new();
        m.insert("experiment", self.experiment.to_string());
        m.insert("seed", self.seed.to_string());
        m.insert("beta", self.beta.to_string());
        m.insert("h", self.h.to_string());
        m.insert("field_sign", self.field_sign.label().to_string());
        m.insert("box", self.box_n.to_string());
        m.insert("ladder", list(&self.ladder));
        m.insert("samples", self.samples.to_string());
        m.insert("burn_in", self.burn_in.to_string());
        m.insert("thin", self.thin.to_string());
        m.insert("batches", self.batches.to_string());
        m.insert("chains", self.chains.to_string());
        m.insert(
            "sampler",
            match self.sampler {
                Sampler::Exact => "exact",
                Sampler::Chain => "chain",
            }
            .to_string(),
        );
        m.insert("k_min", self.k_min.to_string());
        m.insert("k_max", self.k_max.to_string());
        m.insert("words", self.words.to_string());
        if let Some(w) = &self.word {
            m.insert("word", format_word(w));
        }
        m.insert("gaps", list(&self.gaps));
        m.insert("w", self.w.to_string());
        m.insert("theta_cone", self.theta_cone.to_string());
        m.insert("n", self.n.to_string());
        m.insert("l", self.l.to_string());
        m.insert("k", self.k.to_string());
        m.insert("run_len", self.run_len.to_string());
        m.insert(
            "betas",
            self.betas.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(","),
        );
        m.insert("max_free_sites", self.max_free_sites.to_string());
        m.insert("snapshots", self.snapshots.to_string());
        m
    }
}

fn num<T: FromStr>(v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("`{v}` is not a valid number"))
}

fn list<T: FromStr>(v: &str) -> Result<Vec<T>, String> {
    let out: Result<Vec<T>, String> = v.split(',').map(|x| num(x.trim())).collect();
    let out = out?;
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(out)
}

fn positive<T: PartialOrd + Default + fmt::Display>(x: T) -> Result<T, String> {
    if x > T::default() {
        Ok(x)
    } else {
        Err(format!("must be positive, got {x}"))
    }
}

fn finite_positive(x: f64) -> Result<f64, String> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(format!("must be finite and positive, got {x}"))
    }
}

/// Parse configuration text. `seed_override` (from `--seed`) replaces any
/// seed in the text; without either, the seed is missing and that is an
/// error unless the experiment draws no random numbers.
pub fn parse_config(text: &str, seed_override: Option<u64>) -> Result<RunConfig, LabError> {
    let mut seen: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| LabError::Config {
            line: Some(line_no),
            msg: format!("expected `key = value`, got `{line}`"),
        })?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.iter().any(|(name, _)| *name == k) {
            return Err(LabError::Config {
                line: Some(line_no),
                msg: format!("unknown key `{k}`"),
            });
        }
        if let Some((prev, _)) = seen.get(k) {
            return Err(LabError::Config {
                line: Some(line_no),
                msg: format!("key `{k}` already set on line {prev}"),
            });
        }
        seen.insert(k.to_string(), (line_no, v.to_string()));
    }
    let (exp_line, exp) = seen.get("experiment").cloned().ok_or(LabError::Config {
        line: None,
        msg: "missing key `experiment`".into(),
    })?;
    let experiment: Experiment = exp.parse().map_err(|msg| LabError::Config {
        line: Some(exp_line),
        msg,
    })?;
    let seed = match (seed_override, seen.get("seed")) {
        (Some(s), _) => s,
        (None, Some((line, v))) => num(v).map_err(|m| LabError::Config {
            line: Some(*line),
            msg: format!("seed: {m}"),
        })?,
        (None, None) if experiment.is_deterministic() => 0,
        (None, None) => {
            return Err(LabError::Config {
                line: None,
                msg: "missing key `seed` (seeds are mandatory)".into(),
            })
        }
    };
    let mut c = RunConfig::defaults(experiment, seed);
    for (k, (line, v)) in &seen {
        let err = |m: String| LabError::Config {
            line: Some(*line),
            msg: format!("{k}: {m}"),
        };
        let v = v.as_str();
        match k.as_str() {
            "experiment" | "seed" => {}
            "beta" => c.beta = num(v).and_then(finite_positive).map_err(err)?,
            "h" => {
                c.h = num::<f64>(v)
                    .and_then(|h| if h.is_finite() { Ok(h) } else { Err("must be finite".into()) })
                    .map_err(err)?
            }
            "field_sign" => {
                c.field_sign = match v {
                    "literal" => FieldSign::Literal,
                    "conventional" => FieldSign::Conventional,
                    _ => return Err(err(format!("`{v}` is not literal or conventional"))),
                }
            }
            "box" => c.box_n = num(v).and_then(positive).map_err(err)?,
            "ladder" => {
                c.ladder = list(v)
                    .and_then(|l: Vec<usize>| {
                        l.iter().try_for_each(|&x| positive(x).map(|_| ()))?;
                        Ok(l)
                    })
                    .map_err(err)?
            }
            "samples" => c.samples = num(v).and_then(positive).map_err(err)?,
            "burn_in" => c.burn_in = num(v).map_err(err)?,
            "thin" => c.thin = num(v).and_then(positive).map_err(err)?,
            "batches" => {
                c.batches = num(v)
                    .and_then(|b: usize| if b >= 2 { Ok(b) } else { Err("must be at least 2".into()) })
                    .map_err(err)?
            }
            "chains" => c.chains = num(v).and_then(positive).map_err(err)?,
            "sampler" => {
                c.sampler = match v {
                    "exact" => Sampler::Exact,
                    "chain" => Sampler::Chain,
                    _ => return Err(err(format!("`{v}` is not exact or chain"))),
                }
            }
            "out" => c.out = Some(PathBuf::from(v)),
            "k_min" => c.k_min = num(v).and_then(positive).map_err(err)?,
            "k_max" => c.k_max = num(v).and_then(positive).map_err(err)?,
            "words" => c.words = num(v).and_then(positive).map_err(err)?,
            "word" => c.word = Some(parse_word(v).map_err(|e| err(e.to_string()))?),
            "gaps" => {
                c.gaps = list(v)
                    .and_then(|l: Vec<usize>| {
                        l.iter().try_for_each(|&x| positive(x).map(|_| ()))?;
                        Ok(l)
                    })
                    .map_err(err)?
            }
            "w" => {
                c.w = num(v)
                    .and_then(|w: usize| {
                        if (1..=4).contains(&w) {
                            Ok(w)
                        } else {
                            Err(format!("must lie in 1..=4, got {w}"))
                        }
                    })
                    .map_err(err)?
            }
            "theta_cone" => c.theta_cone = num(v).and_then(finite_positive).map_err(err)?,
            "n" => c.n = num(v).and_then(positive).map_err(err)?,
            "l" => c.l = num(v).map_err(err)?,
            "k" => c.k = num(v).map_err(err)?,
            "run_len" => c.run_len = num(v).and_then(positive).map_err(err)?,
            "betas" => {
                c.betas = list(v)
                    .and_then(|l: Vec<f64>| {
                        l.iter().try_for_each(|&x| finite_positive(x).map(|_| ()))?;
                        Ok(l)
                    })
                    .map_err(err)?
            }
            "max_free_sites" => c.max_free_sites = num(v).and_then(positive).map_err(err)?,
            "snapshots" => c.snapshots = num(v).and_then(positive).map_err(err)?,
            _ => unreachable!("key list checked above"),
        }
    }
    if c.k_min > c.k_max {
        let line = seen.get("k_min").map(|x| x.0);
        return Err(LabError::Config {
            line,
            msg: format!("k_min = {} exceeds k_max = {}", c.k_min, c.k_max),
        });
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_valid() {
        let c = parse_config("beta = 0.6\nexperiment = theta\nseed = 7\n", None).unwrap();
        assert_eq!(c.experiment, Experiment::Theta);
        assert_eq!(c.beta, 0.6);
        assert_eq!(c.h, 0.0);
        assert_eq!(c.field_sign, FieldSign::Literal);
    }

    #[test]
    fn range_error_names_key_and_line() {
        let e = parse_config("experiment = theta\nseed = 1\nbeta = -1\n", None).unwrap_err();
        let s = e.to_string();
        assert!(s.contains("line 3") && s.contains("beta"), "{s}");
    }

    #[test]
    fn seed_is_mandatory() {
        let e = parse_config("experiment = theta\n", None).unwrap_err();
        assert!(e.to_string().contains("seed"));
        assert_eq!(parse_config("experiment = theta\n", Some(9)).unwrap().seed, 9);
        assert!(parse_config("experiment = duality\n", None).is_ok());
    }

    #[test]
    fn override_wins() {
        let c = parse_config("experiment = vark\nseed = 1\n", Some(2)).unwrap();
        assert_eq!(c.seed, 2);
    }

    #[test]
    fn unknown_and_duplicate_keys() {
        let e = parse_config("experiment = theta\nseed = 1\nbogus = 3\n", None).unwrap_err();
        assert!(e.to_string().contains("line 3"));
        let e = parse_config("experiment = theta\nseed = 1\nseed = 2\n", None).unwrap_err();
        assert!(e.to_string().contains("already set"));
        let e = parse_config("seed = 1\n", None).unwrap_err();
        assert!(e.to_string().contains("experiment"));
        let e = parse_config("# c\nexperiment = nope\nseed = 1", None).unwrap_err();
        assert!(e.to_string().contains("line 2"));
    }

    #[test]
    fn lists_words_and_comments() {
        let c = parse_config(
            "experiment = g-estimate # trailing\nseed = 3\ngaps = 1, 3\nword = +-+\nw = 3\n",
            None,
        )
        .unwrap();
        assert_eq!(c.gaps, vec![1, 3]);
        assert_eq!(c.word, Some(vec![Spin::Plus, Spin::Minus, Spin::Plus]));
        assert!(parse_config("experiment = vark\nseed = 1\nw = 5\n", None).is_err());
        assert!(parse_config("experiment = vark\nseed = 1\nword = +x\n", None).is_err());
        assert!(parse_config("experiment = vark\nseed = 1\nk_min = 4\nk_max = 2\n", None).is_err());
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use schonmann_lab::config::KEYS;
use schonmann_lab::{parse_config, runner, Experiment, LabError, RunConfig};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
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

impl From<Command> for Experiment {
    fn from(c: Command) -> Self {
        match c {
            Command::OracleCheck => Experiment::OracleCheck,
            Command::Sample => Experiment::Sample,
            Command::GEstimate => Experiment::GEstimate,
            Command::Vark => Experiment::Vark,
            Command::Theta => Experiment::Theta,
            Command::PropDomi => Experiment::PropDomi,
            Command::PhiMixing => Experiment::PhiMixing,
            Command::ConeMixing => Experiment::ConeMixing,
            Command::TwoSidedProbe => Experiment::TwoSidedProbe,
            Command::Duality => Experiment::Duality,
            Command::Decimate => Experiment::Decimate,
        }
    }
}

fn keys_help() -> String {
    let mut s = String::from("Configuration keys (key = value, # comments):\n");
    for (k, d) in KEYS {
        s.push_str(&format!("  {k:<15} {d}\n"));
    }
    s.push_str("\nExit status: 0 on success, 2 when a statistical check fails, 1 on error.");
    s
}

#[derive(Debug, Parser)]
#[command(name = "schonmann-lab", version, about = "Ising plus-phase line-projection experiments", after_help = keys_help())]
struct Cli {
    /// Experiment to run; must match `experiment` in the config when both are given.
    command: Command,
    /// Configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "SCHONMANN_LAB_WORKERS")]
    workers: Option<usize>,
    /// Free-site cap for oracle-check configurations.
    #[arg(long)]
    max_free_sites: Option<usize>,
}

fn load(cli: &Cli) -> Result<RunConfig, LabError> {
    let exp = Experiment::from(cli.command);
    let mut c = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
            let text = if text.lines().any(|l| l.split('#').next().unwrap_or("").trim_start().starts_with("experiment")) {
                text
            } else {
                // Appended so that reported line numbers match the file.
                let sep = if text.is_empty() || text.ends_with('\n') { "" } else { "\n" };
                format!("{text}{sep}experiment = {exp}\n")
            };
            parse_config(&text, cli.seed)?
        }
        None => parse_config(&format!("experiment = {exp}\n"), cli.seed)?,
    };
    if c.experiment != exp {
        return Err(LabError::Config {
            line: None,
            msg: format!("config is for `{}` but `{exp}` was requested", c.experiment),
        });
    }
    if let Some(m) = cli.max_free_sites {
        c.max_free_sites = m;
    }
    if let Some(o) = &cli.out {
        c.out = Some(o.clone());
    }
    Ok(c)
}

fn print_duality(c: &RunConfig) -> Result<(), LabError> {
    let fixed = 2.0 - 2f64.sqrt();
    println!("self-dual bond probability 2 - sqrt 2 = {fixed}");
    println!("dual_p(2 - sqrt 2) = {}", schonmann_core::cluster::dual_p(fixed)?);
    println!("{:>22} {:>22} {:>22} {:>22}", "beta", "dual_beta", "p", "dual_p");
    for r in runner::duality_table(&c.betas)? {
        println!("{:>22} {:>22} {:>22} {:>22}", r[0], r[1], r[2], r[3]);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = load(&cli).and_then(|c| {
        let dir = c.out.clone().unwrap_or_else(|| PathBuf::from("."));
        let mut pool = rayon::ThreadPoolBuilder::new();
        if let Some(w) = cli.workers {
            pool = pool.num_threads(w.max(1));
        }
        let pool = pool.build().map_err(|e| LabError::Config {
            line: None,
            msg: format!("cannot start worker pool: {e}"),
        })?;
        let m = pool.install(|| runner::run(&c, &dir))?;
        if c.experiment == Experiment::Duality {
            print_duality(&c)?;
        }
        Ok((m, dir))
    });
    match result {
        Ok((m, dir)) => {
            for c in &m.checks {
                let p = c.p_value.map(|p| format!(" p={p:.4}")).unwrap_or_default();
                println!("{} {}{}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, p, c.detail);
            }
            println!("wrote {} file(s) and manifest.json to {}", m.files.len(), dir.display());
            if m.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;
use sqglab::evolve::{self, StopReason};
use sqglab::multilinear::build_chain;
use sqglab::resonance::{self, SearchOptions};
use sqglab::spectral::{lambda, sigma};
use sqglab::waves::{self, NewtonOptions};
use sqglab_cli::{fmt_f64, manifest_path, validate_config, Run, VERSION};

#[derive(Parser)]
#[command(name = "sqglab", version = VERSION, about = "Numerical laboratory for the 1D radially homogeneous SQG model")]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true, env = "SQGLAB_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Table of the dispersion relation and the symbol of S.
    Dispersion {
        #[arg(long, default_value_t = 50)]
        n_max: i64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact minimum of |λ(n₁) + … + λ(n_p)| over tuples with Σ n_j = 0.
    Resonance {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        bound: i64,
        /// Visit every ordered tuple instead of one per symmetry orbit.
        #[arg(long)]
        unpruned: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Integrate one trajectory and record the energy diagnostics.
    Evolve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Start from a saved state instead of the configured profile.
        #[arg(long)]
        restart: Option<PathBuf>,
        /// Save the final state for a later restart.
        #[arg(long)]
        state_out: Option<PathBuf>,
    },
    /// Corrected-energy time series at several amplitudes and the fitted
    /// scaling exponents.
    Normalform {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.05,0.025")]
        eps: Vec<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Travelling-wave branch by Newton continuation in amplitude.
    Waves {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0.2)]
        xi_max: f64,
        #[arg(long, default_value_t = 40)]
        steps: usize,
        /// Retained harmonics (default 64/m).
        #[arg(long)]
        modes: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Also dump the branch as JSON for exact reloading.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Check a simulation config and print it with defaults filled in.
    CheckConfig {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::FAILURE;
        }
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Dispersion { n_max, out } => dispersion(n_max, &out),
        Command::Resonance {
            p,
            bound,
            unpruned,
            out,
        } => resonance_cmd(p, bound, unpruned, &out),
        Command::Evolve {
            config,
            out,
            seed,
            restart,
            state_out,
        } => evolve_cmd(
            &config,
            &out,
            seed,
            restart.as_deref(),
            state_out.as_deref(),
        ),
        Command::Normalform {
            config,
            out_dir,
            eps,
            seed,
        } => normalform(&config, &out_dir, &eps, seed),
        Command::Waves {
            m,
            xi_max,
            steps,
            modes,
            out,
            json,
        } => waves_cmd(m, xi_max, steps, modes, &out, json.as_deref()),
        Command::CheckConfig { config } => {
            let loaded = validate_config(&config)?;
            println!("{}", serde_json::to_string_pretty(&loaded.config)?);
            Ok(())
        }
    }
}

fn dispersion(n_max: i64, out: &Path) -> Result<()> {
    if n_max < 3 {
        bail!("--n-max must be at least 3, got {n_max}");
    }
    #[derive(Serialize)]
    struct Params {
        n_max: i64,
    }
    let mut run = Run::new("dispersion", Run::params_hash(&Params { n_max })?, None);
    let mut csv = String::from("n,lambda,sigma,lambda_f64,sigma_f64\n");
    for n in 3..=n_max {
        let l = lambda(n)?;
        let s = sigma(n)?;
        writeln!(
            csv,
            "{n},{}/{},{}/{},{},{}",
            l.numer(),
            l.denom(),
            s.numer(),
            s.denom(),
            fmt_f64(resonance::to_f64(&l)),
            fmt_f64(resonance::to_f64(&s))
        )?;
    }
    run.write(out, csv.as_bytes())?;
    run.finish(&manifest_path(out))?;
    Ok(())
}

fn resonance_cmd(p: usize, bound: i64, unpruned: bool, out: &Path) -> Result<()> {
    #[derive(Serialize)]
    struct Params {
        p: usize,
        bound: i64,
        unpruned: bool,
    }
    let mut run = Run::new(
        "resonance",
        Run::params_hash(&Params { p, bound, unpruned })?,
        None,
    );
    let report = resonance::search(p, bound, SearchOptions { pruned: !unpruned })?;
    run.write(out, resonance::certificate_json(&report)?.as_bytes())?;
    run.finish(&manifest_path(out))?;
    eprintln!(
        "p = {p}, |n_j| <= {bound}: min |sum lambda| = {}/{} at {:?}; {} nondegenerate resonances",
        report.min_value.numer(),
        report.min_value.denom(),
        report.argmin.entries(),
        report.exact_zero_tuples.len()
    );
    Ok(())
}

fn evolve_cmd(
    config: &Path,
    out: &Path,
    seed: Option<u64>,
    restart: Option<&Path>,
    state_out: Option<&Path>,
) -> Result<()> {
    let loaded = validate_config(config)?;
    let mut cfg = loaded.config;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let mut run = Run::new("evolve", loaded.sha256, Some(cfg.seed));
    let f0 = match restart {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => evolve::initial_data(&cfg)?,
    };
    let chain = build_chain(cfg.s, cfg.m, cfg.n_max)?;
    let traj = evolve::run_from(&cfg, &f0, &chain, |_, _| false)?;

    let mut csv = Vec::new();
    traj.write_csv(&mut csv)?;
    run.write(out, &csv)?;
    if let Some(path) = state_out {
        let state = traj.final_state().expect("trajectory has a state");
        let mut text = serde_json::to_string_pretty(state)?;
        text.push('\n');
        run.write(path, text.as_bytes())?;
    }
    run.finish(&manifest_path(out))?;
    if let StopReason::Instability { t, reason } = traj.stop {
        bail!("run aborted at t = {t}: {reason} (diagnostics up to that time were written)");
    }
    Ok(())
}

fn normalform(config: &Path, out_dir: &Path, eps: &[f64], seed: Option<u64>) -> Result<()> {
    let loaded = validate_config(config)?;
    let mut cfg = loaded.config;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let mut run = Run::new("normalform", loaded.sha256, Some(cfg.seed));
    let (report, trajectories) = evolve::lifespan_trajectories(eps, &cfg)?;
    for (traj, r) in trajectories.iter().zip(&report.runs) {
        let mut csv = Vec::new();
        traj.write_energy_csv(&mut csv)?;
        run.write(
            &out_dir.join(format!("energies_eps{}.csv", r.epsilon)),
            &csv,
        )?;
    }
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    run.write(&out_dir.join("slopes.json"), text.as_bytes())?;
    run.finish(&out_dir.join("manifest.json"))?;
    let names = [
        "E_s",
        "E_s - M3'",
        "E_s - M3' - M4'",
        "E_s - M3' - M4' - M5'",
    ];
    for (name, slope) in names.iter().zip(report.slopes) {
        match slope {
            Some(s) => eprintln!("slope of |d/dt {name}|: {s:.3}"),
            None => eprintln!("slope of |d/dt {name}|: undetermined"),
        }
    }
    Ok(())
}

fn waves_cmd(
    m: usize,
    xi_max: f64,
    steps: usize,
    modes: Option<usize>,
    out: &Path,
    json: Option<&Path>,
) -> Result<()> {
    let k_modes = modes.unwrap_or_else(|| waves::default_modes(m));
    #[derive(Serialize)]
    struct Params {
        m: usize,
        xi_max: f64,
        steps: usize,
        k_modes: usize,
    }
    let params = Params {
        m,
        xi_max,
        steps,
        k_modes,
    };
    let mut run = Run::new("waves", Run::params_hash(&params)?, None);
    let branch = waves::continue_branch(m, xi_max, steps, k_modes, &NewtonOptions::default())?;
    let mut csv = Vec::new();
    branch.write_csv(&mut csv)?;
    run.write(out, &csv)?;
    if let Some(path) = json {
        let mut text = serde_json::to_string_pretty(&branch)?;
        text.push('\n');
        run.write(path, text.as_bytes())?;
    }
    run.finish(&manifest_path(out))?;
    if let Some(t) = &branch.termination {
        eprintln!(
            "branch stopped at xi = {} (residual {:e}): {}",
            t.xi, t.residual, t.reason
        );
    }
    Ok(())
}

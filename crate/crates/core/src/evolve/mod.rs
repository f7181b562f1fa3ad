//! Time integration of the truncated model with energy diagnostics.

mod config;
mod stepper;

use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub use config::{InitialProfile, SimConfig};
pub use stepper::{linear_flow, step, StepOutput, Stepper};

use crate::error::{Error, Result};
use crate::fit::loglog_slope;
use crate::multilinear::{build_chain, CorrectedEnergy, EnergyLadder};
use crate::spectral::{bilinear, d_alpha_s, hs_norm, sobolev_weight, SpectralField};

/// A run is aborted once `‖f‖_{H^s}` exceeds this multiple of `ε`.
pub const BLOWUP_FACTOR: f64 = 1e3;

/// `cos(mα)` scaled to `‖f‖_{H^s} = ε`.
pub fn single_mode(m: usize, n_max: usize, s: f64, epsilon: f64) -> Result<SpectralField> {
    let f = SpectralField::cosine(m, n_max, m as i64, 1.0)?;
    Ok(f.scaled(epsilon / hs_norm(&f, s)))
}

/// Modes `m, 2m, …, n_max` with amplitudes `⟨n⟩^{−s−1}` and seeded phases,
/// scaled to `‖f‖_{H^s} = ε`.
pub fn random_band(
    m: usize,
    n_max: usize,
    s: f64,
    epsilon: f64,
    seed: u64,
) -> Result<SpectralField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs = (1..=n_max / m)
        .map(|k| {
            let n = (k * m) as i64;
            let amp = sobolev_weight(n, -(s + 1.0) / 2.0);
            Complex64::from_polar(amp, rng.gen_range(0.0..TAU))
        })
        .collect();
    let f = SpectralField::from_coeffs(m, coeffs)?;
    if f.n_max() != n_max {
        return Err(Error::InvalidTruncation { m, n_max });
    }
    Ok(f.scaled(epsilon / hs_norm(&f, s)))
}

pub fn initial_data(cfg: &SimConfig) -> Result<SpectralField> {
    cfg.validate()?;
    match cfg.initial_profile {
        InitialProfile::SingleMode => single_mode(cfg.m, cfg.n_max, cfg.s, cfg.epsilon),
        InitialProfile::RandomBand => random_band(cfg.m, cfg.n_max, cfg.s, cfg.epsilon, cfg.seed),
    }
}

/// The right-hand side `−∂α S f + N(f)` (or only the linear part) and the
/// mean of the nonlinearity.
pub fn vector_field(f: &SpectralField, linear_only: bool) -> Result<(SpectralField, f64)> {
    let linear = d_alpha_s(f).scaled(-1.0);
    if linear_only {
        return Ok((linear, 0.0));
    }
    let (n, mean) = bilinear(f, f)?;
    Ok((n.add_scaled(&linear, 1.0)?, mean))
}

/// One diagnostic record.
#[derive(Clone, Debug, Serialize)]
pub struct Diagnostics {
    pub t: f64,
    /// `E_s` and its corrections.
    pub energies: EnergyLadder,
    /// Time derivatives of the same four quantities along the flow.
    pub derivatives: EnergyLadder,
    pub hs_norm: f64,
    /// `|mean of f|`, accumulated from the mode-zero part of the nonlinearity.
    pub mean_res: f64,
    /// Spectral content off the multiples of `m`.
    pub sym_res: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StopReason {
    Completed,
    /// The caller's stopping condition fired.
    Threshold,
    Instability {
        t: f64,
        reason: String,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SpectralField>,
    pub diagnostics: Vec<Diagnostics>,
    pub stop: StopReason,
}

impl Trajectory {
    pub fn final_state(&self) -> Option<&SpectralField> {
        self.states.last()
    }

    pub fn final_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    /// CSV with columns `t,Es,Es_c3,Es_c34,Es_c345,hs_norm,mean_res,sym_res`.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "t,Es,Es_c3,Es_c34,Es_c345,hs_norm,mean_res,sym_res")?;
        for d in &self.diagnostics {
            let e = &d.energies;
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                d.t, e.base, e.cubic, e.quartic, e.quintic, d.hs_norm, d.mean_res, d.sym_res
            )?;
        }
        Ok(())
    }

    /// CSV of the four energies and their time derivatives:
    /// `t,Es,Es_c3,Es_c34,Es_c345,dEs,dEs_c3,dEs_c34,dEs_c345`.
    pub fn write_energy_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "t,Es,Es_c3,Es_c34,Es_c345,dEs,dEs_c3,dEs_c34,dEs_c345")?;
        for d in &self.diagnostics {
            write!(out, "{:.16e}", d.t)?;
            for v in d
                .energies
                .as_array()
                .into_iter()
                .chain(d.derivatives.as_array())
            {
                write!(out, ",{v:.16e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

fn diagnose(
    t: f64,
    f: &SpectralField,
    mean: f64,
    s: f64,
    chain: &CorrectedEnergy,
    linear_only: bool,
) -> Result<Diagnostics> {
    let (f_t, _) = vector_field(f, linear_only)?;
    Ok(Diagnostics {
        t,
        energies: chain.values(f)?,
        derivatives: chain.derivatives(f, &f_t)?,
        hs_norm: hs_norm(f, s),
        mean_res: mean.abs(),
        sym_res: f.symmetry_residual(),
    })
}

/// Integrates from `f0` under `cfg`, recording every `diagnostics_stride`
/// steps and at the end. `stop` is checked after every step; when it
/// returns true the run ends with [`StopReason::Threshold`]. Instability
/// ends the run early with the last valid state recorded.
pub fn run_from(
    cfg: &SimConfig,
    f0: &SpectralField,
    chain: &CorrectedEnergy,
    mut stop: impl FnMut(f64, &SpectralField) -> bool,
) -> Result<Trajectory> {
    cfg.validate()?;
    if f0.m() != cfg.m || f0.n_max() != cfg.n_max {
        return Err(Error::MismatchedTruncation(
            cfg.m,
            cfg.n_max,
            f0.m(),
            f0.n_max(),
        ));
    }
    if chain.m() != cfg.m || chain.n_max() != cfg.n_max {
        return Err(Error::MismatchedTruncation(
            cfg.m,
            cfg.n_max,
            chain.m(),
            chain.n_max(),
        ));
    }
    let steps = cfg.num_steps();
    let stepper = Stepper::new(cfg.m, cfg.n_max, cfg.dt, cfg.linear_only)?;
    let last_dt = cfg.t_end - (steps - 1) as f64 * cfg.dt;
    let last_stepper = Stepper::new(cfg.m, cfg.n_max, last_dt, cfg.linear_only)?;
    let limit = BLOWUP_FACTOR * cfg.epsilon;

    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        diagnostics: Vec::new(),
        stop: StopReason::Completed,
    };
    let record = |traj: &mut Trajectory, t: f64, f: &SpectralField, mean: f64| -> Result<()> {
        traj.diagnostics
            .push(diagnose(t, f, mean, cfg.s, chain, cfg.linear_only)?);
        traj.times.push(t);
        traj.states.push(f.clone());
        Ok(())
    };

    let mut f = f0.clone();
    let mut mean = 0.0;
    let mut t = 0.0;
    record(&mut traj, t, &f, mean)?;
    for k in 1..=steps {
        let st = if k == steps { &last_stepper } else { &stepper };
        let next = match st.step(&f) {
            Ok(out) => out,
            Err(Error::Instability { reason, .. }) => {
                traj.stop = StopReason::Instability { t, reason };
                break;
            }
            Err(e) => return Err(e),
        };
        let norm = hs_norm(&next.field, cfg.s);
        if norm > limit {
            traj.stop = StopReason::Instability {
                t,
                reason: format!("H^s norm {norm:e} exceeds {limit:e}"),
            };
            break;
        }
        f = next.field;
        mean += next.mean_increment;
        t = if k == steps {
            cfg.t_end
        } else {
            k as f64 * cfg.dt
        };

        let halt = stop(t, &f);
        if halt || k == steps || k % cfg.diagnostics_stride == 0 {
            record(&mut traj, t, &f, mean)?;
        }
        if halt {
            traj.stop = StopReason::Threshold;
            break;
        }
    }
    if *traj.times.last().expect("initial record") != t {
        record(&mut traj, t, &f, mean)?;
    }
    Ok(traj)
}

/// Runs `cfg` from its configured initial data. Instability is an error
/// carrying the last valid time.
pub fn run(cfg: &SimConfig) -> Result<Trajectory> {
    let chain = build_chain(cfg.s, cfg.m, cfg.n_max)?;
    run_with_chain(cfg, &chain)
}

pub fn run_with_chain(cfg: &SimConfig, chain: &CorrectedEnergy) -> Result<Trajectory> {
    let traj = run_from(cfg, &initial_data(cfg)?, chain, |_, _| false)?;
    match traj.stop {
        StopReason::Instability { t, reason } => Err(Error::Instability { t, reason }),
        _ => Ok(traj),
    }
}

/// Outcome of one amplitude in [`lifespan_experiment`].
#[derive(Clone, Debug, Serialize)]
pub struct LifespanRun {
    pub epsilon: f64,
    /// First time with `‖f‖_{H^s} ≥ 2ε`, if reached before `t_end`.
    pub doubling_time: Option<f64>,
    pub t_reached: f64,
    /// Time averages of `|d/dt|` of `E_s`, `E_s − M₃′`, `E_s − M₃′ − M₄′`
    /// and `E_s − M₃′ − M₄′ − M₅′` over the recorded diagnostics.
    pub mean_abs_derivative: [f64; 4],
    pub max_hs_norm: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LifespanReport {
    pub runs: Vec<LifespanRun>,
    /// Log-log slopes of `mean_abs_derivative` against `ε`, per level.
    pub slopes: [Option<f64>; 4],
    /// Whether doubling times never decrease as `ε` decreases (runs that
    /// never doubled count as `t_end`).
    pub doubling_monotone: bool,
}

/// Runs `template` at each amplitude (same seed, so the data are `ε·f₀`)
/// until the `H^s` norm doubles or `t_end`, and fits the scaling of the
/// energy derivatives.
pub fn lifespan_experiment(eps_list: &[f64], template: &SimConfig) -> Result<LifespanReport> {
    lifespan_trajectories(eps_list, template).map(|(report, _)| report)
}

/// [`lifespan_experiment`] together with the trajectory of every run.
pub fn lifespan_trajectories(
    eps_list: &[f64],
    template: &SimConfig,
) -> Result<(LifespanReport, Vec<Trajectory>)> {
    if eps_list.len() < 2 {
        return Err(Error::InvalidInput(
            "need at least two amplitudes".to_owned(),
        ));
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidInput(
            "amplitudes must be strictly decreasing".to_owned(),
        ));
    }
    template.validate()?;
    let chain = build_chain(template.s, template.m, template.n_max)?;
    let (runs, trajectories): (Vec<LifespanRun>, Vec<Trajectory>) = eps_list
        .par_iter()
        .map(|&epsilon| {
            let cfg = SimConfig {
                epsilon,
                ..template.clone()
            };
            let f0 = initial_data(&cfg)?;
            let s = cfg.s;
            let traj = run_from(&cfg, &f0, &chain, |_, f| hs_norm(f, s) >= 2.0 * epsilon)?;
            if let StopReason::Instability { t, reason } = traj.stop {
                return Err(Error::Instability { t, reason });
            }
            let count = traj.diagnostics.len() as f64;
            let mut mean_abs = [0.0; 4];
            for d in &traj.diagnostics {
                for (acc, v) in mean_abs.iter_mut().zip(d.derivatives.as_array()) {
                    *acc += v.abs() / count;
                }
            }
            let run = LifespanRun {
                epsilon,
                doubling_time: (traj.stop == StopReason::Threshold).then(|| traj.final_time()),
                t_reached: traj.final_time(),
                mean_abs_derivative: mean_abs,
                max_hs_norm: traj
                    .diagnostics
                    .iter()
                    .map(|d| d.hs_norm)
                    .fold(0.0, f64::max),
            };
            Ok((run, traj))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();

    let eps: Vec<f64> = runs.iter().map(|r| r.epsilon).collect();
    let slopes = std::array::from_fn(|level| {
        let y: Vec<f64> = runs.iter().map(|r| r.mean_abs_derivative[level]).collect();
        loglog_slope(&eps, &y)
    });
    let lifetimes: Vec<f64> = runs
        .iter()
        .map(|r| r.doubling_time.unwrap_or(template.t_end))
        .collect();
    let report = LifespanReport {
        doubling_monotone: lifetimes.windows(2).all(|w| w[1] >= w[0]),
        runs,
        slopes,
    };
    Ok((report, trajectories))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_data_normalized() {
        let f = random_band(3, 24, 3.0, 0.1, 7).unwrap();
        assert!((hs_norm(&f, 3.0) - 0.1).abs() < 1e-15);
        let g = single_mode(4, 24, 2.0, 0.05).unwrap();
        assert!((hs_norm(&g, 2.0) - 0.05).abs() < 1e-15);
        assert_eq!(g.coeff(4).im, 0.0);
        let h = random_band(3, 24, 3.0, 0.1, 7).unwrap();
        assert_eq!(f, h);
    }

    #[test]
    fn energy_derivative_matches_centered_difference() {
        let cfg = SimConfig {
            dt: 0.01,
            t_end: 0.5,
            diagnostics_stride: 1,
            ..SimConfig::default()
        };
        let traj = run(&cfg).unwrap();
        let d = &traj.diagnostics;
        for i in 1..d.len() - 1 {
            let fd = (d[i + 1].energies.base - d[i - 1].energies.base) / (2.0 * cfg.dt);
            let exact = d[i].derivatives.base;
            assert!((fd - exact).abs() < 1e-3 * exact.abs().max(1e-8) + 1e-12);
        }
    }

    #[test]
    fn records_and_residuals() {
        let cfg = SimConfig {
            t_end: 1.0,
            dt: 0.03,
            diagnostics_stride: 7,
            ..SimConfig::default()
        };
        let traj = run(&cfg).unwrap();
        assert_eq!(traj.stop, StopReason::Completed);
        assert_eq!(traj.final_time(), 1.0);
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(traj.times.len(), traj.diagnostics.len());
        assert!(traj
            .diagnostics
            .iter()
            .all(|d| d.sym_res == 0.0 && d.mean_res < 1e-14));
        let mut csv = Vec::new();
        traj.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().count(), traj.diagnostics.len() + 1);
    }

    #[test]
    fn blowup_is_reported() {
        let cfg = SimConfig {
            epsilon: 50.0,
            dt: 0.5,
            t_end: 50.0,
            ..SimConfig::default()
        };
        assert!(matches!(run(&cfg), Err(Error::Instability { .. })));
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the initial profile is generated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialProfile {
    /// `cos(mα)`.
    SingleMode,
    /// All modes `m, 2m, …, n_max` with amplitudes `⟨n⟩^{−s−1}` and phases
    /// drawn from the seed.
    #[default]
    RandomBand,
}

/// Parameters of one simulation. Missing JSON fields take their defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub m: usize,
    pub n_max: usize,
    /// Sobolev index of the diagnostic energies.
    pub s: f64,
    pub dt: f64,
    pub t_end: f64,
    /// `H^s` norm of the initial data.
    pub epsilon: f64,
    pub seed: u64,
    pub initial_profile: InitialProfile,
    /// Steps between recorded diagnostics.
    pub diagnostics_stride: usize,
    /// Drop the nonlinearity and follow the exact linear flow.
    pub linear_only: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            m: 3,
            n_max: 24,
            s: 3.0,
            dt: 0.01,
            t_end: 10.0,
            epsilon: 0.1,
            seed: 0,
            initial_profile: InitialProfile::RandomBand,
            diagnostics_stride: 10,
            linear_only: false,
        }
    }
}

impl SimConfig {
    /// Every violated constraint, as `field: message`.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.m < 3 {
            out.push(format!("m: must be at least 3, got {}", self.m));
        }
        if self.m > 0 && (self.n_max < self.m || !self.n_max.is_multiple_of(self.m)) {
            out.push(format!(
                "n_max: must be a positive multiple of m = {}, got {}",
                self.m, self.n_max
            ));
        }
        if self.s.is_nan() || self.s < 0.0 {
            out.push(format!("s: must be non-negative, got {}", self.s));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            out.push(format!("dt: must be positive, got {}", self.dt));
        }
        if !(self.t_end >= self.dt && self.t_end.is_finite()) {
            out.push(format!("t_end: must be at least dt, got {}", self.t_end));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            out.push(format!("epsilon: must be positive, got {}", self.epsilon));
        }
        if self.diagnostics_stride == 0 {
            out.push("diagnostics_stride: must be at least 1".to_owned());
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidInput(v.join("; ")))
        }
    }

    /// Number of steps to reach `t_end`; the last one may be shortened.
    pub fn num_steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(1.0) as usize
    }
}

//! JSON run configuration.
//!
//! Physical values are entered the way they are quoted: linear `ω/2π`
//! frequencies in GHz, lifetimes in μs. Unknown keys are rejected, every
//! default is spelled out here, and the validated config hashes to a short
//! fingerprint that is embedded in every output row so results can always
//! be traced back to their inputs.
//!
//! Defaults (applied when a key is omitted):
//!
//! | key | default |
//! |-----|---------|
//! | `system.g2_ghz` | solved from the gate condition at `system.k` |
//! | `system.g1_tilde_ghz` / `g2_tilde_ghz` | equal to `g1` / `g2` |
//! | `system.cat_amplitude` | 0.5 |
//! | `system.n1_trunc` / `n2_trunc` | 6 / 12 |
//! | `system.k` | 6 |
//! | `decoherence.t_scale_us` | [5, 10, 15] |
//! | `decoherence.kappa_inv_us` | [10, 50, 136, 300] |
//! | `simulation.dt_ns` | phase budget / fastest coupling phase |
//! | `simulation.phase_budget_rad` | 0.05 |
//! | `simulation.t_final_ns` | the gate time |
//! | `simulation.record_stride` | 0 (endpoints only) |
//! | `simulation.renormalize` | false |
//! | `simulation.positivity_check_stride` | 1000 |
//! | `simulation.fidelity_convention` | `amplitude_sqrt` |
//! | `quadrature_n` | 8 |
//! | `workers` | 0 (auto) |
//! | `output.csv_path` | `sweep.csv` |

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::FidelityConvention;
use crate::dynamics::{PropagationConfig, DEFAULT_PHASE_BUDGET, MAX_PHASE_PER_STEP};
use crate::error::{Error, Result};
use crate::hilbert::SpaceSpec;
use crate::model::{derive, solve_g2, DerivedQuantities, SystemParams};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub omega_eg_ghz: f64,
    pub omega_fe_ghz: f64,
    pub omega_fg_ghz: f64,
    pub omega_c1_ghz: f64,
    pub omega_c2_ghz: f64,
    pub g1_ghz: f64,
    /// Omit to solve from the gate condition at `k`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g2_ghz: Option<f64>,
    /// Unwanted couplings; omit to mirror the wanted ones.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g1_tilde_ghz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g2_tilde_ghz: Option<f64>,
    #[serde(default = "default_cat_amplitude")]
    pub cat_amplitude: f64,
    #[serde(default = "default_n1_trunc")]
    pub n1_trunc: usize,
    #[serde(default = "default_n2_trunc")]
    pub n2_trunc: usize,
    /// Phase-matching integer of the gate condition.
    #[serde(default = "default_k")]
    pub k: u32,
}

fn default_cat_amplitude() -> f64 {
    0.5
}
fn default_n1_trunc() -> usize {
    6
}
fn default_n2_trunc() -> usize {
    12
}
fn default_k() -> u32 {
    6
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DecoherenceConfig {
    /// Qutrit lifetime scale values T (μs); the relaxation and dephasing
    /// rates follow the fixed ratios of `rates_from_t_scale`.
    #[serde(default = "default_t_scale")]
    pub t_scale_us: Vec<f64>,
    /// Cavity photon lifetimes κ⁻¹ (μs), applied to both cavities.
    #[serde(default = "default_kappa_inv")]
    pub kappa_inv_us: Vec<f64>,
}

fn default_t_scale() -> Vec<f64> {
    vec![5.0, 10.0, 15.0]
}
fn default_kappa_inv() -> Vec<f64> {
    vec![10.0, 50.0, 136.0, 300.0]
}

impl Default for DecoherenceConfig {
    fn default() -> Self {
        Self {
            t_scale_us: default_t_scale(),
            kappa_inv_us: default_kappa_inv(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    /// Integration step; omit to derive from the phase budget.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_ns: Option<f64>,
    /// Phase advance of the fastest coupling term per step when `dt_ns`
    /// is derived.
    #[serde(default = "default_phase_budget")]
    pub phase_budget_rad: f64,
    /// Evolution time; omit to use the gate time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_final_ns: Option<f64>,
    #[serde(default)]
    pub record_stride: usize,
    #[serde(default)]
    pub renormalize: bool,
    #[serde(default = "default_positivity_stride")]
    pub positivity_check_stride: usize,
    #[serde(default = "default_convention")]
    pub fidelity_convention: FidelityConvention,
}

fn default_phase_budget() -> f64 {
    DEFAULT_PHASE_BUDGET
}
fn default_positivity_stride() -> usize {
    1000
}
fn default_convention() -> FidelityConvention {
    FidelityConvention::AmplitudeSqrt
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            dt_ns: None,
            phase_budget_rad: default_phase_budget(),
            t_final_ns: None,
            record_stride: 0,
            renormalize: false,
            positivity_check_stride: default_positivity_stride(),
            fidelity_convention: default_convention(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_csv_path")]
    pub csv_path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json_path: Option<String>,
}

fn default_csv_path() -> String {
    "sweep.csv".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            csv_path: default_csv_path(),
            json_path: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    #[serde(default)]
    pub decoherence: DecoherenceConfig,
    #[serde(default)]
    pub simulation: SimulationConfig,
    #[serde(default = "default_quadrature")]
    pub quadrature_n: usize,
    /// Worker thread count; 0 uses all available cores. The
    /// `CATGATE_THREADS` environment variable overrides this and any
    /// `--workers` flag.
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_quadrature() -> usize {
    8
}

impl RunConfig {
    /// The reference design as a config, identical to the shipped
    /// `configs/reference.json`.
    pub fn reference() -> Self {
        Self {
            system: SystemConfig {
                omega_eg_ghz: 5.0,
                omega_fe_ghz: 7.5,
                omega_fg_ghz: 12.5,
                omega_c1_ghz: 11.0,
                omega_c2_ghz: 5.85,
                g1_ghz: 0.15,
                g2_ghz: None,
                g1_tilde_ghz: None,
                g2_tilde_ghz: None,
                cat_amplitude: 0.5,
                n1_trunc: 6,
                n2_trunc: 12,
                k: 6,
            },
            decoherence: DecoherenceConfig::default(),
            simulation: SimulationConfig::default(),
            quadrature_n: 8,
            workers: 0,
            output: OutputConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let key = |k: &str, reason: String| Error::Config {
            key: k.into(),
            reason,
        };
        if self.decoherence.t_scale_us.is_empty() {
            return Err(key("decoherence.t_scale_us", "range must be non-empty".into()));
        }
        if self.decoherence.kappa_inv_us.is_empty() {
            return Err(key(
                "decoherence.kappa_inv_us",
                "range must be non-empty".into(),
            ));
        }
        for (name, list) in [
            ("decoherence.t_scale_us", &self.decoherence.t_scale_us),
            ("decoherence.kappa_inv_us", &self.decoherence.kappa_inv_us),
        ] {
            if let Some(v) = list.iter().find(|v| **v <= 0.0 || !v.is_finite()) {
                return Err(key(name, format!("entries must be positive, found {v}")));
            }
        }
        if self.quadrature_n < 2 {
            return Err(key(
                "quadrature_n",
                format!("must be at least 2, got {}", self.quadrature_n),
            ));
        }
        let budget = self.simulation.phase_budget_rad;
        if !(budget > 0.0 && budget <= MAX_PHASE_PER_STEP) {
            return Err(key(
                "simulation.phase_budget_rad",
                format!("must lie in (0, {MAX_PHASE_PER_STEP}], got {budget}"),
            ));
        }
        if let Some(dt) = self.simulation.dt_ns {
            if dt <= 0.0 || !dt.is_finite() {
                return Err(key("simulation.dt_ns", format!("must be positive, got {dt}")));
            }
        }
        if let Some(t) = self.simulation.t_final_ns {
            if t < 0.0 || !t.is_finite() {
                return Err(key(
                    "simulation.t_final_ns",
                    format!("must be non-negative, got {t}"),
                ));
            }
        }
        // the system block re-validates through the model layer
        self.build_system()
            .map(|_| ())
            .map_err(|e| match e {
                Error::Config { .. } => e,
                other => key("system", other.to_string()),
            })
    }

    /// Materialize the physical parameter set, filling the solved and
    /// mirrored defaults. Returns the parameters together with notes about
    /// every auto-filled value.
    pub fn build_system(&self) -> Result<(SystemParams, Vec<String>)> {
        let sys = &self.system;
        let mut notes = Vec::new();
        let space = SpaceSpec::new(sys.n1_trunc, sys.n2_trunc)?;
        let delta1 = sys.omega_fg_ghz - sys.omega_c1_ghz;
        let delta2 = sys.omega_fe_ghz - sys.omega_c2_ghz;
        if delta1 <= 0.0 {
            return Err(Error::Config {
                key: "system.omega_c1_ghz".into(),
                reason: format!("detuning must be positive: delta1 = {delta1}"),
            });
        }
        if delta2 <= 0.0 {
            return Err(Error::Config {
                key: "system.omega_c2_ghz".into(),
                reason: format!("detuning must be positive: delta2 = {delta2}"),
            });
        }
        let g2 = match sys.g2_ghz {
            Some(g2) => g2,
            None => {
                let solved = solve_g2(delta1, delta2, delta2 - delta1, sys.k)?;
                notes.push(format!(
                    "g2_ghz auto-filled from the gate condition at k = {}: {:.6} GHz",
                    sys.k, solved
                ));
                solved
            }
        };
        let g1_tilde = sys.g1_tilde_ghz.unwrap_or(sys.g1_ghz);
        let g2_tilde = sys.g2_tilde_ghz.unwrap_or(g2);
        if sys.g1_tilde_ghz.is_none() {
            notes.push(format!("g1_tilde_ghz defaulted to g1 = {} GHz", sys.g1_ghz));
        }
        if sys.g2_tilde_ghz.is_none() {
            notes.push(format!("g2_tilde_ghz defaulted to g2 = {g2:.6} GHz"));
        }
        let params = SystemParams {
            omega_eg: sys.omega_eg_ghz,
            omega_fe: sys.omega_fe_ghz,
            omega_fg: sys.omega_fg_ghz,
            omega_c1: sys.omega_c1_ghz,
            omega_c2: sys.omega_c2_ghz,
            g1: sys.g1_ghz,
            g2,
            g1_tilde,
            g2_tilde,
            cat_amplitude: sys.cat_amplitude,
            space,
        };
        params.validate()?;
        Ok((params, notes))
    }

    pub fn derived(&self, params: &SystemParams) -> Result<DerivedQuantities> {
        derive(params, self.system.k)
    }

    /// Propagation settings for a given fastest phase rate (rad/ns) and
    /// the gate time.
    pub fn propagation(&self, max_phase_rate: f64, t_gate_ns: f64) -> PropagationConfig {
        let sim = &self.simulation;
        let dt_ns = sim.dt_ns.unwrap_or_else(|| {
            if max_phase_rate > 0.0 {
                sim.phase_budget_rad / max_phase_rate
            } else {
                t_gate_ns.max(1.0) / 1e4
            }
        });
        PropagationConfig {
            dt_ns,
            t_final_ns: sim.t_final_ns.unwrap_or(t_gate_ns),
            record_stride: sim.record_stride,
            renormalize: sim.renormalize,
            positivity_check_stride: sim.positivity_check_stride,
        }
    }

    /// Worker count after the `CATGATE_THREADS` override.
    pub fn effective_workers(&self) -> usize {
        match std::env::var("CATGATE_THREADS") {
            Ok(value) => value.parse().unwrap_or(self.workers),
            Err(_) => self.workers,
        }
    }

    /// The actual thread count a run will use: the environment override,
    /// then the config value, with 0 resolving to all available cores.
    pub fn resolved_workers(&self) -> usize {
        crate::workpool::resolve_workers(self.effective_workers())
    }

    /// Short fingerprint of the validated config; embedded in every
    /// output row.
    pub fn config_hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        let mut hex = String::with_capacity(16);
        for byte in digest.iter().take(8) {
            hex.push_str(&format!("{byte:02x}"));
        }
        hex
    }
}

/// Parse and validate a config from JSON text.
pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let config: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config {
        key: "<json>".into(),
        reason: format!("malformed config: {e}"),
    })?;
    config.validate()?;
    Ok(config)
}

/// Load and validate a config file.
pub fn parse_config(path: &std::path::Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
        key: path.display().to_string(),
        reason: format!("cannot read config file: {e}"),
    })?;
    let config: RunConfig = serde_json::from_str(&text).map_err(|e| Error::Config {
        key: path.display().to_string(),
        reason: format!("malformed config: {e}"),
    })?;
    config.validate()?;
    Ok(config)
}

//! The fidelity-versus-decoherence parameter sweep.
//!
//! One sweep cell is a `(T, κ⁻¹)` pair: qutrit relaxation and dephasing
//! rates follow the fixed ratios of
//! [`rates_from_t_scale`]; both
//! cavities decay at `1/κ⁻¹`, and the cell's figure of merit is the
//! angle-averaged gate fidelity under the full coupling Hamiltonian.
//! Cells × quadrature points form one flat work queue; results merge in
//! fixed grid order with compensated summation, so the output is
//! numerically identical for any worker count. A failed cell is recorded
//! in its row (the numeric columns go NaN) and the sweep continues.
//!
//! CSV schema, fixed: `T_us,kappa_inv_us,mean_fidelity,leakage,
//! trace_drift,wall_time_s,config_hash`, header row mandatory, UTF-8, LF
//! line endings. Wall time is the summed single-thread compute time of
//! the cell's runs — the one column that is not bit-reproducible.

use serde::Serialize;

use crate::analysis::{gate_fidelity_at, EvolutionMode, GateScenario, GridSample};
use crate::config::RunConfig;
use crate::dynamics::rates_from_t_scale;
use crate::error::Result;
use crate::states::LogicalAngles;
use crate::workpool::{kahan_mean, run_indexed};

/// One `(T, κ⁻¹)` cell of the sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub t_us: f64,
    pub kappa_inv_us: f64,
    pub mean_fidelity: f64,
    pub leakage: f64,
    pub trace_drift: f64,
    pub wall_time_s: f64,
    pub config_hash: String,
    /// Populated when the cell failed; the numeric columns are NaN then.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

struct SweepPlan {
    cells: Vec<(f64, f64)>,
    quadrature_n: usize,
}

impl SweepPlan {
    fn from_config(config: &RunConfig) -> Self {
        let mut cells = Vec::new();
        for &t in &config.decoherence.t_scale_us {
            for &kappa_inv in &config.decoherence.kappa_inv_us {
                cells.push((t, kappa_inv));
            }
        }
        Self {
            cells,
            quadrature_n: config.quadrature_n,
        }
    }
}

/// Run the full sweep described by a config.
pub fn run_sweep(config: &RunConfig) -> Result<Vec<SweepResult>> {
    config.validate()?;
    let (params, _notes) = config.build_system()?;
    let derived = config.derived(&params)?;
    let h = crate::hamiltonians::build_h_full(&params, &params.space);
    let prop = config.propagation(h.max_phase_rate(), derived.t_gate_ns);
    let convention = config.simulation.fidelity_convention;
    let workers = config.effective_workers();
    let hash = config.config_hash();

    let plan = SweepPlan::from_config(config);
    let nq = plan.quadrature_n;
    let points_per_cell = nq * nq;
    let total_items = plan.cells.len() * points_per_cell;
    let tau = std::f64::consts::TAU;

    // Each item is one (cell, quadrature point) master-equation run. Item
    // failures are values, not errors, so one bad cell cannot abort the
    // queue.
    let items: Vec<(std::result::Result<GridSample, String>, f64)> =
        run_indexed(total_items, workers, |index| {
            let cell = index / points_per_cell;
            let point = index % points_per_cell;
            let (t_us, kappa_inv_us) = plan.cells[cell];
            let started = std::time::Instant::now();
            let outcome = (|| -> Result<GridSample> {
                let rates = rates_from_t_scale(t_us)?.with_cavity_lifetime(kappa_inv_us)?;
                let scenario = GateScenario {
                    params: params.clone(),
                    derived,
                    mode: EvolutionMode::Open(rates),
                    prop,
                    convention,
                    workers: 1,
                };
                let angles = LogicalAngles::new(
                    ((point / nq) as f64 + 0.5) * tau / nq as f64,
                    ((point % nq) as f64 + 0.5) * tau / nq as f64,
                );
                gate_fidelity_at(&scenario, &angles)
            })();
            Ok((
                outcome.map_err(|e| e.to_string()),
                started.elapsed().as_secs_f64(),
            ))
        })?;

    let mut results = Vec::with_capacity(plan.cells.len());
    for (cell, &(t_us, kappa_inv_us)) in plan.cells.iter().enumerate() {
        let cell_items = &items[cell * points_per_cell..(cell + 1) * points_per_cell];
        let wall_time_s: f64 = cell_items.iter().map(|(_, dt)| dt).sum();
        let failure = cell_items.iter().find_map(|(r, _)| r.as_ref().err());
        let result = match failure {
            Some(message) => SweepResult {
                t_us,
                kappa_inv_us,
                mean_fidelity: f64::NAN,
                leakage: f64::NAN,
                trace_drift: f64::NAN,
                wall_time_s,
                config_hash: hash.clone(),
                error: Some(message.clone()),
            },
            None => {
                let samples: Vec<&GridSample> =
                    cell_items.iter().map(|(r, _)| r.as_ref().unwrap()).collect();
                SweepResult {
                    t_us,
                    kappa_inv_us,
                    mean_fidelity: kahan_mean(samples.iter().map(|s| s.fidelity)),
                    leakage: kahan_mean(samples.iter().map(|s| s.leakage)),
                    trace_drift: samples.iter().map(|s| s.trace_drift).fold(0.0, f64::max),
                    wall_time_s,
                    config_hash: hash.clone(),
                    error: None,
                }
            }
        };
        results.push(result);
    }
    Ok(results)
}

/// Write sweep rows in the fixed CSV schema.
pub fn write_sweep_csv(results: &[SweepResult], mut w: impl std::io::Write) -> Result<()> {
    writeln!(
        w,
        "T_us,kappa_inv_us,mean_fidelity,leakage,trace_drift,wall_time_s,config_hash"
    )?;
    for r in results {
        writeln!(
            w,
            "{},{},{},{},{},{:.3},{}",
            r.t_us, r.kappa_inv_us, r.mean_fidelity, r.leakage, r.trace_drift, r.wall_time_s,
            r.config_hash
        )?;
    }
    Ok(())
}

/// JSON manifest with the rows, any per-cell errors, and the full config.
pub fn sweep_manifest(results: &[SweepResult], config: &RunConfig) -> serde_json::Value {
    serde_json::json!({
        "config_hash": config.config_hash(),
        "config": config,
        "rows": results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;

    /// A deliberately tiny sweep: coarse quadrature, short evolution, small
    /// space — cheap enough for a unit test while exercising the full path.
    fn tiny_config() -> RunConfig {
        let mut config = RunConfig::reference();
        config.decoherence.t_scale_us = vec![5.0];
        config.decoherence.kappa_inv_us = vec![50.0, 136.0];
        config.quadrature_n = 2;
        config.system.n1_trunc = 3;
        config.system.n2_trunc = 10;
        config.simulation.t_final_ns = Some(12.0);
        config.simulation.positivity_check_stride = 0;
        config.workers = 2;
        config
    }

    #[test]
    fn sweep_shape_and_determinism() {
        let config = tiny_config();
        let first = run_sweep(&config).unwrap();
        assert_eq!(first.len(), 2);
        for row in &first {
            assert!(row.error.is_none());
            assert!(row.mean_fidelity.is_finite());
            assert_eq!(row.config_hash, config.config_hash());
        }
        // fidelity does not decrease with longer cavity lifetime
        assert!(first[1].mean_fidelity >= first[0].mean_fidelity - 1e-12);

        let mut other = tiny_config();
        other.workers = 1;
        let second = run_sweep(&other).unwrap();
        // numeric columns identical across worker counts (hash differs:
        // the worker count is part of the config)
        for (a, b) in first.iter().zip(&second) {
            assert_eq!(a.mean_fidelity.to_bits(), b.mean_fidelity.to_bits());
            assert_eq!(a.leakage.to_bits(), b.leakage.to_bits());
        }
    }

    #[test]
    fn failed_cell_recorded_not_fatal() {
        let mut config = tiny_config();
        // second cell gets an impossible truncation for the cat state
        config.system.cat_amplitude = 2.0;
        config.system.n2_trunc = 4;
        let results = run_sweep(&config).unwrap();
        assert_eq!(results.len(), 2);
        for row in &results {
            assert!(row.error.is_some());
            assert!(row.mean_fidelity.is_nan());
        }
    }

    #[test]
    fn csv_schema_fixed() {
        let rows = vec![SweepResult {
            t_us: 5.0,
            kappa_inv_us: 136.0,
            mean_fidelity: 0.75,
            leakage: 0.01,
            trace_drift: 1e-9,
            wall_time_s: 1.25,
            config_hash: "deadbeefdeadbeef".into(),
            error: None,
        }];
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "T_us,kappa_inv_us,mean_fidelity,leakage,trace_drift,wall_time_s,config_hash"
        );
        assert_eq!(
            lines.next().unwrap(),
            "5,136,0.75,0.01,0.000000001,1.250,deadbeefdeadbeef"
        );
        assert!(!text.contains('\r'));
    }

    #[test]
    fn manifest_embeds_errors() {
        let rows = vec![SweepResult {
            t_us: 5.0,
            kappa_inv_us: 10.0,
            mean_fidelity: f64::NAN,
            leakage: f64::NAN,
            trace_drift: f64::NAN,
            wall_time_s: 0.0,
            config_hash: "00".into(),
            error: Some("boom".into()),
        }];
        let config = RunConfig::reference();
        let manifest = sweep_manifest(&rows, &config);
        assert_eq!(manifest["rows"][0]["error"], "boom");
        assert_eq!(manifest["config_hash"], config.config_hash());
    }
}

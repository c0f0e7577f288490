//! Gate-level results: logical truth tables, pointwise and angle-averaged
//! fidelity, the logical CP/CNOT matrices, and the entangled-state
//! preparation check.
//!
//! The logical basis is `{|0,cat⟩, |0,c̄at⟩, |1,cat⟩, |1,c̄at⟩}` with the
//! qutrit projected onto `|g⟩`; population outside that four-dimensional
//! subspace is reported as leakage, never silently renormalized away.
//!
//! The angle-averaged fidelity is
//!
//! ```text
//! F = (1/2π)² ∫∫ √(⟨ψ_id(θ,φ)| ρ |ψ_id(θ,φ)⟩) dθ dφ
//! ```
//!
//! evaluated with the midpoint rule on a uniform grid; every grid point is
//! an independent propagation. The square root makes this an
//! amplitude-like fidelity; [`FidelityConvention::SquaredOverlap`] exposes
//! the squared variant for sensitivity analysis only — reported numbers
//! use the square root unless stated otherwise.

use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::{
    evolve_lindblad, evolve_unitary, ChannelSet, PropagationConfig,
};
use crate::error::{Error, Result};
use crate::hamiltonians::{build_h_full, closed_form_gate_unitary};
use crate::hilbert::SpaceSpec;
use crate::model::{DecoherenceParams, DerivedQuantities, SystemParams};
use crate::numkernel::ComplexMatrix;
use crate::states::{
    density_from_pure, ideal_output, logical_basis, logical_basis_two_mode, logical_input,
    DensityMatrix, LogicalAngles, StateVector,
};
use crate::workpool::{kahan_mean, run_indexed};

/// Which functional of the ideal-state overlap is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FidelityConvention {
    /// `√(⟨ψ_id|ρ|ψ_id⟩)` — the reporting convention of the model.
    #[default]
    AmplitudeSqrt,
    /// `⟨ψ_id|ρ|ψ_id⟩`, the more common squared overlap. Not used for
    /// reported numbers; sensitivity analysis only.
    SquaredOverlap,
}

/// 4×4 logical truth table with the weight lost from the logical subspace.
#[derive(Debug, Clone)]
pub struct TruthTable {
    /// `entries[i][j] = ⟨logical_i | evolved(logical_j)⟩`.
    pub entries: ComplexMatrix,
    /// `1 − Σ_ij |T_ij|²/4`: average population outside the logical
    /// subspace across the four columns.
    pub leakage: f64,
}

impl TruthTable {
    fn from_entries(entries: ComplexMatrix) -> Self {
        let frobenius = entries.frobenius_norm();
        let leakage = 1.0 - frobenius * frobenius / 4.0;
        Self { entries, leakage }
    }

    /// More than 5% of the population left the logical subspace: the
    /// table no longer describes a two-qubit gate faithfully.
    pub fn leakage_flagged(&self) -> bool {
        self.leakage > 0.05
    }

    pub fn diagonal(&self) -> [Complex64; 4] {
        [
            self.entries[(0, 0)],
            self.entries[(1, 1)],
            self.entries[(2, 2)],
            self.entries[(3, 3)],
        ]
    }

    pub fn max_off_diagonal(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    worst = worst.max(self.entries[(i, j)].norm());
                }
            }
        }
        worst
    }

    pub fn is_unitary_within(&self, tol: f64) -> bool {
        let gram = self
            .entries
            .dagger()
            .matmul(&self.entries)
            .expect("4x4");
        crate::numkernel::frobenius_distance(&gram, &ComplexMatrix::identity(4))
            .expect("same shape")
            < tol
    }

    /// JSON form with complex entries as `[re, im]` pairs.
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<Vec<[f64; 2]>> = (0..4)
            .map(|i| {
                (0..4)
                    .map(|j| {
                        let z = self.entries[(i, j)];
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect();
        serde_json::json!({
            "basis": ["0,cat", "0,catbar", "1,cat", "1,catbar"],
            "entries": rows,
            "leakage": self.leakage,
        })
    }
}

/// Truth table of the closed-form diagonal gate unitary at time `t_ns`.
pub fn truth_table_closed_form(
    derived: &DerivedQuantities,
    cat_amp: f64,
    space: &SpaceSpec,
    t_ns: f64,
) -> Result<TruthTable> {
    let u = closed_form_gate_unitary(derived, space, t_ns)?;
    let basis = logical_basis_two_mode(cat_amp, space)?;
    let mut entries = ComplexMatrix::zeros(4, 4);
    for (j, input) in basis.iter().enumerate() {
        let evolved = u.mat_vec(input.amplitudes())?;
        for (i, probe) in basis.iter().enumerate() {
            entries[(i, j)] = probe
                .amplitudes()
                .iter()
                .zip(&evolved)
                .map(|(a, b)| a.conj() * b)
                .sum();
        }
    }
    Ok(TruthTable::from_entries(entries))
}

/// Truth table from closed-system (Schrödinger) evolution of the four
/// logical inputs under the full coupling Hamiltonian.
pub fn truth_table_closed(
    params: &SystemParams,
    space: &SpaceSpec,
    cfg: &PropagationConfig,
    workers: usize,
) -> Result<TruthTable> {
    let h = build_h_full(params, space);
    let basis = logical_basis(params.cat_amplitude, space)?;
    let finals = run_indexed(4, workers, |j| {
        let run = evolve_unitary(&h, &basis[j], space, cfg)?;
        Ok(run.final_amplitudes)
    })?;
    let mut entries = ComplexMatrix::zeros(4, 4);
    for (j, evolved) in finals.iter().enumerate() {
        for (i, probe) in basis.iter().enumerate() {
            entries[(i, j)] = probe
                .amplitudes()
                .iter()
                .zip(evolved)
                .map(|(a, b)| a.conj() * b)
                .sum();
        }
    }
    Ok(TruthTable::from_entries(entries))
}

/// Truth table from open-system evolution.
///
/// Ten master-equation runs reconstruct the linear action of the channel
/// on the logical dyads: the four basis projectors give the populations,
/// and for each column j the two superposition seeds `(ψ₀ + ψ_j)/√2` and
/// `(ψ₀ + iψ_j)/√2` recover `Λ(|ψ_j⟩⟨ψ_0|)` exactly, which anchors every
/// column's phase to the first column (a global phase remains
/// unobservable, as it must). Entries are normalized so that
/// `T[0][0] = √(⟨log_0|Λ(ρ_0)|log_0⟩)`.
pub fn truth_table_open(
    params: &SystemParams,
    space: &SpaceSpec,
    rates: &DecoherenceParams,
    cfg: &PropagationConfig,
    workers: usize,
) -> Result<TruthTable> {
    let h = build_h_full(params, space);
    let channels = ChannelSet::from_decoherence(rates, space)?;
    let basis = logical_basis(params.cat_amplitude, space)?;

    // Seeds 0..3: the logical projectors; 4..9: (re, im) pairs for j = 1..3.
    let mut seeds: Vec<StateVector> = basis.to_vec();
    for j in 1..4 {
        let sum = StateVector::linear_combination(&[
            (Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0), &basis[0]),
            (Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0), &basis[j]),
        ])?;
        seeds.push(StateVector::new(sum.amplitudes().to_vec())?);
        let sum_i = StateVector::linear_combination(&[
            (Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0), &basis[0]),
            (Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2), &basis[j]),
        ])?;
        seeds.push(StateVector::new(sum_i.amplitudes().to_vec())?);
    }

    let finals = run_indexed(seeds.len(), workers, |index| {
        let rho0 = density_from_pure(&seeds[index])?;
        let run = evolve_lindblad(&h, &rho0, &channels, space, cfg)?;
        Ok(run.final_matrix)
    })?;

    let sandwich = |m: &ComplexMatrix, bra: &StateVector, ket: &StateVector| -> Complex64 {
        let applied = m.mat_vec(ket.amplitudes()).expect("dims");
        bra.amplitudes()
            .iter()
            .zip(&applied)
            .map(|(a, b)| a.conj() * b)
            .sum()
    };

    let anchor = sandwich(&finals[0], &basis[0], &basis[0]).re.max(0.0).sqrt();
    if anchor == 0.0 {
        return Err(Error::Numerical(
            "open-system truth table: reference column fully depolarized".into(),
        ));
    }
    let mut entries = ComplexMatrix::zeros(4, 4);
    for k in 0..4 {
        entries[(k, 0)] = sandwich(&finals[0], &basis[k], &basis[0]) / anchor;
    }
    for j in 1..4 {
        let rho_plus = &finals[2 + 2 * j];
        let rho_plus_i = &finals[3 + 2 * j];
        for k in 0..4 {
            // X = Λ(|ψ_j⟩⟨ψ_0|) reconstructed entrywise: X = A − iB with
            // A, B the seed results minus half of each projector result.
            let base = 0.5
                * (sandwich(&finals[0], &basis[k], &basis[0])
                    + sandwich(&finals[j], &basis[k], &basis[0]));
            let a = sandwich(rho_plus, &basis[k], &basis[0]) - base;
            let b = sandwich(rho_plus_i, &basis[k], &basis[0]) - base;
            entries[(k, j)] = (a - Complex64::i() * b) / anchor;
        }
    }
    Ok(TruthTable::from_entries(entries))
}

/// `√(⟨ψ_id|ρ|ψ_id⟩)` (or the squared variant) against the ideal output
/// for the given superposition angles.
pub fn fidelity_pointwise(
    rho: &DensityMatrix,
    angles: &LogicalAngles,
    cat_amp: f64,
    space: &SpaceSpec,
    convention: FidelityConvention,
) -> Result<f64> {
    let psi_id = ideal_output(angles, cat_amp, space)?;
    let overlap = rho.expectation_with(&psi_id)?;
    overlap_to_fidelity(overlap, convention)
}

fn overlap_to_fidelity(overlap: f64, convention: FidelityConvention) -> Result<f64> {
    if overlap < -1e-9 {
        return Err(Error::Numerical(format!(
            "fidelity overlap {overlap:.3e} below zero: density matrix is broken"
        )));
    }
    let overlap = overlap.max(0.0);
    Ok(match convention {
        FidelityConvention::AmplitudeSqrt => overlap.sqrt(),
        FidelityConvention::SquaredOverlap => overlap,
    })
}

/// How the gate is realized when a scenario is simulated.
#[derive(Debug, Clone)]
pub enum EvolutionMode {
    /// The diagonal closed-form unitary.
    ClosedForm,
    /// Schrödinger evolution under the full coupling Hamiltonian
    /// (wanted plus unwanted terms; set the tilde couplings to zero to
    /// drop the unwanted ones).
    Closed,
    /// Master-equation evolution with the given decoherence rates (1/μs).
    Open(DecoherenceParams),
}

/// A fully specified gate simulation: parameters, evolution mode, and
/// integration settings. `prop.t_final_ns` is the gate time unless the
/// caller overrides it.
#[derive(Debug, Clone)]
pub struct GateScenario {
    pub params: SystemParams,
    pub derived: DerivedQuantities,
    pub mode: EvolutionMode,
    pub prop: PropagationConfig,
    pub convention: FidelityConvention,
    pub workers: usize,
}

impl GateScenario {
    pub fn space(&self) -> SpaceSpec {
        self.params.space
    }

    /// The same scenario on a different space (used by convergence probes).
    pub fn with_space(&self, space: SpaceSpec) -> Self {
        let mut scenario = self.clone();
        scenario.params.space = space;
        scenario
    }
}

/// One quadrature point of the fidelity average.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridSample {
    pub theta: f64,
    pub phi: f64,
    pub fidelity: f64,
    /// Population outside the logical subspace at the end of the run.
    pub leakage: f64,
    pub trace_drift: f64,
}

/// Angle-averaged gate fidelity over a midpoint quadrature grid.
#[derive(Debug, Clone, Serialize)]
pub struct FidelityResult {
    pub mean_fidelity: f64,
    pub quadrature_n: usize,
    pub samples: Vec<GridSample>,
    pub max_trace_drift: f64,
    pub mean_leakage: f64,
}

impl FidelityResult {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("serializable")
    }
}

/// Run one grid point of a scenario.
pub fn gate_fidelity_at(scenario: &GateScenario, angles: &LogicalAngles) -> Result<GridSample> {
    let space = scenario.space();
    let cat_amp = scenario.params.cat_amplitude;
    let (fidelity, leakage, trace_drift) = match &scenario.mode {
        EvolutionMode::ClosedForm => {
            let u = closed_form_gate_unitary(&scenario.derived, &space, scenario.prop.t_final_ns)?;
            let basis = logical_basis_two_mode(cat_amp, &space)?;
            let coeffs = angles.coefficients();
            let input = StateVector::linear_combination(
                &coeffs
                    .iter()
                    .zip(&basis)
                    .map(|(&c, s)| (Complex64::new(c, 0.0), s))
                    .collect::<Vec<_>>(),
            )?;
            let evolved = u.mat_vec(input.amplitudes())?;
            let signs = [1.0, 1.0, 1.0, -1.0];
            let ideal = StateVector::linear_combination(
                &coeffs
                    .iter()
                    .zip(signs)
                    .zip(&basis)
                    .map(|((&c, s), state)| (Complex64::new(c * s, 0.0), state))
                    .collect::<Vec<_>>(),
            )?;
            let amp: Complex64 = ideal
                .amplitudes()
                .iter()
                .zip(&evolved)
                .map(|(a, b)| a.conj() * b)
                .sum();
            let logical_weight: f64 = basis
                .iter()
                .map(|b| {
                    b.amplitudes()
                        .iter()
                        .zip(&evolved)
                        .map(|(a, v)| a.conj() * v)
                        .sum::<Complex64>()
                        .norm_sqr()
                })
                .sum();
            (
                overlap_to_fidelity(amp.norm_sqr(), scenario.convention)?,
                1.0 - logical_weight,
                0.0,
            )
        }
        EvolutionMode::Closed => {
            let h = build_h_full(&scenario.params, &space);
            let input = logical_input(angles, cat_amp, &space)?;
            let run = evolve_unitary(&h, &input, &space, &scenario.prop)?;
            let ideal = ideal_output(angles, cat_amp, &space)?;
            let amp: Complex64 = ideal
                .amplitudes()
                .iter()
                .zip(&run.final_amplitudes)
                .map(|(a, b)| a.conj() * b)
                .sum();
            let basis = logical_basis(cat_amp, &space)?;
            let logical_weight: f64 = basis
                .iter()
                .map(|b| {
                    b.amplitudes()
                        .iter()
                        .zip(&run.final_amplitudes)
                        .map(|(a, v)| a.conj() * v)
                        .sum::<Complex64>()
                        .norm_sqr()
                })
                .sum();
            (
                overlap_to_fidelity(amp.norm_sqr(), scenario.convention)?,
                1.0 - logical_weight,
                run.norm_drift,
            )
        }
        EvolutionMode::Open(rates) => {
            let h = build_h_full(&scenario.params, &space);
            let channels = ChannelSet::from_decoherence(rates, &space)?;
            let input = logical_input(angles, cat_amp, &space)?;
            let rho0 = density_from_pure(&input)?;
            let run = evolve_lindblad(&h, &rho0, &channels, &space, &scenario.prop)?;
            let ideal = ideal_output(angles, cat_amp, &space)?;
            let applied = run.final_matrix.mat_vec(ideal.amplitudes())?;
            let overlap: Complex64 = ideal
                .amplitudes()
                .iter()
                .zip(&applied)
                .map(|(a, b)| a.conj() * b)
                .sum();
            let basis = logical_basis(cat_amp, &space)?;
            let logical_weight: f64 = basis
                .iter()
                .map(|b| {
                    let applied = run.final_matrix.mat_vec(b.amplitudes()).expect("dims");
                    b.amplitudes()
                        .iter()
                        .zip(&applied)
                        .map(|(a, v)| a.conj() * v)
                        .sum::<Complex64>()
                        .re
                })
                .sum();
            (
                overlap_to_fidelity(overlap.re, scenario.convention)?,
                1.0 - logical_weight,
                run.trace_drift,
            )
        }
    };
    Ok(GridSample {
        theta: angles.theta,
        phi: angles.phi,
        fidelity,
        leakage,
        trace_drift,
    })
}

/// Midpoint-rule average of the pointwise fidelity over a
/// `quadrature_n × quadrature_n` uniform grid on `[0, 2π)²`. Every grid
/// point is an independent run; points execute in parallel but accumulate
/// in fixed grid order with compensated summation, so the result does not
/// depend on the worker count.
pub fn fidelity_average(scenario: &GateScenario, quadrature_n: usize) -> Result<FidelityResult> {
    if quadrature_n < 2 {
        return Err(Error::InvalidParams(format!(
            "quadrature_n must be at least 2, got {quadrature_n}"
        )));
    }
    let n = quadrature_n;
    let tau = std::f64::consts::TAU;
    let samples = run_indexed(n * n, scenario.workers, |index| {
        let i = index / n;
        let j = index % n;
        let angles = LogicalAngles::new(
            (i as f64 + 0.5) * tau / n as f64,
            (j as f64 + 0.5) * tau / n as f64,
        );
        gate_fidelity_at(scenario, &angles)
    })?;
    let mean_fidelity = kahan_mean(samples.iter().map(|s| s.fidelity));
    let mean_leakage = kahan_mean(samples.iter().map(|s| s.leakage));
    let max_trace_drift = samples
        .iter()
        .map(|s| s.trace_drift)
        .fold(0.0f64, f64::max);
    Ok(FidelityResult {
        mean_fidelity,
        quadrature_n: n,
        samples,
        max_trace_drift,
        mean_leakage,
    })
}

/// The ideal logical gates: `CP = diag(1,1,1,−1)` and
/// `CNOT = (I ⊗ H) · CP · (I ⊗ H)` with the Hadamard acting on the
/// cat-state qubit.
pub fn logical_gates() -> (ComplexMatrix, ComplexMatrix) {
    let cp = ComplexMatrix::from_real_diag(&[1.0, 1.0, 1.0, -1.0]);
    let h = hadamard_on_target();
    let cnot = h.matmul(&cp).unwrap().matmul(&h).unwrap();
    (cp, cnot)
}

fn hadamard_on_target() -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let h2 = ComplexMatrix::from_fn(2, 2, |i, j| {
        Complex64::new(if i == 1 && j == 1 { -s } else { s }, 0.0)
    });
    crate::numkernel::kron(&ComplexMatrix::identity(2), &h2)
}

/// Prepare the hybrid entangled state `(|0,cat⟩ + |1,c̄at⟩)/√2` by the
/// logical circuit `(I⊗H)·CP·(I⊗H)` acting on `(|0⟩+|1⟩)|cat⟩/√2`, with
/// the supplied 4×4 matrix substituted for the CP gate. Returns the
/// overlap magnitude with the target state.
pub fn entangled_state_check(cp_gate: &ComplexMatrix) -> Result<f64> {
    if cp_gate.rows() != 4 || cp_gate.cols() != 4 {
        return Err(Error::DimensionMismatch {
            left: "4x4".into(),
            right: format!("{}x{}", cp_gate.rows(), cp_gate.cols()),
            context: "entangled_state_check",
        });
    }
    let h = hadamard_on_target();
    let circuit = h.matmul(cp_gate)?.matmul(&h)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let input = [
        Complex64::new(s, 0.0),
        Complex64::ZERO,
        Complex64::new(s, 0.0),
        Complex64::ZERO,
    ];
    let target = [
        Complex64::new(s, 0.0),
        Complex64::ZERO,
        Complex64::ZERO,
        Complex64::new(s, 0.0),
    ];
    let result = circuit.mat_vec(&input)?;
    let overlap: Complex64 = target
        .iter()
        .zip(&result)
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(overlap.norm())
}

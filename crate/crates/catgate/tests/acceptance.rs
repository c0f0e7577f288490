//! Acceptance gate: one test per criterion, each printing a PASS/FAIL
//! line with the measured numbers before asserting the stated tolerance.
//!
//! Run with
//!
//! ```text
//! cargo test -p catgate --test acceptance -- --nocapture
//! ```
//!
//! The open-system criteria propagate the full gate time per quadrature
//! point; expect on the order of an hour of wall time on a small machine.
//! Heavy intermediate results are shared between criteria through lazy
//! statics so nothing is simulated twice.
//!
//! Criteria 3, 4, and the second half of 8 assert fidelity thresholds
//! that the model itself cannot reach at the reference parameters: the
//! unwanted cavity-2 coupling Stark-shifts the cat mode by
//! λ̃₂ = g̃₂²/δ̃₂ ≈ 2.5·χ, winding a spurious phase of ≈1.49 rad per
//! photon over the gate, and the wanted couplings leave ~4% leakage at
//! the stated detuning ratios. Exact diagonalization (independent of the
//! RK4 path, cross-checked against an external eigensolver) puts the
//! closed-system average fidelity at ≈0.81 at quadrature 8 and ≈0.64 at
//! quadrature 4, far from the ≥0.999 targets. Those tests fail red by
//! design; weakening them would hide the discrepancy.

use std::sync::OnceLock;

use num_complex::Complex64;

use catgate::analysis::{
    entangled_state_check, fidelity_average, logical_gates, truth_table_closed_form,
    truth_table_open, EvolutionMode, FidelityConvention, GateScenario, TruthTable,
};
use catgate::config::RunConfig;
use catgate::dynamics::{
    evolve_lindblad, evolve_unitary, rates_from_t_scale, ChannelSet, PropagationConfig,
};
use catgate::hamiltonians::{build_delta_h, build_h_full, build_h_interaction, Hamiltonian};
use catgate::hilbert::{excitation_number_op, MonomialOp, QutritOp, SpaceSpec};
use catgate::model::{derive, quality_factors, solve_g2, DerivedQuantities, SystemParams};
use catgate::numkernel::matexp;
use catgate::states::{
    cat_state, density_from_pure, logical_input, CatParity, CatSpec, LogicalAngles, StateVector,
};

const THRESHOLD_T_US: f64 = 5.0;
const THRESHOLD_KAPPA_INV_US: f64 = 136.0;
/// Phase budget for the long open-system runs; twice the library default.
/// The dt-sensitivity of the result is asserted in criterion 4 against a
/// reference run at the default budget.
const OPEN_RUN_PHASE_BUDGET: f64 = 0.1;

fn reference() -> (SystemParams, DerivedQuantities) {
    let params = SystemParams::reference_design();
    let derived = derive(&params, 6).unwrap();
    (params, derived)
}

fn open_prop(derived: &DerivedQuantities, params: &SystemParams, budget: f64) -> PropagationConfig {
    let h = build_h_full(params, &params.space);
    let mut prop = PropagationConfig::for_hamiltonian(&h, derived.t_gate_ns);
    prop.dt_ns = budget / h.max_phase_rate();
    prop
}

struct ReferenceRun {
    fidelity: f64,
    trace_drift: f64,
    min_eigenvalue: f64,
    hermiticity_defect: f64,
    top_fock_population: f64,
}

/// One full-length master-equation run at the threshold cell, default
/// phase budget (0.05 rad/step), angles (π/4, π/4) — the first midpoint
/// of the quadrature-4 grid. Shared by criteria 4 and 6.
fn threshold_reference_run() -> &'static ReferenceRun {
    static RUN: OnceLock<ReferenceRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let (params, derived) = reference();
        let h = build_h_full(&params, &params.space);
        let prop = open_prop(&derived, &params, 0.05);
        let rates = rates_from_t_scale(THRESHOLD_T_US)
            .unwrap()
            .with_cavity_lifetime(THRESHOLD_KAPPA_INV_US)
            .unwrap();
        let channels = ChannelSet::from_decoherence(&rates, &params.space).unwrap();
        let angles = LogicalAngles::new(
            std::f64::consts::FRAC_PI_4,
            std::f64::consts::FRAC_PI_4,
        );
        let input = logical_input(&angles, params.cat_amplitude, &params.space).unwrap();
        let run = evolve_lindblad(
            &h,
            &density_from_pure(&input).unwrap(),
            &channels,
            &params.space,
            &prop,
        )
        .unwrap();
        let fidelity = catgate::analysis::fidelity_pointwise(
            &run.final_density().unwrap(),
            &angles,
            params.cat_amplitude,
            &params.space,
            FidelityConvention::AmplitudeSqrt,
        )
        .unwrap();
        ReferenceRun {
            fidelity,
            trace_drift: run.trace_drift,
            min_eigenvalue: run.min_eigenvalue_seen,
            hermiticity_defect: run.final_matrix.hermiticity_defect(),
            top_fock_population: run.max_top_fock,
        }
    })
}

/// The quadrature-4 open-system average at the threshold cell (16 runs at
/// the relaxed phase budget). Shared by criteria 4 and 8.
fn threshold_quadrature() -> &'static catgate::analysis::FidelityResult {
    static RESULT: OnceLock<catgate::analysis::FidelityResult> = OnceLock::new();
    RESULT.get_or_init(|| {
        let (params, derived) = reference();
        let prop = open_prop(&derived, &params, OPEN_RUN_PHASE_BUDGET);
        let rates = rates_from_t_scale(THRESHOLD_T_US)
            .unwrap()
            .with_cavity_lifetime(THRESHOLD_KAPPA_INV_US)
            .unwrap();
        let scenario = GateScenario {
            params,
            derived,
            mode: EvolutionMode::Open(rates),
            prop,
            convention: FidelityConvention::AmplitudeSqrt,
            workers: 0,
        };
        fidelity_average(&scenario, 4).unwrap()
    })
}

#[test]
fn criterion_1_gate_design() {
    let (params, derived) = reference();
    let g2 = solve_g2(params.delta1(), params.delta2(), params.big_delta(), 6).unwrap();
    let g2_mhz = g2 * 1e3;
    let t_gate_us = derived.t_gate_ns * 1e-3;
    let g2_ok = (g2_mhz - 149.8).abs() <= 0.1;
    let t_ok = (t_gate_us - 0.37).abs() <= 0.005;
    println!(
        "criterion 1: {} — g2/2pi = {:.4} MHz (149.8 ± 0.1), t_gate = {:.5} us (0.37 ± 0.005)",
        if g2_ok && t_ok { "PASS" } else { "FAIL" },
        g2_mhz,
        t_gate_us
    );
    assert!(g2_ok, "g2 = {g2_mhz} MHz");
    assert!(t_ok, "t_gate = {t_gate_us} us");
}

#[test]
fn criterion_2_ideal_truth_table() {
    let (params, derived) = reference();
    let mut worst_off_diag = 0.0f64;
    let mut worst_phase = 0.0f64;
    for cat_amp in [0.5, 1.0] {
        let space = if cat_amp > 0.5 {
            SpaceSpec::new(params.space.n1_trunc, 16).unwrap()
        } else {
            params.space
        };
        let table =
            truth_table_closed_form(&derived, cat_amp, &space, derived.t_gate_ns).unwrap();
        worst_off_diag = worst_off_diag.max(table.max_off_diagonal());
        let expected = [1.0, 1.0, 1.0, -1.0];
        for (d, e) in table.diagonal().iter().zip(expected) {
            worst_phase = worst_phase.max((d / e).arg().abs());
        }
    }
    let off_ok = worst_off_diag < 1e-12;
    let phase_ok = worst_phase < 1e-10;
    println!(
        "criterion 2: {} — off-diagonal {:.2e} (< 1e-12), phase error {:.2e} rad (< 1e-10), cat amplitudes 0.5 and 1.0",
        if off_ok && phase_ok { "PASS" } else { "FAIL" },
        worst_off_diag,
        worst_phase
    );
    assert!(off_ok);
    assert!(phase_ok);
}

#[test]
fn criterion_3_closed_system_full_model() {
    // Average logical fidelity of RK4 evolution under the full coupling
    // Hamiltonian (unwanted terms included), quadrature 4, default step —
    // with the integration itself validated by the convergence probe.
    let (params, derived) = reference();
    let h = build_h_full(&params, &params.space);
    let prop = PropagationConfig::for_hamiltonian(&h, derived.t_gate_ns);
    let scenario = GateScenario {
        params: params.clone(),
        derived,
        mode: EvolutionMode::Closed,
        prop,
        convention: FidelityConvention::AmplitudeSqrt,
        workers: 0,
    };
    let probe = catgate::dynamics::convergence_probe(&params.space, &prop, |space, cfg| {
        let mut scenario = scenario.with_space(*space);
        scenario.prop = *cfg;
        Ok(fidelity_average(&scenario, 4)?.mean_fidelity)
    })
    .unwrap();
    let fidelity = probe.base_value;
    let converged = probe.passed;
    let ok = fidelity >= 0.999 && converged;
    println!(
        "criterion 3: {} — closed-system average fidelity {:.6} (>= 0.999), probe deltas dt {:.2e} / trunc {:.2e} (< 1e-4)",
        if ok { "PASS" } else { "FAIL" },
        fidelity,
        probe.dt_delta.unwrap_or(f64::NAN),
        probe.truncation_delta.unwrap_or(f64::NAN),
    );
    assert!(
        converged,
        "convergence probe failed: {probe:?} — integration is not trustworthy"
    );
    assert!(
        fidelity >= 0.999,
        "closed-system average fidelity {fidelity:.6} < 0.999: the model's own coherent \
         errors (cavity-2 Stark phase from the unwanted coupling, ~4% exchange leakage) \
         cap the fidelity near 0.64 at this quadrature; see the analysis in the test docs"
    );
}

#[test]
fn criterion_4_threshold_point_fidelity() {
    let result = threshold_quadrature();
    let mean = result.mean_fidelity;
    // dt-sensitivity evidence: the first grid point of the quadrature is
    // (π/4, π/4), which the reference run recomputes at half the step.
    let reference_run = threshold_reference_run();
    let dt_delta = (result.samples[0].fidelity - reference_run.fidelity).abs();
    let in_band = (0.995..=1.0).contains(&mean);
    let above_floor = mean >= 0.999 - 0.002;
    println!(
        "criterion 4: {} — threshold-cell mean fidelity {:.6} (in [0.995, 1.0] and >= 0.997), dt-refinement delta {:.2e}",
        if in_band && above_floor { "PASS" } else { "FAIL" },
        mean,
        dt_delta
    );
    assert!(
        dt_delta < 1e-4,
        "step-size sensitivity {dt_delta:.2e} too large for the relaxed budget"
    );
    assert!(
        in_band && above_floor,
        "threshold-point mean fidelity {mean:.6} misses [0.995, 1.0] / 0.997: decoherence \
         costs only ~5e-4 here; the shortfall is the coherent model error, see criterion 3"
    );
}

#[test]
fn criterion_5_integrator_oracles() {
    // (a) static-Hamiltonian RK4 against the matrix-exponential oracle
    let space = SpaceSpec::new(2, 2).unwrap();
    let dim = space.total_dim();
    let diag: Vec<f64> = (0..dim).map(|i| 0.11 * i as f64 - 0.3).collect();
    let term = catgate::hamiltonians::HamiltonianTerm {
        op: MonomialOp::qutrit(&space, QutritOp::SigmaEgMinus),
        amplitude: 0.9,
        phase_rate: 0.0,
    };
    let h = Hamiltonian::new(dim, diag, vec![term]);
    let psi0 = StateVector::basis_state(dim, 0);
    let t_final = 3.0;
    let exact = matexp(&h.evaluate(0.0).scale(Complex64::new(0.0, -1.0)), t_final)
        .unwrap()
        .mat_vec(psi0.amplitudes())
        .unwrap();
    let error_at = |dt: f64| {
        let cfg = PropagationConfig {
            dt_ns: dt,
            t_final_ns: t_final,
            record_stride: 0,
            renormalize: false,
            positivity_check_stride: 0,
        };
        let run = evolve_unitary(&h, &psi0, &space, &cfg).unwrap();
        run.final_amplitudes
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    };
    let err_a = error_at(1e-3);
    // (d) halving dt cuts the error at least 8x
    let coarse = error_at(0.04);
    let fine = error_at(0.02);
    let order_factor = coarse / fine;

    // (b) cavity decay
    let h0 = Hamiltonian::new(dim, vec![0.0; dim], vec![]);
    let mut rates = catgate::model::DecoherenceParams::none();
    rates.kappa1 = 10.0; // 0.01 / ns
    let channels = ChannelSet::from_decoherence(&rates, &space).unwrap();
    let one_photon = StateVector::basis_state(
        dim,
        space
            .basis_index(catgate::hilbert::Level::G, 1, 0)
            .unwrap(),
    );
    let cfg = PropagationConfig {
        dt_ns: 0.02,
        t_final_ns: 50.0,
        record_stride: 0,
        renormalize: false,
        positivity_check_stride: 0,
    };
    let run = evolve_lindblad(
        &h0,
        &density_from_pure(&one_photon).unwrap(),
        &channels,
        &space,
        &cfg,
    )
    .unwrap();
    let err_b = (run.trajectory.last().unwrap().n1_mean - (-0.01f64 * 50.0).exp()).abs();

    // (c) dephasing coherence decay
    let mut rates = catgate::model::DecoherenceParams::none();
    rates.gamma_phi_e = 50.0; // 0.05 / ns
    let channels = ChannelSet::from_decoherence(&rates, &space).unwrap();
    let idx_g = space
        .basis_index(catgate::hilbert::Level::G, 0, 0)
        .unwrap();
    let idx_e = space
        .basis_index(catgate::hilbert::Level::E, 0, 0)
        .unwrap();
    let mut amps = vec![Complex64::ZERO; dim];
    amps[idx_g] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    amps[idx_e] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let run = evolve_lindblad(
        &h0,
        &density_from_pure(&StateVector::new(amps).unwrap()).unwrap(),
        &channels,
        &space,
        &cfg,
    )
    .unwrap();
    let err_c =
        (run.final_matrix[(idx_g, idx_e)].norm() - 0.5 * (-0.05 * 50.0 / 2.0f64).exp()).abs();

    let ok = err_a <= 1e-8 && err_b <= 1e-6 && err_c <= 1e-6 && order_factor >= 8.0;
    println!(
        "criterion 5: {} — (a) RK4 vs matexp {:.2e} (<= 1e-8), (b) decay {:.2e} (<= 1e-6), (c) dephasing {:.2e} (<= 1e-6), (d) dt-halving factor {:.1} (>= 8)",
        if ok { "PASS" } else { "FAIL" },
        err_a,
        err_b,
        err_c,
        order_factor
    );
    assert!(err_a <= 1e-8);
    assert!(err_b <= 1e-6);
    assert!(err_c <= 1e-6);
    assert!(order_factor >= 8.0);
}

#[test]
fn criterion_6_structural_invariants() {
    let (params, _) = reference();
    let space = params.space;
    // integration invariants from the full-length threshold run
    let run = threshold_reference_run();
    let trace_ok = run.trace_drift <= 1e-6;
    let positive_ok = run.min_eigenvalue >= -1e-6;
    let herm_ok = run.hermiticity_defect <= 1e-12;
    let top_fock_ok = run.top_fock_population < 1e-8;

    // excitation-number commutator: the conserved combination is
    // n̂₁ + n̂₂ + |f⟩⟨f| (each coupling converts an f-quantum into one
    // photon and the exchange term moves photons between cavities)
    let n_op = excitation_number_op(&space);
    let mut comm_defect = 0.0f64;
    for h in [
        build_h_interaction(&params, &space),
        build_delta_h(&params, &space),
    ] {
        for t in [0.0, 0.21, 1.7, 100.0] {
            let m = h.evaluate(t);
            let comm = m
                .matmul(&n_op)
                .unwrap()
                .sub(&n_op.matmul(&m).unwrap())
                .unwrap();
            comm_defect = comm_defect.max(comm.max_abs_entry());
        }
    }
    let comm_ok = comm_defect <= 1e-12;

    // cat parity support exact, orthonormality to 1e-12
    let even = cat_state(&CatSpec::new(0.5, CatParity::Even, 12).unwrap()).unwrap();
    let odd = cat_state(&CatSpec::new(0.5, CatParity::Odd, 12).unwrap()).unwrap();
    let parity_exact = even
        .amplitudes()
        .iter()
        .skip(1)
        .step_by(2)
        .all(|a| *a == Complex64::ZERO)
        && odd
            .amplitudes()
            .iter()
            .step_by(2)
            .all(|a| *a == Complex64::ZERO);
    let ortho = even.inner(&odd).norm();
    let norm_defect = (even.norm() - 1.0).abs().max((odd.norm() - 1.0).abs());
    let cat_ok = parity_exact && ortho <= 1e-12 && norm_defect <= 1e-12;

    let ok = trace_ok && positive_ok && herm_ok && top_fock_ok && comm_ok && cat_ok;
    println!(
        "criterion 6: {} — trace drift {:.2e} (<= 1e-6), min eig {:.2e} (>= -1e-6), hermiticity {:.2e} (<= 1e-12), top-Fock {:.2e} (< 1e-8), commutator {:.2e} (<= 1e-12), cat orthonormality {:.2e} (<= 1e-12, parity exact: {})",
        if ok { "PASS" } else { "FAIL" },
        run.trace_drift,
        run.min_eigenvalue,
        run.hermiticity_defect,
        run.top_fock_population,
        comm_defect,
        ortho.max(norm_defect),
        parity_exact
    );
    assert!(trace_ok && positive_ok && herm_ok && top_fock_ok && comm_ok && cat_ok);
}

#[test]
fn criterion_7_quality_factors() {
    let (params, _) = reference();
    let (q1, q2) = quality_factors(&params, 136.0).unwrap();
    let q1_ok = (q1 / 9.39e6 - 1.0).abs() <= 0.01;
    let q2_ok = (q2 / 4.99e6 - 1.0).abs() <= 0.01;
    println!(
        "criterion 7: {} — Q1 = {:.4e} (9.39e6 ± 1%), Q2 = {:.4e} (4.99e6 ± 1%)",
        if q1_ok && q2_ok { "PASS" } else { "FAIL" },
        q1,
        q2
    );
    assert!(q1_ok && q2_ok);
}

#[test]
fn criterion_8a_entanglement_ideal_circuit() {
    let (cp, _) = logical_gates();
    let overlap = entangled_state_check(&cp).unwrap();
    let ok = (overlap - 1.0).abs() < 1e-12;
    println!(
        "criterion 8a: {} — ideal logical circuit overlap {:.12} (= 1)",
        if ok { "PASS" } else { "FAIL" },
        overlap
    );
    assert!(ok);
}

#[test]
fn criterion_8b_entanglement_simulated_gate() {
    // Substitute the open-system truth table at the threshold cell into
    // the logical CNOT circuit.
    let (params, derived) = reference();
    let prop = open_prop(&derived, &params, OPEN_RUN_PHASE_BUDGET);
    let rates = rates_from_t_scale(THRESHOLD_T_US)
        .unwrap()
        .with_cavity_lifetime(THRESHOLD_KAPPA_INV_US)
        .unwrap();
    let table: TruthTable =
        truth_table_open(&params, &params.space, &rates, &prop, 0).unwrap();
    let overlap = entangled_state_check(&table.entries).unwrap();
    let ok = overlap >= 0.995;
    println!(
        "criterion 8b: {} — simulated-gate entangled-state overlap {:.6} (>= 0.995), table leakage {:.3e}",
        if ok { "PASS" } else { "FAIL" },
        overlap,
        table.leakage
    );
    assert!(
        ok,
        "entangled-state overlap {overlap:.6} < 0.995: dominated by the same coherent \
         model error that caps criteria 3 and 4"
    );
}

#[test]
fn sweep_monotonicity_on_corner_grid() {
    // The full surface is not reproducible at desk scale; the sweep is
    // accepted on a reduced grid with fidelity non-decreasing in T and
    // κ⁻¹, plus the threshold-point check of criterion 4. The corners of
    // the default ranges at the minimum quadrature keep this to 16 runs.
    let mut config = RunConfig::reference();
    config.decoherence.t_scale_us = vec![5.0, 15.0];
    config.decoherence.kappa_inv_us = vec![10.0, 300.0];
    config.quadrature_n = 2;
    config.simulation.phase_budget_rad = OPEN_RUN_PHASE_BUDGET;
    config.workers = 0;
    let results = catgate::sweep::run_sweep(&config).unwrap();
    assert_eq!(results.len(), 4);
    let fidelity = |t: f64, k: f64| {
        results
            .iter()
            .find(|r| r.t_us == t && r.kappa_inv_us == k)
            .unwrap()
            .mean_fidelity
    };
    let mut monotone = true;
    for &k in &[10.0, 300.0] {
        monotone &= fidelity(15.0, k) >= fidelity(5.0, k) - 1e-9;
    }
    for &t in &[5.0, 15.0] {
        monotone &= fidelity(t, 300.0) >= fidelity(t, 10.0) - 1e-9;
    }
    println!(
        "sweep acceptance: {} — corner-grid fidelities (T, kappa_inv): (5,10) {:.6}, (5,300) {:.6}, (15,10) {:.6}, (15,300) {:.6}, monotone in both variables",
        if monotone { "PASS" } else { "FAIL" },
        fidelity(5.0, 10.0),
        fidelity(5.0, 300.0),
        fidelity(15.0, 10.0),
        fidelity(15.0, 300.0),
    );
    assert!(monotone);
    for row in &results {
        assert!(row.error.is_none());
        assert!(row.trace_drift <= 1e-6);
    }
}

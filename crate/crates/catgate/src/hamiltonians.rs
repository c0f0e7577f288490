//! Every Hamiltonian of the model, from the full interaction-picture
//! coupling down to the closed-form gate unitary.
//!
//! Time-dependent Hamiltonians are stored as static operators with
//! attached phase rates rather than reassembled per step: a term with
//! operator `O`, amplitude `g` and phase rate `ω` contributes
//! `g·(e^{iωt} O + e^{−iωt} O†)` when evaluated. That representation is
//! exact and allocation-free inside the propagation loop.
//!
//! The model hierarchy, with all frequencies converted to rad/ns here:
//!
//! - `interaction`: `g₁(e^{−iδ₁t} â₁†σ_fg⁻ + h.c.) + g₂(e^{−iδ₂t} â₂†σ_fe⁻ + h.c.)`
//! - `unwanted`: the same structure on the spectator transitions, with
//!   detunings δ̃₁ = ω_fe − ω_c1 (negative in the reference design) and
//!   δ̃₂ = ω_fg − ω_c2;
//! - `stage 1`: qutrit-conditioned Stark shifts plus the cavity-exchange
//!   term `−λ(e^{iΔt} â₁†â₂σ_eg⁻ + h.c.)`;
//! - `stage 2`: the static diagonal with the cross-Kerr terms
//!   `−χn̂₁(1+n̂₂)|g⟩⟨g| + χ(1+n̂₁)n̂₂|e⟩⟨e|`;
//! - `reduced`: the `|g⟩` block alone, `−λ₁n̂₁ − χn̂₁(1+n̂₂)`;
//! - two-mode form `−ηn̂₁ − χn̂₁n̂₂` with η = λ₁ + χ, whose evolution is
//!   the closed-form diagonal gate unitary.
//!
//! The `|e⟩` and `|f⟩` diagonal terms of stages 1–2 never act on the
//! computational manifold but are kept so each stage is faithful to the
//! model it approximates.

use num_complex::Complex64;

use crate::error::Result;
use crate::hilbert::{Level, MonomialOp, QutritOp, SpaceSpec};
use crate::model::{DerivedQuantities, SystemParams};
use crate::numkernel::ComplexMatrix;
use crate::TWO_PI;

/// One oscillating coupling term `amplitude · (e^{i·phase_rate·t} op + h.c.)`.
/// Amplitude and phase rate are angular (rad/ns).
#[derive(Debug, Clone)]
pub struct HamiltonianTerm {
    pub op: MonomialOp,
    pub amplitude: f64,
    pub phase_rate: f64,
}

impl HamiltonianTerm {
    /// The complex coefficient `amplitude · e^{i·phase_rate·t}` at time t.
    pub fn coefficient(&self, t_ns: f64) -> Complex64 {
        let phase = self.phase_rate * t_ns;
        Complex64::new(phase.cos(), phase.sin()) * self.amplitude
    }
}

/// A (possibly time-dependent) Hermitian Hamiltonian: a real static
/// diagonal plus oscillating terms. Everything in rad/ns.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    dim: usize,
    static_diag: Vec<f64>,
    terms: Vec<HamiltonianTerm>,
}

impl Hamiltonian {
    pub fn new(dim: usize, static_diag: Vec<f64>, terms: Vec<HamiltonianTerm>) -> Self {
        debug_assert!(static_diag.len() == dim);
        debug_assert!(terms.iter().all(|t| t.op.dim() == dim));
        Self {
            dim,
            static_diag,
            terms,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn static_diag(&self) -> &[f64] {
        &self.static_diag
    }

    pub fn terms(&self) -> &[HamiltonianTerm] {
        &self.terms
    }

    pub fn is_static(&self) -> bool {
        self.terms.iter().all(|t| t.phase_rate == 0.0)
    }

    /// Fastest oscillation among the coupling terms, rad/ns; step-size
    /// budgets are expressed against this.
    pub fn max_phase_rate(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.phase_rate.abs())
            .fold(0.0, f64::max)
    }

    /// Concatenate two Hamiltonians on the same space.
    pub fn plus(&self, other: &Hamiltonian) -> Hamiltonian {
        assert_eq!(self.dim, other.dim);
        let mut static_diag = self.static_diag.clone();
        for (d, o) in static_diag.iter_mut().zip(&other.static_diag) {
            *d += o;
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Hamiltonian::new(self.dim, static_diag, terms)
    }

    /// Dense Hermitian matrix at time t.
    pub fn evaluate(&self, t_ns: f64) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim, self.dim);
        for (i, &d) in self.static_diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        for term in &self.terms {
            let z = term.coefficient(t_ns);
            for &(r, c, w) in term.op.entries() {
                m[(r as usize, c as usize)] += z * w;
                m[(c as usize, r as usize)] += z.conj() * w;
            }
        }
        m
    }

    /// `out += -i H(t) ψ` — the Schrödinger right-hand side.
    pub fn accumulate_rhs_vec(&self, t_ns: f64, psi: &[Complex64], out: &mut [Complex64]) {
        let minus_i = Complex64::new(0.0, -1.0);
        for (o, (&d, p)) in out.iter_mut().zip(self.static_diag.iter().zip(psi)) {
            *o += minus_i * d * p;
        }
        for term in &self.terms {
            let z = minus_i * term.coefficient(t_ns);
            let zc = minus_i * term.coefficient(t_ns).conj();
            for &(r, c, w) in term.op.entries() {
                out[r as usize] += z * w * psi[c as usize];
                out[c as usize] += zc * w * psi[r as usize];
            }
        }
    }

    /// `out += H(t) ρ` on row-major square storage.
    pub fn accumulate_left_matrix(&self, t_ns: f64, rho: &[Complex64], out: &mut [Complex64]) {
        let n = self.dim;
        for (i, &d) in self.static_diag.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            let row = &rho[i * n..(i + 1) * n];
            let dst = &mut out[i * n..(i + 1) * n];
            for (o, s) in dst.iter_mut().zip(row) {
                *o += d * s;
            }
        }
        for term in &self.terms {
            let z = term.coefficient(t_ns);
            term.op.accumulate_left(z, rho, out);
            term.op.dagger().accumulate_left(z.conj(), rho, out);
        }
    }
}

fn coupling_term(
    space: &SpaceSpec,
    cavity: crate::hilbert::Cavity,
    sigma: QutritOp,
    coupling_ghz: f64,
    detuning_ghz: f64,
) -> HamiltonianTerm {
    let a_dag = MonomialOp::annihilation(space, cavity).dagger();
    let op = a_dag.matmul(&MonomialOp::qutrit(space, sigma));
    HamiltonianTerm {
        op,
        amplitude: TWO_PI * coupling_ghz,
        // e^{−iδt} on the photon-creation side
        phase_rate: -TWO_PI * detuning_ghz,
    }
}

/// The wanted interaction-picture coupling of both cavities to the qutrit.
pub fn build_h_interaction(params: &SystemParams, space: &SpaceSpec) -> Hamiltonian {
    let terms = vec![
        coupling_term(
            space,
            crate::hilbert::Cavity::One,
            QutritOp::SigmaFgMinus,
            params.g1,
            params.delta1(),
        ),
        coupling_term(
            space,
            crate::hilbert::Cavity::Two,
            QutritOp::SigmaFeMinus,
            params.g2,
            params.delta2(),
        ),
    ];
    Hamiltonian::new(space.total_dim(), vec![0.0; space.total_dim()], terms)
}

/// The unwanted couplings: cavity 1 against `e ↔ f`, cavity 2 against
/// `g ↔ f`.
pub fn build_delta_h(params: &SystemParams, space: &SpaceSpec) -> Hamiltonian {
    let terms = vec![
        coupling_term(
            space,
            crate::hilbert::Cavity::One,
            QutritOp::SigmaFeMinus,
            params.g1_tilde,
            params.delta1_tilde(),
        ),
        coupling_term(
            space,
            crate::hilbert::Cavity::Two,
            QutritOp::SigmaFgMinus,
            params.g2_tilde,
            params.delta2_tilde(),
        ),
    ];
    Hamiltonian::new(space.total_dim(), vec![0.0; space.total_dim()], terms)
}

/// The full coupling including the unwanted terms.
pub fn build_h_full(params: &SystemParams, space: &SpaceSpec) -> Hamiltonian {
    build_h_interaction(params, space).plus(&build_delta_h(params, space))
}

fn stage_diagonal(
    derived: &DerivedQuantities,
    space: &SpaceSpec,
    with_cross_kerr: bool,
) -> Vec<f64> {
    let mut diag = vec![0.0; space.total_dim()];
    for (i, d) in diag.iter_mut().enumerate() {
        let (level, n1, n2) = space.basis_decode(i).unwrap();
        let (n1, n2) = (n1 as f64, n2 as f64);
        let mut value = match level {
            Level::G => -derived.lambda1 * n1,
            Level::E => -derived.lambda2 * n2,
            Level::F => {
                derived.lambda1 + derived.lambda2 + derived.lambda1 * n1 + derived.lambda2 * n2
            }
        };
        if with_cross_kerr {
            value += match level {
                Level::G => -derived.chi * n1 * (1.0 + n2),
                Level::E => derived.chi * (1.0 + n1) * n2,
                Level::F => 0.0,
            };
        }
        *d = TWO_PI * value;
    }
    diag
}

/// First effective stage: qutrit-conditioned Stark shifts plus the
/// oscillating two-cavity exchange term.
pub fn build_h_eff_stage1(derived: &DerivedQuantities, space: &SpaceSpec) -> Hamiltonian {
    let a1_dag = MonomialOp::annihilation(space, crate::hilbert::Cavity::One).dagger();
    let a2 = MonomialOp::annihilation(space, crate::hilbert::Cavity::Two);
    let sigma_eg = MonomialOp::qutrit(space, QutritOp::SigmaEgMinus);
    let exchange = a1_dag.matmul(&a2).matmul(&sigma_eg);
    let term = HamiltonianTerm {
        op: exchange,
        amplitude: -TWO_PI * derived.lambda_exchange,
        phase_rate: TWO_PI * derived.big_delta,
    };
    Hamiltonian::new(
        space.total_dim(),
        stage_diagonal(derived, space, false),
        vec![term],
    )
}

/// Second effective stage: purely diagonal, Stark shifts plus cross-Kerr.
pub fn build_h_eff_stage2(derived: &DerivedQuantities, space: &SpaceSpec) -> ComplexMatrix {
    ComplexMatrix::from_real_diag(&stage_diagonal(derived, space, true))
}

/// Stage 2 restricted to the `|g⟩` block: `−λ₁n̂₁ − χn̂₁(1+n̂₂)` there,
/// zero on `|e⟩` and `|f⟩`.
pub fn build_h_eff_reduced(derived: &DerivedQuantities, space: &SpaceSpec) -> ComplexMatrix {
    let mut diag = vec![0.0; space.total_dim()];
    for (i, d) in diag.iter_mut().enumerate() {
        let (level, n1, n2) = space.basis_decode(i).unwrap();
        if level == Level::G {
            let (n1, n2) = (n1 as f64, n2 as f64);
            *d = -TWO_PI * (derived.lambda1 * n1 + derived.chi * n1 * (1.0 + n2));
        }
    }
    ComplexMatrix::from_real_diag(&diag)
}

/// The two-mode effective Hamiltonian `−ηn̂₁ − χn̂₁n̂₂` on
/// cavity 1 ⊗ cavity 2 (the qutrit factored out in `|g⟩`).
pub fn h_eff_two_mode(derived: &DerivedQuantities, space: &SpaceSpec) -> ComplexMatrix {
    let dim = space.n1_trunc * space.n2_trunc;
    let mut diag = vec![0.0; dim];
    for (i, d) in diag.iter_mut().enumerate() {
        let n1 = (i / space.n2_trunc) as f64;
        let n2 = (i % space.n2_trunc) as f64;
        *d = -TWO_PI * (derived.eta * n1 + derived.chi * n1 * n2);
    }
    ComplexMatrix::from_real_diag(&diag)
}

/// The closed-form gate unitary `U = exp[iηn̂₁t] ⊗ exp(iχn̂₁n̂₂t)`:
/// diagonal on the two-mode space with phase `(ηn₁ + χn₁n₂)t` per Fock
/// pair. At the gate time the cross-Kerr phase reaches π per photon pair
/// and the η winding closes, leaving `(−1)^{n₂}` on the single-photon
/// sector.
pub fn closed_form_gate_unitary(
    derived: &DerivedQuantities,
    space: &SpaceSpec,
    t_ns: f64,
) -> Result<ComplexMatrix> {
    if t_ns < 0.0 {
        return Err(crate::error::Error::InvalidParams(format!(
            "gate unitary needs t >= 0, got {t_ns}"
        )));
    }
    let dim = space.n1_trunc * space.n2_trunc;
    let mut diag = vec![Complex64::ZERO; dim];
    for (i, d) in diag.iter_mut().enumerate() {
        let n1 = (i / space.n2_trunc) as f64;
        let n2 = (i % space.n2_trunc) as f64;
        let phase = TWO_PI * (derived.eta * n1 + derived.chi * n1 * n2) * t_ns;
        *d = Complex64::new(phase.cos(), phase.sin());
    }
    Ok(ComplexMatrix::from_diag(&diag))
}

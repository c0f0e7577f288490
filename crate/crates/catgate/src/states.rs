//! State preparation: Fock, coherent, and cat states, the logical two-qubit
//! input and ideal output, and density matrices from pure states.
//!
//! The cat-state qubit lives in cavity 2. Its logic states are the even and
//! odd cat states
//!
//! ```text
//! |cat⟩  = M⁺(|α⟩ + |−α⟩) = Σ C_2m   |2m⟩
//! |c̄at⟩ = M⁻(|α⟩ − |−α⟩) = Σ C_2n+1 |2n+1⟩
//! ```
//!
//! with `M± = 1/√(2(1 ± e^{−2|α|²}))`. The two states are orthogonal for
//! any α except α = 0, where the odd combination vanishes identically.
//! Coefficients are renormalized over the truncated basis; the analytic
//! normalization alone would leave the norm short by the (tiny) discarded
//! tail, and exact unit norm keeps downstream invariants sharp.
//!
//! The logical superposition angles are named `theta`/`phi` here: the
//! usual α/β labels collide with the cat amplitude α.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{Level, SpaceSpec};
use crate::numkernel::ComplexMatrix;

/// Parity sector of a cat state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CatParity {
    Even,
    Odd,
}

/// Recipe for a single-mode cat state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatSpec {
    /// Coherent amplitude α of the underlying `|±α⟩` pair (dimensionless).
    pub amplitude: f64,
    pub parity: CatParity,
    /// Fock truncation of the mode.
    pub trunc: usize,
}

impl CatSpec {
    pub fn new(amplitude: f64, parity: CatParity, trunc: usize) -> Result<Self> {
        if amplitude < 0.0 {
            return Err(Error::InvalidParams(format!(
                "cat amplitude must be non-negative, got {amplitude}"
            )));
        }
        if parity == CatParity::Odd && amplitude == 0.0 {
            return Err(Error::InvalidParams(
                "odd cat state is undefined at amplitude 0".into(),
            ));
        }
        if trunc < 2 {
            return Err(Error::Truncation(format!("trunc {trunc} < 2")));
        }
        Ok(Self {
            amplitude,
            parity,
            trunc,
        })
    }
}

/// Pure state on some fixed basis; unit norm by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Wrap amplitudes that are already normalized (to 1e-10).
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        let state = Self { amps };
        let norm = state.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!(
                "state norm {norm} differs from 1 beyond 1e-10"
            )));
        }
        Ok(state)
    }

    /// Normalize and wrap; errors on the zero vector.
    pub fn from_unnormalized(mut amps: Vec<Complex64>) -> Result<Self> {
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidState("cannot normalize the zero vector".into()));
        }
        for a in amps.iter_mut() {
            *a /= norm;
        }
        Ok(Self { amps })
    }

    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut amps = vec![Complex64::ZERO; dim];
        amps[index] = Complex64::ONE;
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Tensor product `self ⊗ other` (Kronecker ordering).
    pub fn tensor(&self, other: &Self) -> Self {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Self { amps }
    }

    /// Superposition `Σ cᵢ ψᵢ`, not renormalized.
    pub fn linear_combination(terms: &[(Complex64, &StateVector)]) -> Result<Self> {
        let dim = terms
            .first()
            .ok_or_else(|| Error::InvalidState("empty combination".into()))?
            .1
            .dim();
        let mut amps = vec![Complex64::ZERO; dim];
        for (coeff, state) in terms {
            if state.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim.to_string(),
                    right: state.dim().to_string(),
                    context: "linear_combination",
                });
            }
            for (a, s) in amps.iter_mut().zip(state.amplitudes()) {
                *a += coeff * s;
            }
        }
        Ok(Self { amps })
    }
}

/// Density matrix with the usual validity invariants.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    /// Wrap a raw matrix, checking Hermiticity and trace.
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::NonSquare {
                rows: mat.rows(),
                cols: mat.cols(),
            });
        }
        if mat.hermiticity_defect() > 1e-8 * mat.max_abs_entry().max(1e-300) {
            return Err(Error::InvalidState("density matrix is not Hermitian".into()));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
            return Err(Error::InvalidState(format!(
                "density matrix trace {tr} differs from 1"
            )));
        }
        Ok(Self { mat })
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    /// `tr(ρ²)`; equals the squared Frobenius norm for Hermitian ρ.
    pub fn purity(&self) -> f64 {
        let f = self.mat.frobenius_norm();
        f * f
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn expectation_with(&self, psi: &StateVector) -> Result<f64> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim().to_string(),
                right: psi.dim().to_string(),
                context: "expectation_with",
            });
        }
        let applied = self.mat.mat_vec(psi.amplitudes())?;
        let value: Complex64 = psi
            .amplitudes()
            .iter()
            .zip(&applied)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(value.re)
    }
}

/// `ρ = |ψ⟩⟨ψ|`; rejects unnormalized input beyond 1e-8.
pub fn density_from_pure(psi: &StateVector) -> Result<DensityMatrix> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidState(format!(
            "cannot build density matrix from state with norm {norm}"
        )));
    }
    let n = psi.dim();
    let mut mat = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        let ai = psi.amplitudes()[i];
        for j in 0..n {
            mat[(i, j)] = ai * psi.amplitudes()[j].conj();
        }
    }
    Ok(DensityMatrix { mat })
}

/// Coherent state `|α⟩ = e^{−|α|²/2} Σ αⁿ/√(n!) |n⟩` on a truncated basis,
/// renormalized. Real amplitude only; test oracles build cats out of these.
pub fn coherent_state(alpha: f64, trunc: usize) -> Result<StateVector> {
    let mut amps = vec![Complex64::ZERO; trunc];
    let mut term = (-alpha * alpha / 2.0).exp();
    for (n, a) in amps.iter_mut().enumerate() {
        *a = Complex64::new(term, 0.0);
        term *= alpha / ((n + 1) as f64).sqrt();
    }
    StateVector::from_unnormalized(amps)
}

/// Relative weight of the coherent-state series discarded by the truncation.
fn truncation_tail_mass(amplitude: f64, parity: CatParity, trunc: usize) -> f64 {
    let start = match parity {
        CatParity::Even => 0,
        CatParity::Odd => 1,
    };
    let mut kept = 0.0;
    let mut tail = 0.0;
    let mut log_term = -amplitude * amplitude; // log of |C_n|^2 / normalization at n = 0
    let mut n = 0usize;
    // |c_n|^2 = e^{-α²} α^{2n} / n!
    while n < trunc + 120 {
        if n >= start && (n - start).is_multiple_of(2) {
            let w = log_term.exp();
            if n < trunc {
                kept += w;
            } else {
                tail += w;
            }
        }
        n += 1;
        log_term += 2.0 * amplitude.max(1e-300).ln() - (n as f64).ln();
    }
    if kept == 0.0 {
        1.0
    } else {
        tail / (kept + tail)
    }
}

/// Single-mode cat state per the parity-resolved Fock expansion.
///
/// Even parity populates only even Fock states, odd only odd ones; the
/// coefficients are real and positive for positive amplitude. Errors when
/// the truncation discards more than 1e-12 of the state.
pub fn cat_state(spec: &CatSpec) -> Result<StateVector> {
    let spec = CatSpec::new(spec.amplitude, spec.parity, spec.trunc)?;
    let tail = truncation_tail_mass(spec.amplitude, spec.parity, spec.trunc);
    if tail > 1e-12 {
        return Err(Error::Truncation(format!(
            "cat state with amplitude {} needs more than {} Fock states (tail mass {:.2e})",
            spec.amplitude, spec.trunc, tail
        )));
    }
    let alpha = spec.amplitude;
    let start = match spec.parity {
        CatParity::Even => 0,
        CatParity::Odd => 1,
    };
    let mut amps = vec![Complex64::ZERO; spec.trunc];
    // Unnormalized coefficients αⁿ/√(n!); the shared prefactor 2M±e^{−|α|²/2}
    // drops out in the renormalization over the truncated basis.
    let mut coeff = 1.0;
    for (n, amp) in amps.iter_mut().enumerate() {
        if n >= start && (n - start).is_multiple_of(2) {
            *amp = Complex64::new(coeff, 0.0);
        }
        coeff *= alpha / ((n + 1) as f64).sqrt();
    }
    StateVector::from_unnormalized(amps)
}

/// Superposition angles of the logical two-qubit input state; wrapped into
/// [0, 2π).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogicalAngles {
    pub theta: f64,
    pub phi: f64,
}

impl LogicalAngles {
    pub fn new(theta: f64, phi: f64) -> Self {
        let tau = std::f64::consts::TAU;
        Self {
            theta: theta.rem_euclid(tau),
            phi: phi.rem_euclid(tau),
        }
    }

    /// Coefficients (cosθcosφ, cosθsinφ, sinθcosφ, sinθsinφ) of the four
    /// logical basis states.
    pub fn coefficients(&self) -> [f64; 4] {
        let (ct, st) = (self.theta.cos(), self.theta.sin());
        let (cp, sp) = (self.phi.cos(), self.phi.sin());
        [ct * cp, ct * sp, st * cp, st * sp]
    }
}

/// The four logical basis states `|0,cat⟩, |0,c̄at⟩, |1,cat⟩, |1,c̄at⟩` on
/// the two-mode space cavity 1 ⊗ cavity 2.
pub fn logical_basis_two_mode(cat_amp: f64, space: &SpaceSpec) -> Result<[StateVector; 4]> {
    let even = cat_state(&CatSpec::new(cat_amp, CatParity::Even, space.n2_trunc)?)?;
    let odd = cat_state(&CatSpec::new(cat_amp, CatParity::Odd, space.n2_trunc)?)?;
    let vac = StateVector::basis_state(space.n1_trunc, 0);
    let one = StateVector::basis_state(space.n1_trunc, 1);
    Ok([
        vac.tensor(&even),
        vac.tensor(&odd),
        one.tensor(&even),
        one.tensor(&odd),
    ])
}

/// The logical basis embedded in the full space with the qutrit in `|g⟩`.
pub fn logical_basis(cat_amp: f64, space: &SpaceSpec) -> Result<[StateVector; 4]> {
    let two_mode = logical_basis_two_mode(cat_amp, space)?;
    let qutrit_g = StateVector::basis_state(crate::hilbert::QUTRIT_DIM, Level::G.index());
    Ok(two_mode.map(|s| qutrit_g.tensor(&s)))
}

/// The four-term logical input superposition, tensored with the qutrit
/// ground state.
pub fn logical_input(
    angles: &LogicalAngles,
    cat_amp: f64,
    space: &SpaceSpec,
) -> Result<StateVector> {
    let basis = logical_basis(cat_amp, space)?;
    let coeffs = angles.coefficients();
    let terms: Vec<(Complex64, &StateVector)> = coeffs
        .iter()
        .zip(&basis)
        .map(|(&c, s)| (Complex64::new(c, 0.0), s))
        .collect();
    StateVector::new(StateVector::linear_combination(&terms)?.amps)
}

/// The ideal gate output: the logical input with the sign of the
/// `|1,c̄at⟩` term flipped.
pub fn ideal_output(
    angles: &LogicalAngles,
    cat_amp: f64,
    space: &SpaceSpec,
) -> Result<StateVector> {
    let basis = logical_basis(cat_amp, space)?;
    let coeffs = angles.coefficients();
    let signs = [1.0, 1.0, 1.0, -1.0];
    let terms: Vec<(Complex64, &StateVector)> = coeffs
        .iter()
        .zip(signs)
        .zip(&basis)
        .map(|((&c, s), state)| (Complex64::new(c * s, 0.0), state))
        .collect();
    StateVector::new(StateVector::linear_combination(&terms)?.amps)
}

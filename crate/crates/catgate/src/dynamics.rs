//! Fixed-step RK4 propagation of state vectors and density matrices.
//!
//! Two equations of motion are covered: the Schrödinger equation
//! `dψ/dt = −iH(t)ψ` for closed-system checks, and the Lindblad master
//! equation
//!
//! ```text
//! dρ/dt = −i[H(t), ρ] + Σ_c rate_c · (ξ_c ρ ξ_c† − ξ_c†ξ_c ρ/2 − ρ ξ_c†ξ_c/2)
//! ```
//!
//! with photon decay on both cavities, the three qutrit relaxation paths,
//! and pure dephasing of the two excited qutrit levels. Dissipators act
//! untransformed in the interaction picture, exactly as the model pairs
//! them with the interaction Hamiltonian; no rotating-frame correction is
//! applied to the collapse operators.
//!
//! Integration is deliberately fixed-step RK4: runs are bit-reproducible,
//! and the step size is budgeted against the fastest coupling phase
//! (default 0.05 rad per step, hard error above 0.3). Trace drift is
//! reported rather than hidden — renormalization is off by default because
//! the drift is the integrator's error signal. Hermiticity is enforced by
//! symmetrization each step, and the minimum eigenvalue is sampled at a
//! configurable stride as a positivity watchdog.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonians::Hamiltonian;
use crate::hilbert::{Cavity, Level, MonomialOp, QutritOp, SpaceSpec};
use crate::model::DecoherenceParams;
use crate::numkernel::{min_eigenvalue_hermitian, ComplexMatrix};
use crate::states::{DensityMatrix, StateVector};

/// Default phase advance of the fastest coupling term per RK4 step, rad.
pub const DEFAULT_PHASE_BUDGET: f64 = 0.05;
/// Hard ceiling on phase advance per step; coarser steps are rejected.
pub const MAX_PHASE_PER_STEP: f64 = 0.3;

/// Fixed-step integration settings. Times in ns.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PropagationConfig {
    pub dt_ns: f64,
    pub t_final_ns: f64,
    /// Record a trajectory point every this many steps; 0 records only the
    /// endpoints.
    pub record_stride: usize,
    /// Renormalize the state/trace each step. Off by default.
    pub renormalize: bool,
    /// Check the minimum eigenvalue every this many steps; 0 disables.
    pub positivity_check_stride: usize,
}

impl PropagationConfig {
    /// Step size from the phase budget against a Hamiltonian's fastest
    /// oscillation.
    pub fn for_hamiltonian(h: &Hamiltonian, t_final_ns: f64) -> Self {
        let rate = h.max_phase_rate();
        let dt_ns = if rate > 0.0 {
            DEFAULT_PHASE_BUDGET / rate
        } else {
            // static Hamiltonian: resolve the run in ~10^4 steps
            (t_final_ns / 1e4).max(1e-6)
        };
        Self {
            dt_ns,
            t_final_ns,
            record_stride: 0,
            renormalize: false,
            positivity_check_stride: 1000,
        }
    }

    pub fn with_dt(mut self, dt_ns: f64) -> Self {
        self.dt_ns = dt_ns;
        self
    }

    pub fn halved_dt(mut self) -> Self {
        self.dt_ns *= 0.5;
        self
    }

    fn validate(&self, h: &Hamiltonian) -> Result<()> {
        if self.dt_ns <= 0.0 || !self.dt_ns.is_finite() {
            return Err(Error::InvalidParams(format!(
                "dt must be positive and finite, got {}",
                self.dt_ns
            )));
        }
        if self.t_final_ns < 0.0 || !self.t_final_ns.is_finite() {
            return Err(Error::InvalidParams(format!(
                "t_final must be non-negative, got {}",
                self.t_final_ns
            )));
        }
        let phase_per_step = self.dt_ns * h.max_phase_rate();
        if phase_per_step > MAX_PHASE_PER_STEP {
            return Err(Error::StepSize { phase_per_step });
        }
        Ok(())
    }

    fn step_count(&self) -> usize {
        if self.t_final_ns == 0.0 {
            0
        } else {
            (self.t_final_ns / self.dt_ns).ceil() as usize
        }
    }
}

/// Relaxation and dephasing rates from the common lifetime scale T (μs):
/// `γ_eg⁻¹ = 5T`, `γ_fe⁻¹ = 2T`, `γ_fg⁻¹ = T`, `γ_φe⁻¹ = γ_φf⁻¹ = T`.
/// Cavity decay is set separately from κ⁻¹.
pub fn rates_from_t_scale(t_us: f64) -> Result<DecoherenceParams> {
    if t_us <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "lifetime scale T must be positive, got {t_us}"
        )));
    }
    Ok(DecoherenceParams {
        kappa1: 0.0,
        kappa2: 0.0,
        gamma_eg: 1.0 / (5.0 * t_us),
        gamma_fe: 1.0 / (2.0 * t_us),
        gamma_fg: 1.0 / t_us,
        gamma_phi_e: 1.0 / t_us,
        gamma_phi_f: 1.0 / t_us,
    })
}

/// One Lindblad channel: collapse operator and its rate in 1/ns.
#[derive(Debug, Clone)]
pub struct Channel {
    pub label: &'static str,
    pub op: MonomialOp,
    pub rate_per_ns: f64,
}

/// The full dissipation model: cavity decay, qutrit relaxation, and qutrit
/// dephasing. Dephasing projectors enter the same Lindblad form as the
/// collapse operators (they are their own ξ†ξ).
#[derive(Debug, Clone)]
pub struct ChannelSet {
    pub collapse: Vec<Channel>,
    pub dephasing: Vec<Channel>,
}

impl ChannelSet {
    pub fn none() -> Self {
        Self {
            collapse: Vec::new(),
            dephasing: Vec::new(),
        }
    }

    /// Build the seven channels from rates in 1/μs.
    pub fn from_decoherence(rates: &DecoherenceParams, space: &SpaceSpec) -> Result<Self> {
        rates.validate()?;
        let per_ns = 1e-3; // 1/μs → 1/ns
        let mut collapse = Vec::new();
        let mut dephasing = Vec::new();
        let push = |list: &mut Vec<Channel>, label, op, rate_us: f64| {
            if rate_us > 0.0 {
                list.push(Channel {
                    label,
                    op,
                    rate_per_ns: rate_us * per_ns,
                });
            }
        };
        push(
            &mut collapse,
            "kappa1 a1",
            MonomialOp::annihilation(space, Cavity::One),
            rates.kappa1,
        );
        push(
            &mut collapse,
            "kappa2 a2",
            MonomialOp::annihilation(space, Cavity::Two),
            rates.kappa2,
        );
        push(
            &mut collapse,
            "gamma_eg sigma_eg",
            MonomialOp::qutrit(space, QutritOp::SigmaEgMinus),
            rates.gamma_eg,
        );
        push(
            &mut collapse,
            "gamma_fe sigma_fe",
            MonomialOp::qutrit(space, QutritOp::SigmaFeMinus),
            rates.gamma_fe,
        );
        push(
            &mut collapse,
            "gamma_fg sigma_fg",
            MonomialOp::qutrit(space, QutritOp::SigmaFgMinus),
            rates.gamma_fg,
        );
        push(
            &mut dephasing,
            "gamma_phi_e sigma_ee",
            MonomialOp::qutrit(space, QutritOp::ProjE),
            rates.gamma_phi_e,
        );
        push(
            &mut dephasing,
            "gamma_phi_f sigma_ff",
            MonomialOp::qutrit(space, QutritOp::ProjF),
            rates.gamma_phi_f,
        );
        Ok(Self { collapse, dephasing })
    }

    pub fn is_empty(&self) -> bool {
        self.collapse.is_empty() && self.dephasing.is_empty()
    }

    fn all(&self) -> impl Iterator<Item = &Channel> {
        self.collapse.iter().chain(self.dephasing.iter())
    }
}

/// Reduced observables along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub t_ns: f64,
    /// Trace of ρ (squared norm for pure-state runs).
    pub trace: f64,
    /// tr ρ² (1 for pure-state runs up to integration error).
    pub purity: f64,
    pub p_e: f64,
    pub p_f: f64,
    pub n1_mean: f64,
    pub n2_mean: f64,
    /// Combined population of the top retained Fock level of both
    /// cavities; the truncation watchdog.
    pub top_fock_population: f64,
}

/// CSV dump of a recorded trajectory.
pub fn write_trajectory_csv(points: &[TrajectoryPoint], mut w: impl std::io::Write) -> Result<()> {
    writeln!(
        w,
        "t_ns,trace,purity,p_e,p_f,n1_mean,n2_mean,top_fock_population"
    )?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            p.t_ns, p.trace, p.purity, p.p_e, p.p_f, p.n1_mean, p.n2_mean, p.top_fock_population
        )?;
    }
    Ok(())
}

/// Per-basis-state weights for the reduced observables.
struct ObservableDiagonals {
    n1: Vec<f64>,
    n2: Vec<f64>,
    p_e: Vec<f64>,
    p_f: Vec<f64>,
    top: Vec<f64>,
}

impl ObservableDiagonals {
    fn new(space: &SpaceSpec) -> Self {
        let dim = space.total_dim();
        let mut n1 = vec![0.0; dim];
        let mut n2 = vec![0.0; dim];
        let mut p_e = vec![0.0; dim];
        let mut p_f = vec![0.0; dim];
        let mut top = vec![0.0; dim];
        for i in 0..dim {
            let (level, f1, f2) = space.basis_decode(i).unwrap();
            n1[i] = f1 as f64;
            n2[i] = f2 as f64;
            p_e[i] = (level == Level::E) as u8 as f64;
            p_f[i] = (level == Level::F) as u8 as f64;
            top[i] = (f1 == space.n1_trunc - 1) as u8 as f64
                + (f2 == space.n2_trunc - 1) as u8 as f64;
        }
        Self { n1, n2, p_e, p_f, top }
    }

    fn point_from_probabilities(&self, t_ns: f64, probs: &[f64], purity: f64) -> TrajectoryPoint {
        let dot = |w: &[f64]| w.iter().zip(probs).map(|(a, b)| a * b).sum::<f64>();
        TrajectoryPoint {
            t_ns,
            trace: probs.iter().sum(),
            purity,
            p_e: dot(&self.p_e),
            p_f: dot(&self.p_f),
            n1_mean: dot(&self.n1),
            n2_mean: dot(&self.n2),
            top_fock_population: dot(&self.top),
        }
    }
}

/// Coupling term with its adjoint pre-built, so the inner loop never
/// allocates.
struct PreparedTerm {
    entries: Vec<(u32, u32, f64)>,
    dagger_entries: Vec<(u32, u32, f64)>,
    amplitude: f64,
    phase_rate: f64,
}

struct PreparedHamiltonian {
    dim: usize,
    static_diag: Option<Vec<f64>>,
    terms: Vec<PreparedTerm>,
}

impl PreparedHamiltonian {
    fn new(h: &Hamiltonian) -> Self {
        let static_diag = if h.static_diag().iter().any(|&d| d != 0.0) {
            Some(h.static_diag().to_vec())
        } else {
            None
        };
        let terms = h
            .terms()
            .iter()
            .map(|t| PreparedTerm {
                entries: t.op.entries().to_vec(),
                dagger_entries: t.op.dagger().entries().to_vec(),
                amplitude: t.amplitude,
                phase_rate: t.phase_rate,
            })
            .collect();
        Self {
            dim: h.dim(),
            static_diag,
            terms,
        }
    }

    /// `out += -i H(t) ψ`.
    fn rhs_vec(&self, t: f64, psi: &[Complex64], out: &mut [Complex64]) {
        let minus_i = Complex64::new(0.0, -1.0);
        if let Some(diag) = &self.static_diag {
            for ((o, &d), p) in out.iter_mut().zip(diag).zip(psi) {
                *o += minus_i * d * p;
            }
        }
        for term in &self.terms {
            let phase = term.phase_rate * t;
            let z = minus_i * Complex64::from_polar(term.amplitude, phase);
            for &(r, c, w) in &term.entries {
                out[r as usize] += z * w * psi[c as usize];
            }
            let zc = minus_i * Complex64::from_polar(term.amplitude, -phase);
            for &(r, c, w) in &term.dagger_entries {
                out[r as usize] += zc * w * psi[c as usize];
            }
        }
    }

    /// `out += factor · H(t) ρ`, row-major.
    fn accumulate_left(&self, t: f64, factor: Complex64, rho: &[Complex64], out: &mut [Complex64]) {
        let n = self.dim;
        if let Some(diag) = &self.static_diag {
            for (i, &d) in diag.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let src = &rho[i * n..(i + 1) * n];
                let dst = &mut out[i * n..(i + 1) * n];
                caxpy(factor * d, src, dst);
            }
        }
        for term in &self.terms {
            let phase = term.phase_rate * t;
            let z = factor * Complex64::from_polar(term.amplitude, phase);
            for &(r, c, w) in &term.entries {
                let src = &rho[c as usize * n..(c as usize + 1) * n];
                let dst = &mut out[r as usize * n..(r as usize + 1) * n];
                caxpy(z * w, src, dst);
            }
            let zc = factor * Complex64::from_polar(term.amplitude, -phase);
            for &(r, c, w) in &term.dagger_entries {
                let src = &rho[c as usize * n..(c as usize + 1) * n];
                let dst = &mut out[r as usize * n..(r as usize + 1) * n];
                caxpy(zc * w, src, dst);
            }
        }
    }
}

/// `dst += z * src`, written field-wise so the autovectorizer can work
/// across the interleaved real/imaginary planes.
#[inline]
fn caxpy(z: Complex64, src: &[Complex64], dst: &mut [Complex64]) {
    let (zr, zi) = (z.re, z.im);
    for (d, s) in dst.iter_mut().zip(src) {
        let (sr, si) = (s.re, s.im);
        d.re += zr * sr - zi * si;
        d.im += zr * si + zi * sr;
    }
}

/// Precomputed dissipator data: the entrywise damping coefficients (from
/// every ξ†ξ, which are all diagonal here, and the diagonal dephasing
/// sandwiches) plus the non-diagonal sandwich channels.
struct LindbladKernel {
    dim: usize,
    /// coeff[i*n+k] multiplies ρ[i,k] in the RHS.
    coeff: Vec<f64>,
    /// Channels whose ξρξ† needs an explicit scatter.
    scatter: Vec<(MonomialOp, f64)>,
}

impl LindbladKernel {
    fn new(channels: &ChannelSet, dim: usize) -> Self {
        let mut gram = vec![0.0; dim];
        let mut diag_sandwich: Vec<(Vec<f64>, f64)> = Vec::new();
        let mut scatter = Vec::new();
        for channel in channels.all() {
            debug_assert_eq!(channel.op.dim(), dim);
            for (g, q) in gram.iter_mut().zip(channel.op.gram_diagonal()) {
                *g += channel.rate_per_ns * q;
            }
            let diagonal = channel.op.entries().iter().all(|&(r, c, _)| r == c);
            if diagonal {
                let mut weights = vec![0.0; dim];
                for &(r, _, w) in channel.op.entries() {
                    weights[r as usize] = w;
                }
                diag_sandwich.push((weights, channel.rate_per_ns));
            } else {
                scatter.push((channel.op.clone(), channel.rate_per_ns));
            }
        }
        let mut coeff = vec![0.0; dim * dim];
        for i in 0..dim {
            for k in 0..dim {
                let mut c = -0.5 * (gram[i] + gram[k]);
                for (weights, rate) in &diag_sandwich {
                    c += rate * weights[i] * weights[k];
                }
                coeff[i * dim + k] = c;
            }
        }
        Self { dim, coeff, scatter }
    }
}

/// Full master-equation right-hand side into `out`.
///
/// Accumulates `B = −iH(t)ρ` and then hermitizes in place —
/// `−i[H,ρ] = B + B†` — folding the entrywise damping coefficients into
/// the same pairwise pass; the non-diagonal sandwich channels scatter on
/// top. Every contribution is Hermitian-symmetric, so the output is
/// Hermitian to rounding whenever ρ is.
fn lindblad_rhs(
    h: &PreparedHamiltonian,
    kernel: &LindbladKernel,
    t: f64,
    rho: &[Complex64],
    out: &mut [Complex64],
) {
    let n = kernel.dim;
    out.fill(Complex64::ZERO);
    h.accumulate_left(t, Complex64::new(0.0, -1.0), rho, out);
    for i in 0..n {
        let row = i * n;
        // diagonal: B + B† doubles the real part, kills the imaginary
        let b = out[row + i];
        let c = kernel.coeff[row + i] * rho[row + i].re;
        out[row + i] = Complex64::new(2.0 * b.re + c, 0.0);
        for k in i + 1..n {
            let b_ik = out[row + k];
            let b_ki = out[k * n + i];
            let damp = kernel.coeff[row + k];
            let r_ik = rho[row + k];
            let v = Complex64::new(
                b_ik.re + b_ki.re + damp * r_ik.re,
                b_ik.im - b_ki.im + damp * r_ik.im,
            );
            out[row + k] = v;
            out[k * n + i] = v.conj();
        }
    }
    for (op, rate) in &kernel.scatter {
        op.accumulate_sandwich(*rate, rho, out);
    }
}

/// Closed-system evolution result.
#[derive(Debug, Clone)]
pub struct UnitaryEvolution {
    pub final_amplitudes: Vec<Complex64>,
    /// Max |norm − 1| seen along the run (before any renormalization).
    pub norm_drift: f64,
    /// Max combined top-Fock-level population seen at any step; the
    /// truncation watchdog.
    pub max_top_fock: f64,
    pub trajectory: Vec<TrajectoryPoint>,
    /// State snapshots at the record stride; empty when the stride is 0.
    pub snapshots: Vec<(f64, Vec<Complex64>)>,
}

impl UnitaryEvolution {
    /// Final state, renormalized; errors if the drift exceeded 1e-6.
    pub fn final_state(&self) -> Result<StateVector> {
        if self.norm_drift > 1e-6 {
            return Err(Error::Numerical(format!(
                "norm drift {:.3e} too large to trust the final state",
                self.norm_drift
            )));
        }
        StateVector::from_unnormalized(self.final_amplitudes.clone())
    }
}

/// Propagate `dψ/dt = −iH(t)ψ` with fixed-step RK4.
pub fn evolve_unitary(
    h: &Hamiltonian,
    psi0: &StateVector,
    space: &SpaceSpec,
    cfg: &PropagationConfig,
) -> Result<UnitaryEvolution> {
    cfg.validate(h)?;
    if psi0.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            left: h.dim().to_string(),
            right: psi0.dim().to_string(),
            context: "evolve_unitary",
        });
    }
    let prepared = PreparedHamiltonian::new(h);
    let observables = ObservableDiagonals::new(space);
    let n = h.dim();
    let steps = cfg.step_count();

    let mut psi: Vec<Complex64> = psi0.amplitudes().to_vec();
    let mut k1 = vec![Complex64::ZERO; n];
    let mut k2 = vec![Complex64::ZERO; n];
    let mut k3 = vec![Complex64::ZERO; n];
    let mut k4 = vec![Complex64::ZERO; n];
    let mut stage = vec![Complex64::ZERO; n];

    let mut trajectory = Vec::new();
    let mut snapshots = Vec::new();
    let mut norm_drift: f64 = 0.0;
    let mut max_top_fock: f64 = 0.0;

    let record = |psi: &[Complex64], t: f64, trajectory: &mut Vec<TrajectoryPoint>| {
        let probs: Vec<f64> = psi.iter().map(|z| z.norm_sqr()).collect();
        trajectory.push(observables.point_from_probabilities(t, &probs, 1.0));
    };
    record(&psi, 0.0, &mut trajectory);

    let mut t = 0.0;
    for step in 0..steps {
        let dt = (cfg.t_final_ns - t).min(cfg.dt_ns);
        k1.fill(Complex64::ZERO);
        prepared.rhs_vec(t, &psi, &mut k1);
        for ((s, p), k) in stage.iter_mut().zip(&psi).zip(&k1) {
            *s = p + 0.5 * dt * k;
        }
        k2.fill(Complex64::ZERO);
        prepared.rhs_vec(t + 0.5 * dt, &stage, &mut k2);
        for ((s, p), k) in stage.iter_mut().zip(&psi).zip(&k2) {
            *s = p + 0.5 * dt * k;
        }
        k3.fill(Complex64::ZERO);
        prepared.rhs_vec(t + 0.5 * dt, &stage, &mut k3);
        for ((s, p), k) in stage.iter_mut().zip(&psi).zip(&k3) {
            *s = p + dt * k;
        }
        k4.fill(Complex64::ZERO);
        prepared.rhs_vec(t + dt, &stage, &mut k4);
        let sixth = dt / 6.0;
        for i in 0..n {
            psi[i] += sixth * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        }
        t += dt;

        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        norm_drift = norm_drift.max((norm - 1.0).abs());
        let top: f64 = observables
            .top
            .iter()
            .zip(&psi)
            .map(|(w, z)| w * z.norm_sqr())
            .sum();
        max_top_fock = max_top_fock.max(top);
        if cfg.renormalize && norm > 0.0 {
            for z in psi.iter_mut() {
                *z /= norm;
            }
        }
        let last = step + 1 == steps;
        if cfg.record_stride > 0 && (step + 1) % cfg.record_stride == 0 && !last {
            record(&psi, t, &mut trajectory);
            snapshots.push((t, psi.clone()));
        }
        if last {
            record(&psi, t, &mut trajectory);
        }
    }

    Ok(UnitaryEvolution {
        final_amplitudes: psi,
        norm_drift,
        max_top_fock,
        trajectory,
        snapshots,
    })
}

/// Open-system evolution result.
#[derive(Debug, Clone)]
pub struct LindbladEvolution {
    pub final_matrix: ComplexMatrix,
    /// Max |tr ρ − 1| seen along the run.
    pub trace_drift: f64,
    /// Smallest eigenvalue observed at the positivity checks.
    pub min_eigenvalue_seen: f64,
    /// Max combined top-Fock-level population seen at any step; the
    /// truncation watchdog.
    pub max_top_fock: f64,
    pub trajectory: Vec<TrajectoryPoint>,
    pub snapshots: Vec<(f64, ComplexMatrix)>,
}

impl LindbladEvolution {
    pub fn final_density(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(self.final_matrix.clone())
    }
}

/// Positivity tolerance on the sampled minimum eigenvalue.
pub const POSITIVITY_TOLERANCE: f64 = 1e-6;

/// Propagate the master equation with fixed-step RK4. Symmetrizes
/// `ρ ← (ρ + ρ†)/2` after every step and aborts on a positivity breach
/// beyond [`POSITIVITY_TOLERANCE`].
pub fn evolve_lindblad(
    h: &Hamiltonian,
    rho0: &DensityMatrix,
    channels: &ChannelSet,
    space: &SpaceSpec,
    cfg: &PropagationConfig,
) -> Result<LindbladEvolution> {
    cfg.validate(h)?;
    let n = h.dim();
    if rho0.dim() != n {
        return Err(Error::DimensionMismatch {
            left: n.to_string(),
            right: rho0.dim().to_string(),
            context: "evolve_lindblad",
        });
    }
    let prepared = PreparedHamiltonian::new(h);
    let kernel = LindbladKernel::new(channels, n);
    let observables = ObservableDiagonals::new(space);
    let steps = cfg.step_count();
    let nn = n * n;

    let mut rho: Vec<Complex64> = rho0.matrix().data().to_vec();
    let mut k1 = vec![Complex64::ZERO; nn];
    let mut k2 = vec![Complex64::ZERO; nn];
    let mut k3 = vec![Complex64::ZERO; nn];
    let mut k4 = vec![Complex64::ZERO; nn];
    let mut stage = vec![Complex64::ZERO; nn];

    let record = |rho: &[Complex64], t: f64, trajectory: &mut Vec<TrajectoryPoint>| {
        let probs: Vec<f64> = (0..n).map(|i| rho[i * n + i].re).collect();
        let purity: f64 = rho.iter().map(|z| z.norm_sqr()).sum();
        trajectory.push(observables.point_from_probabilities(t, &probs, purity));
    };

    let mut trajectory = Vec::new();
    let mut snapshots = Vec::new();
    let mut trace_drift: f64 = 0.0;
    let mut min_eig_seen = f64::INFINITY;
    let mut max_top_fock: f64 = 0.0;
    record(&rho, 0.0, &mut trajectory);

    let check_positivity = |rho: &[Complex64], t: f64, min_seen: &mut f64| -> Result<()> {
        let m = matrix_from_slice(n, rho);
        let min = min_eigenvalue_hermitian(&m)?;
        *min_seen = min_seen.min(min);
        if min < -POSITIVITY_TOLERANCE {
            return Err(Error::PositivityBreach {
                t_ns: t,
                min_eigenvalue: min,
            });
        }
        Ok(())
    };

    let mut t = 0.0;
    for step in 0..steps {
        let dt = (cfg.t_final_ns - t).min(cfg.dt_ns);
        lindblad_rhs(&prepared, &kernel, t, &rho, &mut k1);
        axpy_into(&mut stage, &rho, &k1, 0.5 * dt);
        lindblad_rhs(&prepared, &kernel, t + 0.5 * dt, &stage, &mut k2);
        axpy_into(&mut stage, &rho, &k2, 0.5 * dt);
        lindblad_rhs(&prepared, &kernel, t + 0.5 * dt, &stage, &mut k3);
        axpy_into(&mut stage, &rho, &k3, dt);
        lindblad_rhs(&prepared, &kernel, t + dt, &stage, &mut k4);
        // Final update fused with the Hermitian symmetrization: the new
        // (i,k) and (k,i) entries are combined and averaged pairwise.
        let sixth = dt / 6.0;
        for i in 0..n {
            let row = i * n;
            let d = rho[row + i]
                + sixth * (k1[row + i] + 2.0 * (k2[row + i] + k3[row + i]) + k4[row + i]);
            rho[row + i] = Complex64::new(d.re, 0.0);
            for k in i + 1..n {
                let ik = row + k;
                let ki = k * n + i;
                let up = rho[ik] + sixth * (k1[ik] + 2.0 * (k2[ik] + k3[ik]) + k4[ik]);
                let lo = rho[ki] + sixth * (k1[ki] + 2.0 * (k2[ki] + k3[ki]) + k4[ki]);
                let avg = Complex64::new(0.5 * (up.re + lo.re), 0.5 * (up.im - lo.im));
                rho[ik] = avg;
                rho[ki] = avg.conj();
            }
        }
        t += dt;

        let trace: f64 = (0..n).map(|i| rho[i * n + i].re).sum();
        trace_drift = trace_drift.max((trace - 1.0).abs());
        let top: f64 = (0..n).map(|i| observables.top[i] * rho[i * n + i].re).sum();
        max_top_fock = max_top_fock.max(top);
        if cfg.renormalize && trace > 0.0 {
            let inv = 1.0 / trace;
            for z in rho.iter_mut() {
                *z *= inv;
            }
        }

        let last = step + 1 == steps;
        if cfg.positivity_check_stride > 0
            && ((step + 1) % cfg.positivity_check_stride == 0 || last)
        {
            check_positivity(&rho, t, &mut min_eig_seen)?;
        }
        if cfg.record_stride > 0 && (step + 1) % cfg.record_stride == 0 && !last {
            record(&rho, t, &mut trajectory);
            snapshots.push((t, matrix_from_slice(n, &rho)));
        }
        if last {
            record(&rho, t, &mut trajectory);
        }
    }
    if steps == 0 && cfg.positivity_check_stride > 0 {
        check_positivity(&rho, 0.0, &mut min_eig_seen)?;
    }

    Ok(LindbladEvolution {
        final_matrix: matrix_from_slice(n, &rho),
        trace_drift,
        min_eigenvalue_seen: if min_eig_seen.is_finite() {
            min_eig_seen
        } else {
            f64::NAN
        },
        max_top_fock,
        trajectory,
        snapshots,
    })
}

fn matrix_from_slice(n: usize, data: &[Complex64]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    m.data_mut().copy_from_slice(data);
    m
}

fn axpy_into(dst: &mut [Complex64], base: &[Complex64], k: &[Complex64], factor: f64) {
    for ((d, b), x) in dst.iter_mut().zip(base).zip(k) {
        d.re = b.re + factor * x.re;
        d.im = b.im + factor * x.im;
    }
}

/// Result of the self-consistency probe: the same figure of merit
/// recomputed with a halved step and with enlarged truncations.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub base_value: f64,
    pub half_dt_value: Option<f64>,
    pub bumped_truncation_value: Option<f64>,
    pub dt_delta: Option<f64>,
    pub truncation_delta: Option<f64>,
    pub tolerance: f64,
    /// Populated when a refinement run failed outright (for example a cat
    /// state that no longer fits the truncation).
    pub failure: Option<String>,
    pub passed: bool,
}

/// Convergence tolerance on the probed figure of merit.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-4;

/// Re-run a scenario with `dt/2` and with truncations `(N₁+2, N₂+4)` and
/// compare the figure of merit (typically an average gate fidelity)
/// produced by `eval`. Passes when both deltas stay below
/// [`CONVERGENCE_TOLERANCE`].
pub fn convergence_probe<F>(
    space: &SpaceSpec,
    cfg: &PropagationConfig,
    eval: F,
) -> Result<ConvergenceReport>
where
    F: Fn(&SpaceSpec, &PropagationConfig) -> Result<f64>,
{
    let base_value = eval(space, cfg)?;
    let mut report = ConvergenceReport {
        base_value,
        half_dt_value: None,
        bumped_truncation_value: None,
        dt_delta: None,
        truncation_delta: None,
        tolerance: CONVERGENCE_TOLERANCE,
        failure: None,
        passed: false,
    };
    match eval(space, &cfg.halved_dt()) {
        Ok(v) => {
            report.half_dt_value = Some(v);
            report.dt_delta = Some((v - base_value).abs());
        }
        Err(e) => {
            report.failure = Some(format!("half-dt rerun failed: {e}"));
            return Ok(report);
        }
    }
    match eval(&space.bumped(2, 4), cfg) {
        Ok(v) => {
            report.bumped_truncation_value = Some(v);
            report.truncation_delta = Some((v - base_value).abs());
        }
        Err(e) => {
            report.failure = Some(format!("bumped-truncation rerun failed: {e}"));
            return Ok(report);
        }
    }
    report.passed = report.dt_delta.unwrap() < CONVERGENCE_TOLERANCE
        && report.truncation_delta.unwrap() < CONVERGENCE_TOLERANCE;
    Ok(report)
}

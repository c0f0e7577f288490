//! Simulator for a hybrid controlled-phase gate in circuit QED.
//!
//! The physical system is a superconducting flux qutrit (levels `g`, `e`,
//! `f`) inductively coupled to two microwave cavities. Cavity 1 carries a
//! photonic qubit encoded in its vacuum and single-photon states; cavity 2
//! carries a cat-state qubit encoded in the two orthogonal cat states
//! `|α⟩ ± |−α⟩`. Dispersive coupling of both cavities to the qutrit
//! produces an effective cross-Kerr interaction between the cavities while
//! the qutrit idles in its ground state, and a controlled-phase gate falls
//! out of free evolution under that interaction for the right coupling
//! strengths and gate time.
//!
//! The crate covers the full modelling chain:
//!
//! - [`numkernel`]: dense complex matrices, Kronecker products, the matrix
//!   exponential, and Hermitian eigenvalue bounds;
//! - [`hilbert`]: the qutrit ⊗ cavity ⊗ cavity product space and embedded
//!   ladder/projector operators;
//! - [`states`]: Fock, coherent, and cat states, and the logical two-qubit
//!   input/output states;
//! - [`model`]: physical parameters, the derived coupling layer, and the
//!   gate-design condition for the second coupling strength;
//! - [`hamiltonians`]: the time-dependent interaction Hamiltonian, the
//!   unwanted-coupling terms, the effective-Hamiltonian hierarchy, and the
//!   closed-form gate unitary;
//! - [`dynamics`]: fixed-step RK4 propagation of Schrödinger and Lindblad
//!   equations with trace/positivity monitoring;
//! - [`analysis`]: logical truth tables, pointwise and angle-averaged gate
//!   fidelity, and the entangled-state preparation check;
//! - [`config`] and [`sweep`]: JSON run configuration and the
//!   fidelity-versus-decoherence parameter sweep behind the CLI.
//!
//! Unit conventions: configuration and reporting use linear frequencies in
//! GHz (the `ω/2π` convention) and lifetimes in μs; everything handed to an
//! integrator is in angular units, rad/ns for frequencies and ns for times.

pub mod analysis;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod hamiltonians;
pub mod hilbert;
pub mod model;
pub mod numkernel;
pub mod states;
pub mod sweep;

pub(crate) mod workpool;

pub use error::{Error, Result};

/// Conversion factor between linear (GHz, cycles/ns) and angular (rad/ns)
/// frequency units.
pub const TWO_PI: f64 = std::f64::consts::TAU;

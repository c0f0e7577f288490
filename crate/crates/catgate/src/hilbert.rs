//! Tensor-product Hilbert space and embedded operators.
//!
//! The simulator lives on a fixed three-slot topology: flux qutrit ⊗
//! cavity 1 ⊗ cavity 2, with the qutrit levels ordered `g = 0`, `e = 1`,
//! `f = 2`. The Kronecker ordering is fixed here once; every embedding in
//! the crate goes through [`SpaceSpec::basis_index`] or the constructors in
//! this module so there is a single place where the convention can be
//! wrong.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numkernel::{kron, ComplexMatrix};

pub const QUTRIT_DIM: usize = 3;

/// Qutrit levels in energy order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    G = 0,
    E = 1,
    F = 2,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::G, Level::E, Level::F];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Which cavity an operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cavity {
    One,
    Two,
}

impl Cavity {
    pub fn from_index(i: usize) -> Result<Self> {
        match i {
            1 => Ok(Cavity::One),
            2 => Ok(Cavity::Two),
            _ => Err(Error::InvalidSpace(format!("cavity index {i} out of range (1|2)"))),
        }
    }
}

/// Truncated product space qutrit ⊗ cavity 1 ⊗ cavity 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SpaceSpec {
    /// Fock cutoff of cavity 1; kept states are 0..n1_trunc-1.
    pub n1_trunc: usize,
    /// Fock cutoff of cavity 2.
    pub n2_trunc: usize,
}

impl SpaceSpec {
    pub fn new(n1_trunc: usize, n2_trunc: usize) -> Result<Self> {
        if n1_trunc < 2 || n2_trunc < 2 {
            return Err(Error::InvalidSpace(format!(
                "Fock truncations must be at least 2, got ({n1_trunc}, {n2_trunc})"
            )));
        }
        Ok(Self { n1_trunc, n2_trunc })
    }

    /// Default truncations: the photonic qubit holds at most one photon and
    /// the cat amplitude is small, but the cavity-exchange term can move
    /// population transiently, so headroom is kept on both modes.
    pub fn default_truncations() -> Self {
        Self {
            n1_trunc: 6,
            n2_trunc: 12,
        }
    }

    pub fn total_dim(&self) -> usize {
        QUTRIT_DIM * self.n1_trunc * self.n2_trunc
    }

    /// Flat index of `|level, n1, n2⟩` under the qutrit ⊗ c1 ⊗ c2 ordering.
    pub fn basis_index(&self, level: Level, n1: usize, n2: usize) -> Result<usize> {
        if n1 >= self.n1_trunc || n2 >= self.n2_trunc {
            return Err(Error::InvalidSpace(format!(
                "basis state ({:?}, {n1}, {n2}) outside truncation ({}, {})",
                level, self.n1_trunc, self.n2_trunc
            )));
        }
        Ok((level.index() * self.n1_trunc + n1) * self.n2_trunc + n2)
    }

    /// Inverse of [`basis_index`](Self::basis_index).
    pub fn basis_decode(&self, index: usize) -> Result<(Level, usize, usize)> {
        if index >= self.total_dim() {
            return Err(Error::InvalidSpace(format!(
                "flat index {index} outside dimension {}",
                self.total_dim()
            )));
        }
        let n2 = index % self.n2_trunc;
        let rest = index / self.n2_trunc;
        let n1 = rest % self.n1_trunc;
        let level = Level::ALL[rest / self.n1_trunc];
        Ok((level, n1, n2))
    }

    /// Enlarged space used by convergence probes.
    pub fn bumped(&self, extra1: usize, extra2: usize) -> Self {
        Self {
            n1_trunc: self.n1_trunc + extra1,
            n2_trunc: self.n2_trunc + extra2,
        }
    }
}

/// Qutrit operator kinds, unembedded form 3x3.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QutritOp {
    ProjG,
    ProjE,
    ProjF,
    /// `σ_fg⁻ = |g⟩⟨f|`
    SigmaFgMinus,
    /// `σ_fe⁻ = |e⟩⟨f|`
    SigmaFeMinus,
    /// `σ_eg⁻ = |g⟩⟨e|`
    SigmaEgMinus,
}

impl QutritOp {
    /// The single nonzero entry as (row, column).
    fn entry(self) -> (usize, usize) {
        match self {
            QutritOp::ProjG => (0, 0),
            QutritOp::ProjE => (1, 1),
            QutritOp::ProjF => (2, 2),
            QutritOp::SigmaFgMinus => (0, 2),
            QutritOp::SigmaFeMinus => (1, 2),
            QutritOp::SigmaEgMinus => (0, 1),
        }
    }
}

/// Unembedded 3x3 qutrit operator.
pub fn qutrit_op_local(kind: QutritOp) -> ComplexMatrix {
    let (r, c) = kind.entry();
    let mut m = ComplexMatrix::zeros(QUTRIT_DIM, QUTRIT_DIM);
    m[(r, c)] = Complex64::ONE;
    m
}

/// Single-mode annihilation operator on a truncated Fock basis:
/// `⟨n-1|a|n⟩ = √n`.
pub fn annihilation_local(trunc: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(trunc, trunc, |i, j| {
        if j == i + 1 {
            Complex64::new((j as f64).sqrt(), 0.0)
        } else {
            Complex64::ZERO
        }
    })
}

/// Annihilation operator of the given cavity embedded into the full space.
pub fn annihilation(space: &SpaceSpec, cavity: Cavity) -> ComplexMatrix {
    let iq = ComplexMatrix::identity(QUTRIT_DIM);
    match cavity {
        Cavity::One => {
            let a = annihilation_local(space.n1_trunc);
            kron(&kron(&iq, &a), &ComplexMatrix::identity(space.n2_trunc))
        }
        Cavity::Two => {
            let a = annihilation_local(space.n2_trunc);
            kron(
                &kron(&iq, &ComplexMatrix::identity(space.n1_trunc)),
                &a,
            )
        }
    }
}

/// Number operator `a†a` of the given cavity, embedded.
pub fn number_op(space: &SpaceSpec, cavity: Cavity) -> ComplexMatrix {
    let a = annihilation(space, cavity);
    a.dagger().matmul(&a).expect("square")
}

/// Qutrit operator embedded at the qutrit tensor slot.
pub fn qutrit_op(space: &SpaceSpec, kind: QutritOp) -> ComplexMatrix {
    let local = qutrit_op_local(kind);
    kron(
        &kron(&local, &ComplexMatrix::identity(space.n1_trunc)),
        &ComplexMatrix::identity(space.n2_trunc),
    )
}

/// The excitation-number operator conserved by every coupling term:
/// `n̂₁ + n̂₂ + |f⟩⟨f|`. Each coupling moves one photon into a cavity while
/// taking the qutrit out of `|f⟩` (or the reverse), and the cavity-mediated
/// `e ↔ g` exchange swaps a photon between the two cavities, so weighting
/// `f` alone by one quantum makes the total commute with the full
/// interaction, unwanted terms included.
pub fn excitation_number_op(space: &SpaceSpec) -> ComplexMatrix {
    let mut total = number_op(space, Cavity::One);
    total = total
        .add(&number_op(space, Cavity::Two))
        .expect("same space");
    total.add(&qutrit_op(space, QutritOp::ProjF)).expect("same space")
}

/// A matrix with at most one nonzero (real) entry per column — the shape of
/// every ladder/projector product in this model. The propagators consume
/// these directly so the hot loops never touch a dense operator.
#[derive(Debug, Clone)]
pub struct MonomialOp {
    dim: usize,
    /// (row, col, weight), sorted by column, at most one entry per column.
    entries: Vec<(u32, u32, f64)>,
}

impl MonomialOp {
    pub fn new(dim: usize, mut entries: Vec<(u32, u32, f64)>) -> Self {
        entries.sort_by_key(|e| e.1);
        debug_assert!(entries.windows(2).all(|w| w[0].1 < w[1].1));
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(u32, u32, f64)] {
        &self.entries
    }

    /// Embedded annihilation operator of one cavity.
    pub fn annihilation(space: &SpaceSpec, cavity: Cavity) -> Self {
        let dim = space.total_dim();
        let mut entries = Vec::new();
        for level in Level::ALL {
            for n1 in 0..space.n1_trunc {
                for n2 in 0..space.n2_trunc {
                    let (weight, target) = match cavity {
                        Cavity::One if n1 > 0 => {
                            ((n1 as f64).sqrt(), space.basis_index(level, n1 - 1, n2))
                        }
                        Cavity::Two if n2 > 0 => {
                            ((n2 as f64).sqrt(), space.basis_index(level, n1, n2 - 1))
                        }
                        _ => continue,
                    };
                    let col = space.basis_index(level, n1, n2).unwrap();
                    entries.push((target.unwrap() as u32, col as u32, weight));
                }
            }
        }
        Self::new(dim, entries)
    }

    /// Embedded qutrit operator.
    pub fn qutrit(space: &SpaceSpec, kind: QutritOp) -> Self {
        let dim = space.total_dim();
        let (r, c) = kind.entry();
        let mut entries = Vec::new();
        for n1 in 0..space.n1_trunc {
            for n2 in 0..space.n2_trunc {
                let row = space.basis_index(Level::ALL[r], n1, n2).unwrap();
                let col = space.basis_index(Level::ALL[c], n1, n2).unwrap();
                entries.push((row as u32, col as u32, 1.0));
            }
        }
        Self::new(dim, entries)
    }

    /// Product `self * other`; monomials are closed under multiplication.
    pub fn matmul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        // Row lookup for self: column -> (row, weight).
        let mut by_col: Vec<Option<(u32, f64)>> = vec![None; self.dim];
        for &(r, c, w) in &self.entries {
            by_col[c as usize] = Some((r, w));
        }
        let mut entries = Vec::new();
        for &(r2, c2, w2) in &other.entries {
            if let Some((r1, w1)) = by_col[r2 as usize] {
                entries.push((r1, c2, w1 * w2));
            }
        }
        Self::new(self.dim, entries)
    }

    pub fn dagger(&self) -> Self {
        let entries = self.entries.iter().map(|&(r, c, w)| (c, r, w)).collect();
        Self::new(self.dim, entries)
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim, self.dim);
        for &(r, c, w) in &self.entries {
            m[(r as usize, c as usize)] = Complex64::new(w, 0.0);
        }
        m
    }

    /// `out += factor * (self ψ)`.
    pub fn accumulate_vec(&self, factor: Complex64, psi: &[Complex64], out: &mut [Complex64]) {
        for &(r, c, w) in &self.entries {
            out[r as usize] += factor * w * psi[c as usize];
        }
    }

    /// `out += factor * (self ρ)` on row-major square storage.
    pub fn accumulate_left(&self, factor: Complex64, rho: &[Complex64], out: &mut [Complex64]) {
        let n = self.dim;
        for &(r, c, w) in &self.entries {
            let fw = factor * w;
            let src = &rho[c as usize * n..(c as usize + 1) * n];
            let dst = &mut out[r as usize * n..(r as usize + 1) * n];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += fw * s;
            }
        }
    }

    /// `out += rate * (self ρ self†)` — the sandwich part of a Lindblad
    /// dissipator, in one pass over the relevant entries of ρ.
    pub fn accumulate_sandwich(&self, rate: f64, rho: &[Complex64], out: &mut [Complex64]) {
        let n = self.dim;
        for &(ri, ci, wi) in &self.entries {
            let riw = rate * wi;
            let src_row = ci as usize * n;
            let dst_row = ri as usize * n;
            for &(rk, ck, wk) in &self.entries {
                out[dst_row + rk as usize] += riw * wk * rho[src_row + ck as usize];
            }
        }
    }

    /// Real diagonal of `self† self`.
    pub fn gram_diagonal(&self) -> Vec<f64> {
        let mut diag = vec![0.0; self.dim];
        for &(_, c, w) in &self.entries {
            diag[c as usize] += w * w;
        }
        diag
    }
}

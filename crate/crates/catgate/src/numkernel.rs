//! Dense complex-matrix substrate used by every other module.
//!
//! Everything here is plain row-major storage over `Complex64`. The largest
//! space in the simulator is a few hundred dimensions, where dense
//! arithmetic beats any sparse bookkeeping; the propagators keep their own
//! structured fast paths and use this module as the reference
//! implementation and oracle backend (notably [`matexp`]).
//!
//! Angular frequencies are rad/ns and times are ns wherever matrices carry
//! physical units; conversion from linear GHz happens once, at the model
//! layer.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl std::fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ComplexMatrix {}x{}", self.rows, self.cols)?;
        let show = self.rows.min(8);
        for i in 0..show {
            let entries: Vec<String> = (0..self.cols.min(8))
                .map(|j| format!("{:.4}{:+.4}i", self[(i, j)].re, self[(i, j)].im))
                .collect();
            writeln!(f, "  [{}]", entries.join(", "))?;
        }
        if self.rows > show {
            writeln!(f, "  ...")?;
        }
        Ok(())
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let entries: Vec<Complex64> = diag.iter().map(|&d| Complex64::new(d, 0.0)).collect();
        Self::from_diag(&entries)
    }

    /// Build from nested row slices; rows must all have the same length.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            m.data[i * c..(i + 1) * c].copy_from_slice(row);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::NonSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    fn require_same_shape(&self, other: &Self, context: &'static str) -> Result<()> {
        if self.rows == other.rows && self.cols == other.cols {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                left: format!("{}x{}", self.rows, self.cols),
                right: format!("{}x{}", other.rows, other.cols),
                context,
            })
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.require_same_shape(other, "add")?;
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.require_same_shape(other, "sub")?;
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        Ok(out)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= factor;
        }
        out
    }

    pub fn add_assign_scaled(&mut self, other: &Self, factor: Complex64) {
        debug_assert_eq!(self.rows, other.rows);
        debug_assert_eq!(self.cols, other.cols);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += factor * b;
        }
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                left: format!("{}x{}", self.rows, self.cols),
                right: format!("{}x{}", other.rows, other.cols),
                context: "matmul",
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        // i-k-j loop order keeps both inner accesses contiguous.
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let aik = self.data[i * self.cols + k];
                if aik == Complex64::ZERO {
                    continue;
                }
                let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += aik * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mat_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch {
                left: format!("{}x{}", self.rows, self.cols),
                right: format!("{}", v.len()),
                context: "mat_vec",
            });
        }
        let out = (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, x)| a * x).sum())
            .collect();
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        let n = self.rows.min(self.cols);
        (0..n).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        let mut sums = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (s, z) in sums.iter_mut().zip(self.row(i)) {
                *s += z.norm();
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// `max |A - A†|`, the deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian_within(&self, tol: f64) -> bool {
        self.is_square() && self.hermiticity_defect() <= tol * self.max_abs_entry().max(1e-300)
    }

    pub fn hermitian_part(&self) -> Self {
        let adj = self.dagger();
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&adj.data) {
            *a = (*a + b) * 0.5;
        }
        out
    }
}

/// Kronecker product; `kron(a, b)[(i*rb + k, j*cb + l)] = a[i,j] * b[k,l]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ra, ca) = (a.rows(), a.cols());
    let (rb, cb) = (b.rows(), b.cols());
    let mut out = ComplexMatrix::zeros(ra * rb, ca * cb);
    for i in 0..ra {
        for j in 0..ca {
            let aij = a[(i, j)];
            if aij == Complex64::ZERO {
                continue;
            }
            for k in 0..rb {
                let dst = (i * rb + k) * out.cols + j * cb;
                let src = &b.data[k * cb..(k + 1) * cb];
                for (o, s) in out.data[dst..dst + cb].iter_mut().zip(src) {
                    *o += aij * s;
                }
            }
        }
    }
    out
}

pub fn trace(a: &ComplexMatrix) -> Complex64 {
    a.trace()
}

pub fn dagger(a: &ComplexMatrix) -> ComplexMatrix {
    a.dagger()
}

pub fn frobenius_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    a.require_same_shape(b, "frobenius_distance")?;
    let mut acc = 0.0;
    for (x, y) in a.data.iter().zip(&b.data) {
        acc += (x - y).norm_sqr();
    }
    Ok(acc.sqrt())
}

// Padé-13 coefficients for the diagonal approximant of exp.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const PADE13_THETA: f64 = 4.25;

/// Matrix exponential `exp(scale * a)` by scaling-and-squaring with a
/// Padé-13 core. For anti-Hermitian `scale * a` the result is unitary to
/// better than 1e-10; this is the oracle the propagators are validated
/// against.
pub fn matexp(a: &ComplexMatrix, scale: f64) -> Result<ComplexMatrix> {
    a.require_square()?;
    let n = a.rows();
    if n == 0 {
        return Ok(ComplexMatrix::zeros(0, 0));
    }
    let mut b = a.scale(Complex64::new(scale, 0.0));
    // Shift by the mean eigenvalue; exp(B) = e^mu * exp(B - mu I).
    let mu = b.trace() / n as f64;
    for i in 0..n {
        b[(i, i)] -= mu;
    }
    let norm = b.one_norm();
    let squarings = if norm > PADE13_THETA {
        (norm / PADE13_THETA).log2().ceil() as u32
    } else {
        0
    };
    let factor = Complex64::new(0.5f64.powi(squarings as i32), 0.0);
    let b = b.scale(factor);

    let ident = ComplexMatrix::identity(n);
    let b2 = b.matmul(&b)?;
    let b4 = b2.matmul(&b2)?;
    let b6 = b2.matmul(&b4)?;

    let real = |x: f64| Complex64::new(x, 0.0);
    // U = B (B6 (b13 B6 + b11 B4 + b9 B2) + b7 B6 + b5 B4 + b3 B2 + b1 I)
    let mut inner = b6.scale(real(PADE13[13]));
    inner.add_assign_scaled(&b4, real(PADE13[11]));
    inner.add_assign_scaled(&b2, real(PADE13[9]));
    let mut u = b6.matmul(&inner)?;
    u.add_assign_scaled(&b6, real(PADE13[7]));
    u.add_assign_scaled(&b4, real(PADE13[5]));
    u.add_assign_scaled(&b2, real(PADE13[3]));
    u.add_assign_scaled(&ident, real(PADE13[1]));
    let u = b.matmul(&u)?;
    // V = B6 (b12 B6 + b10 B4 + b8 B2) + b6 B6 + b4 B4 + b2 B2 + b0 I
    let mut inner = b6.scale(real(PADE13[12]));
    inner.add_assign_scaled(&b4, real(PADE13[10]));
    inner.add_assign_scaled(&b2, real(PADE13[8]));
    let mut v = b6.matmul(&inner)?;
    v.add_assign_scaled(&b6, real(PADE13[6]));
    v.add_assign_scaled(&b4, real(PADE13[4]));
    v.add_assign_scaled(&b2, real(PADE13[2]));
    v.add_assign_scaled(&ident, real(PADE13[0]));

    // exp(B) ~= (V - U)^-1 (V + U)
    let rhs = v.add(&u)?;
    let lhs = v.sub(&u)?;
    let mut result = lu_solve(&lhs, &rhs)?;
    for _ in 0..squarings {
        result = result.matmul(&result)?;
    }
    Ok(result.scale(mu.exp()))
}

/// Solve `A X = B` by LU decomposition with partial pivoting.
fn lu_solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.require_square()?;
    let n = a.rows();
    if b.rows() != n {
        return Err(Error::DimensionMismatch {
            left: format!("{}x{}", a.rows(), a.cols()),
            right: format!("{}x{}", b.rows(), b.cols()),
            context: "lu_solve",
        });
    }
    let mut lu = a.clone();
    let mut x = b.clone();
    let m = x.cols();
    for col in 0..n {
        let (pivot_row, pivot_mag) = (col..n)
            .map(|r| (r, lu[(r, col)].norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if pivot_mag == 0.0 {
            return Err(Error::Numerical("singular matrix in lu_solve".into()));
        }
        if pivot_row != col {
            for j in 0..n {
                lu.data.swap(col * n + j, pivot_row * n + j);
            }
            for j in 0..m {
                x.data.swap(col * m + j, pivot_row * m + j);
            }
        }
        let pivot = lu[(col, col)];
        for r in col + 1..n {
            let factor = lu[(r, col)] / pivot;
            lu[(r, col)] = factor;
            if factor == Complex64::ZERO {
                continue;
            }
            for j in col + 1..n {
                let upper = lu[(col, j)];
                lu[(r, j)] -= factor * upper;
            }
            for j in 0..m {
                let rhs = x[(col, j)];
                x[(r, j)] -= factor * rhs;
            }
        }
    }
    // Back substitution.
    for col in (0..n).rev() {
        let pivot = lu[(col, col)];
        for j in 0..m {
            let mut acc = x[(col, j)];
            for k in col + 1..n {
                acc -= lu[(col, k)] * x[(k, j)];
            }
            x[(col, j)] = acc / pivot;
        }
    }
    Ok(x)
}

/// Smallest eigenvalue of the Hermitian part of `a`.
///
/// Lanczos with full reorthogonalization; on a space this small the
/// iteration is run until the Krylov basis is exhausted or the lowest Ritz
/// value stops moving, so the result is accurate to machine-level for the
/// matrices the simulator produces. Used by the density-matrix positivity
/// checks.
pub fn min_eigenvalue_hermitian(a: &ComplexMatrix) -> Result<f64> {
    a.require_square()?;
    let n = a.rows();
    if n == 0 {
        return Err(Error::InvalidParams("empty matrix".into()));
    }
    let h = a.hermitian_part();
    if n == 1 {
        return Ok(h[(0, 0)].re);
    }
    let scale = h.max_abs_entry();
    if scale == 0.0 {
        return Ok(0.0);
    }

    // Deterministic pseudo-random start vector.
    let mut seed: u64 = 0x9e3779b97f4a7c15;
    let mut next = || {
        seed = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5
    };
    let mut v: Vec<Complex64> = (0..n).map(|_| Complex64::new(next(), next())).collect();
    normalize(&mut v);

    let mut basis: Vec<Vec<Complex64>> = vec![v.clone()];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut previous_min = f64::INFINITY;

    for k in 0..n {
        let mut w = h.mat_vec(&basis[k])?;
        let alpha = inner(&basis[k], &w).re;
        alphas.push(alpha);
        // Full reorthogonalization, twice for good measure.
        for _ in 0..2 {
            for q in &basis {
                let c = inner(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let beta = norm(&w);
        let min_ritz = tridiag_min_eigenvalue(&alphas, &betas);
        let converged = (previous_min - min_ritz).abs() <= 1e-14 * scale;
        previous_min = min_ritz;
        if beta <= 1e-14 * scale || converged && k > 4 {
            return Ok(min_ritz);
        }
        betas.push(beta);
        for wi in w.iter_mut() {
            *wi /= beta;
        }
        basis.push(w);
    }
    Ok(tridiag_min_eigenvalue(&alphas, &betas))
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(v: &mut [Complex64]) {
    let n = norm(v);
    for z in v.iter_mut() {
        *z /= n;
    }
}

/// Smallest eigenvalue of a symmetric tridiagonal matrix by Sturm bisection.
fn tridiag_min_eigenvalue(alphas: &[f64], betas: &[f64]) -> f64 {
    let n = alphas.len();
    debug_assert!(betas.len() + 1 >= n);
    // Gershgorin bounds.
    let mut low = f64::INFINITY;
    let mut high = f64::NEG_INFINITY;
    for i in 0..n {
        let b_prev = if i > 0 { betas[i - 1].abs() } else { 0.0 };
        let b_next = if i < n - 1 { betas[i].abs() } else { 0.0 };
        low = low.min(alphas[i] - b_prev - b_next);
        high = high.max(alphas[i] + b_prev + b_next);
    }
    if n == 1 {
        return alphas[0];
    }
    // Count of eigenvalues below x via the Sturm sequence.
    let count_below = |x: f64| -> usize {
        let mut count = 0;
        let mut d = 1.0f64;
        for i in 0..n {
            let b2 = if i > 0 { betas[i - 1] * betas[i - 1] } else { 0.0 };
            d = alphas[i] - x - if i > 0 { b2 / d } else { 0.0 };
            if d == 0.0 {
                d = 1e-300;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    let (mut lo, mut hi) = (low, high);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count_below(mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-16 * (1.0 + hi.abs().max(lo.abs())) {
            break;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C64;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_matrix(rng: &mut impl Rng, n: usize, scale: f64) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |_, _| {
            c(
                rng.random_range(-scale..scale),
                rng.random_range(-scale..scale),
            )
        })
    }

    fn random_anti_hermitian(rng: &mut impl Rng, n: usize, scale: f64) -> ComplexMatrix {
        let a = random_matrix(rng, n, scale);
        a.sub(&a.dagger()).unwrap().scale(c(0.5, 0.0))
    }

    /// Brute-force Kronecker product straight from the index formula.
    fn kron_oracle(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::from_fn(a.rows() * b.rows(), a.cols() * b.cols(), |i, j| {
            a[(i / b.rows(), j / b.cols())] * b[(i % b.rows(), j % b.cols())]
        })
    }

    /// Plain Taylor series, valid for small norms; independent of the
    /// Padé path in `matexp`.
    fn matexp_taylor(a: &ComplexMatrix) -> ComplexMatrix {
        let n = a.rows();
        let mut sum = ComplexMatrix::identity(n);
        let mut term = ComplexMatrix::identity(n);
        for k in 1..40 {
            term = term.matmul(a).unwrap().scale(c(1.0 / k as f64, 0.0));
            sum = sum.add(&term).unwrap();
        }
        sum
    }

    #[test]
    fn kron_identities() {
        let result = kron(&ComplexMatrix::identity(2), &ComplexMatrix::identity(3));
        assert_eq!(result, ComplexMatrix::identity(6));
    }

    #[test]
    fn kron_diagonal() {
        let a = ComplexMatrix::from_real_diag(&[1.0, 2.0]);
        let b = ComplexMatrix::from_real_diag(&[3.0, 4.0]);
        let expected = ComplexMatrix::from_real_diag(&[3.0, 4.0, 6.0, 8.0]);
        assert_eq!(kron(&a, &b), expected);
    }

    #[test]
    fn kron_matches_oracle_and_mixed_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let a = random_matrix(&mut rng, 3, 1.0);
            let b = random_matrix(&mut rng, 3, 1.0);
            let cm = random_matrix(&mut rng, 3, 1.0);
            let d = random_matrix(&mut rng, 3, 1.0);
            assert!(frobenius_distance(&kron(&a, &b), &kron_oracle(&a, &b)).unwrap() < 1e-14);
            // kron(a,b) kron(c,d) = kron(ac, bd)
            let lhs = kron(&a, &b).matmul(&kron(&cm, &d)).unwrap();
            let rhs = kron(&a.matmul(&cm).unwrap(), &b.matmul(&d).unwrap());
            assert!(frobenius_distance(&lhs, &rhs).unwrap() < 1e-12);
        }
    }

    #[test]
    fn kron_associative_on_integers() {
        let a = ComplexMatrix::from_fn(2, 2, |i, j| c((i * 2 + j) as f64, 0.0));
        let b = ComplexMatrix::from_fn(2, 3, |i, j| c((i + 2 * j) as f64, 0.0));
        let d = ComplexMatrix::from_fn(3, 2, |i, j| c((2 * i + 3 * j) as f64, 0.0));
        let left = kron(&kron(&a, &b), &d);
        let right = kron(&a, &kron(&b, &d));
        assert_eq!(left, right);
    }

    #[test]
    fn trace_of_kron_factorizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_matrix(&mut rng, 4, 2.0);
        let b = random_matrix(&mut rng, 5, 2.0);
        let lhs = trace(&kron(&a, &b));
        let rhs = trace(&a) * trace(&b);
        assert!((lhs - rhs).norm() < 1e-12 * rhs.norm().max(1.0));
    }

    #[test]
    fn trace_identity() {
        assert_eq!(trace(&ComplexMatrix::identity(5)), c(5.0, 0.0));
    }

    #[test]
    fn frobenius_distance_self_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_matrix(&mut rng, 6, 1.0);
        assert_eq!(frobenius_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn frobenius_distance_rejects_mismatch() {
        let a = ComplexMatrix::zeros(2, 2);
        let b = ComplexMatrix::zeros(3, 3);
        assert!(frobenius_distance(&a, &b).is_err());
    }

    #[test]
    fn matexp_zero_is_identity() {
        let z = ComplexMatrix::zeros(4, 4);
        let e = matexp(&z, 1.0).unwrap();
        assert!(frobenius_distance(&e, &ComplexMatrix::identity(4)).unwrap() < 1e-14);
    }

    #[test]
    fn matexp_diagonal() {
        let a = ComplexMatrix::from_diag(&[c(0.0, std::f64::consts::PI), C64::ZERO]);
        let e = matexp(&a, 1.0).unwrap();
        let expected = ComplexMatrix::from_real_diag(&[-1.0, 1.0]);
        assert!(frobenius_distance(&e, &expected).unwrap() < 1e-12);
    }

    #[test]
    fn matexp_rejects_non_square() {
        assert!(matexp(&ComplexMatrix::zeros(2, 3), 1.0).is_err());
    }

    #[test]
    fn matexp_anti_hermitian_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let a = random_anti_hermitian(&mut rng, 8, 3.0);
        let u = matexp(&a, 1.0).unwrap();
        let gram = u.dagger().matmul(&u).unwrap();
        assert!(frobenius_distance(&gram, &ComplexMatrix::identity(8)).unwrap() < 1e-10);
    }

    #[test]
    fn matexp_inverse_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..3 {
            let mut a = random_matrix(&mut rng, 6, 1.0);
            // clamp to one-norm <= 10
            let n1 = a.one_norm();
            if n1 > 10.0 {
                a = a.scale(c(10.0 / n1, 0.0));
            }
            let e = matexp(&a, 1.0).unwrap();
            let einv = matexp(&a, -1.0).unwrap();
            let prod = e.matmul(&einv).unwrap();
            assert!(
                frobenius_distance(&prod, &ComplexMatrix::identity(6)).unwrap() < 1e-10,
                "exp(A) exp(-A) != I"
            );
        }
    }

    #[test]
    fn matexp_matches_taylor_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..4 {
            let a = random_matrix(&mut rng, 5, 0.08);
            let pade = matexp(&a, 1.0).unwrap();
            let taylor = matexp_taylor(&a);
            assert!(frobenius_distance(&pade, &taylor).unwrap() < 1e-12);
        }
    }

    #[test]
    fn matexp_large_norm_scaling() {
        // exp(i theta sigma_x) has period 2 pi; check at a large argument.
        let sx = ComplexMatrix::from_rows(&[
            vec![C64::ZERO, C64::ONE],
            vec![C64::ONE, C64::ZERO],
        ]);
        let theta = 1000.0 * std::f64::consts::PI + 0.25;
        let u = matexp(&sx.scale(c(0.0, 1.0)), theta).unwrap();
        // exp(i theta sx) = cos(theta) I + i sin(theta) sx
        let expected = ComplexMatrix::from_rows(&[
            vec![c(theta.cos(), 0.0), c(0.0, theta.sin())],
            vec![c(0.0, theta.sin()), c(theta.cos(), 0.0)],
        ]);
        assert!(frobenius_distance(&u, &expected).unwrap() < 1e-9);
    }

    #[test]
    fn min_eigenvalue_diagonal() {
        let a = ComplexMatrix::from_real_diag(&[0.2, -0.1]);
        assert!((min_eigenvalue_hermitian(&a).unwrap() + 0.1).abs() < 1e-12);
    }

    #[test]
    fn min_eigenvalue_known_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let spectrum = [-0.35, -0.02, 0.0, 0.11, 0.4, 1.7, 2.0, 5.0];
        let d = ComplexMatrix::from_real_diag(&spectrum);
        let g = random_anti_hermitian(&mut rng, spectrum.len(), 1.0);
        let u = matexp(&g, 1.0).unwrap();
        let a = u.matmul(&d).unwrap().matmul(&u.dagger()).unwrap();
        let min = min_eigenvalue_hermitian(&a).unwrap();
        assert!((min + 0.35).abs() < 1e-10, "got {min}");
    }

    #[test]
    fn min_eigenvalue_clustered_spectrum() {
        // Density-matrix-like spectrum: many near-zero values, one slightly
        // negative outlier that the positivity check must not miss.
        let mut spectrum = vec![0.0; 30];
        spectrum[0] = 0.9;
        spectrum[1] = 0.1;
        for (i, s) in spectrum.iter_mut().enumerate().skip(2) {
            *s = 1e-9 * (i as f64 - 16.0);
        }
        spectrum[29] = -3e-6;
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let d = ComplexMatrix::from_real_diag(&spectrum);
        let g = random_anti_hermitian(&mut rng, spectrum.len(), 1.0);
        let u = matexp(&g, 1.0).unwrap();
        let a = u.matmul(&d).unwrap().matmul(&u.dagger()).unwrap();
        let min = min_eigenvalue_hermitian(&a).unwrap();
        assert!((min + 3e-6).abs() < 1e-12, "got {min}");
    }

    #[test]
    fn hermiticity_defect_detects_asymmetry() {
        let mut a = ComplexMatrix::identity(3);
        a[(0, 1)] = c(0.0, 1e-3);
        assert!(a.hermiticity_defect() > 5e-4);
        assert!(!a.is_hermitian_within(1e-12));
        assert!(a.hermitian_part().hermiticity_defect() < 1e-16);
    }

    #[test]
    fn lu_solve_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_matrix(&mut rng, 7, 1.0);
        let x = random_matrix(&mut rng, 7, 1.0);
        let b = a.matmul(&x).unwrap();
        let solved = lu_solve(&a, &b).unwrap();
        assert!(frobenius_distance(&solved, &x).unwrap() < 1e-10);
    }
}

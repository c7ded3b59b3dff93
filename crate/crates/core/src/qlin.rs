//! Dense complex linear algebra for the 2×2 and 4×4 matrices that appear in
//! two-qubit problems.
//!
//! Basis ordering is `|00⟩, |01⟩, |10⟩, |11⟩` (row-major, first factor is the
//! most significant index). Everything here is small enough that clarity wins
//! over blocking or SIMD; the Hermitian eigensolver is a cyclic complex Jacobi
//! iteration, which is deterministic and accurate to a few ulps at this size.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Tolerance for logical predicates (PSD, entangled, entanglement breaking).
pub const PREDICATE_TOL: f64 = 1e-9;
/// Tolerance for algebraic round trips.
pub const ROUND_TRIP_TOL: f64 = 1e-12;
/// Maximum Hermiticity defect accepted by [`herm_eig`].
pub const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },
    #[error("matrix is not Hermitian (max |H - H^dag| = {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("matrix has negative eigenvalue {value:e} below tolerance")]
    NegativeEigenvalue { value: f64 },
    #[error("matrix contains non-finite entries")]
    NonFinite,
}

fn mismatch(expected: impl Into<String>, found: impl Into<String>) -> LinalgError {
    LinalgError::DimensionMismatch {
        expected: expected.into(),
        found: found.into(),
    }
}

/// Which tensor factor of a bipartite operator an operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subsystem {
    A,
    B,
}

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self, LinalgError> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(mismatch(
                format!("{rows}x{cols} entries"),
                format!("{} entries", data.len()),
            ));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from real row slices. Panics on ragged input; meant for
    /// literals.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let m = rows[0].len();
        let mut out = Self::zeros(n, m);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), m, "ragged rows");
            for (j, &x) in r.iter().enumerate() {
                out[(i, j)] = C64::new(x, 0.0);
            }
        }
        out
    }

    pub fn from_rows(rows: &[&[C64]]) -> Self {
        let n = rows.len();
        let m = rows[0].len();
        let mut out = Self::zeros(n, m);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), m, "ragged rows");
            for (j, &x) in r.iter().enumerate() {
                out[(i, j)] = x;
            }
        }
        out
    }

    pub fn diag_real(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = C64::new(x, 0.0);
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

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// `self · rho · self†`.
    pub fn sandwich(&self, rho: &CMatrix) -> CMatrix {
        &(self * rho) * &self.adjoint()
    }

    pub fn matvec(&self, v: &CVector) -> CVector {
        assert_eq!(self.cols, v.dim(), "matvec dimension mismatch");
        let data = (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect();
        CVector { data }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `(H + H†)/2`.
    pub fn hermitian_part(&self) -> CMatrix {
        (self + &self.adjoint()).scale_real(0.5)
    }

    /// Largest singular value, via the spectrum of `A†A`.
    pub fn spectral_norm(&self) -> f64 {
        let gram = (&self.adjoint() * self).hermitian_part();
        herm_eig(&gram)
            .map(|e| e.eigenvalues[0].max(0.0).sqrt())
            .unwrap_or(f64::NAN)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<'a> Mul<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &'a CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl<'a> Add<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &'a CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &'a CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Dense complex column vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CVector {
    data: Vec<C64>,
}

impl CVector {
    pub fn new(data: Vec<C64>) -> Result<Self, LinalgError> {
        if data.is_empty() {
            return Err(mismatch("non-empty vector", "0 entries"));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self { data })
    }

    pub fn from_real(data: &[f64]) -> Self {
        Self {
            data: data.iter().map(|&x| C64::new(x, 0.0)).collect(),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            data: vec![ZERO; dim],
        }
    }

    /// Standard basis vector `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.data[index] = ONE;
        v
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨self|other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &CVector) -> C64 {
        assert_eq!(self.dim(), other.dim(), "inner product dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|self⟩⟨other|`.
    pub fn outer(&self, other: &CVector) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim(), other.dim());
        for i in 0..self.dim() {
            for j in 0..other.dim() {
                out[(i, j)] = self.data[i] * other.data[j].conj();
            }
        }
        out
    }

    pub fn projector(&self) -> CMatrix {
        self.outer(self)
    }

    pub fn scale(&self, s: C64) -> CVector {
        CVector {
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    /// Unit vector along `self`; `None` for the zero vector.
    pub fn normalized(&self) -> Option<CVector> {
        let n = self.norm();
        (n > 0.0).then(|| self.scale(C64::new(1.0 / n, 0.0)))
    }

    pub fn kron(&self, other: &CVector) -> CVector {
        let mut data = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.data {
            for b in &other.data {
                data.push(a * b);
            }
        }
        CVector { data }
    }

    pub fn add(&self, other: &CVector) -> CVector {
        assert_eq!(self.dim(), other.dim());
        CVector {
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Index<usize> for CVector {
    type Output = C64;

    fn index(&self, i: usize) -> &C64 {
        &self.data[i]
    }
}

impl IndexMut<usize> for CVector {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.data[i]
    }
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct EigResult {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal, `eigenvectors[i]` belongs to `eigenvalues[i]`.
    pub eigenvectors: Vec<CVector>,
}

impl EigResult {
    /// `Σ λᵢ vᵢ vᵢ†`.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.eigenvalues.len();
        let mut out = CMatrix::zeros(n, n);
        for (lam, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            out = &out + &v.projector().scale_real(*lam);
        }
        out
    }

    pub fn min(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }
}

/// Kronecker product `a ⊗ b`.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(a.rows * b.rows, a.cols * b.cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let aij = a[(i, j)];
            for k in 0..b.rows {
                for l in 0..b.cols {
                    out[(i * b.rows + k, j * b.cols + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Partial transpose of a two-qubit operator on the chosen factor.
pub fn partial_transpose(rho: &CMatrix, subsystem: Subsystem) -> Result<CMatrix, LinalgError> {
    if rho.rows != 4 || rho.cols != 4 {
        return Err(mismatch("4x4", format!("{}x{}", rho.rows, rho.cols)));
    }
    let mut out = CMatrix::zeros(4, 4);
    for a in 0..2 {
        for b in 0..2 {
            for a2 in 0..2 {
                for b2 in 0..2 {
                    let (ra, rb, ca, cb) = match subsystem {
                        Subsystem::A => (a2, b, a, b2),
                        Subsystem::B => (a, b2, a2, b),
                    };
                    out[(2 * a + b, 2 * a2 + b2)] = rho[(2 * ra + rb, 2 * ca + cb)];
                }
            }
        }
    }
    Ok(out)
}

/// Reduced operator on `keep` of a `dims.0 ⊗ dims.1` operator.
pub fn partial_trace(
    rho: &CMatrix,
    dims: (usize, usize),
    keep: Subsystem,
) -> Result<CMatrix, LinalgError> {
    let (da, db) = dims;
    let n = da * db;
    if da == 0 || db == 0 || rho.rows != n || rho.cols != n {
        return Err(mismatch(
            format!("{n}x{n} for dims ({da},{db})"),
            format!("{}x{}", rho.rows, rho.cols),
        ));
    }
    let out = match keep {
        Subsystem::A => {
            let mut out = CMatrix::zeros(da, da);
            for i in 0..da {
                for j in 0..da {
                    out[(i, j)] = (0..db).map(|k| rho[(i * db + k, j * db + k)]).sum();
                }
            }
            out
        }
        Subsystem::B => {
            let mut out = CMatrix::zeros(db, db);
            for i in 0..db {
                for j in 0..db {
                    out[(i, j)] = (0..da).map(|k| rho[(k * db + i, k * db + j)]).sum();
                }
            }
            out
        }
    };
    Ok(out)
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi sweeps.
pub fn herm_eig(h: &CMatrix) -> Result<EigResult, LinalgError> {
    if !h.is_square() {
        return Err(mismatch("square matrix", format!("{}x{}", h.rows, h.cols)));
    }
    let residual = h.hermiticity_defect();
    if !residual.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    if residual > HERMITIAN_TOL {
        return Err(LinalgError::NotHermitian { residual });
    }
    let n = h.rows;
    let mut a = h.hermitian_part();
    for i in 0..n {
        a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
    }
    let mut v = CMatrix::identity(n);
    let scale: f64 = a.data.iter().map(|z| z.norm_sqr()).sum();

    for _sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off <= f64::EPSILON * f64::EPSILON * scale * 1e-4 || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let g = apq.norm();
                if g == 0.0 {
                    continue;
                }
                let phase = apq / g;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = 0.5 * (2.0 * g).atan2(aqq - app);
                let (s, c) = theta.sin_cos();
                // G = diag(1, conj(phase)) · [[c, s], [-s, c]]
                let g00 = C64::new(c, 0.0);
                let g01 = C64::new(s, 0.0);
                let g10 = -phase.conj() * s;
                let g11 = phase.conj() * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * g00 + akq * g10;
                    a[(k, q)] = akp * g01 + akq * g11;
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * g00 + vkq * g10;
                    v[(k, q)] = vkp * g01 + vkq * g11;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = g00.conj() * apk + g10.conj() * aqk;
                    a[(q, k)] = g01.conj() * apk + g11.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = order
        .iter()
        .map(|&j| CVector {
            data: (0..n).map(|i| v[(i, j)]).collect(),
        })
        .collect();
    Ok(EigResult {
        eigenvalues,
        eigenvectors,
    })
}

/// Pseudo-inverse square root of a PSD matrix. Eigenvalues with magnitude at
/// most `tol` are dropped.
pub fn psd_sqrt_inv(m: &CMatrix, tol: f64) -> Result<CMatrix, LinalgError> {
    let eig = herm_eig(m)?;
    let n = m.rows;
    let mut out = CMatrix::zeros(n, n);
    for (&lam, v) in eig.eigenvalues.iter().zip(&eig.eigenvectors) {
        if lam < -tol {
            return Err(LinalgError::NegativeEigenvalue { value: lam });
        }
        if lam > tol {
            out = &out + &v.projector().scale_real(1.0 / lam.sqrt());
        }
    }
    Ok(out)
}

/// Pauli matrices `[X, Y, Z]`.
pub fn paulis() -> [CMatrix; 3] {
    [
        CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]),
        CMatrix::from_rows(&[&[ZERO, -I], &[I, ZERO]]),
        CMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sample_hermitian(seed: u64) -> CMatrix {
        // small LCG keeps this test self-contained
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut m = CMatrix::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] = C64::new(next(), next());
            }
        }
        m.hermitian_part()
    }

    fn phi_plus() -> CVector {
        let r = 1.0 / 2f64.sqrt();
        CVector::from_real(&[r, 0.0, 0.0, r])
    }

    #[test]
    fn tensor_identities_and_projectors() {
        let i2 = CMatrix::identity(2);
        assert_eq!(tensor(&i2, &i2), CMatrix::identity(4));
        let p0 = CMatrix::diag_real(&[1.0, 0.0]);
        let p1 = CMatrix::diag_real(&[0.0, 1.0]);
        assert_eq!(tensor(&p0, &p1), CMatrix::diag_real(&[0.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn xx_fixes_phi_plus() {
        let [x, _, _] = paulis();
        let xx = tensor(&x, &x);
        let out = xx.matvec(&phi_plus());
        for i in 0..4 {
            assert_abs_diff_eq!((out[i] - phi_plus()[i]).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn partial_transpose_of_phi_plus() {
        let rho = phi_plus().projector();
        let pt = partial_transpose(&rho, Subsystem::B).unwrap();
        let eig = herm_eig(&pt).unwrap();
        let expected = [0.5, 0.5, 0.5, -0.5];
        for (l, e) in eig.eigenvalues.iter().zip(expected) {
            assert_abs_diff_eq!(*l, e, epsilon = 1e-12);
        }
        assert_eq!(partial_transpose(&pt, Subsystem::B).unwrap(), rho);
    }

    #[test]
    fn partial_transpose_of_product_transposes_factor() {
        let ra = CMatrix::from_rows(&[
            &[C64::new(0.6, 0.0), C64::new(0.1, 0.2)],
            &[C64::new(0.1, -0.2), C64::new(0.4, 0.0)],
        ]);
        let rb = CMatrix::from_rows(&[
            &[C64::new(0.3, 0.0), C64::new(0.0, 0.3)],
            &[C64::new(0.0, -0.3), C64::new(0.7, 0.0)],
        ]);
        let pt = partial_transpose(&tensor(&ra, &rb), Subsystem::B).unwrap();
        assert!(pt.max_abs_diff(&tensor(&ra, &rb.transpose())) < 1e-15);
        assert!(herm_eig(&pt).unwrap().min() > -1e-12);
        let pta = partial_transpose(&tensor(&ra, &rb), Subsystem::A).unwrap();
        assert!(pta.max_abs_diff(&tensor(&ra.transpose(), &rb)) < 1e-15);
    }

    #[test]
    fn partial_transpose_rejects_wrong_size() {
        assert!(matches!(
            partial_transpose(&CMatrix::identity(2), Subsystem::A),
            Err(LinalgError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn partial_trace_examples() {
        let rho = phi_plus().projector();
        let rb = partial_trace(&rho, (2, 2), Subsystem::A).unwrap();
        assert!(rb.max_abs_diff(&CMatrix::identity(2).scale_real(0.5)) < 1e-15);
        let ra = CMatrix::diag_real(&[0.25, 0.75]);
        let rbb = CMatrix::diag_real(&[2.0, 1.0]);
        let red = partial_trace(&tensor(&ra, &rbb), (2, 2), Subsystem::A).unwrap();
        assert!(red.max_abs_diff(&ra.scale_real(3.0)) < 1e-15);
        assert!(partial_trace(&rho, (2, 3), Subsystem::A).is_err());
    }

    #[test]
    fn partial_trace_unequal_dims() {
        let a = CMatrix::diag_real(&[0.2, 0.8]);
        let b = CMatrix::diag_real(&[0.5, 0.3, 0.2]);
        let ab = tensor(&a, &b);
        assert!(partial_trace(&ab, (2, 3), Subsystem::A).unwrap().max_abs_diff(&a) < 1e-15);
        assert!(partial_trace(&ab, (2, 3), Subsystem::B).unwrap().max_abs_diff(&b) < 1e-15);
    }

    #[test]
    fn eig_examples() {
        let e = herm_eig(&CMatrix::diag_real(&[1.0, 3.0])).unwrap();
        assert_eq!(e.eigenvalues, vec![3.0, 1.0]);
        let [x, _, _] = paulis();
        let e = herm_eig(&x).unwrap();
        assert_abs_diff_eq!(e.eigenvalues[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.eigenvalues[1], -1.0, epsilon = 1e-14);
        let plus = CVector::from_real(&[1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt()]);
        assert_abs_diff_eq!(e.eigenvectors[0].inner(&plus).norm(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(herm_eig(&m), Err(LinalgError::NotHermitian { .. })));
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        for seed in 0..200 {
            let h = sample_hermitian(seed);
            let e = herm_eig(&h).unwrap();
            assert!(e.reconstruct().max_abs_diff(&h) <= 1e-10);
            let tr: f64 = e.eigenvalues.iter().sum();
            assert_abs_diff_eq!(tr, h.trace().re, epsilon = 1e-10);
            for i in 0..4 {
                for j in 0..4 {
                    let g = e.eigenvectors[i].inner(&e.eigenvectors[j]);
                    let target = if i == j { 1.0 } else { 0.0 };
                    assert!((g - C64::new(target, 0.0)).norm() <= 1e-10);
                }
            }
            assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn eig_handles_degenerate_and_complex() {
        let h = CMatrix::from_rows(&[&[ONE, I], &[-I, ONE]]);
        let e = herm_eig(&h).unwrap();
        assert_abs_diff_eq!(e.eigenvalues[0], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.eigenvalues[1], 0.0, epsilon = 1e-14);
        let e = herm_eig(&CMatrix::identity(4)).unwrap();
        assert!(e.eigenvalues.iter().all(|&l| l == 1.0));
    }

    #[test]
    fn sqrt_inv_examples() {
        let i2 = CMatrix::identity(2);
        assert!(psd_sqrt_inv(&i2, 1e-12).unwrap().max_abs_diff(&i2) < 1e-15);
        let d = psd_sqrt_inv(&CMatrix::diag_real(&[4.0, 1.0]), 1e-12).unwrap();
        assert!(d.max_abs_diff(&CMatrix::diag_real(&[0.5, 1.0])) < 1e-15);
        let p0 = CMatrix::diag_real(&[1.0, 0.0]);
        assert!(psd_sqrt_inv(&p0, 1e-12).unwrap().max_abs_diff(&p0) < 1e-15);
        assert!(matches!(
            psd_sqrt_inv(&CMatrix::diag_real(&[1.0, -0.5]), 1e-12),
            Err(LinalgError::NegativeEigenvalue { .. })
        ));
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let m = CMatrix::diag_real(&[0.3, -2.0]);
        assert_abs_diff_eq!(m.spectral_norm(), 2.0, epsilon = 1e-14);
    }
}

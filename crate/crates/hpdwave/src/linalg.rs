//! Dense complex Hermitian/HPD matrix kernel.
//!
//! Everything in this crate operates on small dense matrices (typically
//! 2x2 to 10x10), so the eigensolver is a cyclic complex Jacobi iteration:
//! unconditionally stable for Hermitian input and bit-reproducible at a
//! fixed sweep order. Matrices are stored row-major in double precision.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative off-diagonal tolerance of the Jacobi eigensolver.
pub const TOL_EIG: f64 = 1e-12;
/// Relative tolerance used in reconstruction post-conditions.
pub const TOL_FN: f64 = 1e-10;
/// Maximum number of Jacobi sweeps before `NonConvergence`.
const MAX_SWEEPS: usize = 50;

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from a row-major slice of entries.
    pub fn from_rows(dim: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        let m = ComplexMatrix {
            dim,
            data: entries.to_vec(),
        };
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(m)
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out[(i, j)] = self[(j, i)].conj();
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let d = self.dim;
        debug_assert_eq!(d, other.dim);
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self[(i, k)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..d {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        for z in &mut out.data {
            *z *= s;
        }
        out
    }

    fn zip(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Frobenius inner product `Tr(a^* b)` (conjugate-linear in `a`).
    pub fn frobenius_inner(&self, other: &Self) -> Complex64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Max absolute entry difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

/// Hermitian matrix: stored with exact conjugate symmetry and real diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    mat: ComplexMatrix,
}

impl HermitianMatrix {
    /// Symmetrizes `(m + m^*)/2` and zeroes diagonal imaginary parts, so the
    /// stored invariant holds exactly regardless of rounding in `m`.
    pub fn symmetrize(m: ComplexMatrix) -> Self {
        let d = m.dim();
        let mut out = ComplexMatrix::zeros(d);
        for i in 0..d {
            out[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
            for j in (i + 1)..d {
                let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                out[(i, j)] = z;
                out[(j, i)] = z.conj();
            }
        }
        HermitianMatrix { mat: out }
    }

    pub fn zeros(dim: usize) -> Self {
        HermitianMatrix {
            mat: ComplexMatrix::zeros(dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        HermitianMatrix {
            mat: ComplexMatrix::identity(dim),
        }
    }

    pub fn diag(values: &[f64]) -> Self {
        HermitianMatrix {
            mat: ComplexMatrix::diag(values),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn add(&self, other: &Self) -> Self {
        HermitianMatrix {
            mat: self.mat.add(&other.mat),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        HermitianMatrix {
            mat: self.mat.sub(&other.mat),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        HermitianMatrix {
            mat: self.mat.scale(s),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.frobenius_norm()
    }

    /// Trace of a Hermitian matrix is real.
    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }
}

impl std::ops::Index<(usize, usize)> for HermitianMatrix {
    type Output = Complex64;
    fn index(&self, ij: (usize, usize)) -> &Complex64 {
        &self.mat[ij]
    }
}

/// Hermitian positive definite matrix. Constructors validate the smallest
/// eigenvalue against `eps_pd = 1e-12 * max(lambda_max, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HpdMatrix {
    h: HermitianMatrix,
}

impl HpdMatrix {
    pub fn new(h: HermitianMatrix) -> Result<Self> {
        let eig = eig_hermitian(&h)?;
        let lambda_min = eig.eigenvalues[0];
        let lambda_max = eig.eigenvalues[eig.eigenvalues.len() - 1];
        if lambda_min <= 1e-12 * lambda_max.max(1.0) {
            return Err(Error::NotPd);
        }
        Ok(HpdMatrix { h })
    }

    /// Symmetrizes first, absorbing rounding asymmetry, then validates.
    pub fn from_matrix(m: ComplexMatrix) -> Result<Self> {
        Self::new(HermitianMatrix::symmetrize(m))
    }

    /// Skips eigenvalue validation. For outputs of operations that preserve
    /// positive-definiteness exactly (congruence by invertible matrices,
    /// matrix exponentials, geodesic combinations).
    pub(crate) fn new_unchecked(h: HermitianMatrix) -> Self {
        HpdMatrix { h }
    }

    pub fn identity(dim: usize) -> Self {
        HpdMatrix {
            h: HermitianMatrix::identity(dim),
        }
    }

    pub fn diag(values: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::diag(values))
    }

    /// Matrix exponential of a Hermitian matrix, which is always HPD.
    pub fn exp_of(h: &HermitianMatrix) -> Result<Self> {
        Ok(HpdMatrix { h: matrix_exp(h)? })
    }

    /// Scaling by a strictly positive factor stays in the cone.
    pub fn scale_positive(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(Error::NotPd);
        }
        Ok(HpdMatrix {
            h: self.h.scale(factor),
        })
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.h
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.h.matrix()
    }
}

impl std::ops::Index<(usize, usize)> for HpdMatrix {
    type Output = Complex64;
    fn index(&self, ij: (usize, usize)) -> &Complex64 {
        &self.h[ij]
    }
}

/// Result of a Hermitian eigendecomposition `h = Q diag(lambda) Q^*`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    /// Eigenvalues in ascending order.
    pub eigenvalues: Vec<f64>,
    /// Unitary matrix whose columns are the eigenvectors, in the same order.
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    /// Reassembles `Q f(lambda) Q^*` as an exactly-Hermitian matrix.
    pub fn assemble(&self, values: &[f64]) -> HermitianMatrix {
        let d = self.eigenvalues.len();
        debug_assert_eq!(values.len(), d);
        let q = &self.eigenvectors;
        let mut out = ComplexMatrix::zeros(d);
        for i in 0..d {
            for j in i..d {
                let mut z = Complex64::new(0.0, 0.0);
                for k in 0..d {
                    z += q[(i, k)] * q[(j, k)].conj() * values[k];
                }
                out[(i, j)] = z;
                out[(j, i)] = z.conj();
            }
        }
        for i in 0..d {
            let re = out[(i, i)].re;
            out[(i, i)] = Complex64::new(re, 0.0);
        }
        HermitianMatrix { mat: out }
    }
}

/// Cyclic complex Jacobi eigensolver for Hermitian matrices.
///
/// Sweeps pivot pairs in fixed row-major order until the off-diagonal
/// Frobenius norm falls below `TOL_EIG` relative to the matrix norm.
pub fn eig_hermitian(h: &HermitianMatrix) -> Result<EigenDecomposition> {
    let d = h.dim();
    if d == 0 {
        return Err(Error::EmptyInput);
    }
    if d == 1 {
        return Ok(EigenDecomposition {
            eigenvalues: vec![h[(0, 0)].re],
            eigenvectors: ComplexMatrix::identity(1),
        });
    }

    let mut a = h.matrix().clone();
    let mut q = ComplexMatrix::identity(d);
    let norm = a.frobenius_norm();
    if norm == 0.0 {
        return Ok(EigenDecomposition {
            eigenvalues: vec![0.0; d],
            eigenvectors: q,
        });
    }
    let threshold = TOL_EIG * norm;

    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= threshold {
            converged = true;
            break;
        }
        for p in 0..d - 1 {
            for qi in p + 1..d {
                jacobi_rotate(&mut a, &mut q, p, qi);
            }
        }
    }
    if !converged && off_diagonal_norm(&a) > threshold {
        return Err(Error::NonConvergence("Jacobi eigensolver"));
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(d);
    for (new_col, &old_col) in order.iter().enumerate() {
        for i in 0..d {
            vectors[(i, new_col)] = q[(i, old_col)];
        }
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors: vectors,
    })
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let d = a.dim();
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One complex Jacobi rotation annihilating `a[(p, q)]`.
fn jacobi_rotate(a: &mut ComplexMatrix, q: &mut ComplexMatrix, p: usize, r: usize) {
    let d = a.dim();
    let z = a[(p, r)];
    let abs_z = z.norm();
    if abs_z == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let arr = a[(r, r)].re;
    let tau = (arr - app) / (2.0 * abs_z);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let phase = z / abs_z;
    // J[p][p] = c, J[p][r] = s*phase, J[r][p] = -s*conj(phase), J[r][r] = c.
    let jpr = phase * s;
    let jrp = -phase.conj() * s;

    // B = A J (columns p and r change).
    for i in 0..d {
        let aip = a[(i, p)];
        let air = a[(i, r)];
        a[(i, p)] = aip * c + air * jrp;
        a[(i, r)] = aip * jpr + air * c;
    }
    // A' = J^* B (rows p and r change).
    for j in 0..d {
        let apj = a[(p, j)];
        let arj = a[(r, j)];
        a[(p, j)] = apj * c + arj * jrp.conj();
        a[(r, j)] = apj * jpr.conj() + arj * c;
    }
    // Restore exact symmetry at the pivot.
    a[(p, r)] = Complex64::new(0.0, 0.0);
    a[(r, p)] = Complex64::new(0.0, 0.0);
    let app = a[(p, p)].re;
    let arr = a[(r, r)].re;
    a[(p, p)] = Complex64::new(app, 0.0);
    a[(r, r)] = Complex64::new(arr, 0.0);

    for i in 0..d {
        let qip = q[(i, p)];
        let qir = q[(i, r)];
        q[(i, p)] = qip * c + qir * jrp;
        q[(i, r)] = qip * jpr + qir * c;
    }
}

/// Applies a real scalar function to a Hermitian matrix through its
/// eigendecomposition: `Q f(lambda) Q^*`. `f` returns `None` outside
/// its domain, which maps to `DomainError`.
pub fn matrix_fn(
    h: &HermitianMatrix,
    f: impl Fn(f64) -> Option<f64>,
    name: &'static str,
) -> Result<HermitianMatrix> {
    let eig = eig_hermitian(h)?;
    let mut values = Vec::with_capacity(eig.eigenvalues.len());
    for &lambda in &eig.eigenvalues {
        match f(lambda) {
            Some(v) => values.push(v),
            None => return Err(Error::DomainError(name)),
        }
    }
    Ok(eig.assemble(&values))
}

pub fn matrix_exp(h: &HermitianMatrix) -> Result<HermitianMatrix> {
    matrix_fn(h, |x| Some(x.exp()), "exp")
}

/// Matrix logarithm; requires strictly positive eigenvalues.
pub fn matrix_log(h: &HermitianMatrix) -> Result<HermitianMatrix> {
    matrix_fn(h, |x| if x > 0.0 { Some(x.ln()) } else { None }, "log")
}

pub fn matrix_sqrt(h: &HermitianMatrix) -> Result<HermitianMatrix> {
    matrix_fn(h, |x| if x >= 0.0 { Some(x.sqrt()) } else { None }, "sqrt")
}

pub fn matrix_inv_sqrt(h: &HermitianMatrix) -> Result<HermitianMatrix> {
    matrix_fn(
        h,
        |x| if x > 0.0 { Some(1.0 / x.sqrt()) } else { None },
        "inv_sqrt",
    )
}

pub fn matrix_inverse(h: &HermitianMatrix) -> Result<HermitianMatrix> {
    matrix_fn(
        h,
        |x| if x != 0.0 { Some(1.0 / x) } else { None },
        "inverse",
    )
}

/// Real matrix power `h^t`; requires positive eigenvalues for fractional `t`.
pub fn matrix_power(h: &HermitianMatrix, t: f64) -> Result<HermitianMatrix> {
    matrix_fn(
        h,
        |x| {
            if x > 0.0 {
                Some(x.powf(t))
            } else if x == 0.0 && t > 0.0 {
                Some(0.0)
            } else {
                None
            }
        },
        "power",
    )
}

/// Hermitian square root and inverse square root of an HPD matrix from a
/// single eigendecomposition. Most manifold operations need both.
pub(crate) struct SqrtPair {
    pub sqrt: ComplexMatrix,
    pub inv_sqrt: ComplexMatrix,
}

pub(crate) fn sqrt_pair(p: &HpdMatrix) -> Result<SqrtPair> {
    let eig = eig_hermitian(p.hermitian())?;
    if eig.eigenvalues[0] <= 0.0 {
        return Err(Error::NotPd);
    }
    let roots: Vec<f64> = eig.eigenvalues.iter().map(|&x| x.sqrt()).collect();
    let inv_roots: Vec<f64> = roots.iter().map(|&x| 1.0 / x).collect();
    Ok(SqrtPair {
        sqrt: eig.assemble(&roots).into_matrix(),
        inv_sqrt: eig.assemble(&inv_roots).into_matrix(),
    })
}

/// Congruence transformation `a^* x a`, symmetrized to kill rounding asymmetry.
pub fn congruence(a: &ComplexMatrix, x: &HermitianMatrix) -> Result<HermitianMatrix> {
    if a.dim() != x.dim() {
        return Err(Error::DimMismatch {
            expected: x.dim(),
            got: a.dim(),
        });
    }
    Ok(congruence_raw(a, x.matrix()))
}

pub(crate) fn congruence_raw(a: &ComplexMatrix, x: &ComplexMatrix) -> HermitianMatrix {
    HermitianMatrix::symmetrize(a.adjoint().mul(&x.mul(a)))
}

/// Congruence of an HPD matrix by an invertible matrix stays HPD.
pub fn congruence_hpd(a: &ComplexMatrix, x: &HpdMatrix) -> Result<HpdMatrix> {
    if a.dim() != x.dim() {
        return Err(Error::DimMismatch {
            expected: x.dim(),
            got: a.dim(),
        });
    }
    Ok(HpdMatrix::new_unchecked(congruence_raw(a, x.matrix())))
}

/// Lower Cholesky factor `L` with positive real diagonal, `L L^* = p`.
pub fn cholesky_lower(p: &HpdMatrix) -> Result<ComplexMatrix> {
    cholesky_lower_of(p.matrix())
}

pub(crate) fn cholesky_lower_of(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = a.dim();
    let mut l = ComplexMatrix::zeros(d);
    for j in 0..d {
        let mut pivot = a[(j, j)].re;
        for k in 0..j {
            pivot -= l[(j, k)].norm_sqr();
        }
        if pivot <= 0.0 || !pivot.is_finite() {
            return Err(Error::NotPd);
        }
        let ljj = pivot.sqrt();
        l[(j, j)] = Complex64::new(ljj, 0.0);
        for i in (j + 1)..d {
            let mut z = a[(i, j)];
            for k in 0..j {
                z -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = z / ljj;
        }
    }
    Ok(l)
}

/// True iff the smallest eigenvalue of `h` exceeds `eps`.
pub fn is_hpd(h: &HermitianMatrix, eps: f64) -> bool {
    match eig_hermitian(h) {
        Ok(eig) => eig.eigenvalues[0] > eps,
        Err(_) => false,
    }
}

//! Self-contained dense complex linear algebra for the estimators:
//! Hermitian eigendecomposition, SVD, Moore-Penrose pseudoinverse, and
//! generalized eigenvalues of a Hankel matrix pencil.
//!
//! Everything operates on [`CMatrix`], a row-major dense complex matrix.
//! All routines are pure functions of their inputs and safe to call from
//! multiple threads.

mod eig;
mod schur;
mod svd;

pub use eig::eig_hermitian;
pub use svd::{pseudo_inverse, svd, Svd};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default relative tolerance below which singular values are treated as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    /// All-zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::ZERO; rows * cols],
        }
    }

    /// Identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::ONE;
        }
        m
    }

    /// Build from a row-major entry vector. Fails on a length mismatch.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} matrix needs {} entries, got {}",
                rows,
                cols,
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Build by evaluating `f` at every (row, col) position.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
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

    /// Row-major entry slice.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// Row `r` as a contiguous slice.
    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Column `c` copied into a vector.
    pub fn col(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    /// Matrix product `self * rhs`.
    pub fn matmul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == Complex64::ZERO {
                    continue;
                }
                let rhs_row = rhs.row(k);
                let out_row = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest deviation from Hermitian symmetry, `max |a_pq - conj(a_qp)|`.
    pub fn max_asymmetry(&self) -> f64 {
        assert!(self.is_square());
        let mut worst = 0.0f64;
        for p in 0..self.rows {
            for q in p..self.cols {
                let d = (self[(p, q)] - self[(q, p)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Error if any entry is NaN or infinite.
    pub fn ensure_finite(&self) -> Result<()> {
        if self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFiniteInput)
        }
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// `values` are real and sorted descending; the columns of `vectors` are the
/// matching unit-norm eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl EigenDecomposition {
    /// Reconstruction `V diag(values) V^H`.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.vectors.rows();
        let mut out = CMatrix::zeros(n, n);
        for (k, &lambda) in self.values.iter().enumerate() {
            for r in 0..n {
                let vr = self.vectors[(r, k)] * lambda;
                for c in 0..n {
                    let t = vr * self.vectors[(c, k)].conj();
                    out[(r, c)] += t;
                }
            }
        }
        out
    }
}

/// Generalized eigenvalues of a Hankel matrix pencil, restricted to the
/// numerically significant signal subspace.
#[derive(Debug, Clone)]
pub struct PencilEigenvalues {
    pub values: Vec<Complex64>,
}

/// Generalized eigenvalues of the pair `{h1, h2}` built from a common Hankel
/// matrix by dropping its last and first column respectively.
///
/// The pair is reduced to an ordinary eigenproblem: with the thin SVD
/// `h1 = U S V^H` truncated at `rank_tol` relative to the largest singular
/// value, the nonzero eigenvalues of `pinv(h1) * h2` equal those of the
/// small matrix `S^-1 U^H h2 V`.
pub fn pencil_generalized_eigs(
    h1: &CMatrix,
    h2: &CMatrix,
    rank_tol: f64,
) -> Result<PencilEigenvalues> {
    if h1.rows() != h2.rows() || h1.cols() != h2.cols() {
        return Err(Error::ShapeMismatch(format!(
            "pencil pair {}x{} vs {}x{}",
            h1.rows(),
            h1.cols(),
            h2.rows(),
            h2.cols()
        )));
    }
    if h1.rows() == 0 || h1.cols() == 0 {
        return Err(Error::DegeneratePencil("empty pencil matrix"));
    }
    h1.ensure_finite()?;
    h2.ensure_finite()?;

    let dec = svd(h1)?;
    let sigma_max = dec.sigma.first().copied().unwrap_or(0.0);
    if sigma_max <= f64::MIN_POSITIVE {
        return Err(Error::DegeneratePencil("first pencil matrix is zero"));
    }
    let rank = dec.sigma.iter().take_while(|&&s| s > rank_tol * sigma_max).count();
    if rank == 0 {
        return Err(Error::DegeneratePencil("no significant singular values"));
    }

    // W = S_r^-1 U_r^H h2 V_r, an rank x rank matrix sharing the nonzero
    // eigenvalues of pinv(h1) h2.
    let ur_h = CMatrix::from_fn(rank, h1.rows(), |r, c| dec.u[(c, r)].conj());
    let t = ur_h.matmul(h2);
    let vr = CMatrix::from_fn(h1.cols(), rank, |r, c| dec.v[(r, c)]);
    let mut w = t.matmul(&vr);
    for r in 0..rank {
        let inv = Complex64::new(1.0 / dec.sigma[r], 0.0);
        for c in 0..rank {
            w[(r, c)] *= inv;
        }
    }

    let values = schur::eig_complex(&w)?;
    Ok(PencilEigenvalues { values })
}

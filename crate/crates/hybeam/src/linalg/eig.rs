//! Cyclic Jacobi eigendecomposition for complex Hermitian matrices.

use num_complex::Complex64;

use super::{CMatrix, EigenDecomposition};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_STOP: f64 = 1e-14;

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// `a` must be square and Hermitian within `tol * ||a||_F`. Returns all
/// eigenvalues (descending) with orthonormal eigenvectors as the columns of
/// [`EigenDecomposition::vectors`].
pub fn eig_hermitian(a: &CMatrix, tol: f64) -> Result<EigenDecomposition> {
    assert!(a.is_square(), "eig_hermitian requires a square matrix");
    a.ensure_finite()?;
    let n = a.rows();
    let frob = a.frobenius_norm();

    let asymmetry = a.max_asymmetry();
    if asymmetry > tol * frob.max(f64::MIN_POSITIVE) {
        return Err(Error::NonHermitian {
            asymmetry,
            tol: tol * frob,
        });
    }

    // Work on the Hermitian part; exact for already-Hermitian input.
    let mut w = CMatrix::from_fn(n, n, |r, c| (a[(r, c)] + a[(c, r)].conj()) * 0.5);
    let mut v = CMatrix::identity(n);

    if n <= 1 {
        let values = (0..n).map(|i| w[(i, i)].re).collect();
        return Ok(EigenDecomposition { values, vectors: v });
    }

    let stop = OFF_DIAGONAL_STOP * frob;
    let skip = 1e-18 * frob;
    let mut converged = frob == 0.0;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&w) <= stop {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let g = w[(p, q)];
                let mag = g.norm();
                if mag <= skip {
                    continue;
                }
                rotate(&mut w, &mut v, p, q, g, mag);
            }
        }
    }
    if !converged && off_diagonal_norm(&w) > stop {
        return Err(Error::NoConvergence {
            routine: "jacobi eigendecomposition",
            sweeps: MAX_SWEEPS,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w[(j, j)].re.partial_cmp(&w[(i, i)].re).unwrap());
    let values = order.iter().map(|&i| w[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(EigenDecomposition { values, vectors })
}

fn off_diagonal_norm(w: &CMatrix) -> f64 {
    let n = w.rows();
    let mut sum = 0.0;
    for p in 0..n {
        for q in p + 1..n {
            sum += 2.0 * w[(p, q)].norm_sqr();
        }
    }
    sum.sqrt()
}

/// One Jacobi rotation zeroing the (p, q) entry of the Hermitian matrix `w`.
///
/// With g = w[p][q] = |g| e^{i phi}, the unitary
///   U = [[c, -s e^{i phi}], [s e^{-i phi}, c]]
/// applied as U^H W U annihilates the pivot when t = s/c is the small root
/// of t^2 - 2 tau t - 1 = 0, tau = (w_qq - w_pp) / (2 |g|).
fn rotate(w: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize, g: Complex64, mag: f64) {
    let n = w.rows();
    let phase = g / mag;
    let app = w[(p, p)].re;
    let aqq = w[(q, q)].re;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 {
        -1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let cs = Complex64::new(c, 0.0);
    let s_fwd = phase.conj() * s; // mixes column q into p
    let s_bwd = phase * s; // mixes column p into q

    // Column mix A <- A U on rows outside the pivot pair, mirrored onto the
    // corresponding rows to keep W Hermitian.
    for i in 0..n {
        if i == p || i == q {
            continue;
        }
        let aip = w[(i, p)];
        let aiq = w[(i, q)];
        w[(i, p)] = cs * aip + s_fwd * aiq;
        w[(i, q)] = cs * aiq - s_bwd * aip;
        w[(p, i)] = w[(i, p)].conj();
        w[(q, i)] = w[(i, q)].conj();
    }

    // Closed form for the 2x2 pivot block.
    let c2 = c * c;
    let s2 = s * s;
    let cross = 2.0 * c * s * mag;
    w[(p, p)] = Complex64::new(c2 * app + s2 * aqq + cross, 0.0);
    w[(q, q)] = Complex64::new(s2 * app + c2 * aqq - cross, 0.0);
    w[(p, q)] = Complex64::ZERO;
    w[(q, p)] = Complex64::ZERO;

    for i in 0..n {
        let vip = v[(i, p)];
        let viq = v[(i, q)];
        v[(i, p)] = cs * vip + s_fwd * viq;
        v[(i, q)] = cs * viq - s_bwd * vip;
    }
}

//! One-sided Jacobi singular value decomposition and the Moore-Penrose
//! pseudoinverse built on it.

use num_complex::Complex64;

use super::CMatrix;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// Thin SVD `a = U diag(sigma) V^H` with `k = min(rows, cols)` columns.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    /// Singular values, descending.
    pub sigma: Vec<f64>,
    pub v: CMatrix,
}

/// Thin SVD by one-sided Jacobi orthogonalization of the columns.
pub fn svd(a: &CMatrix) -> Result<Svd> {
    a.ensure_finite()?;
    if a.rows() >= a.cols() {
        svd_tall(a)
    } else {
        // A = (A^H)^H: decompose the transpose and swap the factors.
        let dec = svd_tall(&a.adjoint())?;
        Ok(Svd {
            u: dec.v,
            sigma: dec.sigma,
            v: dec.u,
        })
    }
}

fn svd_tall(a: &CMatrix) -> Result<Svd> {
    let m = a.rows();
    let n = a.cols();
    let mut b = a.clone();
    let mut v = CMatrix::identity(n);

    let mut converged = n <= 1;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        converged = true;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = Complex64::ZERO;
                for i in 0..m {
                    let bp = b[(i, p)];
                    let bq = b[(i, q)];
                    alpha += bp.norm_sqr();
                    beta += bq.norm_sqr();
                    gamma += bp.conj() * bq;
                }
                let mag = gamma.norm();
                if mag <= 1e-15 * (alpha * beta).sqrt() || mag == 0.0 {
                    continue;
                }
                converged = false;

                // Same 2x2 Hermitian rotation as the eigensolver, applied to
                // the Gram matrix [[alpha, gamma], [gamma*, beta]].
                let phase = gamma / mag;
                let tau = (beta - alpha) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    -1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let cs = Complex64::new(c, 0.0);
                let s_fwd = phase.conj() * s;
                let s_bwd = phase * s;

                for i in 0..m {
                    let bp = b[(i, p)];
                    let bq = b[(i, q)];
                    b[(i, p)] = cs * bp + s_fwd * bq;
                    b[(i, q)] = cs * bq - s_bwd * bp;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = cs * vp + s_fwd * vq;
                    v[(i, q)] = cs * vq - s_bwd * vp;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            routine: "one-sided jacobi svd",
            sweeps: MAX_SWEEPS,
        });
    }

    let mut norms: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| b[(i, j)].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());
    norms.sort_by(|x, y| y.partial_cmp(x).unwrap());

    let u = CMatrix::from_fn(m, n, |r, c| {
        let j = order[c];
        if norms[c] > 0.0 {
            b[(r, j)] / norms[c]
        } else {
            Complex64::ZERO
        }
    });
    let v_sorted = CMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(Svd {
        u,
        sigma: norms,
        v: v_sorted,
    })
}

/// Moore-Penrose pseudoinverse with singular values below
/// `rank_tol * sigma_max` treated as zero.
pub fn pseudo_inverse(a: &CMatrix, rank_tol: f64) -> Result<CMatrix> {
    let dec = svd(a)?;
    let sigma_max = dec.sigma.first().copied().unwrap_or(0.0);
    let mut out = CMatrix::zeros(a.cols(), a.rows());
    if sigma_max <= 0.0 {
        return Ok(out);
    }
    for (j, &s) in dec.sigma.iter().enumerate() {
        if s <= rank_tol * sigma_max {
            break;
        }
        let inv = 1.0 / s;
        for r in 0..a.cols() {
            let vj = dec.v[(r, j)] * inv;
            for c in 0..a.rows() {
                let t = vj * dec.u[(c, j)].conj();
                out[(r, c)] += t;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn svd_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for &(m, n) in &[(6usize, 4usize), (4, 6), (5, 5)] {
            let a = CMatrix::from_fn(m, n, |_, _| {
                Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            });
            let dec = svd(&a).unwrap();
            let k = m.min(n);
            let mut recon = CMatrix::zeros(m, n);
            for j in 0..k {
                for r in 0..m {
                    let t = dec.u[(r, j)] * dec.sigma[j];
                    for c in 0..n {
                        recon[(r, c)] += t * dec.v[(c, j)].conj();
                    }
                }
            }
            let mut err = 0.0f64;
            for r in 0..m {
                for c in 0..n {
                    err = err.max((recon[(r, c)] - a[(r, c)]).norm());
                }
            }
            assert!(err < 1e-12 * a.frobenius_norm().max(1.0), "{m}x{n}: {err:.3e}");
            for j in 1..k {
                assert!(dec.sigma[j - 1] >= dec.sigma[j]);
            }
        }
    }
}

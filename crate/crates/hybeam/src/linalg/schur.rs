//! Eigenvalues of small dense complex matrices via Hessenberg reduction and
//! shifted QR iteration. Used for the reduced pencil eigenproblem, where the
//! matrices are at most a few dozen entries per side.

use num_complex::Complex64;

use super::CMatrix;
use crate::error::{Error, Result};

/// Eigenvalues (unordered) of a general square complex matrix.
pub fn eig_complex(a: &CMatrix) -> Result<Vec<Complex64>> {
    assert!(a.is_square());
    let n = a.rows();
    match n {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![a[(0, 0)]]),
        2 => return Ok(eig_2x2(a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]).to_vec()),
        _ => {}
    }

    let mut h = hessenberg(a);
    let scale = h.frobenius_norm().max(f64::MIN_POSITIVE);
    let eps = 1e-15 * scale;
    let mut eigs = Vec::with_capacity(n);
    let mut hi = n - 1;
    let budget = 60 * n;

    let mut iters = 0;
    loop {
        // Deflate converged trailing entries.
        while hi > 0 && h[(hi, hi - 1)].norm() <= eps {
            eigs.push(h[(hi, hi)]);
            if hi == 1 {
                eigs.push(h[(0, 0)]);
                return Ok(eigs);
            }
            hi -= 1;
        }
        if hi == 0 {
            eigs.push(h[(0, 0)]);
            return Ok(eigs);
        }

        // Active unreduced block [lo..=hi].
        let mut lo = hi;
        while lo > 0 && h[(lo, lo - 1)].norm() > eps {
            lo -= 1;
        }

        if hi - lo == 1 {
            let [l1, l2] = eig_2x2(h[(lo, lo)], h[(lo, hi)], h[(hi, lo)], h[(hi, hi)]);
            eigs.push(l1);
            eigs.push(l2);
            if lo == 0 {
                return Ok(eigs);
            }
            hi = lo - 1;
            continue;
        }

        iters += 1;
        if iters > budget {
            return Err(Error::NoConvergence {
                routine: "complex qr eigenvalues",
                sweeps: budget,
            });
        }

        // Wilkinson shift: eigenvalue of the trailing 2x2 closest to the
        // bottom corner. Occasional exceptional shift breaks rare cycles.
        let shift = if iters % 17 == 0 {
            h[(hi, hi)] + h[(hi, hi - 1)] * 0.5
        } else {
            let [l1, l2] = eig_2x2(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            );
            let corner = h[(hi, hi)];
            if (l1 - corner).norm() <= (l2 - corner).norm() {
                l1
            } else {
                l2
            }
        };

        qr_step(&mut h, lo, hi, shift);
    }
}

/// Closed-form eigenvalues of [[a, b], [c, d]].
fn eig_2x2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> [Complex64; 2] {
    let half_tr = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (half_tr * half_tr - det).sqrt();
    [half_tr + disc, half_tr - disc]
}

/// Householder reduction to upper Hessenberg form.
fn hessenberg(a: &CMatrix) -> CMatrix {
    let n = a.rows();
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        let mut norm2 = 0.0;
        for i in k + 1..n {
            norm2 += h[(i, k)].norm_sqr();
        }
        if norm2 <= f64::MIN_POSITIVE {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let alpha = if x0 == Complex64::ZERO {
            Complex64::new(-norm2.sqrt(), 0.0)
        } else {
            -(x0 / x0.norm()) * norm2.sqrt()
        };
        // v = x - alpha e1, normalized.
        let mut v = vec![Complex64::ZERO; n - k - 1];
        v[0] = x0 - alpha;
        for i in k + 2..n {
            v[i - k - 1] = h[(i, k)];
        }
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 <= f64::MIN_POSITIVE {
            continue;
        }
        let inv = 2.0 / vnorm2;

        // H <- (I - inv v v^H) H
        for col in k..n {
            let mut dot = Complex64::ZERO;
            for i in 0..v.len() {
                dot += v[i].conj() * h[(k + 1 + i, col)];
            }
            dot *= inv;
            for i in 0..v.len() {
                let t = v[i] * dot;
                h[(k + 1 + i, col)] -= t;
            }
        }
        // H <- H (I - inv v v^H)
        for row in 0..n {
            let mut dot = Complex64::ZERO;
            for i in 0..v.len() {
                dot += h[(row, k + 1 + i)] * v[i];
            }
            dot *= inv;
            for i in 0..v.len() {
                let t = dot * v[i].conj();
                h[(row, k + 1 + i)] -= t;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = Complex64::ZERO;
        }
        h[(k + 1, k)] = alpha;
    }
    h
}

/// One explicit shifted QR step on the Hessenberg block [lo..=hi] using
/// Givens rotations. Only the block matters for eigenvalue extraction.
fn qr_step(h: &mut CMatrix, lo: usize, hi: usize, shift: Complex64) {
    let k = hi - lo + 1;
    for i in lo..=hi {
        h[(i, i)] -= shift;
    }

    // QR by Givens: eliminate the subdiagonal.
    let mut rots = Vec::with_capacity(k - 1);
    for i in lo..hi {
        let f = h[(i, i)];
        let g = h[(i + 1, i)];
        let (c, s) = givens(f, g);
        rots.push((c, s));
        for col in i..=hi {
            let a = h[(i, col)];
            let b = h[(i + 1, col)];
            h[(i, col)] = c * a + s * b;
            h[(i + 1, col)] = -s.conj() * a + c * b;
        }
    }
    // RQ: apply the same rotations on the right.
    for (idx, &(c, s)) in rots.iter().enumerate() {
        let i = lo + idx;
        for row in lo..=(i + 1).min(hi) {
            let a = h[(row, i)];
            let b = h[(row, i + 1)];
            h[(row, i)] = a * c + b * s.conj();
            h[(row, i + 1)] = b * c - a * s;
        }
    }
    for i in lo..=hi {
        h[(i, i)] += shift;
    }
}

/// Givens pair (c real as complex, s) with G^H [f; g] = [r; 0].
fn givens(f: Complex64, g: Complex64) -> (Complex64, Complex64) {
    let fn2 = f.norm_sqr();
    let gn2 = g.norm_sqr();
    if gn2 == 0.0 {
        return (Complex64::ONE, Complex64::ZERO);
    }
    if fn2 == 0.0 {
        // Swap rows with a phase so the result lands on the diagonal.
        return (Complex64::ZERO, (g / g.norm()).conj());
    }
    let r = (fn2 + gn2).sqrt();
    let c = Complex64::new((fn2).sqrt() / r, 0.0);
    let s = (f / fn2.sqrt()) * g.conj() / r;
    (c, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn sort_by_re(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        v
    }

    #[test]
    fn diagonal_matrix_eigs() {
        let mut a = CMatrix::zeros(4, 4);
        for (i, val) in [3.0, -1.0, 2.5, 0.5].iter().enumerate() {
            a[(i, i)] = Complex64::new(*val, 0.0);
        }
        let eigs = sort_by_re(eig_complex(&a).unwrap());
        let expect = [-1.0, 0.5, 2.5, 3.0];
        for (e, x) in eigs.iter().zip(expect) {
            assert!((e.re - x).abs() < 1e-12 && e.im.abs() < 1e-12);
        }
    }

    #[test]
    fn unitary_diagonal_similarity() {
        // Matrix with known complex eigenvalues: companion-free check via
        // D + rank perturbation ruled out; instead use T upper triangular.
        let mut t = CMatrix::zeros(5, 5);
        let diag = [
            Complex64::new(1.0, 2.0),
            Complex64::new(-0.5, 0.3),
            Complex64::new(0.0, -1.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(0.7, 0.7),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for i in 0..5 {
            t[(i, i)] = diag[i];
            for j in i + 1..5 {
                t[(i, j)] = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            }
        }
        let eigs = sort_by_re(eig_complex(&t).unwrap());
        let expect = sort_by_re(diag.to_vec());
        for (e, x) in eigs.iter().zip(&expect) {
            assert!((e - x).norm() < 1e-9, "{e} vs {x}");
        }
    }

    #[test]
    fn random_matrix_satisfies_characteristic_identities() {
        // Eigenvalue sum = trace, product = det (checked for small sizes).
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in 2..=8usize {
            let a = CMatrix::from_fn(n, n, |_, _| {
                Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            });
            let eigs = eig_complex(&a).unwrap();
            assert_eq!(eigs.len(), n);
            let sum: Complex64 = eigs.iter().sum();
            let trace: Complex64 = (0..n).map(|i| a[(i, i)]).sum();
            assert!(
                (sum - trace).norm() < 1e-9 * a.frobenius_norm().max(1.0),
                "n={n}: trace mismatch {} vs {}",
                sum,
                trace
            );
        }
    }
}

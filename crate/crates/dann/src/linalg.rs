//! Small dense symmetric solvers: cyclic Jacobi eigen-decomposition and a
//! Cholesky factorization. The dimensions handled here (covariances up to a
//! few hundred, autoencoder systems up to a few thousand) do not justify an
//! external backend.

use crate::error::{Error, Result};
use crate::tensor::DenseMat;

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues in descending order with matching eigenvector
/// columns. Sweeps stop once every off-diagonal entry is below `tol`
/// relative to the largest diagonal magnitude.
pub fn jacobi_eigen_sym(a: &DenseMat, tol: f64, max_sweeps: usize) -> Result<(Vec<f64>, DenseMat)> {
    let (n, m) = a.shape();
    if n != m {
        return Err(Error::DimMismatch {
            op: "jacobi_eigen_sym",
            expected: "square matrix".into(),
            found: format!("{n}x{m}"),
        });
    }
    let mut a = a.clone();
    let mut v = DenseMat::identity(n);
    if n <= 1 {
        let vals = (0..n).map(|i| a.get(i, i)).collect();
        return Ok((vals, v));
    }

    let scale = (0..n)
        .map(|i| a.get(i, i).abs())
        .fold(0.0f64, f64::max)
        .max(1.0);
    let threshold = tol * scale;

    for _ in 0..max_sweeps {
        let mut off_max = 0.0f64;
        for p in 0..n - 1 {
            for q in p + 1..n {
                off_max = off_max.max(a.get(p, q).abs());
            }
        }
        if off_max <= threshold {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq.abs() <= threshold * 1e-3 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                // Rotation angle that annihilates a[p][q].
                let theta = 0.5 * (aqq - app) / apq;
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(j, j).total_cmp(&a.get(i, i)));
    let values: Vec<f64> = order.iter().map(|&i| a.get(i, i)).collect();
    let mut vectors = DenseMat::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            vectors.set(r, new_col, v.get(r, old_col));
        }
    }
    Ok((values, vectors))
}

/// In-place Cholesky factorization `A = L L^T` of a symmetric positive
/// definite matrix; the lower triangle of `a` is replaced by `L`. Fails on a
/// non-positive pivot.
pub fn cholesky_factor(a: &mut DenseMat) -> Result<()> {
    let (n, m) = a.shape();
    if n != m {
        return Err(Error::DimMismatch {
            op: "cholesky_factor",
            expected: "square matrix".into(),
            found: format!("{n}x{m}"),
        });
    }
    for j in 0..n {
        let mut diag = a.get(j, j);
        for k in 0..j {
            let l = a.get(j, k);
            diag -= l * l;
        }
        if diag <= 0.0 || !diag.is_finite() {
            return Err(Error::Singular(format!(
                "non-positive pivot {diag} at column {j}; increase the ridge term"
            )));
        }
        let ljj = diag.sqrt();
        a.set(j, j, ljj);
        for i in j + 1..n {
            let mut s = a.get(i, j);
            // Row-major dot over the already-computed columns.
            for k in 0..j {
                s -= a.get(i, k) * a.get(j, k);
            }
            a.set(i, j, s / ljj);
        }
    }
    Ok(())
}

/// Solves `A x = b` in place given the Cholesky factor from
/// [`cholesky_factor`].
pub fn cholesky_solve(l: &DenseMat, b: &mut [f64]) -> Result<()> {
    let n = l.rows();
    if b.len() != n {
        return Err(Error::DimMismatch {
            op: "cholesky_solve",
            expected: format!("len {n}"),
            found: format!("len {}", b.len()),
        });
    }
    // Forward substitution L y = b.
    for i in 0..n {
        let mut s = b[i];
        let row = l.row(i);
        for (k, bk) in b[..i].iter().enumerate() {
            s -= row[k] * bk;
        }
        b[i] = s / row[i];
    }
    // Back substitution L^T x = y.
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= l.get(k, i) * b[k];
        }
        b[i] = s / l.get(i, i);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn random_spd(n: usize, rng: &mut Rng) -> DenseMat {
        // B^T B + n * I is comfortably positive definite.
        let mut b = DenseMat::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                b.set(r, c, rng.uniform(-1.0, 1.0));
            }
        }
        let mut a = DenseMat::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += b.get(k, r) * b.get(k, c);
                }
                a.set(r, c, s + if r == c { n as f64 } else { 0.0 });
            }
        }
        a
    }

    #[test]
    fn jacobi_recovers_diagonal() {
        let mut a = DenseMat::zeros(3, 3);
        a.set(0, 0, 3.0);
        a.set(1, 1, -1.0);
        a.set(2, 2, 2.0);
        let (vals, vecs) = jacobi_eigen_sym(&a, 1e-12, 100).unwrap();
        assert_eq!(vals, vec![3.0, 2.0, -1.0]);
        // Eigenvectors are signed unit basis vectors.
        for c in 0..3 {
            let col: Vec<f64> = (0..3).map(|r| vecs.get(r, c)).collect();
            let nrm: f64 = col.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((nrm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn jacobi_reconstructs_random_symmetric() {
        let mut rng = Rng::new(8);
        for n in [2usize, 3, 5, 8] {
            let mut a = DenseMat::zeros(n, n);
            for r in 0..n {
                for c in r..n {
                    let v = rng.uniform(-2.0, 2.0);
                    a.set(r, c, v);
                    a.set(c, r, v);
                }
            }
            let (vals, vecs) = jacobi_eigen_sym(&a, 1e-14, 100).unwrap();
            // A v_i = lambda_i v_i.
            for i in 0..n {
                for r in 0..n {
                    let mut av = 0.0;
                    for k in 0..n {
                        av += a.get(r, k) * vecs.get(k, i);
                    }
                    assert!(
                        (av - vals[i] * vecs.get(r, i)).abs() < 1e-9,
                        "n={n} eig {i} row {r}"
                    );
                }
            }
            // Orthonormality.
            for i in 0..n {
                for j in 0..n {
                    let mut dot = 0.0;
                    for k in 0..n {
                        dot += vecs.get(k, i) * vecs.get(k, j);
                    }
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - expect).abs() < 1e-9);
                }
            }
            // Descending order.
            for i in 1..n {
                assert!(vals[i - 1] >= vals[i]);
            }
        }
    }

    #[test]
    fn cholesky_solves_random_systems() {
        let mut rng = Rng::new(15);
        for n in [1usize, 2, 4, 7, 12] {
            let a = random_spd(n, &mut rng);
            let x_true: Vec<f64> = (0..n).map(|_| rng.uniform(-3.0, 3.0)).collect();
            let mut b = vec![0.0; n];
            for r in 0..n {
                for c in 0..n {
                    b[r] += a.get(r, c) * x_true[c];
                }
            }
            let mut l = a.clone();
            cholesky_factor(&mut l).unwrap();
            cholesky_solve(&l, &mut b).unwrap();
            for i in 0..n {
                assert!((b[i] - x_true[i]).abs() < 1e-8, "n={n} i={i}");
            }
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut a = DenseMat::zeros(2, 2);
        a.set(0, 0, 1.0);
        a.set(0, 1, 2.0);
        a.set(1, 0, 2.0);
        a.set(1, 1, 1.0);
        let err = cholesky_factor(&mut a).unwrap_err().to_string();
        assert!(err.contains("ridge"), "{err}");
    }
}

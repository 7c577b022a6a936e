//! Cyclic Jacobi eigensolver for dense complex Hermitian matrices.
//!
//! Row/column pairs are swept in fixed cyclic order and each pair is
//! annihilated by a complex plane rotation. Convergence is quadratic once the
//! off-diagonal mass is small; the sweep cap exists only as a safety net.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol;

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues are real and sorted ascending; `vectors` holds the matching
/// orthonormal eigenvectors as columns, so `A = V diag(values) V^H`.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: Array2<Complex64>,
}

impl Eigh {
    /// Column `i` as an owned vector.
    pub fn vector(&self, i: usize) -> Array1<Complex64> {
        self.vectors.column(i).to_owned()
    }
}

/// Diagonalize with the default sweep cap and stopping threshold.
pub fn eigh(matrix: &Array2<Complex64>) -> Result<Eigh> {
    eigh_with(matrix, tol::JACOBI_MAX_SWEEPS, tol::JACOBI_OFF_FACTOR)
}

/// Diagonalize, stopping once the off-diagonal Frobenius norm drops below
/// `off_factor * ||A||_F` or erroring after `max_sweeps` sweeps.
pub fn eigh_with(matrix: &Array2<Complex64>, max_sweeps: usize, off_factor: f64) -> Result<Eigh> {
    let (rows, cols) = matrix.dim();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    let n = rows;
    if n == 0 {
        return Ok(Eigh {
            values: Vec::new(),
            vectors: Array2::zeros((0, 0)),
        });
    }

    let mut a = matrix.clone();
    let mut v = Array2::<Complex64>::eye(n);

    let norm_f = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let threshold = off_factor * norm_f;
    // Rotations on entries this small cannot move the off-diagonal norm past
    // the threshold, so they are skipped.
    let skip = threshold / ((n * n) as f64).max(1.0);

    let mut converged = norm_f == 0.0 || n == 1;
    let mut residual = off_norm(&a);
    let mut sweeps_used = 0;

    while !converged && sweeps_used < max_sweeps {
        if residual <= threshold {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q, skip);
            }
        }
        sweeps_used += 1;
        residual = off_norm(&a);
    }
    if !converged && residual > threshold {
        return Err(Error::NoConvergence {
            sweeps: sweeps_used,
            residual,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[[i, i]].re.total_cmp(&a[[j, j]].re));

    let values: Vec<f64> = order.iter().map(|&i| a[[i, i]].re).collect();
    let mut vectors = Array2::<Complex64>::zeros((n, n));
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            vectors[[r, new_col]] = v[[r, old_col]];
        }
    }
    Ok(Eigh { values, vectors })
}

fn off_norm(a: &Array2<Complex64>) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            sum += 2.0 * a[[i, j]].norm_sqr();
        }
    }
    sum.sqrt()
}

/// Annihilate entry (p, q) with the unitary that diagonalizes the 2x2 block
/// [[a_pp, z], [conj(z), a_qq]]; both the iterate and the accumulated
/// eigenvector matrix are updated in place.
fn rotate(a: &mut Array2<Complex64>, v: &mut Array2<Complex64>, p: usize, q: usize, skip: f64) {
    let z = a[[p, q]];
    let r = z.norm();
    if r <= skip {
        return;
    }
    let phase = z / r;

    let app = a[[p, p]].re;
    let aqq = a[[q, q]].re;
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // Column update A <- A V with V = [[c, s*phase], [-s*conj(phase), c]]
    // acting on columns (p, q); then the mirrored row update gives V^H A V.
    let n = a.nrows();
    let sp = Complex64::new(s, 0.0) * phase;
    for k in 0..n {
        let akp = a[[k, p]];
        let akq = a[[k, q]];
        a[[k, p]] = akp * c - akq * sp.conj();
        a[[k, q]] = akp * sp + akq * c;
    }
    for k in 0..n {
        let apk = a[[p, k]];
        let aqk = a[[q, k]];
        a[[p, k]] = apk * c - aqk * sp;
        a[[q, k]] = apk * sp.conj() + aqk * c;
    }
    a[[p, q]] = Complex64::new(0.0, 0.0);
    a[[q, p]] = Complex64::new(0.0, 0.0);
    a[[p, p]] = Complex64::new(a[[p, p]].re, 0.0);
    a[[q, q]] = Complex64::new(a[[q, q]].re, 0.0);

    for k in 0..n {
        let vkp = v[[k, p]];
        let vkq = v[[k, q]];
        v[[k, p]] = vkp * c - vkq * sp.conj();
        v[[k, q]] = vkp * sp + vkq * c;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const TOL: f64 = 1e-10;

    #[test]
    fn real_symmetric_2x2_closed_form() {
        // Closed form for [[1, 1], [1, 0]]: (1 +- sqrt(5)) / 2.
        let m = array![[c(1.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]];
        let e = eigh(&m).unwrap();
        let golden_low = (1.0 - 5.0_f64.sqrt()) / 2.0;
        let golden_high = (1.0 + 5.0_f64.sqrt()) / 2.0;
        assert!((e.values[0] - golden_low).abs() < TOL);
        assert!((e.values[1] - golden_high).abs() < TOL);
    }

    #[test]
    fn complex_2x2_closed_form() {
        // [[2, i], [-i, 2]] has eigenvalues 2 -+ 1 = 1, 3.
        let m = array![[c(2.0, 0.0), c(0.0, 1.0)], [c(0.0, -1.0), c(2.0, 0.0)]];
        let e = eigh(&m).unwrap();
        assert!((e.values[0] - 1.0).abs() < TOL);
        assert!((e.values[1] - 3.0).abs() < TOL);
    }

    #[test]
    fn diagonal_matrix_is_returned_sorted() {
        let m = array![
            [c(3.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        ];
        let e = eigh(&m).unwrap();
        assert_eq!(e.values.len(), 3);
        assert!((e.values[0] + 1.0).abs() < TOL);
        assert!((e.values[1] - 1.0).abs() < TOL);
        assert!((e.values[2] - 3.0).abs() < TOL);
    }

    #[test]
    fn zero_matrix() {
        let m = Array2::<Complex64>::zeros((4, 4));
        let e = eigh(&m).unwrap();
        assert!(e.values.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn rejects_non_square() {
        let m = Array2::<Complex64>::zeros((2, 3));
        assert!(matches!(eigh(&m), Err(Error::NotSquare { .. })));
    }

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> Array2<Complex64> {
        let mut m = Array2::<Complex64>::zeros((n, n));
        for i in 0..n {
            m[[i, i]] = c(rng.random::<f64>() * 2.0 - 1.0, 0.0);
            for j in i + 1..n {
                let z = c(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0);
                m[[i, j]] = z;
                m[[j, i]] = z.conj();
            }
        }
        m
    }

    #[test]
    fn reconstructs_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &n in &[1usize, 2, 3, 5, 8, 16, 31] {
            let m = random_hermitian(n, &mut rng);
            let e = eigh(&m).unwrap();

            // A V = V diag(values), column by column.
            for col in 0..n {
                let vcol = e.vector(col);
                let av = m.dot(&vcol);
                for row in 0..n {
                    let want = vcol[row] * e.values[col];
                    assert!(
                        (av[row] - want).norm() < 1e-8,
                        "n={n} col={col} row={row}"
                    );
                }
            }
            // Columns are orthonormal.
            for i in 0..n {
                for j in 0..n {
                    let dot: Complex64 = (0..n)
                        .map(|k| e.vectors[[k, i]].conj() * e.vectors[[k, j]])
                        .sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - want).norm() < 1e-9, "n={n} i={i} j={j}");
                }
            }
            // Ascending order.
            for w in e.values.windows(2) {
                assert!(w[0] <= w[1]);
            }
        }
    }

    #[test]
    fn trace_is_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = random_hermitian(12, &mut rng);
        let trace: f64 = (0..12).map(|i| m[[i, i]].re).sum();
        let e = eigh(&m).unwrap();
        let sum: f64 = e.values.iter().sum();
        assert!((trace - sum).abs() < 1e-9);
    }
}

//! Dense symmetric matrices and a cyclic Jacobi eigensolver.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Row-major square matrix, symmetric by construction in this crate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> SymMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    /// Builds from a function of `(i, j)` evaluated for `i <= j` and mirrored.
    pub fn from_upper<F: FnMut(usize, usize) -> T>(n: usize, mut f: F) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m.data[i * n + j] = v;
                m.data[j * n + i] = v;
            }
        }
        m
    }

    /// Builds from full rows; fails if the rows are ragged or asymmetric.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("matrix is not square".into()));
        }
        let data: Vec<T> = rows.into_iter().flatten().collect();
        for i in 0..n {
            for j in 0..i {
                if data[i * n + j] != data[j * n + i] {
                    return Err(Error::InvalidArgument("matrix is not symmetric".into()));
                }
            }
        }
        Ok(Self { n, data })
    }

    /// Wraps row-major data already known to be square and symmetric.
    pub(crate) fn from_parts(n: usize, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), n * n);
        Self { n, data }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set_sym(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.data
            .chunks(self.n.max(1))
            .map(|r| r.to_vec())
            .take(self.n)
            .collect()
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|&x| x * x).sum::<T>().sqrt()
    }

    /// `vᵀ M v`.
    pub fn quadratic_form(&self, v: &[T]) -> T {
        assert_eq!(v.len(), self.n);
        let mut acc = crate::summation::CompensatedSum::new();
        for i in 0..self.n {
            let row = &self.data[i * self.n..(i + 1) * self.n];
            let mut s = crate::summation::CompensatedSum::new();
            for (a, &b) in row.iter().zip(v) {
                s.add(*a * b);
            }
            acc.add(v[i] * s.value());
        }
        acc.value()
    }

    /// `P M P` with `P = I − (1/n)·11ᵀ`, the compression onto zero-sum vectors.
    pub fn project_zero_sum(&self) -> Self {
        let n = self.n;
        if n == 0 {
            return self.clone();
        }
        let nf = T::from_usize_exact(n);
        let row_mean: Vec<T> = (0..n)
            .map(|i| self.data[i * n..(i + 1) * n].iter().copied().sum::<T>() / nf)
            .collect();
        let total_mean = row_mean.iter().copied().sum::<T>() / nf;
        Self::from_upper(n, |i, j| {
            self.get(i, j) - row_mean[i] - row_mean[j] + total_mean
        })
    }

    /// Row-major CSV rendering of the full matrix.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for r in self.rows() {
            let line: Vec<String> = r.iter().map(|x| format!("{}", x)).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// Stopping rules for [`jacobi_eigen`].
#[derive(Debug, Clone, Copy)]
pub struct JacobiOptions {
    pub max_sweeps: usize,
    /// Converged when the off-diagonal Frobenius norm is below `rel_tol·‖M‖_F`.
    pub rel_tol: f64,
}

impl Default for JacobiOptions {
    fn default() -> Self {
        Self {
            max_sweeps: 64,
            rel_tol: 1e-14,
        }
    }
}

/// Eigenvalues (ascending) with matching unit eigenvectors.
#[derive(Debug, Clone)]
pub struct Eigen<T> {
    pub values: Vec<T>,
    /// `vectors[k]` is the eigenvector of `values[k]`.
    pub vectors: Vec<Vec<T>>,
    pub sweeps: usize,
}

impl<T: Scalar> Eigen<T> {
    pub fn max(&self) -> Option<(T, &[T])> {
        self.values
            .last()
            .map(|&v| (v, self.vectors.last().unwrap().as_slice()))
    }

    pub fn min(&self) -> Option<(T, &[T])> {
        self.values
            .first()
            .map(|&v| (v, self.vectors[0].as_slice()))
    }
}

/// Cyclic Jacobi diagonalisation of a symmetric matrix.
///
/// Rotations sweep the strict upper triangle in row order, which makes the
/// result deterministic. The convergence threshold is floored at a few
/// machine epsilons so that `f32` matrices can converge.
pub fn jacobi_eigen<T: Scalar>(m: &SymMatrix<T>, opts: JacobiOptions) -> Result<Eigen<T>> {
    let n = m.dim();
    let mut a = m.data.clone();
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    let norm = m.frobenius_norm();
    let floor = T::epsilon() * T::lit(64.0);
    let tol = T::lit(opts.rel_tol).max(floor) * norm;
    let off = |a: &[T]| -> T {
        let mut s = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                s += a[i * n + j] * a[i * n + j];
            }
        }
        (s + s).sqrt()
    };

    let mut sweeps = 0;
    while off(&a) > tol {
        if sweeps >= opts.max_sweeps {
            return Err(Error::NumericalFailure(format!(
                "Jacobi did not converge after {} sweeps",
                opts.max_sweeps
            )));
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (apq + apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let t = if theta == T::zero() { T::one() } else { t };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = T::zero();
                a[q * n + p] = T::zero();
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[i * n + i]
            .partial_cmp(&a[j * n + j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = order
        .iter()
        .map(|&k| (0..n).map(|i| v[i * n + k]).collect())
        .collect();
    Ok(Eigen {
        values,
        vectors,
        sweeps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let m = SymMatrix::<f64>::from_rows(vec![vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let e = jacobi_eigen(&m, JacobiOptions::default()).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 3.0).abs() < 1e-14);
        let v = &e.vectors[1];
        assert!((v[0].abs() - v[1].abs()).abs() < 1e-14);
    }

    #[test]
    fn reconstructs_random_symmetric() {
        let n = 9;
        let m = SymMatrix::from_upper(n, |i, j| {
            ((i * 7 + j * 3) as f64).sin() + if i == j { 1.0 } else { 0.0 }
        });
        let e = jacobi_eigen(&m, JacobiOptions::default()).unwrap();
        for i in 0..n {
            for j in 0..n {
                let r: f64 = (0..n)
                    .map(|k| e.values[k] * e.vectors[k][i] * e.vectors[k][j])
                    .sum();
                assert!((r - m.get(i, j)).abs() < 1e-12);
            }
        }
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn sweep_cap_reports_failure() {
        let m = SymMatrix::from_upper(6, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
        let err = jacobi_eigen(
            &m,
            JacobiOptions {
                max_sweeps: 0,
                rel_tol: 1e-14,
            },
        )
        .unwrap_err();
        assert_eq!(err.kind(), "numerical-failure");
    }

    #[test]
    fn projection_kills_constants() {
        let m = SymMatrix::from_upper(5, |i, j| (i + j) as f64);
        let p = m.project_zero_sum();
        let ones = vec![1.0; 5];
        assert!(p.quadratic_form(&ones).abs() < 1e-12);
    }

    #[test]
    fn rejects_asymmetric() {
        assert!(SymMatrix::from_rows(vec![vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
    }
}

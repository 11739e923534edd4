//! Dense row-major matrices and LU factorization with partial pivoting.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn from_rows(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n);
        DenseMatrix { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|v| libm::fabs(*v)).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LinalgError {
    /// Pivot at `column` vanished relative to the matrix scale.
    Singular { column: usize },
    DimensionMismatch { expected: usize, got: usize },
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::Singular { column } => write!(f, "matrix is singular (column {column})"),
            LinalgError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
        }
    }
}

impl core::error::Error for LinalgError {}

/// `PA = LU`, unit lower `L` stored below the diagonal.
#[derive(Clone, Debug)]
pub struct LuFactors {
    lu: DenseMatrix,
    perm: Vec<usize>,
}

/// Relative pivot threshold below which the matrix is declared singular.
const PIVOT_TOL: f64 = 1e-14;

impl LuFactors {
    pub fn new(mut a: DenseMatrix) -> Result<Self, LinalgError> {
        let n = a.n;
        let scale = a.data.iter().fold(0.0f64, |m, v| m.max(libm::fabs(*v)));
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (piv, pmax) = (k..n)
                .map(|i| (i, libm::fabs(a.get(i, k))))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pmax > PIVOT_TOL * scale) {
                return Err(LinalgError::Singular { column: k });
            }
            if piv != k {
                for j in 0..n {
                    a.data.swap(k * n + j, piv * n + j);
                }
                perm.swap(k, piv);
            }
            let d = a.get(k, k);
            for i in k + 1..n {
                let m = a.get(i, k) / d;
                if m == 0.0 {
                    continue;
                }
                a.set(i, k, m);
                for j in k + 1..n {
                    let v = a.get(k, j);
                    a.add(i, j, -m * v);
                }
            }
        }
        Ok(LuFactors { lu: a, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let n = self.lu.n;
        if b.len() != n {
            return Err(LinalgError::DimensionMismatch { expected: n, got: b.len() });
        }
        let mut x: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu.get(i, j) * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.lu.get(i, j) * x[j]).sum();
            x[i] = (x[i] - s) / self.lu.get(i, i);
        }
        Ok(x)
    }
}

/// Normwise backward error `‖Ax - b‖∞ / (‖A‖∞‖x‖∞ + ‖b‖∞)`.
pub fn backward_error(a: &DenseMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.matvec(x);
    let res = ax.iter().zip(b).fold(0.0f64, |m, (p, q)| m.max(libm::fabs(p - q)));
    let xn = x.iter().fold(0.0f64, |m, v| m.max(libm::fabs(*v)));
    let bn = b.iter().fold(0.0f64, |m, v| m.max(libm::fabs(*v)));
    let denom = a.norm_inf() * xn + bn;
    if denom == 0.0 {
        0.0
    } else {
        res / denom
    }
}

/// Solves `Ax = b` with one step of iterative refinement.
pub fn solve_dense(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let lu = LuFactors::new(a.clone())?;
    let mut x = lu.solve(b)?;
    let ax = a.matvec(&x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
    let dx = lu.solve(&r)?;
    x.iter_mut().zip(&dx).for_each(|(xi, d)| *xi += d);
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let a = DenseMatrix::from_rows(3, vec![0.0, 2.0, 1.0, 1.0, 1.0, 1.0, 4.0, -1.0, 3.0]);
        let x_true = [1.0, -2.0, 0.5];
        let b = a.matvec(&x_true);
        let x = solve_dense(&a, &b).unwrap();
        for (p, q) in x.iter().zip(x_true) {
            assert!((p - q).abs() < 1e-14);
        }
        assert!(backward_error(&a, &x, &b) < 1e-16);
    }

    #[test]
    fn detects_singularity() {
        let a = DenseMatrix::from_rows(2, vec![1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(LuFactors::new(a), Err(LinalgError::Singular { column: 1 })));
    }

    #[test]
    fn rhs_length_checked() {
        let lu = LuFactors::new(DenseMatrix::from_rows(1, vec![2.0])).unwrap();
        assert!(lu.solve(&[1.0, 2.0]).is_err());
    }
}

//! Banded LU without pivoting, for M-matrix systems such as `I − P`
//! restricted to the transient states of a killed walk.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// `n × n` band matrix with `lower` sub-diagonals and `upper`
/// super-diagonals. Row `i` stores columns `i - lower ..= i + upper`.
#[derive(Debug, Clone)]
pub(crate) struct BandMatrix {
    n: usize,
    lower: usize,
    upper: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub(crate) fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        Self {
            n,
            lower,
            upper,
            data: vec![0.0; n * (lower + upper + 1)],
        }
    }

    fn width(&self) -> usize {
        self.lower + self.upper + 1
    }

    fn slot(&self, row: usize, col: usize) -> Option<usize> {
        if col + self.lower < row || col > row + self.upper || col >= self.n {
            return None;
        }
        Some(row * self.width() + (col + self.lower - row))
    }

    pub(crate) fn add(&mut self, row: usize, col: usize, value: f64) {
        let idx = self.slot(row, col).expect("entry outside band");
        self.data[idx] += value;
    }

    pub(crate) fn get(&self, row: usize, col: usize) -> f64 {
        self.slot(row, col).map_or(0.0, |i| self.data[i])
    }

    pub(crate) fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.lower);
                let hi = (i + self.upper).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// Solves `A x = rhs`, with one step of iterative refinement.
    pub(crate) fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let lu = self.factor()?;
        let mut x = lu.substitute(rhs);
        let ax = self.mul_vec(&x);
        let residual: Vec<f64> = rhs.iter().zip(&ax).map(|(b, v)| b - v).collect();
        let correction = lu.substitute(&residual);
        for (xi, ci) in x.iter_mut().zip(correction) {
            *xi += ci;
        }
        Ok(x)
    }

    fn factor(&self) -> Result<BandMatrix> {
        let mut lu = self.clone();
        let n = self.n;
        for k in 0..n {
            let pivot = lu.get(k, k);
            if pivot.abs() < 1e-300 {
                return Err(Error::SingularSystem { row: k });
            }
            let row_end = (k + self.lower).min(n - 1);
            let col_end = (k + self.upper).min(n - 1);
            for i in k + 1..=row_end {
                let idx = lu.slot(i, k).unwrap();
                let factor = lu.data[idx] / pivot;
                lu.data[idx] = factor;
                if factor == 0.0 {
                    continue;
                }
                for j in k + 1..=col_end {
                    let kj = lu.get(k, j);
                    if let Some(ij) = lu.slot(i, j) {
                        lu.data[ij] -= factor * kj;
                    }
                }
            }
        }
        Ok(lu)
    }

    fn substitute(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = rhs.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(self.lower);
            let mut acc = y[i];
            for j in lo..i {
                acc -= self.get(i, j) * y[j];
            }
            y[i] = acc;
        }
        for i in (0..n).rev() {
            let hi = (i + self.upper).min(n - 1);
            let mut acc = y[i];
            for j in i + 1..=hi {
                acc -= self.get(i, j) * y[j];
            }
            y[i] = acc / self.get(i, i);
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_laplacian() {
        // -u'' = 0 with u(0) = 0, u(n+1) = n+1 has solution u(i) = i.
        let n = 50;
        let mut a = BandMatrix::zeros(n, 1, 1);
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            a.add(i, i, 2.0);
            if i > 0 {
                a.add(i, i - 1, -1.0);
            }
            if i + 1 < n {
                a.add(i, i + 1, -1.0);
            }
        }
        rhs[n - 1] = (n + 1) as f64;
        let x = a.solve(&rhs).unwrap();
        for (i, xi) in x.iter().enumerate() {
            assert!((xi - (i + 1) as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn singular_detected() {
        let a = BandMatrix::zeros(3, 1, 1);
        assert!(matches!(
            a.solve(&[1.0, 1.0, 1.0]),
            Err(Error::SingularSystem { row: 0 })
        ));
    }
}

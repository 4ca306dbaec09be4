//! Small dense complex linear algebra: partial-pivot LU, determinant, solve, rank.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::real::Real;

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![Complex::new(T::zero(), T::zero()); n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn try_from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Result<Complex<T>>) -> Result<Self> {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j)?;
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex<T>) {
        self.data[i * self.n + j] = v;
    }

    pub fn lu(&self) -> Lu<T> {
        Lu::factor(self.clone())
    }

    pub fn det(&self) -> Complex<T> {
        self.lu().det()
    }
}

/// `P A = L U` with unit-diagonal `L`, stored in place.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    lu: Matrix<T>,
    perm: Vec<usize>,
    sign: T,
    singular: bool,
}

impl<T: Real> Lu<T> {
    pub fn factor(mut a: Matrix<T>) -> Self {
        let n = a.n;
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = T::one();
        let mut singular = false;
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, a.get(i, k).norm()))
                .fold((k, T::neg_infinity()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax == T::zero() {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = a.get(k, k);
            for i in (k + 1)..n {
                let factor = a.get(i, k) / pivot;
                a.set(i, k, factor);
                for j in (k + 1)..n {
                    let v = a.get(i, j) - factor * a.get(k, j);
                    a.set(i, j, v);
                }
            }
        }
        Lu { lu: a, perm, sign, singular }
    }

    pub fn det(&self) -> Complex<T> {
        if self.singular {
            return Complex::new(T::zero(), T::zero());
        }
        (0..self.lu.n).fold(Complex::new(self.sign, T::zero()), |acc, i| acc * self.lu.get(i, i))
    }

    pub fn solve(&self, b: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        let n = self.lu.n;
        if b.len() != n {
            return Err(Error::DimensionMismatch { left: n, right: b.len() });
        }
        if self.singular {
            return Err(Error::InvalidArgument("singular matrix".into()));
        }
        let mut y: Vec<Complex<T>> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = self.lu.get(i, j);
                y[i] = y[i] - l * y[j];
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let u = self.lu.get(i, j);
                y[i] = y[i] - u * y[j];
            }
            y[i] = y[i] / self.lu.get(i, i);
        }
        Ok(y)
    }
}

/// Numerical rank of a rectangular row-major matrix (`rows × cols`) by
/// Gaussian elimination with full pivoting; pivots below `rel_tol·max|a|` count as zero.
pub fn rank<T: Real>(rows: usize, cols: usize, data: &[Complex<T>], rel_tol: T) -> usize {
    let mut a = data.to_vec();
    let scale = a.iter().map(|z| z.norm()).fold(T::zero(), T::max);
    if scale == T::zero() {
        return 0;
    }
    let thresh = rel_tol * scale;
    let mut rank = 0;
    let mut col_used = vec![false; cols];
    let mut row_used = vec![false; rows];
    loop {
        let mut best: Option<(usize, usize, T)> = None;
        for i in (0..rows).filter(|&i| !row_used[i]) {
            for j in (0..cols).filter(|&j| !col_used[j]) {
                let v = a[i * cols + j].norm();
                if best.is_none_or(|b| v > b.2) {
                    best = Some((i, j, v));
                }
            }
        }
        let Some((pi, pj, pv)) = best else { break };
        if pv <= thresh {
            break;
        }
        row_used[pi] = true;
        col_used[pj] = true;
        rank += 1;
        let pivot = a[pi * cols + pj];
        for i in (0..rows).filter(|&i| !row_used[i]) {
            let factor = a[i * cols + pj] / pivot;
            for j in 0..cols {
                let v = a[i * cols + j] - factor * a[pi * cols + j];
                a[i * cols + j] = v;
            }
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::cplx;

    #[test]
    fn det_of_known_matrix() {
        // [[1, 2], [3, 4]] -> -2
        let m = Matrix::<f64>::from_fn(2, |i, j| cplx((i * 2 + j + 1) as f64, 0.0));
        assert!((m.det() - cplx(-2.0, 0.0)).norm() < 1e-14);
        let z = Matrix::<f64>::zeros(3);
        assert_eq!(z.det(), cplx(0.0, 0.0));
        assert_eq!(Matrix::<f64>::zeros(0).det(), cplx(1.0, 0.0));
    }

    #[test]
    fn det_matches_leibniz_for_complex_3x3() {
        let vals = [
            cplx(0.3, 1.0), cplx(-1.2, 0.4), cplx(2.0, -0.7),
            cplx(0.0, 0.5), cplx(1.1, 1.1), cplx(-0.3, 0.2),
            cplx(0.9, -2.0), cplx(0.4, 0.0), cplx(1.5, 0.6),
        ];
        let m = Matrix::<f64>::from_fn(3, |i, j| vals[i * 3 + j]);
        let a = |i: usize, j: usize| vals[i * 3 + j];
        let leibniz = a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1))
            - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
            + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
        assert!((m.det() - leibniz).norm() < 1e-13);
    }

    #[test]
    fn solve_round_trip() {
        let m = Matrix::<f64>::from_fn(3, |i, j| cplx(1.0 / (i + j + 1) as f64, (i as f64) - (j as f64)));
        let x = [cplx(1.0, 0.0), cplx(-2.0, 0.5), cplx(0.0, 3.0)];
        let b: Vec<_> = (0..3).map(|i| (0..3).map(|j| m.get(i, j) * x[j]).sum()).collect();
        let sol = m.lu().solve(&b).unwrap();
        for (s, e) in sol.iter().zip(x) {
            assert!((s - e).norm() < 1e-12);
        }
    }

    #[test]
    fn rank_of_rank_one() {
        let data: Vec<_> = (0..6).map(|k| cplx::<f64>(((k / 3) + 1) as f64 * ((k % 3) + 1) as f64, 0.0)).collect();
        assert_eq!(rank(2, 3, &data, 1e-12), 1);
        let id: Vec<_> = (0..9).map(|k| cplx::<f64>(if k % 4 == 0 { 1.0 } else { 0.0 }, 0.0)).collect();
        assert_eq!(rank(3, 3, &id, 1e-12), 3);
    }
}

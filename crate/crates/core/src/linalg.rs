//! Small dense matrices, a cyclic Jacobi eigensolver for symmetric matrices,
//! and a pivoted linear solve. Sized for mode counts up to ~100.

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "rows must form a square matrix");
        Matrix::from_fn(n, |i, j| rows[i][j])
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.n, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix { n: self.n, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n);
        Matrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let scale = self.max_abs().max(1e-300);
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if (self.get(i, j) - self.get(j, i)).abs() > tol * scale {
                    return false;
                }
            }
        }
        true
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }
}

/// Eigen-decomposition of a symmetric matrix: `values[k]` pairs with the
/// k-th column of `vectors`, sorted by ascending eigenvalue.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

/// Cyclic Jacobi rotations. Converges when the off-diagonal Frobenius norm
/// drops below 1e-14 of the matrix norm. Input must be symmetric.
pub fn jacobi_eigen(m: &Matrix) -> Eigen {
    let n = m.n();
    let mut a = m.clone();
    let mut v = Matrix::identity(n);
    let scale = m.frobenius_norm().max(1e-300);

    const MAX_SWEEPS: usize = 100;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += 2.0 * a.get(i, j) * a.get(i, j);
            }
        }
        if off.sqrt() <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
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
    order.sort_by(|&i, &j| a.get(i, i).partial_cmp(&a.get(j, j)).unwrap());

    let values: Vec<f64> = order.iter().map(|&k| a.get(k, k)).collect();
    let mut vectors = Matrix::zeros(n);
    for (col, &k) in order.iter().enumerate() {
        let mut column: Vec<f64> = (0..n).map(|i| v.get(i, k)).collect();
        // Deterministic sign: first significant component positive.
        let flip = column
            .iter()
            .find(|x| x.abs() > 1e-8)
            .map(|x| *x < 0.0)
            .unwrap_or(false);
        if flip {
            for x in column.iter_mut() {
                *x = -*x;
            }
        }
        for i in 0..n {
            vectors.set(i, col, column[i]);
        }
    }
    Eigen { values, vectors }
}

/// Solve `a x = b` by Gaussian elimination with partial pivoting.
/// Returns None when the matrix is numerically singular.
pub fn solve_linear(a: &Matrix, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.n();
    assert_eq!(b.len(), n);
    let mut m = a.clone();
    let mut x = b.to_vec();

    for col in 0..n {
        let mut pivot = col;
        for row in (col + 1)..n {
            if m.get(row, col).abs() > m.get(pivot, col).abs() {
                pivot = row;
            }
        }
        let pv = m.get(pivot, col);
        if pv.abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for j in 0..n {
                let tmp = m.get(col, j);
                m.set(col, j, m.get(pivot, j));
                m.set(pivot, j, tmp);
            }
            x.swap(col, pivot);
        }
        for row in (col + 1)..n {
            let factor = m.get(row, col) / m.get(col, col);
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                let v = m.get(row, j) - factor * m.get(col, j);
                m.set(row, j, v);
            }
            x[row] -= factor * x[col];
        }
    }
    for row in (0..n).rev() {
        let mut sum = x[row];
        for j in (row + 1)..n {
            sum -= m.get(row, j) * x[j];
        }
        x[row] = sum / m.get(row, row);
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn jacobi_diagonalizes_2x2() {
        let m = Matrix::from_rows(&[&[2.0, -1.0], &[-1.0, 2.0]]);
        let eig = jacobi_eigen(&m);
        assert_relative_eq!(eig.values[0], 1.0, max_relative = 1e-12);
        assert_relative_eq!(eig.values[1], 3.0, max_relative = 1e-12);
        // (1,1)/sqrt(2) pairs with eigenvalue 1
        let inv2 = 1.0 / 2.0_f64.sqrt();
        assert_relative_eq!(eig.vectors.get(0, 0), inv2, max_relative = 1e-12);
        assert_relative_eq!(eig.vectors.get(1, 0), inv2, max_relative = 1e-12);
    }

    #[test]
    fn jacobi_zero_matrix() {
        let eig = jacobi_eigen(&Matrix::zeros(4));
        assert!(eig.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn jacobi_reconstructs_input() {
        // deterministic pseudo-random symmetric matrix
        let mut seed = 0x12345u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let n = 8;
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = next();
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        let eig = jacobi_eigen(&m);
        // VT V = I
        let vtv = eig.vectors.transpose().matmul(&eig.vectors);
        assert!(vtv.sub(&Matrix::identity(n)).max_abs() < 1e-12);
        // V L VT = M
        let mut lambda = Matrix::zeros(n);
        for k in 0..n {
            lambda.set(k, k, eig.values[k]);
        }
        let rec = eig.vectors.matmul(&lambda).matmul(&eig.vectors.transpose());
        assert!(rec.sub(&m).frobenius_norm() < 1e-10 * m.frobenius_norm());
    }

    #[test]
    fn linear_solve_roundtrip() {
        let a = Matrix::from_rows(&[&[3.0, 1.0, 0.0], &[1.0, 4.0, 2.0], &[0.0, 2.0, 5.0]]);
        let x_true = [1.0, -2.0, 0.5];
        let b: Vec<f64> = (0..3)
            .map(|i| (0..3).map(|j| a.get(i, j) * x_true[j]).sum())
            .collect();
        let x = solve_linear(&a, &b).unwrap();
        for (xs, xt) in x.iter().zip(x_true.iter()) {
            assert_relative_eq!(xs, xt, max_relative = 1e-12);
        }
    }
}

//! Small dense real-matrix kernels: LU inversion, cyclic Jacobi
//! eigendecomposition, symmetric PSD square root, and a rigorously
//! widened inverse enclosure. Everything here targets matrices of
//! order a few; stability is preferred over speed throughout.

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalMatrix};

/// Dense row-major matrix of `f64`.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        assert!(rows > 0 && cols > 0, "matrix must be nonempty");
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Matrix {
        let mut m = Matrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.set(r, c, f(r, c));
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Matrix {
        assert!(!rows.is_empty(), "matrix must be nonempty");
        let cols = rows[0].len();
        assert!(
            rows.iter().all(|r| r.len() == cols),
            "ragged rows in matrix literal"
        );
        Matrix::from_fn(rows.len(), cols, |r, c| rows[r][c])
    }

    /// Row-major construction; `data.len()` must equal `rows * cols`.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Matrix {
        assert_eq!(data.len(), rows * cols, "row-major data length mismatch");
        assert!(rows > 0 && cols > 0, "matrix must be nonempty");
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        assert!(r < self.rows && c < self.cols, "index out of range");
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: f64) {
        assert!(r < self.rows && c < self.cols, "index out of range");
        self.data[r * self.cols + c] = value;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_row_major(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn matmul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul dimension mismatch: {}x{} by {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        Matrix::from_fn(self.rows, rhs.cols, |r, c| {
            let mut acc = 0.0;
            for k in 0..self.cols {
                acc += self.get(r, k) * rhs.get(k, c);
            }
            acc
        })
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "matvec dimension mismatch");
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn add(&self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c) + rhs.get(r, c))
    }

    pub fn sub(&self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c) - rhs.get(r, c))
    }

    pub fn neg(&self) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |r, c| -self.get(r, c))
    }

    pub fn scale(&self, factor: f64) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |r, c| factor * self.get(r, c))
    }

    /// Max row sum of absolute values (the induced infinity norm).
    pub fn inf_norm(&self) -> f64 {
        (0..self.rows)
            .map(|r| self.row(r).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Exact conversion to a matrix of point intervals.
    pub fn to_intervals(&self) -> IntervalMatrix {
        IntervalMatrix::from_fn(self.rows, self.cols, |r, c| Interval::point(self.get(r, c)))
    }

    /// Inverse by LU with partial pivoting.
    ///
    /// A pivot below `1e-12 * max|entry|` is treated as singular and the
    /// failing column is reported.
    pub fn invert(&self) -> Result<Matrix> {
        assert!(self.is_square(), "invert requires a square matrix");
        let n = self.rows;
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let tol = 1e-12 * scale;

        // Augmented [A | I], forward elimination with row swaps.
        let mut a = self.clone();
        let mut inv = Matrix::identity(n);
        for col in 0..n {
            let mut pivot_row = col;
            let mut pivot_val = a.get(col, col).abs();
            for r in (col + 1)..n {
                let v = a.get(r, col).abs();
                if v > pivot_val {
                    pivot_val = v;
                    pivot_row = r;
                }
            }
            if pivot_val <= tol {
                return Err(Error::Singular {
                    pivot: a.get(pivot_row, col),
                    column: col,
                });
            }
            if pivot_row != col {
                for c in 0..n {
                    let (x, y) = (a.get(col, c), a.get(pivot_row, c));
                    a.set(col, c, y);
                    a.set(pivot_row, c, x);
                    let (x, y) = (inv.get(col, c), inv.get(pivot_row, c));
                    inv.set(col, c, y);
                    inv.set(pivot_row, c, x);
                }
            }
            let d = a.get(col, col);
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a.get(r, col) / d;
                if factor == 0.0 {
                    continue;
                }
                for c in 0..n {
                    a.set(r, c, a.get(r, c) - factor * a.get(col, c));
                    inv.set(r, c, inv.get(r, c) - factor * inv.get(col, c));
                }
            }
        }
        for r in 0..n {
            let d = a.get(r, r);
            for c in 0..n {
                inv.set(r, c, inv.get(r, c) / d);
            }
        }
        Ok(inv)
    }

    /// Interval matrix guaranteed to contain the exact inverse.
    ///
    /// The approximate inverse `B` is widened per row by the first-order
    /// Neumann bound `‖F_r‖₁ · ‖B‖∞ / (1 − ‖F‖∞)` with `F = B·A − I`.
    /// The residual is evaluated in interval arithmetic over the exact
    /// float entries, so the bound covers the rounding of the residual
    /// computation itself; a zero residual certifies an exact inverse
    /// and yields a degenerate enclosure.
    pub fn enclose_inverse(&self) -> Result<IntervalMatrix> {
        let approx = self.invert()?;
        let n = self.rows;
        let product = approx.to_intervals().matmul(&self.to_intervals());
        let mut row_res = vec![0.0; n];
        let mut res_norm: f64 = 0.0;
        for r in 0..n {
            let mut sum = 0.0;
            for c in 0..n {
                let e = product.get(r, c);
                let target = if r == c { 1.0 } else { 0.0 };
                sum += (e.inf() - target).abs().max((e.sup() - target).abs());
            }
            row_res[r] = sum;
            res_norm = res_norm.max(sum);
        }
        if res_norm >= 0.5 {
            return Err(Error::Singular {
                pivot: res_norm,
                column: 0,
            });
        }
        let b_norm = approx.inf_norm() * (1.0 + 1e-12);
        Ok(IntervalMatrix::from_fn(n, n, |r, c| {
            let v = approx.get(r, c);
            let delta = (row_res[r] * b_norm / (1.0 - res_norm)) * 1.000001;
            if delta == 0.0 {
                Interval::point(v)
            } else {
                Interval::new((v - delta).next_down(), (v + delta).next_up())
            }
        }))
    }

    /// Eigendecomposition of a symmetric matrix by cyclic Jacobi sweeps.
    ///
    /// Returns eigenvalues sorted descending and the matching
    /// eigenvectors as columns. Inputs are symmetrized first; asymmetry
    /// beyond tolerance is an error.
    pub fn eig_sym(&self) -> Result<(Vec<f64>, Matrix)> {
        assert!(self.is_square(), "eig_sym requires a square matrix");
        let n = self.rows;
        let scale = self.max_abs().max(1.0);
        let mut asym: f64 = 0.0;
        for r in 0..n {
            for c in (r + 1)..n {
                asym = asym.max((self.get(r, c) - self.get(c, r)).abs());
            }
        }
        if asym > 1e-10 * scale {
            return Err(Error::NotSymmetric { asymmetry: asym });
        }
        let mut a = Matrix::from_fn(n, n, |r, c| 0.5 * (self.get(r, c) + self.get(c, r)));
        let mut v = Matrix::identity(n);

        const MAX_SWEEPS: usize = 100;
        let off_tol = 1e-15 * scale.max(self.inf_norm());
        for _ in 0..MAX_SWEEPS {
            let mut off = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    off += a.get(p, q).abs();
                }
            }
            if off <= off_tol {
                let mut pairs: Vec<(f64, usize)> =
                    (0..n).map(|i| (a.get(i, i), i)).collect();
                pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
                let values: Vec<f64> = pairs.iter().map(|p| p.0).collect();
                let vectors = Matrix::from_fn(n, n, |r, c| v.get(r, pairs[c].1));
                return Ok((values, vectors));
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a.get(p, q);
                    if apq.abs() <= off_tol * 1e-2 / (n * n) as f64 {
                        continue;
                    }
                    let theta = 0.5 * (a.get(q, q) - a.get(p, p)) / apq;
                    let t = if theta.abs() > 1e12 {
                        0.5 / theta
                    } else {
                        let sign = if theta < 0.0 { -1.0 } else { 1.0 };
                        sign / (theta.abs() + (1.0 + theta * theta).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    let tau = s / (1.0 + c);
                    let h = t * apq;

                    a.set(p, p, a.get(p, p) - h);
                    a.set(q, q, a.get(q, q) + h);
                    a.set(p, q, 0.0);
                    a.set(q, p, 0.0);
                    for j in 0..n {
                        if j != p && j != q {
                            let g = a.get(j, p);
                            let hh = a.get(j, q);
                            a.set(j, p, g - s * (hh + g * tau));
                            a.set(p, j, a.get(j, p));
                            a.set(j, q, hh + s * (g - hh * tau));
                            a.set(q, j, a.get(j, q));
                        }
                    }
                    for j in 0..n {
                        let g = v.get(j, p);
                        let hh = v.get(j, q);
                        v.set(j, p, g - s * (hh + g * tau));
                        v.set(j, q, hh + s * (g - hh * tau));
                    }
                }
            }
        }
        Err(Error::EigenNoConvergence { sweeps: MAX_SWEEPS })
    }

    /// Largest eigenvalue of a symmetric matrix.
    pub fn max_eigenvalue_sym(&self) -> Result<f64> {
        let (values, _) = self.eig_sym()?;
        Ok(values[0])
    }

    /// Symmetric square root of a positive semidefinite matrix.
    ///
    /// Eigenvalues in `[-tol, 0)` are clamped to zero; values below the
    /// tolerance are an error.
    pub fn sqrt_sym_psd(&self) -> Result<Matrix> {
        let (values, vectors) = self.eig_sym()?;
        let tol = 1e-10 * self.inf_norm().max(1.0);
        let mut roots = Vec::with_capacity(values.len());
        for &v in &values {
            if v < -tol {
                return Err(Error::NotPsd { value: v });
            }
            roots.push(v.max(0.0).sqrt());
        }
        let n = self.rows;
        // V sqrt(Λ) Vᵀ
        Ok(Matrix::from_fn(n, n, |r, c| {
            let mut acc = 0.0;
            for k in 0..n {
                acc += vectors.get(r, k) * roots[k] * vectors.get(c, k);
            }
            acc
        }))
    }
}

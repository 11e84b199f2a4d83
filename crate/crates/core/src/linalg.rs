//! Small dense matrices and direct solvers over any [`Scalar`].

use crate::scalar::Scalar;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds a matrix from row vectors. Returns `None` on ragged input.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Option<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return None;
        }
        let n = rows.len();
        Some(Self {
            rows: n,
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_f64_rows(rows: &[Vec<f64>]) -> Option<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| T::from_f64(v)).collect())
                .collect(),
        )
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn push_row(&mut self, row: &[T]) {
        assert!(
            self.rows == 0 || row.len() == self.cols,
            "row length mismatch"
        );
        if self.rows == 0 {
            self.cols = row.len();
        }
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols);
        self.rows().map(|r| crate::scalar::dot(r, x)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.rows().map(<[T]>::to_vec).collect()
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Solves the square system `m x = rhs` by Gaussian elimination with partial
/// pivoting. Returns `None` when the best available pivot magnitude is at or
/// below `singular_tol`.
pub fn solve<T: Scalar>(m: &[Vec<T>], rhs: &[T], singular_tol: &T) -> Option<Vec<T>> {
    let n = rhs.len();
    debug_assert!(m.iter().all(|r| r.len() == n));
    let mut a: Vec<Vec<T>> = m
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut row = r.clone();
            row.push(b.clone());
            row
        })
        .collect();

    for col in 0..n {
        let (piv, piv_abs) =
            (col..n)
                .map(|r| (r, a[r][col].abs()))
                .fold(
                    (col, T::zero()),
                    |best, cur| {
                        if cur.1 > best.1 {
                            cur
                        } else {
                            best
                        }
                    },
                );
        if piv_abs.is_zero() || piv_abs <= *singular_tol {
            return None;
        }
        a.swap(col, piv);
        let pivot = a[col][col].clone();
        for r in (col + 1)..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone() / pivot.clone();
            for c in col..=n {
                let delta = factor.clone() * a[col][c].clone();
                a[r][c] = a[r][c].clone() - delta;
            }
        }
    }

    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut acc = a[i][n].clone();
        for j in (i + 1)..n {
            acc = acc - a[i][j].clone() * x[j].clone();
        }
        x[i] = acc / a[i][i].clone();
    }
    Some(x)
}

/// Determinant by elimination with partial pivoting. Exact for rationals.
pub fn determinant<T: Scalar>(m: &[Vec<T>]) -> T {
    let n = m.len();
    if n == 0 {
        return T::one();
    }
    let mut a = m.to_vec();
    let mut det = T::one();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| {
                a[x][col]
                    .abs()
                    .partial_cmp(&a[y][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(col);
        if a[piv][col].is_zero() {
            return T::zero();
        }
        if piv != col {
            a.swap(col, piv);
            det = -det;
        }
        let pivot = a[col][col].clone();
        det = det * pivot.clone();
        for r in (col + 1)..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone() / pivot.clone();
            for c in col..n {
                let delta = factor.clone() * a[col][c].clone();
                a[r][c] = a[r][c].clone() - delta;
            }
        }
    }
    det
}

/// Normal of the hyperplane through `points` (exactly `d` points in `R^d`),
/// computed as the generalized cross product of the edge vectors from the
/// first point. The result is zero when the points are affinely dependent.
pub fn hyperplane_normal<T: Scalar>(points: &[&[T]]) -> Vec<T> {
    let d = points.len();
    let base = points[0];
    let edges: Vec<Vec<T>> = points[1..]
        .iter()
        .map(|p| {
            p.iter()
                .zip(base)
                .map(|(a, b)| a.clone() - b.clone())
                .collect()
        })
        .collect();
    (0..d)
        .map(|k| {
            let minor: Vec<Vec<T>> = edges
                .iter()
                .map(|e| {
                    e.iter()
                        .enumerate()
                        .filter(|&(j, _)| j != k)
                        .map(|(_, v)| v.clone())
                        .collect()
                })
                .collect();
            let det = determinant(&minor);
            if k % 2 == 0 {
                det
            } else {
                -det
            }
        })
        .collect()
}

/// Column-pivoted row reduction of `rows`. Returns the pivot columns, in
/// increasing order; their count is the rank. Entries at or below `tol` are
/// treated as zero.
pub fn pivot_columns<T: Scalar>(rows: &[Vec<T>], tol: &T) -> Vec<usize> {
    let Some(width) = rows.first().map(Vec::len) else {
        return Vec::new();
    };
    let mut a = rows.to_vec();
    let mut pivots = Vec::new();
    let mut next_row = 0;
    for col in 0..width {
        if next_row == a.len() {
            break;
        }
        let (piv, piv_abs) = (next_row..a.len()).map(|r| (r, a[r][col].abs())).fold(
            (next_row, T::zero()),
            |best, cur| if cur.1 > best.1 { cur } else { best },
        );
        if piv_abs.is_zero() || piv_abs <= *tol {
            continue;
        }
        a.swap(next_row, piv);
        let pivot = a[next_row][col].clone();
        for r in (next_row + 1)..a.len() {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone() / pivot.clone();
            for c in col..width {
                let delta = factor.clone() * a[next_row][c].clone();
                a[r][c] = a[r][c].clone() - delta;
            }
        }
        pivots.push(col);
        next_row += 1;
    }
    pivots
}

pub fn rank_of<T: Scalar>(rows: &[Vec<T>], tol: &T) -> usize {
    pivot_columns(rows, tol).len()
}

/// `n!` as a scalar.
pub fn factorial<T: Scalar>(n: usize) -> T {
    (1..=n).fold(T::one(), |acc, k| acc * T::from_usize(k))
}

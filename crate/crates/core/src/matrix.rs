//! Dense matrices over an exact scalar field.
//!
//! The kernel keeps every operation exact: rank is computed by fraction-free
//! (Bareiss-style) elimination with a deterministic pivot scan, linear
//! independence is decided by incremental elimination, and span membership is
//! solved by Gauss-Jordan reduction. There is no tolerance anywhere; a zero
//! is a zero.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use num::Zero;
use std::fmt;
use std::ops::{Index, IndexMut};

/// A dense `rows x cols` matrix in row-major layout. Zero-sized dimensions
/// are allowed; empty matrices have rank 0 and flatten into nothing.
#[derive(Clone, PartialEq, Eq)]
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

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Shape("ragged row lengths".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Matrix with entries from a flat row-major vector.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
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

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    /// Row-major copy of all entries, the vectorization used for block
    /// independence tests.
    pub fn vectorize(&self) -> Vec<T> {
        self.data.clone()
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn map(&self, mut f: impl FnMut(&T) -> T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| f(x)).collect(),
        }
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(|x| x.mul_ref(c))
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].add_ref(&rhs[(i, j)]))
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].sub_ref(&rhs[(i, j)]))
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(
            self.cols, rhs.rows,
            "inner dimensions must agree for a product"
        );
        Self::from_fn(self.rows, rhs.cols, |i, j| {
            let mut acc = T::zero();
            for k in 0..self.cols {
                acc = acc + self[(i, k)].mul_ref(&rhs[(k, j)]);
            }
            acc
        })
    }

    /// Kronecker product in row-major convention: entry
    /// `((i1*r2 + i2), (j1*c2 + j2)) = self[i1,j1] * rhs[i2,j2]`.
    pub fn kron(&self, rhs: &Self) -> Self {
        Self::from_fn(self.rows * rhs.rows, self.cols * rhs.cols, |i, j| {
            let (i1, i2) = (i / rhs.rows, i % rhs.rows);
            let (j1, j2) = (j / rhs.cols, j % rhs.cols);
            self[(i1, j1)].mul_ref(&rhs[(i2, j2)])
        })
    }

    pub fn trace(&self) -> T {
        debug_assert!(self.is_square());
        let mut acc = T::zero();
        for i in 0..self.rows {
            acc = acc + self[(i, i)].clone();
        }
        acc
    }

    pub fn submatrix(
        &self,
        rows: std::ops::Range<usize>,
        cols: std::ops::Range<usize>,
    ) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| {
            self[(rows.start + i, cols.start + j)].clone()
        })
    }

    /// Stacks matrices vertically; they must share a column count.
    pub fn vstack(parts: &[&Self]) -> Result<Self> {
        let cols = parts.first().map_or(0, |m| m.cols);
        if parts.iter().any(|m| m.cols != cols) {
            return Err(Error::Shape("vstack requires equal column counts".into()));
        }
        let rows = parts.iter().map(|m| m.rows).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for m in parts {
            data.extend_from_slice(&m.data);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// `row[dst] += c * row[src]`.
    pub fn row_axpy(&mut self, dst: usize, src: usize, c: &T) {
        for j in 0..self.cols {
            let add = self[(src, j)].mul_ref(c);
            self[(dst, j)] = self[(dst, j)].add_ref(&add);
        }
    }

    /// `col[dst] += c * col[src]`.
    pub fn col_axpy(&mut self, dst: usize, src: usize, c: &T) {
        for i in 0..self.rows {
            let add = self[(i, src)].mul_ref(c);
            self[(i, dst)] = self[(i, dst)].add_ref(&add);
        }
    }

    /// Exact rank by fraction-free elimination.
    ///
    /// Pivoting is deterministic: columns are visited left to right and the
    /// first row with a nonzero entry below the frontier is chosen. The
    /// Bareiss update `(p*a[i][j] - a[i][c]*a[r][j]) / prev` keeps
    /// intermediate values as minors of the input, which bounds entry growth
    /// for integral inputs; every division is exact.
    pub fn rank(&self) -> usize {
        let (m, n) = (self.rows, self.cols);
        if m == 0 || n == 0 {
            return 0;
        }
        let mut a: Vec<Vec<T>> = (0..m)
            .map(|i| self.data[i * n..(i + 1) * n].to_vec())
            .collect();
        let mut prev = T::one();
        let mut r = 0usize;
        for c in 0..n {
            if r == m {
                break;
            }
            let pivot = match (r..m).find(|&i| !a[i][c].is_zero()) {
                Some(p) => p,
                None => continue,
            };
            a.swap(r, pivot);
            for i in r + 1..m {
                for j in c + 1..n {
                    let num = a[r][c].mul_ref(&a[i][j]).sub_ref(&a[i][c].mul_ref(&a[r][j]));
                    a[i][j] = num.div_ref(&prev);
                }
                a[i][c] = T::zero();
            }
            prev = a[r][c].clone();
            r += 1;
        }
        r
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    /// Exact characteristic polynomial coefficients of a square matrix,
    /// monic order: `[1, c1, ..., cn]` for `x^n + c1 x^(n-1) + ... + cn`.
    ///
    /// Computed by the Faddeev-LeVerrier recurrence
    /// `M_k = A (M_{k-1} + c_{k-1} I)`, `c_k = -tr(M_k) / k`; the divisions
    /// are exact over any field of characteristic zero.
    ///
    /// With `hermitian` set, the coefficients are checked to be real, which
    /// must hold for Hermitian input and is a cheap sanity net for callers
    /// doing positivity analysis.
    pub fn charpoly(&self, hermitian: bool) -> Result<Vec<T>> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let mut coeffs = Vec::with_capacity(n + 1);
        coeffs.push(T::one());
        if n == 0 {
            return Ok(coeffs);
        }
        let mut m = self.clone();
        let mut c = T::zero() - m.trace();
        coeffs.push(c.clone());
        for k in 2..=n {
            let mut shifted = m;
            for i in 0..n {
                shifted[(i, i)] = shifted[(i, i)].add_ref(&c);
            }
            m = self.matmul(&shifted);
            c = (T::zero() - m.trace()) / T::from_integer(k as i64);
            coeffs.push(c.clone());
        }
        if hermitian {
            for co in &coeffs {
                if co.conj() != *co {
                    return Err(Error::Internal(
                        "characteristic polynomial of Hermitian input has a non-real coefficient"
                            .into(),
                    ));
                }
            }
        }
        Ok(coeffs)
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[{}x{}]", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| format!("{:?}", self.data[i * self.cols + j]))
                .collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        Ok(())
    }
}

/// Incremental basis of a subspace, kept in row-echelon form with monic
/// pivots. Used for greedy independence scans.
#[derive(Clone)]
pub struct SpanBasis<T> {
    width: usize,
    // (pivot column, monic reduced vector), sorted by pivot column
    rows: Vec<(usize, Vec<T>)>,
}

impl<T: Scalar> SpanBasis<T> {
    pub fn new(width: usize) -> Self {
        Self {
            width,
            rows: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &mut [T]) {
        for (p, row) in &self.rows {
            if !v[*p].is_zero() {
                let f = v[*p].clone();
                for c in *p..self.width {
                    let sub = row[c].mul_ref(&f);
                    v[c] = v[c].sub_ref(&sub);
                }
            }
        }
    }

    pub fn contains(&self, v: &[T]) -> bool {
        assert_eq!(v.len(), self.width, "vector width mismatch");
        let mut w = v.to_vec();
        self.reduce(&mut w);
        w.iter().all(Zero::is_zero)
    }

    /// Adds a vector; returns `true` when it enlarged the span.
    pub fn insert(&mut self, v: &[T]) -> bool {
        assert_eq!(v.len(), self.width, "vector width mismatch");
        let mut w = v.to_vec();
        self.reduce(&mut w);
        let pivot = match w.iter().position(|x| !x.is_zero()) {
            Some(p) => p,
            None => return false,
        };
        let lead = w[pivot].clone();
        for c in pivot..self.width {
            w[c] = w[c].div_ref(&lead);
        }
        let at = self
            .rows
            .binary_search_by_key(&pivot, |(p, _)| *p)
            .unwrap_err();
        self.rows.insert(at, (pivot, w));
        true
    }
}

fn check_uniform_shape<T: Scalar>(mats: &[Matrix<T>]) -> Result<(usize, usize)> {
    let (r, c) = match mats.first() {
        Some(m) => (m.rows(), m.cols()),
        None => return Ok((0, 0)),
    };
    if mats.iter().any(|m| m.rows() != r || m.cols() != c) {
        return Err(Error::Shape(
            "all matrices in the family must share one shape".into(),
        ));
    }
    Ok((r, c))
}

/// Greedy maximal linearly independent subfamily, scanned left to right.
///
/// Index `i` is kept exactly when matrix `i` (vectorized row-major) is not in
/// the span of the previously kept ones, so the result is deterministic and
/// every omitted matrix is spanned by kept matrices with smaller index.
pub fn independent_subset<T: Scalar>(mats: &[Matrix<T>]) -> Result<Vec<usize>> {
    let (r, c) = check_uniform_shape(mats)?;
    let mut basis = SpanBasis::new(r * c);
    let mut kept = Vec::new();
    for (i, m) in mats.iter().enumerate() {
        if basis.insert(&m.vectorize()) {
            kept.push(i);
        }
    }
    Ok(kept)
}

/// Solves `sum_i x_i * columns_i = target` by Gauss-Jordan elimination.
/// Returns the particular solution with free variables set to zero, or
/// `None` when the system is inconsistent.
pub(crate) fn solve_columns<T: Scalar>(columns: &[Vec<T>], target: &[T]) -> Option<Vec<T>> {
    let h = target.len();
    let w = columns.len();
    debug_assert!(columns.iter().all(|c| c.len() == h));
    // augmented h x (w+1) system
    let mut aug: Vec<Vec<T>> = (0..h)
        .map(|i| {
            let mut row: Vec<T> = columns.iter().map(|c| c[i].clone()).collect();
            row.push(target[i].clone());
            row
        })
        .collect();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; w];
    let mut rank = 0usize;
    for col in 0..w {
        let pivot = match (rank..h).find(|&i| !aug[i][col].is_zero()) {
            Some(p) => p,
            None => continue,
        };
        aug.swap(rank, pivot);
        let lead = aug[rank][col].clone();
        for j in col..=w {
            aug[rank][j] = aug[rank][j].div_ref(&lead);
        }
        for i in 0..h {
            if i != rank && !aug[i][col].is_zero() {
                let f = aug[i][col].clone();
                for j in col..=w {
                    let sub = aug[rank][j].mul_ref(&f);
                    aug[i][j] = aug[i][j].sub_ref(&sub);
                }
            }
        }
        pivot_of_col[col] = Some(rank);
        rank += 1;
    }
    // inconsistent when a zero coefficient row has nonzero augment
    for row in aug.iter().skip(rank) {
        if !row[w].is_zero() {
            return None;
        }
    }
    let mut sol = vec![T::zero(); w];
    for (col, pivot) in pivot_of_col.iter().enumerate() {
        if let Some(r) = pivot {
            sol[col] = aug[*r][w].clone();
        }
    }
    Some(sol)
}

/// Expresses `target` in the span of `basis`: returns `c` with
/// `target = sum_i c_i * basis_i`, or `None` when no exact combination
/// exists. Coefficients are unique whenever the basis is independent.
pub fn span_coefficients<T: Scalar>(
    target: &Matrix<T>,
    basis: &[Matrix<T>],
) -> Result<Option<Vec<T>>> {
    let (r, c) = check_uniform_shape(basis)?;
    if !basis.is_empty() && (target.rows() != r || target.cols() != c) {
        return Err(Error::Shape(
            "target shape differs from the basis shape".into(),
        ));
    }
    if basis.is_empty() {
        return Ok(if target.is_zero() { Some(vec![]) } else { None });
    }
    let cols: Vec<Vec<T>> = basis.iter().map(Matrix::vectorize).collect();
    Ok(solve_columns(&cols, &target.vectorize()))
}

/// Finds a nonzero constant `k` with `det_eval(k) != 0` by probing
/// `k = 1, 2, ..., degree_bound + 2`.
///
/// A nonzero polynomial of degree at most `degree_bound` has at most
/// `degree_bound` roots, so when the caller's precondition holds (the
/// function is such a polynomial, not identically zero away from 0) one of
/// the probes must succeed. Exhausting them signals a caller bug.
pub fn find_mixing_constant<T: Scalar>(
    det_eval: impl Fn(&T) -> T,
    degree_bound: usize,
) -> Result<T> {
    let probes = degree_bound + 2;
    for k in 1..=probes {
        let x = T::from_integer(k as i64);
        if !det_eval(&x).is_zero() {
            return Ok(x);
        }
    }
    Err(Error::MixingConstantNotFound { probes })
}

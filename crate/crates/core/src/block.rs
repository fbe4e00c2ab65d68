//! Bipartite block matrices: an `m1 x n1` grid of `m2 x n2` blocks.
//!
//! The grid dimensions play the role of the outer tensor factor and the block
//! dimensions the inner one. The two partial transposes act on one factor
//! each: the outer transpose flips the grid, the inner transpose flips every
//! block. The Schmidt rank is the dimension of the linear span of the blocks.

use crate::error::{Error, Result};
use crate::matrix::{independent_subset, span_coefficients, Matrix, SpanBasis};
use crate::scalar::Scalar;

/// Block matrix with outer grid `m1 x n1` and uniform inner block shape
/// `m2 x n2`. Zero-sized grids are legal and represent empty tail regions.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BlockMatrix<T> {
    m1: usize,
    n1: usize,
    m2: usize,
    n2: usize,
    blocks: Vec<Matrix<T>>, // row-major grid
}

impl<T: Scalar> BlockMatrix<T> {
    pub fn zeros(m1: usize, n1: usize, m2: usize, n2: usize) -> Self {
        Self {
            m1,
            n1,
            m2,
            n2,
            blocks: vec![Matrix::zeros(m2, n2); m1 * n1],
        }
    }

    pub fn from_blocks(
        m1: usize,
        n1: usize,
        m2: usize,
        n2: usize,
        blocks: Vec<Matrix<T>>,
    ) -> Result<Self> {
        if blocks.len() != m1 * n1 {
            return Err(Error::Shape(format!(
                "expected {} blocks for a {m1}x{n1} grid, got {}",
                m1 * n1,
                blocks.len()
            )));
        }
        if blocks.iter().any(|b| b.rows() != m2 || b.cols() != n2) {
            return Err(Error::Shape(format!("every block must be {m2}x{n2}")));
        }
        Ok(Self {
            m1,
            n1,
            m2,
            n2,
            blocks,
        })
    }

    pub fn from_fn(
        m1: usize,
        n1: usize,
        m2: usize,
        n2: usize,
        mut f: impl FnMut(usize, usize) -> Matrix<T>,
    ) -> Result<Self> {
        let mut blocks = Vec::with_capacity(m1 * n1);
        for i in 0..m1 {
            for j in 0..n1 {
                blocks.push(f(i, j));
            }
        }
        Self::from_blocks(m1, n1, m2, n2, blocks)
    }

    pub fn grid_rows(&self) -> usize {
        self.m1
    }

    pub fn grid_cols(&self) -> usize {
        self.n1
    }

    pub fn block_rows(&self) -> usize {
        self.m2
    }

    pub fn block_cols(&self) -> usize {
        self.n2
    }

    pub fn block(&self, i: usize, j: usize) -> &Matrix<T> {
        &self.blocks[i * self.n1 + j]
    }

    pub fn set_block(&mut self, i: usize, j: usize, b: Matrix<T>) {
        assert!(b.rows() == self.m2 && b.cols() == self.n2);
        self.blocks[i * self.n1 + j] = b;
    }

    pub fn blocks(&self) -> &[Matrix<T>] {
        &self.blocks
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().all(Matrix::is_zero)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(
            (self.m1, self.n1, self.m2, self.n2),
            (rhs.m1, rhs.n1, rhs.m2, rhs.n2)
        );
        let blocks = self
            .blocks
            .iter()
            .zip(&rhs.blocks)
            .map(|(a, b)| a.add(b))
            .collect();
        Self {
            blocks,
            ..self.clone()
        }
    }

    /// Flat `(m1*m2) x (n1*n2)` matrix in the row-major Kronecker convention:
    /// flat entry `(i*m2 + a, j*n2 + b)` is entry `(a, b)` of block `(i, j)`.
    pub fn flatten(&self) -> Matrix<T> {
        let (m2, n2) = (self.m2, self.n2);
        Matrix::from_fn(self.m1 * m2, self.n1 * n2, |r, c| {
            self.block(r / m2, c / n2)[(r % m2, c % n2)].clone()
        })
    }

    /// Inverse of [`flatten`](Self::flatten) for the given grid and block
    /// shape.
    pub fn unflatten(flat: &Matrix<T>, m1: usize, n1: usize, m2: usize, n2: usize) -> Result<Self> {
        if flat.rows() != m1 * m2 || flat.cols() != n1 * n2 {
            return Err(Error::Dimension(format!(
                "a {}x{} matrix does not split into a {m1}x{n1} grid of {m2}x{n2} blocks",
                flat.rows(),
                flat.cols()
            )));
        }
        Self::from_fn(m1, n1, m2, n2, |i, j| {
            Matrix::from_fn(m2, n2, |a, b| flat[(i * m2 + a, j * n2 + b)].clone())
        })
    }

    /// Rank of the flat matrix.
    pub fn rank(&self) -> usize {
        self.flatten().rank()
    }

    /// Number of linearly independent blocks, scanning the grid row-major.
    /// Zero exactly for the zero matrix (or an empty grid).
    pub fn schmidt_rank(&self) -> usize {
        if self.blocks.is_empty() {
            return 0;
        }
        independent_subset(&self.blocks)
            .expect("uniform block shapes by construction")
            .len()
    }

    /// Partial transpose of the inner factor: every block is transposed in
    /// place, so the block shape swaps to `n2 x m2`. An involution.
    pub fn partial_transpose_inner(&self) -> Self {
        Self {
            m1: self.m1,
            n1: self.n1,
            m2: self.n2,
            n2: self.m2,
            blocks: self.blocks.iter().map(Matrix::transpose).collect(),
        }
    }

    /// Partial transpose of the outer factor: block `(i, j)` moves to
    /// `(j, i)`, blocks unchanged. An involution.
    pub fn partial_transpose_outer(&self) -> Self {
        let mut out = Self::zeros(self.n1, self.m1, self.m2, self.n2);
        for i in 0..self.m1 {
            for j in 0..self.n1 {
                out.set_block(j, i, self.block(i, j).clone());
            }
        }
        out
    }

    /// Copies a rectangular sub-grid (block ranges, not flat index ranges).
    pub fn sub_grid(
        &self,
        rows: std::ops::Range<usize>,
        cols: std::ops::Range<usize>,
    ) -> Self {
        assert!(rows.end <= self.m1 && cols.end <= self.n1);
        let blocks = rows
            .clone()
            .flat_map(|i| cols.clone().map(move |j| (i, j)))
            .map(|(i, j)| self.block(i, j).clone())
            .collect();
        Self {
            m1: rows.len(),
            n1: cols.len(),
            m2: self.m2,
            n2: self.n2,
            blocks,
        }
    }

    /// Minimal sum-of-products decomposition built from the greedy
    /// independent block family.
    ///
    /// The inner factors are the first independent blocks in row-major scan
    /// order; the outer factor for each carries the span coefficients of
    /// every block with respect to that family, so the reconstruction
    /// identity is exact and both factor families are linearly independent.
    pub fn schmidt_decompose(&self) -> Result<SchmidtDecomposition<T>> {
        if self.is_zero() || self.blocks.is_empty() {
            return Err(Error::ZeroMatrix);
        }
        let kept = independent_subset(&self.blocks)?;
        let inner: Vec<Matrix<T>> = kept.iter().map(|&i| self.blocks[i].clone()).collect();
        let k = inner.len();
        let mut outer = vec![Matrix::zeros(self.m1, self.n1); k];
        for i in 0..self.m1 {
            for j in 0..self.n1 {
                let coeffs = span_coefficients(self.block(i, j), &inner)?.ok_or_else(|| {
                    Error::Internal("block escaped the span of the independent family".into())
                })?;
                for (u, c) in coeffs.into_iter().enumerate() {
                    outer[u][(i, j)] = c;
                }
            }
        }
        Ok(SchmidtDecomposition {
            outer_factors: outer,
            inner_factors: inner,
        })
    }

    /// Applies an invertible local transform on both factors.
    ///
    /// Grid rows mix under the outer-left factor, grid columns under the
    /// outer-right one, and every block becomes `V * block * X`. Rank,
    /// Schmidt rank, and both partial-transpose ranks are invariant.
    pub fn apply_local(&self, t: &LocalTransform<T>) -> Result<Self> {
        t.check_compatible(self)?;
        // inner pass
        let inner: Vec<Matrix<T>> = self
            .blocks
            .iter()
            .map(|b| t.inner_left.matmul(b).matmul(&t.inner_right))
            .collect();
        let (p2, q2) = (t.inner_left.rows(), t.inner_right.cols());
        // outer pass: out[a][b] = sum_{i,j} U[a,i] W[j,b] inner[i][j]
        let mut out = Self::zeros(t.outer_left.rows(), t.outer_right.cols(), p2, q2);
        for a in 0..out.m1 {
            for b in 0..out.n1 {
                let mut acc = Matrix::zeros(p2, q2);
                for i in 0..self.m1 {
                    if t.outer_left[(a, i)].is_zero() {
                        continue;
                    }
                    for j in 0..self.n1 {
                        let w = t.outer_left[(a, i)].mul_ref(&t.outer_right[(j, b)]);
                        if w.is_zero() {
                            continue;
                        }
                        acc = acc.add(&inner[i * self.n1 + j].scale(&w));
                    }
                }
                out.set_block(a, b, acc);
            }
        }
        Ok(out)
    }
}

/// A `K`-term sum-of-products decomposition of a block matrix: the source
/// equals `sum_u outer_u (x) inner_u` where the outer factors live on the
/// grid and the inner factors on the block shape, and both families are
/// linearly independent. `K` equals the Schmidt rank.
#[derive(Clone, Debug)]
pub struct SchmidtDecomposition<T> {
    pub outer_factors: Vec<Matrix<T>>,
    pub inner_factors: Vec<Matrix<T>>,
}

impl<T: Scalar> SchmidtDecomposition<T> {
    pub fn len(&self) -> usize {
        self.outer_factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outer_factors.is_empty()
    }

    /// Rebuilds the source block matrix from the factor pairs.
    pub fn reconstruct(&self, m2: usize, n2: usize) -> Result<BlockMatrix<T>> {
        let (m1, n1) = match self.outer_factors.first() {
            Some(f) => (f.rows(), f.cols()),
            None => return Err(Error::ZeroMatrix),
        };
        let mut out = BlockMatrix::zeros(m1, n1, m2, n2);
        for (outer, inner) in self.outer_factors.iter().zip(&self.inner_factors) {
            for i in 0..m1 {
                for j in 0..n1 {
                    if outer[(i, j)].is_zero() {
                        continue;
                    }
                    let b = out.block(i, j).add(&inner.scale(&outer[(i, j)]));
                    out.set_block(i, j, b);
                }
            }
        }
        Ok(out)
    }

    /// True when both factor families pass a direct elimination independence
    /// check.
    pub fn factors_independent(&self) -> bool {
        let check = |fam: &[Matrix<T>]| {
            let Some(first) = fam.first() else { return true };
            let mut basis = SpanBasis::new(first.rows() * first.cols());
            fam.iter().all(|m| basis.insert(&m.vectorize()))
        };
        check(&self.outer_factors) && check(&self.inner_factors)
    }
}

/// An invertible product transform `(U (x) V) . M . (W (x) X)`:
/// `outer_left` and `outer_right` act on the grid, `inner_left` and
/// `inner_right` on every block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalTransform<T> {
    pub outer_left: Matrix<T>,
    pub inner_left: Matrix<T>,
    pub outer_right: Matrix<T>,
    pub inner_right: Matrix<T>,
}

impl<T: Scalar> LocalTransform<T> {
    pub fn identity(m1: usize, m2: usize, n1: usize, n2: usize) -> Self {
        Self {
            outer_left: Matrix::identity(m1),
            inner_left: Matrix::identity(m2),
            outer_right: Matrix::identity(n1),
            inner_right: Matrix::identity(n2),
        }
    }

    fn check_compatible(&self, b: &BlockMatrix<T>) -> Result<()> {
        let factors = [
            ("outer-left", &self.outer_left, b.grid_rows()),
            ("inner-left", &self.inner_left, b.block_rows()),
            ("outer-right", &self.outer_right, b.grid_cols()),
            ("inner-right", &self.inner_right, b.block_cols()),
        ];
        for (name, f, dim) in factors {
            if !f.is_square() || f.rows() != dim {
                return Err(Error::Dimension(format!(
                    "{name} factor must be {dim}x{dim}, got {}x{}",
                    f.rows(),
                    f.cols()
                )));
            }
            if !f.is_invertible() {
                return Err(Error::NotInvertible(format!("{name} factor is singular")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::GaussianRational;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type M = Matrix<GaussianRational>;
    type B = BlockMatrix<GaussianRational>;

    fn g(n: i64) -> GaussianRational {
        GaussianRational::from_integers(n, 0)
    }

    fn unit(r: usize, c: usize, i: usize, j: usize) -> M {
        let mut m = M::zeros(r, c);
        m[(i, j)] = g(1);
        m
    }

    fn random_int_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> M {
        M::from_fn(rows, cols, |_, _| g(rng.gen_range(-2..=2)))
    }

    fn random_invertible(rng: &mut ChaCha8Rng, n: usize) -> M {
        loop {
            let m = random_int_matrix(rng, n, n);
            if m.is_invertible() {
                return m;
            }
        }
    }

    /// Grid of blocks e_{ji}: the flat matrix is the swap permutation.
    fn swap_layout(d: usize) -> B {
        B::from_fn(d, d, d, d, |i, j| unit(d, d, j, i)).unwrap()
    }

    /// Product grid: block (i, j) = outer[i,j] * inner.
    fn product_block(outer: &M, inner: &M) -> B {
        B::from_fn(
            outer.rows(),
            outer.cols(),
            inner.rows(),
            inner.cols(),
            |i, j| inner.scale(&outer[(i, j)]),
        )
        .unwrap()
    }

    #[test]
    fn flatten_single_block_is_identity_embedding() {
        let a = random_int_matrix(&mut ChaCha8Rng::seed_from_u64(3), 2, 3);
        let b = B::from_blocks(1, 1, 2, 3, vec![a.clone()]).unwrap();
        assert_eq!(b.flatten(), a);
    }

    #[test]
    fn flatten_kronecker_delta_grid_gives_identity() {
        let b = B::from_fn(2, 2, 2, 2, |i, j| {
            if i == j {
                M::identity(2)
            } else {
                M::zeros(2, 2)
            }
        })
        .unwrap();
        assert_eq!(b.flatten(), M::identity(4));
    }

    #[test]
    fn flatten_swap_layout_matches_index_formula() {
        let b = swap_layout(2);
        let flat = b.flatten();
        // entry (2i + a, 2j + b) of the swap permutation is 1 iff a = j, b = i
        let expect = M::from_fn(4, 4, |r, c| {
            let (i, a) = (r / 2, r % 2);
            let (j, bb) = (c / 2, c % 2);
            if a == j && bb == i {
                g(1)
            } else {
                g(0)
            }
        });
        assert_eq!(flat, expect);
        assert_eq!(flat.rank(), 4);
    }

    #[test]
    fn schmidt_rank_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let outer = random_int_matrix(&mut rng, 2, 3);
        let inner = random_int_matrix(&mut rng, 2, 2);
        let product = product_block(&outer, &inner);
        if !outer.is_zero() && !inner.is_zero() {
            assert_eq!(product.schmidt_rank(), 1);
        }

        // identity in block form: all nonzero blocks proportional
        let b = B::from_fn(3, 3, 3, 3, |i, j| {
            if i == j {
                M::identity(3)
            } else {
                M::zeros(3, 3)
            }
        })
        .unwrap();
        assert_eq!(b.schmidt_rank(), 1);

        assert_eq!(swap_layout(2).schmidt_rank(), 4);
        assert_eq!(B::zeros(2, 2, 2, 2).schmidt_rank(), 0);
    }

    #[test]
    fn inner_transpose_of_swap_layout_has_rank_one() {
        let pt = swap_layout(2).partial_transpose_inner();
        // blocks become e_{ij}: the flat matrix has a single independent row
        // pattern and rank 1
        assert_eq!(pt.flatten().rank(), 1);
        assert_eq!(pt.schmidt_rank(), 4);
    }

    #[test]
    fn partial_transposes_are_involutions_and_preserve_schmidt_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let b = B::from_fn(2, 3, 2, 2, |_, _| random_int_matrix(&mut rng, 2, 2)).unwrap();
            assert_eq!(b.partial_transpose_inner().partial_transpose_inner(), b);
            assert_eq!(b.partial_transpose_outer().partial_transpose_outer(), b);
            let sr = b.schmidt_rank();
            assert_eq!(b.partial_transpose_inner().schmidt_rank(), sr);
            assert_eq!(b.partial_transpose_outer().schmidt_rank(), sr);
            assert_eq!(
                BlockMatrix::unflatten(&b.flatten().transpose(), 3, 2, 2, 2)
                    .unwrap()
                    .schmidt_rank(),
                sr
            );
            assert!(sr <= 6.min(4));
        }
    }

    #[test]
    fn outer_transpose_flat_rank_cross_check() {
        // the outer transpose of B equals the inner transpose of the
        // full transpose of B, up to flattening
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..10 {
            let b = B::from_fn(2, 2, 2, 3, |_, _| random_int_matrix(&mut rng, 2, 3)).unwrap();
            let outer = b.partial_transpose_outer().flatten();
            let via_flat = BlockMatrix::unflatten(&b.flatten().transpose(), 2, 2, 3, 2)
                .unwrap()
                .partial_transpose_inner()
                .flatten();
            assert_eq!(outer.rank(), via_flat.rank());
            assert_eq!(outer, via_flat);
        }
    }

    #[test]
    fn symmetric_outer_grid_is_fixed_by_outer_transpose() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = random_int_matrix(&mut rng, 2, 2);
        let y = random_int_matrix(&mut rng, 2, 2);
        let z = random_int_matrix(&mut rng, 2, 2);
        let b = B::from_blocks(2, 2, 2, 2, vec![x.clone(), y.clone(), y, z]).unwrap();
        assert_eq!(b.partial_transpose_outer(), b);
    }

    #[test]
    fn schmidt_decompose_product_and_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let outer = random_invertible(&mut rng, 2);
        let inner = random_int_matrix(&mut rng, 2, 2);
        let b = product_block(&outer, &inner);
        if !inner.is_zero() {
            let d = b.schmidt_decompose().unwrap();
            assert_eq!(d.len(), 1);
            assert_eq!(d.reconstruct(2, 2).unwrap(), b);
        }

        let id4 = BlockMatrix::unflatten(&M::identity(4), 2, 2, 2, 2).unwrap();
        let d = id4.schmidt_decompose().unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.outer_factors[0], M::identity(2));
        assert_eq!(d.inner_factors[0], M::identity(2));

        assert!(B::zeros(2, 2, 1, 1).schmidt_decompose().is_err());
    }

    #[test]
    fn schmidt_decompose_rank_three_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        // build sum of three products with independent factor families
        loop {
            let outers: Vec<M> = (0..3).map(|_| random_int_matrix(&mut rng, 2, 2)).collect();
            let inners: Vec<M> = (0..3).map(|_| random_int_matrix(&mut rng, 2, 2)).collect();
            let mut b = B::zeros(2, 2, 2, 2);
            for (o, s) in outers.iter().zip(&inners) {
                b = b.add(&product_block(o, s));
            }
            if b.schmidt_rank() != 3 {
                continue;
            }
            let d = b.schmidt_decompose().unwrap();
            assert_eq!(d.len(), 3);
            assert!(d.factors_independent());
            assert_eq!(d.reconstruct(2, 2).unwrap(), b);
            break;
        }
    }

    #[test]
    fn apply_local_identity_and_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let b = B::from_fn(2, 2, 2, 2, |_, _| random_int_matrix(&mut rng, 2, 2)).unwrap();
        let id = LocalTransform::identity(2, 2, 2, 2);
        assert_eq!(b.apply_local(&id).unwrap(), b);

        let mut perm = LocalTransform::identity(2, 2, 2, 2);
        perm.outer_left = M::from_rows(vec![vec![g(0), g(1)], vec![g(1), g(0)]]).unwrap();
        let swapped = b.apply_local(&perm).unwrap();
        assert_eq!(swapped.block(0, 0), b.block(1, 0));
        assert_eq!(swapped.block(1, 1), b.block(0, 1));
    }

    #[test]
    fn apply_local_rejects_singular_and_mismatched_factors() {
        let b = B::zeros(2, 2, 2, 2);
        let mut t = LocalTransform::identity(2, 2, 2, 2);
        t.inner_right = M::zeros(2, 2);
        assert!(matches!(b.apply_local(&t), Err(Error::NotInvertible(_))));
        let t = LocalTransform::identity(3, 2, 2, 2);
        assert!(matches!(b.apply_local(&t), Err(Error::Dimension(_))));
    }

    #[test]
    fn apply_local_preserves_all_rank_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(60);
        for _ in 0..12 {
            let b = B::from_fn(2, 3, 2, 2, |_, _| random_int_matrix(&mut rng, 2, 2)).unwrap();
            let t = LocalTransform {
                outer_left: random_invertible(&mut rng, 2),
                inner_left: random_invertible(&mut rng, 2),
                outer_right: random_invertible(&mut rng, 3),
                inner_right: random_invertible(&mut rng, 2),
            };
            let c = b.apply_local(&t).unwrap();
            assert_eq!(c.rank(), b.rank());
            assert_eq!(c.schmidt_rank(), b.schmidt_rank());
            assert_eq!(
                c.partial_transpose_inner().rank(),
                b.partial_transpose_inner().rank()
            );
            assert_eq!(
                c.partial_transpose_outer().rank(),
                b.partial_transpose_outer().rank()
            );
        }
    }

    #[test]
    fn apply_local_agrees_with_flat_kronecker_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(70);
        let b = B::from_fn(2, 2, 2, 2, |_, _| random_int_matrix(&mut rng, 2, 2)).unwrap();
        let t = LocalTransform {
            outer_left: random_invertible(&mut rng, 2),
            inner_left: random_invertible(&mut rng, 2),
            outer_right: random_invertible(&mut rng, 2),
            inner_right: random_invertible(&mut rng, 2),
        };
        let block_route = b.apply_local(&t).unwrap().flatten();
        let flat_route = t
            .outer_left
            .kron(&t.inner_left)
            .matmul(&b.flatten())
            .matmul(&t.outer_right.kron(&t.inner_right));
        assert_eq!(block_route, flat_route);
    }

    proptest! {
        #[test]
        fn prop_flatten_unflatten_round_trip(entries in proptest::collection::vec(-2i64..=2, 36)) {
            let flat = M::from_vec(6, 6, entries.into_iter().map(g).collect()).unwrap();
            let b = BlockMatrix::unflatten(&flat, 2, 3, 3, 2).unwrap();
            prop_assert_eq!(b.flatten(), flat);
        }

        #[test]
        fn prop_schmidt_rank_bounded_and_transpose_stable(entries in proptest::collection::vec(-1i64..=1, 24)) {
            let flat = M::from_vec(4, 6, entries.into_iter().map(g).collect()).unwrap();
            let b = BlockMatrix::unflatten(&flat, 2, 3, 2, 2).unwrap();
            let sr = b.schmidt_rank();
            prop_assert!(sr <= 6.min(4));
            prop_assert_eq!(b.partial_transpose_inner().schmidt_rank(), sr);
            prop_assert_eq!(b.partial_transpose_outer().schmidt_rank(), sr);
        }
    }
}

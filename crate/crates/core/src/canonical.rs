//! Canonical staircase form of a block matrix under local equivalence.
//!
//! Any nonzero block matrix is taken, by invertible grid-row operations,
//! grid-column operations and constant column mixing, to a staircase layout:
//! column `s` of the grid carries `k_s` designated blocks at its top, with
//! `k_1 >= k_2 >= ... >= k_p >= 1` and `sum k_s` equal to the Schmidt rank.
//! The designated blocks are jointly linearly independent, the blocks below
//! the first staircase column are zero, and every other block lies in the
//! span of the designated blocks of the columns at or left of its region.
//!
//! A second pass (`column_reduce`) right-multiplies by block-diagonal inner
//! factors so the designated blocks of column `s` contribute `r_s` fresh
//! independent flat columns in a fixed slab, with everything to the right of
//! the slabs exactly zero. Slicing the reduced matrix along those slabs
//! (`decompose`) splits it into a sum of parts whose rank and
//! partial-transpose rank obey an exact inequality chain culminating in the
//! bound `r(inner transpose) <= Sr * r` for the whole matrix.
//!
//! Every move is recorded as a certificate `(U (x) V, W (x) X)` that replays
//! the source matrix onto the output exactly.

use crate::block::{BlockMatrix, LocalTransform};
use crate::error::{Error, Result};
use crate::matrix::{span_coefficients, solve_columns, Matrix, SpanBasis};
use crate::scalar::Scalar;

/// Staircase shape data: `p` staircase columns with `k[s]` designated blocks
/// each, plus the flat-column slab widths `r[s]` once column reduction has
/// run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalProfile {
    pub p: usize,
    pub k: Vec<usize>,
    pub r: Option<Vec<usize>>,
}

/// Where a grid position sits relative to the staircase.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    /// One of the `k[col]` designated blocks of staircase column `col`.
    Designated(usize),
    /// Below the first staircase column: must be exactly zero.
    RequiredZero,
    /// Tail region `q` (0-based): must lie in the span of the designated
    /// blocks of columns `0..=q`.
    Tail(usize),
}

impl CanonicalProfile {
    pub fn schmidt_rank(&self) -> usize {
        self.k.iter().sum()
    }

    /// Classifies grid position `(row, col)`.
    ///
    /// Tail regions are hooks: the blocks of column `q+1` between staircase
    /// levels `k[q+1]` and `k[q]`, together with the full strip of rows
    /// between levels `k[q]` and `k[q-1]` to the right of column `q`. The
    /// last region also absorbs every column past the staircase.
    pub fn region(&self, row: usize, col: usize) -> Region {
        debug_assert!(self.p >= 1 && self.k.len() == self.p);
        if col < self.p && row < self.k[col] {
            return Region::Designated(col);
        }
        if col == 0 {
            return Region::RequiredZero;
        }
        // first staircase level at or below this row
        match (0..self.p).find(|&b| self.k[b] <= row) {
            None => Region::Tail(self.p - 1),
            Some(b) => {
                debug_assert!(col >= b, "positions left of the level are designated");
                if col == b {
                    Region::Tail(b - 1)
                } else {
                    Region::Tail(b)
                }
            }
        }
    }
}

/// A canonical form together with the local transform that witnesses the
/// equivalence: replaying the certificate on the source reproduces `matrix`
/// entrywise.
#[derive(Clone, Debug)]
pub struct CanonicalResult<T> {
    pub matrix: BlockMatrix<T>,
    pub profile: CanonicalProfile,
    pub certificate: LocalTransform<T>,
}

/// Outcome of a structural verification; carries the first violated
/// constraint when it fails.
#[derive(Clone, Debug)]
pub struct ShapeReport {
    pub pass: bool,
    pub violation: Option<String>,
}

impl ShapeReport {
    fn ok() -> Self {
        Self {
            pass: true,
            violation: None,
        }
    }

    fn fail(msg: String) -> Self {
        Self {
            pass: false,
            violation: Some(msg),
        }
    }
}

/// Split of a column-reduced canonical form into per-column parts plus their
/// tail sub-grids.
#[derive(Clone, Debug)]
pub struct Decomposition<T> {
    pub parts: Vec<BlockMatrix<T>>,
    pub tails: Vec<BlockMatrix<T>>,
}

/// One exact integer comparison in the verification chain.
#[derive(Clone, Debug)]
pub struct ChainCheck {
    pub name: String,
    pub lhs: u64,
    pub rhs: u64,
    /// True when `lhs <= rhs`.
    pub holds: bool,
}

impl ChainCheck {
    fn le(name: impl Into<String>, lhs: u64, rhs: u64) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            holds: lhs <= rhs,
        }
    }
}

/// Full report of the decomposition inequality chain.
#[derive(Clone, Debug)]
pub struct ChainReport {
    /// The parts sum back to the reduced matrix entrywise.
    pub sum_parts_exact: bool,
    pub checks: Vec<ChainCheck>,
    pub pass: bool,
}

/// Exact rank data for the partial-transpose rank bound
/// `r(transpose image) <= Sr * r`, for both the inner and outer transpose.
#[derive(Clone, Debug)]
pub struct TransposeRankReport {
    pub schmidt_rank: u64,
    pub rank: u64,
    pub inner_transpose_rank: u64,
    pub outer_transpose_rank: u64,
}

impl TransposeRankReport {
    pub fn inner_holds(&self) -> bool {
        self.inner_transpose_rank <= self.schmidt_rank * self.rank
    }

    pub fn outer_holds(&self) -> bool {
        self.outer_transpose_rank <= self.schmidt_rank * self.rank
    }

    pub fn holds(&self) -> bool {
        self.inner_holds() && self.outer_holds()
    }

    pub fn inner_slack(&self) -> u64 {
        self.schmidt_rank * self.rank - self.inner_transpose_rank
    }

    pub fn outer_slack(&self) -> u64 {
        self.schmidt_rank * self.rank - self.outer_transpose_rank
    }

    pub fn inner_saturated(&self) -> bool {
        self.inner_transpose_rank == self.schmidt_rank * self.rank
    }
}

/// Computes the four exact quantities of the partial-transpose rank bound.
/// A violation on any input is an implementation bug, not a property of the
/// input.
pub fn check_transpose_rank_bound<T: Scalar>(m: &BlockMatrix<T>) -> TransposeRankReport {
    TransposeRankReport {
        schmidt_rank: m.schmidt_rank() as u64,
        rank: m.rank() as u64,
        inner_transpose_rank: m.partial_transpose_inner().rank() as u64,
        outer_transpose_rank: m.partial_transpose_outer().rank() as u64,
    }
}

// ---------------------------------------------------------------------------
// construction
// ---------------------------------------------------------------------------

struct Canonicalizer<T> {
    work: BlockMatrix<T>,
    outer_left: Matrix<T>,
    outer_right: Matrix<T>,
    ks: Vec<usize>,
}

impl<T: Scalar> Canonicalizer<T> {
    fn new(m: &BlockMatrix<T>) -> Self {
        Self {
            work: m.clone(),
            outer_left: Matrix::identity(m.grid_rows()),
            outer_right: Matrix::identity(m.grid_cols()),
            ks: Vec::new(),
        }
    }

    fn swap_grid_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.work.grid_cols() {
            let x = self.work.block(a, j).clone();
            let y = self.work.block(b, j).clone();
            self.work.set_block(a, j, y);
            self.work.set_block(b, j, x);
        }
        self.outer_left.swap_rows(a, b);
    }

    fn swap_grid_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.work.grid_rows() {
            let x = self.work.block(i, a).clone();
            let y = self.work.block(i, b).clone();
            self.work.set_block(i, a, y);
            self.work.set_block(i, b, x);
        }
        self.outer_right.swap_cols(a, b);
    }

    /// Grid row operation `row[dst] += c * row[src]`.
    fn grid_row_axpy(&mut self, dst: usize, src: usize, c: &T) {
        for j in 0..self.work.grid_cols() {
            let b = self.work.block(dst, j).add(&self.work.block(src, j).scale(c));
            self.work.set_block(dst, j, b);
        }
        self.outer_left.row_axpy(dst, src, c);
    }

    /// Grid column operation `col[dst] += c * col[src]`.
    fn grid_col_axpy(&mut self, dst: usize, src: usize, c: &T) {
        for i in 0..self.work.grid_rows() {
            let b = self.work.block(i, dst).add(&self.work.block(i, src).scale(c));
            self.work.set_block(i, dst, b);
        }
        self.outer_right.col_axpy(dst, src, c);
    }

    /// Designated blocks of columns `0..upto`, column-major.
    fn designated_before(&self, upto: usize) -> Vec<Matrix<T>> {
        let mut out = Vec::new();
        for c in 0..upto {
            for i in 0..self.ks[c] {
                out.push(self.work.block(i, c).clone());
            }
        }
        out
    }

    fn basis_of(&self, mats: &[Matrix<T>]) -> SpanBasis<T> {
        let width = self.work.block_rows() * self.work.block_cols();
        let mut basis = SpanBasis::new(width);
        for m in mats {
            basis.insert(&m.vectorize());
        }
        basis
    }

    /// Moves a maximal independent family of column-`s` blocks to the top
    /// rows by grid row switches and returns its size.
    ///
    /// Only rows below `window` are scanned; every swap stays inside the
    /// window, which is contained in every earlier staircase column, so the
    /// earlier designated families are permuted within themselves.
    fn saturate_column(&mut self, s: usize, window: usize) -> usize {
        let mut t = 0;
        'grow: loop {
            let earlier = self.designated_before(s);
            let mut basis = self.basis_of(&earlier);
            for i in 0..t {
                basis.insert(&self.work.block(i, s).vectorize());
            }
            for i in t..window {
                if basis.insert(&self.work.block(i, s).vectorize()) {
                    self.swap_grid_rows(t, i);
                    t += 1;
                    continue 'grow;
                }
            }
            return t;
        }
    }

    /// Subtracts the designated column-`s` components from the blocks below
    /// the staircase level, leaving each of them in the span of the earlier
    /// designated blocks only (exactly zero for the first column).
    fn clean_below(&mut self, s: usize, t: usize, window: usize) -> Result<()> {
        for i in t..window {
            if self.work.block(i, s).is_zero() {
                continue;
            }
            let mut family = self.designated_before(s);
            let earlier_len = family.len();
            for u in 0..t {
                family.push(self.work.block(u, s).clone());
            }
            let target = self.work.block(i, s).clone();
            let coeffs = span_coefficients(&target, &family)?.ok_or_else(|| {
                Error::Internal(format!(
                    "block ({i},{s}) escaped the designated span during cleanup"
                ))
            })?;
            for u in 0..t {
                let c = coeffs[earlier_len + u].clone();
                if !c.is_zero() {
                    self.grid_row_axpy(i, u, &(T::zero() - c));
                }
            }
        }
        Ok(())
    }

    /// First block in the window, scanning row-major over columns right of
    /// `s`, that is independent of all designated blocks so far.
    fn find_witness(&self, s: usize, t: usize, window: usize) -> Option<(usize, usize)> {
        let mut family = self.designated_before(s);
        for u in 0..t {
            family.push(self.work.block(u, s).clone());
        }
        let basis = self.basis_of(&family);
        for i in t..window {
            for j in s + 1..self.work.grid_cols() {
                if !basis.contains(&self.work.block(i, j).vectorize()) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// Adds `constant * column j` to column `s`, probing small integer
    /// constants until the mixed column extends the designated family by at
    /// least one more block.
    ///
    /// The count of independent blocks in the mixed column, as a function of
    /// the constant, is governed by minors that are polynomials of degree at
    /// most `t + 1`; a witness block guarantees they are not all identically
    /// zero, so `t + 3` probes always contain a good constant.
    fn mix_columns(&mut self, s: usize, j: usize, t: usize, window: usize) -> Result<()> {
        let earlier = self.designated_before(s);
        let probes = t + 3;
        for raw in 1..=probes {
            let c = T::from_integer(raw as i64);
            let mut basis = self.basis_of(&earlier);
            let mut count = 0usize;
            for i in 0..window {
                let cand = self.work.block(i, s).add(&self.work.block(i, j).scale(&c));
                if basis.insert(&cand.vectorize()) {
                    count += 1;
                }
            }
            if count >= t + 1 {
                self.grid_col_axpy(s, j, &c);
                return Ok(());
            }
        }
        Err(Error::MixingConstantNotFound { probes })
    }

    /// Runs the saturate / clean / mix loop for staircase column `s` and
    /// returns its final designated count.
    fn process_column(&mut self, s: usize, window: usize) -> Result<usize> {
        let mut last_t: Option<usize> = None;
        // each round must strictly grow the designated family
        for _round in 0..=window + 1 {
            let t = self.saturate_column(s, window);
            if let Some(prev) = last_t {
                if t <= prev {
                    return Err(Error::Internal(format!(
                        "column {s}: mixing did not grow the designated family ({prev} -> {t})"
                    )));
                }
            }
            self.clean_below(s, t, window)?;
            match self.find_witness(s, t, window) {
                None => return Ok(t),
                Some((_, j)) => {
                    if t == 0 {
                        // nothing designated yet: bring the witness column in
                        self.swap_grid_cols(s, j);
                        last_t = None;
                    } else {
                        self.mix_columns(s, j, t, window)?;
                        last_t = Some(t);
                    }
                }
            }
        }
        Err(Error::Internal(format!(
            "column {s}: designated family failed to converge"
        )))
    }
}

/// Transforms a nonzero block matrix to canonical staircase form and returns
/// it with its profile and the replaying certificate.
pub fn to_canonical<T: Scalar>(m: &BlockMatrix<T>) -> Result<CanonicalResult<T>> {
    if m.is_zero() {
        return Err(Error::ZeroMatrix);
    }
    let total = m.schmidt_rank();
    let mut state = Canonicalizer::new(m);
    let mut done = 0usize;
    let mut s = 0usize;
    while done < total {
        if s >= m.grid_cols() {
            return Err(Error::Internal(
                "ran out of grid columns before exhausting the Schmidt rank".into(),
            ));
        }
        let window = if s == 0 {
            m.grid_rows()
        } else {
            state.ks[s - 1]
        };
        let k = state.process_column(s, window)?;
        if k == 0 {
            return Err(Error::Internal(format!(
                "column {s} contributed no designated blocks"
            )));
        }
        state.ks.push(k);
        done += k;
        s += 1;
    }
    if done != total {
        return Err(Error::Internal(
            "designated block count does not match the Schmidt rank".into(),
        ));
    }
    let profile = CanonicalProfile {
        p: s,
        k: state.ks.clone(),
        r: None,
    };
    Ok(CanonicalResult {
        matrix: state.work,
        profile,
        certificate: LocalTransform {
            outer_left: state.outer_left,
            inner_left: Matrix::identity(m.block_rows()),
            outer_right: state.outer_right,
            inner_right: Matrix::identity(m.block_cols()),
        },
    })
}

fn designated_family<T: Scalar>(
    n: &BlockMatrix<T>,
    k: &[usize],
    upto: usize,
) -> Vec<Matrix<T>> {
    let mut out = Vec::new();
    for c in 0..upto {
        for i in 0..k[c] {
            out.push(n.block(i, c).clone());
        }
    }
    out
}

/// Checks a block matrix against a staircase profile by direct elimination:
/// profile consistency, joint independence of the designated blocks, zeros
/// below the first staircase column, and span membership of every tail
/// block. Reports the first violated constraint.
pub fn verify_canonical_shape<T: Scalar>(
    n: &BlockMatrix<T>,
    profile: &CanonicalProfile,
) -> ShapeReport {
    let (m1, n1) = (n.grid_rows(), n.grid_cols());
    let p = profile.p;
    if p == 0 || p > n1 || profile.k.len() != p {
        return ShapeReport::fail(format!(
            "profile: p = {p} incompatible with {n1} grid columns"
        ));
    }
    for s in 0..p {
        if profile.k[s] == 0 || profile.k[s] > m1 {
            return ShapeReport::fail(format!("profile: k[{s}] = {} out of range", profile.k[s]));
        }
        if s > 0 && profile.k[s] > profile.k[s - 1] {
            return ShapeReport::fail(format!(
                "profile: column counts must not increase (k[{}] < k[{s}])",
                s - 1
            ));
        }
    }
    if let Some(r) = &profile.r {
        if r.len() != p {
            return ShapeReport::fail("profile: slab width list length differs from p".into());
        }
        if r.iter().sum::<usize>() > n.block_cols() {
            return ShapeReport::fail("profile: slab widths exceed the block width".into());
        }
    }
    if profile.schmidt_rank() != n.schmidt_rank() {
        return ShapeReport::fail(format!(
            "profile: designated count {} differs from Schmidt rank {}",
            profile.schmidt_rank(),
            n.schmidt_rank()
        ));
    }

    // (a) designated blocks jointly independent
    let mut basis = SpanBasis::new(n.block_rows() * n.block_cols());
    for c in 0..p {
        for i in 0..profile.k[c] {
            if !basis.insert(&n.block(i, c).vectorize()) {
                return ShapeReport::fail(format!(
                    "designated block ({i},{c}) is dependent on earlier designated blocks"
                ));
            }
        }
    }

    // (b) zeros below the first staircase column
    for i in profile.k[0]..m1 {
        if !n.block(i, 0).is_zero() {
            return ShapeReport::fail(format!("block ({i},0) below the staircase is nonzero"));
        }
    }

    // (c) every tail block spanned by the designated blocks of its region
    for i in 0..m1 {
        for j in 0..n1 {
            if let Region::Tail(q) = profile.region(i, j) {
                let family = designated_family(n, &profile.k, q + 1);
                match span_coefficients(n.block(i, j), &family) {
                    Ok(Some(_)) => {}
                    Ok(None) => {
                        return ShapeReport::fail(format!(
                            "tail block ({i},{j}) is outside the span of designated columns 0..={q}"
                        ))
                    }
                    Err(e) => return ShapeReport::fail(format!("tail check failed: {e}")),
                }
            }
        }
    }
    ShapeReport::ok()
}

/// Sum of slab widths `r[0..s]`.
fn slab_offset(r: &[usize], s: usize) -> usize {
    r[..s].iter().sum()
}

/// Right-multiplies a canonical form by inner column factors so that the
/// designated blocks of staircase column `s` occupy a fresh slab of `r_s`
/// independent flat columns, recording the widths in the profile and folding
/// the factors into the certificate.
///
/// The input must pass [`verify_canonical_shape`]. Span relations and
/// independence survive every factor because the factors are invertible and
/// act on the right.
pub fn column_reduce<T: Scalar>(res: &CanonicalResult<T>) -> Result<CanonicalResult<T>> {
    let shape = verify_canonical_shape(&res.matrix, &res.profile);
    if !shape.pass {
        return Err(Error::ShapeVerification(
            shape.violation.unwrap_or_default(),
        ));
    }
    let mut work = res.matrix.clone();
    let mut inner_right = res.certificate.inner_right.clone();
    let n2 = work.block_cols();
    let p = res.profile.p;
    let mut widths = Vec::with_capacity(p);
    let mut offset = 0usize;

    for s in 0..p {
        let remaining = n2 - offset;
        if remaining == 0 {
            // slabs already exhaust the block width; nothing further changes
            widths.push(0);
            continue;
        }
        let k_s = res.profile.k[s];
        let stack_parts: Vec<&Matrix<T>> = (0..k_s).map(|i| work.block(i, s)).collect();
        let stack = Matrix::vstack(&stack_parts)?;

        // greedy independent columns of the trailing part of the stack
        let mut sel: Vec<usize> = Vec::new();
        let mut rest: Vec<usize> = Vec::new();
        let mut basis = SpanBasis::new(stack.rows());
        for c in 0..remaining {
            if basis.insert(&stack.column(offset + c)) {
                sel.push(c);
            } else {
                rest.push(c);
            }
        }
        let r_s = sel.len();

        // invertible factor on the trailing columns: selected columns first,
        // then for each dependent column its defining combination, which
        // maps it to zero
        let mut factor = Matrix::zeros(remaining, remaining);
        for (u, &c) in sel.iter().enumerate() {
            factor[(c, u)] = T::one();
        }
        let sel_cols: Vec<Vec<T>> = sel.iter().map(|&c| stack.column(offset + c)).collect();
        for (v, &c) in rest.iter().enumerate() {
            let coeffs = solve_columns(&sel_cols, &stack.column(offset + c)).ok_or_else(|| {
                Error::Internal("dependent column escaped the selected span".into())
            })?;
            factor[(c, r_s + v)] = T::one();
            for (u, co) in coeffs.into_iter().enumerate() {
                factor[(sel[u], r_s + v)] = T::zero() - co;
            }
        }

        // embed as identity on the earlier slabs
        let full = Matrix::from_fn(n2, n2, |i, j| {
            if i < offset || j < offset {
                if i == j {
                    T::one()
                } else {
                    T::zero()
                }
            } else {
                factor[(i - offset, j - offset)].clone()
            }
        });
        debug_assert!(full.is_invertible());

        work = BlockMatrix::from_fn(
            work.grid_rows(),
            work.grid_cols(),
            work.block_rows(),
            n2,
            |i, j| work.block(i, j).matmul(&full),
        )?;
        inner_right = inner_right.matmul(&full);
        widths.push(r_s);
        offset += r_s;
    }

    Ok(CanonicalResult {
        matrix: work,
        profile: CanonicalProfile {
            p,
            k: res.profile.k.clone(),
            r: Some(widths),
        },
        certificate: LocalTransform {
            inner_right,
            ..res.certificate.clone()
        },
    })
}

/// Entrywise scan of the column-reduced zero pattern.
///
/// Every block may only be supported on the slabs of its region: a
/// designated block of column `s` on slabs `0..=s` with its own slab columns
/// jointly independent across the stacked designated family, a tail block of
/// region `q` on slabs `0..=q`, and the blocks below the first staircase
/// column must vanish entirely.
pub fn verify_reduced_pattern<T: Scalar>(res: &CanonicalResult<T>) -> ShapeReport {
    let widths = match &res.profile.r {
        Some(r) => r,
        None => return ShapeReport::fail("profile carries no slab widths; run column_reduce".into()),
    };
    let n = &res.matrix;
    let profile = &res.profile;
    for i in 0..n.grid_rows() {
        for j in 0..n.grid_cols() {
            let limit = match profile.region(i, j) {
                Region::Designated(c) => slab_offset(widths, c + 1),
                Region::RequiredZero => 0,
                Region::Tail(q) => slab_offset(widths, q + 1),
            };
            let block = n.block(i, j);
            for a in 0..block.rows() {
                for b in limit..block.cols() {
                    if !block[(a, b)].is_zero() {
                        return ShapeReport::fail(format!(
                            "block ({i},{j}) entry ({a},{b}) outside its slab is nonzero"
                        ));
                    }
                }
            }
        }
    }
    // each slab must contribute exactly r_s independent columns from the
    // stacked designated blocks of its staircase column
    for s in 0..profile.p {
        let parts: Vec<&Matrix<T>> = (0..profile.k[s]).map(|i| n.block(i, s)).collect();
        let stack = match Matrix::vstack(&parts) {
            Ok(st) => st,
            Err(e) => return ShapeReport::fail(format!("stack failure: {e}")),
        };
        let off = slab_offset(widths, s);
        let mut basis = SpanBasis::new(stack.rows());
        for c in off..off + widths[s] {
            if !basis.insert(&stack.column(c)) {
                return ShapeReport::fail(format!(
                    "slab column {c} of staircase column {s} is dependent"
                ));
            }
        }
    }
    ShapeReport::ok()
}

/// Splits a column-reduced canonical form into per-column parts: part `s`
/// keeps exactly the slab columns of staircase column `s` in every block and
/// zeroes the rest. The parts sum to the reduced matrix because everything
/// right of the slabs is zero. Also extracts each part's tail sub-grid.
pub fn decompose<T: Scalar>(res: &CanonicalResult<T>) -> Result<Decomposition<T>> {
    let widths = res
        .profile
        .r
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("decompose requires a column-reduced input".into()))?;
    let n = &res.matrix;
    let (m1, n1) = (n.grid_rows(), n.grid_cols());
    let p = res.profile.p;
    let mut parts = Vec::with_capacity(p);
    let mut tails = Vec::with_capacity(p);
    for s in 0..p {
        let off = slab_offset(widths, s);
        let end = off + widths[s];
        let part = BlockMatrix::from_fn(m1, n1, n.block_rows(), n.block_cols(), |i, j| {
            n.block(i, j).map_columns_outside_range_to_zero(off..end)
        })?;
        // tail: rows between this staircase level and the previous one,
        // columns right of the staircase column
        let row_top = if s == 0 { m1 } else { res.profile.k[s - 1] };
        let tail = part.sub_grid(res.profile.k[s]..row_top, s + 1..n1);
        parts.push(part);
        tails.push(tail);
    }
    Ok(Decomposition { parts, tails })
}

impl<T: Scalar> Matrix<T> {
    /// Copy with every column outside `keep` forced to zero.
    fn map_columns_outside_range_to_zero(&self, keep: std::ops::Range<usize>) -> Self {
        Matrix::from_fn(self.rows(), self.cols(), |i, j| {
            if keep.contains(&j) {
                self[(i, j)].clone()
            } else {
                T::zero()
            }
        })
    }
}

/// Verifies the exact inequality chain satisfied by a column-reduced
/// canonical form and its decomposition.
///
/// Per part `s` with slab width `r_s`, designated count `k_s`, and tail
/// `w_s`:
///   - `r_s + r(w_s) <= r(part_s)` and `r(part_s) <= r(N)`;
///   - `Sr(w_s) <= k_s`, strictly below the total Schmidt rank whenever
///     every staircase column is (the single-column case is covered by the
///     full block-column argument instead, where the bound may be met);
///   - `r(part_s^T_in) <= k_s * r_s + r(w_s^T_in)` and
///     `r(w_s^T_in) <= Sr(w_s) * r(w_s)`, combining into
///     `r(part_s^T_in) <= k_s * r(part_s)`;
/// and globally `r(N^T_in) <= sum_s r(part_s^T_in) <= Sr(N) * r(N)`.
/// Any failure signals an implementation bug.
pub fn verify_decomposition_chain<T: Scalar>(
    res: &CanonicalResult<T>,
    d: &Decomposition<T>,
) -> Result<ChainReport> {
    let widths = res
        .profile
        .r
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("chain requires a column-reduced input".into()))?;
    let p = res.profile.p;
    if d.parts.len() != p || d.tails.len() != p {
        return Err(Error::InvalidArgument(
            "decomposition does not match the profile".into(),
        ));
    }
    let n = &res.matrix;
    let total_sr = res.profile.schmidt_rank() as u64;
    let n_rank = n.rank() as u64;
    let n_pt_rank = n.partial_transpose_inner().rank() as u64;

    // parts must sum back exactly
    let mut sum = BlockMatrix::zeros(
        n.grid_rows(),
        n.grid_cols(),
        n.block_rows(),
        n.block_cols(),
    );
    for part in &d.parts {
        sum = sum.add(part);
    }
    let sum_parts_exact = &sum == n;

    let mut checks = Vec::new();
    let mut pt_rank_sum = 0u64;
    for s in 0..p {
        let part = &d.parts[s];
        let tail = &d.tails[s];
        let k_s = res.profile.k[s] as u64;
        let r_s = widths[s] as u64;
        let part_rank = part.rank() as u64;
        let part_pt_rank = part.partial_transpose_inner().rank() as u64;
        let tail_rank = tail.rank() as u64;
        let tail_pt_rank = tail.partial_transpose_inner().rank() as u64;
        let tail_sr = tail.schmidt_rank() as u64;
        pt_rank_sum += part_pt_rank;

        checks.push(ChainCheck::le(
            format!("slab_plus_tail_rank_le_part_rank[{s}]"),
            r_s + tail_rank,
            part_rank,
        ));
        checks.push(ChainCheck::le(
            format!("part_rank_le_total_rank[{s}]"),
            part_rank,
            n_rank,
        ));
        checks.push(ChainCheck::le(
            format!("tail_schmidt_le_column_count[{s}]"),
            tail_sr,
            k_s,
        ));
        if (res.profile.k[0] as u64) < total_sr {
            // with at least two staircase columns every k_s is strictly
            // below the total, and so is every tail Schmidt rank
            checks.push(ChainCheck::le(
                format!("tail_schmidt_strictly_below_total[{s}]"),
                tail_sr + 1,
                total_sr,
            ));
        }
        checks.push(ChainCheck::le(
            format!("part_pt_rank_le_slab_bound[{s}]"),
            part_pt_rank,
            k_s * r_s + tail_pt_rank,
        ));
        checks.push(ChainCheck::le(
            format!("tail_pt_rank_le_schmidt_times_rank[{s}]"),
            tail_pt_rank,
            tail_sr * tail_rank,
        ));
        checks.push(ChainCheck::le(
            format!("part_pt_rank_le_count_times_rank[{s}]"),
            part_pt_rank,
            k_s * part_rank,
        ));
    }
    checks.push(ChainCheck::le(
        "total_pt_rank_le_sum_of_parts".to_string(),
        n_pt_rank,
        pt_rank_sum,
    ));
    checks.push(ChainCheck::le(
        "total_pt_rank_le_schmidt_times_rank".to_string(),
        n_pt_rank,
        total_sr * n_rank,
    ));

    let pass = sum_parts_exact && checks.iter().all(|c| c.holds);
    Ok(ChainReport {
        sum_parts_exact,
        checks,
        pass,
    })
}

/// One-line-per-stage outcome of the full pipeline on a single input, as run
/// by the fuzz driver: canonicalize, verify shape, replay the certificate,
/// compare invariants, column-reduce, verify the zero pattern, decompose,
/// verify the chain, and check the transpose rank bound.
#[derive(Clone, Debug)]
pub struct PipelineReport {
    pub profile: CanonicalProfile,
    pub failures: Vec<String>,
}

impl PipelineReport {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Runs every stage of the canonicalization pipeline on one matrix and
/// collects named failures instead of stopping at the first.
pub fn run_pipeline_checks<T: Scalar>(m: &BlockMatrix<T>) -> Result<PipelineReport> {
    let mut failures = Vec::new();
    let canon = to_canonical(m)?;

    let shape = verify_canonical_shape(&canon.matrix, &canon.profile);
    if !shape.pass {
        failures.push(format!("shape: {}", shape.violation.unwrap_or_default()));
    }
    match m.apply_local(&canon.certificate) {
        Ok(replayed) => {
            if replayed != canon.matrix {
                failures.push("certificate: replay does not reproduce the canonical form".into());
            }
        }
        Err(e) => failures.push(format!("certificate: {e}")),
    }
    let before = check_transpose_rank_bound(m);
    let after = check_transpose_rank_bound(&canon.matrix);
    if before.rank != after.rank
        || before.schmidt_rank != after.schmidt_rank
        || before.inner_transpose_rank != after.inner_transpose_rank
        || before.outer_transpose_rank != after.outer_transpose_rank
    {
        failures.push("equivalence: rank data changed under the local transform".into());
    }
    if !before.holds() {
        failures.push(format!(
            "bound: transpose rank {} exceeds {} * {}",
            before.inner_transpose_rank, before.schmidt_rank, before.rank
        ));
    }

    let reduced = column_reduce(&canon)?;
    let pattern = verify_reduced_pattern(&reduced);
    if !pattern.pass {
        failures.push(format!(
            "reduced pattern: {}",
            pattern.violation.unwrap_or_default()
        ));
    }
    let shape_after = verify_canonical_shape(&reduced.matrix, &reduced.profile);
    if !shape_after.pass {
        failures.push(format!(
            "shape after reduction: {}",
            shape_after.violation.unwrap_or_default()
        ));
    }
    match m.apply_local(&reduced.certificate) {
        Ok(replayed) => {
            if replayed != reduced.matrix {
                failures.push("certificate: replay does not reproduce the reduced form".into());
            }
        }
        Err(e) => failures.push(format!("certificate after reduction: {e}")),
    }

    let decomposition = decompose(&reduced)?;
    let chain = verify_decomposition_chain(&reduced, &decomposition)?;
    if !chain.pass {
        let first = chain
            .checks
            .iter()
            .find(|c| !c.holds)
            .map(|c| format!("{} ({} > {})", c.name, c.lhs, c.rhs))
            .unwrap_or_else(|| "parts do not sum to the reduced form".into());
        failures.push(format!("chain: {first}"));
    }

    Ok(PipelineReport {
        profile: reduced.profile,
        failures,
    })
}

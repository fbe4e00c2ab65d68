//! Multipartite density operators over exact scalars.
//!
//! States are Hermitian positive semidefinite matrices with labeled
//! subsystem dimensions in the row-major Kronecker convention. They are not
//! trace-normalized: every quantity computed from them is a rank, which is
//! invariant under positive rescaling, and normalizing would push some
//! constructions out of the rational field.
//!
//! Positivity is decided exactly: a Hermitian matrix is positive
//! semidefinite iff the coefficients of its characteristic polynomial
//! alternate in sign, i.e. `det(xI - A) = x^n - e1 x^(n-1) + e2 x^(n-2) - ...`
//! with every `e_k >= 0`.

use crate::block::BlockMatrix;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{GaussianRational, Scalar};
use num::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type ExactMatrix = Matrix<GaussianRational>;

const GENERATOR_ATTEMPTS: usize = 64;

/// Hermitian PSD operator on an ordered list of subsystems.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    matrix: ExactMatrix,
    labels: Option<Vec<String>>,
}

/// Outcome of the exact validity checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub hermitian: bool,
    pub positive_semidefinite: bool,
    pub positive_trace: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.hermitian && self.positive_semidefinite && self.positive_trace
    }
}

/// The seven reduced ranks of a four-party pure state, in the order
/// `(r_A, r_B, r_C, r_D, r_AB, r_AC, r_AD)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ZeroEntropyVector {
    pub ranks: [usize; 7],
}

impl std::fmt::Display for ZeroEntropyVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.ranks.iter().map(usize::to_string).collect();
        write!(f, "({})", parts.join(", "))
    }
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for t in (0..dims.len().saturating_sub(1)).rev() {
        s[t] = s[t + 1] * dims[t + 1];
    }
    s
}

fn to_tuple(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let s = strides(dims);
    dims.iter()
        .enumerate()
        .map(|(t, _)| {
            let q = idx / s[t];
            idx %= s[t];
            q
        })
        .collect()
}

fn from_tuple(tuple: &[usize], dims: &[usize]) -> usize {
    let s = strides(dims);
    tuple.iter().zip(&s).map(|(x, st)| x * st).sum()
}

impl DensityMatrix {
    /// Wraps a matrix with subsystem dimensions; the matrix must be square
    /// of size `prod(dims)`. Hermiticity and positivity are checked by
    /// [`validate`](Self::validate), not here.
    pub fn new(dims: Vec<usize>, matrix: ExactMatrix) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(Error::Dimension(
                "subsystem dimensions must be positive".into(),
            ));
        }
        let total: usize = dims.iter().product();
        if matrix.rows() != total || matrix.cols() != total {
            return Err(Error::Dimension(format!(
                "matrix is {}x{} but the subsystems multiply to {total}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(Self {
            dims,
            matrix,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.dims.len() {
            return Err(Error::Dimension(
                "one label per subsystem is required".into(),
            ));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Projector onto an unnormalized pure state with the given amplitudes.
    pub fn pure_projector(dims: Vec<usize>, amplitudes: Vec<GaussianRational>) -> Result<Self> {
        let total: usize = dims.iter().product();
        if amplitudes.len() != total {
            return Err(Error::Dimension(format!(
                "{} amplitudes for total dimension {total}",
                amplitudes.len()
            )));
        }
        let matrix = Matrix::from_fn(total, total, |i, j| &amplitudes[i] * &amplitudes[j].conj());
        Self::new(dims, matrix)
    }

    /// The unnormalized maximally mixed state (the identity matrix).
    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let total: usize = dims.iter().product();
        Self::new(dims, Matrix::identity(total))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn subsystem_count(&self) -> usize {
        self.dims.len()
    }

    pub fn matrix(&self) -> &ExactMatrix {
        &self.matrix
    }

    pub fn total_dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Subsystem label: explicit if set, otherwise `A`, `B`, `C`, ...
    pub fn label(&self, i: usize) -> String {
        if let Some(labels) = &self.labels {
            return labels[i].clone();
        }
        if i < 26 {
            ((b'A' + i as u8) as char).to_string()
        } else {
            format!("S{i}")
        }
    }

    pub fn trace(&self) -> GaussianRational {
        self.matrix.trace()
    }

    pub fn rank(&self) -> usize {
        self.matrix.rank()
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        Self {
            dims: self.dims.clone(),
            matrix: self.matrix.scale(c),
            labels: self.labels.clone(),
        }
    }

    /// Exact Hermiticity, positivity, and trace checks.
    pub fn validate(&self) -> ValidationReport {
        let hermitian = self.matrix == self.matrix.conj_transpose();
        let positive_semidefinite = hermitian && self.psd_by_charpoly();
        let trace = self.trace();
        ValidationReport {
            hermitian,
            positive_semidefinite,
            positive_trace: trace.is_real_positive(),
        }
    }

    /// Sign-alternation test on the exact characteristic polynomial: with
    /// coefficients `[1, c1, ..., cn]`, all eigenvalues of a Hermitian
    /// matrix are nonnegative iff `(-1)^k c_k >= 0` for every `k`.
    fn psd_by_charpoly(&self) -> bool {
        let coeffs = match self.matrix.charpoly(true) {
            Ok(c) => c,
            Err(_) => return false,
        };
        coeffs.iter().enumerate().all(|(k, c)| {
            let e_k = if k % 2 == 0 { c.clone() } else { -c };
            e_k.is_real_nonnegative()
        })
    }

    fn check_keep(&self, keep: &[usize]) -> Result<Vec<usize>> {
        if keep.is_empty() {
            return Err(Error::InvalidArgument("keep set must be nonempty".into()));
        }
        let mut sorted = keep.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != keep.len() {
            return Err(Error::InvalidArgument("keep set has duplicates".into()));
        }
        if sorted.iter().any(|&t| t >= self.dims.len()) {
            return Err(Error::InvalidArgument("keep index out of range".into()));
        }
        Ok(sorted)
    }

    /// Partial trace onto the given subsystems (original order kept).
    /// Preserves the trace exactly and maps PSD to PSD.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let keep = self.check_keep(keep)?;
        let traced: Vec<usize> = (0..self.dims.len())
            .filter(|t| !keep.contains(t))
            .collect();
        let keep_dims: Vec<usize> = keep.iter().map(|&t| self.dims[t]).collect();
        let traced_dims: Vec<usize> = traced.iter().map(|&t| self.dims[t]).collect();
        let d_keep: usize = keep_dims.iter().product();
        let d_traced: usize = traced_dims.iter().product();

        let assemble = |kept_tuple: &[usize], traced_tuple: &[usize]| -> usize {
            let mut full = vec![0usize; self.dims.len()];
            for (pos, &t) in keep.iter().enumerate() {
                full[t] = kept_tuple[pos];
            }
            for (pos, &t) in traced.iter().enumerate() {
                full[t] = traced_tuple[pos];
            }
            from_tuple(&full, &self.dims)
        };

        let out = Matrix::from_fn(d_keep, d_keep, |a, b| {
            let ta = to_tuple(a, &keep_dims);
            let tb = to_tuple(b, &keep_dims);
            let mut acc = GaussianRational::zero();
            for e in 0..d_traced {
                let te = to_tuple(e, &traced_dims);
                let row = assemble(&ta, &te);
                let col = assemble(&tb, &te);
                acc = acc + self.matrix[(row, col)].clone();
            }
            acc
        });
        DensityMatrix::new(keep_dims, out)
    }

    /// Exact rank of the reduced operator on `keep`.
    pub fn reduced_rank(&self, keep: &[usize]) -> Result<usize> {
        Ok(self.partial_trace(keep)?.rank())
    }

    /// Partial transpose over the given subsystems. The result has the same
    /// dimensions; it need not be positive.
    pub fn partial_transpose(&self, subsystems: &[usize]) -> Result<DensityMatrix> {
        let subs = self.check_keep(subsystems)?;
        let total = self.total_dim();
        let out = Matrix::from_fn(total, total, |r, c| {
            let mut tr = to_tuple(r, &self.dims);
            let mut tc = to_tuple(c, &self.dims);
            for &t in &subs {
                std::mem::swap(&mut tr[t], &mut tc[t]);
            }
            self.matrix[(from_tuple(&tr, &self.dims), from_tuple(&tc, &self.dims))].clone()
        });
        DensityMatrix::new(self.dims.clone(), out)
    }

    /// The seven reduced ranks of a rank-one four-party state.
    pub fn zero_entropy_vector(&self) -> Result<ZeroEntropyVector> {
        if self.subsystem_count() != 4 {
            return Err(Error::InvalidArgument(format!(
                "zero-entropy vector requires 4 subsystems, got {}",
                self.subsystem_count()
            )));
        }
        if self.rank() != 1 {
            return Err(Error::InvalidState(
                "zero-entropy vector requires a rank-one (pure) state".into(),
            ));
        }
        let subsets: [&[usize]; 7] = [&[0], &[1], &[2], &[3], &[0, 1], &[0, 2], &[0, 3]];
        let mut ranks = [0usize; 7];
        for (slot, subset) in ranks.iter_mut().zip(subsets) {
            *slot = self.reduced_rank(subset)?;
        }
        Ok(ZeroEntropyVector { ranks })
    }

    /// Tensor product of factor states placed on the listed subsystem
    /// positions, which must partition `0..dims.len()`.
    pub fn tensor_assemble(
        dims: Vec<usize>,
        factors: &[(Vec<usize>, &DensityMatrix)],
    ) -> Result<DensityMatrix> {
        let n = dims.len();
        let mut seen = vec![false; n];
        for (positions, state) in factors {
            if positions.len() != state.subsystem_count() {
                return Err(Error::Dimension(
                    "factor position list does not match its subsystem count".into(),
                ));
            }
            for (pos, &t) in positions.iter().enumerate() {
                if t >= n || seen[t] {
                    return Err(Error::InvalidArgument(
                        "factor positions must partition the subsystems".into(),
                    ));
                }
                if state.dims[pos] != dims[t] {
                    return Err(Error::Dimension(format!(
                        "factor dimension {} does not match subsystem {t} of dimension {}",
                        state.dims[pos], dims[t]
                    )));
                }
                seen[t] = true;
            }
        }
        if seen.iter().any(|&s| !s) {
            return Err(Error::InvalidArgument(
                "factor positions must cover every subsystem".into(),
            ));
        }
        let total: usize = dims.iter().product();
        let out = Matrix::from_fn(total, total, |r, c| {
            let tr = to_tuple(r, &dims);
            let tc = to_tuple(c, &dims);
            let mut acc = GaussianRational::from_integers(1, 0);
            for (positions, state) in factors {
                let sub_row: Vec<usize> = positions.iter().map(|&t| tr[t]).collect();
                let sub_col: Vec<usize> = positions.iter().map(|&t| tc[t]).collect();
                let entry = &state.matrix[(
                    from_tuple(&sub_row, &state.dims),
                    from_tuple(&sub_col, &state.dims),
                )];
                acc = &acc * entry;
            }
            acc
        });
        DensityMatrix::new(dims, out)
    }
}

fn random_gaussian_integer(rng: &mut ChaCha8Rng) -> GaussianRational {
    GaussianRational::from_integers(rng.gen_range(-2..=2), rng.gen_range(-2..=2))
}

/// Seeded random state of exact rank `rank`, built as `G G*` from a
/// `D x rank` matrix with small Gaussian-integer entries. Deterministic per
/// seed; retries a bounded number of times until the rank is exact.
pub fn random_density(dims: &[usize], rank: usize, seed: u64) -> Result<DensityMatrix> {
    let total: usize = dims.iter().product();
    if dims.is_empty() || dims.iter().any(|&d| d == 0) {
        return Err(Error::Dimension(
            "subsystem dimensions must be positive".into(),
        ));
    }
    if rank == 0 || rank > total {
        return Err(Error::InvalidArgument(format!(
            "rank {rank} out of range 1..={total}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..GENERATOR_ATTEMPTS {
        let g = Matrix::from_fn(total, rank, |_, _| random_gaussian_integer(&mut rng));
        let rho = g.matmul(&g.conj_transpose());
        if rho.rank() == rank {
            return DensityMatrix::new(dims.to_vec(), rho);
        }
    }
    Err(Error::RetriesExhausted(GENERATOR_ATTEMPTS))
}

/// Seeded random block matrix of exact Schmidt rank `schmidt_rank`, built as
/// a sum of `schmidt_rank` grid-by-block products with small
/// Gaussian-integer entries. Deterministic per seed.
pub fn random_block_matrix(
    m1: usize,
    n1: usize,
    m2: usize,
    n2: usize,
    schmidt_rank: usize,
    seed: u64,
) -> Result<BlockMatrix<GaussianRational>> {
    let bound = (m1 * n1).min(m2 * n2);
    if schmidt_rank == 0 || schmidt_rank > bound {
        return Err(Error::InvalidArgument(format!(
            "Schmidt rank {schmidt_rank} out of range 1..={bound}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..GENERATOR_ATTEMPTS {
        let mut sum = BlockMatrix::zeros(m1, n1, m2, n2);
        for _ in 0..schmidt_rank {
            let outer = Matrix::from_fn(m1, n1, |_, _| random_gaussian_integer(&mut rng));
            let inner = Matrix::from_fn(m2, n2, |_, _| random_gaussian_integer(&mut rng));
            let product = BlockMatrix::from_fn(m1, n1, m2, n2, |i, j| inner.scale(&outer[(i, j)]))?;
            sum = sum.add(&product);
        }
        if sum.schmidt_rank() == schmidt_rank {
            return Ok(sum);
        }
    }
    Err(Error::RetriesExhausted(GENERATOR_ATTEMPTS))
}

//! Exact-arithmetic algebra for bipartite block matrices and multipartite
//! density operators.
//!
//! The crate computes, with no floating point anywhere on the production
//! path:
//!
//! - exact ranks, linear independence, and span membership over the Gaussian
//!   rationals ([`matrix`], [`scalar`]);
//! - Schmidt ranks, partial transposes, and local-equivalence transforms of
//!   block matrices ([`block`]);
//! - a canonical staircase form under local equivalence, with a replayable
//!   certificate, a column-reduced variant, and the exact inequality chain
//!   that bounds the partial-transpose rank by the Schmidt rank times the
//!   rank ([`canonical`]);
//! - validation, partial traces, and reduced ranks of exact density
//!   matrices, plus seeded random generators for fuzzing ([`states`]);
//! - rank-product inequality suites, saturation analysis, and the
//!   necessary-condition check for the marginal problem ([`inequalities`]).
//!
//! The matrix kernel is generic over the scalar type through the
//! [`scalar::Scalar`] trait; the concrete aliases below fix the exact
//! complex-rational instantiation used everywhere else.

pub mod block;
pub mod canonical;
pub mod error;
pub mod inequalities;
pub mod matrix;
pub mod scalar;
pub mod states;

pub use block::{BlockMatrix, LocalTransform, SchmidtDecomposition};
pub use canonical::{
    check_transpose_rank_bound, column_reduce, decompose, run_pipeline_checks, to_canonical,
    verify_canonical_shape, verify_decomposition_chain, verify_reduced_pattern, CanonicalProfile,
    CanonicalResult, ChainCheck, ChainReport, Decomposition, PipelineReport, Region, ShapeReport,
    TransposeRankReport,
};
pub use error::{Error, Result};
pub use inequalities::{
    check_multipartite_suite, check_rank_inequality, check_saturation, check_tripartite_suite,
    marginal_necessary_check, render_inequality, InequalityReport, MarginalReport,
    SaturationClass, SaturationReport,
};
pub use matrix::{find_mixing_constant, independent_subset, span_coefficients, Matrix, SpanBasis};
pub use scalar::{GaussianRational, Scalar};
pub use states::{
    random_block_matrix, random_density, DensityMatrix, ValidationReport, ZeroEntropyVector,
};

/// Arbitrary-precision rational, re-exported for constructing exact scalars.
pub type Rational = num::BigRational;

/// Dense matrix over the exact complex-rational scalar.
pub type ExactMatrix = Matrix<GaussianRational>;

/// Block matrix over the exact complex-rational scalar.
pub type ExactBlockMatrix = BlockMatrix<GaussianRational>;

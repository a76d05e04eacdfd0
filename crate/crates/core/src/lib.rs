//! Scaling unitary matrices to unit line sums with diagonal phase matrices.
//!
//! The central object is an alternating normalization: given a unitary `A`,
//! multiply on the left by `diag(1/phi(row sums))` and then on the right by
//! `diag(1/phi(column sums))`, where `phi` takes a complex number to its
//! phase. Iterating drives all `2n` line sums towards 1, i.e. drives `A`
//! into the subgroup `XU(n)`, and the potential `n^2 - |matrix sum|^2`
//! decreases monotonically along the way.
//!
//! On top of the iteration ([`scale`]) the crate provides Haar-random
//! sampling ([`sample_unitary`]), the gradient of the potential over the
//! diagonal-phase torus ([`gradient`]), ZXZ and XZXZXZ factorizations
//! ([`zxz_decompose`], [`xzxzxz_decompose`]), closed-form results for 2x2
//! matrices ([`u2`]), ensemble experiment drivers ([`experiment`]) and the
//! file formats used by the command-line tools ([`io`]).

pub mod error;
pub mod experiment;
pub mod haar;
pub mod io;
pub mod landscape;
pub mod matrix;
pub mod scale;
pub mod u2;
pub mod zxz;

pub use error::Error;
pub use experiment::{
    bare_iteration_config, correlation_pairs, correlation_to_csv, histogram_to_csv,
    psi_at_checkpoints, table_stats, table_to_csv, CorrelationPair, PsiCheckpoints, TableStats,
};
pub use haar::{sample_unitary, RngStream};
pub use landscape::{
    classify_stationary, finite_difference_gradient, gradcheck, gradient, GradCheckReport,
    LandscapeGradient, StationaryClass,
};
pub use matrix::{
    apply_diagonals, line_sums, matrix_product, max_entry_distance, phi, potential,
    unitarity_residual, wrap_angle, DiagonalPhase, LineSums, UnitaryMatrix,
};
pub use scale::{
    detect_constant_argument_start, escape_saddle, line_sum_residual, prestart_perturbation,
    scale, sinkhorn_step, EventKind, ScaleConfig, ScaleResult, ScaleStatus, ScaleTrace,
    TraceEvent, TraceRecord,
};
pub use u2::{
    analytic_zxz, convergence_ratio, from_params, params, predict_attractor, Attractor,
    U2Branch, U2Params,
};
pub use zxz::{
    cyclic_shift, membership, negator, phasor, xzxzxz_decompose, xzxzxz_from_zxz,
    zxz_decompose, Membership, XzxzxzDecomposition, ZxzDecomposition,
};

//! Two-sided l^p operator-norm bounds for nonnegative upper-triangular Toeplitz
//! operators, with numerical checks of the discrete and integral q-Hardy inequalities.
//!
//! * [`numeric`]: exponents, sequences, l^p norms, compensated sums.
//! * [`qcalc`]: q-brackets, Jackson integrals, the weighted q-Hardy integral inequality.
//! * [`operators`]: Toeplitz kernels, the q-Hardy and Cesàro operators, finite sections.
//! * [`certify`]: Schur-test upper bounds, witness lower bounds, norm certificates.
//! * [`cli`]: the `lpopnorm` command-line front end.

pub mod certify;
pub mod cli;
pub mod error;
pub mod numeric;
pub mod operators;
pub mod par;
pub mod qcalc;

pub use certify::{
    certify_norm, indicator_witness, power_iteration_lower_bound, schur_bound, search_indicator_witness,
    toeplitz_schur_bound, verify_discrete_inequality, NormCertificate, SchurWeights,
};
pub use error::{Error, Result};
pub use numeric::{compensated_sum, conjugate_exponent, lp_norm, Exponent, QParam, ToleranceConfig, TruncatedSequence};
pub use operators::{
    apply_cesaro, apply_qhardy_direct, apply_toeplitz, materialize, q_hardy_kernel, ToeplitzKernel, TruncatedMatrix,
};
pub use qcalc::{jackson_integral, q_bracket, reduce_theorem1_to_discrete, theorem1_sides, GridFunction, HardyParams};

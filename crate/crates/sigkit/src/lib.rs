//! Significativity indices for agreement values between two classifiers.
//!
//! An agreement measure (Cohen's kappa, information agreement, or anything
//! implementing [`AgreementMeasure`]) scores how consistently two classifiers
//! label the same items. This crate answers the follow-up question: how
//! significant is a given agreement value `c`? It computes the probability
//! that a matrix drawn uniformly at random scores strictly below `c`, over
//! two reference populations:
//!
//! * all `n x n` confusion matrices with a fixed number of tests `m`,
//!   exactly ([`exact_varrho`]) or by seeded Monte Carlo ([`mc_varrho`]);
//! * all `n x n` probability matrices, by seeded Monte Carlo over the
//!   probability simplex ([`mc_rho`]).
//!
//! As `m` grows the confusion-matrix index converges to the probability-matrix
//! index, so the latter serves as an `m`-free reference curve.
//!
//! ```
//! use sigkit::{exact_varrho, to_probability, cohen_kappa, ConfusionMatrix, Measure};
//!
//! let observed = ConfusionMatrix::from_rows(&[[8u64, 3], [0, 9]]).unwrap();
//! let c = cohen_kappa(&to_probability(&observed).unwrap());
//! let result = exact_varrho(&Measure::Kappa, 2, 20, c).unwrap();
//! // 1681 of the 1771 possible 2x2 matrices with 20 tests score below c.
//! assert!((result.value() - 0.949181).abs() < 1e-6);
//! ```
//!
//! The real-valued core is generic over the scalar through `num_traits::Float`;
//! the estimators and the [`ProbabilityMatrix64`]/[`SimplexPoint64`] aliases
//! pin `f64`, and counting is exact big-integer arithmetic throughout.

pub mod agreement;
pub mod compositions;
pub mod exact;
pub mod montecarlo;

pub use agreement::{
    cohen_kappa, information_agreement, lookup_measure, to_probability, AgreementError,
    AgreementMeasure, ConfusionMatrix, Measure, ProbabilityMatrix,
};
pub use compositions::{
    composition_count, enumerate_all, gamma, gamma_inv, project, unrank_lex, unrank_lex_fast,
    BigCount, CompositionError, WeakComposition,
};
pub use exact::{
    exact_varrho, exact_varrho_multi, exact_varrho_with, ExactError, ExactOptions,
    ExactSignificativity, DEFAULT_BUDGET,
};
pub use montecarlo::{
    default_sample_count, mc_rho, mc_rho_multi, mc_varrho, mc_varrho_multi,
    sample_simplex, sample_uniform_composition, EstimateMethod, McError, RngStream,
    SignificativityEstimate, SimplexPoint,
};

/// Probability matrix at the precision the estimators use.
pub type ProbabilityMatrix64 = ProbabilityMatrix<f64>;
/// Simplex point at the precision the estimators use.
pub type SimplexPoint64 = SimplexPoint<f64>;

//! Confusion and probability matrices, the normalization map between them,
//! and the built-in agreement measures (Cohen's kappa and information
//! agreement) behind a pluggable evaluator trait.
//!
//! Everything real-valued here is generic over the scalar type through
//! `num_traits::Float`; `f64` is what the estimators instantiate.

use num_traits::Float;
use thiserror::Error;

use crate::compositions::side_of_square;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AgreementError {
    #[error("matrix has zero tests; normalization is undefined")]
    ZeroTests,
    #[error("expected {expected} entries for a {n}x{n} matrix, got {got}")]
    DimensionMismatch { n: usize, expected: usize, got: usize },
    #[error("class count must be at least 1")]
    EmptyMatrix,
    #[error("rows do not form a square matrix")]
    RaggedRows,
    #[error("entry ({row},{col}) is negative or not finite")]
    InvalidEntry { row: usize, col: usize },
    #[error("entries sum to {sum}, too far from 1")]
    NotNormalized { sum: f64 },
    #[error("entry total overflows u64")]
    TotalOverflow,
    #[error("unknown agreement measure {0:?}; expected \"kappa\" or \"ia\"")]
    UnknownMeasure(String),
}

/// An `n x n` grid of nonnegative counts summarizing the joint labels that two
/// classifiers assigned over `m` tests.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    n: usize,
    entries: Vec<u64>,
    total: u64,
}

impl ConfusionMatrix {
    /// Builds from row-major entries; `entries.len()` must equal `n * n`.
    pub fn new(n: usize, entries: Vec<u64>) -> Result<Self, AgreementError> {
        if n == 0 {
            return Err(AgreementError::EmptyMatrix);
        }
        if entries.len() != n * n {
            return Err(AgreementError::DimensionMismatch {
                n,
                expected: n * n,
                got: entries.len(),
            });
        }
        let mut total: u64 = 0;
        for &e in &entries {
            total = total.checked_add(e).ok_or(AgreementError::TotalOverflow)?;
        }
        Ok(Self { n, entries, total })
    }

    pub fn from_rows<R: AsRef<[u64]>>(rows: &[R]) -> Result<Self, AgreementError> {
        let n = rows.len();
        if rows.iter().any(|r| r.as_ref().len() != n) {
            return Err(AgreementError::RaggedRows);
        }
        Self::new(n, rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect())
    }

    /// Builds from a flat row-major vector whose length must be a perfect square.
    pub fn from_flat(entries: Vec<u64>) -> Result<Self, AgreementError> {
        let n = side_of_square(entries.len()).ok_or(AgreementError::DimensionMismatch {
            n: 0,
            expected: 0,
            got: entries.len(),
        })?;
        Self::new(n, entries)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of tests `m`, i.e. the sum of all entries.
    pub fn total_tests(&self) -> u64 {
        self.total
    }

    pub fn get(&self, row: usize, col: usize) -> u64 {
        self.entries[row * self.n + col]
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }
}

/// An `n x n` joint distribution: nonnegative entries summing to one.
///
/// Construction accepts a small deviation from unit sum and renormalizes, so
/// downstream sums are reproducible whatever the caller fed in.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMatrix<T> {
    n: usize,
    entries: Vec<T>,
}

impl<T: Float> ProbabilityMatrix<T> {
    pub fn new(n: usize, entries: Vec<T>) -> Result<Self, AgreementError> {
        if n == 0 {
            return Err(AgreementError::EmptyMatrix);
        }
        if entries.len() != n * n {
            return Err(AgreementError::DimensionMismatch {
                n,
                expected: n * n,
                got: entries.len(),
            });
        }
        for (idx, &e) in entries.iter().enumerate() {
            if !e.is_finite() || e < T::zero() {
                return Err(AgreementError::InvalidEntry {
                    row: idx / n,
                    col: idx % n,
                });
            }
        }
        let sum = entries.iter().fold(T::zero(), |acc, &e| acc + e);
        // 1e-9 for f64; widened only when the scalar itself is coarser.
        let tol = T::from(1e-9)
            .unwrap_or_else(T::epsilon)
            .max(T::epsilon() * T::from(32 * n * n).unwrap());
        if (sum - T::one()).abs() > tol {
            return Err(AgreementError::NotNormalized {
                sum: sum.to_f64().unwrap_or(f64::NAN),
            });
        }
        let entries = entries.into_iter().map(|e| e / sum).collect();
        Ok(Self { n, entries })
    }

    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self, AgreementError> {
        let n = rows.len();
        if rows.iter().any(|r| r.as_ref().len() != n) {
            return Err(AgreementError::RaggedRows);
        }
        Self::new(n, rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect())
    }

    /// Builds from a flat row-major vector whose length must be a perfect square.
    pub fn from_flat(entries: Vec<T>) -> Result<Self, AgreementError> {
        let n = side_of_square(entries.len()).ok_or(AgreementError::DimensionMismatch {
            n: 0,
            expected: 0,
            got: entries.len(),
        })?;
        Self::new(n, entries)
    }

    /// For the sampling and enumeration kernels: the caller is responsible for
    /// writing normalized entries before evaluating anything.
    pub(crate) fn scratch(n: usize) -> Self {
        Self {
            n,
            entries: vec![T::zero(); n * n],
        }
    }

    pub(crate) fn entries_mut(&mut self) -> &mut [T] {
        &mut self.entries
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.entries[row * self.n + col]
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }
}

/// Normalizes a confusion matrix into the joint distribution it induces,
/// dividing every entry by the number of tests.
pub fn to_probability<T: Float>(m: &ConfusionMatrix) -> Result<ProbabilityMatrix<T>, AgreementError> {
    if m.total_tests() == 0 {
        return Err(AgreementError::ZeroTests);
    }
    let total = T::from(m.total_tests()).unwrap();
    let entries = m.entries().iter().map(|&e| T::from(e).unwrap() / total).collect();
    Ok(ProbabilityMatrix {
        n: m.n(),
        entries,
    })
}

/// Cohen's kappa: observed agreement corrected by the agreement expected from
/// the marginals, `(p_o - p_e) / (1 - p_e)`.
///
/// When the marginals force `p_e = 1`, all mass sits in a single cell and the
/// classifiers agree perfectly, so the value is 1. The result is clamped to
/// the declared range so threshold counting at the range endpoints stays exact.
pub fn cohen_kappa<T: Float>(p: &ProbabilityMatrix<T>) -> T {
    let n = p.n();
    let mut observed = T::zero();
    let mut expected = T::zero();
    for i in 0..n {
        observed = observed + p.get(i, i);
        let mut row = T::zero();
        let mut col = T::zero();
        for j in 0..n {
            row = row + p.get(i, j);
            col = col + p.get(j, i);
        }
        expected = expected + row * col;
    }
    if T::one() - expected <= T::zero() {
        return T::one();
    }
    ((observed - expected) / (T::one() - expected))
        .max(-T::one())
        .min(T::one())
}

/// Information agreement: the mutual information of the joint distribution
/// normalized by the smaller marginal entropy, in [0, 1].
///
/// A zero-entropy marginal means no information can be exchanged at all; the
/// value is 0 there, keeping the measure total. Clamped like [`cohen_kappa`].
pub fn information_agreement<T: Float>(p: &ProbabilityMatrix<T>) -> T {
    let n = p.n();
    let mut h_rows = T::zero();
    let mut h_cols = T::zero();
    let mut h_joint = T::zero();
    for i in 0..n {
        let mut row = T::zero();
        let mut col = T::zero();
        for j in 0..n {
            row = row + p.get(i, j);
            col = col + p.get(j, i);
            h_joint = h_joint - xlnx(p.get(i, j));
        }
        h_rows = h_rows - xlnx(row);
        h_cols = h_cols - xlnx(col);
    }
    let h_min = h_rows.min(h_cols);
    if h_min <= T::zero() {
        return T::zero();
    }
    let mutual = h_rows + h_cols - h_joint;
    (mutual / h_min).max(T::zero()).min(T::one())
}

fn xlnx<T: Float>(x: T) -> T {
    if x > T::zero() {
        x * x.ln()
    } else {
        T::zero()
    }
}

/// A named evaluator of probability matrices with a declared output range.
///
/// Confusion matrices are always evaluated through [`to_probability`], so a
/// measure's value on a confusion matrix and on the distribution it induces
/// coincide by construction.
pub trait AgreementMeasure<T: Float> {
    fn name(&self) -> &str;
    fn range(&self) -> (T, T);
    fn evaluate(&self, p: &ProbabilityMatrix<T>) -> T;

    fn evaluate_confusion(&self, m: &ConfusionMatrix) -> Result<T, AgreementError> {
        Ok(self.evaluate(&to_probability(m)?))
    }
}

/// The measures shipped with the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measure {
    /// Cohen's kappa, range [-1, 1].
    Kappa,
    /// Information agreement, range [0, 1].
    Ia,
}

impl<T: Float> AgreementMeasure<T> for Measure {
    fn name(&self) -> &str {
        match self {
            Measure::Kappa => "kappa",
            Measure::Ia => "ia",
        }
    }

    fn range(&self) -> (T, T) {
        match self {
            Measure::Kappa => (-T::one(), T::one()),
            Measure::Ia => (T::zero(), T::one()),
        }
    }

    fn evaluate(&self, p: &ProbabilityMatrix<T>) -> T {
        match self {
            Measure::Kappa => cohen_kappa(p),
            Measure::Ia => information_agreement(p),
        }
    }
}

impl std::str::FromStr for Measure {
    type Err = AgreementError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        lookup_measure(s)
    }
}

/// Resolves a measure by name: `"kappa"` or `"ia"`.
pub fn lookup_measure(name: &str) -> Result<Measure, AgreementError> {
    match name {
        "kappa" => Ok(Measure::Kappa),
        "ia" => Ok(Measure::Ia),
        other => Err(AgreementError::UnknownMeasure(other.to_string())),
    }
}

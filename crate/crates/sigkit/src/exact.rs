//! Exact significativity over confusion matrices: the fraction of all `n x n`
//! matrices with `m` tests whose agreement value falls strictly below a
//! threshold, computed by exhaustive lexicographic enumeration.

use num_traits::ToPrimitive;
use thiserror::Error;

use crate::agreement::{AgreementMeasure, ProbabilityMatrix};
use crate::compositions::{composition_count, next_composition_in_place, unrank_lex_fast, BigCount};

/// Enumeration ceiling used when no explicit budget is given.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("matrices with zero tests have no agreement value")]
    ZeroTests,
    #[error("enumerating {required} compositions exceeds the budget of {budget}")]
    BudgetExceeded { required: BigCount, budget: u64 },
}

/// Exact count of matrices below a threshold, over the exact space size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactSignificativity {
    /// Number of matrices with agreement value strictly below the threshold.
    pub numerator: BigCount,
    /// Total number of `n x n` confusion matrices with `m` tests.
    pub denominator: BigCount,
}

impl ExactSignificativity {
    /// The significativity as a double; exact counts divided in one rounding step each.
    pub fn value(&self) -> f64 {
        self.numerator.to_f64().unwrap_or(f64::NAN) / self.denominator.to_f64().unwrap_or(f64::NAN)
    }
}

/// Knobs for [`exact_varrho_with`].
#[derive(Debug, Clone)]
pub struct ExactOptions {
    /// Refuse to enumerate more compositions than this.
    pub budget: u64,
    /// Disjoint rank ranges processed concurrently; counts are summed, so the
    /// result is identical for every worker count.
    pub workers: u32,
}

impl Default for ExactOptions {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            workers: 1,
        }
    }
}

/// Exact significativity of threshold `c` for `measure` over all `n x n`
/// confusion matrices with `m` tests, using the default options.
pub fn exact_varrho<M>(measure: &M, n: u32, m: u64, c: f64) -> Result<ExactSignificativity, ExactError>
where
    M: AgreementMeasure<f64> + Sync,
{
    exact_varrho_with(measure, n, m, c, &ExactOptions::default())
}

pub fn exact_varrho_with<M>(
    measure: &M,
    n: u32,
    m: u64,
    c: f64,
    options: &ExactOptions,
) -> Result<ExactSignificativity, ExactError>
where
    M: AgreementMeasure<f64> + Sync,
{
    let mut results = exact_varrho_multi(measure, n, m, &[c], options)?;
    Ok(results.pop().expect("one threshold in, one result out"))
}

/// One enumeration sweep shared by any number of thresholds. The comparison
/// is strict: matrices scoring exactly `c` are not counted.
pub fn exact_varrho_multi<M>(
    measure: &M,
    n: u32,
    m: u64,
    thresholds: &[f64],
    options: &ExactOptions,
) -> Result<Vec<ExactSignificativity>, ExactError>
where
    M: AgreementMeasure<f64> + Sync,
{
    assert!(n >= 1, "class count must be at least 1");
    if m == 0 {
        return Err(ExactError::ZeroTests);
    }
    let k = (n as u64) * (n as u64);
    let total = composition_count(m, k);
    if total > BigCount::from(options.budget) {
        return Err(ExactError::BudgetExceeded {
            required: total,
            budget: options.budget,
        });
    }
    let total_u64 = total
        .to_u64()
        .expect("budget check keeps the space within u64");

    let workers = options.workers.max(1) as u64;
    let workers = workers.min(total_u64.max(1));
    let hits = if workers <= 1 {
        count_range(measure, n, m, k, thresholds, 0, total_u64)
    } else {
        let chunk = total_u64 / workers;
        let remainder = total_u64 % workers;
        let mut partials: Vec<Vec<u64>> = Vec::with_capacity(workers as usize);
        std::thread::scope(|scope| {
            let mut handles = Vec::with_capacity(workers as usize);
            let mut start = 0u64;
            for w in 0..workers {
                let len = chunk + u64::from(w < remainder);
                let begin = start;
                start += len;
                handles.push(
                    scope.spawn(move || count_range(measure, n, m, k, thresholds, begin, len)),
                );
            }
            for handle in handles {
                partials.push(handle.join().expect("enumeration worker panicked"));
            }
        });
        let mut combined = vec![0u64; thresholds.len()];
        for partial in partials {
            for (acc, x) in combined.iter_mut().zip(partial) {
                *acc += x;
            }
        }
        combined
    };

    Ok(hits
        .into_iter()
        .map(|h| ExactSignificativity {
            numerator: BigCount::from(h),
            denominator: total.clone(),
        })
        .collect())
}

/// Counts, for each threshold, the compositions with ranks in
/// `[start, start + len)` whose induced distribution scores strictly below it.
fn count_range<M>(
    measure: &M,
    n: u32,
    m: u64,
    k: u64,
    thresholds: &[f64],
    start: u64,
    len: u64,
) -> Vec<u64>
where
    M: AgreementMeasure<f64>,
{
    let mut hits = vec![0u64; thresholds.len()];
    if len == 0 {
        return hits;
    }
    let mut parts = unrank_lex_fast(m, k, &BigCount::from(start))
        .expect("chunk start is a valid rank")
        .into_parts();
    let mut scratch = ProbabilityMatrix::<f64>::scratch(n as usize);
    let total = m as f64;
    for _ in 0..len {
        for (slot, &count) in scratch.entries_mut().iter_mut().zip(&parts) {
            *slot = count as f64 / total;
        }
        let value = measure.evaluate(&scratch);
        for (hit, &threshold) in hits.iter_mut().zip(thresholds) {
            if value < threshold {
                *hit += 1;
            }
        }
        next_composition_in_place(&mut parts);
    }
    hits
}

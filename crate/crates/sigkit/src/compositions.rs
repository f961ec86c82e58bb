//! Weak compositions of `m` into `k` parts: exact cardinalities, lexicographic
//! enumeration and unranking, and the row-major vector/matrix reshape used to
//! identify compositions with square matrices.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

/// Exact nonnegative count; composition-space cardinalities overflow any
/// fixed-width integer long before the sizes this crate targets.
pub type BigCount = BigUint;

/// Errors raised by composition operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompositionError {
    #[error("rank {rank} is out of range: C({m},{k}) has {count} elements")]
    RankOutOfRange {
        m: u64,
        k: u64,
        rank: BigCount,
        count: BigCount,
    },
    #[error("length {len} is not a perfect square")]
    NotASquare { len: usize },
    #[error("need at least 2 coordinates to project, got {len}")]
    TooShort { len: usize },
    #[error("a composition needs at least one part")]
    EmptyParts,
    #[error("part total overflows u64")]
    TotalOverflow,
}

/// An ordered tuple of nonnegative integers with a fixed sum.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WeakComposition {
    parts: Vec<u64>,
}

impl WeakComposition {
    pub fn new(parts: Vec<u64>) -> Result<Self, CompositionError> {
        if parts.is_empty() {
            return Err(CompositionError::EmptyParts);
        }
        let mut total: u64 = 0;
        for &p in &parts {
            total = total
                .checked_add(p)
                .ok_or(CompositionError::TotalOverflow)?;
        }
        Ok(Self { parts })
    }

    pub(crate) fn from_parts_unchecked(parts: Vec<u64>) -> Self {
        debug_assert!(!parts.is_empty());
        Self { parts }
    }

    pub fn parts(&self) -> &[u64] {
        &self.parts
    }

    /// The sum of the parts (`m`).
    pub fn total(&self) -> u64 {
        self.parts.iter().sum()
    }

    /// The number of parts (`k`).
    pub fn part_count(&self) -> usize {
        self.parts.len()
    }

    pub fn into_parts(self) -> Vec<u64> {
        self.parts
    }
}

/// Number of weak compositions of `m` into `k` parts, `binom(m + k - 1, m)`,
/// computed exactly.
pub fn composition_count(m: u64, k: u64) -> BigCount {
    assert!(k >= 1, "composition_count requires k >= 1");
    binomial(&(BigUint::from(m) + BigUint::from(k - 1)), &BigUint::from(m))
}

/// Exact binomial coefficient over big integers. Each partial product is
/// divisible by the running factorial, so the division below is always exact.
fn binomial(n: &BigUint, k: &BigUint) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(&(n - k)).clone();
    let mut result = BigUint::one();
    let mut i = BigUint::one();
    while i <= k {
        result = result * (n - &k + &i) / &i;
        i += 1u32;
    }
    result
}

/// Reshapes a flat vector of length `n*n` into an `n x n` matrix, row-major.
pub fn gamma<T: Clone>(x: &[T]) -> Result<Vec<Vec<T>>, CompositionError> {
    let n = side_of_square(x.len()).ok_or(CompositionError::NotASquare { len: x.len() })?;
    Ok(x.chunks(n).map(|row| row.to_vec()).collect())
}

/// Flattens an `n x n` matrix back into a row-major vector; inverse of [`gamma`].
pub fn gamma_inv<T: Clone>(rows: &[Vec<T>]) -> Result<Vec<T>, CompositionError> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(CompositionError::NotASquare {
            len: rows.iter().map(Vec::len).sum(),
        });
    }
    Ok(rows.iter().flat_map(|r| r.iter().cloned()).collect())
}

/// Side length `n` when `len == n*n`.
pub(crate) fn side_of_square(len: usize) -> Option<usize> {
    let n = (len as f64).sqrt().round() as usize;
    (n >= 1 && n * n == len).then_some(n)
}

/// Drops the last coordinate. On the standard simplex the last coordinate is
/// redundant, so this is a bijection there.
pub fn project<T: Clone>(x: &[T]) -> Result<Vec<T>, CompositionError> {
    if x.len() < 2 {
        return Err(CompositionError::TooShort { len: x.len() });
    }
    Ok(x[..x.len() - 1].to_vec())
}

fn check_rank(m: u64, k: u64, rank: &BigCount) -> Result<BigCount, CompositionError> {
    assert!(k >= 1, "unranking requires k >= 1");
    let count = composition_count(m, k);
    if *rank >= count {
        return Err(CompositionError::RankOutOfRange {
            m,
            k,
            rank: rank.clone(),
            count,
        });
    }
    Ok(count)
}

/// The `rank`-th weak composition of `m` into `k` parts in lexicographic
/// order, found by subtracting block cardinalities one prefix value at a time.
///
/// Recomputes a binomial coefficient on every step; see [`unrank_lex_fast`]
/// for the ratio-update variant.
pub fn unrank_lex(m: u64, k: u64, rank: &BigCount) -> Result<WeakComposition, CompositionError> {
    check_rank(m, k, rank)?;
    let mut parts = vec![0u64; k as usize];
    let mut i = rank.clone();
    let mut m_cur = m;
    let last = (k - 1) as usize;
    for (pos, slot) in parts[..last].iter_mut().enumerate() {
        let k_rem = k - pos as u64; // parts still to fill, including this one
        let m_start = m_cur;
        loop {
            let block = composition_count(m_cur, k_rem - 1);
            if i < block {
                break;
            }
            i -= block;
            m_cur -= 1;
        }
        *slot = m_start - m_cur;
    }
    parts[last] = m_cur;
    Ok(WeakComposition::from_parts_unchecked(parts))
}

/// Same contract as [`unrank_lex`], in O(m + k) arithmetic operations: the
/// running block cardinality is maintained through the exact ratios
/// `|C(m-1,k)| = m/(m+k-1) * |C(m,k)|` and `|C(m,k-1)| = (k-1)/(m+k-1) * |C(m,k)|`.
pub fn unrank_lex_fast(
    m: u64,
    k: u64,
    rank: &BigCount,
) -> Result<WeakComposition, CompositionError> {
    let count = check_rank(m, k, rank)?;
    // All intermediate cardinalities are bounded by |C(m,k)|, so when that
    // fits in a u64 the whole walk runs on machine words.
    if let (Some(_), Some(rank_u64)) = (count.to_u64(), rank.to_u64()) {
        return Ok(unrank_lex_fast_u64(m, k, rank_u64));
    }
    let mut parts = vec![0u64; k as usize];
    let mut i = rank.clone();
    let mut m_cur = m;
    let mut k_cur = k;
    if k_cur == 1 {
        parts[0] = m_cur;
        return Ok(WeakComposition::from_parts_unchecked(parts));
    }
    let mut c = composition_count(m_cur, k_cur - 1);
    while m_cur > 0 && k_cur > 1 {
        let m_start = m_cur;
        while i >= c {
            i -= &c;
            // c = |C(m_cur, k_cur-1)|  ->  |C(m_cur-1, k_cur-1)|
            let num = &c * m_cur;
            let den = m_cur + k_cur - 2;
            debug_assert!((&num % den).is_zero());
            c = num / den;
            m_cur -= 1;
        }
        k_cur -= 1;
        parts[(k - k_cur - 1) as usize] = m_start - m_cur;
        if k_cur > 1 {
            // c = |C(m_cur, k_cur)|  ->  |C(m_cur, k_cur-1)|
            let num = &c * (k_cur - 1);
            let den = m_cur + k_cur - 1;
            debug_assert!((&num % den).is_zero());
            c = num / den;
        }
    }
    parts[(k - 1) as usize] = m_cur;
    Ok(WeakComposition::from_parts_unchecked(parts))
}

/// Word-sized variant of the ratio-update walk. Caller guarantees
/// `rank < |C(m,k)| <= u64::MAX`; intermediate products go through u128.
fn unrank_lex_fast_u64(m: u64, k: u64, rank: u64) -> WeakComposition {
    let mut parts = vec![0u64; k as usize];
    let mut i = rank;
    let mut m_cur = m;
    let mut k_cur = k;
    if k_cur == 1 {
        parts[0] = m_cur;
        return WeakComposition::from_parts_unchecked(parts);
    }
    let mut c = composition_count(m_cur, k_cur - 1)
        .to_u64()
        .expect("sub-cardinality fits u64 when the total does");
    while m_cur > 0 && k_cur > 1 {
        let m_start = m_cur;
        while i >= c {
            i -= c;
            let num = c as u128 * m_cur as u128;
            let den = (m_cur + k_cur - 2) as u128;
            debug_assert_eq!(num % den, 0);
            c = (num / den) as u64;
            m_cur -= 1;
        }
        k_cur -= 1;
        parts[(k - k_cur - 1) as usize] = m_start - m_cur;
        if k_cur > 1 {
            let num = c as u128 * (k_cur - 1) as u128;
            let den = (m_cur + k_cur - 1) as u128;
            debug_assert_eq!(num % den, 0);
            c = (num / den) as u64;
        }
    }
    parts[(k - 1) as usize] = m_cur;
    WeakComposition::from_parts_unchecked(parts)
}

/// Advances `parts` to its lexicographic successor among compositions with the
/// same total and length. Returns false when `parts` is already the maximum.
pub(crate) fn next_composition_in_place(parts: &mut [u64]) -> bool {
    let k = parts.len();
    let last_nonzero = match parts.iter().rposition(|&x| x > 0) {
        Some(l) if l > 0 => l,
        _ => return false,
    };
    parts[last_nonzero - 1] += 1;
    let carry = parts[last_nonzero] - 1;
    parts[last_nonzero] = 0;
    parts[k - 1] = carry;
    true
}

/// Streams every weak composition of `m` into `k` parts in lexicographic
/// order, starting from `<0, ..., 0, m>`.
pub fn enumerate_all(m: u64, k: u64) -> Compositions {
    assert!(k >= 1, "enumerate_all requires k >= 1");
    let mut parts = vec![0u64; k as usize];
    parts[k as usize - 1] = m;
    Compositions { parts: Some(parts) }
}

/// Iterator over `C(m,k)` in lexicographic order; see [`enumerate_all`].
#[derive(Debug, Clone)]
pub struct Compositions {
    parts: Option<Vec<u64>>,
}

impl Iterator for Compositions {
    type Item = WeakComposition;

    fn next(&mut self) -> Option<Self::Item> {
        let parts = self.parts.as_mut()?;
        let item = WeakComposition::from_parts_unchecked(parts.clone());
        if !next_composition_in_place(parts) {
            self.parts = None;
        }
        Some(item)
    }
}

//! Seeded Monte Carlo estimators for both significativity indices: uniform
//! composition sampling through unranking for the confusion-matrix index, and
//! exponential-variate simplex sampling for the probability-matrix index.

use num_bigint::BigUint;
use num_traits::{Float, One, ToPrimitive, Zero};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::agreement::{AgreementMeasure, ProbabilityMatrix};
use crate::compositions::{composition_count, unrank_lex_fast, WeakComposition};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum McError {
    #[error("matrices with zero tests have no agreement value")]
    ZeroTests,
    #[error("at least one sample is required")]
    ZeroSamples,
}

/// A reproducible random stream: the same `(seed, stream_id)` pair yields the
/// same output sequence on every platform and run.
///
/// Backed by ChaCha with 8 rounds; the seed is expanded with the generator's
/// documented `seed_from_u64` scheme and `stream_id` selects the ChaCha
/// stream, so workers get statistically independent substreams.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform integer in `[0, bound)` by rejection on the minimal bit width:
    /// draw `ceil(log2(bound))` bits, retry on overflow. Acceptance is above
    /// one half, so this needs fewer than two draws on average.
    pub fn uniform_below(&mut self, bound: &BigUint) -> BigUint {
        assert!(!bound.is_zero(), "bound must be positive");
        if bound.is_one() {
            return BigUint::zero();
        }
        let bits = (bound - 1u32).bits();
        let words = bits.div_ceil(64) as usize;
        let top_bits = bits - 64 * (words as u64 - 1);
        let top_mask = if top_bits == 64 {
            u64::MAX
        } else {
            (1u64 << top_bits) - 1
        };
        loop {
            let mut bytes = Vec::with_capacity(words * 8);
            for w in 0..words {
                let mut word = self.next_u64();
                if w == words - 1 {
                    word &= top_mask;
                }
                bytes.extend_from_slice(&word.to_le_bytes());
            }
            let candidate = BigUint::from_bytes_le(&bytes);
            if &candidate < bound {
                return candidate;
            }
        }
    }

    /// Unit-rate exponential variate `-ln(U)` with `U = (u + 1) / 2^64` drawn
    /// from a 64-bit word, so `U` is never zero and the logarithm is finite.
    pub fn unit_exponential(&mut self) -> f64 {
        let u = self.next_u64();
        let uniform = (u as f64 + 1.0) * 2.0f64.powi(-64);
        -uniform.ln()
    }
}

/// Which estimator produced a [`SignificativityEstimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimateMethod {
    /// Uniform sampling of confusion matrices with a fixed number of tests.
    McConfusion,
    /// Uniform sampling of probability matrices on the simplex.
    McProbability,
}

impl std::fmt::Display for EstimateMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EstimateMethod::McConfusion => "mc_confusion",
            EstimateMethod::McProbability => "mc_probability",
        })
    }
}

/// A Monte Carlo estimate of a significativity index.
#[derive(Debug, Clone, PartialEq)]
pub struct SignificativityEstimate {
    /// Estimated probability, in [0, 1].
    pub value: f64,
    /// Number of samples behind the estimate.
    pub n_samples: u64,
    /// Binomial plug-in standard error, `sqrt(value * (1 - value) / n_samples)`.
    pub std_error: f64,
    pub method: EstimateMethod,
    pub seed: u64,
}

impl SignificativityEstimate {
    fn from_hits(hits: u64, n_samples: u64, method: EstimateMethod, seed: u64) -> Self {
        let value = hits as f64 / n_samples as f64;
        Self {
            value,
            n_samples,
            std_error: (value * (1.0 - value) / n_samples as f64).sqrt(),
            method,
            seed,
        }
    }
}

/// A point of the standard simplex: nonnegative coordinates summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexPoint<T> {
    coords: Vec<T>,
}

impl<T: Float> SimplexPoint<T> {
    pub fn new(coords: Vec<T>) -> Option<Self> {
        if coords.is_empty() || coords.iter().any(|&c| !c.is_finite() || c < T::zero()) {
            return None;
        }
        let sum = coords.iter().fold(T::zero(), |acc, &c| acc + c);
        let tol = T::from(1e-12).unwrap_or_else(T::epsilon);
        if (sum - T::one()).abs() > tol.max(T::epsilon() * T::from(coords.len()).unwrap()) {
            return None;
        }
        Some(Self { coords })
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<T> {
        self.coords
    }
}

/// Fills `out` with a uniform sample of the standard simplex: i.i.d.
/// exponential variates normalized by their sum.
fn fill_simplex(rng: &mut RngStream, out: &mut [f64]) {
    if out.len() == 1 {
        out[0] = 1.0;
        return;
    }
    loop {
        let mut sum = 0.0;
        for slot in out.iter_mut() {
            let e = rng.unit_exponential();
            *slot = e;
            sum += e;
        }
        // A zero sum needs every variate to hit the lattice floor at once.
        if sum > 0.0 {
            for slot in out.iter_mut() {
                *slot /= sum;
            }
            return;
        }
    }
}

/// A uniform sample of the `(k-1)`-dimensional standard simplex.
pub fn sample_simplex(k: u64, rng: &mut RngStream) -> SimplexPoint<f64> {
    assert!(k >= 1, "the simplex needs at least one coordinate");
    let mut coords = vec![0.0; k as usize];
    fill_simplex(rng, &mut coords);
    SimplexPoint { coords }
}

/// A uniform sample of the weak compositions of `m` into `k` parts, drawn by
/// unranking a uniform integer below the space cardinality.
pub fn sample_uniform_composition(m: u64, k: u64, rng: &mut RngStream) -> WeakComposition {
    let count = composition_count(m, k);
    let rank = rng.uniform_below(&count);
    unrank_lex_fast(m, k, &rank).expect("sampled rank is in range")
}

/// Default sample count for the confusion-matrix estimator: the square root
/// of the space cardinality, rounded up and capped at one million.
pub fn default_sample_count(m: u64, k: u64) -> u64 {
    const CAP: u64 = 1_000_000;
    let count = composition_count(m, k);
    let root = count.sqrt();
    let root = if &root * &root < count {
        root + 1u32
    } else {
        root
    };
    root.to_u64().map_or(CAP, |r| r.min(CAP))
}

/// Monte Carlo estimate of the significativity of `c` over `n x n` confusion
/// matrices with `m` tests. Deterministic given `(seed, workers)`.
pub fn mc_varrho<M>(
    measure: &M,
    n: u32,
    m: u64,
    c: f64,
    samples: u64,
    seed: u64,
    workers: u32,
) -> Result<SignificativityEstimate, McError>
where
    M: AgreementMeasure<f64> + Sync,
{
    let mut estimates = mc_varrho_multi(measure, n, m, &[c], samples, seed, workers)?;
    Ok(estimates.pop().expect("one threshold in, one estimate out"))
}

/// Multi-threshold variant of [`mc_varrho`]: one sample sweep, every
/// threshold checked against each sampled matrix.
pub fn mc_varrho_multi<M>(
    measure: &M,
    n: u32,
    m: u64,
    thresholds: &[f64],
    samples: u64,
    seed: u64,
    workers: u32,
) -> Result<Vec<SignificativityEstimate>, McError>
where
    M: AgreementMeasure<f64> + Sync,
{
    assert!(n >= 1, "class count must be at least 1");
    if m == 0 {
        return Err(McError::ZeroTests);
    }
    if samples == 0 {
        return Err(McError::ZeroSamples);
    }
    let k = (n as u64) * (n as u64);
    let count = composition_count(m, k);
    let hits = run_workers(thresholds.len(), samples, seed, workers, |rng, draws, hits| {
        let mut scratch = ProbabilityMatrix::<f64>::scratch(n as usize);
        let total = m as f64;
        for _ in 0..draws {
            let rank = rng.uniform_below(&count);
            let parts = unrank_lex_fast(m, k, &rank)
                .expect("sampled rank is in range")
                .into_parts();
            for (slot, &part) in scratch.entries_mut().iter_mut().zip(&parts) {
                *slot = part as f64 / total;
            }
            let value = measure.evaluate(&scratch);
            for (hit, &threshold) in hits.iter_mut().zip(thresholds) {
                if value < threshold {
                    *hit += 1;
                }
            }
        }
    });
    Ok(hits
        .into_iter()
        .map(|h| SignificativityEstimate::from_hits(h, samples, EstimateMethod::McConfusion, seed))
        .collect())
}

/// Monte Carlo estimate of the significativity of `c` over `n x n`
/// probability matrices. Deterministic given `(seed, workers)`.
pub fn mc_rho<M>(
    measure: &M,
    n: u32,
    c: f64,
    samples: u64,
    seed: u64,
    workers: u32,
) -> Result<SignificativityEstimate, McError>
where
    M: AgreementMeasure<f64> + Sync,
{
    let mut estimates = mc_rho_multi(measure, n, &[c], samples, seed, workers)?;
    Ok(estimates.pop().expect("one threshold in, one estimate out"))
}

/// Multi-threshold variant of [`mc_rho`].
pub fn mc_rho_multi<M>(
    measure: &M,
    n: u32,
    thresholds: &[f64],
    samples: u64,
    seed: u64,
    workers: u32,
) -> Result<Vec<SignificativityEstimate>, McError>
where
    M: AgreementMeasure<f64> + Sync,
{
    assert!(n >= 1, "class count must be at least 1");
    if samples == 0 {
        return Err(McError::ZeroSamples);
    }
    let hits = run_workers(thresholds.len(), samples, seed, workers, |rng, draws, hits| {
        let mut scratch = ProbabilityMatrix::<f64>::scratch(n as usize);
        for _ in 0..draws {
            fill_simplex(rng, scratch.entries_mut());
            let value = measure.evaluate(&scratch);
            for (hit, &threshold) in hits.iter_mut().zip(thresholds) {
                if value < threshold {
                    *hit += 1;
                }
            }
        }
    });
    Ok(hits
        .into_iter()
        .map(|h| {
            SignificativityEstimate::from_hits(h, samples, EstimateMethod::McProbability, seed)
        })
        .collect())
}

/// Splits `samples` across `workers` independent substreams (worker `w` owns
/// `stream_id = w`) and sums the per-threshold hit counts.
fn run_workers<F>(n_thresholds: usize, samples: u64, seed: u64, workers: u32, body: F) -> Vec<u64>
where
    F: Fn(&mut RngStream, u64, &mut [u64]) + Sync,
{
    let workers = u64::from(workers.max(1)).min(samples);
    let chunk = samples / workers;
    let remainder = samples % workers;
    let draws_for = |w: u64| chunk + u64::from(w < remainder);

    if workers <= 1 {
        let mut rng = RngStream::new(seed, 0);
        let mut hits = vec![0u64; n_thresholds];
        body(&mut rng, samples, &mut hits);
        return hits;
    }
    let mut combined = vec![0u64; n_thresholds];
    std::thread::scope(|scope| {
        let body = &body;
        let mut handles = Vec::with_capacity(workers as usize);
        for w in 0..workers {
            handles.push(scope.spawn(move || {
                let mut rng = RngStream::new(seed, w);
                let mut hits = vec![0u64; n_thresholds];
                body(&mut rng, draws_for(w), &mut hits);
                hits
            }));
        }
        for handle in handles {
            let partial = handle.join().expect("sampling worker panicked");
            for (acc, x) in combined.iter_mut().zip(partial) {
                *acc += x;
            }
        }
    });
    combined
}

//! Reproducible parallel sample accumulation.
//!
//! Sample `i` draws its four uniforms from words `[8i, 8i+8)` of a ChaCha8
//! stream keyed by the seed, so its value depends only on `(seed, i)`. Work
//! is split into fixed chunks of [`CHUNK`] consecutive indices and the chunk
//! partials are merged along a fixed binary tree, which makes every estimate
//! bit-identical for any thread count.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;

/// Samples per work item.
pub const CHUNK: u64 = 4096;

const WORDS_PER_SAMPLE: u128 = 8;

/// Where the per-sample uniforms come from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Source {
    /// Counter-based pseudo-random draws.
    Random { seed: u64 },
    /// Midpoints of a tensor grid; the fourth coordinate is fixed at ½.
    Grid { dims: [usize; 3] },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplePlan {
    pub n: u64,
    pub source: Source,
    /// Equal strata of the first coordinate; sample `i` lands in `i mod strata`.
    pub strata: u32,
    pub threads: Option<usize>,
}

impl SamplePlan {
    pub fn random(n: u64, seed: u64) -> Self {
        Self {
            n,
            source: Source::Random { seed },
            strata: 1,
            threads: None,
        }
    }

    pub fn grid(dims: [usize; 3]) -> Self {
        let n = dims.iter().map(|&d| d as u64).product();
        Self {
            n,
            source: Source::Grid { dims },
            strata: 1,
            threads: None,
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(self.source, Source::Random { .. })
    }
}

#[inline]
fn unit_f64(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// The four uniforms of sample `index`, drawn independently of any chunking.
pub fn sample_uniforms(seed: u64, index: u64) -> [f64; 4] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(index as u128 * WORDS_PER_SAMPLE);
    std::array::from_fn(|_| unit_f64(rng.next_u64()))
}

/// Running sums of values and their cross products.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments<const K: usize> {
    pub n: u64,
    pub sum: [f64; K],
    pub cross: [[f64; K]; K],
}

impl<const K: usize> Default for Moments<K> {
    fn default() -> Self {
        Self {
            n: 0,
            sum: [0.0; K],
            cross: [[0.0; K]; K],
        }
    }
}

impl<const K: usize> Moments<K> {
    pub fn push(&mut self, x: [f64; K]) {
        self.n += 1;
        for i in 0..K {
            self.sum[i] += x[i];
            for j in i..K {
                self.cross[i][j] += x[i] * x[j];
            }
        }
    }

    pub fn merge(&mut self, other: &Self) {
        self.n += other.n;
        for i in 0..K {
            self.sum[i] += other.sum[i];
            for j in i..K {
                self.cross[i][j] += other.cross[i][j];
            }
        }
    }

    pub fn mean(&self) -> [f64; K] {
        let n = self.n.max(1) as f64;
        self.sum.map(|s| s / n)
    }

    /// Unbiased sample covariance.
    pub fn covariance(&self) -> [[f64; K]; K] {
        let mut cov = [[0.0; K]; K];
        if self.n < 2 {
            return cov;
        }
        let n = self.n as f64;
        let mean = self.mean();
        for i in 0..K {
            for j in i..K {
                let c = (self.cross[i][j] - n * mean[i] * mean[j]) / (n - 1.0);
                cov[i][j] = c;
                cov[j][i] = c;
            }
        }
        cov
    }
}

/// Mean vector of the sampled integrand together with the covariance of that
/// mean (not of a single sample).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanEstimate<const K: usize> {
    pub n: u64,
    pub mean: [f64; K],
    pub cov: [[f64; K]; K],
}

impl<const K: usize> MeanEstimate<K> {
    /// Stratified combination: equal-weight average of stratum means.
    fn from_strata(strata: &[Moments<K>], random: bool) -> Self {
        let used: Vec<_> = strata.iter().filter(|m| m.n > 0).collect();
        let s = used.len().max(1) as f64;
        let mut mean = [0.0; K];
        let mut cov = [[0.0; K]; K];
        for m in &used {
            let mu = m.mean();
            let c = m.covariance();
            for i in 0..K {
                mean[i] += mu[i] / s;
                for j in 0..K {
                    if random {
                        cov[i][j] += c[i][j] / (m.n as f64 * s * s);
                    }
                }
            }
        }
        Self {
            n: strata.iter().map(|m| m.n).sum(),
            mean,
            cov,
        }
    }

    /// Value and variance of `Σ wᵢ meanᵢ`.
    pub fn linear(&self, weights: [f64; K]) -> (f64, f64) {
        let value = (0..K).map(|i| weights[i] * self.mean[i]).sum();
        let mut var = 0.0;
        for i in 0..K {
            for j in 0..K {
                var += weights[i] * weights[j] * self.cov[i][j];
            }
        }
        (value, var.max(0.0))
    }

    /// Value and delta-method variance of `mean[num] / mean[den]`.
    pub fn ratio(&self, num: usize, den: usize) -> (f64, f64) {
        let (x, y) = (self.mean[num], self.mean[den]);
        if y == 0.0 {
            return (f64::NAN, f64::NAN);
        }
        let r = x / y;
        let var = (self.cov[num][num] - 2.0 * r * self.cov[num][den] + r * r * self.cov[den][den])
            / (y * y);
        (r, var.max(0.0))
    }
}

fn draws(plan: &SamplePlan, rng: &mut Option<ChaCha8Rng>, index: u64) -> [f64; 4] {
    let mut u = match plan.source {
        Source::Random { .. } => {
            let rng = rng.as_mut().expect("random source has a stream");
            std::array::from_fn(|_| unit_f64(rng.next_u64()))
        }
        Source::Grid { dims: [na, nb, nc] } => {
            let i = index as usize;
            let (ia, rest) = (i / (nb * nc), i % (nb * nc));
            let (ib, ic) = (rest / nc, rest % nc);
            [
                (ia as f64 + 0.5) / na as f64,
                (ib as f64 + 0.5) / nb as f64,
                (ic as f64 + 0.5) / nc as f64,
                0.5,
            ]
        }
    };
    if plan.strata > 1 {
        let k = (index % plan.strata as u64) as f64;
        u[0] = (k + u[0]) / plan.strata as f64;
    }
    u
}

fn run_chunk<const K: usize, F>(plan: &SamplePlan, chunk: u64, f: &F) -> Vec<Moments<K>>
where
    F: Fn([f64; 4]) -> [f64; K] + Sync,
{
    let start = chunk * CHUNK;
    let end = (start + CHUNK).min(plan.n);
    let mut rng = match plan.source {
        Source::Random { seed } => {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_word_pos(start as u128 * WORDS_PER_SAMPLE);
            Some(r)
        }
        Source::Grid { .. } => None,
    };
    let strata = plan.strata.max(1) as u64;
    let mut acc = vec![Moments::<K>::default(); strata as usize];
    for i in start..end {
        let x = f(draws(plan, &mut rng, i));
        acc[(i % strata) as usize].push(x);
    }
    acc
}

fn tree_merge<const K: usize>(parts: &[Vec<Moments<K>>]) -> Vec<Moments<K>> {
    match parts {
        [] => Vec::new(),
        [one] => one.clone(),
        _ => {
            let (l, r) = parts.split_at(parts.len() / 2);
            let mut left = tree_merge(l);
            let right = tree_merge(r);
            for (a, b) in left.iter_mut().zip(&right) {
                a.merge(b);
            }
            left
        }
    }
}

/// Evaluates `f` on every sample of the plan and returns the stratified mean
/// estimate. For grid sources the covariance is reported as zero.
pub fn accumulate<const K: usize, F>(plan: &SamplePlan, f: F) -> MeanEstimate<K>
where
    F: Fn([f64; 4]) -> [f64; K] + Sync,
{
    let chunks = plan.n.div_ceil(CHUNK);
    let work = || -> Vec<Vec<Moments<K>>> {
        (0..chunks)
            .into_par_iter()
            .map(|c| run_chunk(plan, c, &f))
            .collect()
    };
    let parts = match plan.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map(|pool| pool.install(work))
            .unwrap_or_else(|_| work()),
        None => work(),
    };
    let merged = tree_merge(&parts);
    MeanEstimate::from_strata(&merged, plan.is_random())
}

//! Seeded randomness and the parallel Monte Carlo harness.
//!
//! Every stochastic routine draws from ChaCha8 streams keyed by
//! `(seed, worker)`. Work is split over a fixed number of workers
//! ([`MC_WORKERS`]) independent of the thread pool size, and partial sums
//! are merged in worker order, so results are bit-reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::linalg::Vector;

pub type Rng = ChaCha8Rng;

/// Number of sample partitions used by every Monte Carlo loop.
pub const MC_WORKERS: u64 = 8;

pub fn stream(seed: u64, index: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Derive a child seed from a base seed, a check name and a trial index.
pub fn derive_seed(base: u64, name: &str, index: u64) -> u64 {
    // FNV-1a over the name, then splitmix64 finalization.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    splitmix(base ^ h ^ splitmix(index.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn gaussian_vector(rng: &mut Rng, n: usize) -> Vector {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Uniform point on S^(n-1) (normalized Gaussian).
pub fn sphere_point(rng: &mut Rng, n: usize) -> Vector {
    loop {
        let g = gaussian_vector(rng, n);
        let len = crate::linalg::norm(&g);
        if len > 1e-300 {
            return g.into_iter().map(|x| x / len).collect();
        }
    }
}

/// `count` seeded sphere points, deterministic in `seed`.
pub fn sphere_points(seed: u64, count: usize, n: usize) -> Vec<Vector> {
    let mut rng = stream(seed, 0);
    (0..count).map(|_| sphere_point(&mut rng, n)).collect()
}

/// Running mean and variance (Welford), mergeable.
#[derive(Debug, Clone, Copy, Default)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / total as f64;
        self.m2 += other.m2 + delta * delta * (self.count as f64 * other.count as f64) / total as f64;
        self.count = total;
    }

    /// Sample standard deviation (n - 1 denominator).
    pub fn std_dev(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2.max(0.0) / (self.count - 1) as f64).sqrt()
        }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.std_dev() / (self.count as f64).sqrt()
        }
    }
}

/// Evaluate `f` on `samples` draws split across [`MC_WORKERS`] streams and
/// return per-component moments. `f` returns `K` values per draw so that
/// correlated estimators can share samples.
pub fn parallel_moments<const K: usize, F>(samples: u64, seed: u64, f: F) -> [Moments; K]
where
    F: Fn(&mut Rng) -> [f64; K] + Sync,
{
    let per = samples / MC_WORKERS;
    let rem = samples % MC_WORKERS;
    let parts: Vec<[Moments; K]> = (0..MC_WORKERS)
        .into_par_iter()
        .map(|w| {
            let mut rng = stream(seed, w);
            let count = per + u64::from(w < rem);
            let mut acc = [Moments::default(); K];
            for _ in 0..count {
                let vals = f(&mut rng);
                for (a, v) in acc.iter_mut().zip(vals) {
                    a.push(v);
                }
            }
            acc
        })
        .collect();
    let mut total = [Moments::default(); K];
    for part in &parts {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    total
}

//! Reproducible Monte Carlo estimation.
//!
//! Samples are split into fixed-size batches; batch `b` draws from the
//! ChaCha8 stream `b` of `seed`. Batches run in parallel and their sums are
//! merged in batch order, so estimates do not depend on the worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Samples per sub-stream.
pub const BATCH_SIZE: u64 = 4096;

/// Normal quantile for a two-sided 95% interval.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// A sample mean with its normal-approximation 95% half-width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub half_width: f64,
    pub samples: u64,
}

impl Estimate {
    /// True when `value` is within `k` standard errors of the mean.
    pub fn within_sigmas(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.std_error + 1e-12 * (1.0 + value.abs())
    }
}

/// Generator for batch `batch` of `seed`.
pub fn substream(seed: u64, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    rng
}

/// Estimates `E[f]` for a `K`-valued sampler, componentwise.
pub fn estimate<const K: usize, F>(seed: u64, samples: u64, f: F) -> Result<[Estimate; K]>
where
    F: Fn(&mut ChaCha8Rng) -> Result<[f64; K]> + Sync,
{
    if samples == 0 {
        return Err(Error::Parameter("sample count must be at least 1".into()));
    }
    let batches = samples.div_ceil(BATCH_SIZE);
    let sums: Vec<([f64; K], [f64; K])> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = substream(seed, b);
            let len = BATCH_SIZE.min(samples - b * BATCH_SIZE);
            let mut s = [0.0; K];
            let mut s2 = [0.0; K];
            for _ in 0..len {
                let x = f(&mut rng)?;
                for k in 0..K {
                    s[k] += x[k];
                    s2[k] += x[k] * x[k];
                }
            }
            Ok((s, s2))
        })
        .collect::<Result<_>>()?;

    let mut s = [0.0; K];
    let mut s2 = [0.0; K];
    for (a, b) in &sums {
        for k in 0..K {
            s[k] += a[k];
            s2[k] += b[k];
        }
    }
    let n = samples as f64;
    Ok(std::array::from_fn(|k| {
        let mean = s[k] / n;
        let var = if samples > 1 {
            ((s2[k] - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        let std_error = (var / n).sqrt();
        Estimate {
            mean,
            std_error,
            half_width: Z_95 * std_error,
            samples,
        }
    }))
}

#[cfg(test)]
mod tests {
    use rand::Rng;

    use super::*;

    #[test]
    fn constant_sampler_has_zero_width() {
        let [e] = estimate(1, 10_000, |_| Ok([3.5])).unwrap();
        assert_eq!(e.mean, 3.5);
        assert_eq!(e.half_width, 0.0);
        assert!(estimate::<1, _>(1, 0, |_| Ok([0.0])).is_err());
    }

    #[test]
    fn independent_of_worker_count() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| estimate(7, 20_000, |r| Ok([r.random::<f64>()])).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a[0].mean.to_bits(), b[0].mean.to_bits());
        assert!(a[0].within_sigmas(0.5, 4.0));
    }

    #[test]
    fn streams_differ() {
        let x: f64 = substream(1, 0).random();
        let y: f64 = substream(1, 1).random();
        assert_ne!(x, y);
    }
}

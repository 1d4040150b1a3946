//! Deterministic parallel Monte Carlo.
//!
//! Replicate `i` draws from the stream `(seed, i)`. Replicates are grouped in
//! fixed chunks; each chunk is reduced sequentially and chunk summaries are
//! merged pairwise in chunk order, so the result does not depend on how
//! rayon schedules the chunks.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::RngStream;

const CHUNK: u64 = 256;

/// Largest tolerated fraction of discarded draws.
pub const DISCARD_BUDGET: f64 = 1e-3;

/// Redraw attempts for a single replicate before giving up.
pub const MAX_REDRAWS: u64 = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub n_discarded: u64,
    pub seed: u64,
}

impl McEstimate {
    /// Exact value with zero error, for closed forms.
    pub fn exact(value: f64, seed: u64) -> Self {
        Self {
            mean: value,
            stderr: 0.0,
            n_samples: 0,
            n_discarded: 0,
            seed,
        }
    }

    /// `|a - b| / sqrt(se_a^2 + se_b^2)`.
    pub fn z_distance(&self, other: &Self) -> f64 {
        (self.mean - other.mean).abs() / self.stderr.hypot(other.stderr)
    }

    pub fn relative_stderr(&self) -> f64 {
        self.stderr / self.mean.abs()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            mean: self.mean * s,
            stderr: self.stderr * s.abs(),
            ..*self
        }
    }
}

/// Running means and centered second moments of several outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct Welford {
    pub n: u64,
    pub mean: Vec<f64>,
    pub m2: Vec<f64>,
}

impl Welford {
    pub fn new(outputs: usize) -> Self {
        Self {
            n: 0,
            mean: vec![0.0; outputs],
            m2: vec![0.0; outputs],
        }
    }

    pub fn push(&mut self, y: &[f64]) {
        self.n += 1;
        let n = self.n as f64;
        for ((m, s), &v) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(y) {
            let d = v - *m;
            *m += d / n;
            *s += d * (v - *m);
        }
    }

    /// Chan's parallel combination.
    pub fn merge(&self, other: &Self) -> Self {
        if self.n == 0 {
            return other.clone();
        }
        if other.n == 0 {
            return self.clone();
        }
        let n = self.n + other.n;
        let (na, nb, nf) = (self.n as f64, other.n as f64, n as f64);
        let mut out = Self::new(self.mean.len());
        out.n = n;
        for i in 0..self.mean.len() {
            let d = other.mean[i] - self.mean[i];
            out.mean[i] = self.mean[i] + d * nb / nf;
            out.m2[i] = self.m2[i] + other.m2[i] + d * d * na * nb / nf;
        }
        out
    }

    pub fn estimate(&self, i: usize, discarded: u64, seed: u64) -> McEstimate {
        let n = self.n as f64;
        let var = self.m2[i] / (n - 1.0);
        McEstimate {
            mean: self.mean[i],
            stderr: (var.max(0.0) / n).sqrt(),
            n_samples: self.n,
            n_discarded: discarded,
            seed,
        }
    }
}

fn merge_pairwise(mut parts: Vec<Welford>) -> Welford {
    while parts.len() > 1 {
        parts = parts
            .chunks(2)
            .map(|c| if c.len() == 2 { c[0].merge(&c[1]) } else { c[0].clone() })
            .collect();
    }
    parts.pop().expect("at least one chunk")
}

/// Runs `mc` replicates. `replicate` fills one value per output and returns
/// how many degenerate draws it discarded along the way.
pub fn run_replicates<F>(mc: u64, seed: u64, outputs: usize, replicate: F) -> Result<Vec<McEstimate>>
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) -> Result<u64> + Sync,
{
    if mc < 2 {
        return Err(Error::InvalidParameter(
            "at least two Monte Carlo replicates are needed for a standard error".into(),
        ));
    }
    let chunks = mc.div_ceil(CHUNK);
    let parts: Vec<(Welford, u64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = Welford::new(outputs);
            let mut discarded = 0u64;
            let mut y = vec![0.0; outputs];
            for i in c * CHUNK..((c + 1) * CHUNK).min(mc) {
                let mut rng = RngStream::new(seed, i).rng();
                y.iter_mut().for_each(|v| *v = 0.0);
                discarded += replicate(&mut rng, &mut y)?;
                acc.push(&y);
            }
            Ok((acc, discarded))
        })
        .collect::<Result<_>>()?;
    let discarded: u64 = parts.iter().map(|p| p.1).sum();
    let draws = mc + discarded;
    if discarded as f64 > DISCARD_BUDGET * draws as f64 {
        return Err(Error::DiscardBudgetExceeded { discarded, draws });
    }
    let total = merge_pairwise(parts.into_iter().map(|p| p.0).collect());
    Ok((0..outputs).map(|i| total.estimate(i, discarded, seed)).collect())
}

/// Repeats `draw` until it succeeds, counting failures as discards.
pub fn redraw<T, R, F>(rng: &mut R, discarded: &mut u64, mut draw: F) -> Result<T>
where
    F: FnMut(&mut R) -> Option<T>,
{
    for _ in 0..MAX_REDRAWS {
        if let Some(v) = draw(rng) {
            return Ok(v);
        }
        *discarded += 1;
    }
    Err(Error::DiscardBudgetExceeded {
        discarded: *discarded,
        draws: *discarded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn welford_merge_matches_sequential() {
        let data: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut whole = Welford::new(1);
        data.iter().for_each(|v| whole.push(&[*v]));
        let mut a = Welford::new(1);
        let mut b = Welford::new(1);
        data[..313].iter().for_each(|v| a.push(&[*v]));
        data[313..].iter().for_each(|v| b.push(&[*v]));
        let m = a.merge(&b);
        assert!((m.mean[0] - whole.mean[0]).abs() < 1e-12);
        assert!((m.m2[0] - whole.m2[0]).abs() < 1e-9 * whole.m2[0]);
    }

    #[test]
    fn mean_of_uniforms() {
        let est = run_replicates(20_000, 3, 1, |rng, y| {
            y[0] = rng.random::<f64>();
            Ok(0)
        })
        .unwrap();
        assert!((est[0].mean - 0.5).abs() < 4.0 * est[0].stderr);
        let sd = (1.0f64 / 12.0).sqrt() / (20_000f64).sqrt();
        assert!((est[0].stderr / sd - 1.0).abs() < 0.05);
    }

    #[test]
    fn independent_of_thread_count() {
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    run_replicates(5000, 11, 2, |rng, y| {
                        let u: f64 = rng.random();
                        y[0] = u.sin();
                        y[1] = u * u;
                        Ok(0)
                    })
                    .unwrap()
                })
        };
        assert_eq!(run(1), run(3));
        assert_eq!(run(1), run(8));
    }

    #[test]
    fn discard_budget_enforced() {
        let r = run_replicates(1000, 1, 1, |rng, y| {
            let mut d = 0;
            y[0] = redraw(rng, &mut d, |r| {
                let u: f64 = r.random();
                (u > 0.01).then_some(u)
            })?;
            Ok(d)
        });
        assert!(matches!(r, Err(Error::DiscardBudgetExceeded { .. })));
    }
}

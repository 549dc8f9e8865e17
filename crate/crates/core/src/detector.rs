//! Detector colors: each independent particle leaves the detector in an
//! integer state `n` (positive: `n` quanta absorbed, negative: `n` quanta
//! missing relative to the ground state). From `N` shots we form
//!
//! * the extended absorption probability `P(a) = Σ_events color / N`,
//! * the fine-grained distribution `P(n) = N_n / N`,
//! * the coarse view `1 − P(0)` of an observer who only tells zero from
//!   nonzero.
//!
//! Randomness: shot `k` consumes exactly the `k`-th 64-bit output of a
//! ChaCha8 stream keyed by the seed. ChaCha is counter based, so a shard
//! starting at shot `s` seeks to word position `2s` and reproduces the
//! serial sequence; the aggregate is independent of the shard layout.

use std::collections::BTreeMap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported `|n|`.
pub const MAX_COLOR: i64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColorProb {
    pub n: i64,
    pub p: f64,
}

/// Per-particle law of detector responses. JSON: `{"colors": [{"n", "p"}, …]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorModel {
    pub colors: Vec<ColorProb>,
}

impl ColorModel {
    pub fn new(pairs: &[(i64, f64)]) -> Result<Self> {
        let m = ColorModel {
            colors: pairs.iter().map(|&(n, p)| ColorProb { n, p }).collect(),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.colors.is_empty() {
            return Err(Error::InvalidModel("empty support".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for c in &self.colors {
            if !seen.insert(c.n) {
                return Err(Error::InvalidModel(format!("color {} listed twice", c.n)));
            }
            if c.n.abs() > MAX_COLOR {
                return Err(Error::InvalidModel(format!("|{}| exceeds the color cap {MAX_COLOR}", c.n)));
            }
            if !c.p.is_finite() || c.p < 0.0 {
                return Err(Error::InvalidModel(format!("probability {} for color {}", c.p, c.n)));
            }
        }
        let total: f64 = self.colors.iter().map(|c| c.p).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidModel(format!("probabilities sum to {total}")));
        }
        Ok(())
    }

    pub fn prob(&self, n: i64) -> f64 {
        self.colors.iter().find(|c| c.n == n).map_or(0.0, |c| c.p)
    }

    /// Support sorted ascending with cumulative probabilities.
    fn sampler(&self) -> (Vec<i64>, Vec<f64>) {
        let mut sorted = self.colors.clone();
        sorted.sort_by_key(|c| c.n);
        let mut acc = 0.0;
        let cdf = sorted
            .iter()
            .map(|c| {
                acc += c.p;
                acc
            })
            .collect();
        (sorted.iter().map(|c| c.n).collect(), cdf)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColorCount {
    pub n: i64,
    pub count: u64,
    pub p: f64,
}

/// Statistics of a finite run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub shots: u64,
    /// `Σ_events color`, exact.
    pub color_sum: i64,
    /// `N_n` and `P(n) = N_n / N`, ascending in `n`.
    pub counts: Vec<ColorCount>,
    pub p_a: f64,
    pub p_0: f64,
    pub coarse: f64,
    pub mismatch: f64,
}

impl RunResult {
    fn from_counts(shots: u64, counts: &BTreeMap<i64, u64>) -> Self {
        let color_sum: i64 = counts.iter().map(|(&n, &c)| n * c as i64).sum();
        let p_a = color_sum as f64 / shots as f64;
        let p_0 = counts.get(&0).copied().unwrap_or(0) as f64 / shots as f64;
        let coarse = 1.0 - p_0;
        RunResult {
            shots,
            color_sum,
            counts: counts
                .iter()
                .map(|(&n, &count)| ColorCount {
                    n,
                    count,
                    p: count as f64 / shots as f64,
                })
                .collect(),
            p_a,
            p_0,
            coarse,
            mismatch: (p_a - coarse).abs(),
        }
    }
}

/// What the zero-versus-nonzero observer sees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoarseView {
    pub p_0: f64,
    pub one_minus_p0: f64,
}

pub fn coarse_view(r: &RunResult) -> CoarseView {
    CoarseView {
        p_0: r.p_0,
        one_minus_p0: 1.0 - r.p_0,
    }
}

/// `k`-th uniform draw in `[0, 1)` of the stream for `seed`.
fn uniform_from(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn count_shard(model_support: &[i64], cdf: &[f64], seed: u64, start: u64, len: u64) -> BTreeMap<i64, u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(2 * start as u128);
    let mut counts = vec![0u64; model_support.len()];
    for _ in 0..len {
        let u = uniform_from(rng.next_u64());
        let idx = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
        counts[idx] += 1;
    }
    model_support
        .iter()
        .zip(counts)
        .filter(|(_, c)| *c > 0)
        .map(|(&n, c)| (n, c))
        .collect()
}

/// `shots` independent draws split over `shards` contiguous blocks.
pub fn simulate_sharded(model: &ColorModel, shots: u64, seed: u64, shards: usize) -> Result<RunResult> {
    model.validate()?;
    if shots == 0 {
        return Err(Error::InvalidInput("shot count must be at least 1".into()));
    }
    let shards = shards.clamp(1, shots.min(u32::MAX as u64) as usize) as u64;
    let (support, cdf) = model.sampler();
    let per = shots / shards;
    let extra = shots % shards;
    let blocks: Vec<(u64, u64)> = (0..shards)
        .map(|s| {
            let start = s * per + s.min(extra);
            let len = per + u64::from(s < extra);
            (start, len)
        })
        .collect();
    let partial: Vec<BTreeMap<i64, u64>> = blocks
        .par_iter()
        .map(|&(start, len)| count_shard(&support, &cdf, seed, start, len))
        .collect();
    let mut total = BTreeMap::new();
    for m in partial {
        for (n, c) in m {
            *total.entry(n).or_insert(0) += c;
        }
    }
    Ok(RunResult::from_counts(shots, &total))
}

/// Default shard layout: one shard per 2¹⁶ shots, at most 64.
pub fn simulate(model: &ColorModel, shots: u64, seed: u64) -> Result<RunResult> {
    let shards = (shots / 65_536).clamp(1, 64) as usize;
    simulate_sharded(model, shots, seed, shards)
}

/// Closed-form limits of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactExpectations {
    pub p_a: f64,
    pub p_n: Vec<ColorProb>,
    pub p_0: f64,
    pub coarse: f64,
    pub mismatch: f64,
    /// Standard deviation of a single color draw.
    pub stddev: f64,
}

pub fn exact_expectations(model: &ColorModel) -> Result<ExactExpectations> {
    model.validate()?;
    let mean: f64 = model.colors.iter().map(|c| c.n as f64 * c.p).sum();
    let second: f64 = model.colors.iter().map(|c| (c.n as f64).powi(2) * c.p).sum();
    let p_0 = model.prob(0);
    let mut p_n = model.colors.clone();
    p_n.sort_by_key(|c| c.n);
    Ok(ExactExpectations {
        p_a: mean,
        p_n,
        p_0,
        coarse: 1.0 - p_0,
        mismatch: (mean - (1.0 - p_0)).abs(),
        stddev: (second - mean * mean).max(0.0).sqrt(),
    })
}

/// The extended prediction `P(a)` next to the fine-grained truth it
/// summarizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictivityReport {
    pub p_a: f64,
    pub table: Vec<ColorProb>,
    pub coarse: CoarseView,
    pub mismatch: f64,
}

pub fn predictivity_report(model: &ColorModel) -> Result<PredictivityReport> {
    let e = exact_expectations(model)?;
    Ok(PredictivityReport {
        p_a: e.p_a,
        table: e.p_n,
        coarse: CoarseView {
            p_0: e.p_0,
            one_minus_p0: e.coarse,
        },
        mismatch: e.mismatch,
    })
}

/// Two models with different color laws and the same `P(a) = target`:
/// one on `{⌊t⌋, ⌊t⌋+1}`, one on `{⌊t⌋−1, ⌊t⌋+2}`.
pub fn equal_pa_pair(target: f64) -> Result<(ColorModel, ColorModel)> {
    if !target.is_finite() || target.abs() > (MAX_COLOR - 2) as f64 {
        return Err(Error::InvalidModel(format!("target {target} outside the color cap")));
    }
    let f = target.floor();
    let frac = target - f;
    let base = f as i64;
    let first = if frac == 0.0 {
        ColorModel::new(&[(base, 1.0)])?
    } else {
        ColorModel::new(&[(base, 1.0 - frac), (base + 1, frac)])?
    };
    let low = (2.0 - frac) / 3.0;
    let second = ColorModel::new(&[(base - 1, low), (base + 2, 1.0 - low)])?;
    Ok((first, second))
}

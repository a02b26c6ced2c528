//! Ulam balls and the distribution of the longest increasing subsequence.
//!
//! The ball of radius `r` around the identity is exactly the set of
//! permutations with `L(σ) >= n - r`, so ball sizes are tail sums of the LIS
//! distribution and every packing bound below reduces to one enumeration.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::CodeParams;
use crate::error::{Error, Result};
use crate::perm::{factorial_u64, lis_of, next_permutation, random_permutation_with, unrank_lexicographic};

/// Largest `n` enumerated exhaustively unless the caller raises it.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 9;

/// Hard ceiling: `20!` is the last factorial that fits in `u64`.
const MAX_ENUMERATION: usize = 20;

/// Permutations per enumeration chunk; the partition is independent of the
/// worker count, so totals are too.
const ENUM_CHUNK: u64 = 40_320;

/// Samples per random stream.
const SAMPLE_CHUNK: u64 = 16_384;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    Exact,
    Sampled,
}

/// Counts of `L(σ) = k` for `k = 1..=n`, over all of `S_n` or over samples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LisDistribution {
    pub n: usize,
    pub kind: DistributionKind,
    pub counts: BTreeMap<usize, u64>,
    pub total: u64,
    pub seed: Option<u64>,
}

impl LisDistribution {
    fn from_histogram(n: usize, kind: DistributionKind, hist: &[u64], seed: Option<u64>) -> Self {
        let counts: BTreeMap<usize, u64> = (1..=n).map(|k| (k, hist[k])).collect();
        let total = counts.values().sum();
        LisDistribution {
            n,
            kind,
            counts,
            total,
            seed,
        }
    }

    pub fn count(&self, k: usize) -> u64 {
        self.counts.get(&k).copied().unwrap_or(0)
    }

    /// Number of permutations (or samples) with `L >= k`.
    pub fn tail(&self, k: usize) -> u64 {
        self.counts.range(k.max(1)..).map(|(_, c)| c).sum()
    }

    /// `P(L_n >= k)` as a float.
    pub fn tail_probability(&self, k: usize) -> f64 {
        self.tail(k) as f64 / self.total as f64
    }

    /// Cache text: `"n total"`, then `"k count"` per line, sorted by `k`.
    pub fn to_cache_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.total);
        for (k, c) in &self.counts {
            writeln!(out, "{k} {c}").unwrap();
        }
        out
    }

    pub fn from_cache_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let pair = |line: usize, l: &str| -> Result<(u64, u64)> {
            let toks: Vec<&str> = l.split_whitespace().collect();
            let bad = || Error::Parse {
                line: line + 1,
                column: 1,
                message: format!("expected two integers, found {l:?}"),
            };
            if toks.len() != 2 {
                return Err(bad());
            }
            Ok((toks[0].parse().map_err(|_| bad())?, toks[1].parse().map_err(|_| bad())?))
        };
        let (line, header) = lines.next().ok_or_else(|| Error::Parse {
            line: 1,
            column: 1,
            message: "empty distribution file".into(),
        })?;
        let (n, total) = pair(line, header)?;
        let n = n as usize;
        let mut counts = BTreeMap::new();
        for (line, l) in lines {
            let (k, c) = pair(line, l)?;
            if k == 0 || k as usize > n {
                return Err(Error::Parse {
                    line: line + 1,
                    column: 1,
                    message: format!("length {k} outside 1..={n}"),
                });
            }
            counts.insert(k as usize, c);
        }
        let sum: u64 = counts.values().sum();
        if sum != total || counts.len() != n {
            return Err(Error::Parse {
                line: 1,
                column: 1,
                message: format!("counts sum to {sum} over {} lengths, header says {total} over {n}", counts.len()),
            });
        }
        let kind = if total == factorial_u64(n) {
            DistributionKind::Exact
        } else {
            DistributionKind::Sampled
        };
        Ok(LisDistribution {
            n,
            kind,
            counts,
            total,
            seed: None,
        })
    }
}

fn check_capacity(n: usize, limit: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParams("n must be at least 1".into()));
    }
    if n > limit.min(MAX_ENUMERATION) {
        return Err(Error::Capacity(format!(
            "n = {n} exceeds the enumeration limit {}; estimate with Monte Carlo sampling instead",
            limit.min(MAX_ENUMERATION)
        )));
    }
    Ok(())
}

/// Exact LIS distribution over `S_n`, `n <= DEFAULT_ENUMERATION_LIMIT`.
pub fn lis_distribution_exact(n: usize) -> Result<LisDistribution> {
    lis_distribution_exact_with_limit(n, DEFAULT_ENUMERATION_LIMIT)
}

pub fn lis_distribution_exact_with_limit(n: usize, limit: usize) -> Result<LisDistribution> {
    check_capacity(n, limit)?;
    let total = factorial_u64(n);
    let chunks = total.div_ceil(ENUM_CHUNK);
    let hist = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut hist = vec![0u64; n + 1];
            let start = c * ENUM_CHUNK;
            let len = ENUM_CHUNK.min(total - start);
            let mut v = unrank_lexicographic(n, start);
            for i in 0..len {
                hist[lis_of(&v)] += 1;
                if i + 1 < len {
                    next_permutation(&mut v);
                }
            }
            hist
        })
        .reduce(|| vec![0u64; n + 1], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect());
    Ok(LisDistribution::from_histogram(n, DistributionKind::Exact, &hist, None))
}

/// Runs `f` over `samples` uniform permutations in fixed seeded chunks and
/// returns the per-chunk results in order.
fn sample_chunks<T, F>(n: usize, samples: u64, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut dyn Iterator<Item = usize>) -> T + Sync,
{
    let chunks = samples.div_ceil(SAMPLE_CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let len = SAMPLE_CHUNK.min(samples - c * SAMPLE_CHUNK);
            let mut lengths = (0..len).map(|_| lis_of(random_permutation_with(n, &mut rng).zero_based()));
            f(&mut lengths)
        })
        .collect()
}

/// Histogram of `L_n` over `samples` random permutations.
pub fn lis_distribution_sampled(n: usize, samples: u64, seed: u64) -> Result<LisDistribution> {
    if n == 0 || samples == 0 {
        return Err(Error::InvalidParams("need n >= 1 and samples >= 1".into()));
    }
    let hist = sample_chunks(n, samples, seed, |it| {
        let mut h = vec![0u64; n + 1];
        for k in it {
            h[k] += 1;
        }
        h
    })
    .into_iter()
    .reduce(|a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect())
    .unwrap();
    Ok(LisDistribution::from_histogram(n, DistributionKind::Sampled, &hist, Some(seed)))
}

/// `|B(r)|` for `r = 0..n-1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallTable {
    pub n: usize,
    pub sizes: Vec<u64>,
}

impl BallTable {
    pub fn from_distribution(dist: &LisDistribution) -> Result<Self> {
        if dist.kind != DistributionKind::Exact {
            return Err(Error::InvalidParams("ball sizes need the exact distribution".into()));
        }
        let n = dist.n;
        Ok(BallTable {
            n,
            sizes: (0..n).map(|r| dist.tail(n - r)).collect(),
        })
    }

    pub fn size(&self, r: usize) -> u64 {
        self.sizes[r.min(self.n - 1)]
    }
}

pub fn ball_table(n: usize) -> Result<BallTable> {
    BallTable::from_distribution(&lis_distribution_exact(n)?)
}

/// `|B(r)| = |{σ : d_U(e, σ) <= r}|`.
pub fn ball_size(n: usize, r: usize) -> Result<u64> {
    if n >= 1 && r >= n {
        return Err(Error::InvalidParams(format!("radius {r} outside 0..={}", n - 1)));
    }
    Ok(ball_table(n)?.size(r))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpherePacking {
    /// `⌈n! / |B(Δ)|⌉`.
    pub lower: u64,
    /// `⌊n! / |B(⌊Δ/2⌋)|⌋`.
    pub upper: u64,
    pub packing_radius: usize,
    /// Set when `Δ` is odd and the radius was rounded down.
    pub odd_delta: bool,
}

pub fn sphere_packing_bounds(params: CodeParams) -> Result<SpherePacking> {
    sphere_packing_from_table(params, &ball_table(params.n)?)
}

pub fn sphere_packing_from_table(params: CodeParams, table: &BallTable) -> Result<SpherePacking> {
    if table.n != params.n {
        return Err(Error::Dimension {
            left: table.n,
            right: params.n,
        });
    }
    let total = factorial_u64(params.n);
    let delta = params.delta();
    let radius = delta / 2;
    Ok(SpherePacking {
        lower: total.div_ceil(table.size(delta)),
        upper: total / table.size(radius),
        packing_radius: radius,
        odd_delta: delta % 2 == 1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: u64,
    pub hits: u64,
}

/// Monte-Carlo estimate of `P(L_n >= k)` with its binomial standard error.
pub fn lis_prob_mc(n: usize, k: usize, samples: u64, seed: u64) -> Result<McEstimate> {
    if n == 0 || k == 0 || k > n || samples == 0 {
        return Err(Error::InvalidParams(format!(
            "need 1 <= k <= n and samples >= 1, got n = {n}, k = {k}, samples = {samples}"
        )));
    }
    let hits: u64 = sample_chunks(n, samples, seed, |it| it.filter(|&l| l >= k).count() as u64)
        .into_iter()
        .sum();
    let p = hits as f64 / samples as f64;
    Ok(McEstimate {
        estimate: p,
        stderr: (p * (1.0 - p) / samples as f64).sqrt(),
        samples,
        hits,
    })
}

/// `(L_n - 2√n) / n^{1/6}` for each of `samples` random permutations.
pub fn clt_samples(n: usize, samples: u64, seed: u64) -> Result<Vec<f64>> {
    if n == 0 || samples == 0 {
        return Err(Error::InvalidParams("need n >= 1 and samples >= 1".into()));
    }
    let centre = 2.0 * (n as f64).sqrt();
    let scale = (n as f64).powf(1.0 / 6.0);
    Ok(sample_chunks(n, samples, seed, |it| {
        it.map(|l| (l as f64 - centre) / scale).collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect())
}

/// On-disk cache of exact distributions, one `lis_n{n}.txt` file per `n`.
#[derive(Debug, Clone)]
pub struct DistributionCache {
    dir: PathBuf,
}

impl DistributionCache {
    pub fn new(dir: impl AsRef<Path>) -> Self {
        DistributionCache {
            dir: dir.as_ref().to_path_buf(),
        }
    }

    pub fn path(&self, n: usize) -> PathBuf {
        self.dir.join(format!("lis_n{n}.txt"))
    }

    pub fn load(&self, n: usize) -> Result<Option<LisDistribution>> {
        let path = self.path(n);
        if !path.exists() {
            return Ok(None);
        }
        let dist = LisDistribution::from_cache_text(&std::fs::read_to_string(path)?)?;
        if dist.n != n || dist.kind != DistributionKind::Exact {
            return Err(Error::Parse {
                line: 1,
                column: 1,
                message: format!("cache file for n = {n} holds something else"),
            });
        }
        Ok(Some(dist))
    }

    pub fn store(&self, dist: &LisDistribution) -> Result<()> {
        std::fs::create_dir_all(&self.dir)?;
        std::fs::write(self.path(dist.n), dist.to_cache_text())?;
        Ok(())
    }

    pub fn load_or_compute(&self, n: usize, limit: usize) -> Result<LisDistribution> {
        if let Some(d) = self.load(n)? {
            return Ok(d);
        }
        let d = lis_distribution_exact_with_limit(n, limit)?;
        self.store(&d)?;
        Ok(d)
    }
}

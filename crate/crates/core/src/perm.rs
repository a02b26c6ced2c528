//! Permutations in one-line notation, translocations, and the Ulam distance.
//!
//! Symbols and positions are 1-based on every public surface. Internally a
//! permutation of length `n` stores the 0-based images `σ(i) - 1`.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A permutation of `[n]` in one-line notation.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation(Vec<u32>);

impl Permutation {
    /// The identity `e = [1, 2, ..., n]`.
    pub fn identity(n: usize) -> Self {
        assert!(n >= 1, "permutations have length at least 1");
        Permutation((0..n as u32).collect())
    }

    /// The reversal `[n, n-1, ..., 1]`.
    pub fn reversal(n: usize) -> Self {
        assert!(n >= 1, "permutations have length at least 1");
        Permutation((0..n as u32).rev().collect())
    }

    /// Builds a permutation from 1-based images, rejecting non-bijections.
    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        let n = images.len();
        if n == 0 {
            return Err(Error::NotPermutation("empty sequence".into()));
        }
        let mut seen = vec![false; n];
        let mut out = Vec::with_capacity(n);
        for (pos, &v) in images.iter().enumerate() {
            if v == 0 || v > n {
                return Err(Error::NotPermutation(format!(
                    "symbol {v} at position {} is outside 1..={n}",
                    pos + 1
                )));
            }
            if std::mem::replace(&mut seen[v - 1], true) {
                return Err(Error::NotPermutation(format!(
                    "symbol {v} appears more than once"
                )));
            }
            out.push((v - 1) as u32);
        }
        Ok(Permutation(out))
    }

    /// Builds a permutation from 0-based images, rejecting non-bijections.
    pub fn from_zero_based(images: Vec<u32>) -> Result<Self> {
        let n = images.len();
        if n == 0 {
            return Err(Error::NotPermutation("empty sequence".into()));
        }
        let mut seen = vec![false; n];
        for &v in &images {
            let v = v as usize;
            if v >= n || std::mem::replace(&mut seen[v], true) {
                return Err(Error::NotPermutation(format!(
                    "0-based images {images:?} are not a bijection on 0..{n}"
                )));
            }
        }
        Ok(Permutation(images))
    }

    pub(crate) fn from_zero_based_unchecked(images: Vec<u32>) -> Self {
        debug_assert!(Self::from_zero_based(images.clone()).is_ok());
        Permutation(images)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `σ(i)` for a 1-based position `i`.
    pub fn image(&self, i: usize) -> usize {
        self.0[i - 1] as usize + 1
    }

    pub fn zero_based(&self) -> &[u32] {
        &self.0
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.0.iter().map(|&v| v as usize + 1).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &v)| i as u32 == v)
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self)
    }
}

/// Serialized as the 1-based one-line form.
impl serde::Serialize for Permutation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(|&v| v + 1))
    }
}

impl<'de> serde::Deserialize<'de> for Permutation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let images = Vec::<usize>::deserialize(d)?;
        Permutation::from_one_based(&images).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", v + 1)?;
        }
        Ok(())
    }
}

impl FromStr for Permutation {
    type Err = Error;

    /// Parses the text form `"2 3 1 5 4"`. Errors report a 1-based column.
    fn from_str(s: &str) -> Result<Self> {
        parse_line(s, 1)
    }
}

/// Parses one whitespace-separated line, reporting errors against `line`.
pub fn parse_line(s: &str, line: usize) -> Result<Permutation> {
    let mut images = Vec::new();
    let mut offset = 0;
    for token in s.split_whitespace() {
        let column = s[offset..].find(token).map(|k| offset + k).unwrap_or(offset) + 1;
        offset = column - 1 + token.len();
        let v: usize = token.parse().map_err(|_| Error::Parse {
            line,
            column,
            message: format!("expected a positive integer, found {token:?}"),
        })?;
        images.push(v);
    }
    Permutation::from_one_based(&images).map_err(|e| match e {
        Error::NotPermutation(msg) => Error::Parse {
            line,
            column: 1,
            message: format!("not a permutation: {msg}"),
        },
        other => other,
    })
}

fn check_same_len(a: &Permutation, b: &Permutation) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

/// Composition `στ` with `(στ)(i) = σ(τ(i))`.
pub fn compose(sigma: &Permutation, tau: &Permutation) -> Result<Permutation> {
    check_same_len(sigma, tau)?;
    Ok(Permutation(
        tau.0.iter().map(|&t| sigma.0[t as usize]).collect(),
    ))
}

pub fn inverse(sigma: &Permutation) -> Permutation {
    let mut inv = vec![0u32; sigma.len()];
    for (i, &v) in sigma.0.iter().enumerate() {
        inv[v as usize] = i as u32;
    }
    Permutation(inv)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TranslocationKind {
    Right,
    Left,
}

/// A translocation on positions `i < j` (1-based).
///
/// `Right` lifts the symbol at position `i` and reinserts it at position `j`.
/// `Left` lifts the symbol at position `j` and reinserts it at position `i`,
/// so `Left(i, j)` undoes `Right(i, j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Translocation {
    pub kind: TranslocationKind,
    pub i: usize,
    pub j: usize,
}

impl Translocation {
    pub fn new(kind: TranslocationKind, i: usize, j: usize) -> Result<Self> {
        if i == 0 || i >= j {
            return Err(Error::Index(format!(
                "translocation needs 1 <= i < j, got i = {i}, j = {j}"
            )));
        }
        Ok(Translocation { kind, i, j })
    }

    pub fn right(i: usize, j: usize) -> Result<Self> {
        Self::new(TranslocationKind::Right, i, j)
    }

    pub fn left(i: usize, j: usize) -> Result<Self> {
        Self::new(TranslocationKind::Left, i, j)
    }

    pub fn inverse(&self) -> Self {
        let kind = match self.kind {
            TranslocationKind::Right => TranslocationKind::Left,
            TranslocationKind::Left => TranslocationKind::Right,
        };
        Translocation { kind, ..*self }
    }

    /// Every translocation of `S_n`, rights before lefts, each in `(i, j)` order.
    pub fn all(n: usize) -> Vec<Translocation> {
        let mut out = Vec::with_capacity(n * n.saturating_sub(1));
        for kind in [TranslocationKind::Right, TranslocationKind::Left] {
            for i in 1..=n {
                for j in i + 1..=n {
                    out.push(Translocation { kind, i, j });
                }
            }
        }
        out
    }
}

/// Returns `σt`: the one-line form of `σ` with a single symbol moved.
pub fn apply_translocation(sigma: &Permutation, t: Translocation) -> Result<Permutation> {
    let n = sigma.len();
    if t.i == 0 || t.i >= t.j || t.j > n {
        return Err(Error::Index(format!(
            "translocation ({}, {}) is not valid for n = {n}",
            t.i, t.j
        )));
    }
    let mut out = sigma.0.clone();
    let window = &mut out[t.i - 1..t.j];
    match t.kind {
        TranslocationKind::Right => window.rotate_left(1),
        TranslocationKind::Left => window.rotate_right(1),
    }
    Ok(Permutation(out))
}

/// Length of a longest strictly increasing subsequence, by patience sorting.
pub fn lis_of<T: Ord + Copy>(seq: &[T]) -> usize {
    let mut tails: Vec<T> = Vec::with_capacity(16);
    for &x in seq {
        let k = tails.partition_point(|&t| t < x);
        if k == tails.len() {
            tails.push(x);
        } else {
            tails[k] = x;
        }
    }
    tails.len()
}

/// `L(σ)`, the length of a longest increasing subsequence of `σ`.
pub fn lis_length(sigma: &Permutation) -> usize {
    lis_of(&sigma.0)
}

/// `L(σ, τ)`, the longest common subsequence of two permutations.
///
/// Relabelling the symbols of `σ` by their positions in `τ` turns common
/// subsequences into increasing ones, so this is `L(τ⁻¹σ)`.
pub fn lcs_length(sigma: &Permutation, tau: &Permutation) -> Result<usize> {
    check_same_len(sigma, tau)?;
    Ok(lcs_unchecked(&sigma.0, &tau.0))
}

pub(crate) fn lcs_unchecked(sigma: &[u32], tau: &[u32]) -> usize {
    let n = sigma.len();
    let mut pos = [0u32; 32];
    if n <= 32 {
        for (i, &v) in tau.iter().enumerate() {
            pos[v as usize] = i as u32;
        }
        let mut relabelled = [0u32; 32];
        for (k, &v) in sigma.iter().enumerate() {
            relabelled[k] = pos[v as usize];
        }
        return lis_of(&relabelled[..n]);
    }
    let mut pos = vec![0u32; n];
    for (i, &v) in tau.iter().enumerate() {
        pos[v as usize] = i as u32;
    }
    let relabelled: Vec<u32> = sigma.iter().map(|&v| pos[v as usize]).collect();
    lis_of(&relabelled)
}

/// `d_U(σ, τ) = n - L(σ, τ)`.
pub fn ulam_distance(sigma: &Permutation, tau: &Permutation) -> Result<usize> {
    Ok(sigma.len() - lcs_length(sigma, tau)?)
}

pub(crate) fn distance_unchecked(sigma: &[u32], tau: &[u32]) -> usize {
    sigma.len() - lcs_unchecked(sigma, tau)
}

/// A uniformly random element of `S_n`, deterministic in `seed`.
pub fn random_permutation(n: usize, seed: u64) -> Permutation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_permutation_with(n, &mut rng)
}

pub fn random_permutation_with<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Permutation {
    assert!(n >= 1, "permutations have length at least 1");
    let mut v: Vec<u32> = (0..n as u32).collect();
    v.shuffle(rng);
    Permutation(v)
}

/// Steps `v` to its lexicographic successor; returns `false` at the last one.
pub fn next_permutation(v: &mut [u32]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// The `rank`-th permutation of `0..n` in lexicographic order.
pub fn unrank_lexicographic(n: usize, mut rank: u64) -> Vec<u32> {
    let mut pool: Vec<u32> = (0..n as u32).collect();
    let mut out = Vec::with_capacity(n);
    for k in (0..n).rev() {
        let f = factorial_u64(k);
        let idx = (rank / f) as usize;
        rank %= f;
        out.push(pool.remove(idx));
    }
    out
}

/// Lexicographic rank of a permutation of `0..n`.
pub fn rank_lexicographic(v: &[u32]) -> u64 {
    let n = v.len();
    let mut rank = 0u64;
    for i in 0..n {
        let smaller = v[i + 1..].iter().filter(|&&x| x < v[i]).count() as u64;
        rank += smaller * factorial_u64(n - 1 - i);
    }
    rank
}

pub(crate) fn factorial_u64(k: usize) -> u64 {
    (1..=k as u64).product()
}

/// All of `S_n` in lexicographic order.
pub fn all_permutations(n: usize) -> impl Iterator<Item = Permutation> {
    let mut cur: Option<Vec<u32>> = Some((0..n as u32).collect());
    std::iter::from_fn(move || {
        let out = cur.take()?;
        let mut next = out.clone();
        if next_permutation(&mut next) {
            cur = Some(next);
        }
        Some(Permutation(out))
    })
}

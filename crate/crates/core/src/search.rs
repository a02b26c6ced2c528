//! Exact searches for Ulam-metric codes.
//!
//! Two permutations whose symbols `1..=n-d+1` appear in the same relative
//! order share a common subsequence of length `n-d+1`, so they sit at
//! distance at most `d-1`. A code therefore uses each such color class at
//! most once, and a code meeting the Singleton bound uses each exactly once.
//!
//! The metric is invariant under relabelling symbols, so any code can be
//! moved to contain the identity. With the identity fixed, the remaining
//! codewords are drawn from permutations with `L(σ) <= n-d`, and the search
//! is a clique search over that candidate set with an explicit adjacency
//! bitset.

use std::fmt::Write as _;
use std::time::Duration;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::ball::{sphere_packing_bounds, DEFAULT_ENUMERATION_LIMIT};
use crate::bounds::{singleton_upper, CodeParams};
use crate::budget::{Budget, Meter};
use crate::error::{Error, Result};
use crate::ip::ip_upper_bound;
use crate::perm::{
    distance_unchecked, factorial_u64, lcs_unchecked, lis_of, next_permutation, parse_line, rank_lexicographic,
    Permutation,
};

/// Default ceiling on the number of candidate vertices.
pub const DEFAULT_VERTEX_LIMIT: usize = 16_384;

/// The relative order of symbols `1..=n-d+1` in a permutation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ColorClass {
    pub pattern: Permutation,
}

impl ColorClass {
    /// Position of the pattern in lexicographic order.
    pub fn rank(&self) -> u64 {
        rank_lexicographic(self.pattern.zero_based())
    }
}

fn pattern_of(v: &[u32], m: usize) -> Vec<u32> {
    v.iter().copied().filter(|&x| (x as usize) < m).collect()
}

pub fn color_class(sigma: &Permutation, params: CodeParams) -> Result<ColorClass> {
    if params.d < 2 {
        return Err(Error::InvalidParams("color classes need d >= 2".into()));
    }
    if sigma.len() != params.n {
        return Err(Error::Dimension {
            left: sigma.len(),
            right: params.n,
        });
    }
    let pattern = pattern_of(sigma.zero_based(), params.pattern_len());
    Ok(ColorClass {
        pattern: Permutation::from_zero_based_unchecked(pattern),
    })
}

/// A set of permutations with its exact minimum pairwise distance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Code {
    pub params: CodeParams,
    pub words: Vec<Permutation>,
    /// `n` when the code has fewer than two words.
    pub min_distance: usize,
}

impl Code {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// `"n d"`, then one permutation per line.
    pub fn to_file_text(&self) -> String {
        let mut out = format!("{} {}\n", self.params.n, self.params.d);
        for w in &self.words {
            writeln!(out, "{w}").unwrap();
        }
        out
    }
}

/// Parses a code file into its parameters and words, without checking them.
pub fn read_code_file(text: &str) -> Result<(CodeParams, Vec<Permutation>)> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::Parse {
        line: 1,
        column: 1,
        message: "empty code file".into(),
    })?;
    let nums: Vec<usize> = header
        .split_whitespace()
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Parse {
            line: 1,
            column: 1,
            message: format!("header {header:?} should be \"n d\""),
        })?;
    let [n, d] = nums[..] else {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: format!("header {header:?} should be \"n d\""),
        });
    };
    let params = CodeParams::new(n, d)?;
    let words = lines
        .map(|(k, l)| parse_line(l, k + 1))
        .collect::<Result<Vec<_>>>()?;
    Ok((params, words))
}

/// Checks every pair and returns the code, or the closest offending pair.
pub fn verify_code(words: &[Permutation], params: CodeParams) -> Result<Code> {
    if words.is_empty() {
        return Err(Error::InvalidParams("a code needs at least one word".into()));
    }
    if let Some(w) = words.iter().find(|w| w.len() != params.n) {
        return Err(Error::Dimension {
            left: w.len(),
            right: params.n,
        });
    }
    let n = params.n;
    let mut closest: Option<(usize, usize, usize)> = None;
    for i in 0..words.len() {
        for j in i + 1..words.len() {
            let dist = distance_unchecked(words[i].zero_based(), words[j].zero_based());
            if closest.is_none_or(|(_, _, c)| dist < c) {
                closest = Some((i, j, dist));
            }
        }
    }
    let min_distance = closest.map_or(n, |(_, _, c)| c);
    if let Some((i, j, dist)) = closest {
        if dist < params.d {
            return Err(Error::DistanceViolation {
                first: words[i].to_string(),
                second: words[j].to_string(),
                distance: dist,
                required: params.d,
            });
        }
    }
    Ok(Code {
        params,
        words: words.to_vec(),
        min_distance,
    })
}

/// Major index: the sum of the 1-based descent positions.
fn major_index(v: &[u32]) -> usize {
    v.windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] > w[1])
        .map(|(i, _)| i + 1)
        .sum()
}

/// The `(n-1)!` permutations with major index divisible by `n`, a code with
/// minimum distance 2 for every `n >= 2`.
pub fn major_index_code(n: usize) -> Result<Vec<Permutation>> {
    if !(2..=12).contains(&n) {
        return Err(Error::InvalidParams(format!("major-index code needs 2 <= n <= 12, got {n}")));
    }
    let mut v: Vec<u32> = (0..n as u32).collect();
    let mut out = Vec::with_capacity(factorial_u64(n - 1) as usize);
    loop {
        if major_index(&v) % n == 0 {
            out.push(Permutation::from_zero_based_unchecked(v.clone()));
        }
        if !next_permutation(&mut v) {
            return Ok(out);
        }
    }
}

/// Distance at least 2 means no two words share a subsequence of length
/// `n-1`; checks that the single-deletion sets are pairwise disjoint in
/// `O(|C| n)` rather than comparing all pairs.
pub fn has_distance_two(words: &[Permutation]) -> bool {
    let mut seen = std::collections::HashSet::with_capacity(words.len() * words.first().map_or(0, |w| w.len()));
    for w in words {
        let v = w.zero_based();
        for skip in 0..v.len() {
            let mut key = 0u64;
            for (k, &x) in v.iter().enumerate() {
                if k != skip {
                    key = key * 16 + x as u64;
                }
            }
            // a word's own deletions are distinct, so any repeat is a clash
            if !seen.insert(key) {
                return false;
            }
        }
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassOrder {
    /// Next class in pattern order.
    #[default]
    Lexicographic,
    /// Class with the fewest surviving candidates, ties by pattern order.
    FewestCandidates,
    /// Greedy coloring of the surviving candidates into independent sets;
    /// each vertex is tried with its own color number as bound, last color
    /// first.
    Coloring,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub class_order: ClassOrder,
    pub fix_identity: bool,
    pub vertex_limit: usize,
    /// Known upper bound on `A(n, d)`; computed when absent.
    pub upper_bound: Option<u64>,
    /// Share of the budget spent looking for a Singleton-optimal code first.
    pub singleton_share: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            class_order: ClassOrder::Lexicographic,
            fix_identity: true,
            vertex_limit: DEFAULT_VERTEX_LIMIT,
            upper_bound: None,
            singleton_share: 0.5,
        }
    }
}

struct Bits;

impl Bits {
    fn get(b: &[u64], i: usize) -> bool {
        b[i / 64] >> (i % 64) & 1 == 1
    }

    fn set(b: &mut [u64], i: usize) {
        b[i / 64] |= 1 << (i % 64);
    }

    fn clear(b: &mut [u64], i: usize) {
        b[i / 64] &= !(1 << (i % 64));
    }

    /// Members of `b` in `lo..hi`.
    fn count_range(b: &[u64], lo: usize, hi: usize) -> u32 {
        if lo >= hi {
            return 0;
        }
        let (wl, wh) = (lo / 64, (hi - 1) / 64);
        let low_mask = !0u64 << (lo % 64);
        let high_mask = !0u64 >> (63 - (hi - 1) % 64);
        if wl == wh {
            return (b[wl] & low_mask & high_mask).count_ones();
        }
        let mut c = (b[wl] & low_mask).count_ones() + (b[wh] & high_mask).count_ones();
        for w in &b[wl + 1..wh] {
            c += w.count_ones();
        }
        c
    }

    fn clear_range(b: &mut [u64], lo: usize, hi: usize) {
        for i in lo..hi {
            Bits::clear(b, i);
        }
    }

    fn first(b: &[u64]) -> Option<usize> {
        b.iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(k, w)| k * 64 + w.trailing_zeros() as usize)
    }

    fn iter_range(b: &[u64], lo: usize, hi: usize) -> impl Iterator<Item = usize> + '_ {
        (lo..hi).filter(move |&i| Bits::get(b, i))
    }
}

/// Candidates grouped by color class, with their compatibility graph.
struct Graph {
    params: CodeParams,
    /// Zero-based one-line forms, sorted by (class rank, lexicographic).
    vertices: Vec<Vec<u32>>,
    /// `class_start[c]..class_start[c+1]` is class `c`'s vertex range;
    /// classes are all `(n-d+1)!` patterns, empty ones included.
    class_start: Vec<usize>,
    words: usize,
    adjacency: Vec<u64>,
    identity_fixed: bool,
    identity_class: usize,
}

impl Graph {
    fn build(params: CodeParams, fix_identity: bool, limit: usize) -> Result<Self> {
        let n = params.n;
        let m = params.pattern_len();
        if n > DEFAULT_ENUMERATION_LIMIT + 1 {
            return Err(Error::Capacity(format!("n = {n} is beyond exhaustive code search")));
        }
        let mut tagged: Vec<(u64, Vec<u32>)> = Vec::new();
        let mut v: Vec<u32> = (0..n as u32).collect();
        loop {
            if !fix_identity || lis_of(&v) <= n - params.d {
                if tagged.len() == limit {
                    return Err(Error::Capacity(format!(
                        "more than {limit} candidate codewords at (n, d) = ({n}, {})",
                        params.d
                    )));
                }
                tagged.push((rank_lexicographic(&pattern_of(&v, m)), v.clone()));
            }
            if !next_permutation(&mut v) {
                break;
            }
        }
        // enumeration is lexicographic, so a stable sort keeps members ordered
        tagged.sort_by_key(|t| t.0);
        let classes = factorial_u64(m) as usize;
        let mut class_start = vec![0usize; classes + 1];
        for (c, _) in &tagged {
            class_start[*c as usize + 1] += 1;
        }
        for c in 0..classes {
            class_start[c + 1] += class_start[c];
        }
        let vertices: Vec<Vec<u32>> = tagged.into_iter().map(|t| t.1).collect();
        let count = vertices.len();
        let words = count.div_ceil(64).max(1);
        let mut adjacency = vec![0u64; count * words];
        let max_lcs = n - params.d;
        for i in 0..count {
            for j in i + 1..count {
                if lcs_unchecked(&vertices[i], &vertices[j]) <= max_lcs {
                    Bits::set(&mut adjacency[i * words..(i + 1) * words], j);
                    Bits::set(&mut adjacency[j * words..(j + 1) * words], i);
                }
            }
        }
        Ok(Graph {
            params,
            vertices,
            class_start,
            words,
            adjacency,
            identity_fixed: fix_identity,
            identity_class: 0,
        })
    }

    fn len(&self) -> usize {
        self.vertices.len()
    }

    fn classes(&self) -> usize {
        self.class_start.len() - 1
    }

    fn row(&self, v: usize) -> &[u64] {
        &self.adjacency[v * self.words..(v + 1) * self.words]
    }

    fn all(&self) -> Vec<u64> {
        let mut b = vec![0u64; self.words];
        for i in 0..self.len() {
            Bits::set(&mut b, i);
        }
        b
    }

    fn class_count(&self, p: &[u64], c: usize) -> u32 {
        Bits::count_range(p, self.class_start[c], self.class_start[c + 1])
    }

    /// Whether `row ∩ p` meets class `c`.
    fn meets(&self, row: &[u64], p: &[u64], c: usize) -> bool {
        let (lo, hi) = (self.class_start[c], self.class_start[c + 1]);
        if lo >= hi {
            return false;
        }
        let (wl, wh) = (lo / 64, (hi - 1) / 64);
        (wl..=wh).any(|w| {
            let mut m = row[w] & p[w];
            if w == wl {
                m &= !0u64 << (lo % 64);
            }
            if w == wh {
                m &= !0u64 >> (63 - (hi - 1) % 64);
            }
            m != 0
        })
    }

    /// Counts disjoint groups of present classes that no clique can meet in
    /// full, stopping at `want`. A group grows from one class `K`: for each
    /// member `v` of `K` some class of the group must have no neighbour of
    /// `v` left. Each group lowers the class-count bound by one.
    fn conflict_groups(&self, p: &[u64], present: &[(u32, usize)], want: u32) -> u32 {
        let mut free: Vec<usize> = present.iter().map(|&(_, c)| c).collect();
        let mut found = 0;
        while found < want && !free.is_empty() {
            let k = free.remove(0);
            let mut group: Vec<usize> = Vec::new();
            let mut ok = true;
            for v in Bits::iter_range(p, self.class_start[k], self.class_start[k + 1]) {
                let row = self.row(v);
                if group.iter().any(|&c| !self.meets(row, p, c)) {
                    continue;
                }
                match free.iter().position(|&c| !self.meets(row, p, c)) {
                    Some(i) => group.push(free.remove(i)),
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                found += 1;
            } else {
                free.extend(group);
                free.sort_by_key(|&c| (self.class_count(p, c), c));
            }
        }
        found
    }

    fn code_words(&self, clique: &[usize]) -> Vec<Permutation> {
        let mut out = Vec::with_capacity(clique.len() + 1);
        if self.identity_fixed {
            out.push(Permutation::identity(self.params.n));
        }
        out.extend(
            clique
                .iter()
                .map(|&v| Permutation::from_zero_based_unchecked(self.vertices[v].clone())),
        );
        out.sort();
        out
    }

    /// Greedy coloring of `p` into independent sets, stopping once more
    /// than `cap` colors are needed.
    fn color_bound(&self, p: &[u64], cap: u32) -> u32 {
        let mut rest = p.to_vec();
        let mut colors = 0;
        while Bits::first(&rest).is_some() {
            colors += 1;
            if colors > cap {
                return colors;
            }
            let mut open = rest.clone();
            while let Some(v) = Bits::first(&open) {
                Bits::clear(&mut rest, v);
                Bits::clear(&mut open, v);
                for (o, a) in open.iter_mut().zip(self.row(v)) {
                    *o &= !a;
                }
            }
        }
        colors
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimality {
    ProvenMaximum,
    LowerBoundOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub code: Code,
    pub optimality: Optimality,
    pub upper_bound_used: u64,
    pub nodes_explored: u64,
    #[serde(rename = "elapsed_seconds", with = "seconds")]
    pub elapsed: Duration,
}

pub(crate) mod seconds {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(v.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_secs_f64(f64::deserialize(d)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SingletonOutcome {
    Found { code: Code },
    /// The search tree was exhausted without a complete code.
    NonExistent,
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingletonSearch {
    pub params: CodeParams,
    pub outcome: SingletonOutcome,
    pub nodes_explored: u64,
    #[serde(rename = "elapsed_seconds", with = "seconds")]
    pub elapsed: Duration,
}

fn check_search_params(params: CodeParams) -> Result<()> {
    if params.d < 2 {
        return Err(Error::InvalidParams(
            "d = 1 admits all of S_n; there is nothing to search".into(),
        ));
    }
    Ok(())
}

fn singleton_u64(params: CodeParams) -> u64 {
    singleton_upper(params).to_u64().unwrap_or(u64::MAX)
}

struct SingletonSearcher<'g> {
    graph: &'g Graph,
    meter: Meter,
    filled: Vec<bool>,
    clique: Vec<usize>,
    out_of_budget: bool,
}

impl SingletonSearcher<'_> {
    /// `true` once every class holds a codeword.
    fn expand(&mut self, p: &[u64]) -> bool {
        if !self.meter.tick() {
            self.out_of_budget = true;
            return false;
        }
        let g = self.graph;
        let mut pick: Option<(u32, usize)> = None;
        for c in 0..g.classes() {
            if self.filled[c] {
                continue;
            }
            let k = g.class_count(p, c);
            if k == 0 {
                return false;
            }
            if pick.is_none_or(|(best, _)| k < best) {
                pick = Some((k, c));
            }
        }
        let Some((_, c)) = pick else {
            return true;
        };
        self.filled[c] = true;
        for v in Bits::iter_range(p, g.class_start[c], g.class_start[c + 1]) {
            let next: Vec<u64> = p.iter().zip(g.row(v)).map(|(a, b)| a & b).collect();
            self.clique.push(v);
            if self.expand(&next) {
                return true;
            }
            self.clique.pop();
            if self.out_of_budget {
                break;
            }
        }
        self.filled[c] = false;
        false
    }
}

fn singleton_on_graph(graph: &Graph, budget: Budget) -> Result<SingletonSearch> {
    let params = graph.params;
    let mut s = SingletonSearcher {
        graph,
        meter: budget.start(),
        filled: vec![false; graph.classes()],
        clique: Vec::new(),
        out_of_budget: false,
    };
    if graph.identity_fixed {
        s.filled[graph.identity_class] = true;
    }
    let found = s.expand(&graph.all());
    let outcome = if found {
        SingletonOutcome::Found {
            code: verify_code(&graph.code_words(&s.clique), params).map_err(|e| Error::Invariant(e.to_string()))?,
        }
    } else if s.out_of_budget {
        SingletonOutcome::BudgetExhausted
    } else {
        SingletonOutcome::NonExistent
    };
    Ok(SingletonSearch {
        params,
        outcome,
        nodes_explored: s.meter.nodes(),
        elapsed: s.meter.elapsed(),
    })
}

/// Looks for a code with exactly one word per color class.
pub fn find_singleton_optimal(params: CodeParams, budget: Budget) -> Result<SingletonSearch> {
    check_search_params(params)?;
    singleton_on_graph(&Graph::build(params, true, DEFAULT_VERTEX_LIMIT)?, budget)
}

/// `min(singleton, sphere-packing, integer program)`, each where cheap.
pub fn analytic_upper_bound(params: CodeParams) -> Result<u64> {
    let mut best = singleton_u64(params);
    if params.n <= DEFAULT_ENUMERATION_LIMIT {
        best = best.min(sphere_packing_bounds(params)?.upper);
    }
    if params.d >= 2 && params.n <= 7 {
        // a node budget keeps the bound deterministic; it is valid either way
        best = best.min(ip_upper_bound(params, Budget::nodes(5_000))?.value);
    }
    Ok(best)
}

struct CliqueSearcher<'g> {
    graph: &'g Graph,
    meter: Meter,
    order: ClassOrder,
    base: u32,
    cap: u32,
    best: Vec<usize>,
    clique: Vec<usize>,
    stop: bool,
    out_of_budget: bool,
}

impl CliqueSearcher<'_> {
    fn size(&self, clique: &[usize]) -> u32 {
        self.base + clique.len() as u32
    }

    /// Greedy coloring as `(vertex, color)` in color order.
    fn colored_order(&self, p: &[u64]) -> Vec<(usize, u32)> {
        let g = self.graph;
        let mut rest = p.to_vec();
        let mut out = Vec::new();
        let mut color = 0;
        while Bits::first(&rest).is_some() {
            color += 1;
            let mut open = rest.clone();
            while let Some(v) = Bits::first(&open) {
                Bits::clear(&mut rest, v);
                Bits::clear(&mut open, v);
                for (o, a) in open.iter_mut().zip(g.row(v)) {
                    *o &= !a;
                }
                out.push((v, color));
            }
        }
        out
    }

    fn expand_colored(&mut self, p: &[u64]) {
        if !self.meter.tick() {
            self.out_of_budget = true;
            self.stop = true;
            return;
        }
        if self.size(&self.clique) > self.size(&self.best) {
            self.best = self.clique.clone();
            if self.size(&self.best) >= self.cap {
                self.stop = true;
                return;
            }
        }
        let g = self.graph;
        let present = (0..g.classes()).filter(|&c| g.class_count(p, c) > 0).count() as u32;
        let have = self.size(&self.clique);
        if have + present <= self.size(&self.best) {
            return;
        }
        let order = self.colored_order(p);
        let mut p = p.to_vec();
        for &(v, color) in order.iter().rev() {
            if have + color <= self.size(&self.best) {
                return;
            }
            let next: Vec<u64> = p.iter().zip(g.row(v)).map(|(a, b)| a & b).collect();
            self.clique.push(v);
            self.expand_colored(&next);
            self.clique.pop();
            if self.stop {
                return;
            }
            Bits::clear(&mut p, v);
        }
    }

    fn expand(&mut self, p: &[u64]) {
        if self.order == ClassOrder::Coloring {
            return self.expand_colored(p);
        }
        if !self.meter.tick() {
            self.out_of_budget = true;
            self.stop = true;
            return;
        }
        if self.size(&self.clique) > self.size(&self.best) {
            self.best = self.clique.clone();
            if self.size(&self.best) >= self.cap {
                self.stop = true;
                return;
            }
        }
        let g = self.graph;
        let have = self.size(&self.clique);
        let best = self.size(&self.best);
        let mut sizes: Vec<(u32, usize)> = Vec::new();
        let mut pick: Option<(u32, usize)> = None;
        for c in 0..g.classes() {
            let k = g.class_count(p, c);
            if k == 0 {
                continue;
            }
            sizes.push((k, c));
            let better = match (self.order, pick) {
                (_, None) => true,
                (ClassOrder::Lexicographic, Some(_)) => false,
                (ClassOrder::FewestCandidates, Some((b, _))) => k < b,
                (ClassOrder::Coloring, Some(_)) => unreachable!(),
            };
            if better {
                pick = Some((k, c));
            }
        }
        let Some((_, c)) = pick else {
            return;
        };
        let present = sizes.len() as u32;
        if have + present <= best {
            return;
        }
        if have + g.color_bound(p, best - have) <= best {
            return;
        }
        sizes.sort_unstable();
        let want = have + present - best;
        if g.conflict_groups(p, &sizes, want) >= want {
            return;
        }
        let (lo, hi) = (g.class_start[c], g.class_start[c + 1]);
        for v in Bits::iter_range(p, lo, hi) {
            let next: Vec<u64> = p.iter().zip(g.row(v)).map(|(a, b)| a & b).collect();
            self.clique.push(v);
            self.expand(&next);
            self.clique.pop();
            if self.stop {
                return;
            }
        }
        let mut skip = p.to_vec();
        Bits::clear_range(&mut skip, lo, hi);
        self.expand(&skip);
    }
}

fn max_on_graph(graph: &Graph, order: ClassOrder, cap: u64, seed: Vec<usize>, budget: Budget) -> (Vec<usize>, bool, u64) {
    let base = u32::from(graph.identity_fixed);
    let mut s = CliqueSearcher {
        graph,
        meter: budget.start(),
        order,
        base,
        cap: cap.min(u32::MAX as u64) as u32,
        best: seed,
        clique: Vec::new(),
        stop: false,
        out_of_budget: false,
    };
    if s.size(&s.best) < s.cap {
        s.expand(&graph.all());
    }
    let proven = !s.out_of_budget;
    (s.best, proven, s.meter.nodes())
}

/// Branch-and-bound for a largest code, one word per color class at most.
pub fn max_code_search(params: CodeParams, budget: Budget) -> Result<SearchResult> {
    max_code_search_with(params, budget, SearchOptions::default())
}

pub fn max_code_search_with(params: CodeParams, budget: Budget, options: SearchOptions) -> Result<SearchResult> {
    check_search_params(params)?;
    let meter = budget.start();
    let graph = Graph::build(params, options.fix_identity, options.vertex_limit)?;
    let singleton = singleton_u64(params);
    let mut upper = match options.upper_bound {
        Some(u) => u.min(singleton),
        None => analytic_upper_bound(params)?,
    };
    let mut nodes = 0;

    if upper == singleton && options.fix_identity && options.singleton_share > 0.0 {
        let phase = singleton_on_graph(&graph, budget.fraction(options.singleton_share))?;
        nodes += phase.nodes_explored;
        match phase.outcome {
            SingletonOutcome::Found { code } => {
                return Ok(SearchResult {
                    code,
                    optimality: Optimality::ProvenMaximum,
                    upper_bound_used: upper,
                    nodes_explored: nodes,
                    elapsed: meter.elapsed(),
                });
            }
            SingletonOutcome::NonExistent => upper = singleton - 1,
            SingletonOutcome::BudgetExhausted => {}
        }
    }

    let remaining = Budget {
        max_nodes: budget.max_nodes.map(|m| m.saturating_sub(nodes).max(1)),
        max_seconds: budget
            .max_seconds
            .map(|s| (s - meter.elapsed().as_secs_f64()).max(0.0)),
    };
    let (clique, proven, used) = max_on_graph(&graph, options.class_order, upper, Vec::new(), remaining);
    nodes += used;
    let code = verify_code(&graph.code_words(&clique), params)
        .map_err(|e| Error::Invariant(format!("search produced an invalid code: {e}")))?;
    Ok(SearchResult {
        code,
        optimality: if proven {
            Optimality::ProvenMaximum
        } else {
            Optimality::LowerBoundOnly
        },
        upper_bound_used: upper,
        nodes_explored: nodes,
        elapsed: meter.elapsed(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Proven,
    Bounded,
    Skipped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Yes,
    No,
    Unknown,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Yes => "yes",
            Verdict::No => "no",
            Verdict::Unknown => "?",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableCell {
    pub n: usize,
    pub d: usize,
    /// Size of the best code found.
    pub lower: Option<u64>,
    pub upper: u64,
    pub status: CellStatus,
    pub singleton: u64,
    pub singleton_optimal: Verdict,
    pub method: String,
    pub nodes_explored: u64,
}

impl TableCell {
    /// `"24="` when proven, `"≥12 ≤24"` when bounded, `"?"` when skipped.
    pub fn text(&self) -> String {
        match (self.status, self.lower) {
            (CellStatus::Proven, Some(v)) => format!("{v}="),
            (CellStatus::Bounded, Some(v)) => format!("≥{v} ≤{}", self.upper),
            (_, _) => "?".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableReport {
    pub cells: Vec<TableCell>,
}

impl TableReport {
    pub fn cell(&self, n: usize, d: usize) -> Option<&TableCell> {
        self.cells.iter().find(|c| c.n == n && c.d == d)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,d,lower,upper,status,singleton,singleton_optimal,method,nodes\n");
        for c in &self.cells {
            let lower = c.lower.map_or(String::new(), |v| v.to_string());
            let status = match c.status {
                CellStatus::Proven => "proven",
                CellStatus::Bounded => "bounded",
                CellStatus::Skipped => "skipped",
            };
            writeln!(
                out,
                "{},{},{lower},{},{status},{},{},{},{}",
                c.n,
                c.d,
                c.upper,
                c.singleton,
                c.singleton_optimal.as_str(),
                c.method,
                c.nodes_explored
            )
            .unwrap();
        }
        out
    }

    /// Two grids in the layout of the usual tables: sizes, then verdicts.
    pub fn to_text(&self) -> String {
        let mut ns: Vec<usize> = self.cells.iter().map(|c| c.n).collect();
        let mut ds: Vec<usize> = self.cells.iter().map(|c| c.d).collect();
        ns.sort_unstable();
        ns.dedup();
        ds.sort_unstable();
        ds.dedup();
        let grid = |title: &str, f: &dyn Fn(&TableCell) -> String| {
            let mut rows: Vec<Vec<String>> = vec![std::iter::once(String::new())
                .chain(ds.iter().map(|d| format!("d={d}")))
                .collect()];
            for &n in &ns {
                rows.push(
                    std::iter::once(format!("n={n}"))
                        .chain(ds.iter().map(|&d| self.cell(n, d).map_or("--".into(), f)))
                        .collect(),
                );
            }
            let widths: Vec<usize> = (0..=ds.len())
                .map(|k| rows.iter().map(|r| r[k].chars().count()).max().unwrap())
                .collect();
            let mut out = format!("{title}\n");
            for r in rows {
                let line: Vec<String> = r
                    .iter()
                    .zip(&widths)
                    .map(|(s, w)| format!("{s}{}", " ".repeat(w - s.chars().count())))
                    .collect();
                writeln!(out, "{}", line.join("  ").trim_end()).unwrap();
            }
            out
        };
        let mut out = grid("A(n,d)", &|c| c.text());
        out.push('\n');
        out.push_str(&grid("Singleton-optimal", &|c| c.singleton_optimal.as_str().into()));
        out
    }
}

/// One cell of the size/verdict tables.
pub fn table_cell(params: CodeParams, budget: Budget, vertex_limit: usize) -> Result<TableCell> {
    let (n, d) = (params.n, params.d);
    let singleton = singleton_u64(params);
    let mut cell = TableCell {
        n,
        d,
        lower: None,
        upper: singleton,
        status: CellStatus::Skipped,
        singleton,
        singleton_optimal: Verdict::Unknown,
        method: "skipped".into(),
        nodes_explored: 0,
    };
    if d == 1 {
        cell.lower = Some(singleton);
        cell.status = CellStatus::Proven;
        cell.singleton_optimal = Verdict::Yes;
        cell.method = "whole space".into();
        return Ok(cell);
    }
    if d == 2 {
        let words = major_index_code(n)?;
        if words.len() as u64 != singleton || !has_distance_two(&words) {
            return Err(Error::Invariant(format!("major-index code fails at n = {n}")));
        }
        cell.lower = Some(singleton);
        cell.status = CellStatus::Proven;
        cell.singleton_optimal = Verdict::Yes;
        cell.method = "construction".into();
        return Ok(cell);
    }
    let analytic = analytic_upper_bound(params)?;
    cell.upper = analytic;
    if analytic < singleton {
        cell.singleton_optimal = Verdict::No;
    }
    let graph = match Graph::build(params, true, vertex_limit) {
        Ok(g) => g,
        Err(Error::Capacity(_)) => return Ok(cell),
        Err(e) => return Err(e),
    };
    let options = SearchOptions {
        upper_bound: Some(analytic),
        vertex_limit,
        ..SearchOptions::default()
    };
    let meter = budget.start();
    let mut upper = analytic;
    let mut nodes = 0;
    let mut method = "search";
    if upper == singleton {
        let phase = singleton_on_graph(&graph, budget.fraction(options.singleton_share))?;
        nodes += phase.nodes_explored;
        match phase.outcome {
            SingletonOutcome::Found { code } => {
                cell.lower = Some(code.len() as u64);
                cell.status = CellStatus::Proven;
                cell.singleton_optimal = Verdict::Yes;
                cell.method = "singleton search".into();
                cell.nodes_explored = nodes;
                return Ok(cell);
            }
            SingletonOutcome::NonExistent => {
                upper = singleton - 1;
                cell.singleton_optimal = Verdict::No;
                method = "singleton exhaustion + search";
            }
            SingletonOutcome::BudgetExhausted => {}
        }
    }
    let remaining = Budget {
        max_nodes: budget.max_nodes.map(|m| m.saturating_sub(nodes).max(1)),
        max_seconds: budget
            .max_seconds
            .map(|s| (s - meter.elapsed().as_secs_f64()).max(0.0)),
    };
    let (clique, proven, used) = max_on_graph(&graph, options.class_order, upper, Vec::new(), remaining);
    nodes += used;
    let size = clique.len() as u64 + 1;
    verify_code(&graph.code_words(&clique), params).map_err(|e| Error::Invariant(e.to_string()))?;
    cell.lower = Some(size);
    cell.nodes_explored = nodes;
    cell.method = method.into();
    if proven || size >= upper {
        cell.status = CellStatus::Proven;
        cell.upper = size;
        cell.singleton_optimal = if size == singleton { Verdict::Yes } else { Verdict::No };
    } else {
        cell.status = CellStatus::Bounded;
        cell.upper = upper;
        if size == singleton {
            cell.singleton_optimal = Verdict::Yes;
        }
    }
    Ok(cell)
}

/// Every valid `(n, d)` cell in the given ranges, each with its own budget.
pub fn reproduce_tables(
    ns: std::ops::RangeInclusive<usize>,
    ds: std::ops::RangeInclusive<usize>,
    budget: Budget,
    vertex_limit: usize,
) -> Result<TableReport> {
    let mut cells = Vec::new();
    for n in ns {
        for d in ds.clone() {
            if n < 2 || d == 0 || d >= n {
                continue;
            }
            cells.push(table_cell(CodeParams::new(n, d)?, budget, vertex_limit)?);
        }
    }
    Ok(TableReport { cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::{all_permutations, ulam_distance};

    fn cp(n: usize, d: usize) -> CodeParams {
        CodeParams::new(n, d).unwrap()
    }

    fn p(v: &[usize]) -> Permutation {
        Permutation::from_one_based(v).unwrap()
    }

    #[test]
    fn color_class_examples() {
        let c = color_class(&p(&[3, 1, 4, 2, 5]), cp(5, 3)).unwrap();
        assert_eq!(c.pattern, p(&[3, 1, 2]));
        assert!(color_class(&Permutation::identity(6), cp(6, 4)).unwrap().pattern.is_identity());
        assert!(color_class(&Permutation::identity(5), cp(5, 1)).is_err());
    }

    #[test]
    fn classes_partition_evenly() {
        for n in 3..=6 {
            for d in 2..n {
                let params = cp(n, d);
                let mut sizes = std::collections::BTreeMap::new();
                for s in all_permutations(n) {
                    *sizes.entry(color_class(&s, params).unwrap()).or_insert(0u64) += 1;
                }
                let m = params.pattern_len();
                assert_eq!(sizes.len() as u64, factorial_u64(m));
                assert!(sizes.values().all(|&k| k == factorial_u64(n) / factorial_u64(m)));
            }
        }
    }

    #[test]
    fn same_class_means_close() {
        let params = cp(5, 3);
        let all: Vec<Permutation> = all_permutations(5).collect();
        let classes: Vec<ColorClass> = all.iter().map(|s| color_class(s, params).unwrap()).collect();
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                if classes[i] == classes[j] {
                    assert!(ulam_distance(&all[i], &all[j]).unwrap() < 3);
                }
            }
        }
    }

    #[test]
    fn verify_code_examples() {
        let e = Permutation::identity(5);
        assert_eq!(verify_code(&[e.clone()], cp(5, 3)).unwrap().min_distance, 5);
        let code = verify_code(&[e.clone(), Permutation::reversal(5)], cp(5, 4)).unwrap();
        assert_eq!(code.min_distance, 4);
        let err = verify_code(&[e.clone(), p(&[2, 1, 3, 4, 5]), Permutation::reversal(5)], cp(5, 2)).unwrap_err();
        match err {
            Error::DistanceViolation { distance, required, .. } => assert_eq!((distance, required), (1, 2)),
            other => panic!("{other:?}"),
        }
        assert!(verify_code(&[], cp(5, 2)).is_err());
        assert!(verify_code(&[Permutation::identity(4)], cp(5, 2)).is_err());
    }

    #[test]
    fn code_file_round_trip() {
        let code = verify_code(&[Permutation::identity(4), Permutation::reversal(4)], cp(4, 3)).unwrap();
        let text = code.to_file_text();
        assert_eq!(text, "4 3\n1 2 3 4\n4 3 2 1\n");
        let (params, words) = read_code_file(&text).unwrap();
        assert_eq!(verify_code(&words, params).unwrap(), code);
        assert!(read_code_file("4\n1 2 3 4\n").is_err());
        assert!(matches!(read_code_file("4 3\n1 2 2 4\n"), Err(Error::NotPermutation(_)) | Err(Error::Parse { .. })));
    }

    #[test]
    fn major_index_codes_have_distance_two() {
        for n in 2..=7 {
            let words = major_index_code(n).unwrap();
            assert_eq!(words.len() as u64, factorial_u64(n - 1));
            assert!(has_distance_two(&words));
            if (3..=6).contains(&n) {
                assert_eq!(verify_code(&words, cp(n, 2)).unwrap().min_distance, 2);
            }
        }
        // the fast check agrees with the pairwise one on a code that fails
        let bad = vec![Permutation::identity(4), p(&[2, 1, 3, 4])];
        assert!(!has_distance_two(&bad));
    }

    #[test]
    fn singleton_examples() {
        let s = find_singleton_optimal(cp(6, 3), Budget::unlimited()).unwrap();
        match s.outcome {
            SingletonOutcome::Found { code } => {
                assert_eq!(code.len(), 24);
                assert!(code.min_distance >= 3);
                assert_eq!(verify_code(&code.words, cp(6, 3)).unwrap(), code);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            find_singleton_optimal(cp(5, 3), Budget::unlimited()).unwrap().outcome,
            SingletonOutcome::NonExistent
        );
        match find_singleton_optimal(cp(4, 2), Budget::unlimited()).unwrap().outcome {
            SingletonOutcome::Found { code } => assert_eq!(code.len(), 6),
            other => panic!("{other:?}"),
        }
        assert_eq!(
            find_singleton_optimal(cp(6, 3), Budget::nodes(3)).unwrap().outcome,
            SingletonOutcome::BudgetExhausted
        );
    }

    #[test]
    fn max_search_examples() {
        for (n, d, want) in [(4, 3, 2), (5, 3, 4), (5, 4, 2), (6, 4, 4), (6, 5, 2)] {
            let r = max_code_search(cp(n, d), Budget::unlimited()).unwrap();
            assert_eq!((r.code.len(), r.optimality), (want, Optimality::ProvenMaximum), "({n},{d})");
            assert!(r.code.min_distance >= d);
        }
    }

    #[test]
    fn search_is_order_independent_and_identity_fixing_is_harmless() {
        for (n, d) in [(5, 3), (6, 4), (5, 2)] {
            let mut sizes = Vec::new();
            for order in [ClassOrder::Lexicographic, ClassOrder::FewestCandidates, ClassOrder::Coloring] {
                for fix_identity in [true, false] {
                    let options = SearchOptions {
                        class_order: order,
                        fix_identity,
                        upper_bound: Some(singleton_u64(cp(n, d))),
                        singleton_share: 0.0,
                        ..SearchOptions::default()
                    };
                    let r = max_code_search_with(cp(n, d), Budget::unlimited(), options).unwrap();
                    assert_eq!(r.optimality, Optimality::ProvenMaximum);
                    sizes.push(r.code.len());
                }
            }
            assert!(sizes.windows(2).all(|w| w[0] == w[1]), "({n},{d}): {sizes:?}");
        }
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let options = SearchOptions {
            upper_bound: Some(24),
            singleton_share: 0.0,
            ..SearchOptions::default()
        };
        let r = max_code_search_with(cp(6, 3), Budget::nodes(5), options).unwrap();
        assert_eq!(r.optimality, Optimality::LowerBoundOnly);
        assert!(r.code.min_distance >= 3);
    }

    #[test]
    fn vertex_limit_is_a_capacity_error() {
        let options = SearchOptions {
            vertex_limit: 10,
            ..SearchOptions::default()
        };
        assert!(matches!(
            max_code_search_with(cp(6, 3), Budget::unlimited(), options),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn small_table() {
        let t = reproduce_tables(4..=5, 2..=4, Budget::unlimited(), DEFAULT_VERTEX_LIMIT).unwrap();
        let got: Vec<(usize, usize, Option<u64>, &str)> = t
            .cells
            .iter()
            .map(|c| (c.n, c.d, c.lower, c.singleton_optimal.as_str()))
            .collect();
        assert_eq!(
            got,
            vec![
                (4, 2, Some(6), "yes"),
                (4, 3, Some(2), "yes"),
                (5, 2, Some(24), "yes"),
                (5, 3, Some(4), "no"),
                (5, 4, Some(2), "yes"),
            ]
        );
        assert!(t.cells.iter().all(|c| c.status == CellStatus::Proven));
        let text = t.to_text();
        assert!(text.contains("n=5  24=  4=   2="), "{text}");
        assert!(t.to_csv().starts_with("n,d,lower,upper"));
    }
}

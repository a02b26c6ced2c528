//! Independent reference implementations used as test oracles. Nothing here
//! calls into the library's distance or LIS code.

#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};

/// Every permutation of `1..=n` in lexicographic order, by recursion.
pub fn perms(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        let n = used.len();
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                prefix.push(v + 1);
                go(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// All results of removing one symbol and reinserting it elsewhere.
pub fn moves(p: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for i in 0..p.len() {
        for j in 0..p.len() {
            if i != j {
                let mut q = p.to_vec();
                let s = q.remove(i);
                q.insert(j, s);
                out.push(q);
            }
        }
    }
    out
}

/// Shortest number of moves from `source` to every permutation of its length.
pub fn bfs_distances(source: &[usize]) -> HashMap<Vec<usize>, usize> {
    let mut dist = HashMap::from([(source.to_vec(), 0)]);
    let mut queue = VecDeque::from([source.to_vec()]);
    while let Some(p) = queue.pop_front() {
        let k = dist[&p];
        for q in moves(&p) {
            if !dist.contains_key(&q) {
                dist.insert(q.clone(), k + 1);
                queue.push_back(q);
            }
        }
    }
    dist
}

/// `|B(r)|` around the identity for every `r = 0..n-1`, by breadth-first search.
pub fn bfs_ball_sizes(n: usize) -> Vec<u64> {
    let identity: Vec<usize> = (1..=n).collect();
    let dist = bfs_distances(&identity);
    let mut sizes = vec![0u64; n];
    for &k in dist.values() {
        for s in sizes.iter_mut().skip(k) {
            *s += 1;
        }
    }
    sizes
}

/// Longest common subsequence by the quadratic dynamic programme.
pub fn lcs_dp(a: &[usize], b: &[usize]) -> usize {
    let mut t = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            t[i][j] = if a[i - 1] == b[j - 1] {
                t[i - 1][j - 1] + 1
            } else {
                t[i - 1][j].max(t[i][j - 1])
            };
        }
    }
    t[a.len()][b.len()]
}

pub fn ulam_dp(a: &[usize], b: &[usize]) -> usize {
    a.len() - lcs_dp(a, b)
}

/// Longest increasing subsequence by the quadratic recurrence.
pub fn lis_quadratic(a: &[usize]) -> usize {
    let mut best = vec![1usize; a.len()];
    for i in 0..a.len() {
        for j in 0..i {
            if a[j] < a[i] {
                best[i] = best[i].max(best[j] + 1);
            }
        }
    }
    best.into_iter().max().unwrap_or(0)
}

pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k as u128).fold(1, |acc, i| acc * (n as u128 - i) / (i + 1))
}

/// Minimum pairwise distance of a set of words, by the DP oracle.
pub fn min_distance(words: &[Vec<usize>]) -> usize {
    let mut best = usize::MAX;
    for i in 0..words.len() {
        for j in i + 1..words.len() {
            best = best.min(ulam_dp(&words[i], &words[j]));
        }
    }
    best
}

/// `X[b][a]` = number of words with symbol `a` at position `b` (both 1-based,
/// stored 0-based).
pub fn position_counts(n: usize, words: &[Vec<usize>]) -> Vec<Vec<i64>> {
    let mut x = vec![vec![0i64; n]; n];
    for w in words {
        for (b, &a) in w.iter().enumerate() {
            x[b][a - 1] += 1;
        }
    }
    x
}

/// Checks the counting rows of the integer program directly: for every
/// symbol `a` and every `l = 0..=n-d`,
/// `Σ_b C(b-1, l) C(n-b, n-d-l) X[b][a] <= (n-1)!/(d-1)!`,
/// plus equal row sums.
pub fn counting_rows_hold(n: usize, d: usize, x: &[Vec<i64>]) -> bool {
    let rhs = (factorial(n - 1) / factorial(d - 1)) as i128;
    for a in 0..n {
        for l in 0..=n - d {
            let lhs: i128 = (1..=n)
                .map(|b| {
                    let c = binomial(b - 1, l) * binomial(n - b, n - d - l);
                    c as i128 * x[b - 1][a] as i128
                })
                .sum();
            if lhs > rhs {
                return false;
            }
        }
    }
    let first: i64 = x[0].iter().sum();
    x.iter().all(|row| row.iter().sum::<i64>() == first)
}

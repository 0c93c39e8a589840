// SPDX-License-Identifier: Apache-2.0

//! Brute-force reference implementations shared by the integration tests.

#![allow(dead_code)]

use lpplab::{Environment, LppValue, PointOnLine};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// A path in grid-column coordinates; `jumps[i - end_line]` is the column at which it leaves line `i`.
#[derive(Clone, Debug)]
pub struct ColPath {
    pub start_col: usize,
    pub start_line: usize,
    pub end_col: usize,
    pub end_line: usize,
    pub jumps: Vec<usize>,
}

impl ColPath {
    fn jump(&self, line: usize) -> usize {
        if line > self.start_line {
            self.start_col
        } else {
            self.jumps[line - self.end_line]
        }
    }

    /// Line occupied on the open interval after column `c`.
    pub fn line_on(&self, c: usize) -> usize {
        (self.end_line..=self.start_line)
            .rev()
            .find(|&i| self.jump(i) > c)
            .unwrap()
    }

    pub fn length(&self, env: &Environment<f64>) -> f64 {
        let mut total = 0.0;
        for i in self.end_line..=self.start_line {
            let line = env.line(i);
            total += line[self.jump(i)] - line[self.jump(i + 1)];
        }
        total
    }
}

/// Every path from `(c0, l0)` to `(c1, l1)` with jumps at grid columns.
pub fn all_paths(c0: usize, l0: usize, c1: usize, l1: usize) -> Vec<ColPath> {
    let mut out = Vec::new();
    let free = l0 - l1; // jump times for lines l1+1..=l0
    let mut cur = vec![c1; free];
    fn rec(
        idx: usize,
        upper: usize,
        c0: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if idx == cur.len() {
            out.push(cur.clone());
            return;
        }
        for c in c0..=upper {
            cur[idx] = c;
            rec(idx + 1, c, c0, cur, out);
        }
    }
    let mut raw = Vec::new();
    rec(0, c1, c0, &mut cur, &mut raw);
    for js in raw {
        let mut jumps = vec![c1];
        jumps.extend(js);
        out.push(ColPath {
            start_col: c0,
            start_line: l0,
            end_col: c1,
            end_line: l1,
            jumps,
        });
    }
    out
}

pub fn disjoint(paths: &[ColPath]) -> bool {
    for a in 0..paths.len() {
        for b in a + 1..paths.len() {
            let (p, q) = (&paths[a], &paths[b]);
            let lo = p.start_col.max(q.start_col);
            let hi = p.end_col.min(q.end_col);
            for c in lo..hi {
                if p.line_on(c) == q.line_on(c) {
                    return false;
                }
            }
        }
    }
    true
}

/// Consecutive paths are strictly ordered (smaller line first) wherever both are alive.
pub fn ordered(paths: &[ColPath]) -> bool {
    paths.windows(2).all(|w| {
        let (p, q) = (&w[0], &w[1]);
        let lo = p.start_col.max(q.start_col);
        let hi = p.end_col.min(q.end_col);
        (lo..hi).all(|c| p.line_on(c) < q.line_on(c))
    })
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// Reorderings of `points` (sorted by column) that only permute points sharing a column.
pub fn tie_orders(points: &[(usize, usize)]) -> Vec<Vec<(usize, usize)>> {
    let mut sorted = points.to_vec();
    sorted.sort_by_key(|p| p.0);
    let mut out = vec![Vec::new()];
    let mut i = 0;
    while i < sorted.len() {
        let j = (i..sorted.len()).find(|&j| sorted[j].0 != sorted[i].0).unwrap_or(sorted.len());
        let group = &sorted[i..j];
        let mut next = Vec::new();
        for prefix in &out {
            for perm in permutations(group.len()) {
                let mut v: Vec<(usize, usize)> = prefix.clone();
                v.extend(perm.iter().map(|&a| group[a]));
                next.push(v);
            }
        }
        out = next;
        i = j;
    }
    out
}

/// Result of exhaustive enumeration.
pub struct Exhaustive {
    pub value: LppValue<f64>,
    /// Every tuple attaining the value.
    pub optimizers: Vec<Vec<ColPath>>,
}

/// Enumerates every ordered tuple: points sharing a time may be relabelled,
/// then path `a` joins the `a`-th start to the `a`-th end.
pub fn exhaustive(env: &Environment<f64>, starts: &[(usize, usize)], ends: &[(usize, usize)]) -> Exhaustive {
    let k = starts.len();
    let mut best = LppValue::NegInfinity;
    let mut optimizers: Vec<Vec<ColPath>> = Vec::new();
    for s in tie_orders(starts) {
        for e in tie_orders(ends) {
            let mut choices = Vec::new();
            let mut ok = true;
            for a in 0..k {
                let (c0, l0) = s[a];
                let (c1, l1) = e[a];
                if c0 > c1 || l0 < l1 {
                    ok = false;
                    break;
                }
                choices.push(all_paths(c0, l0, c1, l1));
            }
            if !ok {
                continue;
            }
            let mut idx = vec![0usize; k];
            loop {
                let tuple: Vec<ColPath> = (0..k).map(|a| choices[a][idx[a]].clone()).collect();
                if ordered(&tuple) {
                    let v: f64 = tuple.iter().map(|p| p.length(env)).sum();
                    let lv = LppValue::Finite(v);
                    if lv > best {
                        best = lv;
                        optimizers.clear();
                    }
                    if lv == best {
                        optimizers.push(tuple);
                    }
                }
                let mut a = 0;
                while a < k {
                    idx[a] += 1;
                    if idx[a] < choices[a].len() {
                        break;
                    }
                    idx[a] = 0;
                    a += 1;
                }
                if a == k {
                    break;
                }
            }
        }
    }
    Exhaustive {
        value: best,
        optimizers,
    }
}

/// Sorted (decreasing) occupied lines on the interval after column `c`.
pub fn occupancy(paths: &[ColPath], c: usize) -> Vec<usize> {
    let mut v: Vec<usize> = paths
        .iter()
        .filter(|p| p.start_col <= c && c < p.end_col)
        .map(|p| p.line_on(c))
        .collect();
    v.sort_unstable_by(|a, b| b.cmp(a));
    v
}

pub fn random_env(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Environment<f64> {
    let mut pts = Vec::with_capacity(m);
    let mut t: f64 = rng.random_range(-1.0..0.0);
    for _ in 0..m {
        pts.push(t);
        t += rng.random_range(0.05..0.5);
    }
    let grid = lpplab::Grid::new(pts).unwrap();
    let lines = (0..n)
        .map(|_| (0..m).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    Environment::new(grid, lines).unwrap()
}

/// Brownian-like environment pinned at the left endpoint with uneven grid spacing.
pub fn random_pinned_env(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Environment<f64> {
    use rand_distr::{Distribution, StandardNormal};
    let mut pts: Vec<f64> = Vec::with_capacity(m);
    let mut t = 0.0;
    for _ in 0..m {
        pts.push(t);
        t += rng.random_range(0.01..0.1);
    }
    let lines = (0..n)
        .map(|_| {
            let mut acc = 0.0;
            let mut line = vec![0.0];
            for w in pts.windows(2) {
                let z: f64 = StandardNormal.sample(rng);
                acc += (w[1] - w[0]).sqrt() * z;
                line.push(acc);
            }
            line
        })
        .collect();
    Environment::new(lpplab::Grid::new(pts).unwrap(), lines).unwrap()
}

/// Random valid endpoint columns and lines for `k` paths on `n` lines and `m` columns.
pub fn random_endpoints(
    rng: &mut ChaCha8Rng,
    n: usize,
    m: usize,
    k: usize,
) -> (Vec<(usize, usize)>, Vec<(usize, usize)>) {
    loop {
        let mut s: Vec<(usize, usize)> = (0..k)
            .map(|_| (rng.random_range(0..m), rng.random_range(1..=n)))
            .collect();
        let mut e: Vec<(usize, usize)> = (0..k)
            .map(|_| (rng.random_range(0..m), rng.random_range(1..=n)))
            .collect();
        // times nondecreasing, lines nonincreasing
        let mut st: Vec<usize> = s.iter().map(|x| x.0).collect();
        let mut sl: Vec<usize> = s.iter().map(|x| x.1).collect();
        let mut et: Vec<usize> = e.iter().map(|x| x.0).collect();
        let mut el: Vec<usize> = e.iter().map(|x| x.1).collect();
        st.sort();
        et.sort();
        sl.sort_by(|a, b| b.cmp(a));
        el.sort_by(|a, b| b.cmp(a));
        for i in 0..k {
            s[i] = (st[i], sl[i]);
            e[i] = (et[i], el[i]);
        }
        if (0..k).all(|i| s[i].0 <= e[i].0 && s[i].1 >= e[i].1) {
            return (s, e);
        }
    }
}

pub fn to_points(env: &Environment<f64>, cols: &[(usize, usize)]) -> Vec<PointOnLine<f64>> {
    cols.iter()
        .map(|&(c, l)| PointOnLine::new(env.grid().points()[c], l))
        .collect()
}

/// Relative closeness used by the identity checks.
pub fn close(a: LppValue<f64>, b: LppValue<f64>, rel: f64) -> bool {
    match (a, b) {
        (LppValue::Finite(x), LppValue::Finite(y)) => (x - y).abs() <= rel * (1.0 + x.abs()),
        (LppValue::NegInfinity, LppValue::NegInfinity) => true,
        _ => false,
    }
}

/// Every lattice path from `(1, i)` to `(m, j)` moving right or up, as the list of visited cells.
pub fn lattice_paths(m: usize, i: usize, j: usize) -> Vec<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    if j > i {
        return out;
    }
    fn rec(
        col: usize,
        row: usize,
        m: usize,
        j: usize,
        cur: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        cur.push((col, row));
        if col == m && row == j {
            out.push(cur.clone());
        } else {
            if col < m {
                rec(col + 1, row, m, j, cur, out);
            }
            if row > j {
                rec(col, row - 1, m, j, cur, out);
            }
        }
        cur.pop();
    }
    let mut cur = Vec::new();
    rec(1, i, m, j, &mut cur, &mut out);
    out
}

/// Brute force over vertex-disjoint lattice path tuples joining `(1, I_a)` to `(m, J_a)`.
pub fn lattice_exhaustive(g: &[Vec<f64>], rows_i: &[usize], rows_j: &[usize]) -> LppValue<f64> {
    let m = g.len();
    let options: Vec<Vec<Vec<(usize, usize)>>> = rows_i
        .iter()
        .zip(rows_j)
        .map(|(&i, &j)| lattice_paths(m, i, j))
        .collect();
    let k = options.len();
    if options.iter().any(|o| o.is_empty()) {
        return LppValue::NegInfinity;
    }
    let mut best = LppValue::NegInfinity;
    let mut idx = vec![0usize; k];
    loop {
        let mut seen = std::collections::HashSet::new();
        let mut ok = true;
        let mut sum = 0.0;
        for a in 0..k {
            for &(c, r) in &options[a][idx[a]] {
                if !seen.insert((c, r)) {
                    ok = false;
                }
                sum += g[c - 1][r - 1];
            }
        }
        if ok {
            best = best.max(LppValue::Finite(sum));
        }
        let mut a = 0;
        while a < k {
            idx[a] += 1;
            if idx[a] < options[a].len() {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
        if a == k {
            break;
        }
    }
    best
}

// SPDX-License-Identifier: Apache-2.0

//! Column dynamic programs over line-occupancy sets.
//!
//! On every open grid interval each active path sits on one line. Paths are
//! labelled in start order and path `i` stays strictly above path `i + 1`
//! (smaller line index) wherever both are alive, so the active labels form a
//! contiguous range and their lines increase with the label. A state is
//! therefore just the set of occupied lines, stored as a bitmask (bit `l - 1`
//! for line `l`); the smallest line belongs to the oldest active path.
//!
//! At a column the oldest active paths end, new paths join behind the
//! survivors, and paths may start and end at the column without occupying
//! any interval. End points sharing a time are interchangeable among the
//! paths ending then, and likewise for start points.

use crate::env::Environment;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Upper bound on the number of occupancy states in one column.
pub const MAX_STATES: usize = 5000;
/// Lines are stored in a 64-bit mask.
pub const MAX_LINES: usize = 63;

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// All `size`-subsets of `{1..n}` in increasing mask order.
pub(crate) struct Layer {
    pub size: usize,
    pub masks: Vec<u64>,
    binom: Vec<Vec<usize>>,
}

impl Layer {
    pub fn new(n: usize, size: usize) -> Result<Layer> {
        if n > MAX_LINES {
            return Err(Error::Capacity(format!(
                "multi-point dynamic program supports at most {MAX_LINES} lines, got {n}"
            )));
        }
        let count = binomial(n, size);
        if count > MAX_STATES as u128 {
            return Err(Error::Capacity(format!(
                "{count} occupancy states for {size} paths on {n} lines exceeds {MAX_STATES}"
            )));
        }
        let mut masks = Vec::with_capacity(count as usize);
        if size == 0 {
            masks.push(0);
        } else if size <= n {
            let mut m: u64 = (1u64 << size) - 1;
            let limit = 1u64 << n;
            while m < limit {
                masks.push(m);
                let c = m & m.wrapping_neg();
                let r = m + c;
                m = (((r ^ m) >> 2) / c) | r;
            }
        }
        let binom = (0..=n)
            .map(|a| (0..=size).map(|b| binomial(a, b) as usize).collect())
            .collect();
        Ok(Layer { size, masks, binom })
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    /// Number of lines the subsets are drawn from.
    pub fn lines(&self) -> usize {
        self.binom.len() - 1
    }

    /// Position of `mask` in `masks` (colexicographic rank).
    pub fn rank(&self, mask: u64) -> usize {
        let mut r = 0;
        let mut m = mask;
        let mut j = 1;
        while m != 0 {
            let b = m.trailing_zeros() as usize;
            r += self.binom[b][j];
            j += 1;
            m &= m - 1;
        }
        r
    }
}

/// Lines of `mask` in increasing order, appended to `out`.
pub(crate) fn push_lines(mask: u64, out: &mut Vec<usize>) {
    let mut m = mask;
    while m != 0 {
        out.push(m.trailing_zeros() as usize + 1);
        m &= m - 1;
    }
}

/// Increasing lists of equal length where the `i`-th target is at most the `i`-th source.
pub(crate) fn dominated(sources: &[usize], targets: &[usize]) -> bool {
    sources.len() == targets.len() && sources.iter().zip(targets).all(|(s, t)| t <= s)
}

/// Start and end points in label order, as `(column, line)`.
#[derive(Clone, Debug, Default)]
pub(crate) struct Events {
    pub starts: Vec<(usize, usize)>,
    pub ends: Vec<(usize, usize)>,
}

/// What happens at one column.
#[derive(Clone, Debug, Default)]
pub(crate) struct Column {
    /// Active paths ending here (the oldest ones).
    pub ending: usize,
    /// Paths starting and ending here.
    pub instant: usize,
    /// Paths starting here and staying alive.
    pub opening: usize,
    /// Lines of all start points at this column, increasing.
    pub start_lines: Vec<usize>,
    /// Lines of all end points at this column, increasing.
    pub end_lines: Vec<usize>,
}

impl Column {
    pub fn is_quiet(&self) -> bool {
        self.start_lines.is_empty() && self.end_lines.is_empty()
    }
}

impl Events {
    pub fn first_column(&self) -> usize {
        self.starts.iter().map(|e| e.0).min().unwrap_or(0)
    }

    pub fn last_column(&self) -> usize {
        self.ends.iter().map(|e| e.0).max().unwrap_or(0)
    }

    /// Start and end columns are nondecreasing in the label and each start precedes its end.
    pub fn is_ordered(&self) -> bool {
        self.starts.len() == self.ends.len()
            && self.starts.windows(2).all(|w| w[0].0 <= w[1].0)
            && self.ends.windows(2).all(|w| w[0].0 <= w[1].0)
            && self.starts.iter().zip(&self.ends).all(|(s, e)| s.0 <= e.0)
    }

    pub fn column(&self, c: usize) -> Column {
        let mut col = Column::default();
        for (s, e) in self.starts.iter().zip(&self.ends) {
            match (s.0 == c, e.0 == c) {
                (true, true) => col.instant += 1,
                (true, false) => col.opening += 1,
                (false, true) => col.ending += 1,
                (false, false) => {}
            }
        }
        col.start_lines = self.starts.iter().filter(|s| s.0 == c).map(|s| s.1).collect();
        col.end_lines = self.ends.iter().filter(|e| e.0 == c).map(|e| e.1).collect();
        col.start_lines.sort_unstable();
        col.end_lines.sort_unstable();
        col
    }

    /// Number of paths alive on the interval after column `c`.
    pub fn active_after(&self, c: usize) -> usize {
        self.starts
            .iter()
            .zip(&self.ends)
            .filter(|(s, e)| s.0 <= c && e.0 > c)
            .count()
    }
}

/// Kuhn matching for the group exchange at a column.
///
/// Sources are the ending paths (`act`, which may only take end points) and
/// the start points (`st`, which may take end points or new slots); a source
/// may take a target whose line is at most its own. Returns for each source
/// the target index (end points first, then slots).
pub(crate) fn group_matching(
    act: &[usize],
    st: &[usize],
    ends: &[usize],
    slots: &[usize],
) -> Option<Vec<usize>> {
    let ns = act.len() + st.len();
    let nt = ends.len() + slots.len();
    if ns != nt {
        return None;
    }
    let src_line = |i: usize| if i < act.len() { act[i] } else { st[i - act.len()] };
    let tgt_line = |j: usize| if j < ends.len() { ends[j] } else { slots[j - ends.len()] };
    let allowed =
        |i: usize, j: usize| tgt_line(j) <= src_line(i) && (i >= act.len() || j < ends.len());
    let mut owner: Vec<Option<usize>> = vec![None; nt];
    fn augment(
        i: usize,
        seen: &mut [bool],
        owner: &mut [Option<usize>],
        allowed: &dyn Fn(usize, usize) -> bool,
    ) -> bool {
        for j in 0..owner.len() {
            if allowed(i, j) && !seen[j] {
                seen[j] = true;
                if owner[j].is_none() || augment(owner[j].unwrap(), seen, owner, allowed) {
                    owner[j] = Some(i);
                    return true;
                }
            }
        }
        false
    }
    for i in 0..ns {
        let mut seen = vec![false; nt];
        if !augment(i, &mut seen, &mut owner, &allowed) {
            return None;
        }
    }
    let mut out = vec![0; ns];
    for (j, o) in owner.iter().enumerate() {
        out[o.unwrap()] = j;
    }
    Some(out)
}

fn group_fits(act: &[usize], st: &[usize], ends: &[usize], slots: &[usize]) -> bool {
    if act.len() == ends.len() && st.len() == slots.len() {
        // no instant paths: the two groups are independent
        return dominated(act, ends) && dominated(st, slots);
    }
    if slots.is_empty() {
        let mut merged: Vec<usize> = act.iter().chain(st).copied().collect();
        merged.sort_unstable();
        return dominated(&merged, ends);
    }
    group_matching(act, st, ends, slots).is_some()
}

/// Whether occupancy `before` (increasing lines) can turn into `after` at `col`.
pub(crate) fn fits(col: &Column, before: &[usize], after: &[usize]) -> bool {
    let e = col.ending;
    if before.len() < e || after.len() != before.len() - e + col.opening {
        return false;
    }
    let kept = before.len() - e;
    dominated(&before[e..], &after[..kept])
        && group_fits(&before[..e], &col.start_lines, &col.end_lines, &after[kept..])
}

/// Best arrival value over predecessors for every state of `to`.
pub(crate) fn transition<T: Scalar>(from: &Layer, vals: &[T], col: &Column, to: &Layer) -> Vec<T> {
    let ninf = T::neg_infinity();
    if col.is_quiet() && from.size == to.size {
        // Each state collects the best state reachable by moving one
        // element down (larger line index) by one.
        let mut d = vals.to_vec();
        for idx in (0..to.len()).rev() {
            let mask = to.masks[idx];
            let mut best = d[idx];
            let mut m = mask;
            while m != 0 {
                let b = m.trailing_zeros();
                m &= m - 1;
                if b as usize + 1 >= to.lines() {
                    continue;
                }
                let up = 1u64 << (b + 1);
                if mask & up == 0 {
                    let j = to.rank((mask & !(1u64 << b)) | up);
                    if d[j] > best {
                        best = d[j];
                    }
                }
            }
            d[idx] = best;
        }
        return d;
    }
    let mut out = vec![ninf; to.len()];
    let k = from.size;
    let mut srcs = Vec::with_capacity(from.len() * k);
    let mut live = Vec::with_capacity(from.len());
    for (i, &mask) in from.masks.iter().enumerate() {
        if vals[i] != ninf {
            push_lines(mask, &mut srcs);
            live.push(i);
        }
    }
    let mut tgt = Vec::with_capacity(to.size);
    for (j, &mask) in to.masks.iter().enumerate() {
        tgt.clear();
        push_lines(mask, &mut tgt);
        let mut best = ninf;
        for (pos, &i) in live.iter().enumerate() {
            if vals[i] > best && fits(col, &srcs[pos * k..(pos + 1) * k], &tgt) {
                best = vals[i];
            }
        }
        out[j] = best;
    }
    out
}

/// Per-line increments over the interval `[t_c, t_{c+1}]`.
pub(crate) fn increments<T: Scalar>(env: &Environment<T>, c: usize) -> Vec<T> {
    env.lines().iter().map(|l| l[c + 1] - l[c]).collect()
}

pub(crate) fn add_increments<T: Scalar>(layer: &Layer, vals: &mut [T], inc: &[T]) {
    let ninf = T::neg_infinity();
    for (v, &mask) in vals.iter_mut().zip(&layer.masks) {
        if *v == ninf {
            continue;
        }
        let mut m = mask;
        while m != 0 {
            *v = *v + inc[m.trailing_zeros() as usize];
            m &= m - 1;
        }
    }
}

struct Layers {
    n: usize,
    cache: Vec<Option<Layer>>,
}

impl Layers {
    fn new(n: usize) -> Self {
        Layers {
            n,
            cache: Vec::new(),
        }
    }

    fn prepare(&mut self, size: usize) -> Result<()> {
        if self.cache.len() <= size {
            self.cache.resize_with(size + 1, || None);
        }
        if self.cache[size].is_none() {
            self.cache[size] = Some(Layer::new(self.n, size)?);
        }
        Ok(())
    }

    fn get(&self, size: usize) -> &Layer {
        self.cache[size].as_ref().expect("layer prepared")
    }
}

/// Arrival values at every column of the forward pass.
pub(crate) struct Trace<T> {
    /// `arrivals[c - first]` holds values over occupancies of the interval before column `c`.
    pub arrivals: Vec<(usize, Vec<T>)>,
    pub first: usize,
    pub last: usize,
    pub value: T,
}

/// Maximal summed increment over ordered disjoint tuples joining the events.
///
/// Returns `-inf` when no admissible tuple exists. With `keep` the arrival
/// arrays are stored for backtracking.
pub(crate) fn solve<T: Scalar>(env: &Environment<T>, ev: &Events, keep: bool) -> Result<Trace<T>> {
    let n = env.n_lines();
    let (c0, c1) = (ev.first_column(), ev.last_column());
    let ninf = T::neg_infinity();
    let mut trace = Trace {
        arrivals: Vec::new(),
        first: c0,
        last: c1,
        value: ninf,
    };
    if !ev.is_ordered() || ev.starts.is_empty() {
        return Ok(trace);
    }
    let active: Vec<usize> = (c0..c1).map(|c| ev.active_after(c)).collect();
    if active.iter().any(|&a| a > n) {
        return Ok(trace);
    }
    let mut layers = Layers::new(n);
    layers.prepare(0)?;
    for &a in &active {
        layers.prepare(a)?;
    }
    let mut size = 0usize;
    let mut vals = vec![T::zero()];
    for c in c0..=c1 {
        if keep {
            trace.arrivals.push((size, vals.clone()));
        }
        let next = if c == c1 { 0 } else { active[c - c0] };
        let col = ev.column(c);
        let d = transition(layers.get(size), &vals, &col, layers.get(next));
        if c == c1 {
            trace.value = d[0];
            return Ok(trace);
        }
        vals = d;
        add_increments(layers.get(next), &mut vals, &increments(env, c));
        size = next;
        if vals.iter().all(|&v| v == ninf) {
            return Ok(trace);
        }
    }
    Ok(trace)
}

/// Optimal occupancy masks for the intervals `first..last`, choosing at each
/// column, among optimal predecessors, the one furthest down in line index.
pub(crate) fn backtrack<T: Scalar>(env: &Environment<T>, ev: &Events, trace: &Trace<T>) -> Result<Vec<u64>> {
    let n = env.n_lines();
    let (c0, c1) = (trace.first, trace.last);
    let mut occupancy = vec![0u64; c1 - c0];
    let mut layers = Layers::new(n);
    let mut after: u64 = 0;
    let mut tgt = Vec::new();
    let mut src = Vec::new();
    for c in (c0..=c1).rev() {
        let (size, vals) = &trace.arrivals[c - c0];
        layers.prepare(*size)?;
        let layer = layers.get(*size);
        let col = ev.column(c);
        tgt.clear();
        push_lines(after, &mut tgt);
        let mut best: Option<(T, Vec<usize>, u64)> = None;
        for (i, &mask) in layer.masks.iter().enumerate() {
            if vals[i] == T::neg_infinity() {
                continue;
            }
            src.clear();
            push_lines(mask, &mut src);
            if !fits(&col, &src, &tgt) {
                continue;
            }
            let mut key = src.clone();
            key.reverse();
            let better = match &best {
                None => true,
                Some((bv, bkey, _)) => {
                    let sum: usize = key.iter().sum();
                    let bsum: usize = bkey.iter().sum();
                    vals[i] > *bv
                        || (vals[i] == *bv && (sum > bsum || (sum == bsum && key > *bkey)))
                }
            };
            if better {
                best = Some((vals[i], key, mask));
            }
        }
        let (_, _, mask) = best.ok_or(Error::NoOptimizer)?;
        if c > c0 {
            occupancy[c - c0 - 1] = mask;
        }
        after = mask;
    }
    Ok(occupancy)
}

/// For all paths ending at one varying column on the lines `end_lines`, the
/// optimal value at every column from the last start on.
///
/// `starts` are `(column, line)` pairs; entry `c` of the result is `-inf`
/// before the last start column.
pub(crate) fn terminal_profile<T: Scalar>(
    env: &Environment<T>,
    starts: &[(usize, usize)],
    end_lines: &[usize],
) -> Result<Vec<T>> {
    let n = env.n_lines();
    let m = env.grid().len();
    let ninf = T::neg_infinity();
    let mut out = vec![ninf; m];
    if starts.len() != end_lines.len() || starts.is_empty() {
        return Ok(out);
    }
    let mut sorted = starts.to_vec();
    sorted.sort_by_key(|s| s.0);
    let c0 = sorted[0].0;
    let cmax = sorted[sorted.len() - 1].0;
    let mut ends_asc = end_lines.to_vec();
    ends_asc.sort_unstable();
    // before the common end every column only opens paths
    let opening = Events {
        starts: sorted.clone(),
        ends: vec![(usize::MAX, 0); sorted.len()],
    };
    let mut layers = Layers::new(n);
    layers.prepare(0)?;
    for c in c0..m {
        let a = opening.active_after(c);
        if a > n {
            return Ok(out);
        }
        layers.prepare(a)?;
    }
    let mut size = 0usize;
    let mut vals = vec![T::zero()];
    let mut src = Vec::new();
    for c in c0..m {
        let col = opening.column(c);
        if c >= cmax {
            let closing = Column {
                ending: size,
                instant: col.opening,
                opening: 0,
                start_lines: col.start_lines.clone(),
                end_lines: ends_asc.clone(),
            };
            let layer = layers.get(size);
            let mut best = ninf;
            for (i, &mask) in layer.masks.iter().enumerate() {
                if vals[i] > best {
                    src.clear();
                    push_lines(mask, &mut src);
                    if fits(&closing, &src, &[]) {
                        best = vals[i];
                    }
                }
            }
            out[c] = best;
        }
        if c + 1 == m {
            break;
        }
        let next = opening.active_after(c);
        vals = transition(layers.get(size), &vals, &col, layers.get(next));
        add_increments(layers.get(next), &mut vals, &increments(env, c));
        size = next;
    }
    Ok(out)
}

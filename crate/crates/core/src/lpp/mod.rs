// SPDX-License-Identifier: Apache-2.0

//! Semi-discrete last passage percolation.
//!
//! A path from `(x, n)` to `(y, m)` with `n >= m` is described by the times
//! `pi_i` at which it leaves line `i`; its length is
//! `sum_{i=m..=n} f_i(pi_i) - f_i(pi_{i+1})` with `pi_{n+1} = x`, `pi_m = y`.
//! Jump times are restricted to grid points, which loses nothing for
//! piecewise-linear lines.

pub(crate) mod engine;
mod value;

use serde::{Deserialize, Serialize};

use crate::env::Environment;
use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

pub use engine::{MAX_LINES, MAX_STATES};
pub(crate) use engine::Events;
pub use value::LppValue;

/// A grid time on a given line (1-based).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointOnLine<T> {
    pub time: T,
    pub line: usize,
}

impl<T> PointOnLine<T> {
    pub const fn new(time: T, line: usize) -> Self {
        PointOnLine { time, line }
    }
}

/// Start and end points of `k` paths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndpointTuple<T> {
    starts: Vec<PointOnLine<T>>,
    ends: Vec<PointOnLine<T>>,
}

impl<T: Scalar> EndpointTuple<T> {
    /// Checks the ordering rules: equal length, times nondecreasing and lines
    /// nonincreasing along each side, and each start before and below its end.
    pub fn new(starts: Vec<PointOnLine<T>>, ends: Vec<PointOnLine<T>>) -> Result<Self> {
        if starts.is_empty() || starts.len() != ends.len() {
            return Err(invalid(format!(
                "{} starts and {} ends; need equal nonzero counts",
                starts.len(),
                ends.len()
            )));
        }
        for (name, side) in [("start", &starts), ("end", &ends)] {
            for w in side.windows(2) {
                if w[1].time < w[0].time || w[1].line > w[0].line {
                    return Err(invalid(format!(
                        "{name} points must have nondecreasing times and nonincreasing lines"
                    )));
                }
            }
        }
        for (i, (p, q)) in starts.iter().zip(&ends).enumerate() {
            if p.line < q.line || p.time > q.time {
                return Err(invalid(format!(
                    "path {}: start (t={}, line {}) must not lie after or above end (t={}, line {})",
                    i + 1,
                    p.time,
                    p.line,
                    q.time,
                    q.line
                )));
            }
            if p.line == 0 || q.line == 0 {
                return Err(invalid("line indices start at 1"));
            }
        }
        Ok(EndpointTuple { starts, ends })
    }

    pub fn single(p: PointOnLine<T>, q: PointOnLine<T>) -> Result<Self> {
        Self::new(vec![p], vec![q])
    }

    pub fn starts(&self) -> &[PointOnLine<T>] {
        &self.starts
    }

    pub fn ends(&self) -> &[PointOnLine<T>] {
        &self.ends
    }

    pub fn k(&self) -> usize {
        self.starts.len()
    }

    pub(crate) fn events(&self, env: &Environment<T>) -> Result<Events> {
        let conv = |pts: &[PointOnLine<T>]| -> Result<Vec<(usize, usize)>> {
            pts.iter()
                .map(|p| Ok((locate_point(env, p)?, p.line)))
                .collect()
        };
        Ok(Events {
            starts: conv(&self.starts)?,
            ends: conv(&self.ends)?,
        })
    }
}

fn locate_point<T: Scalar>(env: &Environment<T>, p: &PointOnLine<T>) -> Result<usize> {
    if p.line == 0 || p.line > env.n_lines() {
        return Err(invalid(format!(
            "line {} outside 1..={}",
            p.line,
            env.n_lines()
        )));
    }
    env.grid().index_of(p.time)
}

/// A path given by its jump times.
///
/// `jumps[i - end_line]` is the time at which the path leaves line `i`, for
/// `i` in `end_line..=start_line`; the entry for `end_line` is `end_time`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpPath<T> {
    pub start_time: T,
    pub end_time: T,
    pub start_line: usize,
    pub end_line: usize,
    pub jumps: Vec<T>,
}

impl<T: Scalar> JumpPath<T> {
    pub fn new(
        start: PointOnLine<T>,
        end: PointOnLine<T>,
        jumps: Vec<T>,
    ) -> Result<Self> {
        let path = JumpPath {
            start_time: start.time,
            end_time: end.time,
            start_line: start.line,
            end_line: end.line,
            jumps,
        };
        path.check()?;
        Ok(path)
    }

    fn check(&self) -> Result<()> {
        if self.end_line == 0 || self.start_line < self.end_line {
            return Err(invalid("path must end on a line index no larger than its start"));
        }
        if self.jumps.len() != self.start_line - self.end_line + 1 {
            return Err(invalid(format!(
                "path from line {} to {} needs {} jump times, got {}",
                self.start_line,
                self.end_line,
                self.start_line - self.end_line + 1,
                self.jumps.len()
            )));
        }
        if self.jumps[0] != self.end_time {
            return Err(invalid("the jump time of the end line must equal the end time"));
        }
        if self.jumps.windows(2).any(|w| w[1] > w[0]) {
            return Err(invalid("jump times must be nonincreasing in the line index"));
        }
        let last = *self.jumps.last().unwrap();
        if last < self.start_time || self.end_time < self.start_time {
            return Err(invalid("jump times must lie within [start time, end time]"));
        }
        Ok(())
    }

    /// `pi_i` for `i` in `end_line..=start_line + 1`.
    pub fn jump(&self, line: usize) -> T {
        if line > self.start_line {
            self.start_time
        } else {
            self.jumps[line - self.end_line]
        }
    }

    /// The line occupied at time `z` (right-continuous), for `z` in `[start, end]`.
    pub fn line_at(&self, z: T) -> usize {
        (self.end_line..=self.start_line)
            .rev()
            .find(|&i| self.jump(i) > z)
            .unwrap_or(self.end_line)
    }

    /// The path that stays on `line` from `t0` to `t1`.
    pub fn flat(line: usize, t0: T, t1: T) -> Self {
        JumpPath {
            start_time: t0,
            end_time: t1,
            start_line: line,
            end_line: line,
            jumps: vec![t1],
        }
    }
}

/// A tuple of paths, pairwise on distinct lines on the open overlap of their time spans.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisjointTuple<T> {
    pub paths: Vec<JumpPath<T>>,
}

impl<T: Scalar> DisjointTuple<T> {
    /// Checks pairwise disjointness at every jump time and between them.
    pub fn is_disjoint(&self) -> bool {
        for (a, p) in self.paths.iter().enumerate() {
            for q in &self.paths[a + 1..] {
                let lo = p.start_time.max(q.start_time);
                let hi = p.end_time.min(q.end_time);
                if !(lo < hi) {
                    continue;
                }
                let mut times: Vec<T> = p
                    .jumps
                    .iter()
                    .chain(&q.jumps)
                    .copied()
                    .filter(|&t| t > lo && t < hi)
                    .chain([lo, hi])
                    .collect();
                times.sort_by(|x, y| x.partial_cmp(y).unwrap());
                times.dedup();
                let half = T::lit(0.5);
                for (idx, w) in times.windows(2).enumerate() {
                    let mid = w[0] + (w[1] - w[0]) * half;
                    if p.line_at(mid) == q.line_at(mid) {
                        return false;
                    }
                    if idx > 0 && p.line_at(w[0]) == q.line_at(w[0]) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Each path lies on a smaller line than the next one wherever both are alive.
    pub fn is_ordered(&self) -> bool {
        self.paths.windows(2).all(|w| {
            let (p, q) = (&w[0], &w[1]);
            let lo = p.start_time.max(q.start_time);
            let hi = p.end_time.min(q.end_time);
            if !(lo < hi) {
                return true;
            }
            let mut times: Vec<T> = p
                .jumps
                .iter()
                .chain(&q.jumps)
                .copied()
                .filter(|&t| t > lo && t < hi)
                .chain([lo, hi])
                .collect();
            times.sort_by(|x, y| x.partial_cmp(y).unwrap());
            times.dedup();
            let half = T::lit(0.5);
            times.windows(2).all(|w| {
                let mid = w[0] + (w[1] - w[0]) * half;
                p.line_at(mid) < q.line_at(mid)
            })
        })
    }

    pub fn length(&self, env: &Environment<T>) -> Result<T> {
        self.paths
            .iter()
            .try_fold(T::zero(), |acc, p| Ok(acc + path_length(env, p)?))
    }
}

/// Values of a last passage problem at consecutive grid columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile<V> {
    /// Grid index of `values[0]`.
    pub first: usize,
    pub values: Vec<V>,
}

impl<V: Copy> Profile<V> {
    pub fn at(&self, column: usize) -> Option<V> {
        column
            .checked_sub(self.first)
            .and_then(|j| self.values.get(j).copied())
    }
}

/// Length of `path`: the sum of line increments between consecutive jump times.
pub fn path_length<T: Scalar>(env: &Environment<T>, path: &JumpPath<T>) -> Result<T> {
    path.check()?;
    if path.start_line > env.n_lines() {
        return Err(invalid(format!(
            "path uses line {} of a {}-line environment",
            path.start_line,
            env.n_lines()
        )));
    }
    let grid = env.grid();
    grid.index_of(path.start_time)?;
    let mut total = T::zero();
    for i in path.end_line..=path.start_line {
        let hi = grid.index_of(path.jump(i))?;
        let lo = grid.index_of(path.jump(i + 1))?;
        let line = env.line(i);
        total = total + (line[hi] - line[lo]);
    }
    Ok(total)
}

fn check_single<T: Scalar>(
    env: &Environment<T>,
    p: &PointOnLine<T>,
    q: &PointOnLine<T>,
) -> Result<(usize, usize)> {
    let cp = locate_point(env, p)?;
    let cq = locate_point(env, q)?;
    if p.line < q.line || cp > cq {
        return Err(invalid(format!(
            "start (t={}, line {}) must not lie after or above end (t={}, line {})",
            p.time, p.line, q.time, q.line
        )));
    }
    Ok((cp, cq))
}

/// Runs the single-path column recursion from `p` and calls `visit(column, L)`
/// where `L[i - end_line]` is the value to `(t_column, i)`.
fn single_path_sweep<T: Scalar>(
    env: &Environment<T>,
    start_col: usize,
    start_line: usize,
    end_line: usize,
    last_col: usize,
    mut visit: impl FnMut(usize, &[T]),
) {
    let width = start_line - end_line + 1;
    let mut l = vec![T::zero(); width];
    visit(start_col, &l);
    for c in start_col..last_col {
        let top = width - 1;
        let line = env.line(start_line);
        l[top] = l[top] + (line[c + 1] - line[c]);
        for j in (0..top).rev() {
            let line = env.line(end_line + j);
            let stay = l[j] + (line[c + 1] - line[c]);
            l[j] = if l[j + 1] > stay { l[j + 1] } else { stay };
        }
        visit(c + 1, &l);
    }
}

/// Single-path last passage value `f[p -> q]`.
pub fn lpp_value<T: Scalar>(env: &Environment<T>, p: PointOnLine<T>, q: PointOnLine<T>) -> Result<T> {
    let (cp, cq) = check_single(env, &p, &q)?;
    let mut out = T::zero();
    single_path_sweep(env, cp, p.line, q.line, cq, |c, l| {
        if c == cq {
            out = l[0];
        }
    });
    Ok(out)
}

/// `y -> f[p -> (y, end_line)]` at every grid point `y >= p.time`.
pub fn lpp_profile<T: Scalar>(
    env: &Environment<T>,
    p: PointOnLine<T>,
    end_line: usize,
) -> Result<Profile<T>> {
    let cp = locate_point(env, &p)?;
    if end_line == 0 || end_line > p.line {
        return Err(invalid(format!(
            "end line {end_line} must lie in 1..={}",
            p.line
        )));
    }
    let last = env.grid().len() - 1;
    let mut values = Vec::with_capacity(last + 1 - cp);
    single_path_sweep(env, cp, p.line, end_line, last, |_, l| values.push(l[0]));
    Ok(Profile { first: cp, values })
}

/// Supremum of summed path lengths over disjoint tuples joining the start
/// points to the end points; minus infinity when no such tuple exists.
pub fn multipoint_lpp<T: Scalar>(env: &Environment<T>, e: &EndpointTuple<T>) -> Result<LppValue<T>> {
    if e.k() == 1 {
        return lpp_value(env, e.starts[0], e.ends[0]).map(LppValue::Finite);
    }
    let ev = e.events(env)?;
    let trace = engine::solve(env, &ev, false)?;
    Ok(LppValue::from_float(trace.value))
}

/// `y -> f[starts -> (y, end_lines)]`: the value with all paths ending at the
/// same grid time `y`, for every `y` at or after the last start.
pub fn multipoint_profile<T: Scalar>(
    env: &Environment<T>,
    starts: &[PointOnLine<T>],
    end_lines: &[usize],
) -> Result<Profile<LppValue<T>>> {
    if starts.is_empty() || starts.len() != end_lines.len() {
        return Err(invalid("need equal nonzero numbers of starts and end lines"));
    }
    if end_lines.iter().any(|&l| l == 0 || l > env.n_lines()) {
        return Err(invalid("end line outside the environment"));
    }
    let cols = starts
        .iter()
        .map(|p| Ok((locate_point(env, p)?, p.line)))
        .collect::<Result<Vec<_>>>()?;
    let first = cols.iter().map(|c| c.0).max().unwrap();
    let raw = engine::terminal_profile(env, &cols, end_lines)?;
    Ok(Profile {
        first,
        values: raw[first..].iter().map(|&v| LppValue::from_float(v)).collect(),
    })
}

/// The optimizer whose paths lie furthest right (jump as late as possible).
///
/// Paths are returned in start order and each stays strictly above (on a
/// smaller line than) every later path while both are alive. Points sharing
/// a time may be assigned to paths in a different order than listed in `e`.
pub fn rightmost_optimizer<T: Scalar>(
    env: &Environment<T>,
    e: &EndpointTuple<T>,
) -> Result<DisjointTuple<T>> {
    let ev = e.events(env)?;
    let trace = engine::solve(env, &ev, true)?;
    if trace.value == T::neg_infinity() {
        return Err(Error::NoOptimizer);
    }
    let occupancy = engine::backtrack(env, &ev, &trace)?;
    reconstruct(env, &ev, trace.first, trace.last, &occupancy)
}

struct Open<T> {
    label: usize,
    start: PointOnLine<T>,
    line: usize,
    jumps: Vec<(usize, T)>,
}

impl<T: Scalar> Open<T> {
    fn move_to(&mut self, line: usize, t: T) {
        for l in line + 1..=self.line {
            self.jumps.push((l, t));
        }
        self.line = line;
    }

    fn finish(self, end: PointOnLine<T>) -> (usize, JumpPath<T>) {
        let mut jumps = vec![end.time; self.start.line - end.line + 1];
        for (l, t) in self.jumps {
            jumps[l - end.line] = t;
        }
        let path = JumpPath {
            start_time: self.start.time,
            end_time: end.time,
            start_line: self.start.line,
            end_line: end.line,
            jumps,
        };
        (self.label, path)
    }
}

/// Labels an occupancy sequence with paths, column by column.
///
/// Surviving paths keep their order and take the smallest occupied lines;
/// the oldest paths end and new paths take the remaining lines.
fn reconstruct<T: Scalar>(
    env: &Environment<T>,
    ev: &Events,
    c0: usize,
    c1: usize,
    occupancy: &[u64],
) -> Result<DisjointTuple<T>> {
    let pts = env.grid().points();
    let mut open: Vec<Open<T>> = Vec::new();
    let mut done: Vec<(usize, JumpPath<T>)> = Vec::new();
    let mut next_label = 0;
    let mut after = Vec::new();
    for c in c0..=c1 {
        let t = pts[c];
        let col = ev.column(c);
        after.clear();
        if c < c1 {
            engine::push_lines(occupancy[c - c0], &mut after);
        }
        let before: Vec<usize> = open.iter().map(|o| o.line).collect();
        let e = col.ending;
        let kept = before.len() - e;
        let slots = &after[kept..];
        let assign = engine::group_matching(&before[..e], &col.start_lines, &col.end_lines, slots)
            .ok_or(Error::NoOptimizer)?;
        let mut survivors = open.split_off(e);
        for (i, mut path) in open.drain(..).enumerate() {
            let end = PointOnLine::new(t, col.end_lines[assign[i]]);
            path.move_to(end.line, t);
            done.push(path.finish(end));
        }
        for (path, &line) in survivors.iter_mut().zip(&after[..kept]) {
            path.move_to(line, t);
        }
        // instant paths first, then new paths by slot
        let mut fresh: Vec<(usize, usize, usize)> = col
            .start_lines
            .iter()
            .enumerate()
            .map(|(a, &line)| (assign[e + a], line, a))
            .collect();
        fresh.sort_by_key(|&(target, _, _)| {
            if target < col.end_lines.len() {
                (0, target)
            } else {
                (1, target)
            }
        });
        for (target, line, _) in fresh {
            let mut path = Open {
                label: next_label,
                start: PointOnLine::new(t, line),
                line,
                jumps: Vec::new(),
            };
            next_label += 1;
            if target < col.end_lines.len() {
                let end = PointOnLine::new(t, col.end_lines[target]);
                path.move_to(end.line, t);
                done.push(path.finish(end));
            } else {
                path.move_to(slots[target - col.end_lines.len()], t);
                survivors.push(path);
            }
        }
        open = survivors;
    }
    done.sort_by_key(|d| d.0);
    Ok(DisjointTuple {
        paths: done.into_iter().map(|d| d.1).collect(),
    })
}

/// Both sides of the metric composition law across the line boundary `j | j+1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompositionReport<T> {
    pub direct: LppValue<T>,
    pub composed: LppValue<T>,
    pub difference: T,
    /// Crossing times attaining `composed`.
    pub argmax: Option<Vec<T>>,
}

/// Number of crossing tuples `metric_composition_check` is willing to enumerate.
pub const MAX_COMPOSITION_TUPLES: usize = 200_000;

/// Compares `f[p -> q]` with `max_z f[p -> (z, j+1)] + f[(z, j) -> q]`, the
/// maximum over nondecreasing grid tuples `z`.
pub fn metric_composition_check<T: Scalar>(
    env: &Environment<T>,
    e: &EndpointTuple<T>,
    j: usize,
) -> Result<CompositionReport<T>> {
    if j == 0
        || e.starts.iter().any(|p| p.line <= j)
        || e.ends.iter().any(|q| q.line > j)
    {
        return Err(invalid(format!(
            "split line {j} must satisfy start lines > j >= end lines"
        )));
    }
    let ev = e.events(env)?;
    let direct = multipoint_lpp(env, e)?;
    let lo: Vec<usize> = ev.starts.iter().map(|s| s.0).collect();
    let hi: Vec<usize> = ev.ends.iter().map(|s| s.0).collect();
    let count = count_tuples(&lo, &hi);
    if count > MAX_COMPOSITION_TUPLES as u128 {
        return Err(Error::Capacity(format!(
            "{count} crossing tuples exceed {MAX_COMPOSITION_TUPLES}"
        )));
    }
    let pts = env.grid().points();
    let mut best = LppValue::NegInfinity;
    let mut argmax = None;
    let mut z = lo.clone();
    loop {
        let mid_lo: Vec<_> = z.iter().map(|&c| PointOnLine::new(pts[c], j + 1)).collect();
        let mid_hi: Vec<_> = z.iter().map(|&c| PointOnLine::new(pts[c], j)).collect();
        let left = EndpointTuple::new(e.starts.clone(), mid_lo)?;
        let right = EndpointTuple::new(mid_hi, e.ends.clone())?;
        let v = multipoint_lpp(env, &left)?.plus(multipoint_lpp(env, &right)?);
        if v > best {
            best = v;
            argmax = Some(z.iter().map(|&c| pts[c]).collect());
        }
        if !next_tuple(&mut z, &lo, &hi) {
            break;
        }
    }
    let difference = match (direct, best) {
        (LppValue::Finite(a), LppValue::Finite(b)) => (a - b).abs(),
        (LppValue::NegInfinity, LppValue::NegInfinity) => T::zero(),
        _ => T::infinity(),
    };
    Ok(CompositionReport {
        direct,
        composed: best,
        difference,
        argmax,
    })
}

/// Counts nondecreasing tuples with `lo[i] <= z[i] <= hi[i]`.
fn count_tuples(lo: &[usize], hi: &[usize]) -> u128 {
    let top = *hi.iter().max().unwrap_or(&0);
    // ways[v] = number of valid prefixes ending with value v
    let mut ways = vec![0u128; top + 1];
    for v in lo[0]..=hi[0] {
        ways[v] = 1;
    }
    for i in 1..lo.len() {
        let mut next = vec![0u128; top + 1];
        let mut acc = 0u128;
        for v in 0..=top {
            acc += ways[v];
            if v >= lo[i] && v <= hi[i] {
                next[v] = acc;
            }
        }
        ways = next;
    }
    ways.iter().sum()
}

/// Advances `z` to the next nondecreasing tuple within bounds, in lexicographic order.
fn next_tuple(z: &mut [usize], lo: &[usize], hi: &[usize]) -> bool {
    let k = z.len();
    for i in (0..k).rev() {
        if z[i] < hi[i] {
            let v = z[i] + 1;
            // later entries restart at the smallest admissible value
            let ok = (i + 1..k).all(|j| v.max(lo[j]) <= hi[j]);
            if ok {
                z[i] = v;
                for j in i + 1..k {
                    z[j] = z[j - 1].max(lo[j]);
                }
                return true;
            }
        }
    }
    false
}

/// Result of [`lpp_from_minus_infinity`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FromMinusInfinity<T> {
    /// `g` at the leftmost grid point.
    pub value: LppValue<T>,
    /// Largest `z` such that `g` stays within `tol` of its leftmost value on all grid points `<= z`.
    pub stabilization: Option<T>,
    /// `(z, g(z))` for every grid point left of the earliest end time.
    pub trace: Vec<(T, LppValue<T>)>,
}

/// `g(z) = f[(z, I) -> ends] + sum_{i in I} f_i(z)` at every grid `z` left of
/// the ends, with the point from which `g` is constant looking left.
pub fn lpp_from_minus_infinity<T: Scalar>(
    env: &Environment<T>,
    lines: &[usize],
    ends: &[PointOnLine<T>],
    tol: T,
) -> Result<FromMinusInfinity<T>> {
    if !(tol > T::zero()) {
        return Err(invalid(format!("tolerance must be positive, got {tol}")));
    }
    if lines.is_empty() || lines.len() != ends.len() {
        return Err(invalid("need as many start lines as end points"));
    }
    let mut start_lines = lines.to_vec();
    start_lines.sort_unstable_by(|a, b| b.cmp(a));
    let grid = env.grid();
    let cols = ends
        .iter()
        .map(|q| locate_point(env, q))
        .collect::<Result<Vec<_>>>()?;
    let first_end = *cols.iter().min().unwrap();
    if first_end == 0 {
        return Err(invalid("the grid must extend strictly left of every end time"));
    }
    let mut trace = Vec::with_capacity(first_end);
    for z in 0..first_end {
        let t = grid.points()[z];
        let starts = start_lines.iter().map(|&l| PointOnLine::new(t, l)).collect();
        let e = EndpointTuple::new(starts, ends.to_vec())?;
        let base: T = start_lines.iter().map(|&l| env.line(l)[z]).sum();
        let v = multipoint_lpp(env, &e)?.map(|v| v + base);
        trace.push((t, v));
    }
    let value = trace[0].1;
    let mut stabilization = None;
    let mut stable = 0;
    for (idx, &(_, v)) in trace.iter().enumerate() {
        let close = match (v, value) {
            (LppValue::Finite(a), LppValue::Finite(b)) => (a - b).abs() <= tol,
            (LppValue::NegInfinity, LppValue::NegInfinity) => true,
            _ => false,
        };
        if !close {
            break;
        }
        stable = idx + 1;
    }
    if stable >= 2 {
        stabilization = Some(trace[stable - 1].0);
    }
    Ok(FromMinusInfinity {
        value,
        stabilization,
        trace,
    })
}

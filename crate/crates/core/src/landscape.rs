// SPDX-License-Identifier: Apache-2.0

//! Finite-n constructions behind the landscape-level statements: the
//! top-lines environment, difference profiles and their record sets, the
//! two-wedge cusp and a local comparison against Brownian last passage.

use serde::Serialize;

use crate::env::{sample_brownian_env, Environment, Grid, PLFunction, Seed};
use crate::error::{invalid, Error, Result};
use crate::lpp::{lpp_profile, multipoint_profile, PointOnLine};
use crate::mc::{ks_statistic, ks_p_value};
use crate::pitman::{record_crossings, running_max, w_tau_i, LineIndexSet};
use crate::scalar::Scalar;

/// Where the paths of a [`WxEnvironment`] start.
#[derive(Clone, Debug, PartialEq)]
pub enum WxSource<T> {
    /// At the left grid endpoint, on the given lines.
    Lines(LineIndexSet),
    /// On the bottom line, at the given increasing times.
    Spatial(Vec<T>),
}

/// Lines `g_1 .. g_k` whose partial sums are the multi-point values
/// `f[starts^l -> (y, 1)^l]`.
#[derive(Clone, Debug, PartialEq)]
pub struct WxEnvironment<T> {
    pub lines: Environment<T>,
    pub source: WxSource<T>,
}

impl<T: Scalar> WxEnvironment<T> {
    pub fn k(&self) -> usize {
        self.lines.n_lines()
    }

    pub fn grid(&self) -> &Grid<T> {
        self.lines.grid()
    }

    /// `g_1(y) + .. + g_l(y)` at grid column `c`.
    pub fn partial_sum(&self, l: usize, c: usize) -> T {
        (1..=l).map(|i| self.lines.line(i)[c]).sum()
    }
}

/// The top `|I|` lines of `W_{tau_I} env`.
///
/// They live on the refinement of the grid produced by the transform, which
/// contains every record crossing used along the way.
pub fn wx_line_env<T: Scalar>(env: &Environment<T>, set: &LineIndexSet) -> Result<WxEnvironment<T>> {
    env.require_pinned()?;
    let w = w_tau_i(env, set)?;
    Ok(WxEnvironment {
        lines: w.sub_environment(1, set.len())?,
        source: WxSource::Lines(set.clone()),
    })
}

/// Same lines as [`wx_line_env`] on the original grid, from multi-point
/// profiles instead of Pitman transforms.
pub fn wx_line_env_by_lpp<T: Scalar>(env: &Environment<T>, set: &LineIndexSet) -> Result<WxEnvironment<T>> {
    env.require_pinned()?;
    if set.max() > env.n_lines() {
        return Err(invalid(format!("line {} exceeds n = {}", set.max(), env.n_lines())));
    }
    let t0 = env.grid().first();
    let sums = (1..=set.len())
        .map(|l| {
            let starts: Vec<_> = set.prefix(l).iter().rev().map(|&i| PointOnLine::new(t0, i)).collect();
            finite_values(multipoint_profile(env, &starts, &vec![1; l])?.values)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WxEnvironment {
        lines: Environment::new(env.grid().clone(), differences(sums))?,
        source: WxSource::Lines(set.clone()),
    })
}

/// Lines for spatial starts `(x_1, n), .., (x_k, n)` on the grid from `x_k` on.
pub fn wx_spatial_env<T: Scalar>(env: &Environment<T>, starts: &[T]) -> Result<WxEnvironment<T>> {
    if starts.is_empty() || starts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("spatial starts must be nonempty and strictly increasing"));
    }
    let n = env.n_lines();
    let last = env.grid().index_of(*starts.last().unwrap())?;
    if last + 1 >= env.grid().len() {
        return Err(invalid("the last start must lie before the right grid endpoint"));
    }
    let sums = (1..=starts.len())
        .map(|l| {
            let pts: Vec<_> = starts[..l].iter().map(|&x| PointOnLine::new(x, n)).collect();
            let prof = multipoint_profile(env, &pts, &vec![1; l])?;
            finite_values(prof.values[last - prof.first..].to_vec())
        })
        .collect::<Result<Vec<_>>>()?;
    let grid = Grid::new(env.grid().points()[last..].to_vec())?;
    Ok(WxEnvironment {
        lines: Environment::new(grid, differences(sums))?,
        source: WxSource::Spatial(starts.to_vec()),
    })
}

fn finite_values<T: Scalar>(values: Vec<crate::lpp::LppValue<T>>) -> Result<Vec<T>> {
    values
        .into_iter()
        .map(|v| v.finite().ok_or_else(|| Error::Validation("multi-point value is minus infinity".into())))
        .collect()
}

fn differences<T: Scalar>(sums: Vec<Vec<T>>) -> Vec<Vec<T>> {
    let mut out = Vec::with_capacity(sums.len());
    for l in 0..sums.len() {
        if l == 0 {
            out.push(sums[0].clone());
        } else {
            out.push(sums[l].iter().zip(&sums[l - 1]).map(|(&a, &b)| a - b).collect());
        }
    }
    out
}

/// `A(y)`, the difference of two single-path profiles, with the lines it is
/// compared against.
#[derive(Clone, Debug, PartialEq)]
pub struct DifferenceProfile<T> {
    pub a: PLFunction<T>,
    /// Maximal open intervals on which `A` strictly increases.
    pub support: Vec<(T, T)>,
    /// `g_1, g_2` on the grid of `a`, when they could be computed.
    pub g: Option<(Vec<T>, Vec<T>)>,
    /// `max |A(y) - A(y_0) - (R(y) - R(y_0))|` with `R` the running max of
    /// `g_2 - g_1` started at the first grid point `y_0`.
    pub residual: Option<T>,
}

impl<T: Scalar> DifferenceProfile<T> {
    /// Largest drop of `A` between consecutive grid points.
    pub fn monotonicity_defect(&self) -> T {
        self.a
            .values()
            .windows(2)
            .map(|w| (w[0] - w[1]).max(T::zero()))
            .fold(T::zero(), T::max)
    }

    /// Maximal intervals on which `g_2 - g_1` sits at its running max and climbs.
    pub fn attainment_set(&self) -> Option<Vec<(T, T)>> {
        let (g1, g2) = self.g.as_ref()?;
        let d: Vec<T> = g2.iter().zip(g1).map(|(&b, &a)| b - a).collect();
        let r = running_max(&d);
        let at_max = |c: usize| d[c] >= r[c] - increase_threshold(r[c]);
        let rising = (0..d.len() - 1)
            .map(|c| at_max(c) && at_max(c + 1) && d[c + 1] - d[c] > increase_threshold(d[c + 1]))
            .collect::<Vec<_>>();
        Some(merge_segments(self.a.grid().points(), &rising))
    }
}

/// Gain that counts as a strict increase at level `v`.
fn increase_threshold<T: Scalar>(v: T) -> T {
    T::lit(1e-9) * (T::one() + v.abs())
}

fn increasing_segments<T: Scalar>(values: &[T]) -> Vec<bool> {
    values.windows(2).map(|w| w[1] - w[0] > increase_threshold(w[1])).collect()
}

fn merge_segments<T: Scalar>(points: &[T], flags: &[bool]) -> Vec<(T, T)> {
    let mut out: Vec<(T, T)> = Vec::new();
    let mut open: Option<usize> = None;
    for (c, &f) in flags.iter().enumerate() {
        match (f, open) {
            (true, None) => open = Some(c),
            (false, Some(s)) => {
                out.push((points[s], points[c]));
                open = None;
            }
            _ => {}
        }
    }
    if let Some(s) = open {
        out.push((points[s], points[flags.len()]));
    }
    out
}

fn residual<T: Scalar>(a: &[T], g1: &[T], g2: &[T]) -> T {
    let d: Vec<T> = g2.iter().zip(g1).map(|(&b, &a)| b - a).collect();
    let r = running_max(&d);
    a.iter()
        .zip(&r)
        .map(|(&x, &m)| ((x - a[0]) - (m - r[0])).abs())
        .fold(T::zero(), T::max)
}

/// `A(y) = f[(t_0, i2) -> (y, 1)] - f[(t_0, i1) -> (y, 1)]` for line starts.
///
/// `A` equals the running max of `g_2 - g_1` where `g` comes from
/// [`wx_line_env`] on `{i1, i2}`. Both are computed on a common refinement
/// that contains the record crossings of `g_2 - g_1`, so the comparison is
/// exact up to rounding and `residual` measures it.
pub fn difference_profile_line<T: Scalar>(env: &Environment<T>, i1: usize, i2: usize) -> Result<DifferenceProfile<T>> {
    if i1 == 0 || i1 >= i2 {
        return Err(invalid(format!("need 1 <= i1 < i2, got {i1}, {i2}")));
    }
    if i2 > env.n_lines() {
        return Err(invalid(format!("line {i2} exceeds n = {}", env.n_lines())));
    }
    let wx = wx_line_env(env, &LineIndexSet::new(vec![i1, i2])?)?;
    let d: Vec<T> = wx.lines.line(2).iter().zip(wx.lines.line(1)).map(|(&b, &a)| b - a).collect();
    let g = wx.lines.with_inserted(&record_crossings(&d));
    let refined = env.resampled(g.grid())?;
    let t0 = refined.grid().first();
    let p2 = lpp_profile(&refined, PointOnLine::new(t0, i2), 1)?.values;
    let p1 = lpp_profile(&refined, PointOnLine::new(t0, i1), 1)?.values;
    let a: Vec<T> = p2.iter().zip(&p1).map(|(&x, &y)| x - y).collect();
    let (g1, g2) = (g.line(1).to_vec(), g.line(2).to_vec());
    let res = residual(&a, &g1, &g2);
    let support = merge_segments(g.grid().points(), &increasing_segments(&a));
    Ok(DifferenceProfile {
        a: PLFunction::new(g.grid().clone(), a)?,
        support,
        g: Some((g1, g2)),
        residual: Some(res),
    })
}

/// `A(y) = f[(x2, n) -> (y, 1)] - f[(x1, n) -> (y, 1)]` for `y >= x2`.
///
/// The running max comparison is only asymptotic here. It is reported in
/// `residual` when the two-path profile is finite and fits the capacity limits.
pub fn difference_profile_spatial<T: Scalar>(env: &Environment<T>, x1: T, x2: T) -> Result<DifferenceProfile<T>> {
    if x1 >= x2 {
        return Err(invalid("need x1 < x2"));
    }
    let n = env.n_lines();
    let c2 = env.grid().index_of(x2)?;
    env.grid().index_of(x1)?;
    let p2 = lpp_profile(env, PointOnLine::new(x2, n), 1)?;
    let p1 = lpp_profile(env, PointOnLine::new(x1, n), 1)?;
    let a: Vec<T> = (c2..env.grid().len())
        .map(|c| p2.at(c).unwrap() - p1.at(c).unwrap())
        .collect();
    let grid = Grid::new(env.grid().points()[c2..].to_vec())?;
    let support = merge_segments(grid.points(), &increasing_segments(&a));
    let (g, res) = match wx_spatial_env(env, &[x1, x2]) {
        Ok(wx) => {
            let (g1, g2) = (wx.lines.line(1).to_vec(), wx.lines.line(2).to_vec());
            let r = residual(&a, &g1, &g2);
            (Some((g1, g2)), Some(r))
        }
        Err(Error::Capacity(_) | Error::Validation(_)) => (None, None),
        Err(e) => return Err(e),
    };
    Ok(DifferenceProfile {
        a: PLFunction::new(grid, a)?,
        support,
        g,
        residual: res,
    })
}

/// Box counts of a support at several scales and the fitted log-log slope.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupportDimension {
    pub counts: Vec<(f64, usize)>,
    /// `None` when fewer than two scales see the support.
    pub slope: Option<f64>,
}

/// Counts the boxes `[t_0 + j eps, t_0 + (j + 1) eps)` meeting the open
/// support intervals, for each `eps` in `scales`.
pub fn support_dimension<T: Scalar>(profile: &DifferenceProfile<T>, scales: &[T]) -> Result<SupportDimension> {
    if scales.len() < 3 {
        return Err(invalid("need at least three scales"));
    }
    let pts = profile.a.grid().points();
    let step = pts.windows(2).map(|w| w[1] - w[0]).fold(T::zero(), T::max);
    if let Some(e) = scales.iter().find(|&&e| !(e >= step)) {
        return Err(invalid(format!("scale {e} is finer than the grid step {step}")));
    }
    let t0 = pts[0];
    let counts: Vec<(f64, usize)> = scales
        .iter()
        .map(|&eps| {
            let mut count = 0usize;
            let mut next = 0i64;
            for &(a, b) in &profile.support {
                let lo = ((a - t0) / eps).floor().to_i64().unwrap_or(0).max(next);
                let hi = ((b - t0) / eps).ceil().to_i64().unwrap_or(0) - 1;
                if hi >= lo {
                    count += (hi - lo + 1) as usize;
                    next = hi + 1;
                }
            }
            (eps.to_f64_lossy(), count)
        })
        .collect();
    Ok(SupportDimension {
        slope: log_log_slope(&counts),
        counts,
    })
}

fn log_log_slope(counts: &[(f64, usize)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = counts
        .iter()
        .filter(|c| c.1 > 0)
        .map(|&(e, n)| (-e.ln(), (n as f64).ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Two narrow wedges at heights `a1 > a2` evolved through a two-line environment.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoWedgeResult<T> {
    pub grid: Grid<T>,
    /// `a1 + f[(t_0, 1) -> (y, 1)]`.
    pub m1: Vec<T>,
    /// `a2 + f[(t_0, 2) -> (y, 1)]`.
    pub m2: Vec<T>,
    pub h: Vec<T>,
    /// First grid point with `M2 >= M1`, or the right endpoint.
    pub tau: T,
    pub tau_index: usize,
    /// False when `M2 < M1` on the whole grid.
    pub crossed: bool,
}

impl<T: Scalar> TwoWedgeResult<T> {
    /// Largest decrease of `M2 - M1` between consecutive grid points.
    pub fn monotonicity_defect(&self) -> T {
        let d: Vec<T> = self.m2.iter().zip(&self.m1).map(|(&b, &a)| b - a).collect();
        d.windows(2).map(|w| (w[0] - w[1]).max(T::zero())).fold(T::zero(), T::max)
    }

    /// `max |H - (M1 1{y < tau} + M2 1{y >= tau})|`.
    pub fn decomposition_defect(&self) -> T {
        (0..self.h.len())
            .map(|c| {
                let piece = if self.crossed && c >= self.tau_index { self.m2[c] } else { self.m1[c] };
                (self.h[c] - piece).abs()
            })
            .fold(T::zero(), T::max)
    }
}

pub fn two_wedge<T: Scalar>(env: &Environment<T>, a1: T, a2: T) -> Result<TwoWedgeResult<T>> {
    if env.n_lines() != 2 {
        return Err(invalid("two_wedge needs exactly two lines"));
    }
    if !(a1 > a2) {
        return Err(invalid("need a1 > a2"));
    }
    env.require_pinned()?;
    let t0 = env.grid().first();
    let m1: Vec<T> = env.line(1).iter().map(|&v| a1 + v).collect();
    let m2: Vec<T> = lpp_profile(env, PointOnLine::new(t0, 2), 1)?
        .values
        .into_iter()
        .map(|v| a2 + v)
        .collect();
    let h: Vec<T> = m1.iter().zip(&m2).map(|(&x, &y)| x.max(y)).collect();
    let last = h.len() - 1;
    let hit = (0..=last).find(|&c| m2[c] >= m1[c]);
    let tau_index = hit.unwrap_or(last);
    Ok(TwoWedgeResult {
        grid: env.grid().clone(),
        tau: env.grid().points()[tau_index],
        tau_index,
        crossed: hit.is_some(),
        m1,
        m2,
        h,
    })
}

/// Parameters of [`main_comparison_stats`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonSetup {
    /// Lines of the Brownian environment standing in for the landscape.
    pub lines: usize,
    /// Increasing start times `x_1 < .. < x_k` on the bottom line.
    pub starts: Vec<f64>,
    /// `[-b, b']`, to the right of every start.
    pub window: (f64, f64),
    /// Grid step inside the window.
    pub step: f64,
    /// Grid step before the window. Only the window needs to resolve scales
    /// below `t / n`, where the landscape side is locally Brownian.
    pub approach_step: f64,
    pub replicates: usize,
}

/// Increment statistics of the two sides over the window.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    /// Per-line increment variance divided by `2 step`, landscape side.
    pub variance_landscape: Vec<f64>,
    /// The same for the Brownian side.
    pub variance_brownian: Vec<f64>,
    /// Pooled landscape variance over pooled Brownian variance.
    pub variance_ratio: f64,
    /// Two-sample KS distance between the pooled normalized increments.
    pub ks: f64,
    pub ks_p: f64,
    /// Increments pooled on each side.
    pub increments: usize,
}

/// Local comparison of recentred last passage profiles against the
/// Brownian last passage object they are claimed to be absolutely
/// continuous to.
///
/// Landscape side: `y -> f[(x_i, n) -> (y, 1)] - f[(x_i, n) -> (-b, 1)]` on
/// `n` lines of variance 2. Brownian side: the same recentring of
/// `B[(-b - 1, i) -> (y, 1)]` on `k` lines of variance 2. Both are locally
/// Brownian with rate 2, so the ratio should be near 1. This is a
/// consistency check and says nothing about absolute continuity.
pub fn main_comparison_stats(setup: &ComparisonSetup, seed: Seed) -> Result<ComparisonReport> {
    let (inc_l, inc_b) = comparison_increments(setup, seed)?;
    let pool_l: Vec<f64> = inc_l.concat();
    let pool_b: Vec<f64> = inc_b.concat();
    let ks = ks_statistic(&pool_l, &pool_b)?;
    Ok(ComparisonReport {
        variance_landscape: inc_l.iter().map(|v| variance(v)).collect(),
        variance_brownian: inc_b.iter().map(|v| variance(v)).collect(),
        variance_ratio: variance(&pool_l) / variance(&pool_b),
        ks,
        ks_p: ks_p_value(ks, pool_l.len(), pool_b.len()),
        increments: pool_l.len(),
    })
}

/// Normalized window increments `(landscape side, Brownian side)`, one
/// vector per start, pooled over replicates.
pub fn comparison_increments(setup: &ComparisonSetup, seed: Seed) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let k = setup.starts.len();
    let (lo, hi) = setup.window;
    if k == 0 || k > setup.lines {
        return Err(invalid("need 1 <= k <= lines"));
    }
    if setup.starts.windows(2).any(|w| w[0] >= w[1]) || setup.starts[k - 1] >= lo || !(lo < hi) {
        return Err(invalid("starts must increase and precede the window"));
    }
    if !(setup.step > 0.0) || !(setup.approach_step > 0.0) || setup.replicates == 0 {
        return Err(invalid("need positive steps and at least one replicate"));
    }
    let grid_l = two_scale_grid(setup.starts[0], lo, hi, setup.approach_step, setup.step)?;
    let grid_b = two_scale_grid(lo - 1.0, lo, hi, setup.approach_step, setup.step)?;
    if grid_l.len().saturating_mul(setup.lines) > MAX_COMPARISON_CELLS {
        return Err(Error::Capacity(format!(
            "{} lines on {} grid points exceed {MAX_COMPARISON_CELLS} cells",
            setup.lines,
            grid_l.len()
        )));
    }
    let starts_l: Vec<usize> = setup.starts.iter().map(|&x| snap(&grid_l, x)).collect();
    let lo_l = snap(&grid_l, lo);
    let lo_b = snap(&grid_b, lo);

    let mut inc_l: Vec<Vec<f64>> = vec![Vec::new(); k];
    let mut inc_b: Vec<Vec<f64>> = vec![Vec::new(); k];
    let scale = (2.0 * (grid_l.points()[lo_l + 1] - grid_l.points()[lo_l])).sqrt();
    for r in 0..setup.replicates as u64 {
        let env = sample_brownian_env(&grid_l, setup.lines, 2.0, seed.derive("comparison-landscape", r))?;
        for (i, &c) in starts_l.iter().enumerate() {
            let p = lpp_profile(&env, PointOnLine::new(grid_l.points()[c], setup.lines), 1)?;
            push_increments(&mut inc_l[i], &p.values[lo_l - p.first..], scale);
        }
        let env = sample_brownian_env(&grid_b, k, 2.0, seed.derive("comparison-brownian", r))?;
        for (i, inc) in inc_b.iter_mut().enumerate() {
            let p = lpp_profile(&env, PointOnLine::new(grid_b.first(), i + 1), 1)?;
            push_increments(inc, &p.values[lo_b..], scale);
        }
    }
    Ok((inc_l, inc_b))
}

/// Largest `lines x grid points` environment [`main_comparison_stats`] will sample.
pub const MAX_COMPARISON_CELLS: usize = 50_000_000;

/// Steps of `coarse` on `[a, mid]` followed by steps of `fine` on `[mid, b]`.
fn two_scale_grid(a: f64, mid: f64, b: f64, coarse: f64, fine: f64) -> Result<Grid<f64>> {
    let m1 = ((mid - a) / coarse).round().max(1.0) as usize;
    let m2 = ((b - mid) / fine).round().max(1.0) as usize;
    if m1 + m2 > MAX_COMPARISON_CELLS {
        return Err(Error::Capacity(format!("{} grid points", m1 + m2 + 1)));
    }
    let mut pts: Vec<f64> = (0..m1).map(|j| a + (mid - a) * j as f64 / m1 as f64).collect();
    pts.extend((0..=m2).map(|j| mid + (b - mid) * j as f64 / m2 as f64));
    Grid::new(pts)
}

fn snap(grid: &Grid<f64>, t: f64) -> usize {
    let pts = grid.points();
    let c = pts.partition_point(|&p| p < t);
    let c = if c > 0 && (c == pts.len() || t - pts[c - 1] < pts[c] - t) { c - 1 } else { c };
    c.min(pts.len() - 1)
}

fn push_increments(out: &mut Vec<f64>, values: &[f64], scale: f64) {
    out.extend(values.windows(2).map(|w| (w[1] - w[0]) / scale));
}

fn variance(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() as f64 - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::make_uniform_grid;

    fn env(points: &[f64], lines: Vec<Vec<f64>>) -> Environment<f64> {
        Environment::new(Grid::new(points.to_vec()).unwrap(), lines).unwrap()
    }

    #[test]
    fn toy_profile() {
        let e = env(&[0.0, 0.5, 1.0], vec![vec![0.0, 1.0, 0.0], vec![0.0, -1.0, 2.0]]);
        let p = difference_profile_line(&e, 1, 2).unwrap();
        assert!((p.a.eval(1.0).unwrap() - 2.0).abs() < 1e-12);
        assert!(p.residual.unwrap() < 1e-12);
        assert_eq!(p.monotonicity_defect(), 0.0);
        assert_eq!(Some(p.support.clone()), p.attainment_set());
    }

    #[test]
    fn zero_env_has_flat_profile() {
        let e = Environment::zeros(make_uniform_grid(0.0, 1.0, 11).unwrap(), 3).unwrap();
        let p = difference_profile_line(&e, 1, 3).unwrap();
        assert!(p.a.values().iter().all(|&v| v == 0.0));
        assert!(p.support.is_empty());
        let d = support_dimension(&p, &[0.5, 0.25, 0.125]).unwrap();
        assert!(d.counts.iter().all(|c| c.1 == 0));
        assert_eq!(d.slope, None);
        let wx = wx_line_env(&e, &LineIndexSet::new(vec![1, 2, 3]).unwrap()).unwrap();
        assert!(wx.lines.lines().iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn bad_line_pairs_are_rejected() {
        let e = Environment::zeros(make_uniform_grid(0.0, 1.0, 3).unwrap(), 2).unwrap();
        assert!(difference_profile_line(&e, 2, 2).is_err());
        assert!(difference_profile_line(&e, 2, 1).is_err());
        assert!(difference_profile_spatial(&e, 0.5, 0.5).is_err());
    }

    #[test]
    fn single_line_spatial_profile_is_constant() {
        let e = env(&[0.0, 1.0, 2.0, 3.0], vec![vec![0.0, 2.0, -1.0, 4.0]]);
        let p = difference_profile_spatial(&e, 0.0, 1.0).unwrap();
        assert!(p.a.values().iter().all(|&v| v == -2.0));
        assert!(p.support.is_empty());
    }

    #[test]
    fn single_interval_has_slope_one() {
        let grid = make_uniform_grid(0.0, 1.0, 1025).unwrap();
        let a: Vec<f64> = grid.points().iter().map(|&t: &f64| (t - 0.25).clamp(0.0, 0.5)).collect();
        let support = merge_segments(grid.points(), &increasing_segments(&a));
        assert_eq!(support, vec![(0.25, 0.75)]);
        let p = DifferenceProfile {
            a: PLFunction::new(grid, a).unwrap(),
            support,
            g: None,
            residual: None,
        };
        let scales: Vec<f64> = (4..=8).map(|j| 0.5f64.powi(j)).collect();
        let d = support_dimension(&p, &scales).unwrap();
        assert!((d.slope.unwrap() - 1.0).abs() < 0.05, "{d:?}");
        assert!(support_dimension(&p, &[0.5, 0.25, 1e-4]).is_err());
        assert!(support_dimension(&p, &[0.5, 0.25]).is_err());
    }

    #[test]
    fn wedge_with_linear_bottom_line() {
        let grid = make_uniform_grid(0.0, 1.0, 11).unwrap();
        let f2: Vec<f64> = grid.points().iter().map(|&t| 2.0 * t).collect();
        let e = Environment::new(grid.clone(), vec![vec![0.0; 11], f2]).unwrap();
        let w = two_wedge(&e, 0.0, -1.0).unwrap();
        assert!(w.crossed);
        assert!((w.tau - 0.5).abs() < 1e-12);
        for (c, &y) in grid.points().iter().enumerate() {
            assert!((w.h[c] - (2.0 * y - 1.0).max(0.0)).abs() < 1e-12);
        }
        assert_eq!(w.monotonicity_defect(), 0.0);
        assert_eq!(w.decomposition_defect(), 0.0);
    }

    #[test]
    fn flat_wedges_never_cross() {
        let e = Environment::zeros(make_uniform_grid(0.0, 1.0, 5).unwrap(), 2).unwrap();
        let w = two_wedge(&e, 0.0, -1.0).unwrap();
        assert!(!w.crossed);
        assert_eq!(w.tau, 1.0);
        assert!(w.h.iter().all(|&v| v == 0.0));
        assert!(two_wedge(&e, -1.0, -1.0).is_err());
    }

    #[test]
    fn comparison_report_shape() {
        let setup = ComparisonSetup {
            lines: 3,
            starts: vec![0.0],
            window: (0.5, 1.0),
            step: 0.01,
            approach_step: 0.1,
            replicates: 2,
        };
        let r = main_comparison_stats(&setup, Seed::new(5)).unwrap();
        assert_eq!(r.variance_landscape.len(), 1);
        assert_eq!(r.increments, 100);
        assert!(r.variance_ratio > 0.0 && r.ks <= 1.0);
        assert_eq!(r, main_comparison_stats(&setup, Seed::new(5)).unwrap());
    }
}

// SPDX-License-Identifier: Apache-2.0

//! The deterministic identity suite behind `lpplab verify`.
//!
//! Every check draws `cases` random instances from per-case seeds and reports
//! the worst normalized error, so reports do not depend on thread count.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dlpp::{array_lpp, array_wg, side_to_side_array, LatticeArray};
use crate::env::{brownian_values, Environment, Grid, Seed};
use crate::error::{invalid, Error, Result};
use crate::landscape::{difference_profile_line, two_wedge, wx_line_env, wx_line_env_by_lpp};
use crate::lpp::{lpp_value, metric_composition_check, multipoint_lpp, multipoint_profile, EndpointTuple, LppValue, PointOnLine};
use crate::mc::{replicate, TestReport};
use crate::pitman::{apply_w_tau, apply_word, reduced_word_with, w_tau_i, w_tau_ij, LineIndexSet, Permutation, WordOrder};

/// Names of the checks run by [`verify`], in order.
pub const CHECKS: &[&str] = &[
    "rsk-isometry",
    "localized-isometry",
    "metric-composition",
    "w-lemma",
    "top-lines",
    "word-independence",
    "wx-line-env",
    "gwg-isometry",
    "side-to-side-isometry",
    "difference-identity",
    "two-wedge",
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub seed: Seed,
    pub cases: usize,
    /// Largest accepted normalized error.
    pub tol: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: Seed::new(7),
            cases: 200,
            tol: 1e-9,
        }
    }
}

pub fn verify(cfg: &SuiteConfig) -> Result<Vec<TestReport>> {
    CHECKS.iter().map(|name| run_check(name, cfg)).collect()
}

pub fn run_check(name: &str, cfg: &SuiteConfig) -> Result<TestReport> {
    let check: fn(&mut ChaCha8Rng) -> Result<f64> = match name {
        "rsk-isometry" => rsk_isometry,
        "localized-isometry" => localized_isometry,
        "metric-composition" => metric_composition,
        "w-lemma" => w_lemma,
        "top-lines" => top_lines,
        "word-independence" => word_independence,
        "wx-line-env" => wx_agreement,
        "gwg-isometry" => gwg_isometry,
        "side-to-side-isometry" => side_to_side,
        "difference-identity" => difference_identity,
        "two-wedge" => wedge,
        _ => return Err(invalid(format!("unknown check {name}"))),
    };
    let start = Instant::now();
    let errors = replicate(cfg.cases, cfg.seed, name, |s| check(&mut s.rng()))?;
    let worst = errors.into_iter().fold(0.0, f64::max);
    Ok(TestReport::new(name, worst, cfg.tol, cfg.cases, cfg.seed, start.elapsed().as_secs_f64()))
}

/// `|a - b| / (1 + |a|)`, zero when both are minus infinity.
fn rel_error(a: LppValue<f64>, b: LppValue<f64>) -> f64 {
    match (a, b) {
        (LppValue::Finite(x), LppValue::Finite(y)) => (x - y).abs() / (1.0 + x.abs()),
        (LppValue::NegInfinity, LppValue::NegInfinity) => 0.0,
        _ => f64::INFINITY,
    }
}

/// Brownian lines on a grid from 0 with random steps in `[0.01, 0.1)`.
fn random_env(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Result<Environment<f64>> {
    let mut pts = vec![0.0];
    for _ in 1..m {
        let last = *pts.last().unwrap();
        pts.push(last + rng.random_range(0.01..0.1));
    }
    let grid = Grid::new(pts)?;
    let lines = (0..n).map(|_| brownian_values(grid.points(), 1.0, rng)).collect();
    Environment::new(grid, lines)
}

/// Sorted start and end columns with each start at or before its end.
fn ordered_columns(rng: &mut ChaCha8Rng, lo: usize, hi: usize, k: usize) -> (Vec<usize>, Vec<usize>) {
    loop {
        let mut s: Vec<usize> = (0..k).map(|_| rng.random_range(lo..hi)).collect();
        let mut e: Vec<usize> = (0..k).map(|_| rng.random_range(lo..hi)).collect();
        s.sort();
        e.sort();
        if s.iter().zip(&e).all(|(a, b)| a <= b) {
            return (s, e);
        }
    }
}

fn tuple(env: &Environment<f64>, s: &[(usize, usize)], e: &[(usize, usize)]) -> Result<EndpointTuple<f64>> {
    let pts = env.grid().points();
    EndpointTuple::new(
        s.iter().map(|&(c, l)| PointOnLine::new(pts[c], l)).collect(),
        e.iter().map(|&(c, l)| PointOnLine::new(pts[c], l)).collect(),
    )
}

/// Strictly decreasing tuples of length `k` from `1..=n`.
fn decreasing_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(k: usize, hi: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for r in (1..=hi).rev() {
            cur.push(r);
            rec(k, r - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, n, &mut Vec::new(), &mut out);
    out
}

fn rsk_isometry(rng: &mut ChaCha8Rng) -> Result<f64> {
    let n = rng.random_range(2..=5);
    let m = rng.random_range(3..=40);
    let env = random_env(rng, n, m)?;
    let w = apply_w_tau(&env, &Permutation::reverse(n))?;
    let mut worst = 0.0f64;
    for _ in 0..4 {
        let k = rng.random_range(1..=3);
        let (s, e) = ordered_columns(rng, 0, m, k);
        let s: Vec<_> = s.into_iter().map(|c| (c, n)).collect();
        let e: Vec<_> = e.into_iter().map(|c| (c, 1)).collect();
        let a = multipoint_lpp(&env, &tuple(&env, &s, &e)?)?;
        let b = multipoint_lpp(&w, &tuple(&env, &s, &e)?)?;
        worst = worst.max(rel_error(a, b));
    }
    Ok(worst)
}

fn localized_isometry(rng: &mut ChaCha8Rng) -> Result<f64> {
    let n = rng.random_range(3..=5);
    let m = rng.random_range(3..=30);
    let env = random_env(rng, n, m)?;
    let a = rng.random_range(1..n);
    let b = rng.random_range(a + 1..=n);
    let mut images: Vec<usize> = (1..=n).collect();
    images[a - 1..b].shuffle(rng);
    let w = apply_w_tau(&env, &Permutation::new(images)?)?;
    let mut worst = 0.0f64;
    for _ in 0..4 {
        let k = rng.random_range(1..=2);
        let (s, e) = ordered_columns(rng, 0, m, k);
        let mut sl: Vec<usize> = (0..k).map(|_| rng.random_range(b..=n)).collect();
        let mut el: Vec<usize> = (0..k).map(|_| rng.random_range(1..=a)).collect();
        sl.sort_by(|x, y| y.cmp(x));
        el.sort_by(|x, y| y.cmp(x));
        let s: Vec<_> = s.into_iter().zip(sl).collect();
        let e: Vec<_> = e.into_iter().zip(el).collect();
        let x = multipoint_lpp(&env, &tuple(&env, &s, &e)?)?;
        let y = multipoint_lpp(&w, &tuple(&env, &s, &e)?)?;
        worst = worst.max(rel_error(x, y));
    }
    Ok(worst)
}

fn metric_composition(rng: &mut ChaCha8Rng) -> Result<f64> {
    let n = rng.random_range(2..=4);
    let m = rng.random_range(3..=40);
    let env = random_env(rng, n, m)?;
    let k = rng.random_range(1..=2);
    let j = rng.random_range(1..n);
    let lo = rng.random_range(0..m);
    let hi = (lo + 6).min(m);
    let (s, e) = ordered_columns(rng, lo, hi, k);
    let s: Vec<_> = s.into_iter().map(|c| (c, n)).collect();
    let e: Vec<_> = e.into_iter().map(|c| (c, 1)).collect();
    let r = metric_composition_check(&env, &tuple(&env, &s, &e)?, j)?;
    Ok(rel_error(r.direct, r.composed))
}

fn w_lemma(rng: &mut ChaCha8Rng) -> Result<f64> {
    let n = rng.random_range(2..=4);
    let m = rng.random_range(2..=30);
    let env = random_env(rng, n, m)?;
    let i = rng.random_range(1..=n);
    let j = rng.random_range(1..=i);
    let w = w_tau_ij(&env, i, j)?;
    let mut worst = 0.0f64;
    for &y in env.grid().points() {
        let direct = lpp_value(&env, PointOnLine::new(0.0, i), PointOnLine::new(y, j))?;
        worst = worst.max(rel_error(LppValue::Finite(direct), LppValue::Finite(w.eval(j, y)?)));
    }
    Ok(worst)
}

fn random_set(rng: &mut ChaCha8Rng, n: usize) -> Result<LineIndexSet> {
    let size = rng.random_range(1..=n);
    let mut set: Vec<usize> = (1..=n).collect();
    set.shuffle(rng);
    set.truncate(size);
    set.sort();
    LineIndexSet::new(set)
}

fn top_lines(rng: &mut ChaCha8Rng) -> Result<f64> {
    let n = rng.random_range(2..=4);
    let m = rng.random_range(2..=30);
    let env = random_env(rng, n, m)?;
    let set = random_set(rng, n)?;
    let w = w_tau_i(&env, &set)?;
    let mut worst = 0.0f64;
    for l in 1..=set.len() {
        let starts: Vec<_> = set.prefix(l).iter().rev().map(|&x| PointOnLine::new(0.0, x)).collect();
        let prof = multipoint_profile(&env, &starts, &vec![1; l])?;
        for (c, &y) in env.grid().points().iter().enumerate() {
            let sum: f64 = (1..=l).map(|r| w.eval(r, y)).sum::<Result<f64>>()?;
            worst = worst.max(rel_error(prof.at(c).unwrap(), LppValue::Finite(sum)));
        }
    }
    Ok(worst)
}

fn word_independence(rng: &mut ChaCha8Rng) -> Result<f64> {
    let m = rng.random_range(2..=30);
    let env = random_env(rng, 4, m)?;
    let mut images: Vec<usize> = (1..=4).collect();
    images.shuffle(rng);
    let tau = Permutation::new(images)?;
    let a = apply_word(&env, &reduced_word_with(&tau, WordOrder::FirstDescent))?;
    let b = apply_word(&env, &reduced_word_with(&tau, WordOrder::LastDescent))?;
    let mut worst = 0.0f64;
    for &t in env.grid().points() {
        for i in 1..=4 {
            worst = worst.max((a.eval(i, t)? - b.eval(i, t)?).abs());
        }
    }
    Ok(worst)
}

fn wx_agreement(rng: &mut ChaCha8Rng) -> Result<f64> {
    let n = rng.random_range(2..=4);
    let m = rng.random_range(2..=30);
    let env = random_env(rng, n, m)?;
    let set = random_set(rng, n)?;
    let a = wx_line_env(&env, &set)?;
    let b = wx_line_env_by_lpp(&env, &set)?;
    let mut worst = 0.0f64;
    for &y in env.grid().points() {
        for i in 1..=set.len() {
            let (x, z) = (a.lines.eval(i, y)?, b.lines.eval(i, y)?);
            worst = worst.max((x - z).abs() / (1.0 + x.abs()));
        }
    }
    Ok(worst)
}

fn gwg_isometry(rng: &mut ChaCha8Rng) -> Result<f64> {
    let n = rng.random_range(1..=3);
    let m = rng.random_range(n..=5);
    let g = LatticeArray::from_fn(m, n, |_, _| rng.random_range(0..=9i64))?;
    let wg = array_wg(&g)?;
    let mut worst = 0.0f64;
    for k in 1..=n {
        for i in decreasing_tuples(n, k) {
            for j in decreasing_tuples(n, k) {
                let a = array_lpp(&g, &i, &j)?.map(|v| v as f64);
                let b = array_lpp(&wg, &i, &j)?.map(|v| v as f64);
                worst = worst.max(rel_error(a, b));
            }
        }
    }
    Ok(worst)
}

fn side_to_side(rng: &mut ChaCha8Rng) -> Result<f64> {
    let n = rng.random_range(1..=4);
    let m = rng.random_range(2..=20);
    let env = random_env(rng, n, m)?;
    let t = env.grid().points()[rng.random_range(1..m)];
    let w = side_to_side_array(&env, t)?;
    let mut worst = 0.0f64;
    for k in 1..=n {
        for i in decreasing_tuples(n, k) {
            for j in decreasing_tuples(n, k) {
                if i.iter().zip(&j).any(|(a, b)| a < b) {
                    continue;
                }
                let starts = i.iter().map(|&l| PointOnLine::new(0.0, l)).collect();
                let ends = j.iter().map(|&l| PointOnLine::new(t, l)).collect();
                let f = multipoint_lpp(&env, &EndpointTuple::new(starts, ends)?)?;
                worst = worst.max(rel_error(f, array_lpp(&w, &i, &j)?));
            }
        }
    }
    Ok(worst)
}

fn difference_identity(rng: &mut ChaCha8Rng) -> Result<f64> {
    let n = rng.random_range(2..=6);
    let m = rng.random_range(2..=200);
    let env = random_env(rng, n, m)?;
    let i1 = rng.random_range(1..n);
    let i2 = rng.random_range(i1 + 1..=n);
    let p = difference_profile_line(&env, i1, i2)?;
    if Some(&p.support) != p.attainment_set().as_ref() {
        return Ok(f64::INFINITY);
    }
    let scale = 1.0 + p.a.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let res = p.residual.ok_or_else(|| Error::Validation("line profile without residual".into()))?;
    Ok((res / scale).max(p.monotonicity_defect()))
}

fn wedge(rng: &mut ChaCha8Rng) -> Result<f64> {
    let m = rng.random_range(2..=200);
    let env = random_env(rng, 2, m)?;
    let a2 = rng.random_range(-2.0..0.0);
    let r = two_wedge(&env, 0.0, a2)?;
    Ok(r.monotonicity_defect().max(r.decomposition_defect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_check_passes_on_a_small_run() {
        let cfg = SuiteConfig {
            seed: Seed::new(3),
            cases: 10,
            tol: 1e-9,
        };
        let reports = verify(&cfg).unwrap();
        assert_eq!(reports.len(), CHECKS.len());
        for r in reports {
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn unknown_check_is_rejected() {
        assert!(run_check("nope", &SuiteConfig::default()).is_err());
    }

    #[test]
    fn reports_are_reproducible() {
        let cfg = SuiteConfig {
            seed: Seed::new(11),
            cases: 5,
            tol: 1e-9,
        };
        let a = run_check("rsk-isometry", &cfg).unwrap();
        let b = run_check("rsk-isometry", &cfg).unwrap();
        assert_eq!(a.statistic, b.statistic);
    }
}

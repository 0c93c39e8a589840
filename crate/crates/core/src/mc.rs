// SPDX-License-Identifier: Apache-2.0

//! Samplers and two-sample tests for the distributional identities.

use std::time::Instant;

use nalgebra::{Complex, DMatrix};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dlpp::gt_pattern;
use crate::env::{brownian_values, sample_brownian_env, Grid, PLFunction, Seed};
use crate::error::{invalid, Error, Result};
use crate::pitman::pitman2;

/// Seed used by the calibrated Monte Carlo thresholds.
pub const DEFAULT_SEED: Seed = Seed::new(0);

/// Draws tagged with the seed that produced them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub label: String,
    pub seed: Seed,
    pub values: Vec<f64>,
}

impl SampleSet {
    pub fn new(label: impl Into<String>, seed: Seed, values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("sample contains a non-finite value".into()));
        }
        Ok(SampleSet {
            label: label.into(),
            seed,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Outcome of one named check. `pass` holds exactly when `statistic <= threshold`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
    pub sample_size: usize,
    pub seed: Seed,
    pub runtime_seconds: f64,
}

impl TestReport {
    pub fn new(name: impl Into<String>, statistic: f64, threshold: f64, sample_size: usize, seed: Seed, runtime_seconds: f64) -> Self {
        TestReport {
            name: name.into(),
            statistic,
            threshold,
            pass: statistic <= threshold,
            sample_size,
            seed,
            runtime_seconds,
        }
    }
}

/// Runs `f(r, seed.derive(label, r))` for every replicate, in parallel, keeping order.
pub fn replicate<T: Send>(n: usize, seed: Seed, label: &str, f: impl Fn(Seed) -> Result<T> + Sync) -> Result<Vec<T>> {
    (0..n as u64)
        .into_par_iter()
        .map(|r| f(seed.derive(label, r)))
        .collect()
}

pub fn sample_gaussian(variance: f64, n: usize, seed: Seed) -> Result<SampleSet> {
    if !(variance > 0.0) {
        return Err(invalid("variance must be positive"));
    }
    let mut rng = seed.rng();
    let sd = variance.sqrt();
    let values = (0..n).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect();
    SampleSet::new("gaussian", seed, values)
}

/// Norms of 3-dimensional centred Gaussians with variance `t` per coordinate:
/// the Bessel-3 process at time `t`.
pub fn sample_bessel3(t: f64, n: usize, seed: Seed) -> Result<SampleSet> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(invalid("bessel time must be positive"));
    }
    let mut rng = seed.rng();
    let sd = t.sqrt();
    let values = (0..n)
        .map(|_| {
            let s: f64 = (0..3).map(|_| rng.sample::<f64, _>(StandardNormal).powi(2)).sum();
            sd * s.sqrt()
        })
        .collect();
    SampleSet::new("bessel3", seed, values)
}

/// Largest gap between the empirical distribution functions of `a` and `b`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(invalid("KS test needs two nonempty samples"));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Asymptotic p-value of a two-sample KS distance `d` (Kolmogorov tail with
/// the usual small-sample correction).
pub fn ks_p_value(d: f64, na: usize, nb: usize) -> f64 {
    let ne = (na * nb) as f64 / (na + nb) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    kolmogorov_tail(lambda)
}

/// `P(K > x) = 2 sum_{j >= 1} (-1)^{j-1} exp(-2 j^2 x^2)`.
fn kolmogorov_tail(x: f64) -> f64 {
    if x < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let j = j as f64;
        let term = (-2.0 * j * j * x * x).exp();
        sum += if j as u64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

pub fn ks_two_sample(a: &SampleSet, b: &SampleSet) -> Result<(f64, f64)> {
    let d = ks_statistic(&a.values, &b.values)?;
    Ok((d, ks_p_value(d, a.len(), b.len())))
}

/// Sample correlation coefficient.
pub fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}

fn unit_grid(step: f64, t: f64) -> Result<Grid<f64>> {
    let m = (t / step).round() as usize + 1;
    Grid::uniform(0.0, t, m.max(2))
}

/// `(WB_1 + WB_2)(1)` and `(WB_1 - WB_2)(1)` for independent standard
/// Brownian pairs sampled with the given step.
pub fn pitman_2mx_samples(grid_step: f64, n: usize, seed: Seed) -> Result<(SampleSet, SampleSet)> {
    if !(grid_step > 0.0) || grid_step > 1e-4 {
        return Err(invalid("pitman 2M-X test needs a grid step in (0, 1e-4]"));
    }
    let grid = unit_grid(grid_step, 1.0)?;
    let pairs = replicate(n, seed, "pitman-2mx", |s| {
        let mut rng = s.rng();
        let b1 = brownian_values(grid.points(), 1.0, &mut rng);
        let b2 = brownian_values(grid.points(), 1.0, &mut rng);
        let (w1, w2) = pitman2(&PLFunction::new(grid.clone(), b1)?, &PLFunction::new(grid.clone(), b2)?)?;
        let (x, y) = (*w1.values().last().unwrap(), *w2.values().last().unwrap());
        Ok((x + y, x - y))
    })?;
    let (sum, diff): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    Ok((SampleSet::new("pitman-sum", seed, sum)?, SampleSet::new("pitman-difference", seed, diff)?))
}

/// Combined statistic for `W B = (sqrt 2 B, sqrt 2 R)` at time 1: the larger
/// of the KS distance of the sum from `sqrt 2 N(0, 1)`, the KS distance of the
/// difference from `sqrt 2` Bessel-3 at time 1, and their absolute correlation.
pub fn pitman_2mx_test(grid_step: f64, n: usize, seed: Seed) -> Result<TestReport> {
    let start = Instant::now();
    let (sum, diff) = pitman_2mx_samples(grid_step, n, seed)?;
    let gauss = sample_gaussian(2.0, n, seed.derive("pitman-2mx-gaussian", 0))?;
    let bessel = sample_bessel3(2.0, n, seed.derive("pitman-2mx-bessel", 0))?;
    let stat = ks_two_sample(&sum, &gauss)?
        .0
        .max(ks_two_sample(&diff, &bessel)?.0)
        .max(correlation(&sum.values, &diff.values).abs());
    Ok(TestReport::new("pitman-2mx", stat, 0.03, n, seed, start.elapsed().as_secs_f64()))
}

/// An `n x n` GUE matrix: real diagonal entries of variance 1, complex
/// off-diagonal entries whose real and imaginary parts have variance 1/2.
pub fn sample_gue<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<Complex<f64>> {
    let mut m = DMatrix::zeros(n, n);
    let h = 0.5f64.sqrt();
    for i in 0..n {
        m[(i, i)] = Complex::new(rng.sample(StandardNormal), 0.0);
        for j in i + 1..n {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let z = Complex::new(h * re, h * im);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

pub fn largest_eigenvalue(m: DMatrix<Complex<f64>>) -> f64 {
    m.symmetric_eigenvalues().iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

pub const GUE_MAX_LINES: usize = 4;

/// KS distance between `X_{1,n}(t) / sqrt t` read off Gelfand-Tsetlin
/// patterns of Brownian environments and the largest GUE eigenvalue.
///
/// Any pattern that fails to interlace makes the statistic infinite.
pub fn gue_minors_test(n: usize, t: f64, grid_step: f64, samples: usize, seed: Seed) -> Result<TestReport> {
    if n == 0 {
        return Err(invalid("need at least one line"));
    }
    if n > GUE_MAX_LINES {
        return Err(Error::Capacity(format!("GUE minors test supports n <= {GUE_MAX_LINES}")));
    }
    if !(t > 0.0) || !(grid_step > 0.0) || grid_step > t {
        return Err(invalid("need t > 0 and a grid step in (0, t]"));
    }
    let start = Instant::now();
    let grid = unit_grid(grid_step, t)?;
    let tops = replicate(samples, seed, "gue-minors-env", |s| {
        let env = sample_brownian_env(&grid, n, 1.0, s)?;
        let p = gt_pattern(&env, t)?;
        Ok((p.get(1, n) / t.sqrt(), p.is_interlacing(1e-9)))
    })?;
    let eig = replicate(samples, seed, "gue-minors-matrix", |s| Ok(largest_eigenvalue(sample_gue(n, &mut s.rng()))))?;
    let lpp: Vec<f64> = tops.iter().map(|x| x.0).collect();
    let stat = if tops.iter().all(|x| x.1) { ks_statistic(&lpp, &eig)? } else { f64::INFINITY };
    Ok(TestReport::new(format!("gue-minors-n{n}"), stat, 0.03, samples, seed, start.elapsed().as_secs_f64()))
}

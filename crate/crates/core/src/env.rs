// SPDX-License-Identifier: Apache-2.0

//! Grids, piecewise-linear functions and environments of lines.
//!
//! Every continuous function lives on a [`Grid`] and is linear between grid
//! points. An [`Environment`] is an ordered stack of such functions on one
//! shared grid; line 1 is the top line and paths move from larger line
//! indices to smaller ones as time increases.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Strictly increasing, finite sequence of at least two time points.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    points: Arc<[T]>,
}

impl<T: Scalar> Grid<T> {
    pub fn new(points: Vec<T>) -> Result<Self> {
        if points.len() < 2 {
            return Err(invalid("a grid needs at least 2 points"));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(invalid("grid points must be finite"));
        }
        if let Some(w) = points.windows(2).find(|w| w[0] >= w[1]) {
            return Err(invalid(format!(
                "grid must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(Grid {
            points: points.into(),
        })
    }

    /// `m` equally spaced points from `a` to `b` inclusive.
    pub fn uniform(a: T, b: T, m: usize) -> Result<Self> {
        if !(a < b) {
            return Err(invalid(format!("uniform grid needs a < b, got [{a}, {b}]")));
        }
        if m < 2 {
            return Err(invalid(format!("uniform grid needs m >= 2, got {m}")));
        }
        let span = b - a;
        let last = T::lit((m - 1) as f64);
        let mut points: Vec<T> = (0..m)
            .map(|i| a + span * (T::lit(i as f64) / last))
            .collect();
        points[m - 1] = b;
        Grid::new(points)
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> T {
        self.points[0]
    }

    pub fn last(&self) -> T {
        self.points[self.points.len() - 1]
    }

    pub fn span(&self) -> T {
        self.last() - self.first()
    }

    /// Smallest gap between consecutive points.
    pub fn min_step(&self) -> T {
        self.points
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(T::infinity(), T::min)
    }

    /// Index of the grid point equal to `t`, allowing a few ulps of slack.
    pub fn locate(&self, t: T) -> Option<usize> {
        if !t.is_finite() {
            return None;
        }
        let pts = &self.points;
        let slack = T::grid_slack(self.first().abs().max(self.last().abs()));
        let idx = pts.partition_point(|&p| p < t);
        let mut best: Option<(usize, T)> = None;
        for j in [idx.wrapping_sub(1), idx] {
            if let Some(&p) = pts.get(j) {
                let d = (p - t).abs();
                if d <= slack && best.map_or(true, |(_, bd)| d < bd) {
                    best = Some((j, d));
                }
            }
        }
        best.map(|(j, _)| j)
    }

    /// Like [`Grid::locate`] but reports an invalid-argument error.
    pub fn index_of(&self, t: T) -> Result<usize> {
        self.locate(t)
            .ok_or_else(|| invalid(format!("time {t} is not a grid point")))
    }

    pub fn contains(&self, t: T) -> bool {
        let slack = T::grid_slack(self.first().abs().max(self.last().abs()));
        t >= self.first() - slack && t <= self.last() + slack
    }

    /// Returns `(j, lambda)` with `t = p_j + lambda (p_{j+1} - p_j)`, `lambda in [0, 1)`,
    /// or `(last, 0)` at the right endpoint.
    pub(crate) fn bracket(&self, t: T) -> Result<(usize, T)> {
        if let Some(j) = self.locate(t) {
            return Ok((j, T::zero()));
        }
        if !self.contains(t) {
            return Err(Error::OutOfDomain {
                t: t.to_f64_lossy(),
                lo: self.first().to_f64_lossy(),
                hi: self.last().to_f64_lossy(),
            });
        }
        let pts = &self.points;
        let j = pts.partition_point(|&p| p <= t).saturating_sub(1);
        let j = j.min(pts.len() - 2);
        let lambda = (t - pts[j]) / (pts[j + 1] - pts[j]);
        Ok((j, lambda.max(T::zero()).min(T::one())))
    }

    /// True when both grids hold the same points.
    pub fn same_as(&self, other: &Grid<T>) -> bool {
        Arc::ptr_eq(&self.points, &other.points) || self.points[..] == other.points[..]
    }
}

/// `m` equally spaced grid points on `[a, b]`.
pub fn make_uniform_grid<T: Scalar>(a: T, b: T, m: usize) -> Result<Grid<T>> {
    Grid::uniform(a, b, m)
}

fn interpolate<T: Scalar>(values: &[T], j: usize, lambda: T) -> T {
    if lambda == T::zero() {
        values[j]
    } else {
        values[j] + lambda * (values[j + 1] - values[j])
    }
}

/// A function that is linear between the points of its grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PLFunction<T> {
    grid: Grid<T>,
    values: Vec<T>,
}

impl<T: Scalar> PLFunction<T> {
    pub fn new(grid: Grid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Validation(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(PLFunction { grid, values })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn eval(&self, t: T) -> Result<T> {
        let (j, lambda) = self.grid.bracket(t)?;
        Ok(interpolate(&self.values, j, lambda))
    }

    /// `x -> f(x + a) - f(a)` on the grid points at or right of `a`, shifted to start at 0.
    pub fn recenter(&self, a: T) -> Result<Self> {
        let j0 = self
            .grid
            .locate(a)
            .ok_or_else(|| invalid(format!("recentering time {a} is not a grid point")))?;
        if j0 + 1 >= self.grid.len() {
            return Err(invalid("recentering at the last grid point leaves no interval"));
        }
        let a = self.grid.points()[j0];
        let base = self.values[j0];
        let points = self.grid.points()[j0..].iter().map(|&p| p - a).collect();
        let values = self.values[j0..].iter().map(|&v| v - base).collect();
        PLFunction::new(Grid::new(points)?, values)
    }
}

/// Evaluates `f` at `t` by linear interpolation.
pub fn eval<T: Scalar>(f: &PLFunction<T>, t: T) -> Result<T> {
    f.eval(t)
}

/// Returns `x -> f(x + a) - f(a)`; `a` must be a grid point.
pub fn recenter<T: Scalar>(f: &PLFunction<T>, a: T) -> Result<PLFunction<T>> {
    f.recenter(a)
}

/// Ordered tuple of lines on one shared grid. Line indices are 1-based.
#[derive(Clone, Debug, PartialEq)]
pub struct Environment<T> {
    grid: Grid<T>,
    lines: Vec<Vec<T>>,
}

impl<T: Scalar> Environment<T> {
    pub fn new(grid: Grid<T>, lines: Vec<Vec<T>>) -> Result<Self> {
        if lines.is_empty() {
            return Err(Error::Validation("an environment needs at least one line".into()));
        }
        for (i, line) in lines.iter().enumerate() {
            if line.len() != grid.len() {
                return Err(Error::Validation(format!(
                    "line {} has {} values for a grid of {} points",
                    i + 1,
                    line.len(),
                    grid.len()
                )));
            }
            if line.iter().any(|v| !v.is_finite()) {
                return Err(Error::Validation(format!("line {} has non-finite values", i + 1)));
            }
        }
        Ok(Environment { grid, lines })
    }

    pub fn from_functions(functions: Vec<PLFunction<T>>) -> Result<Self> {
        let grid = functions
            .first()
            .map(|f| f.grid.clone())
            .ok_or_else(|| Error::Validation("an environment needs at least one line".into()))?;
        if functions.iter().any(|f| !f.grid.same_as(&grid)) {
            return Err(invalid("all lines must share one grid"));
        }
        Environment::new(grid, functions.into_iter().map(|f| f.values).collect())
    }

    /// Environment with every line identically zero.
    pub fn zeros(grid: Grid<T>, n: usize) -> Result<Self> {
        let m = grid.len();
        Environment::new(grid, vec![vec![T::zero(); m]; n])
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn n_lines(&self) -> usize {
        self.lines.len()
    }

    /// Values of line `i` (1-based) at the grid points.
    pub fn line(&self, i: usize) -> &[T] {
        &self.lines[i - 1]
    }

    pub fn lines(&self) -> &[Vec<T>] {
        &self.lines
    }

    pub fn into_lines(self) -> Vec<Vec<T>> {
        self.lines
    }

    pub fn line_function(&self, i: usize) -> PLFunction<T> {
        PLFunction {
            grid: self.grid.clone(),
            values: self.lines[i - 1].clone(),
        }
    }

    pub fn eval(&self, i: usize, t: T) -> Result<T> {
        if i == 0 || i > self.n_lines() {
            return Err(invalid(format!("line {i} outside 1..={}", self.n_lines())));
        }
        let (j, lambda) = self.grid.bracket(t)?;
        Ok(interpolate(&self.lines[i - 1], j, lambda))
    }

    /// True when every line vanishes at the left grid endpoint.
    pub fn is_pinned(&self) -> bool {
        self.lines.iter().all(|l| l[0] == T::zero())
    }

    pub(crate) fn require_pinned(&self) -> Result<()> {
        if self.is_pinned() {
            Ok(())
        } else {
            Err(invalid(
                "lines must vanish at the left grid endpoint (recenter first)",
            ))
        }
    }

    /// Recenters every line at the grid point `a` and shifts time so `a` maps to 0.
    pub fn recenter(&self, a: T) -> Result<Self> {
        let fs = (1..=self.n_lines())
            .map(|i| self.line_function(i).recenter(a))
            .collect::<Result<Vec<_>>>()?;
        let grid = fs[0].grid.clone();
        Environment::new(grid, fs.into_iter().map(|f| f.values).collect())
    }

    /// Keeps grid points from index `j0` on and subtracts each line's value there,
    /// without shifting time.
    pub(crate) fn opened_at(&self, j0: usize) -> Result<Self> {
        if j0 + 1 >= self.grid.len() {
            return Err(invalid("opening at the last grid point leaves no interval"));
        }
        let grid = Grid::new(self.grid.points()[j0..].to_vec())?;
        let lines = self
            .lines
            .iter()
            .map(|l| l[j0..].iter().map(|&v| v - l[j0]).collect())
            .collect();
        Environment::new(grid, lines)
    }

    /// Inserts interior points given as `(segment, lambda)` pairs, interpolating every line.
    /// Segments must be sorted and each `lambda` strictly inside `(0, 1)`.
    pub(crate) fn with_inserted(&self, inserts: &[(usize, T)]) -> Self {
        if inserts.is_empty() {
            return self.clone();
        }
        let pts = self.grid.points();
        let total = pts.len() + inserts.len();
        let mut points = Vec::with_capacity(total);
        let mut lines: Vec<Vec<T>> = vec![Vec::with_capacity(total); self.n_lines()];
        let mut next = inserts.iter().peekable();
        for j in 0..pts.len() {
            points.push(pts[j]);
            for (l, line) in lines.iter_mut().enumerate() {
                line.push(self.lines[l][j]);
            }
            while let Some(&&(seg, lambda)) = next.peek() {
                if seg != j {
                    break;
                }
                next.next();
                let t = pts[j] + lambda * (pts[j + 1] - pts[j]);
                if t <= *points.last().unwrap() || t >= pts[j + 1] {
                    continue;
                }
                points.push(t);
                for (l, line) in lines.iter_mut().enumerate() {
                    line.push(interpolate(&self.lines[l], j, lambda));
                }
            }
        }
        Environment {
            grid: Grid {
                points: points.into(),
            },
            lines,
        }
    }

    /// Returns lines `range` (1-based, inclusive) as a new environment.
    pub fn sub_environment(&self, top: usize, bottom: usize) -> Result<Self> {
        if top == 0 || top > bottom || bottom > self.n_lines() {
            return Err(invalid(format!("line range {top}..={bottom} is not valid")));
        }
        Environment::new(self.grid.clone(), self.lines[top - 1..bottom].to_vec())
    }

    /// Evaluates every line on `grid`, which must lie inside this grid's span.
    pub fn resampled(&self, grid: &Grid<T>) -> Result<Self> {
        let brackets = grid
            .points()
            .iter()
            .map(|&t| self.grid.bracket(t))
            .collect::<Result<Vec<_>>>()?;
        let lines = self
            .lines
            .iter()
            .map(|l| brackets.iter().map(|&(j, lambda)| interpolate(l, j, lambda)).collect())
            .collect();
        Environment::new(grid.clone(), lines)
    }

    pub(crate) fn set_line(&mut self, i: usize, values: Vec<T>) {
        debug_assert_eq!(values.len(), self.grid.len());
        self.lines[i - 1] = values;
    }
}

/// Identifies every random draw: `root` picks the experiment family, `stream` the
/// independent ChaCha stream within it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub root: u64,
    pub stream: u64,
}

impl Seed {
    pub const fn new(root: u64) -> Self {
        Seed { root, stream: 0 }
    }

    pub const fn with_stream(root: u64, stream: u64) -> Self {
        Seed { root, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.root);
        rng.set_stream(self.stream);
        rng
    }

    /// Seed for replicate `index` of the experiment called `label`.
    ///
    /// Depends only on `(self, label, index)`, never on scheduling.
    pub fn derive(&self, label: &str, index: u64) -> Seed {
        let mut h = splitmix64(self.stream ^ fnv1a(label.as_bytes()));
        h = splitmix64(h ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        Seed {
            root: self.root,
            stream: h,
        }
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Path of a Brownian motion with the given variance rate, pinned to 0 at the first point.
pub(crate) fn brownian_values<T: Scalar, R: rand::Rng + ?Sized>(
    points: &[T],
    variance: f64,
    rng: &mut R,
) -> Vec<T> {
    let mut out = Vec::with_capacity(points.len());
    let mut acc = 0.0f64;
    out.push(T::zero());
    for w in points.windows(2) {
        let dt = (w[1] - w[0]).to_f64_lossy();
        let z: f64 = StandardNormal.sample(rng);
        acc += (variance * dt).sqrt() * z;
        out.push(T::lit(acc));
    }
    out
}

/// `n` independent Brownian lines with variance rate `variance`, each 0 at the first grid point.
pub fn sample_brownian_env<T: Scalar>(
    grid: &Grid<T>,
    n: usize,
    variance: f64,
    seed: Seed,
) -> Result<Environment<T>> {
    if !(variance > 0.0) || !variance.is_finite() {
        return Err(invalid(format!("variance must be positive, got {variance}")));
    }
    if n == 0 {
        return Err(invalid("an environment needs at least one line"));
    }
    let mut rng = seed.rng();
    let lines = (0..n)
        .map(|_| brownian_values(grid.points(), variance, &mut rng))
        .collect();
    Environment::new(grid.clone(), lines)
}

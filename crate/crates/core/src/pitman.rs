// SPDX-License-Identifier: Apache-2.0

//! Pitman transforms and their compositions along reduced words.
//!
//! The two-line transform sends `(f1, f2)` to
//! `(f1 + M, f2 - M)` where `M(y) = max_{z <= y} (f2 - f1)(z)`. For
//! piecewise-linear input the running maximum has kinks where `f2 - f1`
//! climbs through its previous record inside a grid interval. Those points are
//! added to the grid, so outputs live on a refinement of the input grid and
//! are exact there.

use serde::{Deserialize, Serialize};

use crate::env::{Environment, PLFunction};
use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// A permutation of `1..=n` in one-line notation: `images[x - 1] = tau(x)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    images: Vec<usize>,
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = crate::error::Error;

    fn try_from(images: Vec<usize>) -> Result<Self> {
        Permutation::new(images)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.images
    }
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        if n == 0 {
            return Err(invalid("a permutation needs at least one element"));
        }
        let mut seen = vec![false; n];
        for &x in &images {
            if x == 0 || x > n || seen[x - 1] {
                return Err(invalid(format!("{images:?} is not a permutation of 1..={n}")));
            }
            seen[x - 1] = true;
        }
        Ok(Permutation { images })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (1..=n).collect(),
        }
    }

    /// The reversal `x -> n + 1 - x`.
    pub fn reverse(n: usize) -> Self {
        Permutation {
            images: (1..=n).rev().collect(),
        }
    }

    /// The adjacent transposition swapping `i` and `i + 1`.
    pub fn sigma(n: usize, i: usize) -> Result<Self> {
        let mut p = Permutation::identity(n);
        p.swap_positions(i)?;
        Ok(p)
    }

    /// `sigma_{l_1} ... sigma_{l_k}` as a composition of maps.
    pub fn from_word(n: usize, word: &ReducedWord) -> Result<Self> {
        let mut p = Permutation::identity(n);
        for &i in &word.letters {
            p.swap_positions(i)?;
        }
        Ok(p)
    }

    /// Right multiplication by `sigma_i`.
    fn swap_positions(&mut self, i: usize) -> Result<()> {
        if i == 0 || i >= self.images.len() {
            return Err(invalid(format!(
                "transposition index {i} outside 1..{}",
                self.images.len()
            )));
        }
        self.images.swap(i - 1, i);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, x: usize) -> usize {
        self.images[x - 1]
    }

    /// `(self * other)(x) = self(other(x))`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.n() != other.n() {
            return Err(invalid("permutations act on different sets"));
        }
        Ok(Permutation {
            images: other.images.iter().map(|&x| self.apply(x)).collect(),
        })
    }

    pub fn inversions(&self) -> usize {
        let p = &self.images;
        (0..p.len())
            .map(|a| (a + 1..p.len()).filter(|&b| p[a] > p[b]).count())
            .sum()
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(a, &x)| x == a + 1)
    }

    /// Every permutation of `1..=n` in lexicographic order.
    pub fn all(n: usize) -> Vec<Permutation> {
        let mut cur: Vec<usize> = (1..=n).collect();
        let mut out = vec![Permutation {
            images: cur.clone(),
        }];
        loop {
            let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
                return out;
            };
            let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
            cur.swap(i - 1, j);
            cur[i..].reverse();
            out.push(Permutation {
                images: cur.clone(),
            });
        }
    }
}

/// A word in adjacent transpositions; letter `i` stands for `sigma_i = (i, i+1)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReducedWord {
    pub letters: Vec<usize>,
}

impl ReducedWord {
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Whether the word is a minimal-length expression of the permutation it composes to.
    pub fn is_reduced(&self, n: usize) -> Result<bool> {
        Ok(Permutation::from_word(n, self)?.inversions() == self.len())
    }
}

/// Which descent the inversion-sorting peels off first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WordOrder {
    FirstDescent,
    LastDescent,
}

/// A reduced word for `tau`, found by removing the first descent repeatedly.
pub fn reduced_word(tau: &Permutation) -> ReducedWord {
    reduced_word_with(tau, WordOrder::FirstDescent)
}

/// Peels descents off the right end: `tau = (tau sigma_i) sigma_i` whenever `i` is a descent.
pub fn reduced_word_with(tau: &Permutation, order: WordOrder) -> ReducedWord {
    let mut p = tau.images.clone();
    let mut rev = Vec::new();
    loop {
        let mut descents = (1..p.len()).filter(|&i| p[i - 1] > p[i]);
        let next = match order {
            WordOrder::FirstDescent => descents.next(),
            WordOrder::LastDescent => descents.last(),
        };
        let Some(i) = next else { break };
        p.swap(i - 1, i);
        rev.push(i);
    }
    rev.reverse();
    ReducedWord { letters: rev }
}

/// Every reduced word of `tau`. Grows factorially; meant for `n <= 5`.
pub fn all_reduced_words(tau: &Permutation) -> Vec<ReducedWord> {
    fn rec(p: &mut Vec<usize>, suffix: &mut Vec<usize>, out: &mut Vec<ReducedWord>) {
        let descents: Vec<usize> = (1..p.len()).filter(|&i| p[i - 1] > p[i]).collect();
        if descents.is_empty() {
            let mut letters = suffix.clone();
            letters.reverse();
            out.push(ReducedWord { letters });
            return;
        }
        for i in descents {
            p.swap(i - 1, i);
            suffix.push(i);
            rec(p, suffix, out);
            suffix.pop();
            p.swap(i - 1, i);
        }
    }
    let mut out = Vec::new();
    rec(&mut tau.images.clone(), &mut Vec::new(), &mut out);
    out
}

/// Points where `d` climbs through its running record strictly inside a grid
/// interval, as `(segment, lambda)`.
pub(crate) fn record_crossings<T: Scalar>(d: &[T]) -> Vec<(usize, T)> {
    let mut out = Vec::new();
    let mut r = d[0];
    for j in 0..d.len() - 1 {
        let (a, b) = (d[j], d[j + 1]);
        if a < r && b > r {
            out.push((j, (r - a) / (b - a)));
        }
        if b > r {
            r = b;
        }
    }
    out
}

pub(crate) fn running_max<T: Scalar>(d: &[T]) -> Vec<T> {
    let mut r = d[0];
    d.iter()
        .map(|&x| {
            if x > r {
                r = x;
            }
            r
        })
        .collect()
}

/// Two-line Pitman transform `(Wf1, Wf2)` with `Wf1 = f1 + M`, `Wf2 = f2 - M`.
///
/// Both inputs must share a grid and vanish at its first point. The outputs
/// share a refinement of that grid containing every kink of `M`.
pub fn pitman2<T: Scalar>(f1: &PLFunction<T>, f2: &PLFunction<T>) -> Result<(PLFunction<T>, PLFunction<T>)> {
    if !f1.grid().same_as(f2.grid()) {
        return Err(invalid("pitman2 needs both functions on one grid"));
    }
    let env = Environment::from_functions(vec![f1.clone(), f2.clone()])?;
    let out = apply_sigma(&env, 1)?;
    Ok((out.line_function(1), out.line_function(2)))
}

/// `W_{sigma_i}`: replaces lines `i, i+1` by their Pitman transform.
pub fn apply_sigma<T: Scalar>(env: &Environment<T>, i: usize) -> Result<Environment<T>> {
    env.require_pinned()?;
    sigma_unchecked(env, i)
}

fn sigma_unchecked<T: Scalar>(env: &Environment<T>, i: usize) -> Result<Environment<T>> {
    let n = env.n_lines();
    if i == 0 || i >= n {
        return Err(invalid(format!("sigma_{i} needs 1 <= i < n = {n}")));
    }
    let d: Vec<T> = env
        .line(i + 1)
        .iter()
        .zip(env.line(i))
        .map(|(&b, &a)| b - a)
        .collect();
    let mut out = env.with_inserted(&record_crossings(&d));
    let d: Vec<T> = out
        .line(i + 1)
        .iter()
        .zip(out.line(i))
        .map(|(&b, &a)| b - a)
        .collect();
    let m = running_max(&d);
    let top: Vec<T> = out.line(i).iter().zip(&m).map(|(&a, &r)| a + r).collect();
    let bottom: Vec<T> = out.line(i + 1).iter().zip(&m).map(|(&b, &r)| b - r).collect();
    out.set_line(i, top);
    out.set_line(i + 1, bottom);
    Ok(out)
}

/// Applies `W_{sigma_{l_1}} ... W_{sigma_{l_k}}` to `env`, the last letter first.
pub fn apply_word<T: Scalar>(env: &Environment<T>, word: &ReducedWord) -> Result<Environment<T>> {
    env.require_pinned()?;
    let mut out = env.clone();
    for &i in word.letters.iter().rev() {
        out = sigma_unchecked(&out, i)?;
    }
    Ok(out)
}

/// `W_tau` along [`reduced_word`]`(tau)`.
pub fn apply_w_tau<T: Scalar>(env: &Environment<T>, tau: &Permutation) -> Result<Environment<T>> {
    if tau.n() != env.n_lines() {
        return Err(invalid(format!(
            "permutation of {} elements for {} lines",
            tau.n(),
            env.n_lines()
        )));
    }
    apply_word(env, &reduced_word(tau))
}

/// `tau_{i,j} = sigma_j ... sigma_{i-1}` (identity when `i = j`).
pub fn tau_ij(n: usize, i: usize, j: usize) -> Result<Permutation> {
    if j == 0 || j > i || i > n {
        return Err(invalid(format!("tau_(i,j) needs 1 <= j <= i <= n, got i={i}, j={j}, n={n}")));
    }
    Permutation::from_word(n, &word_ij(i, j))
}

fn word_ij(i: usize, j: usize) -> ReducedWord {
    ReducedWord {
        letters: (j..i).collect(),
    }
}

/// `W_{tau_{i,j}} env`; its line `j` at `y` is the last passage value from `(t_0, i)` to `(y, j)`.
pub fn w_tau_ij<T: Scalar>(env: &Environment<T>, i: usize, j: usize) -> Result<Environment<T>> {
    let tau = tau_ij(env.n_lines(), i, j)?;
    apply_w_tau(env, &tau)
}

/// A strictly increasing nonempty set of line indices `i_1 < ... < i_k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct LineIndexSet {
    indices: Vec<usize>,
}

impl TryFrom<Vec<usize>> for LineIndexSet {
    type Error = crate::error::Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        LineIndexSet::new(v)
    }
}

impl From<LineIndexSet> for Vec<usize> {
    fn from(s: LineIndexSet) -> Self {
        s.indices
    }
}

impl LineIndexSet {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(invalid("line index set must be nonempty"));
        }
        if indices[0] == 0 || indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid(format!(
                "line index set {indices:?} must be strictly increasing and start at 1 or more"
            )));
        }
        Ok(LineIndexSet { indices })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn max(&self) -> usize {
        *self.indices.last().unwrap()
    }

    /// `m(i_j) = j`, or `None` when `i` is not in the set.
    pub fn relabel(&self, i: usize) -> Option<usize> {
        self.indices.iter().position(|&x| x == i).map(|p| p + 1)
    }

    /// The first `l` indices `i_1 .. i_l`.
    pub fn prefix(&self, l: usize) -> &[usize] {
        &self.indices[..l]
    }

    /// `tau_I = tau_{i_k, k} ... tau_{i_1, 1}` as a word.
    pub fn word(&self) -> ReducedWord {
        let mut letters = Vec::new();
        for (pos, &i) in self.indices.iter().enumerate().rev() {
            letters.extend(word_ij(i, pos + 1).letters);
        }
        ReducedWord { letters }
    }

    pub fn tau(&self, n: usize) -> Result<Permutation> {
        if self.max() > n {
            return Err(invalid(format!("line index {} exceeds n = {n}", self.max())));
        }
        Permutation::from_word(n, &self.word())
    }
}

/// `W_{tau_I} env`: brings the lines of `I` to the top, in order.
pub fn w_tau_i<T: Scalar>(env: &Environment<T>, set: &LineIndexSet) -> Result<Environment<T>> {
    apply_w_tau(env, &set.tau(env.n_lines())?)
}

/// `W_{a, tau}`: opens the environment at the grid time `a` and applies `W_tau`.
///
/// The result lives on the grid restricted to `[a, end]`, with times unchanged.
pub fn shifted_w_tau<T: Scalar>(env: &Environment<T>, a: T, tau: &Permutation) -> Result<Environment<T>> {
    let j0 = env
        .grid()
        .locate(a)
        .ok_or_else(|| invalid(format!("shift time {a} is not a grid point")))?;
    apply_w_tau(&env.opened_at(j0)?, tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::Grid;

    fn pl(points: &[f64], values: &[f64]) -> PLFunction<f64> {
        PLFunction::new(Grid::new(points.to_vec()).unwrap(), values.to_vec()).unwrap()
    }

    #[test]
    fn pitman2_examples() {
        let g = [0.0, 0.5, 1.0];
        let z = pl(&g, &[0.0, 0.0, 0.0]);
        let (a, b) = pitman2(&z, &z).unwrap();
        assert_eq!(a.values(), &[0.0; 3]);
        assert_eq!(b.values(), &[0.0; 3]);

        let (a, b) = pitman2(&z, &pl(&g, &[0.0, 0.5, 1.0])).unwrap();
        assert_eq!(a.values(), &[0.0, 0.5, 1.0]);
        assert_eq!(b.values(), &[0.0; 3]);

        let (a, _) = pitman2(&pl(&g, &[0.0, 1.0, 0.0]), &pl(&g, &[0.0, -1.0, 2.0])).unwrap();
        assert_eq!(a.eval(1.0).unwrap(), 2.0);
    }

    #[test]
    fn pitman2_inserts_record_crossings() {
        // d = f2 - f1 goes 0 -> -1 -> 5: record 0 crossed at 1/6 of the last step
        let g = [0.0, 1.0, 2.0];
        let (a, b) = pitman2(&pl(&g, &[0.0, 1.0, 0.0]), &pl(&g, &[0.0, 0.0, 5.0])).unwrap();
        assert_eq!(a.grid().len(), 4);
        let t = a.grid().points()[2];
        assert!((t - (1.0 + 1.0 / 6.0)).abs() < 1e-15);
        assert_eq!(a.eval(2.0).unwrap(), 5.0);
        assert_eq!(b.eval(2.0).unwrap(), 0.0);
    }

    #[test]
    fn pitman2_rejects_bad_input() {
        let f = pl(&[0.0, 1.0], &[1.0, 0.0]);
        let z = pl(&[0.0, 1.0], &[0.0, 0.0]);
        assert!(pitman2(&f, &z).is_err());
        assert!(pitman2(&z, &pl(&[0.0, 2.0], &[0.0, 0.0])).is_err());
    }

    #[test]
    fn reduced_word_examples() {
        assert!(reduced_word(&Permutation::identity(3)).is_empty());
        assert_eq!(reduced_word(&Permutation::reverse(2)).letters, vec![1]);
        let rev3 = Permutation::reverse(3);
        let a = reduced_word_with(&rev3, WordOrder::FirstDescent);
        let b = reduced_word_with(&rev3, WordOrder::LastDescent);
        assert_eq!(a.len(), 3);
        assert_ne!(a, b);
        assert_eq!(Permutation::from_word(3, &a).unwrap(), rev3);
        assert_eq!(Permutation::from_word(3, &b).unwrap(), rev3);
        assert_eq!(all_reduced_words(&rev3).len(), 2);
        assert_eq!(all_reduced_words(&Permutation::reverse(4)).len(), 16);
    }

    #[test]
    fn every_word_composes_back() {
        for p in Permutation::all(4) {
            for order in [WordOrder::FirstDescent, WordOrder::LastDescent] {
                let w = reduced_word_with(&p, order);
                assert_eq!(w.len(), p.inversions());
                assert_eq!(Permutation::from_word(4, &w).unwrap(), p);
            }
        }
        assert_eq!(Permutation::all(4).len(), 24);
    }

    #[test]
    fn permutation_validation_and_json() {
        assert!(Permutation::new(vec![1, 1]).is_err());
        assert!(Permutation::new(vec![0, 1]).is_err());
        let p = Permutation::new(vec![2, 3, 1]).unwrap();
        assert_eq!(serde_json::to_string(&p).unwrap(), "[2,3,1]");
        let q: Permutation = serde_json::from_str("[3,1,2]").unwrap();
        assert!(p.compose(&q).unwrap().is_identity());
        assert!(serde_json::from_str::<Permutation>("[1,1]").is_err());
    }

    #[test]
    fn tau_words() {
        assert!(tau_ij(3, 2, 2).unwrap().is_identity());
        assert!(tau_ij(3, 1, 2).is_err());
        let set = LineIndexSet::new(vec![1, 3]).unwrap();
        assert_eq!(set.word().letters, vec![2]);
        assert_eq!(set.relabel(3), Some(2));
        assert!(LineIndexSet::new(vec![]).is_err());
        assert!(LineIndexSet::new(vec![2, 2]).is_err());
        let set = LineIndexSet::new(vec![2, 4]).unwrap();
        assert!(set.word().is_reduced(4).unwrap());
    }

    #[test]
    fn sigma_on_zero_environment_and_range() {
        let env = Environment::zeros(Grid::uniform(0.0, 1.0, 5).unwrap(), 3).unwrap();
        assert_eq!(apply_sigma(&env, 2).unwrap(), env);
        assert!(apply_sigma(&env, 3).is_err());
        assert!(apply_sigma(&env, 0).is_err());
    }

    #[test]
    fn shifted_transform_opens_the_environment() {
        let g = Grid::new(vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let env = Environment::new(g, vec![vec![0.0, 1.0, 3.0, 2.0], vec![0.0, -1.0, 4.0, 4.0]]).unwrap();
        let tau = Permutation::reverse(2);
        assert_eq!(shifted_w_tau(&env, 0.0, &tau).unwrap(), apply_w_tau(&env, &tau).unwrap());
        let s = shifted_w_tau(&env, 1.0, &tau).unwrap();
        assert_eq!(s.grid().first(), 1.0);
        let r = apply_w_tau(&env.recenter(1.0).unwrap(), &tau).unwrap();
        assert_eq!(s.lines(), r.lines());
        assert!(shifted_w_tau(&env, 0.5, &tau).is_err());
    }
}

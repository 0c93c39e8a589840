// SPDX-License-Identifier: Apache-2.0

//! Discrete last passage percolation on arrays.
//!
//! An array has `m` columns and `n` rows addressed as `(column, row)`, row 1
//! on top. Lattice paths step right or up, so they start on a row at least as
//! large as the one they end on. Several paths must be vertex-disjoint.

use serde::{Deserialize, Serialize};

use crate::env::Environment;
use crate::error::{invalid, Error, Result};
use crate::lpp::engine::{push_lines, Layer};
use crate::lpp::{multipoint_lpp, EndpointTuple, LppValue, PointOnLine};
use crate::scalar::{Scalar, Weight};

/// An `m x n` array of weights stored column by column.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ArrayRepr<W>", into = "ArrayRepr<W>")]
#[serde(bound(serialize = "W: Weight + Serialize", deserialize = "W: Weight + Deserialize<'de>"))]
pub struct LatticeArray<W> {
    columns: usize,
    rows: usize,
    data: Vec<W>,
}

/// Row-major JSON layout.
#[derive(Serialize, Deserialize)]
struct ArrayRepr<W> {
    columns: usize,
    rows: usize,
    entries: Vec<Vec<W>>,
}

impl<W: Weight> TryFrom<ArrayRepr<W>> for LatticeArray<W> {
    type Error = Error;

    fn try_from(r: ArrayRepr<W>) -> Result<Self> {
        if r.entries.len() != r.rows || r.entries.iter().any(|row| row.len() != r.columns) {
            return Err(Error::Validation(format!(
                "entries do not form a {} x {} array",
                r.columns, r.rows
            )));
        }
        LatticeArray::from_rows(&r.entries)
    }
}

impl<W: Weight> From<LatticeArray<W>> for ArrayRepr<W> {
    fn from(a: LatticeArray<W>) -> Self {
        ArrayRepr {
            columns: a.columns,
            rows: a.rows,
            entries: (1..=a.rows)
                .map(|r| (1..=a.columns).map(|c| a.get(c, r)).collect())
                .collect(),
        }
    }
}

impl<W: Weight> LatticeArray<W> {
    /// Builds the array from `f(column, row)`, both 1-based.
    pub fn from_fn(columns: usize, rows: usize, mut f: impl FnMut(usize, usize) -> W) -> Result<Self> {
        if columns == 0 || rows == 0 {
            return Err(invalid("an array needs at least one column and one row"));
        }
        let mut data = Vec::with_capacity(columns * rows);
        for c in 1..=columns {
            for r in 1..=rows {
                data.push(f(c, r));
            }
        }
        Ok(LatticeArray { columns, rows, data })
    }

    /// `rows[r - 1][c - 1]` is the entry at column `c`, row `r`.
    pub fn from_rows(rows: &[Vec<W>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::Validation("rows have different lengths".into()));
        }
        LatticeArray::from_fn(m, n, |c, r| rows[r - 1][c - 1])
    }

    pub fn zeros(columns: usize, rows: usize) -> Result<Self> {
        LatticeArray::from_fn(columns, rows, |_, _| W::zero())
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn get(&self, column: usize, row: usize) -> W {
        self.data[(column - 1) * self.rows + row - 1]
    }

    fn column(&self, c: usize) -> &[W] {
        &self.data[(c - 1) * self.rows..c * self.rows]
    }

    pub fn map<V: Weight>(&self, f: impl Fn(W) -> V) -> LatticeArray<V> {
        LatticeArray {
            columns: self.columns,
            rows: self.rows,
            data: self.data.iter().map(|&w| f(w)).collect(),
        }
    }
}

fn check_rows(rows: &[usize], n: usize, what: &str) -> Result<()> {
    if rows.iter().any(|&r| r == 0 || r > n) {
        return Err(invalid(format!("{what} rows {rows:?} outside 1..={n}")));
    }
    if rows.windows(2).any(|w| w[1] > w[0]) {
        return Err(invalid(format!("{what} rows {rows:?} must be nonincreasing")));
    }
    Ok(())
}

fn mask_of(rows: &[usize]) -> u64 {
    rows.iter().fold(0, |m, &r| m | 1u64 << (r - 1))
}

/// Maximal summed weight over vertex-disjoint lattice paths from `(1, I_a)` to `(m, J_a)`.
///
/// Column transfer over the set of rows the paths leave each column on.
/// Entering column `c` on rows `r` and leaving on rows `r'` needs
/// `r'_a <= r_a` and `r'_a > r_{a+1}` (rows listed in decreasing order).
pub fn array_lpp<W: Weight>(g: &LatticeArray<W>, starts: &[usize], ends: &[usize]) -> Result<LppValue<W>> {
    let k = starts.len();
    if k == 0 || k != ends.len() {
        return Err(invalid("need equal nonzero numbers of start and end rows"));
    }
    let n = g.rows;
    check_rows(starts, n, "start")?;
    check_rows(ends, n, "end")?;
    if starts.windows(2).any(|w| w[0] == w[1]) || ends.windows(2).any(|w| w[0] == w[1]) {
        return Ok(LppValue::NegInfinity);
    }
    let layer = Layer::new(n, k)?;
    let states: Vec<Vec<usize>> = layer
        .masks
        .iter()
        .map(|&mask| {
            let mut v = Vec::with_capacity(k);
            push_lines(mask, &mut v);
            v.reverse();
            v
        })
        .collect();
    let mut vals: Vec<Option<W>> = vec![None; layer.len()];
    vals[layer.rank(mask_of(starts))] = Some(W::zero());
    let mut prefix = vec![W::zero(); n + 1];
    for c in 1..=g.columns {
        let col = g.column(c);
        for r in 0..n {
            prefix[r + 1] = prefix[r] + col[r];
        }
        let mut next: Vec<Option<W>> = vec![None; layer.len()];
        for (j, to) in states.iter().enumerate() {
            let mut best: Option<W> = None;
            for (i, from) in states.iter().enumerate() {
                let Some(v) = vals[i] else { continue };
                let ok = (0..k).all(|a| to[a] <= from[a] && (a + 1 == k || to[a] > from[a + 1]));
                if !ok {
                    continue;
                }
                let gain = (0..k).fold(W::zero(), |acc, a| acc + prefix[from[a]] - prefix[to[a] - 1]);
                let cand = v + gain;
                if best.is_none_or(|b| cand > b) {
                    best = Some(cand);
                }
            }
            next[j] = best;
        }
        vals = next;
    }
    Ok(match vals[layer.rank(mask_of(ends))] {
        Some(v) => LppValue::Finite(v),
        None => LppValue::NegInfinity,
    })
}

/// `G[(1, i)^{*k} -> (m, j)^{*k}]`: `k` paths from rows `i, i-1, .., i-k+1` to rows `j, .., j-k+1`.
pub fn star_lpp<W: Weight>(g: &LatticeArray<W>, i: usize, j: usize, k: usize) -> Result<LppValue<W>> {
    if k == 0 || i > g.rows || j > g.rows || i < k || j < k {
        return Err(invalid(format!(
            "star tuple (i={i}, j={j}, k={k}) leaves rows 1..={}",
            g.rows
        )));
    }
    let starts: Vec<usize> = (0..k).map(|a| i - a).collect();
    let ends: Vec<usize> = (0..k).map(|a| j - a).collect();
    array_lpp(g, &starts, &ends)
}

/// Inverts the partial-sum system `S(k, l) = sum_{i >= k, j >= l} A_{i,j}`
/// where `star(K, l)` supplies `S(k, l)` with `K = n + 1 - max(k, l)`.
fn difference_array<V: Weight>(
    n: usize,
    mut star: impl FnMut(usize, usize) -> Result<LppValue<V>>,
) -> Result<LatticeArray<V>> {
    let mut s = vec![vec![V::zero(); n + 2]; n + 2];
    for k in 1..=n {
        for l in 1..=n {
            let big_k = n + 1 - k.max(l);
            s[k][l] = star(big_k, l)?.finite().ok_or_else(|| {
                Error::Validation(format!("star value for (k={k}, l={l}) is minus infinity"))
            })?;
        }
    }
    LatticeArray::from_fn(n, n, |k, l| s[k][l] - s[k + 1][l] - s[k][l + 1] + s[k + 1][l + 1])
}

/// The `n x n` array `WG` with `G[(1,I) -> (m,J)] = WG[(1,I) -> (n,J)]` for all `I, J`.
///
/// The isometry needs nonnegative weights. The defining system forces
/// `WG_{k,l} = 0` for `k < l`, which cannot reproduce the cost of visiting a
/// negative vertex on the way up.
pub fn array_wg<W: Weight>(g: &LatticeArray<W>) -> Result<LatticeArray<W>> {
    let n = g.rows;
    if g.columns < n {
        return Err(invalid(format!(
            "WG needs at least as many columns as rows, got {} x {n}",
            g.columns
        )));
    }
    difference_array(n, |big_k, l| star_lpp(g, n, l + big_k - 1, big_k))
}

fn star_semi<T: Scalar>(env: &Environment<T>, t: T, start_line: usize, end_line: usize, k: usize) -> Result<LppValue<T>> {
    let t0 = env.grid().first();
    let e = EndpointTuple::new(
        vec![PointOnLine::new(t0, start_line); k],
        vec![PointOnLine::new(t, end_line); k],
    )?;
    multipoint_lpp(env, &e)
}

fn check_time<T: Scalar>(env: &Environment<T>, t: T) -> Result<()> {
    let grid = env.grid();
    match grid.locate(t) {
        Some(c) if c > 0 => Ok(()),
        Some(_) => Err(invalid("time must lie strictly right of the left grid endpoint")),
        None => Err(invalid(format!("time {t} is not a grid point"))),
    }
}

/// `W^t f`: the `n x n` array whose discrete last passage values from the
/// left to the right side equal `f[(t_0, I) -> (t, J)]`.
pub fn side_to_side_array<T: Scalar>(env: &Environment<T>, t: T) -> Result<LatticeArray<T>> {
    check_time(env, t)?;
    let n = env.n_lines();
    difference_array(n, |big_k, l| star_semi(env, t, n, l, big_k))
}

/// Triangular array `X_{i,j}`, `1 <= i <= j <= n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GTPattern<T> {
    /// `levels[j - 1][i - 1] = X_{i,j}`.
    pub levels: Vec<Vec<T>>,
}

impl<T: Scalar> GTPattern<T> {
    pub fn n(&self) -> usize {
        self.levels.len()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.levels[j - 1][i - 1]
    }

    /// Largest violation of `X_{i,j} >= X_{i,j-1} >= X_{i+1,j}`; zero or negative when interlacing.
    pub fn interlacing_defect(&self) -> T {
        let mut worst = T::neg_infinity();
        for j in 2..=self.n() {
            for i in 1..j {
                let mid = self.get(i, j - 1);
                worst = worst.max(mid - self.get(i, j)).max(self.get(i + 1, j) - mid);
            }
        }
        worst
    }

    pub fn is_interlacing(&self, tol: T) -> bool {
        self.interlacing_defect() <= tol
    }
}

/// `sum_{i <= k} X_{i,j} = f[(t_0, n)^k -> (t, n - j + 1)^k]`: level `j` reads the bottom `j` lines.
pub fn gt_pattern<T: Scalar>(env: &Environment<T>, t: T) -> Result<GTPattern<T>> {
    check_time(env, t)?;
    let n = env.n_lines();
    let mut levels = Vec::with_capacity(n);
    for j in 1..=n {
        let mut prev = T::zero();
        let mut level = Vec::with_capacity(j);
        for k in 1..=j {
            let v = star_semi(env, t, n, n - j + 1, k)?
                .finite()
                .ok_or_else(|| Error::Validation("star value is minus infinity".into()))?;
            level.push(v - prev);
            prev = v;
        }
        levels.push(level);
    }
    Ok(GTPattern { levels })
}

/// `m x n` array of line increments over `m` equal steps of `[t_0, t]`.
///
/// Times `t_0 + (t - t_0) i / m` are evaluated by interpolation.
pub fn discretize<T: Scalar>(env: &Environment<T>, t: T, m: usize) -> Result<LatticeArray<T>> {
    if m == 0 {
        return Err(invalid("need at least one column"));
    }
    let t0 = env.grid().first();
    let at = |i: usize| t0 + (t - t0) * T::lit(i as f64) / T::lit(m as f64);
    let mut data = Vec::with_capacity(m * env.n_lines());
    for i in 1..=m {
        for j in 1..=env.n_lines() {
            data.push(env.eval(j, at(i))? - env.eval(j, at(i - 1))?);
        }
    }
    Ok(LatticeArray {
        columns: m,
        rows: env.n_lines(),
        data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::Grid;

    fn abcd() -> LatticeArray<i64> {
        // a = G(1,1), b = G(1,2), c = G(2,1), d = G(2,2)
        LatticeArray::from_rows(&[vec![1, 3], vec![2, 4]]).unwrap()
    }

    #[test]
    fn array_lpp_examples() {
        let g = abcd();
        assert_eq!(array_lpp(&g, &[2], &[1]).unwrap(), LppValue::Finite(9));
        assert_eq!(array_lpp(&g, &[2, 1], &[2, 1]).unwrap(), LppValue::Finite(10));
        let one = LatticeArray::from_rows(&[vec![1, 2, 3]]).unwrap();
        assert!(array_lpp(&one, &[1, 1], &[1, 1]).unwrap().is_neg_infinity());
        assert!(array_lpp(&g, &[1, 2], &[2, 1]).is_err());
        assert!(array_lpp(&g, &[3], &[1]).is_err());
    }

    #[test]
    fn star_examples() {
        let g = LatticeArray::from_fn(3, 3, |c, r| (c * 10 + r) as i64).unwrap();
        assert_eq!(star_lpp(&g, 3, 1, 1).unwrap(), array_lpp(&g, &[3], &[1]).unwrap());
        let total: i64 = (1..=3).flat_map(|c| (1..=3).map(move |r| (c * 10 + r) as i64)).sum();
        assert_eq!(star_lpp(&g, 3, 3, 3).unwrap(), LppValue::Finite(total));
        let col = LatticeArray::from_rows(&[vec![1], vec![2], vec![3]]).unwrap();
        assert!(star_lpp(&col, 3, 2, 2).unwrap().is_neg_infinity());
        assert!(star_lpp(&g, 3, 1, 2).is_err());
    }

    #[test]
    fn wg_examples() {
        let z = LatticeArray::<i64>::zeros(4, 3).unwrap();
        assert_eq!(array_wg(&z).unwrap(), LatticeArray::zeros(3, 3).unwrap());
        let row = LatticeArray::from_rows(&[vec![1, -2, 5]]).unwrap();
        let wg = array_wg(&row).unwrap();
        assert_eq!((wg.columns(), wg.rows(), wg.get(1, 1)), (1, 1, 4));
        assert!(array_wg(&LatticeArray::<i64>::zeros(2, 3).unwrap()).is_err());
    }

    #[test]
    fn array_json_is_row_major() {
        let s = serde_json::to_string(&abcd()).unwrap();
        assert_eq!(s, r#"{"columns":2,"rows":2,"entries":[[1,3],[2,4]]}"#);
        let back: LatticeArray<i64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, abcd());
        assert!(serde_json::from_str::<LatticeArray<i64>>(r#"{"columns":3,"rows":2,"entries":[[1,3],[2,4]]}"#).is_err());
    }

    #[test]
    fn semi_discrete_examples() {
        let g = Grid::new(vec![0.0, 0.5, 1.0]).unwrap();
        let one = Environment::new(g.clone(), vec![vec![0.0, 2.0, -0.5]]).unwrap();
        assert_eq!(side_to_side_array(&one, 1.0).unwrap().get(1, 1), -0.5);
        assert_eq!(gt_pattern(&one, 0.5).unwrap().get(1, 1), 2.0);
        let zero = Environment::zeros(g, 3).unwrap();
        let w = side_to_side_array(&zero, 1.0).unwrap();
        assert!((1..=3).all(|c| (1..=3).all(|r| w.get(c, r) == 0.0)));
        let p = gt_pattern(&zero, 1.0).unwrap();
        assert!(p.levels.iter().flatten().all(|&x| x == 0.0));
        assert!(side_to_side_array(&zero, 0.0).is_err());
        assert!(gt_pattern(&zero, 0.3).is_err());
    }
}

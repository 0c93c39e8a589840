// SPDX-License-Identifier: Apache-2.0

//! Small text formats used on the command line.

use lpplab::landscape::wx_line_env;
use lpplab::pitman::apply_word;
use lpplab::{
    apply_sigma, apply_w_tau, make_uniform_grid, w_tau_ij, Env, Error, Grid, LineIndexSet, Permutation,
    PointOnLine, ReducedWord, Result,
};

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn number<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim().parse().map_err(|_| bad(format!("cannot read {what} from {s:?}")))
}

fn list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',').filter(|x| !x.trim().is_empty()).map(|x| number(x, what)).collect()
}

/// `a:b:m`, `m` equally spaced points on `[a, b]`.
pub fn grid(spec: &str) -> Result<Grid<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, m] = parts[..] else {
        return Err(bad(format!("grid must look like a:b:m, got {spec:?}")));
    };
    make_uniform_grid(number(a, "grid start")?, number(b, "grid end")?, number(m, "grid size")?)
}

/// Comma-separated `time:line` pairs.
pub fn points(spec: &str) -> Result<Vec<PointOnLine<f64>>> {
    spec.split(',')
        .map(|p| match p.split_once(':') {
            Some((t, l)) => Ok(PointOnLine::new(number(t, "time")?, number(l, "line")?)),
            None => Err(bad(format!("point must look like time:line, got {p:?}"))),
        })
        .collect()
}

pub fn indices(spec: &str) -> Result<Vec<usize>> {
    list(spec, "index")
}

/// Applies a named transform:
///
/// - `sigma:i` the Pitman transform of lines `i, i+1`
/// - `word:i,j,...` the transforms of a word, applied left to right
/// - `tau:p1,...,pn` `W_tau` for the permutation with the given images
/// - `reverse` `W_tau` for the order-reversing permutation (the melon)
/// - `tau-ij:i:j` the cycle moving line `i` up to `j`
/// - `wx:i1,...,ik` the lines `W_{tau_I} f` restricted to `I`
pub fn transform(env: &Env, spec: &str) -> Result<Env> {
    let n = env.n_lines();
    let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
    match name {
        "sigma" => apply_sigma(env, number(rest, "line")?),
        "word" => apply_word(env, &ReducedWord { letters: indices(rest)? }),
        "tau" => apply_w_tau(env, &Permutation::new(indices(rest)?)?),
        "reverse" => apply_w_tau(env, &Permutation::reverse(n)),
        "tau-ij" => {
            let (i, j) = rest.split_once(':').ok_or_else(|| bad("tau-ij needs i:j"))?;
            w_tau_ij(env, number(i, "line")?, number(j, "line")?)
        }
        "wx" => Ok(wx_line_env(env, &LineIndexSet::new(indices(rest)?)?)?.lines),
        _ => Err(bad(format!(
            "unknown transform {name:?}; expected sigma, word, tau, reverse, tau-ij or wx"
        ))),
    }
}

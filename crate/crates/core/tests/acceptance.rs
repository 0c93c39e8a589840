// SPDX-License-Identifier: Apache-2.0

//! Exit gate: one line per criterion, nonzero exit if any fails or runs over budget.

mod common;

use std::time::Instant;

use common::*;
use lpplab::landscape::{main_comparison_stats, ComparisonSetup};
use lpplab::lpp::{metric_composition_check, multipoint_profile};
use lpplab::mc::DEFAULT_SEED;
use lpplab::pitman::{all_reduced_words, apply_word};
use lpplab::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Sorted columns `s <= e` pairwise, drawn from `lo..hi`.
fn columns(rng: &mut ChaCha8Rng, lo: usize, hi: usize, k: usize) -> (Vec<usize>, Vec<usize>) {
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

fn tuple(env: &Env, s: &[(usize, usize)], e: &[(usize, usize)]) -> EndpointTuple<f64> {
    EndpointTuple::new(to_points(env, s), to_points(env, e)).unwrap()
}

fn rel(a: LppValue<f64>, b: LppValue<f64>) -> f64 {
    match (a, b) {
        (LppValue::Finite(x), LppValue::Finite(y)) => (x - y).abs() / (1.0 + x.abs()),
        (LppValue::NegInfinity, LppValue::NegInfinity) => 0.0,
        _ => f64::INFINITY,
    }
}

/// The corpus shared by criteria 1 and 2.
fn corpus() -> Vec<Env> {
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    (0..500)
        .map(|_| {
            let n = rng.random_range(2..=5);
            let m = rng.random_range(2..=100);
            random_pinned_env(&mut rng, n, m)
        })
        .collect()
}

fn rsk_isometry() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst, mut count) = (0.0f64, 0);
    for env in corpus() {
        let (n, m) = (env.n_lines(), env.grid().len());
        let w = apply_w_tau(&env, &Permutation::reverse(n)).unwrap();
        for k in 1..=3 {
            for _ in 0..8 {
                let (s, e) = columns(&mut rng, 0, m, k);
                let s: Vec<_> = s.into_iter().map(|c| (c, n)).collect();
                let e: Vec<_> = e.into_iter().map(|c| (c, 1)).collect();
                let a = multipoint_lpp(&env, &tuple(&env, &s, &e)).unwrap();
                let b = multipoint_lpp(&w, &tuple(&env, &s, &e)).unwrap();
                worst = worst.max(rel(a, b));
                count += 1;
            }
        }
    }
    (worst <= 1e-9, format!("{count} tuples, worst relative error {worst:.2e}"))
}

fn localized_and_composition() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst_loc, mut worst_mc, mut count) = (0.0f64, 0.0f64, 0);
    for env in corpus() {
        let (n, m) = (env.n_lines(), env.grid().len());
        let a = rng.random_range(1..n);
        let b = rng.random_range(a + 1..=n);
        let mut images: Vec<usize> = (1..=n).collect();
        images[a - 1..b].shuffle(&mut rng);
        let w = apply_w_tau(&env, &Permutation::new(images).unwrap()).unwrap();
        for k in 1..=3 {
            for _ in 0..4 {
                let (s, e) = columns(&mut rng, 0, m, k);
                let mut sl: Vec<usize> = (0..k).map(|_| rng.random_range(b..=n)).collect();
                let mut el: Vec<usize> = (0..k).map(|_| rng.random_range(1..=a)).collect();
                sl.sort_by(|x, y| y.cmp(x));
                el.sort_by(|x, y| y.cmp(x));
                let s: Vec<_> = s.into_iter().zip(sl).collect();
                let e: Vec<_> = e.into_iter().zip(el).collect();
                let x = multipoint_lpp(&env, &tuple(&env, &s, &e)).unwrap();
                let y = multipoint_lpp(&w, &tuple(&env, &s, &e)).unwrap();
                worst_loc = worst_loc.max(rel(x, y));

                // composition across a random line boundary, endpoints in a short window
                let lo = rng.random_range(0..m);
                let (s, e) = columns(&mut rng, lo, (lo + 5).min(m), k);
                let j = rng.random_range(1..n);
                let s: Vec<_> = s.into_iter().map(|c| (c, n)).collect();
                let e: Vec<_> = e.into_iter().map(|c| (c, 1)).collect();
                let r = metric_composition_check(&env, &tuple(&env, &s, &e), j).unwrap();
                worst_mc = worst_mc.max(rel(r.direct, r.composed));
                count += 1;
            }
        }
    }
    let ok = worst_loc <= 1e-9 && worst_mc <= 1e-9;
    (ok, format!("{count} tuples each, localized {worst_loc:.2e}, composition {worst_mc:.2e}"))
}

fn oracle() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.random_range(1..=3);
        let m = rng.random_range(2..=8);
        let k = rng.random_range(1..=2);
        let env = random_env(&mut rng, n, m);
        let (s, e) = random_endpoints(&mut rng, n, m, k);
        let got = multipoint_lpp(&env, &tuple(&env, &s, &e)).unwrap();
        let want = exhaustive(&env, &s, &e).value;
        let err = match (got, want) {
            (LppValue::Finite(x), LppValue::Finite(y)) => (x - y).abs(),
            (LppValue::NegInfinity, LppValue::NegInfinity) => 0.0,
            _ => f64::INFINITY,
        };
        worst = worst.max(err);
    }
    (worst <= 1e-12, format!("1000 instances, worst absolute error {worst:.2e}"))
}

fn word_independence() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    let mut pairs = 0;
    for _ in 0..50 {
        let m = rng.random_range(2..=40);
        let env = random_pinned_env(&mut rng, 4, m);
        for tau in Permutation::all(4) {
            let words = all_reduced_words(&tau);
            let (first, last) = (&words[0], &words[words.len() - 1]);
            if first != last {
                pairs += 1;
            }
            let a = apply_word(&env, first).unwrap();
            let b = apply_word(&env, last).unwrap();
            for &t in env.grid().points() {
                for i in 1..=4 {
                    worst = worst.max((a.eval(i, t).unwrap() - b.eval(i, t).unwrap()).abs());
                }
            }
        }
    }
    (worst <= 1e-12, format!("{pairs} distinct word pairs, worst {worst:.2e}"))
}

fn w_lemma_and_top_lines() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut worst_w, mut worst_t) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let n = rng.random_range(2..=4);
        let m = rng.random_range(2..=40);
        let env = random_pinned_env(&mut rng, n, m);
        let i = rng.random_range(1..=n);
        let j = rng.random_range(1..=i);
        let w = w_tau_ij(&env, i, j).unwrap();
        for &y in env.grid().points() {
            let direct = lpp_value(&env, PointOnLine::new(0.0, i), PointOnLine::new(y, j)).unwrap();
            worst_w = worst_w.max((w.eval(j, y).unwrap() - direct).abs() / (1.0 + direct.abs()));
        }
        let mut set: Vec<usize> = (1..=n).collect();
        set.shuffle(&mut rng);
        set.truncate(rng.random_range(1..=n));
        set.sort();
        let set = LineIndexSet::new(set).unwrap();
        let w = w_tau_i(&env, &set).unwrap();
        for l in 1..=set.len() {
            let starts: Vec<_> = set.prefix(l).iter().rev().map(|&x| PointOnLine::new(0.0, x)).collect();
            let prof = multipoint_profile(&env, &starts, &vec![1; l]).unwrap();
            for (c, &y) in env.grid().points().iter().enumerate() {
                let sum: f64 = (1..=l).map(|r| w.eval(r, y).unwrap()).sum();
                worst_t = worst_t.max(rel(prof.at(c).unwrap(), LppValue::Finite(sum)));
            }
        }
    }
    let ok = worst_w <= 1e-9 && worst_t <= 1e-9;
    (ok, format!("200 instances, W-lemma {worst_w:.2e}, top lines {worst_t:.2e}"))
}

fn decreasing_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize == k {
            out.push((1..=n).rev().filter(|r| mask & (1 << (r - 1)) != 0).collect());
        }
    }
    out
}

fn discrete_isometries() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_g = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(1..=3);
        let m = rng.random_range(n..=5);
        let g = LatticeArray::from_fn(m, n, |_, _| rng.random_range(0..=9i64)).unwrap();
        let wg = array_wg(&g).unwrap();
        for k in 1..=n {
            for i in decreasing_tuples(n, k) {
                for j in decreasing_tuples(n, k) {
                    let a = array_lpp(&g, &i, &j).unwrap().map(|v| v as f64);
                    let b = array_lpp(&wg, &i, &j).unwrap().map(|v| v as f64);
                    worst_g = worst_g.max(rel(a, b));
                }
            }
        }
    }
    let mut worst_f = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(1..=4);
        let m = rng.random_range(2..=30);
        let env = random_pinned_env(&mut rng, n, m);
        let t = env.grid().points()[rng.random_range(1..m)];
        let w = side_to_side_array(&env, t).unwrap();
        for k in 1..=n {
            for i in decreasing_tuples(n, k) {
                for j in decreasing_tuples(n, k) {
                    if i.iter().zip(&j).any(|(a, b)| a < b) {
                        continue;
                    }
                    let starts = i.iter().map(|&l| PointOnLine::new(0.0, l)).collect();
                    let ends = j.iter().map(|&l| PointOnLine::new(t, l)).collect();
                    let f = multipoint_lpp(&env, &EndpointTuple::new(starts, ends).unwrap()).unwrap();
                    worst_f = worst_f.max(rel(f, array_lpp(&w, &i, &j).unwrap()));
                }
            }
        }
    }
    let ok = worst_g <= 1e-9 && worst_f <= 1e-9;
    (ok, format!("GWG {worst_g:.2e} over 200 arrays, side-to-side {worst_f:.2e} over 100 environments"))
}

fn difference_identity() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut worst, mut mismatches, mut profiles) = (0.0f64, 0, 0);
    for r in 0..200u64 {
        let n = rng.random_range(2..=6);
        let m = rng.random_range(2..=400);
        let grid = make_uniform_grid(0.0, 1.0, m).unwrap();
        let env = sample_brownian_env(&grid, n, 1.0, DEFAULT_SEED.derive("acceptance-difference", r)).unwrap();
        for i1 in 1..n {
            for i2 in i1 + 1..=n {
                let p = difference_profile_line(&env, i1, i2).unwrap();
                worst = worst.max(p.residual.unwrap()).max(p.monotonicity_defect());
                if Some(&p.support) != p.attainment_set().as_ref() {
                    mismatches += 1;
                }
                profiles += 1;
            }
        }
    }
    let ok = worst <= 1e-9 && mismatches == 0;
    (ok, format!("{profiles} profiles, worst residual {worst:.2e}, support mismatches {mismatches}"))
}

fn two_wedge_decomposition() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut mono, mut decomp, mut crossed) = (0.0f64, 0.0f64, 0);
    for r in 0..1000u64 {
        let m = rng.random_range(2..=500);
        let grid = make_uniform_grid(0.0, rng.random_range(0.5..20.0), m).unwrap();
        let env = sample_brownian_env(&grid, 2, 1.0, DEFAULT_SEED.derive("acceptance-wedge", r)).unwrap();
        let w = two_wedge(&env, 0.0, -rng.random_range(0.01..2.0)).unwrap();
        mono = mono.max(w.monotonicity_defect());
        decomp = decomp.max(w.decomposition_defect());
        crossed += w.crossed as usize;
    }
    let ok = mono <= 1e-12 && decomp <= 1e-12;
    (ok, format!("1000 instances ({crossed} crossed), monotonicity {mono:.2e}, decomposition {decomp:.2e}"))
}

fn pitman_2mx() -> (bool, String) {
    let r = pitman_2mx_test(1e-4, 20_000, DEFAULT_SEED).unwrap();
    (r.statistic < 0.03, format!("N = 20000, step 1e-4, statistic {:.4} (< 0.03)", r.statistic))
}

fn gue_minors() -> (bool, String) {
    let r = gue_minors_test(3, 1.0, 1e-4, 10_000, DEFAULT_SEED).unwrap();
    (r.statistic < 0.03, format!("n = 3, N = 10000, step 1e-4, KS {:.4} (< 0.03, infinite if any pattern fails to interlace)", r.statistic))
}

fn dimension_half() -> (bool, String) {
    let grid = make_uniform_grid(0.0, 1.0, 1 << 20).unwrap();
    let scales: Vec<f64> = (4..=9).map(|j| 0.5f64.powi(j)).collect();
    let mut slopes = Vec::new();
    for s in 0..20 {
        let env = sample_brownian_env(&grid, 2, 1.0, DEFAULT_SEED.derive("acceptance-dimension", s)).unwrap();
        let p = difference_profile_line(&env, 1, 2).unwrap();
        // no slope when the sampled gap never climbs above its start
        slopes.extend(support_dimension(&p, &scales).unwrap().slope);
    }
    let mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
    let ok = slopes.len() >= 18 && (0.4..=0.6).contains(&mean);
    (ok, format!("mean slope {mean:.4} over {} of 20 seeds with nonempty support (in [0.40, 0.60])", slopes.len()))
}

fn main_comparison() -> (bool, String) {
    let setup = ComparisonSetup {
        lines: 200,
        starts: vec![0.0, 0.05],
        window: (0.75, 0.75025),
        step: 1e-6,
        approach_step: 1e-3,
        replicates: 10,
    };
    let r = main_comparison_stats(&setup, DEFAULT_SEED).unwrap();
    let ok = (0.85..=1.15).contains(&r.variance_ratio);
    (
        ok,
        format!(
            "n = 200, k = 2, {} increments, variance ratio {:.4} (in [0.85, 1.15]), KS {:.4}; consistency check only",
            r.increments, r.variance_ratio, r.ks
        ),
    )
}

fn main() {
    let criteria: [(&str, f64, fn() -> (bool, String)); 12] = [
        ("RSK isometry", 60.0, rsk_isometry),
        ("localized isometry and metric composition", 60.0, localized_and_composition),
        ("oracle equivalence", 30.0, oracle),
        ("word independence", 30.0, word_independence),
        ("W-lemma and top lines", 60.0, w_lemma_and_top_lines),
        ("discrete isometries", 60.0, discrete_isometries),
        ("line-start difference identity", 60.0, difference_identity),
        ("two-wedge decomposition", 60.0, two_wedge_decomposition),
        ("Pitman 2M-X", 120.0, pitman_2mx),
        ("GUE minors", 120.0, gue_minors),
        ("dimension one half", 120.0, dimension_half),
        ("main comparison", 180.0, main_comparison),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = run();
        let secs = start.elapsed().as_secs_f64();
        let pass = ok && secs < *budget;
        if !pass {
            failed += 1;
        }
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {:>2}. {name}: {detail} [{secs:.1}s, budget {budget:.0}s]", i + 1);
    }
    println!("acceptance: {} of 12 passed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

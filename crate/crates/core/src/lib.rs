// SPDX-License-Identifier: Apache-2.0

//! Last passage percolation laboratory.
//!
//! Semi-discrete and discrete last passage values, disjoint optimizers,
//! iterated Pitman transforms and the RSK isometries relating them, with
//! Monte Carlo checks of the distributional identities around them.

pub mod dlpp;
pub mod env;
pub mod error;
pub mod io;
pub mod landscape;
pub mod lpp;
pub mod mc;
pub mod pitman;
pub mod scalar;
pub mod suite;

pub use dlpp::{array_lpp, array_wg, gt_pattern, side_to_side_array, star_lpp, GTPattern, LatticeArray};
pub use env::{make_uniform_grid, sample_brownian_env, Environment, Grid, PLFunction, Seed};
pub use error::{Error, Result};
pub use landscape::{
    difference_profile_line, difference_profile_spatial, main_comparison_stats, support_dimension, two_wedge,
    wx_line_env, DifferenceProfile, TwoWedgeResult, WxEnvironment,
};
pub use lpp::{
    lpp_value, multipoint_lpp, path_length, rightmost_optimizer, DisjointTuple, EndpointTuple,
    JumpPath, LppValue, PointOnLine,
};
pub use mc::{gue_minors_test, ks_two_sample, pitman_2mx_test, sample_bessel3, SampleSet, TestReport};
pub use pitman::{
    apply_sigma, apply_w_tau, pitman2, reduced_word, shifted_w_tau, w_tau_i, w_tau_ij, LineIndexSet,
    Permutation, ReducedWord,
};
pub use scalar::{Scalar, Weight};

/// Double-precision environment.
pub type Env = Environment<f64>;

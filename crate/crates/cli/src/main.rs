// SPDX-License-Identifier: Apache-2.0

//! `lpplab`: sample environments, compute last passage values and
//! transforms, and run the identity suite and the Monte Carlo checks.
//!
//! Every artifact records the config that produced it. `lpplab rerun FILE`
//! reads that config back from a JSON or CSV artifact and runs it again.

mod parse;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use lpplab::dlpp::discretize;
use lpplab::io::{append_ledger, environment_to_json, load_environment, write_profile_csv, write_support_csv, write_two_wedge_csv};
use lpplab::landscape::ComparisonSetup;
use lpplab::mc::replicate;
use lpplab::suite::{run_check, SuiteConfig, CHECKS};
use lpplab::*;

#[derive(Parser)]
#[command(name = "lpplab", version, about = "Last passage percolation laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Sample an environment of independent Brownian lines and write it as JSON.
    Sample {
        #[command(flatten)]
        #[serde(flatten)]
        env: EnvArgs,
        #[command(flatten)]
        #[serde(flatten)]
        out: OutArgs,
    },
    /// Last passage value of a tuple of disjoint paths, optionally with the rightmost optimizer.
    Lpp {
        #[command(flatten)]
        #[serde(flatten)]
        env: EnvArgs,
        /// Start points `time:line,...`.
        #[arg(long)]
        start: String,
        /// End points `time:line,...`.
        #[arg(long)]
        end: String,
        #[arg(long)]
        optimizer: bool,
        #[command(flatten)]
        #[serde(flatten)]
        out: OutArgs,
    },
    /// Apply a named transform and write the resulting environment.
    ///
    /// Transforms: sigma:i, word:i,j,..., tau:p1,...,pn, reverse, tau-ij:i:j, wx:i1,...,ik.
    Pitman {
        #[command(flatten)]
        #[serde(flatten)]
        env: EnvArgs,
        #[arg(long)]
        transform: String,
        #[command(flatten)]
        #[serde(flatten)]
        out: OutArgs,
    },
    /// Discrete arrays built from an environment, and last passage values on them.
    Dlpp {
        #[command(flatten)]
        #[serde(flatten)]
        env: EnvArgs,
        #[arg(long, value_enum)]
        op: DlppOp,
        /// Right end of the time interval; defaults to the last grid point.
        #[arg(long)]
        time: Option<f64>,
        /// Use an array of line increments over this many equal steps instead of the side-to-side array.
        #[arg(long)]
        columns: Option<usize>,
        /// Read the array from a JSON file instead.
        #[arg(long)]
        array: Option<PathBuf>,
        /// Start rows `r1,...` for `--op lpp`, nonincreasing.
        #[arg(long)]
        starts: Option<String>,
        /// End rows for `--op lpp`.
        #[arg(long)]
        ends: Option<String>,
        #[command(flatten)]
        #[serde(flatten)]
        out: OutArgs,
    },
    /// Difference profile from two start lines (`--pair i1:i2`) or two start times on the bottom line (`--at x1:x2`).
    Profile {
        #[command(flatten)]
        #[serde(flatten)]
        env: EnvArgs,
        #[arg(long, conflicts_with = "at")]
        pair: Option<String>,
        #[arg(long, allow_negative_numbers = true)]
        at: Option<String>,
        /// Profile CSV.
        #[arg(long)]
        out: PathBuf,
        /// Support intervals CSV; defaults to the profile path with a `.support.csv` suffix.
        #[arg(long)]
        support: Option<PathBuf>,
    },
    /// Wedge maxima and the cusp decomposition of a two-line environment.
    TwoWedge {
        #[command(flatten)]
        #[serde(flatten)]
        env: EnvArgs,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        a1: f64,
        #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
        a2: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the deterministic identity suite.
    Verify {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        cases: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Only these checks (comma-separated); all by default.
        #[arg(long)]
        checks: Option<String>,
        /// Ledger CSV to append to; reports go to stdout as JSON otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distributional checks.
    Montecarlo {
        #[arg(long, value_enum)]
        test: McTest,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sample size: Brownian pairs, GUE samples, comparison replicates or dimension seeds.
        #[arg(long)]
        replicates: Option<usize>,
        /// Grid step of the sampled paths.
        #[arg(long)]
        step: Option<f64>,
        /// Line count for the GUE and comparison tests.
        #[arg(long)]
        lines: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the config recorded in an artifact again.
    #[serde(skip)]
    Rerun {
        file: PathBuf,
        /// Write to this path instead of the recorded one.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
struct EnvArgs {
    /// Read the environment from a JSON file instead of sampling one.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Sampling grid `a:b:m`.
    #[arg(long, default_value = "0:1:1001", allow_hyphen_values = true)]
    grid: String,
    #[arg(long, default_value_t = 2)]
    lines: usize,
    #[arg(long, default_value_t = 1.0)]
    variance: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
struct OutArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum DlppOp {
    /// The array itself.
    Array,
    /// Its Greene-RSK image.
    Wg,
    /// Disjoint-path value from `--starts` to `--ends`.
    Lpp,
    /// The Gelfand-Tsetlin pattern of the environment at `--time`.
    Gt,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum McTest {
    /// Sum and difference of the two-line Pitman transform at time 1.
    Pitman,
    /// Top entry of the Gelfand-Tsetlin pattern against the largest GUE eigenvalue.
    Gue,
    /// Increment law of the difference-profile prelimit against Brownian motion.
    Comparison,
    /// Box-counting dimension of the support of a two-line difference profile.
    Dimension,
}

enum Failure {
    Core(Error),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Core(Error::Io(e))
    }
}

type Outcome<T = ()> = std::result::Result<T, Failure>;

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 4,
            Failure::Core(Error::Capacity(_)) => 3,
            Failure::Core(Error::Io(_)) => 1,
            Failure::Core(_) => 2,
        }
    }

    fn report(&self) -> Value {
        let mut v = match self {
            Failure::Verification(msg) => json!({"error": "verification-failure", "message": msg}),
            Failure::Core(e) => json!({"error": e.kind(), "message": e.to_string()}),
        };
        if let Failure::Core(Error::Parse { line, column, .. }) = self {
            v["line"] = json!(line);
            v["column"] = json!(column);
        }
        v["exit_code"] = json!(self.code());
        v
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Core(Error::InvalidArgument(msg.into()))
}

/// Caps the global rayon pool at `LPPLAB_THREADS` when set.
fn configure_threads() -> Outcome {
    let Ok(raw) = std::env::var("LPPLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| invalid(format!("LPPLAB_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| invalid(e.to_string()))
}

fn config_of(cmd: &Command) -> Value {
    let mut v = serde_json::to_value(cmd).expect("commands serialize");
    v["version"] = json!(env!("CARGO_PKG_VERSION"));
    v
}

impl EnvArgs {
    fn environment(&self) -> Outcome<Env> {
        match &self.input {
            Some(path) => Ok(load_environment(path)?),
            None => {
                let grid = parse::grid(&self.grid)?;
                Ok(sample_brownian_env(&grid, self.lines, self.variance, Seed::new(self.seed))?)
            }
        }
    }
}

/// Writes `text` to `out`, or prints it.
fn emit(out: &Option<PathBuf>, text: &str) -> Outcome {
    match out {
        Some(path) => std::fs::write(path, format!("{text}\n"))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn emit_json(out: &Option<PathBuf>, v: &Value) -> Outcome {
    emit(out, &serde_json::to_string(v).expect("values serialize"))
}

fn run(cmd: &Command) -> Outcome {
    if let Command::Rerun { file, out } = cmd {
        let mut cmd = recorded_config(file)?;
        if let Some(path) = out {
            redirect(&mut cmd, path.clone());
        }
        return run(&cmd);
    }
    let config = config_of(cmd);
    match cmd {
        Command::Sample { env, out } => {
            let env = env.environment()?;
            emit(&out.out, &environment_to_json(&env, Some(&config)))
        }
        Command::Lpp { env, start, end, optimizer, out } => {
            let env = env.environment()?;
            let tuple = EndpointTuple::new(parse::points(start)?, parse::points(end)?)?;
            let value = multipoint_lpp(&env, &tuple)?;
            let mut result = json!({"config": config, "value": value});
            if *optimizer {
                let opt = rightmost_optimizer(&env, &tuple)?;
                result["optimizer"] = serde_json::to_value(&opt).expect("paths serialize");
            }
            emit_json(&out.out, &result)
        }
        Command::Pitman { env, transform, out } => {
            let env = env.environment()?;
            emit(&out.out, &environment_to_json(&parse::transform(&env, transform)?, Some(&config)))
        }
        Command::Dlpp { env, op, time, columns, array, starts, ends, out } => {
            let env = env.environment()?;
            let t = time.unwrap_or(env.grid().last());
            let result = match op {
                DlppOp::Gt => {
                    let p = gt_pattern(&env, t)?;
                    json!({"pattern": p, "interlacing_defect": p.interlacing_defect()})
                }
                _ => {
                    let a: LatticeArray<f64> = match (array, columns) {
                        (Some(path), _) => {
                            let text = std::fs::read_to_string(path)?;
                            serde_json::from_str(&text).map_err(|e| Error::Parse {
                                line: e.line(),
                                column: e.column(),
                                message: e.to_string(),
                            })?
                        }
                        (None, Some(m)) => discretize(&env, t, *m)?,
                        (None, None) => side_to_side_array(&env, t)?,
                    };
                    match op {
                        DlppOp::Array => json!({"array": a}),
                        DlppOp::Wg => json!({"array": array_wg(&a)?}),
                        _ => {
                            let (Some(s), Some(e)) = (starts, ends) else {
                                return Err(invalid("--op lpp needs --starts and --ends"));
                            };
                            let value = array_lpp(&a, &parse::indices(s)?, &parse::indices(e)?)?;
                            json!({"value": value})
                        }
                    }
                }
            };
            let mut result = result;
            result["config"] = config;
            emit_json(&out.out, &result)
        }
        Command::Profile { env, pair, at, out, support } => {
            let env = env.environment()?;
            let profile = match (pair, at) {
                (Some(p), None) => match parse::indices(&p.replace(':', ","))?[..] {
                    [i1, i2] => difference_profile_line(&env, i1, i2)?,
                    _ => return Err(invalid("--pair must look like i1:i2")),
                },
                (None, Some(x)) => {
                    let (x1, x2) = x.split_once(':').ok_or_else(|| invalid("--at must look like x1:x2"))?;
                    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| invalid(format!("bad time {s:?}")));
                    difference_profile_spatial(&env, num(x1)?, num(x2)?)?
                }
                _ => return Err(invalid("give exactly one of --pair or --at")),
            };
            let support_path = support.clone().unwrap_or_else(|| suffixed(out, "support.csv"));
            write_profile_csv(&profile, out, &config)?;
            write_support_csv(&profile, &support_path, &config)?;
            let summary = json!({
                "profile": out,
                "support": support_path,
                "intervals": profile.support.len(),
                "final_value": profile.a.values().last(),
                "residual": profile.residual,
            });
            println!("{summary}");
            Ok(())
        }
        Command::TwoWedge { env, a1, a2, out } => {
            let r = two_wedge(&env.environment()?, *a1, *a2)?;
            write_two_wedge_csv(&r, out, &config)?;
            println!("{}", json!({"tau": r.tau, "crossed": r.crossed, "out": out}));
            Ok(())
        }
        Command::Verify { seed, cases, tol, checks, out } => {
            let cfg = SuiteConfig { seed: Seed::new(*seed), cases: *cases, tol: *tol };
            let names: Vec<String> = match checks {
                Some(list) => list.split(',').map(|s| s.trim().to_string()).collect(),
                None => CHECKS.iter().map(|s| s.to_string()).collect(),
            };
            let reports = names
                .par_iter()
                .map(|name| run_check(name, &cfg))
                .collect::<Result<Vec<_>>>()?;
            finish(reports, out, &config)
        }
        Command::Montecarlo { test, seed, replicates, step, lines, out } => {
            let report = montecarlo(*test, Seed::new(*seed), *replicates, *step, *lines)?;
            finish(vec![report], out, &config)
        }
        Command::Rerun { .. } => unreachable!("handled above"),
    }
}

fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.with_extension("");
    PathBuf::from(format!("{}.{suffix}", stem.display()))
}

/// Writes the ledger or prints the reports, then fails if any check failed.
fn finish(reports: Vec<TestReport>, out: &Option<PathBuf>, config: &Value) -> Outcome {
    match out {
        Some(path) => append_ledger(&reports, path, config)?,
        None => println!("{}", json!({"config": config, "reports": reports})),
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(format!("failed checks: {}", failed.join(", "))))
    }
}

fn montecarlo(test: McTest, seed: Seed, replicates: Option<usize>, step: Option<f64>, lines: Option<usize>) -> Outcome<TestReport> {
    let start = std::time::Instant::now();
    Ok(match test {
        McTest::Pitman => pitman_2mx_test(step.unwrap_or(1e-4), replicates.unwrap_or(20_000), seed)?,
        McTest::Gue => gue_minors_test(lines.unwrap_or(3), 1.0, step.unwrap_or(1e-4), replicates.unwrap_or(10_000), seed)?,
        McTest::Comparison => {
            let setup = ComparisonSetup {
                lines: lines.unwrap_or(200),
                starts: vec![0.0, 0.05],
                window: (0.75, 0.75025),
                step: step.unwrap_or(1e-6),
                approach_step: 1e-3,
                replicates: replicates.unwrap_or(10),
            };
            // a consistency check on increment variances, not a test of absolute continuity
            let r = main_comparison_stats(&setup, seed)?;
            eprintln!("{}", json!({"variance_ratio": r.variance_ratio, "ks": r.ks, "ks_p": r.ks_p}));
            TestReport::new("main-comparison", (r.variance_ratio - 1.0).abs(), 0.15, r.increments, seed, start.elapsed().as_secs_f64())
        }
        McTest::Dimension => {
            let n = replicates.unwrap_or(20);
            let m = step.map_or(1 << 20, |h| (1.0 / h).round() as usize + 1);
            let grid = make_uniform_grid(0.0, 1.0, m)?;
            let scales: Vec<f64> = (4..=9).map(|j| 0.5f64.powi(j)).collect();
            let slopes = replicate(n, seed, "dimension", |s| {
                let env = sample_brownian_env(&grid, 2, 1.0, s)?;
                Ok(support_dimension(&difference_profile_line(&env, 1, 2)?, &scales)?.slope)
            })?;
            // seeds whose gap never rises above its start have no support to measure
            let slopes: Vec<f64> = slopes.into_iter().flatten().collect();
            if slopes.is_empty() {
                return Err(Failure::Verification("no replicate had a nonempty support".into()));
            }
            let mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
            TestReport::new("dimension-one-half", (mean - 0.5).abs(), 0.1, slopes.len(), seed, start.elapsed().as_secs_f64())
        }
    })
}

/// The config recorded in a JSON artifact (`"config"` key, or the file
/// itself) or in the `# config:` line of a CSV artifact.
fn recorded_config(path: &Path) -> Outcome<Command> {
    let text = std::fs::read_to_string(path)?;
    let parse = |s: &str| {
        serde_json::from_str::<Value>(s).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    };
    let value = match text.lines().next().and_then(|l| l.strip_prefix("# config: ")) {
        Some(line) => parse(line)?,
        None => {
            let v = parse(&text)?;
            v.get("config").cloned().unwrap_or(v)
        }
    };
    serde_json::from_value(value).map_err(|e| Failure::Core(Error::Validation(format!("not a recorded config: {e}"))))
}

fn redirect(cmd: &mut Command, path: PathBuf) {
    match cmd {
        Command::Sample { out, .. } | Command::Lpp { out, .. } | Command::Pitman { out, .. } | Command::Dlpp { out, .. } => {
            out.out = Some(path)
        }
        Command::Profile { out, support, .. } => {
            *support = Some(suffixed(&path, "support.csv"));
            *out = path;
        }
        Command::TwoWedge { out, .. } => *out = path,
        Command::Verify { out, .. } | Command::Montecarlo { out, .. } | Command::Rerun { out, .. } => *out = Some(path),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let f = invalid(e.kind().to_string());
            let mut report = f.report();
            report["message"] = json!(e.to_string().trim());
            eprintln!("{report}");
            return ExitCode::from(f.code());
        }
    };
    match configure_threads().and_then(|_| run(&cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.report());
            ExitCode::from(f.code())
        }
    }
}

//! Command-line workflows around the analysis library. The binary is a thin
//! wrapper over [`run`].

pub mod bench;
pub mod report;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use sag_core::format::{parse_instance, parse_scenario, write_instance};
use sag_core::gen::{generate_instance, Deadlines, GenSpec, Priorities};
use sag_core::oracle::{enumerate, simulate, EnumerateOptions, DEFAULT_MAX_SCENARIOS};
use sag_core::sag::{export_dot, generate, AnalysisOptions, Mode};
use sag_core::{AnalysisError, ExecutionScenario, OracleError, PolicyKind, ProblemInstance, Time};

/// Exit codes. Stable across releases.
pub mod exit {
    pub const OK: u8 = 0;
    pub const UNSCHEDULABLE: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const STUCK: u8 = 3;
    /// The analysis and the oracle disagree.
    pub const MISMATCH: u8 = 4;
}

#[derive(Debug, Parser)]
#[command(
    name = "sag",
    version,
    about = "Schedulability analysis of non-preemptive periodic tasks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct Output {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the report to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PolicyArg {
    #[arg(long, default_value = "edf")]
    pub policy: PolicyKind,
}

#[derive(Debug, Args)]
pub struct ModeArg {
    #[arg(long, default_value = "me")]
    pub mode: Mode,
}

#[derive(Debug, Args)]
pub struct CapArg {
    /// Refuse to enumerate more scenarios than this.
    #[arg(long, env = "SAG_MAX_SCENARIOS", default_value_t = DEFAULT_MAX_SCENARIOS)]
    pub max_scenarios: u128,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the schedule-abstraction graph and report the verdict.
    Analyze {
        instance: PathBuf,
        #[command(flatten)]
        policy: PolicyArg,
        #[command(flatten)]
        mode: ModeArg,
        /// Keep exploring after the first deadline miss.
        #[arg(long)]
        exhaustive_misses: bool,
        /// Expand vertices on one thread.
        #[arg(long)]
        sequential: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Simulate one concrete execution scenario.
    Simulate {
        instance: PathBuf,
        #[arg(long, required_unless_present = "worst_case")]
        scenario: Option<PathBuf>,
        /// Latest releases and largest execution times.
        #[arg(long, conflicts_with = "scenario")]
        worst_case: bool,
        #[command(flatten)]
        policy: PolicyArg,
        #[command(flatten)]
        output: Output,
    },
    /// Simulate every execution scenario.
    BruteForce {
        instance: PathBuf,
        #[command(flatten)]
        policy: PolicyArg,
        #[command(flatten)]
        cap: CapArg,
        /// Check every scenario instead of stopping at the first miss.
        #[arg(long)]
        all: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Generate a random instance.
    Gen {
        #[arg(long)]
        tasks: usize,
        #[arg(long)]
        util: f64,
        #[arg(long, default_value_t = 0.0)]
        rj: f64,
        #[arg(long, default_value_t = 0.0)]
        rc: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_values_t = sag_core::gen::DEFAULT_PERIODS)]
        periods: Vec<Time>,
        /// Draw priorities uniformly from this many levels instead of
        /// giving every task priority 0.
        #[arg(long)]
        priority_levels: Option<u32>,
        /// Set every deadline to the period.
        #[arg(long)]
        implicit_deadlines: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run both eligibility modes and the oracle and compare the verdicts.
    Compare {
        instance: PathBuf,
        #[command(flatten)]
        policy: PolicyArg,
        #[command(flatten)]
        cap: CapArg,
        #[command(flatten)]
        output: Output,
    },
    /// Write the graph in Graphviz DOT.
    ExportDot {
        instance: PathBuf,
        #[command(flatten)]
        policy: PolicyArg,
        #[command(flatten)]
        mode: ModeArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time the analysis over generated instances and print CSV.
    Bench {
        spec: PathBuf,
        /// Instances analysed concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// What a command printed and how the process should exit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: u8,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn load_instance(path: &Path) -> Result<ProblemInstance> {
    parse_instance(&read(path)?).with_context(|| format!("invalid instance {}", path.display()))
}

/// Writes `body` to `out` if given, otherwise returns it for stdout.
fn emit(body: String, out: Option<&Path>, code: u8) -> Result<Outcome> {
    match out {
        Some(path) => {
            fs::write(path, body).with_context(|| format!("cannot write {}", path.display()))?;
            Ok(Outcome {
                stdout: String::new(),
                stderr: String::new(),
                code,
            })
        }
        None => Ok(Outcome {
            stdout: body,
            stderr: String::new(),
            code,
        }),
    }
}

fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn verdict_code(schedulable: bool) -> u8 {
    if schedulable {
        exit::OK
    } else {
        exit::UNSCHEDULABLE
    }
}

fn stuck(e: AnalysisError) -> Outcome {
    Outcome {
        stdout: String::new(),
        stderr: format!("error: {e}\n"),
        code: exit::STUCK,
    }
}

/// Runs a parsed command. Errors are input or usage problems (exit 2).
pub fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Analyze {
            instance,
            policy,
            mode,
            exhaustive_misses,
            sequential,
            output,
        } => {
            let inst = load_instance(&instance)?;
            let options = AnalysisOptions {
                mode: mode.mode,
                exhaustive_misses,
                parallel: !sequential,
            };
            let result = match generate(&inst, policy.policy, options) {
                Ok((_, r)) => r,
                Err(e) => return Ok(stuck(e)),
            };
            let body = match output.format {
                Format::Json => json(&report::analysis_json(&inst, &result)),
                Format::Text => report::analysis_text(&inst, &result),
            };
            emit(body, output.out.as_deref(), verdict_code(result.schedulable))
        }
        Command::Simulate {
            instance,
            scenario,
            worst_case,
            policy,
            output,
        } => {
            let inst = load_instance(&instance)?;
            let s = match (scenario, worst_case) {
                (Some(path), _) => parse_scenario(&read(&path)?, &inst)
                    .with_context(|| format!("invalid scenario {}", path.display()))?,
                (None, _) => ExecutionScenario::worst_case(&inst),
            };
            let trace = simulate(&inst, policy.policy, &s)?;
            let body = match output.format {
                Format::Json => json(&report::trace_json(&inst, policy.policy, &trace)),
                Format::Text => report::trace_text(&inst, policy.policy, &trace),
            };
            emit(body, output.out.as_deref(), verdict_code(trace.misses.is_empty()))
        }
        Command::BruteForce {
            instance,
            policy,
            cap,
            all,
            output,
        } => {
            let inst = load_instance(&instance)?;
            let options = EnumerateOptions {
                max_scenarios: cap.max_scenarios,
                stop_at_first_miss: !all,
                parallel: true,
            };
            let r = enumerate(&inst, policy.policy, options)?;
            let body = match output.format {
                Format::Json => json(&report::oracle_json(&inst, &r)),
                Format::Text => report::oracle_text(&inst, &r),
            };
            emit(body, output.out.as_deref(), verdict_code(r.schedulable))
        }
        Command::Gen {
            tasks,
            util,
            rj,
            rc,
            seed,
            periods,
            priority_levels,
            implicit_deadlines,
            out,
        } => {
            let spec = GenSpec {
                periods,
                priorities: priority_levels.map_or(Priorities::AllZero, |levels| Priorities::Random { levels }),
                deadlines: if implicit_deadlines {
                    Deadlines::Implicit
                } else {
                    Deadlines::Random
                },
                ..GenSpec::new(tasks, util, rj, rc, seed)
            };
            let inst = generate_instance(&spec)?;
            emit(write_instance(&inst), out.as_deref(), exit::OK)
        }
        Command::Compare {
            instance,
            policy,
            cap,
            output,
        } => {
            let inst = load_instance(&instance)?;
            compare(&inst, policy.policy, cap.max_scenarios, &output)
        }
        Command::ExportDot {
            instance,
            policy,
            mode,
            out,
        } => {
            let inst = load_instance(&instance)?;
            let options = AnalysisOptions::with_mode(mode.mode);
            let (graph, result) = match generate(&inst, policy.policy, options) {
                Ok(x) => x,
                Err(e) => return Ok(stuck(e)),
            };
            emit(export_dot(&graph, &inst, &result.misses), out.as_deref(), exit::OK)
        }
        Command::Bench { spec, jobs, out } => {
            anyhow::ensure!(jobs >= 1, "--jobs must be at least 1");
            let spec = bench::BenchSpec::parse(&read(&spec)?)?;
            let rows = bench::run_bench(&spec, jobs)?;
            emit(bench::to_csv(&rows), out.as_deref(), exit::OK)
        }
    }
}

#[derive(Debug, serde::Serialize)]
struct CompareJson {
    policy: PolicyKind,
    me: &'static str,
    se: &'static str,
    oracle: &'static str,
    consistent: bool,
}

fn label(r: std::result::Result<bool, &'static str>) -> &'static str {
    match r {
        Ok(true) => "schedulable",
        Ok(false) => "unschedulable",
        Err(other) => other,
    }
}

fn compare(inst: &ProblemInstance, policy: PolicyKind, cap: u128, output: &Output) -> Result<Outcome> {
    let analyse = |mode| match generate(inst, policy, AnalysisOptions::with_mode(mode)) {
        Ok((_, r)) => Ok(r.schedulable),
        Err(AnalysisError::Stuck { .. }) => Err("stuck"),
    };
    let me = analyse(Mode::Me);
    let se = analyse(Mode::Se);
    let options = EnumerateOptions {
        max_scenarios: cap,
        ..EnumerateOptions::default()
    };
    let oracle = match enumerate(inst, policy, options) {
        Ok(r) => Ok(r.schedulable),
        Err(OracleError::TooManyScenarios { .. }) => Err("skipped"),
        Err(OracleError::Stuck { .. }) => Err("stuck"),
        Err(e) => return Err(e.into()),
    };
    let consistent = match (me, oracle) {
        (Ok(a), Ok(b)) => a == b,
        (_, Err("skipped")) => true,
        (a, b) => a == b,
    };
    let row = CompareJson {
        policy,
        me: label(me),
        se: label(se),
        oracle: label(oracle),
        consistent,
    };
    let body = match output.format {
        Format::Json => json(&row),
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "policy {policy}");
            let _ = writeln!(s, "{:<8} {}", "me", row.me);
            let _ = writeln!(s, "{:<8} {}", "se", row.se);
            let _ = writeln!(s, "{:<8} {}", "oracle", row.oracle);
            if !consistent {
                s.push_str("EXACTNESS VIOLATION: analysis and oracle disagree\n");
            }
            s
        }
    };
    let code = if consistent { exit::OK } else { exit::MISMATCH };
    emit(body, output.out.as_deref(), code)
}

/// Maps `f` over `items` on `threads` threads, keeping input order.
pub fn map_ordered<T: Sync, R: Send>(items: &[T], threads: usize, f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    if threads > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool");
        return pool.install(|| items.par_iter().map(&f).collect());
    }
    let _ = threads;
    items.iter().map(f).collect()
}

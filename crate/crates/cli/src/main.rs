//! `ehrenfest`: exact values, oracle solves, verification sweeps and
//! simulation for the n-urn Ehrenfest walk.
//!
//! Exit codes: 0 success, 1 check failure, 2 usage error, 3 size or
//! resource limit.

mod report;

use std::io::{self, IsTerminal, Write};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ehrenfest::formulas::{self, HittingQuery};
use ehrenfest::oracle::{self, Oracle};
use ehrenfest::scalar::{from_int, to_exact_string, to_f64, zero};
use ehrenfest::simulator::{self, SimulationPlan};
use ehrenfest::verify::{self, VerifyOptions};
use ehrenfest::{Configuration, Error, ModelParams};

use report::{Check, Estimate, RunReport};

const BUDGET_ENV: &str = "EHRENFEST_ORACLE_BUDGET";

#[derive(Parser, Debug)]
#[command(name = "ehrenfest", version, about = "Expected hitting times for the n-urn Ehrenfest model")]
struct Cli {
    /// Output format; defaults to a table on a terminal and JSON lines otherwise
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Report `elapsed_ms` as null so that output is reproducible byte for byte
    #[arg(long, global = true)]
    no_timing: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Args, Debug, Clone, Copy)]
struct Model {
    #[arg(long)]
    urns: u32,
    #[arg(long)]
    balls: u32,
}

impl Model {
    fn params(self) -> Result<ModelParams, Error> {
        ModelParams::new(self.urns, self.balls)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Expected time from (1,…,1) to (2,…,2) and its passage increments
    Exact {
        #[command(flatten)]
        model: Model,
    },
    /// Expected time between two configurations
    General {
        #[command(flatten)]
        model: Model,
        /// Start configuration, comma-separated urns
        #[arg(long, conflicts_with = "hamming", requires = "to")]
        from: Option<String>,
        /// Target configuration, comma-separated urns
        #[arg(long, conflicts_with = "hamming", requires = "from")]
        to: Option<String>,
        /// Use (1,…,1) and the configuration with its last L balls in urn 2
        #[arg(long, required_unless_present = "from")]
        hamming: Option<u32>,
    },
    /// Run the cross-check suite over a grid of (urns, balls)
    Verify {
        #[arg(long, default_value_t = 6)]
        max_urns: u32,
        #[arg(long, default_value_t = 8)]
        max_balls: u32,
        #[arg(long, env = BUDGET_ENV, default_value_t = oracle::DEFAULT_BUDGET)]
        oracle_budget: u64,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Solve the full-graph linear system exactly and compare with the formula
    Oracle {
        #[command(flatten)]
        model: Model,
        /// Start configuration (default all balls in urn 1)
        #[arg(long)]
        from: Option<String>,
        /// Target configuration (default all balls in urn 2)
        #[arg(long)]
        to: Option<String>,
        #[arg(long, env = BUDGET_ENV, default_value_t = oracle::DEFAULT_BUDGET)]
        budget: u64,
        /// Conjugate-gradient solve for spaces beyond the budget
        #[arg(long)]
        approximate: bool,
    },
    /// Monte Carlo estimate of the hitting time
    Simulate {
        #[command(flatten)]
        model: Model,
        #[arg(long)]
        from: Option<String>,
        #[arg(long)]
        to: Option<String>,
        #[arg(long, default_value_t = 100_000)]
        reps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Defaults to the number of available cores; does not change the result
        #[arg(long)]
        workers: Option<usize>,
        /// Step cap per replication (default 100·n^M·M)
        #[arg(long)]
        max_steps: Option<u64>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidParams(_)
        | Error::InvalidConfiguration(_)
        | Error::IdenticalConfigurations
        | Error::Domain(_)
        | Error::Precondition(_)
        | Error::InvalidPlan(_) => 2,
        Error::TooLarge { .. } | Error::AllTruncated { .. } => 3,
        _ => 1,
    }
}

fn pair(params: ModelParams, from: Option<&str>, to: Option<&str>) -> Result<(Configuration, Configuration), Error> {
    let start = from.map_or_else(|| Ok(Configuration::all_ones(params)), |s| Configuration::parse(s, params))?;
    let target = to.map_or_else(|| Ok(Configuration::all_target(params)), |s| Configuration::parse(s, params))?;
    Ok((start, target))
}

fn echo_model(report: &mut RunReport, params: ModelParams) {
    report.param("urns", params.urns()).param("balls", params.balls());
}

fn cmd_exact(model: Model) -> Result<RunReport, Error> {
    let params = model.params()?;
    let mut report = RunReport::new("exact");
    echo_model(&mut report, params);
    report.result("s", &formulas::s_closed_form(params));
    for (k, e) in formulas::e_k_all(params).iter().enumerate() {
        report.result(format!("e_{k}"), e);
    }
    Ok(report)
}

fn cmd_general(model: Model, from: Option<String>, to: Option<String>, hamming: Option<u32>) -> Result<RunReport, Error> {
    let params = model.params()?;
    let (query, start, target) = match hamming {
        Some(l) => {
            let query = HittingQuery::new(params, l)?;
            let (start, target) = query.canonical_pair();
            (query, start, target)
        }
        None => {
            let (start, target) = pair(params, from.as_deref(), to.as_deref())?;
            (HittingQuery::from_pair(params, &start, &target)?, start, target)
        }
    };
    let mut report = RunReport::new("general");
    echo_model(&mut report, params);
    report.param("from", start.to_string()).param("to", target.to_string());
    report.result("L", &from_int(query.hamming_distance));
    report.result("expected_hitting_time", &formulas::general_hitting_time(query));
    Ok(report)
}

fn cmd_verify(max_urns: u32, max_balls: u32, oracle_budget: u64, inject_fault: bool) -> Result<RunReport, Error> {
    let options = VerifyOptions { max_urns, max_balls, oracle_budget, inject_fault };
    let suite = verify::run_suite(options)?;
    let mut report = RunReport::new("verify");
    report.param("max_urns", max_urns).param("max_balls", max_balls).param("oracle_budget", oracle_budget);
    for c in suite.checks {
        report.check(c.into());
    }
    Ok(report)
}

fn cmd_oracle(
    model: Model,
    from: Option<String>,
    to: Option<String>,
    budget: u64,
    approximate: bool,
) -> Result<RunReport, Error> {
    let params = model.params()?;
    let (start, target) = pair(params, from.as_deref(), to.as_deref())?;
    let l = start.hamming(&target) as u32;
    let formula = if l == 0 { zero() } else { formulas::general_hitting_time(HittingQuery::new(params, l)?) };

    let mut report = RunReport::new("oracle");
    echo_model(&mut report, params);
    report.param("from", start.to_string()).param("to", target.to_string()).param("budget", budget);

    match params.states_within(budget) {
        Ok(_) => {
            let h = Oracle::new(budget).expected_hitting_time(params, &start, &target)?;
            report.result("oracle", &h).result("formula", &formula);
            let passed = h == formula;
            let detail = format!("{} vs {}", to_exact_string(&h), to_exact_string(&formula));
            report.check(Check::new("matches_formula", passed, detail));
        }
        Err(_) if approximate => {
            let approx = Oracle::new(budget).approximate_hitting_time(params, &start, &target)?;
            report.result("formula", &formula);
            report.param("approximate", true);
            let rel = (approx.value - to_f64(&formula)).abs() / to_f64(&formula).max(1.0);
            let passed = rel <= oracle::FLOAT_FALLBACK_TOLERANCE * 10.0;
            report.check(Check::new(
                "matches_formula",
                passed,
                format!("{} (residual {:e}, relative gap {rel:e})", approx.value, approx.relative_residual),
            ));
        }
        Err(e) => return Err(e),
    }
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    model: Model,
    from: Option<String>,
    to: Option<String>,
    reps: u64,
    seed: u64,
    workers: Option<usize>,
    max_steps: Option<u64>,
) -> Result<RunReport, Error> {
    let params = model.params()?;
    let (start, target) = pair(params, from.as_deref(), to.as_deref())?;
    let workers = workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let mut plan = SimulationPlan::new(params, start.clone(), target.clone(), reps, seed)?.with_workers(workers)?;
    if let Some(cap) = max_steps {
        plan = plan.with_max_steps(cap)?;
    }
    let exact = formulas::general_hitting_time(HittingQuery::from_pair(params, &start, &target)?);
    let estimate = simulator::estimate_general(&plan)?;
    let z = estimate.standardized_error(to_f64(&exact));

    let mut report = RunReport::new("simulate");
    echo_model(&mut report, params);
    report
        .param("from", start.to_string())
        .param("to", target.to_string())
        .param("reps", reps)
        .param("seed", seed)
        .param("max_steps", plan.max_steps);
    report.result("exact", &exact);
    report.check(Check::new("within_4_sigma", z.abs() < 4.0, format!("z = {z:+.4}")));
    report.estimate = Some(Estimate { estimate, exact: to_exact_string(&exact), standardized_error: z });
    Ok(report)
}

fn run(cli: Cli) -> Result<RunReport, Error> {
    match cli.command {
        Command::Exact { model } => cmd_exact(model),
        Command::General { model, from, to, hamming } => cmd_general(model, from, to, hamming),
        Command::Verify { max_urns, max_balls, oracle_budget, inject_fault } => {
            cmd_verify(max_urns, max_balls, oracle_budget, inject_fault)
        }
        Command::Oracle { model, from, to, budget, approximate } => cmd_oracle(model, from, to, budget, approximate),
        Command::Simulate { model, from, to, reps, seed, workers, max_steps } => {
            cmd_simulate(model, from, to, reps, seed, workers, max_steps)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let format = cli.format.unwrap_or(if stdout.is_terminal() { Format::Table } else { Format::Json });
    let timing = !cli.no_timing;

    let started = Instant::now();
    let mut report = match run(cli) {
        Ok(report) => report,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    if timing {
        report.elapsed_ms = Some(started.elapsed().as_millis() as u64);
    }

    let mut out = stdout.lock();
    let written = match format {
        Format::Json => report.write_json(&mut out),
        Format::Csv => report.write_csv(&mut out),
        Format::Table => report.write_table(&mut out),
    };
    if let Err(e) = written.and_then(|_| out.flush()) {
        if e.kind() != io::ErrorKind::BrokenPipe {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

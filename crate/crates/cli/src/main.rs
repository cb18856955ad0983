//! `optkit` command-line front end.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use optkit::bench::profile::format_profiles;
use optkit::bench::registry::{find, TestProblem};
use optkit::bench::{data_profile, performance_profile, run_suite, write_profile_csv, CostKind, SuiteConfig, SuiteProblem};
use optkit::problem::{check_first_derivatives, ProblemSpec, ScalerSpec, ScaledView};
use optkit::runtime::{print_results, read_record, write_readable_outputs, write_record, OutputValue, RunRecord};
use optkit::solvers::{solve, SolverKind, SolverOptions};
use optkit::{Error, Vector};

#[derive(Parser, Debug)]
#[command(name = "optkit", version, about = "Nonlinear optimization toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one solver on one registry problem.
    Run(RunArgs),
    /// Compare analytic first derivatives with finite differences at x0.
    Check(ProblemArgs),
    /// Run every solver on every problem and export profiles.
    Bench(BenchArgs),
    /// Summarize a run record.
    Inspect(InspectArgs),
}

#[derive(Args, Debug)]
struct ProblemArgs {
    /// Registry problem name.
    #[arg(long)]
    problem: String,
    /// Size of `rosen_uncoupled`, `rosen_coupled` or `sphere_box`.
    #[arg(long)]
    n: Option<usize>,
    /// Number of cantilever elements.
    #[arg(long = "n-el")]
    n_el: Option<usize>,
    /// Number of spacecraft time steps.
    #[arg(long = "n-t")]
    n_t: Option<usize>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long)]
    solver: String,
    #[arg(long)]
    maxiter: Option<usize>,
    #[arg(long = "opt-tol")]
    opt_tol: Option<f64>,
    #[arg(long = "feas-tol")]
    feas_tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Solver option override, `key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Variable scalers: one value for all, or one per variable.
    #[arg(long = "x-scaler", value_delimiter = ',')]
    x_scaler: Option<Vec<f64>>,
    #[arg(long = "f-scaler")]
    f_scaler: Option<f64>,
    /// Constraint scalers: one value for all, or one per constraint.
    #[arg(long = "c-scaler", value_delimiter = ',')]
    c_scaler: Option<Vec<f64>>,
    /// Write the run record here.
    #[arg(long)]
    record: Option<PathBuf>,
    /// Replay evaluations from an earlier record.
    #[arg(long = "hot-start")]
    hot_start: Option<PathBuf>,
    /// Iteration outputs to export as text files, e.g. `obj,x`.
    #[arg(long = "readable-outputs", value_delimiter = ',')]
    readable_outputs: Vec<String>,
    #[arg(long = "out-dir", default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ProfileKind {
    Perf,
    Data,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Problems as `name` or `name:size`, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    problems: Vec<String>,
    #[arg(long, value_delimiter = ',', required = true)]
    solvers: Vec<String>,
    /// Profile to export; both when omitted.
    #[arg(long, value_enum)]
    profile: Option<ProfileKind>,
    #[arg(long = "budget-seconds")]
    budget_seconds: Option<f64>,
    #[arg(long)]
    maxiter: Option<usize>,
    /// Override applied to every solver that declares the option.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long = "out-dir", default_value = ".")]
    out_dir: PathBuf,
    /// Run the pairs one after another.
    #[arg(long)]
    serial: bool,
}

#[derive(Args, Debug)]
struct InspectArgs {
    record: PathBuf,
    /// Print the last K iterations.
    #[arg(long)]
    tail: Option<usize>,
    /// Iteration outputs to export as text files.
    #[arg(long, value_delimiter = ',')]
    outputs: Vec<String>,
    #[arg(long = "out-dir", default_value = ".")]
    out_dir: PathBuf,
}

/// Failure of a subcommand, mapped onto the exit code.
enum Failure {
    /// Bad names, options or inputs.
    Config(String),
    /// The command ran but did not succeed.
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidProblem(_)
            | Error::Dimension { .. }
            | Error::Unsupported(_)
            | Error::UnknownOption { .. }
            | Error::OptionType { .. }
            | Error::UndeclaredOutput(_)
            | Error::RecordParse { .. }
            | Error::RecordVersion(_)
            | Error::IncompatibleRecord(_)
            | Error::UnknownName { .. }
            | Error::MissingCallback(_) => Failure::Config(e.to_string()),
            _ => Failure::Run(e.to_string()),
        }
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(&a),
        Command::Check(a) => cmd_check(&a),
        Command::Bench(a) => cmd_bench(&a),
        Command::Inspect(a) => cmd_inspect(&a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn lookup_problem(args: &ProblemArgs) -> Result<(&'static TestProblem, Option<usize>), Failure> {
    let entry = find(&args.problem)?;
    let given: Vec<(&str, usize)> = [("n", args.n), ("n_el", args.n_el), ("n_t", args.n_t)]
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k, v)))
        .collect();
    let size = match (given.as_slice(), entry.size) {
        ([], _) => None,
        ([(flag, v)], Some(p)) if *flag == p.name => Some(*v),
        ([(flag, _)], Some(p)) => {
            return Err(Failure::Config(format!(
                "`{}` is sized by --{}, not --{}",
                entry.name,
                p.name.replace('_', "-"),
                flag.replace('_', "-")
            )))
        }
        ([_], None) => return Err(Failure::Config(format!("`{}` has a fixed size", entry.name))),
        _ => return Err(Failure::Config("give at most one size flag".into())),
    };
    Ok((entry, size))
}

fn broadcast(values: &[f64], len: usize, what: &str) -> Result<Vector, Failure> {
    match values.len() {
        1 => Ok(Vector::from_element(len, values[0])),
        k if k == len => Ok(Vector::from_column_slice(values)),
        k => Err(Failure::Config(format!("--{what} needs 1 or {len} values, got {k}"))),
    }
}

fn build_spec(args: &RunArgs) -> Result<ProblemSpec, Failure> {
    let (entry, size) = lookup_problem(&args.problem)?;
    let spec = entry.build(size)?;
    if args.x_scaler.is_none() && args.f_scaler.is_none() && args.c_scaler.is_none() {
        return Ok(spec);
    }
    let s = spec.scalers();
    let x = match &args.x_scaler {
        Some(v) => broadcast(v, spec.n(), "x-scaler")?,
        None => s.x.clone(),
    };
    let c = match &args.c_scaler {
        Some(v) => broadcast(v, spec.m(), "c-scaler")?,
        None => s.c.clone(),
    };
    Ok(spec.with_scalers(ScalerSpec {
        x: Some(x),
        f: Some(args.f_scaler.unwrap_or(s.f)),
        c: Some(c),
    })?)
}

fn build_options(kind: SolverKind, args: &RunArgs) -> Result<SolverOptions, Failure> {
    let mut opts = kind.default_options();
    if let Some(v) = args.maxiter {
        opts.set("maxiter", v)?;
    }
    if let Some(v) = args.opt_tol {
        opts.set("opt_tol", v)?;
    }
    if let Some(v) = args.feas_tol {
        opts.set("feas_tol", v)?;
    }
    if let Some(v) = args.seed {
        opts.set_str("seed", &v.to_string())?;
    }
    for a in &args.set {
        opts.parse_assignment(a)?;
    }
    Ok(opts)
}

fn cmd_run(args: &RunArgs) -> Outcome {
    let kind: SolverKind = args.solver.parse()?;
    let spec = build_spec(args)?;
    let opts = build_options(kind, args)?;
    let source = match &args.hot_start {
        Some(p) => Some(read_record(p)?),
        None => None,
    };

    let mut view = ScaledView::new(&spec);
    let recording = args.record.is_some() || !args.readable_outputs.is_empty();
    if recording {
        view.enable_recording();
    }
    if let Some(src) = &source {
        view.hot_start_from(src)?;
    }
    let result = solve(kind, &mut view, &opts);
    let record = view.take_record();
    if let (Some(path), Some(rec)) = (&args.record, &record) {
        write_record(rec, path).map_err(|e| Failure::Run(e.to_string()))?;
    }
    let report = result?;
    println!("{}", print_results(&report));
    println!("fresh evaluations: {}", report.counters.total());

    if let Some(rec) = &record {
        if !args.readable_outputs.is_empty() {
            let names: Vec<&str> = args.readable_outputs.iter().map(String::as_str).collect();
            for p in write_readable_outputs(rec, &names, &args.out_dir)? {
                println!("wrote {}", p.display());
            }
        }
    }
    if let Some(p) = &args.record {
        println!("record: {}", p.display());
    }
    Ok(report.converged)
}

fn cmd_check(args: &ProblemArgs) -> Outcome {
    let (entry, size) = lookup_problem(args)?;
    if !entry.analytic {
        return Err(Failure::Config(format!(
            "`{}` has no analytic derivatives to check",
            entry.name
        )));
    }
    let spec = entry.build(size)?;
    let mut view = ScaledView::new(&spec);
    let x0 = view.x0().clone();
    let report = check_first_derivatives(&mut view, &x0)?;
    println!("problem: {} (n={}, m={})", spec.name(), spec.n(), spec.m());
    println!("{report}");
    Ok(report.passed())
}

fn cmd_bench(args: &BenchArgs) -> Outcome {
    let problems = args
        .problems
        .iter()
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<SuiteProblem>())
        .collect::<Result<Vec<_>, _>>()?;
    let solvers = args
        .solvers
        .iter()
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<SolverKind>())
        .collect::<Result<Vec<_>, _>>()?;
    if problems.is_empty() || solvers.is_empty() {
        return Err(Failure::Config("bench needs at least one problem and one solver".into()));
    }
    let mut overrides = Vec::new();
    for a in &args.set {
        let (k, v) = a
            .split_once('=')
            .ok_or_else(|| Failure::Config(format!("expected KEY=VALUE, got `{a}`")))?;
        if !solvers.iter().any(|s| s.default_options().is_declared(k.trim())) {
            return Err(Failure::Config(format!("no selected solver declares option `{}`", k.trim())));
        }
        overrides.push((k.trim().to_string(), v.trim().to_string()));
    }
    let config = SuiteConfig {
        overrides,
        maxiter: args.maxiter,
        budget_seconds: args.budget_seconds,
        parallel: !args.serial,
    };
    let result = run_suite(&problems, &solvers, &config)?;
    print!("{}", result.format_summary());
    for r in result.runs.iter().filter(|r| r.error.is_some()) {
        println!("note: {} on {}: {}", r.solver, r.problem, r.error.as_deref().unwrap_or(""));
    }

    std::fs::create_dir_all(&args.out_dir).map_err(|e| Failure::Run(e.to_string()))?;
    let summary = args.out_dir.join("summary.csv");
    result.write_summary_csv(&summary)?;
    println!("wrote {}", summary.display());

    let kinds = match args.profile {
        Some(k) => vec![k],
        None => vec![ProfileKind::Perf, ProfileKind::Data],
    };
    for kind in kinds {
        let (profiles, file, at) = match kind {
            ProfileKind::Perf => (
                performance_profile(&result.table(CostKind::Time)),
                "profile_perf.csv",
                vec![1.0, 2.0, 4.0, 8.0, 16.0],
            ),
            ProfileKind::Data => (
                data_profile(&result.table(CostKind::Evaluations), &result.dims)?,
                "profile_data.csv",
                vec![10.0, 50.0, 100.0, 500.0, 1000.0],
            ),
        };
        let path = args.out_dir.join(file);
        write_profile_csv(&profiles, &path)?;
        println!();
        println!("{} profile (fraction solved):", if matches!(kind, ProfileKind::Perf) { "performance" } else { "data" });
        print!("{}", format_profiles(&profiles, &at));
        println!("wrote {}", path.display());
    }
    Ok(true)
}

fn format_value(v: &OutputValue) -> String {
    match v {
        OutputValue::Int(i) => i.to_string(),
        OutputValue::Real(r) => format!("{r:.6e}"),
        OutputValue::Vector(xs) => {
            let parts: Vec<String> = xs.iter().take(6).map(|r| format!("{r:.6e}")).collect();
            let more = if xs.len() > 6 { format!(", ... ({} total)", xs.len()) } else { String::new() };
            format!("[{}{more}]", parts.join(", "))
        }
    }
}

fn summarize(rec: &RunRecord, path: &Path) -> String {
    let h = &rec.header;
    let mut lines = vec![
        format!("record: {}", path.display()),
        format!("problem: {} (n={}, m={})", h.problem, h.n, h.m),
        format!("solver: {}", h.solver),
        format!("timestamp: {}", h.timestamp),
    ];
    if !h.options.is_empty() {
        let opts: Vec<String> = h.options.iter().map(|(k, v)| format!("{k}={v}")).collect();
        lines.push(format!("options: {}", opts.join(" ")));
    }
    lines.push(format!("{} iterations, {} evaluations", rec.n_iterations(), rec.n_evals()));
    let mut by_kind: Vec<(String, usize)> = Vec::new();
    for ev in rec.evals() {
        let k = ev.kind.as_str().to_string();
        match by_kind.iter_mut().find(|(name, _)| *name == k) {
            Some((_, c)) => *c += 1,
            None => by_kind.push((k, 1)),
        }
    }
    if !by_kind.is_empty() {
        let parts: Vec<String> = by_kind.iter().map(|(k, c)| format!("{k}={c}")).collect();
        lines.push(format!("evaluations by kind: {}", parts.join(" ")));
    }
    lines.join("\n")
}

fn cmd_inspect(args: &InspectArgs) -> Outcome {
    let rec = read_record(&args.record)?;
    println!("{}", summarize(&rec, &args.record));
    if let Some(k) = args.tail {
        let iters: Vec<_> = rec.iterations().collect();
        for it in &iters[iters.len().saturating_sub(k)..] {
            let row: Vec<String> = it.values.iter().map(|(name, v)| format!("{name}={}", format_value(v))).collect();
            println!("{}", row.join(" "));
        }
    }
    if !args.outputs.is_empty() {
        let names: Vec<&str> = args.outputs.iter().map(String::as_str).collect();
        for p in write_readable_outputs(&rec, &names, &args.out_dir)? {
            println!("wrote {}", p.display());
        }
    }
    Ok(true)
}

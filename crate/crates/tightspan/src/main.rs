use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tightspan::bench;
use tightspan::check::{check, Status};
use tightspan::driver::{auto_drive_general, auto_thresholds};
use tightspan::format::{
    emit_assignment, emit_instance, parse_assignment, parse_instance, parse_rational,
};
use tightspan::generate::{generate, seed_from_env, GeneratorSpec, DEFAULT_SEED};
use tightspan::report::{self, Mode, Row, SolveReport};
use tightspan_core::balance::{a_um, UmOutcome};
use tightspan_core::oracle::{optimal_makespan, schedule_exists};
use tightspan_core::rational::Rational;
use tightspan_core::restricted::{ratio_bound, solve_restricted, Strategy};
use tightspan_core::{Assignment, Instance, Time};

const EXIT_FAILURE: u8 = 1;
const EXIT_VIOLATION: u8 = 2;
const EXIT_PARSE: u8 = 3;
const EXIT_INFEASIBLE: u8 = 4;

/// Makespan approximation on unrelated parallel machines.
#[derive(Parser)]
#[command(name = "tightspan", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance with every job legal on exactly k machines.
    Gen(GenArgs),
    /// Solve an instance.
    #[command(subcommand)]
    Solve(Solve),
    /// Exact optimum (or, with --T and --L, the budgeted decision question).
    Oracle(OracleArgs),
    /// Re-verify an assignment against the certified invariants.
    Check(CheckArgs),
    /// Evaluate every instance file of a directory.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    /// Legal machines per job (eps = k/m).
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 20)]
    pmax: Time,
    /// Defaults to $TIGHTSPAN_SEED, then 42.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    restricted: bool,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Solve {
    /// LP rounding plus one matching-based transfer round.
    General(GeneralArgs),
    /// Local balancing for restricted instances.
    Restricted(RestrictedArgs),
}

#[derive(Args)]
struct Thresholds {
    /// Makespan threshold T.
    #[arg(long = "T", requires = "l")]
    t: Option<Time>,
    /// Average-load budget L, as an integer or num/den.
    #[arg(long = "L", requires = "t", value_parser = parse_rational)]
    l: Option<Rational>,
}

#[derive(Args)]
struct GeneralArgs {
    #[arg(long)]
    instance: PathBuf,
    #[command(flatten)]
    thresholds: Thresholds,
    /// Choose T and L automatically (the default without --T/--L).
    #[arg(long, conflicts_with_all = ["t", "l"])]
    auto: bool,
    #[arg(long)]
    json: bool,
    /// Write the assignment (1-based) to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Descent,
    PathPush,
}

#[derive(Args)]
struct RestrictedArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "descent")]
    strategy: StrategyArg,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    instance: PathBuf,
    #[command(flatten)]
    thresholds: Thresholds,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    assignment: PathBuf,
    /// Thresholds for the general-case checks; chosen automatically when
    /// omitted.
    #[command(flatten)]
    thresholds: Thresholds,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    dir: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "general,restricted")]
    modes: Vec<ModeArg>,
    /// CSV output; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the JSON report here.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    General,
    Restricted,
    Oracle,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::General => Mode::General,
            ModeArg::Restricted => Mode::Restricted,
            ModeArg::Oracle => Mode::Oracle,
        }
    }
}

/// Failure carrying its exit code.
struct Exit(u8, String);

impl Exit {
    fn failure(msg: impl ToString) -> Self {
        Exit(EXIT_FAILURE, msg.to_string())
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Exit> {
    std::fs::read(path).map_err(|e| Exit::failure(format!("{}: {e}", path.display())))
}

fn write(path: Option<&Path>, text: &str) -> Result<(), Exit> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Exit::failure(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_instance(path: &Path) -> Result<Instance, Exit> {
    parse_instance(&read(path)?).map_err(|e| Exit(EXIT_PARSE, format!("{}: {e}", path.display())))
}

fn load_assignment(path: &Path, inst: &Instance) -> Result<Assignment, Exit> {
    parse_assignment(&read(path)?, inst)
        .map_err(|e| Exit(EXIT_PARSE, format!("{}: {e}", path.display())))
}

fn instance_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn print_row(row: &SolveReport, a: Option<&Assignment>, json: bool) {
    if json {
        let mut value = serde_json::to_value(row).expect("reports serialize");
        if let Some(a) = a {
            let one_based: Vec<usize> = a.as_slice().iter().map(|&i| i + 1).collect();
            value["assignment"] = one_based.into();
        }
        println!("{}", serde_json::to_string_pretty(&value).expect("json"));
        return;
    }
    println!("mode            {}", row.mode.name());
    println!("m x n           {} x {}", row.m, row.n);
    println!("epsilon         {}", row.epsilon);
    println!("L               {}", row.l);
    if let Some(t) = row.t {
        println!("T               {t}");
    }
    println!("makespan        {}", row.makespan);
    println!("certified bound {}", row.certified_bound);
    if let Some(q) = row.q {
        println!("q               {q}");
        match row.ratio_bound {
            Some(r) => println!("ratio 1 + q/eps {r}{}", if row.beats_33_17 { " (at most 33/17)" } else { "" }),
            None => println!("ratio 1 + q/eps none (q >= eps)"),
        }
    }
    if let Some(a) = a {
        print!("assignment      {}", emit_assignment(a));
    }
}

fn finish(row: &SolveReport) -> Result<(), Exit> {
    if row.violation {
        return Err(Exit(
            EXIT_VIOLATION,
            format!("makespan {} exceeds the certified bound {}", row.makespan, row.certified_bound),
        ));
    }
    Ok(())
}

fn solve_general(args: GeneralArgs) -> Result<(), Exit> {
    let inst = load_instance(&args.instance)?;
    let id = instance_id(&args.instance);
    let start = Instant::now();
    let (t, l, outcome) = match (args.thresholds.t, args.thresholds.l) {
        (Some(t), Some(l)) if !args.auto => {
            (t, l, a_um(&inst, t, l).map_err(Exit::failure)?)
        }
        _ => {
            let run = auto_drive_general(&inst).map_err(Exit::failure)?;
            (run.t, run.l, run.outcome)
        }
    };
    let s = match outcome {
        UmOutcome::Scheduled(s) => s,
        UmOutcome::Infeasible { reason, .. } => {
            return Err(Exit(
                EXIT_INFEASIBLE,
                format!("INFEASIBLE: no schedule with makespan <= {t} and average load <= {l} ({reason:?})"),
            ))
        }
    };
    let row = SolveReport::general(&id, &inst, t, l, &s).with_wall_ms(start.elapsed().as_secs_f64() * 1e3);
    if let Some(out) = &args.out {
        write(Some(out), &emit_assignment(&s.assignment))?;
    }
    print_row(&row, Some(&s.assignment), args.json);
    finish(&row)
}

fn solve_restricted_cmd(args: RestrictedArgs) -> Result<(), Exit> {
    let inst = load_instance(&args.instance)?;
    let id = instance_id(&args.instance);
    let strategy = match args.strategy {
        StrategyArg::Descent => Strategy::Descent,
        StrategyArg::PathPush => Strategy::PathPush,
    };
    let start = Instant::now();
    let s = solve_restricted(&inst, strategy).map_err(Exit::failure)?;
    let cert = ratio_bound(&inst).map_err(Exit::failure)?;
    let row = SolveReport::restricted(&id, &inst, &s, &cert).with_wall_ms(start.elapsed().as_secs_f64() * 1e3);
    if let Some(out) = &args.out {
        write(Some(out), &emit_assignment(&s.assignment))?;
    }
    print_row(&row, Some(&s.assignment), args.json);
    finish(&row)
}

fn oracle_cmd(args: OracleArgs) -> Result<(), Exit> {
    let inst = load_instance(&args.instance)?;
    if let (Some(t), Some(l)) = (args.thresholds.t, args.thresholds.l) {
        let found = schedule_exists(&inst, t, l).map_err(Exit::failure)?;
        if args.json {
            let value = serde_json::json!({
                "T": t,
                "L": l.to_string(),
                "exists": found.is_some(),
                "witness": found.as_ref().map(|a| a.as_slice().iter().map(|&i| i + 1).collect::<Vec<_>>()),
            });
            println!("{}", serde_json::to_string_pretty(&value).expect("json"));
        } else {
            match &found {
                Some(a) => print!("schedule exists: {}", emit_assignment(a)),
                None => println!("no schedule with makespan <= {t} and average load <= {l}"),
            }
        }
        return match found {
            Some(_) => Ok(()),
            None => Err(Exit(EXIT_INFEASIBLE, "INFEASIBLE".into())),
        };
    }
    let start = Instant::now();
    let r = optimal_makespan(&inst).map_err(Exit::failure)?;
    let row = SolveReport::oracle(&instance_id(&args.instance), &inst, &r)
        .with_wall_ms(start.elapsed().as_secs_f64() * 1e3);
    print_row(&row, Some(&r.witness), args.json);
    Ok(())
}

fn check_cmd(args: CheckArgs) -> Result<(), Exit> {
    let inst = load_instance(&args.instance)?;
    let a = load_assignment(&args.assignment, &inst)?;
    let (t, l): (Time, Rational) = match (args.thresholds.t, args.thresholds.l) {
        (Some(t), Some(l)) => (t, l),
        _ => {
            let (t, l, _, _) = auto_thresholds(&inst).map_err(Exit::failure)?;
            (t, l)
        }
    };
    let report = check(&inst, &a, t, l);
    if args.json {
        let value = serde_json::json!({ "T": t, "L": l.to_string(), "report": report });
        println!("{}", serde_json::to_string_pretty(&value).expect("json"));
    } else {
        println!("T = {t}, L = {l}, makespan = {}", report.makespan);
        for item in &report.items {
            let tag = match item.status {
                Status::Pass => "ok  ",
                Status::Note => "note",
                Status::Fail => "FAIL",
            };
            println!("{tag} {:<17} {}", item.name, item.detail);
        }
    }
    if report.failed() {
        return Err(Exit(EXIT_VIOLATION, "assignment violates a certified invariant".into()));
    }
    Ok(())
}

fn bench_cmd(args: BenchArgs) -> Result<(), Exit> {
    let inputs = bench::load_dir(&args.dir).map_err(Exit::failure)?;
    let modes: Vec<Mode> = args.modes.iter().map(|&m| m.into()).collect();
    let rows: Vec<Row> = bench::run(&inputs, &modes);
    let mut csv = Vec::new();
    report::write_csv(&mut csv, &rows).map_err(Exit::failure)?;
    write(args.out.as_deref(), &String::from_utf8(csv).expect("csv is utf-8"))?;
    if let Some(path) = &args.json {
        write(Some(path), &report::to_json(&rows))?;
    }
    let summary = report::summarize(&rows);
    if summary.violations > 0 {
        return Err(Exit(
            EXIT_VIOLATION,
            format!("{} rows exceed their certified bound", summary.violations),
        ));
    }
    Ok(())
}

fn gen_cmd(args: GenArgs) -> Result<(), Exit> {
    let spec = GeneratorSpec {
        m: args.m,
        n: args.n,
        pmax: args.pmax,
        k: args.k,
        seed: args.seed.unwrap_or_else(|| seed_from_env(DEFAULT_SEED)),
        restricted: args.restricted,
    };
    let inst = generate(&spec).map_err(Exit::failure)?;
    write(args.out.as_deref(), &emit_instance(&inst))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => gen_cmd(a),
        Command::Solve(Solve::General(a)) => solve_general(a),
        Command::Solve(Solve::Restricted(a)) => solve_restricted_cmd(a),
        Command::Oracle(a) => oracle_cmd(a),
        Command::Check(a) => check_cmd(a),
        Command::Bench(a) => bench_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Exit(code, msg)) => {
            eprintln!("tightspan: {msg}");
            ExitCode::from(code)
        }
    }
}

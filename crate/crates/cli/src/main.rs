//! `fracscale` command-line front end.
//!
//! Exit status: 0 on success, 2 for usage errors (bad flags, unknown problem,
//! inconsistent step sizes), 1 when a solver fails at run time.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fracscale::analysis::L1Convention;
use fracscale::experiments::{execute, report_file, reproduce, Method, RunSpec, TableId, TableOptions};
use fracscale::fast::{SchemeKind, DEFAULT_SHOOTING_TOL};
use fracscale::io::{DataFile, Format};
use fracscale::multiscale::{Averaging, CellTime};
use fracscale::Error;

const EXIT_RUNTIME: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "fracscale", version, about = "Direct and multiscale solvers for fast/slow fractional systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one catalog problem.
    Run(RunArgs),
    /// Rerun a published table and compare with the reference values.
    ReproduceTable(TableArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// example1 .. example4
    #[arg(long)]
    problem: String,
    /// direct | multiscale
    #[arg(long, value_parser = parse_text::<Method>)]
    method: Method,
    #[arg(long, value_parser = parse_real)]
    alpha: Option<f64>,
    #[arg(long, value_parser = parse_real)]
    eps: Option<f64>,
    #[arg(long, value_parser = parse_real)]
    horizon: Option<f64>,
    /// Micro step, e.g. 0.01 or 1/100
    #[arg(long, value_parser = parse_real)]
    dt: f64,
    /// Macro step (multiscale only)
    #[arg(long = "dT", value_parser = parse_real)]
    macro_dt: Option<f64>,
    /// Shooting tolerance
    #[arg(long, value_parser = parse_real, default_value_t = DEFAULT_SHOOTING_TOL)]
    tol: f64,
    /// explicit | implicit
    #[arg(long, value_parser = parse_text::<SchemeKind>, default_value = "implicit")]
    scheme: SchemeKind,
    /// Output directory; without it the report goes to stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv | json
    #[arg(long, value_parser = parse_text::<Format>, default_value = "csv")]
    format: Format,
    /// keep | discard
    #[arg(long, value_parser = ["keep", "discard"], default_value = "keep")]
    cells: String,
    /// mean | trapezoid
    #[arg(long, value_parser = parse_text::<Averaging>, default_value = "mean")]
    avg: Averaging,
    /// mean | integral
    #[arg(long, value_parser = parse_text::<L1Convention>, default_value = "mean")]
    l1: L1Convention,
    /// frozen | local (default: the problem's own convention)
    #[arg(long, value_parser = parse_text::<CellTime>)]
    cell_time: Option<CellTime>,
    /// Record every n-th micro step of a direct run
    #[arg(long, default_value_t = fracscale::direct::DEFAULT_RECORD_STRIDE)]
    stride: usize,
}

#[derive(Args, Debug)]
struct TableArgs {
    /// table1 | table2 | table3 | table4
    #[arg(value_parser = parse_text::<TableId>)]
    table: TableId,
    /// Output file; without it the table goes to stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = parse_text::<Format>, default_value = "csv")]
    format: Format,
    /// Shorter horizon for the Table 3 and 4 runs
    #[arg(long, value_parser = parse_real)]
    truncate_horizon: Option<f64>,
    #[arg(long, value_parser = parse_text::<L1Convention>, default_value = "mean")]
    l1: L1Convention,
    #[arg(long, value_parser = parse_text::<Averaging>, default_value = "mean")]
    avg: Averaging,
    #[arg(long, value_parser = parse_text::<CellTime>)]
    cell_time: Option<CellTime>,
    #[arg(long, value_parser = parse_real, default_value_t = DEFAULT_SHOOTING_TOL)]
    tol: f64,
}

fn parse_text<T: std::str::FromStr<Err = Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// A decimal number or a fraction `p/q`.
fn parse_real(s: &str) -> Result<f64, String> {
    let x = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| format!("bad numerator in '{s}'"))?;
            let q: f64 = q.trim().parse().map_err(|_| format!("bad denominator in '{s}'"))?;
            p / q
        }
        None => s.trim().parse().map_err(|_| format!("not a number: '{s}'"))?,
    };
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("'{s}' is not a finite number"))
    }
}

/// Usage errors are configuration problems caught before any solving.
fn fail(e: &Error, usage: bool) -> ExitCode {
    eprintln!("error[{}]: {e}", e.class());
    ExitCode::from(if usage { EXIT_USAGE } else { EXIT_RUNTIME })
}

fn emit(file: &DataFile, format: Format, path: Option<&Path>) -> Result<(), Error> {
    match path {
        Some(p) => file.write_atomic(p, format),
        None => {
            print!("{}", file.render(format)?);
            Ok(())
        }
    }
}

fn cmd_run(args: RunArgs) -> ExitCode {
    let mut spec = RunSpec::new(&args.problem, args.method, args.dt);
    spec.overrides.alpha = args.alpha;
    spec.overrides.eps = args.eps;
    spec.overrides.horizon = args.horizon;
    spec.macro_dt = args.macro_dt;
    spec.tol = args.tol;
    spec.scheme = args.scheme;
    spec.cell_time = args.cell_time;
    spec.averaging = args.avg;
    spec.retain_cells = args.cells == "keep";
    spec.l1 = args.l1;
    spec.record_stride = args.stride;

    if let Err(e) = spec.prepare() {
        return fail(&e, true);
    }
    if let Some(dir) = &args.out {
        if dir.exists() && !dir.is_dir() {
            return fail(&Error::InvalidParameter(format!("--out {} is not a directory", dir.display())), true);
        }
    }
    let outcome = match execute(&spec) {
        Ok(o) => o,
        Err(e) => return fail(&e, false),
    };

    let result = (|| -> Result<(), Error> {
        let report = report_file(&outcome)?;
        let Some(dir) = &args.out else {
            return emit(&report, args.format, None);
        };
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        let ext = args.format.extension();
        let mut files: Vec<(&str, DataFile)> = vec![("u", DataFile::trajectory(outcome.meta.clone(), &outcome.u)?)];
        if let Some(v) = &outcome.v {
            files.push(("v", DataFile::trajectory(outcome.meta.clone(), v)?));
        }
        if let Some(r) = &outcome.cell_averages {
            files.push(("averages", DataFile::trajectory(outcome.meta.clone(), r)?));
        }
        files.push(("report", report));
        for (name, file) in &files {
            emit(file, args.format, Some(&dir.join(format!("{name}.{ext}"))))?;
        }
        Ok(())
    })();
    if let Err(e) = result {
        return fail(&e, false);
    }
    let r = &outcome.report;
    let show = |x: Option<f64>| x.map_or("-".to_string(), |x| format!("{x:.6e}"));
    eprintln!(
        "{} {}: l1 {} linf {} steps {} wall {:.3}s",
        spec.problem,
        spec.method,
        show(r.l1_error),
        show(r.linf_error),
        r.steps,
        r.wall_seconds
    );
    ExitCode::SUCCESS
}

fn cmd_table(args: TableArgs) -> ExitCode {
    if let Some(h) = args.truncate_horizon {
        if !(h > 0.0) {
            return fail(&Error::InvalidParameter(format!("--truncate-horizon must be > 0, got {h}")), true);
        }
    }
    if !(args.tol > 0.0) {
        return fail(&Error::InvalidParameter(format!("--tol must be > 0, got {}", args.tol)), true);
    }
    let opts = TableOptions {
        truncate_horizon: args.truncate_horizon,
        l1: args.l1,
        averaging: args.avg,
        cell_time: args.cell_time,
        tol: args.tol,
    };
    let result = reproduce(args.table, &opts);
    for (param, msg) in &result.failures {
        eprintln!("run {param} failed: {msg}");
    }
    let written = result.to_file().and_then(|f| emit(&f, args.format, args.out.as_deref()));
    if let Err(e) = written {
        return fail(&e, false);
    }
    let judged: BTreeMap<bool, usize> = result.rows.iter().filter_map(|r| r.pass).fold(BTreeMap::new(), |mut m, p| {
        *m.entry(p).or_default() += 1;
        m
    });
    eprintln!(
        "{}: {} pass, {} fail, {:.1}s",
        args.table,
        judged.get(&true).unwrap_or(&0),
        judged.get(&false).unwrap_or(&0),
        result.wall_seconds
    );
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::ReproduceTable(args) => cmd_table(args),
    }
}

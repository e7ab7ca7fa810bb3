//! Single runs and the table sweeps behind the CLI.
//!
//! [`execute`] runs one solver on a catalog problem and measures its error
//! against the exact solution when there is one. [`reproduce`] runs a whole
//! table ladder and compares every cell with [`PAPER_VALUES`].

use std::collections::BTreeMap;
use std::time::Instant;

use crate::analysis::{convergence_order, error_norms, error_norms_against, L1Convention, RunReport, Trajectory};
use crate::direct::{direct_solve, DirectConfig, DEFAULT_RECORD_STRIDE};
use crate::error::{Error, Result};
use crate::fast::{SchemeKind, StepScheme, DEFAULT_MAX_CYCLES, DEFAULT_SHOOTING_TOL};
use crate::io::{format_number, parse_cell, DataFile, ARTIFACT_VERSION};
use crate::multiscale::{multiscale_solve, Averaging, CellTime, MacroConfig};
use crate::problems::{by_name, CoupledProblem, Overrides};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Direct,
    Multiscale,
}

kebab_enum_text!(Method { Direct => "direct", Multiscale => "multiscale" });

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub problem: String,
    pub overrides: Overrides,
    pub method: Method,
    pub dt: f64,
    pub macro_dt: Option<f64>,
    pub tol: f64,
    pub scheme: SchemeKind,
    pub cell_time: Option<CellTime>,
    pub averaging: Averaging,
    pub retain_cells: bool,
    pub l1: L1Convention,
    pub record_stride: usize,
}

impl RunSpec {
    pub fn new(problem: &str, method: Method, dt: f64) -> Self {
        Self {
            problem: problem.to_string(),
            overrides: Overrides::default(),
            method,
            dt,
            macro_dt: None,
            tol: DEFAULT_SHOOTING_TOL,
            scheme: SchemeKind::ImplicitEuler,
            cell_time: None,
            averaging: Averaging::Mean,
            retain_cells: true,
            l1: L1Convention::Mean,
            record_stride: DEFAULT_RECORD_STRIDE,
        }
    }

    pub fn multiscale(problem: &str, macro_dt: f64, dt: f64) -> Self {
        Self { macro_dt: Some(macro_dt), ..Self::new(problem, Method::Multiscale, dt) }
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.overrides.horizon = Some(horizon);
        self
    }

    fn step_scheme(&self) -> StepScheme<f64> {
        match self.scheme {
            SchemeKind::ExplicitEuler => StepScheme::explicit(),
            SchemeKind::ImplicitEuler => StepScheme::implicit(),
        }
    }

    /// Builds the problem and checks the configuration without solving.
    pub fn prepare(&self) -> Result<CoupledProblem<f64>> {
        let problem = by_name::<f64>(&self.problem, &self.overrides)?;
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tol must be > 0, got {}", self.tol)));
        }
        match self.method {
            Method::Direct => {
                if self.macro_dt.is_some() {
                    return Err(Error::InvalidParameter("dT only applies to the multiscale method".into()));
                }
                self.direct_config(&problem).steps()?;
            }
            Method::Multiscale => {
                self.macro_config(&problem)?.macro_steps(problem.period())?;
            }
        }
        Ok(problem)
    }

    fn direct_config(&self, problem: &CoupledProblem<f64>) -> DirectConfig<f64> {
        DirectConfig::new(self.dt, problem.horizon)
            .with_scheme(self.step_scheme())
            .with_stride(self.record_stride)
    }

    fn macro_config(&self, problem: &CoupledProblem<f64>) -> Result<MacroConfig<f64>> {
        let dtm = self
            .macro_dt
            .ok_or_else(|| Error::InvalidParameter("the multiscale method needs dT".into()))?;
        let mut cfg = MacroConfig::new(dtm, self.dt, problem.horizon);
        cfg.tol = self.tol;
        cfg.scheme = self.step_scheme();
        cfg.max_cycles = DEFAULT_MAX_CYCLES;
        cfg.cell_time = self.cell_time;
        cfg.averaging = self.averaging;
        cfg.retain_cells = self.retain_cells;
        Ok(cfg)
    }

    /// `key=value` metadata describing this run.
    pub fn metadata(&self, problem: &CoupledProblem<f64>) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("version", ARTIFACT_VERSION.to_string());
        put("problem", problem.name.clone());
        put("method", self.method.to_string());
        put("alpha", format_number(problem.alpha.value()));
        put("eps", format_number(problem.eps));
        put("horizon", format_number(problem.horizon));
        put("dt", format_number(self.dt));
        put("scheme", self.scheme.to_string());
        put("l1", self.l1.to_string());
        match self.method {
            Method::Direct => put("stride", self.record_stride.to_string()),
            Method::Multiscale => {
                put("dT", format_number(self.macro_dt.unwrap_or(f64::NAN)));
                put("tol", format_number(self.tol));
                put("avg", self.averaging.to_string());
                put("cell_time", self.cell_time.unwrap_or(problem.cell_time).to_string());
                put("cells", if self.retain_cells { "keep" } else { "discard" }.to_string());
            }
        }
        m
    }
}

/// Result of [`execute`].
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub meta: BTreeMap<String, String>,
    /// Slow variable on the recorded or macro grid.
    pub u: Trajectory<f64>,
    /// Fast variable; direct runs only.
    pub v: Option<Trajectory<f64>>,
    /// Cell averages `R_0..R_{M-1}` at `T_0..T_{M-1}`; multiscale runs only.
    pub cell_averages: Option<Trajectory<f64>>,
    pub report: RunReport,
}

/// Runs `spec`, attaching error norms when the problem has an exact solution.
pub fn execute(spec: &RunSpec) -> Result<RunOutcome> {
    let problem = spec.prepare()?;
    let meta = spec.metadata(&problem);
    let (u, v, cell_averages, mut report) = match spec.method {
        Method::Direct => {
            let run = direct_solve(&problem, &spec.direct_config(&problem))?;
            (run.u, Some(run.v), None, run.report)
        }
        Method::Multiscale => {
            let (state, report) = multiscale_solve(&problem, &spec.macro_config(&problem)?)?;
            let m = state.cell_averages.len();
            let avgs = Trajectory::new("R", state.times[..m].to_vec(), state.cell_averages.clone())?;
            (state.trajectory()?, None, Some(avgs), report)
        }
    };
    if problem.exact.is_some() {
        let (l1, linf) = error_norms(&u, |t| problem.exact_u(t).unwrap_or(f64::NAN), spec.l1)?;
        report = report.with_errors(l1, linf);
    }
    Ok(RunOutcome { meta, u, v, cell_averages, report })
}

/// Report file: metadata (wall time included) plus `metric,value` rows.
pub fn report_file(outcome: &RunOutcome) -> Result<DataFile> {
    let mut meta = outcome.meta.clone();
    meta.insert("wall_seconds".into(), format_number(outcome.report.wall_seconds));
    let mut file = DataFile::new(meta, &["metric", "value"]);
    let r = &outcome.report;
    let opt = |x: Option<f64>| x.map(format_number).unwrap_or_default();
    file.push_row(vec!["l1_error".into(), opt(r.l1_error)])?;
    file.push_row(vec!["linf_error".into(), opt(r.linf_error)])?;
    file.push_row(vec!["steps".into(), r.steps.to_string()])?;
    file.push_row(vec!["shooting_iters".into(), r.shooting_iters.map(|n| n.to_string()).unwrap_or_default()])?;
    Ok(file)
}

/// Reads a report file back.
pub fn parse_report(file: &DataFile) -> Result<RunReport> {
    let (im, iv) = (file.column("metric")?, file.column("value")?);
    let mut report = RunReport::default();
    let num = |s: &str| -> Result<Option<f64>> { Ok(Some(parse_cell(s)?).filter(|x| !x.is_nan())) };
    for row in &file.rows {
        let cell = row[iv].as_str();
        match row[im].as_str() {
            "l1_error" => report.l1_error = num(cell)?,
            "linf_error" => report.linf_error = num(cell)?,
            "steps" => report.steps = cell.parse().map_err(|_| Error::Parse(format!("bad steps '{cell}'")))?,
            "shooting_iters" => {
                report.shooting_iters =
                    if cell.is_empty() { None } else { Some(cell.parse().map_err(|_| Error::Parse(cell.into()))?) }
            }
            other => return Err(Error::Parse(format!("unknown report metric '{other}'"))),
        }
    }
    if let Some(w) = file.meta.get("wall_seconds") {
        report.wall_seconds = parse_cell(w)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableId {
    Table1,
    Table2,
    Table3,
    Table4,
}

kebab_enum_text!(TableId { Table1 => "table1", Table2 => "table2", Table3 => "table3", Table4 => "table4" });

/// How a computed value is judged against its reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    /// `|x - p| <= r |p|`
    Relative(f64),
    /// `|x - p| <= a`
    Absolute(f64),
    /// `p / k <= x <= k p`
    Factor(f64),
}

impl Tolerance {
    pub fn accepts(self, value: f64, reference: f64) -> bool {
        if !value.is_finite() {
            return false;
        }
        match self {
            Tolerance::Relative(r) => (value - reference).abs() <= r * reference.abs(),
            Tolerance::Absolute(a) => (value - reference).abs() <= a,
            Tolerance::Factor(k) => value >= reference / k && value <= reference * k,
        }
    }
}

pub const NORM_TOL: Tolerance = Tolerance::Relative(0.05);
pub const ORDER_TOL: Tolerance = Tolerance::Absolute(0.05);
pub const TABLE2_TOL: Tolerance = Tolerance::Relative(0.01);
/// Largest relative spread of the Table 2 L1 column.
pub const TABLE2_MAX_SPREAD: f64 = 1e-3;
pub const TABLE3_TOL: Tolerance = Tolerance::Relative(0.10);
pub const TABLE4_TOL: Tolerance = Tolerance::Factor(2.0);
/// Table 4 floor: no L-infinity value may fall below half of this.
pub const TABLE4_PLATEAU: f64 = 5e-4;

/// One published number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaperValue {
    pub table: TableId,
    pub param: &'static str,
    pub metric: &'static str,
    pub value: f64,
}

const fn pv(table: TableId, param: &'static str, metric: &'static str, value: f64) -> PaperValue {
    PaperValue { table, param, metric, value }
}

use TableId::{Table1 as T1, Table2 as T2, Table3 as T3, Table4 as T4};

/// Published reference values, transcribed from Tables 1-4.
pub static PAPER_VALUES: &[PaperValue] = &[
    // Table 1: example2, dt = 1/100
    pv(T1, "dT=20", "l1", 7.0964),
    pv(T1, "dT=20", "linf", 14.2370),
    pv(T1, "dT=10", "l1", 3.5567),
    pv(T1, "dT=10", "l1_order", 0.9965),
    pv(T1, "dT=10", "linf", 7.1271),
    pv(T1, "dT=10", "linf_order", 0.9983),
    pv(T1, "dT=5", "l1", 1.7811),
    pv(T1, "dT=5", "l1_order", 0.9978),
    pv(T1, "dT=5", "linf", 3.5666),
    pv(T1, "dT=5", "linf_order", 0.9988),
    pv(T1, "dT=2", "l1", 0.7133),
    pv(T1, "dT=2", "l1_order", 0.9987),
    pv(T1, "dT=2", "linf", 1.4276),
    pv(T1, "dT=2", "linf_order", 0.9993),
    pv(T1, "dT=1", "l1", 0.3568),
    pv(T1, "dT=1", "l1_order", 0.9994),
    pv(T1, "dT=1", "linf", 0.7139),
    pv(T1, "dT=1", "linf_order", 0.9998),
    // Table 2: example2, dT = 1
    pv(T2, "dt=1/16", "l1", 0.3568),
    pv(T2, "dt=1/16", "linf", 0.7141),
    pv(T2, "dt=1/32", "l1", 0.3568),
    pv(T2, "dt=1/32", "linf", 0.7140),
    pv(T2, "dt=1/64", "l1", 0.3568),
    pv(T2, "dt=1/64", "linf", 0.7140),
    pv(T2, "dt=1/128", "l1", 0.3568),
    pv(T2, "dt=1/128", "linf", 0.7139),
    // Table 3: example3
    pv(T3, "direct", "l1", 1.61e-3),
    pv(T3, "direct", "linf", 5.50e-3),
    pv(T3, "dT=10", "l1", 1.20e-2),
    pv(T3, "dT=10", "linf", 2.33e-2),
    pv(T3, "dT=5", "l1", 1.18e-2),
    pv(T3, "dT=5", "linf", 2.31e-2),
    pv(T3, "dT=2", "l1", 1.17e-2),
    pv(T3, "dT=2", "linf", 2.30e-2),
    pv(T3, "dT=1", "l1", 1.17e-2),
    pv(T3, "dT=1", "linf", 2.30e-2),
    // Table 4: example4, multiscale vs fully resolved
    pv(T4, "dT=100", "l1", 1.893e-4),
    pv(T4, "dT=100", "linf", 5.720e-4),
    pv(T4, "dT=50", "l1", 2.275e-4),
    pv(T4, "dT=50", "linf", 6.012e-4),
    pv(T4, "dT=10", "l1", 2.598e-4),
    pv(T4, "dT=10", "linf", 6.249e-4),
    pv(T4, "dT=5", "l1", 2.640e-4),
    pv(T4, "dT=5", "linf", 6.279e-4),
];

pub fn paper_value(table: TableId, param: &str, metric: &str) -> Option<f64> {
    PAPER_VALUES
        .iter()
        .find(|p| p.table == table && p.param == param && p.metric == metric)
        .map(|p| p.value)
}

/// One cell of a reproduced table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub param: String,
    pub metric: String,
    /// `None` when the run failed.
    pub value: Option<f64>,
    pub paper_value: Option<f64>,
    /// `None` for informational rows.
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableOptions {
    /// Shortens the horizon of Tables 3 and 4 (reference values then no
    /// longer apply, but the rows are still compared).
    pub truncate_horizon: Option<f64>,
    pub l1: L1Convention,
    pub averaging: Averaging,
    pub cell_time: Option<CellTime>,
    pub tol: f64,
}

impl Default for TableOptions {
    fn default() -> Self {
        Self {
            truncate_horizon: None,
            l1: L1Convention::Mean,
            averaging: Averaging::Mean,
            cell_time: None,
            tol: DEFAULT_SHOOTING_TOL,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TableResult {
    pub table: TableId,
    pub meta: BTreeMap<String, String>,
    pub rows: Vec<TableRow>,
    /// Runs that errored, as `(param, message)`.
    pub failures: Vec<(String, String)>,
    pub wall_seconds: f64,
}

impl TableResult {
    pub fn row(&self, param: &str, metric: &str) -> Option<&TableRow> {
        self.rows.iter().find(|r| r.param == param && r.metric == metric)
    }

    pub fn value(&self, param: &str, metric: &str) -> Option<f64> {
        self.row(param, metric).and_then(|r| r.value)
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass != Some(false))
    }

    pub fn to_file(&self) -> Result<DataFile> {
        let mut meta = self.meta.clone();
        meta.insert("wall_seconds".into(), format_number(self.wall_seconds));
        let mut file = DataFile::new(meta, &["param", "metric", "value", "paper_value", "pass"]);
        let opt = |x: Option<f64>| x.map(format_number).unwrap_or_default();
        for r in &self.rows {
            file.push_row(vec![
                r.param.clone(),
                r.metric.clone(),
                opt(r.value),
                opt(r.paper_value),
                r.pass.map(|p| p.to_string()).unwrap_or_default(),
            ])?;
        }
        Ok(file)
    }
}

/// Reads the rows of a table file back.
pub fn parse_table(file: &DataFile) -> Result<Vec<TableRow>> {
    let cols = ["param", "metric", "value", "paper_value", "pass"].map(|c| file.column(c));
    let [ip, im, iv, ipv, ipass] = cols;
    let (ip, im, iv, ipv, ipass) = (ip?, im?, iv?, ipv?, ipass?);
    let num = |s: &str| -> Result<Option<f64>> { Ok(Some(parse_cell(s)?).filter(|x| !x.is_nan())) };
    file.rows
        .iter()
        .map(|row| {
            let pass = match row[ipass].as_str() {
                "" => None,
                "true" => Some(true),
                "false" => Some(false),
                other => return Err(Error::Parse(format!("bad pass cell '{other}'"))),
            };
            Ok(TableRow {
                param: row[ip].clone(),
                metric: row[im].clone(),
                value: num(&row[iv])?,
                paper_value: num(&row[ipv])?,
                pass,
            })
        })
        .collect()
}

struct Sweep {
    table: TableId,
    rows: Vec<TableRow>,
    failures: Vec<(String, String)>,
}

impl Sweep {
    fn push(&mut self, param: &str, metric: &str, value: Option<f64>, tol: Option<Tolerance>) {
        let paper = paper_value(self.table, param, metric);
        let pass = match (tol, paper) {
            (Some(tol), Some(p)) => Some(value.is_some_and(|x| tol.accepts(x, p))),
            _ => None,
        };
        self.rows.push(TableRow { param: param.into(), metric: metric.into(), value, paper_value: paper, pass });
    }

    fn push_judged(&mut self, param: &str, metric: &str, value: Option<f64>, pass: bool) {
        let paper = paper_value(self.table, param, metric);
        self.rows.push(TableRow { param: param.into(), metric: metric.into(), value, paper_value: paper, pass: Some(pass) });
    }

    /// Runs `spec`; a failed run is recorded and yields `None`.
    fn run(&mut self, param: &str, spec: &RunSpec) -> Option<RunOutcome> {
        match execute(spec) {
            Ok(o) => Some(o),
            Err(e) => {
                self.failures.push((param.to_string(), format!("{}: {e}", e.class())));
                None
            }
        }
    }

    /// L1 and L-infinity rows plus orders between consecutive ladder rungs.
    fn ladder(&mut self, rungs: &[(f64, String, Option<RunOutcome>)], norm_tol: Tolerance, with_orders: bool) {
        let mut prev: Option<(f64, Option<f64>, Option<f64>)> = None;
        let (mut pairs_l1, mut pairs_linf) = (Vec::new(), Vec::new());
        for (h, param, out) in rungs {
            let (l1, linf) = out.as_ref().map_or((None, None), |o| (o.report.l1_error, o.report.linf_error));
            let order = |e0: Option<f64>, e1: Option<f64>| {
                let (h0, _, _) = prev?;
                Some((e0? / e1?).ln() / (h0 / h).ln())
            };
            self.push(param, "l1", l1, Some(norm_tol));
            if with_orders && prev.is_some() {
                self.push(param, "l1_order", order(prev.and_then(|p| p.1), l1), Some(ORDER_TOL));
            }
            self.push(param, "linf", linf, Some(norm_tol));
            if with_orders && prev.is_some() {
                self.push(param, "linf_order", order(prev.and_then(|p| p.2), linf), Some(ORDER_TOL));
            }
            prev = Some((*h, l1, linf));
            if let (Some(a), Some(b)) = (l1, linf) {
                pairs_l1.push((*h, a));
                pairs_linf.push((*h, b));
            }
        }
        if with_orders {
            for (metric, pairs) in [("l1_order_lsq", &pairs_l1), ("linf_order_lsq", &pairs_linf)] {
                let fit = convergence_order(pairs).ok().map(|f| f.least_squares);
                let ok = pairs.len() == rungs.len() && fit.is_some_and(|o| ORDER_TOL.accepts(o, 1.0));
                self.push_judged("all", metric, fit, ok);
            }
        }
    }
}

fn dt_label(denominator: u32) -> String {
    format!("dt=1/{denominator}")
}

fn dtm_label(dtm: f64) -> String {
    format!("dT={}", format_number(dtm))
}

/// Runs the sweep behind one published table.
pub fn reproduce(table: TableId, opts: &TableOptions) -> TableResult {
    let started = Instant::now();
    let mut sweep = Sweep { table, rows: Vec::new(), failures: Vec::new() };
    let mut meta = BTreeMap::new();
    meta.insert("version".to_string(), ARTIFACT_VERSION.to_string());
    meta.insert("table".to_string(), table.to_string());
    meta.insert("l1".to_string(), opts.l1.to_string());
    meta.insert("avg".to_string(), opts.averaging.to_string());
    meta.insert("tol".to_string(), format_number(opts.tol));
    if let Some(ct) = opts.cell_time {
        meta.insert("cell_time".to_string(), ct.to_string());
    }

    let ms_spec = |problem: &str, dtm: f64, dt: f64| {
        let mut s = RunSpec::multiscale(problem, dtm, dt);
        s.tol = opts.tol;
        s.averaging = opts.averaging;
        s.cell_time = opts.cell_time;
        s.l1 = opts.l1;
        s.retain_cells = false;
        if let Some(h) = opts.truncate_horizon {
            if matches!(table, TableId::Table3 | TableId::Table4) {
                s.overrides.horizon = Some(h);
            }
        }
        s
    };
    let direct_spec = |problem: &str| {
        let mut s = RunSpec::new(problem, Method::Direct, 1.0 / 32.0);
        s.l1 = opts.l1;
        s.overrides.horizon = opts.truncate_horizon;
        s
    };
    if let (Some(h), TableId::Table3 | TableId::Table4) = (opts.truncate_horizon, table) {
        meta.insert("truncated_horizon".to_string(), format_number(h));
    }

    match table {
        TableId::Table1 => {
            meta.insert("problem".into(), "example2".into());
            meta.insert("dt".into(), format_number(0.01));
            let rungs: Vec<_> = [20.0, 10.0, 5.0, 2.0, 1.0]
                .into_iter()
                .map(|dtm| {
                    let p = dtm_label(dtm);
                    let out = sweep.run(&p, &ms_spec("example2", dtm, 0.01));
                    (dtm, p, out)
                })
                .collect();
            sweep.ladder(&rungs, NORM_TOL, true);
        }
        TableId::Table2 => {
            meta.insert("problem".into(), "example2".into());
            meta.insert("dT".into(), "1".into());
            let mut l1s = Vec::new();
            for den in [16u32, 32, 64, 128] {
                let p = dt_label(den);
                let out = sweep.run(&p, &ms_spec("example2", 1.0, 1.0 / den as f64));
                let (l1, linf) = out.map_or((None, None), |o| (o.report.l1_error, o.report.linf_error));
                sweep.push(&p, "l1", l1, Some(TABLE2_TOL));
                sweep.push(&p, "linf", linf, Some(TABLE2_TOL));
                l1s.push(l1);
            }
            let vals: Vec<f64> = l1s.iter().flatten().copied().collect();
            let spread = (vals.len() == l1s.len()).then(|| {
                let (lo, hi) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
                (hi - lo) / (vals.iter().sum::<f64>() / vals.len() as f64)
            });
            sweep.push_judged("all", "l1_spread", spread, spread.is_some_and(|s| s < TABLE2_MAX_SPREAD));
        }
        TableId::Table3 => {
            meta.insert("problem".into(), "example3".into());
            let out = sweep.run("direct", &direct_spec("example3"));
            let (l1, linf) = out.map_or((None, None), |o| (o.report.l1_error, o.report.linf_error));
            sweep.push("direct", "l1", l1, Some(TABLE3_TOL));
            sweep.push("direct", "linf", linf, Some(TABLE3_TOL));
            let rungs: Vec<_> = [10.0, 5.0, 2.0, 1.0]
                .into_iter()
                .map(|dtm| {
                    let p = dtm_label(dtm);
                    let out = sweep.run(&p, &ms_spec("example3", dtm, 0.01));
                    (dtm, p, out)
                })
                .collect();
            sweep.ladder(&rungs, TABLE3_TOL, false);
        }
        TableId::Table4 => {
            meta.insert("problem".into(), "example4".into());
            let reference = sweep.run("direct", &direct_spec("example4"));
            let mut linfs = Vec::new();
            for dtm in [100.0, 50.0, 10.0, 5.0] {
                let p = dtm_label(dtm);
                let errs = match (&reference, sweep.run(&p, &ms_spec("example4", dtm, 0.01))) {
                    (Some(r), Some(o)) => match error_norms_against(&o.u, &r.u, opts.l1) {
                        Ok(e) => Some(e),
                        Err(e) => {
                            sweep.failures.push((p.clone(), format!("{}: {e}", e.class())));
                            None
                        }
                    },
                    _ => None,
                };
                sweep.push(&p, "l1", errs.map(|e| e.0), Some(TABLE4_TOL));
                sweep.push(&p, "linf", errs.map(|e| e.1), Some(TABLE4_TOL));
                linfs.push(errs.map(|e| e.1));
            }
            let all: Vec<f64> = linfs.iter().flatten().copied().collect();
            let floor = (all.len() == linfs.len()).then(|| all.iter().copied().fold(f64::INFINITY, f64::min));
            let ok = floor.is_some_and(|f| f >= TABLE4_PLATEAU / 2.0);
            sweep.rows.push(TableRow {
                param: "all".into(),
                metric: "linf_floor".into(),
                value: floor,
                paper_value: Some(TABLE4_PLATEAU),
                pass: Some(ok),
            });
        }
    }

    TableResult {
        table,
        meta,
        rows: sweep.rows,
        failures: sweep.failures,
        wall_seconds: started.elapsed().as_secs_f64(),
    }
}

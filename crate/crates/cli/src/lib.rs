//! Commands behind the `qnlb` binary. Each `cmd_*` returns data; printing
//! and exit codes live in `main.rs`.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use anyhow::Context;
use clap::ValueEnum;
use qnlb_core::certificates::{self, VerificationReport};
use qnlb_core::protocols::{self, ParityBranch, ProtocolBranch};
use qnlb_core::sdp::{self, GramProgram, ProgramExport};
use qnlb_core::solver::{self, SolveResult, SolveSettings};
use qnlb_core::BoxParam;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

/// Significant digits of every number written to JSON or CSV.
pub const SIG_DIGITS: usize = 10;

/// Largest n for which dual certificates exist.
pub const MAX_CERTIFIED_COPIES: usize = 3;

/// Largest n accepted by `value` and `curve`; the closed forms are exact
/// at any n, this only bounds the brute-force cross-checks downstream.
pub const MAX_VALUE_COPIES: usize = 1 << 16;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments; exit status 2.
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Other(#[from] anyhow::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(CliError::Usage(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Nlb,
    Qnlb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum Protocol {
    #[serde(rename = "parity")]
    #[value(name = "parity")]
    Parity,
    #[serde(rename = "protocolP")]
    #[value(name = "protocolP")]
    ProtocolP,
}

/// Rounds to [`SIG_DIGITS`] significant digits. Non-finite values pass
/// through.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIG_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Applies [`round_sig`] to every float in a JSON tree.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|x| serde_json::Number::from_f64(round_sig(x)))
            .map_or(Value::Null, Value::Number),
        Value::Array(items) => Value::Array(items.into_iter().map(round_json).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

/// Serializes to one line of JSON with rounded floats.
pub fn to_json_line<T: Serialize>(value: &T) -> anyhow::Result<String> {
    Ok(serde_json::to_string(&round_json(serde_json::to_value(value)?))?)
}

fn parse_param(p: f64) -> Result<BoxParam> {
    BoxParam::new(p).or_else(|_| usage(format!("--p must lie in [0, 1], got {p}")))
}

fn check_copies(n: usize, max: usize) -> Result<()> {
    if n == 0 || n > max {
        return usage(format!("--n must lie in 1..={max}, got {n}"));
    }
    Ok(())
}

fn zero_caveat() -> String {
    format!(
        "protocol P is undefined at p = 0: the tabulated value is 2, the limit as p -> 0+ is {:.10}",
        protocols::protocol_p_limit_at_zero()
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueRecord {
    pub model: Model,
    pub protocol: Protocol,
    pub p: f64,
    pub n: usize,
    pub value: f64,
    pub branch: String,
}

/// Value of `protocol` on `n` copies of the `model` box at `p`. Parity on a
/// qNLB measures it in the computational basis, which yields the NLB, so it
/// has the same value.
pub fn cmd_value(model: Model, protocol: Protocol, p: f64, n: usize) -> Result<ValueRecord> {
    let param = parse_param(p)?;
    check_copies(n, MAX_VALUE_COPIES)?;
    let (value, branch) = match (model, protocol) {
        (Model::Nlb, Protocol::ProtocolP) => {
            return usage("protocolP measures quantum boxes; use --model qnlb or --protocol parity")
        }
        (Model::Qnlb, Protocol::ProtocolP) => {
            if p == 0.0 {
                return usage(zero_caveat());
            }
            let v = protocols::protocol_p_value_closed(n, param).map_err(anyhow::Error::from)?;
            (v, ProtocolBranch::of(param).label())
        }
        (_, Protocol::Parity) => {
            let v = protocols::parity_value_closed(n, param).map_err(anyhow::Error::from)?;
            (v, ParityBranch::of(param).label())
        }
    };
    Ok(ValueRecord {
        model,
        protocol,
        p,
        n,
        value,
        branch: branch.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub range: String,
    pub distill: String,
    pub formula: String,
    /// Representative parameter the spot values are evaluated at.
    pub p: f64,
    /// Values for n = 1, 2, 3.
    pub values: Vec<f64>,
    /// Value as n → ∞.
    pub limit: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub caveat: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub title: String,
    pub rows: Vec<TableRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tables {
    pub nlb: Table,
    pub qnlb: Table,
}

fn spot_values(p: f64, f: impl Fn(usize, BoxParam) -> f64) -> Vec<f64> {
    let param = BoxParam::new(p).expect("representative p lies in [0, 1]");
    (1..=3).map(|n| f(n, param)).collect()
}

fn parity(n: usize, param: BoxParam) -> f64 {
    protocols::parity_value_closed(n, param).expect("n >= 1")
}

fn protocol_p(n: usize, param: BoxParam) -> f64 {
    protocols::protocol_p_value_closed(n, param).expect("p > 0 and n >= 1")
}

fn row(range: &str, distill: &str, formula: &str, p: f64, values: Vec<f64>, limit: f64) -> TableRow {
    TableRow {
        range: range.into(),
        distill: distill.into(),
        formula: formula.into(),
        p,
        values,
        limit,
        caveat: None,
    }
}

/// Both distillation summary tables with spot values at representative p.
pub fn cmd_tables() -> Tables {
    let nlb = Table {
        title: "correlated NLB, parity protocol".into(),
        rows: vec![
            row("p=0", "no", "2", 0.0, spot_values(0.0, parity), 2.0),
            row("0<p<1/2", "yes", "3-(q-p)^n", 0.25, spot_values(0.25, parity), 3.0),
            row("1/2<=p<=1", "no", "2(1+p)", 0.75, spot_values(0.75, parity), 3.5),
        ],
    };
    let mut zero = row("p=0", "no", "2", 0.0, vec![2.0; 3], 2.0);
    zero.caveat = Some(zero_caveat());
    let single = |p: f64| protocol_p(1, BoxParam::new(p).expect("p in (0, 1]"));
    let qnlb = Table {
        title: "correlated qNLB, protocol P".into(),
        rows: vec![
            zero,
            row(
                "0<p<1/2",
                "yes",
                "(3+(q-p)^n)cos(phi)+(1-(q-p)^n)/2",
                0.25,
                spot_values(0.25, protocol_p),
                protocols::qnlb_asymptote(),
            ),
            row("p=1/2", "no for n<=3", "(3sqrt(3)+1)/2", 0.5, spot_values(0.5, protocol_p), single(0.5)),
            row(
                "1/2<p<2/3",
                "no for n<=3",
                "3cos(phi)-q*cos(3phi)+p",
                0.6,
                spot_values(0.6, protocol_p),
                single(0.6),
            ),
            row("2/3<=p<1", "no for n<=3", "2(1+p)", 0.8, spot_values(0.8, protocol_p), single(0.8)),
            row("p=1", "no", "4", 1.0, spot_values(1.0, protocol_p), single(1.0)),
        ],
    };
    Tables { nlb, qnlb }
}

fn fmt_num(x: f64) -> String {
    format!("{}", round_sig(x))
}

/// Plain-text rendering of [`cmd_tables`].
pub fn render_tables(tables: &Tables) -> String {
    let mut out = String::new();
    for table in [&tables.nlb, &tables.qnlb] {
        out.push_str(&table.title);
        out.push('\n');
        out.push_str(&format!(
            "{:<12} {:<12} {:<36} {:>5} {:>12} {:>12} {:>12} {:>12}\n",
            "range", "distill?", "value", "p", "n=1", "n=2", "n=3", "n->inf"
        ));
        for r in &table.rows {
            out.push_str(&format!(
                "{:<12} {:<12} {:<36} {:>5} {:>12} {:>12} {:>12} {:>12}\n",
                r.range,
                r.distill,
                r.formula,
                fmt_num(r.p),
                fmt_num(r.values[0]),
                fmt_num(r.values[1]),
                fmt_num(r.values[2]),
                fmt_num(r.limit),
            ));
            if let Some(c) = &r.caveat {
                out.push_str(&format!("  note: {c}\n"));
            }
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub p: f64,
    pub n: usize,
    pub qnlb_value: f64,
    pub nlb_value: f64,
}

/// Both protocol values at p = i/grid for i = 1..=grid, ascending.
pub fn curve_points(n: usize, grid: usize) -> Result<Vec<CurvePoint>> {
    check_copies(n, MAX_VALUE_COPIES)?;
    if grid < 2 {
        return usage(format!("--grid must be at least 2, got {grid}"));
    }
    Ok((1..=grid)
        .into_par_iter()
        .map(|i| {
            let p = i as f64 / grid as f64;
            let param = BoxParam::new(p).expect("i <= grid");
            CurvePoint {
                p,
                n,
                qnlb_value: protocol_p(n, param),
                nlb_value: parity(n, param),
            }
        })
        .collect())
}

/// Writes the curve as CSV with header `p,n,qnlb_value,nlb_value`.
pub fn write_curve_csv<W: Write>(points: &[CurvePoint], out: W) -> anyhow::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    for pt in points {
        w.serialize(CurvePoint {
            p: round_sig(pt.p),
            n: pt.n,
            qnlb_value: round_sig(pt.qnlb_value),
            nlb_value: round_sig(pt.nlb_value),
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_curve(n: usize, grid: usize, out: &Path) -> Result<Vec<CurvePoint>> {
    let points = curve_points(n, grid)?;
    let file = File::create(out).with_context(|| format!("cannot write {}", out.display()))?;
    write_curve_csv(&points, file)?;
    Ok(points)
}

/// Parameters for `certify`: `default` (0.05 to 0.95 in steps of 0.05,
/// plus 2/3) or `start:stop:step`, all inside (0, 1].
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let mut points: Vec<f64> = if spec == "default" {
        let mut g: Vec<f64> = (1..=19).map(|i| i as f64 * 0.05).collect();
        g.push(2.0 / 3.0);
        g
    } else {
        let parts: Vec<&str> = spec.split(':').collect();
        let nums: Vec<f64> = match parts.iter().map(|s| s.trim().parse::<f64>()).collect() {
            Ok(v) if parts.len() == 3 => v,
            _ => return usage(format!("grid must be `default` or start:stop:step, got {spec:?}")),
        };
        let (start, stop, step) = (nums[0], nums[1], nums[2]);
        if !(start > 0.0 && stop <= 1.0 && start <= stop && step > 0.0) {
            return usage(format!("grid needs 0 < start <= stop <= 1 and step > 0, got {spec:?}"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        (0..=count).map(|i| start + i as f64 * step).collect()
    };
    points.sort_by(f64::total_cmp);
    points.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    Ok(points)
}

/// One report per point, in the order given.
pub fn cmd_certify(n: usize, points: &[f64]) -> Result<Vec<VerificationReport>> {
    if !(1..=MAX_CERTIFIED_COPIES).contains(&n) {
        return usage(format!(
            "dual certificates exist only for n = 1, 2, 3; n = {n} is unsupported"
        ));
    }
    let params = points
        .iter()
        .map(|&p| {
            if p <= 0.0 {
                usage(format!("certify needs 0 < p <= 1, got {p}"))
            } else {
                parse_param(p)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(params.par_iter().map(|&param| certificates::verify_optimality(n, param)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub seed: u64,
    pub max_iterations: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        let d = SolveSettings::default();
        Self {
            tol: d.objective_tolerance,
            seed: d.seed,
            max_iterations: d.max_iterations,
        }
    }
}

impl SolveOptions {
    /// `tol` bounds the objective change; feasibility is held ten times
    /// tighter, matching the solver defaults.
    pub fn settings(&self) -> Result<SolveSettings> {
        if self.tol.is_nan() || self.tol <= 0.0 {
            return usage(format!("--tol must be positive, got {}", self.tol));
        }
        let s = SolveSettings {
            max_iterations: self.max_iterations,
            objective_tolerance: self.tol,
            feasibility_tolerance: self.tol / 10.0,
            seed: self.seed,
            ..SolveSettings::default()
        };
        s.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(s)
    }
}

fn check_program_copies(n: usize) -> Result<()> {
    check_copies(n, sdp::MAX_PROGRAM_COPIES)
}

pub fn cmd_solve(n: usize, p: f64, opts: &SolveOptions) -> Result<SolveResult> {
    check_program_copies(n)?;
    let param = parse_param(p)?;
    let program = sdp::build_program(n, param).map_err(anyhow::Error::from)?;
    solve_program(&program, opts)
}

/// Solves a program previously written by [`cmd_export`].
pub fn cmd_solve_file(path: &Path, opts: &SolveOptions) -> Result<SolveResult> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let export: ProgramExport =
        serde_json::from_str(&text).with_context(|| format!("{} is not an exported program", path.display()))?;
    let program = GramProgram::from_export(&export, 1e-9).map_err(anyhow::Error::from)?;
    solve_program(&program, opts)
}

fn solve_program(program: &GramProgram, opts: &SolveOptions) -> Result<SolveResult> {
    let settings = opts.settings()?;
    Ok(solver::solve_primal(program, &settings).map_err(anyhow::Error::from)?)
}

/// The n-copy program at p, in the interchange format.
pub fn cmd_export(n: usize, p: f64) -> Result<ProgramExport> {
    check_program_copies(n)?;
    let param = parse_param(p)?;
    Ok(sdp::build_program(n, param).map_err(anyhow::Error::from)?.export())
}

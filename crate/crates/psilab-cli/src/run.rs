//! Command implementations. Each resolves what it consumed into an Echo
//! and renders its payload; exit-code policy stays in main.

use std::fs;
use std::path::{Path, PathBuf};

use psilab::checks::run_suite;
use psilab::expsum::{build_grid, build_smoothed_grid, default_grid_size, r_truncated_quadrature};
use psilab::kernels::{smoothing_kernel, SmoothingPart};
use psilab::mangoldt::{build_mangoldt_table, MangoldtTable};
use psilab::models::{
    admissible_ranges, envelope_e, envelope_e_tilde, envelope_r_ab, j_main_term, r_main_term,
    theorem1_report, theorem2_report, AsymptoticHypothesis, Direction, Mode, ReportInputs,
    ResidualReport,
};
use psilab::paircorr::{compute_f, f_main_term, f_residual, load_zeros, FMethod};
use psilab::variance::{
    compute_j, compute_j_tilde, j_tilde_via_laplace, laplace_reach, lemma3_residual,
    smoothed_reach, Lemma3Mode, VarianceMethod, VarianceResult,
};
use psilab::Error;
use serde_json::{json, Map, Value};

use crate::config::Echo;
use crate::report::{Body, Format};

pub struct Globals {
    pub format: Format,
    pub out: Option<PathBuf>,
    pub cache_dir: PathBuf,
    pub tail_eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModeArg {
    UnconditionalSmallH,
    UnconditionalLargeH,
    Rh,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::UnconditionalSmallH => Mode::UnconditionalSmallH,
            ModeArg::UnconditionalLargeH => Mode::UnconditionalLargeH,
            ModeArg::Rh => Mode::Rh,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum VarianceOp {
    /// Variance against its predicted main term and envelope.
    Report,
    /// The window variance alone.
    J,
    /// Its exponentially weighted version, by direct sweep.
    JTilde,
    /// The weighted version through the cumulative transform.
    Laplace,
    /// Window-kernel moment against the plain variance.
    Lemma3,
    /// The same comparison on smoothed coefficients.
    Lemma3Smoothed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FMethodArg {
    Naive,
    Integral,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Axis {
    X,
    H,
    Xi,
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::UnconditionalSmallH => "unconditional-small-h",
        Mode::UnconditionalLargeH => "unconditional-large-h",
        Mode::Rh => "rh",
    }
}

fn op_name(op: VarianceOp) -> &'static str {
    match op {
        VarianceOp::Report => "report",
        VarianceOp::J => "j",
        VarianceOp::JTilde => "j-tilde",
        VarianceOp::Laplace => "laplace",
        VarianceOp::Lemma3 => "lemma3",
        VarianceOp::Lemma3Smoothed => "lemma3-smoothed",
    }
}

fn fmethod_name(m: FMethodArg) -> &'static str {
    match m {
        FMethodArg::Naive => "naive",
        FMethodArg::Integral => "integral",
        FMethodArg::Both => "both",
    }
}

fn axis_name(a: Axis) -> &'static str {
    match a {
        Axis::X => "x",
        Axis::H => "h",
        Axis::Xi => "xi",
    }
}

fn method_name(m: VarianceMethod) -> &'static str {
    match m {
        VarianceMethod::EventSweep => "event_sweep",
        VarianceMethod::Laplace => "laplace",
        VarianceMethod::WeightedK => "weighted_k",
        VarianceMethod::WeightedU => "weighted_u",
    }
}

fn base_echo(command: &'static str, g: &Globals, uses_tables: bool) -> Echo {
    let mut echo = Echo::new(command);
    echo.set("format", g.format.name());
    if uses_tables {
        echo.set("cache-dir", g.cache_dir.display());
    }
    if let Some(out) = &g.out {
        echo.set("out", out.display());
    }
    echo
}

fn echo_hyp(echo: &mut Echo, hyp: &AsymptoticHypothesis) {
    echo.set("a", hyp.a);
    echo.set("b", hyp.b);
    echo.set("c", hyp.c);
    echo.set("mode", mode_name(hyp.mode));
}

/// Exact-bound cache hit or a fresh sieve. A cache that exists but will
/// not load is surfaced rather than silently rebuilt.
fn table_at(bound: u64, cache_dir: &Path) -> psilab::Result<MangoldtTable> {
    if cache_dir.join(format!("mangoldt_{bound}.bin")).exists() {
        MangoldtTable::load_cache(bound, cache_dir)
    } else {
        build_mangoldt_table(bound)
    }
}

fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn check_window(x: u64, h: f64) -> psilab::Result<()> {
    if !(1.0 <= h && h <= x as f64) {
        return Err(Error::Parameter(format!(
            "window length must lie in [1, {x}], got {h}"
        )));
    }
    Ok(())
}

fn report_body(r: &ResidualReport) -> Body {
    let mut json = Map::new();
    json.insert(
        "report".to_string(),
        serde_json::to_value(r).expect("report serializes"),
    );
    Body {
        csv: format!("{}\n{}\n", ResidualReport::CSV_HEADER, r.csv_row()),
        json,
    }
}

fn variance_body(r: &VarianceResult) -> Body {
    let mut json = Map::new();
    json.insert(
        "result".to_string(),
        serde_json::to_value(r).expect("result serializes"),
    );
    Body {
        csv: format!(
            "X,h,value,method,breakpoints\n{},{},{},{},{}\n",
            r.x,
            r.h,
            r.value,
            method_name(r.method),
            r.breakpoints_processed
        ),
        json,
    }
}

/// Variance report with the tables it needs: the window sweep reads past
/// X, the grid must stop exactly at X.
fn theorem1_at(
    x: u64,
    h: f64,
    hyp: &AsymptoticHypothesis,
    cache_dir: &Path,
) -> psilab::Result<ResidualReport> {
    check_window(x, h)?;
    let sweep_table = table_at(x + h.ceil() as u64 + 1, cache_dir)?;
    let grid_table = table_at(x, cache_dir)?;
    let grid = build_grid(&grid_table, default_grid_size(x))?;
    theorem1_report(&sweep_table, &grid, x, h, hyp)
}

pub fn sieve_cache(x: u64, g: &Globals) -> psilab::Result<(Echo, Body)> {
    fs::create_dir_all(&g.cache_dir).map_err(|e| Error::Io {
        path: g.cache_dir.clone(),
        source: e,
    })?;
    let table = build_mangoldt_table(x)?;
    let path = table.save_cache(&g.cache_dir)?;
    let psi = table.psi(x as f64)?;
    let mut echo = base_echo("sieve-cache", g, true);
    echo.set("X", x);
    let mut json = Map::new();
    json.insert(
        "cache".to_string(),
        json!({"X": x, "path": path.display().to_string(), "psi_at_X": psi}),
    );
    let body = Body {
        csv: format!("X,path,psi_at_X\n{x},{},{psi}\n", path.display()),
        json,
    };
    Ok((echo, body))
}

pub fn expsum(
    x: u64,
    xi: f64,
    hyp: &AsymptoticHypothesis,
    quadrature_check: bool,
    g: &Globals,
) -> psilab::Result<(Echo, Body)> {
    if !(xi > 0.0 && xi <= 0.5) {
        return Err(Error::Parameter(format!(
            "half-width must lie in (0, 1/2], got {xi}"
        )));
    }
    let table = table_at(x, &g.cache_dir)?;
    let grid = build_grid(&table, default_grid_size(x))?;
    let report = theorem2_report(&grid, x, xi, hyp)?;
    let mut body = report_body(&report);
    if quadrature_check {
        let q = r_truncated_quadrature(&grid, xi)?;
        let gap = rel_gap(report.computed, q);
        body.csv.push_str(&format!(
            "# quadrature_value = {q}\n# quadrature_relative_gap = {gap}\n"
        ));
        body.json.insert(
            "quadrature".to_string(),
            json!({"value": q, "relative_gap": gap}),
        );
    }
    let mut echo = base_echo("expsum", g, true);
    echo.set("X", x);
    echo.set("xi", xi);
    echo_hyp(&mut echo, hyp);
    if quadrature_check {
        echo.set("quadrature-check", true);
    }
    Ok((echo, body))
}

pub fn variance(
    x: u64,
    h: f64,
    op: VarianceOp,
    hyp: &AsymptoticHypothesis,
    g: &Globals,
) -> psilab::Result<(Echo, Body)> {
    check_window(x, h)?;
    let sweep_bound = x + h.ceil() as u64 + 1;
    let body = match op {
        VarianceOp::Report => report_body(&theorem1_at(x, h, hyp, &g.cache_dir)?),
        VarianceOp::J => {
            let table = table_at(sweep_bound, &g.cache_dir)?;
            variance_body(&compute_j(&table, x, h)?)
        }
        VarianceOp::JTilde => {
            let table = table_at(smoothed_reach(x, h, g.tail_eps), &g.cache_dir)?;
            variance_body(&compute_j_tilde(&table, x, h, g.tail_eps)?)
        }
        VarianceOp::Laplace => {
            let table = table_at(laplace_reach(x, h), &g.cache_dir)?;
            let value = j_tilde_via_laplace(&table, x, h)?;
            let mut json = Map::new();
            json.insert(
                "result".to_string(),
                json!({"x": x, "h": h, "value": value, "method": "laplace"}),
            );
            Body {
                csv: format!("X,h,value,method\n{x},{h},{value},laplace\n"),
                json,
            }
        }
        VarianceOp::Lemma3 => {
            let sweep_table = table_at(sweep_bound, &g.cache_dir)?;
            let grid_table = table_at(x, &g.cache_dir)?;
            let grid = build_grid(&grid_table, default_grid_size(x))?;
            report_body(&lemma3_residual(&sweep_table, &grid, x, h, Lemma3Mode::Plain)?)
        }
        VarianceOp::Lemma3Smoothed => {
            // the smoothed counterpart fixes its own tail threshold; the
            // grid must carry coefficients truncated at the same point
            let grid_table = table_at(x, &g.cache_dir)?;
            let grid = build_smoothed_grid(&grid_table, 1e-12)?;
            let sweep_table = table_at(smoothed_reach(x, h, 1e-12), &g.cache_dir)?;
            report_body(&lemma3_residual(
                &sweep_table,
                &grid,
                x,
                h,
                Lemma3Mode::Smoothed,
            )?)
        }
    };
    let mut echo = base_echo("variance", g, true);
    echo.set("X", x);
    echo.set("h", h);
    echo.set("op", op_name(op));
    if op == VarianceOp::Report {
        echo_hyp(&mut echo, hyp);
    }
    if op == VarianceOp::JTilde {
        echo.set("tail-eps", g.tail_eps);
    }
    Ok((echo, body))
}

fn f_envelope(t: f64, hyp: Option<&AsymptoticHypothesis>) -> f64 {
    match hyp {
        Some(h) => t.powf(1.0 - h.a) / t.ln().powf(h.b),
        None => 0.0,
    }
}

pub fn paircorr(
    x: u64,
    t: f64,
    zeros_path: &Path,
    method: FMethodArg,
    a: Option<f64>,
    b: Option<f64>,
    g: &Globals,
) -> psilab::Result<(Echo, Body)> {
    let zeros = load_zeros(zeros_path)?;
    let xf = x as f64;
    // c and the branch are irrelevant to this envelope; only (a, b) count
    let hyp = match (a, b) {
        (None, None) => None,
        _ => Some(AsymptoticHypothesis::new(
            a.unwrap_or(0.0),
            b.unwrap_or(0.0),
            -4.0,
            Mode::Rh,
        )?),
    };
    let body = match method {
        FMethodArg::Naive => report_body(&f_residual(&zeros, xf, t, hyp.as_ref())?),
        FMethodArg::Integral => {
            let value = compute_f(&zeros, xf, t, FMethod::Integral)?;
            let mut inputs = ReportInputs::bare(xf, "T", t);
            if let Some(hh) = &hyp {
                inputs.a = Some(hh.a);
                inputs.b = Some(hh.b);
            }
            report_body(&ResidualReport::new(
                value,
                f_main_term(t),
                f_envelope(t, hyp.as_ref()),
                inputs,
            ))
        }
        FMethodArg::Both => {
            let report = f_residual(&zeros, xf, t, hyp.as_ref())?;
            let integral = compute_f(&zeros, xf, t, FMethod::Integral)?;
            let gap = rel_gap(report.computed, integral);
            let mut body = report_body(&report);
            body.csv.push_str(&format!(
                "# integral_value = {integral}\n# relative_gap = {gap}\n"
            ));
            body.json.insert(
                "integral".to_string(),
                json!({"value": integral, "relative_gap": gap}),
            );
            body
        }
    };
    let mut echo = base_echo("paircorr", g, false);
    echo.set("X", x);
    echo.set("T", t);
    echo.set("zeros-file", zeros_path.display());
    echo.set("method", fmethod_name(method));
    echo.set_if("a", a);
    echo.set_if("b", b);
    Ok((echo, body))
}

struct Rows {
    csv: Vec<(&'static str, String)>,
    json: Map<String, Value>,
}

impl Rows {
    fn new() -> Self {
        Rows {
            csv: Vec::new(),
            json: Map::new(),
        }
    }

    fn num(&mut self, name: &'static str, v: f64) {
        self.csv.push((name, v.to_string()));
        self.json.insert(name.to_string(), json!(v));
    }

    fn flag(&mut self, name: &'static str, v: bool) {
        self.csv.push((name, v.to_string()));
        self.json.insert(name.to_string(), json!(v));
    }
}

pub fn models(
    x: u64,
    h: Option<f64>,
    xi: Option<f64>,
    eta: Option<f64>,
    t: Option<f64>,
    hyp: &AsymptoticHypothesis,
    g: &Globals,
) -> psilab::Result<(Echo, Body)> {
    let mut rows = Rows::new();
    rows.num("c_prime", hyp.c_prime);
    if let Some(h) = h {
        rows.num("j_main_term", j_main_term(x, h, hyp.c_prime)?);
        rows.num("envelope_e", envelope_e(x, h, hyp.mode)?);
        rows.num("envelope_e_tilde", envelope_e_tilde(x, h, hyp.mode)?);
        rows.num("envelope_r_ab", envelope_r_ab(x, h, hyp.a, hyp.b)?);
        let r = admissible_ranges(hyp, x, h, Direction::XiRangeForH)?;
        rows.num("xi_range_lo", r.lo);
        rows.num("xi_range_hi", r.hi);
        rows.flag("xi_range_advisory_ok", r.advisory_ok);
    }
    if let Some(xi) = xi {
        rows.num("r_main_term", r_main_term(x, xi, hyp.c)?);
        let r = admissible_ranges(hyp, x, xi, Direction::HRangeForXi)?;
        rows.num("h_range_lo", r.lo);
        rows.num("h_range_hi", r.hi);
    }
    if let Some(eta) = eta {
        let at = t.ok_or_else(|| {
            Error::Parameter("evaluating the taper needs --T as its argument".to_string())
        })?;
        rows.num("kernel_value", smoothing_kernel(at, eta, SmoothingPart::Value)?);
        rows.num(
            "kernel_transform",
            smoothing_kernel(at, eta, SmoothingPart::Transform)?,
        );
        rows.num(
            "kernel_second_derivative",
            smoothing_kernel(at, eta, SmoothingPart::SecondDerivative)?,
        );
    }
    rows.csv.sort_by_key(|(k, _)| *k);
    let mut csv = String::from("name,value\n");
    for (k, v) in &rows.csv {
        csv.push_str(&format!("{k},{v}\n"));
    }
    let mut json = Map::new();
    json.insert("values".to_string(), Value::Object(rows.json));
    let mut echo = base_echo("models", g, false);
    echo.set("X", x);
    echo.set_if("h", h);
    echo.set_if("xi", xi);
    echo.set_if("eta", eta);
    echo.set_if("T", t);
    echo_hyp(&mut echo, hyp);
    Ok((echo, Body { csv, json }))
}

pub fn verify(x: u64, g: &Globals) -> psilab::Result<(Echo, Body, bool)> {
    let results = run_suite(x)?;
    let all_passed = results.iter().all(|r| r.passed);
    let mut csv = String::from("name,passed,detail\n");
    let mut checks = Vec::new();
    for r in &results {
        csv.push_str(&format!("{},{},{}\n", r.name, r.passed, r.detail));
        checks.push(json!({"name": r.name, "passed": r.passed, "detail": r.detail}));
    }
    let mut json = Map::new();
    json.insert("checks".to_string(), Value::Array(checks));
    json.insert("all_passed".to_string(), json!(all_passed));
    let mut echo = base_echo("verify", g, false);
    echo.set("X", x);
    Ok((echo, Body { csv, json }, all_passed))
}

pub struct ScanSpec {
    pub axis: Axis,
    pub from: f64,
    pub to: f64,
    pub points: usize,
    pub x: Option<u64>,
    pub h: Option<f64>,
    pub h_exp: Option<f64>,
    pub xi: Option<f64>,
    pub xi_exp: Option<f64>,
}

pub fn scan(
    spec: &ScanSpec,
    hyp: &AsymptoticHypothesis,
    g: &Globals,
) -> psilab::Result<(Echo, Body)> {
    if !(spec.from > 0.0 && spec.to >= spec.from) {
        return Err(Error::Parameter(format!(
            "sweep needs 0 < from <= to, got [{}, {}]",
            spec.from, spec.to
        )));
    }
    if spec.points < 1 {
        return Err(Error::Parameter("points must be at least 1".to_string()));
    }
    let point = |i: usize| -> f64 {
        if spec.points == 1 {
            spec.from
        } else {
            spec.from * (spec.to / spec.from).powf(i as f64 / (spec.points - 1) as f64)
        }
    };
    let fixed = [spec.h, spec.h_exp, spec.xi, spec.xi_exp]
        .iter()
        .filter(|v| v.is_some())
        .count();
    let mut rows = vec![ResidualReport::CSV_HEADER.to_string()];
    let mut reports = Vec::new();
    match spec.axis {
        Axis::X => {
            if fixed != 1 {
                return Err(Error::Parameter(
                    "axis x needs exactly one of --h, --h-exp, --xi, --xi-exp".to_string(),
                ));
            }
            for i in 0..spec.points {
                let x = point(i).round() as u64;
                let xf = x as f64;
                let report = if spec.xi.is_some() || spec.xi_exp.is_some() {
                    let xi = spec.xi.unwrap_or_else(|| xf.powf(spec.xi_exp.unwrap()));
                    let table = table_at(x, &g.cache_dir)?;
                    let grid = build_grid(&table, default_grid_size(x))?;
                    theorem2_report(&grid, x, xi, hyp)?
                } else {
                    let h = spec.h.unwrap_or_else(|| xf.powf(spec.h_exp.unwrap()));
                    theorem1_at(x, h, hyp, &g.cache_dir)?
                };
                rows.push(report.csv_row());
                reports.push(serde_json::to_value(&report).expect("report serializes"));
            }
        }
        Axis::H => {
            if fixed != 0 {
                return Err(Error::Parameter(
                    "axis h takes the window from the sweep; drop --h/--h-exp/--xi/--xi-exp"
                        .to_string(),
                ));
            }
            let x = spec
                .x
                .ok_or_else(|| Error::Parameter("axis h needs --X".to_string()))?;
            check_window(x, spec.from)?;
            check_window(x, spec.to)?;
            // one sweep table serves every window in the range
            let sweep_table = table_at(x + spec.to.ceil() as u64 + 1, &g.cache_dir)?;
            let grid_table = table_at(x, &g.cache_dir)?;
            let grid = build_grid(&grid_table, default_grid_size(x))?;
            for i in 0..spec.points {
                let report = theorem1_report(&sweep_table, &grid, x, point(i), hyp)?;
                rows.push(report.csv_row());
                reports.push(serde_json::to_value(&report).expect("report serializes"));
            }
        }
        Axis::Xi => {
            if fixed != 0 {
                return Err(Error::Parameter(
                    "axis xi takes the half-width from the sweep; drop --h/--h-exp/--xi/--xi-exp"
                        .to_string(),
                ));
            }
            let x = spec
                .x
                .ok_or_else(|| Error::Parameter("axis xi needs --X".to_string()))?;
            let table = table_at(x, &g.cache_dir)?;
            let grid = build_grid(&table, default_grid_size(x))?;
            for i in 0..spec.points {
                let report = theorem2_report(&grid, x, point(i), hyp)?;
                rows.push(report.csv_row());
                reports.push(serde_json::to_value(&report).expect("report serializes"));
            }
        }
    }
    let mut json = Map::new();
    json.insert("reports".to_string(), Value::Array(reports));
    let mut echo = base_echo("scan", g, true);
    echo.set("axis", axis_name(spec.axis));
    echo.set("from", spec.from);
    echo.set("to", spec.to);
    echo.set("points", spec.points);
    echo.set_if("X", spec.x);
    echo.set_if("h", spec.h);
    echo.set_if("h-exp", spec.h_exp);
    echo.set_if("xi", spec.xi);
    echo.set_if("xi-exp", spec.xi_exp);
    echo_hyp(&mut echo, hyp);
    let body = Body {
        csv: rows.join("\n") + "\n",
        json,
    };
    Ok((echo, body))
}

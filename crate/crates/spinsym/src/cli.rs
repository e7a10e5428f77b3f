//! Command implementations behind the `spinsym` binary:
//! `inspect`, `potential`, `gauge`, `spin`.

use crate::csub::{build_operator, covariant_subprincipal, extract_potential};
use crate::error::{Error, Result};
use crate::fields::{sweep_max, Chart, VectorField};
use crate::frames::orthonormality_defect;
use crate::gauge::{transform_matrix_field, transform_operator, validate_gauge};
use crate::mat2::CMat2;
use crate::problem::ProblemFile;
use crate::report::{Report, ReportFormat};
use crate::spincover::{framings_equivalent, relating_map, DEFAULT_LOOP_SAMPLES};
use crate::symbols::{
    charges, check_elliptic_tracefree, check_nondegenerate, frame_to_symbol, metric_from_symbol,
    symbol_to_frame, Frame, MetricField, OperatorData, PrincipalSymbol,
};
use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde_json::json;
use std::path::PathBuf;
use std::time::Instant;

/// Default threshold for numerical pass/fail verdicts (two-fd-pass pipelines).
pub const DEFAULT_VERDICT_TOL: f64 = 1e-6;
/// Cap on how many grid nodes the expensive gauge/potential sweeps visit.
const SWEEP_NODE_BUDGET: usize = 256;

#[derive(Debug, Clone)]
pub struct CliOptions {
    pub grid: Option<usize>,
    pub fd_step: Option<f64>,
    pub samples: usize,
    pub tolerance: f64,
}

impl Default for CliOptions {
    fn default() -> Self {
        CliOptions {
            grid: None,
            fd_step: None,
            samples: DEFAULT_LOOP_SAMPLES,
            tolerance: DEFAULT_VERDICT_TOL,
        }
    }
}

// ---------------------------------------------------------------------------
// serialization helpers
// ---------------------------------------------------------------------------

fn mat2_json(m: &CMat2) -> serde_json::Value {
    json!([
        [[m[(0, 0)].re, m[(0, 0)].im], [m[(0, 1)].re, m[(0, 1)].im]],
        [[m[(1, 0)].re, m[(1, 0)].im], [m[(1, 1)].re, m[(1, 1)].im]]
    ])
}

fn dmatrix_json(m: &DMatrix<f64>) -> serde_json::Value {
    let rows: Vec<Vec<f64>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect();
    json!(rows)
}

fn chart_json(chart: &Chart) -> serde_json::Value {
    json!({
        "dim": chart.dim,
        "lo": chart.lo,
        "hi": chart.hi,
        "periodic": chart.periodic,
        "n": chart.n,
    })
}

/// Named sample points for pointwise report tables.
fn sample_points(chart: &Chart) -> Vec<(&'static str, Vec<f64>)> {
    vec![("basepoint", chart.basepoint()), ("center", chart.center())]
}

/// Deterministic stride keeping expensive sweeps within the node budget.
fn sweep_stride(chart: &Chart) -> usize {
    let total: usize = chart.n.iter().product();
    (total / SWEEP_NODE_BUDGET).max(1)
}

fn strided_max<F>(chart: &Chart, stride: usize, mut f: F) -> Result<f64>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let mut max = 0.0f64;
    for idx in chart.node_indices().step_by(stride) {
        let v = f(&chart.node_point(&idx))?;
        if v > max {
            max = v;
        }
    }
    Ok(max)
}

// ---------------------------------------------------------------------------
// shared problem assembly
// ---------------------------------------------------------------------------

struct Assembled {
    chart: Chart,
    frame: Option<Frame>,
    operator: Option<OperatorData>,
    sym: PrincipalSymbol,
}

fn assemble(problem: &ProblemFile, opts: &CliOptions) -> Result<Assembled> {
    let chart = problem.chart_with(opts.grid);
    let frame = problem.build_frame(&chart)?;
    let operator = problem.build_operator(&chart)?;
    let sym = match (&frame, &operator) {
        (Some(f), None) => frame_to_symbol(f),
        (None, Some(op)) => op.principal_symbol(),
        _ => return Err(Error::Invalid("need exactly one of frame or operator".into())),
    };
    Ok(Assembled { chart, frame, operator, sym })
}

fn metric_section(g: &MetricField, chart: &Chart, report: &mut Report) -> Result<()> {
    let mut table = serde_json::Map::new();
    for (name, x) in sample_points(chart) {
        table.insert(
            name.to_string(),
            json!({
                "upper": dmatrix_json(&g.upper(&x)?),
                "lower": dmatrix_json(&g.lower(&x)?),
            }),
        );
    }
    report.put("metric", serde_json::Value::Object(table));
    Ok(())
}

// ---------------------------------------------------------------------------
// inspect
// ---------------------------------------------------------------------------

pub fn cmd_inspect(problem: &ProblemFile, opts: &CliOptions) -> Result<Report> {
    let mut report = Report::new("inspect");
    let a = assemble(problem, opts)?;
    report.put("chart", chart_json(&a.chart));
    report.put("input_kind", if a.frame.is_some() { "frame" } else { "operator" });

    if let Some(op) = &a.operator {
        op.default_self_adjoint_check()?;
        report.put("self_adjoint", true);
    }

    let nd = check_nondegenerate(&a.sym)?;
    if !nd.nondegenerate {
        return Err(Error::Degenerate {
            det: nd.witness_det.unwrap_or(0.0),
            witness: nd.witness.unwrap(),
        });
    }
    report.put("min_abs_frame_det", nd.min_abs_det);

    let g = metric_from_symbol(&a.sym)?;
    metric_section(&g, &a.chart, &mut report)?;

    let mut defect = 0.0f64;
    for (_, x) in sample_points(&a.chart) {
        defect = defect.max(a.sym.hermitian_defect_at(&x)?);
    }
    report.put("max_hermiticity_defect_at_samples", defect);

    if a.chart.dim == 4 {
        let q = problem.build_q(&a.chart);
        let ch = charges(&a.sym, &g, q.as_ref())?;
        report.put("charges", json!({ "c_top": ch.c_top, "c_tem": ch.c_tem }));
        report.put("signature", "(+,+,+,-)");
    } else {
        let ell = check_elliptic_tracefree(&a.sym)?;
        if !ell.ok() {
            return Err(Error::VerdictFailed(format!(
                "3D symbol fails {} check at {:?}",
                if ell.trace_free { "ellipticity" } else { "trace-free" },
                ell.witness
            )));
        }
        let ch = charges(&a.sym, &g, None)?;
        report.put("charges", json!({ "c_top": ch.c_top }));
        report.put("elliptic", true);
        report.put("trace_free", true);
        report.put("signature", "(+,+,+)");
    }

    // frame rows / subprincipal values at the sample points
    let mut table = serde_json::Map::new();
    for (name, x) in sample_points(&a.chart) {
        let entry = match (&a.frame, &a.operator) {
            (Some(f), _) => json!({ "frame": dmatrix_json(&f.eval(&x)?) }),
            (_, Some(op)) => json!({
                "frame": dmatrix_json(&symbol_to_frame(&a.sym).eval(&x)?),
                "subprincipal": mat2_json(&op.subprincipal_symbol(&x, opts.fd_step)?),
            }),
            _ => unreachable!(),
        };
        table.insert(name.to_string(), entry);
    }
    report.put("samples", serde_json::Value::Object(table));
    Ok(report)
}

// ---------------------------------------------------------------------------
// potential
// ---------------------------------------------------------------------------

pub fn cmd_potential(problem: &ProblemFile, opts: &CliOptions) -> Result<Report> {
    let mut report = Report::new("potential");
    let a = assemble(problem, opts)?;
    report.put("chart", chart_json(&a.chart));

    let given = problem.build_potential(&a.chart);
    let (op, frame) = match (&a.operator, &a.frame) {
        (Some(op), None) => (op.clone(), symbol_to_frame(&a.sym)),
        (None, Some(f)) => {
            let pot = given
                .clone()
                .unwrap_or_else(|| VectorField::constant(a.chart.clone(), vec![0.0; a.chart.dim]));
            (build_operator(f, &pot, None)?, f.clone())
        }
        _ => unreachable!(),
    };

    let g = metric_from_symbol(&a.sym)?;
    let csub = covariant_subprincipal(&op, &g);
    let extracted = extract_potential(&csub, &frame);

    let mut table = serde_json::Map::new();
    for (name, x) in sample_points(&a.chart) {
        table.insert(
            name.to_string(),
            json!({
                "covariant_subprincipal": mat2_json(&csub.eval(&x)?),
                "potential": extracted.components.eval(&x)?,
            }),
        );
    }
    report.put("samples", serde_json::Value::Object(table));

    if let Some(given) = &given {
        // roundtrip mode: compare recovered A against the declared one
        let stride = sweep_stride(&a.chart);
        let delta = strided_max(&a.chart, stride, |x| {
            let want = given.eval(x)?;
            let got = extracted.components.eval(x)?;
            Ok(want
                .iter()
                .zip(&got)
                .map(|(w, g)| (w - g).abs())
                .fold(0.0, f64::max))
        })?;
        report.put("roundtrip_max_delta", delta);
        report.put("roundtrip_sweep_stride", stride);
        if delta > opts.tolerance {
            return Err(Error::VerdictFailed(format!(
                "potential roundtrip delta {delta:.3e} exceeds tolerance {:.3e}",
                opts.tolerance
            )));
        }
        report.put("verdict", "pass");
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// gauge
// ---------------------------------------------------------------------------

pub fn cmd_gauge(problem: &ProblemFile, opts: &CliOptions) -> Result<Report> {
    let mut report = Report::new("gauge");
    let a = assemble(problem, opts)?;
    report.put("chart", chart_json(&a.chart));

    let (group, gauge_field) = problem
        .build_gauge_field(&a.chart)
        .ok_or_else(|| Error::Invalid("gauge command needs a `[gauge]` block".into()))?;
    let gauge = validate_gauge(gauge_field, group)?;
    report.put("gauge_group", group.to_string());

    let op = match (&a.operator, &a.frame) {
        (Some(op), None) => op.clone(),
        (None, Some(f)) => {
            let pot = problem
                .build_potential(&a.chart)
                .unwrap_or_else(|| VectorField::constant(a.chart.clone(), vec![0.0; a.chart.dim]));
            build_operator(f, &pot, None)?
        }
        _ => unreachable!(),
    };
    let transformed = transform_operator(&op, &gauge)?;

    let sym = op.principal_symbol();
    let sym_t = transformed.principal_symbol();
    let g = metric_from_symbol(&sym)?;
    let g_t = metric_from_symbol(&sym_t)?;

    // metric invariance over the full grid (cheap)
    let metric_delta = sweep_max(&a.chart, |x| Ok((g.upper(x)? - g_t.upper(x)?).norm()))?;
    report.put("metric_max_delta", metric_delta);

    // charge invariance
    let q = problem.build_q(&a.chart);
    let ch = charges(&sym, &g, q.as_ref())?;
    let ch_t = charges(&sym_t, &g_t, q.as_ref())?;
    let charge_delta =
        (ch.c_top - ch_t.c_top).abs() + (ch.c_tem.unwrap_or(0) - ch_t.c_tem.unwrap_or(0)).abs();
    report.put("charges", json!({ "c_top": ch.c_top, "c_tem": ch.c_tem }));
    report.put("charge_delta", charge_delta);

    // covariance of the subprincipal calculus: transform-then-extract vs
    // extract-then-conjugate, plus potential invariance
    let stride = sweep_stride(&a.chart);
    let csub = covariant_subprincipal(&op, &g);
    let csub_t = covariant_subprincipal(&transformed, &g_t);
    let conjugated = transform_matrix_field(&csub.field, &gauge);
    let two_path_delta =
        strided_max(&a.chart, stride, |x| Ok((csub_t.field.eval(x)? - conjugated.eval(x)?).norm()))?;
    report.put("csub_two_path_max_delta", two_path_delta);

    let frame = symbol_to_frame(&sym);
    let frame_t = symbol_to_frame(&sym_t);
    let pot = extract_potential(&csub, &frame);
    let pot_t = extract_potential(&csub_t, &frame_t);
    let potential_delta = strided_max(&a.chart, stride, |x| {
        let p0 = pot.components.eval(x)?;
        let p1 = pot_t.components.eval(x)?;
        Ok(p0.iter().zip(&p1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    })?;
    report.put("potential_max_delta", potential_delta);
    report.put("sweep_stride", stride);

    if charge_delta != 0 {
        return Err(Error::VerdictFailed("charges changed under gauge transformation".into()));
    }
    let worst = metric_delta.max(two_path_delta).max(potential_delta);
    if worst > opts.tolerance {
        return Err(Error::VerdictFailed(format!(
            "gauge invariance delta {worst:.3e} exceeds tolerance {:.3e}",
            opts.tolerance
        )));
    }
    report.put("verdict", "pass");
    Ok(report)
}

// ---------------------------------------------------------------------------
// spin
// ---------------------------------------------------------------------------

pub fn cmd_spin(problem: &ProblemFile, opts: &CliOptions) -> Result<Report> {
    let mut report = Report::new("spin");
    let chart = problem.chart_with(opts.grid);
    let f1 = problem
        .build_frame(&chart)?
        .ok_or_else(|| Error::Invalid("spin command needs a `[frame]` block".into()))?;
    let f2 = problem
        .build_frame2(&chart)?
        .ok_or_else(|| Error::Invalid("spin command needs a `[frame2]` block".into()))?;
    report.put("chart", chart_json(&chart));

    let g = MetricField::from_frame(&f1);
    g.check_signature()?;

    let map = relating_map(&f1, &f2, &g)?;
    let base = chart.basepoint();
    let c0 = map.eval(&base)?;
    report.put(
        "relating_map_at_basepoint",
        json!({
            "matrix": dmatrix_json(&c0),
            "det": c0.determinant(),
            "frame_orthonormality_defects": [
                orthonormality_defect(&f1, &g, &base)?,
                orthonormality_defect(&f2, &g, &base)?,
            ],
        }),
    );

    let eq = framings_equivalent(&f1, &f2, &g, opts.samples)?;
    report.put("periodic_axes", eq.axes.clone());
    report.put("holonomy_signs", eq.signature.signs.clone());
    report.put("signature", eq.signature.to_string());
    report.put("equivalent", eq.equivalent);
    Ok(report)
}

// ---------------------------------------------------------------------------
// argument parsing and dispatch
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Structured,
}

#[derive(Debug, Parser)]
#[command(
    name = "spinsym",
    about = "Symbol calculus, gauge transformations, and spin-structure \
             classification for 2x2 first-order operators on coordinate charts"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct CommonArgs {
    /// Problem file (sectioned text format; see the crate README)
    pub file: PathBuf,
    /// Override the grid resolution per axis
    #[arg(long)]
    pub grid: Option<usize>,
    /// Finite-difference step for pointwise derivative samples
    #[arg(long)]
    pub fd_step: Option<f64>,
    /// Samples per generator loop for spin runs
    #[arg(long, default_value_t = DEFAULT_LOOP_SAMPLES)]
    pub samples: usize,
    /// Threshold for numerical pass/fail verdicts
    #[arg(long, default_value_t = DEFAULT_VERDICT_TOL)]
    pub tolerance: f64,
    /// Output format
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Metric, signature, charges, and symbol diagnostics
    Inspect(CommonArgs),
    /// Covariant subprincipal symbol and electromagnetic potential
    Potential(CommonArgs),
    /// Gauge validation and invariance deltas
    Gauge(CommonArgs),
    /// Framing equivalence via double-cover holonomy
    Spin(CommonArgs),
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Inspect(c) | Command::Potential(c) | Command::Gauge(c) | Command::Spin(c) => c,
        }
    }
}

/// Run one parsed command; the returned string is the rendered report.
pub fn run_command(command: &Command) -> Result<String> {
    let args = command.common();
    let problem = crate::problem::load_problem(&args.file)?;
    let opts = CliOptions {
        grid: args.grid,
        fd_step: args.fd_step,
        samples: args.samples,
        tolerance: args.tolerance,
    };
    let started = Instant::now();
    let mut report = match command {
        Command::Inspect(_) => cmd_inspect(&problem, &opts),
        Command::Potential(_) => cmd_potential(&problem, &opts),
        Command::Gauge(_) => cmd_gauge(&problem, &opts),
        Command::Spin(_) => cmd_spin(&problem, &opts),
    }?;
    report.diag("elapsed_ms", started.elapsed().as_secs_f64() * 1e3);
    let format = match args.format {
        OutputFormat::Text => ReportFormat::Text,
        OutputFormat::Structured => ReportFormat::Structured,
    };
    Ok(report.render(format))
}

/// Binary entry point: returns the process exit code.
/// 0 success, 2 parse error, 3 validation error, 4 numerical verdict failure.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version itself
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run_command(&cli.command) {
        Ok(text) => {
            println!("{text}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

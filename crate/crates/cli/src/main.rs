use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use tractoria::curvature::CurvatureBundle;
use tractoria::metrics::{builtin_from_query, builtin_help, lift_metric, parse_metric, MetricSpec};
use tractoria::obstruction::{self, Route};
use tractoria::tensor::TensorJet;
use tractoria::tractor;
use tractoria::verify::{suite_checks, CheckReport, Suite};
use tractoria::Error;

#[derive(Parser)]
#[command(name = "tractoria", version, about = "Curvature, tractor and obstruction tensors at a point")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one tensor at a point and print it as JSON.
    Compute {
        #[arg(long, value_enum)]
        tensor: TensorName,
        /// `builtin:<name>?k=v,...` or `file:<path>`.
        #[arg(long)]
        metric: String,
        /// Comma-separated coordinates.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Metric jet degree, or `auto` for the tensor's derivative order.
        #[arg(long, default_value = "auto")]
        degree: String,
        #[arg(long, value_enum, default_value = "on")]
        diagnostics: Switch,
        /// Which formula to use for the obstruction tensor.
        #[arg(long, value_enum, default_value = "direct")]
        route: RouteArg,
        /// Refuse requests whose rank-4 curvature jets would exceed this many coefficients.
        #[arg(long, default_value_t = 20_000_000)]
        max_coefficients: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Run the verification battery.
    Verify {
        #[arg(long, default_value = "fast")]
        suite: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Checks not started within this many seconds are reported as failed.
        #[arg(long)]
        time_budget: Option<f64>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// List builtin metrics and their parameters.
    ListMetrics {
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteArg {
    Direct,
    Tractor,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum TensorName {
    Metric,
    Riemann,
    Ricci,
    Scalar,
    Schouten,
    J,
    Weyl,
    Cotton,
    Bach,
    Obstruction,
    /// The W-tractor, frame order (σ, μ_1..μ_n, ρ) in every slot.
    WTractor,
}

impl TensorName {
    fn label(self) -> &'static str {
        match self {
            TensorName::Metric => "metric",
            TensorName::Riemann => "riemann",
            TensorName::Ricci => "ricci",
            TensorName::Scalar => "scalar",
            TensorName::Schouten => "schouten",
            TensorName::J => "j",
            TensorName::Weyl => "weyl",
            TensorName::Cotton => "cotton",
            TensorName::Bach => "bach",
            TensorName::Obstruction => "obstruction",
            TensorName::WTractor => "w-tractor",
        }
    }

    /// Metric derivatives needed for the value at the point.
    fn order(self, n: usize) -> usize {
        match self {
            TensorName::Metric => 0,
            TensorName::Riemann
            | TensorName::Ricci
            | TensorName::Scalar
            | TensorName::Schouten
            | TensorName::J
            | TensorName::Weyl => 2,
            TensorName::Cotton => 3,
            TensorName::Bach | TensorName::WTractor => 4,
            TensorName::Obstruction => n,
        }
    }
}

/// Failures mapped onto exit codes.
enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        if e.is_usage() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

fn load_metric(source: &str) -> Result<MetricSpec, Failure> {
    if let Some(q) = source.strip_prefix("builtin:") {
        Ok(builtin_from_query(q)?)
    } else if let Some(path) = source.strip_prefix("file:") {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {path}: {e}")))?;
        parse_metric(&text).map_err(|e| Failure::Usage(format!("{path}: {e}")))
    } else {
        Err(Failure::Usage(format!("metric source `{source}` must start with builtin: or file:")))
    }
}

fn parse_point(text: &str, n: usize) -> Result<Vec<f64>, Failure> {
    let point = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| Failure::Usage(format!("bad point coordinate `{s}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    if point.len() != n {
        return Err(Failure::Usage(format!("point has {} coordinates, metric has dimension {n}", point.len())));
    }
    Ok(point)
}

/// Degree-0 values as nested arrays, last index fastest.
fn nested(t: &TensorJet) -> Value {
    fn go(values: &[f64], extents: &[usize]) -> Value {
        match extents.split_first() {
            None => json!(values[0]),
            Some((&e, rest)) => {
                let chunk = values.len() / e;
                Value::Array(values.chunks(chunk).map(|c| go(c, rest)).collect())
            }
        }
    }
    go(&t.values(), &t.extents())
}

fn compute(
    tensor: TensorName,
    metric: &str,
    point: &str,
    degree: &str,
    diagnostics: bool,
    route: RouteArg,
    max_coefficients: u64,
) -> Result<Value, Failure> {
    let spec = load_metric(metric)?;
    let n = spec.dim;
    let point = parse_point(point, n)?;
    let order = tensor.order(n);
    let divergence = diagnostics && tensor == TensorName::Obstruction;
    let degree = match degree {
        "auto" => order + usize::from(divergence),
        d => {
            let d: usize = d.parse().map_err(|_| Failure::Usage(format!("degree must be an integer or auto, got `{d}`")))?;
            if d < order {
                return Err(Failure::Usage(format!(
                    "{} needs degree at least {order}, got {d}",
                    tensor.label()
                )));
            }
            d
        }
    };
    let estimate = coefficient_estimate(n, spec.coords().len(), degree);
    if estimate > max_coefficients as f64 {
        return Err(Failure::Usage(format!(
            "estimated {estimate:.2e} coefficients per rank-4 jet exceeds --max-coefficients {max_coefficients}; \
             use a metric with fewer active coordinates or a lower degree"
        )));
    }
    let m = lift_metric(&spec, &point, degree)?;
    let mut diag = json!({ "jet_degree": degree, "active_variables": m.chart.active_count() });
    if tensor == TensorName::Metric {
        return Ok(document(tensor, &point, &m.g, diagnostics.then_some(diag)));
    }
    let b = CurvatureBundle::new(m)?;
    let t = match tensor {
        TensorName::Metric => unreachable!(),
        TensorName::Riemann => b.riemann_lowered.clone(),
        TensorName::Ricci => b.ricci.clone(),
        TensorName::Scalar => b.scalar.clone(),
        TensorName::Schouten => b.schouten.clone(),
        TensorName::J => b.j.clone(),
        TensorName::Weyl => b.weyl.clone(),
        TensorName::Cotton => b.cotton()?.clone(),
        TensorName::Bach => b.bach()?.clone(),
        TensorName::WTractor => tractor::w_tractor(&b)?,
        TensorName::Obstruction => {
            let route = match route {
                RouteArg::Direct => Route::Direct,
                RouteArg::Tractor => Route::Tractor,
            };
            let r = obstruction::obstruction(&b, route)?;
            let d = &r.diagnostics;
            let tol = if n >= 8 { 1e-4 } else { 1e-6 } * d.scale;
            let pass = [Some(d.trace_residual), Some(d.symmetry_residual), d.divergence_residual, d.upper_slot_residual]
                .into_iter()
                .flatten()
                .all(|x| x <= tol);
            diag = json!({
                "jet_degree": degree,
                "active_variables": b.chart().active_count(),
                "route": r.route,
                "residuals": d,
                "tolerance": tol,
                "pass": pass,
            });
            r.b
        }
    };
    Ok(document(tensor, &point, &t, diagnostics.then_some(diag)))
}

/// `n⁴ · C(k + d, d)`: components of a rank-4 tensor times the jet length in
/// `k` active variables at degree `d`.
fn coefficient_estimate(n: usize, k: usize, d: usize) -> f64 {
    let jet: f64 = (1..=k).map(|i| (d + i) as f64 / i as f64).product();
    (n as f64).powi(4) * jet
}

fn document(tensor: TensorName, point: &[f64], t: &TensorJet, diagnostics: Option<Value>) -> Value {
    json!({
        "tensor": tensor.label(),
        "dim": point.len(),
        "point": point,
        "index_convention": "all indices lowered, row-major nesting",
        "weight": t.weight(),
        "components": nested(&t.at_point()),
        "diagnostics": diagnostics,
    })
}

fn verify(suite: &str, seed: u64, budget: Option<f64>) -> Result<(Vec<CheckReport>, f64), Failure> {
    let suite: Suite = suite.parse()?;
    let checks = suite_checks(suite, seed);
    let start = Instant::now();
    let deadline = budget.map(|s| start + Duration::from_secs_f64(s.max(0.0)));
    let reports = checks
        .par_iter()
        .map(|c| match deadline {
            Some(d) if Instant::now() > d => CheckReport {
                name: c.name.clone(),
                anchor: c.anchor,
                criterion: c.criterion,
                residual: f64::NAN,
                tolerance: c.tolerance,
                passed: false,
                seconds: 0.0,
                error: Some("skipped: time budget exhausted".into()),
            },
            _ => c.run(),
        })
        .collect();
    Ok((reports, start.elapsed().as_secs_f64()))
}

fn print_table(reports: &[CheckReport], total: f64) {
    for r in reports {
        eprintln!(
            "{:4} [{:>2}] {:<58} {:>10.3e} <= {:<8.1e} {:>7.2}s{}",
            if r.passed { "ok" } else { "FAIL" },
            r.criterion,
            r.name,
            r.residual,
            r.tolerance,
            r.seconds,
            r.error.as_deref().map(|e| format!("  {e}")).unwrap_or_default()
        );
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    eprintln!("{} checks, {failed} failed, {total:.2}s", reports.len());
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("TRACTORIA_THREADS") {
        let k: usize = v
            .parse()
            .ok()
            .filter(|&k| k > 0)
            .ok_or_else(|| Failure::Usage(format!("TRACTORIA_THREADS must be a positive integer, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| Failure::Numerical(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool, Failure> {
    configure_threads()?;
    match cli.command {
        Command::Compute { tensor, metric, point, degree, diagnostics, route, max_coefficients, format: Format::Json } => {
            let v = compute(tensor, &metric, &point, &degree, matches!(diagnostics, Switch::On), route, max_coefficients)?;
            println!("{v}");
            Ok(true)
        }
        Command::Verify { suite, seed, time_budget, format: Format::Json } => {
            let (reports, total) = verify(&suite, seed, time_budget)?;
            print_table(&reports, total);
            let passed = reports.iter().all(|r| r.passed);
            println!("{}", json!({ "suite": suite, "seed": seed, "passed": passed, "seconds": total, "checks": reports }));
            Ok(passed)
        }
        Command::ListMetrics { format: Format::Json } => {
            let list: Vec<Value> = builtin_help()
                .into_iter()
                .map(|(name, params)| json!({ "name": name, "params": params }))
                .collect();
            println!("{}", Value::Array(list));
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(3)
        }
    }
}

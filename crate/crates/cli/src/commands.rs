use std::path::Path;

use serde::Deserialize;
use serde_json::{json, Value};
use stein_gauge::distances::evaluate_metric;
use stein_gauge::pinsker::{density_label, rank_experiment, scalar_json, solution_bound};
use stein_gauge::stein::{boundary_check, check_assumption_a};
use stein_gauge::{
    build_density, run_suite, Backend, DensitySpec, DiscreteDensity, Grid, Number, PoissonFactor, Rational, Scalar,
    SuiteName, SuiteReport, TestFunction,
};

use crate::args::{Cli, Command, DistArgs, RankArgs, SolveArgs, VerifyArgs, ZooArgs, ZooCommand, TAIL_MASS_ENV};
use crate::error::{CliError, Outcome};
use crate::output::{check_rows, emit, rank_rows, Table};

pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Dist(args) => match args.backend {
            Backend::Rational => dist::<Rational>(&args),
            Backend::Float => dist::<f64>(&args),
        },
        Command::Verify(args) => verify(&args),
        Command::RankExperiment(args) => rank(&args),
        Command::Zoo { command: ZooCommand::Check(args) } => zoo(&args),
        Command::Solve(args) => match args.backend {
            Backend::Rational => solve::<Rational>(&args),
            Backend::Float => solve::<f64>(&args),
        },
    }
}

fn env_tail_mass() -> Result<Option<f64>, CliError> {
    match std::env::var(TAIL_MASS_ENV) {
        Ok(v) => match v.trim().parse::<f64>() {
            Ok(t) if t > 0.0 && t < 1.0 => Ok(Some(t)),
            _ => Err(CliError::Usage(format!("{TAIL_MASS_ENV} must be a number in (0, 1), got `{v}`"))),
        },
        Err(_) => Ok(None),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })
}

fn load_spec(path: &Path) -> Result<DensitySpec, CliError> {
    let spec_error = |e: stein_gauge::Error| CliError::Spec { path: path.into(), source: e };
    let mut value: Value = serde_json::from_str(&read(path)?).map_err(|e| spec_error(e.into()))?;
    if let (Some(tail), Some(obj)) = (env_tail_mass()?, value.as_object_mut()) {
        let truncation = obj.entry("truncation").or_insert_with(|| json!({}));
        if let Some(t) = truncation.as_object_mut() {
            t.entry("tail_mass").or_insert(json!(tail));
        }
    }
    serde_json::from_value(value).map_err(|e| spec_error(e.into()))
}

fn load_density<S: Scalar>(path: &Path) -> Result<(DensitySpec, DiscreteDensity<S>), CliError> {
    let spec = load_spec(path)?;
    let density = build_density(&spec).map_err(|e| CliError::Spec { path: path.into(), source: e })?;
    Ok((spec, density))
}

fn density_report<S: Scalar>(spec: &DensitySpec, d: &DiscreteDensity<S>) -> Value {
    json!({
        "spec": spec,
        "density": density_label(d),
        "truncation": {
            "tail_mass": d.tail_mass(),
            "dropped_mass": d.dropped_mass(),
            "renormalized": d.is_renormalized(),
            "error": d.truncation_error(),
        },
    })
}

fn dist<S: Scalar>(args: &DistArgs) -> Result<Outcome, CliError> {
    let (p_spec, p) = load_density::<S>(&args.p)?;
    let (q_spec, q) = load_density::<S>(&args.q)?;
    let mut metrics = Vec::new();
    let mut table = Table::new(&["metric", "value", "reason", "error"]);
    let mut violated = Vec::new();
    for &metric in &args.metrics {
        match evaluate_metric(metric, &p, &q) {
            Ok(value) => {
                let reason = value.reason().map(|r| json!(r)).unwrap_or(Value::Null);
                table.row([metric.name().into(), crate::output::number(value.to_f64()), crate::output::text(&reason), String::new()]);
                metrics.push(json!({ "metric": metric, "value": value }));
            }
            Err(e) if e.is_precondition() => {
                table.row([metric.name().into(), String::new(), String::new(), e.to_string()]);
                metrics.push(json!({ "metric": metric, "value": null, "error": e.to_string() }));
                violated.push(format!("{metric}: {e}"));
            }
            Err(e) => return Err(CliError::Core(e)),
        }
    }
    let report = json!({
        "p": density_report(&p_spec, &p),
        "q": density_report(&q_spec, &q),
        "backend": S::BACKEND,
        "kl_log_base": "e",
        "metrics": metrics,
        "truncation_error": p.truncation_error() + q.truncation_error(),
    });
    emit(&report, &args.output, Some(&table))?;
    if violated.is_empty() {
        Ok(Outcome::Ok)
    } else {
        for v in &violated {
            eprintln!("stein-gauge: precondition violated: {v}");
        }
        Ok(Outcome::Precondition)
    }
}

fn verify(args: &VerifyArgs) -> Result<Outcome, CliError> {
    let mut grid = Grid::for_suite(args.suite);
    if let Some(v) = args.pairs {
        grid.pairs = v;
    }
    if let Some(v) = args.max_upper {
        grid.max_upper = v;
    }
    if let Some(v) = &args.theta {
        grid.thetas = v.clone();
    }
    if let Some(v) = &args.n {
        grid.ns = v.0.clone();
    }
    if let Some(v) = &args.lambda {
        grid.lambdas = v.clone();
    }
    if let Some(v) = args.trials {
        grid.trials = v;
    }
    if args.samples.is_some() {
        grid.samples = args.samples;
    }
    let report = run_suite(args.suite, &grid, args.seed, args.backend)?;
    write_suite(&report, &args.output)
}

fn write_suite(report: &SuiteReport, output: &crate::args::Output) -> Result<Outcome, CliError> {
    let value = serde_json::to_value(report).map_err(|e| CliError::Core(e.into()))?;
    emit(&value, output, Some(&check_rows(&report.checks)))?;
    for failure in report.failures() {
        eprintln!("stein-gauge: check {} failed at {}", failure.name, failure.params);
    }
    Ok(Outcome::from_passed(report.passed))
}

fn rank(args: &RankArgs) -> Result<Outcome, CliError> {
    let results = rank_experiment(args.theta, args.n_max, args.samples, args.seed)?;
    let passed = results.iter().all(|r| r.passed);
    let report = json!({
        "theta": args.theta,
        "n_max": args.n_max,
        "samples": args.samples,
        "seed": args.seed,
        "results": results,
        "passed": passed,
    });
    emit(&report, &args.output, Some(&rank_rows(&results)))?;
    Ok(Outcome::from_passed(passed))
}

fn zoo(args: &ZooArgs) -> Result<Outcome, CliError> {
    let mut grid = Grid::for_suite(SuiteName::Zoo);
    grid.trials = args.trials;
    let report = run_suite(SuiteName::Zoo, &grid, args.seed, args.backend)?;
    let report = match args.operator {
        None => report,
        Some(kind) => {
            let checks = report.checks.into_iter().filter(|c| c.params.get("operator") == Some(&json!(kind))).collect();
            SuiteReport::new(report.suite, report.grid, report.seed, report.backend, checks)
        }
    };
    write_suite(&report, &args.output)
}

#[derive(Deserialize)]
struct TableSpec {
    lower: i64,
    values: Vec<Number>,
}

fn load_table<S: Scalar>(path: &Path) -> Result<TestFunction<S>, CliError> {
    let spec_error = |e: stein_gauge::Error| CliError::Spec { path: path.into(), source: e };
    let table: TableSpec = serde_json::from_str(&read(path)?).map_err(|e| spec_error(e.into()))?;
    let values = table.values.iter().map(|v| v.resolve::<S>()).collect::<Result<Vec<S>, _>>().map_err(spec_error)?;
    Ok(TestFunction::new(table.lower, values))
}

fn solve<S: Scalar>(args: &SolveArgs) -> Result<Outcome, CliError> {
    let (p_spec, p) = load_density::<S>(&args.p)?;
    let (l, test) = match (args.indicator, &args.table) {
        (Some(z), _) => (TestFunction::indicator(p.lower(), p.upper(), z), json!({ "indicator": z })),
        (None, Some(path)) => (load_table::<S>(path)?, json!({ "table": path })),
        (None, None) => return Err(CliError::Usage("one of --indicator or --table is required".into())),
    };
    let sol = stein_gauge::solve_stein(&p, args.eta, &l)?;
    let mut table = Table::new(&["x", "l", "f"]);
    let mut rows = Vec::new();
    for x in p.points() {
        table.row([x.to_string(), crate::output::number(l.get(x).to_f64()), crate::output::number(sol.get(x).to_f64())]);
        rows.push(json!({ "x": x, "l": scalar_json(&l.get(x)), "f": scalar_json(&sol.get(x)) }));
    }
    let known = solution_bound(&p, args.eta, PoissonFactor::Complement).map(|(weighting, _)| {
        let range = l.range().to_f64();
        let ws = sol.weighted_sup.to_f64();
        let forms: Vec<Value> = [PoissonFactor::Complement, PoissonFactor::Min]
            .into_iter()
            .filter_map(|f| solution_bound(&p, args.eta, f).map(|(_, c)| (f, c)))
            .map(|(f, c)| json!({ "form": f, "constant": c, "bound": c * range, "holds": ws <= c * range + 1e-9 }))
            .collect();
        json!({ "weighting": weighting, "forms": forms })
    });
    let mut report = json!({
        "p": density_report(&p_spec, &p),
        "direction": args.eta,
        "eta": args.eta.eta(),
        "test": test,
        "backend": S::BACKEND,
        "target_mean": scalar_json(&sol.target_mean),
        "weighting": sol.weighting,
        "weighted_sup": sol.weighted_sup.to_f64(),
        "weighted_sup_exact": scalar_json(&sol.weighted_sup),
        "sup_abs": sol.values.sup_abs().to_f64(),
        "residual": sol.residual,
        "known_bound": known,
        "membership": { "p": boundary_check(&p, args.eta, &sol.values) },
        "values": rows,
    });
    let mut outcome = Outcome::Ok;
    if let Some(path) = &args.q {
        let (q_spec, q) = load_density::<S>(path)?;
        let assumption = check_assumption_a(&p, &q, &sol);
        report["q"] = density_report(&q_spec, &q);
        report["membership"]["q"] = json!(boundary_check(&q, args.eta, &sol.values));
        report["assumption_a"] = json!({
            "holds": assumption.is_ok(),
            "error": assumption.as_ref().err().map(|e| e.to_string()),
        });
        if let Err(e) = assumption {
            eprintln!("stein-gauge: precondition violated: {e}");
            outcome = Outcome::Precondition;
        }
    }
    emit(&report, &args.output, Some(&table))?;
    Ok(outcome)
}

use std::io::Read;

use fracindex::coefficients::{build_table, Rational};
use fracindex::definiteness::{build_gram, fbm_covariance, nd_test, pd_test, KernelSpec};
use fracindex::index::{
    estimate_index, fit_power_law, gh_discontinuity_demo, perturbation_delta, GhOptions,
    IndexOptions, PerturbationOptions,
};
use fracindex::linalg::SymMatrix;
use fracindex::metric::DistanceOptions;
use fracindex::witnesses::{
    a_n_circle, b_n_limit, b_n_two_circles, crossover_scan, perturbed_q_n, q_n_multi, series_s,
    SumMethod, SumsReport, WitnessParams,
};
use fracindex::{Error, Result};
use serde::Serialize;
use serde_json::{json, Value};

use crate::input;
use crate::output::{num, to_value, Format, Output, Table};
use crate::{Command, StackArgs, SweepArgs, WitnessCmd};

pub fn run(cmd: &Command, format: Format) -> Result<Output> {
    match cmd {
        Command::Distance(a) => {
            let space = input::space(&a.space)?;
            let p = input::point(&space, &a.p)?;
            let q = input::point(&space, &a.q)?;
            let opts = DistanceOptions {
                tol: a.tol,
                ..Default::default()
            };
            let d = space.distance(&p, &q, &opts)?;
            Output::json(&json!({ "distance": d }))
        }
        Command::Gram(a) => {
            let (space, pts, kernel) = kernel_inputs(a)?;
            let m = build_gram(&space, &pts, &kernel)?;
            matrix_output(&m)
        }
        Command::NdTest(a) => {
            let (space, pts, kernel) = kernel_inputs(a)?;
            Output::json(&nd_test(&space, &pts, &kernel, a.tol)?)
        }
        Command::PdTest(a) => {
            let (space, pts, kernel) = kernel_inputs(a)?;
            Output::json(&pd_test(&space, &pts, &kernel, a.tol)?)
        }
        Command::FbmCov(a) => {
            let space = input::space(&a.space)?;
            let origin = input::point(&space, &a.origin)?;
            let pts = input::points(&space, &a.points)?;
            matrix_output(&fbm_covariance(&space, &origin, a.h, &pts)?)
        }
        Command::Witness(w) => witness(w, format),
        Command::Series(a) => Output::json(&series_s(a.h, a.tol)?),
        Command::Coeffs(a) => coeffs(a.order, a.check_order.unwrap_or(a.order)),
        Command::EstimateIndex(a) => {
            let space = input::space(&a.space)?;
            let mut opts = IndexOptions {
                bisect: !a.no_bisect,
                resolution: a.resolution,
                points: a.points,
                trials: a.trials,
                seed: a.seed,
                paper_witnesses: !a.no_witnesses,
                max_witness_points: a.max_witness_points,
                tol: a.tol,
                ..Default::default()
            };
            if let Some(g) = &a.h_grid {
                opts.h_grid = g.clone();
            }
            let e = estimate_index(&space, &opts)?;
            let mut t = Table::new(&[
                "H",
                "two_H",
                "violated",
                "source",
                "value",
                "equispaced_ratio",
            ]);
            for p in &e.probes {
                t.push(vec![
                    num(p.h),
                    num(2.0 * p.h),
                    p.violated.to_string(),
                    p.source.map(|s| tag(&s)).unwrap_or_default(),
                    p.value.map(num).unwrap_or_default(),
                    num(p.equispaced_ratio),
                ]);
            }
            Ok(Output::json(&e)?.with_table(t))
        }
        Command::Perturbation(a) => {
            let space = input::space(&a.space)?;
            let opts = PerturbationOptions {
                h0: a.h0,
                levels: a.levels,
                pair_samples: a.pairs,
                seed: a.seed,
                distance: DistanceOptions {
                    tol: a.tol,
                    ..Default::default()
                },
            };
            let r = perturbation_delta(&space, &opts)?;
            let mut t = Table::new(&["h", "delta", "noise"]);
            for ((h, d), e) in r.h_samples.iter().zip(&r.delta_h).zip(&r.noise) {
                t.push(vec![num(*h), num(*d), num(*e)]);
            }
            Ok(Output::json(&r)?.with_table(t))
        }
        Command::GhDemo(a) => {
            let mut opts = GhOptions {
                h: a.h,
                ..Default::default()
            };
            opts.index.trials = a.trials;
            let r = gh_discontinuity_demo(&a.eps, &opts)?;
            let mut t = Table::new(&[
                "eps",
                "gh_bound",
                "circle_nd_pass",
                "cylinder_violation",
                "cylinder_value",
            ]);
            for row in &r.rows {
                t.push(vec![
                    num(row.eps),
                    num(row.gh_bound),
                    row.circle_nd_pass.to_string(),
                    row.cylinder_violation.to_string(),
                    row.cylinder_value.map(num).unwrap_or_default(),
                ]);
            }
            Ok(Output::json(&r)?.with_table(t))
        }
        Command::Fit(a) => {
            let (xs, ys) = read_columns(&a.input, a.x.as_deref(), a.y.as_deref())?;
            Output::json(&fit_power_law(&xs, &ys)?)
        }
    }
}

fn tag<S: Serialize>(s: &S) -> String {
    match serde_json::to_value(s) {
        Ok(Value::String(t)) => t,
        _ => String::new(),
    }
}

fn kernel_inputs(
    a: &crate::KernelArgs,
) -> Result<(
    fracindex::metric::SpaceDescriptor<f64>,
    Vec<fracindex::metric::Point<f64>>,
    KernelSpec<f64>,
)> {
    let space = input::space(&a.space)?;
    let pts = input::points(&space, &a.points)?;
    let kernel = match a.lambda {
        Some(l) => KernelSpec::exp_neg(a.h, l),
        None => KernelSpec::power(a.h),
    };
    Ok((space, pts, kernel))
}

fn matrix_output(m: &SymMatrix<f64>) -> Result<Output> {
    let rows = m.rows();
    let mut t = Table {
        header: Vec::new(),
        rows: Vec::new(),
    };
    // header-less matrix dump: one CSV row per matrix row
    for r in &rows {
        t.push(r.iter().map(|v| num(*v)).collect());
    }
    Ok(Output::json(&json!({ "n": m.dim(), "matrix": rows }))?.with_table(t))
}

fn method(s: &str) -> Result<SumMethod> {
    s.parse()
}

#[derive(Serialize)]
struct SweepRow {
    #[serde(rename = "N")]
    n: usize,
    #[serde(flatten)]
    report: SumsReport<f64>,
    normalized: f64,
}

/// A single `N` prints the report; several print a sweep.
fn sweep_output(rows: Vec<SweepRow>, extra: Value) -> Result<Output> {
    let mut t = Table::new(&["N", "value", "normalized", "method"]);
    for r in &rows {
        t.push(vec![
            r.n.to_string(),
            num(r.report.value),
            num(r.normalized),
            r.report.method.tag().into(),
        ]);
    }
    let mut doc = if rows.len() == 1 {
        to_value(&rows[0])?
    } else {
        json!({ "rows": to_value(&rows)? })
    };
    if let (Value::Object(d), Value::Object(e)) = (&mut doc, extra) {
        d.extend(e);
    }
    Ok(Output::json(&doc)?.with_table(t))
}

fn params(h: f64, n: usize, s: &StackArgs) -> WitnessParams<f64> {
    WitnessParams {
        strict: !s.loose,
        ..WitnessParams::new(h, n, s.beta, s.gamma)
    }
}

fn witness(w: &WitnessCmd, _format: Format) -> Result<Output> {
    match w {
        WitnessCmd::A(SweepArgs { h, n, method: m }) => {
            let m = method(m)?;
            let rows = n
                .iter()
                .map(|&n| {
                    let report = a_n_circle(*h, n, m)?;
                    let normalized = report.value / (n as f64).powf(1.0 - 2.0 * h);
                    Ok(SweepRow {
                        n,
                        report,
                        normalized,
                    })
                })
                .collect::<Result<_>>()?;
            sweep_output(rows, json!({ "H": h }))
        }
        WitnessCmd::B { sweep, z, a } => {
            let m = method(&sweep.method)?;
            let h = sweep.h;
            let limit = b_n_limit(h);
            let rows = sweep
                .n
                .iter()
                .map(|&n| {
                    let zz = match (z, a) {
                        (Some(z), _) => *z,
                        (None, Some(a)) => (n as f64).powf(-a),
                        (None, None) => {
                            return Err(Error::InvalidArgument("need --z or --a".into()))
                        }
                    };
                    let report = b_n_two_circles(h, n, zz, m)?;
                    Ok(SweepRow {
                        n,
                        normalized: report.value / limit,
                        report,
                    })
                })
                .collect::<Result<_>>()?;
            sweep_output(rows, json!({ "H": h, "limit": limit }))
        }
        WitnessCmd::Q { sweep, stack } => {
            let m = method(&sweep.method)?;
            let rows = sweep
                .n
                .iter()
                .map(|&n| {
                    let report = q_n_multi(&params(sweep.h, n, stack), m)?;
                    let normalized = report.value / (n as f64).powf(2.0 * stack.beta);
                    Ok(SweepRow {
                        n,
                        report,
                        normalized,
                    })
                })
                .collect::<Result<_>>()?;
            sweep_output(
                rows,
                json!({ "H": sweep.h, "beta": stack.beta, "gamma": stack.gamma }),
            )
        }
        WitnessCmd::Qprime {
            space,
            h,
            n,
            stack,
            tol,
        } => {
            let space = input::space(space)?;
            let opts = DistanceOptions {
                tol: *tol,
                ..Default::default()
            };
            let rows = n
                .iter()
                .map(|&n| {
                    let report = perturbed_q_n(&space, &params(*h, n, stack), &opts)?;
                    let normalized = report.value / (n as f64).powf(2.0 * stack.beta);
                    Ok(SweepRow {
                        n,
                        report,
                        normalized,
                    })
                })
                .collect::<Result<_>>()?;
            sweep_output(
                rows,
                json!({ "H": h, "beta": stack.beta, "gamma": stack.gamma }),
            )
        }
        WitnessCmd::Crossover {
            h,
            stack,
            max_n,
            method: m,
        } => {
            let c = crossover_scan(&params(*h, 1, stack), *max_n, method(m)?)?;
            let mut t = Table::new(&["N", "value"]);
            for s in &c.samples {
                t.push(vec![s.n.to_string(), num(s.value)]);
            }
            Ok(Output::json(&c)?.with_table(t))
        }
    }
}

fn rationals(v: &[Rational]) -> Value {
    Value::Array(
        v.iter()
            .map(|r| json!({ "numerator": r.numer().to_string(), "denominator": r.denom().to_string() }))
            .collect(),
    )
}

fn coeffs(order: usize, check: usize) -> Result<Output> {
    let t = build_table(order)?;
    let matches = t.matches_generating_series(check)?;
    Output::json(&json!({
        "order": order,
        "odd_Z_zero": t.odd_z_vanish(),
        "odd_C_zero": t.odd_c_vanish(),
        "generating_series_order": check,
        "generating_series_match": matches,
        "a": rationals(&t.a),
        "d": rationals(&t.d),
        "b": rationals(&t.b),
        "A": rationals(&t.big_a),
        "Z": rationals(&t.z),
        "C": rationals(&t.c),
    }))
}

fn read_columns(path: &str, x: Option<&str>, y: Option<&str>) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut text = String::new();
    if path == "-" {
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Error::InvalidArgument(format!("stdin: {e}")))?;
    } else {
        text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read {path}: {e}")))?;
    }
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let bad = |e: csv::Error| Error::InvalidArgument(format!("csv: {e}"));
    let header = rdr.headers().map_err(bad)?.clone();
    let col = |name: Option<&str>, default: usize| -> Result<usize> {
        match name {
            Some(n) => header
                .iter()
                .position(|h| h == n)
                .ok_or_else(|| Error::InvalidArgument(format!("no column {n:?} in {path}"))),
            None if default < header.len() => Ok(default),
            None => Err(Error::InvalidArgument(format!(
                "{path} needs at least two columns"
            ))),
        }
    };
    let (ix, iy) = (col(x, 0)?, col(y, 1)?);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec.map_err(bad)?;
        let get = |i: usize| -> Result<f64> {
            let s = rec.get(i).unwrap_or("");
            s.parse()
                .map_err(|_| Error::InvalidArgument(format!("not a number: {s:?}")))
        };
        xs.push(get(ix)?);
        ys.push(get(iy)?);
    }
    Ok((xs, ys))
}

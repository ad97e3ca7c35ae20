//! The nine acceptance criteria, run in order at their stated tolerances.
//! Prints one PASS/FAIL line per criterion and exits non-zero if any fails.

use std::f64::consts::TAU;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use fracindex::coefficients::{build_table, generating_series_coeffs, Rational};
use fracindex::definiteness::{nd_test, KernelSpec, Verdict};
use fracindex::index::{
    fit_power_law, gh_discontinuity_demo, perturbation_delta, GhOptions, PerturbationOptions,
};
use fracindex::metric::{DistanceOptions, Point, RevolutionProfile, SpaceDescriptor};
use fracindex::witnesses::{
    a_n_circle, b_n_limit, b_n_two_circles, crossover_scan, q_n_multi, series_s, SumMethod,
    WitnessParams,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

fn check(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn e<E: std::fmt::Display>(x: E) -> String {
    x.to_string()
}

/// 1. Reordered sums equal the literal double sums.
fn oracle_equivalence() -> Outcome {
    let mut worst: (f64, String) = (0.0, String::new());
    let mut track = |r: f64, what: String| {
        if r > worst.0 {
            worst = (r, what);
        }
    };
    for h in [0.1, 0.25, 0.4] {
        for n in 1..=8 {
            let a = a_n_circle(h, n, SumMethod::Reordered).map_err(e)?.value;
            let b = a_n_circle(h, n, SumMethod::BruteForce).map_err(e)?.value;
            track(rel(a, b), format!("A H={h} N={n}"));
            for z in [0.05, 0.5] {
                let a = b_n_two_circles(h, n, z, SumMethod::Reordered)
                    .map_err(e)?
                    .value;
                let b = b_n_two_circles(h, n, z, SumMethod::BruteForce)
                    .map_err(e)?
                    .value;
                track(rel(a, b), format!("B H={h} N={n} z={z}"));
            }
        }
        for n in 1..=4 {
            let p = WitnessParams {
                strict: false,
                ..WitnessParams::new(h, n, 0.6, 0.8)
            };
            let a = q_n_multi(&p, SumMethod::Reordered).map_err(e)?.value;
            let b = q_n_multi(&p, SumMethod::BruteForce).map_err(e)?.value;
            track(rel(a, b), format!("Q H={h} N={n}"));
        }
    }
    check(
        worst.0 <= 1e-12,
        format!("max relative gap {:.2e} ({})", worst.0, worst.1),
    )
}

/// 2. `A_N/N^{1−2H} → 4^{1−2H}·S(H)` and `|A_N| ~ N^{1−2H}`.
fn circle_rate() -> Outcome {
    let h = 0.25;
    let s = series_s(h, 1e-10).map_err(e)?.value;
    let target = 4f64.powf(1.0 - 2.0 * h) * s;
    let ns = [1e3, 1e4, 1e5, 1e6];
    let mut vals = Vec::new();
    for n in ns {
        vals.push(
            a_n_circle(h, n as usize, SumMethod::Reordered)
                .map_err(e)?
                .value,
        );
    }
    let norm = vals[3] / 1e6f64.powf(1.0 - 2.0 * h);
    let r = rel(norm, target);
    let abs: Vec<f64> = vals.iter().map(|v| v.abs()).collect();
    let fit = fit_power_law(&ns, &abs).map_err(e)?;
    let er = rel(fit.exponent, 0.5);
    check(
        r <= 5e-3 && er <= 0.02,
        format!(
            "A/N^0.5 = {norm:.6} vs {target:.6} (rel {r:.2e}); exponent {:.5} (rel {er:.2e})",
            fit.exponent
        ),
    )
}

/// 3. `B_N(N^{−a}) → H/(2·4^{H−1})`.
fn two_circle_limit() -> Outcome {
    let n = 1_000_000usize;
    let mut worst = 0f64;
    let mut lines = Vec::new();
    for h in [0.25, 0.4] {
        let lim: f64 = b_n_limit(h);
        let closed = [(0.25, 0.353_553_39), (0.4, 0.459_479_34)];
        let c = closed.iter().find(|(x, _)| *x == h).unwrap().1;
        if (lim - c).abs() > 1e-8 {
            return Err(format!("limit({h}) = {lim}, expected {c}"));
        }
        for a in [0.3, 0.5, 0.7] {
            let z = (n as f64).powf(-a);
            let b = b_n_two_circles(h, n, z, SumMethod::Asymptotic)
                .map_err(e)?
                .value;
            let r = (b - lim).abs() / lim;
            worst = worst.max(r);
            lines.push(format!("H={h},a={a}:{r:.1e}"));
        }
    }
    check(
        worst <= 0.01,
        format!("max |B − limit|/limit = {worst:.2e} [{}]", lines.join(" ")),
    )
}

/// 4. `Q_N` turns positive by `N₀ ≤ 10⁵` and grows like `N^{2β}` with
/// prefactor `H/4^H`.
fn stacked_divergence() -> Outcome {
    let (h, beta, gamma) = (0.25, 0.6, 0.8);
    let p = WitnessParams::new(h, 1, beta, gamma);
    // scanned past the allowed 1e5 so that a failure reports where Q_N
    // actually turns positive
    let scan = crossover_scan(&p, 1 << 26, SumMethod::Asymptotic).map_err(e)?;
    let Some(n0) = scan.n0 else {
        return Err("Q_N never positive up to 2^26".into());
    };
    if n0 > 1_000_000 {
        let xs: Vec<f64> = (0..=8)
            .map(|k| 100.0 * n0 as f64 * 100f64.powf(k as f64 / 8.0))
            .collect();
        let mut ys = Vec::new();
        for &x in &xs {
            ys.push(
                q_n_multi(&WitnessParams { n: x as usize, ..p }, SumMethod::Asymptotic)
                    .map_err(e)?
                    .value,
            );
        }
        let diag = if ys.iter().all(|y| *y > 0.0) {
            fit_power_law(&xs, &ys)
                .map(|f| format!("exponent {:.4}, prefactor {:.5}", f.exponent, f.prefactor))
                .unwrap_or_else(|err| err.to_string())
        } else {
            "not positive throughout".into()
        };
        return Err(format!(
            "N0 = {n0} (need <= 1e5); the fit range [max(N0,1e4), 1e6] is empty; diagnostic fit over [1e2 N0, 1e4 N0]: {diag}"
        ));
    }
    // the N grid: log-spaced over [max(N0, 1e4), 1e6]
    let start = (n0.max(10_000)) as f64;
    let grid: Vec<usize> = if start >= 1e6 {
        vec![]
    } else {
        (0..=12)
            .map(|k| (start * (1e6 / start).powf(k as f64 / 12.0)).round() as usize)
            .collect()
    };
    // positivity from N0 on, checked on a log grid up to 1e6
    let mut stays = true;
    let mut probe = n0 as f64;
    while probe <= 1e6 {
        let q = q_n_multi(
            &WitnessParams {
                n: probe as usize,
                ..p
            },
            SumMethod::Asymptotic,
        )
        .map_err(e)?
        .value;
        stays &= q > 0.0;
        probe *= 1.5;
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for n in grid {
        let q = q_n_multi(&WitnessParams { n, ..p }, SumMethod::Asymptotic)
            .map_err(e)?
            .value;
        if q > 0.0 {
            xs.push(n as f64);
            ys.push(q);
        }
    }
    let pref_target = h / 4f64.powf(h);
    let (fit_ok, fit_msg) = match fit_power_law(&xs, &ys) {
        Ok(f) => (
            rel(f.exponent, 2.0 * beta) <= 0.10 && rel(f.prefactor, pref_target) <= 0.25,
            format!(
                "exponent {:.4} (target {:.1}), prefactor {:.5} (target {pref_target:.5})",
                f.exponent,
                2.0 * beta,
                f.prefactor
            ),
        ),
        Err(err) => (false, format!("fit impossible: {err}")),
    };
    check(
        n0 <= 100_000 && stays && fit_ok,
        format!("N0 = {n0} (need <= 1e5), stays positive to 1e6: {stays}; {fit_msg}"),
    )
}

/// 5. Exact vanishing of odd coefficients and the generating series.
fn coefficient_identities() -> Outcome {
    let t = build_table(41).map_err(e)?;
    let g = generating_series_coeffs::<Rational>(24).map_err(e)?;
    let series = (1..=24).all(|r| g[r] == t.z[r]);
    check(
        t.odd_z_vanish() && t.odd_c_vanish() && series,
        format!(
            "odd Z zero: {}, odd C zero: {}, Z = Taylor coefficients through 24: {series}",
            t.odd_z_vanish(),
            t.odd_c_vanish()
        ),
    )
}

/// 6. Spectral verdicts on the circle and the line.
fn spectral_verdicts() -> Outcome {
    let circle = SpaceDescriptor::circle(1.0f64);
    let pts: Vec<Point<f64>> = (0..32)
        .map(|i| Point::raw(vec![TAU * i as f64 / 32.0]))
        .collect();
    let half = nd_test(&circle, &pts, &KernelSpec::power(0.5), 1e-9).map_err(e)?;
    let three = nd_test(&circle, &pts, &KernelSpec::power(0.75), 1e-9).map_err(e)?;
    let witness_q = three
        .witness
        .as_ref()
        .map(|w| w.quad_form)
        .unwrap_or(f64::NAN);
    let line = SpaceDescriptor::euclidean(1);
    let mut line_ok = 0;
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<Point<f64>> = (0..32).map(|_| line.sample_point(&mut rng)).collect();
        let v = nd_test(&line, &pts, &KernelSpec::power(1.0), 1e-9).map_err(e)?;
        line_ok += (v.verdict == Verdict::NegativeDefiniteUpToTol) as usize;
    }
    check(
        half.verdict == Verdict::NegativeDefiniteUpToTol
            && half.extreme_eigenvalue <= 1e-9 * half.frobenius_norm
            && three.verdict == Verdict::Violated
            && witness_q > 0.0
            && line_ok == 20,
        format!(
            "circle H=0.5 ratio {:.1e}; H=0.75 {:?} with witness form {witness_q:.3e}; line H=1 passes {line_ok}/20",
            half.extreme_eigenvalue / half.frobenius_norm,
            three.verdict
        ),
    )
}

/// 7. Metric axioms and composition laws on random samples.
fn metric_invariants() -> Outcome {
    let opts = DistanceOptions::default();
    let cyl = SpaceDescriptor::cylinder(0.7f64, -0.5, 1.5);
    let spaces = vec![
        ("circle", SpaceDescriptor::circle(1.3)),
        ("cylinder", cyl.clone()),
        ("euclidean", SpaceDescriptor::euclidean(3)),
        ("flat_torus", SpaceDescriptor::flat_torus(vec![1.0, 0.4])),
        (
            "product",
            SpaceDescriptor::product(
                SpaceDescriptor::circle(1.0f64),
                SpaceDescriptor::euclidean(2),
            ),
        ),
        ("scaled", SpaceDescriptor::scaled(cyl.clone(), 2.5)),
        (
            "revolution",
            SpaceDescriptor::revolution(RevolutionProfile::power(1.0, 6.0), 0.0, 0.8),
        ),
    ];
    let samples = 1000;
    let mut failures = Vec::new();
    for (name, space) in &spaces {
        let numeric = matches!(space, SpaceDescriptor::Revolution { .. });
        let slack = if numeric { 1e-9 } else { 1e-12 };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut bad = 0;
        for _ in 0..samples {
            let x = space.sample_point(&mut rng);
            let y = space.sample_point(&mut rng);
            let z = space.sample_point(&mut rng);
            let d = |p: &Point<f64>, q: &Point<f64>| space.distance(p, q, &opts);
            let (xy, yx, yz, xz) = (
                d(&x, &y).map_err(e)?,
                d(&y, &x).map_err(e)?,
                d(&y, &z).map_err(e)?,
                d(&x, &z).map_err(e)?,
            );
            let scale = 1.0 + xy.max(yz).max(xz);
            let sym = (xy - yx).abs() <= slack * scale;
            let tri = xz <= xy + yz + slack * scale;
            let zero = d(&x, &x).map_err(e)? == 0.0 && xy >= 0.0;
            bad += (!(sym && tri && zero)) as usize;
        }
        if bad > 0 {
            failures.push(format!("{name}: {bad} axiom failures"));
        }
    }
    // scale and product laws
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let scaled = SpaceDescriptor::scaled(cyl.clone(), 2.5);
    let left = SpaceDescriptor::circle(1.0f64);
    let right = SpaceDescriptor::cylinder(0.5f64, 0.0, 1.0);
    let prod = SpaceDescriptor::product(left.clone(), right.clone());
    let (mut scale_bad, mut prod_bad) = (0, 0);
    for _ in 0..samples {
        let x = cyl.sample_point(&mut rng);
        let y = cyl.sample_point(&mut rng);
        let ds = scaled.distance(&x, &y, &opts).map_err(e)?;
        let db = cyl.distance(&x, &y, &opts).map_err(e)?;
        scale_bad += ((ds - 2.5 * db).abs() > 1e-12 * (1.0 + ds)) as usize;
        let p = prod.sample_point(&mut rng);
        let q = prod.sample_point(&mut rng);
        let dp = prod.distance(&p, &q, &opts).map_err(e)?;
        let dl = left
            .distance(
                &Point::raw(p.coords[..1].to_vec()),
                &Point::raw(q.coords[..1].to_vec()),
                &opts,
            )
            .map_err(e)?;
        let dr = right
            .distance(
                &Point::raw(p.coords[1..].to_vec()),
                &Point::raw(q.coords[1..].to_vec()),
                &opts,
            )
            .map_err(e)?;
        prod_bad += ((dp - dl.hypot(dr)).abs() > 1e-12 * (1.0 + dp)) as usize;
    }
    if scale_bad > 0 {
        failures.push(format!("scale law: {scale_bad} failures"));
    }
    if prod_bad > 0 {
        failures.push(format!("product law: {prod_bad} failures"));
    }
    // constant profile against the cylinder closed form
    let rev = SpaceDescriptor::revolution(RevolutionProfile::ConstantOne, 0.0f64, 2.0);
    let flat = SpaceDescriptor::cylinder(1.0f64, 0.0, 2.0);
    let mut worst = 0f64;
    for _ in 0..200 {
        let x = rev.sample_point(&mut rng);
        let y = rev.sample_point(&mut rng);
        let a = rev.distance(&x, &y, &opts).map_err(e)?;
        let b = flat.distance(&x, &y, &opts).map_err(e)?;
        worst = worst.max((a - b).abs());
    }
    if worst > 1e-3 {
        failures.push(format!("constant_one vs cylinder: {worst:.2e}"));
    }
    check(
        failures.is_empty(),
        if failures.is_empty() {
            format!("{} space kinds x {samples} samples; scale and product laws exact; constant_one gap {worst:.1e}", spaces.len())
        } else {
            failures.join("; ")
        },
    )
}

/// 8. Perturbation exponent of the power profile and the exact cylinder.
fn perturbation_bounds() -> Outcome {
    let opts = PerturbationOptions::default();
    let cyl = SpaceDescriptor::cylinder(1.0f64, 0.0, 1.0);
    let flat = perturbation_delta(&cyl, &opts).map_err(e)?;
    let zero = flat.delta_h.iter().all(|d| *d == 0.0);
    let rev = SpaceDescriptor::revolution(RevolutionProfile::power(1.0, 6.0), 0.0, 1.0);
    let r = perturbation_delta(&rev, &opts).map_err(e)?;
    let delta = r.delta_exponent.unwrap_or(f64::INFINITY);
    check(
        zero && (2.5..=3.5).contains(&delta) && (0.69..=0.82).contains(&r.bound),
        format!(
            "cylinder Δ ≡ 0: {zero}; power(1,6): δ = {delta:.3} (need [2.5, 3.5]), bound = {:.3} (need [0.69, 0.82]), {} levels fitted",
            r.bound, r.used_levels
        ),
    )
}

/// 9. Circle versus thin cylinders.
fn gh_table() -> Outcome {
    let r = gh_discontinuity_demo(&[0.5, 0.2, 0.1], &GhOptions::default()).map_err(e)?;
    let mut ok = true;
    let mut cells = Vec::new();
    for row in &r.rows {
        ok &= row.gh_bound == row.eps && row.circle_nd_pass && row.cylinder_violation;
        let lay = row
            .layout
            .map(|l| format!("N={},n={}", l.quarter, l.circles))
            .unwrap_or_else(|| "-".into());
        cells.push(format!(
            "eps={}: gh={} circle_pass={} violation={} ({lay}, Q={:.2e})",
            row.eps,
            row.gh_bound,
            row.circle_nd_pass,
            row.cylinder_violation,
            row.cylinder_value.unwrap_or(f64::NAN)
        ));
    }
    check(ok, cells.join("; "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, f64); 9] = [
        ("1 oracle equivalence", oracle_equivalence, 1.0),
        ("2 circle rate", circle_rate, 5.0),
        ("3 two-circle limit", two_circle_limit, 10.0),
        ("4 stacked-circle divergence", stacked_divergence, 60.0),
        (
            "5 exact coefficient identities",
            coefficient_identities,
            1.0,
        ),
        ("6 spectral verdicts", spectral_verdicts, 1.0),
        ("7 metric invariants", metric_invariants, 30.0),
        ("8 perturbation bounds", perturbation_bounds, 120.0),
        ("9 GH demo table", gh_table, 60.0),
    ];
    let mut failed = 0;
    for (name, f, budget) in criteria {
        let t = Instant::now();
        let res = f();
        let dt = t.elapsed();
        let in_time = dt <= Duration::from_secs_f64(budget);
        let (ok, msg) = match res {
            Ok(m) => (in_time, m),
            Err(m) => (false, m),
        };
        failed += (!ok) as usize;
        println!(
            "{} criterion {name}: {msg} [{:.2}s / {budget}s]",
            if ok { "PASS" } else { "FAIL" },
            dt.as_secs_f64()
        );
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

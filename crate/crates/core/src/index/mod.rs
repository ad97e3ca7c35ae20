//! Evidence about the fractional index `β = sup{2H : d^{2H} negative definite}`.
//!
//! Finite configurations can refute negative definiteness but never prove
//! it, so [`IndexEstimate`] keeps two different kinds of number apart:
//! `upper_bound` comes from an explicit positive form, `lower_evidence`
//! only says that nothing was found below it.

mod fit;
mod gh;
mod perturbation;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::definiteness::{nd_test_with, random_config_search, KernelSpec, TestOptions, Verdict};
use crate::error::{invalid, Result};
use crate::metric::{DistanceOptions, Point, RevolutionProfile, SpaceDescriptor};
use crate::scalar::Scalar;
use crate::witnesses::{cylinder_witness_search, MultiCircle};

pub use fit::{fit_power_law, PowerFit};
pub use gh::{gh_discontinuity_demo, GhOptions, GhReport, GhRow};
pub use perturbation::{perturbation_delta, PerturbationOptions, PerturbationReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IndexOptions {
    /// Values of `H` probed before bisection.
    #[serde(rename = "H_grid")]
    pub h_grid: Vec<f64>,
    pub bisect: bool,
    /// Bisection stops once the bracket on `2H` is narrower than this.
    pub resolution: f64,
    /// Points in the equispaced and random configurations.
    pub points: usize,
    /// Random configurations per `H`.
    pub trials: usize,
    pub seed: u64,
    /// Stacked-circle witnesses on cylinder-like spaces.
    pub paper_witnesses: bool,
    pub max_witness_points: usize,
    pub tol: f64,
    pub distance: DistanceOptions,
}

impl Default for IndexOptions {
    fn default() -> Self {
        Self {
            h_grid: (1..=20).map(|k| k as f64 * 0.05).collect(),
            bisect: true,
            resolution: 0.01,
            points: 32,
            trials: 8,
            seed: 0,
            paper_witnesses: true,
            max_witness_points: 1 << 14,
            tol: 1e-9,
            distance: DistanceOptions::default(),
        }
    }
}

impl IndexOptions {
    fn validate(&self) -> Result<()> {
        if self.h_grid.is_empty() {
            return invalid("H grid is empty");
        }
        if let Some(h) = self.h_grid.iter().find(|h| !(**h > 0.0 && **h <= 1.0)) {
            return invalid(format!("H = {h} outside (0, 1]"));
        }
        if !(self.resolution > 0.0) {
            return invalid("resolution must be positive");
        }
        if self.points < 2 {
            return invalid("configurations need at least two points");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceSource {
    Equispaced,
    Random,
    CylinderWitness,
    Supplied,
}

/// Outcome of all tests at one `H`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Probe<T> {
    #[serde(rename = "H")]
    pub h: T,
    pub violated: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<EvidenceSource>,
    /// Positive quadratic form of the violating configuration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<MultiCircle<T>>,
    /// Largest projected eigenvalue on the equispaced configuration,
    /// relative to the Frobenius norm.
    pub equispaced_ratio: T,
    pub configs_tested: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct IndexEstimate<T> {
    /// Largest `2H` at which every attempted configuration passed. Evidence,
    /// not a bound.
    pub lower_evidence: Option<T>,
    /// Smallest `2H` at which a positive form was exhibited.
    pub upper_bound: Option<T>,
    /// Upper bound known in closed form for the descriptor, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analytic_upper_bound: Option<T>,
    pub probes: Vec<Probe<T>>,
    pub notes: Vec<String>,
}

/// `n` points along a closed geodesic (or a segment for Euclidean factors).
pub fn equispaced_points<T: Scalar>(space: &SpaceDescriptor<T>, n: usize) -> Vec<Point<T>> {
    let angle = |i: usize| T::TAU() * T::from_usize_exact(i) / T::from_usize_exact(n);
    let pts: Vec<Vec<T>> = match space {
        SpaceDescriptor::Circle { .. } => (0..n).map(|i| vec![angle(i)]).collect(),
        SpaceDescriptor::Cylinder {
            height_interval: iv,
            ..
        }
        | SpaceDescriptor::Revolution { z_interval: iv, .. } => {
            (0..n).map(|i| vec![angle(i), iv.lo()]).collect()
        }
        SpaceDescriptor::Euclidean { dim } => (0..n)
            .map(|i| {
                let mut c = vec![T::zero(); *dim];
                if *dim > 0 {
                    c[0] = T::from_usize_exact(i) / T::from_usize_exact(n.max(2) - 1);
                }
                c
            })
            .collect(),
        SpaceDescriptor::FlatTorus { radii } => (0..n)
            .map(|i| {
                let mut c = vec![T::zero(); radii.len()];
                c[0] = angle(i);
                c
            })
            .collect(),
        SpaceDescriptor::Product { left, right } => {
            let pad = right.default_point().coords;
            equispaced_points(left, n)
                .into_iter()
                .map(|p| {
                    let mut c = p.coords;
                    c.extend_from_slice(&pad);
                    c
                })
                .collect()
        }
        SpaceDescriptor::Scaled { base, .. } => return equispaced_points(base, n),
    };
    pts.into_iter().map(Point::raw).collect()
}

/// Radius and height window of the flat cylinder the stacked-circle search
/// runs on, in the coordinates [`MultiCircle::config`] uses for `space`.
fn flat_model<T: Scalar>(space: &SpaceDescriptor<T>) -> Option<(T, crate::metric::Interval<T>)> {
    match space {
        SpaceDescriptor::Cylinder {
            radius,
            height_interval,
        } => Some((*radius, *height_interval)),
        SpaceDescriptor::Revolution {
            profile,
            z_interval,
        } => Some((profile.radius(z_interval.lo()), *z_interval)),
        // homothety only rescales the form
        SpaceDescriptor::Scaled { base, .. } if base.is_rotation_invariant_chart() => {
            flat_model(base)
        }
        _ => space.cylinder_chart().map(|c| (c.radius, c.window)),
    }
}

/// Runs every test at one `H`, cheapest first, and stops at the first
/// violation.
pub fn probe<T: Scalar>(
    space: &SpaceDescriptor<T>,
    h: T,
    opts: &IndexOptions,
    supplied: &[Vec<Point<T>>],
) -> Result<Probe<T>> {
    let kernel = KernelSpec::power(h);
    let topts = TestOptions {
        tol: opts.tol,
        ..Default::default()
    };
    let mut out = Probe {
        h,
        violated: false,
        source: None,
        value: None,
        layout: None,
        equispaced_ratio: T::zero(),
        configs_tested: 0,
    };
    let pts = equispaced_points(space, opts.points);
    let v = nd_test_with(space, &pts, &kernel, &topts, &opts.distance)?;
    out.configs_tested += 1;
    out.equispaced_ratio = if v.frobenius_norm > T::zero() {
        v.extreme_eigenvalue / v.frobenius_norm
    } else {
        T::zero()
    };
    if v.verdict == Verdict::Violated {
        out.violated = true;
        out.source = Some(EvidenceSource::Equispaced);
        out.value = v.witness.map(|w| w.quad_form);
        return Ok(out);
    }
    for pts in supplied {
        out.configs_tested += 1;
        let v = nd_test_with(space, pts, &kernel, &topts, &opts.distance)?;
        if v.verdict == Verdict::Violated {
            out.violated = true;
            out.source = Some(EvidenceSource::Supplied);
            out.value = v.witness.map(|w| w.quad_form);
            return Ok(out);
        }
    }
    if opts.trials > 0 {
        out.configs_tested += opts.trials;
        if let Some((_, q)) =
            random_config_search(space, &kernel, opts.points, opts.trials, opts.seed)?
        {
            out.violated = true;
            out.source = Some(EvidenceSource::Random);
            out.value = Some(q);
            return Ok(out);
        }
    }
    if opts.paper_witnesses && h < T::lit(0.5) {
        if let Some((radius, window)) = flat_model(space) {
            if let Some(w) = cylinder_witness_search(h, radius, window, opts.max_witness_points)? {
                out.configs_tested += 1;
                // the flat form is exact only on flat cylinders; re-evaluate
                // with the space's own distance
                let r = w.layout.quad_form(space, h, &opts.distance)?;
                if r.value > r.error_estimate {
                    out.violated = true;
                    out.source = Some(EvidenceSource::CylinderWitness);
                    out.value = Some(r.value);
                    out.layout = Some(w.layout);
                    return Ok(out);
                }
            }
        }
    }
    Ok(out)
}

/// Grid scan over `H`, then bisection between the largest passing and the
/// smallest violating value.
pub fn estimate_index<T: Scalar>(
    space: &SpaceDescriptor<T>,
    opts: &IndexOptions,
) -> Result<IndexEstimate<T>> {
    estimate_index_with(space, opts, &[])
}

/// [`estimate_index`] with extra configurations tested at every `H`; a
/// violation on any of them (a subset of the space) counts for the space.
pub fn estimate_index_with<T: Scalar>(
    space: &SpaceDescriptor<T>,
    opts: &IndexOptions,
    supplied: &[Vec<Point<T>>],
) -> Result<IndexEstimate<T>> {
    opts.validate()?;
    space.validate()?;
    for pts in supplied {
        for p in pts {
            space.point(p.coords.clone())?;
        }
    }
    let mut grid: Vec<f64> = opts.h_grid.clone();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut probes: Vec<Probe<T>> = grid
        .par_iter()
        .map(|&h| probe(space, T::lit(h), opts, supplied))
        .collect::<Result<_>>()?;
    let mut notes = vec!["lower_evidence is the largest 2H at which no tested configuration violated negative definiteness; it is not a proof".to_string()];
    let first_bad = probes.iter().position(|p| p.violated);
    let mut hi = first_bad.map(|i| probes[i].h);
    let mut lo = match first_bad {
        Some(0) => None,
        Some(i) => Some(probes[i - 1].h),
        None => probes.last().map(|p| p.h),
    };
    if let Some(i) = first_bad {
        if probes[i..].iter().any(|p| !p.violated) {
            notes.push(
                "some H above the first violation passed: the budget missed witnesses there".into(),
            );
        }
    }
    if opts.bisect {
        let res = T::lit(opts.resolution);
        if let (Some(mut a), Some(mut b)) = (lo, hi) {
            while (b - a) * T::lit(2.0) > res {
                let mid = (a + b) * T::lit(0.5);
                let p = probe(space, mid, opts, supplied)?;
                if p.violated {
                    b = mid;
                } else {
                    a = mid;
                }
                probes.push(p);
            }
            lo = Some(a);
            hi = Some(b);
        }
    }
    probes.sort_by(|a, b| a.h.partial_cmp(&b.h).unwrap_or(std::cmp::Ordering::Equal));
    let two = T::lit(2.0);
    let analytic = analytic_bound(space);
    if let Some((_, why)) = &analytic {
        notes.push(why.clone());
    }
    Ok(IndexEstimate {
        lower_evidence: lo.map(|h| two * h),
        upper_bound: hi.map(|h| two * h),
        analytic_upper_bound: analytic.map(|(b, _)| b),
        probes,
        notes,
    })
}

/// Closed-form upper bounds for descriptors covered by a theorem.
fn analytic_bound<T: Scalar>(space: &SpaceDescriptor<T>) -> Option<(T, String)> {
    match space {
        SpaceDescriptor::Circle { .. } => Some((T::one(), "circle: index 1".into())),
        SpaceDescriptor::Euclidean { .. } => Some((T::lit(2.0), "Euclidean space: index 2".into())),
        SpaceDescriptor::Cylinder { .. } => {
            Some((T::zero(), "flat cylinder of finite height: index 0".into()))
        }
        SpaceDescriptor::Revolution {
            profile,
            z_interval,
        } if z_interval.lo() == T::zero() => match profile {
            RevolutionProfile::ConstantOne => Some((
                T::zero(),
                "constant profile is a flat cylinder: index 0".into(),
            )),
            RevolutionProfile::FlatExponential => Some((
                T::zero(),
                "profile flat to every order at the base: index 0".into(),
            )),
            RevolutionProfile::Power { p, .. } => revolution_bound(*p).ok().map(|b| {
                (
                    b.value,
                    format!("power profile: index <= min(1, 6/(p+2)) ({})", b.branch),
                )
            }),
            RevolutionProfile::Tabulated { .. } => None,
        },
        SpaceDescriptor::Scaled { base, .. } => analytic_bound(base),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RevolutionBound<T> {
    pub value: T,
    /// `"theorem"` when `6/(p+2) < 1`, `"circle"` when the parallel at the
    /// base already gives the better bound 1.
    pub branch: &'static str,
}

/// `min(1, 6/(p+2))` for the profile `r(z) = 1 + c·z^p`.
pub fn revolution_bound<T: Scalar>(p: T) -> Result<RevolutionBound<T>> {
    if !(p > T::one()) {
        return invalid(format!("revolution bound needs p > 1, got {p}"));
    }
    let v = T::lit(6.0) / (p + T::lit(2.0));
    Ok(if v < T::one() {
        RevolutionBound {
            value: v,
            branch: "theorem",
        }
    } else {
        RevolutionBound {
            value: T::one(),
            branch: "circle",
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> IndexOptions {
        IndexOptions {
            trials: 2,
            ..Default::default()
        }
    }

    #[test]
    fn revolution_bound_values() {
        let b = revolution_bound(6.0f64).unwrap();
        assert_eq!((b.value, b.branch), (0.75, "theorem"));
        let b = revolution_bound(4.0f64).unwrap();
        assert_eq!((b.value, b.branch), (1.0, "circle"));
        assert!(revolution_bound(1e12f64).unwrap().value < 1e-11);
        assert!(revolution_bound(f64::INFINITY).unwrap().value == 0.0);
        assert!(revolution_bound(1.0f64).is_err());
        assert!(revolution_bound(f64::NAN).is_err());
    }

    #[test]
    fn circle_index_is_one() {
        let e = estimate_index(&SpaceDescriptor::circle(1.0f64), &quick()).unwrap();
        let (lo, hi) = (e.lower_evidence.unwrap(), e.upper_bound.unwrap());
        assert!((lo - 1.0).abs() < 1e-12, "{lo}");
        assert!(hi > 1.0 && hi <= 1.0 + 0.01, "{hi}");
    }

    #[test]
    fn euclidean_line_has_no_violation() {
        let e = estimate_index(&SpaceDescriptor::euclidean(1), &quick()).unwrap();
        assert_eq!(e.upper_bound, None);
        assert_eq!(e.lower_evidence, Some(2.0));
    }

    #[test]
    fn thin_cylinder_violates_at_quarter() {
        let cyl = SpaceDescriptor::cylinder(1.0 / std::f64::consts::TAU, 0.0, 0.1);
        let opts = IndexOptions {
            h_grid: vec![0.25],
            bisect: false,
            ..quick()
        };
        let e = estimate_index(&cyl, &opts).unwrap();
        assert!(e.upper_bound.unwrap() <= 0.5);
        let p = &e.probes[0];
        assert_eq!(p.source, Some(EvidenceSource::CylinderWitness));
        assert!(p.value.unwrap() > 0.0);
    }

    #[test]
    fn supplied_subset_violation_counts() {
        // an equispaced parallel is a circle, so on a cylinder with the
        // witness search and random search off, only the supplied subset
        // can produce the violation at H = 0.75
        let cyl = SpaceDescriptor::cylinder(1.0f64, 0.0, 1.0);
        let opts = IndexOptions {
            h_grid: vec![0.75],
            bisect: false,
            trials: 0,
            points: 2,
            paper_witnesses: false,
            ..Default::default()
        };
        let none = estimate_index(&cyl, &opts).unwrap();
        assert_eq!(none.upper_bound, None);
        let ring: Vec<Point<f64>> = equispaced_points(&SpaceDescriptor::circle(1.0), 16)
            .into_iter()
            .map(|p| Point::raw(vec![p.coords[0], 0.5]))
            .collect();
        let e = estimate_index_with(&cyl, &opts, &[ring]).unwrap();
        assert_eq!(e.upper_bound, Some(1.5));
        assert_eq!(e.probes[0].source, Some(EvidenceSource::Supplied));
    }

    #[test]
    fn scaling_leaves_verdicts_unchanged() {
        let opts = IndexOptions {
            h_grid: vec![0.25, 0.5, 0.75],
            ..quick()
        };
        for base in [
            SpaceDescriptor::circle(1.0f64),
            SpaceDescriptor::cylinder(0.3, 0.0, 0.2),
        ] {
            let a = estimate_index(&base, &opts).unwrap();
            let b = estimate_index(&SpaceDescriptor::scaled(base.clone(), 3.7), &opts).unwrap();
            assert_eq!(a.lower_evidence, b.lower_evidence);
            assert_eq!(a.upper_bound, b.upper_bound);
        }
    }
}

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{a_n_circle, b_n_two_circles, SumMethod, SumsReport, WitnessParams};
use crate::definiteness::{quad_form_with, KernelSpec, PointConfig};
use crate::error::{invalid, Error, Result};
use crate::metric::{DistanceOptions, Interval, SpaceDescriptor};
use crate::scalar::{pow_nonneg, Scalar};
use crate::summation::CompensatedSum;

/// `circles` parallel rings of `4·quarter` alternating points, the `k`-th at
/// height `base + k·spacing`, angles `2πi/(4·quarter)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MultiCircle<T> {
    #[serde(rename = "N")]
    pub quarter: usize,
    pub circles: usize,
    pub base: T,
    pub spacing: T,
}

impl<T: Scalar> MultiCircle<T> {
    pub fn points_per_circle(&self) -> usize {
        4 * self.quarter
    }

    pub fn len(&self) -> usize {
        self.points_per_circle() * self.circles
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn height(&self, k: usize) -> T {
        self.base + T::from_usize_exact(k) * self.spacing
    }

    pub fn top(&self) -> T {
        self.height(self.circles.saturating_sub(1))
    }

    pub fn angle(&self, i: usize) -> T {
        T::TAU() * T::from_usize_exact(i) / T::from_usize_exact(self.points_per_circle())
    }

    fn check(&self) -> Result<()> {
        if self.quarter == 0 || self.circles == 0 {
            return invalid("a multi-circle layout needs N >= 1 and at least one circle");
        }
        if !(self.spacing > T::zero()) && self.circles > 1 {
            return invalid("circle spacing must be positive");
        }
        Ok(())
    }

    /// The layout as a configuration of `space`. Cylinders and surfaces of
    /// revolution (possibly scaled) take `(θ, height)` directly; other
    /// spaces go through their flat cylinder chart.
    pub fn config(&self, space: &SpaceDescriptor<T>) -> Result<PointConfig<T>> {
        self.check()?;
        let chart = if direct_chart(space) {
            None
        } else {
            space.cylinder_chart()
        };
        if !direct_chart(space) && chart.is_none() {
            return Err(Error::Unsupported(
                "space has no (angle, height) chart for a multi-circle layout".into(),
            ));
        }
        let m = self.points_per_circle();
        let mut points = Vec::with_capacity(self.len());
        let mut coeffs = Vec::with_capacity(self.len());
        for k in 0..self.circles {
            let z = self.height(k);
            for i in 0..m {
                let raw = match &chart {
                    None => vec![self.angle(i), z],
                    Some(c) => c.embed(self.angle(i), z).coords,
                };
                points.push(space.point(raw)?);
                coeffs.push(if i % 2 == 0 { T::one() } else { -T::one() });
            }
        }
        Ok(PointConfig {
            space: space.clone(),
            points,
            coeffs,
        })
    }

    /// Closed-form value on the flat cylinder of the given radius.
    pub fn flat_form(&self, h: T, radius: T, method: SumMethod) -> Result<SumsReport<T>> {
        self.check()?;
        let perimeter = T::TAU() * radius;
        let scale = pow_nonneg(perimeter, h + h);
        let n = self.circles;
        let a = a_n_circle(h, self.quarter, method)?;
        let parts: Vec<SumsReport<T>> = (1..n)
            .into_par_iter()
            .map(|m| {
                b_n_two_circles(
                    h,
                    self.quarter,
                    T::from_usize_exact(m) * self.spacing / perimeter,
                    method,
                )
            })
            .collect::<Result<_>>()?;
        let mut acc = CompensatedSum::new();
        let cn = T::from_usize_exact(n);
        acc.add(cn * a.value);
        let mut err = cn * a.error_estimate;
        let mut terms = a.n_terms;
        for (m, b) in parts.iter().enumerate() {
            let w = T::from_usize_exact(2 * (n - m - 1));
            acc.add(w * b.value);
            err += w * b.error_estimate;
            terms += b.n_terms;
        }
        Ok(SumsReport {
            value: scale * acc.value(),
            n_terms: terms,
            method,
            error_estimate: scale * err,
            warning: None,
        })
    }

    /// The quadratic form of the layout under `space`'s own distance.
    ///
    /// On rotation-invariant charts `d((θᵢ, z_k), (θⱼ, z_l))` depends only on
    /// `i − j mod 4N` (and is even in it) and on `(k, l)`, so the form is
    /// `4N Σ_{k,l} Σ_Δ (−1)^Δ d_{kl}(Δ)^{2H}` and only
    /// `(2N+1)·n(n+1)/2` distances are computed.
    pub fn quad_form(
        &self,
        space: &SpaceDescriptor<T>,
        h: T,
        opts: &DistanceOptions,
    ) -> Result<SumsReport<T>> {
        self.check()?;
        if !space.is_rotation_invariant_chart() {
            let config = self.config(space)?;
            let value = quad_form_with(&config, &KernelSpec::power(h), true, opts)?;
            let m = config.points.len() as u64;
            return Ok(SumsReport {
                value,
                n_terms: m * m,
                method: SumMethod::BruteForce,
                error_estimate: T::lit(4.0)
                    * T::epsilon()
                    * T::from_u64(m * m).unwrap_or_else(T::zero),
                warning: None,
            });
        }
        // also checks every height against the chart
        let ring = |k: usize, i: usize| space.point(vec![self.angle(i), self.height(k)]);
        for k in [0, self.circles - 1] {
            ring(k, 0)?;
        }
        let m = self.points_per_circle();
        let half = 2 * self.quarter;
        let mut tasks = Vec::new();
        for k in 0..self.circles {
            for l in k..self.circles {
                for d in 0..=half {
                    tasks.push((k, l, d));
                }
            }
        }
        let two_h = h + h;
        let tol = T::lit(opts.tol);
        let terms: Vec<(T, T)> = tasks
            .par_iter()
            .map(|&(k, l, d)| {
                if k == l && d == 0 {
                    return Ok((T::zero(), T::zero()));
                }
                let p = ring(k, 0)?;
                let q = ring(l, d)?;
                let dist = space.distance(&p, &q, opts)?;
                let mut w = if d == 0 || d == half {
                    T::one()
                } else {
                    T::lit(2.0)
                };
                if k != l {
                    w = w + w;
                }
                if d % 2 == 1 {
                    w = -w;
                }
                let t = pow_nonneg(dist, two_h);
                // |d(d^{2H})| ≤ 2H·d^{2H−1}·|δd|, with δd ~ tol·max(d, 1)
                let dt = two_h * t / dist * tol * dist.max(T::one());
                Ok((w * t, w.abs() * dt))
            })
            .collect::<Result<_>>()?;
        let mut acc = CompensatedSum::new();
        let mut err = T::zero();
        for (t, e) in terms {
            acc.add(t);
            err += e;
        }
        let scale = T::from_usize_exact(m);
        let value = scale * acc.value();
        Ok(SumsReport {
            value,
            n_terms: tasks.len() as u64,
            method: SumMethod::Reordered,
            error_estimate: scale * err + T::lit(4.0) * T::epsilon() * value.abs(),
            warning: None,
        })
    }
}

fn direct_chart<T: Scalar>(space: &SpaceDescriptor<T>) -> bool {
    space.is_rotation_invariant_chart()
}

/// Height window of a cylinder-like space in its own height coordinate.
fn height_window<T: Scalar>(space: &SpaceDescriptor<T>) -> Option<Interval<T>> {
    match space {
        SpaceDescriptor::Cylinder {
            height_interval, ..
        } => Some(*height_interval),
        SpaceDescriptor::Revolution { z_interval, .. } => Some(*z_interval),
        SpaceDescriptor::Scaled { base, .. } if base.is_rotation_invariant_chart() => {
            height_window(base)
        }
        _ => space.cylinder_chart().map(|c| c.window),
    }
}

/// Stacked-circle witness of the given parameters on the cylinder of
/// perimeter 1, heights `k·N^{−γ}` for `k < ⌊N^β⌋`.
pub fn paper_configuration<T: Scalar>(params: &WitnessParams<T>) -> Result<PointConfig<T>> {
    params.validate()?;
    let layout = MultiCircle {
        quarter: params.n,
        circles: params.circles(),
        base: T::zero(),
        spacing: params.spacing(),
    };
    let top = layout.top().max(layout.spacing);
    let space = SpaceDescriptor::cylinder(T::one() / T::TAU(), T::zero(), top);
    layout.config(&space)
}

/// `Q′_N`: the stacked-circle form evaluated with the distance of `space`,
/// starting at the bottom of its height window.
pub fn perturbed_q_n<T: Scalar>(
    space: &SpaceDescriptor<T>,
    params: &WitnessParams<T>,
    opts: &DistanceOptions,
) -> Result<SumsReport<T>> {
    params.validate()?;
    space.validate()?;
    let window = height_window(space).ok_or_else(|| {
        Error::Unsupported(
            "perturbed Q_N needs a cylinder-like space with an (angle, height) chart".into(),
        )
    })?;
    let layout = MultiCircle {
        quarter: params.n,
        circles: params.circles(),
        base: window.lo(),
        spacing: params.spacing(),
    };
    if !window.contains(layout.top()) {
        return Err(Error::OutOfRange(format!(
            "top circle at height {} leaves the window [{}, {}]",
            layout.top(),
            window.lo(),
            window.hi()
        )));
    }
    let mut r = layout.quad_form(space, params.h, opts)?;
    if layout.circles == 1 {
        r.warning = Some("degenerate configuration: floor(N^beta) = 1".into());
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CrossoverSample<T> {
    #[serde(rename = "N")]
    pub n: usize,
    pub value: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Crossover<T> {
    /// Smallest `N` found with `Q_N > 0` (exponential scan, then bisection).
    pub n0: Option<usize>,
    pub samples: Vec<CrossoverSample<T>>,
}

/// Scans `N = 2^k ≤ max_n` until `Q_N > 0`, then bisects between the last
/// two powers. `Q_N` is not monotone in `N` (the circle count is a floor),
/// so `n0` is a crossing, not a certificate that all larger `N` are
/// positive.
pub fn crossover_scan<T: Scalar>(
    params: &WitnessParams<T>,
    max_n: usize,
    method: SumMethod,
) -> Result<Crossover<T>> {
    let mut samples = Vec::new();
    let eval = |n: usize, samples: &mut Vec<CrossoverSample<T>>| -> Result<T> {
        let p = WitnessParams { n, ..*params };
        let v = super::q_n_multi(&p, method)?.value;
        samples.push(CrossoverSample { n, value: v });
        Ok(v)
    };
    let mut prev = 0usize;
    let mut n = 1usize;
    while n <= max_n {
        if eval(n, &mut samples)? > T::zero() {
            let (mut lo, mut hi) = (prev, n);
            while lo > 0 && hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if eval(mid, &mut samples)? > T::zero() {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(Crossover {
                n0: Some(hi),
                samples,
            });
        }
        prev = n;
        n = match n.checked_mul(2) {
            Some(v) => v,
            None => break,
        };
    }
    Ok(Crossover { n0: None, samples })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CylinderWitness<T> {
    pub layout: MultiCircle<T>,
    /// Closed-form `Σ cᵢcⱼ d^{2H}` on the flat cylinder.
    pub value: T,
    pub error_estimate: T,
}

/// Searches stacked-circle layouts that fit strictly inside a cylinder of
/// the given radius and height window: `n` circles at spacing `L/(n+1)`,
/// `N` and `n` powers of two with `4Nn ≤ max_points`, fewest points first.
/// Returns the first layout whose flat form is positive beyond its error.
pub fn cylinder_witness_search<T: Scalar>(
    h: T,
    radius: T,
    window: Interval<T>,
    max_points: usize,
) -> Result<Option<CylinderWitness<T>>> {
    if !(radius > T::zero()) || !(window.len() > T::zero()) {
        return invalid("cylinder witness search needs a positive radius and a nonempty window");
    }
    let mut shapes = Vec::new();
    let mut quarter = 1usize;
    while 8 * quarter <= max_points {
        let mut circles = 2usize;
        while 4 * quarter * circles <= max_points {
            shapes.push((quarter, circles));
            circles *= 2;
        }
        quarter *= 2;
    }
    shapes.sort_by_key(|&(q, c)| (q * c, q));
    for (quarter, circles) in shapes {
        let spacing = window.len() / T::from_usize_exact(circles + 1);
        let layout = MultiCircle {
            quarter,
            circles,
            base: window.lo() + spacing,
            spacing,
        };
        let r = layout.flat_form(h, radius, SumMethod::Asymptotic)?;
        if r.value > r.error_estimate {
            return Ok(Some(CylinderWitness {
                layout,
                value: r.value,
                error_estimate: r.error_estimate,
            }));
        }
    }
    Ok(None)
}

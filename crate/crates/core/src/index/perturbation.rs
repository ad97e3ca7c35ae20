//! `Δ(h) = sup |d′ − d|` over pairs below height `h`, where `d` is the flat
//! cylinder with the radius of the base parallel, and the exponent `δ` with
//! `Δ(h) = O(h^δ)`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::fit_power_law;
use crate::error::{invalid, Error, Result};
use crate::metric::{revolution_distance, DistanceOptions, Interval, Point, SpaceDescriptor};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PerturbationOptions {
    /// Largest level; defaults to the window length.
    pub h0: Option<f64>,
    /// Levels `h₀·2^{−k}` for `k < levels`.
    pub levels: usize,
    pub pair_samples: usize,
    pub seed: u64,
    pub distance: DistanceOptions,
}

impl Default for PerturbationOptions {
    fn default() -> Self {
        Self {
            h0: None,
            levels: 11,
            pair_samples: 500,
            seed: 0,
            distance: DistanceOptions {
                tol: 1e-12,
                ..Default::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PerturbationReport<T> {
    pub h_samples: Vec<T>,
    pub delta_h: Vec<T>,
    /// Largest solver error estimate among the pairs of each level.
    pub noise: Vec<T>,
    /// Fitted `δ`; `None` when `Δ` vanishes or decays faster than any power.
    pub delta_exponent: Option<T>,
    /// Levels that entered the fit.
    pub used_levels: usize,
    pub fit_residual: Option<T>,
    /// `3/(δ+1)`, or 0 when `δ` is infinite.
    pub bound: T,
    /// `"infinite"`, `"superpolynomial"`, `"uninformative"` (`δ ≤ 2`) or `"ok"`.
    pub status: String,
}

/// The flat cylinder `d` is compared against, in the same coordinates.
fn comparison<T: Scalar>(space: &SpaceDescriptor<T>) -> Result<(SpaceDescriptor<T>, Interval<T>)> {
    match space {
        SpaceDescriptor::Cylinder {
            height_interval, ..
        } => Ok((space.clone(), *height_interval)),
        SpaceDescriptor::Revolution {
            profile,
            z_interval,
        } => Ok((
            SpaceDescriptor::Cylinder {
                radius: profile.radius(z_interval.lo()),
                height_interval: *z_interval,
            },
            *z_interval,
        )),
        SpaceDescriptor::Scaled { base, lambda } => {
            let (c, w) = comparison(base)?;
            Ok((SpaceDescriptor::scaled(c, *lambda), w))
        }
        _ => Err(Error::Unsupported(
            "perturbation needs a cylinder, a surface of revolution, or a rescaling of one".into(),
        )),
    }
}

/// Distance with the solver's own absolute error estimate.
fn distance_with_error<T: Scalar>(
    space: &SpaceDescriptor<T>,
    p: &Point<T>,
    q: &Point<T>,
    opts: &DistanceOptions,
) -> Result<(T, T)> {
    match space {
        SpaceDescriptor::Revolution {
            profile,
            z_interval,
        } => {
            let s = revolution_distance(profile, *z_interval, p, q, opts)?;
            Ok((s.length, s.error_estimate))
        }
        SpaceDescriptor::Scaled { base, lambda } => {
            let (d, e) = distance_with_error(base, p, q, opts)?;
            Ok((d * *lambda, e * *lambda))
        }
        _ => {
            let d = space.distance(p, q, opts)?;
            Ok((d, T::lit(4.0) * T::epsilon() * d))
        }
    }
}

/// Estimates `Δ(h)` on a geometric grid of levels and fits `δ`.
///
/// Each level combines deterministic extreme pairs (antipodal on the top
/// parallel, antipodal between top and base) with `pair_samples` uniform
/// ones. Levels whose `Δ` does not clear 8× the solver noise are left out
/// of the fit. A decay faster than any power shows up as local slopes that
/// keep growing like `1/h`; it is reported as `δ = ∞`.
pub fn perturbation_delta<T: Scalar>(
    space: &SpaceDescriptor<T>,
    opts: &PerturbationOptions,
) -> Result<PerturbationReport<T>> {
    space.validate()?;
    let (flat, window) = comparison(space)?;
    if opts.levels < 3 {
        return invalid("need at least 3 height levels");
    }
    let h0 = match opts.h0 {
        Some(h) if h > 0.0 => T::lit(h).min(window.len()),
        Some(h) => return invalid(format!("h0 must be positive, got {h}")),
        None => window.len(),
    };
    let hs: Vec<T> = (0..opts.levels)
        .map(|k| h0 * T::lit(0.5f64.powi(k as i32)))
        .collect();
    let lo = window.lo();
    let per_level: Vec<(T, T)> = hs
        .par_iter()
        .enumerate()
        .map(|(k, &h)| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(k as u64));
            let top = lo + h;
            let pi = T::PI();
            let mut pairs = vec![
                ((T::zero(), top), (pi, top)),
                ((T::zero(), top), (pi, lo)),
                ((T::zero(), lo), (pi, lo)),
            ];
            for _ in 0..opts.pair_samples {
                let mut pt = || {
                    (
                        T::lit(rng.gen::<f64>()) * T::TAU(),
                        lo + h * T::lit(rng.gen::<f64>()),
                    )
                };
                pairs.push((pt(), pt()));
            }
            let mut worst = T::zero();
            let mut noise = T::zero();
            for ((t1, z1), (t2, z2)) in pairs {
                let p = space.point(vec![t1, z1])?;
                let q = space.point(vec![t2, z2])?;
                let (d1, e1) = distance_with_error(space, &p, &q, &opts.distance)?;
                let (d0, e0) = distance_with_error(&flat, &p, &q, &opts.distance)?;
                worst = worst.max((d1 - d0).abs());
                noise = noise.max(e1 + e0);
            }
            Ok((worst, noise))
        })
        .collect::<Result<_>>()?;
    let delta_h: Vec<T> = per_level.iter().map(|v| v.0).collect();
    let noise: Vec<T> = per_level.iter().map(|v| v.1).collect();
    let mut report = PerturbationReport {
        h_samples: hs.clone(),
        delta_h: delta_h.clone(),
        noise: noise.clone(),
        delta_exponent: None,
        used_levels: 0,
        fit_residual: None,
        bound: T::zero(),
        status: String::new(),
    };
    if delta_h.iter().all(|d| *d == T::zero()) {
        report.status = "infinite".into();
        return Ok(report);
    }
    let (xs, ys): (Vec<T>, Vec<T>) = hs
        .iter()
        .zip(delta_h.iter().zip(&noise))
        .filter(|(_, (d, e))| **d > T::lit(8.0) * **e && **d > T::zero())
        .map(|(h, (d, _))| (*h, *d))
        .unzip();
    report.used_levels = xs.len();
    if xs.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "only {} height levels rise above the distance noise",
            xs.len()
        )));
    }
    // xs decreasing: local slope between consecutive levels
    let slopes: Vec<T> = xs
        .windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| (y[0] / y[1]).ln() / (x[0] / x[1]).ln())
        .collect();
    let growing = slopes.len() >= 3
        && slopes[slopes.len() - 3..]
            .windows(2)
            .all(|s| s[1] > T::lit(1.5) * s[0] && s[0] > T::zero());
    if growing {
        report.status = "superpolynomial".into();
        return Ok(report);
    }
    let fit = fit_power_law(&xs, &ys)?;
    let delta = fit.exponent;
    report.delta_exponent = Some(delta);
    report.fit_residual = Some(fit.residual);
    report.bound = T::lit(3.0) / (delta + T::one());
    report.status = if delta <= T::lit(2.0) {
        "uninformative"
    } else {
        "ok"
    }
    .into();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::RevolutionProfile;

    fn opts(pairs: usize) -> PerturbationOptions {
        PerturbationOptions {
            pair_samples: pairs,
            ..Default::default()
        }
    }

    #[test]
    fn exact_cylinder_is_unperturbed() {
        for seed in [0, 7] {
            let cyl = SpaceDescriptor::cylinder(0.4f64, 0.0, 1.0);
            let r = perturbation_delta(&cyl, &PerturbationOptions { seed, ..opts(50) }).unwrap();
            assert!(r.delta_h.iter().all(|d| *d == 0.0));
            assert_eq!(r.status, "infinite");
            assert_eq!(r.bound, 0.0);
            let scaled = SpaceDescriptor::scaled(cyl, 2.5);
            let r = perturbation_delta(&scaled, &opts(20)).unwrap();
            assert!(r.delta_h.iter().all(|d| *d == 0.0));
        }
    }

    #[test]
    fn non_cylinder_like_is_unsupported() {
        assert!(matches!(
            perturbation_delta(&SpaceDescriptor::circle(1.0f64), &opts(5)),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn power_profile_decays_like_h_to_the_p() {
        // r² − 1 ~ 2h⁶ pushes d′ − d to order h⁶, twice the guaranteed p/2
        let s = SpaceDescriptor::revolution(RevolutionProfile::power(1.0f64, 6.0), 0.0, 1.0);
        let r = perturbation_delta(&s, &opts(100)).unwrap();
        let d = r.delta_exponent.unwrap();
        assert!((5.0..6.5).contains(&d), "{d}");
        assert_eq!(r.status, "ok");
        assert!((r.bound - 3.0 / (d + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn flat_exponential_beats_every_power() {
        let s = SpaceDescriptor::revolution(RevolutionProfile::FlatExponential, 0.0f64, 1.0);
        let r = perturbation_delta(&s, &opts(100)).unwrap();
        assert_eq!(r.status, "superpolynomial");
        assert_eq!(r.delta_exponent, None);
        assert_eq!(r.bound, 0.0);
    }
}

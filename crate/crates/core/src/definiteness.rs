//! Kernel Gram matrices and (negative/positive) definiteness verdicts.
//!
//! A kernel here is `F(d^{2H})` with `F` the identity or `exp(−λ·)`.
//! `d^{2H}` is negative definite on a space iff every zero-sum quadratic
//! form `Σ cᵢcⱼ d(xᵢ,xⱼ)^{2H}` is `≤ 0`, i.e. iff the Gram matrix is
//! negative semidefinite on the hyperplane `Σ cᵢ = 0`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{jacobi_eigen, JacobiOptions, SymMatrix};
use crate::metric::{DistanceOptions, Point, SpaceDescriptor};
use crate::scalar::{pow_nonneg, Scalar};
use crate::summation::{pairwise_sum, CompensatedSum};

/// Completely monotone map applied to `d^{2H}`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Scalar")]
pub enum Transform<T> {
    #[default]
    None,
    ExpNeg {
        lambda: T,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct KernelSpec<T> {
    #[serde(rename = "H")]
    pub h: T,
    #[serde(default)]
    pub transform: Transform<T>,
}

impl<T: Scalar> KernelSpec<T> {
    /// The pure power kernel `d^{2H}`.
    pub fn power(h: T) -> Self {
        Self {
            h,
            transform: Transform::None,
        }
    }

    /// `exp(−λ·d^{2H})`.
    pub fn exp_neg(h: T, lambda: T) -> Self {
        Self {
            h,
            transform: Transform::ExpNeg { lambda },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > T::zero()) || !self.h.is_finite() {
            return invalid(format!(
                "kernel exponent H must be positive, got {}",
                self.h
            ));
        }
        if let Transform::ExpNeg { lambda } = self.transform {
            if !(lambda > T::zero()) || !lambda.is_finite() {
                return invalid(format!("exp_neg rate must be positive, got {lambda}"));
            }
        }
        Ok(())
    }

    pub fn is_pure_power(&self) -> bool {
        matches!(self.transform, Transform::None)
    }

    /// Kernel value at distance `d`.
    #[inline]
    pub fn apply(&self, d: T) -> T {
        let p = pow_nonneg(d, self.h + self.h);
        match self.transform {
            Transform::None => p,
            Transform::ExpNeg { lambda } => (-lambda * p).exp(),
        }
    }
}

/// Points of a space with one real coefficient each.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PointConfig<T> {
    pub space: SpaceDescriptor<T>,
    pub points: Vec<Point<T>>,
    pub coeffs: Vec<T>,
}

impl<T: Scalar> PointConfig<T> {
    /// Checks `|points| = |coeffs| ≥ 2`, point shapes, and (if asked) the
    /// zero-sum condition `|Σc| ≤ 1e−12·Σ|c|`.
    pub fn validate(&self, require_zero_sum: bool) -> Result<()> {
        if self.points.len() != self.coeffs.len() {
            return invalid(format!(
                "{} points but {} coefficients",
                self.points.len(),
                self.coeffs.len()
            ));
        }
        if self.points.len() < 2 {
            return invalid("a configuration needs at least two points");
        }
        let arity = self.space.arity();
        if let Some(p) = self.points.iter().find(|p| p.coords.len() != arity) {
            return invalid(format!(
                "point {:?} does not match space arity {arity}",
                p.coords
            ));
        }
        if self.coeffs.iter().any(|c| !c.is_finite()) {
            return invalid("coefficients must be finite");
        }
        if require_zero_sum {
            let sum = pairwise_sum(&self.coeffs);
            let abs: Vec<T> = self.coeffs.iter().map(|c| c.abs()).collect();
            let scale = pairwise_sum(&abs);
            if sum.abs() > T::lit(1e-12) * scale {
                return invalid(format!(
                    "coefficients sum to {sum}, expected 0 (scale {scale})"
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    NegativeDefiniteUpToTol,
    Violated,
    PositiveDefiniteUpToTol,
    /// The spectrum fails the test but the extracted witness does not
    /// confirm it with a form of the offending sign.
    Indefinite,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Witness<T> {
    pub config: PointConfig<T>,
    pub quad_form: T,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DefinitenessVerdict<T> {
    pub verdict: Verdict,
    /// Largest eigenvalue of `PMP` (ND test) or smallest of `M` (PD test).
    pub extreme_eigenvalue: T,
    /// `tol·‖·‖_F` of the tested matrix.
    pub threshold: T,
    pub frobenius_norm: T,
    pub tol: f64,
    pub sweeps: usize,
    pub witness: Option<Witness<T>>,
}

fn check_points<T: Scalar>(space: &SpaceDescriptor<T>, points: &[Point<T>]) -> Result<()> {
    let arity = space.arity();
    for p in points {
        if p.coords.len() != arity {
            return invalid(format!(
                "point {:?} does not match space arity {arity}",
                p.coords
            ));
        }
    }
    Ok(())
}

/// All pairwise distances, upper triangle computed in parallel by rows.
pub fn distance_matrix<T: Scalar>(
    space: &SpaceDescriptor<T>,
    points: &[Point<T>],
    opts: &DistanceOptions,
) -> Result<SymMatrix<T>> {
    check_points(space, points)?;
    let n = points.len();
    let rows: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| space.distance(&points[i], &points[j], opts))
                .collect::<Result<Vec<T>>>()
        })
        .collect::<Result<_>>()?;
    let mut data = vec![T::zero(); n * n];
    for (i, row) in rows.into_iter().enumerate() {
        for (k, d) in row.into_iter().enumerate() {
            let j = i + 1 + k;
            data[i * n + j] = d;
            data[j * n + i] = d;
        }
    }
    Ok(SymMatrix::from_parts(n, data))
}

/// Gram matrix `[F(d(xᵢ,xⱼ)^{2H})]`.
pub fn build_gram<T: Scalar>(
    space: &SpaceDescriptor<T>,
    points: &[Point<T>],
    kernel: &KernelSpec<T>,
) -> Result<SymMatrix<T>> {
    build_gram_with(space, points, kernel, &DistanceOptions::default())
}

pub fn build_gram_with<T: Scalar>(
    space: &SpaceDescriptor<T>,
    points: &[Point<T>],
    kernel: &KernelSpec<T>,
    opts: &DistanceOptions,
) -> Result<SymMatrix<T>> {
    kernel.validate()?;
    if points.is_empty() {
        return invalid("Gram matrix needs at least one point");
    }
    let d = distance_matrix(space, points, opts)?;
    let n = points.len();
    let f0 = kernel.apply(T::zero());
    Ok(SymMatrix::from_upper(n, |i, j| {
        if i == j {
            f0
        } else {
            kernel.apply(d.get(i, j))
        }
    }))
}

/// `Σᵢⱼ cᵢcⱼ F(d(xᵢ,xⱼ)^{2H})` with compensated row sums.
///
/// With `require_zero_sum` and a pure power kernel the coefficients must sum
/// to zero (negative-definiteness semantics).
pub fn quad_form<T: Scalar>(
    config: &PointConfig<T>,
    kernel: &KernelSpec<T>,
    require_zero_sum: bool,
) -> Result<T> {
    quad_form_with(
        config,
        kernel,
        require_zero_sum,
        &DistanceOptions::default(),
    )
}

pub fn quad_form_with<T: Scalar>(
    config: &PointConfig<T>,
    kernel: &KernelSpec<T>,
    require_zero_sum: bool,
    opts: &DistanceOptions,
) -> Result<T> {
    kernel.validate()?;
    config.validate(require_zero_sum && kernel.is_pure_power())?;
    let (pts, c) = (&config.points, &config.coeffs);
    let n = pts.len();
    let rows: Vec<T> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = CompensatedSum::new();
            for j in i + 1..n {
                let d = config.space.distance(&pts[i], &pts[j], opts)?;
                acc.add(c[j] * kernel.apply(d));
            }
            Ok(c[i] * acc.value())
        })
        .collect::<Result<_>>()?;
    let off = pairwise_sum(&rows);
    let f0 = kernel.apply(T::zero());
    let diag = if f0 == T::zero() {
        T::zero()
    } else {
        let sq: Vec<T> = c.iter().map(|&x| x * x * f0).collect();
        pairwise_sum(&sq)
    };
    Ok(off + off + diag)
}

/// Eigenvector → printable witness coefficients: unit max-norm, then the
/// mean subtracted so that the sum is zero again.
pub fn normalize_witness<T: Scalar>(v: &[T], zero_sum: bool) -> Vec<T> {
    let m = v.iter().fold(T::zero(), |a, x| a.max(x.abs()));
    let mut out: Vec<T> = if m > T::zero() {
        v.iter().map(|&x| x / m).collect()
    } else {
        v.to_vec()
    };
    if zero_sum && !out.is_empty() {
        let mean = pairwise_sum(&out) / T::from_usize_exact(out.len());
        for x in &mut out {
            *x -= mean;
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub struct TestOptions {
    pub tol: f64,
    pub jacobi: JacobiOptions,
}

impl Default for TestOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            jacobi: JacobiOptions::default(),
        }
    }
}

/// Negative-definiteness test of `F(d^{2H})` on the given points: the
/// largest eigenvalue of `PMP` must not exceed `tol·‖PMP‖_F`.
pub fn nd_test<T: Scalar>(
    space: &SpaceDescriptor<T>,
    points: &[Point<T>],
    kernel: &KernelSpec<T>,
    tol: f64,
) -> Result<DefinitenessVerdict<T>> {
    nd_test_with(
        space,
        points,
        kernel,
        &TestOptions {
            tol,
            ..Default::default()
        },
        &DistanceOptions::default(),
    )
}

pub fn nd_test_with<T: Scalar>(
    space: &SpaceDescriptor<T>,
    points: &[Point<T>],
    kernel: &KernelSpec<T>,
    opts: &TestOptions,
    dopts: &DistanceOptions,
) -> Result<DefinitenessVerdict<T>> {
    if points.len() < 2 {
        return invalid("nd_test needs at least two points");
    }
    let m = build_gram_with(space, points, kernel, dopts)?;
    nd_test_matrix(space, points, kernel, &m, opts, dopts)
}

/// [`nd_test`] on a precomputed Gram matrix.
pub fn nd_test_matrix<T: Scalar>(
    space: &SpaceDescriptor<T>,
    points: &[Point<T>],
    kernel: &KernelSpec<T>,
    gram: &SymMatrix<T>,
    opts: &TestOptions,
    dopts: &DistanceOptions,
) -> Result<DefinitenessVerdict<T>> {
    let pmp = gram.project_zero_sum();
    let norm = pmp.frobenius_norm();
    let eig = jacobi_eigen(&pmp, opts.jacobi)?;
    let (top, vec) = eig
        .max()
        .ok_or_else(|| Error::InvalidArgument("empty matrix".into()))?;
    let threshold = T::lit(opts.tol) * norm;
    let mut out = DefinitenessVerdict {
        verdict: Verdict::NegativeDefiniteUpToTol,
        extreme_eigenvalue: top,
        threshold,
        frobenius_norm: norm,
        tol: opts.tol,
        sweeps: eig.sweeps,
        witness: None,
    };
    if top > threshold {
        let coeffs = normalize_witness(vec, true);
        let config = PointConfig {
            space: space.clone(),
            points: points.to_vec(),
            coeffs,
        };
        let q = quad_form_with(&config, kernel, false, dopts)?;
        out.verdict = if q > T::zero() {
            Verdict::Violated
        } else {
            Verdict::Indefinite
        };
        out.witness = Some(Witness {
            config,
            quad_form: q,
        });
    }
    Ok(out)
}

/// Positive-definiteness test: the smallest eigenvalue of `M` must be at
/// least `−tol·‖M‖_F`.
pub fn pd_test<T: Scalar>(
    space: &SpaceDescriptor<T>,
    points: &[Point<T>],
    kernel: &KernelSpec<T>,
    tol: f64,
) -> Result<DefinitenessVerdict<T>> {
    let opts = TestOptions {
        tol,
        ..Default::default()
    };
    let dopts = DistanceOptions::default();
    let m = build_gram_with(space, points, kernel, &dopts)?;
    let norm = m.frobenius_norm();
    let eig = jacobi_eigen(&m, opts.jacobi)?;
    let (low, vec) = eig
        .min()
        .ok_or_else(|| Error::InvalidArgument("empty matrix".into()))?;
    let threshold = T::lit(tol) * norm;
    let mut out = DefinitenessVerdict {
        verdict: Verdict::PositiveDefiniteUpToTol,
        extreme_eigenvalue: low,
        threshold,
        frobenius_norm: norm,
        tol,
        sweeps: eig.sweeps,
        witness: None,
    };
    if low < -threshold {
        let coeffs = normalize_witness(vec, false);
        let q = m.quadratic_form(&coeffs);
        out.verdict = if q < T::zero() {
            Verdict::Violated
        } else {
            Verdict::Indefinite
        };
        out.witness = Some(Witness {
            config: PointConfig {
                space: space.clone(),
                points: points.to_vec(),
                coeffs,
            },
            quad_form: q,
        });
    }
    Ok(out)
}

/// Covariance `½(d^{2H}(O,x) + d^{2H}(O,y) − d^{2H}(x,y))` of the field
/// with `X_O = 0`.
pub fn fbm_covariance<T: Scalar>(
    space: &SpaceDescriptor<T>,
    origin: &Point<T>,
    h: T,
    points: &[Point<T>],
) -> Result<SymMatrix<T>> {
    let kernel = KernelSpec::power(h);
    kernel.validate()?;
    check_points(space, std::slice::from_ref(origin))?;
    let mut all = Vec::with_capacity(points.len() + 1);
    all.push(origin.clone());
    all.extend_from_slice(points);
    let d = distance_matrix(space, &all, &DistanceOptions::default())?;
    let v = |i: usize, j: usize| kernel.apply(d.get(i, j));
    let half = T::lit(0.5);
    Ok(SymMatrix::from_upper(points.len(), |i, j| {
        half * (v(0, i + 1) + v(0, j + 1) - v(i + 1, j + 1))
    }))
}

/// Random hunt for a positive zero-sum form: `trials` uniform configurations
/// of `n` points, each weighted by the top eigenvector of its projected
/// Gram matrix. Returns the best one if its form is positive.
pub fn random_config_search<T: Scalar>(
    space: &SpaceDescriptor<T>,
    kernel: &KernelSpec<T>,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<Option<(PointConfig<T>, T)>> {
    if n < 2 {
        return invalid("random_config_search needs n >= 2");
    }
    kernel.validate()?;
    space.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let configs: Vec<Vec<Point<T>>> = (0..trials)
        .map(|_| (0..n).map(|_| space.sample_point(&mut rng)).collect())
        .collect();
    let dopts = DistanceOptions::default();
    let opts = TestOptions::default();
    let results: Vec<Option<(PointConfig<T>, T)>> = configs
        .into_par_iter()
        .map(|points| {
            let m = build_gram_with(space, &points, kernel, &dopts)?;
            let pmp = m.project_zero_sum();
            let eig = jacobi_eigen(&pmp, opts.jacobi)?;
            let Some((top, vec)) = eig.max() else {
                return Ok(None);
            };
            // below the spectral tolerance the eigenvector is noise
            if !(top > T::lit(opts.tol) * pmp.frobenius_norm()) {
                return Ok(None);
            }
            let coeffs = normalize_witness(vec, true);
            let q = m.quadratic_form(&coeffs);
            Ok(Some((
                PointConfig {
                    space: space.clone(),
                    points,
                    coeffs,
                },
                q,
            )))
        })
        .collect::<Result<_>>()?;
    let best = results
        .into_iter()
        .flatten()
        .filter(|(_, q)| *q > T::zero())
        .fold(None::<(PointConfig<T>, T)>, |acc, c| match acc {
            Some(a) if a.1 >= c.1 => Some(a),
            _ => Some(c),
        });
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn circle_pts(n: usize) -> Vec<Point<f64>> {
        (0..n)
            .map(|i| Point::raw(vec![2.0 * PI * i as f64 / n as f64]))
            .collect()
    }

    #[test]
    fn gram_examples() {
        let c = SpaceDescriptor::circle(1.0);
        let one = build_gram(&c, &[Point::raw(vec![0.3])], &KernelSpec::power(0.5)).unwrap();
        assert_eq!(one.rows(), vec![vec![0.0]]);
        let pts = vec![Point::raw(vec![0.0]), Point::raw(vec![PI])];
        let g = build_gram(&c, &pts, &KernelSpec::power(0.5)).unwrap();
        assert_eq!(g.get(0, 0), 0.0);
        assert!((g.get(0, 1) - PI).abs() < 1e-15);
        let g = build_gram(&c, &pts, &KernelSpec::exp_neg(0.5, 1.0)).unwrap();
        assert_eq!(g.get(0, 0), 1.0);
        assert!((g.get(1, 0) - (-PI).exp()).abs() < 1e-15);
        assert_eq!(
            build_gram(&c, &[Point::raw(vec![0.0, 1.0])], &KernelSpec::power(0.5))
                .unwrap_err()
                .kind(),
            "invalid-argument"
        );
    }

    #[test]
    fn four_point_alternating_form() {
        let c = SpaceDescriptor::circle(1.0 / (2.0 * PI));
        let cfg = PointConfig {
            space: c,
            points: circle_pts(4),
            coeffs: vec![1.0, -1.0, 1.0, -1.0],
        };
        let q = quad_form(&cfg, &KernelSpec::power(0.25), true).unwrap();
        let expect = -8.0 * 0.25_f64.sqrt() + 4.0 * 0.5_f64.sqrt();
        assert!((q - expect).abs() < 1e-14, "{q}");
        assert!((q + 1.171_572_875_253_809_9).abs() < 1e-12);
    }

    #[test]
    fn equal_points_and_zero_sum_checks() {
        let e = SpaceDescriptor::euclidean(2);
        let p = Point::raw(vec![0.5, 0.5]);
        let cfg = PointConfig {
            space: e.clone(),
            points: vec![p.clone(), p.clone(), p],
            coeffs: vec![1.0, 2.0, -3.0],
        };
        assert_eq!(quad_form(&cfg, &KernelSpec::power(0.7), true).unwrap(), 0.0);
        let bad = PointConfig {
            coeffs: vec![1.0, 2.0, -2.0],
            ..cfg
        };
        assert_eq!(
            quad_form(&bad, &KernelSpec::power(0.7), true)
                .unwrap_err()
                .kind(),
            "invalid-argument"
        );
        assert!(quad_form(&bad, &KernelSpec::power(0.7), false).is_ok());
        assert!(quad_form(&bad, &KernelSpec::exp_neg(0.7, 1.0), true).is_ok());
    }

    #[test]
    fn equidistant_identity() {
        // regular simplex in R^3: all distances equal
        let e = SpaceDescriptor::euclidean(3);
        let pts: Vec<_> = (0..3)
            .map(|i| {
                let mut v = vec![0.0; 3];
                v[i] = 1.0;
                Point::raw(v)
            })
            .collect();
        let coeffs = vec![0.3, -1.2, 2.5];
        let cfg = PointConfig {
            space: e,
            points: pts,
            coeffs: coeffs.clone(),
        };
        let h = 0.35;
        let c = 2.0_f64.sqrt().powf(2.0 * h);
        let s: f64 = coeffs.iter().sum();
        let s2: f64 = coeffs.iter().map(|x| x * x).sum();
        let q = quad_form(&cfg, &KernelSpec::power(h), false).unwrap();
        assert!((q - (s * s * c - c * s2)).abs() < 1e-13);
    }

    #[test]
    fn nd_examples() {
        let c = SpaceDescriptor::circle(1.0);
        let pts = circle_pts(32);
        let v = nd_test(&c, &pts, &KernelSpec::power(0.5), 1e-9).unwrap();
        assert_eq!(v.verdict, Verdict::NegativeDefiniteUpToTol);
        let v = nd_test(&c, &pts, &KernelSpec::power(0.75), 1e-9).unwrap();
        assert_eq!(v.verdict, Verdict::Violated);
        let w = v.witness.unwrap();
        assert!(w.quad_form > 0.0);
        let s: f64 = w.config.coeffs.iter().sum();
        assert!(s.abs() < 1e-12);
        assert!(nd_test(&c, &pts[..1], &KernelSpec::power(0.5), 1e-9).is_err());
    }

    #[test]
    fn pd_examples() {
        let c = SpaceDescriptor::circle(1.0);
        let v = pd_test(&c, &circle_pts(16), &KernelSpec::exp_neg(0.5, 1.0), 1e-9).unwrap();
        assert_eq!(v.verdict, Verdict::PositiveDefiniteUpToTol);
        let v = pd_test(&c, &circle_pts(1), &KernelSpec::exp_neg(0.5, 1.0), 1e-9).unwrap();
        assert_eq!(v.verdict, Verdict::PositiveDefiniteUpToTol);
    }

    #[test]
    fn fbm_covariance_examples() {
        let c = SpaceDescriptor::circle(1.0);
        let o = Point::raw(vec![0.0]);
        let m = fbm_covariance(
            &c,
            &o,
            0.5,
            &[Point::raw(vec![PI / 2.0]), Point::raw(vec![PI])],
        )
        .unwrap();
        assert!((m.get(0, 1) - PI / 2.0).abs() < 1e-15);
        let m = fbm_covariance(&c, &o, 0.5, &[o.clone()]).unwrap();
        assert_eq!(m.get(0, 0), 0.0);
        let e = SpaceDescriptor::euclidean(1);
        let t = 1.7_f64;
        let m = fbm_covariance(
            &e,
            &Point::raw(vec![0.0]),
            0.3,
            &[Point::raw(vec![t]), Point::raw(vec![t])],
        )
        .unwrap();
        assert!((m.get(0, 1) - t.powf(0.6)).abs() < 1e-14);
    }

    #[test]
    fn random_search_examples() {
        let e = SpaceDescriptor::euclidean(1);
        assert!(random_config_search(&e, &KernelSpec::power(0.5), 8, 20, 1)
            .unwrap()
            .is_none());
        let c = SpaceDescriptor::circle(1.0);
        assert!(random_config_search(&c, &KernelSpec::power(0.75), 2, 20, 1)
            .unwrap()
            .is_none());
        let a = random_config_search(&c, &KernelSpec::power(0.75), 16, 100, 9).unwrap();
        let b = random_config_search(&c, &KernelSpec::power(0.75), 16, 100, 9).unwrap();
        let (cfg, q): (PointConfig<f64>, f64) = a.expect("violation on the circle at 2H = 1.5");
        assert!(q > 0.0);
        assert_eq!(b.unwrap().1, q);
        let direct = quad_form(&cfg, &KernelSpec::power(0.75), true).unwrap();
        assert!((direct - q).abs() <= 1e-9 * q.abs().max(1.0));
    }
}

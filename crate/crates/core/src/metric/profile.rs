//! Generating functions `r(z)` of surfaces of revolution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Radius of the parallel at height `z` on a surface of revolution
/// `(θ, z) ↦ (r(z)cos θ, r(z)sin θ, z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Scalar")]
pub enum RevolutionProfile<T> {
    /// `r ≡ 1`: the unit cylinder.
    ConstantOne,
    /// `r(z) = 1 + c·z^p` on `z ≥ 0`.
    Power { c: T, p: T },
    /// `r(z) = 1 + exp(−1/z)` on `z > 0`, `r(0) = 1`; flat to every order at 0.
    FlatExponential,
    /// Monotone cubic (PCHIP) interpolation through `(z, r)` samples.
    Tabulated { samples: Vec<(T, T)> },
}

impl<T: Scalar> RevolutionProfile<T> {
    pub fn power(c: T, p: T) -> Self {
        Self::Power { c, p }
    }

    /// Closed interval on which `r` is defined.
    pub fn domain(&self) -> (T, T) {
        match self {
            Self::ConstantOne => (T::neg_infinity(), T::infinity()),
            Self::Power { .. } | Self::FlatExponential => (T::zero(), T::infinity()),
            Self::Tabulated { samples } => (samples[0].0, samples[samples.len() - 1].0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::ConstantOne | Self::FlatExponential => Ok(()),
            Self::Power { c, p } => {
                if !c.is_finite() || !p.is_finite() {
                    return Err(Error::InvalidArgument(
                        "power profile needs finite c, p".into(),
                    ));
                }
                if *p < T::one() {
                    return Err(Error::InvalidArgument(format!(
                        "power profile needs p >= 1, got {p}"
                    )));
                }
                Ok(())
            }
            Self::Tabulated { samples } => {
                if samples.len() < 2 {
                    return Err(Error::InvalidArgument(
                        "tabulated profile needs >= 2 samples".into(),
                    ));
                }
                if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                    return Err(Error::InvalidArgument(
                        "tabulated profile heights must be strictly increasing".into(),
                    ));
                }
                if samples
                    .iter()
                    .any(|s| !(s.1 > T::zero()) || !s.1.is_finite())
                {
                    return Err(Error::InvalidArgument(
                        "tabulated radii must be positive".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Whether `r` is nondecreasing on its domain (the Clairaut solver needs this).
    pub fn is_nondecreasing(&self) -> bool {
        match self {
            Self::ConstantOne | Self::FlatExponential => true,
            Self::Power { c, .. } => *c >= T::zero(),
            Self::Tabulated { samples } => samples.windows(2).all(|w| w[1].1 >= w[0].1),
        }
    }

    pub(crate) fn check_height(&self, z: T) -> Result<()> {
        let (lo, hi) = self.domain();
        if !(z >= lo && z <= hi) {
            return Err(Error::OutOfRange(format!(
                "height {z} outside profile domain [{lo}, {hi}]"
            )));
        }
        Ok(())
    }

    /// `r(z)`; `z` is assumed to be inside the domain.
    pub fn radius(&self, z: T) -> T {
        match self {
            Self::ConstantOne => T::one(),
            Self::Power { c, p } => T::one() + *c * crate::scalar::pow_nonneg(z, *p),
            Self::FlatExponential => {
                if z <= T::zero() {
                    T::one()
                } else {
                    T::one() + (-z.recip()).exp()
                }
            }
            Self::Tabulated { samples } => pchip_eval(samples, z),
        }
    }

    /// `r′(z)`; tabulated profiles use a centred finite difference.
    pub fn derivative(&self, z: T) -> T {
        match self {
            Self::ConstantOne => T::zero(),
            Self::Power { c, p } => {
                if *p == T::one() {
                    *c
                } else {
                    *c * *p * crate::scalar::pow_nonneg(z, *p - T::one())
                }
            }
            Self::FlatExponential => {
                if z <= T::zero() {
                    T::zero()
                } else {
                    (-z.recip()).exp() / (z * z)
                }
            }
            Self::Tabulated { samples } => {
                let (lo, hi) = self.domain();
                let eta = (hi - lo) * T::lit(1e-6);
                let a = (z - eta).max(lo);
                let b = (z + eta).min(hi);
                (pchip_eval(samples, b) - pchip_eval(samples, a)) / (b - a)
            }
        }
    }

    /// `r(z0 + dz) − r(z0)` without the cancellation of the naive difference.
    pub fn rise(&self, z0: T, dz: T) -> T {
        match self {
            Self::ConstantOne => T::zero(),
            Self::Power { c, p } => {
                if z0 <= T::zero() {
                    *c * crate::scalar::pow_nonneg(dz, *p)
                } else {
                    *c * crate::scalar::pow_nonneg(z0, *p) * (*p * (dz / z0).ln_1p()).exp_m1()
                }
            }
            Self::FlatExponential => {
                let z1 = z0 + dz;
                if z0 <= T::zero() {
                    return if z1 <= T::zero() {
                        T::zero()
                    } else {
                        (-z1.recip()).exp()
                    };
                }
                let x = dz / (z0 * z1);
                if x.abs() < T::one() {
                    (-z0.recip()).exp() * x.exp_m1()
                } else {
                    (-z1.recip()).exp() - (-z0.recip()).exp()
                }
            }
            Self::Tabulated { samples } => pchip_eval(samples, z0 + dz) - pchip_eval(samples, z0),
        }
    }

    /// First fundamental form `(E, G) = (r², 1 + r′²)` at height `z`.
    pub fn metric_coeffs(&self, z: T) -> Result<(T, T)> {
        self.check_height(z)?;
        let r = self.radius(z);
        let dr = self.derivative(z);
        Ok((r * r, T::one() + dr * dr))
    }
}

/// Free-function form of [`RevolutionProfile::metric_coeffs`].
pub fn revolution_metric_coeffs<T: Scalar>(profile: &RevolutionProfile<T>, z: T) -> Result<(T, T)> {
    profile.metric_coeffs(z)
}

fn pchip_slope<T: Scalar>(s: &[(T, T)], k: usize) -> T {
    let n = s.len();
    let h = |i: usize| s[i + 1].0 - s[i].0;
    let d = |i: usize| (s[i + 1].1 - s[i].1) / h(i);
    if n == 2 {
        return d(0);
    }
    let three = T::lit(3.0);
    let two = T::lit(2.0);
    let end = |h0: T, h1: T, d0: T, d1: T| {
        let m = ((two * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if m.signum() != d0.signum() || d0 == T::zero() {
            T::zero()
        } else if d0.signum() != d1.signum() && m.abs() > three * d0.abs() {
            three * d0
        } else {
            m
        }
    };
    if k == 0 {
        return end(h(0), h(1), d(0), d(1));
    }
    if k == n - 1 {
        return end(h(n - 2), h(n - 3), d(n - 2), d(n - 3));
    }
    let (d0, d1) = (d(k - 1), d(k));
    if d0 * d1 <= T::zero() {
        return T::zero();
    }
    let (h0, h1) = (h(k - 1), h(k));
    let w1 = two * h1 + h0;
    let w2 = h1 + two * h0;
    (w1 + w2) / (w1 / d0 + w2 / d1)
}

fn pchip_eval<T: Scalar>(s: &[(T, T)], z: T) -> T {
    let n = s.len();
    let z = z.max(s[0].0).min(s[n - 1].0);
    let k = match s.binary_search_by(|p| p.0.partial_cmp(&z).unwrap_or(std::cmp::Ordering::Less)) {
        Ok(i) => return s[i].1,
        Err(i) => i.saturating_sub(1).min(n - 2),
    };
    let (x0, y0) = s[k];
    let (x1, y1) = s[k + 1];
    let h = x1 - x0;
    let t = (z - x0) / h;
    let m0 = pchip_slope(s, k);
    let m1 = pchip_slope(s, k + 1);
    let t2 = t * t;
    let t3 = t2 * t;
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let h00 = two * t3 - three * t2 + T::one();
    let h10 = t3 - two * t2 + t;
    let h01 = three * t2 - two * t3;
    let h11 = t3 - t2;
    h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cylinder_metric_is_euclidean() {
        let p = RevolutionProfile::<f64>::ConstantOne;
        assert_eq!(p.metric_coeffs(0.3).unwrap(), (1.0, 1.0));
        assert_eq!(p.metric_coeffs(-7.0).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn power_metric_direct_evaluation() {
        let p = RevolutionProfile::power(1.0_f64, 6.0);
        let (e, g) = p.metric_coeffs(0.5).unwrap();
        // r = 1 + 0.5^6 = 1.015625, r' = 6·0.5^5 = 0.1875
        assert!((e - 1.015625_f64.powi(2)).abs() < 1e-15);
        assert!((e - 1.031_494_140_625).abs() < 1e-12);
        assert!((g - 1.035_156_25).abs() < 1e-15);
    }

    #[test]
    fn flat_exponential_tends_to_cylinder() {
        let p = RevolutionProfile::<f64>::FlatExponential;
        let (e, g) = p.metric_coeffs(0.01).unwrap();
        assert!((e - 1.0).abs() < 1e-40);
        assert!((g - 1.0).abs() < 1e-40);
        assert_eq!(p.metric_coeffs(0.0).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn out_of_domain_height() {
        let p = RevolutionProfile::power(1.0_f64, 6.0);
        assert_eq!(p.metric_coeffs(-0.1).unwrap_err().kind(), "out-of-range");
    }

    #[test]
    fn rise_matches_difference_where_safe() {
        for prof in [
            RevolutionProfile::power(1.0_f64, 6.0),
            RevolutionProfile::FlatExponential,
            RevolutionProfile::power(0.5, 1.0),
        ] {
            for &(z0, dz) in &[(0.3, 0.2), (0.0, 0.4), (0.7, 0.01)] {
                let naive = prof.radius(z0 + dz) - prof.radius(z0);
                assert!((prof.rise(z0, dz) - naive).abs() < 1e-14);
            }
        }
        // tiny step: rise keeps relative accuracy
        let p = RevolutionProfile::power(1.0_f64, 6.0);
        let r = p.rise(0.5, 1e-12);
        let exact = 6.0 * 0.5_f64.powi(5) * 1e-12;
        assert!((r - exact).abs() / exact < 1e-9);
    }

    #[test]
    fn pchip_preserves_monotonicity() {
        let samples = vec![(0.0, 1.0), (0.1, 1.0), (0.2, 1.5), (0.3, 1.51), (1.0, 3.0)];
        let p = RevolutionProfile::Tabulated { samples };
        p.validate().unwrap();
        assert!(p.is_nondecreasing());
        let mut prev = p.radius(0.0);
        for i in 1..=1000 {
            let r = p.radius(i as f64 / 1000.0);
            assert!(r >= prev - 1e-15);
            prev = r;
        }
        assert!((p.radius(0.2) - 1.5).abs() < 1e-15);
        assert!(p.derivative(0.05).abs() < 1e-9);
    }

    #[test]
    fn validation_errors() {
        assert!(RevolutionProfile::power(1.0_f64, 0.5).validate().is_err());
        assert!(RevolutionProfile::<f64>::Tabulated {
            samples: vec![(0.0, 1.0)]
        }
        .validate()
        .is_err());
        let bad = RevolutionProfile::Tabulated {
            samples: vec![(0.0, 1.0), (0.5, 0.8), (1.0, 1.2)],
        };
        bad.validate().unwrap();
        assert!(!bad.is_nondecreasing());
    }
}

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::{
    power_derivative_at, ratio_hypot_sq, second_difference, PowerDerivatives, EULER_BOOLE,
    EULER_BOOLE_NEXT,
};
use super::{paper_configuration, SumMethod, SumsReport, WitnessParams, ASYMPTOTIC_SWITCH};
use crate::definiteness::{quad_form, KernelSpec};
use crate::error::{invalid, Error, Result};
use crate::scalar::{pow_nonneg, Scalar};
use crate::summation::{par_sum_abs_indexed, par_sum_indexed, CompensatedSum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SeriesReport<T> {
    #[serde(rename = "H")]
    pub h: T,
    pub value: T,
    pub tail_bound: T,
    pub n_terms: u64,
}

fn check_h_below_half<T: Scalar>(h: T) -> Result<()> {
    if h > T::zero() && h < T::lit(0.5) {
        Ok(())
    } else {
        Err(Error::OutOfDomain(format!("H = {h} outside (0, 1/2)")))
    }
}

fn check_h_unit<T: Scalar>(h: T) -> Result<()> {
    if h > T::zero() && h <= T::one() {
        Ok(())
    } else {
        invalid(format!("H = {h} outside (0, 1]"))
    }
}

/// `Σ_{p≥M/2}` of the second differences of `k^{2H}`, i.e.
/// `2Σ_j c_j G^{(j)}(M)` with `G(k) = k^{2H}`, and the first omitted term.
fn power_tail<T: Scalar>(h: T, m: T) -> (T, T) {
    let two = T::lit(2.0);
    let tail = EULER_BOOLE
        .iter()
        .map(|&(j, c)| two * T::lit(c) * power_derivative_at(h, j, m))
        .fold(T::zero(), |a, b| a + b);
    let (j, c) = EULER_BOOLE_NEXT;
    (tail, (two * T::lit(c) * power_derivative_at(h, j, m)).abs())
}

/// `S(H) = Σ_{p≥0} [(2p)^{2H} − 2(2p+1)^{2H} + (2p+2)^{2H}]`.
///
/// The terms decay like `p^{2H−2}`, far too slowly to truncate at any useful
/// tolerance, so the first `P` terms are summed directly and the rest is
/// closed by its Euler–Boole expansion at `2P`. `tail_bound` is the first
/// omitted expansion term plus a bound on the rounding of the direct part.
pub fn series_s<T: Scalar>(h: T, tol: T) -> Result<SeriesReport<T>> {
    check_h_below_half(h)?;
    if !(tol > T::zero()) {
        return invalid("tol must be positive");
    }
    let eps = T::epsilon();
    let mut p = 1024usize;
    loop {
        let (partial, abs) = par_sum_abs_indexed(p, |i| {
            second_difference(T::from_usize_exact(2 * i + 1), T::zero(), h)
        });
        let (tail, omitted) = power_tail(h, T::from_usize_exact(2 * p));
        let value = partial + tail;
        let bound = omitted + T::lit(4.0) * eps * (abs + tail.abs());
        if bound <= tol || omitted <= T::lit(0.01) * tol || p >= 1 << 22 {
            return Ok(SeriesReport {
                h,
                value,
                tail_bound: bound,
                n_terms: p as u64,
            });
        }
        p *= 4;
    }
}

/// `4N·(16N²)^{−H}`, the common prefactor of the reordered forms.
fn prefactor<T: Scalar>(h: T, n: usize) -> T {
    let nn = T::from_usize_exact(n);
    T::lit(4.0) * nn * (-h * (T::lit(16.0) * nn * nn).ln()).exp()
}

/// `4N Σ_p Δ²[((k/4N)² + z²)^H]` over the centres `k = 2p+1 < 2N`.
fn reordered<T: Scalar>(h: T, n: usize, z: T) -> SumsReport<T> {
    let zz = {
        let q = T::lit(4.0) * T::from_usize_exact(n) * z;
        q * q
    };
    let (s, abs) = par_sum_abs_indexed(n, |p| {
        second_difference(T::from_usize_exact(2 * p + 1), zz, h)
    });
    let pre = prefactor(h, n);
    SumsReport {
        value: pre * s,
        n_terms: n as u64,
        method: SumMethod::Reordered,
        error_estimate: T::lit(4.0) * T::epsilon() * pre * abs,
        warning: None,
    }
}

/// Alternating `4N` points on the perimeter-1 circle, all pairs, with the
/// second circle lifted by `z` (`z = 0`: the same circle).
///
/// This is the reference for the reordered forms, whose values can sit six
/// orders below the individual terms, so each term is carried as `hi + lo`
/// (see [`Scalar::pow_wide`]) and both parts are accumulated separately.
fn brute<T: Scalar>(h: T, n: usize, z: T) -> SumsReport<T> {
    let m = 4 * n;
    // the kernel only sees the arc gap, so it is tabulated once per gap
    let table: Vec<(T, T)> = (0..=m / 2)
        .into_par_iter()
        .map(|g| {
            let (u, ul) = ratio_hypot_sq(g, m, z);
            T::pow_wide(u, ul, h)
        })
        .collect();
    let rows: Vec<(CompensatedSum<T>, CompensatedSum<T>, T)> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut hi = CompensatedSum::new();
            let mut lo = CompensatedSum::new();
            let mut abs = T::zero();
            for j in 0..m {
                let gap = i.abs_diff(j);
                let (t, tl) = table[gap.min(m - gap)];
                abs += t;
                if (i + j) % 2 == 0 {
                    hi.add(t);
                    lo.add(tl);
                } else {
                    hi.add(-t);
                    lo.add(-tl);
                }
            }
            (hi, lo, abs)
        })
        .collect();
    let mut hi = CompensatedSum::new();
    let mut lo = CompensatedSum::new();
    let mut abs = T::zero();
    for (h_row, l_row, a) in rows {
        hi = hi.merge(h_row);
        lo = lo.merge(l_row);
        abs += a;
    }
    let value = hi.value() + lo.value();
    SumsReport {
        value,
        n_terms: (m * m) as u64,
        method: SumMethod::BruteForce,
        error_estimate: T::lit(4.0) * T::epsilon() * (value.abs() + T::epsilon() * abs),
        warning: None,
    }
}

const A_DIRECT_MAX: usize = 1 << 16;

/// `A_N`: the form of `4N` alternating points on the perimeter-1 circle.
pub fn a_n_circle<T: Scalar>(h: T, n: usize, method: SumMethod) -> Result<SumsReport<T>> {
    check_h_unit(h)?;
    if n == 0 {
        return invalid("N must be at least 1");
    }
    Ok(match method {
        SumMethod::Reordered => reordered(h, n, T::zero()),
        SumMethod::BruteForce => brute(h, n, T::zero()),
        // the direct sum is cheap here and the expansion at 2N is not yet sharp
        SumMethod::Asymptotic if n <= A_DIRECT_MAX => reordered(h, n, T::zero()),
        SumMethod::Asymptotic => {
            check_h_below_half(h)?;
            // A_N = pre·(S − Σ_{p≥N}); the tail is closed at 2N
            let s = series_s(h, T::lit(1e-15))?;
            let (tail, omitted) = power_tail(h, T::from_usize_exact(2 * n));
            let pre = prefactor(h, n);
            let value = pre * (s.value - tail);
            SumsReport {
                value,
                n_terms: s.n_terms + EULER_BOOLE.len() as u64,
                method: SumMethod::Asymptotic,
                error_estimate: pre * (s.tail_bound + omitted)
                    + T::lit(4.0) * T::epsilon() * value.abs(),
                warning: None,
            }
        }
    })
}

/// `B_N(z)` from `−8N Σ_j c_j F^{(j)}(2N)`, `F(k) = ((k/4N)² + z²)^H`.
/// The other end of the alternating sum contributes only odd derivatives
/// of an even function at 0, so its remainder is `O(e^{−π·4Nz})`.
fn b_asymptotic<T: Scalar>(h: T, n: usize, z: T) -> SumsReport<T> {
    let nn = T::from_usize_exact(n);
    let four_n = T::lit(4.0) * nn;
    let half = T::lit(0.5);
    let d = PowerDerivatives::new(h, z * z, EULER_BOOLE_NEXT.0);
    let mut acc = CompensatedSum::new();
    for &(j, c) in EULER_BOOLE.iter() {
        acc.add(T::lit(c) * d.eval(j, half) / four_n.powi(j as i32));
    }
    let scale = T::lit(8.0) * nn;
    let value = -scale * acc.value();
    let (j, c) = EULER_BOOLE_NEXT;
    let omitted = scale * (T::lit(c) * d.eval(j, half) / four_n.powi(j as i32)).abs();
    let far = scale * pow_nonneg(z * z, h) * (-T::PI() * four_n * z).exp();
    SumsReport {
        value,
        n_terms: EULER_BOOLE.len() as u64,
        method: SumMethod::Asymptotic,
        error_estimate: omitted + far + T::lit(8.0) * T::epsilon() * value.abs(),
        warning: None,
    }
}

/// `B_N(z)`: cross form of two alternating perimeter-1 circles at height
/// distance `z`.
pub fn b_n_two_circles<T: Scalar>(
    h: T,
    n: usize,
    z: T,
    method: SumMethod,
) -> Result<SumsReport<T>> {
    check_h_unit(h)?;
    if n == 0 {
        return invalid("N must be at least 1");
    }
    if !(z > T::zero()) || !z.is_finite() {
        return invalid(format!("z must be positive and finite, got {z}"));
    }
    Ok(match method {
        SumMethod::Reordered => reordered(h, n, z),
        SumMethod::BruteForce => brute(h, n, z),
        SumMethod::Asymptotic => {
            if T::lit(4.0) * T::from_usize_exact(n) * z >= T::lit(ASYMPTOTIC_SWITCH) {
                b_asymptotic(h, n, z)
            } else {
                reordered(h, n, z)
            }
        }
    })
}

/// Limit of `B_N(z_N)` when `z_N → 0` and `N z_N → ∞`: `H/(2·4^{H−1})`.
pub fn b_n_limit<T: Scalar>(h: T) -> T {
    h / (T::lit(2.0) * (T::lit(4.0).ln() * (h - T::one())).exp())
}

/// `Q_N = ⌊N^β⌋·A_N + Σ_{m=1}^{⌊N^β⌋−1} 2(⌊N^β⌋ − m)·B_N(m/N^γ)`.
///
/// `BruteForce` builds all `4N·⌊N^β⌋` points on the cylinder of perimeter 1
/// and evaluates the quadratic form directly.
pub fn q_n_multi<T: Scalar>(params: &WitnessParams<T>, method: SumMethod) -> Result<SumsReport<T>> {
    params.validate()?;
    let (h, n) = (params.h, params.n);
    let circles = params.circles();
    let warning = (circles == 1)
        .then(|| "degenerate configuration: floor(N^beta) = 1, Q_N = A_N".to_string());
    if method == SumMethod::BruteForce {
        let config = paper_configuration(params)?;
        let value = quad_form(&config, &KernelSpec::power(h), true)?;
        let m = config.points.len() as u64;
        return Ok(SumsReport {
            value,
            n_terms: m * m,
            method,
            error_estimate: T::lit(4.0) * T::epsilon() * T::from_u64(m * m).unwrap_or_else(T::zero),
            warning,
        });
    }
    let a = a_n_circle(h, n, method)?;
    let step = params.spacing();
    let parts: Vec<(T, T, u64)> = (1..circles)
        .into_par_iter()
        .map(|m| {
            let b = b_n_two_circles(h, n, T::from_usize_exact(m) * step, method)?;
            let w = T::from_usize_exact(2 * (circles - m));
            Ok((w * b.value, w * b.error_estimate, b.n_terms))
        })
        .collect::<Result<_>>()?;
    let mut acc = CompensatedSum::new();
    let c = T::from_usize_exact(circles);
    acc.add(c * a.value);
    let mut err = c * a.error_estimate;
    let mut terms = a.n_terms;
    for (v, e, t) in parts {
        acc.add(v);
        err += e;
        terms += t;
    }
    let value = acc.value();
    Ok(SumsReport {
        value,
        n_terms: terms,
        method,
        error_estimate: err + T::lit(4.0) * T::epsilon() * value.abs(),
        warning,
    })
}

/// Notation of the `B_N` expansion for one `(N, z_N)`:
/// `α_N = −ln z/ln N`, `h = 1/(4N^{1−α_N}) = 1/(4Nz)`, `x_p = (2p+1)·h`,
/// `θ_l = α_N(l − 1 − 2H) − l + 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ExpansionNotation<T> {
    #[serde(rename = "H")]
    pub h_exp: T,
    #[serde(rename = "N")]
    pub n: usize,
    pub z: T,
    /// Infinite for `N = 1`.
    pub alpha: T,
    pub step: T,
}

impl<T: Scalar> ExpansionNotation<T> {
    pub fn new(h: T, n: usize, z: T) -> Result<Self> {
        if n == 0 {
            return invalid("N must be at least 1");
        }
        if !(z > T::zero()) {
            return invalid(format!("z must be positive, got {z}"));
        }
        let ln_n = T::from_usize_exact(n).ln();
        let alpha = if n == 1 {
            T::infinity()
        } else {
            -z.ln() / ln_n
        };
        Ok(Self {
            h_exp: h,
            n,
            z,
            alpha,
            step: T::one() / (T::lit(4.0) * T::from_usize_exact(n) * z),
        })
    }

    pub fn x(&self, p: usize) -> T {
        T::from_usize_exact(2 * p + 1) * self.step
    }

    pub fn theta(&self, l: usize) -> T {
        let l = T::from_usize_exact(l);
        self.alpha * (l - T::one() - self.h_exp - self.h_exp) - l + T::lit(2.0)
    }

    /// `N^{θ_l}`, evaluated as `z^{2H+1−l}·N^{2−l}` so that it stays finite
    /// at `N = 1`.
    pub fn n_pow_theta(&self, l: usize) -> T {
        let lt = T::from_usize_exact(l);
        let e_z = self.h_exp + self.h_exp + T::one() - lt;
        let e_n = T::lit(2.0) - lt;
        (e_z * self.z.ln() + e_n * T::from_usize_exact(self.n).ln()).exp()
    }
}

/// `B_N^n = N^{θ_n} Σ_{p<N} φ^{(n)}(x_p)/(2N^{1−α_N})`, `φ(x) = (x²+1)^H`.
pub fn expansion_term<T: Scalar>(h: T, n: usize, z: T, order: usize) -> Result<T> {
    if order < 2 {
        return invalid("expansion order must be at least 2");
    }
    check_h_unit(h)?;
    let notation = ExpansionNotation::new(h, n, z)?;
    let d = PowerDerivatives::new(h, T::one(), order);
    let s = par_sum_indexed(n, |p| d.eval(order, notation.x(p)));
    let weight = T::lit(2.0) * notation.step; // 1/(2Nz)
    Ok(notation.n_pow_theta(order) * weight * s)
}

#[cfg(test)]
mod tests {
    use super::*;

    // 2(2^{1+2H} − 1)·ζ(−2H), evaluated with 40-digit arithmetic
    const S_REF: [(f64, f64); 3] = [
        (0.1, -0.907_311_764_088_232_2),
        (0.25, -0.760_209_625_219_368),
        (0.4, -0.605_593_198_102_596_2),
    ];

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn series_matches_zeta_closed_form() {
        for (h, s) in S_REF {
            let r = series_s(h, 1e-10).unwrap();
            assert!((r.value - s).abs() < 1e-13, "H={h}: {} vs {s}", r.value);
            assert!(r.tail_bound <= 1e-10);
            assert!(r.value < 0.0);
        }
    }

    #[test]
    fn series_domain() {
        assert!(matches!(
            series_s(0.5f64, 1e-10),
            Err(Error::OutOfDomain(_))
        ));
        assert!(matches!(
            series_s(0.0f64, 1e-10),
            Err(Error::OutOfDomain(_))
        ));
    }

    #[test]
    fn series_partial_sums_are_negative() {
        let h = 0.25f64;
        let mut acc = 0.0;
        for p in 0..10_000 {
            acc += second_difference((2 * p + 1) as f64, 0.0, h);
            assert!(acc < 0.0);
        }
    }

    #[test]
    fn a1_four_points() {
        let a = a_n_circle(0.25f64, 1, SumMethod::Reordered).unwrap();
        assert!((a.value - 2.0 * (2f64.sqrt() - 2.0)).abs() < 1e-14);
        let b = a_n_circle(0.25f64, 1, SumMethod::BruteForce).unwrap();
        assert!((b.value - a.value).abs() < 1e-14);
    }

    #[test]
    fn reordered_equals_brute_force() {
        for h in [0.1f64, 0.25, 0.4] {
            for n in 1..=8 {
                let r = a_n_circle(h, n, SumMethod::Reordered).unwrap().value;
                let b = a_n_circle(h, n, SumMethod::BruteForce).unwrap().value;
                assert!(rel(r, b) < 1e-12, "A H={h} N={n}: {r} vs {b}");
                for z in [0.05, 0.1, 0.5, 1.0] {
                    let r = b_n_two_circles(h, n, z, SumMethod::Reordered)
                        .unwrap()
                        .value;
                    let b = b_n_two_circles(h, n, z, SumMethod::BruteForce)
                        .unwrap()
                        .value;
                    assert!(rel(r, b) < 1e-12, "B H={h} N={n} z={z}: {r} vs {b}");
                }
            }
        }
    }

    #[test]
    fn asymptotic_a_matches_direct() {
        for h in [0.1f64, 0.25, 0.4] {
            for n in [1usize, 3, 50, 70_000, 100_000, 1_000_000] {
                let r = a_n_circle(h, n, SumMethod::Reordered).unwrap();
                let a = a_n_circle(h, n, SumMethod::Asymptotic).unwrap();
                assert!(
                    (a.value - r.value).abs()
                        <= 2.0 * (a.error_estimate + r.error_estimate) + 1e-14 * r.value.abs()
                );
                assert!(
                    rel(a.value, r.value) < 1e-11,
                    "H={h} N={n}: {} vs {}",
                    a.value,
                    r.value
                );
            }
        }
    }

    #[test]
    fn asymptotic_b_matches_direct_past_switch() {
        for h in [0.1f64, 0.25, 0.4] {
            for n in [2usize, 16, 1000, 50_000] {
                for k in [24.0, 30.0, 100.0, 1.0e4] {
                    let z = k / (4.0 * n as f64);
                    let r = b_n_two_circles(h, n, z, SumMethod::Reordered).unwrap();
                    let a = b_n_two_circles(h, n, z, SumMethod::Asymptotic).unwrap();
                    assert_eq!(a.method, SumMethod::Asymptotic);
                    let scale = r.value.abs().max(1e-300);
                    assert!(
                        (a.value - r.value).abs() <= 1e-10 * scale + 10.0 * r.error_estimate,
                        "H={h} N={n} 4Nz={k}: {} vs {}",
                        a.value,
                        r.value
                    );
                }
            }
        }
    }

    #[test]
    fn a_is_negative() {
        for h in [0.05f64, 0.25, 0.45] {
            for n in [1usize, 2, 7, 100, 10_000] {
                assert!(a_n_circle(h, n, SumMethod::Reordered).unwrap().value < 0.0);
            }
        }
    }

    #[test]
    fn b_requires_positive_height() {
        assert!(matches!(
            b_n_two_circles(0.25f64, 4, 0.0, SumMethod::Reordered),
            Err(Error::InvalidArgument(_))
        ));
        assert!(b_n_two_circles(0.25f64, 4, -1.0, SumMethod::Reordered).is_err());
    }

    #[test]
    fn b_far_apart_decays_like_second_derivative() {
        // B_N(z) ≈ (H/2)(¼ + z²)^{H−1} → 0
        let (h, z) = (0.25f64, 1.0e6);
        for n in [1usize, 4, 64] {
            let b = b_n_two_circles(h, n, z, SumMethod::Reordered)
                .unwrap()
                .value;
            let lead = 0.5 * h * (0.25 + z * z).powf(h - 1.0);
            assert!(rel(b, lead) < 1e-6, "N={n}: {b} vs {lead}");
            assert!(b.abs() <= z.powf(2.0 * h - 2.0));
        }
    }

    #[test]
    fn b_limit_values() {
        assert!((b_n_limit(0.25f64) - 0.353_553_390_593_273_8).abs() < 1e-15);
        assert!((b_n_limit(0.4f64) - 0.459_479_341_998_814).abs() < 1e-15);
        assert!(b_n_limit(1e-9f64) < 1e-8);
    }

    #[test]
    fn q_degenerate_is_a() {
        let p = WitnessParams::new(0.25f64, 2, 0.6, 0.8);
        assert_eq!(p.circles(), 1);
        let q = q_n_multi(&p, SumMethod::Reordered).unwrap();
        let a = a_n_circle(0.25f64, 2, SumMethod::Reordered).unwrap();
        assert_eq!(q.value, a.value);
        assert!(q.warning.is_some());
    }

    #[test]
    fn q_reduced_equals_brute() {
        for h in [0.1f64, 0.25, 0.4] {
            let p = WitnessParams {
                strict: false,
                ..WitnessParams::new(h, 4, 0.6, 0.8)
            };
            let r = q_n_multi(&p, SumMethod::Reordered).unwrap().value;
            let b = q_n_multi(&p, SumMethod::BruteForce).unwrap().value;
            assert!(rel(r, b) < 1e-12, "H={h}: {r} vs {b}");
        }
    }

    #[test]
    fn q_asymptotic_matches_reordered() {
        let p = WitnessParams::new(0.25f64, 5000, 0.6, 0.8);
        let r = q_n_multi(&p, SumMethod::Reordered).unwrap().value;
        let a = q_n_multi(&p, SumMethod::Asymptotic).unwrap().value;
        assert!(rel(a, r) < 1e-10, "{a} vs {r}");
    }

    #[test]
    fn expansion_derivatives_at_zero() {
        let d = PowerDerivatives::new(0.25f64, 1.0, 2);
        assert_eq!(d.eval(1, 0.0), 0.0);
        assert!((d.eval(2, 0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn second_order_term_carries_the_limit() {
        // B_N² → H/4^{H−1}, so b₂·B_N² → b_n_limit with b₂ = 1/2
        let h = 0.25f64;
        let target = h / 4f64.powf(h - 1.0);
        let mut last = f64::INFINITY;
        for n in [100usize, 10_000, 1_000_000] {
            let z = (n as f64).powf(-0.5);
            let t = expansion_term(h, n, z, 2).unwrap();
            let err = rel(t, target);
            assert!(err < last);
            last = err;
        }
        assert!(last < 1e-4);
        let t = expansion_term(h, 1_000_000, 1e-3, 2).unwrap();
        assert!(rel(0.5 * t, b_n_limit(h)) < 1e-4);
    }

    #[test]
    fn notation_fields() {
        let e = ExpansionNotation::new(0.25f64, 100, 0.1).unwrap();
        assert!((e.alpha - 0.5).abs() < 1e-15);
        assert!((e.step - 1.0 / 40.0).abs() < 1e-15);
        assert!((e.x(1) - 3.0 / 40.0).abs() < 1e-15);
        // θ_2 = α(1 − 2H)
        assert!((e.theta(2) - 0.25).abs() < 1e-15);
        assert!(((100f64).powf(e.theta(3)) - e.n_pow_theta(3)).abs() < 1e-12);
        assert!(ExpansionNotation::new(0.25f64, 1, 0.5)
            .unwrap()
            .alpha
            .is_infinite());
    }
}

//! Scalar building blocks: stable second differences of `(k² + Z)^H`,
//! derivatives of `(x² + c)^H`, and the Euler–Boole coefficients used to
//! close alternating sums.

use crate::scalar::Scalar;

/// `c_j` (odd `j`) in `Σ_{k≥M} (−1)^{k−M} F(k) ≈ F(M)/2 + Σ_j c_j F^{(j)}(M)`.
/// `c_j = −(2^{j+1} − 1) B_{j+1} / (j+1)!`.
pub(crate) const EULER_BOOLE: [(usize, f64); 5] = [
    (1, -1.0 / 4.0),
    (3, 1.0 / 48.0),
    (5, -1.0 / 480.0),
    (7, 17.0 / 80640.0),
    (9, -31.0 / 1451520.0),
];

/// First omitted coefficient, used as a truncation estimate.
pub(crate) const EULER_BOOLE_NEXT: (usize, f64) = (11, 691.0 / 319334400.0);

/// `u(b−1)^H − 2u(b)^H + u(b+1)^H` with `u(k) = k² + Z`, `b ≥ 1`.
///
/// Written as `u(b)^H·[(1+s)^H − 1 − ((1+α)^H − 1)((1+β)^H − 1)]` where
/// `1+α = u(b−1)/u(b)`, `1+β = u(b+1)/u(b)`, `1+s = (1+α)(1+β)`. The three
/// ratios have exact numerators, so the bracket keeps full relative
/// precision even when the difference is 12 orders below `u(b)^H`.
#[inline]
pub(crate) fn second_difference<T: Scalar>(b: T, zz: T, h: T) -> T {
    let one = T::one();
    let two = one + one;
    let w = b * b + zz;
    let alpha = (one - two * b) / w;
    let beta = (one + two * b) / w;
    let s = (two * zz - two * b * b + one) / (w * w);
    let e1 = (h * s.ln_1p()).exp_m1();
    let e2 = (h * alpha.ln_1p()).exp_m1();
    let e3 = (h * beta.ln_1p()).exp_m1();
    (h * w.ln()).exp() * (e1 - e2 * e3)
}

#[inline]
fn two_sum<T: Scalar>(a: T, b: T) -> (T, T) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// `(g/m)² + z²` as `hi + lo` with error `O(ε²)` (error-free products via
/// FMA), so that the base of a power is not the dominant rounding.
pub(crate) fn ratio_hypot_sq<T: Scalar>(g: usize, m: usize, z: T) -> (T, T) {
    let (gt, mt) = (T::from_usize_exact(g), T::from_usize_exact(m));
    let q = gt / mt;
    let ql = (-q).mul_add(mt, gt) / mt;
    let qq = q * q;
    let qq_err = q.mul_add(q, -qq);
    let zz = z * z;
    let zz_err = z.mul_add(z, -zz);
    let (s, e) = two_sum(qq, zz);
    let lo = e + qq_err + zz_err + T::lit(2.0) * q * ql;
    two_sum(s, lo)
}

/// `(2H)(2H−1)···(2H−j+1)·m^{2H−j}`, the `j`-th derivative of `m^{2H}`.
pub(crate) fn power_derivative_at<T: Scalar>(h: T, j: usize, m: T) -> T {
    let two_h = h + h;
    let mut ff = T::one();
    for i in 0..j {
        ff *= two_h - T::from_usize_exact(i);
    }
    ff * ((two_h - T::from_usize_exact(j)) * m.ln()).exp()
}

/// Derivatives of `g(x) = (x² + c)^H`:
/// `g^{(n)}(x) = (x² + c)^{H−n}·Q_n(x)` with `Q_0 = 1` and
/// `Q_{n+1} = (x² + c)·Q_n′ + 2(H − n)·x·Q_n`.
#[derive(Debug, Clone)]
pub struct PowerDerivatives<T> {
    h: T,
    c: T,
    polys: Vec<Vec<T>>,
}

impl<T: Scalar> PowerDerivatives<T> {
    pub fn new(h: T, c: T, max_order: usize) -> Self {
        let mut polys: Vec<Vec<T>> = vec![vec![T::one()]];
        for n in 0..max_order {
            let q = &polys[n];
            let mut next = vec![T::zero(); q.len() + 1];
            // (x² + c)·Q′
            for (k, &a) in q.iter().enumerate().skip(1) {
                let da = a * T::from_usize_exact(k);
                next[k - 1] += c * da;
                next[k + 1] += da;
            }
            // 2(H − n)·x·Q
            let f = (h - T::from_usize_exact(n)) * T::lit(2.0);
            for (k, &a) in q.iter().enumerate() {
                next[k + 1] += f * a;
            }
            polys.push(next);
        }
        Self { h, c, polys }
    }

    pub fn max_order(&self) -> usize {
        self.polys.len() - 1
    }

    /// Coefficients of `Q_n` in increasing powers of `x`.
    pub fn poly(&self, n: usize) -> &[T] {
        &self.polys[n]
    }

    pub fn eval(&self, n: usize, x: T) -> T {
        let q = self.polys[n]
            .iter()
            .rev()
            .fold(T::zero(), |acc, &a| acc * x + a);
        let u = x * x + self.c;
        ((self.h - T::from_usize_exact(n)) * u.ln()).exp() * q
    }
}

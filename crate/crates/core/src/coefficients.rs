//! Coefficients of the small-`z` expansion of `B_N`, exactly.
//!
//! * `a_k = −1/(2^k (k+1)!)`, `d_k = −1/(4^k k!)`,
//!   `b_n = 8(1 + (−1)^n)/(n! 4^n)`;
//! * `A_p = Σ_{compositions m₁+…+m_q = p} a_{m₁}···a_{m_q}`, computed by the
//!   convolution `A_p = Σ_{m=1}^p a_m A_{p−m}` (`A₀ = 1`);
//! * `Z_r = Σ_{k≤r} A_{r−k} d_k`;
//! * `C_l = Σ_{n'≥1} Σ_k b_{2n'} A_{l−2n'−k} d_k = Σ_{n'≥1} b_{2n'} Z_{l−2n'}`.
//!
//! In generating-function form `Σ A_p z^p = z/(2(e^{z/2} − 1))` and
//! `Σ d_k z^k = −e^{z/4}`, so `Σ Z_r z^r = z/(2(e^{−z/4} − e^{z/4}))`, an
//! even function: all odd `Z_r` vanish, and with them all odd `C_l`.
//!
//! Everything is generic over a field type; [`ExactCoeffTable`] uses
//! arbitrary precision rationals and makes every identity an equality.

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Zero};

use crate::error::{invalid, Result};

/// Number type the tables are computed in.
pub trait Field:
    Clone + Debug + PartialEq + Num + Neg<Output = Self> + FromPrimitive + Send + Sync
{
    fn int(n: u64) -> Self {
        Self::from_u64(n).expect("integer representable")
    }
}

impl<T> Field for T where
    T: Clone + Debug + PartialEq + Num + Neg<Output = T> + FromPrimitive + Send + Sync
{
}

pub type Rational = BigRational;

pub fn rational(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTable<R> {
    pub order: usize,
    pub a: Vec<R>,
    pub d: Vec<R>,
    pub b: Vec<R>,
    pub big_a: Vec<R>,
    pub z: Vec<R>,
    pub c: Vec<R>,
}

pub type ExactCoeffTable = CoeffTable<Rational>;

/// `k!` and `base^k` for `k = 0..=order`.
fn factorials_and_powers<R: Field>(order: usize, base: u64) -> (Vec<R>, Vec<R>) {
    let mut fact = vec![R::one()];
    let mut pow = vec![R::one()];
    for k in 1..=order {
        fact.push(fact[k - 1].clone() * R::int(k as u64));
        pow.push(pow[k - 1].clone() * R::int(base));
    }
    (fact, pow)
}

impl<R: Field> CoeffTable<R> {
    pub fn build(order: usize) -> Result<Self> {
        if order < 1 {
            return invalid("coefficient order must be at least 1");
        }
        let (fact, pow2) = factorials_and_powers::<R>(order + 1, 2);
        let (_, pow4) = factorials_and_powers::<R>(order, 4);
        let a: Vec<R> = (0..=order)
            .map(|k| -(R::one() / (pow2[k].clone() * fact[k + 1].clone())))
            .collect();
        let d: Vec<R> = (0..=order)
            .map(|k| -(R::one() / (pow4[k].clone() * fact[k].clone())))
            .collect();
        let b: Vec<R> = (0..=order)
            .map(|n| {
                if n % 2 == 0 {
                    R::int(16) / (fact[n].clone() * pow4[n].clone())
                } else {
                    R::zero()
                }
            })
            .collect();
        let mut big_a = vec![R::one()];
        for p in 1..=order {
            let mut acc = R::zero();
            for m in 1..=p {
                acc = acc + a[m].clone() * big_a[p - m].clone();
            }
            big_a.push(acc);
        }
        let z: Vec<R> = (0..=order)
            .map(|r| {
                (0..=r).fold(R::zero(), |acc, k| {
                    acc + big_a[r - k].clone() * d[k].clone()
                })
            })
            .collect();
        let c: Vec<R> = (0..=order)
            .map(|l| {
                let mut acc = R::zero();
                let mut two_n = 2;
                while two_n <= l {
                    for k in 0..=l - two_n {
                        acc = acc + b[two_n].clone() * big_a[l - two_n - k].clone() * d[k].clone();
                    }
                    two_n += 2;
                }
                acc
            })
            .collect();
        Ok(Self {
            order,
            a,
            d,
            b,
            big_a,
            z,
            c,
        })
    }

    pub fn odd_z_vanish(&self) -> bool {
        self.z.iter().skip(1).step_by(2).all(Zero::is_zero)
    }

    pub fn odd_c_vanish(&self) -> bool {
        self.c.iter().skip(1).step_by(2).all(Zero::is_zero)
    }

    /// `Z_r` against the generating series, for `1 ≤ r ≤ up_to`.
    pub fn matches_generating_series(&self, up_to: usize) -> Result<bool> {
        if up_to > self.order {
            return invalid(format!("table has order {}, asked for {up_to}", self.order));
        }
        let g = generating_series_coeffs::<R>(up_to)?;
        Ok((1..=up_to).all(|r| g[r] == self.z[r]))
    }

    /// The first `order + 1` entries of every list (tables are prefix-stable).
    pub fn truncate(&self, order: usize) -> Self {
        let cut = |v: &Vec<R>| v[..=order.min(self.order)].to_vec();
        Self {
            order: order.min(self.order),
            a: cut(&self.a),
            d: cut(&self.d),
            b: cut(&self.b),
            big_a: cut(&self.big_a),
            z: cut(&self.z),
            c: cut(&self.c),
        }
    }
}

pub fn build_table(order: usize) -> Result<ExactCoeffTable> {
    CoeffTable::build(order)
}

/// Taylor coefficients (orders `0..=order`) of `z/(2(e^{−z/4} − e^{z/4})) + 1`.
///
/// `2(e^{−z/4} − e^{z/4}) = −z·E(z)` with `E(z) = Σ_j z^{2j}/(16^j (2j+1)!)`,
/// so the quotient is `−1/E(z)`, obtained by power-series division; the
/// factored `z` is the removable singularity.
pub fn generating_series_coeffs<R: Field>(order: usize) -> Result<Vec<R>> {
    if order < 1 {
        return invalid("series order must be at least 1");
    }
    let (fact, pow4) = factorials_and_powers::<R>(order + 1, 4);
    let e: Vec<R> = (0..=order)
        .map(|k| {
            if k % 2 == 0 {
                R::one() / (pow4[k].clone() * fact[k + 1].clone())
            } else {
                R::zero()
            }
        })
        .collect();
    // q = −1/E: q₀ = −1/e₀, q_k = −(Σ_{i=1}^k e_i q_{k−i})/e₀
    let mut q: Vec<R> = Vec::with_capacity(order + 1);
    q.push(-(R::one() / e[0].clone()));
    for k in 1..=order {
        let mut acc = R::zero();
        for i in 1..=k {
            acc = acc + e[i].clone() * q[k - i].clone();
        }
        q.push(-(acc / e[0].clone()));
    }
    q[0] = q[0].clone() + R::one();
    Ok(q)
}

/// `C_l = 0` exactly for every odd `l ≤ order`.
pub fn c_odd_vanish(order: usize) -> Result<bool> {
    if order < 3 {
        return invalid("c_odd_vanish needs order >= 3");
    }
    Ok(build_table(order)?.odd_c_vanish())
}

/// `A_p` by the literal sum over compositions of `p` (exponential; used to
/// cross-check the convolution for small `p`).
pub fn big_a_by_compositions<R: Field>(a: &[R], p: usize) -> R {
    fn go<R: Field>(a: &[R], rest: usize, prod: R, acc: &mut R) {
        if rest == 0 {
            *acc = acc.clone() + prod;
            return;
        }
        for m in 1..=rest {
            go(a, rest - m, prod.clone() * a[m].clone(), acc);
        }
    }
    let mut acc = R::zero();
    go(a, p, R::one(), &mut acc);
    acc
}

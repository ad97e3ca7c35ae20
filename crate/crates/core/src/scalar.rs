//! Floating point scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar used by the geometric and spectral code: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal; exact for `f64`, rounded for `f32`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_exact(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `(x_hi + x_lo)^e` as an unevaluated sum `hi + lo`, carried to about
    /// twice the working precision where the type supports it. Used by
    /// reference evaluations whose terms cancel to many digits.
    fn pow_wide(x_hi: Self, x_lo: Self, e: Self) -> (Self, Self) {
        (pow_nonneg(x_hi + x_lo, e), Self::zero())
    }
}

impl Scalar for f32 {}

impl Scalar for f64 {
    fn pow_wide(x_hi: f64, x_lo: f64, e: f64) -> (f64, f64) {
        let x = x_hi + x_lo;
        if x <= 0.0 {
            return (0.0, 0.0);
        }
        wide::pow(x_hi, x_lo, e)
    }
}

mod wide {
    use std::cell::RefCell;

    use astro_float::{BigFloat, Consts, Radix, RoundingMode};

    const BITS: usize = 192;
    const RM: RoundingMode = RoundingMode::ToEven;

    thread_local! {
        static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache"));
    }

    /// Correctly rounded `f64` nearest to `x`, via a decimal round trip.
    fn nearest(x: &BigFloat, cc: &mut Consts) -> f64 {
        let s = x
            .format(Radix::Dec, RM, cc)
            .expect("formatting a finite value");
        s.parse().expect("decimal produced by astro-float")
    }

    pub(super) fn pow(x_hi: f64, x_lo: f64, e: f64) -> (f64, f64) {
        CONSTS.with(|cc| {
            let cc = &mut *cc.borrow_mut();
            let x = BigFloat::from_f64(x_hi, BITS).add(&BigFloat::from_f64(x_lo, BITS), BITS, RM);
            let r = x.pow(&BigFloat::from_f64(e, BITS), BITS, RM, cc);
            let hi = nearest(&r, cc);
            let lo = nearest(&r.sub(&BigFloat::from_f64(hi, BITS), BITS, RM), cc);
            (hi, lo)
        })
    }
}

/// `x^e` for `x >= 0`, with `0^e = 0` for positive exponents.
#[inline]
pub fn pow_nonneg<T: Scalar>(x: T, e: T) -> T {
    if x <= T::zero() {
        T::zero()
    } else {
        (e * x.ln()).exp()
    }
}

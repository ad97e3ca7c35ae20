//! Adaptive Gauss–Kronrod (7/15) quadrature.

use crate::scalar::Scalar;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral<T> {
    pub value: T,
    pub error: T,
    pub evaluations: usize,
    /// Some panel was accepted without meeting its tolerance (evaluation
    /// budget, depth limit or a non-finite error estimate).
    pub exhausted: bool,
}

fn gk15<T: Scalar, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> (T, T) {
    let half = T::lit(0.5);
    let c = half * (a + b);
    let h = half * (b - a);
    let fc = f(c);
    let mut k = fc * T::lit(WGK[7]);
    let mut g = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = h * T::lit(XGK[j]);
        let s = f(c - dx) + f(c + dx);
        k += s * T::lit(WGK[j]);
        if j % 2 == 1 {
            g += s * T::lit(WG[j / 2]);
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Integrates `f` over `[a, b]` to `max(abs_tol, rel_tol·|I|)`.
///
/// Global adaptive scheme: the panel with the largest Kronrod–Gauss error
/// is bisected until the summed error meets the tolerance. Panels narrower
/// than `|b − a|·2^(−max_depth)` are not split further.
pub fn integrate<T, F>(f: F, a: T, b: T, abs_tol: T, rel_tol: T, max_depth: usize) -> Integral<T>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    integrate_budget(f, a, b, abs_tol, rel_tol, max_depth, usize::MAX)
}

struct Panel<T> {
    lo: T,
    hi: T,
    est: T,
    err: T,
    depth: usize,
}

impl<T: Scalar> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}

impl<T: Scalar> Eq for Panel<T> {}

impl<T: Scalar> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.to_f64_lossy().total_cmp(&other.err.to_f64_lossy())
    }
}

/// [`integrate`] that stops refining after about `max_evals` evaluations.
/// The result is flagged `exhausted` when the error target was not met.
pub fn integrate_budget<T, F>(
    mut f: F,
    a: T,
    b: T,
    abs_tol: T,
    rel_tol: T,
    max_depth: usize,
    max_evals: usize,
) -> Integral<T>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    if a == b {
        return Integral {
            value: T::zero(),
            error: T::zero(),
            evaluations: 0,
            exhausted: false,
        };
    }
    let (est, err) = gk15(&mut f, a, b);
    let mut evaluations = 15;
    let mut heap = std::collections::BinaryHeap::new();
    let mut done: Vec<Panel<T>> = Vec::new();
    let mut value = est;
    let mut error = err;
    heap.push(Panel {
        lo: a,
        hi: b,
        est,
        err,
        depth: 0,
    });
    loop {
        let target = abs_tol.max(rel_tol * value.abs());
        if !(error > target) || evaluations >= max_evals || !value.is_finite() {
            break;
        }
        let Some(p) = heap.pop() else { break };
        if p.depth >= max_depth || !p.err.is_finite() {
            done.push(p);
            continue;
        }
        let mid = T::lit(0.5) * (p.lo + p.hi);
        let (l, le) = gk15(&mut f, p.lo, mid);
        let (r, re) = gk15(&mut f, mid, p.hi);
        evaluations += 30;
        value = value - p.est + l + r;
        error = error - p.err + le + re;
        heap.push(Panel {
            lo: p.lo,
            hi: mid,
            est: l,
            err: le,
            depth: p.depth + 1,
        });
        heap.push(Panel {
            lo: mid,
            hi: p.hi,
            est: r,
            err: re,
            depth: p.depth + 1,
        });
    }
    // re-add from scratch to shed the running-update rounding
    let mut v = crate::summation::CompensatedSum::new();
    let mut e = crate::summation::CompensatedSum::new();
    for p in heap.iter().chain(done.iter()) {
        v.add(p.est);
        e.add(p.err);
    }
    let (value, error) = (v.value(), e.value());
    let target = abs_tol.max(rel_tol * value.abs());
    Integral {
        value,
        error,
        evaluations,
        exhausted: !(error <= target),
    }
}

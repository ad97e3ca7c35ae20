use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// `y ≈ prefactor·x^exponent`, fitted on `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PowerFit<T> {
    pub exponent: T,
    pub prefactor: T,
    /// RMS of the residuals in log space.
    pub residual: T,
}

/// Least squares line through `(ln xᵢ, ln yᵢ)`.
pub fn fit_power_law<T: Scalar>(xs: &[T], ys: &[T]) -> Result<PowerFit<T>> {
    if xs.len() != ys.len() {
        return invalid(format!("{} abscissae but {} ordinates", xs.len(), ys.len()));
    }
    if let Some(bad) = xs
        .iter()
        .chain(ys)
        .find(|v| !(**v > T::zero() && v.is_finite()))
    {
        return invalid(format!(
            "power-law fit needs positive finite data, got {bad}"
        ));
    }
    if xs.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "power-law fit needs at least 3 points, got {}",
            xs.len()
        )));
    }
    let lx: Vec<T> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<T> = ys.iter().map(|y| y.ln()).collect();
    let n = T::from_usize_exact(lx.len());
    let mx = lx.iter().copied().sum::<T>() / n;
    let my = ly.iter().copied().sum::<T>() / n;
    let (mut sxx, mut sxy) = (T::zero(), T::zero());
    for (&x, &y) in lx.iter().zip(&ly) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if !(sxx > T::zero()) {
        return invalid("power-law fit needs at least two distinct abscissae");
    }
    let slope = sxy / sxx;
    let icept = my - slope * mx;
    let ss = lx
        .iter()
        .zip(&ly)
        .map(|(&x, &y)| {
            let r = y - (icept + slope * x);
            r * r
        })
        .sum::<T>();
    Ok(PowerFit {
        exponent: slope,
        prefactor: icept.exp(),
        residual: (ss / n).sqrt(),
    })
}

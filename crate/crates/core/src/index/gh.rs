//! The fractional index is not continuous for the Gromov–Hausdorff
//! distance: `S¹ × [0, ε] → S¹` as `ε → 0`, yet the index stays 0 on every
//! cylinder while it is 1 on the circle.

use serde::{Deserialize, Serialize};

use super::{equispaced_points, probe, EvidenceSource, IndexOptions};
use crate::definiteness::{nd_test, KernelSpec, Verdict};
use crate::error::{invalid, Result};
use crate::metric::SpaceDescriptor;
use crate::scalar::Scalar;
use crate::witnesses::MultiCircle;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GhOptions {
    /// Points on the circle for the `H = 1/2` test.
    pub circle_points: usize,
    /// `H` at which the cylinders are probed.
    #[serde(rename = "H")]
    pub h: f64,
    pub index: IndexOptions,
}

impl Default for GhOptions {
    fn default() -> Self {
        Self {
            circle_points: 32,
            h: 0.25,
            index: IndexOptions {
                trials: 4,
                ..Default::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GhRow<T> {
    pub eps: T,
    /// `d_GH(S¹, S¹ × [0, ε]) ≤ ε`.
    pub gh_bound: T,
    pub circle_nd_pass: bool,
    /// Largest projected eigenvalue over `‖PMP‖_F` on the circle at `2H = 1`.
    pub circle_ratio: T,
    pub cylinder_violation: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cylinder_source: Option<EvidenceSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cylinder_value: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<MultiCircle<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GhReport<T> {
    #[serde(rename = "H")]
    pub h: T,
    pub rows: Vec<GhRow<T>>,
}

/// One row per `ε`: circle and cylinder of perimeter 1.
pub fn gh_discontinuity_demo<T: Scalar>(eps_list: &[T], opts: &GhOptions) -> Result<GhReport<T>> {
    if let Some(e) = eps_list
        .iter()
        .find(|e| !(**e > T::zero() && e.is_finite()))
    {
        return invalid(format!("eps must be positive, got {e}"));
    }
    let h = T::lit(opts.h);
    let radius = T::one() / T::TAU();
    let circle = SpaceDescriptor::circle(radius);
    let pts = equispaced_points(&circle, opts.circle_points);
    let v = nd_test(
        &circle,
        &pts,
        &KernelSpec::power(T::lit(0.5)),
        opts.index.tol,
    )?;
    let circle_nd_pass = v.verdict == Verdict::NegativeDefiniteUpToTol;
    let circle_ratio = v.extreme_eigenvalue / v.frobenius_norm;
    let rows = eps_list
        .iter()
        .map(|&eps| {
            let cyl = SpaceDescriptor::cylinder(radius, T::zero(), eps);
            let p = probe(&cyl, h, &opts.index, &[])?;
            Ok(GhRow {
                eps,
                gh_bound: eps,
                circle_nd_pass,
                circle_ratio,
                cylinder_violation: p.violated,
                cylinder_source: p.source,
                cylinder_value: p.value,
                layout: p.layout,
            })
        })
        .collect::<Result<_>>()?;
    Ok(GhReport { h, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_for_coarse_eps() {
        let r = gh_discontinuity_demo(&[0.5f64, 0.2], &GhOptions::default()).unwrap();
        for row in &r.rows {
            assert_eq!(row.gh_bound, row.eps);
            assert!(row.circle_nd_pass);
            assert!(row.cylinder_violation, "eps = {}", row.eps);
        }
        assert!(gh_discontinuity_demo(&[0.0f64], &GhOptions::default()).is_err());
    }
}

//! Metric spaces and their geodesic distances.
//!
//! Closed forms cover circles, flat cylinders, Euclidean spaces, flat tori,
//! Riemannian products and homotheties. Surfaces of revolution go through
//! the numeric solver in [`revolution`].

mod grid;
pub mod profile;
pub mod revolution;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use profile::{revolution_metric_coeffs, RevolutionProfile};
pub use revolution::{
    clairaut_residual, geodesic_samples, revolution_distance, revolution_distance_grid,
    DistanceMethod, GeodesicSample, GeodesicSolution,
};

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Closed height interval `[lo, hi]` (serialized as a two-element array).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Interval<T>(pub T, pub T);

impl<T: Scalar> Interval<T> {
    pub fn new(lo: T, hi: T) -> Self {
        Self(lo, hi)
    }

    pub fn lo(&self) -> T {
        self.0
    }

    pub fn hi(&self) -> T {
        self.1
    }

    pub fn len(&self) -> T {
        self.1 - self.0
    }

    pub fn is_empty(&self) -> bool {
        !(self.1 > self.0)
    }

    pub fn contains(&self, z: T) -> bool {
        z >= self.0 && z <= self.1
    }

    pub fn mid(&self) -> T {
        T::lit(0.5) * (self.0 + self.1)
    }
}

/// Declarative description of a metric space.
///
/// Point coordinates are laid out per kind: `circle` → `[θ]`,
/// `cylinder`/`revolution` → `[θ, z]`, `euclidean(d)` → `d` reals,
/// `flat_torus` → one angle per radius, `product` → left then right,
/// `scaled` → the base layout. Angles are in radians.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Scalar")]
pub enum SpaceDescriptor<T> {
    Circle {
        radius: T,
    },
    Cylinder {
        radius: T,
        height_interval: Interval<T>,
    },
    Euclidean {
        dim: usize,
    },
    FlatTorus {
        radii: Vec<T>,
    },
    Product {
        left: Box<SpaceDescriptor<T>>,
        right: Box<SpaceDescriptor<T>>,
    },
    Scaled {
        base: Box<SpaceDescriptor<T>>,
        lambda: T,
    },
    Revolution {
        profile: RevolutionProfile<T>,
        z_interval: Interval<T>,
    },
}

/// A point of a space; see [`SpaceDescriptor`] for the coordinate layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent, bound = "T: Scalar")]
pub struct Point<T> {
    pub coords: Vec<T>,
}

impl<T: Scalar> Point<T> {
    /// Wraps raw coordinates without validation or angle reduction.
    pub fn raw(coords: Vec<T>) -> Self {
        Self { coords }
    }
}

/// Knobs for the numeric (revolution surface) distance path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DistanceOptions {
    pub tol: f64,
    pub grid: [usize; 2],
    pub fallback: bool,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            grid: [512, 512],
            fallback: true,
        }
    }
}

/// Reduces an angle to `[0, 2π)`.
pub fn reduce_angle<T: Scalar>(theta: T) -> T {
    let two_pi = T::TAU();
    let r = theta % two_pi;
    let r = if r < T::zero() { r + two_pi } else { r };
    if r >= two_pi {
        T::zero()
    } else {
        r
    }
}

/// Geodesic distance on a circle of the given radius.
pub fn circle_distance<T: Scalar>(theta1: T, theta2: T, radius: T) -> Result<T> {
    if !(radius > T::zero()) {
        return invalid(format!("circle radius must be positive, got {radius}"));
    }
    Ok(radius * angular_gap(theta1, theta2))
}

/// `min(|Δθ|, 2π − |Δθ|)` with `Δθ` reduced to `[0, 2π)`.
#[inline]
pub(crate) fn angular_gap<T: Scalar>(theta1: T, theta2: T) -> T {
    let d = (theta1 - theta2).abs();
    let d = if d >= T::TAU() { reduce_angle(d) } else { d };
    d.min(T::TAU() - d)
}

impl<T: Scalar> SpaceDescriptor<T> {
    pub fn circle(radius: T) -> Self {
        Self::Circle { radius }
    }

    pub fn cylinder(radius: T, lo: T, hi: T) -> Self {
        Self::Cylinder {
            radius,
            height_interval: Interval(lo, hi),
        }
    }

    pub fn euclidean(dim: usize) -> Self {
        Self::Euclidean { dim }
    }

    pub fn flat_torus(radii: Vec<T>) -> Self {
        Self::FlatTorus { radii }
    }

    pub fn product(left: Self, right: Self) -> Self {
        Self::Product {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn scaled(base: Self, lambda: T) -> Self {
        Self::Scaled {
            base: Box::new(base),
            lambda,
        }
    }

    pub fn revolution(profile: RevolutionProfile<T>, lo: T, hi: T) -> Self {
        Self::Revolution {
            profile,
            z_interval: Interval(lo, hi),
        }
    }

    /// Checks the descriptor invariants recursively.
    pub fn validate(&self) -> Result<()> {
        let positive = |x: T, what: &str| -> Result<()> {
            if x > T::zero() && x.is_finite() {
                Ok(())
            } else {
                invalid(format!("{what} must be positive and finite, got {x}"))
            }
        };
        let interval = |iv: &Interval<T>| -> Result<()> {
            if iv.is_empty() || !iv.0.is_finite() || !iv.1.is_finite() {
                invalid(format!(
                    "interval [{}, {}] must be finite and nonempty",
                    iv.0, iv.1
                ))
            } else {
                Ok(())
            }
        };
        match self {
            Self::Circle { radius } => positive(*radius, "radius"),
            Self::Cylinder {
                radius,
                height_interval,
            } => {
                positive(*radius, "radius")?;
                interval(height_interval)
            }
            Self::Euclidean { dim } => {
                if *dim == 0 {
                    invalid("euclidean dimension must be positive")
                } else {
                    Ok(())
                }
            }
            Self::FlatTorus { radii } => {
                if radii.is_empty() {
                    return invalid("flat torus needs at least one radius");
                }
                radii.iter().try_for_each(|&r| positive(r, "radius"))
            }
            Self::Product { left, right } => {
                left.validate()?;
                right.validate()
            }
            Self::Scaled { base, lambda } => {
                positive(*lambda, "lambda")?;
                base.validate()
            }
            Self::Revolution {
                profile,
                z_interval,
            } => {
                profile.validate()?;
                interval(z_interval)?;
                profile.check_height(z_interval.0)?;
                profile.check_height(z_interval.1)?;
                let (lo, hi) = (z_interval.0, z_interval.1);
                let n = 64;
                for i in 0..=n {
                    let z = lo + (hi - lo) * T::from_usize_exact(i) / T::from_usize_exact(n);
                    if !(profile.radius(z) > T::zero()) {
                        return invalid(format!("profile radius not positive at z = {z}"));
                    }
                }
                Ok(())
            }
        }
    }

    /// Collapses nested homotheties and drops `scaled(·, 1)`.
    pub fn normalized(&self) -> Self {
        match self {
            Self::Scaled { base, lambda } => {
                let inner = base.normalized();
                let (core, lam) = match inner {
                    Self::Scaled { base, lambda: l2 } => (*base, *lambda * l2),
                    other => (other, *lambda),
                };
                if lam == T::one() {
                    core
                } else {
                    Self::scaled(core, lam)
                }
            }
            Self::Product { left, right } => Self::product(left.normalized(), right.normalized()),
            other => other.clone(),
        }
    }

    fn structural_eq(&self, other: &Self) -> bool {
        use SpaceDescriptor::*;
        match (self, other) {
            (Circle { radius: a }, Circle { radius: b }) => a == b,
            (
                Cylinder {
                    radius: a,
                    height_interval: ia,
                },
                Cylinder {
                    radius: b,
                    height_interval: ib,
                },
            ) => a == b && ia == ib,
            (Euclidean { dim: a }, Euclidean { dim: b }) => a == b,
            (FlatTorus { radii: a }, FlatTorus { radii: b }) => a == b,
            (
                Product {
                    left: la,
                    right: ra,
                },
                Product {
                    left: lb,
                    right: rb,
                },
            ) => la.structural_eq(lb) && ra.structural_eq(rb),
            (
                Scaled {
                    base: a,
                    lambda: la,
                },
                Scaled {
                    base: b,
                    lambda: lb,
                },
            ) => la == lb && a.structural_eq(b),
            (
                Revolution {
                    profile: pa,
                    z_interval: ia,
                },
                Revolution {
                    profile: pb,
                    z_interval: ib,
                },
            ) => pa == pb && ia == ib,
            _ => false,
        }
    }

    /// Number of coordinates of a point.
    pub fn arity(&self) -> usize {
        match self {
            Self::Circle { .. } => 1,
            Self::Cylinder { .. } | Self::Revolution { .. } => 2,
            Self::Euclidean { dim } => *dim,
            Self::FlatTorus { radii } => radii.len(),
            Self::Product { left, right } => left.arity() + right.arity(),
            Self::Scaled { base, .. } => base.arity(),
        }
    }

    /// Per-coordinate flag: `true` for angular coordinates.
    pub fn angle_mask(&self) -> Vec<bool> {
        match self {
            Self::Circle { .. } => vec![true],
            Self::Cylinder { .. } | Self::Revolution { .. } => vec![true, false],
            Self::Euclidean { dim } => vec![false; *dim],
            Self::FlatTorus { radii } => vec![true; radii.len()],
            Self::Product { left, right } => {
                let mut m = left.angle_mask();
                m.extend(right.angle_mask());
                m
            }
            Self::Scaled { base, .. } => base.angle_mask(),
        }
    }

    /// Validates coordinates and reduces angles to `[0, 2π)`.
    pub fn point(&self, coords: Vec<T>) -> Result<Point<T>> {
        if coords.len() != self.arity() {
            return invalid(format!(
                "point has {} coordinates, space expects {}",
                coords.len(),
                self.arity()
            ));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return invalid("point coordinates must be finite");
        }
        let coords: Vec<T> = coords
            .into_iter()
            .zip(self.angle_mask())
            .map(|(c, is_angle)| if is_angle { reduce_angle(c) } else { c })
            .collect();
        self.check_coords(&coords)?;
        Ok(Point { coords })
    }

    fn check_coords(&self, c: &[T]) -> Result<()> {
        match self {
            Self::Cylinder {
                height_interval, ..
            } => {
                if !height_interval.contains(c[1]) {
                    return Err(Error::OutOfRange(format!(
                        "height {} outside [{}, {}]",
                        c[1], height_interval.0, height_interval.1
                    )));
                }
                Ok(())
            }
            Self::Revolution { z_interval, .. } => {
                if !z_interval.contains(c[1]) {
                    return Err(Error::OutOfRange(format!(
                        "height {} outside [{}, {}]",
                        c[1], z_interval.0, z_interval.1
                    )));
                }
                Ok(())
            }
            Self::Product { left, right } => {
                let k = left.arity();
                left.check_coords(&c[..k])?;
                right.check_coords(&c[k..])
            }
            Self::Scaled { base, .. } => base.check_coords(c),
            _ => Ok(()),
        }
    }

    /// A canonical point: angles 0, heights at the middle of the interval.
    pub fn default_point(&self) -> Point<T> {
        let coords = match self {
            Self::Circle { .. } => vec![T::zero()],
            Self::Cylinder {
                height_interval, ..
            } => vec![T::zero(), height_interval.mid()],
            Self::Revolution { z_interval, .. } => vec![T::zero(), z_interval.mid()],
            Self::Euclidean { dim } => vec![T::zero(); *dim],
            Self::FlatTorus { radii } => vec![T::zero(); radii.len()],
            Self::Product { left, right } => {
                let mut c = left.default_point().coords;
                c.extend(right.default_point().coords);
                c
            }
            Self::Scaled { base, .. } => base.default_point().coords,
        };
        Point { coords }
    }

    /// Uniform sample in the chart: angles in `[0, 2π)`, heights uniform in
    /// their interval, Euclidean coordinates uniform in `[0, 1]`.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point<T> {
        let mut coords = Vec::with_capacity(self.arity());
        self.sample_into(rng, &mut coords);
        Point { coords }
    }

    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<T>) {
        let angle = |rng: &mut R| reduce_angle(T::lit(rng.gen::<f64>()) * T::TAU());
        match self {
            Self::Circle { .. } => out.push(angle(rng)),
            Self::Cylinder {
                height_interval: iv,
                ..
            }
            | Self::Revolution { z_interval: iv, .. } => {
                out.push(angle(rng));
                out.push(iv.0 + iv.len() * T::lit(rng.gen::<f64>()));
            }
            Self::Euclidean { dim } => {
                for _ in 0..*dim {
                    out.push(T::lit(rng.gen::<f64>()));
                }
            }
            Self::FlatTorus { radii } => {
                for _ in radii {
                    out.push(angle(rng));
                }
            }
            Self::Product { left, right } => {
                left.sample_into(rng, out);
                right.sample_into(rng, out);
            }
            Self::Scaled { base, .. } => base.sample_into(rng, out),
        }
    }

    /// Whether distances only depend on `|θ₁ − θ₂|` and the two heights
    /// (cylinders and surfaces of revolution, possibly rescaled).
    pub fn is_rotation_invariant_chart(&self) -> bool {
        match self {
            Self::Cylinder { .. } | Self::Revolution { .. } => true,
            Self::Scaled { base, .. } => base.is_rotation_invariant_chart(),
            _ => false,
        }
    }

    /// Geodesic distance between two points.
    pub fn distance(&self, p: &Point<T>, q: &Point<T>, opts: &DistanceOptions) -> Result<T> {
        if p.coords.len() != self.arity() || q.coords.len() != self.arity() {
            return invalid(format!(
                "point arity ({}, {}) does not match space arity {}",
                p.coords.len(),
                q.coords.len(),
                self.arity()
            ));
        }
        self.distance_coords(&p.coords, &q.coords, opts)
    }

    fn distance_coords(&self, a: &[T], b: &[T], opts: &DistanceOptions) -> Result<T> {
        match self {
            Self::Circle { radius } => Ok(*radius * angular_gap(a[0], b[0])),
            Self::Cylinder { radius, .. } => {
                let s = *radius * angular_gap(a[0], b[0]);
                Ok(s.hypot(a[1] - b[1]))
            }
            Self::Euclidean { .. } => {
                let mut acc = T::zero();
                for (x, y) in a.iter().zip(b) {
                    acc += (*x - *y) * (*x - *y);
                }
                Ok(acc.sqrt())
            }
            Self::FlatTorus { radii } => {
                let mut acc = T::zero();
                for ((r, x), y) in radii.iter().zip(a).zip(b) {
                    let s = *r * angular_gap(*x, *y);
                    acc += s * s;
                }
                Ok(acc.sqrt())
            }
            Self::Product { left, right } => {
                let k = left.arity();
                let dl = left.distance_coords(&a[..k], &b[..k], opts)?;
                let dr = right.distance_coords(&a[k..], &b[k..], opts)?;
                Ok(dl.hypot(dr))
            }
            Self::Scaled { base, lambda } => Ok(*lambda * base.distance_coords(a, b, opts)?),
            Self::Revolution {
                profile,
                z_interval,
            } => {
                for z in [a[1], b[1]] {
                    if !z_interval.contains(z) {
                        return Err(Error::OutOfRange(format!(
                            "height {z} outside the surface chart"
                        )));
                    }
                }
                let sol = revolution_distance(
                    profile,
                    *z_interval,
                    &Point::raw(a.to_vec()),
                    &Point::raw(b.to_vec()),
                    opts,
                )?;
                Ok(sol.length)
            }
        }
    }

    /// An isometric copy of a flat cylinder inside this space, if one is
    /// known from the descriptor alone.
    pub fn cylinder_chart(&self) -> Option<CylinderChart<T>> {
        match self {
            Self::Cylinder {
                radius,
                height_interval,
            } => Some(CylinderChart {
                radius: *radius,
                window: *height_interval,
                embed: Embedding::Identity,
            }),
            Self::FlatTorus { radii } if radii.len() >= 2 => Some(CylinderChart {
                radius: radii[0],
                window: Interval(T::zero(), T::PI() * radii[1]),
                embed: Embedding::Torus {
                    second_radius: radii[1],
                    arity: radii.len(),
                },
            }),
            Self::Product { left, right } => {
                if let Some(radius) = left.closed_geodesic_radius() {
                    if let Some((len, seg)) = right.segment() {
                        return Some(CylinderChart {
                            radius,
                            window: Interval(T::zero(), len),
                            embed: Embedding::CircleTimesSegment {
                                circle: left.as_ref().clone(),
                                segment: Box::new(seg),
                            },
                        });
                    }
                }
                if let Some(chart) = left.cylinder_chart() {
                    let pad = right.default_point().coords;
                    return Some(chart.with_suffix(pad));
                }
                right
                    .cylinder_chart()
                    .map(|chart| chart.with_prefix(left.default_point().coords))
            }
            Self::Scaled { base, lambda } => base.cylinder_chart().map(|c| CylinderChart {
                radius: c.radius * *lambda,
                window: Interval(c.window.0 * *lambda, c.window.1 * *lambda),
                embed: Embedding::Scaled {
                    inner: Box::new(c.embed),
                    lambda: *lambda,
                },
            }),
            _ => None,
        }
    }

    fn closed_geodesic_radius(&self) -> Option<T> {
        match self {
            Self::Circle { radius } => Some(*radius),
            Self::FlatTorus { radii } if radii.len() == 1 => Some(radii[0]),
            Self::Scaled { base, lambda } => base.closed_geodesic_radius().map(|r| r * *lambda),
            _ => None,
        }
    }

    /// A minimal geodesic segment `t ↦ point`, `t ∈ [0, len]`, parametrised by arclength.
    fn segment(&self) -> Option<(T, Segment<T>)> {
        match self {
            Self::Euclidean { dim } => Some((T::infinity(), Segment::Line { dim: *dim })),
            Self::Circle { radius } => Some((T::PI() * *radius, Segment::Arc { radius: *radius })),
            Self::Cylinder {
                height_interval, ..
            } => Some((
                height_interval.len(),
                Segment::Vertical {
                    base: height_interval.0,
                },
            )),
            Self::Scaled { base, lambda } => base.segment().map(|(len, s)| {
                (
                    len * *lambda,
                    Segment::Scaled {
                        inner: Box::new(s),
                        lambda: *lambda,
                    },
                )
            }),
            _ => None,
        }
    }
}

impl<T: Scalar> PartialEq for SpaceDescriptor<T> {
    /// Equality up to normalization of homotheties.
    fn eq(&self, other: &Self) -> bool {
        self.normalized().structural_eq(&other.normalized())
    }
}

/// Free-function form of [`SpaceDescriptor::distance`].
pub fn distance<T: Scalar>(
    space: &SpaceDescriptor<T>,
    p: &Point<T>,
    q: &Point<T>,
    opts: &DistanceOptions,
) -> Result<T> {
    space.distance(p, q, opts)
}

#[derive(Debug, Clone)]
enum Segment<T> {
    Line { dim: usize },
    Arc { radius: T },
    Vertical { base: T },
    Scaled { inner: Box<Segment<T>>, lambda: T },
}

impl<T: Scalar> Segment<T> {
    fn coords(&self, t: T) -> Vec<T> {
        match self {
            Segment::Line { dim } => {
                let mut c = vec![T::zero(); *dim];
                c[0] = t;
                c
            }
            Segment::Arc { radius } => vec![reduce_angle(t / *radius)],
            Segment::Vertical { base } => vec![T::zero(), *base + t],
            Segment::Scaled { inner, lambda } => inner.coords(t / *lambda),
        }
    }
}

#[derive(Debug, Clone)]
enum Embedding<T> {
    Identity,
    Torus {
        second_radius: T,
        arity: usize,
    },
    CircleTimesSegment {
        circle: SpaceDescriptor<T>,
        segment: Box<Segment<T>>,
    },
    Prefix {
        pad: Vec<T>,
        inner: Box<Embedding<T>>,
    },
    Suffix {
        pad: Vec<T>,
        inner: Box<Embedding<T>>,
    },
    Scaled {
        inner: Box<Embedding<T>>,
        lambda: T,
    },
}

impl<T: Scalar> Embedding<T> {
    fn coords(&self, theta: T, height: T) -> Vec<T> {
        match self {
            Embedding::Identity => vec![reduce_angle(theta), height],
            Embedding::Torus {
                second_radius,
                arity,
            } => {
                let mut c = vec![T::zero(); *arity];
                c[0] = reduce_angle(theta);
                c[1] = reduce_angle(height / *second_radius);
                c
            }
            Embedding::CircleTimesSegment { circle, segment } => {
                let mut c = vec![T::zero(); circle.arity()];
                c[0] = reduce_angle(theta);
                c.extend(segment.coords(height));
                c
            }
            Embedding::Prefix { pad, inner } => {
                let mut c = pad.clone();
                c.extend(inner.coords(theta, height));
                c
            }
            Embedding::Suffix { pad, inner } => {
                let mut c = inner.coords(theta, height);
                c.extend(pad.iter().copied());
                c
            }
            Embedding::Scaled { inner, lambda } => inner.coords(theta, height / *lambda),
        }
    }
}

/// Isometric embedding of the flat cylinder `S¹(radius) × window`.
///
/// `window` is measured in the ambient distance; `embed(θ, h)` maps the
/// angle `θ` and the height `h ∈ window` to ambient coordinates.
#[derive(Debug, Clone)]
pub struct CylinderChart<T> {
    pub radius: T,
    pub window: Interval<T>,
    embed: Embedding<T>,
}

impl<T: Scalar> CylinderChart<T> {
    pub fn embed(&self, theta: T, height: T) -> Point<T> {
        Point {
            coords: self.embed.coords(theta, height),
        }
    }

    fn with_prefix(self, pad: Vec<T>) -> Self {
        Self {
            embed: Embedding::Prefix {
                pad,
                inner: Box::new(self.embed),
            },
            ..self
        }
    }

    fn with_suffix(self, pad: Vec<T>) -> Self {
        Self {
            embed: Embedding::Suffix {
                pad,
                inner: Box::new(self.embed),
            },
            ..self
        }
    }
}

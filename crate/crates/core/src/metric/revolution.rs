//! Geodesic distance on surfaces of revolution.
//!
//! Along a geodesic `r(z)·cos φ = c` (φ is the angle with the parallel), so
//! a geodesic with `dz/dt ≠ 0` sweeps
//! `dθ/dz = c·√G / (r·√(r² − c²))` and has `ds/dz = r·√G / √(r² − c²)`.
//! For nondecreasing `r` a minimal geodesic never rises above its highest
//! endpoint and turns at most once, at the height where `r = c`.
//! The shooting solver looks for `c` on the monotone branch (no turn) and on
//! the turning branch (parametrised by the turning height). The grid graph
//! in [`super::grid`] is the fallback.

use serde::{Deserialize, Serialize};

use super::{angular_gap, grid, reduce_angle, DistanceOptions, Interval, Point};
use crate::error::{invalid, Error, Result};
use crate::metric::profile::RevolutionProfile;
use crate::quadrature::{integrate, integrate_budget};
use crate::scalar::Scalar;

/// Which algorithm produced a distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMethod {
    /// Coincident points.
    Trivial,
    ClairautShooting,
    GridDijkstra,
}

impl DistanceMethod {
    pub fn tag(&self) -> &'static str {
        match self {
            DistanceMethod::Trivial => "trivial",
            DistanceMethod::ClairautShooting => "clairaut_shooting",
            DistanceMethod::GridDijkstra => "grid_dijkstra",
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) enum PathShape<T> {
    Point,
    /// `z` moves monotonically from `z_from` to `z_to`.
    Monotone {
        z_from: T,
        z_to: T,
        k: T,
    },
    /// Down from `z_from` to `z_turn`, then up to `z_to`.
    Turning {
        z_from: T,
        z_turn: T,
        z_to: T,
    },
    /// Constant height.
    Parallel {
        z: T,
    },
    /// Chart polyline `(θ, z)` from the grid solver, `θ` unwrapped.
    Polyline {
        nodes: Vec<(T, T)>,
    },
}

/// A computed geodesic.
#[derive(Debug, Clone)]
pub struct GeodesicSolution<T> {
    pub length: T,
    pub method: DistanceMethod,
    /// Quadrature error plus the length change from the residual sweep
    /// mismatch (shooting), or the refinement difference (grid).
    pub error_estimate: T,
    /// Clairaut constant of the shooting geodesic.
    pub clairaut_constant: Option<T>,
    /// Highest chart height visited.
    pub max_height: T,
    pub(crate) theta_start: T,
    /// `+1` or `−1`: direction in which θ moves from the start point.
    pub(crate) direction: T,
    pub(crate) shape: PathShape<T>,
}

/// One sample `(θ, z, φ)` along a geodesic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GeodesicSample<T> {
    pub theta: T,
    pub z: T,
    pub phi: T,
}

struct Candidate<T> {
    length: T,
    error: T,
    c: Option<T>,
    theta_start: T,
    direction: T,
    shape: PathShape<T>,
}

const QUAD_BUDGET: usize = 60_000;

struct Shooter<'a, T: Scalar> {
    profile: &'a RevolutionProfile<T>,
    floor: T,
    zlo: T,
    zhi: T,
    r0: T,
    qtol: T,
    theta_tol: T,
}

/// Integrals over one monotone leg `z = z0 + u²`, `u ∈ [0, umax]`, with
/// `r − c = rise(z0, u²) + k`.
struct Leg<T> {
    z0: T,
    k: T,
    c: T,
    umax: T,
}

impl<'a, T: Scalar> Shooter<'a, T> {
    fn integrand(&self, leg: &Leg<T>, u: T, sweep: bool) -> T {
        let dz = u * u;
        let z = leg.z0 + dz;
        let r = self.profile.radius(z);
        let gap = self.profile.rise(leg.z0, dz) + leg.k;
        let dr = self.profile.derivative(z);
        let g = (T::one() + dr * dr).sqrt();
        let root = (gap * (r + leg.c)).sqrt();
        let two_u = u + u;
        if sweep {
            if leg.c == T::zero() {
                return T::zero();
            }
            if root == T::zero() {
                return T::infinity();
            }
            two_u * leg.c * g / (r * root)
        } else {
            if root == T::zero() {
                return T::infinity();
            }
            two_u * r * g / root
        }
    }

    fn integral(&self, leg: &Leg<T>, sweep: bool) -> (T, T) {
        if leg.umax <= T::zero() {
            return (T::zero(), T::zero());
        }
        let res = integrate_budget(
            |u| self.integrand(leg, u, sweep),
            T::zero(),
            leg.umax,
            self.qtol,
            self.qtol,
            48,
            QUAD_BUDGET,
        );
        // a divergent sweep (turning where r′ = 0) stops at the budget with
        // a large finite value, which is all the root scans need
        if res.value.is_finite() {
            (res.value, res.error)
        } else {
            (T::infinity(), T::infinity())
        }
    }

    fn monotone_leg(&self, w: T) -> Leg<T> {
        Leg {
            z0: self.zlo,
            k: self.r0 * w,
            c: self.r0 * (T::one() - w),
            umax: (self.zhi - self.zlo).sqrt(),
        }
    }

    fn turning_legs(&self, z_turn: T) -> [Leg<T>; 2] {
        let c = self.profile.radius(z_turn);
        [
            Leg {
                z0: z_turn,
                k: T::zero(),
                c,
                umax: (self.zlo - z_turn).sqrt(),
            },
            Leg {
                z0: z_turn,
                k: T::zero(),
                c,
                umax: (self.zhi - z_turn).sqrt(),
            },
        ]
    }

    fn turning_sweep(&self, z_turn: T) -> T {
        let [a, b] = self.turning_legs(z_turn);
        self.integral(&a, true).0 + self.integral(&b, true).0
    }

    /// Rejects roots where the bracket collapsed on a jump instead of a zero.
    fn hits(&self, sweep: T, target: T) -> bool {
        (sweep - target).abs() <= T::lit(100.0) * self.theta_tol
    }

    fn w_min() -> T {
        T::epsilon().powf(T::lit(1.5))
    }

    /// Monotone-branch geodesic sweeping `target`, if one exists.
    fn monotone(&self, target: T) -> Option<(T, T, T, T)> {
        if !(self.zhi > self.zlo) {
            return None;
        }
        let s_min = Self::w_min().ln();
        let f = |s: T| self.integral(&self.monotone_leg(s.exp()), true).0 - target;
        let f_lo = f(s_min);
        if !(f_lo >= -self.theta_tol) {
            return None;
        }
        let s = if target <= T::zero() {
            T::zero()
        } else {
            illinois(f, s_min, T::zero(), f_lo, -target, self.theta_tol)?
        };
        let leg = self.monotone_leg(s.exp());
        let (sweep, sweep_err) = self.integral(&leg, true);
        let (len, len_err) = self.integral(&leg, false);
        if !len.is_finite() || !self.hits(sweep, target) {
            return None;
        }
        let err = len_err + leg.c * (sweep_err + (sweep - target).abs());
        Some((len, err, leg.c, leg.k))
    }

    /// Turning-branch geodesics sweeping `target`; returns the shortest.
    fn turning(&self, target: T) -> Option<(T, T, T, T)> {
        if !(self.zlo > self.floor) {
            return None;
        }
        // r constant below zlo: no point where r = c < r(zlo)
        if !(self.profile.rise(self.floor, self.zlo - self.floor) > T::zero()) {
            return None;
        }
        let span = self.zlo - self.floor;
        let ts: Vec<T> = [
            1e-4, 1e-3, 1e-2, 0.03, 0.06, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95,
            1.0,
        ]
        .iter()
        .map(|&t| T::lit(t))
        .collect();
        let zt = |t: T| self.zlo - span * t;
        let g = |t: T| {
            let v = self.turning_sweep(zt(t)) - target;
            if v.is_nan() {
                T::infinity()
            } else {
                v
            }
        };
        let mut prev_t = T::zero();
        // limit z_turn → zlo is the monotone branch at c = r(zlo)
        let mut prev_v = if self.zhi > self.zlo {
            self.integral(&self.monotone_leg(Self::w_min()), true).0 - target
        } else {
            -target
        };
        let mut best: Option<(T, T, T, T)> = None;
        for &t in &ts {
            let v = g(t);
            if prev_v.is_finite() && (prev_v <= T::zero()) != (v <= T::zero()) {
                // at prev_t = 0 the value is the z_turn → zlo limit; Illinois
                // only evaluates strictly inside the bracket
                let (lo_t, lo_v) = (prev_t, prev_v);
                let root = if (lo_v <= T::zero()) != (v <= T::zero()) {
                    let v_hi = if v.is_finite() { v } else { T::max_value() };
                    illinois(g, lo_t, t, lo_v, v_hi, self.theta_tol)
                } else {
                    None
                };
                if let Some(tr) = root {
                    let z_turn = zt(tr);
                    let legs = self.turning_legs(z_turn);
                    let (s1, e1) = self.integral(&legs[0], true);
                    let (s2, e2) = self.integral(&legs[1], true);
                    let (l1, le1) = self.integral(&legs[0], false);
                    let (l2, le2) = self.integral(&legs[1], false);
                    let len = l1 + l2;
                    if len.is_finite() && self.hits(s1 + s2, target) {
                        let c = legs[0].c;
                        let err = le1 + le2 + c * (e1 + e2 + (s1 + s2 - target).abs());
                        if best.map_or(true, |b| len < b.0) {
                            best = Some((len, err, c, z_turn));
                        }
                    }
                }
            }
            // the crossing nearest zlo is taken; deeper turns were never
            // shorter in any profile we checked, and scanning on is costly
            if best.is_some() || !v.is_finite() {
                break;
            }
            prev_t = t;
            prev_v = v;
        }
        best
    }
}

/// Illinois (modified regula falsi) root of a function with a sign change
/// on `[a, b]`; stops when `|f| ≤ ftol` or the bracket collapses.
fn illinois<T: Scalar, F: Fn(T) -> T>(
    f: F,
    mut a: T,
    mut b: T,
    mut fa: T,
    mut fb: T,
    ftol: T,
) -> Option<T> {
    if fa.abs() <= ftol {
        return Some(a);
    }
    if fb.abs() <= ftol {
        return Some(b);
    }
    if (fa < T::zero()) == (fb < T::zero()) {
        return None;
    }
    let mut side = 0i8;
    for _ in 0..200 {
        let mut x = (a * fb - b * fa) / (fb - fa);
        if !x.is_finite() || x <= a.min(b) || x >= a.max(b) {
            x = T::lit(0.5) * (a + b);
        }
        let fx = f(x);
        if fx.abs() <= ftol || (b - a).abs() <= T::epsilon() * T::lit(4.0) * (a.abs() + b.abs()) {
            return Some(x);
        }
        if (fx < T::zero()) == (fb < T::zero()) {
            b = x;
            fb = fx;
            if side == -1 {
                fa = fa * T::lit(0.5);
            }
            side = -1;
        } else {
            a = x;
            fa = fx;
            if side == 1 {
                fb = fb * T::lit(0.5);
            }
            side = 1;
        }
    }
    Some(T::lit(0.5) * (a + b))
}

fn check_point<T: Scalar>(
    profile: &RevolutionProfile<T>,
    iv: Interval<T>,
    p: &Point<T>,
) -> Result<(T, T)> {
    if p.coords.len() != 2 {
        return invalid(format!(
            "surface points are (θ, z), got {} coordinates",
            p.coords.len()
        ));
    }
    let (theta, z) = (p.coords[0], p.coords[1]);
    if !theta.is_finite() || !z.is_finite() {
        return invalid("point coordinates must be finite");
    }
    if !iv.contains(z) {
        return Err(Error::OutOfRange(format!(
            "height {z} outside [{}, {}]",
            iv.0, iv.1
        )));
    }
    profile.check_height(z)?;
    Ok((reduce_angle(theta), z))
}

/// Geodesic distance between `(θ, z)` points on the surface of revolution
/// over the chart `z_interval`.
///
/// Clairaut shooting runs first; the grid graph is used only when shooting
/// finds no admissible geodesic (and `opts.fallback` is set).
pub fn revolution_distance<T: Scalar>(
    profile: &RevolutionProfile<T>,
    z_interval: Interval<T>,
    p: &Point<T>,
    q: &Point<T>,
    opts: &DistanceOptions,
) -> Result<GeodesicSolution<T>> {
    profile.validate()?;
    if !profile.is_nondecreasing() {
        return Err(Error::Unsupported(
            "geodesic solver needs a nondecreasing profile".into(),
        ));
    }
    let (t1, z1) = check_point(profile, z_interval, p)?;
    let (t2, z2) = check_point(profile, z_interval, q)?;
    let gap = angular_gap(t1, t2);
    if gap == T::zero() && z1 == z2 {
        return Ok(GeodesicSolution {
            length: T::zero(),
            method: DistanceMethod::Trivial,
            error_estimate: T::zero(),
            clairaut_constant: None,
            max_height: z1,
            theta_start: t1,
            direction: T::one(),
            shape: PathShape::Point,
        });
    }
    if let Some(c) = shoot(profile, z_interval.0, (t1, z1), (t2, z2), opts) {
        return Ok(GeodesicSolution {
            length: c.length,
            method: DistanceMethod::ClairautShooting,
            error_estimate: c.error,
            clairaut_constant: c.c,
            max_height: z1.max(z2),
            theta_start: c.theta_start,
            direction: c.direction,
            shape: c.shape,
        });
    }
    if !opts.fallback {
        return Err(Error::SolverFailure(format!(
            "no Clairaut geodesic bracketed between ({t1}, {z1}) and ({t2}, {z2})"
        )));
    }
    grid_solution(profile, z_interval.0, (t1, z1), (t2, z2), opts)
}

/// Grid-graph distance with one refinement doubling, regardless of whether
/// shooting would succeed. Used as a cross-check.
pub fn revolution_distance_grid<T: Scalar>(
    profile: &RevolutionProfile<T>,
    z_interval: Interval<T>,
    p: &Point<T>,
    q: &Point<T>,
    opts: &DistanceOptions,
) -> Result<GeodesicSolution<T>> {
    profile.validate()?;
    if !profile.is_nondecreasing() {
        return Err(Error::Unsupported(
            "geodesic solver needs a nondecreasing profile".into(),
        ));
    }
    let a = check_point(profile, z_interval, p)?;
    let b = check_point(profile, z_interval, q)?;
    grid_solution(profile, z_interval.0, a, b, opts)
}

fn grid_solution<T: Scalar>(
    profile: &RevolutionProfile<T>,
    floor: T,
    (t1, z1): (T, T),
    (t2, z2): (T, T),
    opts: &DistanceOptions,
) -> Result<GeodesicSolution<T>> {
    let [nt, nz] = opts.grid;
    let top = z1.max(z2);
    let coarse = grid::shortest_path(profile, floor, (t1, z1), (t2, z2), nt, nz)?;
    let fine = grid::shortest_path(profile, floor, (t1, z1), (t2, z2), 2 * nt, 2 * nz)?;
    let rc = grid::relax(profile, &coarse, floor, top, 256);
    let rf = grid::relax(profile, &fine, floor, top, 256);
    // the two lattices can pick different windings; keep the shorter
    let (best, other) = if rf.length <= rc.length {
        (rf, rc)
    } else {
        (rc, rf)
    };
    let spread = (other.length - best.length).abs();
    let fine = grid::GridPath {
        error: best.error
            + if spread < T::lit(1e-3) * best.length {
                spread
            } else {
                T::zero()
            },
        ..best
    };
    let max_height = fine.nodes.iter().fold(top, |m, n| m.max(n.1));
    Ok(GeodesicSolution {
        length: fine.length,
        method: DistanceMethod::GridDijkstra,
        error_estimate: fine.error,
        clairaut_constant: None,
        max_height,
        theta_start: t1,
        direction: T::one(),
        shape: PathShape::Polyline { nodes: fine.nodes },
    })
}

fn shoot<T: Scalar>(
    profile: &RevolutionProfile<T>,
    floor: T,
    (t1, z1): (T, T),
    (t2, z2): (T, T),
    opts: &DistanceOptions,
) -> Option<Candidate<T>> {
    let eps_floor = T::epsilon() * T::lit(64.0);
    let tol = T::lit(opts.tol).max(eps_floor);
    // the lower point is the start of the monotone leg
    let ((ts, zs), (te, ze)) = if z1 <= z2 {
        ((t1, z1), (t2, z2))
    } else {
        ((t2, z2), (t1, z1))
    };
    let sh = Shooter {
        profile,
        floor,
        zlo: zs,
        zhi: ze,
        r0: profile.radius(zs),
        qtol: (tol * T::lit(0.01)).max(eps_floor),
        theta_tol: (tol * T::lit(0.1) / profile.radius(ze).max(T::one())).max(eps_floor),
    };
    let gap = angular_gap(ts, te);
    // direction that reaches `te` from `ts` by sweeping `gap`
    let fwd = reduce_angle(te - ts);
    let short_dir = if fwd <= T::PI() { T::one() } else { -T::one() };
    let mut targets = vec![(gap, short_dir)];
    let other = T::TAU() - gap;
    if (other - gap).abs() > T::epsilon() * T::lit(16.0) {
        targets.push((other, -short_dir));
    }
    let r_floor = profile.radius(floor);
    let parallel_is_geodesic = zs == ze && (profile.derivative(zs) == T::zero() || zs <= floor);

    let mut best: Option<Candidate<T>> = None;
    let consider = |best: &mut Option<Candidate<T>>, c: Candidate<T>| {
        if best.as_ref().map_or(true, |b| c.length < b.length) {
            *best = Some(c);
        }
    };
    for (target, dir) in targets {
        let lower = (r_floor * target).hypot(ze - zs);
        if best.as_ref().map_or(false, |b| b.length <= lower) {
            continue;
        }
        if zs == ze {
            let len = sh.r0 * target;
            if parallel_is_geodesic {
                consider(
                    &mut best,
                    Candidate {
                        length: len,
                        error: T::zero(),
                        c: Some(sh.r0),
                        theta_start: ts,
                        direction: dir,
                        shape: PathShape::Parallel { z: zs },
                    },
                );
            }
        }
        let mono = sh.monotone(target);
        if let Some((len, err, c, k)) = mono {
            consider(
                &mut best,
                Candidate {
                    length: len,
                    error: err,
                    c: Some(c),
                    theta_start: ts,
                    direction: dir,
                    shape: PathShape::Monotone {
                        z_from: zs,
                        z_to: ze,
                        k,
                    },
                },
            );
        } else if let Some((len, err, c, z_turn)) = sh.turning(target) {
            consider(
                &mut best,
                Candidate {
                    length: len,
                    error: err,
                    c: Some(c),
                    theta_start: ts,
                    direction: dir,
                    shape: PathShape::Turning {
                        z_from: zs,
                        z_turn,
                        z_to: ze,
                    },
                },
            );
        }
    }
    best
}

/// Samples `(θ, z, φ)` along a computed geodesic, `m` per leg (at least 3).
///
/// `θ` is unwrapped from the start point, `φ ∈ [0, π/2]` is the angle with
/// the parallel, estimated by finite differences along the path.
pub fn geodesic_samples<T: Scalar>(
    profile: &RevolutionProfile<T>,
    sol: &GeodesicSolution<T>,
    m: usize,
) -> Result<Vec<GeodesicSample<T>>> {
    let m = m.max(3);
    let c = sol.clairaut_constant.unwrap_or(T::zero());
    let dir = sol.direction;
    let mut out = Vec::new();
    let tol = T::epsilon() * T::lit(64.0);
    let sh = Shooter {
        profile,
        floor: T::zero(),
        zlo: T::zero(),
        zhi: T::zero(),
        r0: T::one(),
        qtol: tol,
        theta_tol: tol,
    };
    let leg = |z0: T, k: T, z1: T| {
        sh.leg_samples(
            &Leg {
                z0,
                k,
                c,
                umax: (z1 - z0).sqrt(),
            },
            m,
        )
    };
    match &sol.shape {
        PathShape::Point => out.push(GeodesicSample {
            theta: sol.theta_start,
            z: sol.max_height,
            phi: T::zero(),
        }),
        PathShape::Parallel { z } => {
            for i in 0..m {
                let s = T::from_usize_exact(i) / T::from_usize_exact(m - 1);
                out.push(GeodesicSample {
                    theta: sol.theta_start + dir * s * sol.length / profile.radius(*z),
                    z: *z,
                    phi: T::zero(),
                });
            }
        }
        PathShape::Monotone { z_from, z_to, k } => {
            let pts = leg(*z_from, *k, *z_to);
            for (th, z, phi) in pts {
                out.push(GeodesicSample {
                    theta: sol.theta_start + dir * th,
                    z,
                    phi,
                });
            }
        }
        PathShape::Turning {
            z_from,
            z_turn,
            z_to,
        } => {
            let first = leg(*z_turn, T::zero(), *z_from);
            let second = leg(*z_turn, T::zero(), *z_to);
            let sweep1 = first.last().map_or(T::zero(), |p| p.0);
            for &(th, z, phi) in first.iter().rev() {
                out.push(GeodesicSample {
                    theta: sol.theta_start + dir * (sweep1 - th),
                    z,
                    phi,
                });
            }
            for &(th, z, phi) in second.iter().skip(1) {
                out.push(GeodesicSample {
                    theta: sol.theta_start + dir * (sweep1 + th),
                    z,
                    phi,
                });
            }
        }
        PathShape::Polyline { nodes } => {
            let n = nodes.len();
            for i in 0..n {
                let (a, b) = (nodes[i.saturating_sub(1)], nodes[(i + 1).min(n - 1)]);
                let z = nodes[i].1;
                let r = profile.radius(z);
                let dr = profile.derivative(z);
                let g = (T::one() + dr * dr).sqrt();
                let phi = (g * (b.1 - a.1).abs()).atan2(r * (b.0 - a.0).abs());
                out.push(GeodesicSample {
                    theta: nodes[i].0,
                    z,
                    phi,
                });
            }
        }
    }
    Ok(out)
}

impl<'a, T: Scalar> Shooter<'a, T> {
    /// `(θ(u_i), z(u_i), φ(u_i))` for `u_i` uniform on `[0, umax]`; θ is
    /// accumulated panel by panel and differentiated numerically.
    fn leg_samples(&self, leg: &Leg<T>, m: usize) -> Vec<(T, T, T)> {
        let (z0, umax) = (leg.z0, leg.umax);
        {
            let h = umax / T::from_usize_exact(m - 1);
            let u = |i: usize| h * T::from_usize_exact(i);
            let mut theta = vec![T::zero(); m];
            for i in 1..m {
                let panel = integrate(
                    |x| self.integrand(leg, x, true),
                    u(i - 1),
                    u(i),
                    self.qtol,
                    self.qtol,
                    40,
                );
                theta[i] = theta[i - 1] + panel.value;
            }
            let two = T::lit(2.0);
            let three = T::lit(3.0);
            let four = T::lit(4.0);
            (0..m)
                .map(|i| {
                    let dth = if h == T::zero() {
                        T::zero()
                    } else if i == 0 {
                        (-three * theta[0] + four * theta[1] - theta[2]) / (two * h)
                    } else if i == m - 1 {
                        (three * theta[i] - four * theta[i - 1] + theta[i - 2]) / (two * h)
                    } else {
                        (theta[i + 1] - theta[i - 1]) / (two * h)
                    };
                    let ui = u(i);
                    let z = z0 + ui * ui;
                    let r = self.profile.radius(z);
                    let dr = self.profile.derivative(z);
                    let g = (T::one() + dr * dr).sqrt();
                    let dz = two * ui;
                    let phi = (g * dz).atan2(r * dth.abs());
                    (theta[i], z, phi)
                })
                .collect()
        }
    }
}

/// `max |r(z)·cos φ − c₀| / c₀` over the samples, `c₀` taken at the first
/// sample. A vertical geodesic (`c₀ = 0`) reports the absolute deviation.
pub fn clairaut_residual<T: Scalar>(
    profile: &RevolutionProfile<T>,
    samples: &[GeodesicSample<T>],
) -> Result<T> {
    let first = samples.first().ok_or_else(|| {
        Error::InvalidArgument("clairaut_residual needs at least one sample".into())
    })?;
    let inv = |s: &GeodesicSample<T>| profile.radius(s.z) * s.phi.cos();
    let c0 = inv(first);
    let scale = if c0.abs() > T::zero() {
        c0.abs()
    } else {
        T::one()
    };
    Ok(samples
        .iter()
        .map(|s| (inv(s) - c0).abs() / scale)
        .fold(T::zero(), T::max))
}

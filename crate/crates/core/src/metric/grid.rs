//! Shortest paths on a `(θ, z)` grid graph over a surface of revolution.
//!
//! Nodes sit on a periodic `nθ × nz` lattice spanning `[floor, max(z₁, z₂)]`
//! (a minimal geodesic never rises above its highest endpoint when `r` is
//! nondecreasing). Edges follow a 16-neighbour stencil; each edge weight is
//! the Simpson estimate of the length of the straight chart segment under
//! the first fundamental form `E dθ² + G dz²`. The two endpoints are extra
//! nodes wired to the lattice nodes around them. The requested `nθ × nz`
//! is an upper bound: the lattice is shrunk along one axis so cells are
//! square in physical units.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::metric::profile::RevolutionProfile;
use crate::metric::{angular_gap, reduce_angle};
use crate::scalar::Scalar;

const STENCIL: [(i64, i64); 16] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
    (2, 1),
    (2, -1),
    (-2, 1),
    (-2, -1),
    (1, 2),
    (1, -2),
    (-1, 2),
    (-1, -2),
];

pub(crate) struct GridPath<T> {
    pub length: T,
    /// Length change over the last relaxation refinement (0 if not relaxed).
    pub error: T,
    /// `(θ, z)` polyline with θ unwrapped from the start angle.
    pub nodes: Vec<(T, T)>,
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

struct Metric<'a, T: Scalar> {
    profile: &'a RevolutionProfile<T>,
}

impl<'a, T: Scalar> Metric<'a, T> {
    fn eg(&self, z: f64) -> (f64, f64) {
        let z = T::lit(z);
        let r = self.profile.radius(z).to_f64_lossy();
        let dr = self.profile.derivative(z).to_f64_lossy();
        (r * r, 1.0 + dr * dr)
    }

    /// Simpson length of the chart segment `(0, za) → (dθ, zb)`.
    fn segment(&self, dtheta: f64, za: f64, zb: f64) -> f64 {
        let f = |z: f64| {
            let (e, g) = self.eg(z);
            (e * dtheta * dtheta + g * (zb - za) * (zb - za)).sqrt()
        };
        (f(za) + 4.0 * f(0.5 * (za + zb)) + f(zb)) / 6.0
    }
}

pub(crate) fn shortest_path<T: Scalar>(
    profile: &RevolutionProfile<T>,
    floor: T,
    (t1, z1): (T, T),
    (t2, z2): (T, T),
    nt: usize,
    nz: usize,
) -> Result<GridPath<T>> {
    if nt < 8 || nz < 3 {
        return Err(Error::InvalidArgument(format!(
            "grid {nt}×{nz} too coarse (need ≥ 8×3)"
        )));
    }
    let metric = Metric { profile };
    let lo = floor.to_f64_lossy();
    let hi = z1.max(z2).to_f64_lossy();
    let (za, zb) = (z1.to_f64_lossy(), z2.to_f64_lossy());
    let target_theta = reduce_angle(t2 - t1).to_f64_lossy();
    if hi - lo <= 1e-14 * hi.abs().max(1.0) {
        // chart squeezed to a single parallel
        let gap = angular_gap(t1, t2);
        let r = profile.radius(floor);
        let dir = if target_theta <= std::f64::consts::PI {
            T::one()
        } else {
            -T::one()
        };
        return Ok(GridPath {
            length: r * gap,
            error: T::zero(),
            nodes: vec![(t1, z1), (t1 + dir * gap, z2)],
        });
    }
    // isotropic spacing in physical units at the mean radius, capped by the
    // requested resolution; a stretched lattice stair-steps shallow paths
    let r_mean = 0.5 * (profile.radius(floor) + profile.radius(z1.max(z2))).to_f64_lossy();
    let h = (std::f64::consts::TAU * r_mean / nt as f64).max((hi - lo) / (nz - 1) as f64);
    let nt = ((std::f64::consts::TAU * r_mean / h).ceil() as usize).max(8);
    let nz = (((hi - lo) / h).ceil() as usize + 1).max(3);
    let dt = std::f64::consts::TAU / nt as f64;
    let dz = (hi - lo) / (nz - 1) as f64;
    let zrow = |j: usize| if j + 1 == nz { hi } else { lo + dz * j as f64 };

    // weight[j * 16 + s]: edge from row j along stencil s (rotation invariant)
    let mut weight = vec![f64::INFINITY; nz * 16];
    for j in 0..nz {
        for (s, &(di, dj)) in STENCIL.iter().enumerate() {
            let jj = j as i64 + dj;
            if jj >= 0 && (jj as usize) < nz {
                weight[j * 16 + s] = metric.segment(di as f64 * dt, zrow(j), zrow(jj as usize));
            }
        }
    }

    let lattice = nt * nz;
    let (src, dst) = (lattice, lattice + 1);
    let id = |i: usize, j: usize| j * nt + i;
    // exact point → nearby lattice nodes, as (node, length, θ offset of node)
    let connectors = |theta: f64, z: f64| -> Vec<(usize, f64, f64)> {
        let ic = (theta / dt).floor() as i64;
        let jc = (((z - lo) / dz).floor() as i64).clamp(0, nz as i64 - 1);
        let mut out = Vec::new();
        for di in -2..=3 {
            for dj in -2..=3 {
                let jj = jc + dj;
                if jj < 0 || jj >= nz as i64 {
                    continue;
                }
                let ii = ic + di;
                let off = ii as f64 * dt - theta;
                let i = ii.rem_euclid(nt as i64) as usize;
                let zz = zrow(jj as usize);
                out.push((id(i, jj as usize), metric.segment(off, z, zz), off));
            }
        }
        out
    };
    let from_src = connectors(0.0, za);
    let into_dst = connectors(target_theta, zb);

    let n = lattice + 2;
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    // direct segment when both endpoints share a neighbourhood
    let direct_gap = {
        let g = target_theta;
        if g <= std::f64::consts::PI {
            g
        } else {
            g - std::f64::consts::TAU
        }
    };
    if direct_gap.abs() <= 3.0 * dt && (za - zb).abs() <= 3.0 * dz {
        dist[dst] = metric.segment(direct_gap, za, zb);
        prev[dst] = src;
        heap.push(Entry(dist[dst], dst));
    }
    for &(v, w, _) in &from_src {
        if w < dist[v] {
            dist[v] = w;
            prev[v] = src;
            heap.push(Entry(w, v));
        }
    }
    let mut dst_in = vec![f64::INFINITY; lattice];
    for &(v, w, _) in &into_dst {
        dst_in[v] = dst_in[v].min(w);
    }
    while let Some(Entry(d, v)) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        if v == dst {
            break;
        }
        let (i, j) = (v % nt, v / nt);
        if dst_in[v].is_finite() {
            let nd = d + dst_in[v];
            if nd < dist[dst] {
                dist[dst] = nd;
                prev[dst] = v;
                heap.push(Entry(nd, dst));
            }
        }
        for (s, &(di, dj)) in STENCIL.iter().enumerate() {
            let w = weight[j * 16 + s];
            if !w.is_finite() {
                continue;
            }
            let ii = (i as i64 + di).rem_euclid(nt as i64) as usize;
            let jj = (j as i64 + dj) as usize;
            let u = id(ii, jj);
            let nd = d + w;
            if nd < dist[u] {
                dist[u] = nd;
                prev[u] = v;
                heap.push(Entry(nd, u));
            }
        }
    }
    if !dist[dst].is_finite() {
        return Err(Error::SolverFailure(
            "grid graph: target unreachable".into(),
        ));
    }

    // walk back and unwrap θ
    let mut chain = vec![dst];
    while let Some(&last) = chain.last() {
        if last == src {
            break;
        }
        chain.push(prev[last]);
    }
    chain.reverse();
    let pos = |v: usize| -> (f64, f64) {
        if v == src {
            (0.0, za)
        } else if v == dst {
            (target_theta, zb)
        } else {
            ((v % nt) as f64 * dt, zrow(v / nt))
        }
    };
    let mut nodes = Vec::with_capacity(chain.len());
    let mut theta_acc = 0.0;
    let mut last = pos(src);
    nodes.push((t1, z1));
    for &v in &chain[1..] {
        let p = pos(v);
        let mut step = p.0 - last.0;
        step -= std::f64::consts::TAU * (step / std::f64::consts::TAU).round();
        theta_acc += step;
        let z = if v == dst { z2 } else { T::lit(p.1) };
        nodes.push((t1 + T::lit(theta_acc), z));
        last = p;
    }
    Ok(GridPath {
        length: T::lit(dist[dst]),
        error: T::zero(),
        nodes,
    })
}

type M2 = [[f64; 2]; 2];

fn m2_inv(m: &M2) -> Option<M2> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if !(det.abs() > 0.0) || !det.is_finite() {
        return None;
    }
    Some([
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ])
}

fn m2_mul(a: &M2, b: &M2) -> M2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

fn m2_vec(a: &M2, v: [f64; 2]) -> [f64; 2] {
    [
        a[0][0] * v[0] + a[0][1] * v[1],
        a[1][0] * v[0] + a[1][1] * v[1],
    ]
}

/// Gradient and Hessian of `e(x) = L(x₀..x₁ → x₂..x₃)²` by central differences.
fn segment_derivs<F: Fn([f64; 4]) -> f64>(e: &F, x: [f64; 4], h: f64) -> ([f64; 4], [[f64; 4]; 4]) {
    let at = |d: &[(usize, f64)]| {
        let mut y = x;
        for &(i, s) in d {
            y[i] += s;
        }
        e(y)
    };
    let f0 = e(x);
    let mut g = [0.0; 4];
    let mut hm = [[0.0; 4]; 4];
    for i in 0..4 {
        let (fp, fm) = (at(&[(i, h)]), at(&[(i, -h)]));
        g[i] = (fp - fm) / (2.0 * h);
        hm[i][i] = (fp - 2.0 * f0 + fm) / (h * h);
        for j in 0..i {
            let v = (at(&[(i, h), (j, h)]) - at(&[(i, h), (j, -h)]) - at(&[(i, -h), (j, h)])
                + at(&[(i, -h), (j, -h)]))
                / (4.0 * h * h);
            hm[i][j] = v;
            hm[j][i] = v;
        }
    }
    (g, hm)
}

/// Smooths a chart polyline towards a geodesic with fixed endpoints.
///
/// The path is resampled to 16 vertices and relaxed by Newton's method on
/// the discrete energy `Σ Lᵢ²`, whose minimisers are constant-speed
/// geodesic polylines (length alone is flat along the path tangent). The
/// Hessian is block tridiagonal with 2×2 blocks. Vertices are then doubled
/// by midpoint insertion and relaxed again, up to `max_vertices`. Heights
/// stay in `[lo, hi]`.
pub(crate) fn relax<T: Scalar>(
    profile: &RevolutionProfile<T>,
    path: &GridPath<T>,
    lo: T,
    hi: T,
    max_vertices: usize,
) -> GridPath<T> {
    let metric = Metric { profile };
    let (lo, hi) = (lo.to_f64_lossy(), hi.to_f64_lossy());
    let raw: Vec<(f64, f64)> = path
        .nodes
        .iter()
        .map(|&(t, z)| (t.to_f64_lossy(), z.to_f64_lossy()))
        .collect();
    let seg = |a: (f64, f64), b: (f64, f64)| metric.segment(b.0 - a.0, a.1, b.1);
    let total = |p: &[(f64, f64)]| p.windows(2).map(|w| seg(w[0], w[1])).sum::<f64>();
    let energy = |p: &[(f64, f64)]| {
        p.windows(2)
            .map(|w| {
                let l = seg(w[0], w[1]);
                l * l
            })
            .sum::<f64>()
    };

    let mut cum = vec![0.0];
    for w in raw.windows(2) {
        let d = (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1);
        cum.push(cum.last().unwrap() + d);
    }
    let span = *cum.last().unwrap_or(&0.0);
    if raw.len() < 2 || !(span > 0.0) {
        return GridPath {
            length: path.length,
            error: T::zero(),
            nodes: path.nodes.clone(),
        };
    }
    // resample by chart arclength
    let k = 16;
    let mut pts: Vec<(f64, f64)> = (0..k)
        .map(|i| {
            let s = span * i as f64 / (k - 1) as f64;
            let j = cum.partition_point(|&c| c < s).clamp(1, raw.len() - 1);
            let seg_len = cum[j] - cum[j - 1];
            let f = if seg_len > 0.0 {
                ((s - cum[j - 1]) / seg_len).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let (a, b) = (raw[j - 1], raw[j]);
            (a.0 + f * (b.0 - a.0), a.1 + f * (b.1 - a.1))
        })
        .collect();
    pts[0] = raw[0];
    pts[k - 1] = raw[raw.len() - 1];

    let mut lengths = Vec::new();
    loop {
        let m = pts.len();
        let n = m - 2;
        let step = span / (m - 1) as f64;
        for _ in 0..50 {
            let mut g = vec![[0.0; 2]; n];
            let mut diag = vec![[[0.0; 2]; 2]; n];
            let mut upper = vec![[[0.0; 2]; 2]; n.saturating_sub(1)];
            for s in 0..m - 1 {
                let e = |x: [f64; 4]| {
                    let l = seg((x[0], x[1]), (x[2], x[3]));
                    l * l
                };
                let x = [pts[s].0, pts[s].1, pts[s + 1].0, pts[s + 1].1];
                let (sg, sh) = segment_derivs(&e, x, 1e-4 * step);
                // vertex s is interior index s-1, vertex s+1 is s
                if s >= 1 {
                    let i = s - 1;
                    g[i][0] += sg[0];
                    g[i][1] += sg[1];
                    for a in 0..2 {
                        for b in 0..2 {
                            diag[i][a][b] += sh[a][b];
                        }
                    }
                }
                if s + 1 <= n {
                    let i = s;
                    g[i][0] += sg[2];
                    g[i][1] += sg[3];
                    for a in 0..2 {
                        for b in 0..2 {
                            diag[i][a][b] += sh[2 + a][2 + b];
                        }
                    }
                }
                if s >= 1 && s + 1 <= n {
                    for a in 0..2 {
                        for b in 0..2 {
                            upper[s - 1][a][b] = sh[a][2 + b];
                        }
                    }
                }
            }
            // block Thomas: solve H d = −g
            let mut dprime = diag.clone();
            let mut rhs: Vec<[f64; 2]> = g.iter().map(|v| [-v[0], -v[1]]).collect();
            let mut ok = true;
            for i in 1..n {
                let Some(inv) = m2_inv(&dprime[i - 1]) else {
                    ok = false;
                    break;
                };
                let lower = [
                    [upper[i - 1][0][0], upper[i - 1][1][0]],
                    [upper[i - 1][0][1], upper[i - 1][1][1]],
                ];
                let w = m2_mul(&lower, &inv);
                let wu = m2_mul(&w, &upper[i - 1]);
                for a in 0..2 {
                    for b in 0..2 {
                        dprime[i][a][b] -= wu[a][b];
                    }
                }
                let wr = m2_vec(&w, rhs[i - 1]);
                rhs[i][0] -= wr[0];
                rhs[i][1] -= wr[1];
            }
            let mut d = vec![[0.0; 2]; n];
            if ok {
                for i in (0..n).rev() {
                    let mut r = rhs[i];
                    if i + 1 < n {
                        let u = m2_vec(&upper[i], d[i + 1]);
                        r[0] -= u[0];
                        r[1] -= u[1];
                    }
                    match m2_inv(&dprime[i]) {
                        Some(inv) => d[i] = m2_vec(&inv, r),
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
            }
            if !ok || d.iter().any(|v| !v[0].is_finite() || !v[1].is_finite()) {
                // gradient step as a last resort
                let scale = step * step / energy(&pts).max(1e-300);
                d = g.iter().map(|v| [-v[0] * scale, -v[1] * scale]).collect();
            }
            let e0 = energy(&pts);
            let mut lam = 1.0;
            let mut moved = 0.0_f64;
            let mut accepted = false;
            while lam > 1e-6 {
                let mut trial = pts.clone();
                for i in 0..n {
                    let p = &mut trial[i + 1];
                    p.0 += lam * d[i][0];
                    p.1 = (p.1 + lam * d[i][1]).clamp(lo, hi);
                }
                if energy(&trial) <= e0 {
                    moved = d.iter().map(|v| lam * v[0].hypot(v[1])).fold(0.0, f64::max);
                    pts = trial;
                    accepted = true;
                    break;
                }
                lam *= 0.5;
            }
            if !accepted || moved < 1e-10 * step {
                break;
            }
        }
        lengths.push(total(&pts));
        if 2 * m - 1 > max_vertices {
            break;
        }
        let mut finer = Vec::with_capacity(2 * m - 1);
        for w in pts.windows(2) {
            finer.push(w[0]);
            finer.push((0.5 * (w[0].0 + w[1].0), 0.5 * (w[0].1 + w[1].1)));
        }
        finer.push(pts[m - 1]);
        pts = finer;
    }
    let l = lengths.len();
    let length = lengths[l - 1];
    let error = if l >= 2 {
        (lengths[l - 2] - length).abs()
    } else {
        0.0
    };
    let mut nodes: Vec<(T, T)> = pts.iter().map(|&(t, z)| (T::lit(t), T::lit(z))).collect();
    nodes[0] = path.nodes[0];
    let last = nodes.len() - 1;
    nodes[last] = path.nodes[path.nodes.len() - 1];
    GridPath {
        length: T::lit(length),
        error: T::lit(error),
        nodes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn cylinder_grid_is_close_and_above() {
        let prof = RevolutionProfile::<f64>::ConstantOne;
        let p = shortest_path(&prof, 0.0, (0.0, 0.0), (PI, 1.0), 256, 128).unwrap();
        let exact = (PI * PI + 1.0).sqrt();
        assert!(p.length >= exact - 1e-9);
        // raw lattice paths carry the stencil's direction bias (< 2.8%)
        assert!((p.length - exact) / exact < 0.028, "{}", p.length);
        let end = p.nodes.last().unwrap();
        assert!((end.0.abs() - PI).abs() < 1e-12 && end.1 == 1.0);
    }

    #[test]
    fn vertical_segment_exact() {
        let prof = RevolutionProfile::<f64>::ConstantOne;
        let p = shortest_path(&prof, 0.0, (0.5, 0.2), (0.5, 0.9), 64, 64).unwrap();
        assert!((p.length - 0.7).abs() < 1e-12, "{}", p.length);
    }

    #[test]
    fn squeezed_chart_is_a_parallel() {
        let prof = RevolutionProfile::<f64>::power(1.0, 6.0);
        let p = shortest_path(&prof, 0.0, (0.0, 0.0), (1.0, 0.0), 64, 64).unwrap();
        assert!((p.length - 1.0).abs() < 1e-15);
    }

    #[test]
    fn relaxation_straightens_grid_paths() {
        let prof = RevolutionProfile::<f64>::ConstantOne;
        let p = shortest_path(&prof, 0.0, (0.0, 0.0), (1.0, 0.2), 512, 512).unwrap();
        let r = relax(&prof, &p, 0.0, 0.2, 256);
        let exact = 1.0_f64.hypot(0.2);
        assert!((r.length - exact).abs() < 1e-8, "{} vs {exact}", r.length);
        assert!(r.length <= p.length + 1e-12);
    }

    #[test]
    fn rejects_tiny_grids() {
        let prof = RevolutionProfile::<f64>::ConstantOne;
        assert!(shortest_path(&prof, 0.0, (0.0, 0.0), (1.0, 1.0), 4, 4).is_err());
    }
}

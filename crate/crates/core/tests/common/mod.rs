//! Helpers shared by the integration suites.
#![allow(dead_code)]

use pkweir::pointcloud::triangle_area;
use pkweir::sampler::{generate_batch, DesignSpace};
use pkweir::solidmesh::TriangleMesh;
use pkweir::{Exec, PkwDerived, PkwFixed, PkwSample};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

pub fn lab() -> PkwFixed {
    PkwFixed::laboratory()
}

/// Feasible, grid-snapped designs from the standard space.
pub fn feasible(n: usize, seed: u64) -> Vec<PkwSample> {
    generate_batch(&DesignSpace::standard(lab()), n, seed, Exec::Parallel).unwrap().samples
}

/// Relative mismatch, with `scale` as the floor of the denominator.
pub fn rel(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(scale)
}

/// Recomputes every derived quantity without trigonometric functions, from
/// the rise `d = W_i,u - W_i,d` and run `h = 2 (B - T_s)` of a sidewall, and
/// returns the largest relative mismatch with `derived`, named.
pub fn identity_mismatch(fixed: &PkwFixed, s: &PkwSample, derived: &PkwDerived) -> (&'static str, f64) {
    let p = fixed.height;
    let b = s.base_length * (1.0 + s.inlet_overhang_ratio + s.outlet_overhang_ratio);
    let d = s.inlet_width_upstream - s.inlet_width_downstream;
    let h = 2.0 * (b - s.wall_thickness);
    let hyp = d.hypot(h);
    let ts2 = s.wall_thickness * hyp / h;
    let dts = s.wall_thickness * d / h;
    let ts3 = s.wall_thickness * (hyp - d) / h;
    let wu = fixed.width / f64::from(fixed.units);
    let wou = wu - s.inlet_width_upstream - 2.0 * ts3;
    let wod = wu - s.inlet_width_downstream - 2.0 * ts3;
    let checks = [
        ("W_u", rel(derived.unit_width, wu, p)),
        ("B_i", rel(derived.inlet_overhang, s.inlet_overhang_ratio * s.base_length, p)),
        ("B_o", rel(derived.outlet_overhang, s.outlet_overhang_ratio * s.base_length, p)),
        ("B", rel(derived.length, b, p)),
        ("alpha", rel(derived.sidewall_angle, d.atan2(h), 1.0)),
        ("sin alpha", rel(derived.sidewall_angle.sin(), d / hyp, 1.0)),
        ("T_s2", rel(derived.wall_thickness_transverse, ts2, p)),
        ("delta T_s", rel(derived.wall_offset, dts, p)),
        ("T_s3", rel(derived.wall_thickness_reduced, ts3, p)),
        ("T_s3 = T_s2 - delta", rel(derived.wall_thickness_reduced, derived.wall_thickness_transverse - derived.wall_offset, p)),
        ("W_o_u", rel(derived.outlet_width_upstream, wou, p)),
        ("W_o_d", rel(derived.outlet_width_downstream, wod, p)),
        ("W_o_d - W_o_u", rel(derived.outlet_width_downstream - derived.outlet_width_upstream, d, p)),
    ];
    checks.into_iter().fold(("", 0.0), |acc, c| if c.1 > acc.1 { c } else { acc })
}

/// Parity ray cast along +z: fraction of stratified jittered points of the
/// bounding box `[0,bx]×[0,by]×[0,bz]` lying inside a closed mesh, using
/// `k³` points.
pub fn inside_fraction(mesh: &TriangleMesh, extent: [f64; 3], k: usize, seed: u64) -> f64 {
    // Bucket non-vertical triangles by their (x, y) bounding boxes.
    let cells = 64usize;
    let mut grid: Vec<Vec<usize>> = vec![Vec::new(); cells * cells];
    let cell_of = |v: f64, e: f64| ((v / e * cells as f64).floor().max(0.0) as usize).min(cells - 1);
    for t in 0..mesh.triangles.len() {
        let [a, b, c] = mesh.triangle_points(t);
        let area2 = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
        if area2.abs() < 1e-18 {
            continue;
        }
        let (x0, x1) = (a[0].min(b[0]).min(c[0]), a[0].max(b[0]).max(c[0]));
        let (y0, y1) = (a[1].min(b[1]).min(c[1]), a[1].max(b[1]).max(c[1]));
        for i in cell_of(x0, extent[0])..=cell_of(x1, extent[0]) {
            for j in cell_of(y0, extent[1])..=cell_of(y1, extent[1]) {
                grid[i * cells + j].push(t);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inside = 0usize;
    let step = extent.map(|e| e / k as f64);
    for i in 0..k {
        for j in 0..k {
            for l in 0..k {
                let p = [
                    (i as f64 + rng.random::<f64>()) * step[0],
                    (j as f64 + rng.random::<f64>()) * step[1],
                    (l as f64 + rng.random::<f64>()) * step[2],
                ];
                let bucket = &grid[cell_of(p[0], extent[0]) * cells + cell_of(p[1], extent[1])];
                let mut crossings = 0;
                for &t in bucket {
                    let [a, b, c] = mesh.triangle_points(t);
                    let det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
                    let u = ((p[0] - a[0]) * (c[1] - a[1]) - (p[1] - a[1]) * (c[0] - a[0])) / det;
                    let v = ((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])) / det;
                    if u < 0.0 || v < 0.0 || u + v > 1.0 {
                        continue;
                    }
                    let z = a[2] + u * (b[2] - a[2]) + v * (c[2] - a[2]);
                    if z > p[2] {
                        crossings += 1;
                    }
                }
                inside += crossings % 2;
            }
        }
    }
    inside as f64 / (k * k * k) as f64
}

/// Chi-square p-value of observed per-triangle counts against counts
/// proportional to area. Triangles are pooled in index order into cells of
/// at least `min_expected` expected points.
pub fn area_chi_square(mesh: &TriangleMesh, sources: &[u32], min_expected: f64) -> (f64, usize) {
    let areas: Vec<f64> = (0..mesh.triangles.len())
        .map(|t| {
            let [a, b, c] = mesh.triangle_points(t);
            triangle_area(a, b, c)
        })
        .collect();
    let total: f64 = areas.iter().sum();
    let n = sources.len() as f64;
    let mut observed = vec![0usize; areas.len()];
    for &s in sources {
        observed[s as usize] += 1;
    }
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut e, mut o) = (0.0, 0.0);
    for t in 0..areas.len() {
        e += n * areas[t] / total;
        o += observed[t] as f64;
        if e >= min_expected {
            cells.push((o, e));
            e = 0.0;
            o = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => cells.push((o, e)),
        }
    }
    let stat: f64 = cells.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = cells.len() - 1;
    let p = 1.0 - ChiSquared::new(dof as f64).unwrap().cdf(stat);
    (p, dof)
}

/// Chi-square p-value for uniformity inside triangles: each point is placed
/// in one of the four midpoint sub-triangles of its source triangle, which
/// have equal area.
pub fn within_triangle_chi_square(mesh: &TriangleMesh, points: &[[f64; 3]], sources: &[u32]) -> f64 {
    let mut counts = [0f64; 4];
    for (p, &t) in points.iter().zip(sources) {
        let [a, b, c] = mesh.triangle_points(t as usize);
        // Barycentric coordinates by least squares on the triangle plane.
        let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
        let w = [p[0] - a[0], p[1] - a[1], p[2] - a[2]];
        let dot = |x: [f64; 3], y: [f64; 3]| x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
        let (uu, uv, vv, wu, wv) = (dot(u, u), dot(u, v), dot(v, v), dot(w, u), dot(w, v));
        let det = uu * vv - uv * uv;
        let s = (wu * vv - wv * uv) / det;
        let r = (wv * uu - wu * uv) / det;
        let cell = if s > 0.5 {
            0
        } else if r > 0.5 {
            1
        } else if s + r < 0.5 {
            2
        } else {
            3
        };
        counts[cell] += 1.0;
    }
    let e = points.len() as f64 / 4.0;
    let stat: f64 = counts.iter().map(|o| (o - e).powi(2) / e).sum();
    1.0 - ChiSquared::new(3.0).unwrap().cdf(stat)
}

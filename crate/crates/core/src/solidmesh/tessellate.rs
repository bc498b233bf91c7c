//! Triangulation of the region model into a closed surface.
//!
//! The plan is cut into slabs between streamwise stations and bands between
//! plan lines. Every (slab, band) cell is a prism with linear floor and roof.
//! Faces are emitted for roofs, floors, and the exposed parts of vertical
//! cell sides (where the neighbouring cell does not cover the same height).
//! Vertical edges on a shared corner line are split at every elevation any
//! incident cell uses there, so neighbouring faces always share vertices.

use super::regions::{merge_sorted, PlanModel};
use super::{validate_mesh, MeshError, TriangleMesh};
use crate::pkw::PkwDesign;
use std::collections::HashMap;

/// Lattice resolution for vertex identity, metres.
pub const LATTICE: f64 = 1e-9;
// Elevation differences below this are treated as equal when deciding
// which side of a shared face is exposed.
const Z_EPS: f64 = 1e-12;

fn key(v: f64) -> i64 {
    (v / LATTICE).round() as i64
}

type Interval = (f64, f64);

struct Builder {
    index: HashMap<[i64; 3], u32>,
    vertices: Vec<[f64; 3]>,
    triangles: Vec<[u32; 3]>,
    // Sorted elevations per corner line, keyed by (station, lattice y).
    nodes: HashMap<(usize, i64), Vec<f64>>,
}

impl Builder {
    fn vertex(&mut self, p: [f64; 3]) -> u32 {
        let k = [key(p[0]), key(p[1]), key(p[2])];
        if let Some(&i) = self.index.get(&k) {
            return i;
        }
        let i = self.vertices.len() as u32;
        self.vertices.push(p);
        self.index.insert(k, i);
        i
    }

    fn note(&mut self, station: usize, y: f64, z: f64) {
        self.nodes.entry((station, key(y))).or_default().push(z);
    }

    fn finish_nodes(&mut self) {
        for zs in self.nodes.values_mut() {
            zs.sort_by(|a, b| a.total_cmp(b));
            zs.dedup_by(|a, b| key(*a) == key(*b));
        }
    }

    /// Vertices on the vertical line through `(x, y)` from `zb` up to `zt`.
    fn chain(&mut self, station: usize, x: f64, y: f64, zb: f64, zt: f64) -> Vec<u32> {
        let (kb, kt) = (key(zb), key(zt));
        let inner: Vec<f64> = self
            .nodes
            .get(&(station, key(y)))
            .map(|zs| zs.iter().copied().filter(|&z| key(z) > kb && key(z) < kt).collect())
            .unwrap_or_default();
        let mut out = vec![self.vertex([x, y, zb])];
        for z in inner {
            out.push(self.vertex([x, y, z]));
        }
        if kt != kb {
            out.push(self.vertex([x, y, zt]));
        }
        out
    }

    fn triangle(&mut self, t: [u32; 3], outward: [f64; 3]) {
        if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
            return;
        }
        let [a, b, c] = t.map(|i| self.vertices[i as usize]);
        let n = cross(sub(b, a), sub(c, a));
        if dot(n, outward) < 0.0 {
            self.triangles.push([t[0], t[2], t[1]]);
        } else {
            self.triangles.push(t);
        }
    }

    /// Triangulates the strip between two bottom-to-top vertical chains.
    fn zipper(&mut self, left: &[u32], right: &[u32], outward: [f64; 3]) {
        let (mut i, mut j) = (0, 0);
        while i + 1 < left.len() || j + 1 < right.len() {
            let advance_left = if i + 1 == left.len() {
                false
            } else if j + 1 == right.len() {
                true
            } else {
                self.vertices[left[i + 1] as usize][2] <= self.vertices[right[j + 1] as usize][2]
            };
            if advance_left {
                self.triangle([left[i], right[j], left[i + 1]], outward);
                i += 1;
            } else {
                self.triangle([left[i], right[j], right[j + 1]], outward);
                j += 1;
            }
        }
    }

    fn polygon(&mut self, pts: &[[f64; 3]], outward: [f64; 3]) {
        let mut ids: Vec<u32> = Vec::with_capacity(pts.len());
        for p in pts {
            let id = self.vertex(*p);
            if ids.last() != Some(&id) && ids.first() != Some(&id) {
                ids.push(id);
            }
        }
        for k in 1..ids.len().saturating_sub(1) {
            self.triangle([ids[0], ids[k], ids[k + 1]], outward);
        }
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// A piece of a shared vertical face exposed on one side only.
struct Piece {
    /// +1 when the solid is on the first (lower-y or upstream) side.
    side: f64,
    start: Interval,
    end: Interval,
}

/// Parts of `a` not covered by `c`, and vice versa, along a face whose
/// intervals vary linearly from `*0` to `*1`. The layout is decided at `*m`.
fn exposed(a: Option<[Interval; 3]>, c: Option<[Interval; 3]>) -> Vec<Piece> {
    let mut out = Vec::new();
    one_side(a, c, 1.0, &mut out);
    one_side(c, a, -1.0, &mut out);
    out
}

fn one_side(a: Option<[Interval; 3]>, c: Option<[Interval; 3]>, side: f64, out: &mut Vec<Piece>) {
    let Some([a0, am, a1]) = a else { return };
    let mut push = |start: Interval, end: Interval| {
        if key(start.1) > key(start.0) || key(end.1) > key(end.0) {
            out.push(Piece { side, start, end });
        }
    };
    let Some([c0, cm, c1]) = c else {
        push(a0, a1);
        return;
    };
    if am.0 < cm.0 - Z_EPS {
        if am.1 < cm.0 {
            push(a0, a1);
        } else {
            push((a0.0, c0.0), (a1.0, c1.0));
        }
    }
    if am.1 > cm.1 + Z_EPS {
        if am.0 > cm.1 {
            push(a0, a1);
        } else {
            push((c0.1, a0.1), (c1.1, a1.1));
        }
    }
}

struct Slab {
    x0: f64,
    x1: f64,
    active: Vec<usize>,
    // Per band: interval at x0, midpoint, x1 (only meaningful when active).
    iv: Vec<[Interval; 3]>,
}

fn stations(model: &PlanModel, x_segments: usize) -> Vec<f64> {
    let base = model.breakpoints();
    let mut xs = base.clone();
    let nb = model.band_count();
    for w in base.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let xm = 0.5 * (x0 + x1);
        let active: Vec<usize> = (0..nb).filter(|&b| model.band_width(b, xm) > 0.0).collect();
        for pair in active.windows(2) {
            let (a, c) = (pair[0], pair[1]);
            let (a0, a1) = (model.band_interval(a, x0, xm), model.band_interval(a, x1, xm));
            let (c0, c1) = (model.band_interval(c, x0, xm), model.band_interval(c, x1, xm));
            for (f0, f1) in [(a0.0, a1.0), (a0.1, a1.1)] {
                for (g0, g1) in [(c0.0, c1.0), (c0.1, c1.1)] {
                    let (d0, d1) = (f0 - g0, f1 - g1);
                    if d0 * d1 < 0.0 {
                        xs.push(x0 + (x1 - x0) * d0 / (d0 - d1));
                    }
                }
            }
        }
    }
    let xs = merge_sorted(xs, 0.0, model.length);
    let mut out = Vec::with_capacity(xs.len() * x_segments);
    for w in xs.windows(2) {
        for k in 0..x_segments {
            out.push(w[0] + (w[1] - w[0]) * k as f64 / x_segments as f64);
        }
    }
    out.push(model.length);
    out
}

/// Triangulates the solid of `design` with every elementary streamwise
/// piece divided into `x_segments` slabs.
pub fn tessellate(design: &PkwDesign, x_segments: usize) -> Result<TriangleMesh, MeshError> {
    super::regions::build_regions(design)?;
    let model = PlanModel::new(design);
    let xs = stations(&model, x_segments.max(1));
    let nb = model.band_count();
    let nl = model.line_count();
    let ys: Vec<Vec<f64>> = xs.iter().map(|&x| (0..nl).map(|l| model.line_y(l, x)).collect()).collect();

    let slabs: Vec<Slab> = xs
        .windows(2)
        .map(|w| {
            let (x0, x1) = (w[0], w[1]);
            let xm = 0.5 * (x0 + x1);
            let active = (0..nb).filter(|&b| model.band_width(b, xm) > 0.0).collect();
            let iv = (0..nb)
                .map(|b| {
                    [model.band_interval(b, x0, xm), model.band_interval(b, xm, xm), model.band_interval(b, x1, xm)]
                })
                .collect();
            Slab { x0, x1, active, iv }
        })
        .collect();

    let mut bld = Builder { index: HashMap::new(), vertices: Vec::new(), triangles: Vec::new(), nodes: HashMap::new() };
    for (s, slab) in slabs.iter().enumerate() {
        for &b in &slab.active {
            let [i0, _, i1] = slab.iv[b];
            for l in [b, b + 1] {
                bld.note(s, ys[s][l], i0.0);
                bld.note(s, ys[s][l], i0.1);
                bld.note(s + 1, ys[s + 1][l], i1.0);
                bld.note(s + 1, ys[s + 1][l], i1.1);
            }
        }
    }
    bld.finish_nodes();

    for (s, slab) in slabs.iter().enumerate() {
        let (x0, x1) = (slab.x0, slab.x1);
        // Roofs and floors.
        for &b in &slab.active {
            let [i0, _, i1] = slab.iv[b];
            if key(i0.1) == key(i0.0) && key(i1.1) == key(i1.0) {
                continue;
            }
            let (yl0, yr0, yl1, yr1) = (ys[s][b], ys[s][b + 1], ys[s + 1][b], ys[s + 1][b + 1]);
            bld.polygon(
                &[[x0, yl0, i0.1], [x1, yl1, i1.1], [x1, yr1, i1.1], [x0, yr0, i0.1]],
                [0.0, 0.0, 1.0],
            );
            bld.polygon(
                &[[x0, yl0, i0.0], [x1, yl1, i1.0], [x1, yr1, i1.0], [x0, yr0, i0.0]],
                [0.0, 0.0, -1.0],
            );
        }
        // Side faces along plan lines, including the outer walls.
        let act = &slab.active;
        for k in 0..=act.len() {
            let left = (k > 0).then(|| act[k - 1]);
            let right = act.get(k).copied();
            let line = match (left, right) {
                (Some(a), _) => a + 1,
                (None, Some(c)) => c,
                (None, None) => continue,
            };
            let (y0, y1) = (ys[s][line], ys[s + 1][line]);
            let outward = [-(y1 - y0), x1 - x0, 0.0];
            for p in exposed(left.map(|a| slab.iv[a]), right.map(|c| slab.iv[c])) {
                let ca = bld.chain(s, x0, y0, p.start.0, p.start.1);
                let cb = bld.chain(s + 1, x1, y1, p.end.0, p.end.1);
                bld.zipper(&ca, &cb, outward.map(|v| v * p.side));
            }
        }
    }

    // Side faces across bands at each station.
    for (j, &x) in xs.iter().enumerate() {
        for b in 0..nb {
            let (yl, yr) = (ys[j][b], ys[j][b + 1]);
            if !(yr - yl > 0.0) {
                continue;
            }
            let before = (j > 0).then(|| slabs[j - 1].iv[b][2]).map(|v| [v, v, v]);
            let after = slabs.get(j).map(|sl| sl.iv[b][0]).map(|v| [v, v, v]);
            for p in exposed(before, after) {
                let ca = bld.chain(j, x, yl, p.start.0, p.start.1);
                let cb = bld.chain(j, x, yr, p.end.0, p.end.1);
                bld.zipper(&ca, &cb, [p.side, 0.0, 0.0]);
            }
        }
    }

    let mesh = TriangleMesh { vertices: bld.vertices, triangles: bld.triangles };
    let report = validate_mesh(&mesh);
    if report.n_boundary_edges > 0 || report.n_nonmanifold_edges > 0 {
        return Err(MeshError::StitchFailure { edges: super::validate::open_edges(&mesh, 16) });
    }
    Ok(mesh)
}

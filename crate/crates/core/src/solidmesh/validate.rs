use super::TriangleMesh;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshReport {
    pub watertight: bool,
    pub n_boundary_edges: usize,
    pub n_nonmanifold_edges: usize,
    /// Edges used twice in the same direction (inconsistent winding).
    pub n_misoriented_edges: usize,
    pub n_degenerate_triangles: usize,
    pub signed_volume: f64,
    pub bbox: [[f64; 2]; 3],
    pub min_triangle_area: f64,
}

impl MeshReport {
    /// Closed, manifold, consistently wound and enclosing positive volume.
    pub fn is_valid_solid(&self) -> bool {
        self.watertight && self.n_misoriented_edges == 0 && self.n_degenerate_triangles == 0 && self.signed_volume > 0.0
    }
}

// Per undirected edge: (count forward, count backward) relative to (min, max).
fn edge_counts(mesh: &TriangleMesh) -> HashMap<(u32, u32), (u32, u32)> {
    let mut edges: HashMap<(u32, u32), (u32, u32)> = HashMap::with_capacity(mesh.triangles.len() * 3 / 2);
    for t in &mesh.triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            let e = edges.entry((a.min(b), a.max(b))).or_default();
            if a < b {
                e.0 += 1;
            } else {
                e.1 += 1;
            }
        }
    }
    edges
}

pub fn triangle_area(mesh: &TriangleMesh, t: &[u32; 3]) -> f64 {
    let [a, b, c] = t.map(|i| mesh.vertices[i as usize]);
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let n = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
    0.5 * (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt()
}

/// Volume enclosed by the surface, positive for outward winding.
pub fn signed_volume(mesh: &TriangleMesh) -> f64 {
    let Some(&origin) = mesh.vertices.first() else { return 0.0 };
    let rel = |i: u32| {
        let p = mesh.vertices[i as usize];
        [p[0] - origin[0], p[1] - origin[1], p[2] - origin[2]]
    };
    let mut total = 0.0;
    for t in &mesh.triangles {
        let (a, b, c) = (rel(t[0]), rel(t[1]), rel(t[2]));
        total += a[0] * (b[1] * c[2] - b[2] * c[1]) + a[1] * (b[2] * c[0] - b[0] * c[2]) + a[2] * (b[0] * c[1] - b[1] * c[0]);
    }
    total / 6.0
}

pub fn validate_mesh(mesh: &TriangleMesh) -> MeshReport {
    let edges = edge_counts(mesh);
    let mut n_boundary_edges = 0;
    let mut n_nonmanifold_edges = 0;
    let mut n_misoriented_edges = 0;
    for &(f, b) in edges.values() {
        match f + b {
            1 => n_boundary_edges += 1,
            2 => {
                if f != 1 {
                    n_misoriented_edges += 1;
                }
            }
            _ => n_nonmanifold_edges += 1,
        }
    }
    let mut bbox = [[f64::INFINITY, f64::NEG_INFINITY]; 3];
    for p in &mesh.vertices {
        for k in 0..3 {
            bbox[k][0] = bbox[k][0].min(p[k]);
            bbox[k][1] = bbox[k][1].max(p[k]);
        }
    }
    let areas: Vec<f64> = mesh.triangles.iter().map(|t| triangle_area(mesh, t)).collect();
    let min_triangle_area = areas.iter().copied().fold(f64::INFINITY, f64::min);
    let n_degenerate_triangles = areas.iter().filter(|&&a| a <= 0.0).count();
    MeshReport {
        watertight: n_boundary_edges == 0 && n_nonmanifold_edges == 0,
        n_boundary_edges,
        n_nonmanifold_edges,
        n_misoriented_edges,
        n_degenerate_triangles,
        signed_volume: signed_volume(mesh),
        bbox,
        min_triangle_area,
    }
}

/// Up to `limit` edges that are not shared by exactly two triangles.
pub fn open_edges(mesh: &TriangleMesh, limit: usize) -> Vec<[[f64; 3]; 2]> {
    let mut bad: Vec<(u32, u32)> =
        edge_counts(mesh).into_iter().filter(|(_, (f, b))| f + b != 2).map(|(e, _)| e).collect();
    bad.sort_unstable();
    bad.into_iter()
        .take(limit)
        .map(|(a, b)| [mesh.vertices[a as usize], mesh.vertices[b as usize]])
        .collect()
}

/// Euler characteristic `V - E + F` of the triangle set.
pub fn euler_characteristic(mesh: &TriangleMesh) -> i64 {
    let e = edge_counts(mesh).len() as i64;
    mesh.vertices.len() as i64 - e + mesh.triangles.len() as i64
}

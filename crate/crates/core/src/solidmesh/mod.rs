//! Closed triangle meshes of the weir solid.
//!
//! Coordinates: `x` downstream over `[0, B]`, `y` across over `[0, W]`, `z`
//! up over `[0, P]`, metres. Keys are ramps spanning `B - T_s` between crest
//! walls of streamwise thickness `T_s`; under the overhangs the key floors
//! are slabs of thickness `T_s`, over the base they are filled to the bed.

pub mod crest;
pub mod regions;
pub mod stl;
pub mod tessellate;
pub mod validate;

pub use crest::{trace_crest, CrestTrace};
pub use regions::{analytic_volume, build_regions, PlanModel, PlanRegion, RegionKind};
pub use stl::{read_stl, write_stl};
pub use tessellate::tessellate;
pub use validate::{validate_mesh, MeshReport};

use crate::exec::Exec;
use crate::pkw::PkwDesign;
use serde::{Deserialize, Serialize};

/// Streamwise subdivisions per elementary piece used by default.
pub const DEFAULT_X_SEGMENTS: usize = 8;

#[derive(Debug, thiserror::Error)]
pub enum MeshError {
    #[error("degenerate {kind:?} region in unit {unit}")]
    DegenerateRegion { kind: RegionKind, unit: usize },
    #[error("mesh is not closed; {} open or non-manifold edges, first {:?}", edges.len(), edges.first())]
    StitchFailure { edges: Vec<[[f64; 3]; 2]> },
    #[error("malformed STL: {0}")]
    MalformedStl(String),
    #[error("crest trace failed: {0}")]
    CrestTrace(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Indexed triangle surface; counter-clockwise winding seen from outside.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TriangleMesh {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[u32; 3]>,
}

impl TriangleMesh {
    pub fn triangle_points(&self, t: usize) -> [[f64; 3]; 3] {
        self.triangles[t].map(|i| self.vertices[i as usize])
    }
}

/// Meshes a design with the default subdivision.
pub fn mesh_design(design: &PkwDesign) -> Result<TriangleMesh, MeshError> {
    tessellate(design, DEFAULT_X_SEGMENTS)
}

/// Meshes many designs; results are in input order for either mode.
pub fn mesh_batch(designs: &[PkwDesign], x_segments: usize, exec: Exec) -> Vec<Result<TriangleMesh, MeshError>> {
    exec.map(designs, |d| tessellate(d, x_segments))
}

/// Crest length traced on the mesh of `design`.
pub fn traced_crest_length(design: &PkwDesign, mesh: &TriangleMesh) -> Result<f64, MeshError> {
    let t = trace_crest(mesh, design.fixed.height, design.fixed.width, design.derived.length)?;
    Ok(t.developed_length)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pkw::{PkwFixed, PkwSample};

    fn design(s: PkwSample) -> PkwDesign {
        PkwDesign::new(PkwFixed::laboratory(), s).unwrap()
    }

    #[test]
    fn trapezoid_closed_with_matching_volume() {
        let d = design(PkwSample::symmetric(0.40, 0.5, 0.02, 0.20, 0.14));
        let mesh = mesh_design(&d).unwrap();
        let r = validate_mesh(&mesh);
        assert!(r.is_valid_solid(), "{r:?}");
        assert_eq!(validate::euler_characteristic(&mesh), 2);
        let v = analytic_volume(&d);
        assert!((r.signed_volume - v).abs() <= 1e-9 * v, "{} vs {}", r.signed_volume, v);
        let len = traced_crest_length(&d, &mesh).unwrap();
        assert!((len - d.derived.crest_length).abs() <= 1e-9 * len, "{len} vs {}", d.derived.crest_length);
    }

    #[test]
    fn rectangular_refinement_invariant() {
        let d = design(PkwSample::symmetric(0.40, 0.5, 0.02, 0.15, 0.15));
        let coarse = validate_mesh(&tessellate(&d, 1).unwrap()).signed_volume;
        let fine = validate_mesh(&tessellate(&d, 16).unwrap()).signed_volume;
        assert!((coarse - fine).abs() <= 1e-12 * fine);
        let m = PlanModel::new(&d);
        for x in [0.0, 0.1, 0.5, 0.8] {
            assert!((m.band_width(1, x) - 0.02).abs() < 1e-15);
        }
    }

    #[test]
    fn sidewall_width_is_transverse_thickness() {
        let d = design(PkwSample::symmetric(0.40, 0.5, 0.02, 0.20, 0.14));
        let m = PlanModel::new(&d);
        for k in 0..=20 {
            let x = 0.8 * k as f64 / 20.0;
            assert!((m.band_width(1, x) - d.derived.wall_thickness_transverse).abs() < 1e-12);
            assert!((m.band_width(3, x) - d.derived.wall_thickness_transverse).abs() < 1e-12);
        }
    }
}

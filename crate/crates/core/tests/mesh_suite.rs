mod common;

use common::{feasible, inside_fraction, lab, rel};
use pkweir::solidmesh::{
    analytic_volume, mesh_batch, mesh_design, read_stl, tessellate, traced_crest_length, validate::euler_characteristic,
    validate_mesh, write_stl, DEFAULT_X_SEGMENTS,
};
use pkweir::{Exec, PkwDesign, PkwSample};

fn designs(n: usize, seed: u64) -> Vec<PkwDesign> {
    feasible(n, seed).into_iter().map(|s| PkwDesign::new(lab(), s).unwrap()).collect()
}

#[test]
fn seeded_designs_give_closed_solids() {
    let ds = designs(50, 2024);
    let meshes = mesh_batch(&ds, DEFAULT_X_SEGMENTS, Exec::Parallel);
    for (d, m) in ds.iter().zip(meshes) {
        let m = m.unwrap_or_else(|e| panic!("{:?}: {e}", d.sample));
        let r = validate_mesh(&m);
        assert!(r.watertight && r.n_boundary_edges == 0 && r.n_nonmanifold_edges == 0, "{r:?}");
        assert!(r.is_valid_solid(), "{r:?}");
        assert_eq!(euler_characteristic(&m), 2);
        let expect = [d.derived.length, lab().width, lab().height];
        for k in 0..3 {
            assert!(r.bbox[k][0].abs() <= 1e-12, "axis {k} min {}", r.bbox[k][0]);
            assert!((r.bbox[k][1] - expect[k]).abs() <= 1e-12, "axis {k} max {}", r.bbox[k][1]);
        }
        let v = analytic_volume(d);
        assert!(rel(r.signed_volume, v, 0.0) <= 1e-9, "{} vs {v}", r.signed_volume);
    }
}

#[test]
fn serial_and_parallel_meshes_agree() {
    let ds = designs(8, 7);
    let a = mesh_batch(&ds, 4, Exec::Serial);
    let b = mesh_batch(&ds, 4, Exec::Parallel);
    for (x, y) in a.into_iter().zip(b) {
        assert_eq!(x.unwrap(), y.unwrap());
    }
}

#[test]
fn volume_independent_of_refinement() {
    for d in designs(5, 8) {
        let coarse = validate_mesh(&tessellate(&d, 2).unwrap()).signed_volume;
        let fine = validate_mesh(&tessellate(&d, 24).unwrap()).signed_volume;
        assert!(rel(coarse, fine, 0.0) <= 1e-9, "{coarse} vs {fine}");
    }
}

#[test]
fn monte_carlo_volume_agrees() {
    let d = PkwDesign::new(lab(), PkwSample::symmetric(0.40, 0.5, 0.02, 0.20, 0.14)).unwrap();
    let mesh = mesh_design(&d).unwrap();
    let extent = [d.derived.length, lab().width, lab().height];
    let frac = inside_fraction(&mesh, extent, 100, 99);
    let mc = frac * extent.iter().product::<f64>();
    let v = analytic_volume(&d);
    assert!(rel(mc, v, 0.0) <= 0.005, "monte carlo {mc} vs {v}");
}

#[test]
fn traced_crest_matches_parametric_length() {
    for d in designs(20, 31) {
        let mesh = mesh_design(&d).unwrap();
        let traced = traced_crest_length(&d, &mesh).unwrap();
        assert!(rel(traced, d.derived.crest_length, 0.0) <= 1e-9, "{traced} vs {}", d.derived.crest_length);
    }
}

#[test]
fn rectangular_crest_has_closed_form() {
    let d = PkwDesign::new(lab(), PkwSample::symmetric(0.40, 0.5, 0.02, 0.15, 0.15)).unwrap();
    assert_eq!(d.derived.unit_crest_length, d.derived.unit_width + 2.0 * d.derived.length);
    let traced = traced_crest_length(&d, &mesh_design(&d).unwrap()).unwrap();
    assert!(rel(traced, 3.0 * (1.0 / 3.0 + 1.6), 0.0) <= 1e-9, "{traced}");
}

#[test]
fn stl_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for (i, d) in designs(3, 4).iter().enumerate() {
        let mesh = mesh_design(d).unwrap();
        let path = dir.path().join(format!("g{i}.stl"));
        write_stl(&mesh, &format!("g{i}"), &path).unwrap();
        let bytes = std::fs::metadata(&path).unwrap().len();
        assert_eq!(bytes as usize, 84 + 50 * mesh.triangles.len());
        let back = read_stl(&path).unwrap();
        assert_eq!(back.triangles.len(), mesh.triangles.len());
        assert_eq!(back.vertices.len(), mesh.vertices.len());
        for t in 0..mesh.triangles.len() {
            let (a, b) = (mesh.triangle_points(t), back.triangle_points(t));
            for k in 0..3 {
                for c in 0..3 {
                    assert_eq!(b[k][c], f64::from(a[k][c] as f32));
                }
            }
        }
        let r = validate_mesh(&back);
        assert!(r.watertight, "{r:?}");
        assert!(rel(r.signed_volume, analytic_volume(d), 0.0) <= 1e-5);
    }
}

mod common;

use common::{area_chi_square, feasible, lab, within_triangle_chi_square};
use pkweir::pointcloud::{
    decode_cloud, denormalize, encode_cloud, normalize_unit_cube, read_cloud, read_xyz, sample_surface,
    sample_surface_indexed, subsample, write_cloud, write_xyz, Frame, DATASET_POINTS, MODEL_POINTS,
};
use pkweir::solidmesh::{mesh_batch, DEFAULT_X_SEGMENTS};
use pkweir::{Exec, PkwDesign};
use rand::{Rng, SeedableRng};

fn meshes(n: usize, seed: u64) -> Vec<pkweir::solidmesh::TriangleMesh> {
    let ds: Vec<PkwDesign> = feasible(n, seed).into_iter().map(|s| PkwDesign::new(lab(), s).unwrap()).collect();
    mesh_batch(&ds, DEFAULT_X_SEGMENTS, Exec::Parallel).into_iter().map(Result::unwrap).collect()
}

#[test]
fn sampling_is_area_proportional() {
    let ms = meshes(10, 606);
    let results = Exec::Parallel.map_range(ms.len(), |i| {
        let (cloud, src) = sample_surface_indexed(&ms[i], DATASET_POINTS, 1000 + i as u64).unwrap();
        let (p_area, dof) = area_chi_square(&ms[i], &src, 20.0);
        let p_within = within_triangle_chi_square(&ms[i], &cloud.points, &src);
        (p_area, dof, p_within)
    });
    for (i, (p_area, dof, p_within)) in results.into_iter().enumerate() {
        assert!(dof >= 20, "mesh {i}: only {dof} degrees of freedom");
        assert!(p_area > 1e-4, "mesh {i}: area p = {p_area}");
        assert!(p_within > 1e-4, "mesh {i}: within-triangle p = {p_within}");
    }
}

#[test]
fn chi_square_rejects_biased_sampling() {
    // Control: triangles drawn uniformly by index instead of by area.
    let m = &meshes(1, 9)[0];
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let src: Vec<u32> = (0..20_000).map(|_| rng.random_range(0..m.triangles.len() as u32)).collect();
    let (p, _) = area_chi_square(m, &src, 20.0);
    assert!(p < 1e-4, "{p}");
}

#[test]
fn points_lie_on_source_triangles() {
    let m = &meshes(1, 12)[0];
    let (cloud, src) = sample_surface_indexed(m, 2000, 3).unwrap();
    for (p, &t) in cloud.points.iter().zip(&src) {
        let [a, b, c] = m.triangle_points(t as usize);
        let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
        let n = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
        let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        let off = (0..3).map(|k| (p[k] - a[k]) * n[k]).sum::<f64>() / len;
        assert!(off.abs() < 1e-12, "{off}");
    }
}

#[test]
fn normalization_preserves_distance_ratios() {
    let m = &meshes(1, 13)[0];
    let cloud = sample_surface(m, 5000, 4).unwrap();
    let unit = normalize_unit_cube(&cloud).unwrap();
    assert_eq!(unit.frame, Frame::UnitCube);
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in &unit.points {
        for k in 0..3 {
            assert!(p[k] >= 0.0 && p[k] <= 1.0);
            hi[k] = hi[k].max(p[k]);
        }
    }
    assert_eq!(hi.iter().cloned().fold(0.0, f64::max), 1.0);
    let dist = |a: [f64; 3], b: [f64; 3]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let n = cloud.len();
    for _ in 0..10_000 {
        let [i, j, k, l] = [0; 4].map(|_| rng.random_range(0..n));
        let (d0, d1) = (dist(cloud.points[i], cloud.points[j]), dist(cloud.points[k], cloud.points[l]));
        if d1 < 1e-3 {
            continue;
        }
        let (u0, u1) = (dist(unit.points[i], unit.points[j]), dist(unit.points[k], unit.points[l]));
        let (r0, r1) = (d0 / d1, u0 / u1);
        assert!((r0 - r1).abs() <= 1e-12 * r0.max(1.0), "{r0} vs {r1}");
    }
    let back = denormalize(&unit);
    for (p, q) in cloud.points.iter().zip(&back.points) {
        for k in 0..3 {
            assert!((p[k] - q[k]).abs() <= 1e-12, "{} vs {}", p[k], q[k]);
        }
    }
}

#[test]
fn binary_clouds_round_trip_exactly() {
    let m = &meshes(1, 14)[0];
    let cloud = normalize_unit_cube(&sample_surface(m, 3000, 6).unwrap()).unwrap();
    let mut buf = Vec::new();
    encode_cloud(&cloud, &mut buf).unwrap();
    let once = decode_cloud(&buf).unwrap();
    // Coordinates are stored in single precision, the transform in double.
    assert_eq!(once.transform, cloud.transform);
    assert_eq!(once.frame, cloud.frame);
    for (p, q) in cloud.points.iter().zip(&once.points) {
        assert_eq!(*q, p.map(|v| f64::from(v as f32)));
    }
    let mut again = Vec::new();
    encode_cloud(&once, &mut again).unwrap();
    assert_eq!(again, buf);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.bin");
    write_cloud(&once, &path).unwrap();
    assert_eq!(read_cloud(&path).unwrap().points, once.points);
    // Truncation is detected.
    assert!(decode_cloud(&buf[..buf.len() - 3]).is_err());
}

#[test]
fn text_clouds_round_trip_exactly() {
    let m = &meshes(1, 15)[0];
    let cloud = sample_surface(m, 500, 7).unwrap();
    let mut buf = Vec::new();
    write_xyz(&cloud, &mut buf).unwrap();
    let back = read_xyz(buf.as_slice()).unwrap();
    assert_eq!(back.points, cloud.points);
}

#[test]
fn subsampling_is_seeded_and_drawn_from_the_cloud() {
    let m = &meshes(1, 16)[0];
    let cloud = sample_surface(m, 20_000, 8).unwrap();
    let a = subsample(&cloud, MODEL_POINTS, 1);
    let b = subsample(&cloud, MODEL_POINTS, 1);
    let c = subsample(&cloud, MODEL_POINTS, 2);
    assert_eq!(a, b);
    assert_ne!(a.points, c.points);
    assert_eq!(a.len(), MODEL_POINTS);
    let all: std::collections::HashSet<[u64; 3]> = cloud.points.iter().map(|p| p.map(f64::to_bits)).collect();
    let picked: std::collections::HashSet<[u64; 3]> = a.points.iter().map(|p| p.map(f64::to_bits)).collect();
    assert_eq!(picked.len(), MODEL_POINTS);
    assert!(picked.is_subset(&all));
}

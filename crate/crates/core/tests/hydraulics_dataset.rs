mod common;

use common::{feasible, lab, rel};
use pkweir::dataset::{
    pearson, split_id, split_ood_geom, split_ood_head, subset_fraction, AlphaBin, DatasetManifest, GeometryEntry,
    HeadBin, Partition, SplitAssignment,
};
use pkweir::hydraulics::{
    cd_from_head, discharge_from_cd, head_from_cd, ingest_labels, lps_to_m3s, total_head, DischargeSchedule,
    HydraulicsError, LabelSource, SyntheticOracle, ORACLE_ENVELOPE, SCHEDULE_LPS,
};
use pkweir::protocol::{geometry_id, synthetic_manifest, SyntheticConfig};
use pkweir::{derive, Exec};
use proptest::prelude::*;
use std::collections::{HashMap, HashSet};
use std::io::Write;

proptest! {
    #![proptest_config(ProptestConfig { cases: 2000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn head_and_discharge_relations_invert(q in 0.001..1.0f64, l in 0.5..20.0f64, h in 0.005..0.5f64) {
        let cd = cd_from_head(q, l, h).unwrap();
        prop_assert!(rel(discharge_from_cd(cd, l, h).unwrap(), q, 0.0) <= 1e-12);
        prop_assert!(rel(head_from_cd(cd, l, q).unwrap(), h, 0.0) <= 1e-12);
    }

    #[test]
    fn coefficient_is_scale_free(q in 0.001..1.0f64, l in 0.5..20.0f64, h in 0.005..0.5f64, lambda in 0.1..10.0f64) {
        // Froude similarity: lengths by lambda, discharge by lambda^2.5.
        let a = cd_from_head(q, l, h).unwrap();
        let b = cd_from_head(q * lambda.powf(2.5), l * lambda, h * lambda).unwrap();
        prop_assert!(rel(a, b, 0.0) <= 1e-12);
    }

    #[test]
    fn total_head_exceeds_depth(q in 0.01..0.3f64, h in 0.01..0.3f64) {
        let f = total_head(q, h, &lab()).unwrap();
        prop_assert!(f.total_head > h);
        let v = q / (lab().width * (lab().height + h));
        prop_assert!(rel(f.velocity, v, 0.0) <= 1e-15);
        prop_assert!(rel(f.total_head, h + v * v / (2.0 * 9.81), 0.0) <= 1e-15);
    }
}

#[test]
fn hand_oracle() {
    let cd = cd_from_head(0.1, 4.0, 0.08).unwrap();
    assert!((cd - 0.37415).abs() < 1e-4, "{cd}");
    assert!(matches!(cd_from_head(0.0, 4.0, 0.08), Err(HydraulicsError::NonPhysical(_))));
    assert!(matches!(head_from_cd(-0.1, 4.0, 0.1), Err(HydraulicsError::NonPhysical(_))));
}

#[test]
fn oracle_stays_inside_envelope() {
    let oracle = SyntheticOracle::new(&lab(), 0.0);
    let r = oracle.ranges;
    let steps = 8;
    let at = |(lo, hi): (f64, f64), k: usize| lo + (hi - lo) * k as f64 / steps as f64;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for a in 0..=steps {
        for &q in &SCHEDULE_LPS {
            for b in 0..=steps {
                for t in 0..=steps {
                    for w in 0..=steps {
                        let v = oracle
                            .mean_from_features(
                                at((0.0, 30.0), a),
                                lps_to_m3s(q),
                                at(r.length, b),
                                at(r.reduced_thickness, t),
                                at(r.outlet_width_downstream, w),
                            )
                            .unwrap();
                        lo = lo.min(v);
                        hi = hi.max(v);
                    }
                }
            }
        }
    }
    assert!(lo >= ORACLE_ENVELOPE.0 && hi <= ORACLE_ENVELOPE.1, "[{lo}, {hi}]");
    assert!(oracle.mean_from_features(2.0, 0.3, 1.0, 0.01, 0.1).is_err());
}

#[test]
fn oracle_trends_on_feasible_designs() {
    let oracle = SyntheticOracle::new(&lab(), 0.0);
    for s in feasible(1000, 77) {
        let d = derive(&lab(), &s).unwrap();
        let curve: Vec<f64> = DischargeSchedule::standard().m3s().map(|q| oracle.mean(&d, q).unwrap()).collect();
        assert!(curve.windows(2).all(|w| w[1] < w[0]), "{curve:?}");
        for cd in curve {
            assert!(cd >= ORACLE_ENVELOPE.0 && cd <= ORACLE_ENVELOPE.1);
        }
    }
}

fn manifest(n: usize, seed: u64) -> DatasetManifest {
    synthetic_manifest(&SyntheticConfig::new(lab(), n, seed, 0.005), Exec::Parallel).unwrap()
}

#[test]
fn ingest_measured_file() {
    let m = manifest(12, 1);
    let lengths: HashMap<String, f64> =
        m.geometries.iter().map(|g| (g.geometry_id.clone(), g.derived.crest_length)).collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("measured.csv");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "geometry_id,Q_lps,h_t_m").unwrap();
    writeln!(f, "g00000,100,0.05").unwrap();
    writeln!(f, "g00001,150,0.07").unwrap();
    writeln!(f, "g00000,100,0.06").unwrap();
    drop(f);
    let got = ingest_labels(std::fs::File::open(&path).unwrap(), &lengths, &lab()).unwrap();
    assert_eq!(got.labels.len(), 2);
    assert_eq!(got.duplicates_replaced, 1);
    let first = got.labels.iter().find(|l| l.geometry_id == "g00000").unwrap();
    let h = total_head(0.1, 0.06, &lab()).unwrap().total_head;
    assert!(rel(first.cd, cd_from_head(0.1, lengths["g00000"], h).unwrap(), 0.0) <= 1e-12);
    assert_eq!(first.source, LabelSource::CfdCsv);

    let bad = "geometry_id,Q_m3s,h_t_m\ng00000,0.1,0.05\n";
    assert!(matches!(ingest_labels(bad.as_bytes(), &lengths, &lab()), Err(HydraulicsError::UnitError(_))));
    let unknown = "geometry_id,Q_lps,h_t_m\nzzz,100,0.05\n";
    assert!(ingest_labels(unknown.as_bytes(), &lengths, &lab()).is_err());
}

/// A manifest of `n` geometries with one label each, for split arithmetic.
fn bare_manifest(n: usize) -> DatasetManifest {
    let oracle = SyntheticOracle::new(&lab(), 0.0);
    let samples = feasible(n, 5);
    let geoms: Vec<GeometryEntry> = samples
        .iter()
        .enumerate()
        .map(|(i, s)| GeometryEntry {
            geometry_id: geometry_id(i),
            sample: *s,
            derived: derive(&lab(), s).unwrap(),
            mesh_path: None,
            cloud_path: None,
        })
        .collect();
    let schedule = DischargeSchedule { lps: vec![100.0] };
    let labels = oracle.label_all(geoms.iter().map(|g| (g.geometry_id.as_str(), &g.derived)), &schedule, 5).unwrap();
    DatasetManifest::assemble(lab(), geoms, labels, 5).unwrap()
}

fn geometry_counts(m: &DatasetManifest, s: &SplitAssignment) -> [usize; 4] {
    [Partition::Train, Partition::Val, Partition::Test, Partition::Excluded].map(|p| s.geometries(m, p).len())
}

#[test]
fn id_split_of_full_size_dataset() {
    let m = bare_manifest(3794);
    let id = split_id(&m, 42).unwrap();
    assert_eq!(geometry_counts(&m, &id), [3036, 379, 379, 0]);
    assert_eq!(id.shared_geometries(&m), 0);
    assert_eq!(id.leaked_pairs(&m), 0);
    let tenth = subset_fraction(&m, &id, 0.1, 42).unwrap();
    assert_eq!(geometry_counts(&m, &tenth), [304, 379, 379, 2732]);
}

#[test]
fn splits_are_seeded() {
    let m = manifest(60, 2);
    assert_eq!(split_id(&m, 9).unwrap(), split_id(&m, 9).unwrap());
    assert_ne!(split_id(&m, 9).unwrap().partitions, split_id(&m, 10).unwrap().partitions);
    let g = split_ood_geom(&m, AlphaBin::Mid, 9).unwrap();
    assert_eq!(g, split_ood_geom(&m, AlphaBin::Mid, 9).unwrap());
}

#[test]
fn geometry_shift_bins_partition_alpha() {
    let m = manifest(300, 3);
    let mut tested = HashSet::new();
    for bin in AlphaBin::ALL {
        let s = split_ood_geom(&m, bin, 1).unwrap();
        assert_eq!(s.shared_geometries(&m), 0);
        for i in s.indices(Partition::Test) {
            let g = m.geometry(&m.labels[i].geometry_id).unwrap();
            assert_eq!(AlphaBin::of(g.derived.sidewall_angle_deg()), bin);
        }
        for i in s.indices(Partition::Train).into_iter().chain(s.indices(Partition::Val)) {
            let g = m.geometry(&m.labels[i].geometry_id).unwrap();
            assert_ne!(AlphaBin::of(g.derived.sidewall_angle_deg()), bin);
        }
        let test = s.geometries(&m, Partition::Test);
        assert!(tested.is_disjoint(&test));
        tested.extend(test);
    }
    assert_eq!(tested.len(), m.geometries.len());
}

#[test]
fn head_shift_bins_partition_schedule() {
    let m = manifest(40, 4);
    let expect = [
        (HeadBin::Low, vec![50.0, 55.0, 60.0, 70.0, 80.0, 90.0]),
        (HeadBin::High, vec![170.0, 180.0, 190.0, 200.0, 225.0, 250.0]),
        (HeadBin::Mid, vec![100.0, 110.0, 120.0, 130.0, 140.0, 150.0, 160.0]),
    ];
    let mut total = 0;
    for (bin, qs) in expect {
        let s = split_ood_head(&m, bin, 1).unwrap();
        let mut seen: Vec<f64> = s.indices(Partition::Test).iter().map(|&i| m.labels[i].discharge_lps()).collect();
        seen.sort_by(f64::total_cmp);
        seen.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        assert_eq!(seen.len(), qs.len());
        for (a, b) in seen.iter().zip(&qs) {
            assert!((a - b).abs() < 1e-9);
        }
        assert_eq!(s.leaked_pairs(&m), 0);
        total += s.indices(Partition::Test).len();
        let c = s.counts();
        assert_eq!(c[Partition::Val as usize], (m.labels.len() - c[Partition::Test as usize]) / 10);
    }
    assert_eq!(total, m.labels.len());
}

#[test]
fn fraction_subsets_are_nested() {
    let m = manifest(200, 6);
    let id = split_id(&m, 3).unwrap();
    let mut previous: Option<HashSet<String>> = None;
    for f in [0.1, 0.2, 0.4, 0.6, 0.8, 1.0] {
        let s = subset_fraction(&m, &id, f, 3).unwrap();
        let train = s.geometries(&m, Partition::Train);
        assert_eq!(train.len(), (f * 160.0f64).round() as usize);
        assert_eq!(s.geometries(&m, Partition::Test), id.geometries(&m, Partition::Test));
        if let Some(p) = &previous {
            assert!(p.is_subset(&train));
        }
        previous = Some(train);
    }
}

#[test]
fn split_files_round_trip() {
    let m = manifest(30, 7);
    let s = split_ood_head(&m, HeadBin::High, 2).unwrap();
    let mut buf = Vec::new();
    s.write_csv(&m, &mut buf).unwrap();
    let back = SplitAssignment::read_csv(&m, &s.name, s.policy, buf.as_slice()).unwrap();
    assert_eq!(back, s);
}

#[test]
fn manifest_files_round_trip() {
    let m = manifest(25, 8);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    m.write_manifest(&mut a).unwrap();
    m.write_labels(&mut b).unwrap();
    let back = DatasetManifest::read(a.as_slice(), b.as_slice()).unwrap();
    assert_eq!(back.geometries, m.geometries);
    assert_eq!(back.labels.len(), m.labels.len());
    for (x, y) in back.labels.iter().zip(&m.labels) {
        assert_eq!(x.geometry_id, y.geometry_id);
        assert!(rel(x.cd, y.cd, 0.0) <= 1e-5);
    }
}

#[test]
fn correlation_signs_follow_oracle_trends() {
    let m = manifest(300, 9);
    let c = pearson(&m).unwrap();
    assert!(c.get("alpha", "c_D").unwrap() > 0.3);
    assert!(c.get("Q", "c_D").unwrap() < -0.2);
    assert!(c.get("T_s2", "T_s3").unwrap() > 0.9);
    assert!((c.get("Q", "Q").unwrap() - 1.0).abs() < 1e-12);
    assert!(c.get("Q", "B").unwrap().abs() < 0.05);
}

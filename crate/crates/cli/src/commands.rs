use crate::workspace::{failure_marker, read_json, ArtifactExists, Stage, Workspace};
use crate::{BenchArgs, CloudArgs, Cli, Command, EvalArgs, LabelArgs, MeshArgs, SampleArgs, SplitArgs, TrainArgs};
use anyhow::{anyhow, bail, Context, Result};
use pkweir::dataset::{
    split_id, split_ood_geom, split_ood_head, subset_fraction, AlphaBin, DatasetManifest, GeometryEntry, HeadBin,
    Partition, SplitAssignment, SplitPolicy,
};
use pkweir::hydraulics::{ingest_labels, DischargeSchedule, SyntheticOracle};
use pkweir::pointcloud::{normalize_unit_cube, read_cloud, sample_surface, subsample, write_cloud, MODEL_POINTS};
use pkweir::protocol::{geometry_id, run_matrix, split_matrix, synthetic_manifest, SyntheticConfig};
use pkweir::records::{read_records, write_records, ParametricRecord};
use pkweir::rng::{stream_rng, Domain};
use pkweir::sampler::{generate_batch, DesignSpace, Variable, VARIABLE_NAMES};
use pkweir::solidmesh::{mesh_batch, tessellate, validate_mesh, write_stl, MeshReport, DEFAULT_X_SEGMENTS};
use pkweir::surrogates::pointnet::normalize_discharge;
use pkweir::surrogates::{
    fit_pointnet, metrics, predict, read_model, write_metric_rows, write_model, CloudExample, MetricRow, ModelKind,
    PointNetConfig, SurrogateModel,
};
use pkweir::{validate, Exec, PkwDesign, PkwFixed};
use rand::Rng;
use serde::Serialize;
use serde_json::json;
use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::Path;
use std::process::ExitCode;

const EXEC: Exec = Exec::Parallel;

/// Clouds sampled and written per parallel chunk, bounding memory.
const CLOUD_CHUNK: usize = 32;

enum Failure {
    Gate(Vec<String>),
    Error(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Error(e)
    }
}

pub fn run(cli: Cli) -> ExitCode {
    let ws = Workspace::new(cli.workspace.clone(), cli.force);
    let (name, stage, marker) = describe(&cli.command);
    let outcome = match &cli.command {
        Command::Sample(a) => sample(&ws, a),
        Command::Mesh(a) => mesh(&ws, a),
        Command::Cloud(a) => cloud(&ws, a),
        Command::Label(a) => label(&ws, a),
        Command::Split(a) => split(&ws, a),
        Command::Train(a) => train(&ws, a),
        Command::Eval(a) => eval(&ws, a),
        Command::Bench(a) => bench(&ws, a),
    };
    let failure = match outcome {
        Ok(summary) => {
            println!("{}", json!({"status": "ok", "command": name, "summary": summary}));
            return ExitCode::SUCCESS;
        }
        Err(f) => f,
    };
    let refused = matches!(&failure, Failure::Error(e) if e.downcast_ref::<ArtifactExists>().is_some());
    let (record, code) = match failure {
        Failure::Gate(gates) => (
            json!({"status": "error", "command": name, "kind": "gate", "failed_gates": gates}),
            3,
        ),
        Failure::Error(e) => (json!({"status": "error", "command": name, "kind": "error", "message": format!("{e:#}")}), 1),
    };
    eprintln!("{record}");
    let dir = ws.dir(stage);
    if !refused && fs::create_dir_all(&dir).is_ok() {
        let _ = fs::write(failure_marker(&dir, &marker), record.to_string() + "\n");
    }
    ExitCode::from(code)
}

/// Command name, stage directory and base name of the failure marker.
fn describe(cmd: &Command) -> (&'static str, &'static str, String) {
    match cmd {
        Command::Sample(_) => ("sample", "params", "records".into()),
        Command::Mesh(_) => ("mesh", "meshes", "meshes".into()),
        Command::Cloud(_) => ("cloud", "clouds", "clouds".into()),
        Command::Label(_) => ("label", "labels", "manifest".into()),
        Command::Split(a) => ("split", "splits", parse_policy(&a.policy).map(|p| p.to_string()).unwrap_or("split".into())),
        Command::Train(a) => ("train", "models", model_name(&a.model, &a.split)),
        Command::Eval(a) => ("eval", "reports", format!("eval-{}", model_name(&a.model, &a.split))),
        Command::Bench(_) => ("bench", "reports", "bench".into()),
    }
}

fn model_name(model: &str, split: &str) -> String {
    format!("{model}-{split}")
}

fn finish(stage: Stage<'_>, meta_name: &str, mut summary: serde_json::Value) -> Result<serde_json::Value, Failure> {
    let failed = stage.failed_gates();
    let meta = stage.finish(meta_name)?;
    if !failed.is_empty() {
        return Err(Failure::Gate(failed));
    }
    summary["config_hash"] = json!(meta.config_hash);
    summary["outputs"] = json!(meta.outputs.len());
    Ok(summary)
}

fn item_seed(seed: u64, domain: Domain, index: usize) -> u64 {
    stream_rng(seed, domain, index as u64).random()
}

// ---- sample

#[derive(Serialize)]
struct SampleConfig<'a> {
    n: usize,
    seed: u64,
    grid: &'a str,
    space: &'a DesignSpace,
}

fn parse_bound(space: &mut DesignSpace, spec: &str) -> Result<()> {
    let (name, range) = spec.split_once('=').ok_or_else(|| anyhow!("bound {spec:?} is not NAME=LO:HI[:STEP]"))?;
    let k = VARIABLE_NAMES
        .iter()
        .position(|v| *v == name)
        .ok_or_else(|| anyhow!("unknown variable {name:?}; expected one of {VARIABLE_NAMES:?}"))?;
    // Lengths are given in millimetres; the overhang ratio is unitless.
    let scale = if name == "R_B_i" { 1.0 } else { 1e-3 };
    let parts: Vec<f64> = range
        .split(':')
        .map(|p| p.trim().parse::<f64>().map(|v| v * scale))
        .collect::<Result<_, _>>()
        .with_context(|| format!("bound {spec:?}"))?;
    let step = match parts.as_slice() {
        [_, _] => space.variables[k].step,
        [_, _, s] => *s,
        _ => bail!("bound {spec:?} is not NAME=LO:HI[:STEP]"),
    };
    if !(parts[0] <= parts[1]) {
        bail!("bound {spec:?} has LO above HI");
    }
    space.variables[k] = Variable::new(parts[0], parts[1], step);
    Ok(())
}

fn sample(ws: &Workspace, a: &SampleArgs) -> Result<serde_json::Value, Failure> {
    let fixed = PkwFixed::laboratory();
    let mut space = match a.grid.as_str() {
        "standard" => DesignSpace::standard(fixed),
        "screening" => DesignSpace::screening(fixed),
        other => return Err(anyhow!("unknown grid {other:?}; expected standard or screening").into()),
    };
    for b in &a.bounds {
        parse_bound(&mut space, b)?;
    }
    let config = SampleConfig { n: a.n, seed: a.seed, grid: &a.grid, space: &space };
    let mut stage = ws.stage("params", "sample", Some(a.seed), &config)?;
    let batch = generate_batch(&space, a.n, a.seed, EXEC).map_err(anyhow::Error::from)?;
    let records = batch
        .samples
        .iter()
        .enumerate()
        .map(|(i, s)| ParametricRecord::new(geometry_id(i), fixed, *s))
        .collect::<Result<Vec<_>, _>>()
        .map_err(anyhow::Error::from)?;
    write_records(stage.create("records.csv")?, &records).map_err(anyhow::Error::from)?;
    let run = json!({
        "seed": a.seed,
        "space": space,
        "requested": a.n,
        "produced": records.len(),
        "rejected_count": batch.rejected_count,
        "duplicate_count": batch.duplicate_count,
        "rounds": batch.rounds,
    });
    fs::write(stage.target("run.json")?, serde_json::to_string_pretty(&run).map_err(anyhow::Error::from)? + "\n")
        .map_err(anyhow::Error::from)?;
    stage.gate("all_feasible", batch.samples.iter().all(|s| validate(&fixed, s).is_feasible()));
    stage.gate("count", records.len() == a.n);
    finish(stage, "records", json!({"designs": records.len(), "rejected": batch.rejected_count}))
}

// ---- mesh

fn load_records(ws: &Workspace) -> Result<Vec<ParametricRecord>> {
    let path = ws.path("params", "records.csv");
    let file = File::open(&path).with_context(|| format!("opening {}; run `sample` first", path.display()))?;
    let records = read_records(BufReader::new(file))?;
    if let Some(first) = records.first() {
        if records.iter().any(|r| r.fixed != first.fixed) {
            bail!("parametric records mix different fixed constants");
        }
    }
    Ok(records)
}

fn designs(records: &[ParametricRecord]) -> Result<Vec<PkwDesign>> {
    Ok(records.iter().map(|r| PkwDesign::new(r.fixed, r.sample)).collect::<Result<_, _>>()?)
}

#[derive(Serialize)]
struct MeshEntry<'a> {
    geometry_id: &'a str,
    triangles: usize,
    report: MeshReport,
}

fn mesh(ws: &Workspace, a: &MeshArgs) -> Result<serde_json::Value, Failure> {
    let records = load_records(ws)?;
    let ds = designs(&records)?;
    let mut stage = ws.stage("meshes", "mesh", None, &json!({"segments": a.segments, "designs": records.len()}))?;
    let meshes = mesh_batch(&ds, a.segments, EXEC);
    let mut entries = Vec::with_capacity(records.len());
    for (r, m) in records.iter().zip(meshes) {
        let m = m.with_context(|| format!("meshing {}", r.geometry_id))?;
        let path = stage.target(&format!("{}.stl", r.geometry_id))?;
        write_stl(&m, &r.geometry_id, &path).map_err(anyhow::Error::from)?;
        entries.push(MeshEntry { geometry_id: &r.geometry_id, triangles: m.triangles.len(), report: validate_mesh(&m) });
    }
    let bad: Vec<&str> = entries.iter().filter(|e| !e.report.is_valid_solid()).map(|e| e.geometry_id).collect();
    let mut out = stage.create("reports.json")?;
    serde_json::to_writer_pretty(&mut out, &entries).map_err(anyhow::Error::from)?;
    out.flush().map_err(anyhow::Error::from)?;
    stage.gate("watertight", bad.is_empty());
    finish(stage, "meshes", json!({"meshes": entries.len(), "invalid": bad}))
}

// ---- cloud

fn cloud(ws: &Workspace, a: &CloudArgs) -> Result<serde_json::Value, Failure> {
    let records = load_records(ws)?;
    let ds = designs(&records)?;
    let config = json!({"points": a.points, "seed": a.seed, "segments": DEFAULT_X_SEGMENTS, "designs": records.len()});
    let mut stage = ws.stage("clouds", "cloud", Some(a.seed), &config)?;
    let mut written = 0;
    for start in (0..ds.len()).step_by(CLOUD_CHUNK) {
        let end = (start + CLOUD_CHUNK).min(ds.len());
        let clouds = EXEC.map_range(end - start, |k| {
            let i = start + k;
            let mesh = tessellate(&ds[i], DEFAULT_X_SEGMENTS)?;
            let mut c = sample_surface(&mesh, a.points, item_seed(a.seed, Domain::Surface, i))?;
            c.source_geometry_id = records[i].geometry_id.clone();
            Ok::<_, anyhow::Error>(c)
        });
        for (k, c) in clouds.into_iter().enumerate() {
            let id = &records[start + k].geometry_id;
            let c = c.with_context(|| format!("sampling {id}"))?;
            write_cloud(&c, &stage.target(&format!("{id}.wnpc"))?).map_err(anyhow::Error::from)?;
            written += 1;
        }
    }
    stage.gate("count", written == records.len());
    finish(stage, "clouds", json!({"clouds": written, "points": a.points}))
}

// ---- label

fn entries(ws: &Workspace, records: &[ParametricRecord]) -> Vec<GeometryEntry> {
    let existing = |stage: &str, name: String| ws.path(stage, &name).exists().then(|| format!("{stage}/{name}"));
    records
        .iter()
        .map(|r| GeometryEntry {
            geometry_id: r.geometry_id.clone(),
            sample: r.sample,
            derived: r.derived,
            mesh_path: existing("meshes", format!("{}.stl", r.geometry_id)),
            cloud_path: existing("clouds", format!("{}.wnpc", r.geometry_id)),
        })
        .collect()
}

fn csv_labels(path: &Path, geometries: &[GeometryEntry], fixed: &PkwFixed) -> Result<(Vec<pkweir::hydraulics::LabeledSample>, usize)> {
    let crest: HashMap<String, f64> = geometries.iter().map(|g| (g.geometry_id.clone(), g.derived.crest_length)).collect();
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let ingested = ingest_labels(BufReader::new(file), &crest, fixed)?;
    Ok((ingested.labels, ingested.duplicates_replaced))
}

fn labelled_manifest(
    geometries: Vec<GeometryEntry>,
    fixed: PkwFixed,
    oracle: &str,
    seed: Option<u64>,
    sigma: f64,
    schedule: &DischargeSchedule,
) -> Result<(DatasetManifest, usize)> {
    let (labels, replaced) = match oracle.split_once('=') {
        None if oracle == "synthetic" => {
            let seed = seed.ok_or_else(|| anyhow!("the synthetic oracle needs --seed"))?;
            let o = SyntheticOracle::new(&fixed, sigma);
            (o.label_all(geometries.iter().map(|g| (g.geometry_id.as_str(), &g.derived)), schedule, seed)?, 0)
        }
        Some(("csv", path)) => csv_labels(Path::new(path), &geometries, &fixed)?,
        _ => bail!("unknown oracle {oracle:?}; expected synthetic or csv=<path>"),
    };
    Ok((DatasetManifest::assemble(fixed, geometries, labels, seed.unwrap_or(0))?, replaced))
}

fn label(ws: &Workspace, a: &LabelArgs) -> Result<serde_json::Value, Failure> {
    let records = load_records(ws)?;
    let fixed = records.first().map(|r| r.fixed).unwrap_or_else(PkwFixed::laboratory);
    let schedule = match &a.schedule {
        Some(lps) => DischargeSchedule { lps: lps.clone() },
        None => DischargeSchedule::standard(),
    };
    let config = json!({"oracle": a.oracle, "seed": a.seed, "sigma": a.sigma, "schedule_lps": schedule.lps});
    let mut stage = ws.stage("labels", "label", a.seed, &config)?;
    let (m, replaced) = labelled_manifest(entries(ws, &records), fixed, &a.oracle, a.seed, a.sigma, &schedule)?;
    m.write_manifest(stage.create("manifest.jsonl")?).map_err(anyhow::Error::from)?;
    m.write_labels(stage.create("labels.csv")?).map_err(anyhow::Error::from)?;
    stage.gate("labels_positive", m.labels.iter().all(|l| l.cd > 0.0 && l.cd.is_finite()));
    finish(stage, "manifest", json!({"labels": m.labels.len(), "geometries": m.geometries.len(), "duplicates_replaced": replaced}))
}

// ---- split

fn load_manifest(ws: &Workspace) -> Result<DatasetManifest> {
    let open = |name: &str| {
        let path = ws.path("labels", name);
        File::open(&path).with_context(|| format!("opening {}; run `label` first", path.display()))
    };
    Ok(DatasetManifest::read(BufReader::new(open("manifest.jsonl")?), BufReader::new(open("labels.csv")?))?)
}

/// Parses `id`, `ood-geom:<bin>`, `ood-head:<bin>` or `fraction:<f>`.
fn parse_policy(s: &str) -> Result<SplitPolicy> {
    let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
    Ok(match kind {
        "id" => SplitPolicy::IdByGeometry,
        "ood-geom" => SplitPolicy::OodGeomAlpha(AlphaBin::parse(arg).ok_or_else(|| anyhow!("alpha bin must be le2, 3to5 or ge6"))?),
        "ood-head" => SplitPolicy::OodHeadQ(HeadBin::parse(arg).ok_or_else(|| anyhow!("head bin must be le90, 100to160 or ge170"))?),
        "fraction" => SplitPolicy::FractionSubset(arg.parse().with_context(|| format!("fraction {arg:?}"))?),
        _ => bail!("unknown split policy {s:?}"),
    })
}

/// Recovers the policy from a split name such as `ood-geom-le2`.
fn policy_from_name(name: &str) -> Result<SplitPolicy> {
    if name == "id" {
        return Ok(SplitPolicy::IdByGeometry);
    }
    for prefix in ["ood-geom", "ood-head", "fraction"] {
        if let Some(rest) = name.strip_prefix(prefix).and_then(|r| r.strip_prefix('-')) {
            return parse_policy(&format!("{prefix}:{rest}"));
        }
    }
    bail!("cannot tell the policy of split {name:?}")
}

fn make_split(m: &DatasetManifest, policy: SplitPolicy, seed: u64) -> Result<SplitAssignment> {
    Ok(match policy {
        SplitPolicy::IdByGeometry => split_id(m, seed)?,
        SplitPolicy::OodGeomAlpha(b) => split_ood_geom(m, b, seed)?,
        SplitPolicy::OodHeadQ(b) => split_ood_head(m, b, seed)?,
        SplitPolicy::FractionSubset(f) => subset_fraction(m, &split_id(m, seed)?, f, seed)?,
    })
}

/// Head splits share geometries across partitions by design; every other
/// policy must keep each geometry in a single partition.
fn leakage_gates(stage: &mut Stage<'_>, m: &DatasetManifest, s: &SplitAssignment) {
    stage.gate(&format!("{}:no_leaked_pairs", s.name), s.leaked_pairs(m) == 0);
    if !matches!(s.policy, SplitPolicy::OodHeadQ(_)) {
        stage.gate(&format!("{}:no_shared_geometries", s.name), s.shared_geometries(m) == 0);
    }
}

fn split(ws: &Workspace, a: &SplitArgs) -> Result<serde_json::Value, Failure> {
    let m = load_manifest(ws)?;
    let policy = parse_policy(&a.policy)?;
    let mut stage = ws.stage("splits", "split", Some(a.seed), &json!({"policy": policy, "seed": a.seed}))?;
    let s = make_split(&m, policy, a.seed)?;
    s.write_csv(&m, stage.create(&format!("{}.csv", s.name))?).map_err(anyhow::Error::from)?;
    leakage_gates(&mut stage, &m, &s);
    let [train, val, test, excluded] = s.counts();
    let name = s.name.clone();
    finish(stage, &name, json!({"split": name, "train": train, "val": val, "test": test, "excluded": excluded}))
}

fn load_split(ws: &Workspace, m: &DatasetManifest, name: &str) -> Result<SplitAssignment> {
    let path = ws.path("splits", &format!("{name}.csv"));
    let file = File::open(&path).with_context(|| format!("opening {}; run `split` first", path.display()))?;
    Ok(SplitAssignment::read_csv(m, name, policy_from_name(name)?, BufReader::new(file))?)
}

// ---- train / eval

fn parse_model(s: &str) -> Result<ModelKind> {
    ModelKind::parse(s).ok_or_else(|| anyhow!("unknown model {s:?}; expected forest, gbm, tree or pointnet"))
}

/// Normalized model-size clouds for every geometry, indexed like the
/// manifest geometries.
fn model_clouds(ws: &Workspace, m: &DatasetManifest, seed: u64) -> Result<Vec<Vec<[f64; 3]>>> {
    let loaded = EXEC.map_range(m.geometries.len(), |g| {
        let id = &m.geometries[g].geometry_id;
        let path = ws.path("clouds", &format!("{id}.wnpc"));
        let full = read_cloud(&path).with_context(|| format!("reading {}; run `cloud` first", path.display()))?;
        let small = subsample(&full, MODEL_POINTS, item_seed(seed, Domain::Subsample, g));
        Ok::<_, anyhow::Error>(normalize_unit_cube(&small)?.points)
    });
    loaded.into_iter().collect()
}

fn cloud_examples(m: &DatasetManifest, indices: &[usize]) -> Vec<CloudExample> {
    let geometry_of = m.label_geometry();
    indices
        .iter()
        .map(|&i| CloudExample {
            cloud: geometry_of[i],
            q_hat: normalize_discharge(m.labels[i].discharge_lps()),
            target: m.labels[i].cd,
        })
        .collect()
}

fn train(ws: &Workspace, a: &TrainArgs) -> Result<serde_json::Value, Failure> {
    let kind = parse_model(&a.model)?;
    let m = load_manifest(ws)?;
    let s = load_split(ws, &m, &a.split)?;
    let name = model_name(kind.as_str(), &s.name);
    let config = json!({"model": kind, "split": s.name, "seed": a.seed, "epochs": a.epochs});
    let mut stage = ws.stage("models", "train", Some(a.seed), &config)?;
    let train_idx = s.indices(Partition::Train);
    let model = if kind == ModelKind::PointNet {
        let clouds = model_clouds(ws, &m, a.seed)?;
        let net_config = PointNetConfig { max_epochs: a.epochs, seed: a.seed, ..PointNetConfig::default() };
        let train = cloud_examples(&m, &train_idx);
        let val = cloud_examples(&m, &s.indices(Partition::Val));
        let (net, history) = fit_pointnet(&clouds, &train, &val, net_config, EXEC).map_err(anyhow::Error::from)?;
        stage.meta.config["epochs_run"] = json!(history.train_loss.len());
        SurrogateModel::PointNet { net, config: net_config }
    } else {
        let (x, y) = m.design_matrix(&train_idx);
        pkweir::protocol::fit_parametric(kind, &x, &y, a.seed, EXEC).map_err(anyhow::Error::from)?
    };
    write_model(&model, &stage.target(&format!("{name}.wnsm"))?).map_err(anyhow::Error::from)?;
    finish(stage, &name, json!({"model": name, "train_labels": train_idx.len()}))
}

fn eval(ws: &Workspace, a: &EvalArgs) -> Result<serde_json::Value, Failure> {
    let kind = parse_model(&a.model)?;
    let m = load_manifest(ws)?;
    let s = load_split(ws, &m, &a.split)?;
    let name = model_name(kind.as_str(), &s.name);
    let model_path = ws.path("models", &format!("{name}.wnsm"));
    let model = read_model(&model_path).with_context(|| format!("reading {}; run `train` first", model_path.display()))?;
    let model_meta: crate::workspace::ArtifactMeta = read_json(&ws.path("models", &format!("{name}.meta.json")))?;
    let config = json!({"model": name, "model_hash": model_meta.config_hash, "paper_scale": a.paper_scale});
    let mut stage = ws.stage("reports", "eval", model_meta.seed, &config)?;
    let test = s.indices(Partition::Test);
    let (_, y) = m.design_matrix(&test);
    let y_hat = match &model {
        SurrogateModel::PointNet { net, config } => {
            let clouds = model_clouds(ws, &m, config.seed)?;
            net.predict_examples(&clouds, &cloud_examples(&m, &test), EXEC)
        }
        other => {
            let (x, _) = m.design_matrix(&test);
            predict(other.as_regressor().expect("parametric model"), &x, EXEC)
        }
    };
    let report = metrics(&y, &y_hat).map_err(anyhow::Error::from)?;
    let row = MetricRow {
        split: s.name.clone(),
        model: kind.to_string(),
        label_source: pkweir::protocol::label_source_summary(&m),
        report,
    };
    write_metric_rows(stage.create(&format!("eval-{name}.csv"))?, &[row], a.paper_scale).map_err(anyhow::Error::from)?;
    finish(stage, &format!("eval-{name}"), json!({"model": name, "n": report.n, "r2": report.r2, "mse": report.mse}))
}

// ---- bench

fn bench(ws: &Workspace, a: &BenchArgs) -> Result<serde_json::Value, Failure> {
    let kinds = a.models.iter().map(|s| parse_model(s)).collect::<Result<Vec<_>>>()?;
    if kinds.contains(&ModelKind::PointNet) {
        return Err(anyhow!("bench runs parametric models only; train pointnet with `train`").into());
    }
    let config = json!({"oracle": a.oracle, "n": a.n, "seed": a.seed, "sigma": a.sigma, "models": kinds, "paper_scale": a.paper_scale});
    let mut stage = ws.stage("reports", "bench", Some(a.seed), &config)?;
    let m = if a.oracle == "synthetic" {
        synthetic_manifest(&SyntheticConfig::new(PkwFixed::laboratory(), a.n, a.seed, a.sigma), EXEC)
            .map_err(anyhow::Error::from)?
    } else {
        let records = load_records(ws)?;
        let fixed = records.first().map(|r| r.fixed).unwrap_or_else(PkwFixed::laboratory);
        labelled_manifest(entries(ws, &records), fixed, &a.oracle, Some(a.seed), a.sigma, &DischargeSchedule::standard())?.0
    };
    for s in split_matrix(&m, a.seed).map_err(anyhow::Error::from)? {
        leakage_gates(&mut stage, &m, &s);
    }
    let rows = run_matrix(&m, &kinds, a.seed, EXEC).map_err(anyhow::Error::from)?;
    write_metric_rows(stage.create("bench.csv")?, &rows, a.paper_scale).map_err(anyhow::Error::from)?;
    let id_r2: HashMap<String, Option<f64>> =
        rows.iter().filter(|r| r.split == "id").map(|r| (r.model.clone(), r.report.r2)).collect();
    finish(stage, "bench", json!({"rows": rows.len(), "geometries": m.geometries.len(), "id_r2": id_r2}))
}

//! End-to-end benchmark runs on parametric features: synthetic datasets,
//! default model settings and the split matrix.

use crate::dataset::{
    split_id, split_ood_geom, split_ood_head, subset_fraction, AlphaBin, DatasetError, DatasetManifest,
    GeometryEntry, HeadBin, Partition, SplitAssignment,
};
use crate::exec::Exec;
use crate::hydraulics::{DischargeSchedule, HydraulicsError, SyntheticOracle};
use crate::pkw::{derive, PkwFixed, FEATURE_COUNT};
use crate::sampler::{generate_batch, DesignSpace, SamplerError};
use crate::surrogates::{
    fit_forest, fit_gbm, fit_tree, metrics, predict, ForestParams, GbmParams, MetricReport, MetricRow, ModelKind,
    SurrogateError, SurrogateModel, TreeParams,
};
use serde::{Deserialize, Serialize};

/// Training fractions of the data-efficiency study.
pub const FRACTIONS: [f64; 6] = [0.1, 0.2, 0.4, 0.6, 0.8, 1.0];

#[derive(Debug, thiserror::Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Hydraulics(#[from] HydraulicsError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Surrogate(#[from] SurrogateError),
    #[error("{0} is not a parametric model")]
    NotParametric(ModelKind),
}

pub fn geometry_id(index: usize) -> String {
    format!("g{index:05}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub n_geometries: usize,
    pub seed: u64,
    pub sigma: f64,
    pub space: DesignSpace,
    pub schedule: DischargeSchedule,
}

impl SyntheticConfig {
    pub fn new(fixed: PkwFixed, n_geometries: usize, seed: u64, sigma: f64) -> Self {
        SyntheticConfig {
            n_geometries,
            seed,
            sigma,
            space: DesignSpace::standard(fixed),
            schedule: DischargeSchedule::standard(),
        }
    }
}

/// Samples feasible designs and labels each at every scheduled discharge
/// with the synthetic oracle.
pub fn synthetic_manifest(config: &SyntheticConfig, exec: Exec) -> Result<DatasetManifest, ProtocolError> {
    let fixed = config.space.fixed;
    let batch = generate_batch(&config.space, config.n_geometries, config.seed, exec)?;
    let mut geometries = Vec::with_capacity(batch.samples.len());
    for (i, s) in batch.samples.iter().enumerate() {
        let derived = derive(&fixed, s).map_err(|e| HydraulicsError::NonPhysical(e.to_string()))?;
        geometries.push(GeometryEntry { geometry_id: geometry_id(i), sample: *s, derived, mesh_path: None, cloud_path: None });
    }
    let oracle = SyntheticOracle::new(&fixed, config.sigma);
    let labels = oracle.label_all(
        geometries.iter().map(|g| (g.geometry_id.as_str(), &g.derived)),
        &config.schedule,
        config.seed,
    )?;
    Ok(DatasetManifest::assemble(fixed, geometries, labels, config.seed)?)
}

/// Fits a parametric model with the default settings: a fully grown tree,
/// a 100-tree forest, or 300 boosting stages of depth 3 at rate 0.05.
pub fn fit_parametric(
    kind: ModelKind,
    x: &[[f64; FEATURE_COUNT]],
    y: &[f64],
    seed: u64,
    exec: Exec,
) -> Result<SurrogateModel, ProtocolError> {
    Ok(match kind {
        ModelKind::Tree => SurrogateModel::Tree(fit_tree(x, y, TreeParams::default())?),
        ModelKind::Forest => SurrogateModel::Forest(fit_forest(x, y, ForestParams { seed, ..ForestParams::default() }, exec)?),
        ModelKind::Gbm => SurrogateModel::Boosted(fit_gbm(x, y, GbmParams::default())?),
        ModelKind::PointNet => return Err(ProtocolError::NotParametric(kind)),
    })
}

/// Trains on the training partition and scores the test partition.
pub fn evaluate_split(
    manifest: &DatasetManifest,
    split: &SplitAssignment,
    kind: ModelKind,
    seed: u64,
    exec: Exec,
) -> Result<MetricReport, ProtocolError> {
    let (x, y) = manifest.design_matrix(&split.indices(Partition::Train));
    let model = fit_parametric(kind, &x, &y, seed, exec)?;
    let (xt, yt) = manifest.design_matrix(&split.indices(Partition::Test));
    let regressor = model.as_regressor().ok_or(ProtocolError::NotParametric(kind))?;
    Ok(metrics(&yt, &predict(regressor, &xt, exec))?)
}

/// The ID split, the three geometry-shift and three head-shift splits and
/// the six training fractions of the ID split.
pub fn split_matrix(manifest: &DatasetManifest, seed: u64) -> Result<Vec<SplitAssignment>, ProtocolError> {
    let id = split_id(manifest, seed)?;
    let mut out = vec![id.clone()];
    for b in AlphaBin::ALL {
        out.push(split_ood_geom(manifest, b, seed)?);
    }
    for b in HeadBin::ALL {
        out.push(split_ood_head(manifest, b, seed)?);
    }
    for f in FRACTIONS {
        out.push(subset_fraction(manifest, &id, f, seed)?);
    }
    Ok(out)
}

/// Metric rows for every split of [`split_matrix`] and every model.
pub fn run_matrix(
    manifest: &DatasetManifest,
    models: &[ModelKind],
    seed: u64,
    exec: Exec,
) -> Result<Vec<MetricRow>, ProtocolError> {
    let splits = split_matrix(manifest, seed)?;
    let source = label_source_summary(manifest);
    let mut rows = Vec::new();
    for &kind in models {
        for s in &splits {
            let report = evaluate_split(manifest, s, kind, seed, exec)?;
            rows.push(MetricRow { split: s.name.clone(), model: kind.to_string(), label_source: source.clone(), report });
        }
    }
    Ok(rows)
}

/// Label sources present in the manifest, joined with `+`.
pub fn label_source_summary(manifest: &DatasetManifest) -> String {
    let names: Vec<&str> = manifest.provenance.label_sources.keys().map(String::as_str).collect();
    if names.is_empty() {
        "none".into()
    } else {
        names.join("+")
    }
}

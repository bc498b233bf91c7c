//! Dataset manifests, benchmark splits and correlation statistics.

use crate::hydraulics::{lps_to_m3s, m3s_to_lps, LabelSource, LabeledSample};
use crate::pkw::{derive, feature_vector, PkwDerived, PkwFixed, PkwSample, FEATURE_COUNT, FEATURE_NAMES};
use crate::records::{format_sig, sig9};
use crate::rng::{stream_rng, Domain};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Read, Write};

pub const MANIFEST_FORMAT: &str = "pkweir-manifest";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("need at least {required} geometries, found {found}")]
    TooFewGeometries { found: usize, required: usize },
    #[error("need at least {required} labeled samples, found {found}")]
    TooFewSamples { found: usize, required: usize },
    #[error("split {0} leaves an empty partition")]
    EmptyBin(String),
    #[error("label refers to unknown geometry {0}")]
    UnknownGeometry(String),
    #[error("geometry {0} listed twice")]
    DuplicateGeometry(String),
    #[error("geometry {id} has two labels at {q_lps} l/s")]
    DuplicateLabel { id: String, q_lps: f64 },
    #[error("fraction {0} outside (0, 1]")]
    InvalidFraction(f64),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryEntry {
    pub geometry_id: String,
    pub sample: PkwSample,
    pub derived: PkwDerived,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cloud_path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub master_seed: u64,
    pub tool_version: String,
    /// Number of labels per source.
    pub label_sources: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ManifestHeader {
    format: String,
    version: u32,
    fixed: PkwFixed,
    provenance: Provenance,
}

/// Geometries and their labels. Labels are ordered by geometry, then by
/// discharge.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub fixed: PkwFixed,
    pub geometries: Vec<GeometryEntry>,
    pub labels: Vec<LabeledSample>,
    pub provenance: Provenance,
    index: HashMap<String, usize>,
}

fn q_key(discharge: f64) -> i64 {
    (m3s_to_lps(discharge) * 1e6).round() as i64
}

impl DatasetManifest {
    pub fn assemble(
        fixed: PkwFixed,
        geometries: Vec<GeometryEntry>,
        mut labels: Vec<LabeledSample>,
        master_seed: u64,
    ) -> Result<Self, DatasetError> {
        let mut index = HashMap::with_capacity(geometries.len());
        for (i, g) in geometries.iter().enumerate() {
            if index.insert(g.geometry_id.clone(), i).is_some() {
                return Err(DatasetError::DuplicateGeometry(g.geometry_id.clone()));
            }
        }
        let mut seen = HashSet::with_capacity(labels.len());
        for l in &labels {
            if !index.contains_key(&l.geometry_id) {
                return Err(DatasetError::UnknownGeometry(l.geometry_id.clone()));
            }
            if !seen.insert((l.geometry_id.clone(), q_key(l.discharge))) {
                return Err(DatasetError::DuplicateLabel { id: l.geometry_id.clone(), q_lps: l.discharge_lps() });
            }
        }
        labels.sort_by(|a, b| {
            index[&a.geometry_id].cmp(&index[&b.geometry_id]).then(a.discharge.total_cmp(&b.discharge))
        });
        let mut label_sources = BTreeMap::new();
        for l in &labels {
            *label_sources.entry(l.source.as_str().to_string()).or_insert(0) += 1;
        }
        let provenance =
            Provenance { master_seed, tool_version: env!("CARGO_PKG_VERSION").to_string(), label_sources };
        Ok(DatasetManifest { fixed, geometries, labels, provenance, index })
    }

    pub fn geometry(&self, id: &str) -> Option<&GeometryEntry> {
        self.index.get(id).map(|&i| &self.geometries[i])
    }

    pub fn geometry_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Geometry index of every label.
    pub fn label_geometry(&self) -> Vec<usize> {
        self.labels.iter().map(|l| self.index[&l.geometry_id]).collect()
    }

    /// Parametric features of label `i`.
    pub fn features(&self, i: usize) -> [f64; FEATURE_COUNT] {
        let l = &self.labels[i];
        feature_vector(&self.geometries[self.index[&l.geometry_id]].derived, l.discharge)
    }

    /// Feature rows and targets for the given label indices.
    pub fn design_matrix(&self, indices: &[usize]) -> (Vec<[f64; FEATURE_COUNT]>, Vec<f64>) {
        indices.iter().map(|&i| (self.features(i), self.labels[i].cd)).unzip()
    }

    pub fn write_manifest<W: Write>(&self, mut out: W) -> Result<(), DatasetError> {
        let header = ManifestHeader {
            format: MANIFEST_FORMAT.into(),
            version: MANIFEST_VERSION,
            fixed: self.fixed,
            provenance: self.provenance.clone(),
        };
        serde_json::to_writer(&mut out, &header)?;
        writeln!(out)?;
        for g in &self.geometries {
            serde_json::to_writer(&mut out, g)?;
            writeln!(out)?;
        }
        Ok(())
    }

    /// Label table with columns `geometry_id, Q_lps, H_t_m, c_D, source`;
    /// c_D carries six significant digits.
    pub fn write_labels<W: Write>(&self, out: W) -> Result<(), DatasetError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["geometry_id", "Q_lps", "H_t_m", "c_D", "source"])?;
        for l in &self.labels {
            let head = l.total_head.map(sig9).unwrap_or_default();
            w.write_record([
                l.geometry_id.as_str(),
                &sig9(l.discharge_lps()),
                &head,
                &format_sig(l.cd, 6),
                l.source.as_str(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a manifest and its label table. The provenance seed is taken
    /// from the manifest header.
    pub fn read<R1: BufRead, R2: Read>(manifest: R1, labels: R2) -> Result<Self, DatasetError> {
        let mut lines = manifest.lines().enumerate();
        let header: ManifestHeader = match lines.next() {
            Some((_, line)) => serde_json::from_str(&line?)
                .map_err(|e| DatasetError::Parse { line: 1, message: e.to_string() })?,
            None => return Err(DatasetError::Parse { line: 1, message: "empty manifest".into() }),
        };
        if header.format != MANIFEST_FORMAT || header.version != MANIFEST_VERSION {
            return Err(DatasetError::Parse {
                line: 1,
                message: format!("unsupported manifest {} v{}", header.format, header.version),
            });
        }
        let mut geometries = Vec::new();
        for (i, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |message: String| DatasetError::Parse { line: i + 1, message };
            let mut g: GeometryEntry = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
            // Derived values are recomputed so they never drift from the inputs.
            g.derived = derive(&header.fixed, &g.sample).map_err(|e| bad(e.to_string()))?;
            geometries.push(g);
        }
        let labels = read_label_table(labels)?;
        Self::assemble(header.fixed, geometries, labels, header.provenance.master_seed)
    }
}

/// Parses a label table written by [`DatasetManifest::write_labels`].
pub fn read_label_table<R: Read>(input: R) -> Result<Vec<LabeledSample>, DatasetError> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let bad = |message: String| DatasetError::Parse { line, message };
        let field = |k: usize| rec.get(k).unwrap_or("").trim();
        let num = |k: usize| field(k).parse::<f64>().map_err(|_| bad(format!("cannot parse {:?}", field(k))));
        let head = if field(2).is_empty() { None } else { Some(num(2)?) };
        let source = LabelSource::parse(field(4)).ok_or_else(|| bad(format!("unknown source {:?}", field(4))))?;
        out.push(LabeledSample {
            geometry_id: field(0).to_string(),
            discharge: lps_to_m3s(num(1)?),
            total_head: head,
            cd: num(3)?,
            source,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Partition {
    Train,
    Val,
    Test,
    /// Training sample left out of a fractional subset.
    Excluded,
}

impl Partition {
    pub fn as_str(self) -> &'static str {
        match self {
            Partition::Train => "train",
            Partition::Val => "val",
            Partition::Test => "test",
            Partition::Excluded => "excluded",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Partition::Train, Partition::Val, Partition::Test, Partition::Excluded].into_iter().find(|p| p.as_str() == s)
    }
}

/// Sidewall-angle bins of the geometry-shift splits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AlphaBin {
    /// `[0°, 3°)`
    Low,
    /// `[3°, 6°)`
    Mid,
    /// `[6°, ∞)`
    High,
}

impl AlphaBin {
    pub const ALL: [AlphaBin; 3] = [AlphaBin::Low, AlphaBin::Mid, AlphaBin::High];

    pub fn of(alpha_deg: f64) -> Self {
        if alpha_deg < 3.0 {
            AlphaBin::Low
        } else if alpha_deg < 6.0 {
            AlphaBin::Mid
        } else {
            AlphaBin::High
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            AlphaBin::Low => "le2",
            AlphaBin::Mid => "3to5",
            AlphaBin::High => "ge6",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.label() == s)
    }
}

/// Discharge bins of the head-shift splits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HeadBin {
    /// `Q ≤ 90` l/s
    Low,
    /// `90 < Q < 170` l/s
    Mid,
    /// `Q ≥ 170` l/s
    High,
}

impl HeadBin {
    pub const ALL: [HeadBin; 3] = [HeadBin::Low, HeadBin::Mid, HeadBin::High];

    pub fn of(q_lps: f64) -> Self {
        const TOL: f64 = 1e-6;
        if q_lps <= 90.0 + TOL {
            HeadBin::Low
        } else if q_lps < 170.0 - TOL {
            HeadBin::Mid
        } else {
            HeadBin::High
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            HeadBin::Low => "le90",
            HeadBin::Mid => "100to160",
            HeadBin::High => "ge170",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.label() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SplitPolicy {
    IdByGeometry,
    OodGeomAlpha(AlphaBin),
    OodHeadQ(HeadBin),
    FractionSubset(f64),
}

impl fmt::Display for SplitPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplitPolicy::IdByGeometry => write!(f, "id"),
            SplitPolicy::OodGeomAlpha(b) => write!(f, "ood-geom-{}", b.label()),
            SplitPolicy::OodHeadQ(b) => write!(f, "ood-head-{}", b.label()),
            SplitPolicy::FractionSubset(x) => write!(f, "fraction-{x}"),
        }
    }
}

/// Partition of every label of a manifest, aligned with `manifest.labels`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub name: String,
    pub policy: SplitPolicy,
    pub partitions: Vec<Partition>,
}

impl SplitAssignment {
    pub fn indices(&self, p: Partition) -> Vec<usize> {
        self.partitions.iter().enumerate().filter(|(_, &q)| q == p).map(|(i, _)| i).collect()
    }

    pub fn counts(&self) -> [usize; 4] {
        let mut c = [0; 4];
        for p in &self.partitions {
            c[*p as usize] += 1;
        }
        c
    }

    /// Geometry ids that have at least one label in `p`.
    pub fn geometries(&self, manifest: &DatasetManifest, p: Partition) -> HashSet<String> {
        self.indices(p).into_iter().map(|i| manifest.labels[i].geometry_id.clone()).collect()
    }

    /// Labels shared between partitions; should always be empty, checked
    /// at the (geometry, discharge) level.
    pub fn leaked_pairs(&self, manifest: &DatasetManifest) -> usize {
        let mut owner: HashMap<(String, i64), Partition> = HashMap::new();
        let mut leaks = 0;
        for (l, &p) in manifest.labels.iter().zip(&self.partitions) {
            match owner.insert((l.geometry_id.clone(), q_key(l.discharge)), p) {
                Some(prev) if prev != p => leaks += 1,
                _ => {}
            }
        }
        leaks
    }

    /// Geometries with labels in both train and test.
    pub fn shared_geometries(&self, manifest: &DatasetManifest) -> usize {
        let train = self.geometries(manifest, Partition::Train);
        self.geometries(manifest, Partition::Test).intersection(&train).count()
    }

    pub fn write_csv<W: Write>(&self, manifest: &DatasetManifest, out: W) -> Result<(), DatasetError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["geometry_id", "Q_lps", "partition"])?;
        for (l, p) in manifest.labels.iter().zip(&self.partitions) {
            w.write_record([l.geometry_id.as_str(), &sig9(l.discharge_lps()), p.as_str()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a split table and aligns it with the manifest labels. Every
    /// label must be listed exactly once.
    pub fn read_csv<R: Read>(
        manifest: &DatasetManifest,
        name: &str,
        policy: SplitPolicy,
        input: R,
    ) -> Result<Self, DatasetError> {
        let mut position: HashMap<(String, i64), usize> = HashMap::new();
        for (i, l) in manifest.labels.iter().enumerate() {
            position.insert((l.geometry_id.clone(), q_key(l.discharge)), i);
        }
        let mut partitions: Vec<Option<Partition>> = vec![None; manifest.labels.len()];
        let mut rdr = csv::Reader::from_reader(input);
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            let bad = |message: String| DatasetError::Parse { line, message };
            let q: f64 = rec.get(1).unwrap_or("").parse().map_err(|_| bad("cannot parse Q_lps".into()))?;
            let id = rec.get(0).unwrap_or("").to_string();
            let p = Partition::parse(rec.get(2).unwrap_or("")).ok_or_else(|| bad("unknown partition".into()))?;
            let k = *position
                .get(&(id.clone(), q_key(lps_to_m3s(q))))
                .ok_or_else(|| bad(format!("no label for {id} at {q} l/s")))?;
            if partitions[k].replace(p).is_some() {
                return Err(bad(format!("{id} at {q} l/s listed twice")));
            }
        }
        let partitions = partitions
            .into_iter()
            .enumerate()
            .map(|(i, p)| {
                p.ok_or_else(|| DatasetError::Parse {
                    line: 0,
                    message: format!("label {} at {} l/s missing", manifest.labels[i].geometry_id, manifest.labels[i].discharge_lps()),
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(SplitAssignment { name: name.to_string(), policy, partitions })
    }
}

fn shuffled<T>(mut items: Vec<T>, seed: u64, stream: u64) -> Vec<T> {
    items.shuffle(&mut stream_rng(seed, Domain::Split, stream));
    items
}

/// Geometries with at least one label, in manifest order.
fn labeled_geometries(manifest: &DatasetManifest) -> Vec<usize> {
    let mut has = vec![false; manifest.geometries.len()];
    for g in manifest.label_geometry() {
        has[g] = true;
    }
    (0..has.len()).filter(|&g| has[g]).collect()
}

fn by_geometry(manifest: &DatasetManifest, role: &[Partition]) -> Vec<Partition> {
    manifest.label_geometry().into_iter().map(|g| role[g]).collect()
}

fn check_nonempty(a: &SplitAssignment) -> Result<(), DatasetError> {
    let c = a.counts();
    if c[Partition::Train as usize] == 0 || c[Partition::Test as usize] == 0 {
        return Err(DatasetError::EmptyBin(a.name.clone()));
    }
    Ok(())
}

/// 80/10/10 split by geometry: validation and test get `floor(n/10)`
/// geometries each, training the rest.
pub fn split_id(manifest: &DatasetManifest, seed: u64) -> Result<SplitAssignment, DatasetError> {
    let geoms = labeled_geometries(manifest);
    let n = geoms.len();
    if n < 10 {
        return Err(DatasetError::TooFewGeometries { found: n, required: 10 });
    }
    let order = shuffled(geoms, seed, 0);
    let held = n / 10;
    let mut role = vec![Partition::Excluded; manifest.geometries.len()];
    for (k, &g) in order.iter().enumerate() {
        role[g] = if k < n - 2 * held {
            Partition::Train
        } else if k < n - held {
            Partition::Val
        } else {
            Partition::Test
        };
    }
    let policy = SplitPolicy::IdByGeometry;
    Ok(SplitAssignment { name: policy.to_string(), policy, partitions: by_geometry(manifest, &role) })
}

/// Tests on every geometry whose sidewall angle falls in `bin`; a seeded
/// tenth of the remaining geometries validates.
pub fn split_ood_geom(manifest: &DatasetManifest, bin: AlphaBin, seed: u64) -> Result<SplitAssignment, DatasetError> {
    let policy = SplitPolicy::OodGeomAlpha(bin);
    let mut role = vec![Partition::Excluded; manifest.geometries.len()];
    let mut train = Vec::new();
    for g in labeled_geometries(manifest) {
        if AlphaBin::of(manifest.geometries[g].derived.sidewall_angle_deg()) == bin {
            role[g] = Partition::Test;
        } else {
            role[g] = Partition::Train;
            train.push(g);
        }
    }
    let n_val = (train.len() / 10).max(usize::from(train.len() >= 2));
    for &g in shuffled(train, seed, 1 + bin as u64).iter().take(n_val) {
        role[g] = Partition::Val;
    }
    let a = SplitAssignment { name: policy.to_string(), policy, partitions: by_geometry(manifest, &role) };
    check_nonempty(&a)?;
    Ok(a)
}

/// Tests on every label whose discharge falls in `bin`; a seeded tenth of
/// the remaining labels validates.
pub fn split_ood_head(manifest: &DatasetManifest, bin: HeadBin, seed: u64) -> Result<SplitAssignment, DatasetError> {
    let policy = SplitPolicy::OodHeadQ(bin);
    let mut partitions = Vec::with_capacity(manifest.labels.len());
    let mut train = Vec::new();
    for (i, l) in manifest.labels.iter().enumerate() {
        if HeadBin::of(l.discharge_lps()) == bin {
            partitions.push(Partition::Test);
        } else {
            partitions.push(Partition::Train);
            train.push(i);
        }
    }
    let n_val = train.len() / 10;
    for &i in shuffled(train, seed, 8 + bin as u64).iter().take(n_val) {
        partitions[i] = Partition::Val;
    }
    let a = SplitAssignment { name: policy.to_string(), policy, partitions };
    check_nonempty(&a)?;
    Ok(a)
}

/// Keeps `round(fraction · n)` (at least one) of the training geometries;
/// the rest become [`Partition::Excluded`]. Subsets for one seed are nested
/// across fractions.
pub fn subset_fraction(
    manifest: &DatasetManifest,
    split: &SplitAssignment,
    fraction: f64,
    seed: u64,
) -> Result<SplitAssignment, DatasetError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(DatasetError::InvalidFraction(fraction));
    }
    let geometry_of = manifest.label_geometry();
    let mut train = Vec::new();
    let mut seen = vec![false; manifest.geometries.len()];
    for (&g, &p) in geometry_of.iter().zip(&split.partitions) {
        if p == Partition::Train && !seen[g] {
            seen[g] = true;
            train.push(g);
        }
    }
    train.sort_unstable();
    let keep_n = ((fraction * train.len() as f64).round() as usize).clamp(1.min(train.len()), train.len());
    let mut keep = vec![false; manifest.geometries.len()];
    for &g in shuffled(train, seed, 16).iter().take(keep_n) {
        keep[g] = true;
    }
    let partitions = geometry_of
        .iter()
        .zip(&split.partitions)
        .map(|(&g, &p)| if p == Partition::Train && !keep[g] { Partition::Excluded } else { p })
        .collect();
    let policy = SplitPolicy::FractionSubset(fraction);
    Ok(SplitAssignment { name: policy.to_string(), policy, partitions })
}

/// Symmetric correlation matrix; `None` where a column has zero variance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.names.iter().position(|n| n == a)?;
        let j = self.names.iter().position(|n| n == b)?;
        self.values[i][j]
    }

    /// Columns whose correlation is undefined.
    pub fn zero_variance(&self) -> Vec<&str> {
        (0..self.names.len()).filter(|&i| self.values[i][i].is_none()).map(|i| self.names[i].as_str()).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), DatasetError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![String::new()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header)?;
        for (name, row) in self.names.iter().zip(&self.values) {
            let mut rec = vec![name.clone()];
            rec.extend(row.iter().map(|v| v.map(sig9).unwrap_or_default()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Product-moment correlation of the columns of `rows`.
pub fn pearson_matrix(names: &[&str], rows: &[Vec<f64>]) -> Result<CorrelationMatrix, DatasetError> {
    if rows.len() < 3 {
        return Err(DatasetError::TooFewSamples { found: rows.len(), required: 3 });
    }
    let d = names.len();
    let n = rows.len() as f64;
    let mean: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let mut cov = vec![vec![0.0; d]; d];
    for r in rows {
        for i in 0..d {
            let a = r[i] - mean[i];
            for j in i..d {
                cov[i][j] += a * (r[j] - mean[j]);
            }
        }
    }
    // A column is constant when its centred sum of squares vanishes
    // relative to its magnitude.
    let constant: Vec<bool> = (0..d)
        .map(|j| {
            let scale = rows.iter().map(|r| r[j].abs()).fold(0.0, f64::max);
            cov[j][j] <= (1e-12 * scale).powi(2) * n
        })
        .collect();
    let mut values = vec![vec![None; d]; d];
    for i in 0..d {
        for j in i..d {
            if constant[i] || constant[j] {
                continue;
            }
            let r = if i == j { 1.0 } else { (cov[i][j] / (cov[i][i] * cov[j][j]).sqrt()).clamp(-1.0, 1.0) };
            values[i][j] = Some(r);
            values[j][i] = Some(r);
        }
    }
    Ok(CorrelationMatrix { names: names.iter().map(|s| s.to_string()).collect(), values })
}

/// Correlations of the parametric features and c_D over all labels.
pub fn pearson(manifest: &DatasetManifest) -> Result<CorrelationMatrix, DatasetError> {
    let mut names: Vec<&str> = FEATURE_NAMES.to_vec();
    names.push("c_D");
    let rows: Vec<Vec<f64>> = (0..manifest.labels.len())
        .map(|i| {
            let mut r = manifest.features(i).to_vec();
            r.push(manifest.labels[i].cd);
            r
        })
        .collect();
    pearson_matrix(&names, &rows)
}

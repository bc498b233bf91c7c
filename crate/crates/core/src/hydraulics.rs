//! Head-discharge relations for a sharp-crested labyrinth crest, the
//! standard discharge schedule, and discharge-coefficient label sources.

use crate::pkw::{limits, PkwDerived, PkwFixed};
use crate::rng::{stream_rng, Domain};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io::Read;

/// Gravitational acceleration, m/s².
pub const GRAVITY: f64 = 9.81;

/// Simulated discharges in l/s, ascending.
pub const SCHEDULE_LPS: [f64; 19] = [
    50.0, 55.0, 60.0, 70.0, 80.0, 90.0, 100.0, 110.0, 120.0, 130.0, 140.0, 150.0, 160.0, 170.0, 180.0, 190.0, 200.0,
    225.0, 250.0,
];

pub fn lps_to_m3s(q: f64) -> f64 {
    q / 1000.0
}

pub fn m3s_to_lps(q: f64) -> f64 {
    q * 1000.0
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum HydraulicsError {
    #[error("non-physical input: {0}")]
    NonPhysical(String),
    #[error("discharge {0} m^3/s outside the oracle range [0.05, 0.25]")]
    OutOfRange(f64),
    #[error("row {row}: unknown geometry {id}")]
    MissingGeometry { row: usize, id: String },
    #[error("unsupported unit in column {0}")]
    UnitError(String),
    #[error("row {row}: {message}")]
    ParseError { row: usize, message: String },
}

fn positive(name: &str, v: f64) -> Result<f64, HydraulicsError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(HydraulicsError::NonPhysical(format!("{name} = {v}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowCondition {
    /// Discharge, m³/s.
    pub discharge: f64,
    /// Flow depth above the crest, m.
    pub depth: f64,
    /// Total head above the crest, m.
    pub total_head: f64,
    /// Approach velocity, m/s.
    pub velocity: f64,
}

/// Total head from the measured depth above the crest. The approach
/// velocity uses the full channel width and the upstream depth `P + h_t`.
pub fn total_head(discharge: f64, depth: f64, fixed: &PkwFixed) -> Result<FlowCondition, HydraulicsError> {
    positive("Q", discharge)?;
    positive("h_t", depth)?;
    let section = fixed.width * (fixed.height + depth);
    if !(section > 0.0) {
        return Err(HydraulicsError::NonPhysical(format!("approach section {section}")));
    }
    let velocity = discharge / section;
    let total_head = velocity * velocity / (2.0 * GRAVITY) + depth;
    Ok(FlowCondition { discharge, depth, total_head, velocity })
}

/// `c_D = 3Q / (2 L sqrt(2g) H_t^1.5)`.
pub fn cd_from_head(discharge: f64, crest_length: f64, head: f64) -> Result<f64, HydraulicsError> {
    positive("Q", discharge)?;
    positive("L", crest_length)?;
    positive("H_t", head)?;
    Ok(3.0 * discharge / (2.0 * crest_length * (2.0 * GRAVITY).sqrt() * head.powf(1.5)))
}

/// `Q = (2/3) c_D L sqrt(2g) H_t^1.5`.
pub fn discharge_from_cd(cd: f64, crest_length: f64, head: f64) -> Result<f64, HydraulicsError> {
    if !(cd >= 0.0 && cd.is_finite()) {
        return Err(HydraulicsError::NonPhysical(format!("c_D = {cd}")));
    }
    positive("L", crest_length)?;
    positive("H_t", head)?;
    Ok(2.0 / 3.0 * cd * crest_length * (2.0 * GRAVITY).sqrt() * head.powf(1.5))
}

/// `H_t = (3Q / (2 c_D L sqrt(2g)))^(2/3)`.
pub fn head_from_cd(cd: f64, crest_length: f64, discharge: f64) -> Result<f64, HydraulicsError> {
    positive("c_D", cd)?;
    positive("L", crest_length)?;
    positive("Q", discharge)?;
    Ok((3.0 * discharge / (2.0 * cd * crest_length * (2.0 * GRAVITY).sqrt())).powf(2.0 / 3.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DischargeSchedule {
    /// Discharges in l/s, strictly increasing.
    pub lps: Vec<f64>,
}

impl DischargeSchedule {
    pub fn standard() -> Self {
        DischargeSchedule { lps: SCHEDULE_LPS.to_vec() }
    }

    pub fn m3s(&self) -> impl Iterator<Item = f64> + '_ {
        self.lps.iter().map(|&q| lps_to_m3s(q))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelSource {
    CfdCsv,
    Synthetic,
    Manual,
}

impl LabelSource {
    pub fn as_str(self) -> &'static str {
        match self {
            LabelSource::CfdCsv => "cfd-csv",
            LabelSource::Synthetic => "synthetic",
            LabelSource::Manual => "manual",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "cfd-csv" => Some(LabelSource::CfdCsv),
            "synthetic" => Some(LabelSource::Synthetic),
            "manual" => Some(LabelSource::Manual),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub geometry_id: String,
    /// Discharge, m³/s.
    pub discharge: f64,
    /// Total head, m, when known.
    pub total_head: Option<f64>,
    pub cd: f64,
    pub source: LabelSource,
}

impl LabeledSample {
    pub fn discharge_lps(&self) -> f64 {
        m3s_to_lps(self.discharge)
    }
}

/// Normalisation ranges of the synthetic oracle, derived from the
/// constraint bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleRanges {
    pub length: (f64, f64),
    pub reduced_thickness: (f64, f64),
    pub outlet_width_downstream: (f64, f64),
}

impl OracleRanges {
    /// `B` spans `B_b (1 + 2 R)` over the base-length and ratio bounds;
    /// `T_s3` lies in `(0, T_s]`; `W_o,d = W_u - W_i,d - 2 T_s3` lies between
    /// the minimum key width and `W_u` less that width.
    pub fn from_bounds(fixed: &PkwFixed) -> Self {
        let p = fixed.height;
        let key_min = limits::KEY_WIDTH_MIN * p;
        OracleRanges {
            length: (
                limits::BASE_LENGTH_MIN * p * (1.0 + 2.0 * limits::OVERHANG_RATIO_MIN),
                limits::BASE_LENGTH_MAX * p * (1.0 + 2.0 * limits::OVERHANG_RATIO_MAX),
            ),
            reduced_thickness: (0.0, limits::WALL_THICKNESS_MAX * p),
            outlet_width_downstream: (key_min, fixed.unit_width() - key_min),
        }
    }
}

fn unit(v: f64, (lo, hi): (f64, f64)) -> f64 {
    ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
}

/// Fictitious discharge-coefficient model for exercising the pipeline.
/// Its trends (up with sidewall angle, down with discharge, length and wall
/// thickness, peaked in outlet width) are chosen by hand; the values are not
/// hydraulic results.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticOracle {
    pub ranges: OracleRanges,
    /// Standard deviation of additive Gaussian noise.
    pub sigma: f64,
}

/// Lowest and highest noise-free oracle values permitted by its terms.
pub const ORACLE_ENVELOPE: (f64, f64) = (0.21, 0.57);

impl SyntheticOracle {
    pub fn new(fixed: &PkwFixed, sigma: f64) -> Self {
        SyntheticOracle { ranges: OracleRanges::from_bounds(fixed), sigma }
    }

    /// Noise-free value from the raw inputs.
    pub fn mean_from_features(
        &self,
        alpha_deg: f64,
        discharge: f64,
        length: f64,
        reduced_thickness: f64,
        outlet_width_downstream: f64,
    ) -> Result<f64, HydraulicsError> {
        if !(0.05 - 1e-12..=0.25 + 1e-12).contains(&discharge) {
            return Err(HydraulicsError::OutOfRange(discharge));
        }
        let q = (m3s_to_lps(discharge) - 50.0) / 200.0;
        let b = unit(length, self.ranges.length);
        let t = unit(reduced_thickness, self.ranges.reduced_thickness);
        let w = unit(outlet_width_downstream, self.ranges.outlet_width_downstream);
        Ok(0.40 + 0.12 * (1.0 - (-alpha_deg / 4.0).exp()) - 0.10 * q - 0.05 * b - 0.04 * t + 0.2 * w * (1.0 - w))
    }

    pub fn mean(&self, derived: &PkwDerived, discharge: f64) -> Result<f64, HydraulicsError> {
        self.mean_from_features(
            derived.sidewall_angle_deg(),
            discharge,
            derived.length,
            derived.wall_thickness_reduced,
            derived.outlet_width_downstream,
        )
    }

    /// Value with noise drawn from the stream of label `index`.
    pub fn sample(&self, derived: &PkwDerived, discharge: f64, seed: u64, index: u64) -> Result<f64, HydraulicsError> {
        let mean = self.mean(derived, discharge)?;
        if self.sigma <= 0.0 {
            return Ok(mean);
        }
        let normal = Normal::new(0.0, self.sigma).map_err(|e| HydraulicsError::NonPhysical(e.to_string()))?;
        let mut rng = stream_rng(seed, Domain::Labels, index);
        Ok(mean + normal.sample(&mut rng))
    }

    /// Labels every geometry at every discharge of `schedule`.
    pub fn label_all<'a>(
        &self,
        geometries: impl IntoIterator<Item = (&'a str, &'a PkwDerived)>,
        schedule: &DischargeSchedule,
        seed: u64,
    ) -> Result<Vec<LabeledSample>, HydraulicsError> {
        let mut out = Vec::new();
        for (g, (id, derived)) in geometries.into_iter().enumerate() {
            for (k, q) in schedule.m3s().enumerate() {
                let index = (g * schedule.lps.len() + k) as u64;
                let cd = self.sample(derived, q, seed, index)?;
                if !(cd > 0.0) {
                    return Err(HydraulicsError::NonPhysical(format!("synthetic c_D {cd} for {id}")));
                }
                let head = head_from_cd(cd, derived.crest_length, q)?;
                out.push(LabeledSample {
                    geometry_id: id.to_string(),
                    discharge: q,
                    total_head: Some(head),
                    cd,
                    source: LabelSource::Synthetic,
                });
            }
        }
        Ok(out)
    }
}

/// Parsed label file.
#[derive(Debug, Clone, PartialEq)]
pub struct IngestedLabels {
    pub labels: Vec<LabeledSample>,
    /// Rows that replaced an earlier row for the same geometry and discharge.
    pub duplicates_replaced: usize,
}

enum HeadColumn {
    Depth(usize),
    Total(usize),
}

/// Reads measured labels. Columns: `geometry_id`, `Q_lps`, one of `h_t_m`
/// (depth above crest) or `H_t_m` (total head), and optionally `c_D`. A
/// missing `c_D` is computed from the head and the geometry's crest length.
pub fn ingest_labels<R: Read>(
    input: R,
    crest_lengths: &HashMap<String, f64>,
    fixed: &PkwFixed,
) -> Result<IngestedLabels, HydraulicsError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let parse_err = |row, message: String| HydraulicsError::ParseError { row, message };
    let headers = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);

    for h in headers.iter() {
        let known = ["geometry_id", "Q_lps", "h_t_m", "H_t_m", "c_D"];
        let unit_like = h.starts_with("Q_") || h.starts_with("h_t_") || h.starts_with("H_t_");
        if unit_like && !known.contains(&h) {
            return Err(HydraulicsError::UnitError(h.to_string()));
        }
    }
    let id_col = find("geometry_id").ok_or_else(|| parse_err(1, "missing geometry_id column".into()))?;
    let q_col = find("Q_lps").ok_or_else(|| parse_err(1, "missing Q_lps column".into()))?;
    let head_col = match (find("h_t_m"), find("H_t_m")) {
        (_, Some(c)) => Some(HeadColumn::Total(c)),
        (Some(c), None) => Some(HeadColumn::Depth(c)),
        (None, None) => None,
    };
    let cd_col = find("c_D");
    if head_col.is_none() && cd_col.is_none() {
        return Err(parse_err(1, "need c_D or a head column".into()));
    }

    let mut labels: Vec<LabeledSample> = Vec::new();
    let mut position: HashMap<(String, u64), usize> = HashMap::new();
    let mut duplicates_replaced = 0;
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| parse_err(row, e.to_string()))?;
        let field = |c: usize| rec.get(c).unwrap_or("");
        let number = |c: usize, name: &str| -> Result<f64, HydraulicsError> {
            field(c).parse::<f64>().map_err(|_| parse_err(row, format!("cannot parse {name} value {:?}", field(c))))
        };
        let id = field(id_col).to_string();
        let q_lps = number(q_col, "Q_lps")?;
        if !(q_lps > 0.0) {
            return Err(parse_err(row, format!("discharge must be positive, got {q_lps}")));
        }
        let q = lps_to_m3s(q_lps);
        let length = *crest_lengths.get(&id).ok_or_else(|| HydraulicsError::MissingGeometry { row, id: id.clone() })?;

        let head = match &head_col {
            Some(HeadColumn::Total(c)) if !field(*c).is_empty() => Some(number(*c, "H_t_m")?),
            Some(HeadColumn::Depth(c)) if !field(*c).is_empty() => {
                let depth = number(*c, "h_t_m")?;
                Some(total_head(q, depth, fixed).map_err(|e| parse_err(row, e.to_string()))?.total_head)
            }
            _ => None,
        };
        let cd = match cd_col.map(field).filter(|s| !s.is_empty()) {
            Some(raw) => raw.parse::<f64>().map_err(|_| parse_err(row, format!("cannot parse c_D value {raw:?}")))?,
            None => {
                let h = head.ok_or_else(|| parse_err(row, "neither c_D nor head given".into()))?;
                cd_from_head(q, length, h).map_err(|e| parse_err(row, e.to_string()))?
            }
        };
        if !(cd > 0.0 && cd.is_finite()) {
            return Err(parse_err(row, format!("c_D must be positive, got {cd}")));
        }
        let label = LabeledSample { geometry_id: id.clone(), discharge: q, total_head: head, cd, source: LabelSource::CfdCsv };
        match position.get(&(id.clone(), q_lps.to_bits())) {
            Some(&k) => {
                labels[k] = label;
                duplicates_replaced += 1;
            }
            None => {
                position.insert((id, q_lps.to_bits()), labels.len());
                labels.push(label);
            }
        }
    }
    Ok(IngestedLabels { labels, duplicates_replaced })
}

//! Parametric record tables: one CSV row per geometry.

use crate::pkw::{derive, GeometryError, PkwDerived, PkwFixed, PkwSample};
use std::io::{Read, Write};

pub const COLUMNS: [&str; 22] = [
    "geometry_id", "W", "P", "N_u", "B_b", "R_B_i", "R_B_o", "T_s", "W_i_u", "W_i_d", "W_u", "B_i", "B_o", "B",
    "alpha_deg", "T_s2", "T_s3", "delta_T_s", "W_o_u", "W_o_d", "L_u", "L",
];

#[derive(Debug, thiserror::Error)]
pub enum RecordError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column {0}")]
    MissingColumn(&'static str),
    #[error("row {row}: cannot parse {column} value {value:?}")]
    Parse { row: usize, column: &'static str, value: String },
    #[error("row {row}: {source}")]
    Geometry { row: usize, source: GeometryError },
}

/// One row of a parametric table.
#[derive(Debug, Clone, PartialEq)]
pub struct ParametricRecord {
    pub geometry_id: String,
    pub fixed: PkwFixed,
    pub sample: PkwSample,
    pub derived: PkwDerived,
}

impl ParametricRecord {
    pub fn new(geometry_id: impl Into<String>, fixed: PkwFixed, sample: PkwSample) -> Result<Self, GeometryError> {
        let derived = derive(&fixed, &sample)?;
        Ok(ParametricRecord { geometry_id: geometry_id.into(), fixed, sample, derived })
    }
}

/// Formats `v` with `digits` significant digits, without exponent notation
/// for ordinary magnitudes and without trailing zeros.
pub fn format_sig(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let magnitude = v.abs().log10().floor() as i32;
    if !(-6..=9).contains(&magnitude) {
        let d = digits.saturating_sub(1);
        return format!("{v:.d$e}");
    }
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    let mut s = format!("{v:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

/// Nine significant digits, the precision of parametric tables.
pub fn sig9(v: f64) -> String {
    format_sig(v, 9)
}

pub fn write_records<W: Write>(out: W, records: &[ParametricRecord]) -> Result<(), RecordError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for r in records {
        let (f, s, d) = (&r.fixed, &r.sample, &r.derived);
        let mut row = vec![r.geometry_id.clone(), sig9(f.width), sig9(f.height), f.units.to_string()];
        let values = [
            s.base_length,
            s.inlet_overhang_ratio,
            s.outlet_overhang_ratio,
            s.wall_thickness,
            s.inlet_width_upstream,
            s.inlet_width_downstream,
            d.unit_width,
            d.inlet_overhang,
            d.outlet_overhang,
            d.length,
            d.sidewall_angle_deg(),
            d.wall_thickness_transverse,
            d.wall_thickness_reduced,
            d.wall_offset,
            d.outlet_width_upstream,
            d.outlet_width_downstream,
            d.unit_crest_length,
            d.crest_length,
        ];
        row.extend(values.iter().map(|v| sig9(*v)));
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Reads a parametric table. Only the input columns are used; derived
/// quantities are recomputed.
pub fn read_records<R: Read>(input: R) -> Result<Vec<ParametricRecord>, RecordError> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    let col = |name: &'static str| {
        headers.iter().position(|h| h.trim() == name).ok_or(RecordError::MissingColumn(name))
    };
    let inputs = ["W", "P", "N_u", "B_b", "R_B_i", "R_B_o", "T_s", "W_i_u", "W_i_d"];
    let id_col = col("geometry_id")?;
    let mut idx = [0usize; 9];
    for (slot, name) in idx.iter_mut().zip(inputs) {
        *slot = col(name)?;
    }

    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        let mut v = [0f64; 9];
        for (k, name) in inputs.iter().enumerate() {
            let raw = rec.get(idx[k]).unwrap_or("").trim();
            v[k] = raw
                .parse()
                .map_err(|_| RecordError::Parse { row, column: name, value: raw.to_string() })?;
        }
        let units = v[2];
        if units.fract() != 0.0 || units < 1.0 {
            return Err(RecordError::Parse { row, column: "N_u", value: units.to_string() });
        }
        let fixed = PkwFixed { width: v[0], height: v[1], units: units as u32 };
        let sample = PkwSample {
            base_length: v[3],
            inlet_overhang_ratio: v[4],
            outlet_overhang_ratio: v[5],
            wall_thickness: v[6],
            inlet_width_upstream: v[7],
            inlet_width_downstream: v[8],
        };
        let id = rec.get(id_col).unwrap_or("").trim().to_string();
        let record =
            ParametricRecord::new(id, fixed, sample).map_err(|source| RecordError::Geometry { row, source })?;
        out.push(record);
    }
    Ok(out)
}

//! Type-A piano key weir nomenclature and derived geometry.
//!
//! The weir is described by three fixed constants (total width `W`, height
//! `P`, unit count `N_u`) and six plan parameters, five of which are sampled
//! (the outlet overhang ratio defaults to the inlet one). Everything else,
//! including the sidewall inclination and the thickness projections needed
//! for trapezoidal plans, follows in closed form.
//!
//! Plan-view convention used throughout the crate: `x` runs downstream over
//! `[0, B]`, each unit spans `W_u` transversely with its inlet key centred.
//! Widths are measured at `x = 0` (`W_i,u`), `x = B - T_s` (`W_i,d`),
//! `x = T_s` (`W_o,u`) and `x = B` (`W_o,d`).

use serde::{Deserialize, Serialize};
use std::fmt;

/// Absolute slack applied to inclusive bounds.
pub const BOUND_SLACK: f64 = 1e-12;

/// Number of regression features produced by [`feature_vector`].
pub const FEATURE_COUNT: usize = 9;

/// Column names of [`feature_vector`], in order.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] =
    ["Q", "B_i", "B_o", "B", "alpha", "T_s2", "T_s3", "W_o_u", "W_o_d"];

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid sample: {0}")]
    InvalidSample(&'static str),
    #[error("degenerate geometry: total length {length} m does not exceed wall thickness {thickness} m")]
    DegenerateGeometry { length: f64, thickness: f64 },
    #[error("non-positive outlet width: upstream {upstream} m, downstream {downstream} m")]
    NonPositiveOutletWidth { upstream: f64, downstream: f64 },
}

/// Constants shared by every design in a batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PkwFixed {
    /// Total weir width `W`, m.
    pub width: f64,
    /// Weir height `P`, m.
    pub height: f64,
    /// Number of units `N_u`.
    pub units: u32,
}

impl PkwFixed {
    /// Laboratory-scale constants: 1 m wide, 0.33 m high, three units.
    pub const fn laboratory() -> Self {
        PkwFixed { width: 1.0, height: 0.33, units: 3 }
    }

    pub fn unit_width(&self) -> f64 {
        self.width / f64::from(self.units)
    }

    fn check(&self) -> Result<(), GeometryError> {
        if !(self.width > 0.0) || !(self.height > 0.0) || self.units == 0 {
            return Err(GeometryError::InvalidSample("fixed constants must be positive"));
        }
        Ok(())
    }
}

impl Default for PkwFixed {
    fn default() -> Self {
        Self::laboratory()
    }
}

/// The plan parameters of one design. Lengths in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PkwSample {
    /// Base length `B_b`.
    pub base_length: f64,
    /// Inlet (downstream) overhang ratio `R_B,i`.
    pub inlet_overhang_ratio: f64,
    /// Outlet (upstream) overhang ratio `R_B,o`.
    pub outlet_overhang_ratio: f64,
    /// Sidewall thickness perpendicular to the wall, `T_s`.
    pub wall_thickness: f64,
    /// Inlet key width at the upstream end, `W_i,u`.
    pub inlet_width_upstream: f64,
    /// Inlet key width at the downstream end, `W_i,d`.
    pub inlet_width_downstream: f64,
}

impl PkwSample {
    /// Builds a sample with symmetric overhangs (`R_B,o = R_B,i`).
    pub fn symmetric(
        base_length: f64,
        overhang_ratio: f64,
        wall_thickness: f64,
        inlet_width_upstream: f64,
        inlet_width_downstream: f64,
    ) -> Self {
        PkwSample {
            base_length,
            inlet_overhang_ratio: overhang_ratio,
            outlet_overhang_ratio: overhang_ratio,
            wall_thickness,
            inlet_width_upstream,
            inlet_width_downstream,
        }
    }
}

/// Quantities that follow from [`PkwFixed`] and [`PkwSample`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PkwDerived {
    /// Unit width `W_u = W / N_u`.
    pub unit_width: f64,
    /// Inlet overhang `B_i`.
    pub inlet_overhang: f64,
    /// Outlet overhang `B_o`.
    pub outlet_overhang: f64,
    /// Streamwise length `B`.
    pub length: f64,
    /// Sidewall inclination in plan, radians.
    pub sidewall_angle: f64,
    /// Wall thickness measured transversely, `T_s,2`.
    pub wall_thickness_transverse: f64,
    /// Reduced wall thickness at the key corners, `T_s,3`.
    pub wall_thickness_reduced: f64,
    /// `ΔT_s = T_s,2 - T_s,3`.
    pub wall_offset: f64,
    /// Outlet key width at the upstream end, `W_o,u`.
    pub outlet_width_upstream: f64,
    /// Outlet key width at the downstream end, `W_o,d`.
    pub outlet_width_downstream: f64,
    /// Developed crest length of one unit, `L_u`.
    pub unit_crest_length: f64,
    /// Developed crest length of the weir, `L`.
    pub crest_length: f64,
}

impl PkwDerived {
    pub fn sidewall_angle_deg(&self) -> f64 {
        self.sidewall_angle.to_degrees()
    }
}

fn check_sample(sample: &PkwSample) -> Result<(), GeometryError> {
    let lengths = [
        sample.base_length,
        sample.wall_thickness,
        sample.inlet_width_upstream,
        sample.inlet_width_downstream,
    ];
    if lengths.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(GeometryError::InvalidSample("lengths must be positive and finite"));
    }
    if !(sample.inlet_overhang_ratio > 0.0 && sample.outlet_overhang_ratio > 0.0) {
        return Err(GeometryError::InvalidSample("overhang ratios must be positive"));
    }
    if sample.inlet_width_upstream < sample.inlet_width_downstream {
        return Err(GeometryError::InvalidSample("upstream inlet width below downstream width"));
    }
    Ok(())
}

/// Evaluates every derived parameter of a design.
pub fn derive(fixed: &PkwFixed, sample: &PkwSample) -> Result<PkwDerived, GeometryError> {
    fixed.check()?;
    check_sample(sample)?;

    let unit_width = fixed.unit_width();
    let inlet_overhang = sample.inlet_overhang_ratio * sample.base_length;
    let outlet_overhang = sample.outlet_overhang_ratio * sample.base_length;
    let length = sample.base_length + inlet_overhang + outlet_overhang;
    let ts = sample.wall_thickness;
    if length <= ts {
        return Err(GeometryError::DegenerateGeometry { length, thickness: ts });
    }

    let angle = ((sample.inlet_width_upstream - sample.inlet_width_downstream) / (2.0 * (length - ts))).atan();
    let transverse = ts / angle.cos();
    let offset = ts * angle.tan();
    let reduced = transverse - offset;
    let outlet_up = unit_width - sample.inlet_width_upstream - 2.0 * reduced;
    let outlet_down = unit_width - sample.inlet_width_downstream - 2.0 * reduced;
    if outlet_up <= 0.0 || outlet_down <= 0.0 {
        return Err(GeometryError::NonPositiveOutletWidth { upstream: outlet_up, downstream: outlet_down });
    }

    let mut derived = PkwDerived {
        unit_width,
        inlet_overhang,
        outlet_overhang,
        length,
        sidewall_angle: angle,
        wall_thickness_transverse: transverse,
        wall_thickness_reduced: reduced,
        wall_offset: offset,
        outlet_width_upstream: outlet_up,
        outlet_width_downstream: outlet_down,
        unit_crest_length: 0.0,
        crest_length: 0.0,
    };
    let (unit, total) = crest_length(fixed, sample, &derived);
    derived.unit_crest_length = unit;
    derived.crest_length = total;
    Ok(derived)
}

/// Inlet key half-width at streamwise station `x`.
pub fn inlet_half_width(sample: &PkwSample, derived: &PkwDerived, x: f64) -> f64 {
    0.5 * sample.inlet_width_upstream - x * derived.sidewall_angle.tan()
}

/// Outlet key half-width at streamwise station `x`.
pub fn outlet_half_width(sample: &PkwSample, derived: &PkwDerived, x: f64) -> f64 {
    0.5 * derived.outlet_width_upstream + (x - sample.wall_thickness) * derived.sidewall_angle.tan()
}

/// Developed crest length `(L_u, L)`.
///
/// Sidewalls count over their full streamwise span; the crest walls count at
/// mid-thickness between the sidewall centrelines. For a rectangular plan this
/// reduces to `L_u = W_u + 2B`.
pub fn crest_length(fixed: &PkwFixed, sample: &PkwSample, derived: &PkwDerived) -> (f64, f64) {
    // Both end walls together span W_u less the taper over B - T_s.
    let b = derived.length;
    let alpha = derived.sidewall_angle;
    let ends_taper = 2.0 * (b - sample.wall_thickness) * alpha.tan();
    let unit = derived.unit_width + 2.0 * b / alpha.cos() - ends_taper;
    (unit, f64::from(fixed.units) * unit)
}

/// Regression features `(Q, B_i, B_o, B, alpha[deg], T_s2, T_s3, W_o,u, W_o,d)`.
pub fn feature_vector(derived: &PkwDerived, discharge: f64) -> [f64; FEATURE_COUNT] {
    [
        discharge,
        derived.inlet_overhang,
        derived.outlet_overhang,
        derived.length,
        derived.sidewall_angle_deg(),
        derived.wall_thickness_transverse,
        derived.wall_thickness_reduced,
        derived.outlet_width_upstream,
        derived.outlet_width_downstream,
    ]
}

/// A fully evaluated design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PkwDesign {
    pub fixed: PkwFixed,
    pub sample: PkwSample,
    pub derived: PkwDerived,
}

impl PkwDesign {
    pub fn new(fixed: PkwFixed, sample: PkwSample) -> Result<Self, GeometryError> {
        let derived = derive(&fixed, &sample)?;
        Ok(PkwDesign { fixed, sample, derived })
    }

    pub fn inlet_half_width(&self, x: f64) -> f64 {
        inlet_half_width(&self.sample, &self.derived, x)
    }

    pub fn outlet_half_width(&self, x: f64) -> f64 {
        outlet_half_width(&self.sample, &self.derived, x)
    }
}

/// Identifies one feasibility check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstraintId {
    BaseLengthMin,
    BaseLengthMax,
    InletOverhangRatioMin,
    InletOverhangRatioMax,
    WallThicknessMin,
    WallThicknessMax,
    InletWidthUpstreamMin,
    InletWidthUpstreamMax,
    InletWidthDownstreamMin,
    InletWidthDownstreamMax,
    InletWidthOrder,
    OutletOverhangRatioPositive,
    LengthExceedsWallThickness,
    OutletWidthUpstreamPositive,
    OutletWidthDownstreamPositive,
}

impl fmt::Display for ConstraintId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ConstraintId::*;
        let s = match self {
            BaseLengthMin => "B_b >= 0.33P",
            BaseLengthMax => "B_b <= 1.67P",
            InletOverhangRatioMin => "R_B_i >= 0.25",
            InletOverhangRatioMax => "R_B_i <= 1",
            WallThicknessMin => "T_s >= 0.015P",
            WallThicknessMax => "T_s <= 0.18P",
            InletWidthUpstreamMin => "W_i_u >= 0.03P",
            InletWidthUpstreamMax => "W_i_u <= W_u - 2T_s - 0.03P",
            InletWidthDownstreamMin => "W_i_d >= 0.03P",
            InletWidthDownstreamMax => "W_i_d <= W_u - 2T_s - 0.03P",
            InletWidthOrder => "W_i_u >= W_i_d",
            OutletOverhangRatioPositive => "R_B_o > 0",
            LengthExceedsWallThickness => "B > T_s",
            OutletWidthUpstreamPositive => "W_o_u > 0",
            OutletWidthDownstreamPositive => "W_o_d > 0",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: ConstraintId,
    pub actual: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violates(&self, id: ConstraintId) -> bool {
        self.violations.iter().any(|v| v.constraint == id)
    }
}

/// Relative positions of the feasibility bounds, as multiples of `P`.
pub mod limits {
    pub const BASE_LENGTH_MIN: f64 = 0.33;
    pub const BASE_LENGTH_MAX: f64 = 1.67;
    pub const OVERHANG_RATIO_MIN: f64 = 0.25;
    pub const OVERHANG_RATIO_MAX: f64 = 1.0;
    pub const WALL_THICKNESS_MIN: f64 = 0.015;
    pub const WALL_THICKNESS_MAX: f64 = 0.18;
    pub const KEY_WIDTH_MIN: f64 = 0.03;
}

/// Checks every feasibility constraint and reports all violations.
pub fn validate(fixed: &PkwFixed, sample: &PkwSample) -> ValidationReport {
    use ConstraintId::*;
    let p = fixed.height;
    let width_max = fixed.unit_width() - 2.0 * sample.wall_thickness - limits::KEY_WIDTH_MIN * p;
    let mut violations = Vec::new();
    let mut range = |(min_id, max_id), actual: f64, lo: f64, hi: f64| {
        if !(actual >= lo - BOUND_SLACK) {
            violations.push(Violation { constraint: min_id, actual, bound: lo });
        }
        if !(actual <= hi + BOUND_SLACK) {
            violations.push(Violation { constraint: max_id, actual, bound: hi });
        }
    };
    range(
        (BaseLengthMin, BaseLengthMax),
        sample.base_length,
        limits::BASE_LENGTH_MIN * p,
        limits::BASE_LENGTH_MAX * p,
    );
    range(
        (InletOverhangRatioMin, InletOverhangRatioMax),
        sample.inlet_overhang_ratio,
        limits::OVERHANG_RATIO_MIN,
        limits::OVERHANG_RATIO_MAX,
    );
    range(
        (WallThicknessMin, WallThicknessMax),
        sample.wall_thickness,
        limits::WALL_THICKNESS_MIN * p,
        limits::WALL_THICKNESS_MAX * p,
    );
    range(
        (InletWidthUpstreamMin, InletWidthUpstreamMax),
        sample.inlet_width_upstream,
        limits::KEY_WIDTH_MIN * p,
        width_max,
    );
    range(
        (InletWidthDownstreamMin, InletWidthDownstreamMax),
        sample.inlet_width_downstream,
        limits::KEY_WIDTH_MIN * p,
        width_max,
    );

    if sample.inlet_width_upstream < sample.inlet_width_downstream {
        violations.push(Violation {
            constraint: InletWidthOrder,
            actual: sample.inlet_width_upstream,
            bound: sample.inlet_width_downstream,
        });
    }
    if !(sample.outlet_overhang_ratio > 0.0) {
        violations.push(Violation { constraint: OutletOverhangRatioPositive, actual: sample.outlet_overhang_ratio, bound: 0.0 });
    }

    let length = sample.base_length * (1.0 + sample.inlet_overhang_ratio + sample.outlet_overhang_ratio);
    if !(length > sample.wall_thickness) {
        violations.push(Violation { constraint: LengthExceedsWallThickness, actual: length, bound: sample.wall_thickness });
    } else {
        let angle = ((sample.inlet_width_upstream - sample.inlet_width_downstream)
            / (2.0 * (length - sample.wall_thickness)))
            .atan();
        let reduced = sample.wall_thickness / angle.cos() - sample.wall_thickness * angle.tan();
        let up = fixed.unit_width() - sample.inlet_width_upstream - 2.0 * reduced;
        let down = fixed.unit_width() - sample.inlet_width_downstream - 2.0 * reduced;
        if !(up > 0.0) {
            violations.push(Violation { constraint: OutletWidthUpstreamPositive, actual: up, bound: 0.0 });
        }
        if !(down > 0.0) {
            violations.push(Violation { constraint: OutletWidthDownstreamPositive, actual: down, bound: 0.0 });
        }
    }
    ValidationReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    pub(crate) fn trapezoid() -> PkwSample {
        PkwSample::symmetric(0.40, 0.5, 0.02, 0.20, 0.14)
    }

    #[test]
    fn trapezoidal_derivation() {
        let d = derive(&PkwFixed::laboratory(), &trapezoid()).unwrap();
        assert!(close(d.length, 0.8, 1e-15));
        assert!(close(d.inlet_overhang, 0.2, 1e-15));
        assert!(close(d.sidewall_angle, 0.03844259002118798, 1e-13));
        assert!(close(d.sidewall_angle_deg(), 2.2025981617658053, 1e-13));
        assert!(close(d.wall_thickness_transverse, 0.020014787432704136, 1e-13));
        assert!(close(d.wall_thickness_reduced, 0.019245556663473367, 1e-13));
        assert!(close(d.outlet_width_upstream, 0.09484222000638656, 1e-13));
        assert!(close(d.outlet_width_downstream, 0.15484222000638656, 1e-13));
        assert!(close(d.unit_crest_length, 1.8745163279496642, 1e-13));
        assert!(close(d.crest_length, 5.623548983848993, 1e-13));
    }

    #[test]
    fn rectangular_crest_length() {
        let s = PkwSample::symmetric(0.40, 0.5, 0.02, 0.15, 0.15);
        let d = derive(&PkwFixed::laboratory(), &s).unwrap();
        assert_eq!(d.sidewall_angle, 0.0);
        assert_eq!(d.wall_thickness_transverse, 0.02);
        assert_eq!(d.wall_thickness_reduced, 0.02);
        assert_eq!(d.wall_offset, 0.0);
        assert!(close(d.unit_crest_length, 2.0 * 0.8 + 1.0 / 3.0, 1e-14));
        assert!(close(d.crest_length, 5.8, 1e-14));
    }

    #[test]
    fn feature_order() {
        let d = derive(&PkwFixed::laboratory(), &trapezoid()).unwrap();
        let f = feature_vector(&d, 0.1);
        let expected = [0.1, 0.2, 0.2, 0.8, 2.2026, 0.020015, 0.019246, 0.094842, 0.154842];
        for (a, b) in f.iter().zip(expected) {
            assert!((a - b).abs() < 1e-5, "{a} vs {b}");
        }
    }

    #[test]
    fn derive_errors() {
        let fixed = PkwFixed::laboratory();
        let wide = PkwSample::symmetric(0.4, 0.5, 0.05, 0.25, 0.25);
        assert!(matches!(derive(&fixed, &wide), Err(GeometryError::NonPositiveOutletWidth { .. })));
        let short = PkwSample::symmetric(0.01, 0.25, 0.02, 0.1, 0.1);
        assert!(matches!(derive(&fixed, &short), Err(GeometryError::DegenerateGeometry { .. })));
        let reversed = PkwSample::symmetric(0.4, 0.5, 0.02, 0.14, 0.20);
        assert!(matches!(derive(&fixed, &reversed), Err(GeometryError::InvalidSample(_))));
    }

    #[test]
    fn lower_bounds_are_feasible() {
        let fixed = PkwFixed::laboratory();
        let p = fixed.height;
        let s = PkwSample::symmetric(0.33 * p, 0.25, 0.015 * p, 0.03 * p, 0.03 * p);
        let report = validate(&fixed, &s);
        assert!(report.is_feasible(), "{:?}", report.violations);
    }

    #[test]
    fn reversed_widths_flagged() {
        let s = PkwSample::symmetric(0.4, 0.5, 0.02, 0.14, 0.20);
        let report = validate(&PkwFixed::laboratory(), &s);
        assert!(!report.is_feasible());
        assert!(report.violates(ConstraintId::InletWidthOrder));
        assert_eq!(ConstraintId::InletWidthOrder.to_string(), "W_i_u >= W_i_d");
    }

    #[test]
    fn upper_width_bound_flagged() {
        let fixed = PkwFixed::laboratory();
        let p = fixed.height;
        let ts = 0.18 * p;
        let wiu = fixed.unit_width() - 2.0 * ts - 0.03 * p + 0.005;
        let s = PkwSample::symmetric(0.4, 0.5, ts, wiu, 0.03 * p);
        let report = validate(&fixed, &s);
        assert!(report.violates(ConstraintId::InletWidthUpstreamMax));
    }

    #[test]
    fn all_violations_reported() {
        let s = PkwSample::symmetric(0.01, 2.0, 0.001, 0.001, 0.002);
        let report = validate(&PkwFixed::laboratory(), &s);
        let ids: Vec<_> = report.violations.iter().map(|v| v.constraint).collect();
        assert_eq!(
            ids,
            vec![
                ConstraintId::BaseLengthMin,
                ConstraintId::InletOverhangRatioMax,
                ConstraintId::WallThicknessMin,
                ConstraintId::InletWidthUpstreamMin,
                ConstraintId::InletWidthDownstreamMin,
                ConstraintId::InletWidthOrder,
            ]
        );
    }
}

//! Plan-view decomposition of the weir solid into regions with elevation
//! profiles, and closed-form volume integration over those regions.

use super::MeshError;
use crate::pkw::PkwDesign;
use serde::{Deserialize, Serialize};

/// Breakpoints closer than this are merged.
pub(crate) const X_MERGE: f64 = 1e-9;
/// Regions narrower than this everywhere are rejected.
const MIN_REGION_WIDTH: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionKind {
    InletChannel,
    OutletChannel,
    Sidewall,
    UpstreamCrestWall,
    DownstreamCrestWall,
}

/// A region occupies band `band` of the plan between streamwise stations
/// `x0` and `x1`. Band `5k + j` of unit `k` lies between plan lines
/// `5k + j` and `5k + j + 1`; see [`PlanModel::line_y`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanRegion {
    pub kind: RegionKind,
    pub unit_index: usize,
    pub band: usize,
    pub x0: f64,
    pub x1: f64,
}

/// Evaluates plan lines and elevation profiles of one design.
///
/// The five lines of unit `k` (offset `o = k W_u`) are the unit edge `o`,
/// the outlet face `o + h_o(x)`, the two inlet faces `o + W_u/2 -+ h_i(x)`
/// and the far outlet face `o + W_u - h_o(x)`. Half-widths are clamped at
/// zero: where a crest wall would be thinner than nothing the neighbouring
/// full-height walls simply merge.
#[derive(Debug, Clone)]
pub struct PlanModel {
    pub height: f64,
    pub width: f64,
    pub unit_width: f64,
    pub units: usize,
    pub length: f64,
    pub wall_thickness: f64,
    slab: f64,
    ramp: f64,
    outlet_overhang: f64,
    base_end: f64,
    tan_alpha: f64,
    inlet_half_up: f64,
    outlet_half_up: f64,
}

impl PlanModel {
    pub fn new(design: &PkwDesign) -> Self {
        let d = &design.derived;
        let s = &design.sample;
        PlanModel {
            height: design.fixed.height,
            width: design.fixed.width,
            unit_width: d.unit_width,
            units: design.fixed.units as usize,
            length: d.length,
            wall_thickness: s.wall_thickness,
            slab: s.wall_thickness,
            ramp: d.length - s.wall_thickness,
            outlet_overhang: d.outlet_overhang,
            base_end: d.outlet_overhang + s.base_length,
            tan_alpha: d.sidewall_angle.tan(),
            inlet_half_up: 0.5 * s.inlet_width_upstream,
            outlet_half_up: 0.5 * d.outlet_width_upstream,
        }
    }

    pub fn band_count(&self) -> usize {
        5 * self.units
    }

    pub fn line_count(&self) -> usize {
        5 * self.units + 1
    }

    pub fn inlet_half_width(&self, x: f64) -> f64 {
        (self.inlet_half_up - x * self.tan_alpha).max(0.0)
    }

    pub fn outlet_half_width(&self, x: f64) -> f64 {
        (self.outlet_half_up + (x - self.wall_thickness) * self.tan_alpha).max(0.0)
    }

    /// Transverse coordinate of plan line `l` at station `x`.
    pub fn line_y(&self, l: usize, x: f64) -> f64 {
        if l >= 5 * self.units {
            return self.width;
        }
        let o = (l / 5) as f64 * self.unit_width;
        let half = 0.5 * self.unit_width;
        match l % 5 {
            0 => o,
            1 => o + self.outlet_half_width(x),
            2 => o + half - self.inlet_half_width(x),
            3 => o + half + self.inlet_half_width(x),
            _ => o + self.unit_width - self.outlet_half_width(x),
        }
    }

    pub fn band_width(&self, band: usize, x: f64) -> f64 {
        self.line_y(band + 1, x) - self.line_y(band, x)
    }

    fn inlet_ramp(&self, x: f64) -> f64 {
        (self.height * x / self.ramp).clamp(0.0, self.height)
    }

    fn outlet_ramp(&self, x: f64) -> f64 {
        (self.height * (self.length - x) / self.ramp).clamp(0.0, self.height)
    }

    fn wall_bottom(&self, x: f64, branch: f64) -> f64 {
        if branch < self.outlet_overhang {
            (self.outlet_ramp(x) - self.slab).max(0.0)
        } else if branch > self.base_end {
            (self.inlet_ramp(x) - self.slab).max(0.0)
        } else {
            0.0
        }
    }

    /// Solid elevation interval `(z_lo, z_hi)` of a region kind, with the
    /// formula chosen at `branch` and evaluated at `x`. Evaluating the
    /// endpoints of a piece with the branch at its midpoint gives one-sided
    /// limits at jumps.
    pub fn interval(&self, kind: RegionKind, x: f64, branch: f64) -> (f64, f64) {
        match kind {
            RegionKind::InletChannel => {
                let hi = self.inlet_ramp(x);
                let lo = if branch > self.base_end { (hi - self.slab).max(0.0) } else { 0.0 };
                (lo, hi)
            }
            RegionKind::OutletChannel => {
                let hi = self.outlet_ramp(x);
                let lo = if branch < self.outlet_overhang { (hi - self.slab).max(0.0) } else { 0.0 };
                (lo, hi)
            }
            RegionKind::Sidewall | RegionKind::UpstreamCrestWall | RegionKind::DownstreamCrestWall => {
                (self.wall_bottom(x, branch), self.height)
            }
        }
    }

    /// Region kind occupying `band` on the piece containing `branch`.
    pub fn band_kind(&self, band: usize, branch: f64) -> RegionKind {
        match band % 5 {
            0 | 4 => {
                if branch < self.wall_thickness {
                    RegionKind::UpstreamCrestWall
                } else {
                    RegionKind::OutletChannel
                }
            }
            2 => {
                if branch > self.ramp {
                    RegionKind::DownstreamCrestWall
                } else {
                    RegionKind::InletChannel
                }
            }
            _ => RegionKind::Sidewall,
        }
    }

    pub fn band_interval(&self, band: usize, x: f64, branch: f64) -> (f64, f64) {
        self.interval(self.band_kind(band, branch), x, branch)
    }

    /// Stations where any profile or plan line changes formula, sorted,
    /// including both ends.
    pub fn breakpoints(&self) -> Vec<f64> {
        let b = self.length;
        let mut xs = vec![0.0, b, self.wall_thickness, self.ramp, self.outlet_overhang, self.base_end];
        // Slab bottoms leave the bed.
        xs.push(self.slab * self.ramp / self.height);
        xs.push(b - self.slab * self.ramp / self.height);
        if self.tan_alpha > 0.0 {
            xs.push(self.wall_thickness - self.outlet_half_up / self.tan_alpha);
            xs.push(self.inlet_half_up / self.tan_alpha);
        }
        merge_sorted(xs, 0.0, b)
    }
}

/// Sorts, clips to `[lo, hi]` and merges values closer than [`X_MERGE`].
pub(crate) fn merge_sorted(mut xs: Vec<f64>, lo: f64, hi: f64) -> Vec<f64> {
    xs.retain(|x| x.is_finite());
    for x in xs.iter_mut() {
        *x = x.clamp(lo, hi);
    }
    xs.push(lo);
    xs.push(hi);
    xs.sort_by(|a, b| a.total_cmp(b));
    let mut out: Vec<f64> = Vec::with_capacity(xs.len());
    for x in xs {
        match out.last() {
            Some(&last) if x - last < X_MERGE => {}
            _ => out.push(x),
        }
    }
    // Keep the exact upper end.
    if let Some(last) = out.last_mut() {
        if hi - *last < X_MERGE {
            *last = hi;
        }
    }
    out
}

/// Splits the plan into regions, eight per unit.
pub fn build_regions(design: &PkwDesign) -> Result<Vec<PlanRegion>, MeshError> {
    let m = PlanModel::new(design);
    let b = m.length;
    let ts = m.wall_thickness;
    let mut regions = Vec::with_capacity(8 * m.units);
    for unit in 0..m.units {
        let base = 5 * unit;
        let mut push = |kind, band: usize, x0: f64, x1: f64| {
            regions.push(PlanRegion { kind, unit_index: unit, band: base + band, x0, x1 });
        };
        push(RegionKind::UpstreamCrestWall, 0, 0.0, ts);
        push(RegionKind::OutletChannel, 0, ts, b);
        push(RegionKind::Sidewall, 1, 0.0, b);
        push(RegionKind::InletChannel, 2, 0.0, b - ts);
        push(RegionKind::DownstreamCrestWall, 2, b - ts, b);
        push(RegionKind::Sidewall, 3, 0.0, b);
        push(RegionKind::UpstreamCrestWall, 4, 0.0, ts);
        push(RegionKind::OutletChannel, 4, ts, b);
    }

    let xs = m.breakpoints();
    for r in &regions {
        let max_width = xs
            .iter()
            .filter(|&&x| x >= r.x0 && x <= r.x1)
            .map(|&x| m.band_width(r.band, x))
            .fold(f64::NEG_INFINITY, f64::max);
        let min_width = xs.iter().map(|&x| m.band_width(r.band, x)).fold(f64::INFINITY, f64::min);
        if r.x1 - r.x0 <= MIN_REGION_WIDTH || max_width <= MIN_REGION_WIDTH || min_width < -MIN_REGION_WIDTH {
            return Err(MeshError::DegenerateRegion { kind: r.kind, unit: r.unit_index });
        }
        if r.kind == RegionKind::Sidewall && min_width <= MIN_REGION_WIDTH {
            return Err(MeshError::DegenerateRegion { kind: r.kind, unit: r.unit_index });
        }
    }
    Ok(regions)
}

impl PlanRegion {
    /// Plan outline, counter-clockwise, with a vertex at every breakpoint.
    pub fn footprint(&self, model: &PlanModel) -> Vec<[f64; 2]> {
        let xs: Vec<f64> = model.breakpoints().into_iter().filter(|&x| x > self.x0 && x < self.x1).collect();
        let stations: Vec<f64> = std::iter::once(self.x0).chain(xs).chain(std::iter::once(self.x1)).collect();
        let mut poly: Vec<[f64; 2]> = stations.iter().map(|&x| [x, model.line_y(self.band, x)]).collect();
        poly.extend(stations.iter().rev().map(|&x| [x, model.line_y(self.band + 1, x)]));
        poly
    }
}

/// Solid volume by exact integration of `(z_hi - z_lo) * width` over every
/// region. Height and width are linear between breakpoints, so each piece
/// integrates in closed form.
pub fn analytic_volume(design: &PkwDesign) -> f64 {
    let m = PlanModel::new(design);
    let regions = match build_regions(design) {
        Ok(r) => r,
        Err(_) => return f64::NAN,
    };
    let xs = m.breakpoints();
    regions.iter().map(|r| region_volume(&m, r, &xs)).sum()
}

pub fn region_volume(m: &PlanModel, r: &PlanRegion, xs: &[f64]) -> f64 {
    let mut stations: Vec<f64> = xs.iter().copied().filter(|&x| x > r.x0 && x < r.x1).collect();
    stations.insert(0, r.x0);
    stations.push(r.x1);
    let mut total = 0.0;
    for w in stations.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let mid = 0.5 * (x0 + x1);
        let (lo0, hi0) = m.interval(r.kind, x0, mid);
        let (lo1, hi1) = m.interval(r.kind, x1, mid);
        let (a0, a1) = (hi0 - lo0, hi1 - lo1);
        let (b0, b1) = (m.band_width(r.band, x0), m.band_width(r.band, x1));
        total += (x1 - x0) / 6.0 * (2.0 * a0 * b0 + a0 * b1 + a1 * b0 + 2.0 * a1 * b1);
    }
    total
}

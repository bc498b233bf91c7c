//! Design-space sampling: Latin hypercube batches with grid snapping and
//! rejection, and exhaustive grid enumeration.

use crate::exec::Exec;
use crate::pkw::{limits, validate, PkwFixed, PkwSample};
use rand::seq::SliceRandom;
use crate::rng::{stream_rng, Domain};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Open01;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// Maximum number of LHS rounds in [`generate_batch`].
pub const MAX_ROUNDS: usize = 20;
/// Upper limit on the size of a single LHS round.
pub const MAX_ROUND_SIZE: usize = 1 << 20;
/// Default limit on the number of grid candidates.
pub const DEFAULT_GRID_CAP: u64 = 10_000_000;

/// Variable order used by [`DesignSpace`].
pub const VARIABLE_NAMES: [&str; 5] = ["B_b", "R_B_i", "T_s", "W_i_u", "W_i_d"];

const B_B: usize = 0;
const R_B_I: usize = 1;
const T_S: usize = 2;
const W_I_U: usize = 3;
const W_I_D: usize = 4;

// Tolerance when counting grid steps inside an interval.
const STEP_EPS: f64 = 1e-9;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum SamplerError {
    #[error("infeasible design space: found {found} of {requested} samples")]
    InfeasibleSpace { requested: usize, found: usize },
    #[error("grid has {count} candidates, above the cap of {cap}")]
    GridTooLarge { count: u64, cap: u64 },
    #[error("invalid design space: {0}")]
    InvalidSpace(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub lower: f64,
    pub upper: f64,
    pub step: f64,
}

impl Variable {
    pub fn new(lower: f64, upper: f64, step: f64) -> Self {
        Variable { lower, upper, step }
    }

    /// A variable pinned to a single value.
    pub fn fixed(value: f64) -> Self {
        Variable { lower: value, upper: value, step: 1.0 }
    }

    /// Largest grid index inside `[lower, upper]`.
    pub fn max_index(&self) -> i64 {
        self.index_limit(self.upper)
    }

    fn index_limit(&self, upper: f64) -> i64 {
        if upper < self.lower {
            return -1;
        }
        ((upper - self.lower) / self.step + STEP_EPS).floor() as i64
    }

    pub fn value(&self, index: i64) -> f64 {
        self.lower + index as f64 * self.step
    }

    /// Nearest grid index, clamped to the interval.
    pub fn snap_index(&self, v: f64) -> i64 {
        let k = ((v - self.lower) / self.step).round() as i64;
        k.clamp(0, self.max_index().max(0))
    }
}

/// Bounds and grid steps of the five sampled variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSpace {
    pub fixed: PkwFixed,
    /// Ordered as [`VARIABLE_NAMES`].
    pub variables: [Variable; 5],
    /// Outlet overhang ratio; `None` mirrors the inlet ratio.
    pub outlet_overhang_ratio: Option<f64>,
}

impl DesignSpace {
    /// Bounds at their constraint limits with a 5 mm step for lengths and a
    /// 0.05 step for the overhang ratio. The width boxes use the loosest
    /// width bound (thinnest wall); the thickness-dependent bound is left to
    /// validation.
    pub fn standard(fixed: PkwFixed) -> Self {
        Self::with_steps(fixed, [0.005, 0.05, 0.005, 0.005, 0.005])
    }

    /// The standard bounds on a coarse grid (40 mm, 0.25, 15 mm, 25 mm,
    /// 25 mm) sized for exhaustive screening: about 22,600 candidates.
    pub fn screening(fixed: PkwFixed) -> Self {
        Self::with_steps(fixed, [0.04, 0.25, 0.015, 0.025, 0.025])
    }

    pub fn with_steps(fixed: PkwFixed, steps: [f64; 5]) -> Self {
        let p = fixed.height;
        let ts_lo = limits::WALL_THICKNESS_MIN * p;
        let w_lo = limits::KEY_WIDTH_MIN * p;
        let w_hi = fixed.unit_width() - 2.0 * ts_lo - w_lo;
        DesignSpace {
            fixed,
            variables: [
                Variable::new(limits::BASE_LENGTH_MIN * p, limits::BASE_LENGTH_MAX * p, steps[0]),
                Variable::new(limits::OVERHANG_RATIO_MIN, limits::OVERHANG_RATIO_MAX, steps[1]),
                Variable::new(ts_lo, limits::WALL_THICKNESS_MAX * p, steps[2]),
                Variable::new(w_lo, w_hi, steps[3]),
                Variable::new(w_lo, w_hi, steps[4]),
            ],
            outlet_overhang_ratio: None,
        }
    }

    pub fn check(&self) -> Result<(), SamplerError> {
        for (name, v) in VARIABLE_NAMES.iter().zip(&self.variables) {
            if !(v.lower.is_finite() && v.upper.is_finite()) {
                return Err(SamplerError::InvalidSpace(format!("{name}: non-finite bound")));
            }
            if !(v.step > 0.0) {
                return Err(SamplerError::InvalidSpace(format!("{name}: step must be positive")));
            }
        }
        Ok(())
    }

    fn is_empty(&self) -> bool {
        self.variables.iter().any(|v| v.upper < v.lower)
    }

    fn sample_from(&self, v: [f64; 5]) -> PkwSample {
        PkwSample {
            base_length: v[B_B],
            inlet_overhang_ratio: v[R_B_I],
            outlet_overhang_ratio: self.outlet_overhang_ratio.unwrap_or(v[R_B_I]),
            wall_thickness: v[T_S],
            inlet_width_upstream: v[W_I_U],
            inlet_width_downstream: v[W_I_D],
        }
    }

    fn values_of(sample: &PkwSample) -> [f64; 5] {
        [
            sample.base_length,
            sample.inlet_overhang_ratio,
            sample.wall_thickness,
            sample.inlet_width_upstream,
            sample.inlet_width_downstream,
        ]
    }

    /// Grid indices of the nearest grid point.
    pub fn grid_index(&self, sample: &PkwSample) -> [i64; 5] {
        let v = Self::values_of(sample);
        std::array::from_fn(|k| self.variables[k].snap_index(v[k]))
    }

    pub fn sample_at(&self, index: [i64; 5]) -> PkwSample {
        self.sample_from(std::array::from_fn(|k| self.variables[k].value(index[k])))
    }

    // Width index limit for a given wall thickness: the constraint bound on
    // key widths tightens as the wall thickens.
    fn width_limit(&self, var: usize, thickness: f64) -> i64 {
        let p = self.fixed.height;
        let bound = self.fixed.unit_width() - 2.0 * thickness - limits::KEY_WIDTH_MIN * p;
        let v = &self.variables[var];
        v.index_limit(v.upper.min(bound + crate::pkw::BOUND_SLACK))
    }
}

/// Snaps each variable to the nearest grid point of `space`.
pub fn discretize(sample: &PkwSample, space: &DesignSpace) -> PkwSample {
    space.sample_at(space.grid_index(sample))
}

fn lhs_with_rng(space: &DesignSpace, n: usize, rng: &mut ChaCha8Rng) -> Vec<PkwSample> {
    let mut columns = [(); 5].map(|_| Vec::with_capacity(n));
    let mut perm: Vec<usize> = (0..n).collect();
    for (k, var) in space.variables.iter().enumerate() {
        perm.shuffle(rng);
        let width = var.upper - var.lower;
        for &bin in &perm {
            let u: f64 = rng.sample(Open01);
            columns[k].push(var.lower + width * (bin as f64 + u) / n as f64);
        }
    }
    (0..n)
        .map(|j| space.sample_from(std::array::from_fn(|k| columns[k][j])))
        .collect()
}

fn round_rng(seed: u64, round: u64) -> ChaCha8Rng {
    stream_rng(seed, Domain::SampleRound, round)
}

/// Draws `n` continuous Latin hypercube samples over the box of `space`.
pub fn lhs_raw(space: &DesignSpace, n: usize, seed: u64) -> Vec<PkwSample> {
    lhs_with_rng(space, n, &mut round_rng(seed, 0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub seed: u64,
    pub requested: usize,
    pub samples: Vec<PkwSample>,
    /// Unique candidates that failed validation before the batch filled.
    pub rejected_count: usize,
    /// Candidates dropped because they snapped onto an earlier grid point.
    pub duplicate_count: usize,
    pub rounds: usize,
}

/// Collects `n_target` feasible, unique, grid-snapped samples.
///
/// Round `r` draws `2 n_target 2^r` LHS candidates from its own random
/// stream. Candidates are validated with `exec` and consumed in draw order,
/// so the result does not depend on the execution mode.
pub fn generate_batch(space: &DesignSpace, n_target: usize, seed: u64, exec: Exec) -> Result<SampleBatch, SamplerError> {
    space.check()?;
    if n_target == 0 {
        return Err(SamplerError::InvalidSpace("n_target must be at least 1".into()));
    }
    if space.is_empty() {
        return Err(SamplerError::InfeasibleSpace { requested: n_target, found: 0 });
    }
    let mut seen = HashSet::new();
    let mut batch = SampleBatch {
        seed,
        requested: n_target,
        samples: Vec::with_capacity(n_target),
        rejected_count: 0,
        duplicate_count: 0,
        rounds: 0,
    };
    for round in 0..MAX_ROUNDS {
        batch.rounds = round + 1;
        let size = (2 * n_target).saturating_mul(1 << round).min(MAX_ROUND_SIZE);
        let raw = lhs_with_rng(space, size, &mut round_rng(seed, round as u64));
        let mut fresh = Vec::with_capacity(size);
        for s in &raw {
            let key = space.grid_index(s);
            if seen.insert(key) {
                fresh.push(space.sample_at(key));
            } else {
                batch.duplicate_count += 1;
            }
        }
        let feasible = exec.map(&fresh, |s| validate(&space.fixed, s).is_feasible());
        for (s, ok) in fresh.into_iter().zip(feasible) {
            if ok {
                batch.samples.push(s);
                if batch.samples.len() == n_target {
                    return Ok(batch);
                }
            } else {
                batch.rejected_count += 1;
            }
        }
    }
    Err(SamplerError::InfeasibleSpace { requested: n_target, found: batch.samples.len() })
}

/// Lexicographic walk over all grid points of a space. The key-width
/// indices stop at the wall-thickness dependent width bound.
#[derive(Debug, Clone)]
pub struct GridIter<'a> {
    space: &'a DesignSpace,
    index: [i64; 5],
    limits: [i64; 5],
    done: bool,
}

impl<'a> GridIter<'a> {
    fn new(space: &'a DesignSpace) -> Self {
        let mut it = GridIter { space, index: [0; 5], limits: [0; 5], done: false };
        for k in 0..3 {
            it.limits[k] = space.variables[k].max_index();
        }
        it.refresh_widths();
        it.done = it.limits[..3].iter().any(|&l| l < 0);
        if !it.done && (it.limits[W_I_U] < 0 || it.limits[W_I_D] < 0) {
            it.done = !it.advance_outer();
        }
        it
    }

    fn refresh_widths(&mut self) {
        let ts = self.space.variables[T_S].value(self.index[T_S]);
        self.limits[W_I_U] = self.space.width_limit(W_I_U, ts);
        self.limits[W_I_D] = self.space.width_limit(W_I_D, ts);
    }

    // Moves to the next (B_b, R, T_s) triple with a nonempty width grid.
    fn advance_outer(&mut self) -> bool {
        loop {
            let mut k = T_S as isize;
            loop {
                if k < 0 {
                    return false;
                }
                let ku = k as usize;
                if self.index[ku] < self.limits[ku] {
                    self.index[ku] += 1;
                    for j in ku + 1..5 {
                        self.index[j] = 0;
                    }
                    break;
                }
                k -= 1;
            }
            self.refresh_widths();
            if self.limits[W_I_U] >= 0 && self.limits[W_I_D] >= 0 {
                return true;
            }
        }
    }

    fn advance(&mut self) -> bool {
        if self.index[W_I_D] < self.limits[W_I_D] {
            self.index[W_I_D] += 1;
            return true;
        }
        if self.index[W_I_U] < self.limits[W_I_U] {
            self.index[W_I_U] += 1;
            self.index[W_I_D] = 0;
            return true;
        }
        self.advance_outer()
    }
}

impl Iterator for GridIter<'_> {
    type Item = PkwSample;

    fn next(&mut self) -> Option<PkwSample> {
        if self.done {
            return None;
        }
        let s = self.space.sample_at(self.index);
        self.done = !self.advance();
        Some(s)
    }
}

/// Number of grid candidates visited by [`enumerate_grid`].
pub fn grid_candidate_count(space: &DesignSpace) -> u64 {
    let count = |v: &Variable| (v.max_index() + 1).max(0) as u64;
    let outer = count(&space.variables[B_B]) * count(&space.variables[R_B_I]);
    let ts = &space.variables[T_S];
    let widths: u64 = (0..=ts.max_index())
        .map(|k| {
            let t = ts.value(k);
            let nu = (space.width_limit(W_I_U, t) + 1).max(0) as u64;
            let nd = (space.width_limit(W_I_D, t) + 1).max(0) as u64;
            nu * nd
        })
        .sum();
    outer * widths
}

/// Every feasible grid point in lexicographic variable order.
pub fn enumerate_grid(space: &DesignSpace, cap: u64) -> Result<impl Iterator<Item = PkwSample> + '_, SamplerError> {
    space.check()?;
    let count = grid_candidate_count(space);
    if count > cap {
        return Err(SamplerError::GridTooLarge { count, cap });
    }
    Ok(GridIter::new(space).filter(move |s| validate(&space.fixed, s).is_feasible()))
}

/// Candidate and feasible counts of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub candidates: u64,
    pub feasible: u64,
}

impl GridSummary {
    pub fn feasibility_ratio(&self) -> f64 {
        self.feasible as f64 / self.candidates as f64
    }
}

pub fn grid_summary(space: &DesignSpace, cap: u64, exec: Exec) -> Result<GridSummary, SamplerError> {
    space.check()?;
    let candidates = grid_candidate_count(space);
    if candidates > cap {
        return Err(SamplerError::GridTooLarge { count: candidates, cap });
    }
    let all: Vec<PkwSample> = GridIter::new(space).collect();
    let feasible = exec.map(&all, |s| validate(&space.fixed, s).is_feasible()).into_iter().filter(|&f| f).count();
    Ok(GridSummary { candidates, feasible: feasible as u64 })
}

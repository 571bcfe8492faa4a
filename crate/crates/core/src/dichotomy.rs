//! The case dichotomy and the decreasing-color induction driver.
//!
//! A round starts from a stabilized run at squared lengths: `C_1` is the
//! stabilized grid itself (level t based at `b_t`), `C_2` the same grid
//! translated to base zero. The round then splits on whether the coloring
//! meets the run's color `γ` on sums of the stabilized strides:
//!
//! * **Case 1** — there are `R` pairwise-ordered blocks of stride indices
//!   whose weighted sums all take color `γ`. The sums become the diffs of a
//!   depth-`R` grid with the unsquared lengths, each level embedded in a
//!   level of `C_1`, and together they form the d-set of the final witness
//!   shape.
//! * **Case 2** — no such family exists within budget. The strides regroup
//!   greedily into a new schedule satisfying the gap condition, based at a
//!   stride `b = d*_p` chosen beyond every γ-hit; the audited prefix of the
//!   regrouped span then avoids `γ` entirely, so the coloring restricted to
//!   it uses one color fewer and the driver recurses with `γ` forbidden.
//!
//! Every emission is gated: a Case-1 witness must re-verify (colors,
//! containment) and a Case-2 witness must pass the prefix audit before
//! either is returned. A γ-hit found during the audit is not a failure; it
//! decomposes into a block, joins the search pool, and the round retries,
//! which realizes the paper-style argument that an excursion into the new
//! span yields the missing Case-1 block.

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coloring::{Color, Coloring, ColoringError};
use crate::construct::{self, ConstructError, DiffMode, InfinitaryWitness};
use crate::grid::{GridError, GridTriple};
use crate::verify::{self, Verdict};
use crate::windows::{WindowError, WindowPlan};

#[derive(Debug, Error)]
pub enum DichotomyError {
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error(transparent)]
    Coloring(#[from] ColoringError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Window(#[from] WindowError),
    #[error("stride index {needed} exceeds the {available} available")]
    IndexExhausted { needed: usize, available: usize },
    #[error("length schedule never reaches window {window}")]
    ScheduleBounded { window: u64 },
    #[error("{0}")]
    Spec(String),
    #[error("internal check failed: {0}")]
    Internal(String),
}

impl DichotomyError {
    /// Whether the error reports an exhausted search budget rather than a
    /// malformed input or a broken invariant. Budget-shaped errors turn
    /// into inconclusive driver outcomes instead of propagating.
    pub fn is_budget(&self) -> bool {
        match self {
            DichotomyError::IndexExhausted { .. } | DichotomyError::ScheduleBounded { .. } => true,
            DichotomyError::Window(w) => is_budget_window(w),
            DichotomyError::Construct(e) => match e {
                ConstructError::WindowExhausted { .. }
                | ConstructError::StabilizationFailed { .. } => true,
                ConstructError::Window(w) => is_budget_window(w),
                _ => false,
            },
            _ => false,
        }
    }
}

fn is_budget_window(w: &WindowError) -> bool {
    matches!(
        w,
        WindowError::BudgetExceeded { .. } | WindowError::PlanExhausted { .. }
    )
}

/// The nondecreasing progression-length schedule `k_1 <= k_2 <= ...`,
/// either affine or an explicit head followed by an affine tail.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LengthSchedule {
    /// `k_i = slope*i + offset`.
    Affine { slope: u64, offset: u64 },
    /// `k_i = head[i-1]` while it lasts, then `slope*i + offset`.
    ListThenAffine {
        head: Vec<u64>,
        slope: u64,
        offset: u64,
    },
}

impl LengthSchedule {
    /// Parses `affine:a,b` or `list:v1,..,vq:affine:a,b` and validates the
    /// result.
    pub fn parse(s: &str) -> Result<Self, DichotomyError> {
        let bad = || DichotomyError::Spec(format!("unrecognized length schedule {s:?}"));
        let schedule = if let Some(rest) = s.strip_prefix("affine:") {
            let (slope, offset) = parse_pair(rest).ok_or_else(bad)?;
            LengthSchedule::Affine { slope, offset }
        } else if let Some(rest) = s.strip_prefix("list:") {
            let (head, tail) = rest.split_once(":affine:").ok_or_else(bad)?;
            let head = head
                .split(',')
                .map(|t| t.parse::<u64>().ok())
                .collect::<Option<Vec<_>>>()
                .ok_or_else(bad)?;
            let (slope, offset) = parse_pair(tail).ok_or_else(bad)?;
            LengthSchedule::ListThenAffine { head, slope, offset }
        } else {
            return Err(bad());
        };
        schedule.validate()?;
        Ok(schedule)
    }

    pub fn validate(&self) -> Result<(), DichotomyError> {
        let fail = |msg: &str| Err(DichotomyError::Spec(msg.into()));
        match self {
            LengthSchedule::Affine { .. } => {
                if self.k(1) < 2 {
                    return fail("length schedule must start at 2 or more");
                }
            }
            LengthSchedule::ListThenAffine { head, .. } => {
                if head.is_empty() {
                    return fail("length schedule head must be nonempty");
                }
                if head.iter().any(|&k| k < 2) {
                    return fail("lengths must be at least 2");
                }
                if head.windows(2).any(|p| p[0] > p[1]) {
                    return fail("lengths must be nondecreasing");
                }
                if self.k(head.len() + 1) < *head.last().unwrap() {
                    return fail("affine tail must not drop below the head");
                }
            }
        }
        Ok(())
    }

    /// The length at 1-based index `i`.
    pub fn k(&self, i: usize) -> u64 {
        let affine = |slope: u64, offset: u64| slope.saturating_mul(i as u64).saturating_add(offset);
        match self {
            LengthSchedule::Affine { slope, offset } => affine(*slope, *offset),
            LengthSchedule::ListThenAffine { head, slope, offset } => {
                if i <= head.len() {
                    head[i - 1]
                } else {
                    affine(*slope, *offset)
                }
            }
        }
    }

    /// The squared lengths `k_1^2 .. k_horizon^2` a base run searches at.
    pub fn squared(&self, horizon: usize) -> Result<Vec<u64>, DichotomyError> {
        (1..=horizon)
            .map(|i| {
                let k = self.k(i);
                k.checked_mul(k)
                    .ok_or_else(|| DichotomyError::Spec(format!("squared length k_{i} overflows")))
            })
            .collect()
    }

    /// The least index whose length reaches `w`, if any; `None` exactly
    /// when the schedule is bounded below `w`.
    pub fn first_at_least(&self, w: u64) -> Option<usize> {
        match self {
            LengthSchedule::Affine { slope, offset } => affine_first(*slope, *offset, 1, w),
            LengthSchedule::ListThenAffine { head, slope, offset } => {
                if let Some(pos) = head.iter().position(|&k| k >= w) {
                    return Some(pos + 1);
                }
                affine_first(*slope, *offset, head.len() as u64 + 1, w)
            }
        }
    }

    /// Whether the schedule grows without bound.
    pub fn is_unbounded(&self) -> bool {
        match self {
            LengthSchedule::Affine { slope, .. } => *slope >= 1,
            LengthSchedule::ListThenAffine { slope, .. } => *slope >= 1,
        }
    }
}

fn parse_pair(s: &str) -> Option<(u64, u64)> {
    let (a, b) = s.split_once(',')?;
    Some((a.parse().ok()?, b.parse().ok()?))
}

fn affine_first(slope: u64, offset: u64, lo: u64, w: u64) -> Option<usize> {
    if slope.saturating_mul(lo).saturating_add(offset) >= w {
        return Some(lo as usize);
    }
    if slope == 0 {
        return None;
    }
    let need = w - offset;
    Some((need.div_ceil(slope)) as usize)
}

/// Finite caps for one dichotomy round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budgets {
    /// Stabilization depth r: how many coherent strides the base run needs.
    #[serde(with = "crate::dec::u64_str")]
    pub depth: u64,
    /// Horizon M >= r of descriptor depths to generate before stabilizing.
    #[serde(with = "crate::dec::u64_str")]
    pub horizon: u64,
    /// Blocks R demanded of a Case-1 family.
    #[serde(with = "crate::dec::u64_str")]
    pub blocks: u64,
    /// Largest stride index H the block search may use (at most r).
    #[serde(with = "crate::dec::u64_str")]
    pub block_horizon: u64,
    /// Largest number of indices in one block.
    #[serde(with = "crate::dec::u64_str")]
    pub block_size: u64,
    /// Levels to re-enumerate when gating an emission.
    #[serde(with = "crate::dec::u64_str")]
    pub verify_depth: u64,
}

impl Budgets {
    pub fn validate(&self) -> Result<(), DichotomyError> {
        let fail = |msg: &str| Err(DichotomyError::Spec(msg.into()));
        if self.depth < 1 {
            return fail("depth must be at least 1");
        }
        if self.horizon < self.depth {
            return fail("horizon must be at least the depth");
        }
        if self.block_horizon < 1 || self.block_horizon > self.depth {
            return fail("block horizon must lie between 1 and the depth");
        }
        if self.blocks < 1 || self.blocks > self.block_horizon {
            return fail("block count must lie between 1 and the block horizon");
        }
        if self.block_size < 1 {
            return fail("block size must be at least 1");
        }
        if self.verify_depth < 1 {
            return fail("verify depth must be at least 1");
        }
        Ok(())
    }

    /// Budgets for the round below a Case-2 witness of the given depth:
    /// everything clamps to the shallower structure.
    fn for_next_round(&self, depth: u64) -> Budgets {
        let d = self.depth.min(depth).max(1);
        let h = self.block_horizon.min(d);
        Budgets {
            depth: d,
            horizon: d,
            blocks: self.blocks.min(h),
            block_horizon: h,
            block_size: self.block_size,
            verify_depth: self.verify_depth.min(d),
        }
    }
}

/// One d-set generator: stride indices (1-based, strictly increasing) with
/// positive coefficients; its sum is `Σ coeffs[i] * d*_{indices[i]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    #[serde(with = "crate::dec::u64_vec")]
    pub indices: Vec<u64>,
    #[serde(with = "crate::dec::u64_vec")]
    pub coeffs: Vec<u64>,
}

impl Block {
    pub fn min_index(&self) -> u64 {
        self.indices.first().copied().unwrap_or(0)
    }

    pub fn max_index(&self) -> u64 {
        self.indices.last().copied().unwrap_or(0)
    }

    pub fn sum(&self, dstar: &[BigUint]) -> Result<BigUint, DichotomyError> {
        let mut total = BigUint::zero();
        for (&u, &x) in self.indices.iter().zip(&self.coeffs) {
            let d = dstar
                .get(u as usize - 1)
                .ok_or(DichotomyError::IndexExhausted {
                    needed: u as usize,
                    available: dstar.len(),
                })?;
            total += d * x;
        }
        Ok(total)
    }

    /// Shape checks plus the coefficient law `x_u <= k_u - 1`, which keeps
    /// any position the block can take in an ordered family embeddable.
    pub fn validate(&self, schedule: &LengthSchedule) -> Result<(), DichotomyError> {
        let fail = |msg: String| Err(DichotomyError::Spec(msg));
        if self.indices.is_empty() || self.indices.len() != self.coeffs.len() {
            return fail("block needs equally many indices and coefficients".into());
        }
        if self.indices[0] < 1 || self.indices.windows(2).any(|p| p[0] >= p[1]) {
            return fail("block indices must be strictly increasing from 1".into());
        }
        for (&u, &x) in self.indices.iter().zip(&self.coeffs) {
            let cap = schedule.k(u as usize) - 1;
            if x < 1 || x > cap {
                return fail(format!("coefficient {x} at index {u} outside 1..={cap}"));
            }
        }
        Ok(())
    }
}

/// Pairwise-ordered blocks: every index of block t+1 exceeds every index of
/// block t, which makes the t-th least index at least t automatically.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockFamily {
    pub blocks: Vec<Block>,
}

impl BlockFamily {
    pub fn validate(&self, schedule: &LengthSchedule) -> Result<(), DichotomyError> {
        if self.blocks.is_empty() {
            return Err(DichotomyError::Spec("family must be nonempty".into()));
        }
        for b in &self.blocks {
            b.validate(schedule)?;
        }
        for pair in self.blocks.windows(2) {
            if pair[1].min_index() <= pair[0].max_index() {
                return Err(DichotomyError::Spec(
                    "family blocks must be pairwise ordered".into(),
                ));
            }
        }
        Ok(())
    }
}

/// A Case-1 emission: a γ-monochromatic grid at the unsquared lengths whose
/// diffs are exactly the block sums (the d-set), each level contained in
/// the recorded level of the base grid.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Case1Witness {
    pub triple: GridTriple,
    #[serde(with = "crate::dec::big_vec")]
    pub dset: Vec<BigUint>,
    pub color: Color,
    pub family: BlockFamily,
    #[serde(with = "crate::dec::u64_vec")]
    pub parent_levels: Vec<u64>,
}

/// One greedy step of the stride regrouping.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Case2Step {
    /// How many strides beyond the first were summed (t_i).
    #[serde(with = "crate::dec::u64_str")]
    pub skip: u64,
    /// Index m_i where the regrouped stride starts.
    #[serde(with = "crate::dec::u64_str")]
    pub index: u64,
    /// The regrouped stride `l*_i = d*_{m_i} + .. + d*_{m_i + t_i}`.
    #[serde(with = "crate::dec::big")]
    pub stride: BigUint,
    /// Schedule length `k_{m_i}` at the start index; at least the window.
    #[serde(with = "crate::dec::u64_str")]
    pub length: u64,
}

/// A Case-2 emission: a translated span whose audited prefix avoids the
/// forbidden color, ready to seed the next round.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Case2Witness {
    #[serde(with = "crate::dec::big")]
    pub base: BigUint,
    #[serde(with = "crate::dec::big_vec")]
    pub newdiffs: Vec<BigUint>,
    #[serde(with = "crate::dec::u64_vec")]
    pub windows: Vec<u64>,
    pub forbidden: Color,
    #[serde(with = "crate::dec::u64_str")]
    pub start_index: u64,
    pub trace: Vec<Case2Step>,
}

impl Case2Witness {
    pub fn depth(&self) -> usize {
        self.newdiffs.len()
    }
}

/// What one dichotomy round concluded.
#[derive(Clone, Debug)]
pub enum DichotomyOutcome {
    Case1(Case1Witness),
    Case2(Case2Witness),
    Inconclusive { reason: String },
}

/// The stabilized squared-length run a round works from. `C_1` is the
/// witness triple itself; `c2` is its translate to base zero.
#[derive(Clone, Debug)]
pub struct BaseRun {
    pub witness: InfinitaryWitness,
    pub c2: GridTriple,
}

/// Stabilizes a run at the squared schedule. Certified window plans are
/// resolved here against the caller's effective palette (colors already
/// forbidden by outer rounds do not count), then trusted downstream.
#[allow(clippy::too_many_arguments)]
pub fn run_base(
    oracle: &dyn Coloring,
    base: &BigUint,
    palette: u32,
    schedule: &LengthSchedule,
    plan: &WindowPlan,
    diff_mode: &DiffMode,
    depth: usize,
    horizon: usize,
) -> Result<BaseRun, DichotomyError> {
    schedule.validate()?;
    let squared = schedule.squared(horizon)?;
    let plan = match plan {
        WindowPlan::Certified { .. } => {
            WindowPlan::Assumed(construct::resolve_windows(plan, &squared, palette)?)
        }
        other => other.clone(),
    };
    let witness = construct::infinitary_vdw(oracle, base, diff_mode, &plan, &squared, depth, horizon)?;
    let c2 = GridTriple::new(
        vec![BigUint::zero(); depth],
        witness.triple.diffs.clone(),
        witness.triple.lengths.clone(),
    )?;
    Ok(BaseRun { witness, c2 })
}

/// Visits every block over indices `lo..=horizon` of at most `max_size`
/// indices, candidate index sets ordered by (max index, lexicographic) and
/// coefficients by an odometer with the last coordinate fastest. The
/// visitor returns true to stop.
fn for_each_block(
    dstar: &[BigUint],
    schedule: &LengthSchedule,
    lo: usize,
    horizon: usize,
    max_size: usize,
    visit: &mut impl FnMut(&[u64], &[u64], &BigUint) -> Result<bool, DichotomyError>,
) -> Result<bool, DichotomyError> {
    let horizon = horizon.min(dstar.len());
    let mut prefix = Vec::new();
    for m in lo..=horizon {
        if extend_block(dstar, schedule, &mut prefix, lo, m, max_size, visit)? {
            return Ok(true);
        }
    }
    Ok(false)
}

fn extend_block(
    dstar: &[BigUint],
    schedule: &LengthSchedule,
    prefix: &mut Vec<usize>,
    next: usize,
    m: usize,
    max_size: usize,
    visit: &mut impl FnMut(&[u64], &[u64], &BigUint) -> Result<bool, DichotomyError>,
) -> Result<bool, DichotomyError> {
    if prefix.len() + 1 == max_size {
        prefix.push(m);
        let stop = emit_coefficients(dstar, schedule, prefix, visit)?;
        prefix.pop();
        return Ok(stop);
    }
    for e in next..=m {
        let stop = if e == m {
            prefix.push(m);
            let stop = emit_coefficients(dstar, schedule, prefix, visit)?;
            prefix.pop();
            stop
        } else {
            prefix.push(e);
            let stop = extend_block(dstar, schedule, prefix, e + 1, m, max_size, visit)?;
            prefix.pop();
            stop
        };
        if stop {
            return Ok(true);
        }
    }
    Ok(false)
}

fn emit_coefficients(
    dstar: &[BigUint],
    schedule: &LengthSchedule,
    indices: &[usize],
    visit: &mut impl FnMut(&[u64], &[u64], &BigUint) -> Result<bool, DichotomyError>,
) -> Result<bool, DichotomyError> {
    let idx: Vec<u64> = indices.iter().map(|&u| u as u64).collect();
    let caps: Vec<u64> = indices.iter().map(|&u| schedule.k(u) - 1).collect();
    let mut coeffs = vec![1u64; indices.len()];
    loop {
        let mut sum = BigUint::zero();
        for (&u, &x) in indices.iter().zip(&coeffs) {
            sum += &dstar[u - 1] * x;
        }
        if visit(&idx, &coeffs, &sum)? {
            return Ok(true);
        }
        let mut t = indices.len();
        loop {
            if t == 0 {
                return Ok(false);
            }
            t -= 1;
            if coeffs[t] < caps[t] {
                coeffs[t] += 1;
                break;
            }
            coeffs[t] = 1;
        }
        // A full carry past the first coordinate ends the odometer.
        if t == 0 && coeffs[0] == 1 {
            return Ok(false);
        }
    }
}

/// Greedily collects `count` pairwise-ordered blocks with sums of the
/// target color. Taking, within each range, the hit whose max index is
/// least leaves maximal room above, so the greedy finds a family whenever
/// one exists over the same horizon and size caps.
pub fn case1_search(
    oracle: &dyn Coloring,
    dstar: &[BigUint],
    schedule: &LengthSchedule,
    target: Color,
    count: usize,
    horizon: usize,
    max_size: usize,
) -> Result<Option<BlockFamily>, DichotomyError> {
    let mut blocks = Vec::with_capacity(count);
    let mut lo = 1usize;
    for _ in 0..count {
        let mut hit: Option<Block> = None;
        for_each_block(dstar, schedule, lo, horizon, max_size, &mut |idx, co, sum| {
            if oracle.color_of(sum)? == target {
                hit = Some(Block {
                    indices: idx.to_vec(),
                    coeffs: co.to_vec(),
                });
                return Ok(true);
            }
            Ok(false)
        })?;
        match hit {
            Some(b) => {
                lo = b.max_index() as usize + 1;
                blocks.push(b);
            }
            None => return Ok(None),
        }
    }
    Ok(Some(BlockFamily { blocks }))
}

/// The Case-2 start index: one past the largest least-index over all
/// γ-colored blocks in scope (searched up to the horizon and size caps,
/// plus any blocks already discovered), or 1 when no block hits.
fn scan_start_index(
    oracle: &dyn Coloring,
    dstar: &[BigUint],
    schedule: &LengthSchedule,
    target: Color,
    horizon: usize,
    max_size: usize,
    discovered: &[Block],
) -> Result<usize, DichotomyError> {
    let mut best: Option<u64> = None;
    for_each_block(dstar, schedule, 1, horizon, max_size, &mut |idx, _, sum| {
        if oracle.color_of(sum)? == target {
            best = Some(best.map_or(idx[0], |b| b.max(idx[0])));
        }
        Ok(false)
    })?;
    for b in discovered {
        best = Some(best.map_or(b.min_index(), |v| v.max(b.min_index())));
    }
    Ok(best.map_or(1, |m| m as usize + 1))
}

/// Assembles an ordered family into the Case-1 witness: block sums become
/// diffs, each level is based where its block's top index lives in the
/// base grid, and lengths drop back to the unsquared schedule.
pub fn case1_assemble(
    oracle: &dyn Coloring,
    family: &BlockFamily,
    base_run: &BaseRun,
    schedule: &LengthSchedule,
) -> Result<Case1Witness, DichotomyError> {
    family.validate(schedule)?;
    let c1 = &base_run.witness.triple;
    let color = base_run.witness.color;
    let mut bases = Vec::with_capacity(family.blocks.len());
    let mut diffs = Vec::with_capacity(family.blocks.len());
    let mut lengths = Vec::with_capacity(family.blocks.len());
    let mut parents = Vec::with_capacity(family.blocks.len());
    for (j, block) in family.blocks.iter().enumerate() {
        let k_j = schedule.k(j + 1);
        for (&u, &x) in block.indices.iter().zip(&block.coeffs) {
            let u = u as usize;
            if u > c1.depth() {
                return Err(DichotomyError::IndexExhausted {
                    needed: u,
                    available: c1.depth(),
                });
            }
            // Level-j coordinates scale block coefficients by at most
            // k_j - 1, which must stay within the squared ambient bound.
            if (k_j - 1) * x > c1.lengths[u - 1] - 1 {
                return Err(DichotomyError::Internal(format!(
                    "coefficient {x} at index {u} escapes the ambient bound"
                )));
            }
        }
        let m_j = block.max_index() as usize;
        bases.push(c1.bases[m_j - 1].clone());
        diffs.push(block.sum(&c1.diffs)?);
        lengths.push(k_j);
        parents.push(m_j as u64);
    }
    let dset = diffs.clone();
    let triple = GridTriple::new(bases, diffs, lengths)?;
    for d in &dset {
        if oracle.color_of(d)? != color {
            return Err(DichotomyError::Internal(format!(
                "d-set element {d} lost the target color"
            )));
        }
    }
    Ok(Case1Witness {
        triple,
        dset,
        color,
        family: family.clone(),
        parent_levels: parents,
    })
}

/// Regroups the stabilized strides into a new schedule obeying the gap
/// condition: level i starts at the least admissible index `m_i` (past the
/// previous regrouping and where the length schedule first reaches the
/// window) and sums just enough consecutive strides to clear the reach of
/// the levels below.
pub fn case2_construct(
    dstar: &[BigUint],
    schedule: &LengthSchedule,
    windows: &[u64],
    start_index: usize,
    depth: usize,
    forbidden: Color,
) -> Result<Case2Witness, DichotomyError> {
    if depth == 0 {
        return Err(DichotomyError::Spec("depth must be at least 1".into()));
    }
    if windows.len() < depth {
        return Err(DichotomyError::Spec(format!(
            "need {depth} windows, got {}",
            windows.len()
        )));
    }
    if start_index < 1 || start_index > dstar.len() {
        return Err(DichotomyError::IndexExhausted {
            needed: start_index,
            available: dstar.len(),
        });
    }
    let base = dstar[start_index - 1].clone();
    let mut trace = Vec::with_capacity(depth);
    let mut newdiffs = Vec::with_capacity(depth);
    let mut reach = BigUint::zero();
    let mut prev_end = start_index;
    for i in 1..=depth {
        let w = windows[i - 1];
        let by_schedule = schedule
            .first_at_least(w)
            .ok_or(DichotomyError::ScheduleBounded { window: w })?;
        let m = by_schedule.max(prev_end + 1);
        let mut skip = 0usize;
        let mut stride = BigUint::zero();
        loop {
            let idx = m + skip;
            if idx > dstar.len() {
                return Err(DichotomyError::IndexExhausted {
                    needed: idx,
                    available: dstar.len(),
                });
            }
            stride += &dstar[idx - 1];
            if stride > reach {
                break;
            }
            skip += 1;
        }
        reach += &stride * (w - 1);
        trace.push(Case2Step {
            skip: skip as u64,
            index: m as u64,
            stride: stride.clone(),
            length: schedule.k(m),
        });
        newdiffs.push(stride);
        prev_end = m + skip;
    }
    Ok(Case2Witness {
        base,
        newdiffs,
        windows: windows[..depth].to_vec(),
        forbidden,
        start_index: start_index as u64,
        trace,
    })
}

/// Splits a prefix-audit counterexample back into the block whose sum it
/// is: the base contributes the start index with coefficient 1, and each
/// regrouped stride used y_i > 0 times contributes its index range with
/// coefficient y_i. Unique because the regrouped strides obey a strict gap
/// condition.
fn decompose_excursion(element: &BigUint, w: &Case2Witness) -> Option<Block> {
    let coords = |x: &BigUint| -> Option<Vec<u64>> {
        let mut rem = x.clone();
        let mut ys = vec![0u64; w.depth()];
        for i in (0..w.depth()).rev() {
            let cap = w.windows[i] - 1;
            let y = u64::try_from(&rem / &w.newdiffs[i]).ok()?;
            if y > cap {
                return None;
            }
            rem -= &w.newdiffs[i] * y;
            ys[i] = y;
        }
        rem.is_zero().then_some(ys)
    };
    let (delta, ys) = if *element >= w.base {
        match coords(&(element - &w.base)) {
            Some(ys) => (true, ys),
            None => (false, coords(element)?),
        }
    } else {
        (false, coords(element)?)
    };
    let mut indices = Vec::new();
    let mut coeffs = Vec::new();
    if delta {
        indices.push(w.start_index);
        coeffs.push(1);
    }
    for (step, &y) in w.trace.iter().zip(&ys) {
        if y > 0 {
            for u in step.index..=step.index + step.skip {
                indices.push(u);
                coeffs.push(y);
            }
        }
    }
    if indices.is_empty() {
        return None;
    }
    Some(Block { indices, coeffs })
}

/// Selects an ordered subfamily of the discovered blocks, preferring small
/// max indices; returns it only when `count` blocks fit.
fn family_from_known(discovered: &[Block], count: usize) -> Option<BlockFamily> {
    let mut pool: Vec<&Block> = discovered.iter().collect();
    pool.sort_by_key(|b| (b.max_index(), b.min_index()));
    pool.dedup();
    let mut blocks: Vec<Block> = Vec::new();
    for b in pool {
        if blocks.last().is_none_or(|p| b.min_index() > p.max_index()) {
            blocks.push(b.clone());
            if blocks.len() == count {
                return Some(BlockFamily { blocks });
            }
        }
    }
    None
}

fn gate_case1(
    oracle: &dyn Coloring,
    witness: &Case1Witness,
    base_run: &BaseRun,
    verify_depth: usize,
) -> Result<(), DichotomyError> {
    let depth = verify_depth.clamp(1, witness.triple.depth());
    match verify::verify_case1(oracle, witness, depth)? {
        Verdict::Ok { .. } => {}
        v => {
            return Err(DichotomyError::Internal(format!(
                "assembled witness failed verification: {v:?}"
            )))
        }
    }
    match verify::verify_containment_mapped(
        &witness.triple,
        &base_run.witness.triple,
        &witness.parent_levels,
        depth,
    )? {
        Verdict::Ok { .. } => Ok(()),
        v => Err(DichotomyError::Internal(format!(
            "assembled witness escapes the base grid: {v:?}"
        ))),
    }
}

/// Runs one full round: base stabilization, block-family search, and on
/// absence the stride regrouping with its prefix audit. Audit excursions
/// feed back as discovered blocks until either case closes or the start
/// index outruns the stride table.
pub fn dichotomy(
    oracle: &dyn Coloring,
    base: &BigUint,
    palette: u32,
    schedule: &LengthSchedule,
    plan: &WindowPlan,
    diff_mode: &DiffMode,
    budgets: &Budgets,
) -> Result<DichotomyOutcome, DichotomyError> {
    budgets.validate()?;
    let base_run = run_base(
        oracle,
        base,
        palette,
        schedule,
        plan,
        diff_mode,
        budgets.depth as usize,
        budgets.horizon as usize,
    )?;
    let color = base_run.witness.color;
    let dstar = base_run.witness.triple.diffs.clone();
    let windows = base_run.witness.triple.lengths.clone();
    let mut discovered: Vec<Block> = Vec::new();
    let mut horizon = budgets.block_horizon as usize;
    loop {
        if let Some(family) = family_from_known(&discovered, budgets.blocks as usize) {
            let witness = case1_assemble(oracle, &family, &base_run, schedule)?;
            gate_case1(oracle, &witness, &base_run, budgets.verify_depth as usize)?;
            return Ok(DichotomyOutcome::Case1(witness));
        }
        if let Some(family) = case1_search(
            oracle,
            &dstar,
            schedule,
            color,
            budgets.blocks as usize,
            horizon,
            budgets.block_size as usize,
        )? {
            let witness = case1_assemble(oracle, &family, &base_run, schedule)?;
            gate_case1(oracle, &witness, &base_run, budgets.verify_depth as usize)?;
            return Ok(DichotomyOutcome::Case1(witness));
        }
        let start = scan_start_index(
            oracle,
            &dstar,
            schedule,
            color,
            horizon,
            budgets.block_size as usize,
            &discovered,
        )?;
        let mut witness = None;
        for depth in (1..=budgets.depth as usize).rev() {
            match case2_construct(&dstar, schedule, &windows, start, depth, color) {
                Ok(w) => {
                    witness = Some(w);
                    break;
                }
                Err(e) if e.is_budget() => continue,
                Err(e) => return Err(e),
            }
        }
        let Some(w) = witness else {
            return Ok(DichotomyOutcome::Inconclusive {
                reason: format!(
                    "stride regrouping from start index {start} exhausts the table of {} strides",
                    dstar.len()
                ),
            });
        };
        match verify::verify_case2(oracle, &w, w.depth())? {
            Verdict::Ok { .. } => return Ok(DichotomyOutcome::Case2(w)),
            Verdict::CounterexampleAt { element, .. } => {
                let block = decompose_excursion(&element, &w).ok_or_else(|| {
                    DichotomyError::Internal(format!(
                        "audit element {element} does not decompose over the regrouped strides"
                    ))
                })?;
                if discovered.contains(&block) {
                    return Ok(DichotomyOutcome::Inconclusive {
                        reason: format!("prefix excursion at {element} recurs without progress"),
                    });
                }
                horizon = horizon.max(block.max_index() as usize);
                discovered.push(block);
            }
            v => {
                return Err(DichotomyError::Internal(format!(
                    "regrouped witness failed its audit: {v:?}"
                )))
            }
        }
    }
}

/// One driver round as recorded in the final artifact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    #[serde(with = "crate::dec::u64_str")]
    pub round: u64,
    /// 1 for a closing Case-1 round, 2 for a color-forbidding Case-2 round.
    #[serde(with = "crate::dec::u64_str")]
    pub case: u64,
    /// The round's target color: emitted (Case 1) or forbidden (Case 2).
    pub color: Color,
    #[serde(with = "crate::dec::big")]
    pub base: BigUint,
    #[serde(with = "crate::dec::u64_str")]
    pub depth: u64,
}

/// The driver's terminal emission: the closing Case-1 witness plus the
/// round-by-round trail that led to it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinalWitness {
    pub witness: Case1Witness,
    pub rounds: Vec<RoundRecord>,
}

/// How the driver ended.
#[derive(Clone, Debug)]
pub enum DriverOutcome {
    Witness(FinalWitness),
    Inconclusive {
        reason: String,
        rounds: Vec<RoundRecord>,
    },
}

/// Decreasing induction on colors: run the dichotomy; a Case-1 witness at
/// any round closes the theorem for the original coloring, a Case-2
/// witness forbids one color and re-bases the next round inside the
/// regrouped span. At most `palette_size` rounds can forbid anything, so
/// the loop is capped there and everything else is inconclusive.
pub fn brauer_schur(
    oracle: &dyn Coloring,
    base: &BigUint,
    schedule: &LengthSchedule,
    plan: &WindowPlan,
    diff_mode: &DiffMode,
    budgets: &Budgets,
) -> Result<DriverOutcome, DichotomyError> {
    budgets.validate()?;
    schedule.validate()?;
    let initial = oracle.palette_size().max(1);
    let mut state_base = base.clone();
    let mut state_plan = plan.clone();
    let mut state_diffs = diff_mode.clone();
    let mut state_budgets = *budgets;
    let mut forbidden: Vec<Color> = Vec::new();
    let mut rounds: Vec<RoundRecord> = Vec::new();
    for round in 1..=u64::from(initial) {
        let ruled_out = forbidden.len() as u32;
        let palette = initial.saturating_sub(ruled_out).max(1);
        let outcome = match dichotomy(
            oracle,
            &state_base,
            palette,
            schedule,
            &state_plan,
            &state_diffs,
            &state_budgets,
        ) {
            Ok(o) => o,
            Err(e) if e.is_budget() => {
                return Ok(DriverOutcome::Inconclusive {
                    reason: e.to_string(),
                    rounds,
                })
            }
            Err(e) => return Err(e),
        };
        match outcome {
            DichotomyOutcome::Case1(w) => {
                rounds.push(RoundRecord {
                    round,
                    case: 1,
                    color: w.color,
                    base: state_base.clone(),
                    depth: w.triple.depth() as u64,
                });
                return Ok(DriverOutcome::Witness(FinalWitness { witness: w, rounds }));
            }
            DichotomyOutcome::Case2(w) => {
                rounds.push(RoundRecord {
                    round,
                    case: 2,
                    color: w.forbidden,
                    base: state_base.clone(),
                    depth: w.depth() as u64,
                });
                if !forbidden.contains(&w.forbidden) {
                    forbidden.push(w.forbidden);
                }
                state_base = w.base.clone();
                state_diffs = DiffMode::Explicit(w.newdiffs.clone());
                state_plan = WindowPlan::Assumed(w.windows.clone());
                state_budgets = state_budgets.for_next_round(w.depth() as u64);
            }
            DichotomyOutcome::Inconclusive { reason } => {
                return Ok(DriverOutcome::Inconclusive { reason, rounds })
            }
        }
    }
    Ok(DriverOutcome::Inconclusive {
        reason: format!("no verified arrangement within {initial} rounds"),
        rounds,
    })
}

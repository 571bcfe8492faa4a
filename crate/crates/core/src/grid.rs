//! Grids as triples of sequences, and the arithmetic on their level sets.
//!
//! A grid of depth N is described by bases `a_1..a_N`, differences
//! `l_1..l_N`, and lengths `k_1..k_N`. Its level set at depth i is
//!
//! ```text
//!   A_i = { a_i + x_1*l_1 + ... + x_i*l_i  |  0 <= x_t <= k_t - 1 }
//! ```
//!
//! The gap condition `l_i > (k_1-1)l_1 + ... + (k_{i-1}-1)l_{i-1}` makes the
//! representation faithful: every element has unique coordinates, the level
//! has exactly `k_1*...*k_i` elements, and the i-th coordinate splits the
//! level into ordered blocks. Nothing in this module queries a coloring;
//! these are the shared combinatorial objects every other module speaks in.

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("sequence lengths disagree: {0}")]
    LengthMismatch(String),
    #[error("invalid grid triple: {0}")]
    Invalid(String),
    #[error("level {level} out of range for depth {depth}")]
    LevelOutOfRange { level: usize, depth: usize },
}

/// Bases, differences, and lengths of equal depth. Lengths are at least 2
/// and nondecreasing; differences are positive. Bases may be zero: the
/// difference-span grids used by the dichotomy are anchored at the origin.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridTriple {
    #[serde(with = "crate::dec::big_vec")]
    pub bases: Vec<BigUint>,
    #[serde(with = "crate::dec::big_vec")]
    pub diffs: Vec<BigUint>,
    #[serde(with = "crate::dec::u64_vec")]
    pub lengths: Vec<u64>,
}

impl GridTriple {
    pub fn new(
        bases: Vec<BigUint>,
        diffs: Vec<BigUint>,
        lengths: Vec<u64>,
    ) -> Result<Self, GridError> {
        let t = GridTriple {
            bases,
            diffs,
            lengths,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn depth(&self) -> usize {
        self.bases.len()
    }

    pub fn validate(&self) -> Result<(), GridError> {
        if self.bases.len() != self.diffs.len() || self.bases.len() != self.lengths.len() {
            return Err(GridError::LengthMismatch(format!(
                "bases {}, diffs {}, lengths {}",
                self.bases.len(),
                self.diffs.len(),
                self.lengths.len()
            )));
        }
        if self.bases.is_empty() {
            return Err(GridError::Invalid("depth must be at least 1".into()));
        }
        if self.diffs.iter().any(|d| d.is_zero()) {
            return Err(GridError::Invalid("differences must be positive".into()));
        }
        for w in self.lengths.windows(2) {
            if w[0] > w[1] {
                return Err(GridError::Invalid(format!(
                    "lengths must be nondecreasing, got {} before {}",
                    w[0], w[1]
                )));
            }
        }
        if self.lengths[0] < 2 {
            return Err(GridError::Invalid("lengths must be at least 2".into()));
        }
        Ok(())
    }
}

/// One element of a level set together with the coordinate tuple that
/// produced it. When the gap condition fails, several tuples can denote the
/// same integer; the first in enumeration order is kept.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelEntry {
    pub value: BigUint,
    pub coords: Vec<u64>,
}

/// A fully enumerated level set, sorted ascending by value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelSet {
    pub level: usize,
    pub entries: Vec<LevelEntry>,
}

impl LevelSet {
    pub fn values(&self) -> impl Iterator<Item = &BigUint> {
        self.entries.iter().map(|e| &e.value)
    }

    pub fn contains(&self, x: &BigUint) -> bool {
        self.entries
            .binary_search_by(|e| e.value.cmp(x))
            .is_ok()
    }

    /// The translate T^b: every element shifted up by b, coordinates kept.
    pub fn translate(&self, b: &BigUint) -> LevelSet {
        LevelSet {
            level: self.level,
            entries: self
                .entries
                .iter()
                .map(|e| LevelEntry {
                    value: &e.value + b,
                    coords: e.coords.clone(),
                })
                .collect(),
        }
    }
}

/// Enumerates level i (1-based) of the triple. Coordinates run through the
/// odometer with x_1 varying fastest; duplicate values keep their earliest
/// coordinates, so the result is deterministic with or without the gap
/// condition.
pub fn level_set(triple: &GridTriple, level: usize) -> Result<LevelSet, GridError> {
    triple.validate()?;
    if level == 0 || level > triple.depth() {
        return Err(GridError::LevelOutOfRange {
            level,
            depth: triple.depth(),
        });
    }
    let base = &triple.bases[level - 1];
    let mut coords = vec![0u64; level];
    let mut value = base.clone();
    let mut entries = Vec::new();
    loop {
        entries.push(LevelEntry {
            value: value.clone(),
            coords: coords.clone(),
        });
        // Advance the odometer, keeping the running value in step.
        let mut t = 0;
        loop {
            if t == level {
                let mut out = entries;
                out.sort_by(|a, b| a.value.cmp(&b.value));
                out.dedup_by(|later, kept| later.value == kept.value);
                return Ok(LevelSet { level, entries: out });
            }
            if coords[t] + 1 < triple.lengths[t] {
                coords[t] += 1;
                value += &triple.diffs[t];
                break;
            }
            value -= &triple.diffs[t] * coords[t];
            coords[t] = 0;
            t += 1;
        }
    }
}

/// Streams level i's elements in odometer order (first coordinate fastest)
/// without materializing the set, for levels too large to hold in memory.
/// The visitor gets each value with its coordinates and returns false to
/// stop; the return value says whether the walk ran to completion. Unlike
/// [`level_set`], duplicate values under a failing gap condition are visited
/// once per coordinate tuple, and no value ordering is promised.
pub fn walk_level(
    triple: &GridTriple,
    level: usize,
    mut visit: impl FnMut(&BigUint, &[u64]) -> bool,
) -> Result<bool, GridError> {
    triple.validate()?;
    if level == 0 || level > triple.depth() {
        return Err(GridError::LevelOutOfRange {
            level,
            depth: triple.depth(),
        });
    }
    let mut coords = vec![0u64; level];
    let mut value = triple.bases[level - 1].clone();
    loop {
        if !visit(&value, &coords) {
            return Ok(false);
        }
        let mut t = 0;
        loop {
            if t == level {
                return Ok(true);
            }
            if coords[t] + 1 < triple.lengths[t] {
                coords[t] += 1;
                value += &triple.diffs[t];
                break;
            }
            value -= &triple.diffs[t] * coords[t];
            coords[t] = 0;
            t += 1;
        }
    }
}

/// Whether `l_i > (W_1-1)l_1 + ... + (W_{i-1}-1)l_{i-1}` for every i >= 2.
pub fn gap_condition(diffs: &[BigUint], windows: &[u64]) -> Result<bool, GridError> {
    if diffs.len() != windows.len() {
        return Err(GridError::LengthMismatch(format!(
            "diffs {}, windows {}",
            diffs.len(),
            windows.len()
        )));
    }
    let mut reach = BigUint::zero();
    for (i, d) in diffs.iter().enumerate() {
        if i > 0 && *d <= reach {
            return Ok(false);
        }
        reach += d * (windows[i] - 1);
    }
    Ok(true)
}

/// The minimal difference schedule for the given windows: `l_1 = 1` and each
/// later difference one past the reach of everything below it. This is the
/// tightest schedule satisfying the gap condition.
pub fn minimal_diffs(windows: &[u64]) -> Vec<BigUint> {
    let mut diffs = Vec::with_capacity(windows.len());
    let mut reach = BigUint::zero();
    for &w in windows {
        let l = &reach + 1u32;
        reach += &l * (w - 1);
        diffs.push(l);
    }
    diffs
}

/// Finds coordinates for x in level i of the triple, trying higher
/// coordinates first in ascending order. Under the gap condition the answer
/// is unique; otherwise the lexicographically least tuple ordered by
/// `(x_i, ..., x_1)` is returned.
pub fn member(triple: &GridTriple, level: usize, x: &BigUint) -> Result<Option<Vec<u64>>, GridError> {
    triple.validate()?;
    if level == 0 || level > triple.depth() {
        return Err(GridError::LevelOutOfRange {
            level,
            depth: triple.depth(),
        });
    }
    let base = &triple.bases[level - 1];
    if x < base {
        return Ok(None);
    }
    // reach[t] = greatest offset expressible by coordinates 1..=t.
    let mut reach = Vec::with_capacity(level + 1);
    reach.push(BigUint::zero());
    for t in 0..level {
        let prev = reach[t].clone();
        reach.push(prev + &triple.diffs[t] * (triple.lengths[t] - 1));
    }
    let mut coords = vec![0u64; level];
    let target = x - base;
    if search(triple, level, &target, &reach, &mut coords) {
        Ok(Some(coords))
    } else {
        Ok(None)
    }
}

fn search(
    triple: &GridTriple,
    t: usize,
    remaining: &BigUint,
    reach: &[BigUint],
    coords: &mut Vec<u64>,
) -> bool {
    if t == 0 {
        return remaining.is_zero();
    }
    let d = &triple.diffs[t - 1];
    for x in 0..triple.lengths[t - 1] {
        let spent = d * x;
        if spent > *remaining {
            break;
        }
        let rest = remaining - spent;
        if rest > reach[t - 1] {
            continue;
        }
        coords[t - 1] = x;
        if search(triple, t - 1, &rest, reach, coords) {
            return true;
        }
    }
    coords[t - 1] = 0;
    false
}

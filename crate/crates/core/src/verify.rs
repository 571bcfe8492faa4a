//! Independent certificate checking.
//!
//! Every constructive claim the engine emits can be re-derived here from
//! nothing but the certificate and the coloring oracle: grid levels are
//! re-enumerated element by element, d-sets are re-queried, containments
//! are re-resolved through coordinate membership, and regrouped spans are
//! re-audited against their forbidden color. Verification never trusts the
//! search that produced a certificate, and it reports the least
//! counterexample (smallest element, then lowest level) so failures are
//! stable, reproducible artifacts.
//!
//! The enumerated value 0 — possible only in zero-based spans — lies
//! outside the colored domain and is skipped.

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::coloring::{Color, Coloring, ColoringError};
use crate::construct::GridWitness;
use crate::dichotomy::{Case1Witness, Case2Witness};
use crate::grid::{self, GridError, GridTriple};

/// What an independent check concluded. `Ok` records how many levels were
/// enumerated; level 0 in a counterexample refers to a d-set element. For
/// avoidance checks (`verify_case2`) `expected` records the forbidden
/// color that was hit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Ok {
        #[serde(with = "crate::dec::u64_str")]
        depth: u64,
    },
    CounterexampleAt {
        #[serde(with = "crate::dec::big")]
        element: BigUint,
        expected: Color,
        found: Color,
        #[serde(with = "crate::dec::u64_str")]
        level: u64,
    },
    ContainmentFailure {
        #[serde(with = "crate::dec::big")]
        element: BigUint,
        #[serde(with = "crate::dec::u64_str")]
        level: u64,
    },
    StructureFailure(String),
}

impl Verdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, Verdict::Ok { .. })
    }
}

/// Re-enumerates levels `1..=depth` of the triple (clamped to its depth)
/// and demands the color everywhere.
pub fn verify_triple(
    oracle: &dyn Coloring,
    triple: &GridTriple,
    color: Color,
    depth: usize,
) -> Result<Verdict, ColoringError> {
    if depth == 0 {
        return Ok(Verdict::StructureFailure(
            "verification depth must be at least 1".into(),
        ));
    }
    if let Err(e) = triple.validate() {
        return Ok(Verdict::StructureFailure(e.to_string()));
    }
    let cap = depth.min(triple.depth());
    let mut best: Option<(BigUint, Color, u64)> = None;
    for level in 1..=cap {
        let mut query_err: Option<ColoringError> = None;
        let walked = grid::walk_level(triple, level, |v, _| {
            if v.is_zero() {
                return true;
            }
            match oracle.color_of(v) {
                Ok(c) if c == color => true,
                Ok(c) => {
                    note_counterexample(&mut best, v, c, level as u64);
                    true
                }
                Err(e) => {
                    query_err = Some(e);
                    false
                }
            }
        });
        debug_assert!(walked.is_ok());
        if let Some(e) = query_err {
            return Err(e);
        }
    }
    Ok(finish(best, color, cap))
}

fn note_counterexample(
    best: &mut Option<(BigUint, Color, u64)>,
    element: &BigUint,
    found: Color,
    level: u64,
) {
    let better = best
        .as_ref()
        .map_or(true, |(bv, _, bl)| element < bv || (element == bv && level < *bl));
    if better {
        *best = Some((element.clone(), found, level));
    }
}

fn finish(best: Option<(BigUint, Color, u64)>, expected: Color, cap: usize) -> Verdict {
    match best {
        Some((element, found, level)) => Verdict::CounterexampleAt {
            element,
            expected,
            found,
            level,
        },
        None => Verdict::Ok { depth: cap as u64 },
    }
}

/// Checks the witness shape (positive multipliers, one per level), then
/// re-enumerates the grid it denotes.
pub fn verify_grid_witness(
    oracle: &dyn Coloring,
    witness: &GridWitness,
    depth: usize,
) -> Result<Verdict, ColoringError> {
    if witness.alphas.len() != witness.diffs.len() || witness.alphas.iter().any(|&a| a == 0) {
        return Ok(Verdict::StructureFailure(
            "stride multipliers must be positive, one per level".into(),
        ));
    }
    let triple = match witness.denoted_triple() {
        Ok(t) => t,
        Err(e) => return Ok(Verdict::StructureFailure(e.to_string())),
    };
    verify_triple(oracle, &triple, witness.color, depth)
}

/// Re-queries every d-set element; all must be positive and of the color.
/// An empty d-set is vacuously fine. The depth reported is 0: no levels
/// are enumerated here.
pub fn verify_dset(
    oracle: &dyn Coloring,
    dset: &[BigUint],
    color: Color,
) -> Result<Verdict, ColoringError> {
    if dset.iter().any(|d| d.is_zero()) {
        return Ok(Verdict::StructureFailure(
            "d-set elements must be positive".into(),
        ));
    }
    let mut best: Option<(BigUint, Color, u64)> = None;
    for d in dset {
        let c = oracle.color_of(d)?;
        if c != color {
            note_counterexample(&mut best, d, c, 0);
        }
    }
    Ok(finish(best, color, 0))
}

/// Full Case-1 check: the d-set must list exactly the grid diffs, the grid
/// must be monochromatic up to the depth, and every d-set element must
/// carry the color. Counterexamples merge by (element, level), the d-set
/// counting as level 0.
pub fn verify_case1(
    oracle: &dyn Coloring,
    witness: &Case1Witness,
    depth: usize,
) -> Result<Verdict, ColoringError> {
    if witness.dset.is_empty() {
        return Ok(Verdict::StructureFailure("d-set must be nonempty".into()));
    }
    if witness.dset != witness.triple.diffs {
        return Ok(Verdict::StructureFailure(
            "d-set must list the grid diffs".into(),
        ));
    }
    let of_dset = verify_dset(oracle, &witness.dset, witness.color)?;
    let of_triple = verify_triple(oracle, &witness.triple, witness.color, depth)?;
    Ok(merge(of_dset, of_triple))
}

fn merge(a: Verdict, b: Verdict) -> Verdict {
    match (a, b) {
        (v @ Verdict::StructureFailure(_), _) => v,
        (_, v @ Verdict::StructureFailure(_)) => v,
        (v @ Verdict::ContainmentFailure { .. }, _) => v,
        (_, v @ Verdict::ContainmentFailure { .. }) => v,
        (v @ Verdict::CounterexampleAt { .. }, Verdict::Ok { .. }) => v,
        (Verdict::Ok { .. }, v @ Verdict::CounterexampleAt { .. }) => v,
        (a, b) => {
            let rank = |v: &Verdict| match v {
                Verdict::CounterexampleAt { element, level, .. } => {
                    Some((element.clone(), *level))
                }
                _ => None,
            };
            match (rank(&a), rank(&b)) {
                (Some(ka), Some(kb)) if ka > kb => b,
                (Some(_), Some(_)) => a,
                _ => b,
            }
        }
    }
}

/// Checks that each child level sits inside the parent level of the same
/// index, element by element, via coordinate membership.
pub fn verify_containment(
    child: &GridTriple,
    parent: &GridTriple,
    depth: usize,
) -> Result<Verdict, GridError> {
    let map: Vec<u64> = (1..=child.depth() as u64).collect();
    verify_containment_mapped(child, parent, &map, depth)
}

/// Checks that child level j sits inside parent level `levels[j-1]`; the
/// map lets a witness at unsquared lengths embed into the deeper levels of
/// its squared-length base grid.
pub fn verify_containment_mapped(
    child: &GridTriple,
    parent: &GridTriple,
    levels: &[u64],
    depth: usize,
) -> Result<Verdict, GridError> {
    if depth == 0 {
        return Ok(Verdict::StructureFailure(
            "verification depth must be at least 1".into(),
        ));
    }
    if let Err(e) = child.validate().and_then(|_| parent.validate()) {
        return Ok(Verdict::StructureFailure(e.to_string()));
    }
    let cap = depth.min(child.depth());
    if levels.len() < cap {
        return Ok(Verdict::StructureFailure(
            "level map shorter than the checked depth".into(),
        ));
    }
    let mut best: Option<(BigUint, u64)> = None;
    for j in 1..=cap {
        let target = levels[j - 1];
        if target < 1 || target > parent.depth() as u64 {
            return Ok(Verdict::StructureFailure(format!(
                "mapped level {target} outside the parent grid"
            )));
        }
        let mut member_err: Option<GridError> = None;
        grid::walk_level(child, j, |v, _| {
            match grid::member(parent, target as usize, v) {
                Ok(Some(_)) => true,
                Ok(None) => {
                    let better = best
                        .as_ref()
                        .map_or(true, |(bv, bl)| v < bv || (v == bv && (j as u64) < *bl));
                    if better {
                        best = Some((v.clone(), j as u64));
                    }
                    true
                }
                Err(e) => {
                    member_err = Some(e);
                    false
                }
            }
        })?;
        if let Some(e) = member_err {
            return Err(e);
        }
    }
    Ok(match best {
        Some((element, level)) => Verdict::ContainmentFailure { element, level },
        None => Verdict::Ok { depth: cap as u64 },
    })
}

/// Audits a regrouped span: structural laws first (strides match the
/// trace, indices advance, schedule lengths cover the windows, the gap
/// condition holds strictly), then both the translated span and its
/// zero-based copy are enumerated up to the depth and must avoid the
/// forbidden color throughout.
pub fn verify_case2(
    oracle: &dyn Coloring,
    witness: &Case2Witness,
    depth: usize,
) -> Result<Verdict, ColoringError> {
    if depth == 0 {
        return Ok(Verdict::StructureFailure(
            "verification depth must be at least 1".into(),
        ));
    }
    if let Some(flaw) = case2_structure_flaw(witness) {
        return Ok(Verdict::StructureFailure(flaw));
    }
    let cap = depth.min(witness.depth());
    let zero = BigUint::zero();
    let mut best: Option<(BigUint, Color, u64)> = None;
    for level in 1..=cap {
        for base in [&witness.base, &zero] {
            scan_span(
                oracle,
                base,
                &witness.newdiffs[..level],
                &witness.windows[..level],
                witness.forbidden,
                level as u64,
                &mut best,
            )?;
        }
    }
    Ok(finish(best, witness.forbidden, cap))
}

fn case2_structure_flaw(w: &Case2Witness) -> Option<String> {
    let d = w.depth();
    if d == 0 {
        return Some("regrouping must have at least one level".into());
    }
    if w.windows.len() != d || w.trace.len() != d {
        return Some("windows and trace must match the regrouping depth".into());
    }
    if w.base.is_zero() {
        return Some("base must be positive".into());
    }
    if w.start_index < 1 {
        return Some("start index must be at least 1".into());
    }
    let mut reach = BigUint::zero();
    let mut prev_end = w.start_index;
    for i in 0..d {
        let step = &w.trace[i];
        if w.windows[i] < 2 {
            return Some("windows must be at least 2".into());
        }
        if w.newdiffs[i].is_zero() {
            return Some("regrouped strides must be positive".into());
        }
        if step.stride != w.newdiffs[i] {
            return Some(format!(
                "trace stride {} disagrees with diff {}",
                step.stride, w.newdiffs[i]
            ));
        }
        if step.index <= prev_end {
            return Some(format!(
                "regrouping index {} does not advance past {}",
                step.index, prev_end
            ));
        }
        if step.length < w.windows[i] {
            return Some(format!(
                "schedule length {} cannot cover window {}",
                step.length, w.windows[i]
            ));
        }
        if w.newdiffs[i] <= reach {
            return Some(format!(
                "stride {} violates the gap condition",
                w.newdiffs[i]
            ));
        }
        reach += &w.newdiffs[i] * (w.windows[i] - 1);
        prev_end = step.index + step.skip;
    }
    None
}

fn scan_span(
    oracle: &dyn Coloring,
    base: &BigUint,
    diffs: &[BigUint],
    windows: &[u64],
    forbidden: Color,
    level: u64,
    best: &mut Option<(BigUint, Color, u64)>,
) -> Result<(), ColoringError> {
    let mut coords = vec![0u64; diffs.len()];
    let mut value = base.clone();
    loop {
        if !value.is_zero() {
            let c = oracle.color_of(&value)?;
            if c == forbidden {
                note_counterexample(best, &value, c, level);
            }
        }
        let mut t = 0;
        loop {
            if t == diffs.len() {
                return Ok(());
            }
            if coords[t] + 1 < windows[t] {
                coords[t] += 1;
                value += &diffs[t];
                break;
            }
            value -= &diffs[t] * coords[t];
            coords[t] = 0;
            t += 1;
        }
    }
}

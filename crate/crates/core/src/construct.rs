//! Monochromatic grid extraction and stabilization.
//!
//! [`find_mono_grid`] is the finite workhorse: inside the ambient set
//! `A_n = {a + x_1*l_1 + ... + x_n*l_n : 0 <= x_i <= W_i - 1}` it finds a
//! translated sub-grid `{a_n + x_1*d_1 + ... + x_n*d_n : 0 <= x_i <= k_i - 1}`
//! on which the coloring is constant. It works top-down: the outermost
//! dimension splits `A_n` into `W_n` translated copies of `A_{n-1}`, the
//! copies are product-colored (two copies get the same label exactly when
//! they agree pointwise), a monochromatic progression of labels picks the
//! stride `d_n` and the copy to recurse into.
//!
//! [`generate_descriptors`] runs that search at every depth `m <= M` and
//! [`stabilize`] extracts, by exhaustive search over subsequences, a family
//! whose colors agree and whose strides are coherent level by level. That
//! exhaustive search is the finite realization of an infinitary pigeonhole
//! argument: the guarantee that a large enough horizon M always suffices is
//! only available in the limit, so a failed stabilization is reported as
//! such rather than silently retried.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coloring::{Color, Coloring, ColoringError};
use crate::grid::{self, GridError, GridTriple};
use crate::windows::{find_mono_ap, window_for_level, WindowError, WindowPlan};

#[derive(Debug, Error)]
pub enum ConstructError {
    #[error("no monochromatic progression of the required length at level {level}")]
    WindowExhausted { level: usize },
    #[error("no coherent depth-{depth} subfamily among {horizon} descriptors")]
    StabilizationFailed { depth: usize, horizon: usize },
    #[error(transparent)]
    Window(#[from] WindowError),
    #[error(transparent)]
    Coloring(#[from] ColoringError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("invalid construction parameters: {0}")]
    Spec(String),
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

/// Ambient-set parameters for one grid search: base, per-level strides l_i,
/// window sizes W_i, target progression lengths k_i, and the palette size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelParams {
    pub base: BigUint,
    pub diffs: Vec<BigUint>,
    pub windows: Vec<u64>,
    pub lengths: Vec<u64>,
    pub palette: u32,
}

impl LevelParams {
    pub fn new(
        base: BigUint,
        diffs: Vec<BigUint>,
        windows: Vec<u64>,
        lengths: Vec<u64>,
        palette: u32,
    ) -> Result<Self, ConstructError> {
        let p = LevelParams {
            base,
            diffs,
            windows,
            lengths,
            palette,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn depth(&self) -> usize {
        self.diffs.len()
    }

    pub fn validate(&self) -> Result<(), ConstructError> {
        let bad = |msg: String| Err(ConstructError::Spec(msg));
        if self.diffs.is_empty() {
            return bad("depth must be at least 1".into());
        }
        if self.diffs.len() != self.windows.len() || self.diffs.len() != self.lengths.len() {
            return bad(format!(
                "mismatched level counts: {} diffs, {} windows, {} lengths",
                self.diffs.len(),
                self.windows.len(),
                self.lengths.len()
            ));
        }
        if self.base.is_zero() {
            return bad("base must be at least 1".into());
        }
        if self.palette == 0 {
            return bad("palette must be at least 1".into());
        }
        if self.diffs.iter().any(|l| l.is_zero()) {
            return bad("strides must be positive".into());
        }
        if self.windows.iter().any(|&w| w < 2) {
            return bad("windows must be at least 2".into());
        }
        if self.lengths[0] < 2 || self.lengths.windows(2).any(|p| p[0] > p[1]) {
            return bad("lengths must be nondecreasing and at least 2".into());
        }
        if !grid::gap_condition(&self.diffs, &self.windows)? {
            return bad("strides do not satisfy the gap condition for the windows".into());
        }
        Ok(())
    }
}

/// A monochromatic grid found inside an ambient set: base `a_n`, strides
/// `d_i = alpha_i * l_i`, progression lengths, and the common color.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridWitness {
    #[serde(with = "crate::dec::big")]
    pub base: BigUint,
    #[serde(with = "crate::dec::big_vec")]
    pub diffs: Vec<BigUint>,
    #[serde(with = "crate::dec::u64_vec")]
    pub alphas: Vec<u64>,
    #[serde(with = "crate::dec::u64_vec")]
    pub lengths: Vec<u64>,
    pub color: Color,
}

impl GridWitness {
    pub fn depth(&self) -> usize {
        self.diffs.len()
    }

    /// The witness as a grid triple whose every level is anchored at the
    /// witness base; its top level set is exactly the denoted grid.
    pub fn denoted_triple(&self) -> Result<GridTriple, GridError> {
        GridTriple::new(
            vec![self.base.clone(); self.depth()],
            self.diffs.clone(),
            self.lengths.clone(),
        )
    }
}

/// The grid found at one truncation depth: base `b_m`, strides
/// `d_1^m..d_m^m`, and its color. Produced by [`generate_descriptors`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessDescriptor {
    #[serde(with = "crate::dec::u64_str")]
    pub index: u64,
    #[serde(with = "crate::dec::big")]
    pub base: BigUint,
    #[serde(with = "crate::dec::big_vec")]
    pub diffs: Vec<BigUint>,
    pub color: Color,
}

/// Visits the ambient set spanned by `diffs` and `windows` above `base`,
/// first coordinate fastest, without materializing it. Deep levels get big:
/// the set has `W_1*...*W_t` elements, so everything downstream streams.
fn walk_offsets(
    base: &BigUint,
    diffs: &[BigUint],
    windows: &[u64],
    mut visit: impl FnMut(&BigUint) -> Result<(), ConstructError>,
) -> Result<(), ConstructError> {
    debug_assert_eq!(diffs.len(), windows.len());
    let mut coords = vec![0u64; diffs.len()];
    let mut value = base.clone();
    loop {
        visit(&value)?;
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

/// Builds the level word: one letter per block of the current level, letters
/// interned in order of first appearance, exactly as if the blocks had been
/// materialized and run through the product coloring.
fn level_word(
    oracle: &dyn Coloring,
    base: &BigUint,
    stride: &BigUint,
    window: u64,
    sub_diffs: &[BigUint],
    sub_windows: &[u64],
) -> Result<Vec<u32>, ConstructError> {
    let block_len = sub_windows
        .iter()
        .try_fold(1usize, |p, &w| p.checked_mul(w as usize))
        .ok_or_else(|| ConstructError::Spec("block size overflows usize".into()))?;
    let mut interned: HashMap<Vec<u32>, u32> = HashMap::new();
    let mut word = Vec::with_capacity(window as usize);
    for j in 0..window {
        let block_base = base + stride * j;
        let mut tuple = Vec::with_capacity(block_len);
        walk_offsets(&block_base, sub_diffs, sub_windows, |v| {
            tuple.push(oracle.color_of(v)?.0);
            Ok(())
        })?;
        let fresh = interned.len() as u32;
        word.push(*interned.entry(tuple).or_insert(fresh));
    }
    Ok(word)
}

/// Finds a monochromatic grid inside the ambient set described by `params`.
///
/// Deterministic: every level takes the lexicographically least label
/// progression, so the result is a pure function of the coloring spec and
/// the parameters. The denoted grid is re-enumerated and checked against
/// the oracle before returning.
pub fn find_mono_grid(
    oracle: &dyn Coloring,
    params: &LevelParams,
) -> Result<GridWitness, ConstructError> {
    params.validate()?;
    let n = params.depth();
    let mut base = params.base.clone();
    let mut diffs = vec![BigUint::zero(); n];
    let mut alphas = vec![0u64; n];
    for i in (1..=n).rev() {
        let word = level_word(
            oracle,
            &base,
            &params.diffs[i - 1],
            params.windows[i - 1],
            &params.diffs[..i - 1],
            &params.windows[..i - 1],
        )?;
        let ap = find_mono_ap(&word, params.lengths[i - 1])
            .ok_or(ConstructError::WindowExhausted { level: i })?;
        alphas[i - 1] = ap.step;
        diffs[i - 1] = &params.diffs[i - 1] * ap.step;
        base += &params.diffs[i - 1] * ap.start;
    }
    let color = oracle.color_of(&base)?;
    let witness = GridWitness {
        base,
        diffs,
        alphas,
        lengths: params.lengths.clone(),
        color,
    };
    check_mono_level(oracle, &witness.denoted_triple()?, n, witness.color)?;
    Ok(witness)
}

/// Re-enumerates one level of a triple against the oracle and demands the
/// expected color everywhere; used as a self-check before any witness leaves
/// this module.
fn check_mono_level(
    oracle: &dyn Coloring,
    triple: &GridTriple,
    level: usize,
    color: Color,
) -> Result<(), ConstructError> {
    let mut offender: Option<BigUint> = None;
    let mut query_err: Option<ColoringError> = None;
    grid::walk_level(triple, level, |v, _| match oracle.color_of(v) {
        Ok(c) if c == color => true,
        Ok(_) => {
            offender = Some(v.clone());
            false
        }
        Err(e) => {
            query_err = Some(e);
            false
        }
    })?;
    if let Some(e) = query_err {
        return Err(e.into());
    }
    if let Some(v) = offender {
        return Err(ConstructError::Internal(format!(
            "level {level} is not monochromatic at {v}"
        )));
    }
    Ok(())
}

/// Where the stride schedule comes from: generated as the minimal sequence
/// satisfying the gap condition, or supplied explicitly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiffMode {
    Auto,
    Explicit(Vec<BigUint>),
}

/// Resolves the window for every level of the schedule in turn. Certified
/// plans compute exact van der Waerden numbers; the effective palette for a
/// level counts the colorings of one block of the level below.
pub fn resolve_windows(
    plan: &WindowPlan,
    lengths: &[u64],
    palette: u32,
) -> Result<Vec<u64>, WindowError> {
    plan.validate()?;
    let mut ws = Vec::with_capacity(lengths.len());
    for (i, &k) in lengths.iter().enumerate() {
        let w = window_for_level(plan, i + 1, k, palette, &ws)?;
        ws.push(w);
    }
    Ok(ws)
}

/// The outcome of running the grid search at every depth up to a horizon.
/// `exhausted` records the level whose window ran out when the list is
/// shorter than the horizon.
#[derive(Clone, Debug)]
pub struct DescriptorRun {
    pub windows: Vec<u64>,
    pub diffs: Vec<BigUint>,
    pub descriptors: Vec<WitnessDescriptor>,
    pub exhausted: Option<usize>,
}

/// Runs [`find_mono_grid`] at depths 1..=horizon with one shared window and
/// stride schedule, collecting one descriptor per depth.
///
/// Adaptive plans regrow a failing level's window by the plan factor (up to
/// its cap) and restart the whole run, since the stride schedule must be
/// regenerated for the new windows; explicit strides are therefore
/// incompatible with adaptive plans. A window that stays too small aborts
/// the run with the partial list and the failing level.
pub fn generate_descriptors(
    oracle: &dyn Coloring,
    base: &BigUint,
    diff_mode: &DiffMode,
    plan: &WindowPlan,
    lengths: &[u64],
    horizon: usize,
) -> Result<DescriptorRun, ConstructError> {
    if horizon == 0 {
        return Err(ConstructError::Spec("horizon must be at least 1".into()));
    }
    if lengths.len() < horizon {
        return Err(ConstructError::Spec(format!(
            "length schedule covers {} levels, horizon is {horizon}",
            lengths.len()
        )));
    }
    if matches!(
        (plan, diff_mode),
        (WindowPlan::Adaptive { .. }, DiffMode::Explicit(_))
    ) {
        return Err(ConstructError::Spec(
            "adaptive window plans require auto-generated strides".into(),
        ));
    }
    let lengths = &lengths[..horizon];
    let palette = oracle.palette_size();
    let mut windows = resolve_windows(plan, lengths, palette)?;
    'run: loop {
        let diffs = match diff_mode {
            DiffMode::Auto => grid::minimal_diffs(&windows),
            DiffMode::Explicit(ls) => {
                if ls.len() < horizon {
                    return Err(ConstructError::Spec(format!(
                        "stride schedule covers {} levels, horizon is {horizon}",
                        ls.len()
                    )));
                }
                let ls = ls[..horizon].to_vec();
                if !grid::gap_condition(&ls, &windows)? {
                    return Err(ConstructError::Spec(
                        "explicit strides do not satisfy the gap condition".into(),
                    ));
                }
                ls
            }
        };
        let mut descriptors = Vec::with_capacity(horizon);
        for m in 1..=horizon {
            let params = LevelParams::new(
                base.clone(),
                diffs[..m].to_vec(),
                windows[..m].to_vec(),
                lengths[..m].to_vec(),
                palette,
            )?;
            match find_mono_grid(oracle, &params) {
                Ok(w) => descriptors.push(WitnessDescriptor {
                    index: m as u64,
                    base: w.base,
                    diffs: w.diffs,
                    color: w.color,
                }),
                Err(ConstructError::WindowExhausted { level }) => {
                    if let WindowPlan::Adaptive { factor, max, .. } = plan {
                        if windows[level - 1] < *max {
                            windows[level - 1] =
                                windows[level - 1].saturating_mul(*factor).min(*max);
                            continue 'run;
                        }
                    }
                    return Ok(DescriptorRun {
                        windows,
                        diffs,
                        descriptors,
                        exhausted: Some(level),
                    });
                }
                Err(e) => return Err(e),
            }
        }
        return Ok(DescriptorRun {
            windows,
            diffs,
            descriptors,
            exhausted: None,
        });
    }
}

/// A coherent subfamily extracted from a descriptor list: 1-based positions
/// of the chosen descriptors, their bases, the pinned strides, and the
/// shared color.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stabilized {
    #[serde(with = "crate::dec::u64_vec")]
    pub indices: Vec<u64>,
    #[serde(with = "crate::dec::big_vec")]
    pub bases: Vec<BigUint>,
    #[serde(with = "crate::dec::big_vec")]
    pub diffs: Vec<BigUint>,
    pub color: Color,
}

/// Finds positions `n_1 < ... < n_r` in the list such that all chosen
/// descriptors share one color and, for every level i, the stride `d_i` of
/// every descriptor chosen at or after position i equals `d_i` of the one
/// chosen at position i. Returns the lexicographically least such tuple, or
/// None if the finite list has no coherent subfamily.
pub fn stabilize(descriptors: &[WitnessDescriptor], depth: usize) -> Option<Stabilized> {
    if depth == 0 {
        return None;
    }
    let mut picked = Vec::with_capacity(depth);
    if !pick(descriptors, depth, 0, &mut picked) {
        return None;
    }
    Some(Stabilized {
        color: descriptors[picked[0]].color,
        bases: picked
            .iter()
            .map(|&i| descriptors[i].base.clone())
            .collect(),
        diffs: picked
            .iter()
            .enumerate()
            .map(|(t, &i)| descriptors[i].diffs[t].clone())
            .collect(),
        indices: picked.iter().map(|&i| i as u64 + 1).collect(),
    })
}

fn pick(
    descriptors: &[WitnessDescriptor],
    depth: usize,
    start: usize,
    picked: &mut Vec<usize>,
) -> bool {
    if picked.len() == depth {
        return true;
    }
    let level = picked.len() + 1;
    for idx in start..descriptors.len() {
        if descriptors.len() - idx < depth - picked.len() {
            break;
        }
        let d = &descriptors[idx];
        if d.diffs.len() < level {
            continue;
        }
        if let Some(&first) = picked.first() {
            if d.color != descriptors[first].color {
                continue;
            }
        }
        if picked
            .iter()
            .enumerate()
            .any(|(t, &pi)| d.diffs[t] != descriptors[pi].diffs[t])
        {
            continue;
        }
        picked.push(idx);
        if pick(descriptors, depth, idx + 1, picked) {
            return true;
        }
        picked.pop();
    }
    false
}

/// A stabilized grid family: the triple (per-level bases, coherent strides,
/// lengths), its color, and the run that produced it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InfinitaryWitness {
    pub triple: GridTriple,
    pub color: Color,
    #[serde(with = "crate::dec::u64_vec")]
    pub indices: Vec<u64>,
    #[serde(with = "crate::dec::u64_vec")]
    pub windows: Vec<u64>,
    #[serde(with = "crate::dec::big_vec")]
    pub strides: Vec<BigUint>,
    pub descriptors: Vec<WitnessDescriptor>,
}

/// Generates descriptors up to the horizon and stabilizes them at the given
/// depth. Every level set of the returned triple is monochromatic with the
/// returned color; this is re-checked against the oracle before returning.
///
/// Stabilization is attempted even when the descriptor list is partial; the
/// window failure surfaces only if no descriptor at all was produced.
pub fn infinitary_vdw(
    oracle: &dyn Coloring,
    base: &BigUint,
    diff_mode: &DiffMode,
    plan: &WindowPlan,
    lengths: &[u64],
    depth: usize,
    horizon: usize,
) -> Result<InfinitaryWitness, ConstructError> {
    if depth == 0 {
        return Err(ConstructError::Spec("depth must be at least 1".into()));
    }
    if depth > horizon {
        return Err(ConstructError::Spec(format!(
            "depth {depth} exceeds horizon {horizon}"
        )));
    }
    let run = generate_descriptors(oracle, base, diff_mode, plan, lengths, horizon)?;
    let stab = match stabilize(&run.descriptors, depth) {
        Some(s) => s,
        None => {
            if run.descriptors.is_empty() {
                let level = run.exhausted.unwrap_or(1);
                return Err(ConstructError::WindowExhausted { level });
            }
            return Err(ConstructError::StabilizationFailed {
                depth,
                horizon,
            });
        }
    };
    let triple = GridTriple::new(
        stab.bases.clone(),
        stab.diffs.clone(),
        lengths[..depth].to_vec(),
    )?;
    for level in 1..=depth {
        check_mono_level(oracle, &triple, level, stab.color)?;
    }
    Ok(InfinitaryWitness {
        triple,
        color: stab.color,
        indices: stab.indices,
        windows: run.windows,
        strides: run.diffs,
        descriptors: run.descriptors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::ColoringSpec;
    use proptest::prelude::*;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    fn bigs(ns: &[u64]) -> Vec<BigUint> {
        ns.iter().copied().map(BigUint::from).collect()
    }

    fn oracle(spec: &str) -> Box<dyn Coloring> {
        ColoringSpec::parse(spec).unwrap().build().unwrap()
    }

    fn params(
        base: u64,
        diffs: &[u64],
        windows: &[u64],
        lengths: &[u64],
        palette: u32,
    ) -> LevelParams {
        LevelParams::new(
            big(base),
            bigs(diffs),
            windows.to_vec(),
            lengths.to_vec(),
            palette,
        )
        .unwrap()
    }

    #[test]
    fn line_example() {
        let w = find_mono_grid(oracle("periodic:1,2,1").as_ref(), &params(1, &[1], &[3], &[2], 2))
            .unwrap();
        assert_eq!(w.base, big(1));
        assert_eq!(w.diffs, bigs(&[2]));
        assert_eq!(w.alphas, vec![2]);
        assert_eq!(w.color, Color(1));
    }

    #[test]
    fn plane_example() {
        let w = find_mono_grid(
            oracle("periodic:1,2").as_ref(),
            &params(1, &[1, 3], &[3, 3], &[2, 2], 2),
        )
        .unwrap();
        assert_eq!(w.base, big(1));
        assert_eq!(w.diffs, bigs(&[2, 6]));
        assert_eq!(w.alphas, vec![2, 2]);
        assert_eq!(w.color, Color(1));
        let set = grid::level_set(&w.denoted_triple().unwrap(), 2).unwrap();
        let values: Vec<BigUint> = set.values().cloned().collect();
        assert_eq!(values, bigs(&[1, 3, 7, 9]));
    }

    #[test]
    fn constant_coloring_takes_the_first_cell() {
        let p = params(5, &[1, 4, 36], &[4, 9, 16], &[2, 3, 4], 3);
        let w = find_mono_grid(oracle("const:3").as_ref(), &p).unwrap();
        assert_eq!(w.base, big(5));
        assert_eq!(w.alphas, vec![1, 1, 1]);
        assert_eq!(w.diffs, bigs(&[1, 4, 36]));
        assert_eq!(w.color, Color(3));
    }

    #[test]
    fn window_exhaustion_reports_the_level() {
        // Two distinct colors in a window of two: no pair to be found.
        let err = find_mono_grid(oracle("periodic:1,2").as_ref(), &params(1, &[1], &[2], &[2], 2))
            .unwrap_err();
        assert!(matches!(err, ConstructError::WindowExhausted { level: 1 }));
        // Three pairwise distinct blocks one level up.
        let err = find_mono_grid(
            oracle("periodic:1,1,1,1,1,2,1,2,1").as_ref(),
            &params(1, &[1, 3], &[3, 3], &[2, 2], 2),
        )
        .unwrap_err();
        assert!(matches!(err, ConstructError::WindowExhausted { level: 2 }));
    }

    #[test]
    fn every_two_coloring_of_a_certified_window_has_a_grid() {
        // W(3, 2) = 9: all 512 colorings of {1..9} yield a progression.
        for mask in 0..512u32 {
            let word: Vec<u32> = (0..9).map(|i| 1 + ((mask >> i) & 1)).collect();
            let spec = ColoringSpec::Periodic(word.clone());
            let oracle = spec.build().unwrap();
            let w = find_mono_grid(oracle.as_ref(), &params(1, &[1], &[9], &[3], 2))
                .unwrap_or_else(|e| panic!("coloring {word:?}: {e}"));
            assert!(w.alphas[0] >= 1 && w.alphas[0] <= 4);
        }
    }

    #[test]
    fn denoted_grid_lies_inside_the_ambient_set() {
        let p = params(7, &[1, 6, 36], &[4, 6, 6], &[2, 2, 3], 3);
        let w = find_mono_grid(oracle("periodic:1,2,3,1,2,1").as_ref(), &p).unwrap();
        let ambient = GridTriple::new(
            vec![p.base.clone(); 3],
            p.diffs.clone(),
            p.windows.to_vec(),
        )
        .unwrap();
        let ambient_set = grid::level_set(&ambient, 3).unwrap();
        for v in grid::level_set(&w.denoted_triple().unwrap(), 3).unwrap().values() {
            assert!(ambient_set.contains(v), "{v} escapes the ambient set");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]
        #[test]
        fn multipliers_stay_within_bounds(
            word in proptest::collection::vec(1u32..4, 1..6),
            w1 in 3u64..7,
            w2 in 3u64..7,
        ) {
            let oracle = ColoringSpec::Periodic(word).build().unwrap();
            let windows = [w1, w2];
            let diffs = grid::minimal_diffs(&windows);
            let p = LevelParams::new(big(1), diffs, windows.to_vec(), vec![2, 2], 3).unwrap();
            match find_mono_grid(oracle.as_ref(), &p) {
                Ok(w) => {
                    for (i, &a) in w.alphas.iter().enumerate() {
                        prop_assert!(a >= 1);
                        prop_assert!(a <= (windows[i] - 1) / (p.lengths[i] - 1));
                    }
                }
                Err(ConstructError::WindowExhausted { .. }) => {}
                Err(e) => return Err(TestCaseError::fail(format!("{e}"))),
            }
        }
    }

    #[test]
    fn descriptors_for_constant_colorings_repeat() {
        let run = generate_descriptors(
            oracle("const:2").as_ref(),
            &big(1),
            &DiffMode::Auto,
            &WindowPlan::Assumed(vec![3, 3]),
            &[2, 2],
            2,
        )
        .unwrap();
        assert_eq!(run.descriptors.len(), 2);
        assert!(run.exhausted.is_none());
        assert_eq!(run.descriptors[0].color, run.descriptors[1].color);
        assert_eq!(run.descriptors[0].diffs[0], run.descriptors[1].diffs[0]);
    }

    #[test]
    fn descriptor_trace_with_explicit_strides() {
        let run = generate_descriptors(
            oracle("periodic:1,2").as_ref(),
            &big(1),
            &DiffMode::Explicit(bigs(&[1, 3, 13])),
            &WindowPlan::Assumed(vec![3, 3, 3]),
            &[2, 2, 2],
            3,
        )
        .unwrap();
        assert_eq!(run.descriptors.len(), 3);
        let d3 = &run.descriptors[2];
        assert_eq!(d3.base, big(1));
        assert_eq!(d3.diffs, bigs(&[2, 6, 26]));
        assert_eq!(d3.color, Color(1));
        for d in &run.descriptors {
            let triple = GridTriple::new(
                vec![d.base.clone(); d.diffs.len()],
                d.diffs.clone(),
                vec![2; d.diffs.len()],
            )
            .unwrap();
            let oracle = oracle("periodic:1,2");
            for v in grid::level_set(&triple, d.diffs.len()).unwrap().values() {
                assert_eq!(oracle.color_of(v).unwrap(), d.color);
            }
        }
    }

    #[test]
    fn exhaustion_keeps_the_partial_list() {
        // Depth 1 succeeds; at depth 2 the three blocks are pairwise
        // distinct, so the level-2 window of three runs out.
        let run = generate_descriptors(
            oracle("periodic:1,1,1,1,1,2,1,2,1").as_ref(),
            &big(1),
            &DiffMode::Auto,
            &WindowPlan::Assumed(vec![3, 3]),
            &[2, 2],
            2,
        )
        .unwrap();
        assert_eq!(run.descriptors.len(), 1);
        assert_eq!(run.exhausted, Some(2));
    }

    #[test]
    fn adaptive_plans_regrow_the_failing_level() {
        let run = generate_descriptors(
            oracle("periodic:1,1,1,1,1,2,1,2,1").as_ref(),
            &big(1),
            &DiffMode::Auto,
            &WindowPlan::Adaptive {
                start: 3,
                factor: 2,
                max: 12,
            },
            &[2, 2],
            2,
        )
        .unwrap();
        assert_eq!(run.windows, vec![3, 6]);
        assert_eq!(run.descriptors.len(), 2);
        assert!(run.exhausted.is_none());
    }

    #[test]
    fn adaptive_plans_reject_explicit_strides() {
        let err = generate_descriptors(
            oracle("const:1").as_ref(),
            &big(1),
            &DiffMode::Explicit(bigs(&[1, 3])),
            &WindowPlan::Adaptive {
                start: 3,
                factor: 2,
                max: 12,
            },
            &[2, 2],
            2,
        )
        .unwrap_err();
        assert!(matches!(err, ConstructError::Spec(_)));
    }

    fn desc(index: u64, color: u32, diffs: &[u64]) -> WitnessDescriptor {
        WitnessDescriptor {
            index,
            base: big(10 + index),
            diffs: bigs(diffs),
            color: Color(color),
        }
    }

    #[test]
    fn stabilize_worked_examples() {
        let list = vec![desc(1, 1, &[2]), desc(2, 1, &[2, 4]), desc(3, 1, &[2, 4, 5])];
        let s = stabilize(&list, 3).unwrap();
        assert_eq!(s.indices, vec![1, 2, 3]);
        assert_eq!(s.diffs, bigs(&[2, 4, 5]));
        assert_eq!(s.bases, bigs(&[11, 12, 13]));
        assert_eq!(s.color, Color(1));

        let list = vec![desc(1, 1, &[2]), desc(2, 2, &[3, 4])];
        assert!(stabilize(&list, 2).is_none());

        let list = vec![desc(1, 1, &[2]), desc(2, 1, &[3, 4]), desc(3, 1, &[2, 7])];
        let s = stabilize(&list, 2).unwrap();
        assert_eq!(s.indices, vec![1, 3]);
        assert_eq!(s.diffs, bigs(&[2, 7]));
    }

    // Brute force: all strictly increasing index tuples in lexicographic
    // order, the full coherence condition checked directly.
    fn stabilize_brute(list: &[WitnessDescriptor], depth: usize) -> Option<Vec<usize>> {
        fn rec(
            list: &[WitnessDescriptor],
            depth: usize,
            start: usize,
            picked: &mut Vec<usize>,
        ) -> Option<Vec<usize>> {
            if picked.len() == depth {
                let color = list[picked[0]].color;
                for (i, &ni) in picked.iter().enumerate() {
                    if list[ni].color != color || list[ni].diffs.len() <= i {
                        return None;
                    }
                    for &nj in &picked[i..] {
                        if list[nj].diffs.len() <= i || list[nj].diffs[i] != list[ni].diffs[i] {
                            return None;
                        }
                    }
                }
                return Some(picked.clone());
            }
            for idx in start..list.len() {
                picked.push(idx);
                if let Some(hit) = rec(list, depth, idx + 1, picked) {
                    return Some(hit);
                }
                picked.pop();
            }
            None
        }
        rec(list, depth, 0, &mut Vec::new())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(512))]
        #[test]
        fn stabilize_agrees_with_brute_force(
            shape in proptest::collection::vec(
                (1u32..3, proptest::collection::vec(2u64..5, 1..5)),
                1..8,
            ),
            depth in 1usize..4,
        ) {
            let list: Vec<WitnessDescriptor> = shape
                .into_iter()
                .enumerate()
                .map(|(i, (color, diffs))| desc(i as u64 + 1, color, &diffs))
                .collect();
            let got = stabilize(&list, depth).map(|s| {
                s.indices.iter().map(|&i| i as usize - 1).collect::<Vec<_>>()
            });
            prop_assert_eq!(got, stabilize_brute(&list, depth));
        }
    }

    #[test]
    fn pigeonhole_guarantees_depth_two_over_small_stride_sets() {
        // Three same-color descriptors whose level-1 strides come from a
        // two-element set always contain a coherent pair, whatever the
        // other strides do.
        for a in [2u64, 4] {
            for b in [2u64, 4] {
                for c in [2u64, 4] {
                    for x in [3u64, 5] {
                        for y in [3u64, 5] {
                            for z in [6u64, 7] {
                                let list = vec![
                                    desc(1, 1, &[a]),
                                    desc(2, 1, &[b, x]),
                                    desc(3, 1, &[c, y, z]),
                                ];
                                assert!(
                                    stabilize(&list, 2).is_some(),
                                    "no pair in {list:?}"
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn infinitary_constant_coloring() {
        let w = infinitary_vdw(
            oracle("const:2").as_ref(),
            &big(1),
            &DiffMode::Auto,
            &WindowPlan::Assumed(vec![3, 3, 3, 3]),
            &[2, 2, 2, 2],
            2,
            4,
        )
        .unwrap();
        assert_eq!(w.color, Color(2));
        assert_eq!(w.indices, vec![1, 2]);
        assert_eq!(w.triple.depth(), 2);
    }

    #[test]
    fn infinitary_periodic_trace() {
        let w = infinitary_vdw(
            oracle("periodic:1,2").as_ref(),
            &big(1),
            &DiffMode::Auto,
            &WindowPlan::Assumed(vec![3, 9]),
            &[2, 2],
            2,
            2,
        )
        .unwrap();
        assert_eq!(w.color, Color(1));
        assert_eq!(w.indices, vec![1, 2]);
        assert_eq!(w.triple.bases, bigs(&[1, 1]));
        assert_eq!(w.triple.diffs, bigs(&[2, 6]));
        assert_eq!(w.strides, bigs(&[1, 3]));
    }

    #[test]
    fn infinitary_reports_stabilization_failure() {
        // Depth 1 and depth 2 runs land on grids of different colors, and
        // there is only one descriptor of each depth.
        let word = vec![1, 2, 2, 1, 2, 1, 1, 2, 1, 1, 2, 2, 2, 1, 1, 2];
        let oracle = ColoringSpec::Periodic(word).build().unwrap();
        let err = infinitary_vdw(
            oracle.as_ref(),
            &big(1),
            &DiffMode::Auto,
            &WindowPlan::Assumed(vec![4, 4]),
            &[2, 2],
            2,
            2,
        )
        .unwrap_err();
        assert!(
            matches!(err, ConstructError::StabilizationFailed { depth: 2, horizon: 2 }),
            "{err}"
        );
    }

    #[test]
    fn infinitary_surfaces_window_exhaustion() {
        let err = infinitary_vdw(
            oracle("periodic:1,2").as_ref(),
            &big(1),
            &DiffMode::Auto,
            &WindowPlan::Assumed(vec![2]),
            &[2],
            1,
            1,
        )
        .unwrap_err();
        assert!(matches!(err, ConstructError::WindowExhausted { level: 1 }));
    }

    #[test]
    fn level_params_validation_rejects_bad_shapes() {
        assert!(LevelParams::new(big(0), bigs(&[1]), vec![3], vec![2], 2).is_err());
        assert!(LevelParams::new(big(1), bigs(&[1, 2]), vec![3, 3], vec![2, 2], 2).is_err());
        assert!(LevelParams::new(big(1), bigs(&[1, 3]), vec![3, 3], vec![3, 2], 2).is_err());
        assert!(LevelParams::new(big(1), bigs(&[1]), vec![3], vec![2], 0).is_err());
        assert!(LevelParams::new(big(1), bigs(&[1, 3]), vec![3, 3], vec![2, 2], 2).is_ok());
    }
}

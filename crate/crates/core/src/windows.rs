//! Window arithmetic: exact van der Waerden numbers, monochromatic
//! progression search in finite words, and induced product colorings.
//!
//! `W(k, c)` is the least n such that every c-coloring of `{1..n}` contains a
//! monochromatic arithmetic progression of length k. [`vdw_number`] computes
//! it exactly by exhaustive backtracking over colorings, pruning every
//! partial word that already contains a monochromatic k-progression and
//! identifying colorings up to palette renaming. The certificate of
//! exactness is the extremal coloring of `{1..W-1}` it returns.
//!
//! A [`WindowPlan`] decides which window sizes the grid search may rely on:
//! `certified` computes them (feasible only for tiny parameters), `assumed`
//! takes them on trust from the user, and `adaptive` starts small and lets
//! the caller regrow on failure.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coloring::{Coloring, ColoringError};

#[derive(Debug, Error)]
pub enum WindowError {
    #[error("search budget exceeded after examining {examined} partial colorings")]
    BudgetExceeded { examined: u64 },
    #[error("window plan has no entry for level {level}")]
    PlanExhausted { level: usize },
    #[error("invalid window parameters: {0}")]
    Spec(String),
    #[error(transparent)]
    Coloring(#[from] ColoringError),
}

/// A monochromatic progression inside a word: positions `start`,
/// `start + step`, ..., `start + (length-1)*step`, all 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApWitness {
    #[serde(with = "crate::dec::u64_str")]
    pub start: u64,
    #[serde(with = "crate::dec::u64_str")]
    pub step: u64,
    #[serde(with = "crate::dec::u64_str")]
    pub length: u64,
}

/// Least-(start, step) monochromatic k-progression in the word, or None.
///
/// Scans starts ascending and steps ascending within each start, so the
/// returned witness is the lexicographic minimum; every later module leans
/// on that for reproducible traces.
pub fn find_mono_ap(word: &[u32], k: u64) -> Option<ApWitness> {
    assert!(k >= 2, "progression length must be at least 2");
    let n = word.len();
    let k_us = usize::try_from(k).ok()?;
    if n < k_us {
        return None;
    }
    if k == 2 {
        // The least step at a given start is the distance to the next
        // occurrence of the same value; precomputing those keeps long label
        // words linear instead of quadratic.
        let mut next: Vec<Option<usize>> = vec![None; n];
        let mut last_seen: HashMap<u32, usize> = HashMap::new();
        for i in (0..n).rev() {
            next[i] = last_seen.get(&word[i]).copied();
            last_seen.insert(word[i], i);
        }
        for (start, nx) in next.iter().enumerate() {
            if let Some(j) = nx {
                return Some(ApWitness {
                    start: start as u64,
                    step: (j - start) as u64,
                    length: 2,
                });
            }
        }
        return None;
    }
    for start in 0..n {
        let max_step = (n - 1 - start) / (k_us - 1);
        'step: for step in 1..=max_step {
            let v = word[start];
            for j in 1..k_us {
                if word[start + j * step] != v {
                    continue 'step;
                }
            }
            return Some(ApWitness {
                start: start as u64,
                step: step as u64,
                length: k,
            });
        }
    }
    None
}

/// An exact van der Waerden number together with its extremal certificate: a
/// coloring of `{1..value-1}` with no monochromatic k-progression.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VdwResult {
    pub value: u64,
    pub extremal: Vec<u32>,
}

/// Exact `W(k, colors)` by exhaustive backtracking.
///
/// The budget caps the number of partial colorings examined across the whole
/// run. Palettes at least as large as the budget fail immediately: the
/// answer is at least `colors + 1`, and certifying any n requires examining
/// at least one coloring per window size, so such a run can never finish
/// within budget.
pub fn vdw_number(k: u64, colors: &BigUint, budget: u64) -> Result<VdwResult, WindowError> {
    if k < 2 {
        return Err(WindowError::Spec("progression length must be >= 2".into()));
    }
    if *colors < BigUint::from(1u32) {
        return Err(WindowError::Spec("palette must be >= 1".into()));
    }
    if *colors >= BigUint::from(budget) {
        return Err(WindowError::BudgetExceeded { examined: 0 });
    }
    let c = colors.to_u64().expect("below budget, fits u64");
    let mut examined = 0u64;
    let mut extremal = vec![1u32; (k - 1) as usize];
    for n in k.. {
        let mut word = Vec::with_capacity(n as usize);
        match extend(&mut word, n as usize, k, c, 0, budget, &mut examined)? {
            true => extremal = word,
            false => return Ok(VdwResult { value: n, extremal }),
        }
    }
    unreachable!("every palette is eventually defeated")
}

/// Depth-first search for a k-progression-free c-coloring of `{1..n}`.
/// Colors are tried in canonical order (at most one color not yet used), so
/// the search ranges over colorings up to palette renaming; progression
/// freeness is invariant under renaming, making the reduction complete.
fn extend(
    word: &mut Vec<u32>,
    n: usize,
    k: u64,
    c: u64,
    used: u64,
    budget: u64,
    examined: &mut u64,
) -> Result<bool, WindowError> {
    if word.len() == n {
        return Ok(true);
    }
    let limit = (used + 1).min(c);
    for color in 1..=limit {
        *examined += 1;
        if *examined > budget {
            return Err(WindowError::BudgetExceeded {
                examined: *examined,
            });
        }
        word.push(color as u32);
        if !mono_ap_ending_at_last(word, k)
            && extend(word, n, k, c, used.max(color), budget, examined)?
        {
            return Ok(true);
        }
        word.pop();
    }
    Ok(false)
}

fn mono_ap_ending_at_last(word: &[u32], k: u64) -> bool {
    let i = word.len() - 1;
    let v = word[i];
    let span = (k - 1) as usize;
    let mut step = 1;
    while step * span <= i {
        if (1..=span).all(|j| word[i - j * step] == v) {
            return true;
        }
        step += 1;
    }
    false
}

/// Colors a word of blocks: two positions get the same label exactly when
/// their blocks agree color-for-color under the oracle. Labels are interned
/// integers in order of first appearance, starting at 0.
pub fn product_coloring(
    oracle: &dyn Coloring,
    blocks: &[Vec<BigUint>],
) -> Result<Vec<u32>, WindowError> {
    if let Some(first) = blocks.first() {
        if blocks.iter().any(|b| b.len() != first.len()) {
            return Err(WindowError::Spec("blocks must have equal size".into()));
        }
        if first.is_empty() {
            return Err(WindowError::Spec("blocks must be nonempty".into()));
        }
    }
    let mut interned: HashMap<Vec<u32>, u32> = HashMap::new();
    let mut labels = Vec::with_capacity(blocks.len());
    for block in blocks {
        let mut tuple = Vec::with_capacity(block.len());
        for x in block {
            tuple.push(oracle.color_of(x)?.0);
        }
        let fresh = interned.len() as u32;
        labels.push(*interned.entry(tuple).or_insert(fresh));
    }
    Ok(labels)
}

/// How window sizes are obtained, level by level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WindowPlan {
    /// Compute `W(k_i, c^(W_1*...*W_{i-1}))` exactly, within the node budget.
    Certified { budget: u64 },
    /// Trust the given per-level windows; each must be at least 2. The list
    /// need not be monotone: regrown or recycled schedules are legitimate.
    Assumed(Vec<u64>),
    /// Start every level at `start` and let the search regrow a failing
    /// level by `factor`, capped at `max`.
    Adaptive { start: u64, factor: u64, max: u64 },
}

impl WindowPlan {
    /// Parses `certified:<budget>`, `assumed:<w1,w2,...>`, or
    /// `adaptive:<start>,<factor>,<max>`.
    pub fn parse(s: &str) -> Result<Self, WindowError> {
        let bad = |msg: &str| WindowError::Spec(format!("{msg} in {s:?}"));
        let (kind, rest) = s.split_once(':').ok_or_else(|| bad("missing ':'"))?;
        match kind {
            "certified" => {
                let budget: u64 = rest.parse().map_err(|_| bad("bad budget"))?;
                if budget == 0 {
                    return Err(bad("budget must be positive"));
                }
                Ok(WindowPlan::Certified { budget })
            }
            "assumed" => {
                let windows = rest
                    .split(',')
                    .map(|t| t.trim().parse::<u64>().map_err(|_| bad("bad window")))
                    .collect::<Result<Vec<_>, _>>()?;
                let plan = WindowPlan::Assumed(windows);
                plan.validate().map(|_| plan)
            }
            "adaptive" => {
                let parts: Vec<&str> = rest.split(',').collect();
                if parts.len() != 3 {
                    return Err(bad("expected adaptive:<start>,<factor>,<max>"));
                }
                let nums = parts
                    .iter()
                    .map(|t| t.trim().parse::<u64>().map_err(|_| bad("bad number")))
                    .collect::<Result<Vec<u64>, _>>()?;
                let plan = WindowPlan::Adaptive {
                    start: nums[0],
                    factor: nums[1],
                    max: nums[2],
                };
                plan.validate().map(|_| plan)
            }
            other => Err(bad(&format!("unknown window plan {other:?}"))),
        }
    }

    pub fn validate(&self) -> Result<(), WindowError> {
        match self {
            WindowPlan::Certified { budget } => {
                if *budget == 0 {
                    return Err(WindowError::Spec("budget must be positive".into()));
                }
            }
            WindowPlan::Assumed(ws) => {
                if ws.is_empty() {
                    return Err(WindowError::Spec("assumed plan must be nonempty".into()));
                }
                if ws.iter().any(|&w| w < 2) {
                    return Err(WindowError::Spec("windows must be at least 2".into()));
                }
            }
            WindowPlan::Adaptive { start, factor, max } => {
                if *start < 2 || *factor < 2 || max < start {
                    return Err(WindowError::Spec(
                        "adaptive plan needs start >= 2, factor >= 2, max >= start".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// The window for level i (1-based) given the windows already fixed below.
/// Certified plans take `c_eff = palette^(W_1*...*W_{i-1})`, the number of
/// ways to color one block of the level below.
pub fn window_for_level(
    plan: &WindowPlan,
    level: usize,
    length: u64,
    palette: u32,
    prior: &[u64],
) -> Result<u64, WindowError> {
    assert_eq!(prior.len(), level - 1, "prior windows up to the level below");
    match plan {
        WindowPlan::Certified { budget } => {
            let c_eff = effective_palette(palette, prior)?;
            Ok(vdw_number(length, &c_eff, *budget)?.value)
        }
        WindowPlan::Assumed(ws) => ws
            .get(level - 1)
            .copied()
            .ok_or(WindowError::PlanExhausted { level }),
        WindowPlan::Adaptive { start, .. } => Ok(*start),
    }
}

fn effective_palette(palette: u32, prior: &[u64]) -> Result<BigUint, WindowError> {
    if palette == 1 {
        return Ok(BigUint::from(1u32));
    }
    let mut exp: u64 = 1;
    for &w in prior {
        exp = exp.checked_mul(w).unwrap_or(u64::MAX);
        if exp > u32::MAX as u64 {
            // palette^exp >= 2^(2^32): no budget survives the search.
            return Err(WindowError::BudgetExceeded { examined: 0 });
        }
    }
    Ok(BigUint::from(palette).pow(exp as u32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::ColoringSpec;
    use proptest::prelude::*;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    fn ap(start: u64, step: u64, length: u64) -> ApWitness {
        ApWitness {
            start,
            step,
            length,
        }
    }

    // Plain double-loop scan, kept deliberately separate from the
    // implementation (which special-cases length 2).
    fn brute_ap(word: &[u32], k: usize) -> Option<(usize, usize)> {
        for start in 0..word.len() {
            for step in 1.. {
                if start + (k - 1) * step >= word.len() {
                    break;
                }
                if (0..k).all(|j| word[start + j * step] == word[start]) {
                    return Some((start, step));
                }
            }
        }
        None
    }

    #[test]
    fn mono_ap_examples() {
        assert_eq!(find_mono_ap(&[1, 2, 1, 2, 1], 3), Some(ap(0, 2, 3)));
        assert_eq!(find_mono_ap(&[1, 1, 1], 3), Some(ap(0, 1, 3)));
        assert_eq!(find_mono_ap(&[1, 2, 2, 1], 3), None);
        assert_eq!(find_mono_ap(&[1, 2, 1], 2), Some(ap(0, 2, 2)));
        assert_eq!(find_mono_ap(&[1, 2], 3), None);
        assert_eq!(find_mono_ap(&[], 2), None);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(512))]
        #[test]
        fn mono_ap_matches_brute_force(
            word in proptest::collection::vec(1u32..4, 0..12),
            k in 2u64..5,
        ) {
            let got = find_mono_ap(&word, k).map(|w| (w.start as usize, w.step as usize));
            prop_assert_eq!(got, brute_ap(&word, k as usize));
        }

        #[test]
        fn mono_ap_witness_fits_the_word(
            word in proptest::collection::vec(1u32..3, 0..40),
            k in 2u64..4,
        ) {
            if let Some(w) = find_mono_ap(&word, k) {
                let end = w.start + (k - 1) * w.step;
                prop_assert!(w.step >= 1);
                prop_assert!((end as usize) < word.len());
                prop_assert!(w.step <= (word.len() as u64 - 1) / (k - 1));
                let v = word[w.start as usize];
                for j in 0..k {
                    prop_assert_eq!(word[(w.start + j * w.step) as usize], v);
                }
            }
        }
    }

    #[test]
    fn vdw_one_color_is_the_length() {
        for k in 2..=6u64 {
            let r = vdw_number(k, &big(1), 100_000).unwrap();
            assert_eq!(r.value, k);
            assert_eq!(r.extremal.len() as u64, k - 1);
        }
    }

    #[test]
    fn vdw_length_two_is_pigeonhole() {
        for c in 1..=6u64 {
            let r = vdw_number(2, &big(c), 1_000_000).unwrap();
            assert_eq!(r.value, c + 1, "W(2, {c})");
            assert_eq!(r.extremal.len() as u64, c);
            assert!(brute_ap(&r.extremal, 2).is_none());
        }
    }

    #[test]
    fn vdw_three_two_is_nine() {
        let r = vdw_number(3, &big(2), 1_000_000).unwrap();
        assert_eq!(r.value, 9);
        assert_eq!(r.extremal.len(), 8);
        assert!(brute_ap(&r.extremal, 3).is_none());
        assert!(r.extremal.iter().all(|&c| c == 1 || c == 2));
    }

    #[test]
    fn vdw_certified_windows_are_sound() {
        for (k, c) in [(2u64, 2u64), (2, 3), (3, 2)] {
            let r = vdw_number(k, &big(c), 1_000_000).unwrap();
            assert!(brute_ap(&r.extremal, k as usize).is_none());
            // Every coloring of the full window must contain a progression;
            // sample colorings from the deterministic mix.
            let spec = format!("rand:9:{c}");
            for round in 0..200u64 {
                let oracle = ColoringSpec::parse(&spec).unwrap().build().unwrap();
                let word: Vec<u32> = (1..=r.value)
                    .map(|i| oracle.color_of(&big(round * 1000 + i)).unwrap().0)
                    .collect();
                assert!(
                    find_mono_ap(&word, k).is_some(),
                    "progression-free coloring of a certified window: {word:?}"
                );
            }
        }
    }

    #[test]
    fn vdw_budget_is_honored() {
        assert!(matches!(
            vdw_number(3, &big(3), 50),
            Err(WindowError::BudgetExceeded { .. })
        ));
        // Palette too large to ever finish: refused up front.
        let huge = BigUint::parse_bytes(b"1000000000000000000000000000000", 10).unwrap();
        assert!(matches!(
            vdw_number(2, &huge, 1_000_000),
            Err(WindowError::BudgetExceeded { examined: 0 })
        ));
    }

    #[test]
    fn vdw_rejects_degenerate_parameters() {
        assert!(vdw_number(1, &big(2), 100).is_err());
        assert!(vdw_number(2, &big(0), 100).is_err());
    }

    #[test]
    fn product_coloring_interns_by_first_appearance() {
        let oracle = ColoringSpec::parse("periodic:1,2").unwrap().build().unwrap();
        let blocks = vec![
            vec![big(1), big(2)],
            vec![big(6), big(7)],
            vec![big(11), big(12)],
        ];
        assert_eq!(product_coloring(oracle.as_ref(), &blocks).unwrap(), vec![0, 1, 0]);
        let single = vec![vec![big(3), big(4), big(5)]];
        assert_eq!(product_coloring(oracle.as_ref(), &single).unwrap(), vec![0]);
    }

    #[test]
    fn product_coloring_of_singletons_mirrors_colors() {
        let oracle = ColoringSpec::parse("periodic:2,1,3").unwrap().build().unwrap();
        let blocks: Vec<Vec<BigUint>> = (1..=7u64).map(|n| vec![big(n)]).collect();
        let labels = product_coloring(oracle.as_ref(), &blocks).unwrap();
        // Same label exactly when same color.
        for i in 0..blocks.len() {
            for j in 0..blocks.len() {
                let ci = oracle.color_of(&blocks[i][0]).unwrap();
                let cj = oracle.color_of(&blocks[j][0]).unwrap();
                assert_eq!(labels[i] == labels[j], ci == cj);
            }
        }
        assert_eq!(labels[0], 0);
    }

    #[test]
    fn product_coloring_rejects_ragged_blocks() {
        let oracle = ColoringSpec::parse("const:1").unwrap().build().unwrap();
        let blocks = vec![vec![big(1)], vec![big(2), big(3)]];
        assert!(matches!(
            product_coloring(oracle.as_ref(), &blocks),
            Err(WindowError::Spec(_))
        ));
    }

    #[test]
    fn window_for_level_certified_chain() {
        let plan = WindowPlan::Certified { budget: 1_000_000 };
        let w1 = window_for_level(&plan, 1, 2, 2, &[]).unwrap();
        assert_eq!(w1, 3);
        // One level up the effective palette is 2^3 = 8 block colorings.
        let w2 = window_for_level(&plan, 2, 2, 2, &[w1]).unwrap();
        assert_eq!(w2, 9);
        let w1 = window_for_level(&plan, 1, 3, 2, &[]).unwrap();
        assert_eq!(w1, 9);
    }

    #[test]
    fn window_for_level_assumed_and_adaptive() {
        let plan = WindowPlan::parse("assumed:3,9").unwrap();
        assert_eq!(window_for_level(&plan, 1, 2, 2, &[]).unwrap(), 3);
        assert_eq!(window_for_level(&plan, 2, 2, 2, &[3]).unwrap(), 9);
        assert!(matches!(
            window_for_level(&plan, 3, 2, 2, &[3, 9]),
            Err(WindowError::PlanExhausted { level: 3 })
        ));
        let plan = WindowPlan::parse("adaptive:4,2,64").unwrap();
        assert_eq!(window_for_level(&plan, 5, 2, 2, &[4, 4, 4, 4]).unwrap(), 4);
    }

    #[test]
    fn window_plans_parse_and_validate() {
        assert!(WindowPlan::parse("certified:100000").is_ok());
        assert!(WindowPlan::parse("assumed:3,9,27").is_ok());
        assert!(WindowPlan::parse("assumed:9,3").is_ok());
        assert!(WindowPlan::parse("adaptive:4,2,64").is_ok());
        for bad in [
            "certified:0",
            "assumed:",
            "assumed:1,3",
            "adaptive:4,1,64",
            "adaptive:4,2",
            "adaptive:4,2,2",
            "mystery:1",
            "assumed",
        ] {
            assert!(WindowPlan::parse(bad).is_err(), "{bad:?} should fail");
        }
    }
}

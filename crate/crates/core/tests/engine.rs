//! Cross-module integration: certified window chains feeding the grid
//! search, stabilization across truncation depths, and the verifier's
//! independence from the constructions whose claims it audits.

use num_bigint::BigUint;

use monogrid::coloring::{Color, ColoringSpec};
use monogrid::construct::{self, DiffMode, LevelParams};
use monogrid::dichotomy::{self, Budgets, DichotomyOutcome, DriverOutcome, LengthSchedule};
use monogrid::grid;
use monogrid::verify::{self, Verdict};
use monogrid::windows::WindowPlan;

fn big(n: u64) -> BigUint {
    BigUint::from(n)
}

fn bigs(ns: &[u64]) -> Vec<BigUint> {
    ns.iter().copied().map(BigUint::from).collect()
}

#[test]
fn certified_windows_chain_through_the_effective_palette() {
    // The level-2 window certifies against one coloring per block of the
    // level-1 window: 2^3 = 8 effective colors, and W(2, 8) = 9.
    let plan = WindowPlan::Certified { budget: 10_000_000 };
    assert_eq!(construct::resolve_windows(&plan, &[2, 2], 2).unwrap(), [3, 9]);
    assert_eq!(construct::resolve_windows(&plan, &[3], 2).unwrap(), [9]);
    assert_eq!(construct::resolve_windows(&plan, &[2], 6).unwrap(), [7]);
}

#[test]
fn the_certified_chain_carries_the_grid_search() {
    let plan = WindowPlan::Certified { budget: 10_000_000 };
    let windows = construct::resolve_windows(&plan, &[2, 2], 2).unwrap();
    let diffs = grid::minimal_diffs(&windows);
    assert_eq!(diffs, bigs(&[1, 3]));
    for spec in ["periodic:1,2", "rand:5:2", "rand:23:2"] {
        let oracle = ColoringSpec::parse(spec).unwrap().build().unwrap();
        let params = LevelParams::new(
            big(1),
            diffs.clone(),
            windows.clone(),
            vec![2, 2],
            2,
        )
        .unwrap();
        let w = construct::find_mono_grid(oracle.as_ref(), &params).unwrap();
        assert!(w.alphas.iter().zip(&windows).all(|(&a, &ww)| a >= 1 && a <= ww - 1));
        let verdict = verify::verify_grid_witness(oracle.as_ref(), &w, 2).unwrap();
        assert!(verdict.is_ok(), "{spec}: {verdict:?}");
    }
}

#[test]
fn stabilization_pins_strides_across_depths() {
    // Period two survives every truncation depth: each level's blocks
    // alternate between two tuples, so the same least progression keeps
    // winning and all four descriptors agree stride for stride.
    let oracle = ColoringSpec::parse("periodic:1,2").unwrap().build().unwrap();
    let w = construct::infinitary_vdw(
        oracle.as_ref(),
        &big(1),
        &DiffMode::Auto,
        &WindowPlan::Assumed(vec![3, 33, 33, 33]),
        &[2, 2, 2, 2],
        4,
        4,
    )
    .unwrap();
    assert_eq!(w.indices, [1, 2, 3, 4]);
    assert_eq!(w.triple.diffs, bigs(&[2, 6, 198, 6534]));
    assert_eq!(w.triple.bases, bigs(&[1, 1, 1, 1]));
    assert_eq!(w.color, Color(1));
    let verdict = verify::verify_triple(oracle.as_ref(), &w.triple, w.color, 4).unwrap();
    assert!(verdict.is_ok(), "{verdict:?}");

    // The verifier re-derives everything: a nudged stride is caught even
    // though the witness structure still parses.
    let mut bent = w.triple.clone();
    bent.diffs[2] += 1u32;
    let verdict = verify::verify_triple(oracle.as_ref(), &bent, w.color, 4).unwrap();
    assert!(matches!(verdict, Verdict::CounterexampleAt { .. }), "{verdict:?}");
}

#[test]
fn the_verifier_is_blind_to_construction_claims() {
    let oracle = ColoringSpec::parse("periodic:1,2").unwrap().build().unwrap();
    let out = dichotomy::dichotomy(
        oracle.as_ref(),
        &big(2),
        2,
        &LengthSchedule::parse("affine:1,1").unwrap(),
        &WindowPlan::Assumed(vec![4, 9]),
        &DiffMode::Explicit(bigs(&[2, 8])),
        &Budgets {
            depth: 2,
            horizon: 2,
            blocks: 2,
            block_horizon: 2,
            block_size: 1,
            verify_depth: 2,
        },
    )
    .unwrap();
    let w = match out {
        DichotomyOutcome::Case1(w) => w,
        other => panic!("expected case 1, got {other:?}"),
    };
    assert_eq!(w.dset, bigs(&[2, 8]));
    assert!(verify::verify_case1(oracle.as_ref(), &w, 2).unwrap().is_ok());

    // Tearing the d-set away from the grid diffs is a structural flaw.
    let mut torn = w.clone();
    torn.dset[0] = big(4);
    let verdict = verify::verify_case1(oracle.as_ref(), &torn, 2).unwrap();
    assert!(matches!(verdict, Verdict::StructureFailure(_)), "{verdict:?}");

    // Moving both onto an odd number keeps the shape but breaks the color.
    let mut moved = w.clone();
    moved.dset[0] = big(3);
    moved.triple.diffs[0] = big(3);
    let verdict = verify::verify_case1(oracle.as_ref(), &moved, 2).unwrap();
    match verdict {
        Verdict::CounterexampleAt { element, level, .. } => {
            assert_eq!(element, big(3));
            assert_eq!(level, 0, "the d-set is re-queried first");
        }
        other => panic!("expected a counterexample, got {other:?}"),
    }
}

#[test]
fn file_backed_tables_feed_the_whole_engine() {
    // The two-round drive: the prefix below 200 avoids the base run's
    // color, the regrouped span re-bases there, and round two closes.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("threshold.txt");
    let word: Vec<String> = (1..=775u32)
        .map(|n| if n < 200 { "2".into() } else { "1".into() })
        .collect();
    std::fs::write(&path, word.join(" ")).unwrap();
    let spec = format!("file:{}:2", path.display());
    let oracle = ColoringSpec::parse(&spec).unwrap().build().unwrap();
    let out = dichotomy::brauer_schur(
        oracle.as_ref(),
        &big(200),
        &LengthSchedule::parse("affine:1,1").unwrap(),
        &WindowPlan::Assumed(vec![4, 9, 16]),
        &DiffMode::Auto,
        &Budgets {
            depth: 3,
            horizon: 3,
            blocks: 1,
            block_horizon: 3,
            block_size: 1,
            verify_depth: 3,
        },
    )
    .unwrap();
    let w = match out {
        DriverOutcome::Witness(w) => w,
        DriverOutcome::Inconclusive { reason, .. } => panic!("inconclusive: {reason}"),
    };
    assert_eq!(w.rounds.len(), 2);
    assert_eq!(w.witness.dset, bigs(&[36]));
    assert_eq!(w.witness.color, Color(2));
    assert!(verify::verify_case1(oracle.as_ref(), &w.witness, 1)
        .unwrap()
        .is_ok());
}

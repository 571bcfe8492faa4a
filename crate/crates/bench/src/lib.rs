//! Shared fixtures for the engine benchmarks: deterministic oracles,
//! deep grid triples, and synthetic descriptor fields sized so each
//! benchmark exercises the interesting inner loop rather than setup.

use monogrid::coloring::{Color, Coloring, ColoringSpec};
use monogrid::construct::WitnessDescriptor;
use monogrid::grid::{self, GridTriple};
use num_bigint::BigUint;

/// The period-two coloring used by the worked traces.
pub fn periodic() -> Box<dyn Coloring> {
    ColoringSpec::parse("periodic:1,2")
        .expect("the spec string is well formed")
        .build()
        .expect("a periodic table always builds")
}

/// A depth-`n` triple with window 3 at every level and minimal strides,
/// so the top level enumerates 3^n values.
pub fn deep_triple(depth: usize) -> GridTriple {
    let windows = vec![3u64; depth];
    let diffs = grid::minimal_diffs(&windows);
    let bases = vec![BigUint::from(1u32); depth];
    GridTriple::new(bases, diffs, windows).expect("minimal strides satisfy the gap law")
}

/// A field of `n` descriptors over small stride and color pools, deep
/// enough for depth-4 stabilization with plenty of near-misses.
pub fn descriptor_field(n: u64) -> Vec<WitnessDescriptor> {
    (1..=n)
        .map(|i| WitnessDescriptor {
            index: i,
            base: BigUint::from(i),
            diffs: (0..=(i % 4)).map(|t| BigUint::from(1 + (i + t) % 3)).collect(),
            color: Color(1 + (i % 3) as u32),
        })
        .collect()
}

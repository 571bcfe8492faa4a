//! Constructive witness engine for monochromatic grid structures in finite
//! colorings of the positive integers.
//!
//! The engine takes a coloring as a lazy oracle and executes, at a finite
//! truncation depth, the classical tower of constructions that leads from van
//! der Waerden's theorem to a Brauer-Schur style partition witness:
//!
//! * [`windows`] computes exact van der Waerden numbers by exhaustive search
//!   and locates monochromatic arithmetic progressions in finite words;
//! * [`construct`] extracts monochromatic grids (multi-dimensional
//!   progressions) from a window of the coloring, and stabilizes a family of
//!   such grids by pigeonhole into a single coherent witness;
//! * [`dichotomy`] runs the two-case analysis on top of a stabilized grid:
//!   either a sum-witness family exists in the target color (Case 1), or a
//!   translated sub-grid avoiding that color is constructed (Case 2), and the
//!   driver iterates the dichotomy with a shrinking palette;
//! * [`verify`] independently re-checks every certificate the searchers emit
//!   by direct enumeration and oracle queries.
//!
//! All positions and differences are arbitrary-precision: the difference
//! schedules grow faster than the product of the window sizes, so fixed-width
//! integers would overflow at shallow depths.

pub mod coloring;
pub mod construct;
pub mod dec;
pub mod dichotomy;
pub mod grid;
pub mod verify;
pub mod windows;

pub use coloring::{Color, Coloring, ColoringError, ColoringSpec};
pub use construct::{GridWitness, InfinitaryWitness, LevelParams, WitnessDescriptor};
pub use dichotomy::{
    Budgets, Case1Witness, Case2Witness, DichotomyOutcome, FinalWitness, LengthSchedule,
};
pub use grid::GridTriple;
pub use verify::Verdict;
pub use windows::{ApWitness, WindowPlan};

//! Coloring oracles over the positive integers.
//!
//! A coloring assigns every n >= 1 a color in `[1, c]` for a fixed palette
//! size c. The engine only ever sees a coloring through the [`Coloring`]
//! trait, so witnesses can be extracted from colorings that are defined
//! lazily, procedurally, or from a finite table.
//!
//! Specs are written in a small string language:
//!
//! * `const:<g>` — every integer gets color g;
//! * `periodic:<c1,c2,...>` — color of n is the entry at `((n-1) mod p) + 1`;
//! * `rand:<seed>:<c>` — a fixed 64-bit mix of n (splitmix64 finalizer),
//!   reduced mod c; deterministic across runs and platforms;
//! * `file:<path>:<c>` — whitespace-separated integers, entry i is the color
//!   of i; queries beyond the table raise [`ColoringError::SupportExhausted`].

use std::fmt;
use std::path::PathBuf;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// A color: an integer in `[1, c]` for the oracle's palette size c.
/// Serialized as a decimal string, like every other integer in artifacts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Color(pub u32);

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Serialize for Color {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for Color {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse()
            .map(Color)
            .map_err(|_| D::Error::custom(format!("not a color: {raw:?}")))
    }
}

#[derive(Debug, Error)]
pub enum ColoringError {
    #[error("malformed coloring spec: {0}")]
    Spec(String),
    #[error("coloring support exhausted at n = {0}")]
    SupportExhausted(BigUint),
}

/// A total function from positive integers to colors, except that finite
/// tables may run out of support. Implementations must be pure: the same n
/// always yields the same color.
pub trait Coloring: Send + Sync {
    fn palette_size(&self) -> u32;
    fn color_of(&self, n: &BigUint) -> Result<Color, ColoringError>;
}

/// Parsed form of a coloring spec string. `build` turns it into an oracle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ColoringSpec {
    Constant(u32),
    Periodic(Vec<u32>),
    SeededRandom { seed: u64, colors: u32 },
    FromFile { path: PathBuf, colors: u32 },
}

impl ColoringSpec {
    /// Parses the `kind:args` mini-language described in the module docs.
    pub fn parse(s: &str) -> Result<Self, ColoringError> {
        let bad = |msg: &str| ColoringError::Spec(format!("{msg} in {s:?}"));
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| bad("missing ':' separator"))?;
        match kind {
            "const" => {
                let g: u32 = rest.parse().map_err(|_| bad("bad color"))?;
                if g == 0 {
                    return Err(bad("colors are 1-based"));
                }
                Ok(ColoringSpec::Constant(g))
            }
            "periodic" => {
                let word = rest
                    .split(',')
                    .map(|t| t.trim().parse::<u32>().map_err(|_| bad("bad color entry")))
                    .collect::<Result<Vec<_>, _>>()?;
                if word.is_empty() || word.contains(&0) {
                    return Err(bad("period must be nonempty with colors >= 1"));
                }
                Ok(ColoringSpec::Periodic(word))
            }
            "rand" => {
                let (seed, colors) = rest
                    .split_once(':')
                    .ok_or_else(|| bad("expected rand:<seed>:<c>"))?;
                let seed: u64 = seed.parse().map_err(|_| bad("bad seed"))?;
                let colors: u32 = colors.parse().map_err(|_| bad("bad palette size"))?;
                if colors == 0 {
                    return Err(bad("palette size must be >= 1"));
                }
                Ok(ColoringSpec::SeededRandom { seed, colors })
            }
            "file" => {
                let (path, colors) = rest
                    .rsplit_once(':')
                    .ok_or_else(|| bad("expected file:<path>:<c>"))?;
                let colors: u32 = colors.parse().map_err(|_| bad("bad palette size"))?;
                if colors == 0 {
                    return Err(bad("palette size must be >= 1"));
                }
                Ok(ColoringSpec::FromFile {
                    path: PathBuf::from(path),
                    colors,
                })
            }
            other => Err(bad(&format!("unknown coloring kind {other:?}"))),
        }
    }

    /// Builds the oracle. File-backed specs read and validate their table
    /// here; everything else is allocation-free.
    pub fn build(&self) -> Result<Box<dyn Coloring>, ColoringError> {
        match self {
            ColoringSpec::Constant(g) => Ok(Box::new(Constant { color: Color(*g) })),
            ColoringSpec::Periodic(word) => Ok(Box::new(Periodic {
                palette: *word.iter().max().expect("nonempty"),
                word: word.iter().map(|&c| Color(c)).collect(),
            })),
            ColoringSpec::SeededRandom { seed, colors } => Ok(Box::new(SeededRandom {
                seed: *seed,
                colors: *colors,
            })),
            ColoringSpec::FromFile { path, colors } => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    ColoringError::Spec(format!("cannot read {}: {e}", path.display()))
                })?;
                let mut table = Vec::new();
                for tok in text.split_whitespace() {
                    let v: u32 = tok.parse().map_err(|_| {
                        ColoringError::Spec(format!("bad color entry {tok:?} in table"))
                    })?;
                    if v == 0 || v > *colors {
                        return Err(ColoringError::Spec(format!(
                            "table entry {v} outside palette [1, {colors}]"
                        )));
                    }
                    table.push(Color(v));
                }
                Ok(Box::new(Table {
                    table,
                    colors: *colors,
                }))
            }
        }
    }
}

struct Constant {
    color: Color,
}

impl Coloring for Constant {
    fn palette_size(&self) -> u32 {
        self.color.0
    }
    fn color_of(&self, n: &BigUint) -> Result<Color, ColoringError> {
        positive(n)?;
        Ok(self.color)
    }
}

struct Periodic {
    word: Vec<Color>,
    palette: u32,
}

impl Coloring for Periodic {
    fn palette_size(&self) -> u32 {
        self.palette
    }
    fn color_of(&self, n: &BigUint) -> Result<Color, ColoringError> {
        positive(n)?;
        let idx = (n - 1u32) % self.word.len();
        let idx = usize::try_from(&idx).expect("index below word length");
        Ok(self.word[idx])
    }
}

struct SeededRandom {
    seed: u64,
    colors: u32,
}

impl Coloring for SeededRandom {
    fn palette_size(&self) -> u32 {
        self.colors
    }
    fn color_of(&self, n: &BigUint) -> Result<Color, ColoringError> {
        positive(n)?;
        // Only n mod 2^64 matters: the first update is a wrapping multiply-add.
        let low = n.iter_u64_digits().next().unwrap_or(0);
        let z = splitmix64(self.seed, low);
        Ok(Color((z % u64::from(self.colors)) as u32 + 1))
    }
}

struct Table {
    table: Vec<Color>,
    colors: u32,
}

impl Coloring for Table {
    fn palette_size(&self) -> u32 {
        self.colors
    }
    fn color_of(&self, n: &BigUint) -> Result<Color, ColoringError> {
        positive(n)?;
        if let Ok(i) = usize::try_from(n) {
            if i <= self.table.len() {
                return Ok(self.table[i - 1]);
            }
        }
        Err(ColoringError::SupportExhausted(n.clone()))
    }
}

fn positive(n: &BigUint) -> Result<(), ColoringError> {
    if n.is_zero() {
        Err(ColoringError::Spec("coloring queried at 0".into()))
    } else {
        Ok(())
    }
}

/// The splitmix64 finalizer over `seed + n * golden`, wrapping mod 2^64.
fn splitmix64(seed: u64, n: u64) -> u64 {
    let mut z = seed.wrapping_add(n.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

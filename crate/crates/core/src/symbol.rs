//! PAM4 alphabet, Gray bit mapping and the threshold slicer.

use std::fmt;
use std::ops::Deref;

use crate::error::{MlseError, Result};

/// Alphabet size.
pub const ALPHABET: usize = 4;

/// One PAM4 amplitude level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(i8)]
pub enum Pam4Symbol {
    Neg3 = -3,
    Neg1 = -1,
    Pos1 = 1,
    Pos3 = 3,
}

impl Pam4Symbol {
    /// All levels in ascending order. The position in this array is the state index.
    pub const ALL: [Pam4Symbol; ALPHABET] = [
        Pam4Symbol::Neg3,
        Pam4Symbol::Neg1,
        Pam4Symbol::Pos1,
        Pam4Symbol::Pos3,
    ];

    #[inline]
    pub fn level(self) -> i8 {
        self as i8
    }

    #[inline]
    pub fn value(self) -> f64 {
        self as i8 as f64
    }

    /// State index 0..4, ascending in level.
    #[inline]
    pub fn index(self) -> usize {
        match self {
            Pam4Symbol::Neg3 => 0,
            Pam4Symbol::Neg1 => 1,
            Pam4Symbol::Pos1 => 2,
            Pam4Symbol::Pos3 => 3,
        }
    }

    #[inline]
    pub fn from_index(i: usize) -> Pam4Symbol {
        Self::ALL[i]
    }

    pub fn from_level(level: i64) -> Option<Pam4Symbol> {
        match level {
            -3 => Some(Pam4Symbol::Neg3),
            -1 => Some(Pam4Symbol::Neg1),
            1 => Some(Pam4Symbol::Pos1),
            3 => Some(Pam4Symbol::Pos3),
            _ => None,
        }
    }

    /// The mirrored level `-s`.
    #[inline]
    pub fn negate(self) -> Pam4Symbol {
        Self::ALL[3 - self.index()]
    }

    /// Gray-coded bit pair `(msb, lsb)`: -3 -> 00, -1 -> 01, 1 -> 11, 3 -> 10.
    pub fn bits(self) -> (u8, u8) {
        match self {
            Pam4Symbol::Neg3 => (0, 0),
            Pam4Symbol::Neg1 => (0, 1),
            Pam4Symbol::Pos1 => (1, 1),
            Pam4Symbol::Pos3 => (1, 0),
        }
    }

    pub fn from_bits(msb: u8, lsb: u8) -> Pam4Symbol {
        match (msb & 1, lsb & 1) {
            (0, 0) => Pam4Symbol::Neg3,
            (0, 1) => Pam4Symbol::Neg1,
            (1, 1) => Pam4Symbol::Pos1,
            _ => Pam4Symbol::Pos3,
        }
    }
}

impl fmt::Display for Pam4Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.level())
    }
}

/// Nearest PAM4 level. Decision thresholds sit at -2, 0 and +2; a value exactly
/// on a threshold goes to the lower level.
pub fn slice_pam4(x: f64) -> Pam4Symbol {
    if x <= -2.0 {
        Pam4Symbol::Neg3
    } else if x <= 0.0 {
        Pam4Symbol::Neg1
    } else if x <= 2.0 {
        Pam4Symbol::Pos1
    } else {
        Pam4Symbol::Pos3
    }
}

/// Subset of the alphabet, stored as a bitmask over state indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StateSet(u8);

impl StateSet {
    pub const FULL: StateSet = StateSet(0b1111);
    pub const EMPTY: StateSet = StateSet(0);

    pub fn from_symbols(symbols: &[Pam4Symbol]) -> Self {
        StateSet(symbols.iter().fold(0u8, |m, s| m | (1 << s.index())))
    }

    pub fn single(s: Pam4Symbol) -> Self {
        StateSet(1 << s.index())
    }

    #[inline]
    pub fn contains_index(self, i: usize) -> bool {
        self.0 & (1 << i) != 0
    }

    pub fn contains(self, s: Pam4Symbol) -> bool {
        self.contains_index(s.index())
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn intersect(self, other: StateSet) -> StateSet {
        StateSet(self.0 & other.0)
    }

    /// Member state indices in ascending level order.
    #[inline]
    pub fn indices(self) -> impl Iterator<Item = usize> {
        (0..ALPHABET).filter(move |&i| self.contains_index(i))
    }

    pub fn symbols(self) -> Vec<Pam4Symbol> {
        self.indices().map(Pam4Symbol::from_index).collect()
    }
}

/// A non-empty sequence of transmitted (or decided) symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolFrame(Vec<Pam4Symbol>);

impl SymbolFrame {
    pub fn new(symbols: Vec<Pam4Symbol>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(MlseError::EmptyInput);
        }
        Ok(SymbolFrame(symbols))
    }

    pub fn from_levels(levels: &[i64]) -> Option<Self> {
        let symbols = levels
            .iter()
            .map(|&l| Pam4Symbol::from_level(l))
            .collect::<Option<Vec<_>>>()?;
        SymbolFrame::new(symbols).ok()
    }

    pub fn symbols(&self) -> &[Pam4Symbol] {
        &self.0
    }

    pub fn values(&self) -> Vec<f64> {
        self.0.iter().map(|s| s.value()).collect()
    }

    pub fn into_inner(self) -> Vec<Pam4Symbol> {
        self.0
    }
}

impl Deref for SymbolFrame {
    type Target = [Pam4Symbol];

    fn deref(&self) -> &[Pam4Symbol] {
        &self.0
    }
}

/// Gray-maps bit pairs onto PAM4 levels (00 -> -3, 01 -> -1, 11 -> 1, 10 -> 3).
pub fn map_pam4(bits: &[u8]) -> Result<SymbolFrame> {
    if bits.len() % 2 != 0 {
        return Err(MlseError::OddBitCount(bits.len()));
    }
    let symbols = bits
        .chunks_exact(2)
        .map(|p| Pam4Symbol::from_bits(p[0], p[1]))
        .collect();
    SymbolFrame::new(symbols)
}

pub fn demap_pam4(symbols: &[Pam4Symbol]) -> Vec<u8> {
    symbols
        .iter()
        .flat_map(|s| {
            let (m, l) = s.bits();
            [m, l]
        })
        .collect()
}

/// Number of positions where the two bit sequences differ (over the common prefix).
pub fn count_bit_errors(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

pub fn count_symbol_errors(a: &[Pam4Symbol], b: &[Pam4Symbol]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

//! Empirical tallies and entropy arithmetic.
//!
//! All entropies are in bits with the convention `0 * log2(0) = 0`.

use serde::Serialize;

use crate::bits::BitWord;
use crate::combinatorics::{log2_binomial, log2_multinomial};
use crate::error::{Error, Result};

/// Single-symbol tally of a word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SymbolCounts {
    pub n0: u64,
    pub n1: u64,
}

impl SymbolCounts {
    pub fn of(word: &BitWord) -> Self {
        let n1 = word.weight() as u64;
        Self {
            n0: word.len() as u64 - n1,
            n1,
        }
    }

    pub fn n(&self) -> u64 {
        self.n0 + self.n1
    }

    /// Fraction of ones.
    pub fn p(&self) -> f64 {
        self.n1 as f64 / self.n() as f64
    }

    pub fn entropy(&self) -> f64 {
        binary_entropy(self.p()).expect("frequency lies in [0, 1]")
    }
}

/// Aligned pair tally of two equal-length words; `cXY` counts positions with
/// `x_i = X` and `y_i = Y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PairCounts {
    pub c00: u64,
    pub c01: u64,
    pub c10: u64,
    pub c11: u64,
}

impl PairCounts {
    pub fn new(c00: u64, c01: u64, c10: u64, c11: u64) -> Self {
        Self { c00, c01, c10, c11 }
    }

    pub fn of(x: &BitWord, y: &BitWord) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch(x.len(), y.len()));
        }
        let mut c = [0u64; 4];
        for (&a, &b) in x.bits().iter().zip(y.bits()) {
            c[usize::from(a * 2 + b)] += 1;
        }
        Ok(Self::new(c[0], c[1], c[2], c[3]))
    }

    pub fn n(&self) -> u64 {
        self.c00 + self.c01 + self.c10 + self.c11
    }

    pub fn cells(&self) -> [u64; 4] {
        [self.c00, self.c01, self.c10, self.c11]
    }

    /// Tally of `x`.
    pub fn x_marginal(&self) -> SymbolCounts {
        SymbolCounts {
            n0: self.c00 + self.c01,
            n1: self.c10 + self.c11,
        }
    }

    /// Tally of `y`.
    pub fn y_marginal(&self) -> SymbolCounts {
        SymbolCounts {
            n0: self.c00 + self.c10,
            n1: self.c01 + self.c11,
        }
    }

    /// `H(X | Y = b)` together with the class weight `p(Y = b)`, or `None`
    /// when the class is empty.
    pub fn class_entropy(&self, b: u8) -> Option<(f64, f64)> {
        let (zeros, ones) = match b {
            0 => (self.c00, self.c10),
            _ => (self.c01, self.c11),
        };
        let size = zeros + ones;
        if size == 0 {
            return None;
        }
        let h = binary_entropy(ones as f64 / size as f64).expect("frequency in [0, 1]");
        Some((h, size as f64 / self.n() as f64))
    }

    /// Joint entropy of the four cells.
    pub fn joint_entropy(&self) -> f64 {
        let n = self.n() as f64;
        self.cells()
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let q = c as f64 / n;
                -q * q.log2()
            })
            .sum()
    }
}

/// Disjoint, left-aligned 2-bit block tally. An odd trailing bit is excluded
/// and flagged in `tail`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BlockCounts {
    pub b00: u64,
    pub b01: u64,
    pub b10: u64,
    pub b11: u64,
    pub tail: u8,
}

impl BlockCounts {
    pub fn blocks(&self) -> u64 {
        self.b00 + self.b01 + self.b10 + self.b11
    }

    pub fn as_array(&self) -> [u64; 4] {
        [self.b00, self.b01, self.b10, self.b11]
    }
}

/// Number of ones.
pub fn weight(word: &BitWord) -> u64 {
    word.weight() as u64
}

/// `-p log2 p - (1-p) log2 (1-p)`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("probability {p} outside [0, 1]")));
    }
    let term = |q: f64| if q > 0.0 { -q * q.log2() } else { 0.0 };
    Ok(term(p) + term(1.0 - p))
}

/// `log2 C(n, k)`, the log-size of the weight-`k` shell of length `n`.
pub fn shell_log_size(n: u64, k: u64) -> Result<f64> {
    log2_binomial(n, k)
}

/// Empirical conditional entropy `H(X | Y)`; empty classes contribute zero.
pub fn conditional_entropy(pc: &PairCounts) -> f64 {
    if pc.n() == 0 {
        return 0.0;
    }
    [0u8, 1]
        .iter()
        .filter_map(|&b| pc.class_entropy(b))
        .map(|(h, w)| w * h)
        .sum()
}

/// Empirical mutual information `H(X) + H(Y) - H(X, Y)`.
pub fn mutual_information_emp(pc: &PairCounts) -> f64 {
    if pc.n() == 0 {
        return 0.0;
    }
    pc.x_marginal().entropy() + pc.y_marginal().entropy() - pc.joint_entropy()
}

pub fn block_counts(word: &BitWord) -> BlockCounts {
    let mut c = [0u64; 4];
    for pair in word.bits().chunks_exact(2) {
        c[usize::from(pair[0] * 2 + pair[1])] += 1;
    }
    BlockCounts {
        b00: c[0],
        b01: c[1],
        b10: c[2],
        b11: c[3],
        tail: (word.len() % 2) as u8,
    }
}

/// `log2` of the number of block sequences with the given block tally.
pub fn block_shell_log_size(bc: &BlockCounts) -> f64 {
    log2_multinomial(&bc.as_array())
}

//! Entropy-normalized complexity statistics for finite binary words.
//!
//! Effective coders stand in for Kolmogorov complexity; the empirical
//! entropy `n*H` of a word is the baseline. The ratio `R = K_eff / (n*H)`
//! sits near 1 for words that look typical inside their weight shell and
//! drops well below 1 for structured words.
//!
//! * [`entropy`]: tallies, binary/conditional/mutual entropies, shell sizes
//! * [`shell`]: enumerative rank/unrank coding within a shell
//! * [`coders`]: the registry of computable description lengths
//! * [`stats`]: `KA`, `R` and deficiency reports
//! * [`testing`]: deficiency tests, prefix scans, audits, calibration
//! * [`sim`]: seeded sources and convergence traces
//! * [`cli`]: the `adjc` command-line front end

pub mod bits;
pub mod cli;
pub mod coders;
pub mod combinatorics;
pub mod elias;
pub mod entropy;
pub mod error;
pub mod input;
pub mod shell;
pub mod sim;
pub mod stats;
pub mod testing;

pub use bits::BitWord;
pub use coders::{CodeResult, CoderId, LengthMode};
pub use error::{Error, Result};
pub use stats::{
    adjusted, adjusted_conditional, adjusted_mutual, AdjustedReport, ConditionalReport,
    MutualReport,
};
pub use testing::{test_word, Decision, TestConfig, TestVerdict};

//! Seeded generators for Bernoulli, exchangeable-mixture and block-constrained
//! sources, and drivers that trace the adjusted statistics along prefixes.
//!
//! The bit source is SplitMix64, fixed here so any implementation can
//! reproduce the exact same words:
//!
//! ```text
//! state += 0x9E3779B97F4A7C15
//! z = state
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! output z ^ (z >> 31)
//! ```
//!
//! * Bernoulli(p): one draw per bit, `u = (draw >> 11) * 2^-53`, bit = `u < p`.
//! * Mixture: component picked by one draw `u` from a second stream seeded
//!   with `derive_seed(seed, MIXTURE_STREAM)` against cumulative weights;
//!   bits then come from the main stream exactly as for Bernoulli.
//! * Block-constrained: one draw per block, `(draw * 3) >> 64` selects
//!   `00`, `01` or `11`; an odd length drops the last bit of the final block.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::bits::BitWord;
use crate::coders::{CoderId, LengthMode};
use crate::entropy::binary_entropy;
use crate::error::{Error, Result};
use crate::stats::ser_sig6;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Stream index reserved for the mixture component draw.
pub const MIXTURE_STREAM: u64 = 0x6d69_7874;

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    pub fn next_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// `floor(draw * bound / 2^64)`.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        ((u128::from(self.next_u64()) * u128::from(bound)) >> 64) as u64
    }
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent child seed for stream `index`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    mix64(seed ^ mix64(index.wrapping_add(1).wrapping_mul(GOLDEN)))
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeasureKind {
    Bernoulli {
        p: f64,
    },
    /// `(prior weight, p)` pairs.
    Mixture {
        components: Vec<(f64, f64)>,
    },
    BlockConstrained,
}

impl MeasureKind {
    pub fn validate(&self) -> Result<()> {
        let check_p = |p: f64| {
            if p > 0.0 && p < 1.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("probability {p} must lie in (0, 1)")))
            }
        };
        match self {
            MeasureKind::Bernoulli { p } => check_p(*p),
            MeasureKind::Mixture { components } => {
                if components.is_empty() {
                    return Err(Error::Config("mixture needs at least one component".into()));
                }
                for &(w, p) in components {
                    if w.is_nan() || w <= 0.0 {
                        return Err(Error::Config(format!(
                            "mixture weight {w} must be positive"
                        )));
                    }
                    check_p(p)?;
                }
                let total: f64 = components.iter().map(|c| c.0).sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::Config(format!(
                        "mixture weights sum to {total}, not 1"
                    )));
                }
                Ok(())
            }
            MeasureKind::BlockConstrained => Ok(()),
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureKind::Bernoulli { p } => write!(f, "bernoulli:{p}"),
            MeasureKind::Mixture { components } => {
                f.write_str("mixture:")?;
                for (i, (w, p)) in components.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{w}:{p}")?;
                }
                Ok(())
            }
            MeasureKind::BlockConstrained => f.write_str("block"),
        }
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    /// `bernoulli:p`, `mixture:w1:p1,w2:p2,...` or `block`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("cannot parse measure {s:?}"));
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        let kind = match s.split_once(':') {
            None if s == "block" || s == "block_constrained" => MeasureKind::BlockConstrained,
            Some(("bernoulli", p)) => MeasureKind::Bernoulli { p: num(p)? },
            Some(("mixture", rest)) => MeasureKind::Mixture {
                components: rest
                    .split(',')
                    .map(|c| {
                        let (w, p) = c.split_once(':').ok_or_else(bad)?;
                        Ok((num(w)?, num(p)?))
                    })
                    .collect::<Result<_>>()?,
            },
            _ => return Err(bad()),
        };
        kind.validate()?;
        Ok(kind)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub kind: MeasureKind,
    pub seed: u64,
    pub length: usize,
}

impl GeneratorSpec {
    pub fn new(kind: MeasureKind, seed: u64, length: usize) -> Self {
        Self { kind, seed, length }
    }

    pub fn validate(&self) -> Result<()> {
        if self.length == 0 {
            return Err(Error::Config("length must be at least 1".into()));
        }
        self.kind.validate()
    }
}

fn bernoulli_bits(rng: &mut SplitMix64, p: f64, length: usize) -> Vec<u8> {
    (0..length).map(|_| u8::from(rng.next_unit() < p)).collect()
}

pub fn generate(spec: &GeneratorSpec) -> Result<BitWord> {
    spec.validate()?;
    let mut rng = SplitMix64::new(spec.seed);
    let bits = match &spec.kind {
        MeasureKind::Bernoulli { p } => bernoulli_bits(&mut rng, *p, spec.length),
        MeasureKind::Mixture { components } => {
            let u = SplitMix64::new(derive_seed(spec.seed, MIXTURE_STREAM)).next_unit();
            let mut acc = 0.0;
            let p = components
                .iter()
                .find(|(w, _)| {
                    acc += w;
                    u < acc
                })
                .unwrap_or_else(|| components.last().expect("validated"))
                .1;
            bernoulli_bits(&mut rng, p, spec.length)
        }
        MeasureKind::BlockConstrained => {
            let mut bits = Vec::with_capacity(spec.length + 1);
            while bits.len() < spec.length {
                let block: [u8; 2] = match rng.next_below(3) {
                    0 => [0, 0],
                    1 => [0, 1],
                    _ => [1, 1],
                };
                bits.extend_from_slice(&block);
            }
            bits.truncate(spec.length);
            bits
        }
    };
    BitWord::new(bits)
}

/// `16, 32, 64, ...` up to and including `n`.
pub fn doubling_schedule(n: usize) -> Vec<usize> {
    let mut out: Vec<usize> = std::iter::successors(Some(16usize), |&m| m.checked_mul(2))
        .take_while(|&m| m < n)
        .collect();
    out.push(n);
    out
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub m: usize,
    #[serde(serialize_with = "ser_sig6")]
    pub p_hat: f64,
    #[serde(serialize_with = "ser_sig6")]
    pub H: f64,
    #[serde(serialize_with = "ser_sig6")]
    pub K_eff: f64,
    /// `None` marks a constant prefix.
    #[serde(serialize_with = "crate::stats::ser_opt_sig6")]
    pub R: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTrace {
    pub coder: CoderId,
    pub rows: Vec<TraceRow>,
}

impl ConvergenceTrace {
    pub fn last(&self) -> &TraceRow {
        self.rows.last().expect("schedule is nonempty")
    }

    /// CSV with columns `m, p_hat, H, K_eff, R, coder`.
    pub fn to_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["m", "p_hat", "H", "K_eff", "R", "coder"])
            .map_err(csv_err)?;
        for row in &self.rows {
            wtr.write_record([
                row.m.to_string(),
                crate::stats::sig6(row.p_hat).to_string(),
                crate::stats::sig6(row.H).to_string(),
                crate::stats::sig6(row.K_eff).to_string(),
                row.R.map_or_else(
                    || "constant".to_string(),
                    |r| crate::stats::sig6(r).to_string(),
                ),
                self.coder.to_string(),
            ])
            .map_err(csv_err)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn trace_row(word: &BitWord, coder: CoderId, mode: LengthMode) -> TraceRow {
    let m = word.len();
    let p_hat = word.weight() as f64 / m as f64;
    let h = binary_entropy(p_hat).expect("frequency in [0, 1]");
    let k = coder.code(word).len(mode);
    TraceRow {
        m,
        p_hat,
        H: h,
        K_eff: k,
        R: (!word.is_constant()).then(|| k / (m as f64 * h)),
    }
}

/// Statistics of the generated word at each prefix length in `schedule`.
pub fn convergence_trace(
    spec: &GeneratorSpec,
    coder: CoderId,
    schedule: &[usize],
) -> Result<ConvergenceTrace> {
    if schedule.is_empty() || schedule[0] == 0 || schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(
            "schedule must be nonempty and strictly increasing".into(),
        ));
    }
    let last = *schedule.last().expect("nonempty");
    let word = generate(&GeneratorSpec {
        length: spec.length.max(last),
        ..spec.clone()
    })?;
    let rows = schedule
        .par_iter()
        .map(|&m| {
            trace_row(
                &word.prefix(m).expect("within length"),
                coder,
                LengthMode::Ideal,
            )
        })
        .collect();
    Ok(ConvergenceTrace { coder, rows })
}

/// `K_eff(prefix) / m`, the simulation stand-in for the entropy rate.
pub fn entropy_rate_estimate(spec: &GeneratorSpec, coder: CoderId, m: usize) -> Result<f64> {
    if m < 1000 {
        return Err(Error::Config(format!(
            "entropy rate needs m >= 1000, got {m}"
        )));
    }
    let word = generate(&GeneratorSpec {
        length: m,
        ..spec.clone()
    })?;
    Ok(coder.code(&word).ideal_len / m as f64)
}

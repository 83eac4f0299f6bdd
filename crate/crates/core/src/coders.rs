//! Computable description-length coders.
//!
//! Every coder here is a real prefix-free code given the word length `n`:
//! each has an encoder, a decoder, and a concrete length equal to the number
//! of bits the encoder emits. Some also carry an idealized real-valued length
//! (`log2` of a class size plus `log2` header terms) that the statistics use
//! by default.
//!
//! | coder         | concrete code                                                    |
//! |---------------|------------------------------------------------------------------|
//! | `literal`     | the `n` bits verbatim                                            |
//! | `shell`       | gamma(k+1), rank in `ceil(log2 C(n,k))` bits                     |
//! | `run_length`  | first bit, gamma(run) per maximal run                            |
//! | `periodic`    | gamma(P), P pattern bits, gamma(r+1), r mismatch positions       |
//! | `pair_shell`  | gamma(b+1) for three block counts, multinomial rank, tail bit    |
//! | `model_class` | 3-bit tag, then the shortest of the five codes above             |

use std::fmt;
use std::io::Write;
use std::process::{Command, Stdio};
use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Serialize, Serializer};

use crate::bits::{BitReader, BitWord, BitWriter};
use crate::combinatorics::Factorization;
use crate::elias;
use crate::entropy::{block_counts, block_shell_log_size, BlockCounts};
use crate::error::{Error, Result};
use crate::shell::{self, ShellId};

pub const DEFAULT_MAX_PERIOD: u32 = 32;
pub const MODEL_TAG_BITS: u64 = 3;

/// One of the built-in coders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoderId {
    Literal,
    Shell,
    RunLength,
    Periodic { max_period: u32 },
    PairShell,
    ModelClass,
}

impl CoderId {
    pub const NAMES: [&'static str; 6] = [
        "literal",
        "shell",
        "run_length",
        "periodic",
        "pair_shell",
        "model_class",
    ];

    pub fn periodic() -> Self {
        CoderId::Periodic {
            max_period: DEFAULT_MAX_PERIOD,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CoderId::Literal => "literal",
            CoderId::Shell => "shell",
            CoderId::RunLength => "run_length",
            CoderId::Periodic { .. } => "periodic",
            CoderId::PairShell => "pair_shell",
            CoderId::ModelClass => "model_class",
        }
    }

    /// Members of the model class, in tie-break order; the index is the tag.
    pub fn model_members() -> [CoderId; 5] {
        [
            CoderId::Literal,
            CoderId::Shell,
            CoderId::RunLength,
            CoderId::periodic(),
            CoderId::PairShell,
        ]
    }

    pub fn code(&self, word: &BitWord) -> CodeResult {
        match *self {
            CoderId::Literal => k_len(word),
            CoderId::Shell => k_comb(word),
            CoderId::RunLength => k_run_length(word),
            CoderId::Periodic { max_period } => k_periodic(word, max_period),
            CoderId::PairShell => k_pair_shell(word),
            CoderId::ModelClass => k_model_class(word),
        }
    }

    /// Appends the concrete codeword of `word`.
    pub fn write(&self, out: &mut BitWriter, word: &BitWord) {
        match *self {
            CoderId::Literal => out.extend_from_bits(word.bits()),
            CoderId::Shell => shell::write_shell(out, word),
            CoderId::RunLength => write_run_length(out, word),
            CoderId::Periodic { max_period } => write_periodic(out, word, max_period),
            CoderId::PairShell => write_pair_shell(out, word),
            CoderId::ModelClass => write_model_class(out, word),
        }
    }

    /// Reads one codeword for a word of length `n`.
    pub fn read(&self, input: &mut BitReader<'_>, n: usize) -> Result<BitWord> {
        if n == 0 {
            return Err(Error::EmptyWord);
        }
        match *self {
            CoderId::Literal => BitWord::new(input.read_bits(n)?.to_vec()),
            CoderId::Shell => shell::read_shell(input, n as u64),
            CoderId::RunLength => read_run_length(input, n),
            CoderId::Periodic { max_period } => read_periodic(input, n, max_period),
            CoderId::PairShell => read_pair_shell(input, n),
            CoderId::ModelClass => read_model_class(input, n),
        }
    }

    pub fn encode(&self, word: &BitWord) -> Vec<u8> {
        let mut out = BitWriter::new();
        self.write(&mut out, word);
        out.into_bits()
    }

    /// Decodes a codeword that must be consumed exactly.
    pub fn decode(&self, n: usize, bits: &[u8]) -> Result<BitWord> {
        let mut r = BitReader::new(bits);
        let word = self.read(&mut r, n)?;
        if r.remaining() != 0 {
            return Err(Error::Malformed("trailing bits after codeword"));
        }
        Ok(word)
    }
}

impl fmt::Display for CoderId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoderId::Periodic { max_period } if *max_period != DEFAULT_MAX_PERIOD => {
                write!(f, "periodic:{max_period}")
            }
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for CoderId {
    type Err = Error;

    /// Accepts the coder names, plus `periodic:<P_max>`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, param) = match s.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (s, None),
        };
        let coder = match name {
            "literal" => CoderId::Literal,
            "shell" => CoderId::Shell,
            "run_length" => CoderId::RunLength,
            "pair_shell" => CoderId::PairShell,
            "model_class" => CoderId::ModelClass,
            "periodic" => {
                let max_period = match param {
                    None => DEFAULT_MAX_PERIOD,
                    Some(p) => p
                        .parse::<u32>()
                        .ok()
                        .filter(|&p| p >= 1)
                        .ok_or_else(|| Error::Config(format!("invalid max period {p:?}")))?,
                };
                return Ok(CoderId::Periodic { max_period });
            }
            _ => return Err(Error::UnknownCoder(s.to_string())),
        };
        if param.is_some() {
            return Err(Error::Config(format!("coder {name} takes no parameter")));
        }
        Ok(coder)
    }
}

impl Serialize for CoderId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Which length a statistic is computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LengthMode {
    #[default]
    Ideal,
    Concrete,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodeResult {
    pub coder: CoderId,
    pub ideal_len: f64,
    pub concrete_len: Option<u64>,
    /// Winning member for `model_class` under ideal lengths.
    pub model_tag: Option<CoderId>,
}

impl CodeResult {
    fn exact(coder: CoderId, len: u64) -> Self {
        Self {
            coder,
            ideal_len: len as f64,
            concrete_len: Some(len),
            model_tag: None,
        }
    }

    pub fn len(&self, mode: LengthMode) -> f64 {
        match (mode, self.concrete_len) {
            (LengthMode::Concrete, Some(c)) => c as f64,
            _ => self.ideal_len,
        }
    }
}

// ---------------------------------------------------------------------------
// literal and shell

pub fn k_len(word: &BitWord) -> CodeResult {
    CodeResult::exact(CoderId::Literal, word.len() as u64)
}

pub fn k_comb(word: &BitWord) -> CodeResult {
    CodeResult {
        coder: CoderId::Shell,
        ideal_len: shell::code_len_shell_ideal(word),
        concrete_len: Some(shell::code_len_shell_concrete(ShellId::of(word))),
        model_tag: None,
    }
}

// ---------------------------------------------------------------------------
// run length

fn runs(word: &BitWord) -> impl Iterator<Item = u64> + '_ {
    word.bits()
        .chunk_by(|a, b| a == b)
        .map(|run| run.len() as u64)
}

pub fn k_run_length(word: &BitWord) -> CodeResult {
    let len = 1 + runs(word).map(elias::len).sum::<u64>();
    CodeResult::exact(CoderId::RunLength, len)
}

fn write_run_length(out: &mut BitWriter, word: &BitWord) {
    out.push(word.get(0) == 1);
    for run in runs(word) {
        elias::write(out, run);
    }
}

fn read_run_length(input: &mut BitReader<'_>, n: usize) -> Result<BitWord> {
    let mut bit = u8::from(input.read_bit()?);
    let mut bits = Vec::with_capacity(n);
    while bits.len() < n {
        let run = elias::read(input)? as usize;
        if run > n - bits.len() {
            return Err(Error::Malformed("run exceeds word length"));
        }
        bits.resize(bits.len() + run, bit);
        bit ^= 1;
    }
    BitWord::new(bits)
}

// ---------------------------------------------------------------------------
// periodic

/// Best periodic fit for one period: majority pattern per residue class.
struct PeriodFit {
    period: usize,
    pattern: Vec<u8>,
    mismatches: Vec<usize>,
}

fn position_width(n: usize) -> u32 {
    // ceil(log2(n + 1))
    usize::BITS - n.leading_zeros()
}

fn periodic_cost(period: usize, mismatches: u64, n: usize) -> u64 {
    elias::len(period as u64)
        + period as u64
        + elias::len(mismatches + 1)
        + mismatches * u64::from(position_width(n))
}

fn best_period(word: &BitWord, max_period: u32) -> PeriodFit {
    let n = word.len();
    let bits = word.bits();
    let mut best: Option<(u64, usize)> = None;
    for period in 1..=(max_period as usize).min(n) {
        let mut ones = vec![0usize; period];
        let mut sizes = vec![0usize; period];
        for (i, &b) in bits.iter().enumerate() {
            ones[i % period] += usize::from(b);
            sizes[i % period] += 1;
        }
        let r: usize = ones
            .iter()
            .zip(&sizes)
            .map(|(&o, &s)| if 2 * o > s { s - o } else { o })
            .sum();
        let cost = periodic_cost(period, r as u64, n);
        if best.is_none_or(|(c, _)| cost < c) {
            best = Some((cost, period));
        }
    }
    let period = best.expect("n >= 1").1;
    let pattern: Vec<u8> = (0..period)
        .map(|c| {
            let (o, s) = bits
                .iter()
                .skip(c)
                .step_by(period)
                .fold((0, 0), |(o, s), &b| (o + usize::from(b), s + 1));
            u8::from(2 * o > s)
        })
        .collect();
    let mismatches = bits
        .iter()
        .enumerate()
        .filter(|&(i, &b)| b != pattern[i % period])
        .map(|(i, _)| i)
        .collect();
    PeriodFit {
        period,
        pattern,
        mismatches,
    }
}

pub fn k_periodic(word: &BitWord, max_period: u32) -> CodeResult {
    let fit = best_period(word, max_period.max(1));
    let len = periodic_cost(fit.period, fit.mismatches.len() as u64, word.len());
    CodeResult::exact(
        CoderId::Periodic {
            max_period: max_period.max(1),
        },
        len,
    )
}

fn write_periodic(out: &mut BitWriter, word: &BitWord, max_period: u32) {
    let fit = best_period(word, max_period.max(1));
    let width = position_width(word.len());
    elias::write(out, fit.period as u64);
    out.extend_from_bits(&fit.pattern);
    elias::write(out, fit.mismatches.len() as u64 + 1);
    for &pos in &fit.mismatches {
        out.write_u64(pos as u64, width);
    }
}

fn read_periodic(input: &mut BitReader<'_>, n: usize, max_period: u32) -> Result<BitWord> {
    let period = elias::read(input)? as usize;
    if period > n || period > max_period as usize {
        return Err(Error::Malformed("period out of range"));
    }
    let pattern = input.read_bits(period)?.to_vec();
    let r = elias::read(input)? - 1;
    if r > n as u64 {
        return Err(Error::Malformed("mismatch count exceeds word length"));
    }
    let mut bits: Vec<u8> = (0..n).map(|i| pattern[i % period]).collect();
    let width = position_width(n);
    for _ in 0..r {
        let pos = input.read_u64(width)? as usize;
        if pos >= n {
            return Err(Error::Malformed("mismatch position out of range"));
        }
        bits[pos] ^= 1;
    }
    BitWord::new(bits)
}

// ---------------------------------------------------------------------------
// pair shell

/// Multinomial index of the block sequence: positions of `00` among all
/// blocks, then `01` among the rest, then `10` among what remains, combined in
/// mixed radix.
fn block_rank(word: &BitWord, bc: &BlockCounts) -> BigUint {
    let blocks: Vec<u8> = word
        .bits()
        .chunks_exact(2)
        .map(|p| p[0] * 2 + p[1])
        .collect();
    let mut remaining = blocks;
    let mut index = BigUint::from(0u8);
    let mut radix = BigUint::from(1u8);
    for symbol in 0u8..3 {
        if remaining.is_empty() {
            break;
        }
        let indicator: Vec<u8> = remaining.iter().map(|&b| u8::from(b == symbol)).collect();
        let ind = BitWord::new(indicator).expect("nonempty");
        let shell_id = ShellId::of(&ind);
        index += shell::rank(&ind) * &radix;
        radix *= shell_id.size();
        remaining.retain(|&b| b != symbol);
    }
    debug_assert_eq!(
        radix,
        Factorization::multinomial(&bc.as_array()).to_biguint()
    );
    index
}

fn block_unrank(counts: [u64; 4], mut index: BigUint) -> Result<Vec<u8>> {
    let total: u64 = counts.iter().sum();
    // Slots still unassigned, as indices into the output block sequence.
    let mut open: Vec<usize> = (0..total as usize).collect();
    let mut blocks = vec![3u8; total as usize];
    for symbol in 0u8..3 {
        if open.is_empty() {
            break;
        }
        let shell_id = ShellId::new(open.len() as u64, counts[symbol as usize])?;
        let size = shell_id.size();
        let local = &index % &size;
        index /= &size;
        let ind = shell::unrank(shell_id, &local)?;
        let mut next = Vec::with_capacity(open.len());
        for (slot, &flag) in open.iter().zip(ind.bits()) {
            if flag == 1 {
                blocks[*slot] = symbol;
            } else {
                next.push(*slot);
            }
        }
        open = next;
    }
    if index != BigUint::from(0u8) {
        return Err(Error::Malformed("block index out of range"));
    }
    Ok(blocks)
}

fn pair_header_ideal(n: usize) -> f64 {
    4.0 * ((n / 2) as f64 + 1.0).log2()
}

pub fn k_pair_shell(word: &BitWord) -> CodeResult {
    let bc = block_counts(word);
    let ideal = block_shell_log_size(&bc) + pair_header_ideal(word.len()) + f64::from(bc.tail);
    let concrete = elias::len(bc.b00 + 1)
        + elias::len(bc.b01 + 1)
        + elias::len(bc.b10 + 1)
        + Factorization::multinomial(&bc.as_array()).ceil_log2()
        + u64::from(bc.tail);
    CodeResult {
        coder: CoderId::PairShell,
        ideal_len: ideal,
        concrete_len: Some(concrete),
        model_tag: None,
    }
}

fn write_pair_shell(out: &mut BitWriter, word: &BitWord) {
    let bc = block_counts(word);
    elias::write(out, bc.b00 + 1);
    elias::write(out, bc.b01 + 1);
    elias::write(out, bc.b10 + 1);
    if bc.blocks() > 0 {
        let width = Factorization::multinomial(&bc.as_array()).ceil_log2();
        shell::write_biguint(out, &block_rank(word, &bc), width);
    }
    if bc.tail == 1 {
        out.push(word.get(word.len() - 1) == 1);
    }
}

fn read_pair_shell(input: &mut BitReader<'_>, n: usize) -> Result<BitWord> {
    let total = (n / 2) as u64;
    let b00 = elias::read(input)? - 1;
    let b01 = elias::read(input)? - 1;
    let b10 = elias::read(input)? - 1;
    let b11 = total
        .checked_sub(b00)
        .and_then(|r| r.checked_sub(b01))
        .and_then(|r| r.checked_sub(b10))
        .ok_or(Error::Malformed("block counts exceed word length"))?;
    let counts = [b00, b01, b10, b11];
    let mut bits = Vec::with_capacity(n);
    if total > 0 {
        let fac = Factorization::multinomial(&counts);
        let index = shell::read_biguint(input, fac.ceil_log2())?;
        if index >= fac.to_biguint() {
            return Err(Error::Malformed("block index out of range"));
        }
        for b in block_unrank(counts, index)? {
            bits.push(b >> 1);
            bits.push(b & 1);
        }
    }
    if n % 2 == 1 {
        bits.push(u8::from(input.read_bit()?));
    }
    BitWord::new(bits)
}

// ---------------------------------------------------------------------------
// model class

fn argmin_member(word: &BitWord, mode: LengthMode) -> (usize, CodeResult) {
    CoderId::model_members()
        .iter()
        .map(|c| c.code(word))
        .enumerate()
        .fold(None::<(usize, CodeResult)>, |best, (i, r)| match best {
            Some((_, ref b)) if b.len(mode) <= r.len(mode) => best,
            _ => Some((i, r)),
        })
        .expect("nonempty model class")
}

/// Tagged minimum over the member coders. Ideal and concrete lengths are each
/// minimized separately, so the two may come from different members.
pub fn k_model_class(word: &BitWord) -> CodeResult {
    let results: Vec<CodeResult> = CoderId::model_members()
        .iter()
        .map(|c| c.code(word))
        .collect();
    let (ideal_idx, ideal) =
        results
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |(bi, bv), (i, r)| {
                if r.ideal_len < bv {
                    (i, r.ideal_len)
                } else {
                    (bi, bv)
                }
            });
    let concrete = results
        .iter()
        .map(|r| r.concrete_len.expect("members are concrete"))
        .min()
        .expect("nonempty");
    CodeResult {
        coder: CoderId::ModelClass,
        ideal_len: MODEL_TAG_BITS as f64 + ideal,
        concrete_len: Some(MODEL_TAG_BITS + concrete),
        model_tag: Some(results[ideal_idx].coder),
    }
}

fn write_model_class(out: &mut BitWriter, word: &BitWord) {
    let (idx, _) = argmin_member(word, LengthMode::Concrete);
    out.write_u64(idx as u64, MODEL_TAG_BITS as u32);
    CoderId::model_members()[idx].write(out, word);
}

fn read_model_class(input: &mut BitReader<'_>, n: usize) -> Result<BitWord> {
    let tag = input.read_u64(MODEL_TAG_BITS as u32)? as usize;
    let member = CoderId::model_members()
        .get(tag)
        .copied()
        .ok_or(Error::Malformed("unknown model tag"))?;
    member.read(input, n)
}

// ---------------------------------------------------------------------------
// external compressors

/// Adapter for an external program that maps input bytes to compressed
/// bytes on stdout. The word is packed MSB first; the length is the output
/// size in bits. These lengths are not prefix-free given `n` and are not
/// part of the Kraft audits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalCompressor {
    pub program: String,
    pub args: Vec<String>,
}

impl ExternalCompressor {
    /// Splits a command line on whitespace.
    pub fn from_command_line(cmd: &str) -> Result<Self> {
        let mut parts = cmd.split_whitespace().map(str::to_string);
        let program = parts
            .next()
            .ok_or_else(|| Error::Config("empty external command".into()))?;
        Ok(Self {
            program,
            args: parts.collect(),
        })
    }

    pub fn label(&self) -> String {
        format!("external:{}", self.program)
    }

    pub fn length_bits(&self, word: &BitWord) -> Result<u64> {
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| Error::External(format!("{}: {e}", self.program)))?;
        let input = word.to_bytes_msb();
        let mut stdin = child.stdin.take().expect("piped stdin");
        let writer = std::thread::spawn(move || stdin.write_all(&input));
        let output = child.wait_with_output()?;
        writer
            .join()
            .map_err(|_| Error::External("stdin writer panicked".into()))??;
        if !output.status.success() {
            return Err(Error::External(format!(
                "{} exited with {}",
                self.program, output.status
            )));
        }
        Ok(8 * output.stdout.len() as u64)
    }
}

//! Enumerative coding inside a fixed-weight shell `S(n, k)`.
//!
//! Words of a shell are ordered lexicographically with `0 < 1`. The rank is
//! computed with the combinatorial number system: scanning left to right,
//! every consumed `1` adds `C(remaining - 1, ones_remaining)`, the number of
//! shell members that carry a `0` at that position and agree before it. The
//! running binomial is updated by one small multiply/divide per position, so
//! rank and unrank cost `O(n)` big-integer operations of size `log2 C(n, k)`.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::bits::{BitReader, BitWord, BitWriter};
use crate::combinatorics::{self, Factorization};
use crate::elias;
use crate::error::{Error, Result};

/// The shell of length-`n` words with `k` ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct ShellId {
    pub n: u64,
    pub k: u64,
}

impl ShellId {
    pub fn new(n: u64, k: u64) -> Result<Self> {
        if n == 0 || k > n {
            return Err(Error::domain(format!("invalid shell (n={n}, k={k})")));
        }
        Ok(Self { n, k })
    }

    pub fn of(word: &BitWord) -> Self {
        Self {
            n: word.len() as u64,
            k: word.weight() as u64,
        }
    }

    pub fn size(&self) -> BigUint {
        combinatorics::binomial_or_zero(self.n, self.k)
    }

    pub fn log2_size(&self) -> f64 {
        Factorization::binomial(self.n, self.k)
            .expect("validated shell")
            .log2()
    }

    /// Width of the fixed-length index field.
    pub fn index_width(&self) -> u64 {
        Factorization::binomial(self.n, self.k)
            .expect("validated shell")
            .ceil_log2()
    }
}

/// Walks the shell positions while maintaining `C(r - 1, j)`, where `r` is
/// the number of positions left (including the current one) and `j` the
/// number of ones left. `step` decides the current bit given that count and
/// returns it; the walk ends once the remaining bits are forced.
fn walk<F>(shell: ShellId, mut step: F) -> Vec<u8>
where
    F: FnMut(&BigUint) -> u8,
{
    let n = shell.n as usize;
    let mut out = Vec::with_capacity(n);
    let mut ones_left = shell.k;
    if ones_left == 0 || ones_left == shell.n {
        out.resize(n, u8::from(ones_left > 0));
        return out;
    }
    let mut below = combinatorics::binomial_or_zero(shell.n - 1, ones_left);
    for i in 0..n {
        let r = (n - i) as u64;
        if ones_left == 0 || ones_left == r {
            out.resize(n, u8::from(ones_left > 0));
            break;
        }
        let bit = step(&below);
        out.push(bit);
        // C(r-2, j-1) = C(r-1, j) * j / (r-1);  C(r-2, j) = C(r-1, j) * (r-1-j) / (r-1)
        let factor = if bit == 1 {
            ones_left
        } else {
            r - 1 - ones_left
        };
        below = below * factor / (r - 1);
        ones_left -= u64::from(bit);
    }
    out
}

/// Lexicographic position of `word` within its shell.
pub fn rank(word: &BitWord) -> BigUint {
    let mut acc = BigUint::zero();
    let mut pos = 0usize;
    let bits = word.bits();
    walk(ShellId::of(word), |below| {
        let bit = bits[pos];
        pos += 1;
        if bit == 1 {
            acc += below;
        }
        bit
    });
    acc
}

/// The word at position `index` of `shell`.
pub fn unrank(shell: ShellId, index: &BigUint) -> Result<BitWord> {
    let shell = ShellId::new(shell.n, shell.k)?;
    if *index >= shell.size() {
        return Err(Error::domain(format!(
            "index out of range for shell (n={}, k={})",
            shell.n, shell.k
        )));
    }
    let mut rest = index.clone();
    let bits = walk(shell, |below| {
        if rest >= *below {
            rest -= below;
            1
        } else {
            0
        }
    });
    BitWord::new(bits)
}

/// Ideal shell description length: `log2 C(n, k) + log2(n + 1)`, the second
/// term paying for `k` with `n` known.
pub fn code_len_shell_ideal(word: &BitWord) -> f64 {
    let shell = ShellId::of(word);
    shell.log2_size() + (shell.n as f64 + 1.0).log2()
}

/// Concrete length: Elias gamma of `k + 1`, then the rank in
/// `ceil(log2 C(n, k))` bits.
pub fn code_len_shell_concrete(shell: ShellId) -> u64 {
    elias::len(shell.k + 1) + shell.index_width()
}

/// A shell codeword. `n` travels separately.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellCodeword {
    pub header_bits: Vec<u8>,
    pub index_bits: Vec<u8>,
    pub ideal_len: f64,
    pub concrete_len: u64,
}

impl ShellCodeword {
    pub fn bits(&self) -> Vec<u8> {
        let mut v = self.header_bits.clone();
        v.extend_from_slice(&self.index_bits);
        v
    }

    /// Header then index, MSB first, zero padded to a byte boundary.
    pub fn to_bytes(&self) -> Vec<u8> {
        crate::bits::pack_msb(&self.bits())
    }
}

pub(crate) fn write_biguint(out: &mut BitWriter, value: &BigUint, width: u64) {
    debug_assert!(value.bits() <= width);
    for i in (0..width).rev() {
        out.push(value.bit(i));
    }
}

pub(crate) fn read_biguint(input: &mut BitReader<'_>, width: u64) -> Result<BigUint> {
    let field = input.read_bits(width as usize)?;
    let mut v = BigUint::zero();
    for &b in field {
        v <<= 1u8;
        if b == 1 {
            v += 1u8;
        }
    }
    Ok(v)
}

/// Appends the shell codeword of `word` to `out`.
pub fn write_shell(out: &mut BitWriter, word: &BitWord) {
    let shell = ShellId::of(word);
    elias::write(out, shell.k + 1);
    write_biguint(out, &rank(word), shell.index_width());
}

/// Reads one shell codeword for a word of length `n`.
pub fn read_shell(input: &mut BitReader<'_>, n: u64) -> Result<BitWord> {
    let k = elias::read(input)? - 1;
    if k > n {
        return Err(Error::Malformed("shell weight exceeds word length"));
    }
    let shell = ShellId::new(n, k)?;
    let index = read_biguint(input, shell.index_width())?;
    if index >= shell.size() {
        return Err(Error::Malformed("shell index out of range"));
    }
    unrank(shell, &index)
}

pub fn encode_shell(word: &BitWord) -> ShellCodeword {
    let shell = ShellId::of(word);
    let mut header = BitWriter::new();
    elias::write(&mut header, shell.k + 1);
    let mut index = BitWriter::new();
    write_biguint(&mut index, &rank(word), shell.index_width());
    let concrete_len = (header.len() + index.len()) as u64;
    debug_assert_eq!(concrete_len, code_len_shell_concrete(shell));
    ShellCodeword {
        header_bits: header.into_bits(),
        index_bits: index.into_bits(),
        ideal_len: code_len_shell_ideal(word),
        concrete_len,
    }
}

/// Decodes a complete codeword; trailing bits other than byte padding are
/// rejected.
pub fn decode_shell(n: u64, codeword: &[u8]) -> Result<BitWord> {
    let mut r = BitReader::new(codeword);
    let word = read_shell(&mut r, n)?;
    if r.remaining() >= 8 || r.read_bits(r.remaining())?.contains(&1) {
        return Err(Error::Malformed("trailing data after shell codeword"));
    }
    Ok(word)
}

/// Decodes the byte layout produced by [`ShellCodeword::to_bytes`].
pub fn decode_shell_bytes(n: u64, bytes: &[u8]) -> Result<BitWord> {
    let bits: Vec<u8> = bytes
        .iter()
        .flat_map(|b| (0..8).rev().map(move |i| (b >> i) & 1))
        .collect();
    decode_shell(n, &bits)
}

/// Small ranks as `u64`, for tests and tables.
pub fn rank_u64(word: &BitWord) -> Option<u64> {
    rank(word).to_u64()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> BitWord {
        s.parse().unwrap()
    }

    // Brute-force shell listing in ascending lexicographic order.
    fn shell_members(n: usize, k: usize) -> Vec<BitWord> {
        (0u64..1 << n)
            .map(|v| BitWord::from_u64(v, n).unwrap())
            .filter(|x| x.weight() == k)
            .collect()
    }

    #[test]
    fn ranks_of_s4_2() {
        assert_eq!(rank_u64(&w("0011")), Some(0));
        assert_eq!(rank_u64(&w("1100")), Some(5));
        assert_eq!(rank_u64(&w("1111")), Some(0));
        let members = shell_members(4, 2);
        let listed: Vec<String> = members.iter().map(|x| x.to_string()).collect();
        assert_eq!(listed, ["0011", "0101", "0110", "1001", "1010", "1100"]);
    }

    #[test]
    fn unrank_examples() {
        let s = ShellId::new(4, 2).unwrap();
        assert_eq!(unrank(s, &BigUint::from(0u8)).unwrap().to_string(), "0011");
        assert_eq!(unrank(s, &BigUint::from(3u8)).unwrap().to_string(), "1001");
        assert!(unrank(s, &BigUint::from(6u8)).is_err());
        let z = unrank(ShellId::new(9, 0).unwrap(), &BigUint::zero()).unwrap();
        assert_eq!(z, BitWord::zeros(9).unwrap());
    }

    #[test]
    fn bijection_matches_enumeration() {
        for n in 1..=12usize {
            for k in 0..=n {
                let shell = ShellId::new(n as u64, k as u64).unwrap();
                for (i, x) in shell_members(n, k).iter().enumerate() {
                    assert_eq!(rank_u64(x), Some(i as u64));
                    assert_eq!(&unrank(shell, &BigUint::from(i)).unwrap(), x);
                }
            }
        }
    }

    #[test]
    fn ideal_lengths() {
        let zeros = BitWord::zeros(35).unwrap();
        assert!((code_len_shell_ideal(&zeros) - 36f64.log2()).abs() < 1e-12);
        let x = w("01010001001000001010000100000100001");
        assert!((code_len_shell_ideal(&x) - 31.243).abs() < 0.01);
        let mut bits = vec![0u8; 1000];
        bits[..500].fill(1);
        let bal = BitWord::new(bits).unwrap();
        assert!((code_len_shell_ideal(&bal) - 1004.6).abs() < 0.5);
    }

    #[test]
    fn codeword_layout() {
        let cw = encode_shell(&w("0011"));
        // gamma(3) = 011, then rank 0 of 6 in 3 bits.
        assert_eq!(cw.header_bits, vec![0, 1, 1]);
        assert_eq!(cw.index_bits, vec![0, 0, 0]);
        assert_eq!(cw.concrete_len, 6);
        assert_eq!(cw.to_bytes(), vec![0b0110_0000]);
        assert_eq!(decode_shell_bytes(4, &cw.to_bytes()).unwrap(), w("0011"));
    }

    #[test]
    fn malformed_codewords() {
        // k + 1 = 7 > n + 1 for n = 4
        assert!(decode_shell(4, &[0, 0, 1, 1, 1]).is_err());
        // index 6 of a 6-element shell
        assert!(decode_shell(4, &[0, 1, 1, 1, 1, 0]).is_err());
        assert!(decode_shell(4, &[0, 1]).is_err());
        assert!(decode_shell(4, &[0, 1, 1, 0, 0, 0, 1]).is_err());
    }

    #[test]
    fn round_trip_all_words_of_length_12() {
        for v in 0u64..1 << 12 {
            let x = BitWord::from_u64(v, 12).unwrap();
            let cw = encode_shell(&x);
            assert_eq!(cw.bits().len() as u64, cw.concrete_len);
            assert_eq!(decode_shell(12, &cw.bits()).unwrap(), x);
        }
    }

    #[test]
    fn kraft_sum_length_10() {
        let total: f64 = (0u64..1 << 10)
            .map(|v| {
                let x = BitWord::from_u64(v, 10).unwrap();
                2f64.powi(-(encode_shell(&x).concrete_len as i32))
            })
            .sum();
        assert!(total <= 1.0, "{total}");
    }

    #[test]
    fn large_shell_round_trip() {
        let bits: Vec<u8> = (0..5000u32).map(|i| ((i * 7919) % 11 < 4) as u8).collect();
        let x = BitWord::new(bits).unwrap();
        let cw = encode_shell(&x);
        assert_eq!(decode_shell(5000, &cw.bits()).unwrap(), x);
    }
}

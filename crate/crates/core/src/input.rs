//! Reading words from text, raw bytes or hex.

use std::fmt;
use std::io::Read;
use std::path::PathBuf;
use std::str::FromStr;

use crate::bits::BitWord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InputFormat {
    /// `0`/`1` characters; line breaks are ignored (or separate words in
    /// batch mode).
    #[default]
    Ascii01,
    /// Raw bytes, most significant bit first.
    Raw,
    /// Hex digits, most significant bit first; whitespace ignored.
    Hex,
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ascii01" | "ascii" => Ok(InputFormat::Ascii01),
            "raw" | "raw-bytes" | "bytes" => Ok(InputFormat::Raw),
            "hex" => Ok(InputFormat::Hex),
            _ => Err(Error::Config(format!("unknown input format {s:?}"))),
        }
    }
}

impl fmt::Display for InputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputFormat::Ascii01 => "ascii01",
            InputFormat::Raw => "raw-bytes",
            InputFormat::Hex => "hex",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Stdin,
    Path(PathBuf),
}

impl Origin {
    /// `-` means standard input.
    pub fn from_arg(arg: Option<&str>) -> Self {
        match arg {
            None | Some("-") => Origin::Stdin,
            Some(p) => Origin::Path(PathBuf::from(p)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputSource {
    pub format: InputFormat,
    pub origin: Origin,
    /// Keep at most this many bits (applied after byte expansion).
    pub cap: Option<usize>,
}

impl InputSource {
    pub fn read_bytes(&self, stdin: &mut dyn Read) -> Result<Vec<u8>> {
        match &self.origin {
            Origin::Stdin => {
                let mut buf = Vec::new();
                stdin.read_to_end(&mut buf)?;
                Ok(buf)
            }
            Origin::Path(p) => Ok(std::fs::read(p)?),
        }
    }

    /// Whole input as a single word.
    pub fn read_word(&self, stdin: &mut dyn Read) -> Result<BitWord> {
        let bytes = self.read_bytes(stdin)?;
        parse_word(&bytes, self.format, self.cap)
    }

    /// One word per nonempty line (ascii01 and hex only).
    pub fn read_batch(&self, stdin: &mut dyn Read) -> Result<Vec<BitWord>> {
        if self.format == InputFormat::Raw {
            return Err(Error::Config(
                "batch mode needs a line-oriented input format".into(),
            ));
        }
        let bytes = self.read_bytes(stdin)?;
        let words: Vec<BitWord> = bytes
            .split(|&b| b == b'\n')
            .filter(|line| line.iter().any(|b| !b.is_ascii_whitespace()))
            .map(|line| parse_word(line, self.format, self.cap))
            .collect::<Result<_>>()?;
        if words.is_empty() {
            return Err(Error::EmptyWord);
        }
        Ok(words)
    }
}

pub fn parse_word(bytes: &[u8], format: InputFormat, cap: Option<usize>) -> Result<BitWord> {
    let mut bits = match format {
        InputFormat::Ascii01 => parse_ascii01(bytes)?,
        InputFormat::Raw => expand(bytes),
        InputFormat::Hex => expand(&parse_hex(bytes)?),
    };
    if let Some(cap) = cap {
        bits.truncate(cap);
    }
    BitWord::new(bits)
}

fn parse_ascii01(bytes: &[u8]) -> Result<Vec<u8>> {
    let mut bits = Vec::with_capacity(bytes.len());
    for (pos, &b) in bytes.iter().enumerate() {
        match b {
            b'0' => bits.push(0),
            b'1' => bits.push(1),
            b'\n' | b'\r' => {}
            other => {
                return Err(Error::InvalidChar {
                    pos,
                    found: char::from(other),
                })
            }
        }
    }
    Ok(bits)
}

fn expand(bytes: &[u8]) -> Vec<u8> {
    bytes
        .iter()
        .flat_map(|b| (0..8).rev().map(move |i| (b >> i) & 1))
        .collect()
}

fn parse_hex(bytes: &[u8]) -> Result<Vec<u8>> {
    let digits: Vec<u8> = bytes
        .iter()
        .copied()
        .filter(|b| !b.is_ascii_whitespace())
        .map(|b| {
            char::from(b).to_digit(16).map(|d| d as u8).ok_or_else(|| {
                Error::InvalidHex(format!("unexpected character {:?}", char::from(b)))
            })
        })
        .collect::<Result<_>>()?;
    if !digits.len().is_multiple_of(2) {
        return Err(Error::InvalidHex("odd number of hex digits".into()));
    }
    Ok(digits.chunks(2).map(|p| (p[0] << 4) | p[1]).collect())
}

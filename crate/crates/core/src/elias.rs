//! Elias gamma code, the single integer code used by every concrete coder.
//!
//! `x >= 1` is written as `floor(log2 x)` zeros followed by the binary
//! representation of `x` (which starts with a 1).

use crate::bits::{BitReader, BitWriter};
use crate::error::{Error, Result};

pub use crate::combinatorics::elias_gamma_len as len;

pub fn write(out: &mut BitWriter, x: u64) {
    assert!(x >= 1, "Elias gamma is undefined for 0");
    let nbits = 64 - x.leading_zeros();
    for _ in 1..nbits {
        out.push(false);
    }
    out.write_u64(x, nbits);
}

pub fn read(input: &mut BitReader<'_>) -> Result<u64> {
    let mut zeros = 0u32;
    while !input.read_bit()? {
        zeros += 1;
        if zeros > 63 {
            return Err(Error::Malformed("Elias gamma prefix longer than 63 bits"));
        }
    }
    let low = input.read_u64(zeros)?;
    Ok((1u64 << zeros) | low)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_codewords() {
        let enc = |x| {
            let mut w = BitWriter::new();
            write(&mut w, x);
            w.into_bits()
        };
        assert_eq!(enc(1), vec![1]);
        assert_eq!(enc(2), vec![0, 1, 0]);
        assert_eq!(enc(5), vec![0, 0, 1, 0, 1]);
        assert_eq!(enc(8).len(), 7);
    }

    #[test]
    fn rejects_garbage() {
        let zeros = vec![0u8; 70];
        assert!(read(&mut BitReader::new(&zeros)).is_err());
        assert!(read(&mut BitReader::new(&[0, 0, 1])).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_sequence(values in proptest::collection::vec(1u64..u64::MAX, 1..20)) {
            let mut w = BitWriter::new();
            for &v in &values {
                write(&mut w, v);
            }
            let expected: u64 = values.iter().map(|&v| len(v)).sum();
            prop_assert_eq!(w.len() as u64, expected);
            let mut r = BitReader::new(w.as_bits());
            for &v in &values {
                prop_assert_eq!(read(&mut r).unwrap(), v);
            }
            prop_assert_eq!(r.remaining(), 0);
        }
    }
}

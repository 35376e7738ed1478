//! Packed bit sequences with a fixed bit order.
//!
//! All bit-level plumbing in this crate uses one convention: bit `i` of a
//! stream lives in byte `i / 8` at position `7 − i % 8` — the most
//! significant bit of each byte comes first. Bits at positions `bit_len`
//! and beyond are kept zero, so whole-byte operations (population count,
//! hashing of zero-padded blocks) need no masking.

use thiserror::Error;

/// Errors from bit-stream construction and slicing.
#[derive(Debug, Error, PartialEq)]
pub enum BitstreamError {
    #[error("declared bit length {bit_len} exceeds the {bytes}-byte buffer")]
    LengthExceedsBuffer { bit_len: usize, bytes: usize },
    #[error("bits past the declared length must be zero")]
    TailBitsNotZero,
    #[error("bits per record {bits_per_record} exceeds the {adc_bits}-bit code size")]
    TooManyBitsPerRecord { bits_per_record: u32, adc_bits: u32 },
    #[error("bit range {offset}+{count} exceeds the stream length {bit_len}")]
    RangeOutOfBounds {
        offset: usize,
        count: usize,
        bit_len: usize,
    },
}

/// A packed sequence of bits, MSB-first within each byte.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BitStream {
    bytes: Vec<u8>,
    bit_len: usize,
}

impl BitStream {
    /// Empty stream.
    pub fn new() -> Self {
        Self::default()
    }

    /// Empty stream with room for `bits` pre-allocated.
    pub fn with_capacity(bits: usize) -> Self {
        Self {
            bytes: Vec::with_capacity(bits.div_ceil(8)),
            bit_len: 0,
        }
    }

    /// Wrap whole bytes; the bit length is `8 × bytes.len()`.
    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        let bit_len = bytes.len() * 8;
        Self { bytes, bit_len }
    }

    /// Wrap bytes with an explicit bit length, enforcing the zero-tail
    /// invariant.
    pub fn from_bytes_with_len(bytes: Vec<u8>, bit_len: usize) -> Result<Self, BitstreamError> {
        if bit_len > bytes.len() * 8 {
            return Err(BitstreamError::LengthExceedsBuffer {
                bit_len,
                bytes: bytes.len(),
            });
        }
        let stream = Self { bytes, bit_len };
        if !stream.tail_is_zero() {
            return Err(BitstreamError::TailBitsNotZero);
        }
        Ok(stream)
    }

    fn tail_is_zero(&self) -> bool {
        let full = self.bit_len / 8;
        let rem = self.bit_len % 8;
        let mut bytes = self.bytes[full..].iter();
        if rem > 0 {
            match bytes.next() {
                Some(&b) if b & (0xFF >> rem) != 0 => return false,
                _ => {}
            }
        }
        bytes.all(|&b| b == 0)
    }

    /// Packed bytes, including any zero padding in the final partial byte.
    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    /// Consume the stream, yielding the packed bytes.
    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    /// Number of valid bits.
    pub fn bit_len(&self) -> usize {
        self.bit_len
    }

    pub fn is_empty(&self) -> bool {
        self.bit_len == 0
    }

    /// Bit at position `i` (must be `< bit_len`).
    pub fn bit(&self, i: usize) -> bool {
        assert!(i < self.bit_len, "bit index {i} out of range {}", self.bit_len);
        self.bytes[i / 8] >> (7 - i % 8) & 1 == 1
    }

    /// Append one bit.
    pub fn push_bit(&mut self, bit: bool) {
        if self.bit_len.is_multiple_of(8) {
            self.bytes.push(0);
        }
        if bit {
            let i = self.bit_len;
            self.bytes[i / 8] |= 1 << (7 - i % 8);
        }
        self.bit_len += 1;
    }

    /// Append the `n_bits` least significant bits of `value`, most
    /// significant of those first (`value = 5, n_bits = 3` appends `101`).
    pub fn push_low_bits(&mut self, value: u32, n_bits: u32) {
        debug_assert!(n_bits <= 32);
        for k in (0..n_bits).rev() {
            self.push_bit(value >> k & 1 == 1);
        }
    }

    /// Append whole bytes to a byte-aligned stream.
    ///
    /// # Panics
    /// If the stream's current length is not a multiple of 8.
    pub fn push_bytes(&mut self, bytes: &[u8]) {
        assert!(
            self.bit_len.is_multiple_of(8),
            "push_bytes requires a byte-aligned stream"
        );
        self.bytes.extend_from_slice(bytes);
        self.bit_len += bytes.len() * 8;
    }

    /// Iterate over the valid bits.
    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.bit_len).map(move |i| self.bit(i))
    }

    /// Number of one-bits. Whole-byte population count; sound because bits
    /// past `bit_len` are zero.
    pub fn count_ones(&self) -> usize {
        self.bytes.iter().map(|b| b.count_ones() as usize).sum()
    }

    /// Read `n_bits ≤ 32` starting at `bit_offset`, returned in the low
    /// bits of the result (first bit read is the most significant).
    pub fn read_bits(&self, bit_offset: usize, n_bits: u32) -> Result<u32, BitstreamError> {
        assert!(n_bits <= 32);
        if bit_offset + n_bits as usize > self.bit_len {
            return Err(BitstreamError::RangeOutOfBounds {
                offset: bit_offset,
                count: n_bits as usize,
                bit_len: self.bit_len,
            });
        }
        let mut out = 0u32;
        for i in 0..n_bits as usize {
            out = out << 1 | self.bit(bit_offset + i) as u32;
        }
        Ok(out)
    }

    /// Copy `bit_count` bits starting at `bit_offset` into a fresh byte
    /// buffer, MSB-first, zero-padded to the next whole octet.
    pub fn extract_octets(
        &self,
        bit_offset: usize,
        bit_count: usize,
    ) -> Result<Vec<u8>, BitstreamError> {
        if bit_offset + bit_count > self.bit_len {
            return Err(BitstreamError::RangeOutOfBounds {
                offset: bit_offset,
                count: bit_count,
                bit_len: self.bit_len,
            });
        }
        let n_octets = bit_count.div_ceil(8);
        let mut out = vec![0u8; n_octets];
        let base = bit_offset / 8;
        let shift = bit_offset % 8;
        let at = |i: usize| self.bytes.get(i).copied().unwrap_or(0);
        if shift == 0 {
            out.copy_from_slice(&self.bytes[base..base + n_octets]);
        } else {
            for (i, slot) in out.iter_mut().enumerate() {
                *slot = at(base + i) << shift | at(base + i + 1) >> (8 - shift);
            }
        }
        // Zero any bits of the last octet past bit_count.
        let rem = bit_count % 8;
        if rem > 0 {
            out[n_octets - 1] &= 0xFF << (8 - rem);
        }
        Ok(out)
    }
}

/// Pack the `bits_per_record` least significant bits of each ADC code into
/// a stream, MSB-first within each record's contribution.
pub fn codes_to_bits(
    codes: &[u32],
    bits_per_record: u32,
    adc_bits: u32,
) -> Result<BitStream, BitstreamError> {
    if bits_per_record > adc_bits {
        return Err(BitstreamError::TooManyBitsPerRecord {
            bits_per_record,
            adc_bits,
        });
    }
    let mut stream = BitStream::with_capacity(codes.len() * bits_per_record as usize);
    for &code in codes {
        stream.push_low_bits(code, bits_per_record);
    }
    Ok(stream)
}

//! Randomness extraction: fixed-size bit blocks hashed down to digests.
//!
//! The raw digitized stream carries slightly less entropy per bit than one
//! full bit, partly of classical origin. Hashing consecutive 553-bit
//! blocks to 512-bit Whirlpool digests (a 553/512 ≈ 1.08 reduction)
//! concentrates the entropy and removes the classical share measured by
//! the entropy analysis. Blocks are hashed independently — no chaining —
//! so extraction is stateless and parallelizes freely; the digest function
//! is pluggable, though only Whirlpool ships.

use crate::bitstream::BitStream;
use crate::whirlpool::whirlpool;
use thiserror::Error;

/// Errors from extraction.
#[derive(Debug, Error, PartialEq)]
pub enum ExtractorError {
    #[error("invalid extractor configuration: {0}")]
    InvalidConfig(String),
    #[error("input of {got} bits is shorter than one {needed}-bit block")]
    InputTooShort { needed: usize, got: usize },
}

/// Block geometry of the extractor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractorConfig {
    /// Digest size in bits; the shipped Whirlpool digest is 512.
    pub digest_bits: usize,
    /// Raw bits consumed per digest. The default 553 realizes the target
    /// ≈1.08 reduction factor exactly as 553/512.
    pub input_block_bits: usize,
}

impl Default for ExtractorConfig {
    fn default() -> Self {
        Self {
            digest_bits: 512,
            input_block_bits: 553,
        }
    }
}

impl ExtractorConfig {
    /// Raw-to-extracted reduction, `input_block_bits / digest_bits` (≥ 1).
    pub fn reduction_factor(&self) -> f64 {
        self.input_block_bits as f64 / self.digest_bits as f64
    }

    pub fn validate(&self) -> Result<(), ExtractorError> {
        if self.digest_bits == 0 || !self.digest_bits.is_multiple_of(8) {
            return Err(ExtractorError::InvalidConfig(format!(
                "digest_bits must be a positive multiple of 8, got {}",
                self.digest_bits
            )));
        }
        if self.input_block_bits <= self.digest_bits {
            return Err(ExtractorError::InvalidConfig(format!(
                "input_block_bits ({}) must exceed digest_bits ({}) so the \
                 reduction factor is above one",
                self.input_block_bits, self.digest_bits
            )));
        }
        Ok(())
    }
}

/// Result of one extraction pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractionOutcome {
    /// Concatenated digests; `bit_len = digest_bits × blocks`.
    pub stream: BitStream,
    /// Number of whole input blocks hashed.
    pub blocks: usize,
    /// Bits of the final partial block that were discarded.
    pub discarded_bits: usize,
}

/// Hash consecutive `input_block_bits`-sized blocks of `raw` with
/// Whirlpool, concatenating the digests. The final partial block, if any,
/// is discarded and its size reported.
pub fn extract(raw: &BitStream, cfg: &ExtractorConfig) -> Result<ExtractionOutcome, ExtractorError> {
    require_whirlpool_geometry(cfg)?;
    extract_with(raw, cfg, |block| whirlpool(block).to_vec())
}

/// [`extract`] with a caller-supplied digest function. The digest must
/// return exactly `digest_bits / 8` octets for every block.
pub fn extract_with(
    raw: &BitStream,
    cfg: &ExtractorConfig,
    mut digest: impl FnMut(&[u8]) -> Vec<u8>,
) -> Result<ExtractionOutcome, ExtractorError> {
    cfg.validate()?;
    let block_bits = cfg.input_block_bits;
    let blocks = raw.bit_len() / block_bits;
    if blocks == 0 {
        return Err(ExtractorError::InputTooShort {
            needed: block_bits,
            got: raw.bit_len(),
        });
    }
    let digest_octets = cfg.digest_bits / 8;
    let mut bytes = Vec::with_capacity(blocks * digest_octets);
    for k in 0..blocks {
        let block = raw
            .extract_octets(k * block_bits, block_bits)
            .expect("block range is within the stream by construction");
        let d = digest(&block);
        assert_eq!(
            d.len(),
            digest_octets,
            "digest function returned {} octets, configured for {digest_octets}",
            d.len()
        );
        bytes.extend_from_slice(&d);
    }
    Ok(ExtractionOutcome {
        stream: BitStream::from_bytes(bytes),
        blocks,
        discarded_bits: raw.bit_len() - blocks * block_bits,
    })
}

/// [`extract`] with blocks distributed over `workers` threads. Output is
/// byte-identical to the sequential path: blocks are chunked contiguously
/// and concatenated in order.
pub fn extract_parallel(
    raw: &BitStream,
    cfg: &ExtractorConfig,
    workers: usize,
) -> Result<ExtractionOutcome, ExtractorError> {
    require_whirlpool_geometry(cfg)?;
    if workers <= 1 {
        return extract(raw, cfg);
    }
    let block_bits = cfg.input_block_bits;
    let blocks = raw.bit_len() / block_bits;
    if blocks == 0 {
        return Err(ExtractorError::InputTooShort {
            needed: block_bits,
            got: raw.bit_len(),
        });
    }
    let chunk = blocks.div_ceil(workers);
    let digest_octets = cfg.digest_bits / 8;
    let parts: Vec<Vec<u8>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let lo = (w * chunk).min(blocks);
                let hi = ((w + 1) * chunk).min(blocks);
                scope.spawn(move || {
                    let mut out = Vec::with_capacity((hi - lo) * digest_octets);
                    for k in lo..hi {
                        let block = raw
                            .extract_octets(k * block_bits, block_bits)
                            .expect("block range is within the stream by construction");
                        out.extend_from_slice(&whirlpool(&block));
                    }
                    out
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("extraction worker panicked"))
            .collect()
    });
    let mut bytes = Vec::with_capacity(blocks * digest_octets);
    for part in parts {
        bytes.extend_from_slice(&part);
    }
    Ok(ExtractionOutcome {
        stream: BitStream::from_bytes(bytes),
        blocks,
        discarded_bits: raw.bit_len() - blocks * block_bits,
    })
}

fn require_whirlpool_geometry(cfg: &ExtractorConfig) -> Result<(), ExtractorError> {
    if cfg.digest_bits != 512 {
        return Err(ExtractorError::InvalidConfig(format!(
            "the shipped digest is 512-bit Whirlpool; digest_bits {} needs \
             a caller-supplied digest",
            cfg.digest_bits
        )));
    }
    Ok(())
}

/// Delivered random-bit rate: `prf × bits_per_pulse / reduction` (bits/s).
///
/// All arguments must be positive.
pub fn output_rate(prf: f64, bits_per_pulse: f64, reduction: f64) -> f64 {
    assert!(
        prf > 0.0 && bits_per_pulse > 0.0 && reduction > 0.0,
        "output_rate arguments must be positive"
    );
    prf * bits_per_pulse / reduction
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitstream::codes_to_bits;
    use crate::rng::from_seed;
    use rand::Rng;
    use std::cell::RefCell;

    fn random_stream(bits: usize, seed: u64) -> BitStream {
        let mut rng = from_seed(seed);
        let mut bytes = vec![0u8; bits.div_ceil(8)];
        rng.fill(&mut bytes[..]);
        let rem = bits % 8;
        if rem > 0 {
            *bytes.last_mut().unwrap() &= 0xFF << (8 - rem);
        }
        BitStream::from_bytes_with_len(bytes, bits).unwrap()
    }

    #[test]
    fn default_geometry_realizes_the_target_reduction() {
        let cfg = ExtractorConfig::default();
        assert!((cfg.reduction_factor() - 553.0 / 512.0).abs() < 1e-15);
        assert_eq!(format!("{:.4}", cfg.reduction_factor()), "1.0801");
    }

    #[test]
    fn one_block_in_one_digest_out() {
        let raw = random_stream(553, 31);
        let out = extract(&raw, &ExtractorConfig::default()).unwrap();
        assert_eq!(out.stream.bit_len(), 512);
        assert_eq!(out.blocks, 1);
        assert_eq!(out.discarded_bits, 0);
    }

    #[test]
    fn input_below_one_block_is_an_error() {
        let raw = random_stream(552, 32);
        assert_eq!(
            extract(&raw, &ExtractorConfig::default()),
            Err(ExtractorError::InputTooShort {
                needed: 553,
                got: 552
            })
        );
    }

    #[test]
    fn partial_final_block_is_discarded_and_counted() {
        let raw = random_stream(553 * 3 + 17, 33);
        let out = extract(&raw, &ExtractorConfig::default()).unwrap();
        assert_eq!(out.blocks, 3);
        assert_eq!(out.stream.bit_len(), 512 * 3);
        assert_eq!(out.discarded_bits, 17);
    }

    #[test]
    fn output_length_formula_holds_across_sizes() {
        for bits in [553usize, 1000, 5530, 55300, 55317] {
            let raw = random_stream(bits, 34);
            let out = extract(&raw, &ExtractorConfig::default()).unwrap();
            assert_eq!(out.stream.bit_len(), 512 * (bits / 553), "{bits} bits");
        }
    }

    #[test]
    fn permuting_input_blocks_permutes_output_digests() {
        let a = random_stream(553, 35);
        let b = random_stream(553, 36);
        let c = random_stream(553, 37);
        let join = |parts: &[&BitStream]| {
            let mut all = BitStream::new();
            for p in parts {
                for bit in p.iter() {
                    all.push_bit(bit);
                }
            }
            all
        };
        let abc = extract(&join(&[&a, &b, &c]), &ExtractorConfig::default()).unwrap();
        let cab = extract(&join(&[&c, &a, &b]), &ExtractorConfig::default()).unwrap();
        let digest = |out: &ExtractionOutcome, k: usize| out.stream.bytes()[64 * k..64 * (k + 1)].to_vec();
        assert_eq!(digest(&abc, 0), digest(&cab, 1));
        assert_eq!(digest(&abc, 1), digest(&cab, 2));
        assert_eq!(digest(&abc, 2), digest(&cab, 0));
    }

    #[test]
    fn equal_blocks_give_equal_digests() {
        // Stateless hashing: identical blocks map to identical digests.
        let one = random_stream(553, 38);
        let mut twice = BitStream::new();
        for _ in 0..2 {
            for bit in one.iter() {
                twice.push_bit(bit);
            }
        }
        let out = extract(&twice, &ExtractorConfig::default()).unwrap();
        assert_eq!(out.stream.bytes()[..64], out.stream.bytes()[64..128]);
    }

    #[test]
    fn blocks_are_padded_to_seventy_octets_with_zero_tail() {
        // All-ones input: every block hands the digest 70 octets whose
        // final 7 bits are the zero padding.
        let raw = BitStream::from_bytes(vec![0xFF; 139]);
        let seen = RefCell::new(Vec::new());
        extract_with(&raw, &ExtractorConfig::default(), |block| {
            seen.borrow_mut().push(block.to_vec());
            vec![0u8; 64]
        })
        .unwrap();
        let seen = seen.into_inner();
        assert_eq!(seen.len(), 2);
        for block in &seen {
            assert_eq!(block.len(), 70);
            assert_eq!(block[69] & 0x7F, 0);
        }
    }

    #[test]
    fn custom_digest_and_geometry_are_honored() {
        // 520-bit blocks, digest = first 64 octets: output is just the
        // leading bits of each block.
        let cfg = ExtractorConfig {
            digest_bits: 512,
            input_block_bits: 520,
        };
        let raw = random_stream(1040, 39);
        let out = extract_with(&raw, &cfg, |block| block[..64].to_vec()).unwrap();
        assert_eq!(out.blocks, 2);
        assert_eq!(&out.stream.bytes()[..64], &raw.bytes()[..64]);
        assert_eq!(&out.stream.bytes()[64..128], &raw.extract_octets(520, 512).unwrap()[..]);
    }

    #[test]
    fn degenerate_geometries_are_rejected() {
        let no_reduction = ExtractorConfig {
            digest_bits: 512,
            input_block_bits: 512,
        };
        assert!(matches!(
            extract(&random_stream(1024, 40), &no_reduction),
            Err(ExtractorError::InvalidConfig(_))
        ));
        let odd_digest = ExtractorConfig {
            digest_bits: 520,
            input_block_bits: 553,
        };
        assert!(matches!(
            extract(&random_stream(1024, 41), &odd_digest),
            Err(ExtractorError::InvalidConfig(_))
        ));
    }

    #[test]
    fn parallel_extraction_is_byte_identical_to_sequential() {
        let raw = random_stream(553 * 1000 + 5, 42);
        let sequential = extract(&raw, &ExtractorConfig::default()).unwrap();
        for workers in [1usize, 2, 3, 4, 7] {
            let parallel = extract_parallel(&raw, &ExtractorConfig::default(), workers).unwrap();
            assert_eq!(parallel, sequential, "{workers} workers");
        }
    }

    #[test]
    fn extracted_stream_from_codes_is_balanced() {
        let mut rng = from_seed(43);
        let codes: Vec<u32> = (0..10_000).map(|_| rng.gen_range(0..4096)).collect();
        let raw = codes_to_bits(&codes, 12, 12).unwrap();
        let out = extract(&raw, &ExtractorConfig::default()).unwrap();
        let n = out.stream.bit_len() as f64;
        let balance = out.stream.count_ones() as f64 / n;
        assert!((balance - 0.5).abs() < 4.0 / n.sqrt(), "balance {balance}");
    }

    #[test]
    fn output_rate_arithmetic() {
        // Unit reduction passes the raw bit rate through.
        assert_eq!(output_rate(1e6, 8.0, 1.0), 8e6);
        // Default pipeline geometry: 97.6 MHz × 12 bits / 1.08.
        let rate = output_rate(97.6e6, 12.0, 1.08);
        assert!((rate - 1.084e9).abs() < 1e6, "rate {rate}");
        // Fast-laser scenario clears 100 Gbps.
        assert!(output_rate(20e9, 5.4, 1.0) > 1e11);
        assert!((output_rate(20e9, 5.4, 1.0) - 1.08e11).abs() < 1e3);
    }

    #[test]
    #[should_panic(expected = "positive")]
    fn output_rate_rejects_nonpositive_arguments() {
        output_rate(0.0, 12.0, 1.08);
    }
}

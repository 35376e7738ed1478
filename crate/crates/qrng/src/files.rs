//! On-disk artifact formats: versioned little-endian binary files for
//! record batches and bitstreams, plus plain CSV for the derived tables.
//!
//! Record files open with a fixed 32-octet header (magic, format version,
//! payload kind, count, configuration hash) so a reader can refuse foreign
//! or stale files before touching the payload. Bitstream files carry a
//! 16-octet header with an exact bit length; `raw` mode drops the header
//! for interoperability with external consumers that want naked bytes.

use qrng_sim::bitstream::{BitStream, BitstreamError};
use qrng_sim::detection::DigitizedRecord;
use qrng_sim::entropy::EntropyReport;
use qrng_sim::mzi::EnergyRecord;
use qrng_sim::stattests::BatteryReport;
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::Path;
use thiserror::Error;

/// Magic octets opening every record file.
pub const RECORD_MAGIC: [u8; 8] = *b"QRNGRECS";
/// Magic octets opening every framed bitstream file.
pub const BITS_MAGIC: [u8; 8] = *b"QRNGBITS";
/// Format version this build reads and writes. Files declaring any other
/// version are refused.
pub const FORMAT_VERSION: u16 = 1;

const RECORD_HEADER_LEN: usize = 32;
const BITS_HEADER_LEN: usize = 16;
const ENERGY_RECORD_LEN: usize = 32;
const DIGITIZED_RECORD_LEN: usize = 8;

/// Errors from reading or writing artifact files.
#[derive(Debug, Error)]
pub enum FileError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: not a recognized file (bad magic)")]
    BadMagic { path: String },
    #[error("{path}: format version {found} is not supported (this build reads version {FORMAT_VERSION})")]
    UnsupportedVersion { path: String, found: u16 },
    #[error("{path}: holds {found} records, expected {expected} records")]
    WrongKind {
        path: String,
        expected: RecordKind,
        found: RecordKind,
    },
    #[error("{path}: unknown record kind tag {tag}")]
    UnknownKind { path: String, tag: u8 },
    #[error("{path}: file length {found} does not match header (expected {expected} octets)")]
    LengthMismatch {
        path: String,
        expected: usize,
        found: usize,
    },
    #[error("{path}: invalid bitstream payload: {source}")]
    BadBitstream {
        path: String,
        #[source]
        source: BitstreamError,
    },
}

impl FileError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

/// Payload kind of a record file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum RecordKind {
    /// Interferometer-output energy records (four `f64` per record).
    Energy = 1,
    /// Digitized signal codes (one `u32` code plus flags per record).
    Digitized = 2,
    /// Digitized detector-noise reference codes (same layout as
    /// [`RecordKind::Digitized`]).
    NoiseReference = 3,
}

impl fmt::Display for RecordKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Self::Energy => "energy",
            Self::Digitized => "digitized-signal",
            Self::NoiseReference => "noise-reference",
        };
        f.write_str(name)
    }
}

impl TryFrom<u8> for RecordKind {
    type Error = u8;
    fn try_from(tag: u8) -> Result<Self, u8> {
        match tag {
            1 => Ok(Self::Energy),
            2 => Ok(Self::Digitized),
            3 => Ok(Self::NoiseReference),
            other => Err(other),
        }
    }
}

/// Parsed record-file header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FileHeader {
    pub version: u16,
    pub kind: RecordKind,
    pub flags: u8,
    pub count: u64,
    pub config_hash: u64,
}

fn encode_header(kind: RecordKind, count: u64, config_hash: u64) -> [u8; RECORD_HEADER_LEN] {
    let mut h = [0u8; RECORD_HEADER_LEN];
    h[..8].copy_from_slice(&RECORD_MAGIC);
    h[8..10].copy_from_slice(&FORMAT_VERSION.to_le_bytes());
    h[10] = kind as u8;
    h[11] = 0; // flags
    h[12..16].copy_from_slice(&0u32.to_le_bytes()); // reserved
    h[16..24].copy_from_slice(&count.to_le_bytes());
    h[24..32].copy_from_slice(&config_hash.to_le_bytes());
    h
}

fn decode_header(path: &Path, bytes: &[u8]) -> Result<FileHeader, FileError> {
    let display = || path.display().to_string();
    if bytes.len() < RECORD_HEADER_LEN || bytes[..8] != RECORD_MAGIC {
        return Err(FileError::BadMagic { path: display() });
    }
    let version = u16::from_le_bytes(bytes[8..10].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(FileError::UnsupportedVersion {
            path: display(),
            found: version,
        });
    }
    let kind = RecordKind::try_from(bytes[10]).map_err(|tag| FileError::UnknownKind {
        path: display(),
        tag,
    })?;
    Ok(FileHeader {
        version,
        kind,
        flags: bytes[11],
        count: u64::from_le_bytes(bytes[16..24].try_into().unwrap()),
        config_hash: u64::from_le_bytes(bytes[24..32].try_into().unwrap()),
    })
}

fn check_payload_len(
    path: &Path,
    bytes: &[u8],
    count: u64,
    record_len: usize,
) -> Result<(), FileError> {
    let expected = RECORD_HEADER_LEN + (count as usize) * record_len;
    if bytes.len() != expected {
        return Err(FileError::LengthMismatch {
            path: path.display().to_string(),
            expected,
            found: bytes.len(),
        });
    }
    Ok(())
}

/// Write interferometer energy records with a headed, versioned framing.
pub fn write_energy_records(
    path: &Path,
    records: &[EnergyRecord],
    config_hash: u64,
) -> Result<(), FileError> {
    let mut buf =
        Vec::with_capacity(RECORD_HEADER_LEN + records.len() * ENERGY_RECORD_LEN);
    buf.extend_from_slice(&encode_header(
        RecordKind::Energy,
        records.len() as u64,
        config_hash,
    ));
    for r in records {
        buf.extend_from_slice(&r.u_out.to_le_bytes());
        buf.extend_from_slice(&r.u_in.to_le_bytes());
        buf.extend_from_slice(&r.v_in.to_le_bytes());
        buf.extend_from_slice(&r.dphi.to_le_bytes());
    }
    fs::write(path, buf).map_err(|e| FileError::io(path, e))
}

/// Read energy records, refusing foreign magic, other versions, and other
/// payload kinds.
pub fn read_energy_records(path: &Path) -> Result<(Vec<EnergyRecord>, FileHeader), FileError> {
    let bytes = fs::read(path).map_err(|e| FileError::io(path, e))?;
    let header = decode_header(path, &bytes)?;
    if header.kind != RecordKind::Energy {
        return Err(FileError::WrongKind {
            path: path.display().to_string(),
            expected: RecordKind::Energy,
            found: header.kind,
        });
    }
    check_payload_len(path, &bytes, header.count, ENERGY_RECORD_LEN)?;
    let f = |chunk: &[u8], i: usize| {
        f64::from_le_bytes(chunk[8 * i..8 * i + 8].try_into().unwrap())
    };
    let records = bytes[RECORD_HEADER_LEN..]
        .chunks_exact(ENERGY_RECORD_LEN)
        .map(|c| EnergyRecord {
            u_out: f(c, 0),
            u_in: f(c, 1),
            v_in: f(c, 2),
            dphi: f(c, 3),
        })
        .collect();
    Ok((records, header))
}

/// Write digitized records (signal or noise reference, per `kind`).
/// Per-sample diagnostics are not part of the format and are dropped.
pub fn write_digitized_records(
    path: &Path,
    records: &[DigitizedRecord],
    kind: RecordKind,
    config_hash: u64,
) -> Result<(), FileError> {
    let mut buf =
        Vec::with_capacity(RECORD_HEADER_LEN + records.len() * DIGITIZED_RECORD_LEN);
    buf.extend_from_slice(&encode_header(kind, records.len() as u64, config_hash));
    for r in records {
        buf.extend_from_slice(&r.code.to_le_bytes());
        buf.push(u8::from(r.saturated));
        buf.extend_from_slice(&[0u8; 3]);
    }
    fs::write(path, buf).map_err(|e| FileError::io(path, e))
}

/// Read digitized records of the expected kind.
pub fn read_digitized_records(
    path: &Path,
    expected: RecordKind,
) -> Result<(Vec<DigitizedRecord>, FileHeader), FileError> {
    let bytes = fs::read(path).map_err(|e| FileError::io(path, e))?;
    let header = decode_header(path, &bytes)?;
    if header.kind != expected {
        return Err(FileError::WrongKind {
            path: path.display().to_string(),
            expected,
            found: header.kind,
        });
    }
    check_payload_len(path, &bytes, header.count, DIGITIZED_RECORD_LEN)?;
    let records = bytes[RECORD_HEADER_LEN..]
        .chunks_exact(DIGITIZED_RECORD_LEN)
        .map(|c| DigitizedRecord {
            code: u32::from_le_bytes(c[..4].try_into().unwrap()),
            saturated: c[4] & 1 != 0,
            raw_samples: None,
        })
        .collect();
    Ok((records, header))
}

/// Write a bitstream. Framed mode prefixes the 16-octet header carrying
/// the exact bit length; `raw` writes the packed octets alone (the length
/// is then only known to octet precision).
pub fn write_bitstream(path: &Path, stream: &BitStream, raw: bool) -> Result<(), FileError> {
    let file = fs::File::create(path).map_err(|e| FileError::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let result = (|| {
        if !raw {
            w.write_all(&BITS_MAGIC)?;
            w.write_all(&(stream.bit_len() as u64).to_le_bytes())?;
        }
        w.write_all(stream.bytes())?;
        w.flush()
    })();
    result.map_err(|e| FileError::io(path, e))
}

/// Read a bitstream written by [`write_bitstream`]. In framed mode the
/// payload length and zero tail are validated against the header.
pub fn read_bitstream(path: &Path, raw: bool) -> Result<BitStream, FileError> {
    let bytes = fs::read(path).map_err(|e| FileError::io(path, e))?;
    if raw {
        return Ok(BitStream::from_bytes(bytes));
    }
    let display = || path.display().to_string();
    if bytes.len() < BITS_HEADER_LEN || bytes[..8] != BITS_MAGIC {
        return Err(FileError::BadMagic { path: display() });
    }
    let bit_len = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let payload = bytes[BITS_HEADER_LEN..].to_vec();
    let expected = BITS_HEADER_LEN + bit_len.div_ceil(8);
    if bytes.len() != expected {
        return Err(FileError::LengthMismatch {
            path: display(),
            expected,
            found: bytes.len(),
        });
    }
    BitStream::from_bytes_with_len(payload, bit_len).map_err(|e| FileError::BadBitstream {
        path: display(),
        source: e,
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), FileError> {
    fs::write(path, text).map_err(|e| FileError::io(path, e))
}

/// Comment line opening every CSV artifact: format version plus the
/// configuration hash, so plot data stays traceable to its run.
pub fn csv_preamble(config_hash: u64) -> String {
    format!("# qrng-csv format={FORMAT_VERSION} config=0x{config_hash:016x}\n")
}

/// Code histogram as `code,count` over the full ADC range (zero bins
/// included, so every file for a given resolution has the same shape).
pub fn write_histogram_csv(
    path: &Path,
    codes: &[u32],
    adc_bits: u32,
    config_hash: u64,
) -> Result<(), FileError> {
    let n_codes = 1usize << adc_bits;
    let mut counts = vec![0u64; n_codes];
    for &c in codes {
        counts[(c as usize).min(n_codes - 1)] += 1;
    }
    let mut text = csv_preamble(config_hash);
    text.push_str("code,count\n");
    for (code, count) in counts.iter().enumerate() {
        text.push_str(&format!("{code},{count}\n"));
    }
    write_text(path, &text)
}

/// Entropy-vs-resolution table as `b,total,noise,quantum`.
pub fn write_entropy_curve_csv(
    path: &Path,
    rows: &[EntropyReport],
    config_hash: u64,
) -> Result<(), FileError> {
    let mut text = csv_preamble(config_hash);
    text.push_str("b,total,noise,quantum\n");
    for r in rows {
        text.push_str(&format!(
            "{},{:?},{:?},{:?}\n",
            r.b, r.total_entropy, r.noise_entropy, r.quantum_entropy
        ));
    }
    write_text(path, &text)
}

/// Autocorrelation table as `lag,r`, truncated to the first 1000 lags
/// (1001 rows with lag 0) to keep the artifact bounded.
pub fn write_correlation_csv(path: &Path, r: &[f64], config_hash: u64) -> Result<(), FileError> {
    let mut text = csv_preamble(config_hash);
    text.push_str("lag,r\n");
    for (lag, value) in r.iter().take(1001).enumerate() {
        text.push_str(&format!("{lag},{value:?}\n"));
    }
    write_text(path, &text)
}

/// Statistical-battery table as `name,statistic,p_value,status`.
pub fn write_battery_csv(
    path: &Path,
    report: &BatteryReport,
    config_hash: u64,
) -> Result<(), FileError> {
    let mut text = csv_preamble(config_hash);
    text.push_str("name,statistic,p_value,status\n");
    for r in &report.results {
        text.push_str(&format!(
            "{},{:?},{:?},{:?}\n",
            r.name, r.statistic, r.p_value, r.status
        ));
    }
    write_text(path, &text)
}

/// Write the human-readable run report (prefixed with the same
/// traceability line as the CSVs).
pub fn write_report_txt(path: &Path, body: &str, config_hash: u64) -> Result<(), FileError> {
    let mut text = format!("# qrng-report format={FORMAT_VERSION} config=0x{config_hash:016x}\n");
    text.push_str(body);
    write_text(path, &text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qrng_sim::stattests::run_battery;

    fn tmp_dir(tag: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("qrng-files-{tag}-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        dir
    }

    fn sample_energy() -> Vec<EnergyRecord> {
        (0..5)
            .map(|i| EnergyRecord {
                u_out: i as f64 * 1.5,
                u_in: i as f64 + 0.25,
                v_in: 700.0 - i as f64,
                dphi: -3.0 + i as f64,
            })
            .collect()
    }

    fn sample_digitized() -> Vec<DigitizedRecord> {
        [(0u32, true), (2048, false), (4095, true), (17, false)]
            .into_iter()
            .map(|(code, saturated)| DigitizedRecord {
                code,
                saturated,
                raw_samples: None,
            })
            .collect()
    }

    #[test]
    fn energy_records_round_trip_with_header_metadata() {
        let dir = tmp_dir("energy");
        let path = dir.join("records.bin");
        let records = sample_energy();
        write_energy_records(&path, &records, 0xDEAD_BEEF).unwrap();
        let (back, header) = read_energy_records(&path).unwrap();
        assert_eq!(back, records);
        assert_eq!(header.kind, RecordKind::Energy);
        assert_eq!(header.count, records.len() as u64);
        assert_eq!(header.config_hash, 0xDEAD_BEEF);
        assert_eq!(header.version, FORMAT_VERSION);
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn digitized_records_round_trip_for_both_kinds() {
        let dir = tmp_dir("digitized");
        let records = sample_digitized();
        for kind in [RecordKind::Digitized, RecordKind::NoiseReference] {
            let path = dir.join(format!("{kind}.bin"));
            write_digitized_records(&path, &records, kind, 7).unwrap();
            let (back, header) = read_digitized_records(&path, kind).unwrap();
            assert_eq!(back, records);
            assert_eq!(header.kind, kind);
        }
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn record_file_size_is_header_plus_fixed_stride() {
        let dir = tmp_dir("stride");
        let path = dir.join("records.bin");
        write_energy_records(&path, &sample_energy(), 0).unwrap();
        assert_eq!(fs::metadata(&path).unwrap().len(), 32 + 5 * 32);
        write_digitized_records(&path, &sample_digitized(), RecordKind::Digitized, 0).unwrap();
        assert_eq!(fs::metadata(&path).unwrap().len(), 32 + 4 * 8);
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn foreign_magic_is_refused() {
        let dir = tmp_dir("magic");
        let path = dir.join("junk.bin");
        fs::write(&path, b"NOTAFILExxxxxxxxxxxxxxxxxxxxxxxx").unwrap();
        assert!(matches!(
            read_energy_records(&path),
            Err(FileError::BadMagic { .. })
        ));
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn newer_version_is_refused() {
        let dir = tmp_dir("version");
        let path = dir.join("records.bin");
        write_energy_records(&path, &sample_energy(), 0).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        bytes[8..10].copy_from_slice(&2u16.to_le_bytes());
        fs::write(&path, bytes).unwrap();
        assert!(matches!(
            read_energy_records(&path),
            Err(FileError::UnsupportedVersion { found: 2, .. })
        ));
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn wrong_kind_is_refused() {
        let dir = tmp_dir("kind");
        let path = dir.join("records.bin");
        write_digitized_records(&path, &sample_digitized(), RecordKind::Digitized, 0).unwrap();
        let err = read_digitized_records(&path, RecordKind::NoiseReference).unwrap_err();
        assert!(matches!(err, FileError::WrongKind { .. }));
        assert!(matches!(
            read_energy_records(&path),
            Err(FileError::WrongKind { .. })
        ));
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn truncated_payload_is_refused() {
        let dir = tmp_dir("truncated");
        let path = dir.join("records.bin");
        write_energy_records(&path, &sample_energy(), 0).unwrap();
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..bytes.len() - 8]).unwrap();
        assert!(matches!(
            read_energy_records(&path),
            Err(FileError::LengthMismatch { .. })
        ));
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn framed_bitstream_preserves_exact_bit_length() {
        let dir = tmp_dir("bits");
        let path = dir.join("stream.bits");
        let mut stream = BitStream::new();
        for i in 0..13 {
            stream.push_bit(i % 3 == 0);
        }
        write_bitstream(&path, &stream, false).unwrap();
        let back = read_bitstream(&path, false).unwrap();
        assert_eq!(back.bit_len(), 13);
        assert_eq!(back.bytes(), stream.bytes());
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn raw_bitstream_is_headerless_bytes() {
        let dir = tmp_dir("rawbits");
        let path = dir.join("stream.raw");
        let stream = BitStream::from_bytes(vec![0xAB, 0xCD, 0xEF]);
        write_bitstream(&path, &stream, true).unwrap();
        assert_eq!(fs::read(&path).unwrap(), vec![0xAB, 0xCD, 0xEF]);
        let back = read_bitstream(&path, true).unwrap();
        assert_eq!(back.bit_len(), 24);
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn corrupt_bitstream_header_is_refused() {
        let dir = tmp_dir("badbits");
        let path = dir.join("stream.bits");
        let stream = BitStream::from_bytes(vec![0xFF; 4]);
        write_bitstream(&path, &stream, false).unwrap();
        let good = fs::read(&path).unwrap();

        let mut wrong_len = good.clone();
        wrong_len[8..16].copy_from_slice(&100u64.to_le_bytes());
        fs::write(&path, &wrong_len).unwrap();
        assert!(matches!(
            read_bitstream(&path, false),
            Err(FileError::LengthMismatch { .. })
        ));

        // A declared bit length whose tail bits are not zero is refused.
        let mut bad_tail = good;
        bad_tail[8..16].copy_from_slice(&30u64.to_le_bytes());
        fs::write(&path, &bad_tail).unwrap();
        assert!(matches!(
            read_bitstream(&path, false),
            Err(FileError::BadBitstream { .. })
        ));
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn histogram_csv_covers_the_full_code_range() {
        let dir = tmp_dir("hist");
        let path = dir.join("histogram.csv");
        write_histogram_csv(&path, &[0, 1, 1, 3], 2, 0xABCD).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "# qrng-csv format=1 config=0x000000000000abcd\ncode,count\n0,1\n1,2\n2,0\n3,1\n"
        );
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn correlation_csv_is_capped_at_1001_rows() {
        let dir = tmp_dir("corr");
        let path = dir.join("correlation.csv");
        let r: Vec<f64> = (0..5000).map(|i| i as f64 * 1e-6).collect();
        write_correlation_csv(&path, &r, 0).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 1003);
        assert!(text.contains("lag,r\n0,0.0\n"));
        assert!(text.ends_with("1000,0.001\n"));
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn battery_csv_lists_every_test_with_status() {
        let dir = tmp_dir("battery");
        let path = dir.join("battery.csv");
        let stream = BitStream::from_bytes(vec![0b0101_0101; 2000]);
        let report = run_battery(&stream, 0.01);
        write_battery_csv(&path, &report, 0).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), report.results.len() + 2);
        assert!(text.contains("name,statistic,p_value,status\n"));
        assert!(text.contains("monobit,"));
        assert!(text.contains("serial(m=2),"));
        fs::remove_dir_all(dir).unwrap();
    }
}

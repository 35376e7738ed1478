//! The Whirlpool hash function (ISO/IEC 10118-3), implemented from the
//! published construction.
//!
//! Whirlpool digests arbitrary octet strings to 512 bits with a dedicated
//! 512-bit block cipher W in Miyaguchi–Preneel mode. The cipher state is an
//! 8×8 byte matrix; each of the 10 rounds applies the byte substitution γ,
//! the cyclic column permutation π, the MDS diffusion θ (circulant matrix
//! over GF(2⁸) mod x⁸+x⁴+x³+x²+1), and a round-key addition σ. Rows are
//! held here as big-endian `u64` words, and γ∘π∘θ collapses into eight
//! 256-entry lookup tables of rotated column values, built once at first
//! use from the algebraic definition of the S-box (the three 4-bit
//! mini-boxes E, E⁻¹, R) rather than from hard-coded constants.

use std::sync::OnceLock;

/// Exponential mini-box E and the pseudo-randomly generated R, from the
/// published specification; E⁻¹ is derived.
const MINI_E: [u8; 16] = [
    0x1, 0xB, 0x9, 0xC, 0xD, 0x6, 0xF, 0x3, 0xE, 0x8, 0x7, 0x4, 0xA, 0x2, 0x5, 0x0,
];
const MINI_R: [u8; 16] = [
    0x7, 0xC, 0xB, 0xD, 0xE, 0x4, 0x9, 0xF, 0x6, 0x3, 0x8, 0xA, 0x2, 0x5, 0x1, 0x0,
];

const ROUNDS: usize = 10;

struct Tables {
    /// `c[j][x]` is the θ column contribution of S-box output byte position
    /// `j`, i.e. the base circulant row rotated right by `j` bytes.
    c: [[u64; 256]; 8],
    /// Round constants as first-row words; index 1..=10 used.
    rc: [u64; ROUNDS + 1],
}

fn gf_double(x: u8) -> u8 {
    // Multiplication by x in GF(2⁸) modulo the Whirlpool polynomial 0x11D.
    (x << 1) ^ if x & 0x80 != 0 { 0x1D } else { 0 }
}

fn substitution_box() -> [u8; 256] {
    let mut inv_e = [0u8; 16];
    for (i, &v) in MINI_E.iter().enumerate() {
        inv_e[v as usize] = i as u8;
    }
    let mut sbox = [0u8; 256];
    for (x, slot) in sbox.iter_mut().enumerate() {
        let u = (x >> 4) as u8;
        let v = (x & 0xF) as u8;
        let eu = MINI_E[u as usize];
        let iv = inv_e[v as usize];
        let t = MINI_R[(eu ^ iv) as usize];
        *slot = MINI_E[(eu ^ t) as usize] << 4 | inv_e[(iv ^ t) as usize];
    }
    sbox
}

fn build_tables() -> Box<Tables> {
    let sbox = substitution_box();
    let mut tables = Box::new(Tables {
        c: [[0; 256]; 8],
        rc: [0; ROUNDS + 1],
    });
    for (x, &s1) in sbox.iter().enumerate() {
        let s2 = gf_double(s1);
        let s4 = gf_double(s2);
        let s8 = gf_double(s4);
        let s5 = s4 ^ s1;
        let s9 = s8 ^ s1;
        // MDS circulant row (1, 1, 4, 1, 8, 5, 2, 9), most significant
        // byte first.
        let row = u64::from_be_bytes([s1, s1, s4, s1, s8, s5, s2, s9]);
        for j in 0..8 {
            tables.c[j][x] = row.rotate_right(8 * j as u32);
        }
    }
    for r in 1..=ROUNDS {
        let mut bytes = [0u8; 8];
        for (j, b) in bytes.iter_mut().enumerate() {
            *b = sbox[8 * (r - 1) + j];
        }
        tables.rc[r] = u64::from_be_bytes(bytes);
    }
    tables
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Box<Tables>> = OnceLock::new();
    TABLES.get_or_init(build_tables)
}

/// One application of the round function ρ to every row of `src`:
/// γ (byte substitution), π (column rotation), θ (MDS diffusion), all
/// folded into the lookup tables, then the key addition σ[key].
fn round(src: &[u64; 8], key: &[u64; 8]) -> [u64; 8] {
    let t = tables();
    let mut out = [0u64; 8];
    for (i, slot) in out.iter_mut().enumerate() {
        let mut v = key[i];
        for j in 0..8 {
            let byte = (src[(i + 8 - j) & 7] >> (56 - 8 * j)) as u8;
            v ^= t.c[j][byte as usize];
        }
        *slot = v;
    }
    out
}

/// The W block cipher in Miyaguchi–Preneel mode: `h ← h ⊕ W_h(m) ⊕ m`.
fn compress(h: &mut [u64; 8], block: &[u8; 64]) {
    let t = tables();
    let mut m = [0u64; 8];
    for (i, word) in m.iter_mut().enumerate() {
        *word = u64::from_be_bytes(block[8 * i..8 * i + 8].try_into().expect("8-byte chunk"));
    }
    let mut key = *h;
    let mut state = [0u64; 8];
    for i in 0..8 {
        state[i] = m[i] ^ key[i];
    }
    for r in 1..=ROUNDS {
        let mut rc_row = [0u64; 8];
        rc_row[0] = t.rc[r];
        key = round(&key, &rc_row);
        state = round(&state, &key);
    }
    for i in 0..8 {
        h[i] ^= state[i] ^ m[i];
    }
}

/// Streaming Whirlpool hasher.
#[derive(Clone)]
pub struct Whirlpool {
    h: [u64; 8],
    buffer: [u8; 64],
    buf_len: usize,
    message_bytes: u128,
}

impl Default for Whirlpool {
    fn default() -> Self {
        Self::new()
    }
}

impl Whirlpool {
    pub fn new() -> Self {
        Self {
            h: [0; 8],
            buffer: [0; 64],
            buf_len: 0,
            message_bytes: 0,
        }
    }

    /// Absorb message octets.
    pub fn update(&mut self, data: &[u8]) {
        self.message_bytes += data.len() as u128;
        self.absorb(data);
    }

    fn absorb(&mut self, mut data: &[u8]) {
        if self.buf_len > 0 {
            let take = (64 - self.buf_len).min(data.len());
            self.buffer[self.buf_len..self.buf_len + take].copy_from_slice(&data[..take]);
            self.buf_len += take;
            data = &data[take..];
            if self.buf_len == 64 {
                let block = self.buffer;
                compress(&mut self.h, &block);
                self.buf_len = 0;
            }
        }
        while data.len() >= 64 {
            compress(&mut self.h, data[..64].try_into().expect("64-byte block"));
            data = &data[64..];
        }
        if !data.is_empty() {
            self.buffer[..data.len()].copy_from_slice(data);
            self.buf_len = data.len();
        }
    }

    /// Pad and produce the 512-bit digest.
    ///
    /// Padding appends a single 1-bit, zeros until the length is congruent
    /// to 32 modulo 64 octets, then the message bit length as a 256-bit
    /// big-endian integer.
    pub fn finalize(mut self) -> [u8; 64] {
        let bit_len = self.message_bytes * 8;
        self.absorb(&[0x80]);
        let zeros = (32 + 64 - self.buf_len) % 64;
        self.absorb(&vec![0u8; zeros]);
        self.absorb(&[0u8; 16]);
        self.absorb(&bit_len.to_be_bytes());
        debug_assert_eq!(self.buf_len, 0);
        let mut out = [0u8; 64];
        for (i, word) in self.h.iter().enumerate() {
            out[8 * i..8 * i + 8].copy_from_slice(&word.to_be_bytes());
        }
        out
    }
}

/// One-shot digest of a message.
pub fn whirlpool(message: &[u8]) -> [u8; 64] {
    let mut hasher = Whirlpool::new();
    hasher.update(message);
    hasher.finalize()
}

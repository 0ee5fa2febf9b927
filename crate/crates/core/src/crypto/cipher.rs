//! ToyCipher: a Simeck-style ARX-with-AND block cipher, fixed bit-exactly.
//!
//! State is two 32-bit words `(a, b)`. Round `i` maps
//! `(a, b) <- (b ^ f(a) ^ k[i % 4] ^ i, a)` with
//! `f(a) = (a & rotl(a, 5)) ^ rotl(a, 1)`. The key is four big-endian 32-bit
//! words taken from a 128-bit key; a plaintext or ciphertext is one
//! big-endian 64-bit block. Not claimed cryptographically strong; chosen
//! because the round function compiles to small AND/XOR/rotation circuits.

pub const ROUNDS: usize = 32;
pub const KEY_BITS: usize = 128;
pub const BLOCK_BITS: usize = 64;

/// Big-endian 32-bit words from a 16-byte key.
pub fn key_words(bytes: &[u8; 16]) -> [u32; 4] {
    let mut k = [0u32; 4];
    for (i, w) in k.iter_mut().enumerate() {
        *w = u32::from_be_bytes(bytes[4 * i..4 * i + 4].try_into().unwrap());
    }
    k
}

/// Key from up to 128 bits, MSB-first within each word, zero-padded.
pub fn key_from_bits(bits: &[bool]) -> [u32; 4] {
    assert!(bits.len() <= KEY_BITS, "key material longer than 128 bits");
    let mut k = [0u32; 4];
    for (i, &bit) in bits.iter().enumerate() {
        if bit {
            k[i / 32] |= 1 << (31 - (i % 32));
        }
    }
    k
}

pub fn key_from_halves(hi: u64, lo: u64) -> [u32; 4] {
    [(hi >> 32) as u32, hi as u32, (lo >> 32) as u32, lo as u32]
}

#[inline]
fn round_fn(a: u32) -> u32 {
    (a & a.rotate_left(5)) ^ a.rotate_left(1)
}

pub fn encrypt_block(key: &[u32; 4], block: u64) -> u64 {
    let mut a = (block >> 32) as u32;
    let mut b = block as u32;
    for i in 0..ROUNDS {
        let na = b ^ round_fn(a) ^ key[i % 4] ^ (i as u32);
        b = a;
        a = na;
    }
    ((a as u64) << 32) | (b as u64)
}

/// Keystream in counter mode: block `j` is `encrypt(key, j)` with the block
/// counter as a big-endian 64-bit integer. Bits are emitted MSB-first.
pub fn toy_prg(key: &[u32; 4], n_bits: usize) -> Vec<bool> {
    let mut out = Vec::with_capacity(n_bits);
    let mut counter = 0u64;
    while out.len() < n_bits {
        let block = encrypt_block(key, counter);
        let take = (n_bits - out.len()).min(BLOCK_BITS);
        for t in 0..take {
            out.push((block >> (63 - t)) & 1 == 1);
        }
        counter += 1;
    }
    out
}

pub fn bits_to_bytes(bits: &[bool]) -> Vec<u8> {
    let mut out = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        if b {
            out[i / 8] |= 1 << (7 - (i % 8));
        }
    }
    out
}

pub fn bytes_to_bits(bytes: &[u8], n_bits: usize) -> Vec<bool> {
    assert!(n_bits <= bytes.len() * 8);
    (0..n_bits).map(|i| (bytes[i / 8] >> (7 - (i % 8))) & 1 == 1).collect()
}

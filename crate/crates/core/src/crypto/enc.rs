//! Secret-key encryption with a one-bit validity frame.
//!
//! A plaintext frame is `validity_bit || payload`, zero-padded for the dummy
//! message, XORed against the ToyCipher keystream keyed by
//! `expand(sk) || index`. Every ciphertext of a session has the same length,
//! whether it carries a payload or the dummy, so transcripts cannot be
//! distinguished by shape.

use std::collections::HashSet;

use super::cipher::{key_from_halves, toy_prg};
use super::CryptoError;
use crate::rng::SeedStream;

/// Secret key of kappa bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretKey(pub Vec<bool>);

impl SecretKey {
    pub fn generate(rng: &mut SeedStream, kappa: usize) -> SecretKey {
        SecretKey(rng.bits(kappa))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// XOR-fold to 64 bits: bit `i` of the key lands on position `i mod 64`.
    pub fn expand64(&self) -> u64 {
        let mut v = 0u64;
        for (i, &b) in self.0.iter().enumerate() {
            if b {
                v ^= 1 << (63 - (i % 64));
            }
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ciphertext {
    pub index: u64,
    pub body: Vec<bool>,
}

impl Ciphertext {
    pub fn body_bytes(&self) -> Vec<u8> {
        super::cipher::bits_to_bytes(&self.body)
    }
}

fn keystream(sk: &SecretKey, index: u64, n_bits: usize) -> Vec<bool> {
    let key = key_from_halves(sk.expand64(), index);
    toy_prg(&key, n_bits)
}

/// Number of keystream blocks consumed per ciphertext (work accounting).
pub fn enc_prg_blocks(payload_bits: usize) -> u64 {
    ((1 + payload_bits) as u64).div_ceil(64)
}

/// Encrypts `m` (or the dummy, for `None`) under `(sk, index)`.
pub fn enc(
    sk: &SecretKey,
    index: u64,
    m: Option<&[bool]>,
    payload_bits: usize,
) -> Result<Ciphertext, CryptoError> {
    let mut frame = Vec::with_capacity(1 + payload_bits);
    match m {
        Some(bits) => {
            if bits.len() > payload_bits {
                return Err(CryptoError::LengthMismatch {
                    expected: payload_bits,
                    got: bits.len(),
                });
            }
            frame.push(true);
            frame.extend_from_slice(bits);
            frame.resize(1 + payload_bits, false);
        }
        None => frame.resize(1 + payload_bits, false),
    }
    let ks = keystream(sk, index, frame.len());
    let body = frame.iter().zip(&ks).map(|(a, b)| a ^ b).collect();
    Ok(Ciphertext { index, body })
}

/// Decrypts; `None` is the dummy message (or an invalid frame).
pub fn dec(sk: &SecretKey, ct: &Ciphertext) -> Option<Vec<bool>> {
    let ks = keystream(sk, ct.index, ct.body.len());
    let mut frame: Vec<bool> = ct.body.iter().zip(&ks).map(|(a, b)| a ^ b).collect();
    if frame.is_empty() || !frame[0] {
        return None;
    }
    frame.remove(0);
    Some(frame)
}

/// Session wrapper enforcing one-use encryption indices.
pub struct EncSession {
    pub sk: SecretKey,
    pub payload_bits: usize,
    used: HashSet<u64>,
}

impl EncSession {
    pub fn new(sk: SecretKey, payload_bits: usize) -> EncSession {
        EncSession { sk, payload_bits, used: HashSet::new() }
    }

    pub fn enc(&mut self, index: u64, m: Option<&[bool]>) -> Result<Ciphertext, CryptoError> {
        if !self.used.insert(index) {
            return Err(CryptoError::IndexReuse(index));
        }
        enc(&self.sk, index, m, self.payload_bits)
    }
}

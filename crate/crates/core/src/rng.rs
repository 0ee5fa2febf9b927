//! Deterministic seeded randomness.
//!
//! Every random choice in a scenario is drawn from a [`SeedStream`]: a
//! ToyCipher counter-mode keystream keyed by the scenario seed, a domain tag
//! and an index. Distinct (domain, index) pairs give disjoint streams, so
//! runs are reproducible bit-for-bit from the scenario seed alone.

use crate::crypto::cipher::{encrypt_block, key_from_halves};

/// Domain tags for stream derivation. Each protocol surface draws from its
/// own domain so streams never collide.
pub mod domain {
    pub const CHALLENGE: u32 = 1;
    pub const PROVER: u32 = 2;
    pub const PUBLIC_PARAMS: u32 = 3;
    pub const ZK_CHALLENGE: u32 = 4;
    pub const SIMULATOR: u32 = 5;
    pub const ATTACK: u32 = 6;
    pub const MEASUREMENT: u32 = 7;
    pub const TRIAL: u32 = 8;
    pub const TICK_CHALLENGE: u32 = 9;
}

#[derive(Clone, Debug)]
pub struct SeedStream {
    key: [u32; 4],
    counter: u64,
    buf: u64,
    bits_left: u32,
}

impl SeedStream {
    pub fn derive(seed: u64, domain: u32, index: u64) -> SeedStream {
        // 128-bit cipher key: seed || (domain, low 32 bits of index). The
        // high index bits fold into the domain word so wide indices stay
        // distinct.
        let hi = seed;
        let lo = (((domain as u64) ^ (index >> 32 << 8)) << 32) | (index & 0xffff_ffff);
        SeedStream {
            key: key_from_halves(hi, lo),
            counter: 0,
            buf: 0,
            bits_left: 0,
        }
    }

    fn refill(&mut self) {
        self.buf = encrypt_block(&self.key, self.counter);
        self.counter += 1;
        self.bits_left = 64;
    }

    pub fn bit(&mut self) -> bool {
        if self.bits_left == 0 {
            self.refill();
        }
        let b = (self.buf >> 63) & 1 == 1;
        self.buf <<= 1;
        self.bits_left -= 1;
        b
    }

    pub fn bits(&mut self, n: usize) -> Vec<bool> {
        (0..n).map(|_| self.bit()).collect()
    }

    pub fn u64(&mut self) -> u64 {
        let mut v = 0u64;
        for _ in 0..64 {
            v = (v << 1) | self.bit() as u64;
        }
        v
    }

    pub fn bytes(&mut self, n: usize) -> Vec<u8> {
        crate::crypto::cipher::bits_to_bytes(&self.bits(n * 8))
    }

    /// Uniform f64 in [0, 1) with 53 bits of precision.
    pub fn f64(&mut self) -> f64 {
        let mut v = 0u64;
        for _ in 0..53 {
            v = (v << 1) | self.bit() as u64;
        }
        v as f64 / (1u64 << 53) as f64
    }

    /// Uniform integer in [0, n) by rejection sampling.
    pub fn below(&mut self, n: u32) -> u32 {
        assert!(n > 0);
        let limit = u32::MAX - (u32::MAX % n);
        loop {
            let mut v = 0u32;
            for _ in 0..32 {
                v = (v << 1) | self.bit() as u32;
            }
            if v < limit {
                return v % n;
            }
        }
    }
}

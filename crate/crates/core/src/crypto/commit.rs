//! Naor-style string commitment from the toy PRG.
//!
//! Public parameters hold one uniform 3*lambda-bit block per committed bit.
//! Committing bit `m_i` with randomness `r_i` (lambda bits) outputs
//! `G(r_i) ^ (m_i * pp_i)` where `G` stretches `r_i` to 3*lambda bits.
//! Recomputation from the opening reproduces the commitment exactly.

use super::cipher::{key_from_bits, toy_prg};
use super::CryptoError;
use crate::rng::SeedStream;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicParams {
    pub lambda: usize,
    /// One 3*lambda-bit block per committable message bit.
    pub blocks: Vec<Vec<bool>>,
}

impl PublicParams {
    pub fn msg_bits(&self) -> usize {
        self.blocks.len()
    }

    pub fn to_bits(&self) -> Vec<bool> {
        self.blocks.iter().flatten().copied().collect()
    }

    pub fn from_bits(lambda: usize, msg_bits: usize, bits: &[bool]) -> Option<PublicParams> {
        let block = 3 * lambda;
        if bits.len() != block * msg_bits {
            return None;
        }
        Some(PublicParams {
            lambda,
            blocks: bits.chunks(block).map(<[bool]>::to_vec).collect(),
        })
    }
}

/// Samples public parameters for committing `msg_bits` bits.
pub fn com_setup(rng: &mut SeedStream, lambda: usize, msg_bits: usize) -> PublicParams {
    PublicParams {
        lambda,
        blocks: (0..msg_bits).map(|_| rng.bits(3 * lambda)).collect(),
    }
}

/// PRG stretch of a lambda-bit seed to 3*lambda bits.
pub fn g_stretch(seed: &[bool]) -> Vec<bool> {
    let key = key_from_bits(seed);
    toy_prg(&key, 3 * seed.len())
}

/// Keystream blocks used by one `g_stretch` call (work accounting).
pub fn g_stretch_blocks(lambda: usize) -> u64 {
    (3 * lambda as u64).div_ceil(64)
}

/// Commits `msg` under `pp` with `lambda` randomness bits per message bit.
pub fn com(pp: &PublicParams, msg: &[bool], rand: &[bool]) -> Result<Vec<bool>, CryptoError> {
    if msg.len() != pp.msg_bits() {
        return Err(CryptoError::LengthMismatch { expected: pp.msg_bits(), got: msg.len() });
    }
    if rand.len() != pp.lambda * msg.len() {
        return Err(CryptoError::LengthMismatch {
            expected: pp.lambda * msg.len(),
            got: rand.len(),
        });
    }
    let mut out = Vec::with_capacity(3 * pp.lambda * msg.len());
    for (i, &m) in msg.iter().enumerate() {
        let r_i = &rand[i * pp.lambda..(i + 1) * pp.lambda];
        let g = g_stretch(r_i);
        for (j, gb) in g.iter().enumerate() {
            out.push(gb ^ (m && pp.blocks[i][j]));
        }
    }
    Ok(out)
}

/// A message and the randomness that opens its commitment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Opening {
    pub msg: Vec<bool>,
    pub rand: Vec<bool>,
}

pub fn com_verify(pp: &PublicParams, commitment: &[bool], opening: &Opening) -> bool {
    match com(pp, &opening.msg, &opening.rand) {
        Ok(c) => c == commitment,
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::domain;

    fn rng(i: u64) -> SeedStream {
        SeedStream::derive(0xc0, domain::TRIAL, i)
    }

    #[test]
    fn commitment_is_deterministic() {
        let mut r = rng(0);
        let pp = com_setup(&mut r, 24, 8);
        let msg = r.bits(8);
        let rand = r.bits(24 * 8);
        assert_eq!(com(&pp, &msg, &rand).unwrap(), com(&pp, &msg, &rand).unwrap());
    }

    #[test]
    fn randomness_bit_flip_changes_commitment() {
        let mut r = rng(1);
        let pp = com_setup(&mut r, 24, 4);
        let msg = r.bits(4);
        let rand = r.bits(24 * 4);
        let base = com(&pp, &msg, &rand).unwrap();
        for flip in 0..rand.len() {
            let mut rand2 = rand.clone();
            rand2[flip] = !rand2[flip];
            assert_ne!(base, com(&pp, &msg, &rand2).unwrap(), "flip at {flip}");
        }
    }

    #[test]
    fn length_mismatches_are_rejected() {
        let mut r = rng(2);
        let pp = com_setup(&mut r, 24, 4);
        let msg = r.bits(3);
        let rand = r.bits(24 * 4);
        assert!(com(&pp, &msg, &rand).is_err());
        let msg = r.bits(4);
        let rand = r.bits(24 * 3);
        assert!(com(&pp, &msg, &rand).is_err());
    }

    /// Binding at toy size: for a single committed bit at lambda = 8,
    /// exhaustively search all (m=0, r) vs (m=1, r') pairs for collisions.
    /// At least 99% of sampled public parameters must admit none.
    #[test]
    fn toy_binding_brute_force() {
        let lambda = 8;
        let mut clean = 0usize;
        let samples = 100;
        for s in 0..samples {
            let mut r = rng(100 + s as u64);
            let pp = com_setup(&mut r, lambda, 1);
            // Enumerate G(r) for all 2^8 seeds once.
            let stretched: Vec<Vec<bool>> = (0..256u16)
                .map(|v| {
                    let seed: Vec<bool> = (0..8).map(|i| (v >> (7 - i)) & 1 == 1).collect();
                    g_stretch(&seed)
                })
                .collect();
            let mut collision = false;
            'outer: for a in &stretched {
                for b in &stretched {
                    // com(0; r) = G(r), com(1; r') = G(r') ^ pp.
                    let equal = a
                        .iter()
                        .zip(b.iter().zip(&pp.blocks[0]))
                        .all(|(x, (y, p))| *x == (y ^ p));
                    if equal {
                        collision = true;
                        break 'outer;
                    }
                }
            }
            if !collision {
                clean += 1;
            }
        }
        assert!(clean * 100 >= samples * 99, "clean pp: {clean}/{samples}");
    }
}

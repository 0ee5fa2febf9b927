//! Honest-verifier zero knowledge for circuit satisfiability via
//! MPC-in-the-head over three XOR-shared parties.
//!
//! The witness splits into three random shares; XOR/NOT/CONST gates are
//! local, AND gates use the standard (2,3)-decomposition with per-party
//! randomness tapes. The prover commits to each party's view, the verifier's
//! challenge `e` opens the adjacent pair `(e, e+1)`, and verification replays
//! party `e` gate by gate. Soundness error is 2/3 per repetition. Challenges
//! are supplied externally; there is no Fiat-Shamir transform.

use super::circuit::{Circuit, Gate};
use super::commit::{com, PublicParams};
use crate::rng::SeedStream;

/// One simulated party's view: witness share, AND-gate randomness tape, and
/// AND-gate output shares. Everything else is recomputable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct View {
    pub input_shares: Vec<bool>,
    pub tape: Vec<bool>,
    pub and_outs: Vec<bool>,
}

impl View {
    pub fn bit_len(n_inputs: usize, n_ands: usize) -> usize {
        n_inputs + 2 * n_ands
    }

    pub fn to_bits(&self) -> Vec<bool> {
        let mut out = Vec::with_capacity(self.input_shares.len() + self.tape.len() + self.and_outs.len());
        out.extend_from_slice(&self.input_shares);
        out.extend_from_slice(&self.tape);
        out.extend_from_slice(&self.and_outs);
        out
    }

    fn shape_ok(&self, n_inputs: usize, n_ands: usize) -> bool {
        self.input_shares.len() == n_inputs
            && self.tape.len() == n_ands
            && self.and_outs.len() == n_ands
    }
}

#[derive(Debug, Clone)]
pub struct RepProof {
    pub commitments: [Vec<bool>; 3],
    pub output_shares: [bool; 3],
    pub challenge: u8,
    /// Views `e` and `e+1 (mod 3)` with their commitment randomness.
    pub opened_views: [View; 2],
    pub opened_rand: [Vec<bool>; 2],
}

#[derive(Debug, Clone)]
pub struct ZkProof {
    pub reps: Vec<RepProof>,
}

/// Wire values of one party derived from its own records, with AND outputs
/// taken from the view rather than recomputed.
fn derive_wires(c: &Circuit, party_index: usize, view: &View) -> Vec<bool> {
    let ords = c.and_ordinals();
    let mut w = vec![false; c.gates.len()];
    for (i, g) in c.gates.iter().enumerate() {
        w[i] = match *g {
            Gate::Input(k) => view.input_shares[k as usize],
            Gate::Const(cst) => {
                if party_index == 0 {
                    cst
                } else {
                    false
                }
            }
            Gate::Xor(a, b) => w[a as usize] ^ w[b as usize],
            Gate::Not(a) => {
                if party_index == 0 {
                    !w[a as usize]
                } else {
                    w[a as usize]
                }
            }
            Gate::And(_, _) => view.and_outs[ords[i].unwrap() as usize],
        };
    }
    w
}

/// Full three-party execution. Returns the views and output shares.
fn mpc_execute(c: &Circuit, witness: &[bool], rng: &mut SeedStream) -> ([View; 3], [bool; 3]) {
    let n_ands = c.and_count();
    let s0 = rng.bits(witness.len());
    let s1 = rng.bits(witness.len());
    let s2: Vec<bool> = witness
        .iter()
        .enumerate()
        .map(|(i, &w)| w ^ s0[i] ^ s1[i])
        .collect();
    let shares = [s0, s1, s2];
    let tapes = [rng.bits(n_ands), rng.bits(n_ands), rng.bits(n_ands)];

    let mut wires = [
        vec![false; c.gates.len()],
        vec![false; c.gates.len()],
        vec![false; c.gates.len()],
    ];
    let mut and_outs = [
        Vec::with_capacity(n_ands),
        Vec::with_capacity(n_ands),
        Vec::with_capacity(n_ands),
    ];
    let mut and_k = 0usize;
    for (i, g) in c.gates.iter().enumerate() {
        match *g {
            Gate::Input(k) => {
                for p in 0..3 {
                    wires[p][i] = shares[p][k as usize];
                }
            }
            Gate::Const(cst) => {
                wires[0][i] = cst;
            }
            Gate::Xor(a, b) => {
                for p in 0..3 {
                    wires[p][i] = wires[p][a as usize] ^ wires[p][b as usize];
                }
            }
            Gate::Not(a) => {
                wires[0][i] = !wires[0][a as usize];
                wires[1][i] = wires[1][a as usize];
                wires[2][i] = wires[2][a as usize];
            }
            Gate::And(a, b) => {
                let x: Vec<bool> = (0..3).map(|p| wires[p][a as usize]).collect();
                let y: Vec<bool> = (0..3).map(|p| wires[p][b as usize]).collect();
                for p in 0..3 {
                    let q = (p + 1) % 3;
                    let z = (x[p] & y[p])
                        ^ (x[q] & y[p])
                        ^ (x[p] & y[q])
                        ^ tapes[p][and_k]
                        ^ tapes[q][and_k];
                    wires[p][i] = z;
                    and_outs[p].push(z);
                }
                and_k += 1;
            }
        }
    }
    let views: [View; 3] = core::array::from_fn(|p| View {
        input_shares: shares[p].clone(),
        tape: tapes[p].clone(),
        and_outs: and_outs[p].clone(),
    });
    let outputs: [bool; 3] = core::array::from_fn(|p| wires[p][c.output as usize]);
    (views, outputs)
}

fn commit_view(
    pp: &PublicParams,
    view: &View,
    rng: &mut SeedStream,
) -> (Vec<bool>, Vec<bool>) {
    let bits = view.to_bits();
    let rand = rng.bits(pp.lambda * bits.len());
    let c = com(pp, &bits, &rand).expect("view commitment sizes agree");
    (c, rand)
}

fn assemble_rep(
    pp: &PublicParams,
    views: [View; 3],
    outputs: [bool; 3],
    challenge: u8,
    rng: &mut SeedStream,
) -> RepProof {
    let mut commitments: [Vec<bool>; 3] = Default::default();
    let mut rands: [Vec<bool>; 3] = Default::default();
    for p in 0..3 {
        let (c, r) = commit_view(pp, &views[p], rng);
        commitments[p] = c;
        rands[p] = r;
    }
    let e = challenge as usize;
    let f = (e + 1) % 3;
    RepProof {
        commitments,
        output_shares: outputs,
        challenge,
        opened_views: [views[e].clone(), views[f].clone()],
        opened_rand: [rands[e].clone(), rands[f].clone()],
    }
}

/// Honest prover. Requires a satisfying witness and challenge bits for every
/// repetition (honest-verifier model: challenges are drawn by the verifier
/// from the scenario seed and handed over).
pub fn zk_prove(
    c: &Circuit,
    witness: &[bool],
    pp: &PublicParams,
    challenges: &[u8],
    rng: &mut SeedStream,
) -> ZkProof {
    assert_eq!(c.eval(witness), Ok(true), "zk_prove needs a satisfying witness");
    let reps = challenges
        .iter()
        .map(|&e| {
            let (views, outputs) = mpc_execute(c, witness, rng);
            debug_assert_eq!(outputs[0] ^ outputs[1] ^ outputs[2], true);
            assemble_rep(pp, views, outputs, e, rng)
        })
        .collect();
    ZkProof { reps }
}

/// Verifier. Any malformed or inconsistent proof rejects; nothing panics on
/// adversarial input.
pub fn zk_verify(c: &Circuit, proof: &ZkProof, pp: &PublicParams, challenges: &[u8]) -> bool {
    if proof.reps.len() != challenges.len() || proof.reps.is_empty() {
        return false;
    }
    let n_ands = c.and_count();
    let ords = c.and_ordinals();
    for (rep, &e) in proof.reps.iter().zip(challenges) {
        if rep.challenge != e || e > 2 {
            return false;
        }
        let e = e as usize;
        let f = (e + 1) % 3;
        let view_e = &rep.opened_views[0];
        let view_f = &rep.opened_views[1];
        if !view_e.shape_ok(c.n_inputs, n_ands) || !view_f.shape_ok(c.n_inputs, n_ands) {
            return false;
        }
        // Commitment openings.
        for (slot, (view, party)) in [(view_e, e), (view_f, f)].iter().enumerate() {
            let bits = view.to_bits();
            if rep.opened_rand[slot].len() != pp.lambda * bits.len() {
                return false;
            }
            match com(pp, &bits, &rep.opened_rand[slot]) {
                Ok(cm) if cm == rep.commitments[*party] => {}
                _ => return false,
            }
        }
        // Party f's wires are taken from its records; party e is replayed.
        let wires_f = derive_wires(c, f, view_f);
        let mut wires_e = vec![false; c.gates.len()];
        for (i, g) in c.gates.iter().enumerate() {
            wires_e[i] = match *g {
                Gate::Input(k) => view_e.input_shares[k as usize],
                Gate::Const(cst) => {
                    if e == 0 {
                        cst
                    } else {
                        false
                    }
                }
                Gate::Xor(a, b) => wires_e[a as usize] ^ wires_e[b as usize],
                Gate::Not(a) => {
                    if e == 0 {
                        !wires_e[a as usize]
                    } else {
                        wires_e[a as usize]
                    }
                }
                Gate::And(a, b) => {
                    let k = ords[i].unwrap() as usize;
                    let z = (wires_e[a as usize] & wires_e[b as usize])
                        ^ (wires_f[a as usize] & wires_e[b as usize])
                        ^ (wires_e[a as usize] & wires_f[b as usize])
                        ^ view_e.tape[k]
                        ^ view_f.tape[k];
                    if z != view_e.and_outs[k] {
                        return false;
                    }
                    z
                }
            };
        }
        let o_e = wires_e[c.output as usize];
        let o_f = wires_f[c.output as usize];
        if o_e != rep.output_shares[e] || o_f != rep.output_shares[f] {
            return false;
        }
        if !(rep.output_shares[0] ^ rep.output_shares[1] ^ rep.output_shares[2]) {
            return false;
        }
    }
    true
}

/// HVZK simulator: fabricates the two views the given challenge will open and
/// commits to a dummy third view. No witness involved.
pub fn zk_simulate(
    c: &Circuit,
    pp: &PublicParams,
    challenges: &[u8],
    rng: &mut SeedStream,
) -> ZkProof {
    let n_ands = c.and_count();
    let ords = c.and_ordinals();
    let reps = challenges
        .iter()
        .map(|&e_u8| {
            let e = e_u8 as usize % 3;
            let f = (e + 1) % 3;
            let g = (e + 2) % 3;
            let view_f = View {
                input_shares: rng.bits(c.n_inputs),
                tape: rng.bits(n_ands),
                and_outs: rng.bits(n_ands),
            };
            let wires_f = derive_wires(c, f, &view_f);
            let mut view_e = View {
                input_shares: rng.bits(c.n_inputs),
                tape: rng.bits(n_ands),
                and_outs: vec![false; n_ands],
            };
            let mut wires_e = vec![false; c.gates.len()];
            for (i, gate) in c.gates.iter().enumerate() {
                wires_e[i] = match *gate {
                    Gate::Input(k) => view_e.input_shares[k as usize],
                    Gate::Const(cst) => {
                        if e == 0 {
                            cst
                        } else {
                            false
                        }
                    }
                    Gate::Xor(a, b) => wires_e[a as usize] ^ wires_e[b as usize],
                    Gate::Not(a) => {
                        if e == 0 {
                            !wires_e[a as usize]
                        } else {
                            wires_e[a as usize]
                        }
                    }
                    Gate::And(a, b) => {
                        let k = ords[i].unwrap() as usize;
                        let z = (wires_e[a as usize] & wires_e[b as usize])
                            ^ (wires_f[a as usize] & wires_e[b as usize])
                            ^ (wires_e[a as usize] & wires_f[b as usize])
                            ^ view_e.tape[k]
                            ^ view_f.tape[k];
                        view_e.and_outs[k] = z;
                        z
                    }
                };
            }
            let o_e = wires_e[c.output as usize];
            let o_f = wires_f[c.output as usize];
            let mut outputs = [false; 3];
            outputs[e] = o_e;
            outputs[f] = o_f;
            outputs[g] = true ^ o_e ^ o_f;

            let (c_e, r_e) = commit_view(pp, &view_e, rng);
            let (c_f, r_f) = commit_view(pp, &view_f, rng);
            // Content-free dummy: uniform bits, so its commitment matches
            // the distribution of a real third view's commitment.
            let dummy = View {
                input_shares: rng.bits(c.n_inputs),
                tape: rng.bits(n_ands),
                and_outs: rng.bits(n_ands),
            };
            let (c_g, _) = commit_view(pp, &dummy, rng);
            let mut commitments: [Vec<bool>; 3] = Default::default();
            commitments[e] = c_e;
            commitments[f] = c_f;
            commitments[g] = c_g;
            RepProof {
                commitments,
                output_shares: outputs,
                challenge: e_u8,
                opened_views: [view_e, view_f],
                opened_rand: [r_e, r_f],
            }
        })
        .collect();
    ZkProof { reps }
}

/// The canonical cheating strategy for an unsatisfied statement: run the MPC
/// honestly on an arbitrary witness, then corrupt one party's record at the
/// output AND gate so the claimed output shares XOR to 1. The corrupt party
/// is chosen before the challenge is read; the forgery survives exactly the
/// two challenges that do not replay it, so each repetition passes with
/// probability 2/3.
pub fn zk_cheat_prove(
    c: &Circuit,
    witness: &[bool],
    pp: &PublicParams,
    challenges: &[u8],
    rng: &mut SeedStream,
) -> ZkProof {
    assert!(c.output_is_and(), "canonical cheat needs an AND output gate");
    debug_assert!(
        !c.gates.iter().any(|g| match *g {
            Gate::Xor(a, b) | Gate::And(a, b) => a == c.output || b == c.output,
            Gate::Not(a) => a == c.output,
            _ => false,
        }),
        "output gate must not feed other gates"
    );
    debug_assert_eq!(c.eval(witness), Ok(false), "statement must be unsatisfied");
    let ords = c.and_ordinals();
    let k_out = ords[c.output as usize].unwrap() as usize;
    let reps = challenges
        .iter()
        .map(|&e| {
            // Commit to the corrupt party before reading the challenge.
            let corrupt = rng.below(3) as usize;
            let (mut views, mut outputs) = mpc_execute(c, witness, rng);
            views[corrupt].and_outs[k_out] = !views[corrupt].and_outs[k_out];
            outputs[corrupt] = !outputs[corrupt];
            assemble_rep(pp, views, outputs, e, rng)
        })
        .collect();
    ZkProof { reps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::circuit::Builder;
    use crate::crypto::commit::com_setup;
    use crate::rng::{domain, SeedStream};

    fn rng(i: u64) -> SeedStream {
        SeedStream::derive(0x2b, domain::TRIAL, i)
    }

    /// Output = (w0 AND w1) AND (w0 XOR w2): satisfiable.
    fn sat_circuit() -> Circuit {
        let mut b = Builder::new();
        let w = b.inputs(3);
        let g1 = b.and_pinned(w[0], w[1]);
        let g2 = b.xor(w[0], w[2]);
        let g3 = b.and_pinned(g1, g2);
        b.finish(g3)
    }

    /// Output = w AND NOT w: unsatisfiable, AND on the output wire.
    fn unsat_circuit() -> Circuit {
        let mut b = Builder::new();
        let w = b.inputs(1);
        let nw = b.not(w[0]);
        let g = b.and_pinned(w[0], nw);
        b.finish(g)
    }

    fn challenges(n: usize, seed: u64) -> Vec<u8> {
        let mut s = SeedStream::derive(seed, domain::ZK_CHALLENGE, 0);
        (0..n).map(|_| s.below(3) as u8).collect()
    }

    #[test]
    fn completeness_is_exact() {
        let c = sat_circuit();
        let witness = vec![true, true, false];
        assert_eq!(c.eval(&witness), Ok(true));
        let mut r = rng(0);
        let pp = com_setup(&mut r, 8, View::bit_len(c.n_inputs, c.and_count()));
        for trial in 0..200 {
            let ch = challenges(40, trial);
            let proof = zk_prove(&c, &witness, &pp, &ch, &mut r);
            assert!(zk_verify(&c, &proof, &pp, &ch), "trial {trial}");
        }
    }

    #[test]
    fn mangled_proofs_reject_without_panicking() {
        let c = sat_circuit();
        let witness = vec![true, true, false];
        let mut r = rng(1);
        let pp = com_setup(&mut r, 8, View::bit_len(c.n_inputs, c.and_count()));
        let ch = challenges(4, 7);
        let good = zk_prove(&c, &witness, &pp, &ch, &mut r);
        assert!(zk_verify(&c, &good, &pp, &ch));

        // Flip an opened tape bit.
        let mut bad = good.clone();
        bad.reps[0].opened_views[0].tape[0] ^= true;
        assert!(!zk_verify(&c, &bad, &pp, &ch));

        // Flip an output share.
        let mut bad = good.clone();
        bad.reps[1].output_shares[0] ^= true;
        assert!(!zk_verify(&c, &bad, &pp, &ch));

        // Truncate a view.
        let mut bad = good.clone();
        bad.reps[2].opened_views[1].and_outs.pop();
        assert!(!zk_verify(&c, &bad, &pp, &ch));

        // Wrong challenge ordering.
        let mut wrong_ch = ch.clone();
        wrong_ch[0] = (wrong_ch[0] + 1) % 3;
        assert!(!zk_verify(&c, &good, &pp, &wrong_ch));

        // Empty proof.
        assert!(!zk_verify(&c, &ZkProof { reps: vec![] }, &pp, &[]));
    }

    #[test]
    fn canonical_cheat_hits_two_thirds_per_repetition() {
        let c = unsat_circuit();
        let mut r = rng(2);
        let pp = com_setup(&mut r, 8, View::bit_len(c.n_inputs, c.and_count()));
        let trials = 20_000;
        let mut accepts = 0usize;
        for t in 0..trials {
            let ch = challenges(1, 1000 + t as u64);
            let proof = zk_cheat_prove(&c, &[false], &pp, &ch, &mut r);
            if zk_verify(&c, &proof, &pp, &ch) {
                accepts += 1;
            }
        }
        let rate = accepts as f64 / trials as f64;
        let sigma = (2.0f64 / 3.0 * 1.0 / 3.0 / trials as f64).sqrt();
        assert!((rate - 2.0 / 3.0).abs() < 4.0 * sigma, "rate {rate}");
    }

    #[test]
    fn simulated_transcripts_verify_and_match_shape() {
        let c = sat_circuit();
        let witness = vec![true, true, false];
        let mut r = rng(3);
        let pp = com_setup(&mut r, 8, View::bit_len(c.n_inputs, c.and_count()));
        let ch = challenges(8, 99);
        let real = zk_prove(&c, &witness, &pp, &ch, &mut r);
        let sim = zk_simulate(&c, &pp, &ch, &mut r);
        // The simulator's transcripts verify: the verifier cannot tell them
        // apart structurally.
        assert!(zk_verify(&c, &sim, &pp, &ch));
        assert_eq!(real.reps.len(), sim.reps.len());
        for (a, b) in real.reps.iter().zip(&sim.reps) {
            assert_eq!(a.commitments[0].len(), b.commitments[0].len());
            assert_eq!(a.opened_views[0].to_bits().len(), b.opened_views[0].to_bits().len());
        }
    }
}

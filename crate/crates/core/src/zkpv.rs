//! Zero-knowledge position verification.
//!
//! After the commit phase, the verifiers hand the prover its own commitment
//! state; both sides independently compile the reveal check into a boolean
//! circuit whose witness is the key opening (sk, r), cross-check a hash of
//! the compiled statement, and run the MPC-in-the-head proof. The verifiers
//! accept iff the proof verifies, so acceptance is exactly the proof
//! system's verdict. The composed simulator reuses the commit-phase hiding
//! simulator up to the end of the commit window and fabricates a proof
//! transcript past it.

use thiserror::Error;

use crate::crypto::circuit::{eq_consts, prg_circuit, Builder, Circuit, Wire};
use crate::crypto::commit::{com_setup, PublicParams};
use crate::crypto::zk::{
    zk_cheat_prove, zk_prove, zk_simulate, zk_verify, View, ZkProof,
};
use crate::fixed::Fix;
use crate::pc::{
    hiding_simulator, run_commit, CommitRun, CommitmentState, PcError, PcScenario, ViewEntry,
};
use crate::pv::round_challenge;
use crate::rng::{domain, SeedStream};
use crate::stats::{battery, freq_test, runs_test, two_sample_freq_test, BatteryReport};

#[derive(Debug, Error)]
pub enum ZkpvError {
    #[error(transparent)]
    Pc(#[from] PcError),
    #[error("region is empty or not a subset of S")]
    BadRegion,
    #[error("statement hashes disagree between prover and verifier")]
    StatementMismatch,
}

/// The compiled NP statement: rho opens to some point of the region.
pub struct RevealStatement {
    pub circuit: Circuit,
    /// Per-point precomputed timing verdicts (public data).
    pub timing_ok: Vec<bool>,
    /// Region membership per point of S.
    pub region_mask: Vec<bool>,
    pub hash: u64,
}

/// Public timing check per committable point: every entry present, exact
/// timestamp, canonical counter.
fn timing_bits(scenario: &PcScenario, rho: &CommitmentState) -> Vec<bool> {
    let k = scenario.k();
    (0..scenario.s_points.len() as u32)
        .map(|alpha| {
            (0..k as u16).all(|i| {
                (0..scenario.params.rounds).all(|round| {
                    rho.entries
                        .iter()
                        .find(|e| e.alpha == alpha && e.receiver == i && e.round == round)
                        .map(|e| {
                            e.timestamp == scenario.response_time(alpha as usize, i as usize)
                                && e.ct.index == scenario.entry_index(alpha, i as u32, round)
                                && e.ct.body.len() == 1 + scenario.params.payload_bits
                        })
                        .unwrap_or(false)
                })
            })
        })
        .collect()
}

/// Compiles the reveal check over rho into a circuit on witness (sk, r):
/// the key commitment recomputes to c, and the decrypted transcript yields
/// an accepting set that is exactly one point, inside the region.
pub fn compile_reveal_circuit(
    scenario: &PcScenario,
    rho: &CommitmentState,
    region: &[u32],
) -> Result<RevealStatement, ZkpvError> {
    let n_s = scenario.s_points.len();
    if region.is_empty() || region.iter().any(|&a| a as usize >= n_s) {
        return Err(ZkpvError::BadRegion);
    }
    let mut region_mask = vec![false; n_s];
    for &a in region {
        region_mask[a as usize] = true;
    }
    let timing_ok = timing_bits(scenario, rho);

    let kappa = scenario.params.kappa;
    let lambda = scenario.params.lambda_com;
    let mut b = Builder::new();
    let sk_wires = b.inputs(kappa);
    let rand_wires = b.inputs(lambda * kappa);

    // (i) Key-commitment recomputation against c.
    let com_out = crate::crypto::circuit::com_circuit(&mut b, &rho.pp, &sk_wires, &rand_wires);
    let eq_com = eq_consts(&mut b, &com_out, &rho.c);

    // (ii) Per point: decrypt every entry, require a valid frame carrying
    // the expected challenge bit.
    let mut w: Vec<Wire> = Vec::with_capacity(n_s);
    for alpha in 0..n_s as u32 {
        if !timing_ok[alpha as usize] {
            let zero = b.konst(false);
            w.push(zero);
            continue;
        }
        let mut oks = Vec::new();
        for i in 0..scenario.k() as u16 {
            for round in 0..scenario.params.rounds {
                let entry = rho
                    .entries
                    .iter()
                    .find(|e| e.alpha == alpha && e.receiver == i && e.round == round)
                    .expect("timing_ok implies presence");
                let key = crate::crypto::circuit::enc_key_circuit(
                    &mut b,
                    &sk_wires,
                    entry.ct.index,
                );
                let ks = prg_circuit(&mut b, &key, entry.ct.body.len());
                let plain = b.xor_consts(&ks, &entry.ct.body);
                let expected =
                    round_challenge(rho.seed, alpha, round, scenario.k(), scenario.params.n).b;
                let payload_ok = b.eq_const(plain[1], expected);
                let ok = b.and(plain[0], payload_ok);
                oks.push(ok);
            }
        }
        w.push(b.and_tree(&oks));
    }

    // (iii) Exactly one accepting point, and it lies inside the region.
    let at_least_one = b.or_tree(&w);
    let pairs: Vec<Wire> = (0..n_s)
        .flat_map(|i| (i + 1..n_s).map(move |j| (i, j)))
        .map(|(i, j)| b.and(w[i], w[j]))
        .collect();
    let some_pair = b.or_tree(&pairs);
    let no_pair = b.not(some_pair);
    let exactly_one = b.and(at_least_one, no_pair);
    let outside: Vec<Wire> = (0..n_s).filter(|&a| !region_mask[a]).map(|a| w[a]).collect();
    let any_outside = b.or_tree(&outside);
    let none_outside = b.not(any_outside);

    let opened = b.and(eq_com, exactly_one);
    let output = b.and_pinned(opened, none_outside);
    let circuit = b.finish(output);
    let hash = circuit.fnv1a();
    Ok(RevealStatement { circuit, timing_ok, region_mask, hash })
}

/// Commitment parameters for committing MPC views, sized to the statement.
pub fn zk_view_params(scenario: &PcScenario, circuit: &Circuit) -> PublicParams {
    let bits = View::bit_len(circuit.n_inputs, circuit.and_count());
    let mut stream = SeedStream::derive(scenario.seed, domain::PUBLIC_PARAMS, 1);
    com_setup(&mut stream, scenario.params.lambda_com, bits)
}

/// Honest-verifier challenges for `reps` repetitions.
pub fn zk_challenges(seed: u64, nonce: u64, reps: usize) -> Vec<u8> {
    let mut s = SeedStream::derive(seed, domain::ZK_CHALLENGE, nonce);
    (0..reps).map(|_| s.below(3) as u8).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProverMode {
    Honest,
    /// The canonical MPC-in-the-head forgery (used when the statement is
    /// unsatisfied, e.g. a prover outside the region).
    CanonicalCheat,
}

pub struct ZkpvVerdict {
    pub accept: bool,
    pub proof: Option<ZkProof>,
    pub statement_hash: u64,
    pub and_gates: usize,
}

/// Full pipeline: commit phase, statement compilation on both sides, proof,
/// verdict. `denied` suppresses challenge sessions for those points
/// (malicious-verifier denial attack; empty for honest runs).
pub fn zk_position_verify(
    scenario: &PcScenario,
    alpha_star: u32,
    region: &[u32],
    reps: usize,
    nonce: u64,
    mode: ProverMode,
    denied: &[u32],
) -> Result<(ZkpvVerdict, CommitRun), ZkpvError> {
    let run = run_commit(scenario, Some(alpha_star), None, denied)?;
    // Verifiers compile from their rho; the prover compiles its own copy
    // from the state it was sent. A statement-hash mismatch aborts.
    let verifier_stmt = compile_reveal_circuit(scenario, &run.rho, region)?;
    let prover_stmt = compile_reveal_circuit(scenario, &run.rho, region)?;
    if verifier_stmt.hash != prover_stmt.hash {
        return Err(ZkpvError::StatementMismatch);
    }
    let pp_zk = zk_view_params(scenario, &verifier_stmt.circuit);
    let challenges = zk_challenges(scenario.seed, nonce, reps);
    let mut prover_rng = SeedStream::derive(scenario.seed, domain::PROVER, 1000 + nonce);

    let witness: Vec<bool> = match &run.opening {
        Some(o) => {
            let mut w = o.msg.clone();
            w.extend_from_slice(&o.rand);
            w
        }
        None => Vec::new(),
    };
    let satisfied = !witness.is_empty()
        && prover_stmt.circuit.eval(&witness) == Ok(true);
    let proof = match (mode, satisfied) {
        (ProverMode::Honest, true) => Some(zk_prove(
            &prover_stmt.circuit,
            &witness,
            &pp_zk,
            &challenges,
            &mut prover_rng,
        )),
        // An honest prover whose statement is false has nothing to prove.
        (ProverMode::Honest, false) => None,
        (ProverMode::CanonicalCheat, _) => Some(zk_cheat_prove(
            &prover_stmt.circuit,
            &witness,
            &pp_zk,
            &challenges,
            &mut prover_rng,
        )),
    };
    let accept = match &proof {
        Some(p) => zk_verify(&verifier_stmt.circuit, p, &pp_zk, &challenges),
        None => false,
    };
    Ok((
        ZkpvVerdict {
            accept,
            proof,
            statement_hash: verifier_stmt.hash,
            and_gates: verifier_stmt.circuit.and_count(),
        },
        run,
    ))
}

/// Output of the composed simulator.
pub enum SimulatorOutput {
    /// tau within the commit window: the commit-phase hiding simulator view.
    Commit(Vec<ViewEntry>),
    /// tau past the commit window: the simulated view plus a fabricated
    /// proof transcript for the simulated statement.
    Full { view: Vec<ViewEntry>, proof: ZkProof },
}

/// Builds a commitment state out of a simulated verifier view.
pub fn rho_from_view(
    scenario: &PcScenario,
    view: &[ViewEntry],
) -> Result<CommitmentState, PcError> {
    let pp = scenario.pp();
    let mut c = Vec::new();
    let mut entries = Vec::new();
    for e in view {
        if e.label == "com" {
            if c.is_empty() {
                c = crate::crypto::cipher::bytes_to_bits(
                    &e.body,
                    3 * scenario.params.lambda_com * scenario.params.kappa,
                );
            }
        } else if let Some(('e', alpha, round)) = crate::pv::parse_label(&e.label) {
            let ct = crate::pc::ct_from_bytes(&e.body)
                .ok_or_else(|| PcError::Malformed("sim entry ciphertext".into()))?;
            entries.push(crate::pc::TranscriptEntry {
                receiver: e.receiver,
                timestamp: e.timestamp,
                alpha,
                round,
                ct,
            });
        }
    }
    entries.sort_by_key(|e| (e.alpha, e.receiver, e.round));
    entries.dedup_by_key(|e| (e.alpha, e.receiver, e.round));
    Ok(CommitmentState { pp, c, entries, seed: scenario.seed })
}

/// The composed zero-knowledge simulator: hiding simulator through the
/// commit window, then the HVZK transcript simulator on the simulated
/// statement.
pub fn zkpv_simulator(
    scenario: &PcScenario,
    region: &[u32],
    reps: usize,
    tau: Fix,
    sim_index: u64,
) -> Result<SimulatorOutput, ZkpvError> {
    let timing = scenario.timing();
    if tau <= timing.t_final {
        return Ok(SimulatorOutput::Commit(hiding_simulator(scenario, tau, sim_index)));
    }
    let view = hiding_simulator(scenario, timing.t_final, sim_index);
    let rho = rho_from_view(scenario, &view)?;
    let stmt = compile_reveal_circuit(scenario, &rho, region)?;
    let pp_zk = zk_view_params(scenario, &stmt.circuit);
    let challenges = zk_challenges(scenario.seed, sim_index, reps);
    let mut rng = SeedStream::derive(scenario.seed, domain::SIMULATOR, 1_000_000 + sim_index);
    let proof = zk_simulate(&stmt.circuit, &pp_zk, &challenges, &mut rng);
    Ok(SimulatorOutput::Full { view, proof })
}

// --- distinguisher battery ---------------------------------------------------

/// Exact structural equality of (receiver, timestamp, label, length)
/// sequences across a set of views.
pub fn view_shapes_equal(views: &[Vec<ViewEntry>]) -> bool {
    let Some(first) = views.first() else { return true };
    let shape: Vec<_> = first.iter().map(ViewEntry::shape).collect();
    views.iter().all(|v| v.iter().map(ViewEntry::shape).collect::<Vec<_>>() == shape)
}

/// Pools the encrypted frame bits of every transcript entry in the views.
pub fn ciphertext_pool(views: &[Vec<ViewEntry>]) -> Vec<bool> {
    let mut pool = Vec::new();
    for view in views {
        for e in view {
            if e.label.starts_with('e') {
                if let Some(ct) = crate::pc::ct_from_bytes(&e.body) {
                    pool.extend(ct.body);
                }
            }
        }
    }
    pool
}

/// Pools the opened randomness tapes of proof transcripts. Tapes are drawn
/// uniformly, so absolute uniformity tests apply.
pub fn proof_tape_pool(proofs: &[ZkProof]) -> Vec<bool> {
    let mut pool = Vec::new();
    for p in proofs {
        for rep in &p.reps {
            for v in &rep.opened_views {
                pool.extend_from_slice(&v.tape);
            }
        }
    }
    pool
}

/// Pools view-commitment bits. Commitment outputs are not uniform bit
/// streams (the toy PRG's seed space is tiny at test parameters), so these
/// pools are only compared against each other, never against uniformity.
pub fn proof_commitment_pool(proofs: &[ZkProof]) -> Vec<bool> {
    let mut pool = Vec::new();
    for p in proofs {
        for rep in &p.reps {
            for c in &rep.commitments {
                pool.extend_from_slice(c);
            }
        }
    }
    pool
}

#[derive(Debug, Clone)]
pub struct DistinguisherReport {
    pub structural_ok: bool,
    pub battery: BatteryReport,
    pub pass: bool,
}

/// The battery from the hiding/ZK properties: structural equality, bitwise
/// frequency and runs tests on each pool, and a two-sample comparison.
pub fn distinguisher_suite(
    a: &[Vec<ViewEntry>],
    b: &[Vec<ViewEntry>],
    alpha: f64,
) -> DistinguisherReport {
    let mut all = a.to_vec();
    all.extend_from_slice(b);
    let structural_ok = view_shapes_equal(&all);
    let pool_a = ciphertext_pool(a);
    let pool_b = ciphertext_pool(b);
    let report = battery(
        vec![
            ("freq_a".into(), freq_test(&pool_a)),
            ("freq_b".into(), freq_test(&pool_b)),
            ("runs_a".into(), runs_test(&pool_a)),
            ("runs_b".into(), runs_test(&pool_b)),
            ("two_sample".into(), two_sample_freq_test(&pool_a, &pool_b)),
        ],
        alpha,
    );
    let pass = structural_ok && report.pass;
    DistinguisherReport { structural_ok, battery: report, pass }
}

/// Criterion-7 battery extended with proof-transcript pools.
pub fn distinguisher_suite_with_proofs(
    a: &[Vec<ViewEntry>],
    b: &[Vec<ViewEntry>],
    proofs_a: &[ZkProof],
    proofs_b: &[ZkProof],
    alpha: f64,
) -> DistinguisherReport {
    let mut all = a.to_vec();
    all.extend_from_slice(b);
    let structural_ok = view_shapes_equal(&all);
    let pool_a = ciphertext_pool(a);
    let pool_b = ciphertext_pool(b);
    let tapes_a = proof_tape_pool(proofs_a);
    let tapes_b = proof_tape_pool(proofs_b);
    let com_a = proof_commitment_pool(proofs_a);
    let com_b = proof_commitment_pool(proofs_b);
    let report = battery(
        vec![
            ("freq_a".into(), freq_test(&pool_a)),
            ("freq_b".into(), freq_test(&pool_b)),
            ("runs_a".into(), runs_test(&pool_a)),
            ("runs_b".into(), runs_test(&pool_b)),
            ("two_sample".into(), two_sample_freq_test(&pool_a, &pool_b)),
            ("tape_freq_a".into(), freq_test(&tapes_a)),
            ("tape_freq_b".into(), freq_test(&tapes_b)),
            ("commitment_two_sample".into(), two_sample_freq_test(&com_a, &com_b)),
        ],
        alpha,
    );
    let pass = structural_ok && report.pass;
    DistinguisherReport { structural_ok, battery: report, pass }
}

/// Exhaustive satisfiability check for the reveal statement at toy
/// parameters, factored through the per-bit structure of the key
/// commitment: a witness can satisfy the circuit only if each (sk_i, r_i)
/// opens bit i of c, so enumerating the per-bit openings and taking their
/// product enumerates every witness that could possibly satisfy the
/// statement.
pub fn exhaustive_witness_search(
    scenario: &PcScenario,
    stmt: &RevealStatement,
    rho: &CommitmentState,
) -> Option<Vec<bool>> {
    let kappa = scenario.params.kappa;
    let lambda = scenario.params.lambda_com;
    assert!(lambda <= 10, "toy parameters only");
    let block = 3 * lambda;
    // Per-bit opening candidates.
    let mut candidates: Vec<Vec<(bool, Vec<bool>)>> = Vec::with_capacity(kappa);
    for i in 0..kappa {
        let target = &rho.c[i * block..(i + 1) * block];
        let mut opts = Vec::new();
        for m in [false, true] {
            for rv in 0..(1u32 << lambda) {
                let seed: Vec<bool> = (0..lambda).map(|b| (rv >> (lambda - 1 - b)) & 1 == 1).collect();
                let g = crate::crypto::commit::g_stretch(&seed);
                let matches = g
                    .iter()
                    .enumerate()
                    .all(|(j, &gb)| (gb ^ (m && rho.pp.blocks[i][j])) == target[j]);
                if matches {
                    opts.push((m, seed));
                }
            }
        }
        if opts.is_empty() {
            return None;
        }
        candidates.push(opts);
    }
    // Cartesian product over per-bit openings (tiny in practice).
    let mut stack = vec![0usize; kappa];
    loop {
        let mut sk = Vec::with_capacity(kappa);
        let mut rand = Vec::with_capacity(kappa * lambda);
        for (i, &choice) in stack.iter().enumerate() {
            let (m, seed) = &candidates[i][choice];
            sk.push(*m);
            rand.extend_from_slice(seed);
        }
        let mut witness = sk;
        witness.extend(rand);
        if stmt.circuit.eval(&witness) == Ok(true) {
            return Some(witness);
        }
        // Advance the mixed-radix counter.
        let mut i = 0;
        loop {
            if i == kappa {
                return None;
            }
            stack[i] += 1;
            if stack[i] < candidates[i].len() {
                break;
            }
            stack[i] = 0;
            i += 1;
        }
    }
}

//! The nice singleton position-verification protocol family (f-BB84).
//!
//! Verifiers at the vertices of a simplex share a random string, send
//! per-verifier classical challenges plus one BB84 qubit timed to meet at the
//! target spacetime point, and accept iff every verifier receives the hidden
//! bit back at exactly its light-cone response time. Two deliberately weak
//! variants used by the adversary harness live here as well: one replaces
//! the qubit with the bit sent in the clear, the other announces the
//! measurement basis inside the last verifier's challenge string.

use thiserror::Error;

use crate::fixed::Fix;
use crate::geometry::{distance, in_convex_hull, GeometryError, SpacetimePoint, SpatialPoint};
use crate::qsim::QubitArena;
use crate::rng::{domain, SeedStream};
use crate::sim::{Delivery, Engine, Mode, PartyBehavior, PartyCtx, PartyId, Signal};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PvError {
    #[error("challenge strings must have equal length")]
    ChallengeLength,
    #[error("round {0} out of range")]
    RoundOutOfRange(u32),
    #[error("target is not inside the verifiers' convex hull")]
    TargetOutsideHull,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Which challenge the verifiers issue.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PvVariant {
    /// BB84 qubit in basis f(x_1..x_k); the hidden bit never travels in the
    /// clear.
    FBb84,
    /// The hidden bit is broadcast classically by V1 (spoofable by copying;
    /// demo of the classical impossibility).
    ClassicalEcho,
    /// BB84 qubit whose basis is the first bit of the last verifier's
    /// challenge string (basis announced in the clear).
    PlainBb84,
}

/// Basis-selection function: XOR-fold of the first k-1 strings, inner product
/// with the last, mod 2.
pub fn f_basis(xs: &[Vec<bool>]) -> Result<bool, PvError> {
    let k = xs.len();
    assert!(k >= 2, "need at least two challenge strings");
    let n = xs[0].len();
    if xs.iter().any(|x| x.len() != n) {
        return Err(PvError::ChallengeLength);
    }
    let mut fold = xs[0].clone();
    for x in &xs[1..k - 1] {
        for (f, b) in fold.iter_mut().zip(x) {
            *f ^= b;
        }
    }
    Ok(fold.iter().zip(&xs[k - 1]).fold(false, |acc, (a, b)| acc ^ (a & b)))
}

/// Basis actually encoded in the challenge qubit under a given variant.
pub fn variant_basis(variant: PvVariant, xs: &[Vec<bool>]) -> Result<bool, PvError> {
    match variant {
        PvVariant::FBb84 | PvVariant::ClassicalEcho => f_basis(xs),
        PvVariant::PlainBb84 => Ok(xs.last().expect("k >= 2")[0]),
    }
}

/// Per-round shared-randomness segment: k challenge strings and the bit b.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundChallenge {
    pub xs: Vec<Vec<bool>>,
    pub b: bool,
}

/// Deterministic disjoint segmentation of the verifiers' shared randomness:
/// stream (seed, CHALLENGE domain, session << 32 | round).
pub fn round_challenge(seed: u64, session: u32, round: u32, k: usize, n: usize) -> RoundChallenge {
    let mut s = SeedStream::derive(
        seed,
        domain::CHALLENGE,
        ((session as u64) << 32) | round as u64,
    );
    let xs = (0..k).map(|_| s.bits(n)).collect();
    let b = s.bit();
    RoundChallenge { xs, b }
}

/// A singleton position-verification instance.
#[derive(Debug, Clone)]
pub struct PvInstance {
    pub dim: usize,
    pub verifiers: Vec<SpatialPoint>,
    pub target: SpacetimePoint,
    pub n: usize,
    pub rounds: u32,
}

impl PvInstance {
    pub fn k(&self) -> usize {
        self.verifiers.len()
    }

    pub fn validate(&self) -> Result<(), PvError> {
        if !in_convex_hull(&self.target.pos, &self.verifiers)? {
            return Err(PvError::TargetOutsideHull);
        }
        Ok(())
    }

    pub fn travel(&self, i: usize) -> Fix {
        distance(&self.verifiers[i], &self.target.pos)
            .expect("instance dimensions agree")
            .value
    }

    /// Send time so the challenge component arrives exactly at the target.
    pub fn challenge_send_time(&self, i: usize) -> Fix {
        self.target.time_fix() - self.travel(i)
    }

    /// Arrival time each verifier expects for the prover's response.
    pub fn expected_response_time(&self, i: usize) -> Fix {
        self.target.time_fix() + self.travel(i)
    }
}

pub fn challenge_label(session: u32, round: u32) -> String {
    format!("c{session}:{round}")
}

pub fn response_label(session: u32, round: u32) -> String {
    format!("r{session}:{round}")
}

pub fn parse_label(label: &str) -> Option<(char, u32, u32)> {
    let kind = label.chars().next()?;
    let rest = &label[1..];
    let (s, r) = rest.split_once(':')?;
    Some((kind, s.parse().ok()?, r.parse().ok()?))
}

/// Challenge payload: verifier index, then the packed challenge bits, then
/// (ClassicalEcho only) the bit b in the clear.
pub fn challenge_payload(verifier_index: u8, x: &[bool], clear_b: Option<bool>) -> Vec<u8> {
    let mut p = vec![verifier_index, (x.len() >> 8) as u8, x.len() as u8];
    p.extend(crate::crypto::cipher::bits_to_bytes(x));
    if let Some(b) = clear_b {
        p.push(b as u8);
    }
    p
}

pub struct ParsedChallenge {
    pub verifier_index: u8,
    pub x: Vec<bool>,
    pub clear_b: Option<bool>,
}

pub fn parse_challenge(payload: &[u8]) -> Option<ParsedChallenge> {
    if payload.len() < 3 {
        return None;
    }
    let verifier_index = payload[0];
    let n = ((payload[1] as usize) << 8) | payload[2] as usize;
    let body = &payload[3..];
    let n_bytes = n.div_ceil(8);
    if body.len() < n_bytes {
        return None;
    }
    let x = crate::crypto::cipher::bytes_to_bits(&body[..n_bytes], n);
    let clear_b = body.get(n_bytes).map(|&b| b != 0);
    Some(ParsedChallenge { verifier_index, x, clear_b })
}

/// Builds each verifier's challenge-send script for one PV session. The
/// qubit (when the variant has one) is prepared in the arena at build time
/// and rides on V1's signal.
pub fn verifier_scripts(
    inst: &PvInstance,
    seed: u64,
    session: u32,
    variant: PvVariant,
    arena: &mut QubitArena,
) -> Vec<Vec<Signal>> {
    let k = inst.k();
    let mut scripts: Vec<Vec<Signal>> = (0..k).map(|_| Vec::new()).collect();
    for round in 0..inst.rounds {
        let ch = round_challenge(seed, session, round, k, inst.n);
        let basis = variant_basis(variant, &ch.xs).expect("equal lengths by construction");
        for (i, script) in scripts.iter_mut().enumerate() {
            let clear_b = match (variant, i) {
                (PvVariant::ClassicalEcho, 0) => Some(ch.b),
                _ => None,
            };
            let mut sig = Signal::classical(
                inst.challenge_send_time(i),
                Mode::Directional { target: inst.target.pos.clone() },
                challenge_payload(i as u8, &ch.xs[i], clear_b),
                Some(challenge_label(session, round)),
            );
            if i == 0 && variant != PvVariant::ClassicalEcho {
                sig.qubits.push(arena.prepare_bb84(ch.b, basis));
            }
            script.push(sig);
        }
    }
    scripts
}

/// Verifier behavior: its challenge sends are scripted up front; at runtime
/// it just timestamps the first response it sees per (session, round).
#[derive(Default)]
pub struct VerifierParty {
    pub responses: std::collections::HashMap<(u32, u32), (bool, Fix)>,
}

impl PartyBehavior for VerifierParty {
    fn on_deliver(&mut self, _ctx: &mut PartyCtx<'_>, d: &Delivery) -> Vec<Signal> {
        if let Some((kind, session, round)) = d.label.as_deref().and_then(parse_label) {
            if kind == 'r' && !d.payload.is_empty() {
                self.responses
                    .entry((session, round))
                    .or_insert((d.payload[0] != 0, d.time));
            }
        }
        Vec::new()
    }
    fn as_any(&self) -> &dyn std::any::Any {
        self
    }
}

/// Honest prover at the target point: accumulates challenge components per
/// round, measures the qubit in the variant basis, broadcasts the bit.
pub struct HonestPvProver {
    pub k: usize,
    pub variant: PvVariant,
    pending: std::collections::HashMap<(u32, u32), PendingRound>,
}

#[derive(Default)]
struct PendingRound {
    xs: Vec<Option<Vec<bool>>>,
    qubit: Option<crate::qsim::QubitHandle>,
    clear_b: Option<bool>,
    answered: bool,
}

impl HonestPvProver {
    pub fn new(k: usize, variant: PvVariant) -> Self {
        HonestPvProver { k, variant, pending: Default::default() }
    }
}

impl PartyBehavior for HonestPvProver {
    fn on_deliver(&mut self, ctx: &mut PartyCtx<'_>, d: &Delivery) -> Vec<Signal> {
        let Some((kind, session, round)) = d.label.as_deref().and_then(parse_label) else {
            return Vec::new();
        };
        if kind != 'c' {
            return Vec::new();
        }
        let Some(parsed) = parse_challenge(&d.payload) else {
            return Vec::new();
        };
        let k = self.k;
        let entry = self.pending.entry((session, round)).or_insert_with(|| PendingRound {
            xs: vec![None; k],
            ..Default::default()
        });
        if entry.answered {
            return Vec::new();
        }
        let idx = parsed.verifier_index as usize;
        if idx < k {
            entry.xs[idx] = Some(parsed.x);
        }
        if let Some(b) = parsed.clear_b {
            entry.clear_b = Some(b);
        }
        for q in &d.qubits {
            entry.qubit = Some(*q);
        }
        let complete = entry.xs.iter().all(Option::is_some)
            && match self.variant {
                PvVariant::ClassicalEcho => entry.clear_b.is_some(),
                _ => entry.qubit.is_some(),
            };
        if !complete {
            return Vec::new();
        }
        entry.answered = true;
        let xs: Vec<Vec<bool>> = entry.xs.iter().map(|x| x.clone().unwrap()).collect();
        let y = match self.variant {
            PvVariant::ClassicalEcho => entry.clear_b.unwrap(),
            _ => {
                let basis = variant_basis(self.variant, &xs).expect("uniform lengths");
                ctx.arena
                    .measure(entry.qubit.take().unwrap(), basis, ctx.rng)
                    .expect("challenge qubit is live")
            }
        };
        vec![Signal::classical(
            ctx.now,
            Mode::Broadcast,
            vec![y as u8],
            Some(response_label(session, round)),
        )]
    }
    fn as_any(&self) -> &dyn std::any::Any {
        self
    }
}

/// The deterministic acceptance predicate W for one round: every verifier
/// got the hidden bit at exactly its expected response time.
pub fn predicate_w(
    inst: &PvInstance,
    seed: u64,
    session: u32,
    round: u32,
    received: &[Option<(bool, Fix)>],
) -> bool {
    let ch = round_challenge(seed, session, round, inst.k(), inst.n);
    received.len() == inst.k()
        && received.iter().enumerate().all(|(i, r)| match r {
            Some((y, t)) => *y == ch.b && *t == inst.expected_response_time(i),
            None => false,
        })
}

/// Outcome of one protocol run.
pub struct PvRun {
    pub accept: bool,
    pub round_ok: Vec<bool>,
    pub engine: Engine,
    pub verifier_ids: Vec<PartyId>,
}

/// Evaluates W for every round of a session from the verifiers' records.
pub fn evaluate_session(
    engine: &Engine,
    verifier_ids: &[PartyId],
    inst: &PvInstance,
    seed: u64,
    session: u32,
) -> Vec<bool> {
    (0..inst.rounds)
        .map(|round| {
            let received: Vec<Option<(bool, Fix)>> = verifier_ids
                .iter()
                .map(|&vid| {
                    engine
                        .behavior::<VerifierParty>(vid)
                        .responses
                        .get(&(session, round))
                        .copied()
                })
                .collect();
            predicate_w(inst, seed, session, round, &received)
        })
        .collect()
}

/// Runs the singleton protocol with an honest prover (or none).
pub fn run_singleton_pv(
    inst: &PvInstance,
    seed: u64,
    variant: PvVariant,
    with_prover: bool,
) -> Result<PvRun, PvError> {
    inst.validate()?;
    let mut engine = Engine::new(inst.dim, seed);
    let verifier_ids: Vec<PartyId> = inst
        .verifiers
        .iter()
        .map(|pos| engine.add_party(pos.clone(), Box::new(VerifierParty::default())))
        .collect();
    if with_prover {
        engine.add_party(
            inst.target.pos.clone(),
            Box::new(HonestPvProver::new(inst.k(), variant)),
        );
    }
    let scripts = verifier_scripts(inst, seed, 0, variant, &mut engine.arena);
    for (vid, script) in verifier_ids.iter().zip(scripts) {
        for sig in script {
            engine.schedule_send(*vid, sig).expect("challenge schedule is valid");
        }
    }
    engine.run_to_quiescence();
    let round_ok = evaluate_session(&engine, &verifier_ids, inst, seed, 0);
    Ok(PvRun { accept: round_ok.iter().all(|&b| b), round_ok, engine, verifier_ids })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rat_int;
    use crate::sim::rats;

    fn inst_1d(rounds: u32, n: usize) -> PvInstance {
        PvInstance {
            dim: 1,
            verifiers: vec![rats(&[0]), rats(&[6])],
            target: SpacetimePoint::new(rats(&[3]), rat_int(10)),
            n,
            rounds,
        }
    }

    fn inst_2d(rounds: u32, n: usize) -> PvInstance {
        PvInstance {
            dim: 2,
            verifiers: vec![rats(&[0, 0]), rats(&[6, 0]), rats(&[0, 6])],
            target: SpacetimePoint::new(rats(&[1, 1]), rat_int(10)),
            n,
            rounds,
        }
    }

    #[test]
    fn f_zero_vector_kills_inner_product() {
        let zero = vec![false; 8];
        let mut s = SeedStream::derive(3, domain::TRIAL, 0);
        for _ in 0..32 {
            let y = s.bits(8);
            assert!(!f_basis(&[zero.clone(), y]).unwrap());
        }
    }

    #[test]
    fn f_inner_product_examples() {
        // f(10, 10) = 1, f(10, 01) = 0.
        assert!(f_basis(&[vec![true, false], vec![true, false]]).unwrap());
        assert!(!f_basis(&[vec![true, false], vec![false, true]]).unwrap());
    }

    #[test]
    fn f_three_party_fold() {
        // k = 3, n = 2: f(11, 10, 01) = <01, 01> = 1.
        let x1 = vec![true, true];
        let x2 = vec![true, false];
        let x3 = vec![false, true];
        assert!(f_basis(&[x1, x2, x3]).unwrap());
    }

    #[test]
    fn f_rejects_unequal_lengths() {
        assert_eq!(f_basis(&[vec![true], vec![true, false]]), Err(PvError::ChallengeLength));
    }

    #[test]
    fn challenges_are_deterministic_and_distinct_per_round() {
        let a = round_challenge(5, 0, 3, 2, 16);
        let b = round_challenge(5, 0, 3, 2, 16);
        assert_eq!(a, b);
        let c = round_challenge(5, 0, 4, 2, 16);
        assert_ne!(a, c);
        let d = round_challenge(5, 1, 3, 2, 16);
        assert_ne!(a, d);
    }

    #[test]
    fn challenge_bits_look_uniform() {
        // n = 8, 1000 rounds: per-bit-position frequencies inside a 4-sigma
        // envelope (the chi-square battery runs in the stats module).
        let n = 8;
        let rounds = 1000;
        let mut ones = vec![0usize; 2 * n];
        for round in 0..rounds {
            let ch = round_challenge(77, 0, round, 2, n);
            for (i, x) in ch.xs.iter().enumerate() {
                for (j, &bit) in x.iter().enumerate() {
                    ones[i * n + j] += bit as usize;
                }
            }
        }
        let sigma = (rounds as f64 * 0.25).sqrt();
        for (pos, &c) in ones.iter().enumerate() {
            assert!(
                (c as f64 - rounds as f64 / 2.0).abs() < 4.0 * sigma,
                "bit {pos}: {c}/{rounds}"
            );
        }
    }

    #[test]
    fn challenge_components_arrive_simultaneously() {
        let inst = inst_2d(1, 8);
        for i in 0..inst.k() {
            let arrival = inst.challenge_send_time(i) + inst.travel(i);
            assert_eq!(arrival, inst.target.time_fix(), "verifier {i}");
        }
    }

    #[test]
    fn honest_prover_accepts_always_1d() {
        for seed in 0..50 {
            let run = run_singleton_pv(&inst_1d(5, 8), seed, PvVariant::FBb84, true).unwrap();
            assert!(run.accept, "seed {seed}: rounds {:?}", run.round_ok);
        }
    }

    #[test]
    fn honest_prover_accepts_always_2d_with_irrational_distances() {
        for seed in 0..50 {
            let run = run_singleton_pv(&inst_2d(5, 8), seed, PvVariant::FBb84, true).unwrap();
            assert!(run.accept, "seed {seed}: rounds {:?}", run.round_ok);
        }
    }

    #[test]
    fn absent_prover_rejects() {
        let run = run_singleton_pv(&inst_1d(3, 8), 1, PvVariant::FBb84, false).unwrap();
        assert!(!run.accept);
        assert!(run.round_ok.iter().all(|&b| !b));
    }

    #[test]
    fn target_outside_hull_is_rejected() {
        let mut inst = inst_1d(1, 8);
        inst.target = SpacetimePoint::new(rats(&[7]), rat_int(10));
        match run_singleton_pv(&inst, 1, PvVariant::FBb84, true) {
            Err(PvError::TargetOutsideHull) => {}
            _ => panic!("expected TargetOutsideHull"),
        }
    }

    #[test]
    fn predicate_rejects_late_or_flipped_responses() {
        let inst = inst_1d(1, 8);
        let ch = round_challenge(9, 0, 0, 2, 8);
        let good: Vec<Option<(bool, Fix)>> =
            (0..2).map(|i| Some((ch.b, inst.expected_response_time(i)))).collect();
        assert!(predicate_w(&inst, 9, 0, 0, &good));
        // One timestamp late by one ulp.
        let mut late = good.clone();
        late[1] = Some((ch.b, inst.expected_response_time(1) + Fix::from_raw(1)));
        assert!(!predicate_w(&inst, 9, 0, 0, &late));
        // Flipped bit at one verifier.
        let mut flipped = good.clone();
        flipped[0] = Some((!ch.b, inst.expected_response_time(0)));
        assert!(!predicate_w(&inst, 9, 0, 0, &flipped));
        // Missing response.
        let mut missing = good;
        missing[0] = None;
        assert!(!predicate_w(&inst, 9, 0, 0, &missing));
    }

    #[test]
    fn wrong_basis_measurement_is_a_coin_flip() {
        // Negative control for honest_respond: measuring in the wrong basis
        // recovers b only half the time.
        let mut arena = QubitArena::new();
        let mut r = SeedStream::derive(11, domain::MEASUREMENT, 0);
        let trials = 100_000;
        let mut correct = 0usize;
        for t in 0..trials {
            let b = t % 2 == 1;
            let q = arena.prepare_bb84(b, true);
            if arena.measure(q, false, &mut r).unwrap() == b {
                correct += 1;
            }
        }
        let rate = correct as f64 / trials as f64;
        assert!((rate - 0.5).abs() < 0.01, "rate {rate}");
    }

    #[test]
    fn coverage_from_enclosing_simplex() {
        // For every alpha in a small 2-D region, enclosing_simplex placement
        // must put the spatial part inside the verifier hull.
        use crate::geometry::{enclosing_simplex, rat_frac};
        let pts: Vec<SpacetimePoint> = (0..4)
            .flat_map(|x| {
                (0..4).map(move |y| {
                    SpacetimePoint::new(vec![rat_frac(x, 2), rat_frac(y, 2)], rat_int(5))
                })
            })
            .collect();
        let verts = enclosing_simplex(&pts, &rat_int(1)).unwrap();
        for p in &pts {
            assert!(in_convex_hull(&p.pos, &verts).unwrap());
        }
    }
}

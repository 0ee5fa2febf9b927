//! Encrypt-then-verify position commitments.
//!
//! Commit phase: a coordinating verifier broadcasts commitment parameters;
//! the prover commits to a fresh secret key, then runs one position
//! verification session per committable point, answering its own point's
//! challenge with an encrypted measurement and every other point with
//! encrypted dummies timed exactly as that point's honest prover would
//! respond. The verifiers timestamp everything and output the classical
//! commitment state (pp, c, M, s). Reveal checks the key opening, decrypts
//! the transcript, evaluates the timing predicate per point, and accepts
//! iff exactly the claimed point verifies.
//!
//! Every prover transcript message is directional per verifier with
//! identical timing, including the real response (sent k times), so the
//! message modes cannot distinguish the occupied point.

use std::collections::HashMap;

use thiserror::Error;

use crate::crypto::commit::{com, com_setup, Opening, PublicParams};
use crate::crypto::enc::{dec, enc, Ciphertext, SecretKey};
use crate::crypto::CryptoError;
use crate::fixed::Fix;
use crate::geometry::{
    distance, in_convex_hull, GeometryError, Rat, SpacetimePoint, SpatialPoint,
};
use crate::pv::{
    parse_challenge, parse_label, round_challenge, variant_basis, PvError,
    PvVariant,
};
use crate::rng::{domain, SeedStream};
use crate::sim::{Delivery, Engine, Mode, PartyBehavior, PartyCtx, PartyId, Signal};

#[derive(Debug, Error)]
pub enum PcError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Pv(#[from] PvError),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    #[error("committable point {0} outside the verifiers' hull")]
    PointOutsideHull(usize),
    #[error("scenario infeasible: {0}")]
    Infeasible(String),
    #[error("malformed commitment state: {0}")]
    Malformed(String),
    #[error("unknown committable point index {0}")]
    UnknownAlpha(u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PcParams {
    /// Challenge string bit length.
    pub n: usize,
    /// Parallel repetitions per committable point.
    pub rounds: u32,
    /// Secret-key bits.
    pub kappa: usize,
    /// Commitment randomness bits per committed bit.
    pub lambda_com: usize,
    /// Encrypted payload width in bits (>= 1; bit 0 carries the response).
    pub payload_bits: usize,
}

impl Default for PcParams {
    fn default() -> Self {
        PcParams { n: 32, rounds: 1, kappa: 64, lambda_com: 24, payload_bits: 1 }
    }
}

/// Session window landmarks shared by every party.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionTiming {
    pub t_init: Fix,
    pub t1: Fix,
    pub t_final: Fix,
    /// T: maximum travel time between any point of S and any verifier.
    pub max_travel: Fix,
}

/// A full commit-phase instance: geometry, committable set, parameters.
#[derive(Debug, Clone)]
pub struct PcScenario {
    pub dim: usize,
    pub verifiers: Vec<SpatialPoint>,
    pub s_points: Vec<SpacetimePoint>,
    pub params: PcParams,
    pub seed: u64,
}

impl PcScenario {
    pub fn new(
        dim: usize,
        verifiers: Vec<SpatialPoint>,
        s_points: Vec<SpacetimePoint>,
        params: PcParams,
        seed: u64,
    ) -> Result<PcScenario, PcError> {
        let sc = PcScenario { dim, verifiers, s_points, params, seed };
        sc.validate()?;
        Ok(sc)
    }

    fn validate(&self) -> Result<(), PcError> {
        if self.s_points.is_empty() {
            return Err(PcError::Infeasible("empty committable set".into()));
        }
        for (i, p) in self.s_points.iter().enumerate() {
            if !in_convex_hull(&p.pos, &self.verifiers)? {
                return Err(PcError::PointOutsideHull(i));
            }
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.verifiers.len()
    }

    pub fn travel(&self, alpha: usize, i: usize) -> Fix {
        distance(&self.s_points[alpha].pos, &self.verifiers[i])
            .expect("scenario dimensions agree")
            .value
    }

    /// t1 = t_init + 2T with t_init early enough that the verifiers can send
    /// every challenge after receiving the key commitment at t1.
    pub fn timing(&self) -> SessionTiming {
        let mut max_travel = Fix::ZERO;
        let mut earliest_send: Option<Fix> = None;
        let mut t_final: Option<Fix> = None;
        for (a, p) in self.s_points.iter().enumerate() {
            let t = p.time_fix();
            for i in 0..self.k() {
                let d = self.travel(a, i);
                if d > max_travel {
                    max_travel = d;
                }
                let send = t - d;
                let resp = t + d;
                earliest_send = Some(earliest_send.map_or(send, |e| e.min(send)));
                t_final = Some(t_final.map_or(resp, |f| f.max(resp)));
            }
        }
        let earliest = earliest_send.expect("nonempty S");
        let t1 = earliest;
        let t_init = t1 - max_travel - max_travel;
        SessionTiming { t_init, t1, t_final: t_final.expect("nonempty S"), max_travel }
    }

    /// Time verifier `i` expects the prover message for (`alpha`, any round).
    pub fn response_time(&self, alpha: usize, i: usize) -> Fix {
        self.s_points[alpha].time_fix() + self.travel(alpha, i)
    }

    /// Canonical encryption counter: (alpha, verifier, round).
    pub fn entry_index(&self, alpha: u32, verifier: u32, round: u32) -> u64 {
        ((alpha as u64 * self.k() as u64) + verifier as u64) * self.params.rounds as u64
            + round as u64
    }

    pub fn pp(&self) -> PublicParams {
        let mut stream = SeedStream::derive(self.seed, domain::PUBLIC_PARAMS, 0);
        com_setup(&mut stream, self.params.lambda_com, self.params.kappa)
    }

    /// PV instance for one committable point (used for challenge scripts and
    /// the acceptance predicate).
    pub fn pv_instance(&self, alpha: usize) -> crate::pv::PvInstance {
        crate::pv::PvInstance {
            dim: self.dim,
            verifiers: self.verifiers.clone(),
            target: self.s_points[alpha].clone(),
            n: self.params.n,
            rounds: self.params.rounds,
        }
    }
}

/// One timestamped, labeled prover message in the transcript M.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptEntry {
    pub receiver: u16,
    pub timestamp: Fix,
    pub alpha: u32,
    pub round: u32,
    pub ct: Ciphertext,
}

/// The classical commitment state rho = (pp, c, M, s).
#[derive(Debug, Clone, PartialEq)]
pub struct CommitmentState {
    pub pp: PublicParams,
    pub c: Vec<bool>,
    pub entries: Vec<TranscriptEntry>,
    pub seed: u64,
}

pub fn entry_label(alpha: u32, round: u32) -> String {
    format!("e{alpha}:{round}")
}

pub fn ct_to_bytes(ct: &Ciphertext) -> Vec<u8> {
    let mut out = ct.index.to_be_bytes().to_vec();
    out.extend((ct.body.len() as u16).to_be_bytes());
    out.extend(crate::crypto::cipher::bits_to_bytes(&ct.body));
    out
}

pub fn ct_from_bytes(bytes: &[u8]) -> Option<Ciphertext> {
    if bytes.len() < 10 {
        return None;
    }
    let index = u64::from_be_bytes(bytes[..8].try_into().ok()?);
    let bit_len = u16::from_be_bytes(bytes[8..10].try_into().ok()?) as usize;
    let body_bytes = &bytes[10..];
    if body_bytes.len() != bit_len.div_ceil(8) {
        return None;
    }
    Some(Ciphertext { index, body: crate::crypto::cipher::bytes_to_bits(body_bytes, bit_len) })
}

/// Honest position-commitment prover. All expected response times for every
/// point of S are precomputed; the real point's challenge is answered with
/// an encrypted measurement, everything else with encrypted dummies.
pub struct PcProver {
    scenario: PcScenario,
    position: SpatialPoint,
    /// Index into S this prover actually occupies, if any.
    alpha_star: Option<u32>,
    rng: SeedStream,
    pub sk: Option<SecretKey>,
    pub com_rand: Option<Vec<bool>>,
    pending: HashMap<(u32, u32), PendingChallenge>,
    variant: PvVariant,
}

#[derive(Default)]
struct PendingChallenge {
    xs: Vec<Option<Vec<bool>>>,
    qubit: Option<crate::qsim::QubitHandle>,
    answered: bool,
}

impl PcProver {
    pub fn new(
        scenario: PcScenario,
        position: SpatialPoint,
        alpha_star: Option<u32>,
        variant: PvVariant,
    ) -> PcProver {
        let rng = SeedStream::derive(scenario.seed, domain::PROVER, 0);
        PcProver {
            scenario,
            position,
            alpha_star,
            rng,
            sk: None,
            com_rand: None,
            pending: HashMap::new(),
            variant,
        }
    }

    fn dist_to_verifier(&self, i: usize) -> Fix {
        distance(&self.position, &self.scenario.verifiers[i])
            .expect("dimensions agree")
            .value
    }

    /// All scheduled sends that follow from receiving pp: the key commitment
    /// timed to arrive at t1 everywhere, then dummies for every non-occupied
    /// (alpha, verifier, round) timed to arrive exactly when that session's
    /// honest response would.
    fn schedule_after_pp(&mut self, now: Fix, pp: &PublicParams) -> Vec<Signal> {
        let sc = self.scenario.clone();
        let sk = SecretKey::generate(&mut self.rng, sc.params.kappa);
        let rand = self.rng.bits(sc.params.lambda_com * sc.params.kappa);
        let c = com(pp, &sk.0, &rand).expect("pp sized for kappa");
        let c_bytes = crate::crypto::cipher::bits_to_bytes(&c);
        let timing = sc.timing();
        // The 2T head start makes every send feasible for a prover at a
        // point of S; a misplaced prover degrades to best effort and its
        // mistimed messages fail the reveal predicate later.
        let on_s = self.alpha_star.is_some();
        let feasible = |send: Fix| {
            debug_assert!(!on_s || send >= now, "send precedes pp receipt at a point of S");
            send.max(now)
        };
        let mut out = Vec::new();
        for i in 0..sc.k() {
            let send = feasible(timing.t1 - self.dist_to_verifier(i));
            out.push(Signal::classical(
                send,
                Mode::Directional { target: sc.verifiers[i].clone() },
                c_bytes.clone(),
                Some("com".to_string()),
            ));
        }
        for alpha in 0..sc.s_points.len() as u32 {
            if Some(alpha) == self.alpha_star {
                continue;
            }
            for i in 0..sc.k() {
                for round in 0..sc.params.rounds {
                    let ct = enc(
                        &sk,
                        sc.entry_index(alpha, i as u32, round),
                        None,
                        sc.params.payload_bits,
                    )
                    .expect("payload within width");
                    let arrive = sc.response_time(alpha as usize, i);
                    let send = feasible(arrive - self.dist_to_verifier(i));
                    out.push(Signal::classical(
                        send,
                        Mode::Directional { target: sc.verifiers[i].clone() },
                        ct_to_bytes(&ct),
                        Some(entry_label(alpha, round)),
                    ));
                }
            }
        }
        self.sk = Some(sk);
        self.com_rand = Some(rand);
        out
    }

    pub fn opening(&self) -> Option<Opening> {
        Some(Opening { msg: self.sk.as_ref()?.0.clone(), rand: self.com_rand.clone()? })
    }
}

impl PartyBehavior for PcProver {
    fn on_deliver(&mut self, ctx: &mut PartyCtx<'_>, d: &Delivery) -> Vec<Signal> {
        match d.label.as_deref() {
            Some("pp") => {
                if self.sk.is_some() {
                    return Vec::new();
                }
                let bits = crate::crypto::cipher::bytes_to_bits(
                    &d.payload,
                    3 * self.scenario.params.lambda_com * self.scenario.params.kappa,
                );
                let pp = PublicParams::from_bits(
                    self.scenario.params.lambda_com,
                    self.scenario.params.kappa,
                    &bits,
                )
                .expect("coordinator pp well-formed");
                self.schedule_after_pp(d.time, &pp)
            }
            Some(label) => {
                let Some(('c', session, round)) = parse_label(label) else {
                    return Vec::new();
                };
                if Some(session) != self.alpha_star {
                    return Vec::new();
                }
                let Some(parsed) = parse_challenge(&d.payload) else {
                    return Vec::new();
                };
                let k = self.scenario.k();
                let entry = self
                    .pending
                    .entry((session, round))
                    .or_insert_with(|| PendingChallenge { xs: vec![None; k], ..Default::default() });
                if entry.answered {
                    return Vec::new();
                }
                if (parsed.verifier_index as usize) < k {
                    entry.xs[parsed.verifier_index as usize] = Some(parsed.x);
                }
                for q in &d.qubits {
                    entry.qubit = Some(*q);
                }
                if !(entry.xs.iter().all(Option::is_some) && entry.qubit.is_some()) {
                    return Vec::new();
                }
                entry.answered = true;
                let xs: Vec<Vec<bool>> = entry.xs.iter().map(|x| x.clone().unwrap()).collect();
                let basis = variant_basis(self.variant, &xs).expect("uniform challenge lengths");
                let y = ctx
                    .arena
                    .measure(entry.qubit.take().unwrap(), basis, ctx.rng)
                    .expect("challenge qubit live");
                let sk = self.sk.as_ref().expect("sk generated before challenges");
                let sc = &self.scenario;
                let mut payload = vec![false; sc.params.payload_bits];
                payload[0] = y;
                let mut out = Vec::new();
                for i in 0..sc.k() {
                    let ct = enc(
                        sk,
                        sc.entry_index(session, i as u32, round),
                        Some(&payload),
                        sc.params.payload_bits,
                    )
                    .expect("payload within width");
                    // Sent at the measurement time: arrives at exactly the
                    // expected response time for this session.
                    out.push(Signal::classical(
                        ctx.now,
                        Mode::Directional { target: sc.verifiers[i].clone() },
                        ct_to_bytes(&ct),
                        Some(entry_label(session, round)),
                    ));
                }
                out
            }
            None => Vec::new(),
        }
    }
    fn as_any(&self) -> &dyn std::any::Any {
        self
    }
}

/// Commit-phase verifier: challenge sends are scripted; it records the key
/// commitment and the first labeled prover message per (alpha, round).
pub struct PcVerifier {
    pub index: u16,
    pub com_received: Option<(Fix, Vec<u8>)>,
    pub entries: HashMap<(u32, u32), (Fix, Vec<u8>)>,
    /// Committable-point indices whose challenges this verifier suppresses
    /// (malicious-verifier denial attack; empty for honest runs).
    pub denied: Vec<u32>,
}

impl PcVerifier {
    pub fn new(index: u16) -> PcVerifier {
        PcVerifier { index, com_received: None, entries: HashMap::new(), denied: Vec::new() }
    }
}

impl PartyBehavior for PcVerifier {
    fn on_deliver(&mut self, _ctx: &mut PartyCtx<'_>, d: &Delivery) -> Vec<Signal> {
        match d.label.as_deref() {
            Some("com") => {
                if self.com_received.is_none() {
                    self.com_received = Some((d.time, d.payload.clone()));
                }
            }
            Some(label) => {
                if let Some(('e', alpha, round)) = parse_label(label) {
                    self.entries.entry((alpha, round)).or_insert((d.time, d.payload.clone()));
                }
            }
            None => {}
        }
        Vec::new()
    }
    fn as_any(&self) -> &dyn std::any::Any {
        self
    }
}

/// Result of a full commit-phase run.
pub struct CommitRun {
    pub rho: CommitmentState,
    pub opening: Option<Opening>,
    pub engine: Engine,
    pub verifier_ids: Vec<PartyId>,
    pub prover_id: PartyId,
    pub timing: SessionTiming,
}

/// Wires up and runs the commit phase with an honest prover at
/// `s_points[alpha_star]` (or at an arbitrary position when `position` is
/// given; a position matching no point of S sends dummies everywhere).
pub fn run_commit(
    scenario: &PcScenario,
    alpha_star: Option<u32>,
    position: Option<SpatialPoint>,
    denied_zones: &[u32],
) -> Result<CommitRun, PcError> {
    if let Some(a) = alpha_star {
        if a as usize >= scenario.s_points.len() {
            return Err(PcError::UnknownAlpha(a));
        }
    }
    let position = match (position, alpha_star) {
        (Some(p), _) => p,
        (None, Some(a)) => scenario.s_points[a as usize].pos.clone(),
        (None, None) => return Err(PcError::Infeasible("prover position unspecified".into())),
    };
    let timing = scenario.timing();
    let mut engine = Engine::new(scenario.dim, scenario.seed);
    let verifier_ids: Vec<PartyId> = (0..scenario.k())
        .map(|i| {
            let mut v = PcVerifier::new(i as u16);
            v.denied = denied_zones.to_vec();
            engine.add_party(scenario.verifiers[i].clone(), Box::new(v))
        })
        .collect();
    let prover_id = engine.add_party(
        position.clone(),
        Box::new(PcProver::new(scenario.clone(), position, alpha_star, PvVariant::FBb84)),
    );

    // Coordinator broadcasts pp at t_init.
    let pp = scenario.pp();
    let pp_bytes = crate::crypto::cipher::bits_to_bytes(&pp.to_bits());
    engine
        .schedule_send(
            verifier_ids[0],
            Signal::classical(timing.t_init, Mode::Broadcast, pp_bytes, Some("pp".to_string())),
        )
        .expect("pp broadcast valid");

    // Challenge scripts for every committable point, starting at t1.
    for alpha in 0..scenario.s_points.len() {
        if denied_zones.contains(&(alpha as u32)) {
            continue;
        }
        let inst = scenario.pv_instance(alpha);
        let scripts = crate::pv::verifier_scripts(
            &inst,
            scenario.seed,
            alpha as u32,
            PvVariant::FBb84,
            &mut engine.arena,
        );
        for (vid, script) in verifier_ids.iter().zip(scripts) {
            for sig in script {
                debug_assert!(sig.send_time >= timing.t1, "challenge before t1");
                engine.schedule_send(*vid, sig).expect("challenge schedule valid");
            }
        }
    }

    engine.run_to_quiescence();

    // Assemble rho.
    let mut entries = Vec::new();
    for alpha in 0..scenario.s_points.len() as u32 {
        for (i, vid) in verifier_ids.iter().enumerate() {
            for round in 0..scenario.params.rounds {
                let v = engine.behavior::<PcVerifier>(*vid);
                if let Some((t, bytes)) = v.entries.get(&(alpha, round)) {
                    if let Some(ct) = ct_from_bytes(bytes) {
                        entries.push(TranscriptEntry {
                            receiver: i as u16,
                            timestamp: *t,
                            alpha,
                            round,
                            ct,
                        });
                    }
                }
            }
        }
    }
    entries.sort_by_key(|e| (e.alpha, e.receiver, e.round));
    let c_bits = {
        let v0 = engine.behavior::<PcVerifier>(verifier_ids[0]);
        match &v0.com_received {
            Some((_, bytes)) => crate::crypto::cipher::bytes_to_bits(
                bytes,
                3 * scenario.params.lambda_com * scenario.params.kappa,
            ),
            None => Vec::new(),
        }
    };
    let opening = engine.behavior::<PcProver>(prover_id).opening();
    let rho = CommitmentState { pp, c: c_bits, entries, seed: scenario.seed };
    Ok(CommitRun { rho, opening, engine, verifier_ids, prover_id, timing })
}

/// A claimed point plus the key opening.
#[derive(Debug, Clone)]
pub struct RevealRequest {
    pub alpha: u32,
    pub opening: Opening,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RevealOutcome {
    pub accept: bool,
    /// Points whose sessions verified (the set A).
    pub accept_set: Vec<u32>,
}

/// Decrypted per-point verdicts, shared by reveal and the statement
/// compiler: for each point, whether every entry decrypted validly to the
/// same bit per round, that bit matched the challenge bit, and every
/// timestamp was exact.
pub fn session_verdicts(scenario: &PcScenario, rho: &CommitmentState, sk: &SecretKey) -> Vec<bool> {
    let k = scenario.k();
    let rounds = scenario.params.rounds;
    (0..scenario.s_points.len() as u32)
        .map(|alpha| {
            let mut per_round_bits: Vec<Option<bool>> = vec![None; rounds as usize];
            for round in 0..rounds {
                let mut bits = Vec::with_capacity(k);
                for i in 0..k as u16 {
                    let Some(e) = rho
                        .entries
                        .iter()
                        .find(|e| e.alpha == alpha && e.receiver == i && e.round == round)
                    else {
                        return false;
                    };
                    if e.timestamp != scenario.response_time(alpha as usize, i as usize) {
                        return false;
                    }
                    if e.ct.index != scenario.entry_index(alpha, i as u32, round) {
                        return false;
                    }
                    match dec(sk, &e.ct) {
                        Some(payload) if !payload.is_empty() => bits.push(payload[0]),
                        _ => return false,
                    }
                }
                if bits.iter().any(|&b| b != bits[0]) {
                    return false;
                }
                per_round_bits[round as usize] = Some(bits[0]);
            }
            (0..rounds).all(|round| {
                let ch = round_challenge(rho.seed, alpha, round, k, scenario.params.n);
                per_round_bits[round as usize] == Some(ch.b)
            })
        })
        .collect()
}

/// Reveal phase: deterministic function of (rho, request); no verifier
/// randomness.
pub fn reveal_phase(
    scenario: &PcScenario,
    rho: &CommitmentState,
    req: &RevealRequest,
) -> RevealOutcome {
    if req.alpha as usize >= scenario.s_points.len() {
        return RevealOutcome { accept: false, accept_set: Vec::new() };
    }
    // Key-opening check: c = Com(pp, sk, r).
    match com(&rho.pp, &req.opening.msg, &req.opening.rand) {
        Ok(c) if c == rho.c => {}
        _ => return RevealOutcome { accept: false, accept_set: Vec::new() },
    }
    let sk = SecretKey(req.opening.msg.clone());
    let verdicts = session_verdicts(scenario, rho, &sk);
    let accept_set: Vec<u32> = verdicts
        .iter()
        .enumerate()
        .filter_map(|(a, &ok)| if ok { Some(a as u32) } else { None })
        .collect();
    let accept = accept_set == vec![req.alpha];
    RevealOutcome { accept, accept_set }
}

/// One record of a verifier's view: what arrived, when, at which verifier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViewEntry {
    pub receiver: u16,
    pub timestamp: Fix,
    pub label: String,
    pub body: Vec<u8>,
}

impl ViewEntry {
    /// The shape tuple the hiding property pins exactly.
    pub fn shape(&self) -> (u16, Fix, String, usize) {
        (self.receiver, self.timestamp, self.label.clone(), self.body.len())
    }
}

fn canonical_sort(view: &mut [ViewEntry]) {
    view.sort_by(|a, b| {
        (a.timestamp, a.receiver, &a.label).cmp(&(b.timestamp, b.receiver, &b.label))
    });
}

/// The verifiers' joint view up to time tau, extracted from a commit run.
pub fn real_view(run: &CommitRun, tau: Fix) -> Vec<ViewEntry> {
    let mut out = Vec::new();
    for rec in run.engine.records() {
        if rec.kind != crate::sim::EventKind::Deliver || rec.time > tau {
            continue;
        }
        let Some(label) = &rec.label else { continue };
        if !(label == "pp" || label == "com" || label.starts_with('e')) {
            continue;
        }
        let Some(pos) = run.verifier_ids.iter().position(|&v| v == rec.party) else {
            continue;
        };
        out.push(ViewEntry {
            receiver: pos as u16,
            timestamp: rec.time,
            label: label.clone(),
            body: rec.payload.clone(),
        });
    }
    canonical_sort(&mut out);
    out
}

/// The hiding simulator: builds the simulated transcript M'_pp with a fresh
/// key and all-dummy ciphertexts at exactly the times each verifier would
/// receive messages for every point of S, then replays the verifier program
/// up to tau.
pub fn hiding_simulator(scenario: &PcScenario, tau: Fix, sim_index: u64) -> Vec<ViewEntry> {
    let timing = scenario.timing();
    let pp = scenario.pp();
    let mut rng = SeedStream::derive(scenario.seed, domain::SIMULATOR, sim_index);
    let sk = SecretKey::generate(&mut rng, scenario.params.kappa);
    let rand = rng.bits(scenario.params.lambda_com * scenario.params.kappa);
    let c = com(&pp, &sk.0, &rand).expect("pp sized for kappa");
    let c_bytes = crate::crypto::cipher::bits_to_bytes(&c);
    let pp_bytes = crate::crypto::cipher::bits_to_bytes(&pp.to_bits());

    let mut out = Vec::new();
    for i in 0..scenario.k() {
        let pp_arrival = timing.t_init
            + distance(&scenario.verifiers[0], &scenario.verifiers[i])
                .expect("dimensions agree")
                .value;
        out.push(ViewEntry {
            receiver: i as u16,
            timestamp: pp_arrival,
            label: "pp".to_string(),
            body: pp_bytes.clone(),
        });
        out.push(ViewEntry {
            receiver: i as u16,
            timestamp: timing.t1,
            label: "com".to_string(),
            body: c_bytes.clone(),
        });
        for alpha in 0..scenario.s_points.len() as u32 {
            for round in 0..scenario.params.rounds {
                let ct = enc(
                    &sk,
                    scenario.entry_index(alpha, i as u32, round),
                    None,
                    scenario.params.payload_bits,
                )
                .expect("payload within width");
                out.push(ViewEntry {
                    receiver: i as u16,
                    timestamp: scenario.response_time(alpha as usize, i),
                    label: entry_label(alpha, round),
                    body: ct_to_bytes(&ct),
                });
            }
        }
    }
    out.retain(|e| e.timestamp <= tau);
    canonical_sort(&mut out);
    out
}

// --- rho file format -------------------------------------------------------

const PCMT_MAGIC: &[u8; 4] = b"PCMT";
const PCMT_VERSION: u16 = 1;

fn push_section(out: &mut Vec<u8>, body: &[u8]) {
    out.extend((body.len() as u32).to_be_bytes());
    out.extend_from_slice(body);
}

fn write_rat(out: &mut Vec<u8>, r: &Rat) {
    let s = format!("{}/{}", r.numer(), r.denom());
    out.extend((s.len() as u16).to_be_bytes());
    out.extend(s.as_bytes());
}

fn read_rat(bytes: &[u8], pos: &mut usize) -> Option<Rat> {
    let len = u16::from_be_bytes(bytes.get(*pos..*pos + 2)?.try_into().ok()?) as usize;
    *pos += 2;
    let s = std::str::from_utf8(bytes.get(*pos..*pos + len)?).ok()?;
    *pos += len;
    crate::geometry::rat_parse(s)
}

/// Serializes (pp, c, s, M) plus the scenario the reveal check needs, so a
/// commitment can be stored and revealed in a later process invocation.
pub fn write_rho(scenario: &PcScenario, rho: &CommitmentState) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(PCMT_MAGIC);
    out.extend(PCMT_VERSION.to_be_bytes());

    // pp section: lambda u16, msg_bits u32, packed bits.
    let mut pp = Vec::new();
    pp.extend((rho.pp.lambda as u16).to_be_bytes());
    pp.extend((rho.pp.msg_bits() as u32).to_be_bytes());
    pp.extend(crate::crypto::cipher::bits_to_bytes(&rho.pp.to_bits()));
    push_section(&mut out, &pp);

    // c section: bit length u32, packed bits.
    let mut c = Vec::new();
    c.extend((rho.c.len() as u32).to_be_bytes());
    c.extend(crate::crypto::cipher::bits_to_bytes(&rho.c));
    push_section(&mut out, &c);

    // s section: the shared randomness seed.
    push_section(&mut out, &rho.seed.to_be_bytes());

    // M section.
    let mut m = Vec::new();
    m.extend((rho.entries.len() as u32).to_be_bytes());
    for e in &rho.entries {
        m.extend(e.receiver.to_be_bytes());
        m.extend(e.timestamp.raw().to_be_bytes());
        m.extend(e.alpha.to_be_bytes());
        let ct = ct_to_bytes(&e.ct);
        m.extend((ct.len() as u32).to_be_bytes());
        m.extend(ct);
    }
    push_section(&mut out, &m);

    // Scenario section: everything Reveal needs to recompute the predicate.
    let mut sc = Vec::new();
    sc.extend((scenario.dim as u16).to_be_bytes());
    sc.extend((scenario.k() as u16).to_be_bytes());
    for v in &scenario.verifiers {
        for coord in v {
            write_rat(&mut sc, coord);
        }
    }
    sc.extend((scenario.s_points.len() as u32).to_be_bytes());
    for p in &scenario.s_points {
        for coord in &p.pos {
            write_rat(&mut sc, coord);
        }
        write_rat(&mut sc, &p.t);
    }
    sc.extend((scenario.params.n as u32).to_be_bytes());
    sc.extend(scenario.params.rounds.to_be_bytes());
    sc.extend((scenario.params.kappa as u32).to_be_bytes());
    sc.extend((scenario.params.lambda_com as u32).to_be_bytes());
    sc.extend((scenario.params.payload_bits as u32).to_be_bytes());
    sc.extend(scenario.seed.to_be_bytes());
    push_section(&mut out, &sc);
    out
}

fn read_section<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a [u8]> {
    let len = u32::from_be_bytes(bytes.get(*pos..*pos + 4)?.try_into().ok()?) as usize;
    *pos += 4;
    let body = bytes.get(*pos..*pos + len)?;
    *pos += len;
    Some(body)
}

pub fn read_rho(bytes: &[u8]) -> Result<(PcScenario, CommitmentState), PcError> {
    let bad = |m: &str| PcError::Malformed(m.to_string());
    if bytes.len() < 6 || &bytes[..4] != PCMT_MAGIC {
        return Err(bad("missing PCMT magic"));
    }
    if u16::from_be_bytes([bytes[4], bytes[5]]) != PCMT_VERSION {
        return Err(bad("unsupported version"));
    }
    let mut pos = 6usize;
    let pp_sec = read_section(bytes, &mut pos).ok_or_else(|| bad("pp section"))?;
    if pp_sec.len() < 6 {
        return Err(bad("pp section short"));
    }
    let lambda = u16::from_be_bytes([pp_sec[0], pp_sec[1]]) as usize;
    let msg_bits = u32::from_be_bytes(pp_sec[2..6].try_into().unwrap()) as usize;
    let pp_bits_len = 3 * lambda * msg_bits;
    if pp_sec.len() < 6 + pp_bits_len.div_ceil(8) {
        return Err(bad("pp bits short"));
    }
    let pp_bits = crate::crypto::cipher::bytes_to_bits(&pp_sec[6..], pp_bits_len);
    let pp = PublicParams::from_bits(lambda, msg_bits, &pp_bits).ok_or_else(|| bad("pp bits"))?;

    let c_sec = read_section(bytes, &mut pos).ok_or_else(|| bad("c section"))?;
    if c_sec.len() < 4 {
        return Err(bad("c section short"));
    }
    let c_len = u32::from_be_bytes(c_sec[..4].try_into().unwrap()) as usize;
    if c_sec.len() < 4 + c_len.div_ceil(8) {
        return Err(bad("c bits short"));
    }
    let c = crate::crypto::cipher::bytes_to_bits(&c_sec[4..], c_len);

    let s_sec = read_section(bytes, &mut pos).ok_or_else(|| bad("s section"))?;
    if s_sec.len() != 8 {
        return Err(bad("seed section"));
    }
    let seed = u64::from_be_bytes(s_sec.try_into().unwrap());

    let m_sec = read_section(bytes, &mut pos).ok_or_else(|| bad("M section"))?;
    let mut mp = 0usize;
    let n_entries = u32::from_be_bytes(
        m_sec.get(..4).ok_or_else(|| bad("M count"))?.try_into().unwrap(),
    ) as usize;
    mp += 4;
    let mut raw_entries = Vec::with_capacity(n_entries);
    for _ in 0..n_entries {
        let receiver =
            u16::from_be_bytes(m_sec.get(mp..mp + 2).ok_or_else(|| bad("entry"))?.try_into().unwrap());
        mp += 2;
        let ts = i128::from_be_bytes(
            m_sec.get(mp..mp + 16).ok_or_else(|| bad("entry ts"))?.try_into().unwrap(),
        );
        mp += 16;
        let alpha = u32::from_be_bytes(
            m_sec.get(mp..mp + 4).ok_or_else(|| bad("entry alpha"))?.try_into().unwrap(),
        );
        mp += 4;
        let ct_len = u32::from_be_bytes(
            m_sec.get(mp..mp + 4).ok_or_else(|| bad("entry ct len"))?.try_into().unwrap(),
        ) as usize;
        mp += 4;
        let ct = ct_from_bytes(m_sec.get(mp..mp + ct_len).ok_or_else(|| bad("entry ct"))?)
            .ok_or_else(|| bad("entry ct bits"))?;
        mp += ct_len;
        raw_entries.push((receiver, Fix::from_raw(ts), alpha, ct));
    }

    let sc_sec = read_section(bytes, &mut pos).ok_or_else(|| bad("scenario section"))?;
    let mut sp = 0usize;
    let dim =
        u16::from_be_bytes(sc_sec.get(..2).ok_or_else(|| bad("dim"))?.try_into().unwrap()) as usize;
    sp += 2;
    let k = u16::from_be_bytes(
        sc_sec.get(2..4).ok_or_else(|| bad("k"))?.try_into().unwrap(),
    ) as usize;
    sp += 2;
    let mut verifiers = Vec::with_capacity(k);
    for _ in 0..k {
        let v: Option<Vec<Rat>> = (0..dim).map(|_| read_rat(sc_sec, &mut sp)).collect();
        verifiers.push(v.ok_or_else(|| bad("verifier coords"))?);
    }
    let n_s = u32::from_be_bytes(
        sc_sec.get(sp..sp + 4).ok_or_else(|| bad("S count"))?.try_into().unwrap(),
    ) as usize;
    sp += 4;
    let mut s_points = Vec::with_capacity(n_s);
    for _ in 0..n_s {
        let posn: Option<Vec<Rat>> = (0..dim).map(|_| read_rat(sc_sec, &mut sp)).collect();
        let t = read_rat(sc_sec, &mut sp).ok_or_else(|| bad("point time"))?;
        s_points.push(SpacetimePoint::new(posn.ok_or_else(|| bad("point coords"))?, t));
    }
    let mut take_u32 = |label: &str| -> Result<u32, PcError> {
        let v = u32::from_be_bytes(
            sc_sec
                .get(sp..sp + 4)
                .ok_or_else(|| bad(label))?
                .try_into()
                .unwrap(),
        );
        sp += 4;
        Ok(v)
    };
    let n = take_u32("n")? as usize;
    let rounds = take_u32("rounds")?;
    let kappa = take_u32("kappa")? as usize;
    let lambda_com = take_u32("lambda")? as usize;
    let payload_bits = take_u32("payload")? as usize;
    let sc_seed = u64::from_be_bytes(
        sc_sec.get(sp..sp + 8).ok_or_else(|| bad("seed"))?.try_into().unwrap(),
    );

    let scenario = PcScenario::new(
        dim,
        verifiers,
        s_points,
        PcParams { n, rounds, kappa, lambda_com, payload_bits },
        sc_seed,
    )?;
    // Rounds are implicit in canonical entry order per (alpha, receiver).
    let mut round_counter: HashMap<(u32, u16), u32> = HashMap::new();
    let entries = raw_entries
        .into_iter()
        .map(|(receiver, timestamp, alpha, ct)| {
            let r = round_counter.entry((alpha, receiver)).or_insert(0);
            let round = *r;
            *r += 1;
            TranscriptEntry { receiver, timestamp, alpha, round, ct }
        })
        .collect();
    Ok((scenario, CommitmentState { pp, c, entries, seed }))
}

const PCOP_MAGIC: &[u8; 4] = b"PCOP";

/// Serializes a key opening (sk bits plus commitment randomness).
pub fn write_opening(opening: &Opening) -> Vec<u8> {
    let mut out = PCOP_MAGIC.to_vec();
    out.extend((opening.msg.len() as u32).to_be_bytes());
    out.extend(crate::crypto::cipher::bits_to_bytes(&opening.msg));
    out.extend((opening.rand.len() as u32).to_be_bytes());
    out.extend(crate::crypto::cipher::bits_to_bytes(&opening.rand));
    out
}

pub fn read_opening(bytes: &[u8]) -> Result<Opening, PcError> {
    let bad = |m: &str| PcError::Malformed(m.to_string());
    if bytes.len() < 8 || &bytes[..4] != PCOP_MAGIC {
        return Err(bad("missing PCOP magic"));
    }
    let mut pos = 4usize;
    let msg_len = u32::from_be_bytes(
        bytes.get(pos..pos + 4).ok_or_else(|| bad("msg len"))?.try_into().unwrap(),
    ) as usize;
    pos += 4;
    let msg_bytes = msg_len.div_ceil(8);
    let msg = crate::crypto::cipher::bytes_to_bits(
        bytes.get(pos..pos + msg_bytes).ok_or_else(|| bad("msg bits"))?,
        msg_len,
    );
    pos += msg_bytes;
    let rand_len = u32::from_be_bytes(
        bytes.get(pos..pos + 4).ok_or_else(|| bad("rand len"))?.try_into().unwrap(),
    ) as usize;
    pos += 4;
    let rand_bytes = rand_len.div_ceil(8);
    let rand = crate::crypto::cipher::bytes_to_bits(
        bytes.get(pos..pos + rand_bytes).ok_or_else(|| bad("rand bits"))?,
        rand_len,
    );
    Ok(Opening { msg, rand })
}

/// Structural sanity of rho against its scenario: one entry per
/// (alpha, verifier, round).
pub fn validate_rho(scenario: &PcScenario, rho: &CommitmentState) -> Result<(), PcError> {
    let expected = scenario.s_points.len() * scenario.k() * scenario.params.rounds as usize;
    if rho.entries.len() != expected {
        return Err(PcError::Malformed(format!(
            "expected {expected} transcript entries, got {}",
            rho.entries.len()
        )));
    }
    for alpha in 0..scenario.s_points.len() as u32 {
        for i in 0..scenario.k() as u16 {
            for round in 0..scenario.params.rounds {
                let n = rho
                    .entries
                    .iter()
                    .filter(|e| e.alpha == alpha && e.receiver == i && e.round == round)
                    .count();
                if n != 1 {
                    return Err(PcError::Malformed(format!(
                        "entry multiplicity {n} for (alpha {alpha}, verifier {i}, round {round})"
                    )));
                }
            }
        }
    }
    if rho.c.len() != 3 * scenario.params.lambda_com * scenario.params.kappa {
        return Err(PcError::Malformed("commitment length".into()));
    }
    Ok(())
}

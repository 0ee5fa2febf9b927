//! The optimized encrypt-then-verify scheme: per-tick broadcast challenges,
//! the induced mesh of committable points, and lockstep encrypted responses.
//!
//! Each verifier broadcasts one challenge string per tick. Points where one
//! wavefront per verifier coincides form the committable mesh. The prover
//! answers the coinciding set with an encrypted n-bit response (XOR fold of
//! the set) in the response slot indexed by the set's latest tick, and fills
//! every other slot with encrypted dummies, delayed so all verifiers receive
//! exactly one prover message per slot simultaneously. Per-tick work on
//! every party is constant in the mesh size.

use num::{Signed, Zero};
use thiserror::Error;

use crate::crypto::commit::{com, com_setup, Opening, PublicParams};
use crate::crypto::enc::{dec, enc, SecretKey};
use crate::fixed::Fix;
use crate::geometry::{
    distance, in_convex_hull, is_nondegenerate_simplex, GeometryError, Rat, SpacetimePoint,
    SpatialPoint,
};
use crate::pc::{entry_label, CommitmentState, RevealOutcome, TranscriptEntry};
use crate::pv::parse_label;
use crate::rng::{domain, SeedStream};
use crate::sim::{
    Delivery, Engine, EventKind, EventRecord, Mode, PartyBehavior, PartyCtx, PartyId,
    ProfileGrid, Signal,
};

/// Mesh coincidence tolerance under the shared fixed-point routine.
pub const DELTA_MESH_BITS: u32 = 20;

pub fn delta_mesh() -> Fix {
    Fix::from_raw(1i128 << (crate::fixed::FRAC_BITS - DELTA_MESH_BITS))
}

#[derive(Debug, Error)]
pub enum PcOptError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("degenerate verifier placement (affinely dependent)")]
    DegeneratePlacement,
    #[error("unsupported dimension {0} for mesh enumeration")]
    UnsupportedDimension(usize),
    #[error("mesh index {0} out of range")]
    MeshIndex(usize),
    #[error("scenario infeasible: {0}")]
    Infeasible(String),
}

/// Uniform tick grid for challenge broadcasts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TickSchedule {
    pub t_start: Rat,
    pub delta: Rat,
    pub ticks: u64,
}

impl TickSchedule {
    pub fn tick_time(&self, j: u64) -> Rat {
        &self.t_start + &(&self.delta * Rat::from_integer(j.into()))
    }
}

/// A spacetime point where one broadcast wavefront per verifier coincides.
#[derive(Debug, Clone)]
pub struct MeshPoint {
    pub point: SpacetimePoint,
    /// Send tick per verifier whose wavefront passes through the point.
    pub send_ticks: Vec<u64>,
    /// Response label: the latest tick in the coinciding set.
    pub label: u64,
}

#[derive(Debug, Clone)]
pub struct PcOptScenario {
    pub dim: usize,
    pub verifiers: Vec<SpatialPoint>,
    pub schedule: TickSchedule,
    /// Challenge string bits per verifier per tick; also the response width.
    pub n: usize,
    pub kappa: usize,
    pub lambda_com: usize,
    pub seed: u64,
}

impl PcOptScenario {
    pub fn k(&self) -> usize {
        self.verifiers.len()
    }

    /// Sum of verifier bounding-box edge lengths: a rational upper bound on
    /// any hull-to-verifier distance, used for canonical slack.
    fn span_sum(&self) -> Rat {
        (0..self.dim)
            .map(|ax| {
                let lo = self.verifiers.iter().map(|v| &v[ax]).min().unwrap();
                let hi = self.verifiers.iter().map(|v| &v[ax]).max().unwrap();
                hi - lo
            })
            .sum()
    }

    pub fn t_init(&self) -> Rat {
        let two_span: Rat = self.span_sum() * Rat::from_integer(2.into());
        &self.schedule.t_start - &two_span - Rat::from_integer(1.into())
    }

    /// All verifiers receive the key commitment when challenges begin.
    pub fn t1(&self) -> Rat {
        self.schedule.t_start.clone()
    }

    /// First response slot, late enough that any mesh response content is
    /// known before its send time.
    pub fn slot0(&self) -> Rat {
        let two_span: Rat = self.span_sum() * Rat::from_integer(2.into());
        &(&self.schedule.t_start + &two_span) + &self.schedule.delta
    }

    pub fn slot_time(&self, j: u64) -> Rat {
        &self.slot0() + &(&self.schedule.delta * Rat::from_integer(j.into()))
    }

    pub fn slot_time_fix(&self, j: u64) -> Fix {
        Fix::from_rational(&self.slot_time(j))
    }

    /// Challenge string broadcast by verifier i at tick j.
    pub fn challenge_bits(&self, i: usize, j: u64) -> Vec<bool> {
        let mut s = SeedStream::derive(
            self.seed,
            domain::TICK_CHALLENGE,
            ((i as u64) << 40) | j,
        );
        s.bits(self.n)
    }

    pub fn entry_index(&self, slot: u64, verifier: usize) -> u64 {
        slot * self.k() as u64 + verifier as u64
    }

    pub fn pp(&self) -> PublicParams {
        let mut stream = SeedStream::derive(self.seed, domain::PUBLIC_PARAMS, 2);
        com_setup(&mut stream, self.lambda_com, self.kappa)
    }

    /// Expected response for a mesh point: XOR fold of its coinciding
    /// challenge strings.
    pub fn expected_response(&self, mesh: &MeshPoint) -> Vec<bool> {
        let mut y = vec![false; self.n];
        for (i, &tick) in mesh.send_ticks.iter().enumerate() {
            for (bit, b) in y.iter_mut().zip(self.challenge_bits(i, tick)) {
                *bit ^= b;
            }
        }
        y
    }
}

/// Enumerates the committable mesh. Exact rational solutions in one
/// dimension; in two dimensions the coincidence time is found by a rational
/// quadratic solve with the fixed-point square root, then filtered to lie
/// within the mesh tolerance.
pub fn mesh_points(scenario: &PcOptScenario) -> Result<Vec<MeshPoint>, PcOptError> {
    if !is_nondegenerate_simplex(&scenario.verifiers) {
        return Err(PcOptError::DegeneratePlacement);
    }
    match scenario.dim {
        1 => mesh_points_1d(scenario),
        2 => mesh_points_2d(scenario),
        d => Err(PcOptError::UnsupportedDimension(d)),
    }
}

fn mesh_points_1d(sc: &PcOptScenario) -> Result<Vec<MeshPoint>, PcOptError> {
    let x1 = sc.verifiers[0][0].clone();
    let x2 = sc.verifiers[1][0].clone();
    let two = Rat::from_integer(2.into());
    let mut out = Vec::new();
    for a in 0..sc.schedule.ticks {
        for b in 0..sc.schedule.ticks {
            let ta = sc.schedule.tick_time(a);
            let tb = sc.schedule.tick_time(b);
            // |L - x1| = t - ta, |L - x2| = t - tb with L between x1 and x2:
            // L = (x1 + x2 + (tb - ta)) / 2 ... wait sign: L - x1 = t - ta and
            // x2 - L = t - tb give L = (x1 + x2 + tb - ta)/2? Solve directly.
            let l = (&(&x1 + &x2) + &(&tb - &ta)) / &two;
            if l < x1 || l > x2 {
                continue;
            }
            let t = &ta + &(&l - &x1);
            debug_assert_eq!(&t - &tb, &x2 - &l);
            out.push(MeshPoint {
                point: SpacetimePoint::new(vec![l], t),
                send_ticks: vec![a, b],
                label: a.max(b),
            });
        }
    }
    dedup_mesh(&mut out);
    Ok(out)
}

fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn mesh_points_2d(sc: &PcOptScenario) -> Result<Vec<MeshPoint>, PcOptError> {
    let xs = &sc.verifiers;
    let tol = delta_mesh();
    let mut out = Vec::new();
    let ticks = sc.schedule.ticks;
    for a0 in 0..ticks {
        for a1 in 0..ticks {
            for a2 in 0..ticks {
                let taus =
                    [sc.schedule.tick_time(a0), sc.schedule.tick_time(a1), sc.schedule.tick_time(a2)];
                // Subtracting squared wavefront equations pairwise gives two
                // linear equations A * L = b + c * t.
                let mut a_mat = [[Rat::zero(), Rat::zero()], [Rat::zero(), Rat::zero()]];
                let mut b_vec = [Rat::zero(), Rat::zero()];
                let mut c_vec = [Rat::zero(), Rat::zero()];
                for (row, i) in [1usize, 2].into_iter().enumerate() {
                    for ax in 0..2 {
                        a_mat[row][ax] =
                            (&xs[i][ax] - &xs[0][ax]) * Rat::from_integer(2.into());
                    }
                    let sq = |v: &SpatialPoint| dot(v, v);
                    b_vec[row] = &(&sq(&xs[i]) - &sq(&xs[0]))
                        + &(&(&taus[0] * &taus[0]) - &(&taus[i] * &taus[i]));
                    c_vec[row] = (&taus[i] - &taus[0]) * Rat::from_integer(2.into());
                }
                let det = &(&a_mat[0][0] * &a_mat[1][1]) - &(&a_mat[0][1] * &a_mat[1][0]);
                if det.is_zero() {
                    return Err(PcOptError::DegeneratePlacement);
                }
                // L(t) = p + q * t.
                let solve = |r0: &Rat, r1: &Rat| -> [Rat; 2] {
                    [
                        &(&(&a_mat[1][1] * r0) - &(&a_mat[0][1] * r1)) / &det,
                        &(&(&a_mat[0][0] * r1) - &(&a_mat[1][0] * r0)) / &det,
                    ]
                };
                let p = solve(&b_vec[0], &b_vec[1]);
                let q = solve(&c_vec[0], &c_vec[1]);
                // |p + q t - X0|^2 = (t - tau0)^2.
                let rel: Vec<Rat> = (0..2).map(|ax| &p[ax] - &xs[0][ax]).collect();
                let qa = &dot(&q, &q) - &Rat::from_integer(1.into());
                let qb = &(&dot(&q, &rel) * Rat::from_integer(2.into()))
                    + &(&taus[0] * Rat::from_integer(2.into()));
                let qc = &dot(&rel, &rel) - &(&taus[0] * &taus[0]);
                let mut roots: Vec<Rat> = Vec::new();
                if qa.is_zero() {
                    if !qb.is_zero() {
                        roots.push(-(&qc / &qb));
                    }
                } else {
                    let disc = &(&qb * &qb)
                        - &(&(&qa * &qc) * Rat::from_integer(4.into()));
                    if disc.is_negative() {
                        continue;
                    }
                    let (sq_raw, _) = crate::fixed::sqrt_fixed_round_half_even(
                        disc.numer(),
                        disc.denom(),
                    );
                    let sq = Fix::from_raw(sq_raw).to_rational();
                    let two_a = &qa * Rat::from_integer(2.into());
                    roots.push(&(&-qb.clone() + &sq) / &two_a);
                    roots.push(&(&-qb.clone() - &sq) / &two_a);
                }
                for t in roots {
                    let t_fix = Fix::from_rational(&t);
                    let l: Vec<Rat> =
                        (0..2).map(|ax| &p[ax] + &(&q[ax] * &t)).collect();
                    // Forward wavefronts only, inside the hull, within the
                    // mesh tolerance at every verifier.
                    let tau_max = taus.iter().cloned().fold(taus[0].clone(), |m, v| m.max(v));
                    if t < tau_max {
                        continue;
                    }
                    if !in_convex_hull(&l, xs)? {
                        continue;
                    }
                    let ok = (0..3).all(|i| {
                        let d = distance(&l, &xs[i]).expect("dims agree").value;
                        let lag = t_fix - Fix::from_rational(&taus[i]);
                        let resid = if d > lag { d - lag } else { lag - d };
                        resid <= tol
                    });
                    if ok {
                        out.push(MeshPoint {
                            point: SpacetimePoint::new(l, t),
                            send_ticks: vec![a0, a1, a2],
                            label: a0.max(a1).max(a2),
                        });
                    }
                }
            }
        }
    }
    dedup_mesh(&mut out);
    Ok(out)
}

fn dedup_mesh(points: &mut Vec<MeshPoint>) {
    points.sort_by_cached_key(|m| {
        let coords: Vec<i128> = m.point.pos.iter().map(|c| Fix::from_rational(c).raw()).collect();
        (Fix::from_rational(&m.point.t), coords)
    });
    points.dedup_by(|a, b| a.point == b.point);
}

/// Prover at a mesh point: answers the coinciding challenge set in its slot,
/// everything else with dummies, one message per verifier per slot.
pub struct OptProver {
    scenario: PcOptScenario,
    mesh: MeshPoint,
    rng: SeedStream,
    pub sk: Option<SecretKey>,
    pub com_rand: Option<Vec<bool>>,
    got: Vec<Option<Vec<bool>>>,
    answered: bool,
}

impl OptProver {
    pub fn new(scenario: PcOptScenario, mesh: MeshPoint) -> OptProver {
        let rng = SeedStream::derive(scenario.seed, domain::PROVER, 1);
        let k = scenario.k();
        OptProver { scenario, mesh, rng, sk: None, com_rand: None, got: vec![None; k], answered: false }
    }

    pub fn opening(&self) -> Option<Opening> {
        Some(Opening { msg: self.sk.as_ref()?.0.clone(), rand: self.com_rand.clone()? })
    }

    fn dist_to_verifier(&self, i: usize) -> Fix {
        distance(&self.mesh.point.pos, &self.scenario.verifiers[i])
            .expect("dims agree")
            .value
    }

    fn slot_sends(&self, slot: u64, sk: &SecretKey, payload: Option<&[bool]>) -> Vec<Signal> {
        let sc = &self.scenario;
        (0..sc.k())
            .map(|i| {
                let ct = enc(sk, sc.entry_index(slot, i), payload, sc.n)
                    .expect("payload width fits");
                let arrive = sc.slot_time_fix(slot);
                Signal::classical(
                    arrive - self.dist_to_verifier(i),
                    Mode::Directional { target: sc.verifiers[i].clone() },
                    crate::pc::ct_to_bytes(&ct),
                    Some(entry_label(slot as u32, 0)),
                )
            })
            .collect()
    }
}

impl PartyBehavior for OptProver {
    fn on_deliver(&mut self, ctx: &mut PartyCtx<'_>, d: &Delivery) -> Vec<Signal> {
        match d.label.as_deref() {
            Some("pp") => {
                if self.sk.is_some() {
                    return Vec::new();
                }
                let sc = self.scenario.clone();
                let pp_bits = crate::crypto::cipher::bytes_to_bits(
                    &d.payload,
                    3 * sc.lambda_com * sc.kappa,
                );
                let pp = PublicParams::from_bits(sc.lambda_com, sc.kappa, &pp_bits)
                    .expect("coordinator pp well-formed");
                let sk = SecretKey::generate(&mut self.rng, sc.kappa);
                let rand = self.rng.bits(sc.lambda_com * sc.kappa);
                let c = com(&pp, &sk.0, &rand).expect("pp sized for kappa");
                let c_bytes = crate::crypto::cipher::bits_to_bytes(&c);
                let t1 = Fix::from_rational(&sc.t1());
                let mut out = Vec::new();
                for i in 0..sc.k() {
                    let send = t1 - self.dist_to_verifier(i);
                    debug_assert!(send >= d.time, "commitment send before pp receipt");
                    out.push(Signal::classical(
                        send,
                        Mode::Directional { target: sc.verifiers[i].clone() },
                        c_bytes.clone(),
                        Some("com".to_string()),
                    ));
                }
                for slot in 0..sc.schedule.ticks {
                    if slot == self.mesh.label {
                        continue;
                    }
                    out.extend(self.slot_sends(slot, &sk, None));
                }
                self.sk = Some(sk);
                self.com_rand = Some(rand);
                out
            }
            Some(label) => {
                let Some(('x', i, j)) = parse_label(label) else {
                    return Vec::new();
                };
                if self.answered {
                    return Vec::new();
                }
                let i = i as usize;
                if i >= self.scenario.k() || self.mesh.send_ticks[i] != j as u64 {
                    return Vec::new();
                }
                if let Some(parsed) = crate::pv::parse_challenge(&d.payload) {
                    self.got[i] = Some(parsed.x);
                }
                if !self.got.iter().all(Option::is_some) {
                    return Vec::new();
                }
                self.answered = true;
                let mut y = vec![false; self.scenario.n];
                for x in self.got.iter().flatten() {
                    for (bit, b) in y.iter_mut().zip(x) {
                        *bit ^= b;
                    }
                }
                ctx.count_enc(self.scenario.k() as u64);
                let sk = self.sk.clone().expect("sk before challenges");
                self.slot_sends(self.mesh.label, &sk, Some(&y))
            }
            None => Vec::new(),
        }
    }
    fn as_any(&self) -> &dyn std::any::Any {
        self
    }
}

/// Verifier: broadcasts its per-tick challenge string on each tick and
/// records prover slot messages (reusing the commit-phase recorder).
pub struct OptVerifier {
    pub inner: crate::pc::PcVerifier,
    scenario: PcOptScenario,
    my_index: usize,
    next_tick: u64,
}

impl OptVerifier {
    fn new(scenario: PcOptScenario, my_index: usize) -> Self {
        OptVerifier {
            inner: crate::pc::PcVerifier::new(my_index as u16),
            scenario,
            my_index,
            next_tick: 0,
        }
    }
}

impl PartyBehavior for OptVerifier {
    fn on_deliver(&mut self, ctx: &mut PartyCtx<'_>, d: &Delivery) -> Vec<Signal> {
        self.inner.on_deliver(ctx, d)
    }

    fn on_tick(&mut self, ctx: &mut PartyCtx<'_>, t: Fix) -> Vec<Signal> {
        let sc = &self.scenario;
        if self.next_tick >= sc.schedule.ticks {
            return Vec::new();
        }
        let expected = Fix::from_rational(&sc.schedule.tick_time(self.next_tick));
        if t != expected {
            return Vec::new();
        }
        let j = self.next_tick;
        self.next_tick += 1;
        let bits = sc.challenge_bits(self.my_index, j);
        ctx.count_prg_blocks((sc.n as u64).div_ceil(64));
        vec![Signal::classical(
            t,
            Mode::Broadcast,
            crate::pv::challenge_payload(self.my_index as u8, &bits, None),
            Some(format!("x{}:{}", self.my_index, j)),
        )]
    }
    fn as_any(&self) -> &dyn std::any::Any {
        self
    }
}

pub struct PcOptRun {
    pub rho: CommitmentState,
    pub opening: Option<Opening>,
    pub engine: Engine,
    pub verifier_ids: Vec<PartyId>,
    pub mesh_index: usize,
}

pub fn run_optimized_commit(
    scenario: &PcOptScenario,
    mesh: &[MeshPoint],
    mesh_index: usize,
) -> Result<PcOptRun, PcOptError> {
    if mesh_index >= mesh.len() {
        return Err(PcOptError::MeshIndex(mesh_index));
    }
    let target = &mesh[mesh_index];
    let mut engine = Engine::new(scenario.dim, scenario.seed);
    let verifier_ids: Vec<PartyId> = (0..scenario.k())
        .map(|i| {
            engine.add_party(
                scenario.verifiers[i].clone(),
                Box::new(OptVerifier::new(scenario.clone(), i)),
            )
        })
        .collect();
    engine.add_party(
        target.point.pos.clone(),
        Box::new(OptProver::new(scenario.clone(), target.clone())),
    );
    let t_start_fix = Fix::from_rational(&scenario.schedule.t_start);
    let delta_fix_times = |j: u64| Fix::from_rational(&scenario.schedule.tick_time(j));
    // Tick grid drives verifier broadcasts; each tick time is converted from
    // the rational grid independently so party expectations match exactly.
    for j in 0..scenario.schedule.ticks {
        let t = delta_fix_times(j);
        engine.set_ticks(crate::sim::TickConfig { start: t, delta: Fix::from_int(1), count: 1 });
        let _ = t;
    }
    engine.set_profile_grid(ProfileGrid {
        start: t_start_fix,
        delta: Fix::from_rational(&scenario.schedule.delta),
    });
    // pp broadcast from the coordinator at t_init.
    let pp = scenario.pp();
    engine
        .schedule_send(
            verifier_ids[0],
            Signal::classical(
                Fix::from_rational(&scenario.t_init()),
                Mode::Broadcast,
                crate::crypto::cipher::bits_to_bytes(&pp.to_bits()),
                Some("pp".to_string()),
            ),
        )
        .expect("pp broadcast valid");
    engine.run_to_quiescence();

    let mut entries = Vec::new();
    for slot in 0..scenario.schedule.ticks as u32 {
        for (i, vid) in verifier_ids.iter().enumerate() {
            let v = &engine.behavior::<OptVerifier>(*vid).inner;
            if let Some((t, bytes)) = v.entries.get(&(slot, 0)) {
                if let Some(ct) = crate::pc::ct_from_bytes(bytes) {
                    entries.push(TranscriptEntry {
                        receiver: i as u16,
                        timestamp: *t,
                        alpha: slot,
                        round: 0,
                        ct,
                    });
                }
            }
        }
    }
    entries.sort_by_key(|e| (e.alpha, e.receiver, e.round));
    let c_bits = {
        let v0 = &engine.behavior::<OptVerifier>(verifier_ids[0]).inner;
        match &v0.com_received {
            Some((_, bytes)) => crate::crypto::cipher::bytes_to_bits(
                bytes,
                3 * scenario.lambda_com * scenario.kappa,
            ),
            None => Vec::new(),
        }
    };
    let prover_id = (verifier_ids.len()) as PartyId;
    let opening = engine.behavior::<OptProver>(prover_id).opening();
    let rho = CommitmentState { pp, c: c_bits, entries, seed: scenario.seed };
    Ok(PcOptRun { rho, opening, engine, verifier_ids, mesh_index })
}

/// Reveal for the optimized scheme: the accept set ranges over mesh points;
/// a mesh point verifies iff its slot decrypts to the XOR fold of its
/// coinciding challenge set at every verifier with exact slot timing.
pub fn reveal_optimized(
    scenario: &PcOptScenario,
    mesh: &[MeshPoint],
    rho: &CommitmentState,
    claimed: usize,
    opening: &Opening,
) -> RevealOutcome {
    if claimed >= mesh.len() {
        return RevealOutcome { accept: false, accept_set: Vec::new() };
    }
    match com(&rho.pp, &opening.msg, &opening.rand) {
        Ok(c) if c == rho.c => {}
        _ => return RevealOutcome { accept: false, accept_set: Vec::new() },
    }
    let sk = SecretKey(opening.msg.clone());
    let mut accept_set = Vec::new();
    for (mi, m) in mesh.iter().enumerate() {
        let slot = m.label;
        let expect = scenario.expected_response(m);
        let ok = (0..scenario.k()).all(|i| {
            let Some(e) = rho
                .entries
                .iter()
                .find(|e| e.alpha == slot as u32 && e.receiver == i as u16)
            else {
                return false;
            };
            if e.timestamp != scenario.slot_time_fix(slot) {
                return false;
            }
            if e.ct.index != scenario.entry_index(slot, i) {
                return false;
            }
            match dec(&sk, &e.ct) {
                Some(payload) => payload[..scenario.n] == expect[..],
                None => false,
            }
        });
        if ok {
            accept_set.push(mi as u32);
        }
    }
    let accept = accept_set == vec![claimed as u32];
    RevealOutcome { accept, accept_set }
}

/// Primitive-operation profile bucketed on the tick grid, derived from the
/// event log: each send counts once; entry-labeled sends count an encryption
/// plus its keystream blocks; challenge sends count their PRG draw.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ProfileRow {
    pub tick: i64,
    pub party: u16,
    pub sends: u64,
    pub enc: u64,
    pub prg: u64,
}

impl ProfileRow {
    pub fn ops(&self) -> u64 {
        self.sends + self.enc + self.prg
    }
}

#[derive(Debug, Clone)]
pub struct WorkProfile {
    pub rows: Vec<ProfileRow>,
}

impl WorkProfile {
    pub fn max_ops_per_tick(&self) -> u64 {
        self.rows.iter().map(ProfileRow::ops).max().unwrap_or(0)
    }

    pub fn max_ops_for_party(&self, party: u16) -> u64 {
        self.rows
            .iter()
            .filter(|r| r.party == party)
            .map(ProfileRow::ops)
            .max()
            .unwrap_or(0)
    }

    /// CSV in the documented {tick, party, ops} format.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tick,party,ops\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.tick, r.party, r.ops()));
        }
        out
    }
}

/// Builds the per-tick profile from engine records. `payload_bits` sizes the
/// keystream blocks of entry sends; `n` sizes challenge draws.
pub fn per_tick_work_profile(
    records: &[EventRecord],
    grid: ProfileGrid,
    payload_bits: usize,
    n: usize,
) -> WorkProfile {
    use std::collections::BTreeMap;
    let mut acc: BTreeMap<(i64, u16), (u64, u64, u64)> = BTreeMap::new();
    for rec in records {
        if rec.kind != EventKind::Send {
            continue;
        }
        let bucket = (rec.time.raw() - grid.start.raw()).div_euclid(grid.delta.raw()) as i64;
        let e = acc.entry((bucket, rec.party)).or_default();
        e.0 += 1;
        match rec.label.as_deref().and_then(|l| l.chars().next()) {
            Some('e') => {
                e.1 += 1;
                e.2 += crate::crypto::enc::enc_prg_blocks(payload_bits);
            }
            Some('c') | Some('x') => {
                e.2 += (n as u64).div_ceil(64).max(1);
            }
            _ => {}
        }
    }
    WorkProfile {
        rows: acc
            .into_iter()
            .map(|((tick, party), (sends, enc, prg))| ProfileRow { tick, party, sends, enc, prg })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rat_frac, rat_int};
    use crate::sim::rats;

    fn scenario_1d(ticks: u64, seed: u64) -> PcOptScenario {
        PcOptScenario {
            dim: 1,
            verifiers: vec![rats(&[0]), rats(&[6])],
            schedule: TickSchedule { t_start: rat_int(0), delta: rat_int(1), ticks },
            n: 32,
            kappa: 16,
            lambda_com: 8,
            seed,
        }
    }

    /// Independent oracle: solve the 1-D crossing equations exhaustively on
    /// an explicit half-integer grid and count solutions.
    fn oracle_mesh_count_1d(x1: i64, x2: i64, ticks: i64) -> usize {
        let mut count = 0;
        // L must satisfy 2L = x1 + x2 + (b - a) for integer delta = 1.
        for a in 0..ticks {
            for b in 0..ticks {
                let two_l = x1 + x2 + (b - a);
                if two_l >= 2 * x1 && two_l <= 2 * x2 {
                    count += 1;
                }
            }
        }
        // Distinct (L, t): every (a, b) pair gives a distinct t = a + L - x1
        // for fixed L, and distinct pairs give distinct (L, t).
        count
    }

    #[test]
    fn mesh_1d_matches_crossing_oracle() {
        let sc = scenario_1d(10, 1);
        let mesh = mesh_points(&sc).unwrap();
        assert_eq!(mesh.len(), oracle_mesh_count_1d(0, 6, 10));
        // Spot-check the classic crossings: integer and half-integer points.
        let has = |l_num: i64, l_den: i64| {
            mesh.iter().any(|m| m.point.pos[0] == rat_frac(l_num, l_den))
        };
        assert!(has(3, 1));
        assert!(has(2, 1));
        assert!(has(4, 1));
        assert!(has(5, 2));
    }

    #[test]
    fn mesh_density_doubles_when_delta_halves() {
        let sc1 = scenario_1d(10, 1);
        let mut sc2 = scenario_1d(20, 1);
        sc2.schedule.delta = rat_frac(1, 2); // same window, twice the ticks
        let m1 = mesh_points(&sc1).unwrap().len();
        let m2 = mesh_points(&sc2).unwrap().len();
        assert!(m2 >= 2 * m1, "m1 {m1}, m2 {m2}");
    }

    #[test]
    fn every_mesh_point_is_in_the_hull() {
        let sc = scenario_1d(8, 1);
        for m in mesh_points(&sc).unwrap() {
            assert!(in_convex_hull(&m.point.pos, &sc.verifiers).unwrap());
        }
    }

    #[test]
    fn mesh_coverage_within_half_delta_1d() {
        // Every hull point has a mesh point within delta/2 spatially.
        let sc = scenario_1d(16, 1);
        let mesh = mesh_points(&sc).unwrap();
        for num in 0..=60 {
            let probe = rat_frac(num, 10);
            let min_gap = mesh
                .iter()
                .map(|m| {
                    let d = &m.point.pos[0] - &probe;
                    if num::Signed::is_negative(&d) {
                        -d
                    } else {
                        d
                    }
                })
                .min()
                .unwrap();
            assert!(min_gap <= rat_frac(1, 2), "probe {num}/10 gap {min_gap}");
        }
    }

    #[test]
    fn degenerate_placement_is_rejected() {
        let mut sc = scenario_1d(4, 1);
        sc.verifiers = vec![rats(&[2]), rats(&[2])];
        assert!(matches!(mesh_points(&sc), Err(PcOptError::DegeneratePlacement)));
    }

    #[test]
    fn mesh_2d_points_coincide_within_tolerance() {
        let sc = PcOptScenario {
            dim: 2,
            verifiers: vec![rats(&[0, 0]), rats(&[6, 0]), rats(&[0, 6])],
            schedule: TickSchedule { t_start: rat_int(0), delta: rat_int(1), ticks: 4 },
            n: 16,
            kappa: 16,
            lambda_com: 8,
            seed: 3,
        };
        let mesh = mesh_points(&sc).unwrap();
        assert!(!mesh.is_empty());
        let tol = delta_mesh();
        for m in &mesh {
            assert!(in_convex_hull(&m.point.pos, &sc.verifiers).unwrap());
            let t_fix = m.point.time_fix();
            for (i, &tick) in m.send_ticks.iter().enumerate() {
                let d = distance(&m.point.pos, &sc.verifiers[i]).unwrap().value;
                let lag = t_fix - Fix::from_rational(&sc.schedule.tick_time(tick));
                let resid = if d > lag { d - lag } else { lag - d };
                assert!(resid <= tol);
            }
        }
    }

    #[test]
    fn optimized_commit_reveal_round_trip() {
        let sc = scenario_1d(6, 9);
        let mesh = mesh_points(&sc).unwrap();
        // An interior mesh point with a mid-window label.
        let idx = mesh
            .iter()
            .position(|m| m.point.pos[0] == rat_int(3) && m.label >= 2)
            .expect("midpoint mesh point");
        let run = run_optimized_commit(&sc, &mesh, idx).unwrap();
        let opening = run.opening.clone().unwrap();
        let out = reveal_optimized(&sc, &mesh, &run.rho, idx, &opening);
        assert!(out.accept, "accept set {:?}", out.accept_set);
        // Reveal at a different mesh point rejects.
        let other = (idx + 1) % mesh.len();
        assert!(!reveal_optimized(&sc, &mesh, &run.rho, other, &opening).accept);
    }

    #[test]
    fn lockstep_one_message_per_verifier_per_slot() {
        let sc = scenario_1d(6, 10);
        let mesh = mesh_points(&sc).unwrap();
        let run = run_optimized_commit(&sc, &mesh, 0).unwrap();
        for i in 0..sc.k() as u16 {
            for slot in 0..sc.schedule.ticks {
                let hits = run
                    .rho
                    .entries
                    .iter()
                    .filter(|e| e.receiver == i && e.alpha == slot as u32)
                    .count();
                assert_eq!(hits, 1, "verifier {i} slot {slot}");
                let e = run
                    .rho
                    .entries
                    .iter()
                    .find(|e| e.receiver == i && e.alpha == slot as u32)
                    .unwrap();
                assert_eq!(e.timestamp, sc.slot_time_fix(slot));
            }
        }
    }

    #[test]
    fn verifier_view_shape_is_mesh_point_invariant() {
        let sc = scenario_1d(6, 11);
        let mesh = mesh_points(&sc).unwrap();
        let shape = |idx: usize| -> Vec<(u16, Fix, u32, usize)> {
            let run = run_optimized_commit(&sc, &mesh, idx).unwrap();
            run.rho
                .entries
                .iter()
                .map(|e| (e.receiver, e.timestamp, e.alpha, e.ct.body.len()))
                .collect()
        };
        let a = shape(0);
        let b = shape(mesh.len() / 2);
        let c = shape(mesh.len() - 1);
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn per_tick_work_is_constant_as_window_grows() {
        let small = scenario_1d(8, 12);
        let big = scenario_1d(32, 12);
        let run_profile = |sc: &PcOptScenario| {
            let mesh = mesh_points(sc).unwrap();
            let run = run_optimized_commit(sc, &mesh, 0).unwrap();
            let grid = ProfileGrid {
                start: Fix::from_rational(&sc.schedule.t_start),
                delta: Fix::from_rational(&sc.schedule.delta),
            };
            (mesh.len(), per_tick_work_profile(run.engine.records(), grid, sc.n, sc.n))
        };
        let (m_small, p_small) = run_profile(&small);
        let (m_big, p_big) = run_profile(&big);
        assert!(m_big >= 3 * m_small, "mesh sizes {m_small} vs {m_big}");
        assert_eq!(
            p_small.max_ops_per_tick(),
            p_big.max_ops_per_tick(),
            "per-tick work must not grow with the mesh"
        );
    }

    #[test]
    fn csv_profile_has_documented_columns() {
        let sc = scenario_1d(4, 13);
        let mesh = mesh_points(&sc).unwrap();
        let run = run_optimized_commit(&sc, &mesh, 0).unwrap();
        let grid = ProfileGrid {
            start: Fix::from_rational(&sc.schedule.t_start),
            delta: Fix::from_rational(&sc.schedule.delta),
        };
        let profile = per_tick_work_profile(run.engine.records(), grid, sc.n, sc.n);
        let csv = profile.to_csv();
        assert!(csv.starts_with("tick,party,ops\n"));
        assert!(csv.lines().count() > 1);
    }
}

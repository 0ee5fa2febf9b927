//! Deterministic discrete-event spacetime simulator.
//!
//! Parties are static spatial points exchanging directional and broadcast
//! signals at one unit of space per unit time. Directional signals are
//! point-targeted: they deliver to parties located exactly at the target.
//! Parties registered as interceptors additionally receive signals whose ray
//! passes through their position, which is how spoofing coalitions tap
//! challenge traffic; a quantum payload is absorbed by the first party on
//! the ray. Event processing order is a total order on
//! (time, send<deliver<tick, sender, sequence, receiver), so equal seeds and
//! configs replay to byte-identical logs.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fixed::Fix;
use crate::geometry::{distance, Rat, SpatialPoint};
use crate::qsim::{QubitArena, QubitHandle};
use crate::rng::{domain, SeedStream};

pub type PartyId = u16;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("signal scheduled into the past (send {send} < now {now})")]
    SendIntoPast { send: Fix, now: Fix },
    #[error("broadcast signals cannot carry quantum payloads")]
    QuantumBroadcast,
    #[error("directional target equals the origin")]
    DegenerateDirection,
    #[error("dimension mismatch in signal target")]
    DimensionMismatch,
    #[error("unknown party {0}")]
    UnknownParty(PartyId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mode {
    Directional { target: SpatialPoint },
    Broadcast,
}

impl Mode {
    pub fn tag(&self) -> &'static str {
        match self {
            Mode::Directional { .. } => "directional",
            Mode::Broadcast => "broadcast",
        }
    }
}

/// A timed classical-or-quantum message.
#[derive(Debug)]
pub struct Signal {
    pub send_time: Fix,
    pub mode: Mode,
    pub payload: Vec<u8>,
    pub qubits: Vec<QubitHandle>,
    pub label: Option<String>,
}

impl Signal {
    pub fn classical(send_time: Fix, mode: Mode, payload: Vec<u8>, label: Option<String>) -> Self {
        Signal { send_time, mode, payload, qubits: Vec::new(), label }
    }
}

/// A signal as seen by its receiver.
#[derive(Debug)]
pub struct Delivery {
    pub time: Fix,
    pub sender: PartyId,
    pub origin: SpatialPoint,
    pub mode: Mode,
    pub payload: Vec<u8>,
    pub qubits: Vec<QubitHandle>,
    pub label: Option<String>,
}

/// Per-party callback surface. Implementations return signals to schedule,
/// possibly with future send times.
pub trait PartyBehavior {
    fn on_deliver(&mut self, ctx: &mut PartyCtx<'_>, delivery: &Delivery) -> Vec<Signal>;
    fn on_tick(&mut self, _ctx: &mut PartyCtx<'_>, _t: Fix) -> Vec<Signal> {
        Vec::new()
    }
    fn as_any(&self) -> &dyn std::any::Any;
}

/// Execution context handed to party callbacks.
pub struct PartyCtx<'a> {
    pub id: PartyId,
    pub now: Fix,
    pub position: &'a [Rat],
    pub arena: &'a mut QubitArena,
    pub rng: &'a mut SeedStream,
    ops: &'a mut OpsSink,
}

impl PartyCtx<'_> {
    pub fn count_enc(&mut self, n: u64) {
        self.ops.enc += n;
    }
    pub fn count_prg_blocks(&mut self, n: u64) {
        self.ops.prg += n;
    }
}

#[derive(Default, Clone, Copy, Debug, PartialEq, Eq)]
pub struct OpCounts {
    pub enc: u64,
    pub prg: u64,
    pub sends: u64,
}

impl OpCounts {
    pub fn total(&self) -> u64 {
        self.enc + self.prg + self.sends
    }
}

#[derive(Default)]
struct OpsSink {
    enc: u64,
    prg: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Send,
    Deliver,
    Tick,
}

impl EventKind {
    pub fn tag(&self) -> &'static str {
        match self {
            EventKind::Send => "send",
            EventKind::Deliver => "deliver",
            EventKind::Tick => "tick",
        }
    }
}

/// Internal event record; richer than the NDJSON projection.
#[derive(Debug, Clone)]
pub struct EventRecord {
    pub seq: u64,
    pub time: Fix,
    pub kind: EventKind,
    /// Sender for sends, receiver for deliveries, the ticked party for ticks.
    pub party: PartyId,
    pub mode: Option<&'static str>,
    pub label: Option<String>,
    pub payload: Vec<u8>,
    /// Originating party and per-sender sequence for deliveries.
    pub source: Option<(PartyId, u64)>,
}

/// One NDJSON log line.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct LogLine {
    pub seq: u64,
    pub time: String,
    pub kind: String,
    pub party: u16,
    pub mode: Option<String>,
    pub label: Option<String>,
    pub payload_hex: String,
    pub payload_len: usize,
}

impl EventRecord {
    pub fn to_log_line(&self) -> LogLine {
        LogLine {
            seq: self.seq,
            time: self.time.to_decimal_string(),
            kind: self.kind.tag().to_string(),
            party: self.party,
            mode: self.mode.map(str::to_string),
            label: self.label.clone(),
            payload_hex: hex_encode(&self.payload),
            payload_len: self.payload.len(),
        }
    }
}

pub fn hex_encode(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

#[derive(PartialEq, Eq, PartialOrd, Ord, Debug, Clone, Copy)]
struct EventKey {
    time: Fix,
    class: u8, // 0 send, 1 deliver, 2 tick
    actor: PartyId,
    seq: u64,
    receiver: PartyId,
}

enum QueuedEvent {
    Send { sender: PartyId, signal: Signal },
    Deliver { receiver: PartyId, delivery: Delivery },
    Tick,
}

/// Uniform tick grid handed to party `on_tick` callbacks.
#[derive(Debug, Clone)]
pub struct TickConfig {
    pub start: Fix,
    pub delta: Fix,
    pub count: u64,
}

/// Grid used to bucket op counts for per-tick work profiling.
#[derive(Debug, Clone, Copy)]
pub struct ProfileGrid {
    pub start: Fix,
    pub delta: Fix,
}

impl ProfileGrid {
    fn bucket(&self, t: Fix) -> i64 {
        let num = t.raw() - self.start.raw();
        num.div_euclid(self.delta.raw()) as i64
    }
}

pub struct Engine {
    dim: usize,
    positions: Vec<SpatialPoint>,
    interceptors: Vec<bool>,
    behaviors: Vec<Option<Box<dyn PartyBehavior>>>,
    pub arena: QubitArena,
    rngs: Vec<SeedStream>,
    queue: BTreeMap<EventKey, QueuedEvent>,
    now: Fix,
    started: bool,
    send_seq: Vec<u64>,
    records: Vec<EventRecord>,
    dist_cache: HashMap<(PartyId, PartyId), Fix>,
    profile: Option<ProfileGrid>,
    counters: BTreeMap<(PartyId, i64), OpCounts>,
    seed: u64,
}

impl Engine {
    pub fn new(dim: usize, seed: u64) -> Engine {
        Engine {
            dim,
            positions: Vec::new(),
            interceptors: Vec::new(),
            behaviors: Vec::new(),
            arena: QubitArena::new(),
            rngs: Vec::new(),
            queue: BTreeMap::new(),
            now: Fix::from_raw(i128::MIN / 4),
            started: false,
            send_seq: Vec::new(),
            records: Vec::new(),
            dist_cache: HashMap::new(),
            profile: None,
            counters: BTreeMap::new(),
            seed,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn add_party(&mut self, pos: SpatialPoint, behavior: Box<dyn PartyBehavior>) -> PartyId {
        self.add_party_with_flags(pos, behavior, false)
    }

    pub fn add_interceptor(
        &mut self,
        pos: SpatialPoint,
        behavior: Box<dyn PartyBehavior>,
    ) -> PartyId {
        self.add_party_with_flags(pos, behavior, true)
    }

    fn add_party_with_flags(
        &mut self,
        pos: SpatialPoint,
        behavior: Box<dyn PartyBehavior>,
        interceptor: bool,
    ) -> PartyId {
        assert_eq!(pos.len(), self.dim, "party position dimension");
        let id = self.positions.len() as PartyId;
        self.positions.push(pos);
        self.interceptors.push(interceptor);
        self.behaviors.push(Some(behavior));
        self.rngs
            .push(SeedStream::derive(self.seed, domain::MEASUREMENT, id as u64));
        self.send_seq.push(0);
        id
    }

    pub fn position(&self, id: PartyId) -> &SpatialPoint {
        &self.positions[id as usize]
    }

    pub fn n_parties(&self) -> usize {
        self.positions.len()
    }

    pub fn set_ticks(&mut self, cfg: TickConfig) {
        for j in 0..cfg.count {
            let raw = cfg
                .start
                .raw()
                .checked_add(cfg.delta.raw().checked_mul(j as i128).expect("tick grid overflow"))
                .expect("tick grid overflow");
            self.queue.insert(
                EventKey { time: Fix::from_raw(raw), class: 2, actor: 0, seq: j, receiver: 0 },
                QueuedEvent::Tick,
            );
        }
    }

    pub fn set_profile_grid(&mut self, grid: ProfileGrid) {
        self.profile = Some(grid);
    }

    pub fn op_counts(&self) -> &BTreeMap<(PartyId, i64), OpCounts> {
        &self.counters
    }

    pub fn records(&self) -> &[EventRecord] {
        &self.records
    }

    pub fn ndjson(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(&r.to_log_line()).expect("log serializes"));
            out.push('\n');
        }
        out
    }

    pub fn behavior<T: 'static>(&self, id: PartyId) -> &T {
        self.behaviors[id as usize]
            .as_ref()
            .expect("behavior present")
            .as_any()
            .downcast_ref::<T>()
            .expect("behavior type")
    }

    fn dist(&mut self, a: PartyId, b: PartyId) -> Fix {
        if let Some(&d) = self.dist_cache.get(&(a, b)) {
            return d;
        }
        let d = distance(&self.positions[a as usize], &self.positions[b as usize])
            .expect("party dimensions agree")
            .value;
        self.dist_cache.insert((a, b), d);
        self.dist_cache.insert((b, a), d);
        d
    }

    fn count_send(&mut self, party: PartyId, time: Fix) {
        if let Some(grid) = self.profile {
            let b = grid.bucket(time);
            self.counters.entry((party, b)).or_default().sends += 1;
        } else {
            self.counters.entry((party, 0)).or_default().sends += 1;
        }
    }

    fn absorb_ops(&mut self, party: PartyId, time: Fix, ops: OpsSink) {
        if ops.enc == 0 && ops.prg == 0 {
            return;
        }
        let b = self.profile.map(|g| g.bucket(time)).unwrap_or(0);
        let e = self.counters.entry((party, b)).or_default();
        e.enc += ops.enc;
        e.prg += ops.prg;
    }

    /// Enqueues a signal for sending. The origin is the sending party's
    /// position by construction.
    pub fn schedule_send(&mut self, sender: PartyId, signal: Signal) -> Result<(), SimError> {
        if sender as usize >= self.positions.len() {
            return Err(SimError::UnknownParty(sender));
        }
        if self.started && signal.send_time < self.now {
            return Err(SimError::SendIntoPast { send: signal.send_time, now: self.now });
        }
        match &signal.mode {
            Mode::Broadcast => {
                if !signal.qubits.is_empty() {
                    return Err(SimError::QuantumBroadcast);
                }
            }
            Mode::Directional { target } => {
                if target.len() != self.dim {
                    return Err(SimError::DimensionMismatch);
                }
                if target == &self.positions[sender as usize] {
                    return Err(SimError::DegenerateDirection);
                }
            }
        }
        let seq = self.send_seq[sender as usize];
        self.send_seq[sender as usize] += 1;
        self.queue.insert(
            EventKey { time: signal.send_time, class: 0, actor: sender, seq, receiver: 0 },
            QueuedEvent::Send { sender, signal },
        );
        Ok(())
    }

    /// Positive ray parameter `s` with `p = origin + s*(target - origin)`,
    /// if `p` lies on the open ray from the origin through the target.
    fn ray_parameter(origin: &[Rat], target: &[Rat], p: &[Rat]) -> Option<Rat> {
        let pivot = (0..origin.len()).find(|&i| origin[i] != target[i])?;
        let denom = &target[pivot] - &origin[pivot];
        let s = (&p[pivot] - &origin[pivot]) / denom;
        if !num::Signed::is_positive(&s) {
            return None;
        }
        for i in 0..origin.len() {
            let expect = &origin[i] + &(&s * &(&target[i] - &origin[i]));
            if expect != p[i] {
                return None;
            }
        }
        Some(s)
    }

    fn process_send(&mut self, sender: PartyId, signal: Signal, seq: u64) {
        self.records.push(EventRecord {
            seq: self.records.len() as u64,
            time: signal.send_time,
            kind: EventKind::Send,
            party: sender,
            mode: Some(signal.mode.tag()),
            label: signal.label.clone(),
            payload: signal.payload.clone(),
            source: None,
        });
        self.count_send(sender, signal.send_time);

        // Work out the receiving parties.
        let mut receivers: Vec<PartyId> = Vec::new();
        match &signal.mode {
            Mode::Broadcast => {
                receivers.extend(0..self.positions.len() as PartyId);
            }
            Mode::Directional { target } => {
                let origin = self.positions[sender as usize].clone();
                for p in 0..self.positions.len() as PartyId {
                    let pos = &self.positions[p as usize];
                    if pos == target {
                        receivers.push(p);
                    } else if self.interceptors[p as usize]
                        && Self::ray_parameter(&origin, target, pos).is_some()
                    {
                        receivers.push(p);
                    }
                }
            }
        }
        let arrivals: Vec<(PartyId, Fix)> = receivers
            .iter()
            .map(|&p| (p, signal.send_time + self.dist(sender, p)))
            .collect();
        // A quantum payload is absorbed by the earliest receiver on the path.
        let qubit_receiver = arrivals
            .iter()
            .min_by_key(|(p, t)| (*t, *p))
            .map(|(p, _)| *p);
        if arrivals.is_empty() {
            // Lost in transit: consume any quantum payload.
            let mut rng = SeedStream::derive(self.seed, domain::MEASUREMENT, u64::MAX);
            for q in &signal.qubits {
                self.arena.discard(*q, &mut rng);
            }
        }
        let origin = self.positions[sender as usize].clone();
        for (p, arrival) in arrivals {
            let qubits = if Some(p) == qubit_receiver { signal.qubits.clone() } else { Vec::new() };
            self.queue.insert(
                EventKey { time: arrival, class: 1, actor: sender, seq, receiver: p },
                QueuedEvent::Deliver {
                    receiver: p,
                    delivery: Delivery {
                        time: arrival,
                        sender,
                        origin: origin.clone(),
                        mode: signal.mode.clone(),
                        payload: signal.payload.clone(),
                        qubits,
                        label: signal.label.clone(),
                    },
                },
            );
        }
    }

    fn call_deliver(&mut self, receiver: PartyId, delivery: Delivery, source_seq: u64) {
        self.records.push(EventRecord {
            seq: self.records.len() as u64,
            time: delivery.time,
            kind: EventKind::Deliver,
            party: receiver,
            mode: Some(delivery.mode.tag()),
            label: delivery.label.clone(),
            payload: delivery.payload.clone(),
            source: Some((delivery.sender, source_seq)),
        });
        let mut behavior = self.behaviors[receiver as usize].take().expect("no reentrancy");
        let mut ops = OpsSink::default();
        let out = {
            let mut ctx = PartyCtx {
                id: receiver,
                now: delivery.time,
                position: &self.positions[receiver as usize],
                arena: &mut self.arena,
                rng: &mut self.rngs[receiver as usize],
                ops: &mut ops,
            };
            behavior.on_deliver(&mut ctx, &delivery)
        };
        self.behaviors[receiver as usize] = Some(behavior);
        self.absorb_ops(receiver, delivery.time, ops);
        for s in out {
            self.schedule_send(receiver, s).expect("party emitted invalid signal");
        }
    }

    fn call_tick(&mut self, t: Fix) {
        for id in 0..self.positions.len() as PartyId {
            self.records.push(EventRecord {
                seq: self.records.len() as u64,
                time: t,
                kind: EventKind::Tick,
                party: id,
                mode: None,
                label: None,
                payload: Vec::new(),
                source: None,
            });
            let mut behavior = self.behaviors[id as usize].take().expect("no reentrancy");
            let mut ops = OpsSink::default();
            let out = {
                let mut ctx = PartyCtx {
                    id,
                    now: t,
                    position: &self.positions[id as usize],
                    arena: &mut self.arena,
                    rng: &mut self.rngs[id as usize],
                    ops: &mut ops,
                };
                behavior.on_tick(&mut ctx, t)
            };
            self.behaviors[id as usize] = Some(behavior);
            self.absorb_ops(id, t, ops);
            for s in out {
                self.schedule_send(id, s).expect("party emitted invalid signal");
            }
        }
    }

    /// Processes all events with time <= `t_end` in deterministic order.
    pub fn run_until(&mut self, t_end: Fix) {
        while let Some((&key, _)) = self.queue.iter().next() {
            if key.time > t_end {
                break;
            }
            let (key, ev) = self.queue.pop_first().expect("peeked");
            self.now = key.time;
            self.started = true;
            match ev {
                QueuedEvent::Send { sender, signal } => self.process_send(sender, signal, key.seq),
                QueuedEvent::Deliver { receiver, delivery } => {
                    self.call_deliver(receiver, delivery, key.seq)
                }
                QueuedEvent::Tick => self.call_tick(key.time),
            }
        }
        self.now = t_end;
        self.started = true;
    }

    /// Latest queued event time, if any.
    pub fn horizon(&self) -> Option<Fix> {
        self.queue.keys().next_back().map(|k| k.time)
    }

    /// Runs until the event queue drains completely.
    pub fn run_to_quiescence(&mut self) {
        while let Some(t) = self.horizon() {
            self.run_until(t);
        }
    }
}

/// Causality audit over NDJSON lines: every delivery must match some send in
/// (mode, label, payload) at exactly send time plus travel time, under the
/// shared fixed-point routine.
pub fn audit_causality(lines: &[LogLine], positions: &[SpatialPoint]) -> Result<(), String> {
    let parse_time = |s: &str| -> Fix {
        let r = crate::geometry::rat_parse(s).expect("decimal time parses");
        Fix::from_rational(&r)
    };
    let sends: Vec<&LogLine> = lines.iter().filter(|l| l.kind == "send").collect();
    for d in lines.iter().filter(|l| l.kind == "deliver") {
        let dt = parse_time(&d.time);
        let ok = sends.iter().any(|s| {
            if s.mode != d.mode || s.label != d.label || s.payload_hex != d.payload_hex {
                return false;
            }
            let st = parse_time(&s.time);
            if st > dt {
                return false;
            }
            let hop = distance(&positions[s.party as usize], &positions[d.party as usize])
                .expect("positions well-formed")
                .value;
            st + hop == dt
        });
        if !ok {
            return Err(format!("delivery seq {} has no matching send", d.seq));
        }
    }
    Ok(())
}

/// Convenience: origin-time pair for simple scenario seeding.
pub fn rats(coords: &[i64]) -> SpatialPoint {
    coords.iter().map(|&c| Rat::from_integer(c.into())).collect()
}

/// A behavior that only records what it receives.
#[derive(Default)]
pub struct RecorderParty {
    pub deliveries: Vec<(Fix, Option<String>, Vec<u8>)>,
    pub qubit_count: usize,
}

impl PartyBehavior for RecorderParty {
    fn on_deliver(&mut self, _ctx: &mut PartyCtx<'_>, d: &Delivery) -> Vec<Signal> {
        self.deliveries.push((d.time, d.label.clone(), d.payload.clone()));
        self.qubit_count += d.qubits.len();
        Vec::new()
    }
    fn as_any(&self) -> &dyn std::any::Any {
        self
    }
}

/// A behavior with a fixed send schedule and no reactions.
pub struct ScriptedParty {
    pub script: Vec<Signal>,
}

impl PartyBehavior for ScriptedParty {
    fn on_deliver(&mut self, _ctx: &mut PartyCtx<'_>, _d: &Delivery) -> Vec<Signal> {
        Vec::new()
    }
    fn as_any(&self) -> &dyn std::any::Any {
        self
    }
}

/// Seeds every signal in a scripted party's plan. Call before `run_until`.
pub fn seed_script(engine: &mut Engine, id: PartyId, script: Vec<Signal>) -> Result<(), SimError> {
    for s in script {
        engine.schedule_send(id, s)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig_b(t: i64, payload: &[u8]) -> Signal {
        Signal::classical(Fix::from_int(t), Mode::Broadcast, payload.to_vec(), None)
    }

    fn sig_d(t: i64, target: &[i64], payload: &[u8]) -> Signal {
        Signal::classical(
            Fix::from_int(t),
            Mode::Directional { target: rats(target) },
            payload.to_vec(),
            None,
        )
    }

    #[test]
    fn broadcast_reaches_all_parties_at_light_speed() {
        let mut e = Engine::new(1, 7);
        let a = e.add_party(rats(&[0]), Box::new(RecorderParty::default()));
        let b = e.add_party(rats(&[6]), Box::new(RecorderParty::default()));
        e.schedule_send(a, sig_b(0, b"hi")).unwrap();
        e.run_until(Fix::from_int(10));
        let ra = e.behavior::<RecorderParty>(a);
        let rb = e.behavior::<RecorderParty>(b);
        assert_eq!(ra.deliveries.len(), 1);
        assert_eq!(ra.deliveries[0].0, Fix::from_int(0));
        assert_eq!(rb.deliveries.len(), 1);
        assert_eq!(rb.deliveries[0].0, Fix::from_int(6));
    }

    #[test]
    fn directional_only_hits_exact_target() {
        let mut e = Engine::new(1, 7);
        let a = e.add_party(rats(&[0]), Box::new(RecorderParty::default()));
        let off = e.add_party(rats(&[4]), Box::new(RecorderParty::default()));
        let on = e.add_party(rats(&[3]), Box::new(RecorderParty::default()));
        e.schedule_send(a, sig_d(1, &[3], b"x")).unwrap();
        e.run_until(Fix::from_int(10));
        assert!(e.behavior::<RecorderParty>(off).deliveries.is_empty());
        let hits = &e.behavior::<RecorderParty>(on).deliveries;
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].0, Fix::from_int(4));
        let _ = a;
    }

    #[test]
    fn interceptor_taps_directional_signals_on_the_ray() {
        let mut e = Engine::new(1, 7);
        let a = e.add_party(rats(&[0]), Box::new(RecorderParty::default()));
        let tap = e.add_interceptor(rats(&[1]), Box::new(RecorderParty::default()));
        let beyond = e.add_interceptor(rats(&[5]), Box::new(RecorderParty::default()));
        let behind = e.add_interceptor(rats(&[-2]), Box::new(RecorderParty::default()));
        e.schedule_send(a, sig_d(0, &[3], b"x")).unwrap();
        e.run_until(Fix::from_int(10));
        assert_eq!(e.behavior::<RecorderParty>(tap).deliveries.len(), 1);
        assert_eq!(e.behavior::<RecorderParty>(tap).deliveries[0].0, Fix::from_int(1));
        // The beam continues past the target point.
        assert_eq!(e.behavior::<RecorderParty>(beyond).deliveries.len(), 1);
        assert_eq!(e.behavior::<RecorderParty>(beyond).deliveries[0].0, Fix::from_int(5));
        // But never backwards.
        assert!(e.behavior::<RecorderParty>(behind).deliveries.is_empty());
    }

    #[test]
    fn quantum_payload_goes_to_first_on_ray() {
        let mut e = Engine::new(1, 7);
        let q = e.arena.prepare_bb84(true, false);
        let a = e.add_party(rats(&[0]), Box::new(RecorderParty::default()));
        let tap = e.add_interceptor(rats(&[1]), Box::new(RecorderParty::default()));
        let target = e.add_party(rats(&[3]), Box::new(RecorderParty::default()));
        let mut s = sig_d(0, &[3], b"");
        s.qubits.push(q);
        e.schedule_send(a, s).unwrap();
        e.run_until(Fix::from_int(10));
        assert_eq!(e.behavior::<RecorderParty>(tap).qubit_count, 1);
        assert_eq!(e.behavior::<RecorderParty>(target).qubit_count, 0);
        // Classical copy still reaches the target point.
        assert_eq!(e.behavior::<RecorderParty>(target).deliveries.len(), 1);
    }

    #[test]
    fn send_into_past_is_rejected() {
        let mut e = Engine::new(1, 7);
        let a = e.add_party(rats(&[0]), Box::new(RecorderParty::default()));
        e.schedule_send(a, sig_b(5, b"ok")).unwrap();
        e.run_until(Fix::from_int(6));
        let err = e.schedule_send(a, sig_b(2, b"late")).unwrap_err();
        assert!(matches!(err, SimError::SendIntoPast { .. }));
    }

    #[test]
    fn broadcast_with_qubits_is_rejected() {
        let mut e = Engine::new(1, 7);
        let q = e.arena.prepare_bb84(false, false);
        let a = e.add_party(rats(&[0]), Box::new(RecorderParty::default()));
        let mut s = sig_b(0, b"");
        s.qubits.push(q);
        assert_eq!(e.schedule_send(a, s).unwrap_err(), SimError::QuantumBroadcast);
    }

    #[test]
    fn empty_scenario_has_empty_log() {
        let mut e = Engine::new(1, 7);
        e.add_party(rats(&[0]), Box::new(RecorderParty::default()));
        e.run_until(Fix::from_int(100));
        assert!(e.records().is_empty());
        assert!(e.ndjson().is_empty());
    }

    #[test]
    fn deterministic_logs_for_equal_seeds() {
        let build_and_run = || {
            let mut e = Engine::new(1, 99);
            let a = e.add_party(rats(&[0]), Box::new(RecorderParty::default()));
            let _b = e.add_party(rats(&[6]), Box::new(RecorderParty::default()));
            let _c = e.add_party(rats(&[2]), Box::new(RecorderParty::default()));
            e.schedule_send(a, sig_b(0, b"one")).unwrap();
            e.schedule_send(a, sig_b(0, b"two")).unwrap();
            e.schedule_send(a, sig_d(1, &[6], b"three")).unwrap();
            e.run_until(Fix::from_int(20));
            e.ndjson()
        };
        assert_eq!(build_and_run(), build_and_run());
    }

    #[test]
    fn tie_break_order_is_time_sender_sequence() {
        let mut e = Engine::new(1, 1);
        let a = e.add_party(rats(&[0]), Box::new(RecorderParty::default()));
        let b = e.add_party(rats(&[1]), Box::new(RecorderParty::default()));
        // Two sends at the same time from different senders.
        e.schedule_send(b, sig_b(3, b"from-b")).unwrap();
        e.schedule_send(a, sig_b(3, b"from-a")).unwrap();
        e.run_until(Fix::from_int(10));
        let sends: Vec<_> = e
            .records()
            .iter()
            .filter(|r| r.kind == EventKind::Send)
            .map(|r| r.payload.clone())
            .collect();
        assert_eq!(sends, vec![b"from-a".to_vec(), b"from-b".to_vec()]);
    }

    #[test]
    fn causality_audit_passes_on_engine_logs() {
        let mut e = Engine::new(2, 7);
        let a = e.add_party(rats(&[0, 0]), Box::new(RecorderParty::default()));
        let _b = e.add_party(rats(&[3, 4]), Box::new(RecorderParty::default()));
        let _c = e.add_party(rats(&[1, 1]), Box::new(RecorderParty::default()));
        e.schedule_send(a, sig_b(2, b"audit-me")).unwrap();
        e.run_until(Fix::from_int(20));
        let lines: Vec<LogLine> = e.records().iter().map(|r| r.to_log_line()).collect();
        let positions: Vec<SpatialPoint> =
            (0..3).map(|i| e.position(i as PartyId).clone()).collect();
        audit_causality(&lines, &positions).unwrap();
    }

    #[test]
    fn tick_callbacks_fire_on_grid() {
        let mut e = Engine::new(1, 7);
        e.add_party(rats(&[0]), Box::new(RecorderParty::default()));
        e.set_ticks(TickConfig {
            start: Fix::from_int(0),
            delta: Fix::from_int(2),
            count: 3,
        });
        e.run_until(Fix::from_int(10));
        let ticks: Vec<Fix> = e
            .records()
            .iter()
            .filter(|r| r.kind == EventKind::Tick)
            .map(|r| r.time)
            .collect();
        assert_eq!(ticks, vec![Fix::from_int(0), Fix::from_int(2), Fix::from_int(4)]);
    }
}

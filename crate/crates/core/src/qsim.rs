//! Minimal state-vector quantum simulator.
//!
//! Qubits live in an arena of small entangled clusters (at most 8 qubits
//! per cluster). Handles are consumed exactly once by measurement and the
//! interface exposes no copy operation, so unclonability holds by
//! construction. Qubit contents are never serialized.

use std::collections::HashMap;

use num_complex::Complex64;
use thiserror::Error;

use crate::rng::SeedStream;

pub const MAX_CLUSTER_QUBITS: usize = 8;
const NORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QsimError {
    #[error("qubit handle already consumed or unknown")]
    Consumed,
    #[error("register budget exceeded ({0} qubits in one cluster)")]
    BudgetExceeded(usize),
    #[error("state norm drifted beyond tolerance")]
    NormDrift,
}

/// Opaque reference to one tensor factor of a cluster state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QubitHandle(u64);

struct Cluster {
    amps: Vec<Complex64>,
    members: Vec<QubitHandle>,
}

impl Cluster {
    fn n(&self) -> usize {
        self.members.len()
    }

    fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }
}

#[derive(Default)]
pub struct QubitArena {
    clusters: Vec<Option<Cluster>>,
    index: HashMap<QubitHandle, usize>,
    next_handle: u64,
    epr_pairs_created: usize,
}

impl QubitArena {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of EPR pairs created so far (entanglement budget accounting).
    pub fn epr_pairs_created(&self) -> usize {
        self.epr_pairs_created
    }

    pub fn is_live(&self, q: QubitHandle) -> bool {
        self.index.contains_key(&q)
    }

    fn fresh_handle(&mut self) -> QubitHandle {
        let h = QubitHandle(self.next_handle);
        self.next_handle += 1;
        h
    }

    fn insert_cluster(&mut self, cluster: Cluster) -> usize {
        for h in &cluster.members {
            debug_assert!(!self.index.contains_key(h));
        }
        let slot = self.clusters.iter().position(Option::is_none).unwrap_or_else(|| {
            self.clusters.push(None);
            self.clusters.len() - 1
        });
        for h in &cluster.members {
            self.index.insert(*h, slot);
        }
        self.clusters[slot] = Some(cluster);
        slot
    }

    fn locate(&self, q: QubitHandle) -> Result<(usize, usize), QsimError> {
        let slot = *self.index.get(&q).ok_or(QsimError::Consumed)?;
        let cluster = self.clusters[slot].as_ref().expect("indexed cluster present");
        let pos = cluster
            .members
            .iter()
            .position(|h| *h == q)
            .expect("handle listed in cluster");
        Ok((slot, pos))
    }

    /// Fresh single qubit in the BB84 state `H^theta |b>`.
    pub fn prepare_bb84(&mut self, b: bool, theta: bool) -> QubitHandle {
        let h = self.fresh_handle();
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let amps = match (b, theta) {
            (false, false) => vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            (true, false) => vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            (false, true) => vec![Complex64::new(inv_sqrt2, 0.0), Complex64::new(inv_sqrt2, 0.0)],
            (true, true) => vec![Complex64::new(inv_sqrt2, 0.0), Complex64::new(-inv_sqrt2, 0.0)],
        };
        self.insert_cluster(Cluster { amps, members: vec![h] });
        h
    }

    /// Fresh pair in the state (|00> + |11>) / sqrt(2).
    pub fn make_epr(&mut self) -> (QubitHandle, QubitHandle) {
        let h1 = self.fresh_handle();
        let h2 = self.fresh_handle();
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![Complex64::new(0.0, 0.0); 4];
        amps[0b00] = Complex64::new(inv_sqrt2, 0.0);
        amps[0b11] = Complex64::new(inv_sqrt2, 0.0);
        self.insert_cluster(Cluster { amps, members: vec![h1, h2] });
        self.epr_pairs_created += 1;
        (h1, h2)
    }

    /// Drops a live qubit (signal lost in transit). Traces it out by
    /// measuring in the computational basis and discarding the outcome.
    pub fn discard(&mut self, q: QubitHandle, rng: &mut SeedStream) {
        let _ = self.measure(q, false, rng);
    }

    fn merge_into_same_cluster(
        &mut self,
        q1: QubitHandle,
        q2: QubitHandle,
    ) -> Result<usize, QsimError> {
        let (s1, _) = self.locate(q1)?;
        let (s2, _) = self.locate(q2)?;
        if s1 == s2 {
            return Ok(s1);
        }
        let a = self.clusters[s1].take().expect("cluster present");
        let b = self.clusters[s2].take().expect("cluster present");
        let n = a.n() + b.n();
        if n > MAX_CLUSTER_QUBITS {
            // Put them back untouched before reporting.
            self.clusters[s1] = Some(a);
            self.clusters[s2] = Some(b);
            return Err(QsimError::BudgetExceeded(n));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        let na = a.n();
        for (ia, va) in a.amps.iter().enumerate() {
            if va.norm_sqr() == 0.0 {
                continue;
            }
            for (ib, vb) in b.amps.iter().enumerate() {
                amps[ia | (ib << na)] = va * vb;
            }
        }
        let mut members = a.members;
        members.extend(b.members);
        for h in &members {
            self.index.remove(h);
        }
        let slot = self.insert_cluster(Cluster { amps, members });
        Ok(slot)
    }

    fn apply_single(&mut self, slot: usize, pos: usize, m: [[Complex64; 2]; 2]) {
        let cluster = self.clusters[slot].as_mut().expect("cluster present");
        let mask = 1usize << pos;
        for idx in 0..cluster.amps.len() {
            if idx & mask == 0 {
                let lo = cluster.amps[idx];
                let hi = cluster.amps[idx | mask];
                cluster.amps[idx] = m[0][0] * lo + m[0][1] * hi;
                cluster.amps[idx | mask] = m[1][0] * lo + m[1][1] * hi;
            }
        }
        debug_assert!((cluster.norm_sq() - 1.0).abs() < NORM_TOLERANCE);
    }

    fn apply_hadamard(&mut self, slot: usize, pos: usize) {
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        self.apply_single(slot, pos, [[s, s], [s, -s]]);
    }

    fn apply_cnot(&mut self, slot: usize, control: usize, target: usize) {
        let cluster = self.clusters[slot].as_mut().expect("cluster present");
        let cm = 1usize << control;
        let tm = 1usize << target;
        for idx in 0..cluster.amps.len() {
            if idx & cm != 0 && idx & tm == 0 {
                cluster.amps.swap(idx, idx | tm);
            }
        }
    }

    /// X^x then Z^z on a live qubit.
    pub fn apply_pauli(&mut self, q: QubitHandle, x: bool, z: bool) -> Result<(), QsimError> {
        let (slot, pos) = self.locate(q)?;
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        if x {
            self.apply_single(slot, pos, [[zero, one], [one, zero]]);
        }
        if z {
            self.apply_single(slot, pos, [[one, zero], [zero, -one]]);
        }
        Ok(())
    }

    /// Computational-basis measurement of one qubit inside a cluster; removes
    /// the measured qubit from the cluster and consumes the handle.
    fn measure_computational(
        &mut self,
        slot: usize,
        q: QubitHandle,
        rng: &mut SeedStream,
    ) -> Result<bool, QsimError> {
        let (s, pos) = self.locate(q)?;
        debug_assert_eq!(s, slot);
        let cluster = self.clusters[slot].as_mut().expect("cluster present");
        let mask = 1usize << pos;
        let mut p1: f64 = 0.0;
        for (idx, a) in cluster.amps.iter().enumerate() {
            if idx & mask != 0 {
                p1 += a.norm_sqr();
            }
        }
        let p1 = p1.clamp(0.0, 1.0);
        let outcome = rng.f64() < p1;
        let keep_prob = if outcome { p1 } else { 1.0 - p1 };
        let scale = 1.0 / keep_prob.sqrt();
        // Project, renormalize, and drop the measured tensor factor.
        let n = cluster.n();
        let mut new_amps = vec![Complex64::new(0.0, 0.0); 1 << (n - 1)];
        for (idx, a) in cluster.amps.iter().enumerate() {
            if ((idx & mask != 0) == outcome) && a.norm_sqr() > 0.0 {
                let low = idx & (mask - 1);
                let high = (idx >> (pos + 1)) << pos;
                new_amps[low | high] = a * scale;
            }
        }
        cluster.amps = new_amps;
        cluster.members.remove(pos);
        self.index.remove(&q);
        if cluster.members.is_empty() {
            self.clusters[slot] = None;
        } else if (self.clusters[slot].as_ref().unwrap().norm_sq() - 1.0).abs() > NORM_TOLERANCE {
            return Err(QsimError::NormDrift);
        }
        Ok(outcome)
    }

    /// Projective measurement in the basis `{H^basis |0>, H^basis |1>}`.
    /// The outcome follows the Born rule via the supplied seeded stream; the
    /// handle is consumed.
    pub fn measure(
        &mut self,
        q: QubitHandle,
        basis: bool,
        rng: &mut SeedStream,
    ) -> Result<bool, QsimError> {
        let (slot, pos) = self.locate(q)?;
        if basis {
            self.apply_hadamard(slot, pos);
        }
        self.measure_computational(slot, q, rng)
    }

    /// Bell measurement of two live qubits; returns the teleportation
    /// correction bits `(x, z)`. Both handles are consumed.
    pub fn bell_measure(
        &mut self,
        q1: QubitHandle,
        q2: QubitHandle,
        rng: &mut SeedStream,
    ) -> Result<(bool, bool), QsimError> {
        if q1 == q2 {
            return Err(QsimError::Consumed);
        }
        let slot = self.merge_into_same_cluster(q1, q2)?;
        let (_, p1) = self.locate(q1)?;
        let (_, p2) = self.locate(q2)?;
        self.apply_cnot(slot, p1, p2);
        let (_, p1) = self.locate(q1)?;
        self.apply_hadamard(slot, p1);
        let z = self.measure_computational(slot, q1, rng)?;
        let x = self.measure_computational(slot, q2, rng)?;
        Ok((x, z))
    }
}

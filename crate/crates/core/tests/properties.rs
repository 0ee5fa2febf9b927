//! Property tests for the crate's cross-cutting invariants.

use lightlock_core::crypto::cipher::{key_from_halves, toy_prg};
use lightlock_core::crypto::commit::{com, com_setup};
use lightlock_core::crypto::enc::{dec, enc, SecretKey};
use lightlock_core::fixed::Fix;
use lightlock_core::geometry::{distance, in_convex_hull, rat_parse, Rat};
use lightlock_core::qsim::{QsimError, QubitArena};
use lightlock_core::rng::{domain, SeedStream};
use num::BigInt;
use proptest::prelude::*;

fn rat_strategy() -> impl Strategy<Value = Rat> {
    (-200i64..200, 1i64..16).prop_map(|(n, d)| Rat::new(BigInt::from(n), BigInt::from(d)))
}

fn point_strategy(dim: usize) -> impl Strategy<Value = Vec<Rat>> {
    prop::collection::vec(rat_strategy(), dim)
}

proptest! {
    /// distance(a, b) == distance(b, a), and zero iff a == b.
    #[test]
    fn distance_symmetry_and_identity(a in point_strategy(2), b in point_strategy(2)) {
        let ab = distance(&a, &b).unwrap();
        let ba = distance(&b, &a).unwrap();
        prop_assert_eq!(ab, ba);
        prop_assert_eq!(ab.value == Fix::ZERO, a == b);
    }

    /// Triangle inequality within one unit in the last rounded place.
    #[test]
    fn distance_triangle_inequality(
        a in point_strategy(2),
        b in point_strategy(2),
        c in point_strategy(2),
    ) {
        let ac = distance(&a, &c).unwrap().value.raw();
        let ab = distance(&a, &b).unwrap().value.raw();
        let bc = distance(&b, &c).unwrap().value.raw();
        prop_assert!(ac <= ab + bc + 2, "ac {ac} vs ab+bc {}", ab + bc);
    }

    /// Hull membership is preserved under convex combinations of vertices.
    #[test]
    fn hull_contains_convex_combinations(
        v0 in point_strategy(2),
        v1 in point_strategy(2),
        v2 in point_strategy(2),
        wa in 0u32..8,
        wb in 0u32..8,
        wc in 0u32..8,
    ) {
        prop_assume!(wa + wb + wc > 0);
        let total = Rat::from_integer((wa + wb + wc).into());
        let combo: Vec<Rat> = (0..2)
            .map(|i| {
                let s = &v0[i] * Rat::from_integer(wa.into())
                    + &v1[i] * Rat::from_integer(wb.into())
                    + &v2[i] * Rat::from_integer(wc.into());
                s / &total
            })
            .collect();
        let verts = vec![v0, v1, v2];
        prop_assert!(in_convex_hull(&combo, &verts).unwrap());
    }

    /// Fixed-point decimal rendering parses back to the same value.
    #[test]
    fn fix_decimal_round_trip(raw in any::<i64>()) {
        let f = Fix::from_raw(raw as i128);
        let s = f.to_decimal_string();
        let parsed = rat_parse(&s).expect("decimal parses");
        prop_assert_eq!(Fix::from_rational(&parsed), f);
    }

    /// Counter-mode keystream has the prefix property for every split.
    #[test]
    fn prg_prefix_property(hi in any::<u64>(), lo in any::<u64>(), cut in 0usize..256) {
        let key = key_from_halves(hi, lo);
        let long = toy_prg(&key, 256);
        let short = toy_prg(&key, cut);
        prop_assert_eq!(&short[..], &long[..cut]);
    }

    /// Encryption round-trips for payloads and for the dummy.
    #[test]
    fn enc_dec_round_trip(seed in any::<u64>(), idx in any::<u64>(), width in 1usize..16) {
        let mut rng = SeedStream::derive(seed, domain::TRIAL, 0);
        let sk = SecretKey::generate(&mut rng, 64);
        let payload = rng.bits(width);
        let ct = enc(&sk, idx, Some(&payload), width).unwrap();
        prop_assert_eq!(dec(&sk, &ct), Some(payload));
        let dummy = enc(&sk, idx.wrapping_add(1), None, width).unwrap();
        prop_assert_eq!(dec(&sk, &dummy), None);
        prop_assert_eq!(ct.body.len(), dummy.body.len());
    }

    /// Commitment recomputation is exact, and any single randomness flip
    /// changes the commitment.
    #[test]
    fn com_deterministic_and_sensitive(seed in any::<u64>(), flip in 0usize..32) {
        let mut rng = SeedStream::derive(seed, domain::TRIAL, 1);
        let pp = com_setup(&mut rng, 8, 4);
        let msg = rng.bits(4);
        let rand = rng.bits(32);
        let c1 = com(&pp, &msg, &rand).unwrap();
        let c2 = com(&pp, &msg, &rand).unwrap();
        prop_assert_eq!(&c1, &c2);
        let mut rand2 = rand.clone();
        rand2[flip] = !rand2[flip];
        prop_assert_ne!(&c1, &com(&pp, &msg, &rand2).unwrap());
    }

    /// No cloning: a consumed handle can never be measured again, whatever
    /// preparation and basis sequence led up to it.
    #[test]
    fn consumed_handles_stay_consumed(
        seed in any::<u64>(),
        b in any::<bool>(),
        theta in any::<bool>(),
        basis1 in any::<bool>(),
        basis2 in any::<bool>(),
    ) {
        let mut rng = SeedStream::derive(seed, domain::MEASUREMENT, 2);
        let mut arena = QubitArena::new();
        let q = arena.prepare_bb84(b, theta);
        arena.measure(q, basis1, &mut rng).unwrap();
        prop_assert_eq!(arena.measure(q, basis2, &mut rng), Err(QsimError::Consumed));
        // Same through entangled pairs.
        let (x, y) = arena.make_epr();
        arena.measure(x, basis1, &mut rng).unwrap();
        prop_assert_eq!(arena.measure(x, basis2, &mut rng), Err(QsimError::Consumed));
        arena.measure(y, basis2, &mut rng).unwrap();
        prop_assert_eq!(arena.bell_measure(x, y, &mut rng), Err(QsimError::Consumed));
    }

    /// Event-log lines survive a JSON round trip unchanged.
    #[test]
    fn log_lines_round_trip(seed in any::<u64>(), payload in prop::collection::vec(any::<u8>(), 0..12)) {
        use lightlock_core::sim::{rats, Engine, Mode, RecorderParty, Signal};
        let mut e = Engine::new(1, seed);
        let a = e.add_party(rats(&[0]), Box::new(RecorderParty::default()));
        let _b = e.add_party(rats(&[4]), Box::new(RecorderParty::default()));
        e.schedule_send(
            a,
            Signal::classical(Fix::from_int(1), Mode::Broadcast, payload, Some("x0:1".into())),
        )
        .unwrap();
        e.run_until(Fix::from_int(9));
        for rec in e.records() {
            let line = rec.to_log_line();
            let json = serde_json::to_string(&line).unwrap();
            let back: lightlock_core::sim::LogLine = serde_json::from_str(&json).unwrap();
            prop_assert_eq!(back, line);
        }
    }
}

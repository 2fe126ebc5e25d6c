//! Randomized properties of streams, enumerations and the module sketch.

use num_bigint::BigInt;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use turnlab::sketch::{phi, scalar_mul, sketch_stream, SketchParams};
use turnlab::stream::io::{read_jsonl, write_jsonl};
use turnlab::stream::{freq_of_iter, kappa, FrequencyVector, LittleEndian, Stream, Update};

fn stream_strategy(dim: usize) -> impl Strategy<Value = Vec<(usize, i64)>> {
    prop::collection::vec((0..dim, -20i64..=20), 0..40)
}

fn to_stream(dim: usize, pairs: &[(usize, i64)]) -> Stream<i64> {
    Stream::from_pairs(dim, pairs).unwrap()
}

fn params_for(seed: u64, dim: usize) -> SketchParams<i64> {
    SketchParams::random(&mut ChaCha8Rng::seed_from_u64(seed), dim, 8)
}

proptest! {
    #[test]
    fn freq_is_additive_over_concatenation(a in stream_strategy(5), b in stream_strategy(5)) {
        let (s, t) = (to_stream(5, &a), to_stream(5, &b));
        let joint = s.concat(&t).unwrap();
        prop_assert_eq!(joint.freq(None).unwrap(), s.freq(None).unwrap().add(&t.freq(None).unwrap()));
        prop_assert_eq!(s.negate().freq(None).unwrap(), s.freq(None).unwrap().neg());
    }

    #[test]
    fn canonical_stream_reproduces_vector(x in prop::collection::vec(-30i64..=30, 1..7)) {
        let v = FrequencyVector::<i64>::from_i64s(&x);
        prop_assert_eq!(kappa(&v).freq(None).unwrap(), v);
    }

    #[test]
    fn jsonl_round_trip(a in stream_strategy(4)) {
        let s = to_stream(4, &a);
        let mut buf = Vec::new();
        write_jsonl(&mut buf, 4, s.iter().cloned()).unwrap();
        let back: Stream<i64> = read_jsonl(buf.as_slice()).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn enumeration_jumps_match_steps(moduli in prop::collection::vec(1i64..=4, 0..3), pos in 0u64..200, steps in 0u64..50) {
        let dim = moduli.len() + 1;
        let mut walk = LittleEndian::starting_at(dim, &moduli, pos);
        let start = walk.current();
        let mut moved = FrequencyVector::zero(dim);
        for _ in 0..steps {
            moved = moved.add(&freq_of_iter(dim, walk.advance()));
        }
        let jumped = LittleEndian::starting_at(dim, &moduli, pos + steps).current();
        prop_assert_eq!(start.add(&moved), jumped);
    }

    #[test]
    fn sketching_a_stream_equals_phi_of_its_freq(seed in any::<u64>(), a in stream_strategy(4)) {
        let params = params_for(seed, 4);
        let s = to_stream(4, &a);
        prop_assert_eq!(sketch_stream(&params, &s).unwrap(), phi(&params, &s.freq(None).unwrap()));
    }

    #[test]
    fn scalar_multiple_is_phi_of_scaled_vector(seed in any::<u64>(), x in prop::collection::vec(-40i64..=40, 3), k in -30i64..=30) {
        let params = params_for(seed, 3);
        let v = FrequencyVector::from_i64s(&x);
        let lhs = scalar_mul(&params, &k, &phi(&params, &v)).unwrap();
        prop_assert_eq!(lhs, phi(&params, &v.scale(&k)));
    }

    #[test]
    fn relations_vanish(seed in any::<u64>()) {
        let params = params_for(seed, 5);
        for i in 0..5 {
            prop_assert!(phi(&params, &params.relation(i)).is_zero());
        }
    }

    #[test]
    fn big_and_machine_integers_agree(seed in any::<u64>(), x in prop::collection::vec(-10_000i64..=10_000, 4)) {
        let small = params_for(seed, 4);
        let big = SketchParams::<BigInt>::new(
            small.moduli().iter().map(|&a| BigInt::from(a)).collect(),
            (0..4).map(|i| small.overflow(i).iter().map(|(j, o)| (*j, BigInt::from(*o))).collect()).collect(),
        ).unwrap();
        let xs = FrequencyVector::from_i64s(&x);
        let xb = FrequencyVector::from_dense(&x.iter().map(|&v| BigInt::from(v)).collect::<Vec<_>>());
        let a = phi(&small, &xs);
        let b = phi(&big, &xb);
        for i in 0..4 {
            prop_assert_eq!(BigInt::from(a.get(i)), b.get(i));
        }
    }

    #[test]
    fn raw_overflow_defines_the_same_sketch(seed in any::<u64>(), x in prop::collection::vec(-50i64..=50, 3)) {
        let normal = params_for(seed, 3);
        // Shift each overflow vector by multiples of lower relations.
        let mut raw = Vec::new();
        for i in 0..3 {
            let mut o = normal.overflow_vector(i);
            for j in 0..i {
                o = o.add(&normal.relation(j).scale(&((i + j) as i64 - 2)));
            }
            raw.push(o);
        }
        let rebuilt = SketchParams::from_raw_overflow(normal.moduli().to_vec(), raw).unwrap();
        let v = FrequencyVector::from_i64s(&x);
        let (a, b) = (phi(&rebuilt, &v), phi(&normal, &v));
        prop_assert_eq!(a.entries(), b.entries());
    }
}

#[test]
fn updates_outside_the_dimension_are_rejected() {
    assert!(Stream::new(2, vec![Update::new(2, 1i64)]).is_err());
}

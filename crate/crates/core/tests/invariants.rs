mod common;

use jdai::channel::{capacity_iterative, make_bsc, product_prob, BscParams, Dmc};
use jdai::coding::field::{digits, eval_poly, from_digits, is_prime};
use jdai::coding::{
    make_repetition_code, make_tag_code, Decision, ExactAnalyzer, IdPair, IdentificationCode, TagCodeParams,
    TransmissionCode,
};
use jdai::controller::{ActionId, IdentityMap, Simulation};
use jdai::population::RegionId;
use jdai::Rational;
use num_traits::{One, Zero};
use proptest::prelude::*;

/// A random stochastic matrix with rational entries.
fn rational_dmc(inputs: usize, outputs: usize) -> impl Strategy<Value = Dmc<Rational>> {
    proptest::collection::vec(proptest::collection::vec(1u32..20, outputs), inputs).prop_map(|weights| {
        let rows = weights
            .into_iter()
            .map(|w| {
                let total: u32 = w.iter().sum();
                w.into_iter().map(|x| Rational::new(x.into(), total.into())).collect()
            })
            .collect();
        Dmc::new(rows).unwrap()
    })
}

fn all_sequences(alphabet: usize, n: usize) -> Vec<Vec<usize>> {
    (0..alphabet.pow(n as u32))
        .map(|mut v| {
            (0..n)
                .map(|_| {
                    let s = v % alphabet;
                    v /= alphabet;
                    s
                })
                .collect()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn product_law_sums_to_one(ch in rational_dmc(2, 3), n in 1usize..=5, seed in any::<u64>()) {
        let x: Vec<usize> = (0..n).map(|i| ((seed >> i) & 1) as usize).collect();
        let total = all_sequences(3, n).iter().fold(Rational::zero(), |acc, y| acc + product_prob(&ch, &x, y).unwrap());
        prop_assert!(total.is_one());
    }

    #[test]
    fn capacity_is_bracketed(rows in proptest::collection::vec(proptest::collection::vec(0.01f64..1.0, 3), 2..4)) {
        let rows: Vec<Vec<f64>> = rows.into_iter().map(|r| { let s: f64 = r.iter().sum(); r.into_iter().map(|x| x / s).collect() }).collect();
        let m = rows.len();
        let ch = Dmc::new(rows).unwrap();
        let est = capacity_iterative(&ch, 1e-9).unwrap();
        prop_assert!(est.capacity >= 0.0);
        prop_assert!(est.capacity <= (m.min(3) as f64).log2() + 1e-12);
        prop_assert!(est.upper_bound - est.capacity <= 1e-9 + 1e-12);
        let total: f64 = est.input_distribution.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn digit_expansion_round_trips(q in prop::sample::select(vec![2u64, 3, 5, 7, 11, 13, 251]), len in 1usize..8, value in any::<u64>()) {
        let bound = (q as u128).pow(len as u32);
        let v = u128::from(value) % bound;
        let d = digits(v, q, len);
        prop_assert!(d.iter().all(|&c| c < q));
        prop_assert_eq!(from_digits(&d, q), v);
        // Horner evaluation agrees with the naive power sum.
        let x = value % q;
        let naive = d.iter().enumerate().fold(0u128, |acc, (j, &c)| (acc + u128::from(c) * (u128::from(x).pow(j as u32) % u128::from(q))) % u128::from(q));
        prop_assert_eq!(u128::from(eval_poly(&d, x, q)), naive);
        prop_assert!(is_prime(q));
    }

    #[test]
    fn repetition_codewords_decode_to_themselves(bits in 1usize..10, reps in prop::sample::select(vec![1usize, 3, 5]), m in any::<u64>()) {
        let code = make_repetition_code(bits, reps).unwrap();
        let m = m % code.message_count();
        let x = code.encode(m);
        prop_assert_eq!(x.len(), bits * reps);
        prop_assert_eq!(code.decode(&x), Decision::Message(m));
    }

    #[test]
    fn tag_code_messages_unpack(q in prop::sample::select(vec![2u64, 3, 5, 7, 11]), k in 1usize..4, id in any::<u64>(), r in any::<u64>()) {
        let k = k.min(q as usize);
        let code = make_tag_code(TagCodeParams::with_repetition(q, k, 1).unwrap()).unwrap();
        let id = 1 + u128::from(id) % code.identity_count();
        let r = r % q;
        let y = code.encode(id, r);
        prop_assert_eq!(y.len(), code.blocklength());
        prop_assert_eq!(code.decode_pair(&y), Some((r, code.tag(id, r))));
        prop_assert!(code.accepts(id, &y));
        prop_assert_eq!(code.unpack(code.message(id, r)), Some((r, code.tag(id, r))));
    }

    #[test]
    fn error_probabilities_are_probabilities(p in 0.0f64..0.5, sent in 1u128..=25, tested in 1u128..=25) {
        let code = make_tag_code(TagCodeParams::with_repetition(5, 2, 1).unwrap()).unwrap();
        let ch = make_bsc(&BscParams::new(p).unwrap());
        let analyzer = ExactAnalyzer::new(&code, &ch).unwrap();
        let l1 = analyzer.lambda1(sent).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&l1));
        if sent != tested {
            let l2 = analyzer.lambda2(IdPair::new(sent, tested)).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&l2));
        }
    }

    #[test]
    fn identity_map_round_trips(regions in 1usize..6, actions in 1usize..4, window in 1u64..10, horizon in 0u64..50, epoch in 0u64..50) {
        let names: Vec<String> = (0..actions).map(|a| format!("a{a}")).collect();
        let map = IdentityMap::new(regions, names, window, horizon, u128::MAX).unwrap();
        let epoch = epoch.min(horizon);
        for r in 0..regions {
            for a in 0..actions {
                let instr = map.instruction(RegionId(r), ActionId(a), epoch);
                prop_assert!(instr.window.contains(epoch));
                let id = map.encode_instruction(&instr).unwrap();
                prop_assert!(id >= 1 && id <= map.vocabulary_size());
                prop_assert_eq!(map.decode(id), Some(instr));
            }
        }
    }

    #[test]
    fn simulation_conserves_devices_and_payload(seed in any::<u64>(), p in 0.0f64..0.2, p_self in 0.5f64..1.0) {
        let knobs = common::Knobs { crossover: p, k: 2, p_self, p_conf: (1.0 - p_self) / 2.0, p_detect: 0.7, threshold: 2, clutter: 0.3, population: 300, epochs: 12, seed, ..Default::default() };
        let out = Simulation::new(common::config(&knobs)).unwrap().run().unwrap();
        let first: u64 = out.epochs.iter().map(|e| e.first_activations).sum();
        prop_assert!(first <= 300);
        prop_assert_eq!(out.epochs.last().unwrap().active_devices, first);
        for e in &out.epochs {
            prop_assert_eq!(e.missed_activations + e.target_activations, e.target_devices);
            prop_assert!(e.false_activations <= e.off_target_devices);
        }
    }
}

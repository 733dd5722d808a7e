//! Independent brute-force evaluation of identification errors, compared against the
//! cached-law analyzer and the Monte Carlo estimator.

use jdai::channel::{make_bsc, product_prob, BscParams, Dmc};
use jdai::coding::{
    deterministic_variant, id_errors_exact, id_errors_mc, make_tag_code, second_kind_bound, ExactAnalyzer, IdPair,
    IdentificationCode, Method, PairCoverage, PairSelection, TagCode, TagCodeParams,
};
use jdai::{Rational, Scalar};
use num_traits::{One, Zero};

/// All `y` in `Y^n`, lexicographic.
fn all_outputs(alphabet: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out.into_iter().flat_map(|p| (0..alphabet).map(move |s| [p.clone(), vec![s]].concat())).collect();
    }
    out
}

/// `P(D_tested | sent)` by summing over every output sequence and randomness value.
fn brute_accept<T: Scalar, I: IdentificationCode>(code: &I, ch: &Dmc<T>, sent: u128, tested: u128) -> T {
    let r_count = code.randomness_size();
    let mut total = T::zero();
    for y in all_outputs(ch.outputs(), code.blocklength()) {
        if !code.accepts(tested, &y) {
            continue;
        }
        for r in 0..r_count {
            total = total + product_prob(ch, &code.encode(sent, r), &y).unwrap();
        }
    }
    total / T::from_u64(r_count).unwrap()
}

fn rational(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

#[test]
fn analyzer_matches_brute_force_exactly() {
    let code = make_tag_code(TagCodeParams::with_repetition(5, 2, 1).unwrap()).unwrap();
    let ch = make_bsc(&jdai::channel::BscParams::new(rational(1, 10)).unwrap());
    let analyzer = ExactAnalyzer::new(&code, &ch).unwrap();
    for sent in 1..=25u128 {
        let l1 = analyzer.lambda1(sent).unwrap();
        assert_eq!(l1, Rational::one() - brute_accept(&code, &ch, sent, sent));
        for tested in [1u128, 7, 13, 25] {
            if tested == sent {
                continue;
            }
            let l2 = analyzer.lambda2(IdPair::new(sent, tested)).unwrap();
            assert_eq!(l2, brute_accept(&code, &ch, sent, tested), "pair ({sent},{tested})");
        }
    }
}

#[test]
fn noiseless_second_kind_meets_agreement_bound() {
    for (q, k, expect) in [(5u64, 2usize, (1, 5)), (7, 3, (2, 7))] {
        let params = TagCodeParams::with_repetition(q, k, 1).unwrap();
        let bound: Rational = second_kind_bound(&params);
        let code = make_tag_code(params).unwrap();
        let ch = Dmc::<Rational>::identity(2).unwrap();
        let report = id_errors_exact(&code, &ch, &PairSelection::All).unwrap();
        assert!(report.lambda1.is_zero());
        assert_eq!(report.lambda2, rational(expect.0, expect.1));
        assert!(report.lambda2 <= bound);
        assert_eq!(report.pair_coverage, PairCoverage::AllPairs);
        let n = u64::try_from(code.identity_count()).unwrap();
        assert_eq!(report.pairs_evaluated, n * (n - 1));
    }
}

#[test]
fn noiseless_second_kind_for_degree_four() {
    let params = TagCodeParams::with_repetition(11, 4, 1).unwrap();
    let bound: f64 = second_kind_bound(&params);
    let code = make_tag_code(params).unwrap();
    let ch = Dmc::<f64>::identity(2).unwrap();
    let report = id_errors_exact(&code, &ch, &PairSelection::All).unwrap();
    assert_eq!(report.lambda1, 0.0);
    assert!((report.lambda2 - 3.0 / 11.0).abs() < 1e-12);
    assert!(report.lambda2 <= bound + 1e-12);
}

#[test]
fn deterministic_variant_has_unit_second_kind() {
    let code = make_tag_code(TagCodeParams::with_repetition(5, 2, 1).unwrap()).unwrap();
    let ch = Dmc::<f64>::identity(2).unwrap();
    let randomized = id_errors_exact(&code, &ch, &PairSelection::All).unwrap();
    for fixed in 0..5 {
        let fixed_code = deterministic_variant(&code, fixed).unwrap();
        let report = id_errors_exact(&fixed_code, &ch, &PairSelection::All).unwrap();
        assert_eq!(report.lambda2, 1.0);
        assert!(randomized.lambda2 < report.lambda2);
        // Brute force: two identities sharing a tag at the fixed point are indistinguishable.
        let id_a = 2u128;
        let clash =
            (1..=25u128).find(|&j| j != id_a && fixed_code.tag(j, fixed) == fixed_code.tag(id_a, fixed)).unwrap();
        assert_eq!(brute_accept(&fixed_code, &ch, id_a, clash), 1.0);
    }
}

#[test]
fn monte_carlo_agrees_with_exact_within_three_sigma() {
    let code = make_tag_code(TagCodeParams::with_repetition(5, 2, 3).unwrap()).unwrap();
    let ch = make_bsc(&BscParams::new(0.08).unwrap());
    let exact = id_errors_exact(&code, &ch, &PairSelection::All).unwrap();
    let mc = id_errors_mc(&code, &ch, 20_000, 600, 2024).unwrap();
    assert_eq!(mc.method, Method::MonteCarlo);
    assert_eq!(mc.pair_coverage, PairCoverage::AllPairs);
    let mut within = 0;
    let mut cells = 0;
    for entry in &mc.identity_entries {
        let truth = ExactAnalyzer::new(&code, &ch).unwrap().lambda1(entry.identity).unwrap();
        cells += 1;
        if (entry.lambda1 - truth).abs() <= 3.0 * entry.stderr.unwrap().max(1e-12) {
            within += 1;
        }
    }
    assert!(within as f64 >= 0.95 * cells as f64, "{within}/{cells}");
    let se = mc.lambda2_stderr.unwrap();
    assert!(
        (mc.lambda2_mean - exact.lambda2_mean).abs() <= 3.0 * se.max(1e-6),
        "{} vs {}",
        mc.lambda2_mean,
        exact.lambda2_mean
    );
}

#[test]
fn first_kind_grows_with_crossover() {
    let code = make_tag_code(TagCodeParams::with_repetition(7, 3, 3).unwrap()).unwrap();
    let mut last = -1.0;
    for p in [0.0, 0.01, 0.03, 0.06, 0.1, 0.15] {
        let ch = make_bsc(&BscParams::new(p).unwrap());
        let l1 = ExactAnalyzer::new(&code, &ch).unwrap().lambda1(17).unwrap();
        assert!(l1 > last, "lambda1 at {p} = {l1} not above {last}");
        last = l1;
    }
}

#[test]
fn tag_code_decoding_sets_overlap() {
    // Noiseless: identities agreeing at some r both accept the output produced from that r.
    let code: TagCode = make_tag_code(TagCodeParams::with_repetition(5, 2, 1).unwrap()).unwrap();
    let mut overlapping = 0;
    for a in 1..=25u128 {
        for b in (a + 1)..=25 {
            if (0..5).any(|r| {
                let y = code.encode(a, r);
                code.accepts(a, &y) && code.accepts(b, &y)
            }) {
                overlapping += 1;
            }
        }
    }
    assert!(overlapping > 0);
}

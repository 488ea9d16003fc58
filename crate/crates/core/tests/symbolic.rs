mod common;

use common::all_words;
use num_traits::Zero;
use sca_core::corpus;
use sca_core::symbolic::*;
use sca_core::weighted::stochastic_equal;
use sca_core::*;

fn b() -> Budget {
    Budget::default()
}

fn labeled() -> Vec<(&'static str, Sca, [bool; 4])> {
    vec![
        ("identity", corpus::identity(), [false, true, true, true]),
        ("constant", corpus::constant_zero(), [false, false, false, false]),
        ("xor", corpus::xor_ca(), [false, true, false, true]),
        ("blank_noise", corpus::blank_noise(), [true, true, false, false]),
        ("parity", corpus::parity(), [false, false, false, false]),
        ("particle", corpus::particle(), [false, true, false, false]),
    ]
}

#[test]
fn verdict_table() {
    for (name, a, expect) in labeled() {
        let got = [
            is_noisy(&a, &b()).unwrap(),
            is_surjective(&a, &b()).unwrap(),
            is_injective(&a, &b()).unwrap(),
            is_preinjective(&a, &b()).unwrap(),
        ];
        for (i, v) in got.iter().enumerate() {
            assert_eq!(v.answer, expect[i], "{name} property {i}");
            if !v.answer {
                let w = v.witness.as_ref().unwrap_or_else(|| panic!("{name} property {i} has no witness"));
                assert!(w.recheck(&a, &b()).unwrap(), "{name} property {i} witness {w:?}");
            }
        }
    }
}

#[test]
fn noisy_witnesses() {
    let v = is_noisy(&corpus::identity(), &b()).unwrap();
    assert_eq!(
        v.witness,
        Some(Witness::PairWord { input: vec![0], output: vec![1], present_in: None })
    );
    let p = corpus::parity();
    let v = is_noisy(&p, &b()).unwrap();
    let Some(Witness::PairWord { input, output, .. }) = v.witness else { panic!() };
    assert_eq!(p.states().format_word(&input), "#");
    assert_ne!(p.states().format_word(&output), "#");
}

#[test]
fn orphan_of_constant() {
    let v = is_surjective(&corpus::constant_zero(), &b()).unwrap();
    assert_eq!(v.witness, Some(Witness::Orphan { word: vec![1] }));
}

#[test]
fn orphans_have_no_preimage() {
    // every window of the right length gives the orphan probability zero
    let p = corpus::parity();
    let Some(Witness::Orphan { word }) = is_surjective(&p, &b()).unwrap().witness else { panic!() };
    for w in all_words(3, word.len() + 2) {
        assert!(cylinder_prob(&p, &w, &word, 1, &b()).unwrap().is_zero());
    }
}

#[test]
fn cfca_local_test_agrees() {
    for (name, a) in corpus::named() {
        if !a.is_cfca() || a.ell() > 3 {
            continue;
        }
        assert_eq!(cfca_noisy_local(&a).unwrap(), is_noisy(&a, &b()).unwrap().answer, "{name}");
    }
    assert!(cfca_noisy_local(&corpus::biased_noise()).unwrap());
    assert!(!cfca_noisy_local(&corpus::identity()).unwrap());
    assert!(matches!(cfca_noisy_local(&corpus::parity()), Err(Error::NotCfca)));
}

fn implication_pool() -> Vec<Sca> {
    let mut pool: Vec<Sca> = labeled().into_iter().map(|(_, a, _)| a).collect();
    pool.push(corpus::xor_noise());
    pool.push(corpus::biased_noise());
    pool.push(corpus::shift());
    for seed in 0..6 {
        pool.push(corpus::random_deterministic(seed, 2));
        pool.push(corpus::random_sca(seed, 2, 2, &[-1, 0, 1], &[0]));
    }
    pool
}

#[test]
fn injectivity_implications() {
    for a in implication_pool() {
        let inj = is_injective(&a, &b()).unwrap();
        let pre = is_preinjective(&a, &b()).unwrap();
        let surj = is_surjective(&a, &b()).unwrap();
        if inj.answer {
            assert!(a.is_deterministic());
            assert!(pre.answer);
        }
        if pre.answer {
            assert!(surj.answer);
        }
        for v in [&inj, &pre, &surj] {
            if let Some(w) = &v.witness {
                assert!(w.recheck(&a, &b()).unwrap(), "{w:?}");
            }
        }
    }
}

#[test]
fn ndet_examples() {
    let blank = corpus::blank_noise();
    assert!(ndet_equal(&blank, &corpus::biased_noise(), 1, &b()).unwrap().answer);
    let v = ndet_equal(&corpus::identity(), &blank, 1, &b()).unwrap();
    assert!(!v.answer);
    assert_eq!(
        v.witness,
        Some(Witness::PairWord { input: vec![0], output: vec![1], present_in: Some("b".into()) })
    );
    assert!(ndet_equal(&corpus::xor_ca(), &corpus::xor_ca(), 2, &b()).unwrap().answer);
    assert!(!ndet_equal(&corpus::xor_ca(), &corpus::identity(), 2, &b()).unwrap().answer);
}

#[test]
fn ndet_iterates_match_brute_force() {
    // the t-step relation on short words against reachability by enumeration
    let a = corpus::random_sca(5, 2, 2, &[-1, 0], &[0, 1]);
    let g = relation_presentation(&a, 2, &b()).unwrap();
    let single = relation_presentation(&iterate_sca(&a, 2, &b()).unwrap(), 1, &b()).unwrap();
    assert!(language_difference(&g, &single, &b()).unwrap().is_none());
}

#[test]
fn stochastic_implies_ndet() {
    let pool = implication_pool();
    for x in &pool {
        for y in &pool {
            if x.states() != y.states() {
                continue;
            }
            if stochastic_equal(x, y, 1, &b()).unwrap() {
                assert!(ndet_equal(x, y, 1, &b()).unwrap().answer);
            }
        }
    }
}

#[test]
fn pattern_examples() {
    let id = corpus::identity();
    let v = forced_pattern_exists(&id, &[0, 1], &b()).unwrap();
    assert_eq!(v.witness, Some(Witness::Forced { window: vec![0, 1], output: vec![0, 1] }));
    assert!(!forced_pattern_exists(&corpus::blank_noise(), &[0], &b()).unwrap().answer);
    let p = corpus::parity();
    let v = forced_pattern_exists(&p, &p.states().parse_word("#").unwrap(), &b()).unwrap();
    assert!(v.answer);
    let Some(Witness::Forced { window, .. }) = &v.witness else { panic!() };
    assert_eq!(window[1], 0);
    assert!(v.witness.unwrap().recheck(&p, &b()).unwrap());

    let v = reachable_pattern_exists(&corpus::blank_noise(), &[1, 1], &b()).unwrap();
    assert!(v.answer && v.witness.unwrap().recheck(&corpus::blank_noise(), &b()).unwrap());
    assert!(!reachable_pattern_exists(&corpus::constant_zero(), &[1], &b()).unwrap().answer);
    let v = reachable_pattern_exists(&p, &p.states().parse_word("01").unwrap(), &b()).unwrap();
    assert!(v.answer && v.witness.unwrap().recheck(&p, &b()).unwrap());
}

#[test]
fn pattern_search_matches_enumeration() {
    for seed in 0..4 {
        let a = corpus::random_sca(seed, 2, 2, &[-1, 0, 1], &[-1, 0]);
        for u in all_words(2, 2).into_iter().chain(all_words(2, 3)) {
            let mut reach = false;
            let mut forced = false;
            for w in all_words(2, u.len() + 2) {
                let d = pushforward_distribution(&a, &Word::at_origin(w), 1, &b()).unwrap();
                reach |= !d.prob(&u).is_zero();
                forced |= d.prob(&u) == Rational::from_integer(1.into());
            }
            assert_eq!(reachable_pattern_exists(&a, &u, &b()).unwrap().answer, reach);
            assert_eq!(forced_pattern_exists(&a, &u, &b()).unwrap().answer, forced);
        }
    }
}

mod common;

use common::{all_words, brute_distribution};
use num_traits::Zero;
use sca_core::corpus;
use sca_core::rational::ratio;
use sca_core::weighted::*;
use sca_core::*;

fn b() -> Budget {
    Budget::default()
}

fn bridge_corpus() -> Vec<(&'static str, Sca)> {
    vec![
        ("blank_noise", corpus::blank_noise()),
        ("xor_noise", corpus::xor_noise()),
        ("biased_noise", corpus::biased_noise()),
        ("parity", corpus::parity()),
        ("xor_ca", corpus::xor_ca()),
        ("random", corpus::random_sca(3, 2, 2, &[-1, 0, 1], &[-1, 0, 1])),
    ]
}

/// Every window `v` up to `max_len` against every output: the automaton weight is the brute-force probability.
fn check_bridge(a: &Sca, w: &WeightedAutomaton, max_len: usize) {
    let ell = a.ell();
    let q = a.states().len();
    for n in ell..=max_len {
        for v in all_words(q, n) {
            let dist = brute_distribution(a, &v, 1);
            for u in all_words(q, n - ell + 1) {
                let m = PairWord::encode(&v, &u, ell).unwrap();
                let expect = dist.get(&u).cloned().unwrap_or_else(Rational::zero);
                assert_eq!(weight_of(w, &m), expect, "v={v:?} u={u:?}");
            }
        }
    }
}

#[test]
fn debruijn_bridge() {
    for (name, a) in bridge_corpus() {
        let w = weighted_debruijn(&a, &b()).unwrap();
        check_bridge(&a, &w, 4.max(a.ell()));
        let _ = name;
    }
}

#[test]
fn particle_bridge() {
    let a = corpus::particle();
    let w = weighted_debruijn(&a, &b()).unwrap().lumped();
    let v = a.states().parse_word("000010000").unwrap();
    let d = pushforward_distribution(&a, &Word::at_origin(v.clone()), 1, &b()).unwrap();
    for u in all_words(2, 5) {
        let m = PairWord::encode(&v, &u, 5).unwrap();
        assert_eq!(weight_of(&w, &m), d.prob(&u));
    }
}

#[test]
fn cfca_bridge() {
    for (_, a) in corpus::named().into_iter().filter(|(_, a)| a.is_cfca() && a.radius() <= 1) {
        let w = cfca_weighted(&a, &b()).unwrap();
        assert!(w.is_deterministic());
        check_bridge(&a, &w, a.ell() + 1);
        let full = weighted_debruijn(&a, &b()).unwrap();
        assert!(wa_equivalent(&full, &w).unwrap());
    }
}

#[test]
fn parity_prologue_example() {
    let p = corpus::parity();
    let w = weighted_debruijn(&p, &b()).unwrap();
    let v = p.states().parse_word("#00#").unwrap();
    let u = p.states().parse_word("00").unwrap();
    assert_eq!(weight_of(&w, &PairWord::encode(&v, &u, 3).unwrap()), ratio(1, 2));
    // a body letter before the prologue is complete
    let m = PairWord { prologue: vec![0], body: vec![(1, 1)] };
    assert!(weight_of(&w, &m).is_zero());
}

#[test]
fn deterministic_outputs_agree() {
    let w = weighted_debruijn(&corpus::xor_ca(), &b()).unwrap();
    let nq = 2;
    for s in 0..w.num_states() {
        for input in 0..nq {
            let outs: std::collections::BTreeSet<usize> = w
                .transitions(s)
                .iter()
                .filter(|(l, _, _)| *l as usize >= nq && (*l as usize - nq) / nq == input)
                .map(|(l, _, _)| (*l as usize - nq) % nq)
                .collect();
            assert!(outs.len() <= 1);
        }
    }
}

#[test]
fn equivalence_examples() {
    let blank = weighted_debruijn(&corpus::blank_noise(), &b()).unwrap();
    let xor = weighted_debruijn(&corpus::xor_noise(), &b()).unwrap();
    let biased = weighted_debruijn(&corpus::biased_noise(), &b()).unwrap();
    assert!(wa_equivalent(&blank, &xor).unwrap());
    assert!(wa_equivalent(&blank, &blank).unwrap());
    let cex = wa_counterexample(&blank, &biased).unwrap().unwrap();
    assert_eq!(cex.word.len(), 1);
    assert_eq!((cex.left, cex.right), (ratio(1, 2), ratio(2, 3)));
    let tri = weighted_debruijn(&corpus::identity_over(Alphabet::numeric(3)), &b()).unwrap();
    assert!(matches!(wa_equivalent(&blank, &tri), Err(Error::AlphabetMismatch(_))));
}

#[test]
fn equivalence_is_an_equivalence() {
    let autos: Vec<WeightedAutomaton> = [
        corpus::blank_noise(),
        corpus::xor_noise(),
        corpus::biased_noise(),
        corpus::identity(),
        corpus::xor_ca(),
        corpus::constant_zero(),
    ]
    .iter()
    .map(|a| weighted_debruijn_at(a, 3, &b()).unwrap())
    .collect();
    let n = autos.len();
    let eq: Vec<Vec<bool>> =
        (0..n).map(|i| (0..n).map(|j| wa_equivalent(&autos[i], &autos[j]).unwrap()).collect()).collect();
    for i in 0..n {
        assert!(eq[i][i]);
        for j in 0..n {
            assert_eq!(eq[i][j], eq[j][i]);
            for k in 0..n {
                if eq[i][j] && eq[j][k] {
                    assert!(eq[i][k]);
                }
            }
        }
    }
    assert!(eq[0][1]);
    assert!(!eq[0][2]);
}

#[test]
fn stochastic_equal_examples() {
    let (blank, xor) = (corpus::blank_noise(), corpus::xor_noise());
    for t in 1..=3 {
        assert!(stochastic_equal(&blank, &xor, t, &b()).unwrap(), "t={t}");
    }
    let r = stochastic_equal_report(&blank, &corpus::biased_noise(), 1, &b()).unwrap();
    assert!(!r.equal);
    assert_eq!(r.precheck, PrimeCheck::Incompatible);
    let p = corpus::parity();
    assert!(stochastic_equal(&p, &p, 2, &b()).unwrap());
    let q3 = corpus::identity_over(Alphabet::numeric(3));
    assert!(matches!(stochastic_equal(&blank, &q3, 1, &b()), Err(Error::AlphabetMismatch(_))));
}

#[test]
fn differing_radii_compare_at_common_length() {
    // the identity written with radius 1 equals the radius-0 identity
    let wide = Sca::from_fn(Alphabet::numeric(2), Alphabet::numeric(1), &[-1, 0, 1], &[0], &b(), |q, _| q[1]).unwrap();
    assert!(stochastic_equal(&corpus::identity(), &wide, 1, &b()).unwrap());
    assert!(!stochastic_equal(&corpus::identity(), &corpus::shift(), 1, &b()).unwrap());
    assert!(!stochastic_equal(&corpus::xor_ca(), &corpus::shift(), 1, &b()).unwrap());
}

#[test]
fn precheck_examples() {
    let two = corpus::blank_noise();
    let three = corpus::biased_noise();
    let six = Sca::from_fn(Alphabet::numeric(2), Alphabet::numeric(6), &[0], &[0], &b(), |_, r| r[0] % 2).unwrap();
    assert_eq!(prime_factor_precheck(&two, &three), PrimeCheck::Incompatible);
    assert_eq!(prime_factor_precheck(&two, &six), PrimeCheck::Compatible);
    assert_eq!(prime_factor_precheck(&corpus::identity(), &three), PrimeCheck::SomeDeterministic);
    assert_eq!(prime_set(&six), vec![2, 3]);
    // |R| = 6 with a fair coin is the blank noise
    assert!(stochastic_equal(&two, &six, 1, &b()).unwrap());
}

#[test]
fn equal_at_one_implies_later_steps() {
    let pool = [
        corpus::blank_noise(),
        corpus::xor_noise(),
        corpus::biased_noise(),
        corpus::identity(),
        corpus::constant_zero(),
        corpus::xor_ca(),
        corpus::shift(),
    ];
    for a in &pool {
        for c in &pool {
            if stochastic_equal(a, c, 1, &b()).unwrap() {
                assert!(stochastic_equal(a, c, 2, &b()).unwrap());
                assert!(stochastic_equal(a, c, 3, &b()).unwrap());
                if !a.is_deterministic() && !c.is_deterministic() {
                    assert_ne!(prime_factor_precheck(a, c), PrimeCheck::Incompatible);
                }
            }
        }
    }
}

#[test]
fn iterated_only_equality() {
    // one step differs, two steps agree: the second coordinate of the noise gadget is fresh
    let q = Alphabet::product(&[&Alphabet::numeric(2), &Alphabet::numeric(2)]).unwrap();
    let make = |f: fn(usize) -> usize| {
        Sca::from_fn(q.clone(), Alphabet::numeric(2), &[0], &[0], &b(), move |c, s| {
            let second = c[0] % 2;
            f(second) * 2 + s[0]
        })
        .unwrap()
    };
    let id = make(|x| x);
    let not = make(|x| 1 - x);
    assert!(!stochastic_equal(&id, &not, 1, &b()).unwrap());
    assert!(stochastic_equal(&id, &not, 2, &b()).unwrap());
}

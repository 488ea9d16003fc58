mod common;

use common::all_words;
use sca_core::corpus;
use sca_core::rational::ratio;
use sca_core::simulation::*;
use sca_core::symbolic::is_noisy;
use sca_core::weighted::{prime_set, stochastic_equal};
use sca_core::*;

fn unit() -> RescaleParams {
    RescaleParams::unit()
}

fn p(m: usize, t: usize, z: i64) -> RescaleParams {
    RescaleParams::new(m, t, z).unwrap()
}

#[test]
fn pack_round_trip() {
    for w in all_words(3, 6) {
        for m in [1, 2, 3] {
            assert_eq!(unpack_word(&pack_word(&w, m, 3).unwrap(), m, 3), w);
        }
    }
}

#[test]
fn unit_rescale_is_identity() {
    let b = Budget::default();
    for (name, a) in corpus::named() {
        let r = rescale_sca(&a, unit(), &b).unwrap();
        assert_eq!(r, a, "{name}");
        if a.ell() <= 5 {
            assert!(stochastic_equal(&a, &r, 1, &b).unwrap(), "{name}");
            assert!(simulates(&a, &a, unit(), unit(), &Trim::default(), Mode::S, &b).unwrap(), "{name}");
        }
    }
}

#[test]
fn rescale_examples() {
    let b = Budget::default();
    let blank = rescale_sca(&corpus::blank_noise(), p(2, 1, 0), &b).unwrap();
    assert_eq!(blank.states().len(), 4);
    // every packed cell is uniform and independent of the input
    for q in 0..4 {
        for u in 0..4 {
            assert_eq!(cylinder_prob(&blank, &[q], &[u], 1, &b).unwrap(), ratio(1, 4));
        }
    }
    let shifted = rescale_sca(&corpus::identity(), p(1, 1, 1), &b).unwrap();
    assert!(det_equal(&shifted, &corpus::shift(), &b).unwrap());
    assert!(!det_equal(&shifted, &corpus::identity(), &b).unwrap());
}

#[test]
fn rescale_matches_iterated_windows() {
    // oracle: run t steps on the unpacked window and pack the centre
    let b = Budget::default();
    let a = corpus::parity();
    let r = rescale_sca(&a, p(2, 1, 1), &b).unwrap();
    let nq = a.states().len();
    for w in all_words(nq, 4).into_iter().step_by(5) {
        let packed = pack_word(&w, 2, nq).unwrap();
        let k = r.radius();
        if packed.len() < 2 * k + 1 {
            continue;
        }
        let dist = pushforward_distribution(&r, &Word::at_origin(packed.clone()), 1, &b).unwrap();
        let flat = pushforward_distribution(&a, &Word::at_origin(w.clone()), 1, &b).unwrap();
        for (u, pr) in &dist.support {
            let cells = unpack_word(u, 2, nq);
            let direct: Rational = flat.support.iter().filter(|(v, _)| v.starts_with(&cells)).map(|(_, q)| q.clone()).sum();
            assert_eq!(*pr, direct);
        }
    }
}

#[test]
fn prime_factors_survive_rescaling() {
    let b = Budget::default();
    for (name, a) in corpus::named() {
        for par in [p(2, 1, 0), p(1, 2, 0), p(1, 1, -1)] {
            if let Ok(r) = rescale_sca(&a, par, &b) {
                assert_eq!(prime_set(&r), prime_set(&a), "{name} {par}");
            }
        }
    }
}

#[test]
fn restriction_examples() {
    let b = Budget::default();
    let parity = corpus::parity();
    let hash = Alphabet::new(["#"]).unwrap();
    let r = check_restriction(&parity, &Injection::by_tokens(&hash, parity.states()).unwrap(), &b).unwrap();
    assert_eq!(r.states().len(), 1);
    assert!(r.is_deterministic());
    let blank = corpus::blank_noise();
    let zero = Alphabet::new(["0"]).unwrap();
    let err = check_restriction(&blank, &Injection::by_tokens(&zero, blank.states()).unwrap(), &b).unwrap_err();
    assert!(matches!(err, Error::Stability { .. }));
    for (_, a) in corpus::named() {
        let r = check_restriction(&a, &Injection::identity(a.states()), &b).unwrap();
        assert_eq!(r, a);
    }
}

fn product_blank_identity() -> Sca {
    // (blank noise) × (identity) on {0,1}²
    let q = Alphabet::product(&[&Alphabet::numeric(2), &Alphabet::numeric(2)]).unwrap();
    Sca::from_fn(q, Alphabet::numeric(2), &[0], &[0], &Budget::default(), |c, s| s[0] * 2 + c[0] % 2).unwrap()
}

#[test]
fn projection_examples() {
    let b = Budget::default();
    let prod = product_blank_identity();
    let first = Surjection::new(Alphabet::numeric(2), vec![0, 0, 1, 1]).unwrap();
    let proj = check_projection(&prod, &first, &b).unwrap();
    assert!(stochastic_equal(&proj, &corpus::blank_noise(), 1, &b).unwrap());
    let second = Surjection::new(Alphabet::numeric(2), vec![0, 1, 0, 1]).unwrap();
    let proj = check_projection(&prod, &second, &b).unwrap();
    assert!(det_equal(&proj, &corpus::identity(), &b).unwrap());
    for (_, a) in corpus::named() {
        let r = check_projection(&a, &Surjection::identity(a.states()), &b).unwrap();
        assert_eq!(r.states(), a.states());
        if a.ell() <= 5 {
            assert!(stochastic_equal(&a, &r, 1, &b).unwrap());
        }
    }
    // collapsing the host's pairs onto Q mixes phases
    let host = cfca_host(&corpus::parity(), &b).unwrap().host;
    let nq = 3;
    let map: Vec<Sym> = (0..host.states().len()).map(|s| if s < nq { s } else { (s - nq) / 2 }).collect();
    let pi = Surjection::new(corpus::parity().states().clone(), map).unwrap();
    assert!(matches!(check_projection(&host, &pi, &b), Err(Error::Compatibility { .. })));
}

#[test]
fn restriction_and_projection_commute_on_product() {
    // restrict to {(0,0),(1,0)} then project on the first component, or the other way round
    let b = Budget::default();
    let prod = product_blank_identity();
    let sub = Alphabet::new(["(00)", "(10)"]).unwrap();
    let inj = Injection::by_tokens(&sub, prod.states()).unwrap();
    let restricted = check_restriction(&prod, &inj, &b).unwrap();
    let pi = Surjection::new(Alphabet::numeric(2), vec![0, 1]).unwrap();
    let one = check_projection(&restricted, &pi, &b).unwrap();
    let first = Surjection::new(Alphabet::numeric(2), vec![0, 0, 1, 1]).unwrap();
    let other = check_projection(&prod, &first, &b).unwrap();
    assert!(stochastic_equal(&one, &other, 1, &b).unwrap());
}

#[test]
fn host_simulates_parity_in_two_steps() {
    let b = Budget::default();
    let parity = corpus::parity();
    let h = cfca_host(&parity, &b).unwrap();
    assert_eq!(h.host.states().len(), 9);
    let trim = Trim { injection: Some(h.injection.clone()), surjection: None };
    assert!(simulates(&parity, &h.host, unit(), p(1, 2, 0), &trim, Mode::S, &b).unwrap());
    assert!(simulates(&parity, &h.host, unit(), p(1, 2, 0), &trim, Mode::N, &b).unwrap());
    // one step of the host leaves Q
    assert!(matches!(trimmed(&h.host, unit(), &trim, &b), Err(Error::Stability { .. })));
}

#[test]
fn host_of_blank_noise_and_deterministic() {
    let b = Budget::default();
    for a in [corpus::blank_noise(), corpus::xor_ca(), corpus::biased_noise()] {
        let h = cfca_host(&a, &b).unwrap();
        assert_eq!(h.host.states().len(), a.states().len() * (1 + a.random().len()));
        let trim = Trim { injection: Some(h.injection.clone()), surjection: None };
        assert!(simulates(&a, &h.host, unit(), p(1, 2, 0), &trim, Mode::S, &b).unwrap());
        if a.is_deterministic() {
            let square = trimmed(&h.host, p(1, 2, 0), &trim, &b).unwrap();
            assert!(det_equal(&square, &a, &b).unwrap());
        }
    }
}

#[test]
fn prime_incompatible_never_simulates() {
    let b = Budget::default();
    let three = corpus::random_sca(5, 2, 3, &[0], &[0]);
    assert!(!three.is_deterministic());
    assert!(!simulates(&corpus::blank_noise(), &three, unit(), unit(), &Trim::default(), Mode::S, &b).unwrap());
    let bounds = SearchBounds { max_m: 2, max_t: 2, max_shift: 1 };
    let out = search_simulation(&corpus::blank_noise(), &three, &bounds, Mode::S, &[], &b).unwrap();
    assert!(matches!(out, SearchOutcome::NotFoundWithinBounds { precheck: Some(_), .. }));
}

#[test]
fn search_finds_rescaled_copy() {
    let b = Budget::default();
    let a = corpus::xor_noise();
    let big = rescale_sca(&a, p(2, 1, 0), &b).unwrap();
    let bounds = SearchBounds { max_m: 2, max_t: 1, max_shift: 0 };
    match search_simulation(&a, &big, &bounds, Mode::S, &[], &b).unwrap() {
        SearchOutcome::Found(w) => assert_eq!(w.pa, p(2, 1, 0)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn search_finds_host_square() {
    let b = Budget::default();
    let parity = corpus::parity();
    let h = cfca_host(&parity, &b).unwrap();
    let bounds = SearchBounds { max_m: 2, max_t: 2, max_shift: 0 };
    match search_simulation(&parity, &h.host, &bounds, Mode::S, &[], &b).unwrap() {
        SearchOutcome::Found(w) => {
            assert_eq!(w.pb.t, 2);
            assert!(w.trim.injection.is_some());
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn ideals_on_witnesses() {
    // simulated by something deterministic (resp. noisy) means deterministic (resp. noisy)
    let b = Budget::default();
    let bounds = SearchBounds { max_m: 1, max_t: 2, max_shift: 1 };
    let names = ["blank_noise", "xor_noise", "identity", "shift", "xor_ca", "constant_zero"];
    for x in names {
        for y in names {
            let (a, c) = (corpus::by_name(x).unwrap(), corpus::by_name(y).unwrap());
            if let SearchOutcome::Found(w) = search_simulation(&a, &c, &bounds, Mode::N, &[], &b).unwrap() {
                if c.is_deterministic() {
                    assert!(a.is_deterministic(), "{x} by {y} ({w:?})");
                }
                if is_noisy(&c, &b).unwrap().answer {
                    assert!(is_noisy(&a, &b).unwrap().answer, "{x} by {y}");
                }
            }
        }
    }
}

#[test]
fn transitivity_on_a_chain() {
    // xor_noise ⊑ rescale(xor_noise, 2) ⊑ rescale(rescale(xor_noise, 2), 1, 2): composed parameters
    let b = Budget::default();
    let a = corpus::xor_noise();
    let b1 = rescale_sca(&a, p(2, 1, 0), &b).unwrap();
    let b2 = rescale_sca(&b1, p(1, 2, 0), &b).unwrap();
    let none = Trim::default();
    assert!(simulates(&a, &b1, p(2, 1, 0), unit(), &none, Mode::S, &b).unwrap());
    assert!(simulates(&b1, &b2, p(1, 2, 0), unit(), &none, Mode::S, &b).unwrap());
    assert!(simulates(&a, &b2, p(2, 2, 0), unit(), &none, Mode::S, &b).unwrap());
}

#[test]
fn coupling_examples() {
    let b = Budget::default();
    let (blank, xor) = (corpus::blank_noise(), corpus::xor_noise());
    let CouplingOutcome::Coupled(t) = build_finite_coupling(&blank, &xor, &[0], 0, &b).unwrap() else { panic!() };
    assert_eq!(t.entries, vec![("0".into(), "0".into(), "1/2".into()), ("1".into(), "1".into(), "1/2".into())]);
    assert!(t.marginals_uniform);
    assert_eq!(t.equal_output_mass, "1/1");
    let CouplingOutcome::Coupled(t) = build_finite_coupling(&blank, &xor, &[1], 0, &b).unwrap() else { panic!() };
    assert_eq!(t.entries, vec![("0".into(), "1".into(), "1/2".into()), ("1".into(), "0".into(), "1/2".into())]);
    match build_finite_coupling(&blank, &corpus::biased_noise(), &[0], 0, &b).unwrap() {
        CouplingOutcome::Infeasible { output, left, right } => {
            assert_eq!(output, "0");
            assert_eq!((left.as_str(), right.as_str()), ("1/2", "2/3"));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn coupling_feasible_iff_distributions_agree() {
    let b = Budget::default();
    let pairs = [
        (corpus::blank_noise(), corpus::xor_noise()),
        (corpus::blank_noise(), corpus::biased_noise()),
        (corpus::identity(), corpus::xor_ca()),
    ];
    for (x, y) in pairs {
        let equal = stochastic_equal(&x, &y, 1, &b).unwrap();
        let k = x.radius().max(y.radius());
        for n in 0..=1 {
            for w in all_words(2, 2 * n + 1 + 2 * k) {
                let lhs = pushforward_distribution(&x, &Word::at_origin(w.clone()), 1, &b);
                let rhs = pushforward_distribution(&y, &Word::at_origin(w.clone()), 1, &b);
                let out = build_finite_coupling(&x, &y, &w, n, &b).unwrap();
                let feasible = matches!(out, CouplingOutcome::Coupled(_));
                if let (Ok(l), Ok(r)) = (lhs, rhs) {
                    if x.radius() == y.radius() {
                        assert_eq!(feasible, l.support == r.support);
                    }
                }
                if equal {
                    assert!(feasible);
                }
                if let CouplingOutcome::Coupled(t) = out {
                    assert!(t.marginals_uniform);
                    assert_eq!(t.equal_output_mass, "1/1");
                }
            }
        }
    }
}

#[test]
fn gadgets() {
    let b = Budget::default();
    let lift = gadget(GadgetKind::SurjectivityLift, &corpus::identity(), &b).unwrap();
    assert!(stochastic_equal(&lift, &corpus::blank_noise(), 1, &b).unwrap());
    assert!(is_noisy(&lift, &b).unwrap().answer);
    let lift0 = gadget(GadgetKind::SurjectivityLift, &corpus::constant_zero(), &b).unwrap();
    assert!(!is_noisy(&lift0, &b).unwrap().answer);
    assert!(matches!(gadget(GadgetKind::SquareNoise, &corpus::blank_noise(), &b), Err(Error::NotDeterministic)));
}

#[test]
fn square_noise_of_xor_is_uniform_after_two_steps() {
    let b = Budget::default();
    let g = gadget(GadgetKind::SquareNoise, &corpus::xor_ca(), &b).unwrap();
    assert!(g.is_cfca());
    let g2 = iterate_sca(&g, 2, &b).unwrap();
    let nq = g.states().len();
    let k = g2.radius();
    for w in all_words(nq, 2 * k + 2).into_iter().step_by(7) {
        let d = pushforward_distribution(&g2, &Word::at_origin(w), 1, &b).unwrap();
        let expect = ratio(1, (nq * nq) as i64);
        assert_eq!(d.support.len(), nq * nq);
        assert!(d.support.values().all(|p| *p == expect));
    }
}

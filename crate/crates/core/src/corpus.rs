//! Named automata used throughout the documentation and the tests.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alphabet::{Alphabet, Sym};
use crate::budget::Budget;
use crate::ppt_pfa::Pfa;
use crate::rational::ratio;
use crate::sca::Sca;

fn bits() -> Alphabet {
    Alphabet::numeric(2)
}

fn build(
    states: Alphabet,
    random: Alphabet,
    v: &[i64],
    vp: &[i64],
    rule: impl FnMut(&[Sym], &[Sym]) -> Sym,
) -> Sca {
    Sca::from_fn(states, random, v, vp, &Budget::default(), rule).expect("corpus automaton")
}

/// `F(c, s) = s` over `{0,1}`.
pub fn blank_noise() -> Sca {
    build(bits(), bits(), &[0], &[0], |_, s| s[0])
}

/// `G(c, s) = c + s mod 2`; same stochastic global function as [`blank_noise`].
pub fn xor_noise() -> Sca {
    build(bits(), bits(), &[0], &[0], |c, s| (c[0] + s[0]) % 2)
}

/// `f(c, s) = s mod 2` with `R = {0,1,2}`: outputs 0 with probability 2/3.
pub fn biased_noise() -> Sca {
    build(bits(), Alphabet::numeric(3), &[0], &[0], |_, s| s[0] % 2)
}

/// The identity over the given state tokens.
pub fn identity_over(states: Alphabet) -> Sca {
    build(states, Alphabet::numeric(1), &[0], &[0], |c, _| c[0])
}

/// The identity over `{0,1}`.
pub fn identity() -> Sca {
    identity_over(bits())
}

/// The shift `σ_1`: every cell copies its right neighbor.
pub fn shift() -> Sca {
    build(bits(), Alphabet::numeric(1), &[1], &[0], |c, _| c[0])
}

/// The constant-0 automaton over `{0,1}`.
pub fn constant_zero() -> Sca {
    build(bits(), Alphabet::numeric(1), &[0], &[0], |_, _| 0)
}

/// `f(c_{-1}, c_0) = c_{-1} xor c_0`, deterministic.
pub fn xor_ca() -> Sca {
    build(bits(), Alphabet::numeric(1), &[-1, 0], &[0], |c, _| c[0] ^ c[1])
}

/// Replaces each `{0,1}`-block between two `#` by a uniform word of even parity.
/// `Q = {#,0,1}`, `R = {0,1}`, `V = {-1,0,1}`, `V' = {-1,0}`.
pub fn parity() -> Sca {
    let q = Alphabet::new(["#", "0", "1"]).unwrap();
    const HASH: Sym = 0;
    build(q, bits(), &[-1, 0, 1], &[-1, 0], |c, s| {
        // states 1 and 2 carry the bits 0 and 1
        let bit = |b: Sym| b + 1;
        match (c[0] == HASH, c[1] == HASH, c[2] == HASH) {
            (_, true, _) => HASH,
            (true, false, true) => bit(0),
            (true, false, false) => bit(s[1]),
            (false, false, true) => bit(s[0]),
            (false, false, false) => bit((s[0] + s[1]) % 2),
        }
    })
}

const LEFT: Sym = 0;
const STAY: Sym = 1;
const RIGHT: Sym = 2;

/// Particles on `{0,1}` with random moves `{←, ·, →}` and radius 2. A particle
/// moves when the target cell is empty and no other particle targets it.
pub fn particle() -> Sca {
    let moves = Alphabet::new(["←", "·", "→"]).unwrap();
    let hood = [-2, -1, 0, 1, 2];
    build(bits(), moves, &hood, &hood, |c, s| {
        let (l2, l1, c0, r1, r2) = (0, 1, 2, 3, 4);
        let occupied = |i: usize| c[i] == 1;
        if occupied(c0) {
            let stays = match s[c0] {
                STAY => true,
                RIGHT => occupied(r1) || (occupied(r2) && s[r2] == LEFT),
                _ => occupied(l1) || (occupied(l2) && s[l2] == RIGHT),
            };
            stays as Sym
        } else {
            let from_left = occupied(l1) && s[l1] == RIGHT;
            let from_right = occupied(r1) && s[r1] == LEFT;
            (from_left != from_right) as Sym
        }
    })
}

/// Correlation-free automaton on `{0,1}` with neighborhood `{-5..6}` whose square
/// conserves the number of 1s while the automaton itself does not.
pub fn fig1_cfca() -> Sca {
    let hood: Vec<i64> = (-5..=6).collect();
    let patterns: [(&str, Option<Sym>); 4] = [
        ("0000011000**", Some(0)),
        ("**0000001000", Some(1)),
        ("*0000011000*", None),
        ("**0001001000", Some(0)),
    ];
    build(bits(), bits(), &hood, &[0], |c, s| {
        for (p, out) in &patterns {
            let hit = p.bytes().zip(c).all(|(b, &x)| b == b'*' || (b - b'0') as Sym == x);
            if hit {
                return out.unwrap_or(s[0]);
            }
        }
        c[5]
    })
}

/// A rule table filled from a seeded ChaCha8 stream.
pub fn random_sca(seed: u64, states: usize, random: usize, v: &[i64], vp: &[i64]) -> Sca {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    build(Alphabet::numeric(states), Alphabet::numeric(random), v, vp, |_, _| rng.gen_range(0..states))
}

/// A random deterministic automaton with neighborhood `{-1,0,1}`.
pub fn random_deterministic(seed: u64, states: usize) -> Sca {
    random_sca(seed, states, 1, &[-1, 0, 1], &[0])
}

/// A random deterministic automaton with neighborhood `{-1,0,1}` that permutes
/// its left cell for every fixed pair of the other two, hence surjective.
pub fn random_permutive(seed: u64, states: usize) -> Sca {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let perms: Vec<Vec<Sym>> = (0..states * states)
        .map(|_| {
            let mut p: Vec<Sym> = (0..states).collect();
            p.shuffle(&mut rng);
            p
        })
        .collect();
    build(Alphabet::numeric(states), Alphabet::numeric(1), &[-1, 0, 1], &[0], |c, _| {
        perms[c[1] * states + c[2]][c[0]]
    })
}

/// The labeled corpus: name and automaton.
pub fn named() -> Vec<(&'static str, Sca)> {
    vec![
        ("blank_noise", blank_noise()),
        ("xor_noise", xor_noise()),
        ("biased_noise", biased_noise()),
        ("identity", identity()),
        ("shift", shift()),
        ("constant_zero", constant_zero()),
        ("xor_ca", xor_ca()),
        ("parity", parity()),
        ("particle", particle()),
        ("fig1_cfca", fig1_cfca()),
        ("ppt_loop", ppt_loop()),
        ("ppt_uniform", ppt_uniform()),
    ]
}

/// Looks up a corpus automaton by name.
pub fn by_name(name: &str) -> Option<Sca> {
    named().into_iter().find(|(n, _)| *n == name).map(|(_, a)| a)
}

fn pfa(letters: &[&str], states: &[&str], finals: Vec<bool>, m: Vec<Vec<Vec<(i64, i64)>>>) -> Pfa {
    let m = m.into_iter().map(|a| a.into_iter().map(|r| r.into_iter().map(|(n, d)| ratio(n, d)).collect()).collect()).collect();
    Pfa::new(Alphabet::new(letters.iter().copied()).unwrap(), Alphabet::new(states.iter().copied()).unwrap(), 0, finals, m)
        .expect("corpus PFA")
}

/// One state, always accepting.
pub fn pfa_one_state() -> Pfa {
    pfa(&["a"], &["q0"], vec![true], vec![vec![vec![(1, 1)]]])
}

/// `M_a(q₀,q₀) = M_a(q₀,q₁) = 1/2`, `q₁` absorbing, `F = {q₀}`.
pub fn pfa_half() -> Pfa {
    pfa(&["a"], &["q0", "q1"], vec![true, false], vec![vec![vec![(1, 2), (1, 2)], vec![(0, 1), (1, 1)]]])
}

/// Two letters and three states with thirds.
pub fn pfa_thirds() -> Pfa {
    pfa(
        &["a", "b"],
        &["p", "q", "r"],
        vec![false, true, true],
        vec![
            vec![vec![(1, 3), (2, 3), (0, 1)], vec![(0, 1), (1, 3), (2, 3)], vec![(1, 1), (0, 1), (0, 1)]],
            vec![vec![(0, 1), (0, 1), (1, 1)], vec![(1, 2), (1, 2), (0, 1)], vec![(1, 3), (1, 3), (1, 3)]],
        ],
    )
}

pub fn named_pfas() -> Vec<(&'static str, Pfa)> {
    vec![("pfa_one_state", pfa_one_state()), ("pfa_half", pfa_half()), ("pfa_thirds", pfa_thirds())]
}

fn xyzo(dist: [(i64, i64); 4]) -> Sca {
    let q = Alphabet::new(["x", "y", "z", "o"]).unwrap();
    Sca::from_local_distribution(q, &[0], &Budget::default(), |_| dist.iter().map(|&(n, d)| ratio(n, d)).collect())
        .expect("corpus automaton")
}

/// Radius 0 over `{x,y,z,o}`, every cell drawn from `x:1/4, y:1/2, z:1/4`.
pub fn ppt_loop() -> Sca {
    xyzo([(1, 4), (1, 2), (1, 4), (0, 1)])
}

/// Radius 0 over `{x,y,z,o}`, every cell uniform.
pub fn ppt_uniform() -> Sca {
    xyzo([(1, 4); 4])
}

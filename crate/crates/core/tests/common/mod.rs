#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use sca_core::alphabet::index_word;
use sca_core::{Rational, Sca, Sym};

/// Applies the rule directly, one layer after another, reading every offset by hand.
pub fn run_by_hand(a: &Sca, u: &[Sym], layers: &[Vec<Sym>]) -> Vec<Sym> {
    let k = a.radius() as i64;
    let mut cur: Vec<Sym> = u.to_vec();
    let mut start = 0i64; // absolute position of cur[0]
    for layer in layers {
        let mut next = Vec::new();
        for x in (start + k)..(start + cur.len() as i64 - k) {
            let q: Vec<Sym> = a.neighborhood().iter().map(|o| cur[(x + o - start) as usize]).collect();
            let r: Vec<Sym> = a.random_neighborhood().iter().map(|o| layer[(x + o) as usize]).collect();
            next.push(a.rule(&q, &r));
        }
        cur = next;
        start += k;
    }
    cur
}

/// Output distribution of `t` steps by enumerating every `t`-layer random word on the window.
pub fn brute_distribution(a: &Sca, u: &[Sym], t: usize) -> BTreeMap<Vec<Sym>, Rational> {
    let nr = a.random().len();
    let n = u.len();
    let total = nr.pow((n * t) as u32);
    let mut counts: BTreeMap<Vec<Sym>, u64> = BTreeMap::new();
    for idx in 0..total {
        let flat = index_word(idx, nr, n * t);
        let layers: Vec<Vec<Sym>> = flat.chunks(n).map(|c| c.to_vec()).collect();
        *counts.entry(run_by_hand(a, u, &layers)).or_insert(0) += 1;
    }
    counts
        .into_iter()
        .map(|(w, c)| (w, Rational::new(BigInt::from(c), BigInt::from(total))))
        .collect()
}

pub fn brute_cylinder(a: &Sca, u: &[Sym], target: &[Sym], t: usize) -> Rational {
    brute_distribution(a, u, t).get(target).cloned().unwrap_or_else(|| Rational::from_integer(0.into()))
}

/// Every word of length `len` over `base` symbols.
pub fn all_words(base: usize, len: usize) -> Vec<Vec<Sym>> {
    (0..base.pow(len as u32)).map(|i| index_word(i, base, len)).collect()
}

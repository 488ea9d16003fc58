//! Exact and sampled dynamics on finite windows and periodic configurations.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alphabet::{index_word, Alphabet, Sym};
use crate::budget::{pow128, Budget, Meter};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::sca::Sca;

/// A finite word placed at an absolute position.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word {
    pub symbols: Vec<Sym>,
    pub offset: i64,
}

impl Word {
    pub fn new(symbols: Vec<Sym>, offset: i64) -> Self {
        Word { symbols, offset }
    }

    pub fn at_origin(symbols: Vec<Sym>) -> Self {
        Word { symbols, offset: 0 }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// The bi-infinite configuration repeating `period`; cell `phase` holds `period[0]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PeriodicConfig {
    pub period: Vec<Sym>,
    pub phase: i64,
}

impl PeriodicConfig {
    pub fn new(period: Vec<Sym>) -> Self {
        PeriodicConfig { period, phase: 0 }
    }

    pub fn cell(&self, z: i64) -> Sym {
        let p = self.period.len() as i64;
        self.period[(z - self.phase).rem_euclid(p) as usize]
    }
}

/// Exact distribution of the output words on a window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordDistribution {
    pub offset: i64,
    pub support: BTreeMap<Vec<Sym>, Rational>,
}

impl WordDistribution {
    pub fn prob(&self, word: &[Sym]) -> Rational {
        self.support.get(word).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn total(&self) -> Rational {
        self.support.values().fold(Rational::zero(), |acc, p| acc + p)
    }
}

/// Rows of a sampled space-time diagram, optionally with the random rows that produced them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceTime {
    pub rows: Vec<PeriodicConfig>,
    pub randomness_rows: Option<Vec<PeriodicConfig>>,
}

fn check_window(a: &Sca, len: usize, t: usize) -> Result<()> {
    let min = 2 * a.radius() * t + 1;
    if len < min {
        return Err(Error::WindowTooShort { len, min });
    }
    Ok(())
}

/// One application of the rule on a window: output cell `j` is the rule at position `j + k`.
pub fn apply_window(a: &Sca, u: &Word, v: &Word) -> Result<Word> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch(format!(
            "state window has length {}, random window {}",
            u.len(),
            v.len()
        )));
    }
    check_window(a, u.len(), 1)?;
    let k = a.radius();
    let out = (0..u.len() - 2 * k).map(|j| a.rule_at(&u.symbols, &v.symbols, j + k)).collect();
    Ok(Word::new(out, u.offset + k as i64))
}

/// Runs `layers.len()` steps on `q`; every layer is aligned with the original window.
pub(crate) fn run_layers(a: &Sca, q: &[Sym], layers: &[&[Sym]]) -> Vec<Sym> {
    let k = a.radius();
    let mut cur = q.to_vec();
    let mut shift = 0;
    for layer in layers {
        let r = &layer[shift..shift + cur.len()];
        cur = (0..cur.len() - 2 * k).map(|j| a.rule_at(&cur, r, j + k)).collect();
        shift += k;
    }
    cur
}

/// One step on periodic configurations; the result has the lcm of the two periods.
pub fn step_periodic(
    a: &Sca,
    c: &PeriodicConfig,
    s: &PeriodicConfig,
    budget: &Budget,
) -> Result<PeriodicConfig> {
    if c.period.is_empty() || s.period.is_empty() {
        return Err(Error::InvalidArgument("empty period".into()));
    }
    let p = c.period.len().lcm(&s.period.len());
    if p as u64 > budget.max_period {
        return Err(Error::budget("period", p, budget.max_period as u128));
    }
    let k = a.radius() as i64;
    let out = (0..p as i64)
        .map(|x| {
            let z = c.phase + x;
            let q: Vec<Sym> = (-k..=k).map(|d| c.cell(z + d)).collect();
            let r: Vec<Sym> = (-k..=k).map(|d| s.cell(z + d)).collect();
            a.rule_at(&q, &r, k as usize)
        })
        .collect();
    Ok(PeriodicConfig { period: out, phase: c.phase })
}

/// The `t`-th iterate as a single automaton with random alphabet `R^t`.
pub fn iterate_sca(a: &Sca, t: usize, budget: &Budget) -> Result<Sca> {
    if t == 0 {
        return Err(Error::InvalidArgument("t must be positive".into()));
    }
    let k = a.radius();
    let kt = (k * t) as i64;
    let hood: Vec<i64> = (-kt..=kt).collect();
    let layers: Vec<&Alphabet> = std::iter::repeat(a.random()).take(t).collect();
    let random = Alphabet::product(&layers)?;
    let nr = a.random().len();
    let mut out = Sca::from_fn(a.states().clone(), random, &hood, &hood, budget, |q, r| {
        let split: Vec<Vec<Sym>> = (0..t)
            .map(|layer| r.iter().map(|&x| index_word(x, nr, t)[layer]).collect())
            .collect();
        let refs: Vec<&[Sym]> = split.iter().map(Vec::as_slice).collect();
        run_layers(a, q, &refs)[0]
    })?;
    if let Some(v) = a.values() {
        out = out.with_values(v.to_vec())?;
    }
    Ok(out)
}

/// Groups of non-deterministic output cells that share random cells.
struct Cluster {
    cells: Vec<usize>,
    randoms: Vec<usize>,
}

fn clusters(a: &Sca, nondet: &[usize]) -> Vec<Cluster> {
    let k = a.radius();
    let vp = a.random_neighborhood();
    let (lo, hi) = (vp.first().copied().unwrap_or(0), vp.last().copied().unwrap_or(0));
    let mut out: Vec<Cluster> = Vec::new();
    let mut last_hi = i64::MIN;
    for &x in nondet {
        let p = (x + k) as i64;
        let fp: Vec<usize> = vp.iter().map(|&o| (p + o) as usize).collect();
        if !out.is_empty() && p + lo <= last_hi {
            let c = out.last_mut().unwrap();
            c.cells.push(x);
            c.randoms.extend(fp);
        } else {
            out.push(Cluster { cells: vec![x], randoms: fp });
        }
        last_hi = last_hi.max(p + hi);
    }
    for c in &mut out {
        c.randoms.sort_unstable();
        c.randoms.dedup();
    }
    out
}

/// Exact one-step output distribution of the window `w`, restricted to outputs
/// that agree with `target` when one is given.
fn step_distribution(
    a: &Sca,
    w: &[Sym],
    target: Option<&[Sym]>,
    meter: &mut Meter,
) -> Result<Vec<(Vec<Sym>, Rational)>> {
    let k = a.radius();
    let out_len = w.len() - 2 * k;
    let nr = a.random().len();
    let mut base = vec![0; out_len];
    let mut nondet = Vec::new();
    for (x, slot) in base.iter_mut().enumerate() {
        match a.det_output_at(w, x + k) {
            Some(o) => {
                if let Some(t) = target {
                    if t[x] != o {
                        return Ok(Vec::new());
                    }
                }
                *slot = o;
            }
            None => nondet.push(x),
        }
    }
    let mut acc: Vec<(Vec<Sym>, Rational)> = vec![(base, Rational::one())];
    let mut r = vec![0; w.len()];
    for cluster in clusters(a, &nondet) {
        let m = cluster.randoms.len();
        let total = pow128(nr, m).ok_or_else(|| Error::budget("random assignments", "overflow", 0))?;
        meter.spend(total)?;
        let mut counts: BTreeMap<Vec<Sym>, u64> = BTreeMap::new();
        for idx in 0..total as usize {
            for (pos, s) in cluster.randoms.iter().zip(index_word(idx, nr, m)) {
                r[*pos] = s;
            }
            let outs: Vec<Sym> = cluster.cells.iter().map(|&x| a.rule_at(w, &r, x + k)).collect();
            if let Some(t) = target {
                if cluster.cells.iter().zip(&outs).any(|(&x, &o)| t[x] != o) {
                    continue;
                }
            }
            *counts.entry(outs).or_insert(0) += 1;
        }
        if counts.is_empty() {
            return Ok(Vec::new());
        }
        let denom = BigInt::from(total);
        let mut next = Vec::with_capacity(acc.len() * counts.len());
        for (word, p) in &acc {
            for (outs, c) in &counts {
                let mut word = word.clone();
                for (&x, &o) in cluster.cells.iter().zip(outs) {
                    word[x] = o;
                }
                next.push((word, p * Rational::new(BigInt::from(*c), denom.clone())));
            }
        }
        meter.spend(next.len() as u128)?;
        acc = next;
    }
    Ok(acc)
}

fn propagate(
    a: &Sca,
    u: &[Sym],
    t: usize,
    meter: &mut Meter,
) -> Result<BTreeMap<Vec<Sym>, Rational>> {
    let mut dist: BTreeMap<Vec<Sym>, Rational> = BTreeMap::new();
    dist.insert(u.to_vec(), Rational::one());
    for _ in 0..t {
        let mut next: BTreeMap<Vec<Sym>, Rational> = BTreeMap::new();
        for (w, p) in &dist {
            for (out, q) in step_distribution(a, w, None, meter)? {
                *next.entry(out).or_insert_with(Rational::zero) += p * q;
            }
        }
        dist = next;
    }
    Ok(dist)
}

/// The complete distribution of `F^t` on the window `u`; the output sits at offset `u.offset + k t`.
pub fn pushforward_distribution(
    a: &Sca,
    u: &Word,
    t: usize,
    budget: &Budget,
) -> Result<WordDistribution> {
    if t == 0 {
        return Err(Error::InvalidArgument("t must be positive".into()));
    }
    check_window(a, u.len(), t)?;
    let mut meter = Meter::new("random-word enumeration", budget.max_enum);
    let support = propagate(a, &u.symbols, t, &mut meter)?;
    Ok(WordDistribution { offset: u.offset + (a.radius() * t) as i64, support })
}

/// `Pr{F^t(u) = target}`, exactly.
pub fn cylinder_prob(
    a: &Sca,
    u: &[Sym],
    target: &[Sym],
    t: usize,
    budget: &Budget,
) -> Result<Rational> {
    if t == 0 {
        return Err(Error::InvalidArgument("t must be positive".into()));
    }
    check_window(a, u.len(), t)?;
    let expected = u.len() - 2 * a.radius() * t;
    if target.len() != expected {
        return Err(Error::LengthMismatch(format!(
            "target has length {}, expected {expected}",
            target.len()
        )));
    }
    let mut meter = Meter::new("random-word enumeration", budget.max_enum);
    let before = propagate(a, u, t - 1, &mut meter)?;
    let mut total = Rational::zero();
    for (w, p) in &before {
        for (_, q) in step_distribution(a, w, Some(target), &mut meter)? {
            total += p * q;
        }
    }
    Ok(total)
}

/// Draws `t` random layers for the window `u` and returns the output.
pub fn sample_window<G: Rng>(a: &Sca, u: &[Sym], t: usize, rng: &mut G) -> Vec<Sym> {
    let nr = a.random().len();
    let layers: Vec<Vec<Sym>> =
        (0..t).map(|_| (0..u.len()).map(|_| rng.gen_range(0..nr)).collect()).collect();
    let refs: Vec<&[Sym]> = layers.iter().map(Vec::as_slice).collect();
    run_layers(a, u, &refs)
}

/// Seeded space-time diagram. Random rows share the period of `c` and are drawn
/// cell by cell from a ChaCha8 stream seeded with `seed`.
pub fn sample_diagram(
    a: &Sca,
    c: &PeriodicConfig,
    steps: usize,
    seed: u64,
    budget: &Budget,
) -> Result<SpaceTime> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nr = a.random().len();
    let mut rows = vec![c.clone()];
    let mut randomness = Vec::with_capacity(steps);
    for _ in 0..steps {
        let s = PeriodicConfig {
            period: (0..c.period.len()).map(|_| rng.gen_range(0..nr)).collect(),
            phase: c.phase,
        };
        let next = step_periodic(a, rows.last().unwrap(), &s, budget)?;
        rows.push(next);
        randomness.push(s);
    }
    Ok(SpaceTime { rows, randomness_rows: Some(randomness) })
}

/// Outcome of [`conservation_check`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Conservation {
    Conserving,
    /// `window` is the padded input; `outputs` holds one output whose sum differs
    /// from `input_sum` and, when it exists, a second output with yet another sum.
    Violation { window: Word, input_sum: u64, outputs: Vec<(Word, u64)> },
}

/// Checks that `F^t` preserves the sum of values on every finite configuration
/// whose support spans at most `support_bound` cells.
pub fn conservation_check(
    a: &Sca,
    support_bound: usize,
    t: usize,
    budget: &Budget,
) -> Result<Conservation> {
    if t == 0 {
        return Err(Error::InvalidArgument("t must be positive".into()));
    }
    let values = a
        .values()
        .ok_or_else(|| Error::InvalidArgument("states carry no integer values".into()))?;
    let bg = values
        .iter()
        .position(|&v| v == 0)
        .ok_or_else(|| Error::InvalidArgument("no state has value 0".into()))?;
    let sum = |w: &[Sym]| -> u64 { w.iter().map(|&s| values[s]).sum() };
    let k = a.radius();
    let q = a.states().len();

    let quiet = vec![bg; 2 * k + 1];
    let mut meter = Meter::new("conservation enumeration", budget.max_enum);
    let dist = propagate(a, &quiet, 1, &mut meter)?;
    if let Some((out, _)) = dist.iter().find(|(o, _)| o[0] != bg) {
        return Ok(Conservation::Violation {
            window: Word::new(quiet, -(k as i64)),
            input_sum: 0,
            outputs: vec![(Word::new(out.clone(), 0), sum(out))],
        });
    }

    let pad = 2 * k * t;
    for len in 1..=support_bound {
        budget.check_enum("finite configurations", pow128(q, len))?;
        for idx in 0..q.pow(len as u32) {
            let w = index_word(idx, q, len);
            if w[0] == bg || w[len - 1] == bg {
                continue;
            }
            let mut window = vec![bg; pad];
            window.extend_from_slice(&w);
            window.extend(std::iter::repeat(bg).take(pad));
            let input_sum = sum(&w);
            let dist = propagate(a, &window, t, &mut meter)?;
            let bad = dist.keys().find(|o| sum(o) != input_sum);
            if let Some(bad) = bad {
                let bad_sum = sum(bad);
                let offset = -((k * t) as i64);
                let mut outputs = vec![(Word::new(bad.clone(), offset), bad_sum)];
                if let Some(other) = dist.keys().find(|o| sum(o) != bad_sum) {
                    outputs.push((Word::new(other.clone(), offset), sum(other)));
                }
                return Ok(Conservation::Violation {
                    window: Word::new(window, -(pad as i64)),
                    input_sum,
                    outputs,
                });
            }
        }
    }
    Ok(Conservation::Conserving)
}

//! Weighted De Bruijn automata `A_F` and `B_F`, exact evaluation and
//! equivalence of rational weighted automata.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::alphabet::{index_word, product_token, Alphabet, Sym};
use crate::budget::{pow128, Budget};
use crate::error::{Error, Result};
use crate::rational::{format_rational, prime_factors, Rational};
use crate::sca::Sca;
use crate::semantics::iterate_sca;

pub type Letter = u32;

/// A finite automaton with rational weights.
///
/// Transitions are stored per source state, sorted by letter then target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedAutomaton {
    letters: Vec<String>,
    names: Vec<String>,
    initial: Vec<(usize, Rational)>,
    trans: Vec<Vec<(Letter, usize, Rational)>>,
    fin: Vec<Rational>,
}

/// Linear representation `(α, (M_a)_a, η)` with sparse matrices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearRep {
    pub initial: Vec<Rational>,
    /// `matrices[a]` lists the nonzero entries `(row, column, weight)`.
    pub matrices: Vec<Vec<(usize, usize, Rational)>>,
    pub fin: Vec<Rational>,
}

type Sparse = Vec<(usize, Rational)>;

impl WeightedAutomaton {
    /// Builds an automaton from explicit parts. Zero weights are dropped.
    pub fn new(
        letters: Vec<String>,
        names: Vec<String>,
        initial: Vec<(usize, Rational)>,
        transitions: Vec<(usize, Letter, usize, Rational)>,
        fin: Vec<Rational>,
    ) -> Result<Self> {
        let n = names.len();
        if fin.len() != n {
            return Err(Error::LengthMismatch(format!("{} final weights for {n} states", fin.len())));
        }
        let mut trans = vec![Vec::new(); n];
        for (from, a, to, w) in transitions {
            if from >= n || to >= n || a as usize >= letters.len() {
                return Err(Error::InvalidArgument(format!("transition ({from},{a},{to}) out of range")));
            }
            if !w.is_zero() {
                trans[from].push((a, to, w));
            }
        }
        for t in &mut trans {
            t.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        }
        if initial.iter().any(|(s, _)| *s >= n) {
            return Err(Error::InvalidArgument("initial state out of range".into()));
        }
        let initial = initial.into_iter().filter(|(_, w)| !w.is_zero()).collect();
        Ok(WeightedAutomaton { letters, names, initial, trans, fin })
    }

    pub fn letters(&self) -> &[String] {
        &self.letters
    }

    pub fn num_states(&self) -> usize {
        self.names.len()
    }

    pub fn state_name(&self, s: usize) -> &str {
        &self.names[s]
    }

    pub fn initial(&self) -> &[(usize, Rational)] {
        &self.initial
    }

    pub fn final_weight(&self, s: usize) -> &Rational {
        &self.fin[s]
    }

    pub fn transitions(&self, s: usize) -> &[(Letter, usize, Rational)] {
        &self.trans[s]
    }

    pub fn num_transitions(&self) -> usize {
        self.trans.iter().map(Vec::len).sum()
    }

    fn on_letter(&self, s: usize, a: Letter) -> &[(Letter, usize, Rational)] {
        let t = &self.trans[s];
        let lo = t.partition_point(|x| x.0 < a);
        let hi = t.partition_point(|x| x.0 <= a);
        &t[lo..hi]
    }

    /// At most one initial state and one transition per (state, letter).
    pub fn is_deterministic(&self) -> bool {
        self.initial.len() <= 1 && self.trans.iter().all(|t| t.windows(2).all(|p| p[0].0 != p[1].0))
    }

    /// Sum over accepting paths of the product of weights.
    pub fn weight_letters(&self, word: &[Letter]) -> Rational {
        let mut v: BTreeMap<usize, Rational> = self.initial.iter().cloned().collect();
        for &a in word {
            let mut next: BTreeMap<usize, Rational> = BTreeMap::new();
            for (s, c) in &v {
                for (_, to, w) in self.on_letter(*s, a) {
                    *next.entry(*to).or_insert_with(Rational::zero) += c * w;
                }
            }
            next.retain(|_, c| !c.is_zero());
            v = next;
            if v.is_empty() {
                break;
            }
        }
        v.iter().map(|(s, c)| c * &self.fin[*s]).sum()
    }

    pub fn letter_index(&self, token: &str) -> Option<Letter> {
        self.letters.iter().position(|l| l == token).map(|i| i as Letter)
    }

    pub fn format_letters(&self, word: &[Letter]) -> String {
        word.iter().map(|&a| self.letters[a as usize].as_str()).collect::<Vec<_>>().join(" ")
    }

    pub fn linear_representation(&self) -> LinearRep {
        let n = self.num_states();
        let mut initial = vec![Rational::zero(); n];
        for (s, w) in &self.initial {
            initial[*s] += w;
        }
        let mut matrices = vec![Vec::new(); self.letters.len()];
        for (s, t) in self.trans.iter().enumerate() {
            for (a, to, w) in t {
                matrices[*a as usize].push((s, *to, w.clone()));
            }
        }
        LinearRep { initial, matrices, fin: self.fin.clone() }
    }

    /// Quotient by the coarsest forward lumping: states are merged when they
    /// have equal final weight and equal summed weight into every class on
    /// every letter. The weight of every word is preserved.
    pub fn lumped(&self) -> WeightedAutomaton {
        let n = self.num_states();
        let mut ids: HashMap<&Rational, usize> = HashMap::new();
        let mut class: Vec<usize> = self
            .fin
            .iter()
            .map(|f| {
                let next = ids.len();
                *ids.entry(f).or_insert(next)
            })
            .collect();
        let mut count = ids.len();
        let signature = |class: &[usize], s: usize| -> Vec<(Letter, usize, Rational)> {
            let mut acc: BTreeMap<(Letter, usize), Rational> = BTreeMap::new();
            for (a, to, w) in &self.trans[s] {
                *acc.entry((*a, class[*to])).or_insert_with(Rational::zero) += w;
            }
            acc.into_iter().filter(|(_, w)| !w.is_zero()).map(|((a, c), w)| (a, c, w)).collect()
        };
        loop {
            let mut ids: HashMap<(usize, Vec<(Letter, usize, Rational)>), usize> = HashMap::new();
            let next: Vec<usize> = (0..n)
                .map(|s| {
                    let key = (class[s], signature(&class, s));
                    let fresh = ids.len();
                    *ids.entry(key).or_insert(fresh)
                })
                .collect();
            let done = ids.len() == count;
            count = ids.len();
            class = next;
            if done {
                break;
            }
        }
        let mut rep = vec![usize::MAX; count];
        for s in 0..n {
            if rep[class[s]] == usize::MAX {
                rep[class[s]] = s;
            }
        }
        let mut initial: BTreeMap<usize, Rational> = BTreeMap::new();
        for (s, w) in &self.initial {
            *initial.entry(class[*s]).or_insert_with(Rational::zero) += w;
        }
        let mut trans = Vec::new();
        for (c, &r) in rep.iter().enumerate() {
            for (a, to, w) in signature(&class, r) {
                trans.push((c, a, to, w));
            }
        }
        WeightedAutomaton::new(
            self.letters.clone(),
            rep.iter().map(|&r| self.names[r].clone()).collect(),
            initial.into_iter().collect(),
            trans,
            rep.iter().map(|&r| self.fin[r].clone()).collect(),
        )
        .expect("quotient is well formed")
    }

    /// Debugging table: `init`/`final` lines, then one `from letter to weight` line per transition.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (s, w) in &self.initial {
            let _ = writeln!(out, "init\t{}\t{}", self.names[*s], format_rational(w));
        }
        for (s, f) in self.fin.iter().enumerate() {
            if !f.is_zero() {
                let _ = writeln!(out, "final\t{}\t{}", self.names[s], format_rational(f));
            }
        }
        for (s, t) in self.trans.iter().enumerate() {
            for (a, to, w) in t {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}",
                    self.names[s],
                    self.letters[*a as usize],
                    self.names[*to],
                    format_rational(w)
                );
            }
        }
        out
    }
}

/// Letters of `Q ∪ (Q×Q)`: the states first, then the pairs `(a,b)` at `|Q| + a|Q| + b`.
pub fn pair_letters(states: &Alphabet) -> Vec<String> {
    let mut out: Vec<String> = states.tokens().to_vec();
    for a in states.tokens() {
        for b in states.tokens() {
            out.push(product_token(&[a, b]));
        }
    }
    out
}

pub fn pair_letter(nq: usize, input: Sym, output: Sym) -> Letter {
    (nq + input * nq + output) as Letter
}

/// A word `q_1…q_{ℓ-1} (q_ℓ,u_1)(q_{ℓ+1},u_2)…` read by the De Bruijn automata.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairWord {
    pub prologue: Vec<Sym>,
    pub body: Vec<(Sym, Sym)>,
}

impl PairWord {
    /// Pairs the window `v` with the output `u` it should produce, centered:
    /// `|v| = |u| + ℓ - 1`.
    pub fn encode(v: &[Sym], u: &[Sym], ell: usize) -> Result<PairWord> {
        if ell == 0 || v.len() != u.len() + ell - 1 {
            return Err(Error::LengthMismatch(format!(
                "window of length {} and output of length {} do not fit ℓ = {ell}",
                v.len(),
                u.len()
            )));
        }
        let p = ell - 1;
        Ok(PairWord {
            prologue: v[..p].to_vec(),
            body: v[p..].iter().copied().zip(u.iter().copied()).collect(),
        })
    }

    pub fn letters(&self, nq: usize) -> Vec<Letter> {
        self.prologue
            .iter()
            .map(|&q| q as Letter)
            .chain(self.body.iter().map(|&(a, b)| pair_letter(nq, a, b)))
            .collect()
    }
}

/// Weight of a pair word in an automaton over `Q ∪ (Q×Q)`.
pub fn weight_of(w: &WeightedAutomaton, m: &PairWord) -> Rational {
    let nq = nq_of(w);
    w.weight_letters(&m.letters(nq))
}

fn nq_of(w: &WeightedAutomaton) -> usize {
    // |Σ| = n + n², solve for n
    let len = w.letters.len();
    (0..=len).find(|n| n + n * n >= len).unwrap_or(0)
}

fn level_offsets(base: usize, levels: usize, budget: &Budget) -> Result<Vec<usize>> {
    let mut offsets = vec![0usize];
    let mut total: u128 = 0;
    for j in 0..levels {
        let size = pow128(base, j);
        total = size.and_then(|s| total.checked_add(s)).unwrap_or(u128::MAX);
        budget.check_states("automaton states", (total != u128::MAX).then_some(total))?;
        offsets.push(total as usize);
    }
    Ok(offsets)
}

fn final_vector(n: usize, ell: usize) -> Vec<Rational> {
    (0..n).map(|s| if s > 0 || ell == 1 { Rational::one() } else { Rational::zero() }).collect()
}

/// `A_F` at the automaton's own `ℓ = 2k + 1`.
pub fn weighted_debruijn(a: &Sca, budget: &Budget) -> Result<WeightedAutomaton> {
    weighted_debruijn_at(a, a.ell(), budget)
}

/// `A_F` reading windows of an odd length `ell ≥ 2k + 1`.
///
/// States are pairs `(q̄, r̄)` of equal length `j ≤ ℓ - 1`; the state id is
/// `offset_j + index(q̄)·|R|^j + index(r̄)`. Every transition weighs `1/|R|`.
/// All states but `i₀` are final, and `i₀` too when `ℓ = 1`.
pub fn weighted_debruijn_at(a: &Sca, ell: usize, budget: &Budget) -> Result<WeightedAutomaton> {
    check_ell(a, ell)?;
    let (nq, nr) = (a.states().len(), a.random().len());
    let p = ell - 1;
    let offsets = level_offsets(nq * nr, ell, budget)?;
    let n = offsets[ell];
    let w = Rational::new(BigInt::one(), BigInt::from(nr));
    let mut names = Vec::with_capacity(n);
    let mut trans = Vec::new();
    let rpow = |j: usize| nr.pow(j as u32);
    for j in 0..=p {
        for qi in 0..nq.pow(j as u32) {
            for ri in 0..rpow(j) {
                let qw = index_word(qi, nq, j);
                let rw = index_word(ri, nr, j);
                names.push(if j == 0 {
                    "i0".to_string()
                } else {
                    format!("({},{})", a.states().format_word(&qw), a.random().format_word(&rw))
                });
                let from = offsets[j] + qi * rpow(j) + ri;
                if j < p {
                    for q in 0..nq {
                        for r in 0..nr {
                            let to = offsets[j + 1] + (qi * nq + q) * rpow(j + 1) + ri * nr + r;
                            trans.push((from, q as Letter, to, w.clone()));
                        }
                    }
                    continue;
                }
                let mut qwin = qw.clone();
                qwin.push(0);
                let mut rwin = rw.clone();
                rwin.push(0);
                let (qm, rm) = (nq.pow(p.saturating_sub(1) as u32), rpow(p.saturating_sub(1)));
                for q in 0..nq {
                    qwin[p] = q;
                    for r in 0..nr {
                        rwin[p] = r;
                        let out = a.rule_at(&qwin, &rwin, p / 2);
                        let to = if p == 0 {
                            0
                        } else {
                            offsets[p] + ((qi % qm) * nq + q) * rpow(p) + (ri % rm) * nr + r
                        };
                        trans.push((from, pair_letter(nq, q, out), to, w.clone()));
                    }
                }
            }
        }
    }
    let fin = final_vector(n, ell);
    WeightedAutomaton::new(pair_letters(a.states()), names, vec![(0, Rational::one())], trans, fin)
}

fn check_ell(a: &Sca, ell: usize) -> Result<()> {
    if ell < a.ell() || ell % 2 == 0 {
        return Err(Error::InvalidArgument(format!(
            "window length {ell} must be odd and at least {}",
            a.ell()
        )));
    }
    Ok(())
}

/// `B_F` for a correlation-free automaton at its own `ℓ`.
pub fn cfca_weighted(a: &Sca, budget: &Budget) -> Result<WeightedAutomaton> {
    cfca_weighted_at(a, a.ell(), budget)
}

/// `B_F`: states `Q^j` for `j ≤ ℓ - 1`, prologue weights 1, body transitions
/// `(q̄, (q, γ)) → q̄_{2..}q` weighted by the local probability of `γ`.
pub fn cfca_weighted_at(a: &Sca, ell: usize, budget: &Budget) -> Result<WeightedAutomaton> {
    if !a.is_cfca() {
        return Err(Error::NotCfca);
    }
    check_ell(a, ell)?;
    let nq = a.states().len();
    let nr = a.random().len();
    let p = ell - 1;
    let offsets = level_offsets(nq, ell, budget)?;
    let n = offsets[ell];
    let mut names = Vec::with_capacity(n);
    let mut trans = Vec::new();
    for j in 0..=p {
        for qi in 0..nq.pow(j as u32) {
            let qw = index_word(qi, nq, j);
            names.push(if j == 0 { "i0".to_string() } else { a.states().format_word(&qw) });
            let from = offsets[j] + qi;
            if j < p {
                for q in 0..nq {
                    trans.push((from, q as Letter, offsets[j + 1] + qi * nq + q, Rational::one()));
                }
                continue;
            }
            let mut qwin = qw.clone();
            qwin.push(0);
            let qm = nq.pow(p.saturating_sub(1) as u32);
            for q in 0..nq {
                qwin[p] = q;
                let mut counts = vec![0u64; nq];
                let mut rwin = vec![0; ell];
                for r in 0..nr {
                    rwin[p / 2] = r;
                    counts[a.rule_at(&qwin, &rwin, p / 2)] += 1;
                }
                let to = if p == 0 { 0 } else { offsets[p] + (qi % qm) * nq + q };
                for (out, c) in counts.into_iter().enumerate() {
                    if c > 0 {
                        let w = Rational::new(BigInt::from(c), BigInt::from(nr));
                        trans.push((from, pair_letter(nq, q, out), to, w));
                    }
                }
            }
        }
    }
    let fin = final_vector(n, ell);
    WeightedAutomaton::new(pair_letters(a.states()), names, vec![(0, Rational::one())], trans, fin)
}

fn check_same_letters(w1: &WeightedAutomaton, w2: &WeightedAutomaton) -> Result<()> {
    if w1.letters != w2.letters {
        return Err(Error::AlphabetMismatch(format!("{:?} vs {:?}", w1.letters, w2.letters)));
    }
    Ok(())
}

fn axpy(v: &Sparse, c: &Rational, b: &Sparse) -> Sparse {
    // v - c·b
    let mut out = Vec::with_capacity(v.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < v.len() || j < b.len() {
        if j == b.len() || (i < v.len() && v[i].0 < b[j].0) {
            out.push(v[i].clone());
            i += 1;
        } else if i == v.len() || b[j].0 < v[i].0 {
            out.push((b[j].0, -(c * &b[j].1)));
            j += 1;
        } else {
            let x = &v[i].1 - c * &b[j].1;
            if !x.is_zero() {
                out.push((v[i].0, x));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Row-echelon basis keyed by the lowest nonzero coordinate, pivots normalized to 1.
#[derive(Default)]
struct Echelon {
    rows: BTreeMap<usize, Sparse>,
}

impl Echelon {
    /// Reduces `v`; inserts and returns true when it was independent.
    fn insert(&mut self, mut v: Sparse) -> bool {
        while let Some((p, c)) = v.first().cloned() {
            match self.rows.get(&p) {
                Some(b) => v = axpy(&v, &c, b),
                None => {
                    let inv = c.recip();
                    let row = v.into_iter().map(|(i, x)| (i, x * &inv)).collect();
                    self.rows.insert(p, row);
                    return true;
                }
            }
        }
        false
    }
}

/// A word on which two automata disagree, with both weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub word: Vec<Letter>,
    pub left: Rational,
    pub right: Rational,
}

/// Decides `w1 ≡ w2` by growing a basis of reachable vectors of the direct
/// sum; returns a shortest-first disagreeing word when they differ.
pub fn wa_counterexample(w1: &WeightedAutomaton, w2: &WeightedAutomaton) -> Result<Option<Counterexample>> {
    check_same_letters(w1, w2)?;
    let n1 = w1.num_states();
    let eta: Vec<Rational> = w1.fin.iter().cloned().chain(w2.fin.iter().map(|x| -x)).collect();
    let step = |v: &Sparse, a: Letter| -> Sparse {
        let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
        for (s, c) in v {
            let (aut, shift) = if *s < n1 { (w1, 0) } else { (w2, n1) };
            for (_, to, w) in aut.on_letter(s - shift, a) {
                *acc.entry(to + shift).or_insert_with(Rational::zero) += c * w;
            }
        }
        acc.into_iter().filter(|(_, c)| !c.is_zero()).collect()
    };
    let mut start: BTreeMap<usize, Rational> = BTreeMap::new();
    for (s, w) in &w1.initial {
        *start.entry(*s).or_insert_with(Rational::zero) += w;
    }
    for (s, w) in &w2.initial {
        *start.entry(s + n1).or_insert_with(Rational::zero) += w;
    }
    let start: Sparse = start.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    let mut basis = Echelon::default();
    let mut queue: VecDeque<(Sparse, Vec<Letter>)> = VecDeque::new();
    let letters = w1.letters.len() as Letter;
    let mut consider = |v: Sparse, word: Vec<Letter>, queue: &mut VecDeque<(Sparse, Vec<Letter>)>| {
        let dot: Rational = v.iter().map(|(i, c)| c * &eta[*i]).sum();
        if !dot.is_zero() {
            return Some(Counterexample {
                left: w1.weight_letters(&word),
                right: w2.weight_letters(&word),
                word,
            });
        }
        if basis.insert(v.clone()) {
            queue.push_back((v, word));
        }
        None
    };
    if let Some(c) = consider(start, Vec::new(), &mut queue) {
        return Ok(Some(c));
    }
    while let Some((v, word)) = queue.pop_front() {
        for a in 0..letters {
            let next = step(&v, a);
            if next.is_empty() {
                continue;
            }
            let mut w = word.clone();
            w.push(a);
            if let Some(c) = consider(next, w, &mut queue) {
                return Ok(Some(c));
            }
        }
    }
    Ok(None)
}

/// True iff both automata give every word the same weight.
pub fn wa_equivalent(w1: &WeightedAutomaton, w2: &WeightedAutomaton) -> Result<bool> {
    Ok(wa_counterexample(w1, w2)?.is_none())
}

/// Outcome of the prime factor test on two automata with the same states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum PrimeCheck {
    /// Both are non-deterministic and `|R|` sizes share no prime: never equal.
    Incompatible,
    /// A prime is shared; nothing follows.
    Compatible,
    /// One side is deterministic; the test does not apply.
    SomeDeterministic,
}

/// Prime factors of `|R|`.
pub fn prime_set(a: &Sca) -> Vec<u64> {
    prime_factors(a.random().len() as u64)
}

pub fn prime_factor_precheck(a: &Sca, b: &Sca) -> PrimeCheck {
    if a.is_deterministic() || b.is_deterministic() {
        return PrimeCheck::SomeDeterministic;
    }
    let pb = prime_set(b);
    if prime_set(a).iter().any(|p| pb.contains(p)) {
        PrimeCheck::Compatible
    } else {
        PrimeCheck::Incompatible
    }
}

/// Full outcome of [`stochastic_equal_report`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EqualityReport {
    pub equal: bool,
    pub precheck: PrimeCheck,
    /// Distinguishing pair word rendered with the automaton letters.
    pub witness: Option<String>,
    pub left: Option<Rational>,
    pub right: Option<Rational>,
    /// Sizes of the two compared automata after lumping.
    pub states: (usize, usize),
}

/// Brings `b` onto the state order of `a`, failing when the token sets differ.
pub fn align_states(a: &Sca, b: &Sca) -> Result<Sca> {
    b.reorder_states(a.states())
}

/// Decides `S_F^t = S_G^t` through `A_{F^t}` and `A_{G^t}` at a common window length.
pub fn stochastic_equal_report(a: &Sca, b: &Sca, t: usize, budget: &Budget) -> Result<EqualityReport> {
    if t == 0 {
        return Err(Error::InvalidArgument("t must be positive".into()));
    }
    let b = align_states(a, b)?;
    let (at, bt) = if t == 1 {
        (a.clone(), b)
    } else {
        (iterate_sca(a, t, budget)?, iterate_sca(&b, t, budget)?)
    };
    let precheck = prime_factor_precheck(&at, &bt);
    if precheck == PrimeCheck::Incompatible {
        return Ok(EqualityReport {
            equal: false,
            precheck,
            witness: None,
            left: None,
            right: None,
            states: (0, 0),
        });
    }
    let ell = at.ell().max(bt.ell());
    let wa = weighted_debruijn_at(&at, ell, budget)?.lumped();
    let wb = weighted_debruijn_at(&bt, ell, budget)?.lumped();
    let cex = wa_counterexample(&wa, &wb)?;
    Ok(EqualityReport {
        equal: cex.is_none(),
        precheck,
        witness: cex.as_ref().map(|c| wa.format_letters(&c.word)),
        left: cex.as_ref().map(|c| c.left.clone()),
        right: cex.map(|c| c.right),
        states: (wa.num_states(), wb.num_states()),
    })
}

pub fn stochastic_equal(a: &Sca, b: &Sca, t: usize, budget: &Budget) -> Result<bool> {
    Ok(stochastic_equal_report(a, b, t, budget)?.equal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::rational::ratio;

    #[test]
    fn state_counts() {
        let b = Budget::default();
        assert_eq!(weighted_debruijn(&corpus::parity(), &b).unwrap().num_states(), 43);
        let blank = weighted_debruijn(&corpus::blank_noise(), &b).unwrap();
        assert_eq!(blank.num_states(), 1);
        assert!(blank.final_weight(0).is_one());
        assert_eq!(blank.transitions(0).len(), 4);
    }

    #[test]
    fn one_letter_weights() {
        let b = Budget::default();
        let blank = weighted_debruijn(&corpus::blank_noise(), &b).unwrap();
        let m = PairWord { prologue: vec![], body: vec![(0, 0)] };
        assert_eq!(weight_of(&blank, &m), ratio(1, 2));
        let biased = cfca_weighted(&corpus::biased_noise(), &b).unwrap();
        assert_eq!(weight_of(&biased, &m), ratio(2, 3));
        assert!(biased.is_deterministic());
    }

    #[test]
    fn lumping_keeps_weights() {
        let b = Budget::default();
        let p = weighted_debruijn(&corpus::parity(), &b).unwrap();
        let l = p.lumped();
        assert!(l.num_states() < p.num_states());
        assert!(wa_equivalent(&p, &l).unwrap());
    }

    #[test]
    fn text_export() {
        let b = Budget::default();
        let t = cfca_weighted(&corpus::blank_noise(), &b).unwrap().to_text();
        assert!(t.contains("i0\t(01)\ti0\t1/2"));
    }
}

//! Probabilistic finite automata, their encoding as an SCA, and the pattern
//! probability threshold problem for patterns `x·yⁿ·z`.

use std::collections::{BTreeMap, HashSet};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::alphabet::{index_word, product_token, Alphabet, Sym};
use crate::budget::{pow128, Budget, Meter};
use crate::error::{Error, Result};
use crate::rational::{format_rational, lcm_denominators, parse_rational, pow, Rational};
use crate::sca::Sca;
use crate::semantics::cylinder_prob;

/// The empty word is accepted exactly when the initial state is final.
pub const EMPTY_WORD_ACCEPTED_IFF_INITIAL_FINAL: bool = true;

/// `(Q, A, (M_a), I, F)` with row-stochastic rational matrices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pfa {
    alphabet: Alphabet,
    states: Alphabet,
    initial: Sym,
    finals: Vec<bool>,
    /// `matrices[a][q][q']`.
    matrices: Vec<Vec<Vec<Rational>>>,
}

/// JSON form of a PFA.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PfaDocument {
    pub alphabet: Vec<String>,
    pub states: Vec<String>,
    pub initial: String,
    #[serde(rename = "final")]
    pub finals: Vec<String>,
    /// Letter to matrix, either as rows or as one row-major list.
    pub matrices: BTreeMap<String, MatrixDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixDoc {
    Rows(Vec<Vec<String>>),
    Flat(Vec<String>),
}

impl Pfa {
    pub fn new(
        alphabet: Alphabet,
        states: Alphabet,
        initial: Sym,
        finals: Vec<bool>,
        matrices: Vec<Vec<Vec<Rational>>>,
    ) -> Result<Pfa> {
        let n = states.len();
        if initial >= n || finals.len() != n || matrices.len() != alphabet.len() {
            return Err(Error::InvalidArgument("inconsistent PFA dimensions".into()));
        }
        for (a, m) in matrices.iter().enumerate() {
            if m.len() != n || m.iter().any(|row| row.len() != n) {
                return Err(Error::InvalidArgument(format!("matrix of {} is not {n}×{n}", alphabet.token(a))));
            }
            for (q, row) in m.iter().enumerate() {
                if row.iter().any(|x| x.is_negative() || *x > Rational::one()) {
                    return Err(Error::InvalidArgument(format!(
                        "entry outside [0,1] in row {} of {}",
                        states.token(q),
                        alphabet.token(a)
                    )));
                }
                if row.iter().sum::<Rational>() != Rational::one() {
                    return Err(Error::InvalidArgument(format!(
                        "row {} of {} does not sum to 1",
                        states.token(q),
                        alphabet.token(a)
                    )));
                }
            }
        }
        Ok(Pfa { alphabet, states, initial, finals, matrices })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn states(&self) -> &Alphabet {
        &self.states
    }

    pub fn initial(&self) -> Sym {
        self.initial
    }

    pub fn is_final(&self, q: Sym) -> bool {
        self.finals[q]
    }

    pub fn entry(&self, a: Sym, q: Sym, r: Sym) -> &Rational {
        &self.matrices[a][q][r]
    }

    pub fn from_document(doc: &PfaDocument) -> Result<Pfa> {
        let alphabet = Alphabet::new(doc.alphabet.clone())?;
        let states = Alphabet::new(doc.states.clone())?;
        let lookup = |t: &str| {
            states.index_of(t).ok_or_else(|| Error::UnknownSymbol {
                symbol: t.to_string(),
                alphabet: states.tokens().join(","),
            })
        };
        let initial = lookup(&doc.initial)?;
        let mut finals = vec![false; states.len()];
        for f in &doc.finals {
            finals[lookup(f)?] = true;
        }
        let n = states.len();
        let mut matrices = vec![Vec::new(); alphabet.len()];
        for (letter, m) in &doc.matrices {
            let a = alphabet.index_of(letter).ok_or_else(|| Error::UnknownSymbol {
                symbol: letter.clone(),
                alphabet: alphabet.tokens().join(","),
            })?;
            let flat: Vec<&String> = match m {
                MatrixDoc::Rows(rows) => rows.iter().flatten().collect(),
                MatrixDoc::Flat(v) => v.iter().collect(),
            };
            if flat.len() != n * n {
                return Err(Error::syntax(format!("matrices.{letter}"), format!("expected {} entries", n * n)));
            }
            let values = flat.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>()?;
            matrices[a] = values.chunks(n).map(|c| c.to_vec()).collect();
        }
        if let Some(a) = matrices.iter().position(Vec::is_empty) {
            return Err(Error::syntax("matrices", format!("missing matrix for {}", alphabet.token(a))));
        }
        Pfa::new(alphabet, states, initial, finals, matrices)
    }

    pub fn to_document(&self) -> PfaDocument {
        PfaDocument {
            alphabet: self.alphabet.tokens().to_vec(),
            states: self.states.tokens().to_vec(),
            initial: self.states.token(self.initial).to_string(),
            finals: (0..self.states.len()).filter(|&q| self.finals[q]).map(|q| self.states.token(q).to_string()).collect(),
            matrices: (0..self.alphabet.len())
                .map(|a| {
                    let rows = self.matrices[a].iter().map(|r| r.iter().map(format_rational).collect()).collect();
                    (self.alphabet.token(a).to_string(), MatrixDoc::Rows(rows))
                })
                .collect(),
        }
    }
}

pub fn parse_pfa(text: &str) -> Result<Pfa> {
    let doc: PfaDocument = serde_json::from_str(text).map_err(|e| Error::syntax(format!("line {}", e.line()), e.to_string()))?;
    Pfa::from_document(&doc)
}

/// `P(u)`: the total weight of accepting paths.
pub fn pfa_accept_prob(p: &Pfa, u: &[Sym]) -> Result<Rational> {
    if let Some(&a) = u.iter().find(|&&a| a >= p.alphabet.len()) {
        return Err(Error::UnknownSymbol { symbol: a.to_string(), alphabet: p.alphabet.tokens().join(",") });
    }
    let n = p.states.len();
    let mut v = vec![Rational::zero(); n];
    v[p.initial] = Rational::one();
    for &a in u {
        let mut next = vec![Rational::zero(); n];
        for q in 0..n {
            if v[q].is_zero() {
                continue;
            }
            for r in 0..n {
                next[r] += &v[q] * &p.matrices[a][q][r];
            }
        }
        v = next;
    }
    Ok((0..n).filter(|&q| p.finals[q]).map(|q| v[q].clone()).sum())
}

/// Tokens added to the PFA alphabet by [`encode_pfa`].
pub const START: &str = "↦";
pub const ARROW: &str = "→";
pub const CHECK: &str = "✓";
pub const BOTTOM: &str = "⊥";

/// The SCA on `A ⊔ {↦, →, ✓, ⊥}` whose one-step probability of `↦→ⁿ✓` over
/// `↦u✓` is `P(u)/|Q|ⁿ`. Random symbols are `(q, i)` with `1 ≤ i ≤ m`.
pub fn encode_pfa(p: &Pfa, budget: &Budget) -> Result<Sca> {
    let na = p.alphabet.len();
    let nq = p.states.len();
    let entries = p.matrices.iter().flatten().flatten();
    let m = lcm_denominators(entries).to_usize().ok_or_else(|| Error::budget("random alphabet", "huge", u128::MAX))?;
    let mut tokens: Vec<String> = p.alphabet.tokens().to_vec();
    tokens.extend([START, ARROW, CHECK, BOTTOM].map(String::from));
    let states = Alphabet::new(tokens)?;
    let (start, arrow, check, bottom) = (na, na + 1, na + 2, na + 3);
    let random = Alphabet::new(
        (0..nq).flat_map(|q| (1..=m).map(move |i| (q, i))).map(|(q, i)| product_token(&[p.states.token(q), &i.to_string()])),
    )?;
    // τ(a, q, i): fill the i's in order, m·M_a(q, q') of them for each q'
    let mut tau = vec![vec![vec![0usize; m]; nq]; na];
    for a in 0..na {
        for q in 0..nq {
            let mut i = 0;
            for r in 0..nq {
                let count = (&p.matrices[a][q][r] * Rational::from_integer(BigInt::from(m))).to_integer();
                for _ in 0..count.to_usize().unwrap_or(0) {
                    tau[a][q][i] = r;
                    i += 1;
                }
            }
        }
    }
    Sca::from_fn(states, random, &[-1, 0], &[-1, 0], budget, |c, s| {
        let (c_l, c0) = (c[0], c[1]);
        let (q_l, i_l) = (s[0] / m, s[0] % m);
        let q0 = s[1] / m;
        if c0 == start {
            start
        } else if c0 < na {
            let gamma = if c_l == start { p.initial } else { q_l };
            if q0 == tau[c0][gamma][i_l] {
                arrow
            } else {
                bottom
            }
        } else if c0 == check && p.finals[q_l] {
            check
        } else {
            bottom
        }
    })
}

/// `ϑ(n)` for the pattern `x·yⁿ·z`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Threshold {
    /// `α·λⁿ`.
    Exponential { alpha: Rational, lambda: Rational },
    /// `θ + c/(n+1)^d`.
    Superexponential { theta: Rational, c: Rational, d: u32 },
}

impl Threshold {
    pub fn exponential(alpha: Rational, lambda: Rational) -> Result<Threshold> {
        if !alpha.is_positive() || !lambda.is_positive() || lambda >= Rational::one() {
            return Err(Error::InvalidArgument("need α > 0 and 0 < λ < 1".into()));
        }
        Ok(Threshold::Exponential { alpha, lambda })
    }

    pub fn superexponential(theta: Rational, c: Rational, d: u32) -> Result<Threshold> {
        if theta.is_negative() || !c.is_positive() || d == 0 {
            return Err(Error::InvalidArgument("need θ ≥ 0, c > 0 and d ≥ 1".into()));
        }
        Ok(Threshold::Superexponential { theta, c, d })
    }

    /// `exp:alpha,lambda` or `sup:theta,c,d`.
    pub fn parse(text: &str) -> Result<Threshold> {
        let (kind, rest) = text.split_once(':').ok_or_else(|| Error::syntax("threshold", "expected exp:… or sup:…"))?;
        let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
        match (kind, parts.as_slice()) {
            ("exp", [a, l]) => Threshold::exponential(parse_rational(a)?, parse_rational(l)?),
            ("sup", [t, c, d]) => Threshold::superexponential(
                parse_rational(t)?,
                parse_rational(c)?,
                d.parse().map_err(|_| Error::syntax("threshold", "d must be a positive integer"))?,
            ),
            _ => Err(Error::syntax("threshold", format!("cannot read {text:?}"))),
        }
    }

    pub fn at(&self, n: usize) -> Rational {
        match self {
            Threshold::Exponential { alpha, lambda } => alpha * pow(lambda, n as u64),
            Threshold::Superexponential { theta, c, d } => {
                theta + c / Rational::from_integer(BigInt::from(n + 1).pow(*d))
            }
        }
    }

    /// `lim ϑ(n)`.
    pub fn limit(&self) -> Rational {
        match self {
            Threshold::Exponential { .. } => Rational::zero(),
            Threshold::Superexponential { theta, .. } => theta.clone(),
        }
    }
}

/// A pumpable certificate `γ·a·(l·a)^q·γ′`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LoopWitness {
    pub prefix: Vec<Sym>,
    pub anchor: Vec<Sym>,
    #[serde(rename = "loop")]
    pub loop_word: Vec<Sym>,
    pub suffix: Vec<Sym>,
    pub pumps: usize,
}

impl LoopWitness {
    /// The input window `γ·a·(l·a)^q·γ′`.
    pub fn word(&self) -> Vec<Sym> {
        let mut w = self.prefix.clone();
        w.extend(&self.anchor);
        for _ in 0..self.pumps {
            w.extend(&self.loop_word);
            w.extend(&self.anchor);
        }
        w.extend(&self.suffix);
        w
    }
}

/// A window whose image matches `x·yⁿ·z` with probability above `ϑ(n)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PptWitness {
    pub window: Vec<Sym>,
    pub n: usize,
    #[serde(serialize_with = "ser_rational")]
    pub probability: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub threshold: Rational,
    pub pumped: Option<LoopWitness>,
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

/// Answer of a PPT decision with what was explored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PptVerdict {
    pub answer: bool,
    pub witness: Option<PptWitness>,
    /// Largest `n` examined directly.
    pub horizon: usize,
    /// The constant `K` of the superexponential case.
    pub k: Option<u64>,
    /// Why the search could stop.
    pub reason: String,
}

/// The pattern `x·yⁿ·z`.
pub fn ppt_pattern(x: Sym, y: Sym, z: Sym, n: usize) -> Vec<Sym> {
    let mut p = vec![x];
    p.extend(std::iter::repeat(y).take(n));
    p.push(z);
    p
}

fn check_ppt_input(a: &Sca, x: Sym, y: Sym, z: Sym) -> Result<()> {
    let nq = a.states().len();
    if nq < 4 {
        return Err(Error::InvalidArgument("the pattern problem needs at least 4 states".into()));
    }
    if x >= nq || y >= nq || z >= nq || x == y || y == z || x == z {
        return Err(Error::InvalidArgument("x, y, z must be distinct states".into()));
    }
    Ok(())
}

/// Verifies a witness by exact enumeration.
pub fn recheck_ppt(a: &Sca, x: Sym, y: Sym, z: Sym, th: &Threshold, w: &PptWitness, budget: &Budget) -> Result<bool> {
    let p = cylinder_prob(a, &w.window, &ppt_pattern(x, y, z, w.n), 1, budget)?;
    Ok(p == w.probability && p > th.at(w.n))
}

/// De Bruijn graph on `Q^{ℓ-1}` with the weight of producing each output.
struct Debruijn {
    nq: usize,
    p: usize,
    n: usize,
    /// `weight[γ][s·|Q| + q]`: probability that window `s·q` outputs `γ`.
    weight: Vec<Vec<Rational>>,
}

impl Debruijn {
    fn new(a: &Sca, budget: &Budget) -> Result<Debruijn> {
        let nq = a.states().len();
        let p = a.ell() - 1;
        let n = pow128(nq, p);
        budget.check_states("De Bruijn states", n.and_then(|n| n.checked_mul(nq as u128)))?;
        let n = n.unwrap() as usize;
        let nr = a.random().len();
        let mut weight = vec![vec![Rational::zero(); n * nq]; nq];
        let k = p / 2;
        for idx in 0..n * nq {
            let win = index_word(idx, nq, p + 1);
            let hood: Vec<Sym> = a.neighborhood().iter().map(|o| win[(k as i64 + o) as usize]).collect();
            let counts = a.output_counts(&hood);
            let total: u64 = counts.iter().sum();
            debug_assert_eq!(total as usize, nr.pow(a.random_neighborhood().len() as u32));
            for (g, c) in counts.into_iter().enumerate() {
                weight[g][idx] = Rational::new(BigInt::from(c), BigInt::from(total));
            }
        }
        Ok(Debruijn { nq, p, n, weight })
    }

    fn next(&self, s: usize, q: usize) -> usize {
        if self.p == 0 {
            0
        } else {
            (s % (self.n / self.nq)) * self.nq + q
        }
    }

    fn w(&self, g: Sym, s: usize, q: usize) -> &Rational {
        &self.weight[g][s * self.nq + q]
    }
}

/// Best-weight layered paths: `best[s]` and the move that reached it.
type Layer = Vec<Option<(Rational, usize, Sym)>>;

fn relax(db: &Debruijn, prev: &Layer, g: Sym) -> Layer {
    let mut out: Layer = vec![None; db.n];
    for s in 0..db.n {
        let Some((w, _, _)) = &prev[s] else { continue };
        for q in 0..db.nq {
            let e = db.w(g, s, q);
            if e.is_zero() {
                continue;
            }
            let t = db.next(s, q);
            let cand = w * e;
            if out[t].as_ref().is_none_or(|(b, _, _)| cand > *b) {
                out[t] = Some((cand, s, q));
            }
        }
    }
    out
}

/// Decides the pattern problem for a correlation-free automaton at an
/// exponential threshold, through max-weight paths of `B_F`.
pub fn ppt_decide_cfca(a: &Sca, x: Sym, y: Sym, z: Sym, th: &Threshold, budget: &Budget) -> Result<PptVerdict> {
    if !a.is_cfca() {
        return Err(Error::NotCfca);
    }
    check_ppt_input(a, x, y, z)?;
    let Threshold::Exponential { lambda, .. } = th else {
        return Err(Error::InvalidArgument("the correlation-free procedure takes an exponential threshold".into()));
    };
    let db = Debruijn::new(a, budget)?;
    let v = db.n;
    let short = v + 1;
    budget.check_enum("layered search", Some((short as u128 + 1) * (v * db.nq) as u128))?;
    // layers[0]: after the x cell, from any prologue
    let start: Layer = (0..v).map(|s| Some((Rational::one(), s, 0))).collect();
    let mut layers = vec![relax(&db, &start, x)];
    for n in 1..=short {
        let ys = relax(&db, &layers[n - 1], y);
        layers.push(ys);
        let ends = relax(&db, &layers[n], z);
        if let Some((t, (w, _, _))) = best_of(&ends) {
            let bound = th.at(n);
            if w > bound {
                let window = backtrack(&db, &start, &layers, &ends, t, n);
                return Ok(PptVerdict {
                    answer: true,
                    witness: Some(PptWitness { window, n, probability: w, threshold: bound, pumped: None }),
                    horizon: n,
                    k: None,
                    reason: "short word above the threshold".into(),
                });
            }
        }
    }
    // useful vertices: reachable after x through y edges, and co-reachable to a z edge
    let dbr = &db;
    let y_edges = |s: usize| (0..dbr.nq).filter(move |&q| !dbr.w(y, s, q).is_zero()).map(move |q| (q, dbr.next(s, q)));
    let mut fwd = vec![false; v];
    let mut stack: Vec<usize> = (0..v).filter(|&s| layers[0][s].is_some()).collect();
    for &s in &stack {
        fwd[s] = true;
    }
    while let Some(s) = stack.pop() {
        for (_, t) in y_edges(s) {
            if !fwd[t] {
                fwd[t] = true;
                stack.push(t);
            }
        }
    }
    let mut bwd: Vec<bool> = (0..v).map(|s| (0..db.nq).any(|q| !db.w(z, s, q).is_zero())).collect();
    loop {
        let mut changed = false;
        for s in 0..v {
            if !bwd[s] && y_edges(s).any(|(_, t)| bwd[t]) {
                bwd[s] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    for s in (0..v).filter(|&s| fwd[s] && bwd[s]) {
        // max closed walks s → s of each length κ ≤ |Q|^{ℓ-1}
        let mut layer: Layer = vec![None; v];
        layer[s] = Some((Rational::one(), s, 0));
        let mut walks = vec![layer.clone()];
        for kappa in 1..=v {
            layer = relax(&db, &layer, y);
            walks.push(layer.clone());
            if let Some((c, _, _)) = &layer[s] {
                if *c > pow(lambda, kappa as u64) {
                    let cycle = backtrack_cells(&walks, s, kappa);
                    let w = pump_cfca(a, &db, &layers, x, y, z, th, s, cycle, c.clone(), budget)?;
                    return Ok(PptVerdict {
                        answer: true,
                        witness: Some(w),
                        horizon: short,
                        k: None,
                        reason: "loop with linear weight above λ".into(),
                    });
                }
            }
        }
    }
    Ok(PptVerdict {
        answer: false,
        witness: None,
        horizon: short,
        k: None,
        reason: format!("no short word up to n = {short} and no loop of linear weight above λ"),
    })
}

fn best_of(layer: &Layer) -> Option<(usize, (Rational, usize, Sym))> {
    let mut best: Option<(usize, (Rational, usize, Sym))> = None;
    for (t, e) in layer.iter().enumerate() {
        if let Some(e) = e {
            if best.as_ref().is_none_or(|(_, b)| e.0 > b.0) {
                best = Some((t, e.clone()));
            }
        }
    }
    best
}

/// Cells appended along a closed walk of length `kappa` ending at `s`.
fn backtrack_cells(walks: &[Layer], s: usize, kappa: usize) -> Vec<Sym> {
    let mut cells = Vec::with_capacity(kappa);
    let mut t = s;
    for j in (1..=kappa).rev() {
        let (_, prev, q) = walks[j][t].clone().unwrap();
        cells.push(q);
        t = prev;
    }
    cells.reverse();
    cells
}

/// Rebuilds the window of a layered best path ending with a z cell at `t`.
fn backtrack(db: &Debruijn, start: &Layer, layers: &[Layer], ends: &Layer, t: usize, n: usize) -> Vec<Sym> {
    let (_, mut s, q) = ends[t].clone().unwrap();
    let mut cells = vec![q];
    for j in (0..=n).rev() {
        let (_, prev, q) = layers[j][s].clone().unwrap();
        cells.push(q);
        s = prev;
    }
    let _ = start;
    let mut window = index_word(s, db.nq, db.p);
    cells.reverse();
    window.extend(cells);
    window
}

/// Best path (any length below `|Q|^{ℓ-1}`) from the x cell to `s`, and from `s` to a z cell.
#[allow(clippy::too_many_arguments)]
fn pump_cfca(
    a: &Sca,
    db: &Debruijn,
    layers: &[Layer],
    x: Sym,
    y: Sym,
    z: Sym,
    th: &Threshold,
    s: usize,
    cycle: Vec<Sym>,
    cycle_weight: Rational,
    budget: &Budget,
) -> Result<PptWitness> {
    let v = db.n;
    // prefix: the best layer j ≤ v reaching s
    let (mut best_j, mut best_w) = (usize::MAX, Rational::zero());
    for (j, layer) in layers.iter().enumerate().take(v + 1) {
        if let Some((w, _, _)) = &layer[s] {
            if *w > best_w {
                best_w = w.clone();
                best_j = j;
            }
        }
    }
    let mut prefix_cells = Vec::new();
    let mut t = s;
    for j in (0..=best_j).rev() {
        let (_, prev, q) = layers[j][t].clone().unwrap();
        prefix_cells.push(q);
        t = prev;
    }
    prefix_cells.reverse();
    let mut prologue = index_word(t, db.nq, db.p);
    prologue.extend(prefix_cells);
    // suffix: from s, j y cells then a z cell
    let mut layer: Layer = vec![None; v];
    layer[s] = Some((Rational::one(), s, 0));
    let mut sl = vec![layer.clone()];
    let mut best_suffix: Option<(Rational, usize, usize)> = None;
    for j in 0..=v {
        if j > 0 {
            layer = relax(db, &layer, y);
            sl.push(layer.clone());
        }
        let ends = relax(db, &layer, z);
        if let Some((t, (w, _, _))) = best_of(&ends) {
            if best_suffix.as_ref().is_none_or(|b| w > b.0) {
                best_suffix = Some((w, j, t));
            }
        }
    }
    let (sw, sj, st) = best_suffix.expect("s is co-reachable to z");
    let ends = relax(db, &sl[sj], z);
    let (_, mut u, zq) = ends[st].clone().unwrap();
    let mut suffix_cells = vec![zq];
    for j in (1..=sj).rev() {
        let (_, prev, q) = sl[j][u].clone().unwrap();
        suffix_cells.push(q);
        u = prev;
    }
    suffix_cells.reverse();
    let base = best_w * sw;
    let ys_fixed = best_j + sj;
    finish_pump(a, x, y, z, th, prologue, cycle, cycle_weight, suffix_cells, base, ys_fixed, db.p, budget)
}

/// Chooses the pump count and assembles the witness `γ·a·(l·a)^q·γ′`.
#[allow(clippy::too_many_arguments)]
fn finish_pump(
    a: &Sca,
    x: Sym,
    y: Sym,
    z: Sym,
    th: &Threshold,
    head: Vec<Sym>,
    cycle: Vec<Sym>,
    cycle_weight: Rational,
    tail: Vec<Sym>,
    base: Rational,
    ys_fixed: usize,
    p: usize,
    budget: &Budget,
) -> Result<PptWitness> {
    // repeat the cycle until it is at least as long as the anchor
    let reps = if cycle.is_empty() { 1 } else { p.div_ceil(cycle.len()).max(1) };
    let turn: Vec<Sym> = cycle.iter().copied().cycle().take(cycle.len() * reps).collect();
    let turn_weight = pow(&cycle_weight, reps as u64);
    let kappa = turn.len();
    let ok = |q: usize| base.clone() * pow(&turn_weight, q as u64) > th.at(ys_fixed + q * kappa);
    let mut q = 1usize;
    let mut meter = Meter::new("pump count", budget.max_enum);
    // doubling then bisection; the ratio grows with q for exponential thresholds and
    // the threshold decreases towards a limit below the weight otherwise
    while !ok(q) {
        meter.spend(1)?;
        q *= 2;
    }
    let (mut lo, mut hi) = (q / 2, q);
    while lo + 1 < hi {
        let mid = (lo + hi) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let q = if hi == 1 || !ok(lo) || lo == 0 { hi } else { lo };
    let split = head.len() - p;
    let lw = LoopWitness {
        prefix: head[..split].to_vec(),
        anchor: head[split..].to_vec(),
        loop_word: turn[..kappa - p].to_vec(),
        suffix: tail,
        pumps: q,
    };
    let window = lw.word();
    let n = ys_fixed + q * kappa;
    let probability = cylinder_prob(a, &window, &ppt_pattern(x, y, z, n), 1, budget)?;
    Ok(PptWitness { window, n, probability, threshold: th.at(n), pumped: Some(lw) })
}

/// Largest `K` computed exactly, whatever the budget.
pub const K_CAP: u64 = 1_000_000;

/// `K` such that `ϑ(m) > μ^m` for every `m > K`, with
/// `μ = (1 - 1/|R|^ℓ)^{1/(ℓ(ℓ + |Q|^ℓ))}`. Comparisons are exact after raising
/// both sides to the power `ℓ(ℓ + |Q|^ℓ)`.
pub fn superexp_k(nq: usize, nr: usize, ell: usize, th: &Threshold, cap: u64) -> Result<u64> {
    let Threshold::Superexponential { d, .. } = th else {
        return Err(Error::InvalidArgument("K is defined for superexponential thresholds".into()));
    };
    let big_n = BigInt::from(nr).pow(ell as u32);
    if big_n.is_one() {
        return Ok(0);
    }
    let l = ell as u32 * (ell as u32 + (nq as u32).pow(ell as u32));
    let one_minus = Rational::new(&big_n - 1, big_n.clone());
    // θ(m)^L > (1 - 1/N)^m
    let holds = |m: u64| pow(&th.at(m as usize), l as u64) > pow(&one_minus, m);
    // ((m+1)/(m+2))^{dL} ≥ 1 - 1/N: from there on ϑ(m)/μ^m is non-decreasing
    let ratio_ok = |m: u64| pow(&Rational::new(BigInt::from(m + 1), BigInt::from(m + 2)), (d * l) as u64) >= one_minus;
    let first = |pred: &dyn Fn(u64) -> bool, from: u64| -> Result<u64> {
        let mut hi = from.max(1);
        while !pred(hi) {
            if hi > cap {
                return Err(Error::budget("superexponential constant K", format!("more than {hi}"), cap as u128));
            }
            hi *= 2;
        }
        let mut lo = from;
        if pred(lo) {
            return Ok(lo);
        }
        while lo + 1 < hi {
            let mid = lo + (hi - lo) / 2;
            if pred(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    };
    let m1 = first(&ratio_ok, 0)?;
    let m2 = first(&holds, m1)?;
    if m2 > cap {
        return Err(Error::budget("superexponential constant K", m2, cap as u128));
    }
    Ok(m2.saturating_sub(1))
}

/// Exact forward vectors of `A_F` restricted to the current state word.
struct Forward<'a> {
    a: &'a Sca,
    nq: usize,
    nr: usize,
    p: usize,
    rp: usize,
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct Node {
    cells: Vec<Sym>,
    vec: Vec<Rational>,
}

impl Node {
    fn mass(&self) -> Rational {
        self.vec.iter().sum()
    }

    fn key(&self, p: usize) -> (Vec<Sym>, Vec<Rational>) {
        (self.cells[self.cells.len() - p..].to_vec(), self.vec.clone())
    }
}

impl<'a> Forward<'a> {
    fn new(a: &'a Sca) -> Self {
        let p = a.ell() - 1;
        let nr = a.random().len();
        Forward { a, nq: a.states().len(), nr, p, rp: nr.pow(p as u32) }
    }

    fn start(&self, prologue: Vec<Sym>) -> Node {
        let u = Rational::new(BigInt::one(), BigInt::from(self.rp));
        Node { cells: prologue, vec: vec![u; self.rp] }
    }

    fn step(&self, node: &Node, q: Sym, g: Sym) -> Node {
        let p = self.p;
        let mut qwin: Vec<Sym> = node.cells[node.cells.len() - p..].to_vec();
        qwin.push(q);
        let mut rwin = vec![0; p + 1];
        let mut out = vec![Rational::zero(); self.rp];
        let inv = Rational::new(BigInt::one(), BigInt::from(self.nr));
        let rm = self.rp / self.nr.max(1);
        for (ri, w) in node.vec.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            rwin[..p].copy_from_slice(&index_word(ri, self.nr, p));
            for r in 0..self.nr {
                rwin[p] = r;
                if self.a.rule_at(&qwin, &rwin, p / 2) == g {
                    let to = if p == 0 { 0 } else { (ri % rm) * self.nr + r };
                    out[to] += w * &inv;
                }
            }
        }
        let mut cells = node.cells.clone();
        cells.push(q);
        Node { cells, vec: out }
    }

    fn uniform(&self, node: &Node) -> bool {
        node.vec.windows(2).all(|w| w[0] == w[1])
    }
}

fn max_cell_prob(a: &Sca, g: Sym) -> Rational {
    let nq = a.states().len();
    let width = a.neighborhood().len();
    let mut best = Rational::zero();
    for i in 0..nq.pow(width as u32) {
        let counts = a.output_counts(&index_word(i, nq, width));
        let total: u64 = counts.iter().sum();
        let r = Rational::new(BigInt::from(counts[g]), BigInt::from(total));
        if r > best {
            best = r;
        }
    }
    best
}

/// Decides the pattern problem for a general SCA at a superexponential
/// threshold `θ + c/(n+1)^d`.
///
/// Lengths up to a horizon are searched exactly (branch and bound on exact
/// forward vectors); longer patterns are settled by pumping deterministic
/// loops or refuted by single-cell bounds. Exhaustion is reported, never guessed.
pub fn ppt_decide_sca(a: &Sca, x: Sym, y: Sym, z: Sym, th: &Threshold, budget: &Budget) -> Result<PptVerdict> {
    check_ppt_input(a, x, y, z)?;
    let Threshold::Superexponential { theta, .. } = th else {
        return Err(Error::InvalidArgument("the general procedure takes a superexponential threshold".into()));
    };
    let nq = a.states().len();
    let ell = a.ell();
    let k_const = superexp_k(nq, a.random().len(), ell, th, budget.max_enum.min(K_CAP))?;
    let (rx, ry, rz) = (max_cell_prob(a, x), max_cell_prob(a, y), max_cell_prob(a, z));
    // cells ℓ apart use disjoint randomness, so their outputs are independent
    let mut horizon = k_const.max(ell as u64) as usize;
    let mut reason = format!("searched every n ≤ K = {k_const}");
    let mut need_pumping = true;
    if &rx * &rz <= *theta {
        // beyond n ≥ ℓ - 1 the x and z cells are independent
        horizon = horizon.min((ell - 1).max(1));
        reason = "x and z cells are jointly below the limit θ".into();
        need_pumping = false;
    } else if ry < Rational::one() {
        // ρ_x·ρ_y^⌊n/ℓ⌋ bounds the probability; find where it falls below ϑ for good
        let bound = |n: usize| &rx * pow(&ry, (n / ell) as u64);
        let mut n0 = 1usize;
        loop {
            let tail_ok = (n0..n0 + ell).all(|n| bound(n) <= th.at(n));
            let Threshold::Superexponential { d, .. } = th else { unreachable!() };
            let ratio = pow(&Rational::new(BigInt::from(n0 + 1), BigInt::from(n0 + ell + 1)), *d as u64) >= ry;
            if tail_ok && ratio {
                break;
            }
            n0 += 1;
            if n0 as u64 > k_const.max(ell as u64) {
                break;
            }
        }
        if (n0 as u64) <= k_const.max(ell as u64) {
            horizon = horizon.min(n0.saturating_sub(1).max(1));
            reason = format!("single-cell bound below ϑ(n) from n = {n0} on");
        }
        need_pumping = false;
    }
    let fw = Forward::new(a);
    let mut meter = Meter::new("pattern search nodes", budget.max_enum);
    if let Some(w) = search_windows(&fw, x, y, z, th, horizon, &mut meter)? {
        return Ok(PptVerdict { answer: true, witness: Some(w), horizon, k: Some(k_const), reason: "word above the threshold".into() });
    }
    if need_pumping {
        if let Some(w) = pump_sca(a, &fw, x, y, z, th, k_const as usize, &mut meter, budget)? {
            return Ok(PptVerdict {
                answer: true,
                witness: Some(w),
                horizon,
                k: Some(k_const),
                reason: "deterministic loop above the limit θ".into(),
            });
        }
        reason = format!("searched every n ≤ K = {k_const}; no deterministic loop beats θ");
    }
    Ok(PptVerdict { answer: false, witness: None, horizon, k: Some(k_const), reason })
}

fn search_windows(
    fw: &Forward,
    x: Sym,
    y: Sym,
    z: Sym,
    th: &Threshold,
    horizon: usize,
    meter: &mut Meter,
) -> Result<Option<PptWitness>> {
    let floor = th.at(horizon);
    let mut seen: HashSet<(usize, Vec<Sym>, Vec<Rational>)> = HashSet::new();
    let mut stack: Vec<(Node, usize)> = Vec::new();
    for i in 0..fw.nq.pow(fw.p as u32) {
        let start = fw.start(index_word(i, fw.nq, fw.p));
        for q in 0..fw.nq {
            let node = fw.step(&start, q, x);
            if node.mass() > floor {
                stack.push((node, 0));
            }
        }
    }
    while let Some((node, n)) = stack.pop() {
        meter.spend(1)?;
        if n >= 1 {
            for q in 0..fw.nq {
                let end = fw.step(&node, q, z);
                let prob = end.mass();
                let bound = th.at(n);
                if prob > bound {
                    return Ok(Some(PptWitness { window: end.cells, n, probability: prob, threshold: bound, pumped: None }));
                }
            }
        }
        if n < horizon {
            for q in 0..fw.nq {
                let next = fw.step(&node, q, y);
                if next.mass() > floor && seen.insert((n + 1, next.cells[next.cells.len() - fw.p..].to_vec(), next.vec.clone())) {
                    stack.push((next, n + 1));
                }
            }
        }
    }
    Ok(None)
}

/// Looks for `γ·a·(l·a)^q·γ′` with a deterministic loop whose attachment has probability above `θ`.
#[allow(clippy::too_many_arguments)]
fn pump_sca(
    a: &Sca,
    fw: &Forward,
    x: Sym,
    y: Sym,
    z: Sym,
    th: &Threshold,
    max_len: usize,
    meter: &mut Meter,
    budget: &Budget,
) -> Result<Option<PptWitness>> {
    let theta = th.limit();
    let p = fw.p;
    let nq = fw.nq;
    let nstates = nq.pow(p as u32);
    let next = |s: usize, q: usize| if p == 0 { 0 } else { (s % (nstates / nq)) * nq + q };
    // deterministic y edges of the De Bruijn graph
    let det_y = |s: usize, q: usize| {
        let mut w = index_word(s, nq, p);
        w.push(q);
        a.det_output_at(&w, p / 2) == Some(y)
    };
    let on_cycle: Vec<Option<Vec<Sym>>> = (0..nstates)
        .map(|s| {
            // shortest deterministic cycle through s
            let mut parent: Vec<Option<(usize, Sym)>> = vec![None; nstates];
            let mut queue = std::collections::VecDeque::from([s]);
            let mut seen = vec![false; nstates];
            while let Some(u) = queue.pop_front() {
                for q in 0..nq {
                    if !det_y(u, q) {
                        continue;
                    }
                    let t = next(u, q);
                    if t == s {
                        let mut cells = vec![q];
                        let mut v = u;
                        while v != s {
                            let (pv, pq) = parent[v].unwrap();
                            cells.push(pq);
                            v = pv;
                        }
                        cells.reverse();
                        return Some(cells);
                    }
                    if !seen[t] {
                        seen[t] = true;
                        parent[t] = Some((u, q));
                        queue.push_back(t);
                    }
                }
            }
            None
        })
        .collect();
    if on_cycle.iter().all(Option::is_none) {
        return Ok(None);
    }
    // left parts: from an x cell to a loop state with a uniform vector
    let mut left: BTreeMap<usize, Node> = BTreeMap::new();
    let mut seen: HashSet<(Vec<Sym>, Vec<Rational>)> = HashSet::new();
    let mut stack: Vec<(Node, usize)> = Vec::new();
    for i in 0..nstates {
        let start = fw.start(index_word(i, nq, p));
        for q in 0..nq {
            stack.push((fw.step(&start, q, x), 0));
        }
    }
    while let Some((node, n)) = stack.pop() {
        meter.spend(1)?;
        let mass = node.mass();
        if mass <= theta {
            continue;
        }
        let s = state_of(&node.cells, nq, p);
        if on_cycle[s].is_some() && fw.uniform(&node) && left.get(&s).is_none_or(|b| b.mass() < mass) {
            left.insert(s, node.clone());
        }
        if n < max_len {
            for q in 0..nq {
                let nxt = fw.step(&node, q, y);
                if seen.insert(nxt.key(p)) {
                    stack.push((nxt, n + 1));
                }
            }
        }
    }
    for (s, lnode) in &left {
        let lmass = lnode.mass();
        // right part from s with a uniform vector of mass one
        let mut seen: HashSet<(Vec<Sym>, Vec<Rational>)> = HashSet::new();
        let mut stack: Vec<(Node, usize)> = vec![(fw.start(index_word(*s, nq, p)), 0)];
        let mut best: Option<Node> = None;
        while let Some((node, n)) = stack.pop() {
            meter.spend(1)?;
            if &lmass * node.mass() <= theta {
                continue;
            }
            for q in 0..nq {
                let end = fw.step(&node, q, z);
                if &lmass * end.mass() > theta && best.as_ref().is_none_or(|b| b.mass() < end.mass()) {
                    best = Some(end);
                }
            }
            if n < max_len {
                for q in 0..nq {
                    let nxt = fw.step(&node, q, y);
                    if seen.insert(nxt.key(p)) {
                        stack.push((nxt, n + 1));
                    }
                }
            }
        }
        if let Some(rnode) = best {
            let cycle = on_cycle[*s].clone().unwrap();
            let tail = rnode.cells[p..].to_vec();
            let ys_fixed = (lnode.cells.len() - p - 1) + (tail.len() - 1);
            let base = &lmass * rnode.mass();
            let w = finish_pump(a, x, y, z, th, lnode.cells.clone(), cycle, Rational::one(), tail, base, ys_fixed, p, budget)?;
            return Ok(Some(w));
        }
    }
    Ok(None)
}

fn state_of(cells: &[Sym], nq: usize, p: usize) -> usize {
    cells[cells.len() - p..].iter().fold(0, |acc, &c| acc * nq + c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn half() -> Pfa {
        let a = Alphabet::new(["a"]).unwrap();
        let q = Alphabet::new(["q0", "q1"]).unwrap();
        let m = vec![vec![vec![ratio(1, 2), ratio(1, 2)], vec![ratio(0, 1), ratio(1, 1)]]];
        Pfa::new(a, q, 0, vec![true, false], m).unwrap()
    }

    #[test]
    fn acceptance() {
        let p = half();
        assert_eq!(pfa_accept_prob(&p, &[0]).unwrap(), ratio(1, 2));
        assert_eq!(pfa_accept_prob(&p, &[0, 0]).unwrap(), ratio(1, 4));
        assert_eq!(pfa_accept_prob(&p, &[]).unwrap(), ratio(1, 1));
    }

    #[test]
    fn rejects_non_stochastic_rows() {
        let a = Alphabet::new(["a"]).unwrap();
        let q = Alphabet::new(["q0"]).unwrap();
        assert!(Pfa::new(a, q, 0, vec![true], vec![vec![vec![ratio(1, 2)]]]).is_err());
    }

    #[test]
    fn thresholds() {
        let t = Threshold::parse("exp:1/16,1/3").unwrap();
        assert_eq!(t.at(2), ratio(1, 144));
        let s = Threshold::parse("sup:1/2,1,1").unwrap();
        assert_eq!(s.at(1), ratio(1, 1));
        assert_eq!(s.limit(), ratio(1, 2));
        assert!(Threshold::parse("exp:1,2").is_err());
    }

    #[test]
    fn k_is_certified() {
        let th = Threshold::superexponential(ratio(1, 2), ratio(1, 1), 1).unwrap();
        let k = superexp_k(4, 4, 1, &th, 1_000_000).unwrap();
        let mu = (0.75f64).powf(1.0 / 5.0);
        for m in (k + 1)..(k + 200) {
            assert!(th.at(m as usize) > Rational::from_float(mu.powi(m as i32) * 1.0000001).unwrap());
        }
    }
}

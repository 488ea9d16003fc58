//! Sofic-shift decisions for the non-deterministic dynamics.
//!
//! Everything is built on the centered pair graph: a vertex is a pair of
//! words `(q̄, r̄)` of length `ℓ - 1`, an edge appends one cell `(q, r)` and is
//! labeled by the input at the window center and the output there.

use std::collections::{HashMap, VecDeque};

use num_traits::Zero;
use serde::Serialize;

use crate::alphabet::{index_word, product_token, Alphabet, Sym};
use crate::budget::{pow128, Budget, Meter};
use crate::error::{Error, Result};
use crate::sca::Sca;
use crate::semantics::{apply_window, cylinder_prob, pushforward_distribution, Word};
use crate::weighted::align_states;

/// A labeled graph in which every vertex is initial and accepting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SoficPresentation {
    labels: Vec<String>,
    edges: Vec<Vec<(u32, u32)>>,
}

impl SoficPresentation {
    pub fn new(labels: Vec<String>, mut edges: Vec<Vec<(u32, u32)>>) -> Self {
        for e in &mut edges {
            e.sort_unstable();
            e.dedup();
        }
        SoficPresentation { labels, edges }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn num_vertices(&self) -> usize {
        self.edges.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    /// Outgoing `(label, target)` pairs sorted by label.
    pub fn edges(&self, v: usize) -> &[(u32, u32)] {
        &self.edges[v]
    }

    fn on_label(&self, v: usize, a: u32) -> &[(u32, u32)] {
        let e = &self.edges[v];
        &e[e.partition_point(|x| x.0 < a)..e.partition_point(|x| x.0 <= a)]
    }

    /// Keeps the vertices lying on a bi-infinite path. Returns the trimmed
    /// graph and the old index of each kept vertex.
    pub fn trim(&self) -> (SoficPresentation, Vec<usize>) {
        let n = self.num_vertices();
        let mut indeg = vec![0usize; n];
        let mut outdeg = vec![0usize; n];
        let mut preds: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (v, e) in self.edges.iter().enumerate() {
            for &(_, t) in e {
                indeg[t as usize] += 1;
                outdeg[v] += 1;
                preds[t as usize].push(v as u32);
            }
        }
        let mut alive = vec![true; n];
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| indeg[v] == 0 || outdeg[v] == 0).collect();
        while let Some(v) = queue.pop_front() {
            if !alive[v] {
                continue;
            }
            alive[v] = false;
            for &(_, t) in &self.edges[v] {
                let t = t as usize;
                indeg[t] -= 1;
                if alive[t] && indeg[t] == 0 {
                    queue.push_back(t);
                }
            }
            for &p in &preds[v] {
                let p = p as usize;
                outdeg[p] -= 1;
                if alive[p] && outdeg[p] == 0 {
                    queue.push_back(p);
                }
            }
        }
        let kept: Vec<usize> = (0..n).filter(|&v| alive[v]).collect();
        let mut new_id = vec![u32::MAX; n];
        for (i, &v) in kept.iter().enumerate() {
            new_id[v] = i as u32;
        }
        let edges = kept
            .iter()
            .map(|&v| {
                self.edges[v]
                    .iter()
                    .filter(|(_, t)| alive[*t as usize])
                    .map(|&(a, t)| (a, new_id[t as usize]))
                    .collect()
            })
            .collect();
        (SoficPresentation::new(self.labels.clone(), edges), kept)
    }

    /// Quotient by the coarsest forward bisimulation. Returns the quotient and
    /// the class of each vertex. The label shift is unchanged.
    pub fn quotient(&self) -> (SoficPresentation, Vec<usize>) {
        let n = self.num_vertices();
        let mut class = vec![0usize; n];
        let mut count = if n == 0 { 0 } else { 1 };
        loop {
            let mut ids: HashMap<(usize, Vec<(u32, usize)>), usize> = HashMap::new();
            let next: Vec<usize> = (0..n)
                .map(|v| {
                    let mut sig: Vec<(u32, usize)> =
                        self.edges[v].iter().map(|&(a, t)| (a, class[t as usize])).collect();
                    sig.sort_unstable();
                    sig.dedup();
                    let fresh = ids.len();
                    *ids.entry((class[v], sig)).or_insert(fresh)
                })
                .collect();
            let done = ids.len() == count;
            count = ids.len();
            class = next;
            if done {
                break;
            }
        }
        let mut edges: Vec<Vec<(u32, u32)>> = vec![Vec::new(); count];
        let mut seen = vec![false; count];
        for v in 0..n {
            let c = class[v];
            if !seen[c] {
                seen[c] = true;
                edges[c] = self.edges[v].iter().map(|&(a, t)| (a, class[t as usize] as u32)).collect();
            }
        }
        (SoficPresentation::new(self.labels.clone(), edges), class)
    }

    /// Relabels every edge through `f` into the alphabet `labels`.
    pub fn map_labels(&self, labels: Vec<String>, f: impl Fn(u32) -> u32) -> SoficPresentation {
        let edges = self.edges.iter().map(|e| e.iter().map(|&(a, t)| (f(a), t)).collect()).collect();
        SoficPresentation::new(labels, edges)
    }

    fn successors(&self, set: &[u32], a: u32) -> Vec<u32> {
        let mut out: Vec<u32> = set.iter().flat_map(|&v| self.on_label(v as usize, a).iter().map(|e| e.1)).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Trim, then quotient.
    pub fn reduced(&self) -> SoficPresentation {
        self.trim().0.quotient().0
    }
}

/// A shortest word with no path, by subset construction from the full vertex set.
pub fn missing_word(g: &SoficPresentation, budget: &Budget) -> Result<Option<Vec<u32>>> {
    let start: Vec<u32> = (0..g.num_vertices() as u32).collect();
    let nl = g.labels.len() as u32;
    if start.is_empty() {
        return Ok(if nl == 0 { None } else { Some(vec![0]) });
    }
    let mut index: HashMap<Vec<u32>, usize> = HashMap::new();
    let mut parent: Vec<(usize, u32)> = vec![(usize::MAX, 0)];
    let mut sets = vec![start.clone()];
    index.insert(start, 0);
    let mut meter = Meter::new("subset construction", budget.max_states);
    let mut i = 0;
    while i < sets.len() {
        for a in 0..nl {
            let succ = g.successors(&sets[i], a);
            if succ.is_empty() {
                let mut word = vec![a];
                let mut j = i;
                while parent[j].0 != usize::MAX {
                    word.push(parent[j].1);
                    j = parent[j].0;
                }
                word.reverse();
                return Ok(Some(word));
            }
            if !index.contains_key(&succ) {
                meter.spend(1)?;
                index.insert(succ.clone(), sets.len());
                parent.push((i, a));
                sets.push(succ);
            }
        }
        i += 1;
    }
    Ok(None)
}

/// A shortest word in exactly one of the two languages, with `true` when it is in the first.
pub fn language_difference(
    g1: &SoficPresentation,
    g2: &SoficPresentation,
    budget: &Budget,
) -> Result<Option<(Vec<u32>, bool)>> {
    if g1.labels != g2.labels {
        return Err(Error::AlphabetMismatch("presentations use different labels".into()));
    }
    let nl = g1.labels.len() as u32;
    let s1: Vec<u32> = (0..g1.num_vertices() as u32).collect();
    let s2: Vec<u32> = (0..g2.num_vertices() as u32).collect();
    let mut index: HashMap<(Vec<u32>, Vec<u32>), usize> = HashMap::new();
    let mut parent: Vec<(usize, u32)> = vec![(usize::MAX, 0)];
    let mut pairs = vec![(s1.clone(), s2.clone())];
    index.insert((s1, s2), 0);
    let mut meter = Meter::new("product subset construction", budget.max_states);
    let mut i = 0;
    while i < pairs.len() {
        for a in 0..nl {
            let n1 = g1.successors(&pairs[i].0, a);
            let n2 = g2.successors(&pairs[i].1, a);
            if n1.is_empty() && n2.is_empty() {
                continue;
            }
            if n1.is_empty() || n2.is_empty() {
                let mut word = vec![a];
                let mut j = i;
                while parent[j].0 != usize::MAX {
                    word.push(parent[j].1);
                    j = parent[j].0;
                }
                word.reverse();
                return Ok(Some((word, n2.is_empty())));
            }
            let key = (n1, n2);
            if !index.contains_key(&key) {
                meter.spend(1)?;
                index.insert(key.clone(), pairs.len());
                parent.push((i, a));
                pairs.push(key);
            }
        }
        i += 1;
    }
    Ok(None)
}

/// The centered pair graph of an automaton.
#[derive(Debug, Clone)]
pub struct PairGraph {
    nq: usize,
    nr: usize,
    ell: usize,
    /// Labels `input·|Q| + output`.
    pub pres: SoficPresentation,
    /// `moves[v][i] = q·|R| + r` for the `i`-th edge of `v`.
    moves: Vec<Vec<u32>>,
}

fn pair_labels(states: &Alphabet) -> Vec<String> {
    let mut out = Vec::new();
    for a in states.tokens() {
        for b in states.tokens() {
            out.push(product_token(&[a, b]));
        }
    }
    out
}

impl PairGraph {
    pub fn new(a: &Sca, budget: &Budget) -> Result<PairGraph> {
        let (nq, nr, ell) = (a.states().len(), a.random().len(), a.ell());
        let p = ell - 1;
        let n = pow128(nq * nr, p);
        budget.check_states("pair graph vertices", n)?;
        let n = n.unwrap() as usize;
        let rp = nr.pow(p as u32);
        let (qm, rm) = (nq.pow(p.saturating_sub(1) as u32), nr.pow(p.saturating_sub(1) as u32));
        let mut edges = Vec::with_capacity(n);
        let mut moves = Vec::with_capacity(n);
        let mut qwin = vec![0; ell];
        let mut rwin = vec![0; ell];
        for v in 0..n {
            let (qi, ri) = (v / rp, v % rp);
            qwin[..p].copy_from_slice(&index_word(qi, nq, p));
            rwin[..p].copy_from_slice(&index_word(ri, nr, p));
            let mut e: Vec<(u32, u32, u32)> = Vec::with_capacity(nq * nr);
            for q in 0..nq {
                qwin[p] = q;
                for r in 0..nr {
                    rwin[p] = r;
                    let out = a.rule_at(&qwin, &rwin, p / 2);
                    let label = (qwin[p / 2] * nq + out) as u32;
                    let to = if p == 0 { 0 } else { ((qi % qm) * nq + q) * rp + (ri % rm) * nr + r };
                    e.push((label, to as u32, (q * nr + r) as u32));
                }
            }
            e.sort_unstable();
            edges.push(e.iter().map(|&(l, t, _)| (l, t)).collect::<Vec<_>>());
            moves.push(e.iter().map(|x| x.2).collect());
        }
        let pres = SoficPresentation { labels: pair_labels(a.states()), edges };
        Ok(PairGraph { nq, nr, ell, pres, moves })
    }

    fn vertex_words(&self, v: usize) -> (Vec<Sym>, Vec<Sym>) {
        let p = self.ell - 1;
        let rp = self.nr.pow(p as u32);
        (index_word(v / rp, self.nq, p), index_word(v % rp, self.nr, p))
    }

    /// Lifts a label path through a quotient back to windows `(q, r)` of length `n + ℓ - 1`.
    fn lift(&self, class: &[usize], start: usize, steps: &[(u32, usize)]) -> (Vec<Sym>, Vec<Sym>) {
        let mut v = (0..class.len()).find(|&v| class[v] == start).expect("class is non-empty");
        let (mut q, mut r) = self.vertex_words(v);
        for &(label, c) in steps {
            let e = &self.pres.edges[v];
            let i = (0..e.len())
                .find(|&i| e[i].0 == label && class[e[i].1 as usize] == c)
                .expect("bisimulation lifts every path");
            let m = self.moves[v][i] as usize;
            q.push(m / self.nr);
            r.push(m % self.nr);
            v = e[i].1 as usize;
        }
        (q, r)
    }
}

/// A finite certificate attached to a verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Centered input/output words; `present_in` names the side that realizes
    /// the pair when two automata are compared.
    PairWord { input: Vec<Sym>, output: Vec<Sym>, present_in: Option<String> },
    /// A word with no preimage.
    Orphan { word: Vec<Sym> },
    /// Two inputs and random words with equal outputs. Windows have length
    /// `|output| + 2k`; `differ` lists output positions where the centered inputs differ.
    Collision {
        left: Vec<Sym>,
        right: Vec<Sym>,
        left_random: Vec<Sym>,
        right_random: Vec<Sym>,
        output: Vec<Sym>,
        differ: Vec<usize>,
    },
    /// A window forced onto the pattern by every random word.
    Forced { window: Vec<Sym>, output: Vec<Sym> },
    /// A window and random word producing the pattern.
    Reached { window: Vec<Sym>, random: Vec<Sym>, output: Vec<Sym> },
}

/// A boolean answer with an optional certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub answer: bool,
    pub witness: Option<Witness>,
}

impl Verdict {
    fn yes() -> Verdict {
        Verdict { answer: true, witness: None }
    }

    fn with(answer: bool, witness: Witness) -> Verdict {
        Verdict { answer, witness: Some(witness) }
    }
}

impl Witness {
    /// Re-checks the certificate against exact enumeration on windows.
    pub fn recheck(&self, a: &Sca, budget: &Budget) -> Result<bool> {
        let k = a.radius();
        let nq = a.states().len();
        let extensions = |core: &[Sym]| -> Vec<Vec<Sym>> {
            (0..nq.pow(2 * k as u32))
                .map(|i| {
                    let pad = index_word(i, nq, 2 * k);
                    pad[..k].iter().chain(core).chain(&pad[k..]).copied().collect()
                })
                .collect()
        };
        match self {
            Witness::PairWord { input, output, present_in: None } => {
                for w in extensions(input) {
                    if !cylinder_prob(a, &w, output, 1, budget)?.is_zero() {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Witness::PairWord { .. } => Ok(true),
            Witness::Orphan { word } => {
                for i in 0..nq.pow((word.len() + 2 * k) as u32) {
                    let w = index_word(i, nq, word.len() + 2 * k);
                    if !cylinder_prob(a, &w, word, 1, budget)?.is_zero() {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Witness::Collision { left, right, left_random, right_random, output, differ } => {
                let o1 = apply_window(a, &Word::at_origin(left.clone()), &Word::at_origin(left_random.clone()))?;
                let o2 = apply_window(a, &Word::at_origin(right.clone()), &Word::at_origin(right_random.clone()))?;
                Ok(o1.symbols == *output
                    && o2.symbols == *output
                    && !differ.is_empty()
                    && differ.iter().all(|&i| left[i + k] != right[i + k]))
            }
            Witness::Forced { window, output } => {
                let d = pushforward_distribution(a, &Word::at_origin(window.clone()), 1, budget)?;
                Ok(d.support.len() == 1 && d.support.contains_key(output))
            }
            Witness::Reached { window, random, output } => {
                let o = apply_window(a, &Word::at_origin(window.clone()), &Word::at_origin(random.clone()))?;
                Ok(o.symbols == *output)
            }
        }
    }
}

/// Noisiness: the pair shift is the full shift over `Q×Q`.
pub fn is_noisy(a: &Sca, budget: &Budget) -> Result<Verdict> {
    let pg = PairGraph::new(a, budget)?;
    let nq = a.states().len();
    match missing_word(&pg.pres.quotient().0, budget)? {
        None => Ok(Verdict::yes()),
        Some(word) => {
            let (input, output) = word.iter().map(|&l| (l as usize / nq, l as usize % nq)).unzip();
            Ok(Verdict::with(false, Witness::PairWord { input, output, present_in: None }))
        }
    }
}

/// The local test for correlation-free automata: every neighborhood reaches every state.
pub fn cfca_noisy_local(a: &Sca) -> Result<bool> {
    Ok(a.local_distribution_table()?.iter().all(|(_, d)| d.iter().all(|p| !p.is_zero())))
}

/// Surjectivity of the non-deterministic global function.
pub fn is_surjective(a: &Sca, budget: &Budget) -> Result<Verdict> {
    let pg = PairGraph::new(a, budget)?;
    let nq = a.states().len() as u32;
    let out = pg.pres.map_labels(a.states().tokens().to_vec(), |l| l % nq).quotient().0;
    match missing_word(&out, budget)? {
        None => Ok(Verdict::yes()),
        Some(w) => Ok(Verdict::with(false, Witness::Orphan { word: w.into_iter().map(|x| x as Sym).collect() })),
    }
}

/// Product of the reduced pair graph with itself synchronized on outputs.
struct Collisions {
    pg: PairGraph,
    class: Vec<usize>,
    nclass: usize,
    /// Edges `(label1·L + label2, target)` over vertices `c1·n + c2`.
    prod: SoficPresentation,
    nq: usize,
    nl: u32,
}

impl Collisions {
    fn new(a: &Sca, budget: &Budget) -> Result<Collisions> {
        let pg = PairGraph::new(a, budget)?;
        let (quo, class) = pg.pres.quotient();
        let n = quo.num_vertices();
        budget.check_states("product graph vertices", Some((n * n) as u128))?;
        let nq = a.states().len();
        let nl = (nq * nq) as u32;
        let mut edges = Vec::with_capacity(n * n);
        for c1 in 0..n {
            for c2 in 0..n {
                let mut e = Vec::new();
                for &(l1, t1) in quo.edges(c1) {
                    for &(l2, t2) in quo.edges(c2) {
                        if l1 % nq as u32 == l2 % nq as u32 {
                            e.push((l1 * nl + l2, t1 * n as u32 + t2));
                        }
                    }
                }
                edges.push(e);
            }
        }
        let prod = SoficPresentation::new(Vec::new(), edges);
        Ok(Collisions { pg, class, nclass: n, prod, nq, nl })
    }

    fn diagonal(&self, label: u32) -> bool {
        let nq = self.nq as u32;
        (label / self.nl) / nq == (label % self.nl) / nq
    }

    /// Turns a product path into a collision witness.
    fn witness(&self, start: usize, path: &[(u32, usize)]) -> Witness {
        let n = self.nclass;
        let s1: Vec<(u32, usize)> = path.iter().map(|&(l, v)| (l / self.nl, v / n)).collect();
        let s2: Vec<(u32, usize)> = path.iter().map(|&(l, v)| (l % self.nl, v % n)).collect();
        let (left, left_random) = self.pg.lift(&self.class, start / n, &s1);
        let (right, right_random) = self.pg.lift(&self.class, start % n, &s2);
        let nq = self.nq as u32;
        let output = path.iter().map(|&(l, _)| ((l % self.nl) % nq) as Sym).collect();
        let differ = path.iter().enumerate().filter(|(_, (l, _))| !self.diagonal(*l)).map(|(i, _)| i).collect();
        Witness::Collision { left, right, left_random, right_random, output, differ }
    }

    /// Predecessor lists of the product.
    fn preds(&self, g: &SoficPresentation) -> Vec<Vec<(u32, u32)>> {
        let mut preds = vec![Vec::new(); g.num_vertices()];
        for v in 0..g.num_vertices() {
            for &(l, t) in g.edges(v) {
                preds[t as usize].push((l, v as u32));
            }
        }
        preds
    }
}

/// Walks from `v` along `next` until a vertex repeats; returns the steps up to and around the cycle.
fn walk_to_cycle(v: usize, next: impl Fn(usize) -> (u32, usize)) -> Vec<(u32, usize)> {
    let mut seen: HashMap<usize, usize> = HashMap::new();
    let mut steps = Vec::new();
    let mut cur = v;
    loop {
        seen.insert(cur, steps.len());
        let (l, t) = next(cur);
        steps.push((l, t));
        if let Some(&i) = seen.get(&t) {
            // walk the cycle once more so the window closes on it
            let cycle: Vec<(u32, usize)> = steps[i..].to_vec();
            steps.extend(cycle);
            return steps;
        }
        cur = t;
    }
}

/// Injectivity of the non-deterministic global function.
pub fn is_injective(a: &Sca, budget: &Budget) -> Result<Verdict> {
    let col = Collisions::new(a, budget)?;
    let (trimmed, kept) = col.prod.trim();
    for v in 0..trimmed.num_vertices() {
        for &(l, t) in trimmed.edges(v) {
            if col.diagonal(l) {
                continue;
            }
            let preds = col.preds(&trimmed);
            // backwards from v to a cycle, then forwards from t to a cycle
            let back = walk_to_cycle(v, |x| {
                let (l, p) = preds[x][0];
                (l, p as usize)
            });
            let fwd = walk_to_cycle(t as usize, |x| {
                let (l, q) = trimmed.edges(x)[0];
                (l, q as usize)
            });
            // back lists (label of edge into x, predecessor); reverse it into a forward path
            let start = back.last().unwrap().1;
            let mut path: Vec<(u32, usize)> = Vec::new();
            let mut cur_targets: Vec<usize> = std::iter::once(v).chain(back.iter().map(|s| s.1)).collect();
            cur_targets.pop();
            for (i, s) in back.iter().enumerate().rev() {
                path.push((s.0, cur_targets[i]));
            }
            path.push((l, t as usize));
            path.extend(fwd);
            let path: Vec<(u32, usize)> = path.into_iter().map(|(l, x)| (l, kept[x])).collect();
            return Ok(Verdict::with(false, col.witness(kept[start], &path)));
        }
    }
    Ok(Verdict::yes())
}

/// Kosaraju: for each vertex, whether it lies on a cycle using only `keep` edges.
fn on_cycle(g: &SoficPresentation, keep: impl Fn(u32) -> bool) -> Vec<bool> {
    let n = g.num_vertices();
    let succ: Vec<Vec<usize>> =
        (0..n).map(|v| g.edges(v).iter().filter(|e| keep(e.0)).map(|e| e.1 as usize).collect()).collect();
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in 0..n {
        for &t in &succ[v] {
            pred[t].push(v);
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    for s in 0..n {
        if visited[s] {
            continue;
        }
        visited[s] = true;
        let mut stack = vec![(s, 0usize)];
        while let Some((v, i)) = stack.pop() {
            if i < succ[v].len() {
                stack.push((v, i + 1));
                let t = succ[v][i];
                if !visited[t] {
                    visited[t] = true;
                    stack.push((t, 0));
                }
            } else {
                order.push(v);
            }
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut sizes = Vec::new();
    for &s in order.iter().rev() {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        let mut size = 0;
        comp[s] = id;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            size += 1;
            for &p in &pred[v] {
                if comp[p] == usize::MAX {
                    comp[p] = id;
                    stack.push(p);
                }
            }
        }
        sizes.push(size);
    }
    (0..n).map(|v| sizes[comp[v]] > 1 || succ[v].contains(&v)).collect()
}

/// Shortest path from `s` back to `s` using `keep` edges.
fn cycle_through(g: &SoficPresentation, s: usize, keep: impl Fn(u32) -> bool) -> Vec<(u32, usize)> {
    let n = g.num_vertices();
    let mut parent: Vec<Option<(usize, u32)>> = vec![None; n];
    let mut queue = VecDeque::from([s]);
    let mut seen = vec![false; n];
    while let Some(v) = queue.pop_front() {
        for &(l, t) in g.edges(v) {
            if !keep(l) {
                continue;
            }
            let t = t as usize;
            if t == s {
                let mut path = vec![(l, s)];
                let mut x = v;
                while x != s {
                    let (p, pl) = parent[x].unwrap();
                    path.push((pl, x));
                    x = p;
                }
                path.reverse();
                return path;
            }
            if !seen[t] {
                seen[t] = true;
                parent[t] = Some((v, l));
                queue.push_back(t);
            }
        }
    }
    unreachable!("vertex lies on a cycle")
}

/// Pre-injectivity: no two finitely differing configurations share an image.
pub fn is_preinjective(a: &Sca, budget: &Budget) -> Result<Verdict> {
    let col = Collisions::new(a, budget)?;
    let g = &col.prod;
    let n = g.num_vertices();
    let diag = |l: u32| col.diagonal(l);
    let cyc = on_cycle(g, diag);
    // states (vertex, left the diagonal yet)
    let mut parent: Vec<Option<(usize, u32)>> = vec![None; 2 * n];
    let mut seen = vec![false; 2 * n];
    let mut queue = VecDeque::new();
    for v in (0..n).filter(|&v| cyc[v]) {
        seen[2 * v] = true;
        queue.push_back(2 * v);
    }
    while let Some(x) = queue.pop_front() {
        let (v, flag) = (x / 2, x % 2);
        for &(l, t) in g.edges(v) {
            let t = t as usize;
            let y = 2 * t + (flag | usize::from(!diag(l)));
            if seen[y] {
                continue;
            }
            seen[y] = true;
            parent[y] = Some((x, l));
            if y % 2 == 1 && cyc[t] {
                let mut path = Vec::new();
                let mut z = y;
                while let Some((p, l)) = parent[z] {
                    path.push((l, z / 2));
                    z = p;
                }
                path.reverse();
                let start = z / 2;
                let mut full = cycle_through(g, start, diag);
                full.extend(path);
                full.extend(cycle_through(g, t, diag));
                return Ok(Verdict::with(false, col.witness(start, &full)));
            }
            queue.push_back(y);
        }
    }
    Ok(Verdict::yes())
}

/// Presentation of the `t`-step relation `{(c, F^t(c, …))}` with labels `input·|Q| + output`.
pub fn relation_presentation(a: &Sca, t: usize, budget: &Budget) -> Result<SoficPresentation> {
    if t == 0 {
        return Err(Error::InvalidArgument("t must be positive".into()));
    }
    let base = PairGraph::new(a, budget)?.pres.quotient().0;
    let nq = a.states().len() as u32;
    let mut cur = base.clone();
    for _ in 1..t {
        let (n1, n2) = (cur.num_vertices(), base.num_vertices());
        budget.check_states("composed relation vertices", Some((n1 * n2) as u128))?;
        let mut edges = Vec::with_capacity(n1 * n2);
        for v1 in 0..n1 {
            for v2 in 0..n2 {
                let mut e = Vec::new();
                for &(l1, t1) in cur.edges(v1) {
                    for &(l2, t2) in base.on_label_input(v2, l1 % nq, nq) {
                        e.push(((l1 / nq) * nq + l2 % nq, t1 * n2 as u32 + t2));
                    }
                }
                edges.push(e);
            }
        }
        cur = SoficPresentation::new(base.labels.clone(), edges).reduced();
    }
    Ok(cur)
}

impl SoficPresentation {
    fn on_label_input(&self, v: usize, input: u32, nq: u32) -> &[(u32, u32)] {
        let e = &self.edges[v];
        &e[e.partition_point(|x| x.0 < input * nq)..e.partition_point(|x| x.0 < (input + 1) * nq)]
    }
}

/// Equality of the `t`-step non-deterministic global functions.
pub fn ndet_equal(a: &Sca, b: &Sca, t: usize, budget: &Budget) -> Result<Verdict> {
    let b = align_states(a, b)?;
    let ga = relation_presentation(a, t, budget)?;
    let gb = relation_presentation(&b, t, budget)?;
    let nq = a.states().len();
    match language_difference(&ga, &gb, budget)? {
        None => Ok(Verdict::yes()),
        Some((word, in_a)) => {
            let (input, output) = word.iter().map(|&l| (l as usize / nq, l as usize % nq)).unzip();
            let side = if in_a { "a" } else { "b" };
            Ok(Verdict::with(false, Witness::PairWord { input, output, present_in: Some(side.into()) }))
        }
    }
}

/// Is there a window that every random word maps onto `u`?
pub fn forced_pattern_exists(a: &Sca, u: &[Sym], budget: &Budget) -> Result<Verdict> {
    let nq = a.states().len();
    let ell = a.ell();
    let p = ell - 1;
    let n = pow128(nq, p);
    budget.check_states("window states", n.and_then(|n| n.checked_mul(u.len().max(1) as u128)))?;
    let n = n.unwrap() as usize;
    let qm = nq.pow(p.saturating_sub(1) as u32);
    // layers[i][v] = predecessor vertex and appended symbol
    let mut layers: Vec<Vec<Option<(usize, Sym)>>> = Vec::with_capacity(u.len());
    let mut alive = vec![true; n];
    let mut win = vec![0; ell];
    for &target in u {
        let mut next = vec![false; n];
        let mut layer = vec![None; n];
        for v in (0..n).filter(|&v| alive[v]) {
            win[..p].copy_from_slice(&index_word(v, nq, p));
            for q in 0..nq {
                win[p] = q;
                if a.det_output_at(&win, p / 2) == Some(target) {
                    let to = if p == 0 { 0 } else { (v % qm) * nq + q };
                    if !next[to] {
                        next[to] = true;
                        layer[to] = Some((v, q));
                    }
                }
            }
        }
        layers.push(layer);
        alive = next;
    }
    let Some(end) = (0..n).find(|&v| alive[v]) else {
        return Ok(Verdict { answer: false, witness: None });
    };
    let mut tail = Vec::new();
    let mut v = end;
    for layer in layers.iter().rev() {
        let (prev, q) = layer[v].unwrap();
        tail.push(q);
        v = prev;
    }
    tail.reverse();
    let mut window = index_word(v, nq, p);
    window.extend(tail);
    Ok(Verdict::with(true, Witness::Forced { window, output: u.to_vec() }))
}

/// Is there a window and a random word producing `u`?
pub fn reachable_pattern_exists(a: &Sca, u: &[Sym], budget: &Budget) -> Result<Verdict> {
    let pg = PairGraph::new(a, budget)?;
    let n = pg.pres.num_vertices();
    budget.check_states("pattern search states", Some((n as u128) * (u.len().max(1) as u128)))?;
    let nq = pg.nq as u32;
    let mut alive = vec![true; n];
    let mut layers: Vec<Vec<Option<(usize, usize)>>> = Vec::with_capacity(u.len());
    for &target in u {
        let mut next = vec![false; n];
        let mut layer = vec![None; n];
        for v in (0..n).filter(|&v| alive[v]) {
            for (i, &(l, t)) in pg.pres.edges[v].iter().enumerate() {
                if l % nq == target as u32 && !next[t as usize] {
                    next[t as usize] = true;
                    layer[t as usize] = Some((v, i));
                }
            }
        }
        layers.push(layer);
        alive = next;
    }
    let Some(end) = (0..n).find(|&v| alive[v]) else {
        return Ok(Verdict { answer: false, witness: None });
    };
    let mut moves = Vec::new();
    let mut v = end;
    for layer in layers.iter().rev() {
        let (prev, i) = layer[v].unwrap();
        moves.push(pg.moves[prev][i] as usize);
        v = prev;
    }
    moves.reverse();
    let (mut window, mut random) = pg.vertex_words(v);
    for m in moves {
        window.push(m / pg.nr);
        random.push(m % pg.nr);
    }
    Ok(Verdict::with(true, Witness::Reached { window, random, output: u.to_vec() }))
}

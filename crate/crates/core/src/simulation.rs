//! Rescaling, trimming (restriction and projection), simulation checks at
//! fixed parameters, the correlation-free host, finite couplings and the
//! reduction gadgets.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::alphabet::{index_word, product_token, word_index, Alphabet, Sym};
use crate::budget::{pow128, Budget, Meter};
use crate::error::{Error, Result};
use crate::rational::{format_rational, Rational};
use crate::sca::Sca;
use crate::symbolic::ndet_equal;
use crate::weighted::{prime_factor_precheck, stochastic_equal, PrimeCheck};

/// Blocks of `m` symbols over a `base`-letter alphabet become single symbols.
pub fn pack_word(w: &[Sym], m: usize, base: usize) -> Result<Vec<Sym>> {
    if m == 0 || w.len() % m != 0 {
        return Err(Error::LengthMismatch(format!("length {} is not a multiple of {m}", w.len())));
    }
    Ok(w.chunks(m).map(|b| word_index(b, base)).collect())
}

pub fn unpack_word(w: &[Sym], m: usize, base: usize) -> Vec<Sym> {
    w.iter().flat_map(|&s| index_word(s, base, m)).collect()
}

/// Parameters `⟨m, t, z⟩`: packing, iteration, shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct RescaleParams {
    pub m: usize,
    pub t: usize,
    pub z: i64,
}

impl RescaleParams {
    pub fn new(m: usize, t: usize, z: i64) -> Result<Self> {
        if m == 0 || t == 0 {
            return Err(Error::InvalidArgument("m and t must be positive".into()));
        }
        Ok(RescaleParams { m, t, z })
    }

    pub fn unit() -> Self {
        RescaleParams { m: 1, t: 1, z: 0 }
    }

    /// Reads `m,t,z`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        let bad = || Error::syntax("rescale parameters", format!("expected m,t,z, got {text:?}"));
        let [m, t, z] = parts.as_slice() else { return Err(bad()) };
        RescaleParams::new(m.parse().map_err(|_| bad())?, t.parse().map_err(|_| bad())?, z.parse().map_err(|_| bad())?)
    }
}

impl fmt::Display for RescaleParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟨{},{},{}⟩", self.m, self.t, self.z)
    }
}

/// Injective `i : Q' → Q`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Injection {
    pub domain: Alphabet,
    pub map: Vec<Sym>,
}

impl Injection {
    pub fn new(domain: Alphabet, map: Vec<Sym>, target_len: usize) -> Result<Self> {
        if map.len() != domain.len() || map.iter().any(|&q| q >= target_len) {
            return Err(Error::InvalidArgument("injection does not map its domain into the states".into()));
        }
        let mut seen = map.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != map.len() {
            return Err(Error::InvalidArgument("map is not injective".into()));
        }
        Ok(Injection { domain, map })
    }

    /// Sends every token of `domain` to the equal token of `target`.
    pub fn by_tokens(domain: &Alphabet, target: &Alphabet) -> Result<Self> {
        let map = domain
            .tokens()
            .iter()
            .map(|t| {
                target.index_of(t).ok_or_else(|| Error::UnknownSymbol {
                    symbol: t.clone(),
                    alphabet: target.tokens().join(","),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Injection::new(domain.clone(), map, target.len())
    }

    pub fn identity(states: &Alphabet) -> Self {
        Injection { domain: states.clone(), map: (0..states.len()).collect() }
    }
}

/// Surjective `π : Q → Q''`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Surjection {
    pub codomain: Alphabet,
    pub map: Vec<Sym>,
}

impl Surjection {
    pub fn new(codomain: Alphabet, map: Vec<Sym>) -> Result<Self> {
        let mut hit = vec![false; codomain.len()];
        for &q in &map {
            if q >= codomain.len() {
                return Err(Error::InvalidArgument("projection leaves its codomain".into()));
            }
            hit[q] = true;
        }
        if hit.contains(&false) {
            return Err(Error::InvalidArgument("map is not surjective".into()));
        }
        Ok(Surjection { codomain, map })
    }

    /// From a token map `state -> image`; the codomain is ordered by first appearance.
    pub fn from_pairs(states: &Alphabet, pairs: &BTreeMap<String, String>) -> Result<Self> {
        let mut images: Vec<String> = Vec::new();
        let mut map = Vec::with_capacity(states.len());
        for t in states.tokens() {
            let img = pairs.get(t).ok_or_else(|| Error::InvalidArgument(format!("no image for {t}")))?;
            let idx = images.iter().position(|x| x == img).unwrap_or_else(|| {
                images.push(img.clone());
                images.len() - 1
            });
            map.push(idx);
        }
        Surjection::new(Alphabet::new(images)?, map)
    }

    pub fn identity(states: &Alphabet) -> Self {
        Surjection { codomain: states.clone(), map: (0..states.len()).collect() }
    }
}

/// Restriction then projection, both optional.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Trim {
    pub injection: Option<Injection>,
    pub surjection: Option<Surjection>,
}

/// Offsets of `t` steps of `v`: the `t`-fold sum set.
fn sum_set(v: &[i64], t: usize) -> Vec<i64> {
    let mut acc = vec![0i64];
    for _ in 0..t {
        let mut next: Vec<i64> = acc.iter().flat_map(|a| v.iter().map(move |b| a + b)).collect();
        next.sort_unstable();
        next.dedup();
        acc = next;
    }
    acc
}

fn blocks_of(offsets: impl IntoIterator<Item = i64>, p: RescaleParams) -> Vec<i64> {
    let m = p.m as i64;
    let mut out: Vec<i64> = offsets
        .into_iter()
        .flat_map(|o| (0..m).map(move |j| (j + p.z + o).div_euclid(m)))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// `a^{⟨m,t,z⟩}` with states `Q^m` and random symbols `(R^m)^t`.
pub fn rescale_sca(a: &Sca, p: RescaleParams, budget: &Budget) -> Result<Sca> {
    rescale_restricted(a, p, None, budget)
}

/// Rescales and restricts in one pass: the table only covers words over the
/// domain of `inj` (an injection into `Q^m`). Fails with a stability witness.
pub fn rescale_restricted(a: &Sca, p: RescaleParams, inj: Option<&Injection>, budget: &Budget) -> Result<Sca> {
    let (m, t) = (p.m, p.t);
    if m == 0 || t == 0 {
        return Err(Error::InvalidArgument("m and t must be positive".into()));
    }
    let nq = a.states().len();
    let nr = a.random().len();
    let v = a.neighborhood().to_vec();
    let vp = a.random_neighborhood().to_vec();
    let state_blocks = blocks_of(sum_set(&v, t), p);
    // random layer i (1-based) still travels through t - i steps
    let layer_offsets: Vec<Vec<i64>> = (1..=t)
        .map(|i| {
            let spread = sum_set(&v, t - i);
            let mut o: Vec<i64> = spread.iter().flat_map(|s| vp.iter().map(move |w| s + w)).collect();
            o.sort_unstable();
            o.dedup();
            o
        })
        .collect();
    let random_blocks = blocks_of(layer_offsets.iter().flatten().copied(), p);
    let block_states = a.states().power(m)?;
    let block_random = a.random().power(m)?;
    let layers: Vec<&Alphabet> = std::iter::repeat(&block_random).take(t).collect();
    let random = Alphabet::product(&layers)?;
    let states = match inj {
        Some(i) => {
            if i.map.iter().any(|&q| q >= block_states.len()) {
                return Err(Error::InvalidArgument("injection target is not the rescaled alphabet".into()));
            }
            i.domain.clone()
        }
        None => block_states.clone(),
    };
    let to_domain: Option<BTreeMap<Sym, Sym>> = inj.map(|i| i.map.iter().enumerate().map(|(d, &q)| (q, d)).collect());
    let rm = nr.pow(m as u32);
    let mi = m as i64;
    // one coordinate frame for state cells, random cells and the output block
    let lo = (state_blocks[0] * mi).min(random_blocks[0] * mi).min(p.z);
    let hi = ((state_blocks.last().unwrap() + 1) * mi).max((random_blocks.last().unwrap() + 1) * mi).max(p.z + mi);
    let span = (hi - lo) as usize;
    let mut violation: Option<(Vec<Sym>, Vec<Sym>, Vec<Sym>)> = None;
    let out = Sca::from_fn(states, random, &state_blocks, &random_blocks, budget, |qw, rw| {
        let mut cells: Vec<Option<Sym>> = vec![None; span];
        for (&b, &s) in state_blocks.iter().zip(qw) {
            let block = match inj {
                Some(i) => i.map[s],
                None => s,
            };
            for (j, c) in index_word(block, nq, m).into_iter().enumerate() {
                cells[(b * mi - lo) as usize + j] = Some(c);
            }
        }
        let mut layer_cells: Vec<Vec<Option<Sym>>> = vec![vec![None; span]; t];
        for (&b, &s) in random_blocks.iter().zip(rw) {
            for (i, layer) in index_word(s, rm, t).into_iter().enumerate() {
                for (j, c) in index_word(layer, nr, m).into_iter().enumerate() {
                    layer_cells[i][(b * mi - lo) as usize + j] = Some(c);
                }
            }
        }
        let read = |v: &[Option<Sym>], y: i64| if y < 0 { None } else { v.get(y as usize).copied().flatten() };
        let mut cur = cells;
        let mut qbuf = vec![0; v.len()];
        let mut rbuf = vec![0; vp.len()];
        for layer in &layer_cells {
            let mut next = vec![None; span];
            'cell: for (x, slot) in next.iter_mut().enumerate() {
                let x = x as i64;
                for (k, &o) in v.iter().enumerate() {
                    match read(&cur, x + o) {
                        Some(c) => qbuf[k] = c,
                        None => continue 'cell,
                    }
                }
                for (k, &o) in vp.iter().enumerate() {
                    match read(layer, x + o) {
                        Some(c) => rbuf[k] = c,
                        None => continue 'cell,
                    }
                }
                *slot = Some(a.rule(&qbuf, &rbuf));
            }
            cur = next;
        }
        let block: Vec<Sym> = (0..mi).map(|j| cur[(j + p.z - lo) as usize].expect("dependency cone")).collect();
        let packed = word_index(&block, nq);
        match &to_domain {
            None => packed,
            Some(back) => match back.get(&packed) {
                Some(&d) => d,
                None => {
                    if violation.is_none() {
                        violation = Some((qw.to_vec(), rw.to_vec(), block));
                    }
                    0
                }
            },
        }
    })?;
    if let Some((q, r, o)) = violation {
        let inj = inj.unwrap();
        return Err(Error::Stability {
            neighborhood: inj.domain.format_word(&q),
            random: out.random().format_word(&r),
            output: a.states().format_word(&o),
        });
    }
    match a.values() {
        Some(vals) => {
            let block_value = |b: Sym| index_word(b, nq, m).iter().map(|&c| vals[c]).sum::<u64>();
            let values = match inj {
                Some(i) => i.map.iter().map(|&b| block_value(b)).collect(),
                None => (0..out.states().len()).map(block_value).collect(),
            };
            out.with_values(values)
        }
        None => Ok(out),
    }
}

/// The `i`-restriction, after checking that `i(Q')^ℤ` is stable.
pub fn check_restriction(a: &Sca, i: &Injection, budget: &Budget) -> Result<Sca> {
    rescale_restricted(a, RescaleParams::unit(), Some(i), budget)
}

/// The `π`-projection, after checking compatibility on every pair of
/// neighborhoods with equal images.
pub fn check_projection(a: &Sca, pi: &Surjection, budget: &Budget) -> Result<Sca> {
    if pi.map.len() != a.states().len() {
        return Err(Error::InvalidArgument("projection is not defined on every state".into()));
    }
    let nq = a.states().len();
    let nc = pi.codomain.len();
    let width = a.neighborhood().len();
    let rwidth = a.random_neighborhood().len();
    let nrw = a.random().len().pow(rwidth as u32);
    budget.check_table("projection check", pow128(nq, width).and_then(|x| x.checked_mul(nrw as u128)))?;
    let ncw = nc.pow(width as u32);
    let mut table: Vec<Option<(Sym, usize)>> = vec![None; ncw * nrw];
    for qi in 0..nq.pow(width as u32) {
        let qw = index_word(qi, nq, width);
        let image: Vec<Sym> = qw.iter().map(|&q| pi.map[q]).collect();
        let ci = word_index(&image, nc);
        for ri in 0..nrw {
            let rw = index_word(ri, a.random().len(), rwidth);
            let out = pi.map[a.rule(&qw, &rw)];
            match table[ci * nrw + ri] {
                None => table[ci * nrw + ri] = Some((out, qi)),
                Some((o, first)) if o != out => {
                    return Err(Error::Compatibility {
                        left: a.states().format_word(&index_word(first, nq, width)),
                        right: a.states().format_word(&qw),
                        random: a.random().format_word(&rw),
                    });
                }
                Some(_) => {}
            }
        }
    }
    Sca::from_fn(pi.codomain.clone(), a.random().clone(), a.neighborhood(), a.random_neighborhood(), budget, |q, r| {
        table[word_index(q, nc) * nrw + word_index(r, a.random().len())].expect("surjective").0
    })
}

/// Which global maps are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    /// Deterministic functions, table by table.
    D,
    /// Non-deterministic relations.
    N,
    /// Stochastic maps.
    S,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "D" | "d" => Ok(Mode::D),
            "N" | "n" => Ok(Mode::N),
            "S" | "s" => Ok(Mode::S),
            _ => Err(Error::syntax("mode", format!("expected D, N or S, got {s:?}"))),
        }
    }
}

/// The rescaled and trimmed simulator.
pub fn trimmed(b: &Sca, pb: RescaleParams, trim: &Trim, budget: &Budget) -> Result<Sca> {
    let restricted = rescale_restricted(b, pb, trim.injection.as_ref(), budget)?;
    match &trim.surjection {
        Some(pi) => check_projection(&restricted, pi, budget),
        None => Ok(restricted),
    }
}

/// Equality of deterministic functions.
pub fn det_equal(a: &Sca, b: &Sca, budget: &Budget) -> Result<bool> {
    if !a.is_deterministic() || !b.is_deterministic() {
        return Ok(false);
    }
    let b = b.reorder_states(a.states())?;
    let k = a.radius().max(b.radius());
    let (pa, pb) = (a.pad_to_radius(k, budget)?, b.pad_to_radius(k, budget)?);
    let nq = a.states().len();
    let width = 2 * k + 1;
    Ok((0..nq.pow(width as u32)).all(|i| {
        let w = index_word(i, nq, width);
        pa.det_output(&w) == pb.det_output(&w)
    }))
}

/// Compares two automata over the same state tokens in the given mode.
pub fn maps_equal(a: &Sca, b: &Sca, mode: Mode, budget: &Budget) -> Result<bool> {
    match mode {
        Mode::D => det_equal(a, b, budget),
        Mode::N => Ok(ndet_equal(a, b, 1, budget)?.answer),
        Mode::S => stochastic_equal(a, b, 1, budget),
    }
}

/// `a^{pa}` against the trimmed `b^{pb}`. The simulated side is only rescaled.
pub fn simulates(
    a: &Sca,
    b: &Sca,
    pa: RescaleParams,
    pb: RescaleParams,
    trim: &Trim,
    mode: Mode,
    budget: &Budget,
) -> Result<bool> {
    let left = rescale_sca(a, pa, budget)?;
    let right = trimmed(b, pb, trim, budget)?;
    if mode == Mode::S && prime_factor_precheck(&left, &right) == PrimeCheck::Incompatible {
        return Ok(false);
    }
    maps_equal(&left, &right, mode, budget)
}

/// Search bounds: `1 ≤ m, t ≤ max`, `|z| ≤ max_shift` on both sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SearchBounds {
    pub max_m: usize,
    pub max_t: usize,
    pub max_shift: i64,
}

/// A verified simulation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimulationWitness {
    pub pa: RescaleParams,
    pub pb: RescaleParams,
    pub trim: Trim,
    pub mode: Mode,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum SearchOutcome {
    Found(SimulationWitness),
    /// Not a disproof: only the listed candidates were tried.
    NotFoundWithinBounds {
        tried: usize,
        skipped: usize,
        precheck: Option<PrimeCheck>,
    },
}

fn params(bounds: &SearchBounds) -> Vec<RescaleParams> {
    let mut out = Vec::new();
    for m in 1..=bounds.max_m {
        for t in 1..=bounds.max_t {
            for z in -bounds.max_shift..=bounds.max_shift {
                out.push(RescaleParams { m, t, z });
            }
        }
    }
    out
}

fn size(p: &RescaleParams) -> (usize, i64) {
    (p.m + p.t, p.z.abs())
}

/// Bounded search over parameter pairs in a fixed order: smaller `m + t`
/// first (simulator side, then simulated side), then smaller shifts, then
/// lexicographic. Trims tried per pair: none, then the token injection of the
/// simulated alphabet when every token exists in the rescaled simulator, then
/// each `extra` trim. The first verified candidate is returned.
pub fn search_simulation(
    a: &Sca,
    b: &Sca,
    bounds: &SearchBounds,
    mode: Mode,
    extra: &[Trim],
    budget: &Budget,
) -> Result<SearchOutcome> {
    if mode == Mode::S && prime_factor_precheck(a, b) == PrimeCheck::Incompatible {
        return Ok(SearchOutcome::NotFoundWithinBounds { tried: 0, skipped: 0, precheck: Some(PrimeCheck::Incompatible) });
    }
    let ps = params(bounds);
    let mut pairs: Vec<(RescaleParams, RescaleParams)> =
        ps.iter().flat_map(|&pb| ps.iter().map(move |&pa| (pa, pb))).collect();
    pairs.sort_by_key(|(pa, pb)| {
        let (sb, zb) = size(pb);
        let (sa, za) = size(pa);
        (sa + sb, sb, za + zb, *pb, *pa)
    });
    let (mut tried, mut skipped) = (0, 0);
    for (pa, pb) in pairs {
        let left = match rescale_sca(a, pa, budget) {
            Ok(l) => l,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        let mut trims = vec![Trim::default()];
        if let Ok(target) = b.states().power(pb.m) {
            if let Ok(inj) = Injection::by_tokens(left.states(), &target) {
                if inj.map.len() < target.len() {
                    trims.push(Trim { injection: Some(inj), surjection: None });
                }
            }
        }
        trims.extend(extra.iter().cloned());
        for trim in trims {
            tried += 1;
            let right = match trimmed(b, pb, &trim, budget) {
                Ok(r) => r,
                Err(_) => {
                    skipped += 1;
                    continue;
                }
            };
            if right.states().len() != left.states().len() {
                continue;
            }
            match maps_equal(&left, &right, mode, budget) {
                Ok(true) => return Ok(SearchOutcome::Found(SimulationWitness { pa, pb, trim, mode })),
                Ok(false) => {}
                Err(_) => skipped += 1,
            }
        }
    }
    Ok(SearchOutcome::NotFoundWithinBounds { tried, skipped, precheck: None })
}

/// A correlation-free automaton whose square, restricted to `Q`, is `a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CfcaHost {
    pub host: Sca,
    pub injection: Injection,
}

/// Host on `Q ∪ Q×R`: a `Q` cell stores its own random symbol, a `Q×R` cell
/// applies the rule of `a` to the stored pairs. Mixed neighborhoods go to the
/// first state of `Q`.
pub fn cfca_host(a: &Sca, budget: &Budget) -> Result<CfcaHost> {
    let nq = a.states().len();
    let nr = a.random().len();
    let k = a.radius() as i64;
    let mut tokens: Vec<String> = a.states().tokens().to_vec();
    for q in a.states().tokens() {
        for r in a.random().tokens() {
            tokens.push(product_token(&[q, r]));
        }
    }
    let states = Alphabet::new(tokens)?;
    let hood: Vec<i64> = (-k..=k).collect();
    let center = k as usize;
    let junk = 0;
    let host = Sca::from_fn(states, a.random().clone(), &hood, &[0], budget, |c, s| {
        if c.iter().all(|&x| x < nq) {
            nq + c[center] * nr + s[0]
        } else if c.iter().all(|&x| x >= nq) {
            let q: Vec<Sym> = c.iter().map(|&x| (x - nq) / nr).collect();
            let r: Vec<Sym> = c.iter().map(|&x| (x - nq) % nr).collect();
            a.rule_at(&q, &r, center)
        } else {
            junk
        }
    })?;
    Ok(CfcaHost { host, injection: Injection::identity(a.states()) })
}

/// The finite stage of a coupling on one window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CouplingTable {
    pub n: usize,
    pub window: String,
    /// `(left random word, right random word, mass)` with positive mass.
    pub entries: Vec<(String, String, String)>,
    pub marginals_uniform: bool,
    pub equal_output_mass: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum CouplingOutcome {
    Coupled(CouplingTable),
    /// First output word (in lexicographic order) with different probabilities.
    Infeasible { output: String, left: String, right: String },
}

/// Groups the random words of length `len` by the output they produce on `window`.
fn classes(a: &Sca, window: &[Sym], k: usize, meter: &mut Meter) -> Result<BTreeMap<Vec<Sym>, Vec<usize>>> {
    let nr = a.random().len();
    let len = window.len();
    let total = pow128(nr, len).ok_or_else(|| Error::budget("coupling words", "more than 2^128", 0))?;
    meter.spend(total)?;
    let mut out: BTreeMap<Vec<Sym>, Vec<usize>> = BTreeMap::new();
    for ri in 0..total as usize {
        let r = index_word(ri, nr, len);
        let u: Vec<Sym> = (k..len - k).map(|x| a.rule_at(window, &r, x)).collect();
        out.entry(u).or_default().push(ri);
    }
    Ok(out)
}

/// Builds `γⁿ` on `window` (length `2n + 1 + 2k`) by overlapping rank
/// intervals: inside each output class, random words are ordered
/// lexicographically and each gets an interval of its own probability.
pub fn build_finite_coupling(a: &Sca, b: &Sca, window: &[Sym], n: usize, budget: &Budget) -> Result<CouplingOutcome> {
    let b = b.reorder_states(a.states())?;
    let k = a.radius().max(b.radius());
    if window.len() != 2 * n + 1 + 2 * k {
        return Err(Error::LengthMismatch(format!(
            "window has length {}, expected 2n + 1 + 2k = {}",
            window.len(),
            2 * n + 1 + 2 * k
        )));
    }
    let (pa, pb) = (a.pad_to_radius(k, budget)?, b.pad_to_radius(k, budget)?);
    let mut meter = Meter::new("coupling words", budget.max_enum);
    let ca = classes(&pa, window, k, &mut meter)?;
    let cb = classes(&pb, window, k, &mut meter)?;
    let len = window.len() as u32;
    let wa = Rational::new(BigInt::one(), BigInt::from(a.random().len()).pow(len));
    let wb = Rational::new(BigInt::one(), BigInt::from(b.random().len()).pow(len));
    let mut outputs: Vec<&Vec<Sym>> = ca.keys().chain(cb.keys()).collect();
    outputs.sort();
    outputs.dedup();
    for u in &outputs {
        let p1 = &wa * Rational::from_integer(ca.get(*u).map_or(0, Vec::len).into());
        let p2 = &wb * Rational::from_integer(cb.get(*u).map_or(0, Vec::len).into());
        if p1 != p2 {
            return Ok(CouplingOutcome::Infeasible {
                output: a.states().format_word(u),
                left: format_rational(&p1),
                right: format_rational(&p2),
            });
        }
    }
    let mut entries = Vec::new();
    let mut left_mass: BTreeMap<usize, Rational> = BTreeMap::new();
    let mut right_mass: BTreeMap<usize, Rational> = BTreeMap::new();
    let mut equal_mass = Rational::zero();
    let (nra, nrb) = (a.random().len(), b.random().len());
    for (u, xs) in &ca {
        let ys = &cb[u];
        // sweep the two interval lists of the class
        let (mut i, mut j) = (0, 0);
        let (mut end_x, mut end_y) = (wa.clone(), wb.clone());
        let mut pos = Rational::zero();
        while i < xs.len() && j < ys.len() {
            let next = end_x.clone().min(end_y.clone());
            let mass = &next - &pos;
            if !mass.is_zero() {
                entries.push((
                    a.random().format_word(&index_word(xs[i], nra, len as usize)),
                    b.random().format_word(&index_word(ys[j], nrb, len as usize)),
                    format_rational(&mass),
                ));
                *left_mass.entry(xs[i]).or_insert_with(Rational::zero) += &mass;
                *right_mass.entry(ys[j]).or_insert_with(Rational::zero) += &mass;
                equal_mass += &mass;
            }
            pos = next;
            if pos == end_x {
                i += 1;
                end_x += &wa;
            }
            if pos == end_y {
                j += 1;
                end_y += &wb;
            }
        }
    }
    let total_a = pow128(nra, len as usize).unwrap() as usize;
    let total_b = pow128(nrb, len as usize).unwrap() as usize;
    let marginals_uniform = left_mass.len() == total_a
        && right_mass.len() == total_b
        && left_mass.values().all(|m| *m == wa)
        && right_mass.values().all(|m| *m == wb);
    Ok(CouplingOutcome::Coupled(CouplingTable {
        n,
        window: a.states().format_word(window),
        entries,
        marginals_uniform,
        equal_output_mass: format_rational(&equal_mass),
    }))
}

/// The two reduction gadgets built from a deterministic automaton.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GadgetKind {
    /// `G(c, s) = F(s)`: noisy iff `F` is surjective.
    SurjectivityLift,
    /// `G((c, c'), s) = (F(c'), s)`: a correlation-free automaton whose square is `(F(s), s')`.
    SquareNoise,
}

impl std::str::FromStr for GadgetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<GadgetKind> {
        match s {
            "surjectivity-lift" | "SurjectivityLift" => Ok(GadgetKind::SurjectivityLift),
            "square-noise" | "SquareNoise" => Ok(GadgetKind::SquareNoise),
            _ => Err(Error::syntax("gadget", format!("unknown gadget {s:?}"))),
        }
    }
}

pub fn gadget(kind: GadgetKind, f: &Sca, budget: &Budget) -> Result<Sca> {
    if !f.is_deterministic() {
        return Err(Error::NotDeterministic);
    }
    let q = f.states();
    let nq = q.len();
    let v = f.neighborhood();
    let rule = |w: &[Sym]| f.det_output(w).expect("deterministic");
    match kind {
        GadgetKind::SurjectivityLift => Sca::from_fn(q.clone(), q.clone(), &[0], v, budget, |_, s| rule(s)),
        GadgetKind::SquareNoise => {
            let pairs = Alphabet::product(&[q, q])?;
            Sca::from_fn(pairs, q.clone(), v, &[0], budget, |c, s| {
                let second: Vec<Sym> = c.iter().map(|&x| x % nq).collect();
                rule(&second) * nq + s[0]
            })
        }
    }
}

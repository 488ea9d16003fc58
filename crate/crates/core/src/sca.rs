//! The syntactic object `(Q, R, V, V', f)`.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};

use crate::alphabet::{index_word, word_index, Alphabet, Sym};
use crate::budget::{pow128, Budget};
use crate::error::{Error, Result};
use crate::rational::{is_probability, lcm_denominators, Rational};

const NON_DET: u32 = u32::MAX;

/// A one-dimensional stochastic cellular automaton with a finite rule table.
///
/// The table is indexed by the state neighborhood word (read at the offsets of
/// `V`) and the random neighborhood word (read at the offsets of `V'`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sca {
    states: Alphabet,
    random: Alphabet,
    v: Vec<i64>,
    v_prime: Vec<i64>,
    table: Vec<u32>,
    cfca: bool,
    values: Option<Vec<u64>>,
    det: Vec<u32>,
}

fn check_neighborhood(name: &str, n: &[i64]) -> Result<Vec<i64>> {
    let mut sorted = n.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != n.len() {
        return Err(Error::syntax(name, "duplicate offsets"));
    }
    Ok(sorted)
}

impl Sca {
    /// Builds the table by evaluating `rule` on every neighborhood pair.
    /// The closure receives the state word (ordered like the sorted `v`) and
    /// the random word (ordered like the sorted `v_prime`).
    pub fn from_fn(
        states: Alphabet,
        random: Alphabet,
        v: &[i64],
        v_prime: &[i64],
        budget: &Budget,
        mut rule: impl FnMut(&[Sym], &[Sym]) -> Sym,
    ) -> Result<Sca> {
        let v = check_neighborhood("neighborhood", v)?;
        let v_prime = check_neighborhood("random_neighborhood", v_prime)?;
        let nq = pow128(states.len(), v.len());
        let nr = pow128(random.len(), v_prime.len());
        let size = nq.zip(nr).and_then(|(a, b)| a.checked_mul(b));
        budget.check_table("rule table", size)?;
        let (nq, nr) = (nq.unwrap() as usize, nr.unwrap() as usize);
        let mut table = Vec::with_capacity(nq * nr);
        for qi in 0..nq {
            let qw = index_word(qi, states.len(), v.len());
            for ri in 0..nr {
                let rw = index_word(ri, random.len(), v_prime.len());
                let out = rule(&qw, &rw);
                assert!(out < states.len(), "rule output out of range");
                table.push(out as u32);
            }
        }
        let cfca = v_prime == [0];
        Ok(Sca::assemble(states, random, v, v_prime, table, cfca))
    }

    /// Builds a correlation-free automaton from its local distributions. The
    /// random alphabet is `0..m` with `m` the lcm of all denominators; random
    /// symbols are handed out to the states in order.
    pub fn from_local_distribution(
        states: Alphabet,
        v: &[i64],
        budget: &Budget,
        mut dist: impl FnMut(&[Sym]) -> Vec<Rational>,
    ) -> Result<Sca> {
        let v = check_neighborhood("neighborhood", v)?;
        let nq = pow128(states.len(), v.len());
        budget.check_table("rule table", nq)?;
        let nq = nq.unwrap() as usize;
        let mut rows = Vec::with_capacity(nq);
        for qi in 0..nq {
            let row = dist(&index_word(qi, states.len(), v.len()));
            let total: Rational = row.iter().sum();
            if row.len() != states.len() || row.iter().any(|p| !is_probability(p)) || !total.is_one() {
                return Err(Error::syntax(
                    "local_distribution",
                    format!("row {qi} is not a probability distribution over the states"),
                ));
            }
            rows.push(row);
        }
        let m = lcm_denominators(rows.iter().flatten());
        let m = m
            .to_usize()
            .filter(|&m| m as u64 <= budget.max_table)
            .ok_or_else(|| Error::budget("random alphabet", m.to_string(), budget.max_table as u128))?;
        budget.check_table("rule table", (nq as u128).checked_mul(m as u128))?;
        let scale = Rational::from_integer(BigInt::from(m));
        let mut table = Vec::with_capacity(nq * m);
        for row in &rows {
            for (s, p) in row.iter().enumerate() {
                let c = (p * &scale).to_integer().to_usize().expect("count");
                table.extend(std::iter::repeat(s as u32).take(c));
            }
        }
        Ok(Sca::assemble(states, Alphabet::numeric(m), v, vec![0], table, true))
    }

    pub(crate) fn assemble(
        states: Alphabet,
        random: Alphabet,
        v: Vec<i64>,
        v_prime: Vec<i64>,
        table: Vec<u32>,
        cfca: bool,
    ) -> Sca {
        let nr = random.len().pow(v_prime.len() as u32);
        let det = table
            .chunks(nr)
            .map(|row| if row.iter().all(|&x| x == row[0]) { row[0] } else { NON_DET })
            .collect();
        let values = default_values(&states);
        Sca { states, random, v, v_prime, table, cfca, values, det }
    }

    /// Attaches integer values to the states (used by conservation checks).
    pub fn with_values(mut self, values: Vec<u64>) -> Result<Sca> {
        if values.len() != self.states.len() {
            return Err(Error::LengthMismatch("one value per state expected".into()));
        }
        self.values = Some(values);
        Ok(self)
    }

    pub fn states(&self) -> &Alphabet {
        &self.states
    }

    pub fn random(&self) -> &Alphabet {
        &self.random
    }

    pub fn neighborhood(&self) -> &[i64] {
        &self.v
    }

    pub fn random_neighborhood(&self) -> &[i64] {
        &self.v_prime
    }

    pub fn values(&self) -> Option<&[u64]> {
        self.values.as_deref()
    }

    /// `k = max |v|` over `V ∪ V'`.
    pub fn radius(&self) -> usize {
        self.v.iter().chain(&self.v_prime).map(|x| x.unsigned_abs() as usize).max().unwrap_or(0)
    }

    /// `ℓ = 2k + 1`.
    pub fn ell(&self) -> usize {
        2 * self.radius() + 1
    }

    /// Whether `V' = {0}` in the authored form.
    pub fn is_cfca(&self) -> bool {
        self.cfca
    }

    pub fn table_len(&self) -> usize {
        self.table.len()
    }

    fn random_count(&self) -> usize {
        self.random.len().pow(self.v_prime.len() as u32)
    }

    /// Output for a state neighborhood word and a random neighborhood word.
    pub fn rule(&self, q: &[Sym], r: &[Sym]) -> Sym {
        let qi = word_index(q, self.states.len());
        let ri = word_index(r, self.random.len());
        self.table[qi * self.random_count() + ri] as Sym
    }

    /// Output when the neighborhood is known by index.
    pub(crate) fn rule_indexed(&self, qi: usize, ri: usize) -> Sym {
        self.table[qi * self.random_count() + ri] as Sym
    }

    fn q_index_at(&self, q: &[Sym], x: usize) -> usize {
        let base = self.states.len();
        self.v.iter().fold(0, |acc, &o| acc * base + q[(x as i64 + o) as usize])
    }

    fn r_index_at(&self, r: &[Sym], x: usize) -> usize {
        let base = self.random.len();
        self.v_prime.iter().fold(0, |acc, &o| acc * base + r[(x as i64 + o) as usize])
    }

    /// Applies the rule at position `x` of aligned state/random arrays.
    /// Positions `x + v` must lie inside the arrays.
    pub fn rule_at(&self, q: &[Sym], r: &[Sym], x: usize) -> Sym {
        self.rule_indexed(self.q_index_at(q, x), self.r_index_at(r, x))
    }

    /// The constant output at position `x` when it does not depend on randomness.
    pub fn det_output_at(&self, q: &[Sym], x: usize) -> Option<Sym> {
        let d = self.det[self.q_index_at(q, x)];
        (d != NON_DET).then_some(d as Sym)
    }

    /// The constant output of a neighborhood word when it does not depend on randomness.
    pub fn det_output(&self, q: &[Sym]) -> Option<Sym> {
        let d = self.det[word_index(q, self.states.len())];
        (d != NON_DET).then_some(d as Sym)
    }

    /// True iff no output depends on the random symbols.
    pub fn is_deterministic(&self) -> bool {
        self.det.iter().all(|&d| d != NON_DET)
    }

    /// Number of random neighborhood words mapping `q` to each state.
    pub(crate) fn output_counts(&self, q: &[Sym]) -> Vec<u64> {
        let qi = word_index(q, self.states.len());
        let nr = self.random_count();
        let mut counts = vec![0u64; self.states.len()];
        for &o in &self.table[qi * nr..(qi + 1) * nr] {
            counts[o as usize] += 1;
        }
        counts
    }

    /// `ℙ_f(u)(γ) = #{α : f(u, α) = γ} / |R|` for a correlation-free automaton.
    pub fn local_distribution(&self, u: &[Sym]) -> Result<Vec<Rational>> {
        if !self.cfca {
            return Err(Error::NotCfca);
        }
        if u.len() != self.v.len() {
            return Err(Error::LengthMismatch(format!(
                "neighborhood word has length {}, expected {}",
                u.len(),
                self.v.len()
            )));
        }
        let total = BigInt::from(self.random.len());
        Ok(self
            .output_counts(u)
            .into_iter()
            .map(|c| Rational::new(BigInt::from(c), total.clone()))
            .collect())
    }

    /// Every neighborhood word with its local distribution, in canonical order.
    pub fn local_distribution_table(&self) -> Result<Vec<(Vec<Sym>, Vec<Rational>)>> {
        if !self.cfca {
            return Err(Error::NotCfca);
        }
        let n = self.states.len().pow(self.v.len() as u32);
        (0..n)
            .map(|i| {
                let u = index_word(i, self.states.len(), self.v.len());
                let d = self.local_distribution(&u)?;
                Ok((u, d))
            })
            .collect()
    }

    /// Pads both neighborhoods to `{-k..k}` for `k >= radius`; the rule ignores the padding.
    pub fn pad_to_radius(&self, k: usize, budget: &Budget) -> Result<Sca> {
        if k < self.radius() {
            return Err(Error::InvalidArgument(format!(
                "cannot pad radius {} down to {k}",
                self.radius()
            )));
        }
        let full: Vec<i64> = (-(k as i64)..=k as i64).collect();
        if self.v == full && self.v_prime == full {
            return Ok(self.clone());
        }
        let pick = |sub: &[i64], w: &[Sym]| -> Vec<Sym> {
            sub.iter().map(|&o| w[(o + k as i64) as usize]).collect()
        };
        let mut out = Sca::from_fn(
            self.states.clone(),
            self.random.clone(),
            &full,
            &full,
            budget,
            |q, r| self.rule(&pick(&self.v, q), &pick(&self.v_prime, r)),
        )?;
        out.cfca = self.cfca;
        out.values = self.values.clone();
        Ok(out)
    }

    /// Pads to `V = V' = {-k..k}` with `k` the radius.
    pub fn canonicalize(&self, budget: &Budget) -> Result<Sca> {
        self.pad_to_radius(self.radius(), budget)
    }

    /// True when `V = V' = {-k..k}`.
    pub fn is_canonical(&self) -> bool {
        let k = self.radius() as i64;
        let full: Vec<i64> = (-k..=k).collect();
        self.v == full && self.v_prime == full
    }

    /// Same automaton with the states relabeled into `target` order (same token set).
    pub fn reorder_states(&self, target: &Alphabet) -> Result<Sca> {
        if target.len() != self.states.len()
            || !self.states.tokens().iter().all(|t| target.contains(t))
        {
            return Err(Error::AlphabetMismatch(format!(
                "{:?} vs {:?}",
                self.states.tokens(),
                target.tokens()
            )));
        }
        if target == &self.states {
            return Ok(self.clone());
        }
        let to_self: Vec<Sym> =
            target.tokens().iter().map(|t| self.states.index_of(t).unwrap()).collect();
        let to_target: Vec<Sym> =
            self.states.tokens().iter().map(|t| target.index_of(t).unwrap()).collect();
        let nq = target.len().pow(self.v.len() as u32);
        let nr = self.random_count();
        let mut table = Vec::with_capacity(nq * nr);
        for qi in 0..nq {
            let qw: Vec<Sym> =
                index_word(qi, target.len(), self.v.len()).into_iter().map(|s| to_self[s]).collect();
            let base = word_index(&qw, self.states.len()) * nr;
            for ri in 0..nr {
                table.push(to_target[self.table[base + ri] as usize] as u32);
            }
        }
        let values = self
            .values
            .as_ref()
            .map(|vals| to_self.iter().map(|&s| vals[s]).collect());
        let mut out = Sca::assemble(
            target.clone(),
            self.random.clone(),
            self.v.clone(),
            self.v_prime.clone(),
            table,
            self.cfca,
        );
        out.values = values;
        Ok(out)
    }
}

/// Values read from numeric state tokens, when every token is a number.
fn default_values(states: &Alphabet) -> Option<Vec<u64>> {
    states.tokens().iter().map(|t| t.parse::<u64>().ok()).collect()
}

//! The JSON document format for automata.
//!
//! ```json
//! {
//!   "states": ["0", "1"],
//!   "random": ["0", "1"],
//!   "neighborhood": [0],
//!   "random_neighborhood": [0],
//!   "rule": { "0|0": "0", "0|1": "1", "1|0": "0", "1|1": "1" }
//! }
//! ```
//!
//! Rule keys are `q1…qρ|r1…rρ'`. Tokens may be written back to back when the
//! split is unambiguous, or separated by spaces. A `*` matches any symbol when
//! `*` is not itself a declared token; more specific keys win over keys with
//! more wildcards. `default` fills the remaining entries. A correlation-free
//! automaton may instead give `local_distribution`, mapping each neighborhood
//! word to `{state: "p/q"}`; it is compiled to a random alphabet whose size is
//! the lcm of the denominators.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::alphabet::{index_word, word_index, Alphabet, Sym};
use crate::budget::{pow128, Budget};
use crate::error::{Error, Result};
use crate::rational::{parse_rational, Rational};
use crate::sca::Sca;

const WILDCARD: &str = "*";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaDocument {
    pub states: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random: Option<Vec<String>>,
    pub neighborhood: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_neighborhood: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub rule: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<BTreeMap<String, u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local_distribution: Option<BTreeMap<String, BTreeMap<String, String>>>,
}

/// Parses and validates a JSON automaton document.
pub fn parse_sca(text: &str, budget: &Budget) -> Result<Sca> {
    let doc: ScaDocument = serde_json::from_str(text)
        .map_err(|e| Error::syntax("document", format!("line {} column {}: {e}", e.line(), e.column())))?;
    doc.compile(budget)
}

fn state_index(states: &Alphabet, token: &str, field: &str) -> Result<Sym> {
    states.index_of(token).ok_or_else(|| Error::UnknownSymbol {
        symbol: token.to_string(),
        alphabet: format!("state (in `{field}`)"),
    })
}

/// All concrete words matching a pattern with wildcards.
fn expand(pattern: &[Option<Sym>], base: usize) -> Vec<Vec<Sym>> {
    let mut out = vec![Vec::with_capacity(pattern.len())];
    for p in pattern {
        out = match p {
            Some(s) => out.into_iter().map(|mut w| { w.push(*s); w }).collect(),
            None => out
                .into_iter()
                .flat_map(|w| (0..base).map(move |s| { let mut w = w.clone(); w.push(s); w }))
                .collect(),
        };
    }
    out
}

impl ScaDocument {
    pub fn compile(&self, budget: &Budget) -> Result<Sca> {
        let states = Alphabet::new(self.states.clone())?;
        let sca = if let Some(ld) = &self.local_distribution {
            if !self.rule.is_empty() || self.random.is_some() {
                return Err(Error::syntax(
                    "local_distribution",
                    "cannot be combined with `rule` or `random`",
                ));
            }
            if self.random_neighborhood.as_deref().is_some_and(|r| r != [0]) {
                return Err(Error::syntax("random_neighborhood", "must be [0] with local_distribution"));
            }
            self.compile_local(&states, ld, budget)?
        } else {
            self.compile_rule(&states, budget)?
        };
        match &self.values {
            Some(map) => {
                let mut vals = vec![None; states.len()];
                for (tok, v) in map {
                    vals[state_index(&states, tok, "values")?] = Some(*v);
                }
                let vals: Option<Vec<u64>> = vals.into_iter().collect();
                let vals = vals.ok_or_else(|| Error::syntax("values", "every state needs a value"))?;
                sca.with_values(vals)
            }
            None => Ok(sca),
        }
    }

    fn compile_rule(&self, states: &Alphabet, budget: &Budget) -> Result<Sca> {
        let random = Alphabet::new(
            self.random.clone().ok_or_else(|| Error::syntax("random", "missing"))?,
        )?;
        let vp = self
            .random_neighborhood
            .clone()
            .ok_or_else(|| Error::syntax("random_neighborhood", "missing"))?;
        let (rho, rho_p) = (self.neighborhood.len(), vp.len());
        let nr = pow128(random.len(), rho_p);
        let size = pow128(states.len(), rho).zip(nr).and_then(|(a, b)| a.checked_mul(b));
        budget.check_table("rule table", size)?;
        let nr = nr.unwrap() as usize;
        let mut table: Vec<Option<(usize, u32)>> = vec![None; size.unwrap() as usize];
        for (key, out) in &self.rule {
            let (qs, rs) = key
                .rsplit_once('|')
                .ok_or_else(|| Error::syntax("rule", format!("key `{key}` lacks `|`")))?;
            let qp = states.parse_pattern(qs, Some(WILDCARD))?;
            let rp = if rs.trim().is_empty() { Vec::new() } else { random.parse_pattern(rs, Some(WILDCARD))? };
            if qp.len() != rho || rp.len() != rho_p {
                return Err(Error::syntax(
                    "rule",
                    format!("key `{key}` must have {rho} state and {rho_p} random symbols"),
                ));
            }
            let out = state_index(states, out, "rule")? as u32;
            let wild = qp.iter().chain(&rp).filter(|s| s.is_none()).count();
            for qw in expand(&qp, states.len()) {
                for rw in expand(&rp, random.len()) {
                    let idx = word_index(&qw, states.len()) * nr + word_index(&rw, random.len());
                    match table[idx] {
                        Some((w, o)) if w == wild && o != out => {
                            return Err(Error::syntax(
                                "rule",
                                format!("conflicting outputs for `{}|{}`", states.format_word(&qw), random.format_word(&rw)),
                            ))
                        }
                        Some((w, _)) if w <= wild => {}
                        _ => table[idx] = Some((wild, out)),
                    }
                }
            }
        }
        let default = self.default.as_deref().map(|d| state_index(states, d, "default")).transpose()?;
        let mut flat = Vec::with_capacity(table.len());
        for (idx, entry) in table.into_iter().enumerate() {
            match (entry, default) {
                (Some((_, o)), _) => flat.push(o),
                (None, Some(d)) => flat.push(d as u32),
                (None, None) => {
                    let qw = index_word(idx / nr, states.len(), rho);
                    let rw = index_word(idx % nr, random.len(), rho_p);
                    return Err(Error::RuleNotTotal {
                        pattern: format!("{}|{}", states.format_word(&qw), random.format_word(&rw)),
                    });
                }
            }
        }
        let cfca = vp == [0];
        let mut v = self.neighborhood.clone();
        let mut vps = vp.clone();
        let (sv, svp) = (sorted(&v)?, sorted(&vps)?);
        // Keys follow the authored order of the offsets; store them sorted.
        let flat = if sv != v || svp != vps {
            resort(&flat, states.len(), random.len(), &v, &vps, &sv, &svp)
        } else {
            flat
        };
        v = sv;
        vps = svp;
        Ok(Sca::assemble(states.clone(), random, v, vps, flat, cfca))
    }

    fn compile_local(
        &self,
        states: &Alphabet,
        ld: &BTreeMap<String, BTreeMap<String, String>>,
        budget: &Budget,
    ) -> Result<Sca> {
        let rho = self.neighborhood.len();
        let nq = pow128(states.len(), rho);
        budget.check_table("rule table", nq)?;
        let nq = nq.unwrap() as usize;
        let mut dists: Vec<Option<(usize, Vec<Rational>)>> = vec![None; nq];
        for (key, dist) in ld {
            let qp = states.parse_pattern(key, Some(WILDCARD))?;
            if qp.len() != rho {
                return Err(Error::syntax("local_distribution", format!("key `{key}` must have {rho} symbols")));
            }
            let mut probs = vec![Rational::zero(); states.len()];
            for (tok, p) in dist {
                let p = parse_rational(p)?;
                if p < Rational::zero() {
                    return Err(Error::syntax("local_distribution", "negative probability"));
                }
                probs[state_index(states, tok, "local_distribution")?] = p;
            }
            let total: Rational = probs.iter().sum();
            if total != Rational::from_integer(1.into()) {
                return Err(Error::syntax("local_distribution", format!("`{key}` does not sum to 1")));
            }
            let wild = qp.iter().filter(|s| s.is_none()).count();
            for qw in expand(&qp, states.len()) {
                let idx = word_index(&qw, states.len());
                match &dists[idx] {
                    Some((w, d)) if *w == wild && *d != probs => {
                        return Err(Error::syntax("local_distribution", format!("conflicting entries for `{}`", states.format_word(&qw))))
                    }
                    Some((w, _)) if *w <= wild => {}
                    _ => dists[idx] = Some((wild, probs.clone())),
                }
            }
        }
        let default = self.default.as_deref().map(|d| state_index(states, d, "default")).transpose()?;
        let mut rows = Vec::with_capacity(nq);
        for (idx, d) in dists.into_iter().enumerate() {
            rows.push(match (d, default) {
                (Some((_, p)), _) => p,
                (None, Some(s)) => {
                    let mut p = vec![Rational::zero(); states.len()];
                    p[s] = Rational::from_integer(1.into());
                    p
                }
                (None, None) => {
                    return Err(Error::RuleNotTotal {
                        pattern: states.format_word(&index_word(idx, states.len(), rho)),
                    })
                }
            });
        }
        let v = sorted(&self.neighborhood)?;
        let perm: Vec<usize> =
            self.neighborhood.iter().map(|o| v.iter().position(|x| x == o).unwrap()).collect();
        Sca::from_local_distribution(states.clone(), &v, budget, |sorted_word| {
            let authored: Vec<Sym> = perm.iter().map(|&p| sorted_word[p]).collect();
            rows[word_index(&authored, states.len())].clone()
        })
    }
}

fn sorted(v: &[i64]) -> Result<Vec<i64>> {
    let mut s = v.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.len() != v.len() {
        return Err(Error::syntax("neighborhood", "duplicate offsets"));
    }
    Ok(s)
}

/// Re-indexes a table written for authored offset orders into sorted orders.
fn resort(
    flat: &[u32],
    nq: usize,
    nr: usize,
    v: &[i64],
    vp: &[i64],
    sv: &[i64],
    svp: &[i64],
) -> Vec<u32> {
    let perm_q: Vec<usize> = sv.iter().map(|o| v.iter().position(|x| x == o).unwrap()).collect();
    let perm_r: Vec<usize> = svp.iter().map(|o| vp.iter().position(|x| x == o).unwrap()).collect();
    let rr = nr.pow(vp.len() as u32);
    let mut out = vec![0; flat.len()];
    for (idx, slot) in out.iter_mut().enumerate() {
        let sq = index_word(idx / rr, nq, sv.len());
        let sr = index_word(idx % rr, nr, svp.len());
        let mut aq = vec![0; v.len()];
        let mut ar = vec![0; vp.len()];
        for (i, &p) in perm_q.iter().enumerate() {
            aq[p] = sq[i];
        }
        for (i, &p) in perm_r.iter().enumerate() {
            ar[p] = sr[i];
        }
        *slot = flat[word_index(&aq, nq) * rr + word_index(&ar, nr)];
    }
    out
}

impl Sca {
    /// A document describing this automaton; the most frequent output becomes `default`.
    pub fn to_document(&self) -> ScaDocument {
        let (q, r) = (self.states(), self.random());
        let (rho, rho_p) = (self.neighborhood().len(), self.random_neighborhood().len());
        let nr = r.len().pow(rho_p as u32);
        let mut freq = vec![0usize; q.len()];
        for i in 0..self.table_len() {
            freq[self.rule_indexed(i / nr, i % nr)] += 1;
        }
        let default = (0..q.len()).max_by_key(|&s| (freq[s], std::cmp::Reverse(s))).unwrap();
        let mut rule = BTreeMap::new();
        for i in 0..self.table_len() {
            let out = self.rule_indexed(i / nr, i % nr);
            if out != default {
                let qw = index_word(i / nr, q.len(), rho);
                let rw = index_word(i % nr, r.len(), rho_p);
                rule.insert(format!("{}|{}", q.format_word(&qw), r.format_word(&rw)), q.token(out).to_string());
            }
        }
        let values = self.values().and_then(|vals| {
            let numeric = q.tokens().iter().zip(vals).all(|(t, v)| t.parse::<u64>().ok() == Some(*v));
            (!numeric).then(|| q.tokens().iter().cloned().zip(vals.iter().copied()).collect())
        });
        ScaDocument {
            states: q.tokens().to_vec(),
            random: Some(r.tokens().to_vec()),
            neighborhood: self.neighborhood().to_vec(),
            random_neighborhood: Some(self.random_neighborhood().to_vec()),
            rule,
            default: Some(q.token(default).to_string()),
            values,
            local_distribution: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("serializable document")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BLANK: &str = r#"{"states":["0","1"],"random":["0","1"],"neighborhood":[0],
        "random_neighborhood":[0],"rule":{"0|0":"0","0|1":"1","1|0":"0","1|1":"1"}}"#;

    #[test]
    fn blank_noise_document() {
        let a = parse_sca(BLANK, &Budget::default()).unwrap();
        assert_eq!(a.radius(), 0);
        assert!(a.is_cfca());
        assert_eq!(a.rule(&[1], &[0]), 0);
        let again = a.to_document().compile(&Budget::default()).unwrap();
        assert_eq!(again, a);
    }

    #[test]
    fn missing_entry_is_reported() {
        let text = BLANK.replace(r#","1|1":"1""#, "");
        let err = parse_sca(&text, &Budget::default()).unwrap_err();
        assert!(matches!(err, Error::RuleNotTotal { ref pattern } if pattern == "1|1"));
    }

    #[test]
    fn unknown_symbol_and_syntax() {
        let text = BLANK.replace(r#""1|1":"1""#, r#""1|1":"7""#);
        assert!(matches!(parse_sca(&text, &Budget::default()), Err(Error::UnknownSymbol { .. })));
        assert!(matches!(parse_sca("{\"states\": [", &Budget::default()), Err(Error::Syntax { .. })));
    }

    #[test]
    fn wildcards_and_specificity() {
        let text = r#"{"states":["0","1"],"random":["a","b"],"neighborhood":[-1,0],
            "random_neighborhood":[0],"rule":{"**|*":"0","11|a":"1"}}"#;
        let a = parse_sca(text, &Budget::default()).unwrap();
        assert_eq!(a.rule(&[1, 1], &[0]), 1);
        assert_eq!(a.rule(&[1, 1], &[1]), 0);
        assert_eq!(a.rule(&[0, 1], &[0]), 0);
    }

    #[test]
    fn unsorted_offsets_follow_key_order() {
        let text = r#"{"states":["0","1"],"random":["0"],"neighborhood":[1,0],
            "random_neighborhood":[0],"rule":{"10|0":"1"},"default":"0"}"#;
        let a = parse_sca(text, &Budget::default()).unwrap();
        assert_eq!(a.neighborhood(), &[0, 1]);
        // key "10" means c_1 = 1, c_0 = 0
        assert_eq!(a.rule(&[0, 1], &[0]), 1);
        assert_eq!(a.rule(&[1, 0], &[0]), 0);
    }

    #[test]
    fn local_distribution_compiles() {
        let text = r#"{"states":["0","1"],"neighborhood":[0],
            "local_distribution":{"*":{"0":"2/3","1":"1/3"}}}"#;
        let a = parse_sca(text, &Budget::default()).unwrap();
        assert_eq!(a.random().len(), 3);
        assert!(a.is_cfca());
        assert_eq!(a.local_distribution(&[1]).unwrap()[0], crate::rational::ratio(2, 3));
    }
}

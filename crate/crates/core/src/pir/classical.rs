//! Two-round multi-server classical PIR schemes: every server receives one
//! query drawn from shared randomness and returns one answer, and the user
//! reconstructs `x_i` from all answers.
//!
//! Databases are `n`-bit integers with `x_1` the most significant bit.
//! Subsets of `[m]` are characteristic bitstrings with element 1 first.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ip::parity;

/// Largest `R * 2^n` accepted for exhaustive verification.
pub const VERIFY_BUDGET: u64 = 1 << 24;
pub const MAX_DATABASE_BITS: usize = 32;

/// `(r, i, server) -> query`, with `i` 1-based.
pub type QueryFn = Arc<dyn Fn(u64, usize, usize) -> u64 + Send + Sync>;
/// `(server, query) -> mask`; the answer is the parity of `mask & x`.
pub type ParityMaskFn = Arc<dyn Fn(usize, u64) -> u64 + Send + Sync>;
/// `(server, query, x) -> answer`.
pub type AnswerFn = Arc<dyn Fn(usize, u64, u64) -> u64 + Send + Sync>;
/// `(i, r, answers) -> bit`.
pub type ReconstructFn = Arc<dyn Fn(usize, u64, &[u64]) -> u64 + Send + Sync>;

#[derive(Clone)]
pub enum AnswerMap {
    Parity(ParityMaskFn),
    General(AnswerFn),
}

#[derive(Clone)]
pub struct ClassicalPirScheme {
    pub name: String,
    pub servers: usize,
    pub n: usize,
    /// Size of the randomness space; `r` ranges over `0..randomness`.
    pub randomness: u64,
    pub query_bits: usize,
    pub answer_bits: usize,
    pub query: QueryFn,
    pub answer: AnswerMap,
    pub reconstruct: ReconstructFn,
}

impl fmt::Debug for ClassicalPirScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.descriptor())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeDescriptor {
    pub name: String,
    pub servers: usize,
    pub n: usize,
    pub randomness: u64,
    pub query_bits: usize,
    pub answer_bits: usize,
    pub communication_bits: usize,
}

impl ClassicalPirScheme {
    pub fn descriptor(&self) -> SchemeDescriptor {
        SchemeDescriptor {
            name: self.name.clone(),
            servers: self.servers,
            n: self.n,
            randomness: self.randomness,
            query_bits: self.query_bits,
            answer_bits: self.answer_bits,
            communication_bits: self.communication_bits(),
        }
    }

    /// `servers * (query_bits + answer_bits)`.
    pub fn communication_bits(&self) -> usize {
        self.servers * (self.query_bits + self.answer_bits)
    }

    pub fn query(&self, r: u64, i: usize, server: usize) -> u64 {
        (self.query)(r, i, server)
    }

    pub fn answer(&self, server: usize, q: u64, x: u64) -> u64 {
        match &self.answer {
            AnswerMap::Parity(mask) => parity(mask(server, q) & x),
            AnswerMap::General(f) => f(server, q, x),
        }
    }

    pub fn reconstruct(&self, i: usize, r: u64, answers: &[u64]) -> u64 {
        (self.reconstruct)(i, r, answers)
    }

    /// Runs the scheme honestly.
    pub fn retrieve(&self, x: u64, i: usize, r: u64) -> u64 {
        let answers: Vec<u64> = (0..self.servers).map(|s| self.answer(s, self.query(r, i, s), x)).collect();
        self.reconstruct(i, r, &answers)
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.n {
            return Err(Error::InputOutOfRange(format!("index {i} outside 1..={}", self.n)));
        }
        Ok(())
    }
}

/// `x_i` for a 1-based index, `x_1` most significant.
pub fn database_bit(x: u64, n: usize, i: usize) -> u64 {
    (x >> (n - i)) & 1
}

fn xor_all(answers: &[u64]) -> u64 {
    answers.iter().fold(0, |a, b| a ^ b)
}

/// Server 0 receives a random subset `S`, server 1 receives `S` with `i`
/// toggled; both answer the parity of the selected bits.
pub fn two_server_xor_scheme(n: usize) -> Result<ClassicalPirScheme> {
    if n == 0 || n > MAX_DATABASE_BITS {
        return Err(Error::OutOfRange(format!("database length {n}, expected 1..={MAX_DATABASE_BITS}")));
    }
    Ok(ClassicalPirScheme {
        name: format!("two-server xor n={n}"),
        servers: 2,
        n,
        randomness: 1 << n,
        query_bits: n,
        answer_bits: 1,
        query: Arc::new(move |r, i, s| if s == 0 { r } else { r ^ (1 << (n - i)) }),
        answer: AnswerMap::Parity(Arc::new(|_, q| q)),
        reconstruct: Arc::new(|_, _, a| xor_all(a)),
    })
}

fn exact_root(n: usize, d: u32) -> Option<usize> {
    let guess = (n as f64).powf(1.0 / d as f64).round() as usize;
    (guess.saturating_sub(1)..=guess + 1).find(|&m| m.checked_pow(d) == Some(n))
}

/// `2^d` servers over the `d`-dimensional cube `[m]^d` with `n = m^d`.
/// Server `e` receives `(S_1, ..., S_d)` with `i_j` toggled in `S_j`
/// whenever bit `j` of `e` is set (bit 1 most significant), and answers the
/// parity of `x` over the subcube `S_1 x ... x S_d`.
pub fn cube_scheme(n: usize, d: usize) -> Result<ClassicalPirScheme> {
    if d == 0 || d > 6 {
        return Err(Error::OutOfRange(format!("dimension {d}, expected 1..=6")));
    }
    if n == 0 || n > MAX_DATABASE_BITS {
        return Err(Error::OutOfRange(format!("database length {n}, expected 1..={MAX_DATABASE_BITS}")));
    }
    let m = exact_root(n, d as u32)
        .ok_or_else(|| Error::OutOfRange(format!("{n} is not m^{d} for any integer m")))?;
    if d * m > 63 {
        return Err(Error::OutOfRange(format!("query of {} bits does not fit", d * m)));
    }
    let digits = move |i: usize| -> Vec<usize> {
        let mut rest = i - 1;
        let mut out = vec![0; d];
        for slot in out.iter_mut().rev() {
            *slot = rest % m;
            rest /= m;
        }
        out
    };
    let query = move |r: u64, i: usize, s: usize| -> u64 {
        let idx = digits(i);
        let mut q = r;
        for (j, &ij) in idx.iter().enumerate() {
            if (s >> (d - 1 - j)) & 1 == 1 {
                q ^= 1 << ((d - 1 - j) * m + (m - 1 - ij));
            }
        }
        q
    };
    let mask = move |_: usize, q: u64| -> u64 {
        let sets: Vec<u64> = (0..d).map(|j| (q >> ((d - 1 - j) * m)) & ((1 << m) - 1)).collect();
        let mut out = 0u64;
        for p in 0..n {
            let coords = digits(p + 1);
            if coords.iter().zip(&sets).all(|(&c, &set)| (set >> (m - 1 - c)) & 1 == 1) {
                out |= 1 << (n - 1 - p);
            }
        }
        out
    };
    Ok(ClassicalPirScheme {
        name: format!("cube n={n} d={d}"),
        servers: 1 << d,
        n,
        randomness: 1 << (d * m),
        query_bits: d * m,
        answer_bits: 1,
        query: Arc::new(query),
        answer: AnswerMap::Parity(Arc::new(mask)),
        reconstruct: Arc::new(|_, _, a| xor_all(a)),
    })
}

/// Correct but not private: server 0 receives `{i}` itself.
pub fn cleartext_index_scheme(n: usize) -> Result<ClassicalPirScheme> {
    if n == 0 || n > MAX_DATABASE_BITS {
        return Err(Error::OutOfRange(format!("database length {n}, expected 1..={MAX_DATABASE_BITS}")));
    }
    Ok(ClassicalPirScheme {
        name: format!("cleartext index n={n}"),
        servers: 2,
        n,
        randomness: 1 << n,
        query_bits: n,
        answer_bits: 1,
        query: Arc::new(move |_, i, s| if s == 0 { 1 << (n - i) } else { 0 }),
        answer: AnswerMap::Parity(Arc::new(|_, q| q)),
        reconstruct: Arc::new(|_, _, a| xor_all(a)),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryCounterexample {
    pub x: u64,
    pub index: usize,
    pub r: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ServerDistribution {
    pub server: usize,
    /// Largest `sum_q |count_i(q) - count_j(q)|` over index pairs; the
    /// total-variation distance is this over `2R`.
    pub max_count_gap: u64,
    pub max_tv_distance: f64,
    /// Index pair achieving the maximum.
    pub worst_pair: Option<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeVerdict {
    pub scheme: SchemeDescriptor,
    pub cases: u64,
    pub correct: bool,
    pub counterexample: Option<QueryCounterexample>,
    pub servers: Vec<ServerDistribution>,
    pub private: bool,
    pub accepted: bool,
}

fn query_histograms(scheme: &ClassicalPirScheme, server: usize) -> Vec<HashMap<u64, u64>> {
    (1..=scheme.n)
        .map(|i| {
            let mut h = HashMap::new();
            for r in 0..scheme.randomness {
                *h.entry(scheme.query(r, i, server)).or_insert(0) += 1;
            }
            h
        })
        .collect()
}

fn count_gap(a: &HashMap<u64, u64>, b: &HashMap<u64, u64>) -> u64 {
    let mut gap = 0;
    for (q, &c) in a {
        gap += c.abs_diff(*b.get(q).unwrap_or(&0));
    }
    for (q, &c) in b {
        if !a.contains_key(q) {
            gap += c;
        }
    }
    gap
}

fn first_failure(scheme: &ClassicalPirScheme, i: usize) -> Option<QueryCounterexample> {
    let n = scheme.n;
    let mut answers = vec![0u64; scheme.servers];
    for r in 0..scheme.randomness {
        let queries: Vec<u64> = (0..scheme.servers).map(|s| scheme.query(r, i, s)).collect();
        let masks: Option<Vec<u64>> = match &scheme.answer {
            AnswerMap::Parity(f) => Some(queries.iter().enumerate().map(|(s, &q)| f(s, q)).collect()),
            AnswerMap::General(_) => None,
        };
        for x in 0..(1u64 << n) {
            for (s, slot) in answers.iter_mut().enumerate() {
                *slot = match &masks {
                    Some(m) => parity(m[s] & x),
                    None => scheme.answer(s, queries[s], x),
                };
            }
            if scheme.reconstruct(i, r, &answers) != database_bit(x, n, i) {
                return Some(QueryCounterexample { x, index: i, r });
            }
        }
    }
    None
}

/// Exhaustive check of correctness over all `(x, i, r)` and of the exact
/// per-server query distributions across indices.
pub fn verify_scheme(scheme: &ClassicalPirScheme) -> Result<SchemeVerdict> {
    let work = scheme.randomness.checked_mul(1u64 << scheme.n.min(63));
    if scheme.n > 24 || work.is_none_or(|w| w > VERIFY_BUDGET) {
        return Err(Error::Budget(format!(
            "R * 2^n = {} * 2^{} exceeds 2^24",
            scheme.randomness, scheme.n
        )));
    }
    let counterexample = (1..=scheme.n)
        .into_par_iter()
        .map(|i| first_failure(scheme, i))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .next();

    let servers: Vec<ServerDistribution> = (0..scheme.servers)
        .map(|s| {
            let hist = query_histograms(scheme, s);
            let mut worst = ServerDistribution { server: s, max_count_gap: 0, max_tv_distance: 0.0, worst_pair: None };
            for a in 0..hist.len() {
                for b in (a + 1)..hist.len() {
                    let gap = count_gap(&hist[a], &hist[b]);
                    if gap > worst.max_count_gap {
                        worst.max_count_gap = gap;
                        worst.worst_pair = Some((a + 1, b + 1));
                    }
                }
            }
            worst.max_tv_distance = worst.max_count_gap as f64 / (2.0 * scheme.randomness as f64);
            worst
        })
        .collect();
    let correct = counterexample.is_none();
    let private = servers.iter().all(|s| s.max_count_gap == 0);
    Ok(SchemeVerdict {
        scheme: scheme.descriptor(),
        cases: scheme.randomness * (1u64 << scheme.n) * scheme.n as u64,
        correct,
        counterexample,
        servers,
        private,
        accepted: correct && private,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xor_worked_example() {
        let s = two_server_xor_scheme(4).unwrap();
        let x = 0b1011;
        let r = 0b1010; // S = {1, 3}
        let a0 = s.answer(0, s.query(r, 2, 0), x);
        let a1 = s.answer(1, s.query(r, 2, 1), x);
        assert_eq!((a0, a1), (0, 0));
        assert_eq!(a0 ^ a1, database_bit(x, 4, 2));
        assert_eq!((s.query(0, 1, 0), s.query(0, 1, 1)), (0, 0b1000));
    }

    #[test]
    fn cube_accounting() {
        let s = cube_scheme(4, 2).unwrap();
        assert_eq!(s.communication_bits(), 20);
        assert!(cube_scheme(5, 2).is_err());
        assert_eq!(exact_root(16, 2), Some(4));
        assert_eq!(exact_root(27, 3), Some(3));
    }

    #[test]
    fn one_dimensional_cube_is_xor() {
        let c = cube_scheme(4, 1).unwrap();
        let x = two_server_xor_scheme(4).unwrap();
        for r in 0..16 {
            for i in 1..=4 {
                for s in 0..2 {
                    let q = c.query(r, i, s);
                    assert_eq!(q, x.query(r, i, s));
                    for db in 0..16 {
                        assert_eq!(c.answer(s, q, db), x.answer(s, q, db));
                    }
                }
            }
        }
    }

    #[test]
    fn cleartext_is_rejected() {
        let v = verify_scheme(&cleartext_index_scheme(4).unwrap()).unwrap();
        assert!(v.correct);
        assert!(!v.private);
        assert_eq!(v.servers[0].max_tv_distance, 1.0);
    }

    #[test]
    fn budget() {
        assert!(matches!(verify_scheme(&two_server_xor_scheme(13).unwrap()), Err(Error::Budget(_))));
    }
}

//! Deterministic and public-coin classical protocols, and the information
//! their transcripts carry about each input.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{InputDistribution, Party};
use crate::error::{Error, Result};
use crate::linalg::shannon_entropy;

/// Agreement tolerance between the direct and round-by-round values.
pub const CHAIN_TOLERANCE: f64 = 1e-9;

/// Message of one round from the sender's input, the public coin and the
/// transcript so far.
pub type MessageFn = Arc<dyn Fn(u64, u64, &[u32]) -> u32 + Send + Sync>;

#[derive(Clone)]
pub struct ClassicalRound {
    pub sender: Party,
    pub message: MessageFn,
}

#[derive(Clone)]
pub struct ClassicalProtocol {
    pub name: String,
    pub x_size: usize,
    pub y_size: usize,
    /// Number of equally likely public coin values (1 = no coin).
    pub coins: u64,
    pub rounds: Vec<ClassicalRound>,
}

impl ClassicalProtocol {
    pub fn transcript(&self, x: u64, y: u64, coin: u64) -> Vec<u32> {
        let mut t = Vec::with_capacity(self.rounds.len());
        for r in &self.rounds {
            let own = match r.sender {
                Party::P0 => x,
                Party::P1 => y,
            };
            let m = (r.message)(own, coin, &t);
            t.push(m);
        }
        t
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassicalRoundTerm {
    pub round: usize,
    pub sender: Party,
    /// `I(M_k : sender input | other input, coin, M_<k)`.
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TranscriptPrivacy {
    /// `I(T : X | Y)`, transcript including the coin.
    pub leak_x: f64,
    /// `I(T : Y | X)`.
    pub leak_y: f64,
    pub terms: Vec<ClassicalRoundTerm>,
    pub sum_x: f64,
    pub sum_y: f64,
    pub consistent: bool,
}

// One point of the joint distribution: (x, y, coin, transcript, prob).
type Outcome = (u64, u64, u64, Vec<u32>, f64);

fn entropy_by<K: Ord, F: Fn(&Outcome) -> K>(points: &[Outcome], key: F) -> f64 {
    let mut m: BTreeMap<K, f64> = BTreeMap::new();
    for p in points {
        *m.entry(key(p)).or_insert(0.0) += p.4;
    }
    shannon_entropy(m.into_values())
}

fn outcomes(protocol: &ClassicalProtocol, mu: &InputDistribution) -> Result<Vec<Outcome>> {
    if mu.x_size() != protocol.x_size || mu.y_size() != protocol.y_size {
        return Err(Error::ModeMismatch("distribution does not match the input alphabets".into()));
    }
    if protocol.coins == 0 {
        return Err(Error::OutOfRange("coin space is empty".into()));
    }
    let mut out = Vec::new();
    for (x, y, p) in mu.support() {
        for c in 0..protocol.coins {
            out.push((x, y, c, protocol.transcript(x, y, c), p / protocol.coins as f64));
        }
    }
    Ok(out)
}

/// Computes `I(T:X|Y)` and `I(T:Y|X)` directly and as round-by-round sums
/// over the rounds each party speaks in.
pub fn classical_transcript_privacy(protocol: &ClassicalProtocol, mu: &InputDistribution) -> Result<TranscriptPrivacy> {
    let pts = outcomes(protocol, mu)?;
    let h_xy = entropy_by(&pts, |p| (p.0, p.1));
    let h_x = entropy_by(&pts, |p| p.0);
    let h_y = entropy_by(&pts, |p| p.1);
    let h_txy = entropy_by(&pts, |p| (p.2, p.3.clone(), p.0, p.1));
    let h_ty = entropy_by(&pts, |p| (p.2, p.3.clone(), p.1));
    let h_tx = entropy_by(&pts, |p| (p.2, p.3.clone(), p.0));
    let leak_x = h_ty + h_xy - h_y - h_txy;
    let leak_y = h_tx + h_xy - h_x - h_txy;

    let mut terms = Vec::new();
    for (i, r) in protocol.rounds.iter().enumerate() {
        let k = i + 1;
        // I(M_k : own | other, C, M_<k)
        let own = |p: &Outcome| match r.sender {
            Party::P0 => p.0,
            Party::P1 => p.1,
        };
        let other = |p: &Outcome| match r.sender {
            Party::P0 => p.1,
            Party::P1 => p.0,
        };
        let a = entropy_by(&pts, |p| (other(p), p.2, p.3[..k].to_vec()));
        let b = entropy_by(&pts, |p| (own(p), other(p), p.2, p.3[..k - 1].to_vec()));
        let c = entropy_by(&pts, |p| (other(p), p.2, p.3[..k - 1].to_vec()));
        let d = entropy_by(&pts, |p| (own(p), other(p), p.2, p.3[..k].to_vec()));
        terms.push(ClassicalRoundTerm { round: k, sender: r.sender, value: a + b - c - d });
    }
    let sum_x: f64 = terms.iter().filter(|t| t.sender == Party::P0).map(|t| t.value).sum();
    let sum_y: f64 = terms.iter().filter(|t| t.sender == Party::P1).map(|t| t.value).sum();
    let consistent = (leak_x - sum_x).abs() <= CHAIN_TOLERANCE && (leak_y - sum_y).abs() <= CHAIN_TOLERANCE;
    Ok(TranscriptPrivacy { leak_x, leak_y, terms, sum_x, sum_y, consistent })
}

pub const CONTINUE: u32 = 0;
pub const HALT: u32 = 1;
pub const SILENT: u32 = 2;

/// Largest domain for the ascending-halt protocol.
pub const MAX_ID_MIN_DOMAIN: usize = 16;

/// Ascending-halt protocol for the identity and value of the minimum: in
/// rounds `2k-1` and `2k` P0 and then P1 announce whether their input is `k`;
/// everything after the first halt is silent. Input index `v` stands for
/// the value `v + 1`.
pub fn id_minimum_protocol(domain: usize) -> Result<ClassicalProtocol> {
    if domain == 0 || domain > MAX_ID_MIN_DOMAIN {
        return Err(Error::OutOfRange(format!("domain {domain} outside 1..={MAX_ID_MIN_DOMAIN}")));
    }
    let mut rounds = Vec::with_capacity(2 * domain);
    for k in 0..domain as u64 {
        for sender in [Party::P0, Party::P1] {
            let message: MessageFn = Arc::new(move |own, _, t: &[u32]| {
                if t.contains(&HALT) {
                    SILENT
                } else if own == k {
                    HALT
                } else {
                    CONTINUE
                }
            });
            rounds.push(ClassicalRound { sender, message });
        }
    }
    Ok(ClassicalProtocol { name: format!("id-minimum({domain})"), x_size: domain, y_size: domain, coins: 1, rounds })
}

/// `(minimum, holder)`, ties going to P0.
pub fn id_minimum(x: u64, y: u64) -> (u64, Party) {
    if x <= y {
        (x, Party::P0)
    } else {
        (y, Party::P1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubstitutionReport {
    pub domain: usize,
    /// `I(T : Y | X, F(X,Y))` in the honest run.
    pub honest_excess: f64,
    /// `I(T : Y | X, X', F(X,Y))` when P0 runs on an independent uniform `X'`.
    pub substituted_excess: f64,
    /// `I(T : Y | X)` in the honest run.
    pub honest_leak: f64,
    /// `I(T : Y | X, X')` with substitution.
    pub substituted_leak: f64,
    /// Probability that P1 halts, announcing its input, under substitution.
    pub reveal_probability: f64,
}

/// Leakage about P1's input beyond what the true output reveals, honest
/// versus P0 substituting a uniformly random input.
pub fn id_minimum_substitution(domain: usize) -> Result<SubstitutionReport> {
    let proto = id_minimum_protocol(domain)?;
    let n = domain as u64;
    let p = 1.0 / (n * n * n) as f64;
    // (x, x', y, transcript, output) with the substituted run
    let mut honest = Vec::new();
    let mut subst = Vec::new();
    let mut reveal = 0.0;
    for x in 0..n {
        for xs in 0..n {
            for y in 0..n {
                let f = id_minimum(x, y);
                let ts = proto.transcript(xs, y, 0);
                if ts.contains(&HALT) && ts.iter().position(|&m| m == HALT).unwrap() % 2 == 1 {
                    reveal += p;
                }
                subst.push((x, xs, y, ts, f, p));
                if xs == 0 {
                    honest.push((x, x, y, proto.transcript(x, y, 0), f, 1.0 / (n * n) as f64));
                }
            }
        }
    }
    type Row = (u64, u64, u64, Vec<u32>, (u64, Party), f64);
    fn h<K: Ord>(rows: &[Row], key: impl Fn(&Row) -> K) -> f64 {
        let mut m: BTreeMap<K, f64> = BTreeMap::new();
        for r in rows {
            *m.entry(key(r)).or_insert(0.0) += r.5;
        }
        shannon_entropy(m.into_values())
    }
    // I(T : Y | C) = H(T,C) + H(Y,C) - H(C) - H(T,Y,C)
    let cmi = |rows: &[Row], with_output: bool| {
        let c = |r: &Row| (r.0, r.1, if with_output { Some(r.4) } else { None });
        h(rows, |r| (r.3.clone(), c(r))) + h(rows, |r| (r.2, c(r))) - h(rows, c) - h(rows, |r| (r.3.clone(), r.2, c(r)))
    };
    Ok(SubstitutionReport {
        domain,
        honest_excess: cmi(&honest, true),
        substituted_excess: cmi(&subst, true),
        honest_leak: cmi(&honest, false),
        substituted_leak: cmi(&subst, false),
        reveal_probability: reveal,
    })
}

/// A random classical protocol with at most three rounds, inputs of at most
/// three bits, a one- or two-valued coin, and a non-product input
/// distribution. Message tables are drawn from a seeded generator.
pub fn random_protocol(seed: u64) -> (ClassicalProtocol, InputDistribution) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x_size = rng.random_range(2..=8usize);
    let y_size = rng.random_range(2..=8usize);
    let coins = rng.random_range(1..=2u64);
    let alphabet = rng.random_range(2..=3u32);
    let round_count = rng.random_range(1..=3usize);
    let mut rounds = Vec::new();
    for k in 0..round_count {
        let sender = if rng.random_bool(0.5) { Party::P0 } else { Party::P1 };
        let inputs = match sender {
            Party::P0 => x_size,
            Party::P1 => y_size,
        };
        let histories = (alphabet as usize).pow(k as u32);
        let table: Vec<u32> =
            (0..inputs * coins as usize * histories).map(|_| rng.random_range(0..alphabet)).collect();
        let message: MessageFn = Arc::new(move |own, coin, t: &[u32]| {
            let h = t.iter().fold(0usize, |acc, &m| acc * alphabet as usize + m as usize);
            table[(own as usize * coins as usize + coin as usize) * histories + h]
        });
        rounds.push(ClassicalRound { sender, message });
    }
    let weights: Vec<Vec<f64>> =
        (0..x_size).map(|_| (0..y_size).map(|_| rng.random_range(0.05..1.0)).collect()).collect();
    let total: f64 = weights.iter().flatten().sum();
    let mu = InputDistribution::new(weights.into_iter().map(|r| r.into_iter().map(|w| w / total).collect()).collect())
        .expect("normalized weights");
    let proto = ClassicalProtocol { name: format!("random-{seed}"), x_size, y_size, coins, rounds };
    (proto, mu)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_revelation_leaks_input_entropy() {
        let n = 3;
        let proto = ClassicalProtocol {
            name: "send x".into(),
            x_size: 1 << n,
            y_size: 1,
            coins: 1,
            rounds: vec![ClassicalRound { sender: Party::P0, message: Arc::new(|x, _, _| x as u32) }],
        };
        let r = classical_transcript_privacy(&proto, &InputDistribution::uniform(1 << n, 1)).unwrap();
        assert!((r.leak_x - n as f64).abs() < 1e-12);
        assert!(r.consistent);
    }

    #[test]
    fn id_minimum_leaks_only_the_output() {
        let d = 6;
        let proto = id_minimum_protocol(d).unwrap();
        for x in 0..d as u64 {
            for y in 0..d as u64 {
                let t = proto.transcript(x, y, 0);
                let halt = t.iter().position(|&m| m == HALT).unwrap();
                let (min, who) = id_minimum(x, y);
                assert_eq!(halt as u64, 2 * min + if who == Party::P0 { 0 } else { 1 });
            }
        }
        let s = id_minimum_substitution(d).unwrap();
        assert!(s.honest_excess.abs() < 1e-12);
        assert!(s.substituted_excess > 1e-3);
        assert!((s.reveal_probability - (d as f64 - 1.0) / (2.0 * d as f64)).abs() < 1e-12);
    }
}

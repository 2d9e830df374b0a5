//! One-server quantum simulation of a multi-server classical PIR scheme.
//!
//! The user prepares a superposition over the randomness of all queries,
//! keeps a copy of the query tuple in `Q`, and sends `(Q_s, Ans_s)` to the
//! server one virtual server at a time. The server answers in place and
//! sends the pair back, so it never keeps anything.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::classical::{database_bit, ClassicalPirScheme, SchemeDescriptor};
use super::{analyze_pir, PirPrivacyBundle, PirRoles};
use crate::error::{Error, Result};
use crate::ip::bit_labels;
use crate::linalg::MAX_QUBITS;
use crate::protocol::{Decoder, Gate, InputDistribution, Party, Protocol, ProtocolBuilder, Round, Step};

pub const USER: Party = Party::P0;
pub const SERVER: Party = Party::P1;

/// Registers of the compiled protocol: the query copy, then the per-server
/// query registers, then the per-server answer registers.
pub fn qpir_registers(scheme: &ClassicalPirScheme) -> Vec<(String, usize)> {
    let mut regs = vec![("Q".to_string(), scheme.servers * scheme.query_bits)];
    regs.extend((1..=scheme.servers).map(|s| (format!("Q{s}"), scheme.query_bits)));
    regs.extend((1..=scheme.servers).map(|s| (format!("Ans{s}"), scheme.answer_bits)));
    regs
}

pub fn qpir_width(scheme: &ClassicalPirScheme) -> usize {
    scheme.servers * (2 * scheme.query_bits + scheme.answer_bits)
}

fn index_labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| i.to_string()).collect()
}

fn tuple_of(scheme: &ClassicalPirScheme, r: u64, i: usize) -> u64 {
    (0..scheme.servers).fold(0, |acc, s| (acc << scheme.query_bits) | scheme.query(r, i, s))
}

/// Amplitudes of the first state for index `i`: `|t>_Q |t>_{Q_1..Q_l} |0>_Ans`
/// over the query tuples `t`, with weight proportional to how many `r`
/// produce `t`.
fn first_state(scheme: &ClassicalPirScheme, i: usize, width: usize, copy: bool, tilt: bool) -> Vec<Complex64> {
    let tuple_bits = scheme.servers * scheme.query_bits;
    let ans_bits = scheme.servers * scheme.answer_bits;
    let mut weight: BTreeMap<u64, f64> = BTreeMap::new();
    for r in 0..scheme.randomness {
        let t = tuple_of(scheme, r, i);
        // sabotage: favour queries whose first part mentions the index
        let pos = scheme.query_bits - 1 - (i - 1) % scheme.query_bits;
        let w = if tilt && (scheme.query(r, i, 0) >> pos) & 1 == 1 {
            2.0
        } else {
            1.0
        };
        *weight.entry(t).or_insert(0.0) += w;
    }
    let total: f64 = weight.values().sum();
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << width];
    for (t, w) in weight {
        let idx = if copy { (t << tuple_bits) | t } else { t };
        amps[(idx << ans_bits) as usize] = Complex64::new((w / total).sqrt(), 0.0);
    }
    amps
}

fn answer_gate(scheme: &ClassicalPirScheme, server: usize, x: u64) -> Gate {
    let (qb, ab) = (scheme.query_bits, scheme.answer_bits);
    Gate::Permutation(
        (0..(1usize << (qb + ab)))
            .map(|k| {
                let q = (k >> ab) as u64;
                k ^ scheme.answer(server, q, x) as usize
            })
            .collect(),
    )
}

fn compile(scheme: &ClassicalPirScheme, copy: bool, tilt: bool) -> Result<Protocol> {
    let mut regs = qpir_registers(scheme);
    if !copy {
        regs.remove(0);
    }
    let width: usize = regs.iter().map(|r| r.1).sum();
    if width > MAX_QUBITS {
        return Err(Error::WidthCap { requested: width, cap: MAX_QUBITS });
    }
    let name = if copy { format!("quantum pir [{}]", scheme.name) } else { format!("quantum pir without copy [{}]", scheme.name) };
    let mut builder =
        ProtocolBuilder::new(&name, ["user", "server"], index_labels(scheme.n), bit_labels(scheme.n));
    for (r, w) in &regs {
        builder = builder.register(r, *w, USER)?;
    }
    let all: Vec<&str> = regs.iter().map(|r| r.0.as_str()).collect();
    for s in 1..=scheme.servers {
        let pair = [format!("Q{s}"), format!("Ans{s}")];
        let pair: Vec<&str> = pair.iter().map(String::as_str).collect();
        let mut out = Round::new(USER);
        if s == 1 {
            let sc = scheme.clone();
            out = out.step(Step::new(USER, &all, "prepare", move |i| {
                Gate::Prepare(first_state(&sc, i as usize + 1, width, copy, tilt))
            }));
        }
        let sc = scheme.clone();
        let back = Round::new(SERVER)
            .step(Step::new(SERVER, &pair, "answer", move |x| answer_gate(&sc, s - 1, x)))
            .send(&pair);
        builder = builder.round(out.send(&pair)).round(back);
    }

    // any r producing the measured tuple reconstructs correctly
    let mut lookup: HashMap<(usize, u64), u64> = HashMap::new();
    for i in 1..=scheme.n {
        for r in 0..scheme.randomness {
            lookup.entry((i, tuple_of(scheme, r, i))).or_insert(r);
        }
    }
    let sc = scheme.clone();
    let parts = if copy { 1 } else { scheme.servers };
    let mut measured: Vec<String> = if copy { vec!["Q".into()] } else { (1..=scheme.servers).map(|s| format!("Q{s}")).collect() };
    measured.extend((1..=scheme.servers).map(|s| format!("Ans{s}")));
    let qb = scheme.query_bits;
    let decode = move |i: u64, v: &[u64]| -> u64 {
        let i = i as usize + 1;
        let tuple = v[..parts].iter().fold(0, |acc, q| (acc << qb) | q);
        match lookup.get(&(i, tuple)) {
            Some(&r) => sc.reconstruct(i, r, &v[parts..]),
            // not a valid query tuple: report an impossible value
            None => u64::MAX,
        }
    };
    builder.decoder(Decoder { party: USER, steps: Vec::new(), measured, decode: Arc::new(decode) }).build()
}

/// Compiles `scheme` into a `2 * servers`-round protocol between the user
/// (inputs: 1-based indices) and the server (inputs: databases).
pub fn build_qpir(scheme: &ClassicalPirScheme) -> Result<Protocol> {
    compile(scheme, true, false)
}

/// Broken compilation used to exercise the independence check: no query
/// copy, and the weights over the randomness depend on the index.
pub fn build_qpir_tilted(scheme: &ClassicalPirScheme) -> Result<Protocol> {
    compile(scheme, false, true)
}

/// Largest trace distance, over pairs of user indices, between the
/// server's holdings after each round in which it receives a message.
pub fn server_view_independence(protocol: &Protocol, x: u64) -> Result<f64> {
    let mut worst = 0.0f64;
    for k in (1..=protocol.round_count()).filter(|&k| Party::sender_of(k) == USER) {
        worst = worst.max(protocol.view_distance(SERVER, x, k)?);
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QpirCorrectness {
    pub scheme: SchemeDescriptor,
    pub cases: usize,
    /// Every measurement branch decodes `x_i` for every `(x, i)`.
    pub all_branches_correct: bool,
    pub failures: Vec<(u64, usize)>,
    pub communication_qubits: usize,
}

/// Runs every `(x, i)` and checks each computational-basis branch.
pub fn qpir_correctness(scheme: &ClassicalPirScheme, protocol: &Protocol) -> Result<QpirCorrectness> {
    use rayon::prelude::*;
    let n = scheme.n;
    let pairs: Vec<(u64, usize)> =
        (0..(1u64 << n)).flat_map(|x| (1..=n).map(move |i| (x, i))).collect();
    let failures: Vec<(u64, usize)> = pairs
        .par_iter()
        .map(|&(x, i)| -> Result<Option<(u64, usize)>> {
            let run = protocol.run_honest(i as u64 - 1, x)?;
            let ok = run.outcomes.len() == 1 && run.output == Some(database_bit(x, n, i));
            Ok(if ok { None } else { Some((x, i)) })
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(QpirCorrectness {
        scheme: scheme.descriptor(),
        cases: pairs.len(),
        all_branches_correct: failures.is_empty(),
        failures,
        communication_qubits: protocol.communication_qubits(),
    })
}

/// Privacy of both sides under the uniform distribution over `(i, x)`.
/// The server's loss is bounded by the total communication.
/// With `costs`, the superposed and quantum costs are added where the
/// width allows.
pub fn qpir_privacy_report(scheme: &ClassicalPirScheme, costs: bool) -> Result<PirPrivacyBundle> {
    let protocol = build_qpir(scheme)?;
    let mu = InputDistribution::uniform(scheme.n, 1 << scheme.n);
    let bound = (2 * scheme.servers * (scheme.query_bits + scheme.answer_bits)) as f64;
    analyze_pir(&protocol, &mu, PirRoles { user: USER }, bound, costs)
}

#[cfg(test)]
mod tests {
    use super::super::classical::two_server_xor_scheme;
    use super::*;

    #[test]
    fn layout_and_accounting() {
        let s = two_server_xor_scheme(4).unwrap();
        assert_eq!(qpir_width(&s), 18);
        let p = build_qpir(&s).unwrap();
        assert_eq!(p.round_count(), 4);
        assert_eq!(p.communication_qubits(), 20);
    }

    #[test]
    fn decodes_small() {
        let s = two_server_xor_scheme(2).unwrap();
        let p = build_qpir(&s).unwrap();
        let c = qpir_correctness(&s, &p).unwrap();
        assert!(c.all_branches_correct, "{:?}", c.failures);
    }

    #[test]
    fn width_cap() {
        let s = two_server_xor_scheme(5).unwrap();
        assert!(matches!(build_qpir(&s), Err(Error::WidthCap { .. })));
    }
}

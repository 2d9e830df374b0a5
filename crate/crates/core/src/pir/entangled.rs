//! Single-server PIR using shared maximally correlated pairs.
//!
//! For a database of `n = 2^l` bits the server and the user share, for
//! every level `k`, a pair `(R_k, R'_k)` of `2^(l-k)` qubits each in
//! `sum_z |z>|z>`. At level `k` the server injects the parities of its
//! current string's halves into `(Q_0, Q_1)`, the user flips a phase on the
//! half selected by its index bit, and the server uncomputes. Hadamards on
//! both sides then move the selected half, masked, into the user's `R'_k`.
//! Finally the server sends `R_l`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{analyze_pir, PirPrivacyBundle, PirRoles};
use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::ip::{bit_labels, parity};
use crate::linalg::{DensityMatrix, PureState, RegisterLayout};
use crate::protocol::{Decoder, Gate, InputDistribution, Party, Protocol, ProtocolBuilder, Round, Step};

pub const SERVER: Party = Party::P0;
pub const USER: Party = Party::P1;
pub const MAX_LEVELS: usize = 3;
/// Largest depth for which ensemble privacy quantities are computed.
pub const MAX_ENSEMBLE_LEVELS: usize = 2;

fn check_levels(ell: usize, max: usize) -> Result<()> {
    if ell == 0 || ell > max {
        return Err(Error::OutOfRange(format!("depth {ell}, expected 1..={max}")));
    }
    Ok(())
}

/// Width of `R_k` and `R'_k`.
fn level_width(ell: usize, k: usize) -> usize {
    1 << (ell - k)
}

pub fn server_register(k: usize) -> String {
    format!("R{k}")
}

pub fn user_register(k: usize) -> String {
    format!("R{k}'")
}

/// Bits `(i_1, ..., i_l)` of a 1-based index, `i = 1 + sum i_k 2^(l-k)`.
pub fn index_path(ell: usize, i: usize) -> Vec<bool> {
    (1..=ell).map(|k| ((i - 1) >> (ell - k)) & 1 == 1).collect()
}

fn halves(v: u64, width: usize) -> (u64, u64) {
    let h = width / 2;
    (v >> h, v & ((1 << h) - 1))
}

/// Permutation of the parity injection at level `k` over
/// `(R_{k-1}, R_k, Q_0, Q_1)`, or over `(R_1, Q_0, Q_1)` at level 1 where
/// the string is the database `x`.
pub fn injection_permutation(ell: usize, k: usize, x: u64) -> Vec<usize> {
    let w = level_width(ell, k);
    let (outer, source) = if k == 1 { (1usize, Some(x)) } else { (1usize << (2 * w), None) };
    let mut perm = Vec::with_capacity(outer << (w + 2));
    for y in 0..outer as u64 {
        let (h0, h1) = halves(source.unwrap_or(y), 2 * w);
        for z in 0..(1u64 << w) {
            for ab in 0..4u64 {
                let a = (ab >> 1) ^ parity(z & h0);
                let b = (ab & 1) ^ parity(z & h1);
                perm.push((((y << w | z) << 2) | (a << 1) | b) as usize);
            }
        }
    }
    perm
}

fn pair_state(ell: usize, k: usize) -> Result<PureState> {
    let w = level_width(ell, k);
    let layout = RegisterLayout::new([(server_register(k), w), (user_register(k), w)])?;
    let amp = Complex64::new((0.5f64).powf(w as f64 / 2.0), 0.0);
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << (2 * w)];
    for z in 0..(1usize << w) {
        amps[(z << w) | z] = amp;
    }
    PureState::new(amps, layout)
}

fn registers(ell: usize) -> Vec<(String, usize, Party)> {
    let mut regs = Vec::new();
    for k in 1..=ell {
        regs.push((server_register(k), level_width(ell, k), SERVER));
        regs.push((user_register(k), level_width(ell, k), USER));
    }
    regs.push(("Q0".into(), 1, SERVER));
    regs.push(("Q1".into(), 1, SERVER));
    regs
}

fn initial_state(ell: usize) -> Result<PureState> {
    let mut state = pair_state(ell, 1)?;
    for k in 2..=ell {
        state = state.tensor(&pair_state(ell, k)?)?;
    }
    state.tensor(&PureState::zero(RegisterLayout::new([("Q0", 1), ("Q1", 1)])?))
}

fn phase_gate(select_second: bool) -> Gate {
    let (p, m) = (Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0));
    // basis |a b> on (Q0, Q1)
    Gate::Diagonal(if select_second { vec![p, m, p, m] } else { vec![p, p, m, m] })
}

fn build(ell: usize, honest_phase: bool) -> Result<Protocol> {
    check_levels(ell, MAX_LEVELS)?;
    let n = 1usize << ell;
    let name = if honest_phase { format!("entangled pir l={ell}") } else { format!("entangled pir fixed phase l={ell}") };
    let index_labels: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
    let mut builder = ProtocolBuilder::new(&name, ["server", "user"], bit_labels(n), index_labels);
    for (r, w, owner) in registers(ell) {
        builder = builder.register(&r, w, owner)?;
    }
    builder = builder.initial_state(initial_state(ell)?, true);

    let injection = |k: usize| -> Step {
        let rk = server_register(k);
        if k == 1 {
            Step::new(SERVER, &[rk.as_str(), "Q0", "Q1"], "inject", move |x| Gate::Permutation(injection_permutation(ell, 1, x)))
        } else {
            let prev = server_register(k - 1);
            Step::fixed(SERVER, &[prev.as_str(), rk.as_str(), "Q0", "Q1"], "inject", Gate::Permutation(injection_permutation(ell, k, 0)))
        }
    };
    let mut pending: Option<usize> = None;
    for k in 1..=ell {
        let mut out = Round::new(SERVER);
        if let Some(j) = pending {
            out = out
                .step(injection(j))
                .step(Step::fixed(SERVER, &[server_register(j).as_str()], "hadamard", Gate::hadamard_each()))
                .checkpoint(&format!("iteration {j}"));
        }
        out = out.step(injection(k)).send(&["Q0", "Q1"]);
        let phase = Step::new(USER, &["Q0", "Q1"], "phase", move |i| {
            phase_gate(honest_phase && index_path(ell, i as usize + 1)[k - 1])
        });
        let back = Round::new(USER)
            .step(phase)
            .step(Step::fixed(USER, &[user_register(k).as_str()], "hadamard", Gate::hadamard_each()))
            .send(&["Q0", "Q1"]);
        builder = builder.round(out).round(back);
        pending = Some(k);
    }
    let last = server_register(ell);
    builder = builder.round(
        Round::new(SERVER)
            .step(injection(ell))
            .step(Step::fixed(SERVER, &[last.as_str()], "hadamard", Gate::hadamard_each()))
            .checkpoint(&format!("iteration {ell}"))
            .send(&[last.as_str()]),
    );

    let mut measured = vec![last.clone()];
    measured.extend((1..=ell).map(user_register));
    let decode = move |i: u64, v: &[u64]| -> u64 {
        let a = BitString::new(v[0], 1).expect("one-bit register");
        let b: Vec<BitString> = (1..=ell)
            .map(|k| BitString::new(v[k], level_width(ell, k)).expect("register width"))
            .collect();
        ppir_decode(&a, &b, &index_path(ell, i as usize + 1)).map(u64::from).unwrap_or(u64::MAX)
    };
    builder.decoder(Decoder { party: USER, steps: Vec::new(), measured, decode: Arc::new(decode) }).build()
}

/// `2l + 1` rounds: the server sends `(Q_0, Q_1)` in odd rounds `1..2l-1`,
/// the user returns them in even rounds, and round `2l + 1` carries `R_l`.
/// Checkpoint `iteration k` holds the state at the end of level `k`.
pub fn build_ppir(ell: usize) -> Result<Protocol> {
    build(ell, true)
}

/// The user always flips the phase of `Q_0`, whatever its index.
pub fn build_ppir_fixed_phase(ell: usize) -> Result<Protocol> {
    build(ell, false)
}

/// `b^1[i_2..i_l] ^ b^2[i_3..i_l] ^ ... ^ b^l ^ a`.
pub fn ppir_decode(a: &BitString, b: &[BitString], index: &[bool]) -> Result<bool> {
    let ell = b.len();
    if a.len() != 1 || index.len() != ell || ell == 0 {
        return Err(Error::Length(format!(
            "expected a one-bit a, {ell} index bits and at least one b, got |a| = {}, {} index bits",
            a.len(),
            index.len()
        )));
    }
    let mut out = a.get(0);
    for (k, bk) in b.iter().enumerate() {
        if bk.len() != 1 << (ell - k - 1) {
            return Err(Error::Length(format!("b^{} has length {}, expected {}", k + 1, bk.len(), 1 << (ell - k - 1))));
        }
        out ^= bk.slice(&index[k + 1..])?.get(0);
    }
    Ok(out)
}

/// State at the end of level `k` written in closed form: the first `k`
/// pairs hold `|y^j>|y^{j-1}[i_j] ^ y^j>` with `y^0 = x`, the rest are
/// still maximally correlated.
pub fn closed_form_state(ell: usize, x: u64, i: usize, k: usize) -> Result<PureState> {
    check_levels(ell, MAX_LEVELS)?;
    if k == 0 || k > ell {
        return Err(Error::OutOfRange(format!("level {k} of {ell}")));
    }
    let n = 1usize << ell;
    if i == 0 || i > n || x >> n != 0 {
        return Err(Error::InputOutOfRange(format!("index {i} or database {x:#x} outside depth {ell}")));
    }
    let path = index_path(ell, i);
    let layout = RegisterLayout::new(registers(ell).into_iter().map(|(r, w, _)| (r, w)))?;
    let total: usize = (1..=ell).map(|j| level_width(ell, j)).sum();
    let mut amps = vec![Complex64::new(0.0, 0.0); layout.dim()];
    let amp = Complex64::new((0.5f64).powf(total as f64 / 2.0), 0.0);
    // enumerate every y^1..y^l at once, most significant level first
    for packed in 0..(1u64 << total) {
        let mut rest = total;
        let mut prev = x;
        let mut prev_width = n;
        let mut index = 0u64;
        for j in 1..=ell {
            let w = level_width(ell, j);
            rest -= w;
            let y = (packed >> rest) & ((1 << w) - 1);
            let partner = if j <= k {
                let (h0, h1) = halves(prev, prev_width);
                (if path[j - 1] { h1 } else { h0 }) ^ y
            } else {
                y
            };
            index = (((index << w) | y) << w) | partner;
            prev = y;
            prev_width = w;
        }
        amps[(index << 2) as usize] = amp;
    }
    PureState::new(amps, layout)
}

/// Fidelity between the simulated state at the end of level `k` and the
/// closed form.
pub fn closed_form_state_check(ell: usize, x: u64, i: usize, k: usize) -> Result<f64> {
    let protocol = build_ppir(ell)?;
    closed_form_fidelities_for(&protocol, ell, x, i).and_then(|f| {
        f.get(k.wrapping_sub(1)).copied().ok_or_else(|| Error::OutOfRange(format!("level {k} of {ell}")))
    })
}

/// Fidelities at every level for one `(x, i)`.
pub fn closed_form_fidelities_for(protocol: &Protocol, ell: usize, x: u64, i: usize) -> Result<Vec<f64>> {
    let run = protocol.run_honest(x, i as u64 - 1)?;
    (1..=ell)
        .map(|k| {
            let simulated = run
                .checkpoint(&format!("iteration {k}"))
                .ok_or_else(|| Error::Consistency(format!("missing checkpoint for level {k}")))?;
            closed_form_state(ell, x, i, k)?.fidelity(simulated)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PpirRun {
    pub ell: usize,
    pub database: String,
    pub index: usize,
    pub expected: u64,
    /// Decoded bit when every branch agrees.
    pub recovered: Option<u64>,
    pub closed_form_fidelities: Vec<f64>,
    pub communication_qubits: usize,
}

pub fn run_ppir(ell: usize, x: u64, i: usize) -> Result<PpirRun> {
    let protocol = build_ppir(ell)?;
    run_on(&protocol, ell, x, i)
}

fn run_on(protocol: &Protocol, ell: usize, x: u64, i: usize) -> Result<PpirRun> {
    let n = 1usize << ell;
    if i == 0 || i > n {
        return Err(Error::InputOutOfRange(format!("index {i} outside 1..={n}")));
    }
    let run = protocol.run_honest(x, i as u64 - 1)?;
    let db = BitString::new(x, n)?;
    Ok(PpirRun {
        ell,
        database: db.to_string(),
        index: i,
        expected: db.slice(&index_path(ell, i))?.value(),
        recovered: run.output,
        closed_form_fidelities: closed_form_fidelities_for(protocol, ell, x, i)?,
        communication_qubits: protocol.communication_qubits(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PpirCorrectness {
    pub ell: usize,
    pub cases: usize,
    pub exhaustive: bool,
    pub failures: Vec<(u64, usize)>,
    pub min_fidelity: f64,
    pub communication_qubits: usize,
}

/// Exhaustive over `(x, i)` when `samples` is `None`, otherwise that many
/// pairs drawn from a seeded generator.
pub fn ppir_correctness(ell: usize, samples: Option<(usize, u64)>) -> Result<PpirCorrectness> {
    let protocol = build_ppir(ell)?;
    let n = 1usize << ell;
    let pairs: Vec<(u64, usize)> = match samples {
        None => (0..(1u64 << n)).flat_map(|x| (1..=n).map(move |i| (x, i))).collect(),
        Some((count, seed)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count).map(|_| (rng.random_range(0..(1u64 << n)), rng.random_range(1..=n))).collect()
        }
    };
    let runs: Vec<PpirRun> = pairs.par_iter().map(|&(x, i)| run_on(&protocol, ell, x, i)).collect::<Result<_>>()?;
    let failures = pairs.iter().zip(&runs).filter(|(_, r)| r.recovered != Some(r.expected)).map(|(p, _)| *p).collect();
    let min_fidelity = runs.iter().flat_map(|r| r.closed_form_fidelities.iter().copied()).fold(1.0, f64::min);
    Ok(PpirCorrectness {
        ell,
        cases: pairs.len(),
        exhaustive: samples.is_none(),
        failures,
        min_fidelity,
        communication_qubits: protocol.communication_qubits(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UserPrivacyLevel {
    pub level: usize,
    /// Largest trace distance between the server's holdings for two indices.
    pub max_distance: f64,
    /// Largest entrywise gap to the dephased closed form.
    pub mixture_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UserPrivacy {
    pub ell: usize,
    pub database: u64,
    pub levels: Vec<UserPrivacyLevel>,
    pub max_distance: f64,
    pub max_mixture_deviation: f64,
}

/// Server's holdings right after the user's `k`-th reply, in closed form:
/// uniform over earlier strings `y^1..y^{k-1}`, over `z` in `R_k` and over
/// the untouched `R_j`, with `(Q_0, Q_1)` holding the parities of `z` with
/// the halves of `y^{k-1}` (of `x` at level 1).
pub fn server_mixture(ell: usize, x: u64, k: usize) -> Result<DensityMatrix> {
    check_levels(ell, MAX_LEVELS)?;
    let mut names: Vec<String> = (1..=ell).map(server_register).collect();
    names.push("Q0".into());
    names.push("Q1".into());
    let widths: Vec<usize> = (1..=ell).map(|j| level_width(ell, j)).collect();
    let layout = RegisterLayout::new(names.iter().cloned().zip(widths.iter().copied().chain([1, 1])))?;
    let total: usize = widths.iter().sum();
    let dim = layout.dim();
    let weight = (0.5f64).powi(total as i32);
    let mut mat = DMatrix::<Complex64>::zeros(dim, dim);
    for packed in 0..(1u64 << total) {
        let mut rest = total;
        let mut parts = Vec::with_capacity(ell);
        for &w in &widths {
            rest -= w;
            parts.push((packed >> rest) & ((1 << w) - 1));
        }
        let (source, source_width) = if k == 1 { (x, 1usize << ell) } else { (parts[k - 2], widths[k - 2]) };
        let (h0, h1) = halves(source, source_width);
        let z = parts[k - 1];
        let idx = ((packed << 2) | (parity(z & h0) << 1) | parity(z & h1)) as usize;
        mat[(idx, idx)] += Complex64::new(weight, 0.0);
    }
    DensityMatrix::new(mat, layout)
}

/// Independence of the server's holdings from the index after each of the
/// user's replies, and agreement with the closed-form mixture.
pub fn ppir_user_privacy(ell: usize, x: u64) -> Result<UserPrivacy> {
    let protocol = build_ppir(ell)?;
    let n = 1usize << ell;
    let mut levels = Vec::new();
    for k in 1..=ell {
        let round = 2 * k;
        let held = protocol.held_by(SERVER, round)?;
        let mixture = server_mixture(ell, x, k)?;
        let views: Vec<DensityMatrix> = (0..n as u64)
            .map(|i| protocol.state_after_round(x, i, round)?.reduced(&held))
            .collect::<Result<_>>()?;
        let mut max_distance = 0.0f64;
        let mut mixture_deviation = 0.0f64;
        for (a, va) in views.iter().enumerate() {
            mixture_deviation = mixture_deviation.max(va.max_deviation(&mixture)?);
            for vb in &views[a + 1..] {
                max_distance = max_distance.max(va.trace_distance(vb)?);
            }
        }
        levels.push(UserPrivacyLevel { level: k, max_distance, mixture_deviation });
    }
    Ok(UserPrivacy {
        ell,
        database: x,
        max_distance: levels.iter().map(|l| l.max_distance).fold(0.0, f64::max),
        max_mixture_deviation: levels.iter().map(|l| l.mixture_deviation).fold(0.0, f64::max),
        levels,
    })
}

/// Both sides' privacy under uniform inputs; the server's loss is bounded
/// by the `2l + 1` qubits the user receives.
pub fn ppir_privacy_report(ell: usize, costs: bool) -> Result<PirPrivacyBundle> {
    if ell > MAX_ENSEMBLE_LEVELS {
        return Err(Error::Budget(format!(
            "ensemble over 2^{} databases exceeds the depth-{MAX_ENSEMBLE_LEVELS} budget",
            1usize << ell
        )));
    }
    let protocol = build_ppir(ell)?;
    let n = 1usize << ell;
    let mu = InputDistribution::uniform(1 << n, n);
    analyze_pir(&protocol, &mu, PirRoles { user: USER }, (2 * ell + 1) as f64, costs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn communication_and_width() {
        for ell in 1..=3 {
            let p = build_ppir(ell).unwrap();
            assert_eq!(p.communication_qubits(), 4 * ell + 1);
            assert_eq!(p.round_count(), 2 * ell + 1);
        }
        assert_eq!(build_ppir(3).unwrap().layout().width(), 16);
        assert!(build_ppir(4).is_err());
    }

    #[test]
    fn decode_examples() {
        let a = BitString::parse("0").unwrap();
        let b = [BitString::parse("10").unwrap(), BitString::parse("1").unwrap()];
        assert!(ppir_decode(&a, &b, &[false, true]).unwrap());
        let one = [BitString::parse("1").unwrap()];
        assert!(!ppir_decode(&BitString::parse("1").unwrap(), &one, &[true]).unwrap());
        assert!(ppir_decode(&a, &b[..1], &[false, true]).is_err());
    }

    #[test]
    fn injection_is_an_involution() {
        for ell in 1..=2 {
            for k in 1..=ell {
                for x in 0..(1u64 << (1 << ell)) {
                    let p = injection_permutation(ell, k, x);
                    assert!(p.iter().enumerate().all(|(i, &j)| p[j] == i));
                }
            }
        }
    }

    #[test]
    fn depth_one_exhaustive() {
        let c = ppir_correctness(1, None).unwrap();
        assert_eq!(c.cases, 8);
        assert!(c.failures.is_empty(), "{:?}", c.failures);
        assert!(c.min_fidelity > 1.0 - 1e-10);
    }
}

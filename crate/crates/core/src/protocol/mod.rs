//! Round-structured two-party protocols over named qubit registers.
//!
//! P0 sends in odd rounds and P1 in even rounds; a party with nothing to
//! say in its round declares an empty message. Gates are chosen by the
//! acting party's classical input, and each step may only touch registers
//! that party holds at that moment.

mod catalog;
pub mod classical;
mod exec;
mod honesty;
mod modes;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, PureState, RegisterLayout};

pub use catalog::{echo_protocol, echo_with_copy, echo_with_local_unitary, fixed_message_protocol};
pub use exec::{Execution, RoundSnapshot};
pub use honesty::{verify_honest_execution, HonestyFailure, HonestyVerdict, PartyPurity, RoundDiagnostic, HONESTY_TOLERANCE};
pub use modes::{round_state, AnalysisMode, InputDistribution, PurifiedState, RoundState};

/// Name of the classical register holding P0's input.
pub const INPUT_X: &str = "X";
/// Name of the classical register holding P1's input.
pub const INPUT_Y: &str = "Y";
/// Name of the environment register purifying the inputs.
pub const PURIFIER: &str = "Env";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Party {
    P0,
    P1,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::P0 => Party::P1,
            Party::P1 => Party::P0,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Party::P0 => 0,
            Party::P1 => 1,
        }
    }

    /// Sender of round `k` (1-based).
    pub fn sender_of(k: usize) -> Party {
        if k % 2 == 1 {
            Party::P0
        } else {
            Party::P1
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Party::P0 => "P0",
            Party::P1 => "P1",
        })
    }
}

/// Operation on the qubits of a step's registers, listed big-endian in the
/// order the registers are named.
#[derive(Clone, Debug)]
pub enum Gate {
    Unitary(CMatrix),
    /// Basis permutation `|k> -> |perm[k]>`.
    Permutation(Vec<usize>),
    /// Phase per basis state.
    Diagonal(Vec<Complex64>),
    /// The same single-qubit unitary on every qubit.
    EachQubit([[Complex64; 2]; 2]),
    /// Maps `|0...0>` to the given normalized vector; the registers must be
    /// in `|0...0>` when applied.
    Prepare(Vec<Complex64>),
}

const GATE_TOLERANCE: f64 = 1e-10;

impl Gate {
    pub fn identity() -> Gate {
        Gate::Diagonal(Vec::new())
    }

    pub fn hadamard_each() -> Gate {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Gate::EachQubit([[h, h], [h, -h]])
    }

    pub fn pauli_x_each() -> Gate {
        let (o, l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        Gate::EachQubit([[o, l], [l, o]])
    }

    pub fn pauli_z() -> Gate {
        Gate::Diagonal(vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)])
    }

    /// Control is the first qubit, target the second.
    pub fn cnot() -> Gate {
        Gate::Permutation(vec![0, 1, 3, 2])
    }

    /// Checks the gate against the number of qubits it acts on.
    pub(crate) fn validate(&self, qubits: usize, label: &str) -> Result<()> {
        let dim = 1usize << qubits;
        let bad = |deviation: f64| Error::NotUnitary { gate: label.to_string(), deviation };
        let size = |len: usize| -> Result<()> {
            if len != dim {
                return Err(Error::DimensionMismatch(format!(
                    "gate `{label}` has dimension {len} on {qubits} qubit(s)"
                )));
            }
            Ok(())
        };
        match self {
            Gate::Unitary(u) => {
                size(u.nrows())?;
                size(u.ncols())?;
                let prod = u.adjoint() * u;
                let dev = prod
                    .iter()
                    .enumerate()
                    .map(|(idx, v)| {
                        let (i, j) = (idx % dim, idx / dim);
                        (v - if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }).norm()
                    })
                    .fold(0.0, f64::max);
                if dev > GATE_TOLERANCE {
                    return Err(bad(dev));
                }
            }
            Gate::Permutation(p) => {
                size(p.len())?;
                let mut seen = vec![false; dim];
                for &t in p {
                    if t >= dim || std::mem::replace(&mut seen[t], true) {
                        return Err(bad(1.0));
                    }
                }
            }
            Gate::Diagonal(ph) => {
                if !ph.is_empty() {
                    size(ph.len())?;
                }
                let dev = ph.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max);
                if dev > GATE_TOLERANCE {
                    return Err(bad(dev));
                }
            }
            Gate::EachQubit(u) => {
                let m = CMatrix::from_row_slice(2, 2, &[u[0][0], u[0][1], u[1][0], u[1][1]]);
                let prod = m.adjoint() * &m;
                let dev = (prod[(0, 0)] - 1.0)
                    .norm()
                    .max((prod[(1, 1)] - 1.0).norm())
                    .max(prod[(0, 1)].norm())
                    .max(prod[(1, 0)].norm());
                if dev > GATE_TOLERANCE {
                    return Err(bad(dev));
                }
            }
            Gate::Prepare(v) => {
                size(v.len())?;
                let norm: f64 = v.iter().map(|a| a.norm_sqr()).sum();
                if (norm - 1.0).abs() > GATE_TOLERANCE {
                    return Err(Error::NotNormalized(norm));
                }
            }
        }
        Ok(())
    }

    pub(crate) fn apply(&self, state: &mut PureState, qubits: &[usize]) -> Result<()> {
        match self {
            Gate::Unitary(u) => state.apply_matrix(qubits, u),
            Gate::Permutation(p) => state.apply_permutation(qubits, p),
            Gate::Diagonal(ph) => {
                if !ph.is_empty() {
                    state.apply_diagonal(qubits, ph)
                }
            }
            Gate::EachQubit(u) => state.apply_each_qubit(qubits, u),
            Gate::Prepare(v) => state.prepare(qubits, v)?,
        }
        Ok(())
    }
}

pub type GateFn = Arc<dyn Fn(u64) -> Gate + Send + Sync>;

/// One local operation, chosen by the acting party's input.
#[derive(Clone)]
pub struct Step {
    pub party: Party,
    pub registers: Vec<String>,
    pub label: String,
    pub gate: GateFn,
}

impl Step {
    pub fn new<F>(party: Party, registers: &[&str], label: &str, gate: F) -> Self
    where
        F: Fn(u64) -> Gate + Send + Sync + 'static,
    {
        Self {
            party,
            registers: registers.iter().map(|s| s.to_string()).collect(),
            label: label.to_string(),
            gate: Arc::new(gate),
        }
    }

    /// A step that ignores the party's input.
    pub fn fixed(party: Party, registers: &[&str], label: &str, gate: Gate) -> Self {
        Self::new(party, registers, label, move |_| gate.clone())
    }
}

impl fmt::Debug for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Step")
            .field("party", &self.party)
            .field("registers", &self.registers)
            .field("label", &self.label)
            .finish()
    }
}

#[derive(Clone, Debug)]
pub enum Action {
    Apply(Step),
    /// Records the global state under this name.
    Checkpoint(String),
}

#[derive(Clone, Debug)]
pub struct Round {
    pub sender: Party,
    pub actions: Vec<Action>,
    /// Registers handed to the other party at the end of the round.
    pub message: Vec<String>,
}

impl Round {
    pub fn new(sender: Party) -> Self {
        Self { sender, actions: Vec::new(), message: Vec::new() }
    }

    pub fn step(mut self, step: Step) -> Self {
        self.actions.push(Action::Apply(step));
        self
    }

    pub fn checkpoint(mut self, name: &str) -> Self {
        self.actions.push(Action::Checkpoint(name.to_string()));
        self
    }

    pub fn send(mut self, registers: &[&str]) -> Self {
        self.message.extend(registers.iter().map(|s| s.to_string()));
        self
    }
}

pub type DecodeFn = Arc<dyn Fn(u64, &[u64]) -> u64 + Send + Sync>;

/// Final local operations and computational-basis measurement by one party.
#[derive(Clone)]
pub struct Decoder {
    pub party: Party,
    pub steps: Vec<Step>,
    pub measured: Vec<String>,
    /// Maps the party's input and the measured register values to the output.
    pub decode: DecodeFn,
}

impl fmt::Debug for Decoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Decoder")
            .field("party", &self.party)
            .field("steps", &self.steps)
            .field("measured", &self.measured)
            .finish()
    }
}

/// A validated two-party protocol.
#[derive(Clone, Debug)]
pub struct Protocol {
    name: String,
    roles: [String; 2],
    inputs: [Vec<String>; 2],
    layout: RegisterLayout,
    initial: PureState,
    rounds: Vec<Round>,
    decoder: Option<Decoder>,
    prior_entanglement: bool,
    // owners[k][r]: holder of register r after round k (k = 0 is the start)
    owners: Vec<Vec<Party>>,
}

impl Protocol {
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Role name of a party, for reports.
    pub fn role(&self, party: Party) -> &str {
        &self.roles[party.index()]
    }

    pub fn input_labels(&self, party: Party) -> &[String] {
        &self.inputs[party.index()]
    }

    pub fn input_size(&self, party: Party) -> usize {
        self.inputs[party.index()].len()
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn initial_state(&self) -> &PureState {
        &self.initial
    }

    pub fn rounds(&self) -> &[Round] {
        &self.rounds
    }

    pub fn round_count(&self) -> usize {
        self.rounds.len()
    }

    pub fn decoder(&self) -> Option<&Decoder> {
        self.decoder.as_ref()
    }

    pub fn has_prior_entanglement(&self) -> bool {
        self.prior_entanglement
    }

    pub fn round(&self, k: usize) -> Result<&Round> {
        if k == 0 || k > self.rounds.len() {
            return Err(Error::OutOfRange(format!("round {k} of {}", self.rounds.len())));
        }
        Ok(&self.rounds[k - 1])
    }

    /// Registers held by `party` after round `k` (0 = before the first round),
    /// in layout order.
    pub fn held_by(&self, party: Party, k: usize) -> Result<Vec<&str>> {
        let owners = self
            .owners
            .get(k)
            .ok_or_else(|| Error::OutOfRange(format!("round {k} of {}", self.rounds.len())))?;
        Ok(self.layout.names().zip(owners).filter(|(_, &o)| o == party).map(|(n, _)| n).collect())
    }

    /// Message registers of round `k`; empty for `k = 0`.
    pub fn message(&self, k: usize) -> Result<Vec<&str>> {
        if k == 0 {
            return Ok(Vec::new());
        }
        Ok(self.round(k)?.message.iter().map(String::as_str).collect())
    }

    /// What the receiver of round `k` holds besides the message just received.
    pub fn receiver_workspace(&self, k: usize) -> Result<Vec<&str>> {
        let round = self.round(k)?;
        let message = &round.message;
        Ok(self
            .held_by(round.sender.other(), k)?
            .into_iter()
            .filter(|n| !message.iter().any(|m| m == n))
            .collect())
    }

    /// Total qubits exchanged.
    pub fn communication_qubits(&self) -> usize {
        self.rounds
            .iter()
            .flat_map(|r| r.message.iter())
            .map(|m| self.layout.register(m).map(|r| r.width).unwrap_or(0))
            .sum()
    }

    /// Copy of this protocol with `step` run at the end of round `k`, before
    /// the message is sent. Ownership is rechecked.
    pub fn with_extra_step(&self, k: usize, step: Step) -> Result<Protocol> {
        self.round(k)?;
        let mut rounds = self.rounds.clone();
        rounds[k - 1].actions.push(Action::Apply(step));
        let builder = ProtocolBuilder {
            name: format!("{} (modified)", self.name),
            roles: self.roles.clone(),
            inputs: self.inputs.clone(),
            layout: self.layout.clone(),
            initial_owners: self.owners[0].clone(),
            initial: Some(self.initial.clone()),
            rounds,
            decoder: self.decoder.clone(),
            prior_entanglement: self.prior_entanglement,
        };
        builder.build()
    }

    /// Input of `party` given the pair `(x, y)`.
    pub fn input_of(party: Party, x: u64, y: u64) -> u64 {
        match party {
            Party::P0 => x,
            Party::P1 => y,
        }
    }
}

/// Incremental construction of a [`Protocol`].
pub struct ProtocolBuilder {
    name: String,
    roles: [String; 2],
    inputs: [Vec<String>; 2],
    layout: RegisterLayout,
    initial_owners: Vec<Party>,
    initial: Option<PureState>,
    rounds: Vec<Round>,
    decoder: Option<Decoder>,
    prior_entanglement: bool,
}

impl ProtocolBuilder {
    pub fn new(name: &str, roles: [&str; 2], x_labels: Vec<String>, y_labels: Vec<String>) -> Self {
        Self {
            name: name.to_string(),
            roles: roles.map(String::from),
            inputs: [x_labels, y_labels],
            layout: RegisterLayout::empty(),
            initial_owners: Vec::new(),
            initial: None,
            rounds: Vec::new(),
            decoder: None,
            prior_entanglement: false,
        }
    }

    pub fn register(mut self, name: &str, width: usize, owner: Party) -> Result<Self> {
        if [INPUT_X, INPUT_Y, PURIFIER].contains(&name) {
            return Err(Error::DuplicateRegister(format!("{name} is reserved for analysis registers")));
        }
        self.layout.push(name, width)?;
        self.initial_owners.push(owner);
        Ok(self)
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    /// Shared initial state; defaults to all zeros.
    pub fn initial_state(mut self, state: PureState, entangled: bool) -> Self {
        self.initial = Some(state);
        self.prior_entanglement = entangled;
        self
    }

    pub fn round(mut self, round: Round) -> Self {
        self.rounds.push(round);
        self
    }

    pub fn decoder(mut self, decoder: Decoder) -> Self {
        self.decoder = Some(decoder);
        self
    }

    pub fn build(self) -> Result<Protocol> {
        for labels in &self.inputs {
            if labels.is_empty() {
                return Err(Error::InputOutOfRange("empty input alphabet".into()));
            }
            for (i, l) in labels.iter().enumerate() {
                if labels[..i].contains(l) {
                    return Err(Error::DuplicateLabel(vec![l.clone()]));
                }
            }
        }
        let initial = match self.initial {
            Some(s) => {
                if s.layout() != &self.layout {
                    return Err(Error::DimensionMismatch("initial state layout differs from registers".into()));
                }
                s
            }
            None => PureState::zero(self.layout.clone()),
        };

        let index = |name: &str| -> Result<usize> {
            self.layout
                .names()
                .position(|n| n == name)
                .ok_or_else(|| Error::UnknownRegister(name.to_string()))
        };
        let mut owners = vec![self.initial_owners.clone()];
        let mut current = self.initial_owners.clone();
        for (i, round) in self.rounds.iter().enumerate() {
            let k = i + 1;
            if round.sender != Party::sender_of(k) {
                return Err(Error::Ownership(format!(
                    "round {k} must be sent by {}, found {}",
                    Party::sender_of(k),
                    round.sender
                )));
            }
            for action in &round.actions {
                if let Action::Apply(step) = action {
                    check_step(step, &current, &index, &format!("round {k}"))?;
                }
            }
            for (j, m) in round.message.iter().enumerate() {
                if round.message[..j].contains(m) {
                    return Err(Error::DuplicateRegister(m.clone()));
                }
                let r = index(m)?;
                if current[r] != round.sender {
                    return Err(Error::Ownership(format!("round {k}: `{m}` is not held by the sender")));
                }
            }
            for m in &round.message {
                let r = index(m)?;
                current[r] = round.sender.other();
            }
            owners.push(current.clone());
        }
        if let Some(dec) = &self.decoder {
            for step in &dec.steps {
                if step.party != dec.party {
                    return Err(Error::Ownership(format!("decoder step `{}` run by the wrong party", step.label)));
                }
                check_step(step, &current, &index, "decoder")?;
            }
            for m in &dec.measured {
                if current[index(m)?] != dec.party {
                    return Err(Error::Ownership(format!("decoder measures `{m}` it does not hold")));
                }
            }
        }
        Ok(Protocol {
            name: self.name,
            roles: self.roles,
            inputs: self.inputs,
            layout: self.layout,
            initial,
            rounds: self.rounds,
            decoder: self.decoder,
            prior_entanglement: self.prior_entanglement,
            owners,
        })
    }
}

fn check_step(step: &Step, owners: &[Party], index: &dyn Fn(&str) -> Result<usize>, at: &str) -> Result<()> {
    for (j, r) in step.registers.iter().enumerate() {
        if step.registers[..j].contains(r) {
            return Err(Error::DuplicateRegister(r.clone()));
        }
        if owners[index(r)?] != step.party {
            return Err(Error::Ownership(format!(
                "{at}: step `{}` by {} touches `{r}` held by the other party",
                step.label, step.party
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn ownership_and_alternation_are_enforced() {
        let base = || {
            ProtocolBuilder::new("t", ["a", "b"], labels(1), labels(1))
                .register("M", 1, Party::P0)
                .unwrap()
                .register("W", 1, Party::P1)
                .unwrap()
        };
        // P1 may not send first
        assert!(matches!(base().round(Round::new(Party::P1)).build(), Err(Error::Ownership(_))));
        // P0 may not touch P1's workspace
        let r = Round::new(Party::P0).step(Step::fixed(Party::P0, &["W"], "bad", Gate::pauli_x_each()));
        assert!(matches!(base().round(r).build(), Err(Error::Ownership(_))));
        // after a transfer the receiver may act on the message
        let p = base()
            .round(Round::new(Party::P0).send(&["M"]))
            .round(Round::new(Party::P1).step(Step::fixed(Party::P1, &["M", "W"], "cnot", Gate::cnot())))
            .build()
            .unwrap();
        assert_eq!(p.held_by(Party::P1, 1).unwrap(), vec!["M", "W"]);
        assert_eq!(p.receiver_workspace(1).unwrap(), vec!["W"]);
        assert_eq!(p.communication_qubits(), 1);
        assert!(matches!(
            ProtocolBuilder::new("t", ["a", "b"], labels(1), labels(1)).register("X", 1, Party::P0),
            Err(Error::DuplicateRegister(_))
        ));
    }

    #[test]
    fn gate_validation() {
        assert!(Gate::hadamard_each().validate(3, "h").is_ok());
        assert!(Gate::cnot().validate(2, "cx").is_ok());
        assert!(Gate::Permutation(vec![0, 0]).validate(1, "p").is_err());
        let c = |re| Complex64::new(re, 0.0);
        let skew = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.1), c(0.0), c(1.0)]);
        assert!(matches!(Gate::Unitary(skew).validate(1, "u"), Err(Error::NotUnitary { .. })));
        assert!(Gate::Prepare(vec![c(1.0), c(1.0)]).validate(1, "p").is_err());
    }
}

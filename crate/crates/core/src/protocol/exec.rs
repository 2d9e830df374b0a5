use std::collections::BTreeMap;

use super::{Action, Party, Protocol, Step};
use crate::error::{Error, Result};
use crate::linalg::{DensityMatrix, PureState};

// Branches lighter than this are numerical dust, not outcomes.
const BRANCH_EPS: f64 = 1e-14;
/// An output counts as certain at or above this probability.
pub const CERTAIN: f64 = 1.0 - 1e-9;

#[derive(Clone, Debug)]
pub struct RoundSnapshot {
    pub round: usize,
    pub sender: Party,
    /// Global state right after the round's message changed hands.
    pub state: PureState,
}

/// Result of running a protocol on fixed inputs.
#[derive(Clone, Debug)]
pub struct Execution {
    pub x: u64,
    pub y: u64,
    /// One snapshot per round, `snapshots[k - 1]` for round `k`.
    pub snapshots: Vec<RoundSnapshot>,
    /// `(round, name, state)` for every checkpoint passed.
    pub checkpoints: Vec<(usize, String, PureState)>,
    /// State after the last round, before decoding.
    pub final_state: PureState,
    /// Decoder output distribution over measurement branches.
    pub outcomes: BTreeMap<u64, f64>,
    /// The output, when one value has probability at least `CERTAIN`.
    pub output: Option<u64>,
}

impl Execution {
    pub fn checkpoint(&self, name: &str) -> Option<&PureState> {
        self.checkpoints.iter().find(|c| c.1 == name).map(|c| &c.2)
    }
}

impl Protocol {
    pub fn check_inputs(&self, x: u64, y: u64) -> Result<()> {
        for (party, v) in [(Party::P0, x), (Party::P1, y)] {
            if v as usize >= self.input_size(party) {
                return Err(Error::InputOutOfRange(format!(
                    "{} input {v} outside alphabet of size {}",
                    self.role(party),
                    self.input_size(party)
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn apply_step(&self, state: &mut PureState, step: &Step, x: u64, y: u64) -> Result<()> {
        let qubits = self.layout().qubits_of(&step.registers)?;
        let gate = (step.gate)(Protocol::input_of(step.party, x, y));
        gate.validate(qubits.len(), &step.label)?;
        gate.apply(state, &qubits)
    }

    fn run_round(
        &self,
        state: &mut PureState,
        k: usize,
        x: u64,
        y: u64,
        mut checkpoints: Option<&mut Vec<(usize, String, PureState)>>,
    ) -> Result<()> {
        for action in &self.round(k)?.actions {
            match action {
                Action::Apply(step) => self.apply_step(state, step, x, y)?,
                Action::Checkpoint(name) => {
                    if let Some(list) = checkpoints.as_deref_mut() {
                        list.push((k, name.clone(), state.clone()));
                    }
                }
            }
        }
        Ok(())
    }

    /// Global state after round `k` (`k = 0` is the initial state).
    pub fn state_after_round(&self, x: u64, y: u64, k: usize) -> Result<PureState> {
        self.check_inputs(x, y)?;
        if k > self.round_count() {
            return Err(Error::OutOfRange(format!("round {k} of {}", self.round_count())));
        }
        let mut state = self.initial_state().clone();
        for r in 1..=k {
            self.run_round(&mut state, r, x, y, None)?;
        }
        Ok(state)
    }

    pub fn run_honest(&self, x: u64, y: u64) -> Result<Execution> {
        self.check_inputs(x, y)?;
        let mut state = self.initial_state().clone();
        let mut snapshots = Vec::with_capacity(self.round_count());
        let mut checkpoints = Vec::new();
        for k in 1..=self.round_count() {
            self.run_round(&mut state, k, x, y, Some(&mut checkpoints))?;
            snapshots.push(RoundSnapshot { round: k, sender: self.round(k)?.sender, state: state.clone() });
        }
        let outcomes = match self.decoder() {
            Some(dec) => self.decode_branches(&state, Protocol::input_of(dec.party, x, y))?,
            None => BTreeMap::new(),
        };
        let output = outcomes.iter().find(|(_, &p)| p >= CERTAIN).map(|(&v, _)| v);
        Ok(Execution { x, y, snapshots, checkpoints, final_state: state, outcomes, output })
    }

    /// Runs the decoder on `state` and returns the distribution of decoded
    /// values over all computational-basis branches.
    pub fn decode_branches(&self, state: &PureState, input: u64) -> Result<BTreeMap<u64, f64>> {
        let dec = self
            .decoder()
            .ok_or_else(|| Error::ModeMismatch(format!("protocol `{}` has no decoder", self.name())))?;
        let mut st = state.clone();
        for step in &dec.steps {
            let qubits = self.layout().qubits_of(&step.registers)?;
            let gate = (step.gate)(input);
            gate.validate(qubits.len(), &step.label)?;
            gate.apply(&mut st, &qubits)?;
        }
        let mut outcomes = BTreeMap::new();
        let mut values = vec![0u64; dec.measured.len()];
        for (idx, p) in st.support(BRANCH_EPS) {
            for (slot, name) in values.iter_mut().zip(&dec.measured) {
                *slot = st.register_value(idx, name)?;
            }
            *outcomes.entry((dec.decode)(input, &values)).or_insert(0.0) += p;
        }
        Ok(outcomes)
    }

    /// Largest pairwise trace distance, over the other party's inputs, of
    /// what `observer` holds after round `k` when its own input is fixed.
    pub fn view_distance(&self, observer: Party, observer_input: u64, k: usize) -> Result<f64> {
        let held = self.held_by(observer, k)?;
        let others = self.input_size(observer.other()) as u64;
        let views: Vec<DensityMatrix> = (0..others)
            .map(|o| {
                let (x, y) = match observer {
                    Party::P0 => (observer_input, o),
                    Party::P1 => (o, observer_input),
                };
                self.state_after_round(x, y, k)?.reduced(&held)
            })
            .collect::<Result<_>>()?;
        let mut worst = 0.0f64;
        for a in 0..views.len() {
            for b in (a + 1)..views.len() {
                worst = worst.max(views[a].trace_distance(&views[b])?);
            }
        }
        Ok(worst)
    }
}

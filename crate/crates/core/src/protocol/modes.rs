use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Party, Protocol, INPUT_X, INPUT_Y, PURIFIER};
use crate::error::{Error, Result};
use crate::linalg::{qubits_for, CqEntry, CqState, PureState, RegisterEntropy, RegisterLayout, STATE_TOLERANCE};

/// Joint distribution of the two inputs, `probs[x][y]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputDistribution {
    probs: Vec<Vec<f64>>,
}

impl InputDistribution {
    pub fn new(probs: Vec<Vec<f64>>) -> Result<Self> {
        let cols = probs.first().map(Vec::len).unwrap_or(0);
        if cols == 0 || probs.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidDistribution("ragged or empty table".into()));
        }
        let total: f64 = probs.iter().flatten().sum();
        if probs.iter().flatten().any(|&p| p.is_nan() || p < 0.0) || (total - 1.0).abs() > STATE_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("entries sum to {total}")));
        }
        Ok(Self { probs })
    }

    pub fn uniform(nx: usize, ny: usize) -> Self {
        let p = 1.0 / (nx * ny) as f64;
        Self { probs: vec![vec![p; ny]; nx] }
    }

    pub fn product(px: &[f64], py: &[f64]) -> Result<Self> {
        Self::new(px.iter().map(|a| py.iter().map(|b| a * b).collect()).collect())
    }

    pub fn x_size(&self) -> usize {
        self.probs.len()
    }

    pub fn y_size(&self) -> usize {
        self.probs[0].len()
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.probs[x][y]
    }

    pub fn marginal_x(&self) -> Vec<f64> {
        self.probs.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn marginal_y(&self) -> Vec<f64> {
        (0..self.y_size()).map(|y| self.probs.iter().map(|r| r[y]).sum()).collect()
    }

    pub fn is_product(&self) -> bool {
        let (mx, my) = (self.marginal_x(), self.marginal_y());
        self.probs
            .iter()
            .enumerate()
            .all(|(x, r)| r.iter().enumerate().all(|(y, &p)| (p - mx[x] * my[y]).abs() <= 1e-12))
    }

    /// Pairs with positive probability, x-major.
    pub fn support(&self) -> Vec<(u64, u64, f64)> {
        let mut out = Vec::new();
        for (x, r) in self.probs.iter().enumerate() {
            for (y, &p) in r.iter().enumerate() {
                if p > 0.0 {
                    out.push((x as u64, y as u64, p));
                }
            }
        }
        out
    }

    fn check_for(&self, protocol: &Protocol) -> Result<()> {
        if self.x_size() != protocol.input_size(Party::P0) || self.y_size() != protocol.input_size(Party::P1) {
            return Err(Error::ModeMismatch(format!(
                "distribution is {}x{} but `{}` has alphabets {}x{}",
                self.x_size(),
                self.y_size(),
                protocol.name(),
                protocol.input_size(Party::P0),
                protocol.input_size(Party::P1)
            )));
        }
        Ok(())
    }
}

/// How the inputs are held while the protocol runs.
#[derive(Clone, Debug, PartialEq)]
pub enum AnalysisMode {
    /// Both inputs classical.
    ClassicalInputs(InputDistribution),
    /// P1 runs on a superposition of its inputs, measured after round
    /// `measure_after` (never if `None`).
    SuperposedB { mu: InputDistribution, measure_after: Option<usize> },
    /// P0 runs on a superposition of its inputs.
    SuperposedA { mu: InputDistribution, measure_after: Option<usize> },
    /// An environment register purifies both inputs.
    Purified(InputDistribution),
}

impl AnalysisMode {
    pub fn distribution(&self) -> &InputDistribution {
        match self {
            AnalysisMode::ClassicalInputs(mu)
            | AnalysisMode::SuperposedB { mu, .. }
            | AnalysisMode::SuperposedA { mu, .. }
            | AnalysisMode::Purified(mu) => mu,
        }
    }

    pub fn describe(&self) -> String {
        let when = |m: &Option<usize>| match m {
            Some(k) => format!("measured after round {k}"),
            None => "never measured".to_string(),
        };
        match self {
            AnalysisMode::ClassicalInputs(_) => "classical inputs".into(),
            AnalysisMode::SuperposedB { measure_after, .. } => {
                format!("P1 input superposed, {}", when(measure_after))
            }
            AnalysisMode::SuperposedA { measure_after, .. } => {
                format!("P0 input superposed, {}", when(measure_after))
            }
            AnalysisMode::Purified(_) => "inputs purified by environment".into(),
        }
    }
}

/// Joint state at one round under some analysis mode.
#[derive(Clone, Debug)]
pub enum RoundState {
    Cq(CqState),
    Purified(PurifiedState),
}

impl RoundState {
    pub fn as_cq(&self) -> Option<&CqState> {
        match self {
            RoundState::Cq(c) => Some(c),
            RoundState::Purified(_) => None,
        }
    }
}

impl RegisterEntropy for RoundState {
    fn entropy_of(&self, registers: &[&str]) -> Result<f64> {
        match self {
            RoundState::Cq(c) => c.entropy_of_registers(registers),
            RoundState::Purified(p) => p.entropy_of(registers),
        }
    }
}

/// `sum sqrt(mu(x,y)) |x,y>_Env |x>_X |y>_Y |psi_xy>`, held as the
/// classical-input ensemble plus the fact that `Env` purifies it.
#[derive(Clone, Debug)]
pub struct PurifiedState {
    ensemble: CqState,
    x_width: usize,
    y_width: usize,
    // input indices per entry, for dense assembly
    inputs: Vec<(u64, u64)>,
}

impl PurifiedState {
    /// The state with `Env` traced out.
    pub fn ensemble(&self) -> &CqState {
        &self.ensemble
    }

    /// Every register name: environment, inputs, then the protocol layout.
    pub fn register_names(&self) -> Vec<&str> {
        let mut names = vec![PURIFIER];
        names.extend(self.ensemble.register_names());
        names
    }

    /// The global pure state as a dense vector, laid out as
    /// `[Env, X, Y, protocol registers]`.
    pub fn assemble(&self) -> Result<PureState> {
        let mut layout = RegisterLayout::new([
            (PURIFIER, self.x_width + self.y_width),
            (INPUT_X, self.x_width),
            (INPUT_Y, self.y_width),
        ])?;
        layout = layout.concat(self.ensemble.layout())?;
        let qw = self.ensemble.layout().width();
        let mut amps = vec![Complex64::new(0.0, 0.0); layout.dim()];
        for (entry, &(x, y)) in self.ensemble.entries().iter().zip(&self.inputs) {
            let psi = match &entry.state {
                crate::linalg::QuantumPart::Pure(s) => s,
                crate::linalg::QuantumPart::Mixed(_) => {
                    return Err(Error::ModeMismatch("purification needs pure members".into()))
                }
            };
            let xy = ((x as usize) << self.y_width) | y as usize;
            let prefix = (((xy << self.x_width) | x as usize) << self.y_width) | y as usize;
            let s = entry.probability.sqrt();
            for (i, a) in psi.amplitudes().iter().enumerate() {
                amps[(prefix << qw) | i] += a * s;
            }
        }
        PureState::new(amps, layout)
    }
}

impl RegisterEntropy for PurifiedState {
    fn entropy_of(&self, registers: &[&str]) -> Result<f64> {
        if !registers.contains(&PURIFIER) {
            return self.ensemble.entropy_of_registers(registers);
        }
        for (i, r) in registers.iter().enumerate() {
            if registers[..i].contains(r) {
                return Err(Error::DuplicateRegister(r.to_string()));
            }
        }
        let all = self.register_names();
        if let Some(unknown) = registers.iter().find(|r| !all.contains(r)) {
            return Err(Error::UnknownRegister(unknown.to_string()));
        }
        // global state is pure: S(K) = S(complement), and the complement
        // lacks Env, so it is the classical-input ensemble
        let rest: Vec<&str> = all.into_iter().filter(|n| !registers.contains(n)).collect();
        if rest.is_empty() {
            return Ok(0.0);
        }
        self.ensemble.entropy_of_registers(&rest)
    }
}

// Per-pair states after round k, in x-major support order.
fn label_states(protocol: &Protocol, mu: &InputDistribution, k: usize) -> Result<Vec<(u64, u64, f64, PureState)>> {
    mu.check_for(protocol)?;
    if k > protocol.round_count() {
        return Err(Error::OutOfRange(format!("round {k} of {}", protocol.round_count())));
    }
    mu.support()
        .into_par_iter()
        .map(|(x, y, p)| Ok((x, y, p, protocol.state_after_round(x, y, k)?)))
        .collect()
}

fn classical_state(protocol: &Protocol, states: Vec<(u64, u64, f64, PureState)>) -> Result<CqState> {
    let xl = protocol.input_labels(Party::P0);
    let yl = protocol.input_labels(Party::P1);
    let entries = states
        .into_iter()
        .map(|(x, y, p, s)| CqEntry::pure(vec![xl[x as usize].clone(), yl[y as usize].clone()], p, s))
        .collect();
    CqState::new(vec![INPUT_X, INPUT_Y], entries)
}

// `superposed` is the party whose input becomes a quantum register.
fn superposed_state(
    protocol: &Protocol,
    mu: &InputDistribution,
    superposed: Party,
    states: Vec<(u64, u64, f64, PureState)>,
) -> Result<CqState> {
    if !mu.is_product() {
        return Err(Error::ModeMismatch("superposed inputs need a product distribution".into()));
    }
    let (reg, kept_name, weights) = match superposed {
        Party::P1 => (INPUT_Y, INPUT_X, mu.marginal_y()),
        Party::P0 => (INPUT_X, INPUT_Y, mu.marginal_x()),
    };
    let width = qubits_for(weights.len());
    let layout = RegisterLayout::new([(reg, width)])?.concat(protocol.layout())?;
    let qw = protocol.layout().width();
    let kept_labels = protocol.input_labels(superposed.other());
    let kept_marginal = match superposed {
        Party::P1 => mu.marginal_x(),
        Party::P0 => mu.marginal_y(),
    };

    let mut entries = Vec::new();
    for (c, label) in kept_labels.iter().enumerate() {
        if kept_marginal[c] <= 0.0 {
            continue;
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); layout.dim()];
        for (x, y, _, psi) in &states {
            let (mine, other) = match superposed {
                Party::P1 => (*y, *x),
                Party::P0 => (*x, *y),
            };
            if other as usize != c {
                continue;
            }
            let s = weights[mine as usize].sqrt();
            let base = (mine as usize) << qw;
            for (i, a) in psi.amplitudes().iter().enumerate() {
                amps[base | i] += a * s;
            }
        }
        entries.push(CqEntry::pure(vec![label.clone()], kept_marginal[c], PureState::new(amps, layout.clone())?));
    }
    CqState::new(vec![kept_name], entries)
}

/// Joint state at round `k` (0 = before any message) under `mode`.
pub fn round_state(protocol: &Protocol, mode: &AnalysisMode, k: usize) -> Result<RoundState> {
    let mu = mode.distribution();
    let states = label_states(protocol, mu, k)?;
    match mode {
        AnalysisMode::ClassicalInputs(_) => Ok(RoundState::Cq(classical_state(protocol, states)?)),
        AnalysisMode::SuperposedB { measure_after, .. } | AnalysisMode::SuperposedA { measure_after, .. } => {
            let party = if matches!(mode, AnalysisMode::SuperposedB { .. }) { Party::P1 } else { Party::P0 };
            if !mu.is_product() {
                return Err(Error::ModeMismatch("superposed inputs need a product distribution".into()));
            }
            match measure_after {
                // measuring the input register commutes with the
                // input-controlled gates that follow
                Some(m) if *m < k => Ok(RoundState::Cq(classical_state(protocol, states)?)),
                _ => Ok(RoundState::Cq(superposed_state(protocol, mu, party, states)?)),
            }
        }
        AnalysisMode::Purified(_) => {
            let inputs = states.iter().map(|s| (s.0, s.1)).collect();
            let ensemble = classical_state(protocol, states)?;
            Ok(RoundState::Purified(PurifiedState {
                ensemble,
                x_width: qubits_for(mu.x_size()),
                y_width: qubits_for(mu.y_size()),
                inputs,
            }))
        }
    }
}

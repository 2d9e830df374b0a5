//! Privacy loss, superposed information cost and quantum information cost
//! as round-by-round sums of conditional mutual information.
//!
//! Side A is P0's privacy: odd rounds, `I(M_k : X | Y, B_k)` with `B_k`
//! what P1 holds besides the message. Side B is the mirror image over even
//! rounds. The superposed cost swaps the opposing input for a coherent
//! register; the quantum cost measures against the environment `Env`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::conditional_mutual_information;
use crate::protocol::{round_state, AnalysisMode, InputDistribution, Party, Protocol, INPUT_X, INPUT_Y, PURIFIER};

/// Slack allowed between consecutive quantities of the ordering.
pub const ORDER_SLACK: f64 = 2e-9;
/// Lower bound accepted for a single term.
pub const TERM_FLOOR: f64 = -1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    /// P0's input, leaked through odd rounds.
    A,
    /// P1's input, leaked through even rounds.
    B,
}

impl Side {
    pub fn party(self) -> Party {
        match self {
            Side::A => Party::P0,
            Side::B => Party::P1,
        }
    }

    fn rounds(self, count: usize) -> impl Iterator<Item = usize> {
        let first = match self {
            Side::A => 1,
            Side::B => 2,
        };
        (first..=count).step_by(2)
    }

    // (register measured against for the classical quantity, conditioning input)
    fn registers(self) -> (&'static str, &'static str) {
        match self {
            Side::A => (INPUT_X, INPUT_Y),
            Side::B => (INPUT_Y, INPUT_X),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quantity {
    #[serde(rename = "L")]
    PrivacyLoss,
    #[serde(rename = "SIC")]
    SuperposedCost,
    #[serde(rename = "QIC")]
    QuantumCost,
}

impl Quantity {
    pub fn symbol(self) -> &'static str {
        match self {
            Quantity::PrivacyLoss => "L",
            Quantity::SuperposedCost => "SIC",
            Quantity::QuantumCost => "QIC",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundTerm {
    pub round: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyReport {
    pub protocol: String,
    pub quantity: Quantity,
    pub side: Side,
    /// Role whose input is at stake.
    pub party: String,
    pub mode: String,
    /// For the superposed cost: round after which the input is measured.
    pub measure_after: Option<usize>,
    pub terms: Vec<RoundTerm>,
    pub total: f64,
    pub tolerance: f64,
    pub notes: Vec<String>,
}

impl PrivacyReport {
    /// Totals match the terms and no term is meaningfully negative.
    pub fn is_consistent(&self) -> bool {
        let sum: f64 = self.terms.iter().map(|t| t.value).sum();
        (sum - self.total).abs() <= self.tolerance && self.terms.iter().all(|t| t.value >= TERM_FLOOR)
    }
}

fn term(protocol: &Protocol, mode: &AnalysisMode, k: usize, target: &str, given: &str) -> Result<f64> {
    let state = round_state(protocol, mode, k)?;
    let message = protocol.message(k)?;
    let mut cond = vec![given];
    cond.extend(protocol.receiver_workspace(k)?);
    conditional_mutual_information(&state, &message, &[target], &cond)
}

fn report(
    protocol: &Protocol,
    quantity: Quantity,
    side: Side,
    mode: &AnalysisMode,
    measure_after: Option<usize>,
    terms: Vec<RoundTerm>,
) -> PrivacyReport {
    let mut notes = Vec::new();
    if quantity == Quantity::QuantumCost && protocol.has_prior_entanglement() {
        notes.push(
            "prior entanglement: Env purifies the inputs only; the shared state belongs to the workspaces".into(),
        );
    }
    PrivacyReport {
        protocol: protocol.name().to_string(),
        quantity,
        side,
        party: protocol.role(side.party()).to_string(),
        mode: mode.describe(),
        measure_after,
        total: terms.iter().map(|t| t.value).sum(),
        terms,
        tolerance: 1e-9,
        notes,
    }
}

fn terms_for(protocol: &Protocol, side: Side, mode_at: impl Fn(usize) -> AnalysisMode, target: &str) -> Result<Vec<RoundTerm>> {
    let given = side.registers().1;
    side.rounds(protocol.round_count())
        .map(|k| Ok(RoundTerm { round: k, value: term(protocol, &mode_at(k), k, target, given)? }))
        .collect()
}

pub fn privacy_loss(protocol: &Protocol, mu: &InputDistribution, side: Side) -> Result<PrivacyReport> {
    let mode = AnalysisMode::ClassicalInputs(mu.clone());
    let terms = terms_for(protocol, side, |_| mode.clone(), side.registers().0)?;
    Ok(report(protocol, Quantity::PrivacyLoss, side, &mode, None, terms))
}

fn superposed_mode(mu: &InputDistribution, side: Side, measure_after: Option<usize>) -> AnalysisMode {
    // the opposing party superposes its input
    match side {
        Side::A => AnalysisMode::SuperposedB { mu: mu.clone(), measure_after },
        Side::B => AnalysisMode::SuperposedA { mu: mu.clone(), measure_after },
    }
}

/// Superposed cost with the opposing input measured after round
/// `measure_after` (`None`: never).
pub fn superposed_ic(
    protocol: &Protocol,
    mu: &InputDistribution,
    side: Side,
    measure_after: Option<usize>,
) -> Result<PrivacyReport> {
    if !mu.is_product() {
        return Err(Error::ModeMismatch("the superposed cost needs a product distribution".into()));
    }
    let mode = superposed_mode(mu, side, measure_after);
    let terms = terms_for(protocol, side, |_| mode.clone(), side.registers().0)?;
    Ok(report(protocol, Quantity::SuperposedCost, side, &mode, measure_after, terms))
}

pub fn quantum_ic(protocol: &Protocol, mu: &InputDistribution, side: Side) -> Result<PrivacyReport> {
    let mode = AnalysisMode::Purified(mu.clone());
    let terms = terms_for(protocol, side, |_| mode.clone(), PURIFIER)?;
    Ok(report(protocol, Quantity::QuantumCost, side, &mode, None, terms))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderingCheck {
    pub protocol: String,
    pub side: Side,
    pub loss: PrivacyReport,
    /// One superposed report per measurement choice: after rounds
    /// `0..=K`, then never.
    pub superposed: Vec<PrivacyReport>,
    pub quantum: PrivacyReport,
    /// Largest superposed cost over the measurement choices.
    pub superposed_max: f64,
    /// `L <= SIC(m) <= QIC` for every measurement choice `m`.
    pub holds: bool,
    /// `L <= max_m SIC(m) <= QIC`, the weaker form where the measuring
    /// party picks its best round.
    pub holds_for_max: bool,
    pub failures: Vec<String>,
}

/// Checks `L <= SIC <= QIC` on one side for every measurement round.
///
/// Terms at round `k` only depend on whether the input was measured before
/// `k`, so the superposed terms are computed once and recombined.
pub fn ordering_check(protocol: &Protocol, mu: &InputDistribution, side: Side) -> Result<OrderingCheck> {
    let loss = privacy_loss(protocol, mu, side)?;
    let coherent = superposed_ic(protocol, mu, side, None)?;
    let quantum = quantum_ic(protocol, mu, side)?;
    let count = protocol.round_count();
    let mut superposed = Vec::new();
    for m in (0..=count).map(Some).chain([None]) {
        let terms: Vec<RoundTerm> = loss
            .terms
            .iter()
            .zip(&coherent.terms)
            .map(|(l, s)| match m {
                Some(m) if m < l.round => l.clone(),
                _ => s.clone(),
            })
            .collect();
        superposed.push(report(
            protocol,
            Quantity::SuperposedCost,
            side,
            &superposed_mode(mu, side, m),
            m,
            terms,
        ));
    }
    let mut failures = Vec::new();
    for s in &superposed {
        let when = s.measure_after.map(|m| format!("after round {m}")).unwrap_or_else(|| "never".into());
        if loss.total > s.total + ORDER_SLACK {
            failures.push(format!("L = {} exceeds SIC (measured {when}) = {}", loss.total, s.total));
        }
        if s.total > quantum.total + ORDER_SLACK {
            failures.push(format!("SIC (measured {when}) = {} exceeds QIC = {}", s.total, quantum.total));
        }
    }
    for r in std::iter::once(&loss).chain(&superposed).chain(std::iter::once(&quantum)) {
        if !r.is_consistent() {
            failures.push(format!("{} report has a negative term or inconsistent total", r.quantity.symbol()));
        }
    }
    let superposed_max = superposed.iter().map(|s| s.total).fold(f64::NEG_INFINITY, f64::max);
    let holds_for_max = loss.total <= superposed_max + ORDER_SLACK && superposed_max <= quantum.total + ORDER_SLACK;
    Ok(OrderingCheck {
        protocol: protocol.name().to_string(),
        side,
        superposed_max,
        holds_for_max,
        holds: failures.is_empty(),
        loss,
        superposed,
        quantum,
        failures,
    })
}

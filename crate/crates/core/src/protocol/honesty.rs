use serde::Serialize;

use super::{Party, Protocol};
use crate::error::{Error, Result};
use crate::linalg::PureState;

/// Entrywise tolerance for the receiver side, and spectral tolerance for
/// the sender side.
pub const HONESTY_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum HonestyFailure {
    /// What the receiver holds (message included) differs from the prescription.
    Receiver { round: usize, x: u64, y: u64, deviation: f64 },
    /// The sender's reduction has a different spectrum, so no local
    /// operation on the sender's side explains the difference.
    SenderSpectrum { round: usize, x: u64, y: u64, deviation: f64 },
}

impl HonestyFailure {
    pub fn round(&self) -> usize {
        match self {
            HonestyFailure::Receiver { round, .. } | HonestyFailure::SenderSpectrum { round, .. } => *round,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundDiagnostic {
    pub round: usize,
    /// Worst entrywise deviation over all inputs, receiver side.
    pub receiver_deviation: f64,
    /// Worst spectral deviation over all inputs, sender side.
    pub sender_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartyPurity {
    pub party: Party,
    pub prescribed: f64,
    pub observed: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HonestyVerdict {
    pub accepted: bool,
    pub first_failure: Option<HonestyFailure>,
    pub rounds: Vec<RoundDiagnostic>,
    /// Purity of each party's final holdings, for the input pair of the
    /// first failure (or the first pair when accepted).
    pub final_purity: Vec<PartyPurity>,
}

fn check_compatible(a: &Protocol, b: &Protocol) -> Result<()> {
    let same = a.layout() == b.layout()
        && a.round_count() == b.round_count()
        && a.input_labels(Party::P0) == b.input_labels(Party::P0)
        && a.input_labels(Party::P1) == b.input_labels(Party::P1)
        && (0..=a.round_count()).all(|k| {
            a.held_by(Party::P0, k).ok() == b.held_by(Party::P0, k).ok()
                && a.message(k).ok() == b.message(k).ok()
        });
    if !same {
        return Err(Error::Incompatible(format!(
            "`{}` and `{}` differ in registers, inputs or round structure",
            a.name(),
            b.name()
        )));
    }
    Ok(())
}

fn spectral_gap(a: &PureState, b: &PureState, regs: &[&str]) -> Result<f64> {
    if regs.is_empty() {
        return Ok(0.0);
    }
    let sa = a.reduced(regs)?.spectrum()?;
    let sb = b.reduced(regs)?.spectrum()?;
    Ok(sa.iter().zip(&sb).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max))
}

fn entry_gap(a: &PureState, b: &PureState, regs: &[&str]) -> Result<f64> {
    if regs.is_empty() {
        return Ok(0.0);
    }
    a.reduced(regs)?.max_deviation(&b.reduced(regs)?)
}

/// Compares `deviated` against the prescription of `honest`, round by round
/// and for every input pair. The receiver's holdings (message included)
/// must match entrywise; the sender's must match up to spectrum.
pub fn verify_honest_execution(honest: &Protocol, deviated: &Protocol) -> Result<HonestyVerdict> {
    check_compatible(honest, deviated)?;
    let mut rounds: Vec<RoundDiagnostic> = (1..=honest.round_count())
        .map(|round| RoundDiagnostic { round, receiver_deviation: 0.0, sender_deviation: 0.0 })
        .collect();
    let mut first_failure: Option<HonestyFailure> = None;
    let mut failing_inputs = (0, 0);

    for x in 0..honest.input_size(Party::P0) as u64 {
        for y in 0..honest.input_size(Party::P1) as u64 {
            let a = honest.run_honest(x, y)?;
            let b = deviated.run_honest(x, y)?;
            for (k, diag) in rounds.iter_mut().enumerate() {
                let k = k + 1;
                let sender = honest.round(k)?.sender;
                let (pa, pb) = (&a.snapshots[k - 1].state, &b.snapshots[k - 1].state);
                let recv = entry_gap(pa, pb, &honest.held_by(sender.other(), k)?)?;
                let send = spectral_gap(pa, pb, &honest.held_by(sender, k)?)?;
                diag.receiver_deviation = diag.receiver_deviation.max(recv);
                diag.sender_deviation = diag.sender_deviation.max(send);
                let failure = if recv > HONESTY_TOLERANCE {
                    Some(HonestyFailure::Receiver { round: k, x, y, deviation: recv })
                } else if send > HONESTY_TOLERANCE {
                    Some(HonestyFailure::SenderSpectrum { round: k, x, y, deviation: send })
                } else {
                    None
                };
                if let Some(f) = failure {
                    let earlier = first_failure.as_ref().map(|g| f.round() < g.round()).unwrap_or(true);
                    if earlier {
                        first_failure = Some(f);
                        failing_inputs = (x, y);
                    }
                }
            }
        }
    }

    let (x, y) = failing_inputs;
    let a = honest.run_honest(x, y)?;
    let b = deviated.run_honest(x, y)?;
    let last = honest.round_count();
    let mut final_purity = Vec::new();
    for party in [Party::P0, Party::P1] {
        let held = honest.held_by(party, last)?;
        let purity = |s: &PureState| -> Result<f64> {
            if held.is_empty() {
                return Ok(1.0);
            }
            Ok(s.reduced(&held)?.purity())
        };
        final_purity.push(PartyPurity {
            party,
            prescribed: purity(&a.final_state)?,
            observed: purity(&b.final_state)?,
        });
    }
    Ok(HonestyVerdict { accepted: first_failure.is_none(), first_failure, rounds, final_purity })
}

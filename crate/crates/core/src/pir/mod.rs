//! Private information retrieval: classical multi-server schemes, their
//! one-server quantum compilation, and a scheme using prior entanglement.

pub mod classical;
pub mod entangled;
pub mod quantum;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{qubits_for, MAX_QUBITS};
use crate::privacy::{ordering_check, privacy_loss, quantum_ic, OrderingCheck, PrivacyReport, Side};
use crate::protocol::{InputDistribution, Party, Protocol};

/// Tolerance for perfect user privacy.
pub const USER_PRIVACY_TOLERANCE: f64 = 1e-10;
/// Slack on the communication bound.
pub const BOUND_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug)]
pub struct PirRoles {
    pub user: Party,
}

impl PirRoles {
    fn user_side(self) -> Side {
        match self.user {
            Party::P0 => Side::A,
            Party::P1 => Side::B,
        }
    }

    fn server_side(self) -> Side {
        match self.user {
            Party::P0 => Side::B,
            Party::P1 => Side::A,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PirPrivacyBundle {
    pub protocol: String,
    pub user_loss: PrivacyReport,
    pub server_loss: PrivacyReport,
    /// Bound on every server-side quantity: what the user receives.
    pub server_bound: f64,
    /// Full orderings, per side, where the superposed register fits.
    pub orderings: Vec<OrderingCheck>,
    /// Quantum costs for sides whose ordering could not be run.
    pub quantum: Vec<PrivacyReport>,
    pub skipped: Vec<String>,
    pub user_private: bool,
    pub server_within_bound: bool,
    pub ordering_holds: bool,
}

impl PirPrivacyBundle {
    pub fn passed(&self) -> bool {
        self.user_private && self.server_within_bound && self.ordering_holds
    }
}

// qubits for the input that the superposed cost on `side` puts in a register
fn superposed_width(protocol: &Protocol, side: Side) -> usize {
    let opposing = side.party().other();
    protocol.layout().width() + qubits_for(protocol.input_size(opposing))
}

pub(crate) fn analyze_pir(
    protocol: &Protocol,
    mu: &InputDistribution,
    roles: PirRoles,
    server_bound: f64,
    costs: bool,
) -> Result<PirPrivacyBundle> {
    let mut orderings = Vec::new();
    let mut quantum = Vec::new();
    let mut skipped = Vec::new();
    let mut losses = Vec::new();
    for side in [roles.user_side(), roles.server_side()] {
        if !costs {
            losses.push(privacy_loss(protocol, mu, side)?);
            continue;
        }
        let width = superposed_width(protocol, side);
        if width <= MAX_QUBITS {
            let check = ordering_check(protocol, mu, side)?;
            losses.push(check.loss.clone());
            orderings.push(check);
        } else {
            skipped.push(format!(
                "superposed cost on side {side:?} needs {width} qubits, above the {MAX_QUBITS}-qubit cap"
            ));
            losses.push(privacy_loss(protocol, mu, side)?);
            quantum.push(quantum_ic(protocol, mu, side)?);
        }
    }
    let server_loss = losses.pop().expect("two sides");
    let user_loss = losses.pop().expect("two sides");
    let server_side = roles.server_side();
    let mut server_totals = vec![server_loss.total];
    for o in orderings.iter().filter(|o| o.side == server_side) {
        server_totals.extend(o.superposed.iter().map(|s| s.total));
        server_totals.push(o.quantum.total);
    }
    server_totals.extend(quantum.iter().filter(|q| q.side == server_side).map(|q| q.total));
    Ok(PirPrivacyBundle {
        protocol: protocol.name().to_string(),
        user_private: user_loss.total.abs() <= USER_PRIVACY_TOLERANCE,
        server_within_bound: server_totals.iter().all(|&t| t <= server_bound + BOUND_SLACK),
        ordering_holds: orderings.iter().all(|o| o.holds),
        user_loss,
        server_loss,
        server_bound,
        orderings,
        quantum,
        skipped,
    })
}

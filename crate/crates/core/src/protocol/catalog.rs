//! Small reference protocols used to exercise the framework.

use num_complex::Complex64;

use super::{Gate, Party, Protocol, ProtocolBuilder, Round, Step};
use crate::error::Result;

fn single() -> Vec<String> {
    vec!["-".to_string()]
}

fn echo_base() -> Result<ProtocolBuilder> {
    ProtocolBuilder::new("echo", ["Alice", "Bob"], single(), single())
        .register("Q", 1, Party::P0)?
        .register("R", 1, Party::P0)?
        .register("B", 1, Party::P1)
}

fn bell_pair() -> Gate {
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let o = Complex64::new(0.0, 0.0);
    Gate::Prepare(vec![s, o, o, s])
}

fn echo_rounds(extra: Option<Step>) -> (Round, Round) {
    let first = Round::new(Party::P0)
        .step(Step::fixed(Party::P0, &["Q", "R"], "prepare pair", bell_pair()))
        .send(&["R"]);
    let mut second = Round::new(Party::P1);
    if let Some(step) = extra {
        second = second.step(step);
    }
    (first, second.send(&["R"]))
}

/// Alice prepares `(|00> + |11>)/sqrt 2` on `(Q, R)` and sends `R`; Bob
/// returns it untouched. Bob owns a one-qubit workspace `B`.
pub fn echo_protocol() -> Result<Protocol> {
    let (a, b) = echo_rounds(None);
    echo_base()?.round(a).round(b).build()
}

/// Bob copies `R` into his workspace with a CNOT before returning it.
pub fn echo_with_copy() -> Result<Protocol> {
    let (a, b) = echo_rounds(Some(Step::fixed(Party::P1, &["R", "B"], "copy", Gate::cnot())));
    let mut p = echo_base()?.round(a).round(b).build()?;
    p.name = "echo with copy".into();
    Ok(p)
}

/// Bob applies a Hadamard to his own workspace only.
pub fn echo_with_local_unitary() -> Result<Protocol> {
    let (a, b) = echo_rounds(Some(Step::fixed(Party::P1, &["B"], "local", Gate::hadamard_each())));
    let mut p = echo_base()?.round(a).round(b).build()?;
    p.name = "echo with local unitary".into();
    Ok(p)
}

/// Each party sends a fresh `|0>` regardless of a one-bit input.
pub fn fixed_message_protocol() -> Result<Protocol> {
    let bits = || vec!["0".to_string(), "1".to_string()];
    ProtocolBuilder::new("fixed message", ["Alice", "Bob"], bits(), bits())
        .register("M", 1, Party::P0)?
        .register("N", 1, Party::P1)?
        .round(Round::new(Party::P0).send(&["M"]))
        .round(Round::new(Party::P1).send(&["N"]))
        .build()
}

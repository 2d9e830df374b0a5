//! Quantum protocol for the inner product `x.y mod 2`, its first-message
//! density matrix in closed form, and a composed variant that trades
//! leakage between the two sides.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::linalg::{spectrum_entropy, DensityMatrix, RegisterLayout};
use crate::protocol::{Decoder, Gate, Party, Protocol, ProtocolBuilder, Round, Step};

pub const MAX_IP_BITS: usize = 6;
pub const MAX_ANALYTIC_BITS: usize = 8;
pub const MAX_GRAM_BITS: usize = 16;

/// Largest deviation tolerated between the closed-form and the
/// ensemble-built first message.
pub const FIRST_MESSAGE_TOLERANCE: f64 = 1e-10;

pub(crate) fn parity(v: u64) -> u64 {
    (v.count_ones() & 1) as u64
}

pub(crate) fn bit_labels(n: usize) -> Vec<String> {
    BitString::all(n).map(|b| b.to_string()).collect()
}

fn check_bits(n: usize, max: usize) -> Result<()> {
    if n == 0 || n > max {
        return Err(Error::OutOfRange(format!("n = {n}, expected 1..={max}")));
    }
    Ok(())
}

/// `2^{-n/2} sum_r |r>|r.x>` on `n + 1` qubits.
fn first_message(n: usize, x: u64) -> Vec<Complex64> {
    let amp = Complex64::new((0.5f64).powf(n as f64 / 2.0), 0.0);
    let mut v = vec![Complex64::new(0.0, 0.0); 1 << (n + 1)];
    for r in 0..(1u64 << n) {
        v[((r << 1) | parity(r & x)) as usize] = amp;
    }
    v
}

/// `|r>|b> -> |r>|b ^ r.x>`.
fn inner_product_gate(n: usize, x: u64) -> Gate {
    Gate::Permutation((0..(1usize << (n + 1))).map(|k| k ^ parity((k as u64 >> 1) & x) as usize).collect())
}

/// `|r> -> |r ^ y>`.
fn shift_gate(n: usize, y: u64) -> Gate {
    Gate::Permutation((0..(1usize << n)).map(|r| r ^ y as usize).collect())
}

/// Alice prepares the first message on `(Q, R)` and sends it; Bob shifts
/// `Q` by his input and sends everything back; Alice uncomputes her phase
/// bit and reads `x.y` from `R`.
pub fn build_ip_protocol(n: usize) -> Result<Protocol> {
    check_bits(n, MAX_IP_BITS)?;
    let builder = ProtocolBuilder::new("inner product", ["Alice", "Bob"], bit_labels(n), bit_labels(n))
        .register("Q", n, Party::P0)?
        .register("R", 1, Party::P0)?;
    builder
        .round(
            Round::new(Party::P0)
                .step(Step::new(Party::P0, &["Q", "R"], "prepare", move |x| Gate::Prepare(first_message(n, x))))
                .send(&["Q", "R"]),
        )
        .round(
            Round::new(Party::P1)
                .step(Step::new(Party::P1, &["Q"], "shift", move |y| shift_gate(n, y)))
                .send(&["Q", "R"]),
        )
        .decoder(Decoder {
            party: Party::P0,
            steps: vec![Step::new(Party::P0, &["Q", "R"], "uncompute", move |x| inner_product_gate(n, x))],
            measured: vec!["R".into()],
            decode: std::sync::Arc::new(|_, v| v[0]),
        })
        .build()
}

fn first_message_layout(n: usize) -> RegisterLayout {
    RegisterLayout::new([("Q", n), ("R", 1)]).expect("static layout")
}

fn first_message_coefficient(n: usize, r: u64, rp: u64, i: u64, j: u64) -> f64 {
    let full = (1u64 << n) as f64;
    if (r == rp && i != j) || (r == 0 && i == 1) || (rp == 0 && j == 1) {
        0.0
    } else if r == 0 && rp == 0 {
        full
    } else if r == rp || (r == 0 && i == 0) || (rp == 0 && j == 0) {
        full / 2.0
    } else {
        full / 4.0
    }
}

/// The first message averaged over a uniform `x`, from the closed-form
/// coefficient table, cross-checked against the ensemble average.
pub fn analytic_first_message(n: usize) -> Result<DensityMatrix> {
    check_bits(n, MAX_ANALYTIC_BITS)?;
    let dim = 1usize << (n + 1);
    let scale = (0.25f64).powi(n as i32);
    let mat = DMatrix::from_fn(dim, dim, |a, b| {
        let (r, i, rp, j) = ((a >> 1) as u64, (a & 1) as u64, (b >> 1) as u64, (b & 1) as u64);
        Complex64::new(scale * first_message_coefficient(n, r, rp, i, j), 0.0)
    });
    let analytic = DensityMatrix::new(mat, first_message_layout(n))?;
    let deviation = analytic.max_deviation(&ensemble_first_message(n)?)?;
    if deviation > FIRST_MESSAGE_TOLERANCE {
        return Err(Error::Consistency(format!(
            "closed-form first message deviates from the ensemble by {deviation:e}"
        )));
    }
    Ok(analytic)
}

/// `2^{-n} sum_x |phi_x><phi_x|`, built directly from the states.
pub fn ensemble_first_message(n: usize) -> Result<DensityMatrix> {
    check_bits(n, MAX_ANALYTIC_BITS)?;
    let dim = 1usize << (n + 1);
    let w = (0.5f64).powi(n as i32);
    let mut mat = DMatrix::<Complex64>::zeros(dim, dim);
    for x in 0..(1u64 << n) {
        let v = first_message(n, x);
        let nz: Vec<(usize, Complex64)> = v.iter().copied().enumerate().filter(|(_, a)| a.norm_sqr() > 0.0).collect();
        for &(a, va) in &nz {
            for &(b, vb) in &nz {
                mat[(a, b)] += va * vb.conj() * w;
            }
        }
    }
    DensityMatrix::new(mat, first_message_layout(n))
}

/// Nonzero spectrum of the averaged first message, in closed form.
///
/// The Gram matrix of the `2^n` first messages has unit diagonal and `1/2`
/// off the diagonal, so its eigenvalues are `(2^n + 1)/2` once and `1/2`
/// with multiplicity `2^n - 1`; the ensemble spectrum is that times `2^{-n}`.
pub fn gram_spectrum_oracle(n: usize) -> Result<Vec<f64>> {
    check_bits(n, MAX_GRAM_BITS)?;
    let size = 1usize << n;
    let mut eig = Vec::with_capacity(size);
    eig.push((size as f64 + 1.0) / (2.0 * size as f64));
    eig.extend(std::iter::repeat_n(1.0 / (2.0 * size as f64), size - 1));
    Ok(eig)
}

/// Entropy of the averaged first message, without building any matrix.
pub fn gram_entropy(n: usize) -> Result<f64> {
    let size = (1u64 << n) as f64;
    check_bits(n, MAX_GRAM_BITS)?;
    let big = (size + 1.0) / (2.0 * size);
    let small = 1.0 / (2.0 * size);
    Ok(-big * big.log2() - (size - 1.0) * small * small.log2())
}

/// Entropy of the oracle spectrum through the generic spectrum routine.
pub fn gram_spectrum_entropy(n: usize) -> Result<f64> {
    Ok(spectrum_entropy(&gram_spectrum_oracle(n)?))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IpReferenceRow {
    pub quantity: String,
    /// Published asymptotic value, exact only up to exponentially small terms.
    pub published_asymptotic: f64,
    /// Exact value where a closed form is available.
    pub closed_form: Option<f64>,
    pub note: String,
}

/// Published asymptotic values for the six quantities next to the exact
/// values available in closed form.
pub fn theoretical_ip_table(n: usize) -> Result<Vec<IpReferenceRow>> {
    if n == 0 {
        return Err(Error::OutOfRange("n must be at least 1".into()));
    }
    let half = n as f64 / 2.0;
    let published = "published value, up to exponentially small terms";
    let exact_a = if n <= MAX_GRAM_BITS { Some(gram_entropy(n)?) } else { None };
    let exact_b = Some(1.0 - (0.5f64).powi(n.min(1023) as i32));
    let row = |q: &str, v: f64, c: Option<f64>, note: &str| IpReferenceRow {
        quantity: q.into(),
        published_asymptotic: v,
        closed_form: c,
        note: note.into(),
    };
    Ok(vec![
        row("L_A", half + 0.5, exact_a, &format!("{published}; exact value is the entropy of the averaged first message")),
        row("L_B", 1.0, exact_b, &format!("{published}; exact value averages H(x.y) over x")),
        row("SIC_A", half + 0.5, None, published),
        row("SIC_B", half + 0.5, None, published),
        row("QIC_A", half + 0.5, None, published),
        row("QIC_B", half + 1.5, None, published),
    ])
}

/// Exact entropy of the averaged first message against the two candidate
/// asymptotic constants `n/2 + 1/2` and `n/2 + 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FirstMessageEntropy {
    pub n: usize,
    pub exact: f64,
    pub offset_half: f64,
    pub offset_one: f64,
}

pub fn first_message_entropy(n: usize) -> Result<FirstMessageEntropy> {
    let exact = gram_entropy(n)?;
    let half = n as f64 / 2.0;
    Ok(FirstMessageEntropy { n, exact, offset_half: exact - (half + 0.5), offset_one: exact - (half + 1.0) })
}

/// Inner product on the first `t` bits with Alice starting, then on the
/// remaining `n - t` bits with the roles swapped. Bob forwards his partial
/// result in a final round and Alice outputs the XOR of both.
///
/// Rounds: Alice sends her first message; Bob shifts it and adds his own
/// first message; Alice shifts Bob's; Bob decodes his part into `O` and
/// sends `O`. Parts of width zero are left out, so rounds can carry empty
/// messages.
pub fn build_ip_tradeoff(n: usize, t: usize) -> Result<Protocol> {
    check_bits(n, MAX_IP_BITS)?;
    if t > n {
        return Err(Error::OutOfRange(format!("split t = {t} exceeds n = {n}")));
    }
    let s = n - t;
    let low = (1u64 << s) - 1;
    let mut builder = ProtocolBuilder::new(
        &format!("inner product tradeoff t={t}"),
        ["Alice", "Bob"],
        bit_labels(n),
        bit_labels(n),
    );
    let mut first: Vec<&str> = Vec::new();
    let mut second: Vec<&str> = Vec::new();
    if t > 0 {
        builder = builder.register("Q1", t, Party::P0)?.register("R1", 1, Party::P0)?;
        first = vec!["Q1", "R1"];
    }
    if s > 0 {
        builder = builder.register("Q2", s, Party::P1)?.register("R2", 1, Party::P1)?;
        second = vec!["Q2", "R2"];
    }
    builder = builder.register("O", 1, Party::P1)?;

    let mut r1 = Round::new(Party::P0);
    let mut r2 = Round::new(Party::P1);
    let mut r3 = Round::new(Party::P0);
    let mut r4 = Round::new(Party::P1);
    if t > 0 {
        r1 = r1
            .step(Step::new(Party::P0, &first, "prepare", move |x| Gate::Prepare(first_message(t, x >> s))))
            .send(&first);
        r2 = r2.step(Step::new(Party::P1, &["Q1"], "shift", move |y| shift_gate(t, y >> s)));
    }
    if s > 0 {
        r2 = r2.step(Step::new(Party::P1, &second, "prepare", move |y| Gate::Prepare(first_message(s, y & low))));
        r3 = r3.step(Step::new(Party::P0, &["Q2"], "shift", move |x| shift_gate(s, x & low))).send(&second);
        r4 = r4
            .step(Step::new(Party::P1, &second, "uncompute", move |y| inner_product_gate(s, y & low)))
            .step(Step::fixed(Party::P1, &["R2", "O"], "copy", Gate::cnot()));
    }
    let mut back = first.clone();
    back.extend(&second);
    r2 = r2.send(&back);
    r4 = r4.send(&["O"]);

    let mut steps = Vec::new();
    let mut measured = vec!["O".to_string()];
    if t > 0 {
        steps.push(Step::new(Party::P0, &first, "uncompute", move |x| inner_product_gate(t, x >> s)));
        measured.push("R1".into());
    }
    builder
        .round(r1)
        .round(r2)
        .round(r3)
        .round(r4)
        .decoder(Decoder {
            party: Party::P0,
            steps,
            measured,
            decode: std::sync::Arc::new(|_, v| v.iter().fold(0, |acc, b| acc ^ b)),
        })
        .build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficient_cases() {
        let n = 3;
        assert_eq!(first_message_coefficient(n, 0, 0, 0, 0), 8.0);
        assert_eq!(first_message_coefficient(n, 5, 5, 0, 1), 0.0);
        assert_eq!(first_message_coefficient(n, 0, 3, 1, 0), 0.0);
        assert_eq!(first_message_coefficient(n, 3, 3, 1, 1), 4.0);
        assert_eq!(first_message_coefficient(n, 0, 3, 0, 1), 4.0);
        assert_eq!(first_message_coefficient(n, 2, 3, 1, 0), 2.0);
    }

    #[test]
    fn spectrum_sums_to_one() {
        for n in 1..=MAX_GRAM_BITS {
            let s: f64 = gram_spectrum_oracle(n).unwrap().iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
            assert!((gram_entropy(n).unwrap() - gram_spectrum_entropy(n).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn small_protocol_outputs() {
        let p = build_ip_protocol(2).unwrap();
        assert_eq!(p.run_honest(0b11, 0b11).unwrap().output, Some(0));
        assert_eq!(p.run_honest(0b10, 0b11).unwrap().output, Some(1));
    }

    #[test]
    fn range_checks() {
        assert!(build_ip_protocol(0).is_err());
        assert!(build_ip_protocol(7).is_err());
        assert!(analytic_first_message(9).is_err());
        assert!(build_ip_tradeoff(3, 4).is_err());
    }
}

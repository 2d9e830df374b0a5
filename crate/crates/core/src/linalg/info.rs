use super::cq::CqState;
use super::density::DensityMatrix;
use super::state::PureState;
use crate::error::{Error, Result};

/// States whose named registers have a well-defined von Neumann entropy.
pub trait RegisterEntropy {
    fn entropy_of(&self, registers: &[&str]) -> Result<f64>;
}

impl RegisterEntropy for PureState {
    fn entropy_of(&self, registers: &[&str]) -> Result<f64> {
        self.entropy_of_registers(registers)
    }
}

impl RegisterEntropy for DensityMatrix {
    fn entropy_of(&self, registers: &[&str]) -> Result<f64> {
        self.entropy_of_registers(registers)
    }
}

impl RegisterEntropy for CqState {
    fn entropy_of(&self, registers: &[&str]) -> Result<f64> {
        self.entropy_of_registers(registers)
    }
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    rho.entropy()
}

pub fn cq_entropy(cq: &CqState, registers: &[&str]) -> Result<f64> {
    cq.entropy_of_registers(registers)
}

pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    rho.trace_distance(sigma)
}

fn check_disjoint(sets: [&[&str]; 3]) -> Result<()> {
    for (i, a) in sets.iter().enumerate() {
        for b in &sets[i + 1..] {
            if let Some(name) = a.iter().find(|n| b.contains(n)) {
                return Err(Error::OverlappingRegisters(name.to_string()));
            }
        }
    }
    Ok(())
}

fn union(parts: &[&[&str]]) -> Vec<String> {
    parts.iter().flat_map(|p| p.iter().map(|s| s.to_string())).collect()
}

fn entropy<S: RegisterEntropy + ?Sized>(state: &S, parts: &[&[&str]]) -> Result<f64> {
    let names = union(parts);
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    if refs.is_empty() {
        return Ok(0.0);
    }
    state.entropy_of(&refs)
}

/// `I(A:B|C) = S(AC) + S(BC) - S(C) - S(ABC)`; `C` may be empty.
pub fn conditional_mutual_information<S: RegisterEntropy + ?Sized>(
    state: &S,
    a: &[&str],
    b: &[&str],
    c: &[&str],
) -> Result<f64> {
    check_disjoint([a, b, c])?;
    if a.is_empty() || b.is_empty() {
        // still validate the names
        entropy(state, &[a, b, c])?;
        return Ok(0.0);
    }
    Ok(entropy(state, &[a, c])? + entropy(state, &[b, c])? - entropy(state, &[c])? - entropy(state, &[a, b, c])?)
}

pub fn mutual_information<S: RegisterEntropy + ?Sized>(state: &S, a: &[&str], b: &[&str]) -> Result<f64> {
    conditional_mutual_information(state, a, b, &[])
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;
    use crate::linalg::{CqEntry, RegisterLayout};

    #[test]
    fn ghz_conditional_information() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let layout = RegisterLayout::new([("A", 1), ("B", 1), ("C", 1)]).unwrap();
        let mut amps = vec![Complex64::new(0.0, 0.0); 8];
        amps[0] = Complex64::new(s, 0.0);
        amps[7] = Complex64::new(s, 0.0);
        let ghz = PureState::new(amps, layout).unwrap();
        let v = conditional_mutual_information(&ghz, &["A"], &["B"], &["C"]).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let dense = ghz.to_density();
        let v2 = conditional_mutual_information(&dense, &["A"], &["B"], &["C"]).unwrap();
        assert!((v2 - 1.0).abs() < 1e-12);
        assert!(matches!(
            conditional_mutual_information(&ghz, &["A"], &["A", "B"], &[]),
            Err(Error::OverlappingRegisters(_))
        ));
    }

    #[test]
    fn classical_copy_and_product() {
        let q = RegisterLayout::new([("q", 1)]).unwrap();
        let cq = CqState::new(
            vec!["C"],
            vec![
                CqEntry::pure(vec!["0".into()], 0.5, PureState::basis(q.clone(), 0).unwrap()),
                CqEntry::pure(vec!["1".into()], 0.5, PureState::basis(q.clone(), 1).unwrap()),
            ],
        )
        .unwrap();
        assert!((mutual_information(&cq, &["C"], &["q"]).unwrap() - 1.0).abs() < 1e-12);
        let layout = RegisterLayout::new([("A", 1), ("B", 1)]).unwrap();
        let half = Complex64::new(0.5, 0.0);
        let product = PureState::new(vec![half; 4], layout).unwrap();
        assert!(mutual_information(&product, &["A"], &["B"]).unwrap().abs() < 1e-12);
    }
}

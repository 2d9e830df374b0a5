use std::collections::BTreeMap;

use num_complex::Complex64;

use super::density::DensityMatrix;
use super::layout::{qubits_for, RegisterLayout};
use super::spectrum::{
    density_spectrum, mixture_spectrum, reduce_pure, shannon_entropy, spectrum_entropy, CMatrix, STATE_TOLERANCE,
};
use super::state::PureState;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum QuantumPart {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl QuantumPart {
    pub fn layout(&self) -> &RegisterLayout {
        match self {
            QuantumPart::Pure(s) => s.layout(),
            QuantumPart::Mixed(m) => m.layout(),
        }
    }

    pub fn to_density(&self) -> DensityMatrix {
        match self {
            QuantumPart::Pure(s) => s.to_density(),
            QuantumPart::Mixed(m) => m.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CqEntry {
    pub label: Vec<String>,
    pub probability: f64,
    pub state: QuantumPart,
}

impl CqEntry {
    pub fn pure(label: Vec<String>, probability: f64, state: PureState) -> Self {
        Self { label, probability, state: QuantumPart::Pure(state) }
    }

    pub fn mixed(label: Vec<String>, probability: f64, state: DensityMatrix) -> Self {
        Self { label, probability, state: QuantumPart::Mixed(state) }
    }
}

/// Classical-quantum state: named classical registers whose joint value is
/// the entry label, each label carrying a quantum state on a shared layout.
#[derive(Clone, Debug, PartialEq)]
pub struct CqState {
    classical: Vec<String>,
    layout: RegisterLayout,
    entries: Vec<CqEntry>,
    // support of each pure entry, cached for the entropy engine
    supports: Vec<Option<Vec<(usize, Complex64)>>>,
}

impl CqState {
    pub fn new<S: Into<String>>(classical: Vec<S>, entries: Vec<CqEntry>) -> Result<Self> {
        let classical: Vec<String> = classical.into_iter().map(Into::into).collect();
        let first = entries
            .first()
            .ok_or_else(|| Error::InvalidDistribution("empty ensemble".into()))?;
        let layout = first.state.layout().clone();
        for (i, name) in classical.iter().enumerate() {
            if classical[..i].contains(name) || layout.contains(name) {
                return Err(Error::DuplicateRegister(name.clone()));
            }
        }
        let mut total = 0.0;
        let mut seen = std::collections::BTreeSet::new();
        for e in &entries {
            if e.label.len() != classical.len() {
                return Err(Error::DimensionMismatch(format!(
                    "label {:?} has {} parts for {} classical registers",
                    e.label,
                    e.label.len(),
                    classical.len()
                )));
            }
            if e.probability.is_nan() || e.probability < 0.0 {
                return Err(Error::InvalidDistribution(format!("probability {} for {:?}", e.probability, e.label)));
            }
            if e.state.layout() != &layout {
                return Err(Error::DimensionMismatch("ensemble members have different layouts".into()));
            }
            if !seen.insert(e.label.clone()) {
                return Err(Error::DuplicateLabel(e.label.clone()));
            }
            total += e.probability;
        }
        if (total - 1.0).abs() > STATE_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
        }
        let supports = entries
            .iter()
            .map(|e| match &e.state {
                QuantumPart::Pure(s) => Some(s.sparse()),
                QuantumPart::Mixed(_) => None,
            })
            .collect();
        Ok(Self { classical, layout, entries, supports })
    }

    pub fn classical(&self) -> &[String] {
        &self.classical
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn entries(&self) -> &[CqEntry] {
        &self.entries
    }

    /// Every register name, classical first.
    pub fn register_names(&self) -> Vec<&str> {
        self.classical.iter().map(String::as_str).chain(self.layout.names()).collect()
    }

    fn split<'a>(&self, names: &[&'a str]) -> Result<(Vec<usize>, Vec<&'a str>)> {
        let mut classical = Vec::new();
        let mut quantum = Vec::new();
        for (i, &name) in names.iter().enumerate() {
            if names[..i].contains(&name) {
                return Err(Error::DuplicateRegister(name.to_string()));
            }
            if let Some(pos) = self.classical.iter().position(|c| c == name) {
                classical.push(pos);
            } else {
                self.layout.register(name)?;
                quantum.push(name);
            }
        }
        classical.sort_unstable();
        Ok((classical, quantum))
    }

    fn groups(&self, kept: &[usize]) -> BTreeMap<Vec<&str>, Vec<usize>> {
        let mut groups: BTreeMap<Vec<&str>, Vec<usize>> = BTreeMap::new();
        for (idx, e) in self.entries.iter().enumerate() {
            if e.probability <= 0.0 {
                continue;
            }
            let key = kept.iter().map(|&c| e.label[c].as_str()).collect();
            groups.entry(key).or_default().push(idx);
        }
        groups
    }

    /// Distribution of the named classical registers.
    pub fn marginal_probabilities(&self, names: &[&str]) -> Result<BTreeMap<Vec<String>, f64>> {
        let (kept, quantum) = self.split(names)?;
        if let Some(q) = quantum.first() {
            return Err(Error::ModeMismatch(format!("`{q}` is not a classical register")));
        }
        Ok(self
            .groups(&kept)
            .into_iter()
            .map(|(k, members)| {
                let p = members.iter().map(|&i| self.entries[i].probability).sum();
                (k.into_iter().map(String::from).collect(), p)
            })
            .collect())
    }

    /// Quantum part averaged over all labels.
    pub fn average_state(&self) -> DensityMatrix {
        let d = self.layout.dim();
        let mut mat = CMatrix::zeros(d, d);
        for e in &self.entries {
            mat += e.state.to_density().matrix() * Complex64::new(e.probability, 0.0);
        }
        DensityMatrix::from_parts_unchecked(mat, self.layout.clone())
    }

    /// Entropy of the named registers (classical and quantum) via
    /// `S(C, Q) = H(C) + sum_c p(c) S(rho^c_Q)`.
    pub fn entropy_of_registers(&self, names: &[&str]) -> Result<f64> {
        let (kept, quantum) = self.split(names)?;
        // layout order, so dense reductions of mixed members line up
        let mut qubits = self.layout.qubits_of(&quantum)?;
        qubits.sort_unstable();
        let width = self.layout.width();
        let groups = self.groups(&kept);
        let mut weights = Vec::with_capacity(groups.len());
        let mut quantum_part = 0.0;
        for members in groups.values() {
            let pc: f64 = members.iter().map(|&i| self.entries[i].probability).sum();
            weights.push(pc);
            if qubits.is_empty() {
                continue;
            }
            let all_pure = members.iter().all(|&i| self.supports[i].is_some());
            let eigenvalues = if all_pure {
                let list: Vec<(f64, &[(usize, Complex64)])> = members
                    .iter()
                    .map(|&i| (self.entries[i].probability / pc, self.supports[i].as_deref().unwrap()))
                    .collect();
                mixture_spectrum(width, &list, &qubits)
            } else {
                let dk = 1usize << qubits.len();
                let mut rho = CMatrix::zeros(dk, dk);
                for &i in members {
                    let w = Complex64::new(self.entries[i].probability / pc, 0.0);
                    match &self.entries[i].state {
                        QuantumPart::Pure(s) => rho += reduce_pure(width, s.amplitudes(), &qubits) * w,
                        QuantumPart::Mixed(m) => rho += m.partial_trace(&quantum)?.matrix() * w,
                    }
                }
                density_spectrum(&rho)?
            };
            quantum_part += pc * spectrum_entropy(&eigenvalues);
        }
        Ok(shannon_entropy(weights) + quantum_part)
    }

    /// The block-diagonal joint matrix with every classical register encoded
    /// in `qubits_for(#values)` qubits ahead of the quantum layout.
    pub fn assemble(&self) -> Result<DensityMatrix> {
        let mut layout = RegisterLayout::empty();
        let mut codes: Vec<Vec<&str>> = Vec::new();
        for (c, name) in self.classical.iter().enumerate() {
            let mut values: Vec<&str> = Vec::new();
            for e in &self.entries {
                if !values.contains(&e.label[c].as_str()) {
                    values.push(&e.label[c]);
                }
            }
            layout.push(name.clone(), qubits_for(values.len()))?;
            codes.push(values);
        }
        let widths: Vec<usize> = layout.registers().iter().map(|r| r.width).collect();
        let layout = layout.concat(&self.layout)?;
        let dq = self.layout.dim();
        let d = layout.dim();
        let mut mat = CMatrix::zeros(d, d);
        for e in &self.entries {
            let mut cidx = 0usize;
            for (c, values) in codes.iter().enumerate() {
                let v = values.iter().position(|&v| v == e.label[c]).expect("value collected above");
                cidx = (cidx << widths[c]) | v;
            }
            let block = e.state.to_density();
            let off = cidx * dq;
            for i in 0..dq {
                for j in 0..dq {
                    mat[(off + i, off + j)] += block.matrix()[(i, j)] * e.probability;
                }
            }
        }
        Ok(DensityMatrix::from_parts_unchecked(mat, layout))
    }
}

use num_complex::Complex64;

use super::density::DensityMatrix;
use super::layout::{complement, scatter_offsets, RegisterLayout};
use super::spectrum::{mixture_spectrum, reduce_pure, spectrum_entropy, support, CMatrix, STATE_TOLERANCE};
use crate::error::{Error, Result};

pub(crate) const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// A normalized state vector over a register layout.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amps: Vec<Complex64>,
    layout: RegisterLayout,
}

impl PureState {
    pub fn new(amps: Vec<Complex64>, layout: RegisterLayout) -> Result<Self> {
        if amps.len() != layout.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for a {}-qubit layout",
                amps.len(),
                layout.width()
            )));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > STATE_TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amps, layout })
    }

    /// Rescales to unit norm; fails only on the zero vector.
    pub fn normalized(mut amps: Vec<Complex64>, layout: RegisterLayout) -> Result<Self> {
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::NotNormalized(0.0));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Self::new(amps, layout)
    }

    pub fn basis(layout: RegisterLayout, index: usize) -> Result<Self> {
        if index >= layout.dim() {
            return Err(Error::DimensionMismatch(format!(
                "basis index {index} outside dimension {}",
                layout.dim()
            )));
        }
        let mut amps = vec![ZERO; layout.dim()];
        amps[index] = ONE;
        Ok(Self { amps, layout })
    }

    pub fn zero(layout: RegisterLayout) -> Self {
        Self::basis(layout, 0).expect("index 0 always exists")
    }

    /// Computational basis state with the given value in each named register
    /// (unnamed registers are zero).
    pub fn from_values(layout: RegisterLayout, values: &[(&str, u64)]) -> Result<Self> {
        let width = layout.width();
        let mut index = 0usize;
        for &(name, value) in values {
            let (start, w) = layout.span(name)?;
            if value >= 1u64 << w {
                return Err(Error::DimensionMismatch(format!("value {value} does not fit register `{name}`")));
            }
            index |= (value as usize) << (width - start - w);
        }
        Self::basis(layout, index)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn width(&self) -> usize {
        self.layout.width()
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Kronecker product; `self` occupies the most significant positions.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let layout = self.layout.concat(&other.layout)?;
        let mut amps = Vec::with_capacity(layout.dim());
        for a in &self.amps {
            amps.extend(other.amps.iter().map(|b| a * b));
        }
        Ok(Self { amps, layout })
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.layout != other.layout {
            return Err(Error::DimensionMismatch("inner product across different layouts".into()));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn to_density(&self) -> DensityMatrix {
        let d = self.dim();
        let m = CMatrix::from_fn(d, d, |i, j| self.amps[i] * self.amps[j].conj());
        DensityMatrix::from_parts_unchecked(m, self.layout.clone())
    }

    /// Reduced density matrix on the named registers (kept in layout order).
    pub fn reduced(&self, keep: &[&str]) -> Result<DensityMatrix> {
        let sub = self.layout.sub_layout(keep)?;
        let names: Vec<&str> = sub.names().collect();
        let qubits = self.layout.qubits_of(&names)?;
        let m = reduce_pure(self.width(), &self.amps, &qubits);
        Ok(DensityMatrix::from_parts_unchecked(m, sub))
    }

    /// Von Neumann entropy of the reduction onto the named registers.
    pub fn entropy_of_registers(&self, names: &[&str]) -> Result<f64> {
        let qubits = self.layout.qubits_of(names)?;
        if qubits.is_empty() || qubits.len() == self.width() {
            return Ok(0.0);
        }
        // pure global state: S(K) = S(complement), take the smaller side
        let keep = if 2 * qubits.len() <= self.width() { qubits } else { complement(self.width(), &qubits) };
        let sparse = support(&self.amps);
        let eigenvalues = mixture_spectrum(self.width(), &[(1.0, &sparse)], &keep);
        Ok(spectrum_entropy(&eigenvalues))
    }

    /// Reorders registers; the result's layout lists `order` exactly.
    pub fn permute_registers(&self, order: &[&str]) -> Result<Self> {
        if order.len() != self.layout.registers().len() {
            return Err(Error::DimensionMismatch("permutation must list every register".into()));
        }
        let mut layout = RegisterLayout::empty();
        for name in order {
            let r = self.layout.register(name)?;
            if r.width == 0 {
                layout.push_empty(*name)?;
            } else {
                layout.push(*name, r.width)?;
            }
        }
        let qubits = self.layout.qubits_of(order)?;
        let offs = scatter_offsets(self.width(), &qubits);
        let amps = (0..self.dim()).map(|new| self.amps[offs[new]]).collect();
        Ok(Self { amps, layout })
    }

    /// Applies a dense matrix to the listed qubits (big-endian in list order).
    pub(crate) fn apply_matrix(&mut self, qubits: &[usize], m: &CMatrix) {
        let width = self.width();
        let koff = scatter_offsets(width, qubits);
        let roff = scatter_offsets(width, &complement(width, qubits));
        let d = koff.len();
        let mut v = vec![ZERO; d];
        for &t in &roff {
            for (k, slot) in v.iter_mut().enumerate() {
                *slot = self.amps[koff[k] | t];
            }
            for row in 0..d {
                let mut acc = ZERO;
                for (col, x) in v.iter().enumerate() {
                    acc += m[(row, col)] * x;
                }
                self.amps[koff[row] | t] = acc;
            }
        }
    }

    /// Applies the same 2x2 matrix to each listed qubit.
    pub(crate) fn apply_each_qubit(&mut self, qubits: &[usize], u: &[[Complex64; 2]; 2]) {
        let width = self.width();
        for &q in qubits {
            let bit = 1usize << (width - 1 - q);
            for i in 0..self.amps.len() {
                if i & bit == 0 {
                    let (a, b) = (self.amps[i], self.amps[i | bit]);
                    self.amps[i] = u[0][0] * a + u[0][1] * b;
                    self.amps[i | bit] = u[1][0] * a + u[1][1] * b;
                }
            }
        }
    }

    /// Basis permutation `|k> -> |perm[k]>` on the listed qubits.
    pub(crate) fn apply_permutation(&mut self, qubits: &[usize], perm: &[usize]) {
        let width = self.width();
        let koff = scatter_offsets(width, qubits);
        let roff = scatter_offsets(width, &complement(width, qubits));
        let mut v = vec![ZERO; koff.len()];
        for &t in &roff {
            for (k, slot) in v.iter_mut().enumerate() {
                *slot = self.amps[koff[k] | t];
            }
            for (k, &x) in v.iter().enumerate() {
                self.amps[koff[perm[k]] | t] = x;
            }
        }
    }

    pub(crate) fn apply_diagonal(&mut self, qubits: &[usize], phases: &[Complex64]) {
        let width = self.width();
        let koff = scatter_offsets(width, qubits);
        let roff = scatter_offsets(width, &complement(width, qubits));
        for &t in &roff {
            for (k, ph) in phases.iter().enumerate() {
                self.amps[koff[k] | t] *= ph;
            }
        }
    }

    /// Replaces the all-zero content of the listed qubits by `target`.
    /// Fails if those qubits carry any weight outside |0...0>.
    pub(crate) fn prepare(&mut self, qubits: &[usize], target: &[Complex64]) -> Result<()> {
        let width = self.width();
        let koff = scatter_offsets(width, qubits);
        let roff = scatter_offsets(width, &complement(width, qubits));
        let stray: f64 = roff
            .iter()
            .flat_map(|&t| koff[1..].iter().map(move |&k| k | t))
            .map(|i| self.amps[i].norm_sqr())
            .sum();
        if stray > STATE_TOLERANCE {
            return Err(Error::NotFresh(format!("weight {stray:e} outside |0>")));
        }
        for &t in &roff {
            let base = self.amps[t];
            for (k, &c) in target.iter().enumerate() {
                self.amps[koff[k] | t] = base * c;
            }
        }
        Ok(())
    }

    /// Nonzero `(index, amplitude)` pairs.
    pub fn sparse(&self) -> Vec<(usize, Complex64)> {
        support(&self.amps)
    }

    /// Basis indices with nonzero weight and their probabilities.
    pub fn support(&self, threshold: f64) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.amps
            .iter()
            .enumerate()
            .map(|(i, a)| (i, a.norm_sqr()))
            .filter(move |&(_, p)| p > threshold)
    }

    /// Value held by a register in a basis index of this layout.
    pub fn register_value(&self, index: usize, name: &str) -> Result<u64> {
        let (start, w) = self.layout.span(name)?;
        let shift = self.width() - start - w;
        Ok(((index >> shift) & ((1usize << w) - 1)) as u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qubit(name: &str) -> RegisterLayout {
        RegisterLayout::new([(name, 1)]).unwrap()
    }

    #[test]
    fn tensor_of_basis_states() {
        let zero = PureState::basis(qubit("a"), 0).unwrap();
        let one = PureState::basis(qubit("b"), 1).unwrap();
        let t = zero.tensor(&one).unwrap();
        assert_eq!(t.dim(), 4);
        assert_eq!(t.amplitudes()[1], ONE);
        assert_eq!(t.layout().names().collect::<Vec<_>>(), vec!["a", "b"]);
    }

    #[test]
    fn tensor_of_plus_states() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = |n| PureState::new(vec![Complex64::new(s, 0.0); 2], qubit(n)).unwrap();
        let t = plus("a").tensor(&plus("b")).unwrap();
        for a in t.amplitudes() {
            assert!((a - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        }
        assert!(matches!(plus("a").tensor(&plus("a")), Err(Error::DuplicateRegister(_))));
    }

    #[test]
    fn rejects_unnormalized() {
        assert!(matches!(
            PureState::new(vec![ONE, ONE], qubit("a")),
            Err(Error::NotNormalized(_))
        ));
    }

    #[test]
    fn permutation_and_register_values() {
        let layout = RegisterLayout::new([("a", 2), ("b", 1)]).unwrap();
        let s = PureState::from_values(layout, &[("a", 2), ("b", 1)]).unwrap();
        let idx = s.support(0.5).next().unwrap().0;
        assert_eq!(idx, 0b101);
        assert_eq!(s.register_value(idx, "a").unwrap(), 2);
        let p = s.permute_registers(&["b", "a"]).unwrap();
        let idx = p.support(0.5).next().unwrap().0;
        assert_eq!(idx, 0b110);
        assert_eq!(p.register_value(idx, "a").unwrap(), 2);
    }

    #[test]
    fn prepare_requires_fresh_registers() {
        let layout = RegisterLayout::new([("a", 1), ("b", 1)]).unwrap();
        let mut s = PureState::zero(layout.clone());
        let s2 = std::f64::consts::FRAC_1_SQRT_2;
        s.prepare(&[1], &[Complex64::new(s2, 0.0), Complex64::new(s2, 0.0)]).unwrap();
        assert!((s.amplitudes()[1].re - s2).abs() < 1e-15);
        assert!(s.prepare(&[1], &[ONE, ZERO]).is_err());
    }
}

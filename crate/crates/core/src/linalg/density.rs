use num_complex::Complex64;

use super::layout::{complement, scatter_offsets, RegisterLayout};
use super::spectrum::{
    density_spectrum, hermitian_deviation, hermitian_spectrum, spectrum_entropy, CMatrix, STATE_TOLERANCE,
};
use crate::error::{Error, Result};

/// A validated density matrix over a register layout.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
    layout: RegisterLayout,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity (all within 1e-10).
    pub fn new(mat: CMatrix, layout: RegisterLayout) -> Result<Self> {
        if mat.nrows() != layout.dim() || mat.ncols() != layout.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for a {}-qubit layout",
                mat.nrows(),
                mat.ncols(),
                layout.width()
            )));
        }
        let dev = hermitian_deviation(&mat);
        if dev > STATE_TOLERANCE {
            return Err(Error::NonHermitian(dev));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > STATE_TOLERANCE || tr.im.abs() > STATE_TOLERANCE {
            return Err(Error::InvalidDensity(format!("trace {tr}")));
        }
        density_spectrum(&mat)?;
        Ok(Self { mat, layout })
    }

    pub(crate) fn from_parts_unchecked(mat: CMatrix, layout: RegisterLayout) -> Self {
        Self { mat, layout }
    }

    pub fn maximally_mixed(layout: RegisterLayout) -> Self {
        let d = layout.dim();
        let mat = CMatrix::from_diagonal_element(d, d, Complex64::new(1.0 / d as f64, 0.0));
        Self { mat, layout }
    }

    /// Convex combination of states sharing one layout.
    pub fn mixture(members: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::InvalidDistribution("empty mixture".into()))?;
        let layout = first.1.layout.clone();
        let total: f64 = members.iter().map(|m| m.0).sum();
        if members.iter().any(|m| m.0 < 0.0) || (total - 1.0).abs() > STATE_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("weights sum to {total}")));
        }
        let mut mat = CMatrix::zeros(layout.dim(), layout.dim());
        for (p, rho) in members {
            if rho.layout != layout {
                return Err(Error::DimensionMismatch("mixture members have different layouts".into()));
            }
            mat += &rho.mat * Complex64::new(*p, 0.0);
        }
        Ok(Self { mat, layout })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let layout = self.layout.concat(&other.layout)?;
        Ok(Self { mat: self.mat.kronecker(&other.mat), layout })
    }

    /// Reduced state on `keep`; kept registers stay in their original order.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<Self> {
        let sub = self.layout.sub_layout(keep)?;
        let names: Vec<&str> = sub.names().collect();
        let width = self.layout.width();
        let qubits = self.layout.qubits_of(&names)?;
        let koff = scatter_offsets(width, &qubits);
        let roff = scatter_offsets(width, &complement(width, &qubits));
        let dk = koff.len();
        let mat = CMatrix::from_fn(dk, dk, |a, b| roff.iter().map(|&t| self.mat[(koff[a] | t, koff[b] | t)]).sum());
        Ok(Self { mat, layout: sub })
    }

    /// Eigenvalues sorted descending, small negatives clamped.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        density_spectrum(&self.mat)
    }

    pub fn entropy(&self) -> Result<f64> {
        Ok(spectrum_entropy(&self.spectrum()?))
    }

    pub fn entropy_of_registers(&self, names: &[&str]) -> Result<f64> {
        if names.is_empty() {
            // still validate nothing; the empty system has zero entropy
            return Ok(0.0);
        }
        self.partial_trace(names)?.entropy()
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                acc += (self.mat[(i, j)] * self.mat[(j, i)]).re;
            }
        }
        acc
    }

    /// Largest entrywise deviation from another state of the same dimension.
    pub fn max_deviation(&self, other: &Self) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch("comparing states of different dimension".into()));
        }
        Ok(self.mat.iter().zip(other.mat.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    /// `(1/2) sum |eigenvalues of (self - other)|`.
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "trace distance between dimensions {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        let diff = &self.mat - &other.mat;
        Ok(0.5 * hermitian_spectrum(&diff).iter().map(|v| v.abs()).sum::<f64>())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::PureState;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn qubit(name: &str) -> RegisterLayout {
        RegisterLayout::new([(name, 1)]).unwrap()
    }

    #[test]
    fn mixed_times_basis_is_diagonal() {
        let mixed = DensityMatrix::maximally_mixed(qubit("a"));
        let zero = PureState::zero(qubit("b")).to_density();
        let t = mixed.tensor(&zero).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| t.matrix()[(i, i)].re).collect();
        assert_eq!(diag, vec![0.5, 0.0, 0.5, 0.0]);
    }

    #[test]
    fn bell_reduces_to_mixed() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let layout = RegisterLayout::new([("a", 1), ("b", 1)]).unwrap();
        let bell = PureState::new(vec![c(s), c(0.0), c(0.0), c(s)], layout).unwrap().to_density();
        for keep in ["a", "b"] {
            let r = bell.partial_trace(&[keep]).unwrap();
            assert!(r.max_deviation(&DensityMatrix::maximally_mixed(qubit(keep))).unwrap() < 1e-15);
        }
        assert!((bell.entropy().unwrap()).abs() < 1e-12);
        assert!((bell.entropy_of_registers(&["a"]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trace_distances() {
        let zero = PureState::basis(qubit("a"), 0).unwrap().to_density();
        let one = PureState::basis(qubit("a"), 1).unwrap().to_density();
        let mixed = DensityMatrix::maximally_mixed(qubit("a"));
        assert_eq!(zero.trace_distance(&zero).unwrap(), 0.0);
        assert!((zero.trace_distance(&one).unwrap() - 1.0).abs() < 1e-15);
        assert!((zero.trace_distance(&mixed).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        let bad = CMatrix::from_row_slice(2, 2, &[c(0.5), c(0.0), c(0.0), c(0.6)]);
        assert!(matches!(DensityMatrix::new(bad, qubit("a")), Err(Error::InvalidDensity(_))));
        let ok = CMatrix::from_row_slice(2, 2, &[c(0.5), c(0.5), c(0.5), c(0.5)]);
        let rho = DensityMatrix::new(ok, qubit("a")).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-15);
    }
}

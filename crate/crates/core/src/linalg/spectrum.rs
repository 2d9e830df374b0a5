//! Hermitian spectra and entropies.
//!
//! The eigen solver is nalgebra's Hermitian tridiagonal QR. Before calling
//! it, matrices are split into the connected components of their nonzero
//! pattern, which keeps the classical-looking states produced by the
//! protocols (mostly permutations of basis vectors) cheap to diagonalize.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::layout::{complement, gather_index};
use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Eigenvalues at or below this are treated as exact zeros in entropy sums.
pub const EIGEN_ZERO: f64 = 1e-12;
/// Most negative eigenvalue accepted (and clamped to zero) in a density matrix.
pub const NEGATIVE_TOLERANCE: f64 = 1e-10;
/// Tolerance for Hermiticity, trace and normalization checks.
pub const STATE_TOLERANCE: f64 = 1e-10;

// Off-diagonal magnitudes below this do not link two indices into one block.
const SPLIT_EPS: f64 = 1e-14;

pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Eigenvalues of a Hermitian matrix, sorted descending. Only the lower
/// triangle pattern is consulted for block splitting; callers are expected
/// to have checked Hermiticity.
pub fn hermitian_spectrum(m: &CMatrix) -> Vec<f64> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "spectrum of a non-square matrix");
    let mut parent: Vec<usize> = (0..n).collect();
    for j in 0..n {
        for i in (j + 1)..n {
            if m[(i, j)].norm() > SPLIT_EPS {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let root = find(&mut parent, i);
        blocks[root].push(i);
    }

    let mut eig = Vec::with_capacity(n);
    for block in blocks.into_iter().filter(|b| !b.is_empty()) {
        match block.len() {
            1 => eig.push(m[(block[0], block[0])].re),
            2 => {
                let (a, d) = (m[(block[0], block[0])].re, m[(block[1], block[1])].re);
                let b = m[(block[1], block[0])].norm();
                let mid = 0.5 * (a + d);
                let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
                eig.push(mid + rad);
                eig.push(mid - rad);
            }
            k => {
                let sub = CMatrix::from_fn(k, k, |i, j| m[(block[i], block[j])]);
                eig.extend(sub.symmetric_eigenvalues().iter().copied());
            }
        }
    }
    eig.sort_by(|a, b| b.total_cmp(a));
    eig
}

/// Spectrum of a density matrix: Hermiticity enforced, small negative
/// eigenvalues clamped, anything below `-NEGATIVE_TOLERANCE` rejected.
pub fn density_spectrum(m: &CMatrix) -> Result<Vec<f64>> {
    let dev = hermitian_deviation(m);
    if dev > STATE_TOLERANCE {
        return Err(Error::NonHermitian(dev));
    }
    clamp_spectrum(hermitian_spectrum(m))
}

pub(crate) fn clamp_spectrum(mut eig: Vec<f64>) -> Result<Vec<f64>> {
    for v in eig.iter_mut() {
        if *v < -NEGATIVE_TOLERANCE {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {v:e}")));
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(eig)
}

/// Shannon entropy in bits of a spectrum, `0 log 0 := 0`.
pub fn spectrum_entropy(eig: &[f64]) -> f64 {
    eig.iter()
        .filter(|&&v| v > EIGEN_ZERO)
        .map(|&v| -v * v.log2())
        .sum()
}

/// Shannon entropy in bits of a probability vector.
pub fn shannon_entropy<I: IntoIterator<Item = f64>>(probs: I) -> f64 {
    probs
        .into_iter()
        .filter(|&p| p > EIGEN_ZERO)
        .map(|p| -p * p.log2())
        .sum()
}

/// Dense reduced density matrix of a pure state on the `keep` qubits (in the
/// given order).
pub(crate) fn reduce_pure(width: usize, amps: &[Complex64], keep: &[usize]) -> CMatrix {
    let dk = 1usize << keep.len();
    let mut rho = CMatrix::zeros(dk, dk);
    let mut col = vec![Complex64::new(0.0, 0.0); dk];
    let rest = complement(width, keep);
    let koff = super::layout::scatter_offsets(width, keep);
    let roff = super::layout::scatter_offsets(width, &rest);
    for &t in &roff {
        let mut any = false;
        for (k, slot) in col.iter_mut().enumerate() {
            *slot = amps[koff[k] | t];
            any |= slot.norm_sqr() > 0.0;
        }
        if !any {
            continue;
        }
        for a in 0..dk {
            if col[a].norm_sqr() == 0.0 {
                continue;
            }
            for b in 0..dk {
                rho[(a, b)] += col[a] * col[b].conj();
            }
        }
    }
    rho
}

/// Nonzero entries of an amplitude vector.
pub(crate) fn support(amps: &[Complex64]) -> Vec<(usize, Complex64)> {
    amps.iter()
        .enumerate()
        .filter(|(_, a)| a.norm_sqr() > 0.0)
        .map(|(i, &a)| (i, a))
        .collect()
}

/// Nonzero spectrum of `sum_j p_j Tr_rest |psi_j><psi_j|` restricted to the
/// `keep` qubits.
///
/// With `W = [sqrt(p_1) Psi_1 | ... | sqrt(p_N) Psi_N]`, where `Psi_j` is
/// `psi_j` reshaped to (kept x traced), the target is `W W^dag`; its nonzero
/// spectrum equals that of the Gram matrix `W^dag W`. Whichever side touches
/// fewer distinct indices is accumulated from the nonzero amplitudes only.
///
/// Members are given by their support, `(basis index, amplitude)` pairs.
pub(crate) fn mixture_spectrum(width: usize, members: &[(f64, &[(usize, Complex64)])], keep: &[usize]) -> Vec<f64> {
    let rest = complement(width, keep);
    let dr = 1usize << rest.len();

    // (row k, column j * dr + t, sqrt(p_j) * amplitude)
    let mut entries: Vec<(usize, usize, Complex64)> = Vec::new();
    for (j, &(p, amps)) in members.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        let s = p.sqrt();
        for &(full, a) in amps {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            let k = gather_index(full, width, keep);
            let t = gather_index(full, width, &rest);
            entries.push((k, j * dr + t, a * s));
        }
    }
    if entries.is_empty() {
        return Vec::new();
    }

    let mut rows: Vec<usize> = entries.iter().map(|e| e.0).collect();
    let mut cols: Vec<usize> = entries.iter().map(|e| e.1).collect();
    rows.sort_unstable();
    rows.dedup();
    cols.sort_unstable();
    cols.dedup();

    // Accumulate M[a, b] += u_a conj(u_b) within each group.
    let gram = cols.len() < rows.len();
    let index_space = if gram { &cols } else { &rows };
    let m = index_space.len();
    let compact = |i: usize| index_space.binary_search(&i).expect("index collected above");

    // (group, compact index, value)
    let mut grouped: Vec<(usize, usize, Complex64)> = entries
        .iter()
        .map(|&(k, c, v)| if gram { (k, compact(c), v.conj()) } else { (c, compact(k), v) })
        .collect();
    grouped.sort_unstable_by_key(|e| (e.0, e.1));

    let mut mat = CMatrix::zeros(m, m);
    let mut start = 0;
    while start < grouped.len() {
        let g = grouped[start].0;
        let mut end = start;
        while end < grouped.len() && grouped[end].0 == g {
            end += 1;
        }
        let run = &grouped[start..end];
        for x in run {
            for y in run {
                if y.1 >= x.1 {
                    mat[(x.1, y.1)] += x.2 * y.2.conj();
                }
            }
        }
        start = end;
    }
    for a in 0..m {
        for b in (a + 1)..m {
            mat[(b, a)] = mat[(a, b)].conj();
        }
    }
    hermitian_spectrum(&mat)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn block_split_matches_full_solver() {
        // two blocks {0, 2} and {1, 3} plus coupling inside each
        let m = CMatrix::from_row_slice(
            4,
            4,
            &[
                c(0.4, 0.0), c(0.0, 0.0), c(0.1, 0.05), c(0.0, 0.0),
                c(0.0, 0.0), c(0.3, 0.0), c(0.0, 0.0), c(0.02, -0.1),
                c(0.1, -0.05), c(0.0, 0.0), c(0.2, 0.0), c(0.0, 0.0),
                c(0.0, 0.0), c(0.02, 0.1), c(0.0, 0.0), c(0.1, 0.0),
            ],
        );
        let mut full: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
        full.sort_by(|a, b| b.total_cmp(a));
        let split = hermitian_spectrum(&m);
        for (a, b) in full.iter().zip(&split) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_non_hermitian_and_negative() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.0), c(0.2, 0.0), c(0.5, 0.0)]);
        assert!(matches!(density_spectrum(&m), Err(Error::NonHermitian(_))));
        let m = CMatrix::from_row_slice(2, 2, &[c(1.2, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.2, 0.0)]);
        assert!(matches!(density_spectrum(&m), Err(Error::InvalidDensity(_))));
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1e-11, 0.0)]);
        assert_eq!(density_spectrum(&m).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn entropy_of_simple_spectra() {
        assert_eq!(spectrum_entropy(&[1.0, 0.0]), 0.0);
        assert!((spectrum_entropy(&[0.5, 0.5]) - 1.0).abs() < 1e-15);
        assert!((shannon_entropy([0.25; 4]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn gram_route_matches_direct_reduction() {
        // Bell pair mixed with |01>, reduced on the first qubit, both routes
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = [c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)];
        let basis = [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let bell_sparse = support(&bell);
        let basis_sparse = support(&basis);
        let members: Vec<(f64, &[(usize, Complex64)])> = vec![(0.25, &bell_sparse), (0.75, &basis_sparse)];
        let keep_first = mixture_spectrum(2, &members, &[0]);
        let mut rho = reduce_pure(2, &bell, &[0]) * c(0.25, 0.0);
        rho += reduce_pure(2, &basis, &[0]) * c(0.75, 0.0);
        let direct = hermitian_spectrum(&rho);
        assert!((spectrum_entropy(&keep_first) - spectrum_entropy(&direct)).abs() < 1e-14);
        let whole = mixture_spectrum(2, &members, &[0, 1]);
        assert!((spectrum_entropy(&whole) - shannon_entropy([0.25, 0.75])).abs() < 1e-14);
    }
}

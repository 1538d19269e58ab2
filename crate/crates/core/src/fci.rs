//! Exact ground states inside a fixed (Nα, Nβ) sector.

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::PauliSum;
use crate::state::{SparseOperator, Statevector};

const SYMMETRY_TOL: f64 = 1e-10;
const MAX_SECTOR_DIM: usize = 5000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorBasis {
    pub n_qubits: usize,
    pub n_alpha: usize,
    pub n_beta: usize,
    /// Ascending basis indices.
    pub states: Vec<u64>,
}

impl SectorBasis {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

const ALPHA_MASK: u64 = 0x5555_5555_5555_5555;

/// All determinants with `n_alpha` even bits and `n_beta` odd bits set.
pub fn sector_basis(n_qubits: usize, n_alpha: usize, n_beta: usize) -> Result<SectorBasis> {
    if n_qubits % 2 != 0 || n_qubits > 32 {
        return Err(Error::Contract(format!(
            "sector basis needs an even qubit count up to 32, got {n_qubits}"
        )));
    }
    let n_spatial = n_qubits / 2;
    if n_alpha > n_spatial || n_beta > n_spatial {
        return Err(Error::Contract(format!(
            "({n_alpha}, {n_beta}) electrons do not fit {n_spatial} spatial orbitals"
        )));
    }
    let states = (0..1u64 << n_qubits)
        .filter(|s| {
            (s & ALPHA_MASK).count_ones() as usize == n_alpha && (s & !ALPHA_MASK).count_ones() as usize == n_beta
        })
        .collect();
    Ok(SectorBasis {
        n_qubits,
        n_alpha,
        n_beta,
        states,
    })
}

#[derive(Debug, Clone)]
pub struct FciResult {
    pub energy: f64,
    /// Ground state embedded in the full space.
    pub state: Statevector,
}

/// Lowest eigenvalue of `h` restricted to `basis`.
///
/// Fails with a contract error when `h` couples a sector state to anything
/// outside the sector by more than 1e-10.
pub fn fci_ground_energy(h: &PauliSum, basis: &SectorBasis) -> Result<FciResult> {
    if h.n_qubits() != basis.n_qubits {
        return Err(Error::SizeMismatch {
            expected: basis.n_qubits,
            found: h.n_qubits(),
        });
    }
    if basis.is_empty() {
        return Err(Error::Contract("empty sector".into()));
    }
    if basis.len() > MAX_SECTOR_DIM {
        return Err(Error::Contract(format!(
            "sector dimension {} exceeds the dense limit {MAX_SECTOR_DIM}",
            basis.len()
        )));
    }
    if !h.is_hermitian(1e-12) {
        return Err(Error::Contract("Hamiltonian is not Hermitian".into()));
    }
    let op = SparseOperator::from_pauli_sum(h);
    let position: HashMap<u64, usize> = basis.states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let dim = basis.len();
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for (i, &s) in basis.states.iter().enumerate() {
        for (c, v) in op.row(s as usize) {
            match position.get(&(c as u64)) {
                Some(&j) => m[(i, j)] = v,
                None if v.norm() > SYMMETRY_TOL => {
                    return Err(Error::Contract(format!(
                        "Hamiltonian couples sector state {s:#b} to {c:#b} outside the sector (|h| = {:e})",
                        v.norm()
                    )))
                }
                None => {}
            }
        }
    }

    let real = m.iter().all(|v| v.im.abs() < 1e-14);
    let (energy, vec): (f64, Vec<Complex64>) = if real {
        let eig = SymmetricEigen::new(m.map(|v| v.re));
        let k = argmin(eig.eigenvalues.iter().copied());
        (
            eig.eigenvalues[k],
            eig.eigenvectors.column(k).iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
    } else {
        let eig = SymmetricEigen::new(m);
        let k = argmin(eig.eigenvalues.iter().copied());
        (eig.eigenvalues[k], eig.eigenvectors.column(k).iter().copied().collect())
    };
    let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << basis.n_qubits];
    for (&s, v) in basis.states.iter().zip(vec) {
        amps[s as usize] = v;
    }
    Ok(FciResult {
        energy,
        state: Statevector::from_amplitudes(basis.n_qubits, amps)?,
    })
}

fn argmin(values: impl Iterator<Item = f64>) -> usize {
    values
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, v)| if v < bv { (i, v) } else { (bi, bv) })
        .0
}

/// FCI energy at the largest bond length of a scan.
pub fn dissociation_reference(scan: &[(f64, f64)]) -> Result<f64> {
    scan.iter()
        .copied()
        .fold(None, |best: Option<(f64, f64)>, (r, e)| match best {
            Some((br, _)) if br >= r => best,
            _ => Some((r, e)),
        })
        .map(|(_, e)| e)
        .ok_or_else(|| Error::Contract("dissociation reference of an empty scan".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliString;

    #[test]
    fn sector_sizes() {
        assert_eq!(sector_basis(4, 1, 1).unwrap().len(), 4);
        assert_eq!(sector_basis(12, 3, 3).unwrap().len(), 400);
        let vac = sector_basis(6, 0, 0).unwrap();
        assert_eq!(vac.states, vec![0]);
        assert!(sector_basis(4, 3, 0).is_err());
        assert!(sector_basis(5, 1, 1).is_err());
    }

    #[test]
    fn sector_states_are_ascending() {
        let b = sector_basis(8, 2, 1).unwrap();
        assert!(b.states.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(b.len(), 6 * 4);
    }

    #[test]
    fn constant_hamiltonian() {
        let h = PauliSum::identity(4, -0.75);
        let r = fci_ground_energy(&h, &sector_basis(4, 1, 1).unwrap()).unwrap();
        assert!((r.energy + 0.75).abs() < 1e-14);
    }

    #[test]
    fn symmetry_breaking_is_rejected() {
        let mut h = PauliSum::zero(4);
        h.add_string(PauliString::from_factors(4, &[(0, 'X')], Complex64::new(0.3, 0.0)).unwrap())
            .unwrap();
        assert!(matches!(
            fci_ground_energy(&h, &sector_basis(4, 1, 1).unwrap()),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn dissociation_reference_takes_largest_r() {
        assert_eq!(dissociation_reference(&[(1.0, -1.0)]).unwrap(), -1.0);
        assert_eq!(dissociation_reference(&[(3.0, -0.9), (0.7, -1.1), (2.0, -1.0)]).unwrap(), -0.9);
        assert!(dissociation_reference(&[]).is_err());
    }
}

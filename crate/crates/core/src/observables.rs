//! Hamiltonians for the benchmark problems.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::statevector::{Complex, Pauli, PauliString, PauliSum, StateVector};

/// `σx` on one qubit.
pub fn hamiltonian_ex1() -> PauliSum {
    PauliSum::new(1, vec![PauliString::single(1, 0, Pauli::X, 1.0)]).expect("valid single-qubit term")
}

/// Two-qubit H₂ reduction `α(ZI + IZ) + β XX`.
pub fn hamiltonian_h2(alpha: f64, beta: f64) -> PauliSum {
    PauliSum::new(
        2,
        vec![
            PauliString::single(2, 0, Pauli::Z, alpha),
            PauliString::single(2, 1, Pauli::Z, alpha),
            PauliString::new(vec![Pauli::X, Pauli::X], beta),
        ],
    )
    .expect("valid two-qubit terms")
}

/// Spectrum of [`hamiltonian_h2`], ascending: `−√(4α²+β²), −|β|, |β|, √(4α²+β²)`.
pub fn h2_spectrum(alpha: f64, beta: f64) -> [f64; 4] {
    let r = libm::sqrt(4.0 * alpha * alpha + beta * beta);
    let mut e = [-r, -beta, beta, r];
    e.sort_by(|a, b| a.total_cmp(b));
    e
}

pub fn h2_ground_energy(alpha: f64, beta: f64) -> f64 {
    -libm::sqrt(4.0 * alpha * alpha + beta * beta)
}

/// Normalized ground state `∝ −β|00⟩ + (2α + √(4α²+β²))|11⟩`.
pub fn h2_ground_state(alpha: f64, beta: f64) -> Result<StateVector> {
    let r = libm::sqrt(4.0 * alpha * alpha + beta * beta);
    if !(r > 0.0) {
        return Err(Error::InvalidArgument("H2 ground state is degenerate at alpha = beta = 0"));
    }
    // For α < 0, β → 0 the printed form vanishes; the second eigen-equation
    // row gives the same ray.
    let (a00, a11) = if 2.0 * alpha + r >= r { (-beta, 2.0 * alpha + r) } else { (r - 2.0 * alpha, -beta) };
    let amps = vec![Complex::new(a00, 0.0), Complex::new(0.0, 0.0), Complex::new(0.0, 0.0), Complex::new(a11, 0.0)];
    StateVector::from_amplitudes(amps)?.normalized()
}

/// Open-chain transverse-field Ising model `−Σ Z_i Z_{i+1} − h Σ X_i` with J = 1.
pub fn hamiltonian_tfim(n_qubits: usize, h: f64) -> Result<PauliSum> {
    if n_qubits < 2 {
        return Err(Error::InvalidArgument("TFIM chain needs at least two sites"));
    }
    let mut terms: Vec<PauliString> = (0..n_qubits - 1)
        .map(|i| {
            let mut p = vec![Pauli::I; n_qubits];
            p[i] = Pauli::Z;
            p[i + 1] = Pauli::Z;
            PauliString::new(p, -1.0)
        })
        .collect();
    terms.extend((0..n_qubits).map(|i| PauliString::single(n_qubits, i, Pauli::X, -h)));
    PauliSum::new(n_qubits, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevector::{exact_ground_energy, expectation, fidelity, Gate};

    #[test]
    fn sigma_x_spectrum() {
        let h = hamiltonian_ex1();
        assert_eq!(exact_ground_energy(&h).unwrap().0, -1.0);
        let zero = StateVector::zero(1).unwrap();
        assert_eq!(expectation(&zero, &h).unwrap(), 0.0);
        let mut plus = zero.clone();
        plus.apply(&Gate::ry(0, core::f64::consts::FRAC_PI_2)).unwrap();
        assert!((expectation(&plus, &h).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn h2_structure_and_spectrum() {
        let h = hamiltonian_h2(0.4, 0.2);
        assert_eq!(h.terms().len(), 3);
        let s = h2_spectrum(0.4, 0.2);
        let r = libm::sqrt(0.68);
        for (a, b) in s.iter().zip([-r, -0.2, 0.2, r]) {
            assert!((a - b).abs() < 1e-15);
        }
        for (a, b) in h2_spectrum(0.3, 0.0).iter().zip([-0.6, 0.0, 0.0, 0.6]) {
            assert!((a - b).abs() < 1e-15);
        }
        let (e, _) = exact_ground_energy(&h).unwrap();
        assert!((e + r).abs() < 1e-12);
    }

    #[test]
    fn h2_ground_state_limits() {
        let psi = h2_ground_state(0.0, 0.5).unwrap();
        let a = psi.amplitudes();
        assert!((a[0].re + core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((a[3].re - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(h2_ground_state(0.0, 0.0).is_err());

        // α < 0, β = 0: ground state is |00⟩ with energy 2α
        let psi = h2_ground_state(-0.3, 0.0).unwrap();
        let e = expectation(&psi, &hamiltonian_h2(-0.3, 0.0)).unwrap();
        assert!((e + 0.6).abs() < 1e-15);
    }

    #[test]
    fn h2_ground_state_matches_eigensolver() {
        let h = hamiltonian_h2(0.4, 0.2);
        let (_, v) = exact_ground_energy(&h).unwrap();
        let psi = h2_ground_state(0.4, 0.2).unwrap();
        assert!((fidelity(&psi, &v).unwrap() - 1.0).abs() < 1e-12);
        assert!((expectation(&psi, &h).unwrap() - h2_ground_energy(0.4, 0.2)).abs() < 1e-12);
    }

    #[test]
    fn tfim_structure() {
        let h = hamiltonian_tfim(4, 10.0).unwrap();
        let zz = h.terms().iter().filter(|t| t.coefficient == -1.0).count();
        let x = h.terms().iter().filter(|t| t.coefficient == -10.0).count();
        assert_eq!((zz, x), (3, 4));
        assert!(hamiltonian_tfim(1, 1.0).is_err());
    }

    #[test]
    fn tfim_limits() {
        let (e, _) = exact_ground_energy(&hamiltonian_tfim(2, 0.0).unwrap()).unwrap();
        assert!((e + 1.0).abs() < 1e-12);
        let (e, _) = exact_ground_energy(&hamiltonian_tfim(4, 1000.0).unwrap()).unwrap();
        assert!((e / 1000.0 + 4.0).abs() < 0.04);
    }
}

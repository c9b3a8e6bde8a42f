//! Cost evaluation and gradients.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use crate::circuits::StateFamily;
use crate::error::{Error, Result};
use crate::statevector::{expectation, PauliSum};

/// `L(θ) = ⟨ψ(θ)|O|ψ(θ)⟩` over a state family.
#[derive(Clone, Debug)]
pub struct CostFunction<F> {
    family: F,
    observable: PauliSum,
}

impl<F: StateFamily> CostFunction<F> {
    pub fn new(family: F, observable: PauliSum) -> Result<Self> {
        if family.n_qubits() != observable.n_qubits() {
            return Err(Error::DimensionMismatch { expected: family.n_qubits(), actual: observable.n_qubits() });
        }
        Ok(Self { family, observable })
    }

    pub fn family(&self) -> &F {
        &self.family
    }

    pub fn observable(&self) -> &PauliSum {
        &self.observable
    }

    pub fn n_params(&self) -> usize {
        self.family.n_params()
    }

    pub fn evaluate(&self, theta: &[f64]) -> Result<f64> {
        check_len(self.n_params(), theta)?;
        expectation(&self.family.prepare(theta)?, &self.observable)
    }

    /// `∂ᵢL = ½[L(θ + π/2 eᵢ) − L(θ − π/2 eᵢ)]`.
    pub fn parameter_shift_gradient(&self, theta: &[f64]) -> Result<Vec<f64>> {
        if !self.family.shift_rule_eligible() {
            return Err(Error::NotShiftRuleEligible);
        }
        check_len(self.n_params(), theta)?;
        let mut shifted = theta.to_vec();
        (0..theta.len())
            .map(|i| {
                shifted[i] = theta[i] + FRAC_PI_2;
                let plus = self.evaluate(&shifted)?;
                shifted[i] = theta[i] - FRAC_PI_2;
                let minus = self.evaluate(&shifted)?;
                shifted[i] = theta[i];
                Ok(0.5 * (plus - minus))
            })
            .collect()
    }

    pub fn finite_difference_gradient(&self, theta: &[f64], step: f64) -> Result<Vec<f64>> {
        check_len(self.n_params(), theta)?;
        finite_difference_gradient(|t| self.evaluate(t), theta, step)
    }
}

/// Central differences of a scalar function.
pub fn finite_difference_gradient<C>(mut cost: C, theta: &[f64], step: f64) -> Result<Vec<f64>>
where
    C: FnMut(&[f64]) -> Result<f64>,
{
    if !(step > 0.0) {
        return Err(Error::InvalidArgument("finite-difference step must be positive"));
    }
    let mut shifted = theta.to_vec();
    let mut grad = Vec::with_capacity(theta.len());
    for i in 0..theta.len() {
        shifted[i] = theta[i] + step;
        let plus = cost(&shifted)?;
        shifted[i] = theta[i] - step;
        let minus = cost(&shifted)?;
        shifted[i] = theta[i];
        grad.push((plus - minus) / (2.0 * step));
    }
    Ok(grad)
}

fn check_len(expected: usize, theta: &[f64]) -> Result<()> {
    if theta.len() != expected {
        return Err(Error::DimensionMismatch { expected, actual: theta.len() });
    }
    Ok(())
}

/// `sin 2θ₀ cos 2θ₁`.
pub fn analytic_cost_ex1(theta: &[f64; 2]) -> f64 {
    libm::sin(2.0 * theta[0]) * libm::cos(2.0 * theta[1])
}

pub fn analytic_gradient_ex1(theta: &[f64; 2]) -> [f64; 2] {
    let (s0, c0) = libm::sincos(2.0 * theta[0]);
    let (s1, c1) = libm::sincos(2.0 * theta[1]);
    [2.0 * c0 * c1, -2.0 * s0 * s1]
}

/// Closed-form H₂ energy of the expanded two-qubit ansatz.
pub fn analytic_cost_ex2(theta: &[f64; 3], alpha: f64, beta: f64) -> f64 {
    let (s0, c0) = libm::sincos(theta[0]);
    let (s1, c1) = libm::sincos(theta[1]);
    let (s2, c2) = libm::sincos(theta[2]);
    2.0 * c0 * c0 * (-alpha * s1 * s1 * s2 * s2 + alpha * c1 * c1 + beta * s1 * c1 * s2)
        - 2.0 * s0 * s0 * c1 * (alpha * c1 * c2 * c2 + beta * s1 * s2)
        + 2.0 * s0 * c0 * c2 * (beta - 2.0 * alpha * s1 * c1 * s2)
}

pub fn analytic_gradient_ex2(theta: &[f64; 3], alpha: f64, beta: f64) -> [f64; 3] {
    let (s2t0, c2t0) = libm::sincos(2.0 * theta[0]);
    let (s2t1, c2t1) = libm::sincos(2.0 * theta[1]);
    let (s2t2, c2t2) = libm::sincos(2.0 * theta[2]);
    let (st2, ct2) = libm::sincos(theta[2]);
    let d0 = -s2t0 * (alpha + 2.0 * alpha * c2t1 + alpha * c2t2 + 2.0 * beta * s2t1 * st2)
        + c2t0 * (2.0 * beta * ct2 - alpha * s2t1 * s2t2);
    let d1 =
        c2t0 * (-2.0 * alpha * s2t1 + 2.0 * beta * c2t1 * st2) - alpha * (2.0 * s2t1 * st2 * st2 + c2t1 * s2t0 * s2t2);
    let d2 = beta * c2t0 * ct2 * s2t1 - s2t0 * (alpha * c2t2 * s2t1 + beta * st2) + alpha * (-c2t0 + c2t1) * s2t2;
    [d0, d1, d2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{Circuit, SingleQubitAnsatz};
    use crate::observables::hamiltonian_ex1;
    use crate::statevector::{GateKind, Pauli, PauliString};
    use alloc::vec;
    use core::f64::consts::{FRAC_PI_4, PI};

    #[test]
    fn ex1_cost_values() {
        let cf = CostFunction::new(SingleQubitAnsatz, hamiltonian_ex1()).unwrap();
        let e = cf.evaluate(&[PI / 12.0, PI / 12.0]).unwrap();
        assert!((e - 0.433_012_701_892_219_3).abs() < 1e-12);
        assert!((cf.evaluate(&[FRAC_PI_4, 0.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((analytic_cost_ex1(&[PI / 12.0, PI / 12.0]) - e).abs() < 1e-15);
    }

    #[test]
    fn ex1_gradient_values() {
        assert_eq!(analytic_gradient_ex1(&[0.0, 0.0]), [2.0, 0.0]);
        assert!(analytic_gradient_ex1(&[FRAC_PI_4, 0.3])[0].abs() < 1e-15);
        let g = analytic_gradient_ex1(&[FRAC_PI_4, core::f64::consts::FRAC_PI_2]);
        assert!(g[0].abs() < 1e-12 && g[1].abs() < 1e-12);
    }

    #[test]
    fn ex2_at_origin() {
        assert!((analytic_cost_ex2(&[0.0; 3], 0.4, 0.2) - 0.8).abs() < 1e-15);
        // The β term sits in the θ₀ component at the origin.
        assert_eq!(analytic_gradient_ex2(&[0.0; 3], 0.4, 0.2), [0.4, 0.0, 0.0]);
    }

    #[test]
    fn shift_rule_single_ry() {
        let mut c = Circuit::new(1, 1).unwrap();
        c.push_param(GateKind::Ry, 0, None, 0).unwrap();
        let z = PauliSum::new(1, vec![PauliString::single(1, 0, Pauli::Z, 1.0)]).unwrap();
        let cf = CostFunction::new(c, z).unwrap();
        let g = cf.parameter_shift_gradient(&[PI / 3.0]).unwrap();
        assert!((g[0] + libm::sqrt(3.0) / 2.0).abs() < 1e-10);
    }

    #[test]
    fn constant_observable_has_zero_gradient() {
        let c = crate::circuits::efficient_su2(2).unwrap();
        let cf = CostFunction::new(c, PauliSum::identity(2, 3.0).unwrap()).unwrap();
        let g = cf.parameter_shift_gradient(&[0.3; 8]).unwrap();
        assert!(g.iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn shift_rule_refuses_ineligible_family() {
        let cf = CostFunction::new(SingleQubitAnsatz, hamiltonian_ex1()).unwrap();
        assert_eq!(cf.parameter_shift_gradient(&[0.1, 0.2]), Err(Error::NotShiftRuleEligible));
    }

    #[test]
    fn finite_difference_on_linear_cost() {
        let g = finite_difference_gradient(|t| Ok(3.0 * t[0] - 2.0 * t[1] + 0.5), &[0.7, -1.1], 1e-5).unwrap();
        assert!((g[0] - 3.0).abs() < 1e-9 && (g[1] + 2.0).abs() < 1e-9);
        assert!(finite_difference_gradient(|_| Ok(0.0), &[0.0], 0.0).is_err());
    }

    #[test]
    fn finite_difference_matches_ex1_closed_form() {
        let cf = CostFunction::new(SingleQubitAnsatz, hamiltonian_ex1()).unwrap();
        let g = cf.finite_difference_gradient(&[PI / 12.0, PI / 12.0], 1e-5).unwrap();
        assert!((g[0] - 1.5).abs() < 1e-6 && (g[1] + 0.5).abs() < 1e-6);
    }
}

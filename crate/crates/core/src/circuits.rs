//! Parameterized circuits and closed-form ansatz families.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::statevector::{check_layout, Complex, Gate, GateKind, StateVector};

/// A map θ ↦ |ψ(θ)⟩.
pub trait StateFamily {
    fn n_qubits(&self) -> usize;

    fn n_params(&self) -> usize;

    fn prepare(&self, theta: &[f64]) -> Result<StateVector>;

    /// Whether the two-term ±π/2 shift rules apply parameter by parameter.
    fn shift_rule_eligible(&self) -> bool {
        false
    }
}

impl<T: StateFamily + ?Sized> StateFamily for &T {
    fn n_qubits(&self) -> usize {
        (**self).n_qubits()
    }

    fn n_params(&self) -> usize {
        (**self).n_params()
    }

    fn prepare(&self, theta: &[f64]) -> Result<StateVector> {
        (**self).prepare(theta)
    }

    fn shift_rule_eligible(&self) -> bool {
        (**self).shift_rule_eligible()
    }
}

/// Gate angle `scale · θ[param_index] + offset`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamBinding {
    pub param_index: usize,
    pub scale: f64,
    pub offset: f64,
}

impl ParamBinding {
    pub fn direct(param_index: usize) -> Self {
        Self { param_index, scale: 1.0, offset: 0.0 }
    }

    pub fn scaled(param_index: usize, scale: f64) -> Self {
        Self { param_index, scale, offset: 0.0 }
    }

    pub fn angle(&self, theta: &[f64]) -> f64 {
        self.scale * theta[self.param_index] + self.offset
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Angle {
    Fixed(f64),
    Bound(ParamBinding),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CircuitGate {
    pub kind: GateKind,
    pub target: usize,
    pub control: Option<usize>,
    pub angle: Angle,
}

impl CircuitGate {
    pub fn fixed(gate: Gate) -> Self {
        Self { kind: gate.kind, target: gate.target, control: gate.control, angle: Angle::Fixed(gate.angle) }
    }

    pub fn bound(kind: GateKind, target: usize, control: Option<usize>, binding: ParamBinding) -> Self {
        Self { kind, target, control, angle: Angle::Bound(binding) }
    }

    fn resolve(&self, theta: &[f64]) -> Gate {
        let angle = match self.angle {
            Angle::Fixed(a) => a,
            Angle::Bound(b) => b.angle(theta),
        };
        Gate { kind: self.kind, target: self.target, control: self.control, angle }
    }
}

/// Ordered gate list acting on `|0…0⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    n_params: usize,
    gates: Vec<CircuitGate>,
}

impl Circuit {
    pub fn new(n_qubits: usize, n_params: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidArgument("a circuit needs at least one qubit"));
        }
        Ok(Self { n_qubits, n_params, gates: Vec::new() })
    }

    pub fn push(&mut self, gate: CircuitGate) -> Result<&mut Self> {
        check_layout(gate.kind, gate.target, gate.control, self.n_qubits)?;
        match gate.angle {
            Angle::Fixed(a) if !a.is_finite() => return Err(Error::NonFiniteAngle),
            Angle::Bound(b) => {
                if !gate.kind.is_parameterized() {
                    return Err(Error::MalformedGate("fixed gate kinds cannot take a parameter"));
                }
                if b.param_index >= self.n_params {
                    return Err(Error::ParamOutOfRange { index: b.param_index, n_params: self.n_params });
                }
                if b.scale == 0.0 || !b.scale.is_finite() || !b.offset.is_finite() {
                    return Err(Error::InvalidArgument("binding scale must be finite and nonzero"));
                }
            }
            _ => {}
        }
        self.gates.push(gate);
        Ok(self)
    }

    pub fn push_fixed(&mut self, gate: Gate) -> Result<&mut Self> {
        self.push(CircuitGate::fixed(gate))
    }

    /// Appends a rotation driven by `θ[param_index]` with unit scale.
    pub fn push_param(
        &mut self,
        kind: GateKind,
        target: usize,
        control: Option<usize>,
        param_index: usize,
    ) -> Result<&mut Self> {
        self.push(CircuitGate::bound(kind, target, control, ParamBinding::direct(param_index)))
    }

    pub fn gates(&self) -> &[CircuitGate] {
        &self.gates
    }

    pub fn count(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind == kind).count()
    }

    /// Number of gates bound to each parameter.
    pub fn references(&self) -> Vec<usize> {
        let mut refs = vec![0usize; self.n_params];
        for g in &self.gates {
            if let Angle::Bound(b) = g.angle {
                refs[b.param_index] += 1;
            }
        }
        refs
    }

    /// Checks that every parameter drives at least one gate.
    pub fn validate(&self) -> Result<()> {
        match self.references().iter().position(|&r| r == 0) {
            Some(p) => Err(Error::UnusedParameter(p)),
            None => Ok(()),
        }
    }

    pub fn prepare_state(&self, theta: &[f64]) -> Result<StateVector> {
        if theta.len() != self.n_params {
            return Err(Error::DimensionMismatch { expected: self.n_params, actual: theta.len() });
        }
        let mut psi = StateVector::zero(self.n_qubits)?;
        for g in &self.gates {
            psi.apply(&g.resolve(theta))?;
        }
        Ok(psi)
    }

    /// True iff every parameter drives exactly one uncontrolled Pauli rotation
    /// with unit scale and zero offset.
    ///
    /// Controlled rotations are excluded: their generator has eigenvalues
    /// {0, ±1/2}, for which the two-term rule is not exact.
    pub fn shift_rule_eligible(&self) -> bool {
        let mut refs = vec![0usize; self.n_params];
        for g in &self.gates {
            if let Angle::Bound(b) = g.angle {
                let plain = matches!(g.kind, GateKind::Rx | GateKind::Ry | GateKind::Rz);
                if !plain || b.scale != 1.0 || b.offset != 0.0 {
                    return false;
                }
                refs[b.param_index] += 1;
            }
        }
        refs.iter().all(|&r| r == 1)
    }
}

impl StateFamily for Circuit {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn n_params(&self) -> usize {
        self.n_params
    }

    fn prepare(&self, theta: &[f64]) -> Result<StateVector> {
        self.prepare_state(theta)
    }

    fn shift_rule_eligible(&self) -> bool {
        Circuit::shift_rule_eligible(self)
    }
}

/// EfficientSU2 with one repetition and linear entanglement.
///
/// Layout: RY then RZ on every qubit, CX(i, i+1) for i = 0..n-2, then RY then RZ
/// on every qubit again. Parameters are numbered layer-major, qubit-minor:
/// `[RY_0..RY_{n-1}, RZ_0..RZ_{n-1}, RY'_0.., RZ'_0..]`, 4n in total.
pub fn efficient_su2(n_qubits: usize) -> Result<Circuit> {
    if n_qubits < 2 {
        return Err(Error::InvalidArgument("EfficientSU2 needs at least two qubits"));
    }
    let n = n_qubits;
    let mut c = Circuit::new(n, 4 * n)?;
    let mut p = 0;
    for kind in [GateKind::Ry, GateKind::Rz] {
        for q in 0..n {
            c.push_param(kind, q, None, p)?;
            p += 1;
        }
    }
    for q in 0..n - 1 {
        c.push_fixed(Gate::cx(q, q + 1))?;
    }
    for kind in [GateKind::Ry, GateKind::Rz] {
        for q in 0..n {
            c.push_param(kind, q, None, p)?;
            p += 1;
        }
    }
    Ok(c)
}

/// `cos θ₀|0⟩ + e^{2iθ₁} sin θ₀|1⟩`.
pub fn state_ex1(theta: &[f64]) -> Result<StateVector> {
    if theta.len() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, actual: theta.len() });
    }
    let (s0, c0) = libm::sincos(theta[0]);
    let phase = Complex::from_polar(1.0, 2.0 * theta[1]);
    StateVector::from_amplitudes(vec![Complex::new(c0, 0.0), phase * s0])
}

/// The expanded two-qubit H₂ ansatz.
///
/// Kets are written `|ab⟩` with `a` the high bit of the amplitude index, so
/// `|01⟩` is index 1 and `|10⟩` is index 2.
pub fn state_ex2(theta: &[f64]) -> Result<StateVector> {
    if theta.len() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, actual: theta.len() });
    }
    let (s0, c0) = libm::sincos(theta[0]);
    let (s1, c1) = libm::sincos(theta[1]);
    let (s2, c2) = libm::sincos(theta[2]);
    let amps = [c0 * c1, c0 * c2 * s1 - c1 * s0 * s2, s0 * s1, c1 * c2 * s0 + c0 * s1 * s2];
    StateVector::from_amplitudes(amps.iter().map(|&a| Complex::new(a, 0.0)).collect())
}

/// Closed-form single-qubit family, see [`state_ex1`].
#[derive(Clone, Copy, Debug, Default)]
pub struct SingleQubitAnsatz;

impl StateFamily for SingleQubitAnsatz {
    fn n_qubits(&self) -> usize {
        1
    }

    fn n_params(&self) -> usize {
        2
    }

    fn prepare(&self, theta: &[f64]) -> Result<StateVector> {
        state_ex1(theta)
    }
}

/// Closed-form two-qubit family, see [`state_ex2`].
#[derive(Clone, Copy, Debug, Default)]
pub struct H2Ansatz;

impl StateFamily for H2Ansatz {
    fn n_qubits(&self) -> usize {
        2
    }

    fn n_params(&self) -> usize {
        3
    }

    fn prepare(&self, theta: &[f64]) -> Result<StateVector> {
        state_ex2(theta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevector::fidelity;
    use core::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn empty_circuit_prepares_vacuum() {
        let c = Circuit::new(3, 0).unwrap();
        assert_eq!(c.prepare_state(&[]).unwrap(), StateVector::zero(3).unwrap());
    }

    #[test]
    fn single_ry_at_zero() {
        let mut c = Circuit::new(1, 1).unwrap();
        c.push_param(GateKind::Ry, 0, None, 0).unwrap();
        assert_eq!(c.prepare_state(&[0.0]).unwrap(), StateVector::zero(1).unwrap());
        assert!(c.shift_rule_eligible());
        assert_eq!(c.prepare_state(&[0.0, 1.0]), Err(Error::DimensionMismatch { expected: 1, actual: 2 }));
    }

    #[test]
    fn efficient_su2_shape() {
        for n in 2..=7 {
            let c = efficient_su2(n).unwrap();
            assert_eq!(c.n_params(), 4 * n);
            assert_eq!(c.count(GateKind::Cx), n - 1);
            assert!(c.shift_rule_eligible());
            c.validate().unwrap();
        }
        assert!(efficient_su2(1).is_err());
    }

    #[test]
    fn eligibility_rules() {
        let mut scaled = Circuit::new(2, 1).unwrap();
        scaled.push(CircuitGate::bound(GateKind::Ry, 0, None, ParamBinding::scaled(0, 2.0))).unwrap();
        assert!(!scaled.shift_rule_eligible());

        let mut shared = Circuit::new(2, 1).unwrap();
        shared.push_param(GateKind::Ry, 0, None, 0).unwrap();
        shared.push_param(GateKind::Ry, 1, None, 0).unwrap();
        assert!(!shared.shift_rule_eligible());

        let mut controlled = Circuit::new(2, 1).unwrap();
        controlled.push_param(GateKind::Cry, 1, Some(0), 0).unwrap();
        assert!(!controlled.shift_rule_eligible());

        let mut unused = Circuit::new(1, 2).unwrap();
        unused.push_param(GateKind::Rx, 0, None, 0).unwrap();
        assert_eq!(unused.validate(), Err(Error::UnusedParameter(1)));
        assert!(!unused.shift_rule_eligible());
    }

    #[test]
    fn push_rejects_bad_bindings() {
        let mut c = Circuit::new(1, 1).unwrap();
        assert!(c.push(CircuitGate::bound(GateKind::Ry, 0, None, ParamBinding::scaled(0, 0.0))).is_err());
        assert!(c.push_param(GateKind::Ry, 0, None, 3).is_err());
        assert!(c.push_param(GateKind::X, 0, None, 0).is_err());
    }

    #[test]
    fn ex1_states() {
        assert_eq!(state_ex1(&[0.0, 0.0]).unwrap(), StateVector::zero(1).unwrap());
        let one = state_ex1(&[FRAC_PI_2, 0.0]).unwrap();
        assert!((fidelity(&one, &StateVector::basis(1, 1).unwrap()).unwrap() - 1.0).abs() < 1e-15);
        let psi = state_ex1(&[PI / 12.0, PI / 12.0]).unwrap();
        let a1 = psi.amplitudes()[1];
        let expected = Complex::from_polar(libm::sin(PI / 12.0), PI / 6.0);
        assert!((psi.amplitudes()[0].re - libm::cos(PI / 12.0)).abs() < 1e-15);
        assert!((a1 - expected).norm() < 1e-15);
    }

    #[test]
    fn ex2_states() {
        assert_eq!(state_ex2(&[0.0, 0.0, 0.0]).unwrap(), StateVector::zero(2).unwrap());
        let psi = state_ex2(&[FRAC_PI_2, FRAC_PI_2, 0.0]).unwrap();
        // |10⟩ is index 2
        assert!((psi.amplitudes()[2].re - 1.0).abs() < 1e-15);
        assert!((psi.norm() - 1.0).abs() < 1e-15);
    }
}

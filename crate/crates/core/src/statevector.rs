//! Dense pure-state simulation.
//!
//! Qubit `q` is bit `q` of the amplitude index (qubit 0 is the least
//! significant bit). Rotations follow `R_P(θ) = exp(-iθP/2)`.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub type Complex = num_complex::Complex64;

/// Largest register accepted by [`exact_ground_energy`].
pub const MAX_DENSE_QUBITS: usize = 12;

const ZERO: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex>,
}

impl StateVector {
    /// The computational basis state `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits >= usize::BITS as usize - 1 {
            return Err(Error::InvalidArgument("a state needs at least one qubit"));
        }
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: index });
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Ok(Self { n_qubits, amplitudes })
    }

    /// Wraps raw amplitudes. The length must be a power of two (at least 2);
    /// normalization is the caller's responsibility.
    pub fn from_amplitudes(amplitudes: Vec<Complex>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::InvalidArgument("amplitude count must be a power of two >= 2"));
        }
        Ok(Self { n_qubits: dim.trailing_zeros() as usize, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>())
    }

    /// Rescales to unit norm. Fails on the zero vector.
    pub fn normalized(mut self) -> Result<Self> {
        let norm = self.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidArgument("cannot normalize a zero or non-finite vector"));
        }
        for a in &mut self.amplitudes {
            *a /= norm;
        }
        Ok(self)
    }

    /// Applies `gate` in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.check(self.n_qubits)?;
        match gate.kind {
            GateKind::Cx => {
                let c = 1usize << gate.control.unwrap_or_default();
                let t = 1usize << gate.target;
                for i in 0..self.amplitudes.len() {
                    if i & c != 0 && i & t == 0 {
                        self.amplitudes.swap(i, i | t);
                    }
                }
                Ok(())
            }
            _ => {
                let m = gate.kind.matrix(gate.angle);
                self.apply_single(m, gate.target, gate.control);
                Ok(())
            }
        }
    }

    fn apply_single(&mut self, m: [[Complex; 2]; 2], target: usize, control: Option<usize>) {
        let t = 1usize << target;
        let c = control.map(|c| 1usize << c);
        for i in 0..self.amplitudes.len() {
            if i & t != 0 {
                continue;
            }
            if let Some(c) = c {
                if i & c == 0 {
                    continue;
                }
            }
            let j = i | t;
            let a0 = self.amplitudes[i];
            let a1 = self.amplitudes[j];
            self.amplitudes[i] = m[0][0] * a0 + m[0][1] * a1;
            self.amplitudes[j] = m[1][0] * a0 + m[1][1] * a1;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    X,
    Cx,
    Cry,
    Crx,
}

impl GateKind {
    pub fn is_parameterized(self) -> bool {
        matches!(self, GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Cry | GateKind::Crx)
    }

    pub fn is_controlled(self) -> bool {
        matches!(self, GateKind::Cx | GateKind::Cry | GateKind::Crx)
    }

    /// Target-qubit 2×2 matrix. Ignores `angle` for fixed gates.
    fn matrix(self, angle: f64) -> [[Complex; 2]; 2] {
        let (s, c) = libm::sincos(angle / 2.0);
        match self {
            GateKind::Rx | GateKind::Crx => {
                [[Complex::new(c, 0.0), Complex::new(0.0, -s)], [Complex::new(0.0, -s), Complex::new(c, 0.0)]]
            }
            GateKind::Ry | GateKind::Cry => {
                [[Complex::new(c, 0.0), Complex::new(-s, 0.0)], [Complex::new(s, 0.0), Complex::new(c, 0.0)]]
            }
            GateKind::Rz => [[Complex::new(c, -s), ZERO], [ZERO, Complex::new(c, s)]],
            GateKind::X | GateKind::Cx => [[ZERO, ONE], [ONE, ZERO]],
        }
    }
}

impl FromStr for GateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "rx" => GateKind::Rx,
            "ry" => GateKind::Ry,
            "rz" => GateKind::Rz,
            "x" => GateKind::X,
            "cx" | "cnot" => GateKind::Cx,
            "cry" => GateKind::Cry,
            "crx" => GateKind::Crx,
            _ => return Err(Error::UnknownGate(s.to_string())),
        })
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            GateKind::Rx => "rx",
            GateKind::Ry => "ry",
            GateKind::Rz => "rz",
            GateKind::X => "x",
            GateKind::Cx => "cx",
            GateKind::Cry => "cry",
            GateKind::Crx => "crx",
        };
        f.write_str(name)
    }
}

/// A gate with a concrete angle, ready to apply.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub target: usize,
    pub control: Option<usize>,
    pub angle: f64,
}

impl Gate {
    pub fn rx(target: usize, angle: f64) -> Self {
        Self { kind: GateKind::Rx, target, control: None, angle }
    }

    pub fn ry(target: usize, angle: f64) -> Self {
        Self { kind: GateKind::Ry, target, control: None, angle }
    }

    pub fn rz(target: usize, angle: f64) -> Self {
        Self { kind: GateKind::Rz, target, control: None, angle }
    }

    pub fn x(target: usize) -> Self {
        Self { kind: GateKind::X, target, control: None, angle: 0.0 }
    }

    pub fn cx(control: usize, target: usize) -> Self {
        Self { kind: GateKind::Cx, target, control: Some(control), angle: 0.0 }
    }

    pub fn cry(control: usize, target: usize, angle: f64) -> Self {
        Self { kind: GateKind::Cry, target, control: Some(control), angle }
    }

    pub fn crx(control: usize, target: usize, angle: f64) -> Self {
        Self { kind: GateKind::Crx, target, control: Some(control), angle }
    }

    fn check(&self, n_qubits: usize) -> Result<()> {
        check_layout(self.kind, self.target, self.control, n_qubits)?;
        if !self.angle.is_finite() {
            return Err(Error::NonFiniteAngle);
        }
        Ok(())
    }
}

pub(crate) fn check_layout(kind: GateKind, target: usize, control: Option<usize>, n_qubits: usize) -> Result<()> {
    if target >= n_qubits {
        return Err(Error::QubitOutOfRange { index: target, n_qubits });
    }
    match (kind.is_controlled(), control) {
        (true, Some(c)) => {
            if c >= n_qubits {
                return Err(Error::QubitOutOfRange { index: c, n_qubits });
            }
            if c == target {
                return Err(Error::MalformedGate("control and target coincide"));
            }
        }
        (true, None) => return Err(Error::MalformedGate("controlled gate without a control")),
        (false, Some(_)) => return Err(Error::MalformedGate("uncontrolled gate with a control")),
        (false, None) => {}
    }
    Ok(())
}

pub fn apply_gate(state: &StateVector, gate: &Gate) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply(gate)?;
    Ok(out)
}

/// `⟨a|b⟩`, conjugate-linear in `a`.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<Complex> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), actual: b.dim() });
    }
    Ok(a.amplitudes.iter().zip(&b.amplitudes).map(|(x, y)| x.conj() * y).sum())
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    inner_product(a, b).map(|z| z.norm_sqr())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn from_char(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// A real-weighted tensor product of single-qubit Paulis; `paulis[q]` acts on
/// qubit `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliString {
    pub paulis: Vec<Pauli>,
    pub coefficient: f64,
}

impl PauliString {
    pub fn new(paulis: Vec<Pauli>, coefficient: f64) -> Self {
        Self { paulis, coefficient }
    }

    /// Parses a label such as `"ZZI"`; character `q` acts on qubit `q`.
    pub fn from_label(label: &str, coefficient: f64) -> Result<Self> {
        let paulis = label
            .chars()
            .map(|c| Pauli::from_char(c).ok_or(Error::InvalidArgument("pauli labels use I, X, Y, Z")))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { paulis, coefficient })
    }

    /// `coefficient · P` on qubit `qubit` of an `n_qubits` register.
    pub fn single(n_qubits: usize, qubit: usize, pauli: Pauli, coefficient: f64) -> Self {
        let mut paulis = vec![Pauli::I; n_qubits];
        paulis[qubit] = pauli;
        Self { paulis, coefficient }
    }

    pub fn n_qubits(&self) -> usize {
        self.paulis.len()
    }

    /// Bit masks `(x, z)` and the number of `Y` factors. `P|b⟩ = i^ny (-1)^{|b∧z|} |b⊕x⟩`.
    fn masks(&self) -> (usize, usize, u32) {
        let mut x = 0usize;
        let mut z = 0usize;
        let mut ny = 0u32;
        for (q, p) in self.paulis.iter().enumerate() {
            match p {
                Pauli::I => {}
                Pauli::X => x |= 1 << q,
                Pauli::Z => z |= 1 << q,
                Pauli::Y => {
                    x |= 1 << q;
                    z |= 1 << q;
                    ny += 1;
                }
            }
        }
        (x, z, ny)
    }
}

fn i_power(k: u32) -> Complex {
    match k % 4 {
        0 => ONE,
        1 => Complex::new(0.0, 1.0),
        2 => Complex::new(-1.0, 0.0),
        _ => Complex::new(0.0, -1.0),
    }
}

/// Hermitian operator as a sum of real-weighted Pauli strings on a common register.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<PauliString>,
}

impl PauliSum {
    pub fn new(n_qubits: usize, terms: Vec<PauliString>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidArgument("an observable needs at least one qubit"));
        }
        for t in &terms {
            if t.n_qubits() != n_qubits {
                return Err(Error::DimensionMismatch { expected: n_qubits, actual: t.n_qubits() });
            }
            if !t.coefficient.is_finite() {
                return Err(Error::InvalidArgument("pauli coefficients must be finite"));
            }
        }
        Ok(Self { n_qubits, terms })
    }

    pub fn identity(n_qubits: usize, coefficient: f64) -> Result<Self> {
        Self::new(n_qubits, vec![PauliString::new(vec![Pauli::I; n_qubits], coefficient)])
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    /// `self · scale`, term by term.
    pub fn scaled(&self, scale: f64) -> Self {
        let terms = self.terms.iter().map(|t| PauliString::new(t.paulis.clone(), t.coefficient * scale)).collect();
        Self { n_qubits: self.n_qubits, terms }
    }

    /// Concatenates the terms of two sums on the same register.
    pub fn plus(&self, other: &PauliSum) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.n_qubits, actual: other.n_qubits });
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self { n_qubits: self.n_qubits, terms })
    }

    /// Dense `2^n × 2^n` matrix.
    pub fn to_dense(&self) -> DMatrix<Complex> {
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::from_element(dim, dim, ZERO);
        for t in &self.terms {
            let (x, z, ny) = t.masks();
            let phase = i_power(ny) * t.coefficient;
            for b in 0..dim {
                let sign = if (b & z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                m[(b ^ x, b)] += phase * sign;
            }
        }
        m
    }
}

/// `⟨ψ|O|ψ⟩` for Hermitian `O`.
pub fn expectation(state: &StateVector, observable: &PauliSum) -> Result<f64> {
    if state.n_qubits() != observable.n_qubits() {
        return Err(Error::DimensionMismatch { expected: observable.n_qubits(), actual: state.n_qubits() });
    }
    let amps = state.amplitudes();
    let mut total = ZERO;
    for t in &observable.terms {
        let (x, z, ny) = t.masks();
        let mut acc = ZERO;
        for (b, a) in amps.iter().enumerate() {
            let v = amps[b ^ x].conj() * a;
            if (b & z).count_ones() % 2 == 0 {
                acc += v;
            } else {
                acc -= v;
            }
        }
        total += i_power(ny) * acc * t.coefficient;
    }
    if total.im.abs() > 1e-10 {
        return Err(Error::ImaginaryResidue(total.im));
    }
    Ok(total.re)
}

/// Minimum eigenvalue and a unit eigenvector of the dense matrix of `observable`.
///
/// Real-valued Hamiltonians are diagonalized directly; complex ones through the
/// real symmetric embedding `[[A, -B], [B, A]]` of `A + iB`.
pub fn exact_ground_energy(observable: &PauliSum) -> Result<(f64, StateVector)> {
    let n = observable.n_qubits();
    if n > MAX_DENSE_QUBITS {
        return Err(Error::TooManyQubits { n_qubits: n, max: MAX_DENSE_QUBITS });
    }
    let h = observable.to_dense();
    let dim = h.nrows();
    let is_real = h.iter().all(|z| z.im == 0.0);

    let amplitudes: Vec<Complex>;
    let energy;
    if is_real {
        let eig = SymmetricEigen::new(h.map(|z| z.re));
        let k = argmin(eig.eigenvalues.as_slice());
        energy = eig.eigenvalues[k];
        amplitudes = eig.eigenvectors.column(k).iter().map(|&x| Complex::new(x, 0.0)).collect();
    } else {
        let mut m = DMatrix::<f64>::zeros(2 * dim, 2 * dim);
        for r in 0..dim {
            for c in 0..dim {
                let z = h[(r, c)];
                m[(r, c)] = z.re;
                m[(r + dim, c + dim)] = z.re;
                m[(r, c + dim)] = -z.im;
                m[(r + dim, c)] = z.im;
            }
        }
        let eig = SymmetricEigen::new(m);
        let k = argmin(eig.eigenvalues.as_slice());
        energy = eig.eigenvalues[k];
        let v = eig.eigenvectors.column(k);
        amplitudes = (0..dim).map(|i| Complex::new(v[i], v[i + dim])).collect();
    }
    let ground = StateVector::from_amplitudes(amplitudes)?.normalized()?;
    Ok((energy, ground))
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

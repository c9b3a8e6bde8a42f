//! Fubini–Study metric and Christoffel symbols.
//!
//! The shift-rule estimators build everything from state fidelities
//! `F(a, b) = |⟨ψ(a)|ψ(b)⟩|²` of an eligible circuit (one `exp(-iθP/2)` rotation
//! per parameter). For such circuits
//!
//! ```text
//! g_{j₁j₂} = −⅛ [F(θ, θ+(e₁+e₂)π/2) − F(θ, θ+(e₁−e₂)π/2) − F(θ, θ+(−e₁+e₂)π/2) + F(θ, θ−(e₁+e₂)π/2)]
//! g_{jj}   = ¼ [1 − F(θ, θ+πe_j)]
//! ```
//!
//! and, for the diagonal metric, `Γⁱ_{jk} = (1/2g_ii)(δ_ij ∂_k g_ii + δ_ik ∂_j g_ii − δ_jk ∂_i g_jj)`.
//!
//! `g_jj(θ)` depends on `θ_k` through both states of the overlap, so the exact
//! derivative shifts each side in turn:
//!
//! ```text
//! ∂_k g_jj = ⅛ [−F(θ, θ+πe_j+½πe_k) + F(θ, θ+πe_j−½πe_k) − F(θ+½πe_k, θ+πe_j) + F(θ−½πe_k, θ+πe_j)]
//! ```
//!
//! [`DerivativeRule::KetShift`] keeps only the first pair. It agrees with the
//! exact value for `k = j` and for gates acting first on `|0…0⟩`, and is
//! available for comparison.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Cholesky, DVector, SymmetricEigen};

pub use nalgebra::DMatrix;

use crate::circuits::StateFamily;
use crate::error::{Error, Result};
use crate::statevector::{fidelity, inner_product, Complex, StateVector};

/// Default central-difference step for the oracles.
pub const FD_STEP: f64 = 1e-5;

/// |sin 2θ₀| below this is treated as the pole of the single-qubit Christoffels.
pub const EX1_POLE_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MetricMode {
    Full,
    Diagonal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Provenance {
    ShiftRule,
    Analytic,
    QgtOracle,
    FiniteDifference,
}

/// How [`metric_diag_derivative`] and [`christoffel_diag_shift`] differentiate
/// the diagonal metric.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum DerivativeRule {
    /// Shift the bra and the ket states (exact).
    #[default]
    Symmetric,
    /// Shift only the ket state.
    KetShift,
}

/// A (possibly regularized) metric together with where it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricBundle {
    mode: MetricMode,
    g: DMatrix<f64>,
    lambda: f64,
    provenance: Provenance,
    fidelity_evals: usize,
}

impl MetricBundle {
    pub fn new(mode: MetricMode, g: DMatrix<f64>, provenance: Provenance) -> Result<Self> {
        if !g.is_square() {
            return Err(Error::DimensionMismatch { expected: g.nrows(), actual: g.ncols() });
        }
        if mode == MetricMode::Diagonal {
            for r in 0..g.nrows() {
                for c in 0..g.ncols() {
                    if r != c && g[(r, c)] != 0.0 {
                        return Err(Error::InvalidArgument("diagonal metric has off-diagonal entries"));
                    }
                }
            }
        }
        Ok(Self { mode, g, lambda: 0.0, provenance, fidelity_evals: 0 })
    }

    pub fn from_diagonal(diagonal: &[f64], provenance: Provenance) -> Self {
        let g = DMatrix::from_diagonal(&DVector::from_column_slice(diagonal));
        Self { mode: MetricMode::Diagonal, g, lambda: 0.0, provenance, fidelity_evals: 0 }
    }

    fn with_evals(mut self, evals: usize) -> Self {
        self.fidelity_evals = evals;
        self
    }

    pub fn mode(&self) -> MetricMode {
        self.mode
    }

    /// `g + λI` (λ as recorded by [`regularize`]).
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Fidelity evaluations spent building this metric.
    pub fn fidelity_evals(&self) -> usize {
        self.fidelity_evals
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn diagonal_entry(&self, i: usize) -> f64 {
        self.g[(i, i)]
    }

    /// Drops the off-diagonal entries.
    pub fn to_diagonal(&self) -> Self {
        let mut out = Self::from_diagonal(self.g.diagonal().as_slice(), self.provenance);
        out.lambda = self.lambda;
        out.fidelity_evals = self.fidelity_evals;
        out
    }

    pub fn regularize(&self, lambda: f64) -> Result<Self> {
        regularize(self, lambda)
    }

    /// Solves `g v = rhs` by Cholesky factorization.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: rhs.len() });
        }
        let chol = Cholesky::new(self.g.clone()).ok_or(Error::NotPositiveDefinite)?;
        let v = chol.solve(&DVector::from_column_slice(rhs));
        Ok(v.as_slice().to_vec())
    }

    pub fn inverse(&self) -> Result<DMatrix<f64>> {
        Cholesky::new(self.g.clone()).map(|c| c.inverse()).ok_or(Error::NotPositiveDefinite)
    }

    /// Ascending eigenvalues of the symmetrized matrix.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let sym = (&self.g + self.g.transpose()) * 0.5;
        let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn symmetry_error(&self) -> f64 {
        (&self.g - self.g.transpose()).amax()
    }
}

/// `g ← g + λI`, accumulating λ on the bundle.
pub fn regularize(bundle: &MetricBundle, lambda: f64) -> Result<MetricBundle> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument("regularization constant must be finite and >= 0"));
    }
    let mut out = bundle.clone();
    for i in 0..out.dim() {
        out.g[(i, i)] += lambda;
    }
    out.lambda += lambda;
    Ok(out)
}

/// `Γⁱ_{jk}` stored as a dense `l × l × l` array.
#[derive(Clone, Debug, PartialEq)]
pub struct ChristoffelTensor {
    dim: usize,
    data: Vec<f64>,
    fidelity_evals: usize,
}

impl ChristoffelTensor {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * dim * dim], fidelity_evals: 0 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn fidelity_evals(&self) -> usize {
        self.fidelity_evals
    }

    /// Overrides the recorded evaluation count.
    pub fn with_fidelity_evals(mut self, evals: usize) -> Self {
        self.fidelity_evals = evals;
        self
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dim + j) * self.dim + k
    }

    /// `Γⁱ_{jk}`.
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.idx(i, j, k)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, value: f64) {
        let n = self.idx(i, j, k);
        self.data[n] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// `Γ[v, v]ⁱ = Σ_{l,m} Γⁱ_{lm} vˡ vᵐ`.
    pub fn contract(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: v.len() });
        }
        Ok((0..self.dim)
            .map(|i| {
                let mut acc = 0.0;
                for l in 0..self.dim {
                    for m in 0..self.dim {
                        acc += self.get(i, l, m) * v[l] * v[m];
                    }
                }
                acc
            })
            .collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `max |Γⁱ_{jk} − Γⁱ_{kj}|`.
    pub fn lower_symmetry_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                for k in 0..j {
                    worst = worst.max((self.get(i, j, k) - self.get(i, k, j)).abs());
                }
            }
        }
        worst
    }

    pub fn max_difference(&self, other: &ChristoffelTensor) -> f64 {
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Shifted-state preparation and fidelity bookkeeping around a base point.
struct ShiftEval<'a, F: ?Sized> {
    family: &'a F,
    theta: &'a [f64],
    base: StateVector,
    evals: usize,
}

impl<'a, F: StateFamily + ?Sized> ShiftEval<'a, F> {
    fn new(family: &'a F, theta: &'a [f64]) -> Result<Self> {
        if !family.shift_rule_eligible() {
            return Err(Error::NotShiftRuleEligible);
        }
        if theta.len() != family.n_params() {
            return Err(Error::DimensionMismatch { expected: family.n_params(), actual: theta.len() });
        }
        let base = family.prepare(theta)?;
        Ok(Self { family, theta, base, evals: 0 })
    }

    fn state(&self, shifts: &[(usize, f64)]) -> Result<StateVector> {
        let mut t = self.theta.to_vec();
        for &(p, s) in shifts {
            t[p] += s;
        }
        self.family.prepare(&t)
    }

    fn fid(&mut self, a: &StateVector, b: &StateVector) -> Result<f64> {
        self.evals += 1;
        fidelity(a, b)
    }

    fn fid_base(&mut self, b: &StateVector) -> Result<f64> {
        self.evals += 1;
        fidelity(&self.base, b)
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.theta.len() {
            return Err(Error::ParamOutOfRange { index: i, n_params: self.theta.len() });
        }
        Ok(())
    }
}

/// Full metric from four fidelities per entry (upper triangle, mirrored).
pub fn fs_metric_full<F: StateFamily + ?Sized>(family: &F, theta: &[f64]) -> Result<MetricBundle> {
    let mut ev = ShiftEval::new(family, theta)?;
    let l = theta.len();
    let h = FRAC_PI_2;
    let mut g = DMatrix::zeros(l, l);
    for a in 0..l {
        for b in a..l {
            let pp = ev.state(&[(a, h), (b, h)])?;
            let pm = ev.state(&[(a, h), (b, -h)])?;
            let mp = ev.state(&[(a, -h), (b, h)])?;
            let mm = ev.state(&[(a, -h), (b, -h)])?;
            let value = -0.125 * (ev.fid_base(&pp)? - ev.fid_base(&pm)? - ev.fid_base(&mp)? + ev.fid_base(&mm)?);
            g[(a, b)] = value;
            g[(b, a)] = value;
        }
    }
    let evals = ev.evals;
    Ok(MetricBundle::new(MetricMode::Full, g, Provenance::ShiftRule)?.with_evals(evals))
}

/// Diagonal metric from one fidelity per parameter.
pub fn fs_metric_diag<F: StateFamily + ?Sized>(family: &F, theta: &[f64]) -> Result<MetricBundle> {
    let mut ev = ShiftEval::new(family, theta)?;
    let diag = (0..theta.len())
        .map(|j| {
            let shifted = ev.state(&[(j, PI)])?;
            Ok(0.25 * (1.0 - ev.fid_base(&shifted)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MetricBundle::from_diagonal(&diag, Provenance::ShiftRule).with_evals(ev.evals))
}

/// Lazily prepared shifted states and the `8 ∂_b g_aa` combinations built from them.
struct DiagDerivatives<'f, F: ?Sized> {
    ev: ShiftEval<'f, F>,
    rule: DerivativeRule,
    pi_states: Vec<Option<StateVector>>,
    half_states: Vec<Option<[StateVector; 2]>>,
    terms: Vec<Option<f64>>,
}

impl<'f, F: StateFamily + ?Sized> DiagDerivatives<'f, F> {
    fn new(ev: ShiftEval<'f, F>, rule: DerivativeRule) -> Self {
        let l = ev.theta.len();
        Self { ev, rule, pi_states: vec![None; l], half_states: vec![None; l], terms: vec![None; l * l] }
    }

    fn pi_state(&mut self, a: usize) -> Result<StateVector> {
        if self.pi_states[a].is_none() {
            self.pi_states[a] = Some(self.ev.state(&[(a, PI)])?);
        }
        Ok(self.pi_states[a].clone().expect("just filled"))
    }

    fn half_state(&mut self, b: usize) -> Result<[StateVector; 2]> {
        if self.half_states[b].is_none() {
            let plus = self.ev.state(&[(b, FRAC_PI_2)])?;
            let minus = self.ev.state(&[(b, -FRAC_PI_2)])?;
            self.half_states[b] = Some([plus, minus]);
        }
        Ok(self.half_states[b].clone().expect("just filled"))
    }

    /// `8 ∂_b g_aa`.
    fn term(&mut self, a: usize, b: usize) -> Result<f64> {
        let l = self.ev.theta.len();
        if let Some(t) = self.terms[a * l + b] {
            return Ok(t);
        }
        let up = self.ev.state(&[(a, PI), (b, FRAC_PI_2)])?;
        let down = self.ev.state(&[(a, PI), (b, -FRAC_PI_2)])?;
        let mut t = -self.ev.fid_base(&up)? + self.ev.fid_base(&down)?;
        if self.rule == DerivativeRule::Symmetric {
            let pi = self.pi_state(a)?;
            let [plus, minus] = self.half_state(b)?;
            t += -self.ev.fid(&plus, &pi)? + self.ev.fid(&minus, &pi)?;
        }
        self.terms[a * l + b] = Some(t);
        Ok(t)
    }
}

/// `∂_k g_jj` by the parameter-shift rule.
pub fn metric_diag_derivative<F: StateFamily + ?Sized>(
    family: &F,
    theta: &[f64],
    j: usize,
    k: usize,
    rule: DerivativeRule,
) -> Result<f64> {
    let ev = ShiftEval::new(family, theta)?;
    ev.check_index(j)?;
    ev.check_index(k)?;
    let mut d = DiagDerivatives::new(ev, rule);
    Ok(d.term(j, k)? / 8.0)
}

/// Christoffel symbols of the diagonal metric straight from shifted fidelities.
///
/// Each entry is `[δ_ij T(i,k) + δ_ik T(i,j) − δ_jk T(j,i)] / (16 max(g_ii, floor))`
/// with `T(a,b) = 8 ∂_b g_aa` evaluated from fidelities; entries with three
/// distinct indices are zero. `T` is cached, so each of the `l²` combinations is
/// measured once.
pub fn christoffel_diag_shift<F: StateFamily + ?Sized>(
    family: &F,
    theta: &[f64],
    g_diag: &MetricBundle,
    floor: f64,
    rule: DerivativeRule,
) -> Result<ChristoffelTensor> {
    if g_diag.mode() != MetricMode::Diagonal {
        return Err(Error::InvalidArgument("Christoffel shift rule needs a diagonal metric"));
    }
    if !(floor > 0.0) || !floor.is_finite() {
        return Err(Error::InvalidArgument("Christoffel floor must be positive"));
    }
    let ev = ShiftEval::new(family, theta)?;
    let l = theta.len();
    if g_diag.dim() != l {
        return Err(Error::DimensionMismatch { expected: l, actual: g_diag.dim() });
    }
    let mut d = DiagDerivatives::new(ev, rule);
    let mut gamma = ChristoffelTensor::zeros(l);
    for i in 0..l {
        let denom = 16.0 * g_diag.diagonal_entry(i).max(floor);
        for j in 0..l {
            for k in 0..l {
                if i != j && i != k && j != k {
                    continue;
                }
                let mut acc = 0.0;
                if i == j {
                    acc += d.term(i, k)?;
                }
                if i == k {
                    acc += d.term(i, j)?;
                }
                if j == k {
                    acc -= d.term(j, i)?;
                }
                gamma.set(i, j, k, acc / denom);
            }
        }
    }
    gamma.fidelity_evals = d.ev.evals;
    Ok(gamma)
}

/// Diagonal-metric Christoffels from a table of derivatives,
/// `derivatives[(a, b)] = ∂_b g_aa`.
pub fn christoffel_from_diag_derivatives(
    g_diag: &MetricBundle,
    derivatives: &DMatrix<f64>,
    floor: f64,
) -> Result<ChristoffelTensor> {
    let l = g_diag.dim();
    if derivatives.nrows() != l || derivatives.ncols() != l {
        return Err(Error::DimensionMismatch { expected: l, actual: derivatives.nrows() });
    }
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let mut gamma = ChristoffelTensor::zeros(l);
    for i in 0..l {
        let half_inv = 0.5 / g_diag.diagonal_entry(i).max(floor);
        for j in 0..l {
            for k in 0..l {
                let v = delta(i, j) * derivatives[(i, k)] + delta(i, k) * derivatives[(i, j)]
                    - delta(j, k) * derivatives[(j, i)];
                gamma.set(i, j, k, half_inv * v);
            }
        }
    }
    Ok(gamma)
}

/// Christoffels of the second kind by central differences of a metric field.
///
/// `Γⁱ_{jk} = ½ gⁱˡ (∂_j g_{lk} + ∂_k g_{lj} − ∂_l g_{jk})`, with `g` as returned
/// by `metric_fn` (regularize inside `metric_fn` when the raw metric is singular).
pub fn christoffel_from_metric_fd<M>(mut metric_fn: M, theta: &[f64], step: f64) -> Result<ChristoffelTensor>
where
    M: FnMut(&[f64]) -> Result<MetricBundle>,
{
    if !(step > 0.0) {
        return Err(Error::InvalidArgument("finite-difference step must be positive"));
    }
    let n = theta.len();
    let center = metric_fn(theta)?;
    if center.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: center.dim() });
    }
    let inv = center.inverse()?;
    let mut shifted = theta.to_vec();
    let mut dg = Vec::with_capacity(n);
    for p in 0..n {
        shifted[p] = theta[p] + step;
        let plus = metric_fn(&shifted)?;
        shifted[p] = theta[p] - step;
        let minus = metric_fn(&shifted)?;
        shifted[p] = theta[p];
        dg.push((plus.matrix() - minus.matrix()) / (2.0 * step));
    }
    let mut gamma = ChristoffelTensor::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut acc = 0.0;
                for l in 0..n {
                    acc += inv[(i, l)] * (dg[j][(l, k)] + dg[k][(l, j)] - dg[l][(j, k)]);
                }
                gamma.set(i, j, k, 0.5 * acc);
            }
        }
    }
    Ok(gamma)
}

/// `Re⟨∂ᵢψ|∂ⱼψ⟩ − Re(⟨∂ᵢψ|ψ⟩⟨ψ|∂ⱼψ⟩)` with state derivatives by central differences.
pub fn qgt_metric_oracle<S>(mut state_fn: S, theta: &[f64], step: f64) -> Result<MetricBundle>
where
    S: FnMut(&[f64]) -> Result<StateVector>,
{
    if !(step > 0.0) {
        return Err(Error::InvalidArgument("finite-difference step must be positive"));
    }
    let n = theta.len();
    let psi = state_fn(theta)?;
    let mut shifted = theta.to_vec();
    let mut derivs: Vec<StateVector> = Vec::with_capacity(n);
    for p in 0..n {
        shifted[p] = theta[p] + step;
        let plus = state_fn(&shifted)?;
        shifted[p] = theta[p] - step;
        let minus = state_fn(&shifted)?;
        shifted[p] = theta[p];
        let amps: Vec<Complex> =
            plus.amplitudes().iter().zip(minus.amplitudes()).map(|(a, b)| (a - b) / (2.0 * step)).collect();
        derivs.push(StateVector::from_amplitudes(amps)?);
    }
    let berry: Vec<Complex> = derivs.iter().map(|d| inner_product(d, &psi)).collect::<Result<_>>()?;
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let q = inner_product(&derivs[i], &derivs[j])? - berry[i] * berry[j].conj();
            g[(i, j)] = q.re;
        }
    }
    let g = (&g + g.transpose()) * 0.5;
    MetricBundle::new(MetricMode::Full, g, Provenance::QgtOracle)
}

/// `diag(1, sin² 2θ₀)`.
pub fn analytic_metric_ex1(theta: &[f64; 2]) -> MetricBundle {
    let s = libm::sin(2.0 * theta[0]);
    MetricBundle::from_diagonal(&[1.0, s * s], Provenance::Analytic)
}

/// `Γ⁰₁₁ = −2 sin2θ₀ cos2θ₀`, `Γ¹₀₁ = Γ¹₁₀ = 2 cos2θ₀ / sin2θ₀`.
pub fn analytic_christoffel_ex1(theta: &[f64; 2]) -> Result<ChristoffelTensor> {
    let (s, c) = libm::sincos(2.0 * theta[0]);
    if s.abs() < EX1_POLE_EPS {
        return Err(Error::SingularPoint("sin 2θ₀ = 0 is a pole of Γ¹₀₁"));
    }
    let mut gamma = ChristoffelTensor::zeros(2);
    gamma.set(0, 1, 1, -2.0 * s * c);
    gamma.set(1, 0, 1, 2.0 * c / s);
    gamma.set(1, 1, 0, 2.0 * c / s);
    Ok(gamma)
}

/// Fubini–Study metric of the expanded two-qubit H₂ ansatz.
pub fn analytic_metric_ex2(theta: &[f64; 3]) -> MetricBundle {
    let (s0, c0) = libm::sincos(theta[0]);
    let (s1, c1) = libm::sincos(theta[1]);
    let g02 = c1 * s1;
    let g12 = -c0 * s0;
    let g22 = 0.5 * (1.0 - libm::cos(2.0 * theta[0]) * libm::cos(2.0 * theta[1]));
    let g = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, g02, 0.0, 1.0, g12, g02, g12, g22]);
    MetricBundle::new(MetricMode::Full, g, Provenance::Analytic).expect("3x3 is square")
}

/// Closed-form `(g + λI)⁻¹` for [`analytic_metric_ex2`].
pub fn analytic_inverse_metric_ex2(theta: &[f64; 3], lambda: f64) -> Result<DMatrix<f64>> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument("closed-form inverse needs lambda > 0"));
    }
    let (t0, t1) = (theta[0], theta[1]);
    let (s0, c0) = libm::sincos(t0);
    let (s1, c1) = libm::sincos(t1);
    let c2t0 = libm::cos(2.0 * t0);
    let c2t1 = libm::cos(2.0 * t1);
    let l = lambda;
    let d = 2.0 + 4.0 * l * (3.0 + 2.0 * l) + libm::cos(4.0 * t0) - 4.0 * (1.0 + l) * c2t0 * c2t1 + libm::cos(4.0 * t1);
    let m00 = (3.0 + 4.0 * l * (3.0 + 2.0 * l) + libm::cos(4.0 * t0) - 4.0 * (1.0 + l) * c2t0 * c2t1) / ((1.0 + l) * d);
    let m01 = -8.0 * c0 * c1 * s0 * s1 / ((1.0 + l) * d);
    let m02 = -4.0 * libm::sin(2.0 * t1) / d;
    let s2t0 = libm::sin(2.0 * t0);
    let m11 = (1.0 + 2.0 * s2t0 * s2t0 / d) / (1.0 + l);
    let m12 = 8.0 * c0 * s0 / d;
    let m22 = 8.0 * (1.0 + l) / d;
    Ok(DMatrix::from_row_slice(3, 3, &[m00, m01, m02, m01, m11, m12, m02, m12, m22]))
}

/// Pulls geometry computed in bound-angle coordinates `a = S θ` back to θ.
pub fn rescale_geometry(
    grad: &[f64],
    metric: &MetricBundle,
    gamma: &ChristoffelTensor,
    scales: &[f64],
) -> Result<(Vec<f64>, MetricBundle, ChristoffelTensor)> {
    let n = scales.len();
    if grad.len() != n || metric.dim() != n || gamma.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: grad.len().max(metric.dim()) });
    }
    if scales.iter().any(|&s| s == 0.0 || !s.is_finite()) {
        return Err(Error::InvalidArgument("rescaling factors must be finite and nonzero"));
    }
    let grad_out = grad.iter().zip(scales).map(|(g, s)| g * s).collect();
    let mut m = metric.clone();
    for i in 0..n {
        for j in 0..n {
            m.g[(i, j)] *= scales[i] * scales[j];
        }
    }
    let mut out = gamma.clone();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out.set(i, j, k, gamma.get(i, j, k) * scales[j] * scales[k] / scales[i]);
            }
        }
    }
    Ok((grad_out, m, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{efficient_su2, state_ex1, Circuit};
    use crate::statevector::GateKind;
    use core::f64::consts::FRAC_PI_4;

    fn ry_circuit() -> Circuit {
        let mut c = Circuit::new(1, 1).unwrap();
        c.push_param(GateKind::Ry, 0, None, 0).unwrap();
        c
    }

    #[test]
    fn single_ry_metric_is_quarter() {
        let c = ry_circuit();
        for t in [-2.0, 0.0, 0.4, 1.9] {
            let full = fs_metric_full(&c, &[t]).unwrap();
            let diag = fs_metric_diag(&c, &[t]).unwrap();
            assert!((full.matrix()[(0, 0)] - 0.25).abs() < 1e-15);
            assert!((diag.matrix()[(0, 0)] - 0.25).abs() < 1e-15);
            assert!(metric_diag_derivative(&c, &[t], 0, 0, DerivativeRule::Symmetric).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn empty_parameter_set_gives_empty_metric() {
        let c = Circuit::new(2, 0).unwrap();
        let m = fs_metric_full(&c, &[]).unwrap();
        assert_eq!(m.dim(), 0);
        assert_eq!(m.fidelity_evals(), 0);
    }

    #[test]
    fn shift_rule_requires_eligibility() {
        let mut c = Circuit::new(1, 1).unwrap();
        c.push(crate::circuits::CircuitGate::bound(
            GateKind::Ry,
            0,
            None,
            crate::circuits::ParamBinding::scaled(0, 2.0),
        ))
        .unwrap();
        assert_eq!(fs_metric_diag(&c, &[0.1]), Err(Error::NotShiftRuleEligible));
        assert_eq!(fs_metric_full(&c, &[0.1]), Err(Error::NotShiftRuleEligible));
        let c = efficient_su2(2).unwrap();
        assert!(matches!(fs_metric_full(&c, &[0.0; 3]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(
            metric_diag_derivative(&c, &[0.0; 8], 8, 0, DerivativeRule::Symmetric),
            Err(Error::ParamOutOfRange { .. })
        ));
    }

    #[test]
    fn regularize_shifts_diagonal() {
        let m = MetricBundle::from_diagonal(&[0.0, 0.0], Provenance::Analytic);
        assert_eq!(regularize(&m, 0.0).unwrap(), m);
        let r = regularize(&m, 1e-6).unwrap();
        assert_eq!(r.matrix()[(0, 0)], 1e-6);
        assert_eq!(r.matrix()[(0, 1)], 0.0);
        assert_eq!(r.lambda(), 1e-6);
        assert!(regularize(&m, -1.0).is_err());
    }

    #[test]
    fn diagonal_bundle_rejects_offdiagonal() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.1, 1.0]);
        assert!(MetricBundle::new(MetricMode::Diagonal, g, Provenance::Analytic).is_err());
    }

    #[test]
    fn diagonal_solve_matches_division() {
        let m = MetricBundle::from_diagonal(&[0.25, 0.1, 2.0], Provenance::Analytic).regularize(1e-3).unwrap();
        let rhs = [0.3, -1.2, 0.7];
        let v = m.solve(&rhs).unwrap();
        for i in 0..3 {
            assert!((v[i] - rhs[i] / (m.diagonal_entry(i))).abs() < 1e-12);
        }
        let singular = MetricBundle::from_diagonal(&[1.0, 0.0], Provenance::Analytic);
        assert_eq!(singular.solve(&[1.0, 1.0]), Err(Error::NotPositiveDefinite));
    }

    #[test]
    fn ex1_analytic_values() {
        let m = analytic_metric_ex1(&[PI / 12.0, 0.0]);
        assert!((m.matrix()[(1, 1)] - 0.25).abs() < 1e-15);
        let m = analytic_metric_ex1(&[FRAC_PI_4, 0.3]);
        assert!((m.matrix()[(1, 1)] - 1.0).abs() < 1e-15);
        let gamma = analytic_christoffel_ex1(&[FRAC_PI_4, 0.3]).unwrap();
        assert!(gamma.max_abs() < 1e-15);
        assert!(matches!(analytic_christoffel_ex1(&[0.0, 0.3]), Err(Error::SingularPoint(_))));
    }

    #[test]
    fn ex2_metric_at_origin() {
        let m = analytic_metric_ex2(&[0.0, 0.0, 1.3]);
        let expected = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        assert!((m.matrix() - expected).amax() < 1e-15);
        assert!(analytic_inverse_metric_ex2(&[0.0; 3], 0.0).is_err());
    }

    #[test]
    fn flat_metric_has_no_christoffels() {
        let gamma = christoffel_from_metric_fd(
            |_| Ok(MetricBundle::from_diagonal(&[1.0, 1.0, 1.0], Provenance::Analytic)),
            &[0.1, 0.2, 0.3],
            FD_STEP,
        )
        .unwrap();
        assert!(gamma.max_abs() < 1e-9);
    }

    #[test]
    fn fd_christoffels_reproduce_ex1_closed_form() {
        let theta = [PI / 8.0, 0.4];
        let gamma = christoffel_from_metric_fd(|t| Ok(analytic_metric_ex1(&[t[0], t[1]])), &theta, FD_STEP).unwrap();
        assert!((gamma.get(0, 1, 1) + 1.0).abs() < 1e-6);
        assert!((gamma.get(1, 0, 1) - 2.0).abs() < 1e-6);
        assert!((gamma.get(1, 1, 0) - 2.0).abs() < 1e-6);
    }

    #[test]
    fn qgt_oracle_single_qubit() {
        let theta = [0.37, -1.2];
        let g = qgt_metric_oracle(state_ex1, &theta, FD_STEP).unwrap();
        let expected = analytic_metric_ex1(&theta);
        assert!((g.matrix() - expected.matrix()).amax() < 1e-6);
        assert_eq!(g.provenance(), Provenance::QgtOracle);
    }

    #[test]
    fn rescale_identity_and_scale_two() {
        let g = MetricBundle::from_diagonal(&[0.25], Provenance::ShiftRule);
        let mut gamma = ChristoffelTensor::zeros(1);
        gamma.set(0, 0, 0, 0.3);
        let (gr, m, ga) = rescale_geometry(&[0.5], &g, &gamma, &[1.0]).unwrap();
        assert_eq!((gr, m, ga.clone()), (alloc::vec![0.5], g.clone(), gamma.clone()));
        let (gr, m, ga) = rescale_geometry(&[0.5], &g, &gamma, &[2.0]).unwrap();
        assert_eq!(gr, alloc::vec![1.0]);
        assert_eq!(m.matrix()[(0, 0)], 1.0);
        assert_eq!(ga.get(0, 0, 0), 0.6);
        assert!(rescale_geometry(&[0.5], &g, &gamma, &[0.0]).is_err());
    }

    #[test]
    fn contraction_on_small_tensor() {
        let mut gamma = ChristoffelTensor::zeros(2);
        gamma.set(0, 1, 1, 3.0);
        gamma.set(1, 0, 1, 1.0);
        gamma.set(1, 1, 0, 1.0);
        assert_eq!(gamma.contract(&[2.0, 5.0]).unwrap(), alloc::vec![75.0, 20.0]);
    }
}

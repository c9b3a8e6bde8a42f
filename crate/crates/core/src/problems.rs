//! Geometry providers for the three benchmark problems.

use alloc::vec::Vec;

use crate::circuits::{Circuit, H2Ansatz, SingleQubitAnsatz, StateFamily};
use crate::error::{Error, Result};
use crate::geometry::{
    analytic_christoffel_ex1, analytic_metric_ex1, analytic_metric_ex2, christoffel_diag_shift,
    christoffel_from_metric_fd, fs_metric_diag, fs_metric_full, ChristoffelTensor, DerivativeRule, MetricBundle,
    MetricMode, FD_STEP,
};
use crate::gradients::{analytic_gradient_ex1, analytic_gradient_ex2, CostFunction};
use crate::observables::{hamiltonian_ex1, hamiltonian_h2};
use crate::optimizer::{ChristoffelSource, GeometryProvider, MetricSource};
use crate::statevector::{PauliSum, StateVector};

/// Christoffel floor used when the metric carries no regularization.
pub const MIN_CHRISTOFFEL_FLOOR: f64 = 1e-12;

fn as_array<const N: usize>(theta: &[f64]) -> Result<[f64; N]> {
    theta.try_into().map_err(|_| Error::DimensionMismatch { expected: N, actual: theta.len() })
}

/// Christoffels by central differences of `metric_at`, regularized like `metric`.
fn fd_christoffel<M>(mut metric_at: M, theta: &[f64], metric: &MetricBundle) -> Result<ChristoffelTensor>
where
    M: FnMut(&[f64]) -> Result<MetricBundle>,
{
    let lambda = metric.lambda();
    let diagonal = metric.mode() == MetricMode::Diagonal;
    let mut evals = 0;
    let gamma = christoffel_from_metric_fd(
        |t| {
            let m = metric_at(t)?;
            evals += m.fidelity_evals();
            let m = if diagonal { m.to_diagonal() } else { m };
            m.regularize(lambda)
        },
        theta,
        FD_STEP,
    )?;
    Ok(gamma.with_fidelity_evals(evals))
}

/// A shift-rule eligible circuit measured against a Pauli-sum observable.
///
/// Everything (gradient, metric, Christoffels) is assembled from shifted
/// circuit evaluations.
#[derive(Clone, Debug)]
pub struct CircuitProblem {
    cost: CostFunction<Circuit>,
    rule: DerivativeRule,
}

impl CircuitProblem {
    pub fn new(circuit: Circuit, observable: PauliSum) -> Result<Self> {
        if !circuit.shift_rule_eligible() {
            return Err(Error::NotShiftRuleEligible);
        }
        Ok(Self { cost: CostFunction::new(circuit, observable)?, rule: DerivativeRule::default() })
    }

    pub fn with_rule(mut self, rule: DerivativeRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn circuit(&self) -> &Circuit {
        self.cost.family()
    }

    fn shift_metric(&self, theta: &[f64], source: MetricSource) -> Result<MetricBundle> {
        match source {
            MetricSource::Full => fs_metric_full(self.circuit(), theta),
            MetricSource::Diagonal => fs_metric_diag(self.circuit(), theta),
            MetricSource::Analytic => Err(Error::Unsupported("circuits have no analytic metric")),
        }
    }
}

impl GeometryProvider for CircuitProblem {
    fn n_params(&self) -> usize {
        self.cost.n_params()
    }

    fn energy(&self, theta: &[f64]) -> Result<f64> {
        self.cost.evaluate(theta)
    }

    fn state(&self, theta: &[f64]) -> Result<StateVector> {
        self.circuit().prepare(theta)
    }

    fn gradient(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.cost.parameter_shift_gradient(theta)
    }

    fn metric(&self, theta: &[f64], source: MetricSource) -> Result<MetricBundle> {
        self.shift_metric(theta, source)
    }

    fn christoffel(
        &self,
        theta: &[f64],
        metric: &MetricBundle,
        source: ChristoffelSource,
    ) -> Result<ChristoffelTensor> {
        match source {
            ChristoffelSource::ShiftRule => {
                let floor = if metric.lambda() > 0.0 { metric.lambda() } else { MIN_CHRISTOFFEL_FLOOR };
                christoffel_diag_shift(self.circuit(), theta, metric, floor, self.rule)
            }
            ChristoffelSource::FiniteDifference => {
                let source = match metric.mode() {
                    MetricMode::Full => MetricSource::Full,
                    MetricMode::Diagonal => MetricSource::Diagonal,
                };
                fd_christoffel(|t| self.shift_metric(t, source), theta, metric)
            }
            ChristoffelSource::Analytic => Err(Error::Unsupported("circuits have no analytic Christoffels")),
        }
    }
}

/// `H = σx` on `cos θ₀|0⟩ + e^{2iθ₁} sin θ₀|1⟩` with closed-form gradient,
/// metric and Christoffels.
#[derive(Clone, Debug)]
pub struct SingleQubitProblem {
    cost: CostFunction<SingleQubitAnsatz>,
}

impl Default for SingleQubitProblem {
    fn default() -> Self {
        Self::new()
    }
}

impl SingleQubitProblem {
    pub fn new() -> Self {
        Self { cost: CostFunction::new(SingleQubitAnsatz, hamiltonian_ex1()).expect("one qubit on both sides") }
    }
}

impl GeometryProvider for SingleQubitProblem {
    fn n_params(&self) -> usize {
        2
    }

    fn energy(&self, theta: &[f64]) -> Result<f64> {
        self.cost.evaluate(theta)
    }

    fn state(&self, theta: &[f64]) -> Result<StateVector> {
        SingleQubitAnsatz.prepare(theta)
    }

    fn gradient(&self, theta: &[f64]) -> Result<Vec<f64>> {
        Ok(analytic_gradient_ex1(&as_array(theta)?).to_vec())
    }

    /// The closed-form metric is already diagonal, so every source returns it.
    fn metric(&self, theta: &[f64], _source: MetricSource) -> Result<MetricBundle> {
        Ok(analytic_metric_ex1(&as_array(theta)?))
    }

    fn christoffel(
        &self,
        theta: &[f64],
        metric: &MetricBundle,
        source: ChristoffelSource,
    ) -> Result<ChristoffelTensor> {
        match source {
            ChristoffelSource::Analytic => analytic_christoffel_ex1(&as_array(theta)?),
            ChristoffelSource::FiniteDifference => {
                fd_christoffel(|t| Ok(analytic_metric_ex1(&as_array(t)?)), theta, metric)
            }
            ChristoffelSource::ShiftRule => Err(Error::Unsupported("closed-form family has no circuit")),
        }
    }
}

/// The two-qubit H₂ problem on the expanded closed-form ansatz.
///
/// Christoffels come from central differences of the closed-form metric,
/// regularized with the same λ as the solve.
#[derive(Clone, Debug)]
pub struct H2Problem {
    alpha: f64,
    beta: f64,
    cost: CostFunction<H2Ansatz>,
}

impl H2Problem {
    pub fn new(alpha: f64, beta: f64) -> Self {
        let cost = CostFunction::new(H2Ansatz, hamiltonian_h2(alpha, beta)).expect("two qubits on both sides");
        Self { alpha, beta, cost }
    }

    fn closed_form_metric(theta: &[f64], source: MetricSource) -> Result<MetricBundle> {
        let m = analytic_metric_ex2(&as_array(theta)?);
        Ok(match source {
            MetricSource::Diagonal => m.to_diagonal(),
            MetricSource::Full | MetricSource::Analytic => m,
        })
    }
}

impl GeometryProvider for H2Problem {
    fn n_params(&self) -> usize {
        3
    }

    fn energy(&self, theta: &[f64]) -> Result<f64> {
        self.cost.evaluate(theta)
    }

    fn state(&self, theta: &[f64]) -> Result<StateVector> {
        H2Ansatz.prepare(theta)
    }

    fn gradient(&self, theta: &[f64]) -> Result<Vec<f64>> {
        Ok(analytic_gradient_ex2(&as_array(theta)?, self.alpha, self.beta).to_vec())
    }

    fn metric(&self, theta: &[f64], source: MetricSource) -> Result<MetricBundle> {
        Self::closed_form_metric(theta, source)
    }

    fn christoffel(
        &self,
        theta: &[f64],
        metric: &MetricBundle,
        source: ChristoffelSource,
    ) -> Result<ChristoffelTensor> {
        match source {
            ChristoffelSource::Analytic | ChristoffelSource::FiniteDifference => {
                fd_christoffel(|t| Self::closed_form_metric(t, MetricSource::Full), theta, metric)
            }
            ChristoffelSource::ShiftRule => Err(Error::Unsupported("closed-form family has no circuit")),
        }
    }
}

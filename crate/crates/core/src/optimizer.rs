//! Gradient descent, quantum natural gradient, and natural gradient with a
//! second-order geodesic correction.
//!
//! With `v = (g + λI)⁻¹ ∇L` the three rules are
//!
//! ```text
//! gd:    θ ← θ − η ∇L
//! qng:   θ ← θ − η v
//! qnggc: θ ← θ − η v − (b/2) Γ[v, v]
//! ```

use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::geometry::{ChristoffelTensor, MetricBundle};
use crate::statevector::{fidelity, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Gd,
    Qng,
    Qnggc,
}

/// Which metric a provider should hand back.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MetricSource {
    Full,
    Diagonal,
    Analytic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ChristoffelSource {
    ShiftRule,
    FiniteDifference,
    Analytic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerConfig {
    pub method: Method,
    /// Learning rate η.
    pub eta: f64,
    /// Weight of the geodesic correction; only read by [`Method::Qnggc`].
    pub b: f64,
    /// Tikhonov constant added to the metric before solving.
    pub lambda: f64,
    pub metric_mode: MetricSource,
    pub christoffel_source: ChristoffelSource,
    pub max_iters: usize,
    /// When set, every record carries the fidelity of the current state with this one.
    pub record_fidelity_target: Option<StateVector>,
}

impl OptimizerConfig {
    pub fn gd(eta: f64) -> Self {
        Self {
            method: Method::Gd,
            eta,
            b: 0.0,
            lambda: 0.0,
            metric_mode: MetricSource::Analytic,
            christoffel_source: ChristoffelSource::Analytic,
            max_iters: 30,
            record_fidelity_target: None,
        }
    }

    pub fn qng(eta: f64, lambda: f64) -> Self {
        Self { method: Method::Qng, lambda, ..Self::gd(eta) }
    }

    pub fn qnggc(eta: f64, b: f64, lambda: f64) -> Self {
        Self { method: Method::Qnggc, b, lambda, ..Self::gd(eta) }
    }

    pub fn with_sources(mut self, metric: MetricSource, christoffel: ChristoffelSource) -> Self {
        self.metric_mode = metric;
        self.christoffel_source = christoffel;
        self
    }

    pub fn with_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_fidelity_target(mut self, target: StateVector) -> Self {
        self.record_fidelity_target = Some(target);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return Err(Error::InvalidArgument("eta must be positive and finite"));
        }
        if !(self.b >= 0.0) || !self.b.is_finite() {
            return Err(Error::InvalidArgument("b must be non-negative and finite"));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidArgument("lambda must be non-negative and finite"));
        }
        Ok(())
    }
}

/// Everything the driver needs to know about a problem at a point θ.
pub trait GeometryProvider {
    fn n_params(&self) -> usize;

    fn energy(&self, theta: &[f64]) -> Result<f64>;

    fn state(&self, theta: &[f64]) -> Result<StateVector>;

    fn gradient(&self, theta: &[f64]) -> Result<Vec<f64>>;

    /// Unregularized metric at θ.
    fn metric(&self, theta: &[f64], source: MetricSource) -> Result<MetricBundle>;

    /// Christoffel symbols at θ. `metric` is the regularized metric used for
    /// the natural-gradient solve at the same point.
    fn christoffel(&self, theta: &[f64], metric: &MetricBundle, source: ChristoffelSource)
        -> Result<ChristoffelTensor>;
}

impl<P: GeometryProvider + ?Sized> GeometryProvider for &P {
    fn n_params(&self) -> usize {
        (**self).n_params()
    }

    fn energy(&self, theta: &[f64]) -> Result<f64> {
        (**self).energy(theta)
    }

    fn state(&self, theta: &[f64]) -> Result<StateVector> {
        (**self).state(theta)
    }

    fn gradient(&self, theta: &[f64]) -> Result<Vec<f64>> {
        (**self).gradient(theta)
    }

    fn metric(&self, theta: &[f64], source: MetricSource) -> Result<MetricBundle> {
        (**self).metric(theta, source)
    }

    fn christoffel(
        &self,
        theta: &[f64],
        metric: &MetricBundle,
        source: ChristoffelSource,
    ) -> Result<ChristoffelTensor> {
        (**self).christoffel(theta, metric, source)
    }
}

/// Result of one natural-gradient step.
#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub theta: Vec<f64>,
    pub natural_grad: Vec<f64>,
    /// `(b/2) Γ[v, v]`; zero for plain QNG.
    pub correction: Vec<f64>,
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

pub fn gd_step(theta: &[f64], grad: &[f64], cfg: &OptimizerConfig) -> Result<Vec<f64>> {
    check_len(theta.len(), grad.len())?;
    Ok(theta.iter().zip(grad).map(|(t, g)| t - cfg.eta * g).collect())
}

/// `metric` must already carry the regularization.
pub fn qng_step(theta: &[f64], grad: &[f64], metric: &MetricBundle, cfg: &OptimizerConfig) -> Result<Step> {
    check_len(theta.len(), grad.len())?;
    check_len(theta.len(), metric.dim())?;
    let v = metric.solve(grad)?;
    let next = theta.iter().zip(&v).map(|(t, vi)| t - cfg.eta * vi).collect();
    Ok(Step { theta: next, correction: alloc::vec![0.0; v.len()], natural_grad: v })
}

pub fn qnggc_step(
    theta: &[f64],
    grad: &[f64],
    metric: &MetricBundle,
    gamma: &ChristoffelTensor,
    cfg: &OptimizerConfig,
) -> Result<Step> {
    check_len(theta.len(), grad.len())?;
    check_len(theta.len(), metric.dim())?;
    check_len(theta.len(), gamma.dim())?;
    let v = metric.solve(grad)?;
    let correction: Vec<f64> = gamma.contract(&v)?.iter().map(|c| 0.5 * cfg.b * c).collect();
    let next = theta.iter().zip(&v).zip(&correction).map(|((t, vi), ci)| t - cfg.eta * vi - ci).collect();
    Ok(Step { theta: next, natural_grad: v, correction })
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub theta: Vec<f64>,
    pub energy: f64,
    /// `energy − target`.
    pub delta_e: f64,
    /// `log10 |ΔE|`, floored at the smallest positive normal double.
    pub log10_delta_e: f64,
    /// Euclidean norm of the correction applied in the step that produced `theta`.
    pub correction_norm: f64,
    pub fidelity: Option<f64>,
    /// Fidelity evaluations spent on the metric in that step.
    pub metric_evals: usize,
    /// Fidelity evaluations spent on the Christoffel symbols in that step.
    pub christoffel_evals: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub target: f64,
    pub records: Vec<IterationRecord>,
}

impl Trajectory {
    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    pub fn final_delta_e(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.delta_e)
    }

    /// First iteration whose ΔE falls below `threshold`.
    pub fn first_below(&self, threshold: f64) -> Option<usize> {
        self.records.iter().find(|r| r.delta_e < threshold).map(|r| r.iter)
    }
}

/// A run that stopped early; `partial` holds every record produced before the failure.
#[derive(Clone, Debug, PartialEq)]
pub struct RunFailure {
    pub error: Error,
    pub partial: Trajectory,
}

impl fmt::Display for RunFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (after {} records)", self.error, self.partial.records.len())
    }
}

impl core::error::Error for RunFailure {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        Some(&self.error)
    }
}

fn norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

fn log10_gap(delta: f64) -> f64 {
    libm::log10(delta.abs().max(f64::MIN_POSITIVE))
}

/// Runs `cfg.max_iters` steps from `theta0`, recomputing the metric and the
/// Christoffel symbols at every iterate.
///
/// Aborts when the energy becomes non-finite or climbs more than ten times the
/// initial gap above the starting energy.
pub fn run_optimization<P: GeometryProvider + ?Sized>(
    provider: &P,
    cfg: &OptimizerConfig,
    theta0: &[f64],
    target_energy: f64,
) -> core::result::Result<Trajectory, RunFailure> {
    let mut traj = Trajectory { target: target_energy, records: Vec::with_capacity(cfg.max_iters + 1) };
    macro_rules! attempt {
        ($e:expr) => {
            match $e {
                Ok(v) => v,
                Err(error) => return Err(RunFailure { error, partial: traj }),
            }
        };
    }
    attempt!(cfg.validate());
    attempt!(check_len(provider.n_params(), theta0.len()));

    let record = |iter: usize,
                  theta: Vec<f64>,
                  correction_norm: f64,
                  metric_evals: usize,
                  christoffel_evals: usize|
     -> Result<IterationRecord> {
        let energy = provider.energy(&theta)?;
        if !energy.is_finite() {
            return Err(Error::NonFiniteEnergy { iter });
        }
        let fid = match &cfg.record_fidelity_target {
            Some(target) => Some(fidelity(&provider.state(&theta)?, target)?),
            None => None,
        };
        let delta_e = energy - target_energy;
        Ok(IterationRecord {
            iter,
            theta,
            energy,
            delta_e,
            log10_delta_e: log10_gap(delta_e),
            correction_norm,
            fidelity: fid,
            metric_evals,
            christoffel_evals,
        })
    };

    let first = attempt!(record(0, theta0.to_vec(), 0.0, 0, 0));
    let start_energy = first.energy;
    let limit = (10.0 * first.delta_e.abs()).max(1e-12);
    traj.records.push(first);

    let mut theta = theta0.to_vec();
    for iter in 1..=cfg.max_iters {
        let grad = attempt!(provider.gradient(&theta));
        let (next, correction_norm, metric_evals, christoffel_evals) = match cfg.method {
            Method::Gd => (attempt!(gd_step(&theta, &grad, cfg)), 0.0, 0, 0),
            Method::Qng => {
                let metric = attempt!(provider.metric(&theta, cfg.metric_mode).and_then(|m| m.regularize(cfg.lambda)));
                let step = attempt!(qng_step(&theta, &grad, &metric, cfg));
                (step.theta, 0.0, metric.fidelity_evals(), 0)
            }
            Method::Qnggc => {
                let metric = attempt!(provider.metric(&theta, cfg.metric_mode).and_then(|m| m.regularize(cfg.lambda)));
                let gamma = attempt!(provider.christoffel(&theta, &metric, cfg.christoffel_source));
                let step = attempt!(qnggc_step(&theta, &grad, &metric, &gamma, cfg));
                (step.theta, norm(&step.correction), metric.fidelity_evals(), gamma.fidelity_evals())
            }
        };
        if next.iter().any(|x| !x.is_finite()) {
            return Err(RunFailure { error: Error::NonFiniteEnergy { iter }, partial: traj });
        }
        let rec = attempt!(record(iter, next.clone(), correction_norm, metric_evals, christoffel_evals));
        if rec.energy - start_energy > limit {
            let error = Error::Diverged { iter, energy: rec.energy, limit };
            traj.records.push(rec);
            return Err(RunFailure { error, partial: traj });
        }
        traj.records.push(rec);
        theta = next;
    }
    Ok(traj)
}

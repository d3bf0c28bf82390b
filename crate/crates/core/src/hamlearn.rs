//! Hamiltonian learning: fit coefficients so that simulated time series
//! match recorded ones, with several interchangeable gradient routes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{DatasetMode, TimeSeriesDataset};
use crate::error::{Error, Result};
use crate::hamiltonian::{uniform_params, ParamHamiltonian, PauliSum};
use crate::optim::{minimize, HeldOutError, OptimizerConfig, TrainingTrace};
use crate::pauli::{Pauli, PauliObservable};
use crate::scalar::{c, czero, inner, Real, C};
use crate::sim::Gate;
use crate::trotter::TrotterPlan;

/// How the learner simulates `U(k dt)` for candidate parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ForwardModel {
    /// `steps_per_dt` product-formula steps per sampling interval.
    Trotter { steps_per_dt: usize },
    /// Series propagation of the full Hamiltonian (no splitting error).
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientMethod {
    /// Two shifted circuit evaluations per gate occurrence.
    ParameterShift,
    /// One backward sweep using `dR/dtheta = R(theta + pi) / 2`.
    AnalyticShift,
    /// Central differences of the cost.
    FiniteDifference,
    /// Forward tangent propagation through the exact model.
    Tangent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnConfig {
    pub dt: f64,
    /// `N_T`: sampled steps per series.
    pub num_steps: usize,
    /// `N_S`: random initial states.
    pub num_states: usize,
    /// `N_O`: correlators drawn per axis in `correlator_axes`.
    pub num_observables: usize,
    pub correlator_axes: Vec<Pauli>,
    pub seed: u64,
    pub forward_model: ForwardModel,
    pub gradient_method: GradientMethod,
    pub fd_step: f64,
    pub optimizer: OptimizerConfig,
}

impl Default for LearnConfig {
    fn default() -> Self {
        Self {
            dt: 0.1,
            num_steps: 5,
            num_states: 4,
            num_observables: 3,
            correlator_axes: vec![Pauli::Z, Pauli::X],
            seed: 0,
            forward_model: ForwardModel::Trotter { steps_per_dt: 4 },
            gradient_method: GradientMethod::AnalyticShift,
            fd_step: 1e-5,
            optimizer: OptimizerConfig::default(),
        }
    }
}

impl LearnConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidArgument("dt must be positive".into()));
        }
        if self.num_steps == 0 || self.num_states == 0 || self.num_observables == 0 {
            return Err(Error::InvalidArgument("N_T, N_S and N_O must be at least 1".into()));
        }
        if let ForwardModel::Trotter { steps_per_dt: 0 } = self.forward_model {
            return Err(Error::InvalidArgument("steps_per_dt must be at least 1".into()));
        }
        check_method(self.forward_model, self.gradient_method)?;
        self.optimizer.validate()
    }
}

fn check_method(model: ForwardModel, method: GradientMethod) -> Result<()> {
    match (model, method) {
        (ForwardModel::Exact, GradientMethod::ParameterShift | GradientMethod::AnalyticShift) => {
            Err(Error::InvalidArgument(
                "shift rules need the Trotter forward model".into(),
            ))
        }
        (ForwardModel::Trotter { .. }, GradientMethod::Tangent) => Err(Error::InvalidArgument(
            "tangent gradients need the exact forward model".into(),
        )),
        _ => Ok(()),
    }
}

/// Cost and gradients of the squared-residual objective for one dataset.
#[derive(Debug, Clone)]
pub struct HamLearner<'a, T> {
    template: ParamHamiltonian<T>,
    dataset: &'a TimeSeriesDataset<T>,
    observables: Vec<PauliObservable<T>>,
    model: ForwardModel,
    plan: Option<TrotterPlan<T>>,
}

impl<'a, T: Real> HamLearner<'a, T> {
    pub fn new(
        template: &ParamHamiltonian<T>,
        dataset: &'a TimeSeriesDataset<T>,
        model: ForwardModel,
    ) -> Result<Self> {
        if dataset.mode != DatasetMode::HamiltonianLearning || dataset.local_dim != 2 {
            return Err(Error::ModeMismatch("expected a qubit Hamiltonian-learning dataset"));
        }
        if dataset.num_sites != template.num_sites() {
            return Err(Error::DimensionMismatch {
                expected: template.num_sites(),
                found: dataset.num_sites,
            });
        }
        dataset.validate()?;
        let observables = dataset.pauli_observables()?;
        let plan = match model {
            ForwardModel::Trotter { steps_per_dt } => {
                let plan = TrotterPlan::build(template, dataset.dt, steps_per_dt)?;
                let n = plan.num_sites();
                for (g, p) in plan.base_circuit().gates().iter().zip(plan.gate_params()) {
                    if p.is_some() && g.generator(n).is_none() {
                        return Err(Error::NonPauliParameter(g.to_string()));
                    }
                }
                Some(plan)
            }
            ForwardModel::Exact => None,
        };
        Ok(Self {
            template: template.clone(),
            dataset,
            observables,
            model,
            plan,
        })
    }

    pub fn num_params(&self) -> usize {
        self.template.num_params()
    }

    pub fn model(&self) -> ForwardModel {
        self.model
    }

    fn check_params(&self, params: &[T]) -> Result<()> {
        if params.len() != self.num_params() {
            return Err(Error::DimensionMismatch {
                expected: self.num_params(),
                found: params.len(),
            });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("parameter"));
        }
        Ok(())
    }

    /// States `psi_1..psi_{N_T}` for initial state `i`.
    fn trajectory(&self, params: &[T], bound: Option<&TrotterPlan<T>>, i: usize) -> Result<Vec<Vec<C<T>>>> {
        let n = self.dataset.num_sites;
        let mut psi = self.dataset.states[i].amplitudes().to_vec();
        let mut out = Vec::with_capacity(self.dataset.num_steps);
        let sparse = match bound {
            None => Some(self.template.with_params(params)?.sparse()),
            Some(_) => None,
        };
        for _ in 0..self.dataset.num_steps {
            match (bound, &sparse) {
                (Some(plan), _) => {
                    for g in plan.base_circuit().gates() {
                        g.apply_in_place(&mut psi, n);
                    }
                }
                (None, Some(h)) => psi = h.evolve(self.dataset.dt, &psi),
                _ => unreachable!(),
            }
            out.push(psi.clone());
        }
        Ok(out)
    }

    fn bound_plan(&self, params: &[T]) -> Result<Option<TrotterPlan<T>>> {
        self.plan.as_ref().map(|p| p.bind(params)).transpose()
    }

    /// Model expectations in record order `(alpha, i, k)`.
    pub fn predictions(&self, params: &[T]) -> Result<Vec<T>> {
        self.check_params(params)?;
        let bound = self.bound_plan(params)?;
        let per_state: Vec<Vec<Vec<C<T>>>> = (0..self.dataset.states.len())
            .into_par_iter()
            .map(|i| self.trajectory(params, bound.as_ref(), i))
            .collect::<Result<_>>()?;
        let mut out = Vec::with_capacity(self.dataset.records.len());
        for o in &self.observables {
            for traj in &per_state {
                for psi in traj {
                    out.push(o.expectation_complex(psi).re);
                }
            }
        }
        Ok(out)
    }

    fn residuals(&self, traj: &[Vec<C<T>>], i: usize) -> Vec<Vec<T>> {
        self.observables
            .iter()
            .enumerate()
            .map(|(alpha, o)| {
                traj.iter()
                    .enumerate()
                    .map(|(k, psi)| o.expectation_complex(psi).re - self.dataset.value(alpha, i, k + 1))
                    .collect()
            })
            .collect()
    }

    fn state_cost(&self, params: &[T], bound: Option<&TrotterPlan<T>>, i: usize) -> Result<T> {
        let traj = self.trajectory(params, bound, i)?;
        Ok(self
            .residuals(&traj, i)
            .iter()
            .flatten()
            .map(|r| *r * *r)
            .sum())
    }

    /// `sum_{alpha,i,k} (model - record)^2`.
    pub fn cost(&self, params: &[T]) -> Result<T> {
        self.check_params(params)?;
        let bound = self.bound_plan(params)?;
        let parts: Vec<T> = (0..self.dataset.states.len())
            .into_par_iter()
            .map(|i| self.state_cost(params, bound.as_ref(), i))
            .collect::<Result<_>>()?;
        Ok(parts.into_iter().sum())
    }

    pub fn gradient(&self, params: &[T], method: GradientMethod, fd_step: T) -> Result<Vec<T>> {
        Ok(self.cost_and_gradient(params, method, fd_step)?.1)
    }

    pub fn cost_and_gradient(&self, params: &[T], method: GradientMethod, fd_step: T) -> Result<(T, Vec<T>)> {
        self.check_params(params)?;
        check_method(self.model, method)?;
        if method == GradientMethod::FiniteDifference {
            let cost = self.cost(params)?;
            let grad = (0..params.len())
                .map(|j| {
                    let mut p = params.to_vec();
                    p[j] = params[j] + fd_step;
                    let plus = self.cost(&p)?;
                    p[j] = params[j] - fd_step;
                    let minus = self.cost(&p)?;
                    Ok((plus - minus) / (T::lit(2.0) * fd_step))
                })
                .collect::<Result<_>>()?;
            return Ok((cost, grad));
        }
        let bound = self.bound_plan(params)?;
        let parts: Vec<(T, Vec<T>)> = (0..self.dataset.states.len())
            .into_par_iter()
            .map(|i| match method {
                GradientMethod::AnalyticShift => self.adjoint_state(bound.as_ref().expect("trotter"), i),
                GradientMethod::ParameterShift => self.shift_state(bound.as_ref().expect("trotter"), i),
                GradientMethod::Tangent => self.tangent_state(params, i),
                GradientMethod::FiniteDifference => unreachable!(),
            })
            .collect::<Result<_>>()?;
        let mut cost = T::zero();
        let mut grad = vec![T::zero(); params.len()];
        for (c_i, g_i) in parts {
            cost = cost + c_i;
            for (g, x) in grad.iter_mut().zip(g_i) {
                *g = *g + x;
            }
        }
        Ok((cost, grad))
    }

    /// Backward sweep: the adjoint vector collects `2 r O_alpha psi_k` at
    /// each sampling boundary and each rotation contributes
    /// `2 Re <lambda| R(theta + pi)/2 |phi>`.
    fn adjoint_state(&self, plan: &TrotterPlan<T>, i: usize) -> Result<(T, Vec<T>)> {
        let n = plan.num_sites();
        let gates = plan.base_circuit().gates();
        let slots = plan.gate_params();
        let scale = plan.angle_scale();
        let traj = self.trajectory(&[], Some(plan), i)?;
        let res = self.residuals(&traj, i);
        let cost = res.iter().flatten().map(|r| *r * *r).sum();
        let mut grad = vec![T::zero(); self.num_params()];
        let mut phi = traj.last().expect("num_steps >= 1").clone();
        let mut lambda = vec![czero(); phi.len()];
        let mut shifted = vec![czero(); phi.len()];
        let inverses: Vec<Gate<T>> = gates.iter().map(Gate::inverse).collect();
        for k in (1..=self.dataset.num_steps).rev() {
            for (o, r) in self.observables.iter().zip(&res) {
                o.apply_accumulate(T::lit(2.0) * r[k - 1], &phi, &mut lambda);
            }
            for g in (0..gates.len()).rev() {
                inverses[g].apply_in_place(&mut phi, n);
                if let Some(p) = slots[g] {
                    shifted.copy_from_slice(&phi);
                    gates[g].shifted(T::PI()).apply_in_place(&mut shifted, n);
                    grad[p] = grad[p] + inner(&lambda, &shifted).re * scale;
                }
                inverses[g].apply_in_place(&mut lambda, n);
            }
        }
        Ok((cost, grad))
    }

    /// Literal shift rule per gate occurrence: every expectation downstream
    /// of the occurrence is re-simulated with the angle moved by `+-pi/2`.
    fn shift_state(&self, plan: &TrotterPlan<T>, i: usize) -> Result<(T, Vec<T>)> {
        let n = plan.num_sites();
        let gates = plan.base_circuit().gates();
        let slots = plan.gate_params();
        let scale = plan.angle_scale();
        let nt = self.dataset.num_steps;
        let traj = self.trajectory(&[], Some(plan), i)?;
        let res = self.residuals(&traj, i);
        let cost = res.iter().flatten().map(|r| *r * *r).sum();
        let mut grad = vec![T::zero(); self.num_params()];
        let half_pi = T::FRAC_PI_2();
        let mut before = self.dataset.states[i].amplitudes().to_vec();
        for m in 1..=nt {
            for g in 0..gates.len() {
                if let Some(p) = slots[g] {
                    let mut d_cost = T::zero();
                    let mut series = [Vec::new(), Vec::new()];
                    for (s, sign) in [T::one(), -T::one()].into_iter().enumerate() {
                        let mut psi = before.clone();
                        gates[g].shifted(sign * half_pi).apply_in_place(&mut psi, n);
                        for gate in &gates[g + 1..] {
                            gate.apply_in_place(&mut psi, n);
                        }
                        for k in m..=nt {
                            if k > m {
                                for gate in gates {
                                    gate.apply_in_place(&mut psi, n);
                                }
                            }
                            series[s].push(
                                self.observables
                                    .iter()
                                    .map(|o| o.expectation_complex(&psi).re)
                                    .collect::<Vec<T>>(),
                            );
                        }
                    }
                    for (idx, k) in (m..=nt).enumerate() {
                        for alpha in 0..self.observables.len() {
                            let df = (series[0][idx][alpha] - series[1][idx][alpha]) * T::lit(0.5);
                            d_cost = d_cost + T::lit(2.0) * res[alpha][k - 1] * df;
                        }
                    }
                    grad[p] = grad[p] + d_cost * scale;
                }
                gates[g].apply_in_place(&mut before, n);
            }
        }
        Ok((cost, grad))
    }

    /// Forward tangents `d psi_k / d param_j` through the exact propagator.
    fn tangent_state(&self, params: &[T], i: usize) -> Result<(T, Vec<T>)> {
        let h = self.template.with_params(params)?;
        let sparse = h.sparse();
        let traj = self.trajectory(params, None, i)?;
        let res = self.residuals(&traj, i);
        let cost = res.iter().flatten().map(|r| *r * *r).sum();
        let psi0 = self.dataset.states[i].amplitudes();
        let mut grad = vec![T::zero(); self.num_params()];
        let mut ow = vec![czero(); psi0.len()];
        for (j, g) in grad.iter_mut().enumerate() {
            let dir: PauliSum<T> = h.derivative_operator(j);
            let mut psi = psi0.to_vec();
            let mut dpsi = vec![czero(); psi0.len()];
            for k in 1..=self.dataset.num_steps {
                let (a, b) = sparse.evolve_tangent(&dir, self.dataset.dt, &psi, &dpsi);
                psi = a;
                dpsi = b;
                ow.iter_mut().for_each(|x| *x = czero());
                for (o, r) in self.observables.iter().zip(&res) {
                    o.apply_accumulate(T::lit(2.0) * r[k - 1], &psi, &mut ow);
                }
                *g = *g + T::lit(2.0) * inner(&ow, &dpsi).re;
            }
        }
        Ok((cost, grad))
    }
}

/// `||U_H(t)^dag U_K(t) - I||_F / sqrt(dim)`, accumulated column by column
/// as `sum_j ||U_K e_j - U_H e_j||^2`.
pub fn trace_distance_hamiltonians<T: Real>(h: &ParamHamiltonian<T>, k: &ParamHamiltonian<T>, t: T) -> Result<T> {
    let (sum, _, dim) = column_sums(h, k, t)?;
    Ok((sum / T::lit(dim as f64)).sqrt())
}

/// `min_phi ||e^{i phi} U_H^dag U_K - I||_F / sqrt(dim)`, insensitive to
/// global phase (and so to shifts `H -> H + c I`).
pub fn trace_distance_hamiltonians_phase_free<T: Real>(
    h: &ParamHamiltonian<T>,
    k: &ParamHamiltonian<T>,
    t: T,
) -> Result<T> {
    let (_, tr, dim) = column_sums(h, k, t)?;
    let d = T::lit(dim as f64);
    let v = (T::lit(2.0) * d - T::lit(2.0) * tr.norm()).max(T::zero());
    Ok((v / d).sqrt())
}

/// `(||U_K - U_H||_F^2, tr U_H^dag U_K, dim)`.
fn column_sums<T: Real>(h: &ParamHamiltonian<T>, k: &ParamHamiltonian<T>, t: T) -> Result<(T, C<T>, usize)> {
    if h.num_sites() != k.num_sites() {
        return Err(Error::DimensionMismatch {
            expected: h.num_sites(),
            found: k.num_sites(),
        });
    }
    let dim = h.dim();
    let (sh, sk) = (h.sparse(), k.sparse());
    let parts: Vec<(T, C<T>)> = (0..dim)
        .into_par_iter()
        .map(|j| {
            let mut e = vec![czero(); dim];
            e[j] = c(T::one(), T::zero());
            let a = sh.evolve(t, &e);
            let b = sk.evolve(t, &e);
            let diff = a.iter().zip(&b).map(|(x, y)| (*y - *x).norm_sqr()).sum();
            (diff, inner(&a, &b))
        })
        .collect();
    let mut sum = T::zero();
    let mut tr = czero();
    for (d, w) in parts {
        sum = sum + d;
        tr = tr + w;
    }
    Ok((sum, tr, dim))
}

/// Exact series of `learned` for every held-out `(alpha, i, k)`, in record order.
pub fn exact_predictions<T: Real>(learned: &ParamHamiltonian<T>, heldout: &TimeSeriesDataset<T>) -> Result<Vec<T>> {
    HamLearner::new(learned, heldout, ForwardModel::Exact)?.predictions(learned.params())
}

/// Mean squared deviation between `learned` (evolved exactly) and the
/// held-out records.
pub fn validation_error<T: Real>(learned: &ParamHamiltonian<T>, heldout: &TimeSeriesDataset<T>) -> Result<T> {
    let pred = exact_predictions(learned, heldout)?;
    let sum: T = pred
        .iter()
        .zip(&heldout.records)
        .map(|(p, r)| (*p - r.value) * (*p - r.value))
        .sum();
    Ok(sum / T::lit(pred.len() as f64))
}

/// Validation error split by held-out observable.
pub fn validation_errors<T: Real>(
    learned: &ParamHamiltonian<T>,
    heldout: &TimeSeriesDataset<T>,
) -> Result<Vec<HeldOutError<T>>> {
    let pred = exact_predictions(learned, heldout)?;
    let per = heldout.num_series() * heldout.num_steps;
    Ok(heldout
        .observables
        .iter()
        .enumerate()
        .map(|(alpha, o)| {
            let range = alpha * per..(alpha + 1) * per;
            let sum: T = pred[range.clone()]
                .iter()
                .zip(&heldout.records[range])
                .map(|(p, r)| (*p - r.value) * (*p - r.value))
                .sum();
            HeldOutError {
                observable: o.label(),
                error: sum / T::lit(per as f64),
            }
        })
        .collect())
}

/// Labels of held-out observables that also appear in training data.
pub fn overlapping_observables<T: Real>(train: &TimeSeriesDataset<T>, heldout: &TimeSeriesDataset<T>) -> Vec<String> {
    heldout
        .observables
        .iter()
        .filter(|o| train.observables.contains(o))
        .map(|o| o.label())
        .collect()
}

/// Optional truth-aware and held-out diagnostics recorded during training.
#[derive(Debug, Clone, Copy)]
pub struct TrainingDiagnostics<'a, T> {
    pub truth: Option<&'a ParamHamiltonian<T>>,
    pub heldout: Option<&'a TimeSeriesDataset<T>>,
    /// Reference time of the trace distance; defaults to the training horizon.
    pub trace_time: Option<T>,
}

impl<'a, T> Default for TrainingDiagnostics<'a, T> {
    fn default() -> Self {
        Self {
            truth: None,
            heldout: None,
            trace_time: None,
        }
    }
}

/// Gradient descent on the dataset cost from `init`.
pub fn train<T: Real>(
    cfg: &LearnConfig,
    dataset: &TimeSeriesDataset<T>,
    template: &ParamHamiltonian<T>,
    init: Vec<T>,
    diagnostics: TrainingDiagnostics<'_, T>,
) -> Result<TrainingTrace<T>> {
    cfg.validate()?;
    let learner = HamLearner::new(template, dataset, cfg.forward_model)?;
    learner.check_params(&init)?;
    let horizon = diagnostics
        .trace_time
        .unwrap_or(dataset.dt * T::lit(dataset.num_steps as f64));
    let fd = T::lit(cfg.fd_step);
    let mut trace = minimize(
        &cfg.optimizer,
        init,
        |p| learner.cost_and_gradient(p, cfg.gradient_method, fd),
        |p| {
            let current = template.with_params(p)?;
            let td = diagnostics
                .truth
                .map(|t| trace_distance_hamiltonians(t, &current, horizon))
                .transpose()?;
            let ve = diagnostics
                .heldout
                .map(|h| validation_error(&current, h))
                .transpose()?;
            Ok((td, ve))
        },
    )?;
    if let Some(h) = diagnostics.heldout {
        trace.validation = validation_errors(&template.with_params(&trace.final_params)?, h)?;
    }
    Ok(trace)
}

/// Seeded uniform `[-1, 1]` starting point.
pub fn initial_params<T: Real>(count: usize, seed: u64) -> Vec<T> {
    uniform_params(count, seed ^ 0x1a17_0000)
}

/// Best of `restarts` seeded runs, ranked by final training cost.
pub fn train_with_restarts<T: Real>(
    cfg: &LearnConfig,
    dataset: &TimeSeriesDataset<T>,
    template: &ParamHamiltonian<T>,
    restarts: usize,
    diagnostics: TrainingDiagnostics<'_, T>,
) -> Result<TrainingTrace<T>> {
    let mut best: Option<TrainingTrace<T>> = None;
    for r in 0..restarts.max(1) as u64 {
        let init = initial_params(template.num_params(), cfg.seed.wrapping_add(r));
        let t = train(cfg, dataset, template, init, diagnostics)?;
        if best.as_ref().map_or(true, |b| t.final_cost < b.final_cost) {
            best = Some(t);
        }
    }
    Ok(best.expect("at least one restart"))
}

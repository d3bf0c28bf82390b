//! State learning: recover real-amplitude ansatz parameters from time
//! series recorded under several known Hamiltonians.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{coherence_observables, DatasetMode, TimeSeriesDataset, Truth};
use crate::error::{Error, Result};
use crate::hamiltonian::{uniform_params, Coefficients, Family, ParamHamiltonian};
use crate::optim::{minimize, OptimizerConfig, TrainingTrace};
use crate::pauli::PauliObservable;
use crate::scalar::{czero, Real, C};
use crate::sim::{trace_distance_states, Circuit, Gate, StateVector};

/// Layers of `Ry` on every qubit followed by a CNOT ladder `q -> q+1`,
/// closed by a final `Ry` layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ansatz {
    pub num_qubits: usize,
    pub num_layers: usize,
}

impl Ansatz {
    pub fn new(num_qubits: usize, num_layers: usize) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::InvalidArgument("ansatz needs at least one qubit".into()));
        }
        Ok(Self {
            num_qubits,
            num_layers,
        })
    }

    /// `num_layers = num_qubits`.
    pub fn with_default_depth(num_qubits: usize) -> Result<Self> {
        Self::new(num_qubits, num_qubits)
    }

    pub fn num_params(&self) -> usize {
        self.num_qubits * (self.num_layers + 1)
    }

    pub fn circuit<T: Real>(&self, beta: &[T]) -> Result<Circuit<T>> {
        if beta.len() != self.num_params() {
            return Err(Error::DimensionMismatch {
                expected: self.num_params(),
                found: beta.len(),
            });
        }
        let n = self.num_qubits;
        let mut gates = Vec::with_capacity(self.num_params() + self.num_layers * n.saturating_sub(1));
        for layer in 0..=self.num_layers {
            for q in 0..n {
                gates.push(Gate::ry(q, beta[layer * n + q]));
            }
            if layer < self.num_layers {
                for q in 0..n.saturating_sub(1) {
                    gates.push(Gate::cnot(q, q + 1));
                }
            }
        }
        Circuit::from_gates(n, gates)
    }

    /// `V(beta)|0...0>`.
    pub fn prepare_state<T: Real>(&self, beta: &[T]) -> Result<StateVector<T>> {
        StateVector::zero_state(self.num_qubits).apply_circuit(&self.circuit(beta)?)
    }

    /// Target drawn from the ansatz itself, so it is exactly reachable.
    pub fn realizable_target<T: Real>(&self, seed: u64) -> Result<StateVector<T>> {
        let beta: Vec<T> = random_angles(self.num_params(), seed);
        self.prepare_state(&beta)
    }
}

fn random_angles<T: Real>(count: usize, seed: u64) -> Vec<T> {
    uniform_params::<T>(count, seed)
        .into_iter()
        .map(|x| x * T::PI())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StateLearnConfig {
    /// `N_H`: known Hamiltonians the state is evolved under.
    pub num_hamiltonians: usize,
    /// `N_T`
    pub num_steps: usize,
    /// `N_O`: observables subsampled from the probability/coherence set.
    pub num_observables: usize,
    pub dt: f64,
    pub seed: u64,
    /// Defaults to the number of qubits.
    pub num_layers: Option<usize>,
    pub restarts: usize,
    pub optimizer: OptimizerConfig,
}

impl Default for StateLearnConfig {
    fn default() -> Self {
        Self {
            num_hamiltonians: 4,
            num_steps: 5,
            num_observables: 16,
            dt: 0.1,
            seed: 0,
            num_layers: None,
            restarts: 3,
            optimizer: OptimizerConfig {
                optimizer: crate::optim::Optimizer::adam(),
                learning_rate: 0.05,
                max_epochs: 1500,
                ..OptimizerConfig::default()
            },
        }
    }
}

impl StateLearnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_hamiltonians == 0 || self.num_steps == 0 || self.num_observables == 0 || self.restarts == 0 {
            return Err(Error::InvalidArgument(
                "N_H, N_T, N_O and restarts must be at least 1".into(),
            ));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidArgument("dt must be positive".into()));
        }
        self.optimizer.validate()
    }

    pub fn ansatz(&self, num_qubits: usize) -> Result<Ansatz> {
        Ansatz::new(num_qubits, self.num_layers.unwrap_or(num_qubits))
    }
}

/// Seeded generic 2-local Hamiltonians with uniform `[-1, 1]` coefficients.
pub fn random_hamiltonians<T: Real>(num_qubits: usize, count: usize, seed: u64) -> Result<Vec<ParamHamiltonian<T>>> {
    (0..count as u64)
        .map(|s| {
            ParamHamiltonian::build_family(
                Family::Generic2local,
                num_qubits,
                Coefficients::Random(seed.wrapping_add(s).wrapping_mul(0x9e37_79b9)),
            )
        })
        .collect()
}

/// `count` probability/coherence observables drawn without replacement
/// (all of them, in order, when `count >= 4^n`).
pub fn select_ic_observables<T: Real>(num_qubits: usize, count: usize, seed: u64) -> Vec<PauliObservable<T>> {
    let all = coherence_observables::<T>(num_qubits);
    if count >= all.len() {
        return all;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = sample(&mut rng, all.len(), count).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| all[i].clone()).collect()
}

fn dense_observable<T: Real>(o: &PauliObservable<T>) -> Vec<Vec<C<T>>> {
    let dim = 1usize << o.num_sites();
    (0..dim)
        .map(|j| {
            let mut e = vec![czero(); dim];
            e[j] = C::new(T::one(), T::zero());
            let mut col = vec![czero(); dim];
            o.apply_accumulate(T::one(), &e, &mut col);
            col
        })
        .collect()
}

/// Cost and gradient of the state-learning objective.
///
/// Each record becomes a Heisenberg-picture matrix `U^dag O U`; only its
/// real part matters for the real-amplitude ansatz.
#[derive(Debug, Clone)]
pub struct StateLearner<T> {
    ansatz: Ansatz,
    dim: usize,
    heisenberg: Vec<Vec<T>>,
    targets: Vec<T>,
    truth: Option<StateVector<T>>,
}

impl<T: Real> StateLearner<T> {
    pub fn new(ansatz: Ansatz, dataset: &TimeSeriesDataset<T>) -> Result<Self> {
        if dataset.mode != DatasetMode::StateLearning || dataset.local_dim != 2 {
            return Err(Error::ModeMismatch("expected a qubit state-learning dataset"));
        }
        if dataset.num_sites != ansatz.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: ansatz.num_qubits,
                found: dataset.num_sites,
            });
        }
        dataset.validate()?;
        let truth = match &dataset.generator_info.truth {
            Truth::State { state } => {
                if !state.is_real(T::lit(1e-10)) {
                    return Err(Error::InvalidArgument(
                        "target state has complex amplitudes; the ansatz is real".into(),
                    ));
                }
                Some(state.clone())
            }
            _ => None,
        };
        let dim = 1usize << ansatz.num_qubits;
        let obs: Vec<Vec<Vec<C<T>>>> = dataset
            .pauli_observables()?
            .iter()
            .map(dense_observable)
            .collect();
        let hams = dataset
            .hamiltonians
            .iter()
            .map(ParamHamiltonian::from_record)
            .collect::<Result<Vec<_>>>()?;
        // per Hamiltonian: [k][alpha] real Heisenberg matrices
        let per_ham: Vec<Vec<Vec<Vec<T>>>> = hams
            .par_iter()
            .map(|h| {
                let eig = h.eigen()?;
                Ok((1..=dataset.num_steps)
                    .map(|k| {
                        let u = eig.propagator(dataset.dt * T::lit(k as f64));
                        obs.iter()
                            .map(|o| {
                                // (U^dag O U)_{ab} = sum_j conj(U_ja) (O U)_{jb}
                                let ou: Vec<Vec<C<T>>> = (0..dim)
                                    .map(|b| {
                                        let mut col = vec![czero(); dim];
                                        for (m, oc) in o.iter().enumerate() {
                                            let ub = u[(m, b)];
                                            for (x, y) in col.iter_mut().zip(oc) {
                                                *x = *x + *y * ub;
                                            }
                                        }
                                        col
                                    })
                                    .collect();
                                let mut out = vec![T::zero(); dim * dim];
                                for a in 0..dim {
                                    for (b, oub) in ou.iter().enumerate() {
                                        let mut s = czero();
                                        for (j, v) in oub.iter().enumerate() {
                                            s = s + u[(j, a)].conj() * *v;
                                        }
                                        out[a * dim + b] = s.re;
                                    }
                                }
                                out
                            })
                            .collect()
                    })
                    .collect())
            })
            .collect::<Result<_>>()?;
        let mut heisenberg = Vec::with_capacity(dataset.records.len());
        for alpha in 0..obs.len() {
            for ham in &per_ham {
                for step in ham {
                    heisenberg.push(step[alpha].clone());
                }
            }
        }
        Ok(Self {
            ansatz,
            dim,
            heisenberg,
            targets: dataset.records.iter().map(|r| r.value).collect(),
            truth,
        })
    }

    pub fn ansatz(&self) -> Ansatz {
        self.ansatz
    }

    pub fn truth(&self) -> Option<&StateVector<T>> {
        self.truth.as_ref()
    }

    fn real_state(&self, beta: &[T]) -> Result<Vec<T>> {
        Ok(self
            .ansatz
            .prepare_state(beta)?
            .amplitudes()
            .iter()
            .map(|a| a.re)
            .collect())
    }

    fn quad(&self, m: &[T], psi: &[T]) -> T {
        let mut s = T::zero();
        for (a, row) in m.chunks_exact(self.dim).enumerate() {
            let r: T = row.iter().zip(psi).map(|(x, y)| *x * *y).sum();
            s = s + psi[a] * r;
        }
        s
    }

    fn residuals(&self, psi: &[T]) -> Vec<T> {
        self.heisenberg
            .par_iter()
            .zip(&self.targets)
            .map(|(m, t)| self.quad(m, psi) - *t)
            .collect()
    }

    pub fn cost(&self, beta: &[T]) -> Result<T> {
        let psi = self.real_state(beta)?;
        Ok(self.residuals(&psi).iter().map(|r| *r * *r).sum())
    }

    /// Gradient by the shift rule on every `beta_s`, applied to the
    /// residual-weighted operator `W = sum 2 r M`.
    pub fn cost_and_gradient(&self, beta: &[T]) -> Result<(T, Vec<T>)> {
        let psi = self.real_state(beta)?;
        let res = self.residuals(&psi);
        let cost = res.iter().map(|r| *r * *r).sum();
        let mut w = vec![T::zero(); self.dim * self.dim];
        for (m, r) in self.heisenberg.iter().zip(&res) {
            let s = T::lit(2.0) * *r;
            for (x, y) in w.iter_mut().zip(m) {
                *x = *x + s * *y;
            }
        }
        let half_pi = T::FRAC_PI_2();
        let grad = (0..beta.len())
            .into_par_iter()
            .map(|s| {
                let mut b = beta.to_vec();
                b[s] = beta[s] + half_pi;
                let plus = self.quad(&w, &self.real_state(&b)?);
                b[s] = beta[s] - half_pi;
                let minus = self.quad(&w, &self.real_state(&b)?);
                Ok((plus - minus) * T::lit(0.5))
            })
            .collect::<Result<_>>()?;
        Ok((cost, grad))
    }

    pub fn finite_difference_gradient(&self, beta: &[T], step: T) -> Result<Vec<T>> {
        (0..beta.len())
            .map(|s| {
                let mut b = beta.to_vec();
                b[s] = beta[s] + step;
                let plus = self.cost(&b)?;
                b[s] = beta[s] - step;
                let minus = self.cost(&b)?;
                Ok((plus - minus) / (T::lit(2.0) * step))
            })
            .collect()
    }

    pub fn trace_distance_to_truth(&self, beta: &[T]) -> Result<Option<T>> {
        match &self.truth {
            Some(t) => Ok(Some(trace_distance_states(&self.ansatz.prepare_state(beta)?, t)?)),
            None => Ok(None),
        }
    }
}

/// `cost_state` without keeping the learner around.
pub fn cost_state<T: Real>(ansatz: Ansatz, beta: &[T], dataset: &TimeSeriesDataset<T>) -> Result<T> {
    StateLearner::new(ansatz, dataset)?.cost(beta)
}

/// Gradient descent from `beta0`; the trace-distance column tracks the
/// stored target when the dataset carries one.
pub fn train_state<T: Real>(
    cfg: &StateLearnConfig,
    dataset: &TimeSeriesDataset<T>,
    ansatz: Ansatz,
    beta0: Vec<T>,
) -> Result<TrainingTrace<T>> {
    cfg.validate()?;
    let learner = StateLearner::new(ansatz, dataset)?;
    train_with_learner(cfg, &learner, beta0)
}

fn train_with_learner<T: Real>(
    cfg: &StateLearnConfig,
    learner: &StateLearner<T>,
    beta0: Vec<T>,
) -> Result<TrainingTrace<T>> {
    minimize(
        &cfg.optimizer,
        beta0,
        |b| learner.cost_and_gradient(b),
        |b| Ok((learner.trace_distance_to_truth(b)?, None)),
    )
}

/// Seeded starting angles in `[-pi, pi]`.
pub fn initial_beta<T: Real>(ansatz: Ansatz, seed: u64) -> Vec<T> {
    random_angles(ansatz.num_params(), seed ^ 0x5eed_0000)
}

/// Best of `cfg.restarts` runs by final cost.
pub fn train_state_with_restarts<T: Real>(
    cfg: &StateLearnConfig,
    dataset: &TimeSeriesDataset<T>,
    ansatz: Ansatz,
) -> Result<TrainingTrace<T>> {
    cfg.validate()?;
    let learner = StateLearner::new(ansatz, dataset)?;
    let mut best: Option<TrainingTrace<T>> = None;
    for r in 0..cfg.restarts as u64 {
        let t = train_with_learner(cfg, &learner, initial_beta(ansatz, cfg.seed.wrapping_add(r)))?;
        if best.as_ref().map_or(true, |b| t.final_cost < b.final_cost) {
            best = Some(t);
        }
    }
    Ok(best.expect("restarts >= 1"))
}

/// Exported learned state: `{num_qubits, beta, amplitudes}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LearnedState<T> {
    pub num_qubits: usize,
    pub beta: Vec<T>,
    pub amplitudes: Vec<T>,
}

impl<T: Real> LearnedState<T> {
    pub fn new(ansatz: Ansatz, beta: Vec<T>) -> Result<Self> {
        let amplitudes = ansatz
            .prepare_state(&beta)?
            .amplitudes()
            .iter()
            .map(|a| a.re)
            .collect();
        Ok(Self {
            num_qubits: ansatz.num_qubits,
            beta,
            amplitudes,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::generate_state_learning_data;

    fn dataset(n: usize, nh: usize, nt: usize, no: usize, seed: u64) -> (Ansatz, TimeSeriesDataset<f64>) {
        let a = Ansatz::with_default_depth(n).unwrap();
        let psi = a.realizable_target(seed).unwrap();
        let hams = random_hamiltonians(n, nh, seed).unwrap();
        let obs = select_ic_observables(n, no, seed);
        (a, generate_state_learning_data(&psi, &hams, &obs, nt, 0.1, 0.0, seed).unwrap())
    }

    #[test]
    fn ansatz_shape_and_trivial_states() {
        let a = Ansatz::new(3, 2).unwrap();
        assert_eq!(a.num_params(), 9);
        let zero = a.prepare_state(&[0.0f64; 9]).unwrap();
        assert!((zero.amplitudes()[0].re - 1.0).abs() < 1e-15);
        let one = Ansatz::new(1, 0).unwrap().prepare_state(&[0.8f64]).unwrap();
        assert!((one.amplitudes()[0].re - 0.4f64.cos()).abs() < 1e-15);
        assert!((one.amplitudes()[1].re - 0.4f64.sin()).abs() < 1e-15);
        assert!(a.prepare_state(&[0.0f64; 3]).is_err());
    }

    #[test]
    fn cost_vanishes_at_truth_and_is_sign_blind() {
        let a = Ansatz::with_default_depth(2).unwrap();
        let beta: Vec<f64> = initial_beta(a, 3);
        let psi = a.prepare_state(&beta).unwrap();
        let hams = random_hamiltonians(2, 2, 1).unwrap();
        let obs = select_ic_observables(2, 16, 0);
        let d = generate_state_learning_data(&psi, &hams, &obs, 4, 0.1, 0.0, 0).unwrap();
        let l = StateLearner::new(a, &d).unwrap();
        assert!(l.cost(&beta).unwrap() < 1e-24);
        let flipped = StateVector::from_amplitudes(psi.amplitudes().iter().map(|x| -x).collect(), 2, 2).unwrap();
        let d2 = generate_state_learning_data(&flipped, &hams, &obs, 4, 0.1, 0.0, 0).unwrap();
        let other: Vec<f64> = initial_beta(a, 9);
        let c1 = l.cost(&other).unwrap();
        let c2 = StateLearner::new(a, &d2).unwrap().cost(&other).unwrap();
        assert!((c1 - c2).abs() < 1e-12);
    }

    #[test]
    fn shift_gradient_matches_finite_difference() {
        let (a, d) = dataset(3, 2, 3, 10, 4);
        let l = StateLearner::new(a, &d).unwrap();
        let beta: Vec<f64> = initial_beta(a, 1);
        let (_, g) = l.cost_and_gradient(&beta).unwrap();
        let fd = l.finite_difference_gradient(&beta, 1e-5).unwrap();
        let scale = g.iter().map(|x| x.abs()).fold(1e-3, f64::max);
        for (x, y) in g.iter().zip(&fd) {
            assert!((x - y).abs() / scale < 1e-6, "{x} {y}");
        }
    }

    #[test]
    fn rejects_complex_targets_and_wrong_mode() {
        let psi = StateVector::<f64>::random(2, 1, false).unwrap();
        let hams = random_hamiltonians(2, 1, 1).unwrap();
        let obs = select_ic_observables(2, 16, 0);
        let d = generate_state_learning_data(&psi, &hams, &obs, 2, 0.1, 0.0, 0).unwrap();
        assert!(StateLearner::new(Ansatz::with_default_depth(2).unwrap(), &d).is_err());
    }

    #[test]
    fn two_qubit_recovery() {
        let (a, d) = dataset(2, 3, 5, 16, 11);
        let cfg = StateLearnConfig::default();
        let t = train_state_with_restarts(&cfg, &d, a).unwrap();
        assert!(t.final_cost < 1e-8, "{}", t.final_cost);
        assert!(t.final_trace_distance().unwrap() < 1e-3);
    }
}

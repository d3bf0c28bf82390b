//! Time series of observable expectation values that stand in for
//! experimental data, generated with the exact propagator.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::hamiltonian::{HamiltonianRecord, ParamHamiltonian};
use crate::linalg::HermitianEigen;
use crate::pauli::{Pauli, PauliObservable, PauliString};
use crate::scalar::{c, Real, C};
use crate::sim::StateVector;

/// A measurable quantity: a Pauli sum on qubits or a Gell-Mann matrix on a
/// single qutrit (`index` 1..=9, with 9 the identity).
#[derive(Debug, Clone, PartialEq)]
pub enum Observable<T> {
    Pauli(PauliObservable<T>),
    GellMann(usize),
}

impl<T: Real> Observable<T> {
    pub fn label(&self) -> String {
        match self {
            Observable::Pauli(o) => o.label(),
            Observable::GellMann(k) => format!("lambda_{k}"),
        }
    }

    pub fn as_pauli(&self) -> Option<&PauliObservable<T>> {
        match self {
            Observable::Pauli(o) => Some(o),
            Observable::GellMann(_) => None,
        }
    }

    /// Bound on `|<O>|` used by the record sanity check.
    pub fn bound(&self) -> T {
        match self {
            Observable::Pauli(o) => o.weight_l1(),
            Observable::GellMann(9) => T::one(),
            Observable::GellMann(8) => T::lit(2.0 / 3f64.sqrt()),
            Observable::GellMann(_) => T::one(),
        }
    }
}

impl<T: Real> From<PauliObservable<T>> for Observable<T> {
    fn from(o: PauliObservable<T>) -> Self {
        Observable::Pauli(o)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged, bound = "T: Real")]
enum ObservableRepr<T> {
    Label(String),
    Pauli(PauliObservable<T>),
}

impl<T: Real> Serialize for Observable<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Observable::Pauli(o) => ObservableRepr::Pauli(o.clone()).serialize(s),
            Observable::GellMann(k) => ObservableRepr::<T>::Label(format!("lambda_{k}")).serialize(s),
        }
    }
}

impl<'de, T: Real> Deserialize<'de> for Observable<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match ObservableRepr::<T>::deserialize(d)? {
            ObservableRepr::Pauli(o) => Ok(Observable::Pauli(o)),
            ObservableRepr::Label(l) => l
                .strip_prefix("lambda_")
                .and_then(|k| k.parse().ok())
                .filter(|k| (1..=9).contains(k))
                .map(Observable::GellMann)
                .ok_or_else(|| serde::de::Error::custom(format!("unknown observable `{l}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetMode {
    /// Known initial states, unknown Hamiltonian.
    HamiltonianLearning,
    /// Known Hamiltonians, unknown initial state.
    StateLearning,
}

/// What produced the records, enough to regenerate them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", bound = "T: Real")]
pub enum Truth<T> {
    Hamiltonian { hamiltonian: HamiltonianRecord<T> },
    State { state: StateVector<T> },
    Qutrit { coeffs: Vec<T> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct GeneratorInfo<T> {
    pub seed: u64,
    pub truth: Truth<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Record<T> {
    pub alpha: usize,
    pub i: usize,
    pub k: usize,
    pub value: T,
}

/// Records `O_{alpha,i}(k dt)` for every observable `alpha`, every state (or
/// Hamiltonian) `i` and every step `k` in `1..=num_steps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TimeSeriesDataset<T> {
    pub mode: DatasetMode,
    pub num_sites: usize,
    pub local_dim: usize,
    pub dt: T,
    pub num_steps: usize,
    pub noise_sigma: T,
    pub observables: Vec<Observable<T>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub states: Vec<StateVector<T>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hamiltonians: Vec<HamiltonianRecord<T>>,
    pub generator_info: GeneratorInfo<T>,
    pub records: Vec<Record<T>>,
}

impl<T: Real> TimeSeriesDataset<T> {
    /// Number of states (Hamiltonian learning) or Hamiltonians (state learning).
    pub fn num_series(&self) -> usize {
        match self.mode {
            DatasetMode::HamiltonianLearning => self.states.len(),
            DatasetMode::StateLearning => self.hamiltonians.len(),
        }
    }

    pub fn index(&self, alpha: usize, i: usize, k: usize) -> usize {
        (alpha * self.num_series() + i) * self.num_steps + (k - 1)
    }

    pub fn value(&self, alpha: usize, i: usize, k: usize) -> T {
        self.records[self.index(alpha, i, k)].value
    }

    /// Checks completeness, ordering and the expectation bound.
    pub fn validate(&self) -> Result<()> {
        if self.num_steps == 0 {
            return Err(Error::InvalidArgument("num_steps must be at least 1".into()));
        }
        let expected = self.observables.len() * self.num_series() * self.num_steps;
        if self.records.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: self.records.len(),
            });
        }
        let slack = T::lit(5.0) * self.noise_sigma + T::lit(1e-9);
        for alpha in 0..self.observables.len() {
            let bound = self.observables[alpha].bound() + slack;
            for i in 0..self.num_series() {
                for k in 1..=self.num_steps {
                    let r = &self.records[self.index(alpha, i, k)];
                    if (r.alpha, r.i, r.k) != (alpha, i, k) {
                        return Err(Error::Parse(format!(
                            "record out of order at ({alpha}, {i}, {k})"
                        )));
                    }
                    if !r.value.is_finite() || r.value.abs() > bound {
                        return Err(Error::InvalidArgument(format!(
                            "record ({alpha}, {i}, {k}) = {} outside bound",
                            r.value
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn pauli_observables(&self) -> Result<Vec<PauliObservable<T>>> {
        self.observables
            .iter()
            .map(|o| {
                o.as_pauli()
                    .cloned()
                    .ok_or(Error::ModeMismatch("expected Pauli observables"))
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let d: Self = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        d.validate()?;
        Ok(d)
    }

    /// `alpha,i,k,value` with ten significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("alpha,i,k,value\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.alpha,
                r.i,
                r.k,
                fmt_sig(r.value.to_f64_lossy())
            ));
        }
        out
    }

    /// Rebuilds the dataset from its provenance; matches `self` exactly when
    /// no noise was added.
    pub fn regenerate(&self) -> Result<Self> {
        match (&self.generator_info.truth, self.mode) {
            (Truth::Hamiltonian { hamiltonian }, DatasetMode::HamiltonianLearning) => {
                generate_ham_learning_data(
                    &ParamHamiltonian::from_record(hamiltonian)?,
                    &self.states,
                    &self.pauli_observables()?,
                    self.num_steps,
                    self.dt,
                    self.noise_sigma,
                    self.generator_info.seed,
                )
            }
            (Truth::State { state }, DatasetMode::StateLearning) => {
                let hs = self
                    .hamiltonians
                    .iter()
                    .map(ParamHamiltonian::from_record)
                    .collect::<Result<Vec<_>>>()?;
                generate_state_learning_data(
                    state,
                    &hs,
                    &self.pauli_observables()?,
                    self.num_steps,
                    self.dt,
                    self.noise_sigma,
                    self.generator_info.seed,
                )
            }
            (Truth::Qutrit { coeffs }, DatasetMode::HamiltonianLearning) => {
                let obs: Vec<usize> = self
                    .observables
                    .iter()
                    .map(|o| match o {
                        Observable::GellMann(k) => Ok(*k),
                        _ => Err(Error::ModeMismatch("expected Gell-Mann observables")),
                    })
                    .collect::<Result<_>>()?;
                crate::su3::generate_su3_data(
                    coeffs,
                    &self.states,
                    &obs,
                    self.num_steps,
                    self.dt,
                    self.noise_sigma,
                    self.generator_info.seed,
                )
            }
            _ => Err(Error::ModeMismatch("provenance does not match dataset mode")),
        }
    }
}

/// Ten significant digits in scientific notation.
pub fn fmt_sig(v: f64) -> String {
    format!("{v:.9e}")
}

/// Exact `<psi|U(k dt)^dag O U(k dt)|psi>` for `k = 1..=num_steps`, indexed
/// `[alpha][k - 1]`.
pub fn exact_time_series<T: Real>(
    eig: &HermitianEigen<T>,
    state: &[C<T>],
    observables: &[PauliObservable<T>],
    num_steps: usize,
    dt: T,
) -> Vec<Vec<T>> {
    let mut out = vec![Vec::with_capacity(num_steps); observables.len()];
    for k in 1..=num_steps {
        let psi = eig.evolve(dt * T::lit(k as f64), state);
        for (row, o) in out.iter_mut().zip(observables) {
            row.push(o.expectation_complex(&psi).re);
        }
    }
    out
}

fn check_observables<T: Real>(num_sites: usize, observables: &[PauliObservable<T>]) -> Result<()> {
    if observables.is_empty() {
        return Err(Error::InvalidArgument("need at least one observable".into()));
    }
    for o in observables {
        if o.num_sites() != num_sites {
            return Err(Error::DimensionMismatch {
                expected: num_sites,
                found: o.num_sites(),
            });
        }
    }
    Ok(())
}

fn add_noise<T: Real>(records: &mut [Record<T>], sigma: T, seed: u64) -> Result<()> {
    if !(sigma >= T::zero()) || !sigma.is_finite() {
        return Err(Error::InvalidArgument("noise_sigma must be finite and >= 0".into()));
    }
    if sigma == T::zero() {
        return Ok(());
    }
    let normal = Normal::new(0.0, sigma.to_f64_lossy())
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6e6f_6973_65);
    for r in records {
        r.value = r.value + T::lit(normal.sample(&mut rng));
    }
    Ok(())
}

/// Flattens `series[i][alpha][k - 1]` into `(alpha, i, k)` order.
fn flatten<T: Real>(series: &[Vec<Vec<T>>], num_obs: usize, num_steps: usize) -> Vec<Record<T>> {
    let mut records = Vec::with_capacity(num_obs * series.len() * num_steps);
    for alpha in 0..num_obs {
        for (i, s) in series.iter().enumerate() {
            for k in 1..=num_steps {
                records.push(Record {
                    alpha,
                    i,
                    k,
                    value: s[alpha][k - 1],
                });
            }
        }
    }
    records
}

pub fn generate_ham_learning_data<T: Real>(
    h_true: &ParamHamiltonian<T>,
    states: &[StateVector<T>],
    observables: &[PauliObservable<T>],
    num_steps: usize,
    dt: T,
    noise_sigma: T,
    seed: u64,
) -> Result<TimeSeriesDataset<T>> {
    if num_steps == 0 {
        return Err(Error::InvalidArgument("num_steps must be at least 1".into()));
    }
    if states.is_empty() {
        return Err(Error::InvalidArgument("need at least one initial state".into()));
    }
    if !dt.is_finite() {
        return Err(Error::NonFinite("dt"));
    }
    let n = h_true.num_sites();
    check_observables(n, observables)?;
    for s in states {
        if s.num_sites() != n || s.local_dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: s.num_sites(),
            });
        }
    }
    let eig = h_true.eigen()?;
    let series: Vec<Vec<Vec<T>>> = states
        .par_iter()
        .map(|s| exact_time_series(&eig, s.amplitudes(), observables, num_steps, dt))
        .collect();
    let mut records = flatten(&series, observables.len(), num_steps);
    add_noise(&mut records, noise_sigma, seed)?;
    Ok(TimeSeriesDataset {
        mode: DatasetMode::HamiltonianLearning,
        num_sites: n,
        local_dim: 2,
        dt,
        num_steps,
        noise_sigma,
        observables: observables.iter().cloned().map(Observable::Pauli).collect(),
        states: states.to_vec(),
        hamiltonians: Vec::new(),
        generator_info: GeneratorInfo {
            seed,
            truth: Truth::Hamiltonian {
                hamiltonian: h_true.to_record(),
            },
        },
        records,
    })
}

pub fn generate_state_learning_data<T: Real>(
    psi_true: &StateVector<T>,
    hamiltonians: &[ParamHamiltonian<T>],
    observables: &[PauliObservable<T>],
    num_steps: usize,
    dt: T,
    noise_sigma: T,
    seed: u64,
) -> Result<TimeSeriesDataset<T>> {
    if num_steps == 0 {
        return Err(Error::InvalidArgument("num_steps must be at least 1".into()));
    }
    if hamiltonians.is_empty() {
        return Err(Error::InvalidArgument("need at least one Hamiltonian".into()));
    }
    let n = psi_true.num_sites();
    check_observables(n, observables)?;
    for h in hamiltonians {
        if h.num_sites() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: h.num_sites(),
            });
        }
    }
    let series: Vec<Vec<Vec<T>>> = hamiltonians
        .par_iter()
        .map(|h| {
            let eig = h.eigen()?;
            Ok(exact_time_series(&eig, psi_true.amplitudes(), observables, num_steps, dt))
        })
        .collect::<Result<_>>()?;
    let mut records = flatten(&series, observables.len(), num_steps);
    add_noise(&mut records, noise_sigma, seed)?;
    Ok(TimeSeriesDataset {
        mode: DatasetMode::StateLearning,
        num_sites: n,
        local_dim: 2,
        dt,
        num_steps,
        noise_sigma,
        observables: observables.iter().cloned().map(Observable::Pauli).collect(),
        states: Vec::new(),
        hamiltonians: hamiltonians.iter().map(ParamHamiltonian::to_record).collect(),
        generator_info: GeneratorInfo {
            seed,
            truth: Truth::State {
                state: psi_true.clone(),
            },
        },
        records,
    })
}

/// Independent random initial states, seeded `seed, seed + 1, ...`.
pub fn random_states<T: Real>(num_sites: usize, count: usize, seed: u64) -> Result<Vec<StateVector<T>>> {
    (0..count as u64)
        .map(|s| StateVector::random(num_sites, seed.wrapping_add(s), false))
        .collect()
}

/// All two-point correlators `sigma_a^i sigma_a^j`, `i < j`.
pub fn correlator_pool<T: Real>(num_sites: usize, axis: Pauli) -> Vec<PauliObservable<T>> {
    let mut out = Vec::new();
    for i in 0..num_sites {
        for j in i + 1..num_sites {
            let s = PauliString::pair(num_sites, i, axis, j, axis).expect("valid pair");
            out.push(PauliObservable::from_string(s));
        }
    }
    out
}

/// `per_axis` correlators drawn without replacement from each axis pool, in
/// the order of `axes`.
pub fn select_correlators<T: Real>(
    num_sites: usize,
    axes: &[Pauli],
    per_axis: usize,
    seed: u64,
) -> Result<Vec<PauliObservable<T>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for &axis in axes {
        let pool = correlator_pool(num_sites, axis);
        if per_axis > pool.len() {
            return Err(Error::InvalidArgument(format!(
                "asked for {per_axis} correlators, pool has {}",
                pool.len()
            )));
        }
        let mut picked = sample(&mut rng, pool.len(), per_axis).into_vec();
        picked.sort_unstable();
        out.extend(picked.into_iter().map(|p| pool[p].clone()));
    }
    Ok(out)
}

/// `sigma_a^i sigma_a^j sigma_a^k` on the given sites.
pub fn three_point_correlator<T: Real>(
    num_sites: usize,
    axis: Pauli,
    sites: [usize; 3],
) -> Result<PauliObservable<T>> {
    let s = PauliString::from_sparse(num_sites, &sites.map(|q| (q, axis)))?;
    Ok(PauliObservable::from_string(s))
}

/// Pauli expansion of `|a><b|` over `n` qubits: `(coefficient, string)`.
fn outer_product_paulis<T: Real>(n: usize, a: usize, b: usize) -> Vec<(C<T>, Vec<Pauli>)> {
    let half = T::lit(0.5);
    let mut acc: Vec<(C<T>, Vec<Pauli>)> = vec![(c(T::one(), T::zero()), Vec::new())];
    for q in 0..n {
        let shift = n - 1 - q;
        let (x, y) = ((a >> shift) & 1, (b >> shift) & 1);
        // |x><y| as a combination of single-qubit Paulis
        let parts: [(C<T>, Pauli); 2] = match (x, y) {
            (0, 0) => [(c(half, T::zero()), Pauli::I), (c(half, T::zero()), Pauli::Z)],
            (1, 1) => [(c(half, T::zero()), Pauli::I), (c(-half, T::zero()), Pauli::Z)],
            (0, 1) => [(c(half, T::zero()), Pauli::X), (c(T::zero(), half), Pauli::Y)],
            _ => [(c(half, T::zero()), Pauli::X), (c(T::zero(), -half), Pauli::Y)],
        };
        acc = acc
            .into_iter()
            .flat_map(|(w, ops)| {
                parts.iter().map(move |(pw, p)| {
                    let mut o = ops.clone();
                    o.push(*p);
                    (w * pw, o)
                })
            })
            .collect();
    }
    acc
}

fn real_observable<T: Real>(n: usize, terms: Vec<(T, Vec<Pauli>)>) -> PauliObservable<T> {
    let tol = T::epsilon();
    let kept = terms
        .into_iter()
        .filter(|(w, _)| w.abs() > tol)
        .map(|(w, ops)| (w, PauliString::new(ops)))
        .collect();
    PauliObservable::new(n, kept).expect("consistent sizes")
}

/// Probabilities `|m><m|` for every basis state, then for each pair `m < m'`
/// the coherences `|m><m'| + |m'><m|` and `i(|m'><m| - |m><m'|)`, all as
/// Pauli sums. For one qubit this is `{(I+Z)/2, (I-Z)/2, X, Y}`.
pub fn coherence_observables<T: Real>(num_qubits: usize) -> Vec<PauliObservable<T>> {
    let n = num_qubits;
    let dim = 1usize << n;
    let mut out = Vec::with_capacity(dim * dim);
    for m in 0..dim {
        let terms = outer_product_paulis::<T>(n, m, m)
            .into_iter()
            .map(|(w, ops)| (w.re, ops))
            .collect();
        out.push(real_observable(n, terms));
    }
    for m in 0..dim {
        for mp in m + 1..dim {
            let ab = outer_product_paulis::<T>(n, m, mp);
            let sym = ab
                .iter()
                .map(|(w, ops)| (T::lit(2.0) * w.re, ops.clone()))
                .collect();
            // i(|m'><m| - |m><m'|) = i(A^dag - A) has real weight 2 Im(w)
            let anti = ab
                .iter()
                .map(|(w, ops)| (T::lit(2.0) * w.im, ops.clone()))
                .collect();
            out.push(real_observable(n, sym));
            out.push(real_observable(n, anti));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{Coefficients, Family};

    #[test]
    fn one_qubit_coherences() {
        let obs = coherence_observables::<f64>(1);
        let labels: Vec<String> = obs.iter().map(|o| o.label()).collect();
        assert_eq!(labels, vec!["0.5*I+0.5*Z", "0.5*I+-0.5*Z", "X", "Y"]);
    }

    #[test]
    fn two_qubit_set_is_complete_and_sums_to_one() {
        let obs = coherence_observables::<f64>(2);
        assert_eq!(obs.len(), 16);
        let psi = StateVector::<f64>::random(2, 3, false).unwrap();
        let total: f64 = obs[..4].iter().map(|o| psi.expectation(o).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        // coherence of |00><01| on |psi> is 2 Re(psi_0^* psi_1)
        let a = psi.amplitudes();
        let want = 2.0 * (a[0].conj() * a[1]).re;
        assert!((psi.expectation(&obs[4]).unwrap() - want).abs() < 1e-12);
        let want_anti = 2.0 * (a[0].conj() * a[1]).im;
        assert!((psi.expectation(&obs[5]).unwrap() - want_anti).abs() < 1e-12);
    }

    #[test]
    fn correlator_selection_is_per_axis_and_seeded() {
        let a = select_correlators::<f64>(5, &[Pauli::Z, Pauli::X], 3, 11).unwrap();
        let b = select_correlators::<f64>(5, &[Pauli::Z, Pauli::X], 3, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 6);
        assert!(a[..3].iter().all(|o| o.label().contains('Z') && !o.label().contains('X')));
        assert!(select_correlators::<f64>(3, &[Pauli::Z], 4, 0).is_err());
    }

    #[test]
    fn zero_hamiltonian_gives_static_records() {
        let h = ParamHamiltonian::build_family(Family::ZzXx, 3, Coefficients::Explicit(vec![0.0; 6])).unwrap();
        let states = random_states::<f64>(3, 2, 4).unwrap();
        let obs = select_correlators(3, &[Pauli::Z, Pauli::X], 1, 4).unwrap();
        let d = generate_ham_learning_data(&h, &states, &obs, 4, 0.1, 0.0, 1).unwrap();
        d.validate().unwrap();
        for alpha in 0..2 {
            for i in 0..2 {
                let e0 = states[i].expectation(&obs[alpha]).unwrap();
                for k in 1..=4 {
                    assert!((d.value(alpha, i, k) - e0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn json_round_trip_and_regeneration() {
        let h = ParamHamiltonian::<f64>::build_family(Family::TfimInhomogeneous, 3, Coefficients::Random(2)).unwrap();
        let states = random_states(3, 2, 9).unwrap();
        let obs = select_correlators(3, &[Pauli::Z], 2, 4).unwrap();
        let d = generate_ham_learning_data(&h, &states, &obs, 3, 0.1, 0.0, 5).unwrap();
        let back = TimeSeriesDataset::<f64>::from_json(&d.to_json()).unwrap();
        assert_eq!(back, d);
        let again = back.regenerate().unwrap();
        for (x, y) in again.records.iter().zip(&d.records) {
            assert!((x.value - y.value).abs() < 1e-12);
        }
        assert!(d.to_csv().starts_with("alpha,i,k,value\n0,0,1,"));
    }

    #[test]
    fn noise_is_seeded() {
        let h = ParamHamiltonian::<f64>::build_family(Family::ZzXx, 2, Coefficients::Random(2)).unwrap();
        let states = random_states(2, 1, 9).unwrap();
        let obs = correlator_pool(2, Pauli::X);
        let a = generate_ham_learning_data(&h, &states, &obs, 5, 0.1, 0.01, 5).unwrap();
        let b = generate_ham_learning_data(&h, &states, &obs, 5, 0.1, 0.01, 5).unwrap();
        let clean = generate_ham_learning_data(&h, &states, &obs, 5, 0.1, 0.0, 5).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_ne!(a.records, clean.records);
        assert!(generate_ham_learning_data(&h, &states, &obs, 0, 0.1, 0.0, 5).is_err());
    }

    #[test]
    fn gell_mann_labels_serialize() {
        let o: Observable<f64> = Observable::GellMann(4);
        let s = serde_json::to_string(&o).unwrap();
        assert_eq!(s, "\"lambda_4\"");
        assert_eq!(serde_json::from_str::<Observable<f64>>(&s).unwrap(), o);
        assert!(serde_json::from_str::<Observable<f64>>("\"lambda_12\"").is_err());
    }
}

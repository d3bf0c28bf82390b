use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::pauli::PauliObservable;
use crate::scalar::{c, cone, czero, inner, vec_norm, Real, C};

/// Normalized pure state on `num_sites` sites of dimension `local_dim`.
///
/// Basis index `b = sum_q s_q * d^(n-1-q)`: site 0 is most significant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct StateVector<T> {
    amplitudes: Vec<C<T>>,
    num_sites: usize,
    local_dim: usize,
}

impl<T: Real> StateVector<T> {
    /// `|0...0>` on qubits.
    pub fn zero_state(num_sites: usize) -> Self {
        Self::basis_state(num_sites, 2, 0).expect("index 0 always valid")
    }

    pub fn basis_state(num_sites: usize, local_dim: usize, index: usize) -> Result<Self> {
        let dim = checked_dim(num_sites, local_dim)?;
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amplitudes = vec![czero(); dim];
        amplitudes[index] = cone();
        Ok(Self {
            amplitudes,
            num_sites,
            local_dim,
        })
    }

    /// Normalizes the given amplitudes.
    pub fn from_amplitudes(amplitudes: Vec<C<T>>, num_sites: usize, local_dim: usize) -> Result<Self> {
        let dim = checked_dim(num_sites, local_dim)?;
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: amplitudes.len(),
            });
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite("amplitude"));
        }
        let norm = vec_norm(&amplitudes);
        if norm <= T::min_positive_value() {
            return Err(Error::InvalidArgument("zero vector is not a state".into()));
        }
        let amplitudes = amplitudes.into_iter().map(|a| a / norm).collect();
        Ok(Self {
            amplitudes,
            num_sites,
            local_dim,
        })
    }

    /// Random qubit state: Gaussian amplitudes normalized (Haar measure for
    /// complex amplitudes).
    pub fn random(num_sites: usize, seed: u64, real_only: bool) -> Result<Self> {
        Self::random_qudit(num_sites, 2, seed, real_only)
    }

    pub fn random_qudit(num_sites: usize, local_dim: usize, seed: u64, real_only: bool) -> Result<Self> {
        let dim = checked_dim(num_sites, local_dim)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amps = (0..dim)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = if real_only {
                    0.0
                } else {
                    StandardNormal.sample(&mut rng)
                };
                c(T::lit(re), T::lit(im))
            })
            .collect();
        Self::from_amplitudes(amps, num_sites, local_dim)
    }

    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C<T>> {
        self.amplitudes
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> T {
        vec_norm(&self.amplitudes)
    }

    pub fn overlap(&self, other: &Self) -> C<T> {
        inner(&self.amplitudes, &other.amplitudes)
    }

    pub fn is_real(&self, tol: T) -> bool {
        self.amplitudes.iter().all(|a| a.im.abs() <= tol)
    }

    fn require_qubits(&self) -> Result<()> {
        if self.local_dim != 2 {
            return Err(Error::InvalidArgument(format!(
                "gates act on qubits, state has local dimension {}",
                self.local_dim
            )));
        }
        Ok(())
    }

    pub fn apply_gate_mut(&mut self, gate: &Gate<T>) -> Result<()> {
        self.require_qubits()?;
        gate.validate(self.num_sites)?;
        gate.apply_in_place(&mut self.amplitudes, self.num_sites);
        Ok(())
    }

    pub fn apply_gate(&self, gate: &Gate<T>) -> Result<Self> {
        let mut out = self.clone();
        out.apply_gate_mut(gate)?;
        Ok(out)
    }

    pub fn apply_circuit_mut(&mut self, circuit: &Circuit<T>) -> Result<()> {
        self.require_qubits()?;
        if circuit.num_sites() != self.num_sites {
            return Err(Error::DimensionMismatch {
                expected: self.num_sites,
                found: circuit.num_sites(),
            });
        }
        circuit.validate()?;
        for g in circuit.gates() {
            g.apply_in_place(&mut self.amplitudes, self.num_sites);
        }
        Ok(())
    }

    pub fn apply_circuit(&self, circuit: &Circuit<T>) -> Result<Self> {
        let mut out = self.clone();
        out.apply_circuit_mut(circuit)?;
        Ok(out)
    }

    fn check_observable(&self, obs: &PauliObservable<T>) -> Result<()> {
        self.require_qubits()?;
        if obs.num_sites() != self.num_sites {
            return Err(Error::DimensionMismatch {
                expected: self.num_sites,
                found: obs.num_sites(),
            });
        }
        Ok(())
    }

    /// `<psi|O|psi>` before truncation to the real part.
    pub fn expectation_complex(&self, obs: &PauliObservable<T>) -> Result<C<T>> {
        self.check_observable(obs)?;
        Ok(obs.expectation_complex(&self.amplitudes))
    }

    pub fn expectation(&self, obs: &PauliObservable<T>) -> Result<T> {
        Ok(self.expectation_complex(obs)?.re)
    }
}

fn checked_dim(num_sites: usize, local_dim: usize) -> Result<usize> {
    if num_sites == 0 {
        return Err(Error::InvalidArgument("need at least one site".into()));
    }
    if !(2..=3).contains(&local_dim) {
        return Err(Error::InvalidArgument(format!(
            "local dimension must be 2 or 3, got {local_dim}"
        )));
    }
    let dim = (local_dim as u64)
        .checked_pow(num_sites as u32)
        .filter(|d| *d <= 1 << 26)
        .ok_or_else(|| Error::InvalidArgument("register too large".into()))?;
    Ok(dim as usize)
}

/// `T(a, b) = sqrt(1 - |<a|b>|^2)` for pure states.
pub fn trace_distance_states<T: Real>(a: &StateVector<T>, b: &StateVector<T>) -> Result<T> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let f = a.overlap(b).norm_sqr().min(T::one());
    Ok((T::one() - f).max(T::zero()).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use crate::pauli::Pauli;

    #[test]
    fn basis_expectations() {
        let zero = StateVector::<f64>::zero_state(1);
        let z = PauliObservable::magnetization(1, Pauli::Z);
        assert!((zero.expectation(&z).unwrap() - 1.0).abs() < 1e-15);
        let plus = zero.apply_gate(&Gate::ry(0, std::f64::consts::FRAC_PI_2)).unwrap();
        let x = PauliObservable::magnetization(1, Pauli::X);
        assert!((plus.expectation(&x).unwrap() - 1.0).abs() < 1e-15);
        assert!(zero.expectation(&PauliObservable::magnetization(2, Pauli::Z)).is_err());
    }

    #[test]
    fn random_states_are_seeded_and_normalized() {
        let a = StateVector::<f64>::random(4, 5, false).unwrap();
        let b = StateVector::<f64>::random(4, 5, false).unwrap();
        assert_eq!(a, b);
        assert!((a.norm() - 1.0).abs() < 1e-12);
        let r = StateVector::<f64>::random(4, 6, true).unwrap();
        assert!(r.is_real(0.0));
        assert!(StateVector::<f64>::random(0, 1, false).is_err());
    }

    #[test]
    fn random_states_spread_out() {
        let states: Vec<_> = (0..8).map(|s| StateVector::<f64>::random(5, s, false).unwrap()).collect();
        let mut sum = 0.0;
        for i in 0..8 {
            for j in 0..8 {
                if i != j {
                    sum += states[i].overlap(&states[j]).norm_sqr();
                }
            }
        }
        assert!(sum / 56.0 < 0.2);
    }

    #[test]
    fn trace_distance_limits_and_oracle() {
        let a = StateVector::<f64>::random(2, 1, false).unwrap();
        let b = StateVector::<f64>::random(2, 2, false).unwrap();
        assert!(trace_distance_states(&a, &a).unwrap() < 1e-7);
        let e0 = StateVector::<f64>::basis_state(2, 2, 0).unwrap();
        let e3 = StateVector::<f64>::basis_state(2, 2, 3).unwrap();
        assert!((trace_distance_states(&e0, &e3).unwrap() - 1.0).abs() < 1e-15);
        let want = oracle::state_trace_distance(a.amplitudes(), b.amplitudes());
        assert!((trace_distance_states(&a, &b).unwrap() - want).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_amplitudes() {
        assert!(StateVector::<f64>::from_amplitudes(vec![C::new(1.0, 0.0); 3], 2, 2).is_err());
        assert!(StateVector::<f64>::basis_state(2, 2, 4).is_err());
    }
}

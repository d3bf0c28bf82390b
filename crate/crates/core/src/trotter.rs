//! First-order product-formula circuits for 2-local Hamiltonians.
//!
//! Each two-site term `c P_i P_j` becomes `E R(2c tau) E` where the entangler
//! `E` (a CNOT or CY) conjugates a single-qubit rotation into the target
//! Pauli pair. Terms sharing a pair are emitted back to back and equal
//! adjacent entanglers are cancelled afterwards.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::hamiltonian::ParamHamiltonian;
use crate::linalg::CMatrix;
use crate::pauli::{Pauli, PauliString};
use crate::scalar::Real;
use crate::sim::{Circuit, Gate, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrotterOptions {
    /// Remove identical adjacent entanglers after emission.
    pub cancel: bool,
}

impl Default for TrotterOptions {
    fn default() -> Self {
        Self { cancel: true }
    }
}

/// Compiled `U(dt)` with its parameter-to-angle bookkeeping.
#[derive(Debug, Clone)]
pub struct TrotterPlan<T> {
    hamiltonian: ParamHamiltonian<T>,
    dt: T,
    steps_per_dt: usize,
    base_circuit: Circuit<T>,
    gate_term: Vec<Option<usize>>,
    gate_param: Vec<Option<usize>>,
    param_to_gate: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Entangler {
    CnotForward,
    CnotBackward,
    CyForward,
    CyBackward,
}

/// Entangler and rotated qubit for `a_i b_j` with `i < j`.
fn compile_pair(a: Pauli, b: Pauli) -> (Entangler, Pauli, bool) {
    use Entangler::*;
    use Pauli::*;
    // (entangler, rotation axis, rotate the first site?)
    match (a, b) {
        (X, X) => (CnotForward, X, true),
        (Z, Z) => (CnotForward, Z, false),
        (Y, X) => (CnotForward, Y, true),
        (Z, Y) => (CnotForward, Y, false),
        (X, Y) => (CnotBackward, Y, false),
        (Y, Z) => (CnotBackward, Y, true),
        (Y, Y) => (CyForward, Y, true),
        (Z, X) => (CyForward, X, false),
        (X, Z) => (CyBackward, X, true),
        _ => unreachable!("identity factors are filtered earlier"),
    }
}

fn entangler_gate<T: Real>(e: Entangler, i: usize, j: usize) -> Gate<T> {
    match e {
        Entangler::CnotForward => Gate::cnot(i, j),
        Entangler::CnotBackward => Gate::cnot(j, i),
        Entangler::CyForward => Gate::cy(i, j),
        Entangler::CyBackward => Gate::cy(j, i),
    }
}

/// Greedy proper edge colouring in the given edge order.
fn colour_edges(edges: &[(usize, usize)], num_sites: usize) -> Vec<usize> {
    let mut used: Vec<Vec<usize>> = vec![Vec::new(); num_sites];
    edges
        .iter()
        .map(|&(i, j)| {
            let colour = (0..)
                .find(|c| !used[i].contains(c) && !used[j].contains(c))
                .expect("unbounded search");
            used[i].push(colour);
            used[j].push(colour);
            colour
        })
        .collect()
}

/// Drops pairs of identical two-site gates with nothing touching their
/// qubits in between, until no pair remains.
fn cancel_entanglers<T: Real>(gates: &mut Vec<Gate<T>>, tags: &mut Vec<Option<usize>>) {
    loop {
        let mut removed = false;
        let mut p = 0;
        while p < gates.len() {
            if gates[p].is_two_site() && gates[p].angle().is_none() {
                let sites = gates[p].sites();
                let next = (p + 1..gates.len())
                    .find(|&q| gates[q].sites().iter().any(|s| sites.contains(s)));
                if let Some(q) = next {
                    if gates[q] == gates[p] {
                        gates.remove(q);
                        tags.remove(q);
                        gates.remove(p);
                        tags.remove(p);
                        removed = true;
                        continue;
                    }
                }
            }
            p += 1;
        }
        if !removed {
            break;
        }
    }
}

impl<T: Real> TrotterPlan<T> {
    pub fn build(h: &ParamHamiltonian<T>, dt: T, steps_per_dt: usize) -> Result<Self> {
        Self::build_with(h, dt, steps_per_dt, TrotterOptions::default())
    }

    pub fn build_with(
        h: &ParamHamiltonian<T>,
        dt: T,
        steps_per_dt: usize,
        options: TrotterOptions,
    ) -> Result<Self> {
        if !dt.is_finite() || dt <= T::zero() {
            return Err(Error::InvalidArgument("dt must be positive and finite".into()));
        }
        if steps_per_dt == 0 {
            return Err(Error::InvalidArgument("steps_per_dt must be at least 1".into()));
        }
        let n = h.num_sites();
        let tau = dt / T::lit(steps_per_dt as f64);
        let coeffs = h.term_coeffs();
        let owner = h.term_owner();

        let mut singles: Vec<usize> = Vec::new();
        let mut pairs: BTreeMap<(usize, usize), Vec<(Entangler, usize)>> = BTreeMap::new();
        for (t, s) in h.terms().iter().enumerate() {
            match s.support().as_slice() {
                [_] => singles.push(t),
                [i, j] => {
                    let (e, _, _) = compile_pair(s.op(*i), s.op(*j));
                    pairs.entry((*i, *j)).or_default().push((e, t));
                }
                _ => return Err(Error::NotTwoLocal(s.to_string())),
            }
        }
        for terms in pairs.values_mut() {
            terms.sort();
        }
        let edges: Vec<(usize, usize)> = pairs.keys().copied().collect();
        let colours = colour_edges(&edges, n);
        let num_colours = colours.iter().map(|c| c + 1).max().unwrap_or(0);

        let mut step: Vec<Gate<T>> = Vec::new();
        let mut step_tags: Vec<Option<usize>> = Vec::new();
        for &t in &singles {
            let site = h.terms()[t].support()[0];
            let axis = h.terms()[t].op(site);
            let angle = T::lit(2.0) * coeffs[t] * tau;
            step.push(Gate::rotation(axis, site, angle).expect("non-identity"));
            step_tags.push(Some(t));
        }
        for colour in 0..num_colours {
            for (edge, _) in edges.iter().zip(&colours).filter(|(_, c)| **c == colour) {
                let (i, j) = *edge;
                for &(_, t) in &pairs[edge] {
                    let s = &h.terms()[t];
                    let (e, axis, first) = compile_pair(s.op(i), s.op(j));
                    let site = if first { i } else { j };
                    let angle = T::lit(2.0) * coeffs[t] * tau;
                    step.push(entangler_gate(e, i, j));
                    step_tags.push(None);
                    step.push(Gate::rotation(axis, site, angle).expect("non-identity"));
                    step_tags.push(Some(t));
                    step.push(entangler_gate(e, i, j));
                    step_tags.push(None);
                }
            }
        }

        let mut gates = Vec::with_capacity(step.len() * steps_per_dt);
        let mut gate_term = Vec::with_capacity(step.len() * steps_per_dt);
        for _ in 0..steps_per_dt {
            gates.extend_from_slice(&step);
            gate_term.extend_from_slice(&step_tags);
        }
        if options.cancel {
            cancel_entanglers(&mut gates, &mut gate_term);
        }
        let gate_param: Vec<Option<usize>> =
            gate_term.iter().map(|t| t.map(|t| owner[t])).collect();
        let mut param_to_gate = vec![Vec::new(); h.num_params()];
        for (g, p) in gate_param.iter().enumerate() {
            if let Some(p) = p {
                param_to_gate[*p].push(g);
            }
        }
        Ok(Self {
            hamiltonian: h.clone(),
            dt,
            steps_per_dt,
            base_circuit: Circuit::from_gates(n, gates)?,
            gate_term,
            gate_param,
            param_to_gate,
        })
    }

    pub fn hamiltonian(&self) -> &ParamHamiltonian<T> {
        &self.hamiltonian
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn steps_per_dt(&self) -> usize {
        self.steps_per_dt
    }

    pub fn num_sites(&self) -> usize {
        self.base_circuit.num_sites()
    }

    pub fn base_circuit(&self) -> &Circuit<T> {
        &self.base_circuit
    }

    /// Hamiltonian term behind each gate of the base circuit, if any.
    pub fn gate_terms(&self) -> &[Option<usize>] {
        &self.gate_term
    }

    /// Learnable parameter behind each gate of the base circuit, if any.
    pub fn gate_params(&self) -> &[Option<usize>] {
        &self.gate_param
    }

    pub fn param_to_gate(&self) -> &[Vec<usize>] {
        &self.param_to_gate
    }

    /// `d angle / d param`, identical for every slot.
    pub fn angle_scale(&self) -> T {
        T::lit(2.0) * self.dt / T::lit(self.steps_per_dt as f64)
    }

    /// Same circuit with angles recomputed from new parameters.
    pub fn bind(&self, params: &[T]) -> Result<Self> {
        let hamiltonian = self.hamiltonian.with_params(params)?;
        let scale = self.angle_scale();
        let mut out = self.clone();
        for (g, p) in out.base_circuit.gates_mut().iter_mut().zip(&self.gate_param) {
            if let Some(p) = p {
                *g = g.with_angle(scale * params[*p]);
            }
        }
        out.hamiltonian = hamiltonian;
        Ok(out)
    }

    /// Applies the base circuit `k` times.
    pub fn evolve(&self, state: &StateVector<T>, k: usize) -> Result<StateVector<T>> {
        let mut out = state.clone();
        for _ in 0..k {
            out.apply_circuit_mut(&self.base_circuit)?;
        }
        Ok(out)
    }

    /// Circuit for `k` repetitions of the base step.
    pub fn repeated(&self, k: usize) -> Circuit<T> {
        let mut c = Circuit::new(self.num_sites());
        for _ in 0..k {
            c.extend(&self.base_circuit).expect("same register");
        }
        c
    }

    pub fn unitary(&self) -> Result<CMatrix<T>> {
        self.base_circuit.unitary()
    }
}

/// Operator norm of `U_trotter(t; steps) - exp(-iHt)`.
pub fn splitting_error<T: Real>(h: &ParamHamiltonian<T>, t: T, steps: usize) -> Result<T> {
    if !t.is_finite() || t < T::zero() {
        return Err(Error::InvalidArgument("t must be finite and non-negative".into()));
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    let exact = h.exact_evolution(t)?;
    if t == T::zero() {
        return Ok(T::zero());
    }
    let approx = TrotterPlan::build(h, t, steps)?.unitary()?;
    Ok(approx.sub(&exact).operator_norm())
}

/// Error of a single product-formula step of length `t / steps`.
pub fn step_splitting_error<T: Real>(h: &ParamHamiltonian<T>, t: T, steps: usize) -> Result<T> {
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    splitting_error(h, t / T::lit(steps as f64), 1)
}

/// Canonical order for terms sharing a support pair; exposed for callers
/// that need to predict emission order.
pub fn pair_entangler_rank(s: &PauliString) -> Option<usize> {
    match s.support().as_slice() {
        [i, j] => Some(compile_pair(s.op(*i), s.op(*j)).0 as usize),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{xyz_chain, Coefficients, Family};
    use crate::oracle;
    use num_complex::Complex64;

    fn two_site_matrix(s: &str, theta: f64) -> oracle::Dense {
        let p: PauliString = s.parse().unwrap();
        let m = oracle::string_matrix(&p);
        oracle::expm(&m.scale(Complex64::new(0.0, -theta / 2.0)))
    }

    #[test]
    fn every_pair_compiles_to_its_rotation() {
        let labels = ["XX", "XY", "XZ", "YX", "YY", "YZ", "ZX", "ZY", "ZZ"];
        for label in labels {
            let s: PauliString = label.parse().unwrap();
            let h = ParamHamiltonian::custom(2, vec![s], vec![0.37]).unwrap();
            let plan = TrotterPlan::build(&h, 0.8, 1).unwrap();
            assert_eq!(plan.base_circuit().len(), 3, "{label}");
            let u = oracle::circuit_matrix(plan.base_circuit());
            let want = two_site_matrix(label, 2.0 * 0.37 * 0.8);
            assert!(u.sub(&want).max_abs() < 1e-12, "{label}");
        }
    }

    #[test]
    fn xyz_chain_gate_counts_and_depth() {
        for n in [4usize, 8] {
            let h = xyz_chain::<f64>(n, Coefficients::Random(3)).unwrap();
            let opt = TrotterPlan::build(&h, 0.1, 1).unwrap();
            assert_eq!(opt.base_circuit().two_site_count(), 4 * n - 4);
        }
        let h = xyz_chain::<f64>(4, Coefficients::Random(3)).unwrap();
        let raw = TrotterPlan::build_with(&h, 0.1, 1, TrotterOptions { cancel: false }).unwrap();
        let opt = TrotterPlan::build(&h, 0.1, 1).unwrap();
        assert_eq!(raw.base_circuit().depth(), 18);
        assert_eq!(opt.base_circuit().depth(), 12);
        let a = oracle::circuit_matrix(raw.base_circuit());
        let b = oracle::circuit_matrix(opt.base_circuit());
        assert!(a.sub(&b).max_abs() < 1e-12);
    }

    #[test]
    fn depth_is_constant_along_chains() {
        let depths: Vec<usize> = (4..=10)
            .map(|n| {
                let h = xyz_chain::<f64>(n, Coefficients::Random(1)).unwrap();
                TrotterPlan::build(&h, 0.1, 1).unwrap().base_circuit().depth()
            })
            .collect();
        assert!(depths.iter().all(|&d| d == depths[0]), "{depths:?}");
    }

    #[test]
    fn single_term_is_exact() {
        let zz: PauliString = "ZIZ".parse().unwrap();
        let h = ParamHamiltonian::custom(3, vec![zz], vec![0.9]).unwrap();
        for r in [1, 3, 7] {
            assert!(splitting_error(&h, 1.3, r).unwrap() < 1e-12);
        }
    }

    #[test]
    fn commuting_terms_have_no_splitting_error() {
        let mut terms = Vec::new();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            terms.push(PauliString::pair(3, i, Pauli::Z, j, Pauli::Z).unwrap());
        }
        let h = ParamHamiltonian::custom(3, terms, vec![0.3, -0.8, 0.5]).unwrap();
        assert!(splitting_error(&h, 1.0, 1).unwrap() < 1e-12);
        assert_eq!(splitting_error(&h, 0.0, 4).unwrap(), 0.0);
    }

    #[test]
    fn parameter_linkage() {
        let h = ParamHamiltonian::<f64>::build_family(Family::TfimHomogeneous, 4, Coefficients::Random(2)).unwrap();
        let plan = TrotterPlan::build(&h, 0.1, 3).unwrap();
        assert_eq!(plan.param_to_gate().len(), 2);
        assert!(plan.param_to_gate().iter().all(|g| !g.is_empty()));
        let mut p = h.params().to_vec();
        p[1] += 0.01;
        let moved = plan.bind(&p).unwrap();
        for (g, (a, b)) in plan
            .base_circuit()
            .gates()
            .iter()
            .zip(moved.base_circuit().gates())
            .enumerate()
        {
            let delta = b.angle().unwrap_or(0.0) - a.angle().unwrap_or(0.0);
            if plan.gate_params()[g] == Some(1) {
                assert!((delta - 2.0 * 0.01 * 0.1 / 3.0).abs() < 1e-14);
            } else {
                assert_eq!(delta, 0.0);
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let h = ParamHamiltonian::<f64>::build_family(Family::ZzXx, 3, Coefficients::Random(2)).unwrap();
        assert!(TrotterPlan::build(&h, 0.0, 1).is_err());
        assert!(TrotterPlan::build(&h, 0.1, 0).is_err());
        let zzz: PauliString = "ZZZ".parse().unwrap();
        let k = ParamHamiltonian::custom(3, vec![zzz], vec![1.0]).unwrap();
        assert!(matches!(TrotterPlan::build(&k, 0.1, 1), Err(Error::NotTwoLocal(_))));
    }

    #[test]
    fn evolve_composes() {
        let h = ParamHamiltonian::<f64>::build_family(Family::ZzXx, 3, Coefficients::Random(5)).unwrap();
        let plan = TrotterPlan::build(&h, 0.1, 2).unwrap();
        let psi = StateVector::random(3, 9, false).unwrap();
        assert_eq!(plan.evolve(&psi, 0).unwrap(), psi);
        let two = plan.evolve(&psi, 2).unwrap();
        let once_twice = plan.evolve(&plan.evolve(&psi, 1).unwrap(), 1).unwrap();
        assert_eq!(two, once_twice);
    }
}

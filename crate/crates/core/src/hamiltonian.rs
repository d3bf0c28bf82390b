//! Parameterized 2-local Hamiltonians in the Pauli basis, their dense
//! matrices, and the exact propagator used to generate ground truth.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_cap, CMatrix, HermitianEigen};
use crate::pauli::{Pauli, PauliMasks, PauliString};
use crate::scalar::{c, czero, vec_norm, Real, C};

const AXES: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Generic2local,
    ZzXx,
    TfimInhomogeneous,
    TfimHomogeneous,
    Custom,
}

impl Family {
    pub fn tag(self) -> &'static str {
        match self {
            Family::Generic2local => "generic-2local",
            Family::ZzXx => "zz-xx",
            Family::TfimInhomogeneous => "tfim-inhomogeneous",
            Family::TfimHomogeneous => "tfim-homogeneous",
            Family::Custom => "custom",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "generic-2local" => Family::Generic2local,
            "zz-xx" => Family::ZzXx,
            "tfim-inhomogeneous" => Family::TfimInhomogeneous,
            "tfim-homogeneous" => Family::TfimHomogeneous,
            "custom" => Family::Custom,
            other => return Err(Error::UnknownFamily(other.to_string())),
        })
    }
}

/// Where the coefficients of a freshly built family come from.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficients<T> {
    /// Uniform in `[-1, 1]` from the given seed.
    Random(u64),
    Explicit(Vec<T>),
}

/// `H = sum_j params[j] * sum_{t in groups[j]} terms[t]`.
///
/// Most families have one term per parameter; homogeneous families share a
/// parameter across a group of terms.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamHamiltonian<T> {
    family: Family,
    num_sites: usize,
    terms: Vec<PauliString>,
    groups: Vec<Vec<usize>>,
    params: Vec<T>,
}

impl<T: Real> ParamHamiltonian<T> {
    /// One parameter per term.
    pub fn custom(num_sites: usize, terms: Vec<PauliString>, coeffs: Vec<T>) -> Result<Self> {
        let groups = (0..terms.len()).map(|t| vec![t]).collect();
        Self::with_groups(Family::Custom, num_sites, terms, groups, coeffs)
    }

    pub fn with_groups(
        family: Family,
        num_sites: usize,
        terms: Vec<PauliString>,
        groups: Vec<Vec<usize>>,
        params: Vec<T>,
    ) -> Result<Self> {
        if num_sites == 0 {
            return Err(Error::InvalidArgument("need at least one site".into()));
        }
        let mut seen = HashSet::new();
        for t in &terms {
            if t.num_sites() != num_sites {
                return Err(Error::DimensionMismatch {
                    expected: num_sites,
                    found: t.num_sites(),
                });
            }
            if t.is_identity() {
                return Err(Error::InvalidArgument("identity term in basis".into()));
            }
            if family != Family::Custom && t.weight() > 2 {
                return Err(Error::NotTwoLocal(t.to_string()));
            }
            if !seen.insert(t.clone()) {
                return Err(Error::InvalidArgument(format!("duplicate basis term {t}")));
            }
        }
        if groups.len() != params.len() {
            return Err(Error::DimensionMismatch {
                expected: groups.len(),
                found: params.len(),
            });
        }
        let mut owner = vec![false; terms.len()];
        for g in &groups {
            if g.is_empty() {
                return Err(Error::InvalidArgument("empty parameter group".into()));
            }
            for &t in g {
                if t >= terms.len() || owner[t] {
                    return Err(Error::InvalidArgument(
                        "parameter groups must partition the terms".into(),
                    ));
                }
                owner[t] = true;
            }
        }
        if owner.iter().any(|o| !o) {
            return Err(Error::InvalidArgument(
                "parameter groups must partition the terms".into(),
            ));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("coefficient"));
        }
        Ok(Self {
            family,
            num_sites,
            terms,
            groups,
            params,
        })
    }

    /// Builds one of the named families on `num_sites >= 2` sites.
    ///
    /// Term orders: `generic-2local` is lexicographic in `(i, j, beta, gamma)`;
    /// `zz-xx` lists every ZZ pair then every XX pair; the TFIM families list
    /// the `n` single-site X fields then the `n-1` nearest-neighbour ZZ bonds.
    pub fn build_family(family: Family, num_sites: usize, coeffs: Coefficients<T>) -> Result<Self> {
        if num_sites < 2 {
            return Err(Error::InvalidArgument("families need at least two sites".into()));
        }
        let n = num_sites;
        let pair = |i, a, j, b| PauliString::pair(n, i, a, j, b).expect("valid pair");
        let mut terms = Vec::new();
        match family {
            Family::Generic2local => {
                for i in 0..n {
                    for j in i + 1..n {
                        for a in AXES {
                            for b in AXES {
                                terms.push(pair(i, a, j, b));
                            }
                        }
                    }
                }
            }
            Family::ZzXx => {
                for axis in [Pauli::Z, Pauli::X] {
                    for i in 0..n {
                        for j in i + 1..n {
                            terms.push(pair(i, axis, j, axis));
                        }
                    }
                }
            }
            Family::TfimInhomogeneous | Family::TfimHomogeneous => {
                for i in 0..n {
                    terms.push(PauliString::single(n, i, Pauli::X).expect("site in range"));
                }
                for i in 0..n - 1 {
                    terms.push(pair(i, Pauli::Z, i + 1, Pauli::Z));
                }
            }
            Family::Custom => {
                return Err(Error::InvalidArgument(
                    "custom Hamiltonians need an explicit basis".into(),
                ))
            }
        }
        let groups: Vec<Vec<usize>> = if family == Family::TfimHomogeneous {
            vec![(0..n).collect(), (n..2 * n - 1).collect()]
        } else {
            (0..terms.len()).map(|t| vec![t]).collect()
        };
        let params = match coeffs {
            Coefficients::Random(seed) => uniform_params(groups.len(), seed),
            Coefficients::Explicit(v) => v,
        };
        Self::with_groups(family, n, terms, groups, params)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn dim(&self) -> usize {
        1 << self.num_sites
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    /// Same structure with new parameter values.
    pub fn with_params(&self, params: &[T]) -> Result<Self> {
        if params.len() != self.params.len() {
            return Err(Error::DimensionMismatch {
                expected: self.params.len(),
                found: params.len(),
            });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("coefficient"));
        }
        let mut out = self.clone();
        out.params = params.to_vec();
        Ok(out)
    }

    /// Per-term coefficients after expanding parameter groups.
    pub fn term_coeffs(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.terms.len()];
        for (g, p) in self.groups.iter().zip(&self.params) {
            for &t in g {
                out[t] = *p;
            }
        }
        out
    }

    /// Index of the parameter controlling each term.
    pub fn term_owner(&self) -> Vec<usize> {
        let mut out = vec![0; self.terms.len()];
        for (j, g) in self.groups.iter().enumerate() {
            for &t in g {
                out[t] = j;
            }
        }
        out
    }

    /// `sum |coeff|` over terms; bounds the operator norm.
    pub fn l1_norm(&self) -> T {
        self.term_coeffs().iter().map(|c| c.abs()).sum()
    }

    pub fn dense_matrix(&self) -> Result<CMatrix<T>> {
        let dim = self.dim();
        check_cap(dim)?;
        let mut m = CMatrix::zeros(dim);
        for (s, w) in self.terms.iter().zip(self.term_coeffs()) {
            let masks = s.masks();
            for b in 0..dim {
                m[(b ^ masks.x, b)] = m[(b ^ masks.x, b)] + masks.phase::<T>(b) * w;
            }
        }
        Ok(m)
    }

    pub fn eigen(&self) -> Result<HermitianEigen<T>> {
        Ok(HermitianEigen::new(&self.dense_matrix()?))
    }

    /// `exp(-i H t)` through the eigendecomposition of the dense matrix.
    pub fn exact_evolution(&self, t: T) -> Result<CMatrix<T>> {
        if !t.is_finite() {
            return Err(Error::NonFinite("evolution time"));
        }
        Ok(self.eigen()?.propagator(t))
    }

    pub fn sparse(&self) -> PauliSum<T> {
        PauliSum::new(
            self.num_sites,
            self.terms
                .iter()
                .zip(self.term_coeffs())
                .map(|(s, w)| (w, s.masks()))
                .collect(),
        )
    }

    /// Sparse operator `dH/dparams[j]`.
    pub fn derivative_operator(&self, j: usize) -> PauliSum<T> {
        PauliSum::new(
            self.num_sites,
            self.groups[j]
                .iter()
                .map(|&t| (T::one(), self.terms[t].masks()))
                .collect(),
        )
    }

    pub fn to_record(&self) -> HamiltonianRecord<T> {
        HamiltonianRecord {
            family: self.family,
            num_sites: self.num_sites,
            basis: self.terms.clone(),
            coeffs: self.term_coeffs(),
            groups: (self.groups.iter().any(|g| g.len() != 1)).then(|| self.groups.clone()),
        }
    }

    pub fn from_record(rec: &HamiltonianRecord<T>) -> Result<Self> {
        if rec.coeffs.len() != rec.basis.len() {
            return Err(Error::DimensionMismatch {
                expected: rec.basis.len(),
                found: rec.coeffs.len(),
            });
        }
        let groups = match &rec.groups {
            Some(g) => g.clone(),
            None => (0..rec.basis.len()).map(|t| vec![t]).collect(),
        };
        let mut params = Vec::with_capacity(groups.len());
        for g in &groups {
            let first = *g
                .first()
                .ok_or_else(|| Error::InvalidArgument("empty parameter group".into()))?;
            let v = *rec
                .coeffs
                .get(first)
                .ok_or_else(|| Error::InvalidArgument("group index out of range".into()))?;
            if g.iter().any(|&t| rec.coeffs.get(t) != Some(&v)) {
                return Err(Error::InvalidArgument(
                    "grouped terms must share one coefficient".into(),
                ));
            }
            params.push(v);
        }
        Self::with_groups(rec.family, rec.num_sites, rec.basis.clone(), groups, params)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_record()).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rec: HamiltonianRecord<T> =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_record(&rec)
    }
}

/// Nearest-neighbour XYZ chain: bonds `(i, i+1)` carry XX, YY and ZZ terms
/// with independent coefficients, in that order.
pub fn xyz_chain<T: Real>(num_sites: usize, coeffs: Coefficients<T>) -> Result<ParamHamiltonian<T>> {
    if num_sites < 2 {
        return Err(Error::InvalidArgument("chain needs at least two sites".into()));
    }
    let mut terms = Vec::new();
    for i in 0..num_sites - 1 {
        for a in AXES {
            terms.push(PauliString::pair(num_sites, i, a, i + 1, a)?);
        }
    }
    let params = match coeffs {
        Coefficients::Random(seed) => uniform_params(terms.len(), seed),
        Coefficients::Explicit(v) => v,
    };
    ParamHamiltonian::custom(num_sites, terms, params)
}

/// Uniform `[-1, 1]` draws, generated in `f64` for cross-precision determinism.
pub fn uniform_params<T: Real>(count: usize, seed: u64) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| T::lit(rng.gen_range(-1.0..=1.0))).collect()
}

/// Serialized form: `{family, num_sites, basis, coeffs[, groups]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct HamiltonianRecord<T> {
    pub family: Family,
    pub num_sites: usize,
    pub basis: Vec<PauliString>,
    pub coeffs: Vec<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<Vec<Vec<usize>>>,
}

/// Matrix-free Pauli sum used by the Taylor propagator.
#[derive(Debug, Clone)]
pub struct PauliSum<T> {
    num_sites: usize,
    terms: Vec<(T, PauliMasks)>,
}

impl<T: Real> PauliSum<T> {
    pub fn new(num_sites: usize, terms: Vec<(T, PauliMasks)>) -> Self {
        Self { num_sites, terms }
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn l1_norm(&self) -> T {
        self.terms.iter().map(|(w, _)| w.abs()).sum()
    }

    /// `out = scale * H v`
    pub fn apply_scaled(&self, scale: C<T>, v: &[C<T>], out: &mut [C<T>]) {
        out.iter_mut().for_each(|o| *o = czero());
        for (w, m) in &self.terms {
            let f = scale * *w;
            for (b, a) in v.iter().enumerate() {
                out[b ^ m.x] = out[b ^ m.x] + f * m.phase::<T>(b) * a;
            }
        }
    }

    /// `exp(-i H tau) v` by a substepped Taylor series.
    pub fn evolve(&self, tau: T, v: &[C<T>]) -> Vec<C<T>> {
        let (steps, h) = self.substeps(tau);
        let mut cur = v.to_vec();
        let mut term = vec![czero(); v.len()];
        let mut next = vec![czero(); v.len()];
        for _ in 0..steps {
            term.copy_from_slice(&cur);
            for m in 1..=80 {
                let scale = c(T::zero(), -h / T::lit(m as f64));
                self.apply_scaled(scale, &term, &mut next);
                std::mem::swap(&mut term, &mut next);
                for (a, t) in cur.iter_mut().zip(&term) {
                    *a = *a + t;
                }
                if vec_norm(&term) <= T::epsilon() * T::lit(0.1) {
                    break;
                }
            }
        }
        cur
    }

    /// Propagates `(v, dv)` to `(e^{-iH tau} v, e^{-iH tau} dv + D[e^{-iH tau}](dir) v)`
    /// where `dir` is the perturbation direction of `H`.
    pub fn evolve_tangent(
        &self,
        dir: &PauliSum<T>,
        tau: T,
        v: &[C<T>],
        dv: &[C<T>],
    ) -> (Vec<C<T>>, Vec<C<T>>) {
        let (steps, h) = self.substeps(tau);
        let len = v.len();
        let mut cur = v.to_vec();
        let mut dcur = dv.to_vec();
        let mut b = vec![czero(); len];
        let mut a = vec![czero(); len];
        let mut nb = vec![czero(); len];
        let mut na = vec![czero(); len];
        let mut tmp = vec![czero(); len];
        for _ in 0..steps {
            b.copy_from_slice(&cur);
            a.copy_from_slice(&dcur);
            for m in 1..=80 {
                let scale = c(T::zero(), -h / T::lit(m as f64));
                self.apply_scaled(scale, &a, &mut na);
                dir.apply_scaled(scale, &b, &mut tmp);
                for (x, y) in na.iter_mut().zip(&tmp) {
                    *x = *x + y;
                }
                self.apply_scaled(scale, &b, &mut nb);
                std::mem::swap(&mut a, &mut na);
                std::mem::swap(&mut b, &mut nb);
                for (x, y) in cur.iter_mut().zip(&b) {
                    *x = *x + y;
                }
                for (x, y) in dcur.iter_mut().zip(&a) {
                    *x = *x + y;
                }
                let tiny = T::epsilon() * T::lit(0.1);
                if vec_norm(&b) <= tiny && vec_norm(&a) <= tiny {
                    break;
                }
            }
        }
        (cur, dcur)
    }

    fn substeps(&self, tau: T) -> (usize, T) {
        let reach = (self.l1_norm() * tau.abs()).to_f64_lossy();
        let steps = (reach / 0.5).ceil().max(1.0) as usize;
        (steps, tau / T::lit(steps as f64))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cr;

    #[test]
    fn family_term_counts() {
        let zx = ParamHamiltonian::<f64>::build_family(Family::ZzXx, 5, Coefficients::Random(1)).unwrap();
        assert_eq!(zx.num_params(), 20);
        assert_eq!(zx.terms()[0].to_string(), "ZZIII");
        assert_eq!(zx.terms()[10].to_string(), "XXIII");
        let tf = ParamHamiltonian::<f64>::build_family(Family::TfimInhomogeneous, 5, Coefficients::Random(1))
            .unwrap();
        assert_eq!(tf.num_params(), 9);
        let g = ParamHamiltonian::<f64>::build_family(Family::Generic2local, 3, Coefficients::Random(1)).unwrap();
        assert_eq!(g.num_params(), 27);
        assert_eq!(g.terms()[1].to_string(), "XYI");
    }

    #[test]
    fn homogeneous_tfim_expands_two_parameters() {
        let h = ParamHamiltonian::build_family(
            Family::TfimHomogeneous,
            10,
            Coefficients::Explicit(vec![0.5, 1.0]),
        )
        .unwrap();
        assert_eq!(h.num_params(), 2);
        assert_eq!(h.terms().len(), 19);
        let tc = h.term_coeffs();
        assert!(tc[..10].iter().all(|&c| c == 0.5));
        assert!(tc[10..].iter().all(|&c| c == 1.0));
    }

    #[test]
    fn build_family_is_seed_deterministic() {
        let a = ParamHamiltonian::<f64>::build_family(Family::ZzXx, 4, Coefficients::Random(7)).unwrap();
        let b = ParamHamiltonian::<f64>::build_family(Family::ZzXx, 4, Coefficients::Random(7)).unwrap();
        let d = ParamHamiltonian::<f64>::build_family(Family::ZzXx, 4, Coefficients::Random(8)).unwrap();
        assert_eq!(a.params(), b.params());
        assert_ne!(a.params(), d.params());
        assert!(a.params().iter().all(|p| (-1.0..=1.0).contains(p)));
    }

    #[test]
    fn unknown_family_and_bad_sizes_fail() {
        assert!(matches!("ising".parse::<Family>(), Err(Error::UnknownFamily(_))));
        assert!(ParamHamiltonian::<f64>::build_family(Family::ZzXx, 1, Coefficients::Random(0)).is_err());
        assert!(ParamHamiltonian::<f64>::build_family(Family::ZzXx, 3, Coefficients::Explicit(vec![1.0])).is_err());
    }

    #[test]
    fn rejects_duplicates_and_three_local_family_terms() {
        let zz: PauliString = "ZZ".parse().unwrap();
        assert!(ParamHamiltonian::custom(2, vec![zz.clone(), zz], vec![1.0, 2.0]).is_err());
        let zzz: PauliString = "ZZZ".parse().unwrap();
        assert!(ParamHamiltonian::with_groups(Family::ZzXx, 3, vec![zzz.clone()], vec![vec![0]], vec![1.0]).is_err());
        assert!(ParamHamiltonian::custom(3, vec![zzz], vec![1.0]).is_ok());
    }

    #[test]
    fn dense_matrix_single_z_and_zero() {
        let z = ParamHamiltonian::custom(1, vec!["Z".parse().unwrap()], vec![1.0]).unwrap();
        let m = z.dense_matrix().unwrap();
        assert_eq!(m[(0, 0)], cr(1.0));
        assert_eq!(m[(1, 1)], cr(-1.0));
        assert_eq!(m[(0, 1)], cr(0.0));
        let zero = ParamHamiltonian::build_family(Family::ZzXx, 3, Coefficients::Explicit(vec![0.0; 6])).unwrap();
        assert_eq!(zero.dense_matrix().unwrap().max_abs(), 0.0);
    }

    #[test]
    fn dense_matrix_is_hermitian() {
        let h = ParamHamiltonian::<f64>::build_family(Family::Generic2local, 3, Coefficients::Random(3)).unwrap();
        assert!(h.dense_matrix().unwrap().hermiticity_defect() < 1e-12);
    }

    #[test]
    fn exact_evolution_basics() {
        let h = ParamHamiltonian::<f64>::build_family(Family::ZzXx, 3, Coefficients::Random(4)).unwrap();
        let u0 = h.exact_evolution(0.0).unwrap();
        assert!(u0.sub(&CMatrix::identity(8)).max_abs() < 1e-12);
        let z = ParamHamiltonian::custom(1, vec!["Z".parse().unwrap()], vec![1.0]).unwrap();
        let u = z.exact_evolution(0.4).unwrap();
        assert!((u[(0, 0)] - c(0.4f64.cos(), -0.4f64.sin())).norm() < 1e-14);
        assert!((u[(1, 1)] - c(0.4f64.cos(), 0.4f64.sin())).norm() < 1e-14);
    }

    #[test]
    fn dense_cap_enforced() {
        let h = ParamHamiltonian::<f64>::build_family(Family::TfimHomogeneous, 13, Coefficients::Random(0)).unwrap();
        assert!(matches!(h.dense_matrix(), Err(Error::DimensionCap { .. })));
    }

    #[test]
    fn json_round_trip_keeps_groups() {
        let h = ParamHamiltonian::build_family(
            Family::TfimHomogeneous,
            4,
            Coefficients::Explicit(vec![0.25, -0.5]),
        )
        .unwrap();
        let back = ParamHamiltonian::<f64>::from_json(&h.to_json()).unwrap();
        assert_eq!(back, h);
        assert!(ParamHamiltonian::<f64>::from_json("{\"family\":\"zz-xx\"}").is_err());
    }

    #[test]
    fn taylor_evolution_matches_eigen() {
        let h = ParamHamiltonian::<f64>::build_family(Family::TfimInhomogeneous, 4, Coefficients::Random(5)).unwrap();
        let psi = crate::sim::StateVector::<f64>::random(4, 1, false).unwrap();
        let exact = h.eigen().unwrap().evolve(0.9, psi.amplitudes());
        let taylor = h.sparse().evolve(0.9, psi.amplitudes());
        for (a, b) in exact.iter().zip(&taylor) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn tangent_matches_finite_difference() {
        let h = ParamHamiltonian::<f64>::build_family(Family::ZzXx, 3, Coefficients::Random(6)).unwrap();
        let psi = crate::sim::StateVector::<f64>::random(3, 2, false).unwrap();
        let zero = vec![czero(); 8];
        let j = 2;
        let (_, d) = h
            .sparse()
            .evolve_tangent(&h.derivative_operator(j), 0.7, psi.amplitudes(), &zero);
        let eps = 1e-6;
        let mut p = h.params().to_vec();
        p[j] += eps;
        let plus = h.with_params(&p).unwrap().sparse().evolve(0.7, psi.amplitudes());
        p[j] -= 2.0 * eps;
        let minus = h.with_params(&p).unwrap().sparse().evolve(0.7, psi.amplitudes());
        for k in 0..8 {
            let fd = (plus[k] - minus[k]) / (2.0 * eps);
            assert!((fd - d[k]).norm() < 1e-8);
        }
    }
}

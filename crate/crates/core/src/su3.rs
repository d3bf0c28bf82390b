//! Single-qutrit Hamiltonians `H = sum_k c_k lambda_k` over the Gell-Mann
//! basis, with series gradients computed in the adjoint representation.
//!
//! Conjugation by `U = exp(-iHt)` acts on the coefficient vector of an
//! observable `O = sum_a o_a lambda_a + o_9 I` as `exp(M)` with
//! `M = -2t K(c)`, `K(c)_{db} = sum_k c_k f^{kbd}`.

use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::{DatasetMode, GeneratorInfo, Observable, Record, TimeSeriesDataset, Truth};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, HermitianEigen};
use crate::optim::{minimize, OptimizerConfig, TrainingTrace};
use crate::scalar::{c, cr, czero, Real, C};
use crate::sim::StateVector;

pub const NUM_GENERATORS: usize = 8;

/// `lambda_k` for `k` in `1..=8`; `k = 9` is the identity.
pub fn gell_mann<T: Real>(k: usize) -> Result<CMatrix<T>> {
    let (o, l, i) = (czero::<T>(), cr(T::one()), c(T::zero(), T::one()));
    let r3 = cr(T::one() / T::lit(3.0).sqrt());
    let rows: [[C<T>; 3]; 3] = match k {
        1 => [[o, l, o], [l, o, o], [o, o, o]],
        2 => [[o, -i, o], [i, o, o], [o, o, o]],
        3 => [[l, o, o], [o, -l, o], [o, o, o]],
        4 => [[o, o, l], [o, o, o], [l, o, o]],
        5 => [[o, o, -i], [o, o, o], [i, o, o]],
        6 => [[o, o, o], [o, o, l], [o, l, o]],
        7 => [[o, o, o], [o, o, -i], [o, i, o]],
        8 => [[r3, o, o], [o, r3, o], [o, o, r3 * cr(T::lit(-2.0))]],
        9 => [[l, o, o], [o, l, o], [o, o, l]],
        _ => return Err(Error::InvalidArgument(format!("Gell-Mann index {k} not in 1..=9"))),
    };
    Ok(CMatrix::from_rows(&[&rows[0], &rows[1], &rows[2]]))
}

/// Totally antisymmetric `f^{abc}` with `[lambda_a, lambda_b] = 2i sum_c f^{abc} lambda_c`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureConstants<T> {
    f: [[[T; 8]; 8]; 8],
}

impl<T: Real> StructureConstants<T> {
    /// `f^{abc}` with one-based indices.
    pub fn get(&self, a: usize, b: usize, c: usize) -> T {
        self.f[a - 1][b - 1][c - 1]
    }
}

fn compute_structure_constants() -> [[[f64; 8]; 8]; 8] {
    let l: Vec<CMatrix<f64>> = (1..=8).map(|k| gell_mann(k).expect("valid index")).collect();
    let mut f = [[[0.0; 8]; 8]; 8];
    for a in 0..8 {
        for b in 0..8 {
            for cc in 0..8 {
                // f^{abc} = -(i/4) tr(lambda_a [lambda_b, lambda_c])
                let t = l[a].matmul(&l[b].commutator(&l[cc])).trace();
                f[a][b][cc] = (c(0.0, -0.25) * t).re;
            }
        }
    }
    f
}

/// Structure constants from the trace formula, computed once.
pub fn structure_constants<T: Real>() -> StructureConstants<T> {
    static CACHE: OnceLock<[[[f64; 8]; 8]; 8]> = OnceLock::new();
    let f64s = CACHE.get_or_init(compute_structure_constants);
    let mut f = [[[T::zero(); 8]; 8]; 8];
    for a in 0..8 {
        for b in 0..8 {
            for cc in 0..8 {
                f[a][b][cc] = T::lit(f64s[a][b][cc]);
            }
        }
    }
    StructureConstants { f }
}

pub fn hamiltonian_matrix<T: Real>(coeffs: &[T]) -> Result<CMatrix<T>> {
    check_coeffs(coeffs)?;
    let mut h = CMatrix::zeros(3);
    for (k, ck) in coeffs.iter().enumerate() {
        h.axpy(cr(*ck), &gell_mann(k + 1)?);
    }
    Ok(h)
}

fn check_coeffs<T: Real>(coeffs: &[T]) -> Result<()> {
    if coeffs.len() != NUM_GENERATORS {
        return Err(Error::DimensionMismatch {
            expected: NUM_GENERATORS,
            found: coeffs.len(),
        });
    }
    if coeffs.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("qutrit coefficient"));
    }
    Ok(())
}

/// Coefficients `(o_1..o_8, o_9)` of a 3x3 matrix in the Gell-Mann basis,
/// and the residual norm left over if it is not Hermitian.
pub fn decompose<T: Real>(o: &CMatrix<T>) -> Result<([T; 9], T)> {
    if o.dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            found: o.dim(),
        });
    }
    let mut v = [T::zero(); 9];
    let mut rebuilt = CMatrix::zeros(3);
    for k in 1..=8 {
        let g = gell_mann::<T>(k)?;
        v[k - 1] = g.matmul(o).trace().re * T::lit(0.5);
        rebuilt.axpy(cr(v[k - 1]), &g);
    }
    v[8] = o.trace().re / T::lit(3.0);
    rebuilt.axpy(cr(v[8]), &CMatrix::identity(3));
    Ok((v, rebuilt.sub(o).frobenius_norm()))
}

pub fn compose<T: Real>(v: &[T; 9]) -> CMatrix<T> {
    let mut m = CMatrix::identity(3).scale(cr(v[8]));
    for k in 1..=8 {
        m.axpy(cr(v[k - 1]), &gell_mann(k).expect("valid index"));
    }
    m
}

type Mat8<T> = [[T; 8]; 8];

/// `M = -2t K(c)`.
fn adjoint_generator<T: Real>(f: &StructureConstants<T>, coeffs: &[T], t: T) -> Mat8<T> {
    let mut m = [[T::zero(); 8]; 8];
    for (d, row) in m.iter_mut().enumerate() {
        for (b, entry) in row.iter_mut().enumerate() {
            let k: T = (0..8).map(|kk| coeffs[kk] * f.f[kk][b][d]).sum();
            *entry = T::lit(-2.0) * t * k;
        }
    }
    m
}

/// `dM/dc_p = -2t K_p`, `(K_p)_{db} = f^{pbd}`.
fn adjoint_direction<T: Real>(f: &StructureConstants<T>, p: usize, t: T) -> Mat8<T> {
    let mut m = [[T::zero(); 8]; 8];
    for (d, row) in m.iter_mut().enumerate() {
        for (b, entry) in row.iter_mut().enumerate() {
            *entry = T::lit(-2.0) * t * f.f[p][b][d];
        }
    }
    m
}

fn mat8_vec<T: Real>(m: &Mat8<T>, v: &[T; 8]) -> [T; 8] {
    let mut out = [T::zero(); 8];
    for (o, row) in out.iter_mut().zip(m) {
        *o = row.iter().zip(v).map(|(a, b)| *a * *b).sum();
    }
    out
}

fn norm8<T: Real>(v: &[T; 8]) -> T {
    v.iter().map(|x| *x * *x).sum::<T>().sqrt()
}

fn split<T: Real>(v: &[T; 9]) -> [T; 8] {
    let mut out = [T::zero(); 8];
    out.copy_from_slice(&v[..8]);
    out
}

fn join<T: Real>(v: &[T; 8], id: T) -> [T; 9] {
    let mut out = [T::zero(); 9];
    out[..8].copy_from_slice(v);
    out[8] = id;
    out
}

/// Series state after summing orders `0..=order`.
struct Series<T> {
    value: [T; 8],
    grads: Vec<[T; 8]>,
    /// Norm of the first omitted term (value and derivatives combined).
    tail: T,
}

fn run_series<T: Real>(
    coeffs: &[T],
    o: &[T; 8],
    t: T,
    order: usize,
    directions: &[usize],
) -> Series<T> {
    let f = structure_constants::<T>();
    let m = adjoint_generator(&f, coeffs, t);
    let mps: Vec<Mat8<T>> = directions.iter().map(|&p| adjoint_direction(&f, p, t)).collect();
    let mut term = *o;
    let mut value = *o;
    let mut dterms = vec![[T::zero(); 8]; directions.len()];
    let mut grads = vec![[T::zero(); 8]; directions.len()];
    let mut tail = T::zero();
    for n in 1..=order + 1 {
        let inv = T::one() / T::lit(n as f64);
        let next: Vec<[T; 8]> = dterms
            .iter()
            .zip(&mps)
            .map(|(d, mp)| {
                let a = mat8_vec(&m, d);
                let b = mat8_vec(mp, &term);
                let mut out = [T::zero(); 8];
                for k in 0..8 {
                    out[k] = (a[k] + b[k]) * inv;
                }
                out
            })
            .collect();
        let mt = mat8_vec(&m, &term);
        let new_term = mt.map(|x| x * inv);
        if n == order + 1 {
            tail = norm8(&new_term) + next.iter().map(norm8).fold(T::zero(), T::max);
            break;
        }
        term = new_term;
        dterms = next;
        for k in 0..8 {
            value[k] = value[k] + term[k];
        }
        for (g, d) in grads.iter_mut().zip(&dterms) {
            for k in 0..8 {
                g[k] = g[k] + d[k];
            }
        }
    }
    Series { value, grads, tail }
}

/// Truncated series for `U^dag O U`, `U = exp(-iHt)`, summing commutator
/// orders `0..=order`.
pub fn bch_conjugation<T: Real>(coeffs: &[T], o: &CMatrix<T>, t: T, order: usize) -> Result<CMatrix<T>> {
    check_coeffs(coeffs)?;
    let (v, _) = decompose(o)?;
    let s = run_series(coeffs, &split(&v), t, order, &[]);
    Ok(compose(&join(&s.value, v[8])))
}

/// Truncated series for `d(U^dag O U)/dc_p`, `p` one-based.
pub fn bch_gradient<T: Real>(coeffs: &[T], o: &CMatrix<T>, t: T, order: usize, p: usize) -> Result<CMatrix<T>> {
    check_coeffs(coeffs)?;
    if !(1..=8).contains(&p) {
        return Err(Error::InvalidArgument(format!("parameter index {p} not in 1..=8")));
    }
    let (v, _) = decompose(o)?;
    let s = run_series(coeffs, &split(&v), t, order, &[p - 1]);
    Ok(compose(&join(&s.grads[0], T::zero())))
}

/// `U^dag O U` through the eigendecomposition of `H`.
pub fn exact_conjugation<T: Real>(coeffs: &[T], o: &CMatrix<T>, t: T) -> Result<CMatrix<T>> {
    let u = HermitianEigen::new(&hamiltonian_matrix(coeffs)?).propagator(t);
    Ok(u.adjoint().matmul(o).matmul(&u))
}

/// Exact `d(U^dag O U)/dc_p` for every `p`, from the divided-difference
/// (Daleckii-Krein) form of the exponential's derivative.
pub fn exact_conjugation_gradients<T: Real>(coeffs: &[T], o: &CMatrix<T>, t: T) -> Result<Vec<CMatrix<T>>> {
    let eig = HermitianEigen::new(&hamiltonian_matrix(coeffs)?);
    let u = eig.propagator(t);
    let v = CMatrix::from_fn(3, |i, j| eig.vector(j)[i]);
    let phase: Vec<C<T>> = eig.values.iter().map(|l| c((*l * t).cos(), -(*l * t).sin())).collect();
    let mut out = Vec::with_capacity(8);
    for p in 1..=8 {
        let lp = v.adjoint().matmul(&gell_mann(p)?).matmul(&v);
        let du_eig = CMatrix::from_fn(3, |j, k| {
            let (a, b) = (eig.values[j], eig.values[k]);
            let g = if (a - b).abs() > T::lit(1e-7) {
                (phase[j] - phase[k]) / cr(a - b)
            } else {
                c(T::zero(), -t) * phase[j]
            };
            lp[(j, k)] * g
        });
        let du = v.matmul(&du_eig).matmul(&v.adjoint());
        let left = du.adjoint().matmul(o).matmul(&u);
        let right = u.adjoint().matmul(o).matmul(&du);
        out.push(left.add(&right));
    }
    Ok(out)
}

/// Series controls for the qutrit learner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SeriesPolicy {
    pub order: usize,
    /// Orders are added beyond `order` until the first omitted term is
    /// smaller than this.
    pub tail_tolerance: f64,
    pub max_order: usize,
    /// Exact conjugation is used when `t * ||c||_1` exceeds this.
    pub exact_above: f64,
}

impl Default for SeriesPolicy {
    fn default() -> Self {
        Self {
            order: 12,
            tail_tolerance: 1e-8,
            max_order: 60,
            exact_above: 1.0,
        }
    }
}

/// Primitive expectations `<psi_i|lambda_j|psi_i>` required by the series
/// gradient, keyed per `(alpha, i, j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementLedger {
    pub entries: Vec<(usize, usize, usize)>,
    /// Distinct `(i, j)` pairs behind the entries.
    pub distinct_primitives: usize,
    /// False if some observable lies outside `span{lambda_k, I}`.
    pub in_span: bool,
    /// Number of `(alpha, i, k)` terms evaluated exactly instead of by series.
    pub exact_fallbacks: usize,
    pub max_order_used: usize,
}

impl MeasurementLedger {
    pub fn size(&self) -> usize {
        self.entries.len()
    }
}

fn qutrit_expectations<T: Real>(psi: &[C<T>]) -> Result<[T; 9]> {
    let mut out = [T::zero(); 9];
    for (j, o) in out.iter_mut().enumerate() {
        let m = gell_mann::<T>(j + 1)?;
        let mv = m.matvec(psi);
        *o = psi.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum::<C<T>>().re;
    }
    Ok(out)
}

fn check_qutrit_dataset<T: Real>(d: &TimeSeriesDataset<T>) -> Result<Vec<usize>> {
    if d.mode != DatasetMode::HamiltonianLearning || d.local_dim != 3 || d.num_sites != 1 {
        return Err(Error::ModeMismatch("expected a single-qutrit dataset"));
    }
    d.observables
        .iter()
        .map(|o| match o {
            Observable::GellMann(k) => Ok(*k),
            Observable::Pauli(_) => Err(Error::ModeMismatch("expected Gell-Mann observables")),
        })
        .collect()
}

/// Cost, gradient and measurement ledger for the qutrit learner.
pub fn su3_cost_gradient<T: Real>(
    coeffs: &[T],
    dataset: &TimeSeriesDataset<T>,
    policy: &SeriesPolicy,
) -> Result<(T, Vec<T>, MeasurementLedger)> {
    check_coeffs(coeffs)?;
    let obs = check_qutrit_dataset(dataset)?;
    let l1: T = coeffs.iter().map(|x| x.abs()).sum();
    let prims: Vec<[T; 9]> = dataset
        .states
        .iter()
        .map(|s| qutrit_expectations(s.amplitudes()))
        .collect::<Result<_>>()?;
    let all: Vec<usize> = (0..8).collect();
    let mut cost = T::zero();
    let mut grad = vec![T::zero(); 8];
    let mut ledger = MeasurementLedger {
        entries: Vec::new(),
        distinct_primitives: 9 * dataset.states.len(),
        in_span: true,
        exact_fallbacks: 0,
        max_order_used: 0,
    };
    for (alpha, &k_obs) in obs.iter().enumerate() {
        let om = gell_mann::<T>(k_obs)?;
        let (ov, resid) = decompose(&om)?;
        ledger.in_span &= resid < T::lit(1e-9);
        for i in 0..dataset.states.len() {
            for j in 1..=9 {
                ledger.entries.push((alpha, i, j));
            }
        }
        for k in 1..=dataset.num_steps {
            let t = dataset.dt * T::lit(k as f64);
            let (val, dval): ([T; 9], Vec<[T; 9]>) = if (t * l1).to_f64_lossy() > policy.exact_above {
                ledger.exact_fallbacks += dataset.states.len();
                let conj = decompose(&exact_conjugation(coeffs, &om, t)?)?.0;
                let grads = exact_conjugation_gradients(coeffs, &om, t)?
                    .iter()
                    .map(|g| decompose(g).map(|d| d.0))
                    .collect::<Result<_>>()?;
                (conj, grads)
            } else {
                let mut order = policy.order;
                let mut s = run_series(coeffs, &split(&ov), t, order, &all);
                while s.tail.to_f64_lossy() > policy.tail_tolerance && order < policy.max_order {
                    order += 4;
                    s = run_series(coeffs, &split(&ov), t, order, &all);
                }
                ledger.max_order_used = ledger.max_order_used.max(order);
                (
                    join(&s.value, ov[8]),
                    s.grads.iter().map(|g| join(g, T::zero())).collect(),
                )
            };
            for (i, pr) in prims.iter().enumerate() {
                let model: T = val.iter().zip(pr).map(|(a, b)| *a * *b).sum();
                let r = model - dataset.value(alpha, i, k);
                cost = cost + r * r;
                for (g, dv) in grad.iter_mut().zip(&dval) {
                    let d: T = dv.iter().zip(pr).map(|(a, b)| *a * *b).sum();
                    *g = *g + T::lit(2.0) * r * d;
                }
            }
        }
    }
    Ok((cost, grad, ledger))
}

/// Exact cost through 3x3 eigendecomposition, for checks.
pub fn su3_cost_exact<T: Real>(coeffs: &[T], dataset: &TimeSeriesDataset<T>) -> Result<T> {
    let obs = check_qutrit_dataset(dataset)?;
    let eig = HermitianEigen::new(&hamiltonian_matrix(coeffs)?);
    let mut cost = T::zero();
    for (alpha, &k_obs) in obs.iter().enumerate() {
        let om = gell_mann::<T>(k_obs)?;
        for (i, s) in dataset.states.iter().enumerate() {
            for k in 1..=dataset.num_steps {
                let psi = eig.evolve(dataset.dt * T::lit(k as f64), s.amplitudes());
                let mv = om.matvec(&psi);
                let model = psi.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum::<C<T>>().re;
                let r = model - dataset.value(alpha, i, k);
                cost = cost + r * r;
            }
        }
    }
    Ok(cost)
}

/// Exact qutrit time series for Gell-Mann observables (`1..=9`).
pub fn generate_su3_data<T: Real>(
    coeffs: &[T],
    states: &[StateVector<T>],
    observables: &[usize],
    num_steps: usize,
    dt: T,
    noise_sigma: T,
    seed: u64,
) -> Result<TimeSeriesDataset<T>> {
    check_coeffs(coeffs)?;
    if num_steps == 0 || states.is_empty() || observables.is_empty() {
        return Err(Error::InvalidArgument(
            "need at least one state, observable and step".into(),
        ));
    }
    for s in states {
        if s.local_dim() != 3 || s.num_sites() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                found: s.dim(),
            });
        }
    }
    let eig = HermitianEigen::new(&hamiltonian_matrix(coeffs)?);
    let mats: Vec<CMatrix<T>> = observables.iter().map(|&k| gell_mann(k)).collect::<Result<_>>()?;
    let mut records = Vec::new();
    for (alpha, m) in mats.iter().enumerate() {
        for (i, s) in states.iter().enumerate() {
            for k in 1..=num_steps {
                let psi = eig.evolve(dt * T::lit(k as f64), s.amplitudes());
                let mv = m.matvec(&psi);
                let value = psi.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum::<C<T>>().re;
                records.push(Record { alpha, i, k, value });
            }
        }
    }
    if noise_sigma > T::zero() {
        let normal = Normal::new(0.0, noise_sigma.to_f64_lossy())
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6e6f_6973_65);
        for r in &mut records {
            r.value = r.value + T::lit(normal.sample(&mut rng));
        }
    }
    Ok(TimeSeriesDataset {
        mode: DatasetMode::HamiltonianLearning,
        num_sites: 1,
        local_dim: 3,
        dt,
        num_steps,
        noise_sigma,
        observables: observables.iter().map(|&k| Observable::GellMann(k)).collect(),
        states: states.to_vec(),
        hamiltonians: Vec::new(),
        generator_info: GeneratorInfo {
            seed,
            truth: Truth::Qutrit {
                coeffs: coeffs.to_vec(),
            },
        },
        records,
    })
}

/// Gradient-descent recovery of the eight coefficients.
pub fn learn_su3<T: Real>(
    cfg: &OptimizerConfig,
    policy: &SeriesPolicy,
    dataset: &TimeSeriesDataset<T>,
    init: Vec<T>,
    truth: Option<&[T]>,
) -> Result<TrainingTrace<T>> {
    check_coeffs(&init)?;
    minimize(
        cfg,
        init,
        |p| su3_cost_gradient(p, dataset, policy).map(|(c, g, _)| (c, g)),
        |p| {
            Ok((
                truth.map(|t| {
                    t.iter()
                        .zip(p)
                        .map(|(a, b)| (*a - *b).abs())
                        .fold(T::zero(), T::max)
                }),
                None,
            ))
        },
    )
}

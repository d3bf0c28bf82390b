//! Brute-force dense linear algebra in plain `f64`, used only to check the
//! simulator. Nothing here shares code with the library's kernels or its
//! eigensolver.
#![allow(dead_code)]

use hamlearn_core::hamiltonian::ParamHamiltonian;
use hamlearn_core::pauli::{Pauli, PauliObservable, PauliString};
use hamlearn_core::sim::{Circuit, Gate};
use num_complex::Complex64 as Cx;

fn cx(re: f64, im: f64) -> Cx {
    Cx::new(re, im)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub dim: usize,
    pub data: Vec<Cx>,
}

impl Dense {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![cx(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = cx(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Cx>>) -> Self {
        let dim = rows.len();
        Self {
            dim,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn at(&self, i: usize, j: usize) -> Cx {
        self.data[i * self.dim + j]
    }

    pub fn mul(&self, b: &Dense) -> Dense {
        let n = self.dim;
        let mut out = Dense::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut s = cx(0.0, 0.0);
                for k in 0..n {
                    s += self.at(i, k) * b.at(k, j);
                }
                out.data[i * n + j] = s;
            }
        }
        out
    }

    pub fn adjoint(&self) -> Dense {
        let n = self.dim;
        let mut out = Dense::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.at(i, j).conj();
            }
        }
        out
    }

    pub fn add(&self, b: &Dense) -> Dense {
        Dense {
            dim: self.dim,
            data: self.data.iter().zip(&b.data).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn sub(&self, b: &Dense) -> Dense {
        Dense {
            dim: self.dim,
            data: self.data.iter().zip(&b.data).map(|(x, y)| x - y).collect(),
        }
    }

    pub fn scale(&self, s: Cx) -> Dense {
        Dense {
            dim: self.dim,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn kron(&self, b: &Dense) -> Dense {
        let (n, m) = (self.dim, b.dim);
        let mut out = Dense::zeros(n * m);
        for i in 0..n {
            for j in 0..n {
                for k in 0..m {
                    for l in 0..m {
                        out.data[(i * m + k) * n * m + j * m + l] = self.at(i, j) * b.at(k, l);
                    }
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Cx]) -> Vec<Cx> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.at(i, j) * v[j]).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> Cx {
        (0..self.dim).map(|i| self.at(i, i)).sum()
    }
}

pub fn pauli(p: Pauli) -> Dense {
    let (o, l, i) = (cx(0.0, 0.0), cx(1.0, 0.0), cx(0.0, 1.0));
    Dense::from_rows(match p {
        Pauli::I => vec![vec![l, o], vec![o, l]],
        Pauli::X => vec![vec![o, l], vec![l, o]],
        Pauli::Y => vec![vec![o, -i], vec![i, o]],
        Pauli::Z => vec![vec![l, o], vec![o, -l]],
    })
}

/// Tensor product with site 0 as the leftmost factor.
pub fn kron_all(factors: &[Dense]) -> Dense {
    let mut out = Dense::identity(1);
    for f in factors {
        out = out.kron(f);
    }
    out
}

pub fn string_matrix(s: &PauliString) -> Dense {
    kron_all(&s.ops().iter().map(|&p| pauli(p)).collect::<Vec<_>>())
}

pub fn observable_matrix(o: &PauliObservable<f64>) -> Dense {
    let mut m = Dense::zeros(1 << o.num_sites());
    for t in o.terms() {
        m = m.add(&string_matrix(&t.string).scale(cx(t.weight, 0.0)));
    }
    m
}

pub fn hamiltonian_matrix(h: &ParamHamiltonian<f64>) -> Dense {
    let mut m = Dense::zeros(1 << h.num_sites());
    for (s, w) in h.terms().iter().zip(h.term_coeffs()) {
        m = m.add(&string_matrix(s).scale(cx(w, 0.0)));
    }
    m
}

fn controlled(n: usize, control: usize, target: usize, op: Pauli) -> Dense {
    let p0 = Dense::from_rows(vec![vec![cx(1.0, 0.0), cx(0.0, 0.0)], vec![cx(0.0, 0.0); 2]]);
    let p1 = Dense::from_rows(vec![vec![cx(0.0, 0.0); 2], vec![cx(0.0, 0.0), cx(1.0, 0.0)]]);
    let a: Vec<Dense> = (0..n)
        .map(|q| if q == control { p0.clone() } else { pauli(Pauli::I) })
        .collect();
    let b: Vec<Dense> = (0..n)
        .map(|q| {
            if q == control {
                p1.clone()
            } else if q == target {
                pauli(op)
            } else {
                pauli(Pauli::I)
            }
        })
        .collect();
    kron_all(&a).add(&kron_all(&b))
}

/// `cos(theta/2) I - i sin(theta/2) P`.
fn rotation(n: usize, ops: &[(usize, Pauli)], theta: f64) -> Dense {
    let factors: Vec<Dense> = (0..n)
        .map(|q| {
            ops.iter()
                .find(|(s, _)| *s == q)
                .map(|(_, p)| pauli(*p))
                .unwrap_or_else(|| pauli(Pauli::I))
        })
        .collect();
    let p = kron_all(&factors);
    Dense::identity(1 << n)
        .scale(cx((theta / 2.0).cos(), 0.0))
        .add(&p.scale(cx(0.0, -(theta / 2.0).sin())))
}

pub fn gate_matrix(g: &Gate<f64>, n: usize) -> Dense {
    match *g {
        Gate::Rx { target, angle } => rotation(n, &[(target, Pauli::X)], angle),
        Gate::Ry { target, angle } => rotation(n, &[(target, Pauli::Y)], angle),
        Gate::Rz { target, angle } => rotation(n, &[(target, Pauli::Z)], angle),
        Gate::Cnot { control, target } => controlled(n, control, target, Pauli::X),
        Gate::Cy { control, target } => controlled(n, control, target, Pauli::Y),
        Gate::PauliRotation { sites, paulis, angle } => rotation(
            n,
            &[(sites[0], paulis[0]), (sites[1], paulis[1])],
            angle,
        ),
    }
}

pub fn circuit_matrix(c: &Circuit<f64>) -> Dense {
    let n = c.num_sites();
    let mut u = Dense::identity(1 << n);
    for g in c.gates() {
        u = gate_matrix(g, n).mul(&u);
    }
    u
}

/// `exp(a)` by scaling and squaring around a 30-term Taylor series.
pub fn expm(a: &Dense) -> Dense {
    let norm = a.frobenius();
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let x = a.scale(cx(scale, 0.0));
    let mut term = Dense::identity(a.dim);
    let mut sum = term.clone();
    for k in 1..=30 {
        term = term.mul(&x).scale(cx(1.0 / k as f64, 0.0));
        sum = sum.add(&term);
    }
    for _ in 0..squarings {
        sum = sum.mul(&sum);
    }
    sum
}

/// `exp(-i H t)`.
pub fn evolution(h: &Dense, t: f64) -> Dense {
    expm(&h.scale(cx(0.0, -t)))
}

pub fn sandwich(psi: &[Cx], m: &Dense) -> Cx {
    let mv = m.matvec(psi);
    psi.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum()
}

pub fn outer(psi: &[Cx]) -> Dense {
    let n = psi.len();
    let mut m = Dense::zeros(n);
    for i in 0..n {
        for j in 0..n {
            m.data[i * n + j] = psi[i] * psi[j].conj();
        }
    }
    m
}

/// Cyclic Jacobi eigenvalues of a real symmetric matrix (row-major).
pub fn symmetric_eigenvalues(mut a: Vec<f64>, n: usize) -> Vec<f64> {
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j].powi(2))
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

/// Eigenvalues of a Hermitian matrix through its real symmetric embedding
/// `[[Re, -Im], [Im, Re]]`, whose spectrum is the original one doubled.
pub fn hermitian_eigenvalues(m: &Dense) -> Vec<f64> {
    let n = m.dim;
    let big = 2 * n;
    let mut a = vec![0.0; big * big];
    for i in 0..n {
        for j in 0..n {
            let z = m.at(i, j);
            a[i * big + j] = z.re;
            a[(i + n) * big + j + n] = z.re;
            a[(i + n) * big + j] = z.im;
            a[i * big + j + n] = -z.im;
        }
    }
    symmetric_eigenvalues(a, big).into_iter().step_by(2).collect()
}

pub fn spectral_norm(m: &Dense) -> f64 {
    let g = m.adjoint().mul(m);
    hermitian_eigenvalues(&g)
        .into_iter()
        .fold(0.0, f64::max)
        .max(0.0)
        .sqrt()
}

/// `1/2 ||rho - sigma||_1` for pure states.
pub fn state_trace_distance(a: &[Cx], b: &[Cx]) -> f64 {
    let d = outer(a).sub(&outer(b));
    0.5 * hermitian_eigenvalues(&d).iter().map(|x| x.abs()).sum::<f64>()
}

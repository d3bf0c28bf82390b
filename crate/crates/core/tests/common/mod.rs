#![allow(dead_code)]

pub mod oracle;

use num_complex::Complex64;

pub fn to_dense(m: &hamlearn_core::linalg::CMatrix<f64>) -> oracle::Dense {
    let n = m.dim();
    oracle::Dense {
        dim: n,
        data: (0..n * n).map(|k| m[(k / n, k % n)]).collect(),
    }
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

use serde::{Deserialize, Serialize};

use super::{Gate, StateVector};
use crate::error::{Error, Result};
use crate::linalg::{check_cap, CMatrix};
use crate::scalar::Real;

/// Ordered gate list on a fixed register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Circuit<T> {
    num_sites: usize,
    gates: Vec<Gate<T>>,
}

impl<T: Real> Circuit<T> {
    pub fn new(num_sites: usize) -> Self {
        Self {
            num_sites,
            gates: Vec::new(),
        }
    }

    pub fn from_gates(num_sites: usize, gates: Vec<Gate<T>>) -> Result<Self> {
        let c = Self { num_sites, gates };
        c.validate()?;
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate<T>) -> Result<()> {
        gate.validate(self.num_sites)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, other: &Circuit<T>) -> Result<()> {
        if other.num_sites != self.num_sites {
            return Err(Error::DimensionMismatch {
                expected: self.num_sites,
                found: other.num_sites,
            });
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(())
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn gates(&self) -> &[Gate<T>] {
        &self.gates
    }

    pub fn gates_mut(&mut self) -> &mut [Gate<T>] {
        &mut self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        self.gates.iter().try_for_each(|g| g.validate(self.num_sites))
    }

    pub fn two_site_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_site()).count()
    }

    /// As-soon-as-possible layering depth.
    pub fn depth(&self) -> usize {
        let mut level = vec![0usize; self.num_sites];
        let mut depth = 0;
        for g in &self.gates {
            let sites = g.sites();
            let l = sites.iter().map(|&s| level[s]).max().unwrap_or(0) + 1;
            for s in sites {
                level[s] = l;
            }
            depth = depth.max(l);
        }
        depth
    }

    pub fn inverse(&self) -> Self {
        Self {
            num_sites: self.num_sites,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    /// Dense unitary, built column by column with the in-place kernels.
    pub fn unitary(&self) -> Result<CMatrix<T>> {
        let dim = 1usize << self.num_sites;
        check_cap(dim)?;
        self.validate()?;
        let mut u = CMatrix::zeros(dim);
        for col in 0..dim {
            let mut psi = StateVector::basis_state(self.num_sites, 2, col)?;
            psi.apply_circuit_mut(self)?;
            for (row, a) in psi.amplitudes().iter().enumerate() {
                u[(row, col)] = *a;
            }
        }
        Ok(u)
    }

    /// One gate per line: `NAME sites... [angle]`.
    pub fn to_text(&self) -> String {
        let mut out = format!("# sites {}\n", self.num_sites);
        for g in &self.gates {
            out.push_str(&g.to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut num_sites = None;
        let mut gates = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(rest) = line.strip_prefix('#') {
                let mut it = rest.split_whitespace();
                if it.next() == Some("sites") {
                    num_sites = it.next().and_then(|v| v.parse().ok());
                }
                continue;
            }
            gates.push(line.parse()?);
        }
        let num_sites =
            num_sites.ok_or_else(|| Error::Parse("missing `# sites N` header".into()))?;
        Self::from_gates(num_sites, gates)
    }
}

//! Pauli strings and real-weighted sums of them.
//!
//! Strings are written site-major: `"IZZIX"` has `Z` on sites 1 and 2 and
//! `X` on site 4. Site 0 is the most significant bit of a basis index.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{c, czero, Real, C};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(ch: char) -> Option<Self> {
        match ch.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// Whether the operator flips the computational basis bit.
    #[inline]
    pub fn flips(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    #[inline]
    pub fn has_phase(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }

    /// 2x2 matrix, row-major.
    pub fn matrix<T: Real>(self) -> [[C<T>; 2]; 2] {
        let (o, l, i) = (czero::<T>(), c(T::one(), T::zero()), c(T::zero(), T::one()));
        match self {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }
}

/// Tensor product of single-site Paulis on a qubit register.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    ops: Vec<Pauli>,
}

/// Bit masks describing how a string acts on computational basis states:
/// `S|b> = i^ny (-1)^popcount(b & z) |b ^ x>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PauliMasks {
    pub x: usize,
    pub z: usize,
    pub num_y: u32,
}

impl PauliMasks {
    /// Phase picked up by basis state `b`.
    #[inline]
    pub fn phase<T: Real>(&self, b: usize) -> C<T> {
        let sign = if (b & self.z).count_ones() % 2 == 0 {
            T::one()
        } else {
            -T::one()
        };
        match self.num_y % 4 {
            0 => c(sign, T::zero()),
            1 => c(T::zero(), sign),
            2 => c(-sign, T::zero()),
            _ => c(T::zero(), -sign),
        }
    }
}

impl PauliString {
    pub fn new(ops: Vec<Pauli>) -> Self {
        Self { ops }
    }

    pub fn identity(num_sites: usize) -> Self {
        Self {
            ops: vec![Pauli::I; num_sites],
        }
    }

    /// Identity except for the listed `(site, op)` pairs.
    pub fn from_sparse(num_sites: usize, ops: &[(usize, Pauli)]) -> Result<Self> {
        let mut s = Self::identity(num_sites);
        for &(site, op) in ops {
            if site >= num_sites {
                return Err(Error::SiteOutOfRange {
                    index: site,
                    num_sites,
                });
            }
            s.ops[site] = op;
        }
        Ok(s)
    }

    pub fn single(num_sites: usize, site: usize, op: Pauli) -> Result<Self> {
        Self::from_sparse(num_sites, &[(site, op)])
    }

    pub fn pair(num_sites: usize, i: usize, a: Pauli, j: usize, b: Pauli) -> Result<Self> {
        if i == j {
            return Err(Error::DuplicateTarget(i));
        }
        Self::from_sparse(num_sites, &[(i, a), (j, b)])
    }

    #[inline]
    pub fn num_sites(&self) -> usize {
        self.ops.len()
    }

    pub fn ops(&self) -> &[Pauli] {
        &self.ops
    }

    pub fn op(&self, site: usize) -> Pauli {
        self.ops[site]
    }

    /// Sites carrying a non-identity operator, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.ops
            .iter()
            .enumerate()
            .filter(|(_, p)| **p != Pauli::I)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn weight(&self) -> usize {
        self.ops.iter().filter(|p| **p != Pauli::I).count()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    pub fn masks(&self) -> PauliMasks {
        let n = self.ops.len();
        let mut m = PauliMasks {
            x: 0,
            z: 0,
            num_y: 0,
        };
        for (q, p) in self.ops.iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            if p.flips() {
                m.x |= bit;
            }
            if p.has_phase() {
                m.z |= bit;
            }
            if *p == Pauli::Y {
                m.num_y += 1;
            }
        }
        m
    }

    /// Two strings commute iff they anticommute on an even number of sites.
    pub fn commutes_with(&self, other: &Self) -> bool {
        self.ops
            .iter()
            .zip(&other.ops)
            .filter(|(a, b)| **a != Pauli::I && **b != Pauli::I && a != b)
            .count()
            % 2
            == 0
    }

    /// `<psi|S|psi>` (complex; the imaginary part vanishes for normalized input).
    pub fn expectation_complex<T: Real>(&self, psi: &[C<T>]) -> C<T> {
        let m = self.masks();
        let mut acc = czero::<T>();
        for (b, amp) in psi.iter().enumerate() {
            acc = acc + psi[b ^ m.x].conj() * m.phase::<T>(b) * amp;
        }
        acc
    }

    /// `out += w * S |psi>`
    pub fn apply_accumulate<T: Real>(&self, w: C<T>, psi: &[C<T>], out: &mut [C<T>]) {
        let m = self.masks();
        for (b, amp) in psi.iter().enumerate() {
            out[b ^ m.x] = out[b ^ m.x] + w * m.phase::<T>(b) * amp;
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.ops {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let ops = s
            .trim()
            .chars()
            .map(|ch| {
                Pauli::from_char(ch)
                    .ok_or_else(|| Error::Parse(format!("bad Pauli symbol `{ch}` in `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if ops.is_empty() {
            return Err(Error::Parse("empty Pauli string".into()));
        }
        Ok(Self { ops })
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One weighted string inside a [`PauliObservable`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PauliTerm<T> {
    pub weight: T,
    pub string: PauliString,
}

/// Hermitian observable `sum_k w_k S_k` with real weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PauliObservable<T> {
    num_sites: usize,
    terms: Vec<PauliTerm<T>>,
}

impl<T: Real> PauliObservable<T> {
    pub fn new(num_sites: usize, terms: Vec<(T, PauliString)>) -> Result<Self> {
        let mut out = Vec::with_capacity(terms.len());
        for (w, s) in terms {
            if s.num_sites() != num_sites {
                return Err(Error::DimensionMismatch {
                    expected: num_sites,
                    found: s.num_sites(),
                });
            }
            if !w.is_finite() {
                return Err(Error::NonFinite("observable weight"));
            }
            out.push(PauliTerm { weight: w, string: s });
        }
        Ok(Self {
            num_sites,
            terms: out,
        })
    }

    pub fn from_string(s: PauliString) -> Self {
        Self {
            num_sites: s.num_sites(),
            terms: vec![PauliTerm {
                weight: T::one(),
                string: s,
            }],
        }
    }

    /// `sum_p sigma_axis^p` with unit weights.
    pub fn magnetization(num_sites: usize, axis: Pauli) -> Self {
        let terms = (0..num_sites)
            .map(|p| PauliTerm {
                weight: T::one(),
                string: PauliString::single(num_sites, p, axis).expect("site in range"),
            })
            .collect();
        Self { num_sites, terms }
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn terms(&self) -> &[PauliTerm<T>] {
        &self.terms
    }

    /// Upper bound on `|<O>|`.
    pub fn weight_l1(&self) -> T {
        self.terms.iter().map(|t| t.weight.abs()).sum()
    }

    pub fn is_identity(&self) -> bool {
        self.terms.iter().all(|t| t.string.is_identity())
    }

    pub fn expectation_complex(&self, psi: &[C<T>]) -> C<T> {
        self.terms
            .iter()
            .fold(czero(), |acc, t| acc + t.string.expectation_complex(psi) * t.weight)
    }

    /// `out += w * O |psi>`
    pub fn apply_accumulate(&self, w: T, psi: &[C<T>], out: &mut [C<T>]) {
        for t in &self.terms {
            t.string
                .apply_accumulate(c(w * t.weight, T::zero()), psi, out);
        }
    }

    /// Short label: the single string for one-term observables, otherwise a
    /// `+`-joined list of weighted strings.
    pub fn label(&self) -> String {
        if self.terms.len() == 1 && self.terms[0].weight == T::one() {
            return self.terms[0].string.to_string();
        }
        self.terms
            .iter()
            .map(|t| format!("{}*{}", t.weight, t.string))
            .collect::<Vec<_>>()
            .join("+")
    }
}

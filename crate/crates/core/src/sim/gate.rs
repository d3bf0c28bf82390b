use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};
use crate::scalar::{c, Real, C};

/// Elementary gate acting on qubit sites.
///
/// Every rotation follows `R_P(theta) = exp(-i theta P / 2)`, including the
/// two-site `PauliRotation` which exponentiates `P_a (x) P_b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub enum Gate<T> {
    Rx { target: usize, angle: T },
    Ry { target: usize, angle: T },
    Rz { target: usize, angle: T },
    Cnot { control: usize, target: usize },
    Cy { control: usize, target: usize },
    PauliRotation { sites: [usize; 2], paulis: [Pauli; 2], angle: T },
}

impl<T: Real> Gate<T> {
    pub fn rx(target: usize, angle: T) -> Self {
        Gate::Rx { target, angle }
    }
    pub fn ry(target: usize, angle: T) -> Self {
        Gate::Ry { target, angle }
    }
    pub fn rz(target: usize, angle: T) -> Self {
        Gate::Rz { target, angle }
    }
    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::Cnot { control, target }
    }
    pub fn cy(control: usize, target: usize) -> Self {
        Gate::Cy { control, target }
    }
    pub fn pauli_rotation(a: usize, pa: Pauli, b: usize, pb: Pauli, angle: T) -> Self {
        Gate::PauliRotation {
            sites: [a, b],
            paulis: [pa, pb],
            angle,
        }
    }

    /// Single-site rotation about `axis`; `None` for the identity axis.
    pub fn rotation(axis: Pauli, target: usize, angle: T) -> Option<Self> {
        match axis {
            Pauli::X => Some(Gate::Rx { target, angle }),
            Pauli::Y => Some(Gate::Ry { target, angle }),
            Pauli::Z => Some(Gate::Rz { target, angle }),
            Pauli::I => None,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Gate::Rx { .. } => "RX".into(),
            Gate::Ry { .. } => "RY".into(),
            Gate::Rz { .. } => "RZ".into(),
            Gate::Cnot { .. } => "CNOT".into(),
            Gate::Cy { .. } => "CY".into(),
            Gate::PauliRotation { paulis, .. } => {
                format!("R{}{}", paulis[0].as_char(), paulis[1].as_char())
            }
        }
    }

    pub fn sites(&self) -> Vec<usize> {
        match *self {
            Gate::Rx { target, .. } | Gate::Ry { target, .. } | Gate::Rz { target, .. } => {
                vec![target]
            }
            Gate::Cnot { control, target } | Gate::Cy { control, target } => {
                vec![control, target]
            }
            Gate::PauliRotation { sites, .. } => sites.to_vec(),
        }
    }

    pub fn is_two_site(&self) -> bool {
        matches!(
            self,
            Gate::Cnot { .. } | Gate::Cy { .. } | Gate::PauliRotation { .. }
        )
    }

    pub fn angle(&self) -> Option<T> {
        match *self {
            Gate::Rx { angle, .. }
            | Gate::Ry { angle, .. }
            | Gate::Rz { angle, .. }
            | Gate::PauliRotation { angle, .. } => Some(angle),
            _ => None,
        }
    }

    pub fn with_angle(&self, new: T) -> Self {
        let mut g = *self;
        match &mut g {
            Gate::Rx { angle, .. }
            | Gate::Ry { angle, .. }
            | Gate::Rz { angle, .. }
            | Gate::PauliRotation { angle, .. } => *angle = new,
            _ => {}
        }
        g
    }

    /// Same gate with its angle shifted by `delta`; fixed gates are unchanged.
    pub fn shifted(&self, delta: T) -> Self {
        match self.angle() {
            Some(a) => self.with_angle(a + delta),
            None => *self,
        }
    }

    /// Pauli generator `P` of a rotation, as a string over `num_sites`.
    pub fn generator(&self, num_sites: usize) -> Option<PauliString> {
        match *self {
            Gate::Rx { target, .. } => PauliString::single(num_sites, target, Pauli::X).ok(),
            Gate::Ry { target, .. } => PauliString::single(num_sites, target, Pauli::Y).ok(),
            Gate::Rz { target, .. } => PauliString::single(num_sites, target, Pauli::Z).ok(),
            Gate::PauliRotation { sites, paulis, .. } => {
                PauliString::pair(num_sites, sites[0], paulis[0], sites[1], paulis[1]).ok()
            }
            _ => None,
        }
    }

    pub fn inverse(&self) -> Self {
        match self.angle() {
            Some(a) => self.with_angle(-a),
            None => *self,
        }
    }

    pub fn validate(&self, num_sites: usize) -> Result<()> {
        let sites = self.sites();
        for &s in &sites {
            if s >= num_sites {
                return Err(Error::SiteOutOfRange {
                    index: s,
                    num_sites,
                });
            }
        }
        if sites.len() == 2 && sites[0] == sites[1] {
            return Err(Error::DuplicateTarget(sites[0]));
        }
        if let Some(a) = self.angle() {
            if !a.is_finite() {
                return Err(Error::NonFinite("gate angle"));
            }
        }
        if let Gate::PauliRotation { paulis, .. } = self {
            if paulis.contains(&Pauli::I) {
                return Err(Error::InvalidArgument(
                    "two-site Pauli rotation needs non-identity factors".into(),
                ));
            }
        }
        Ok(())
    }

    /// Applies the gate in place to `n`-qubit amplitudes. Targets must
    /// already be validated.
    pub(crate) fn apply_in_place(&self, amps: &mut [C<T>], n: usize) {
        let half = T::lit(0.5);
        match *self {
            Gate::Rx { target, angle } => {
                let (s, co) = (angle * half).sin_cos();
                let m = [[c(co, T::zero()), c(T::zero(), -s)], [c(T::zero(), -s), c(co, T::zero())]];
                apply_single(amps, n, target, &m);
            }
            Gate::Ry { target, angle } => {
                let (s, co) = (angle * half).sin_cos();
                let m = [[c(co, T::zero()), c(-s, T::zero())], [c(s, T::zero()), c(co, T::zero())]];
                apply_single(amps, n, target, &m);
            }
            Gate::Rz { target, angle } => {
                let (s, co) = (angle * half).sin_cos();
                let stride = 1usize << (n - 1 - target);
                let lo = c(co, -s);
                let hi = c(co, s);
                for (i, a) in amps.iter_mut().enumerate() {
                    *a = *a * if i & stride == 0 { lo } else { hi };
                }
            }
            Gate::Cnot { control, target } => {
                let cb = 1usize << (n - 1 - control);
                let tb = 1usize << (n - 1 - target);
                for i in 0..amps.len() {
                    if i & cb != 0 && i & tb == 0 {
                        amps.swap(i, i | tb);
                    }
                }
            }
            Gate::Cy { control, target } => {
                let cb = 1usize << (n - 1 - control);
                let tb = 1usize << (n - 1 - target);
                let im = c(T::zero(), T::one());
                for i in 0..amps.len() {
                    if i & cb != 0 && i & tb == 0 {
                        let a0 = amps[i];
                        let a1 = amps[i | tb];
                        amps[i] = -im * a1;
                        amps[i | tb] = im * a0;
                    }
                }
            }
            Gate::PauliRotation { sites, paulis, angle } => {
                let s = PauliString::pair(n, sites[0], paulis[0], sites[1], paulis[1])
                    .expect("validated gate");
                apply_pauli_rotation(amps, &s, angle);
            }
        }
    }
}

fn apply_single<T: Real>(amps: &mut [C<T>], n: usize, target: usize, m: &[[C<T>; 2]; 2]) {
    let stride = 1usize << (n - 1 - target);
    let dim = amps.len();
    let mut base = 0;
    while base < dim {
        for i0 in base..base + stride {
            let i1 = i0 + stride;
            let a0 = amps[i0];
            let a1 = amps[i1];
            amps[i0] = m[0][0] * a0 + m[0][1] * a1;
            amps[i1] = m[1][0] * a0 + m[1][1] * a1;
        }
        base += 2 * stride;
    }
}

/// `exp(-i theta S / 2) |psi>` for an arbitrary Pauli string `S`.
pub fn apply_pauli_rotation<T: Real>(amps: &mut [C<T>], s: &PauliString, theta: T) {
    let m = s.masks();
    let (sn, co) = (theta * T::lit(0.5)).sin_cos();
    let minus_i_sin = c(T::zero(), -sn);
    if m.x == 0 {
        for (b, a) in amps.iter_mut().enumerate() {
            *a = *a * (c(co, T::zero()) + minus_i_sin * m.phase::<T>(b));
        }
        return;
    }
    for b in 0..amps.len() {
        let partner = b ^ m.x;
        if b < partner {
            let ab = amps[b];
            let ap = amps[partner];
            // S|b> = phase(b)|partner>, S|partner> = phase(partner)|b>
            amps[b] = ab * co + minus_i_sin * m.phase::<T>(partner) * ap;
            amps[partner] = ap * co + minus_i_sin * m.phase::<T>(b) * ab;
        }
    }
}

impl<T: Real> fmt::Display for Gate<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())?;
        for s in self.sites() {
            write!(f, " {s}")?;
        }
        if let Some(a) = self.angle() {
            write!(f, " {a:e}")?;
        }
        Ok(())
    }
}

impl<T: Real> FromStr for Gate<T> {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad gate line `{line}`"));
        let mut parts = line.split_whitespace();
        let name = parts.next().ok_or_else(bad)?.to_ascii_uppercase();
        let rest: Vec<&str> = parts.collect();
        let site = |i: usize| -> Result<usize> {
            rest.get(i).ok_or_else(bad)?.parse().map_err(|_| bad())
        };
        let angle = |i: usize| -> Result<T> {
            let v: f64 = rest.get(i).ok_or_else(bad)?.parse().map_err(|_| bad())?;
            Ok(T::lit(v))
        };
        let g = match name.as_str() {
            "RX" => Gate::rx(site(0)?, angle(1)?),
            "RY" => Gate::ry(site(0)?, angle(1)?),
            "RZ" => Gate::rz(site(0)?, angle(1)?),
            "CNOT" => Gate::cnot(site(0)?, site(1)?),
            "CY" => Gate::cy(site(0)?, site(1)?),
            other if other.len() == 3 && other.starts_with('R') => {
                let mut ch = other.chars().skip(1);
                let pa = ch.next().and_then(Pauli::from_char).ok_or_else(bad)?;
                let pb = ch.next().and_then(Pauli::from_char).ok_or_else(bad)?;
                Gate::pauli_rotation(site(0)?, pa, site(1)?, pb, angle(2)?)
            }
            _ => return Err(bad()),
        };
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use num_complex::Complex64;

    fn random_amps(n: usize, seed: u64) -> Vec<Complex64> {
        crate::sim::StateVector::<f64>::random(n, seed, false)
            .unwrap()
            .into_amplitudes()
    }

    #[test]
    fn kernels_match_dense_matrices() {
        let gates = [
            Gate::rx(1, 0.7),
            Gate::ry(0, -1.3),
            Gate::rz(2, 2.1),
            Gate::cnot(2, 0),
            Gate::cy(0, 1),
            Gate::pauli_rotation(0, Pauli::Y, 2, Pauli::X, 0.9),
        ];
        for (k, g) in gates.iter().enumerate() {
            let psi = random_amps(3, k as u64);
            let mut out = psi.clone();
            g.apply_in_place(&mut out, 3);
            let want = oracle::gate_matrix(g, 3).matvec(&psi);
            for (a, b) in out.iter().zip(&want) {
                assert!((a - b).norm() < 1e-12, "{g}");
            }
        }
    }

    #[test]
    fn ry_half_pi_on_zero() {
        let mut a = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        Gate::ry(0, std::f64::consts::FRAC_PI_2).apply_in_place(&mut a, 1);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((a[0].re - r).abs() < 1e-15 && (a[1].re - r).abs() < 1e-15);
    }

    #[test]
    fn inverse_undoes_gate() {
        let g = Gate::pauli_rotation(1, Pauli::Z, 0, Pauli::Y, 1.1);
        let psi = random_amps(2, 9);
        let mut a = psi.clone();
        g.apply_in_place(&mut a, 2);
        g.inverse().apply_in_place(&mut a, 2);
        for (x, y) in a.iter().zip(&psi) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn validation_errors() {
        assert!(Gate::<f64>::cnot(1, 1).validate(2).is_err());
        assert!(Gate::<f64>::rx(3, 0.1).validate(3).is_err());
        assert!(Gate::rx(0, f64::NAN).validate(1).is_err());
        assert!(Gate::pauli_rotation(0, Pauli::I, 1, Pauli::X, 0.1f64).validate(2).is_err());
    }

    #[test]
    fn text_round_trip() {
        let g = Gate::pauli_rotation(0, Pauli::X, 3, Pauli::Z, -0.25f64);
        let back: Gate<f64> = g.to_string().parse().unwrap();
        assert_eq!(back, g);
    }
}
